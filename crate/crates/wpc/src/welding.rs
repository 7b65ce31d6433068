//! Conformal welding by fixed-point iteration.
//!
//! A curve parametrized proportionally to arc length factors as gamma = h o f
//! with f an increasing self-map of the line and h conformal-boundary data.
//! The arc-length condition ties the two together: with u = log f', the pair
//! solves v = -P_f H P_f^{-1}(u) where H is the Hilbert transform and P_f is
//! composition with f. `eval_lambda_inverse` evaluates that map directly;
//! `eval_lambda` inverts it by damped fixed-point iteration; `weld_decompose`
//! runs the whole factorization from a normalized log-derivative.

use num_complex::Complex64;

use crate::curve::{
    curve_from_log_derivative, homeo_from_real_u, j_inverse, q_transform, CurveParam, PlaneCurve,
};
use crate::error::{Result, WpcError};
use crate::grid::{MonotoneMap, SampledFunction};
use crate::spaces::hilbert_line;

/// Outcome of a welding computation. `log_f_prime` is real data for the
/// increasing reparametrization, `log_h_prime` the complex boundary
/// log-derivative. `residual` is the sup-norm of the fixed-point defect for
/// the solvers; `weld_decompose` replaces it with the composition defect
/// sup |h(f(x)) - gamma(x)| over the inner quarter window.
#[derive(Debug, Clone)]
pub struct WeldingResult {
    pub log_f_prime: SampledFunction,
    pub log_h_prime: SampledFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Like variable_change, but targets beyond the window follow a 1/t decay
/// anchored on a near-edge average. That is the actual far-field shape of
/// the transforms moved around by the welding conjugation; for compactly
/// supported data the anchors vanish and nothing changes.
fn resample_decaying(w: &SampledFunction, h: &MonotoneMap) -> Result<SampledFunction> {
    let g = *w.grid.as_line()?;
    let m = g.intervals();
    let x_lo = g.node(0);
    let x_hi = g.node(m);
    let k = (m / 128).max(1).min(m - 1);
    let mut lo_val = Complex64::new(0.0, 0.0);
    let mut hi_val = Complex64::new(0.0, 0.0);
    let mut lo_pos = 0.0;
    let mut hi_pos = 0.0;
    // the outermost sample on each side is excluded: it is itself
    // reconstructed by the transform and noisier than its neighbors
    for j in 1..=k {
        lo_val += w.values[j];
        lo_pos += g.node(j);
        hi_val += w.values[m - j];
        hi_pos += g.node(m - j);
    }
    let inv_k = 1.0 / k as f64;
    lo_val *= inv_k;
    hi_val *= inv_k;
    lo_pos *= inv_k;
    hi_pos *= inv_k;
    let targets: Vec<f64> = (0..g.node_count()).map(|j| h.eval(g.node(j))).collect();
    let mut values = w.eval_many(&targets);
    for (slot, &t) in values.iter_mut().zip(&targets) {
        if t < x_lo {
            *slot = if lo_pos < 0.0 && t < 0.0 { lo_val * (lo_pos / t) } else { lo_val };
        } else if t > x_hi {
            *slot = if hi_pos > 0.0 && t > 0.0 { hi_val * (hi_pos / t) } else { hi_val };
        }
    }
    SampledFunction::new(w.grid, values, w.modulo_constant)
}

/// P_{gamma_u} H P_{gamma_u}^{-1} applied to w.
fn conjugated_hilbert(w: &SampledFunction, u: &SampledFunction) -> Result<SampledFunction> {
    let gamma = homeo_from_real_u(u)?;
    let pulled = resample_decaying(w, &gamma.inverse()?)?;
    let transformed = hilbert_line(&pulled)?;
    resample_decaying(&transformed, &gamma)
}

/// The map u -> v: v = -P_{gamma_u} H P_{gamma_u}^{-1} (u).
pub fn eval_lambda_inverse(u: &SampledFunction) -> Result<SampledFunction> {
    u.require_real()?;
    let moved = conjugated_hilbert(u, u)?;
    SampledFunction::new(u.grid, moved.values.iter().map(|v| -v).collect(), u.modulo_constant)
}

/// Solves u = P_{gamma_u} H P_{gamma_u}^{-1} (v) for u by damped iteration
/// from u = 0, so the first iterate is the plain Hilbert transform of v.
/// A far-field constant in v is rotation gauge, invisible to f, and would
/// poison the transform with an artificial step; it is projected out before
/// iterating. Stops when the sup-norm of the fixed-point defect drops to
/// tol. When the defect grows twice in a row the damping is halved
/// (floor 1/8); it never increases again. Non-convergence within max_iter
/// and runaway iterates are reported, not errors.
pub fn eval_lambda(
    v: &SampledFunction,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> Result<WeldingResult> {
    v.require_real()?;
    if !(tol > 0.0) {
        return Err(WpcError::Invalid("tolerance must be positive".into()));
    }
    if max_iter == 0 {
        return Err(WpcError::Invalid("at least one iteration is needed".into()));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(WpcError::Invalid(format!("damping {damping} outside (0, 1]")));
    }
    let last = v.values.len() - 1;
    let gauge = 0.5 * (v.values[0] + v.values[last]);
    let v = SampledFunction::new(
        v.grid,
        v.values.iter().map(|z| z - gauge).collect(),
        v.modulo_constant,
    )?;
    let zero: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); v.values.len()];
    let mut u = SampledFunction::new(v.grid, zero, false)?;
    let mut d = damping;
    let mut prev_residual = f64::INFINITY;
    let mut rises = 0usize;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = max_iter;
    for k in 1..=max_iter {
        let t = conjugated_hilbert(&v, &u)?;
        residual = t.sup_distance(&u)?;
        let sup = t.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !sup.is_finite() || sup > 50.0 {
            iterations = k;
            break;
        }
        if residual <= tol {
            u = t;
            converged = true;
            iterations = k;
            break;
        }
        if residual > prev_residual {
            rises += 1;
            if rises >= 2 {
                d = (0.5 * d).max(0.125);
                rises = 0;
            }
        } else {
            rises = 0;
        }
        prev_residual = residual;
        let blended: Vec<Complex64> = u
            .values
            .iter()
            .zip(&t.values)
            .map(|(old, new)| (1.0 - d) * old + d * new)
            .collect();
        u = SampledFunction::new(v.grid, blended, false)?;
    }
    let log_h_prime = riemann_log_derivative(&u)?;
    Ok(WeldingResult { log_f_prime: u, log_h_prime, residual, iterations, converged })
}

/// Boundary log-derivative of the conformal side: on the real axis
/// Re log h' = -u o gamma_u^{-1} and the imaginary part is its Hilbert
/// transform, so the two parts are conjugate by construction.
pub fn riemann_log_derivative(u: &SampledFunction) -> Result<SampledFunction> {
    u.require_real()?;
    let gamma = homeo_from_real_u(u)?;
    let pulled = resample_decaying(u, &gamma.inverse()?)?;
    let re = SampledFunction::new(
        u.grid,
        pulled.values.iter().map(|v| Complex64::new(-v.re, 0.0)).collect(),
        false,
    )?;
    let im = hilbert_line(&re)?;
    SampledFunction::new(
        u.grid,
        re.values.iter().zip(&im.values).map(|(a, b)| Complex64::new(a.re, b.re)).collect(),
        false,
    )
}

/// Full factorization gamma_w = h o f with the solver defaults
/// (tol 1e-8, 50 iterations, no damping).
pub fn weld_decompose(w: &CurveParam) -> Result<WeldingResult> {
    weld_decompose_with(w, 1e-8, 50, 1.0)
}

/// Splits w as (u0, v), solves the arc-length welding for v, and recombines:
/// log f' = Q_{u0}(u_arc) and log h' from the arc-length part, with its
/// constant pinned so the reconstructed h satisfies h(f(1)) = 1 = gamma(1).
/// The residual reports sup |h(f(x)) - gamma_w(x)| over |x| <= X/4.
pub fn weld_decompose_with(
    w: &CurveParam,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> Result<WeldingResult> {
    let (u0, v) = j_inverse(w)?;
    let lam = eval_lambda(&v, tol, max_iter, damping)?;
    let total = q_transform(&u0, &lam.log_f_prime)?;
    let total = SampledFunction::new(
        total.grid,
        total.values.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
        false,
    )?;
    let f_total = homeo_from_real_u(&total)?;
    let rho = f_total.eval(1.0);

    // pin the multiplicative constant of h: the raw antiderivative of
    // e^{log h'} maps rho to some s, and h must send it to gamma(1) = 1
    let g = *total.grid.as_line()?;
    let raw_integrand = SampledFunction::new(
        lam.log_h_prime.grid,
        lam.log_h_prime.values.iter().map(|z| z.exp()).collect(),
        false,
    )?;
    let h_raw = PlaneCurve::new(g, raw_integrand.cumulative_integral()?.values)?;
    let s = h_raw.eval(rho);
    if s.norm() < 1e-300 {
        return Err(WpcError::DegenerateNormalization(s.norm()));
    }
    let c = -s.ln();
    let log_h_prime = SampledFunction::new(
        lam.log_h_prime.grid,
        lam.log_h_prime.values.iter().map(|z| z + c).collect(),
        false,
    )?;

    let gamma = curve_from_log_derivative(w)?;
    let scale = c.exp();
    let mut residual: f64 = 0.0;
    for j in 0..g.node_count() {
        let x = g.node(j);
        if x.abs() <= 0.25 * g.half_width() {
            let composed = scale * h_raw.eval(f_total.eval(x));
            residual = residual.max((composed - gamma.points[j]).norm());
        }
    }

    Ok(WeldingResult {
        log_f_prime: total,
        log_h_prime,
        residual,
        iterations: lam.iterations,
        converged: lam.converged,
    })
}
