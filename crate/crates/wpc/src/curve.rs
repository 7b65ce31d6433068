//! Curves from boundary data: reconstruction of a plane curve from its
//! log-derivative, the normalization fixing gamma(0) = 0 and gamma(1) = 1,
//! increasing self-maps of the line built from real profiles, the variable
//! change and composition operators acting on log-derivatives, and geometric
//! diagnostics (arc-length defect, chord-arc constant, empirical composition
//! operator norm).

use num_complex::Complex64;

use crate::error::{Result, WpcError};
use crate::family::seeded_profiles;
use crate::grid::{eval_line, Grid, LineGrid, MonotoneMap, SampledFunction};
use crate::spaces::besov_seminorm;

/// Log-derivative of a curve, tagged with whether it has been normalized so
/// that the reconstructed curve satisfies gamma(1) = 1.
#[derive(Debug, Clone)]
pub struct CurveParam {
    pub w: SampledFunction,
    pub normalized: bool,
}

impl CurveParam {
    /// Wraps raw samples without the normalization claim.
    pub fn raw(w: SampledFunction) -> Result<Self> {
        w.grid.as_line()?;
        Ok(CurveParam { w, normalized: false })
    }

    pub fn grid(&self) -> &LineGrid {
        self.w.grid.as_line().expect("curve parameters live on line grids")
    }
}

/// Plane curve sampled on a line window. Between nodes the trace follows the
/// shape-limited interpolant; beyond the window it continues along straight
/// lines with the end-cell secant directions.
#[derive(Debug, Clone)]
pub struct PlaneCurve {
    pub grid: LineGrid,
    pub points: Vec<Complex64>,
}

impl PlaneCurve {
    pub fn new(grid: LineGrid, points: Vec<Complex64>) -> Result<Self> {
        if points.len() != grid.node_count() {
            return Err(WpcError::LengthMismatch {
                expected: grid.node_count(),
                got: points.len(),
            });
        }
        for j in 0..points.len() - 1 {
            if points[j + 1] == points[j] {
                return Err(WpcError::VanishingIncrement(j));
            }
        }
        Ok(PlaneCurve { grid, points })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let m = self.grid.intervals();
        let h = self.grid.spacing();
        let x_lo = self.grid.node(0);
        let x_hi = self.grid.node(m);
        if x < x_lo {
            let slope = (self.points[1] - self.points[0]) / h;
            self.points[0] + slope * (x - x_lo)
        } else if x > x_hi {
            let slope = (self.points[m] - self.points[m - 1]) / h;
            self.points[m] + slope * (x - x_hi)
        } else {
            let re: Vec<f64> = self.points.iter().map(|p| p.re).collect();
            let im: Vec<f64> = self.points.iter().map(|p| p.im).collect();
            Complex64::new(eval_line(&self.grid, &re, x), eval_line(&self.grid, &im, x))
        }
    }
}

/// Quadrature of e^w over [0, 1], consistent with the cumulative trapezoid
/// used for reconstruction: full cells by trapezoid, a final partial cell by
/// the trapezoid of its interpolated endpoint. Adding a constant c to w
/// multiplies this value by e^c to rounding accuracy.
fn unit_interval_integral(w: &SampledFunction) -> Result<Complex64> {
    let g = *w.grid.as_line()?;
    let m = g.intervals();
    if g.node(0) > 0.0 || g.node(m) < 1.0 {
        return Err(WpcError::WindowExcludesUnitInterval { lo: g.node(0), hi: g.node(m) });
    }
    let h = g.spacing();
    let k0 = g.zero_index();
    let f: Vec<Complex64> = w.values.iter().map(|v| v.exp()).collect();
    let mut k1 = g.cell_of(1.0);
    if g.node(k1 + 1) <= 1.0 {
        k1 += 1;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in k0..k1 {
        acc += (f[j] + f[j + 1]) * (0.5 * h);
    }
    let rest = 1.0 - g.node(k1);
    if rest > 0.0 {
        let f_at_one = w.eval(1.0).exp();
        acc += (f[k1] + f_at_one) * (0.5 * rest);
    }
    Ok(acc)
}

/// Adds the constant c = -log of the unit-interval integral of e^w, so the
/// reconstructed curve runs from 0 to 1 over [0, 1]. Principal branch.
pub fn normalize_log_derivative(w: &SampledFunction) -> Result<CurveParam> {
    let integral = unit_interval_integral(w)?;
    if integral.norm() < 1e-300 {
        return Err(WpcError::DegenerateNormalization(integral.norm()));
    }
    let c = -integral.ln();
    let shifted = SampledFunction::new(
        w.grid,
        w.values.iter().map(|v| v + c).collect(),
        w.modulo_constant,
    )?;
    Ok(CurveParam { w: shifted, normalized: true })
}

/// gamma(x) = cumulative integral of e^w from 0, vanishing at the origin.
pub fn curve_from_log_derivative(param: &CurveParam) -> Result<PlaneCurve> {
    if !param.normalized {
        return Err(WpcError::Invalid(
            "curve reconstruction needs a normalized log-derivative".into(),
        ));
    }
    let g = *param.w.grid.as_line()?;
    let integrand = SampledFunction::new(
        param.w.grid,
        param.w.values.iter().map(|v| v.exp()).collect(),
        false,
    )?;
    let gamma = integrand.cumulative_integral()?;
    PlaneCurve::new(g, gamma.values)
}

/// Recovers log gamma' by centered differences and a continuous logarithm:
/// the imaginary part is unwrapped along the grid so consecutive phases stay
/// within pi of each other.
pub fn log_derivative_from_curve(curve: &PlaneCurve) -> Result<SampledFunction> {
    let g = curve.grid;
    let m = g.intervals();
    let h = g.spacing();
    let p = &curve.points;
    for j in 0..m {
        if p[j + 1] == p[j] {
            return Err(WpcError::VanishingIncrement(j));
        }
    }
    let mut derivs = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let d = if j == 0 {
            (p[1] - p[0]) / h
        } else if j == m {
            (p[m] - p[m - 1]) / h
        } else {
            (p[j + 1] - p[j - 1]) / (2.0 * h)
        };
        if d.norm() == 0.0 {
            return Err(WpcError::VanishingIncrement(j));
        }
        derivs.push(d);
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut values = Vec::with_capacity(m + 1);
    let mut prev_phase = derivs[0].arg();
    for (j, d) in derivs.iter().enumerate() {
        let raw = d.arg();
        let phase = if j == 0 {
            raw
        } else {
            let mut delta = raw - prev_phase;
            while delta > std::f64::consts::PI {
                delta -= tau;
            }
            while delta < -std::f64::consts::PI {
                delta += tau;
            }
            prev_phase + delta
        };
        prev_phase = phase;
        values.push(Complex64::new(d.norm().ln(), phase));
    }
    SampledFunction::new(Grid::Line(g), values, false)
}

/// The increasing self-map gamma_u(x) = integral from 0 to x of e^u, with
/// affine tails of slope e^{u(-X)} and e^{u(X)}.
pub fn homeo_from_real_u(u: &SampledFunction) -> Result<MonotoneMap> {
    let g = *u.grid.as_line()?;
    let vals = u.require_real()?;
    let integrand = SampledFunction::new(
        u.grid,
        vals.iter().map(|&v| Complex64::new(v.exp(), 0.0)).collect(),
        false,
    )?;
    let gamma = integrand.cumulative_integral()?;
    let values: Vec<f64> = gamma.values.iter().map(|v| v.re).collect();
    MonotoneMap::new(g, values, (vals[0].exp(), vals[g.intervals()].exp()))
}

/// Variable change (P_h w)(x) = w(h(x)), resampled on w's grid. Targets
/// that land beyond the window continue w linearly from the edge, so a
/// slight overshoot of h does not manufacture a jump in the resampled data.
/// The edge slope is taken over a multi-node baseline; per-node noise in the
/// outermost samples would otherwise be amplified by the grid density.
pub fn variable_change(w: &SampledFunction, h: &MonotoneMap) -> Result<SampledFunction> {
    let g = *w.grid.as_line()?;
    let m = g.intervals();
    let hh = g.spacing();
    let x_lo = g.node(0);
    let x_hi = g.node(m);
    let k = (m / 256).max(1);
    let span = k as f64 * hh;
    let lo_slope = (w.values[k] - w.values[0]) / span;
    let hi_slope = (w.values[m] - w.values[m - k]) / span;
    let targets: Vec<f64> = (0..g.node_count()).map(|j| h.eval(g.node(j))).collect();
    let mut values = w.eval_many(&targets);
    for (slot, &t) in values.iter_mut().zip(&targets) {
        if t < x_lo {
            *slot = w.values[0] + lo_slope * (t - x_lo);
        } else if t > x_hi {
            *slot = w.values[m] + hi_slope * (t - x_hi);
        }
    }
    SampledFunction::new(w.grid, values, w.modulo_constant)
}

/// Q_u(w) = w o gamma_u + u.
pub fn q_transform(u: &SampledFunction, w: &SampledFunction) -> Result<SampledFunction> {
    if u.grid != w.grid {
        return Err(WpcError::GridMismatch(
            "composition needs u and w on the same grid".into(),
        ));
    }
    let gamma = homeo_from_real_u(u)?;
    let moved = variable_change(w, &gamma)?;
    SampledFunction::new(
        w.grid,
        moved.values.iter().zip(&u.values).map(|(a, b)| a + b).collect(),
        w.modulo_constant,
    )
}

/// J(u, iv) = u + i (v o gamma_u), normalized.
pub fn j_map(u: &SampledFunction, v: &SampledFunction) -> Result<CurveParam> {
    if u.grid != v.grid {
        return Err(WpcError::GridMismatch(
            "the pairing needs u and v on the same grid".into(),
        ));
    }
    u.require_real()?;
    let vv = v.require_real()?;
    let gamma = homeo_from_real_u(u)?;
    let v_real = SampledFunction::from_real(v.grid, vv, v.modulo_constant)?;
    let moved = variable_change(&v_real, &gamma)?;
    let w = SampledFunction::new(
        u.grid,
        u.values
            .iter()
            .zip(&moved.values)
            .map(|(a, b)| Complex64::new(a.re, b.re))
            .collect(),
        false,
    )?;
    normalize_log_derivative(&w)
}

/// Splits a normalized log-derivative as w = u + i (v o gamma_u):
/// u = Re w and v = (Im w) o gamma_u^{-1}.
pub fn j_inverse(param: &CurveParam) -> Result<(SampledFunction, SampledFunction)> {
    if !param.normalized {
        return Err(WpcError::Invalid("the splitting needs a normalized log-derivative".into()));
    }
    let w = &param.w;
    w.grid.as_line()?;
    let u = SampledFunction::new(
        w.grid,
        w.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        false,
    )?;
    let im = SampledFunction::new(
        w.grid,
        w.values.iter().map(|v| Complex64::new(v.im, 0.0)).collect(),
        false,
    )?;
    let gamma_inv = homeo_from_real_u(&u)?.inverse()?;
    let v = variable_change(&im, &gamma_inv)?;
    Ok((u, v))
}

/// Relative spread of node-to-node speeds: 0 exactly when the curve is
/// parametrized proportionally to arc length at grid resolution.
pub fn arc_length_defect(curve: &PlaneCurve) -> f64 {
    let m = curve.grid.intervals();
    let h = curve.grid.spacing();
    let speeds: Vec<f64> =
        (0..m).map(|j| (curve.points[j + 1] - curve.points[j]).norm() / h).collect();
    let mean = speeds.iter().sum::<f64>() / m as f64;
    speeds.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max)
}

/// Largest ratio of arc length to chord length over a strided sample of node
/// pairs. 1 exactly for straight lines; large values witness near-touching
/// folds.
pub fn chord_arc_constant(curve: &PlaneCurve) -> Result<f64> {
    let m = curve.grid.intervals();
    let mut arc = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    arc.push(0.0);
    for j in 0..m {
        acc += (curve.points[j + 1] - curve.points[j]).norm();
        arc.push(acc);
    }
    let stride = 8;
    let mut best = 1.0f64;
    let mut i = 0;
    while i < m {
        let mut j = i + stride;
        while j <= m {
            let chord = (curve.points[j] - curve.points[i]).norm();
            if chord == 0.0 {
                return Err(WpcError::Invalid(format!(
                    "not chord-arc at resolution: nodes {i} and {j} coincide"
                )));
            }
            best = best.max((arc[j] - arc[i]) / chord);
            j += stride;
        }
        i += stride;
    }
    Ok(best)
}

/// Empirical lower bound for the composition operator norm on the order-
/// (1/p, p) seminorm: the best ratio over a fixed seeded family of smooth
/// profiles. When h is the identity on a long node run, an extra witness
/// supported there pins the bound at 1.
pub fn operator_norm_estimate(h: &MonotoneMap, p: f64, trials: usize) -> Result<f64> {
    if trials == 0 {
        return Err(WpcError::Invalid("the estimate needs at least one trial".into()));
    }
    let g = *h.grid();
    let x_hi = g.node(g.intervals());
    let mut profiles = seeded_profiles(0x700u64, trials, -0.45 * x_hi, 0.45 * x_hi, 1.0);

    // longest run of nodes h fixes; a bump inside it is fixed by composition
    let mut best_run = (0usize, 0usize);
    let mut start = None;
    for j in 0..g.node_count() {
        let x = g.node(j);
        if (h.values()[j] - x).abs() <= 1e-12 * (1.0 + x.abs()) {
            if start.is_none() {
                start = Some(j);
            }
            if let Some(s) = start {
                if j - s > best_run.1 - best_run.0 {
                    best_run = (s, j);
                }
            }
        } else {
            start = None;
        }
    }
    if best_run.1 - best_run.0 >= 32 {
        let a = g.node(best_run.0);
        let b = g.node(best_run.1);
        let width = (0.3 * (b - a)).min(2.0);
        if width >= 8.0 * g.spacing() {
            profiles.push(crate::family::BumpProfile {
                bumps: vec![crate::family::Bump {
                    center: 0.5 * (a + b),
                    width,
                    height: 1.0,
                }],
            });
        }
    }

    let mut best = 0.0f64;
    for profile in &profiles {
        let w = profile.sample(g, false);
        let moved = variable_change(&w, h)?;
        let denom = besov_seminorm(&w, p)?.value;
        if denom == 0.0 {
            continue;
        }
        best = best.max(besov_seminorm(&moved, p)?.value / denom);
    }
    Ok(best)
}
