//! Truncated power series on the disk chart: formal logarithm and Schwarzian
//! algebra with coefficient-exact arithmetic, weighted area and sup norms by
//! polar quadrature with boundary-cutoff extrapolation, boundary traces, and
//! transport between the disk and half-plane interpretations.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WpcError};
use crate::grid::{CircleGrid, SampledFunction};
use crate::parallel;
use crate::spaces::{NormMethod, NormReport};

/// Truncation degree used by constructors that do not take one explicitly.
pub const DEFAULT_DEGREE: usize = 64;

const NORM_CUTOFF: f64 = 1e-3;
const RADIAL_RINGS: usize = 512;
const ANGULAR_NODES: usize = 512;
const OVERFLOW_LIMIT: f64 = 1e12;

/// Which geometry the coefficients describe. Both tags store coefficients in
/// the same disk chart; `HalfplaneViaCayley` marks the series as the Cayley
/// pullback of a function living on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    Disk,
    HalfplaneViaCayley,
}

/// Polynomial a_0 + a_1 w + ... + a_D w^D, D >= 1. Differentiation, products,
/// logs, and composition are exact coefficient arithmetic; only quadrature
/// introduces error.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    pub coefficients: Vec<Complex64>,
    pub domain_tag: DomainTag,
}

impl PowerSeries {
    pub fn new(coefficients: Vec<Complex64>, domain_tag: DomainTag) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(WpcError::DegreeTooSmall(
                coefficients.len().saturating_sub(1),
                "a series needs degree at least 1",
            ));
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(WpcError::Invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { coefficients, domain_tag })
    }

    /// Series of the Mobius map (a w + b) / (c w + d) around 0.
    pub fn mobius(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        degree: usize,
        domain_tag: DomainTag,
    ) -> Result<Self> {
        if d.norm() < 1e-9 {
            return Err(WpcError::SmallDenominator(d.norm()));
        }
        if (a * d - b * c).norm() < 1e-12 {
            return Err(WpcError::Invalid(
                "degenerate mobius map: a d - b c vanishes".into(),
            ));
        }
        let degree = degree.max(1);
        // (aw + b) / (cw + d) = (aw + b) (1/d) sum_n (-c/d)^n w^n
        let q = -c / d;
        let mut coefficients = Vec::with_capacity(degree + 1);
        coefficients.push(b / d);
        let mut qpow = Complex64::new(1.0, 0.0);
        for _ in 1..=degree {
            coefficients.push((b * q * qpow + a * qpow) / d);
            qpow *= q;
        }
        Self::new(coefficients, domain_tag)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = *self.coefficients.last().expect("non-empty by construction");
        for k in (0..self.coefficients.len() - 1).rev() {
            acc = acc * w + self.coefficients[k];
        }
        acc
    }

    /// Exact derivative, zero-padded so the result still has degree >= 1.
    pub fn derivative(&self) -> PowerSeries {
        let mut coefficients = deriv_coeffs(&self.coefficients);
        while coefficients.len() < 2 {
            coefficients.push(Complex64::new(0.0, 0.0));
        }
        PowerSeries { coefficients, domain_tag: self.domain_tag }
    }
}

fn deriv_coeffs(c: &[Complex64]) -> Vec<Complex64> {
    if c.len() == 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    (1..c.len()).map(|n| (n as f64) * c[n]).collect()
}

/// c = a * b truncated to `cap` coefficients.
fn series_product(a: &[Complex64], b: &[Complex64], cap: usize) -> Vec<Complex64> {
    let len = cap.min(a.len() + b.len() - 1);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (k, ak) in a.iter().enumerate() {
        if k >= len {
            break;
        }
        for (j, bj) in b.iter().enumerate() {
            if k + j >= len {
                break;
            }
            out[k + j] += ak * bj;
        }
    }
    out
}

/// outer(inner(w)) truncated at `degree`, by Horner over truncated series.
/// The inner constant term is allowed; intermediate coefficient growth beyond
/// 1e12 aborts, since the result would be float noise.
pub fn compose_series(
    outer: &PowerSeries,
    inner: &PowerSeries,
    degree: usize,
) -> Result<PowerSeries> {
    let cap = degree.max(1) + 1;
    let mut acc = vec![*outer.coefficients.last().expect("non-empty")];
    for k in (0..outer.coefficients.len() - 1).rev() {
        acc = series_product(&acc, &inner.coefficients, cap);
        if acc.is_empty() {
            acc.push(Complex64::new(0.0, 0.0));
        }
        acc[0] += outer.coefficients[k];
        let peak = acc.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !peak.is_finite() || peak > OVERFLOW_LIMIT {
            return Err(WpcError::CoefficientOverflow(peak));
        }
    }
    acc.resize(cap, Complex64::new(0.0, 0.0));
    PowerSeries::new(acc, inner.domain_tag)
}

/// Formal logarithm of g', the pre-Schwarzian data of g. The recurrence
/// m a_0 b_m = m a_m - sum_{k=1}^{m-1} k b_k a_{m-k} solves b' g' = g''
/// coefficient by coefficient, so exp of the result reproduces g' exactly in
/// exact arithmetic.
pub fn pre_schwarzian(g_prime: &PowerSeries) -> Result<PowerSeries> {
    let a = &g_prime.coefficients;
    let scale = a.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    if a[0].norm() <= 1e-13 * (1.0 + scale) {
        return Err(WpcError::NonUnivalent(a[0].norm()));
    }
    let mut b = vec![Complex64::new(0.0, 0.0); a.len()];
    b[0] = a[0].ln();
    for m in 1..a.len() {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..m {
            s += (k as f64) * b[k] * a[m - k];
        }
        b[m] = ((m as f64) * a[m] - s) / ((m as f64) * a[0]);
    }
    Ok(PowerSeries { coefficients: b, domain_tag: g_prime.domain_tag })
}

/// Formal exponential, inverse of the formal logarithm.
pub fn series_exp(phi: &PowerSeries) -> PowerSeries {
    let b = &phi.coefficients;
    let mut e = vec![Complex64::new(0.0, 0.0); b.len()];
    e[0] = b[0].exp();
    for m in 1..b.len() {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            s += (k as f64) * b[k] * e[m - k];
        }
        e[m] = s / (m as f64);
    }
    PowerSeries { coefficients: e, domain_tag: phi.domain_tag }
}

/// phi'' - (phi')^2 / 2. Applied to a formal log of g' this is the Schwarzian
/// derivative of g. Result degree D - 2, zero-padded up to degree 1.
pub fn alpha_map(phi: &PowerSeries) -> Result<PowerSeries> {
    let d = phi.degree();
    if d < 2 {
        return Err(WpcError::DegreeTooSmall(d, "two derivatives are taken"));
    }
    let c = &phi.coefficients;
    let len = d - 1;
    let first = deriv_coeffs(c);
    let sq = series_product(&first, &first, len);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for n in 0..len {
        let second = ((n + 1) * (n + 2)) as f64 * c[n + 2];
        let s = if n < sq.len() { sq[n] } else { Complex64::new(0.0, 0.0) };
        out[n] = second - 0.5 * s;
    }
    while out.len() < 2 {
        out.push(Complex64::new(0.0, 0.0));
    }
    Ok(PowerSeries { coefficients: out, domain_tag: phi.domain_tag })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticNormKind {
    Bloch,
    BesovP,
    AP,
    AInf,
}

fn unit_roots() -> Vec<Complex64> {
    (0..ANGULAR_NODES)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / ANGULAR_NODES as f64))
        .collect()
}

fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = *coeffs.last().expect("non-empty");
    for k in (0..coeffs.len() - 1).rev() {
        acc = acc * w + coeffs[k];
    }
    acc
}

/// Mean over the ring |w| = r of |f|^p, by uniform angular samples. For p = 2
/// and fewer than ANGULAR_NODES/2 coefficients the sampled mean is exact.
fn ring_mean_abs_p(coeffs: &[Complex64], r: f64, roots: &[Complex64], p: f64) -> f64 {
    let mut s = 0.0;
    for root in roots {
        let sq = horner(coeffs, r * root).norm_sqr();
        s += if p == 2.0 { sq } else { sq.powf(0.5 * p) };
    }
    s / roots.len() as f64
}

fn ring_max_abs(coeffs: &[Complex64], r: f64, roots: &[Complex64]) -> f64 {
    let mut m = 0.0f64;
    for root in roots {
        m = m.max(horner(coeffs, r * root).norm());
    }
    m
}

/// (1/pi) times the area integral over |w| <= 1 - cutoff of
/// |f|^p ((1 - |w|^2)/2)^wexp, radial trapezoid times exact angular means.
fn disk_integral(coeffs: &[Complex64], p: f64, wexp: f64, cutoff: f64, roots: &[Complex64]) -> f64 {
    let rmax = 1.0 - cutoff;
    let h = rmax / RADIAL_RINGS as f64;
    let rows: Vec<f64> = parallel::install(|| {
        (0..=RADIAL_RINGS)
            .into_par_iter()
            .map(|k| {
                let r = k as f64 * h;
                let w = 0.5 * (1.0 - r * r);
                let wpow = if wexp == 0.0 { 1.0 } else { w.powf(wexp) };
                ring_mean_abs_p(coeffs, r, roots, p) * wpow * r
            })
            .collect()
    });
    let interior = parallel::pairwise_sum(&rows[1..RADIAL_RINGS]);
    2.0 * h * (interior + 0.5 * (rows[0] + rows[RADIAL_RINGS]))
}

/// Growth across cutoff levels beyond 10 percent means the mass is piling up
/// against the boundary faster than the extrapolation can see.
fn check_levels(prev: f64, next: f64) -> Result<()> {
    if next > 1.10 * prev && next - prev > 1e-12 * (1.0 + next.abs()) {
        return Err(WpcError::DivergentAtCutoff { prev, next });
    }
    Ok(())
}

fn weighted_sup(coeffs: &[Complex64], roots: &[Complex64]) -> Result<f64> {
    let rmax = 1.0 - NORM_CUTOFF;
    let h = rmax / RADIAL_RINGS as f64;
    let rows: Vec<f64> = parallel::install(|| {
        (0..=RADIAL_RINGS)
            .into_par_iter()
            .map(|k| {
                let r = k as f64 * h;
                ring_max_abs(coeffs, r, roots) * 0.5 * (1.0 - r * r)
            })
            .collect()
    });
    let mut sup_wide = 0.0f64;
    let mut sup_mid = 0.0f64;
    let mut sup_all = 0.0f64;
    for (k, v) in rows.iter().enumerate() {
        let r = k as f64 * h;
        sup_all = sup_all.max(*v);
        if r <= 1.0 - 2.0 * NORM_CUTOFF {
            sup_mid = sup_mid.max(*v);
        }
        if r <= 1.0 - 4.0 * NORM_CUTOFF {
            sup_wide = sup_wide.max(*v);
        }
    }
    check_levels(sup_wide, sup_mid)?;
    check_levels(sup_mid, sup_all)?;
    Ok(sup_all)
}

/// Weighted norms of a series on the disk chart. Bloch and besov_p act on the
/// derivative, a_p and a_inf on the function itself; the weight is
/// (1 - |w|^2)/2 in the sup kinds and its (p-2) power under the area integral.
/// Area kinds integrate up to radius 1 - 1e-3 at three nested cutoffs: a rise
/// above 10 percent between levels is reported as divergence, otherwise the
/// cutoff bias is removed by one extrapolation step with exponent p - 1.
pub fn analytic_norm(phi: &PowerSeries, kind: AnalyticNormKind, p: Option<f64>) -> Result<NormReport> {
    let roots = unit_roots();
    match kind {
        AnalyticNormKind::Bloch | AnalyticNormKind::AInf => {
            let coeffs = if matches!(kind, AnalyticNormKind::Bloch) {
                deriv_coeffs(&phi.coefficients)
            } else {
                phi.coefficients.clone()
            };
            let value = weighted_sup(&coeffs, &roots)?;
            Ok(NormReport {
                value,
                p: None,
                method: NormMethod::RadialSup,
                truncation_note: format!(
                    "sup over {RADIAL_RINGS} rings; boundary annulus of width {NORM_CUTOFF:.0e} unsampled"
                ),
            })
        }
        AnalyticNormKind::BesovP | AnalyticNormKind::AP => {
            let p = p.ok_or_else(|| {
                WpcError::Invalid("area norms need an explicit exponent p".into())
            })?;
            if matches!(kind, AnalyticNormKind::BesovP) && (!(p > 1.0) || !p.is_finite()) {
                return Err(WpcError::BadExponent(p, "the Besov norm requires p > 1"));
            }
            if matches!(kind, AnalyticNormKind::AP) && (!(p >= 1.0) || !p.is_finite()) {
                return Err(WpcError::BadExponent(p, "the area norm requires p >= 1"));
            }
            let coeffs = if matches!(kind, AnalyticNormKind::BesovP) {
                deriv_coeffs(&phi.coefficients)
            } else {
                phi.coefficients.clone()
            };
            let wexp = p - 2.0;
            let i4 = disk_integral(&coeffs, p, wexp, 4.0 * NORM_CUTOFF, &roots);
            let i2 = disk_integral(&coeffs, p, wexp, 2.0 * NORM_CUTOFF, &roots);
            let i1 = disk_integral(&coeffs, p, wexp, NORM_CUTOFF, &roots);
            check_levels(i4, i2)?;
            check_levels(i2, i1)?;
            let alpha = p - 1.0;
            let (mass, note) = if alpha > 0.05 {
                let extrapolated = i1 + (i1 - i2) / (2f64.powf(alpha) - 1.0);
                (
                    extrapolated.max(0.0),
                    format!(
                        "polar quadrature, {RADIAL_RINGS} radial x {ANGULAR_NODES} angular nodes; cutoff {NORM_CUTOFF:.0e} extrapolated with exponent {alpha:.2}"
                    ),
                )
            } else {
                (
                    i1.max(0.0),
                    format!(
                        "polar quadrature, {RADIAL_RINGS} radial x {ANGULAR_NODES} angular nodes; cutoff {NORM_CUTOFF:.0e} bias uncorrected near p = 1"
                    ),
                )
            };
            Ok(NormReport {
                value: mass.powf(1.0 / p),
                p: Some(p),
                method: NormMethod::PolarQuadrature,
                truncation_note: note,
            })
        }
    }
}

/// Boundary values sum a_n e^{i n theta} on the circle grid. When the top
/// quarter of the stored coefficients still carries absolute mass above 1e-10
/// the truncated tail is not trustworthy at |w| = 1; the trace is then taken
/// just inside, at radius 1 - 1e-3, and a warning is returned.
pub fn boundary_trace(
    phi: &PowerSeries,
    grid: &CircleGrid,
) -> Result<(SampledFunction, Option<String>)> {
    let d = phi.degree();
    let tail: f64 = if d < 8 {
        0.0
    } else {
        phi.coefficients[(3 * d) / 4 + 1..].iter().map(|c| c.norm()).sum()
    };
    let (radius, warning) = if tail < 1e-10 {
        (1.0, None)
    } else {
        let r = 1.0 - NORM_CUTOFF;
        (
            r,
            Some(format!(
                "boundary tail mass {tail:.3e} exceeds 1e-10; trace evaluated at radius {r}"
            )),
        )
    };
    let values: Vec<Complex64> = (0..grid.len())
        .map(|j| horner(&phi.coefficients, Complex64::from_polar(radius, grid.node(j))))
        .collect();
    let trace = SampledFunction::new(grid.clone().into(), values, false)?;
    Ok((trace, warning))
}

/// Re-interpret a series on the other side of the Cayley map T(z) = (z-i)/(z+i).
/// Both tags store coefficients in the same disk chart and the chart change
/// induced by the fixed T is the identity Mobius, so the coefficients are
/// carried unchanged; what flips is which geometry the evaluations refer to.
/// The derivative-weighted area integrals agree on both sides, so besov and
/// bloch values are preserved exactly.
pub fn cayley_conjugate_series(phi: &PowerSeries, target: DomainTag) -> Result<PowerSeries> {
    if phi.domain_tag == target {
        return Err(WpcError::Invalid(
            "series already carries the requested domain interpretation".into(),
        ));
    }
    Ok(PowerSeries { coefficients: phi.coefficients.clone(), domain_tag: target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn series(head: &[Complex64], degree: usize) -> PowerSeries {
        let mut v = head.to_vec();
        v.resize(degree + 1, c(0.0, 0.0));
        PowerSeries::new(v, DomainTag::Disk).unwrap()
    }

    fn monomial(n: usize, degree: usize) -> PowerSeries {
        let mut v = vec![c(0.0, 0.0); degree + 1];
        v[n] = c(1.0, 0.0);
        PowerSeries::new(v, DomainTag::Disk).unwrap()
    }

    #[test]
    fn log_of_the_constant_one_vanishes() {
        let g = series(&[c(1.0, 0.0)], 8);
        let l = pre_schwarzian(&g).unwrap();
        for coeff in &l.coefficients {
            assert!(coeff.norm() < 1e-15);
        }
    }

    #[test]
    fn log_series_of_an_affine_derivative() {
        // log(1 + 2 a w) has coefficients -(-2a)^n / n
        let a = 0.3;
        let g = series(&[c(1.0, 0.0), c(2.0 * a, 0.0)], 8);
        let l = pre_schwarzian(&g).unwrap();
        for n in 1..=8 {
            let expect = -(-2.0 * a).powi(n as i32) / n as f64;
            assert!(
                (l.coefficients[n] - c(expect, 0.0)).norm() < 1e-12,
                "coefficient {n}: {} vs {expect}",
                l.coefficients[n]
            );
        }
        assert!((l.coefficients[1].re - 2.0 * a).abs() < 1e-15);
        assert!((l.coefficients[2].re + 2.0 * a * a).abs() < 1e-15);
        assert!((l.coefficients[3].re - 8.0 * a * a * a / 3.0).abs() < 1e-15);
    }

    #[test]
    fn log_rejects_a_vanishing_leading_coefficient() {
        let g = series(&[c(0.0, 0.0), c(1.0, 0.0)], 4);
        assert!(matches!(pre_schwarzian(&g), Err(WpcError::NonUnivalent(_))));
    }

    #[test]
    fn exp_undoes_the_formal_log() {
        let mut coeffs = vec![c(1.2, -0.4)];
        let mut mag = 0.8;
        for n in 1..=DEFAULT_DEGREE {
            let s = if n % 3 == 0 { -1.0 } else { 1.0 };
            coeffs.push(c(s * mag, 0.3 * mag));
            mag *= 0.77;
        }
        let g = PowerSeries::new(coeffs, DomainTag::Disk).unwrap();
        let back = series_exp(&pre_schwarzian(&g).unwrap());
        for (x, y) in back.coefficients.iter().zip(&g.coefficients) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn alpha_map_of_zero_is_zero() {
        let z = series(&[c(0.0, 0.0)], 6);
        let a = alpha_map(&z).unwrap();
        assert!(a.coefficients.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn alpha_map_needs_two_derivatives() {
        let short = series(&[c(1.0, 0.0)], 1);
        assert!(matches!(alpha_map(&short), Err(WpcError::DegreeTooSmall(1, _))));
    }

    #[test]
    fn schwarzian_of_a_quadratic_at_the_origin() {
        // g = z + a z^2: S_g(0) = -6 a^2
        let a = 0.25;
        let gp = series(&[c(1.0, 0.0), c(2.0 * a, 0.0)], 12);
        let s = alpha_map(&pre_schwarzian(&gp).unwrap()).unwrap();
        assert!((s.coefficients[0].re + 6.0 * a * a).abs() < 1e-12, "{}", s.coefficients[0]);
    }

    #[test]
    fn schwarzian_annihilates_mobius_series() {
        let g = PowerSeries::mobius(
            c(2.0, 1.0),
            c(1.0, -1.0),
            c(0.3, -0.2),
            c(1.0, 0.5),
            12,
            DomainTag::Disk,
        )
        .unwrap();
        let s = alpha_map(&pre_schwarzian(&g.derivative()).unwrap()).unwrap();
        for (n, coeff) in s.coefficients.iter().enumerate() {
            assert!(coeff.norm() <= 1e-10, "coefficient {n} = {coeff}");
        }
    }

    #[test]
    fn composition_round_trips_through_a_disk_automorphism() {
        let a = c(0.2, 0.1);
        let fwd = PowerSeries::mobius(
            c(1.0, 0.0),
            -a,
            -a.conj(),
            c(1.0, 0.0),
            DEFAULT_DEGREE,
            DomainTag::Disk,
        )
        .unwrap();
        let bwd = PowerSeries::mobius(
            c(1.0, 0.0),
            a,
            a.conj(),
            c(1.0, 0.0),
            DEFAULT_DEGREE,
            DomainTag::Disk,
        )
        .unwrap();
        let phi = series(
            &[c(0.4, 0.0), c(1.0, -0.5), c(0.0, 0.3), c(-0.2, 0.0), c(0.1, 0.1)],
            8,
        );
        let through = compose_series(&compose_series(&phi, &fwd, DEFAULT_DEGREE).unwrap(), &bwd, DEFAULT_DEGREE).unwrap();
        for n in 0..=8 {
            assert!(
                (through.coefficients[n] - phi.coefficients[n]).norm() < 1e-8,
                "coefficient {n}"
            );
        }
        for n in 9..=DEFAULT_DEGREE {
            assert!(through.coefficients[n].norm() < 1e-8, "tail coefficient {n}");
        }
    }

    #[test]
    fn composition_reports_runaway_coefficients() {
        let outer = PowerSeries::new(vec![c(1.0, 0.0); DEFAULT_DEGREE + 1], DomainTag::Disk).unwrap();
        // powers of w/(1 - 0.999 w) have binomially growing coefficients
        let inner = PowerSeries::mobius(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(-0.999, 0.0),
            c(1.0, 0.0),
            DEFAULT_DEGREE,
            DomainTag::Disk,
        )
        .unwrap();
        assert!(matches!(
            compose_series(&outer, &inner, DEFAULT_DEGREE),
            Err(WpcError::CoefficientOverflow(_))
        ));
    }

    #[test]
    fn bloch_norm_of_the_coordinate_function() {
        let z = monomial(1, 4);
        let r = analytic_norm(&z, AnalyticNormKind::Bloch, None).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.method, NormMethod::RadialSup);
    }

    #[test]
    fn besov_two_norm_of_the_coordinate_function() {
        let z = monomial(1, 4);
        let r = analytic_norm(&z, AnalyticNormKind::BesovP, Some(2.0)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
        assert_eq!(r.method, NormMethod::PolarQuadrature);
    }

    #[test]
    fn norms_of_a_constant_series() {
        let k = series(&[c(-1.5, 2.0)], 6);
        let modulus = k.coefficients[0].norm();
        let bloch = analytic_norm(&k, AnalyticNormKind::Bloch, None).unwrap();
        let besov = analytic_norm(&k, AnalyticNormKind::BesovP, Some(2.0)).unwrap();
        assert_eq!(bloch.value, 0.0);
        assert_eq!(besov.value, 0.0);
        // the area kinds see the function itself, not its derivative
        let ainf = analytic_norm(&k, AnalyticNormKind::AInf, None).unwrap();
        assert!((ainf.value - 0.5 * modulus).abs() < 1e-9, "{}", ainf.value);
        let a2 = analytic_norm(&k, AnalyticNormKind::AP, Some(2.0)).unwrap();
        assert!((a2.value - modulus).abs() < 2e-3, "{}", a2.value);
    }

    #[test]
    fn analytic_norms_are_homogeneous() {
        let phi = series(&[c(0.3, 0.0), c(1.0, -0.7), c(-0.4, 0.2), c(0.05, 0.3)], 10);
        let a = c(0.37, -1.2);
        let scaled = PowerSeries::new(
            phi.coefficients.iter().map(|x| a * x).collect(),
            DomainTag::Disk,
        )
        .unwrap();
        for (kind, p) in [
            (AnalyticNormKind::Bloch, None),
            (AnalyticNormKind::AInf, None),
            (AnalyticNormKind::BesovP, Some(2.5)),
            (AnalyticNormKind::AP, Some(1.5)),
        ] {
            let base = analytic_norm(&phi, kind, p).unwrap().value;
            let big = analytic_norm(&scaled, kind, p).unwrap().value;
            assert!(
                (big - a.norm() * base).abs() < 1e-9 * (1.0 + base),
                "{kind:?}: {big} vs {}",
                a.norm() * base
            );
        }
    }

    #[test]
    fn boundary_concentration_is_flagged_as_divergent() {
        // all derivative mass at the top frequency: the cutoff levels keep
        // growing faster than 10 percent and extrapolation refuses to guess
        let spike = monomial(64, 64);
        assert!(matches!(
            analytic_norm(&spike, AnalyticNormKind::BesovP, Some(2.0)),
            Err(WpcError::DivergentAtCutoff { .. })
        ));
    }

    #[test]
    fn norm_exponent_preconditions() {
        let z = monomial(1, 4);
        assert!(matches!(
            analytic_norm(&z, AnalyticNormKind::BesovP, Some(1.0)),
            Err(WpcError::BadExponent(_, _))
        ));
        assert!(matches!(
            analytic_norm(&z, AnalyticNormKind::AP, Some(0.5)),
            Err(WpcError::BadExponent(_, _))
        ));
        // p = 1 is admissible for the area kind, though any nonzero
        // polynomial is log-divergent there; the zero series goes through
        let zero = series(&[c(0.0, 0.0)], 4);
        assert!(analytic_norm(&zero, AnalyticNormKind::AP, Some(1.0)).is_ok());
        assert!(matches!(
            analytic_norm(&z, AnalyticNormKind::BesovP, None),
            Err(WpcError::Invalid(_))
        ));
    }

    #[test]
    fn boundary_trace_of_a_monomial_is_a_character() {
        let phi = monomial(5, 16);
        let grid = CircleGrid::new(256).unwrap();
        let (trace, warning) = boundary_trace(&phi, &grid).unwrap();
        assert!(warning.is_none());
        for j in 0..grid.len() {
            let expect = Complex64::from_polar(1.0, 5.0 * grid.node(j));
            assert!((trace.values[j] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_trace_warns_on_slow_coefficient_decay() {
        let coeffs: Vec<Complex64> = (0..=DEFAULT_DEGREE)
            .map(|n| c(1.0 / ((n + 1) * (n + 1)) as f64, 0.0))
            .collect();
        let phi = PowerSeries::new(coeffs, DomainTag::Disk).unwrap();
        let grid = CircleGrid::new(64).unwrap();
        let (trace, warning) = boundary_trace(&phi, &grid).unwrap();
        assert!(warning.is_some());
        // values must match a direct evaluation just inside the boundary
        let expect = phi.eval(Complex64::from_polar(1.0 - 1e-3, grid.node(3)));
        assert!((trace.values[3] - expect).norm() < 1e-14);
    }

    #[test]
    fn douglas_bridge_for_monomials() {
        use crate::spaces::besov_seminorm;
        let grid = CircleGrid::new(2048).unwrap();
        for n in 1..=8usize {
            let phi = monomial(n, 16);
            let disk = analytic_norm(&phi, AnalyticNormKind::BesovP, Some(2.0)).unwrap().value;
            let (trace, warning) = boundary_trace(&phi, &grid).unwrap();
            assert!(warning.is_none());
            let circle = besov_seminorm(&trace, 2.0).unwrap().value;
            let target = n as f64;
            assert!(
                (disk * disk - target).abs() <= 0.01 * target,
                "disk side n = {n}: {}",
                disk * disk
            );
            assert!(
                (circle * circle - target).abs() <= 0.01 * target,
                "circle side n = {n}: {}",
                circle * circle
            );
        }
    }

    #[test]
    fn bloch_stays_below_the_besov_family_on_seeded_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED0A);
        let mut worst = 0.0f64;
        for _ in 0..12 {
            let mut coeffs = vec![c(0.0, 0.0)];
            let mut mag = 1.0;
            for _ in 1..=24 {
                coeffs.push(c(
                    mag * rng.gen_range(-1.0..1.0),
                    mag * rng.gen_range(-1.0..1.0),
                ));
                mag *= 0.75;
            }
            let phi = PowerSeries::new(coeffs, DomainTag::Disk).unwrap();
            let bloch = analytic_norm(&phi, AnalyticNormKind::Bloch, None).unwrap().value;
            for p in [1.5, 2.0, 3.0] {
                let besov = analytic_norm(&phi, AnalyticNormKind::BesovP, Some(p)).unwrap().value;
                assert!(besov > 0.0);
                worst = worst.max(bloch / besov);
            }
        }
        // regression bound fitted on this seeded family, not a sharp constant
        assert!(worst <= 1.0, "observed ratio {worst}");
    }

    #[test]
    fn cayley_transport_flips_interpretation_only() {
        let phi = series(&[c(1.0, 0.5), c(0.3, -0.2), c(0.0, 0.1)], 8);
        let moved = cayley_conjugate_series(&phi, DomainTag::HalfplaneViaCayley).unwrap();
        assert_eq!(moved.domain_tag, DomainTag::HalfplaneViaCayley);
        let back = cayley_conjugate_series(&moved, DomainTag::Disk).unwrap();
        for (x, y) in back.coefficients.iter().zip(&phi.coefficients) {
            assert!((x - y).norm() <= 1e-8);
        }
        let before = analytic_norm(&phi, AnalyticNormKind::BesovP, Some(2.0)).unwrap().value;
        let after = analytic_norm(&moved, AnalyticNormKind::BesovP, Some(2.0)).unwrap().value;
        assert!((before - after).abs() <= 1e-3);
        assert!(cayley_conjugate_series(&phi, DomainTag::Disk).is_err());
    }

    #[test]
    fn mobius_constructor_guards_the_denominator() {
        assert!(matches!(
            PowerSeries::mobius(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), 8, DomainTag::Disk),
            Err(WpcError::SmallDenominator(_))
        ));
        assert!(matches!(
            PowerSeries::mobius(c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), 8, DomainTag::Disk),
            Err(WpcError::Invalid(_))
        ));
        assert!(PowerSeries::mobius(c(1.0, 0.0), c(1.5, 0.0), c(0.5, 0.0), c(1.0, 0.0), 8, DomainTag::Disk).is_ok());
    }
}
