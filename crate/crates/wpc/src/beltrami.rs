//! Dilatation fields on the upper half-plane: hyperbolic p-mass, Carleson
//! box estimators and their vanishing profile, the chain rule and inverse
//! for complex dilatations, and a Beurling-Ahlfors extension that turns a
//! boundary homeomorphism into a quasiconformal test jet.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WpcError};
use crate::grid::{LineGrid, MonotoneMap};
use crate::parallel;
use crate::spaces::{NormMethod, NormReport};

/// Rectangle [-X, X] x [y_min, y_max] sampled uniformly in x and
/// logarithmically in y. The x interval count must be a power of two so that
/// every dyadic box length and half-step offset lands on a node.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneGrid {
    x: LineGrid,
    y_levels: Vec<f64>,
}

impl HalfPlaneGrid {
    pub fn new(
        half_width: f64,
        x_intervals: usize,
        y_min: f64,
        y_max: f64,
        y_count: usize,
    ) -> Result<Self> {
        let x = LineGrid::new(half_width, x_intervals)?;
        if !x_intervals.is_power_of_two() {
            return Err(WpcError::Invalid(format!(
                "x interval count {x_intervals} must be a power of two for the dyadic box families"
            )));
        }
        if !(y_min > 0.0) || !(y_max > y_min) || !y_max.is_finite() || y_count < 2 {
            return Err(WpcError::BadYLevels);
        }
        let ratio = y_max / y_min;
        let y_levels: Vec<f64> = (0..y_count)
            .map(|j| y_min * ratio.powf(j as f64 / (y_count - 1) as f64))
            .collect();
        Ok(Self { x, y_levels })
    }

    /// y_min 1e-3, y_max 4X, 256 levels.
    pub fn with_defaults(half_width: f64, x_intervals: usize) -> Result<Self> {
        Self::new(half_width, x_intervals, 1e-3, 4.0 * half_width, 256)
    }

    /// Grid with explicit levels, as deserialized from a file. Levels must
    /// be positive, finite and strictly increasing; spacing is free.
    pub fn from_levels(half_width: f64, x_intervals: usize, y_levels: Vec<f64>) -> Result<Self> {
        let x = LineGrid::new(half_width, x_intervals)?;
        if !x_intervals.is_power_of_two() {
            return Err(WpcError::Invalid(format!(
                "x interval count {x_intervals} must be a power of two for the dyadic box families"
            )));
        }
        if y_levels.len() < 2 || !(y_levels[0] > 0.0) {
            return Err(WpcError::BadYLevels);
        }
        for pair in y_levels.windows(2) {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(WpcError::BadYLevels);
            }
        }
        Ok(Self { x, y_levels })
    }

    pub fn x(&self) -> &LineGrid {
        &self.x
    }

    pub fn y_levels(&self) -> &[f64] {
        &self.y_levels
    }

    pub fn len(&self) -> usize {
        self.x.node_count() * self.y_levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.x.node_count() + i
    }
}

/// Complex dilatation samples mu(x_i, y_j), strictly inside the unit disk
/// pointwise. Index layout is row-major by y level.
#[derive(Debug, Clone)]
pub struct BeltramiField {
    pub grid: HalfPlaneGrid,
    pub values: Vec<Complex64>,
}

impl BeltramiField {
    pub fn new(grid: HalfPlaneGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(WpcError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        let cols = grid.x.node_count();
        for (idx, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(WpcError::Invalid(format!("non-finite dilatation sample at {idx}")));
            }
            let m = v.norm();
            if m >= 1.0 - 1e-9 {
                return Err(WpcError::DilatationBound { value: m, i: idx % cols, j: idx / cols });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: HalfPlaneGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: HalfPlaneGrid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &y in &grid.y_levels {
            for i in 0..grid.x.node_count() {
                values.push(f(grid.x.node(i), y));
            }
        }
        Self::new(grid, values)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation in (x, ln y); zero outside the sampled
    /// rectangle, matching the compact-support reading of stored fields.
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let g = &self.grid;
        let xw = g.x.half_width();
        let y_lo = g.y_levels[0];
        let y_hi = *g.y_levels.last().expect("nonempty levels");
        if !(x >= -xw && x <= xw) || !(y >= y_lo && y <= y_hi) {
            return zero;
        }
        let h = g.x.spacing();
        let tx = (x + xw) / h;
        let i = (tx.floor() as usize).min(g.x.intervals() - 1);
        let fx = (tx - i as f64).clamp(0.0, 1.0);
        // level lookup by binary search so explicit (non-log) levels work;
        // interpolation is linear in ln y either way
        let j = g.y_levels.partition_point(|&v| v <= y).saturating_sub(1);
        let j = j.min(g.y_levels.len() - 2);
        let fu = ((y / g.y_levels[j]).ln() / (g.y_levels[j + 1] / g.y_levels[j]).ln())
            .clamp(0.0, 1.0);
        let cols = g.x.node_count();
        let v00 = self.values[j * cols + i];
        let v01 = self.values[j * cols + i + 1];
        let v10 = self.values[(j + 1) * cols + i];
        let v11 = self.values[(j + 1) * cols + i + 1];
        let lo = v00 + (v01 - v00) * fx;
        let hi = v10 + (v11 - v10) * fx;
        lo + (hi - lo) * fu
    }
}

/// A quasiconformal map sampled together with its Wirtinger derivatives.
/// The orientation invariant |dH/dzbar| < |dH/dz| is enforced pointwise; a
/// violation reports the worst cell.
#[derive(Debug, Clone)]
pub struct MapJet {
    pub grid: HalfPlaneGrid,
    pub value: Vec<Complex64>,
    pub wirtinger_dz: Vec<Complex64>,
    pub wirtinger_dzbar: Vec<Complex64>,
}

impl MapJet {
    pub fn new(
        grid: HalfPlaneGrid,
        value: Vec<Complex64>,
        wirtinger_dz: Vec<Complex64>,
        wirtinger_dzbar: Vec<Complex64>,
    ) -> Result<Self> {
        for (name, arr) in [
            ("value", &value),
            ("dz", &wirtinger_dz),
            ("dzbar", &wirtinger_dzbar),
        ] {
            if arr.len() != grid.len() {
                return Err(WpcError::GridMismatch(format!(
                    "jet {name} array has {} samples, grid has {}",
                    arr.len(),
                    grid.len()
                )));
            }
        }
        let cols = grid.x.node_count();
        let mut worst: Option<(usize, f64)> = None;
        for idx in 0..value.len() {
            let holo = wirtinger_dz[idx].norm();
            let anti = wirtinger_dzbar[idx].norm();
            if anti >= holo {
                let excess = anti - holo;
                if worst.map(|(_, e)| excess > e).unwrap_or(true) {
                    worst = Some((idx, excess));
                }
            }
        }
        if let Some((idx, _)) = worst {
            return Err(WpcError::OrientationViolation {
                i: idx % cols,
                j: idx / cols,
                anti: wirtinger_dzbar[idx].norm(),
                holo: wirtinger_dz[idx].norm(),
            });
        }
        Ok(Self { grid, value, wirtinger_dz, wirtinger_dzbar })
    }
}

/// dH/dzbar over dH/dz, as a field. Fails if the quotient leaves the unit
/// bound, which means the jet was not quasiconformal to begin with.
pub fn dilatation_of_jet(jet: &MapJet) -> Result<BeltramiField> {
    let values: Vec<Complex64> = jet
        .wirtinger_dzbar
        .iter()
        .zip(&jet.wirtinger_dz)
        .map(|(a, h)| a / h)
        .collect();
    BeltramiField::new(jet.grid.clone(), values)
}

/// Trapezoid weights for the uniform x nodes.
fn x_weights(x: &LineGrid) -> Vec<f64> {
    let h = x.spacing();
    let n = x.node_count();
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Trapezoid weights in u = ln y over the given contiguous levels; the
/// integral of g(y) dy/y is then sum w_j g(y_j).
fn u_weights(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let u: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mut w = vec![0.0; n];
    w[0] = 0.5 * (u[1] - u[0]);
    w[n - 1] = 0.5 * (u[n - 1] - u[n - 2]);
    for j in 1..n - 1 {
        w[j] = 0.5 * (u[j + 1] - u[j - 1]);
    }
    w
}

/// Hyperbolic p-mass (integral of |mu|^p y^-2) to the 1/p, by log-trapezoid
/// in y and uniform trapezoid in x.
pub fn mp_norm(mu: &BeltramiField, p: f64) -> Result<NormReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(WpcError::BadExponent(p, "the hyperbolic mass requires p >= 1"));
    }
    let g = &mu.grid;
    let xw = x_weights(&g.x);
    let uw = u_weights(&g.y_levels);
    let cols = g.x.node_count();
    let rows: Vec<f64> = parallel::install(|| {
        (0..g.y_levels.len())
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..cols {
                    let sq = mu.values[j * cols + i].norm_sqr();
                    let m = if p == 2.0 { sq } else { sq.powf(0.5 * p) };
                    acc += xw[i] * m;
                }
                // dxdy weight y^-2 becomes y^-1 dx du on the log levels
                acc * uw[j] / g.y_levels[j]
            })
            .collect()
    });
    let mass = parallel::pairwise_sum(&rows);
    Ok(NormReport {
        value: mass.powf(1.0 / p),
        p: Some(p),
        method: NormMethod::LogTrapezoid,
        truncation_note: format!(
            "mass below y = {:.1e} and above y = {:.1e} is outside the quadrature window",
            g.y_levels[0],
            g.y_levels.last().expect("nonempty levels")
        ),
    })
}

/// Dyadic Carleson boxes I x (0, |I|] at half-step offsets, |I| from 2X
/// down to two grid cells, as (first node, last node) index pairs.
fn dyadic_boxes(g: &HalfPlaneGrid) -> Vec<(usize, usize)> {
    let m = g.x.intervals();
    let mut boxes = Vec::new();
    let mut cells = m;
    while cells >= 2 {
        let half = cells / 2;
        let mut start = 0usize;
        while start + cells <= m {
            boxes.push((start, start + cells));
            start += half;
        }
        cells = half;
    }
    boxes
}

/// Carleson norm of the measure |mu|^2 y^-1 dxdy: square root of the sup
/// over dyadic boxes of mass(I x (0, |I|]) / |I|. In (x, ln y) coordinates
/// the density is plain |mu|^2, so rows stack with u-trapezoid weights.
/// Levels above |I| or below y_min fall outside the boxes; the estimator is
/// a refinement-convergent lower bound.
pub fn carleson_norm(mu: &BeltramiField) -> Result<NormReport> {
    let g = &mu.grid;
    let cols = g.x.node_count();
    let h = g.x.spacing();
    // prefix[j][i] = sum of |mu|^2 over the first i samples of row j
    let prefix: Vec<Vec<f64>> = parallel::install(|| {
        (0..g.y_levels.len())
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                let mut row = Vec::with_capacity(cols + 1);
                row.push(0.0);
                for i in 0..cols {
                    acc += mu.values[j * cols + i].norm_sqr();
                    row.push(acc);
                }
                row
            })
            .collect()
    });
    let sq = |j: usize, i: usize| mu.values[j * cols + i].norm_sqr();
    let boxes = dyadic_boxes(g);
    let ratios: Vec<f64> = parallel::install(|| {
        boxes
            .par_iter()
            .map(|&(i0, i1)| {
                let ell = (i1 - i0) as f64 * h;
                let jmax = match g.y_levels.iter().rposition(|&y| y <= ell) {
                    Some(j) if j >= 1 => j,
                    _ => return 0.0,
                };
                let uw = u_weights(&g.y_levels[..=jmax]);
                let mut mass = 0.0;
                for (j, w) in uw.iter().enumerate() {
                    let row = h
                        * (prefix[j][i1 + 1]
                            - prefix[j][i0]
                            - 0.5 * sq(j, i0)
                            - 0.5 * sq(j, i1));
                    mass += w * row;
                }
                mass / ell
            })
            .collect()
    });
    let sup = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(NormReport {
        value: sup.max(0.0).sqrt(),
        p: None,
        method: NormMethod::DyadicSup,
        truncation_note: format!(
            "boxes from |I| = {:.3e} up to the window length; mass below y = {:.1e} unseen",
            2.0 * h,
            g.y_levels[0]
        ),
    })
}

/// Per-scale sup of box mass ratios at the given decreasing scales. Ratios
/// are raw (not square-rooted); the curve of a vanishing Carleson measure
/// decays to zero once the scale undercuts the support. Boxes of length s
/// sit at half-step offsets and integrate over the nodes they contain.
pub fn vanishing_profile(mu: &BeltramiField, scales: &[f64]) -> Result<Vec<f64>> {
    let g = &mu.grid;
    let h = g.x.spacing();
    let xw = g.x.half_width();
    for pair in scales.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(WpcError::Invalid("scales must be strictly decreasing".into()));
        }
    }
    for &s in scales {
        if !(s > 0.0) || !s.is_finite() || s < 2.0 * h {
            return Err(WpcError::ScaleUnresolvable { scale: s, spacing: h });
        }
        if s > 2.0 * xw {
            return Err(WpcError::Invalid(format!(
                "scale {s} exceeds the window length {}",
                2.0 * xw
            )));
        }
    }
    let cols = g.x.node_count();
    let profile: Vec<f64> = scales
        .iter()
        .map(|&s| {
            let jmax = match g.y_levels.iter().rposition(|&y| y <= s) {
                Some(j) if j >= 1 => j,
                _ => return 0.0,
            };
            let uw = u_weights(&g.y_levels[..=jmax]);
            let mut sup = 0.0f64;
            let mut start = -xw;
            while start + s <= xw * (1.0 + 1e-12) {
                let i0 = (((start + xw) / h) - 1e-9).ceil().max(0.0) as usize;
                let i1 = ((((start + s) + xw) / h) + 1e-9).floor() as usize;
                let i1 = i1.min(cols - 1);
                if i1 > i0 {
                    let mut mass = 0.0;
                    for (j, w) in uw.iter().enumerate() {
                        let mut row = 0.0;
                        for i in i0..=i1 {
                            let end = i == i0 || i == i1;
                            let weight = if end { 0.5 } else { 1.0 };
                            row += weight * mu.values[j * cols + i].norm_sqr();
                        }
                        mass += w * row * h;
                    }
                    sup = sup.max(mass / s);
                }
                start += 0.5 * s;
            }
            sup
        })
        .collect();
    Ok(profile)
}

/// Sharp comparison constant between the Carleson norm and the hyperbolic
/// p-mass: C_p^2 = (p' - 1)^(-1/q') with p' = p/2 conjugate to q', and
/// C_2 = 1 by the p' = 1 convention.
pub fn cp_constant(p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(WpcError::BadExponent(p, "the Carleson comparison requires p >= 2"));
    }
    let pp = 0.5 * p;
    if (pp - 1.0).abs() < 1e-12 {
        return Ok(1.0);
    }
    let qp = pp / (pp - 1.0);
    Ok((pp - 1.0).powf(-1.0 / qp).sqrt())
}

fn require_same_grid(a: &HalfPlaneGrid, b: &HalfPlaneGrid, what: &str) -> Result<()> {
    if a != b {
        return Err(WpcError::GridMismatch(format!("{what} live on different grids")));
    }
    Ok(())
}

/// The supplied jet must actually have dilatation nu; tolerance 1e-3 on
/// samples, worst offender reported.
fn check_jet_consistency(nu: &BeltramiField, jet: &MapJet) -> Result<()> {
    let cols = nu.grid.x.node_count();
    let mut worst = (0usize, 0.0f64);
    for idx in 0..nu.values.len() {
        let defect = (jet.wirtinger_dzbar[idx] / jet.wirtinger_dz[idx] - nu.values[idx]).norm();
        if defect > worst.1 {
            worst = (idx, defect);
        }
    }
    if worst.1 > 1e-3 {
        return Err(WpcError::JetMismatch {
            i: worst.0 % cols,
            j: worst.0 / cols,
            defect: worst.1,
        });
    }
    Ok(())
}

/// Chain rule for complex dilatations: the dilatation of a map with
/// dilatation mu precomposed with the map H whose own dilatation is nu is
/// mu*nu = ((mu o H) q + nu) / (1 + (mu o H) conj(nu) q), q = conj(H_z)/H_z.
/// mu is interpolated at the image points H(z); points outside its window
/// read as zero.
pub fn compose_dilatations(
    mu: &BeltramiField,
    nu: &BeltramiField,
    jet: &MapJet,
) -> Result<BeltramiField> {
    require_same_grid(&nu.grid, &jet.grid, "dilatation and jet")?;
    check_jet_consistency(nu, jet)?;
    let n = nu.values.len();
    let values: Vec<Complex64> = parallel::install(|| {
        (0..n)
            .into_par_iter()
            .map(|idx| {
                let q = jet.wirtinger_dz[idx].conj() / jet.wirtinger_dz[idx];
                let w = jet.value[idx];
                let m = mu.eval(w.re, w.im);
                let den = 1.0 + m * nu.values[idx].conj() * q;
                if den.norm() < 1e-9 {
                    return Err(WpcError::SmallDenominator(den.norm()));
                }
                Ok((m * q + nu.values[idx]) / den)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    BeltramiField::new(nu.grid.clone(), values)
}

/// Dilatation of the inverse map, nu^{-1}(H(z)) = -nu(z) conj(H_z)/H_z.
/// Values belong to the image points H(z), available to the caller as the
/// jet values; storage stays on the source grid. The unimodular factor
/// preserves moduli, so sup norms agree exactly.
pub fn inverse_dilatation(nu: &BeltramiField, jet: &MapJet) -> Result<BeltramiField> {
    require_same_grid(&nu.grid, &jet.grid, "dilatation and jet")?;
    check_jet_consistency(nu, jet)?;
    let values: Vec<Complex64> = nu
        .values
        .iter()
        .zip(jet.wirtinger_dz.iter())
        .map(|(v, hz)| -v * hz.conj() / hz)
        .collect();
    BeltramiField::new(nu.grid.clone(), values)
}

/// Mean of the piecewise-linear rendering of f over [a, a + len]. Each
/// affine piece contributes its length times its midpoint value, which makes
/// the integral exact for the rendering and keeps roundoff at the scale of
/// f itself instead of the scale of a global antiderivative.
fn pl_mean(f: &MonotoneMap, a: f64, len: f64) -> f64 {
    let g = f.grid();
    let h = g.spacing();
    let x_lo = g.node(0);
    let x_hi = g.node(g.intervals());
    let v = f.values();
    let b = a + len;
    let mut acc = 0.0;
    if a < x_lo {
        let q = b.min(x_lo);
        let (s, _) = f.tail_slopes();
        let mid = 0.5 * (a + q);
        acc += (q - a) * (v[0] + s * (mid - x_lo));
    }
    if b > x_lo && a < x_hi {
        let p0 = a.max(x_lo);
        let q0 = b.min(x_hi);
        let mut k = (((p0 - x_lo) / h).floor() as usize).min(g.intervals() - 1);
        loop {
            let cl = x_lo + k as f64 * h;
            let cr = cl + h;
            let p = p0.max(cl);
            let q = q0.min(cr);
            if q > p {
                let slope = (v[k + 1] - v[k]) / h;
                let mid = 0.5 * (p + q);
                acc += (q - p) * (v[k] + slope * (mid - cl));
            }
            if cr >= q0 || k + 1 >= g.intervals() {
                break;
            }
            k += 1;
        }
    }
    if b > x_hi {
        let p = a.max(x_hi);
        let (_, s) = f.tail_slopes();
        let mid = 0.5 * (p + b);
        acc += (b - p) * (v[g.intervals()] + s * (mid - x_hi));
    }
    acc / len
}

/// d/dy at y1 from samples at y0 < y1 < y2, exact on quadratics.
fn centered_nonuniform(
    f0: Complex64,
    f1: Complex64,
    f2: Complex64,
    dm: f64,
    dp: f64,
) -> Complex64 {
    (dm * dm * f2 + (dp * dp - dm * dm) * f1 - dp * dp * f0) / (dp * dm * (dp + dm))
}

/// d/dy at y0 from samples at y0 < y1 < y2, exact on quadratics.
fn forward_nonuniform(
    f0: Complex64,
    f1: Complex64,
    f2: Complex64,
    d1: f64,
    d2: f64,
) -> Complex64 {
    f0 * (-(2.0 * d1 + d2) / (d1 * (d1 + d2))) + f1 * ((d1 + d2) / (d1 * d2))
        - f2 * (d1 / (d2 * (d1 + d2)))
}

/// Classical Beurling-Ahlfors extension of a boundary homeomorphism:
/// F = (alpha + beta)/2 + i (alpha - beta) with alpha, beta the means of f
/// over [x, x+y] and [x-y, x]; this normalization extends the identity to
/// the identity. Wirtinger derivatives come from second-order finite
/// differences (one-sided at edges), which are exact on data affine in x
/// and y, so affine boundary maps give zero dilatation to roundoff.
pub fn beurling_ahlfors_extension(f: &MonotoneMap, grid: &HalfPlaneGrid) -> Result<MapJet> {
    let cols = grid.x.node_count();
    let rows = grid.y_levels.len();
    let value: Vec<Complex64> = parallel::install(|| {
        grid.y_levels
            .par_iter()
            .map(|&y| {
                let mut row = Vec::with_capacity(cols);
                for i in 0..cols {
                    let x = grid.x.node(i);
                    let alpha = pl_mean(f, x, y);
                    let beta = pl_mean(f, x - y, y);
                    row.push(Complex64::new(0.5 * (alpha + beta), alpha - beta));
                }
                row
            })
            .collect::<Vec<Vec<Complex64>>>()
            .concat()
    });
    let h = grid.x.spacing();
    let mut fx = vec![Complex64::new(0.0, 0.0); cols * rows];
    let mut fy = vec![Complex64::new(0.0, 0.0); cols * rows];
    for j in 0..rows {
        let row = j * cols;
        for i in 0..cols {
            fx[row + i] = if i == 0 {
                (-3.0 * value[row] + 4.0 * value[row + 1] - value[row + 2]) / (2.0 * h)
            } else if i == cols - 1 {
                (3.0 * value[row + i] - 4.0 * value[row + i - 1] + value[row + i - 2]) / (2.0 * h)
            } else {
                (value[row + i + 1] - value[row + i - 1]) / (2.0 * h)
            };
        }
    }
    let y = &grid.y_levels;
    for i in 0..cols {
        let at = |jj: usize| value[jj * cols + i];
        for j in 0..rows {
            fy[j * cols + i] = if j == 0 {
                forward_nonuniform(at(0), at(1), at(2), y[1] - y[0], y[2] - y[1])
            } else if j == rows - 1 {
                -forward_nonuniform(
                    at(rows - 1),
                    at(rows - 2),
                    at(rows - 3),
                    y[rows - 1] - y[rows - 2],
                    y[rows - 2] - y[rows - 3],
                )
            } else {
                centered_nonuniform(at(j - 1), at(j), at(j + 1), y[j] - y[j - 1], y[j + 1] - y[j])
            };
        }
    }
    let im = Complex64::new(0.0, 1.0);
    let dz: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| 0.5 * (a - im * b)).collect();
    let dzbar: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| 0.5 * (a + im * b)).collect();
    MapJet::new(grid.clone(), value, dz, dzbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::homeo_from_real_u;
    use crate::family::{random_field_profile, Bump, BumpProfile};
    use crate::grid::SampledFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // indicator of [x0, x1) x [y0, y1); half-open so that node-aligned x
    // edges integrate exactly under the trapezoid rule
    fn box_field(grid: HalfPlaneGrid, k: f64, xr: (f64, f64), yr: (f64, f64)) -> BeltramiField {
        BeltramiField::from_fn(grid, |x, y| {
            if x >= xr.0 && x < xr.1 && y >= yr.0 && y < yr.1 {
                c(k, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap()
    }

    fn gamma_of_bump(height: f64) -> MonotoneMap {
        let g = LineGrid::new(8.0, 256).unwrap();
        let profile = BumpProfile {
            bumps: vec![Bump { center: 1.8, width: 1.3, height }],
        };
        let u = SampledFunction::sample_line(g, |x| c(profile.eval(x), 0.0), false);
        homeo_from_real_u(&u).unwrap()
    }

    fn conformal_identity_jet(grid: &HalfPlaneGrid) -> MapJet {
        let mut value = Vec::with_capacity(grid.len());
        for &y in grid.y_levels() {
            for i in 0..grid.x().node_count() {
                value.push(c(grid.x().node(i), y));
            }
        }
        let n = value.len();
        MapJet::new(grid.clone(), value, vec![c(1.0, 0.0); n], vec![c(0.0, 0.0); n]).unwrap()
    }

    #[test]
    fn grid_levels_are_log_spaced() {
        let g = HalfPlaneGrid::with_defaults(4.0, 64).unwrap();
        assert_eq!(g.y_levels().len(), 256);
        assert!((g.y_levels()[0] - 1e-3).abs() < 1e-15);
        assert!((g.y_levels()[255] - 16.0).abs() < 1e-10);
        let r0 = g.y_levels()[1] / g.y_levels()[0];
        let r1 = g.y_levels()[200] / g.y_levels()[199];
        assert!((r0 - r1).abs() < 1e-10, "ratios {r0} vs {r1}");
        assert!(HalfPlaneGrid::new(4.0, 96, 1e-3, 16.0, 64).is_err());
        assert!(matches!(
            HalfPlaneGrid::new(4.0, 64, 0.0, 16.0, 64),
            Err(WpcError::BadYLevels)
        ));
        assert!(matches!(
            HalfPlaneGrid::new(4.0, 64, 1e-3, 16.0, 1),
            Err(WpcError::BadYLevels)
        ));
    }

    #[test]
    fn field_construction_enforces_the_unit_bound() {
        let g = HalfPlaneGrid::new(2.0, 16, 0.1, 1.0, 8).unwrap();
        let n = g.len();
        let mut values = vec![c(0.0, 0.0); n];
        values[5] = c(0.9, 0.0);
        assert!(BeltramiField::new(g.clone(), values.clone()).is_ok());
        values[5] = c(1.0 - 1e-12, 0.0);
        assert!(matches!(
            BeltramiField::new(g.clone(), values),
            Err(WpcError::DilatationBound { .. })
        ));
        assert!(matches!(
            BeltramiField::new(g, vec![c(0.0, 0.0); 3]),
            Err(WpcError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mp_norm_of_zero_vanishes() {
        let g = HalfPlaneGrid::with_defaults(4.0, 32).unwrap();
        let r = mp_norm(&BeltramiField::zero(g), 2.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.method, NormMethod::LogTrapezoid);
    }

    #[test]
    fn mp_norm_matches_the_box_mass() {
        // integral of y^-2 over a unit box at heights [1,2) is 1/2, so the
        // norm of the indicator field of height k is k 2^(-1/p)
        let g = HalfPlaneGrid::new(4.0, 64, 0.5, 4.0, 8192).unwrap();
        let k = 0.8;
        let mu = box_field(g, k, (0.0, 1.0), (1.0, 2.0));
        for p in [1.0, 2.0, 3.0] {
            let r = mp_norm(&mu, p).unwrap();
            let expect = k * 2f64.powf(-1.0 / p);
            assert!(
                (r.value - expect).abs() < 1e-3,
                "p = {p}: {} vs {expect}",
                r.value
            );
        }
    }

    #[test]
    fn mp_norm_scales_exactly_in_the_field_height() {
        let g = HalfPlaneGrid::new(4.0, 64, 0.5, 4.0, 512).unwrap();
        let a = mp_norm(&box_field(g.clone(), 0.2, (0.0, 1.0), (1.0, 2.0)), 3.0).unwrap();
        let b = mp_norm(&box_field(g, 0.6, (0.0, 1.0), (1.0, 2.0)), 3.0).unwrap();
        assert!((b.value - 3.0 * a.value).abs() < 1e-12 * b.value.max(1.0));
    }

    #[test]
    fn mp_norm_rejects_bad_exponents() {
        let g = HalfPlaneGrid::with_defaults(2.0, 16).unwrap();
        let mu = BeltramiField::zero(g);
        assert!(matches!(mp_norm(&mu, 0.5), Err(WpcError::BadExponent(_, _))));
    }

    #[test]
    fn carleson_norm_of_zero_vanishes() {
        let g = HalfPlaneGrid::with_defaults(4.0, 32).unwrap();
        assert_eq!(carleson_norm(&BeltramiField::zero(g)).unwrap().value, 0.0);
    }

    #[test]
    fn carleson_norm_matches_the_box_sup() {
        // the winning box is [0,2] x (0,2]: mass k^2 ln 2 over length 2;
        // support shifted interior so its interpolation ramps stay inside
        let g = HalfPlaneGrid::new(4.0, 256, 0.5, 4.0, 512).unwrap();
        let k = 0.8;
        let mu = box_field(g, k, (0.25, 1.25), (1.0, 2.0));
        let r = carleson_norm(&mu).unwrap();
        let expect = k * (0.5 * std::f64::consts::LN_2).sqrt();
        assert!((r.value - expect).abs() < 2e-2, "{} vs {expect}", r.value);
        assert_eq!(r.method, NormMethod::DyadicSup);
    }

    #[test]
    fn cp_constant_closed_forms() {
        assert!((cp_constant(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((cp_constant(4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((cp_constant(3.0).unwrap() - 2f64.powf(1.0 / 6.0)).abs() < 1e-12);
        assert!(matches!(cp_constant(1.5), Err(WpcError::BadExponent(_, _))));
    }

    #[test]
    fn carleson_stays_below_the_mass_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBE17);
        let g = HalfPlaneGrid::with_defaults(4.0, 64).unwrap();
        for _ in 0..5 {
            let f = random_field_profile(&mut rng, (-2.5, 2.5), (0.05, 3.0), 0.8);
            let mu = BeltramiField::from_fn(g.clone(), f).unwrap();
            let carleson = carleson_norm(&mu).unwrap().value;
            for p in [2.0, 3.0, 4.0] {
                let bound = cp_constant(p).unwrap() * mp_norm(&mu, p).unwrap().value;
                assert!(
                    carleson <= bound + 3e-2,
                    "p = {p}: carleson {carleson} vs bound {bound}"
                );
            }
        }
    }

    #[test]
    fn vanishing_profile_dies_once_scales_undercut_the_support() {
        let g = HalfPlaneGrid::new(4.0, 64, 0.05, 16.0, 512).unwrap();
        let mu = box_field(g, 0.8, (0.25, 1.25), (1.0, 2.0));
        // scales start at the capture scale of the support, where the ratio
        // peaks; below it the profile decays and dies at scale < 1
        let scales = [2.0, 1.5, 1.0, 0.5, 0.25];
        let profile = vanishing_profile(&mu, &scales).unwrap();
        assert!(profile[0] > 0.1);
        assert_eq!(profile[3], 0.0);
        assert_eq!(profile[4], 0.0);
        for w in profile.windows(2) {
            assert!(w[1] <= w[0] + 1e-3, "profile not decaying: {profile:?}");
        }
        let zero = BeltramiField::zero(HalfPlaneGrid::with_defaults(4.0, 32).unwrap());
        let flat = vanishing_profile(&zero, &[2.0, 1.0, 0.5]).unwrap();
        assert!(flat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vanishing_profile_sees_the_near_axis_slab() {
        // mass piled against the real axis: ratios keep a plateau instead
        // of decaying, the constructed non-vanishing counterexample
        let g = HalfPlaneGrid::new(4.0, 128, 1e-3, 16.0, 512).unwrap();
        let mu = BeltramiField::from_fn(g, |x, y| {
            if (0.5..=3.5).contains(&x) && y < x {
                c(0.8, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let profile = vanishing_profile(&mu, &[2.0, 1.0, 0.5, 0.25, 0.125]).unwrap();
        assert!(
            profile.last().unwrap() > &1.0,
            "plateau collapsed: {profile:?}"
        );
    }

    #[test]
    fn vanishing_profile_validates_scales() {
        let g = HalfPlaneGrid::with_defaults(4.0, 64).unwrap();
        let mu = BeltramiField::zero(g);
        assert!(matches!(
            vanishing_profile(&mu, &[1.0, 2.0]),
            Err(WpcError::Invalid(_))
        ));
        assert!(matches!(
            vanishing_profile(&mu, &[2.0, 1e-4]),
            Err(WpcError::ScaleUnresolvable { .. })
        ));
    }

    #[test]
    fn ba_extension_of_the_identity_is_the_identity_jet() {
        let f = MonotoneMap::identity(LineGrid::new(8.0, 64).unwrap());
        let g = HalfPlaneGrid::new(8.0, 64, 0.25, 16.0, 128).unwrap();
        let jet = beurling_ahlfors_extension(&f, &g).unwrap();
        for (j, &y) in g.y_levels().iter().enumerate() {
            for i in 0..g.x().node_count() {
                let idx = g.index(i, j);
                let expect = c(g.x().node(i), y);
                assert!(
                    (jet.value[idx] - expect).norm() < 1e-11,
                    "H at ({i}, {j}): {} vs {expect}",
                    jet.value[idx]
                );
            }
        }
        let mu = dilatation_of_jet(&jet).unwrap();
        assert!(mu.sup() < 1e-11, "identity dilatation {}", mu.sup());
    }

    #[test]
    fn ba_extension_of_affine_maps_is_conformal() {
        let g_line = LineGrid::new(8.0, 64).unwrap();
        let values: Vec<f64> = g_line.nodes().iter().map(|x| 0.7 * x + 0.3).collect();
        let f = MonotoneMap::new(g_line, values, (0.7, 0.7)).unwrap();
        let g = HalfPlaneGrid::new(8.0, 64, 0.25, 16.0, 128).unwrap();
        let jet = beurling_ahlfors_extension(&f, &g).unwrap();
        let mu = dilatation_of_jet(&jet).unwrap();
        assert!(mu.sup() < 1e-10, "affine dilatation {}", mu.sup());
    }

    #[test]
    fn ba_dilatation_grows_with_the_boundary_distortion() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let mut sups = Vec::new();
        for eps in [0.05, 0.1, 0.2] {
            let f = gamma_of_bump(eps);
            let jet = beurling_ahlfors_extension(&f, &g).unwrap();
            sups.push(dilatation_of_jet(&jet).unwrap().sup());
        }
        assert!(sups[0] < sups[1] && sups[1] < sups[2], "trend {sups:?}");
        assert!(sups[2] <= 0.2, "sup {}", sups[2]);
    }

    #[test]
    fn jet_construction_rejects_folding() {
        let g = HalfPlaneGrid::new(2.0, 16, 0.1, 1.0, 4).unwrap();
        let n = g.len();
        let ones = vec![c(1.0, 0.0); n];
        let mut bad = vec![c(0.2, 0.0); n];
        bad[7] = c(1.5, 0.0);
        assert!(matches!(
            MapJet::new(g, ones.clone(), ones.clone(), bad),
            Err(WpcError::OrientationViolation { .. })
        ));
    }

    #[test]
    fn composing_with_zero_mu_returns_nu() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let jet = beurling_ahlfors_extension(&gamma_of_bump(0.15), &g).unwrap();
        let nu = dilatation_of_jet(&jet).unwrap();
        let mu = BeltramiField::zero(g);
        let out = compose_dilatations(&mu, &nu, &jet).unwrap();
        for (a, b) in out.values.iter().zip(&nu.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn composing_through_a_conformal_jet_preserves_moduli() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let jet = conformal_identity_jet(&g);
        let nu = BeltramiField::zero(g.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF);
        let f_mu = random_field_profile(&mut rng, (-5.0, 5.0), (0.05, 10.0), 0.4);
        let mu = BeltramiField::from_fn(g.clone(), f_mu).unwrap();
        let out = compose_dilatations(&mu, &nu, &jet).unwrap();
        for idx in 0..out.values.len() {
            assert!(
                (out.values[idx].norm() - mu.values[idx].norm()).abs() < 1e-12,
                "modulus drift at {idx}"
            );
        }
    }

    #[test]
    fn composition_respects_the_sup_bound() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xAB5);
        for round in 0..3 {
            let height = 0.1 + 0.05 * round as f64;
            let jet = beurling_ahlfors_extension(&gamma_of_bump(height), &g).unwrap();
            let nu = dilatation_of_jet(&jet).unwrap();
            let f_mu = random_field_profile(&mut rng, (-5.0, 5.0), (0.05, 10.0), 0.4);
            let mu = BeltramiField::from_fn(g.clone(), f_mu).unwrap();
            let out = compose_dilatations(&mu, &nu, &jet).unwrap();
            let a = mu.sup();
            let b = nu.sup();
            let bound = (a + b) / (1.0 - a * b);
            assert!(
                out.sup() <= bound + 1e-12,
                "round {round}: {} vs {bound}",
                out.sup()
            );
        }
    }

    #[test]
    fn jet_mismatch_is_detected() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let jet = beurling_ahlfors_extension(&gamma_of_bump(0.2), &g).unwrap();
        let zero = BeltramiField::zero(g.clone());
        assert!(matches!(
            compose_dilatations(&zero.clone(), &zero, &jet),
            Err(WpcError::JetMismatch { .. })
        ));
    }

    #[test]
    fn inverse_dilatation_preserves_moduli_and_sup() {
        let g = HalfPlaneGrid::with_defaults(8.0, 64).unwrap();
        let jet = beurling_ahlfors_extension(&gamma_of_bump(0.18), &g).unwrap();
        let nu = dilatation_of_jet(&jet).unwrap();
        let inv = inverse_dilatation(&nu, &jet).unwrap();
        assert!((inv.sup() - nu.sup()).abs() < 1e-12);
        for (a, b) in inv.values.iter().zip(&nu.values) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
        let zero = BeltramiField::zero(g.clone());
        let back = inverse_dilatation(&zero, &conformal_identity_jet(&g)).unwrap();
        assert_eq!(back.sup(), 0.0);
    }

    #[test]
    fn field_eval_interpolates_and_clamps() {
        let g = HalfPlaneGrid::new(2.0, 16, 0.1, 1.0, 16).unwrap();
        let mu = BeltramiField::from_fn(g.clone(), |x, y| c(0.1 * x, 0.2 * y)).unwrap();
        let v = mu.eval(g.x().node(5), g.y_levels()[7]);
        assert!((v - mu.values[g.index(5, 7)]).norm() < 1e-12);
        assert_eq!(mu.eval(5.0, 0.5), c(0.0, 0.0));
        assert_eq!(mu.eval(0.0, 0.01), c(0.0, 0.0));
    }
}
