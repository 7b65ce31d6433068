//! Uniform sample grids on a symmetric window of the line and on the circle,
//! together with the three data types the rest of the crate moves around:
//! complex sampled functions, strictly increasing maps with affine tails, and
//! the interpolation / quadrature / inversion primitives over them.
//!
//! Interpolation is monotone piecewise cubic (Fritsch-Carlson slopes), so
//! strictly increasing data interpolates to a strictly increasing function.
//! Quadrature is the trapezoid rule throughout; derived quantities are defined
//! against this quadrature, not against the continuum, so self-consistency
//! checks hold to rounding error.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WpcError};

/// Uniform grid on `[-half_width, half_width]` with `intervals` cells and
/// `intervals + 1` nodes. `intervals` is even, so 0 is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    half_width: f64,
    intervals: usize,
}

impl LineGrid {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(WpcError::NonpositiveHalfWidth(half_width));
        }
        if intervals < 16 || intervals % 2 != 0 {
            return Err(WpcError::BadIntervalCount(intervals));
        }
        Ok(LineGrid { half_width, intervals })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn node_count(&self) -> usize {
        self.intervals + 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    /// Node j, computed as (j - M/2) * h so that node(M/2) is exactly 0.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - (self.intervals / 2) as f64) * self.spacing()
    }

    /// Index of the node at 0.
    pub fn zero_index(&self) -> usize {
        self.intervals / 2
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|j| self.node(j)).collect()
    }

    /// Largest j with node(j) <= x, clamped to [0, M-1] so that the cell
    /// [node(j), node(j+1)] is always valid.
    pub(crate) fn cell_of(&self, x: f64) -> usize {
        let t = (x - self.node(0)) / self.spacing();
        let j = t.floor() as i64;
        j.clamp(0, self.intervals as i64 - 1) as usize
    }
}

/// Uniform grid of `n` points on the circle, at angles `2*pi*j/n`. `n` is a
/// power of two so spectral transforms need no padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(WpcError::BadCircleCount(n));
        }
        Ok(CircleGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.spacing() * j as f64
    }
}

/// Grid tag for a sampled function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Line(LineGrid),
    Circle(CircleGrid),
}

impl From<LineGrid> for Grid {
    fn from(g: LineGrid) -> Self {
        Grid::Line(g)
    }
}

impl From<CircleGrid> for Grid {
    fn from(g: CircleGrid) -> Self {
        Grid::Circle(g)
    }
}

impl Grid {
    pub fn node_count(&self) -> usize {
        match self {
            Grid::Line(g) => g.node_count(),
            Grid::Circle(g) => g.len(),
        }
    }

    pub fn as_line(&self) -> Result<&LineGrid> {
        match self {
            Grid::Line(g) => Ok(g),
            Grid::Circle(_) => Err(WpcError::LineGridRequired),
        }
    }

    pub fn as_circle(&self) -> Result<&CircleGrid> {
        match self {
            Grid::Circle(g) => Ok(g),
            Grid::Line(_) => Err(WpcError::CircleGridRequired),
        }
    }
}

/// Complex-valued samples on a line or circle grid.
///
/// `modulo_constant` marks data that represents an equivalence class modulo
/// additive constants; norms and comparisons subtract the mean first, and
/// evaluation outside a line window returns the mean instead of 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub modulo_constant: bool,
}

/// Fritsch-Carlson slope at an interior node of a uniform grid: harmonic mean
/// of the adjacent secants when they share a sign, 0 otherwise. Keeps the
/// cubic monotone on every cell with monotone data.
fn fc_interior_slope(d_prev: f64, d_next: f64) -> f64 {
    if d_prev * d_next <= 0.0 {
        0.0
    } else {
        2.0 * d_prev * d_next / (d_prev + d_next)
    }
}

/// One-sided endpoint slope (uniform spacing), shape-limited.
fn fc_endpoint_slope(d_near: f64, d_far: f64) -> f64 {
    let m = (3.0 * d_near - d_far) / 2.0;
    if m * d_near <= 0.0 {
        0.0
    } else if d_near * d_far < 0.0 && m.abs() > 3.0 * d_near.abs() {
        3.0 * d_near
    } else {
        m
    }
}

/// Cubic Hermite evaluation on one cell; t in [0, 1], slopes already scaled
/// by the cell width.
fn hermite(v0: f64, v1: f64, hm0: f64, hm1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    v0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + hm0 * (t3 - 2.0 * t2 + t)
        + v1 * (-2.0 * t3 + 3.0 * t2)
        + hm1 * (t3 - t2)
}

/// Monotone cubic evaluation of real samples `v` on a uniform line grid.
/// Assumes x lies inside the window; the caller handles tails.
pub(crate) fn eval_line(grid: &LineGrid, v: &[f64], x: f64) -> f64 {
    let j = grid.cell_of(x);
    let h = grid.spacing();
    let m = grid.intervals();
    let d = |k: usize| (v[k + 1] - v[k]) / h;
    let slope = |k: usize| -> f64 {
        if k == 0 {
            fc_endpoint_slope(d(0), d(1))
        } else if k == m {
            fc_endpoint_slope(d(m - 1), d(m - 2))
        } else {
            fc_interior_slope(d(k - 1), d(k))
        }
    };
    let t = (x - grid.node(j)) / h;
    hermite(v[j], v[j + 1], h * slope(j), h * slope(j + 1), t)
}

/// Periodic monotone cubic evaluation of samples on the circle.
fn eval_circle(grid: &CircleGrid, v: &[f64], theta: f64) -> f64 {
    let n = grid.len();
    let h = grid.spacing();
    let tau = 2.0 * std::f64::consts::PI;
    let mut t = theta % tau;
    if t < 0.0 {
        t += tau;
    }
    let j = ((t / h).floor() as usize).min(n - 1);
    let at = |k: usize| v[k % n];
    let d = |k: usize| (at(k + 1) - at(k)) / h;
    // interior formula everywhere: the grid has no endpoints
    let slope = |k: usize| fc_interior_slope(d((k + n - 1) % n), d(k % n));
    let s = (t - grid.node(j)) / h;
    hermite(at(j), at(j + 1), h * slope(j), h * slope(j + 1), s)
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>, modulo_constant: bool) -> Result<Self> {
        let expected = grid.node_count();
        if values.len() != expected {
            return Err(WpcError::LengthMismatch { expected, got: values.len() });
        }
        Ok(SampledFunction { grid, values, modulo_constant })
    }

    pub fn from_real(grid: Grid, values: Vec<f64>, modulo_constant: bool) -> Result<Self> {
        let v = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        SampledFunction::new(grid, v, modulo_constant)
    }

    /// Samples a closure on a line grid.
    pub fn sample_line(
        grid: LineGrid,
        f: impl Fn(f64) -> Complex64,
        modulo_constant: bool,
    ) -> Self {
        let values = (0..grid.node_count()).map(|j| f(grid.node(j))).collect();
        SampledFunction { grid: Grid::Line(grid), values, modulo_constant }
    }

    pub fn sample_circle(
        grid: CircleGrid,
        f: impl Fn(f64) -> Complex64,
        modulo_constant: bool,
    ) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        SampledFunction { grid: Grid::Circle(grid), values, modulo_constant }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean value: trapezoid mean over the window for line grids (endpoints
    /// carry half weight), plain average on the circle.
    pub fn mean(&self) -> Complex64 {
        match &self.grid {
            Grid::Line(g) => {
                let m = g.intervals();
                let mut acc = 0.5 * (self.values[0] + self.values[m]);
                for v in &self.values[1..m] {
                    acc += v;
                }
                acc / m as f64
            }
            Grid::Circle(_) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for v in &self.values {
                    acc += v;
                }
                acc / self.values.len() as f64
            }
        }
    }

    /// Returns the same samples shifted so the mean is zero. This is the
    /// canonical representative of data considered modulo constants.
    pub fn with_zero_mean(&self) -> Self {
        let m = self.mean();
        let values = self.values.iter().map(|v| v - m).collect();
        SampledFunction { grid: self.grid, values, modulo_constant: self.modulo_constant }
    }

    /// Tail value used outside a line window: the mean for modulo-constant
    /// data, 0 otherwise.
    pub fn tail_value(&self) -> Complex64 {
        if self.modulo_constant {
            self.mean()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Interpolates at `x` (an angle for circle grids). Line evaluation
    /// outside the window returns `tail_value()`.
    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.grid {
            Grid::Line(g) => {
                if x < g.node(0) || x > g.node(g.intervals()) {
                    return self.tail_value();
                }
                let re: Vec<f64> = self.values.iter().map(|v| v.re).collect();
                let im: Vec<f64> = self.values.iter().map(|v| v.im).collect();
                Complex64::new(eval_line(g, &re, x), eval_line(g, &im, x))
            }
            Grid::Circle(g) => {
                let re: Vec<f64> = self.values.iter().map(|v| v.re).collect();
                let im: Vec<f64> = self.values.iter().map(|v| v.im).collect();
                Complex64::new(eval_circle(g, &re, x), eval_circle(g, &im, x))
            }
        }
    }

    /// Evaluates at many points, amortizing the component split. Points are
    /// independent, so large batches fan out across threads without changing
    /// any value.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<Complex64> {
        let re: Vec<f64> = self.values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = self.values.iter().map(|v| v.im).collect();
        let one = |x: f64| match &self.grid {
            Grid::Line(g) => {
                if x < g.node(0) || x > g.node(g.intervals()) {
                    self.tail_value()
                } else {
                    Complex64::new(eval_line(g, &re, x), eval_line(g, &im, x))
                }
            }
            Grid::Circle(g) => {
                Complex64::new(eval_circle(g, &re, x), eval_circle(g, &im, x))
            }
        };
        if xs.len() >= 4096 {
            crate::parallel::install(|| xs.par_iter().map(|&x| one(x)).collect())
        } else {
            xs.iter().map(|&x| one(x)).collect()
        }
    }

    /// Real parts, failing if any imaginary part exceeds 1e-12 in modulus.
    pub fn require_real(&self) -> Result<Vec<f64>> {
        let worst = self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if worst > 1e-12 {
            return Err(WpcError::NotReal(worst));
        }
        Ok(self.values.iter().map(|v| v.re).collect())
    }

    /// Cumulative trapezoid integral on a line grid, anchored so the result
    /// vanishes at x = 0 (always a node). Rejects circle grids: there is no
    /// distinguished base point or single-valued primitive there.
    pub fn cumulative_integral(&self) -> Result<SampledFunction> {
        let g = *self.grid.as_line()?;
        let h = g.spacing();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.values.len());
        out.push(acc);
        for k in 0..g.intervals() {
            acc += (self.values[k] + self.values[k + 1]) * (0.5 * h);
            out.push(acc);
        }
        let anchor = out[g.zero_index()];
        for v in &mut out {
            *v -= anchor;
        }
        SampledFunction::new(self.grid, out, false)
    }

    /// Sup distance to `other` on the same grid. When either side is marked
    /// modulo-constant the mean of the difference is removed first.
    pub fn sup_distance(&self, other: &SampledFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(WpcError::GridMismatch("sup distance needs matching grids".into()));
        }
        let diff: Vec<Complex64> =
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let d = SampledFunction::new(self.grid, diff, false)?;
        let shift = if self.modulo_constant || other.modulo_constant {
            d.mean()
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(d.values.iter().map(|v| (v - shift).norm()).fold(0.0, f64::max))
    }

    /// Same as `sup_distance` but restricted to line nodes with |x| <= r;
    /// the mean shift, when applied, is the trapezoid mean over that range.
    pub fn sup_distance_within(&self, other: &SampledFunction, r: f64) -> Result<f64> {
        let g = *self.grid.as_line()?;
        if self.grid != other.grid {
            return Err(WpcError::GridMismatch("sup distance needs matching grids".into()));
        }
        let idx: Vec<usize> =
            (0..g.node_count()).filter(|&j| g.node(j).abs() <= r).collect();
        if idx.len() < 2 {
            return Err(WpcError::Invalid(format!("window |x| <= {r} holds fewer than 2 nodes")));
        }
        let d: Vec<Complex64> = idx
            .iter()
            .map(|&j| self.values[j] - other.values[j])
            .collect();
        let shift = if self.modulo_constant || other.modulo_constant {
            let mut acc = 0.5 * (d[0] + d[d.len() - 1]);
            for v in &d[1..d.len() - 1] {
                acc += v;
            }
            acc / (d.len() - 1) as f64
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(d.iter().map(|v| (v - shift).norm()).fold(0.0, f64::max))
    }
}

/// Strictly increasing real function on a line window, extended by affine
/// tails: slope `tail_slopes.0` for x below the window, `.1` above. Offsets
/// are fixed by continuity at the window edges.
///
/// A map built by `inverse()` keeps its forward map in `source` and evaluates
/// by root finding against it, so inverse evaluation is limited by the solver
/// tolerance rather than by resampling. Its `values` are still a faithful
/// node-by-node rendering for inspection and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    grid: LineGrid,
    values: Vec<f64>,
    tail_slopes: (f64, f64),
    tail_offsets: (f64, f64),
    source: Option<Box<MonotoneMap>>,
}

impl MonotoneMap {
    pub fn new(
        grid: LineGrid,
        values: Vec<f64>,
        tail_slopes: (f64, f64),
    ) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(WpcError::LengthMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        for j in 0..values.len() - 1 {
            if !(values[j + 1] > values[j]) {
                return Err(WpcError::NotMonotone(j + 1));
            }
        }
        for s in [tail_slopes.0, tail_slopes.1] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(WpcError::BadTailSlope(s));
            }
        }
        let x_lo = grid.node(0);
        let x_hi = grid.node(grid.intervals());
        let tail_offsets = (
            values[0] - tail_slopes.0 * x_lo,
            values[grid.intervals()] - tail_slopes.1 * x_hi,
        );
        Ok(MonotoneMap { grid, values, tail_slopes, tail_offsets, source: None })
    }

    /// The identity map on `grid`, with unit tail slopes.
    pub fn identity(grid: LineGrid) -> Self {
        let values = grid.nodes();
        MonotoneMap::new(grid, values, (1.0, 1.0)).expect("identity data is monotone")
    }

    pub fn grid(&self) -> &LineGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_slopes(&self) -> (f64, f64) {
        self.tail_slopes
    }

    pub fn tail_offsets(&self) -> (f64, f64) {
        self.tail_offsets
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let Some(src) = &self.source {
            return src.solve_for(x);
        }
        let x_lo = self.grid.node(0);
        let x_hi = self.grid.node(self.grid.intervals());
        if x < x_lo {
            self.tail_slopes.0 * x + self.tail_offsets.0
        } else if x > x_hi {
            self.tail_slopes.1 * x + self.tail_offsets.1
        } else {
            eval_line(&self.grid, &self.values, x)
        }
    }

    /// Inverse map on the same grid. Evaluation solves the forward map by
    /// bisection, so round trips are solver-exact rather than limited by
    /// resampling; node values are a rendering. Inverting twice returns the
    /// original map.
    pub fn inverse(&self) -> Result<MonotoneMap> {
        if let Some(src) = &self.source {
            return Ok((**src).clone());
        }
        let g = self.grid;
        let values: Vec<f64> = g.nodes().iter().map(|&y| self.solve_for(y)).collect();
        let mut inv = MonotoneMap::new(
            g,
            values,
            (1.0 / self.tail_slopes.0, 1.0 / self.tail_slopes.1),
        )?;
        inv.source = Some(Box::new(self.clone()));
        Ok(inv)
    }

    /// Solves f(t) = y. Beyond the sampled range the affine tails invert in
    /// closed form; inside it the cell is located through the increasing node
    /// values and bisected to 1e-14 relative width.
    fn solve_for(&self, y: f64) -> f64 {
        if let Some(src) = &self.source {
            // solving against an inverse means evaluating its forward map
            return src.eval(y);
        }
        let m = self.grid.intervals();
        if y <= self.values[0] {
            return (y - self.tail_offsets.0) / self.tail_slopes.0;
        }
        if y >= self.values[m] {
            return (y - self.tail_offsets.1) / self.tail_slopes.1;
        }
        let cell = self.values.partition_point(|&v| v <= y) - 1;
        let mut lo = self.grid.node(cell);
        let mut hi = self.grid.node(cell + 1);
        let scale = 1.0 + lo.abs().max(hi.abs());
        while hi - lo > 1e-14 * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval_line(&self.grid, &self.values, mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Composition self( other(x) ) sampled on `other`'s grid. Tail slopes
    /// multiply; this is exact wherever `other` already maps into a tail
    /// region of `self`.
    pub fn compose(&self, other: &MonotoneMap) -> Result<MonotoneMap> {
        let g = other.grid;
        let values: Vec<f64> =
            other.values.iter().map(|&y| self.eval(y)).collect();
        MonotoneMap::new(
            g,
            values,
            (self.tail_slopes.0 * other.tail_slopes.0, self.tail_slopes.1 * other.tail_slopes.1),
        )
    }
}
