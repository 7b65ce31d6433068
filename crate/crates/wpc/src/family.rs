//! Seeded families of smooth compactly supported test functions.
//!
//! Everything here is deterministic for a fixed seed: the generator is
//! ChaCha8, and samples are produced by the same closed-form bump evaluated
//! at grid nodes. Supports stay inside (-X/2, X/2) so window tails vanish
//! identically and affine tail rules are exact for reparametrizations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, LineGrid, SampledFunction};

/// One smooth bump: height * exp(1 - 1/(1 - s^2)) with s = (x-center)/width,
/// identically 0 for |s| >= 1, C-infinity everywhere, peak value = height.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            self.height * (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// Sum of a few bumps; the smooth profile behind every random test function.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    pub bumps: Vec<Bump>,
}

impl BumpProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(x)).sum()
    }

    pub fn sup_bound(&self) -> (f64, f64) {
        let lo = self
            .bumps
            .iter()
            .map(|b| b.center - b.width)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .bumps
            .iter()
            .map(|b| b.center + b.width)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn sample(&self, grid: LineGrid, modulo_constant: bool) -> SampledFunction {
        SampledFunction::sample_line(
            grid,
            |x| Complex64::new(self.eval(x), 0.0),
            modulo_constant,
        )
    }

    pub fn scaled(&self, factor: f64) -> BumpProfile {
        BumpProfile {
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump { height: b.height * factor, ..*b })
                .collect(),
        }
    }
}

/// Random profile of 1..=3 bumps supported inside [lo, hi], with sup-norm
/// scaled into [0.5, 1.0] * amplitude.
pub fn random_profile(rng: &mut ChaCha8Rng, lo: f64, hi: f64, amplitude: f64) -> BumpProfile {
    random_profile_banded(rng, lo, hi, amplitude, (0.12, 0.28))
}

/// Same family with the bump widths drawn from `band` (as fractions of the
/// support span). Wide bands give gentler profiles that resolve better on a
/// given grid.
pub fn random_profile_banded(
    rng: &mut ChaCha8Rng,
    lo: f64,
    hi: f64,
    amplitude: f64,
    band: (f64, f64),
) -> BumpProfile {
    let count = rng.gen_range(1..=3usize);
    let span = hi - lo;
    let mut bumps = Vec::with_capacity(count);
    for _ in 0..count {
        let width = span * rng.gen_range(band.0..band.1);
        let center = rng.gen_range(lo + width..hi - width);
        let height = rng.gen_range(0.4..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        bumps.push(Bump { center, width, height });
    }
    let profile = BumpProfile { bumps };
    // normalize the sup over a scan to the requested amplitude band
    let mut sup: f64 = 0.0;
    let steps = 2000;
    for i in 0..=steps {
        let x = lo + span * i as f64 / steps as f64;
        sup = sup.max(profile.eval(x).abs());
    }
    let target = amplitude * (0.5 + 0.5 * rng.gen::<f64>());
    profile.scaled(if sup > 0.0 { target / sup } else { 0.0 })
}

/// Deterministic family of `count` smooth profiles supported in [lo, hi].
pub fn seeded_profiles(
    seed: u64,
    count: usize,
    lo: f64,
    hi: f64,
    amplitude: f64,
) -> Vec<BumpProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_profile(&mut rng, lo, hi, amplitude)).collect()
}

/// Convenience: sampled real functions on `grid`, supports in (-X/2, X/2).
pub fn seeded_functions(
    seed: u64,
    count: usize,
    grid: LineGrid,
    amplitude: f64,
    modulo_constant: bool,
) -> Vec<SampledFunction> {
    let half = grid.half_width() / 2.0;
    seeded_profiles(seed, count, -0.9 * half, 0.9 * half, amplitude)
        .into_iter()
        .map(|p| p.sample(grid, modulo_constant))
        .collect()
}

/// A smooth random field on a rectangle, for dilatation tests: sum of
/// products of bumps in x and y, scaled to the requested sup bound.
pub fn random_field_profile(
    rng: &mut ChaCha8Rng,
    x_range: (f64, f64),
    y_range: (f64, f64),
    amplitude: f64,
) -> impl Fn(f64, f64) -> Complex64 {
    let count = rng.gen_range(1..=3usize);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let wx = (x_range.1 - x_range.0) * rng.gen_range(0.15..0.3);
        let cx = rng.gen_range(x_range.0 + wx..x_range.1 - wx);
        let wy = (y_range.1 - y_range.0) * rng.gen_range(0.15..0.3);
        let cy = rng.gen_range(y_range.0 + wy..y_range.1 - wy);
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        terms.push((Bump { center: cx, width: wx, height: 1.0 },
                    Bump { center: cy, width: wy, height: 1.0 },
                    Complex64::new(re, im)));
    }
    let norm: f64 = terms.iter().map(|t| t.2.norm()).sum();
    let scale = if norm > 0.0 { amplitude / norm } else { 0.0 };
    move |x: f64, y: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (bx, by, c) in &terms {
            acc += c * (bx.eval(x) * by.eval(y));
        }
        acc * scale
    }
}

/// Pure-profile variant of `seeded_functions` for circle data.
pub fn sample_profile_circle(
    profile: &BumpProfile,
    grid: crate::grid::CircleGrid,
    modulo_constant: bool,
) -> SampledFunction {
    SampledFunction::sample_circle(
        grid,
        |t| Complex64::new(profile.eval(t), 0.0),
        modulo_constant,
    )
}

/// Helper used by tests that need the grid wrapper type.
pub fn line(grid: LineGrid) -> Grid {
    Grid::Line(grid)
}
