//! Log-power conformal maps, numerical univalence probes and the sector lower
//! bounds used on the large-angle (nonexistence) side.
//!
//! Two forms of the same map are provided: `ζ(ω) = ω (log ω − iπ/2)^A` on the
//! upper half-plane outside a disk, and `ζ(z) = e^z z^A` on the half-strip
//! `Π_ς = {x > ς, |y| < π/2}`. They are related by `ω = i e^z`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::SectorFieldConfig;
use crate::potential::SectorPotential;
use crate::C64;

/// Angle budget for `|arg z^A|` and `|arg(1 + A/z)|` on the strip boundary.
pub const ANGLE_BUDGET: f64 = PI / 40.0;
/// Largest strip cutoff tried by [`choose_varsigma`].
pub const VARSIGMA_MAX: f64 = 1e4;
/// Step of the cutoff search grid.
pub const VARSIGMA_STEP: f64 = 0.25;
/// Abscissa up to which the strip boundary is sampled.
pub const BOUNDARY_SAMPLE_X: f64 = 1e6;

/// The map with exponent `A`, strip cutoff `ς` and disk cutoff `R = e^ς`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogPowerMap {
    pub a: f64,
    pub varsigma: f64,
    pub r: f64,
}

impl LogPowerMap {
    /// Uses the least admissible cutoff from [`choose_varsigma`].
    pub fn new(a: f64) -> Result<Self> {
        let varsigma = choose_varsigma(a)?;
        Ok(Self::with_cutoff(a, varsigma))
    }

    pub fn with_cutoff(a: f64, varsigma: f64) -> Self {
        Self {
            a,
            varsigma,
            r: varsigma.exp(),
        }
    }

    /// `ω (log ω − iπ/2)^A`; requires `Im ω > 0` and `|ω| > R`.
    pub fn map_halfplane(&self, omega: C64) -> Result<C64> {
        if !(omega.im > 0.0 && omega.norm() > self.r) {
            return Err(Error::Domain(omega));
        }
        Ok(halfplane_closure(self.a, omega))
    }

    /// `e^z z^A`; requires `Re z > ς` and `|Im z| < π/2`.
    pub fn map_strip(&self, z: C64) -> Result<C64> {
        if !(z.re > self.varsigma && z.im.abs() < FRAC_PI_2) {
            return Err(Error::Domain(z));
        }
        Ok(strip_map(self.a, z))
    }
}

/// `ω (log ω − iπ/2)^A` on the closed upper half-plane minus 0; the negative
/// real axis is taken with `arg ω = π`.
pub fn halfplane_closure(a: f64, omega: C64) -> C64 {
    let arg = if omega.im <= 0.0 && omega.re < 0.0 {
        PI
    } else {
        omega.im.max(0.0).atan2(omega.re)
    };
    let l = C64::new(omega.norm().ln(), arg - FRAC_PI_2);
    omega * (a * l.ln()).exp()
}

/// `ζ'(ω) = (L^A + A L^{A−1})`, `L = log ω − iπ/2`.
pub fn halfplane_derivative(a: f64, omega: C64) -> C64 {
    let arg = if omega.im <= 0.0 && omega.re < 0.0 {
        PI
    } else {
        omega.im.max(0.0).atan2(omega.re)
    };
    let l = C64::new(omega.norm().ln(), arg - FRAC_PI_2);
    (a * l.ln()).exp() * (1.0 + a / l)
}

/// `e^z z^A` without domain checks.
pub fn strip_map(a: f64, z: C64) -> C64 {
    (z + a * z.ln()).exp()
}

/// `ζ'(z) = e^z z^A (1 + A/z)`.
pub fn strip_derivative(a: f64, z: C64) -> C64 {
    strip_map(a, z) * (1.0 + a / z)
}

/// Samples of the three boundary pieces of `Π_ς`: the two horizontal rays up to
/// [`BOUNDARY_SAMPLE_X`] and the vertical segment at `x = ς`.
fn strip_boundary_samples(varsigma: f64) -> impl Iterator<Item = C64> {
    const N_RAY: usize = 2000;
    const N_SEG: usize = 201;
    let span = (BOUNDARY_SAMPLE_X / varsigma).max(1.0).ln();
    let rays = (0..N_RAY).flat_map(move |i| {
        let x = varsigma * (span * i as f64 / (N_RAY - 1) as f64).exp();
        [C64::new(x, FRAC_PI_2), C64::new(x, -FRAC_PI_2)]
    });
    let seg = (0..N_SEG).map(move |j| C64::new(varsigma, -FRAC_PI_2 + PI * j as f64 / (N_SEG - 1) as f64));
    rays.chain(seg)
}

/// `(sup |A arg z|, sup |arg(1 + A/z)|)` over the sampled strip boundary.
pub fn strip_angle_sup(a: f64, varsigma: f64) -> (f64, f64) {
    strip_boundary_samples(varsigma).fold((0.0f64, 0.0f64), |(p, q), z| {
        (p.max((a * z.arg()).abs()), q.max((1.0 + a / z).arg().abs()))
    })
}

/// Least cutoff `ς = 2π + 0.25 j` (`j ≥ 1`) meeting the angle budget on the
/// strip boundary.
pub fn choose_varsigma(a: f64) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(invalid("exponent A must be finite and nonzero"));
    }
    let mut j = 1u32;
    loop {
        let s = 2.0 * PI + VARSIGMA_STEP * j as f64;
        if s > VARSIGMA_MAX {
            return Err(Error::SearchFailed(format!(
                "no cutoff up to {VARSIGMA_MAX} meets the π/40 budget for A = {a}"
            )));
        }
        // both sups are attained near x = ς; test the cheap bound first
        if (a * (FRAC_PI_2 / s).atan()).abs() < ANGLE_BUDGET {
            let (p, q) = strip_angle_sup(a, s);
            if p < ANGLE_BUDGET && q < ANGLE_BUDGET {
                return Ok(s);
            }
        }
        j += 1;
    }
}

/// A map together with its derivative.
pub trait ConformalMap: Sync {
    fn eval(&self, w: C64) -> C64;
    fn derivative(&self, w: C64) -> C64;
}

/// Half-plane form of [`LogPowerMap`], extended to the closed half-plane.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlaneMap(pub f64);

impl ConformalMap for HalfPlaneMap {
    fn eval(&self, w: C64) -> C64 {
        halfplane_closure(self.0, w)
    }
    fn derivative(&self, w: C64) -> C64 {
        halfplane_derivative(self.0, w)
    }
}

/// Strip form of [`LogPowerMap`].
#[derive(Debug, Clone, Copy)]
pub struct StripMap(pub f64);

impl ConformalMap for StripMap {
    fn eval(&self, z: C64) -> C64 {
        strip_map(self.0, z)
    }
    fn derivative(&self, z: C64) -> C64 {
        strip_derivative(self.0, z)
    }
}

/// `e^{c z}`.
#[derive(Debug, Clone, Copy)]
pub struct ExpMap(pub f64);

impl ConformalMap for ExpMap {
    fn eval(&self, z: C64) -> C64 {
        (self.0 * z).exp()
    }
    fn derivative(&self, z: C64) -> C64 {
        self.0 * (self.0 * z).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity;

impl ConformalMap for Identity {
    fn eval(&self, w: C64) -> C64 {
        w
    }
    fn derivative(&self, _w: C64) -> C64 {
        C64::new(1.0, 0.0)
    }
}

/// Region sampled by [`univalence_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `{r_min ≤ |ω| ≤ r_max, 0 ≤ arg ω ≤ π}`, sampled log-radially.
    HalfPlaneAnnulus { r_min: f64, r_max: f64 },
    /// `[x0, x1] × [y0, y1]`.
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Region {
    fn validate(&self) -> Result<()> {
        match *self {
            Region::HalfPlaneAnnulus { r_min, r_max } if r_min > 0.0 && r_max > r_min => Ok(()),
            Region::Rectangle { x0, x1, y0, y1 } if x1 > x0 && y1 > y0 => Ok(()),
            _ => Err(invalid("degenerate probe region")),
        }
    }

    /// Interior grid point `(i, j)` of an `n × n` cell-centred grid, with its
    /// local spacing.
    fn grid_point(&self, n: usize, i: usize, j: usize) -> (C64, f64) {
        let s = (i as f64 + 0.5) / n as f64;
        let t = (j as f64 + 0.5) / n as f64;
        match *self {
            Region::HalfPlaneAnnulus { r_min, r_max } => {
                let span = (r_max / r_min).ln();
                let rho = r_min * (span * s).exp();
                let theta = PI * t;
                let h = rho * (span / n as f64).min(PI / n as f64);
                (C64::from_polar(rho, theta), h)
            }
            Region::Rectangle { x0, x1, y0, y1 } => {
                let h = ((x1 - x0) / n as f64).min((y1 - y0) / n as f64);
                (C64::new(x0 + (x1 - x0) * s, y0 + (y1 - y0) * t), h)
            }
        }
    }

    /// Counterclockwise boundary as a list of parametrised pieces `[0, 1] → ℂ`.
    fn boundary_point(&self, piece: usize, s: f64) -> C64 {
        match *self {
            Region::HalfPlaneAnnulus { r_min, r_max } => {
                let span = (r_max / r_min).ln();
                match piece {
                    0 => C64::new(r_min * (span * s).exp(), 0.0),
                    1 => C64::from_polar(r_max, PI * s),
                    2 => C64::new(-r_max * (-span * s).exp(), 0.0),
                    _ => C64::from_polar(r_min, PI * (1.0 - s)),
                }
            }
            Region::Rectangle { x0, x1, y0, y1 } => match piece {
                0 => C64::new(x0 + (x1 - x0) * s, y0),
                1 => C64::new(x1, y0 + (y1 - y0) * s),
                2 => C64::new(x1 - (x1 - x0) * s, y1),
                _ => C64::new(x0, y1 - (y1 - y0) * s),
            },
        }
    }
}

/// A pair of grid points whose images are closer than the separation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision {
    pub w1: [f64; 2],
    pub w2: [f64; 2],
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub pass: bool,
    /// First colliding pairs (at most [`MAX_REPORTED_COLLISIONS`]).
    pub collisions: Vec<Collision>,
    pub collision_count: usize,
    /// Winding numbers of the boundary image about the probe images.
    pub winding: Vec<i64>,
    /// Smallest image distance between grid points found in neighbouring hash cells.
    pub min_separation: f64,
    /// Threshold `½ · min |ζ'| · h`.
    pub separation_bound: f64,
    pub n_grid: usize,
}

pub const MAX_REPORTED_COLLISIONS: usize = 16;
pub const WINDING_PROBES: usize = 20;

/// Accumulated change of `arg(f(γ(s)) − c)` along one boundary piece, with
/// a uniform seed partition bisected until each increment is below 0.5 rad.
fn winding_along<M: ConformalMap + ?Sized>(map: &M, region: &Region, piece: usize, c: C64) -> f64 {
    let f = |s: f64| map.eval(region.boundary_point(piece, s)) - c;
    const SEED: usize = 64;
    let mut total = 0.0;
    let mut stack: Vec<_> = (0..SEED)
        .rev()
        .map(|k| {
            let (s0, s1) = (k as f64 / SEED as f64, (k + 1) as f64 / SEED as f64);
            (s0, s1, f(s0), f(s1), 0u32)
        })
        .collect();
    while let Some((s0, s1, v0, v1, depth)) = stack.pop() {
        let d = (v1 / v0).arg();
        if d.abs() < 0.5 || depth >= 48 {
            total += d;
        } else {
            let sm = 0.5 * (s0 + s1);
            let vm = f(sm);
            stack.push((sm, s1, vm, v1, depth + 1));
            stack.push((s0, sm, v0, vm, depth + 1));
        }
    }
    total
}

/// Winding number of the image of the region boundary about `c`.
pub fn boundary_winding<M: ConformalMap + ?Sized>(map: &M, region: &Region, c: C64) -> i64 {
    let total: f64 = (0..4).map(|p| winding_along(map, region, p, c)).sum();
    (total / (2.0 * PI)).round() as i64
}

/// Grid collision test plus boundary winding diagnostic. Passing is evidence of
/// injectivity at the sampled resolution, not a proof.
pub fn univalence_probe<M: ConformalMap + ?Sized>(map: &M, region: &Region, n_grid: usize) -> Result<ProbeReport> {
    if n_grid < 32 {
        return Err(invalid("n_grid must be at least 32"));
    }
    region.validate()?;
    let n = n_grid;
    let samples: Vec<(C64, C64, f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (w, h) = region.grid_point(n, k / n, k % n);
            (w, map.eval(w), 0.5 * map.derivative(w).norm() * h)
        })
        .collect();
    let sep = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    if !(sep > 0.0 && sep.is_finite()) {
        return Err(Error::NonConvergence("degenerate derivative on the probe grid".into()));
    }

    let key = |z: C64| ((z.re / sep).floor() as i64, (z.im / sep).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::with_capacity(samples.len());
    for (idx, s) in samples.iter().enumerate() {
        grid.entry(key(s.1)).or_default().push(idx);
    }
    let mut collisions = Vec::new();
    let mut collision_count = 0;
    let mut min_separation = f64::INFINITY;
    for (idx, s) in samples.iter().enumerate() {
        let (gx, gy) = key(s.1);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(list) = grid.get(&(gx + dx, gy + dy)) else {
                    continue;
                };
                for &other in list {
                    if other <= idx {
                        continue;
                    }
                    let d = (samples[other].1 - s.1).norm();
                    min_separation = min_separation.min(d);
                    if d < sep {
                        collision_count += 1;
                        if collisions.len() < MAX_REPORTED_COLLISIONS {
                            let (a, b) = (s.0, samples[other].0);
                            collisions.push(Collision {
                                w1: [a.re, a.im],
                                w2: [b.re, b.im],
                                distance: d,
                            });
                        }
                    }
                }
            }
        }
    }

    // probes: interior grid points spread over the region
    let winding: Vec<i64> = (0..WINDING_PROBES)
        .into_par_iter()
        .map(|p| {
            let i = (p * 7 + 3) % 16;
            let j = (p * 5 + 1) % 16;
            let (w, _) = region.grid_point(18, i + 1, j + 1);
            boundary_winding(map, region, map.eval(w))
        })
        .collect();
    let pass = collision_count == 0 && winding.iter().all(|&k| k == 1);
    Ok(ProbeReport {
        pass,
        collisions,
        collision_count,
        winding,
        min_separation,
        separation_bound: sep,
        n_grid,
    })
}

impl ProbeReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Leading boundary argument `−πA / (2 log ρ)` of the image of the real axis at
/// modulus `ρ`.
pub fn boundary_angle_leading(a: f64, rho: f64) -> f64 {
    -PI * a / (2.0 * rho.ln())
}

/// Boundary argument at modulus `ρ` to second order:
/// `−πA/(2 log ρ) − πA² log log ρ / (2 log² ρ)`.
pub fn boundary_angle(a: f64, rho: f64) -> Result<f64> {
    let l = rho.ln();
    if !(l > 1.0) {
        return Err(invalid(format!("need log ρ > 1, got {l}")));
    }
    Ok(boundary_angle_leading(a, rho) - PI * a * a * l.ln() / (2.0 * l * l))
}

/// `arg ζ(t)` for the positive real `t` with `|ζ(t)| = ρ`, located by bisection
/// in `log t`.
pub fn probed_boundary_argument(a: f64, rho: f64) -> Result<f64> {
    let modulus = |lt: f64| halfplane_closure(a, C64::new(lt.exp(), 0.0)).norm().ln();
    let target = rho.ln();
    let (mut lo, mut hi) = (1.0, target + 10.0 + 2.0 * a.abs() * target.ln().max(1.0));
    if !(modulus(lo) < target && modulus(hi) > target) {
        return Err(Error::SearchFailed(format!("modulus {rho} not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if modulus(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(halfplane_closure(a, C64::new((0.5 * (lo + hi)).exp(), 0.0)).arg())
}

/// Spread of `arg ζ'` over the sub-strip `{ς < x ≤ 10⁶, y0 ≤ y ≤ y0 + height}`,
/// with the argument summed from its continuous parts `y + A arg z + arg(1 + A/z)`.
pub fn strip_derivative_spread(a: f64, varsigma: f64, y0: f64, height: f64, n: usize) -> f64 {
    let span = (BOUNDARY_SAMPLE_X / varsigma).ln();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let x = varsigma * (span * i as f64 / (n - 1) as f64).exp();
        for j in 0..n {
            let y = y0 + height * j as f64 / (n - 1) as f64;
            let z = C64::new(x, y);
            let arg = y + a * z.arg() + (1.0 + a / z).arg();
            lo = lo.min(arg);
            hi = hi.max(arg);
        }
    }
    hi - lo
}

/// `Re H(z)` for the quadratic `H(z) = (i/6) e^{−iα} z²`, i.e.
/// `−(1/6)|z|² sin(2ψ − α)`: `−|z|²/6` on the edge `ψ = α/2 + 9π/4` of `S`
/// and `+|z|²/6` on the far edge `ψ = α/2 + 3π/4` of `T`.
pub fn aux_quadratic_re(alpha: f64, z: C64) -> f64 {
    (C64::new(0.0, 1.0 / 6.0) * C64::from_polar(1.0, -alpha) * z * z).re
}

/// `F̃ = F − Re H`, positive with quadratic growth on both edges of `T` when α
/// is close to π.
pub fn tilde_f(cfg: &SectorFieldConfig, z: C64) -> Result<f64> {
    let f = SectorPotential::new(*cfg).eval(z)?;
    Ok(f - aux_quadratic_re(cfg.alpha(), z))
}

/// Angular range of the sector `S` where the log-quadratic part of `F` is negative.
pub fn sector_s(alpha: f64) -> (f64, f64) {
    (alpha / 2.0 + 7.0 * PI / 4.0, alpha / 2.0 + 9.0 * PI / 4.0)
}

/// Angular range of the sector `T` (modulo 2π) where it is positive.
pub fn sector_t(alpha: f64) -> (f64, f64) {
    (alpha / 2.0 + PI / 4.0, alpha / 2.0 + 3.0 * PI / 4.0)
}

/// Result of [`sector_s_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorBound {
    /// `min (−F)/|z|²` over the grid.
    pub c_est: f64,
    pub pass: bool,
    pub argmin_r: f64,
    pub argmin_psi: f64,
    /// `(c0 sin θ / 2π)(9π/4 + α/2) ≤ ½ sin²(9π/4 + α/2)|b1|`.
    pub theta_condition: bool,
    pub theta_lhs: f64,
    pub theta_rhs: f64,
    pub radii_per_decade: usize,
    pub n_angles: usize,
}

/// Grid resolution of [`sector_s_lower_bound`].
pub const SECTOR_GRID: usize = 512;

/// Lower bound estimate for `−F/|z|²` on `S` widened by the collars
/// `|ψ − edge| ≤ A/log r`, over `10 ≤ r ≤ r_max`.
pub fn sector_s_lower_bound(cfg: &SectorFieldConfig, a_margin: f64, r_max: f64) -> Result<SectorBound> {
    sector_s_lower_bound_with(cfg, a_margin, r_max, SECTOR_GRID, SECTOR_GRID)
}

pub fn sector_s_lower_bound_with(
    cfg: &SectorFieldConfig,
    a_margin: f64,
    r_max: f64,
    radii_per_decade: usize,
    n_angles: usize,
) -> Result<SectorBound> {
    let pot = SectorPotential::new(*cfg);
    let grid = SectorGrid::new(cfg, a_margin, r_max, radii_per_decade, n_angles)?;
    let best = grid.minimum(sector_s(cfg.alpha()), |z| -pot.eval(z).unwrap_or(f64::NAN));
    Ok(grid.report(cfg, best))
}

/// Same estimate for `F̃/|z|²` on the sector `T` and its collars, the side where
/// the weight is `e^{+2F}`, over `r_min ≤ r ≤ r_max`. The quadratic part of `F̃`
/// may be negative near the cut; the positive log-quadratic part takes over
/// only at large radii, so `r_min` is exposed here.
pub fn sector_t_lower_bound(cfg: &SectorFieldConfig, a_margin: f64, r_min: f64, r_max: f64) -> Result<SectorBound> {
    let mut grid = SectorGrid::new(cfg, a_margin, r_max, SECTOR_GRID, SECTOR_GRID)?;
    if !(r_min >= 10.0 && r_min < r_max) {
        return Err(invalid("need 10 ≤ r_min < r_max"));
    }
    grid.r_min = r_min;
    let best = grid.minimum(sector_t(cfg.alpha()), |z| tilde_f(cfg, z).unwrap_or(f64::NAN));
    Ok(grid.report(cfg, best))
}

struct SectorGrid {
    a_margin: f64,
    r_min: f64,
    r_max: f64,
    radii_per_decade: usize,
    n_angles: usize,
}

impl SectorGrid {
    fn new(
        cfg: &SectorFieldConfig,
        a_margin: f64,
        r_max: f64,
        radii_per_decade: usize,
        n_angles: usize,
    ) -> Result<Self> {
        if cfg.b1().abs() >= 0.5 {
            return Err(invalid(format!("need |b1| < 1/2, got {}", cfg.b1())));
        }
        if !(a_margin > 0.0) {
            return Err(invalid("collar constant must be positive"));
        }
        if !(r_max > 10.0) {
            return Err(invalid("r_max must exceed 10"));
        }
        if radii_per_decade < 2 || n_angles < 2 {
            return Err(invalid("grid needs at least 2 points per direction"));
        }
        Ok(Self {
            a_margin,
            r_min: 10.0,
            r_max,
            radii_per_decade,
            n_angles,
        })
    }

    /// `(min f(z)/|z|², r, ψ)` over the widened sector.
    fn minimum<F: Fn(C64) -> f64 + Sync>(&self, (lo, hi): (f64, f64), f: F) -> (f64, f64, f64) {
        let decades = (self.r_max / self.r_min).log10();
        let n_r = ((decades * self.radii_per_decade as f64).ceil() as usize).max(2);
        let n_a = self.n_angles;
        (0..n_r)
            .into_par_iter()
            .map(|i| {
                let r = self.r_min * (self.r_max / self.r_min).powf(i as f64 / (n_r - 1) as f64);
                let collar = self.a_margin / r.ln();
                let (p0, p1) = (lo - collar, hi + collar);
                let mut best = (f64::INFINITY, r, p0);
                for j in 0..n_a {
                    let psi = p0 + (p1 - p0) * j as f64 / (n_a - 1) as f64;
                    let v = f(C64::from_polar(r, psi)) / (r * r);
                    if v < best.0 {
                        best = (v, r, psi);
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::INFINITY, 0.0, 0.0), |b, x| if x.0 < b.0 { x } else { b })
    }

    fn report(&self, cfg: &SectorFieldConfig, best: (f64, f64, f64)) -> SectorBound {
        let alpha = cfg.alpha();
        let theta = PI - alpha;
        let edge = 9.0 * PI / 4.0 + alpha / 2.0;
        let theta_lhs = cfg.c0() * theta.sin() / (2.0 * PI) * edge;
        let theta_rhs = 0.5 * edge.sin().powi(2) * cfg.b1().abs();
        SectorBound {
            c_est: best.0,
            pass: best.0 > 0.0,
            argmin_r: best.1,
            argmin_psi: best.2,
            theta_condition: theta_lhs <= theta_rhs,
            theta_lhs,
            theta_rhs,
            radii_per_decade: self.radii_per_decade,
            n_angles: self.n_angles,
        }
    }
}
