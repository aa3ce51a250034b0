//! Solutions of the Poisson equation `ΔF = B`.
//!
//! For the sector field the solution is explicit:
//!
//! ```text
//! F(z) = φ(z) − (c0 sin α / 2π) · Re((z e^{−iα/2})² log z),
//! φ(z) = b1·x2² on the negative sector, x2² elsewhere,
//! ```
//!
//! with `log z` continuous off the ray `L_α = {arg z = α}`, i.e. `arg z ∈ [α, α + 2π)`.
//! For homogeneous non-resonant fields `F = β0 (s+2)^{-2} r^{s+2} + φ̃(ψ) r^{s+2}` where
//! `φ̃'' + (s+2)² φ̃ = b − β0` is solved mode by mode.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{FourierProfile, HomogeneousFieldConfig, SectorFieldConfig};
use crate::numeric::arg_0_2pi;
use crate::C64;

/// Which side of the cut `L_α` a point exactly on the cut is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `arg z = α`, approached from the positive-field region.
    Outer,
    /// `arg z = α + 2π`, approached from the negative-field sector.
    Inner,
}

/// Explicit potential of the sector field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPotential {
    cfg: SectorFieldConfig,
}

impl SectorPotential {
    pub fn new(cfg: SectorFieldConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &SectorFieldConfig {
        &self.cfg
    }

    /// `c0 sin α / 2π`, the amplitude of the power-logarithmic term.
    pub fn log_amplitude(&self) -> f64 {
        self.cfg.c0() * self.cfg.alpha().sin() / (2.0 * PI)
    }

    /// Polar angle in the branch `[α, α + 2π)`.
    pub fn branch_angle(&self, z: C64) -> f64 {
        let a = arg_0_2pi(z);
        let alpha = self.cfg.alpha();
        if a < alpha {
            a + 2.0 * PI
        } else {
            a
        }
    }

    fn angle_on_side(&self, z: C64, side: Option<Side>) -> f64 {
        let psi = self.branch_angle(z);
        let alpha = self.cfg.alpha();
        match side {
            Some(Side::Inner) if psi == alpha => alpha + 2.0 * PI,
            _ => psi,
        }
    }

    /// Quadratic level multiplying `x2²` for a point at branch angle `psi`.
    fn phi_level(&self, psi: f64) -> f64 {
        // negative sector is (2π, α + 2π) in this branch
        if psi > 2.0 * PI {
            self.cfg.b1()
        } else {
            1.0
        }
    }

    fn eval_at(&self, z: C64, psi: f64) -> f64 {
        let alpha = self.cfg.alpha();
        let r = z.norm();
        let theta = 2.0 * psi - alpha;
        let log_part = r * r * (r.ln() * theta.cos() - psi * theta.sin());
        self.phi_level(psi) * z.im * z.im - self.log_amplitude() * log_part
    }

    fn grad_at(&self, z: C64, psi: f64) -> [f64; 2] {
        // g(z) = e^{-iα} z² log z, ∇ Re g = (Re g', −Im g')
        let alpha = self.cfg.alpha();
        let log_z = C64::new(z.norm().ln(), psi);
        let dg = C64::from_polar(1.0, -alpha) * (2.0 * z * log_z + z);
        let k = self.log_amplitude();
        [-k * dg.re, 2.0 * self.phi_level(psi) * z.im + k * dg.im]
    }

    /// `F(z)`.
    pub fn eval(&self, z: C64) -> Result<f64> {
        if z.norm() == 0.0 {
            return Err(Error::Origin);
        }
        Ok(self.eval_at(z, self.branch_angle(z)))
    }

    /// `F(z)` with an explicit side attribution for points on `L_α`.
    pub fn eval_on_side(&self, z: C64, side: Side) -> Result<f64> {
        if z.norm() == 0.0 {
            return Err(Error::Origin);
        }
        Ok(self.eval_at(z, self.angle_on_side(z, Some(side))))
    }

    /// Analytic gradient `(∂F/∂x1, ∂F/∂x2)`.
    pub fn grad(&self, z: C64) -> Result<[f64; 2]> {
        if z.norm() == 0.0 {
            return Err(Error::Origin);
        }
        Ok(self.grad_at(z, self.branch_angle(z)))
    }

    pub fn grad_on_side(&self, z: C64, side: Side) -> Result<[f64; 2]> {
        if z.norm() == 0.0 {
            return Err(Error::Origin);
        }
        Ok(self.grad_at(z, self.angle_on_side(z, Some(side))))
    }

    /// Coefficient `C(ψ)` of `|z|² log|z|` in `F` along direction `ψ`.
    pub fn log_growth_coefficient(&self, psi: f64) -> f64 {
        -self.log_amplitude() * (2.0 * psi - self.cfg.alpha()).cos()
    }

    /// Directions in `[α, α + 2π)` where `C(ψ)` vanishes: `α/2 + π/4 + kπ/2`.
    pub fn zero_growth_directions(&self) -> [f64; 4] {
        let alpha = self.cfg.alpha();
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut psi = alpha / 2.0 + PI / 4.0 + k as f64 * PI / 2.0;
            while psi < alpha {
                psi += 2.0 * PI;
            }
            while psi >= alpha + 2.0 * PI {
                psi -= 2.0 * PI;
            }
            *slot = psi;
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Five-point finite-difference Laplacian of `F`.
    ///
    /// Fails when a stencil point lies within `h` of the cut `L_α` (where the
    /// branch of `log z` jumps) or of the field interface `arg z = 0`, or when the
    /// stencil reaches the origin.
    pub fn laplacian_fd(&self, z: C64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(invalid("finite-difference step must be positive"));
        }
        let stencil = [
            z,
            z + C64::new(h, 0.0),
            z - C64::new(h, 0.0),
            z + C64::new(0.0, h),
            z - C64::new(0.0, h),
        ];
        if z.norm() <= 2.0 * h {
            return Err(Error::Origin);
        }
        let alpha = self.cfg.alpha();
        for p in stencil {
            if distance_to_ray(p, alpha) <= h {
                return Err(Error::StencilCrossesCut(z));
            }
            if distance_to_ray(p, 0.0) <= h {
                return Err(Error::StencilCrossesInterface(z));
            }
        }
        let f: Vec<f64> = stencil.iter().map(|&p| self.eval_at(p, self.branch_angle(p))).collect();
        Ok((f[1] + f[2] + f[3] + f[4] - 4.0 * f[0]) / (h * h))
    }
}

/// Euclidean distance from `p` to the closed ray `{t e^{iθ} : t ≥ 0}`.
pub fn distance_to_ray(p: C64, theta: f64) -> f64 {
    let q = p * C64::from_polar(1.0, -theta);
    if q.re <= 0.0 {
        q.norm()
    } else {
        q.im.abs()
    }
}

/// Magnitude below which a resonant mode counts as absent.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Mode-wise solution of `φ'' + (s+2)² φ = b − β0` on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleODESolution {
    s: f64,
    beta0: f64,
    phi: FourierProfile,
    residual_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct CircleODEDoc {
    s: f64,
    beta0: f64,
    phi: Vec<(i64, f64, f64)>,
    residual: f64,
}

impl CircleODESolution {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Fourier coefficients of the oscillating part `φ̃`.
    pub fn phi(&self) -> &FourierProfile {
        &self.phi
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    /// Radial coefficient of the mean part, `β0 / (s+2)²`.
    pub fn mean_level(&self) -> f64 {
        self.beta0 / (self.s + 2.0).powi(2)
    }

    /// `F(z) = (β0 (s+2)^{-2} + φ̃(arg z)) |z|^{s+2}`.
    pub fn eval(&self, z: C64) -> f64 {
        let r = z.norm();
        if r == 0.0 {
            return 0.0;
        }
        let psi = z.im.atan2(z.re);
        (self.mean_level() + self.phi.eval(psi)) * r.powf(self.s + 2.0)
    }

    /// Angular profile `F / r^{s+2}` at `psi`.
    pub fn angular(&self, psi: f64) -> f64 {
        self.mean_level() + self.phi.eval(psi)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CircleODEDoc {
            s: self.s,
            beta0: self.beta0,
            phi: self.phi.to_triples(),
            residual: self.residual_norm,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircleODEDoc = serde_json::from_str(text)?;
        Ok(Self {
            s: doc.s,
            beta0: doc.beta0,
            phi: FourierProfile::from_triples(&doc.phi)?,
            residual_norm: doc.residual,
        })
    }
}

/// `Some(m)` when `s + 2` is (within 1e-12) the integer `m`.
fn resonant_mode(s: f64) -> Option<i64> {
    let m = s + 2.0;
    let r = m.round();
    ((m - r).abs() < 1e-12).then_some(r as i64)
}

/// Solves the circle ODE for a homogeneous profile.
pub fn solve_circle_ode(cfg: &HomogeneousFieldConfig) -> Result<CircleODESolution> {
    let s = cfg.s();
    let m = s + 2.0;
    let resonant = resonant_mode(s);
    if let Some(mr) = resonant {
        for mode in [mr, -mr] {
            let c = cfg.profile().coefficient(mode);
            if c.norm() > RESONANCE_TOL {
                return Err(Error::Resonance {
                    mode,
                    magnitude: c.norm(),
                });
            }
        }
    }
    let phi = cfg.profile().map_modes(|n, c| {
        if n == 0 || resonant.is_some_and(|mr| n.abs() == mr) {
            C64::new(0.0, 0.0)
        } else {
            c / (m * m - (n * n) as f64)
        }
    });

    // residual of φ'' + m² φ − b̃ on an aliasing-free grid
    let n_grid = (4 * cfg.profile().max_mode() as usize + 16).max(1024);
    let mut acc = 0.0;
    for j in 0..n_grid {
        let psi = 2.0 * PI * j as f64 / n_grid as f64;
        let lhs = phi.derivative(psi, 2) + m * m * phi.eval(psi);
        let rhs = cfg.profile().eval(psi) - cfg.beta0();
        acc += (lhs - rhs).powi(2);
    }
    let residual_norm = (acc * 2.0 * PI / n_grid as f64).sqrt();

    Ok(CircleODESolution {
        s,
        beta0: cfg.beta0(),
        phi,
        residual_norm,
    })
}

/// Outcome of [`sign_definite_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignDefiniteReport {
    pub sign_definite: bool,
    /// `|β0|(s+2)^{-2} − sup|φ̃|` with the certified sup bound.
    pub margin: f64,
    /// Largest `|φ̃|` on the angular grid.
    pub sup_grid: f64,
    /// Grid maximum plus the Lipschitz tail between grid points.
    pub sup_bound: f64,
    pub grid_points: usize,
}

/// Angular grid used by [`sign_definite_check`].
pub const SIGN_CHECK_GRID: usize = 4096;

/// Whether the oscillating part is dominated by the mean part, making `F`
/// sign-definite with `|F| ≥ margin · r^{s+2}`.
pub fn sign_definite_check(sol: &CircleODESolution) -> Result<SignDefiniteReport> {
    if sol.beta0() == 0.0 {
        return Err(Error::ZeroMean);
    }
    let n = SIGN_CHECK_GRID;
    let sup_grid = (0..n)
        .map(|j| sol.phi().eval(2.0 * PI * j as f64 / n as f64).abs())
        .fold(0.0, f64::max);
    // between grid points |φ̃(ψ) − φ̃(ψ_j)| ≤ sup|φ̃'| · π/n ≤ Σ|n||c_n| · π/n
    let sup_bound = sup_grid + sol.phi().weighted_l1(1) * PI / n as f64;
    let margin = sol.mean_level().abs() - sup_bound;
    Ok(SignDefiniteReport {
        sign_definite: margin > 0.0,
        margin,
        sup_grid,
        sup_bound,
        grid_points: n,
    })
}

/// Number of Fourier modes kept when sampling [`ExampleProfile`].
pub const EXAMPLE_PROFILE_MODES: usize = 512;

/// Smooth two-arc potential profile `f(ψ)`: `β+` on an arc centred at 0,
/// `β−` on an arc centred at π, joined by quintic smoothsteps.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleProfile {
    pub s: f64,
    pub eps: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// `π / (s + 2 − eps)`.
    pub arc_length: f64,
    /// Set when the arc length is not below π/2.
    pub exceeds_quarter_turn: bool,
    pub fourier: FourierProfile,
}

/// Quintic smoothstep: `C²` with zero first and second derivatives at 0 and 1.
fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

pub fn build_example_profile(s: f64, eps: f64, beta_plus: f64, beta_minus: f64) -> Result<ExampleProfile> {
    if !(s > -1.0 && s <= 0.0) {
        return Err(invalid(format!("degree must lie in (-1, 0], got {s}")));
    }
    if !(eps > 0.0 && eps < (1.0 + s) / 4.0) {
        return Err(invalid(format!("margin must lie in (0, (1+s)/4), got {eps}")));
    }
    if !(beta_plus > 0.0 && beta_minus < 0.0) {
        return Err(invalid("need beta_plus > 0 > beta_minus"));
    }
    let arc_length = PI / (s + 2.0 - eps);
    if arc_length >= PI {
        return Err(invalid(format!("arcs of length {arc_length} overlap")));
    }
    let mut profile = ExampleProfile {
        s,
        eps,
        beta_plus,
        beta_minus,
        arc_length,
        exceeds_quarter_turn: arc_length >= PI / 2.0,
        fourier: FourierProfile::default(),
    };
    profile.fourier = profile.sample_fourier(EXAMPLE_PROFILE_MODES);
    Ok(profile)
}

impl ExampleProfile {
    /// Exact piecewise value.
    pub fn eval(&self, psi: f64) -> f64 {
        let half = 0.5 * self.arc_length;
        let gap = PI - self.arc_length;
        // shift so that I+ = [0, L), transition, I- = [π, π + L), transition
        let t = (psi + half).rem_euclid(2.0 * PI);
        if t < self.arc_length {
            self.beta_plus
        } else if t < self.arc_length + gap {
            let u = (t - self.arc_length) / gap;
            self.beta_plus + (self.beta_minus - self.beta_plus) * smoothstep5(u)
        } else if t < PI + self.arc_length {
            self.beta_minus
        } else {
            let u = (t - PI - self.arc_length) / gap;
            self.beta_minus + (self.beta_plus - self.beta_minus) * smoothstep5(u)
        }
    }

    /// Arc endpoints in `[-π, 2π)`: `[I+ start, I+ end, I- start, I- end]`.
    pub fn arc_endpoints(&self) -> [f64; 4] {
        let half = 0.5 * self.arc_length;
        [-half, half, PI - half, PI + half]
    }

    fn sample_fourier(&self, modes: usize) -> FourierProfile {
        let n = 4 * modes;
        let mut buf: Vec<rustfft::num_complex::Complex<f64>> = (0..n)
            .map(|j| rustfft::num_complex::Complex::new(self.eval(2.0 * PI * j as f64 / n as f64), 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let positive = (1..=modes).map(|k| (k as i64, C64::new(buf[k].re * scale, buf[k].im * scale)));
        FourierProfile::from_nonnegative(buf[0].re * scale, positive).expect("positive mode indices are valid")
    }

    /// Field profile implied by `F = f(ψ) r^{s+2}`: `b = f'' + (s+2)² f`.
    pub fn implied_field(&self) -> Result<HomogeneousFieldConfig> {
        let m2 = (self.s + 2.0).powi(2);
        let b = self.fourier.map_modes(|n, c| c * (m2 - (n * n) as f64));
        HomogeneousFieldConfig::new(self.s, b)
    }
}
