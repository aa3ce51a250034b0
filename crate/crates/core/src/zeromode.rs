//! Candidate zero modes `u(z) = Φ_α(z) · exp(−¼(z e^{−iα/2})²) · P(z)` for the
//! sector field and the log of their weighted density `|u|² e^{−2F}`.
//!
//! The exponent of the Weierstrass product is tuned so that its
//! `|z|² log|z|` growth cancels the one of `−2F`; what is left is quadratic and
//! controlled by the Gaussian factor.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cells::generate_cells;
use crate::entire::EntireEvaluator;
use crate::error::{invalid, Result};
use crate::field::SectorFieldConfig;
use crate::potential::SectorPotential;
use crate::quad::LogDensity;
use crate::C64;

/// Derived construction parameters `(ε, κ, σ)` for a sector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateParams {
    pub alpha: f64,
    pub b1: f64,
    pub c0: f64,
    /// `√α`.
    pub eps: f64,
    /// `c0 sin α / (π sin 2ε)`.
    pub kappa: f64,
    /// `κ^{−1/2}`.
    pub sigma: f64,
}

impl CandidateParams {
    pub fn derive(cfg: &SectorFieldConfig) -> Result<Self> {
        let alpha = cfg.alpha();
        let eps = alpha.sqrt();
        if eps >= PI / 8.0 {
            return Err(invalid(format!("√α = {eps} must be below π/8")));
        }
        let kappa = cfg.c0() * alpha.sin() / (PI * (2.0 * eps).sin());
        Ok(Self {
            alpha,
            b1: cfg.b1(),
            c0: cfg.c0(),
            eps,
            kappa,
            sigma: kappa.powf(-0.5),
        })
    }
}

/// `log|P(z)|` for `P(z) = Σ c_k z^k`; `−∞` at zeros.
pub fn log_abs_poly(coeffs: &[C64], z: C64) -> f64 {
    let p = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    p.norm().ln()
}

/// `−½ Re((z e^{−iα/2})²)`, the log of `|exp(−¼(z e^{−iα/2})²)|²`.
pub fn gaussian_log_factor(alpha: f64, z: C64) -> f64 {
    let w = z * C64::from_polar(1.0, -0.5 * alpha);
    -0.5 * (w * w).re
}

/// Candidate mode with its lattice evaluator.
#[derive(Debug, Clone)]
pub struct CandidateMode {
    params: CandidateParams,
    poly: Vec<C64>,
    potential: SectorPotential,
    evaluator: EntireEvaluator,
}

/// Builds the candidate for `P(z) = Σ poly_coeffs[k] z^k`, with the lattice
/// truncated at `r_cut`.
pub fn build_candidate(cfg: SectorFieldConfig, poly_coeffs: &[C64], r_cut: f64) -> Result<CandidateMode> {
    if poly_coeffs.is_empty() || poly_coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(invalid("polynomial factor must be nonzero"));
    }
    let params = CandidateParams::derive(&cfg)?;
    let cells = generate_cells(params.eps, params.sigma, r_cut)?;
    let evaluator = EntireEvaluator::new(cells, params.kappa)?;
    Ok(CandidateMode {
        params,
        poly: poly_coeffs.to_vec(),
        potential: SectorPotential::new(cfg),
        evaluator,
    })
}

impl CandidateMode {
    pub fn params(&self) -> &CandidateParams {
        &self.params
    }

    pub fn poly(&self) -> &[C64] {
        &self.poly
    }

    pub fn potential(&self) -> &SectorPotential {
        &self.potential
    }

    pub fn evaluator(&self) -> &EntireEvaluator {
        &self.evaluator
    }

    pub fn gaussian_log_factor(&self, z: C64) -> f64 {
        gaussian_log_factor(self.params.alpha, z)
    }

    /// `log|Φ_α(z)|`.
    pub fn log_phi(&self, z: C64) -> Result<f64> {
        self.evaluator.eval_log_phi_alpha(self.params.alpha, z)
    }

    /// `log|u(z)|`, harmonic away from zeros.
    pub fn log_abs_u(&self, z: C64) -> Result<f64> {
        Ok(self.log_phi(z)? + 0.5 * self.gaussian_log_factor(z) + log_abs_poly(&self.poly, z))
    }

    /// `log(|u|² e^{−2F}) = −2F + 2 log|Φ_α| − ½ Re((z e^{−iα/2})²) + 2 log|P|`.
    pub fn log_weighted_density(&self, z: C64) -> Result<f64> {
        let f = self.potential.eval(z)?;
        Ok(-2.0 * f + 2.0 * self.log_abs_u(z)?)
    }

    pub fn summary(&self) -> CandidateSummary {
        CandidateSummary {
            params: self.params,
            poly: self.poly.iter().map(|c| [c.re, c.im]).collect(),
            r_cut: self.evaluator.cells().r_cut,
            cell_count: self.evaluator.cells().len(),
            omitted_radius: self.evaluator.omitted_radius(),
        }
    }
}

impl LogDensity for CandidateMode {
    fn log_density(&self, z: C64) -> f64 {
        self.log_weighted_density(z).unwrap_or(f64::NAN)
    }
}

/// JSON echo of a candidate's derived parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub params: CandidateParams,
    pub poly: Vec<[f64; 2]>,
    pub r_cut: f64,
    pub cell_count: usize,
    pub omitted_radius: f64,
}

/// `G·P` without the Weierstrass factor, weighted by `e^{−2F}`. Defined for any
/// sector angle; the log-quadratic growth of `F` is left uncompensated.
#[derive(Debug, Clone)]
pub struct GaussianCandidate {
    pub potential: SectorPotential,
    pub poly: Vec<C64>,
}

impl LogDensity for GaussianCandidate {
    fn log_density(&self, z: C64) -> f64 {
        let alpha = self.potential.config().alpha();
        match self.potential.eval(z) {
            Ok(f) => -2.0 * f + gaussian_log_factor(alpha, z) + 2.0 * log_abs_poly(&self.poly, z),
            Err(_) => f64::NAN,
        }
    }
}

/// Probe `e^{−z²/8} z^k` under the weight `e^{2·sign·F}`.
#[derive(Debug, Clone)]
pub struct ProbeDensity {
    pub potential: SectorPotential,
    pub k: u32,
    /// `+1` for `e^{2F}`, `−1` for `e^{−2F}`.
    pub sign: f64,
}

impl LogDensity for ProbeDensity {
    fn log_density(&self, z: C64) -> f64 {
        match self.potential.eval(z) {
            Ok(f) => 2.0 * self.sign * f - 0.25 * (z * z).re + 2.0 * self.k as f64 * z.norm().ln(),
            Err(_) => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_parameters() {
        let p = CandidateParams::derive(&SectorFieldConfig::new(0.04, -0.1).unwrap()).unwrap();
        assert!((p.eps - 0.2).abs() < 1e-15);
        let oracle = 1.1 * (0.04f64).sin() / (PI * (0.4f64).sin());
        assert!((p.kappa - oracle).abs() < 1e-15);
        assert!((p.kappa - 0.035956).abs() < 1e-6);
        assert!((p.sigma - 5.27369).abs() < 1e-5);
        assert!((p.sigma * p.kappa.sqrt() - 1.0).abs() < 1e-15);
        // κ is linear in c0
        let q = CandidateParams::derive(&SectorFieldConfig::new(0.04, -1e-300).unwrap()).unwrap();
        assert!((p.kappa / q.kappa - 1.1).abs() < 1e-14);
        assert!(CandidateParams::derive(&SectorFieldConfig::new(1.0, -0.1).unwrap()).is_err());
    }

    #[test]
    fn gaussian_factor_examples() {
        let a = 0.3;
        let r = 3.0;
        assert!((gaussian_log_factor(a, C64::from_polar(r, a / 2.0)) + 4.5).abs() < 1e-12);
        assert!(gaussian_log_factor(a, C64::from_polar(r, a / 2.0 + PI / 4.0)).abs() < 1e-12);
        assert!((gaussian_log_factor(a, C64::from_polar(r, a / 2.0 + PI / 2.0)) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn density_sentinel_at_zero_of_p() {
        let cfg = SectorFieldConfig::new(0.05, -0.01).unwrap();
        let m = build_candidate(cfg, &[C64::new(-2.0, 0.0), C64::new(1.0, 0.0)], 100.0).unwrap();
        assert_eq!(m.log_weighted_density(C64::new(2.0, 0.0)).unwrap(), f64::NEG_INFINITY);
        assert!(build_candidate(cfg, &[], 100.0).is_err());
    }

    #[test]
    fn density_decreases_along_the_gaussian_ray() {
        let cfg = SectorFieldConfig::new(0.05, -0.01).unwrap();
        let m = build_candidate(cfg, &[C64::new(1.0, 0.0)], 2000.0).unwrap();
        let psi = 0.025;
        let vals: Vec<f64> = (1..=20)
            .map(|i| m.log_weighted_density(C64::from_polar(10.0 * i as f64, psi)).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn log_u_has_the_mean_value_property() {
        let cfg = SectorFieldConfig::new(0.05, -0.01).unwrap();
        let m = build_candidate(cfg, &[C64::new(0.5, 0.0), C64::new(1.0, 0.0)], 300.0).unwrap();
        for centre in [C64::new(3.0, 7.0), C64::new(-6.0, 1.0), C64::new(2.0, -9.0)] {
            let n = 256;
            let rho = 0.5;
            let mean = (0..n)
                .map(|j| {
                    m.log_abs_u(centre + C64::from_polar(rho, 2.0 * PI * j as f64 / n as f64))
                        .unwrap()
                })
                .sum::<f64>()
                / n as f64;
            let at = m.log_abs_u(centre).unwrap();
            assert!((mean - at).abs() < 1e-6, "{mean} vs {at}");
        }
    }

    #[test]
    fn probe_and_gaussian_candidates_evaluate() {
        let pot = SectorPotential::new(SectorFieldConfig::new(3.0, -0.3).unwrap());
        let p = ProbeDensity {
            potential: pot,
            k: 1,
            sign: -1.0,
        };
        let z = C64::new(3.0, 4.0);
        let expect = -2.0 * pot.eval(z).unwrap() - 0.25 * (z * z).re + 2.0 * 5f64.ln();
        assert!((p.log_density(z) - expect).abs() < 1e-12);
        let g = GaussianCandidate {
            potential: pot,
            poly: vec![C64::new(1.0, 0.0)],
        };
        assert!(g.log_density(z).is_finite());
        assert!(g.log_density(C64::new(0.0, 0.0)).is_nan());
    }
}
