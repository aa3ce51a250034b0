//! The subharmonic lattice sum
//!
//! ```text
//! V_ε(z) = Re σ² Σ_Q [log(1 − z²/a_Q²) + z²/a_Q²]
//! ```
//!
//! over the marked points of a [`CellSet`], the log-modulus of the matching
//! Weierstrass product, and the continuum model `W_ε(z) = ∫ v(z e^{−iθ}) dθ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::cells::{validate_cells, CellSet};
use crate::error::{invalid, Error, Result};
use crate::numeric::{adaptive_gauss_legendre, neumaier_sum, re_log1m_plus, tree_reduce, PAIRWISE_BLOCK};
use crate::C64;

/// Points closer than this (relative to `|a_Q|`) to a zero count as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Lattice sum evaluator. Immutable; evaluations are pure.
#[derive(Debug, Clone)]
pub struct EntireEvaluator {
    cells: CellSet,
    kappa: f64,
    marks: Vec<C64>,
    inv_a2: Vec<C64>,
    omitted_radius: f64,
}

/// `V_ε(z)` with a bound on the omitted lattice tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Tail bound exceeds 1% of `|V|`.
    pub tail_dominates: bool,
}

impl EntireEvaluator {
    /// Wraps a validated cell set; `kappa` is the exponent relating `log|Φ|` to `V_ε`.
    pub fn new(cells: CellSet, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa must be positive, got {kappa}")));
        }
        let report = validate_cells(&cells);
        if !report.passed {
            return Err(invalid(format!(
                "cell set fails validation: {}",
                report.failures.join("; ")
            )));
        }
        let marks: Vec<C64> = cells.marked_points().collect();
        let inv_a2 = marks.iter().map(|a| (a * a).inv()).collect();

        // every omitted piece starts right of the last kept cut of its strip, or
        // belongs to a strip whose first piece already overshoots r_cut
        let mut last_cut: std::collections::HashMap<i64, f64> = Default::default();
        for c in &cells.cells {
            let hi = c.x_range().1;
            let e = last_cut.entry(c.strip_index).or_insert(hi);
            *e = e.max(hi);
        }
        let reach = 2.0 * cells.sigma / cells.eps.sqrt();
        let omitted_radius = last_cut.values().copied().fold(cells.r_cut - reach, f64::min).max(1.0);

        Ok(Self {
            cells,
            kappa,
            marks,
            inv_a2,
            omitted_radius,
        })
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma(&self) -> f64 {
        self.cells.sigma
    }

    pub fn eps(&self) -> f64 {
        self.cells.eps
    }

    /// Lower bound on `|a_Q|` over the cells not included in the sum.
    pub fn omitted_radius(&self) -> f64 {
        self.omitted_radius
    }

    /// Bound on `|σ² Σ_{omitted} Re[…]|`, from `|log(1−u)+u| ≤ |u|²/(2(1−|u|))`
    /// integrated over the sector beyond the omitted radius, doubled for safety.
    pub fn tail_bound(&self, z: C64) -> f64 {
        let q2 = z.norm_sqr();
        let r2 = self.omitted_radius * self.omitted_radius;
        if q2 >= r2 {
            return f64::INFINITY;
        }
        if q2 == 0.0 {
            return 0.0;
        }
        self.cells.eps * q2 * (r2 / (r2 - q2)).ln()
    }

    /// Nearest zero `±a_Q` to `z`.
    pub fn nearest_zero(&self, z: C64) -> Option<C64> {
        self.marks
            .iter()
            .flat_map(|&a| [a, -a])
            .min_by(|a, b| (a - z).norm_sqr().total_cmp(&(b - z).norm_sqr()))
    }

    /// `V_ε(z)`, summed in the fixed cell order with compensated blocks and a
    /// fixed reduction tree, so the result does not depend on thread count.
    pub fn eval_v(&self, z: C64) -> Result<VValue> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid("non-finite argument"));
        }
        let z2 = z * z;
        let partial: Vec<(f64, f64)> = self
            .inv_a2
            .par_chunks(PAIRWISE_BLOCK)
            .map(|chunk| {
                let mut buf = [0.0; PAIRWISE_BLOCK];
                let mut closest = f64::INFINITY;
                for (slot, &ia) in buf.iter_mut().zip(chunk) {
                    let u = z2 * ia;
                    closest = closest.min((C64::new(1.0, 0.0) - u).norm_sqr());
                    *slot = re_log1m_plus(u);
                }
                (neumaier_sum(&buf[..chunk.len()]), closest)
            })
            .collect();
        // |1 − z²/a²| ≈ 2|z ∓ a|/|a| near a zero
        let closest = partial.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        if closest.sqrt() < 2.0 * SINGULAR_TOL {
            let at = self.nearest_zero(z).unwrap_or_default();
            return Err(Error::Singular { z, at });
        }
        let sums: Vec<f64> = partial.iter().map(|p| p.0).collect();
        let value = self.cells.sigma.powi(2) * tree_reduce(&sums);
        let tail_bound = self.tail_bound(z);
        Ok(VValue {
            value,
            tail_bound,
            tail_dominates: tail_bound > 0.01 * value.abs(),
        })
    }

    /// `log|Φ_α(z)| = (κ/2)·V_ε(z e^{−i(α+π)/2})`; `−∞` at a zero of `Φ_α`.
    pub fn eval_log_phi_alpha(&self, alpha: f64, z: C64) -> Result<f64> {
        match self.eval_v(rotate_for_alpha(alpha, z)) {
            Ok(v) => Ok(0.5 * self.kappa * v.value),
            Err(Error::Singular { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    }

    /// Difference `V_ε − Re W_ε` with the normalised bound budget
    /// `ε|z|² + |log σ|/ε + σ|z|`.
    ///
    /// Without `near_lattice`, points within σ/4 of a zero are rejected. With it,
    /// the logarithm of the nearest zero factor is removed from `V_ε` first.
    pub fn compare_v_w(&self, z: C64, near_lattice: bool) -> Result<VWComparison> {
        let sigma = self.cells.sigma;
        let eps = self.cells.eps;
        let nearest = self.nearest_zero(z);
        let mut subtracted = None;
        if let Some(a) = nearest {
            if (z - a).norm() <= 0.25 * sigma {
                if !near_lattice {
                    return Err(Error::ExcludedDisk { z, at: a });
                }
                subtracted = Some(a);
            }
        }
        let v = self.eval_v(z)?;
        let mut v_value = v.value;
        if let Some(a) = subtracted {
            v_value -= sigma * sigma * (C64::new(1.0, 0.0) - z / a).norm().ln();
        }
        let w = eval_w(eps, z)?;
        let diff = v_value - w.re;
        let r = z.norm();
        let budget = eps * r * r + sigma.ln().abs() / eps + sigma * r;
        Ok(VWComparison {
            z_re: z.re,
            z_im: z.im,
            v: v_value,
            re_w: w.re,
            diff,
            budget,
            ratio: diff.abs() / budget,
            tail_bound: v.tail_bound,
            subtracted_zero: subtracted.map(|a| [a.re, a.im]),
        })
    }
}

/// `z e^{−i(α+π)/2}`, the argument at which `Φ_α` samples `Φ`.
pub fn rotate_for_alpha(alpha: f64, z: C64) -> C64 {
    z * C64::from_polar(1.0, -0.5 * (alpha + PI))
}

/// One row of the `V` versus `W` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VWComparison {
    pub z_re: f64,
    pub z_im: f64,
    pub v: f64,
    pub re_w: f64,
    pub diff: f64,
    pub budget: f64,
    pub ratio: f64,
    pub tail_bound: f64,
    pub subtracted_zero: Option<[f64; 2]>,
}

impl VWComparison {
    pub const CSV_HEADER: &'static str = "z_re,z_im,V,ReW,diff,budget,tail_bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.z_re, self.z_im, self.v, self.re_w, self.diff, self.budget, self.tail_bound
        )
    }
}

/// `v(ζ) = ((ζ²−1)/2)·log(1−ζ²) − ζ²/2` with the principal logarithm, which is
/// the analytic continuation from the unit disk into each open half-plane.
pub fn eval_v_closed(zeta: C64) -> Result<C64> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(invalid("non-finite argument"));
    }
    if zeta.im == 0.0 && zeta.re.abs() >= 1.0 {
        return Err(Error::BranchCut(zeta));
    }
    let w = zeta * zeta;
    if w.norm() < 0.25 {
        // −Σ_{n≥2} wⁿ / (2n(n−1)), avoids cancellation near 0
        let mut sum = C64::new(0.0, 0.0);
        let mut pw = w;
        for n in 2..80u32 {
            pw *= w;
            let term = pw / (2.0 * (n * (n - 1)) as f64);
            sum -= term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        return Ok(sum);
    }
    let one = C64::new(1.0, 0.0);
    Ok(0.5 * (w - one) * (one - w).ln() - 0.5 * w)
}

/// `W_ε(z) = ∫_{−ε}^{ε} v(z e^{−iθ}) dθ`, adaptive Gauss–Legendre to 1e-10.
///
/// Where the path meets the real axis outside the unit disk the integrand jumps
/// between its two half-plane branches; the interval is split there so each
/// piece is smooth.
pub fn eval_w(eps: f64, z: C64) -> Result<C64> {
    if !(eps > 0.0 && eps < PI / 2.0) {
        return Err(invalid(format!("eps must lie in (0, π/2), got {eps}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(invalid("non-finite argument"));
    }
    if z.norm() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let phi = z.im.atan2(z.re);
    let mut breaks = vec![-eps, eps];
    if z.norm() >= 1.0 {
        for j in -2..=2 {
            let theta = phi - j as f64 * PI;
            if theta > -eps && theta < eps {
                breaks.push(theta);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let f = |theta: f64| {
        let zeta = z * C64::from_polar(1.0, -theta);
        // nodes are interior, so ζ is never exactly real; guard rounding anyway
        let zeta = if zeta.im == 0.0 {
            C64::new(zeta.re, f64::MIN_POSITIVE)
        } else {
            zeta
        };
        eval_v_closed(zeta).unwrap_or(C64::new(f64::NAN, f64::NAN))
    };
    let res = adaptive_gauss_legendre(f, &breaks, 10, 1e-11);
    if !res.converged || !(res.value.re.is_finite() && res.value.im.is_finite()) {
        return Err(Error::NonConvergence(format!("W at z = {z}")));
    }
    Ok(res.value)
}

/// Leading term `|z|² log|z| · sin 2ε · cos 2φ` of `Re W_ε(z)`.
pub fn asymptotic_w(eps: f64, z: C64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        return 0.0;
    }
    let phi = z.im.atan2(z.re);
    r * r * r.ln() * (2.0 * eps).sin() * (2.0 * phi).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::generate_cells;

    fn small() -> EntireEvaluator {
        EntireEvaluator::new(generate_cells(0.1, 1.0, 200.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn v_vanishes_at_origin_and_is_even() {
        let e = small();
        assert_eq!(e.eval_v(C64::new(0.0, 0.0)).unwrap().value, 0.0);
        let z = C64::new(3.3, 7.1);
        let a = e.eval_v(z).unwrap().value;
        assert!((e.eval_v(z.conj()).unwrap().value - a).abs() < 1e-10 * a.abs());
        assert!((e.eval_v(-z).unwrap().value - a).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn singular_at_marks_and_log_phi_sentinel() {
        let e = small();
        let a = e.cells().cells[5].marked_point;
        assert!(matches!(e.eval_v(a), Err(Error::Singular { .. })));
        assert!(matches!(e.eval_v(-a), Err(Error::Singular { .. })));
        let alpha = 0.7;
        let z = a * C64::from_polar(1.0, 0.5 * (alpha + PI));
        assert_eq!(e.eval_log_phi_alpha(alpha, z).unwrap(), f64::NEG_INFINITY);
        assert_eq!(e.eval_log_phi_alpha(alpha, C64::new(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn log_phi_matches_rotated_v() {
        let e = EntireEvaluator::new(generate_cells(0.1, 1.0, 200.0).unwrap(), 0.37).unwrap();
        let alpha = 0.3;
        for z in [C64::new(4.0, 1.0), C64::new(-2.0, 9.0), C64::new(0.5, -13.0)] {
            let lp = e.eval_log_phi_alpha(alpha, z).unwrap();
            let v = e.eval_v(rotate_for_alpha(alpha, z)).unwrap().value;
            assert!((2.0 * lp - 0.37 * v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn log_phi_matches_direct_product_near_origin() {
        let e = small();
        let alpha = 0.4;
        let z = C64::new(0.2, 0.1);
        let w = rotate_for_alpha(alpha, z);
        // the full product over all cells, in linear scale, is harmless at small |z|
        let mut prod = C64::new(1.0, 0.0);
        for a in e.cells().marked_points() {
            let u = w * w / (a * a);
            prod *= (C64::new(1.0, 0.0) - u) * u.exp();
        }
        let direct = 0.5 * e.kappa() * e.sigma().powi(2) * prod.norm().ln();
        let lp = e.eval_log_phi_alpha(alpha, z).unwrap();
        assert!((lp - direct).abs() < 1e-10);
    }

    #[test]
    fn tail_bound_behaviour() {
        let e = small();
        assert_eq!(e.tail_bound(C64::new(0.0, 0.0)), 0.0);
        assert!(e.tail_bound(C64::new(1e4, 0.0)).is_infinite());
        let t1 = e.tail_bound(C64::new(0.0, 5.0));
        let t2 = e.tail_bound(C64::new(0.0, 10.0));
        assert!(t1 > 0.0 && t2 > 10.0 * t1);
        // the bound must dominate the actual change when the cutoff is extended
        let big = EntireEvaluator::new(generate_cells(0.1, 1.0, 1000.0).unwrap(), 1.0).unwrap();
        let z = C64::new(0.0, 20.0);
        let diff = (big.eval_v(z).unwrap().value - e.eval_v(z).unwrap().value).abs();
        assert!(diff <= e.tail_bound(z), "{diff} > {}", e.tail_bound(z));
    }

    #[test]
    fn parallel_sum_is_thread_count_independent() {
        let e = small();
        let z = C64::new(12.0, 30.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| e.eval_v(z).unwrap().value);
        let b = three.install(|| e.eval_v(z).unwrap().value);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn v_is_harmonic_away_from_zeros() {
        let e = small();
        let h = 1e-3;
        for z in [C64::new(5.0, 5.0), C64::new(0.0, 17.0), C64::new(-8.0, 3.0)] {
            let f = |w: C64| e.eval_v(w).unwrap().value;
            let lap = (f(z + h) + f(z - h) + f(z + C64::new(0.0, h)) + f(z - C64::new(0.0, h)) - 4.0 * f(z)) / (h * h);
            let scale = f(z).abs() / z.norm_sqr();
            assert!(lap.abs() <= 1e-4 * scale.max(1.0), "{lap}");
        }
    }

    #[test]
    fn v_closed_examples() {
        assert_eq!(eval_v_closed(C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        let v = eval_v_closed(C64::new(0.0, 0.5)).unwrap();
        assert!((v.re + 0.0144647).abs() < 1e-7 && v.im.abs() < 1e-15);
        // v'(z) = z log(1 − z²)
        let z = C64::new(0.3, 0.0);
        let h = 1e-3;
        let f = |x: C64| eval_v_closed(x).unwrap();
        let d = (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h);
        assert!(
            (d / z - (1.0 - z * z).ln()).norm() < 1e-10,
            "{}",
            (d / z - (1.0 - z * z).ln()).norm()
        );
        assert!(matches!(eval_v_closed(C64::new(1.5, 0.0)), Err(Error::BranchCut(_))));
        assert!(matches!(eval_v_closed(C64::new(-1.0, 0.0)), Err(Error::BranchCut(_))));
    }

    #[test]
    fn series_and_closed_form_agree_on_switch_circle() {
        for k in 0..16 {
            let zeta = C64::from_polar(0.5 * (1.0 - 1e-9), 0.1 + k as f64 * 0.39);
            let series = eval_v_closed(zeta).unwrap();
            let w = zeta * zeta;
            let one = C64::new(1.0, 0.0);
            let closed = 0.5 * (w - one) * (one - w).ln() - 0.5 * w;
            assert!((series - closed).norm() < 1e-14);
        }
    }

    #[test]
    fn w_examples() {
        assert_eq!(eval_w(0.1, C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        let z = C64::new(3.0, 2.0);
        let a = eval_w(0.1, z).unwrap();
        let b = eval_w(0.1, z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-10 * a.norm());
        // leading term along φ = 0 at r = 100
        let r = 100.0;
        let w = eval_w(0.1, C64::new(r, 0.0)).unwrap();
        let ratio = w.re / asymptotic_w(0.1, C64::new(r, 0.0));
        assert!((0.8..=1.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn asymptotic_w_examples() {
        let d = C64::from_polar(50.0, PI / 4.0);
        assert!(asymptotic_w(0.1, d).abs() < 1e-10);
        let v = asymptotic_w(0.1, C64::new(10.0, 0.0));
        assert!((v - 100.0 * 10f64.ln() * 0.2f64.sin()).abs() < 1e-12);
        assert!((v - 45.745).abs() < 1e-3);
        for phi in [0.1, 0.4, 1.0] {
            let a = asymptotic_w(0.1, C64::from_polar(7.0, phi));
            let b = asymptotic_w(0.1, C64::from_polar(7.0, phi + PI / 2.0));
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn compare_excludes_lattice_disks_unless_subtracted() {
        let e = small();
        let a = e.cells().cells[40].marked_point;
        let z = a + C64::new(0.1, 0.0);
        assert!(matches!(e.compare_v_w(z, false), Err(Error::ExcludedDisk { .. })));
        let c = e.compare_v_w(z, true).unwrap();
        assert!(c.diff.is_finite() && c.subtracted_zero.is_some());
        let far = e.compare_v_w(C64::new(0.0, 50.0), false).unwrap();
        assert!(far.ratio <= 10.0);
        assert!(far.csv_row().split(',').count() == 7);
    }
}
