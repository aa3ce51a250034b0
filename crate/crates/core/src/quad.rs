//! Annular shell quadrature of `exp(density)` in polar coordinates and the
//! shell ratio test deciding whether the planar integral is finite.
//!
//! Everything is accumulated in the log domain: densities routinely span
//! thousands of units of `log` across one shell.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{log_add_exp, log_sum_exp, GaussLegendre};
use crate::C64;

/// A real log-density on the plane; `−∞` marks isolated zeros of the integrand.
pub trait LogDensity: Sync {
    fn log_density(&self, z: C64) -> f64;
}

impl<F> LogDensity for F
where
    F: Fn(C64) -> f64 + Sync,
{
    fn log_density(&self, z: C64) -> f64 {
        self(z)
    }
}

/// Resolution and refinement controls for one shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellOptions {
    /// Radial panels per shell.
    pub n_rad: usize,
    /// Angular panels over the full turn (scaled down for a partial range).
    pub n_ang: usize,
    /// Gauss–Legendre nodes per panel and direction.
    pub order: usize,
    /// Bisection depth limit; 0 disables refinement.
    pub max_depth: u32,
    /// Relative agreement required between a panel and its split estimates.
    pub rel_tol: f64,
    /// When set, at least `16·⌈R/σ⌉` angular panels are used on a shell of outer radius `R`.
    pub lattice_spacing: Option<f64>,
    /// Angular integration range `[ψ0, ψ1]`.
    pub psi_range: (f64, f64),
}

impl Default for ShellOptions {
    fn default() -> Self {
        Self {
            n_rad: 4,
            n_ang: 64,
            order: 4,
            max_depth: 6,
            rel_tol: 1e-3,
            lattice_spacing: None,
            psi_range: (0.0, 2.0 * PI),
        }
    }
}

impl ShellOptions {
    /// Same options with panel counts doubled in both directions.
    pub fn doubled(self) -> Self {
        Self {
            n_rad: 2 * self.n_rad,
            n_ang: 2 * self.n_ang,
            ..self
        }
    }

    fn angular_panels(&self, r_hi: f64) -> usize {
        let mut n = self.n_ang;
        if let Some(s) = self.lattice_spacing {
            n = n.max(16 * (r_hi / s).ceil() as usize);
        }
        let frac = (self.psi_range.1 - self.psi_range.0) / (2.0 * PI);
        ((n as f64 * frac).ceil() as usize).max(4)
    }
}

/// Result of one shell integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellIntegral {
    pub log_value: f64,
    pub value: f64,
    /// Panels that hit the depth limit before meeting the tolerance.
    pub non_converged: usize,
    pub evaluations: usize,
}

struct Panel {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
}

struct Integrator<'a, D: LogDensity + ?Sized> {
    density: &'a D,
    rule: GaussLegendre,
    opts: ShellOptions,
}

/// `|e^{a−b} − 1|` with both sides possibly `−∞`.
fn log_rel_diff(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return 0.0;
    }
    (a - b).exp_m1().abs()
}

impl<D: LogDensity + ?Sized> Integrator<'_, D> {
    /// `log ∫∫_panel e^{d} r dr dψ` by the tensor rule.
    fn estimate(&self, p: &Panel, evals: &mut usize) -> f64 {
        let mut terms = Vec::with_capacity(self.rule.len() * self.rule.len());
        for (r, wr) in self.rule.mapped(p.r0, p.r1) {
            let lw = (wr * r).ln();
            for (t, wt) in self.rule.mapped(p.t0, p.t1) {
                let d = self.density.log_density(C64::from_polar(r, t));
                terms.push(d + lw + wt.ln());
            }
        }
        *evals += terms.len();
        log_sum_exp(&terms)
    }

    fn refine(&self, p: Panel, coarse: f64, depth: u32, floor: f64, evals: &mut usize, bad: &mut usize) -> f64 {
        if self.opts.max_depth == 0 || coarse < floor {
            return coarse;
        }
        let rm = 0.5 * (p.r0 + p.r1);
        let tm = 0.5 * (p.t0 + p.t1);
        let r_halves = [
            Panel {
                r0: p.r0,
                r1: rm,
                t0: p.t0,
                t1: p.t1,
            },
            Panel {
                r0: rm,
                r1: p.r1,
                t0: p.t0,
                t1: p.t1,
            },
        ];
        let t_halves = [
            Panel {
                r0: p.r0,
                r1: p.r1,
                t0: p.t0,
                t1: tm,
            },
            Panel {
                r0: p.r0,
                r1: p.r1,
                t0: tm,
                t1: p.t1,
            },
        ];
        let re = [self.estimate(&r_halves[0], evals), self.estimate(&r_halves[1], evals)];
        let te = [self.estimate(&t_halves[0], evals), self.estimate(&t_halves[1], evals)];
        let lr = log_add_exp(re[0], re[1]);
        let lt = log_add_exp(te[0], te[1]);
        let er = log_rel_diff(lr, coarse);
        let et = log_rel_diff(lt, coarse);
        if er.max(et) <= self.opts.rel_tol {
            return lr;
        }
        if depth + 1 >= self.opts.max_depth {
            *bad += 1;
            return if er <= et { lr } else { lt };
        }
        let (halves, est) = if er >= et { (r_halves, re) } else { (t_halves, te) };
        let [h0, h1] = halves;
        let a = self.refine(h0, est[0], depth + 1, floor, evals, bad);
        let b = self.refine(h1, est[1], depth + 1, floor, evals, bad);
        log_add_exp(a, b)
    }
}

/// `∫∫ exp(density(r e^{iψ})) r dr dψ` over `[r_lo, r_hi] × psi_range`.
pub fn shell_integral_with<D: LogDensity + ?Sized>(
    density: &D,
    r_lo: f64,
    r_hi: f64,
    opts: &ShellOptions,
) -> Result<ShellIntegral> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(invalid(format!("need 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]")));
    }
    if opts.n_rad < 1 || opts.n_ang < 4 || opts.order < 1 {
        return Err(invalid("panel counts too small"));
    }
    let (t0, t1) = opts.psi_range;
    if !(t1 > t0 && t1 - t0 <= 2.0 * PI + 1e-12) {
        return Err(invalid(format!("bad angular range [{t0}, {t1}]")));
    }
    let integ = Integrator {
        density,
        rule: GaussLegendre::new(opts.order),
        opts: *opts,
    };
    let n_ang = opts.angular_panels(r_hi);
    let dr = (r_hi - r_lo) / opts.n_rad as f64;
    let dt = (t1 - t0) / n_ang as f64;
    let panels: Vec<Panel> = (0..opts.n_rad)
        .flat_map(|i| {
            (0..n_ang).map(move |j| Panel {
                r0: r_lo + i as f64 * dr,
                r1: if i + 1 == opts.n_rad {
                    r_hi
                } else {
                    r_lo + (i + 1) as f64 * dr
                },
                t0: t0 + j as f64 * dt,
                t1: if j + 1 == n_ang { t1 } else { t0 + (j + 1) as f64 * dt },
            })
        })
        .collect();

    let coarse: Vec<(f64, usize)> = panels
        .par_iter()
        .map(|p| {
            let mut e = 0;
            let v = integ.estimate(p, &mut e);
            (v, e)
        })
        .collect();
    let coarse_logs: Vec<f64> = coarse.iter().map(|c| c.0).collect();
    let floor = log_sum_exp(&coarse_logs) + (1e-10f64).ln();

    let refined: Vec<(f64, usize, usize)> = panels
        .into_par_iter()
        .zip(coarse_logs.par_iter())
        .map(|(p, &c)| {
            let mut evals = 0;
            let mut bad = 0;
            let v = integ.refine(p, c, 0, floor, &mut evals, &mut bad);
            (v, evals, bad)
        })
        .collect();
    let logs: Vec<f64> = refined.iter().map(|r| r.0).collect();
    let log_value = log_sum_exp(&logs);
    Ok(ShellIntegral {
        log_value,
        value: log_value.exp(),
        non_converged: refined.iter().map(|r| r.2).sum(),
        evaluations: coarse.iter().map(|c| c.1).sum::<usize>() + refined.iter().map(|r| r.1).sum::<usize>(),
    })
}

/// Shell integral with default refinement and `n_rad × n_ang` panels.
pub fn shell_integral<D: LogDensity + ?Sized>(
    density: &D,
    r_lo: f64,
    r_hi: f64,
    n_rad: usize,
    n_ang: usize,
) -> Result<ShellIntegral> {
    let opts = ShellOptions {
        n_rad,
        n_ang,
        ..ShellOptions::default()
    };
    shell_integral_with(density, r_lo, r_hi, &opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Shell layout and ratio rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictParams {
    pub r_start: f64,
    pub shell_width: f64,
    pub n_shells: usize,
    pub q: f64,
    pub m: usize,
    pub shell: ShellOptions,
}

impl Default for VerdictParams {
    fn default() -> Self {
        Self {
            r_start: 5.0,
            shell_width: 2.0,
            n_shells: 15,
            q: 0.9,
            m: 5,
            shell: ShellOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellReport {
    pub radii: Vec<f64>,
    pub shell_values: Vec<f64>,
    pub log_shell_values: Vec<f64>,
    /// `I_{k+1}/I_k`; `None` where `I_k` underflows to zero.
    pub ratios: Vec<Option<f64>>,
    pub log_ratios: Vec<Option<f64>>,
    pub verdict: Verdict,
    pub params: VerdictParams,
    pub non_converged_panels: usize,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

impl ShellReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two-column CSV `R_mid,I_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R_mid,I_k\n");
        for (k, v) in self.shell_values.iter().enumerate() {
            let mid = 0.5 * (self.radii[k] + self.radii[k + 1]);
            out.push_str(&format!("{mid},{v:e}\n"));
        }
        out
    }
}

/// Applies the ratio rule to log shell values: convergent iff the last `m`
/// ratios are all below `q`, divergent iff all above `1/q`.
pub fn classify(log_values: &[f64], q: f64, m: usize) -> (Verdict, Vec<Option<f64>>, Vec<String>) {
    let mut notes = Vec::new();
    let log_ratios: Vec<Option<f64>> = log_values
        .windows(2)
        .map(|w| (w[0] > f64::NEG_INFINITY).then(|| w[1] - w[0]))
        .collect();
    if log_values.iter().all(|&v| v == f64::NEG_INFINITY) {
        notes.push("integrand numerically zero on every shell".to_string());
        return (Verdict::Convergent, log_ratios, notes);
    }
    let tail = &log_values[log_values.len().saturating_sub(m + 1)..];
    if tail.iter().all(|&v| v == f64::NEG_INFINITY) {
        notes.push("integrand numerically zero on the last shells".to_string());
        return (Verdict::Convergent, log_ratios, notes);
    }
    let last = &log_ratios[log_ratios.len().saturating_sub(m)..];
    let lq = q.ln();
    // a shell underflowing after a nonzero one counts as a ratio of 0
    let as_ratio = |r: &Option<f64>, i: usize| -> Option<f64> {
        r.or_else(|| (tail.get(i + 1) == Some(&f64::NEG_INFINITY)).then_some(f64::NEG_INFINITY))
    };
    let vals: Vec<Option<f64>> = last.iter().enumerate().map(|(i, r)| as_ratio(r, i)).collect();
    let verdict = if vals.iter().all(|r| r.is_some_and(|x| x < lq)) {
        Verdict::Convergent
    } else if vals.iter().all(|r| r.is_some_and(|x| x > -lq)) {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    (verdict, log_ratios, notes)
}

/// Integrates successive shells `[R_start + kΔ, R_start + (k+1)Δ]` and applies
/// the ratio rule.
pub fn convergence_verdict<D: LogDensity + ?Sized>(density: &D, params: &VerdictParams) -> Result<ShellReport> {
    if !(params.n_shells >= params.m && params.m >= 3) {
        return Err(invalid("need n_shells ≥ m ≥ 3"));
    }
    if !(params.q > 0.0 && params.q < 1.0) {
        return Err(invalid(format!("q must lie in (0, 1), got {}", params.q)));
    }
    if !(params.r_start > 0.0 && params.shell_width > 0.0) {
        return Err(invalid("shell radii must be positive"));
    }
    let radii: Vec<f64> = (0..=params.n_shells)
        .map(|k| params.r_start + k as f64 * params.shell_width)
        .collect();
    let mut logs = Vec::with_capacity(params.n_shells);
    let mut non_converged = 0;
    let mut evaluations = 0;
    for w in radii.windows(2) {
        let s = shell_integral_with(density, w[0], w[1], &params.shell)?;
        logs.push(s.log_value);
        non_converged += s.non_converged;
        evaluations += s.evaluations;
    }
    let (verdict, log_ratios, mut notes) = classify(&logs, params.q, params.m);
    if non_converged > 0 {
        notes.push(format!("{non_converged} panels reached the refinement depth limit"));
    }
    Ok(ShellReport {
        radii,
        shell_values: logs.iter().map(|l| l.exp()).collect(),
        log_shell_values: logs,
        ratios: log_ratios.iter().map(|r| r.map(f64::exp)).collect(),
        log_ratios,
        verdict,
        params: *params,
        non_converged_panels: non_converged,
        evaluations,
        notes,
    })
}
