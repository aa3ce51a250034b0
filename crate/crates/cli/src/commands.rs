//! The six subcommands. Each takes its resolved parameters and an output sink
//! and reports whether its check passed.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::json;

use zeromodes::cells::{generate_cells, validate_cells};
use zeromodes::conformal::{
    boundary_angle, boundary_angle_leading, choose_varsigma, probed_boundary_argument, univalence_probe, HalfPlaneMap,
    Region,
};
use zeromodes::entire::{EntireEvaluator, VWComparison};
use zeromodes::field::{FieldConfig, FourierProfile, HomogeneousFieldConfig, SectorFieldConfig};
use zeromodes::plot::{contour_svg, Grid, Svg};
use zeromodes::potential::{sign_definite_check, solve_circle_ode, SectorPotential};
use zeromodes::quad::{convergence_verdict, LogDensity, ShellOptions, ShellReport, Verdict, VerdictParams};
use zeromodes::zeromode::{build_candidate, GaussianCandidate};

use crate::config::usage;

/// Outcome of a command: `pass` selects exit code 0 or 1.
#[derive(Debug)]
pub struct Status {
    pub pass: bool,
    pub message: String,
}

/// Output directory.
pub struct Out {
    dir: PathBuf,
}

impl Out {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn text(&self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }
}

const SVG_WIDTH: f64 = 800.0;

// ------------------------------------------------------------------ field-show

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldShowParams {
    pub field: FieldConfig,
    pub grid: usize,
    pub extent: f64,
    pub polar_samples: usize,
    pub seed: Option<u64>,
}

impl Default for FieldShowParams {
    fn default() -> Self {
        Self {
            field: FieldConfig::Sector(SectorFieldConfig::new(PI / 2.0, -1.0).expect("valid default field")),
            grid: 256,
            extent: 20.0,
            polar_samples: 360,
            seed: None,
        }
    }
}

type Sampler<'a> = Box<dyn Fn(C64) -> Option<f64> + Sync + 'a>;

pub fn field_show(p: &FieldShowParams, out: &Out) -> anyhow::Result<Status> {
    if p.grid < 2 || p.polar_samples == 0 || !(p.extent > 0.0) {
        return Err(usage("need grid ≥ 2, polar_samples ≥ 1 and a positive extent"));
    }
    let e = p.extent;
    let bounds = [-e, e, -e, e];
    let psis: Vec<f64> = (0..p.polar_samples)
        .map(|j| 2.0 * PI * j as f64 / p.polar_samples as f64)
        .collect();

    let sector;
    let ode;
    let (f, rays, table): (Sampler, Vec<f64>, String) = match &p.field {
        FieldConfig::Sector(cfg) => {
            sector = SectorPotential::new(*cfg);
            let mut t = String::from("psi,C\n");
            for &psi in &psis {
                let _ = writeln!(t, "{psi},{}", sector.log_growth_coefficient(psi));
            }
            let f: Sampler = Box::new(|z| sector.eval(z).ok());
            (f, sector.zero_growth_directions().to_vec(), t)
        }
        FieldConfig::Homogeneous(cfg) => {
            ode = solve_circle_ode(cfg)?;
            let mut t = String::from("psi,angular\n");
            for &psi in &psis {
                let _ = writeln!(t, "{psi},{}", ode.angular(psi));
            }
            let f: Sampler = Box::new(|z| (z.norm() > 0.0).then(|| ode.eval(z)));
            (f, Vec::new(), t)
        }
    };

    let grid = Grid::sample(bounds, p.grid, p.grid, &f)?;
    let csv = match p.seed {
        None => grid.to_csv("F"),
        Some(seed) => {
            let mut rng = StdRng::seed_from_u64(seed);
            let h = 2.0 * e / (p.grid - 1) as f64;
            let mut s = String::from("x,y,F\n");
            for j in 0..p.grid {
                for i in 0..p.grid {
                    let z = grid.node(i, j) + C64::new(rng.gen_range(-0.25..0.25) * h, rng.gen_range(-0.25..0.25) * h);
                    let _ = writeln!(s, "{},{},{}", z.re, z.im, f(z).unwrap_or(f64::NAN));
                }
            }
            s
        }
    };
    out.text("F_grid.csv", &csv)?;

    let mut svg = contour_svg(&grid, SVG_WIDTH);
    for &psi in &rays {
        svg.ray(psi, "zero-growth", "#444444");
    }
    if let FieldConfig::Sector(cfg) = &p.field {
        svg.ray(0.0, "interface", "#1b7837");
        svg.ray(cfg.alpha(), "interface", "#1b7837");
    }
    out.text("contour.svg", &svg.finish())?;
    out.text("growth_table.csv", &table)?;
    out.json(
        "summary.json",
        &json!({
            "field": p.field,
            "grid_rows": p.grid * p.grid,
            "max_abs_f": grid.max_abs(),
            "zero_growth_directions": rays,
        }),
    )?;
    Ok(Status {
        pass: true,
        message: format!(
            "field-show: {} grid rows, {} zero-growth rays, written to {}",
            p.grid * p.grid,
            rays.len(),
            out.dir.display()
        ),
    })
}

// ------------------------------------------------------------------ cells

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellsParams {
    pub eps: f64,
    pub sigma: f64,
    pub r_cut: f64,
}

impl Default for CellsParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            sigma: 1.0,
            r_cut: 50.0,
        }
    }
}

pub fn cells(p: &CellsParams, out: &Out) -> anyhow::Result<Status> {
    let cs = generate_cells(p.eps, p.sigma, p.r_cut)?;
    let report = validate_cells(&cs);
    out.text("cells.json", &(cs.to_json()? + "\n"))?;
    out.json("validation.json", &report)?;

    let pad = p.sigma;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in cs.cells.iter().flat_map(|c| c.vertices.iter()) {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if x0.is_finite() {
        let mut svg = Svg::new(
            [x0 - pad, x1 + pad, y0 - pad, y1 + pad],
            SVG_WIDTH.max(4.0 * (x1 - x0) / p.sigma),
        );
        for c in &cs.cells {
            svg.polygon(&c.vertices, "#333333", "#d1e5f0");
            svg.point(c.marked_point, 1.5, "#b2182b");
        }
        out.text("cells.svg", &svg.finish())?;
    }
    Ok(Status {
        pass: report.passed,
        message: format!(
            "cells: {} cells, validation {}{}",
            cs.len(),
            if report.passed { "passed" } else { "FAILED: " },
            report.failures.join("; ")
        ),
    })
}

// ------------------------------------------------------------------ entire-compare

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntireCompareParams {
    pub eps: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub r_cut: f64,
    pub ray: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub near_lattice: bool,
    pub max_ratio: f64,
}

impl Default for EntireCompareParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            sigma: 1.0,
            kappa: 1.0,
            r_cut: 2000.0,
            ray: PI / 2.0,
            r_min: 10.0,
            r_max: 200.0,
            n_points: 20,
            near_lattice: false,
            max_ratio: 10.0,
        }
    }
}

pub fn entire_compare(p: &EntireCompareParams, out: &Out) -> anyhow::Result<Status> {
    if p.n_points < 2 || !(p.r_min > 0.0 && p.r_max > p.r_min) {
        return Err(usage("need n_points ≥ 2 and 0 < r_min < r_max"));
    }
    if !(p.r_cut > p.r_max) {
        return Err(usage("r_cut must exceed r_max"));
    }
    let ev = EntireEvaluator::new(generate_cells(p.eps, p.sigma, p.r_cut)?, p.kappa)?;
    let mut csv = format!("{},ratio\n", VWComparison::CSV_HEADER);
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..p.n_points {
        let r = p.r_min + (p.r_max - p.r_min) * k as f64 / (p.n_points - 1) as f64;
        let row = ev.compare_v_w(C64::from_polar(r, p.ray), p.near_lattice)?;
        let _ = writeln!(csv, "{},{}", row.csv_row(), row.ratio);
        if row.ratio > worst.0 {
            worst = (row.ratio, r);
        }
    }
    out.text("compare.csv", &csv)?;
    let pass = worst.0 <= p.max_ratio;
    out.json(
        "summary.json",
        &json!({ "max_ratio": worst.0, "max_ratio_at_r": worst.1, "threshold": p.max_ratio, "pass": pass }),
    )?;
    Ok(Status {
        pass,
        message: format!(
            "entire-compare: max diff/budget {:.3} at r = {} (threshold {})",
            worst.0, worst.1, p.max_ratio
        ),
    })
}

// ------------------------------------------------------------------ verdicts

/// Shell layout shared by the verdict commands; resolution knobs included.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictKnobs {
    pub r_start: f64,
    pub shell_width: f64,
    pub n_shells: usize,
    pub q: f64,
    pub m: usize,
    pub n_rad: usize,
    pub n_ang: usize,
}

impl Default for VerdictKnobs {
    fn default() -> Self {
        let d = VerdictParams::default();
        Self {
            r_start: d.r_start,
            shell_width: d.shell_width,
            n_shells: d.n_shells,
            q: d.q,
            m: d.m,
            n_rad: d.shell.n_rad,
            n_ang: d.shell.n_ang,
        }
    }
}

impl VerdictKnobs {
    pub fn params(&self, shell: ShellOptions) -> VerdictParams {
        VerdictParams {
            r_start: self.r_start,
            shell_width: self.shell_width,
            n_shells: self.n_shells,
            q: self.q,
            m: self.m,
            shell: ShellOptions {
                n_rad: self.n_rad,
                n_ang: self.n_ang,
                ..shell
            },
        }
    }
}

fn monomial(k: usize) -> Vec<C64> {
    let mut p = vec![C64::new(0.0, 0.0); k + 1];
    p[k] = C64::new(1.0, 0.0);
    p
}

fn degree(d: i64) -> anyhow::Result<usize> {
    usize::try_from(d).map_err(|_| usage(format!("degree must be nonnegative, got {d}")))
}

/// Verdict for one density, optionally repeated at doubled resolution. Writes
/// the shell table and report, returns the summary entry.
fn verdict_entry<D: LogDensity + ?Sized>(
    density: &D,
    params: &VerdictParams,
    doubled: bool,
    k: usize,
    out: &Out,
) -> anyhow::Result<(bool, serde_json::Value)> {
    let base = convergence_verdict(density, params)?;
    write_report(out, &format!("P{k}"), &base)?;
    let mut pass = base.verdict == Verdict::Convergent;
    let mut doubled_verdict = None;
    if doubled {
        let fine = convergence_verdict(
            density,
            &VerdictParams {
                shell: params.shell.doubled(),
                ..*params
            },
        )?;
        write_report(out, &format!("P{k}_doubled"), &fine)?;
        pass &= fine.verdict == Verdict::Convergent;
        doubled_verdict = Some(fine.verdict);
    }
    let entry = json!({
        "k": k,
        "verdict": base.verdict,
        "doubled_verdict": doubled_verdict,
        "last_log_ratio": base.log_ratios.last().copied().flatten(),
        "pass": pass,
    });
    Ok((pass, entry))
}

fn write_report(out: &Out, stem: &str, r: &ShellReport) -> anyhow::Result<()> {
    out.text(&format!("shells_{stem}.csv"), &r.to_csv())?;
    out.text(&format!("verdict_{stem}.json"), &(r.to_json()? + "\n"))
}

fn verdict_line(entries: &[serde_json::Value]) -> String {
    entries
        .iter()
        .map(|e| {
            let d = e["doubled_verdict"]
                .as_str()
                .map(|v| format!(" / doubled {v}"))
                .unwrap_or_default();
            format!("P=z^{}: {}{d}", e["k"], e["verdict"].as_str().unwrap_or("?"))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

// ------------------------------------------------------------------ zeromode-verify

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeromodeParams {
    pub alpha: f64,
    pub b1: f64,
    pub degree: i64,
    pub r_cut: f64,
    pub doubled: bool,
    pub verdict: VerdictKnobs,
}

impl Default for ZeromodeParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            b1: -0.01,
            degree: 1,
            r_cut: 400.0,
            doubled: true,
            verdict: VerdictKnobs::default(),
        }
    }
}

pub fn zeromode_verify(p: &ZeromodeParams, out: &Out) -> anyhow::Result<Status> {
    let d = degree(p.degree)?;
    let cfg = SectorFieldConfig::new(p.alpha, p.b1)?;
    // The Weierstrass construction needs √α < π/8. Wider sectors get the bare
    // Gaussian candidate, whose verdict shows the uncompensated growth.
    let weierstrass = p.alpha.sqrt() < PI / 8.0;
    let mut entries = Vec::new();
    let mut pass = true;
    let mut candidate = json!(null);
    for k in 0..=d {
        let (ok, entry) = if weierstrass {
            let cand = build_candidate(cfg, &monomial(k), p.r_cut)?;
            if k == 0 {
                candidate = serde_json::to_value(cand.summary())?;
            }
            let shell = ShellOptions {
                lattice_spacing: Some(cand.params().sigma),
                ..ShellOptions::default()
            };
            verdict_entry(&cand, &p.verdict.params(shell), p.doubled, k, out)?
        } else {
            let cand = GaussianCandidate {
                potential: SectorPotential::new(cfg),
                poly: monomial(k),
            };
            verdict_entry(&cand, &p.verdict.params(ShellOptions::default()), p.doubled, k, out)?
        };
        pass &= ok;
        entries.push(entry);
    }
    out.json(
        "summary.json",
        &json!({
            "candidate": if weierstrass { "weierstrass" } else { "gaussian" },
            "construction": candidate,
            "results": entries,
            "pass": pass,
        }),
    )?;
    Ok(Status {
        pass,
        message: format!(
            "zeromode-verify ({} candidate): {}",
            if weierstrass { "Weierstrass" } else { "Gaussian" },
            verdict_line(&entries)
        ),
    })
}

// ------------------------------------------------------------------ univalence

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnivalenceParams {
    pub a: f64,
    pub n_grid: usize,
    pub decades: f64,
    pub rho: Vec<f64>,
    pub angle_tol: f64,
}

impl Default for UnivalenceParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            n_grid: 256,
            decades: 4.0,
            rho: vec![1e3, 1e4, 1e5, 1e6],
            angle_tol: 0.2,
        }
    }
}

pub fn univalence(p: &UnivalenceParams, out: &Out) -> anyhow::Result<Status> {
    if !(p.decades > 0.0) {
        return Err(usage("decades must be positive"));
    }
    let varsigma = choose_varsigma(p.a)?;
    let r0 = varsigma.exp();
    let region = Region::HalfPlaneAnnulus {
        r_min: r0,
        r_max: 10f64.powf(p.decades) * r0,
    };
    let report = univalence_probe(&HalfPlaneMap(p.a), &region, p.n_grid)?;
    out.text("probe.json", &(report.to_json()? + "\n"))?;

    let mut csv = String::from("rho,predicted,leading,probed,rel_err\n");
    let mut worst: f64 = 0.0;
    for &rho in &p.rho {
        let predicted = boundary_angle(p.a, rho)?;
        let probed = probed_boundary_argument(p.a, rho)?;
        let rel = (predicted / probed - 1.0).abs();
        worst = worst.max(rel);
        let _ = writeln!(
            csv,
            "{rho},{predicted},{},{probed},{rel}",
            boundary_angle_leading(p.a, rho)
        );
    }
    out.text("boundary_angle.csv", &csv)?;
    let pass = report.pass && worst < p.angle_tol;
    out.json(
        "summary.json",
        &json!({
            "varsigma": varsigma,
            "region": region,
            "probe_pass": report.pass,
            "collision_count": report.collision_count,
            "winding": report.winding,
            "worst_angle_rel_err": worst,
            "pass": pass,
        }),
    )?;
    Ok(Status {
        pass,
        message: format!(
            "univalence: A = {}, ς = {varsigma:.3}, probe {} ({} collisions, winding {}..{}), boundary angle error {:.1}%",
            p.a,
            if report.pass { "passed" } else { "failed" },
            report.collision_count,
            report.winding.iter().min().unwrap_or(&0),
            report.winding.iter().max().unwrap_or(&0),
            100.0 * worst
        ),
    })
}

// ------------------------------------------------------------------ nonres

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonresParams {
    pub s: f64,
    pub mean: f64,
    pub cos: Vec<(i64, f64)>,
    pub sin: Vec<(i64, f64)>,
    pub degree: i64,
    pub verdict: VerdictKnobs,
}

impl Default for NonresParams {
    fn default() -> Self {
        Self {
            s: -0.5,
            mean: 1.0,
            cos: vec![(1, 0.1)],
            sin: Vec::new(),
            degree: 1,
            verdict: VerdictKnobs::default(),
        }
    }
}

/// Residual accepted from the spectral circle solver.
const ODE_RESIDUAL_TOL: f64 = 1e-10;

pub fn nonres(p: &NonresParams, out: &Out) -> anyhow::Result<Status> {
    let d = degree(p.degree)?;
    let profile = FourierProfile::from_cos_sin(p.mean, &p.cos, &p.sin)?;
    let cfg = HomogeneousFieldConfig::new(p.s, profile)?;
    let sol = match solve_circle_ode(&cfg) {
        Ok(sol) => sol,
        Err(zeromodes::Error::Resonance { mode, magnitude }) => {
            out.json(
                "summary.json",
                &json!({ "resonance": { "mode": mode, "magnitude": magnitude }, "pass": false }),
            )?;
            return Ok(Status {
                pass: false,
                message: format!("nonres: resonance, mode {mode} has magnitude {magnitude:e}"),
            });
        }
        Err(e) => return Err(e.into()),
    };
    out.text("ode.json", &(sol.to_json()? + "\n"))?;
    let sign = sign_definite_check(&sol)?;
    out.json("sign.json", &sign)?;

    // analytic modes pair with e^{-2F} when F is eventually positive
    let w = -sol.beta0().signum();
    let mut entries = Vec::new();
    let mut converged = true;
    for k in 0..=d {
        let density = |z: C64| 2.0 * w * sol.eval(z) + 2.0 * k as f64 * z.norm().ln();
        let (ok, entry) = verdict_entry(&density, &p.verdict.params(ShellOptions::default()), false, k, out)?;
        converged &= ok;
        entries.push(entry);
    }
    let residual_ok = sol.residual_norm() < ODE_RESIDUAL_TOL;
    let pass = residual_ok && sign.sign_definite && converged;
    out.json(
        "summary.json",
        &json!({
            "residual_norm": sol.residual_norm(),
            "sign_definite": sign.sign_definite,
            "margin": sign.margin,
            "weight": if w < 0.0 { "exp(-2F)" } else { "exp(2F)" },
            "results": entries,
            "pass": pass,
        }),
    )?;
    Ok(Status {
        pass,
        message: format!(
            "nonres: residual {:.1e}, sign-definite {} (margin {:.4}), {}",
            sol.residual_norm(),
            sign.sign_definite,
            sign.margin,
            verdict_line(&entries)
        ),
    })
}
