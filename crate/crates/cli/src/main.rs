//! `zeromodes` command-line front end.
//!
//! Exit codes: 0 when the command's check passes, 1 when the analysis fails
//! (divergent verdict, resonance, failed validation), 2 on usage or config errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use commands::{
    CellsParams, EntireCompareParams, FieldShowParams, NonresParams, Status, UnivalenceParams, ZeromodeParams,
};
use config::{flag_object, resolve, usage, ConfigFile, RunConfig, UsageError};

#[derive(Parser, Debug)]
#[command(
    name = "zeromodes",
    version,
    about = "Zero modes of the Pauli operator for sector and homogeneous fields"
)]
struct Cli {
    /// JSON file with parameters, or a `run_config.json` echoed by an earlier run. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the inner parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grid CSV, contour SVG and growth table of the potential F.
    FieldShow(FieldShowArgs),
    /// Cell partition of the narrow sectors with its validation.
    Cells(CellsArgs),
    /// Lattice sum V against its integral model Re W along a ray.
    EntireCompare(EntireCompareArgs),
    /// Convergence verdicts for the candidate zero modes P = 1, z, …, z^d.
    ZeromodeVerify(ZeromodeArgs),
    /// Univalence probe of the log-power map and its boundary angle.
    Univalence(UnivalenceArgs),
    /// Non-resonant homogeneous field: circle ODE, sign check and verdicts.
    Nonres(NonresArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FieldShow(_) => "field-show",
            Command::Cells(_) => "cells",
            Command::EntireCompare(_) => "entire-compare",
            Command::ZeromodeVerify(_) => "zeromode-verify",
            Command::Univalence(_) => "univalence",
            Command::Nonres(_) => "nonres",
        }
    }
}

fn num<T: Into<f64>>(v: Option<T>) -> Option<Value> {
    v.map(|x| json!(x.into()))
}

fn int<T: Into<i64>>(v: Option<T>) -> Option<Value> {
    v.map(|x| json!(x.into()))
}

fn count(v: Option<usize>) -> Option<Value> {
    v.map(|x| json!(x))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct FieldShowArgs {
    /// Sector angle α in (0, π).
    #[arg(long)]
    alpha: Option<f64>,
    /// Field level 2b1 on the sector; b1 must be negative.
    #[arg(long)]
    b1: Option<f64>,
    /// Nodes per side of the square grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Half-width of the square [-extent, extent]².
    #[arg(long)]
    extent: Option<f64>,
    /// Angles in the polar growth table.
    #[arg(long)]
    polar_samples: Option<usize>,
    /// Jitter CSV sample points by up to a quarter spacing, seeded.
    #[arg(long)]
    seed: Option<u64>,
}

impl FieldShowArgs {
    fn flags(&self) -> Value {
        let field = flag_object([("alpha", num(self.alpha)), ("b1", num(self.b1))]);
        let field = (field != json!({})).then_some(field);
        flag_object([
            ("field", field),
            ("grid", count(self.grid)),
            ("extent", num(self.extent)),
            ("polar_samples", count(self.polar_samples)),
            ("seed", self.seed.map(|s| json!(s))),
        ])
    }
}

#[derive(Args, Debug)]
struct CellsArgs {
    /// Half-opening ε of the narrow sectors.
    #[arg(long)]
    eps: Option<f64>,
    /// Cell side σ.
    #[arg(long)]
    sigma: Option<f64>,
    /// Truncation radius.
    #[arg(long)]
    r_cut: Option<f64>,
}

impl CellsArgs {
    fn flags(&self) -> Value {
        flag_object([
            ("eps", num(self.eps)),
            ("sigma", num(self.sigma)),
            ("r_cut", num(self.r_cut)),
        ])
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EntireCompareArgs {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Weight κ of the lattice sum.
    #[arg(long)]
    kappa: Option<f64>,
    /// Lattice truncation radius; keep it well above --r-max.
    #[arg(long)]
    r_cut: Option<f64>,
    /// Direction of the sample ray.
    #[arg(long)]
    ray: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Sample points along the ray.
    #[arg(long)]
    n_points: Option<usize>,
    /// Subtract the nearest zero instead of rejecting points next to it.
    #[arg(long)]
    near_lattice: bool,
    /// Pass threshold on diff/budget.
    #[arg(long)]
    max_ratio: Option<f64>,
}

impl EntireCompareArgs {
    fn flags(&self) -> Value {
        flag_object([
            ("eps", num(self.eps)),
            ("sigma", num(self.sigma)),
            ("kappa", num(self.kappa)),
            ("r_cut", num(self.r_cut)),
            ("ray", num(self.ray)),
            ("r_min", num(self.r_min)),
            ("r_max", num(self.r_max)),
            ("n_points", count(self.n_points)),
            ("near_lattice", self.near_lattice.then_some(json!(true))),
            ("max_ratio", num(self.max_ratio)),
        ])
    }
}

/// Shell-ratio knobs shared by the verdict commands.
#[derive(Args, Debug)]
struct VerdictArgs {
    /// Inner radius of the first shell.
    #[arg(long)]
    r_start: Option<f64>,
    #[arg(long)]
    shell_width: Option<f64>,
    #[arg(long)]
    n_shells: Option<usize>,
    /// Ratio threshold q.
    #[arg(long)]
    q: Option<f64>,
    /// Number of trailing ratios that must agree.
    #[arg(long)]
    m: Option<usize>,
    /// Radial panels per shell.
    #[arg(long)]
    n_rad: Option<usize>,
    /// Angular panels per full turn.
    #[arg(long)]
    n_ang: Option<usize>,
}

impl VerdictArgs {
    fn flags(&self) -> Option<Value> {
        let v = flag_object([
            ("r_start", num(self.r_start)),
            ("shell_width", num(self.shell_width)),
            ("n_shells", count(self.n_shells)),
            ("q", num(self.q)),
            ("m", count(self.m)),
            ("n_rad", count(self.n_rad)),
            ("n_ang", count(self.n_ang)),
        ]);
        (v != json!({})).then_some(v)
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ZeromodeArgs {
    /// Sector angle α; the Weierstrass candidate needs √α < π/8.
    #[arg(long)]
    alpha: Option<f64>,
    /// Negative field level on the sector.
    #[arg(long)]
    b1: Option<f64>,
    /// Highest power d in P = z^k, k = 0..=d.
    #[arg(long, short = 'd')]
    degree: Option<i64>,
    /// Lattice truncation radius of the Weierstrass product.
    #[arg(long)]
    r_cut: Option<f64>,
    /// Skip the doubled-resolution repeat of each verdict.
    #[arg(long)]
    single: bool,
    #[command(flatten)]
    verdict: VerdictArgs,
}

impl ZeromodeArgs {
    fn flags(&self) -> Value {
        flag_object([
            ("alpha", num(self.alpha)),
            ("b1", num(self.b1)),
            ("degree", int(self.degree)),
            ("r_cut", num(self.r_cut)),
            ("doubled", self.single.then_some(json!(false))),
            ("verdict", self.verdict.flags()),
        ])
    }
}

#[derive(Args, Debug)]
struct UnivalenceArgs {
    /// Exponent A of the log-power map.
    #[arg(long)]
    a: Option<f64>,
    /// Probe grid per side.
    #[arg(long)]
    n_grid: Option<usize>,
    /// Annulus |ω| in [R, 10^decades R].
    #[arg(long)]
    decades: Option<f64>,
    /// Moduli ρ for the boundary angle table (repeatable).
    #[arg(long)]
    rho: Vec<f64>,
    /// Allowed relative error of the predicted boundary angle.
    #[arg(long)]
    angle_tol: Option<f64>,
}

impl UnivalenceArgs {
    fn flags(&self) -> Value {
        flag_object([
            ("a", num(self.a)),
            ("n_grid", count(self.n_grid)),
            ("decades", num(self.decades)),
            ("rho", (!self.rho.is_empty()).then(|| json!(self.rho))),
            ("angle_tol", num(self.angle_tol)),
        ])
    }
}

fn parse_mode(s: &str) -> Result<(i64, f64), String> {
    let (n, a) = s.split_once(':').ok_or_else(|| format!("expected n:a, got {s:?}"))?;
    let n = n.trim().parse::<i64>().map_err(|e| format!("mode {n:?}: {e}"))?;
    let a = a.trim().parse::<f64>().map_err(|e| format!("amplitude {a:?}: {e}"))?;
    Ok((n, a))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct NonresArgs {
    /// Homogeneity degree s of the field.
    #[arg(long)]
    s: Option<f64>,
    /// Mean level of the angular profile.
    #[arg(long)]
    mean: Option<f64>,
    /// Cosine term `n:a`, i.e. a cos(nψ) (repeatable; replaces the configured list).
    #[arg(long = "cos", value_parser = parse_mode)]
    cos: Vec<(i64, f64)>,
    /// Sine term `n:a` (repeatable; replaces the configured list).
    #[arg(long = "sin", value_parser = parse_mode)]
    sin: Vec<(i64, f64)>,
    /// Highest power d in P = z^k, k = 0..=d.
    #[arg(long, short = 'd')]
    degree: Option<i64>,
    #[command(flatten)]
    verdict: VerdictArgs,
}

impl NonresArgs {
    fn flags(&self) -> Value {
        let list = |v: &Vec<(i64, f64)>| (!v.is_empty()).then(|| json!(v));
        flag_object([
            ("s", num(self.s)),
            ("mean", num(self.mean)),
            ("cos", list(&self.cos)),
            ("sin", list(&self.sin)),
            ("degree", int(self.degree)),
            ("verdict", self.verdict.flags()),
        ])
    }
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let name = cli.command.name();
    if let Some(c) = &file.command {
        if c != name {
            return Err(usage(format!("config was written by `{c}`, not `{name}`")));
        }
    }
    let out = cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
    let threads = cli.threads.or(file.threads);
    if let Some(n) = threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    macro_rules! dispatch {
        ($args:expr, $params:ty, $cmd:path) => {{
            let params: $params = resolve(&file.params, $args.flags())?;
            let rc = RunConfig {
                command: name.to_string(),
                out: out.clone(),
                threads,
                params: serde_json::to_value(&params)?,
            };
            let sink = commands::Out::create(&out)?;
            sink.json("run_config.json", &rc)?;
            $cmd(&params, &sink)
        }};
    }

    match &cli.command {
        Command::FieldShow(a) => dispatch!(a, FieldShowParams, commands::field_show),
        Command::Cells(a) => dispatch!(a, CellsParams, commands::cells),
        Command::EntireCompare(a) => dispatch!(a, EntireCompareParams, commands::entire_compare),
        Command::ZeromodeVerify(a) => dispatch!(a, ZeromodeParams, commands::zeromode_verify),
        Command::Univalence(a) => dispatch!(a, UnivalenceParams, commands::univalence),
        Command::Nonres(a) => dispatch!(a, NonresParams, commands::nonres),
    }
}

/// 2 for bad input (including invalid parameters reported by the library),
/// 1 for everything that went wrong in the analysis itself.
fn exit_code(err: &anyhow::Error) -> u8 {
    let bad_input = err.chain().any(|e| {
        e.is::<UsageError>()
            || e.is::<std::io::Error>()
            || e.is::<rayon::ThreadPoolBuildError>()
            || matches!(
                e.downcast_ref::<zeromodes::Error>(),
                Some(zeromodes::Error::InvalidParameter(_))
            )
    });
    if bad_input {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by itself
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => {
            println!("{}", status.message);
            if status.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn mode_parser() {
        assert_eq!(parse_mode("2:-0.5"), Ok((2, -0.5)));
        assert!(parse_mode("2").is_err());
        assert!(parse_mode("x:1").is_err());
    }

    #[test]
    fn exit_code_classes() {
        assert_eq!(exit_code(&usage("bad")), 2);
        assert_eq!(exit_code(&zeromodes::Error::InvalidParameter("x".into()).into()), 2);
        assert_eq!(exit_code(&zeromodes::Error::ZeroMean.into()), 1);
    }

    #[test]
    fn verdict_knobs_default_to_library_defaults() {
        let k = commands::VerdictKnobs::default();
        let p = k.params(zeromodes::quad::ShellOptions::default());
        assert_eq!(p, zeromodes::quad::VerdictParams::default());
    }
}
