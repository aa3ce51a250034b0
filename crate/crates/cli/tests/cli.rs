use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use zeromodes::cells::{validate_cells, CellSet};

fn zeromodes(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeromodes"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

/// Values of `data-angle` on elements with the given class.
fn ray_angles(svg: &str, class: &str) -> Vec<f64> {
    let tag = format!("class=\"{class}\" data-angle=\"");
    svg.match_indices(&tag)
        .map(|(i, _)| {
            let rest = &svg[i + tag.len()..];
            rest[..rest.find('"').unwrap()].parse().unwrap()
        })
        .collect()
}

#[test]
fn field_show_grid_svg_and_growth_rays() {
    let dir = tempfile::tempdir().unwrap();
    let o = zeromodes(
        dir.path(),
        &["field-show", "--alpha", "1.5707963267948966", "--b1", "-1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let grid = read(dir.path(), "F_grid.csv");
    assert!(grid.starts_with("x,y,F\n"));
    assert_eq!(grid.lines().count(), 65536 + 1);
    assert!(!grid.contains('\r'));

    let svg = read(dir.path(), "contour.svg");
    assert!(svg.contains("version=\"1.1\""));
    assert!(svg.contains("data-level=\"0\""));
    let rays = ray_angles(&svg, "zero-growth");
    assert_eq!(rays.len(), 4);

    // −2F grows like (c0 sin α / π) cos(2ψ − α) r² log r, so the growth
    // coefficient changes sign exactly where cos(2ψ − α) does.
    let alpha = PI / 2.0;
    let table = csv_rows(&read(dir.path(), "growth_table.csv"));
    assert_eq!(table.len(), 360);
    let c_at = |psi: f64| {
        let j = ((psi.rem_euclid(2.0 * PI)) / (2.0 * PI) * 360.0).round() as usize % 360;
        table[j][1]
    };
    for psi in rays {
        assert!((2.0 * psi - alpha).cos().abs() < 1e-9, "ray {psi}");
        let (before, after) = (c_at(psi - 0.05), c_at(psi + 0.05));
        assert!(before * after < 0.0, "no sign change of C at {psi}: {before} {after}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"grid\": 16,").unwrap();
    let o = zeromodes(dir.path(), &["--config", bad.to_str().unwrap(), "field-show"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed config"));

    fs::write(&bad, "{\"gird\": 16}").unwrap();
    assert_eq!(
        code(&zeromodes(
            dir.path(),
            &["--config", bad.to_str().unwrap(), "field-show"]
        )),
        2
    );

    assert_eq!(code(&zeromodes(dir.path(), &["field-show", "--alpha", "4.0"])), 2);
    assert_eq!(code(&zeromodes(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn flags_override_config_and_echo_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"grid": 8, "extent": 5.0, "seed": 7, "field": {"kind": "sector", "alpha": 0.3, "b1": -0.1}}"#,
    )
    .unwrap();
    let first = dir.path().join("first");
    let o = zeromodes(
        &first,
        &["--config", cfg.to_str().unwrap(), "field-show", "--grid", "16"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&first, "F_grid.csv").lines().count(), 257);

    let echo: serde_json::Value = serde_json::from_str(&read(&first, "run_config.json")).unwrap();
    assert_eq!(echo["command"], "field-show");
    assert_eq!(echo["params"]["grid"], 16);
    assert_eq!(echo["params"]["seed"], 7);
    assert_eq!(echo["params"]["field"]["alpha"], 0.3);

    let second = dir.path().join("second");
    let echo_path = first.join("run_config.json");
    assert_eq!(
        code(&zeromodes(
            &second,
            &["--config", echo_path.to_str().unwrap(), "field-show"]
        )),
        0
    );
    for name in ["F_grid.csv", "contour.svg", "growth_table.csv", "summary.json"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
    // an echo from one command does not configure another
    assert_eq!(
        code(&zeromodes(&second, &["--config", echo_path.to_str().unwrap(), "cells"])),
        2
    );
}

#[test]
fn homogeneous_field_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"grid": 9, "field": {"kind": "homogeneous", "s": -0.5, "fourier": [[0, 1.0, 0.0], [1, 0.05, 0.0], [-1, 0.05, 0.0]]}}"#,
    )
    .unwrap();
    let o = zeromodes(dir.path(), &["--config", cfg.to_str().unwrap(), "field-show"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // angular part 1/2.25 + 0.1 cos ψ / 1.25
    let table = csv_rows(&read(dir.path(), "growth_table.csv"));
    for row in table {
        let expect = 1.0 / 2.25 + 0.08 * row[0].cos();
        assert!((row[1] - expect).abs() < 1e-10);
    }
}

#[test]
fn cells_json_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let o = zeromodes(dir.path(), &["cells", "--eps", "0.1", "--sigma", "1", "--r-cut", "50"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cs = CellSet::from_json(&read(dir.path(), "cells.json")).unwrap();
    assert!(!cs.is_empty());
    assert!(validate_cells(&cs).passed);
    assert!(read(dir.path(), "cells.svg").contains("<polygon"));
}

#[test]
fn entire_compare_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = zeromodes(
        dir.path(),
        &[
            "entire-compare",
            "--eps",
            "0.1",
            "--sigma",
            "1",
            "--ray",
            "1.5707963267948966",
            "--r-min",
            "10",
            "--r-max",
            "200",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(dir.path(), "compare.csv");
    assert!(text.starts_with("z_re,z_im,V,ReW,diff,budget,tail_bound,ratio\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 20);
    for row in rows {
        let r = row[0].hypot(row[1]);
        // budget ε r² + |log σ|/ε + σ r with ε = 0.1, σ = 1
        let budget = 0.1 * r * r + r;
        assert!((row[5] - budget).abs() <= 1e-9 * budget);
        assert!((row[4] - (row[2] - row[3])).abs() <= 1e-9 * row[2].abs().max(1.0));
        assert!(row[4].abs() / budget <= 10.0);
    }
}

#[test]
fn nonres_pass_and_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let o = zeromodes(dir.path(), &["nonres", "--s", "-0.5", "--mean", "1", "--cos", "1:0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert!((summary["margin"].as_f64().unwrap() - (1.0 / 2.25 - 0.08)).abs() < 1e-3);
    assert_eq!(summary["results"][1]["verdict"], "convergent");

    let o = zeromodes(dir.path(), &["nonres", "--s", "0", "--mean", "0", "--cos", "2:1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("resonance"));
}

#[test]
fn univalence_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = zeromodes(dir.path(), &["univalence", "--a", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let probe: serde_json::Value = serde_json::from_str(&read(dir.path(), "probe.json")).unwrap();
    assert_eq!(probe["pass"], true);
    assert_eq!(read(dir.path(), "boundary_angle.csv").lines().count(), 5);
}

#[test]
fn zeromode_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&zeromodes(dir.path(), &["zeromode-verify", "-d", "-1"])), 2);

    let o = zeromodes(
        dir.path(),
        &["zeromode-verify", "--alpha", "3.0", "--b1", "-0.3", "-d", "0"],
    );
    assert_eq!(code(&o), 1);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["results"][0]["verdict"], "divergent");

    let o = zeromodes(
        dir.path(),
        &["zeromode-verify", "--alpha", "0.05", "--b1", "-0.01", "-d", "1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    for k in 0..2 {
        assert_eq!(summary["results"][k]["verdict"], "convergent");
        assert_eq!(summary["results"][k]["doubled_verdict"], "convergent");
    }
    assert!(dir.path().join("shells_P1_doubled.csv").exists());
}
