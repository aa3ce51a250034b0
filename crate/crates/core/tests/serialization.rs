use num_complex::Complex64 as C64;
use proptest::prelude::*;

use zeromodes::cells::{generate_cells, validate_cells, CellSet};
use zeromodes::field::{FieldConfig, FourierProfile, HomogeneousFieldConfig, SectorFieldConfig};
use zeromodes::potential::{solve_circle_ode, CircleODESolution};
use zeromodes::quad::{convergence_verdict, VerdictParams};

#[test]
fn cell_set_round_trips_and_revalidates() {
    let cs = generate_cells(0.2, 5.27, 200.0).unwrap();
    let text = cs.to_json().unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["eps", "sigma", "r_cut", "cells"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let first = &doc["cells"][0];
    assert!(first["poly"].is_array() && first["aq"].is_array());
    let back = CellSet::from_json(&text).unwrap();
    assert_eq!(back.len(), cs.len());
    assert!(validate_cells(&back).passed);
}

#[test]
fn shell_report_emits_json_and_csv() {
    let report = convergence_verdict(&|z: C64| -z.norm_sqr(), &VerdictParams::default()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(json["verdict"], "convergent");
    let csv = report.to_csv();
    assert!(csv.starts_with("R_mid,I_k\n"));
    assert_eq!(csv.lines().count(), 1 + report.shell_values.len());
}

proptest! {
    #[test]
    fn field_config_round_trips(alpha in 0.01f64..3.1, b1 in -5.0f64..-1e-6) {
        let cfg = FieldConfig::Sector(SectorFieldConfig::new(alpha, b1).unwrap());
        let back = FieldConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn ode_solution_round_trips(s in -1.9f64..-0.1, a in -0.5f64..0.5, b in -0.5f64..0.5) {
        let profile = FourierProfile::from_cos_sin(1.0, &[(1, a), (3, b)], &[(2, 0.5 * a)]).unwrap();
        let sol = solve_circle_ode(&HomogeneousFieldConfig::new(s, profile).unwrap()).unwrap();
        let back = CircleODESolution::from_json(&sol.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, sol);
    }
}
