//! Browser bindings for the demo page in `www/`: the sector potential on a
//! grid, the cell partition, and the image of a polar grid under the
//! log-power map.
//!
//! Every export returns a flat `Float64Array`; layouts are described on each
//! function. Errors surface as JS exceptions.

use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;

use zeromodes::cells::{generate_cells, validate_cells};
use zeromodes::conformal::{choose_varsigma, halfplane_closure};
use zeromodes::field::SectorFieldConfig;
use zeromodes::potential::SectorPotential;

/// Hard cap on grid sides so a slider cannot freeze the tab.
const MAX_GRID: usize = 512;
/// Hard cap on cells drawn.
const MAX_CELLS: usize = 20_000;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `F` on an `n × n` grid over `[-extent, extent]²`, row-major from the
/// bottom row, then the four zero-growth directions: length `n² + 4`.
/// NaN marks the origin.
pub fn potential_grid_values(alpha: f64, b1: f64, n: usize, extent: f64) -> Result<Vec<f64>, String> {
    if !(2..=MAX_GRID).contains(&n) || !(extent > 0.0) {
        return Err(format!("grid side must be in 2..={MAX_GRID} and extent positive"));
    }
    let pot = SectorPotential::new(SectorFieldConfig::new(alpha, b1).map_err(|e| e.to_string())?);
    let h = 2.0 * extent / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n + 4);
    for j in 0..n {
        for i in 0..n {
            let z = C64::new(-extent + h * i as f64, -extent + h * j as f64);
            out.push(pot.eval(z).unwrap_or(f64::NAN));
        }
    }
    out.extend(pot.zero_growth_directions());
    Ok(out)
}

/// Cell partition as `[valid, count, (k, x1, y1, …, xk, yk, mx, my)…]`, where
/// `valid` is 1 when every invariant holds and `(mx, my)` is the marked point.
pub fn cell_polygon_values(eps: f64, sigma: f64, r_cut: f64) -> Result<Vec<f64>, String> {
    let cs = generate_cells(eps, sigma, r_cut).map_err(|e| e.to_string())?;
    if cs.len() > MAX_CELLS {
        return Err(format!("{} cells exceed the demo limit of {MAX_CELLS}", cs.len()));
    }
    let valid = validate_cells(&cs).passed;
    let mut out = vec![if valid { 1.0 } else { 0.0 }, cs.len() as f64];
    for c in &cs.cells {
        out.push(c.vertices.len() as f64);
        out.extend(c.vertices.iter().flat_map(|v| [v.re, v.im]));
        out.extend([c.marked_point.re, c.marked_point.im]);
    }
    Ok(out)
}

/// Image of the polar grid of the upper half-plane annulus
/// `e^ς ≤ |ω| ≤ e^{ς+decades·ln 10}` under `ζ = ω (log ω − iπ/2)^A`, in
/// coordinates `(log|ζ|, arg ζ)` with the argument continued across ±π.
///
/// Layout: `[ς, n_lines, samples, (u, v) × samples × n_lines]`, first the
/// `rays` radial lines then the `circles` arcs. Each line has the same number
/// of samples.
pub fn halfplane_map_values(
    a: f64,
    decades: f64,
    rays: usize,
    circles: usize,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if rays < 2 || circles < 2 || samples < 2 || rays + circles > 200 || samples > 2000 || !(decades > 0.0) {
        return Err("need at least 2 rays, circles and samples, and positive decades".into());
    }
    let varsigma = choose_varsigma(a).map_err(|e| e.to_string())?;
    let (l0, l1) = (varsigma, varsigma + decades * std::f64::consts::LN_10);
    // arg ζ = θ + A arg(log ω − iπ/2) without the wrap at ±π
    let image = |log_r: f64, theta: f64| {
        let z = halfplane_closure(a, C64::from_polar(log_r.exp(), theta));
        let inner = C64::new(log_r, theta - std::f64::consts::FRAC_PI_2);
        [z.norm().ln(), theta + a * inner.arg()]
    };
    let t = |k: usize, n: usize| k as f64 / (n - 1) as f64;
    let mut out = vec![varsigma, (rays + circles) as f64, samples as f64];
    for i in 0..rays {
        let theta = std::f64::consts::PI * t(i, rays);
        for s in 0..samples {
            out.extend(image(l0 + (l1 - l0) * t(s, samples), theta));
        }
    }
    for i in 0..circles {
        let log_r = l0 + (l1 - l0) * t(i, circles);
        for s in 0..samples {
            out.extend(image(log_r, std::f64::consts::PI * t(s, samples)));
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn potential_grid(alpha: f64, b1: f64, n: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    potential_grid_values(alpha, b1, n, extent).map_err(js)
}

#[wasm_bindgen]
pub fn cell_polygons(eps: f64, sigma: f64, r_cut: f64) -> Result<Vec<f64>, JsError> {
    cell_polygon_values(eps, sigma, r_cut).map_err(js)
}

#[wasm_bindgen]
pub fn halfplane_map(a: f64, decades: f64, rays: usize, circles: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    halfplane_map_values(a, decades, rays, circles, samples).map_err(js)
}
