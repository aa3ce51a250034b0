//! Shared numerical kernels: Gauss–Legendre rules, adaptive 1-D quadrature,
//! deterministic compensated summation and log-domain accumulation.

use std::f64::consts::PI;

use crate::C64;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, starting from the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Outcome of [`adaptive_gauss_legendre`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: C64,
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Adaptive Gauss–Legendre quadrature of a complex integrand over the
/// breakpoint-separated intervals of `breaks` (sorted, at least two entries).
///
/// Each panel compares one order-`order` rule against the same rule on its two
/// halves and bisects until the difference falls under
/// `rel_tol * |running estimate|`.
pub fn adaptive_gauss_legendre<F>(f: F, breaks: &[f64], order: usize, rel_tol: f64) -> AdaptiveResult
where
    F: Fn(f64) -> C64,
{
    assert!(breaks.len() >= 2);
    let rule = GaussLegendre::new(order);
    let mut evals = 0usize;
    let fixed = |a: f64, b: f64, evals: &mut usize| -> C64 {
        *evals += rule.len();
        rule.mapped(a, b).map(|(x, w)| f(x) * w).sum()
    };

    let mut initial = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        initial += fixed(w[0], w[1], &mut evals);
    }
    let scale = initial.norm().max(f64::MIN_POSITIVE);

    const MAX_DEPTH: u32 = 40;
    let mut stack: Vec<(f64, f64, C64, u32)> = Vec::new();
    for w in breaks.windows(2).rev() {
        let est = fixed(w[0], w[1], &mut evals);
        stack.push((w[0], w[1], est, 0));
    }
    let mut total = C64::new(0.0, 0.0);
    let mut err_total = 0.0;
    let mut converged = true;
    let total_len = (breaks[breaks.len() - 1] - breaks[0]).abs().max(f64::MIN_POSITIVE);
    while let Some((a, b, coarse, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = fixed(a, m, &mut evals);
        let right = fixed(m, b, &mut evals);
        let fine = left + right;
        let err = (fine - coarse).norm();
        let budget = rel_tol * scale * ((b - a).abs() / total_len).max(1e-3);
        if err <= budget || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > budget {
                converged = false;
            }
            total += fine;
            err_total += err;
        } else {
            stack.push((m, b, right, depth + 1));
            stack.push((a, m, left, depth + 1));
        }
    }
    AdaptiveResult {
        value: total,
        error_estimate: err_total,
        converged,
        evaluations: evals,
    }
}

/// Neumaier-compensated sum of a slice, in slice order.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Block size for [`pairwise_sum`]; blocks are Neumaier-summed, block sums are
/// then combined by a fixed binary tree.
pub const PAIRWISE_BLOCK: usize = 256;

/// Deterministic pairwise summation: the reduction tree depends only on the
/// length of `values`, never on scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return neumaier_sum(values);
    }
    let blocks: Vec<f64> = values.chunks(PAIRWISE_BLOCK).map(neumaier_sum).collect();
    tree_reduce(&blocks)
}

/// Fixed-shape binary tree reduction of partial sums.
pub fn tree_reduce(partials: &[f64]) -> f64 {
    match partials.len() {
        0 => 0.0,
        1 => partials[0],
        n => {
            let mid = n / 2;
            tree_reduce(&partials[..mid]) + tree_reduce(&partials[mid..])
        }
    }
}

/// `log Σ exp(x_i)` in slice order; `-inf` entries contribute nothing.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let scaled: Vec<f64> = values.iter().map(|&v| (v - max).exp()).collect();
    max + pairwise_sum(&scaled).ln()
}

/// `log(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `Re[log(1 - u) + u]`, the real part of the genus-one Weierstrass factor.
/// Accurate in absolute terms for small `|u|`.
#[inline]
pub fn re_log1m_plus(u: C64) -> f64 {
    let x = u.norm_sqr() - 2.0 * u.re;
    0.5 * x.ln_1p() + u.re
}

/// Principal argument mapped to `[0, 2π)`.
#[inline]
pub fn arg_0_2pi(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Least-squares fit of `y ≈ Σ c_j basis_j(x)` via normal equations solved by
/// Gaussian elimination with partial pivoting. Basis count is small (≤ 4).
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let p = rows.first()?.len();
    let mut ata = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))?;
        if ata[pivot][col].abs() < 1e-300 {
            return None;
        }
        ata.swap(col, pivot);
        let pivot_row = ata[col].clone();
        for (r, row) in ata.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                for (a, b) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *a -= f * b;
                }
            }
        }
    }
    Some((0..p).map(|i| ata[i][p] / ata[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let rule = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let q: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn adaptive_handles_kinks_at_breakpoints() {
        let f = |x: f64| C64::new(x.abs(), 0.0);
        let r = adaptive_gauss_legendre(f, &[-1.0, 0.0, 2.0], 8, 1e-12);
        assert!((r.value.re - 2.5).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn pairwise_sum_is_order_fixed_and_accurate() {
        let v: Vec<f64> = [1.0, 1e100, 1.0, -1e100].repeat(2500);
        assert_eq!(pairwise_sum(&v), 5000.0);
        let w: Vec<f64> = (1..=1000).map(|i| 1.0 / i as f64).collect();
        assert_eq!(pairwise_sum(&w).to_bits(), pairwise_sum(&w.clone()).to_bits());
    }

    #[test]
    fn log_sum_exp_survives_extreme_ranges() {
        let v = [-1e4, -1e4 + (2.0f64).ln()];
        assert!((log_sum_exp(&v) - (-1e4 + (3.0f64).ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x * x, x, 1.0]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 3.0 * x * x - 2.0 * x + 0.5).collect();
        let c = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-9 && (c[1] + 2.0).abs() < 1e-9 && (c[2] - 0.5).abs() < 1e-8);
    }
}
