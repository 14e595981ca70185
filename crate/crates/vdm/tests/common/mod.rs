//! Shared oracles for the integration suites, implemented independently of
//! the library's numeric paths.
#![allow(dead_code)] // each test target uses its own subset

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= 15.0 * tol {
            split + (split - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(&f, a, b, f(a), f(m), f(b), tol, 48)
}

/// Γ(dof/2) from the exact half-integer closed forms.
fn gamma_of_half(dof: u32) -> f64 {
    if dof % 2 == 0 {
        // Γ(n) = (n-1)!
        (1..dof / 2).map(|k| k as f64).product()
    } else {
        // Γ(n + 1/2) = (2n-1)!!/2ⁿ · √π
        let n = (dof - 1) / 2;
        let mut value = std::f64::consts::PI.sqrt();
        for k in 0..n {
            value *= 0.5 + k as f64;
        }
        value
    }
}

/// Upper-tail χ² probability by adaptive quadrature of the density.
pub fn chi2_tail_by_quadrature(x: f64, dof: u32) -> f64 {
    let a = dof as f64 / 2.0;
    let norm = 2f64.powf(a) * gamma_of_half(dof);
    let pdf = move |t: f64| t.powf(a - 1.0) * (-t / 2.0).exp() / norm;
    let upper = x + 120.0 + 6.0 * dof as f64;
    integrate(pdf, x, upper, 1e-10)
}

/// P(sum of a uniformly random `nx`-subset of ranks {1..n} ≥ w), by counting
/// subsets with a subset-sum dynamic program.
pub fn rank_subset_tail(n: usize, nx: usize, w: u32) -> f64 {
    let max_sum = n * (n + 1) / 2;
    let mut dp = vec![vec![0u64; max_sum + 1]; nx + 1];
    dp[0][0] = 1;
    for rank in 1..=n {
        for k in (1..=nx.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                dp[k][s] += dp[k - 1][s - rank];
            }
        }
    }
    let total: u64 = dp[nx].iter().sum();
    let tail: u64 = dp[nx][(w as usize).min(max_sum)..].iter().sum();
    tail as f64 / total as f64
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}
