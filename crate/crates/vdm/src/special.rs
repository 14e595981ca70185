//! Special functions: error function and regularized incomplete gamma.
//!
//! Both are implemented to well below 1e-12 absolute error so that the χ²
//! p-values computed downstream are stable.

use std::f64::consts::PI;

/// 2/√π, the normalizing constant of the error function.
const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_6;

const MAX_ITER: usize = 800;
const EPS: f64 = 1e-16;

/// Error function `erf(x) = (2/√π) ∫₀ˣ exp(-t²) dt`.
///
/// Odd symmetry is exact: `erf(-x) == -erf(x)` bit for bit. Absolute error
/// is below 1e-13 for |x| ≤ 6.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let ax = x.abs();
    if ax == 0.0 {
        return x; // preserves signed zero
    }
    if ax < 2.0 {
        sign * erf_series(ax)
    } else if ax < 27.0 {
        sign * (1.0 - erfc_cf(ax))
    } else {
        sign
    }
}

/// Complementary error function `erfc(x) = 1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 2.0 {
        if x >= 27.0 {
            0.0 // exp(-729) underflows
        } else {
            erfc_cf(x)
        }
    } else if x <= -2.0 {
        2.0 - erfc(-x)
    } else {
        1.0 - erf(x)
    }
}

// Maclaurin series: erf(x) = (2/√π) Σ (-1)^k x^(2k+1) / (k! (2k+1)).
// Used for |x| < 2 where cancellation stays below a couple of ulps.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x; // x^(2k+1) / k!
    let mut sum = x;
    for k in 1..MAX_ITER {
        power *= -x2 / k as f64;
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    TWO_OVER_SQRT_PI * sum
}

// Laplace continued fraction for erfc, evaluated with the modified Lentz
// algorithm:
//   erfc(x) √π exp(x²) = 1/(x + 1/(2x + 2/(x + 3/(2x + ...))))
// Converges quickly for x ≥ 2.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let a = n as f64;
        let b = if n % 2 == 0 { x } else { 2.0 * x };
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x) = γ(a, x) / Γ(a)`.
///
/// Requires `a > 0` and `x ≥ 0`; returns NaN otherwise.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if !(a > 0.0) || !(x >= 0.0) {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if !(a > 0.0) || !(x >= 0.0) {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

// Power series for P(a, x); converges fast for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

// Continued fraction for Q(a, x), modified Lentz; converges for x ≥ a + 1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:e}, want {want:e} (|diff| = {:e} > {tol:e})",
            (got - want).abs()
        );
    }

    // Test-side oracle: adaptive Simpson quadrature, independent of the
    // series/continued-fraction code paths above.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
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
            simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
                + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
        }
    }

    fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        let m = 0.5 * (a + b);
        simpson(&f, a, b, f(a), f(m), f(b), tol, 50)
    }

    #[test]
    fn erf_known_values() {
        // Reference values computed with 50-digit arithmetic.
        let table = [
            (0.1, 0.112_462_916_018_284_89),
            (0.5, 0.520_499_877_813_046_54),
            (1.0, 0.842_700_792_949_714_87),
            (1.5, 0.966_105_146_475_310_73),
            (2.0, 0.995_322_265_018_952_73),
            (2.5, 0.999_593_047_982_555_04),
            (3.0, 0.999_977_909_503_001_41),
            (4.0, 0.999_999_984_582_742_1),
            (5.0, 0.999_999_999_998_462_54),
            (6.0, 0.999_999_999_999_999_98),
        ];
        for (x, want) in table {
            assert_close(erf(x), want, 1e-13);
        }
    }

    #[test]
    fn erf_odd_symmetry_is_exact() {
        for i in 0..600 {
            let x = i as f64 * 0.01;
            assert_eq!(erf(-x).to_bits(), (-erf(x)).to_bits(), "x = {x}");
        }
    }

    #[test]
    fn erf_at_zero_and_infinity() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erf(f64::INFINITY), 1.0);
        assert_eq!(erf(f64::NEG_INFINITY), -1.0);
        assert!(erf(f64::NAN).is_nan());
    }

    #[test]
    fn erf_matches_quadrature_oracle() {
        for &x in &[0.3, 0.9, 1.4, 1.9, 2.3, 3.1, 4.2] {
            let oracle = integrate(|t| TWO_OVER_SQRT_PI * (-t * t).exp(), 0.0, x, 1e-13);
            assert_close(erf(x), oracle, 1e-11);
        }
    }

    #[test]
    fn erfc_complements_erf() {
        for &x in &[-3.0, -1.0, -0.2, 0.0, 0.7, 1.9, 2.0, 2.4, 5.0] {
            assert_close(erf(x) + erfc(x), 1.0, 1e-14);
        }
        // deep tail keeps relative accuracy where 1 - erf would not
        assert_close(erfc(6.0) / 2.151_973_671_249_891_3e-17, 1.0, 1e-12);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_close(ln_gamma(1.0), 0.0, 1e-14);
        assert_close(ln_gamma(2.0), 0.0, 1e-14);
        assert_close(ln_gamma(5.0), 24.0f64.ln(), 1e-13);
        assert_close(ln_gamma(0.5), PI.sqrt().ln(), 1e-13);
        // half-integer oracle: Γ(n + 1/2) = (2n)! / (4^n n!) · √π
        let mut fact2n = 1.0;
        for k in 1..=20u64 {
            fact2n *= k as f64;
        }
        let mut factn = 1.0;
        for k in 1..=10u64 {
            factn *= k as f64;
        }
        let gamma_10_5 = fact2n / (4f64.powi(10) * factn) * PI.sqrt();
        assert_close(ln_gamma(10.5), gamma_10_5.ln(), 1e-12);
    }

    #[test]
    fn gamma_q_exponential_identity() {
        // Q(1, x) = exp(-x) exactly (χ² with 2 degrees of freedom).
        for &x in &[0.1, 0.5, 1.0, 2.5, 7.0, 20.0] {
            assert_close(gamma_q(1.0, x), (-x).exp(), 1e-14);
        }
    }

    #[test]
    fn gamma_p_q_sum_to_one() {
        for &a in &[0.5, 1.0, 2.5, 10.0, 45.5] {
            for &x in &[0.01, 0.5, 1.0, 3.0, 10.0, 60.0] {
                assert_close(gamma_p(a, x) + gamma_q(a, x), 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn gamma_q_matches_quadrature_oracle() {
        // Q(a, x) = ∫ₓ^∞ t^(a-1) e^(-t) dt / Γ(a); the oracle integrates the
        // tail directly (truncated where the integrand is negligible).
        for &(a, x) in &[(0.5, 1.9), (1.5, 0.8), (2.0, 4.0), (5.0, 3.0), (10.0, 14.0)] {
            let norm = ln_gamma(a);
            let upper = x + 60.0 + 10.0 * a;
            let oracle = integrate(|t| (((a - 1.0) * t.ln()) - t - norm).exp(), x, upper, 1e-13);
            assert_close(gamma_q(a, x), oracle, 1e-10);
        }
    }

    #[test]
    fn gamma_q_monotone_in_x() {
        let mut prev = 1.0;
        for i in 1..200 {
            let x = i as f64 * 0.25;
            let q = gamma_q(3.5, x);
            assert!(q < prev, "Q must strictly decrease, x = {x}");
            prev = q;
        }
    }

    #[test]
    fn gamma_invalid_domain_is_nan() {
        assert!(gamma_p(-1.0, 2.0).is_nan());
        assert!(gamma_q(0.0, 2.0).is_nan());
        assert!(gamma_q(1.0, -0.5).is_nan());
        assert!(ln_gamma(-3.0).is_nan());
    }
}
