//! Closed-form radial integrals behind the growth functional.
//!
//! Every integral here reduces, after `u = log s`, to moments
//! `∫_0^L e^{αt} t^k dt`, which are evaluated without cancellation for small
//! `|α L|` by their power series.

/// Exponents with magnitude below this switch to the logarithmic limit.
pub const LOG_BRANCH_TOL: f64 = 1e-8;

/// `∫_0^L e^{αt} t^k dt` for `k ∈ {0, 1, 2}`.
pub fn exp_moment(alpha: f64, len: f64, k: u32) -> f64 {
    assert!(k <= 2, "moments above second order are not needed");
    let x = alpha * len;
    if x.abs() < 0.5 {
        // Σ_m α^m L^{m+k+1} / (m! (m+k+1))
        let mut term = len.powi(k as i32 + 1);
        let mut acc = term / f64::from(k + 1);
        let mut m = 0u32;
        loop {
            m += 1;
            term *= x / f64::from(m);
            let add = term / f64::from(m + k + 1);
            acc += add;
            if add.abs() <= 1e-17 * acc.abs() || m > 60 {
                break;
            }
        }
        return acc;
    }
    let m0 = x.exp_m1() / alpha;
    if k == 0 {
        return m0;
    }
    let e = x.exp();
    let m1 = (len * e - m0) / alpha;
    if k == 1 {
        return m1;
    }
    (len * len * e - 2.0 * m1) / alpha
}

/// `(K^x - 1) / x`, continuous at `x = 0` where it equals `log K`.
pub fn power_ratio(x: f64, log_k: f64) -> f64 {
    if x.abs() < LOG_BRANCH_TOL {
        log_k * (1.0 + 0.5 * x * log_k)
    } else {
        (x * log_k).exp_m1() / x
    }
}

/// `I_K(r; c, c') = ∫_r^{Kr} (c s^α + c' s^β)² s^{-1} ds`.
pub fn closed_form_i(alpha: f64, beta: f64, c: f64, c2: f64, r: f64, k: f64) -> f64 {
    let lk = k.ln();
    let lr = r.ln();
    let mut acc = 0.0;
    if c != 0.0 {
        acc += c * c * (2.0 * alpha * lr).exp() * power_ratio(2.0 * alpha, lk);
    }
    if c != 0.0 && c2 != 0.0 {
        acc += 2.0 * c * c2 * ((alpha + beta) * lr).exp() * power_ratio(alpha + beta, lk);
    }
    if c2 != 0.0 {
        acc += c2 * c2 * (2.0 * beta * lr).exp() * power_ratio(2.0 * beta, lk);
    }
    acc
}

/// `Ĩ_K(r; c, c') = ∫_r^{Kr} (c s^{α'} + c' s^{α'} log s)² s^{-1} ds`.
pub fn closed_form_i_log(alpha_prime: f64, c: f64, c2: f64, r: f64, k: f64) -> f64 {
    let alpha = 2.0 * alpha_prime;
    let u0 = r.ln();
    let len = k.ln();
    let d = c + c2 * u0;
    let body = d * d * exp_moment(alpha, len, 0)
        + 2.0 * d * c2 * exp_moment(alpha, len, 1)
        + c2 * c2 * exp_moment(alpha, len, 2);
    (alpha * u0).exp() * body
}

/// `(K^x - 1)³ / x`, the three-scale coefficient of a pure power `s^{x/2}` squared.
pub fn cubed_ratio(x: f64, log_k: f64) -> f64 {
    let e = power_ratio(x, log_k);
    e * (x * e) * (x * e)
}

/// Coefficients `(A, B, C)` of the three-scale second difference
/// `I_K(K²r) - 2 I_K(Kr) + I_K(r) = A c² + 2 B c c' + C c'²`.
pub fn three_scale_form(alpha: f64, beta: f64, r: f64, k: f64) -> (f64, f64, f64) {
    let lk = k.ln();
    let lr = r.ln();
    (
        (2.0 * alpha * lr).exp() * cubed_ratio(2.0 * alpha, lk),
        ((alpha + beta) * lr).exp() * cubed_ratio(alpha + beta, lk),
        (2.0 * beta * lr).exp() * cubed_ratio(2.0 * beta, lk),
    )
}

/// Three-scale second difference of `Ĩ_K` at base radius `r`.
pub fn three_scale_log(alpha_prime: f64, c: f64, c2: f64, r: f64, k: f64) -> f64 {
    closed_form_i_log(alpha_prime, c, c2, k * k * r, k)
        - 2.0 * closed_form_i_log(alpha_prime, c, c2, k * r, k)
        + closed_form_i_log(alpha_prime, c, c2, r, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        integrate(f, a, b, 1e-300, 1e-14, 4000).value
    }

    #[test]
    fn moments_match_quadrature_across_regimes() {
        for &alpha in &[-7.0, -0.3, -1e-6, 0.0, 1e-9, 0.2, 0.49, 0.51, 3.0] {
            for k in 0..=2u32 {
                let len = 1.0;
                let want = quad(|t| (alpha * t).exp() * t.powi(k as i32), 0.0, len);
                let got = exp_moment(alpha, len, k);
                assert!(
                    ((got - want) / want).abs() < 1e-13,
                    "alpha {alpha} k {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn plain_power_integral() {
        assert!((closed_form_i(1.0, 2.0, 1.0, 0.0, 1.0, 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(closed_form_i(1.0, 2.0, 0.0, 0.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn three_scale_second_difference_of_s() {
        let i = |r: f64| closed_form_i(1.0, -3.0, 1.0, 0.0, r, 2.0);
        let second = i(4.0) - 2.0 * i(2.0) + i(1.0);
        // Oracle: ∫ s ds over [4,8], [2,4], [1,2] by quadrature.
        let q = |a: f64| quad(|s| s, a, 2.0 * a);
        let oracle = q(4.0) - 2.0 * q(2.0) + q(1.0);
        assert!((second - 13.5).abs() < 1e-12);
        assert!((oracle - 13.5).abs() < 1e-12);
        let (a, _, _) = three_scale_form(1.0, -3.0, 1.0, 2.0);
        assert!((a - 13.5).abs() < 1e-12);
    }

    #[test]
    fn zero_exponent_uses_log_limit() {
        let v = closed_form_i(0.0, 1.0, 1.0, 0.0, 3.0, 5.0);
        assert!((v - 5f64.ln()).abs() < 1e-15);
        let v = closed_form_i(0.5, -0.5, 1.0, 1.0, 1.0, 5.0);
        let want = quad(|s| (s.sqrt() + 1.0 / s.sqrt()).powi(2) / s, 1.0, 5.0);
        assert!(((v - want) / want).abs() < 1e-13);
    }

    #[test]
    fn log_integral_matches_quadrature() {
        for &(ap, c, c2, r, k) in &[
            (1.0, 0.3, -1.2, 0.5, 6.0),
            (-2.5, 1.0, 2.0, 0.01, 3.0),
            (0.1, 0.0, 1.0, 2.0, 10.0),
        ] {
            let got = closed_form_i_log(ap, c, c2, r, k);
            let want = quad(
                |s: f64| (c * s.powf(ap) + c2 * s.powf(ap) * s.ln()).powi(2) / s,
                r,
                k * r,
            );
            assert!(((got - want) / want).abs() < 1e-11, "{got} vs {want}");
        }
    }
}
