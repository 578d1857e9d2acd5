//! Discriminants of the three-scale quadratic forms and grid-certified
//! threshold constants.
//!
//! For a mode pair `c s^α + c' s^β` the three-scale second difference of
//! `I_K` is a binary quadratic form in `(c, c')` with positive diagonal, so it
//! is positive definite exactly when its discriminant is negative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{cubed_ratio, power_ratio};
use crate::error::{Error, Result};

fn check_k(k: f64) -> Result<f64> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::Domain(format!("K must be finite and > 1, got {k}")));
    }
    Ok(k.ln())
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `Δ(K; α, β) = [(K^{α+β}-1)³/(α+β)]² - (K^{2α}-1)³/(2α) · (K^{2β}-1)³/(2β)`,
/// evaluated in a factored form that stays accurate as `β → α`.
pub fn discriminant_power(k: f64, alpha: f64, beta: f64) -> Result<f64> {
    let lk = check_k(k)?;
    if alpha == beta {
        return Err(Error::UseLogBranch(alpha));
    }
    let s = alpha + beta;
    if alpha == 0.0 || beta == 0.0 || s == 0.0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha}, beta = {beta}: zero denominator"
        )));
    }
    let d = alpha - beta;
    let lambda = |i: f64| {
        let h = sinhc(0.5 * i * d * lk);
        s * s * (i * lk) * (i * lk) * h * h
    };
    let (l1, l2, l3) = (lambda(1.0), lambda(2.0), lambda(3.0));
    let xm1 = (s * lk).exp_m1();
    let x = xm1 + 1.0;
    let x2 = x * x;
    let x3 = x2 * x;
    let bracket =
        xm1.powi(6) - 3.0 * l1 * (x3 * x2 + 3.0 * x3 + x) + 3.0 * l2 * (x2 * x2 + x2) - l3 * x3;
    Ok(-(d * d) / (4.0 * alpha * beta * s * s) * bracket)
}

/// The same discriminant straight from its definition. Loses relative
/// accuracy like `ε·αβ/(α-β)²` near the diagonal; kept as the reference route.
pub fn discriminant_power_direct(k: f64, alpha: f64, beta: f64) -> Result<f64> {
    let lk = check_k(k)?;
    if alpha == beta {
        return Err(Error::UseLogBranch(alpha));
    }
    if alpha == 0.0 || beta == 0.0 || alpha + beta == 0.0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha}, beta = {beta}: zero denominator"
        )));
    }
    let mid = cubed_ratio(alpha + beta, lk);
    Ok(mid * mid - cubed_ratio(2.0 * alpha, lk) * cubed_ratio(2.0 * beta, lk))
}

/// `Δ(K; α) = ((K^α-1)⁴/α²) · [3 K^α (log K)² - (K^α-1)²/α²]` for the
/// `(s^{α/2}, s^{α/2} log s)` pair.
pub fn discriminant_log(k: f64, alpha: f64) -> Result<f64> {
    let lk = check_k(k)?;
    if alpha == 0.0 {
        return Err(Error::Domain("alpha = 0 in the log discriminant".into()));
    }
    let e = power_ratio(alpha, lk);
    let ae = alpha * e;
    Ok(ae.powi(4) / (alpha * alpha) * (3.0 * (alpha * lk).exp() * lk * lk - e * e))
}

/// `Δ / (A·C) = B²/(AC) - 1 ∈ [-1, ∞)`, the scale-free form of the power discriminant.
pub fn relative_discriminant_power(k: f64, alpha: f64, beta: f64) -> Result<f64> {
    let delta = discriminant_power(k, alpha, beta)?;
    let lk = k.ln();
    Ok(delta / (cubed_ratio(2.0 * alpha, lk) * cubed_ratio(2.0 * beta, lk)))
}

/// `3 K^α (log K)² / ((K^α-1)/α)² - 1 ∈ [-1, ∞)`, same sign as [`discriminant_log`].
pub fn relative_discriminant_log(k: f64, alpha: f64) -> Result<f64> {
    let lk = check_k(k)?;
    if alpha == 0.0 {
        return Err(Error::Domain("alpha = 0 in the log discriminant".into()));
    }
    let e = power_ratio(alpha, lk);
    Ok(3.0 * (alpha * lk).exp() * lk * lk / (e * e) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Power,
    Log,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Power => "power",
            Branch::Log => "log",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Branch::Power),
            "log" => Ok(Branch::Log),
            other => Err(Error::Invalid(format!("unknown branch '{other}'"))),
        }
    }
}

/// `[lo, hi]` sampled at `lo + i·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.hi >= self.lo) {
            return Err(Error::Invalid(format!("bad range {self:?}")));
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        Ok((0..=count)
            .map(|i| self.lo + i as f64 * self.step)
            .collect())
    }
}

/// Sample grid for a threshold search. `beta` defaults to `alpha`.
/// For the log branch `alpha` samples the mode exponent `α'`, and the
/// discriminant is evaluated at `2α'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: Range,
    #[serde(default)]
    pub beta: Option<Range>,
    pub k_ladder: Vec<f64>,
}

impl GridSpec {
    /// `α, β ∈ [-4, 4]` in steps of 1/4, `K ∈ {2.5, 3, …, 50}`.
    pub fn standard() -> Self {
        Self {
            alpha: Range {
                lo: -4.0,
                hi: 4.0,
                step: 0.25,
            },
            beta: None,
            k_ladder: (0..=95).map(|i| 2.5 + 0.5 * f64::from(i)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: [f64; 3],
            beta: Option<[f64; 3]>,
            k_ladder: Option<[f64; 3]>,
            k_values: Option<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let range = |a: [f64; 3]| Range {
            lo: a[0],
            hi: a[1],
            step: a[2],
        };
        let k_ladder = match (raw.k_ladder, raw.k_values) {
            (_, Some(v)) => v,
            (Some(l), None) => range(l).values()?,
            (None, None) => return Err(Error::Invalid("grid needs k_ladder or k_values".into())),
        };
        Ok(Self {
            alpha: range(raw.alpha),
            beta: raw.beta.map(range),
            k_ladder,
        })
    }

    /// Admissible sample points for `σ`; `β` is unused (NaN) on the log branch.
    pub fn pairs(&self, sigma: f64, branch: Branch) -> Result<Vec<(f64, f64)>> {
        let alphas = self.alpha.values()?;
        Ok(match branch {
            Branch::Power => {
                let betas = self.beta.unwrap_or(self.alpha).values()?;
                let mut out = Vec::new();
                for &a in &alphas {
                    for &b in &betas {
                        if a != b && a.abs() >= sigma && b.abs() >= sigma && (a + b).abs() >= sigma
                        {
                            out.push((a, b));
                        }
                    }
                }
                out
            }
            Branch::Log => alphas
                .into_iter()
                .filter(|a| a.abs() >= sigma)
                .map(|a| (a, f64::NAN))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub sigma: f64,
    pub branch: Branch,
    pub k_star: f64,
    pub witness_alpha: f64,
    pub witness_beta: f64,
    /// Largest relative discriminant over the grid at `k_star` (negative when certified).
    pub max_discriminant: f64,
}

/// Per-K worst case: (max relative discriminant, witness pair).
fn worst_at(k: f64, pairs: &[(f64, f64)], branch: Branch) -> Result<(f64, (f64, f64))> {
    let mut worst = (f64::NEG_INFINITY, (f64::NAN, f64::NAN));
    for &(a, b) in pairs {
        let rel = match branch {
            Branch::Power => relative_discriminant_power(k, a, b)?,
            Branch::Log => relative_discriminant_log(k, 2.0 * a)?,
        };
        if rel > worst.0 || rel.is_nan() {
            worst = (rel, (a, b));
        }
    }
    Ok(worst)
}

/// Largest relative discriminant over the grid pairs at each ladder `K`, in ladder order.
pub fn discriminant_profile(
    sigma: f64,
    branch: Branch,
    grid: &GridSpec,
) -> Result<Vec<(f64, f64)>> {
    let pairs = grid.pairs(sigma, branch)?;
    grid.k_ladder
        .par_iter()
        .map(|&k| Ok((k, worst_at(k, &pairs, branch)?.0)))
        .collect()
}

/// Smallest ladder `K` such that the discriminant is negative at every grid
/// pair for that `K` and every larger ladder value.
pub fn find_threshold_k(sigma: f64, branch: Branch, grid: &GridSpec) -> Result<ThresholdReport> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let pairs = grid.pairs(sigma, branch)?;
    if pairs.is_empty() {
        return Err(Error::Invalid(format!(
            "no grid pairs satisfy sigma = {sigma}"
        )));
    }
    let mut ladder = grid.k_ladder.clone();
    ladder.sort_by(f64::total_cmp);
    ladder.dedup();
    if ladder.iter().any(|k| !(*k > 1.0)) {
        return Err(Error::Domain("K ladder values must be > 1".into()));
    }
    let worst: Vec<(f64, (f64, f64))> = ladder
        .par_iter()
        .map(|&k| worst_at(k, &pairs, branch))
        .collect::<Result<_>>()?;
    let mut start = None;
    for i in (0..ladder.len()).rev() {
        if worst[i].0 < 0.0 {
            start = Some(i);
        } else {
            break;
        }
    }
    let i = start.ok_or(Error::ThresholdBeyondGrid { sigma })?;
    let (max_discriminant, (wa, wb)) = worst[i];
    Ok(ThresholdReport {
        sigma,
        branch,
        k_star: ladder[i],
        witness_alpha: wa,
        witness_beta: wb,
        max_discriminant,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from 60-digit evaluation of the defining formula.
    const POWER_REF: &[(f64, f64, f64, f64)] = &[
        (10.0, 2.0, 1.0, -10804883535445073.625),
        (3.0, -2.5, 1.25, -245.21605954811161629),
        (7.0, 0.3, -1.7, -4.9596501506828531989),
        (2.5, -4.0, -3.75, -0.000015093114039104710822),
        (6.0, 1.0, 1.0001, 0.15185973559371575119),
        (6.0, 2.0, 2.000001, -16229.896117350291196),
        (50.0, 4.0, 3.75, -1.7427318303035910511e74),
        (2.5, -0.5, 3.0, -438894.78542666165023),
    ];

    #[test]
    fn factored_power_discriminant_matches_high_precision() {
        for &(k, a, b, want) in POWER_REF {
            let got = discriminant_power(k, a, b).unwrap();
            assert!(rel(got, want) < 1e-9, "K={k} a={a} b={b}: {got} vs {want}");
        }
    }

    #[test]
    fn direct_route_agrees_away_from_diagonal() {
        for &(k, a, b, want) in &POWER_REF[..4] {
            assert!(rel(discriminant_power_direct(k, a, b).unwrap(), want) < 1e-9);
        }
    }

    #[test]
    fn k10_alpha2_beta1_magnitude() {
        let d = discriminant_power(10.0, 2.0, 1.0).unwrap();
        assert!(d < 0.0 && (d.abs() / 1.1e16 - 1.0).abs() < 0.03);
    }

    #[test]
    fn symmetry_and_scaling() {
        for &(k, a, b, _) in POWER_REF {
            let d = discriminant_power(k, a, b).unwrap();
            assert!(rel(discriminant_power(k, b, a).unwrap(), d) < 1e-12);
            let scaled = (6.0 * (a + b) * k.ln()).exp() * discriminant_power(k, -a, -b).unwrap();
            assert!(rel(scaled, d) < 1e-9);
        }
    }

    #[test]
    fn log_discriminant_reference_values() {
        let cases = [
            (100.0, 2.0, -6.0872576072952027881e22),
            (std::f64::consts::E, -0.2, 0.044124747634349865638),
            (7.0, -2.0, -0.0018576532245386189143),
            (3.0, 0.5, 4.7419149868667335082),
        ];
        for (k, a, want) in cases {
            let got = discriminant_log(k, a).unwrap();
            assert!(rel(got, want) < 1e-11, "{got} vs {want}");
            assert_eq!(
                relative_discriminant_log(k, a).unwrap().signum(),
                want.signum()
            );
        }
        assert!(discriminant_log(5.0, 0.0).is_err());
    }

    #[test]
    fn log_sign_change_along_k() {
        // Small negative exponent: positive at moderate K, negative once K is large.
        let alpha = -0.2;
        let signs: Vec<bool> = [2.0, 2.7, 10.0, 1e3, 1e6, 1e9]
            .iter()
            .map(|&k| discriminant_log(k, alpha).unwrap() < 0.0)
            .collect();
        assert!(!signs[0]);
        assert!(*signs.last().unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(
            discriminant_power(5.0, 1.0, 1.0),
            Err(Error::UseLogBranch(1.0))
        );
        assert!(discriminant_power(5.0, 1.0, -1.0).is_err());
        assert!(discriminant_power(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn standard_grid_thresholds() {
        // Reference thresholds from exhaustive 60-digit grid evaluation.
        let grid = GridSpec::standard();
        let p1 = find_threshold_k(1.0, Branch::Power, &grid).unwrap();
        assert_eq!(p1.k_star, 6.0);
        assert!(p1.max_discriminant < 0.0);
        let l1 = find_threshold_k(1.0, Branch::Log, &grid).unwrap();
        assert_eq!(l1.k_star, 7.0);
        let p2 = find_threshold_k(2.0, Branch::Power, &grid).unwrap();
        let l2 = find_threshold_k(2.0, Branch::Log, &grid).unwrap();
        assert!(p2.k_star <= p1.k_star && l2.k_star <= l1.k_star);
        for k in [p1.k_star, 2.0 * p1.k_star] {
            for (a, b) in grid.pairs(1.0, Branch::Power).unwrap() {
                assert!(discriminant_power(k, a, b).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn threshold_beyond_grid() {
        let grid = GridSpec {
            alpha: Range {
                lo: -4.0,
                hi: 4.0,
                step: 0.25,
            },
            beta: None,
            k_ladder: vec![2.5, 3.0],
        };
        assert_eq!(
            find_threshold_k(1.0, Branch::Power, &grid).unwrap_err(),
            Error::ThresholdBeyondGrid { sigma: 1.0 }
        );
    }

    #[test]
    fn grid_json() {
        let g = GridSpec::from_json(r#"{"alpha":[-4,4,0.25],"k_ladder":[2.5,50,0.5]}"#).unwrap();
        assert_eq!(g, GridSpec::standard());
    }
}
