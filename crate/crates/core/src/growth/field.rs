//! Finite mode sums of homogeneous Jacobi fields and their growth functional.

use serde::{Deserialize, Serialize};

use super::closed_form::{closed_form_i, closed_form_i_log, three_scale_form, three_scale_log};
use crate::error::{Error, Result};
use crate::spectrum::{
    asymptotic_exponents, hardy_bound, resonant_exponent, SpectralLadder, MERGE_TOL,
};

/// One mode `c⁺ r^{γ⁺} + c⁻ r^{γ⁻}` (or `c⁻ r^{γ} log r` when resonant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    /// 1-based ladder index.
    pub j: usize,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl ModeTerm {
    pub fn is_zero(&self) -> bool {
        self.c_plus == 0.0 && self.c_minus == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiCoefficients {
    pub ladder: SpectralLadder,
    pub terms: Vec<ModeTerm>,
}

impl JacobiCoefficients {
    /// Terms are kept sorted by `j`; indices must exist, be unique and have real exponents.
    pub fn new(ladder: SpectralLadder, mut terms: Vec<ModeTerm>) -> Result<Self> {
        terms.sort_by_key(|t| t.j);
        for w in terms.windows(2) {
            if w[0].j == w[1].j {
                return Err(Error::Invalid(format!(
                    "duplicate term for mode j = {}",
                    w[0].j
                )));
            }
        }
        for t in &terms {
            let e = ladder.entry(t.j).ok_or_else(|| {
                Error::Invalid(format!(
                    "mode j = {} not in ladder of length {}",
                    t.j,
                    ladder.len()
                ))
            })?;
            if !e.gamma_plus.is_finite() {
                return Err(Error::UnstableCone {
                    mu: e.mu,
                    bound: -hardy_bound(ladder.n),
                });
            }
            if !(t.c_plus.is_finite() && t.c_minus.is_finite()) {
                return Err(Error::Invalid(format!(
                    "non-finite coefficient for mode j = {}",
                    t.j
                )));
            }
        }
        Ok(Self { ladder, terms })
    }

    pub fn zero(ladder: SpectralLadder) -> Self {
        Self {
            ladder,
            terms: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(ModeTerm::is_zero)
    }

    fn term(&self, j: usize) -> Option<&ModeTerm> {
        self.terms
            .binary_search_by_key(&j, |t| t.j)
            .ok()
            .map(|i| &self.terms[i])
    }
}

/// `v_j⁺(r) + v_j⁻(r)` for mode `j` (zero if the mode carries no term).
pub fn evaluate_radial(coeffs: &JacobiCoefficients, j: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let entry = coeffs
        .ladder
        .entry(j)
        .ok_or_else(|| Error::Invalid(format!("mode j = {j} not in ladder")))?;
    let Some(t) = coeffs.term(j) else {
        return Ok(0.0);
    };
    let plus = if t.c_plus == 0.0 {
        0.0
    } else {
        t.c_plus * r.powf(entry.gamma_plus)
    };
    let minus = if t.c_minus == 0.0 {
        0.0
    } else if entry.resonant {
        t.c_minus * r.powf(entry.gamma_minus) * r.ln()
    } else {
        t.c_minus * r.powf(entry.gamma_minus)
    };
    Ok(plus + minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub k: f64,
    pub gamma: f64,
    pub r: f64,
}

impl GrowthWindow {
    pub fn new(k: f64, gamma: f64, r: f64) -> Result<Self> {
        if !(k > 2.0 && k.is_finite()) {
            return Err(Error::Domain(format!("K must exceed 2, got {k}")));
        }
        if !(r > 0.0 && r.is_finite()) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "need r > 0 and finite gamma, got r = {r}, gamma = {gamma}"
            )));
        }
        Ok(Self { k, gamma, r })
    }
}

/// `J_K^γ(u; r) = Σ_j ∫_{r/K}^{r} t^{-1-2γ} v_j(t)² dt`.
pub fn growth_functional(coeffs: &JacobiCoefficients, w: &GrowthWindow) -> f64 {
    let base = w.r / w.k;
    coeffs
        .terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| {
            let e = coeffs.ladder.entry(t.j).expect("validated index");
            if e.resonant {
                closed_form_i_log(e.gamma_plus - w.gamma, t.c_plus, t.c_minus, base, w.k)
            } else {
                closed_form_i(
                    e.gamma_plus - w.gamma,
                    e.gamma_minus - w.gamma,
                    t.c_plus,
                    t.c_minus,
                    base,
                    w.k,
                )
            }
        })
        .sum()
}

/// Distance from `gamma` to `Γ(C) ∪ {-(n-2)/2}`, restricted to what is
/// needed to decide admissibility at `sigma`.
pub fn exponent_distance(gamma: f64, ladder: &SpectralLadder, sigma: f64) -> Result<f64> {
    let (lo, hi) = ladder.gamma_window;
    if lo > gamma - sigma || hi < gamma + sigma {
        return Err(Error::WindowTooSmall {
            lo,
            hi,
            need_lo: gamma - sigma,
            need_hi: gamma + sigma,
        });
    }
    let exps = asymptotic_exponents(ladder)?;
    Ok(exps
        .iter()
        .map(|x| (x.gamma - gamma).abs())
        .fold((gamma - resonant_exponent(ladder.n)).abs(), f64::min))
}

pub fn gamma_admissible(gamma: f64, ladder: &SpectralLadder, sigma: f64) -> Result<bool> {
    Ok(exponent_distance(gamma, ladder, sigma)? >= sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeScale {
    pub lhs: f64,
    pub strict: bool,
}

/// `J(K^{-2}) - 2J(K^{-1}) + J(1)`, assembled per mode from the quadratic-form
/// coefficients so that no large terms cancel.
pub fn three_scale_check(
    coeffs: &JacobiCoefficients,
    gamma: f64,
    k: f64,
    sigma: f64,
) -> Result<ThreeScale> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::Domain(format!("K must exceed 1, got {k}")));
    }
    let distance = exponent_distance(gamma, &coeffs.ladder, sigma)?;
    if distance < sigma {
        return Err(Error::InadmissibleGamma {
            gamma,
            distance,
            sigma,
        });
    }
    let base = k.powi(-3);
    let mut lhs = 0.0;
    for t in coeffs.terms.iter().filter(|t| !t.is_zero()) {
        let e = coeffs.ladder.entry(t.j).expect("validated index");
        lhs += if e.resonant {
            three_scale_log(e.gamma_plus - gamma, t.c_plus, t.c_minus, base, k)
        } else {
            let (a, b, c) = three_scale_form(e.gamma_plus - gamma, e.gamma_minus - gamma, base, k);
            a * t.c_plus * t.c_plus + 2.0 * b * t.c_plus * t.c_minus + c * t.c_minus * t.c_minus
        };
    }
    Ok(ThreeScale {
        lhs,
        strict: lhs > 0.0,
    })
}

/// Smallest exponent carried by a nonzero coefficient; `+∞` for the zero field.
pub fn asymptotic_rate(coeffs: &JacobiCoefficients) -> f64 {
    let mut rate = f64::INFINITY;
    for t in &coeffs.terms {
        let e = coeffs.ladder.entry(t.j).expect("validated index");
        if t.c_plus != 0.0 {
            rate = rate.min(e.gamma_plus);
        }
        if t.c_minus != 0.0 {
            rate = rate.min(e.gamma_minus);
        }
    }
    rate
}

pub fn is_slower_growth(coeffs: &JacobiCoefficients) -> Result<bool> {
    let g2 = coeffs.ladder.gamma2_plus()?;
    Ok(asymptotic_rate(coeffs) >= g2 - MERGE_TOL)
}

/// An estimated rate moved to the nearest point of `{-∞} ∪ Γ(C) ∪ [1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnappedRate {
    pub value: f64,
    pub residual: f64,
}

pub fn snap_rate(rate: f64, ladder: &SpectralLadder) -> Result<SnappedRate> {
    if rate.is_nan() {
        return Err(Error::Domain("rate is NaN".into()));
    }
    if rate == f64::NEG_INFINITY || rate >= 1.0 {
        return Ok(SnappedRate {
            value: rate,
            residual: 0.0,
        });
    }
    let (lo, hi) = ladder.gamma_window;
    if rate < lo || hi < rate {
        return Err(Error::WindowTooSmall {
            lo,
            hi,
            need_lo: rate,
            need_hi: rate,
        });
    }
    let mut best = SnappedRate {
        value: 1.0,
        residual: 1.0 - rate,
    };
    for x in asymptotic_exponents(ladder)? {
        let d = (x.gamma - rate).abs();
        if d < best.residual {
            best = SnappedRate {
                value: x.gamma,
                residual: d,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::spectrum::{cross_section_spectrum, ConeDescriptor};

    fn simons() -> SpectralLadder {
        cross_section_spectrum(&ConeDescriptor::simons(), 10.0).unwrap()
    }

    fn field(terms: &[(usize, f64, f64)]) -> JacobiCoefficients {
        let t = terms
            .iter()
            .map(|&(j, c_plus, c_minus)| ModeTerm { j, c_plus, c_minus })
            .collect();
        JacobiCoefficients::new(simons(), t).unwrap()
    }

    fn resonant_ladder() -> SpectralLadder {
        let cone = ConeDescriptor::custom("res", 7, vec![(-6.25, 1), (0.0, 8)], None).unwrap();
        cross_section_spectrum(&cone, 0.0).unwrap()
    }

    #[test]
    fn radial_values() {
        assert_eq!(
            evaluate_radial(&field(&[(1, 1.0, 0.0)]), 1, 2.0).unwrap(),
            0.25
        );
        let res = JacobiCoefficients::new(
            resonant_ladder(),
            vec![ModeTerm {
                j: 1,
                c_plus: 0.0,
                c_minus: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(evaluate_radial(&res, 1, 1.0).unwrap(), 0.0);
        let z = field(&[(2, 0.0, 0.0)]);
        assert_eq!(evaluate_radial(&z, 2, 0.3).unwrap(), 0.0);
        assert!(evaluate_radial(&z, 1, 0.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_terms() {
        let l = simons();
        assert!(JacobiCoefficients::new(
            l.clone(),
            vec![ModeTerm {
                j: 0,
                c_plus: 1.0,
                c_minus: 0.0
            }]
        )
        .is_err());
        let dup = vec![
            ModeTerm {
                j: 1,
                c_plus: 1.0,
                c_minus: 0.0
            };
            2
        ];
        assert!(JacobiCoefficients::new(l, dup).is_err());
    }

    #[test]
    fn growth_functional_examples() {
        let ladder = cross_section_spectrum(&ConeDescriptor::simons(), 10.0).unwrap();
        // Exponent equal to γ: integrand 1/t.
        let f = field(&[(1, 1.0, 0.0)]);
        let j = growth_functional(&f, &GrowthWindow::new(5.0, -2.0, 0.7).unwrap());
        assert!((j - 5f64.ln()).abs() < 1e-14);
        let j = growth_functional(&f, &GrowthWindow::new(2.5, -3.0, 1.0).unwrap());
        let want = (1.0 - 1.0 / 6.25) / 2.0;
        assert!((j - want).abs() < 1e-15);
        let w = GrowthWindow::new(3.0, -1.0, 0.5).unwrap();
        let a = growth_functional(&field(&[(1, 0.3, -0.7)]), &w);
        let b = growth_functional(&field(&[(3, 1.1, 0.2)]), &w);
        let ab = growth_functional(&field(&[(1, 0.3, -0.7), (3, 1.1, 0.2)]), &w);
        assert!((ab - a - b).abs() < 1e-12 * ab);
        assert_eq!(ladder.entries[0].gamma_plus, -2.0);
    }

    #[test]
    fn growth_functional_matches_quadrature_with_resonance() {
        let f = JacobiCoefficients::new(
            resonant_ladder(),
            vec![ModeTerm {
                j: 1,
                c_plus: 0.4,
                c_minus: -1.3,
            }],
        )
        .unwrap();
        let w = GrowthWindow::new(4.0, -1.0, 0.8).unwrap();
        let got = growth_functional(&f, &w);
        let want = integrate(
            |t: f64| {
                let v = evaluate_radial(&f, 1, t).unwrap();
                v * v * t.powf(-1.0 - 2.0 * w.gamma)
            },
            w.r / w.k,
            w.r,
            1e-300,
            1e-14,
            2000,
        )
        .value;
        assert!(((got - want) / want).abs() < 1e-12);
    }

    #[test]
    fn admissibility() {
        let l = simons();
        assert!(gamma_admissible(-1.0, &l, 0.5).unwrap());
        assert!(!gamma_admissible(-2.5, &l, 0.01).unwrap());
        assert!(!gamma_admissible(0.0, &l, 0.1).unwrap());
        let narrow = l.restrict_window(-3.0, 0.5);
        assert!(matches!(
            gamma_admissible(0.0, &narrow, 1.0),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn three_scale_examples() {
        let zero = field(&[]);
        assert_eq!(
            three_scale_check(&zero, -1.0, 6.0, 0.5).unwrap(),
            ThreeScale {
                lhs: 0.0,
                strict: false
            }
        );
        let one = field(&[(1, 1.0, 0.0)]);
        let out = three_scale_check(&one, -1.0, 6.0, 0.5).unwrap();
        assert!(out.strict);
        // Agrees with differencing the functional itself.
        let j = |r: f64| growth_functional(&one, &GrowthWindow::new(6.0, -1.0, r).unwrap());
        let direct = j(1.0 / 36.0) - 2.0 * j(1.0 / 6.0) + j(1.0);
        assert!(((out.lhs - direct) / direct).abs() < 1e-12);
        match three_scale_check(&one, 0.05, 6.0, 0.1) {
            Err(Error::InadmissibleGamma { distance, .. }) => {
                assert!((distance - 0.05).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rates() {
        assert_eq!(asymptotic_rate(&field(&[(2, 1.0, 0.0)])), 0.0);
        assert_eq!(
            asymptotic_rate(&field(&[(1, 0.0, 1.0), (2, 5.0, 0.0)])),
            -3.0
        );
        assert_eq!(asymptotic_rate(&field(&[])), f64::INFINITY);
        assert!(is_slower_growth(&field(&[(2, 1.0, 0.0)])).unwrap());
        assert!(!is_slower_growth(&field(&[(1, 1.0, 0.0), (2, 1.0, 0.0)])).unwrap());
        assert!(is_slower_growth(&field(&[])).unwrap());
    }

    #[test]
    fn snapping() {
        let l = simons();
        let s = snap_rate(-2.01, &l).unwrap();
        assert_eq!(s.value, -2.0);
        assert!((s.residual - 0.01).abs() < 1e-12);
        assert_eq!(snap_rate(1.7, &l).unwrap().value, 1.7);
        assert_eq!(snap_rate(0.8, &l).unwrap().value, 1.0);
        assert_eq!(
            snap_rate(f64::NEG_INFINITY, &l).unwrap().value,
            f64::NEG_INFINITY
        );
    }
}
