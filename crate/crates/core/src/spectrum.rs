//! Cross-section spectra of stable minimal hypercones.
//!
//! A regular cone `C ⊂ R^{n+1}` with cross-section `S = C ∩ S^n` has Jacobi
//! operator `∂_r² + (n-1)/r ∂_r + r^{-2}(Δ_S + |A_S|²)`. Separating variables
//! against the eigenfunctions of `-(Δ_S + |A_S|²)` (eigenvalues `μ_j`) turns
//! each mode into an Euler equation whose indicial roots are
//!
//! ```text
//! γ_j^± = -(n-2)/2 ± sqrt(μ_j + (n-2)²/4)
//! ```
//!
//! The product-sphere family `S^p(a) × S^q(b)` with `a² = p/(p+q)` has an
//! explicit spectrum built from the unit-sphere Laplacian spectra, so it is
//! the analytic family implemented here. Anything else enters as a
//! user-supplied spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two product-formula eigenvalues closer than this are the same eigenvalue.
pub const MERGE_TOL: f64 = 1e-9;

/// `|μ + (n-2)²/4|` at or below this is treated as the resonant case.
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeKind {
    ProductSphere {
        p: u32,
        q: u32,
    },
    CustomSpectrum {
        n: u32,
        entries: Vec<(f64, u64)>,
        density: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescriptor {
    pub label: String,
    pub kind: ConeKind,
}

impl ConeDescriptor {
    pub fn product_sphere(p: u32, q: u32) -> Result<Self> {
        let cone = Self {
            label: format!("S{p}xS{q}"),
            kind: ConeKind::ProductSphere { p, q },
        };
        cone.validate()?;
        Ok(cone)
    }

    /// The Simons cone over `S^3(1/√2) × S^3(1/√2)`.
    pub fn simons() -> Self {
        Self {
            label: "simons".into(),
            kind: ConeKind::ProductSphere { p: 3, q: 3 },
        }
    }

    pub fn custom(
        label: &str,
        n: u32,
        entries: Vec<(f64, u64)>,
        density: Option<f64>,
    ) -> Result<Self> {
        let cone = Self {
            label: label.into(),
            kind: ConeKind::CustomSpectrum {
                n,
                entries,
                density,
            },
        };
        cone.validate()?;
        Ok(cone)
    }

    /// Cone dimension `n`; the ambient space is `R^{n+1}`.
    pub fn dim(&self) -> u32 {
        match &self.kind {
            ConeKind::ProductSphere { p, q } => p + q + 1,
            ConeKind::CustomSpectrum { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ConeKind::ProductSphere { p, q } => {
                if *p < 1 || *q < 1 {
                    return Err(Error::InvalidCone(format!(
                        "product sphere needs p, q >= 1 (got p = {p}, q = {q})"
                    )));
                }
            }
            ConeKind::CustomSpectrum {
                n,
                entries,
                density,
            } => {
                if *n < 2 {
                    return Err(Error::InvalidCone(format!("cone dimension n = {n} < 2")));
                }
                for (i, (mu, mult)) in entries.iter().enumerate() {
                    if !mu.is_finite() {
                        return Err(Error::InvalidCone(format!("entry {i}: mu is not finite")));
                    }
                    if *mult < 1 {
                        return Err(Error::InvalidCone(format!("entry {i}: multiplicity 0")));
                    }
                    if i > 0 && *mu <= entries[i - 1].0 {
                        return Err(Error::SpectrumNotSorted { index: i });
                    }
                }
                if let Some(d) = density {
                    if !(d.is_finite() && *d >= 1.0) {
                        return Err(Error::InvalidCone(format!("density {d} must be >= 1")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Squared radii `(a², b²)` of the minimal product `S^p(a) × S^q(b) ⊂ S^{p+q+1}`.
    pub fn product_radii_sq(&self) -> Option<(f64, f64)> {
        match self.kind {
            ConeKind::ProductSphere { p, q } => {
                let s = f64::from(p + q);
                Some((f64::from(p) / s, f64::from(q) / s))
            }
            ConeKind::CustomSpectrum { .. } => None,
        }
    }
}

/// Which root of the indicial equation an exponent comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderEntry {
    pub mu: f64,
    pub multiplicity: u64,
    /// NaN when `μ < -(n-2)²/4` (complex roots).
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub resonant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLadder {
    pub n: u32,
    pub entries: Vec<LadderEntry>,
    /// Closed interval of exponents that are fully materialized. Empty when `lo > hi`.
    pub gamma_window: (f64, f64),
}

/// `(n-2)²/4`, the stability bound on `-μ_1`.
pub fn hardy_bound(n: u32) -> f64 {
    let m = f64::from(n) - 2.0;
    m * m / 4.0
}

/// The midpoint exponent `-(n-2)/2` where the two indicial roots meet.
pub fn resonant_exponent(n: u32) -> f64 {
    -(f64::from(n) - 2.0) / 2.0
}

/// Roots of `γ(γ + n - 2) = μ`. Returns NaN for both when the roots are complex.
pub fn indicial_roots(mu: f64, n: u32) -> (f64, f64) {
    let disc = mu + hardy_bound(n);
    let mid = resonant_exponent(n);
    if disc.abs() <= RESONANCE_TOL {
        return (mid, mid);
    }
    if disc < 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let s = disc.sqrt();
    (mid + s, mid - s)
}

impl LadderEntry {
    pub fn new(mu: f64, multiplicity: u64, n: u32) -> Self {
        let (gamma_plus, gamma_minus) = indicial_roots(mu, n);
        Self {
            mu,
            multiplicity,
            gamma_plus,
            gamma_minus,
            resonant: (mu + hardy_bound(n)).abs() <= RESONANCE_TOL,
        }
    }

    pub fn exponent(&self, origin: Origin) -> f64 {
        match origin {
            Origin::Plus => self.gamma_plus,
            Origin::Minus => self.gamma_minus,
        }
    }
}

impl SpectralLadder {
    fn from_entries(n: u32, entries: Vec<LadderEntry>, mu_top: f64) -> Self {
        let gamma_window = if mu_top + hardy_bound(n) >= -RESONANCE_TOL {
            let (hi, lo) = indicial_roots(mu_top.max(-hardy_bound(n)), n);
            (lo, hi)
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        };
        Self {
            n,
            entries,
            gamma_window,
        }
    }

    /// 1-based access, matching the `μ_1 < μ_2 ≤ …` indexing.
    pub fn entry(&self, j: usize) -> Option<&LadderEntry> {
        j.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Shrink the materialized window to `[lo, hi] ∩ current`.
    pub fn restrict_window(mut self, lo: f64, hi: f64) -> Self {
        self.gamma_window = (self.gamma_window.0.max(lo), self.gamma_window.1.min(hi));
        self
    }

    pub fn is_stable(&self) -> bool {
        self.entries
            .first()
            .is_some_and(|e| e.mu + hardy_bound(self.n) >= -RESONANCE_TOL)
    }

    /// Least `γ^+` and the next distinct value, if any.
    pub fn leading_plus_exponents(&self) -> (Option<f64>, Option<f64>) {
        let mut it = self
            .entries
            .iter()
            .map(|e| e.gamma_plus)
            .filter(|g| g.is_finite());
        let first = it.next();
        let second = first.and_then(|g1| it.find(|g| *g > g1 + MERGE_TOL));
        (first, second)
    }

    /// `γ_2^+`: the exponent of the smallest eigenvalue strictly above `μ_1`.
    pub fn gamma2_plus(&self) -> Result<f64> {
        self.leading_plus_exponents()
            .1
            .ok_or(Error::NoSecondExponent)
    }
}

/// Dimension of degree-`m` spherical harmonics on `S^d`.
pub fn harmonic_dimension(d: u32, m: u32) -> u64 {
    fn binom(n: i64, k: i64) -> u64 {
        if n < k || k < 0 || n < 0 {
            return 0;
        }
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as u64
    }
    let (d, m) = (i64::from(d), i64::from(m));
    binom(m + d, d) - binom(m + d - 2, d)
}

/// Eigenvalue `m(m + d - 1)` of `-Δ` on the unit `S^d`.
pub fn sphere_laplacian_eigenvalue(d: u32, m: u32) -> f64 {
    let (d, m) = (f64::from(d), f64::from(m));
    m * (m + d - 1.0)
}

/// All eigenvalues `μ ≤ mu_max` of `-(Δ_S + |A_S|²)` with multiplicities.
pub fn cross_section_spectrum(cone: &ConeDescriptor, mu_max: f64) -> Result<SpectralLadder> {
    if !mu_max.is_finite() {
        return Err(Error::Domain(format!(
            "mu_max must be finite, got {mu_max}"
        )));
    }
    cone.validate()?;
    let n = cone.dim();
    match &cone.kind {
        ConeKind::ProductSphere { p, q } => {
            let (a2, b2) = cone.product_radii_sq().expect("product sphere");
            // |A_S|² = p (b/a)² + q (a/b)² = p + q on the minimal product.
            let a_sq = f64::from(*p) * b2 / a2 + f64::from(*q) * a2 / b2;
            let mut raw: Vec<(f64, u64)> = Vec::new();
            let mut k = 0u32;
            loop {
                let lk = sphere_laplacian_eigenvalue(*p, k) / a2;
                if lk - a_sq > mu_max + MERGE_TOL {
                    break;
                }
                let mut l = 0u32;
                loop {
                    let mu = lk + sphere_laplacian_eigenvalue(*q, l) / b2 - a_sq;
                    if mu > mu_max + MERGE_TOL {
                        break;
                    }
                    raw.push((mu, harmonic_dimension(*p, k) * harmonic_dimension(*q, l)));
                    l += 1;
                }
                k += 1;
            }
            raw.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut merged: Vec<(f64, u64)> = Vec::new();
            for (mu, mult) in raw {
                match merged.last_mut() {
                    Some(last) if (mu - last.0).abs() <= MERGE_TOL => last.1 += mult,
                    _ => merged.push((mu, mult)),
                }
            }
            if merged.is_empty() {
                return Err(Error::EmptyLadder { mu_max });
            }
            // Snap values that are integers up to rounding (the common case).
            let entries = merged
                .into_iter()
                .map(|(mu, mult)| {
                    let snapped = if (mu - mu.round()).abs() <= MERGE_TOL {
                        mu.round()
                    } else {
                        mu
                    };
                    LadderEntry::new(snapped, mult, n)
                })
                .collect();
            Ok(SpectralLadder::from_entries(n, entries, mu_max))
        }
        ConeKind::CustomSpectrum { entries, .. } => {
            let kept: Vec<LadderEntry> = entries
                .iter()
                .filter(|(mu, _)| *mu <= mu_max)
                .map(|&(mu, mult)| LadderEntry::new(mu, mult, n))
                .collect();
            let Some(last) = kept.last() else {
                return Err(Error::EmptyLadder { mu_max });
            };
            // Only what the user listed is known to be complete.
            let top = if kept.len() < entries.len() {
                mu_max
            } else {
                last.mu
            };
            Ok(SpectralLadder::from_entries(n, kept, top))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub gamma: f64,
    pub origin: Origin,
    /// 1-based ladder index.
    pub j: usize,
}

/// The materialized part of `Γ(C)`, sorted ascending (ties keep ladder order, plus first).
pub fn asymptotic_exponents(ladder: &SpectralLadder) -> Result<Vec<Exponent>> {
    let bound = hardy_bound(ladder.n);
    for e in &ladder.entries {
        if e.mu + bound < -RESONANCE_TOL {
            return Err(Error::UnstableCone {
                mu: e.mu,
                bound: -bound,
            });
        }
    }
    let (lo, hi) = ladder.gamma_window;
    let mut out: Vec<Exponent> = ladder
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, e)| {
            [
                Exponent {
                    gamma: e.gamma_plus,
                    origin: Origin::Plus,
                    j: i + 1,
                },
                Exponent {
                    gamma: e.gamma_minus,
                    origin: Origin::Minus,
                    j: i + 1,
                },
            ]
        })
        .filter(|x| x.gamma >= lo - MERGE_TOL && x.gamma <= hi + MERGE_TOL)
        .collect();
    out.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.j.cmp(&b.j)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// `μ_1 + (n-2)²/4`.
    pub margin: f64,
    pub mu1: f64,
    /// NaN when the ladder has a single entry.
    pub mu2: f64,
    /// `γ_2^+ - γ_1^+`; `+∞` when there is no second distinct value, NaN when unstable.
    pub gamma_gap: f64,
    /// `μ_1 ≤ -n + 1` and `μ_2 ≤ 0`.
    pub nontrivial_constraints_ok: bool,
}

pub fn stability_report(ladder: &SpectralLadder) -> Result<StabilityReport> {
    let first = ladder
        .entries
        .first()
        .ok_or(Error::EmptyLadder { mu_max: f64::NAN })?;
    let n = ladder.n;
    let margin = first.mu + hardy_bound(n);
    let stable = margin >= -RESONANCE_TOL;
    let mu2 = ladder.entries.get(1).map_or(f64::NAN, |e| e.mu);
    let gamma_gap = if !stable {
        f64::NAN
    } else {
        match ladder.leading_plus_exponents() {
            (Some(g1), Some(g2)) => g2 - g1,
            _ => f64::INFINITY,
        }
    };
    let tol = 1e-12;
    let nontrivial_constraints_ok = first.mu <= -(f64::from(n) - 1.0) + tol && mu2 <= tol;
    Ok(StabilityReport {
        stable,
        margin,
        mu1: first.mu,
        mu2,
        gamma_gap,
        nontrivial_constraints_ok,
    })
}

/// `Γ(x)` at positive integers and half-integers, exact recursion.
fn gamma_half_integer(two_x: u32) -> f64 {
    assert!(two_x >= 1);
    let (mut acc, mut t) = if two_x.is_multiple_of(2) {
        (1.0, 2u32)
    } else {
        (PI.sqrt(), 1u32)
    };
    while t < two_x {
        acc *= f64::from(t) / 2.0;
        t += 2;
    }
    acc
}

/// Area of the unit sphere `S^d ⊂ R^{d+1}`.
pub fn unit_sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(f64::from(d + 1) / 2.0) / gamma_half_integer(d + 1)
}

/// Volume `ω_n` of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    unit_sphere_area(n - 1) / f64::from(n)
}

/// Density at the vertex of the cone over a cross-section of `(n-1)`-area `area`.
pub fn density_from_cross_section(area: f64, n: u32) -> f64 {
    // n ω_n = |S^{n-1}|
    area / unit_sphere_area(n - 1)
}

pub fn cone_density(cone: &ConeDescriptor) -> Result<f64> {
    cone.validate()?;
    match &cone.kind {
        ConeKind::ProductSphere { p, q } => {
            let (a2, b2) = cone.product_radii_sq().expect("product sphere");
            let area = a2.powf(f64::from(*p) / 2.0)
                * b2.powf(f64::from(*q) / 2.0)
                * unit_sphere_area(*p)
                * unit_sphere_area(*q);
            Ok(density_from_cross_section(area, cone.dim()))
        }
        ConeKind::CustomSpectrum { density, .. } => {
            density.ok_or_else(|| Error::DensityUnavailable(cone.label.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: enumerate `(k, l)` pairs over a generous box, no pruning.
    fn enumerate_product(p: u32, q: u32, mu_max: f64) -> Vec<(f64, u64)> {
        let s = f64::from(p + q);
        let (a2, b2) = (f64::from(p) / s, f64::from(q) / s);
        let mut all = Vec::new();
        for k in 0..40u32 {
            for l in 0..40u32 {
                let mu = f64::from(k) * f64::from(k + p - 1) / a2
                    + f64::from(l) * f64::from(l + q - 1) / b2
                    - s;
                if mu <= mu_max + 1e-9 {
                    all.push((mu, harmonic_dimension(p, k) * harmonic_dimension(q, l)));
                }
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, u64)> = Vec::new();
        for (mu, m) in all {
            match merged.last_mut() {
                Some(x) if (x.0 - mu).abs() < 1e-9 => x.1 += m,
                _ => merged.push((mu, m)),
            }
        }
        merged
    }

    #[test]
    fn harmonic_dimensions_match_known_values() {
        assert_eq!(harmonic_dimension(1, 0), 1);
        assert_eq!(harmonic_dimension(1, 3), 2);
        assert_eq!(harmonic_dimension(2, 2), 5);
        assert_eq!(harmonic_dimension(3, 1), 4);
        assert_eq!(harmonic_dimension(3, 2), 9);
        assert_eq!(harmonic_dimension(5, 1), 6);
    }

    #[test]
    fn simons_spectrum_head() {
        let ladder = cross_section_spectrum(&ConeDescriptor::simons(), 10.0).unwrap();
        let head: Vec<(f64, u64)> = ladder
            .entries
            .iter()
            .map(|e| (e.mu, e.multiplicity))
            .collect();
        assert_eq!(head, enumerate_product(3, 3, 10.0));
        assert_eq!(head[0], (-6.0, 1));
        assert_eq!(head[1], (0.0, 8));
        assert_eq!(head[2].0, 6.0);
        // 2k(k+2) + 2l(l+2) - 6 = 6 at (1,1): 4 * 4 = 16.
        assert_eq!(head[2].1, 16);
    }

    #[test]
    fn s1_s5_spectrum_matches_enumeration() {
        let cone = ConeDescriptor::product_sphere(1, 5).unwrap();
        let ladder = cross_section_spectrum(&cone, 1.0).unwrap();
        let got: Vec<(f64, u64)> = ladder
            .entries
            .iter()
            .map(|e| (e.mu, e.multiplicity))
            .collect();
        let want = enumerate_product(1, 5, 1.0);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() < 1e-12);
            assert_eq!(g.1, w.1);
        }
        assert_eq!(got[0], (-6.0, 1));
        assert_eq!(got[1].0, 0.0);
    }

    #[test]
    fn resonant_custom_entry() {
        let cone = ConeDescriptor::custom("res", 7, vec![(-6.25, 1)], None).unwrap();
        let ladder = cross_section_spectrum(&cone, 0.0).unwrap();
        let e = ladder.entries[0];
        assert!(e.resonant);
        assert_eq!((e.gamma_plus, e.gamma_minus), (-2.5, -2.5));
    }

    #[test]
    fn empty_ladder_and_unsorted_errors() {
        let err = cross_section_spectrum(&ConeDescriptor::simons(), -7.0).unwrap_err();
        assert!(matches!(err, Error::EmptyLadder { .. }));
        let err = ConeDescriptor::custom("dup", 7, vec![(-6.0, 1), (-6.0, 2)], None).unwrap_err();
        assert_eq!(err, Error::SpectrumNotSorted { index: 1 });
        assert!(ConeDescriptor::product_sphere(0, 3).is_err());
    }

    #[test]
    fn simons_exponents() {
        let ladder = cross_section_spectrum(&ConeDescriptor::simons(), 6.0).unwrap();
        let ex = asymptotic_exponents(&ladder).unwrap();
        let gammas: Vec<f64> = ex.iter().map(|e| e.gamma).collect();
        assert_eq!(gammas, vec![-6.0, -5.0, -3.0, -2.0, 0.0, 1.0]);
        assert!(!gammas.contains(&-2.5));
        let zero = ex.iter().find(|e| e.gamma == 0.0).unwrap();
        assert_eq!((zero.origin, zero.j), (Origin::Plus, 2));
    }

    #[test]
    fn single_mode_and_empty_window() {
        let cone = ConeDescriptor::custom("z", 7, vec![(0.0, 1)], None).unwrap();
        let ladder = cross_section_spectrum(&cone, 1.0).unwrap();
        let ex = asymptotic_exponents(&ladder).unwrap();
        assert_eq!(
            ex.iter().map(|e| e.gamma).collect::<Vec<_>>(),
            vec![-5.0, 0.0]
        );
        let narrowed = ladder.restrict_window(1.0, -1.0);
        assert!(asymptotic_exponents(&narrowed).unwrap().is_empty());
    }

    #[test]
    fn unstable_cone_rejected() {
        let cone = ConeDescriptor::custom("u", 7, vec![(-7.0, 1), (0.0, 8)], None).unwrap();
        let ladder = cross_section_spectrum(&cone, 1.0).unwrap();
        assert!(matches!(
            asymptotic_exponents(&ladder),
            Err(Error::UnstableCone { .. })
        ));
        assert!(!stability_report(&ladder).unwrap().stable);
    }

    #[test]
    fn simons_stability() {
        let ladder = cross_section_spectrum(&ConeDescriptor::simons(), 10.0).unwrap();
        let r = stability_report(&ladder).unwrap();
        assert!(r.stable);
        assert_eq!(r.margin, 0.25);
        assert_eq!(r.gamma_gap, 2.0);
        assert!(r.nontrivial_constraints_ok);
    }

    #[test]
    fn single_entry_gap_is_infinite() {
        let cone = ConeDescriptor::custom("one", 7, vec![(-6.0, 1)], None).unwrap();
        let ladder = cross_section_spectrum(&cone, 0.0).unwrap();
        assert_eq!(stability_report(&ladder).unwrap().gamma_gap, f64::INFINITY);
    }

    #[test]
    fn densities() {
        let n = 7;
        let hyperplane = density_from_cross_section(unit_sphere_area(n - 1), n);
        assert_eq!(hyperplane, 1.0);
        let simons = cone_density(&ConeDescriptor::simons()).unwrap();
        assert!((simons - 105.0 * PI / 224.0).abs() < 1e-12);
        let other = cone_density(&ConeDescriptor::product_sphere(1, 5).unwrap()).unwrap();
        assert!(other > 1.0);
        let custom = ConeDescriptor::custom("c", 7, vec![(-6.0, 1)], None).unwrap();
        assert!(matches!(
            cone_density(&custom),
            Err(Error::DensityUnavailable(_))
        ));
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_ball_volume(7) - 16.0 * PI.powi(3) / 105.0).abs() < 1e-13);
    }
}
