//! Radial reduction of the (perturbed) Jacobi equation on a cone.
//!
//! A mode `v(r) φ_j(ω)` with drift `b₀ = ε₀ p v'` (radial) and potential term
//! `b₁ = ε₁ p v` satisfies, in `t = log r`,
//!
//! ```text
//! (1 + ε₀p) v_tt + [(n-2)(1 + ε₀p) + ε₀ p_t] v_t - μ v + ε₁ p e^{2t} v = 0
//! ```
//!
//! which for `ε₀ = ε₁ = 0` is the constant-coefficient equation with
//! solutions `e^{γ^± t}`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Bounded perturbation shape in `t = log r`, sup-norm 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Profile {
    Constant,
    Bump { center_log_r: f64, width: f64 },
    Oscillating { frequency: f64 },
}

impl Profile {
    pub fn bump() -> Self {
        Profile::Bump {
            center_log_r: -3.0,
            width: 1.0,
        }
    }

    /// `(p(t), p'(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Profile::Constant => (1.0, 0.0),
            Profile::Bump {
                center_log_r,
                width,
            } => {
                let x = (t - center_log_r) / width;
                let p = (-x * x).exp();
                (p, -2.0 * x / width * p)
            }
            Profile::Oscillating { frequency } => {
                ((frequency * t).sin(), frequency * (frequency * t).cos())
            }
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Profile::Constant),
            "bump" => Ok(Profile::bump()),
            "oscillating" => Ok(Profile::Oscillating { frequency: 3.0 }),
            other => Err(Error::Invalid(format!("unknown profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedRadialProblem {
    pub mu: f64,
    pub n: u32,
    pub b0_scale: f64,
    pub b1_scale: f64,
    pub profile: Profile,
}

impl PerturbedRadialProblem {
    pub fn unperturbed(mu: f64, n: u32) -> Self {
        Self {
            mu,
            n,
            b0_scale: 0.0,
            b1_scale: 0.0,
            profile: Profile::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("b0_scale", self.b0_scale), ("b1_scale", self.b1_scale)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {s}")));
            }
        }
        if self.n < 2 || !self.mu.is_finite() {
            return Err(Error::Domain(format!(
                "need n >= 2 and finite mu, got n = {}, mu = {}",
                self.n, self.mu
            )));
        }
        Ok(())
    }

    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let (p, pt) = self.profile.eval(t);
        let w = 1.0 + self.b0_scale * p;
        let drift = (f64::from(self.n) - 2.0) * w + self.b0_scale * pt;
        let potential = self.mu - self.b1_scale * p * (2.0 * t).exp();
        [y[1], (potential * y[0] - drift * y[1]) / w]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of the output grid in `t = log r`.
    pub output_dt: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            output_dt: 0.01,
        }
    }
}

/// Samples of a radial profile on a log-uniform grid, ordered by increasing `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: u32,
    pub log_r: Vec<f64>,
    pub v: Vec<f64>,
    /// `dv/d(log r) = r v'(r)`.
    pub v_t: Vec<f64>,
}

impl RadialProfile {
    /// Samples `v(r)` given `v` and `r v'` as functions of `t = log r`.
    pub fn from_fn(n: u32, r_min: f64, dt: f64, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let t_min = r_min.ln();
        let count = (-t_min / dt).ceil() as usize;
        let mut log_r: Vec<f64> = (0..=count)
            .map(|i| (t_min + i as f64 * dt).min(0.0))
            .collect();
        log_r.dedup();
        let (v, v_t) = log_r.iter().map(|&t| f(t)).unzip();
        Self { n, log_r, v, v_t }
    }

    pub fn r(&self) -> Vec<f64> {
        self.log_r.iter().map(|t| t.exp()).collect()
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.log_r[0].exp(), self.log_r[self.log_r.len() - 1].exp())
    }

    /// Cubic Hermite interpolation in `t = log r`.
    pub fn value_at_log_r(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (t0, t1) = (self.log_r[i], self.log_r[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.v[i]
            + (s3 - 2.0 * s2 + s) * h * self.v_t[i]
            + (-2.0 * s3 + 3.0 * s2) * self.v[i + 1]
            + (s3 - s2) * h * self.v_t[i + 1]
    }

    fn segment(&self, t: f64) -> usize {
        let last = self.log_r.len() - 2;
        match self.log_r.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    fn check_covers(&self, lo: f64, hi: f64) -> Result<()> {
        let (a, b) = self.r_range();
        let slack = 1e-12;
        if a > lo * (1.0 + slack) || b < hi * (1.0 - slack) {
            return Err(Error::ProfileCoverage {
                lo: a,
                hi: b,
                need_lo: lo,
                need_hi: hi,
            });
        }
        Ok(())
    }

    /// `∫_{t0}^{t1} g(v(e^u), u) du`, one adaptive rule per grid segment.
    fn integrate_log(&self, t0: f64, t1: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut a = t0;
        while a < t1 {
            let i = self.segment(a);
            let b = self.log_r[i + 1].min(t1);
            let b = if b <= a { t1 } else { b };
            acc += integrate(|u| g(self.value_at_log_r(u), u), a, b, 1e-300, 1e-13, 50).value;
            a = b;
        }
        acc
    }

    /// `∫_s^{2s} v(t)² t^{n-1} dt`, the squared annulus norm of a single mode.
    pub fn annulus_norm_sq(&self, s: f64) -> Result<f64> {
        self.check_covers(s, 2.0 * s)?;
        let n = f64::from(self.n);
        Ok(self.integrate_log(s.ln(), (2.0 * s).ln(), |v, u| v * v * (n * u).exp()))
    }

    /// `J_K^γ(v; r) = ∫_{r/K}^{r} v(t)² t^{-1-2γ} dt`.
    pub fn growth_functional(&self, gamma: f64, k: f64, r: f64) -> Result<f64> {
        self.check_covers(r / k, r)?;
        Ok(self.integrate_log(r.ln() - k.ln(), r.ln(), |v, u| {
            v * v * (-2.0 * gamma * u).exp()
        }))
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step(
    f: &impl Fn(f64, [f64; 2]) -> [f64; 2],
    t: f64,
    y: [f64; 2],
    h: f64,
) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (m, a) in A[s].iter().enumerate().take(s) {
            ys[0] += h * a * k[m][0];
            ys[1] += h * a * k[m][1];
        }
        k[s] = f(t + C[s] * h, ys);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for d in 0..2 {
            y5[d] += h * B5[s] * k[s][d];
            err[d] += h * (B5[s] - B4[s]) * k[s][d];
        }
    }
    (y5, err)
}

/// Integrate from `r = 1` with `(v, v')` given there down to `r_min`.
pub fn solve_radial_jacobi(
    problem: &PerturbedRadialProblem,
    initial: (f64, f64),
    r_min: f64,
) -> Result<RadialProfile> {
    solve_radial_jacobi_with(problem, initial, r_min, SolverOptions::default())
}

pub fn solve_radial_jacobi_with(
    problem: &PerturbedRadialProblem,
    initial: (f64, f64),
    r_min: f64,
    opts: SolverOptions,
) -> Result<RadialProfile> {
    problem.validate()?;
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::Domain(format!(
            "r_min must lie in (0, 1), got {r_min}"
        )));
    }
    let f = |t: f64, y: [f64; 2]| problem.rhs(t, y);
    let t_end = r_min.ln();
    let count = (-t_end / opts.output_dt).ceil() as usize;
    let targets: Vec<f64> = (1..=count)
        .map(|i| (-(i as f64) * opts.output_dt).max(t_end))
        .collect();

    // At r = 1, d/dt = d/dr.
    let mut y = [initial.0, initial.1];
    let mut t = 0.0;
    let mut log_r = vec![0.0];
    let mut vs = vec![y[0]];
    let mut vts = vec![y[1]];
    let mut h = -opts.output_dt / 4.0;
    for &target in &targets {
        while t > target {
            // Land on the output point when the step would reach it or stop just short.
            let clipped = t + h - target <= 1e-6 * h.abs();
            let step = if clipped { target - t } else { h };
            let (y_new, err) = dopri_step(&f, t, y, step);
            let mut norm: f64 = 0.0;
            for d in 0..2 {
                let sc = opts.atol + opts.rtol * y[d].abs().max(y_new[d].abs());
                norm = norm.max((err[d] / sc).abs());
            }
            if !(y_new[0].is_finite() && y_new[1].is_finite()) || y_new[0].abs() > 1e300 {
                return Err(Error::BlowUp {
                    last_good_r: t.exp(),
                });
            }
            if norm <= 1.0 {
                t = if clipped { target } else { t + step };
                y = y_new;
            }
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            // A clipped step says nothing about the size the controller wanted.
            h = (if clipped { h } else { step } * factor).max(-opts.output_dt);
            if h.abs() < 1e-14 {
                return Err(Error::BlowUp {
                    last_good_r: t.exp(),
                });
            }
        }
        log_r.push(t);
        vs.push(y[0]);
        vts.push(y[1]);
    }
    log_r.reverse();
    vs.reverse();
    vts.reverse();
    Ok(RadialProfile {
        n: problem.n,
        log_r,
        v: vs,
        v_t: vts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityOutcome {
    pub lhs: f64,
    pub strict: bool,
}

/// `J(K^{-2}) - 2(1+ε) J(K^{-1}) + J(1) > 0` evaluated by quadrature on the profile.
pub fn perturbed_convexity_check(
    profile: &RadialProfile,
    gamma: f64,
    k: f64,
    eps: f64,
) -> Result<ConvexityOutcome> {
    let n = f64::from(profile.n);
    if !(gamma > 1.0 - n && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "gamma must lie in ({}, 1), got {gamma}",
            1.0 - n
        )));
    }
    if !(k > 1.0) || !(eps >= 0.0) {
        return Err(Error::Domain(format!(
            "need K > 1 and eps >= 0, got K = {k}, eps = {eps}"
        )));
    }
    profile.check_covers(k.powi(-3), 1.0)?;
    let j = |r: f64| profile.growth_functional(gamma, k, r);
    let lhs = j(k.powi(-2))? - 2.0 * (1.0 + eps) * j(1.0 / k)? + j(1.0)?;
    Ok(ConvexityOutcome {
        lhs,
        strict: lhs > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::rate::{estimate_rate_from_samples, geometric_radii};

    fn max_rel_err(p: &RadialProfile, exact: impl Fn(f64) -> f64) -> f64 {
        p.log_r
            .iter()
            .zip(&p.v)
            .map(|(&t, &v)| ((v - exact(t.exp())) / exact(t.exp())).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn reproduces_both_indicial_solutions() {
        let prob = PerturbedRadialProblem::unperturbed(-6.0, 7);
        let p = solve_radial_jacobi(&prob, (1.0, -2.0), 0.01).unwrap();
        assert!(max_rel_err(&p, |r| r.powi(-2)) < 1e-8);
        assert!((p.r_range().0 - 0.01).abs() < 1e-15);
        let p = solve_radial_jacobi(&prob, (1.0, -3.0), 0.01).unwrap();
        assert!(max_rel_err(&p, |r| r.powi(-3)) < 1e-8);
    }

    #[test]
    fn mixed_initial_data() {
        // v = 2r^{-2} - r^{-3}: v(1) = 1, v'(1) = -4 + 3.
        let prob = PerturbedRadialProblem::unperturbed(-6.0, 7);
        let p = solve_radial_jacobi(&prob, (1.0, -1.0), 0.05).unwrap();
        assert!(max_rel_err(&p, |r| 2.0 * r.powi(-2) - r.powi(-3)) < 1e-8);
    }

    #[test]
    fn rate_recovered_from_solution() {
        let prob = PerturbedRadialProblem::unperturbed(-6.0, 7);
        let p = solve_radial_jacobi(&prob, (1.0, -2.0), 0.001).unwrap();
        let samples: Vec<(f64, f64)> = geometric_radii(0.4, 0.5, 8)
            .into_iter()
            .map(|s| (s, p.annulus_norm_sq(s).unwrap()))
            .collect();
        let rate = estimate_rate_from_samples(&samples, 7).unwrap();
        assert!((rate + 2.0).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn interpolation_is_accurate() {
        let p = RadialProfile::from_fn(7, 0.01, 0.01, |t| {
            ((-2.0 * t).exp(), -2.0 * (-2.0 * t).exp())
        });
        for &t in &[-4.0, -2.345, -0.0051] {
            let want = (-2.0f64 * t).exp();
            assert!(((p.value_at_log_r(t) - want) / want).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let prob = PerturbedRadialProblem::unperturbed(1e6, 7);
        match solve_radial_jacobi(&prob, (1.0, 0.0), 1e-300) {
            Err(Error::BlowUp { last_good_r }) => {
                assert!(last_good_r < 1.0 && last_good_r > 1e-300)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn convexity_on_exact_and_perturbed_profiles() {
        let exact = RadialProfile::from_fn(7, 0.004, 0.01, |t| {
            ((-2.0 * t).exp(), -2.0 * (-2.0 * t).exp())
        });
        assert!(
            perturbed_convexity_check(&exact, -1.0, 6.0, 0.0)
                .unwrap()
                .strict
        );
        let zero = RadialProfile::from_fn(7, 0.004, 0.01, |_| (0.0, 0.0));
        assert!(
            !perturbed_convexity_check(&zero, -1.0, 6.0, 0.0)
                .unwrap()
                .strict
        );
        for (scale, profile) in [
            (0.05, Profile::bump()),
            (0.02, Profile::Oscillating { frequency: 3.0 }),
        ] {
            let prob = PerturbedRadialProblem {
                mu: -6.0,
                n: 7,
                b0_scale: scale,
                b1_scale: scale,
                profile,
            };
            let sol = solve_radial_jacobi(&prob, (1.0, -2.0), 0.004).unwrap();
            assert!(
                perturbed_convexity_check(&sol, -1.0, 6.0, scale)
                    .unwrap()
                    .strict
            );
        }
        assert!(matches!(
            perturbed_convexity_check(&exact, -1.0, 7.0, 0.0),
            Err(Error::ProfileCoverage { .. })
        ));
        assert!(perturbed_convexity_check(&exact, 1.5, 6.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_agreement_of_profile_functional() {
        let exact = RadialProfile::from_fn(7, 0.004, 0.01, |t| {
            ((-2.0 * t).exp(), -2.0 * (-2.0 * t).exp())
        });
        // v² t^{-1-2γ} = t^{-3} at γ = -1.
        let got = exact.growth_functional(-1.0, 6.0, 1.0).unwrap();
        let want = (36.0 - 1.0) / 2.0;
        assert!(((got - want) / want).abs() < 1e-8);
    }
}
