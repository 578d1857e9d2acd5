//! Covering-cell indexers for the countable decomposition argument.
//!
//! The base manifold is the cube `[-1, 1]^d`. Each ball family is an
//! implicit cubic lattice of centres with spacing `2ρ/√d`, so every point of
//! the cube lies in some ball of radius `ρ`. A ball id is its lattice index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trees::tree::ConeMetric;

/// Index `k` with `base^k ≤ value < base^(k+1)`.
pub fn interval_index(value: f64, base: f64) -> Result<i64> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Domain(format!(
            "interval index needs a positive value, got {value}"
        )));
    }
    if !(base > 1.0) {
        return Err(Error::Domain(format!(
            "interval base must exceed 1, got {base}"
        )));
    }
    let mut k = (value.ln() / base.ln()).floor() as i64;
    while base.powi(k as i32) > value {
        k -= 1;
    }
    while base.powi(k as i32 + 1) <= value {
        k += 1;
    }
    Ok(k)
}

/// `[base^k, base^(k+1)]`.
pub fn interval_bounds(k: i64, base: f64) -> (f64, f64) {
    (base.powi(k as i32), base.powi(k as i32 + 1))
}

/// One ball family covering the cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallCover {
    pub dim: usize,
    pub radius: f64,
    pub spacing: f64,
    pub max_index: i64,
}

impl BallCover {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) {
            return Err(Error::Domain(format!(
                "ball cover needs dim >= 1 and radius > 0 (dim {dim}, radius {radius})"
            )));
        }
        let spacing = 2.0 * radius / (dim as f64).sqrt();
        let max_index = (2.0 / spacing).ceil() as i64;
        Ok(Self {
            dim,
            radius,
            spacing,
            max_index,
        })
    }

    pub fn center(&self, id: &[i64]) -> Vec<f64> {
        id.iter().map(|&m| -1.0 + m as f64 * self.spacing).collect()
    }

    /// Lexicographically lowest lattice ball containing `x`; `None` outside the cube.
    pub fn locate(&self, x: &[f64]) -> Option<Vec<i64>> {
        if x.len() != self.dim || x.iter().any(|v| !(v.abs() <= 1.0)) {
            return None;
        }
        let budget = self.radius * self.radius * (1.0 + 1e-12);
        let mut id = Vec::with_capacity(self.dim);
        self.search(x, budget, &mut id).then_some(id)
    }

    fn search(&self, x: &[f64], budget: f64, id: &mut Vec<i64>) -> bool {
        let i = id.len();
        if i == self.dim {
            return true;
        }
        let reach = budget.max(0.0).sqrt();
        let lo = (((x[i] + 1.0 - reach) / self.spacing).ceil() as i64).max(0);
        let hi = (((x[i] + 1.0 + reach) / self.spacing).floor() as i64).min(self.max_index);
        for m in lo..=hi {
            let d = x[i] - (-1.0 + m as f64 * self.spacing);
            let rest = budget - d * d;
            if rest < 0.0 {
                continue;
            }
            id.push(m);
            if self.search(x, rest, id) {
                return true;
            }
            id.pop();
        }
        false
    }
}

/// Cube dimension and the injectivity-radius cap on ball radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverScheme {
    pub dim: usize,
    pub injrad: f64,
}

impl CoverScheme {
    pub fn new(dim: usize, injrad: f64) -> Result<Self> {
        if dim == 0 || !(injrad > 0.0) {
            return Err(Error::Domain(
                "cover scheme needs dim >= 1 and injrad > 0".into(),
            ));
        }
        Ok(Self { dim, injrad })
    }

    pub fn cover(&self, radius: f64) -> Result<BallCover> {
        BallCover::new(self.dim, radius.min(self.injrad))
    }

    fn locate(&self, x: &[f64], radius: f64, level: i64) -> Result<Vec<i64>> {
        self.cover(radius)?
            .locate(x)
            .ok_or_else(|| Error::CoverDefect {
                point: x.to_vec(),
                level,
            })
    }
}

impl Default for CoverScheme {
    fn default() -> Self {
        Self {
            dim: 8,
            injrad: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Type2Cell {
    pub k: i64,
    pub ball: Vec<i64>,
}

/// Base of the type-II radius intervals, `1 + γ r₀ / 2`.
pub fn type2_base(gamma: f64, r0: f64) -> f64 {
    1.0 + gamma * r0 / 2.0
}

/// Ball radius of the type-II cover at level `k`, before the injectivity cap.
pub fn type2_ball_radius(k: i64, gamma: f64, r0: f64) -> f64 {
    type2_base(gamma, r0).powi(k as i32) * gamma * r0 / 10.0
}

pub fn covering_cell_type2(
    x: &[f64],
    r: f64,
    gamma: f64,
    r0: f64,
    scheme: &CoverScheme,
) -> Result<Type2Cell> {
    if !(gamma > 0.0) || !(r0 > 0.0) {
        return Err(Error::Domain(format!(
            "gamma and r0 must be positive (gamma {gamma}, r0 {r0})"
        )));
    }
    let k = interval_index(r, type2_base(gamma, r0))?;
    let ball = scheme.locate(x, type2_ball_radius(k, gamma, r0), k)?;
    Ok(Type2Cell { k, ball })
}

/// Finite family of cone classes; a class joins the first element within `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeNet {
    pub elements: Vec<String>,
    pub radius: f64,
}

impl ConeNet {
    /// Net used for γ-closeness: radius `γ/2`, so two classes sharing an
    /// element are `γ`-close by the triangle inequality.
    pub fn for_gamma(elements: Vec<String>, gamma: f64) -> Self {
        Self {
            elements,
            radius: gamma / 2.0,
        }
    }

    pub fn index_of(&self, cone: &str, metric: &ConeMetric) -> Result<usize> {
        for (i, e) in self.elements.iter().enumerate() {
            if metric.distance(cone, e)? <= self.radius + 1e-12 {
                return Ok(i);
            }
        }
        Err(Error::ConeNetDefect(cone.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSlot {
    Zero,
    Interval(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Type1Cell {
    pub net: usize,
    pub rho: RhoSlot,
    pub k_prime: i64,
    pub ball: Vec<i64>,
}

/// Base of the ρ intervals, `1 + γ/2`.
pub fn rho_base(gamma: f64) -> f64 {
    1.0 + gamma / 2.0
}

/// Base and ball radius of the R intervals for a given ρ slot.
pub fn type1_r_base(slot: RhoSlot, gamma: f64) -> f64 {
    match slot {
        RhoSlot::Zero => rho_base(gamma),
        RhoSlot::Interval(k) => 1.0 + gamma / 2.0 * rho_base(gamma).powi(k as i32).min(1.0),
    }
}

pub fn type1_ball_radius(slot: RhoSlot, k_prime: i64, gamma: f64) -> f64 {
    let base = type1_r_base(slot, gamma);
    let scale = match slot {
        RhoSlot::Zero => 1.0,
        RhoSlot::Interval(k) => rho_base(gamma).powi(k as i32).min(1.0),
    };
    base.powi(k_prime as i32) * gamma * scale / 10.0
}

pub struct Type1Params<'a> {
    pub cone: &'a str,
    pub x: &'a [f64],
    pub r: f64,
    pub rho: f64,
}

pub fn covering_cell_type1(
    p: &Type1Params<'_>,
    gamma: f64,
    scheme: &CoverScheme,
    net: &ConeNet,
    metric: &ConeMetric,
) -> Result<Type1Cell> {
    if !(gamma > 0.0) || !(p.rho >= 0.0) {
        return Err(Error::Domain(format!(
            "need gamma > 0 and rho >= 0 (gamma {gamma}, rho {})",
            p.rho
        )));
    }
    let idx = net.index_of(p.cone, metric)?;
    let slot = if p.rho == 0.0 {
        RhoSlot::Zero
    } else {
        RhoSlot::Interval(interval_index(p.rho, rho_base(gamma))?)
    };
    let k_prime = interval_index(p.r, type1_r_base(slot, gamma))?;
    let ball = scheme.locate(p.x, type1_ball_radius(slot, k_prime, gamma), k_prime)?;
    Ok(Type1Cell {
        net: idx,
        rho: slot,
        k_prime,
        ball,
    })
}
