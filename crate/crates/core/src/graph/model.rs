//! The flat Fermi-coordinate model `B₁ⁿ × (-1, 1)` with metric `g^z + dz²`
//! and conformal factor `1 + f`.
//!
//! Fields are resolved on the first two base coordinates and constant in the
//! remaining `n - 2`, so the hyperplane `{z = 0}` is sampled on a 2-D grid.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::grid::Grid2;
use crate::error::{Error, Result};

/// `(x, z) ↦ (g^z(x), ∂_z g^z(x))`, both `n × n`.
pub type MetricFn = Arc<dyn Fn([f64; 2], f64) -> (DMatrix<f64>, DMatrix<f64>) + Send + Sync>;
/// `(x, z) ↦ (f, ∂_z f)`.
pub type ScalarFn = Arc<dyn Fn([f64; 2], f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub struct FlatModel {
    pub n: usize,
    pub grid: Grid2,
    metric: Option<MetricFn>,
    conformal: Option<ScalarFn>,
}

impl fmt::Debug for FlatModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlatModel")
            .field("n", &self.n)
            .field("grid", &self.grid)
            .field("metric", &self.metric.as_ref().map(|_| "custom"))
            .field("conformal", &self.conformal.as_ref().map(|_| "custom"))
            .finish()
    }
}

/// `F` together with `∂_ξF` (length `n`) and `∂_zF`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityJet {
    pub value: f64,
    pub d_xi: Vec<f64>,
    pub d_z: f64,
}

impl FlatModel {
    /// Euclidean model, `f = 0`.
    pub fn euclidean(n: usize, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModel(format!("need n >= 2, got {n}")));
        }
        if h > 0.125 {
            return Err(Error::InvalidModel(format!("grid spacing {h} exceeds 1/8")));
        }
        Ok(Self {
            n,
            grid: Grid2::with_spacing(h)?,
            metric: None,
            conformal: None,
        })
    }

    pub fn with_metric(mut self, metric: MetricFn) -> Result<Self> {
        self.metric = Some(metric);
        let proxy = self.metric_c3_proxy();
        if !(proxy < 0.1) {
            return Err(Error::InvalidModel(format!(
                "|g - g_eucl|_C3 proxy {proxy} is not below 1/10"
            )));
        }
        Ok(self)
    }

    pub fn with_conformal(mut self, f: ScalarFn) -> Self {
        self.conformal = Some(f);
        self
    }

    pub fn without_conformal(&self) -> Self {
        Self {
            conformal: None,
            ..self.clone()
        }
    }

    /// `g^z = I + zH + z²B` with `H = a·diag(1, -1, 0, …)`, `B = a²·diag(1, 0, …)`.
    ///
    /// `tr H = 0` and `tr B = ½ tr H²`, so `{z = 0}` is minimal with
    /// `|A|² + Ric(ν, ν) = 0` and its Jacobi operator is the flat Laplacian,
    /// while the area density still depends on `z` to second order.
    pub fn traceless_shear(n: usize, h: f64, a: f64) -> Result<Self> {
        let metric: MetricFn = Arc::new(move |_x, z| {
            let mut g = DMatrix::identity(n, n);
            let mut dg = DMatrix::zeros(n, n);
            g[(0, 0)] += a * z + a * a * z * z;
            g[(1, 1)] -= a * z;
            dg[(0, 0)] = a + 2.0 * a * a * z;
            dg[(1, 1)] = -a;
            (g, dg)
        });
        Self::euclidean(n, h)?.with_metric(metric)
    }

    pub fn has_metric(&self) -> bool {
        self.metric.is_some()
    }

    pub fn conformal_at(&self, x: [f64; 2], z: f64) -> (f64, f64) {
        self.conformal.as_ref().map_or((0.0, 0.0), |f| f(x, z))
    }

    /// Finite-difference `C³` size of `g - I` along `x₁, x₂, z`, sampled on
    /// the grid at five heights.
    pub fn metric_c3_proxy(&self) -> f64 {
        let Some(metric) = &self.metric else {
            return 0.0;
        };
        let n = self.n;
        let delta = 1e-2;
        let dev = |x: [f64; 2], z: f64| {
            let (g, _) = metric(x, z);
            g - DMatrix::<f64>::identity(n, n)
        };
        let amax = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut sup = 0.0f64;
        let zs = [-0.9, -0.5, 0.0, 0.5, 0.9];
        let stride = (self.grid.m / 8).max(1);
        for p in (0..self.grid.len()).step_by(stride) {
            let x = self.grid.coords(p);
            for &z in &zs {
                let mut total = amax(&dev(x, z));
                for axis in 0..3 {
                    let shift = |k: f64| {
                        let mut xx = x;
                        let mut zz = z;
                        if axis < 2 {
                            xx[axis] += k * delta;
                        } else {
                            zz += k * delta;
                        }
                        dev(xx, zz)
                    };
                    let (m2, m1, c0, p1, p2) =
                        (shift(-2.0), shift(-1.0), shift(0.0), shift(1.0), shift(2.0));
                    let d1 = (&p1 - &m1) / (2.0 * delta);
                    let d2 = (&p1 - &c0 * 2.0 + &m1) / (delta * delta);
                    let d3 = (&p2 - &p1 * 2.0 + &m1 * 2.0 - &m2) / (2.0 * delta.powi(3));
                    total += amax(&d1) + amax(&d2) + amax(&d3);
                }
                sup = sup.max(total);
            }
        }
        sup
    }

    /// `F^f(x, z, ξ) = sqrt((1+f)^n det(g^z + ξ⊗ξ) / det g⁰)` and its partials.
    pub fn density_jet(&self, x: [f64; 2], z: f64, xi: &[f64]) -> Result<DensityJet> {
        let n = self.n;
        if xi.len() > n {
            return Err(Error::Invalid(format!(
                "covector has {} components, n = {n}",
                xi.len()
            )));
        }
        if !(z.abs() < 1.0) {
            return Err(Error::Domain(format!("|z| must be below 1, got {z}")));
        }
        let (f, fz) = self.conformal_at(x, z);
        if !(1.0 + f > 0.0) {
            return Err(Error::DegenerateMetric(format!(
                "x = {x:?}, z = {z}: 1 + f = {}",
                1.0 + f
            )));
        }
        let conf = (1.0 + f).powf(0.5 * n as f64);
        let conf_z = 0.5 * n as f64 * fz / (1.0 + f);
        let Some(metric) = &self.metric else {
            let s: f64 = xi.iter().map(|v| v * v).sum();
            let value = conf * (1.0 + s).sqrt();
            let mut d_xi: Vec<f64> = xi.iter().map(|v| value * v / (1.0 + s)).collect();
            d_xi.resize(n, 0.0);
            return Ok(DensityJet {
                value,
                d_xi,
                d_z: value * conf_z,
            });
        };
        let (gz, dgz) = metric(x, z);
        let (g0, _) = metric(x, 0.0);
        let v = DVector::from_iterator(n, xi.iter().copied().chain(std::iter::repeat(0.0)).take(n));
        let big = &gz + &v * v.transpose();
        let degenerate = || {
            Error::DegenerateMetric(format!(
                "x = {x:?}, z = {z}: g^z + ξ⊗ξ is not positive definite"
            ))
        };
        let chol = big.clone().cholesky().ok_or_else(degenerate)?;
        let chol0 = g0.cholesky().ok_or_else(degenerate)?;
        let ratio = (chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
            - chol0.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
        .exp();
        let value = conf * ratio;
        let ginv_xi = chol.solve(&v);
        let trace = chol.solve(&dgz).trace();
        Ok(DensityJet {
            value,
            d_xi: ginv_xi.iter().map(|c| value * c).collect(),
            d_z: value * (conf_z + 0.5 * trace),
        })
    }

    pub fn area_density(&self, x: [f64; 2], z: f64, xi: &[f64]) -> Result<f64> {
        Ok(self.density_jet(x, z, xi)?.value)
    }

    /// Volume factor of the `n - 2` unresolved directions of the cube.
    pub fn transverse_volume(&self) -> f64 {
        2f64.powi(self.n as i32 - 2)
    }
}

/// `|F - 1| / (|z|/r_S + |ξ| + f_size)`, the empirical constant in the
/// proximity bound at one sample.
pub fn proximity_ratio(
    model: &FlatModel,
    x: [f64; 2],
    z: f64,
    xi: &[f64],
    r_s: f64,
    f_size: f64,
) -> Result<f64> {
    let f = model.area_density(x, z, xi)?;
    let scale = z.abs() / r_s + xi.iter().map(|v| v * v).sum::<f64>().sqrt() + f_size;
    Ok(if scale == 0.0 {
        (f - 1.0).abs()
    } else {
        (f - 1.0).abs() / scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let m = FlatModel::euclidean(7, 0.125).unwrap();
        assert_eq!(m.area_density([0.0, 0.0], 0.0, &[]).unwrap(), 1.0);
        let t = 0.37;
        let v = m
            .area_density([0.1, 0.2], 0.3, &[t * 0.6, t * 0.8])
            .unwrap();
        assert!((v - (1.0 + t * t).sqrt()).abs() < 1e-15);
        let c = 0.2;
        let mc = m.clone().with_conformal(Arc::new(move |_, _| (c, 0.0)));
        assert!((mc.area_density([0.0, 0.0], 0.0, &[]).unwrap() - 1.2f64.powf(3.5)).abs() < 1e-14);
    }

    #[test]
    fn general_path_matches_fast_path() {
        let flat: MetricFn = Arc::new(|_, _| (DMatrix::identity(7, 7), DMatrix::zeros(7, 7)));
        let general = FlatModel::euclidean(7, 0.125)
            .unwrap()
            .with_metric(flat)
            .unwrap();
        let fast = FlatModel::euclidean(7, 0.125).unwrap();
        let xi = [0.3, -0.2];
        let a = general.density_jet([0.1, 0.1], 0.2, &xi).unwrap();
        let b = fast.density_jet([0.1, 0.1], 0.2, &xi).unwrap();
        assert!((a.value - b.value).abs() < 1e-14);
        for (x, y) in a.d_xi.iter().zip(&b.d_xi) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let f: ScalarFn = Arc::new(|x, z| (0.05 * (x[0] + z * z), 0.1 * z));
        let m = FlatModel::traceless_shear(7, 0.125, 0.03)
            .unwrap()
            .with_conformal(f);
        let (x, z, xi) = ([0.2, -0.4], 0.3, [0.1, -0.25]);
        let jet = m.density_jet(x, z, &xi).unwrap();
        let d = 1e-6;
        let fz = (m.area_density(x, z + d, &xi).unwrap() - m.area_density(x, z - d, &xi).unwrap())
            / (2.0 * d);
        assert!((fz - jet.d_z).abs() < 1e-9);
        for k in 0..2 {
            let mut p = xi;
            let mut q = xi;
            p[k] += d;
            q[k] -= d;
            let fd =
                (m.area_density(x, z, &p).unwrap() - m.area_density(x, z, &q).unwrap()) / (2.0 * d);
            assert!((fd - jet.d_xi[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_and_invalid_models() {
        let bad: MetricFn = Arc::new(|_, _| (DMatrix::identity(7, 7) * 0.5, DMatrix::zeros(7, 7)));
        assert!(matches!(
            FlatModel::euclidean(7, 0.125).unwrap().with_metric(bad),
            Err(Error::InvalidModel(_))
        ));
        let m = FlatModel::euclidean(7, 0.125)
            .unwrap()
            .with_conformal(Arc::new(|_, _| (-1.5, 0.0)));
        assert!(matches!(
            m.area_density([0.0, 0.0], 0.0, &[]),
            Err(Error::DegenerateMetric(_))
        ));
        assert!(FlatModel::euclidean(7, 0.25).is_err());
    }

    #[test]
    fn proximity_constant_is_bounded() {
        let m = FlatModel::traceless_shear(7, 0.125, 0.03).unwrap();
        let mut worst = 0.0f64;
        for k in 1..=20 {
            let s = 0.01 * f64::from(k);
            let r = proximity_ratio(&m, [0.0, 0.0], s, &[s, -0.5 * s], 1.0, 0.0).unwrap();
            worst = worst.max(r);
        }
        assert!(worst.is_finite() && worst < 1.0);
    }
}
