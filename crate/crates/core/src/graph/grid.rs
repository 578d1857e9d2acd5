//! Uniform 2-D grids over `[-1, 1]²`, finite differences and scale-weighted norms.

use crate::error::{Error, Result};

/// `m × m` nodes at `x = -1 + i h`, `h = 2/(m-1)`, row-major with `x₁` fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub m: usize,
    pub h: f64,
    pub origin: f64,
}

impl Grid2 {
    /// Grid on `[-1, 1]²` with spacing `h` (so `2/h` must be an integer ≥ 4).
    pub fn with_spacing(h: f64) -> Result<Self> {
        let cells = 2.0 / h;
        if !(h > 0.0) || (cells - cells.round()).abs() > 1e-9 || cells.round() < 4.0 {
            return Err(Error::Invalid(format!(
                "spacing {h} does not divide [-1, 1] into at least 4 cells"
            )));
        }
        Ok(Self {
            m: cells.round() as usize + 1,
            h,
            origin: -1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    pub fn coords(&self, p: usize) -> [f64; 2] {
        let (i, j) = (p % self.m, p / self.m);
        [
            self.origin + i as f64 * self.h,
            self.origin + j as f64 * self.h,
        ]
    }

    pub fn ij(&self, p: usize) -> (usize, usize) {
        (p % self.m, p / self.m)
    }

    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|p| f(self.coords(p))).collect()
    }

    /// Nodes inside the ball `|x| < 1 - 4h`.
    pub fn interior(&self) -> Vec<usize> {
        let rad = 1.0 - 4.0 * self.h;
        (0..self.len())
            .filter(|&p| {
                let [x, y] = self.coords(p);
                x.hypot(y) < rad
            })
            .collect()
    }

    /// Trapezoid weight of node `p` on the square.
    pub fn trapezoid_weight(&self, p: usize) -> f64 {
        let (i, j) = self.ij(p);
        let w = |k: usize| {
            if k == 0 || k == self.m - 1 {
                0.5 * self.h
            } else {
                self.h
            }
        };
        w(i) * w(j)
    }

    /// Second-order first derivative along `axis`, centred inside and one-sided on the edge.
    pub fn d1(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let m = self.m;
        let h2 = 2.0 * self.h;
        (0..self.len())
            .map(|p| {
                let (i, j) = self.ij(p);
                let k = if axis == 0 { i } else { j };
                let at = |kk: usize| {
                    if axis == 0 {
                        f[self.index(kk, j)]
                    } else {
                        f[self.index(i, kk)]
                    }
                };
                if k == 0 {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) / h2
                } else if k == m - 1 {
                    (3.0 * at(m - 1) - 4.0 * at(m - 2) + at(m - 3)) / h2
                } else {
                    (at(k + 1) - at(k - 1)) / h2
                }
            })
            .collect()
    }

    /// Second-order pure second derivative along `axis`.
    pub fn d2(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let m = self.m;
        let hh = self.h * self.h;
        (0..self.len())
            .map(|p| {
                let (i, j) = self.ij(p);
                let k = if axis == 0 { i } else { j };
                let at = |kk: usize| {
                    if axis == 0 {
                        f[self.index(kk, j)]
                    } else {
                        f[self.index(i, kk)]
                    }
                };
                if k == 0 {
                    (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / hh
                } else if k == m - 1 {
                    (2.0 * at(m - 1) - 5.0 * at(m - 2) + 4.0 * at(m - 3) - at(m - 4)) / hh
                } else {
                    (at(k + 1) - 2.0 * at(k) + at(k - 1)) / hh
                }
            })
            .collect()
    }

    /// `(D₁u, D₂u)` per node.
    pub fn gradient(&self, f: &[f64]) -> Vec<[f64; 2]> {
        let (a, b) = (self.d1(f, 0), self.d1(f, 1));
        a.into_iter().zip(b).map(|(x, y)| [x, y]).collect()
    }

    /// `D₁X₁ + D₂X₂` with the same first-derivative stencil.
    pub fn divergence(&self, flux: &[[f64; 2]]) -> Vec<f64> {
        let a: Vec<f64> = flux.iter().map(|v| v[0]).collect();
        let b: Vec<f64> = flux.iter().map(|v| v[1]).collect();
        self.d1(&a, 0)
            .into_iter()
            .zip(self.d1(&b, 1))
            .map(|(x, y)| x + y)
            .collect()
    }

    /// `D∘D` Laplacian, the linear part of the discrete minimal surface operator.
    pub fn wide_laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.divergence(&self.gradient(f))
    }
}

/// Grid samples with a per-node regularity scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedField {
    pub grid: Grid2,
    pub samples: Vec<f64>,
    pub weight: Vec<f64>,
}

impl WeightedField {
    pub fn new(grid: Grid2, samples: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() || weight.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field sizes {} / {} do not match grid of {} nodes",
                samples.len(),
                weight.len(),
                grid.len()
            )));
        }
        if let Some(p) = weight.iter().position(|w| !(*w > 0.0)) {
            return Err(Error::Invalid(format!(
                "weight must be positive, node {p} has {}",
                weight[p]
            )));
        }
        Ok(Self {
            grid,
            samples,
            weight,
        })
    }

    pub fn constant_weight(grid: Grid2, samples: Vec<f64>, w: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, samples, vec![w; n])
    }

    /// Rescale samples, weight and grid spacing together by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            grid: Grid2 {
                m: self.grid.m,
                h: self.grid.h * lambda,
                origin: self.grid.origin * lambda,
            },
            samples: self.samples.iter().map(|v| v * lambda).collect(),
            weight: self.weight.iter().map(|w| w * lambda).collect(),
        }
    }
}

/// `sup_x Σ_{j ≤ k} r(x)^{j-1} |∇^j φ|(x)` with finite-difference derivatives.
pub fn ck_star_norm(field: &WeightedField, k: u32) -> Result<f64> {
    if k > 2 {
        return Err(Error::Invalid(format!(
            "C^k_* norm supports k <= 2, got {k}"
        )));
    }
    let g = &field.grid;
    let grad = (k >= 1).then(|| g.gradient(&field.samples));
    let hess = (k >= 2).then(|| {
        let dxx = g.d2(&field.samples, 0);
        let dyy = g.d2(&field.samples, 1);
        let dxy = g.d1(&g.d1(&field.samples, 0), 1);
        (dxx, dyy, dxy)
    });
    let mut sup: f64 = 0.0;
    for p in 0..g.len() {
        let r = field.weight[p];
        let mut acc = field.samples[p].abs() / r;
        if let Some(gr) = &grad {
            acc += gr[p][0].hypot(gr[p][1]);
        }
        if let Some((xx, yy, xy)) = &hess {
            acc += r * (xx[p] * xx[p] + yy[p] * yy[p] + 2.0 * xy[p] * xy[p]).sqrt();
        }
        sup = sup.max(acc);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = Grid2::with_spacing(1.0 / 16.0).unwrap();
        assert_eq!(g.m, 33);
        assert_eq!(g.coords(g.index(32, 0)), [1.0, -1.0]);
        assert!(Grid2::with_spacing(0.3).is_err());
        let total: f64 = (0..g.len()).map(|p| g.trapezoid_weight(p)).sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let g = Grid2::with_spacing(0.125).unwrap();
        let f = g.sample(|[x, y]| x * x + 3.0 * x * y - y);
        let dx = g.d1(&f, 0);
        let dyy = g.d2(&f, 1);
        for p in 0..g.len() {
            let [x, y] = g.coords(p);
            assert!((dx[p] - (2.0 * x + 3.0 * y)).abs() < 1e-12);
            assert!(dyy[p].abs() < 1e-10);
        }
    }

    #[test]
    fn norm_examples() {
        let g = Grid2::with_spacing(0.125).unwrap();
        let c = WeightedField::constant_weight(g, vec![-3.0; g.len()], 1.5).unwrap();
        assert!((ck_star_norm(&c, 0).unwrap() - 2.0).abs() < 1e-15);
        let lin = WeightedField::constant_weight(g, g.sample(|[x, _]| x), 1.0).unwrap();
        assert!((ck_star_norm(&lin, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!(ck_star_norm(&lin, 3).is_err());
    }

    #[test]
    fn rescaling_invariance() {
        let g = Grid2::with_spacing(0.0625).unwrap();
        let samples = g.sample(|[x, y]| (2.0 * x).sin() * y * y + 0.3 * x);
        let weight = g.sample(|[x, y]| 0.5 + x.hypot(y));
        let f = WeightedField::new(g, samples, weight).unwrap();
        for k in 0..=2 {
            let base = ck_star_norm(&f, k).unwrap();
            for lambda in [0.25, 3.0, 0.1] {
                let scaled = ck_star_norm(&f.rescaled(lambda), k).unwrap();
                assert!(
                    ((scaled - base) / base).abs() < 1e-12,
                    "k={k} lambda={lambda}"
                );
            }
        }
    }
}
