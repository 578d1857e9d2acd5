//! Graph area, its discrete first variation and the linearization residual.

use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid2;
use super::model::{FlatModel, ScalarFn};
use crate::error::{Error, Result};

/// Graph-regime bound on `|u|/r_S + |∇u|`.
pub const GRAPH_LIMIT: f64 = 0.1;

fn check_len(grid: &Grid2, u: &[f64]) -> Result<()> {
    if u.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "field has {} samples, grid has {}",
            u.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// Reject fields whose `C¹_*` size (unit regularity scale) exceeds [`GRAPH_LIMIT`].
pub fn graph_regime_check(grid: &Grid2, u: &[f64], grad: &[[f64; 2]]) -> Result<()> {
    for p in 0..grid.len() {
        let size = u[p].abs() + grad[p][0].hypot(grad[p][1]);
        if size > GRAPH_LIMIT {
            let (i, j) = grid.ij(p);
            return Err(Error::GraphRegime {
                index: vec![i, j],
                size,
                limit: GRAPH_LIMIT,
            });
        }
    }
    Ok(())
}

fn prepared(model: &FlatModel, u: &[f64]) -> Result<Vec<[f64; 2]>> {
    check_len(&model.grid, u)?;
    let grad = model.grid.gradient(u);
    graph_regime_check(&model.grid, u, &grad)?;
    Ok(grad)
}

/// Trapezoid-rule area of the graph of `u` over the cube `[-1, 1]^n`.
pub fn area_functional(model: &FlatModel, u: &[f64]) -> Result<f64> {
    let grad = prepared(model, u)?;
    let g = &model.grid;
    let parts: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|p| Ok(g.trapezoid_weight(p) * model.area_density(g.coords(p), u[p], &grad[p])?))
        .collect::<Result<_>>()?;
    Ok(model.transverse_volume() * parts.iter().sum::<f64>())
}

/// `M^f(u) = -div ∂_ξF + ∂_zF` with centred fluxes and divergence, the exact
/// discrete first variation of [`area_functional`] for variations vanishing
/// within three nodes of the edge.
pub fn minimal_surface_operator(model: &FlatModel, u: &[f64]) -> Result<Vec<f64>> {
    let grad = prepared(model, u)?;
    let g = &model.grid;
    let jets: Vec<([f64; 2], f64)> = (0..g.len())
        .into_par_iter()
        .map(|p| {
            let jet = model.density_jet(g.coords(p), u[p], &grad[p])?;
            Ok(([jet.d_xi[0], jet.d_xi[1]], jet.d_z))
        })
        .collect::<Result<_>>()?;
    let flux: Vec<[f64; 2]> = jets.iter().map(|j| j.0).collect();
    let div = g.divergence(&flux);
    Ok(div.iter().zip(&jets).map(|(d, j)| j.1 - d).collect())
}

/// `Σ_p w_p a_p b_p` scaled by the transverse volume, the pairing under which
/// [`minimal_surface_operator`] is the gradient of [`area_functional`].
pub fn grid_inner(model: &FlatModel, a: &[f64], b: &[f64]) -> f64 {
    let g = &model.grid;
    model.transverse_volume()
        * (0..g.len())
            .map(|p| g.trapezoid_weight(p) * a[p] * b[p])
            .sum::<f64>()
}

/// Supremum of `|v|` over the interior ball `B_{1-4h}`.
pub fn interior_sup(grid: &Grid2, v: &[f64]) -> f64 {
    grid.interior()
        .into_iter()
        .map(|p| v[p].abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub field: Vec<f64>,
    pub norm: f64,
}

/// `M^{f⁺}(u⁺) - M^{f⁻}(u⁻) + Δ(u⁺ - u⁻) - (n/2) ∂_z(f⁺ - f⁻)|_{z=0}`.
///
/// `model` supplies grid and metric; its own conformal factor is replaced by
/// `f_plus` / `f_minus` (`None` is `f = 0`).
pub fn linearization_residual(
    model: &FlatModel,
    u_plus: &[f64],
    u_minus: &[f64],
    f_plus: Option<&ScalarFn>,
    f_minus: Option<&ScalarFn>,
) -> Result<Residual> {
    let base = model.without_conformal();
    let with = |f: Option<&ScalarFn>| match f {
        Some(f) => base.clone().with_conformal(Arc::clone(f)),
        None => base.clone(),
    };
    let (mp, mm) = (with(f_plus), with(f_minus));
    let a = minimal_surface_operator(&mp, u_plus)?;
    let b = minimal_surface_operator(&mm, u_minus)?;
    let g = &model.grid;
    let diff: Vec<f64> = u_plus.iter().zip(u_minus).map(|(x, y)| x - y).collect();
    let lap = g.wide_laplacian(&diff);
    let half_n = 0.5 * model.n as f64;
    let field: Vec<f64> = (0..g.len())
        .map(|p| {
            let x = g.coords(p);
            let nu = mp.conformal_at(x, 0.0).1 - mm.conformal_at(x, 0.0).1;
            a[p] - b[p] + lap[p] - half_n * nu
        })
        .collect();
    let norm = interior_sup(g, &field);
    Ok(Residual { field, norm })
}

/// `(1 - |x - c|²/ρ²)⁴` inside the ball, zero outside.
pub fn bump(grid: &Grid2, center: [f64; 2], radius: f64) -> Vec<f64> {
    grid.sample(|[x, y]| {
        let s = ((x - center[0]).powi(2) + (y - center[1]).powi(2)) / (radius * radius);
        if s < 1.0 {
            (1.0 - s).powi(4)
        } else {
            0.0
        }
    })
}

/// `(1 - |x|²)³` cut-off, smooth enough for the stencils used here.
pub fn cutoff(x: [f64; 2]) -> f64 {
    let s = x[0] * x[0] + x[1] * x[1];
    if s < 1.0 {
        (1.0 - s).powi(3)
    } else {
        0.0
    }
}

/// `sin(π x₁ / 2)` times the cut-off.
pub fn sine_direction(grid: &Grid2) -> Vec<f64> {
    grid.sample(|x| (0.5 * std::f64::consts::PI * x[0]).sin() * cutoff(x))
}

/// `4 + cos(x₁)(1 + x₂/5)`: an offset graph with gentle slope, so the
/// quadratic metric term dominates the cubic slope term at small `ε`.
pub fn test_direction(grid: &Grid2) -> Vec<f64> {
    grid.sample(|x| 4.0 + x[0].cos() * (1.0 + 0.2 * x[1]))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Residual norms for `u⁺ = ε v`, `u⁻ = 0`, `f± = 0`.
pub fn u_perturbation_study(model: &FlatModel, eps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let v = test_direction(&model.grid);
    let zero = vec![0.0; v.len()];
    eps.iter()
        .map(|&e| {
            let u: Vec<f64> = v.iter().map(|x| e * x).collect();
            Ok((
                e,
                linearization_residual(model, &u, &zero, None, None)?.norm,
            ))
        })
        .collect()
}

/// `f = t χ(x) (z + ψ(x))` with `ψ = 1/2 + 3x₁/10`, so `∂_z f = t χ`.
pub fn conformal_probe(t: f64) -> ScalarFn {
    Arc::new(move |x, z| {
        let chi = cutoff(x);
        (t * chi * (z + 0.5 + 0.3 * x[0]), t * chi)
    })
}

/// Residual norms with `u± = 0`, `f⁺ = conformal_probe(t)`, `f⁻ = 0`.
pub fn conformal_study(model: &FlatModel, ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    let zero = vec![0.0; model.grid.len()];
    ts.iter()
        .map(|&t| {
            let f = conformal_probe(t);
            Ok((
                t,
                linearization_residual(model, &zero, &zero, Some(&f), None)?.norm,
            ))
        })
        .collect()
}

/// Least-squares coefficient `c` in `M^{tf}(0) - M⁰(0) ≈ c · t ∂_z f` over the interior.
pub fn conformal_coefficient(model: &FlatModel, t: f64) -> Result<f64> {
    let g = &model.grid;
    let zero = vec![0.0; g.len()];
    let base = model.without_conformal();
    let m0 = minimal_surface_operator(&base, &zero)?;
    let mt = minimal_surface_operator(&base.clone().with_conformal(conformal_probe(t)), &zero)?;
    let (mut num, mut den) = (0.0, 0.0);
    for p in g.interior() {
        let nu = t * cutoff(g.coords(p));
        num += (mt[p] - m0[p]) * nu;
        den += nu * nu;
    }
    Ok(num / den)
}

/// Richardson extrapolation `2c(t/2) - c(t)` of [`conformal_coefficient`].
pub fn conformal_coefficient_extrapolated(model: &FlatModel, t: f64) -> Result<f64> {
    Ok(2.0 * conformal_coefficient(model, 0.5 * t)? - conformal_coefficient(model, t)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationRow {
    pub case: String,
    pub eps: f64,
    pub residual_norm: f64,
    pub fitted_order: f64,
}

fn rows(case: &str, pts: Vec<(f64, f64)>) -> Vec<LinearizationRow> {
    let order = loglog_slope(&pts);
    pts.into_iter()
        .map(|(eps, residual_norm)| LinearizationRow {
            case: case.into(),
            eps,
            residual_norm,
            fitted_order: order,
        })
        .collect()
}

/// The three convergence studies at `ε ∈ {eps, eps/2, eps/4}`:
/// `u_shear` (sheared metric, order 2), `u_euclidean` (flat metric, where the
/// quadratic term vanishes) and `conformal` (`f`-perturbation, order 2).
pub fn linearization_report(n: usize, h: f64, eps: f64) -> Result<Vec<LinearizationRow>> {
    let ladder = [eps, 0.5 * eps, 0.25 * eps];
    let shear = FlatModel::traceless_shear(n, h, SHEAR)?;
    let flat = FlatModel::euclidean(n, h)?;
    let mut out = rows("u_shear", u_perturbation_study(&shear, &ladder)?);
    out.extend(rows("u_euclidean", u_perturbation_study(&flat, &ladder)?));
    out.extend(rows("conformal", conformal_study(&flat, &ladder)?));
    Ok(out)
}

/// Shear amplitude used by the standard linearization model.
pub const SHEAR: f64 = 0.03;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_area_examples() {
        let m = FlatModel::euclidean(7, 1.0 / 16.0).unwrap();
        let zero = vec![0.0; m.grid.len()];
        assert!((area_functional(&m, &zero).unwrap() - 128.0).abs() < 1e-10);
        let eps = 0.04;
        let tilt = m.grid.sample(|x| eps * x[0]);
        let a = area_functional(&m, &tilt).unwrap();
        assert!((a - 128.0 * (1.0 + eps * eps).sqrt()).abs() < 1e-10);
        let c = 0.1;
        let mc = m.clone().with_conformal(Arc::new(move |_, _| (c, 0.0)));
        assert!((area_functional(&mc, &zero).unwrap() - 128.0 * 1.1f64.powf(3.5)).abs() < 1e-9);
        let steep = m.grid.sample(|x| 0.5 * x[0]);
        assert!(matches!(
            area_functional(&m, &steep),
            Err(Error::GraphRegime { .. })
        ));
    }

    #[test]
    fn hyperplane_is_minimal() {
        for m in [
            FlatModel::euclidean(7, 0.0625).unwrap(),
            FlatModel::traceless_shear(7, 0.0625, SHEAR).unwrap(),
        ] {
            let mo = minimal_surface_operator(&m, &vec![0.0; m.grid.len()]).unwrap();
            assert!(mo.iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn small_graphs_follow_the_laplacian() {
        let m = FlatModel::euclidean(7, 1.0 / 32.0).unwrap();
        let u: Vec<f64> = sine_direction(&m.grid).iter().map(|v| 1e-3 * v).collect();
        let mo = minimal_surface_operator(&m, &u).unwrap();
        let lap = m.grid.wide_laplacian(&u);
        let scale = interior_sup(&m.grid, &lap);
        let diff: Vec<f64> = mo.iter().zip(&lap).map(|(a, b)| a + b).collect();
        assert!(interior_sup(&m.grid, &diff) / scale < 1e-4);
    }

    #[test]
    fn operator_is_the_discrete_gradient_of_area() {
        let f: ScalarFn = Arc::new(|x, z| (0.02 * x[1] * (1.0 + z), 0.02 * x[1]));
        let m = FlatModel::traceless_shear(7, 1.0 / 16.0, SHEAR)
            .unwrap()
            .with_conformal(f);
        let u: Vec<f64> = sine_direction(&m.grid).iter().map(|v| 0.03 * v).collect();
        let mo = minimal_surface_operator(&m, &u).unwrap();
        for (c, r) in [([0.1, -0.2], 0.3), ([-0.4, 0.3], 0.25), ([0.0, 0.0], 0.6)] {
            let phi = bump(&m.grid, c, r);
            let t = 1e-5;
            let shifted =
                |s: f64| -> Vec<f64> { u.iter().zip(&phi).map(|(a, b)| a + s * b).collect() };
            let fd = (area_functional(&m, &shifted(t)).unwrap()
                - area_functional(&m, &shifted(-t)).unwrap())
                / (2.0 * t);
            let pairing = grid_inner(&m, &mo, &phi);
            assert!(
                (fd - pairing).abs() < 1e-6 * (1.0 + pairing.abs()),
                "{fd} vs {pairing}"
            );
        }
    }

    #[test]
    fn identical_data_gives_zero_residual() {
        let m = FlatModel::traceless_shear(7, 0.0625, SHEAR).unwrap();
        let u: Vec<f64> = test_direction(&m.grid).iter().map(|v| 0.01 * v).collect();
        let f = conformal_probe(0.01);
        let r = linearization_residual(&m, &u, &u, Some(&f), Some(&f)).unwrap();
        assert_eq!(r.norm, 0.0);
    }

    #[test]
    fn quadratic_decay_on_sheared_model() {
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let m = FlatModel::traceless_shear(7, h, SHEAR).unwrap();
            let pts = u_perturbation_study(&m, &[1e-2, 5e-3, 2.5e-3]).unwrap();
            let slope = loglog_slope(&pts);
            assert!((slope - 2.0).abs() < 0.2, "h = {h}: slope {slope}");
        }
    }

    #[test]
    fn euclidean_residual_is_at_least_quadratic() {
        let m = FlatModel::euclidean(7, 1.0 / 16.0).unwrap();
        let pts = u_perturbation_study(&m, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        let slope = loglog_slope(&pts);
        assert!(slope > 1.8 && (slope - 3.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn conformal_term() {
        let m = FlatModel::euclidean(7, 1.0 / 16.0).unwrap();
        let c = conformal_coefficient_extrapolated(&m, 1e-2).unwrap();
        assert!((c - 3.5).abs() < 0.035, "{c}");
        let pts = conformal_study(&m, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        // norm / t → 0.
        assert!(pts[2].1 / pts[2].0 < pts[0].1 / pts[0].0);
        assert!((loglog_slope(&pts) - 2.0).abs() < 0.2);
    }
}
