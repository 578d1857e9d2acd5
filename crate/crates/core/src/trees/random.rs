//! Random valid trees, validity-preserving jitter and random degeneration DAGs.

use rand::Rng;

use crate::trees::scap::{ConeClass, DegenerationDag, Scenario};
use crate::trees::tree::{InnerBall, ModelRegistry, NodeKind, SmoothModelMeta, TreeNode};

/// Cone classes used by the generators: `(id, density)`.
pub const SAMPLE_CONES: [(&str, f64); 3] = [("simons", 1.4726), ("lawlor", 1.7), ("pair", 2.0)];

pub const DIM: usize = 8;

fn unit(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; DIM];
    v[i] = 1.0;
    v
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|a| a * s).collect()
}

/// Two smooth models with one and two inner balls.
pub fn sample_models() -> ModelRegistry {
    let one = SmoothModelMeta {
        id: "S1".into(),
        density_at_infinity: 2.0,
        outer_cone: "pair".into(),
        inner_balls: vec![InnerBall {
            y: scaled(&unit(0), 0.3),
            r: 0.1,
            cone_class: "simons".into(),
            multiplicity: 1,
        }],
        sigma: 0.1,
    };
    let two = SmoothModelMeta {
        id: "S2".into(),
        density_at_infinity: 3.0,
        outer_cone: "pair".into(),
        inner_balls: vec![
            InnerBall {
                y: scaled(&unit(1), 0.4),
                r: 0.08,
                cone_class: "simons".into(),
                multiplicity: 1,
            },
            InnerBall {
                y: scaled(&unit(1), -0.4),
                r: 0.12,
                cone_class: "lawlor".into(),
                multiplicity: 1,
            },
        ],
        sigma: 0.1,
    };
    crate::trees::tree::registry(vec![one, two]).expect("sample models are valid")
}

fn density_of(cone: &str) -> f64 {
    SAMPLE_CONES
        .iter()
        .find(|c| c.0 == cone)
        .map(|c| c.1)
        .unwrap_or(1.5)
}

fn random_point<R: Rng>(rng: &mut R, scale: f64) -> Vec<f64> {
    (0..DIM).map(|_| rng.random_range(-scale..scale)).collect()
}

/// A random tree satisfying every structural rule with tolerance `beta`.
pub fn random_tree<R: Rng>(rng: &mut R, models: &ModelRegistry, depth: u32, beta: f64) -> TreeNode {
    let x = random_point(rng, 1.0);
    let r = rng.random_range(0.5..4.0);
    grow(
        rng,
        models,
        depth,
        beta,
        x,
        r,
        Forced {
            cone: None,
            m: None,
        },
    )
}

/// Labels a type-I node must carry: the cone and multiplicity from a ball,
/// or only the multiplicity when continuing a type-I chain.
#[derive(Clone)]
struct Forced {
    cone: Option<String>,
    m: Option<u32>,
}

fn grow<R: Rng>(
    rng: &mut R,
    models: &ModelRegistry,
    depth: u32,
    beta: f64,
    x: Vec<f64>,
    r: f64,
    forced: Forced,
) -> TreeNode {
    let choice = if depth == 0 {
        0
    } else {
        rng.random_range(0..3)
    };
    if choice == 2 && forced.cone.is_none() {
        let keys: Vec<&String> = models.keys().collect();
        let meta = &models[keys[rng.random_range(0..keys.len())]];
        let children = meta
            .inner_balls
            .iter()
            .map(|b| {
                let dir = random_point(rng, 1.0);
                let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                let off = rng.random_range(0.0..1.0) * beta * r * b.r;
                let cx: Vec<f64> = x
                    .iter()
                    .zip(&b.y)
                    .zip(&dir)
                    .map(|((a, y), d)| a + r * y + off * d / len)
                    .collect();
                let cr = r * b.r * rng.random_range(0.5..1.0 + beta);
                let f = Forced {
                    cone: Some(b.cone_class.clone()),
                    m: Some(b.multiplicity),
                };
                grow(rng, models, depth - 1, beta, cx, cr, f)
            })
            .collect();
        return TreeNode::with_children(
            NodeKind::TypeII {
                model: meta.id.clone(),
                x,
                r,
            },
            children,
        );
    }
    let cone = forced.cone.unwrap_or_else(|| {
        SAMPLE_CONES[rng.random_range(0..SAMPLE_CONES.len())]
            .0
            .to_string()
    });
    let m = forced.m.unwrap_or_else(|| rng.random_range(1..=2));
    let density = density_of(&cone);
    if choice == 0 {
        return TreeNode::leaf(NodeKind::TypeI {
            cone,
            density,
            m,
            x,
            r,
            rho: 0.0,
        });
    }
    let rho = r * rng.random_range(0.05..0.5);
    let child = grow(
        rng,
        models,
        depth - 1,
        beta,
        x.clone(),
        rho,
        Forced {
            cone: None,
            m: Some(m),
        },
    );
    TreeNode::with_children(
        NodeKind::TypeI {
            cone,
            density,
            m,
            x,
            r,
            rho,
        },
        vec![child],
    )
}

/// Same coarse tree, continuous parameters moved by relative amounts up to
/// `scale`; every structural rule still holds.
pub fn jitter<R: Rng>(
    rng: &mut R,
    tree: &TreeNode,
    models: &ModelRegistry,
    scale: f64,
) -> TreeNode {
    let r = tree.radius();
    let x: Vec<f64> = tree
        .x()
        .iter()
        .map(|v| v + r * scale * rng.random_range(-1.0..1.0))
        .collect();
    let r_new = r * (1.0 + scale * rng.random_range(-1.0..1.0));
    shift(rng, tree, models, scale, x, r_new)
}

fn shift<R: Rng>(
    rng: &mut R,
    node: &TreeNode,
    models: &ModelRegistry,
    scale: f64,
    x: Vec<f64>,
    r: f64,
) -> TreeNode {
    match &node.kind {
        NodeKind::TypeI {
            cone,
            density,
            m,
            rho,
            ..
        } => {
            let rho_new = if *rho > 0.0 {
                (rho * (1.0 + scale * rng.random_range(-1.0..1.0))).min(r / 2.0)
            } else {
                0.0
            };
            let children = node
                .children
                .iter()
                .map(|c| shift(rng, c, models, scale, x.clone(), rho_new))
                .collect();
            TreeNode::with_children(
                NodeKind::TypeI {
                    cone: cone.clone(),
                    density: *density,
                    m: *m,
                    x,
                    r,
                    rho: rho_new,
                },
                children,
            )
        }
        NodeKind::TypeII {
            model,
            x: x_old,
            r: r_old,
        } => {
            let meta = &models[model];
            let children = node
                .children
                .iter()
                .zip(&meta.inner_balls)
                .map(|(c, b)| {
                    let ratio = r / r_old;
                    let cx: Vec<f64> = x
                        .iter()
                        .zip(&b.y)
                        .zip(c.x().iter().zip(x_old))
                        .map(|((a, y), (cx_old, xo))| a + r * y + (cx_old - xo - r_old * y) * ratio)
                        .collect();
                    shift(rng, c, models, scale, cx, c.radius() * ratio)
                })
                .collect();
            TreeNode::with_children(
                NodeKind::TypeII {
                    model: model.clone(),
                    x,
                    r,
                },
                children,
            )
        }
    }
}

/// Random DAG with strictly decreasing densities along every edge.
pub fn random_dag<R: Rng>(
    rng: &mut R,
    size: usize,
    max_scenarios: usize,
    max_children: usize,
) -> DegenerationDag {
    let cones: Vec<ConeClass> = (0..size)
        .map(|i| ConeClass {
            id: format!("c{i}"),
            density: 1.1 + i as f64 * 0.25,
        })
        .collect();
    let mut scenarios = Vec::new();
    for i in 1..size {
        for _ in 0..rng.random_range(0..=max_scenarios) {
            let n = rng.random_range(1..=max_children);
            let children = (0..n)
                .map(|_| cones[rng.random_range(0..i)].id.clone())
                .collect();
            scenarios.push(Scenario {
                parent: cones[i].id.clone(),
                children,
            });
        }
    }
    DegenerationDag { cones, scenarios }
}

/// Adds one random density-decreasing scenario.
pub fn add_random_scenario<R: Rng>(
    rng: &mut R,
    dag: &DegenerationDag,
    max_children: usize,
) -> DegenerationDag {
    let mut out = dag.clone();
    if dag.cones.len() < 2 {
        return out;
    }
    let mut sorted = dag.cones.clone();
    sorted.sort_by(|a, b| a.density.total_cmp(&b.density));
    let p = rng.random_range(1..sorted.len());
    let lower: Vec<&ConeClass> = sorted[..p]
        .iter()
        .filter(|c| c.density < sorted[p].density)
        .collect();
    if lower.is_empty() {
        return out;
    }
    let n = rng.random_range(1..=max_children);
    let children = (0..n)
        .map(|_| lower[rng.random_range(0..lower.len())].id.clone())
        .collect();
    out.scenarios.push(Scenario {
        parent: sorted[p].id.clone(),
        children,
    });
    out
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::trees::tree::{coarse_tree, validate_tree};

    #[test]
    fn generated_trees_are_valid() {
        let models = sample_models();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = random_tree(&mut rng, &models, 4, 0.01);
            let v = validate_tree(&t, 0.01, &models);
            assert!(v.is_empty(), "{v:?}\n{t:?}");
            let u = jitter(&mut rng, &t, &models, 1e-3);
            let v = validate_tree(&u, 0.01, &models);
            assert!(v.is_empty(), "{v:?}");
            assert_eq!(coarse_tree(&t), coarse_tree(&u));
        }
    }

    #[test]
    fn generated_dags_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = random_dag(&mut rng, 8, 3, 3);
            d.validate().unwrap();
            add_random_scenario(&mut rng, &d, 3).validate().unwrap();
        }
    }
}
