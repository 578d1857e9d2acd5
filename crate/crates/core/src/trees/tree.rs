//! Tree representations of cone decompositions, their coarse shapes and
//! the γ-closeness inequality system.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack added to every closeness inequality.
pub const CLOSE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerBall {
    pub y: Vec<f64>,
    pub r: f64,
    pub cone_class: String,
    pub multiplicity: u32,
}

/// Metadata of a smooth model: outer cone plus disjoint inner balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothModelMeta {
    pub id: String,
    pub density_at_infinity: f64,
    pub outer_cone: String,
    pub inner_balls: Vec<InnerBall>,
    pub sigma: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SmoothModelMeta {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(format!("{}: {msg}", self.id)));
        if !(self.sigma > 0.0 && self.sigma < 1.0 / 3.0) {
            return bad(format!("sigma {} outside (0, 1/3)", self.sigma));
        }
        let limit = 1.0 - 3.0 * self.sigma;
        for (i, b) in self.inner_balls.iter().enumerate() {
            if !(b.r > 0.0) || b.multiplicity == 0 {
                return bad(format!("ball {i} needs r > 0 and multiplicity >= 1"));
            }
            if norm(&b.y) + 2.0 * b.r > limit + CLOSE_SLACK {
                return bad(format!("ball {i}: B(y, 2r) not inside B_(1-3 sigma)"));
            }
            for (j, c) in self.inner_balls.iter().enumerate().skip(i + 1) {
                if dist(&b.y, &c.y) < 2.0 * (b.r + c.r) - CLOSE_SLACK {
                    return bad(format!("balls {i} and {j}: doubled balls overlap"));
                }
            }
        }
        Ok(())
    }

    /// `min_α r_α`; a model without inner balls uses 1, the radius of the unit ball.
    pub fn min_inner_radius(&self) -> f64 {
        self.inner_balls.iter().map(|b| b.r).fold(1.0, f64::min)
    }

    /// `r₀ = min(min_α r_α, 1/2)`.
    pub fn r0(&self) -> f64 {
        self.min_inner_radius().min(0.5)
    }
}

pub type ModelRegistry = BTreeMap<String, SmoothModelMeta>;

pub fn registry(models: Vec<SmoothModelMeta>) -> Result<ModelRegistry> {
    let mut out = BTreeMap::new();
    for m in models {
        m.validate()?;
        if out.insert(m.id.clone(), m).is_some() {
            return Err(Error::Invalid("duplicate smooth model id".into()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    TypeI {
        cone: String,
        density: f64,
        m: u32,
        x: Vec<f64>,
        r: f64,
        rho: f64,
    },
    TypeII {
        model: String,
        x: Vec<f64>,
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(kind: NodeKind) -> Self {
        Self {
            kind,
            children: Vec::new(),
        }
    }

    pub fn with_children(kind: NodeKind, children: Vec<TreeNode>) -> Self {
        Self { kind, children }
    }

    pub fn x(&self) -> &[f64] {
        match &self.kind {
            NodeKind::TypeI { x, .. } | NodeKind::TypeII { x, .. } => x,
        }
    }

    pub fn radius(&self) -> f64 {
        match self.kind {
            NodeKind::TypeI { r, .. } | NodeKind::TypeII { r, .. } => r,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    /// Numbers of type-II and type-I nodes.
    pub fn counts(&self) -> (usize, usize) {
        let own = match self.kind {
            NodeKind::TypeI { .. } => (0, 1),
            NodeKind::TypeII { .. } => (1, 0),
        };
        self.children
            .iter()
            .map(TreeNode::counts)
            .fold(own, |a, b| (a.0 + b.0, a.1 + b.1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub rule: String,
}

fn child_path(path: &str, i: usize) -> String {
    format!("{path}/{i}")
}

/// Structural check of a tree against the decomposition rules. `beta` is
/// the tolerance used by the type-II child placement rule.
pub fn validate_tree(tree: &TreeNode, beta: f64, models: &ModelRegistry) -> Vec<Violation> {
    let mut out = Vec::new();
    walk_validate(tree, "root", beta, models, &mut out);
    out
}

fn walk_validate(
    node: &TreeNode,
    path: &str,
    beta: f64,
    models: &ModelRegistry,
    out: &mut Vec<Violation>,
) {
    let mut push = |rule: String| {
        out.push(Violation {
            path: path.to_string(),
            rule,
        })
    };
    match &node.kind {
        NodeKind::TypeI {
            density,
            m,
            x,
            r,
            rho,
            ..
        } => {
            if !(*r > 0.0) {
                push(format!("R > 0 (R = {r})"));
            }
            if !(*rho >= 0.0) {
                push(format!("rho >= 0 (rho = {rho})"));
            }
            if *m == 0 {
                push("m >= 1".into());
            }
            if *r < 2.0 * rho - CLOSE_SLACK {
                push(format!("R >= 2 rho (R = {r}, rho = {rho})"));
            }
            if *rho == 0.0 {
                if *density <= 1.0 {
                    push(format!("leaf density must exceed 1 (density = {density})"));
                }
                if !node.children.is_empty() {
                    push(format!(
                        "rho = 0 node must be a leaf ({} children)",
                        node.children.len()
                    ));
                }
            } else if node.children.len() != 1 {
                push(format!(
                    "rho > 0 node must have exactly one child ({} children)",
                    node.children.len()
                ));
            } else {
                let child = &node.children[0];
                if dist(child.x(), x) > CLOSE_SLACK {
                    push("child x equals parent x".into());
                }
                if (child.radius() - rho).abs() > CLOSE_SLACK {
                    push(format!(
                        "child R equals parent rho (R = {}, rho = {rho})",
                        child.radius()
                    ));
                }
                if let NodeKind::TypeI { m: cm, .. } = child.kind {
                    if cm != *m {
                        push(format!("type-I child keeps m (m = {m}, child m = {cm})"));
                    }
                }
            }
        }
        NodeKind::TypeII { model, x, r } => {
            if !(*r > 0.0) {
                push(format!("R > 0 (R = {r})"));
            }
            match models.get(model) {
                None => push(format!("unknown smooth model '{model}'")),
                Some(meta) => {
                    if node.children.len() != meta.inner_balls.len() {
                        push(format!(
                            "one child per inner ball ({} children, {} balls)",
                            node.children.len(),
                            meta.inner_balls.len()
                        ));
                    }
                    for (i, (child, ball)) in
                        node.children.iter().zip(&meta.inner_balls).enumerate()
                    {
                        let target: Vec<f64> =
                            x.iter().zip(&ball.y).map(|(a, b)| a + r * b).collect();
                        let off = dist(child.x(), &target);
                        if off > beta * r * ball.r + CLOSE_SLACK {
                            push(format!(
                                "child {i}: |x_child - (x + R y)| <= beta R r ({off} > {})",
                                beta * r * ball.r
                            ));
                        }
                        let ratio = child.radius() / (r * ball.r);
                        if ratio < 0.5 - CLOSE_SLACK || ratio > 1.0 + beta + CLOSE_SLACK {
                            push(format!(
                                "child {i}: 1/2 <= R_child/(R r) <= 1 + beta (ratio {ratio})"
                            ));
                        }
                        if let NodeKind::TypeI { cone, m, .. } = &child.kind {
                            if *cone != ball.cone_class || *m != ball.multiplicity {
                                push(format!("child {i}: type-I child carries the ball's cone and multiplicity"));
                            }
                        }
                    }
                }
            }
        }
    }
    for (i, c) in node.children.iter().enumerate() {
        walk_validate(c, &child_path(path, i), beta, models, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum CoarseLabel {
    I { density: f64, m: u32 },
    II { model: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarseTree {
    pub label: CoarseLabel,
    pub children: Vec<CoarseTree>,
}

pub fn coarse_tree(tree: &TreeNode) -> CoarseTree {
    let label = match &tree.kind {
        NodeKind::TypeI { density, m, .. } => CoarseLabel::I {
            density: *density,
            m: *m,
        },
        NodeKind::TypeII { model, .. } => CoarseLabel::II {
            model: model.clone(),
        },
    };
    CoarseTree {
        label,
        children: tree.children.iter().map(coarse_tree).collect(),
    }
}

/// Cross-section distances between cone classes, either tabulated or read
/// off an embedding.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeMetric {
    Table(BTreeMap<(String, String), f64>),
    Embedded(BTreeMap<String, Vec<f64>>),
}

impl ConeMetric {
    pub fn table(entries: impl IntoIterator<Item = (String, String, f64)>) -> Self {
        ConeMetric::Table(entries.into_iter().map(|(a, b, d)| ((a, b), d)).collect())
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        match self {
            ConeMetric::Table(t) => t
                .get(&(a.to_string(), b.to_string()))
                .or_else(|| t.get(&(b.to_string(), a.to_string())))
                .copied()
                .ok_or_else(|| Error::UnknownId(format!("{a}~{b}"))),
            ConeMetric::Embedded(e) => {
                let pa = e.get(a).ok_or_else(|| Error::UnknownId(a.into()))?;
                let pb = e.get(b).ok_or_else(|| Error::UnknownId(b.into()))?;
                Ok(dist(pa, pb))
            }
        }
    }
}

impl Default for ConeMetric {
    fn default() -> Self {
        ConeMetric::Table(BTreeMap::new())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CloseFailure {
    CoarseMismatch {
        detail: String,
    },
    Constraint {
        path: String,
        constraint: String,
        lhs: f64,
        rhs: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Closeness {
    pub close: bool,
    pub failure: Option<CloseFailure>,
}

impl Closeness {
    fn ok() -> Self {
        Self {
            close: true,
            failure: None,
        }
    }
    fn fail(f: CloseFailure) -> Self {
        Self {
            close: false,
            failure: Some(f),
        }
    }
}

fn check(
    path: &str,
    constraint: &str,
    lhs: f64,
    rhs: f64,
) -> std::result::Result<(), CloseFailure> {
    if lhs <= rhs + CLOSE_SLACK {
        Ok(())
    } else {
        Err(CloseFailure::Constraint {
            path: path.into(),
            constraint: constraint.into(),
            lhs,
            rhs,
        })
    }
}

/// The inequality block for one pair of nodes with matching coarse labels.
pub fn node_inequalities(
    a: &NodeKind,
    b: &NodeKind,
    gamma: f64,
    models: &ModelRegistry,
    metric: &ConeMetric,
    path: &str,
) -> Result<std::result::Result<(), CloseFailure>> {
    Ok(match (a, b) {
        (
            NodeKind::TypeI {
                cone: c1,
                x: x1,
                r: r1,
                rho: p1,
                ..
            },
            NodeKind::TypeI {
                cone: c2,
                x: x2,
                r: r2,
                rho: p2,
                ..
            },
        ) => {
            let dh = metric.distance(c1, c2)?;
            (|| {
                check(path, "dist_H(C_a, C_a') <= gamma", dh, gamma)?;
                if *p1 > 0.0 || *p2 > 0.0 {
                    let s = gamma * p1.min(*p2);
                    check(
                        path,
                        "|rho_a - rho_a'| <= gamma min(rho)",
                        (p1 - p2).abs(),
                        s,
                    )?;
                    check(path, "|x_a - x_a'| <= gamma min(rho)", dist(x1, x2), s)?;
                    check(path, "|R_a - R_a'| <= gamma min(rho)", (r1 - r2).abs(), s)
                } else {
                    let s = gamma * r1.min(*r2);
                    check(path, "|x_a - x_a'| <= gamma min(R)", dist(x1, x2), s)?;
                    check(path, "|R_a - R_a'| <= gamma min(R)", (r1 - r2).abs(), s)
                }
            })()
        }
        (
            NodeKind::TypeII {
                model,
                x: x1,
                r: r1,
            },
            NodeKind::TypeII { x: x2, r: r2, .. },
        ) => {
            let meta = models
                .get(model)
                .ok_or_else(|| Error::UnknownId(model.clone()))?;
            let s = gamma * r1.min(*r2) * meta.min_inner_radius();
            (|| {
                check(
                    path,
                    "|x_b - x_b'| <= gamma min(R) min(r_alpha)",
                    dist(x1, x2),
                    s,
                )?;
                check(
                    path,
                    "|R_b - R_b'| <= gamma min(R) min(r_alpha)",
                    (r1 - r2).abs(),
                    s,
                )
            })()
        }
        _ => Err(CloseFailure::CoarseMismatch {
            detail: format!("node kinds differ at {path}"),
        }),
    })
}

/// γ-closeness: identical coarse trees, then the inequality block at every
/// node pair (pre-order). Reports the first failure.
pub fn gamma_close(
    a: &TreeNode,
    b: &TreeNode,
    gamma: f64,
    models: &ModelRegistry,
    metric: &ConeMetric,
) -> Result<Closeness> {
    if coarse_tree(a) != coarse_tree(b) {
        return Ok(Closeness::fail(CloseFailure::CoarseMismatch {
            detail: "coarse trees differ".into(),
        }));
    }
    let mut stack = vec![(a, b, "root".to_string())];
    while let Some((p, q, path)) = stack.pop() {
        if let Err(f) = node_inequalities(&p.kind, &q.kind, gamma, models, metric, &path)? {
            return Ok(Closeness::fail(f));
        }
        for (i, (c, d)) in p.children.iter().zip(&q.children).enumerate().rev() {
            stack.push((c, d, child_path(&path, i)));
        }
    }
    Ok(Closeness::ok())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootMeta {
    pub base_surface: String,
    pub base_metric: String,
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleTree {
    pub root: RootMeta,
    pub subtrees: Vec<TreeNode>,
}

impl LargeScaleTree {
    pub fn validate(&self) -> Result<()> {
        let RootMeta { points, radii, .. } = &self.root;
        if points.len() != radii.len() || points.len() != self.subtrees.len() {
            return Err(Error::Invalid(
                "one radius and one subtree per singular point".into(),
            ));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if dist(&points[i], &points[j]) < radii[i] + radii[j] {
                    return Err(Error::Invalid(format!(
                        "balls around singular points {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn gamma_close_large_scale(
    a: &LargeScaleTree,
    b: &LargeScaleTree,
    gamma: f64,
    models: &ModelRegistry,
    metric: &ConeMetric,
) -> Result<Closeness> {
    if a.root != b.root || a.subtrees.len() != b.subtrees.len() {
        return Ok(Closeness::fail(CloseFailure::CoarseMismatch {
            detail: "root labels differ".into(),
        }));
    }
    for (i, (s, t)) in a.subtrees.iter().zip(&b.subtrees).enumerate() {
        let v = gamma_close(s, t, gamma, models, metric)?;
        if !v.close {
            let failure = v.failure.map(|f| match f {
                CloseFailure::Constraint {
                    path,
                    constraint,
                    lhs,
                    rhs,
                } => CloseFailure::Constraint {
                    path: format!("point{i}:{path}"),
                    constraint,
                    lhs,
                    rhs,
                },
                CloseFailure::CoarseMismatch { detail } => CloseFailure::CoarseMismatch {
                    detail: format!("point {i}: {detail}"),
                },
            });
            return Ok(Closeness {
                close: false,
                failure,
            });
        }
    }
    Ok(Closeness::ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(density: f64, rho: f64, r: f64) -> TreeNode {
        TreeNode::leaf(NodeKind::TypeI {
            cone: "simons".into(),
            density,
            m: 1,
            x: vec![0.0; 8],
            r,
            rho,
        })
    }

    fn type_i(rho: f64, child: TreeNode) -> TreeNode {
        TreeNode::with_children(
            NodeKind::TypeI {
                cone: "simons".into(),
                density: 1.4726,
                m: 1,
                x: vec![0.0; 8],
                r: 1.0,
                rho,
            },
            vec![child],
        )
    }

    fn model() -> ModelRegistry {
        let mut y = vec![0.0; 8];
        y[0] = 0.3;
        registry(vec![SmoothModelMeta {
            id: "S1".into(),
            density_at_infinity: 2.0,
            outer_cone: "simons".into(),
            inner_balls: vec![InnerBall {
                y,
                r: 0.1,
                cone_class: "simons".into(),
                multiplicity: 1,
            }],
            sigma: 0.1,
        }])
        .unwrap()
    }

    #[test]
    fn leaf_rules() {
        let m = ModelRegistry::new();
        assert!(validate_tree(&leaf(1.47, 0.0, 1.0), 0.01, &m).is_empty());
        let v = validate_tree(&leaf(1.0, 0.0, 1.0), 0.01, &m);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.starts_with("leaf density must exceed 1"));
        let v = validate_tree(&type_i(0.3, leaf(1.47, 0.0, 0.3)), 0.01, &m);
        assert!(v.is_empty(), "{v:?}");
        let mut bad = type_i(0.3, leaf(1.47, 0.0, 0.3));
        if let NodeKind::TypeI { r, .. } = &mut bad.kind {
            *r = 0.5;
        }
        let v = validate_tree(&bad, 0.01, &m);
        assert!(v.iter().any(|x| x.rule.starts_with("R >= 2 rho")));
    }

    #[test]
    fn type_ii_children() {
        let reg = model();
        let mut cx = vec![0.0; 8];
        cx[0] = 0.6;
        let child = TreeNode::leaf(NodeKind::TypeI {
            cone: "simons".into(),
            density: 1.47,
            m: 1,
            x: cx.clone(),
            r: 0.2,
            rho: 0.0,
        });
        let t = TreeNode::with_children(
            NodeKind::TypeII {
                model: "S1".into(),
                x: vec![0.0; 8],
                r: 2.0,
            },
            vec![child],
        );
        assert!(validate_tree(&t, 0.01, &reg).is_empty());
        let mut far = t.clone();
        if let NodeKind::TypeI { x, .. } = &mut far.children[0].kind {
            x[0] = 0.7;
        }
        let v = validate_tree(&far, 0.01, &reg);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "root");
        assert!(validate_tree(&t, 0.01, &ModelRegistry::new())[0]
            .rule
            .contains("unknown smooth model"));
    }

    #[test]
    fn model_validation() {
        let mut meta = model()["S1"].clone();
        meta.inner_balls[0].r = 0.3;
        assert!(meta.validate().is_err());
        meta.inner_balls[0].r = 0.1;
        meta.sigma = 0.4;
        assert!(meta.validate().is_err());
    }

    #[test]
    fn coarse_relabel() {
        let t = leaf(1.47, 0.0, 1.0);
        assert_eq!(
            coarse_tree(&t),
            CoarseTree {
                label: CoarseLabel::I {
                    density: 1.47,
                    m: 1
                },
                children: vec![]
            }
        );
        let u = leaf(1.47, 0.0, 3.0);
        assert_eq!(coarse_tree(&t), coarse_tree(&u));
        assert_ne!(
            coarse_tree(&t),
            coarse_tree(&type_i(0.3, leaf(1.47, 0.0, 0.3)))
        );
    }

    #[test]
    fn rho_constraint_example() {
        let reg = ModelRegistry::new();
        let metric = ConeMetric::default();
        let a = type_i(0.1, leaf(1.47, 0.0, 0.1));
        let b = type_i(0.1005, leaf(1.47, 0.0, 0.1005));
        assert!(gamma_close(&a, &a, 1e-9, &reg, &metric).unwrap().close);
        assert!(gamma_close(&a, &b, 0.01, &reg, &metric).unwrap().close);
        let v = gamma_close(&a, &b, 0.004, &reg, &metric).unwrap();
        match v.failure {
            Some(CloseFailure::Constraint {
                constraint, path, ..
            }) => {
                assert_eq!(constraint, "|rho_a - rho_a'| <= gamma min(rho)");
                assert_eq!(path, "root");
            }
            other => panic!("{other:?}"),
        }
        let c = leaf(1.47, 0.0, 1.0);
        assert!(matches!(
            gamma_close(&a, &c, 0.5, &reg, &metric).unwrap().failure,
            Some(CloseFailure::CoarseMismatch { .. })
        ));
    }

    #[test]
    fn cone_distance_lookup() {
        let m = ConeMetric::table([("a".to_string(), "b".to_string(), 0.3)]);
        assert_eq!(m.distance("b", "a").unwrap(), 0.3);
        assert!(m.distance("a", "c").is_err());
    }

    #[test]
    fn large_scale() {
        let reg = ModelRegistry::new();
        let metric = ConeMetric::default();
        let root = RootMeta {
            base_surface: "s".into(),
            base_metric: "g".into(),
            points: vec![vec![0.0; 8], vec![1.0; 8]],
            radii: vec![0.5, 0.5],
        };
        let t = LargeScaleTree {
            root: root.clone(),
            subtrees: vec![leaf(1.47, 0.0, 0.5), leaf(1.47, 0.0, 0.5)],
        };
        t.validate().unwrap();
        assert!(
            gamma_close_large_scale(&t, &t, 0.001, &reg, &metric)
                .unwrap()
                .close
        );
        let mut u = t.clone();
        u.subtrees[1] = leaf(1.47, 0.0, 0.6);
        assert!(
            !gamma_close_large_scale(&t, &u, 0.001, &reg, &metric)
                .unwrap()
                .close
        );
        let mut w = t.clone();
        w.root.points.pop();
        w.root.radii.pop();
        w.subtrees.pop();
        assert!(
            !gamma_close_large_scale(&t, &w, 0.5, &reg, &metric)
                .unwrap()
                .close
        );
    }
}
