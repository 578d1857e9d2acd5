//! File schemas: cone descriptors, coefficient lists, trees, DAGs, surfaces,
//! cone metrics, field dumps and CSV tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::Grid2;
use crate::growth::ModeTerm;
use crate::spectrum::{ConeDescriptor, ConeKind};
use crate::trees::{
    ConeMetric, DegenerationDag, LargeScaleTree, ModelRegistry, NodeKind, RootMeta,
    SmoothModelMeta, TreeNode,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeRecord {
    label: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<(f64, u64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<f64>,
}

pub fn parse_cone(text: &str) -> Result<ConeDescriptor> {
    let rec: ConeRecord = serde_json::from_str(text)?;
    let need = |what: &str| {
        Error::Parse(format!(
            "cone '{}' of kind {} needs field '{what}'",
            rec.label, rec.kind
        ))
    };
    let cone = match rec.kind.as_str() {
        "product_sphere" => ConeDescriptor {
            label: rec.label.clone(),
            kind: ConeKind::ProductSphere {
                p: rec.p.ok_or_else(|| need("p"))?,
                q: rec.q.ok_or_else(|| need("q"))?,
            },
        },
        "custom" => ConeDescriptor {
            label: rec.label.clone(),
            kind: ConeKind::CustomSpectrum {
                n: rec.n.ok_or_else(|| need("n"))?,
                entries: rec.entries.clone().ok_or_else(|| need("entries"))?,
                density: rec.density,
            },
        },
        other => return Err(Error::Parse(format!("unknown cone kind '{other}'"))),
    };
    cone.validate()?;
    Ok(cone)
}

pub fn cone_to_json(cone: &ConeDescriptor) -> String {
    let rec = match &cone.kind {
        ConeKind::ProductSphere { p, q } => ConeRecord {
            label: cone.label.clone(),
            kind: "product_sphere".into(),
            p: Some(*p),
            q: Some(*q),
            n: None,
            entries: None,
            density: None,
        },
        ConeKind::CustomSpectrum {
            n,
            entries,
            density,
        } => ConeRecord {
            label: cone.label.clone(),
            kind: "custom".into(),
            p: None,
            q: None,
            n: Some(*n),
            entries: Some(entries.clone()),
            density: *density,
        },
    };
    serde_json::to_string_pretty(&rec).expect("cone record serializes")
}

/// `[[j, c_plus, c_minus], ...]`.
pub fn parse_coefficients(text: &str) -> Result<Vec<ModeTerm>> {
    let rows: Vec<(f64, f64, f64)> = serde_json::from_str(text)?;
    rows.into_iter()
        .map(|(j, c_plus, c_minus)| {
            if j < 1.0 || j.fract() != 0.0 {
                return Err(Error::Parse(format!(
                    "mode index {j} is not a positive integer"
                )));
            }
            Ok(ModeTerm {
                j: j as usize,
                c_plus,
                c_minus,
            })
        })
        .collect()
}

pub fn coefficients_to_json(terms: &[ModeTerm]) -> String {
    let rows: Vec<(usize, f64, f64)> = terms.iter().map(|t| (t.j, t.c_plus, t.c_minus)).collect();
    serde_json::to_string(&rows).expect("coefficients serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    x: Vec<f64>,
    #[serde(rename = "R")]
    r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(default)]
    children: Vec<NodeRecord>,
}

fn node_from_record(rec: NodeRecord, path: &str) -> Result<TreeNode> {
    let need = |what: &str| Error::Parse(format!("{path}: type-{} node needs '{what}'", rec.kind));
    let kind = match rec.kind.as_str() {
        "I" => NodeKind::TypeI {
            cone: rec.cone.clone().ok_or_else(|| need("cone"))?,
            density: rec.density.ok_or_else(|| need("density"))?,
            m: rec.m.ok_or_else(|| need("m"))?,
            x: rec.x.clone(),
            r: rec.r,
            rho: rec.rho.ok_or_else(|| need("rho"))?,
        },
        "II" => NodeKind::TypeII {
            model: rec.model.clone().ok_or_else(|| need("model"))?,
            x: rec.x.clone(),
            r: rec.r,
        },
        other => return Err(Error::Parse(format!("{path}: unknown node kind '{other}'"))),
    };
    let children = rec
        .children
        .into_iter()
        .enumerate()
        .map(|(i, c)| node_from_record(c, &format!("{path}/{i}")))
        .collect::<Result<_>>()?;
    Ok(TreeNode { kind, children })
}

fn node_to_record(node: &TreeNode) -> NodeRecord {
    let children = node.children.iter().map(node_to_record).collect();
    match &node.kind {
        NodeKind::TypeI {
            cone,
            density,
            m,
            x,
            r,
            rho,
        } => NodeRecord {
            kind: "I".into(),
            cone: Some(cone.clone()),
            density: Some(*density),
            m: Some(*m),
            model: None,
            x: x.clone(),
            r: *r,
            rho: Some(*rho),
            children,
        },
        NodeKind::TypeII { model, x, r } => NodeRecord {
            kind: "II".into(),
            cone: None,
            density: None,
            m: None,
            model: Some(model.clone()),
            x: x.clone(),
            r: *r,
            rho: None,
            children,
        },
    }
}

pub fn parse_tree_value(v: Value) -> Result<TreeNode> {
    node_from_record(serde_json::from_value(v)?, "root")
}

pub fn parse_tree(text: &str) -> Result<TreeNode> {
    parse_tree_value(serde_json::from_str(text)?)
}

pub fn tree_to_value(tree: &TreeNode) -> Value {
    serde_json::to_value(node_to_record(tree)).expect("tree serializes")
}

pub fn tree_to_json(tree: &TreeNode) -> String {
    serde_json::to_string_pretty(&node_to_record(tree)).expect("tree serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LargeScaleRecord {
    root: RootMeta,
    subtrees: Vec<NodeRecord>,
}

/// Either a single tree or `{"root": {...}, "subtrees": [...]}`.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeFile {
    Single(TreeNode),
    LargeScale(LargeScaleTree),
}

pub fn parse_tree_file(text: &str) -> Result<TreeFile> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("subtrees").is_some() {
        let rec: LargeScaleRecord = serde_json::from_value(v)?;
        let subtrees = rec
            .subtrees
            .into_iter()
            .enumerate()
            .map(|(i, s)| node_from_record(s, &format!("point{i}:root")))
            .collect::<Result<_>>()?;
        Ok(TreeFile::LargeScale(LargeScaleTree {
            root: rec.root,
            subtrees,
        }))
    } else {
        parse_tree_value(v).map(TreeFile::Single)
    }
}

pub fn large_scale_to_json(t: &LargeScaleTree) -> String {
    let rec = LargeScaleRecord {
        root: t.root.clone(),
        subtrees: t.subtrees.iter().map(node_to_record).collect(),
    };
    serde_json::to_string_pretty(&rec).expect("large-scale tree serializes")
}

/// A list of smooth-model records; each is validated.
pub fn parse_models(text: &str) -> Result<ModelRegistry> {
    let models: Vec<SmoothModelMeta> = serde_json::from_str(text)?;
    crate::trees::registry(models)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricRecord {
    #[serde(default)]
    distances: Option<Vec<(String, String, f64)>>,
    #[serde(default)]
    embedding: Option<BTreeMap<String, Vec<f64>>>,
}

/// `{"distances": [[a, b, d], ...]}` or `{"embedding": {"id": [coords], ...}}`.
pub fn parse_cone_metric(text: &str) -> Result<ConeMetric> {
    let rec: MetricRecord = serde_json::from_str(text)?;
    match (rec.distances, rec.embedding) {
        (Some(d), None) => {
            if let Some(bad) = d.iter().find(|e| !(e.2 >= 0.0)) {
                return Err(Error::Parse(format!(
                    "negative cone distance {} between {} and {}",
                    bad.2, bad.0, bad.1
                )));
            }
            Ok(ConeMetric::table(d))
        }
        (None, Some(e)) => Ok(ConeMetric::Embedded(e)),
        _ => Err(Error::Parse(
            "cone metric needs exactly one of 'distances' or 'embedding'".into(),
        )),
    }
}

pub fn parse_dag(text: &str) -> Result<DegenerationDag> {
    let dag: DegenerationDag = serde_json::from_str(text)?;
    dag.validate()?;
    Ok(dag)
}

/// Singular set of a hypersurface, by tangent cone id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceRecord {
    pub singular_points: Vec<String>,
    #[serde(default)]
    pub one_sided: bool,
}

pub fn parse_surface(text: &str) -> Result<SurfaceRecord> {
    Ok(serde_json::from_str(text)?)
}

/// Header of a field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n: usize,
    pub h: f64,
    pub extent: [f64; 2],
}

/// CSV dump of grid samples: a `# {json header}` line, then `x1,x2,value` rows.
pub fn field_to_csv(n: usize, grid: &Grid2, values: &[f64]) -> Result<String> {
    if values.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    let header = FieldHeader {
        n,
        h: grid.h,
        extent: [grid.origin, grid.origin + grid.h * (grid.m - 1) as f64],
    };
    let mut t = Table::new(&["x1", "x2", "value"]);
    for (p, v) in values.iter().enumerate() {
        let [a, b] = grid.coords(p);
        t.push(vec![fmt_f64(a), fmt_f64(b), fmt_f64(*v)]);
    }
    Ok(format!(
        "# {}\n{}",
        serde_json::to_string(&header)?,
        t.to_csv()
    ))
}

pub fn parse_field_csv(text: &str) -> Result<(FieldHeader, Vec<f64>)> {
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("empty field file".into()))?;
    let header: FieldHeader = serde_json::from_str(
        first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("field file must start with '# {header}'".into()))?,
    )?;
    let mut rdr = csv::Reader::from_reader(rest.as_bytes());
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let v = rec
            .get(2)
            .ok_or_else(|| Error::Parse("field row needs three columns".into()))?;
        values.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{v}: {e}")))?,
        );
    }
    Ok((header, values))
}

/// Shortest round-trip decimal, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v != 0.0 && !(1e-4..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Header plus string rows, written as RFC-4180 CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::random::{random_tree, sample_models};
    use rand::SeedableRng;

    #[test]
    fn cone_round_trip() {
        let c = parse_cone(r#"{"label":"simons","kind":"product_sphere","p":3,"q":3}"#).unwrap();
        assert_eq!(c, ConeDescriptor::simons());
        assert_eq!(parse_cone(&cone_to_json(&c)).unwrap(), c);
        let custom = ConeDescriptor::custom("x", 7, vec![(-6.0, 1), (0.0, 8)], Some(1.5)).unwrap();
        assert_eq!(parse_cone(&cone_to_json(&custom)).unwrap(), custom);
        assert!(parse_cone(r#"{"label":"a","kind":"product_sphere","p":3}"#).is_err());
        assert!(parse_cone(r#"{"label":"a","kind":"torus"}"#).is_err());
    }

    #[test]
    fn coefficients_round_trip() {
        let t = parse_coefficients("[[1, 1.0, -0.5], [3, 0, 2e-3]]").unwrap();
        assert_eq!(
            t[1],
            ModeTerm {
                j: 3,
                c_plus: 0.0,
                c_minus: 2e-3
            }
        );
        assert_eq!(parse_coefficients(&coefficients_to_json(&t)).unwrap(), t);
        assert!(parse_coefficients("[[0, 1, 1]]").is_err());
    }

    #[test]
    fn tree_round_trip() {
        let models = sample_models();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = random_tree(&mut rng, &models, 3, 0.01);
            assert_eq!(parse_tree(&tree_to_json(&t)).unwrap(), t);
        }
        let err = parse_tree(r#"{"kind":"I","x":[0],"R":1,"rho":0}"#).unwrap_err();
        assert!(err.to_string().contains("cone"));
    }

    #[test]
    fn large_scale_and_dag() {
        let text = r#"{"root":{"base_surface":"s","base_metric":"g","points":[[0,0]],"radii":[0.5]},
            "subtrees":[{"kind":"I","cone":"c","density":1.5,"m":1,"x":[0,0],"R":0.5,"rho":0}]}"#;
        let TreeFile::LargeScale(t) = parse_tree_file(text).unwrap() else {
            panic!()
        };
        assert!(
            matches!(parse_tree_file(&large_scale_to_json(&t)).unwrap(), TreeFile::LargeScale(u) if u == t)
        );
        let dag = parse_dag(r#"{"cones":[{"id":"A","density":2},{"id":"B","density":1.5}],"scenarios":[{"parent":"A","children":["B","B"]}]}"#).unwrap();
        assert_eq!(dag.scenarios.len(), 1);
        assert!(parse_dag(
            r#"{"cones":[{"id":"A","density":1}],"scenarios":[{"parent":"A","children":["A"]}]}"#
        )
        .is_err());
    }

    #[test]
    fn metric_files() {
        let m = parse_cone_metric(r#"{"distances":[["a","b",0.2]]}"#).unwrap();
        assert_eq!(m.distance("b", "a").unwrap(), 0.2);
        let e = parse_cone_metric(r#"{"embedding":{"a":[0,0],"b":[3,4]}}"#).unwrap();
        assert_eq!(e.distance("a", "b").unwrap(), 5.0);
        assert!(parse_cone_metric("{}").is_err());
    }

    #[test]
    fn field_csv_round_trip() {
        let g = Grid2::with_spacing(0.5).unwrap();
        let vals = g.sample(|[x, y]| x * 0.1 + y);
        let text = field_to_csv(7, &g, &vals).unwrap();
        assert!(text.starts_with("# {\"n\":7,\"h\":0.5,\"extent\":[-1.0,1.0]}\n"));
        let (h, back) = parse_field_csv(&text).unwrap();
        assert_eq!(h.n, 7);
        assert_eq!(back, vals);
    }

    #[test]
    fn table_is_rfc4180() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\r\n1,\"x,y\"\r\n");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_f64(3e20), "3e20");
        assert_eq!(fmt_f64(0.0), "0");
        for v in [1.234e-9, 6.02e23, 0.1 + 0.2] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
