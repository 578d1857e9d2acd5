//! Density ladders and the SCAP recursion over declared degeneration scenarios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityLadder {
    pub base_densities: Vec<f64>,
    pub merged: Vec<f64>,
}

/// All `m θ_i ≤ cutoff`, sorted and deduplicated.
pub fn density_ladder(base: &[f64], cutoff: f64) -> Result<DensityLadder> {
    if base.first() != Some(&1.0) {
        return Err(Error::Invalid("density ladder must start at 1".into()));
    }
    if base.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid(
            "base densities must be strictly increasing".into(),
        ));
    }
    if !(cutoff >= 1.0) {
        return Err(Error::Domain(format!(
            "cutoff {cutoff} < 1 leaves an empty ladder"
        )));
    }
    let tol = 1e-9 * cutoff;
    let mut merged: Vec<f64> = Vec::new();
    for &theta in base {
        let mut m = 1.0;
        while m * theta <= cutoff + tol {
            merged.push(m * theta);
            m += 1.0;
        }
    }
    merged.sort_by(f64::total_cmp);
    merged.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    Ok(DensityLadder {
        base_densities: base.to_vec(),
        merged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeClass {
    pub id: String,
    pub density: f64,
}

/// One degeneration scenario: `parent` degenerates into the multiset `children`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub parent: String,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DegenerationDag {
    pub cones: Vec<ConeClass>,
    pub scenarios: Vec<Scenario>,
}

pub type ScapTable = BTreeMap<String, u64>;

impl DegenerationDag {
    pub fn density(&self, id: &str) -> Option<f64> {
        self.cones.iter().find(|c| c.id == id).map(|c| c.density)
    }

    /// Known ids, positive densities and strictly density-decreasing edges.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for c in &self.cones {
            if !(c.density > 0.0) {
                return Err(Error::InvalidDag(format!(
                    "cone {} has density {}",
                    c.id, c.density
                )));
            }
            if seen.insert(c.id.as_str(), c.density).is_some() {
                return Err(Error::InvalidDag(format!("duplicate cone id {}", c.id)));
            }
        }
        for s in &self.scenarios {
            let pd = *seen
                .get(s.parent.as_str())
                .ok_or_else(|| Error::UnknownId(s.parent.clone()))?;
            for c in &s.children {
                let cd = *seen
                    .get(c.as_str())
                    .ok_or_else(|| Error::UnknownId(c.clone()))?;
                if !(cd < pd) {
                    return Err(Error::InvalidDag(format!(
                        "edge {} -> {c} does not decrease density ({pd} -> {cd})",
                        s.parent
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn scenarios_of<'a>(&'a self, parent: &'a str) -> impl Iterator<Item = &'a Scenario> + 'a {
        self.scenarios.iter().filter(move |s| s.parent == parent)
    }

    /// SCAP of every cone, memoised.
    pub fn scap_table(&self) -> Result<ScapTable> {
        let mut memo = ScapTable::new();
        for c in &self.cones {
            scap_memo(self, &c.id, &mut memo, &mut Vec::new())?;
        }
        Ok(memo)
    }
}

fn scap_memo(
    dag: &DegenerationDag,
    id: &str,
    memo: &mut ScapTable,
    stack: &mut Vec<String>,
) -> Result<u64> {
    if let Some(&v) = memo.get(id) {
        return Ok(v);
    }
    if dag.density(id).is_none() {
        return Err(Error::UnknownId(id.to_string()));
    }
    if stack.iter().any(|s| s == id) {
        stack.push(id.to_string());
        return Err(Error::Cycle(stack.join(" -> ")));
    }
    stack.push(id.to_string());
    let mut best = 0u64;
    for s in dag.scenarios_of(id) {
        let mut sum = 0u64;
        for c in &s.children {
            sum += scap_memo(dag, c, memo, stack)?;
        }
        best = best.max(sum);
    }
    stack.pop();
    let v = 1 + best;
    memo.insert(id.to_string(), v);
    Ok(v)
}

/// `1` for a cone without scenarios, else `1 + max_scenario Σ SCAP(child)`.
pub fn scap_cone(dag: &DegenerationDag, id: &str) -> Result<u64> {
    scap_memo(dag, id, &mut ScapTable::new(), &mut Vec::new())
}

/// Sum over singular points, doubled for one-sided hypersurfaces.
pub fn scap_surface(points: &[String], one_sided: bool, dag: &DegenerationDag) -> Result<u64> {
    let mut memo = ScapTable::new();
    let mut sum = 0u64;
    for p in points {
        sum += scap_memo(dag, p, &mut memo, &mut Vec::new())?;
    }
    Ok(if one_sided { 2 * sum } else { sum })
}

/// Every scenario of `parent` satisfies `1 + Σ table[child] ≤ table[parent]`.
pub fn scap_usc_check(dag: &DegenerationDag, table: &ScapTable, parent: &str) -> bool {
    let Some(&top) = table.get(parent) else {
        return false;
    };
    dag.scenarios_of(parent).all(|s| {
        let sum: Option<u64> = s.children.iter().map(|c| table.get(c).copied()).sum();
        sum.is_some_and(|v| v < top)
    })
}
