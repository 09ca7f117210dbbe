//! Linear structural causal models over normalised features.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureKind, Schema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralEquation {
    pub child: String,
    pub parents: Vec<String>,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub intercept: f64,
}

impl StructuralEquation {
    pub fn new(child: &str, parents: &[&str], coefficients: &[f64], intercept: f64) -> Self {
        StructuralEquation {
            child: child.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            coefficients: coefficients.to_vec(),
            intercept,
        }
    }

    /// Noise-free value of the child given parent values.
    pub fn value(&self, parents: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(parents).map(|(c, p)| c * p).sum::<f64>()
    }
}

/// Ordered linear equations. An empty spec is the non-causal setting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub equations: Vec<StructuralEquation>,
}

/// An SCM resolved against a schema, equations in topological order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompiledScm {
    /// (child column, [(parent column, coefficient)])
    order: Vec<(usize, Vec<(usize, f64)>)>,
}

impl ScmSpec {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| Error::load(path, e.to_string()))
    }

    pub fn compile(&self, schema: &Schema) -> Result<CompiledScm> {
        let column = |name: &str| -> Result<usize> {
            let f = schema
                .features()
                .iter()
                .position(|f| f.name == name)
                .ok_or_else(|| Error::Config(format!("SCM refers to unknown feature `{name}`")))?;
            if schema.features()[f].kind != FeatureKind::Continuous {
                return Err(Error::Config(format!("SCM feature `{name}` must be continuous")));
            }
            Ok(schema.span(f).start)
        };
        let mut eqs = Vec::with_capacity(self.equations.len());
        for e in &self.equations {
            if e.parents.len() != e.coefficients.len() {
                return Err(Error::Config(format!("equation for `{}`: parents and coefficients differ in length", e.child)));
            }
            let parents = e
                .parents
                .iter()
                .zip(&e.coefficients)
                .map(|(p, c)| Ok((column(p)?, *c)))
                .collect::<Result<Vec<_>>>()?;
            eqs.push((column(&e.child)?, parents));
        }
        let mut children: Vec<usize> = eqs.iter().map(|e| e.0).collect();
        children.sort_unstable();
        if children.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("a feature has more than one structural equation".into()));
        }
        // Kahn: an equation is ready once none of its parents is a pending child.
        let mut pending = eqs;
        let mut order = Vec::with_capacity(pending.len());
        while !pending.is_empty() {
            let ready = pending
                .iter()
                .position(|(_, ps)| ps.iter().all(|(p, _)| !pending.iter().any(|(c, _)| c == p)))
                .ok_or_else(|| Error::Config("SCM contains a cycle".into()))?;
            order.push(pending.remove(ready));
        }
        Ok(CompiledScm { order })
    }
}

impl CompiledScm {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Apply an additive action and push the changes down the graph.
    /// Each child keeps its own residual: it moves by the weighted change
    /// of its parents, plus any direct action on it.
    pub fn propagate(&self, q: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = q.iter().zip(action).map(|(a, b)| a + b).collect();
        for (child, parents) in &self.order {
            let shift: f64 = parents.iter().map(|(p, c)| c * (x[*p] - q[*p])).sum();
            x[*child] += shift;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;

    fn schema() -> Schema {
        Schema::new(
            vec![
                FeatureSchema::continuous("a", true),
                FeatureSchema::continuous("b", true),
                FeatureSchema::continuous("c", true),
            ],
            vec!["0".into(), "1".into()],
        )
        .unwrap()
    }

    #[test]
    fn chain_propagates_in_topological_order() {
        // listed out of order on purpose
        let spec = ScmSpec {
            equations: vec![
                StructuralEquation::new("c", &["b"], &[3.0], 0.0),
                StructuralEquation::new("b", &["a"], &[2.0], 0.0),
            ],
        };
        let scm = spec.compile(&schema()).unwrap();
        let x = scm.propagate(&[0.1, 0.2, 0.3], &[0.1, 0.0, 0.0]);
        assert!((x[0] - 0.2).abs() < 1e-12);
        assert!((x[1] - 0.4).abs() < 1e-12);
        assert!((x[2] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn cycles_and_unknown_features_are_rejected() {
        let cyc = ScmSpec {
            equations: vec![
                StructuralEquation::new("a", &["b"], &[1.0], 0.0),
                StructuralEquation::new("b", &["a"], &[1.0], 0.0),
            ],
        };
        assert!(cyc.compile(&schema()).unwrap_err().to_string().contains("cycle"));
        let unknown = ScmSpec { equations: vec![StructuralEquation::new("z", &["a"], &[1.0], 0.0)] };
        assert!(unknown.compile(&schema()).is_err());
    }

    #[test]
    fn empty_spec_is_identity() {
        let scm = ScmSpec::default().compile(&schema()).unwrap();
        assert_eq!(scm.propagate(&[0.1, 0.2, 0.3], &[0.0, 0.5, 0.0]), vec![0.1, 0.7, 0.3]);
    }
}
