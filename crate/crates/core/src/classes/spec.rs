use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    full_binary_class, make_bounded_variation_class, make_threshold_class, Domain,
    FiniteFunctionClass, LabelKind, LabelSpace,
};
use crate::{Error, Result, Scalar};

/// JSON description of a class: either explicit values or a named builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassSpec {
    Builder(BuilderSpec),
    Explicit(ExplicitSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case")]
pub enum BuilderSpec {
    Threshold {
        k: usize,
    },
    BoundedVariation {
        grid_size: usize,
        variation: f64,
        grid: Vec<f64>,
    },
    FullBinary {
        m: usize,
    },
    /// Thresholds realizing the adversarial process with horizon `n <= 3`.
    AdversarialThreshold {
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub kind: LabelKind,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitSpec {
    pub domain: Vec<Value>,
    pub labels: LabelSpec,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

fn point_name(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ClassSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("class spec: {e}")))
    }

    pub fn build<T: Scalar>(&self) -> Result<FiniteFunctionClass<T>> {
        let cast = |v: f64| T::from_f64_lossy(v);
        match self {
            ClassSpec::Builder(BuilderSpec::Threshold { k }) => make_threshold_class(*k),
            ClassSpec::Builder(BuilderSpec::FullBinary { m }) => full_binary_class(*m),
            ClassSpec::Builder(BuilderSpec::AdversarialThreshold { n }) => {
                crate::processes::adversarial_threshold_class(*n)
            }
            ClassSpec::Builder(BuilderSpec::BoundedVariation {
                grid_size,
                variation,
                grid,
            }) => {
                let grid = LabelSpace::grid(grid.iter().copied().map(cast).collect())?;
                make_bounded_variation_class(*grid_size, cast(*variation), &grid)
            }
            ClassSpec::Explicit(spec) => {
                let domain = Domain::new(spec.domain.iter().map(point_name).collect())?;
                let labels = match spec.labels.kind {
                    LabelKind::Binary => {
                        if !spec.labels.values.is_empty() && spec.labels.values != [-1.0, 1.0] {
                            return Err(Error::invalid("binary labels must be exactly [-1, 1]"));
                        }
                        LabelSpace::binary()
                    }
                    LabelKind::RealGrid => {
                        LabelSpace::grid(spec.labels.values.iter().copied().map(cast).collect())?
                    }
                };
                let values = spec
                    .values
                    .iter()
                    .map(|r| r.iter().copied().map(cast).collect())
                    .collect();
                FiniteFunctionClass::new(domain, labels, values, spec.names.clone())
            }
        }
    }

    /// Explicit spec reproducing `class`.
    pub fn from_class<T: Scalar>(class: &FiniteFunctionClass<T>) -> Self {
        ClassSpec::Explicit(ExplicitSpec {
            domain: class
                .domain()
                .points()
                .iter()
                .map(|p| Value::String(p.clone()))
                .collect(),
            labels: LabelSpec {
                kind: class.labels().kind(),
                values: class.labels().values().iter().map(|v| v.to_f64_lossy()).collect(),
            },
            values: class
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
            names: class.names().map(|n| n.to_vec()),
        })
    }
}
