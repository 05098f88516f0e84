//! The black-box classifier interface and its built-in implementations.
//!
//! The solver only ever sees labels in `{0, 1}`; `0` is the adverse class.
//! Predictors are asked for whole batches because the cache issues one
//! request per action over the entire affected population.

mod external;
mod logistic;
mod rules;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use external::ExternalPredictor;
pub use logistic::{train_logistic, LogisticConfig, LogisticModel};
pub use rules::{load_rule_predictor, Condition, Rule, RulePredictor, RuleSet};

use crate::error::Result;
use crate::schema::{Dataset, FeatureSchema, Instance};

pub type Label = u8;

pub trait Predictor: Send + Sync {
    fn name(&self) -> &str;

    /// Labels for every instance of the batch, in order. Implementations
    /// must be deterministic.
    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>>;

    fn predict(&self, x: &Instance) -> Result<Label> {
        Ok(self.predict_batch(std::slice::from_ref(x))?[0])
    }
}

/// A predictor that returns the same label for everything.
#[derive(Debug, Clone)]
pub struct ConstantPredictor {
    pub label: Label,
}

impl Predictor for ConstantPredictor {
    fn name(&self) -> &str {
        if self.label == 0 {
            "constant-0"
        } else {
            "constant-1"
        }
    }

    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>> {
        Ok(vec![self.label; batch.len()])
    }
}

/// Wraps a closure as a predictor; handy for tests and embedding.
pub struct FnPredictor<F> {
    name: String,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&Instance) -> Label + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnPredictor {
            name: name.into(),
            f,
        }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&Instance) -> Label + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>> {
        Ok(batch.iter().map(|x| (self.f)(x)).collect())
    }
}

/// Indices of the instances the predictor assigns to the adverse class,
/// in dataset order.
pub fn compute_affected(data: &Dataset, predictor: &dyn Predictor) -> Result<Vec<usize>> {
    let labels = predictor.predict_batch(&data.instances)?;
    Ok(labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 0)
        .map(|(i, _)| i)
        .collect())
}

/// A serializable description of a predictor, stored alongside solver
/// output so fronts can be re-evaluated later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorModel {
    Logistic(LogisticModel),
    Rules(RuleSet),
    External { command: String },
}

impl PredictorModel {
    pub fn build(&self, schema: &FeatureSchema) -> Result<Arc<dyn Predictor>> {
        Ok(match self {
            PredictorModel::Logistic(model) => Arc::new(model.clone()),
            PredictorModel::Rules(rules) => Arc::new(RulePredictor::compile(rules.clone(), schema)?),
            PredictorModel::External { command } => Arc::new(ExternalPredictor::new(command, schema)),
        })
    }
}
