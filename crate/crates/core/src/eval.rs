//! Held-out evaluation of summary trees: every instance is routed through
//! the original-feature tests and its action is re-priced from scratch.

use serde::{Deserialize, Serialize};

use crate::actions::Action;
use crate::binarize::Predicate;
use crate::cache::CostModel;
use crate::error::{Error, Result};
use crate::pareto::CostLossPair;
use crate::predictor::{compute_affected, Predictor};
use crate::schema::{Dataset, Instance};
use crate::tree::RecourseSummaryTree;

/// Per-instance means over an affected population; `invalidity` is
/// `cost + loss`. The exact totals are kept alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub cost: f64,
    pub loss: f64,
    pub invalidity: f64,
    pub n: usize,
    pub cost_ticks: u64,
    pub failures: u64,
    pub scale: u64,
}

impl SummaryMetrics {
    pub fn from_totals(total: CostLossPair, n: usize, scale: u64) -> Self {
        let cost = if n == 0 {
            0.0
        } else {
            total.cost as f64 / scale as f64 / n as f64
        };
        let loss = if n == 0 { 0.0 } else { total.loss as f64 / n as f64 };
        SummaryMetrics {
            cost,
            loss,
            invalidity: cost + loss,
            n,
            cost_ticks: total.cost,
            failures: total.loss,
            scale,
        }
    }

    pub fn totals(&self) -> CostLossPair {
        CostLossPair::new(self.cost_ticks, self.failures)
    }

    /// Summed cost in real units.
    pub fn total_cost(&self) -> f64 {
        self.cost_ticks as f64 / self.scale as f64
    }

    /// Metrics of the union of two disjoint populations priced on the same
    /// scale.
    pub fn pool(&self, other: &SummaryMetrics) -> SummaryMetrics {
        SummaryMetrics::from_totals(self.totals() + other.totals(), self.n + other.n, self.scale)
    }
}

/// Value of a point in mean invalidity terms.
pub fn invalidity_of(v: &CostLossPair, n: usize, scale: u64) -> f64 {
    SummaryMetrics::from_totals(*v, n, scale).invalidity
}

/// What is needed to apply a tree to raw instances.
pub struct Evaluator<'a> {
    pub model: &'a CostModel,
    pub predicates: &'a [Predicate],
    pub actions: &'a [Action],
    pub predictor: &'a dyn Predictor,
}

impl Evaluator<'_> {
    /// The adversely classified rows of `population`.
    pub fn affected(&self, population: &Dataset) -> Result<Vec<Instance>> {
        let rows = compute_affected(population, self.predictor)?;
        Ok(rows.into_iter().map(|i| population.instances[i].clone()).collect())
    }

    /// Cost ticks and failure flag of each instance's assigned action.
    pub fn outcomes(&self, tree: &RecourseSummaryTree, affected: &[Instance]) -> Result<Vec<(u64, bool)>> {
        let mut moved = Vec::with_capacity(affected.len());
        let mut costs = Vec::with_capacity(affected.len());
        for x in affected {
            let (_, a) = tree.route(x, self.predicates);
            let action = &self.actions[a];
            let y = self.model.apply(action, x);
            costs.push(self.model.cost_ticks_of(action, x, &y));
            moved.push(y);
        }
        let labels = self.predictor.predict_batch(&moved)?;
        Ok(costs.into_iter().zip(labels).map(|(c, l)| (c, l == 0)).collect())
    }

    pub fn evaluate_affected(&self, tree: &RecourseSummaryTree, affected: &[Instance]) -> Result<SummaryMetrics> {
        if affected.is_empty() {
            return Err(Error::Evaluation("population has no adversely classified instances".into()));
        }
        let total = self
            .outcomes(tree, affected)?
            .into_iter()
            .fold(CostLossPair::ZERO, |acc, (c, lost)| acc + CostLossPair::new(c, lost as u64));
        Ok(SummaryMetrics::from_totals(total, affected.len(), self.model.scale()))
    }

    pub fn evaluate(&self, tree: &RecourseSummaryTree, population: &Dataset) -> Result<SummaryMetrics> {
        self.evaluate_affected(tree, &self.affected(population)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generalization {
    pub distances: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

/// Euclidean distance between each solution's (cost, loss) on two
/// populations, with mean and population standard deviation.
pub fn generalization_distance(train: &[SummaryMetrics], test: &[SummaryMetrics]) -> Result<Generalization> {
    if train.len() != test.len() {
        return Err(Error::Evaluation(format!(
            "{} train metrics against {} test metrics",
            train.len(),
            test.len()
        )));
    }
    let distances: Vec<f64> = train
        .iter()
        .zip(test)
        .map(|(a, b)| (a.cost - b.cost).hypot(a.loss - b.loss))
        .collect();
    let (mean, sd) = mean_sd(&distances);
    Ok(Generalization { distances, mean, sd })
}

/// Mean and population standard deviation; zeros for an empty slice.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Relative increase of the best invalidity on `partial` over the best on
/// `complete`. `None` when either front is empty or the complete front's
/// best invalidity is zero while the partial one's is not.
pub fn degradation(partial: &[CostLossPair], complete: &[CostLossPair], n: usize, scale: u64) -> Option<f64> {
    let best = |front: &[CostLossPair]| {
        front
            .iter()
            .map(|v| invalidity_of(v, n, scale))
            .min_by(f64::total_cmp)
    };
    let (p, c) = (best(partial)?, best(complete)?);
    if c == 0.0 {
        return (p == 0.0).then_some(0.0);
    }
    Some((p - c) / c)
}
