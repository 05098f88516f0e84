//! Per-group bias audit across a whole front, plus classifier-level
//! fairness rates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{mean_sd, Evaluator, SummaryMetrics};
use crate::pareto::CostLossPair;
use crate::predictor::Label;
use crate::schema::{Dataset, FeatureKind, Value};
use crate::tree::RecourseSummaryTree;

/// Raw per-group counts behind the classifier fairness rates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub group: String,
    pub n: u64,
    /// Instances predicted 0.
    pub adverse: u64,
    /// Instances whose true label is 1, when labels are known.
    pub positives: Option<u64>,
    /// True positives among them.
    pub true_positives: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub group: String,
    pub n: u64,
    pub adverse: u64,
    pub adverse_rate: f64,
    pub favorable_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positives: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_positive_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierFairness {
    pub groups: Vec<GroupRates>,
    /// Smallest over largest favorable-prediction rate.
    pub disparate_impact_ratio: f64,
    /// Smallest over largest adverse-prediction rate.
    pub adverse_rate_ratio: f64,
    /// Reference-group TPR minus focus-group TPR.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpr_gap: Option<f64>,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn min_over_max(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        min / max
    } else {
        1.0
    }
}

impl ClassifierFairness {
    /// Rates from counts; `focus` and `reference` index into `counts`.
    pub fn from_counts(counts: &[GroupCounts], focus: usize, reference: usize) -> Self {
        let groups: Vec<GroupRates> = counts
            .iter()
            .map(|c| GroupRates {
                group: c.group.clone(),
                n: c.n,
                adverse: c.adverse,
                adverse_rate: ratio(c.adverse, c.n),
                favorable_rate: ratio(c.n - c.adverse, c.n),
                positives: c.positives,
                true_positive_rate: c.positives.zip(c.true_positives).map(|(p, tp)| ratio(tp, p)),
            })
            .collect();
        let tpr_gap = groups[reference]
            .true_positive_rate
            .zip(groups[focus].true_positive_rate)
            .map(|(r, f)| r - f);
        ClassifierFairness {
            disparate_impact_ratio: min_over_max(groups.iter().map(|g| g.favorable_rate)),
            adverse_rate_ratio: min_over_max(groups.iter().map(|g| g.adverse_rate)),
            tpr_gap,
            groups,
        }
    }

    /// Counts predictions and, when given, true labels per group.
    pub fn from_predictions(
        names: &[String],
        groups: &[usize],
        predicted: &[Label],
        truth: Option<&[Label]>,
        focus: usize,
        reference: usize,
    ) -> Self {
        let mut counts: Vec<GroupCounts> = names
            .iter()
            .map(|g| GroupCounts {
                group: g.clone(),
                n: 0,
                adverse: 0,
                positives: truth.map(|_| 0),
                true_positives: truth.map(|_| 0),
            })
            .collect();
        for (i, (&g, &y_hat)) in groups.iter().zip(predicted).enumerate() {
            let c = &mut counts[g];
            c.n += 1;
            c.adverse += (y_hat == 0) as u64;
            if let Some(truth) = truth {
                if truth[i] == 1 {
                    *c.positives.as_mut().unwrap() += 1;
                    *c.true_positives.as_mut().unwrap() += (y_hat == 1) as u64;
                }
            }
        }
        Self::from_counts(&counts, focus, reference)
    }
}

/// One group's recourse quality across all front solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub n_affected: usize,
    pub cost_mean: f64,
    pub cost_sd: f64,
    pub loss_mean: f64,
    pub loss_sd: f64,
    pub invalidity_mean: f64,
    pub invalidity_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionAudit {
    pub solution: usize,
    pub overall: SummaryMetrics,
    /// Metrics per group, in the report's group order.
    pub groups: Vec<SummaryMetrics>,
    pub cost_gap: f64,
    pub loss_gap: f64,
    pub invalidity_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub group_feature: String,
    /// Group A: gaps are A minus B.
    pub focus_group: String,
    /// Group B.
    pub reference_group: String,
    pub solutions: usize,
    pub groups: Vec<GroupSummary>,
    pub cost_gap: Gap,
    pub loss_gap: Gap,
    pub invalidity_gap: Gap,
    /// Fraction of solutions where group A's invalidity exceeds group B's.
    pub focus_worse_fraction: f64,
    pub classifier: ClassifierFairness,
    pub per_solution: Vec<SolutionAudit>,
}

/// How to pick the two compared groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupChoice {
    /// Defaults to the group with the highest adverse-prediction rate.
    pub focus: Option<String>,
    /// Defaults to the group with the lowest adverse-prediction rate.
    pub reference: Option<String>,
}

/// Routes every adversely classified instance of `population` through every
/// tree of the front and compares groups of `group_feature`.
pub fn audit(
    front: &[RecourseSummaryTree],
    population: &Dataset,
    group_feature: &str,
    choice: &GroupChoice,
    evaluator: &Evaluator,
) -> Result<AuditReport> {
    let schema = &population.schema;
    let j = schema
        .index_of(group_feature)
        .ok_or_else(|| Error::Audit(format!("unknown group feature '{group_feature}'")))?;
    let spec = &schema.features[j];
    let names: Vec<String> = match spec.kind {
        FeatureKind::Categorical => spec.categories.clone(),
        FeatureKind::Binary => vec!["0".into(), "1".into()],
        FeatureKind::Numeric => {
            return Err(Error::Audit(format!("group feature '{group_feature}' must be categorical or binary")))
        }
    };
    let group_of = |v: &Value| match *v {
        Value::Category(c) => c as usize,
        Value::Binary(b) => b as usize,
        Value::Numeric(_) => unreachable!("checked feature kind"),
    };
    let member: Vec<usize> = population.instances.iter().map(|x| group_of(&x[j])).collect();
    let present: Vec<usize> = (0..names.len()).filter(|g| member.contains(g)).collect();
    if present.len() < 2 {
        return Err(Error::Audit(format!("population holds fewer than two '{group_feature}' groups")));
    }

    let predicted = evaluator.predictor.predict_batch(&population.instances)?;
    let rates = ClassifierFairness::from_predictions(&names, &member, &predicted, population.labels.as_deref(), 0, 0);
    let lookup = |name: &str| {
        names
            .iter()
            .position(|n| n == name)
            .filter(|g| present.contains(g))
            .ok_or_else(|| Error::Audit(format!("group '{name}' does not occur in '{group_feature}'")))
    };
    let by_rate = |pick_max: bool| {
        let key = |g: &&usize| rates.groups[**g].adverse_rate;
        let chosen = if pick_max {
            present.iter().rev().max_by(|a, b| key(a).total_cmp(&key(b)))
        } else {
            present.iter().min_by(|a, b| key(a).total_cmp(&key(b)))
        };
        *chosen.expect("two groups present")
    };
    let focus = match &choice.focus {
        Some(name) => lookup(name)?,
        None => by_rate(true),
    };
    let reference = match &choice.reference {
        Some(name) => lookup(name)?,
        None if focus == by_rate(false) => *present.iter().find(|&&g| g != focus).unwrap(),
        None => by_rate(false),
    };
    if focus == reference {
        return Err(Error::Audit("focus and reference groups must differ".into()));
    }
    let truth = population.labels.as_deref();
    let classifier = ClassifierFairness::from_predictions(&names, &member, &predicted, truth, focus, reference);

    let affected_rows: Vec<usize> = (0..population.len()).filter(|&i| predicted[i] == 0).collect();
    if affected_rows.is_empty() {
        return Err(Error::Audit("population has no adversely classified instances".into()));
    }
    let affected: Vec<_> = affected_rows.iter().map(|&i| population.instances[i].clone()).collect();
    let affected_group: Vec<usize> = affected_rows.iter().map(|&i| member[i]).collect();
    let scale = evaluator.model.scale();

    let mut per_solution = Vec::with_capacity(front.len());
    for (s, tree) in front.iter().enumerate() {
        let outcomes = evaluator.outcomes(tree, &affected)?;
        let mut totals = vec![(CostLossPair::ZERO, 0usize); names.len()];
        for (&(c, lost), &g) in outcomes.iter().zip(&affected_group) {
            totals[g].0 = totals[g].0 + CostLossPair::new(c, lost as u64);
            totals[g].1 += 1;
        }
        let overall_total = totals.iter().fold(CostLossPair::ZERO, |acc, (v, _)| acc + *v);
        let groups: Vec<SummaryMetrics> = present
            .iter()
            .map(|&g| SummaryMetrics::from_totals(totals[g].0, totals[g].1, scale))
            .collect();
        let at = |g: usize| &groups[present.iter().position(|&p| p == g).unwrap()];
        let (a, b) = (at(focus), at(reference));
        per_solution.push(SolutionAudit {
            solution: s,
            overall: SummaryMetrics::from_totals(overall_total, affected.len(), scale),
            cost_gap: a.cost - b.cost,
            loss_gap: a.loss - b.loss,
            invalidity_gap: a.invalidity - b.invalidity,
            groups,
        });
    }

    let column = |f: &dyn Fn(&SolutionAudit) -> f64| -> Vec<f64> { per_solution.iter().map(f).collect() };
    let gap = |f: &dyn Fn(&SolutionAudit) -> f64| {
        let (mean, sd) = mean_sd(&column(f));
        Gap { mean, sd }
    };
    let groups = present
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let (cost_mean, cost_sd) = mean_sd(&column(&|s| s.groups[k].cost));
            let (loss_mean, loss_sd) = mean_sd(&column(&|s| s.groups[k].loss));
            let (invalidity_mean, invalidity_sd) = mean_sd(&column(&|s| s.groups[k].invalidity));
            GroupSummary {
                group: names[g].clone(),
                n_affected: affected_group.iter().filter(|&&m| m == g).count(),
                cost_mean,
                cost_sd,
                loss_mean,
                loss_sd,
                invalidity_mean,
                invalidity_sd,
            }
        })
        .collect();
    let worse = per_solution.iter().filter(|s| s.invalidity_gap > 0.0).count();
    Ok(AuditReport {
        group_feature: group_feature.to_string(),
        focus_group: names[focus].clone(),
        reference_group: names[reference].clone(),
        solutions: front.len(),
        groups,
        cost_gap: gap(&|s| s.cost_gap),
        loss_gap: gap(&|s| s.loss_gap),
        invalidity_gap: gap(&|s| s.invalidity_gap),
        focus_worse_fraction: if front.is_empty() {
            0.0
        } else {
            worse as f64 / front.len() as f64
        },
        classifier,
        per_solution,
    })
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let (a, b) = (&self.focus_group, &self.reference_group);
        let _ = writeln!(s, "# Recourse audit by `{}`\n", self.group_feature);
        let _ = writeln!(s, "{} front solutions; gaps are {a} minus {b}.\n", self.solutions);
        let _ = writeln!(s, "## Classifier\n");
        let _ = writeln!(s, "| group | n | adverse | adverse rate | TPR |");
        let _ = writeln!(s, "|---|---:|---:|---:|---:|");
        for g in &self.classifier.groups {
            let tpr = g.true_positive_rate.map_or("n/a".to_string(), |t| format!("{t:.3}"));
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.1}% | {tpr} |",
                g.group,
                g.n,
                g.adverse,
                100.0 * g.adverse_rate
            );
        }
        let _ = writeln!(
            s,
            "\nDisparate impact ratio (favorable rates): {:.3}  \nAdverse-rate ratio: {:.3}",
            self.classifier.disparate_impact_ratio, self.classifier.adverse_rate_ratio
        );
        if let Some(gap) = self.classifier.tpr_gap {
            let _ = writeln!(s, "  \nTPR gap ({b} minus {a}): {gap:+.3}");
        }
        let _ = writeln!(s, "\n## Recourse quality across the front\n");
        let _ = writeln!(s, "| group | affected | cost | loss | invalidity |");
        let _ = writeln!(s, "|---|---:|---:|---:|---:|");
        for g in &self.groups {
            let _ = writeln!(
                s,
                "| {} | {} | {:.3} ± {:.3} | {:.3} ± {:.3} | {:.3} ± {:.3} |",
                g.group, g.n_affected, g.cost_mean, g.cost_sd, g.loss_mean, g.loss_sd, g.invalidity_mean, g.invalidity_sd
            );
        }
        let _ = writeln!(
            s,
            "\nMean gaps: cost {:+.3}, loss {:+.3}, invalidity {:+.3}. {a} is worse off in {:.1}% of solutions.",
            self.cost_gap.mean,
            self.loss_gap.mean,
            self.invalidity_gap.mean,
            100.0 * self.focus_worse_fraction
        );
        s
    }

    /// One row per (solution, group) for plotting.
    pub fn series_csv(&self) -> String {
        let mut s = String::from("solution_index,group,n,cost,loss,invalidity\n");
        for sol in &self.per_solution {
            let _ = writeln!(
                s,
                "{},all,{},{},{},{}",
                sol.solution, sol.overall.n, sol.overall.cost, sol.overall.loss, sol.overall.invalidity
            );
            for (g, m) in self.groups.iter().zip(&sol.groups) {
                let _ = writeln!(s, "{},{},{},{},{},{}", sol.solution, g.group, m.n, m.cost, m.loss, m.invalidity);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(group: &str, n: u64, adverse: u64, positives: u64, tp: u64) -> GroupCounts {
        GroupCounts {
            group: group.into(),
            n,
            adverse,
            positives: Some(positives),
            true_positives: Some(tp),
        }
    }

    #[test]
    fn rates_from_counts() {
        let c = ClassifierFairness::from_counts(&[counts("a", 10, 8, 4, 3), counts("b", 20, 5, 10, 9)], 0, 1);
        assert_eq!(c.groups[0].adverse_rate, 0.8);
        assert_eq!(c.groups[1].favorable_rate, 0.75);
        // favorable 0.2 / 0.75
        assert!((c.disparate_impact_ratio - 0.2 / 0.75).abs() < 1e-12);
        assert!((c.adverse_rate_ratio - 0.25 / 0.8).abs() < 1e-12);
        assert!((c.tpr_gap.unwrap() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn constructed_disparate_impact() {
        // favorable rates 0.32 and 0.50
        let c = ClassifierFairness::from_counts(&[counts("a", 100, 68, 1, 1), counts("b", 200, 100, 1, 1)], 0, 1);
        assert!((c.disparate_impact_ratio - 0.64).abs() < 1e-12);
        assert_eq!(c.tpr_gap, Some(0.0));
    }

    #[test]
    fn predictions_are_counted_per_group() {
        let names = vec!["a".to_string(), "b".to_string()];
        let c = ClassifierFairness::from_predictions(&names, &[0, 0, 1, 1], &[0, 1, 1, 1], Some(&[1, 1, 1, 0]), 0, 1);
        assert_eq!((c.groups[0].n, c.groups[0].adverse), (2, 1));
        assert_eq!(c.groups[0].true_positive_rate, Some(0.5));
        assert_eq!(c.groups[1].true_positive_rate, Some(1.0));
        assert_eq!(c.tpr_gap, Some(0.5));
        let unlabeled = ClassifierFairness::from_predictions(&names, &[0, 1], &[0, 1], None, 0, 1);
        assert_eq!(unlabeled.tpr_gap, None);
    }
}
