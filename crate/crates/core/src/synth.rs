//! Seeded synthetic datasets: a planted income-threshold population whose
//! recourse is known in closed form, and a credit-style population with
//! the shape of the classic 1,000-applicant credit data.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::{Condition, Label, Rule, RuleSet};
use crate::schema::{Actionability, Dataset, FeatureSchema, FeatureSpec, Instance, Value, DEFAULT_BINS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthSpec {
    Threshold(ThresholdSpec),
    Credit(CreditSpec),
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_categories() -> usize {
    3
}

/// Population labeled by "income >= threshold", optionally with a second,
/// higher threshold for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub rows: usize,
    #[serde(default)]
    pub test_rows: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub income_min: f64,
    pub income_max: f64,
    pub threshold: f64,
    /// Largest income shift in bins; all bins by default.
    #[serde(default)]
    pub max_bin_shift: Option<usize>,
    /// Extra numeric features, uniform on [0, 100].
    #[serde(default)]
    pub numeric_features: usize,
    /// Extra categorical features.
    #[serde(default)]
    pub categorical_features: usize,
    #[serde(default = "default_categories")]
    pub categories: usize,
    /// Whether the extra features may be changed.
    #[serde(default)]
    pub extras_actionable: bool,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    /// Probability of flipping each ground-truth label.
    #[serde(default)]
    pub label_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub feature: String,
    /// The disadvantaged group.
    pub focus: String,
    pub reference: String,
    pub focus_share: f64,
    /// Income threshold applied to the focus group.
    pub focus_threshold: f64,
    /// Focus-group incomes are drawn from [income_min, income_max - shift].
    #[serde(default)]
    pub focus_income_shift: f64,
}

/// Credit-style data: 7 numeric and 13 categorical features, labels from a
/// hidden linear score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditSpec {
    pub rows: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub train: Dataset,
    pub test: Option<Dataset>,
    /// The labeling rule, when the population has one.
    pub rules: Option<RuleSet>,
}

pub fn gen_synth(spec: &SynthSpec) -> Result<SynthOutput> {
    match spec {
        SynthSpec::Threshold(s) => threshold_population(s),
        SynthSpec::Credit(s) => Ok(SynthOutput {
            train: credit_population(s)?,
            test: None,
            rules: None,
        }),
    }
}

/// Writes `data.csv`, `schema.json`, and when present `test.csv` and
/// `rules.json` into `dir`.
pub fn write_synth(output: &SynthOutput, dir: &Path) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::File { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    output.train.save_csv(&dir.join("data.csv"))?;
    let schema_path = dir.join("schema.json");
    std::fs::write(&schema_path, output.train.schema.to_json()).map_err(io(&schema_path))?;
    if let Some(test) = &output.test {
        test.save_csv(&dir.join("test.csv"))?;
    }
    if let Some(rules) = &output.rules {
        let path = dir.join("rules.json");
        let text = serde_json::to_string_pretty(rules)?;
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(())
}

fn condition(feature: &str, op: &str, value: serde_json::Value) -> Condition {
    Condition {
        feature: feature.to_string(),
        op: op.to_string(),
        value,
    }
}

impl ThresholdSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic spec: {m}")));
        if self.rows == 0 {
            return bad("rows must be positive");
        }
        if self.income_min.partial_cmp(&self.income_max) != Some(std::cmp::Ordering::Less) {
            return bad("income_min must be below income_max");
        }
        if !(0.0..=0.5).contains(&self.label_noise) {
            return bad("label_noise must lie in [0, 0.5]");
        }
        if let Some(g) = &self.group {
            if g.focus == g.reference {
                return bad("focus and reference groups must differ");
            }
            if !(0.0 < g.focus_share && g.focus_share < 1.0) {
                return bad("focus_share must lie strictly between 0 and 1");
            }
            if !(0.0..self.income_max - self.income_min).contains(&g.focus_income_shift) {
                return bad("focus_income_shift must be smaller than the income range");
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<FeatureSchema> {
        let extras = if self.extras_actionable {
            Actionability::Free
        } else {
            Actionability::Immutable
        };
        let mut income = FeatureSpec::numeric("income", self.bins).with_actionability(Actionability::IncreaseOnly);
        if let Some(shift) = self.max_bin_shift {
            income = income.with_max_bin_shift(shift);
        }
        let mut features = vec![income];
        if let Some(g) = &self.group {
            features.push(
                FeatureSpec::categorical(&g.feature, &[g.focus.as_str(), g.reference.as_str()])
                    .with_actionability(Actionability::Immutable),
            );
        }
        for k in 1..=self.numeric_features {
            features.push(FeatureSpec::numeric(&format!("x{k}"), self.bins).with_actionability(extras));
        }
        let names: Vec<String> = (0..self.categories).map(|c| format!("v{c}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        for k in 1..=self.categorical_features {
            features.push(FeatureSpec::categorical(&format!("c{k}"), &names).with_actionability(extras));
        }
        let mut schema = FeatureSchema::new(features)?;
        schema.label = Some("label".into());
        schema.validate()?;
        Ok(schema)
    }

    pub fn rules(&self) -> RuleSet {
        let mut rules = Vec::new();
        if let Some(g) = &self.group {
            let in_focus = condition(&g.feature, "==", g.focus.clone().into());
            rules.push(Rule {
                when: vec![in_focus.clone(), condition("income", ">=", g.focus_threshold.into())],
                label: 1,
            });
            rules.push(Rule {
                when: vec![in_focus],
                label: 0,
            });
        }
        rules.push(Rule {
            when: vec![condition("income", ">=", self.threshold.into())],
            label: 1,
        });
        RuleSet { rules, default: 0 }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (Instance, Label) {
        let mut x = Vec::new();
        let mut threshold = self.threshold;
        let mut top = self.income_max;
        let focus = match &self.group {
            Some(g) => {
                let focus = rng.gen_bool(g.focus_share);
                if focus {
                    threshold = g.focus_threshold;
                    top -= g.focus_income_shift;
                }
                Some(focus)
            }
            None => None,
        };
        let income = rng.gen_range(self.income_min..=top).round();
        x.push(Value::Numeric(income));
        if let Some(focus) = focus {
            x.push(Value::Category(if focus { 0 } else { 1 }));
        }
        for _ in 0..self.numeric_features {
            x.push(Value::Numeric(rng.gen_range(0.0..=100.0f64).round()));
        }
        for _ in 0..self.categorical_features {
            x.push(Value::Category(rng.gen_range(0..self.categories) as u32));
        }
        let mut label = (income >= threshold) as Label;
        if rng.gen_bool(self.label_noise) {
            label = 1 - label;
        }
        (x, label)
    }
}

fn threshold_population(spec: &ThresholdSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let schema = spec.schema()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sample = |n: usize| -> Result<Dataset> {
        let (rows, labels): (Vec<_>, Vec<_>) = (0..n).map(|_| spec.draw(&mut rng)).unzip();
        Dataset::new(schema.clone(), rows, Some(labels))
    };
    let train = sample(spec.rows)?;
    let test = if spec.test_rows > 0 {
        Some(sample(spec.test_rows)?)
    } else {
        None
    };
    Ok(SynthOutput {
        train,
        test,
        rules: Some(spec.rules()),
    })
}

const CREDIT_CATEGORICALS: [(&str, usize, Actionability); 13] = [
    ("checking_status", 4, Actionability::Free),
    ("credit_history", 5, Actionability::Immutable),
    ("purpose", 10, Actionability::Immutable),
    ("savings", 5, Actionability::Free),
    ("employment", 5, Actionability::Immutable),
    ("personal_status", 4, Actionability::Immutable),
    ("other_debtors", 3, Actionability::Immutable),
    ("property", 4, Actionability::Immutable),
    ("other_plans", 3, Actionability::Immutable),
    ("housing", 3, Actionability::Free),
    ("job", 4, Actionability::Immutable),
    ("telephone", 2, Actionability::Immutable),
    ("foreign_worker", 2, Actionability::Immutable),
];

/// (name, low, high, actionability, max bin shift)
const CREDIT_NUMERICS: [(&str, f64, f64, Actionability, usize); 7] = [
    ("duration", 4.0, 72.0, Actionability::DecreaseOnly, 3),
    ("credit_amount", 250.0, 18_000.0, Actionability::DecreaseOnly, 3),
    ("installment_rate", 1.0, 4.0, Actionability::Immutable, 1),
    ("residence_since", 1.0, 4.0, Actionability::Immutable, 1),
    ("age", 19.0, 75.0, Actionability::Immutable, 1),
    ("existing_credits", 1.0, 4.0, Actionability::DecreaseOnly, 2),
    ("dependents", 1.0, 2.0, Actionability::Immutable, 1),
];

pub fn credit_schema() -> Result<FeatureSchema> {
    let mut features = Vec::new();
    for (name, _, _, actionability, shift) in CREDIT_NUMERICS {
        let mut f = FeatureSpec::numeric(name, DEFAULT_BINS).with_actionability(actionability);
        if actionability != Actionability::Immutable {
            f = f.with_max_bin_shift(shift);
        }
        features.push(f);
    }
    for (name, levels, actionability) in CREDIT_CATEGORICALS {
        let names: Vec<String> = (0..levels).map(|c| format!("A{c}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        features.push(FeatureSpec::categorical(name, &names).with_actionability(actionability));
    }
    let mut schema = FeatureSchema::new(features)?;
    schema.label = Some("good_credit".into());
    schema.validate()?;
    Ok(schema)
}

fn credit_population(spec: &CreditSpec) -> Result<Dataset> {
    let schema = credit_schema()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.rows);
    let mut labels = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let mut x = Vec::with_capacity(schema.len());
        let mut score = 1.2;
        for (j, (_, low, high, _, _)) in CREDIT_NUMERICS.iter().enumerate() {
            // skewed toward the low end, as durations and amounts are
            let u: f64 = rng.gen::<f64>().powf(if j < 2 { 2.0 } else { 1.0 });
            let v = (low + u * (high - low)).round();
            score -= match j {
                0 => 2.0 * u,
                1 => 1.5 * u,
                4 => -0.8 * u,
                5 => 0.5 * u,
                _ => 0.0,
            };
            x.push(Value::Numeric(v));
        }
        for (k, (_, levels, _)) in CREDIT_CATEGORICALS.iter().enumerate() {
            let c = rng.gen_range(0..*levels);
            score += match k {
                0 => [-1.2, -0.5, 0.4, 1.0][c],
                1 => 0.3 * c as f64 - 0.6,
                3 => 0.35 * c as f64 - 0.5,
                9 => [0.2, 0.0, -0.4][c],
                _ => 0.0,
            };
            x.push(Value::Category(c as u32));
        }
        let p = 1.0 / (1.0 + (-score).exp());
        labels.push(rng.gen_bool(p) as Label);
        rows.push(x);
    }
    Dataset::new(schema, rows, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::RulePredictor;

    fn planted() -> ThresholdSpec {
        ThresholdSpec {
            rows: 300,
            test_rows: 50,
            seed: 3,
            bins: 10,
            income_min: 0.0,
            income_max: 100_000.0,
            threshold: 60_000.0,
            max_bin_shift: None,
            numeric_features: 1,
            categorical_features: 1,
            categories: 3,
            extras_actionable: false,
            group: Some(GroupSpec {
                feature: "sex".into(),
                focus: "female".into(),
                reference: "male".into(),
                focus_share: 0.4,
                focus_threshold: 70_000.0,
                focus_income_shift: 10_000.0,
            }),
            label_noise: 0.0,
        }
    }

    #[test]
    fn seeded_and_deterministic() {
        let spec = SynthSpec::Threshold(planted());
        let (a, b) = (gen_synth(&spec).unwrap(), gen_synth(&spec).unwrap());
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.test.unwrap().len(), 50);
    }

    #[test]
    fn labels_follow_the_planted_rule() {
        let out = gen_synth(&SynthSpec::Threshold(planted())).unwrap();
        let rules = RulePredictor::compile(out.rules.unwrap(), &out.train.schema).unwrap();
        let labels = out.train.labels.as_ref().unwrap();
        for (x, &y) in out.train.instances.iter().zip(labels) {
            assert_eq!(rules.label(x), y);
            let threshold = if x[1] == Value::Category(0) { 70_000.0 } else { 60_000.0 };
            assert_eq!(y == 1, x[0].as_f64() >= threshold);
        }
    }

    #[test]
    fn credit_shape() {
        let data = credit_population(&CreditSpec { rows: 1000, seed: 1 }).unwrap();
        assert_eq!(data.len(), 1000);
        let numeric = data.schema.features.iter().filter(|f| f.categories.is_empty()).count();
        assert_eq!((numeric, data.schema.len() - numeric), (7, 13));
        let good = data.labels.as_ref().unwrap().iter().filter(|&&l| l == 1).count();
        assert!((500..900).contains(&good), "{good}");
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::Threshold(planted());
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SynthSpec>(&json).unwrap(), spec);
        let credit: SynthSpec = serde_json::from_str(r#"{"kind": "credit", "rows": 10}"#).unwrap();
        assert_eq!(credit, SynthSpec::Credit(CreditSpec { rows: 10, seed: 0 }));
    }
}
