use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Label, Predictor};
use crate::error::{read_file, Error, Result};
use crate::schema::{FeatureKind, FeatureSchema, Instance, Value};

/// One test inside a rule. `value` is a number for numeric and binary
/// features and a category name for categorical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub feature: String,
    pub op: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    /// Conjunction of tests; an empty list always matches.
    #[serde(default)]
    pub when: Vec<Condition>,
    pub label: Label,
}

/// An ordered rule list; the first matching rule decides the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default: Label,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Test {
    feature: usize,
    cmp: Cmp,
    value: Value,
}

impl Test {
    fn holds(&self, x: &Instance) -> bool {
        let v = x[self.feature];
        match self.cmp {
            Cmp::Eq => v == self.value,
            Cmp::Ne => v != self.value,
            cmp => {
                let (a, b) = (v.as_f64(), self.value.as_f64());
                match cmp {
                    Cmp::Le => a <= b,
                    Cmp::Lt => a < b,
                    Cmp::Ge => a >= b,
                    Cmp::Gt => a > b,
                    Cmp::Eq | Cmp::Ne => unreachable!(),
                }
            }
        }
    }
}

/// A compiled [`RuleSet`] bound to a schema.
#[derive(Debug, Clone)]
pub struct RulePredictor {
    source: RuleSet,
    rules: Vec<(Vec<Test>, Label)>,
}

impl RulePredictor {
    pub fn compile(source: RuleSet, schema: &FeatureSchema) -> Result<Self> {
        let bad = |msg: String| Error::predictor("rules", msg);
        check_label(source.default).map_err(bad)?;
        let mut rules = Vec::with_capacity(source.rules.len());
        for (r, rule) in source.rules.iter().enumerate() {
            check_label(rule.label).map_err(|m| bad(format!("rule {r}: {m}")))?;
            let tests = rule
                .when
                .iter()
                .map(|c| compile_condition(c, schema).map_err(|m| bad(format!("rule {r}: {m}"))))
                .collect::<Result<Vec<_>>>()?;
            rules.push((tests, rule.label));
        }
        Ok(RulePredictor { source, rules })
    }

    pub fn source(&self) -> &RuleSet {
        &self.source
    }

    pub fn label(&self, x: &Instance) -> Label {
        self.rules
            .iter()
            .find(|(tests, _)| tests.iter().all(|t| t.holds(x)))
            .map_or(self.source.default, |(_, label)| *label)
    }
}

fn check_label(label: Label) -> std::result::Result<(), String> {
    if label > 1 {
        Err(format!("label must be 0 or 1, got {label}"))
    } else {
        Ok(())
    }
}

fn compile_condition(c: &Condition, schema: &FeatureSchema) -> std::result::Result<Test, String> {
    let feature = schema
        .index_of(&c.feature)
        .ok_or_else(|| format!("unknown feature '{}'", c.feature))?;
    let spec = &schema.features[feature];
    let cmp = match c.op.as_str() {
        "<=" => Cmp::Le,
        "<" => Cmp::Lt,
        ">=" => Cmp::Ge,
        ">" => Cmp::Gt,
        "==" => Cmp::Eq,
        "!=" => Cmp::Ne,
        other => return Err(format!("unknown operator '{other}'")),
    };
    let value = match spec.kind {
        FeatureKind::Numeric => Value::Numeric(
            c.value
                .as_f64()
                .ok_or_else(|| format!("feature '{}' needs a numeric value", c.feature))?,
        ),
        FeatureKind::Binary => match c.value.as_f64() {
            Some(v) if v == 0.0 || v == 1.0 => Value::Binary(v == 1.0),
            _ => return Err(format!("feature '{}' needs 0 or 1", c.feature)),
        },
        FeatureKind::Categorical => {
            if !matches!(cmp, Cmp::Eq | Cmp::Ne) {
                return Err(format!("categorical feature '{}' supports only == and !=", c.feature));
            }
            let name = c
                .value
                .as_str()
                .ok_or_else(|| format!("feature '{}' needs a category name", c.feature))?;
            Value::Category(
                spec.category_index(name)
                    .ok_or_else(|| format!("unknown category '{name}' for '{}'", c.feature))?,
            )
        }
    };
    Ok(Test { feature, cmp, value })
}

impl Predictor for RulePredictor {
    fn name(&self) -> &str {
        "rules"
    }

    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>> {
        Ok(batch.iter().map(|x| self.label(x)).collect())
    }
}

pub fn load_rule_predictor(path: &Path, schema: &FeatureSchema) -> Result<RulePredictor> {
    let source: RuleSet = serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::predictor("rules", format!("{}: {e}", path.display())))?;
    RulePredictor::compile(source, schema)
}
