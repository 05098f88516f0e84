//! Empirical CDFs used by the percentile-shift cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Dataset, FeatureKind, Value};

/// Per-feature empirical CDFs fitted on a full dataset.
///
/// Numeric features keep their sorted values so that `Q_j(v)` is the share
/// of dataset values `<= v`. Categorical and binary features have no
/// order; a change of value counts as a full unit shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    n: usize,
    /// Sorted values for numeric features, `None` for the others.
    sorted: Vec<Option<Vec<f64>>>,
}

impl EmpiricalCdf {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Data("cannot fit CDFs on an empty dataset".into()));
        }
        let sorted = data
            .schema
            .features
            .iter()
            .enumerate()
            .map(|(j, f)| {
                (f.kind == FeatureKind::Numeric).then(|| {
                    let mut values: Vec<f64> = data
                        .instances
                        .iter()
                        .map(|x| x[j].as_f64())
                        .collect();
                    values.sort_by(f64::total_cmp);
                    values
                })
            })
            .collect();
        Ok(EmpiricalCdf {
            n: data.len(),
            sorted,
        })
    }

    /// Number of instances the CDFs were fitted on; the denominator of
    /// every percentile.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_features(&self) -> usize {
        self.sorted.len()
    }

    /// Count of fitted values `<= v` for numeric feature `j`.
    pub fn count_le(&self, j: usize, v: f64) -> usize {
        match &self.sorted[j] {
            Some(values) => values.partition_point(|&x| x <= v),
            None => panic!("feature {j} is not numeric"),
        }
    }

    /// `Q_j(v)` for numeric feature `j`.
    pub fn quantile(&self, j: usize, v: f64) -> f64 {
        self.count_le(j, v) as f64 / self.n as f64
    }

    /// Percentile shift between two values of feature `j`, as an integer
    /// numerator over [`n`](Self::n). Unordered features shift by the full
    /// range whenever the value changes.
    pub fn shift_ticks(&self, j: usize, from: &Value, to: &Value) -> u64 {
        match (from, to) {
            (Value::Numeric(a), Value::Numeric(b)) => {
                if a == b {
                    0
                } else {
                    self.count_le(j, *a).abs_diff(self.count_le(j, *b)) as u64
                }
            }
            (a, b) => {
                if a == b {
                    0
                } else {
                    self.n as u64
                }
            }
        }
    }

    pub fn shift(&self, j: usize, from: &Value, to: &Value) -> f64 {
        self.shift_ticks(j, from, to) as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FeatureSchema, FeatureSpec};
    use proptest::prelude::*;

    fn numeric_data(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::new(vec![FeatureSpec::numeric("x", 10)]).unwrap();
        Dataset::new(
            schema,
            values.iter().map(|&v| vec![Value::Numeric(v)]).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn counts_values_at_or_below() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let cdf = EmpiricalCdf::fit(&numeric_data(&values)).unwrap();
        assert_eq!(cdf.quantile(0, 5.0), 0.5);
        assert_eq!(cdf.quantile(0, 0.5), 0.0);
        assert_eq!(cdf.quantile(0, 10.0), 1.0);
        assert_eq!(cdf.quantile(0, 5.5), 0.5);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(EmpiricalCdf::fit(&numeric_data(&[])).is_err());
    }

    #[test]
    fn categorical_change_is_a_full_shift() {
        let schema = FeatureSchema::new(vec![FeatureSpec::categorical("c", &["a", "b"])]).unwrap();
        let data = Dataset::new(schema, vec![vec![Value::Category(0)]; 4], None).unwrap();
        let cdf = EmpiricalCdf::fit(&data).unwrap();
        assert_eq!(cdf.shift(0, &Value::Category(0), &Value::Category(1)), 1.0);
        assert_eq!(cdf.shift(0, &Value::Category(1), &Value::Category(1)), 0.0);
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(
            values in prop::collection::vec(-100.0f64..100.0, 1..60),
            a in -120.0f64..120.0,
            b in -120.0f64..120.0,
        ) {
            let cdf = EmpiricalCdf::fit(&numeric_data(&values)).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (qlo, qhi) = (cdf.quantile(0, lo), cdf.quantile(0, hi));
            prop_assert!(qlo <= qhi);
            prop_assert!((0.0..=1.0).contains(&qlo) && (0.0..=1.0).contains(&qhi));
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(cdf.quantile(0, max), 1.0);
        }

        #[test]
        fn row_order_free(mut values in prop::collection::vec(-10.0f64..10.0, 1..40), q in -12.0f64..12.0) {
            let first = EmpiricalCdf::fit(&numeric_data(&values)).unwrap();
            values.reverse();
            let third = values.len() / 3;
            values.rotate_left(third);
            let second = EmpiricalCdf::fit(&numeric_data(&values)).unwrap();
            prop_assert_eq!(first.quantile(0, q), second.quantile(0, q));
        }
    }
}
