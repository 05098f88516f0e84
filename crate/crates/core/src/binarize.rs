//! Equal-width binning of numeric features and the binary split predicates
//! the tree search branches on.

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::schema::{Dataset, FeatureKind, FeatureSchema, Instance, Value};

/// Equal-width bins over `[min, max]` of one numeric feature.
///
/// Bin `b` covers `(e_b, e_{b+1}]`, with bin 0 also holding `min`, so a
/// value lies in a bin below `k` exactly when it passes the threshold test
/// `v <= e_k`. Values outside the fitted range clamp to the end bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericBinning {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl NumericBinning {
    pub fn is_constant(&self) -> bool {
        self.min == self.max
    }

    /// Effective bin count; a constant feature has a single bin.
    pub fn bin_count(&self) -> usize {
        if self.is_constant() {
            1
        } else {
            self.bins
        }
    }

    /// Edge `e_k` for `k` in `0..=bins`.
    pub fn edge(&self, k: usize) -> f64 {
        if k == 0 {
            self.min
        } else if k == self.bins {
            self.max
        } else {
            self.min + (self.max - self.min) * k as f64 / self.bins as f64
        }
    }

    /// Interior edges `e_1 .. e_{bins-1}`; empty for a constant feature.
    pub fn thresholds(&self) -> Vec<f64> {
        if self.is_constant() {
            return Vec::new();
        }
        (1..self.bins).map(|k| self.edge(k)).collect()
    }

    pub fn bin_of(&self, v: f64) -> usize {
        if self.is_constant() {
            return 0;
        }
        (1..self.bins).take_while(|&k| v > self.edge(k)).count()
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        if self.is_constant() {
            return self.min;
        }
        (self.edge(bin) + self.edge(bin + 1)) / 2.0
    }

    pub fn width(&self) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (self.max - self.min) / self.bins as f64
        }
    }
}

/// Bin layout for every numeric feature, fitted on the full dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub features: Vec<Option<NumericBinning>>,
}

impl Binning {
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Data("cannot bin an empty dataset".into()));
        }
        let features = data
            .schema
            .features
            .iter()
            .enumerate()
            .map(|(j, f)| {
                (f.kind == FeatureKind::Numeric).then(|| {
                    let (min, max) = data.instances.iter().map(|x| x[j].as_f64()).fold(
                        (f64::INFINITY, f64::NEG_INFINITY),
                        |(lo, hi), v| (lo.min(v), hi.max(v)),
                    );
                    if min == max {
                        log::warn!("feature '{}' is constant; it contributes no splits or shifts", f.name);
                    }
                    NumericBinning {
                        min,
                        max,
                        bins: f.bin_count(),
                    }
                })
            })
            .collect();
        Ok(Binning { features })
    }

    pub fn numeric(&self, j: usize) -> Option<&NumericBinning> {
        self.features.get(j).and_then(|b| b.as_ref())
    }
}

/// A binary test on one original feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum Predicate {
    /// `x_j <= threshold`
    #[serde(rename = "le")]
    AtMost { feature: usize, threshold: f64 },
    /// `x_j == category`
    #[serde(rename = "eq")]
    Equals { feature: usize, category: u32 },
    /// `x_j == 1`
    #[serde(rename = "set")]
    IsSet { feature: usize },
}

impl Predicate {
    pub fn feature(&self) -> usize {
        match *self {
            Predicate::AtMost { feature, .. }
            | Predicate::Equals { feature, .. }
            | Predicate::IsSet { feature } => feature,
        }
    }

    /// Evaluates the test on an original instance.
    pub fn holds(&self, x: &Instance) -> bool {
        match *self {
            Predicate::AtMost { feature, threshold } => x[feature].as_f64() <= threshold,
            Predicate::Equals { feature, category } => x[feature] == Value::Category(category),
            Predicate::IsSet { feature } => x[feature] == Value::Binary(true),
        }
    }

    pub fn describe(&self, schema: &FeatureSchema) -> String {
        match *self {
            Predicate::AtMost { feature, threshold } => {
                format!("{} <= {}", schema.features[feature].name, fmt_number(threshold))
            }
            Predicate::Equals { feature, category } => {
                let f = &schema.features[feature];
                format!("{} == '{}'", f.name, f.categories[category as usize])
            }
            Predicate::IsSet { feature } => format!("{} == 1", schema.features[feature].name),
        }
    }
}

/// Compact human-readable rendering of a number.
pub fn fmt_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let digits = if v.abs() >= 100.0 {
        1
    } else if v.abs() >= 1.0 {
        3
    } else {
        4
    };
    let s = format!("{v:.digits$}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// All split predicates in canonical order: by feature, then thresholds
/// ascending for numeric features, categories in schema order for
/// categorical ones, and one test per binary feature.
pub fn predicates(schema: &FeatureSchema, binning: &Binning) -> Vec<Predicate> {
    let mut out = Vec::new();
    for (j, f) in schema.features.iter().enumerate() {
        match f.kind {
            FeatureKind::Numeric => {
                let b = binning.numeric(j).expect("numeric feature has a binning");
                out.extend(
                    b.thresholds()
                        .into_iter()
                        .map(|threshold| Predicate::AtMost { feature: j, threshold }),
                );
            }
            FeatureKind::Categorical => out.extend(
                (0..f.categories.len() as u32)
                    .map(|category| Predicate::Equals { feature: j, category }),
            ),
            FeatureKind::Binary => out.push(Predicate::IsSet { feature: j }),
        }
    }
    out
}

/// The binarized affected population: one bit column per predicate, with
/// bit `i` set when affected row `i` passes the predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarizedView {
    pub predicates: Vec<Predicate>,
    columns: Vec<BitSet>,
    rows: usize,
}

impl BinarizedView {
    pub fn from_instances(predicates: Vec<Predicate>, instances: &[&Instance]) -> Self {
        let rows = instances.len();
        let columns = predicates
            .iter()
            .map(|p| {
                BitSet::from_indices(
                    rows,
                    instances
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| p.holds(x))
                        .map(|(i, _)| i),
                )
            })
            .collect();
        BinarizedView {
            predicates,
            columns,
            rows,
        }
    }

    /// Builds a view directly from bit columns, mainly for tests.
    pub fn from_columns(predicates: Vec<Predicate>, columns: Vec<BitSet>, rows: usize) -> Self {
        assert_eq!(predicates.len(), columns.len());
        assert!(columns.iter().all(|c| c.universe() == rows));
        BinarizedView {
            predicates,
            columns,
            rows,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.len()
    }

    pub fn column(&self, p: usize) -> &BitSet {
        &self.columns[p]
    }

    pub fn bit(&self, row: usize, p: usize) -> bool {
        self.columns[p].contains(row)
    }

    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        (0..self.predicates.len()).map(|p| self.bit(row, p)).collect()
    }
}

/// Binarizes the affected rows of `data`. Thresholds come from `binning`,
/// which is fitted on the full dataset.
pub fn binarize(data: &Dataset, affected: &[usize], binning: &Binning) -> BinarizedView {
    let rows: Vec<&Instance> = affected.iter().map(|&i| &data.instances[i]).collect();
    BinarizedView::from_instances(predicates(&data.schema, binning), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::FeatureSpec;

    fn zero_ten(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::new(vec![FeatureSpec::numeric("x", 5)]).unwrap();
        let mut rows: Vec<Instance> = vec![vec![Value::Numeric(0.0)], vec![Value::Numeric(10.0)]];
        rows.extend(values.iter().map(|&v| vec![Value::Numeric(v)]));
        Dataset::new(schema, rows, None).unwrap()
    }

    #[test]
    fn equal_width_thresholds() {
        let binning = Binning::fit(&zero_ten(&[])).unwrap();
        let b = binning.numeric(0).unwrap();
        assert_eq!(b.thresholds(), vec![2.0, 4.0, 6.0, 8.0]);
        assert_eq!(b.midpoint(1), 3.0);
        assert_eq!(b.midpoint(3), 7.0);
        assert_eq!(b.bin_of(3.0), 1);
        assert_eq!(b.bin_of(2.0), 0);
        assert_eq!(b.bin_of(0.0), 0);
        assert_eq!(b.bin_of(9.0), 4);
        assert_eq!(b.bin_of(42.0), 4);
        assert_eq!(b.bin_of(-1.0), 0);
    }

    #[test]
    fn predicate_vector_of_three() {
        let data = zero_ten(&[3.0]);
        let binning = Binning::fit(&data).unwrap();
        let view = binarize(&data, &[2], &binning);
        assert_eq!(view.row_bits(0), vec![false, true, true, true]);
    }

    #[test]
    fn one_hot_categories() {
        let schema = FeatureSchema::new(vec![
            FeatureSpec::categorical("c", &["a", "b", "c"]),
            FeatureSpec::binary("flag"),
        ])
        .unwrap();
        let data = Dataset::new(
            schema,
            vec![vec![Value::Category(2), Value::Binary(true)]],
            None,
        )
        .unwrap();
        let binning = Binning::fit(&data).unwrap();
        let view = binarize(&data, &[0], &binning);
        assert_eq!(view.num_predicates(), 4);
        assert_eq!(view.row_bits(0), vec![false, false, true, true]);
    }

    #[test]
    fn constant_feature_has_no_thresholds() {
        let schema = FeatureSchema::new(vec![FeatureSpec::numeric("x", 5)]).unwrap();
        let data = Dataset::new(schema, vec![vec![Value::Numeric(4.0)]; 3], None).unwrap();
        let binning = Binning::fit(&data).unwrap();
        assert!(binarize(&data, &[0, 1, 2], &binning).predicates.is_empty());
    }

    #[test]
    fn bins_agree_with_threshold_tests() {
        let values: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let binning = Binning::fit(&zero_ten(&values)).unwrap();
        let b = binning.numeric(0).unwrap();
        for &v in &values {
            for (k, t) in b.thresholds().iter().enumerate() {
                assert_eq!(v <= *t, b.bin_of(v) <= k, "v={v} t={t}");
            }
        }
    }

    #[test]
    fn number_rendering() {
        assert_eq!(fmt_number(40.0), "40");
        assert_eq!(fmt_number(2.5), "2.5");
        assert_eq!(fmt_number(0.12345), "0.1235");
        assert_eq!(fmt_number(1234.56), "1234.6");
    }
}
