use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Label, Predictor};
use crate::error::{Error, Result};
use crate::schema::{Dataset, FeatureKind, FeatureSchema, Instance, Value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.5,
            epochs: 300,
            seed: 0,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
enum Encoder {
    Standardize { mean: f64, scale: f64 },
    OneHot { categories: usize },
    Bit,
}

impl Encoder {
    fn width(&self) -> usize {
        match self {
            Encoder::OneHot { categories } => *categories,
            _ => 1,
        }
    }
}

/// Logistic regression over standardized numeric and one-hot categorical
/// inputs, thresholded at probability 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    encoders: Vec<Encoder>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    fn encode_into(&self, x: &Instance, out: &mut Vec<f64>) {
        out.clear();
        for (enc, v) in self.encoders.iter().zip(x) {
            match (enc, v) {
                (Encoder::Standardize { mean, scale }, Value::Numeric(v)) => out.push((v - mean) / scale),
                (Encoder::OneHot { categories }, Value::Category(c)) => {
                    out.extend((0..*categories).map(|k| (k == *c as usize) as u8 as f64))
                }
                (Encoder::Bit, Value::Binary(b)) => out.push(*b as u8 as f64),
                _ => panic!("instance does not match the model's schema"),
            }
        }
    }

    fn score(&self, features: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(features)
                .map(|(w, f)| w * f)
                .sum::<f64>()
    }

    pub fn probability(&self, x: &Instance) -> f64 {
        let mut buf = Vec::with_capacity(self.weights.len());
        self.encode_into(x, &mut buf);
        sigmoid(self.score(&buf))
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Predictor for LogisticModel {
    fn name(&self) -> &str {
        "logistic"
    }

    fn predict_batch(&self, batch: &[Instance]) -> Result<Vec<Label>> {
        let mut buf = Vec::with_capacity(self.weights.len());
        Ok(batch
            .iter()
            .map(|x| {
                self.encode_into(x, &mut buf);
                (self.score(&buf) >= 0.0) as Label
            })
            .collect())
    }
}

fn encoders(schema: &FeatureSchema, data: &Dataset) -> Vec<Encoder> {
    let n = data.len() as f64;
    schema
        .features
        .iter()
        .enumerate()
        .map(|(j, f)| match f.kind {
            FeatureKind::Numeric => {
                let mean = data.instances.iter().map(|x| x[j].as_f64()).sum::<f64>() / n;
                let var = data
                    .instances
                    .iter()
                    .map(|x| (x[j].as_f64() - mean).powi(2))
                    .sum::<f64>()
                    / n;
                let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
                Encoder::Standardize { mean, scale }
            }
            FeatureKind::Categorical => Encoder::OneHot {
                categories: f.categories.len(),
            },
            FeatureKind::Binary => Encoder::Bit,
        })
        .collect()
}

/// Fits a logistic model by full-batch gradient descent. Deterministic for
/// a fixed seed.
pub fn train_logistic(data: &Dataset, labels: &[Label], config: &LogisticConfig) -> Result<LogisticModel> {
    if labels.len() != data.len() {
        return Err(Error::Config(format!(
            "{} labels for {} training instances",
            labels.len(),
            data.len()
        )));
    }
    if data.is_empty() {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Config("degenerate labels: training data holds a single class".into()));
    }

    let encoders = encoders(&data.schema, data);
    let width: usize = encoders.iter().map(Encoder::width).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LogisticModel {
        encoders,
        weights: (0..width).map(|_| rng.gen_range(-0.01..0.01)).collect(),
        bias: 0.0,
    };

    let mut buf = Vec::with_capacity(width);
    let rows: Vec<Vec<f64>> = data
        .instances
        .iter()
        .map(|x| {
            model.encode_into(x, &mut buf);
            buf.clone()
        })
        .collect();
    let n = rows.len() as f64;
    let mut grad = vec![0.0; width];
    for _ in 0..config.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let err = sigmoid(model.score(row)) - y as f64;
            for (g, f) in grad.iter_mut().zip(row) {
                *g += err * f;
            }
            grad_bias += err;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= config.learning_rate * (g / n + config.l2 * *w);
        }
        model.bias -= config.learning_rate * grad_bias / n;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::FeatureSpec;

    fn toy() -> (Dataset, Vec<Label>) {
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("a", 4),
            FeatureSpec::categorical("c", &["u", "v"]),
        ])
        .unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let a = i as f64;
            rows.push(vec![Value::Numeric(a), Value::Category((i % 2) as u32)]);
            labels.push((a >= 20.0) as Label);
        }
        (Dataset::new(schema, rows, None).unwrap(), labels)
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let (data, labels) = toy();
        let config = LogisticConfig {
            epochs: 2000,
            ..Default::default()
        };
        let model = train_logistic(&data, &labels, &config).unwrap();
        assert_eq!(model.predict_batch(&data.instances).unwrap(), labels);
    }

    #[test]
    fn single_class_is_rejected() {
        let (data, _) = toy();
        let err = train_logistic(&data, &vec![1; data.len()], &LogisticConfig::default()).unwrap_err();
        assert!(err.to_string().contains("degenerate labels"));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (data, labels) = toy();
        let config = LogisticConfig {
            seed: 11,
            ..Default::default()
        };
        let a = train_logistic(&data, &labels, &config).unwrap();
        let b = train_logistic(&data, &labels, &config).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<LogisticModel>(&json).unwrap(), a);
    }
}
