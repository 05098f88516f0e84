//! Shared actions: bundles of single-feature edits applied population-wide.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::binarize::{fmt_number, Binning};
use crate::error::{Error, Result};
use crate::schema::{Actionability, FeatureKind, FeatureSchema, Instance, Value};

/// Sparsity used when none is configured.
pub const DEFAULT_SPARSITY: usize = 3;

/// Default cap on the number of generated actions.
pub const DEFAULT_MAX_ACTIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    /// Toggle a binary feature.
    Flip,
    /// Overwrite a categorical feature; a no-op where it already holds it.
    SetCategory { category: u32 },
    /// Move a numeric feature by `delta` bins from its current bin.
    ShiftBins { delta: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub feature: usize,
    #[serde(flatten)]
    pub op: EditOp,
}

impl Edit {
    pub fn render(&self, schema: &FeatureSchema, binning: &Binning) -> String {
        let f = &schema.features[self.feature];
        match self.op {
            EditOp::Flip => format!("{}: flip", f.name),
            EditOp::SetCategory { category } => {
                format!("{}: set to '{}'", f.name, f.categories[category as usize])
            }
            EditOp::ShiftBins { delta } => {
                let unit = if delta.abs() == 1 { "bin" } else { "bins" };
                let mut s = format!("{}: {delta:+} {unit}", f.name);
                if let Some(b) = binning.numeric(self.feature) {
                    let amount = b.width() * delta as f64;
                    let sign = if amount < 0.0 { "-" } else { "+" };
                    let _ = write!(s, " (≈ {sign}{})", group_thousands(&fmt_number(amount.abs())));
                }
                s
            }
        }
    }
}

fn group_thousands(number: &str) -> String {
    let (int, frac) = match number.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (number, None),
    };
    if int.len() <= 3 {
        return number.to_string();
    }
    let mut out = String::new();
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if let Some(frac) = frac {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// A set of edits on pairwise-distinct features, sorted by feature. The
/// empty action leaves every instance unchanged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Action {
    edits: Vec<Edit>,
}

impl Action {
    pub fn null() -> Self {
        Action::default()
    }

    pub fn new(mut edits: Vec<Edit>) -> Result<Self> {
        edits.sort();
        if edits.windows(2).any(|w| w[0].feature == w[1].feature) {
            return Err(Error::Config("an action edits each feature at most once".into()));
        }
        Ok(Action { edits })
    }

    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    pub fn is_null(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn render(&self, schema: &FeatureSchema, binning: &Binning) -> String {
        if self.edits.is_empty() {
            return "no action".to_string();
        }
        self.edits
            .iter()
            .map(|e| e.render(schema, binning))
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Checks the edits against feature kinds and actionability.
    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        for e in &self.edits {
            let f = schema
                .features
                .get(e.feature)
                .ok_or_else(|| Error::Config(format!("edit on unknown feature {}", e.feature)))?;
            let ok = match (f.kind, e.op) {
                _ if f.actionability == Actionability::Immutable => false,
                (FeatureKind::Binary, EditOp::Flip) => true,
                (FeatureKind::Categorical, EditOp::SetCategory { category }) => {
                    (category as usize) < f.categories.len()
                }
                (FeatureKind::Numeric, EditOp::ShiftBins { delta }) => {
                    delta != 0
                        && delta.unsigned_abs() as usize <= f.max_shift()
                        && !(f.actionability == Actionability::IncreaseOnly && delta < 0)
                        && !(f.actionability == Actionability::DecreaseOnly && delta > 0)
                }
                _ => false,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "edit {:?} is not admissible on feature '{}'",
                    e.op, f.name
                )));
            }
        }
        Ok(())
    }
}

/// Applies an action to an instance. Shifts are relative to the instance's
/// current bin and clamp to the end bins; a shifted value lands on the
/// destination bin's midpoint, and a shift that clamps back into the current
/// bin leaves the value untouched.
pub fn apply_action(action: &Action, x: &Instance, binning: &Binning) -> Instance {
    let mut y = x.clone();
    for e in action.edits() {
        let slot = &mut y[e.feature];
        match (e.op, *slot) {
            (EditOp::Flip, Value::Binary(b)) => *slot = Value::Binary(!b),
            (EditOp::SetCategory { category }, Value::Category(_)) => *slot = Value::Category(category),
            (EditOp::ShiftBins { delta }, Value::Numeric(v)) => {
                let b = binning
                    .numeric(e.feature)
                    .expect("shift edit on a binned numeric feature");
                let current = b.bin_of(v) as i64;
                let dest = (current + delta as i64).clamp(0, b.bin_count() as i64 - 1);
                if dest != current {
                    *slot = Value::Numeric(b.midpoint(dest as usize));
                }
            }
            (op, value) => panic!("edit {op:?} does not apply to value {value:?}"),
        }
    }
    y
}

/// All admissible single edits, ordered by feature and then by parameter.
/// Constant numeric features and immutable features contribute nothing.
pub fn generate_single_edits(schema: &FeatureSchema, binning: &Binning) -> Vec<Edit> {
    let mut out = Vec::new();
    for (j, f) in schema.features.iter().enumerate() {
        if f.actionability == Actionability::Immutable {
            continue;
        }
        match f.kind {
            FeatureKind::Binary => out.push(Edit {
                feature: j,
                op: EditOp::Flip,
            }),
            FeatureKind::Categorical => out.extend((0..f.categories.len() as u32).map(|category| Edit {
                feature: j,
                op: EditOp::SetCategory { category },
            })),
            FeatureKind::Numeric => {
                if binning.numeric(j).is_none_or(|b| b.is_constant()) {
                    continue;
                }
                let max = f.max_shift() as i32;
                let range: Box<dyn Iterator<Item = i32>> = match f.actionability {
                    Actionability::IncreaseOnly => Box::new(1..=max),
                    Actionability::DecreaseOnly => Box::new(-max..=-1),
                    _ => Box::new((-max..=max).filter(|&d| d != 0)),
                };
                out.extend(range.map(|delta| Edit {
                    feature: j,
                    op: EditOp::ShiftBins { delta },
                }));
            }
        }
    }
    out
}

/// Number of actions `generate_action_set` would produce, including the
/// null action.
pub fn count_actions(singles: &[Edit], sparsity: usize) -> u128 {
    let mut per_feature: Vec<u128> = Vec::new();
    let mut last = None;
    for e in singles {
        if last == Some(e.feature) {
            *per_feature.last_mut().unwrap() += 1;
        } else {
            per_feature.push(1);
            last = Some(e.feature);
        }
    }
    // elementary symmetric polynomials of the per-feature counts
    let mut e = vec![0u128; sparsity + 1];
    e[0] = 1;
    for c in per_feature {
        for s in (1..=sparsity).rev() {
            e[s] = e[s].saturating_add(e[s - 1].saturating_mul(c));
        }
    }
    e.iter().fold(0u128, |acc, &v| acc.saturating_add(v))
}

/// The canonical action set: the null action at index 0, then every
/// combination of 1..=k single edits on distinct features, grouped by size
/// and ordered lexicographically by single-edit index.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<Action>,
    sparsity: usize,
}

impl ActionSet {
    pub fn generate(schema: &FeatureSchema, binning: &Binning, sparsity: usize, cap: usize) -> Result<Self> {
        if sparsity == 0 {
            return Err(Error::Config("sparsity must be at least 1".into()));
        }
        let singles = generate_single_edits(schema, binning);
        let count = count_actions(&singles, sparsity);
        if count > cap as u128 {
            return Err(Error::ActionSetTooLarge { count, cap });
        }
        let mut actions = Vec::with_capacity(count as usize);
        actions.push(Action::null());
        let mut chosen = Vec::with_capacity(sparsity);
        for size in 1..=sparsity {
            combine(&singles, size, 0, &mut chosen, &mut actions);
        }
        debug_assert_eq!(actions.len() as u128, count);
        Ok(ActionSet { actions, sparsity })
    }

    /// Wraps an explicit action list. The null action must come first.
    pub fn from_actions(actions: Vec<Action>) -> Result<Self> {
        if actions.first().is_none_or(|a| !a.is_null()) {
            return Err(Error::Config("action list must start with the null action".into()));
        }
        let sparsity = actions.iter().map(|a| a.edits().len()).max().unwrap_or(0);
        Ok(ActionSet { actions, sparsity })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn get(&self, index: usize) -> &Action {
        &self.actions[index]
    }

    pub fn as_slice(&self) -> &[Action] {
        &self.actions
    }

    pub fn iter(&self) -> impl Iterator<Item = &Action> {
        self.actions.iter()
    }

    /// Hex SHA-256 over the ordered edit lists.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for a in &self.actions {
            for e in a.edits() {
                let (tag, param) = match e.op {
                    EditOp::Flip => (0u8, 0i64),
                    EditOp::SetCategory { category } => (1, category as i64),
                    EditOp::ShiftBins { delta } => (2, delta as i64),
                };
                hasher.update((e.feature as u64).to_le_bytes());
                hasher.update([tag]);
                hasher.update(param.to_le_bytes());
            }
            hasher.update([0xff]);
        }
        hex::encode(hasher.finalize())
    }
}

fn combine(singles: &[Edit], size: usize, start: usize, chosen: &mut Vec<Edit>, out: &mut Vec<Action>) {
    if chosen.len() == size {
        out.push(Action { edits: chosen.clone() });
        return;
    }
    for i in start..singles.len() {
        if chosen.last().is_some_and(|last| last.feature >= singles[i].feature) {
            continue;
        }
        chosen.push(singles[i]);
        combine(singles, size, i + 1, chosen, out);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binarize::NumericBinning;
    use crate::schema::FeatureSpec;
    use proptest::prelude::*;

    fn zero_ten(bins: usize) -> Binning {
        Binning {
            features: vec![Some(NumericBinning {
                min: 0.0,
                max: 10.0,
                bins,
            })],
        }
    }

    fn no_bins(n: usize) -> Binning {
        Binning {
            features: vec![None; n],
        }
    }

    fn shift(feature: usize, delta: i32) -> Edit {
        Edit {
            feature,
            op: EditOp::ShiftBins { delta },
        }
    }

    #[test]
    fn single_edit_enumeration() {
        let flip = FeatureSchema::new(vec![FeatureSpec::binary("b")]).unwrap();
        assert_eq!(
            generate_single_edits(&flip, &no_bins(1)),
            vec![Edit {
                feature: 0,
                op: EditOp::Flip
            }]
        );

        let up = FeatureSchema::new(vec![FeatureSpec::numeric("x", 5)
            .with_max_bin_shift(4)
            .with_actionability(Actionability::IncreaseOnly)])
        .unwrap();
        let deltas: Vec<_> = generate_single_edits(&up, &zero_ten(5)).iter().map(|e| e.op).collect();
        assert_eq!(
            deltas,
            (1..=4).map(|delta| EditOp::ShiftBins { delta }).collect::<Vec<_>>()
        );

        let frozen = FeatureSchema::new(vec![
            FeatureSpec::categorical("c", &["a", "b", "c"]).with_actionability(Actionability::Immutable)
        ])
        .unwrap();
        assert!(generate_single_edits(&frozen, &no_bins(1)).is_empty());

        let free = FeatureSchema::new(vec![FeatureSpec::numeric("x", 5).with_max_bin_shift(2)]).unwrap();
        let deltas: Vec<_> = generate_single_edits(&free, &zero_ten(5))
            .iter()
            .map(|e| match e.op {
                EditOp::ShiftBins { delta } => delta,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(deltas, vec![-2, -1, 1, 2]);
    }

    #[test]
    fn action_set_sizes() {
        // two single edits on distinct features, k = 2: null, 2 singles, 1 pair
        let schema = FeatureSchema::new(vec![FeatureSpec::binary("a"), FeatureSpec::binary("b")]).unwrap();
        let set = ActionSet::generate(&schema, &no_bins(2), 2, usize::MAX).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.get(0).is_null());
        assert_eq!(set.get(3).edits().len(), 2);

        // three single edits on one feature, k = 3: no multi-edit combinations
        let one = FeatureSchema::new(vec![FeatureSpec::categorical("c", &["x", "y", "z"])]).unwrap();
        assert_eq!(ActionSet::generate(&one, &no_bins(1), 3, usize::MAX).unwrap().len(), 4);

        let schema = FeatureSchema::new(vec![
            FeatureSpec::binary("a"),
            FeatureSpec::categorical("c", &["x", "y", "z"]),
        ])
        .unwrap();
        assert_eq!(ActionSet::generate(&schema, &no_bins(2), 1, usize::MAX).unwrap().len(), 5);
        // brute-force count: 1 + 4 singles + 1*3 pairs
        assert_eq!(ActionSet::generate(&schema, &no_bins(2), 3, usize::MAX).unwrap().len(), 8);
    }

    #[test]
    fn cap_is_enforced() {
        let schema = FeatureSchema::new(vec![FeatureSpec::binary("a"), FeatureSpec::binary("b")]).unwrap();
        let err = ActionSet::generate(&schema, &no_bins(2), 2, 3).unwrap_err();
        assert!(matches!(err, Error::ActionSetTooLarge { count: 4, cap: 3 }));
    }

    #[test]
    fn shifts_move_between_midpoints() {
        let b = zero_ten(5);
        let x = vec![Value::Numeric(3.0)];
        assert_eq!(apply_action(&Action::null(), &x, &b), x);
        let up2 = Action::new(vec![shift(0, 2)]).unwrap();
        assert_eq!(apply_action(&up2, &x, &b), vec![Value::Numeric(7.0)]);
        let up3 = Action::new(vec![shift(0, 3)]).unwrap();
        assert_eq!(apply_action(&up3, &[Value::Numeric(9.0)].to_vec(), &b), vec![Value::Numeric(9.0)]);
        // clamped back into the current bin: untouched
        assert_eq!(apply_action(&up3, &[Value::Numeric(9.9)].to_vec(), &b), vec![Value::Numeric(9.9)]);
        let down = Action::new(vec![shift(0, -4)]).unwrap();
        assert_eq!(apply_action(&down, &x, &b), vec![Value::Numeric(1.0)]);
    }

    #[test]
    fn set_category_is_idempotent() {
        let set = Action::new(vec![Edit {
            feature: 0,
            op: EditOp::SetCategory { category: 2 },
        }])
        .unwrap();
        let b = no_bins(1);
        let x = vec![Value::Category(0)];
        let once = apply_action(&set, &x, &b);
        assert_eq!(once, vec![Value::Category(2)]);
        assert_eq!(apply_action(&set, &once, &b), once);
    }

    #[test]
    fn duplicate_features_are_rejected() {
        assert!(Action::new(vec![shift(0, 1), shift(0, 2)]).is_err());
    }

    #[test]
    fn rendering() {
        let schema = FeatureSchema::new(vec![FeatureSpec::numeric("income", 5)]).unwrap();
        let binning = Binning {
            features: vec![Some(NumericBinning {
                min: 0.0,
                max: 20_000.0,
                bins: 5,
            })],
        };
        let a = Action::new(vec![shift(0, 2)]).unwrap();
        assert_eq!(a.render(&schema, &binning), "income: +2 bins (≈ +8,000)");
        assert_eq!(Action::null().render(&schema, &binning), "no action");
        assert_eq!(group_thousands("1234567.5"), "1,234,567.5");
    }

    proptest! {
        #[test]
        fn increase_only_never_decreases(v in -2.0f64..12.0, delta in 1i32..5) {
            let b = zero_ten(5);
            let a = Action::new(vec![shift(0, delta)]).unwrap();
            let y = apply_action(&a, &vec![Value::Numeric(v)], &b);
            prop_assert!(y[0].as_f64() >= v);
            let a = Action::new(vec![shift(0, -delta)]).unwrap();
            let y = apply_action(&a, &vec![Value::Numeric(v)], &b);
            prop_assert!(y[0].as_f64() <= v);
        }

        #[test]
        fn generation_is_pure_and_counted(nbin in 0usize..3, ncat in 1usize..4, k in 1usize..4) {
            let mut features = vec![FeatureSpec::numeric("x", 4)];
            features.extend((0..nbin).map(|i| FeatureSpec::binary(&format!("b{i}"))));
            features.push(FeatureSpec::categorical("c", &["p", "q", "r"][..ncat]));
            let schema = FeatureSchema::new(features).unwrap();
            let mut bins = vec![Some(NumericBinning { min: 0.0, max: 4.0, bins: 4 })];
            bins.extend(std::iter::repeat_n(None, nbin + 1));
            let binning = Binning { features: bins };
            let a = ActionSet::generate(&schema, &binning, k, usize::MAX).unwrap();
            let b = ActionSet::generate(&schema, &binning, k, usize::MAX).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.hash(), b.hash());
            let singles = generate_single_edits(&schema, &binning);
            prop_assert_eq!(a.len() as u128, count_actions(&singles, k));
            for action in a.iter() {
                prop_assert!(action.validate(&schema).is_ok());
                prop_assert!(action.edits().len() <= k);
            }
            let unique: std::collections::HashSet<_> = a.iter().collect();
            prop_assert_eq!(unique.len(), a.len());
        }
    }
}
