//! End-to-end runs and the on-disk front format.
//!
//! `front.json` is self-contained: besides the solutions it stores the
//! schema, bin layout, CDFs and predictor, so a front can be re-evaluated
//! on new data without the original inputs. It holds nothing that depends
//! on thread count or timing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::actions::{Action, ActionSet, Edit, EditOp, DEFAULT_MAX_ACTIONS, DEFAULT_SPARSITY};
use crate::audit::{audit, AuditReport, GroupChoice};
use crate::binarize::{binarize, BinarizedView, Binning, Predicate};
use crate::cache::{build_cache, cache_size_estimate, CacheMatrix, CacheOptions, CostModel};
use crate::cdf::EmpiricalCdf;
use crate::error::{read_file, Error, Result, ResultExt};
use crate::eval::{Evaluator, SummaryMetrics};
use crate::predictor::{
    compute_affected, load_rule_predictor, train_logistic, LogisticConfig, Predictor, PredictorModel,
};
use crate::schema::{load_dataset, Dataset, FeatureKind, FeatureSchema, Value};
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig, SolverStats};
use crate::tree::RecourseSummaryTree;

/// Which classifier to explain.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    /// Train the built-in logistic model on the dataset's labels.
    Logistic,
    /// A JSON rule list.
    Rules(PathBuf),
    /// A shell command speaking the batch protocol.
    External(String),
}

impl FromStr for PredictorSpec {
    type Err = Error;

    /// Parses `logistic`, `rules=PATH` or `external=COMMAND`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('=') {
            None if s == "logistic" => Ok(PredictorSpec::Logistic),
            Some(("rules", path)) if !path.is_empty() => Ok(PredictorSpec::Rules(path.into())),
            Some(("external", cmd)) if !cmd.trim().is_empty() => Ok(PredictorSpec::External(cmd.to_string())),
            _ => Err(Error::Config(format!(
                "predictor must be 'logistic', 'rules=PATH' or 'external=COMMAND', got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: PathBuf,
    pub schema: PathBuf,
    pub predictor: PredictorSpec,
    pub solver: SolverConfig,
    pub sparsity: usize,
    /// Overrides every numeric feature's bin count.
    pub bins: Option<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub max_actions: usize,
    pub max_cache_bytes: u128,
    /// Reuse (or create) a cache file at this path.
    pub cache_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>, schema: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            data: data.into(),
            schema: schema.into(),
            predictor: PredictorSpec::Logistic,
            solver: SolverConfig::default(),
            sparsity: DEFAULT_SPARSITY,
            bins: None,
            out: out.into(),
            seed: 0,
            max_actions: DEFAULT_MAX_ACTIONS,
            max_cache_bytes: CacheOptions::default().max_bytes,
            cache_file: None,
        }
    }
}

/// Run settings recorded in `front.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub max_depth: usize,
    pub max_nodes: usize,
    pub min_leaf: usize,
    pub sparsity: usize,
    pub bins: Option<usize>,
    pub seed: u64,
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PredicateTest {
    Le { threshold: f64 },
    Eq { category: String },
    Set,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateJson {
    pub feature: String,
    #[serde(flatten)]
    pub test: PredicateTest,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditChange {
    Flip,
    SetCategory { category: String },
    ShiftBins { delta: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditJson {
    pub feature: String,
    #[serde(flatten)]
    pub change: EditChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionJson {
    pub edits: Vec<EditJson>,
    pub text: String,
}

/// A tree node as stored on disk. Instances passing the predicate go to
/// `pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeJson {
    Branch {
        predicate: PredicateJson,
        fail: Box<TreeJson>,
        pass: Box<TreeJson>,
    },
    Leaf {
        action: ActionJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub index: usize,
    /// Summed cost over the affected population.
    pub v_cost: f64,
    /// Number of affected instances whose action fails.
    pub v_loss: u64,
    pub cost_ticks: u64,
    pub cost_mean: f64,
    pub loss_mean: f64,
    pub invalidity: f64,
    pub depth: usize,
    pub branch_nodes: usize,
    pub tree: TreeJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontFile {
    pub status: SolveStatus,
    pub settings: RunSettings,
    pub n_affected: usize,
    /// Denominator of `cost_ticks`.
    pub cost_scale: u64,
    pub schema_hash: String,
    pub action_set_hash: String,
    pub schema: FeatureSchema,
    pub binning: Binning,
    pub cdf: EmpiricalCdf,
    pub predictor: PredictorModel,
    pub solutions: Vec<SolutionRecord>,
}

fn predicate_json(p: &Predicate, schema: &FeatureSchema) -> PredicateJson {
    let f = &schema.features[p.feature()];
    let test = match *p {
        Predicate::AtMost { threshold, .. } => PredicateTest::Le { threshold },
        Predicate::Equals { category, .. } => PredicateTest::Eq {
            category: f.categories[category as usize].clone(),
        },
        Predicate::IsSet { .. } => PredicateTest::Set,
    };
    PredicateJson {
        feature: f.name.clone(),
        test,
        text: p.describe(schema),
    }
}

fn action_json(a: &Action, schema: &FeatureSchema, binning: &Binning) -> ActionJson {
    let edits = a
        .edits()
        .iter()
        .map(|e| {
            let f = &schema.features[e.feature];
            EditJson {
                feature: f.name.clone(),
                change: match e.op {
                    EditOp::Flip => EditChange::Flip,
                    EditOp::SetCategory { category } => EditChange::SetCategory {
                        category: f.categories[category as usize].clone(),
                    },
                    EditOp::ShiftBins { delta } => EditChange::ShiftBins { delta },
                },
            }
        })
        .collect();
    ActionJson {
        edits,
        text: a.render(schema, binning),
    }
}

pub fn tree_to_json(
    tree: &RecourseSummaryTree,
    predicates: &[Predicate],
    actions: &[Action],
    schema: &FeatureSchema,
    binning: &Binning,
) -> TreeJson {
    match tree {
        RecourseSummaryTree::Leaf { action } => TreeJson::Leaf {
            action: action_json(&actions[*action], schema, binning),
        },
        RecourseSummaryTree::Branch(b) => TreeJson::Branch {
            predicate: predicate_json(&predicates[b.predicate], schema),
            fail: Box::new(tree_to_json(&b.fail, predicates, actions, schema, binning)),
            pass: Box::new(tree_to_json(&b.pass, predicates, actions, schema, binning)),
        },
    }
}

/// Trees read back from disk, with the predicates and actions they index.
#[derive(Debug, Clone, Default)]
pub struct ResolvedTrees {
    pub trees: Vec<RecourseSummaryTree>,
    pub predicates: Vec<Predicate>,
    pub actions: Vec<Action>,
}

impl ResolvedTrees {
    fn feature(schema: &FeatureSchema, name: &str) -> Result<usize> {
        schema
            .index_of(name)
            .ok_or_else(|| Error::Data(format!("front refers to unknown feature '{name}'")))
    }

    fn category(schema: &FeatureSchema, j: usize, name: &str) -> Result<u32> {
        schema.features[j]
            .category_index(name)
            .ok_or_else(|| Error::Data(format!("unknown category '{name}' of '{}'", schema.features[j].name)))
    }

    fn predicate(&mut self, p: &PredicateJson, schema: &FeatureSchema) -> Result<usize> {
        let feature = Self::feature(schema, &p.feature)?;
        let kind = schema.features[feature].kind;
        let predicate = match (&p.test, kind) {
            (PredicateTest::Le { threshold }, FeatureKind::Numeric) => Predicate::AtMost {
                feature,
                threshold: *threshold,
            },
            (PredicateTest::Eq { category }, FeatureKind::Categorical) => Predicate::Equals {
                feature,
                category: Self::category(schema, feature, category)?,
            },
            (PredicateTest::Set, FeatureKind::Binary) => Predicate::IsSet { feature },
            _ => return Err(Error::Data(format!("test on '{}' does not fit its kind", p.feature))),
        };
        Ok(match self.predicates.iter().position(|q| *q == predicate) {
            Some(i) => i,
            None => {
                self.predicates.push(predicate);
                self.predicates.len() - 1
            }
        })
    }

    fn action(&mut self, a: &ActionJson, schema: &FeatureSchema) -> Result<usize> {
        let edits = a
            .edits
            .iter()
            .map(|e| {
                let feature = Self::feature(schema, &e.feature)?;
                let op = match &e.change {
                    EditChange::Flip => EditOp::Flip,
                    EditChange::SetCategory { category } => EditOp::SetCategory {
                        category: Self::category(schema, feature, category)?,
                    },
                    EditChange::ShiftBins { delta } => EditOp::ShiftBins { delta: *delta },
                };
                Ok(Edit { feature, op })
            })
            .collect::<Result<Vec<_>>>()?;
        let action = Action::new(edits)?;
        action.validate(schema)?;
        Ok(match self.actions.iter().position(|b| *b == action) {
            Some(i) => i,
            None => {
                self.actions.push(action);
                self.actions.len() - 1
            }
        })
    }

    fn resolve(&mut self, node: &TreeJson, schema: &FeatureSchema) -> Result<RecourseSummaryTree> {
        Ok(match node {
            TreeJson::Leaf { action } => RecourseSummaryTree::leaf(self.action(action, schema)?),
            TreeJson::Branch { predicate, fail, pass } => {
                let p = self.predicate(predicate, schema)?;
                RecourseSummaryTree::branch(p, self.resolve(fail, schema)?, self.resolve(pass, schema)?)
            }
        })
    }

    pub fn from_json(nodes: &[&TreeJson], schema: &FeatureSchema) -> Result<Self> {
        let mut out = ResolvedTrees::default();
        for node in nodes {
            let tree = out.resolve(node, schema)?;
            out.trees.push(tree);
        }
        Ok(out)
    }
}

/// A front file with everything needed to re-evaluate it.
pub struct LoadedFront {
    pub file: FrontFile,
    pub model: CostModel,
    pub predictor: Arc<dyn Predictor>,
    pub resolved: ResolvedTrees,
}

impl LoadedFront {
    pub fn from_file(file: FrontFile) -> Result<Self> {
        if file.schema.hash() != file.schema_hash {
            return Err(Error::Data("front schema does not match its recorded hash".into()));
        }
        file.schema.validate()?;
        if file.binning.features.len() != file.schema.len() || file.cdf.num_features() != file.schema.len() {
            return Err(Error::Data("front bin layout or CDFs do not match its schema".into()));
        }
        if file.cdf.n() as u64 != file.cost_scale {
            return Err(Error::Data("front cost scale does not match its CDFs".into()));
        }
        let model = CostModel {
            schema: file.schema.clone(),
            binning: file.binning.clone(),
            cdf: file.cdf.clone(),
        };
        let predictor = file.predictor.build(&file.schema)?;
        let nodes: Vec<&TreeJson> = file.solutions.iter().map(|s| &s.tree).collect();
        let resolved = ResolvedTrees::from_json(&nodes, &file.schema)?;
        Ok(LoadedFront {
            file,
            model,
            predictor,
            resolved,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: FrontFile = serde_json::from_str(&read_file(path)?)
            .map_err(|e| Error::Data(format!("{}: not a front file: {e}", path.display())))?;
        Self::from_file(file)
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            model: &self.model,
            predicates: &self.resolved.predicates,
            actions: &self.resolved.actions,
            predictor: self.predictor.as_ref(),
        }
    }

    /// Loads a dataset laid out by the front's schema.
    pub fn load_data(&self, path: &Path) -> Result<Dataset> {
        load_dataset(path, &self.file.schema)
    }

    /// Metrics of every solution on `population`, in front order.
    pub fn evaluate(&self, population: &Dataset) -> Result<Vec<SummaryMetrics>> {
        let eval = self.evaluator();
        let affected = eval.affected(population)?;
        self.resolved
            .trees
            .iter()
            .map(|t| eval.evaluate_affected(t, &affected))
            .collect()
    }

    /// Metrics on the whole population followed by one block per value of
    /// the categorical `group` feature. Groups without adversely classified
    /// instances are skipped.
    pub fn evaluate_by_group(&self, population: &Dataset, group: &str) -> Result<Vec<(String, Vec<SummaryMetrics>)>> {
        let schema = &self.file.schema;
        let g = schema
            .index_of(group)
            .filter(|&g| schema.features[g].kind == FeatureKind::Categorical)
            .ok_or_else(|| Error::Config(format!("'{group}' is not a categorical feature")))?;
        let mut out = vec![("all".to_string(), self.evaluate(population)?)];
        for (c, name) in schema.features[g].categories.iter().enumerate() {
            let rows: Vec<usize> = (0..population.len())
                .filter(|&i| population.instances[i][g] == Value::Category(c as u32))
                .collect();
            match self.evaluate(&population.select(&rows)) {
                Ok(metrics) => out.push((name.clone(), metrics)),
                Err(Error::Evaluation(_)) => log::warn!("group '{name}' has no adversely classified instances"),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    pub fn audit(&self, population: &Dataset, group: &str, choice: &GroupChoice) -> Result<AuditReport> {
        audit(&self.resolved.trees, population, group, choice, &self.evaluator())
    }
}

/// Metrics CSV with one row per solution and group; `all` names the whole
/// population.
pub fn metrics_csv(groups: &[(String, Vec<SummaryMetrics>)], split: &str) -> String {
    let mut s = String::from("solution_index,v_C,v_L,cost_mean,loss_mean,invalidity,split,group\n");
    for (group, metrics) in groups {
        for (i, m) in metrics.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{split},{group}",
                m.total_cost(),
                m.failures,
                m.cost,
                m.loss,
                m.invalidity
            );
        }
    }
    s
}

/// Everything computed before the search.
pub struct Prepared {
    pub data: Dataset,
    pub model: CostModel,
    pub predictor_model: PredictorModel,
    pub predictor: Arc<dyn Predictor>,
    pub affected: Vec<usize>,
    pub view: BinarizedView,
    pub actions: ActionSet,
    pub cache: CacheMatrix,
    pub stage_ms: BTreeMap<String, u64>,
}

fn timed<T>(stages: &mut BTreeMap<String, u64>, name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let started = Instant::now();
    let out = f().at(name)?;
    stages.insert(name.to_string(), started.elapsed().as_millis() as u64);
    Ok(out)
}

/// Ingests data, fits or loads the predictor, and builds the cache.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let mut stages = BTreeMap::new();
    let data = timed(&mut stages, "ingest", || {
        let mut schema = FeatureSchema::load(&config.schema)?;
        if let Some(bins) = config.bins {
            schema.override_bins(bins)?;
        }
        let data = load_dataset(&config.data, &schema)?;
        if data.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        Ok(data)
    })?;
    let schema = data.schema.clone();

    let (predictor_model, predictor, affected) = timed(&mut stages, "predictor", || {
        let model = match &config.predictor {
            PredictorSpec::Logistic => {
                let labels = data.labels.as_ref().ok_or_else(|| {
                    Error::Config("the logistic predictor needs a label column named in the schema".into())
                })?;
                let settings = LogisticConfig {
                    seed: config.seed,
                    ..Default::default()
                };
                PredictorModel::Logistic(train_logistic(&data, labels, &settings)?)
            }
            PredictorSpec::Rules(path) => PredictorModel::Rules(load_rule_predictor(path, &schema)?.source().clone()),
            PredictorSpec::External(command) => PredictorModel::External {
                command: command.clone(),
            },
        };
        let predictor = model.build(&schema)?;
        let affected = compute_affected(&data, predictor.as_ref())?;
        log::info!("{} of {} instances are adversely classified", affected.len(), data.len());
        Ok((model, predictor, affected))
    })?;

    let (model, view, actions) = timed(&mut stages, "binarize", || {
        let model = CostModel::fit(&data)?;
        let view = binarize(&data, &affected, &model.binning);
        let actions = ActionSet::generate(&schema, &model.binning, config.sparsity, config.max_actions)?;
        log::info!("{} predicates, {} actions", view.num_predicates(), actions.len());
        Ok((model, view, actions))
    })?;

    let cache = timed(&mut stages, "cache", || {
        if affected.is_empty() {
            return Err(Error::Infeasible("no instance is adversely classified".into()));
        }
        let rows: Vec<_> = affected.iter().map(|&i| data.instances[i].clone()).collect();
        let (schema_hash, action_hash) = (schema.hash(), actions.hash());
        if let Some(path) = config.cache_file.as_deref().filter(|p| p.exists()) {
            let cache = CacheMatrix::load(path, &schema_hash, &action_hash)?;
            if cache.rows() != rows.len() || cache.actions() != actions.len() || cache.scale() != model.scale() {
                return Err(Error::CacheFile {
                    path: path.to_path_buf(),
                    message: "dimensions do not match this run".into(),
                });
            }
            return Ok(cache);
        }
        let options = CacheOptions {
            threads: config.solver.threads,
            max_bytes: config.max_cache_bytes,
            ..Default::default()
        };
        let cache = build_cache(&rows, &actions, predictor.as_ref(), &model, &options)?;
        if let Some(path) = &config.cache_file {
            cache.save(path, &schema_hash, &action_hash)?;
        }
        Ok(cache)
    })?;

    Ok(Prepared {
        data,
        model,
        predictor_model,
        predictor,
        affected,
        view,
        actions,
        cache,
        stage_ms: stages,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStats {
    pub status: SolveStatus,
    pub rows: usize,
    pub affected: usize,
    pub predicates: usize,
    pub actions: usize,
    pub cache_bytes: u128,
    pub threads: usize,
    pub solver: SolverStats,
    pub stage_ms: BTreeMap<String, u64>,
}

pub struct SolveReport {
    pub front: FrontFile,
    pub result: SolveResult,
    pub stats: RunStats,
}

/// Builds the front file for a finished search.
pub fn front_file(prepared: &Prepared, result: &SolveResult, config: &RunConfig) -> FrontFile {
    let schema = &prepared.data.schema;
    let n = prepared.affected.len();
    let scale = prepared.model.scale();
    let solutions = result
        .front
        .iter()
        .enumerate()
        .map(|(index, (v, tree))| {
            let m = SummaryMetrics::from_totals(*v, n, scale);
            SolutionRecord {
                index,
                v_cost: m.total_cost(),
                v_loss: v.loss,
                cost_ticks: v.cost,
                cost_mean: m.cost,
                loss_mean: m.loss,
                invalidity: m.invalidity,
                depth: tree.depth(),
                branch_nodes: tree.branch_count(),
                tree: tree_to_json(
                    tree,
                    &prepared.view.predicates,
                    prepared.actions.as_slice(),
                    schema,
                    &prepared.model.binning,
                ),
            }
        })
        .collect();
    FrontFile {
        status: result.status,
        settings: RunSettings {
            max_depth: config.solver.max_depth,
            max_nodes: config.solver.max_nodes,
            min_leaf: config.solver.min_leaf,
            sparsity: config.sparsity,
            bins: config.bins,
            seed: config.seed,
            timeout_ms: config.solver.timeout.map(|t| t.as_millis() as u64),
        },
        n_affected: n,
        cost_scale: scale,
        schema_hash: schema.hash(),
        action_set_hash: prepared.actions.hash(),
        schema: schema.clone(),
        binning: prepared.model.binning.clone(),
        cdf: prepared.model.cdf.clone(),
        predictor: prepared.predictor_model.clone(),
        solutions,
    }
}

/// Front CSV with one row per solution.
pub fn front_csv(front: &FrontFile) -> String {
    let mut s = String::from("solution_index,v_C,v_L,cost_mean,loss_mean,invalidity,depth,branch_nodes\n");
    for r in &front.solutions {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.index, r.v_cost, r.v_loss, r.cost_mean, r.loss_mean, r.invalidity, r.depth, r.branch_nodes
        );
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the whole pipeline and writes `front.json`, `stats.json` and
/// `front.csv` into the output directory. A timed-out search still writes
/// its partial front.
pub fn run_solve(config: &RunConfig) -> Result<SolveReport> {
    config.solver.validate().at("config")?;
    let mut prepared = prepare(config)?;
    solve_prepared(&mut prepared, config)
}

/// The search and export half of [`run_solve`].
pub fn solve_prepared(prepared: &mut Prepared, config: &RunConfig) -> Result<SolveReport> {
    config.solver.validate().at("config")?;
    std::fs::create_dir_all(&config.out)
        .map_err(|source| Error::File {
            path: config.out.clone(),
            source,
        })
        .at("export")?;
    let result = timed(&mut prepared.stage_ms, "solve", || {
        solve(&prepared.cache, &prepared.view, &config.solver)
    })?;
    let front = front_file(prepared, &result, config);
    let stats = RunStats {
        status: result.status,
        rows: prepared.data.len(),
        affected: prepared.affected.len(),
        predicates: prepared.view.num_predicates(),
        actions: prepared.actions.len(),
        cache_bytes: cache_size_estimate(prepared.cache.rows(), prepared.cache.actions()),
        threads: if config.solver.threads == 0 {
            rayon::current_num_threads()
        } else {
            config.solver.threads
        },
        solver: result.stats.clone(),
        stage_ms: prepared.stage_ms.clone(),
    };
    let json = serde_json::to_string_pretty(&front)?;
    write_text(&config.out.join("front.json"), &json).at("export")?;
    write_text(&config.out.join("stats.json"), &serde_json::to_string_pretty(&stats)?).at("export")?;
    write_text(&config.out.join("front.csv"), &front_csv(&front)).at("export")?;
    Ok(SolveReport { front, result, stats })
}

/// Writes `audit.json`, `audit.md` and `audit_series.csv` into `dir`.
pub fn write_audit(report: &AuditReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::File {
        path: dir.to_path_buf(),
        source,
    })?;
    write_text(&dir.join("audit.json"), &report.to_json())?;
    write_text(&dir.join("audit.md"), &report.to_markdown())?;
    write_text(&dir.join("audit_series.csv"), &report.series_csv())
}

/// Parses durations such as `90`, `1.5s`, `250ms`, `2m` or `1h`; bare
/// numbers are seconds.
pub fn parse_duration(text: &str) -> Result<Duration> {
    let t = text.trim();
    let split = t.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(t.len());
    let (number, unit) = t.split_at(split);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Config(format!("invalid duration '{text}'")))?;
    let seconds = match unit.trim() {
        "" | "s" => value,
        "ms" => value / 1000.0,
        "m" | "min" => value * 60.0,
        "h" => value * 3600.0,
        _ => return Err(Error::Config(format!("invalid duration unit in '{text}'"))),
    };
    Duration::try_from_secs_f64(seconds).map_err(|_| Error::Config(format!("invalid duration '{text}'")))
}
