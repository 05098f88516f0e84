//! The percentile-shift cost, recourse loss, and the precomputed
//! instance-by-action cache the tree search reads from.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{apply_action, Action, ActionSet};
use crate::binarize::Binning;
use crate::cdf::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::pareto::{CostLossPair, ParetoArchive};
use crate::predictor::Predictor;
use crate::schema::{Dataset, FeatureSchema, Instance};

/// Everything needed to apply actions and price them: the schema, the bin
/// layout and the CDFs, all fitted on the full training population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub schema: FeatureSchema,
    pub binning: Binning,
    pub cdf: EmpiricalCdf,
}

impl CostModel {
    pub fn fit(data: &Dataset) -> Result<Self> {
        Ok(CostModel {
            schema: data.schema.clone(),
            binning: Binning::fit(data)?,
            cdf: EmpiricalCdf::fit(data)?,
        })
    }

    /// Denominator of every cost tick.
    pub fn scale(&self) -> u64 {
        self.cdf.n() as u64
    }

    pub fn apply(&self, action: &Action, x: &Instance) -> Instance {
        apply_action(action, x, &self.binning)
    }

    /// Cost of `action` on `x` in ticks, given the transformed instance.
    pub fn cost_ticks_of(&self, action: &Action, x: &Instance, moved: &Instance) -> u64 {
        action
            .edits()
            .iter()
            .map(|e| self.cdf.shift_ticks(e.feature, &x[e.feature], &moved[e.feature]))
            .max()
            .unwrap_or(0)
    }

    pub fn cost_ticks(&self, action: &Action, x: &Instance) -> u64 {
        self.cost_ticks_of(action, x, &self.apply(action, x))
    }

    pub fn ticks_to_cost(&self, ticks: u64) -> f64 {
        ticks as f64 / self.scale() as f64
    }
}

/// Maximum percentile shift of `action` on `x`: the largest CDF change
/// over the edited features. Lies in `[0, 1]`.
pub fn mps_cost(action: &Action, x: &Instance, model: &CostModel) -> f64 {
    model.ticks_to_cost(model.cost_ticks(action, x))
}

/// True when the transformed instance is still classified adversely.
pub fn recourse_loss(action: &Action, x: &Instance, model: &CostModel, f: &dyn Predictor) -> Result<bool> {
    Ok(f.predict(&model.apply(action, x))? == 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheOptions {
    /// Worker threads; 0 uses the ambient rayon pool.
    pub threads: usize,
    /// Refuse to build caches estimated above this many bytes.
    pub max_bytes: u128,
    /// Target number of transformed instances per predictor request.
    pub batch_rows: usize,
}

impl Default for CacheOptions {
    fn default() -> Self {
        CacheOptions {
            threads: 0,
            max_bytes: 4 << 30,
            batch_rows: 1 << 14,
        }
    }
}

/// Estimated resident size of a cache: 4-byte costs plus one loss bit per
/// cell.
pub fn cache_size_estimate(rows: usize, actions: usize) -> u128 {
    let cells = rows as u128 * actions as u128;
    cells * 4 + (rows as u128).div_ceil(64) * 8 * actions as u128
}

/// Cost ticks and loss bits for every (affected instance, action) pair.
/// Costs are stored row-major; losses as one bit column per action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheMatrix {
    rows: usize,
    actions: usize,
    scale: u64,
    cost: Vec<u32>,
    loss: Vec<u64>,
    words: usize,
}

impl CacheMatrix {
    /// Builds a cache from explicit cells, mainly for tests.
    pub fn from_cells(scale: u64, cost: Vec<Vec<u32>>, loss: Vec<Vec<bool>>) -> Self {
        let rows = cost.len();
        let actions = cost.first().map_or(0, Vec::len);
        assert_eq!(loss.len(), rows);
        let words = rows.div_ceil(64);
        let mut flat = Vec::with_capacity(rows * actions);
        let mut bits = vec![0u64; words * actions];
        for (i, (c, l)) in cost.iter().zip(&loss).enumerate() {
            assert_eq!(c.len(), actions);
            assert_eq!(l.len(), actions);
            flat.extend_from_slice(c);
            for (a, &lost) in l.iter().enumerate() {
                if lost {
                    bits[a * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        CacheMatrix {
            rows,
            actions,
            scale,
            cost: flat,
            loss: bits,
            words,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    /// Denominator of the cost ticks.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn cost_ticks(&self, row: usize, action: usize) -> u32 {
        self.cost[row * self.actions + action]
    }

    pub fn cost(&self, row: usize, action: usize) -> f64 {
        self.cost_ticks(row, action) as f64 / self.scale as f64
    }

    pub fn loss(&self, row: usize, action: usize) -> bool {
        self.loss[action * self.words + row / 64] >> (row % 64) & 1 == 1
    }

    pub fn cost_row(&self, row: usize) -> &[u32] {
        &self.cost[row * self.actions..(row + 1) * self.actions]
    }

    pub fn loss_column(&self, action: usize) -> &[u64] {
        &self.loss[action * self.words..(action + 1) * self.words]
    }

    pub fn cell(&self, row: usize, action: usize) -> CostLossPair {
        CostLossPair::new(self.cost_ticks(row, action) as u64, self.loss(row, action) as u64)
    }

    pub fn save(&self, path: &Path, schema_hash: &str, action_hash: &str) -> Result<()> {
        let file_err = |source| Error::File {
            path: path.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(std::fs::File::create(path).map_err(file_err)?);
        let mut write = || -> std::io::Result<()> {
            out.write_all(CACHE_MAGIC)?;
            for n in [self.rows as u64, self.actions as u64, self.scale] {
                out.write_all(&n.to_le_bytes())?;
            }
            out.write_all(&hash_bytes(schema_hash))?;
            out.write_all(&hash_bytes(action_hash))?;
            for c in &self.cost {
                out.write_all(&c.to_le_bytes())?;
            }
            for w in &self.loss {
                out.write_all(&w.to_le_bytes())?;
            }
            out.flush()
        };
        write().map_err(file_err)
    }

    /// Loads a saved cache, refusing files whose header hashes differ from
    /// the expected ones.
    pub fn load(path: &Path, schema_hash: &str, action_hash: &str) -> Result<Self> {
        let bad = |message: String| Error::CacheFile {
            path: path.to_path_buf(),
            message,
        };
        let file = std::fs::File::open(path).map_err(|e| bad(e.to_string()))?;
        let mut input = BufReader::new(file);
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(|e| bad(e.to_string()))?;
        if &magic != CACHE_MAGIC {
            return Err(bad("not a cache file".into()));
        }
        let mut u64s = [0u64; 3];
        for n in &mut u64s {
            let mut buf = [0u8; 8];
            input.read_exact(&mut buf).map_err(|e| bad(e.to_string()))?;
            *n = u64::from_le_bytes(buf);
        }
        let [rows, actions, scale] = u64s.map(|n| n as usize);
        let mut schema = [0u8; 32];
        let mut action = [0u8; 32];
        input.read_exact(&mut schema).map_err(|e| bad(e.to_string()))?;
        input.read_exact(&mut action).map_err(|e| bad(e.to_string()))?;
        if schema != hash_bytes(schema_hash) {
            return Err(bad("schema hash mismatch".into()));
        }
        if action != hash_bytes(action_hash) {
            return Err(bad("action-set hash mismatch".into()));
        }
        let words = rows.div_ceil(64);
        let mut cost = vec![0u32; rows * actions];
        let mut buf4 = [0u8; 4];
        for c in &mut cost {
            input.read_exact(&mut buf4).map_err(|e| bad(e.to_string()))?;
            *c = u32::from_le_bytes(buf4);
        }
        let mut loss = vec![0u64; words * actions];
        let mut buf8 = [0u8; 8];
        for w in &mut loss {
            input.read_exact(&mut buf8).map_err(|e| bad(e.to_string()))?;
            *w = u64::from_le_bytes(buf8);
        }
        if input.read(&mut buf8).map_err(|e| bad(e.to_string()))? != 0 {
            return Err(bad("trailing bytes".into()));
        }
        Ok(CacheMatrix {
            rows,
            actions,
            scale: scale as u64,
            cost,
            loss,
            words,
        })
    }
}

const CACHE_MAGIC: &[u8; 8] = b"RCCACHE1";

fn hash_bytes(hex_hash: &str) -> [u8; 32] {
    let mut out = [0u8; 32];
    if let Ok(bytes) = hex::decode(hex_hash) {
        let n = bytes.len().min(32);
        out[..n].copy_from_slice(&bytes[..n]);
    }
    out
}

pub(crate) fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(job))
}

/// Prices every action on every affected instance. Transformed instances
/// are materialized one chunk of action columns at a time and labeled in
/// large batches; only the cost and loss cells are kept. The result does
/// not depend on the thread count.
pub fn build_cache(
    affected: &[Instance],
    actions: &ActionSet,
    predictor: &dyn Predictor,
    model: &CostModel,
    options: &CacheOptions,
) -> Result<CacheMatrix> {
    let rows = affected.len();
    let n_actions = actions.len();
    if rows == 0 || n_actions == 0 {
        return Err(Error::Config("cache needs at least one instance and one action".into()));
    }
    let bytes = cache_size_estimate(rows, n_actions);
    log::info!("cache: {rows} instances x {n_actions} actions, about {bytes} bytes");
    if bytes > options.max_bytes {
        return Err(Error::CacheTooLarge {
            rows,
            actions: n_actions,
            bytes,
            cap: options.max_bytes,
        });
    }
    if model.scale() > u32::MAX as u64 {
        return Err(Error::Config("CDF population too large for 32-bit cost ticks".into()));
    }
    let words = rows.div_ceil(64);
    let columns_per_chunk = (options.batch_rows / rows).max(1);
    let chunks: Vec<(usize, usize)> = (0..n_actions)
        .step_by(columns_per_chunk)
        .map(|start| (start, (start + columns_per_chunk).min(n_actions)))
        .collect();

    let price_chunk = |&(start, end): &(usize, usize)| -> Result<(Vec<u32>, Vec<u64>)> {
        let mut moved = Vec::with_capacity((end - start) * rows);
        let mut cost = Vec::with_capacity((end - start) * rows);
        for a in start..end {
            let action = actions.get(a);
            for x in affected {
                let y = model.apply(action, x);
                cost.push(model.cost_ticks_of(action, x, &y) as u32);
                moved.push(y);
            }
        }
        let labels = predictor.predict_batch(&moved)?;
        if labels.len() != moved.len() {
            return Err(Error::predictor(
                predictor.name(),
                format!("returned {} labels for {} instances", labels.len(), moved.len()),
            ));
        }
        let mut loss = vec![0u64; (end - start) * words];
        for (k, &label) in labels.iter().enumerate() {
            if label == 0 {
                let (col, row) = (k / rows, k % rows);
                loss[col * words + row / 64] |= 1 << (row % 64);
            }
        }
        Ok((cost, loss))
    };

    let priced: Vec<(Vec<u32>, Vec<u64>)> =
        with_threads(options.threads, || chunks.par_iter().map(price_chunk).collect::<Result<Vec<_>>>())??;

    let mut cost = vec![0u32; rows * n_actions];
    let mut loss = Vec::with_capacity(words * n_actions);
    for (&(start, end), (chunk_cost, chunk_loss)) in chunks.iter().zip(priced) {
        for a in start..end {
            let column = &chunk_cost[(a - start) * rows..(a - start + 1) * rows];
            for (i, &c) in column.iter().enumerate() {
                cost[i * n_actions + a] = c;
            }
        }
        loss.extend_from_slice(&chunk_loss);
    }
    Ok(CacheMatrix {
        rows,
        actions: n_actions,
        scale: model.scale(),
        cost,
        loss,
        words,
    })
}

/// Summed cached value of one action over a subset of rows. Sums run in
/// row order.
pub fn leaf_value(rows: &[usize], action: usize, cache: &CacheMatrix) -> CostLossPair {
    rows.iter()
        .fold(CostLossPair::ZERO, |acc, &i| acc + cache.cell(i, action))
}

/// Nondominated leaf values over all actions for a subset of rows, each
/// tagged with the smallest action index achieving it. Actions are valued
/// in parallel.
pub fn best_leaf_solutions(rows: &[usize], cache: &CacheMatrix) -> ParetoArchive<usize> {
    let values: Vec<(CostLossPair, usize)> = (0..cache.actions())
        .into_par_iter()
        .map(|a| (leaf_value(rows, a, cache), a))
        .collect();
    ParetoArchive::nondom(values)
}
