//! Reproducible ensemble runs tying the generators, DPs, and bounds
//! together, plus the statistical lemma checks that need simulation:
//! stochastic domination and the Chernoff weight bound.
//!
//! Determinism contract: every record is a pure function of the config
//! (including `base_seed`); per-replicate seeds are derived by hashing
//! `(base_seed, t, replicate)`, so neither the worker count nor the
//! schedule can influence values.

use crate::apollonian::grow_ran;
use crate::dary_tree::{branch_stats, grow_tree};
use crate::paths::{
    buono_upper_bound, longest_path_exact_with_cap, longest_path_heuristic, DEFAULT_EXACT_CAP_T,
};
use crate::rng::{derive_seed, Stream};
use crate::stats::{dkw_two_sample_allowance, ols_with_ci};
use crate::stochastics::sample_beta_power;
use crate::subtree_dp::{largest_r_ary_subtree, max_mass_r_ary, WeightedTreeSample};
use crate::{Error, Result};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which structure an ensemble grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Dary { d: u32, r: u32 },
    Ran,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Dary { .. } => "dary",
            Model::Ran => "ran",
        }
    }

    pub fn params_string(&self) -> String {
        match self {
            Model::Dary { d, r } => format!("d={d};r={r}"),
            Model::Ran => String::new(),
        }
    }
}

/// Statistics an ensemble can record. `St` and `MassMax` apply to the
/// d-ary model (for `MassMax`, `t` is read as the sample depth `n`);
/// the path statistics apply to RANs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    St,
    BuonoBound,
    HeuristicPath,
    ExactPath,
    MassMax,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::St => "s_t",
            Statistic::BuonoBound => "buono_bound",
            Statistic::HeuristicPath => "heuristic_path",
            Statistic::ExactPath => "exact_path",
            Statistic::MassMax => "mass_max",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "s_t" => Ok(Statistic::St),
            "buono_bound" => Ok(Statistic::BuonoBound),
            "heuristic_path" => Ok(Statistic::HeuristicPath),
            "exact_path" => Ok(Statistic::ExactPath),
            "mass_max" => Ok(Statistic::MassMax),
            other => Err(Error::param(format!("unknown statistic '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub t_grid: Vec<u64>,
    pub replicates: u32,
    pub base_seed: u64,
    pub statistics: Vec<Statistic>,
    /// 0 lets the runtime pick.
    pub workers: usize,
    pub exact_cap: u64,
}

impl ExperimentConfig {
    pub fn new(model: Model, t_grid: Vec<u64>, replicates: u32, base_seed: u64) -> Self {
        ExperimentConfig {
            model,
            t_grid,
            replicates,
            base_seed,
            statistics: Vec::new(),
            workers: 0,
            exact_cap: DEFAULT_EXACT_CAP_T,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::param("t_grid must be nonempty"));
        }
        if !self.t_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::param("t_grid must be strictly increasing"));
        }
        if self.replicates < 1 {
            return Err(Error::param("replicates must be at least 1"));
        }
        if self.statistics.is_empty() {
            return Err(Error::param("statistics must be nonempty"));
        }
        if let Model::Dary { d, r } = self.model {
            if d < 2 || r < 1 || r >= d {
                return Err(Error::param(format!("need 1 <= r < d, got d={d} r={r}")));
            }
        }
        Ok(())
    }
}

/// One measurement. Infeasible statistics carry `error` instead of
/// `value`; the run continues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub model: String,
    pub params: String,
    pub t: u64,
    pub replicate: u32,
    pub seed: u64,
    pub statistic: String,
    pub value: Option<f64>,
    pub error: Option<String>,
}

fn compute_statistics(
    model: Model,
    t: u64,
    seed: u64,
    statistics: &[Statistic],
    exact_cap: u64,
) -> Vec<(Statistic, std::result::Result<f64, String>)> {
    // Substreams per concern: a record does not depend on which other
    // statistics were requested.
    let root = Stream::new(seed);
    let mut out = Vec::with_capacity(statistics.len());
    match model {
        Model::Dary { d, r } => {
            let tree = statistics
                .iter()
                .any(|s| matches!(s, Statistic::St))
                .then(|| grow_tree(d, t, &mut root.substream(0)));
            for &stat in statistics {
                let value = match stat {
                    Statistic::St => match tree.as_ref().expect("grown above") {
                        Ok(tree) => largest_r_ary_subtree(tree, r)
                            .map(|w| w.size as f64)
                            .map_err(|e| e.to_string()),
                        Err(e) => Err(e.to_string()),
                    },
                    Statistic::MassMax => u32::try_from(t)
                        .map_err(|_| "depth exceeds u32".to_string())
                        .and_then(|depth| {
                            WeightedTreeSample::sample(d, r, depth, &mut root.substream(1))
                                .and_then(|s| max_mass_r_ary(&s, r, depth))
                                .map_err(|e| e.to_string())
                        }),
                    other => Err(format!(
                        "statistic {} is not defined for the dary model",
                        other.name()
                    )),
                };
                out.push((stat, value));
            }
        }
        Model::Ran => {
            let grown = grow_ran(t, &mut root.substream(0));
            for &stat in statistics {
                let value = match (&grown, stat) {
                    (Err(e), _) => Err(e.to_string()),
                    (Ok((_, delta)), Statistic::BuonoBound) => {
                        Ok(buono_upper_bound(delta) as f64)
                    }
                    (Ok((ran, delta)), Statistic::HeuristicPath) => {
                        Ok(longest_path_heuristic(ran, delta).length as f64)
                    }
                    (Ok((ran, delta)), Statistic::ExactPath) => {
                        longest_path_exact_with_cap(ran, delta, exact_cap)
                            .map(|p| p.length as f64)
                            .map_err(|e| e.to_string())
                    }
                    (Ok(_), other) => Err(format!(
                        "statistic {} is not defined for the ran model",
                        other.name()
                    )),
                };
                out.push((stat, value));
            }
        }
    }
    out
}

/// Runs the ensemble: for each `(t, replicate)` the structure is grown
/// with `seed = derive_seed(base_seed, t, replicate)` and every requested
/// statistic is computed on it. Records come back sorted by
/// `(t, replicate, statistic order)`.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param(format!("worker pool: {e}")))?;
    let mut records = Vec::new();
    for &t in &config.t_grid {
        let mut batch: Vec<Vec<ExperimentRecord>> = pool.install(|| {
            use rayon::prelude::*;
            (0..config.replicates)
                .into_par_iter()
                .map(|replicate| {
                    let seed = derive_seed(&[config.base_seed, t, u64::from(replicate)]);
                    compute_statistics(config.model, t, seed, &config.statistics, config.exact_cap)
                        .into_iter()
                        .map(|(stat, value)| ExperimentRecord {
                            model: config.model.name().to_string(),
                            params: config.model.params_string(),
                            t,
                            replicate,
                            seed,
                            statistic: stat.name().to_string(),
                            value: value.as_ref().ok().copied(),
                            error: value.err(),
                        })
                        .collect()
                })
                .collect()
        });
        for group in batch.drain(..) {
            records.extend(group);
        }
    }
    Ok(records)
}

const CSV_HEADER: &str = "model,params,t,replicate,seed,statistic,value";

/// CSV with the stable header `model,params,t,replicate,seed,statistic,value`.
/// Error entries render as `error:<message>` in the value column.
pub fn write_csv<W: Write>(records: &[ExperimentRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let value = match (&r.value, &r.error) {
            (Some(v), _) => format!("{v}"),
            (None, Some(e)) => format!("error:{}", e.replace(',', ";")),
            (None, None) => "error:unknown".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.model, r.params, r.t, r.replicate, r.seed, r.statistic, value
        )?;
    }
    Ok(())
}

/// JSON-lines: one record object per line.
pub fn write_jsonl<W: Write>(records: &[ExperimentRecord], mut w: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parses the CSV format written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad header {other:?}, expected {CSV_HEADER}"
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(7, ',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!("line {}: expected 7 fields", i + 2)));
        }
        let parse_err = |what: &str| Error::Parse(format!("line {}: bad {what}", i + 2));
        let (value, error) = if let Some(msg) = fields[6].strip_prefix("error:") {
            (None, Some(msg.to_string()))
        } else {
            (
                Some(fields[6].parse::<f64>().map_err(|_| parse_err("value"))?),
                None,
            )
        };
        records.push(ExperimentRecord {
            model: fields[0].to_string(),
            params: fields[1].to_string(),
            t: fields[2].parse().map_err(|_| parse_err("t"))?,
            replicate: fields[3].parse().map_err(|_| parse_err("replicate"))?,
            seed: fields[4].parse().map_err(|_| parse_err("seed"))?,
            statistic: fields[5].to_string(),
            value,
            error,
        });
    }
    Ok(records)
}

/// How points enter the log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Regress log(mean value at t) on log t (default).
    MeanThenLog,
    /// Regress log(value) on log t for every record individually.
    LogEach,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
}

/// OLS fit of the growth exponent for one statistic.
pub fn fit_exponent(
    records: &[ExperimentRecord],
    statistic: &str,
    aggregation: Aggregation,
) -> Result<ExponentFit> {
    let valued: Vec<(u64, f64)> = records
        .iter()
        .filter(|r| r.statistic == statistic)
        .filter_map(|r| r.value.map(|v| (r.t, v)))
        .collect();
    let mut ts: Vec<u64> = valued.iter().map(|p| p.0).collect();
    ts.sort_unstable();
    ts.dedup();
    if ts.len() < 3 {
        return Err(Error::param(format!(
            "need at least 3 distinct t values with data, got {}",
            ts.len()
        )));
    }
    let points: Vec<(f64, f64)> = match aggregation {
        Aggregation::MeanThenLog => ts
            .iter()
            .map(|&t| {
                let vals: Vec<f64> = valued
                    .iter()
                    .filter(|p| p.0 == t)
                    .map(|p| p.1)
                    .collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                if !(mean > 0.0) || t == 0 {
                    return Err(Error::param(
                        "mean-then-log needs positive t and positive means",
                    ));
                }
                Ok(((t as f64).ln(), mean.ln()))
            })
            .collect::<Result<_>>()?,
        Aggregation::LogEach => valued
            .iter()
            .map(|&(t, v)| {
                if !(v > 0.0) || t == 0 {
                    return Err(Error::param("log-each needs positive t and values"));
                }
                Ok(((t as f64).ln(), v.ln()))
            })
            .collect::<Result<_>>()?,
    };
    let (slope, intercept, lo, hi) = ols_with_ci(&points)?;
    Ok(ExponentFit {
        slope,
        intercept,
        ci95: (lo, hi),
    })
}

/// Outcome of the stochastic-domination check.
#[derive(Debug, Clone, Serialize)]
pub struct DominationOutcome {
    pub pass: bool,
    /// Worst one-sided CDF deficit `F_mixture(s) − F_weight(s)` over the
    /// support (positive values count against domination).
    pub max_cdf_violation: f64,
    pub allowance: f64,
}

/// Checks that the branch weight `W(ν, t)` of the first-created depth-k
/// vertex is stochastically dominated by `Binomial(t, Π B)` with k
/// independent Beta(1/(d−1), 1) factors. One-sided empirical-CDF
/// comparison at the 1% level; absent vertices contribute `W = 0`.
pub fn domination_check(
    d: u32,
    k: u32,
    t: u64,
    replicates: u32,
    base_seed: u64,
) -> Result<DominationOutcome> {
    if replicates < 1_000 {
        return Err(Error::param("need at least 1000 replicates"));
    }
    let mut weights = Vec::with_capacity(replicates as usize);
    let mut mixture = Vec::with_capacity(replicates as usize);
    for i in 0..replicates {
        let mut rng = Stream::new(derive_seed(&[base_seed, 1, u64::from(i)]));
        let tree = grow_tree(d, t, &mut rng)?;
        // leftmost vertex at depth k (first child chain)
        let mut v = 0u32;
        let mut present = true;
        for _ in 0..k {
            if tree.is_leaf(v) {
                present = false;
                break;
            }
            v = tree.children(v).start;
        }
        let w = if present {
            branch_stats(&tree, v)?.weight
        } else {
            0
        };
        weights.push(w);

        let mut mix_rng = Stream::new(derive_seed(&[base_seed, 2, u64::from(i)]));
        let mut p = 1.0f64;
        for _ in 0..k {
            p *= sample_beta_power(d, &mut mix_rng)?;
        }
        let bin = Binomial::new(t, p).map_err(|e| Error::param(format!("binomial: {e}")))?;
        mixture.push(bin.sample(&mut mix_rng));
    }
    // CDFs over the integer support; domination means F_W >= F_mix.
    let n = replicates as f64;
    let mut counts_w = vec![0u64; t as usize + 1];
    let mut counts_m = vec![0u64; t as usize + 1];
    for &w in &weights {
        counts_w[w as usize] += 1;
    }
    for &m in &mixture {
        counts_m[m as usize] += 1;
    }
    let mut worst = f64::NEG_INFINITY;
    let (mut acc_w, mut acc_m) = (0u64, 0u64);
    for s in 0..=t as usize {
        acc_w += counts_w[s];
        acc_m += counts_m[s];
        worst = worst.max(acc_m as f64 / n - acc_w as f64 / n);
    }
    let allowance = dkw_two_sample_allowance(replicates as usize, replicates as usize, 0.01);
    Ok(DominationOutcome {
        pass: worst <= allowance,
        max_cdf_violation: worst,
        allowance,
    })
}

/// Outcome of the Chernoff weight check made of one row per grid value of
/// `q`, each comparing the empirical conditional frequency of
/// `W ≥ 2tM` given `M ≥ q` against `exp(−t·q)`.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffOutcome {
    pub pass: bool,
    /// Max over the grid of `freq / (bound + allowance)`.
    pub worst_ratio: f64,
    /// Grid values whose conditioning event was empty.
    pub skipped: Vec<f64>,
}

pub const CHERNOFF_Q_GRID: [f64; 6] = [0.001, 0.005, 0.01, 0.05, 0.1, 0.3];

/// Samples the coupling `(M = Π_{i≤n} B_i, W ~ Binomial(t, M))` and checks
/// `P(W ≥ 2tM | M ≥ q) ≤ exp(−tq)` on the q grid, one-sided with a 3σ
/// allowance from the empirical frequency.
pub fn chernoff_weight_check(
    d: u32,
    n: u32,
    t: u64,
    replicates: u32,
    base_seed: u64,
) -> Result<ChernoffOutcome> {
    if replicates < 1_000 {
        return Err(Error::param("need at least 1000 replicates"));
    }
    let mut pairs = Vec::with_capacity(replicates as usize);
    let mut rng = Stream::new(base_seed);
    for _ in 0..replicates {
        let mut m = 1.0f64;
        for _ in 0..n {
            m *= sample_beta_power(d, &mut rng)?;
        }
        let bin = Binomial::new(t, m).map_err(|e| Error::param(format!("binomial: {e}")))?;
        let w = bin.sample(&mut rng);
        pairs.push((m, w));
    }
    let mut worst_ratio = 0.0f64;
    let mut skipped = Vec::new();
    let mut pass = true;
    for &q in &CHERNOFF_Q_GRID {
        let cond: Vec<&(f64, u64)> = pairs.iter().filter(|p| p.0 >= q).collect();
        if cond.is_empty() {
            skipped.push(q);
            continue;
        }
        let m = cond.len() as f64;
        let hits = cond
            .iter()
            .filter(|p| p.1 as f64 >= 2.0 * t as f64 * p.0)
            .count() as f64;
        let freq = hits / m;
        let bound = (-(t as f64) * q).exp();
        let allowance = 3.0 * (freq * (1.0 - freq) / m).sqrt() + 1.0 / m;
        let ratio = freq / (bound + allowance);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 {
            pass = false;
        }
    }
    Ok(ChernoffOutcome {
        pass,
        worst_ratio,
        skipped,
    })
}
