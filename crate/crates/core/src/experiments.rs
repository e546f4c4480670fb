//! Parameter sweeps, CSV rows and the space-time trade-off table.
//!
//! A sweep is read from a TOML file whose `experiment` key selects one of
//! four kinds:
//!
//! ```toml
//! experiment = "random_circuit"
//! trials = 20
//! base_seed = 1
//! output = "rc.csv"
//!
//! width = 16
//! height = 16
//! layers = 20
//! coupling_distance = [1, 2, 4]
//! p_fail = [0.001, 0.01, 0.05]
//! ```
//!
//! Cells are the Cartesian product of the list-valued keys, emitted in
//! grid order. A cell's seed is `mix_path(base_seed, indices)` over the
//! indices of the keys that shape the workload (coupling distance for
//! random circuits, factory count for Dist-SELECT). The other keys reuse
//! the same seed, so their curves are paired.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{parallel_expected_time, sequential_expected_time, RusParams};
use crate::distillation::{simulate_pipeline, Mitigation, PipelineConfig};
use crate::distselect::{run_dist_select, DistSelectParams};
use crate::error::invalid;
use crate::randcircuit::{random_circuit_metrics, RandomCircuitParams};
use crate::{config, seed, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SweepSpec {
    RandomCircuit(RandomCircuitSweep),
    DistSelect(DistSelectSweep),
    AnalyticTable(AnalyticSweep),
    DistillHist(DistillSweep),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCircuitSweep {
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "one")]
    pub d: u64,
    pub width: u32,
    pub height: u32,
    pub layers: u32,
    pub coupling_distance: Vec<u32>,
    pub p_fail: Vec<f64>,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSelectSweep {
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub d: u64,
    #[serde(default)]
    pub d_pool: Option<u64>,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "P")]
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "D")]
    pub distillation_period: u64,
    pub p_phys: f64,
    pub num_factories: Vec<u32>,
    pub pool_entries: Vec<u32>,
    /// Extra L1 blocks per pipeline for each excessive-L1 family, which
    /// runs without a pool.
    #[serde(default)]
    pub excessive_l1: Vec<u32>,
    /// Candidate cadences; defaults to `D + {0, d/3, 2d/3, d, 2d}`. Each
    /// row reports the candidate with the lowest mean total.
    #[serde(default)]
    pub consumption_period: Option<Vec<u64>>,
    #[serde(default)]
    pub clifford_cycles: Option<u64>,
    #[serde(default)]
    pub measurement_cycles: Option<u64>,
    /// Pipeline whose simulated output delays drive the factories.
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_outputs")]
    pub pipeline_outputs: u64,
    /// Physical qubits of one L1 block, for the excessive-L1 space cost.
    #[serde(default = "default_l1_block_qubits")]
    pub l1_block_qubits: u64,
}

fn default_outputs() -> u64 {
    10_000
}

pub const DEFAULT_L1_BLOCK_QUBITS: u64 = 3_405;

fn default_l1_block_qubits() -> u64 {
    DEFAULT_L1_BLOCK_QUBITS
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSweep {
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub n: Vec<u32>,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistillSweep {
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_outputs")]
    pub outputs: u64,
}

const EXPERIMENTS: [&str; 4] = ["random_circuit", "dist_select", "analytic_table", "distill_hist"];

impl SweepSpec {
    /// Parses a sweep file. The `experiment` key is read first and blanked
    /// out, and the rest is deserialized straight into the selected kind so
    /// that errors keep their line and column.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let table = toml::de::DeTable::parse(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            config::error_at(path, text, offset, e.message().trim_end())
        })?;
        let Some((key, value)) = table.get_ref().iter().find(|(k, _)| k.get_ref() == "experiment") else {
            return Err(config::error_at(path, text, 0, "missing key `experiment`"));
        };
        let kind = value.get_ref().as_str().unwrap_or_default().to_string();
        let mut body = text.as_bytes().to_vec();
        for b in &mut body[key.span().start..value.span().end] {
            if *b != b'\n' {
                *b = b' ';
            }
        }
        let body = String::from_utf8(body).expect("blanked whole characters");
        match kind.as_str() {
            "random_circuit" => config::parse(&body, path).map(SweepSpec::RandomCircuit),
            "dist_select" => config::parse(&body, path).map(SweepSpec::DistSelect),
            "analytic_table" => config::parse(&body, path).map(SweepSpec::AnalyticTable),
            "distill_hist" => config::parse(&body, path).map(SweepSpec::DistillHist),
            _ => Err(config::error_at(
                path,
                text,
                value.span().start,
                &format!("key `experiment` must be one of {}", EXPERIMENTS.join(", ")),
            )),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (path, text) = config::read(path)?;
        Self::parse(&text, &path)
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            SweepSpec::RandomCircuit(s) => s.output.as_deref(),
            SweepSpec::DistSelect(s) => s.output.as_deref(),
            SweepSpec::AnalyticTable(s) => s.output.as_deref(),
            SweepSpec::DistillHist(s) => s.output.as_deref(),
        }
    }

    pub fn set_output(&mut self, path: PathBuf) {
        let slot = match self {
            SweepSpec::RandomCircuit(s) => &mut s.output,
            SweepSpec::DistSelect(s) => &mut s.output,
            SweepSpec::AnalyticTable(s) => &mut s.output,
            SweepSpec::DistillHist(s) => &mut s.output,
        };
        *slot = Some(path);
    }

    /// Overrides the base seed; the analytic table has none.
    pub fn set_seed(&mut self, base_seed: u64) {
        match self {
            SweepSpec::RandomCircuit(s) => s.base_seed = base_seed,
            SweepSpec::DistSelect(s) => s.base_seed = base_seed,
            SweepSpec::DistillHist(s) => s.base_seed = base_seed,
            SweepSpec::AnalyticTable(_) => {}
        }
    }

    /// Overrides the trial count where the experiment has one.
    pub fn set_trials(&mut self, trials: u64) {
        match self {
            SweepSpec::RandomCircuit(s) => s.trials = trials,
            SweepSpec::DistSelect(s) => s.trials = trials,
            SweepSpec::AnalyticTable(_) | SweepSpec::DistillHist(_) => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(invalid(format!("grid `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        let trials = |t: u64| {
            if t == 0 {
                Err(invalid("trials must be at least 1"))
            } else {
                Ok(())
            }
        };
        match self {
            SweepSpec::RandomCircuit(s) => {
                trials(s.trials)?;
                nonempty("coupling_distance", s.coupling_distance.len())?;
                nonempty("p_fail", s.p_fail.len())
            }
            SweepSpec::DistSelect(s) => {
                trials(s.trials)?;
                nonempty("num_factories", s.num_factories.len())?;
                if s.pool_entries.is_empty() && s.excessive_l1.is_empty() {
                    return Err(invalid("grid `pool_entries` is empty"));
                }
                if let Some(cps) = &s.consumption_period {
                    nonempty("consumption_period", cps.len())?;
                }
                s.pipeline.validate()
            }
            SweepSpec::AnalyticTable(s) => {
                nonempty("n", s.n.len())?;
                nonempty("p", s.p.len())
            }
            SweepSpec::DistillHist(s) => {
                if s.outputs == 0 {
                    return Err(invalid("outputs must be at least 1"));
                }
                s.pipeline.validate()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomCircuitRow {
    #[serde(rename = "D_couple")]
    pub coupling_distance: u32,
    pub p_fail: f64,
    pub trials: u64,
    pub seed: u64,
    pub scheduled: u64,
    pub mean_total: f64,
    pub rel_delay: f64,
    pub effective_cost: f64,
    pub rel_cost_increase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistSelectRow {
    pub num_factories: u32,
    pub pool_entries: u32,
    pub d_pool: u64,
    pub consumption_period: u64,
    #[serde(rename = "S")]
    pub scheduled: u64,
    #[serde(rename = "mean_R")]
    pub mean_delay: f64,
    pub total: f64,
    pub rel_delay: f64,
    pub rel_cost_increase: f64,
    pub spatial_qubits: u64,
    pub family: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub n: u32,
    pub p: f64,
    pub sequential: f64,
    pub parallel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillRow {
    pub extra_cycles: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepRows {
    RandomCircuit(Vec<RandomCircuitRow>),
    DistSelect(Vec<DistSelectRow>),
    AnalyticTable(Vec<AnalyticRow>),
    DistillHist(Vec<DistillRow>),
}

impl SweepRows {
    pub fn len(&self) -> usize {
        match self {
            SweepRows::RandomCircuit(r) => r.len(),
            SweepRows::DistSelect(r) => r.len(),
            SweepRows::AnalyticTable(r) => r.len(),
            SweepRows::DistillHist(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self) -> String {
        match self {
            SweepRows::RandomCircuit(r) => csv_string(r),
            SweepRows::DistSelect(r) => csv_string(r),
            SweepRows::AnalyticTable(r) => csv_string(r),
            SweepRows::DistillHist(r) => csv_string(r),
        }
    }
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialize to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepRows> {
    spec.validate()?;
    Ok(match spec {
        SweepSpec::RandomCircuit(s) => SweepRows::RandomCircuit(random_circuit_sweep(s)?),
        SweepSpec::DistSelect(s) => SweepRows::DistSelect(dist_select_sweep(s)?),
        SweepSpec::AnalyticTable(s) => SweepRows::AnalyticTable(analytic_table(&s.n, &s.p)?),
        SweepSpec::DistillHist(s) => SweepRows::DistillHist(distill_hist(&s.pipeline, s.outputs, s.base_seed)?),
    })
}

pub fn random_circuit_row(params: &RandomCircuitParams, trials: u64) -> Result<RandomCircuitRow> {
    let m = random_circuit_metrics(params, trials)?;
    Ok(RandomCircuitRow {
        coupling_distance: m.coupling_distance,
        p_fail: m.p_fail,
        trials: m.trials,
        seed: m.seed,
        scheduled: m.scheduled,
        mean_total: m.mean_total,
        rel_delay: m.rel_delay,
        effective_cost: m.effective_cost,
        rel_cost_increase: m.rel_cost_increase,
    })
}

fn random_circuit_sweep(s: &RandomCircuitSweep) -> Result<Vec<RandomCircuitRow>> {
    let cells: Vec<RandomCircuitParams> = s
        .coupling_distance
        .iter()
        .enumerate()
        .flat_map(|(i, &dc)| {
            s.p_fail.iter().map(move |&p_fail| RandomCircuitParams {
                d: s.d,
                width: s.width,
                height: s.height,
                layers: s.layers,
                coupling_distance: dc,
                p_fail,
                seed: seed::mix_path(s.base_seed, &[i as u64]),
            })
        })
        .collect();
    cells.par_iter().map(|p| random_circuit_row(p, s.trials)).collect()
}

pub fn analytic_table(ns: &[u32], ps: &[f64]) -> Result<Vec<AnalyticRow>> {
    let mut rows = Vec::with_capacity(ns.len() * ps.len());
    for &n in ns {
        for &p in ps {
            let params = RusParams::new(n, p)?;
            rows.push(AnalyticRow {
                n,
                p,
                sequential: sequential_expected_time(params)?,
                parallel: parallel_expected_time(params)?,
            });
        }
    }
    Ok(rows)
}

pub fn distill_hist(pipeline: &PipelineConfig, outputs: u64, base_seed: u64) -> Result<Vec<DistillRow>> {
    let dist = simulate_pipeline(pipeline, outputs, seed::mix(base_seed, seed::DISTRIBUTION_STREAM))?;
    Ok(dist
        .histogram
        .iter()
        .map(|(&extra_cycles, &probability)| DistillRow {
            extra_cycles,
            probability,
        })
        .collect())
}

/// The default cadence candidates `D + {0, d/3, 2d/3, d, 2d}`.
pub fn consumption_period_candidates(distillation_period: u64, d: u64) -> Vec<u64> {
    let mut cps: Vec<u64> = [0, d / 3, 2 * d / 3, d, 2 * d]
        .iter()
        .map(|x| distillation_period + x)
        .collect();
    cps.dedup();
    cps
}

pub fn family_name(pool_entries: u32, excessive_l1: Option<u32>) -> String {
    match (excessive_l1, pool_entries) {
        (Some(n), _) => format!("excessive_l1_{n}"),
        (None, 0) => "no_pool".into(),
        (None, 1) => "single_pool".into(),
        (None, 2) => "double_pool".into(),
        (None, k) => format!("pool_{k}"),
    }
}

/// One Dist-SELECT configuration family: pooled or excessive-L1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Family {
    pub pool_entries: u32,
    pub excessive_l1: Option<u32>,
}

/// Settings shared by every cell of a Dist-SELECT sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSettings {
    pub candidates: Vec<u64>,
    pub pipeline: PipelineConfig,
    pub pipeline_outputs: u64,
    pub dist_seed: u64,
    pub l1_block_qubits: u64,
    pub trials: u64,
}

/// Runs every cadence candidate for one cell and keeps the one with the
/// lowest mean total; ties keep the shorter cadence.
pub fn best_dist_select_row(
    base: &DistSelectParams,
    family: Family,
    settings: &CellSettings,
    seed: u64,
) -> Result<DistSelectRow> {
    let pipeline = match family.excessive_l1 {
        Some(n) => PipelineConfig {
            mitigation: Mitigation::ExcessiveL1(n),
            ..settings.pipeline.clone()
        },
        None => settings.pipeline.clone(),
    };
    let dist = simulate_pipeline(&pipeline, settings.pipeline_outputs, settings.dist_seed)?;
    let extra_qubits =
        u64::from(base.num_factories) * 2 * u64::from(family.excessive_l1.unwrap_or(0)) * settings.l1_block_qubits;
    let mut best: Option<DistSelectRow> = None;
    for &cp in &settings.candidates {
        let params = DistSelectParams {
            pool_entries: family.pool_entries,
            consumption_period: cp,
            ..base.clone()
        };
        let run = run_dist_select(&params, &dist, settings.trials, seed)?;
        let row = DistSelectRow {
            num_factories: params.num_factories,
            pool_entries: params.pool_entries,
            d_pool: run.d_pool,
            consumption_period: cp,
            scheduled: run.scheduled,
            mean_delay: run.mean_delay,
            total: run.mean_total,
            rel_delay: run.rel_delay,
            rel_cost_increase: run.rel_cost_increase,
            spatial_qubits: run.spatial_qubits + extra_qubits,
            family: family_name(family.pool_entries, family.excessive_l1),
        };
        if best.as_ref().is_none_or(|b| row.total < b.total) {
            best = Some(row);
        }
    }
    best.ok_or_else(|| invalid("no consumption period candidates"))
}

fn dist_select_sweep(s: &DistSelectSweep) -> Result<Vec<DistSelectRow>> {
    let settings = CellSettings {
        candidates: s
            .consumption_period
            .clone()
            .unwrap_or_else(|| consumption_period_candidates(s.distillation_period, s.d)),
        pipeline: s.pipeline.clone(),
        pipeline_outputs: s.pipeline_outputs,
        dist_seed: seed::mix(s.base_seed, seed::DISTRIBUTION_STREAM),
        l1_block_qubits: s.l1_block_qubits,
        trials: s.trials,
    };
    let families: Vec<Family> = s
        .pool_entries
        .iter()
        .map(|&pool_entries| Family {
            pool_entries,
            excessive_l1: None,
        })
        .chain(s.excessive_l1.iter().map(|&n| Family {
            pool_entries: 0,
            excessive_l1: Some(n),
        }))
        .collect();
    let cells: Vec<(DistSelectParams, Family, u64)> = s
        .num_factories
        .iter()
        .enumerate()
        .flat_map(|(i, &num_factories)| {
            let base = DistSelectParams {
                d: s.d,
                d_pool: s.d_pool,
                num_factories,
                m: s.m,
                p: s.p,
                n: s.n,
                l: s.l,
                distillation_period: s.distillation_period,
                p_phys: s.p_phys,
                pool_entries: 0,
                consumption_period: s.distillation_period,
                clifford_cycles: s.clifford_cycles,
                measurement_cycles: s.measurement_cycles,
            };
            let cell_seed = seed::mix_path(s.base_seed, &[i as u64]);
            families.iter().map(move |&f| (base.clone(), f, cell_seed))
        })
        .collect();
    cells
        .par_iter()
        .map(|(base, family, cell_seed)| best_dist_select_row(base, *family, &settings, *cell_seed))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub family: String,
    pub num_factories: u32,
    pub spatial_qubits: u64,
    pub total: f64,
    /// Not dominated by another row of the same family.
    pub pareto_in_family: bool,
    /// Not dominated by any row.
    pub pareto: bool,
}

fn dominates(a: (u64, f64), b: (u64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Space-time frontier: rows grouped by family (in order of first
/// appearance), each group sorted by spatial cost then total.
pub fn tradeoff_table(rows: &[DistSelectRow]) -> Vec<TradeoffRow> {
    let points: Vec<(u64, f64)> = rows.iter().map(|r| (r.spatial_qubits, r.total)).collect();
    let mut families: Vec<&str> = Vec::new();
    for r in rows {
        if !families.contains(&r.family.as_str()) {
            families.push(&r.family);
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    for family in families {
        let mut group: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].family == family).collect();
        group.sort_by(|&a, &b| points[a].0.cmp(&points[b].0).then(points[a].1.total_cmp(&points[b].1)));
        for &i in &group {
            out.push(TradeoffRow {
                family: family.to_string(),
                num_factories: rows[i].num_factories,
                spatial_qubits: points[i].0,
                total: points[i].1,
                pareto_in_family: !group.iter().any(|&j| dominates(points[j], points[i])),
                pareto: !points.iter().any(|&q| dominates(q, points[i])),
            });
        }
    }
    out
}

/// Groups rows by family, keeping grid order within each.
pub fn rows_by_family(rows: &[DistSelectRow]) -> BTreeMap<String, Vec<DistSelectRow>> {
    let mut map: BTreeMap<String, Vec<DistSelectRow>> = BTreeMap::new();
    for r in rows {
        map.entry(r.family.clone()).or_default().push(r.clone());
    }
    map
}
