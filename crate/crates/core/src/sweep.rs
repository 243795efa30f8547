//! Filter-parameter sweeps: grid enumeration, batch evaluation over scan
//! pairs, and selection of the θ-minimizing parameters per filter.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterKind, FilterSpec};
use crate::format::{self, g9};
use crate::metrics::{residual_stats, theta, NoiseEstimate, ResidualStats, ScanPair, DEFAULT_BETAS};

/// Environment variable bounding sweep parallelism.
pub const THREADS_ENV: &str = "CTNOISE_THREADS";

/// One candidate value on a parameter axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Number(v) => f.write_str(&format::param(*v)),
            AxisValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for AxisValue {
    fn from(v: f64) -> Self {
        AxisValue::Number(v)
    }
}

impl From<&str> for AxisValue {
    fn from(s: &str) -> Self {
        AxisValue::Text(s.to_string())
    }
}

/// Parameter axes of one filter kind, keyed by parameter name.
pub type Axes = BTreeMap<String, Vec<AxisValue>>;

/// Candidate values per filter and parameter, plus the β values to score.
///
/// Parameters without an axis keep their defaults. Each filter's specs are
/// the Cartesian product of its axes, taken in the filter's own parameter
/// order with values in the order given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterGrid {
    pub filters: BTreeMap<FilterKind, Axes>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
}

fn default_betas() -> Vec<f64> {
    DEFAULT_BETAS.to_vec()
}

fn axis(values: &[f64]) -> Vec<AxisValue> {
    values.iter().map(|&v| AxisValue::Number(v)).collect()
}

fn axes<const N: usize>(items: [(&str, Vec<AxisValue>); N]) -> Axes {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl Default for FilterGrid {
    /// 277 specs: 9 MF, 192 BF, 64 AD, 5 CDWT, 5 FDE, 1 PWNLM and the
    /// unfiltered baseline.
    fn default() -> Self {
        let mut filters = BTreeMap::new();
        filters.insert(
            FilterKind::Mf,
            axes([("half_width", axis(&[1.0, 2.0, 3.0])), ("sigma_t", axis(&[0.5, 1.0, 2.0]))]),
        );
        filters.insert(
            FilterKind::Bf,
            axes([
                ("half_width", axis(&[1.0, 2.0, 3.0, 4.0])),
                ("sigma_sx", axis(&[0.3, 1.0, 2.0, 3.0])),
                ("sigma_sy", axis(&[0.3, 1.0, 2.0, 3.0])),
                ("sigma_r", axis(&[25.0, 50.0, 100.0])),
            ]),
        );
        filters.insert(
            FilterKind::Ad,
            axes([
                ("iterations", axis(&[5.0, 10.0, 20.0, 40.0])),
                ("delta", axis(&[0.05, 0.1, 0.2, 0.25])),
                ("kappa", axis(&[10.0, 30.0, 54.0, 80.0])),
                ("conduction", vec!["exp".into()]),
            ]),
        );
        filters.insert(FilterKind::Cdwt, axes([("threshold", axis(&[50.0, 100.0, 150.0, 200.0, 300.0]))]));
        filters.insert(
            FilterKind::Fde,
            axes([("noise_variance", axis(&[1e-10, 1e-9, 1e-8, 1e-7, 1e-6]))]),
        );
        filters.insert(FilterKind::Pwnlm, Axes::new());
        filters.insert(FilterKind::None, Axes::new());
        Self {
            filters,
            betas: default_betas(),
        }
    }
}

/// Parameter names of each kind in product order.
fn parameter_order(kind: FilterKind) -> &'static [&'static str] {
    match kind {
        FilterKind::Mf => &["half_width", "sigma_t"],
        FilterKind::Bf => &["half_width", "sigma_s", "sigma_sx", "sigma_sy", "sigma_r"],
        FilterKind::Ad => &["iterations", "delta", "kappa", "conduction"],
        FilterKind::Cdwt => &["threshold", "levels", "mode"],
        FilterKind::Fde => &["noise_variance"],
        FilterKind::Pwnlm | FilterKind::None => &[],
    }
}

impl FilterGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let grid: FilterGrid = serde_json::from_str(text)?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::EmptyAxis("betas".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::InvalidParams(format!("beta must be finite and >= 0, got {b}")));
        }
        enumerate_grid(self).map(|_| ())
    }

    /// Adds the unfiltered baseline if it is not already part of the grid.
    pub fn with_baseline(mut self) -> Self {
        self.filters.entry(FilterKind::None).or_default();
        self
    }
}

/// All specs of the grid, grouped by filter kind in canonical kind order,
/// each group a lexicographic product over its axes.
pub fn enumerate_grid(grid: &FilterGrid) -> Result<Vec<FilterSpec>> {
    let mut specs = Vec::new();
    for (&kind, axes) in &grid.filters {
        let order = parameter_order(kind);
        if let Some(unknown) = axes.keys().find(|k| !order.contains(&k.as_str())) {
            return Err(Error::InvalidParams(format!("{kind}: unknown parameter `{unknown}`")));
        }
        let used: Vec<(&str, &[AxisValue])> = order
            .iter()
            .filter_map(|&name| axes.get(name).map(|v| (name, v.as_slice())))
            .collect();
        if let Some((name, _)) = used.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::EmptyAxis(format!("{kind}.{name}")));
        }
        let mut index = vec![0usize; used.len()];
        loop {
            let params = used
                .iter()
                .zip(&index)
                .map(|((name, values), &i)| format!("{name}={}", values[i]))
                .collect::<Vec<_>>()
                .join(",");
            specs.push(FilterSpec::from_parts(kind, &params)?);
            // odometer increment, last axis fastest
            let mut carry = true;
            for (slot, (_, values)) in index.iter_mut().zip(&used).rev() {
                *slot += 1;
                if *slot < values.len() {
                    carry = false;
                    break;
                }
                *slot = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(specs)
}

/// Result of evaluating one spec on one pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok(NoiseEstimate),
    /// The high residual variance was degenerate; the ratio is undefined.
    Degenerate(ResidualStats),
    /// The filter or the pair could not be evaluated.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub pair_id: String,
    pub spec: FilterSpec,
    pub outcome: Outcome,
}

impl SweepRecord {
    pub fn estimate(&self) -> Option<&NoiseEstimate> {
        match &self.outcome {
            Outcome::Ok(e) => Some(e),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            Outcome::Ok(_) => "ok",
            Outcome::Degenerate(_) => "degenerate",
            Outcome::Failed(_) => "error",
        }
    }
}

fn evaluate(pair: &ScanPair, spec: &FilterSpec, betas: &[f64]) -> SweepRecord {
    let outcome = match residual_stats(pair, spec) {
        Ok(stats) => match stats.finish(betas) {
            Ok(est) => Outcome::Ok(est),
            Err(Error::DegenerateHighVariance(_)) => Outcome::Degenerate(stats),
            Err(e) => Outcome::Failed(e.to_string()),
        },
        Err(e) => Outcome::Failed(e.to_string()),
    };
    SweepRecord {
        pair_id: pair.id.clone(),
        spec: *spec,
        outcome,
    }
}

/// Reads [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParams(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

/// Evaluates every grid spec on every pair. Records come back ordered by
/// pair id (stable for equal ids), then grid order, whatever the number of
/// worker threads. `threads = None` uses the global pool.
pub fn run_sweep(pairs: &[ScanPair], grid: &FilterGrid, threads: Option<usize>) -> Result<Vec<SweepRecord>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no scan pairs".into()));
    }
    grid.validate()?;
    let specs = enumerate_grid(grid)?;
    if specs.is_empty() {
        return Err(Error::EmptyInput("grid has no filters".into()));
    }
    let mut order: Vec<&ScanPair> = pairs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let jobs: Vec<(&ScanPair, &FilterSpec)> =
        order.iter().flat_map(|&p| specs.iter().map(move |s| (p, s))).collect();
    let work = || -> Vec<SweepRecord> {
        jobs.par_iter().map(|(p, s)| evaluate(p, s, &grid.betas)).collect()
    };
    match threads {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

/// Records CSV header, one row per record and β.
pub const RECORD_COLUMNS: [&str; 12] = [
    "pair_id",
    "filter",
    "params",
    "sigma2_high",
    "sigma2_low",
    "r_blind",
    "r_the",
    "ratio_of_ratios",
    "m",
    "beta",
    "theta",
    "status",
];

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn num(v: Option<f64>) -> String {
    v.map(g9).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[SweepRecord], betas: &[f64], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        let (s2h, s2l, rb, rthe, ratio, m) = match &r.outcome {
            Outcome::Ok(e) => (
                Some(e.sigma2_high),
                Some(e.sigma2_low),
                Some(e.r_blind),
                Some(e.r_the),
                Some(e.ratio_of_ratios),
                Some(e.m),
            ),
            Outcome::Degenerate(s) => (Some(s.sigma2_high), Some(s.sigma2_low), None, Some(s.r_the), None, Some(s.m)),
            Outcome::Failed(_) => (None, None, None, None, None, None),
        };
        for &beta in betas {
            let th = ratio.zip(m).map(|(q, m)| theta(q, m, beta));
            w.write_record([
                r.pair_id.clone(),
                r.spec.kind().to_string(),
                r.spec.params_string(),
                num(s2h),
                num(s2l),
                num(rb),
                num(rthe),
                num(ratio),
                num(m),
                g9(beta),
                num(th),
                r.status().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

/// One parsed row of the records CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RecordRow {
    pub pair_id: String,
    pub filter: FilterKind,
    pub params: String,
    pub sigma2_high: Option<f64>,
    pub sigma2_low: Option<f64>,
    pub r_blind: Option<f64>,
    pub r_the: Option<f64>,
    pub ratio_of_ratios: Option<f64>,
    pub m: Option<f64>,
    pub beta: f64,
    pub theta: Option<f64>,
    pub status: String,
}

impl RecordRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn read_records_csv<R: std::io::Read>(input: R) -> Result<Vec<RecordRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RECORD_COLUMNS {
        return Err(Error::InvalidParams(format!("unexpected records header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// A scored evaluation reduced to what selection needs.
#[derive(Debug, Clone)]
pub(crate) struct Scored {
    pub kind: FilterKind,
    pub params: String,
    /// `(θ, ratio)` for usable evaluations, `None` for degenerate or failed ones.
    pub value: Option<(f64, f64)>,
}

/// Per-spec means in first-appearance order.
#[derive(Debug, Clone)]
pub(crate) struct SpecMean {
    pub kind: FilterKind,
    pub params: String,
    pub n: usize,
    pub excluded: usize,
    pub mean_theta: f64,
    pub mean_ratio: f64,
}

pub(crate) fn spec_means(items: impl IntoIterator<Item = Scored>) -> Vec<SpecMean> {
    let mut index: BTreeMap<(FilterKind, String), usize> = BTreeMap::new();
    let mut acc: Vec<(FilterKind, String, usize, usize, f64, f64)> = Vec::new();
    for s in items {
        let i = *index.entry((s.kind, s.params.clone())).or_insert_with(|| {
            acc.push((s.kind, s.params.clone(), 0, 0, 0.0, 0.0));
            acc.len() - 1
        });
        let slot = &mut acc[i];
        match s.value {
            Some((t, q)) => {
                slot.2 += 1;
                slot.4 += t;
                slot.5 += q;
            }
            None => slot.3 += 1,
        }
    }
    acc.into_iter()
        .map(|(kind, params, n, excluded, st, sq)| SpecMean {
            kind,
            params,
            n,
            excluded,
            mean_theta: if n > 0 { st / n as f64 } else { f64::NAN },
            mean_ratio: if n > 0 { sq / n as f64 } else { f64::NAN },
        })
        .collect()
}

/// Argmin of mean θ per filter kind (baseline excluded); specs with any
/// excluded evaluation are ineligible and earlier specs win ties.
pub(crate) fn pick_optimal(means: &[SpecMean], beta: f64) -> Result<Vec<OptimalEntry>> {
    let mut best: BTreeMap<FilterKind, &SpecMean> = BTreeMap::new();
    for m in means {
        if m.kind == FilterKind::None || m.excluded > 0 || m.n == 0 {
            continue;
        }
        match best.get(&m.kind) {
            Some(b) if b.mean_theta <= m.mean_theta => {}
            _ => {
                best.insert(m.kind, m);
            }
        }
    }
    if best.is_empty() && means.iter().any(|m| m.kind != FilterKind::None) {
        return Err(Error::AllDegenerate);
    }
    best.into_values()
        .map(|m| {
            Ok(OptimalEntry {
                filter: m.kind,
                best_spec: FilterSpec::from_parts(m.kind, &m.params)?,
                beta,
                mean_theta: m.mean_theta,
                mean_ratio: m.mean_ratio,
                n_pairs: m.n,
            })
        })
        .collect()
}

fn scored(records: &[SweepRecord], beta: f64) -> impl Iterator<Item = Scored> + '_ {
    records.iter().map(move |r| Scored {
        kind: r.spec.kind(),
        params: r.spec.params_string(),
        value: r.estimate().map(|e| (theta(e.ratio_of_ratios, e.m, beta), e.ratio_of_ratios)),
    })
}

/// Best parameters of one filter at one β, with means over pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalEntry {
    pub filter: FilterKind,
    #[serde(serialize_with = "display_spec")]
    pub best_spec: FilterSpec,
    pub beta: f64,
    pub mean_theta: f64,
    pub mean_ratio: f64,
    pub n_pairs: usize,
}

fn display_spec<S: serde::Serializer>(spec: &FilterSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(spec)
}

/// One optimal entry per filter kind present (baseline excluded).
pub fn select_optimal(records: &[SweepRecord], beta: f64) -> Result<Vec<OptimalEntry>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no sweep records".into()));
    }
    pick_optimal(&spec_means(scored(records, beta)), beta)
}

pub const OPTIMAL_COLUMNS: [&str; 5] = ["filter", "params", "beta", "mean_theta", "mean_ratio"];

pub fn write_optimal_csv<W: Write>(entries: &[OptimalEntry], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(OPTIMAL_COLUMNS)?;
    for e in entries {
        w.write_record([
            e.filter.to_string(),
            e.best_spec.params_string(),
            g9(e.beta),
            g9(e.mean_theta),
            g9(e.mean_ratio),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<optimal>", e))?;
    Ok(())
}

/// Pre-filter baseline on one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub pair_id: String,
    pub r_blind: f64,
    pub r_the: f64,
    pub ratio_of_ratios: f64,
    pub theta: f64,
}

/// Best spec of one filter against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterComparison {
    pub filter: FilterKind,
    pub params: String,
    pub n_pairs: usize,
    pub mean_theta: f64,
    pub mean_ratio: f64,
    pub baseline_mean_theta: f64,
    pub baseline_mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub beta: f64,
    /// Pairs whose baseline was usable.
    pub baseline_pairs: usize,
    pub baseline_mean_theta: f64,
    pub baseline_mean_ratio: f64,
    pub baseline: Vec<BaselineRow>,
    pub filters: Vec<FilterComparison>,
    /// Number of degenerate or failed records, all specs included.
    pub excluded_records: usize,
}

pub(crate) fn summarize(
    baseline: Vec<BaselineRow>,
    means: &[SpecMean],
    beta: f64,
    excluded_records: usize,
) -> Result<Summary> {
    let n = baseline.len();
    if n == 0 {
        return Err(Error::MissingBaseline);
    }
    let base_theta = baseline.iter().map(|b| b.theta).sum::<f64>() / n as f64;
    let base_ratio = baseline.iter().map(|b| b.ratio_of_ratios).sum::<f64>() / n as f64;
    let filters = match pick_optimal(means, beta) {
        Ok(entries) => entries,
        Err(Error::AllDegenerate) => Vec::new(),
        Err(e) => return Err(e),
    }
    .into_iter()
    .map(|e| FilterComparison {
        filter: e.filter,
        params: e.best_spec.params_string(),
        n_pairs: e.n_pairs,
        mean_theta: e.mean_theta,
        mean_ratio: e.mean_ratio,
        baseline_mean_theta: base_theta,
        baseline_mean_ratio: base_ratio,
    })
    .collect();
    Ok(Summary {
        beta,
        baseline_pairs: n,
        baseline_mean_theta: base_theta,
        baseline_mean_ratio: base_ratio,
        baseline,
        filters,
        excluded_records,
    })
}

/// Baseline table and optimal-vs-baseline comparison at one β. Means are
/// over pairs; degenerate records are counted but left out of the means.
pub fn aggregate_summary(records: &[SweepRecord], beta: f64) -> Result<Summary> {
    let baseline = records
        .iter()
        .filter(|r| r.spec.kind() == FilterKind::None)
        .filter_map(|r| {
            r.estimate().map(|e| BaselineRow {
                pair_id: r.pair_id.clone(),
                r_blind: e.r_blind,
                r_the: e.r_the,
                ratio_of_ratios: e.ratio_of_ratios,
                theta: theta(e.ratio_of_ratios, e.m, beta),
            })
        })
        .collect();
    let excluded = records.iter().filter(|r| r.estimate().is_none()).count();
    summarize(baseline, &spec_means(scored(records, beta)), beta, excluded)
}

/// Rows of `rows` at β (relative tolerance 1e-9).
pub fn rows_at_beta(rows: &[RecordRow], beta: f64) -> Vec<&RecordRow> {
    rows.iter()
        .filter(|r| (r.beta - beta).abs() <= 1e-9 * beta.abs().max(f64::MIN_POSITIVE))
        .collect()
}
