//! Command-line front end: `phantom`, `estimate`, `sweep` and `report`.
//!
//! Exit codes: 0 success, 1 usage, 2 input or format, 3 degenerate
//! computation.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterKind, FilterSpec};
use crate::format::{g9, round_json};
use crate::image::Roi;
use crate::io::{import_pgm, load_image, save_image};
use crate::metrics::{estimate, ScanPair, DEFAULT_BETAS};
use crate::phantom::{generate_pair, roi_mask, PhantomParams, Signal, Texture};
use crate::sweep::{
    aggregate_summary, read_records_csv, rows_at_beta, run_sweep, select_optimal, spec_means, summarize,
    threads_from_env, write_optimal_csv, write_records_csv, BaselineRow, FilterGrid, Scored,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ctnoise", version, about = "Blind CT noise estimation from residual images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic high/low pair with ground truth.
    Phantom(PhantomArgs),
    /// Estimate the noise ratio of one pair under one filter.
    Estimate(EstimateArgs),
    /// Evaluate a filter-parameter grid over the pairs of a manifest.
    Sweep(SweepArgs),
    /// Emit plot data for one β from a sweep directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct PhantomArgs {
    #[arg(long)]
    out: PathBuf,
    /// Phantom parameters as JSON; replaces the individual flags.
    #[arg(long, conflicts_with_all = ["size", "sigma_high", "ratio", "seed", "signal", "roi", "texture"])]
    spec: Option<PathBuf>,
    /// Extent as WxH.
    #[arg(long, value_parser = parse_size, required_unless_present = "spec")]
    size: Option<(usize, usize)>,
    #[arg(long, required_unless_present = "spec", allow_negative_numbers = true)]
    sigma_high: Option<f64>,
    #[arg(long, required_unless_present = "spec", allow_negative_numbers = true)]
    ratio: Option<f64>,
    #[arg(long, required_unless_present = "spec")]
    seed: Option<u64>,
    /// uniform, ramp:A, chest or chest:A
    #[arg(long, default_value = "uniform", value_parser = parse_via::<Signal>)]
    signal: Signal,
    /// x,y,w,h
    #[arg(long, value_parser = parse_via::<Roi>)]
    roi: Option<Roi>,
    #[arg(long, value_parser = parse_via::<Texture>)]
    texture: Option<Texture>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    high: PathBuf,
    #[arg(long)]
    low: PathBuf,
    /// x,y,w,h
    #[arg(long, value_parser = parse_via::<Roi>)]
    roi: Roi,
    #[arg(long, value_parser = parse_via::<FilterKind>)]
    filter: FilterKind,
    /// key=value,... ; missing keys take their defaults
    #[arg(long, default_value = "")]
    params: String,
    /// Overrides the mAs-derived theoretical ratio.
    #[arg(long, allow_negative_numbers = true)]
    rthe: Option<f64>,
    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Manifest listing the scan pairs.
    #[arg(long)]
    pairs: PathBuf,
    /// Grid configuration; the built-in grid when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding records.csv.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_via<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("size `{s}` is not WxH"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("size `{s}` is not WxH"));
    Ok((dim(w)?, dim(h)?))
}

/// Exit code for an error that escaped a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_) | Error::EmptyAxis(_) => EXIT_USAGE,
        Error::DegenerateHighVariance(_) | Error::AllDegenerate => EXIT_DEGENERATE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err((code, e)) => {
            eprintln!("ctnoise: {e}");
            code
        }
    }
}

type CmdResult = std::result::Result<(), (i32, Error)>;

fn default_code(e: Error) -> (i32, Error) {
    (exit_code(&e), e)
}

fn input_code(e: Error) -> (i32, Error) {
    (EXIT_INPUT, e)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

/// A pair listed in a manifest. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub high: PathBuf,
    pub low: PathBuf,
    pub roi: Roi,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rthe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub pairs: Vec<ManifestEntry>,
}

fn load_any(path: &Path) -> Result<crate::image::Image> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
        import_pgm(path)
    } else {
        load_image(path)
    }
}

/// Loads every pair of a manifest file.
pub fn load_manifest(path: &Path) -> Result<Vec<ScanPair>> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    manifest
        .pairs
        .into_iter()
        .map(|e| {
            let high = load_any(&base.join(&e.high))?;
            let low = load_any(&base.join(&e.low))?;
            ScanPair::new(e.id, high, low, e.roi, e.rthe)
        })
        .collect()
}

fn cmd_phantom(a: PhantomArgs) -> CmdResult {
    let params = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_code(Error::io(path, e)))?;
            serde_json::from_str::<PhantomParams>(&text).map_err(|e| input_code(e.into()))?
        }
        None => {
            let (width, height) = a.size.expect("required by clap");
            PhantomParams {
                width,
                height,
                sigma_high: a.sigma_high.expect("required by clap"),
                ratio: a.ratio.expect("required by clap"),
                roi: a.roi,
                signal: a.signal,
                texture: a.texture,
                seed: a.seed.expect("required by clap"),
            }
        }
    };
    params.validate().map_err(|e| (EXIT_USAGE, e))?;
    let (pair, gt) = generate_pair(&params).map_err(default_code)?;
    let write = || -> Result<()> {
        let truth = a.out.join("groundtruth");
        create_dir(&truth)?;
        save_image(&pair.high, a.out.join("high"))?;
        save_image(&pair.low, a.out.join("low"))?;
        save_image(&gt.clean, truth.join("clean"))?;
        save_image(&gt.noise_high, truth.join("noise_high"))?;
        save_image(&gt.noise_low, truth.join("noise_low"))?;
        save_image(&roi_mask(params.width, params.height, &pair.roi)?, truth.join("roi_mask"))?;
        let manifest = Manifest {
            pairs: vec![ManifestEntry {
                id: pair.id.clone(),
                high: "high".into(),
                low: "low".into(),
                roi: pair.roi,
                rthe: None,
            }],
        };
        write_text(&a.out.join("manifest.json"), &pretty_json(&manifest)?)?;
        let resolved = PhantomParams {
            roi: Some(params.effective_roi()),
            ..params.clone()
        };
        write_text(&a.out.join("phantom.json"), &pretty_json(&resolved)?)
    };
    write().map_err(input_code)
}

fn cmd_estimate(a: EstimateArgs) -> CmdResult {
    let spec = FilterSpec::from_parts(a.filter, &a.params).map_err(|e| (EXIT_USAGE, e))?;
    let betas = a.betas.unwrap_or_else(|| DEFAULT_BETAS.to_vec());
    if betas.is_empty() || betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err((EXIT_USAGE, Error::InvalidParams("betas must be finite and >= 0".into())));
    }
    if let Some(r) = a.rthe {
        if !(r.is_finite() && r > 0.0) {
            return Err((EXIT_USAGE, Error::InvalidParams(format!("--rthe must be > 0, got {r}"))));
        }
    }
    let high = load_any(&a.high).map_err(input_code)?;
    let low = load_any(&a.low).map_err(input_code)?;
    let id = high.meta().slice_id.clone().unwrap_or_else(|| "pair".into());
    let pair = ScanPair::new(id, high, low, a.roi, a.rthe).map_err(input_code)?;
    let est = estimate(&pair, &spec, &betas).map_err(default_code)?;
    print!("{}", pretty_json(&est).map_err(input_code)?);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let threads = threads_from_env().map_err(|e| (EXIT_USAGE, e))?;
    let grid = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_code(Error::io(path, e)))?;
            FilterGrid::from_json(&text).map_err(input_code)?
        }
        None => FilterGrid::default(),
    }
    .with_baseline();
    let pairs = load_manifest(&a.pairs).map_err(input_code)?;
    if pairs.is_empty() {
        return Err(input_code(Error::EmptyInput("manifest lists no pairs".into())));
    }
    let records = run_sweep(&pairs, &grid, threads).map_err(default_code)?;

    let write = || -> Result<()> {
        create_dir(&a.out)?;
        let mut buf = Vec::new();
        write_records_csv(&records, &grid.betas, &mut buf)?;
        fs::write(a.out.join("records.csv"), buf).map_err(|e| Error::io(a.out.join("records.csv"), e))?;

        let mut optimal = Vec::new();
        let mut summaries = Vec::new();
        for &beta in &grid.betas {
            match select_optimal(&records, beta) {
                Ok(entries) => optimal.extend(entries),
                Err(Error::AllDegenerate) => {}
                Err(e) => return Err(e),
            }
            summaries.push(aggregate_summary(&records, beta)?);
        }
        let mut buf = Vec::new();
        write_optimal_csv(&optimal, &mut buf)?;
        fs::write(a.out.join("optimal.csv"), buf).map_err(|e| Error::io(a.out.join("optimal.csv"), e))?;
        write_text(&a.out.join("summary.json"), &pretty_json(&summaries)?)
    };
    write().map_err(|e| match e {
        Error::MissingBaseline => (EXIT_DEGENERATE, e),
        e => input_code(e),
    })
}

fn stats_line(params: &str, values: &[f64]) -> [String; 5] {
    let n = values.len();
    let (mean, min, max) = if n == 0 {
        (String::new(), String::new(), String::new())
    } else {
        let mean = values.iter().sum::<f64>() / n as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (g9(mean), g9(min), g9(max))
    };
    [params.to_string(), n.to_string(), mean, min, max]
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    if !(a.beta.is_finite() && a.beta >= 0.0) {
        return Err((EXIT_USAGE, Error::InvalidParams(format!("--beta must be >= 0, got {}", a.beta))));
    }
    let path = a.input.join("records.csv");
    let file = fs::File::open(&path).map_err(|_| input_code(Error::MissingFile(path.clone())))?;
    let rows = read_records_csv(file).map_err(input_code)?;
    let rows = rows_at_beta(&rows, a.beta);
    if rows.is_empty() {
        return Err(input_code(Error::EmptyInput(format!("no records at beta {}", g9(a.beta)))));
    }

    let write = || -> Result<()> {
        create_dir(&a.out)?;
        let csv_file = |name: String, header: &[&str], lines: Vec<[String; 5]>| -> Result<()> {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(header)?;
            for l in lines {
                w.write_record(l)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidParams(e.to_string()))?;
            let p = a.out.join(name);
            fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
        };

        // per-filter curves, params in first-appearance (grid) order
        for kind in FilterKind::ALL.into_iter().filter(|k| *k != FilterKind::None) {
            let mine: Vec<&&crate::sweep::RecordRow> = rows.iter().filter(|r| r.filter == kind).collect();
            if mine.is_empty() {
                continue;
            }
            let mut order: Vec<&str> = Vec::new();
            for r in &mine {
                if !order.contains(&r.params.as_str()) {
                    order.push(&r.params);
                }
            }
            let collect = |pick: fn(&crate::sweep::RecordRow) -> Option<f64>| -> Vec<[String; 5]> {
                order
                    .iter()
                    .map(|p| {
                        let vals: Vec<f64> = mine
                            .iter()
                            .filter(|r| r.params == *p && r.is_ok())
                            .filter_map(|r| pick(r))
                            .collect();
                        stats_line(p, &vals)
                    })
                    .collect()
            };
            let header = ["params", "n_ok", "mean", "min", "max"];
            csv_file(format!("{kind}_theta_vs_param.csv"), &header, collect(|r| r.theta))?;
            csv_file(format!("{kind}_ratio_vs_param.csv"), &header, collect(|r| r.ratio_of_ratios))?;
        }

        let baseline: Vec<BaselineRow> = rows
            .iter()
            .filter(|r| r.filter == FilterKind::None && r.is_ok())
            .filter_map(|r| {
                Some(BaselineRow {
                    pair_id: r.pair_id.clone(),
                    r_blind: r.r_blind?,
                    r_the: r.r_the?,
                    ratio_of_ratios: r.ratio_of_ratios?,
                    theta: r.theta?,
                })
            })
            .collect();
        let means = spec_means(rows.iter().map(|r| Scored {
            kind: r.filter,
            params: r.params.clone(),
            value: if r.is_ok() { r.theta.zip(r.ratio_of_ratios) } else { None },
        }));
        let excluded = rows.iter().filter(|r| !r.is_ok()).count();
        let summary = summarize(baseline, &means, a.beta, excluded)?;

        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["pair_id", "r_blind", "r_the", "ratio_of_ratios", "theta"])?;
        for b in &summary.baseline {
            w.write_record([b.pair_id.clone(), g9(b.r_blind), g9(b.r_the), g9(b.ratio_of_ratios), g9(b.theta)])?;
        }
        let p = a.out.join("fig4_baseline.csv");
        fs::write(&p, w.into_inner().map_err(|e| Error::InvalidParams(e.to_string()))?)
            .map_err(|e| Error::io(&p, e))?;

        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record([
            "filter",
            "params",
            "n_pairs",
            "mean_theta",
            "mean_ratio",
            "baseline_mean_theta",
            "baseline_mean_ratio",
        ])?;
        for f in &summary.filters {
            w.write_record([
                f.filter.to_string(),
                f.params.clone(),
                f.n_pairs.to_string(),
                g9(f.mean_theta),
                g9(f.mean_ratio),
                g9(f.baseline_mean_theta),
                g9(f.baseline_mean_ratio),
            ])?;
        }
        let p = a.out.join("fig6_optimal.csv");
        fs::write(&p, w.into_inner().map_err(|e| Error::InvalidParams(e.to_string()))?)
            .map_err(|e| Error::io(&p, e))
    };
    write().map_err(input_code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_parsing() {
        assert_eq!(parse_size("512x256"), Ok((512, 256)));
        assert!(parse_size("512").is_err());
        assert!(parse_size("ax2").is_err());
    }

    #[test]
    fn usage_errors_and_help() {
        assert_eq!(run(["ctnoise"]), EXIT_USAGE);
        assert_eq!(run(["ctnoise", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["ctnoise", "--help"]), EXIT_OK);
        assert_eq!(run(["ctnoise", "phantom", "--out", "x"]), EXIT_USAGE);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::MissingFile("a".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::DegenerateHighVariance(0.0)), EXIT_DEGENERATE);
        assert_eq!(exit_code(&Error::InvalidParams(String::new())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::MissingDose), EXIT_INPUT);
    }
}
