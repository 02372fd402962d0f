use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use augclust::formats::{parse_sweep, write_centers_csv, write_labels, write_points_csv, GroundTruth, SweepParam};
use augclust::predictors::{AdversarialTarget, CorruptionMode};
use augclust::report::{ClusterReport, Normalization, Objective};
use augclust::sum::compensated_sum;
use augclust::synth::lower_bound_instance;
use augclust::{CenterSet, RngStream, Warning};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Algo, AlphaArg, BenchArgs, ClusterArgs, Format, GenSynthArgs, Mode};
use crate::experiment::{
    apply_corruption, base_labels, corruption_seed, load, normalization, predictor_expr, reference_centers, run_algo,
};
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Other(anyhow::anyhow!("writing {}: {e}", path.display()))
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn gen_synth(args: &GenSynthArgs) -> Result<(), CliError> {
    let inst = lower_bound_instance(args.k, args.d, args.scale).map_err(CliError::from_core)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let points = args.out_dir.join("points.csv");
    write_points_csv(create(&points)?, &inst.points).map_err(io_err(&points))?;
    let labels = args.out_dir.join("labels.csv");
    write_labels(create(&labels)?, &inst.labels).map_err(io_err(&labels))?;
    let gt = GroundTruth {
        k: inst.k,
        d: inst.d,
        n: inst.points.n(),
        scale: inst.scale,
        optimal_cost: inst.optimal_cost,
        centers: inst.centers,
    };
    let path = args.out_dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(&gt).context("serializing ground truth")?;
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(())
}

fn mode_of(m: Mode) -> CorruptionMode {
    match m {
        Mode::Uniform => CorruptionMode::Uniform,
        Mode::Adversarial => CorruptionMode::Adversarial(AdversarialTarget::FarthestCenter),
        Mode::Deletion => CorruptionMode::Deletion,
    }
}

fn needs_reference(mode: CorruptionMode) -> bool {
    mode == CorruptionMode::Adversarial(AdversarialTarget::FarthestCenter)
}

/// Run one algorithm once; writes the report (and optional centers and
/// labels) before any `--strict` escalation.
pub fn cluster(args: &ClusterArgs) -> Result<ClusterReport, CliError> {
    let input = &args.input;
    let k = input.k;
    let mut timings = BTreeMap::new();

    let t = Instant::now();
    let mut loaded = load(input)?;
    let expr = predictor_expr(input)?;
    timings.insert("load".to_string(), ms(t));

    let t = Instant::now();
    let base = base_labels(&expr, &mut loaded, k)?;
    let predicted = match expr.corruption {
        Some((mode, rate)) => {
            let reference = if needs_reference(mode) {
                Some(reference_centers(&loaded.points, &base, k, loaded.ground_truth.as_ref())?)
            } else {
                None
            };
            apply_corruption(&loaded.points, &base, k, mode, rate, corruption_seed(input.seed, 0), reference.as_ref())?
        }
        None => base,
    };
    timings.insert("predictor".to_string(), ms(t));

    let t = Instant::now();
    let root = RngStream::new(input.seed);
    let out = run_algo(args.algo, &loaded.points, &predicted, k, args.alpha, None, root.phase("algorithm"))?;
    timings.insert("cluster".to_string(), ms(t));

    let t = Instant::now();
    let norm = normalization(
        input.normalize,
        out.objective,
        &loaded.points,
        k,
        input.trials,
        loaded.ground_truth.as_ref(),
        root.phase("normalize"),
    )?;
    timings.insert("normalize".to_string(), ms(t));

    let report = ClusterReport {
        algorithm: args.algo.name().to_string(),
        objective: out.objective,
        k,
        n: loaded.points.n(),
        d: loaded.points.d(),
        alpha: out.alpha,
        seed: input.seed,
        predictor: Some(input.predictor.clone().unwrap_or_else(|| "labels".to_string())),
        raw_cost: out.raw_cost,
        normalized_cost: out.raw_cost / norm.denominator,
        partition_cost: out.partition_cost,
        normalized_partition_cost: out.partition_cost.map(|c| c / norm.denominator),
        normalization: norm,
        centers: out.centers.clone(),
        timings_ms: timings,
        warnings: out.warnings.clone(),
        inputs: loaded.digests,
    };
    report.validate().map_err(|e| CliError::Other(anyhow::anyhow!("internal report error: {e}")))?;
    fs::write(&args.out, report.to_json() + "\n").map_err(io_err(&args.out))?;
    if let Some(p) = &args.centers_out {
        write_centers_csv(create(p)?, &out.centers).map_err(io_err(p))?;
    }
    if let Some(p) = &args.labels_out {
        write_labels(create(p)?, &out.labels).map_err(io_err(p))?;
    }
    if input.strict && !report.warnings.is_empty() {
        return Err(CliError::Strict(report.warnings));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub param: String,
    pub value: f64,
    pub trials: usize,
    pub mean_normalized_cost: f64,
    pub std_normalized_cost: f64,
    pub mean_normalized_partition_cost: Option<f64>,
    pub std_normalized_partition_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub param: String,
    pub normalization: Normalization,
    /// Present when a k-median algorithm was benchmarked.
    pub kmedian_normalization: Option<Normalization>,
    pub rows: Vec<BenchRow>,
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, var.sqrt())
}

struct TrialResult {
    raw: f64,
    partition: Option<f64>,
    warnings: Vec<Warning>,
}

pub fn bench(args: &BenchArgs) -> Result<BenchTable, CliError> {
    let input = &args.input;
    let k = input.k;
    if input.trials == 0 {
        return Err(CliError::input("--trials must be at least 1"));
    }
    if args.algos.is_empty() {
        return Err(CliError::input("--algos is empty"));
    }
    let sweep = parse_sweep(&args.sweep).map_err(|e| CliError::input(e.to_string()))?;
    let mut loaded = load(input)?;
    let expr = predictor_expr(input)?;
    let base = base_labels(&expr, &mut loaded, k)?;
    let points = &loaded.points;

    let mode = match (args.mode, expr.corruption) {
        (Some(m), _) => mode_of(m),
        (None, Some((m, _))) => m,
        (None, None) => CorruptionMode::Uniform,
    };
    let fixed_rate = expr.corruption.map_or(0.0, |(_, r)| r);
    let reference: Option<CenterSet> = if needs_reference(mode) {
        Some(reference_centers(points, &base, k, loaded.ground_truth.as_ref())?)
    } else {
        None
    };

    let root = RngStream::new(input.seed);
    let gt = loaded.ground_truth.as_ref();
    let norm = normalization(input.normalize, Objective::KMeans, points, k, input.trials, gt, root.phase("normalize"))?;
    let kmedian_norm = if args.algos.contains(&Algo::Kmedian) {
        Some(normalization(input.normalize, Objective::KMedian, points, k, input.trials, gt, root.phase("normalize"))?)
    } else {
        None
    };

    // Validate sweep values before launching any work.
    for &v in &sweep.values {
        let ok = match sweep.param {
            SweepParam::Lambda => (0.0..=1.0).contains(&v),
            SweepParam::Q => v > 0.0 && v <= 1.0,
            SweepParam::Alpha => v > 0.0 && v < 1.0,
        };
        if !ok {
            return Err(CliError::input(format!("sweep value {}={v} out of range", sweep.param.name())));
        }
    }

    let tasks: Vec<(usize, usize)> = (0..sweep.values.len())
        .flat_map(|s| (0..input.trials).map(move |t| (s, t)))
        .collect();
    let results: Vec<Vec<TrialResult>> = tasks
        .par_iter()
        .map(|&(s, t)| {
            let v = sweep.values[s];
            let rate = if sweep.param == SweepParam::Lambda { v } else { fixed_rate };
            let predicted = if rate > 0.0 {
                apply_corruption(points, &base, k, mode, rate, corruption_seed(input.seed, t as u64), reference.as_ref())?
            } else {
                base.clone()
            };
            let alpha = if sweep.param == SweepParam::Alpha { AlphaArg::Fixed(v) } else { args.alpha };
            let q = (sweep.param == SweepParam::Q).then_some(v);
            let trial = root.child(t as u64);
            args.algos
                .iter()
                .map(|&algo| {
                    let out = run_algo(algo, points, &predicted, k, alpha, q, trial.phase(algo.name()))?;
                    let denom = match out.objective {
                        Objective::KMeans => norm.denominator,
                        Objective::KMedian => kmedian_norm.as_ref().expect("computed when kmedian is requested").denominator,
                    };
                    Ok(TrialResult {
                        raw: out.raw_cost / denom,
                        partition: out.partition_cost.map(|c| c / denom),
                        warnings: out.warnings,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (a, algo) in args.algos.iter().enumerate() {
        for (s, &v) in sweep.values.iter().enumerate() {
            let trials = &results[s * input.trials..(s + 1) * input.trials];
            let raw: Vec<f64> = trials.iter().map(|r| r[a].raw).collect();
            let part: Option<Vec<f64>> = trials.iter().map(|r| r[a].partition).collect();
            let (mean, std) = mean_std(&raw);
            let (pm, ps) = part.map(|p| mean_std(&p)).unzip();
            rows.push(BenchRow {
                algorithm: algo.name().to_string(),
                param: sweep.param.name().to_string(),
                value: v,
                trials: input.trials,
                mean_normalized_cost: mean,
                std_normalized_cost: std,
                mean_normalized_partition_cost: pm,
                std_normalized_partition_cost: ps,
            });
            warnings.extend(trials.iter().flat_map(|r| r[a].warnings.iter().cloned()));
        }
    }
    let table = BenchTable {
        param: sweep.param.name().to_string(),
        normalization: norm,
        kmedian_normalization: kmedian_norm,
        rows,
    };
    match &args.out {
        Some(p) => write_table(create(p)?, &table, args.format).map_err(io_err(p))?,
        None => write_table(io::stdout().lock(), &table, args.format).map_err(|e| CliError::Other(e.into()))?,
    }
    if input.strict && !warnings.is_empty() {
        return Err(CliError::Strict(warnings));
    }
    Ok(table)
}

pub const BENCH_COLUMNS: [&str; 8] = [
    "algorithm",
    "param",
    "value",
    "trials",
    "mean_normalized_cost",
    "std_normalized_cost",
    "mean_normalized_partition_cost",
    "std_normalized_partition_cost",
];

fn write_table<W: Write>(mut out: W, table: &BenchTable, format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, table)?;
            out.write_all(b"\n")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(BENCH_COLUMNS)?;
            let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
            for r in &table.rows {
                w.write_record([
                    r.algorithm.clone(),
                    r.param.clone(),
                    r.value.to_string(),
                    r.trials.to_string(),
                    r.mean_normalized_cost.to_string(),
                    r.std_normalized_cost.to_string(),
                    opt(r.mean_normalized_partition_cost),
                    opt(r.std_normalized_partition_cost),
                ])?;
            }
            w.flush()?;
        }
    }
    out.flush()
}
