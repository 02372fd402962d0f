//! Input loading, predictor construction and algorithm dispatch shared by the
//! `cluster` and `bench` commands.

use std::fs;
use std::path::Path;

use augclust::baselines::{kmeanspp_seed, kmeanspp_trials, predicted_centroids, random_sampling_baseline, DEFAULT_Q_GRID};
use augclust::deletion::deletion_cluster;
use augclust::fast::fast_cluster;
use augclust::formats::{parse_ground_truth, parse_labels, parse_points_csv, parse_predictor, GroundTruth, PredictorBase, PredictorExpr};
use augclust::geometry::{assign_nearest, cost_kmeans, cost_kmedian, partition_cost};
use augclust::kmedian::kmedian_cluster;
use augclust::learned::{cluster_with_predictor, select_alpha, AlphaGrid};
use augclust::predictors::{corrupt, kmeanspp_predictor, nn_predictor, CorruptionMode, PredictorSpec};
use augclust::report::{InputDigest, Normalization, NormalizationKind, Objective};
use augclust::{CenterSet, LabelAssignment, PointSet, RngStream, Warning};
use rand::RngCore;

use crate::args::{Algo, AlphaArg, InputArgs, Normalize};
use crate::CliError;

pub struct Loaded {
    pub points: PointSet,
    pub labels: Option<LabelAssignment>,
    pub ground_truth: Option<GroundTruth>,
    pub digests: Vec<InputDigest>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?).map_err(|_| CliError::input(format!("{}: not valid UTF-8", path.display())))
}

fn in_file<T>(path: &Path, r: augclust::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn load_points(path: &Path, digests: &mut Vec<InputDigest>) -> Result<PointSet, CliError> {
    let bytes = read_bytes(path)?;
    digests.push(InputDigest::of_bytes(path.display().to_string(), &bytes));
    in_file(path, parse_points_csv(&bytes))
}

pub fn load_labels(path: &Path, n: usize, k: Option<usize>, digests: &mut Vec<InputDigest>) -> Result<LabelAssignment, CliError> {
    let text = read_text(path)?;
    digests.push(InputDigest::of_bytes(path.display().to_string(), text.as_bytes()));
    let labels = in_file(path, parse_labels(&text, k))?;
    if labels.len() != n {
        return Err(CliError::input(format!(
            "{}: {} labels for {n} points",
            path.display(),
            labels.len()
        )));
    }
    Ok(labels)
}

pub fn load(args: &InputArgs) -> Result<Loaded, CliError> {
    if args.k == 0 {
        return Err(CliError::input("--k must be at least 1"));
    }
    let mut digests = Vec::new();
    let points = load_points(&args.points, &mut digests)?;
    let labels = args
        .labels
        .as_deref()
        .map(|p| load_labels(p, points.n(), Some(args.k), &mut digests))
        .transpose()?;
    let ground_truth = match &args.ground_truth {
        Some(p) => {
            let text = read_text(p)?;
            digests.push(InputDigest::of_bytes(p.display().to_string(), text.as_bytes()));
            let gt = in_file(p, parse_ground_truth(&text))?;
            if gt.d != points.d() {
                return Err(CliError::input(format!(
                    "{}: ground truth has d={} but points have d={}",
                    p.display(),
                    gt.d,
                    points.d()
                )));
            }
            Some(gt)
        }
        None => None,
    };
    Ok(Loaded {
        points,
        labels,
        ground_truth,
        digests,
    })
}

/// Predictor expression from the command line; `--labels` alone means the
/// labels are used as given.
pub fn predictor_expr(args: &InputArgs) -> Result<PredictorExpr, CliError> {
    match (&args.predictor, &args.labels) {
        (Some(spec), _) => parse_predictor(spec).map_err(|e| CliError::input(e.to_string())),
        (None, Some(_)) => Ok(PredictorExpr {
            base: PredictorBase::LabelsArg,
            corruption: None,
        }),
        (None, None) => Err(CliError::input("either --labels or --predictor is required")),
    }
}

/// The uncorrupted labeling named by the predictor's base.
pub fn base_labels(
    expr: &PredictorExpr,
    loaded: &mut Loaded,
    k: usize,
) -> Result<LabelAssignment, CliError> {
    let n = loaded.points.n();
    match &expr.base {
        PredictorBase::LabelsArg => loaded
            .labels
            .clone()
            .ok_or_else(|| CliError::input("predictor needs --labels")),
        PredictorBase::File(path) => load_labels(Path::new(path), n, Some(k), &mut loaded.digests),
        PredictorBase::Nearest { points, labels } => {
            let rp = load_points(Path::new(points), &mut loaded.digests)?;
            let rl = load_labels(Path::new(labels), rp.n(), Some(k), &mut loaded.digests)?;
            nn_predictor(&rp, &rl, &loaded.points).map_err(CliError::from_core)
        }
        PredictorBase::KMeansPP { seed: s } => {
            kmeanspp_predictor(&loaded.points, k, RngStream::new(*s).phase("predictor")).map_err(CliError::from_core)
        }
    }
}

/// Reference centers for the farthest-center adversary: the ground truth when
/// available, else the centroids of the base labeling.
pub fn reference_centers(points: &PointSet, base: &LabelAssignment, k: usize, gt: Option<&GroundTruth>) -> Result<CenterSet, CliError> {
    if let Some(gt) = gt.filter(|g| g.k == k) {
        return Ok(gt.centers.clone());
    }
    predicted_centroids(points, base, k)
        .map(|(c, _)| c)
        .map_err(CliError::from_core)
}

pub fn apply_corruption(
    points: &PointSet,
    base: &LabelAssignment,
    k: usize,
    mode: CorruptionMode,
    rate: f64,
    seed: u64,
    reference: Option<&CenterSet>,
) -> Result<LabelAssignment, CliError> {
    let spec = PredictorSpec::new(mode, rate, seed).map_err(CliError::from_core)?;
    corrupt(base, k, &spec, reference.map(|c| (points, c))).map_err(CliError::from_core)
}

/// Seed for the corruption draws of one trial; shared across sweep points so
/// larger rates corrupt a superset of points.
pub fn corruption_seed(seed: u64, trial: u64) -> u64 {
    RngStream::new(seed).child(trial).phase("corruption-seed").rng().next_u64()
}

pub struct RunOutput {
    pub centers: CenterSet,
    /// Final partition: the algorithm's own labels where it returns them,
    /// nearest-center otherwise. Entries index label space `[0, k)`.
    pub labels: LabelAssignment,
    pub alpha: Option<f64>,
    pub objective: Objective,
    pub raw_cost: f64,
    pub partition_cost: Option<f64>,
    pub warnings: Vec<Warning>,
}

fn grid_for(alpha: AlphaArg) -> Result<AlphaGrid, CliError> {
    match alpha {
        AlphaArg::Auto => Ok(AlphaGrid::default()),
        AlphaArg::Fixed(a) => AlphaGrid::single(a).map_err(CliError::from_core),
    }
}

pub fn run_algo(
    algo: Algo,
    points: &PointSet,
    predicted: &LabelAssignment,
    k: usize,
    alpha: AlphaArg,
    q: Option<f64>,
    rng: RngStream,
) -> Result<RunOutput, CliError> {
    let core = CliError::from_core;
    let (centers, labels, alpha_used, objective, warnings) = match algo {
        Algo::Main => {
            let (centers, a, w) = match alpha {
                AlphaArg::Auto => {
                    let s = select_alpha(points, predicted, k, &AlphaGrid::default(), rng).map_err(core)?;
                    (s.centers, s.alpha, s.warnings)
                }
                AlphaArg::Fixed(a) => {
                    let out = cluster_with_predictor(points, predicted, k, a, rng).map_err(core)?;
                    (out.centers, out.alpha, out.warnings)
                }
            };
            let labels = assign_nearest(points, &centers).map_err(core)?;
            (centers, labels, Some(a), Objective::KMeans, w)
        }
        Algo::Fast => {
            let mut best: Option<(f64, f64, augclust::fast::FastOutput)> = None;
            for a in grid_for(alpha)?.values() {
                let out = fast_cluster(points, predicted, k, a, rng).map_err(core)?;
                let cost = cost_kmeans(points, &out.centers).map_err(core)?;
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, a, out));
                }
            }
            let (_, a, out) = best.expect("grid is non-empty");
            (out.centers, out.labels, Some(a), Objective::KMeans, out.warnings)
        }
        Algo::Deletion => {
            let out = deletion_cluster(points, predicted, k).map_err(core)?;
            (out.centers, out.labels, None, Objective::KMeans, out.warnings)
        }
        Algo::Kmedian => {
            let mut best: Option<(f64, f64, augclust::kmedian::KMedianOutput)> = None;
            for a in grid_for(alpha)?.values() {
                let out = kmedian_cluster(points, predicted, k, a, rng).map_err(core)?;
                let cost = cost_kmedian(points, &out.centers).map_err(core)?;
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, a, out));
                }
            }
            let (_, a, out) = best.expect("grid is non-empty");
            let labels = assign_nearest(points, &out.centers).map_err(core)?;
            (out.centers, labels, Some(a), Objective::KMedian, out.warnings)
        }
        Algo::Naive => {
            let (centers, w) = predicted_centroids(points, predicted, k).map_err(core)?;
            let labels = assign_nearest(points, &centers).map_err(core)?;
            (centers, labels, None, Objective::KMeans, w)
        }
        Algo::Sampling => {
            let grid: Vec<f64> = q.map_or_else(|| DEFAULT_Q_GRID.to_vec(), |q| vec![q]);
            let out = random_sampling_baseline(points, predicted, k, &grid, rng).map_err(core)?;
            let labels = assign_nearest(points, &out.centers).map_err(core)?;
            (out.centers, labels, None, Objective::KMeans, out.warnings)
        }
        Algo::Kmeanspp => {
            let centers = kmeanspp_seed(points, k, rng).map_err(core)?;
            let labels = assign_nearest(points, &centers).map_err(core)?;
            (centers, labels, None, Objective::KMeans, Vec::new())
        }
    };
    let (raw_cost, partition) = match objective {
        Objective::KMeans => (
            cost_kmeans(points, &centers).map_err(core)?,
            Some(partition_cost(points, &labels, k).map_err(core)?),
        ),
        Objective::KMedian => (cost_kmedian(points, &centers).map_err(core)?, None),
    };
    Ok(RunOutput {
        centers,
        labels,
        alpha: alpha_used,
        objective,
        raw_cost,
        partition_cost: partition,
        warnings,
    })
}

pub fn normalization(
    kind: Normalize,
    objective: Objective,
    points: &PointSet,
    k: usize,
    trials: usize,
    gt: Option<&GroundTruth>,
    rng: RngStream,
) -> Result<Normalization, CliError> {
    match kind {
        Normalize::Kmeanspp => {
            if trials == 0 {
                return Err(CliError::input("--trials must be at least 1"));
            }
            let runs = kmeanspp_trials(points, k, trials, rng).map_err(CliError::from_core)?;
            let costs: Vec<f64> = match objective {
                Objective::KMeans => runs.iter().map(|(_, c)| *c).collect(),
                Objective::KMedian => runs
                    .iter()
                    .map(|(c, _)| cost_kmedian(points, c))
                    .collect::<augclust::Result<_>>()
                    .map_err(CliError::from_core)?,
            };
            let denominator = augclust::sum::compensated_sum(costs.iter().copied()) / trials as f64;
            if denominator <= 0.0 {
                return Err(CliError::input(
                    "kmeans++ normalization cost is zero (at most k distinct points); use --normalize optimal",
                ));
            }
            Ok(Normalization {
                kind: NormalizationKind::Kmeanspp,
                denominator,
                trials,
            })
        }
        Normalize::Optimal => {
            let gt = gt.ok_or_else(|| CliError::input("--normalize optimal requires --ground-truth"))?;
            if objective != Objective::KMeans {
                return Err(CliError::input("--normalize optimal is only defined for the k-means objective"));
            }
            if gt.k != k || gt.n != points.n() {
                return Err(CliError::input(format!(
                    "ground truth is for k={}, n={} but the run has k={k}, n={}",
                    gt.k,
                    gt.n,
                    points.n()
                )));
            }
            if gt.optimal_cost <= 0.0 {
                return Err(CliError::input("ground-truth optimal cost is zero; cannot normalize"));
            }
            Ok(Normalization {
                kind: NormalizationKind::Optimal,
                denominator: gt.optimal_cost,
                trials: 0,
            })
        }
    }
}
