//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. `ACCEPTANCE_ONLY=1,4` restricts the run.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use augclust::baselines::{kmeanspp_trials, lloyd, predicted_centroids, LloydConfig};
use augclust::crd_est::{crd_est_detailed, shortest_interval};
use augclust::deletion::deletion_cluster;
use augclust::fast::{build_center_embedding, build_projection, fast_cluster, jl_dimension, AnnIndex, FastConfig};
use augclust::geometry::{assign_nearest, assignment_cost, cost_kmeans, dist, partition_cost, sq_dist};
use augclust::kmedian::{geometric_median, median_objective};
use augclust::learned::{cluster_with_predictor, select_alpha, AlphaGrid};
use augclust::predictors::{corrupt, nn_predictor, CorruptionMode, PredictorSpec};
use augclust::report::ClusterReport;
use augclust::synth::{lower_bound_instance, planted_mixture, MixtureConfig, PlantedMixture};
use augclust::{CenterSet, LabelAssignment, PointSet, RngStream, Warning};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(u32, &str, fn(&mut Shared) -> Outcome); 10] = [
        (1, "synthetic exact recovery", c1_exact_recovery),
        (2, "naive-predictor blowup", c2_naive_blowup),
        (3, "kmeans++ gap", c3_kmeanspp_gap),
        (4, "main algorithm (1+20a) suite", c4_main_suite),
        (5, "fast pipeline suite", c5_fast_suite),
        (6, "deletion suite", c6_deletion_suite),
        (7, "oracle equivalences", c7_oracles),
        (8, "estimator inequalities", c8_estimator),
        (9, "JL distortion", c9_jl),
        (10, "CLI determinism across threads", c10_determinism),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let o = f(&mut shared);
        let secs = t.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} [{name}]: {} ({secs:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

#[derive(Default)]
struct Shared {
    synth: Option<SynthRuns>,
    suite: Option<Suite>,
}

struct Suite {
    runs: Vec<SuiteRun>,
    /// Wall time excluding the fast-pipeline calls.
    main_elapsed: Duration,
    fast_runs: usize,
    fast_fallbacks: usize,
}

/// The lower-bound instance at defaults with 20 seeded λ = 0.5 corruptions.
struct SynthRuns {
    points: PointSet,
    optimal: f64,
    predicted: Vec<LabelAssignment>,
    k: usize,
}

const SYNTH_SEEDS: u64 = 20;

fn synth(shared: &mut Shared) -> &SynthRuns {
    shared.synth.get_or_insert_with(|| {
        let inst = lower_bound_instance(10, 1000, 1000.0).expect("instance");
        let predicted = (0..SYNTH_SEEDS)
            .map(|s| {
                let spec = PredictorSpec::new(CorruptionMode::Uniform, 0.5, s).unwrap();
                corrupt(&inst.labels, inst.k, &spec, None).unwrap()
            })
            .collect();
        SynthRuns {
            points: inst.points,
            optimal: inst.optimal_cost,
            predicted,
            k: inst.k,
        }
    })
}

fn c1_exact_recovery(shared: &mut Shared) -> Outcome {
    let t = Instant::now();
    let s = synth(shared);
    let mut hits = 0;
    let mut worst_center_ratio: f64 = 0.0;
    let mut near_center = 0;
    let mut alphas = Vec::new();
    for (seed, pred) in s.predicted.iter().enumerate() {
        let sel = select_alpha(&s.points, pred, s.k, &AlphaGrid::default(), RngStream::new(seed as u64)).unwrap();
        let labels = assign_nearest(&s.points, &sel.centers).unwrap();
        let pc = partition_cost(&s.points, &labels, s.k).unwrap();
        if ((pc - s.optimal) / s.optimal).abs() <= 1e-9 {
            hits += 1;
        }
        worst_center_ratio = worst_center_ratio.max(sel.cost / s.optimal);
        // Centers at exactly scale·e_i cost k·d, a factor (d+1)/d over optimal.
        near_center += usize::from(sel.cost <= 1.0011 * s.optimal);
        alphas.push(sel.alpha);
    }
    let elapsed = t.elapsed();
    let pass = hits >= 19 && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "partition cost = optimal (rel 1e-9) on {hits}/20 seeds; selected alpha in [{:.2}, {:.2}]; \
             center cost <= 1.0011 x optimal on {near_center}/20 (worst {worst_center_ratio:.4e}); {:.1}s",
            alphas.iter().copied().fold(f64::INFINITY, f64::min),
            alphas.iter().copied().fold(0.0, f64::max),
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_naive_blowup(shared: &mut Shared) -> Outcome {
    let s = synth(shared);
    let ratios: Vec<f64> = s
        .predicted
        .iter()
        .map(|p| {
            let (c, _) = predicted_centroids(&s.points, p, s.k).unwrap();
            cost_kmeans(&s.points, &c).unwrap() / s.optimal
        })
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(min >= 1e3, format!("min naive cost / optimal over 20 seeds = {min:.3e} (floor 1e3)"))
}

fn c3_kmeanspp_gap(shared: &mut Shared) -> Outcome {
    let s = synth(shared);
    let runs = kmeanspp_trials(&s.points, s.k, 20, RngStream::new(2024)).unwrap();
    let mean = runs.iter().map(|(_, c)| c).sum::<f64>() / runs.len() as f64;
    let ratio = mean / s.optimal;
    outcome(ratio >= 1.5, format!("mean kmeans++ cost over 20 trials / optimal = {ratio:.4} (floor 1.5)"))
}

const SUITE_SEEDS: u64 = 50;

fn mixture(k: usize, d: usize, n_per_cluster: usize, seed: u64) -> PlantedMixture {
    planted_mixture(
        MixtureConfig {
            k,
            d,
            n_per_cluster,
            separation: 10.0,
            noise_sigma: 1.0,
        },
        RngStream::new(seed).phase("mixture"),
    )
    .expect("mixture")
}

/// Lloyd iterations started from the planted means.
fn reference_cost(m: &PlantedMixture) -> f64 {
    let out = lloyd(&m.points, &m.centers, LloydConfig::default()).unwrap();
    *out.costs.last().expect("initial cost is always recorded")
}

struct SuiteRun {
    k: usize,
    d: usize,
    alpha: f64,
    main_ok: usize,
    fast_ok: usize,
    fast_vs_main_ok: usize,
    worst_main: f64,
    worst_fast: f64,
    worst_fast_vs_main: f64,
    fallbacks: usize,
}

/// One pass over every property-suite configuration, running both the main
/// algorithm and the fast pipeline on each seeded instance.
fn suite(shared: &mut Shared) -> &Suite {
    shared.suite.get_or_insert_with(|| {
        let start = Instant::now();
        let mut fast_time = Duration::ZERO;
        let mut runs = Vec::new();
        let mut fast_runs = 0;
        let mut fast_fallbacks = 0;
        for k in [5usize, 10] {
            for d in [10usize, 100] {
                for alpha in [0.02, 0.05, 0.1] {
                    let n_per = (100.0 * k as f64 / alpha).ceil() as usize;
                    let mut run = SuiteRun {
                        k,
                        d,
                        alpha,
                        main_ok: 0,
                        fast_ok: 0,
                        fast_vs_main_ok: 0,
                        worst_main: 0.0,
                        worst_fast: 0.0,
                        worst_fast_vs_main: 0.0,
                        fallbacks: 0,
                    };
                    for seed in 0..SUITE_SEEDS {
                        let m = mixture(k, d, n_per, seed);
                        let reference = reference_cost(&m);
                        let spec = PredictorSpec::new(CorruptionMode::Uniform, alpha, seed).unwrap();
                        let pred = corrupt(&m.labels, k, &spec, None).unwrap();
                        let rng = RngStream::new(seed).phase("algorithm");
                        let main = cluster_with_predictor(&m.points, &pred, k, alpha, rng).unwrap();
                        let main_cost = cost_kmeans(&m.points, &main.centers).unwrap();
                        let bound = (1.0 + 20.0 * alpha) * reference;
                        run.main_ok += usize::from(main_cost <= bound);
                        run.worst_main = run.worst_main.max(main_cost / reference);

                        let t = Instant::now();
                        let fast = fast_cluster(&m.points, &pred, k, alpha, rng).unwrap();
                        let fast_cost = assignment_cost(&m.points, &fast.centers, &fast.labels).unwrap();
                        fast_time += t.elapsed();
                        run.fast_ok += usize::from(fast_cost <= bound);
                        run.fast_vs_main_ok += usize::from(fast_cost <= 1.25 * main_cost);
                        run.worst_fast = run.worst_fast.max(fast_cost / reference);
                        run.worst_fast_vs_main = run.worst_fast_vs_main.max(fast_cost / main_cost);
                        let fell = fast
                            .warnings
                            .iter()
                            .filter(|w| matches!(w, Warning::ProjectionFallback { .. }))
                            .count();
                        run.fallbacks += fell;
                        fast_runs += 1;
                        fast_fallbacks += fell;
                    }
                    runs.push(run);
                }
            }
        }
        Suite {
            runs,
            main_elapsed: start.elapsed() - fast_time,
            fast_runs,
            fast_fallbacks,
        }
    })
}

fn c4_main_suite(shared: &mut Shared) -> Outcome {
    let suite = suite(shared);
    let need = (0.9 * SUITE_SEEDS as f64).ceil() as usize;
    let mut pass = suite.main_elapsed < Duration::from_secs(300);
    let mut lines = Vec::new();
    for r in &suite.runs {
        pass &= r.main_ok >= need;
        lines.push(format!(
            "k={} d={} a={}: {}/{} (worst {:.4})",
            r.k, r.d, r.alpha, r.main_ok, SUITE_SEEDS, r.worst_main
        ));
    }
    outcome(
        pass,
        format!(
            "need >= {need}/{SUITE_SEEDS} per config in < 300s (took {:.1}s without fast runs); {}",
            suite.main_elapsed.as_secs_f64(),
            lines.join("; ")
        ),
    )
}

fn c5_fast_suite(shared: &mut Shared) -> Outcome {
    let suite = suite(shared);
    let need = (0.75 * SUITE_SEEDS as f64).ceil() as usize;
    let mut pass = true;
    let mut lines = Vec::new();
    for r in &suite.runs {
        pass &= r.fast_ok >= need && r.fast_vs_main_ok == SUITE_SEEDS as usize;
        lines.push(format!(
            "k={} d={} a={}: bound {}/{} (worst {:.4}), fast<=1.25*main {}/{} (worst {:.4}), fallbacks {}",
            r.k,
            r.d,
            r.alpha,
            r.fast_ok,
            SUITE_SEEDS,
            r.worst_fast,
            r.fast_vs_main_ok,
            SUITE_SEEDS,
            r.worst_fast_vs_main,
            r.fallbacks
        ));
    }
    outcome(pass, format!("need >= {need}/{SUITE_SEEDS} and every seed within 1.25x; {}", lines.join("; ")))
}

fn c6_deletion_suite(_: &mut Shared) -> Outcome {
    const SEEDS: u64 = 60;
    let alpha = 0.1;
    let d = 10;
    let mut pass = true;
    let mut lines = Vec::new();
    for k in [3usize, 5] {
        let top = 1.0 - 1.0 / (k * k) as f64;
        // Sized so that even at the top deletion rate each class keeps about 3k/α labels.
        let n_per = (3.0 * k as f64 / alpha / (1.0 - top)).ceil() as usize;
        for lambda in [0.5, 0.9, top] {
            let mut ok = 0;
            let mut worst: f64 = 0.0;
            for seed in 0..SEEDS {
                let m = mixture(k, d, n_per, 1000 + seed);
                let reference = reference_cost(&m);
                let spec = PredictorSpec::new(CorruptionMode::Deletion, lambda, seed).unwrap();
                let partial = corrupt(&m.labels, k, &spec, None).unwrap();
                let c = match deletion_cluster(&m.points, &partial, k) {
                    Ok(out) => cost_kmeans(&m.points, &out.centers).unwrap(),
                    Err(_) => f64::INFINITY,
                };
                ok += usize::from(c <= (1.0 + alpha) * reference);
                worst = worst.max(c / reference);
            }
            pass &= ok * 3 >= 2 * SEEDS as usize;
            lines.push(format!("k={k} n/class={n_per} lambda={lambda:.4}: {ok}/{SEEDS} (worst {worst:.5})"));
        }
    }
    outcome(pass, format!("need >= 40/60 within (1+a), a=0.1; {}", lines.join("; ")))
}

// ---------- criterion 7: exhaustive oracles ----------

fn brute_shortest_width(sorted: &[f64], count: usize) -> (f64, f64) {
    // For every left end, grow to the right until `count` values are covered.
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..sorted.len() {
        let mut covered = 0;
        for j in i..sorted.len() {
            covered += 1;
            if covered == count {
                let w = sorted[j] - sorted[i];
                if w < best.0 {
                    best = (w, sorted[i]);
                }
                break;
            }
        }
    }
    best
}

fn c7_oracles(_: &mut Shared) -> Outcome {
    let mut r = RngStream::new(7).phase("oracles").rng();
    let mut failures = Vec::new();

    // shortest_interval versus the quadratic scan
    let mut si_bad = 0;
    for case in 0..10_000 {
        let m = r.random_range(1..=200);
        let mut v: Vec<f64> = if case % 2 == 0 {
            (0..m).map(|_| r.random_range(-1e3..1e3)).collect()
        } else {
            (0..m).map(|_| r.random_range(0..20) as f64).collect()
        };
        v.sort_by(f64::total_cmp);
        let count = r.random_range(1..=m);
        let got = shortest_interval(&v, count).unwrap();
        let (w, lo) = brute_shortest_width(&v, count);
        let inside = v.iter().filter(|x| got.contains(**x)).count();
        if got.width() != w || got.lo != lo || inside < count {
            si_bad += 1;
        }
    }
    if si_bad > 0 {
        failures.push(format!("shortest_interval {si_bad} mismatches"));
    }

    // ANN contract versus an exhaustive scan, for both backends
    let mut ann_bad = 0;
    let mut ann_queries = 0;
    for case in 0..200 {
        let k = r.random_range(1..=40);
        let d = r.random_range(1..=16);
        let centers = CenterSet::new(d, (0..k * d).map(|_| r.random_range(-10.0..10.0)).collect()).unwrap();
        let indexes = [
            AnnIndex::linear_scan(&centers),
            AnnIndex::hyperplane_lsh(&centers, 4, 6, RngStream::new(case)).unwrap(),
        ];
        for _ in 0..50 {
            let q: Vec<f64> = (0..d).map(|_| r.random_range(-12.0..12.0)).collect();
            let rad = r.random_range(0.01..15.0);
            let nearest = centers.rows().map(|c| dist(&q, c)).fold(f64::INFINITY, f64::min);
            for idx in &indexes {
                ann_queries += 1;
                let got = idx.query(&q, rad);
                let ok = match got {
                    Some(j) => dist(&q, centers.row(j)) <= 2.0 * rad,
                    None => nearest > rad,
                };
                if !ok {
                    ann_bad += 1;
                }
            }
        }
    }
    if ann_bad > 0 {
        failures.push(format!("ann {ann_bad}/{ann_queries} contract violations"));
    }

    // nn_predictor versus brute force with smallest-index ties
    let mut nn_bad = 0;
    for _ in 0..100 {
        let d = r.random_range(1..=5);
        let nref = r.random_range(1..=60);
        let refp = PointSet::new(d, (0..nref * d).map(|_| r.random_range(0..6) as f64).collect()).unwrap();
        let refl = LabelAssignment::complete((0..nref).map(|_| r.random_range(0..4)).collect());
        let q = PointSet::new(d, (0..100 * d).map(|_| r.random_range(0..6) as f64 + 0.5 * r.random_range(0..2) as f64).collect()).unwrap();
        let got = nn_predictor(&refp, &refl, &q).unwrap();
        for i in 0..q.n() {
            let mut best = (0, f64::INFINITY);
            for j in 0..nref {
                let dd = sq_dist(q.row(i), refp.row(j));
                if dd < best.1 {
                    best = (j, dd);
                }
            }
            nn_bad += usize::from(got.get(i) != refl.get(best.0));
        }
    }
    if nn_bad > 0 {
        failures.push(format!("nn_predictor {nn_bad} mismatches"));
    }

    // geometric_median versus grid search on small 2-D sets
    let mut gm_bad = 0;
    for case in 0..150 {
        let n = r.random_range(1..=30);
        let p = PointSet::new(2, (0..2 * n).map(|_| r.random_range(-5.0..5.0)).collect()).unwrap();
        let eps = [0.1, 0.01, 0.001][case % 3];
        let m = geometric_median(&p, eps).unwrap();
        let f = median_objective(&p, &m);
        let grid = grid_median(&p);
        if f > (1.0 + eps) * grid + 1e-12 {
            gm_bad += 1;
        }
    }
    if gm_bad > 0 {
        failures.push(format!("geometric_median {gm_bad}/150 above (1+eps) x grid optimum"));
    }

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("shortest_interval 10000 cases, ann {ann_queries} queries, nn_predictor 10000 queries, geometric_median 150 sets: all agree")
        } else {
            failures.join("; ")
        },
    )
}

/// Grid search with two rounds of zooming; its value upper-bounds the optimum.
fn grid_median(p: &PointSet) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for x in p.rows() {
        for j in 0..2 {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    let mut best = (f64::INFINITY, [0.0; 2]);
    for x in p.rows() {
        let f = median_objective(p, x);
        if f < best.0 {
            best = (f, [x[0], x[1]]);
        }
    }
    const G: usize = 120;
    for _round in 0..3 {
        let step = [(hi[0] - lo[0]) / G as f64, (hi[1] - lo[1]) / G as f64];
        for a in 0..=G {
            for b in 0..=G {
                let y = [lo[0] + a as f64 * step[0], lo[1] + b as f64 * step[1]];
                let f = median_objective(p, &y);
                if f < best.0 {
                    best = (f, y);
                }
            }
        }
        for j in 0..2 {
            lo[j] = best.1[j] - 2.0 * step[j];
            hi[j] = best.1[j] + 2.0 * step[j];
        }
    }
    best.0
}

// ---------- criterion 8: estimator inequalities ----------

fn cost_1d(xs: &[f64], c: f64) -> f64 {
    xs.iter().map(|x| (x - c) * (x - c)).sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn c8_estimator(_: &mut Shared) -> Outcome {
    let mut r = RngStream::new(8).phase("estimator").rng();
    let mut notes = Vec::new();
    let mut pass = true;

    // Trimmed-mean bound with the (1-α)² exponent.
    let mut violations = 0;
    for _ in 0..10_000 {
        let alpha: f64 = r.random_range(0.001..0.5);
        let n = r.random_range(2..=200);
        let q_max = (alpha * n as f64).floor() as usize;
        let q = r.random_range(0..=q_max);
        let p = n - q;
        let spread = r.random_range(0.1..100.0);
        let shift = r.random_range(-1e3..1e3);
        let pts: Vec<f64> = (0..p).map(|_| r.random_range(-spread..spread)).collect();
        let outl: Vec<f64> = (0..q).map(|_| shift + r.random_range(-spread..spread)).collect();
        let x: Vec<f64> = pts.iter().chain(&outl).copied().collect();
        let lhs = cost_1d(&x, mean(&pts));
        let base = cost_1d(&x, mean(&x));
        let rhs = (1.0 + alpha / ((1.0 - alpha) * (1.0 - alpha))) * base;
        if lhs > rhs * (1.0 + 1e-12) + 1e-9 {
            violations += 1;
        }
    }
    pass &= violations == 0;
    notes.push(format!("trimmed-mean bound: {violations} violations / 10000"));

    // Interval mass and width on clean data with planted outliers.
    let alpha = 0.05;
    let mut mass_ok = 0;
    let mut width_ok = 0;
    for seed in 0..100 {
        let mut g = RngStream::new(seed).phase("interval-data").rng();
        let clean: Vec<f64> = (0..1900).map(|_| g.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let outliers = (0..100).map(|_| 50.0 + g.random_range(0.0..10.0));
        let values: Vec<f64> = clean.iter().copied().chain(outliers).collect();
        let est = crd_est_detailed(&values, alpha, RngStream::new(seed));
        let frac = est.test_inside as f64 / est.test_len as f64;
        mass_ok += usize::from(frac >= 1.0 - 6.0 * alpha);
        let c = mean(&clean);
        let sigma = (cost_1d(&clean, c) / (2.0 * clean.len() as f64)).sqrt();
        width_ok += usize::from(est.interval.width() <= 2.0 * sigma / alpha.sqrt());
    }
    pass &= mass_ok >= 95 && width_ok >= 95;
    notes.push(format!("interval mass >= 1-6a in {mass_ok}/100, width <= 2s/sqrt(a) in {width_ok}/100"));

    // Subsample centroid variance, p = 1/2, conditioned on a non-empty sample.
    const GAMMA: f64 = 2.0;
    let mut worst: f64 = 0.0;
    for &size in &[2usize, 3, 5, 10, 50, 200] {
        let xs: Vec<f64> = (0..size).map(|_| r.random_range(-10.0..10.0)).collect();
        let xbar = mean(&xs);
        let spread = cost_1d(&xs, xbar);
        let trials = 40_000;
        let mut acc = 0.0;
        let mut done = 0;
        while done < trials {
            let s: Vec<f64> = xs.iter().copied().filter(|_| r.random::<bool>()).collect();
            if s.is_empty() {
                continue;
            }
            let e = mean(&s) - xbar;
            acc += e * e;
            done += 1;
        }
        let gamma_hat = acc / trials as f64 * (size * size) as f64 / spread;
        worst = worst.max(gamma_hat);
    }
    pass &= worst <= GAMMA;
    notes.push(format!("subsample variance: worst empirical gamma {worst:.3} <= {GAMMA}"));

    outcome(pass, notes.join("; "))
}

fn c9_jl(shared: &mut Shared) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut r = RngStream::new(9).phase("jl").rng();

    let (n, d) = (1000usize, 2000usize);
    let target = jl_dimension(n, 0.25, 8.0);
    let proj = build_projection(d, target, RngStream::new(9)).unwrap();
    let pts = PointSet::new(d, (0..n * d).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
    let img = proj.apply_points(&pts).unwrap();
    let pairs = 10_000;
    let mut inside = 0;
    for _ in 0..pairs {
        let a = r.random_range(0..n);
        let mut b = r.random_range(0..n);
        while b == a {
            b = r.random_range(0..n);
        }
        let ratio = dist(img.row(a), img.row(b)) / dist(pts.row(a), pts.row(b));
        inside += usize::from((0.8..=1.25).contains(&ratio));
    }
    pass &= inside * 100 >= 99 * pairs;
    notes.push(format!("{inside}/{pairs} pairs within [4/5, 5/4] at {d}->{target} dims"));

    // Property-suite instances have d <= 100, where both stages stay the
    // identity; exercise the validated stage on a high-dimensional mixture too.
    let m = mixture(5, 2000, 1000, 99);
    let spec = PredictorSpec::new(CorruptionMode::Uniform, 0.05, 99).unwrap();
    let pred = corrupt(&m.labels, 5, &spec, None).unwrap();
    let cfg = FastConfig::default();
    let main = cluster_with_predictor(&m.points, &pred, 5, 0.05, RngStream::new(99)).unwrap();
    let emb = build_center_embedding(m.points.d(), m.points.n(), &m.points, &main.centers, &cfg, RngStream::new(99)).unwrap();
    pass &= !emb.fell_back && !emb.inner.is_identity();
    notes.push(format!(
        "high-dim validation: dims {}->{}->{}, worst ratio {:.4}, fell back: {}",
        m.points.d(),
        emb.outer.out_dim(),
        emb.inner.out_dim(),
        emb.worst_ratio,
        emb.fell_back
    ));

    let suite = suite(shared);
    pass &= suite.fast_fallbacks == 0;
    notes.push(format!(
        "property-suite fast runs: {} fallbacks in {}",
        suite.fast_fallbacks, suite.fast_runs
    ));
    outcome(pass, notes.join("; "))
}

// ---------- criterion 10: CLI determinism ----------

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_augclust"))
        .args(args)
        .output()
        .expect("spawn augclust")
}

fn c10_determinism(_: &mut Shared) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let synth_dir = d.join("synth");
    let gen = run_cli(&["gen-synth", "--k", "4", "--d", "40", "--scale", "100", "--out-dir", &s(&synth_dir)]);
    if !gen.status.success() {
        return outcome(false, format!("gen-synth failed: {}", String::from_utf8_lossy(&gen.stderr)));
    }
    let points = s(&synth_dir.join("points.csv"));
    let labels = s(&synth_dir.join("labels.csv"));
    let gt = s(&synth_dir.join("ground_truth.json"));

    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("main", vec!["--algo", "main", "--alpha", "auto", "--predictor", "uniform:0.5"]),
        ("fast", vec!["--algo", "fast", "--alpha", "0.1", "--predictor", "adversarial:0.05"]),
        ("deletion", vec!["--algo", "deletion", "--predictor", "deletion:0.8"]),
        ("kmedian", vec!["--algo", "kmedian", "--alpha", "0.1", "--predictor", "kmeanspp:5+uniform:0.1"]),
    ];
    let mut failures = Vec::new();
    let mut compared = 0;
    for (name, extra) in &runs {
        let mut reports = Vec::new();
        for threads in ["1", "2", "8"] {
            let out = s(&d.join(format!("{name}-{threads}.json")));
            let lab = s(&d.join(format!("{name}-{threads}.labels")));
            let mut args = vec![
                "--threads", threads, "cluster", "--points", &points, "--labels", &labels, "--k", "4", "--seed", "11",
                "--ground-truth", &gt, "--out", &out, "--labels-out", &lab,
            ];
            args.extend(extra.iter().copied());
            let o = run_cli(&args);
            if !o.status.success() {
                failures.push(format!("{name}@{threads}: {}", String::from_utf8_lossy(&o.stderr).trim()));
                continue;
            }
            let rep = ClusterReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
            let json = serde_json::to_string(&rep.without_timings()).unwrap();
            reports.push((json, std::fs::read(&lab).unwrap()));
        }
        if reports.len() == 3 {
            compared += 1;
            if reports.iter().any(|r| r != &reports[0]) {
                failures.push(format!("{name}: reports differ across thread counts"));
            }
        }
    }

    let mut tables = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = s(&d.join(format!("bench-{threads}.csv")));
        let o = run_cli(&[
            "--threads", threads, "bench", "--points", &points, "--labels", &labels, "--k", "4", "--trials", "3",
            "--algos", "main,fast,naive,sampling,kmeanspp", "--sweep", "lambda=0:0.25:0.5", "--seed", "5", "--out", &out,
        ]);
        if !o.status.success() {
            failures.push(format!("bench@{threads}: {}", String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        tables.push(std::fs::read(&out).unwrap());
    }
    if tables.len() == 3 && tables.iter().any(|t| t != &tables[0]) {
        failures.push("bench tables differ across thread counts".to_string());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{compared} cluster configurations and a bench sweep identical (minus timings) at 1, 2 and 8 threads")
        } else {
            failures.join("; ")
        },
    )
}
