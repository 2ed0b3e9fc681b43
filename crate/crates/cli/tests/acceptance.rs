//! Acceptance criteria for the tracker and its harness, one line per
//! criterion. Exits non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sigmil::evaluation::{report, Metric, ResultTable, TrackResult};
use sigmil::mil_core::{
    bag_log_likelihood, greedy_select, noisy_or, Bag, Instance, StandardLikelihood, StrongClassifier,
};
use sigmil::sampling::{positive_locations, search_locations, SampleConfig};
use sigmil::sig_boost::{extended_log_likelihood, extended_noisy_or, select_refined, AlphaConfig, ExtendedLikelihood};
use sigmil::significance::{instance_significance, SignificanceEstimate};
use sigmil::synth::{generate, SynthConfig};
use sigmil::weak_learners::{WeakClassifier, WeakPool, SIGMA_FLOOR};
use sigmil::{run, BoundingBox, GrayFrame, IntegralImage, Rect, TrackerConfig};
use sigmil_cli::commands::{
    cmd_bench, cmd_synth, cmd_track, BenchArgs, SynthArgs, TrackArgs, BASELINE, BOXES_FILE, METHOD,
};
use sigmil_cli::config::Overrides;

const ORACLE_SEEDS: u64 = 100;
const ORACLE_MAX_WEAK: usize = 8;
const ORACLE_MAX_SELECT: usize = 3;
const ORACLE_MAX_BAG: usize = 5;
const ORACLE_MAX_SECONDS: f64 = 10.0;

const RANDOM_CASES: u64 = 1000;
const REDUCTION_TOL: f64 = 1e-12;
const SIGNIFICANCE_TOL: f64 = 1e-12;
const INTEGRAL_FRAMES: u64 = 100;
const INTEGRAL_RECTS: usize = 100;
const INTEGRAL_MAX_SIDE: u32 = 64;
const INTEGRAL_TOL: f64 = 1e-9;
const WEAK_TOL: f64 = 1e-9;
const WEAK_RANDOM_UPDATES: usize = 1000;

const POSITIVES_AT_RADIUS_4: usize = 45;
const SEARCH_AT_RADIUS_2: usize = 9;

const E2E_MAX_CLE: f64 = 5.0;
const E2E_MIN_VOR: f64 = 0.6;
const E2E_MAX_SECONDS: f64 = 60.0;
const ABLATION_SEEDS: u64 = 10;
const DETERMINISM_SEED: u64 = 7;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_pool(m: usize, r: &mut StdRng) -> WeakPool {
    let mut pool = WeakPool::new(m, 0.85).unwrap();
    for c in &mut pool.classifiers {
        *c = WeakClassifier {
            mu1: r.random_range(-1.0..1.0),
            mu0: r.random_range(-1.0..1.0),
            sigma1: r.random_range(0.2..1.5),
            sigma0: r.random_range(0.2..1.5),
            pos_initialized: true,
            neg_initialized: true,
            ..*c
        };
    }
    pool
}

/// Random bags with at least one of each label; positives carry random
/// significance.
fn random_bags(m: usize, r: &mut StdRng) -> Vec<Bag> {
    let count = r.random_range(2..=6);
    (0..count)
        .map(|b| {
            let label = match b {
                0 => true,
                1 => false,
                _ => r.random_bool(0.5),
            };
            let n = r.random_range(1..=ORACLE_MAX_BAG);
            let instances: Vec<Instance> = (0..n)
                .map(|_| Instance {
                    location: BoundingBox::new(0, 0, 1, 1),
                    features: (0..m).map(|_| r.random_range(-2.0..2.0)).collect(),
                })
                .collect();
            let mut bag = if label {
                Bag::positive(instances)
            } else {
                Bag::negative(instances)
            }
            .unwrap();
            if label {
                let sig = (0..n).map(|_| r.random_range(0.01..=1.0)).collect();
                bag.significance = Some(SignificanceEstimate::from_instances(sig).unwrap());
            }
            bag
        })
        .collect()
}

/// Per-round argmax by exhaustive evaluation of every remaining candidate.
fn brute_force_select(m: usize, k: usize, objective: impl Fn(&StrongClassifier) -> f64) -> Vec<usize> {
    let mut selected: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..m).filter(|c| !selected.contains(c)) {
            let mut trial = selected.clone();
            trial.push(c);
            let v = objective(&StrongClassifier::new(trial));
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}

fn greedy_oracle() -> Outcome {
    let start = Instant::now();
    let alpha = AlphaConfig::default();
    for seed in 0..ORACLE_SEEDS {
        let mut r = rng(seed);
        let m = r.random_range(1..=ORACLE_MAX_WEAK);
        let k = r.random_range(1..=ORACLE_MAX_SELECT.min(m));
        let pool = random_pool(m, &mut r);
        let bags = random_bags(m, &mut r);

        let got = greedy_select(&pool, &bags, k, &StandardLikelihood).unwrap().selected;
        let want = brute_force_select(m, k, |sc| bag_log_likelihood(&bags, sc, &pool).unwrap());
        ensure!(
            got == want,
            "seed {seed}, standard likelihood: {got:?} vs oracle {want:?}"
        );

        let got = greedy_select(&pool, &bags, k, &ExtendedLikelihood { alpha })
            .unwrap()
            .selected;
        let want = brute_force_select(m, k, |sc| extended_log_likelihood(&bags, sc, &pool, &alpha).unwrap());
        ensure!(
            got == want,
            "seed {seed}, extended likelihood: {got:?} vs oracle {want:?}"
        );
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < ORACLE_MAX_SECONDS, "took {secs:.2} s");
    Ok(format!("{ORACLE_SEEDS} seeds, both likelihoods, {secs:.2} s"))
}

fn reduction_identities() -> Outcome {
    let unit = AlphaConfig::new(1.0).unwrap();
    let (mut worst_or, mut worst_ll) = (0.0f64, 0.0f64);
    for case in 0..RANDOM_CASES {
        let mut r = rng(10_000 + case);
        let n = r.random_range(1..=8);
        let probs: Vec<f64> = (0..n).map(|_| r.random_range(1e-6..1.0 - 1e-6)).collect();
        let level = r.random_range(0.01..=1.0);
        let ext = extended_noisy_or(&probs, &vec![level; n], level, 1.0).unwrap();
        worst_or = worst_or.max((ext - noisy_or(&probs).unwrap()).abs());

        let m = r.random_range(1..=ORACLE_MAX_WEAK);
        let k = r.random_range(0..=m.min(4));
        let pool = random_pool(m, &mut r);
        let mut bags = random_bags(m, &mut r);
        for bag in bags.iter_mut().filter(|b| b.label) {
            bag.significance = Some(SignificanceEstimate::uniform(bag.len()));
        }
        let sc = StrongClassifier::new((0..k).collect());
        let diff =
            extended_log_likelihood(&bags, &sc, &pool, &unit).unwrap() - bag_log_likelihood(&bags, &sc, &pool).unwrap();
        worst_ll = worst_ll.max(diff.abs());

        let refined = select_refined(&pool, &bags, k, &unit).unwrap();
        let plain = greedy_select(&pool, &bags, k, &StandardLikelihood).unwrap();
        ensure!(
            refined == plain,
            "case {case}: {:?} vs {:?}",
            refined.selected,
            plain.selected
        );
    }
    ensure!(worst_or <= REDUCTION_TOL, "noisy-or gap {worst_or:e}");
    ensure!(worst_ll <= REDUCTION_TOL, "likelihood gap {worst_ll:e}");
    Ok(format!(
        "{RANDOM_CASES} cases, max gaps {worst_or:.1e} / {worst_ll:.1e}, selections equal"
    ))
}

/// Enumerates y in {0, 1}: p(y) prod_k p(y | H_k) / p(y), normalized.
fn two_hypothesis_posterior(preds: &[f64], prior: f64) -> f64 {
    let clamp = |p: f64| p.clamp(1e-6, 1.0 - 1e-6);
    let mut joint = [0.0; 2];
    for (y, slot) in joint.iter_mut().enumerate() {
        let py = if y == 1 { prior } else { 1.0 - prior };
        let likelihood: f64 = preds
            .iter()
            .map(|&p| if y == 1 { clamp(p) } else { 1.0 - clamp(p) } / py)
            .product();
        *slot = py * likelihood;
    }
    joint[1] / (joint[0] + joint[1])
}

fn significance_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for case in 0..RANDOM_CASES {
        let mut r = rng(20_000 + case);
        let n = r.random_range(1..=5);
        let preds: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let prior = r.random_range(0.02..0.98);
        let got = instance_significance(&preds, prior).unwrap();
        worst = worst.max((got - two_hypothesis_posterior(&preds, prior)).abs());
    }
    ensure!(worst <= SIGNIFICANCE_TOL, "max deviation {worst:e}");
    let symmetric = instance_significance(&[0.9, 0.1], 0.5).unwrap();
    ensure!(symmetric == 0.5, "(0.9, 0.1) at prior 0.5 gave {symmetric:e}");
    Ok(format!(
        "{RANDOM_CASES} tuples, max deviation {worst:.1e}; (0.9, 0.1) -> 0.5 exactly"
    ))
}

fn integral_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for f in 0..INTEGRAL_FRAMES {
        let mut r = rng(30_000 + f);
        let (w, h) = (
            r.random_range(1..=INTEGRAL_MAX_SIDE),
            r.random_range(1..=INTEGRAL_MAX_SIDE),
        );
        let frame = GrayFrame::new(w, h, (0..w * h).map(|_| r.random_range(0.0..=1.0)).collect()).unwrap();
        let ii = IntegralImage::new(&frame);
        for _ in 0..INTEGRAL_RECTS {
            let (x, y) = (r.random_range(0..w), r.random_range(0..h));
            let rect = Rect::new(x, y, r.random_range(1..=w - x), r.random_range(1..=h - y));
            let naive: f64 = (y..y + rect.h)
                .flat_map(|yy| (x..x + rect.w).map(move |xx| (xx, yy)))
                .map(|(xx, yy)| frame.get(xx, yy))
                .sum();
            worst = worst.max((ii.rect_sum(rect).unwrap() - naive).abs());
        }
    }
    ensure!(worst <= INTEGRAL_TOL, "max error {worst:e}");
    Ok(format!(
        "{INTEGRAL_FRAMES} frames x {INTEGRAL_RECTS} rects, max error {worst:.1e}"
    ))
}

fn weak_learner_arithmetic() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= WEAK_TOL;

    // first update replaces: pos {0.2, 0.4, 0.9}, neg {-1, 1}
    let mut c = WeakClassifier::new(0);
    c.update(&[0.2, 0.4, 0.9], &[-1.0, 1.0], 0.85);
    let pos_std = (((0.2f64 - 0.5).powi(2) + (0.4f64 - 0.5).powi(2) + (0.9f64 - 0.5).powi(2)) / 3.0).sqrt();
    ensure!(
        close(c.mu1, 0.5) && close(c.sigma1, pos_std),
        "first positive update: {c:?}"
    );
    ensure!(
        close(c.mu0, 0.0) && close(c.sigma0, 1.0),
        "first negative update: {c:?}"
    );

    // blend: mu = 0.85 * 0.5 + 0.15 * 0.6, sigma = 0.85 * s + 0.15 * 0.1
    c.update(&[0.5, 0.7], &[], 0.85);
    ensure!(
        close(c.mu1, 0.515) && close(c.sigma1, 0.85 * pos_std + 0.015),
        "blended update: {c:?}"
    );
    ensure!(
        close(c.mu0, 0.0) && close(c.sigma0, 1.0),
        "empty batch changed the negatives: {c:?}"
    );

    let frozen = c;
    c.update(&[3.0, -2.0], &[4.0, 4.5], 1.0);
    ensure!(c == frozen, "learning rate 1 changed the classifier");

    // log-odds of N(1, 1) over N(-1, 1) is 2f, clamped at 5
    let unit = WeakClassifier {
        mu1: 1.0,
        mu0: -1.0,
        sigma1: 1.0,
        sigma0: 1.0,
        pos_initialized: true,
        neg_initialized: true,
        feature_id: 0,
    };
    ensure!(
        close(unit.log_odds(0.75), 1.5) && unit.log_odds(9.0) == 5.0,
        "log-odds closed form"
    );

    let mut r = rng(40_000);
    let mut c = WeakClassifier::new(0);
    let mut lowest = f64::INFINITY;
    for _ in 0..WEAK_RANDOM_UPDATES {
        let v = r.random_range(-1.0..1.0);
        let spread = if r.random_bool(0.5) {
            0.0
        } else {
            r.random_range(0.0..1e-3)
        };
        let n = r.random_range(1..4);
        let pos: Vec<f64> = (0..n).map(|i| v + spread * i as f64).collect();
        let neg = vec![v; r.random_range(0..3)];
        c.update(&pos, &neg, r.random_range(0.0..=1.0));
        lowest = lowest.min(c.sigma1).min(c.sigma0);
    }
    ensure!(lowest >= SIGMA_FLOOR, "sigma fell to {lowest:e}");
    Ok(format!(
        "closed forms within {WEAK_TOL:e}; min sigma {lowest:.1e} after {WEAK_RANDOM_UPDATES} updates"
    ))
}

fn lattice_geometry() -> Outcome {
    let center = BoundingBox::new(140, 100, 32, 32);
    let enumerate = |r: f64| -> Vec<BoundingBox> {
        let reach = r.ceil() as i32;
        (-reach..=reach)
            .flat_map(|dy| (-reach..=reach).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| f64::from(dx * dx + dy * dy).sqrt() < r)
            .map(|(dx, dy)| center.translated(dx, dy))
            .collect()
    };
    let pos = positive_locations(&center, 320, 240, &SampleConfig::default()).unwrap();
    let cfg = SampleConfig {
        search_radius: 2.0,
        ..SampleConfig::default()
    };
    let search = search_locations(&center, 320, 240, &cfg);
    ensure!(pos.len() == POSITIVES_AT_RADIUS_4, "{} positives", pos.len());
    ensure!(search.len() == SEARCH_AT_RADIUS_2, "{} search locations", search.len());
    ensure!(
        pos == enumerate(4.0) && search == enumerate(2.0),
        "sets differ from enumeration"
    );
    Ok(format!(
        "{} positives at r=4, {} search boxes at s=2",
        pos.len(),
        search.len()
    ))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let seq = generate(&SynthConfig::default()).unwrap();
    let boxes = run(seq.gray_frames(), seq.ground_truth[0], TrackerConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let metrics = report(&TrackResult {
        name: "synthetic".into(),
        boxes,
        ground_truth: seq.ground_truth.iter().copied().map(Some).collect(),
    })
    .unwrap();
    ensure!(metrics.mean_cle <= E2E_MAX_CLE, "mean CLE {:.3}", metrics.mean_cle);
    ensure!(metrics.mean_vor >= E2E_MIN_VOR, "mean VOR {:.3}", metrics.mean_vor);
    ensure!(secs < E2E_MAX_SECONDS, "took {secs:.1} s");
    Ok(format!(
        "200 frames: mean CLE {:.2} px, mean VOR {:.3}, {secs:.1} s",
        metrics.mean_cle, metrics.mean_vor
    ))
}

/// One root per seed, so that each sequence is tracked under its own seed.
fn seed_root(root: &Path, seed: u64) -> std::path::PathBuf {
    root.join(format!("seed{seed}"))
}

fn synth_benchmark(root: &Path) {
    for seed in 0..ABLATION_SEEDS {
        let out = seed_root(root, seed).join(format!("synth{seed}"));
        cmd_synth(&SynthArgs {
            out,
            frames: 200,
            sigma: 5.0,
            step: 5.0,
            seed,
        })
        .unwrap();
    }
}

fn check_layout(dir: &Path) -> Result<(), String> {
    for (stem, title) in [("cle", Metric::Cle.title()), ("vor", Metric::Vor.title())] {
        let csv = fs::read_to_string(dir.join(format!("{stem}.csv"))).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        ensure!(rows[0] == "Seq,sigmil,baseline", "{stem} header {:?}", rows[0]);
        ensure!(rows.len() == 3, "{stem} has {} rows", rows.len());
        ensure!(rows[2].starts_with("Average,"), "{stem} lacks an Average row");
        let text = fs::read_to_string(dir.join(format!("{stem}.txt"))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        ensure!(lines[0] == title, "{stem} caption {:?}", lines[0]);
        ensure!(
            lines[2].starts_with("---") && lines[lines.len() - 2].starts_with("==="),
            "{stem} rules"
        );
        ensure!(
            lines.last().unwrap().trim_start().starts_with("Average"),
            "{stem} text lacks Average"
        );
    }
    Ok(())
}

fn bench_and_ablation(root: &Path) -> Outcome {
    let mut combined = ResultTable::new(vec![METHOD.into(), BASELINE.into()]);
    for seed in 0..ABLATION_SEEDS {
        let dir = seed_root(root, seed);
        let table = cmd_bench(&BenchArgs {
            root: dir.clone(),
            out: None,
            baseline: true,
            overrides: Overrides {
                seed: Some(seed),
                ..Overrides::default()
            },
        })
        .map_err(|e| e.to_string())?;
        check_layout(&dir)?;
        let (name, cells) = table.rows.into_iter().next().unwrap();
        combined.push(name, cells).unwrap();
    }
    let vor = combined.averages(Metric::Vor);
    let cle = combined.averages(Metric::Cle);
    ensure!(vor[0] >= vor[1], "mean VOR {:.4} below baseline {:.4}", vor[0], vor[1]);
    Ok(format!(
        "table layout ok; mean VOR {:.4} vs baseline {:.4} (CLE {:.2} vs {:.2}) over {ABLATION_SEEDS} seeds",
        vor[0], vor[1], cle[0], cle[1]
    ))
}

fn determinism(root: &Path) -> Outcome {
    let out = tempfile::tempdir().unwrap();
    let boxes = |name: &str| {
        let dir = out.path().join(name);
        cmd_track(&TrackArgs {
            seq: seed_root(root, 0).join("synth0"),
            gt: None,
            out: dir.clone(),
            replay: None,
            debug_significance: false,
            overrides: Overrides {
                seed: Some(DETERMINISM_SEED),
                ..Overrides::default()
            },
        })
        .unwrap();
        fs::read(dir.join(BOXES_FILE)).unwrap()
    };
    let (a, b) = (boxes("a"), boxes("b"));
    ensure!(a == b, "box files differ");
    Ok(format!(
        "seed {DETERMINISM_SEED}: two runs, {} identical bytes",
        a.len()
    ))
}

fn main() {
    let bench = tempfile::tempdir().unwrap();
    synth_benchmark(bench.path());
    let criteria: Vec<(&str, Criterion)> = vec![
        ("greedy selection oracle", Box::new(greedy_oracle)),
        ("reduction identities", Box::new(reduction_identities)),
        ("significance oracle", Box::new(significance_oracle)),
        ("integral image oracle", Box::new(integral_oracle)),
        ("weak learner arithmetic", Box::new(weak_learner_arithmetic)),
        ("lattice geometry", Box::new(lattice_geometry)),
        ("end-to-end synthetic tracking", Box::new(end_to_end)),
        (
            "bench tables and ablation",
            Box::new(|| bench_and_ablation(bench.path())),
        ),
        ("track determinism", Box::new(|| determinism(bench.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
