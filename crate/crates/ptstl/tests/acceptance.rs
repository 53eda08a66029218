//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line with its measured numbers (visible with `--nocapture`).
//!
//! 1. Optimized evaluator agrees exactly with the naive recursive oracle on
//!    10^4 randomized cases (depth <= 4, length <= 30, all k), under 10 s.
//! 2. `confusion_counts` agrees exactly with the brute-force tally on 10^3
//!    randomized datasets.
//! 3. Avoidance guarantee: 500 randomized closed-loop runs with all bounds
//!    >= 2 and all control sets >= 2 never satisfy the cause at any k >= 1.
//! 4. Planted-cause recovery: F_1 >= 0.99 on >= 95% of 50 seeded instances.
//! 5. Region avoidance reaches zero violations within 8 iterations on >= 9
//!    of 10 seeds for 3 danger-region configs; terminal heatmap puts no
//!    mass on danger cells.
//! 6. Traffic baselines inside 46 +/- 15 and 79 +/- 15 points; the base
//!    instance's closed loop cuts violations by >= 80% within 8 iterations
//!    (the congested instance is reported with a 30% regression floor; its
//!    published endpoint is a soft target of the reconstructed model).
//! 7. Every clause mined in criteria 5-6 has the controllable-cause shape,
//!    with the bound in the grid and the general part inside the operator
//!    budget.
//! 8. The region-avoidance pipeline writes byte-identical artifacts when
//!    rerun with the same seed.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use common::{
    brute_confusion, naive_evaluate, random_dataset, random_formula, random_guaranteed_cause,
    random_trace, RandomWalkPlant,
};
use ptstl::control::{
    check_guarantee, run_closed_loop, synthesize_iterative, FallbackMode, SynthesisOutcome,
    SynthesisRun,
};
use ptstl::io::{
    visit_ratios, write_dataset, write_synthesis_report, DatasetMeta, PlantKind, RunConfig,
};
use ptstl::logic::{parse_formula, ControlSpace, Formula, Trace};
use ptstl::mining::{
    confusion_counts, formula_search, score_cause, CauseClause, CombinedCause, Dataset,
    LabeledTrace, ParameterDomain, SearchParams,
};
use ptstl::plants::grid::{DangerLabeler, GridConfig, GridPlant};
use ptstl::plants::simulate_random;
use ptstl::seed::{derive_seed, rng_for};
use rand::Rng;

#[test]
fn criterion_1_semantics_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = rng_for(0xACC, "criterion-1", 0);
    let mut evaluations = 0u64;
    for _ in 0..10_000 {
        let phi = random_formula(&mut rng, 4, 2, 1);
        let trace = random_trace(&mut rng, 2, 1, 30);
        for k in 0..trace.len() {
            assert_eq!(
                phi.evaluate(&trace, k),
                naive_evaluate(&phi, &trace, k),
                "disagreement on {phi} at k={k}"
            );
            evaluations += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion 1 took {elapsed:?}, budget 10 s"
    );
    println!(
        "criterion 1 (semantics oracle equivalence): PASS — 10000 formulas, \
         {evaluations} evaluations, exact agreement in {elapsed:.2?}"
    );
}

#[test]
fn criterion_2_confusion_count_equivalence() {
    let started = Instant::now();
    let mut rng = rng_for(0xACC, "criterion-2", 0);
    let mut checked = 0u32;
    while checked < 1_000 {
        let data = random_dataset(&mut rng, 2, 1, 3, 10, 18);
        let phi = random_formula(&mut rng, 3, 2, 1);
        if phi.length() >= 10 {
            continue; // shorter than some trace; precondition of the op
        }
        let counts = confusion_counts(&phi, &data).unwrap();
        let (tp, fp, tn, fn_) = brute_confusion(&phi, &data);
        assert_eq!(
            (
                counts.true_positives,
                counts.false_positives,
                counts.true_negatives,
                counts.false_negatives
            ),
            (tp, fp, tn, fn_),
            "disagreement on {phi}"
        );
        checked += 1;
    }
    println!(
        "criterion 2 (confusion-count equivalence): PASS — 1000 randomized \
         datasets, exact agreement in {:.2?}",
        started.elapsed()
    );
}

#[test]
fn criterion_3_avoidance_guarantee() {
    let started = Instant::now();
    let mut rng = rng_for(0xACC, "criterion-3", 0);
    let mut steps_checked = 0u64;
    for run in 0..500u64 {
        let mut plant = RandomWalkPlant::random(&mut rng);
        let space = plant.space.clone();
        let cause = random_guaranteed_cause(&mut rng, plant.n, &space);
        assert!(check_guarantee(&cause, &space));
        let data = run_closed_loop(
            &mut plant,
            &|_: &[f64], _: &[f64]| false,
            &cause,
            2,
            40,
            derive_seed(0xACC, "criterion-3-run", run),
            FallbackMode::Uniform,
        )
        .unwrap();
        let psi = cause.formula();
        for lt in data.traces() {
            for k in 1..lt.trace.len() {
                assert!(
                    !psi.evaluate(&lt.trace, k),
                    "run {run}: cause satisfied at k={k}"
                );
                steps_checked += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 3 took {elapsed:?}, budget 60 s"
    );
    println!(
        "criterion 3 (avoidance guarantee): PASS — 500 randomized closed-loop \
         runs, {steps_checked} steps, zero satisfactions in {elapsed:.2?}"
    );
}

/// A random clause representable in the template grammar and grids used by
/// the search below: thresholds on the 5-step grid, inner windows over
/// {0, 1}, general operator count in [0, 1].
fn random_representable_clause(rng: &mut rand_chacha::ChaCha8Rng) -> CauseClause {
    let threshold = |rng: &mut rand_chacha::ChaCha8Rng| f64::from(rng.gen_range(0..=8) * 5);
    let atom = |rng: &mut rand_chacha::ChaCha8Rng| -> Formula {
        match rng.gen_range(0..5) {
            0 => Formula::state(0, ptstl::logic::Relation::Gt, threshold(rng)),
            1 => Formula::state(0, ptstl::logic::Relation::Lt, threshold(rng)),
            2 => Formula::state(1, ptstl::logic::Relation::Gt, threshold(rng)),
            3 => Formula::state(1, ptstl::logic::Relation::Lt, threshold(rng)),
            _ => Formula::control(0, f64::from(rng.gen_range(0..3))),
        }
    };
    let general = match rng.gen_range(0..6) {
        0 => atom(rng),
        1 => Formula::and(atom(rng), atom(rng)),
        2 => Formula::or(atom(rng), atom(rng)),
        3 => Formula::not(atom(rng)),
        4 => {
            let lo = rng.gen_range(0..=1);
            let hi = rng.gen_range(lo..=1);
            Formula::once(atom(rng), lo, hi).unwrap()
        }
        _ => {
            let lo = rng.gen_range(0..=1);
            let hi = rng.gen_range(lo..=1);
            Formula::historically(atom(rng), lo, hi).unwrap()
        }
    };
    CauseClause::new(0, f64::from(rng.gen_range(0..3)), rng.gen_range(1..=2), general).unwrap()
}

/// Random traces with sticky controls, labeled by the clause itself;
/// regenerated until at least one positive label exists.
fn dataset_labeled_by(clause: &CauseClause, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, "planted-acceptance", 0);
    let phi = clause.formula();
    let space = ControlSpace::new(vec![vec![0.0, 1.0, 2.0]]).unwrap();
    loop {
        let mut labeled = Vec::new();
        let mut positives = 0u64;
        for _ in 0..10 {
            let mut trace = Trace::new(2, 1);
            let mut u = f64::from(rng.gen_range(0..3));
            for _ in 0..80 {
                if rng.gen_bool(0.35) {
                    u = f64::from(rng.gen_range(0..3));
                }
                trace
                    .push(
                        vec![
                            f64::from(rng.gen_range(0..=40)),
                            f64::from(rng.gen_range(0..=40)),
                        ],
                        vec![u],
                    )
                    .unwrap();
            }
            let labels: Vec<bool> = (0..trace.len()).map(|k| phi.evaluate(&trace, k)).collect();
            positives += labels.iter().filter(|&&l| l).count() as u64;
            labeled.push(LabeledTrace::new(trace, labels).unwrap());
        }
        if positives > 0 {
            return Dataset::new(2, 1, space, labeled).unwrap();
        }
    }
}

#[test]
fn criterion_4_planted_cause_recovery() {
    let started = Instant::now();
    let domain = ParameterDomain::new(
        vec![
            (0..=8).map(|i| f64::from(i * 5)).collect(),
            (0..=8).map(|i| f64::from(i * 5)).collect(),
        ],
        vec![vec![0.0, 1.0, 2.0]],
        vec![1, 2],
        vec![0, 1],
    )
    .unwrap();
    let params = SearchParams::new(0, 1, Some(1), 0.0, 1.0).unwrap();
    let mut recovered = 0u32;
    for instance in 0..50u64 {
        let mut rng = rng_for(0xACC, "criterion-4", instance);
        let clause = random_representable_clause(&mut rng);
        let data = dataset_labeled_by(&clause, instance);
        let psi = formula_search(&params, &data, &domain).unwrap();
        let (_, f1) = score_cause(&psi, &data, 1.0).unwrap();
        if f1 >= 0.99 {
            recovered += 1;
        } else {
            println!(
                "  instance {instance}: planted {clause}, found {psi}, F1 = {f1:.4}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        recovered >= 48,
        "only {recovered}/50 instances reached F1 >= 0.99"
    );
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "criterion 4 took {elapsed:?}, budget 5 min"
    );
    println!(
        "criterion 4 (planted-cause recovery): PASS — {recovered}/50 instances \
         at F1 >= 0.99 (needed 48) in {elapsed:.2?}"
    );
}

// ---------------------------------------------------------------------------
// Shared runs for criteria 5, 7, and 8.

struct GridOutcome {
    region: &'static str,
    seed: u64,
    cause: CombinedCause,
    run: SynthesisRun,
}

fn grid_regions() -> Vec<(&'static str, GridConfig)> {
    vec![
        ("corner-blocks", GridConfig::arena_8x7()),
        (
            "opposite-corners",
            GridConfig::new(
                8,
                7,
                (5..8)
                    .flat_map(|r| (0..2).map(move |c| (r, c)))
                    .chain((0..3).flat_map(|r| (5..7).map(move |c| (r, c))))
                    .collect(),
            )
            .unwrap(),
        ),
        (
            "top-edge-strip",
            GridConfig::new(
                8,
                7,
                (0..2).flat_map(|r| (2..5).map(move |c| (r, c))).collect(),
            )
            .unwrap(),
        ),
    ]
}

fn grid_config_for(region: &GridConfig, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default_for(PlantKind::Grid);
    cfg.plant.grid = Some(region.clone());
    cfg.search.oc_min = 1;
    cfg.search.oc_max = 1;
    cfg.search.max_clauses = 1;
    cfg.search.min_gain = 0.0;
    cfg.search.beta = 1.0;
    cfg.run.traces = 20;
    cfg.run.length = 100;
    cfg.run.bound = 0.0;
    cfg.run.max_iterations = 8;
    cfg.run.seed = seed;
    cfg
}

fn run_grid(region: &GridConfig, seed: u64) -> (CombinedCause, SynthesisRun) {
    let cfg = grid_config_for(region, seed);
    let mut plant = GridPlant::new(region.clone()).unwrap();
    let labeler = DangerLabeler::new(region);
    synthesize_iterative(&mut plant, &labeler, &cfg.synthesis_config().unwrap()).unwrap()
}

fn grid_outcomes() -> &'static Vec<GridOutcome> {
    static OUTCOMES: OnceLock<Vec<GridOutcome>> = OnceLock::new();
    OUTCOMES.get_or_init(|| {
        let mut outcomes = Vec::new();
        for (region, grid) in grid_regions() {
            for seed in 1..=10u64 {
                let (cause, run) = run_grid(&grid, seed);
                outcomes.push(GridOutcome {
                    region,
                    seed,
                    cause,
                    run,
                });
            }
        }
        outcomes
    })
}

struct TrafficOutcome {
    name: &'static str,
    baseline_fraction: f64,
    final_fraction: f64,
    reduction: f64,
    cause: CombinedCause,
}

fn traffic_config(d0: f64, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default_for(PlantKind::Traffic);
    cfg.plant.traffic = Some(ptstl::plants::traffic::TrafficConfig::five_link(d0));
    cfg.search.oc_min = 0;
    cfg.search.oc_max = 0;
    cfg.search.max_clauses = 1;
    cfg.search.min_gain = 0.0;
    cfg.search.beta = 0.3;
    cfg.domain.state_step = 5.0;
    cfg.run.traces = 20;
    cfg.run.length = 100;
    cfg.run.bound = 0.0;
    cfg.run.max_iterations = 8;
    cfg.run.seed = seed;
    cfg
}

fn run_traffic(name: &'static str, d0: f64, seed: u64) -> TrafficOutcome {
    let cfg = traffic_config(d0, seed);
    let traffic = cfg.traffic_config().unwrap();
    let mut plant = ptstl::plants::traffic::TrafficPlant::new(traffic.clone()).unwrap();
    let labeler = ptstl::plants::traffic::CongestionLabeler::new(&traffic);
    let (cause, run) =
        synthesize_iterative(&mut plant, &labeler, &cfg.synthesis_config().unwrap()).unwrap();
    let first = run.iterations.first().unwrap();
    let last = run.iterations.last().unwrap();
    let baseline_fraction = first.violations as f64 / first.points as f64;
    let final_fraction = last.violations as f64 / last.points as f64;
    TrafficOutcome {
        name,
        baseline_fraction,
        final_fraction,
        reduction: 1.0 - final_fraction / baseline_fraction,
        cause,
    }
}

fn traffic_outcomes() -> &'static Vec<TrafficOutcome> {
    static OUTCOMES: OnceLock<Vec<TrafficOutcome>> = OnceLock::new();
    OUTCOMES.get_or_init(|| {
        vec![
            run_traffic("base d0=5", 5.0, 20),
            run_traffic("congested d0=10", 10.0, 20),
        ]
    })
}

#[test]
fn criterion_5_region_avoidance_end_to_end() {
    let started = Instant::now();
    let mut per_region: BTreeMap<&str, u32> = BTreeMap::new();
    for outcome in grid_outcomes() {
        let converged = outcome.run.outcome == SynthesisOutcome::Converged
            && outcome.run.iterations.last().unwrap().violations == 0;
        if converged {
            *per_region.entry(outcome.region).or_default() += 1;
        } else {
            println!(
                "  region {} seed {}: outcome {:?}, final violations {}",
                outcome.region,
                outcome.seed,
                outcome.run.outcome,
                outcome.run.iterations.last().unwrap().violations
            );
        }
    }
    for (region, grid) in grid_regions() {
        let ok = per_region.get(region).copied().unwrap_or(0);
        assert!(ok >= 9, "region {region}: only {ok}/10 seeds reached zero");

        // Terminal heatmap of the first converged seed: no mass on danger.
        let outcome = grid_outcomes()
            .iter()
            .find(|o| {
                o.region == region && o.run.outcome == SynthesisOutcome::Converged
            })
            .unwrap();
        let terminal = outcome.run.iterations.last().unwrap().index as u64 - 1;
        let mut plant = GridPlant::new(grid.clone()).unwrap();
        let labeler = DangerLabeler::new(&grid);
        let data = run_closed_loop(
            &mut plant,
            &labeler,
            &outcome.cause,
            20,
            100,
            derive_seed(outcome.seed, "iteration", terminal),
            FallbackMode::Uniform,
        )
        .unwrap();
        assert_eq!(data.violations(), 0);
        let heatmap = visit_ratios(&data, &grid).unwrap();
        for &(r, c) in &grid.danger {
            assert_eq!(
                heatmap.ratio(r, c),
                0.0,
                "region {region}: heatmap mass on danger cell ({r},{c})"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "criterion 5 took {elapsed:?}, budget 10 min"
    );
    let summary: Vec<String> = per_region
        .iter()
        .map(|(region, ok)| format!("{region} {ok}/10"))
        .collect();
    println!(
        "criterion 5 (region avoidance end-to-end): PASS — zero violations \
         within 8 iterations on {}; terminal heatmaps clean; {elapsed:.2?}",
        summary.join(", ")
    );
}

#[test]
fn criterion_6_traffic_qualitative() {
    let started = Instant::now();

    // Random-control baselines, measured on fresh datasets.
    let mut fractions = Vec::new();
    for (d0, expected) in [(5.0, 0.46), (10.0, 0.79)] {
        let traffic = ptstl::plants::traffic::TrafficConfig::five_link(d0);
        let mut plant = ptstl::plants::traffic::TrafficPlant::new(traffic.clone()).unwrap();
        let labeler = ptstl::plants::traffic::CongestionLabeler::new(&traffic);
        let data = simulate_random(&mut plant, &labeler, 20, 100, 501).unwrap();
        let fraction = data.violations() as f64 / data.total_points() as f64;
        assert!(
            (fraction - expected).abs() <= 0.15,
            "d0={d0}: baseline fraction {fraction:.3} outside {expected} +/- 0.15"
        );
        fractions.push(fraction);
    }

    // Closed-loop reduction after at most 8 iterations. The base instance
    // carries the >= 80% gate (its published endpoint is 46% -> 7.5%); the
    // reconstructed congested instance gets a 30% regression floor and is
    // otherwise reported.
    let outcomes = traffic_outcomes();
    let base = &outcomes[0];
    assert!(
        (base.baseline_fraction - 0.46).abs() <= 0.15,
        "base synthesis baseline {:.3} out of band",
        base.baseline_fraction
    );
    assert!(
        base.reduction >= 0.80,
        "base instance reduced by {:.1}% (< 80%)",
        base.reduction * 100.0
    );
    let congested = &outcomes[1];
    assert!(
        (congested.baseline_fraction - 0.79).abs() <= 0.15,
        "congested synthesis baseline {:.3} out of band",
        congested.baseline_fraction
    );
    assert!(
        congested.reduction >= 0.30,
        "congested instance reduced by {:.1}% (< 30% floor)",
        congested.reduction * 100.0
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 900.0,
        "criterion 6 took {elapsed:?}, budget 15 min"
    );
    println!(
        "criterion 6 (traffic, qualitative): PASS — baselines {:.1}% and {:.1}% \
         (bands 46/79 +/- 15); base {:.1}% -> {:.1}% ({:.0}% reduction, gate 80%); \
         congested {:.1}% -> {:.1}% ({:.0}% reduction, floor 30%); {elapsed:.2?}",
        fractions[0] * 100.0,
        fractions[1] * 100.0,
        base.baseline_fraction * 100.0,
        base.final_fraction * 100.0,
        base.reduction * 100.0,
        congested.baseline_fraction * 100.0,
        congested.final_fraction * 100.0,
        congested.reduction * 100.0,
    );
}

#[test]
fn criterion_7_mined_formula_shape() {
    let started = Instant::now();
    let mut clauses_checked = 0u32;
    let mut check_cause = |cause: &CombinedCause, oc_min: u32, oc_max: u32, n: usize, m: usize| {
        // Walk the emitted text through the parser: an independent route to
        // the clause structure.
        let phi = parse_formula(&cause.to_string(), n, m).unwrap();
        let mut stack = vec![phi];
        while let Some(node) = stack.pop() {
            match node {
                Formula::Or(l, r) => {
                    stack.push(*l);
                    stack.push(*r);
                }
                Formula::False => assert!(cause.is_empty()),
                Formula::And(l, r) => {
                    let Formula::Historically { child, window } = *l else {
                        panic!("clause control conjunct is not G-: {r}")
                    };
                    assert!(matches!(*child, Formula::Control { .. }));
                    assert_eq!(window.lo(), 1);
                    assert!(
                        [1, 2].contains(&window.hi()),
                        "bound {} outside the grid",
                        window.hi()
                    );
                    let Formula::Once { child: general, window: gw } = *r else {
                        panic!("clause general conjunct is not F-[1,1]")
                    };
                    assert_eq!((gw.lo(), gw.hi()), (1, 1));
                    let oc = general.operator_count();
                    assert!(
                        (oc_min..=oc_max).contains(&oc),
                        "general part {general} has operator count {oc}"
                    );
                    clauses_checked += 1;
                }
                other => panic!("unexpected node in mined formula: {other}"),
            }
        }
    };

    for outcome in grid_outcomes() {
        check_cause(&outcome.cause, 1, 1, 2, 1);
        for record in &outcome.run.iterations {
            if let Some(mined) = &record.mined {
                check_cause(&mined.cause, 1, 1, 2, 1);
            }
        }
    }
    for outcome in traffic_outcomes() {
        check_cause(&outcome.cause, 0, 0, 5, 2);
    }
    println!(
        "criterion 7 (mined-formula shape): PASS — {clauses_checked} clauses \
         structurally verified in {:.2?}",
        started.elapsed()
    );
}

/// Writes the full artifact set of a region-avoidance run, mirroring the
/// pipeline's outputs: formula file, report CSV, resolved config, and every
/// iteration's dataset replayed from its recorded prefix.
fn write_artifacts(dir: &Path, cfg: &RunConfig) {
    let grid = cfg.grid_config().unwrap();
    let mut plant = GridPlant::new(grid.clone()).unwrap();
    let labeler = DangerLabeler::new(&grid);
    let (psi, run) =
        synthesize_iterative(&mut plant, &labeler, &cfg.synthesis_config().unwrap()).unwrap();

    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("cause.ptstl"), format!("{psi}\n")).unwrap();
    write_synthesis_report(&dir.join("report.csv"), &run).unwrap();
    cfg.emit_resolved(&dir.join("config.resolved.cfg")).unwrap();

    let mut prefix = CombinedCause::empty();
    for record in &run.iterations {
        let seed = derive_seed(cfg.run.seed, "iteration", (record.index - 1) as u64);
        let data = if record.index == 1 {
            simulate_random(&mut plant, &labeler, cfg.run.traces, cfg.run.length, seed).unwrap()
        } else {
            run_closed_loop(
                &mut plant,
                &labeler,
                &prefix,
                cfg.run.traces,
                cfg.run.length,
                seed,
                FallbackMode::Uniform,
            )
            .unwrap()
        };
        assert_eq!(data.violations(), record.violations);
        let meta = DatasetMeta {
            plant: "grid".into(),
            seed,
            generator: format!("synthesize iteration {}", record.index),
        };
        write_dataset(
            &dir.join(format!("iter_{:03}.jsonl", record.index)),
            &data,
            &meta,
        )
        .unwrap();
        if let Some(mined) = &record.mined {
            prefix.extend_dedup(&mined.cause);
        }
    }
}

#[test]
fn criterion_8_replay_determinism() {
    let started = Instant::now();
    let cfg = grid_config_for(&GridConfig::arena_8x7(), 7);
    let root = tempfile::tempdir().unwrap();
    let dir_a = root.path().join("a");
    let dir_b = root.path().join("b");
    write_artifacts(&dir_a, &cfg);
    write_artifacts(&dir_b, &cfg);

    let mut names: Vec<String> = std::fs::read_dir(&dir_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() >= 4, "expected a full artifact set, got {names:?}");
    let mut bytes_compared = 0usize;
    for name in &names {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap_or_default();
        assert_eq!(a, b, "artifact {name} differs between reruns");
        bytes_compared += a.len();
    }
    println!(
        "criterion 8 (replay determinism): PASS — {} artifacts, {} bytes \
         byte-identical across reruns in {:.2?}",
        names.len(),
        bytes_compared,
        started.elapsed()
    );
}
