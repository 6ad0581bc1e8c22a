//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines are
//! always visible under `cargo test`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ssc_core::cli;
use ssc_core::color_rule::{
    build_directed_graph, is_colorable, replay_pairs, DerivationTrace, SearchOptions,
};
use ssc_core::matching::{
    build_bipartite, enumerate_perfect_matchings, group_equivalence_classes, is_nonsingular,
    DEFAULT_MATCHING_BUDGET,
};
use ssc_core::pattern::{build_barred, instantiate, ColorId, ColoredPatternMatrix};
use ssc_core::symbolic::{permanent_01, single_solid_monomial, symbolic_determinant};
use ssc_core::verification::{
    check_controllability, decide, refute_by_sampling, refute_fullrank_by_sampling, SamplePlan,
    Side, VerdictStatus,
};

const EXAMPLES_TIME_LIMIT: Duration = Duration::from_secs(5);
const GAP_TIME_LIMIT: Duration = Duration::from_secs(30);
const RANDOM_SQUARE_PER_CELL: usize = 112; // 3 sizes x 3 densities x 112 = 1008
const RANDOM_SYSTEMS: usize = 240;
const SOUNDNESS_TRIALS: usize = 200;
const STEP_REALIZATIONS: usize = 50;
const GAP_TRIALS: usize = 10_000;

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

/// Matrix and colorability trace collected for the step-wise rank check.
type Traced = (ColoredPatternMatrix, DerivationTrace);

fn c(i: u32) -> ColorId {
    ColorId::star(i)
}

fn worked_examples(traces: &mut Vec<Traced>) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let sys = five_state();
    let m = sys.matrix();
    check(
        [
            m.class(c(1)).len(),
            m.class(c(2)).len(),
            m.class(ColorId::question(1)).len(),
            m.class(ColorId::question(2)).len(),
        ] == [6, 4, 3, 2],
        "class sizes",
    );

    let barred = build_barred(&sys);
    check(
        barred.system.matrix() == &ColoredPatternMatrix::from_tokens(&FIVE_STATE_BARRED).unwrap(),
        "barred matrix",
    );
    let renum: Vec<(String, String)> = barred
        .renumbering
        .iter()
        .map(|r| (r.from.to_string(), r.to.to_string()))
        .collect();
    check(
        renum
            == [("g3", "g2"), ("g4", "g3"), ("g5", "g4")]
                .map(|(a, b)| (a.to_string(), b.to_string())),
        "renumbering map",
    );

    let sq = ColoredPatternMatrix::from_tokens(&SQUARE3).unwrap();
    let bg = build_bipartite(&sq).unwrap();
    let ms = enumerate_perfect_matchings(&bg, DEFAULT_MATCHING_BUDGET).unwrap();
    let classes = group_equivalence_classes(&ms, &bg);
    check(ms.len() == 3, "three matchings");
    check(
        classes.len() == 2
            && classes[0].spectrum == vec![c(1), c(1), c(2)]
            && classes[0].signature == -1
            && classes[1].members.len() == 2
            && classes[1].signature == 0,
        "matching classes",
    );
    check(is_nonsingular(&sq).unwrap().verdict, "nonsingular verdict");

    let col = is_colorable(m).unwrap();
    let dg = build_directed_graph(m).unwrap();
    let all_rows = set1(&[1, 2, 3, 4, 5]);
    check(
        col.colorable && col.trace.replay(&dg).ok() == Some(all_rows.clone()),
        "colorable",
    );
    let steps = [
        (set1(&[6, 7]), set1(&[1, 2])),
        (set1(&[1, 2, 3]), set1(&[3, 4, 5])),
    ];
    let reference_replay = replay_pairs(&dg, steps.iter().map(|(x, y)| (x, y)));
    check(
        reference_replay.ok() == Some(all_rows.clone()),
        "two-step derivation replays",
    );
    traces.push((m.clone(), col.trace.clone()));

    let gap = ColoredPatternMatrix::from_tokens(&NOT_COLORABLE_FULL_RANK).unwrap();
    let gap_col = is_colorable(&gap).unwrap();
    check(!gap_col.colorable && gap_col.exhaustive, "not colorable");

    let v = check_controllability(&sys).unwrap();
    check(
        v.status == VerdictStatus::SufficientControllable,
        "sufficient controllable",
    );
    let bdg = build_directed_graph(barred.system.matrix()).unwrap();
    check(
        replay_pairs(&bdg, steps.iter().map(|(x, y)| (x, y))).ok() == Some(all_rows),
        "two-step derivation replays on barred graph",
    );
    traces.push((sys.matrix().clone(), v.original.trace.clone()));
    traces.push((barred.system.matrix().clone(), v.barred.trace.clone()));

    let two = two_state();
    let v = decide(&two, &SearchOptions::default(), &SamplePlan::new(0, 1000)).unwrap();
    check(
        v.status == VerdictStatus::Inconclusive
            && v.failed_sides == vec![Side::Barred]
            && v.sampling
                .as_ref()
                .is_some_and(|s| s.trials_run == 1000 && s.counterexample.is_none()),
        "two-state inconclusive, no sampled counterexample",
    );
    traces.push((two.matrix().clone(), v.original.trace.clone()));

    let elapsed = start.elapsed();
    check(elapsed < EXAMPLES_TIME_LIMIT, "time limit");
    let detail = format!("{} ms; failed: {:?}", elapsed.as_millis(), failures);
    outcome(failures.is_empty(), detail)
}

fn determinant_goldens() -> Outcome {
    let sq = ColoredPatternMatrix::from_tokens(&SQUARE3).unwrap();
    let full = ColoredPatternMatrix::from_tokens(&FIVE_STATE).unwrap();
    let keep = [0, 1, 2, 5, 6];
    let reduced = ColoredPatternMatrix::new(
        full.to_grid()
            .into_iter()
            .map(|row| keep.iter().map(|&j| row[j]).collect())
            .collect(),
    )
    .unwrap();
    let g1 = poly_from(&[(&[("c1", 2), ("c2", 1)], -1)]);
    let g2 = poly_from(&[(&[("c1", 4), ("c2", 1)], -1)]);
    let d1 = symbolic_determinant(&sq).unwrap();
    let d2 = symbolic_determinant(&reduced).unwrap();
    let ok = cofactor_det(&sq.to_grid()) == g1
        && library_poly(&d1) == g1
        && cofactor_det(&reduced.to_grid()) == g2
        && library_poly(&d2) == g2;
    outcome(ok, format!("{d1} ; {d2}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let (mut total, mut det_agree, mut perm_agree, mut nonsingular) = (0, 0, 0, 0);
    for t in [2usize, 3, 4] {
        for density in [0.3, 0.6, 0.9] {
            for _ in 0..RANDOM_SQUARE_PER_CELL {
                let (k, l) = random_budget(&mut rng, 4);
                let m = random_pattern(&mut rng, t, t, density, k, l);
                let cert = is_nonsingular(&m).unwrap();
                let det = symbolic_determinant(&m).unwrap();
                let bg = build_bipartite(&m).unwrap();
                total += 1;
                nonsingular += usize::from(cert.verdict);
                det_agree += usize::from(cert.verdict == single_solid_monomial(&det));
                perm_agree +=
                    usize::from(cert.matching_count as u128 == permanent_01(&bg).unwrap());
            }
        }
    }
    outcome(
        total >= 1000 && det_agree == total && perm_agree == total,
        format!(
            "{total} matrices ({nonsingular} nonsingular); determinant agreement {det_agree}/{total}, permanent agreement {perm_agree}/{total}"
        ),
    )
}

fn soundness_sampling(traces: &mut Vec<Traced>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let densities = [0.3, 0.6, 0.9];
    let (mut sufficient, mut colorable, mut violations) = (0, 0, Vec::new());
    for i in 0..RANDOM_SYSTEMS {
        let n = 1 + i % 4;
        let m = 1 + (i / 4) % 2;
        let sys = random_system(&mut rng, n, m, densities[(i / 8) % 3]);
        let v = check_controllability(&sys).unwrap();
        if v.status == VerdictStatus::SufficientControllable {
            sufficient += 1;
            let rep =
                refute_by_sampling(&sys, &SamplePlan::new(i as u64, SOUNDNESS_TRIALS)).unwrap();
            if rep.counterexample.is_some() {
                violations.push(format!("system {i}: Kalman"));
            }
        }
        let barred = build_barred(&sys).system.matrix().clone();
        for (side, matrix, col) in [
            ("original", sys.matrix().clone(), &v.original),
            ("barred", barred, &v.barred),
        ] {
            if col.colorable {
                colorable += 1;
                let rep = refute_fullrank_by_sampling(
                    &matrix,
                    &SamplePlan::new(i as u64, SOUNDNESS_TRIALS),
                )
                .unwrap();
                if rep.counterexample.is_some() {
                    violations.push(format!("system {i}: {side} rank"));
                }
                traces.push((matrix, col.trace.clone()));
            }
        }
    }
    outcome(
        violations.is_empty() && sufficient > 0 && colorable > 0,
        format!(
            "{RANDOM_SYSTEMS} systems, {sufficient} sufficient verdicts, {colorable} colorable matrices, {SOUNDNESS_TRIALS} trials each; violations {violations:?}"
        ),
    )
}

fn stepwise_rank(traces: &[Traced]) -> Outcome {
    let (mut steps, mut checks, mut violations) = (0, 0, 0);
    for (t, (m, trace)) in traces.iter().enumerate() {
        let states = trace.states();
        let plan = SamplePlan::new(t as u64, STEP_REALIZATIONS);
        let realizations: Vec<_> = plan
            .assignments(&m.colors())
            .iter()
            .map(|a| instantiate(m, a).unwrap())
            .collect();
        for (k, step) in trace.steps.iter().enumerate() {
            steps += 1;
            let before = &states[k];
            let after: BTreeSet<usize> = before.union(&step.y).copied().collect();
            for real in &realizations {
                checks += 1;
                let lhs = with_indicator(real, before).has_full_row_rank();
                let rhs = with_indicator(real, &after).has_full_row_rank();
                violations += usize::from(lhs != rhs);
            }
        }
    }
    outcome(
        violations == 0 && steps > 0,
        format!(
            "{} traces, {steps} steps, {checks} rank pairs; violations {violations}",
            traces.len()
        ),
    )
}

fn sufficiency_gap() -> Outcome {
    let start = Instant::now();
    let m = ColoredPatternMatrix::from_tokens(&NOT_COLORABLE_FULL_RANK).unwrap();
    let col = is_colorable(&m).unwrap();
    let rep = refute_fullrank_by_sampling(&m, &SamplePlan::new(0, GAP_TRIALS)).unwrap();
    let elapsed = start.elapsed();
    outcome(
        !col.colorable
            && col.exhaustive
            && rep.trials_run == GAP_TRIALS
            && rep.counterexample.is_none()
            && elapsed < GAP_TIME_LIMIT,
        format!(
            "colorable={}, {} trials without a rank-deficient member, {} ms",
            col.colorable,
            rep.trials_run,
            elapsed.as_millis()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("five_state.cpm", FIVE_STATE.join("\n"), "dims 5 7 5"),
        ("two_state.cpm", TWO_STATE.join("\n"), "dims 2 3 2"),
        ("gap.cpm", NOT_COLORABLE_FULL_RANK.join("\n"), "dims 3 4"),
    ];
    for (name, body, header) in &files {
        std::fs::write(dir.path().join(name), format!("{header}\n{body}\n")).unwrap();
    }
    let path = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec!["controllable".into(), path("five_state.cpm")],
        vec![
            "controllable".into(),
            path("two_state.cpm"),
            "--seed".into(),
            "11".into(),
        ],
        vec![
            "fullrank".into(),
            path("gap.cpm"),
            "--trials".into(),
            "500".into(),
        ],
        vec![
            "sample".into(),
            path("five_state.cpm"),
            "--seed".into(),
            "3".into(),
            "--trials".into(),
            "8".into(),
        ],
        vec!["nonsingular".into(), path("gap.cpm")],
        vec!["bar".into(), path("five_state.cpm")],
    ];
    let mut identical = 0;
    for args in &runs {
        let once = || {
            let mut out = Vec::new();
            let mut err = Vec::new();
            let argv = std::iter::once("ssc".to_string()).chain(args.iter().cloned());
            let code = cli::run(argv, &mut out, &mut err);
            (code, out)
        };
        identical += usize::from(once() == once());
    }
    outcome(
        identical == runs.len(),
        format!("{identical}/{} commands byte-identical", runs.len()),
    )
}

fn main() {
    let mut traces = Vec::new();
    let results = [
        ("1 worked examples", worked_examples(&mut traces)),
        ("2 determinant goldens", determinant_goldens()),
        (
            "3 matching test vs determinant and permanent",
            oracle_equivalence(),
        ),
        (
            "4 soundness under sampling",
            soundness_sampling(&mut traces),
        ),
        ("5 step-wise rank equivalence", stepwise_rank(&traces)),
        ("6 not colorable yet full rank", sufficiency_gap()),
        ("7 byte-identical reports", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} [{name}] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
