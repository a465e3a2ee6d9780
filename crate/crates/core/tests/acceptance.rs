//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use cito_core::cfg::{
    call_operation_probability, expr_probability, statement_probability, CallOperation,
};
use cito_core::cli::{generate_synthetic, wilcoxon_signed_rank, Decision, WilcoxonOutcome, ALPHA};
use cito_core::coupling::{ocplx, stub_set, Weights};
use cito_core::eord::{
    build_eord, build_ord, control_complexity, enumerate_chains, Eord, TransitiveChain,
};
use cito_core::frontend::{compile, parse, print, SourceUnit};
use cito_core::model::{load_pmif, save_pmif, BranchKind, Comparator, PredicateExpr, ProgramModel};
use cito_core::orders::{
    enumerate_cycles, graph_based, multilevel_feedback, ria, ria_traced, GraphConfig, RiaConfig,
    DEFAULT_CYCLE_CAP,
};

use common::oracle;

/// Tolerance for values computed along different summation orders.
const FLOAT_TOL: f64 = 1e-9;
/// Tolerance for the closed-form predicate rules.
const RULE_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

fn stmt_p(model: &ProgramModel, class: &str, line: u32) -> Result<f64, String> {
    let refs = model.statements_at_line(class, line);
    ensure!(
        refs.len() == 1,
        "{class} line {line}: {} statements",
        refs.len()
    );
    Ok(statement_probability(model, &refs[0])
        .map_err(|e| e.to_string())?
        .probability)
}

fn c1_sample_golden() -> Outcome {
    let model = compile("sample", &common::sample_sources()).map_err(|e| e.to_string())?;
    for (class, line, want) in [
        ("A", 8, 0.25),
        ("A", 12, 0.5),
        ("B", 6, 0.5),
        ("B", 12, 1.0),
    ] {
        let got = stmt_p(&model, class, line)?;
        ensure!(got == want, "p({class} line {line}) = {got}, want {want}");
    }
    let pc = call_operation_probability(&model, &CallOperation::method("A", "B", "methodB1"))
        .map_err(|e| e.to_string())?;
    ensure!(pc == 0.625, "pc(A->B.methodB1) = {pc}");
    let chains = enumerate_chains(&model, 3);
    let ts: Vec<f64> = chains.iter().map(|c| c.chain_probability).collect();
    ensure!(ts == [0.3125, 0.75], "chain probabilities {ts:?}");
    let t = control_complexity("A", "C", &chains).value;
    ensure!(t == 0.828125, "T(A,C) = {t}");
    let edge = build_eord(&model, 3).edge("A", "C").map(|e| e.coupling.t);
    ensure!(edge == Some(0.828125), "EORD A->C carries {edge:?}");
    Ok("statement p 0.25/0.5/0.5/1, pc 0.625, t 0.3125/0.75, T(A,C) 0.828125".into())
}

fn c2_table_orders() -> Outcome {
    let model = common::sample();
    let w = Weights::default();
    let ord = build_ord(&model);
    let o = graph_based(&ord, &w, &GraphConfig::default()).map_err(|e| e.to_string())?;
    ensure!(
        o.classes == names(&["A", "C", "B"]),
        "direct order {:?}",
        o.classes
    );
    let stubs = ocplx(&ord, &o.classes, &w)
        .map_err(|e| e.to_string())?
        .stub_count;
    ensure!(stubs == 1, "direct order needs {stubs} stubs");

    let eord = build_eord(&model, 3);
    let o = graph_based(&eord, &w, &GraphConfig::default()).map_err(|e| e.to_string())?;
    ensure!(
        o.classes == names(&["C", "B", "A"]),
        "full order {:?}",
        o.classes
    );
    let removed: BTreeSet<(String, String)> = o.meta.removed_edges.iter().cloned().collect();
    let allowed: [BTreeSet<(String, String)>; 2] = [
        pairs(&[("B", "A"), ("C", "A")]).into_iter().collect(),
        pairs(&[("B", "A"), ("A", "C")]).into_iter().collect(),
    ];
    ensure!(allowed.contains(&removed), "removed {removed:?}");
    let stubs = stub_set(&eord, &o.classes).map_err(|e| e.to_string())?;
    ensure!(
        stubs.stubs.iter().all(|s| removed.contains(s)),
        "stub outside removed edges: {stubs:?}"
    );
    Ok(format!("A,C,B with 1 stub; C,B,A removing {removed:?}"))
}

fn c3_cycle_counts() -> Outcome {
    let model = common::sample();
    let all = names(&["A", "B", "C"]);
    let direct =
        enumerate_cycles(&build_ord(&model), &all, DEFAULT_CYCLE_CAP).map_err(|e| e.to_string())?;
    let full = enumerate_cycles(&build_eord(&model, 3), &all, DEFAULT_CYCLE_CAP)
        .map_err(|e| e.to_string())?;
    ensure!(
        direct.len() == 2,
        "{} cycles without the transitive edge",
        direct.len()
    );
    ensure!(full.len() == 3, "{} cycles with it", full.len());
    Ok("2 without, 3 with the transitive edge".into())
}

fn c4_predicate_rules() -> Outcome {
    // The worked predicates go through the parser so the whole lowering path
    // is covered.
    let src = "class P {\n  int x; int y;\n  void m() {\n    if (x > 2) { x = 0; }\n    if (x > 2 && y < 7) { x = 1; }\n    if (x < 3 || y > 6) { x = 2; }\n    if (x > 1 && x < 0) { x = 3; }\n  }\n}\n";
    let model =
        compile("rules", &[SourceUnit::new("rules.minij", src)]).map_err(|e| e.to_string())?;
    for (line, want) in [(4, 0.5), (5, 0.25), (6, 0.75), (7, 0.0)] {
        let got = stmt_p(&model, "P", line)?;
        ensure!(
            (got - want).abs() <= RULE_TOL,
            "line {line}: {got}, want {want}"
        );
    }
    for n in 1..=10usize {
        let leaves: Vec<PredicateExpr> = (0..n)
            .map(|k| PredicateExpr::cmp(&format!("x{k}"), Comparator::Gt, 0))
            .collect();
        let half = 0.5f64.powi(n as i32);
        let and = expr_probability(&PredicateExpr::And(leaves.clone()));
        let or = expr_probability(&PredicateExpr::Or(leaves));
        ensure!((and - half).abs() <= RULE_TOL, "AND of {n}: {and}");
        ensure!((or - (1.0 - half)).abs() <= RULE_TOL, "OR of {n}: {or}");
        let arms = n as u32 + 1;
        let sw = cito_core::cfg::predicate_probability(
            None,
            cito_core::cfg::Outcome::Case(0),
            BranchKind::Switch { arms },
        );
        ensure!(
            (sw - 1.0 / f64::from(arms)).abs() <= RULE_TOL,
            "switch of {arms}: {sw}"
        );
    }
    Ok(format!(
        "0.5/0.25/0.75/0; 1/2^N and 1-1/2^N for N=1..10 within {RULE_TOL:e}"
    ))
}

fn chain_key(c: &TransitiveChain) -> Vec<String> {
    c.member_path.iter().map(ToString::to_string).collect()
}

fn draw<S: proptest::strategy::Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).expect("strategy").current()
}

fn check_model(model: &ProgramModel, w: &Weights) -> Result<usize, String> {
    for len in 3..=5 {
        let want = oracle::brute_chains(model, len);
        let got = enumerate_chains(model, len);
        ensure!(
            got.len() == want.len(),
            "{}: {} chains at {len}, oracle {}",
            model.name,
            got.len(),
            want.len()
        );
        for c in &got {
            let t = want
                .get(&chain_key(c))
                .ok_or_else(|| format!("unexpected chain {c}"))?;
            ensure!(
                (c.chain_probability - t).abs() <= FLOAT_TOL,
                "{c}: oracle t = {t}"
            );
        }
    }
    let e = build_eord(model, 3);
    let best = oracle::exhaustive_min(&e, w);
    let orders = [
        graph_based(&e, w, &GraphConfig::default())
            .map_err(|x| x.to_string())?
            .classes,
        multilevel_feedback(&e, w).classes,
        ria(&e, w, &RiaConfig::default()).classes,
    ];
    for o in &orders {
        let got = ocplx(&e, o, w).map_err(|x| x.to_string())?.ocplx;
        let want = oracle::recompute_ocplx(&e, o, w);
        ensure!(
            (got - want).abs() <= FLOAT_TOL,
            "{}: ocplx {got} vs recomputed {want}",
            model.name
        );
        ensure!(
            got >= best - FLOAT_TOL,
            "{}: ocplx {got} below exhaustive minimum {best}",
            model.name
        );
    }
    Ok(enumerate_chains(model, 5).len())
}

fn dag_feedback_is_free(e: &Eord, w: &Weights) -> Result<(), String> {
    let o = multilevel_feedback(e, w);
    let c = ocplx(e, &o.classes, w).map_err(|x| x.to_string())?;
    ensure!(c.ocplx == 0.0, "feedback on a DAG costs {}", c.ocplx);
    Ok(())
}

fn c5_oracles() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let spec = oracle::small_spec();
    let w = Weights::default();
    let mut chains = 0;
    for _ in 0..200 {
        chains += check_model(&generate_synthetic(&draw(&mut runner, &spec)), &w)?;
    }
    let dags = oracle::dag_eord();
    for _ in 0..200 {
        dag_feedback_is_free(&draw(&mut runner, &dags), &w)?;
    }
    let acyclic = load_pmif(
        &std::fs::read(common::fixtures().join("sample-acyclic.pmif.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    dag_feedback_is_free(&build_eord(&acyclic, 3), &w)?;
    Ok(format!(
        "200 models ({chains} chains up to length 5), 201 acyclic graphs"
    ))
}

fn c6_ria() -> Outcome {
    let w = Weights::default();
    let sample = build_eord(&common::sample(), 3);
    let best = oracle::exhaustive_min(&sample, &w);
    let mut runner = TestRunner::deterministic();
    let spec = oracle::small_spec();
    let mut graphs = vec![sample.clone()];
    for _ in 0..20 {
        graphs.push(build_eord(
            &generate_synthetic(&draw(&mut runner, &spec)),
            3,
        ));
    }
    for (k, e) in graphs.iter().enumerate() {
        for seed in 0..5 {
            let cfg = RiaConfig {
                seed,
                iterations: 500,
                sa_temp: None,
            };
            let a = ria_traced(e, &w, &cfg);
            let b = ria_traced(e, &w, &cfg);
            let (ja, jb) = (
                serde_json::to_vec(&a.order).unwrap(),
                serde_json::to_vec(&b.order).unwrap(),
            );
            ensure!(ja == jb, "graph {k} seed {seed}: orders differ");
            ensure!(a.trace == b.trace, "graph {k} seed {seed}: traces differ");
            ensure!(
                a.trace.windows(2).all(|p| p[1] <= p[0]),
                "graph {k} seed {seed}: cost rose"
            );
            if k == 0 {
                let got = ocplx(e, &a.order.classes, &w)
                    .map_err(|x| x.to_string())?
                    .ocplx;
                ensure!(
                    (got - best).abs() <= FLOAT_TOL,
                    "sample seed {seed}: {got} vs minimum {best}"
                );
            }
        }
    }
    Ok(format!(
        "21 graphs x 5 seeds reproducible and nonincreasing; sample reaches {best:.6}"
    ))
}

fn c7_superset() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let spec = oracle::small_spec();
    let (mut short_total, mut long_total) = (0, 0);
    for k in 0..50 {
        let m = generate_synthetic(&draw(&mut runner, &spec));
        let short: BTreeSet<Vec<String>> = enumerate_chains(&m, 3).iter().map(chain_key).collect();
        let long: BTreeSet<Vec<String>> = enumerate_chains(&m, 5).iter().map(chain_key).collect();
        ensure!(
            short.is_subset(&long),
            "model {k}: a length-3 chain is missing at length 5"
        );
        short_total += short.len();
        long_total += long.len();
    }
    Ok(format!(
        "50 models, {short_total} chains at 3 within {long_total} at 5"
    ))
}

fn c8_wilcoxon() -> Outcome {
    let five: Vec<(f64, f64)> = (1..=5).map(|d| (f64::from(d), 0.0)).collect();
    let WilcoxonOutcome::Tested(r) = wilcoxon_signed_rank(&five) else {
        return Err("{+1..+5} was not tested".into());
    };
    ensure!(
        r.p_value == 0.0625 && r.decision == Decision::Retain,
        "{{+1..+5}}: {r:?}"
    );
    let six: Vec<(f64, f64)> = (1..=6).map(|d| (f64::from(d), 0.0)).collect();
    let p6 = wilcoxon_signed_rank(&six);
    ensure!(
        matches!(&p6, WilcoxonOutcome::Tested(r) if r.p_value == 0.03125 && r.decision == Decision::Reject),
        "{{+1..+6}}: {p6:?}"
    );
    let mut runner = TestRunner::deterministic();
    let diffs = proptest::collection::vec(-5i32..=5, 1..=12);
    let mut tested = 0;
    for _ in 0..1000 {
        let d: Vec<f64> = draw(&mut runner, &diffs)
            .into_iter()
            .map(f64::from)
            .collect();
        let pairs: Vec<(f64, f64)> = d.iter().map(|x| (*x, 0.0)).collect();
        match (
            wilcoxon_signed_rank(&pairs),
            oracle::wilcoxon_by_enumeration(&d),
        ) {
            (WilcoxonOutcome::NoNonzeroDifferences, None) => {}
            (WilcoxonOutcome::Tested(r), Some(p)) => {
                ensure!(
                    (r.p_value - p).abs() <= RULE_TOL,
                    "{d:?}: p {} vs enumeration {p}",
                    r.p_value
                );
                let want = if p < ALPHA {
                    Decision::Reject
                } else {
                    Decision::Retain
                };
                ensure!(
                    r.decision == want,
                    "{d:?}: decision {:?} at p {p}",
                    r.decision
                );
                tested += 1;
            }
            (got, want) => return Err(format!("{d:?}: {got:?} vs {want:?}")),
        }
    }
    Ok(format!(
        "p(+1..+5) = 0.0625; {tested} samples match enumeration; alpha {ALPHA}"
    ))
}

fn c9_round_trips() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let spec = oracle::small_spec();
    for k in 0..500 {
        let m = generate_synthetic(&draw(&mut runner, &spec));
        let bytes = save_pmif(&m);
        let back = load_pmif(&bytes).map_err(|e| format!("instance {k}: {e}"))?;
        ensure!(
            back == m && save_pmif(&back) == bytes,
            "PMIF instance {k} changed"
        );
    }
    let asts = oracle::ast();
    for k in 0..500 {
        let ast = draw(&mut runner, &asts);
        let text = print(&ast);
        let mut back = parse(&SourceUnit::new("gen.minij", text.clone()))
            .map_err(|e| format!("instance {k}: {e}\n{text}"))?;
        back.erase_lines();
        ensure!(
            back == ast && print(&back) == text,
            "source instance {k} changed:\n{text}"
        );
    }
    Ok("500 PMIF and 500 source instances".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "C1",
            "sample program golden values",
            c1_sample_golden,
            Duration::from_secs(1),
        ),
        (
            "C2",
            "graph strategy orders on the sample",
            c2_table_orders,
            Duration::from_secs(1),
        ),
        (
            "C3",
            "elementary cycle counts",
            c3_cycle_counts,
            Duration::MAX,
        ),
        (
            "C4",
            "predicate probability rules",
            c4_predicate_rules,
            Duration::MAX,
        ),
        (
            "C5",
            "oracle equivalence on small models",
            c5_oracles,
            Duration::from_secs(60),
        ),
        ("C6", "RIA determinism and descent", c6_ria, Duration::MAX),
        (
            "C7",
            "chain superset across length bounds",
            c7_superset,
            Duration::MAX,
        ),
        (
            "C8",
            "Wilcoxon signed-rank test",
            c8_wilcoxon,
            Duration::MAX,
        ),
        (
            "C9",
            "PMIF and source round trips",
            c9_round_trips,
            Duration::from_secs(30),
        ),
    ];
    let mut failed = 0;
    for (id, title, run, limit) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {id} {title}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {title}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
