//! Driving the batch front-end in-process: exit codes, report shapes,
//! refusal diagnostics and byte-level reproducibility.

use decisive::cli::{run_with_args, EXIT_BUDGET, EXIT_OK, EXIT_REFUSAL};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String) {
    let mut full = vec!["decisive"];
    full.extend_from_slice(args);
    run_with_args(full)
}

#[test]
fn approx_reach_on_drifting_walk() {
    let (code, out) = run(&[
        "approx-reach",
        "--model",
        &fixture("walk_down.json"),
        "--p",
        "1/3",
        "--init",
        "1:1",
        "--target",
        "0",
        "--eps",
        "1e-3",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["status"]["kind"], "converged");
    let interval = report["interval"].as_array().unwrap();
    assert_eq!(interval[1], "1");
    // lower endpoint is an exact rational at least 0.999
    let lo = interval[0].as_str().unwrap();
    let (num, den) = lo.split_once('/').unwrap();
    let num: f64 = num.parse().unwrap();
    let den: f64 = den.parse().unwrap();
    assert!(num / den >= 0.999);
}

#[test]
fn approx_reach_diverging_walk_exits_with_budget_code() {
    let (code, out) = run(&[
        "approx-reach",
        "--model",
        &fixture("walk_up.json"),
        "--init",
        "1:1",
        "--target",
        "0",
        "--eps",
        "1e-3",
        "--budget",
        "10000",
    ]);
    assert_eq!(code, EXIT_BUDGET, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["status"]["kind"], "stalled");
    let gap = report["status"]["residual_gap"].as_f64().unwrap();
    assert!((gap - 0.5).abs() < 1e-3, "gap {gap}");
    assert_eq!(report["tainted"], true);
}

#[test]
fn refusals_exit_with_diagnostic() {
    // avoid-set on a countable chain without a certificate
    let (code, out) = run(&[
        "avoid-set",
        "--model",
        &fixture("walk_down.json"),
        "--target",
        "0",
    ]);
    assert_eq!(code, EXIT_REFUSAL);
    assert!(out.contains("certificate"), "{out}");

    // general-class automaton refused with the class named
    let (code, out) = run(&[
        "sta-check",
        "--model",
        &fixture("two_clock_convergent.json"),
        "--dma",
        &fixture("tick_dma.json"),
    ]);
    assert_eq!(code, EXIT_REFUSAL);
    assert!(out.contains("General"), "{out}");
    assert!(out.contains("unsound"), "{out}");
}

#[test]
fn avoid_set_finite_chain() {
    let (code, out) = run(&[
        "avoid-set",
        "--model",
        &fixture("two_absorbing.json"),
        "--target",
        "a",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["avoid_set"], serde_json::json!(["b"]));
}

#[test]
fn qualitative_verdicts() {
    let (code, out) = run(&[
        "check-qualitative",
        "--model",
        &fixture("two_absorbing.json"),
        "--init",
        "c:1",
        "--target",
        "a",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "Positive");
}

#[test]
fn product_and_attractor_graph() {
    let (code, out) = run(&[
        "product",
        "--model",
        &fixture("quotient_down.json"),
        "--dma",
        &fixture("cycle_dma.json"),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["product_states"], "12"); // 3 states x 4 locations

    let (code, dot) = run(&[
        "attractor-graph",
        "--model",
        &fixture("quotient_down.json"),
        "--dma",
        &fixture("cycle_dma.json"),
        "--attractor",
        "s0,s1,s2",
        "--out",
        "dot",
    ]);
    assert_eq!(code, EXIT_OK, "{dot}");
    assert!(dot.contains("digraph"));
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());
    assert!(dot.contains("good"));
}

#[test]
fn approx_omega_converges_to_one() {
    let (code, out) = run(&[
        "approx-omega",
        "--model",
        &fixture("quotient_down.json"),
        "--dma",
        &fixture("cycle_dma.json"),
        "--init",
        "s0:1",
        "--attractor",
        "s0,s1,s2",
        "--eps",
        "1e-6",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["status"]["kind"], "converged");
    assert_eq!(report["interval"][1], "1");
}

#[test]
fn abstraction_commands() {
    let (code, out) = run(&[
        "check-abstraction",
        "--handle",
        &fixture("handle_down.json"),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["abstraction"], true);
    assert_eq!(report["fiber_uniform"], false);

    let (code, out) = run(&[
        "witness-unsound",
        "--handle",
        &fixture("handle_up.json"),
        "--init",
        "1:1",
        "--samples",
        "20000",
        "--seed",
        "11",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["witness"]["target"], "{s0}");

    let (code, out) = run(&[
        "witness-unsound",
        "--handle",
        &fixture("handle_down.json"),
        "--init",
        "1:1",
        "--samples",
        "5000",
        "--seed",
        "13",
        "--horizon",
        "256",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(report["witness"].is_null(), "{out}");
}

#[test]
fn sta_thick_graph_outputs() {
    let (code, dot) = run(&[
        "sta-thick-graph",
        "--model",
        &fixture("two_clock_convergent.json"),
        "--out",
        "dot",
    ]);
    assert_eq!(code, EXIT_OK, "{dot}");
    assert!(dot.contains("digraph"));
    // full graph: six nodes n0..n5
    assert!(dot.contains("n5"));
    assert!(!dot.contains("n6"));

    let (code, reduced) = run(&[
        "sta-thick-graph",
        "--model",
        &fixture("two_clock_convergent.json"),
        "--reduce",
        "--out",
        "dot",
    ]);
    assert_eq!(code, EXIT_OK, "{reduced}");
    // quotient: five classes with the 1/2 branching at the initial class
    assert!(reduced.contains("s4"));
    assert!(!reduced.contains("s5"));
    assert!(reduced.contains("1/2"));
}

#[test]
fn sta_quantitative_and_time_bounded() {
    let (code, out) = run(&[
        "sta-approx",
        "--model",
        &fixture("exp_loop.json"),
        "--dma",
        &fixture("tick_dma.json"),
        "--samples",
        "2000",
        "--eps",
        "0.1",
        "--budget",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["status"]["kind"], "converged");

    let (code, out) = run(&[
        "sta-time-bounded",
        "--model",
        &fixture("exp_loop.json"),
        "--target",
        "l0",
        "--interval",
        "(0,1]",
        "--samples",
        "5000",
        "--eps",
        "0.1",
        "--budget",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    // interval around 1 - e^{-1} ≈ 0.632
    let lo: f64 = report["interval"][0].as_str().unwrap().parse().unwrap();
    let hi: f64 = report["interval"][1].as_str().unwrap().parse().unwrap();
    assert!(lo <= 0.6321 && 0.6321 <= hi, "{out}");
}

#[test]
fn reports_are_reproducible() {
    let model = fixture("competing_sinks.json");
    let dma = fixture("absorbed_a_dma.json");
    let args = [
        "sta-approx",
        "--model",
        &model,
        "--dma",
        &dma,
        "--samples",
        "3000",
        "--eps",
        "0.1",
        "--budget",
        "200",
        "--seed",
        "99",
        "--threads",
        "2",
    ];
    let (code_a, out_a) = run(&args);
    let (code_b, out_b) = run(&args);
    assert_eq!(code_a, EXIT_OK, "{out_a}");
    assert_eq!(code_a, code_b);
    assert_eq!(out_a, out_b, "same seed and thread count must reproduce");
    // the sink race is even: the reported interval brackets 1/2
    let report: serde_json::Value = serde_json::from_str(&out_a).unwrap();
    let lo: f64 = report["interval"][0].as_str().unwrap().parse().unwrap();
    let hi: f64 = report["interval"][1].as_str().unwrap().parse().unwrap();
    assert!(lo <= 0.5 && 0.5 <= hi, "{out_a}");
}

#[test]
fn unknown_flags_refused() {
    let (code, _) = run(&["approx-reach", "--bogus"]);
    assert_eq!(code, EXIT_REFUSAL);
}
