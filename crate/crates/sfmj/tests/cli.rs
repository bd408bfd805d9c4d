//! End-to-end command tests over the fixture corpus, exercising the same
//! entry points the binary wraps.

use std::path::Path;

use sfmj::cli::{execute, exit_code, parse_args};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let cfg = parse_args(&args.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        .expect("arguments parse");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = execute(&cfg, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn check_prints_the_main_type() {
    let (code, out, err) = run(&["check", &fixture("shop_in_item.sfmj")]);
    assert_eq!(code, exit_code::OK, "stderr: {err}");
    assert_eq!(out.trim(), "Item");
}

#[test]
fn check_rejects_the_crossing_table() {
    let (code, _, err) = run(&["check", &fixture("ct1_ambiguous.sfmj")]);
    assert_eq!(code, exit_code::CHECK_FAILED);
    assert!(err.contains("MissingMeetBranch"), "stderr: {err}");
    assert!(err.contains("A1"), "stderr: {err}");
    assert!(err.contains("B1"), "stderr: {err}");
}

#[test]
fn check_accepts_the_repaired_table() {
    let (code, out, _) = run(&["check", &fixture("ct1_resolved.sfmj")]);
    assert_eq!(code, exit_code::OK);
    assert_eq!(out.trim(), "A");
}

#[test]
fn parse_failures_exit_2() {
    let (code, _, err) = run(&["check", &fixture("receiver_syntax.sfmj")]);
    assert_eq!(code, exit_code::PARSE_FAILED);
    assert!(err.contains("parse error"), "stderr: {err}");
}

#[test]
fn unreadable_input_exits_3() {
    let (code, _, _) = run(&["check", "/nonexistent/no-such-file.sfmj"]);
    assert_eq!(code, exit_code::IO_FAILED);
}

#[test]
fn run_prints_the_final_value() {
    let (code, out, _) = run(&["run", &fixture("pair_fields.sfmj")]);
    assert_eq!(code, exit_code::OK);
    assert_eq!(out.trim(), "new A()");
}

#[test]
fn stuck_downcasts_exit_4_with_the_offending_cast() {
    let (code, out, _) = run(&["run", &fixture("stuck_downcast.sfmj")]);
    assert_eq!(code, exit_code::STUCK);
    assert!(out.contains("(A) new B()"), "stdout: {out}");
}

#[test]
fn fuel_exhaustion_exits_5() {
    let (code, out, _) = run(&["run", "--fuel", "10", &fixture("diverge.sfmj")]);
    assert_eq!(code, exit_code::FUEL_EXHAUSTED);
    assert!(out.contains("fuel exhausted"), "stdout: {out}");
}

#[test]
fn trace_lists_every_step_then_the_outcome() {
    let (code, out, _) = run(&["trace", &fixture("stuck_downcast.sfmj")]);
    assert_eq!(code, exit_code::STUCK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "1 RC-Cast (A) new B()");
    assert_eq!(lines[1], "stuck: (A) new B()");
}

#[test]
fn trace_with_tiny_fuel_exits_5() {
    // One step fits in the budget; the second does not.
    let (code, out, _) = run(&["trace", "--fuel", "1", &fixture("diverge.sfmj")]);
    assert_eq!(code, exit_code::FUEL_EXHAUSTED);
    assert_eq!(out.lines().count(), 2, "one step plus the outcome: {out}");
    assert!(out.contains("R-Invk[R.spin]"), "stdout: {out}");
}

#[test]
fn trace_names_the_selected_branch() {
    let (code, out, _) = run(&["trace", &fixture("charity_charity.sfmj")]);
    assert_eq!(code, exit_code::OK);
    assert!(
        out.contains("R-Invk[CharityShop.transaction]"),
        "stdout: {out}"
    );
}

#[test]
fn json_trace_carries_the_same_fields() {
    let (code, out, _) = run(&["trace", "--json", &fixture("charity_charity.sfmj")]);
    assert_eq!(code, exit_code::OK);
    let lines: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect();
    let invk = lines
        .iter()
        .find(|l| l["rule"] == "R-Invk")
        .expect("an R-Invk record");
    assert_eq!(invk["branch"], "CharityShop.transaction");
    assert!(invk["step"].is_u64());
    assert!(invk["expr"].is_string());
    let last = lines.last().unwrap();
    assert_eq!(last["outcome"], "value");
    assert_eq!(last["expr"], "new Item()");
}

#[test]
fn json_and_human_outcomes_match() {
    let human = run(&["run", &fixture("stuck_downcast.sfmj")]);
    let json = run(&["run", "--json", &fixture("stuck_downcast.sfmj")]);
    assert_eq!(human.0, json.0);
    let record: serde_json::Value = serde_json::from_str(json.1.trim()).unwrap();
    assert_eq!(record["outcome"], "stuck");
    assert!(human.1.contains(record["expr"].as_str().unwrap()));
}

#[test]
fn warnings_go_to_stderr_and_strict_mode_promotes_them() {
    let (code, out, err) = run(&["check", &fixture("stupid_cast.sfmj")]);
    assert_eq!(code, exit_code::OK);
    assert_eq!(out.trim(), "B");
    assert!(err.contains("StupidCast"), "stderr: {err}");
    assert!(err.contains("warning"), "stderr: {err}");

    let (code, _, err) = run(&["check", "--deny-stupid-casts", &fixture("stupid_cast.sfmj")]);
    assert_eq!(code, exit_code::CHECK_FAILED);
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn json_diagnostics_have_the_record_shape() {
    let (code, _, err) = run(&["check", "--json", &fixture("ct1_ambiguous.sfmj")]);
    assert_eq!(code, exit_code::CHECK_FAILED);
    let first: serde_json::Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    for field in ["severity", "rule", "code", "message", "file", "line", "col"] {
        assert!(
            first.get(field).is_some(),
            "missing field {field} in {first}"
        );
    }
    assert_eq!(first["severity"], "error");
}

#[test]
fn fj_mode_reports_the_relocation_breakage() {
    // Symmetric dispatch runs the program; first-argument dispatch cannot
    // even resolve the call site.
    let (code, out, _) = run(&["run", &fixture("shop_in_item.sfmj")]);
    assert_eq!(code, exit_code::OK);
    assert_eq!(out.trim(), "new Item()");

    let (code, out, err) = run(&["run", "--mode", "fj", &fixture("shop_in_item.sfmj")]);
    assert_eq!(code, exit_code::STUCK);
    assert!(
        out.contains("fj-dispatch-failure"),
        "stdout: {out}\nstderr: {err}"
    );
    assert!(err.contains("FjUnresolvable"), "stderr: {err}");
}

#[test]
fn fj_mode_runs_first_owner_programs_identically() {
    let sfmj = run(&["trace", &fixture("shop_in_shop.sfmj")]);
    let fj = run(&["trace", "--mode", "fj", &fixture("shop_in_shop.sfmj")]);
    assert_eq!(sfmj.0, exit_code::OK);
    assert_eq!(fj.0, exit_code::OK);
    assert_eq!(sfmj.1, fj.1, "traces must agree step for step");
}
