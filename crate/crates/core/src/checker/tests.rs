use super::*;
use crate::diagnostic::Kind::*;
use crate::instances::{atomicity, lift, reentrancy};
use crate::syntax::{parse, resolve};

fn early(sys: &EffectSystem, src: &str) -> Vec<(Kind, usize)> {
    let d = check_source(sys, src);
    let lines = diagnostic_lines(src, &d);
    d.iter().map(|d| d.kind).zip(lines).collect()
}

fn global(sys: &EffectSystem, src: &str) -> Vec<Kind> {
    let p = resolve(&parse(src).unwrap(), sys).unwrap();
    global_check(sys, &p).into_iter().flat_map(|o| o.diagnostics).map(|d| d.kind).collect()
}

#[test]
fn second_atomic_is_the_earliest_error() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) {\n    perform atomic;\n    perform atomic;\n    perform local\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 3)]);
    let d = check_source(&sys, src);
    assert_eq!(d[0].sofar.as_deref(), Some("A"));
    assert_eq!(d[0].target.as_deref(), Some("L"));
    assert_eq!(global(&sys, src), vec![BoundExceeded]);
}

#[test]
fn single_atomic_is_accepted() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) { perform atomic }";
    assert!(early(&sys, src).is_empty());
    assert!(global(&sys, src).is_empty());
}

#[test]
fn nested_transaction_start_is_reported_first() {
    let sys = reentrancy::system();
    let src = "exception TxException;\nfn f() -> unit @effect(critical) @throws(TxException, critical) {\n    perform begin;\n    perform critical;\n    perform end\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 3)]);
}

#[test]
fn direct_nested_begin_is_an_undefined_sequence() {
    let sys = reentrancy::system();
    let src = "fn f() -> unit @effect(entrant) {\n    perform begin;\n    perform begin\n}";
    assert_eq!(early(&sys, src), vec![(UndefinedSeq, 3)]);
    assert_eq!(global(&sys, src), vec![UndefinedSeq]);
}

#[test]
fn bound_checked_at_function_end() {
    let sys = reentrancy::system();
    let src = "fn f() -> unit @effect(entrant) { perform begin }";
    assert_eq!(early(&sys, src), vec![(BoundExceeded, 1)]);
    assert_eq!(global(&sys, src), vec![BoundExceeded]);
}

#[test]
fn healthy_branch_propagates_after_a_poisoned_one() {
    let sys = atomicity::system();
    // The then-branch fails; the else-branch (R) flows on and the later
    // `acquire` after it is independently wrong (R; R is not below L).
    let src = "fn f() -> unit @effect(L) {\n    if true { perform atomic } else { perform local };\n    perform acquire\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 2), (ResidualUndefined, 3)]);
}

#[test]
fn independent_branch_errors_are_both_reported() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(L) {\n    if true {\n        perform atomic\n    } else {\n        perform acquire\n    }\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 3), (ResidualUndefined, 5)]);
}

#[test]
fn both_branches_poisoned_suppresses_downstream() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(L) {\n    if true { perform atomic } else { perform acquire };\n    perform atomic\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 2), (ResidualUndefined, 2)]);
}

#[test]
fn lambda_bodies_are_checked_after_an_error() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(L) {\n    perform acquire;\n    let g = \\(x: unit) @effect(B) => perform atomic;\n    ()\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 2), (ResidualUndefined, 3)]);
}

#[test]
fn latent_effect_charged_at_application() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) {\n    let g = \\(x: unit) @effect(A) => perform atomic;\n    g(());\n    g(())\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 4)]);
}

#[test]
fn commutative_systems_report_every_violation() {
    let sys = lift::powerset_lift(&["x".into(), "y".into(), "z".into()]).unwrap();
    let src = "fn f() -> unit @effect({x}) {\n    perform y;\n    perform x;\n    perform z\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 2), (ResidualUndefined, 4)]);
    let one = "fn f() -> unit @effect({x}) {\n    perform y;\n    perform x\n}";
    assert_eq!(early(&sys, one), vec![(ResidualUndefined, 2)]);
}

#[test]
fn non_commutative_analog_reports_once() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(L) {\n    perform acquire;\n    perform release;\n    perform acquire\n}";
    assert_eq!(early(&sys, src), vec![(ResidualUndefined, 2)]);
}

#[test]
fn caught_exceptions_do_not_escape() {
    let sys = atomicity::system();
    let src = "exception E;\nfn f() -> unit @effect(A) {\n    try { perform acquire; throw E } catch E { perform local };\n    perform atomic\n}";
    assert!(early(&sys, src).is_empty(), "{:?}", check_source(&sys, src));
    assert!(global(&sys, src).is_empty());
}

#[test]
fn undeclared_throw_is_reported_at_the_throw() {
    let sys = atomicity::system();
    let src = "exception E;\nfn f() -> unit @effect(A) {\n    perform local;\n    throw E\n}";
    assert_eq!(early(&sys, src), vec![(UncaughtException, 4)]);
    assert_eq!(global(&sys, src), vec![UncaughtException]);
}

#[test]
fn declared_throw_prefix_is_bounded() {
    let sys = atomicity::system();
    let ok = "exception E;\nfn f() -> unit @effect(A) @throws(E, L) {\n    perform release;\n    throw E\n}";
    assert!(early(&sys, ok).is_empty());
    let bad = "exception E;\nfn f() -> unit @effect(A) @throws(E, L) {\n    perform acquire;\n    throw E\n}";
    assert_eq!(early(&sys, bad), vec![(ResidualUndefined, 4)]);
    assert_eq!(global(&sys, bad), vec![BoundExceeded]);
}

#[test]
fn subtype_throws_use_the_supertype_budget() {
    let sys = atomicity::system();
    let src = "exception E;\nexception F <: E;\nfn f() -> unit @effect(A) @throws(E, L) {\n    perform release;\n    throw F\n}";
    assert!(early(&sys, src).is_empty());
    assert!(global(&sys, src).is_empty());
}

#[test]
fn call_charges_callee_exceptions() {
    let sys = atomicity::system();
    let src = "exception E;\nfn g() -> unit @effect(B) @throws(E, R) { perform acquire; throw E }\nfn f() -> unit @effect(A) {\n    g()\n}";
    assert_eq!(early(&sys, src), vec![(UncaughtException, 4)]);
    let caught = "exception E;\nfn g() -> unit @effect(B) @throws(E, R) { perform acquire; throw E }\nfn f() -> unit @effect(A) {\n    try { g() } catch E { perform release }\n}";
    assert!(early(&sys, caught).is_empty(), "{:?}", check_source(&sys, caught));
}

#[test]
fn early_return_respects_the_bound() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) {\n    perform atomic;\n    if true { return } else {};\n    perform local\n}";
    assert!(early(&sys, src).is_empty());
    assert!(global(&sys, src).is_empty());
}

#[test]
fn loops_iterate_their_body() {
    let sys = atomicity::system();
    let ok = "fn f() -> unit @effect(L) { while true { perform release } }";
    assert!(early(&sys, ok).is_empty());
    let bad = "fn f() -> unit @effect(A) {\n    while true { perform atomic }\n}";
    assert_eq!(early(&sys, bad), vec![(ResidualUndefined, 2)]);
    assert_eq!(global(&sys, bad), vec![BoundExceeded]);
}

#[test]
fn undefined_iteration_is_reported_at_the_header() {
    let sys = reentrancy::system();
    let src = "fn f() -> unit @effect(entrant) {\n    while true {\n        perform begin\n    }\n}";
    let d = check_source(&sys, src);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].kind, UndefinedIter);
    assert_eq!(&src[d[0].span.start..d[0].span.end], "while true");
}

#[test]
fn breaks_fold_into_the_loop_effect() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) { while true { perform atomic; break } }";
    assert!(early(&sys, src).is_empty(), "{:?}", check_source(&sys, src));
    assert!(global(&sys, src).is_empty());
}

#[test]
fn type_errors() {
    let sys = atomicity::system();
    assert_eq!(early(&sys, "fn f() -> unit @effect(A) { x }"), vec![(UnboundVar, 1)]);
    assert_eq!(early(&sys, "fn f() -> unit @effect(A) { if 1 {} }"), vec![(TypeMismatch, 1)]);
    assert_eq!(early(&sys, "fn f() -> unit @effect(A) { let x = 1; x(2) }"), vec![(NotAFunction, 1)]);
    assert_eq!(early(&sys, "fn f() -> bool @effect(A) { () }"), vec![(TypeMismatch, 1)]);
}

#[test]
fn one_residual_check_per_construct() {
    let sys = atomicity::system();
    let src = "fn g() -> unit @effect(L) { perform release }\nfn f() -> unit @effect(T) {\n    perform local;\n    g();\n    if true { perform release } else { perform local };\n    while false { perform local };\n    (\\(x: unit) @effect(B) => perform local)(())\n}";
    let p = resolve(&parse(src).unwrap(), &sys).unwrap();
    let (out, stats) = early_check(&sys, &p, &CheckOptions::default());
    assert!(out.iter().all(|o| o.accepted()));
    // g: 1 perform. f: perform, call, 2 performs + if, perform + while,
    // lambda body perform + app.
    assert_eq!(stats.residual_checks, 1 + 1 + 1 + 3 + 2 + 2);
}

#[test]
fn completability_holds_on_accepted_code() {
    let sys = atomicity::system();
    let src = "fn f() -> unit @effect(A) {\n    perform acquire;\n    if true { perform local } else { perform atomic };\n    while false { perform release }\n}";
    let p = resolve(&parse(src).unwrap(), &sys).unwrap();
    let opts = CheckOptions { verify_completability: true, ..Default::default() };
    let (out, stats) = early_check(&sys, &p, &opts);
    assert!(out[0].accepted(), "{:?}", out[0].diagnostics);
    assert!(stats.completability_checks > 5);
    assert_eq!(stats.completability_violations, 0);
}

#[test]
fn accepted_effects_agree() {
    let sys = atomicity::system();
    let src = "exception E;\nfn f() -> unit @effect(T) @throws(E, A) {\n    perform release;\n    if true { throw E } else { perform acquire };\n    while true { perform local; break }\n}";
    let p = resolve(&parse(src).unwrap(), &sys).unwrap();
    let g = global_check(&sys, &p);
    let (e, _) = early_check(&sys, &p, &CheckOptions::default());
    assert!(g[0].accepted() && e[0].accepted(), "{:?} {:?}", g[0].diagnostics, e[0].diagnostics);
    assert_eq!(g[0].effect, e[0].effect);
    assert_eq!(g[0].ty, e[0].ty);
}
