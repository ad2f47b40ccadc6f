//! Randomized properties over generated programs and effects.

use proptest::prelude::*;

use residuum::checker::{early_check, global_check, CheckOptions};
use residuum::instances::trace::{Regex, TraceQuantale};
use residuum::instances::{atomicity, reentrancy};
use residuum::oracle::earliest::{earliest_failure, OracleError};
use residuum::oracle::words::{in_quotient, is_finite, language, matches, max_len, words_upto};
use residuum::quantale::{Carrier, EffectSystem, Payload};
use residuum::syntax::ast::{EraseSpans, Expr};
use residuum::syntax::{parse, print_program, resolve};

const MOVERS: [&str; 4] = ["B", "L", "R", "A"];
const ATOMS: [&str; 4] = ["local", "release", "acquire", "atomic"];

#[derive(Clone, Copy)]
struct Scope {
    in_loop: bool,
    /// Restrict to constructs the earliest-failure oracle understands.
    core: bool,
}

fn cond(core: bool) -> BoxedStrategy<String> {
    let mut opts = vec![Just("true".to_string()).boxed(), prop::sample::select(ATOMS.to_vec()).prop_map(|a| format!("{{ perform {a}; true }}")).boxed()];
    if !core {
        opts.push(Just("flag".to_string()).boxed());
        opts.push(Just("probe()".to_string()).boxed());
    }
    prop::strategy::Union::new(opts).boxed()
}

fn block(depth: u32, scope: Scope) -> BoxedStrategy<String> {
    prop::collection::vec(stmt(depth, scope), 1..4).prop_map(|v| format!("{{ {} }}", v.join("; "))).boxed()
}

fn stmt(depth: u32, scope: Scope) -> BoxedStrategy<String> {
    let atom = prop::sample::select(ATOMS.to_vec()).prop_map(|a| format!("perform {a}")).boxed();
    if depth == 0 {
        return atom;
    }
    let d = depth - 1;
    let looped = Scope { in_loop: true, ..scope };
    let fresh = Scope { in_loop: false, ..scope };
    let mut opts: Vec<(u32, BoxedStrategy<String>)> = vec![
        (4, atom),
        (1, (cond(scope.core), block(d, scope)).prop_map(|(c, t)| format!("if {c} {t}")).boxed()),
        (1, (cond(scope.core), block(d, scope), block(d, scope)).prop_map(|(c, t, f)| format!("if {c} {t} else {f}")).boxed()),
        (1, (cond(scope.core), block(d, looped)).prop_map(|(c, b)| format!("while {c} {b}")).boxed()),
        (
            1,
            (prop::sample::select(MOVERS.to_vec()), block(d, fresh))
                .prop_map(|(m, b)| format!("(\\(u: unit) @effect({m}) => {b})(())"))
                .boxed(),
        ),
    ];
    if !scope.core {
        opts.push((1, Just("helper()".to_string()).boxed()));
        opts.push((1, Just("throw E".to_string()).boxed()));
        opts.push((1, Just("return".to_string()).boxed()));
        opts.push((1, (block(d, scope), block(d, scope)).prop_map(|(b, h)| format!("try {b} catch E {h}")).boxed()));
        opts.push((1, block(d, scope).prop_map(|b| format!("let v = probe(); {b}")).boxed()));
        if scope.in_loop {
            opts.push((1, Just("break".to_string()).boxed()));
        }
    }
    prop::strategy::Union::new_weighted(opts).boxed()
}

fn program(core: bool) -> BoxedStrategy<String> {
    let scope = Scope { in_loop: false, core };
    (prop::sample::select(vec!["B", "L", "R", "A", "T"]), block(3, scope))
        .prop_map(move |(m, body)| {
            if core {
                format!("fn f() -> unit @effect({m}) {body}\n")
            } else {
                format!(
                    "exception E;\n\
                     fn probe() -> bool @effect(B) {{ true }}\n\
                     fn helper() -> unit @effect(R) @throws(E, R) {{ perform acquire }}\n\
                     fn f(flag: bool) -> unit @effect({m}) @throws(E, A) {body}\n"
                )
            }
        })
        .boxed()
}

fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    out.push(e);
    for c in e.children() {
        walk(c, out);
    }
}

fn shape(src: &str) -> residuum::syntax::Program {
    let mut p = parse(src).unwrap_or_else(|e| panic!("{e:?}\n{src}"));
    p.erase_spans();
    p
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printing_round_trips(src in program(false)) {
        let once = print_program(&parse(&src).unwrap());
        prop_assert_eq!(shape(&once), shape(&src));
        prop_assert_eq!(print_program(&parse(&once).unwrap()), once);
    }

    #[test]
    fn child_spans_nest(src in program(false)) {
        let p = parse(&src).unwrap();
        for f in &p.functions {
            prop_assert!(f.span.contains(f.body.span));
            let mut nodes = Vec::new();
            walk(&f.body, &mut nodes);
            for n in nodes {
                for c in n.children() {
                    prop_assert!(n.span.contains(c.span), "{:?} not inside {:?}", c.span, n.span);
                }
            }
        }
    }

    #[test]
    fn early_and_global_agree(src in program(false)) {
        let sys = atomicity::system();
        let prog = resolve(&parse(&src).unwrap(), &sys).unwrap();
        let global = global_check(&sys, &prog);
        let (early, stats) = early_check(&sys, &prog, &CheckOptions { fault: None, verify_completability: true });
        prop_assert_eq!(stats.completability_violations, 0);
        for (g, e) in global.iter().zip(&early) {
            prop_assert_eq!(g.accepted(), e.accepted(), "{}: {:?} vs {:?}", g.name, g.diagnostics, e.diagnostics);
            if g.accepted() {
                prop_assert_eq!(&g.effect, &e.effect);
            }
        }
    }

    #[test]
    fn first_diagnostic_is_the_earliest_failure(src in program(true), reent in any::<bool>()) {
        let (sys, src): (EffectSystem, String) = if reent {
            let r = src
                .replace("perform local", "perform noop")
                .replace("perform release", "perform end")
                .replace("perform acquire", "perform begin")
                .replace("perform atomic", "perform critical");
            let r = ["B", "L", "R", "A", "T"].iter().zip(["epsilon", "unlocking", "locking", "critical", "entrant"]).fold(r, |s, (m, n)| {
                s.replace(&format!("@effect({m})"), &format!("@effect({n})"))
            });
            (reentrancy::system(), r)
        } else {
            (atomicity::system(), src)
        };
        let prog = resolve(&parse(&src).unwrap(), &sys).unwrap();
        let (early, _) = early_check(&sys, &prog, &CheckOptions::default());
        let f = &prog.functions[0];
        match earliest_failure(&sys, f) {
            Ok(want) => prop_assert_eq!(early[0].diagnostics.first().map(|d| d.span), want, "{}", src),
            Err(OracleError::Unsupported(_)) => {}
            Err(e) => panic!("{e:?}"),
        }
    }

    #[test]
    fn trace_operations_match_words(seed in any::<u64>(), sx in 1usize..=5, sy in 1usize..=5) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Regex::random(&mut rng, 2, sx);
        let y = Regex::random(&mut rng, 2, sy);
        let q = TraceQuantale::new(vec!["a".into(), "b".into()]).unwrap();
        let lang = |p: Payload| match p { Payload::Lang(d) => d, Payload::Elem(_) => unreachable!() };
        let (px, py) = (q.compile(&x).unwrap(), q.compile(&y).unwrap());
        let seq = lang(q.seq(&px, &py).unwrap().unwrap());
        let cat = Regex::Cat(Box::new(x.clone()), Box::new(y.clone()));
        let words = words_upto(2, 4);
        for w in &words {
            prop_assert_eq!(seq.accepts(w), matches(&cat, w));
        }
        if is_finite(&x) && max_len(&x) <= 4 {
            let pre = language(&x, 2, 4);
            let defined = q.residual(&px, &py).unwrap().map(lang);
            for w in &words {
                let want = in_quotient(&pre, &y, w);
                prop_assert_eq!(defined.as_ref().is_some_and(|r| r.accepts(w)), want, "{:?} \\ {:?} on {:?}", x, y, w);
            }
        }
    }
}
