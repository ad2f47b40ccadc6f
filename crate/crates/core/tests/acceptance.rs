//! Acceptance run: one PASS/FAIL line per criterion, with its time limit.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use residuum::checker::{check_source, diagnostic_lines};
use residuum::control::{ControlAlgebra, ControlEffect, ControlTag, ExcId, TagPoset};
use residuum::diagnostic::Kind;
use residuum::instances::trace::{Regex, TraceQuantale, SAMPLE_SIZE};
use residuum::instances::{atomicity, lift, must, pmonad, reentrancy, trace};
use residuum::oracle::equivalence_run;
use residuum::oracle::words::{in_quotient, is_finite, language, matches, max_len, words_upto};
use residuum::quantale::laws::{check_exhaustive, check_sampled, LawSet};
use residuum::quantale::{check_laws, derive_residual, Carrier, EffectSystem, FiniteQuantale, Payload};

const MARKER: &str = "// <-- Error reported here";
const WORD_LEN: usize = 4;
const TRACE_TRIPLES: usize = 1000;

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn corpus(file: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", file].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn marker_lines(src: &str) -> Vec<usize> {
    src.lines().enumerate().filter(|(_, l)| l.contains(MARKER)).map(|(i, _)| i + 1).collect()
}

fn within(limit: Duration, start: Instant, what: &str) -> String {
    let took = start.elapsed();
    assert!(took < limit, "{what} took {took:?}, limit {limit:?}");
    format!("{what} {:.2}s < {}s", took.as_secs_f64(), limit.as_secs())
}

/// Checks a corpus file and requires exactly the marked lines to carry
/// diagnostics of `kind`, spanning `texts` in order.
fn expect_marked(sys: &EffectSystem, file: &str, kind: Kind, texts: &[&str]) {
    let src = corpus(file);
    let diags = check_source(sys, &src);
    let want = marker_lines(&src);
    assert!(!want.is_empty(), "{file} has no marker");
    assert_eq!(diagnostic_lines(&src, &diags), want, "{file}: {diags:?}");
    for (d, text) in diags.iter().zip(texts) {
        assert_eq!(d.kind, kind, "{file}: {d:?}");
        assert_eq!(d.span.text(&src), *text, "{file}: {d:?}");
    }
}

// Criterion 1 -------------------------------------------------------------

fn trace_cross_check(q: &TraceQuantale, x: &Regex, y: &Regex) {
    let lang = |p: &Payload| match p {
        Payload::Lang(d) => d.clone(),
        Payload::Elem(_) => panic!("finite payload in trace"),
    };
    let words = words_upto(2, WORD_LEN);
    let (px, py) = (q.compile(x).unwrap(), q.compile(y).unwrap());
    let dx = lang(&px);
    let cat = Regex::Cat(Box::new(x.clone()), Box::new(y.clone()));
    let alt = Regex::Alt(Box::new(x.clone()), Box::new(y.clone()));
    let star = Regex::Star(Box::new(x.clone()));
    let seq = lang(&q.seq(&px, &py).unwrap().unwrap());
    let join = lang(&q.join(&px, &py).unwrap().unwrap());
    let iter = lang(&q.iter(&px).unwrap().unwrap());
    for w in &words {
        assert_eq!(dx.accepts(w), matches(x, w), "compile {x:?} on {w:?}");
        assert_eq!(seq.accepts(w), matches(&cat, w), "seq on {w:?}");
        assert_eq!(join.accepts(w), matches(&alt, w), "join on {w:?}");
        assert_eq!(iter.accepts(w), matches(&star, w), "iter on {w:?}");
    }
    let short_x = language(x, 2, WORD_LEN);
    let short_y = language(y, 2, WORD_LEN);
    if q.le(&px, &py).unwrap() {
        assert!(short_x.is_subset(&short_y), "le {x:?} {y:?}");
    }
    if !short_x.is_subset(&short_y) {
        assert!(!q.le(&px, &py).unwrap());
    }
    let exact = is_finite(x) && max_len(x) <= WORD_LEN;
    match q.residual(&px, &py).unwrap() {
        Some(r) => {
            let r = lang(&r);
            for w in &words {
                let oracle = in_quotient(&short_x, y, w);
                if exact {
                    assert_eq!(r.accepts(w), oracle, "residual {x:?} {y:?} on {w:?}");
                } else if r.accepts(w) {
                    assert!(oracle, "residual {x:?} {y:?} admits {w:?}");
                }
            }
        }
        None => {
            if exact {
                assert!(words.iter().all(|w| !in_quotient(&short_x, y, w)), "residual {x:?} {y:?} undefined");
            }
        }
    }
}

fn criterion_1() -> String {
    let start = Instant::now();
    let systems = [
        atomicity::system(),
        reentrancy::system(),
        must::system(&names(&["a", "b", "c"])).unwrap(),
        pmonad::system(&names(&["s1", "s2", "s3"])).unwrap(),
        lift::powerset_lift(&names(&["x", "y"])).unwrap(),
    ];
    for s in &systems {
        let r = check_laws(s, 0).unwrap();
        assert_eq!(r.mode, "exhaustive");
        assert_eq!(r.failures(), 0, "{r}");
    }
    let finite = within(Duration::from_secs(5), start, "finite");

    let start = Instant::now();
    let alphabet = names(&["a", "b"]);
    let sys = trace::system(&alphabet).unwrap();
    let q = TraceQuantale::new(alphabet).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ace);
    let mut draw = || {
        let size = rand::Rng::random_range(&mut rng, 1..=SAMPLE_SIZE);
        Regex::random(&mut rng, 2, size)
    };
    let triples: Vec<(Regex, Regex, Regex)> = (0..TRACE_TRIPLES).map(|_| (draw(), draw(), draw())).collect();
    let effects: Vec<_> = triples
        .iter()
        .map(|(x, y, z)| {
            let e = |r: &Regex| sys.from_payload(q.compile(r).unwrap());
            (e(x), e(y), e(z))
        })
        .collect();
    let r = check_sampled(&sys, sys.name(), &effects, LawSet::FULL).unwrap();
    assert_eq!(r.size, TRACE_TRIPLES);
    assert_eq!(r.failures(), 0, "{r}");
    for (x, y, z) in &triples {
        trace_cross_check(&q, x, y);
        trace_cross_check(&q, y, z);
    }
    format!("{finite}; {}", within(Duration::from_secs(60), start, "trace"))
}

// Criterion 2 -------------------------------------------------------------

fn criterion_2() -> String {
    let mut parts = Vec::new();
    for sys in [atomicity::system(), reentrancy::system()] {
        let start = Instant::now();
        let r = equivalence_run(&sys, 5, None).unwrap();
        assert!(r.programs > 0 && r.accepted > 0 && r.rejected > 0, "{r}");
        assert_eq!(r.divergence_count, 0, "{r}");
        assert_eq!(r.completability_violations, 0, "{r}");
        parts.push(format!("{} programs, {}", r.programs, within(Duration::from_secs(120), start, sys.name())));
    }
    parts.join("; ")
}

// Criteria 3 and 4 --------------------------------------------------------

fn criterion_3() -> String {
    let start = Instant::now();
    let sys = atomicity::system();
    expect_marked(&sys, "append.eff", Kind::ResidualUndefined, &["get_chars(len)"]);
    expect_marked(&sys, "content_equals.eff", Kind::ResidualUndefined, &["get_value()"]);
    within(Duration::from_secs(1), start, "both files")
}

fn criterion_4() -> String {
    let start = Instant::now();
    let sys = reentrancy::system();
    let clean = corpus("transaction.eff");
    let d = check_source(&sys, &clean);
    assert!(d.is_empty(), "{d:?}");
    let code = residuum::cli::run(
        [
            "residuum",
            "check",
            "--system",
            "reentrancy",
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/transaction.eff"),
        ],
        &mut Vec::new(),
        &mut Vec::new(),
    );
    assert_eq!(code, 0);
    expect_marked(&sys, "nested_transaction.eff", Kind::ResidualUndefined, &["begin_transaction()"]);
    let src = corpus("nested_transaction.eff");
    let body_start = src.find("fn do_work").unwrap();
    let first_stmt = src[body_start..].find('{').unwrap() + body_start;
    let d = check_source(&sys, &src);
    assert_eq!(src[first_stmt + 1..].trim_start().as_ptr(), src[d[0].span.start..].as_ptr(), "begin is first");
    expect_marked(&sys, "nested_begin.eff", Kind::UndefinedSeq, &["perform begin"]);
    within(Duration::from_secs(1), start, "three files")
}

// Criterion 5 -------------------------------------------------------------

/// The greatest `r` with `x ▷ r ⊑ z`, by search over the whole carrier.
fn brute_residual(q: &FiniteQuantale, x: usize, z: usize) -> Option<usize> {
    let fits: Vec<usize> = (0..q.len()).filter(|&r| q.seq_ix(x, r).is_some_and(|s| q.le_ix(s, z))).collect();
    fits.iter().copied().find(|&g| fits.iter().all(|&r| q.le_ix(r, g)))
}

fn finite_spot(q: &FiniteQuantale, x: &str, z: &str, want: Option<&str>) {
    let ix = |n: &str| q.index_of(n).unwrap_or_else(|| panic!("no element {n}"));
    let want = want.map(ix);
    let (x, z) = (ix(x), ix(z));
    assert_eq!(q.residual_ix(x, z), want, "{} \\ {}", q.name(x), q.name(z));
    assert_eq!(derive_residual(q, x, z), want, "derived {} \\ {}", q.name(x), q.name(z));
    assert_eq!(brute_residual(q, x, z), want, "brute {} \\ {}", q.name(x), q.name(z));
}

fn criterion_5() -> String {
    let a = atomicity::quantale();
    finite_spot(&a, "L", "A", Some("L"));
    finite_spot(&a, "A", "A", Some("L"));
    let r = reentrancy::quantale();
    finite_spot(&r, "locking", "critical", None);
    finite_spot(&r, "locking", "entrant", Some("unlocking"));
    let m = must::quantale(&names(&["a", "b", "c"])).unwrap();
    finite_spot(&m, "{a}", "{a,b}", Some("{b}"));
    let p = pmonad::quantale(&names(&["s1", "s2", "s3"])).unwrap();
    finite_spot(&p, "(s1,s2)", "(s1,s3)", Some("(s2,s3)"));

    let mut units = 0;
    for q in [&a, &r, &m, &p] {
        for z in 0..q.len() {
            assert_eq!(q.residual_ix(q.unit_index(), z), Some(z));
            assert_eq!(brute_residual(q, q.unit_index(), z), Some(z));
            units += 1;
        }
    }

    let alphabet = names(&["a", "b", "c"]);
    let sys = trace::system(&alphabet).unwrap();
    let e = |t: &str| sys.parse_effect(t).unwrap();
    assert_eq!(sys.residual(&e("a"), &e("ab|ac")).unwrap(), Some(e("b|c")));
    let x = residuum::instances::trace::regex::parse("a", &alphabet).unwrap();
    let y = residuum::instances::trace::regex::parse("ab|ac", &alphabet).unwrap();
    let prefixes = language(&x, 3, 1);
    let quotient: BTreeSet<Vec<usize>> =
        words_upto(3, 3).into_iter().filter(|w| in_quotient(&prefixes, &y, w)).collect();
    assert_eq!(quotient, BTreeSet::from([vec![1], vec![2]]));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let z = sys.sample(&mut rng).unwrap();
        assert_eq!(sys.residual(&sys.unit(), &z).unwrap(), Some(z));
        units += 1;
    }
    format!("8 spot values, unit residuation on {units} elements")
}

// Criterion 6 -------------------------------------------------------------

fn arb_control(poset: &TagPoset) -> impl Strategy<Value = (Option<usize>, Vec<Option<usize>>)> {
    let n = poset.len();
    (proptest::option::of(0..5usize), proptest::collection::vec(proptest::option::of(0..5usize), n))
}

fn criterion_6() -> String {
    let start = Instant::now();
    let sys = atomicity::system();
    let elems: Vec<_> = sys.elements().unwrap();
    let poset = TagPoset::discrete(2);
    let alg = ControlAlgebra::new(&sys, &poset);
    let tags = [ControlTag::Exception(ExcId(0)), ControlTag::Exception(ExcId(1))];
    let carrier = alg.enumerate(&tags).unwrap();
    let r = check_exhaustive(&alg, "exceptions(atomicity)", &carrier, LawSet::AXIOMS).unwrap();
    assert_eq!(r.failures(), 0, "{r}");
    for law in ["residual_bounding", "residual_existence", "residual_unit", "seq_associative"] {
        assert!(r.law(law).is_some_and(|l| l.checked > 0), "{law} unchecked");
    }
    let laws = within(Duration::from_secs(30), start, "laws");

    let lift = |e: &residuum::quantale::Effect| alg.lift(e.clone());
    let mut pairs = 0;
    for x in &elems {
        assert_eq!(alg.iter(&lift(x)).unwrap(), sys.iter(x).unwrap().map(|i| lift(&i)));
        for y in &elems {
            assert_eq!(alg.seq(&lift(x), &lift(y)).unwrap(), sys.seq(x, y).unwrap().map(|s| lift(&s)));
            assert_eq!(alg.join(&lift(x), &lift(y)).unwrap(), sys.join(x, y).unwrap().map(|s| lift(&s)));
            assert_eq!(alg.le(&lift(x), &lift(y)).unwrap(), sys.le(x, y).unwrap());
            assert_eq!(alg.residual(&lift(x), &lift(y)).unwrap(), sys.residual(x, y).unwrap().map(|s| lift(&s)));
            pairs += 1;
        }
    }
    assert_eq!(alg.unit(), lift(&sys.unit()));

    let mut hier = TagPoset::new();
    hier.declare("E", None).unwrap();
    hier.declare("Sub", Some("E")).unwrap();
    hier.declare("Leaf", Some("Sub")).unwrap();
    let halg = ControlAlgebra::new(&sys, &hier);
    let all: Vec<ExcId> = ["E", "Sub", "Leaf"].iter().map(|n| hier.lookup(n).unwrap()).collect();
    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    let built = std::cell::Cell::new(0);
    runner
        .run(&arb_control(&hier), |(normal, prefixes)| {
            let controls: Vec<_> = all
                .iter()
                .zip(&prefixes)
                .filter_map(|(t, p)| p.map(|i| (ControlTag::Exception(*t), elems[i].clone())))
                .collect();
            let Some(c) = ControlEffect::from_parts(normal.map(|i| elems[i].clone()), controls) else {
                return Ok(());
            };
            built.set(built.get() + 1);
            let n = halg.normalize_subtyping(&c).unwrap();
            prop_assert_eq!(&n.normal, &c.normal);
            for (t, p) in n.controls() {
                for (u, q) in n.controls() {
                    if hier.le(*t, *u) {
                        prop_assert!(sys.le(p, q).unwrap(), "{} under {}", halg.render(&n), halg.render(&c));
                    }
                }
                prop_assert!(sys.le(c.get(*t).unwrap(), p).unwrap());
            }
            prop_assert_eq!(halg.normalize_subtyping(&n).unwrap(), n);
            Ok(())
        })
        .unwrap_or_else(|e| panic!("{e}"));
    format!("{laws} over {} elements; embedding on {pairs} pairs; normalize on {} effects", carrier.len(), built.get())
}

// Criterion 7 -------------------------------------------------------------

fn criterion_7() -> String {
    let lifted = lift::powerset_lift(&names(&["x", "y", "z"])).unwrap();
    assert!(lifted.is_commutative());
    expect_marked(&lifted, "lift_two_violations.eff", Kind::ResidualUndefined, &["perform y", "perform z"]);
    let src = corpus("lift_two_violations.eff");
    assert_eq!(check_source(&lifted, &src).len(), 2);
    expect_marked(&atomicity::system(), "atomicity_two_violations.eff", Kind::ResidualUndefined, &["perform acquire"]);
    let src = corpus("atomicity_two_violations.eff");
    assert_eq!(check_source(&atomicity::system(), &src).len(), 1);
    "lift: 2 diagnostics, atomicity: 1".to_string()
}

type Criterion = fn() -> String;

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("algebra laws", criterion_1),
        ("early/global equivalence", criterion_2),
        ("atomicity case study", criterion_3),
        ("reentrancy case study", criterion_4),
        ("residual spot values", criterion_5),
        ("exception construction", criterion_6),
        ("commutative re-reporting", criterion_7),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(detail) => println!("{label}: PASS [{detail}]"),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("{label}: FAIL\n{msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
