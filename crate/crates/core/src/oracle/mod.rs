//! Brute-force oracles: word-level semantics for traces, exhaustive program
//! enumeration, and a from-scratch earliest-failure computation used to
//! validate the checkers against each other.

pub mod earliest;
pub mod enumerate;
pub mod equivalence;
pub mod words;

pub use earliest::{earliest_failure, OracleError};
pub use enumerate::{enumerate_programs, Enumerated};
pub use equivalence::{equivalence_run, Divergence, EquivalenceReport};

#[cfg(test)]
mod tests {
    use super::enumerate::body_count_by_size;
    use super::*;
    use crate::checker::Fault;
    use crate::instances::{atomicity, reentrancy};
    use crate::syntax::{parse, resolve};

    /// Counts bodies of each size from the grammar's recurrences.
    fn closed_form(atoms: usize, latents: usize, max: usize) -> Vec<usize> {
        let cond = |n: usize| match n {
            1 => 1,
            3 => atoms,
            _ => 0,
        };
        let mut w = vec![0usize; max + 1];
        let mut t = vec![0usize; max + 1];
        for n in 1..=max {
            w[n] = if n == 1 { atoms } else { (1..n - 1).map(|i| w[i] * w[n - 1 - i]).sum() };
            let seq: usize = (1..n.saturating_sub(1)).map(|i| t[i] * t[n - 1 - i]).sum();
            let mut ifs = 0;
            let mut if_else = 0;
            let mut loops = 0;
            for c in 1..n {
                let rest = n - 1 - c;
                ifs += cond(c) * t[rest];
                loops += cond(c) * w[rest];
                for i in 1..rest {
                    if_else += cond(c) * t[i] * t[rest - i];
                }
            }
            let apps = if n >= 4 { latents * w[n - 3] } else { 0 };
            t[n] = if n == 1 { atoms } else { 0 } + seq + ifs + if_else + loops + apps;
        }
        t[1..].to_vec()
    }

    #[test]
    fn enumeration_counts_match_the_recurrence() {
        assert_eq!(body_count_by_size(5, 5, 7), closed_form(5, 5, 7));
        assert_eq!(body_count_by_size(5, 5, 5), vec![5, 0, 35, 50, 460]);
        let sys = reentrancy::system();
        let total: usize = closed_form(5, 5, 5).iter().sum();
        assert_eq!(enumerate_programs(&sys, 5).len(), total * 5);
    }

    #[test]
    fn small_enumerations() {
        let sys = atomicity::system();
        assert!(enumerate_programs(&sys, 0).is_empty());
        let two = enumerate_programs(&sys, 2);
        assert_eq!(two.len(), 25);
        assert!(two.iter().any(|p| p.source.contains("@effect(T)") && p.source.contains("perform compound")));
    }

    #[test]
    fn oracle_spot_values() {
        let sys = atomicity::system();
        let src = "fn f() -> unit @effect(A) {\n    perform atomic;\n    perform atomic\n}";
        let p = resolve(&parse(src).unwrap(), &sys).unwrap();
        let at = earliest_failure(&sys, &p.functions[0]).unwrap().unwrap();
        assert_eq!(&src[at.start..at.end], "perform atomic");
        assert_eq!(at.start, src.rfind("perform atomic").unwrap());

        let rsys = reentrancy::system();
        let src = "fn f() -> unit @effect(critical) { perform begin }";
        let p = resolve(&parse(src).unwrap(), &rsys).unwrap();
        let at = earliest_failure(&rsys, &p.functions[0]).unwrap().unwrap();
        assert_eq!(at.start, src.find("perform").unwrap());

        let ok = "fn f() -> unit @effect(A) { perform atomic }";
        let p = resolve(&parse(ok).unwrap(), &sys).unwrap();
        assert_eq!(earliest_failure(&sys, &p.functions[0]).unwrap(), None);
    }

    #[test]
    fn checkers_agree_on_small_atomicity_programs() {
        let r = equivalence_run(&atomicity::system(), 4, None).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.accepted > 0 && r.rejected > 0);
    }

    #[test]
    fn planted_fault_is_detected() {
        let r = equivalence_run(&atomicity::system(), 3, Some(Fault::SkipPerformCheck)).unwrap();
        assert!(r.divergence_count > 0, "{r}");
    }
}
