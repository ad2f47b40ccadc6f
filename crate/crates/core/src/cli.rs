//! Command-line driver. [`run`] is the whole program minus process exit, so
//! it can be driven from tests with in-memory streams.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::checker::check_source;
use crate::diagnostic::{Diagnostic, Kind, Report};
use crate::oracle::equivalence_run;
use crate::quantale::laws::check_laws;
use crate::quantale::EffectSystem;
use crate::registry::{lookup, validate_key};
use crate::syntax::{LineIndex, Span};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "residuum", version, about = "Sequential effect checker with early error localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check source files.
    Check {
        #[arg(long, env = "RESIDUUM_SYSTEM")]
        system: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Print at most N diagnostics.
        #[arg(long)]
        max_errors: Option<usize>,
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Verify the effect system's algebraic laws.
    Laws {
        #[arg(long, env = "RESIDUUM_SYSTEM")]
        system: String,
        /// Random triples drawn for infinite carriers.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Compare the early and global checkers on every small program.
    Verify {
        #[arg(long, env = "RESIDUUM_SYSTEM")]
        system: String,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
    },
    /// Show the remaining budget after each atom of a sequence.
    Explain {
        #[arg(long, env = "RESIDUUM_SYSTEM")]
        system: String,
        /// Comma-separated atom labels; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        seq: String,
        #[arg(long)]
        bound: String,
    },
}

/// Runs the CLI and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_CLEAN };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { system, format, max_errors, paths } => cmd_check(&system, format, max_errors, &paths, out),
        Command::Laws { system, samples } => cmd_laws(&system, samples, out),
        Command::Verify { system, max_nodes } => cmd_verify(&system, max_nodes, out),
        Command::Explain { system, seq, bound } => cmd_explain(&system, &seq, &bound, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_USAGE
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn system(key: &str) -> Result<EffectSystem, CliError> {
    lookup(key).map_err(|e| CliError::Usage(e.to_string()))
}

/// Checks one file; unreadable files yield a single `IoError` diagnostic.
pub fn check_file(sys: &EffectSystem, path: &std::path::Path) -> Vec<Report> {
    let file = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(src) => {
            let index = LineIndex::new(&src);
            check_source(sys, &src).iter().map(|d| Report::new(&file, &index, sys.name(), d)).collect()
        }
        Err(e) => {
            let d = Diagnostic::new(Kind::IoError, Span::new(0, 0), format!("cannot read file: {e}"));
            vec![Report::new(&file, &LineIndex::new(""), sys.name(), &d)]
        }
    }
}

fn cmd_check(
    key: &str,
    format: Format,
    max_errors: Option<usize>,
    paths: &[PathBuf],
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    validate_key(key).map_err(|e| CliError::Usage(e.to_string()))?;
    let sys = system(key)?;
    let mut reports: Vec<Report> = std::thread::scope(|s| {
        let handles: Vec<_> = paths.iter().map(|p| s.spawn(|| check_file(&sys, p))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("checker thread panicked")).collect()
    });
    reports.sort_by(|a, b| (&a.file, a.offset).cmp(&(&b.file, b.offset)));
    let code = if reports.is_empty() { EXIT_CLEAN } else { EXIT_FINDINGS };
    if let Some(n) = max_errors {
        reports.truncate(n);
    }
    match format {
        Format::Text => {
            for r in &reports {
                writeln!(out, "{r}")?;
            }
        }
        Format::Json => {
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
            writeln!(out, "{json}")?;
        }
    }
    Ok(code)
}

fn cmd_laws(key: &str, samples: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = system(key)?;
    let report = check_laws(&sys, samples).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{report}")?;
    Ok(if report.passed() { EXIT_CLEAN } else { EXIT_FINDINGS })
}

fn cmd_verify(key: &str, max_nodes: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = system(key)?;
    let report = equivalence_run(&sys, max_nodes, None).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{report}")?;
    Ok(if report.passed() { EXIT_CLEAN } else { EXIT_FINDINGS })
}

fn cmd_explain(key: &str, seq: &str, bound: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let sys = system(key)?;
    let usage = |e: crate::quantale::EffectError| CliError::Usage(e.to_string());
    let bound_effect = sys.parse_effect(bound).map_err(usage)?;
    let labels: Vec<&str> = seq.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let mut atoms = Vec::with_capacity(labels.len());
    for l in &labels {
        let atom = sys.atom(l).ok_or_else(|| {
            let known: Vec<&str> = sys.atom_labels().collect();
            CliError::Usage(format!("unknown label `{l}` (known: {})", known.join(", ")))
        })?;
        atoms.push(atom);
    }
    writeln!(out, "bound: {}", sys.render(&bound_effect))?;
    let mut sofar = sys.unit();
    writeln!(out, "step 0: sofar={} remaining={}", sys.render(&sofar), sys.render(&bound_effect))?;
    for (i, (label, atom)) in labels.iter().zip(&atoms).enumerate() {
        let step = i + 1;
        let Some(next) = sys.seq(&sofar, atom).map_err(usage)? else {
            writeln!(out, "step {step}: {label}: sofar=UNDEFINED")?;
            writeln!(out, "{} cannot be followed by {label}", sys.render(&sofar))?;
            return Ok(EXIT_FINDINGS);
        };
        sofar = next;
        match sys.residual(&sofar, &bound_effect).map_err(usage)? {
            Some(r) => writeln!(out, "step {step}: {label}: sofar={} remaining={}", sys.render(&sofar), sys.render(&r))?,
            None => {
                writeln!(out, "step {step}: {label}: sofar={} remaining=UNDEFINED", sys.render(&sofar))?;
                writeln!(
                    out,
                    "no continuation after {} stays within {}",
                    sys.render(&sofar),
                    sys.render(&bound_effect)
                )?;
                return Ok(EXIT_FINDINGS);
            }
        }
    }
    Ok(EXIT_CLEAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("residuum").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn explain_atomicity() {
        let (code, out, _) = run_str(&["explain", "--system", "atomicity", "--seq", "atomic,atomic", "--bound", "A"]);
        assert_eq!(code, EXIT_FINDINGS);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[2].ends_with("remaining=L"), "{out}");
        assert!(lines[3].ends_with("remaining=UNDEFINED"), "{out}");
    }

    #[test]
    fn explain_empty_sequence_leaves_the_bound() {
        let (code, out, _) = run_str(&["explain", "--system", "atomicity", "--seq", "", "--bound", "A"]);
        assert_eq!(code, EXIT_CLEAN);
        assert!(out.lines().last().unwrap().ends_with("remaining=A"), "{out}");
    }

    #[test]
    fn explain_local_stays_defined() {
        let (code, out, _) = run_str(&["explain", "--system", "atomicity", "--seq", "local,local", "--bound", "A"]);
        assert_eq!(code, EXIT_CLEAN, "{out}");
        assert!(!out.contains("UNDEFINED"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["check", "--system", "bogus", "/nonexistent"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["explain", "--system", "atomicity", "--seq", "nope", "--bound", "A"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_CLEAN);
    }
}
