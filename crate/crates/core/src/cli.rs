//! The `sti` command line. [`run`] does all the work and returns the exit
//! code with both output streams, so it can be tested without a process.
//!
//! Exit codes: 0 success, 1 a verdict failed, 2 usage or input error,
//! 3 fuel or search bounds exhausted.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::context::Context;
use crate::derivation::{
    check_derivation, from_json, parse_pretty, pretty_print, to_json, DecodeError, Derivation,
};
use crate::harness::{
    remark_family_report, render_remark_table, run_corpus, verify_bounds, BoundReport,
    CorpusConfig, HarnessError,
};
use crate::inference::{infer, infer_with_context, InferError, Inferred, SearchBounds};
use crate::measures::MeasureReport;
use crate::names::Name;
use crate::term::{parse_term, Strategy, Term, DEFAULT_FUEL};
use crate::transform::{normalize_with_derivation, TransformError};
use crate::types::parse_type;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sti",
    version,
    about = "Intersection type derivations, proof measures and reduction bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// leftmost-outermost
    Lo,
    /// rightmost-innermost
    Ri,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Lo => Strategy::LeftmostOutermost,
            StrategyArg::Ri => Strategy::RightmostInnermost,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Inline input
    #[arg(short = 'e', long = "expr")]
    pub expr: Option<String>,
    /// Read the input from a file
    #[arg(short = 'f', long = "file")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = SearchBounds::default().max_type_elements)]
    pub max_type_elements: usize,
    #[arg(long, default_value_t = SearchBounds::default().max_degree)]
    pub max_degree: u64,
    #[arg(long, default_value_t = SearchBounds::default().max_proof_size)]
    pub max_proof_size: u64,
    /// Search nodes the inference may expand
    #[arg(long, default_value_t = SearchBounds::default().time_fuel)]
    pub time_fuel: u64,
}

impl BoundsArgs {
    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            max_type_elements: self.max_type_elements,
            max_degree: self.max_degree,
            max_proof_size: self.max_proof_size,
            time_fuel: self.time_fuel,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a term and print it back
    Parse {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// Check a derivation (JSON, or the indented text layout)
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
    },
    /// Search for a derivation of a term
    Infer {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Fixed context, e.g. "z: ((a -> a) ∧ a), w: a"
        #[arg(long)]
        context: Option<String>,
    },
    /// Proof measures of a derivation
    Measure {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
        /// Weights to report (default: 1 up to max(rank, 2))
        #[arg(long = "r", value_delimiter = ',')]
        rs: Vec<u64>,
    },
    /// Normalize a term, carrying a derivation along every step
    Reduce {
        /// A term, or a derivation in JSON
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
        #[arg(long, value_enum, default_value_t = StrategyArg::Lo)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Include the derivation at every step
        #[arg(long)]
        with_derivation: bool,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Check the reduction bounds for a term against an inferred derivation
    Verify {
        /// A term, or a derivation in JSON
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        out: Output,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Report on the family (λx y. y x … x)(I I)
    Remark {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[command(flatten)]
        out: Output,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Run every corpus suite over generated terms
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        max_size: usize,
        #[command(flatten)]
        out: Output,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// State cap for each derivation-level reduction graph
        #[arg(long, default_value_t = 100_000)]
        graph_fuel: usize,
        /// Substitution pairs to sample
        #[arg(long, default_value_t = 200)]
        subst_pairs: usize,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, msg: impl std::fmt::Display) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            }
        }
    }
}

fn read_input(input: &Input) -> Result<String, Outcome> {
    match (&input.expr, &input.file) {
        (Some(e), _) => Ok(e.clone()),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Outcome::fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display()))),
        (None, None) => Err(Outcome::fail(EXIT_USAGE, "no input given")),
    }
}

fn parse_term_input(text: &str) -> Result<Term, Outcome> {
    parse_term(text.trim()).map_err(|e| Outcome::fail(EXIT_USAGE, e))
}

fn decode_derivation(text: &str) -> Result<Derivation, DecodeError> {
    if text.trim_start().starts_with('{') {
        let mut v: Value = serde_json::from_str(text)?;
        // accept the object `infer --format json` prints
        if let Some(d) = v.get_mut("derivation") {
            v = d.take();
        }
        from_json(v)
    } else {
        parse_pretty(text)
    }
}

fn derivation_input(text: &str) -> Result<Derivation, Outcome> {
    decode_derivation(text).map_err(|e| match e {
        DecodeError::Check(r) => {
            Outcome::fail(EXIT_VERDICT, format!("derivation does not check:\n{r}"))
        }
        e => Outcome::fail(EXIT_USAGE, e),
    })
}

/// A term to infer for, or a derivation given directly.
fn term_or_derivation(text: &str, b: &SearchBounds) -> Result<Derivation, Outcome> {
    if text.trim_start().starts_with('{') {
        return derivation_input(text);
    }
    let m = parse_term_input(text)?;
    infer(&m, b).map(|r| r.derivation).map_err(infer_failure)
}

fn infer_failure(e: InferError) -> Outcome {
    let code = match e {
        InferError::BoundsExhausted { .. } => EXIT_EXHAUSTED,
        InferError::InvalidBounds(_) | InferError::Context(_) => EXIT_USAGE,
        InferError::Internal(_) => EXIT_VERDICT,
    };
    Outcome::fail(code, e)
}

fn harness_failure(e: HarnessError) -> Outcome {
    match e {
        HarnessError::Infer(e) => infer_failure(e),
        e if e.is_exhaustion() => Outcome::fail(EXIT_EXHAUSTED, e),
        e @ HarnessError::Precondition(_) => Outcome::fail(EXIT_USAGE, e),
        e => Outcome::fail(EXIT_VERDICT, e),
    }
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => text(),
    }
}

fn parse_context(text: &str) -> Result<Context, Outcome> {
    let mut ctx = Context::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((x, t)) = part.split_once(':') else {
            return Err(Outcome::fail(
                EXIT_USAGE,
                format!("bad binding {part:?}; expected x: type"),
            ));
        };
        let t = parse_type(t).map_err(|e| Outcome::fail(EXIT_USAGE, e))?;
        if ctx.insert(Name::new(x.trim()), t).is_some() {
            return Err(Outcome::fail(
                EXIT_USAGE,
                format!("{} bound twice", x.trim()),
            ));
        }
    }
    Ok(ctx)
}

fn measures_text(m: &MeasureReport) -> String {
    let mut out = format!(
        "proof size   {}\nsubject size {}\nrank         {}\ndegree       {}\n",
        m.proof_size, m.subject_size, m.rank, m.degree
    );
    for (r, w) in &m.weights {
        let _ = writeln!(out, "W(Π, {r})      {w}");
    }
    out
}

fn bound_text(r: &BoundReport) -> String {
    let mark = |b: bool| if b { "pass" } else { "FAIL" };
    let v = &r.verdicts;
    format!(
        "term                 {}\n|M|                  {}\ndegree               {}\nrank                 {}\n\
         |M|^(D+1)            {}\nlongest reduction    {}\nmax normal form size {}\nmax reduct size      {}\n\
         W(Π, R(Π))           {}\nn < |M|^(D+1)        {}\nnormal forms < bound {}\nreducts < bound      {}\n\
         n < W(Π, R(Π))       {}\n",
        r.term,
        r.subject_size,
        r.degree,
        r.rank,
        r.theorem_bound,
        r.longest_reduction,
        r.max_normal_form_size,
        r.max_reduct_size,
        r.weight_ceiling,
        mark(v.longest_below_bound),
        mark(v.normal_forms_below_bound),
        mark(v.reducts_below_bound),
        mark(v.longest_below_weight),
    )
}

fn execute(cmd: Command) -> Outcome {
    match try_execute(cmd) {
        Ok(o) | Err(o) => o,
    }
}

fn try_execute(cmd: Command) -> Result<Outcome, Outcome> {
    match cmd {
        Command::Parse { input, out } => {
            let m = parse_term_input(&read_input(&input)?)?;
            let s = m.to_string();
            Ok(Outcome::ok(emit(
                out.format,
                &json!({"term": s, "size": m.size()}),
                || format!("{s}\n"),
            )))
        }
        Command::Check { input, out } => {
            let text = read_input(&input)?;
            let d = decode_derivation(&text);
            let report = match d {
                Ok(d) => check_derivation(&d),
                Err(DecodeError::Check(r)) => r,
                Err(e) => return Err(Outcome::fail(EXIT_USAGE, e)),
            };
            let ok = report.is_ok();
            let body = emit(
                out.format,
                &json!({"ok": ok, "violations": report.violations}),
                || format!("{report}\n"),
            );
            Ok(Outcome {
                code: if ok { EXIT_OK } else { EXIT_VERDICT },
                stdout: body,
                stderr: String::new(),
            })
        }
        Command::Infer {
            input,
            out,
            bounds,
            context,
        } => {
            let m = parse_term_input(&read_input(&input)?)?;
            let b = bounds.bounds();
            let r: Inferred = match context {
                Some(c) => infer_with_context(&m, &parse_context(&c)?, &b),
                None => infer(&m, &b),
            }
            .map_err(infer_failure)?;
            let measures = MeasureReport::standard(&r.derivation);
            let value = json!({
                "derivation": to_json(&r.derivation),
                "measures": measures,
                "stats": r.stats,
            });
            Ok(Outcome::ok(emit(out.format, &value, || {
                let mut s = pretty_print(&r.derivation);
                s.push('\n');
                s.push_str(&measures_text(&measures));
                let _ = writeln!(
                    s,
                    "search: {} nodes, {} memo hits, size minimal: {}",
                    r.stats.nodes_expanded, r.stats.memo_hits, r.stats.size_minimal
                );
                s
            })))
        }
        Command::Measure { input, out, rs } => {
            let d = derivation_input(&read_input(&input)?)?;
            let m = if rs.is_empty() {
                MeasureReport::standard(&d)
            } else {
                MeasureReport::new(&d, rs)
            };
            Ok(Outcome::ok(emit(out.format, &m, || measures_text(&m))))
        }
        Command::Reduce {
            input,
            out,
            strategy,
            fuel,
            with_derivation,
            bounds,
        } => {
            let d = term_or_derivation(&read_input(&input)?, &bounds.bounds())?;
            let trace =
                normalize_with_derivation(&d, strategy.into(), fuel).map_err(|e| match e {
                    TransformError::FuelExhausted(_) => Outcome::fail(EXIT_EXHAUSTED, e),
                    e => Outcome::fail(EXIT_VERDICT, e),
                })?;
            let value = trace.to_json(with_derivation);
            Ok(Outcome::ok(emit(out.format, &value, || {
                let mut s = String::new();
                for (i, e) in trace.entries.iter().enumerate() {
                    let redex = e.redex.as_ref().map_or("-".to_string(), |p| p.to_string());
                    let w = e
                        .measures
                        .weights
                        .get(&trace.rank)
                        .copied()
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{i:>3}  {:<12} W(Π, {}) = {w:<5} {}",
                        redex, trace.rank, e.term
                    );
                }
                if with_derivation {
                    s.push('\n');
                    s.push_str(&pretty_print(trace.final_derivation()));
                }
                s
            })))
        }
        Command::Verify {
            input,
            out,
            fuel,
            bounds,
        } => {
            let d = term_or_derivation(&read_input(&input)?, &bounds.bounds())?;
            let r = verify_bounds(&d.subject().clone(), &d, fuel).map_err(harness_failure)?;
            let code = if r.passed() { EXIT_OK } else { EXIT_VERDICT };
            Ok(Outcome {
                code,
                stdout: emit(out.format, &r, || bound_text(&r)),
                stderr: String::new(),
            })
        }
        Command::Remark {
            n_max,
            out,
            fuel,
            bounds,
        } => {
            let rows =
                remark_family_report(n_max, &bounds.bounds(), fuel).map_err(harness_failure)?;
            let code = if rows.iter().all(|r| r.passed()) {
                EXIT_OK
            } else {
                EXIT_VERDICT
            };
            Ok(Outcome {
                code,
                stdout: emit(out.format, &rows, || render_remark_table(&rows)),
                stderr: String::new(),
            })
        }
        Command::Fuzz {
            seed,
            count,
            max_size,
            out,
            fuel,
            graph_fuel,
            subst_pairs,
            bounds,
        } => {
            let cfg = CorpusConfig {
                seed,
                count,
                max_size,
                bounds: bounds.bounds(),
                fuel,
                graph_fuel,
                subst_pairs,
            };
            let report = run_corpus(&cfg);
            let code = if report.passed() {
                EXIT_OK
            } else {
                EXIT_VERDICT
            };
            Ok(Outcome {
                code,
                stdout: emit(out.format, &report, || report.render()),
                stderr: String::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sti(args: &[&str]) -> Outcome {
        run(std::iter::once("sti").chain(args.iter().copied()))
    }

    #[test]
    fn parse_echoes_canonical_term() {
        let o = sti(&["parse", "-e", "λx.λy. x y"]);
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout, "\\x y. x y\n");
    }

    #[test]
    fn parse_error_is_usage() {
        assert_eq!(sti(&["parse", "-e", "(x"]).code, EXIT_USAGE);
        assert_eq!(sti(&["parse"]).code, EXIT_USAGE);
        assert_eq!(sti(&["parse", "-e", "x", "-f", "y"]).code, EXIT_USAGE);
    }

    #[test]
    fn infer_example_json() {
        let o = sti(&["infer", "-e", "(\\x. x x) ((\\y. y) z)", "--format", "json"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["derivation"]["type"], json!({"var": "a"}));
        assert_eq!(v["measures"]["degree"], 1);
        assert!(v["stats"]["nodes_expanded"].as_u64().unwrap() > 0);
    }

    #[test]
    fn infer_omega_is_exhausted() {
        let o = sti(&[
            "infer",
            "-e",
            "(\\x. x x) (\\x. x x)",
            "--time-fuel",
            "20000",
        ]);
        assert_eq!(o.code, EXIT_EXHAUSTED);
        assert!(o.stdout.is_empty());
    }

    #[test]
    fn verify_identity() {
        let o = sti(&["verify", "-e", "\\x. x", "--format", "json"]);
        assert_eq!(o.code, 0);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(
            (v["theorem_bound"].as_u64(), v["longest_reduction"].as_u64()),
            (Some(2), Some(0))
        );
    }

    #[test]
    fn check_round_trip_through_infer() {
        let o = sti(&["infer", "-e", "\\x. x x", "--format", "json"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        let d = v["derivation"].to_string();
        let c = sti(&["check", "-e", &d]);
        assert_eq!((c.code, c.stdout.as_str()), (0, "ok\n"));
        let bad = r#"{"rule": "ax", "ctx": [{"var": "x", "type": {"var": "a"}}], "term": "x",
                      "type": {"var": "b"}, "premises": [], "data": {}}"#;
        let c = sti(&["check", "-e", bad]);
        assert_eq!(c.code, EXIT_VERDICT);
        assert!(c.stdout.contains("type should be a"), "{}", c.stdout);
        assert_eq!(sti(&["check", "-e", "{\"rule\": 1}"]).code, EXIT_USAGE);
    }

    #[test]
    fn infer_with_fixed_context() {
        let o = sti(&[
            "infer",
            "-e",
            "(\\x. x x) ((\\y. y) z)",
            "--context",
            "z: ((a -> a) ∧ a)",
        ]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o
            .stdout
            .starts_with("z: ((a -> a) ∧ a) ⊢ (\\x. x x) ((\\y. y) z): a"));
    }

    #[test]
    fn reduce_trace_json() {
        let o = sti(&[
            "reduce",
            "-e",
            "(\\x. x x) ((\\y. y) z)",
            "--strategy",
            "ri",
            "--format",
            "json",
        ]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        let ws: Vec<u64> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["measures"]["weights"]["2"].as_u64().unwrap())
            .collect();
        assert_eq!(ws, [13, 7, 3]);
        assert!(v[0].get("derivation").is_none());
    }

    #[test]
    fn measure_text() {
        let o = sti(&["infer", "-e", "\\x. x", "--format", "json"]);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        let m = sti(&[
            "measure",
            "-e",
            &v["derivation"].to_string(),
            "--r",
            "1,3",
            "--format",
            "json",
        ]);
        let mv: Value = serde_json::from_str(&m.stdout).unwrap();
        assert_eq!(mv["weights"], json!({"1": 2, "3": 2}));
    }
}
