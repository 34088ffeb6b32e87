//! Command-line interface and REPL.
//!
//! Exit codes: 0 on success, 1 when an analysis fails (stuck evaluation,
//! ill-typed term, non-unitary map, failing corpus goal), 2 on usage or
//! parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::basis::Basis;
use crate::checker::{Checker, TypingContext};
use crate::corpus::{self, CorpusReport};
use crate::eval::{eval, Outcome, DEFAULT_FUEL};
use crate::frontend::{parse_basis, parse_program, parse_term_in, parse_type_in, Env, GoalKind, ParseError};
use crate::scalar::{set_eps, DEFAULT_EPS};
use crate::term::{name, TermDist};
use crate::types::{subtype, type_equiv, Tri, Type};
use crate::unitary::check_unitary;

#[derive(Debug, Parser)]
#[command(name = "lambdab", version, about = "Basis-sensitive quantum lambda calculus")]
pub struct Cli {
    /// Evaluation fuel.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    pub max_steps: usize,
    /// Amplitude comparison tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Extra `.lb` definition files, loaded after the shipped corpus.
    #[arg(long = "def", value_name = "FILE", global = true)]
    pub defs: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and print the canonical form of a term (or a type).
    Parse {
        input: String,
        #[arg(long = "type")]
        as_type: bool,
    },
    /// Evaluate a term to normal form.
    Eval {
        /// Inline term or a file containing one.
        input: String,
        #[arg(long)]
        trace: bool,
    },
    /// Check `TERM : TYPE` and print the derivation.
    Check {
        /// `TERM : TYPE`, `TERM TYPE` or a single `TERM : TYPE` string.
        #[arg(required = true, num_args = 1..=3)]
        args: Vec<String>,
        /// Context binding `x:BASIS:TYPE`.
        #[arg(long = "ctx", value_name = "x:BASIS:TYPE")]
        ctx: Vec<String>,
    },
    /// Decide orthogonality of two terms at a type.
    Ortho {
        left: String,
        right: String,
        #[arg(name = "TYPE")]
        ty: String,
        /// Shared context binding `x:BASIS:TYPE`.
        #[arg(long = "ctx", value_name = "x:BASIS:TYPE")]
        ctx: Vec<String>,
        /// Binding private to the left term.
        #[arg(long = "left-ctx", value_name = "x:BASIS:TYPE")]
        left_ctx: Vec<String>,
        /// Binding private to the right term.
        #[arg(long = "right-ctx", value_name = "x:BASIS:TYPE")]
        right_ctx: Vec<String>,
    },
    /// Extract the matrix of an abstraction and test unitarity.
    Unitary { input: String },
    /// Decide `A <= B` (and `B <= A` with `--equiv`).
    Subtype {
        lhs: String,
        rhs: String,
        #[arg(long)]
        equiv: bool,
    },
    /// Run `.lb` goal files (the shipped corpus when none are given).
    Corpus { files: Vec<PathBuf> },
    /// Interactive loop.
    Repl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    Usage = 2,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

/// Output sinks, so the CLI can run in-process in tests.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Success };
            let sink = if e.use_stderr() { &mut *io.err } else { &mut *io.out };
            let _ = write!(sink, "{}", e.render());
            return code as i32;
        }
    };
    match execute(&cli, io) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            Exit::Usage as i32
        }
    }
}

fn execute(cli: &Cli, io: &mut Io) -> Result<Exit, CliError> {
    if !(cli.eps.is_finite() && cli.eps > 0.0) {
        return Err(CliError::Usage(format!("--eps must be positive, got {}", cli.eps)));
    }
    set_eps(cli.eps);
    let env = load_env(&cli.defs)?;
    let session = Session {
        env,
        fuel: cli.max_steps,
        json: cli.json,
    };
    match &cli.command {
        Command::Parse { input, as_type } => session.parse(input, *as_type, io),
        Command::Eval { input, trace } => session.eval(&read_input(input)?, *trace, io),
        Command::Check { args, ctx } => {
            let ctx = session.context(ctx)?;
            let (term, ty) = session.check_args(args)?;
            session.check(&ctx, &term, &ty, io)
        }
        Command::Ortho {
            left,
            right,
            ty,
            ctx,
            left_ctx,
            right_ctx,
        } => {
            let shared = session.context(ctx)?;
            let (lc, rc) = (session.context(left_ctx)?, session.context(right_ctx)?);
            let (t, s) = (session.term(left)?, session.term(right)?);
            let ty = session.ty(ty)?;
            session.ortho(&shared, &lc, &t, &rc, &s, &ty, io)
        }
        Command::Unitary { input } => session.unitary(&session.term(&read_input(input)?)?, io),
        Command::Subtype { lhs, rhs, equiv } => session.subtype(&session.ty(lhs)?, &session.ty(rhs)?, *equiv, io),
        Command::Corpus { files } => session.corpus(files, io),
        Command::Repl => {
            let stdin = std::io::stdin();
            let mut input = stdin.lock();
            repl(session, &mut input, io)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// An argument naming an existing file stands for its contents.
fn read_input(input: &str) -> Result<String, CliError> {
    let path = Path::new(input);
    if path.is_file() {
        read_file(path)
    } else {
        Ok(input.to_string())
    }
}

/// The shipped corpus definitions plus each `--def` file in order.
fn load_env(defs: &[PathBuf]) -> Result<Env, CliError> {
    let mut env = corpus::shipped_program().env;
    for path in defs {
        let src = read_file(path)?;
        env = parse_program(&src, &env)
            .map_err(|e| CliError::Usage(format!("{}:{e}", path.display())))?
            .env;
    }
    Ok(env)
}

struct Session {
    env: Env,
    fuel: usize,
    json: bool,
}

fn emit(io: &mut Io, v: &Value) {
    let _ = writeln!(io.out, "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn verdict(ok: bool) -> Exit {
    if ok {
        Exit::Success
    } else {
        Exit::Failure
    }
}

impl Session {
    fn term(&self, src: &str) -> Result<TermDist, CliError> {
        Ok(parse_term_in(src, &self.env)?)
    }

    fn ty(&self, src: &str) -> Result<Type, CliError> {
        Ok(parse_type_in(src, &self.env)?)
    }

    fn checker(&self) -> Checker {
        Checker::new(&self.env.bases).with_fuel(self.fuel)
    }

    /// Parses `x:BASIS:TYPE` bindings.
    fn context(&self, bindings: &[String]) -> Result<TypingContext, CliError> {
        let mut ctx = TypingContext::new();
        for b in bindings {
            let mut parts = b.splitn(3, ':');
            let (Some(x), Some(basis), Some(ty)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(CliError::Usage(format!("context binding `{b}` is not x:BASIS:TYPE")));
            };
            let x = x.trim();
            if x.is_empty() || ctx.contains(x) {
                return Err(CliError::Usage(format!("bad or repeated variable in `{b}`")));
            }
            let basis: Basis = parse_basis(basis.trim(), &self.env)?;
            ctx.insert(name(x), basis, self.ty(ty.trim())?);
        }
        Ok(ctx)
    }

    fn check_args(&self, args: &[String]) -> Result<(TermDist, Type), CliError> {
        match args {
            [term, colon, ty] if colon == ":" => Ok((self.term(term)?, self.ty(ty)?)),
            [term, ty] => Ok((self.term(term)?, self.ty(ty)?)),
            [judgement] => self.judgement(judgement),
            _ => Err(CliError::Usage("expected TERM : TYPE".to_string())),
        }
    }

    /// Splits `TERM : TYPE` with the goal parser.
    fn judgement(&self, src: &str) -> Result<(TermDist, Type), CliError> {
        let program = parse_program(&format!("goal {src}"), &self.env)?;
        match program.goals.into_iter().next().map(|g| g.kind) {
            Some(GoalKind::Check { term, ty }) => Ok((term, ty)),
            _ => Err(CliError::Usage(format!("expected TERM : TYPE, got `{src}`"))),
        }
    }

    fn parse(&self, input: &str, as_type: bool, io: &mut Io) -> Result<Exit, CliError> {
        let printed = if as_type {
            let ty = self.ty(input)?;
            format!("{}", ty.sharp_normalize())
        } else {
            self.term(&read_input(input)?)?.to_string()
        };
        if self.json {
            emit(io, &json!({ if as_type { "type" } else { "term" }: printed }));
        } else {
            let _ = writeln!(io.out, "{printed}");
        }
        Ok(Exit::Success)
    }

    fn eval(&self, src: &str, show_trace: bool, io: &mut Io) -> Result<Exit, CliError> {
        let t = self.term(src)?;
        let trace = eval(&t, self.fuel);
        let steps: Vec<Value> = trace
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| json!({"step": i + 1, "rule": s.rule, "context": s.context, "term": s.term.to_string()}))
            .collect();
        let (status, result) = match &trace.outcome {
            Outcome::NormalForm(v) => {
                let (normal, phase) = v.phase_normalize().unwrap_or((v.clone(), crate::scalar::Scalar::ONE));
                ("normal_form", Ok((v, normal, phase)))
            }
            Outcome::Stuck { reason, subterm } => ("stuck", Err(format!("stuck: {reason} at {subterm}"))),
            Outcome::FuelExhausted(n) => ("fuel_exhausted", Err(format!("fuel exhausted after {n} steps"))),
        };
        if self.json {
            let mut v = json!({"status": status, "steps": trace.steps.len()});
            match &result {
                Ok((raw, normal, phase)) => {
                    v["normal_form"] = json!(normal.to_string());
                    v["global_phase"] = json!([phase.re(), phase.im()]);
                    v["value"] = json!(raw.to_string());
                }
                Err(msg) => v["diagnostic"] = json!(msg),
            }
            if show_trace {
                v["trace"] = Value::Array(steps);
            }
            emit(io, &v);
        } else {
            if show_trace {
                let _ = writeln!(io.out, "   0  {}", trace.start);
                for s in &trace.steps {
                    let ctx: Vec<String> = s.context.iter().map(|r| r.to_string()).collect();
                    let tag = if ctx.is_empty() {
                        s.rule.to_string()
                    } else {
                        format!("{} in {}", s.rule, ctx.join("/"))
                    };
                    let _ = writeln!(io.out, "  -> [{tag}]  {}", s.term);
                }
            }
            match &result {
                Ok((_, normal, phase)) => {
                    let _ = writeln!(io.out, "{normal}");
                    let _ = writeln!(
                        io.out,
                        "steps: {}  global phase: {}",
                        trace.steps.len(),
                        crate::frontend::format_scalar(*phase)
                    );
                }
                Err(msg) => {
                    let _ = writeln!(io.err, "{msg}");
                }
            }
        }
        Ok(verdict(result.is_ok()))
    }

    fn check(&self, ctx: &TypingContext, t: &TermDist, ty: &Type, io: &mut Io) -> Result<Exit, CliError> {
        let result = self.checker().check(ctx, t, ty);
        if self.json {
            emit(
                io,
                &match &result {
                    Ok(d) => json!({"accepted": true, "derivation": d.to_json()}),
                    Err(e) => json!({"accepted": false, "error": e.to_string()}),
                },
            );
        } else {
            match &result {
                Ok(d) => {
                    let _ = write!(io.out, "{}", d.render());
                    let _ = writeln!(io.out, "accepted");
                }
                Err(e) => {
                    let _ = writeln!(io.err, "rejected: {e}");
                }
            }
        }
        Ok(verdict(result.is_ok()))
    }

    #[allow(clippy::too_many_arguments)]
    fn ortho(
        &self,
        shared: &TypingContext,
        left_ctx: &TypingContext,
        t: &TermDist,
        right_ctx: &TypingContext,
        s: &TermDist,
        ty: &Type,
        io: &mut Io,
    ) -> Result<Exit, CliError> {
        let result = self
            .checker()
            .check_orthogonality(shared, left_ctx, t, right_ctx, s, ty);
        match &result {
            Ok(r) if self.json => emit(
                io,
                &json!({
                    "orthogonal": r.holds,
                    "pairs_checked": r.pairs_checked,
                    "witness": r.witness.as_ref().map(|w| w.to_string()),
                }),
            ),
            Ok(r) => {
                let _ = match &r.witness {
                    None => writeln!(io.out, "orthogonal ({} substitution pairs)", r.pairs_checked),
                    Some(w) => writeln!(io.out, "not orthogonal: {w}"),
                };
            }
            Err(e) if self.json => emit(io, &json!({"orthogonal": false, "error": e.to_string()})),
            Err(e) => {
                let _ = writeln!(io.err, "error: {e}");
            }
        }
        Ok(verdict(matches!(result, Ok(ref r) if r.holds)))
    }

    fn unitary(&self, f: &TermDist, io: &mut Io) -> Result<Exit, CliError> {
        let report = check_unitary(f);
        if self.json {
            emit(io, &report.to_json());
        } else {
            if let Some(m) = &report.matrix {
                let _ = writeln!(io.out, "{m}");
            }
            let _ = writeln!(io.out, "{}", report.verdict);
        }
        Ok(verdict(report.verdict.is_unitary()))
    }

    fn subtype(&self, a: &Type, b: &Type, equiv: bool, io: &mut Io) -> Result<Exit, CliError> {
        let answer = if equiv { type_equiv(a, b) } else { subtype(a, b) };
        let rel = if equiv { "≡" } else { "≤" };
        if self.json {
            emit(
                io,
                &json!({"lhs": a.to_string(), "rhs": b.to_string(), "relation": rel, "answer": format!("{answer:?}")}),
            );
        } else {
            let _ = writeln!(io.out, "{a} {rel} {b}: {answer:?}");
        }
        Ok(verdict(answer == Tri::Yes))
    }

    fn corpus(&self, files: &[PathBuf], io: &mut Io) -> Result<Exit, CliError> {
        let report = if files.is_empty() {
            corpus::run_shipped()
        } else {
            let mut report = CorpusReport::default();
            for path in files {
                let src = read_file(path)?;
                let part = corpus::run_source(&src, &self.env)
                    .map_err(|e| CliError::Usage(format!("{}:{e}", path.display())))?;
                report.outcomes.extend(part.outcomes);
            }
            report
        };
        if self.json {
            emit(io, &serde_json::to_value(&report).expect("json"));
        } else {
            let _ = write!(io.out, "{}", report.render());
        }
        Ok(verdict(report.passed()))
    }
}

const REPL_HELP: &str = "\
  term                  evaluate
  :t term [: type]      type check (asks for the type when omitted)
  :u term               unitarity
  def / basis / goal    declarations, as in .lb files
  :q                    quit";

/// Reads commands from `input` until end of input or `:q`. Returns the
/// exit code of the last command.
fn repl(mut session: Session, input: &mut dyn BufRead, io: &mut Io) -> Result<Exit, CliError> {
    let mut last = Exit::Success;
    let mut line = String::new();
    loop {
        let _ = write!(io.out, "λB> ");
        let _ = io.out.flush();
        line.clear();
        if input.read_line(&mut line).map_err(|e| CliError::Usage(e.to_string()))? == 0 {
            break;
        }
        let cmd = line.trim();
        let outcome = if cmd.is_empty() {
            continue;
        } else if cmd == ":q" || cmd == ":quit" {
            break;
        } else if cmd == ":h" || cmd == ":help" {
            let _ = writeln!(io.out, "{REPL_HELP}");
            Ok(Exit::Success)
        } else if let Some(rest) = cmd.strip_prefix(":t ") {
            repl_check(&session, rest.trim(), input, io)
        } else if let Some(rest) = cmd.strip_prefix(":u ") {
            session.term(rest).and_then(|f| session.unitary(&f, io))
        } else if ["def ", "basis ", "goal "].iter().any(|k| cmd.starts_with(k)) {
            match parse_program(cmd, &session.env) {
                Ok(program) => {
                    let report = corpus::run_program(&session.checker(), &program);
                    if !report.outcomes.is_empty() {
                        let _ = write!(io.out, "{}", report.render());
                    }
                    session.env = program.env;
                    Ok(verdict(report.passed()))
                }
                Err(e) => Err(e.into()),
            }
        } else {
            session.eval(cmd, false, io)
        };
        last = match outcome {
            Ok(code) => code,
            Err(e) => {
                let _ = writeln!(io.err, "error: {e}");
                Exit::Usage
            }
        };
    }
    Ok(last)
}

fn repl_check(session: &Session, src: &str, input: &mut dyn BufRead, io: &mut Io) -> Result<Exit, CliError> {
    let (term, ty) = match session.judgement(src) {
        Ok(j) => j,
        Err(_) => {
            let term = session.term(src)?;
            let _ = write!(io.out, "type> ");
            let _ = io.out.flush();
            let mut line = String::new();
            input.read_line(&mut line).map_err(|e| CliError::Usage(e.to_string()))?;
            (term, session.ty(line.trim())?)
        }
    };
    session.check(&TypingContext::new(), &term, &ty, io)
}

/// Runs the REPL over an arbitrary input, for scripting and tests.
pub fn run_repl(input: &mut dyn BufRead, io: &mut Io) -> i32 {
    let session = Session {
        env: corpus::shipped_program().env,
        fuel: DEFAULT_FUEL,
        json: false,
    };
    match repl(session, input, io) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            Exit::Usage as i32
        }
    }
}
