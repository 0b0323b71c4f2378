//! The `rccs` command line.
//!
//! Exit codes: 0 equal / success, 1 not equal / failure, 2 a state bound was
//! exceeded, 3 unparsable or ill-formed input, 4 unknown class or label.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rccs_core::equivalence::{
    check_equal, divergence_witness, ell_witness, has_divergent_tree, lts_equal, q_witness, quotient, refine,
    Evidence, SignatureItem,
};
use rccs_core::oracle::{coarsest_by_enumeration, OracleError, DEFAULT_ORACLE_BOUND};
use rccs_core::semantics::{build_joint_space, Bundle, Label, SemanticsError, StateSpace, DEFAULT_BOUND};
use rccs_core::syntax::{parse, ParseError, Term};
use rccs_core::witness::{classify, unroll, Classification, WitnessPolicy};
use rccs_core::Rational;
use serde_json::{json, Value};

use crate::congruence::{self, PropConfig};
use crate::export;

#[derive(Parser, Debug)]
#[command(name = "rccs", version, about = "Randomized CCS workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Inline term; may be repeated.
    #[arg(short = 'e', long = "expr", value_name = "TERM")]
    pub exprs: Vec<String>,
    /// Files holding one term each; lines starting with `#` are ignored.
    #[arg(value_name = "FILE")]
    pub files: Vec<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Maximum number of states to explore.
    #[arg(long, default_value_t = DEFAULT_BOUND as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether two terms are equal.
    Check {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Export the state space of one or more terms.
    Lts {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Export the quotient of the state space under equality.
    Minimize {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Render an epsilon-tree witnessing a move of the root.
    Witness {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
        /// Action of an ell-transition: `a`, `'a` or `tau`.
        #[arg(long, conflicts_with_all = ["q", "divergence"])]
        label: Option<String>,
        /// Probability of a q-transition, as `n/d`.
        #[arg(long, conflicts_with = "divergence")]
        q: Option<String>,
        /// A leafless tree instead of a move.
        #[arg(long)]
        divergence: bool,
        /// Target block, by id in the final partition.
        #[arg(long, conflicts_with = "into")]
        class: Option<usize>,
        /// Target block, as the block of this term.
        #[arg(long)]
        into: Option<String>,
        /// Truncation depth of the rendered tree.
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Does the root have a divergent epsilon-tree?
    Diverge {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded congruence, oracle and conservativity checks.
    Proptest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Nesting depth of generated terms.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
        bound: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND as u64, value_parser = clap::value_parser!(u64).range(1..))]
        oracle_bound: u64,
        /// Random-free pairs only.
        #[arg(long)]
        ccs: bool,
    },
    /// Brute-force coarsest partition as a golden record.
    Oracle {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND as u64, value_parser = clap::value_parser!(u64).range(1..))]
        oracle_bound: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{source_name}: parse error at byte {}: {}", .error.position, .error.kind)]
    Parse { source_name: String, error: ParseError },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Oracle(OracleError),
    #[error("{0}")]
    Unknown(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantics(SemanticsError::BoundExceeded(_)) => 2,
            CliError::Oracle(OracleError::OracleBoundExceeded { .. }) => 2,
            CliError::Oracle(OracleError::Semantics(SemanticsError::BoundExceeded(_))) => 2,
            CliError::Oracle(OracleError::JoinNotBisimulation) => 1,
            CliError::Unknown(_) => 4,
            _ => 3,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Oracle(e)
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli.command) {
        Ok((code, stdout)) => Output { code, stdout, stderr: String::new() },
        Err(e) => Output { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn read_terms(inputs: &Inputs) -> Result<Vec<Term>, CliError> {
    let mut out = Vec::new();
    for (i, e) in inputs.exprs.iter().enumerate() {
        out.push(parse(e).map_err(|error| CliError::Parse { source_name: format!("-e #{}", i + 1), error })?);
    }
    for f in &inputs.files {
        let text = std::fs::read_to_string(f).map_err(|e| CliError::Input(format!("{}: {e}", f.display())))?;
        let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
        out.push(parse(&body).map_err(|error| CliError::Parse { source_name: f.display().to_string(), error })?);
    }
    Ok(out)
}

fn terms_exactly(inputs: &Inputs, n: usize) -> Result<Vec<Term>, CliError> {
    let ts = read_terms(inputs)?;
    if ts.len() != n {
        return Err(CliError::Usage(format!("expected {n} term(s), got {}", ts.len())));
    }
    Ok(ts)
}

fn terms_at_least_one(inputs: &Inputs) -> Result<Vec<Term>, CliError> {
    let ts = read_terms(inputs)?;
    if ts.is_empty() {
        return Err(CliError::Usage("expected at least one term".into()));
    }
    Ok(ts)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn describe_item(e: &Evidence) -> String {
    let block = |c: usize| format!("{:?}", e.partition.block(c));
    match &e.item {
        SignatureItem::Visible(a, c) => format!("{a}-transition into block {}", block(*c)),
        SignatureItem::Tau(c) => format!("tau-transition into block {}", block(*c)),
        SignatureItem::Q(q, c) => format!("{q}-transition into block {}", block(*c)),
        SignatureItem::Divergent => "divergent epsilon-tree".into(),
    }
}

fn execute(cmd: Command) -> Result<(i32, String), CliError> {
    match cmd {
        Command::Check { inputs, common } => {
            let ts = terms_exactly(&inputs, 2)?;
            let v = check_equal(&ts[0], &ts[1], common.bound as usize)?;
            let code = if v.equal { 0 } else { 1 };
            let out = match common.format.unwrap_or(Format::Text) {
                Format::Json => json_text(&json!({
                    "format": export::FORMAT,
                    "equal": v.equal,
                    "states": v.space.len(),
                    "blocks": v.partition.num_blocks(),
                    "iterations": v.iterations,
                    "partition": v.partition.blocks(),
                    "evidence": v.evidence.as_ref().map(export::evidence_json),
                })),
                _ => {
                    let mut s = String::new();
                    writeln!(s, "{}", if v.equal { "EQUAL" } else { "NOT EQUAL" }).expect("write");
                    writeln!(s, "states: {}", v.space.len()).expect("write");
                    writeln!(s, "blocks: {}", v.partition.num_blocks()).expect("write");
                    writeln!(s, "iterations: {}", v.iterations).expect("write");
                    if let Some(e) = &v.evidence {
                        let who = if e.holder == 0 { "left" } else { "right" };
                        writeln!(s, "evidence: {} ({who} only): {}", export::item_kind(&e.item), describe_item(e))
                            .expect("write");
                    }
                    s
                }
            };
            Ok((code, out))
        }
        Command::Lts { inputs, common } => {
            let ts = terms_at_least_one(&inputs)?;
            let space = build_joint_space(&ts, common.bound as usize)?;
            Ok((0, render_space(&space, common.format.unwrap_or(Format::Json))))
        }
        Command::Minimize { inputs, common } => {
            let ts = terms_at_least_one(&inputs)?;
            let space = build_joint_space(&ts, common.bound as usize)?;
            let p = refine(&space.lts);
            let q = quotient(&space.lts, &p);
            let roots: Vec<usize> = space.roots.iter().map(|&r| p.block_of(r)).collect();
            let verified = space.roots.iter().zip(&roots).all(|(&r, &b)| lts_equal(&space.lts, r, &q.lts, b));
            let labels: Vec<String> = q.representatives.iter().map(|&s| space.states[s].to_string()).collect();
            let out = match common.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut v = export::lts_json(&q.lts, &labels, &roots);
                    v["blocks"] = json!(p.blocks());
                    v["verified"] = json!(verified);
                    json_text(&v)
                }
                Format::Dot => export::lts_dot(&q.lts, &labels, &roots),
                Format::Text => {
                    let mut s = format!("quotient: {} states (from {})\n", q.lts.len(), space.len());
                    s.push_str(&export::lts_text(&q.lts, &labels, &roots));
                    writeln!(s, "verified: {verified}").expect("write");
                    s
                }
            };
            Ok((if verified { 0 } else { 1 }, out))
        }
        Command::Witness { inputs, common, label, q, divergence, class, into, depth } => {
            let ts = terms_exactly(&inputs, 1)?;
            let space = build_joint_space(&ts, common.bound as usize)?;
            let p = refine(&space.lts);
            let root = space.root();
            let target = match (class, into) {
                (Some(c), _) if c < p.num_blocks() => Some(c),
                (Some(c), _) => return Err(CliError::Unknown(format!("no block {c}; there are {}", p.num_blocks()))),
                (None, Some(t)) => {
                    let t = parse(&t).map_err(|error| CliError::Parse { source_name: "--into".into(), error })?;
                    let s = space.find(&t).ok_or_else(|| CliError::Unknown(format!("{t} is not a state")))?;
                    Some(p.block_of(s))
                }
                (None, None) => None,
            };
            let need_target = || target.ok_or_else(|| CliError::Usage("--class or --into is required".into()));
            let policy: Option<WitnessPolicy> = if divergence {
                divergence_witness(&space.lts, &p, root)
            } else if let Some(l) = label {
                let l: Label = l.parse().map_err(|_| CliError::Unknown(format!("unknown label {l}")))?;
                let occurs = space.lts.states().flat_map(|s| space.lts.bundles(s)).any(|b| match (b, &l) {
                    (Bundle::Visible(a, _), Label::Visible(x)) => a == x,
                    (_, Label::Tau) => true,
                    _ => false,
                });
                if !occurs {
                    return Err(CliError::Unknown(format!("label {l} does not occur in the state space")));
                }
                ell_witness(&space.lts, &p, root, &l, need_target()?)
                    .map_err(|e| CliError::Unknown(e.to_string()))?
            } else if let Some(q) = q {
                let q: Rational = q.parse().map_err(|_| CliError::Unknown(format!("bad probability {q}")))?;
                q_witness(&space.lts, &p, root, q, need_target()?).map_err(|e| CliError::Unknown(e.to_string()))?
            } else {
                return Err(CliError::Usage("one of --label, --q, --divergence is required".into()));
            };
            let Some(policy) = policy else {
                return Ok((1, "no witness\n".into()));
            };
            let out = match common.format.unwrap_or(Format::Dot) {
                Format::Dot => export::tree_dot(&unroll(&policy, depth, &space.lts)),
                Format::Json => json_text(&export::policy_json(&policy)),
                Format::Text => {
                    let mut s = String::new();
                    for (st, d) in &policy.decide {
                        writeln!(s, "{st}: {d:?}  [{}]", space.states[*st]).expect("write");
                    }
                    let c = match classify(&policy, &space.lts, 10) {
                        Classification::Regular { depth, mass } => format!("regular (mass {mass} by depth {depth})"),
                        Classification::Divergent => "divergent".into(),
                        Classification::Indeterminate { depth, mass } => format!("mass {mass} at depth {depth}"),
                    };
                    writeln!(s, "tree: {c}").expect("write");
                    s
                }
            };
            Ok((0, out))
        }
        Command::Diverge { inputs, common } => {
            let ts = terms_exactly(&inputs, 1)?;
            let space = build_joint_space(&ts, common.bound as usize)?;
            let p = refine(&space.lts);
            let d = has_divergent_tree(&space.lts, &p, space.root());
            let out = match common.format.unwrap_or(Format::Text) {
                Format::Json => json_text(&json!({"format": export::FORMAT, "divergent": d})),
                _ => if d { "divergent ε-tree\n" } else { "no divergent ε-tree\n" }.to_string(),
            };
            Ok((0, out))
        }
        Command::Proptest { seed, cases, depth, bound, oracle_bound, ccs } => {
            let cfg =
                PropConfig { seed, cases, bound: bound as usize, oracle_bound: oracle_bound as usize, depth };
            let summary = if ccs { congruence::run_ccs(&cfg) } else { congruence::run(&cfg) };
            let mut out = summary.to_string();
            out.push('\n');
            Ok((if summary.passed() { 0 } else { 1 }, out))
        }
        Command::Oracle { inputs, common, oracle_bound } => {
            let ts = terms_at_least_one(&inputs)?;
            let space = build_joint_space(&ts, common.bound as usize)?;
            let c = coarsest_by_enumeration(&space.lts, oracle_bound as usize)?;
            let mut v = export::golden_json(&space, &c);
            v["roots"] = json!(space.roots);
            v["refine_agrees"] = json!(refine(&space.lts) == c.partition);
            Ok((0, json_text(&v)))
        }
    }
}

fn render_space(space: &StateSpace, f: Format) -> String {
    match f {
        Format::Json => json_text(&export::space_json(space)),
        Format::Dot => export::space_dot(space),
        Format::Text => {
            let labels: Vec<String> = space.states.iter().map(ToString::to_string).collect();
            export::lts_text(&space.lts, &labels, &space.roots)
        }
    }
}
