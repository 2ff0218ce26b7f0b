//! Command line front end.
//!
//! Exit codes: 0 success, 1 domain-level negative answer (unsatisfiable,
//! verification failure, inconclusive certification) with machine-readable
//! JSON on standard output, 2 usage and input errors.

use bcslab::assign::OperatorAssignment;
use bcslab::bcs::{magic_square, Bcs, Domain};
use bcslab::game::{chsh_game, game_value, Strategy};
use bcslab::reduce::{
    coloring_to_bcs, harden_3sat, ks_to_bcs, occurrence_reduce, one_in_three_gadget, prism,
    reduce_3sat_to_1in3, reduce_3sat_to_3coloring, reduce_ksat_to_3sat, ColoringInstance,
    ReductionTrace,
};
use bcslab::rewrite::{certify_gadget, default_degree_cap, GadgetError, GadgetKind};
use bcslab::solve::{
    classical_game_value, solve_2sat, solve_backtracking, solve_hornsat, solve_parity_gf2,
};
use bcslab::verify_assignment;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bcslab",
    version,
    about = "Binary constraint system games: modeling, solving, operator assignments, \
             commutativity certificates, reductions, and game values",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a system and echo its canonical text form.
    Parse {
        /// System file, `-` for standard input.
        #[arg(default_value = "-")]
        file: String,
    },
    /// Emit built-in systems, games, and encodings.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Decide classical satisfiability.
    Solve {
        /// System file, `-` for standard input.
        #[arg(default_value = "-")]
        file: String,
        #[command(flatten)]
        mode: SolveMode,
    },
    /// Apply a satisfiability-preserving reduction.
    Reduce {
        /// System file, `-` for standard input.
        #[arg(default_value = "-")]
        file: String,
        #[command(flatten)]
        mode: ReduceMode,
    },
    /// Check an operator assignment against a system.
    Verify {
        /// System file; may be omitted when the assignment is a bundle
        /// carrying its own system.
        system: Option<String>,
        /// Assignment JSON (bare or a `{"bcs", "assignment"}` bundle),
        /// `-` for standard input.
        #[arg(long)]
        assignment: String,
        /// Largest acceptable residual.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Derive a replayable commutativity certificate for a gadget pair.
    Certify {
        #[arg(long)]
        gadget: Gadget,
        /// The two variable (or indicator group) names, comma separated.
        #[arg(long)]
        pair: String,
        /// Certify the anticommutator instead of the commutator.
        #[arg(long)]
        anticommute: bool,
        /// Degree cap for the rewriting closure; defaults to
        /// BCSLAB_DEGREE_CAP or 8.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Evaluate a strategy on a game.
    Simulate {
        /// Game JSON, `-` for standard input.
        #[arg(long)]
        game: String,
        /// Strategy JSON, `-` for standard input.
        #[arg(long)]
        strategy: String,
    },
    /// Exact optimal game values.
    Value {
        /// Exhaustive classical value (the only mode).
        #[arg(long, required = true)]
        classical: bool,
        /// Game JSON, `-` for standard input.
        #[arg(long)]
        game: String,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// The 3x3 parity grid, classically unsatisfiable.
    MagicSquare,
    /// The complete-graph parity system of the given rank, bundled with its
    /// operator assignment.
    Clifford {
        /// Number of vertex variables, 2 to 12.
        #[arg(long)]
        rank: usize,
    },
    /// The CHSH game.
    Chsh,
    /// Encode graph k-coloring as a system.
    ColoringBcs {
        /// Graph file (`v`/`e` lines), `-` for standard input.
        #[arg(long, default_value = "-")]
        graph: String,
        /// Number of colors.
        #[arg(long, default_value_t = 3)]
        colors: usize,
    },
    /// Encode marking contexts (one JSON array of name arrays) as a system.
    KsBcs {
        /// Contexts JSON, `-` for standard input.
        #[arg(long, default_value = "-")]
        sets: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SolveMode {
    /// Complete backtracking search over all constraint kinds.
    #[arg(long)]
    classical: bool,
    /// Implication graph decision for binary clause systems.
    #[arg(long = "2sat")]
    two_sat: bool,
    /// Pebbling decision for Horn clause systems.
    #[arg(long)]
    horn: bool,
    /// GF(2) elimination for parity systems.
    #[arg(long)]
    parity: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ReduceMode {
    /// Target problem.
    #[arg(long, value_enum)]
    to: Option<ReduceTarget>,
    /// Add fresh-variable clauses until every variable pair shares one.
    #[arg(long)]
    harden: bool,
    /// Split heavy variables until no variable exceeds this many constraints.
    #[arg(long = "occ-limit")]
    occ_limit: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceTarget {
    #[value(name = "3coloring")]
    ThreeColoring,
    #[value(name = "1in3")]
    OneInThree,
    #[value(name = "3sat")]
    ThreeSat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gadget {
    /// Two triangles joined by rungs, inside the 3-coloring system.
    Prism,
    /// The exactly-one triple gadget on x, y.
    Onein3,
    /// The 3x3 parity grid.
    MagicSquare,
}

/// A failure with the exit code it should produce.
struct Failure {
    code: u8,
    message: String,
}

fn usage_err<E: ToString>(e: E) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

type RunResult = Result<u8, Failure>;

struct Stdin {
    used: bool,
}

impl Stdin {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        if path != "-" {
            return std::fs::read_to_string(path)
                .map_err(|e| usage_err(format!("{path}: {e}")));
        }
        if self.used {
            return Err(usage_err("standard input requested by two arguments"));
        }
        self.used = true;
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| usage_err(format!("standard input: {e}")))?;
        Ok(text)
    }
}

/// Accepts either system text or a JSON bundle with a `bcs` field, so
/// generator output can be piped straight in.
fn load_bcs(text: &str) -> Result<Bcs, Failure> {
    let body = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(usage_err)?;
        match v.get("bcs").and_then(Value::as_str) {
            Some(inner) => inner.to_string(),
            None => return Err(usage_err("JSON input has no \"bcs\" field")),
        }
    } else {
        text.to_string()
    };
    Bcs::parse(&body).map_err(usage_err)
}

fn print_value(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn assignment_json(b: &Bcs, model: &[bool]) -> Value {
    let values: BTreeMap<String, i64> = b
        .var_names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let v = match b.domain() {
                Domain::Bool01 => i64::from(model[i]),
                Domain::BoolPM => {
                    if model[i] {
                        -1
                    } else {
                        1
                    }
                }
            };
            (name.clone(), v)
        })
        .collect();
    json!(values)
}

/// Formats with the given number of significant digits; the result is still
/// a valid JSON number.
fn sig_digits(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.1}");
    }
    let exp = v.abs().log10().floor() as i32;
    let dec = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{v:.dec$}")
}

fn run(cli: Cli) -> RunResult {
    let mut stdin = Stdin { used: false };
    match cli.cmd {
        Cmd::Parse { file } => {
            let b = load_bcs(&stdin.read(&file)?)?;
            print!("{}", b.to_text());
            Ok(0)
        }
        Cmd::Gen { what } => run_gen(what, &mut stdin),
        Cmd::Solve { file, mode } => run_solve(&load_bcs(&stdin.read(&file)?)?, &mode),
        Cmd::Reduce { file, mode } => run_reduce(&load_bcs(&stdin.read(&file)?)?, &mode),
        Cmd::Verify { system, assignment, tol } => {
            run_verify(system.as_deref(), &assignment, tol, &mut stdin)
        }
        Cmd::Certify { gadget, pair, anticommute, degree } => {
            run_certify(gadget, &pair, anticommute, degree)
        }
        Cmd::Simulate { game, strategy } => {
            let g = bcslab::GameSpec::from_json(&stdin.read(&game)?).map_err(usage_err)?;
            let s = Strategy::from_json(&stdin.read(&strategy)?).map_err(usage_err)?;
            let v = game_value(&g, &s);
            println!("{{\"value\": {}}}", sig_digits(v, 12));
            Ok(0)
        }
        Cmd::Value { classical: _, game } => {
            let g = bcslab::GameSpec::from_json(&stdin.read(&game)?).map_err(usage_err)?;
            let v = classical_game_value(&g);
            print_value(&json!({ "value": v.to_string() }));
            Ok(0)
        }
    }
}

fn run_gen(what: GenCmd, stdin: &mut Stdin) -> RunResult {
    match what {
        GenCmd::MagicSquare => {
            print!("{}", magic_square().to_text());
            Ok(0)
        }
        GenCmd::Clifford { rank } => {
            if !(2..=12).contains(&rank) {
                return Err(usage_err(format!("rank must be in 2..=12, got {rank}")));
            }
            let (b, a) = bcslab::clifford_bcs(rank);
            let assignment: Value =
                serde_json::from_str(&a.to_json()).expect("assignment JSON is valid");
            print_value(&json!({ "bcs": b.to_text(), "assignment": assignment }));
            Ok(0)
        }
        GenCmd::Chsh => {
            println!("{}", chsh_game().to_json());
            Ok(0)
        }
        GenCmd::ColoringBcs { graph, colors } => {
            let g = ColoringInstance::parse(&stdin.read(&graph)?).map_err(usage_err)?;
            let b = coloring_to_bcs(&g, colors).map_err(usage_err)?;
            print!("{}", b.to_text());
            Ok(0)
        }
        GenCmd::KsBcs { sets } => {
            let sets: Vec<Vec<String>> =
                serde_json::from_str(&stdin.read(&sets)?).map_err(usage_err)?;
            let b = ks_to_bcs(&sets).map_err(usage_err)?;
            print!("{}", b.to_text());
            Ok(0)
        }
    }
}

fn run_solve(b: &Bcs, mode: &SolveMode) -> RunResult {
    let outcome = if mode.classical {
        solve_backtracking(b, &BTreeMap::new())
    } else if mode.two_sat {
        solve_2sat(b).map_err(usage_err)?
    } else if mode.horn {
        solve_hornsat(b).map_err(usage_err)?
    } else {
        let out = solve_parity_gf2(b).map_err(usage_err)?;
        return match out {
            Some(p) => {
                print_value(&json!({
                    "sat": true,
                    "assignment": assignment_json(b, &p.assignment),
                    "log2_count": p.log2_count,
                }));
                Ok(0)
            }
            None => {
                print_value(&json!({ "sat": false }));
                Ok(1)
            }
        };
    };
    match outcome {
        Some(model) => {
            print_value(&json!({ "sat": true, "assignment": assignment_json(b, &model) }));
            Ok(0)
        }
        None => {
            print_value(&json!({ "sat": false }));
            Ok(1)
        }
    }
}

fn run_reduce(b: &Bcs, mode: &ReduceMode) -> RunResult {
    let trace_value = |t: &ReductionTrace| -> Value {
        serde_json::from_str(&t.to_json()).expect("trace JSON is valid")
    };
    let out = match (mode.to, mode.harden, mode.occ_limit) {
        (Some(ReduceTarget::ThreeColoring), _, _) => {
            let (g, t) = reduce_3sat_to_3coloring(b).map_err(usage_err)?;
            json!({ "graph": g.to_text(), "trace": trace_value(&t) })
        }
        (Some(ReduceTarget::OneInThree), _, _) => {
            let (out, t) = reduce_3sat_to_1in3(b).map_err(usage_err)?;
            json!({ "bcs": out.to_text(), "trace": trace_value(&t) })
        }
        (Some(ReduceTarget::ThreeSat), _, _) => {
            let (out, t) = reduce_ksat_to_3sat(b).map_err(usage_err)?;
            json!({ "bcs": out.to_text(), "trace": trace_value(&t) })
        }
        (None, true, _) => {
            let (out, t) = harden_3sat(b).map_err(usage_err)?;
            json!({ "bcs": out.to_text(), "trace": trace_value(&t) })
        }
        (None, false, Some(limit)) => {
            let (out, t) = occurrence_reduce(b, limit).map_err(usage_err)?;
            json!({ "bcs": out.to_text(), "trace": trace_value(&t) })
        }
        (None, false, None) => unreachable!("clap enforces one mode"),
    };
    print_value(&out);
    Ok(0)
}

fn run_verify(
    system: Option<&str>,
    assignment: &str,
    tol: f64,
    stdin: &mut Stdin,
) -> RunResult {
    let a_text = stdin.read(assignment)?;
    let parsed: Value = serde_json::from_str(&a_text).map_err(usage_err)?;
    let bundled = parsed.get("bcs").and_then(Value::as_str).map(str::to_string);
    let a_value = match parsed.get("assignment") {
        Some(inner) => inner.clone(),
        None => parsed,
    };
    let a = OperatorAssignment::from_json(&a_value.to_string()).map_err(usage_err)?;
    let b = match (system, bundled) {
        (Some(path), _) => load_bcs(&stdin.read(path)?)?,
        (None, Some(text)) => Bcs::parse(&text).map_err(usage_err)?,
        (None, None) => {
            return Err(usage_err(
                "no system: pass a system file or a bundle with a \"bcs\" field",
            ))
        }
    };
    let report = verify_assignment(&b, &a, tol).map_err(usage_err)?;
    print_value(&serde_json::to_value(&report).expect("serializable"));
    Ok(if report.pass { 0 } else { 1 })
}

fn run_certify(
    gadget: Gadget,
    pair: &str,
    anticommute: bool,
    degree: Option<usize>,
) -> RunResult {
    let b = match gadget {
        Gadget::Prism => coloring_to_bcs(&prism(), 3).expect("prism encodes"),
        Gadget::Onein3 => one_in_three_gadget(),
        Gadget::MagicSquare => magic_square(),
    };
    let Some((u, v)) = pair.split_once(',') else {
        return Err(usage_err(format!("pair must be U,V with a comma, got {pair:?}")));
    };
    let (u, v) = (u.trim(), v.trim());
    let kind = if anticommute { GadgetKind::Anticommute } else { GadgetKind::Commute };
    let cap = degree.unwrap_or_else(default_degree_cap);
    match certify_gadget(&b, u, v, kind, cap) {
        Ok(cert) => {
            println!("{}", cert.to_json());
            Ok(0)
        }
        Err(GadgetError::Inconclusive(a, c, cap)) => {
            print_value(&json!({
                "certified": false,
                "reason": "inconclusive",
                "pair": [a, c],
                "degree_cap": cap,
            }));
            Ok(1)
        }
        Err(e) => Err(usage_err(e)),
    }
}

fn main() -> ExitCode {
    // die quietly when the downstream end of a pipe closes, as cat does
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("bcslab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
