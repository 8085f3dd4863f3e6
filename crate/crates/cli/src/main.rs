//! Command-line front end for the bounded-quantifier elimination engine.
//!
//! Exit codes: 0 success/pass, 1 equivalence counterexample, 2 unreadable or
//! unparseable input, 3 not eligible for quantifier-free expansion, 4 missing
//! variable binding, 5 expansion budget exceeded.

use std::collections::HashMap;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use ppres::ast::{Formula, Var};
use ppres::count::{count_family, fit_quasi_polynomial, CountBox, CountTable, FitReport};
use ppres::eliminate::eliminate;
use ppres::oracle::{check_equiv, classical_cooper_decide, eval_bounded, ground, Grid, Verdict};
use ppres::parser::parse;
use ppres::poly::Poly;
use ppres::qfree::{eliminate_to_qfree, QfreeError};
use serde_json::{json, Value};

const EXIT_COUNTEREXAMPLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INELIGIBLE: u8 = 3;
const EXIT_MISSING_BINDING: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "ppres", version, about = "Presburger formulas with polynomial parameters: \
parse, evaluate, bound or remove quantifiers, compare on grids, count solutions")]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form.
    Parse(InputArgs),
    /// Evaluate a formula at a parameter value under a variable assignment.
    Eval(EvalArgs),
    /// Rewrite a formula so that no unbounded quantifier remains.
    Eliminate(EliminateArgs),
    /// Produce a fully quantifier-free equivalent (eligible formulas only).
    Qfree(InputArgs),
    /// Compare two formulas over a finite grid of parameters and points.
    Check(CheckArgs),
    /// Count solutions inside a box for a range of parameter values.
    Count(CountArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Path to a UTF-8 formula file, or the formula itself with --inline.
    input: String,
    /// Treat INPUT as formula text instead of a path.
    #[arg(long)]
    inline: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Parameter value.
    #[arg(long, short = 't')]
    t: u64,
    /// Variable binding NAME=INTEGER; repeat for several variables.
    #[arg(long = "assign", short = 'a', value_name = "NAME=VALUE")]
    assign: Vec<String>,
}

#[derive(Args)]
struct EliminateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Remove quantifiers entirely instead of bounding them.
    #[arg(long)]
    qfree: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Path to the first formula file.
    lhs: String,
    /// Path to the second formula file.
    rhs: String,
    /// Treat LHS and RHS as formula text instead of paths.
    #[arg(long)]
    inline: bool,
    /// Largest parameter value checked.
    #[arg(long, default_value_t = 12)]
    t_max: u64,
    /// Free variables sweep [-RADIUS, RADIUS].
    #[arg(long = "box", default_value_t = 15, value_name = "RADIUS")]
    radius: i64,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Parameter range, smallest and largest value.
    #[arg(long = "t-range", num_args = 2, value_names = ["LO", "HI"], default_values = ["0", "8"])]
    t_range: Vec<u64>,
    /// Box edges as polynomials in t, e.g. `--box 0 2t^2+t`.
    #[arg(long = "box", num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    boxed: Vec<String>,
    /// Fit per-residue-class polynomials: modulus and degree.
    #[arg(long, num_args = 2, value_names = ["MODULUS", "DEGREE"])]
    fit: Option<Vec<u64>>,
}

/// A failure that ends the run: exit code plus a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PPRES_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Ignore AlreadyInitialized: only the first cap takes effect.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("PPRES_THREADS must be a positive integer, got `{threads}`");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Parse(args) => cmd_parse(args, cli.json),
        Command::Eval(args) => cmd_eval(args, cli.json),
        Command::Eliminate(args) => cmd_eliminate(args, cli.json),
        Command::Qfree(args) => cmd_qfree(args, cli.json),
        Command::Check(args) => cmd_check(args, cli.json),
        Command::Count(args) => cmd_count(args, cli.json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Reads the formula text and a label describing where it came from.
fn read_input(args: &InputArgs) -> Result<(String, String), Failure> {
    if args.inline {
        Ok(("<inline>".to_string(), args.input.clone()))
    } else {
        let text = fs::read_to_string(&args.input)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", args.input)))?;
        Ok((args.input.clone(), text))
    }
}

fn parse_formula(label: &str, text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(|e| Failure::new(EXIT_INPUT, format!("{label}: {e}")))
}

fn load(args: &InputArgs) -> Result<(String, Formula), Failure> {
    let (label, text) = read_input(args)?;
    let f = parse_formula(&label, &text)?;
    Ok((label, f))
}

fn emit(json_mode: bool, human: &str, payload: Value) {
    if json_mode {
        println!("{payload}");
    } else {
        println!("{human}");
    }
}

fn formula_stats(f: &Formula) -> Value {
    json!({
        "size": f.size(),
        "free_vars": f.free_vars().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "quantifiers": f.count_quantifiers(),
        "unbounded": f.count_unbounded_quantifiers(),
    })
}

fn cmd_parse(args: &InputArgs, json_mode: bool) -> Result<u8, Failure> {
    let (label, f) = load(args)?;
    let canonical = f.to_string();
    emit(
        json_mode,
        &canonical,
        json!({
            "command": "parse",
            "input": label,
            "result": canonical,
            "stats": formula_stats(&f),
        }),
    );
    Ok(0)
}

fn cmd_eval(args: &EvalArgs, json_mode: bool) -> Result<u8, Failure> {
    let (label, f) = load(&args.input)?;
    let free = f.free_vars();
    let mut env: HashMap<Var, BigInt> = HashMap::new();
    for binding in &args.assign {
        let (name, value) = binding
            .split_once('=')
            .ok_or_else(|| Failure::new(EXIT_INPUT, format!("malformed binding `{binding}`")))?;
        let value: BigInt = value
            .trim()
            .parse()
            .map_err(|e| Failure::new(EXIT_INPUT, format!("binding `{binding}`: {e}")))?;
        match free.iter().find(|v| v.name == name.trim()) {
            Some(v) => {
                env.insert(v.clone(), value);
            }
            None => {
                return Err(Failure::new(
                    EXIT_INPUT,
                    format!("`{}` is not a free variable of the formula", name.trim()),
                ))
            }
        }
    }
    if let Some(missing) = free.iter().find(|v| !env.contains_key(v)) {
        return Err(Failure::new(
            EXIT_MISSING_BINDING,
            format!("no value bound for free variable `{missing}`"),
        ));
    }
    let (value, decider) = if f.count_unbounded_quantifiers() > 0 {
        (classical_cooper_decide(&ground(&f, args.t), &env), "cooper")
    } else {
        let v = eval_bounded(&f, args.t, &env)
            .map_err(|e| Failure::new(EXIT_MISSING_BINDING, e.to_string()))?;
        (v, "enumeration")
    };
    emit(
        json_mode,
        if value { "true" } else { "false" },
        json!({
            "command": "eval",
            "input": label,
            "result": value,
            "stats": { "t": args.t, "decider": decider },
        }),
    );
    Ok(0)
}

fn cmd_eliminate(args: &EliminateArgs, json_mode: bool) -> Result<u8, Failure> {
    if args.qfree {
        return cmd_qfree(&args.input, json_mode);
    }
    let (label, f) = load(&args.input)?;
    let out = eliminate(&f);
    let disjuncts = match &out {
        Formula::Or(gs) => gs.len(),
        _ => 1,
    };
    emit(
        json_mode,
        &out.to_string(),
        json!({
            "command": "eliminate",
            "input": label,
            "result": out.to_string(),
            "stats": {
                "input_size": f.size(),
                "output_size": out.size(),
                "unbounded_before": f.count_unbounded_quantifiers(),
                "unbounded_after": out.count_unbounded_quantifiers(),
                "disjuncts": disjuncts,
            },
        }),
    );
    Ok(0)
}

fn cmd_qfree(args: &InputArgs, json_mode: bool) -> Result<u8, Failure> {
    let (label, f) = load(args)?;
    match eliminate_to_qfree(&f) {
        Ok(out) => {
            emit(
                json_mode,
                &out.to_string(),
                json!({
                    "command": "qfree",
                    "input": label,
                    "result": out.to_string(),
                    "stats": {
                        "eligible": true,
                        "input_size": f.size(),
                        "output_size": out.size(),
                        "quantifiers_after": out.count_quantifiers(),
                    },
                }),
            );
            Ok(0)
        }
        Err(QfreeError::Ineligible(report)) => {
            if json_mode {
                let violations: Vec<String> =
                    report.violations.iter().map(|v| v.to_string()).collect();
                println!(
                    "{}",
                    json!({
                        "command": "qfree",
                        "input": label,
                        "result": Value::Null,
                        "stats": { "eligible": false, "violations": violations },
                    })
                );
            }
            eprintln!("{label}: not eligible for quantifier-free expansion\n{report}");
            Ok(EXIT_INELIGIBLE)
        }
        Err(e @ QfreeError::ExpansionLimit { .. }) => {
            Err(Failure::new(EXIT_BUDGET, format!("{label}: {e}")))
        }
    }
}

fn cmd_check(args: &CheckArgs, json_mode: bool) -> Result<u8, Failure> {
    let lhs_args = InputArgs {
        input: args.lhs.clone(),
        inline: args.inline,
    };
    let rhs_args = InputArgs {
        input: args.rhs.clone(),
        inline: args.inline,
    };
    let (lhs_label, lhs) = load(&lhs_args)?;
    let (_, rhs) = load(&rhs_args)?;
    let grid = Grid {
        t_max: args.t_max,
        radius: args.radius,
    };
    let report = check_equiv(&lhs, &rhs, &grid);
    let stats = json!({
        "points": report.points,
        "t_max": grid.t_max,
        "radius": grid.radius,
    });
    match &report.verdict {
        Verdict::Pass => {
            emit(
                json_mode,
                &format!("pass: {} grid points agree", report.points),
                json!({
                    "command": "check",
                    "input": lhs_label,
                    "result": "pass",
                    "stats": stats,
                }),
            );
            Ok(0)
        }
        Verdict::Counterexample(w) => {
            let assignment: Vec<String> = w
                .assignment
                .iter()
                .map(|(v, x)| format!("{v}={x}"))
                .collect();
            emit(
                json_mode,
                &format!(
                    "counterexample: t={} {} (lhs {}, rhs {})",
                    w.t,
                    assignment.join(" "),
                    w.lhs,
                    w.rhs
                ),
                json!({
                    "command": "check",
                    "input": lhs_label,
                    "result": "counterexample",
                    "stats": stats,
                    "witness": {
                        "t": w.t,
                        "assignment": w.assignment.iter()
                            .map(|(v, x)| (v.to_string(), Value::from(x.to_string())))
                            .collect::<serde_json::Map<String, Value>>(),
                        "lhs": w.lhs,
                        "rhs": w.rhs,
                    },
                }),
            );
            Ok(EXIT_COUNTEREXAMPLE)
        }
        Verdict::Inconclusive { reason } => Err(Failure::new(
            EXIT_INPUT,
            format!("check inconclusive: {reason}"),
        )),
    }
}

fn render_fit(fit: &FitReport) -> String {
    let mut out = format!("fit mod {} degree {}:", fit.modulus, fit.degree);
    for class in &fit.classes {
        let shape = match class.as_poly() {
            Some(p) => format!("{p}"),
            None => class
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| format!("{c}*t^{k}"))
                .collect::<Vec<_>>()
                .join(" + "),
        };
        out.push_str(&format!(
            "\n  t = {} (mod {}): {} [{}, {} points]",
            class.residue,
            fit.modulus,
            shape,
            if class.exact { "exact" } else { "approximate" },
            class.points_used,
        ));
    }
    out
}

fn fit_json(fit: &FitReport) -> Value {
    json!({
        "modulus": fit.modulus,
        "degree": fit.degree,
        "exact": fit.all_exact(),
        "classes": fit.classes.iter().map(|class| json!({
            "residue": class.residue,
            "coeffs": class.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "poly": class.as_poly().map(|p| p.to_string()),
            "exact": class.exact,
            "points_used": class.points_used,
        })).collect::<Vec<_>>(),
    })
}

fn render_table(table: &CountTable) -> String {
    table
        .rows
        .iter()
        .map(|r| {
            format!(
                "t={} count={}{}",
                r.t,
                r.count,
                if r.truncated { " (truncated)" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_count(args: &CountArgs, json_mode: bool) -> Result<u8, Failure> {
    let (label, f) = load(&args.input)?;
    let boxed = match args.boxed.as_slice() {
        [lo, hi] => CountBox {
            lo: lo
                .parse::<Poly>()
                .map_err(|e| Failure::new(EXIT_INPUT, format!("--box {lo}: {e}")))?,
            hi: hi
                .parse::<Poly>()
                .map_err(|e| Failure::new(EXIT_INPUT, format!("--box {hi}: {e}")))?,
        },
        _ => CountBox {
            lo: Poly::constant(-15),
            hi: Poly::constant(15),
        },
    };
    let (t_lo, t_hi) = (args.t_range[0], args.t_range[1]);
    if t_lo > t_hi {
        return Err(Failure::new(EXIT_INPUT, "--t-range LO must not exceed HI"));
    }
    let table = count_family(&f, t_lo, t_hi, &boxed)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let fit = match args.fit.as_deref() {
        Some([m, d]) => Some(fit_quasi_polynomial(&table, *m, *d as usize)),
        Some(_) => return Err(Failure::new(EXIT_INPUT, "--fit takes MODULUS DEGREE")),
        None => None,
    };
    let mut human = render_table(&table);
    if let Some(fit) = &fit {
        human.push('\n');
        human.push_str(&render_fit(fit));
    }
    emit(
        json_mode,
        &human,
        json!({
            "command": "count",
            "input": label,
            "result": table.rows.iter().map(|r| json!({
                "t": r.t,
                "count": r.count,
                "truncated": r.truncated,
            })).collect::<Vec<_>>(),
            "stats": {
                "box": [boxed.lo.to_string(), boxed.hi.to_string()],
                "t_range": [t_lo, t_hi],
                "fit": fit.as_ref().map(fit_json),
            },
        }),
    );
    Ok(0)
}
