//! `coinsim`: build, inspect, verify and simulate coin machines.
//!
//! Exit codes: 0 success, 1 mismatch or other failure, 2 range, 3 cap,
//! 4 parse or usage, 5 non-halting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use coinsim::automaton::{builtin, extract_rational, validate, BUILTIN_NAMES};
use coinsim::blocks::{dice_rational_to_block, rational_to_block};
use coinsim::document::Machine;
use coinsim::expr::{parse_multi, parse_rational};
use coinsim::montecarlo::{simulate, MonteCarloConfig};
use coinsim::pushdown::{
    build_gamma_pda, build_ladder_pda, build_sqrt_pda, build_transient_ladder_pda, ladder_machine, pda_value,
    AlphaOptions, Method, DEFAULT_HALTING_TOL, DEFAULT_ITER_CAP, DEFAULT_TOL,
};
use coinsim::ratfunc::{
    bernstein_from_rational, homogenize, polya_multi_joint, polya_positivize, HomogeneousPoly, MultiRational,
    RationalFunction, DEFAULT_POLYA_CAP,
};
use coinsim::{Error, Result};

#[derive(Parser)]
#[command(name = "coinsim", version, about = "Exact f(p)-coin simulation from a p-coin")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block simulation for a rational f.
    BuildBlock {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = DEFAULT_POLYA_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact output distribution of a finite, block or dice machine.
    Extract {
        #[arg(long)]
        machine: PathBuf,
    },
    /// Seeded Monte Carlo estimate of P[label].
    Simulate {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Exact value of P[label] as an expression in p.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 1)]
        label: u32,
        #[arg(long)]
        step_cap: Option<u64>,
    },
    /// Compare a machine's exact distribution with expressions.
    VerifyExact {
        #[arg(long)]
        machine: PathBuf,
        /// One expression per output beyond the first for dice machines,
        /// otherwise the label-1 function.
        #[arg(long, required = true)]
        f: Vec<String>,
        #[arg(long, default_value_t = 2)]
        vars: usize,
    },
    /// Value of a pushdown machine from its first-passage equations.
    PdaValue {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        p: f64,
        /// Refuse when a goodness sum falls below 1 - tol.
        #[arg(long, default_value_t = DEFAULT_HALTING_TOL)]
        tol: f64,
        /// Stop iterating once steps are below this (tightened to tol/1000).
        #[arg(long, default_value_t = DEFAULT_TOL)]
        solve_tol: f64,
        #[arg(long, default_value_t = DEFAULT_ITER_CAP)]
        iter_cap: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
        method: MethodArg,
    },
    /// Smallest Polya exponent and the positivized coefficients.
    Polya {
        /// Rational f: joint exponent of D, E and E-D.
        #[arg(long, conflicts_with_all = ["coeffs", "multi"])]
        f: Option<String>,
        /// Homogeneous coefficients, entry i for p^i q^(k-i).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        coeffs: Option<Vec<i64>>,
        /// Homogeneous polynomial in p1..ps.
        #[arg(long)]
        multi: Option<String>,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = DEFAULT_POLYA_CAP)]
        cap: usize,
    },
    /// Block simulation for a probability vector of rational functions.
    DiceBuild {
        #[arg(long = "f", required = true, num_args = 1)]
        fs: Vec<String>,
        #[arg(long, default_value_t = 2)]
        vars: usize,
        #[arg(long, default_value_t = DEFAULT_POLYA_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in machine document.
    Builtin {
        #[arg(value_enum)]
        name: BuiltinArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ladder machine for g, composed with its (g, 1-2g, g) block reader.
    BuildLadder {
        #[arg(long)]
        g: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Newton,
    Kleene,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum BuiltinArg {
    VonNeumann,
    Square,
    Ratio,
    /// Three-letter ladder walk.
    Ladder,
    /// Binary machine for (1 - sqrt p) / (1 - p).
    Gamma,
    Sqrt,
    TransientLadder,
}

/// What a command wants printed: a text form and a JSON form.
struct Report {
    text: String,
    json: Value,
    /// Exit code when the command ran but the check failed.
    code: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(report) => {
            if cli.json {
                print!("{}", pretty(&report.json));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            eprintln!("error: {e}");
            if cli.json {
                print!(
                    "{}",
                    pretty(&json!({ "error": e.to_string(), "exit_code": code }))
                );
            }
            ExitCode::from(code)
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(command: Command) -> Result<Report> {
    match command {
        Command::BuildBlock { f, cap, out } => build_block(&f, cap, out.as_deref()),
        Command::Extract { machine } => extract(&load(&machine)?),
        Command::Simulate {
            machine,
            p,
            n,
            seed,
            target,
            label,
            step_cap,
        } => {
            let machine = load(&machine)?;
            let target = match target {
                Some(t) => Some(parse_rational(&t)?.eval_f64(p)),
                None => None,
            };
            let cfg = MonteCarloConfig {
                p,
                n,
                seed,
                step_cap,
                target,
                label,
            };
            let r = simulate(&machine, &cfg)?;
            let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            let mut text = format!(
                "trials {} of {}, successes {}\nestimate {} (se {})\nmean bits {}\ndid not halt {} (rate {:e})\n",
                r.n_trials,
                r.n_requested,
                r.successes,
                fmt(r.estimate),
                fmt(r.standard_error),
                fmt(r.mean_bits_consumed),
                r.did_not_halt,
                r.did_not_halt_rate,
            );
            if let Some(t) = r.target {
                text += &format!("target {t:.6}, z {}\n", fmt(r.z_score));
            }
            let code = u8::from(r.within_tolerance == Some(false));
            Ok(Report {
                text,
                json: serde_json::to_value(&r).expect("serializable"),
                code,
            })
        }
        Command::VerifyExact { machine, f, vars } => verify_exact(&load(&machine)?, &f, vars),
        Command::PdaValue {
            machine,
            p,
            tol,
            solve_tol,
            iter_cap,
            method,
        } => {
            let Machine::Pushdown(m) = load(&machine)? else {
                return Err(Error::Malformed("pda-value needs a pushdown machine".into()));
            };
            let opts = AlphaOptions {
                tol: solve_tol,
                iter_cap,
                halting_tol: tol,
                method: match method {
                    MethodArg::Newton => Method::Newton,
                    MethodArg::Kleene => Method::Kleene,
                },
                ..AlphaOptions::default()
            };
            let v = pda_value(&m, p, &opts)?;
            let goodness = v
                .min_goodness
                .map(|g| json!({ "symbol": m.stack_alphabet()[g.symbol], "state": g.state, "sum": g.sum }));
            let mut text = format!("value {:.12}\niterations {}\n", v.value, v.iterations);
            if let Some(g) = v.min_goodness {
                text += &format!(
                    "min goodness {:.12} at ({}, {})\n",
                    g.sum,
                    m.stack_alphabet()[g.symbol],
                    g.state
                );
            }
            Ok(Report::ok(
                text,
                json!({
                    "p": p,
                    "value": v.value,
                    "iterations": v.iterations,
                    "min_goodness": goodness,
                    "tol": tol,
                    "solve_tol": solve_tol,
                }),
            ))
        }
        Command::Polya {
            f,
            coeffs,
            multi,
            vars,
            cap,
        } => polya(f, coeffs, multi, vars, cap),
        Command::DiceBuild { fs, vars, cap, out } => dice_build(&fs, vars, cap, out.as_deref()),
        Command::Builtin { name, out } => {
            let machine = match name {
                BuiltinArg::VonNeumann => Machine::Finite(builtin(BUILTIN_NAMES[0])?),
                BuiltinArg::Square => Machine::Finite(builtin(BUILTIN_NAMES[1])?),
                BuiltinArg::Ratio => Machine::Finite(builtin(BUILTIN_NAMES[2])?),
                BuiltinArg::Ladder => Machine::Pushdown(ladder_machine()),
                BuiltinArg::Gamma => Machine::Pushdown(build_gamma_pda()),
                BuiltinArg::Sqrt => Machine::Pushdown(build_sqrt_pda()),
                BuiltinArg::TransientLadder => Machine::Pushdown(build_transient_ladder_pda()),
            };
            emit(&machine, out.as_deref(), json!({ "kind": machine.kind() }))
        }
        Command::BuildLadder { g, out } => {
            let ladder = build_ladder_pda(&parse_rational(&g)?)?;
            let m = ladder.compose()?;
            let summary = json!({ "g": ladder.g().to_string(), "states": m.state_count() });
            emit(&Machine::Pushdown(m), out.as_deref(), summary)
        }
    }
}

fn load(path: &Path) -> Result<Machine> {
    let text = fs::read_to_string(path).map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
    Machine::from_json(&text)
}

fn save(machine: &Machine, path: &Path) -> Result<()> {
    fs::write(path, machine.to_json())
        .map_err(|e| Error::Malformed(format!("cannot write {}: {e}", path.display())))
}

/// Write to `out` and report `summary`, or print the document itself.
fn emit(machine: &Machine, out: Option<&Path>, summary: Value) -> Result<Report> {
    match out {
        Some(path) => {
            save(machine, path)?;
            Ok(Report::ok(format!("wrote {}\n", path.display()), summary))
        }
        None => Ok(Report::ok(
            machine.to_json(),
            serde_json::to_value(machine.to_document()).expect("serializable"),
        )),
    }
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn build_block(f: &str, cap: usize, out: Option<&Path>) -> Result<Report> {
    let f = parse_rational(f)?;
    let pair = bernstein_from_rational(&f, cap)?;
    let sim = rational_to_block(&f, cap)?;
    if let Some(path) = out {
        save(&Machine::Block(sim.clone()), path)?;
    }
    let text = format!(
        "f = {f}\nk {} r {} n {} block_length {}\nd [{}]\ne [{}]\n",
        sim.k(),
        sim.r(),
        pair.polya_exponent(),
        sim.block_length(),
        strings(sim.d()).join(", "),
        strings(sim.e()).join(", "),
    );
    Ok(Report::ok(
        text,
        json!({
            "f": f.to_string(),
            "k": sim.k(),
            "r": sim.r(),
            "polya_exponent": pair.polya_exponent(),
            "block_length": sim.block_length(),
            "d": strings(sim.d()),
            "e": strings(sim.e()),
        }),
    ))
}

/// Per-output exact distributions as printable strings.
fn distributions(machine: &Machine) -> Result<Vec<String>> {
    Ok(match machine {
        Machine::Finite(a) => strings(&extract_rational(&validate(a)?)?),
        Machine::Block(b) => {
            let f = b.exact_distribution();
            vec![f.complement().to_string(), f.to_string()]
        }
        Machine::Dice(d) if d.alphabet_size() == 2 => strings(&d.exact_distribution_univariate()?),
        Machine::Dice(d) => strings(&d.exact_distribution()),
        Machine::Pushdown(_) => {
            return Err(Error::Malformed(
                "pushdown values are not rational in general; use pda-value".into(),
            ))
        }
    })
}

fn extract(machine: &Machine) -> Result<Report> {
    let fs = distributions(machine)?;
    let text = fs
        .iter()
        .enumerate()
        .map(|(l, f)| format!("label {l}: {f}\n"))
        .collect();
    Ok(Report::ok(text, json!({ "kind": machine.kind(), "labels": fs })))
}

fn verify_exact(machine: &Machine, fs: &[String], vars: usize) -> Result<Report> {
    // (label, expected, actual, equal)
    let rows: Vec<(usize, String, String, bool)> = match machine {
        Machine::Dice(d) => {
            if fs.len() != d.outputs() {
                return Err(Error::AlphabetMismatch(format!(
                    "{} expressions for {} outputs",
                    fs.len(),
                    d.outputs()
                )));
            }
            if vars != d.alphabet_size() {
                return Err(Error::AlphabetMismatch(format!(
                    "--vars {vars} but the machine reads {} letters",
                    d.alphabet_size()
                )));
            }
            let actual = d.exact_distribution();
            let mut rows = Vec::new();
            for (l, (text, a)) in fs.iter().zip(&actual).enumerate() {
                let want = parse_multi(text, vars)?;
                let (want_s, got_s) = if vars == 2 {
                    (want.to_univariate()?.to_string(), a.to_univariate()?.to_string())
                } else {
                    (want.to_string(), a.to_string())
                };
                rows.push((l, want_s, got_s, want.equal_on_simplex(a)));
            }
            rows
        }
        Machine::Finite(_) | Machine::Block(_) => {
            let [text] = fs else {
                return Err(Error::Malformed("give one --f for the label-1 function".into()));
            };
            let want = parse_rational(text)?;
            let got: RationalFunction = match machine {
                Machine::Finite(a) => extract_rational(&validate(a)?)?
                    .get(1)
                    .cloned()
                    .unwrap_or_else(RationalFunction::zero),
                Machine::Block(b) => b.exact_distribution(),
                _ => unreachable!(),
            };
            vec![(1, want.to_string(), got.to_string(), want == got)]
        }
        Machine::Pushdown(_) => {
            return Err(Error::Malformed(
                "verify-exact needs a finite, block or dice machine".into(),
            ))
        }
    };
    let pass = rows.iter().all(|r| r.3);
    let mut text = String::new();
    for (l, want, got, eq) in &rows {
        let verdict = if *eq { "match" } else { "MISMATCH" };
        text += &format!("label {l}: {verdict}\n  expected {want}\n  machine  {got}\n");
    }
    text += if pass { "pass\n" } else { "fail\n" };
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|(l, want, got, eq)| json!({ "label": l, "expected": want, "machine": got, "equal": eq }))
        .collect();
    Ok(Report {
        text,
        json: json!({ "pass": pass, "labels": json_rows }),
        code: u8::from(!pass),
    })
}

fn polya(
    f: Option<String>,
    coeffs: Option<Vec<i64>>,
    multi: Option<String>,
    vars: usize,
    cap: usize,
) -> Result<Report> {
    let (n, names, shifted): (usize, Vec<&str>, Vec<Vec<String>>) = match (f, coeffs, multi) {
        (Some(f), None, None) => {
            let f = parse_rational(&f)?;
            let (d, e) = homogenize(&f);
            let polys = [d.clone(), e.clone(), e.sub(&d)];
            let (n, out) = polya_positivize(&polys, cap)?;
            (
                n,
                vec!["D", "E", "E-D"],
                out.iter().map(|h| strings(h.coeffs())).collect(),
            )
        }
        (None, Some(c), None) => {
            let h = HomogeneousPoly::new(c.into_iter().map(BigInt::from).collect());
            let (n, out) = polya_positivize(&[h], cap)?;
            (n, vec!["P"], vec![strings(out[0].coeffs())])
        }
        (None, None, Some(text)) => {
            let poly = parse_multi(&text, vars)?;
            let den_is_one = poly.den() == MultiRational::one(vars).den();
            if !den_is_one {
                return Err(Error::Malformed("--multi takes a polynomial".into()));
            }
            let (n, out) = polya_multi_joint(std::slice::from_ref(poly.num()), cap)?;
            (n, vec!["P"], vec![vec![out[0].to_string()]])
        }
        _ => {
            return Err(Error::Syntax {
                pos: 0,
                msg: "give exactly one of --f, --coeffs, --multi".into(),
            })
        }
    };
    let mut text = format!("n {n}\n");
    for (name, c) in names.iter().zip(&shifted) {
        text += &format!("{name}: [{}]\n", c.join(", "));
    }
    let polys: Vec<Value> = names
        .iter()
        .zip(&shifted)
        .map(|(name, c)| json!({ "name": name, "coefficients": c }))
        .collect();
    Ok(Report::ok(text, json!({ "exponent": n, "polynomials": polys })))
}

fn dice_build(fs: &[String], vars: usize, cap: usize, out: Option<&Path>) -> Result<Report> {
    let targets = fs
        .iter()
        .map(|t| parse_multi(t, vars))
        .collect::<Result<Vec<_>>>()?;
    let sim = dice_rational_to_block(&targets, cap)?;
    let actual = sim.exact_distribution();
    let matches: Vec<bool> = targets
        .iter()
        .zip(&actual)
        .map(|(t, a)| t.equal_on_simplex(a))
        .collect();
    if let Some(path) = out {
        save(&Machine::Dice(sim.clone()), path)?;
    }
    let barycenter = vec![1.0 / vars as f64; vars];
    let stages: Vec<Value> = sim
        .stages()
        .iter()
        .map(|s| json!({ "k": s.k(), "r": s.r(), "block_length": s.block_length() }))
        .collect();
    let shown = distributions(&Machine::Dice(sim.clone()))?;
    let mut text = format!(
        "outputs {} alphabet {} block_length {} order {:?}\n",
        sim.outputs(),
        sim.alphabet_size(),
        sim.block_length(),
        sim.order()
    );
    for (j, s) in sim.stages().iter().enumerate() {
        text += &format!("stage {j}: k {} r {}\n", s.k(), s.r());
    }
    for (l, (f, m)) in shown.iter().zip(&matches).enumerate() {
        text += &format!("output {l}: {f} ({})\n", if *m { "match" } else { "MISMATCH" });
    }
    text += &format!(
        "expected symbols per output at the barycenter {:.3}\n",
        sim.expected_symbols(&barycenter)
    );
    let all = matches.iter().all(|&m| m);
    Ok(Report {
        text,
        json: json!({
            "outputs": sim.outputs(),
            "alphabet_size": sim.alphabet_size(),
            "block_length": sim.block_length(),
            "order": sim.order(),
            "stages": stages,
            "distribution": shown,
            "match": all,
        }),
        code: u8::from(!all),
    })
}
