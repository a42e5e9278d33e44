//! Command-line front end: classification, isomorphism queries, CEA
//! verification, and dynamics tracing with machine-readable output.
//!
//! Exit codes: 0 success, 1 error, 2 numerically ambiguous classification.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use evoalg::cea::{halton_shift_samples, halton_triples};
use evoalg::{
    classify, ck_check, homogeneity_check, iso, parse, periodicity_scan, trace, BasisChange,
    CanonicalClass, CeaFamily, IsoMethod, Scalar, StructMatrix, TimeVar, Tol, TraceGrid,
};

#[derive(Parser)]
#[command(name = "evoalg", about = "2x2 real evolution algebra toolkit", version)]
struct Cli {
    /// Optional config file of `key = value` lines mirroring long flags;
    /// command-line flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Relative tolerance for zero tests and comparisons
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a structural matrix into its canonical form
    Classify {
        /// Matrix entries a11,a12,a21,a22 (decimal or rational p/q)
        #[arg(short, long)]
        matrix: String,
    },
    /// Decide isomorphism of two algebras, with a witness when they are
    Iso {
        /// Left matrix a11,a12,a21,a22
        #[arg(short, long)]
        left: String,
        /// Right matrix a11,a12,a21,a22
        #[arg(short, long)]
        right: String,
    },
    /// Chain-of-evolution-algebra checks
    Cea {
        #[command(subcommand)]
        sub: CeaCommand,
    },
    /// Trace the isomorphism class over a (s, t) grid
    Trace {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        step: f64,
        /// Output format: csv or json
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CeaCommand {
    /// Verify the Chapman-Kolmogorov composition law on sampled triples
    Check {
        #[command(flatten)]
        family: FamilyArgs,
        /// Number of sampled (s, tau, t) triples
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Upper end of the sampling window [0, window]
        #[arg(long, default_value_t = 3.0)]
        window: f64,
    },
    /// Check time-homogeneity M[s+h, t+h] = M[s, t]
    Homogeneity {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        window: f64,
    },
    /// Scan for the smallest period in s or t
    Period {
        #[command(flatten)]
        family: FamilyArgs,
        /// Shifted variable: s or t
        #[arg(long, default_value = "t")]
        var: String,
        /// Largest period considered
        #[arg(long, default_value_t = 10.0)]
        max: f64,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Family: f1, f2, f3, or custom
    #[arg(long)]
    family: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Use the printed variant (f1: exponent t instead of t-s; f2: 1/2
    /// scaling); see DISCREPANCIES.md
    #[arg(long, default_value_t = false)]
    printed_form: bool,
    /// Phi(t) for family f3
    #[arg(long)]
    phi: Option<String>,
    /// Psi(t) for family f3
    #[arg(long)]
    psi: Option<String>,
    /// Four entry expressions in s and t, separated by `;`, for custom
    #[arg(long)]
    entries: Option<String>,
}

impl FamilyArgs {
    fn build(&self) -> Result<CeaFamily, String> {
        match self.family.as_str() {
            "f1" => Ok(CeaFamily::F1 {
                lambda: self.lambda.ok_or("family f1 requires --lambda")?,
                mu: self.mu.ok_or("family f1 requires --mu")?,
                printed_exponent: self.printed_form,
            }),
            "f2" => Ok(CeaFamily::F2 {
                half_factor: self.printed_form,
            }),
            "f3" => {
                if self.printed_form {
                    return Err("--printed-form applies to f1 and f2 only".into());
                }
                let phi = self.phi.as_deref().ok_or("family f3 requires --phi")?;
                let psi = self.psi.as_deref().ok_or("family f3 requires --psi")?;
                Ok(CeaFamily::F3 {
                    phi: parse(phi, &["t"]).map_err(|e| format!("--phi: {}", e))?,
                    psi: parse(psi, &["t"]).map_err(|e| format!("--psi: {}", e))?,
                })
            }
            "custom" => {
                let text = self
                    .entries
                    .as_deref()
                    .ok_or("family custom requires --entries")?;
                let parts: Vec<&str> = text.split(';').collect();
                if parts.len() != 4 {
                    return Err(format!("--entries needs 4 expressions, got {}", parts.len()));
                }
                let mut exprs = Vec::with_capacity(4);
                for p in &parts {
                    exprs.push(parse(p, &["s", "t"]).map_err(|e| format!("--entries: {}", e))?);
                }
                let entries: [evoalg::Expr; 4] = match exprs.try_into() {
                    Ok(a) => a,
                    Err(_) => unreachable!(),
                };
                Ok(CeaFamily::Custom { entries })
            }
            other => Err(format!("unknown family `{}`", other)),
        }
    }

    fn echo(&self) -> Value {
        let mut m = Map::new();
        m.insert("family".into(), json!(self.family));
        if let Some(l) = self.lambda {
            m.insert("lambda".into(), num(l));
        }
        if let Some(u) = self.mu {
            m.insert("mu".into(), num(u));
        }
        m.insert("printed_form".into(), json!(self.printed_form));
        if let Some(p) = &self.phi {
            m.insert("phi".into(), json!(p));
        }
        if let Some(p) = &self.psi {
            m.insert("psi".into(), json!(p));
        }
        if let Some(e) = &self.entries {
            m.insert("entries".into(), json!(e));
        }
        Value::Object(m)
    }
}

/// Shortest decimal representation with at most 12 significant digits.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };
    let n = digits.len() as i32;
    if exp >= -5 && exp < 15 {
        if exp >= n - 1 {
            // integer with possible trailing zeros
            let zeros = (exp - (n - 1)) as usize;
            format!("{}{}{}", sign, digits, "0".repeat(zeros))
        } else if exp >= 0 {
            let (int, frac) = digits.split_at((exp + 1) as usize);
            format!("{}{}.{}", sign, int, frac)
        } else {
            let zeros = (-exp - 1) as usize;
            format!("{}0.{}{}", sign, "0".repeat(zeros), digits)
        }
    } else {
        let frac = &digits[1..];
        if frac.is_empty() {
            format!("{}{}e{}", sign, &digits[..1], exp)
        } else {
            format!("{}{}.{}e{}", sign, &digits[..1], frac, exp)
        }
    }
}

/// JSON number carrying the 12-significant-digit rounding.
fn num(x: f64) -> Value {
    let rounded: f64 = fmt_sig(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(rounded)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn parse_matrix(text: &str) -> Result<StructMatrix, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 entries, got {}", parts.len()));
    }
    let mut vals = Vec::with_capacity(4);
    for p in &parts {
        vals.push(Scalar::parse(p).map_err(|e| format!("entry `{}`: {}", p, e))?);
    }
    Ok(StructMatrix::new(
        vals[0].clone(),
        vals[1].clone(),
        vals[2].clone(),
        vals[3].clone(),
    ))
}

fn matrix_json(m: &StructMatrix) -> Value {
    json!([
        [num(m.a11.to_f64()), num(m.a12.to_f64())],
        [num(m.a21.to_f64()), num(m.a22.to_f64())]
    ])
}

fn witness_json(w: &BasisChange) -> Value {
    json!([
        [num(w.t11.to_f64()), num(w.t12.to_f64())],
        [num(w.t21.to_f64()), num(w.t22.to_f64())]
    ])
}

fn class_json(c: &CanonicalClass) -> (Value, Value) {
    let params: Vec<Value> = c.params().iter().map(|p| num(p.to_f64())).collect();
    (json!(c.tag()), Value::Array(params))
}

fn print_report(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap());
}

fn run(cli: Cli) -> Result<u8, String> {
    let tol = Tol::new(cli.tol);
    match &cli.command {
        Command::Classify { matrix } => {
            let m = parse_matrix(matrix)?;
            let rec = classify(&m, &tol);
            let (class, params) = class_json(&rec.class);
            print_report(&json!({
                "command": "classify",
                "config": { "tol": num(cli.tol) },
                "input": matrix_json(&m),
                "class": class,
                "params": params,
                "witness": witness_json(&rec.witness),
                "verified": rec.verified,
                "ambiguous": rec.ambiguous,
            }));
            Ok(if rec.ambiguous { 2 } else { 0 })
        }
        Command::Iso { left, right } => {
            let l = parse_matrix(left)?;
            let r = parse_matrix(right)?;
            let res = iso(&l, &r, &tol).map_err(|e| e.to_string())?;
            print_report(&json!({
                "command": "iso",
                "config": { "tol": num(cli.tol) },
                "left": matrix_json(&l),
                "right": matrix_json(&r),
                "isomorphic": res.isomorphic,
                "witness": res.witness.as_ref().map(witness_json).unwrap_or(Value::Null),
                "method": match res.method {
                    IsoMethod::Analytic => "analytic",
                    IsoMethod::Numeric => "numeric",
                },
            }));
            Ok(0)
        }
        Command::Cea { sub } => run_cea(sub, &tol, cli.tol),
        Command::Trace {
            family,
            s,
            t0,
            t1,
            step,
            format,
            out,
        } => {
            let fam = family.build()?;
            let grid = TraceGrid {
                s: *s,
                t0: *t0,
                t1: *t1,
                step: *step,
            };
            let records = trace(&fam, &grid, &tol).map_err(|e| e.to_string())?;
            let body = match format.as_str() {
                "csv" => {
                    let mut lines =
                        vec!["s,t,class,param1,param2,expected_class,agrees,boundary".to_string()];
                    for r in &records {
                        let params = r.class.params();
                        let p1 = params.first().map(|p| fmt_sig(p.to_f64())).unwrap_or_default();
                        let p2 = params.get(1).map(|p| fmt_sig(p.to_f64())).unwrap_or_default();
                        lines.push(format!(
                            "{},{},{},{},{},{},{},{}",
                            fmt_sig(r.s),
                            fmt_sig(r.t),
                            r.class.tag(),
                            p1,
                            p2,
                            r.expected.as_ref().map(|e| e.tag()).unwrap_or(""),
                            r.agrees.map(|a| a.to_string()).unwrap_or_default(),
                            r.boundary,
                        ));
                    }
                    lines.join("\n") + "\n"
                }
                "json" => {
                    let rows: Vec<Value> = records
                        .iter()
                        .map(|r| {
                            let (class, params) = class_json(&r.class);
                            json!({
                                "s": num(r.s),
                                "t": num(r.t),
                                "class": class,
                                "params": params,
                                "expected_class": r.expected.as_ref()
                                    .map(|e| json!(e.tag())).unwrap_or(Value::Null),
                                "agrees": r.agrees.map(Value::Bool).unwrap_or(Value::Null),
                                "boundary": r.boundary,
                                "ambiguous": r.ambiguous,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&json!({
                        "command": "trace",
                        "config": {
                            "tol": num(cli.tol),
                            "family": family.echo(),
                            "s": num(*s), "t0": num(*t0), "t1": num(*t1), "step": num(*step),
                        },
                        "records": rows,
                    }))
                    .unwrap()
                        + "\n"
                }
                other => return Err(format!("unknown format `{}`", other)),
            };
            match out {
                Some(path) => fs::write(path, body).map_err(|e| e.to_string())?,
                None => print!("{}", body),
            }
            Ok(0)
        }
    }
}

fn run_cea(sub: &CeaCommand, tol: &Tol, tol_rel: f64) -> Result<u8, String> {
    let printed_note = |f: &FamilyArgs| -> Value {
        if f.printed_form {
            json!("printed-variant form under test; see DISCREPANCIES.md")
        } else {
            Value::Null
        }
    };
    match sub {
        CeaCommand::Check {
            family,
            samples,
            window,
        } => {
            let fam = family.build()?;
            let triples = halton_triples(*samples, 0.0, *window);
            let rep = ck_check(&fam, &triples, tol).map_err(|e| e.to_string())?;
            print_report(&json!({
                "command": "cea check",
                "config": {
                    "tol": num(tol_rel),
                    "family": family.echo(),
                    "samples": samples,
                    "window": num(*window),
                },
                "max_residual": num(rep.max_residual),
                "pass": rep.pass,
                "note": printed_note(family),
            }));
            Ok(0)
        }
        CeaCommand::Homogeneity {
            family,
            samples,
            window,
        } => {
            let fam = family.build()?;
            let pts = halton_shift_samples(*samples, *window);
            let rep = homogeneity_check(&fam, &pts, tol).map_err(|e| e.to_string())?;
            print_report(&json!({
                "command": "cea homogeneity",
                "config": {
                    "tol": num(tol_rel),
                    "family": family.echo(),
                    "samples": samples,
                    "window": num(*window),
                },
                "max_residual": num(rep.max_residual),
                "pass": rep.pass,
                "note": printed_note(family),
            }));
            Ok(0)
        }
        CeaCommand::Period { family, var, max } => {
            let fam = family.build()?;
            let v = match var.as_str() {
                "s" => TimeVar::S,
                "t" => TimeVar::T,
                other => return Err(format!("unknown variable `{}`", other)),
            };
            let res = periodicity_scan(&fam, v, *max, tol).map_err(|e| e.to_string())?;
            print_report(&json!({
                "command": "cea period",
                "config": {
                    "tol": num(tol_rel),
                    "family": family.echo(),
                    "var": var,
                    "max": num(*max),
                },
                "period": res.as_ref().map(|p| num(p.period)).unwrap_or(Value::Null),
                "degenerate": res.as_ref().map(|p| json!(p.degenerate)).unwrap_or(Value::Null),
                "periodic": res.is_some(),
                "note": printed_note(family),
            }));
            Ok(0)
        }
    }
}

/// Long flags accepted in a config file; unknown keys are rejected.
const CONFIG_KEYS: &[&str] = &[
    "tol", "matrix", "left", "right", "family", "lambda", "mu", "printed-form", "phi", "psi",
    "entries", "samples", "window", "var", "max", "s", "t0", "t1", "step", "format", "out",
];

/// Applies `key = value` lines from the config file as trailing arguments,
/// skipping keys already present on the command line.
fn merge_config(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let pos = match args.iter().position(|a| a == "--config") {
        Some(p) => p,
        None => return Ok(args),
    };
    let path = args
        .get(pos + 1)
        .cloned()
        .ok_or("--config requires a path")?;
    let text = fs::read_to_string(&path).map_err(|e| format!("config {}: {}", path, e))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key `{}`", lineno + 1, key));
        }
        let flag = format!("--{}", key);
        if args.iter().any(|a| *a == flag || a.starts_with(&format!("{}=", flag))) {
            continue;
        }
        if key == "printed-form" {
            match value {
                "true" => args.push(flag),
                "false" => {}
                other => {
                    return Err(format!(
                        "config line {}: printed-form must be true or false, got `{}`",
                        lineno + 1,
                        other
                    ))
                }
            }
        } else {
            args.push(flag);
            args.push(value.to_string());
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {}", msg);
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version itself with code 0
            return match e.print() {
                _ if e.use_stderr() => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}
