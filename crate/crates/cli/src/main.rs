//! Batch driver: every subsystem of the library behind one binary, plus a
//! one-shot verification harness.
//!
//! Exit codes: 0 success / all checks pass, 1 verification failure, 2 usage
//! or I/O error.

mod verify;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use locham_core::asymptotics::{
    branch_integral_limit, decompose_profile, profile_derivative_limit,
};
use locham_core::distributions as dist;
use locham_core::iet::IetSpec;
use locham_core::sector::{branch_power_integral, return_profile_estimate};
use locham_core::{ComplexJet, QuadSpec, Rational64, SaddleModel, SingPolicy};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "locham",
    version,
    about = "saddle-local numerics for locally Hamiltonian flows"
)]
struct Cli {
    /// Plain `key = value` config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    output: Option<String>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Beta-like constant at rational or decimal arguments.
    /// Keys: x, y.
    Beta {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
    },
    /// Evaluate invariant distributions on a jet.
    /// Keys: m, k, jet, f, which, j, l, vjet, epsilon.
    Dist {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        /// jet literal file
        #[arg(long)]
        jet: Option<String>,
        /// inline observable: `const`, `w`, `wbar`, or `mono:i,j`
        #[arg(long)]
        f: Option<String>,
        /// partial | scriptC | scriptCdirect | frakD | frakC
        #[arg(long)]
        which: Option<String>,
        /// derivative slot for the partial family
        #[arg(long)]
        j: Option<u32>,
        /// sector index or range `a..b` for the sector family
        #[arg(long)]
        l: Option<String>,
        /// density jet literal file (frakD / frakC)
        #[arg(long)]
        vjet: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Evaluate the sector power integral.
    /// Keys: m, l, a1, a2, u, s, policy, abs-tol, rel-tol.
    Gfun {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        a1: Option<i32>,
        #[arg(long)]
        a2: Option<i32>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        /// graded | sinh
        #[arg(long)]
        policy: Option<String>,
        #[arg(long = "abs-tol")]
        abs_tol: Option<f64>,
        #[arg(long = "rel-tol")]
        rel_tol: Option<f64>,
    },
    /// Sweep the return profile over a grid of heights.
    /// Keys: m, l, jet, f, s-grid.
    Phi {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        jet: Option<String>,
        #[arg(long)]
        f: Option<String>,
        /// `2^-6..2^-18` (dyadic) or a comma list `0.5,-0.1,0.01`
        #[arg(long = "s-grid")]
        s_grid: Option<String>,
    },
    /// Extrapolated asymptotic limits.
    /// Keys: check (g0pm | thmC), m, l, parity, k, a1, a2, jet, f, tol.
    Limits {
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        parity: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        a1: Option<i32>,
        #[arg(long)]
        a2: Option<i32>,
        #[arg(long)]
        jet: Option<String>,
        #[arg(long)]
        f: Option<String>,
        /// pass tolerance for the JSON report
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fit the singular series of the return profile.
    /// Keys: m, l, parity, k, jet, f.
    Decompose {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        parity: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        jet: Option<String>,
        #[arg(long)]
        f: Option<String>,
    },
    /// Interval exchange transformations: orbit checks and evaluation.
    /// Keys: spec, check (keane), depth, apply.
    Iet {
        /// IET spec file
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
        /// evaluate the exchange at a point
        #[arg(long)]
        apply: Option<f64>,
    },
    /// Integrate the local flow through one sector.
    /// Keys: m, epsilon, l, s, jet, f, vjet, tol, orbit.
    Flow {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        jet: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        vjet: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// write the orbit as CSV `t, re z, im z`
        #[arg(long)]
        orbit: Option<String>,
    },
    /// Run a verification suite and emit a JSON summary.
    /// Keys: suite (beta | dist | limits | iet | flow | all).
    Verify {
        #[arg(long)]
        suite: Option<String>,
    },
}

/// A failure that should surface as exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Run<T> = Result<T, UsageError>;

/// Config file: plain `key = value` lines, `#` comments.
fn load_config(path: &Option<String>, known: &[&str]) -> Run<HashMap<String, String>> {
    let mut map = HashMap::new();
    let Some(path) = path else { return Ok(map) };
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}")))?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line is not `key = value`: {line}")))?;
        let key = key.trim().to_string();
        if !known.contains(&key.as_str()) {
            return Err(UsageError(format!(
                "unknown config key `{key}` (known: {})",
                known.join(", ")
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn merged<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &HashMap<String, String>,
    key: &str,
) -> Run<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| UsageError(format!("config key `{key}`: {e}"))),
        None => Ok(None),
    }
}

fn require<T>(v: Option<T>, key: &str) -> Run<T> {
    v.ok_or_else(|| UsageError(format!("missing required key `{key}` (flag or config)")))
}

/// Parse `p/q` or a decimal into a rational when possible.
fn parse_rat(text: &str) -> Run<Rational64> {
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|e| UsageError(format!("{text}: {e}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|e| UsageError(format!("{text}: {e}")))?;
        if q == 0 {
            return Err(UsageError(format!("{text}: zero denominator")));
        }
        return Ok(Rational64::new(p, q));
    }
    let v: f64 = text
        .parse()
        .map_err(|e| UsageError(format!("{text}: {e}")))?;
    // accept decimals that are exactly small rationals
    for den in 1..=64i64 {
        let num = (v * den as f64).round();
        if (v * den as f64 - num).abs() < 1e-12 && num.abs() < 1e15 {
            return Ok(Rational64::new(num as i64, den));
        }
    }
    Err(UsageError(format!(
        "{text}: not representable as a small rational"
    )))
}

/// Inline observables for `--f`.
fn parse_observable(text: &str) -> Run<ComplexJet> {
    match text {
        "const" | "1" => Ok(ComplexJet::constant(Complex64::new(1.0, 0.0), 4)),
        "w" => Ok(ComplexJet::monomial(1, 0).extend_to(4)),
        "wbar" => Ok(ComplexJet::monomial(0, 1).extend_to(4)),
        other => {
            if let Some(rest) = other.strip_prefix("mono:") {
                let (i, j) = rest
                    .split_once(',')
                    .ok_or_else(|| UsageError(format!("expected mono:i,j, got {other}")))?;
                let i: usize = i.parse().map_err(|e| UsageError(format!("{other}: {e}")))?;
                let j: usize = j.parse().map_err(|e| UsageError(format!("{other}: {e}")))?;
                Ok(ComplexJet::monomial(i, j).extend_to((i + j).max(4)))
            } else {
                Err(UsageError(format!(
                    "unknown observable `{other}` (use const, w, wbar, mono:i,j or --jet FILE)"
                )))
            }
        }
    }
}

fn load_jet(jet: Option<String>, f: Option<String>) -> Run<ComplexJet> {
    match (jet, f) {
        (Some(path), _) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| UsageError(format!("{path}: {e}")))?;
            Ok(ComplexJet::parse_literal(&text)?)
        }
        (None, Some(expr)) => parse_observable(&expr),
        (None, None) => Err(UsageError("need --jet FILE or --f EXPR".into())),
    }
}

fn parse_sector_range(text: &str, max: u32) -> Run<Vec<u32>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.parse().map_err(|e| UsageError(format!("{text}: {e}")))?;
        let b: u32 = b.parse().map_err(|e| UsageError(format!("{text}: {e}")))?;
        if a > b || b >= max {
            return Err(UsageError(format!("range {text} outside 0..{max}")));
        }
        Ok((a..=b).collect())
    } else {
        let l: u32 = text
            .parse()
            .map_err(|e| UsageError(format!("{text}: {e}")))?;
        if l >= max {
            return Err(UsageError(format!("sector {l} outside 0..{max}")));
        }
        Ok(vec![l])
    }
}

fn parse_s_grid(text: &str) -> Run<Vec<f64>> {
    if let Some((a, b)) = text.split_once("..") {
        let parse_dyadic = |t: &str| -> Run<i32> {
            t.trim()
                .strip_prefix("2^")
                .ok_or_else(|| UsageError(format!("expected 2^-j in {text}")))?
                .parse::<i32>()
                .map_err(|e| UsageError(format!("{text}: {e}")))
        };
        let (lo, hi) = (parse_dyadic(a)?, parse_dyadic(b)?);
        let (lo, hi) = (lo.max(hi), lo.min(hi));
        return Ok((hi..=lo).rev().map(|j| 2f64.powi(j)).collect());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| UsageError(format!("{t}: {e}")))
        })
        .collect()
}

fn emit(cli_output: &Option<String>, body: &str) -> Run<()> {
    match cli_output {
        Some(path) => std::fs::write(path, body).map_err(|e| UsageError(format!("{path}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn csv_header(command: &str) -> String {
    format!("# locham {VERSION} {command}\n")
}

fn json_wrap(command: &str, mut value: serde_json::Value) -> String {
    if let Some(map) = value.as_object_mut() {
        map.insert("version".into(), serde_json::json!(VERSION));
        map.insert("command".into(), serde_json::json!(command));
    }
    format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
}

fn complex_json(v: Complex64) -> serde_json::Value {
    serde_json::json!([v.re, v.im])
}

fn run(cli: Cli) -> Run<bool> {
    let out = cli.output.clone();
    let format = cli.format;
    match cli.command {
        Command::Beta { x, y } => {
            let cfg = load_config(&cli.config, &["x", "y"])?;
            let x = parse_rat(&require(merged(x, &cfg, "x")?, "x")?)?;
            let y = parse_rat(&require(merged(y, &cfg, "y")?, "y")?)?;
            let v = locham_core::special::beta_like_rat(x, y);
            let body = match format {
                Format::Csv => format!(
                    "{}x,y,re,im\n{x},{y},{:?},{:?}\n",
                    csv_header("beta"),
                    v.re,
                    v.im
                ),
                Format::Json => json_wrap(
                    "beta",
                    serde_json::json!({"x": x.to_string(), "y": y.to_string(), "value": complex_json(v)}),
                ),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Dist {
            m,
            k,
            jet,
            f,
            which,
            j,
            l,
            vjet,
            epsilon,
        } => {
            let cfg = load_config(
                &cli.config,
                &["m", "k", "jet", "f", "which", "j", "l", "vjet", "epsilon"],
            )?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let k = require(merged(k, &cfg, "k")?, "k")?;
            let which = require(merged(which, &cfg, "which")?, "which")?;
            let jet = load_jet(merged(jet, &cfg, "jet")?, merged(f, &cfg, "f")?)?;
            let jet = jet.extend_to(k as usize);
            let saddle = |vjet: Option<String>, epsilon: Option<f64>| -> Run<SaddleModel> {
                let v = match vjet {
                    Some(path) => {
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| UsageError(format!("{path}: {e}")))?;
                        ComplexJet::parse_literal(&text)?
                    }
                    None => ComplexJet::constant(Complex64::new(1.0, 0.0), k as usize),
                };
                Ok(SaddleModel::new(m, v, epsilon.unwrap_or(1.0))?)
            };
            let mut rows: Vec<(String, Complex64)> = Vec::new();
            match which.as_str() {
                "partial" => {
                    let j = require(merged(j, &cfg, "j")?, "j")?;
                    rows.push((
                        format!("partial[{k},{j}]"),
                        dist::partial_dist(&jet, m, k, j)?,
                    ));
                }
                "scriptC" | "scriptCdirect" => {
                    let ls = parse_sector_range(
                        &merged(l, &cfg, "l")?.unwrap_or_else(|| format!("0..{}", 2 * m - 1)),
                        2 * m,
                    )?;
                    for l in ls {
                        let v = if which == "scriptC" {
                            dist::sector_dist(&jet, m, k, l)?
                        } else {
                            dist::sector_dist_direct(&jet, m, k, l)?
                        };
                        rows.push((format!("sector[{k},{l}]"), v));
                    }
                }
                "frakD" => {
                    let j = require(merged(j, &cfg, "j")?, "j")?;
                    let sm = saddle(
                        merged(vjet, &cfg, "vjet")?,
                        merged(epsilon, &cfg, "epsilon")?,
                    )?;
                    rows.push((
                        format!("weighted-partial[{k},{j}]"),
                        dist::weighted_partial_dist(&jet, &sm, k, j)?,
                    ));
                }
                "frakC" => {
                    let ls = parse_sector_range(
                        &merged(l, &cfg, "l")?.unwrap_or_else(|| format!("0..{}", 2 * m - 1)),
                        2 * m,
                    )?;
                    let sm = saddle(
                        merged(vjet, &cfg, "vjet")?,
                        merged(epsilon, &cfg, "epsilon")?,
                    )?;
                    for l in ls {
                        rows.push((
                            format!("weighted-sector[{k},{l}]"),
                            dist::weighted_sector_dist(&jet, &sm, k, l)?,
                        ));
                    }
                }
                other => return Err(UsageError(format!("unknown family `{other}`"))),
            }
            let body = match format {
                Format::Csv => {
                    let mut s = csv_header("dist") + "index,re,im\n";
                    for (name, v) in &rows {
                        let _ = writeln!(s, "{name},{:?},{:?}", v.re, v.im);
                    }
                    s
                }
                Format::Json => json_wrap(
                    "dist",
                    serde_json::json!({
                        "values": rows.iter().map(|(n, v)| serde_json::json!({"index": n, "value": complex_json(*v)})).collect::<Vec<_>>(),
                    }),
                ),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Gfun {
            m,
            l,
            a1,
            a2,
            u,
            s,
            policy,
            abs_tol,
            rel_tol,
        } => {
            let cfg = load_config(
                &cli.config,
                &[
                    "m", "l", "a1", "a2", "u", "s", "policy", "abs-tol", "rel-tol",
                ],
            )?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let l = require(merged(l, &cfg, "l")?, "l")?;
            let a1 = require(merged(a1, &cfg, "a1")?, "a1")?;
            let a2 = require(merged(a2, &cfg, "a2")?, "a2")?;
            let u = require(merged(u, &cfg, "u")?, "u")?;
            let s = require(merged(s, &cfg, "s")?, "s")?;
            let mut spec = QuadSpec::default();
            if let Some(a) = merged(abs_tol, &cfg, "abs-tol")? {
                spec.abs_tol = a;
            }
            if let Some(r) = merged(rel_tol, &cfg, "rel-tol")? {
                spec.rel_tol = r;
            }
            match merged(policy, &cfg, "policy")?.as_deref() {
                Some("sinh") => spec.sing_policy = SingPolicy::SinhSubstitution,
                Some("graded") | None => {}
                Some(other) => return Err(UsageError(format!("unknown policy `{other}`"))),
            }
            let v = branch_power_integral(m, l, a1, a2, u, s, &spec)?;
            let body = match format {
                Format::Csv => format!(
                    "{}m,l,a1,a2,u,s,re,im\n{m},{l},{a1},{a2},{u:?},{s:?},{:?},{:?}\n",
                    csv_header("gfun"),
                    v.re,
                    v.im
                ),
                Format::Json => json_wrap("gfun", serde_json::json!({"value": complex_json(v)})),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Phi {
            m,
            l,
            jet,
            f,
            s_grid,
        } => {
            let cfg = load_config(&cli.config, &["m", "l", "jet", "f", "s-grid"])?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let l = require(merged(l, &cfg, "l")?, "l")?;
            let grid = parse_s_grid(&require(merged(s_grid, &cfg, "s-grid")?, "s-grid")?)?;
            let jet = load_jet(merged(jet, &cfg, "jet")?, merged(f, &cfg, "f")?)?;
            let spec = QuadSpec::default();
            let mut rows = Vec::new();
            for &s in &grid {
                let q = return_profile_estimate(&jet, m, l, s, &spec)?;
                rows.push((s, q.value, q.err));
            }
            let body = match format {
                Format::Csv => {
                    let mut out_s = csv_header("phi") + "s,re_phi,im_phi,est_err\n";
                    for (s, v, e) in &rows {
                        let _ = writeln!(out_s, "{s:?},{:?},{:?},{e:.3e}", v.re, v.im);
                    }
                    out_s
                }
                Format::Json => json_wrap(
                    "phi",
                    serde_json::json!({
                        "rows": rows.iter().map(|(s, v, e)| serde_json::json!({"s": s, "value": complex_json(*v), "est_err": e})).collect::<Vec<_>>(),
                    }),
                ),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Limits {
            check,
            m,
            l,
            parity,
            k,
            a1,
            a2,
            jet,
            f,
            tol,
        } => {
            let cfg = load_config(
                &cli.config,
                &[
                    "check", "m", "l", "parity", "k", "a1", "a2", "jet", "f", "tol",
                ],
            )?;
            let check = require(merged(check, &cfg, "check")?, "check")?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let spec = QuadSpec::deep();
            let body = match check.as_str() {
                "g0pm" => {
                    let l = merged(l, &cfg, "l")?.unwrap_or(0);
                    let a1 = require(merged(a1, &cfg, "a1")?, "a1")?;
                    let a2 = require(merged(a2, &cfg, "a2")?, "a2")?;
                    let tol = merged(tol, &cfg, "tol")?.unwrap_or(1e-3);
                    let rep = branch_integral_limit(m, l, a1, a2, &spec)?;
                    json_wrap(
                        "limits",
                        serde_json::json!({
                            "check": "g0pm",
                            "plus": rep.plus.to_json(tol),
                            "minus": rep.minus.to_json(tol),
                        }),
                    )
                }
                "thmC" => {
                    let l = merged(l, &cfg, "l")?.unwrap_or(0);
                    let parity = merged(parity, &cfg, "parity")?.unwrap_or(0);
                    let k = require(merged(k, &cfg, "k")?, "k")?;
                    let tol = merged(tol, &cfg, "tol")?.unwrap_or(1e-2);
                    let jet = load_jet(merged(jet, &cfg, "jet")?, merged(f, &cfg, "f")?)?
                        .extend_to(k as usize);
                    let rep = profile_derivative_limit(&jet, m, l, parity, k, &spec)?;
                    json_wrap(
                        "limits",
                        serde_json::json!({"check": "thmC", "report": rep.to_json(tol)}),
                    )
                }
                other => return Err(UsageError(format!("unknown check `{other}` (g0pm | thmC)"))),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Decompose {
            m,
            l,
            parity,
            k,
            jet,
            f,
        } => {
            let cfg = load_config(&cli.config, &["m", "l", "parity", "k", "jet", "f"])?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let l = merged(l, &cfg, "l")?.unwrap_or(0);
            let parity = merged(parity, &cfg, "parity")?.unwrap_or(0);
            let k = require(merged(k, &cfg, "k")?, "k")?;
            let jet =
                load_jet(merged(jet, &cfg, "jet")?, merged(f, &cfg, "f")?)?.extend_to(k as usize);
            let dec = decompose_profile(&jet, m, l, parity, k, &QuadSpec::deep())?;
            let body = match format {
                Format::Csv => {
                    let mut s = csv_header("decompose") + "degree,re,im\n";
                    for (j, v) in dec.coefficients.iter().enumerate() {
                        let _ = writeln!(s, "{j},{:?},{:?}", v.re, v.im);
                    }
                    let _ = writeln!(s, "# remainder_diag {:?}", dec.remainder_diag);
                    s
                }
                Format::Json => json_wrap(
                    "decompose",
                    serde_json::json!({
                        "coefficients": dec.coefficients.iter().map(|v| complex_json(*v)).collect::<Vec<_>>(),
                        "remainder_diag": dec.remainder_diag,
                        "window_diags": dec.window_diags,
                    }),
                ),
            };
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Iet {
            spec,
            check,
            depth,
            apply,
        } => {
            let cfg = load_config(&cli.config, &["spec", "check", "depth", "apply"])?;
            let path = require(merged(spec, &cfg, "spec")?, "spec")?;
            let text =
                std::fs::read_to_string(&path).map_err(|e| UsageError(format!("{path}: {e}")))?;
            let iet = IetSpec::parse(&text)?;
            let mut result = serde_json::Map::new();
            let mut pass = true;
            if let Some(x) = merged(apply, &cfg, "apply")? {
                let y = iet.apply(x)?;
                result.insert("apply".into(), serde_json::json!({"x": x, "Tx": y}));
            }
            match merged(check, &cfg, "check")?.as_deref() {
                Some("keane") => {
                    let depth = merged(depth, &cfg, "depth")?.unwrap_or(1000);
                    let ok = locham_core::iet::keane_check(&iet, depth);
                    pass &= ok;
                    result.insert(
                        "keane".into(),
                        serde_json::json!({"depth": depth, "pass": ok, "exact": iet.lambda_exact.is_some()}),
                    );
                }
                Some(other) => return Err(UsageError(format!("unknown check `{other}`"))),
                None => {}
            }
            let body = json_wrap("iet", serde_json::Value::Object(result));
            emit(&out, &body)?;
            Ok(pass)
        }
        Command::Flow {
            m,
            epsilon,
            l,
            s,
            jet,
            f,
            vjet,
            tol,
            orbit,
        } => {
            let cfg = load_config(
                &cli.config,
                &["m", "epsilon", "l", "s", "jet", "f", "vjet", "tol", "orbit"],
            )?;
            let m = require(merged(m, &cfg, "m")?, "m")?;
            let epsilon = merged(epsilon, &cfg, "epsilon")?.unwrap_or(1.0);
            let l = merged(l, &cfg, "l")?.unwrap_or(0);
            let s = require(merged(s, &cfg, "s")?, "s")?;
            let tol = merged(tol, &cfg, "tol")?.unwrap_or(1e-10);
            let fjet = load_jet(merged(jet, &cfg, "jet")?, merged(f, &cfg, "f")?)?;
            let v = match merged(vjet, &cfg, "vjet")? {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| UsageError(format!("{path}: {e}")))?;
                    ComplexJet::parse_literal(&text)?
                }
                None => ComplexJet::constant(Complex64::new(1.0, 0.0), fjet.order()),
            };
            let saddle = SaddleModel::new(m, v, epsilon)?;
            let orbit_path = merged(orbit, &cfg, "orbit")?;
            let tr = locham_core::flow::transit(&saddle, l, s, &fjet, tol, orbit_path.is_some())?;
            if let Some(path) = &orbit_path {
                let seg = tr.orbit.as_ref().ok_or_else(|| {
                    UsageError("orbit recording unavailable in the near-saddle chart regime".into())
                })?;
                std::fs::write(
                    path,
                    format!("{}{}", csv_header("flow-orbit"), seg.to_csv()),
                )
                .map_err(|e| UsageError(format!("{path}: {e}")))?;
            }
            let quad = locham_core::flow::transit_profile_value(
                &saddle,
                l,
                s,
                &fjet,
                &QuadSpec::default(),
            )?;
            let rel = (tr.integral - quad).norm() / quad.norm().max(1e-14);
            let body = json_wrap(
                "flow",
                serde_json::json!({
                    "tau": tr.tau,
                    "integral": complex_json(tr.integral),
                    "profile_value": complex_json(quad),
                    "identity_rel_err": rel,
                    "hamiltonian_drift": tr.hamiltonian_drift,
                    "entry": complex_json(tr.entry),
                    "exit": complex_json(tr.exit),
                }),
            );
            emit(&out, &body)?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let cfg = load_config(&cli.config, &["suite"])?;
            let suite = merged(suite, &cfg, "suite")?.unwrap_or_else(|| "all".to_string());
            let summary = verify::run_suite(&suite)?;
            let pass = summary.pass;
            emit(
                &out,
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&summary.to_json()).unwrap()
                ),
            )?;
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
