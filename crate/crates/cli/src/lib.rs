//! The `mzv` command line: argument parsing, dispatch and output formatting.
//!
//! Exit codes: 0 success or identity holds, 1 identity fails (or fixture/method
//! mismatch, or nothing reconstructed), 2 usage or side-condition error,
//! 3 insufficient precision.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use multizeta::carlitz::{omega, omega_at_t, CarlitzCache};
use multizeta::motive::period_matrix;
use multizeta::mzv::{Composition, JumpSet, LinearPreorder, MultiZeta};
use multizeta::powersums::{Method, PowerSums};
use multizeta::reconstruct::{rational_reconstruct, rational_reconstruct_auto};
use multizeta::relations::{
    find_relations, verify_catalog, verify_shuffle_product, verify_sum_shuffle, CatalogParams,
    IdentityInstance, Outcome,
};
use multizeta::{make_field_context, Error, Field, TildeSeries};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "mzv", version, about = "Multizeta values over F_q[t]")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Characteristic.
    #[arg(long)]
    p: u64,
    /// Extension degree, q = p^m.
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Absolute precision in scaled u-exponents.
    #[arg(long, default_value_t = 200)]
    prec: i64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ζ(s), ζ_I(s) with --jumps, or ζ_ρ(s) with --blocks.
    Zeta {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        s: String,
        #[arg(long, conflicts_with = "jumps")]
        blocks: Option<String>,
        #[arg(long)]
        jumps: Option<String>,
        #[arg(long, default_value = "auto")]
        method: String,
        /// Compare with (or create) a golden file in the JSON series format.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// S_d(s); `--method a,b` cross-checks two methods.
    PowerSum {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        s: u64,
        #[arg(long, default_value = "auto")]
        method: String,
        /// Delay for `--method delayed`.
        #[arg(long)]
        w: Option<u32>,
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Anderson-Thakur polynomial H_s.
    Hpoly {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        json: bool,
    },
    /// Ω(T) to `--terms` T-coefficients, and Ω(t) = 1/π̃.
    Omega {
        #[command(flatten)]
        c: Common,
        #[arg(long, default_value_t = 12)]
        terms: usize,
    },
    /// Normalized period matrices with their Z-expressions.
    PeriodMatrix {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        s: String,
    },
    /// Checks a catalog identity, a sum shuffle or a product shuffle.
    Verify {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        id: String,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        blocks: Option<String>,
        /// Second factor for `shuffle-product`.
        #[arg(long)]
        s1: Option<String>,
        #[arg(long)]
        blocks1: Option<String>,
        #[arg(long)]
        jumps: Option<String>,
        #[arg(long)]
        b: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        d: Option<u32>,
        /// Grid size for `sum-shuffle` without `--s`: largest part.
        #[arg(long, default_value_t = 3)]
        max_part: u64,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// F_p-linear relations among weight-graded monomials.
    FindRelations {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        weight: u64,
        #[arg(long, default_value_t = 2)]
        max_depth: usize,
    },
    /// Recognizes ζ(s)/π̃^weight, or a series read from --fixture, as an element of F_q(t).
    Reconstruct {
        #[command(flatten)]
        c: Common,
        #[arg(long, conflicts_with = "fixture")]
        s: Option<String>,
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        num_deg: Option<usize>,
        #[arg(long)]
        den_deg: Option<usize>,
    },
}

/// A failure carrying its exit code.
struct Exit(i32, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InsufficientPrecision(_) | Error::NonConvergent(_) | Error::LatticeCap { .. } => 3,
            _ => 2,
        };
        Exit(code, e.to_string())
    }
}

type Res = std::result::Result<i32, Exit>;

fn field(c: &Common) -> std::result::Result<Field, Exit> {
    Ok(make_field_context(c.p, c.m)?)
}

fn usage(msg: impl Into<String>) -> Exit {
    Exit(2, msg.into())
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn series_value(x: &TildeSeries) -> Value {
    serde_json::to_value(x.to_json()).expect("series serialize")
}

const SHOWN_TERMS: usize = 12;

fn print_series(out: &mut dyn Write, label: &str, x: &TildeSeries, json: bool) -> std::io::Result<()> {
    if json {
        write!(out, "{}", json_text(&series_value(x)))
    } else {
        writeln!(out, "{label} = {}", x.display(SHOWN_TERMS))
    }
}

/// Compares `x` with a golden file, writing the file when it does not exist yet.
fn check_fixture(out: &mut dyn Write, path: &PathBuf, x: &TildeSeries) -> Res {
    let text = json_text(&series_value(x));
    match std::fs::read_to_string(path) {
        Ok(stored) => {
            if stored == text {
                writeln!(out, "fixture {} matches", path.display()).ok();
                Ok(0)
            } else {
                let old = TildeSeries::from_json_str(&stored)?;
                let at = old
                    .first_difference(x)
                    .map_or("formatting".to_string(), |e| format!("u-exponent {e}"));
                writeln!(out, "fixture {} differs at {at}", path.display()).ok();
                Ok(1)
            }
        }
        Err(_) => {
            std::fs::write(path, text).map_err(|e| usage(format!("cannot write fixture: {e}")))?;
            writeln!(out, "fixture {} written", path.display()).ok();
            Ok(0)
        }
    }
}

fn parse_methods(text: &str, w: Option<u32>) -> std::result::Result<Vec<Method>, Exit> {
    text.split(',')
        .map(|m| {
            let m = m.trim();
            if m == "delayed" {
                let w = w.ok_or_else(|| usage("--method delayed needs --w"))?;
                Ok(Method::Delayed(w))
            } else {
                Ok(m.parse::<Method>()?)
            }
        })
        .collect()
}

fn cmd_zeta(
    out: &mut dyn Write,
    c: &Common,
    s: &str,
    blocks: Option<&str>,
    jumps: Option<&str>,
    method: &str,
    fixture: Option<&PathBuf>,
) -> Res {
    let f = field(c)?;
    let s = Composition::parse(s)?;
    let methods = parse_methods(method, None)?;
    if methods.len() > 2 {
        return Err(usage("at most two methods"));
    }
    let eval = |m: Method| -> std::result::Result<(String, TildeSeries), Exit> {
        let mut mz = MultiZeta::with_method(&f, m);
        Ok(match (blocks, jumps) {
            (Some(b), _) => {
                let rho = LinearPreorder::parse(b)?;
                (format!("ζ_[{rho}]{s}"), mz.zeta_rho(&s, &rho, c.prec)?)
            }
            (None, Some(j)) => {
                let jumps = JumpSet::parse(s.depth(), j)?;
                (format!("ζ_I{s}"), mz.zeta_i(&s, &jumps, c.prec)?)
            }
            (None, None) => (format!("ζ{s}"), mz.zeta(&s, c.prec)?),
        })
    };
    let (label, x) = eval(methods[0])?;
    if let Some(&other) = methods.get(1) {
        let (_, y) = eval(other)?;
        if let Some(e) = x.first_difference(&y) {
            writeln!(out, "methods disagree at u-exponent {e}").ok();
            return Ok(1);
        }
    }
    print_series(out, &label, &x, c.json).ok();
    match fixture {
        Some(p) => check_fixture(out, p, &x),
        None => Ok(0),
    }
}

fn cmd_power_sum(
    out: &mut dyn Write,
    c: &Common,
    d: u32,
    s: u64,
    method: &str,
    w: Option<u32>,
    fixture: Option<&PathBuf>,
) -> Res {
    let f = field(c)?;
    let methods = parse_methods(method, w)?;
    if methods.len() > 2 {
        return Err(usage("at most two methods"));
    }
    let mut ps = PowerSums::new(&f);
    let x = ps.power_sum(d, s, c.prec, methods[0])?;
    if let Some(&other) = methods.get(1) {
        let y = ps.power_sum(d, s, c.prec, other)?;
        if let Some(e) = x.first_difference(&y) {
            writeln!(out, "methods disagree at u-exponent {e}").ok();
            return Ok(1);
        }
    }
    print_series(out, &format!("S_{d}({s})"), &x, c.json).ok();
    match fixture {
        Some(p) => check_fixture(out, p, &x),
        None => Ok(0),
    }
}

fn cmd_hpoly(out: &mut dyn Write, p: u64, m: u32, s: usize, as_json: bool) -> Res {
    let f = make_field_context(p, m)?;
    let h = CarlitzCache::new(&f).h(s)?;
    if as_json {
        let v = json!({"p": f.p(), "m": f.m(), "q": f.q(), "s": s, "coefficients": h.to_nested()});
        write!(out, "{}", json_text(&v)).ok();
    } else {
        writeln!(out, "H_{s} = {}", h.display()).ok();
    }
    Ok(0)
}

fn cmd_omega(out: &mut dyn Write, c: &Common, terms: usize) -> Res {
    let f = field(c)?;
    if terms == 0 {
        return Err(usage("--terms must be positive"));
    }
    let om = omega(&f, terms, c.prec);
    let at_t = omega_at_t(&f, c.prec);
    if c.json {
        let v = json!({
            "coefficients": om.coeffs().iter().map(series_value).collect::<Vec<_>>(),
            "atT": series_value(&at_t),
        });
        write!(out, "{}", json_text(&v)).ok();
    } else {
        for (j, x) in om.coeffs().iter().enumerate() {
            writeln!(out, "T^{j}: {}", x.display(SHOWN_TERMS)).ok();
        }
        writeln!(out, "Ω(t) = {}", at_t.display(SHOWN_TERMS)).ok();
    }
    Ok(0)
}

fn cmd_period_matrix(out: &mut dyn Write, c: &Common, s: &str) -> Res {
    let f = field(c)?;
    let s = Composition::parse(s)?;
    let pm = period_matrix(&f, &s, c.prec)?;
    let ok = pm.psi_matches_z && pm.p_matches_expr && pm.first_column_recursion;
    if c.json {
        let matrix = |m: &Vec<Vec<TildeSeries>>| -> Value {
            Value::Array(m.iter().map(|row| Value::Array(row.iter().map(series_value).collect())).collect())
        };
        let exprs = |m: &Vec<Vec<multizeta::motive::ZExpr>>| -> Value {
            json!(m.iter().map(|row| row.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
        };
        let entries: Vec<Value> = pm
            .p_expr
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().map(move |(j, e)| {
                    json!({"row": i + 1, "col": j + 1, "zExpression": e.to_string()})
                })
            })
            .collect();
        let v = json!({
            "s": s.s,
            "precision": pm.precision,
            "psiAtT": matrix(&pm.psi_at_t),
            "psiPrime": matrix(&pm.psi_prime),
            "psiPrimeExpressions": exprs(&pm.psi_expr),
            "pPrime": matrix(&pm.p_prime),
            "pPrimeExpressions": exprs(&pm.p_expr),
            "normalizedEntries": entries,
            "checks": {
                "psiMatchesZ": pm.psi_matches_z,
                "pMatchesExpression": pm.p_matches_expr,
                "firstColumnRecursion": pm.first_column_recursion,
            },
        });
        write!(out, "{}", json_text(&v)).ok();
    } else {
        let r = s.depth();
        writeln!(out, "s = {s}, rank {}, N = {}", r + 1, pm.precision).ok();
        for i in 0..=r {
            for j in 0..i {
                writeln!(out, "p'[{}][{}] = {}", i + 1, j + 1, pm.p_expr[i][j]).ok();
            }
        }
        writeln!(
            out,
            "ψ' matches Z: {}; p' matches expression: {}; first-column recursion: {}",
            pm.psi_matches_z, pm.p_matches_expr, pm.first_column_recursion
        )
        .ok();
    }
    Ok(if ok { 0 } else { 1 })
}

fn report(out: &mut dyn Write, insts: &[IdentityInstance], as_json: bool) -> Res {
    let worst = insts
        .iter()
        .map(|i| i.outcome())
        .max_by_key(|o| match o {
            Outcome::Holds => 0,
            Outcome::Inconclusive => 1,
            Outcome::Fails => 2,
        })
        .unwrap_or(Outcome::Holds);
    if as_json {
        let v = json!(insts
            .iter()
            .map(|i| {
                let mut v = serde_json::to_value(i).expect("instance serializes");
                v["outcome"] = json!(i.outcome());
                v
            })
            .collect::<Vec<_>>());
        write!(out, "{}", json_text(&v)).ok();
    } else {
        for i in insts {
            writeln!(out, "{}", i.summary()).ok();
        }
    }
    Ok(worst.exit_code())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    out: &mut dyn Write,
    c: &Common,
    id: &str,
    s: Option<&str>,
    blocks: Option<&str>,
    s1: Option<&str>,
    blocks1: Option<&str>,
    jumps: Option<&str>,
    b: Option<u64>,
    k: Option<u64>,
    d: Option<u32>,
    max_part: u64,
    max_depth: usize,
    jobs: Option<usize>,
) -> Res {
    let f = field(c)?;
    let s = s.map(Composition::parse).transpose()?;
    match id {
        "sum-shuffle" => {
            let list: Vec<Composition> = match s {
                Some(s) => vec![s],
                None => grid(max_part, max_depth),
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| usage(e.to_string()))?;
            let results: Vec<multizeta::Result<IdentityInstance>> =
                pool.install(|| list.par_iter().map(|s| verify_sum_shuffle(&f, s, c.prec)).collect());
            let insts = results.into_iter().collect::<multizeta::Result<Vec<_>>>()?;
            report(out, &insts, c.json)
        }
        "shuffle-product" => {
            let s0 = s.ok_or_else(|| usage("shuffle-product needs --s and --s1"))?;
            let s1 = Composition::parse(s1.ok_or_else(|| usage("shuffle-product needs --s1"))?)?;
            let rho = |text: Option<&str>, r: usize| -> std::result::Result<LinearPreorder, Exit> {
                match text {
                    Some(t) => Ok(LinearPreorder::parse(t)?),
                    None => Ok(LinearPreorder::new((1..=r).rev().map(|i| vec![i]).collect())?),
                }
            };
            let r0 = rho(blocks, s0.depth())?;
            let r1 = rho(blocks1, s1.depth())?;
            let inst = verify_shuffle_product(&f, &s0, &r0, &s1, &r1, c.prec)?;
            report(out, &[inst], c.json)
        }
        _ => {
            let jumps = match (jumps, &s) {
                (Some(j), Some(s)) => Some(JumpSet::parse(s.depth(), j)?),
                (Some(_), None) => return Err(usage("--jumps needs --s")),
                _ => None,
            };
            let params = CatalogParams {
                s,
                jumps,
                b,
                k,
                d_max: d,
                ..Default::default()
            };
            let inst = verify_catalog(&f, id, &params, c.prec)?;
            report(out, &[inst], c.json)
        }
    }
}

fn grid(max_part: u64, max_depth: usize) -> Vec<Composition> {
    let mut out = Vec::new();
    for r in 2..=max_depth {
        let mut cur = vec![Vec::new()];
        for _ in 0..r {
            cur = cur
                .into_iter()
                .flat_map(|v: Vec<u64>| {
                    (1..=max_part).map(move |x| {
                        let mut v = v.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out.extend(cur.into_iter().map(|v| Composition { s: v }));
    }
    out
}

fn cmd_find_relations(out: &mut dyn Write, c: &Common, weight: u64, max_depth: usize) -> Res {
    let f = field(c)?;
    let rep = find_relations(&f, weight, max_depth, c.prec)?;
    if c.json {
        write!(out, "{}", json_text(&rep.to_json())).ok();
    } else {
        writeln!(
            out,
            "q={} weight {} depth ≤ {}: {} monomials, {} relations (verified at {}, {} discarded)",
            rep.q,
            rep.weight,
            rep.max_depth,
            rep.basis.len(),
            rep.relations.len(),
            rep.verified_at,
            rep.discarded
        )
        .ok();
        for rel in &rep.relations {
            writeln!(out, "  {} = 0", rep.describe(rel)).ok();
        }
    }
    Ok(0)
}

fn cmd_reconstruct(
    out: &mut dyn Write,
    c: &Common,
    s: Option<&str>,
    fixture: Option<&PathBuf>,
    num_deg: Option<usize>,
    den_deg: Option<usize>,
) -> Res {
    let x = match (s, fixture) {
        (Some(s), _) => {
            let f = field(c)?;
            let s = Composition::parse(s)?;
            let q = f.q() as i64;
            let w = s.weight();
            let top = c.prec + q * w as i64;
            let z = MultiZeta::new(&f).zeta(&s, c.prec)?;
            z.mul(&omega_at_t(&f, top).pow(w)).truncate(top)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            TildeSeries::from_json_str(&text)?
        }
        (None, None) => return Err(usage("reconstruct needs --s or --fixture")),
    };
    let r = match (num_deg, den_deg) {
        (Some(a), Some(b)) => rational_reconstruct(&x, a, b)?,
        (None, None) => rational_reconstruct_auto(&x)?,
        _ => return Err(usage("give both --num-deg and --den-deg, or neither")),
    };
    match r {
        Some(r) => {
            if c.json {
                let f = r.field();
                let coords = |p: &multizeta::PolyT| -> Value {
                    json!(p.coeffs().iter().map(|&a| f.coords(a)).collect::<Vec<_>>())
                };
                write!(out, "{}", json_text(&json!({"num": coords(r.num()), "den": coords(r.den())}))).ok();
            } else {
                writeln!(out, "{r}").ok();
            }
            Ok(0)
        }
        None => {
            writeln!(out, "not found").ok();
            Ok(1)
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Res {
    match cli.cmd {
        Command::Zeta { c, s, blocks, jumps, method, fixture } => {
            cmd_zeta(out, &c, &s, blocks.as_deref(), jumps.as_deref(), &method, fixture.as_ref())
        }
        Command::PowerSum { c, d, s, method, w, fixture } => {
            cmd_power_sum(out, &c, d, s, &method, w, fixture.as_ref())
        }
        Command::Hpoly { p, m, s, json } => cmd_hpoly(out, p, m, s, json),
        Command::Omega { c, terms } => cmd_omega(out, &c, terms),
        Command::PeriodMatrix { c, s } => cmd_period_matrix(out, &c, &s),
        Command::Verify { c, id, s, blocks, s1, blocks1, jumps, b, k, d, max_part, max_depth, jobs } => cmd_verify(
            out,
            &c,
            &id,
            s.as_deref(),
            blocks.as_deref(),
            s1.as_deref(),
            blocks1.as_deref(),
            jumps.as_deref(),
            b,
            k,
            d,
            max_part,
            max_depth,
            jobs,
        ),
        Command::FindRelations { c, weight, max_depth } => cmd_find_relations(out, &c, weight, max_depth),
        Command::Reconstruct { c, s, fixture, num_deg, den_deg } => {
            cmd_reconstruct(out, &c, s.as_deref(), fixture.as_ref(), num_deg, den_deg)
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                write!(out, "{e}").ok();
            } else {
                write!(err, "{e}").ok();
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            writeln!(err, "error: {msg}").ok();
            code
        }
    }
}
