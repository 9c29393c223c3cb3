//! Command-line front end: computes gamma-factor tables, lists cuspidal
//! classes, tabulates Gauss sums, runs the verification suite, and times the
//! summation kernels. Output is JSON Lines (or CSV) with a leading metadata
//! line; identical configurations produce byte-identical output.

use clap::{Parser, Subcommand, ValueEnum};
use gammaq::cache::Cache;
use gammaq::cuspidal::Cuspidal;
use gammaq::ffchar::{el_key, find_delta, gauss_sum, regular_classes, AddChar, FieldTower, MultChar};
use gammaq::matgrp::Ctx;
use gammaq::scalar::C;
use gammaq::verify::{table_records, verify_mode_with, Mode};
use gammaq::Error;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rs,
    Asai,
    Ext,
    Bf,
    All,
}

impl ModeArg {
    fn expand(self) -> Vec<Mode> {
        match self {
            ModeArg::Rs => vec![Mode::Rs],
            ModeArg::Asai => vec![Mode::Asai],
            ModeArg::Ext => vec![Mode::Ext],
            ModeArg::Bf => vec![Mode::Bf],
            ModeArg::All => Mode::all().to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Parser)]
#[command(name = "gammaq", version, about = "Gamma factors of cuspidal representations of GL(n) over finite fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Characteristic of the base field F_q, q = p^k.
    #[arg(long, global = true, default_value_t = 2)]
    p: u64,

    /// Base-field exponent k in q = p^k.
    #[arg(long, global = true, default_value_t = 1)]
    k: u32,

    /// Rank n of GL_n.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,

    /// Gamma family.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,

    /// ψ twist: the additive character x ↦ ψ₀(g^j · x) with j this value.
    #[arg(long, global = true, default_value_t = 0)]
    twist: u64,

    /// Comparison tolerance; must lie in (0, 1e-3].
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Worker threads (0 = all available cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Persistent cache directory (overrides the GAMMAQ_CACHE_DIR variable).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,

    /// Enumeration budget as a power of two: at most 2^order elements are
    /// scanned per table.
    #[arg(long, global = true, default_value_t = 22)]
    budget_order: u32,

    /// Seed for the sampled portions of the verification suite.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Character-class exponent (gamma subcommand; default: first class).
    #[arg(long, global = true)]
    class: Option<u64>,

    /// Second class exponent for the tensor kind (default: same as --class).
    #[arg(long, global = true)]
    class2: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the cuspidal (regular) character classes for the case.
    Chars,
    /// Tabulate Gauss sums τ(χ, ψ) for every character of F_{q^n}.
    Gauss,
    /// Compute one gamma record for a chosen class (pair).
    Gamma,
    /// Compute gamma records for all classes of the chosen mode(s).
    Table,
    /// Run the invariant suite; nonzero exit on any failure.
    Verify,
    /// Time the summation kernels.
    Bench,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            match e {
                Error::Config(_) => 2,
                Error::Budget(_) => 3,
                Error::Numeric(_) => 1,
            }
        }
    });
}

fn run(cli: &Cli) -> Result<i32, Error> {
    if !(cli.tol > 0.0 && cli.tol <= 1e-3) {
        return Err(Error::Config(format!(
            "tolerance {} outside (0, 1e-3]",
            cli.tol
        )));
    }
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let (meta, rows, code) = match cli.cmd {
        Cmd::Chars => cmd_chars(cli)?,
        Cmd::Gauss => cmd_gauss(cli)?,
        Cmd::Gamma => cmd_gamma(cli)?,
        Cmd::Table => cmd_table(cli)?,
        Cmd::Verify => cmd_verify(cli)?,
        Cmd::Bench => cmd_bench(cli)?,
    };
    emit(cli, &meta, &rows)?;
    Ok(code)
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    cli.cache_dir
        .clone()
        .or_else(|| std::env::var_os("GAMMAQ_CACHE_DIR").map(PathBuf::from))
}

fn budget(cli: &Cli) -> u64 {
    1u64.checked_shl(cli.budget_order).unwrap_or(u64::MAX)
}

fn make_ctx(cli: &Cli, asai: bool) -> Result<Ctx, Error> {
    let t = FieldTower::build_with_budget(cli.p, cli.k, cli.n as u32, asai, budget(cli))?;
    let mut ctx = Ctx::with_budget(t, budget(cli));
    if let Some(dir) = cache_dir(cli) {
        ctx.attach_disk_cache(Cache::new(dir)?);
    }
    Ok(ctx)
}

fn psi_for(t: &FieldTower, twist: u64) -> Result<AddChar, Error> {
    AddChar::new(t, 1, t.from_local(1, twist), false)
}

fn metadata(cli: &Cli, command: &str, towers: Vec<Value>) -> Value {
    json!({
        "tool": "gammaq",
        "version": env!("CARGO_PKG_VERSION"),
        "schema": 1,
        "command": command,
        "p": cli.p,
        "k": cli.k,
        "n": cli.n,
        "mode": format!("{:?}", cli.mode).to_lowercase(),
        "twist": cli.twist,
        "tol": cli.tol,
        "threads": cli.threads,
        "seed": cli.seed,
        "budget_order": cli.budget_order,
        "towers": towers,
    })
}

fn tower_value(t: &FieldTower, delta: Option<u64>) -> Value {
    json!({
        "asai": t.asai,
        "q": t.q,
        "top_degree": t.top,
        "poly": t.poly,
        "delta": delta,
    })
}

fn classes_for(ctx: &Ctx, base: u32, n: usize) -> Result<Vec<Cuspidal>, Error> {
    let reps = regular_classes(&ctx.t, base, n as u32);
    if reps.is_empty() {
        return Err(Error::Config(format!(
            "no regular classes for n={n} over degree {base}"
        )));
    }
    reps.into_iter()
        .map(|a| Cuspidal::new(&ctx.t, n, base, a))
        .collect()
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

fn cmd_chars(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let asai = cli.mode == ModeArg::Asai;
    let base = if asai { 2 } else { 1 };
    let ctx = make_ctx(cli, asai)?;
    let t = &ctx.t;
    let rows = classes_for(&ctx, base, cli.n)?
        .iter()
        .map(|pi| {
            json!({
                "exponent": pi.alpha.exponent,
                "orbit": pi.orbit(t),
                "dim": pi.dim(t),
                "dual_exponent": pi.dual(t).alpha.exponent,
                "omega_trivial_on_f": pi.omega_trivial_on_f(t),
            })
        })
        .collect();
    let meta = metadata(cli, "chars", vec![tower_value(t, None)]);
    Ok((meta, rows, 0))
}

fn cmd_gauss(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let ctx = make_ctx(cli, false)?;
    let t = &ctx.t;
    let d = cli.n as u32;
    let psi = psi_for(t, cli.twist)?.at_degree(t, d);
    let rows = (0..t.unit_order(d))
        .map(|e| {
            let chi = MultChar::new(t, d, e).expect("exponent in range");
            let tau = gauss_sum(t, &chi, &psi);
            json!({"exponent": e, "re": tau.re, "im": tau.im, "abs": tau.norm()})
        })
        .collect();
    let meta = metadata(cli, "gauss", vec![tower_value(t, None)]);
    Ok((meta, rows, 0))
}

fn pick_class(ctx: &Ctx, base: u32, n: usize, exponent: Option<u64>) -> Result<Cuspidal, Error> {
    match exponent {
        None => Ok(classes_for(ctx, base, n)?.remove(0)),
        Some(e) => {
            let alpha = MultChar::new(&ctx.t, base * n as u32, e)?;
            Cuspidal::new(&ctx.t, n, base, alpha)
        }
    }
}

fn cmd_gamma(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let modes = cli.mode.expand();
    if modes.len() != 1 {
        return Err(Error::Config(
            "gamma needs a single --mode (rs, asai, ext, or bf)".into(),
        ));
    }
    let mode = modes[0];
    let ctx = make_ctx(cli, mode == Mode::Asai)?;
    let t = &ctx.t;
    let psi = psi_for(t, cli.twist)?;
    let (rec, delta_key) = match mode {
        Mode::Rs => {
            let pi1 = pick_class(&ctx, 1, cli.n, cli.class)?;
            let pi2 = pick_class(&ctx, 1, cli.n, cli.class2.or(cli.class))?;
            (gammaq::gammasums::record_rs(&ctx, &pi1, &pi2, &psi, cli.tol)?, None)
        }
        Mode::Asai => {
            let delta = find_delta(t);
            let pi = pick_class(&ctx, 2, cli.n, cli.class)?;
            (
                gammaq::gammasums::record_asai(&ctx, &pi, &psi, delta, cli.tol)?,
                Some(el_key(delta)),
            )
        }
        Mode::Ext => {
            let pi = pick_class(&ctx, 1, cli.n, cli.class)?;
            (gammaq::gammasums::record_ext(&ctx, &pi, &psi, cli.tol)?, None)
        }
        Mode::Bf => {
            let pi = pick_class(&ctx, 1, cli.n, cli.class)?;
            (gammaq::gammasums::record_bf(&ctx, &pi, &psi, cli.tol)?, None)
        }
    };
    let meta = metadata(cli, "gamma", vec![tower_value(t, delta_key)]);
    let row = serde_json::to_value(&rec).map_err(|e| Error::Config(e.to_string()))?;
    Ok((meta, vec![row], 0))
}

fn cmd_table(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let mut towers = Vec::new();
    let mut rows = Vec::new();
    for mode in cli.mode.expand() {
        let ctx = make_ctx(cli, mode == Mode::Asai)?;
        let psi = psi_for(&ctx.t, cli.twist)?;
        let delta_key = if mode == Mode::Asai {
            Some(el_key(find_delta(&ctx.t)))
        } else {
            None
        };
        towers.push(tower_value(&ctx.t, delta_key));
        for rec in table_records(&ctx, mode, &psi, cli.tol)? {
            rows.push(serde_json::to_value(&rec).map_err(|e| Error::Config(e.to_string()))?);
        }
    }
    let meta = metadata(cli, "table", towers);
    Ok((meta, rows, 0))
}

fn cmd_verify(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let dir = cache_dir(cli);
    let mut towers = Vec::new();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for mode in cli.mode.expand() {
        let t = FieldTower::build_with_budget(
            cli.p,
            cli.k,
            cli.n as u32,
            mode == Mode::Asai,
            budget(cli),
        )?;
        towers.push(tower_value(&t, None));
        let checks = verify_mode_with(
            cli.p,
            cli.k,
            cli.n,
            mode,
            cli.tol,
            cli.seed,
            Some(budget(cli)),
            dir.as_deref(),
        )?;
        for c in checks {
            all_pass &= c.pass;
            rows.push(serde_json::to_value(&c).map_err(|e| Error::Config(e.to_string()))?);
        }
    }
    let meta = metadata(cli, "verify", towers);
    Ok((meta, rows, if all_pass { 0 } else { 1 }))
}

fn cmd_bench(cli: &Cli) -> Result<(Value, Vec<Value>, i32), Error> {
    let mut rows = Vec::new();
    let count = 1 << 20;
    let iters = 20;
    let f = |i: usize| {
        let x = (i as f64 * 0.37).sin();
        C::new(x, -x * 0.5)
    };
    let start = Instant::now();
    let mut acc = C::new(0.0, 0.0);
    for _ in 0..iters {
        acc += gammaq::par::sum_indexed(count, f);
    }
    let par_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut acc_seq = C::new(0.0, 0.0);
    for _ in 0..iters {
        acc_seq += gammaq::par::sum_indexed_seq(count, f);
    }
    let seq_secs = start.elapsed().as_secs_f64();
    rows.push(json!({
        "kernel": "reduction-parallel", "elements": count, "iters": iters,
        "seconds": par_secs, "bitwise_equal_to_sequential": acc == acc_seq,
    }));
    rows.push(json!({
        "kernel": "reduction-sequential", "elements": count, "iters": iters,
        "seconds": seq_secs, "bitwise_equal_to_sequential": true,
    }));

    // A representative end-to-end workload: the full tensor table.
    let ctx = make_ctx(cli, false)?;
    let psi = psi_for(&ctx.t, cli.twist)?;
    let start = Instant::now();
    let recs = table_records(&ctx, Mode::Rs, &psi, cli.tol)?;
    rows.push(json!({
        "kernel": "rs-table", "records": recs.len(),
        "seconds": start.elapsed().as_secs_f64(),
    }));
    let meta = metadata(cli, "bench", vec![tower_value(&ctx.t, None)]);
    Ok((meta, rows, 0))
}

// ---------------------------------------------------------------------------
// Output.
// ---------------------------------------------------------------------------

fn emit(cli: &Cli, meta: &Value, rows: &[Value]) -> Result<(), Error> {
    let mut out = String::new();
    match cli.format {
        Format::Jsonl => {
            out.push_str(&meta.to_string());
            out.push('\n');
            for r in rows {
                out.push_str(&r.to_string());
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str("# ");
            out.push_str(&meta.to_string());
            out.push('\n');
            if let Some(first) = rows.first() {
                let keys: Vec<&String> = first.as_object().expect("row object").keys().collect();
                out.push_str(
                    &keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","),
                );
                out.push('\n');
                for r in rows {
                    let obj = r.as_object().expect("row object");
                    let cells: Vec<String> = keys
                        .iter()
                        .map(|&k| match obj.get(k) {
                            None | Some(Value::Null) => String::new(),
                            Some(Value::String(s)) => format!("\"{}\"", s.replace('"', "\"\"")),
                            Some(v) => v.to_string(),
                        })
                        .collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
        }
    }
    match &cli.out {
        None => {
            std::io::stdout()
                .write_all(out.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))?;
        }
        Some(path) => {
            std::fs::write(path, out)
                .map_err(|e| Error::Config(format!("write {}: {e}", path.display())))?;
        }
    }
    Ok(())
}
