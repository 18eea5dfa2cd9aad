//! Command-line front end. The binary only forwards to [`main_with`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{tq, Algebra};
use crate::bar::{bar_module, lie};
use crate::cache::{Cache, Status};
use crate::chain::EqComplex;
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind};
use crate::filtration::{compare_filtrations, filtered_bar_decreasing, filtered_bar_increasing, FiltrationComparison};
use crate::operad::RightModule;
use crate::sset::{stable_tq, tensor_module, PointedSSet, Smash, SphereModel};
use crate::verify::{self, Params, Report, CHECKS};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldArg {
    Q,
    F2,
    F3,
    F5,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Q => FieldKind::Q,
            FieldArg::F2 => FieldKind::F2,
            FieldArg::F3 => FieldKind::F3,
            FieldArg::F5 => FieldKind::F5,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Min,
    Cube,
}

impl From<ModelArg> for SphereModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Min => SphereModel::Min,
            ModelArg::Cube => SphereModel::Cube,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Parser)]
#[command(name = "operadforge", version, about = "Exact computations with right Com-modules, bar constructions and their filtrations")]
pub struct Cli {
    /// Coefficient field.
    #[arg(long, global = true, value_enum, default_value = "q", env = "OPERADFORGE_FIELD")]
    pub field: FieldArg,
    /// Largest arity (and algebra weight) computed.
    #[arg(long, global = true, default_value_t = 5, env = "OPERADFORGE_MAX_ARITY")]
    pub max_arity: usize,
    /// Largest homological degree reported.
    #[arg(long, global = true, default_value_t = 6, env = "OPERADFORGE_DEGREE_BOUND", allow_hyphen_values = true)]
    pub degree_bound: i32,
    #[arg(long, global = true, value_enum, default_value = "min", env = "OPERADFORGE_SPHERE_MODEL")]
    pub sphere_model: ModelArg,
    /// Cache directory. Defaults to `$XDG_CACHE_HOME/operadforge` or `~/.cache/operadforge`.
    #[arg(long, global = true, env = "OPERADFORGE_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Do not read or write the cache.
    #[arg(long, global = true, env = "OPERADFORGE_NO_CACHE")]
    pub no_cache: bool,
    #[arg(long, global = true, value_enum, default_value = "table", env = "OPERADFORGE_FORMAT")]
    pub format: Format,
    /// Seed for random test inputs.
    #[arg(long, global = true, default_value_t = 0, env = "OPERADFORGE_SEED")]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Homology of Lie(n) = B(S(1), Com, S(1))(n) for n ≤ max arity.
    Lie,
    /// Topological Quillen homology TQ(I) = B(S(1), Com, I) by weight.
    Tq(AlgebraArg),
    /// colim_k Σ^{−k}(S^k ⊗ I) in degrees ≤ the degree bound.
    StableTq {
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
    },
    /// Chains on the smash power K^{∧n} and on K^{∧n}/Δ_n.
    Tensor {
        /// `s<k>` or `set:<m>`.
        #[arg(long)]
        space: String,
        #[arg(long)]
        power: usize,
    },
    /// Layers of the increasing (up) or decreasing (down) filtration of B(M, Com, I).
    Filtration {
        /// `bar`, `com` or `tensor:<space>`.
        #[arg(long, default_value = "bar")]
        module: String,
        #[arg(long, value_enum, default_value = "up")]
        direction: Direction,
        #[command(flatten)]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
    /// Compare the bar and sphere filtrations of TQ(I).
    Compare {
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        /// Sphere dimension of the stabilization side.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Restrict to one algebra; defaults to free:0, free:1 and zero:0.
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Run a named check, or all of them.
    Verify(VerifyArgs),
    /// Inspect or clear the cache.
    Cache {
        #[arg(value_enum, default_value = "list")]
        action: CacheAction,
    },
}

#[derive(Debug, Args)]
pub struct AlgebraArg {
    /// `free:<deg>` or `zero:<deg>`.
    #[arg(long, default_value = "free:0")]
    pub algebra: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check id, numbered alias, or `all`.
    pub id: Option<String>,
    /// List the available checks.
    #[arg(long)]
    pub list: bool,
    #[arg(long, visible_alias = "n-max")]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CacheAction {
    List,
    Clear,
    Path,
}

/// Result of one command: machine-readable payload, rendered text, exit code.
pub struct Output {
    pub command: &'static str,
    pub result: Value,
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(command: &'static str, result: Value, text: String) -> Self {
        Output { command, result, text, code: EXIT_OK }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    cache: Option<Cache>,
    warnings: Vec<String>,
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|x| !x.is_empty()) {
        return Some(PathBuf::from(x).join("operadforge"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("operadforge"))
}

impl Cli {
    pub fn cache_path(&self) -> Option<PathBuf> {
        self.cache_dir.clone().or_else(default_cache_dir)
    }
}

/// Render rows with left-aligned columns.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let s: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    out += &line(width.iter().map(|w| "-".repeat(*w)).collect());
    for r in rows {
        out += &line(r.clone());
    }
    out
}

fn homology_text(h: &BTreeMap<i32, usize>) -> String {
    if h.is_empty() {
        return "0".into();
    }
    h.iter().map(|(q, d)| format!("{q}:{d}")).collect::<Vec<_>>().join(" ")
}

fn module_from_spec<F: Field>(spec: &str, max: usize, model: SphereModel) -> Result<RightModule<F>> {
    match spec {
        "bar" => Ok(bar_module(&RightModule::unit(max))),
        "com" => Ok(RightModule::com(max)),
        _ => match spec.strip_prefix("tensor:") {
            Some(space) => Ok(tensor_module(&PointedSSet::from_spec(space, model)?, max)),
            None => Err(Error::Usage(format!("unknown module `{spec}` (expected bar, com or tensor:<space>)"))),
        },
    }
}

fn cmd_lie<F: Field>(ctx: &mut Ctx<'_>) -> Result<Output> {
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in 1..=ctx.cli.max_arity {
        let params = json!({ "n": n });
        let l: EqComplex<F> = match &ctx.cache {
            Some(c) => {
                let (v, status) = c.get_or_compute::<F, _>("lie", &params, || Ok(lie::<F>(n)))?;
                if let Status::Recomputed(why) = status {
                    ctx.warnings.push(format!("cache entry for lie({n}) rejected ({why}); recomputed"));
                }
                v
            }
            None => lie::<F>(n),
        };
        let h = l.complex.homology();
        for (q, d) in &h {
            rows.push(vec![n.to_string(), q.to_string(), d.to_string()]);
        }
        json_rows.push(json!({ "n": n, "cells": l.dim(), "homology": h }));
    }
    Ok(Output::ok("lie", json!(json_rows), render_table(&["n", "degree", "rank"], &rows)))
}

fn weight_rows(h: &BTreeMap<usize, BTreeMap<i32, usize>>) -> Vec<Vec<String>> {
    h.iter().flat_map(|(w, hw)| hw.iter().map(move |(q, d)| vec![w.to_string(), q.to_string(), d.to_string()])).collect()
}

fn cmd_tq<F: Field>(ctx: &Ctx<'_>, spec: &str) -> Result<Output> {
    let alg = Algebra::<F>::from_spec(spec, ctx.cli.max_arity)?;
    let h = tq(&alg)?.homology_by_weight();
    let text = format!("TQ({spec}) through weight {}\n{}", ctx.cli.max_arity, render_table(&["weight", "degree", "dim"], &weight_rows(&h)));
    Ok(Output::ok("tq", json!({ "algebra": spec, "max_weight": ctx.cli.max_arity, "homology_by_weight": h }), text))
}

fn cmd_stable_tq<F: Field>(ctx: &Ctx<'_>, spec: &str, max_k: usize) -> Result<Output> {
    let alg = Algebra::<F>::from_spec(spec, ctx.cli.max_arity)?;
    let st = stable_tq(&alg, ctx.cli.degree_bound, max_k, ctx.cli.sphere_model.into())?;
    let rows: Vec<Vec<String>> = st.by_k.iter().enumerate().map(|(k, h)| vec![k.to_string(), st.arity[k].to_string(), homology_text(h)]).collect();
    let text = format!(
        "stable at k = {} in degrees ≤ {}: {}\n{}",
        st.witness,
        ctx.cli.degree_bound,
        homology_text(&st.homology),
        render_table(&["k", "arity", "homology"], &rows)
    );
    Ok(Output::ok("stable-tq", json!({ "algebra": spec, "degree_bound": ctx.cli.degree_bound, "stable": st }), text))
}

fn cmd_tensor<F: Field>(ctx: &Ctx<'_>, space: &str, n: usize) -> Result<Output> {
    if n == 0 {
        return Err(Error::Usage("--power must be positive".into()));
    }
    let k = PointedSSet::from_spec(space, ctx.cli.sphere_model.into())?;
    let power = Smash::power(&k, n);
    let chains = power.power_chains::<F>().complex;
    let fat = power.distinctness(n - 1);
    let basis = crate::linalg::SparseMatrix::from_columns(power.len(), fat.iter().map(|&i| vec![(i, F::one())]).collect());
    let layer = chains.quotient(&basis)?.complex;
    let degrees: std::collections::BTreeSet<i32> = chains.degrees().iter().copied().collect();
    let (h, hl) = (chains.homology(), layer.homology());
    let rows: Vec<Vec<String>> = degrees
        .iter()
        .map(|&q| {
            vec![q.to_string(), chains.dim_in(q).to_string(), h.get(&q).unwrap_or(&0).to_string(), layer.dim_in(q).to_string(), hl.get(&q).unwrap_or(&0).to_string()]
        })
        .collect();
    let text = format!("{space}^∧{n}\n{}", render_table(&["degree", "cells", "H", "cells mod Δ", "H mod Δ"], &rows));
    let cells: BTreeMap<i32, usize> = degrees.iter().map(|&q| (q, chains.dim_in(q))).collect();
    Ok(Output::ok("tensor", json!({ "space": space, "power": n, "cells": cells, "homology": h, "fat_diagonal_quotient": hl }), text))
}

fn cmd_filtration<F: Field>(ctx: &Ctx<'_>, module: &str, dir: Direction, spec: &str, max_n: usize) -> Result<Output> {
    let model = ctx.cli.sphere_model.into();
    let m = module_from_spec::<F>(module, max_n, model)?;
    let alg = Algebra::<F>::from_spec(spec, max_n)?;
    let mut rows = Vec::new();
    let mut layers = Vec::new();
    for n in 1..=max_n {
        let (layer, formula) = match dir {
            Direction::Up => filtered_bar_increasing(&m, &alg, n)?,
            Direction::Down => filtered_bar_decreasing(&m, &alg, n)?,
        };
        rows.push(vec![n.to_string(), homology_text(&layer), homology_text(&formula), (layer == formula).to_string()]);
        layers.push(json!({ "n": n, "layer": layer, "formula": formula }));
    }
    let formula = match dir {
        Direction::Up => "(M̄(n) ⊗ I^⊗n)_Σn",
        Direction::Down => "(M(n) ⊗ TQ^⊗n)_Σn",
    };
    let text = format!("{module}, {spec}, direction {dir:?}\n{}", render_table(&["n", "H(layer)", formula, "agree"], &rows));
    let dir_s = if dir == Direction::Up { "up" } else { "down" };
    Ok(Output::ok("filtration", json!({ "module": module, "direction": dir_s, "algebra": spec, "layers": layers }), text))
}

/// Layer table of one comparison, as printed by `compare` and `verify`.
pub fn comparison_text(c: &FiltrationComparison) -> String {
    let rows: Vec<Vec<String>> = c
        .layers
        .iter()
        .map(|l| vec![l.n.to_string(), l.bound.to_string(), homology_text(&l.bar), homology_text(&l.sphere), homology_text(&l.bar_image), l.agree.to_string()])
        .collect();
    format!(
        "{} (k = {}): squares commute {}, sequences exact {}\n{}",
        c.algebra,
        c.k,
        c.squares_commute,
        c.sequences_exact,
        render_table(&["n", "≤deg", "bar layer", "sphere layer", "image in TQ", "agree"], &rows)
    )
}

fn cmd_compare<F: Field>(ctx: &Ctx<'_>, n_max: usize, k: usize, algebra: Option<&str>) -> Result<Output> {
    let specs: Vec<&str> = algebra.map_or_else(|| vec!["free:0", "free:1", "zero:0"], |a| vec![a]);
    let mut all = Vec::new();
    let mut text = String::new();
    for spec in specs {
        let alg = Algebra::<F>::from_spec(spec, n_max)?;
        let c = compare_filtrations(&alg, n_max, k, ctx.cli.sphere_model.into(), ctx.cli.degree_bound)?;
        text += &comparison_text(&c);
        all.push(c);
    }
    let holds = all.iter().all(FiltrationComparison::holds);
    text += &format!("comparison {}\n", if holds { "holds" } else { "FAILS" });
    let mut out = Output::ok("compare", json!({ "holds": holds, "comparisons": all }), text);
    out.code = if holds { EXIT_OK } else { EXIT_FAIL };
    Ok(out)
}

fn report_text(r: &Report) -> String {
    let mut s = format!("{} {} [{}] {}\n", if r.pass { "PASS" } else { "FAIL" }, r.id, r.field, r.statement);
    if r.id == "filtration-comparison" {
        if let Some(list) = r.witness.as_array() {
            for v in list {
                if let Ok(c) = serde_json::from_value::<FiltrationComparison>(v.clone()) {
                    s += &comparison_text(&c);
                }
            }
        }
    } else if let Some(list) = r.witness.as_array() {
        for v in list {
            s += &format!("  {v}\n");
        }
    } else {
        s += &format!("  {}\n", r.witness);
    }
    s
}

fn cmd_verify<F: Field>(ctx: &Ctx<'_>, args: &VerifyArgs) -> Result<Output> {
    if args.list {
        let rows: Vec<Vec<String>> = CHECKS.iter().map(|c| vec![c.id.into(), c.alias.unwrap_or("").into(), c.statement.into()]).collect();
        let list: Vec<Value> = CHECKS.iter().map(|c| json!({ "id": c.id, "alias": c.alias, "statement": c.statement })).collect();
        return Ok(Output::ok("verify", json!(list), render_table(&["id", "alias", "statement"], &rows)));
    }
    let id = args.id.as_deref().ok_or_else(|| Error::Usage("verify needs a check id, `all` or --list".into()))?;
    let p = Params {
        max_n: args.max_n,
        n: args.n,
        k: args.k,
        degree_bound: ctx.cli.degree_bound,
        max_arity: ctx.cli.max_arity,
        seed: ctx.cli.seed,
        model: ctx.cli.sphere_model.into(),
    };
    let reports = if id == "all" { verify::run_all::<F>(&p)? } else { vec![verify::run::<F>(id, &p)?] };
    let pass = reports.iter().all(|r| r.pass);
    let text: String = reports.iter().map(report_text).collect();
    let result = if reports.len() == 1 { serde_json::to_value(&reports[0])? } else { json!({ "pass": pass, "reports": reports }) };
    let mut out = Output::ok("verify", result, text);
    out.code = if pass { EXIT_OK } else { EXIT_FAIL };
    Ok(out)
}

fn cmd_cache(ctx: &Ctx<'_>, action: CacheAction) -> Result<Output> {
    let cache = ctx.cache.as_ref().ok_or_else(|| Error::Usage("no cache directory (set --cache-dir or HOME)".into()))?;
    let dir = cache.dir().display().to_string();
    match action {
        CacheAction::Path => Ok(Output::ok("cache", json!({ "dir": dir }), format!("{dir}\n"))),
        CacheAction::Clear => {
            let n = cache.clear()?;
            Ok(Output::ok("cache", json!({ "dir": dir, "removed": n }), format!("removed {n} entries from {dir}\n")))
        }
        CacheAction::List => {
            let entries = cache.list()?;
            let rows: Vec<Vec<String>> = entries.iter().map(|e| vec![e.construction.clone(), e.params.to_string(), e.field.clone(), e.key[..16].to_string()]).collect();
            let list: Vec<Value> = entries.iter().map(|e| json!({ "construction": e.construction, "params": e.params, "field": e.field, "key": e.key })).collect();
            Ok(Output::ok("cache", json!({ "dir": dir, "entries": list }), render_table(&["construction", "params", "field", "key"], &rows)))
        }
    }
}

fn dispatch<F: Field>(ctx: &mut Ctx<'_>) -> Result<Output> {
    let cli = ctx.cli;
    match &cli.command {
        Command::Lie => cmd_lie::<F>(ctx),
        Command::Tq(a) => cmd_tq::<F>(ctx, &a.algebra),
        Command::StableTq { algebra, max_k } => cmd_stable_tq::<F>(ctx, &algebra.algebra, *max_k),
        Command::Tensor { space, power } => cmd_tensor::<F>(ctx, space, *power),
        Command::Filtration { module, direction, algebra, max_n } => cmd_filtration::<F>(ctx, module, *direction, &algebra.algebra, *max_n),
        Command::Compare { n_max, k, algebra } => cmd_compare::<F>(ctx, *n_max, *k, algebra.as_deref()),
        Command::Verify(args) => cmd_verify::<F>(ctx, args),
        Command::Cache { action } => cmd_cache(ctx, *action),
    }
}

/// Run a parsed command line. Returns the output and any warnings.
pub fn execute(cli: &Cli) -> Result<(Output, Vec<String>)> {
    let cache = if cli.no_cache { None } else { cli.cache_path().map(Cache::new).transpose()? };
    let mut ctx = Ctx { cli, cache, warnings: Vec::new() };
    let kind: FieldKind = cli.field.into();
    let out = crate::with_field!(kind, F => dispatch::<F>(&mut ctx))?;
    Ok((out, ctx.warnings))
}

fn envelope(cli: &Cli, out: &Output) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": out.command,
        "field": FieldKind::from(cli.field).tag(),
        "result": out.result,
    })
}

/// Parse arguments, run, print, and return the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok((out, warnings)) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let _ = match cli.format {
                Format::Table => write!(stdout, "{}", out.text),
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&envelope(&cli, &out)).expect("json")),
            };
            out.code
        }
        Err(e @ (Error::Usage(_) | Error::Parse(_))) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
