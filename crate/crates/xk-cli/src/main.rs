use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;
use xk::engine::{analysis_json, evaluation_analysis, stage_matrix, Point};
use xk::norms::{average_vector, mt_norm, mt_norm_exhaustive, sup_norm_interval, MTParams};
use xk::rational::{approx, fmt_q, parse_q};
use xk::registry::record_json;
use xk::spaces::{forge_even, forge_odd_chain, Manifest, NetPolicy, DEFAULT_STAGE_CAP};
use xk::suites::{admissible_prefix, run_suite, suite_for_claim, SuiteConfig, DEFAULT_SEED, SUITES};
use xk::{Certificate, Func, GammaId, Ledger, Mode, OddGuard, ParameterSchedule, Q, Verdict, Which};

#[derive(Debug, Error)]
enum CliError {
    #[error("{context}: {source}")]
    Xk { context: String, source: xk::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for xk::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Xk { context: what.to_string(), source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Admissible,
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Discipline {
    Xk,
    Bmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Stage,
    Matrix,
    Analysis,
    Manifest,
}

#[derive(Debug, Args)]
struct Common {
    /// Schedule JSON file with arrays "m" and "n".
    #[arg(long, global = true)]
    schedule: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "toy")]
    mode: ModeArg,
    /// Net policy: units, factorial, factorial:N or dyadic:K.
    #[arg(long, global = true, default_value = "units")]
    net: String,
    #[arg(long, global = true, default_value_t = 6)]
    stage: u32,
    #[arg(long, global = true, default_value_t = DEFAULT_STAGE_CAP)]
    cap: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random cases per suite; 0 keeps the suite default.
    #[arg(long, global = true, default_value_t = 0)]
    cases: usize,
    /// Directory for ledgers and exported files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Parser)]
#[command(name = "xk", version, about = "Exact finite stages of Bourgain-Delbaen spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate a schedule and print derived constants.
    Schedule,
    /// Generate stages from a manifest or the flags.
    Gen {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "xk")]
        discipline: Discipline,
        #[arg(long)]
        waive_odd_guard: bool,
    },
    /// Forge even and odd towers described by a JSON file.
    Forge { description: PathBuf },
    /// Norm interval of a point file on a generated stage.
    Norm {
        point: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Mixed Tsirelson norm of a vector with its norming tree.
    Mtnorm {
        /// JSON file {"x": [[k, "p/q"], ...], "params": {...}}.
        vector: Option<PathBuf>,
        /// Average vector `j0=J`: n_J^-1 times the sum of the first n_J unit vectors.
        #[arg(long)]
        avg: Option<String>,
        /// Drop weight index J from the norming set.
        #[arg(long)]
        exclude: Option<usize>,
        /// Admissible family multiplier in l_j = factor * n_j.
        #[arg(long, default_value_t = 4)]
        factor: u64,
        /// Also run the exhaustive search (small supports only).
        #[arg(long)]
        check: bool,
        #[arg(long)]
        tree: bool,
    },
    /// Run a named verification suite.
    Verify {
        suite: String,
        /// Append certificates to this ledger instead of OUT/ledger.jsonl.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Run the HI probe.
    Hiprobe {
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Recompute every suite named in a ledger and compare verified rows.
    Replay { ledger: PathBuf },
    /// Dump stage tables, d* matrices or evaluation analyses.
    Export {
        #[arg(long, value_enum, default_value = "stage")]
        what: ExportKind,
        #[arg(long)]
        gamma: Option<u32>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn read_json(p: &Path) -> Result<Value> {
    let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: p.display().to_string(), source })
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source })
}

impl Common {
    fn schedule(&self) -> Result<ParameterSchedule> {
        let s = match &self.schedule {
            Some(p) => ParameterSchedule::from_json(&read_json(p)?).context("schedule")?,
            None => match self.mode {
                ModeArg::Toy => ParameterSchedule::toy_small(),
                ModeArg::Admissible => admissible_prefix(),
            },
        };
        if self.mode == ModeArg::Admissible && s.mode() != Mode::Admissible {
            return Err(CliError::Usage("schedule does not satisfy the admissibility growth conditions".into()));
        }
        Ok(s)
    }

    fn net(&self) -> Result<NetPolicy> {
        self.net.parse().context("--net")
    }

    fn manifest(&self, file: Option<&PathBuf>, which: Which, guard: OddGuard) -> Result<Manifest> {
        if let Some(p) = file {
            return Manifest::from_json(&read_json(p)?).context("manifest");
        }
        let mut m = Manifest::new(self.schedule()?, which, self.net()?, guard, self.stage);
        m.cap = self.cap;
        Ok(m)
    }

    fn suite_config(&self) -> Result<SuiteConfig> {
        Ok(SuiteConfig { seed: self.seed, cases: self.cases, stage: self.stage, cap: self.cap, net: self.net()? })
    }

    fn emit(&self, text: &str, name: &str) -> Result<()> {
        match &self.out {
            Some(dir) => write_file(&dir.join(name), text),
            None => {
                print!("{text}");
                if !text.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn certificate_csv(cs: &[Certificate]) -> String {
    let mut s = String::from("claim_id,verdict,stage,values\n");
    for c in cs {
        let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s.push_str(&format!("{},{},{},{}\n", c.claim_id, c.verdict.as_str(), c.stage, vals.join(" ")));
    }
    s
}

fn report(common: &Common, cs: &[Certificate], ledger: Option<&PathBuf>) -> Result<ExitCode> {
    let path = ledger.cloned().or_else(|| common.out.as_ref().map(|d| d.join("ledger.jsonl")));
    if let Some(p) = &path {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        }
        let l = Ledger::new(p);
        for c in cs {
            l.append(c).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
        }
    }
    match common.format {
        Format::Json => {
            for c in cs {
                println!("{}", c.to_canonical());
            }
        }
        Format::Csv => print!("{}", certificate_csv(cs)),
    }
    let count = |v: Verdict| cs.iter().filter(|c| c.verdict == v).count();
    let violated = count(Verdict::Violated);
    eprintln!(
        "{} certificates: {} verified, {} reported, {} violated",
        cs.len(),
        count(Verdict::Verified),
        count(Verdict::Reported),
        violated
    );
    Ok(if violated == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn parse_avg(s: &str) -> Result<usize> {
    s.strip_prefix("j0=")
        .unwrap_or(s)
        .parse()
        .map_err(|_| CliError::Usage(format!("--avg expects j0=J, got {s:?}")))
}

fn parse_vector(v: &Value) -> Result<BTreeMap<u64, Q>> {
    let arr = v.get("x").and_then(Value::as_array).ok_or_else(|| CliError::Usage("vector file needs an \"x\" array".into()))?;
    let mut out = BTreeMap::new();
    for e in arr {
        let k = e.get(0).and_then(Value::as_u64);
        let c = e.get(1).and_then(Value::as_str);
        match (k, c) {
            (Some(k), Some(c)) => {
                out.insert(k, parse_q(c).context("vector entry")?);
            }
            _ => return Err(CliError::Usage(format!("bad vector entry {e}"))),
        }
    }
    Ok(out)
}

fn mtnorm(common: &Common, args: MtArgs) -> Result<ExitCode> {
    let (x, mut params) = match (&args.vector, &args.avg) {
        (Some(p), None) => {
            let v = read_json(p)?;
            let params = match v.get("params") {
                Some(pv) => MTParams::from_json(pv).context("params")?,
                None => MTParams::from_schedule(&common.schedule()?, args.factor).context("params")?,
            };
            (parse_vector(&v)?, params)
        }
        (None, Some(a)) => {
            let j0 = parse_avg(a)?;
            let s = match common.schedule {
                Some(_) => common.schedule()?,
                None => admissible_prefix(),
            };
            let n = s.n_u64(j0).context("averaging length")?;
            (average_vector(n), MTParams::from_schedule(&s, args.factor).context("params")?)
        }
        _ => return Err(CliError::Usage("give exactly one of VECTOR or --avg".into())),
    };
    if let Some(j) = args.exclude {
        params = params.excluding(j);
    }
    let (v, t) = mt_norm(&x, &params);
    println!("{}", fmt_q(&v));
    let mut ok = true;
    if args.check {
        let b = mt_norm_exhaustive(&x, &params, 20).context("exhaustive search")?;
        ok = b == v;
        eprintln!("exhaustive {} ({})", fmt_q(&b), if ok { "agrees" } else { "DISAGREES" });
    }
    if args.tree {
        let tv = t.map(|t| t.to_json()).unwrap_or(Value::Null);
        common.emit(&pretty(&json!({"value": fmt_q(&v), "approx": approx(&v), "tree": tv})), "mtnorm.json")?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

struct MtArgs {
    vector: Option<PathBuf>,
    avg: Option<String>,
    exclude: Option<usize>,
    factor: u64,
    check: bool,
    tree: bool,
}

fn ids(v: &Value, key: &str) -> Result<Vec<Value>> {
    Ok(v.get(key).and_then(Value::as_array).cloned().unwrap_or_default())
}

fn forge(common: &Common, path: &Path) -> Result<ExitCode> {
    let desc = read_json(path)?;
    let manifest = match desc.get("manifest") {
        Some(m) => Manifest::from_json(m).context("manifest")?,
        None => common.manifest(None, Which::XK, OddGuard::Enforce)?,
    };
    let mut reg = manifest.build().context("generation")?;
    let before = reg.len();
    let mut even = Vec::new();
    for (i, e) in ids(&desc, "even")?.iter().enumerate() {
        let ctx = format!("even tower {}", i + 1);
        let j = e.get("j").and_then(Value::as_u64).ok_or_else(|| CliError::Usage(format!("{ctx}: missing j")))?;
        let cuts: Vec<u32> = e
            .get("cuts")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_u64).map(|c| c as u32).collect())
            .unwrap_or_default();
        let payloads = e
            .get("payloads")
            .and_then(Value::as_array)
            .map(|a| a.iter().map(Func::from_json).collect::<xk::Result<Vec<_>>>())
            .transpose()
            .context(&ctx)?
            .unwrap_or_default();
        even.push(forge_even(&mut reg, j as usize, &cuts, &payloads).context(&ctx)?.0);
    }
    let mut odd = Vec::new();
    for (i, o) in ids(&desc, "odd")?.iter().enumerate() {
        let ctx = format!("odd chain {}", i + 1);
        let j0 = o.get("j0").and_then(Value::as_u64).ok_or_else(|| CliError::Usage(format!("{ctx}: missing j0")))?;
        let targets: Vec<(u32, GammaId)> = o
            .get("targets")
            .and_then(Value::as_array)
            .map(|a| {
                a.iter()
                    .filter_map(|t| Some((t.get(0)?.as_u64()? as u32, GammaId(t.get(1)?.as_u64()? as u32))))
                    .collect()
            })
            .unwrap_or_default();
        odd.push(forge_odd_chain(&mut reg, j0 as usize, &targets).context(&ctx)?.0);
    }
    let new: Vec<Value> = reg.records()[before..].iter().map(record_json).collect();
    common.emit(&pretty(&json!({"even": even, "odd": odd, "records": new})), "forge.json")?;
    Ok(ExitCode::SUCCESS)
}

fn stage_csv(rows: &[Value]) -> String {
    let mut s = String::from("id,rank,kind,weight_index,age,cut,predecessor,sigma\n");
    let f = |v: &Value| if v.is_null() { String::new() } else { v.to_string().trim_matches('"').to_string() };
    for r in rows {
        let cols: Vec<String> =
            ["id", "rank", "kind", "weight_index", "age", "cut", "predecessor", "sigma"].iter().map(|k| f(&r[*k])).collect();
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

fn replay(common: &Common, path: &Path) -> Result<ExitCode> {
    let rows = Ledger::new(path).read().context("ledger")?;
    let mut by_seed: BTreeMap<Option<u64>, BTreeSet<&'static str>> = BTreeMap::new();
    for c in &rows {
        if let Some(s) = suite_for_claim(&c.claim_id) {
            by_seed.entry(c.seed).or_default().insert(s);
        }
    }
    let mut fresh = BTreeSet::new();
    for (seed, suites) in by_seed {
        let mut cfg = common.suite_config()?;
        cfg.seed = seed.unwrap_or(DEFAULT_SEED);
        for s in suites {
            for c in run_suite(s, &cfg).context(s)? {
                fresh.insert(c.to_canonical());
            }
        }
    }
    let verified: Vec<&Certificate> = rows.iter().filter(|c| c.verdict == Verdict::Verified).collect();
    let missing = verified.iter().filter(|c| !fresh.contains(&c.to_canonical())).count();
    println!("{} verified rows, {} reproduced, {} not reproduced", verified.len(), verified.len() - missing, missing);
    Ok(if missing == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    match cli.cmd {
        Cmd::Schedule => {
            let s = common.schedule()?;
            common.emit(&pretty(&s.to_json()), "schedule.json")?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Gen { manifest, discipline, waive_odd_guard } => {
            let which = if discipline == Discipline::Bmt { Which::BmT } else { Which::XK };
            let guard = if waive_odd_guard { OddGuard::Waive } else { OddGuard::Enforce };
            let m = common.manifest(manifest.as_ref(), which, guard)?;
            let reg = m.build().context("generation")?;
            let counts: Vec<Value> =
                (1..=m.stage).map(|q| json!({"stage": q, "new": reg.delta(q).len(), "total": reg.count_upto(q)})).collect();
            if let Some(dir) = &common.out {
                write_file(&dir.join("manifest.json"), &pretty(&m.to_json()))?;
                write_file(&dir.join("stage.json"), &pretty(&reg.stage_table_json(m.stage)))?;
            }
            println!("{}", pretty(&json!({"manifest": m.to_json(), "counts": counts})));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Forge { description } => forge(common, &description),
        Cmd::Norm { point, manifest } => {
            let m = common.manifest(manifest.as_ref(), Which::XK, OddGuard::Enforce)?;
            let reg = m.build().context("generation")?;
            let x = Point::from_json(&read_json(&point)?).context("point")?;
            let ni = sup_norm_interval(&reg, &x, m.stage).context("norm")?;
            println!("{}", pretty(&ni.to_json()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Mtnorm { vector, avg, exclude, factor, check, tree } => {
            mtnorm(common, MtArgs { vector, avg, exclude, factor, check, tree })
        }
        Cmd::Verify { suite, ledger } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(CliError::Usage(format!("unknown suite {suite:?}; known: {}", SUITES.join(", "))));
            }
            let cs = run_suite(&suite, &common.suite_config()?).context(&suite)?;
            report(common, &cs, ledger.as_ref())
        }
        Cmd::Hiprobe { ledger } => {
            let cs = run_suite("hiprobe", &common.suite_config()?).context("hiprobe")?;
            report(common, &cs, ledger.as_ref())
        }
        Cmd::Replay { ledger } => replay(common, &ledger),
        Cmd::Export { what, gamma, manifest } => {
            let m = common.manifest(manifest.as_ref(), Which::XK, OddGuard::Enforce)?;
            let reg = m.build().context("generation")?;
            let (text, name) = match (what, common.format) {
                (ExportKind::Manifest, _) => (pretty(&m.to_json()), "manifest.json"),
                (ExportKind::Stage, Format::Json) => (pretty(&reg.stage_table_json(m.stage)), "stage.json"),
                (ExportKind::Stage, Format::Csv) => {
                    let rows = reg.stage_table_json(m.stage).as_array().cloned().unwrap_or_default();
                    (stage_csv(&rows), "stage.csv")
                }
                (ExportKind::Matrix, f) => {
                    let sm = stage_matrix(&reg, m.stage).context("stage matrix")?;
                    match f {
                        Format::Json => (pretty(&sm.to_json()), "matrix.json"),
                        Format::Csv => (sm.dstar_csv(), "dstar.csv"),
                    }
                }
                (ExportKind::Analysis, f) => {
                    let g = GammaId(gamma.ok_or_else(|| CliError::Usage("--what analysis needs --gamma".into()))?);
                    let rows = evaluation_analysis(&reg, g).context("analysis")?;
                    match f {
                        Format::Json => (pretty(&analysis_json(&rows)), "analysis.json"),
                        Format::Csv => {
                            let mut s = String::from("r,p,xi,payload\n");
                            for r in &rows {
                                s.push_str(&format!("{},{},{},\"{}\"\n", r.index, r.cut, r.node.0, r.payload.to_json()));
                            }
                            (s, "analysis.csv")
                        }
                    }
                }
            };
            common.emit(&text, name)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
