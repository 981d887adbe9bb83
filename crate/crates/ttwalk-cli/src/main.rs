//! `ttwalk` command-line tool.
//!
//! Primary output goes to stdout or `--out` and is a deterministic function
//! of the flags. The run manifest goes to stderr or `--manifest`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use ttwalk::folds::{fold_decomposition, realize_power};
use ttwalk::invariants::{check_property_g_with, BlockTable, Caps, PinpStatus};
use ttwalk::nielsen::{all_prevention_blocks, find_seed_sequence, format_seed_fixture, NielsenAuto, DEFAULT_SEED_BUDGET};
use ttwalk::rose_map::{RoseMap, DEFAULT_SIZE_CAP};
use ttwalk::spectral::{estimate_lyapunov, lyapunov_csv};
use ttwalk::walk::{count_occurrences, estimate_e_n_prob, is_e_n, sample_with_chain, Chain, Trajectory, WalkConfig};
use ttwalk::Error;

#[derive(Parser)]
#[command(name = "ttwalk", version, about = "Train-track directed random walks on Out(F_r)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trajectories of the walk, one JSON line per trial.
    Sample {
        #[command(flatten)]
        walk: WalkArgs,
        /// Write the rose map of every cyclically admissible trial into this directory.
        #[arg(long, value_name = "DIR")]
        emit_maps: Option<PathBuf>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Monte Carlo estimate of Pr(E_n) against its limit.
    EstimateEn {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Property (G) report for every cyclically admissible trial.
    PropertyG {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        caps: CapArgs,
        /// Only print the per-length summary.
        #[arg(long)]
        summary_only: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Estimate of the top Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        walk: WalkArgs,
        /// Also write (n, X_n, X_n/n, log λ) for trial 0 as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Fold decomposition of a rose map, with a recomposition receipt.
    Decompose {
        /// Rose map text file ("rank r" header, then "a1 -> ..." lines).
        file: PathBuf,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Search for a seed sequence of the given rank.
    SeedSearch {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = DEFAULT_SEED_BUDGET)]
        budget: usize,
        /// Also write the result in fixture format.
        #[arg(long, value_name = "PATH")]
        fixture: Option<PathBuf>,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Clone)]
struct WalkArgs {
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Walk length; several comma-separated values for property-g.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct CapArgs {
    #[arg(long, default_value_t = Caps::default().inp_cap)]
    inp_cap: usize,
    #[arg(long, default_value_t = Caps::default().whitehead_cap)]
    whitehead_cap: usize,
    #[arg(long, default_value_t = Caps::default().power_k_cap)]
    power_k_cap: usize,
}

impl CapArgs {
    fn caps(&self) -> Caps {
        Caps { inp_cap: self.inp_cap, whitehead_cap: self.whitehead_cap, power_k_cap: self.power_k_cap, ..Caps::default() }
    }
}

#[derive(Args, Clone)]
struct IoArgs {
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    rank: Option<usize>,
    seed: Option<u64>,
    n: Vec<usize>,
    trials: Option<usize>,
    caps: Option<Caps>,
    version: &'static str,
    wall_time_ms: u128,
}

enum Failure {
    Usage(String),
    Precondition(String),
    Inconclusive(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Malformed(_) => Failure::Usage(e.to_string()),
            Error::CapExceeded(_) | Error::SearchExhausted(_) | Error::NoConvergence(_) => Failure::Inconclusive(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

type Out = Result<Outcome, Failure>;

struct Outcome {
    text: String,
    inconclusive: bool,
}

fn par_map<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(count.max(1));
    let next = AtomicUsize::new(0);
    let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut got = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= count {
                            break got;
                        }
                        got.push((i, f(i)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all: Vec<(usize, T)> = parts.iter_mut().flat_map(std::mem::take).collect();
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, t)| t).collect()
}

fn jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("serializable"));
        s.push('\n');
    }
    s
}

fn doc<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn one_n(w: &WalkArgs) -> Result<usize, Failure> {
    match w.n[..] {
        [n] => Ok(n),
        _ => Err(Failure::Usage("--n takes a single value for this command".into())),
    }
}

fn config(w: &WalkArgs, n: usize) -> Result<WalkConfig, Failure> {
    if n == 0 || w.trials == 0 {
        return Err(Failure::Usage("--n and --trials must be at least 1".into()));
    }
    Ok(WalkConfig::new(w.rank, w.seed, n, w.trials)?)
}

fn cmd_sample(w: &WalkArgs, emit: Option<&Path>) -> Out {
    let n = one_n(w)?;
    let cfg = config(w, n)?;
    let chain = Chain::new(cfg.rank)?;
    let blocks = all_prevention_blocks(cfg.rank)?;
    if let Some(dir) = emit {
        fs::create_dir_all(dir)?;
    }
    let rows = par_map(cfg.trials, |t| -> Result<Value, Failure> {
        let traj = sample_with_chain(&chain, &cfg, t as u64);
        let cyclic = is_e_n(&traj.items);
        let occ: usize = blocks.iter().map(|b| count_occurrences(&traj.items, b)).sum();
        let mut map_file = Value::Null;
        if let (Some(dir), true) = (emit, cyclic) {
            map_file = match RoseMap::from_sequence_capped(&traj.sequence(), DEFAULT_SIZE_CAP) {
                Ok(f) => {
                    let path = dir.join(format!("trial-{t}.rose"));
                    fs::write(&path, f.to_string())?;
                    json!(path.display().to_string())
                }
                Err(Error::CapExceeded(_)) => json!("too-large"),
                Err(e) => return Err(e.into()),
            };
        }
        Ok(json!({
            "trial": t,
            "n": n,
            "sequence": traj.sequence().to_string(),
            "cyclically_admissible": cyclic,
            "block_occurrences": occ,
            "map_file": map_file,
        }))
    });
    let rows: Vec<Value> = rows.into_iter().collect::<Result<_, _>>()?;
    Ok(Outcome { text: jsonl(&rows), inconclusive: false })
}

fn cmd_estimate_en(w: &WalkArgs) -> Out {
    let cfg = config(w, one_n(w)?)?;
    Ok(Outcome { text: doc(&estimate_e_n_prob(&cfg)?), inconclusive: false })
}

fn prefix_report(traj: &Trajectory, n: usize, caps: &Caps, table: &BlockTable) -> Result<Option<Value>, Failure> {
    let items: &[NielsenAuto] = traj.prefix(n);
    if !is_e_n(items) {
        return Ok(None);
    }
    let seq = ttwalk::nielsen::NielsenSequence::new(items.to_vec(), traj.config.rank)?;
    let rep = check_property_g_with(&seq, caps, table)?;
    Ok(Some(json!({ "trial": traj.trial_index, "n": n, "full": rep.is_full(), "report": rep })))
}

fn cmd_property_g(w: &WalkArgs, caps: &Caps, summary_only: bool) -> Out {
    let max_n = *w.n.iter().max().ok_or_else(|| Failure::Usage("--n is empty".into()))?;
    let cfg = config(w, max_n)?;
    let chain = Chain::new(cfg.rank)?;
    let table = BlockTable::new(cfg.rank);
    let per_trial = par_map(cfg.trials, |t| -> Result<Vec<Value>, Failure> {
        let traj = sample_with_chain(&chain, &cfg, t as u64);
        let mut out = Vec::new();
        for &n in &w.n {
            if let Some(v) = prefix_report(&traj, n, caps, &table)? {
                out.push(v);
            }
        }
        Ok(out)
    });
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    let inconclusive = rows.iter().any(|r| r["report"]["no_pinp"] == json!(PinpStatus::Inconclusive));
    let summary: Vec<Value> = w
        .n
        .iter()
        .map(|&n| {
            let at: Vec<&Value> = rows.iter().filter(|r| r["n"] == json!(n)).collect();
            let full = at.iter().filter(|r| r["full"] == json!(true)).count();
            let freq = if at.is_empty() { Value::Null } else { json!(full as f64 / at.len() as f64) };
            json!({ "n": n, "trials": cfg.trials, "e_n": at.len(), "full": full, "conditional_frequency": freq })
        })
        .collect();
    let mut text = if summary_only { String::new() } else { jsonl(&rows) };
    text.push_str(&jsonl(&[json!({ "summary": summary })]));
    Ok(Outcome { text, inconclusive })
}

fn cmd_lyapunov(w: &WalkArgs, csv: Option<&Path>) -> Out {
    let cfg = config(w, one_n(w)?)?;
    let est = estimate_lyapunov(&cfg)?;
    if let Some(path) = csv {
        let traj = sample_with_chain(&Chain::new(cfg.rank)?, &cfg, 0);
        fs::write(path, lyapunov_csv(&traj.items, cfg.rank, 1)?)?;
    }
    Ok(Outcome { text: doc(&est), inconclusive: false })
}

fn cmd_decompose(file: &Path) -> Out {
    let text = fs::read_to_string(file)?;
    let f = RoseMap::parse(&text)?;
    let dec = fold_decomposition(&f)?;
    let recomposed = dec.recompose()?;
    let power = match realize_power(&f) {
        Ok((p, seq)) => {
            let verified = RoseMap::from_sequence_capped(&seq, DEFAULT_SIZE_CAP)
                .ok()
                .zip(f.power(p).ok())
                .map(|(a, b)| a == b);
            json!({ "p": p, "sequence": seq.to_string(), "cyclically_admissible": true, "verified": verified })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    let receipt = json!({
        "rank": f.rank(),
        "nielsen_part": ttwalk::nielsen::NielsenSequence::new(dec.nielsen_part.clone(), f.rank())
            .map(|s| s.to_string())
            .unwrap_or_default(),
        "perm_part": dec.perm_part.to_string(),
        "recomposition_verified": recomposed == f,
        "realized_power": power,
    });
    Ok(Outcome { text: doc(&receipt), inconclusive: false })
}

fn cmd_seed_search(rank: usize, budget: usize, fixture: Option<&Path>) -> Out {
    let seed = find_seed_sequence(rank, budget)?;
    let line = format_seed_fixture(&[(rank, seed.clone())].into_iter().collect());
    if let Some(path) = fixture {
        fs::write(path, &line)?;
    }
    let v = json!({ "rank": rank, "length": seed.len(), "sequence": seed.to_string() });
    Ok(Outcome { text: doc(&v), inconclusive: false })
}

fn write_to(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (io, mut manifest) = match &cli.command {
        Command::Sample { walk, io, .. } | Command::EstimateEn { walk, io } | Command::Lyapunov { walk, io, .. } => {
            (io.clone(), manifest_for(&cli.command, Some(walk), None))
        }
        Command::PropertyG { walk, caps, io, .. } => (io.clone(), manifest_for(&cli.command, Some(walk), Some(caps.caps()))),
        Command::Decompose { io, .. } => (io.clone(), manifest_for(&cli.command, None, None)),
        Command::SeedSearch { rank, io, .. } => {
            let mut m = manifest_for(&cli.command, None, None);
            m.rank = Some(*rank);
            (io.clone(), m)
        }
    };
    let result = match &cli.command {
        Command::Sample { walk, emit_maps, .. } => cmd_sample(walk, emit_maps.as_deref()),
        Command::EstimateEn { walk, .. } => cmd_estimate_en(walk),
        Command::PropertyG { walk, caps, summary_only, .. } => cmd_property_g(walk, &caps.caps(), *summary_only),
        Command::Lyapunov { walk, csv, .. } => cmd_lyapunov(walk, csv.as_deref()),
        Command::Decompose { file, .. } => cmd_decompose(file),
        Command::SeedSearch { rank, budget, fixture, .. } => cmd_seed_search(*rank, *budget, fixture.as_deref()),
    };
    manifest.wall_time_ms = start.elapsed().as_millis();
    let m = serde_json::to_string(&manifest).expect("serializable") + "\n";
    let manifest_written = match &io.manifest {
        Some(p) => fs::write(p, &m),
        None => std::io::stderr().lock().write_all(m.as_bytes()),
    };
    let (code, msg) = match result {
        Ok(out) => match write_to(io.out.as_deref(), &out.text).and(manifest_written) {
            Ok(()) if out.inconclusive => (4, Some("some certificates are inconclusive at these caps".to_string())),
            Ok(()) => (0, None),
            Err(e) => (1, Some(e.to_string())),
        },
        Err(Failure::Usage(s)) => (2, Some(s)),
        Err(Failure::Precondition(s)) => (3, Some(s)),
        Err(Failure::Inconclusive(s)) => (4, Some(s)),
        Err(Failure::Io(s)) => (1, Some(s)),
    };
    if let Some(msg) = msg {
        eprintln!("ttwalk: {msg}");
    }
    ExitCode::from(code)
}

fn manifest_for(cmd: &Command, walk: Option<&WalkArgs>, caps: Option<Caps>) -> RunManifest {
    let name = match cmd {
        Command::Sample { .. } => "sample",
        Command::EstimateEn { .. } => "estimate-en",
        Command::PropertyG { .. } => "property-g",
        Command::Lyapunov { .. } => "lyapunov",
        Command::Decompose { .. } => "decompose",
        Command::SeedSearch { .. } => "seed-search",
    };
    RunManifest {
        command: name.into(),
        rank: walk.map(|w| w.rank),
        seed: walk.map(|w| w.seed),
        n: walk.map(|w| w.n.clone()).unwrap_or_default(),
        trials: walk.map(|w| w.trials),
        caps,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: 0,
    }
}
