//! Command-line front end for the lattice folding pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use latfold::energy::{ContactMatrix, EnergyParams, MJ_1996_CSV};
use latfold::error::{Error, Result};
use latfold::lattice::{qubit_count, LatticeKind};
use latfold::metrics::{
    average_relative_error, best_case_relative_error, energy_histogram, valid_fraction,
    MetricsReport,
};
use latfold::optimize::{
    cvar_cost, multi_restart, BitstringEnergy, CvarConfig, CvarMode, Method, OptimizerConfig,
    Problem, RunRecord, SimConfig,
};
use latfold::oracle::{ground_state, OracleKey, StoredOracle};
use latfold::registry;
use latfold::runio::{
    atomic_write, load_cached_oracle, sha256_hex, store_cached_oracle, write_json, RunDir,
};
use latfold::sim::{simulate, AnsatzSpec, Backend};

/// Normalized-energy bin width shared by circuit and baseline histograms.
const HIST_BIN_WIDTH: f64 = 0.05;

#[derive(Parser)]
#[command(name = "latfold", version, about = "Lattice protein folding by variational circuit sampling")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in benchmark instances with per-lattice qubit counts.
    Instances,
    /// Exhaustively compute and cache the exact ground state.
    GroundState(RunArgs),
    /// Train the ansatz by CVaR minimization and persist the run directory.
    Train(RunArgs),
    /// Re-sample a finished run and emit metrics and histograms.
    Evaluate(EvalArgs),
    /// Sample uniformly random bitstrings as an untrained control.
    Baseline(RunArgs),
}

#[derive(Parser, Debug, Default)]
struct RunArgs {
    /// Flat key = value config file; command-line flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raw one-letter residue sequence.
    #[arg(long)]
    seq: Option<String>,
    /// Benchmark instance id from the registry.
    #[arg(long)]
    pdb_id: Option<String>,
    #[arg(long)]
    lattice: Option<String>,
    /// Highest neighbor order entering the interaction energy (1..=3).
    #[arg(long)]
    knn: Option<usize>,
    /// Drop interaction terms between chain-bonded neighbors.
    #[arg(long)]
    exclude_bonded: bool,
    /// CVaR tail fraction.
    #[arg(long)]
    alpha: Option<f64>,
    /// Shots for evaluation and baseline sampling.
    #[arg(long)]
    shots: Option<u64>,
    /// Shots per cost evaluation during training.
    #[arg(long)]
    train_shots: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    bond_cap: Option<usize>,
    /// Contact matrix CSV; defaults to the embedded MJ table.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Entangling repetitions of the ansatz.
    #[arg(long)]
    reps: Option<usize>,
    /// Uniform override for both penalty weights.
    #[arg(long)]
    lambda: Option<f64>,
    /// Optimizer: cobyla or nelder-mead.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Parser, Debug)]
struct EvalArgs {
    /// Run directory written by the train command.
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    shots: Option<u64>,
    /// Override the per-restart sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding cached exhaustive-search results.
    #[arg(long)]
    oracle_cache: Option<PathBuf>,
}

/// Everything a run needs, after merging defaults, config file, and flags.
struct Resolved {
    pdb_id: Option<String>,
    sequence: String,
    lattice: LatticeKind,
    max_k: usize,
    exclude_bonded: bool,
    alpha: f64,
    shots: u64,
    train_shots: u64,
    restarts: usize,
    max_iter: usize,
    seed: u64,
    backend: Backend,
    bond_cap: usize,
    matrix_path: Option<PathBuf>,
    matrix_text: String,
    out: Option<PathBuf>,
    reps: usize,
    lambda: Option<f64>,
    method: Method,
}

impl Resolved {
    fn matrix_sha256(&self) -> String {
        sha256_hex(&self.matrix_text)
    }

    fn energy_params(&self) -> Result<EnergyParams> {
        let contact = ContactMatrix::from_csv(&self.matrix_text)?;
        let mut params = EnergyParams::new(contact, self.sequence.len(), self.max_k);
        params.exclude_bonded = self.exclude_bonded;
        if let Some(lambda) = self.lambda {
            params.lambda_olap = lambda;
            params.lambda_redun = lambda;
        }
        params.validate_sequence(&self.sequence)?;
        Ok(params)
    }

    fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            sequence: self.sequence.clone(),
            lattice: self.lattice,
            params: self.energy_params()?,
        })
    }

    fn oracle_key(&self) -> OracleKey {
        OracleKey {
            sequence: self.sequence.clone(),
            lattice: self.lattice,
            max_k: self.max_k,
            exclude_bonded: self.exclude_bonded,
            matrix_sha256: self.matrix_sha256(),
        }
    }
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            continue; // section headers are cosmetic
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parameter(format!(
                "{}:{}: expected 'key = value'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::Parameter(format!("bad value for '{key}': {e}")))
}

fn resolve(args: &RunArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let from_file = |key: &str| file.get(key).map(String::as_str);
    macro_rules! merged {
        ($flag:expr, $key:literal) => {
            match &$flag {
                Some(v) => Some(v.clone()),
                None => from_file($key).map(|s| s.to_string()),
            }
        };
    }
    macro_rules! merged_parse {
        ($flag:expr, $key:literal) => {
            match $flag {
                Some(v) => Some(v),
                None => from_file($key).map(|s| parse_value($key, s)).transpose()?,
            }
        };
    }

    let pdb_id = merged!(args.pdb_id, "pdb_id");
    let mut sequence = merged!(args.seq, "seq");
    let instance = pdb_id.as_deref().map(registry::find).transpose()?;
    if let Some(inst) = instance {
        match &sequence {
            Some(seq) if seq != inst.sequence => {
                return Err(Error::Parameter(format!(
                    "--seq disagrees with registry sequence for {}",
                    inst.pdb_id
                )));
            }
            _ => sequence = Some(inst.sequence.to_string()),
        }
    }
    let sequence = sequence
        .ok_or_else(|| Error::Parameter("one of --seq or --pdb-id is required".into()))?
        .to_ascii_uppercase();

    let lattice = merged!(args.lattice, "lattice")
        .ok_or_else(|| Error::Parameter("--lattice is required".into()))?;
    let lattice = LatticeKind::parse(&lattice).map_err(|e| Error::Parameter(e.to_string()))?;
    if let Some(inst) = instance {
        if !inst.supports(lattice) {
            return Err(Error::Parameter(format!(
                "instance {} is not studied on the {lattice} lattice",
                inst.pdb_id
            )));
        }
    }

    let max_k = merged_parse!(args.knn, "knn").unwrap_or(1);
    if !(1..=3).contains(&max_k) {
        return Err(Error::Parameter(format!("knn must be 1..=3, got {max_k}")));
    }
    let exclude_bonded = args.exclude_bonded
        || from_file("exclude_bonded")
            .map(|s| parse_value::<bool>("exclude_bonded", s))
            .transpose()?
            .unwrap_or(false);

    let backend = merged!(args.backend, "backend").unwrap_or_else(|| "dense".to_string());
    let backend = Backend::parse(&backend).map_err(|e| Error::Parameter(e.to_string()))?;
    let method = match merged!(args.method, "method").as_deref() {
        None | Some("cobyla") => Method::Cobyla,
        Some("nelder-mead") => Method::NelderMead,
        Some(other) => {
            return Err(Error::Parameter(format!("unknown method '{other}'")));
        }
    };

    let matrix_path = args
        .matrix
        .clone()
        .or_else(|| from_file("matrix").map(PathBuf::from));
    let matrix_text = match &matrix_path {
        Some(p) => fs::read_to_string(p)?,
        None => MJ_1996_CSV.to_string(),
    };

    let alpha = merged_parse!(args.alpha, "alpha").unwrap_or(0.1);
    Ok(Resolved {
        pdb_id,
        sequence,
        lattice,
        max_k,
        exclude_bonded,
        alpha,
        shots: merged_parse!(args.shots, "shots").unwrap_or(100_000),
        train_shots: merged_parse!(args.train_shots, "train_shots").unwrap_or(1000),
        restarts: merged_parse!(args.restarts, "restarts").unwrap_or(10),
        max_iter: merged_parse!(args.max_iter, "max_iter").unwrap_or(5000),
        seed: merged_parse!(args.seed, "seed").unwrap_or(0),
        backend,
        bond_cap: merged_parse!(args.bond_cap, "bond_cap")
            .unwrap_or(latfold::sim::DEFAULT_BOND_CAP),
        matrix_path,
        matrix_text,
        out: args.out.clone().or_else(|| from_file("out").map(PathBuf::from)),
        reps: merged_parse!(args.reps, "reps").unwrap_or(1),
        lambda: merged_parse!(args.lambda, "lambda"),
        method,
    })
}

/// Run parameters persisted next to every training run; evaluation rebuilds
/// the whole pipeline from this file alone.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    pdb_id: Option<String>,
    sequence: String,
    lattice: LatticeKind,
    max_k: usize,
    exclude_bonded: bool,
    lambda_olap: f64,
    lambda_redun: f64,
    matrix_path: Option<PathBuf>,
    matrix_sha256: String,
    reps: usize,
    m_qubits: usize,
    cvar: CvarConfig,
    optimizer: OptimizerConfig,
    sim: SimConfig,
    oracle_cache: PathBuf,
    eval_shots: u64,
}

fn cmd_instances() {
    println!(
        "{:<6} {:>3}  {:<28} {:>6} {:>5} {:>5}",
        "id", "n", "sequence", "tetra", "bcc", "fcc"
    );
    for inst in registry::INSTANCES {
        let cell = |kind| {
            if inst.supports(kind) {
                qubit_count(kind, inst.n_residues()).unwrap().to_string()
            } else {
                "-".to_string()
            }
        };
        println!(
            "{:<6} {:>3}  {:<28} {:>6} {:>5} {:>5}",
            inst.pdb_id,
            inst.n_residues(),
            inst.sequence,
            cell(LatticeKind::Tetra),
            cell(LatticeKind::Bcc),
            cell(LatticeKind::Fcc),
        );
    }
}

fn default_oracle_cache() -> PathBuf {
    PathBuf::from("oracle-cache")
}

fn cmd_ground_state(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let cache_dir = cfg.out.clone().unwrap_or_else(default_oracle_cache);
    let key = cfg.oracle_key();
    if let Some(stored) = load_cached_oracle(&cache_dir, &key) {
        println!("cache hit: {} on {}", cfg.sequence, cfg.lattice);
        print_oracle(&stored);
        return Ok(());
    }
    let params = cfg.energy_params()?;
    let result = ground_state(&cfg.sequence, cfg.lattice, &params)?;
    let stored = StoredOracle { key, result };
    store_cached_oracle(&cache_dir, &stored)?;
    println!("cache miss: computed {} on {}", cfg.sequence, cfg.lattice);
    print_oracle(&stored);
    Ok(())
}

fn print_oracle(stored: &StoredOracle) {
    let r = &stored.result;
    println!("e_gs = {}", r.e_gs);
    println!(
        "argmin bitstrings ({}): {}",
        r.argmin_bitstrings.len(),
        r.argmin_bitstrings.join(" ")
    );
    println!(
        "states enumerated = {}, pruned = {}, wall time = {:.3}s",
        r.states_enumerated, r.states_pruned, r.wall_time_secs
    );
}

fn cmd_train(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let problem = cfg.problem()?;
    let spec = problem.ansatz(cfg.reps)?;
    let cvar = CvarConfig {
        alpha: cfg.alpha,
        shots_per_eval: cfg.train_shots,
        mode: CvarMode::ShotSampled,
    };
    let opt = OptimizerConfig {
        method: cfg.method,
        max_iter: cfg.max_iter,
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..OptimizerConfig::default()
    };
    let sim = SimConfig {
        backend: cfg.backend,
        bond_cap: cfg.bond_cap,
    };
    let (records, summary) = multi_restart(&problem, &spec, &cvar, &opt, &sim)?;

    let run = RunDir::new(cfg.out.clone().unwrap_or_else(|| PathBuf::from("run")));
    let manifest = Manifest {
        pdb_id: cfg.pdb_id.clone(),
        sequence: cfg.sequence.clone(),
        lattice: cfg.lattice,
        max_k: cfg.max_k,
        exclude_bonded: cfg.exclude_bonded,
        lambda_olap: problem.params.lambda_olap,
        lambda_redun: problem.params.lambda_redun,
        matrix_path: cfg.matrix_path.clone(),
        matrix_sha256: cfg.matrix_sha256(),
        reps: cfg.reps,
        m_qubits: spec.m_qubits,
        cvar,
        optimizer: opt,
        sim,
        oracle_cache: default_oracle_cache(),
        eval_shots: cfg.shots,
    };
    run.write_manifest(&manifest)?;
    for record in &records {
        run.write_restart(record)?;
    }
    run.write_summary(&summary)?;
    println!(
        "trained {} on {} ({} qubits, {} restarts)",
        cfg.sequence, cfg.lattice, spec.m_qubits, cfg.restarts
    );
    println!(
        "mean final CVaR = {} +/- {}, min = {} (restart {}), e_lowest = {}",
        summary.mean_cvar,
        summary.std_err_cvar,
        summary.min_cvar,
        summary.best_run,
        summary.pooled_e_lowest
    );
    println!("run directory: {}", run.root.display());
    Ok(())
}

fn load_manifest(run_dir: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(run_dir.join("manifest.json"))?;
    Ok(serde_json::from_str(&text)?)
}

fn manifest_problem(manifest: &Manifest) -> Result<Problem> {
    let matrix_text = match &manifest.matrix_path {
        Some(p) => fs::read_to_string(p)?,
        None => MJ_1996_CSV.to_string(),
    };
    if sha256_hex(&matrix_text) != manifest.matrix_sha256 {
        return Err(Error::Parameter(
            "contact matrix content changed since training (hash mismatch)".into(),
        ));
    }
    let contact = ContactMatrix::from_csv(&matrix_text)?;
    let mut params = EnergyParams::new(contact, manifest.sequence.len(), manifest.max_k);
    params.exclude_bonded = manifest.exclude_bonded;
    params.lambda_olap = manifest.lambda_olap;
    params.lambda_redun = manifest.lambda_redun;
    Ok(Problem {
        sequence: manifest.sequence.clone(),
        lattice: manifest.lattice,
        params,
    })
}

/// Cross-restart statistics of the re-sampled CVaR values.
#[derive(Debug, Serialize)]
struct EvaluationSummary {
    shots: u64,
    e_gs: f64,
    c_cvars: Vec<f64>,
    mean_cvar: f64,
    std_err_cvar: f64,
    min_cvar: f64,
    are: f64,
    bcre: f64,
    pooled_e_lowest: f64,
}

fn cmd_evaluate(args: &EvalArgs) -> Result<()> {
    let manifest = load_manifest(&args.run)?;
    let problem = manifest_problem(&manifest)?;
    let cache_dir = args
        .oracle_cache
        .clone()
        .unwrap_or_else(|| manifest.oracle_cache.clone());
    let key = OracleKey {
        sequence: manifest.sequence.clone(),
        lattice: manifest.lattice,
        max_k: manifest.max_k,
        exclude_bonded: manifest.exclude_bonded,
        matrix_sha256: manifest.matrix_sha256.clone(),
    };
    let oracle = load_cached_oracle(&cache_dir, &key).ok_or_else(|| {
        Error::Parameter(format!(
            "no cached exhaustive-search result in {} for this run; \
             run `latfold ground-state` with matching settings first",
            cache_dir.display()
        ))
    })?;
    let e_gs = oracle.result.e_gs;
    let shots = args.shots.unwrap_or(manifest.eval_shots);
    let spec = AnsatzSpec::new(manifest.m_qubits, manifest.reps)?;

    let mut c_cvars = Vec::new();
    let mut e_lowests = Vec::new();
    for index in 0..manifest.optimizer.restarts {
        let dir = args.run.join(format!("restart_{index:02}"));
        let text = fs::read_to_string(dir.join("params.json"))?;
        let record: RunRecord = serde_json::from_str(&text)?;
        let state = simulate(
            &spec,
            &record.best_params,
            manifest.sim.backend,
            manifest.sim.bond_cap,
        )?;
        let samples = state.sample(shots, args.seed.unwrap_or(record.seed))?;

        let mut energies = Vec::with_capacity(shots as usize);
        for (bits, count) in &samples.counts {
            let e = problem.energy(bits)?;
            energies.extend(std::iter::repeat(e).take(*count as usize));
        }
        let c_cvar = cvar_cost(&energies, manifest.cvar.alpha)?;
        let e_lowest = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let report = MetricsReport {
            are: average_relative_error(&[c_cvar], e_gs)?,
            bcre: best_case_relative_error(&[e_lowest], e_gs)?,
            e_gs,
            c_cvar,
            e_lowest,
            n_valid_fraction: valid_fraction(&samples, &problem)?,
        };
        write_json(&dir.join("metrics.json"), &report)?;

        let all = energy_histogram(&samples, &problem, e_gs, HIST_BIN_WIDTH, false)?;
        let valid = energy_histogram(&samples, &problem, e_gs, HIST_BIN_WIDTH, true)?;
        let mut csv = String::from("bin_left,probability,probability_valid\n");
        for (bin, p) in &all {
            let pv = valid.get(bin).copied().unwrap_or(0.0);
            csv.push_str(&format!("{bin},{p},{pv}\n"));
        }
        atomic_write(&dir.join("hist.csv"), &csv)?;

        c_cvars.push(c_cvar);
        e_lowests.push(e_lowest);
    }

    let n = c_cvars.len() as f64;
    let mean = c_cvars.iter().sum::<f64>() / n;
    let std_err = if c_cvars.len() > 1 {
        let var = c_cvars.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        var.sqrt() / n.sqrt()
    } else {
        0.0
    };
    let summary = EvaluationSummary {
        shots,
        e_gs,
        mean_cvar: mean,
        std_err_cvar: std_err,
        min_cvar: c_cvars.iter().copied().fold(f64::INFINITY, f64::min),
        are: average_relative_error(&c_cvars, e_gs)?,
        bcre: best_case_relative_error(&e_lowests, e_gs)?,
        pooled_e_lowest: e_lowests.iter().copied().fold(f64::INFINITY, f64::min),
        c_cvars,
    };
    write_json(&args.run.join("evaluation.json"), &summary)?;
    println!(
        "evaluated {} restarts at {} shots: ARE = {}, BCRE = {}",
        manifest.optimizer.restarts, shots, summary.are, summary.bcre
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct BaselineSummary {
    shots: u64,
    seed: u64,
    mean_energy: f64,
    min_energy: f64,
    valid_fraction: f64,
    e_gs: Option<f64>,
}

fn cmd_baseline(args: &RunArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let problem = cfg.problem()?;
    let energies = latfold::metrics::random_baseline(
        &problem,
        cfg.lattice,
        cfg.sequence.len(),
        cfg.shots,
        cfg.seed,
    )?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("baseline"));

    let mut csv = String::from("shot,energy\n");
    for (i, e) in energies.iter().enumerate() {
        csv.push_str(&format!("{i},{e}\n"));
    }
    atomic_write(&out.join("baseline_energies.csv"), &csv)?;

    // A cached exact ground state enables the normalized histogram with the
    // same bin edges the evaluate command uses.
    let e_gs = load_cached_oracle(&default_oracle_cache(), &cfg.oracle_key())
        .map(|stored| stored.result.e_gs);
    if let Some(e_gs) = e_gs {
        let mut bins: BTreeMap<i64, f64> = BTreeMap::new();
        for e in &energies {
            let bin = ((e / e_gs.abs()) / HIST_BIN_WIDTH).floor() as i64;
            *bins.entry(bin).or_insert(0.0) += 1.0 / energies.len() as f64;
        }
        let mut csv = String::from("bin_left,probability\n");
        for (bin, p) in &bins {
            csv.push_str(&format!("{:.4},{p}\n", *bin as f64 * HIST_BIN_WIDTH));
        }
        atomic_write(&out.join("baseline_hist.csv"), &csv)?;
    }

    let valid = energies.iter().filter(|&&e| e < 0.0).count() as f64 / energies.len() as f64;
    let summary = BaselineSummary {
        shots: cfg.shots,
        seed: cfg.seed,
        mean_energy: energies.iter().sum::<f64>() / energies.len() as f64,
        min_energy: energies.iter().copied().fold(f64::INFINITY, f64::min),
        valid_fraction: valid,
        e_gs,
    };
    write_json(&out.join("baseline.json"), &summary)?;
    println!(
        "baseline for {} on {}: mean energy = {}, min = {}, valid fraction = {}",
        cfg.sequence, cfg.lattice, summary.mean_energy, summary.min_energy, valid
    );
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Codec(_) | Error::Parameter(_) => 2,
        Error::Resource(_) => 3,
        Error::Optimizer(_) | Error::Io(_) | Error::Json(_) => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Instances => {
            cmd_instances();
            Ok(())
        }
        Cmd::GroundState(args) => cmd_ground_state(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Baseline(args) => cmd_baseline(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
