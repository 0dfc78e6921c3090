//! CVaR training of ansatz parameters with derivative-free optimizers.
//!
//! Each evaluation simulates the circuit, samples conformations, scores
//! them classically, and returns the mean of the lowest alpha-fraction of
//! the energy multiset. Every bitstring ever measured enters a ledger with
//! its energy, so the best energy seen anywhere in training is available
//! afterwards. Restarts run independently from derived seeds.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use cobyla::{minimize, Func, RhoBeg, StopTols};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::lattice::LatticeKind;
use crate::sim::{simulate, AnsatzSpec, Backend, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvarMode {
    ShotSampled,
    ExactDistribution,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CvarConfig {
    pub alpha: f64,
    pub shots_per_eval: u64,
    pub mode: CvarMode,
}

impl Default for CvarConfig {
    fn default() -> Self {
        CvarConfig {
            alpha: 0.1,
            shots_per_eval: 1000,
            mode: CvarMode::ShotSampled,
        }
    }
}

impl CvarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.mode == CvarMode::ShotSampled
            && (self.alpha * self.shots_per_eval as f64) < 1.0
        {
            return Err(Error::Domain(
                "alpha * shots must yield at least one tail sample".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cobyla,
    NelderMead,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iter: usize,
    /// Initial trust-region radius (COBYLA) or simplex scale (Nelder-Mead).
    pub rho_beg: f64,
    /// Convergence tolerance on the trust-region radius / simplex spread.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Cobyla,
            max_iter: 5000,
            rho_beg: 1.0,
            tol: 1e-6,
            restarts: 10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Domain("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    pub backend: Backend,
    pub bond_cap: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            backend: Backend::Dense,
            bond_cap: crate::sim::DEFAULT_BOND_CAP,
        }
    }
}

/// Anything that maps a measured bitstring to a scalar energy.
pub trait BitstringEnergy: Sync {
    fn energy(&self, bits: &str) -> Result<f64>;
}

/// The real problem: a residue sequence on a lattice under an energy
/// parameter set.
#[derive(Debug, Clone)]
pub struct Problem {
    pub sequence: String,
    pub lattice: LatticeKind,
    pub params: EnergyParams,
}

impl Problem {
    pub fn qubit_count(&self) -> Result<usize> {
        crate::lattice::qubit_count(self.lattice, self.sequence.chars().count())
    }

    pub fn ansatz(&self, reps: usize) -> Result<AnsatzSpec> {
        AnsatzSpec::new(self.qubit_count()?, reps)
    }
}

impl BitstringEnergy for Problem {
    fn energy(&self, bits: &str) -> Result<f64> {
        Ok(total_energy(bits, &self.sequence, self.lattice, &self.params)?.e_total)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub energy: f64,
    pub first_seen_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
}

/// Everything one optimization run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub restart_index: usize,
    pub seed: u64,
    pub best_params: Vec<f64>,
    pub final_cvar: f64,
    pub cvar_trace: Vec<f64>,
    pub ledger: BTreeMap<String, LedgerEntry>,
    pub e_lowest: f64,
    pub termination: Termination,
}

/// Mean of the ceil(alpha * S) smallest values of a nonempty multiset.
pub fn cvar_cost(energies: &[f64], alpha: f64) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::Domain("CVaR of an empty multiset".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = ((alpha * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[..m].iter().sum::<f64>() / m as f64)
}

/// CVaR over the probability-weighted lower tail of measure alpha.
fn cvar_from_distribution(pairs: &mut [(f64, f64)], alpha: f64) -> f64 {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut remaining = alpha;
    let mut acc = 0.0;
    for &(e, p) in pairs.iter() {
        let w = p.min(remaining);
        acc += e * w;
        remaining -= w;
        if remaining <= 1e-15 {
            break;
        }
    }
    acc / (alpha - remaining.max(0.0)).max(1e-300)
}

/// One cost evaluation: simulate, sample (or take the exact distribution),
/// score each new bitstring, and return the CVaR over the energy multiset
/// together with the bitstrings first observed in this call.
pub fn evaluate_params<E: BitstringEnergy + ?Sized>(
    theta: &[f64],
    spec: &AnsatzSpec,
    energy_fn: &E,
    cvar: &CvarConfig,
    sim: &SimConfig,
    sample_seed: u64,
    cache: &mut HashMap<String, f64>,
) -> Result<(f64, Vec<String>)> {
    let state: QuantumState = simulate(spec, theta, sim.backend, sim.bond_cap)?;
    let mut new_bits = Vec::new();
    let mut lookup = |bits: &str, cache: &mut HashMap<String, f64>| -> Result<f64> {
        if let Some(&e) = cache.get(bits) {
            return Ok(e);
        }
        let e = energy_fn.energy(bits)?;
        cache.insert(bits.to_string(), e);
        new_bits.push(bits.to_string());
        Ok(e)
    };
    let cost = match cvar.mode {
        CvarMode::ShotSampled => {
            let samples = state.sample(cvar.shots_per_eval, sample_seed)?;
            let mut energies = Vec::with_capacity(samples.shots as usize);
            for (bits, count) in &samples.counts {
                let e = lookup(bits, cache)?;
                energies.extend(std::iter::repeat(e).take(*count as usize));
            }
            cvar_cost(&energies, cvar.alpha)?
        }
        CvarMode::ExactDistribution => {
            let dist = state.exact_distribution()?;
            let mut pairs = Vec::with_capacity(dist.len());
            for (bits, p) in &dist {
                let e = lookup(bits, cache)?;
                pairs.push((e, *p));
            }
            cvar_from_distribution(&mut pairs, cvar.alpha)
        }
    };
    Ok((cost, new_bits))
}

struct EvalState {
    iter: usize,
    trace: Vec<f64>,
    ledger: BTreeMap<String, LedgerEntry>,
    cache: HashMap<String, f64>,
    e_lowest: f64,
    rng: ChaCha8Rng,
    error: Option<Error>,
}

/// Run one derivative-free optimization from a random start.
pub fn optimize<E: BitstringEnergy + ?Sized>(
    energy_fn: &E,
    spec: &AnsatzSpec,
    cvar: &CvarConfig,
    opt: &OptimizerConfig,
    sim: &SimConfig,
    seed: u64,
    restart_index: usize,
) -> Result<RunRecord> {
    cvar.validate()?;
    opt.validate()?;
    let n = spec.parameter_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta0: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();

    let state = RefCell::new(EvalState {
        iter: 0,
        trace: Vec::new(),
        ledger: BTreeMap::new(),
        cache: HashMap::new(),
        e_lowest: f64::INFINITY,
        rng,
        error: None,
    });

    let objective = |theta: &[f64]| -> f64 {
        let mut st = state.borrow_mut();
        if st.error.is_some() {
            return f64::MAX;
        }
        let sample_seed = st.rng.gen::<u64>();
        let iter = st.iter;
        let result = evaluate_params(
            theta,
            spec,
            energy_fn,
            cvar,
            sim,
            sample_seed,
            &mut st.cache,
        );
        match result {
            Ok((cost, new_bits)) => {
                if !cost.is_finite() {
                    st.error = Some(Error::Optimizer(format!(
                        "non-finite cost {cost} at iteration {iter}"
                    )));
                    return f64::MAX;
                }
                for bits in new_bits {
                    let e = st.cache[&bits];
                    st.e_lowest = st.e_lowest.min(e);
                    st.ledger.insert(
                        bits,
                        LedgerEntry {
                            energy: e,
                            first_seen_iter: iter,
                        },
                    );
                }
                if st.trace.len() < opt.max_iter {
                    st.trace.push(cost);
                }
                st.iter += 1;
                cost
            }
            Err(e) => {
                st.error = Some(e);
                f64::MAX
            }
        }
    };

    let (best_params, final_cvar, termination) = match opt.method {
        Method::Cobyla => run_cobyla(&objective, &theta0, opt)?,
        Method::NelderMead => run_nelder_mead(&objective, &theta0, opt),
    };

    let st = state.into_inner();
    if let Some(e) = st.error {
        return Err(e);
    }
    if st.ledger.is_empty() {
        return Err(Error::Optimizer("no evaluations recorded".into()));
    }
    Ok(RunRecord {
        restart_index,
        seed,
        best_params,
        final_cvar,
        cvar_trace: st.trace,
        ledger: st.ledger,
        e_lowest: st.e_lowest,
        termination,
    })
}

fn run_cobyla<F: Fn(&[f64]) -> f64>(
    objective: &F,
    theta0: &[f64],
    opt: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, Termination)> {
    let n = theta0.len();
    // Angles are 2*pi periodic; generous bounds keep COBYLA unconstrained
    // in practice while satisfying the bounded interface.
    let bounds = vec![(-4.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI); n];
    let cons: Vec<&dyn Func<()>> = vec![];
    let f = |x: &[f64], _: &mut ()| objective(x);
    let stop = StopTols {
        xtol_abs: vec![opt.tol; n],
        ..StopTols::default()
    };
    match minimize(
        f,
        theta0,
        &bounds,
        &cons,
        (),
        opt.max_iter,
        RhoBeg::All(opt.rho_beg),
        Some(stop),
    ) {
        Ok((status, x, y)) => {
            let termination = match status {
                cobyla::SuccessStatus::MaxEvalReached => Termination::MaxIter,
                _ => Termination::Converged,
            };
            Ok((x, y, termination))
        }
        Err((status, x, y)) => match status {
            // Roundoff-limited still yields a usable point.
            cobyla::FailStatus::RoundoffLimited => Ok((x, y, Termination::Converged)),
            other => Err(Error::Optimizer(format!("COBYLA failed: {other:?}"))),
        },
    }
}

/// Plain Nelder-Mead with standard coefficients; fallback method behind
/// the same interface.
fn run_nelder_mead<F: Fn(&[f64]) -> f64>(
    objective: &F,
    theta0: &[f64],
    opt: &OptimizerConfig,
) -> (Vec<f64>, f64, Termination) {
    let n = theta0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        objective(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let y0 = eval(theta0, &mut evals);
    simplex.push((theta0.to_vec(), y0));
    for i in 0..n {
        if evals >= opt.max_iter {
            break;
        }
        let mut x = theta0.to_vec();
        x[i] += opt.rho_beg;
        let y = eval(&x, &mut evals);
        simplex.push((x, y));
    }
    let mut termination = Termination::MaxIter;
    while evals < opt.max_iter && simplex.len() == n + 1 {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread < opt.tol {
            termination = Termination::Converged;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let yr = eval(&reflect, &mut evals);
        if yr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let ye = eval(&expand, &mut evals);
            simplex[n] = if ye < yr { (expand, ye) } else { (reflect, yr) };
        } else if yr < simplex[n - 1].1 {
            simplex[n] = (reflect, yr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let yc = eval(&contract, &mut evals);
            if yc < worst.1 {
                simplex[n] = (contract, yc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        vertex.0[i] = best[i] + 0.5 * (vertex.0[i] - best[i]);
                    }
                    if evals >= opt.max_iter {
                        break;
                    }
                    vertex.1 = eval(&vertex.0.clone(), &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (x, y) = simplex.remove(0);
    (x, y, termination)
}

/// Cross-restart summary statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartSummary {
    pub final_cvars: Vec<f64>,
    pub mean_cvar: f64,
    pub std_err_cvar: f64,
    pub min_cvar: f64,
    pub best_run: usize,
    pub pooled_e_lowest: f64,
}

pub fn summarize(records: &[RunRecord]) -> RestartSummary {
    let final_cvars: Vec<f64> = records.iter().map(|r| r.final_cvar).collect();
    let n = final_cvars.len() as f64;
    let mean = final_cvars.iter().sum::<f64>() / n;
    let std_err = if final_cvars.len() > 1 {
        let var = final_cvars.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        var.sqrt() / n.sqrt()
    } else {
        0.0
    };
    let (best_run, min_cvar) = final_cvars
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let pooled_e_lowest = records
        .iter()
        .map(|r| r.e_lowest)
        .fold(f64::INFINITY, f64::min);
    RestartSummary {
        final_cvars,
        mean_cvar: mean,
        std_err_cvar: std_err,
        min_cvar,
        best_run,
        pooled_e_lowest,
    }
}

/// Independent seeded runs; restart seeds derive from the master seed.
pub fn multi_restart<E: BitstringEnergy + ?Sized>(
    energy_fn: &E,
    spec: &AnsatzSpec,
    cvar: &CvarConfig,
    opt: &OptimizerConfig,
    sim: &SimConfig,
) -> Result<(Vec<RunRecord>, RestartSummary)> {
    opt.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(opt.seed);
    let seeds: Vec<u64> = (0..opt.restarts).map(|_| master.gen()).collect();
    let records: Vec<RunRecord> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| optimize(energy_fn, spec, cvar, opt, sim, seed, i))
        .collect::<Result<_>>()?;
    let summary = summarize(&records);
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct TableEnergy(BTreeMap<String, f64>);

    impl BitstringEnergy for TableEnergy {
        fn energy(&self, bits: &str) -> Result<f64> {
            self.0
                .get(bits)
                .copied()
                .ok_or_else(|| Error::Domain(format!("no energy for '{bits}'")))
        }
    }

    #[test]
    fn cvar_examples() {
        let e = [-4.0, -4.0, -3.0, -1.0, 0.0, 0.0, 2.0, 5.0, 7.0, 9.0];
        assert_abs_diff_eq!(cvar_cost(&e, 0.1).unwrap(), -4.0);
        assert_abs_diff_eq!(cvar_cost(&e, 0.3).unwrap(), -11.0 / 3.0, epsilon = 1e-12);
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        assert_abs_diff_eq!(cvar_cost(&e, 1.0).unwrap(), mean, epsilon = 1e-12);
        assert!(cvar_cost(&[], 0.1).is_err());
    }

    #[test]
    fn cvar_bounds_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let len = rng.gen_range(1..50);
            let e: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            for alpha in [0.1, 0.5, 1.0] {
                let c = cvar_cost(&e, alpha).unwrap();
                assert!(c >= min - 1e-12 && c <= mean + 1e-12);
            }
        }
    }

    #[test]
    fn exact_distribution_alpha_one_is_expectation() {
        let spec = AnsatzSpec::new(2, 1).unwrap();
        let theta = [std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0];
        let table = TableEnergy(BTreeMap::from([
            ("00".to_string(), 2.0),
            ("01".to_string(), 0.0),
            ("10".to_string(), 0.0),
            ("11".to_string(), -6.0),
        ]));
        let cvar = CvarConfig {
            alpha: 1.0,
            shots_per_eval: 1,
            mode: CvarMode::ExactDistribution,
        };
        let mut cache = HashMap::new();
        let (cost, _) = evaluate_params(
            &theta,
            &spec,
            &table,
            &cvar,
            &SimConfig::default(),
            0,
            &mut cache,
        )
        .unwrap();
        // Bell state: E = 0.5 * 2 + 0.5 * (-6).
        assert_abs_diff_eq!(cost, -2.0, epsilon = 1e-10);
    }

    #[test]
    fn theta_zero_cost_is_all_zeros_energy() {
        let spec = AnsatzSpec::new(3, 1).unwrap();
        let table = TableEnergy(
            (0..8)
                .map(|i| (format!("{i:03b}"), i as f64 - 3.5))
                .collect(),
        );
        let cvar = CvarConfig::default();
        let mut cache = HashMap::new();
        let (cost, _) = evaluate_params(
            &[0.0; 6],
            &spec,
            &table,
            &cvar,
            &SimConfig::default(),
            1234,
            &mut cache,
        )
        .unwrap();
        assert_abs_diff_eq!(cost, -3.5);
    }

    #[test]
    fn single_qubit_toy_converges() {
        // One Ry pair on one qubit; E(1) < E(0), expectation cost.
        let table = TableEnergy(BTreeMap::from([
            ("0".to_string(), 0.0),
            ("1".to_string(), -1.0),
        ]));
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let cvar = CvarConfig {
            alpha: 1.0,
            shots_per_eval: 1,
            mode: CvarMode::ExactDistribution,
        };
        let opt = OptimizerConfig {
            restarts: 3,
            max_iter: 500,
            ..OptimizerConfig::default()
        };
        let (_, summary) =
            multi_restart(&table, &spec, &cvar, &opt, &SimConfig::default()).unwrap();
        assert!(
            (summary.min_cvar - (-1.0)).abs() < 1e-3,
            "min cvar {}",
            summary.min_cvar
        );
    }

    #[test]
    fn nelder_mead_matches_interface() {
        let table = TableEnergy(BTreeMap::from([
            ("0".to_string(), 0.0),
            ("1".to_string(), -1.0),
        ]));
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let cvar = CvarConfig {
            alpha: 1.0,
            shots_per_eval: 1,
            mode: CvarMode::ExactDistribution,
        };
        let opt = OptimizerConfig {
            method: Method::NelderMead,
            restarts: 3,
            max_iter: 500,
            ..OptimizerConfig::default()
        };
        let (_, summary) =
            multi_restart(&table, &spec, &cvar, &opt, &SimConfig::default()).unwrap();
        assert!((summary.min_cvar - (-1.0)).abs() < 1e-2);
    }

    #[test]
    fn max_iter_zero_rejected() {
        let table = TableEnergy(BTreeMap::from([("0".to_string(), 0.0)]));
        let spec = AnsatzSpec::new(1, 1).unwrap();
        let opt = OptimizerConfig {
            max_iter: 0,
            ..OptimizerConfig::default()
        };
        assert!(optimize(
            &table,
            &spec,
            &CvarConfig::default(),
            &opt,
            &SimConfig::default(),
            1,
            0
        )
        .is_err());
    }

    #[test]
    fn determinism_and_ledger_consistency() {
        let table = TableEnergy(
            (0..8)
                .map(|i| (format!("{i:03b}"), ((i * 7) % 5) as f64 - 2.0))
                .collect(),
        );
        let spec = AnsatzSpec::new(3, 1).unwrap();
        let cvar = CvarConfig {
            shots_per_eval: 100,
            ..CvarConfig::default()
        };
        let opt = OptimizerConfig {
            max_iter: 50,
            ..OptimizerConfig::default()
        };
        let sim = SimConfig::default();
        let a = optimize(&table, &spec, &cvar, &opt, &sim, 7, 0).unwrap();
        let b = optimize(&table, &spec, &cvar, &opt, &sim, 7, 0).unwrap();
        assert_eq!(a.cvar_trace, b.cvar_trace);
        assert_eq!(a.ledger.len(), b.ledger.len());
        let ledger_min = a
            .ledger
            .values()
            .map(|e| e.energy)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(a.e_lowest, ledger_min);
        assert!(a.cvar_trace.len() <= opt.max_iter);
    }

    #[test]
    fn restart_summary_statistics() {
        // Standard error cross-check on [1, 2, 3, 4].
        let records: Vec<RunRecord> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| RunRecord {
                restart_index: i,
                seed: i as u64,
                best_params: vec![],
                final_cvar: v,
                cvar_trace: vec![v],
                ledger: BTreeMap::from([(
                    "0".to_string(),
                    LedgerEntry {
                        energy: v,
                        first_seen_iter: 0,
                    },
                )]),
                e_lowest: v,
                termination: Termination::Converged,
            })
            .collect();
        let s = summarize(&records);
        assert_abs_diff_eq!(s.mean_cvar, 2.5);
        let expected = (5.0f64 / 3.0).sqrt() / 2.0;
        assert_abs_diff_eq!(s.std_err_cvar, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(s.min_cvar, 1.0);
        assert_eq!(s.best_run, 0);
        assert_abs_diff_eq!(s.pooled_e_lowest, 1.0);
    }

    #[test]
    fn permuting_records_keeps_pooled_stats() {
        let make = |vals: &[f64]| -> Vec<RunRecord> {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| RunRecord {
                    restart_index: i,
                    seed: i as u64,
                    best_params: vec![],
                    final_cvar: v,
                    cvar_trace: vec![],
                    ledger: BTreeMap::new(),
                    e_lowest: v - 1.0,
                    termination: Termination::Converged,
                })
                .collect()
        };
        let a = summarize(&make(&[3.0, 1.0, 2.0]));
        let b = summarize(&make(&[1.0, 2.0, 3.0]));
        assert_eq!(a.mean_cvar, b.mean_cvar);
        assert_eq!(a.std_err_cvar, b.std_err_cvar);
        assert_eq!(a.min_cvar, b.min_cvar);
        assert_eq!(a.pooled_e_lowest, b.pooled_e_lowest);
    }
}
