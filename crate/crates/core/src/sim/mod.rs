//! Real-amplitude circuit simulation.
//!
//! The circuit is Ry rotation layers separated by a reverse-linear CNOT
//! staircase; both gates are real, so amplitudes stay real throughout.
//! Two exact backends are provided: a dense statevector for small widths
//! and a nearest-neighbor MPS for large ones. With a single entangling
//! layer the staircase crosses each bond once, so the MPS is exact at
//! bond dimension 2.

mod dense;
mod mps;

pub use dense::DenseState;
pub use mps::MpsState;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest circuit the dense backend will attempt by default.
pub const DENSE_QUBIT_LIMIT: usize = 28;
/// Default MPS bond cap; exact for staircase circuits with reps <= 2.
pub const DEFAULT_BOND_CAP: usize = 16;
/// Discarded singular-value weight below which truncation is silent.
pub const MPS_TRUNCATION_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    Mps,
}

impl Backend {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(Backend::Dense),
            "mps" => Ok(Backend::Mps),
            other => Err(Error::Domain(format!("unknown backend '{other}'"))),
        }
    }
}

/// Circuit shape: M qubits, L entangling repetitions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub m_qubits: usize,
    pub reps: usize,
}

impl AnsatzSpec {
    pub fn new(m_qubits: usize, reps: usize) -> Result<Self> {
        if m_qubits < 1 || reps < 1 {
            return Err(Error::Domain(
                "ansatz needs at least one qubit and one repetition".into(),
            ));
        }
        Ok(AnsatzSpec { m_qubits, reps })
    }

    pub fn parameter_count(&self) -> usize {
        (self.reps + 1) * self.m_qubits
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.reps * (self.m_qubits.saturating_sub(1))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(Error::Domain(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                theta.len()
            )));
        }
        Ok(())
    }
}

/// An exact simulated state on either backend.
pub enum QuantumState {
    Dense(DenseState),
    Mps(MpsState),
}

/// Measurement counts from one sampling pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleSet {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (bits, count) in &self.counts {
            out.push_str(&format!("{bits},{count}\n"));
        }
        out
    }
}

/// Run the ansatz circuit and return the exact output state.
///
/// Gate order per repetition: the CNOT staircase (control i, target i+1)
/// applied from i = M-2 down to 0, then an Ry layer. An initial Ry layer
/// precedes the first repetition. Parameter layer r uses theta[r*M .. (r+1)*M].
pub fn simulate(
    spec: &AnsatzSpec,
    theta: &[f64],
    backend: Backend,
    bond_cap: usize,
) -> Result<QuantumState> {
    spec.check_theta(theta)?;
    let m = spec.m_qubits;
    match backend {
        Backend::Dense => {
            if m > DENSE_QUBIT_LIMIT {
                return Err(Error::Resource(format!(
                    "dense backend limited to {DENSE_QUBIT_LIMIT} qubits, requested {m}"
                )));
            }
            let mut state = DenseState::zero(m);
            run_circuit(spec, theta, &mut state);
            Ok(QuantumState::Dense(state))
        }
        Backend::Mps => {
            if bond_cap < 2 {
                return Err(Error::Domain("bond cap must be at least 2".into()));
            }
            let mut state = MpsState::zero(m, bond_cap, MPS_TRUNCATION_THRESHOLD);
            run_circuit(spec, theta, &mut state);
            Ok(QuantumState::Mps(state))
        }
    }
}

/// Gate sink shared by the two backends.
pub(crate) trait GateTarget {
    fn ry(&mut self, qubit: usize, theta: f64);
    fn cnot(&mut self, control: usize, target: usize);
}

fn run_circuit<T: GateTarget>(spec: &AnsatzSpec, theta: &[f64], state: &mut T) {
    let m = spec.m_qubits;
    for q in 0..m {
        state.ry(q, theta[q]);
    }
    for rep in 1..=spec.reps {
        if m > 1 {
            for i in (0..m - 1).rev() {
                state.cnot(i, i + 1);
            }
        }
        for q in 0..m {
            state.ry(q, theta[rep * m + q]);
        }
    }
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Dense(s) => s.n_qubits(),
            QuantumState::Mps(s) => s.n_qubits(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            QuantumState::Dense(s) => s.norm(),
            QuantumState::Mps(s) => s.norm(),
        }
    }

    /// All bitstring probabilities. Exponential in qubit count; intended
    /// for exact-distribution training and cross-backend checks.
    pub fn exact_distribution(&self) -> Result<BTreeMap<String, f64>> {
        match self {
            QuantumState::Dense(s) => Ok(s.exact_distribution()),
            QuantumState::Mps(s) => s.exact_distribution(),
        }
    }

    /// Draw i.i.d. measurement shots; deterministic for a given seed.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<SampleSet> {
        if shots < 1 {
            return Err(Error::Domain("shots must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = match self {
            QuantumState::Dense(s) => s.sample_counts(shots, &mut rng),
            QuantumState::Mps(s) => s.sample_counts(shots, &mut rng),
        };
        Ok(SampleSet {
            counts,
            shots,
            seed,
        })
    }
}

/// Bitstring for a basis-state index, qubit 0 leftmost.
pub(crate) fn index_to_bits(index: usize, m: usize) -> String {
    format!("{index:0m$b}")
}
