//! Exact ground-state search by pruned enumeration of self-avoiding walks.
//!
//! The enumeration runs under the same fixed-prefix convention as the
//! bitstring codec, so its minima are directly comparable to circuit
//! samples at the bitstring level. A branch dies the moment a bead lands
//! on an occupied site or an FCC redundant pattern would be emitted; the
//! ground state is overlap- and redundancy-free whenever the penalty
//! weights dominate, so pruning cannot discard it.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::lattice::{encode_turns, qubit_count, LatticeKind, LatticeSpec, Vec3};

/// Ties in the minimum are resolved within this energy tolerance.
pub const ARGMIN_TOLERANCE: f64 = 1e-9;
/// Pruned-search budget in qubits (~2^30 leaves before pruning).
pub const PRUNED_QUBIT_BUDGET: usize = 30;
/// Naive full-enumeration budget in qubits.
pub const NAIVE_QUBIT_BUDGET: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub e_gs: f64,
    pub argmin_bitstrings: Vec<String>,
    pub states_enumerated: u64,
    pub states_pruned: u64,
    pub wall_time_secs: f64,
}

struct DfsFrame<'a> {
    sequence: &'a [char],
    kind: LatticeKind,
    params: &'a EnergyParams,
    n: usize,
}

#[derive(Clone)]
struct SearchAcc {
    e_min: f64,
    argmin: Vec<Vec<usize>>,
    leaves: u64,
    pruned: u64,
    /// Populated only in spectrum mode, which keeps every valid leaf.
    spectrum: Option<Vec<(f64, Vec<usize>)>>,
}

impl SearchAcc {
    fn new(spectrum: bool) -> Self {
        SearchAcc {
            e_min: f64::INFINITY,
            argmin: Vec::new(),
            leaves: 0,
            pruned: 0,
            spectrum: if spectrum { Some(Vec::new()) } else { None },
        }
    }

    fn record(&mut self, energy: f64, patterns: &[usize]) {
        self.leaves += 1;
        if let Some(spectrum) = &mut self.spectrum {
            spectrum.push((energy, patterns.to_vec()));
        }
        if energy < self.e_min - ARGMIN_TOLERANCE {
            self.e_min = energy;
            self.argmin.clear();
            self.argmin.push(patterns.to_vec());
        } else if (energy - self.e_min).abs() <= ARGMIN_TOLERANCE {
            self.argmin.push(patterns.to_vec());
        }
    }

    fn merge(mut self, other: SearchAcc) -> SearchAcc {
        self.leaves += other.leaves;
        self.pruned += other.pruned;
        if let Some(s) = &mut self.spectrum {
            s.extend(other.spectrum.unwrap_or_default());
        }
        if other.e_min < self.e_min - ARGMIN_TOLERANCE {
            self.e_min = other.e_min;
            self.argmin = other.argmin;
        } else if (other.e_min - self.e_min).abs() <= ARGMIN_TOLERANCE {
            self.argmin.extend(other.argmin);
        }
        self
    }
}

fn leaf_energy(frame: &DfsFrame, coords: &[Vec3]) -> Result<f64> {
    // Valid leaves carry interaction energy only.
    let conf = crate::lattice::Conformation {
        coords: coords.to_vec(),
        redundant_count: 0,
    };
    let d2 = crate::energy::squared_distance_matrix(&conf);
    let seq: String = frame.sequence.iter().collect();
    let (_, e_int) = crate::energy::interaction_energy(&d2, &seq, frame.kind, frame.params)?;
    Ok(e_int)
}

fn dfs(
    frame: &DfsFrame,
    spec: &LatticeSpec,
    coords: &mut Vec<Vec3>,
    patterns: &mut Vec<usize>,
    acc: &mut SearchAcc,
) -> Result<()> {
    let t = patterns.len();
    if t == frame.n - 1 {
        let energy = leaf_energy(frame, coords)?;
        acc.record(energy, patterns);
        return Ok(());
    }
    let here = *coords.last().unwrap();
    for pattern in spec.allowed_patterns(t) {
        let Some(step) = spec.turn_vector(t, pattern) else {
            acc.pruned += 1; // redundant FCC pattern
            continue;
        };
        let next = [here[0] + step[0], here[1] + step[1], here[2] + step[2]];
        if coords.contains(&next) {
            acc.pruned += 1;
            continue;
        }
        coords.push(next);
        patterns.push(pattern);
        dfs(frame, spec, coords, patterns, acc)?;
        coords.pop();
        patterns.pop();
    }
    Ok(())
}

fn run_search(
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
    spectrum: bool,
) -> Result<(SearchAcc, usize)> {
    params.validate_sequence(sequence)?;
    let seq: Vec<char> = sequence.chars().collect();
    let n = seq.len();
    let qubits = qubit_count(kind, n)?;
    if qubits > PRUNED_QUBIT_BUDGET {
        return Err(Error::Resource(format!(
            "instance needs {qubits} qubits, enumeration budget is {PRUNED_QUBIT_BUDGET}"
        )));
    }
    let spec = LatticeSpec::get(kind);
    let frame = DfsFrame {
        sequence: &seq,
        kind,
        params,
        n,
    };
    // Parallelize over first-level branch pairs deep enough to matter:
    // split on the first turn with more than one allowed pattern.
    let mut split_depth = 0;
    while split_depth < n - 1 && spec.allowed_patterns(split_depth).len() == 1 {
        split_depth += 1;
    }
    let mut base_coords: Vec<Vec3> = vec![[0, 0, 0]];
    let mut base_patterns = Vec::new();
    for t in 0..split_depth {
        let pattern = spec.allowed_patterns(t)[0];
        let step = spec.turn_vector(t, pattern).expect("fixed turns are physical");
        let here = *base_coords.last().unwrap();
        base_coords.push([here[0] + step[0], here[1] + step[1], here[2] + step[2]]);
        base_patterns.push(pattern);
    }
    let acc = if split_depth >= n - 1 {
        // Everything is fixed; single leaf.
        let mut acc = SearchAcc::new(spectrum);
        let energy = leaf_energy(&frame, &base_coords)?;
        acc.record(energy, &base_patterns);
        acc
    } else {
        spec.allowed_patterns(split_depth)
            .into_par_iter()
            .map(|pattern| {
                let mut acc = SearchAcc::new(spectrum);
                let Some(step) = spec.turn_vector(split_depth, pattern) else {
                    acc.pruned += 1;
                    return Ok(acc);
                };
                let here = *base_coords.last().unwrap();
                let next = [here[0] + step[0], here[1] + step[1], here[2] + step[2]];
                if base_coords.contains(&next) {
                    acc.pruned += 1;
                    return Ok(acc);
                }
                let mut coords = base_coords.clone();
                let mut patterns = base_patterns.clone();
                coords.push(next);
                patterns.push(pattern);
                dfs(&frame, spec, &mut coords, &mut patterns, &mut acc)?;
                Ok(acc)
            })
            .reduce(
                || Ok(SearchAcc::new(spectrum)),
                |a: Result<SearchAcc>, b| Ok(a?.merge(b?)),
            )?
    };
    if acc.leaves == 0 {
        return Err(Error::Resource(
            "no valid self-avoiding walk exists under the fixed prefix".into(),
        ));
    }
    Ok((acc, n))
}

/// Exact minimum over all encodable conformations, with the full argmin set.
pub fn ground_state(
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
) -> Result<OracleResult> {
    let start = Instant::now();
    let (acc, n) = run_search(sequence, kind, params, false)?;
    let mut argmin: Vec<String> = acc
        .argmin
        .iter()
        .map(|patterns| encode_turns(patterns, kind, n))
        .collect::<Result<_>>()?;
    argmin.sort();
    argmin.dedup();
    Ok(OracleResult {
        e_gs: acc.e_min,
        argmin_bitstrings: argmin,
        states_enumerated: acc.leaves,
        states_pruned: acc.pruned,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Independent reference: score every bitstring via the full energy
/// function, no pruning.
pub fn naive_enumerate(
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
) -> Result<OracleResult> {
    let start = Instant::now();
    params.validate_sequence(sequence)?;
    let n = sequence.chars().count();
    let qubits = qubit_count(kind, n)?;
    if qubits > NAIVE_QUBIT_BUDGET {
        return Err(Error::Resource(format!(
            "instance needs {qubits} qubits, naive budget is {NAIVE_QUBIT_BUDGET}"
        )));
    }
    let total = 1u64 << qubits;
    let chunk: Vec<(f64, String)> = (0..total)
        .into_par_iter()
        .map(|x| {
            let bits = format!("{x:0qubits$b}");
            let e = total_energy(&bits, sequence, kind, params)?.e_total;
            Ok((e, bits))
        })
        .collect::<Result<_>>()?;
    let e_min = chunk
        .iter()
        .map(|(e, _)| *e)
        .fold(f64::INFINITY, f64::min);
    let mut argmin: Vec<String> = chunk
        .iter()
        .filter(|(e, _)| (e - e_min).abs() <= ARGMIN_TOLERANCE)
        .map(|(_, b)| b.clone())
        .collect();
    argmin.sort();
    Ok(OracleResult {
        e_gs: e_min,
        argmin_bitstrings: argmin,
        states_enumerated: total,
        states_pruned: 0,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// The `top_m` lowest-energy valid conformations, ascending; ties break
/// lexicographically on the bitstring.
pub fn low_energy_spectrum(
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
    top_m: usize,
) -> Result<Vec<(f64, String)>> {
    let (acc, n) = run_search(sequence, kind, params, true)?;
    let mut entries: Vec<(f64, String)> = acc
        .spectrum
        .expect("spectrum collected")
        .into_iter()
        .map(|(e, patterns)| Ok((e, encode_turns(&patterns, kind, n)?)))
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    entries.truncate(top_m);
    Ok(entries)
}

/// Cache key content for persisted oracle results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleKey {
    pub sequence: String,
    pub lattice: LatticeKind,
    pub max_k: usize,
    pub exclude_bonded: bool,
    pub matrix_sha256: String,
}

/// Oracle result plus the key it was computed under, as persisted to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredOracle {
    pub key: OracleKey,
    pub result: OracleResult,
}
