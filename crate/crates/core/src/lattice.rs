//! Turn-based lattice encodings.
//!
//! A protein conformation is a walk on one of three lattices (tetrahedral,
//! BCC, FCC). Each step ("turn") between consecutive beads is stored in a
//! fixed number of bits, and global rotational symmetry lets a fixed prefix
//! of those bits be pinned, shrinking the search space. This module owns the
//! turn tables, the bitstring codec, and the neighbor-distance ladders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Tetra,
    Bcc,
    Fcc,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [LatticeKind::Tetra, LatticeKind::Bcc, LatticeKind::Fcc];

    pub fn name(&self) -> &'static str {
        match self {
            LatticeKind::Tetra => "tetra",
            LatticeKind::Bcc => "bcc",
            LatticeKind::Fcc => "fcc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tetra" | "tetrahedral" => Ok(LatticeKind::Tetra),
            "bcc" => Ok(LatticeKind::Bcc),
            "fcc" => Ok(LatticeKind::Fcc),
            other => Err(Error::Domain(format!("unknown lattice '{other}'"))),
        }
    }
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// Tetrahedral sublattice A turns, indexed by 2-bit pattern (MSB first).
const TETRA_A: [Vec3; 4] = [[1, 1, 1], [-1, -1, 1], [1, -1, -1], [-1, 1, -1]];
// Sublattice B turns are the negations of A.
const TETRA_B: [Vec3; 4] = [[-1, -1, -1], [1, 1, -1], [1, -1, 1], [-1, 1, 1]];

// BCC turns, indexed by 3-bit pattern.
const BCC_TURNS: [Vec3; 8] = [
    [1, 1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [-1, 1, 1],
    [1, -1, -1],
    [1, -1, 1],
    [-1, -1, -1],
    [1, 1, 1],
];

// FCC turns, indexed by 4-bit pattern; None marks the four redundant patterns.
const FCC_TURNS: [Option<Vec3>; 16] = [
    Some([1, 1, 0]),   // 0000
    None,              // 0001 redundant
    None,              // 0010 redundant
    Some([-1, -1, 0]), // 0011
    Some([-1, 0, -1]), // 0100
    Some([0, -1, -1]), // 0101
    Some([0, -1, 1]),  // 0110
    Some([-1, 0, 1]),  // 0111
    Some([1, 0, 1]),   // 1000
    Some([0, 1, 1]),   // 1001
    Some([0, 1, -1]),  // 1010
    Some([1, 0, -1]),  // 1011
    Some([-1, 1, 0]),  // 1100
    None,              // 1101 redundant
    None,              // 1110 redundant
    Some([1, -1, 0]),  // 1111
];

/// Geometry descriptor for one lattice: turn tables, per-turn bit width,
/// neighbor-distance ladder (squared, integer), and the canonical fixed
/// bit prefix that removes the global rotation/reflection freedom.
#[derive(Debug, Clone, Copy)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub qubits_per_turn: usize,
    /// Squared k-NN distances, k = 1..=3.
    pub knn_sq: [i64; 3],
    /// Canonical fixed bit assignments prepended to every measured bitstring.
    pub fixed_prefix: &'static str,
    /// Minimum residue count for which the qubit-count formula is positive.
    pub min_residues: usize,
}

const TETRA_SPEC: LatticeSpec = LatticeSpec {
    kind: LatticeKind::Tetra,
    qubits_per_turn: 2,
    knn_sq: [3, 8, 11],
    fixed_prefix: "01000",
    min_residues: 4,
};

const BCC_SPEC: LatticeSpec = LatticeSpec {
    kind: LatticeKind::Bcc,
    qubits_per_turn: 3,
    knn_sq: [3, 4, 8],
    fixed_prefix: "0000",
    min_residues: 3,
};

const FCC_SPEC: LatticeSpec = LatticeSpec {
    kind: LatticeKind::Fcc,
    qubits_per_turn: 4,
    knn_sq: [2, 4, 6],
    fixed_prefix: "000010",
    min_residues: 3,
};

impl LatticeSpec {
    pub fn get(kind: LatticeKind) -> &'static LatticeSpec {
        match kind {
            LatticeKind::Tetra => &TETRA_SPEC,
            LatticeKind::Bcc => &BCC_SPEC,
            LatticeKind::Fcc => &FCC_SPEC,
        }
    }

    /// Number of distinct bit patterns per turn (including redundant ones).
    pub fn patterns_per_turn(&self) -> usize {
        1 << self.qubits_per_turn
    }

    /// Turn vector for a pattern at a given turn index. `None` marks an FCC
    /// redundant pattern. The turn index matters only on the tetrahedral
    /// lattice, where even turns use sublattice table A and odd turns B
    /// (bead 0 sits on sublattice A).
    pub fn turn_vector(&self, turn_index: usize, pattern: usize) -> Option<Vec3> {
        match self.kind {
            LatticeKind::Tetra => {
                if turn_index % 2 == 0 {
                    Some(TETRA_A[pattern])
                } else {
                    Some(TETRA_B[pattern])
                }
            }
            LatticeKind::Bcc => Some(BCC_TURNS[pattern]),
            LatticeKind::Fcc => FCC_TURNS[pattern],
        }
    }

    pub fn is_redundant(&self, pattern: usize) -> bool {
        self.kind == LatticeKind::Fcc && FCC_TURNS[pattern].is_none()
    }

    /// Patterns allowed at a turn index given the fixed prefix: a pattern is
    /// allowed when its bits agree with every fixed bit falling inside that
    /// turn's bit window.
    pub fn allowed_patterns(&self, turn_index: usize) -> Vec<usize> {
        let q = self.qubits_per_turn;
        let start = turn_index * q;
        let fixed: Vec<(usize, u8)> = self
            .fixed_prefix
            .bytes()
            .enumerate()
            .filter(|(i, _)| *i >= start && *i < start + q)
            .map(|(i, b)| (i - start, b - b'0'))
            .collect();
        (0..self.patterns_per_turn())
            .filter(|&p| {
                fixed
                    .iter()
                    .all(|&(bit, val)| ((p >> (q - 1 - bit)) & 1) as u8 == val)
            })
            .collect()
    }
}

/// Number of configuration qubits for `n` residues on `kind`.
pub fn qubit_count(kind: LatticeKind, n: usize) -> Result<usize> {
    let spec = LatticeSpec::get(kind);
    if n < spec.min_residues {
        return Err(Error::Domain(format!(
            "{kind} lattice requires at least {} residues, got {n}",
            spec.min_residues
        )));
    }
    let total = spec.qubits_per_turn * (n - 1);
    let fixed = spec.fixed_prefix.len();
    Ok(total - fixed)
}

/// One decoded turn: either a lattice step or an FCC redundant marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Step(Vec3),
    Redundant,
}

/// Decoded turn sequence, keeping the raw per-turn bit patterns so that
/// redundancy checks and re-encoding stay exact.
#[derive(Debug, Clone)]
pub struct TurnSequence {
    pub kind: LatticeKind,
    pub turns: Vec<Turn>,
    pub raw_patterns: Vec<usize>,
}

impl TurnSequence {
    pub fn redundant_count(&self) -> usize {
        self.turns.iter().filter(|t| **t == Turn::Redundant).count()
    }
}

/// Bead coordinates of a conformation; bead 0 is pinned at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conformation {
    pub coords: Vec<Vec3>,
    pub redundant_count: usize,
}

impl Conformation {
    pub fn n_residues(&self) -> usize {
        self.coords.len()
    }
}

/// Decode a measured bitstring (the variable qubits only) into a turn
/// sequence, prepending the lattice's fixed prefix. Redundant FCC patterns
/// are preserved as markers, never dropped.
pub fn decode_bitstring(bits: &str, kind: LatticeKind, n: usize) -> Result<TurnSequence> {
    let spec = LatticeSpec::get(kind);
    let expected = qubit_count(kind, n)?;
    if bits.len() != expected {
        return Err(Error::Codec(format!(
            "bitstring length {} does not match qubit count {expected} for {kind}, n={n}",
            bits.len()
        )));
    }
    if let Some(c) = bits.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Error::Codec(format!("invalid character '{c}' in bitstring")));
    }
    let full: Vec<u8> = spec
        .fixed_prefix
        .bytes()
        .chain(bits.bytes())
        .map(|b| b - b'0')
        .collect();
    let q = spec.qubits_per_turn;
    debug_assert_eq!(full.len(), q * (n - 1));
    let mut turns = Vec::with_capacity(n - 1);
    let mut raw_patterns = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let mut pattern = 0usize;
        for bit in &full[t * q..(t + 1) * q] {
            pattern = (pattern << 1) | *bit as usize;
        }
        raw_patterns.push(pattern);
        turns.push(match spec.turn_vector(t, pattern) {
            Some(v) => Turn::Step(v),
            None => Turn::Redundant,
        });
    }
    Ok(TurnSequence {
        kind,
        turns,
        raw_patterns,
    })
}

/// Inverse codec: rebuild the variable-qubit bitstring from per-turn bit
/// patterns. Fails if the patterns contradict the fixed prefix.
pub fn encode_turns(patterns: &[usize], kind: LatticeKind, n: usize) -> Result<String> {
    let spec = LatticeSpec::get(kind);
    qubit_count(kind, n)?;
    if patterns.len() != n - 1 {
        return Err(Error::Codec(format!(
            "expected {} turn patterns, got {}",
            n - 1,
            patterns.len()
        )));
    }
    let q = spec.qubits_per_turn;
    let mut full = String::with_capacity(q * (n - 1));
    for &p in patterns {
        if p >= spec.patterns_per_turn() {
            return Err(Error::Codec(format!("turn pattern {p} out of range")));
        }
        for bit in (0..q).rev() {
            full.push(if (p >> bit) & 1 == 1 { '1' } else { '0' });
        }
    }
    let prefix = spec.fixed_prefix;
    if !full.starts_with(prefix) {
        return Err(Error::Codec(format!(
            "turn patterns inconsistent with fixed prefix {prefix}"
        )));
    }
    Ok(full[prefix.len()..].to_string())
}

/// Cumulative sum of turn vectors from the origin. Redundant turns
/// contribute zero displacement and are counted.
pub fn turns_to_conformation(ts: &TurnSequence) -> Conformation {
    let mut coords = Vec::with_capacity(ts.turns.len() + 1);
    let mut pos: Vec3 = [0, 0, 0];
    coords.push(pos);
    let mut redundant_count = 0;
    for turn in &ts.turns {
        match turn {
            Turn::Step(v) => {
                pos = [pos[0] + v[0], pos[1] + v[1], pos[2] + v[2]];
            }
            Turn::Redundant => redundant_count += 1,
        }
        coords.push(pos);
    }
    Conformation {
        coords,
        redundant_count,
    }
}

/// k-th neighbor distance on the lattice, k = 1..=3.
pub fn knn_distance(kind: LatticeKind, k: usize) -> Result<f64> {
    let spec = LatticeSpec::get(kind);
    if k == 0 || k > spec.knn_sq.len() {
        return Err(Error::Domain(format!(
            "unsupported neighbor order {k} (1..={} available)",
            spec.knn_sq.len()
        )));
    }
    Ok((spec.knn_sq[k - 1] as f64).sqrt())
}

/// Reference CSV of all turn tables (`lattice,label,bits,dx,dy,dz`), for
/// documentation and cross-implementation checks.
pub fn turn_table_csv() -> String {
    let mut out = String::from("lattice,label,bits,dx,dy,dz\n");
    let mut push_row = |lattice: &str, label: &str, bits: String, v: Vec3| {
        out.push_str(&format!(
            "{lattice},{label},{bits},{},{},{}\n",
            v[0], v[1], v[2]
        ));
    };
    for (p, v) in TETRA_A.iter().enumerate() {
        push_row("tetra_a", &p.to_string(), format!("{p:02b}"), *v);
    }
    for (p, v) in TETRA_B.iter().enumerate() {
        push_row("tetra_b", &format!("{p}bar"), format!("{p:02b}"), *v);
    }
    for (p, v) in BCC_TURNS.iter().enumerate() {
        push_row("bcc", &p.to_string(), format!("{p:03b}"), *v);
    }
    for (p, v) in FCC_TURNS.iter().enumerate() {
        if let Some(v) = v {
            push_row("fcc", &p.to_string(), format!("{p:04b}"), *v);
        }
    }
    out
}
