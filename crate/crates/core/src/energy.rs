//! Classical energy function for scoring decoded conformations.
//!
//! E = E_olap + E_int + E_redun: a large positive penalty per colliding bead
//! pair, a contact interaction summed over neighbor orders with 1/d decay,
//! and a penalty per redundant FCC turn. All bead coordinates are integers,
//! so neighbor-shell membership is decided on exact squared distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    decode_bitstring, turns_to_conformation, Conformation, LatticeKind, LatticeSpec, TurnSequence,
};

/// Embedded Miyazawa-Jernigan 1996 contact-energy table (e_ij, RT units).
pub const MJ_1996_CSV: &str = include_str!("../data/mj1996.csv");

/// Symmetric residue-residue contact energy matrix over one-letter codes.
#[derive(Debug, Clone)]
pub struct ContactMatrix {
    pub residues: Vec<char>,
    eps: Vec<Vec<f64>>,
    index: [Option<usize>; 26],
}

impl ContactMatrix {
    /// Parse from CSV: first row and first column carry the one-letter
    /// codes, the body must be symmetric to 1e-12.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parameter("empty contact matrix".into()))?;
        let residues: Vec<char> = header
            .split(',')
            .skip(1)
            .map(|s| {
                let s = s.trim();
                if s.len() == 1 {
                    Ok(s.chars().next().unwrap().to_ascii_uppercase())
                } else {
                    Err(Error::Parameter(format!("bad residue code '{s}'")))
                }
            })
            .collect::<Result<_>>()?;
        let n = residues.len();
        let mut eps = vec![vec![0.0; n]; n];
        for (i, line) in lines.enumerate() {
            if i >= n {
                return Err(Error::Parameter("too many matrix rows".into()));
            }
            let mut fields = line.split(',');
            let row_code = fields
                .next()
                .map(str::trim)
                .and_then(|s| s.chars().next())
                .map(|c| c.to_ascii_uppercase());
            if row_code != Some(residues[i]) {
                return Err(Error::Parameter(format!(
                    "row {i} label does not match header order"
                )));
            }
            for (j, field) in fields.enumerate() {
                if j >= n {
                    return Err(Error::Parameter(format!("row {i} has too many columns")));
                }
                eps[i][j] = field.trim().parse::<f64>().map_err(|e| {
                    Error::Parameter(format!("bad matrix entry at ({i},{j}): {e}"))
                })?;
            }
        }
        for i in 0..n {
            for j in 0..i {
                if (eps[i][j] - eps[j][i]).abs() > 1e-12 {
                    return Err(Error::Parameter(format!(
                        "contact matrix asymmetric at ({},{}) ",
                        residues[i], residues[j]
                    )));
                }
            }
        }
        let mut index = [None; 26];
        for (i, &c) in residues.iter().enumerate() {
            let slot = (c as u8 - b'A') as usize;
            if index[slot].is_some() {
                return Err(Error::Parameter(format!("duplicate residue '{c}'")));
            }
            index[slot] = Some(i);
        }
        Ok(ContactMatrix {
            residues,
            eps,
            index,
        })
    }

    /// The embedded 20x20 MJ table.
    pub fn mj1996() -> Self {
        Self::from_csv(MJ_1996_CSV).expect("embedded MJ matrix parses")
    }

    /// Toy matrix: every pair interacts with the same energy.
    pub fn uniform(residues: &str, value: f64) -> Result<Self> {
        let letters: Vec<char> = residues.chars().map(|c| c.to_ascii_uppercase()).collect();
        let n = letters.len();
        let mut header = String::new();
        for c in &letters {
            header.push(',');
            header.push(*c);
        }
        let mut text = header + "\n";
        for c in &letters {
            text.push(*c);
            for _ in 0..n {
                text.push_str(&format!(",{value}"));
            }
            text.push('\n');
        }
        Self::from_csv(&text)
    }

    pub fn contains(&self, residue: char) -> bool {
        residue.is_ascii_alphabetic()
            && self.index[(residue.to_ascii_uppercase() as u8 - b'A') as usize].is_some()
    }

    pub fn eps(&self, a: char, b: char) -> Result<f64> {
        let ia = self.lookup(a)?;
        let ib = self.lookup(b)?;
        Ok(self.eps[ia][ib])
    }

    pub fn max_abs(&self) -> f64 {
        self.eps
            .iter()
            .flatten()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    fn lookup(&self, c: char) -> Result<usize> {
        if !c.is_ascii_alphabetic() {
            return Err(Error::Parameter(format!("unknown residue '{c}'")));
        }
        self.index[(c.to_ascii_uppercase() as u8 - b'A') as usize]
            .ok_or_else(|| Error::Parameter(format!("unknown residue '{c}'")))
    }
}

/// Full parameter set for the energy function.
#[derive(Debug, Clone)]
pub struct EnergyParams {
    pub contact: ContactMatrix,
    pub lambda_olap: f64,
    pub lambda_redun: f64,
    pub max_k: usize,
    pub exclude_bonded: bool,
}

impl EnergyParams {
    /// Default penalties: N(N-1)/2 * max|eps| + 1, which strictly dominates
    /// the largest attainable attractive total for the instance.
    pub fn new(contact: ContactMatrix, n_residues: usize, max_k: usize) -> Self {
        let pairs = (n_residues * n_residues.saturating_sub(1) / 2) as f64;
        let lambda = pairs * contact.max_abs() + 1.0;
        EnergyParams {
            contact,
            lambda_olap: lambda,
            lambda_redun: lambda,
            max_k,
            exclude_bonded: false,
        }
    }

    pub fn validate_sequence(&self, sequence: &str) -> Result<()> {
        for c in sequence.chars() {
            if !self.contact.contains(c) {
                return Err(Error::Parameter(format!(
                    "residue '{c}' missing from contact matrix"
                )));
            }
        }
        Ok(())
    }
}

/// Itemized energy of one bitstring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_olap: f64,
    pub e_int: f64,
    pub e_redun: f64,
    pub e_total: f64,
    pub per_k: Vec<f64>,
}

/// Exact squared pairwise distances between beads.
pub fn squared_distance_matrix(conf: &Conformation) -> Vec<Vec<i64>> {
    let n = conf.coords.len();
    let mut d2 = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let a = conf.coords[i];
            let b = conf.coords[j];
            let dx = a[0] - b[0];
            let dy = a[1] - b[1];
            let dz = a[2] - b[2];
            let sq = dx * dx + dy * dy + dz * dz;
            d2[i][j] = sq;
            d2[j][i] = sq;
        }
    }
    d2
}

/// Euclidean distance matrix.
pub fn distance_matrix(conf: &Conformation) -> Vec<Vec<f64>> {
    squared_distance_matrix(conf)
        .into_iter()
        .map(|row| row.into_iter().map(|sq| (sq as f64).sqrt()).collect())
        .collect()
}

/// lambda_olap times the number of coinciding bead pairs.
pub fn overlap_energy(d2: &[Vec<i64>], params: &EnergyParams) -> f64 {
    let n = d2.len();
    let mut collisions = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if d2[i][j] == 0 {
                collisions += 1;
            }
        }
    }
    params.lambda_olap * collisions as f64
}

/// lambda_redun per redundant turn; zero on lattices without redundancy.
pub fn redundancy_energy(ts: &TurnSequence, params: &EnergyParams) -> f64 {
    params.lambda_redun * ts.redundant_count() as f64
}

/// k-NN contact interaction with 1/d decay: a pair on the k-th neighbor
/// shell contributes eps_ij * d(1)/d(k). Returns per-order terms and total.
pub fn interaction_energy(
    d2: &[Vec<i64>],
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
) -> Result<(Vec<f64>, f64)> {
    let n = d2.len();
    let seq: Vec<char> = sequence.chars().collect();
    if seq.len() != n {
        return Err(Error::Parameter(format!(
            "sequence length {} does not match bead count {n}",
            seq.len()
        )));
    }
    let spec = LatticeSpec::get(kind);
    let max_k = params.max_k.min(spec.knn_sq.len());
    let d1_sq = spec.knn_sq[0] as f64;
    let mut per_k = vec![0.0; max_k];
    for i in 0..n {
        for j in i + 1..n {
            if params.exclude_bonded && j == i + 1 {
                continue;
            }
            for (k, &dk_sq) in spec.knn_sq[..max_k].iter().enumerate() {
                if d2[i][j] == dk_sq {
                    let eps = params.contact.eps(seq[i], seq[j])?;
                    per_k[k] += eps * (d1_sq / dk_sq as f64).sqrt();
                    break;
                }
            }
        }
    }
    let total = per_k.iter().sum();
    Ok((per_k, total))
}

/// Decode a bitstring and return its full energy breakdown.
pub fn total_energy(
    bits: &str,
    sequence: &str,
    kind: LatticeKind,
    params: &EnergyParams,
) -> Result<EnergyBreakdown> {
    params.validate_sequence(sequence)?;
    let ts = decode_bitstring(bits, kind, sequence.chars().count())?;
    let conf = turns_to_conformation(&ts);
    let d2 = squared_distance_matrix(&conf);
    let e_olap = overlap_energy(&d2, params);
    let e_redun = redundancy_energy(&ts, params);
    let (per_k, e_int) = interaction_energy(&d2, sequence, kind, params)?;
    Ok(EnergyBreakdown {
        e_olap,
        e_int,
        e_redun,
        e_total: e_olap + e_int + e_redun,
        per_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_params(n: usize, max_k: usize, exclude_bonded: bool) -> EnergyParams {
        let contact = ContactMatrix::uniform("ACDEFGHIKLMNPQRSTVWY", -1.0).unwrap();
        let mut p = EnergyParams::new(contact, n, max_k);
        p.exclude_bonded = exclude_bonded;
        p
    }

    fn conf(bits: &str, kind: LatticeKind, n: usize) -> Conformation {
        turns_to_conformation(&decode_bitstring(bits, kind, n).unwrap())
    }

    #[test]
    fn mj_matrix_loads_symmetric() {
        let m = ContactMatrix::mj1996();
        assert_eq!(m.residues.len(), 20);
        assert_abs_diff_eq!(m.eps('C', 'C').unwrap(), -5.44);
        assert_abs_diff_eq!(m.eps('K', 'F').unwrap(), m.eps('F', 'K').unwrap());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let text = ",A,G\nA,-1.0,-2.0\nG,-2.5,-1.0\n";
        assert!(ContactMatrix::from_csv(text).is_err());
    }

    #[test]
    fn unknown_residue_rejected() {
        let params = toy_params(4, 1, true);
        assert!(total_energy("1", "AAAB", LatticeKind::Tetra, &params).is_err());
    }

    #[test]
    fn distance_matrix_prefix() {
        // Tetra prefix-only walk: (0,0,0), (-1,-1,1), (-2,-2,0).
        let c = Conformation {
            coords: vec![[0, 0, 0], [-1, -1, 1], [-2, -2, 0]],
            redundant_count: 0,
        };
        let d = distance_matrix(&c);
        assert_abs_diff_eq!(d[0][2], 8f64.sqrt());
        assert_abs_diff_eq!(d[0][1], 3f64.sqrt());
        assert_eq!(d[1][1], 0.0);
    }

    #[test]
    fn overlap_counting() {
        let params = toy_params(4, 1, true);
        let c = conf("0", LatticeKind::Tetra, 4);
        let d2 = squared_distance_matrix(&c);
        assert_eq!(d2[1][3], 0);
        assert_abs_diff_eq!(overlap_energy(&d2, &params), params.lambda_olap);
        let c = conf("1", LatticeKind::Tetra, 4);
        assert_abs_diff_eq!(overlap_energy(&squared_distance_matrix(&c), &params), 0.0);
    }

    #[test]
    fn redundancy_only_on_fcc() {
        let params = toy_params(4, 1, true);
        let ts = decode_bitstring("1", LatticeKind::Tetra, 4).unwrap();
        assert_eq!(redundancy_energy(&ts, &params), 0.0);
        // FCC bitstring whose third turn is the redundant pattern 0001.
        let m = crate::lattice::qubit_count(LatticeKind::Fcc, 4).unwrap();
        let bits = format!("{:0m$b}", 0b000001usize);
        let ts = decode_bitstring(&bits, LatticeKind::Fcc, 4).unwrap();
        assert_eq!(ts.redundant_count(), 1);
        assert_abs_diff_eq!(redundancy_energy(&ts, &params), params.lambda_redun);
    }

    #[test]
    fn interaction_tetra_n4_bits1() {
        // Coordinates (0,0,0), (-1,-1,1), (-2,-2,0), (-3,-3,1): pairs (0,2)
        // and (1,3) sit on the 2-NN shell at sqrt(8).
        let params = toy_params(4, 2, true);
        let c = conf("1", LatticeKind::Tetra, 4);
        let d2 = squared_distance_matrix(&c);
        let (per_k, total) = interaction_energy(&d2, "AAAA", LatticeKind::Tetra, &params).unwrap();
        let expected = 2.0 * (-1.0) * (3f64 / 8f64).sqrt();
        assert_abs_diff_eq!(total, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(per_k[0], 0.0);
        assert_abs_diff_eq!(per_k[1], expected, epsilon = 1e-12);

        let mut params = toy_params(4, 2, false);
        params.exclude_bonded = false;
        let (_, total_bonded) =
            interaction_energy(&d2, "AAAA", LatticeKind::Tetra, &params).unwrap();
        assert_abs_diff_eq!(total_bonded, expected - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn no_contact_means_zero() {
        // n=3 walk on BCC, beads at 1-NN (bonds) only; exclude bonded.
        let contact = ContactMatrix::uniform("A", -1.0).unwrap();
        let mut params = EnergyParams::new(contact, 3, 1);
        params.exclude_bonded = true;
        let c = conf("00", LatticeKind::Bcc, 3);
        let d2 = squared_distance_matrix(&c);
        let (_, total) = interaction_energy(&d2, "AAA", LatticeKind::Bcc, &params).unwrap();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn total_energy_composes_terms() {
        let mut params = toy_params(4, 1, true);
        params.lambda_olap = 100.0;
        let b = total_energy("0", "AAAA", LatticeKind::Tetra, &params).unwrap();
        assert_abs_diff_eq!(b.e_olap, 100.0);
        assert_abs_diff_eq!(b.e_redun, 0.0);
        // Pair (0,3) lands on the 1-NN shell.
        assert_abs_diff_eq!(b.e_int, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.e_total, 99.0, epsilon = 1e-12);

        let b = total_energy("1", "AAAA", LatticeKind::Tetra, &params).unwrap();
        assert_abs_diff_eq!(b.e_olap, 0.0);
        assert_eq!(b.e_int, 0.0); // K=1: the sqrt(8) contacts are out of range
        assert_abs_diff_eq!(b.e_total, b.e_int + b.e_olap + b.e_redun);
    }

    #[test]
    fn zero_matrix_zero_energy() {
        let contact = ContactMatrix::uniform("A", 0.0).unwrap();
        let params = EnergyParams {
            contact,
            lambda_olap: 10.0,
            lambda_redun: 10.0,
            max_k: 2,
            exclude_bonded: false,
        };
        let b = total_energy("1", "AAAA", LatticeKind::Tetra, &params).unwrap();
        assert_eq!(b.e_total, 0.0);
    }

    #[test]
    fn monotone_k_prefix_stable() {
        let c = conf("1", LatticeKind::Tetra, 4);
        let d2 = squared_distance_matrix(&c);
        let p1 = toy_params(4, 1, true);
        let p3 = toy_params(4, 3, true);
        let (k1, _) = interaction_energy(&d2, "AAAA", LatticeKind::Tetra, &p1).unwrap();
        let (k3, _) = interaction_energy(&d2, "AAAA", LatticeKind::Tetra, &p3).unwrap();
        assert_eq!(k1[0], k3[0]);
        assert_eq!(k1.len(), 1);
        assert_eq!(k3.len(), 3);
    }

    // Independent re-implementation: direct double loop over coordinate
    // pairs with float distances, no shared code with the module above.
    fn brute_force_total(
        bits: &str,
        sequence: &str,
        kind: LatticeKind,
        params: &EnergyParams,
    ) -> f64 {
        let ts = decode_bitstring(bits, kind, sequence.len()).unwrap();
        let conf = turns_to_conformation(&ts);
        let coords = &conf.coords;
        let n = coords.len();
        let mut e = params.lambda_redun * conf.redundant_count as f64;
        let spec = LatticeSpec::get(kind);
        let d1 = (spec.knn_sq[0] as f64).sqrt();
        let seq: Vec<char> = sequence.chars().collect();
        for i in 0..n {
            for j in i + 1..n {
                let d = ((coords[i][0] - coords[j][0]).pow(2)
                    + (coords[i][1] - coords[j][1]).pow(2)
                    + (coords[i][2] - coords[j][2]).pow(2)) as f64;
                let d = d.sqrt();
                if d == 0.0 {
                    e += params.lambda_olap;
                    continue;
                }
                if params.exclude_bonded && j == i + 1 {
                    continue;
                }
                for k in 1..=params.max_k.min(3) {
                    let dk = (spec.knn_sq[k - 1] as f64).sqrt();
                    if (d - dk).abs() < 1e-9 {
                        e += params.contact.eps(seq[i], seq[j]).unwrap() * d1 / dk;
                    }
                }
            }
        }
        e
    }

    #[test]
    fn brute_force_equivalence_n5() {
        let contact = ContactMatrix::mj1996();
        for kind in LatticeKind::ALL {
            for &max_k in &[1usize, 2] {
                let mut params = EnergyParams::new(contact.clone(), 5, max_k);
                params.exclude_bonded = max_k == 2;
                let m = crate::lattice::qubit_count(kind, 5).unwrap();
                for x in 0..(1usize << m) {
                    let bits = format!("{x:0m$b}");
                    let b = total_energy(&bits, "GNLVS", kind, &params).unwrap();
                    let reference = brute_force_total(&bits, "GNLVS", kind, &params);
                    assert_abs_diff_eq!(b.e_total, reference, epsilon = 1e-12);
                }
            }
        }
    }
}
