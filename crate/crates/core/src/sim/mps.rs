//! Nearest-neighbor matrix product state backend.
//!
//! Site tensors are stored as a pair of bond matrices per physical index.
//! Two-qubit gates act on adjacent sites only (the staircase entangler),
//! via contract, gate, SVD split. Truncation applies past the bond cap or
//! below the discarded-weight threshold; for a single staircase layer the
//! bond dimension never exceeds 2 and the state is exact.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

use super::GateTarget;
use crate::error::{Error, Result};

const EXACT_DISTRIBUTION_LIMIT: usize = 26;

pub struct MpsState {
    m: usize,
    bond_cap: usize,
    trunc_threshold: f64,
    /// tensors[k][s] is the (dl x dr) bond matrix of site k for physical
    /// value s.
    tensors: Vec<[DMatrix<f64>; 2]>,
    discarded_weight: f64,
}

impl MpsState {
    pub fn zero(m: usize, bond_cap: usize, trunc_threshold: f64) -> Self {
        let tensors = (0..m)
            .map(|_| {
                [
                    DMatrix::from_element(1, 1, 1.0),
                    DMatrix::from_element(1, 1, 0.0),
                ]
            })
            .collect();
        MpsState {
            m,
            bond_cap,
            trunc_threshold,
            tensors,
            discarded_weight: 0.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.m
    }

    pub fn max_bond_dimension(&self) -> usize {
        self.tensors
            .iter()
            .map(|t| t[0].ncols())
            .max()
            .unwrap_or(1)
    }

    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    pub fn norm(&self) -> f64 {
        // Contract bra against ket left to right.
        let mut env = DMatrix::from_element(1, 1, 1.0);
        for site in &self.tensors {
            let mut next = DMatrix::zeros(site[0].ncols(), site[0].ncols());
            for s in 0..2 {
                next += site[s].transpose() * &env * &site[s];
            }
            env = next;
        }
        env[(0, 0)].max(0.0).sqrt()
    }

    pub fn exact_distribution(&self) -> Result<BTreeMap<String, f64>> {
        if self.m > EXACT_DISTRIBUTION_LIMIT {
            return Err(Error::Resource(format!(
                "exact distribution limited to {EXACT_DISTRIBUTION_LIMIT} qubits, state has {}",
                self.m
            )));
        }
        let mut dist = BTreeMap::new();
        let mut prefix = String::with_capacity(self.m);
        let root = DMatrix::from_element(1, 1, 1.0);
        self.walk(&root, &mut prefix, &mut dist);
        Ok(dist)
    }

    fn walk(
        &self,
        left: &DMatrix<f64>,
        prefix: &mut String,
        out: &mut BTreeMap<String, f64>,
    ) {
        let site = prefix.len();
        if site == self.m {
            let amp = left[(0, 0)];
            if amp != 0.0 {
                out.insert(prefix.clone(), amp * amp);
            }
            return;
        }
        for s in 0..2 {
            let next = left * &self.tensors[site][s];
            prefix.push(if s == 1 { '1' } else { '0' });
            self.walk(&next, prefix, out);
            prefix.pop();
        }
    }

    /// Sequential perfect sampling: collapse one qubit at a time using
    /// right environments, left to right.
    pub fn sample_counts<R: Rng>(&self, shots: u64, rng: &mut R) -> BTreeMap<String, u64> {
        // right_env[k] closes sites k..m; right_env[m] is the scalar 1.
        let mut right_env: Vec<DMatrix<f64>> = vec![DMatrix::from_element(1, 1, 1.0); self.m + 1];
        for k in (0..self.m).rev() {
            let site = &self.tensors[k];
            let mut env = DMatrix::zeros(site[0].nrows(), site[0].nrows());
            for s in 0..2 {
                env += &site[s] * &right_env[k + 1] * site[s].transpose();
            }
            right_env[k] = env;
        }
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut bits = String::with_capacity(self.m);
        for _ in 0..shots {
            bits.clear();
            let mut left = DMatrix::from_element(1, 1, 1.0);
            for k in 0..self.m {
                let site = &self.tensors[k];
                let b0 = site[0].transpose() * &left * &site[0];
                let b1 = site[1].transpose() * &left * &site[1];
                let p0 = (&b0 * &right_env[k + 1]).trace().max(0.0);
                let p1 = (&b1 * &right_env[k + 1]).trace().max(0.0);
                let total = p0 + p1;
                let draw_one = total > 0.0 && rng.gen::<f64>() * total >= p0;
                if draw_one {
                    bits.push('1');
                    left = b1;
                } else {
                    bits.push('0');
                    left = b0;
                }
            }
            *counts.entry(bits.clone()).or_insert(0) += 1;
        }
        counts
    }
}

impl GateTarget for MpsState {
    fn ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let site = &mut self.tensors[qubit];
        let a0 = site[0].clone();
        let a1 = site[1].clone();
        site[0] = c * &a0 - s * &a1;
        site[1] = s * a0 + c * a1;
    }

    fn cnot(&mut self, control: usize, target: usize) {
        assert_eq!(target, control + 1, "MPS backend needs adjacent qubits");
        let dl = self.tensors[control][0].nrows();
        let dr = self.tensors[target][0].ncols();
        // theta[(s1, l), (s2, r)] with s1/s2 as the outer block index.
        let mut theta = DMatrix::zeros(2 * dl, 2 * dr);
        for s1 in 0..2 {
            for s2 in 0..2 {
                let block = &self.tensors[control][s1] * &self.tensors[target][s2];
                theta
                    .view_mut((s1 * dl, s2 * dr), (dl, dr))
                    .copy_from(&block);
            }
        }
        // CNOT: swap the target blocks on the control=1 rows.
        for row in dl..2 * dl {
            for col in 0..dr {
                theta.swap((row, col), (row, dr + col));
            }
        }
        let svd = theta.svd(true, true);
        let u = svd.u.expect("svd with u");
        let vt = svd.v_t.expect("svd with v_t");
        let mut sv: Vec<(f64, usize)> = svd
            .singular_values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let total_weight: f64 = sv.iter().map(|(v, _)| v * v).sum();
        let mut keep = sv.len().min(self.bond_cap);
        // Drop trailing singular values that carry negligible weight.
        while keep > 1 {
            let tail: f64 = sv[keep - 1..].iter().map(|(v, _)| v * v).sum();
            if tail > self.trunc_threshold * total_weight.max(1e-300) {
                break;
            }
            keep -= 1;
        }
        let dropped: f64 = sv[keep..].iter().map(|(v, _)| v * v).sum();
        self.discarded_weight += dropped;

        let mut left = [DMatrix::zeros(dl, keep), DMatrix::zeros(dl, keep)];
        let mut right = [DMatrix::zeros(keep, dr), DMatrix::zeros(keep, dr)];
        for (new_idx, &(sigma, old_idx)) in sv[..keep].iter().enumerate() {
            for s1 in 0..2 {
                for l in 0..dl {
                    left[s1][(l, new_idx)] = u[(s1 * dl + l, old_idx)];
                }
            }
            for s2 in 0..2 {
                for r in 0..dr {
                    right[s2][(new_idx, r)] = sigma * vt[(old_idx, s2 * dr + r)];
                }
            }
        }
        self.tensors[control] = left;
        self.tensors[target] = right;
    }
}
