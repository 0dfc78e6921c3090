//! Dense real statevector backend.
//!
//! Ry and CNOT have real matrix elements, so amplitudes are stored as bare
//! f64, half the memory of a complex statevector. Qubit 0 maps to the most
//! significant bit of the amplitude index, matching the leftmost character
//! of a printed bitstring.

use std::collections::BTreeMap;

use rand::Rng;

use super::{index_to_bits, GateTarget};

pub struct DenseState {
    m: usize,
    amps: Vec<f64>,
}

impl DenseState {
    pub fn zero(m: usize) -> Self {
        let mut amps = vec![0.0; 1 << m];
        amps[0] = 1.0;
        DenseState { m, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.m - 1 - qubit)
    }

    pub fn exact_distribution(&self) -> BTreeMap<String, f64> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(i, a)| (index_to_bits(i, self.m), a * a))
            .collect()
    }

    /// CDF-inversion sampling.
    pub fn sample_counts<R: Rng>(&self, shots: u64, rng: &mut R) -> BTreeMap<String, u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a * a;
            cdf.push(acc);
        }
        let total = acc;
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(i, c)| (index_to_bits(i, self.m), c))
            .collect()
    }
}

impl GateTarget for DenseState {
    fn ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let mask = self.bit_mask(qubit);
        for i0 in 0..self.amps.len() {
            if i0 & mask == 0 {
                let i1 = i0 | mask;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = c * a0 - s * a1;
                self.amps[i1] = s * a0 + c * a1;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cmask = self.bit_mask(control);
        let tmask = self.bit_mask(target);
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }
}
