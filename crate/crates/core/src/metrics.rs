//! Accuracy metrics and histograms for sampled energy distributions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{qubit_count, LatticeKind};
use crate::optimize::BitstringEnergy;
use crate::sim::SampleSet;

fn relative_error(x: f64, e_gs: f64) -> Result<f64> {
    if !(e_gs < 0.0) {
        return Err(Error::Parameter(format!(
            "relative error needs a negative ground-state energy, got {e_gs}"
        )));
    }
    Ok((x - e_gs).abs() / e_gs.abs())
}

/// |mean(values) - e_gs| / |e_gs| over the supplied final values.
pub fn average_relative_error(values: &[f64], e_gs: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("no values for average".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    relative_error(mean, e_gs)
}

/// Relative error of the best (lowest) value.
pub fn best_case_relative_error(values: &[f64], e_gs: f64) -> Result<f64> {
    let best = values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Parameter("no values for best case".into()));
    }
    relative_error(best, e_gs)
}

/// Headline numbers for one trained instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub are: f64,
    pub bcre: f64,
    pub e_gs: f64,
    pub c_cvar: f64,
    pub e_lowest: f64,
    pub n_valid_fraction: f64,
}

/// Normalized-energy histogram of a sample set. Energies are scaled by
/// 1/|e_gs| and binned at width `bin_width` with edges anchored so that a
/// bin boundary falls exactly at -1.0. Bin labels are left edges. With
/// `valid_only`, strictly negative energies keep their absolute shot
/// probabilities and everything else is dropped.
pub fn energy_histogram<E: BitstringEnergy + ?Sized>(
    samples: &SampleSet,
    energy_fn: &E,
    e_gs: f64,
    bin_width: f64,
    valid_only: bool,
) -> Result<BTreeMap<String, f64>> {
    if !(e_gs < 0.0) {
        return Err(Error::Parameter(format!(
            "histogram needs a negative ground-state energy, got {e_gs}"
        )));
    }
    if !(bin_width > 0.0) {
        return Err(Error::Parameter("bin width must be positive".into()));
    }
    let mut hist: BTreeMap<i64, f64> = BTreeMap::new();
    let total = samples.shots as f64;
    for (bits, &count) in &samples.counts {
        let e = energy_fn.energy(bits)?;
        if valid_only && e >= 0.0 {
            continue;
        }
        let scaled = e / e_gs.abs();
        let bin = (scaled / bin_width).floor() as i64;
        *hist.entry(bin).or_insert(0.0) += count as f64 / total;
    }
    Ok(hist
        .into_iter()
        .map(|(bin, p)| (format!("{:.4}", bin as f64 * bin_width), p))
        .collect())
}

/// Fraction of shots whose bitstring decodes to an overlap-free,
/// redundancy-free conformation (energy strictly negative under penalty
/// weights that dominate attraction).
pub fn valid_fraction<E: BitstringEnergy + ?Sized>(
    samples: &SampleSet,
    energy_fn: &E,
) -> Result<f64> {
    let mut valid = 0u64;
    for (bits, &count) in &samples.counts {
        if energy_fn.energy(bits)? < 0.0 {
            valid += count;
        }
    }
    Ok(valid as f64 / samples.shots as f64)
}

/// Per-shot energies of uniformly random bitstrings, the untrained control.
pub fn random_baseline<E: BitstringEnergy + ?Sized>(
    energy_fn: &E,
    kind: LatticeKind,
    n_residues: usize,
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let m = qubit_count(kind, n_residues)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut energies = Vec::with_capacity(shots as usize);
    let mut bits = String::with_capacity(m);
    for _ in 0..shots {
        bits.clear();
        for _ in 0..m {
            bits.push(if rng.gen::<bool>() { '1' } else { '0' });
        }
        energies.push(energy_fn.energy(&bits)?);
    }
    Ok(energies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Table(BTreeMap<String, f64>);

    impl BitstringEnergy for Table {
        fn energy(&self, bits: &str) -> Result<f64> {
            Ok(self.0[bits])
        }
    }

    #[test]
    fn are_of_exact_values_is_zero() {
        assert_abs_diff_eq!(average_relative_error(&[-2.0, -2.0], -2.0).unwrap(), 0.0);
    }

    #[test]
    fn are_hand_value() {
        // mean(-1.5, -2.5, -2.0) = -2.0 against e_gs = -4.0.
        let v = [-1.5, -2.5, -2.0];
        assert_abs_diff_eq!(average_relative_error(&v, -4.0).unwrap(), 0.5);
    }

    #[test]
    fn bcre_takes_minimum() {
        let v = [-1.0, -3.5, -2.0];
        assert_abs_diff_eq!(best_case_relative_error(&v, -4.0).unwrap(), 0.125);
        // Overshooting below e_gs still counts as error magnitude.
        assert_abs_diff_eq!(best_case_relative_error(&[-5.0], -4.0).unwrap(), 0.25);
    }

    #[test]
    fn nonnegative_ground_state_rejected() {
        assert!(average_relative_error(&[-1.0], 0.0).is_err());
        assert!(best_case_relative_error(&[-1.0], 2.0).is_err());
    }

    #[test]
    fn histogram_bins_anchor_at_minus_one() {
        let table = Table(BTreeMap::from([
            ("00".to_string(), -4.0),
            ("01".to_string(), -3.9),
            ("10".to_string(), 1.0),
        ]));
        let samples = SampleSet {
            counts: BTreeMap::from([
                ("00".to_string(), 2),
                ("01".to_string(), 1),
                ("10".to_string(), 1),
            ]),
            shots: 4,
            seed: 0,
        };
        let hist = energy_histogram(&samples, &table, -4.0, 0.05, false).unwrap();
        // -4.0/4.0 = -1.0 sits on a bin edge and opens [-1.0, -0.95);
        // -3.9/4.0 = -0.975 lands in the same bin.
        assert_abs_diff_eq!(hist["-1.0000"], 0.75);
        assert_abs_diff_eq!(hist["-1.0000"] + hist["0.2500"], 1.0);

        let valid = energy_histogram(&samples, &table, -4.0, 0.05, true).unwrap();
        // Invalid shots are dropped but probabilities stay absolute.
        assert_abs_diff_eq!(valid.values().sum::<f64>(), 0.75);
        assert!(!valid.contains_key("0.2500"));
    }

    #[test]
    fn valid_fraction_counts_negative_energies() {
        let table = Table(BTreeMap::from([
            ("0".to_string(), -1.0),
            ("1".to_string(), 5.0),
        ]));
        let samples = SampleSet {
            counts: BTreeMap::from([("0".to_string(), 3), ("1".to_string(), 1)]),
            shots: 4,
            seed: 0,
        };
        assert_abs_diff_eq!(valid_fraction(&samples, &table).unwrap(), 0.75);
    }

    #[test]
    fn random_baseline_is_deterministic() {
        struct BitSum;
        impl BitstringEnergy for BitSum {
            fn energy(&self, bits: &str) -> Result<f64> {
                Ok(bits.bytes().filter(|&b| b == b'1').count() as f64)
            }
        }
        let a = random_baseline(&BitSum, LatticeKind::Tetra, 10, 100, 7).unwrap();
        let b = random_baseline(&BitSum, LatticeKind::Tetra, 10, 100, 7).unwrap();
        assert_eq!(a, b);
        let c = random_baseline(&BitSum, LatticeKind::Tetra, 10, 100, 8).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.len(), 100);
        // 13 qubits: sums must stay in range.
        assert!(a.iter().all(|&e| (0.0..=13.0).contains(&e)));
    }
}
