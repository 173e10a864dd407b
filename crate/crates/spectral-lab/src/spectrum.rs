//! Accessible frequency sets and redundancy profiles, computed
//! combinatorially from the encoding scales — no simulation involved.
//!
//! Each of the n·L encoding gates contributes an eigen-angle of ±β_i/2, so
//! eigen-sums live on the half-integer lattice. All lattice values are kept
//! as integers scaled by 2 (`2Λ`, `2ω`) and counts as arbitrary-precision
//! integers: the pair total 4^(nL) overflows any fixed width at realistic
//! depths.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

use crate::circuit::EncodingScheme;
use crate::error::{Error, Result};
use crate::util::{fmt_f64, fmt_omega};

/// Spacing of the frequency lattice hosting eigen-sums.
pub const LATTICE_STEP: f64 = 0.5;

/// Redundancy profile R(ω): for every accessible frequency, the number of
/// ordered eigen-sum pairs (Λ_k, Λ_j) with Λ_k − Λ_j = ω. Keys are stored
/// ×2-scaled so half-integer lattice values stay exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySpectrum {
    entries: BTreeMap<i64, BigUint>,
}

impl FrequencySpectrum {
    pub fn from_scaled_entries(entries: BTreeMap<i64, BigUint>) -> Self {
        FrequencySpectrum { entries }
    }

    /// Iterate (scaled 2ω, count) in ascending frequency order.
    pub fn scaled_entries(&self) -> impl Iterator<Item = (i64, &BigUint)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// Redundancy at an integer frequency (0 when inaccessible).
    pub fn redundancy_at(&self, omega: i64) -> BigUint {
        self.entries
            .get(&(2 * omega))
            .cloned()
            .unwrap_or_else(BigUint::zero)
    }

    /// Redundancy at an integer frequency as f64, for bound arithmetic.
    pub fn redundancy_at_f64(&self, omega: i64) -> f64 {
        self.redundancy_at(omega).to_f64().unwrap_or(f64::INFINITY)
    }

    /// Largest accessible frequency (as a real value).
    pub fn max_frequency(&self) -> f64 {
        self.entries
            .keys()
            .next_back()
            .map(|k| *k as f64 * LATTICE_STEP)
            .unwrap_or(0.0)
    }

    /// Σ_ω R(ω); equals D² = 4^(nL).
    pub fn total(&self) -> BigUint {
        let mut sum = BigUint::zero();
        for v in self.entries.values() {
            sum += v;
        }
        sum
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|(k, v)| self.entries.get(&-k) == Some(v))
    }

    /// CSV with raw counts plus a column normalized by the peak count R(0).
    pub fn to_csv(&self) -> String {
        let peak = self
            .entries
            .get(&0)
            .and_then(|v| v.to_f64())
            .unwrap_or(1.0);
        let mut out = String::from("omega,redundancy,redundancy_normalized\n");
        for (k, count) in &self.entries {
            let omega = *k as f64 * LATTICE_STEP;
            let normalized = count.to_f64().unwrap_or(f64::INFINITY) / peak;
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_omega(omega),
                count,
                fmt_f64(normalized)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                serde_json::json!({
                    "omega": *k as f64 * LATTICE_STEP,
                    "redundancy": v.to_string(),
                })
            })
            .collect();
        serde_json::json!({ "lattice_step": LATTICE_STEP, "entries": entries })
    }
}

/// The ×2-scaled per-gate eigen-angle (= β itself) for every encoding gate,
/// or an error if a scale does not sit on the lattice.
fn scaled_gate_values(encoding: &EncodingScheme, n: usize, layers: usize) -> Result<Vec<i64>> {
    if encoding.qubit_count() != n {
        return Err(Error::Config(format!(
            "encoding has {} betas but n = {n}",
            encoding.qubit_count()
        )));
    }
    if layers < 1 {
        return Err(Error::Config("layer count must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n * layers);
    for &beta in encoding.betas() {
        let rounded = beta.round();
        if (beta - rounded).abs() > 1e-9 || rounded < 1.0 || rounded > 1e15 {
            return Err(Error::UnsupportedLattice(format!(
                "encoding scale {beta} does not sit on the half-integer eigen-angle lattice; \
                 only integer scales are supported"
            )));
        }
        values.push(rounded as i64);
    }
    let per_layer = values.clone();
    for _ in 1..layers {
        values.extend_from_slice(&per_layer);
    }
    Ok(values)
}

/// Histogram of all eigen-sums Σ over gates of ±β_i/2, keyed by 2Λ, built by
/// iterated convolution of the per-gate two-point histograms. Total mass is
/// 2^(nL).
pub fn eigen_sum_histogram(
    encoding: &EncodingScheme,
    n: usize,
    layers: usize,
) -> Result<BTreeMap<i64, BigUint>> {
    let gates = scaled_gate_values(encoding, n, layers)?;
    let mut hist: BTreeMap<i64, BigUint> = BTreeMap::new();
    hist.insert(0, BigUint::one());
    for g in gates {
        let mut next: BTreeMap<i64, BigUint> = BTreeMap::new();
        for (value, count) in &hist {
            *next.entry(value + g).or_insert_with(BigUint::zero) += count;
            *next.entry(value - g).or_insert_with(BigUint::zero) += count;
        }
        hist = next;
    }
    Ok(hist)
}

/// R(ω) as the autocorrelation of the eigen-sum histogram:
/// R(ω) = Σ_m hist(m)·hist(m − ω).
pub fn redundancy_profile(
    encoding: &EncodingScheme,
    n: usize,
    layers: usize,
) -> Result<FrequencySpectrum> {
    let hist = eigen_sum_histogram(encoding, n, layers)?;
    let mut entries: BTreeMap<i64, BigUint> = BTreeMap::new();
    for (m1, c1) in &hist {
        for (m2, c2) in &hist {
            *entries.entry(m1 - m2).or_insert_with(BigUint::zero) += c1 * c2;
        }
    }
    Ok(FrequencySpectrum::from_scaled_entries(entries))
}

/// Exhaustive oracle: enumerate every per-gate sign choice, then count all
/// ordered eigen-sum pairs directly. Limited to 2^(nL) ≤ 2^20 configurations.
pub fn redundancy_bruteforce(
    encoding: &EncodingScheme,
    n: usize,
    layers: usize,
) -> Result<FrequencySpectrum> {
    let gates = scaled_gate_values(encoding, n, layers)?;
    if gates.len() > 20 {
        return Err(Error::Size(format!(
            "brute-force enumeration needs 2^{} configurations; limit is 2^20",
            gates.len()
        )));
    }
    let mut sums = vec![0i64];
    for g in gates {
        let mut next = Vec::with_capacity(sums.len() * 2);
        for s in sums {
            next.push(s + g);
            next.push(s - g);
        }
        sums = next;
    }
    // group by value: pair counting by multiplicity is exact
    sums.sort_unstable();
    let mut groups: Vec<(i64, u64)> = Vec::new();
    for s in sums {
        match groups.last_mut() {
            Some((value, count)) if *value == s => *count += 1,
            _ => groups.push((s, 1)),
        }
    }
    let mut entries: BTreeMap<i64, BigUint> = BTreeMap::new();
    for &(v1, c1) in &groups {
        for &(v2, c2) in &groups {
            *entries.entry(v1 - v2).or_insert_with(BigUint::zero) +=
                BigUint::from(c1) * BigUint::from(c2);
        }
    }
    Ok(FrequencySpectrum::from_scaled_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EncodingKind, EncodingScheme};

    fn named(kind: EncodingKind, n: usize) -> EncodingScheme {
        EncodingScheme::named(kind, n).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn single_gate_histogram() {
        let hist = eigen_sum_histogram(&named(EncodingKind::Constant, 1), 1, 1).unwrap();
        // ±1/2, scaled keys ±1
        assert_eq!(hist.len(), 2);
        assert_eq!(hist[&-1], big(1));
        assert_eq!(hist[&1], big(1));
    }

    #[test]
    fn two_gate_histogram_is_binomial() {
        let hist = eigen_sum_histogram(&named(EncodingKind::Constant, 2), 2, 1).unwrap();
        assert_eq!(hist[&-2], big(1));
        assert_eq!(hist[&0], big(2));
        assert_eq!(hist[&2], big(1));
    }

    #[test]
    fn ternary_two_qubit_histogram() {
        let hist = eigen_sum_histogram(&named(EncodingKind::Ternary, 2), 2, 1).unwrap();
        // ±1/2 ± 3/2 → {−2, −1, 1, 2}, scaled ×2 → {−4, −2, 2, 4}
        let expected: Vec<(i64, u64)> = vec![(-4, 1), (-2, 1), (2, 1), (4, 1)];
        assert_eq!(hist.len(), expected.len());
        for (k, v) in expected {
            assert_eq!(hist[&k], big(v), "key {k}");
        }
    }

    #[test]
    fn single_qubit_redundancy_profile() {
        let spec = redundancy_profile(&named(EncodingKind::Constant, 1), 1, 1).unwrap();
        assert_eq!(spec.redundancy_at(0), big(2));
        assert_eq!(spec.redundancy_at(1), big(1));
        assert_eq!(spec.redundancy_at(-1), big(1));
        assert_eq!(spec.total(), big(4));
    }

    #[test]
    fn two_qubit_constant_redundancy_profile() {
        let spec = redundancy_profile(&named(EncodingKind::Constant, 2), 2, 1).unwrap();
        assert_eq!(spec.redundancy_at(0), big(6));
        assert_eq!(spec.redundancy_at(1), big(4));
        assert_eq!(spec.redundancy_at(2), big(1));
        assert_eq!(spec.redundancy_at(-1), big(4));
        assert_eq!(spec.total(), big(16));
    }

    #[test]
    fn ternary_two_qubit_redundancy_profile() {
        let spec = redundancy_profile(&named(EncodingKind::Ternary, 2), 2, 1).unwrap();
        let expected: Vec<(i64, u64)> = vec![(0, 4), (1, 2), (2, 1), (3, 2), (4, 1)];
        for (omega, count) in expected {
            assert_eq!(spec.redundancy_at(omega), big(count), "omega {omega}");
            assert_eq!(spec.redundancy_at(-omega), big(count), "omega -{omega}");
        }
    }

    #[test]
    fn bruteforce_single_qubit_two_layers() {
        let spec = redundancy_bruteforce(&named(EncodingKind::Constant, 1), 1, 2).unwrap();
        assert_eq!(spec.redundancy_at(0), big(6));
        assert_eq!(spec.redundancy_at(1), big(4));
        assert_eq!(spec.redundancy_at(2), big(1));
    }

    #[test]
    fn bruteforce_counts_sum_to_four_to_the_gates() {
        for (kind, n, layers) in [
            (EncodingKind::Constant, 2, 2),
            (EncodingKind::Linear, 2, 2),
            (EncodingKind::Ternary, 2, 1),
        ] {
            let spec = redundancy_bruteforce(&named(kind, n), n, layers).unwrap();
            let expected = BigUint::from(4u64).pow((n * layers) as u32);
            assert_eq!(spec.total(), expected);
        }
    }

    #[test]
    fn convolution_matches_bruteforce_on_small_instances() {
        for kind in [
            EncodingKind::Constant,
            EncodingKind::Linear,
            EncodingKind::Binary,
            EncodingKind::Ternary,
        ] {
            for n in 1..=3 {
                for layers in 1..=3 {
                    let enc = named(kind, n);
                    let fast = redundancy_profile(&enc, n, layers).unwrap();
                    let slow = redundancy_bruteforce(&enc, n, layers).unwrap();
                    assert_eq!(fast, slow, "{kind:?} n={n} L={layers}");
                }
            }
        }
    }

    #[test]
    fn max_frequency_values_at_reference_scales() {
        let constant = redundancy_profile(&named(EncodingKind::Constant, 5), 5, 20).unwrap();
        assert_eq!(constant.max_frequency(), 100.0);
        let ternary = redundancy_profile(&named(EncodingKind::Ternary, 5), 5, 20).unwrap();
        assert_eq!(ternary.max_frequency(), 2420.0);
        // totals overflow u64/u128 and must still be exact
        assert_eq!(constant.total(), BigUint::from(4u64).pow(100));
    }

    #[test]
    fn constant_profile_is_symmetric_and_unimodal() {
        let spec = redundancy_profile(&named(EncodingKind::Constant, 3), 3, 3).unwrap();
        assert!(spec.is_symmetric());
        let max_omega = spec.max_frequency() as i64;
        let mut previous = spec.redundancy_at(0);
        for omega in 1..=max_omega {
            let here = spec.redundancy_at(omega);
            assert!(here < previous, "not strictly decreasing at {omega}");
            previous = here;
        }
        assert_eq!(spec.redundancy_at(max_omega), big(1));
    }

    #[test]
    fn single_layer_ternary_counts_follow_balanced_ternary_digits() {
        // distinct powers of 3 at L=1: a frequency's sign vector is its unique
        // balanced-ternary representation, and every zero digit doubles the
        // number of ordered pairs, so R(ω) = 2^(#zero digits)
        for n in 1..=3usize {
            let spec = redundancy_profile(&named(EncodingKind::Ternary, n), n, 1).unwrap();
            let max = ((3i64.pow(n as u32)) - 1) / 2;
            for omega in -max..=max {
                let mut value = omega;
                let mut zeros = 0u32;
                for _ in 0..n {
                    let digit = ((value % 3) + 4) % 3 - 1; // in {-1, 0, 1}
                    if digit == 0 {
                        zeros += 1;
                    }
                    value = (value - digit) / 3;
                }
                assert_eq!(
                    spec.redundancy_at(omega),
                    big(1u64 << zeros),
                    "n={n} omega={omega}"
                );
            }
            assert_eq!(spec.redundancy_at(max), big(1));
        }
    }

    #[test]
    fn non_lattice_scales_are_rejected() {
        let enc = EncodingScheme::custom(vec![1.5, 2.0]).unwrap();
        assert!(matches!(
            redundancy_profile(&enc, 2, 1),
            Err(Error::UnsupportedLattice(_))
        ));
    }

    #[test]
    fn oversized_bruteforce_is_a_size_error() {
        let enc = named(EncodingKind::Constant, 5);
        assert!(matches!(
            redundancy_bruteforce(&enc, 5, 5),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn csv_has_header_and_normalized_column() {
        let spec = redundancy_profile(&named(EncodingKind::Constant, 1), 1, 1).unwrap();
        let csv = spec.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "omega,redundancy,redundancy_normalized"
        );
        assert!(csv.contains("\n0,2,1.0000000000000000e0\n"));
    }
}
