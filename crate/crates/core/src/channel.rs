//! The physical pipeline between the spiral-pumped crystal and the
//! detectors: pump OAM sampling, down-conversion splitting under OAM
//! conservation, sorting onto the Fibonacci subspace, and the
//! detector-position filters that equalize pump detection probabilities.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibcode::FibAlphabet;
use crate::quantum::OamKet;

/// Whether a pump distribution is the raw source spectrum or the
/// post-filter (equalized) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    Equalized,
}

/// A probability distribution over pump OAM values (optionally signed).
#[derive(Debug, Clone, PartialEq)]
pub struct PumpDistribution {
    weights: BTreeMap<i64, f64>,
    provenance: Provenance,
}

impl PumpDistribution {
    pub fn from_weights(weights: BTreeMap<i64, f64>, provenance: Provenance) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::config("pump distribution is empty".to_string()));
        }
        if weights.values().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::config("pump weights must be finite and >= 0".to_string()));
        }
        let total: f64 = weights.values().sum();
        if total <= 0.0 {
            return Err(Error::config("pump weights sum to zero".to_string()));
        }
        let weights = weights.into_iter().map(|(v, w)| (v, w / total)).collect();
        Ok(PumpDistribution {
            weights,
            provenance,
        })
    }

    /// Uniform over the alphabet members.
    pub fn uniform(alphabet: &FibAlphabet) -> Self {
        let w = 1.0 / alphabet.size() as f64;
        PumpDistribution {
            weights: alphabet.members().iter().map(|&v| (v, w)).collect(),
            provenance: Provenance::Equalized,
        }
    }

    /// Uniform over both signs of the alphabet members (2N values).
    pub fn uniform_signed(alphabet: &FibAlphabet) -> Self {
        let w = 0.5 / alphabet.size() as f64;
        let mut weights = BTreeMap::new();
        for &v in alphabet.members() {
            weights.insert(v, w);
            weights.insert(-v, w);
        }
        PumpDistribution {
            weights,
            provenance: Provenance::Equalized,
        }
    }

    /// Geometric decay over the alphabet: weight of the i-th member
    /// proportional to `ratio^i`.
    pub fn geometric(alphabet: &FibAlphabet, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::config(format!("geometric ratio must be > 0, got {ratio}")));
        }
        let weights = alphabet
            .members()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, ratio.powi(i as i32)))
            .collect();
        Self::from_weights(weights, Provenance::Raw)
    }

    /// Point mass on a single value.
    pub fn point_mass(value: i64) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(value, 1.0);
        PumpDistribution {
            weights,
            provenance: Provenance::Raw,
        }
    }

    pub fn weights(&self) -> &BTreeMap<i64, f64> {
        &self.weights
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn weight_of(&self, v: i64) -> f64 {
        self.weights.get(&v).copied().unwrap_or(0.0)
    }

    /// Draw one pump value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (&v, &w) in &self.weights {
            acc += w;
            last = v;
            if x < acc {
                return v;
            }
        }
        last
    }
}

/// Shape of the down-conversion splitting weight over the generated OAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpdcProfileKind {
    /// Uniform over all integer splittings within the bandwidth.
    Uniform,
    /// Linearly decaying with the larger of the two generated magnitudes.
    Triangular,
}

/// Splitting weight function `w(l | pump)` with a hard bandwidth limit on
/// the magnitude of either generated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdcProfile {
    pub kind: SpdcProfileKind,
    /// Maximum |OAM| either arm may carry.
    pub bandwidth: i64,
}

impl Default for SpdcProfile {
    fn default() -> Self {
        // Covers the largest gap of the standard alphabet.
        SpdcProfile {
            kind: SpdcProfileKind::Uniform,
            bandwidth: 89,
        }
    }
}

impl SpdcProfile {
    fn support(&self, pump: i64) -> (i64, i64) {
        let b = self.bandwidth;
        ((-b).max(pump - b), b.min(pump + b))
    }

    fn weight(&self, pump: i64, l: i64) -> f64 {
        match self.kind {
            SpdcProfileKind::Uniform => 1.0,
            SpdcProfileKind::Triangular => {
                (self.bandwidth + 1 - l.abs().max((pump - l).abs())) as f64
            }
        }
    }

    /// Draw one splitting `(l, pump - l)` of the pump value.
    pub fn sample_split<R: Rng + ?Sized>(&self, pump: i64, rng: &mut R) -> (i64, i64) {
        let (lo, hi) = self.support(pump);
        match self.kind {
            SpdcProfileKind::Uniform => {
                let l = rng.gen_range(lo..=hi);
                (l, pump - l)
            }
            SpdcProfileKind::Triangular => {
                let total: f64 = (lo..=hi).map(|l| self.weight(pump, l)).sum();
                let mut x: f64 = rng.gen::<f64>() * total;
                for l in lo..=hi {
                    x -= self.weight(pump, l);
                    if x < 0.0 {
                        return (l, pump - l);
                    }
                }
                (hi, pump - hi)
            }
        }
    }
}

/// One emitted pair as it moves through the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairEvent {
    pub seq: u64,
    /// The pump OAM that generated the pair.
    pub pump: i64,
    pub alice: i64,
    pub bob: i64,
    pub alice_is_fib: bool,
    pub bob_is_fib: bool,
    /// Both arms admitted by the sorters (decoy routing not counted).
    pub kept_by_sorter: bool,
    /// Retained for the decoy check instead of the key pipeline.
    pub decoy: bool,
    pub survived_filter: bool,
    pub eve_intercepted: bool,
    pub eve_measured: Option<i64>,
    pub security_sampled: bool,
    pub non_adjacent: Option<bool>,
}

impl PairEvent {
    pub fn new(seq: u64, pump: i64, alice: i64, bob: i64) -> Self {
        debug_assert_eq!(alice + bob, pump, "OAM conservation");
        PairEvent {
            seq,
            pump,
            alice,
            bob,
            alice_is_fib: false,
            bob_is_fib: false,
            kept_by_sorter: false,
            decoy: false,
            survived_filter: true,
            eve_intercepted: false,
            eve_measured: None,
            security_sampled: false,
            non_adjacent: None,
        }
    }
}

/// Sorter behaviour for arrivals outside the Fibonacci arm set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMode {
    /// Non-Fibonacci arrivals are dropped.
    Strict,
    /// Non-Fibonacci arrivals at Alice are retained and flagged for the
    /// decoy check.
    Decoy,
}

/// Flag both arms as Fibonacci-valued or not, and decide the event's fate.
///
/// An arm passes the sorter when it carries one of the alphabet's valid arm
/// values. In signed mode the detectors cover both signs (sign sifting
/// happens later); otherwise only positive values are detected at all.
pub fn sort_pair(event: &mut PairEvent, alphabet: &FibAlphabet, mode: SortMode, signed: bool) {
    let admitted = |v: i64| alphabet.is_arm_value(if signed { v.abs() } else { v });
    event.alice_is_fib = admitted(event.alice);
    event.bob_is_fib = admitted(event.bob);
    event.kept_by_sorter = event.alice_is_fib && event.bob_is_fib;
    // Alice keeping a positive non-Fibonacci value is what makes a decoy
    // round; what Bob's photon does is decided later by its own sorter
    // projection. Zero or negative arrivals fall outside her detectors.
    event.decoy = mode == SortMode::Decoy && !event.alice_is_fib && event.alice > 0;
}

/// Per-value Bernoulli filters placed at the detector positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    transmissions: BTreeMap<i64, f64>,
    /// Expected fraction of raw events surviving the bank (`N * p_min` for
    /// an equalizing bank).
    pub throughput: f64,
}

impl FilterBank {
    /// A bank that passes everything.
    pub fn transparent(values: &[i64]) -> Self {
        FilterBank {
            transmissions: values.iter().map(|&v| (v, 1.0)).collect(),
            throughput: 1.0,
        }
    }

    pub fn transmissions(&self) -> &BTreeMap<i64, f64> {
        &self.transmissions
    }

    pub fn min_transmission(&self) -> f64 {
        self.transmissions
            .values()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Transmission for a value; anything the bank was not designed for
    /// faces the tightest filter.
    pub fn transmission_for(&self, v: i64) -> f64 {
        self.transmissions
            .get(&v)
            .copied()
            .unwrap_or_else(|| self.min_transmission())
    }

    pub fn survives<R: Rng + ?Sized>(&self, v: i64, rng: &mut R) -> bool {
        rng.gen_bool(self.transmission_for(v).clamp(0.0, 1.0))
    }
}

/// Design the detector filters that flatten a raw pump distribution:
/// `t_v = p_min / p_v`, so filtered-and-kept values are uniform.
///
/// Errors on any zero-weight channel (an absent value cannot be equalized).
pub fn equalization_filters(raw: &PumpDistribution) -> Result<FilterBank> {
    let min = raw
        .weights()
        .values()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::config(
            "cannot equalize a distribution with a zero-weight value".to_string(),
        ));
    }
    let transmissions: BTreeMap<i64, f64> = raw
        .weights()
        .iter()
        .map(|(&v, &w)| (v, min / w))
        .collect();
    let throughput = raw.weights().len() as f64 * min;
    Ok(FilterBank {
        transmissions,
        throughput,
    })
}

/// The state in transit to the partner after one side measures `measured`,
/// assuming a uniform pump superposition: the equal-amplitude superposition
/// of the Fibonacci neighbours of `measured` whose sum with it is a pump in
/// the alphabet. Single-term at the ends of the arm chain.
pub fn conditional_partner_ket(measured: i64, alphabet: &FibAlphabet) -> Result<OamKet> {
    let partners = alphabet.partner_values_for_arm(measured);
    if partners.is_empty() {
        return Err(Error::domain(format!(
            "{measured} appears in no decomposition of an alphabet member"
        )));
    }
    OamKet::uniform(&partners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn uniform_sampling_frequencies() {
        let alphabet = FibAlphabet::standard();
        let dist = PumpDistribution::uniform(&alphabet);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let trials = 100_000usize;
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for _ in 0..trials {
            *counts.entry(dist.sample(&mut rng)).or_default() += 1;
        }
        let p = 1.0 / 8.0;
        let sigma3 = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
        for &v in alphabet.members() {
            let f = counts[&v] as f64 / trials as f64;
            assert!((f - p).abs() < sigma3, "value {v}: {f}");
        }
    }

    #[test]
    fn point_mass_always_returns_value() {
        let dist = PumpDistribution::point_mass(21);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(dist.sample(&mut rng), 21);
        }
    }

    #[test]
    fn empty_distribution_rejected() {
        assert!(matches!(
            PumpDistribution::from_weights(BTreeMap::new(), Provenance::Raw),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn split_conserves_oam() {
        let profile = SpdcProfile::default();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100_000 {
            let pump = [3, 5, 8, 13, 21, 34, 55, 89][rng.gen_range(0..8)];
            let (a, b) = profile.sample_split(pump, &mut rng);
            assert_eq!(a + b, pump);
            assert!(a.abs() <= profile.bandwidth && b.abs() <= profile.bandwidth);
        }
    }

    #[test]
    fn split_reaches_non_fibonacci_pairs() {
        let profile = SpdcProfile::default();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut seen_94 = false;
        let mut seen_310 = false;
        for _ in 0..200_000 {
            let (a, b) = profile.sample_split(13, &mut rng);
            let pair = (a.min(b), a.max(b));
            if pair == (4, 9) {
                seen_94 = true;
            }
            if pair == (3, 10) {
                seen_310 = true;
            }
        }
        assert!(seen_94 && seen_310);
    }

    #[test]
    fn triangular_profile_prefers_balanced_splits() {
        let profile = SpdcProfile {
            kind: SpdcProfileKind::Triangular,
            bandwidth: 89,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut near = 0usize;
        let mut far = 0usize;
        for _ in 0..50_000 {
            let (a, b) = profile.sample_split(21, &mut rng);
            let m = a.abs().max(b.abs());
            if m <= 30 {
                near += 1;
            } else if m >= 60 {
                far += 1;
            }
            assert_eq!(a + b, 21);
        }
        assert!(near > far);
    }

    #[test]
    fn sorting_flags() {
        let alphabet = FibAlphabet::standard();
        let mut e = PairEvent::new(0, 21, 8, 13);
        sort_pair(&mut e, &alphabet, SortMode::Strict, false);
        assert!(e.alice_is_fib && e.bob_is_fib && e.kept_by_sorter && !e.decoy);

        let mut e = PairEvent::new(1, 13, 9, 4);
        sort_pair(&mut e, &alphabet, SortMode::Strict, false);
        assert!(!e.alice_is_fib && !e.bob_is_fib && !e.kept_by_sorter && !e.decoy);

        let mut e = PairEvent::new(2, 13, 10, 3);
        sort_pair(&mut e, &alphabet, SortMode::Decoy, false);
        assert!(!e.alice_is_fib && e.bob_is_fib && !e.kept_by_sorter && e.decoy);

        // decoy status depends only on Alice's side
        let mut e = PairEvent::new(4, 13, 9, 4);
        sort_pair(&mut e, &alphabet, SortMode::Decoy, false);
        assert!(e.decoy && !e.kept_by_sorter);

        // same event in strict mode is simply dropped
        let mut e = PairEvent::new(3, 13, 10, 3);
        sort_pair(&mut e, &alphabet, SortMode::Strict, false);
        assert!(!e.decoy && !e.kept_by_sorter);
    }

    #[test]
    fn sorting_sign_handling() {
        let alphabet = FibAlphabet::standard();
        // negative and zero arrivals are invisible to the unsigned detectors
        let mut e = PairEvent::new(0, 13, -21, 34);
        sort_pair(&mut e, &alphabet, SortMode::Decoy, false);
        assert!(!e.alice_is_fib && !e.decoy && !e.kept_by_sorter);
        let mut e = PairEvent::new(1, 3, 0, 3);
        sort_pair(&mut e, &alphabet, SortMode::Decoy, false);
        assert!(!e.decoy);
        // signed mode admits both signs
        let mut e = PairEvent::new(2, -21, -8, -13);
        sort_pair(&mut e, &alphabet, SortMode::Strict, true);
        assert!(e.kept_by_sorter);
    }

    #[test]
    fn equalization_formula() {
        let mut weights = BTreeMap::new();
        weights.insert(3, 0.4);
        weights.insert(5, 0.1);
        let raw = PumpDistribution::from_weights(weights, Provenance::Raw).unwrap();
        let bank = equalization_filters(&raw).unwrap();
        assert!((bank.transmission_for(3) - 0.25).abs() < 1e-12);
        assert!((bank.transmission_for(5) - 1.0).abs() < 1e-12);
        assert!((bank.throughput - 0.4).abs() < 1e-12);

        // uniform raw needs no filtering
        let bank = equalization_filters(&PumpDistribution::uniform(&FibAlphabet::standard())).unwrap();
        assert!(bank.transmissions().values().all(|&t| (t - 1.0).abs() < 1e-12));
        assert!((bank.throughput - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equalization_monte_carlo_two_values() {
        let mut weights = BTreeMap::new();
        weights.insert(3, 0.4);
        weights.insert(5, 0.1);
        let raw = PumpDistribution::from_weights(weights, Provenance::Raw).unwrap();
        let bank = equalization_filters(&raw).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let mut kept: BTreeMap<i64, usize> = BTreeMap::new();
        let mut total = 0usize;
        for _ in 0..200_000 {
            let v = raw.sample(&mut rng);
            if bank.survives(v, &mut rng) {
                *kept.entry(v).or_default() += 1;
                total += 1;
            }
        }
        let f3 = kept[&3] as f64 / total as f64;
        let sigma3 = 3.0 * (0.25f64 / total as f64).sqrt();
        assert!((f3 - 0.5).abs() < sigma3, "{f3} vs 0.5 +/- {sigma3}");
    }

    #[test]
    fn geometric_equalization_monte_carlo() {
        let alphabet = FibAlphabet::standard();
        let raw = PumpDistribution::geometric(&alphabet, 0.7).unwrap();
        let bank = equalization_filters(&raw).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let mut kept: BTreeMap<i64, usize> = BTreeMap::new();
        let mut total = 0usize;
        for _ in 0..1_000_000 {
            let v = raw.sample(&mut rng);
            if bank.survives(v, &mut rng) {
                *kept.entry(v).or_default() += 1;
                total += 1;
            }
        }
        let p = 1.0 / 8.0;
        let sigma3 = 3.0 * (p * (1.0 - p) / total as f64).sqrt();
        for &v in alphabet.members() {
            let f = kept[&v] as f64 / total as f64;
            assert!((f - p).abs() < sigma3, "value {v}: {f} vs {p} +/- {sigma3}");
        }
    }

    #[test]
    fn zero_weight_cannot_be_equalized() {
        let mut weights = BTreeMap::new();
        weights.insert(3, 1.0);
        weights.insert(5, 0.0);
        // from_weights normalizes but keeps the zero
        let raw = PumpDistribution::from_weights(weights, Provenance::Raw).unwrap();
        assert!(matches!(equalization_filters(&raw), Err(Error::Config(_))));
    }

    #[test]
    fn conditional_kets() {
        let alphabet = FibAlphabet::standard();
        assert_eq!(
            conditional_partner_ket(8, &alphabet).unwrap(),
            OamKet::uniform(&[5, 13]).unwrap()
        );
        assert_eq!(
            conditional_partner_ket(55, &alphabet).unwrap(),
            OamKet::basis(34)
        );
        assert_eq!(
            conditional_partner_ket(1, &alphabet).unwrap(),
            OamKet::basis(2)
        );
        assert!(matches!(
            conditional_partner_ket(4, &alphabet),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conditional_ket_matches_joint_state_restriction() {
        use crate::quantum::EntangledPairState;
        let alphabet = FibAlphabet::standard();
        let joint = EntangledPairState::for_alphabet(&alphabet);
        for &v in &alphabet.arm_values() {
            assert_eq!(
                conditional_partner_ket(v, &alphabet).unwrap(),
                joint.conditional_on_alice(v).unwrap(),
                "arm value {v}"
            );
        }
    }

    #[test]
    fn orientation_fairness_of_fib_splits() {
        // conditioned on both arms Fibonacci, each orientation is a fair coin
        let profile = SpdcProfile::default();
        let alphabet = FibAlphabet::standard();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let mut alice_larger = 0usize;
        let mut kept = 0usize;
        for _ in 0..2_000_000 {
            let (a, b) = profile.sample_split(21, &mut rng);
            if alphabet.is_arm_value(a) && alphabet.is_arm_value(b) {
                kept += 1;
                if a > b {
                    alice_larger += 1;
                }
            }
        }
        assert!(kept > 10_000);
        let f = alice_larger as f64 / kept as f64;
        let sigma3 = 3.0 * (0.25f64 / kept as f64).sqrt();
        assert!((f - 0.5).abs() < sigma3, "{f}");
    }
}
