//! Sparse state algebra over integer OAM basis labels.
//!
//! States are maps from OAM value to complex amplitude; alphabet sizes are
//! tiny, so no dense Hilbert-space vectors are ever built. Mixed states are
//! handled procedurally by the caller (sample a choice, then hold a pure
//! ket).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fibcode::FibAlphabet;

/// Tolerance for algebraic identities (normalization, orthogonality).
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A normalized finite superposition over integer OAM values.
///
/// Zero-amplitude entries are never stored; iteration order is by OAM value,
/// which keeps measurement sampling deterministic under a fixed seed.
#[derive(Debug, Clone, PartialEq)]
pub struct OamKet {
    terms: BTreeMap<i64, Complex64>,
}

impl OamKet {
    /// Build a normalized ket from parallel value/amplitude lists.
    pub fn superpose(values: &[i64], amplitudes: &[Complex64]) -> Result<Self> {
        if values.len() != amplitudes.len() {
            return Err(Error::domain(format!(
                "superpose: {} values but {} amplitudes",
                values.len(),
                amplitudes.len()
            )));
        }
        let mut terms: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&v, &a) in values.iter().zip(amplitudes) {
            *terms.entry(v).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        terms.retain(|_, a| a.norm_sqr() > 0.0);
        let norm_sqr: f64 = terms.values().map(|a| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::domain(
                "superpose: all amplitudes are zero".to_string(),
            ));
        }
        let norm = norm_sqr.sqrt();
        for a in terms.values_mut() {
            *a /= norm;
        }
        Ok(OamKet { terms })
    }

    /// Equal-amplitude superposition of the given values.
    pub fn uniform(values: &[i64]) -> Result<Self> {
        let amps = vec![Complex64::new(1.0, 0.0); values.len()];
        Self::superpose(values, &amps)
    }

    /// The basis state `|l>`.
    pub fn basis(l: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(l, Complex64::new(1.0, 0.0));
        OamKet { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.terms.iter().map(|(&v, &a)| (v, a))
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied()
    }

    pub fn amplitude(&self, l: i64) -> Complex64 {
        self.terms.get(&l).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn probability(&self, l: i64) -> f64 {
        self.amplitude(l).norm_sqr()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Projective measurement in the OAM basis. Returns `l` with
    /// probability `|amplitude(l)|^2`; deterministic under a fixed seed.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<i64> {
        if !self.is_normalized() {
            return Err(Error::domain(format!(
                "measure: ket is not normalized (|psi|^2 = {})",
                self.norm_sqr()
            )));
        }
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = None;
        for (&v, a) in &self.terms {
            acc += a.norm_sqr();
            last = Some(v);
            if x < acc {
                return Ok(v);
            }
        }
        // rounding slack: attribute the residual to the last term
        Ok(last.expect("normalized ket is nonempty"))
    }

    /// Renormalized restriction of the ket to the alphabet members, plus the
    /// pre-renormalization weight (the sorter's detection probability).
    /// Returns `(None, 0.0)` when the overlap is zero.
    pub fn project_fib_subspace(&self, alphabet: &FibAlphabet) -> (Option<OamKet>, f64) {
        let kept: BTreeMap<i64, Complex64> = self
            .terms
            .iter()
            .filter(|(v, _)| alphabet.contains(**v))
            .map(|(&v, &a)| (v, a))
            .collect();
        let weight: f64 = kept.values().map(|a| a.norm_sqr()).sum();
        if weight == 0.0 {
            return (None, 0.0);
        }
        let norm = weight.sqrt();
        let terms = kept.into_iter().map(|(v, a)| (v, a / norm)).collect();
        (Some(OamKet { terms }), weight)
    }
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner_product(a: &OamKet, b: &OamKet) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (v, amp_a) in a.terms() {
        acc += amp_a.conj() * b.amplitude(v);
    }
    acc
}

/// The alternating-sign test state over an alphabet:
/// `(1/sqrt(N)) sum_k (-1)^k |F_{n0+k}>`.
///
/// It overlaps every alphabet member with magnitude `1/sqrt(N)` but is
/// orthogonal to every equal-weight superposition of two consecutive
/// members, which is what exposes a resent photon on decoy events.
pub fn test_state(alphabet: &FibAlphabet) -> OamKet {
    let n = alphabet.size() as f64;
    let amp = 1.0 / n.sqrt();
    let terms = alphabet
        .members()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (v, Complex64::new(sign * amp, 0.0))
        })
        .collect();
    OamKet { terms }
}

/// A normalized bipartite state over (Alice, Bob) OAM pairs, with each pair
/// summing to a pump value in the generating alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledPairState {
    terms: BTreeMap<(i64, i64), Complex64>,
}

impl EntangledPairState {
    /// The post-sorter entangled state of one emission over a whole
    /// alphabet of pump values:
    /// `sum_n (|F_{n-1}, F_{n-2}> + |F_{n-2}, F_{n-1}>) / sqrt(2N)`.
    pub fn for_alphabet(alphabet: &FibAlphabet) -> Self {
        let mut terms = BTreeMap::new();
        let count = (2 * alphabet.size()) as f64;
        let amp = Complex64::new(1.0 / count.sqrt(), 0.0);
        for &pump in alphabet.members() {
            let (hi, lo) = alphabet.decompose(pump).unwrap();
            *terms.entry((hi, lo)).or_insert(Complex64::new(0.0, 0.0)) += amp;
            *terms.entry((lo, hi)).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        EntangledPairState { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.terms.iter().map(|(&p, &a)| (p, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Bob's normalized conditional state after Alice measures `alice_value`.
    pub fn conditional_on_alice(&self, alice_value: i64) -> Result<OamKet> {
        let values: Vec<i64> = self
            .terms
            .keys()
            .filter(|(a, _)| *a == alice_value)
            .map(|&(_, b)| b)
            .collect();
        let amps: Vec<Complex64> = self
            .terms
            .iter()
            .filter(|((a, _), _)| *a == alice_value)
            .map(|(_, &amp)| amp)
            .collect();
        OamKet::superpose(&values, &amps)
    }
}
