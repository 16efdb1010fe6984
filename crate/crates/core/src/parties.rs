//! What the parties do: Eve's intercept-resend attack in two resend
//! models, the two-bit classical exchange between Alice and Bob, the
//! non-adjacency security check, the decoy-state tamper check, and
//! signed-mode sifting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibcode::{BitBlock, ExchangeScheme, FibAlphabet};
use crate::quantum::OamKet;

/// What Eve sends onward after measuring an intercepted photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResendModel {
    /// Eve guesses which alphabet arm value the *other* photon carried and
    /// resends the state the intercepted photon would be in given that
    /// guess: for a measured `v` this is `(|v''⟩+|v⟩)/√2` with `v''` two
    /// sequence steps away, restricted to guesses whose sum is a legal pump.
    PartnerKet,
    /// Eve resends an equal superposition of the measured value and one of
    /// its immediate Fibonacci neighbours, `(|v'⟩+|v⟩)/√2`.
    ConsecutivePair,
}

/// How Eve turns the two announced bits into a pump guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMode {
    /// Uniform over the pumps consistent with the bits.
    Uniform,
    /// Most frequent pump among the configurations emitting those bits.
    MaxLikelihood,
}

/// Eve measures the in-transit state, then fabricates a replacement photon.
///
/// Returns her measured value and the resent state. Measured values the
/// model cannot interpret (below the sequence, or with no legal partner)
/// are resent unchanged.
pub fn eve_intercept_resend<R: Rng + ?Sized>(
    transit: &OamKet,
    alphabet: &FibAlphabet,
    model: ResendModel,
    rng: &mut R,
) -> Result<(i64, OamKet)> {
    let measured = transit.measure(rng)?;
    let seq = alphabet.sequence();
    // A non-Fibonacci reading is interpreted as the nearest value below it.
    let interpreted = match seq.nearest_at_or_below(measured) {
        Some(w) => w,
        None => return Ok((measured, OamKet::basis(measured))),
    };
    let resent = match model {
        ResendModel::PartnerKet => {
            let guesses = alphabet.partner_values_for_arm(interpreted);
            if guesses.is_empty() {
                OamKet::basis(measured)
            } else {
                let guess = guesses[rng.gen_range(0..guesses.len())];
                // The state the photon "should" be in when the partner
                // photon carries `guess`.
                OamKet::uniform(&alphabet.partner_values_for_arm(guess))?
            }
        }
        ResendModel::ConsecutivePair => {
            let mut options: Vec<Vec<i64>> = Vec::with_capacity(2);
            if let Some(p) = seq.prev_before(interpreted) {
                options.push(vec![p, interpreted]);
            }
            if let Some(n) = seq.next_after(interpreted) {
                options.push(vec![interpreted, n]);
            }
            if options.is_empty() {
                OamKet::basis(measured)
            } else {
                let pick = rng.gen_range(0..options.len());
                OamKet::uniform(&options[pick])?
            }
        }
    };
    Ok((measured, resent))
}

/// Transcript of one round of the public bit exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub alice_value: i64,
    pub bob_value: i64,
    pub alice_bit: u8,
    pub bob_bit: u8,
    /// Alice's value as Bob reconstructs it from her bit.
    pub alice_as_seen_by_bob: i64,
    /// Bob's value as Alice reconstructs it from his bit.
    pub bob_as_seen_by_alice: i64,
}

impl ExchangeRecord {
    /// The pump Alice writes down.
    pub fn alice_pump(&self) -> i64 {
        self.alice_value + self.bob_as_seen_by_alice
    }

    /// The pump Bob writes down.
    pub fn bob_pump(&self) -> i64 {
        self.bob_value + self.alice_as_seen_by_bob
    }

    /// Both reconstructions match the actual values.
    pub fn agree(&self) -> bool {
        self.alice_as_seen_by_bob == self.alice_value
            && self.bob_as_seen_by_alice == self.bob_value
    }
}

/// Run the public exchange for one detected pair.
///
/// Alice announces first; Bob reconstructs her value from his own photon
/// before choosing his reply. Fails with a corruption error when a bit is
/// inconsistent with every candidate, which cannot happen honestly.
pub fn classical_exchange(
    scheme: &ExchangeScheme,
    alice_value: i64,
    bob_value: i64,
) -> Result<ExchangeRecord> {
    let alice_bit = scheme.alice_bit(alice_value)?;
    let alice_as_seen_by_bob = scheme.decode_alice_value(bob_value, alice_bit)?;
    let bob_bit = scheme.bob_bit(bob_value, alice_as_seen_by_bob)?;
    let bob_as_seen_by_alice = scheme.decode_bob_value(alice_value, bob_bit)?;
    Ok(ExchangeRecord {
        alice_value,
        bob_value,
        alice_bit,
        bob_bit,
        alice_as_seen_by_bob,
        bob_as_seen_by_alice,
    })
}

/// Outcome of a statistical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Clean,
    Compromised,
    Inconclusive,
}

/// Result of the non-adjacency security check over a sampled subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub checked: usize,
    pub violations: usize,
    pub overall_fraction: f64,
    /// Restricted to rounds whose Alice value sits deep enough in the arm
    /// chain that an intercept-resend attack triggers a violation with
    /// probability exactly 1/4.
    pub interior_checked: usize,
    pub interior_violations: usize,
    pub interior_fraction: f64,
    pub verdict: Verdict,
}

/// Arm values far enough from both ends of the arm chain that the full
/// three-step neighbourhood an intercept-resend attack can reach stays on
/// the chain. For the standard alphabet: 5, 8, 13.
pub fn interior_arm_values(alphabet: &FibAlphabet) -> Vec<i64> {
    let arms = alphabet.arm_values();
    let l = arms.len();
    if l < 7 {
        return Vec::new();
    }
    arms[3..l - 3].to_vec()
}

/// Compare disclosed value pairs against the adjacency invariant.
///
/// Honest pairs are always Fibonacci-adjacent, so any violation on a
/// sufficiently large sample is flagged. Below `min_samples` the verdict is
/// inconclusive. Signed values are compared by magnitude.
pub fn security_check(
    pairs: &[(i64, i64)],
    alphabet: &FibAlphabet,
    min_samples: usize,
) -> SecurityReport {
    let seq = alphabet.sequence();
    let interior = interior_arm_values(alphabet);
    let mut violations = 0usize;
    let mut interior_checked = 0usize;
    let mut interior_violations = 0usize;
    for &(a, b) in pairs {
        let bad = !seq.is_adjacent(a.abs(), b.abs());
        if bad {
            violations += 1;
        }
        if interior.contains(&a.abs()) {
            interior_checked += 1;
            if bad {
                interior_violations += 1;
            }
        }
    }
    let checked = pairs.len();
    let verdict = if checked < min_samples {
        Verdict::Inconclusive
    } else if violations == 0 {
        Verdict::Clean
    } else {
        Verdict::Compromised
    };
    SecurityReport {
        checked,
        violations,
        overall_fraction: fraction(violations, checked),
        interior_checked,
        interior_violations,
        interior_fraction: fraction(interior_violations, interior_checked),
        verdict,
    }
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Result of the decoy-state overlap check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyReport {
    pub samples: usize,
    /// Mean squared overlap of Bob's surviving decoy states with the
    /// alternating-sign test state.
    pub mean_overlap: f64,
    /// Population variance of the squared overlaps.
    pub overlap_variance: f64,
    /// Value of the mean on an untampered channel: 1/N.
    pub expected_untampered: f64,
    pub verdict: Verdict,
}

/// Judge a batch of squared test-state overlaps from decoy rounds.
///
/// Untampered transit states all give exactly `1/N`; an intercept-resend
/// attack collapses them and drives the mean toward zero. The decision
/// threshold is the midpoint `1/(2N)`.
pub fn decoy_check(overlaps: &[f64], alphabet: &FibAlphabet) -> DecoyReport {
    let expected = 1.0 / alphabet.size() as f64;
    if overlaps.is_empty() {
        return DecoyReport {
            samples: 0,
            mean_overlap: 0.0,
            overlap_variance: 0.0,
            expected_untampered: expected,
            verdict: Verdict::Inconclusive,
        };
    }
    let n = overlaps.len() as f64;
    let mean = overlaps.iter().sum::<f64>() / n;
    let variance = overlaps.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let verdict = if mean > expected / 2.0 {
        Verdict::Clean
    } else {
        Verdict::Compromised
    };
    DecoyReport {
        samples: overlaps.len(),
        mean_overlap: mean,
        overlap_variance: variance,
        expected_untampered: expected,
        verdict,
    }
}

/// Sift one signed-mode pair: kept only when both photons carry the same
/// sign, in which case the recovered signed pump encodes one four-bit
/// block. Mixed-sign pairs (pump `F_n` split as `F_{n+2} - F_{n+1}`) are
/// discarded because the parties cannot distinguish the two signed pumps
/// that produce them.
pub fn sift_signed(alphabet: &FibAlphabet, alice: i64, bob: i64) -> Option<BitBlock> {
    if alice.signum() != bob.signum() {
        return None;
    }
    let pump = alice + bob;
    if !alphabet.contains(pump.abs()) {
        return None;
    }
    alphabet.encode_signed(pump).ok()
}

/// Eve's guess of the pump from the two public bits alone.
pub fn eve_classical_guess<R: Rng + ?Sized>(
    scheme: &ExchangeScheme,
    bits: (u8, u8),
    mode: GuessMode,
    rng: &mut R,
) -> Result<i64> {
    let candidates = scheme.eve_infer(bits);
    if candidates.is_empty() {
        return Err(Error::domain(format!(
            "no pump is consistent with bits {bits:?}"
        )));
    }
    match mode {
        GuessMode::Uniform => Ok(candidates[rng.gen_range(0..candidates.len())]),
        GuessMode::MaxLikelihood => {
            // weight candidates by how many configurations emit these bits
            let configs = scheme.configurations();
            let count = |p: i64| {
                configs
                    .iter()
                    .filter(|c| c.pump == p && (c.alice_bit, c.bob_bit) == bits)
                    .count()
            };
            let best = candidates.iter().map(|&p| count(p)).max().unwrap();
            let top: Vec<i64> = candidates.into_iter().filter(|&p| count(p) == best).collect();
            Ok(top[rng.gen_range(0..top.len())])
        }
    }
}
