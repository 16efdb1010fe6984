//! Fibonacci arithmetic, the working alphabet, bit-block codecs and the
//! two-bit classical exchange scheme.
//!
//! The sequence convention throughout is `F_1 = 1, F_2 = 2,
//! F_k = F_{k-1} + F_{k-2}`, so the values run 1, 2, 3, 5, 8, 13, ...
//! A protocol alphabet is a run of `N` consecutive members (with `N` a power
//! of two) whose pump values each carry a `log2(N)`-bit key segment.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Fibonacci sequence with `F_1 = 1`, `F_2 = 2`, precomputed as far as
/// `i64` allows (87 members).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibSequence {
    values: Vec<i64>,
}

impl Default for FibSequence {
    fn default() -> Self {
        Self::new()
    }
}

impl FibSequence {
    pub fn new() -> Self {
        let mut values = vec![1i64, 2];
        loop {
            let n = values.len();
            match values[n - 1].checked_add(values[n - 2]) {
                Some(v) => values.push(v),
                None => break,
            }
        }
        FibSequence { values }
    }

    /// Value at 1-based index `k`, i.e. `F_k`.
    pub fn value(&self, k: usize) -> Option<i64> {
        if k == 0 {
            return None;
        }
        self.values.get(k - 1).copied()
    }

    /// 1-based index of a Fibonacci value.
    pub fn index_of(&self, v: i64) -> Option<usize> {
        self.values.binary_search(&v).ok().map(|i| i + 1)
    }

    pub fn contains(&self, v: i64) -> bool {
        self.index_of(v).is_some()
    }

    /// The member after Fibonacci value `v`.
    pub fn next_after(&self, v: i64) -> Option<i64> {
        let k = self.index_of(v)?;
        self.value(k + 1)
    }

    /// The member before Fibonacci value `v` (`None` for `F_1`).
    pub fn prev_before(&self, v: i64) -> Option<i64> {
        let k = self.index_of(v)?;
        if k == 1 {
            None
        } else {
            self.value(k - 1)
        }
    }

    /// Largest member `<= v`, for `v >= 1`.
    pub fn nearest_at_or_below(&self, v: i64) -> Option<i64> {
        if v < 1 {
            return None;
        }
        match self.values.binary_search(&v) {
            Ok(i) => Some(self.values[i]),
            Err(0) => None,
            Err(i) => Some(self.values[i - 1]),
        }
    }

    /// True iff `a` and `b` are consecutive members, in either order.
    pub fn is_adjacent(&self, a: i64, b: i64) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => i.abs_diff(j) == 1,
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A fixed-width block of key bits, printed MSB first (`21 -> "100"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitBlock {
    value: u32,
    width: u32,
}

impl BitBlock {
    pub fn new(value: u32, width: u32) -> Self {
        debug_assert!(width <= 32 && (width == 32 || value < (1 << width)));
        BitBlock { value, width }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Bits MSB first.
    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).rev().map(move |i| (self.value >> i) & 1 == 1)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut value = 0u32;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::domain(format!("invalid bit char {c:?}"))),
                };
        }
        Ok(BitBlock::new(value, s.len() as u32))
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// The working set of `N` consecutive Fibonacci values admitted by the
/// sorters, with the canonical bit-block assignment (ascending value maps to
/// ascending binary block).
#[derive(Debug, Clone)]
pub struct FibAlphabet {
    start_index: usize,
    members: Vec<i64>,
    bits_per_segment: u32,
    seq: FibSequence,
}

impl FibAlphabet {
    /// Build the alphabet `{F_n0, ..., F_{n0+N-1}}`.
    ///
    /// `size` must be a power of two (>= 2) and `n0 >= 3` so that both
    /// decomposition parts of every member are positive.
    pub fn new(n0: usize, size: usize) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::config(format!(
                "alphabet size must be a power of two >= 2, got {size}"
            )));
        }
        if n0 < 3 {
            return Err(Error::domain(format!(
                "alphabet start index must be >= 3, got {n0}"
            )));
        }
        let seq = FibSequence::new();
        let members: Vec<i64> = (n0..n0 + size)
            .map(|k| {
                seq.value(k)
                    .ok_or_else(|| Error::config(format!("Fibonacci index {k} overflows i64")))
            })
            .collect::<Result<_>>()?;
        Ok(FibAlphabet {
            start_index: n0,
            members,
            bits_per_segment: size.trailing_zeros(),
            seq,
        })
    }

    /// Default alphabet of the worked examples: 3 through 89.
    pub fn standard() -> Self {
        FibAlphabet::new(3, 8).expect("standard alphabet is valid")
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn bits_per_segment(&self) -> u32 {
        self.bits_per_segment
    }

    pub fn members(&self) -> &[i64] {
        &self.members
    }

    pub fn contains(&self, v: i64) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn min(&self) -> i64 {
        self.members[0]
    }

    pub fn max(&self) -> i64 {
        *self.members.last().unwrap()
    }

    pub fn sequence(&self) -> &FibSequence {
        &self.seq
    }

    /// Zero-based position of an alphabet member.
    pub fn position(&self, v: i64) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    /// Canonical `log2(N)`-bit block for an alphabet member.
    pub fn encode_segment(&self, l: i64) -> Result<BitBlock> {
        let pos = self
            .position(l)
            .ok_or_else(|| Error::domain(format!("{l} is not an alphabet member")))?;
        Ok(BitBlock::new(pos as u32, self.bits_per_segment))
    }

    pub fn decode_segment(&self, block: BitBlock) -> Result<i64> {
        if block.width() != self.bits_per_segment || block.value() as usize >= self.size() {
            return Err(Error::domain(format!(
                "block {block} does not address this alphabet"
            )));
        }
        Ok(self.members[block.value() as usize])
    }

    /// Signed codebook entry: leading sign bit, then the unsigned block.
    pub fn encode_signed(&self, l: i64) -> Result<BitBlock> {
        let unsigned = self.encode_segment(l.abs())?;
        let sign = u32::from(l < 0);
        Ok(BitBlock::new(
            (sign << self.bits_per_segment) | unsigned.value(),
            self.bits_per_segment + 1,
        ))
    }

    pub fn decode_signed(&self, block: BitBlock) -> Result<i64> {
        if block.width() != self.bits_per_segment + 1 {
            return Err(Error::domain(format!(
                "signed block {block} has wrong width"
            )));
        }
        let magnitude =
            self.decode_segment(BitBlock::new(block.value() & ((1 << self.bits_per_segment) - 1), self.bits_per_segment))?;
        Ok(if block.value() >> self.bits_per_segment == 1 {
            -magnitude
        } else {
            magnitude
        })
    }

    /// The full signed codebook (2N entries), ordered by magnitude then sign.
    pub fn signed_codebook(&self) -> Vec<(i64, BitBlock)> {
        let mut out = Vec::with_capacity(2 * self.size());
        for &m in &self.members {
            out.push((m, self.encode_signed(m).unwrap()));
        }
        for &m in &self.members {
            out.push((-m, self.encode_signed(-m).unwrap()));
        }
        out
    }

    /// Split an alphabet member into its forced decomposition
    /// `(F_{n-1}, F_{n-2})`, larger part first.
    pub fn decompose(&self, f: i64) -> Result<(i64, i64)> {
        let k = self
            .seq
            .index_of(f)
            .ok_or_else(|| Error::domain(format!("{f} is not a Fibonacci value")))?;
        if k < 3 {
            return Err(Error::domain(format!(
                "F_{k} = {f} has no positive decomposition"
            )));
        }
        Ok((self.seq.value(k - 1).unwrap(), self.seq.value(k - 2).unwrap()))
    }

    /// Every value that can appear on an arm: the union of the two
    /// decomposition parts over all members, sorted ascending.
    ///
    /// For the standard alphabet this is 1, 2, 3, 5, 8, 13, 21, 34, 55.
    pub fn arm_values(&self) -> Vec<i64> {
        (self.start_index - 2..self.start_index + self.size() - 1)
            .map(|k| self.seq.value(k).unwrap())
            .collect()
    }

    pub fn is_arm_value(&self, v: i64) -> bool {
        self.arm_values().binary_search(&v).is_ok()
    }

    /// Pump values in the alphabet whose decomposition contains arm value `v`.
    /// Two candidates except at the ends of the arm chain.
    pub fn pump_candidates_for_arm(&self, v: i64) -> Vec<i64> {
        let mut out = Vec::with_capacity(2);
        for partner in [self.seq.prev_before(v), self.seq.next_after(v)] {
            if let Some(p) = partner {
                if self.contains(p + v) {
                    out.push(p + v);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Partner arm values that can accompany `v`: the Fibonacci neighbour
    /// below and above `v`, kept only when their sum with `v` is a pump in
    /// the alphabet.
    pub fn partner_values_for_arm(&self, v: i64) -> Vec<i64> {
        let mut out = Vec::with_capacity(2);
        for partner in [self.seq.prev_before(v), self.seq.next_after(v)] {
            if let Some(p) = partner {
                if self.contains(p + v) {
                    out.push(p);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Which party a decode is performed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

/// One legal (pump, orientation) configuration of the exchange, with the
/// bits both parties announce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeConfig {
    pub pump: i64,
    pub alice: i64,
    pub bob: i64,
    pub alice_bit: u8,
    pub bob_bit: u8,
}

/// The two-bit classical exchange scheme.
///
/// Alice announces `b(F_k) = floor((k-1)/2) mod 2` for her value `F_k`.
/// Bob replies with the same scheme when Alice's value is numerically even
/// and with the conjugate scheme (bits flipped) when it is odd. Decodability
/// over every legal configuration is re-verified at construction time.
#[derive(Debug, Clone)]
pub struct ExchangeScheme {
    alphabet: FibAlphabet,
}

impl ExchangeScheme {
    pub fn new(alphabet: FibAlphabet) -> Result<Self> {
        let scheme = ExchangeScheme { alphabet };
        scheme.verify_decodability()?;
        Ok(scheme)
    }

    pub fn alphabet(&self) -> &FibAlphabet {
        &self.alphabet
    }

    fn base_bit(&self, v: i64) -> Result<u8> {
        if !self.alphabet.is_arm_value(v) {
            return Err(Error::domain(format!("{v} is not a valid arm value")));
        }
        let k = self.alphabet.sequence().index_of(v).unwrap();
        Ok((((k - 1) / 2) % 2) as u8)
    }

    /// The bit Alice announces for her measured value.
    pub fn alice_bit(&self, v: i64) -> Result<u8> {
        self.base_bit(v)
    }

    /// The bit Bob announces, which depends on the numeric parity of
    /// Alice's (by now decoded) value.
    pub fn bob_bit(&self, v: i64, alice_value: i64) -> Result<u8> {
        let b = self.base_bit(v)?;
        Ok(if alice_value.rem_euclid(2) == 0 { b } else { 1 - b })
    }

    /// Bob recovers Alice's value from his own value and her bit.
    pub fn decode_alice_value(&self, bob_value: i64, alice_bit: u8) -> Result<i64> {
        if !self.alphabet.is_arm_value(bob_value) {
            return Err(Error::domain(format!(
                "{bob_value} is not a valid arm value"
            )));
        }
        let candidates = self.alphabet.partner_values_for_arm(bob_value);
        let matching: Vec<i64> = candidates
            .iter()
            .copied()
            .filter(|&c| self.alice_bit(c).map(|b| b == alice_bit).unwrap_or(false))
            .collect();
        match matching.as_slice() {
            [v] => Ok(*v),
            [] => Err(Error::ChannelCorruption(format!(
                "no Alice candidate for value {bob_value} matches bit {alice_bit}"
            ))),
            _ => Err(Error::ChannelCorruption(format!(
                "Alice bit {alice_bit} is ambiguous for value {bob_value}"
            ))),
        }
    }

    /// Alice recovers Bob's value from her own value and his bit.
    pub fn decode_bob_value(&self, alice_value: i64, bob_bit: u8) -> Result<i64> {
        if !self.alphabet.is_arm_value(alice_value) {
            return Err(Error::domain(format!(
                "{alice_value} is not a valid arm value"
            )));
        }
        let candidates = self.alphabet.partner_values_for_arm(alice_value);
        let matching: Vec<i64> = candidates
            .iter()
            .copied()
            .filter(|&c| {
                self.bob_bit(c, alice_value)
                    .map(|b| b == bob_bit)
                    .unwrap_or(false)
            })
            .collect();
        match matching.as_slice() {
            [v] => Ok(*v),
            [] => Err(Error::ChannelCorruption(format!(
                "no Bob candidate for value {alice_value} matches bit {bob_bit}"
            ))),
            _ => Err(Error::ChannelCorruption(format!(
                "Bob bit {bob_bit} is ambiguous for value {alice_value}"
            ))),
        }
    }

    /// Role-generic decode of the partner's value.
    pub fn decode_partner_value(&self, own_value: i64, partner_bit: u8, role: Role) -> Result<i64> {
        match role {
            // Alice decodes Bob's bit; Bob decodes Alice's bit.
            Role::Alice => self.decode_bob_value(own_value, partner_bit),
            Role::Bob => self.decode_alice_value(own_value, partner_bit),
        }
    }

    /// All legal (pump, orientation) configurations with their exchange bits.
    /// 2N entries: each pump with Alice holding the larger or the smaller part.
    pub fn configurations(&self) -> Vec<ExchangeConfig> {
        let mut out = Vec::with_capacity(2 * self.alphabet.size());
        for &pump in self.alphabet.members() {
            let (hi, lo) = self.alphabet.decompose(pump).unwrap();
            for (alice, bob) in [(hi, lo), (lo, hi)] {
                let alice_bit = self.alice_bit(alice).unwrap();
                let bob_bit = self.bob_bit(bob, alice).unwrap();
                out.push(ExchangeConfig {
                    pump,
                    alice,
                    bob,
                    alice_bit,
                    bob_bit,
                });
            }
        }
        out
    }

    /// The pump values an eavesdropper cannot distinguish after observing
    /// the two public bits, sorted ascending and deduplicated.
    pub fn eve_infer(&self, bits: (u8, u8)) -> Vec<i64> {
        let mut out: Vec<i64> = self
            .configurations()
            .into_iter()
            .filter(|c| (c.alice_bit, c.bob_bit) == bits)
            .map(|c| c.pump)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The full observation table: bits -> candidate pump set.
    pub fn eve_observation_table(&self) -> BTreeMap<(u8, u8), Vec<i64>> {
        let mut table = BTreeMap::new();
        for bits in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            table.insert(bits, self.eve_infer(bits));
        }
        table
    }

    /// Exact success probability of an eavesdropper guessing uniformly among
    /// the candidate set, under uniform pump and orientation. 13/48 for the
    /// standard alphabet.
    pub fn uniform_guess_success(&self) -> Ratio<i64> {
        let configs = self.configurations();
        let n = configs.len() as i64;
        let mut total = Ratio::new(0, 1);
        for c in &configs {
            let set = self.eve_infer((c.alice_bit, c.bob_bit));
            total += Ratio::new(1, n) * Ratio::new(1, set.len() as i64);
        }
        total
    }

    /// Exact success probability of a maximum-likelihood guesser: for each
    /// observed bit pair, guess a pump maximizing the posterior. 5/16 for the
    /// standard alphabet.
    pub fn ml_guess_success(&self) -> Ratio<i64> {
        let configs = self.configurations();
        let n = configs.len() as i64;
        let mut per_bits: BTreeMap<(u8, u8), BTreeMap<i64, i64>> = BTreeMap::new();
        for c in &configs {
            *per_bits
                .entry((c.alice_bit, c.bob_bit))
                .or_default()
                .entry(c.pump)
                .or_default() += 1;
        }
        let mut total = Ratio::new(0, 1);
        for counts in per_bits.values() {
            let best = counts.values().copied().max().unwrap_or(0);
            total += Ratio::new(best, n);
        }
        total
    }

    /// Check that every configuration decodes exactly; run at construction.
    fn verify_decodability(&self) -> Result<()> {
        for c in self.configurations() {
            let alice = self.decode_alice_value(c.bob, c.alice_bit).map_err(|_| {
                Error::config(format!(
                    "scheme not decodable: Bob {} cannot resolve Alice's bit {}",
                    c.bob, c.alice_bit
                ))
            })?;
            if alice != c.alice {
                return Err(Error::config(format!(
                    "scheme not decodable: Bob {} decoded Alice {} as {}",
                    c.bob, c.alice, alice
                )));
            }
            let bob = self.decode_bob_value(c.alice, c.bob_bit).map_err(|_| {
                Error::config(format!(
                    "scheme not decodable: Alice {} cannot resolve Bob's bit {}",
                    c.alice, c.bob_bit
                ))
            })?;
            if bob != c.bob {
                return Err(Error::config(format!(
                    "scheme not decodable: Alice {} decoded Bob {} as {}",
                    c.alice, c.bob, bob
                )));
            }
        }
        Ok(())
    }
}

/// True iff `a` and `b` are consecutive Fibonacci values, in either order.
pub fn is_adjacent(a: i64, b: i64) -> bool {
    FibSequence::new().is_adjacent(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sequence_initial_values_and_recursion() {
        let seq = FibSequence::new();
        assert_eq!(seq.value(1), Some(1));
        assert_eq!(seq.value(2), Some(2));
        for k in 3..=seq.len() {
            assert_eq!(
                seq.value(k).unwrap(),
                seq.value(k - 1).unwrap() + seq.value(k - 2).unwrap()
            );
        }
        // strictly increasing
        for k in 2..=seq.len() {
            assert!(seq.value(k).unwrap() > seq.value(k - 1).unwrap());
        }
    }

    #[test]
    fn standard_alphabet_members_and_blocks() {
        let a = FibAlphabet::standard();
        assert_eq!(a.members(), &[3, 5, 8, 13, 21, 34, 55, 89]);
        assert_eq!(a.bits_per_segment(), 3);
        let expect = [
            (3, "000"),
            (5, "001"),
            (8, "010"),
            (13, "011"),
            (21, "100"),
            (34, "101"),
            (55, "110"),
            (89, "111"),
        ];
        for (v, s) in expect {
            assert_eq!(a.encode_segment(v).unwrap().to_string(), s);
        }
        // equal numbers of leading 0s and 1s
        let zeros = a
            .members()
            .iter()
            .filter(|&&v| !a.encode_segment(v).unwrap().bits().next().unwrap())
            .count();
        assert_eq!(zeros, 4);
    }

    #[test]
    fn smallest_legal_alphabet() {
        let a = FibAlphabet::new(3, 2).unwrap();
        assert_eq!(a.members(), &[3, 5]);
        assert_eq!(a.encode_segment(3).unwrap().to_string(), "0");
        assert_eq!(a.encode_segment(5).unwrap().to_string(), "1");
    }

    #[test]
    fn four_member_alphabet_canonical_blocks() {
        // Derived by the canonical-assignment rule; checked by enumeration.
        let a = FibAlphabet::new(4, 4).unwrap();
        assert_eq!(a.members(), &[5, 8, 13, 21]);
        let blocks: Vec<String> = a
            .members()
            .iter()
            .map(|&v| a.encode_segment(v).unwrap().to_string())
            .collect();
        assert_eq!(blocks, ["00", "01", "10", "11"]);
        for &v in a.members() {
            assert_eq!(a.decode_segment(a.encode_segment(v).unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn alphabet_rejects_bad_parameters() {
        assert!(matches!(FibAlphabet::new(3, 6), Err(Error::Config(_))));
        assert!(matches!(FibAlphabet::new(3, 0), Err(Error::Config(_))));
        assert!(matches!(FibAlphabet::new(2, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn encode_rejects_non_member() {
        let a = FibAlphabet::standard();
        assert!(matches!(a.encode_segment(4), Err(Error::Domain(_))));
        assert!(matches!(a.encode_segment(144), Err(Error::Domain(_))));
    }

    #[test]
    fn signed_codebook_matches_table() {
        let a = FibAlphabet::standard();
        assert_eq!(a.encode_signed(3).unwrap().to_string(), "0000");
        assert_eq!(a.encode_signed(-8).unwrap().to_string(), "1010");
        assert_eq!(a.encode_signed(-89).unwrap().to_string(), "1111");
        assert_eq!(a.encode_signed(21).unwrap().to_string(), "0100");
        assert_eq!(a.encode_signed(-21).unwrap().to_string(), "1100");
        // bijective over all 16 entries
        let book = a.signed_codebook();
        assert_eq!(book.len(), 16);
        let mut blocks: Vec<u32> = book.iter().map(|(_, b)| b.value()).collect();
        blocks.sort_unstable();
        blocks.dedup();
        assert_eq!(blocks.len(), 16);
        for (v, b) in book {
            assert_eq!(a.decode_signed(b).unwrap(), v);
        }
    }

    #[test]
    fn decompose_examples() {
        let a = FibAlphabet::standard();
        assert_eq!(a.decompose(21).unwrap(), (13, 8));
        assert_eq!(a.decompose(3).unwrap(), (2, 1));
        assert_eq!(a.decompose(89).unwrap(), (55, 34));
        assert!(matches!(a.decompose(10), Err(Error::Domain(_))));
    }

    #[test]
    fn decomposition_uniqueness_brute_force() {
        // For any alphabet member F_n, the only pair of Fibonacci values
        // below 89 summing to it is (F_{n-1}, F_{n-2}).
        let a = FibAlphabet::standard();
        let seq = a.sequence();
        let fibs: Vec<i64> = (1..=10).map(|k| seq.value(k).unwrap()).collect();
        for &pump in a.members() {
            let mut pairs = vec![];
            for &x in &fibs {
                for &y in &fibs {
                    if x >= y && x + y == pump {
                        pairs.push((x, y));
                    }
                }
            }
            assert_eq!(pairs, vec![a.decompose(pump).unwrap()], "pump {pump}");
        }
    }

    #[test]
    fn adjacency_examples() {
        assert!(is_adjacent(8, 13));
        assert!(is_adjacent(13, 8));
        assert!(!is_adjacent(1, 8));
        assert!(!is_adjacent(5, 5));
        assert!(!is_adjacent(4, 5));
    }

    #[test]
    fn arm_values_of_standard_alphabet() {
        let a = FibAlphabet::standard();
        assert_eq!(a.arm_values(), vec![1, 2, 3, 5, 8, 13, 21, 34, 55]);
        assert!(a.is_arm_value(55));
        assert!(!a.is_arm_value(89));
    }

    #[test]
    fn pump_candidates_per_arm() {
        let a = FibAlphabet::standard();
        assert_eq!(a.pump_candidates_for_arm(8), vec![13, 21]);
        assert_eq!(a.pump_candidates_for_arm(55), vec![89]);
        assert_eq!(a.pump_candidates_for_arm(1), vec![3]);
        // every non-boundary arm keeps the eavesdropper two-way ambiguous
        for &v in &a.arm_values()[1..8] {
            assert!(a.pump_candidates_for_arm(v).len() >= 2, "arm {v}");
        }
    }

    #[test]
    fn scheme_bits_match_worked_examples() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        // Alice=3, Bob=5 (pump 8) announces bits (1, 0)
        assert_eq!(s.alice_bit(3).unwrap(), 1);
        assert_eq!(s.bob_bit(5, 3).unwrap(), 0);
        // Alice=8, Bob=13 (pump 21) announces bits (0, 0)
        assert_eq!(s.alice_bit(8).unwrap(), 0);
        assert_eq!(s.bob_bit(13, 8).unwrap(), 0);
        // Alice=34, Bob=55 (pump 89) announces bits (1, 0)
        assert_eq!(s.alice_bit(34).unwrap(), 1);
        assert_eq!(s.bob_bit(55, 34).unwrap(), 0);
    }

    #[test]
    fn decode_examples() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        // Bob holds 8; Alice's candidates 5 and 13 carry different bits.
        assert_eq!(s.alice_bit(5).unwrap(), 1);
        assert_eq!(s.alice_bit(13).unwrap(), 0);
        assert_eq!(s.decode_alice_value(8, 0).unwrap(), 13);
        assert_eq!(s.decode_alice_value(8, 1).unwrap(), 5);
        // Alice holds 13 (odd), Bob holds 8.
        let bb = s.bob_bit(8, 13).unwrap();
        assert_eq!(s.decode_bob_value(13, bb).unwrap(), 8);
        // boundary pair: Bob holds 2, candidates {1, 3} have distinct bits
        assert_eq!(s.alice_bit(1).unwrap(), 0);
        assert_eq!(s.alice_bit(3).unwrap(), 1);
        assert_eq!(s.decode_alice_value(2, 0).unwrap(), 1);
        assert_eq!(s.decode_alice_value(2, 1).unwrap(), 3);
    }

    #[test]
    fn all_configurations_decode_exactly() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        let configs = s.configurations();
        assert_eq!(configs.len(), 16);
        for c in configs {
            assert_eq!(s.decode_alice_value(c.bob, c.alice_bit).unwrap(), c.alice);
            assert_eq!(s.decode_bob_value(c.alice, c.bob_bit).unwrap(), c.bob);
        }
    }

    #[test]
    fn eve_observation_table_is_reproduced() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        assert_eq!(s.eve_infer((0, 0)), vec![3, 21, 34, 89]);
        assert_eq!(s.eve_infer((0, 1)), vec![3, 5, 13, 21]);
        assert_eq!(s.eve_infer((1, 0)), vec![8, 55, 89]);
        assert_eq!(s.eve_infer((1, 1)), vec![5, 13, 34, 55]);
    }

    #[test]
    fn guess_success_rates_exact() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        assert_eq!(s.uniform_guess_success(), Ratio::new(13, 48));
        assert_eq!(s.ml_guess_success(), Ratio::new(5, 16));
    }

    #[test]
    fn scheme_generalizes_to_other_sizes() {
        for (n0, size) in [(3, 2), (4, 4), (3, 16), (5, 8)] {
            let s = ExchangeScheme::new(FibAlphabet::new(n0, size).unwrap()).unwrap();
            assert_eq!(s.configurations().len(), 2 * size);
        }
    }

    #[test]
    fn corrupt_bit_is_flagged_not_decoded() {
        let s = ExchangeScheme::new(FibAlphabet::standard()).unwrap();
        // Bob holds 55: only Alice candidate is 34 with bit 1; bit 0 is corrupt.
        assert_eq!(s.decode_alice_value(55, 1).unwrap(), 34);
        assert!(matches!(
            s.decode_alice_value(55, 0),
            Err(Error::ChannelCorruption(_))
        ));
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(n0 in 3usize..12, log_size in 1u32..5) {
            let size = 1usize << log_size;
            let a = FibAlphabet::new(n0, size).unwrap();
            for &v in a.members() {
                prop_assert_eq!(a.decode_segment(a.encode_segment(v).unwrap()).unwrap(), v);
                prop_assert_eq!(a.decode_signed(a.encode_signed(v).unwrap()).unwrap(), v);
                prop_assert_eq!(a.decode_signed(a.encode_signed(-v).unwrap()).unwrap(), -v);
            }
        }

        #[test]
        fn decompose_parts_sum_and_are_adjacent(k in 3usize..80) {
            let a = FibAlphabet::standard();
            let seq = a.sequence();
            let f = seq.value(k).unwrap();
            let (hi, lo) = a.decompose(f).unwrap();
            prop_assert_eq!(hi + lo, f);
            prop_assert!(seq.is_adjacent(hi, lo));
        }
    }
}
