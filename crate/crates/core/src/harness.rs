//! Session orchestration: a validated, versioned configuration is expanded
//! into named random substreams and driven through the full pipeline —
//! pump, down-conversion, optional eavesdropper, sorters, filters,
//! security sampling, decoy analysis and key accumulation — producing a
//! deterministic, serializable report.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::channel::{
    equalization_filters, sort_pair, FilterBank, PairEvent, PumpDistribution, SortMode,
    SpdcProfile, SpdcProfileKind,
};
use crate::error::{Error, Result};
use crate::fibcode::{ExchangeScheme, FibAlphabet};
use crate::parties::{
    classical_exchange, decoy_check, eve_classical_guess, eve_intercept_resend, security_check,
    sift_signed, DecoyReport, GuessMode, ResendModel, SecurityReport, Verdict,
};
use crate::quantum::{inner_product, test_state, OamKet};

const SCHEMA_VERSION: u32 = 1;
/// Below this many pulses the photon-splitting independence test refuses
/// to issue a verdict.
const MIN_PNS_PULSES: u64 = 1000;

/// Raw pump spectrum before any filtering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PumpSpec {
    /// Equal weight on every alphabet member.
    Uniform,
    /// Weight of the i-th member proportional to `ratio^i`.
    Geometric { ratio: f64 },
    /// Explicit weights per pump value (normalized internally).
    Weights { weights: BTreeMap<i64, f64> },
}

/// How pump photons are converted into pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Pairs always split along the forced Fibonacci decomposition.
    Ideal,
    /// Full down-conversion splitting over all conserving integer pairs.
    Spdc {
        profile: SpdcProfileKind,
        bandwidth: i64,
    },
}

/// Eavesdropper configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EveSpec {
    /// Probability that a given in-transit photon is intercepted.
    pub intercept_rate: f64,
    pub resend: ResendModel,
}

impl Default for EveSpec {
    fn default() -> Self {
        EveSpec {
            intercept_rate: 1.0,
            resend: ResendModel::PartnerKet,
        }
    }
}

/// Photon-number-splitting scenario: multi-photon pulses whose photons
/// carry independently drawn OAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PnsSpec {
    pub photons_per_pulse: u32,
}

/// Complete description of one simulated session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Config schema version; currently 1.
    pub schema_version: u32,
    /// Master seed; all randomness derives from it (no wall-clock entropy).
    pub seed: u64,
    /// Number of pump photons emitted.
    pub target_pairs: u64,
    /// 1-based Fibonacci index of the smallest alphabet member.
    pub alphabet_start: usize,
    /// Alphabet size N (power of two).
    pub alphabet_size: usize,
    /// Signed-OAM mode: 4-bit blocks, same-sign sifting.
    pub signed: bool,
    /// Route Alice's non-Fibonacci detections into the decoy tamper check.
    pub decoy: bool,
    /// Equalize the raw pump spectrum with detector filters.
    pub filters: bool,
    pub pump: PumpSpec,
    pub source: SourceSpec,
    pub eve: Option<EveSpec>,
    /// Fraction of kept pairs publicly compared (and consumed).
    pub security_sample_rate: f64,
    /// Minimum compared pairs before the security verdict is meaningful.
    pub min_security_samples: usize,
    /// If set, Eve also guesses the pump from the public bits each round.
    pub classical_guess: Option<GuessMode>,
    pub pns: Option<PnsSpec>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            schema_version: SCHEMA_VERSION,
            seed: 7,
            target_pairs: 100_000,
            alphabet_start: 3,
            alphabet_size: 8,
            signed: false,
            decoy: false,
            filters: false,
            pump: PumpSpec::Uniform,
            source: SourceSpec::Ideal,
            eve: None,
            security_sample_rate: 0.1,
            min_security_samples: 100,
            classical_guess: None,
            pns: None,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.target_pairs == 0 {
            return Err(Error::config("target_pairs must be at least 1".to_string()));
        }
        let alphabet = FibAlphabet::new(self.alphabet_start, self.alphabet_size)?;
        for (name, rate) in [("security_sample_rate", self.security_sample_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("{name} must be in [0, 1], got {rate}")));
            }
        }
        if let Some(eve) = &self.eve {
            if !(0.0..=1.0).contains(&eve.intercept_rate) {
                return Err(Error::config(format!(
                    "intercept_rate must be in [0, 1], got {}",
                    eve.intercept_rate
                )));
            }
        }
        match &self.pump {
            PumpSpec::Uniform => {}
            PumpSpec::Geometric { ratio } => {
                if !(ratio.is_finite() && *ratio > 0.0) {
                    return Err(Error::config(format!("geometric ratio must be > 0, got {ratio}")));
                }
            }
            PumpSpec::Weights { weights } => {
                if matches!(self.source, SourceSpec::Ideal) {
                    for &v in weights.keys() {
                        if !alphabet.contains(v) {
                            return Err(Error::config(format!(
                                "pump weight on {v}, which the ideal source cannot split (not an alphabet member)"
                            )));
                        }
                    }
                }
            }
        }
        if self.decoy && matches!(self.source, SourceSpec::Ideal) {
            return Err(Error::config(
                "decoy mode needs a down-conversion source that can emit non-Fibonacci values"
                    .to_string(),
            ));
        }
        if let SourceSpec::Spdc { bandwidth, .. } = self.source {
            if bandwidth < alphabet.max() {
                return Err(Error::config(format!(
                    "down-conversion bandwidth {bandwidth} cannot reach the largest pump {}",
                    alphabet.max()
                )));
            }
        }
        if self.signed {
            if self.eve.is_some() {
                return Err(Error::config(
                    "signed mode does not support an eavesdropper".to_string(),
                ));
            }
            if self.decoy {
                return Err(Error::config("signed mode does not support decoy rounds".to_string()));
            }
            if !matches!(self.pump, PumpSpec::Uniform) {
                return Err(Error::config(
                    "signed mode requires a uniform pump spectrum".to_string(),
                ));
            }
        }
        if let Some(pns) = &self.pns {
            if pns.photons_per_pulse < 2 {
                return Err(Error::config(
                    "photon-splitting mode needs at least 2 photons per pulse".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex_digest(json.as_bytes())
    }

    fn pump_distribution(&self, alphabet: &FibAlphabet) -> Result<PumpDistribution> {
        match &self.pump {
            PumpSpec::Uniform => Ok(PumpDistribution::uniform(alphabet)),
            PumpSpec::Geometric { ratio } => PumpDistribution::geometric(alphabet, *ratio),
            PumpSpec::Weights { weights } => PumpDistribution::from_weights(
                weights.clone(),
                crate::channel::Provenance::Raw,
            ),
        }
    }
}

/// A counted fraction with its 3σ binomial half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionStat {
    pub count: u64,
    pub total: u64,
    pub fraction: f64,
    pub sigma3: f64,
}

impl FractionStat {
    pub fn new(count: u64, total: u64) -> Self {
        let fraction = if total == 0 {
            0.0
        } else {
            count as f64 / total as f64
        };
        let sigma3 = if total == 0 {
            0.0
        } else {
            3.0 * (fraction * (1.0 - fraction) / total as f64).sqrt()
        };
        FractionStat {
            count,
            total,
            fraction,
            sigma3,
        }
    }
}

/// Independence test between a split-off photon and its sibling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnsReport {
    pub pulses: u64,
    pub chi_squared: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    /// Plug-in estimate of the mutual information, in bits.
    pub mutual_info_bits: f64,
    /// Clean when independence is not rejected at the 1% level.
    pub verdict: Verdict,
}

/// Everything a session produces besides the event log. Pure data: the same
/// config and seed always serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config_sha256: String,
    pub alphabet_start: usize,
    pub alphabet_size: usize,
    pub signed: bool,
    pub emitted_pairs: u64,
    /// Pairs where both arms passed the sorters (after any interception).
    pub sorter_kept: u64,
    pub filtered_out: u64,
    pub kept_after_filters: u64,
    /// Kept pairs whose values are not Fibonacci-adjacent.
    pub nonadjacent_kept: u64,
    pub nonadjacent_kept_fraction: f64,
    pub security_consumed: u64,
    pub decoy_rounds: u64,
    /// Decoy rounds whose photon survived Bob's sorter projection.
    pub decoy_detected: u64,
    /// Signed-mode pairs discarded by the sign-sifting rule.
    pub sift_discarded: u64,
    /// Exchanges whose bits fit no candidate or whose pump was unusable.
    pub decode_failures: u64,
    pub key_events: u64,
    pub bits_per_event: u32,
    pub key_bits: u64,
    pub keys_match: bool,
    pub key_hex: String,
    pub key_sha256: String,
    /// Reconciled pump frequencies over key events.
    pub kept_pump_counts: BTreeMap<i64, u64>,
    pub security: SecurityReport,
    pub decoy: DecoyReport,
    pub eve_guess: Option<FractionStat>,
    pub pns: Option<PnsReport>,
    /// Compromised when either the security or the decoy check fails.
    pub verdict: Verdict,
}

/// Derive an independent RNG from the master seed and a stream label, so
/// that toggling one feature never perturbs another feature's draws.
fn substream(seed: u64, label: &str) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    ChaCha12Rng::from_seed(hasher.finalize().into())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

fn bytes_to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run one session and return its report.
pub fn run_session(config: &SessionConfig) -> Result<SessionReport> {
    Ok(run_session_impl(config, false)?.0)
}

/// Run one session, also returning the full per-pair event log.
pub fn run_session_with_events(config: &SessionConfig) -> Result<(SessionReport, Vec<PairEvent>)> {
    run_session_impl(config, true)
}

/// Serialize an event log as JSON lines.
pub fn events_to_jsonl(events: &[PairEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

fn run_session_impl(
    config: &SessionConfig,
    record_events: bool,
) -> Result<(SessionReport, Vec<PairEvent>)> {
    config.validate()?;
    let alphabet = FibAlphabet::new(config.alphabet_start, config.alphabet_size)?;
    let scheme = ExchangeScheme::new(alphabet.clone())?;
    let seq = alphabet.sequence().clone();
    let raw = config.pump_distribution(&alphabet)?;
    let bank: Option<FilterBank> = if config.filters {
        Some(equalization_filters(&raw)?)
    } else {
        None
    };
    let profile: Option<SpdcProfile> = match config.source {
        SourceSpec::Ideal => None,
        SourceSpec::Spdc { profile, bandwidth } => Some(SpdcProfile {
            kind: profile,
            bandwidth,
        }),
    };
    let sort_mode = if config.decoy {
        SortMode::Decoy
    } else {
        SortMode::Strict
    };
    let probe = test_state(&alphabet);

    let mut pump_rng = substream(config.seed, "pump");
    let mut spdc_rng = substream(config.seed, "spdc");
    let mut orientation_rng = substream(config.seed, "orientation");
    let mut signs_rng = substream(config.seed, "signs");
    let mut eve_rng = substream(config.seed, "eve");
    let mut measure_rng = substream(config.seed, "measure");
    let mut filters_rng = substream(config.seed, "filters");
    let mut security_rng = substream(config.seed, "security");
    let mut guess_rng = substream(config.seed, "guess");

    let mut events: Vec<PairEvent> = Vec::new();
    let mut security_pairs: Vec<(i64, i64)> = Vec::new();
    let mut decoy_overlaps: Vec<f64> = Vec::new();
    let mut alice_key: Vec<bool> = Vec::new();
    let mut bob_key: Vec<bool> = Vec::new();
    let mut kept_pump_counts: BTreeMap<i64, u64> = BTreeMap::new();

    let mut sorter_kept = 0u64;
    let mut filtered_out = 0u64;
    let mut kept_after_filters = 0u64;
    let mut nonadjacent_kept = 0u64;
    let mut security_consumed = 0u64;
    let mut decoy_rounds = 0u64;
    let mut sift_discarded = 0u64;
    let mut decode_failures = 0u64;
    let mut key_events = 0u64;
    let mut guess_hits = 0u64;
    let mut guess_total = 0u64;

    for round in 0..config.target_pairs {
        let pump_mag = raw.sample(&mut pump_rng);
        let sign: i64 = if config.signed {
            if signs_rng.gen_bool(0.5) {
                1
            } else {
                -1
            }
        } else {
            1
        };
        let pump = sign * pump_mag;

        // split the pump into two arm values
        let (a, b0) = match &profile {
            None => {
                let (hi, lo) = alphabet.decompose(pump_mag)?;
                let parts = if config.signed && signs_rng.gen_bool(0.5) {
                    // the source also emits the mixed-sign splitting
                    // s·F_n = s·F_{n+2} - s·F_{n+1}
                    let up1 = seq.next_after(pump_mag).expect("sequence headroom");
                    let up2 = seq.next_after(up1).expect("sequence headroom");
                    (sign * up2, -sign * up1)
                } else {
                    (sign * hi, sign * lo)
                };
                if orientation_rng.gen_bool(0.5) {
                    parts
                } else {
                    (parts.1, parts.0)
                }
            }
            Some(p) => {
                let (l1, l2) = p.sample_split(pump, &mut spdc_rng);
                if orientation_rng.gen_bool(0.5) {
                    (l1, l2)
                } else {
                    (l2, l1)
                }
            }
        };

        let mut ev = PairEvent::new(round, pump, a, b0);
        sort_pair(&mut ev, &alphabet, sort_mode, config.signed);

        let intercept = match &config.eve {
            Some(spec) => eve_rng.gen_bool(spec.intercept_rate),
            None => false,
        };

        if ev.decoy {
            // Alice kept a non-Fibonacci value; Bob's photon is still the
            // coherent superposition over all pumps that could produce it.
            decoy_rounds += 1;
            let shifted: Vec<i64> = alphabet.members().iter().map(|&f| f - a).collect();
            let transit = OamKet::uniform(&shifted)?;
            let arriving = if intercept {
                ev.eve_intercepted = true;
                let (measured, resent) = eve_intercept_resend(
                    &transit,
                    &alphabet,
                    config.eve.as_ref().unwrap().resend,
                    &mut eve_rng,
                )?;
                ev.eve_measured = Some(measured);
                resent
            } else {
                transit
            };
            let (projected, weight) = arriving.project_fib_subspace(&alphabet);
            if weight > 0.0 && measure_rng.gen_bool(weight.min(1.0)) {
                let state = projected.expect("positive weight implies a projection");
                decoy_overlaps.push(inner_product(&probe, &state).norm_sqr());
                ev.bob = state.measure(&mut measure_rng)?;
                ev.bob_is_fib = true;
            } else {
                ev.survived_filter = false;
            }
            if record_events {
                events.push(ev);
            }
            continue;
        }

        if !ev.alice_is_fib {
            if record_events {
                events.push(ev);
            }
            continue;
        }

        // Eve acts on Bob's photon in transit, before his sorter
        let mut b = b0;
        if intercept {
            ev.eve_intercepted = true;
            let (measured, resent) = eve_intercept_resend(
                &OamKet::basis(b0),
                &alphabet,
                config.eve.as_ref().unwrap().resend,
                &mut eve_rng,
            )?;
            ev.eve_measured = Some(measured);
            b = resent.measure(&mut measure_rng)?;
        }
        ev.bob = b;
        ev.bob_is_fib = alphabet.is_arm_value(if config.signed { b.abs() } else { b });
        ev.kept_by_sorter = ev.bob_is_fib;
        if !ev.kept_by_sorter {
            if record_events {
                events.push(ev);
            }
            continue;
        }
        sorter_kept += 1;

        if let Some(bank) = &bank {
            if !bank.survives((a + b).abs(), &mut filters_rng) {
                ev.survived_filter = false;
                filtered_out += 1;
                if record_events {
                    events.push(ev);
                }
                continue;
            }
        }
        kept_after_filters += 1;
        let adjacent = seq.is_adjacent(a.abs(), b.abs());
        if !adjacent {
            nonadjacent_kept += 1;
        }

        if security_rng.gen_bool(config.security_sample_rate) {
            ev.security_sampled = true;
            ev.non_adjacent = Some(!adjacent);
            security_pairs.push((a, b));
            security_consumed += 1;
            if record_events {
                events.push(ev);
            }
            continue;
        }

        if config.signed {
            match sift_signed(&alphabet, a, b) {
                Some(block) => {
                    key_events += 1;
                    *kept_pump_counts.entry(a + b).or_default() += 1;
                    alice_key.extend(block.bits());
                    bob_key.extend(block.bits());
                }
                None => sift_discarded += 1,
            }
        } else {
            match classical_exchange(&scheme, a, b) {
                Ok(rec) => {
                    let encoded = (
                        alphabet.encode_segment(rec.alice_pump()),
                        alphabet.encode_segment(rec.bob_pump()),
                    );
                    match encoded {
                        (Ok(alice_block), Ok(bob_block)) => {
                            key_events += 1;
                            *kept_pump_counts.entry(rec.alice_pump()).or_default() += 1;
                            alice_key.extend(alice_block.bits());
                            bob_key.extend(bob_block.bits());
                            if let Some(mode) = config.classical_guess {
                                let guess = eve_classical_guess(
                                    &scheme,
                                    (rec.alice_bit, rec.bob_bit),
                                    mode,
                                    &mut guess_rng,
                                )?;
                                guess_total += 1;
                                if guess == pump {
                                    guess_hits += 1;
                                }
                            }
                        }
                        _ => decode_failures += 1,
                    }
                }
                Err(Error::ChannelCorruption(_)) => decode_failures += 1,
                Err(e) => return Err(e),
            }
        }
        if record_events {
            events.push(ev);
        }
    }

    let security = security_check(&security_pairs, &alphabet, config.min_security_samples);
    let decoy = decoy_check(&decoy_overlaps, &alphabet);
    let pns = match &config.pns {
        Some(spec) => Some(run_pns(config, spec, &alphabet, &raw)?),
        None => None,
    };

    let bits_per_event = alphabet.bits_per_segment() + if config.signed { 1 } else { 0 };
    let key_bytes = pack_bits(&alice_key);
    let verdict = if security.verdict == Verdict::Compromised
        || decoy.verdict == Verdict::Compromised
    {
        Verdict::Compromised
    } else {
        Verdict::Clean
    };

    let report = SessionReport {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        config_sha256: config.sha256(),
        alphabet_start: config.alphabet_start,
        alphabet_size: config.alphabet_size,
        signed: config.signed,
        emitted_pairs: config.target_pairs,
        sorter_kept,
        filtered_out,
        kept_after_filters,
        nonadjacent_kept,
        nonadjacent_kept_fraction: if kept_after_filters == 0 {
            0.0
        } else {
            nonadjacent_kept as f64 / kept_after_filters as f64
        },
        security_consumed,
        decoy_rounds,
        decoy_detected: decoy_overlaps.len() as u64,
        sift_discarded,
        decode_failures,
        key_events,
        bits_per_event,
        key_bits: bits_per_event as u64 * key_events,
        keys_match: alice_key == bob_key,
        key_hex: bytes_to_hex(&key_bytes),
        key_sha256: hex_digest(&key_bytes),
        kept_pump_counts,
        security,
        decoy,
        eve_guess: if config.classical_guess.is_some() {
            Some(FractionStat::new(guess_hits, guess_total))
        } else {
            None
        },
        pns,
        verdict,
    };
    Ok((report, events))
}

/// Photon-number-splitting experiment: per pulse, every photon's OAM is an
/// independent draw from the source, Eve splits one off and the sibling
/// reaches Bob; their joint counts feed a chi-squared independence test.
fn run_pns(
    config: &SessionConfig,
    _spec: &PnsSpec,
    alphabet: &FibAlphabet,
    raw: &PumpDistribution,
) -> Result<PnsReport> {
    let mut rng = substream(config.seed, "pns");
    let pulses = config.target_pairs;
    let draw = |rng: &mut ChaCha12Rng| -> Result<i64> {
        let pump = raw.sample(rng);
        let (hi, lo) = alphabet.decompose(pump)?;
        Ok(if rng.gen_bool(0.5) { hi } else { lo })
    };
    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for _ in 0..pulses {
        let eve_photon = draw(&mut rng)?;
        let bob_photon = draw(&mut rng)?;
        *counts.entry((eve_photon, bob_photon)).or_default() += 1;
    }

    let rows: Vec<i64> = counts.keys().map(|&(r, _)| r).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let cols: Vec<i64> = counts.keys().map(|&(_, c)| c).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let total = pulses as f64;
    let row_sum = |r: i64| -> f64 {
        cols.iter()
            .map(|&c| *counts.get(&(r, c)).unwrap_or(&0) as f64)
            .sum()
    };
    let col_sum = |c: i64| -> f64 {
        rows.iter()
            .map(|&r| *counts.get(&(r, c)).unwrap_or(&0) as f64)
            .sum()
    };
    let mut chi2 = 0.0;
    let mut mi = 0.0;
    for &r in &rows {
        for &c in &cols {
            let expected = row_sum(r) * col_sum(c) / total;
            let observed = *counts.get(&(r, c)).unwrap_or(&0) as f64;
            if expected > 0.0 {
                chi2 += (observed - expected) * (observed - expected) / expected;
            }
            if observed > 0.0 {
                mi += observed / total * (observed * total / (row_sum(r) * col_sum(c))).log2();
            }
        }
    }
    let dof = (rows.len().saturating_sub(1) * cols.len().saturating_sub(1)) as u64;
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64)
            .map_err(|e| Error::domain(format!("chi-squared setup: {e}")))?;
        1.0 - dist.cdf(chi2)
    };
    let verdict = if pulses < MIN_PNS_PULSES {
        Verdict::Inconclusive
    } else if p_value > 0.01 {
        Verdict::Clean
    } else {
        Verdict::Compromised
    };
    Ok(PnsReport {
        pulses,
        chi_squared: chi2,
        degrees_of_freedom: dof,
        p_value,
        mutual_info_bits: mi,
        verdict,
    })
}

/// Session parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    InterceptRate,
    AlphabetSize,
    SecurityRate,
    Filters,
}

/// Run one session per swept value; session `i` derives its seed as
/// `base seed + i` so individual points are reproducible in isolation.
pub fn attack_sweep(
    base: &SessionConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SessionReport>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut config = base.clone();
            config.seed = base.seed.wrapping_add(i as u64);
            match parameter {
                SweepParameter::InterceptRate => {
                    config.eve.get_or_insert_with(EveSpec::default).intercept_rate = v;
                }
                SweepParameter::AlphabetSize => {
                    if v.fract() != 0.0 || v < 2.0 {
                        return Err(Error::config(format!(
                            "swept alphabet size must be an integer >= 2, got {v}"
                        )));
                    }
                    config.alphabet_size = v as usize;
                }
                SweepParameter::SecurityRate => config.security_sample_rate = v,
                SweepParameter::Filters => config.filters = v != 0.0,
            }
            run_session(&config)
        })
        .collect()
}
