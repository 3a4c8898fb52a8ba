//! Residue-coded execution of the packed polynomial.
//!
//! The polynomial value U is computed independently in n informational
//! and k redundant channels, each reduced by its own small modulus.
//! The Chinese remainder theorem reconstructs U from all channels; a
//! legitimate value always falls below the informational product M_n,
//! so a reconstruction at or above M_n is a detected error. With two
//! or more redundant channels a single faulty channel can also be
//! located: of all projections (reconstructions with one channel left
//! out), exactly the one omitting the bad channel falls back into
//! range and simultaneously yields the corrected value.
//!
//! Excluding a channel that keeps misbehaving reconfigures the set;
//! if an informational channel is dropped, the smallest redundant one
//! is re-designated informational so the operating range keeps
//! covering the packed width.

use crate::error::{Error, Result};
use crate::lfsr::{PrsBlock, TapPolynomial};
use crate::lnp::{extract_block, pack_system, LnpValue, PackedLnp};
use num_bigint::BigUint;
use num_integer::gcd;
use num_traits::{One, Zero};
use std::fmt;

/// 1-based channel ordinal, following the m_1..m_{n+k} numbering.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct ChannelId(usize);

impl ChannelId {
    pub fn new(ordinal: usize) -> Self {
        assert!(ordinal >= 1, "channels are numbered from 1");
        ChannelId(ordinal)
    }

    pub fn ordinal(&self) -> usize {
        self.0
    }

    pub fn index(&self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What the current set of redundant channels can still do.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Capability {
    /// k >= 2: single-channel faults are located and corrected.
    CorrectSingle,
    /// k = 1: faults are detected by the range check only.
    DetectOnly,
    /// k = 0: plain RNS execution without error control.
    Unprotected,
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capability::CorrectSingle => write!(f, "correct-single"),
            Capability::DetectOnly => write!(f, "detect-only"),
            Capability::Unprotected => write!(f, "unprotected"),
        }
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Validated modulus sets: informational m_1..m_n and redundant
/// m_{n+1}..m_{n+k}, pairwise coprime and strictly ascending, with
/// the informational product exceeding 2^required_bits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModuliSet {
    info: Vec<u64>,
    redundant: Vec<u64>,
    required_bits: u64,
    operating_range: BigUint,
    full_range: BigUint,
}

fn product(moduli: &[u64]) -> BigUint {
    moduli.iter().fold(BigUint::one(), |acc, &m| acc * m)
}

impl ModuliSet {
    /// Builds and validates a set for values up to `required_bits`
    /// wide (the packed polynomial's total width).
    pub fn new(info: Vec<u64>, redundant: Vec<u64>, required_bits: u64) -> Result<Self> {
        if info.is_empty() {
            return Err(Error::NoInfoModuli);
        }
        if redundant.is_empty() {
            return Err(Error::NoRedundantModuli);
        }
        Self::assemble(info, redundant, required_bits)
    }

    fn assemble(info: Vec<u64>, redundant: Vec<u64>, required_bits: u64) -> Result<Self> {
        if info.is_empty() {
            return Err(Error::NoInfoModuli);
        }
        let all: Vec<u64> = info.iter().chain(&redundant).copied().collect();
        for &m in &all {
            if m < 2 {
                return Err(Error::ModulusTooSmall(m));
            }
        }
        for w in all.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::ModuliNotAscending(w[0], w[1]));
            }
        }
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if gcd(all[i], all[j]) != 1 {
                    return Err(Error::NotCoprime(all[i], all[j]));
                }
            }
        }
        let operating_range = product(&info);
        if operating_range <= BigUint::one() << required_bits {
            return Err(Error::RangeTooSmall {
                range: operating_range.to_string(),
                bits: required_bits,
            });
        }
        let full_range = &operating_range * product(&redundant);
        Ok(ModuliSet {
            info,
            redundant,
            required_bits,
            operating_range,
            full_range,
        })
    }

    /// Smallest-primes selection: informational primes from 2 upward
    /// until the range bound is met, then `redundancy` more.
    pub fn auto(required_bits: u64, redundancy: usize) -> Result<Self> {
        fn next_prime(n: u64) -> u64 {
            let mut c = n + 1;
            loop {
                let mut d = 2;
                let mut prime = true;
                while d * d <= c {
                    if c % d == 0 {
                        prime = false;
                        break;
                    }
                    d += 1;
                }
                if prime {
                    return c;
                }
                c += 1;
            }
        }

        if redundancy == 0 {
            return Err(Error::NoRedundantModuli);
        }
        let bound = BigUint::one() << required_bits;
        let mut info = Vec::new();
        let mut p = 1;
        let mut prod = BigUint::one();
        while prod <= bound {
            p = next_prime(p);
            info.push(p);
            prod *= p;
        }
        let mut redundant = Vec::new();
        for _ in 0..redundancy {
            p = next_prime(p);
            redundant.push(p);
        }
        Self::new(info, redundant, required_bits)
    }

    pub fn info(&self) -> &[u64] {
        &self.info
    }

    pub fn redundant(&self) -> &[u64] {
        &self.redundant
    }

    /// All moduli in channel order (informational first).
    pub fn all(&self) -> Vec<u64> {
        self.info.iter().chain(&self.redundant).copied().collect()
    }

    pub fn channel_count(&self) -> usize {
        self.info.len() + self.redundant.len()
    }

    pub fn redundancy(&self) -> usize {
        self.redundant.len()
    }

    pub fn required_bits(&self) -> u64 {
        self.required_bits
    }

    /// M_n, the product of informational moduli.
    pub fn operating_range(&self) -> &BigUint {
        &self.operating_range
    }

    /// Product of all moduli.
    pub fn full_range(&self) -> &BigUint {
        &self.full_range
    }

    pub fn modulus(&self, channel: ChannelId) -> Result<u64> {
        self.all()
            .get(channel.index())
            .copied()
            .ok_or(Error::ChannelOutOfRange(channel.ordinal()))
    }

    pub fn channel_of(&self, modulus: u64) -> Option<ChannelId> {
        self.all()
            .iter()
            .position(|&m| m == modulus)
            .map(|i| ChannelId::new(i + 1))
    }

    pub fn capability(&self) -> Capability {
        match self.redundant.len() {
            0 => Capability::Unprotected,
            1 => Capability::DetectOnly,
            _ => Capability::CorrectSingle,
        }
    }

    /// Reconfiguration: drops the given channel. When an informational
    /// channel is dropped, the smallest redundant modulus takes its
    /// place so the operating range still covers the packed width.
    pub fn exclude(&self, channel: ChannelId) -> Result<ModuliSet> {
        let m = self.modulus(channel)?;
        let mut info = self.info.clone();
        let mut redundant = self.redundant.clone();
        if channel.index() < info.len() {
            info.remove(channel.index());
            if !redundant.is_empty() {
                info.push(redundant.remove(0));
            }
        } else {
            redundant.remove(channel.index() - info.len());
        }
        Self::assemble(info, redundant, self.required_bits).map_err(|e| match e {
            Error::RangeTooSmall { .. } | Error::NoInfoModuli => Error::ExclusionBreaksRange(m),
            other => other,
        })
    }
}

/// Per-channel reduced coefficients of the packed polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidueLnp {
    moduli: Vec<u64>,
    coeffs: Vec<Vec<u64>>,
}

impl ResidueLnp {
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// alpha^{(t)}_j for channel index t.
    pub fn channel_coeffs(&self, t: usize) -> &[u64] {
        &self.coeffs[t]
    }
}

/// Reduces every polynomial coefficient by every channel modulus.
pub fn encode_lnp_residues(lnp: &PackedLnp, moduli: &ModuliSet) -> ResidueLnp {
    let all = moduli.all();
    let coeffs = all
        .iter()
        .map(|&m| {
            let mb = BigUint::from(m);
            lnp.coefficients()
                .iter()
                .map(|h| u64::try_from(&(h % &mb)).unwrap())
                .collect()
        })
        .collect();
    ResidueLnp {
        moduli: all,
        coeffs,
    }
}

/// One value per channel, aligned with the moduli order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidueVector {
    values: Vec<u64>,
}

impl ResidueVector {
    pub fn new(values: Vec<u64>) -> Self {
        ResidueVector { values }
    }

    /// Residues of a known value, mainly for tests and campaigns.
    pub fn from_value(v: &BigUint, moduli: &ModuliSet) -> Self {
        let values = moduli
            .all()
            .iter()
            .map(|&m| u64::try_from(&(v % BigUint::from(m))).unwrap())
            .collect();
        ResidueVector { values }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [u64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates every channel at a 0/1 assignment; each channel sum is
/// reduced by its modulus after every addition, so channel words never
/// grow past the modulus.
pub fn eval_channels(rlnp: &ResidueLnp, x: &[bool]) -> Result<ResidueVector> {
    let width = rlnp.coeffs.first().map_or(0, |c| c.len());
    if x.len() != width {
        return Err(Error::DimensionMismatch {
            want: width,
            got: x.len(),
        });
    }
    let values = rlnp
        .moduli
        .iter()
        .zip(&rlnp.coeffs)
        .map(|(&m, coeffs)| {
            coeffs
                .iter()
                .zip(x)
                .filter(|(_, &xi)| xi)
                .fold(0u64, |acc, (&a, _)| {
                    let s = acc as u128 + a as u128;
                    (s % m as u128) as u64
                })
        })
        .collect();
    Ok(ResidueVector { values })
}

/// Prepared CRT reconstruction over a channel subset: for each
/// modulus m_s the constant M_s * mu_s with M_s = M/m_s and
/// mu_s = M_s^{-1} mod m_s.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrtPlan {
    moduli: Vec<u64>,
    modulus_product: BigUint,
    terms: Vec<BigUint>,
}

impl CrtPlan {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::NoInfoModuli);
        }
        let modulus_product = product(moduli);
        let terms = moduli
            .iter()
            .map(|&m| {
                let m_s = &modulus_product / m;
                let a = u64::try_from(&(&m_s % BigUint::from(m))).unwrap();
                let mu = mod_inverse(a, m).expect("moduli validated pairwise coprime");
                m_s * mu
            })
            .collect();
        Ok(CrtPlan {
            moduli: moduli.to_vec(),
            modulus_product,
            terms,
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn modulus_product(&self) -> &BigUint {
        &self.modulus_product
    }

    /// U* = | sum M_s mu_s U^{(s)} | mod the subset product.
    pub fn reconstruct(&self, values: &[u64]) -> BigUint {
        assert_eq!(values.len(), self.moduli.len(), "value count mismatch");
        let sum = self
            .terms
            .iter()
            .zip(values)
            .fold(BigUint::zero(), |acc, (t, &v)| acc + t * v);
        sum % &self.modulus_product
    }
}

/// Convenience wrapper matching the channel layout of a ModuliSet.
pub fn reconstruct_crt(values: &ResidueVector, plan: &CrtPlan) -> BigUint {
    plan.reconstruct(values.values())
}

/// A reconstruction is legitimate iff it falls inside the operating
/// range [0, M_n).
pub fn range_check(u: &BigUint, moduli: &ModuliSet) -> bool {
    u < moduli.operating_range()
}

/// Projection constants for every possible excluded channel j:
/// reduced modulus M_j = M_full/m_j and bases B_{i,j} with
/// B_{i,j} = 1 mod m_i, = 0 mod every other included modulus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BasisTable {
    moduli: Vec<u64>,
    reduced_moduli: Vec<BigUint>,
    bases: Vec<Vec<BigUint>>,
}

impl BasisTable {
    pub fn reduced_modulus(&self, j: usize) -> &BigUint {
        &self.reduced_moduli[j]
    }

    /// B_{i,j}; zero on the diagonal.
    pub fn basis(&self, i: usize, j: usize) -> &BigUint {
        &self.bases[j][i]
    }

    /// Reconstruction with channel j left out.
    pub fn projection(&self, values: &ResidueVector, j: usize) -> BigUint {
        let sum = self.bases[j]
            .iter()
            .zip(values.values())
            .fold(BigUint::zero(), |acc, (b, &v)| acc + b * v);
        sum % &self.reduced_moduli[j]
    }
}

/// Builds the projection table for the full channel set.
pub fn basis_table(moduli: &ModuliSet) -> BasisTable {
    let all = moduli.all();
    let full = moduli.full_range().clone();
    let mut reduced_moduli = Vec::with_capacity(all.len());
    let mut bases = Vec::with_capacity(all.len());
    for (j, &mj) in all.iter().enumerate() {
        let m_j = &full / mj;
        let row = all
            .iter()
            .enumerate()
            .map(|(i, &mi)| {
                if i == j {
                    BigUint::zero()
                } else {
                    let quotient = &m_j / mi;
                    let a = u64::try_from(&(&quotient % BigUint::from(mi))).unwrap();
                    let mu = mod_inverse(a, mi).expect("moduli validated pairwise coprime");
                    quotient * mu
                }
            })
            .collect();
        reduced_moduli.push(m_j);
        bases.push(row);
    }
    BasisTable {
        moduli: all,
        reduced_moduli,
        bases,
    }
}

/// Outcome of fault localization over a residue vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Localization {
    /// Full reconstruction was already in range.
    NoError { value: BigUint },
    /// Exactly one projection fell back into range.
    Fault {
        channel: ChannelId,
        corrected: BigUint,
    },
    /// Zero or several projections in range; `in_range` tells which.
    Ambiguous { in_range: usize },
}

/// Locates a single faulty channel by projections. Needs at least two
/// redundant channels; with fewer the range check can only detect.
pub fn localize_fault(
    values: &ResidueVector,
    moduli: &ModuliSet,
    table: &BasisTable,
) -> Result<Localization> {
    if moduli.redundancy() < 2 {
        return Err(Error::InsufficientRedundancy(moduli.redundancy()));
    }
    let plan = CrtPlan::new(&moduli.all())?;
    let full = plan.reconstruct(values.values());
    if range_check(&full, moduli) {
        return Ok(Localization::NoError { value: full });
    }
    let mut hits = Vec::new();
    for j in 0..values.len() {
        let projection = table.projection(values, j);
        if range_check(&projection, moduli) {
            hits.push((j, projection));
        }
    }
    if hits.len() == 1 {
        let (j, corrected) = hits.pop().unwrap();
        Ok(Localization::Fault {
            channel: ChannelId::new(j + 1),
            corrected,
        })
    } else {
        Ok(Localization::Ambiguous {
            in_range: hits.len(),
        })
    }
}

/// Verdict of one protected block step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepStatus {
    Ok,
    Corrected(ChannelId),
    Detected,
    Ambiguous,
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepStatus::Ok => write!(f, "ok"),
            StepStatus::Corrected(ch) => write!(f, "corrected(channel {ch})"),
            StepStatus::Detected => write!(f, "detected"),
            StepStatus::Ambiguous => write!(f, "ambiguous"),
        }
    }
}

/// Block produced by a protected step; absent when the value could not
/// be verified (no unverified keystream is ever emitted).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StepOutcome {
    pub block: Option<PrsBlock>,
    pub status: StepStatus,
}

fn resolve_with(
    lnp: &PackedLnp,
    moduli: &ModuliSet,
    plan: &CrtPlan,
    table: Option<&BasisTable>,
    values: &ResidueVector,
    block_index: u64,
) -> Result<StepOutcome> {
    let u = plan.reconstruct(values.values());
    if range_check(&u, moduli) {
        let block = extract_block(lnp, &LnpValue(u)).with_index(block_index);
        return Ok(StepOutcome {
            block: Some(block),
            status: StepStatus::Ok,
        });
    }
    if moduli.redundancy() >= 2 {
        if let Some(table) = table {
            return Ok(match localize_fault(values, moduli, table)? {
                Localization::NoError { .. } => unreachable!("range check already failed"),
                Localization::Fault { channel, corrected } => StepOutcome {
                    block: Some(extract_block(lnp, &LnpValue(corrected)).with_index(block_index)),
                    status: StepStatus::Corrected(channel),
                },
                Localization::Ambiguous { in_range: 0 } => StepOutcome {
                    block: None,
                    status: StepStatus::Detected,
                },
                Localization::Ambiguous { .. } => StepOutcome {
                    block: None,
                    status: StepStatus::Ambiguous,
                },
            });
        }
    }
    Ok(StepOutcome {
        block: None,
        status: StepStatus::Detected,
    })
}

/// One protected block step from block X to its successor: evaluate
/// all channels, reconstruct, range-check, and localize on failure.
pub fn protected_step(
    rlnp: &ResidueLnp,
    lnp: &PackedLnp,
    moduli: &ModuliSet,
    table: Option<&BasisTable>,
    x: &PrsBlock,
) -> Result<StepOutcome> {
    let values = eval_channels(rlnp, &x.ascending())?;
    let plan = CrtPlan::new(&moduli.all())?;
    resolve_with(lnp, moduli, &plan, table, &values, x.block_index() + 1)
}

/// Stateful protected generator with a permanent-fault policy: after
/// `exclusion_threshold` consecutive corrections on the same channel
/// the channel is excluded and the set reconfigured.
pub struct ProtectedGenerator {
    lnp: PackedLnp,
    moduli: ModuliSet,
    rlnp: ResidueLnp,
    plan: CrtPlan,
    table: Option<BasisTable>,
    block: PrsBlock,
    exclusion_threshold: usize,
    streak: Option<(u64, usize)>,
    excluded: Vec<u64>,
}

pub const DEFAULT_EXCLUSION_THRESHOLD: usize = 3;

impl ProtectedGenerator {
    pub fn new(
        poly: &TapPolynomial,
        seed: &[bool],
        moduli: ModuliSet,
        exclusion_threshold: usize,
    ) -> Result<Self> {
        let tau = poly.degree();
        if seed.len() != tau {
            return Err(Error::SeedLengthMismatch {
                want: tau,
                got: seed.len(),
            });
        }
        let g = poly.block_matrix(tau)?;
        let lnp = pack_system(&g);
        if moduli.operating_range() <= &(BigUint::one() << lnp.total_width()) {
            return Err(Error::RangeTooSmall {
                range: moduli.operating_range().to_string(),
                bits: lnp.total_width(),
            });
        }
        let rlnp = encode_lnp_residues(&lnp, &moduli);
        let plan = CrtPlan::new(&moduli.all())?;
        let table = (moduli.redundancy() >= 2).then(|| basis_table(&moduli));
        Ok(ProtectedGenerator {
            lnp,
            moduli,
            rlnp,
            plan,
            table,
            block: PrsBlock::from_ascending(seed, 0),
            exclusion_threshold: exclusion_threshold.max(1),
            streak: None,
            excluded: Vec::new(),
        })
    }

    pub fn lnp(&self) -> &PackedLnp {
        &self.lnp
    }

    pub fn moduli(&self) -> &ModuliSet {
        &self.moduli
    }

    pub fn capability(&self) -> Capability {
        self.moduli.capability()
    }

    /// Moduli dropped by reconfiguration so far.
    pub fn excluded(&self) -> &[u64] {
        &self.excluded
    }

    pub fn current_block(&self) -> &PrsBlock {
        &self.block
    }

    /// Mutable state access for fault injection harnesses; a corrupted
    /// block register is a legitimate input to the next step, so such
    /// faults are outside what the residue code can see.
    pub fn block_mut(&mut self) -> &mut PrsBlock {
        &mut self.block
    }

    pub fn next_block(&mut self) -> Result<StepOutcome> {
        self.next_block_with(|_, _| {})
    }

    /// Advances one block; `tamper` may corrupt the freshly evaluated
    /// residue vector (fault injection hook). On a detected or
    /// ambiguous outcome the internal state does not move, so no
    /// unverified bits ever reach the stream.
    pub fn next_block_with<F>(&mut self, tamper: F) -> Result<StepOutcome>
    where
        F: FnOnce(&mut ResidueVector, &ModuliSet),
    {
        let mut values = eval_channels(&self.rlnp, &self.block.ascending())?;
        tamper(&mut values, &self.moduli);
        let outcome = resolve_with(
            &self.lnp,
            &self.moduli,
            &self.plan,
            self.table.as_ref(),
            &values,
            self.block.block_index() + 1,
        )?;
        match &outcome.status {
            StepStatus::Ok => {
                self.block = outcome.block.clone().unwrap();
                self.streak = None;
            }
            StepStatus::Corrected(channel) => {
                self.block = outcome.block.clone().unwrap();
                let m = self.moduli.modulus(*channel)?;
                let run = match self.streak {
                    Some((sm, n)) if sm == m => n + 1,
                    _ => 1,
                };
                self.streak = Some((m, run));
                if run >= self.exclusion_threshold {
                    self.exclude_channel(m);
                }
            }
            StepStatus::Detected | StepStatus::Ambiguous => {}
        }
        Ok(outcome)
    }

    fn exclude_channel(&mut self, modulus: u64) {
        let channel = match self.moduli.channel_of(modulus) {
            Some(c) => c,
            None => return,
        };
        match self.moduli.exclude(channel) {
            Ok(next) => {
                self.rlnp = encode_lnp_residues(&self.lnp, &next);
                self.plan = CrtPlan::new(&next.all()).expect("validated set");
                self.table = (next.redundancy() >= 2).then(|| basis_table(&next));
                self.moduli = next;
                self.excluded.push(modulus);
                self.streak = None;
            }
            Err(_) => {
                // The set cannot afford to lose this channel; keep
                // correcting every block instead.
                self.streak = None;
            }
        }
    }
}
