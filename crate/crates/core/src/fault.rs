//! Fault injection harness: modeled hardware faults applied to any
//! pipeline stage, plus campaign machinery that measures how each
//! protection layer responds.
//!
//! Every trial is compared against a fault-free shadow run and lands
//! in exactly one bucket: masked (stream identical), missed (stream
//! differs, nothing noticed), detected, corrected, or ambiguous.
//! Serial faults are timed per step, block and channel faults per
//! block index (the seed block is index 0; computed blocks start
//! at 1).

use crate::error::{Error, Result};
use crate::guard::{encode_block, verify_block, CheckSpec};
use crate::lfsr::{Lfsr, PrsBlock, TapPolynomial};
use crate::rns::{ModuliSet, ProtectedGenerator, StepStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Where a fault strikes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FaultTarget {
    /// Register cell of the serial generator (0 = next output).
    SerialRegisterBit(usize),
    /// Feedback bit of the serial generator, corrupted in flight.
    FeedbackBit,
    /// Bit i of the block register (block/parity/rns pipelines).
    BlockBit(usize),
    /// Check symbol j of the parity pipeline.
    CheckSymbol(usize),
    /// Residue channel, identified by its position in the initially
    /// configured moduli list (1-based).
    ResidueChannel(usize),
}

impl FaultTarget {
    pub fn name(&self) -> &'static str {
        match self {
            FaultTarget::SerialRegisterBit(_) => "register bit",
            FaultTarget::FeedbackBit => "feedback bit",
            FaultTarget::BlockBit(_) => "block bit",
            FaultTarget::CheckSymbol(_) => "check symbol",
            FaultTarget::ResidueChannel(_) => "residue channel",
        }
    }
}

/// How the targeted value is transformed.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum FaultModel {
    Invert,
    StuckAt(bool),
    /// Adds delta modulo the channel modulus (modulo 2 on bits).
    Additive(u64),
}

impl FaultModel {
    pub fn apply_bit(&self, bit: bool) -> bool {
        match *self {
            FaultModel::Invert => !bit,
            FaultModel::StuckAt(v) => v,
            FaultModel::Additive(d) => bit ^ (d % 2 == 1),
        }
    }

    /// Transforms a channel word of the given modulus. Inversion and
    /// stuck-at act on the bit width of m-1, reduced back into range.
    pub fn apply_word(&self, value: u64, modulus: u64) -> u64 {
        let width = 64 - (modulus - 1).leading_zeros();
        let mask = if width >= 64 {
            u64::MAX
        } else {
            (1 << width) - 1
        };
        match *self {
            FaultModel::Invert => (!value & mask) % modulus,
            FaultModel::StuckAt(false) => 0,
            FaultModel::StuckAt(true) => mask % modulus,
            FaultModel::Additive(d) => ((value as u128 + d as u128) % modulus as u128) as u64,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Persistence {
    Transient,
    Permanent,
}

/// One injected fault: target, transformation, first activation time
/// (step or block index depending on the pipeline), persistence.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FaultSpec {
    pub target: FaultTarget,
    pub model: FaultModel,
    pub timing: u64,
    pub persistence: Persistence,
}

impl FaultSpec {
    pub fn active_at(&self, t: u64) -> bool {
        match self.persistence {
            Persistence::Transient => self.timing == t,
            Persistence::Permanent => t >= self.timing,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum GeneratorMode {
    Serial,
    Block,
    Parity,
    Rns,
}

impl GeneratorMode {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorMode::Serial => "serial",
            GeneratorMode::Block => "block",
            GeneratorMode::Parity => "parity",
            GeneratorMode::Rns => "rns",
        }
    }
}

fn check_applicable(
    mode: GeneratorMode,
    tau: usize,
    r: usize,
    channels: usize,
    faults: &[FaultSpec],
) -> Result<()> {
    for f in faults {
        let ok = match f.target {
            FaultTarget::SerialRegisterBit(pos) => {
                if mode == GeneratorMode::Serial && pos >= tau {
                    return Err(Error::FaultOutOfRange { pos, width: tau });
                }
                mode == GeneratorMode::Serial
            }
            FaultTarget::FeedbackBit => mode == GeneratorMode::Serial,
            FaultTarget::BlockBit(pos) => {
                if mode != GeneratorMode::Serial && pos >= tau {
                    return Err(Error::FaultOutOfRange { pos, width: tau });
                }
                mode != GeneratorMode::Serial
            }
            FaultTarget::CheckSymbol(j) => {
                if mode == GeneratorMode::Parity && j >= r {
                    return Err(Error::FaultOutOfRange { pos: j, width: r });
                }
                mode == GeneratorMode::Parity
            }
            FaultTarget::ResidueChannel(t) => {
                if mode == GeneratorMode::Rns && (t == 0 || t > channels) {
                    return Err(Error::FaultOutOfRange {
                        pos: t,
                        width: channels,
                    });
                }
                mode == GeneratorMode::Rns
            }
        };
        if !ok {
            return Err(Error::FaultNotApplicable(
                f.target.name().to_string(),
                mode.name().to_string(),
            ));
        }
    }
    Ok(())
}

/// Everything observed during one pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub stream: Vec<bool>,
    /// Parity syndrome alarms raised.
    pub alarms: usize,
    /// Successful single-channel corrections.
    pub corrected: usize,
    /// Set when an uncorrectable RNS fault stopped the run early.
    pub terminal: Option<StepStatus>,
    /// Moduli excluded by reconfiguration during the run.
    pub excluded: Vec<u64>,
}

fn run_serial(
    poly: &TapPolynomial,
    seed: &[bool],
    n: usize,
    faults: &[FaultSpec],
) -> Result<PipelineRun> {
    let mut lfsr = Lfsr::new(poly.clone(), seed)?;
    let mut stream = Vec::with_capacity(n);
    for s in 0..n as u64 {
        for f in faults {
            if let FaultTarget::SerialRegisterBit(pos) = f.target {
                if f.active_at(s) {
                    let reg = lfsr.register_mut();
                    reg[pos] = f.model.apply_bit(reg[pos]);
                }
            }
        }
        let bit = lfsr.step_with(|fb| {
            faults
                .iter()
                .filter(|f| f.target == FaultTarget::FeedbackBit && f.active_at(s))
                .fold(fb, |b, f| f.model.apply_bit(b))
        });
        stream.push(bit);
    }
    Ok(PipelineRun {
        stream,
        alarms: 0,
        corrected: 0,
        terminal: None,
        excluded: Vec::new(),
    })
}

fn apply_block_faults(block: &mut PrsBlock, index: u64, faults: &[FaultSpec]) {
    for f in faults {
        if let FaultTarget::BlockBit(pos) = f.target {
            if f.active_at(index) {
                block.set_bit(pos, f.model.apply_bit(block.bit(pos)));
            }
        }
    }
}

fn run_block(
    poly: &TapPolynomial,
    seed: &[bool],
    n: usize,
    faults: &[FaultSpec],
) -> Result<PipelineRun> {
    let tau = poly.degree();
    let g = poly.block_matrix(tau)?;
    let mut block = PrsBlock::from_ascending(seed, 0);
    apply_block_faults(&mut block, 0, faults);
    let mut stream = block.ascending();
    while stream.len() < n {
        block = crate::lfsr::block_step(&g, &block)?;
        let index = block.block_index();
        apply_block_faults(&mut block, index, faults);
        stream.extend(block.ascending());
    }
    stream.truncate(n);
    Ok(PipelineRun {
        stream,
        alarms: 0,
        corrected: 0,
        terminal: None,
        excluded: Vec::new(),
    })
}

fn run_parity(
    poly: &TapPolynomial,
    seed: &[bool],
    n: usize,
    faults: &[FaultSpec],
) -> Result<PipelineRun> {
    let tau = poly.degree();
    let g = poly.block_matrix(tau)?;
    let spec = CheckSpec::parity(&g)?;
    let mut block = PrsBlock::from_ascending(seed, 0);
    apply_block_faults(&mut block, 0, faults);
    let mut stream = block.ascending();
    let mut alarms = 0;
    while stream.len() < n {
        let mut guarded = encode_block(&g, &spec, &block)?;
        let index = guarded.block.block_index();
        apply_block_faults(&mut guarded.block, index, faults);
        for f in faults {
            if let FaultTarget::CheckSymbol(j) = f.target {
                if f.active_at(index) {
                    let c = guarded.check(j);
                    if f.model.apply_bit(c) != c {
                        guarded.flip_check(j);
                    }
                }
            }
        }
        if verify_block(&spec, &guarded).iter().any(|&s| s) {
            alarms += 1;
        }
        block = guarded.block;
        stream.extend(block.ascending());
    }
    stream.truncate(n);
    Ok(PipelineRun {
        stream,
        alarms,
        corrected: 0,
        terminal: None,
        excluded: Vec::new(),
    })
}

fn run_rns(
    poly: &TapPolynomial,
    seed: &[bool],
    n: usize,
    moduli: &ModuliSet,
    exclusion_threshold: usize,
    faults: &[FaultSpec],
) -> Result<PipelineRun> {
    // Channel targets are fixed to their modulus up front so that
    // reconfiguration cannot silently retarget a fault.
    let initial = moduli.all();
    let resolved: Vec<(u64, &FaultSpec)> = faults
        .iter()
        .filter_map(|f| match f.target {
            FaultTarget::ResidueChannel(t) => Some((initial[t - 1], f)),
            _ => None,
        })
        .collect();

    let mut gen = ProtectedGenerator::new(poly, seed, moduli.clone(), exclusion_threshold)?;
    apply_block_faults(gen.block_mut(), 0, faults);
    let mut stream = gen.current_block().ascending();
    let mut corrected = 0;
    let mut terminal = None;
    while stream.len() < n {
        let producing = gen.current_block().block_index() + 1;
        let outcome = gen.next_block_with(|values, set| {
            for (modulus, f) in &resolved {
                if !f.active_at(producing) {
                    continue;
                }
                if let Some(ch) = set.channel_of(*modulus) {
                    let v = &mut values.values_mut()[ch.index()];
                    *v = f.model.apply_word(*v, *modulus);
                }
            }
        })?;
        match outcome.status {
            StepStatus::Ok => {}
            StepStatus::Corrected(_) => corrected += 1,
            StepStatus::Detected | StepStatus::Ambiguous => {
                terminal = Some(outcome.status);
                break;
            }
        }
        apply_block_faults(gen.block_mut(), producing, faults);
        stream.extend(gen.current_block().ascending());
    }
    stream.truncate(n);
    Ok(PipelineRun {
        stream,
        alarms: 0,
        corrected,
        terminal,
        excluded: gen.excluded().to_vec(),
    })
}

/// Runs one pipeline of the given mode under a fault schedule.
pub fn run_pipeline(
    mode: GeneratorMode,
    poly: &TapPolynomial,
    seed: &[bool],
    n: usize,
    moduli: Option<&ModuliSet>,
    exclusion_threshold: usize,
    faults: &[FaultSpec],
) -> Result<PipelineRun> {
    if n == 0 {
        return Err(Error::EmptyRun);
    }
    let channels = moduli.map_or(0, |m| m.channel_count());
    check_applicable(mode, poly.degree(), 1, channels, faults)?;
    match mode {
        GeneratorMode::Serial => run_serial(poly, seed, n, faults),
        GeneratorMode::Block => run_block(poly, seed, n, faults),
        GeneratorMode::Parity => run_parity(poly, seed, n, faults),
        GeneratorMode::Rns => {
            let moduli = moduli.ok_or(Error::NoInfoModuli)?;
            run_rns(poly, seed, n, moduli, exclusion_threshold, faults)
        }
    }
}

/// Divergence between a faulty stream and the fault-free shadow.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Divergence {
    pub first_divergence: Option<usize>,
    pub realign_lag: Option<usize>,
}

/// Finds the first differing index and the smallest lag L (up to
/// `max_lag`) at which the faulty stream replays the correct one,
/// i.e. faulty[i] = correct[i-L] from the divergence point onward.
/// Streams are compared over their common prefix length.
pub fn analyze_divergence(correct: &[bool], faulty: &[bool], max_lag: usize) -> Divergence {
    let len = correct.len().min(faulty.len());
    let first = (0..len).find(|&i| correct[i] != faulty[i]);
    let first_divergence = match first {
        None => {
            return Divergence {
                first_divergence: None,
                realign_lag: None,
            }
        }
        Some(i) => i,
    };
    let realign_lag = (1..=max_lag).find(|&lag| {
        let start = first_divergence.max(lag);
        start < len && (start..len).all(|i| faulty[i] == correct[i - lag])
    });
    Divergence {
        first_divergence: Some(first_divergence),
        realign_lag,
    }
}

/// Per-trial verdict.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    /// Faulty stream identical to the shadow, nothing flagged.
    Masked,
    /// Stream differs and no mechanism noticed.
    Missed,
    /// A fault was flagged (and the stream was never silently wrong).
    Detected,
    /// Fault located and corrected; the stream matches the shadow.
    Corrected,
    /// Localization could not single out a channel.
    Ambiguous,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub first_divergence: Option<usize>,
    pub realign_lag: Option<usize>,
    pub status: TrialStatus,
}

/// Aggregated campaign outcome; every trial falls in exactly one
/// bucket.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DetectionReport {
    pub trials: usize,
    pub masked: usize,
    pub missed: usize,
    pub detected: usize,
    pub corrected: usize,
    pub ambiguous: usize,
    pub per_trial: Vec<TrialRecord>,
}

impl DetectionReport {
    pub fn from_records(per_trial: Vec<TrialRecord>) -> Self {
        let mut report = DetectionReport {
            trials: per_trial.len(),
            masked: 0,
            missed: 0,
            detected: 0,
            corrected: 0,
            ambiguous: 0,
            per_trial,
        };
        for t in &report.per_trial {
            match t.status {
                TrialStatus::Masked => report.masked += 1,
                TrialStatus::Missed => report.missed += 1,
                TrialStatus::Detected => report.detected += 1,
                TrialStatus::Corrected => report.corrected += 1,
                TrialStatus::Ambiguous => report.ambiguous += 1,
            }
        }
        report
    }
}

/// How trial fault schedules are produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FaultPlan {
    /// The same explicit schedule every trial.
    Fixed(Vec<FaultSpec>),
    /// One random single fault per trial (target, timing and delta
    /// drawn from the trial PRNG).
    RandomSingle { model: ModelKind },
    /// Exhaustive single-fault grid over targets and timings; the
    /// trial count is derived from the grid.
    Sweep { model: ModelKind },
}

/// Model family for generated plans; Additive draws or sweeps the
/// delta per channel modulus (on bits it degenerates to inversion).
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ModelKind {
    Invert,
    Stuck0,
    Stuck1,
    Additive,
}

impl ModelKind {
    fn fixed_model(&self) -> Option<FaultModel> {
        match self {
            ModelKind::Invert => Some(FaultModel::Invert),
            ModelKind::Stuck0 => Some(FaultModel::StuckAt(false)),
            ModelKind::Stuck1 => Some(FaultModel::StuckAt(true)),
            ModelKind::Additive => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub mode: GeneratorMode,
    pub poly: TapPolynomial,
    pub seed: Vec<bool>,
    /// Stream length in bits (block pipelines emit whole blocks and
    /// truncate).
    pub length: usize,
    pub moduli: Option<ModuliSet>,
    pub exclusion_threshold: usize,
    pub plan: FaultPlan,
    /// Trial count for Fixed and RandomSingle plans; Sweep derives it.
    pub trials: usize,
    pub rng_seed: u64,
    /// Campaign thread cap; None uses the global pool.
    pub threads: Option<usize>,
}

impl CampaignConfig {
    /// Computed blocks in a run (block indices 1..=this).
    fn block_count(&self) -> u64 {
        let tau = self.poly.degree();
        (self.length.saturating_sub(tau)).div_ceil(tau) as u64
    }

    fn plan_model(&self) -> ModelKind {
        match &self.plan {
            FaultPlan::RandomSingle { model } | FaultPlan::Sweep { model } => *model,
            FaultPlan::Fixed(_) => ModelKind::Invert,
        }
    }
}

fn model_for_bit(kind: ModelKind) -> FaultModel {
    match kind {
        ModelKind::Invert | ModelKind::Additive => FaultModel::Invert,
        ModelKind::Stuck0 => FaultModel::StuckAt(false),
        ModelKind::Stuck1 => FaultModel::StuckAt(true),
    }
}

fn sweep_schedules(config: &CampaignConfig) -> Vec<Vec<FaultSpec>> {
    let tau = config.poly.degree();
    let blocks = config.block_count();
    let kind = config.plan_model();
    let mut out = Vec::new();
    let mut push = |target: FaultTarget, model: FaultModel, timing: u64| {
        out.push(vec![FaultSpec {
            target,
            model,
            timing,
            persistence: Persistence::Transient,
        }]);
    };
    match config.mode {
        GeneratorMode::Serial => {
            for timing in 0..config.length as u64 {
                for pos in 0..tau {
                    push(
                        FaultTarget::SerialRegisterBit(pos),
                        model_for_bit(kind),
                        timing,
                    );
                }
                push(FaultTarget::FeedbackBit, model_for_bit(kind), timing);
            }
        }
        GeneratorMode::Block | GeneratorMode::Parity => {
            for timing in 1..=blocks {
                for pos in 0..tau {
                    push(FaultTarget::BlockBit(pos), model_for_bit(kind), timing);
                }
                if config.mode == GeneratorMode::Parity {
                    push(FaultTarget::CheckSymbol(0), model_for_bit(kind), timing);
                }
            }
        }
        GeneratorMode::Rns => {
            let moduli = config.moduli.as_ref().expect("validated");
            for timing in 1..=blocks {
                for (t, &m) in moduli.all().iter().enumerate() {
                    match kind {
                        ModelKind::Additive => {
                            for delta in 1..m {
                                push(
                                    FaultTarget::ResidueChannel(t + 1),
                                    FaultModel::Additive(delta),
                                    timing,
                                );
                            }
                        }
                        other => {
                            push(
                                FaultTarget::ResidueChannel(t + 1),
                                other.fixed_model().unwrap(),
                                timing,
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

fn random_schedule(config: &CampaignConfig, trial: u64) -> Vec<FaultSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(trial + 1);
    let tau = config.poly.degree();
    let blocks = config.block_count().max(1);
    let kind = config.plan_model();
    let (target, timing, modulus) = match config.mode {
        GeneratorMode::Serial => {
            let timing = rng.gen_range(0..config.length as u64);
            let which = rng.gen_range(0..=tau);
            let target = if which == tau {
                FaultTarget::FeedbackBit
            } else {
                FaultTarget::SerialRegisterBit(which)
            };
            (target, timing, None)
        }
        GeneratorMode::Block => {
            let timing = rng.gen_range(1..=blocks);
            (FaultTarget::BlockBit(rng.gen_range(0..tau)), timing, None)
        }
        GeneratorMode::Parity => {
            let timing = rng.gen_range(1..=blocks);
            let which = rng.gen_range(0..tau + 1);
            let target = if which == tau {
                FaultTarget::CheckSymbol(0)
            } else {
                FaultTarget::BlockBit(which)
            };
            (target, timing, None)
        }
        GeneratorMode::Rns => {
            let moduli = config.moduli.as_ref().expect("validated");
            let timing = rng.gen_range(1..=blocks);
            let t = rng.gen_range(0..moduli.channel_count());
            (
                FaultTarget::ResidueChannel(t + 1),
                timing,
                Some(moduli.all()[t]),
            )
        }
    };
    let model = match (kind, modulus) {
        (ModelKind::Additive, Some(m)) => FaultModel::Additive(rng.gen_range(1..m)),
        (kind, _) => model_for_bit(kind),
    };
    vec![FaultSpec {
        target,
        model,
        timing,
        persistence: Persistence::Transient,
    }]
}

fn classify(config: &CampaignConfig, run: &PipelineRun, shadow: &[bool]) -> TrialStatus {
    let same = run.stream.len() == shadow.len() && run.stream == shadow;
    match config.mode {
        GeneratorMode::Serial | GeneratorMode::Block => {
            if same {
                TrialStatus::Masked
            } else {
                TrialStatus::Missed
            }
        }
        GeneratorMode::Parity => {
            if run.alarms > 0 {
                TrialStatus::Detected
            } else if same {
                TrialStatus::Masked
            } else {
                TrialStatus::Missed
            }
        }
        GeneratorMode::Rns => match run.terminal {
            Some(StepStatus::Detected) => TrialStatus::Detected,
            Some(StepStatus::Ambiguous) => TrialStatus::Ambiguous,
            _ => {
                if run.corrected > 0 {
                    if same {
                        TrialStatus::Corrected
                    } else {
                        // Localization picked a channel but the output
                        // still went wrong: count as flagged, never as
                        // a clean correction.
                        TrialStatus::Detected
                    }
                } else if same {
                    TrialStatus::Masked
                } else {
                    TrialStatus::Missed
                }
            }
        },
    }
}

fn run_trial(
    config: &CampaignConfig,
    shadow: &[bool],
    faults: &[FaultSpec],
) -> Result<TrialRecord> {
    let run = run_pipeline(
        config.mode,
        &config.poly,
        &config.seed,
        config.length,
        config.moduli.as_ref(),
        config.exclusion_threshold,
        faults,
    )?;
    let div = analyze_divergence(shadow, &run.stream, config.poly.degree() * 4);
    Ok(TrialRecord {
        first_divergence: div.first_divergence,
        realign_lag: div.realign_lag,
        status: classify(config, &run, shadow),
    })
}

/// Runs a deterministic fault campaign: a fault-free shadow run, then
/// every trial in parallel, each classified against the shadow.
pub fn run_campaign(config: &CampaignConfig) -> Result<DetectionReport> {
    if config.length == 0 {
        return Err(Error::EmptyRun);
    }
    if config.mode == GeneratorMode::Rns && config.moduli.is_none() {
        return Err(Error::NoInfoModuli);
    }
    let shadow = run_pipeline(
        config.mode,
        &config.poly,
        &config.seed,
        config.length,
        config.moduli.as_ref(),
        config.exclusion_threshold,
        &[],
    )?
    .stream;

    let schedules: Vec<Vec<FaultSpec>> = match &config.plan {
        FaultPlan::Fixed(faults) => {
            if config.trials == 0 {
                return Err(Error::NoTrials);
            }
            vec![faults.clone(); config.trials]
        }
        FaultPlan::RandomSingle { .. } => {
            if config.trials == 0 {
                return Err(Error::NoTrials);
            }
            (0..config.trials as u64)
                .map(|t| random_schedule(config, t))
                .collect()
        }
        FaultPlan::Sweep { .. } => sweep_schedules(config),
    };

    let execute = || -> Result<Vec<TrialRecord>> {
        schedules
            .par_iter()
            .map(|faults| run_trial(config, &shadow, faults))
            .collect()
    };
    let records = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(execute),
        None => execute(),
    }?;
    Ok(DetectionReport::from_records(records))
}
