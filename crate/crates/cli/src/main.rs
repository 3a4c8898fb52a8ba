//! prsg: block-parallel LFSR keystream generation with linear-code
//! guards, packed-polynomial evaluation and residue-coded fault
//! tolerance.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use prsg_core::bits::{bits_to_hex, bits_to_string};
use prsg_core::{
    pack_system, run_campaign, run_pipeline, CampaignConfig, CheckSpec, DetectionReport, FaultPlan,
    FaultSpec, FaultTarget, GeneratorMode, ModelKind, ModuliSet, ProtectedGenerator, TapPolynomial,
    DEFAULT_EXCLUSION_THRESHOLD,
};

mod config;
mod parse;

#[derive(Parser)]
#[command(
    name = "prsg",
    version,
    about = "Fault-tolerant pseudo-random sequence generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a keystream
    Generate(GenerateArgs),
    /// Print the block transform matrix, row per line
    Matrix(MatrixArgs),
    /// Run the residue-protected pipeline, one status line per block
    Protect(ProtectArgs),
    /// Run a fault-injection campaign and emit the JSON report
    Inject(InjectArgs),
    /// Render a campaign report
    Report(ReportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Serial,
    Block,
    Parity,
    Rns,
}

impl ModeArg {
    fn core(self) -> GeneratorMode {
        match self {
            ModeArg::Serial => GeneratorMode::Serial,
            ModeArg::Block => GeneratorMode::Block,
            ModeArg::Parity => GeneratorMode::Parity,
            ModeArg::Rns => GeneratorMode::Rns,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Forming polynomial 'degree:tap,tap,...'; 4:1 is x^4+x+1
    #[arg(long)]
    poly: Option<String>,
    /// Seed bits; the leftmost character is the first emitted bit
    #[arg(long)]
    seed: Option<String>,
    /// Stream length in bits
    #[arg(long)]
    n: Option<usize>,
    /// Generation path; all paths emit the same fault-free stream
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Residue channels 'info,...:redundant,...' or 'auto:<k>' (rns only)
    #[arg(long)]
    moduli: Option<String>,
    /// Consecutive corrections on one channel before it is excluded
    #[arg(long)]
    threshold: Option<usize>,
    /// Hex output: 8 bits per byte, first bit is the MSB of the first
    /// byte, final partial byte zero-padded low
    #[arg(long)]
    hex: bool,
    /// Fault to inject, 'target@timing:model[:permanent]'; repeatable
    #[arg(long = "fault")]
    faults: Vec<String>,
    /// Read settings from a config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the effective settings to a config file
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    /// Forming polynomial 'degree:tap,tap,...'
    #[arg(long)]
    poly: String,
    /// Transform span in steps; defaults to the degree (one block)
    #[arg(long)]
    span: Option<usize>,
    /// Append the parity check row
    #[arg(long)]
    guard: bool,
}

#[derive(Args)]
struct ProtectArgs {
    /// Forming polynomial 'degree:tap,tap,...'
    #[arg(long)]
    poly: String,
    /// Seed bits; the leftmost character is the first emitted bit
    #[arg(long)]
    seed: String,
    /// Residue channels 'info,...:redundant,...' or 'auto:<k>'
    #[arg(long)]
    moduli: String,
    /// Number of blocks to produce
    #[arg(long)]
    blocks: u64,
    /// Consecutive corrections on one channel before it is excluded
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_THRESHOLD)]
    threshold: usize,
    /// Fault to inject, 'target@timing:model[:permanent]'; repeatable
    #[arg(long = "fault")]
    faults: Vec<String>,
}

#[derive(Args)]
struct InjectArgs {
    /// Forming polynomial 'degree:tap,tap,...'
    #[arg(long)]
    poly: String,
    /// Seed bits; the leftmost character is the first emitted bit
    #[arg(long)]
    seed: String,
    /// Stream length in bits per trial
    #[arg(long)]
    n: usize,
    /// Pipeline under test
    #[arg(long, value_enum, default_value = "serial")]
    mode: ModeArg,
    /// Residue channels 'info,...:redundant,...' or 'auto:<k>' (rns only)
    #[arg(long)]
    moduli: Option<String>,
    /// Consecutive corrections on one channel before it is excluded
    #[arg(long, default_value_t = DEFAULT_EXCLUSION_THRESHOLD)]
    threshold: usize,
    /// Fault distribution: every single fault, one random fault per
    /// trial, or a fixed schedule from --fault
    #[arg(long, value_enum)]
    plan: PlanArg,
    /// Fault model for sweep and random plans
    #[arg(long, value_enum, default_value = "invert")]
    model: ModelArg,
    /// Trial count for random and fixed plans (sweep derives its own)
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Campaign PRNG seed; trials derive from it by index
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Fixed-plan fault, 'target@timing:model[:permanent]'; repeatable
    #[arg(long = "fault")]
    faults: Vec<String>,
    /// Write the JSON report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PlanArg {
    Sweep,
    Random,
    Fixed,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Invert,
    Stuck0,
    Stuck1,
    Add,
}

impl ModelArg {
    fn core(self) -> ModelKind {
        match self {
            ModelArg::Invert => ModelKind::Invert,
            ModelArg::Stuck0 => ModelKind::Stuck0,
            ModelArg::Stuck1 => ModelKind::Stuck1,
            ModelArg::Add => ModelKind::Additive,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON file; absent or '-' reads stdin
    #[arg(long)]
    input: Option<PathBuf>,
}

fn main() {
    match run() {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(2);
        }
    }
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Matrix(args) => matrix(args),
        Command::Protect(args) => protect(args),
        Command::Inject(args) => inject(args),
        Command::Report(args) => report(args),
    }
}

/// Packed width of the polynomial system; the operating range any
/// moduli set must cover.
fn packed_width(poly: &TapPolynomial) -> Result<u64> {
    let g = poly.block_matrix(poly.degree())?;
    Ok(pack_system(&g).total_width())
}

fn build_moduli(
    mode: GeneratorMode,
    text: Option<&str>,
    poly: &TapPolynomial,
) -> Result<Option<ModuliSet>> {
    match (mode, text) {
        (GeneratorMode::Rns, Some(text)) => {
            let spec = parse::parse_moduli(text)?;
            Ok(Some(spec.build(packed_width(poly)?)?))
        }
        (GeneratorMode::Rns, None) => bail!("rns mode needs --moduli"),
        (_, Some(_)) => bail!("--moduli only applies to rns mode"),
        (_, None) => Ok(None),
    }
}

fn parse_faults(texts: &[String]) -> Result<Vec<FaultSpec>> {
    texts.iter().map(|t| parse::parse_fault(t)).collect()
}

fn generate(args: GenerateArgs) -> Result<i32> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            config::parse(&text)?
        }
        None => config::FileConfig::default(),
    };

    let poly = parse::parse_poly(&args.poly.or(file.poly).context("missing --poly")?)?;
    let seed = parse::parse_seed(&args.seed.or(file.seed).context("missing --seed")?)?;
    let n = args.n.or(file.length).context("missing --n")?;
    let mode = match (args.mode, file.mode) {
        (Some(mode), _) => mode,
        (None, Some(text)) => ModeArg::from_str(&text, true).map_err(|e| anyhow!("{e}"))?,
        (None, None) => ModeArg::Serial,
    };
    let hex = args.hex
        || match file.format.as_deref() {
            None | Some("bits") => false,
            Some("hex") => true,
            Some(other) => bail!("unknown format '{other}'"),
        };
    let threshold = args
        .threshold
        .or(file.threshold)
        .unwrap_or(DEFAULT_EXCLUSION_THRESHOLD);
    let fault_texts = if args.faults.is_empty() {
        file.faults
    } else {
        args.faults
    };
    let faults = parse_faults(&fault_texts)?;
    let moduli = build_moduli(mode.core(), args.moduli.or(file.moduli).as_deref(), &poly)?;

    if let Some(path) = &args.dump_config {
        let text = config::render(
            &parse::poly_to_string(&poly),
            &bits_to_string(&seed),
            mode.core().name(),
            n,
            if hex { "hex" } else { "bits" },
            moduli
                .as_ref()
                .map(|set| (parse::moduli_to_string(set), threshold))
                .as_ref()
                .map(|(m, t)| (m.as_str(), *t)),
            &faults
                .iter()
                .map(parse::fault_to_string)
                .collect::<Vec<_>>(),
        );
        fs::write(path, text).with_context(|| format!("cannot write config {}", path.display()))?;
    }

    if n == 0 {
        return Ok(0);
    }
    let run = run_pipeline(
        mode.core(),
        &poly,
        &seed,
        n,
        moduli.as_ref(),
        threshold,
        &faults,
    )?;

    if hex {
        println!("{}", bits_to_hex(&run.stream));
    } else {
        println!("{}", bits_to_string(&run.stream));
    }
    for m in &run.excluded {
        eprintln!("reconfigured: modulus {m} excluded");
    }
    if let Some(status) = &run.terminal {
        eprintln!("halted after {} bits: {status}", run.stream.len());
        return Ok(1);
    }
    if run.alarms > 0 {
        eprintln!("parity alarms: {}", run.alarms);
        return Ok(1);
    }
    Ok(0)
}

fn matrix(args: MatrixArgs) -> Result<i32> {
    let poly = parse::parse_poly(&args.poly)?;
    let g = poly.block_matrix(args.span.unwrap_or(poly.degree()))?;
    for i in 0..g.rows() {
        println!("{}", bits_to_string(&g.row(i)));
    }
    if args.guard {
        let spec = CheckSpec::parity(&g)?;
        println!("{}", bits_to_string(&spec.check_rows()[0]));
    }
    Ok(0)
}

fn protect(args: ProtectArgs) -> Result<i32> {
    let poly = parse::parse_poly(&args.poly)?;
    let seed = parse::parse_seed(&args.seed)?;
    let moduli = parse::parse_moduli(&args.moduli)?.build(packed_width(&poly)?)?;
    let faults = parse_faults(&args.faults)?;
    let tau = poly.degree();
    let channels = moduli.channel_count();
    for f in &faults {
        match f.target {
            FaultTarget::BlockBit(pos) if pos < tau => {}
            FaultTarget::ResidueChannel(t) if t >= 1 && t <= channels => {}
            ref other => bail!(
                "fault target '{}' does not apply to the protected pipeline",
                other.name()
            ),
        }
    }
    // Channel faults stick to their modulus so reconfiguration cannot
    // silently retarget them.
    let initial = moduli.all();
    let resolved: Vec<(u64, FaultSpec)> = faults
        .iter()
        .filter_map(|f| match f.target {
            FaultTarget::ResidueChannel(t) => Some((initial[t - 1], f.clone())),
            _ => None,
        })
        .collect();
    let apply_block_faults = |block: &mut prsg_core::PrsBlock, index: u64| {
        for f in &faults {
            if let FaultTarget::BlockBit(pos) = f.target {
                if f.active_at(index) {
                    block.set_bit(pos, f.model.apply_bit(block.bit(pos)));
                }
            }
        }
    };

    let mut gen = ProtectedGenerator::new(&poly, &seed, moduli, args.threshold)?;
    apply_block_faults(gen.block_mut(), 0);
    let mut announced = 0;
    for index in 1..=args.blocks {
        let outcome = gen.next_block_with(|values, set| {
            for (modulus, f) in &resolved {
                if !f.active_at(index) {
                    continue;
                }
                if let Some(ch) = set.channel_of(*modulus) {
                    let v = &mut values.values_mut()[ch.index()];
                    *v = f.model.apply_word(*v, *modulus);
                }
            }
        })?;
        if outcome.block.is_none() {
            println!("{index} {} {}", "-".repeat(tau), outcome.status);
            eprintln!("halted at block {index}: {}", outcome.status);
            return Ok(1);
        }
        apply_block_faults(gen.block_mut(), index);
        println!(
            "{index} {} {}",
            bits_to_string(gen.current_block().descending()),
            outcome.status
        );
        while announced < gen.excluded().len() {
            eprintln!(
                "reconfigured: modulus {} excluded, capability now {}",
                gen.excluded()[announced],
                gen.capability()
            );
            announced += 1;
        }
    }
    Ok(0)
}

fn inject(args: InjectArgs) -> Result<i32> {
    let poly = parse::parse_poly(&args.poly)?;
    let seed = parse::parse_seed(&args.seed)?;
    let moduli = build_moduli(args.mode.core(), args.moduli.as_deref(), &poly)?;
    let plan = match args.plan {
        PlanArg::Sweep => {
            if !args.faults.is_empty() {
                bail!("--fault only applies to the fixed plan");
            }
            FaultPlan::Sweep {
                model: args.model.core(),
            }
        }
        PlanArg::Random => {
            if !args.faults.is_empty() {
                bail!("--fault only applies to the fixed plan");
            }
            FaultPlan::RandomSingle {
                model: args.model.core(),
            }
        }
        PlanArg::Fixed => {
            let faults = parse_faults(&args.faults)?;
            if faults.is_empty() {
                bail!("fixed plan needs at least one --fault");
            }
            FaultPlan::Fixed(faults)
        }
    };
    let threads = match std::env::var("PRSG_THREADS") {
        Ok(text) => Some(
            text.parse()
                .with_context(|| format!("bad PRSG_THREADS '{text}'"))?,
        ),
        Err(_) => None,
    };

    let config = CampaignConfig {
        mode: args.mode.core(),
        poly,
        seed,
        length: args.n,
        moduli,
        exclusion_threshold: args.threshold,
        plan,
        trials: args.trials,
        rng_seed: args.rng_seed,
        threads,
    };
    let report = run_campaign(&config)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => fs::write(path, json + "\n")
            .with_context(|| format!("cannot write report {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(0)
}

fn report(args: ReportArgs) -> Result<i32> {
    let text = match &args.input {
        Some(path) if path.as_os_str() != "-" => fs::read_to_string(path)
            .with_context(|| format!("cannot read report {}", path.display()))?,
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let report: DetectionReport = serde_json::from_str(&text).context("malformed report")?;

    let pct = |n: usize| {
        if report.trials == 0 {
            0.0
        } else {
            100.0 * n as f64 / report.trials as f64
        }
    };
    println!("trials     {}", report.trials);
    for (name, n) in [
        ("masked", report.masked),
        ("missed", report.missed),
        ("detected", report.detected),
        ("corrected", report.corrected),
        ("ambiguous", report.ambiguous),
    ] {
        println!("{name:<9} {n:>6}  {:5.1}%", pct(n));
    }
    let diverged = report
        .per_trial
        .iter()
        .filter(|t| t.first_divergence.is_some())
        .count();
    println!("diverged   {diverged:>6}");
    Ok(0)
}
