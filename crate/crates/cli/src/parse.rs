//! Text forms shared by command-line flags and config files.

use anyhow::{bail, ensure, Context, Result};
use prsg_core::{FaultModel, FaultSpec, FaultTarget, ModuliSet, Persistence, TapPolynomial};

/// `4:1` or `8:1,5,6` -> degree and tap exponents.
pub fn parse_poly(text: &str) -> Result<TapPolynomial> {
    let (degree, taps) = text
        .split_once(':')
        .with_context(|| format!("poly '{text}' must look like 'degree:tap,tap,...'"))?;
    let degree: usize = degree
        .trim()
        .parse()
        .with_context(|| format!("bad degree in poly '{text}'"))?;
    let taps: Vec<usize> = taps
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .with_context(|| format!("bad tap '{t}' in poly '{text}'"))
        })
        .collect::<Result<_>>()?;
    Ok(TapPolynomial::new(degree, &taps)?)
}

pub fn poly_to_string(poly: &TapPolynomial) -> String {
    let taps: Vec<String> = poly.taps().iter().map(|t| t.to_string()).collect();
    format!("{}:{}", poly.degree(), taps.join(","))
}

/// Seed text, leftmost character emitted first.
pub fn parse_seed(text: &str) -> Result<Vec<bool>> {
    Ok(prsg_core::bits::parse_bits(text)?)
}

/// Moduli request: explicit channels or an automatic pick.
#[derive(Clone, Debug)]
pub enum ModuliSpec {
    /// `auto:<k>`: smallest primes meeting the range bound plus k
    /// redundant ones.
    Auto(usize),
    /// `m1,m2,...:r1,r2,...`: informational then redundant.
    Explicit(Vec<u64>, Vec<u64>),
}

impl ModuliSpec {
    /// Validates against the packed width the generator needs.
    pub fn build(&self, required_bits: u64) -> Result<ModuliSet> {
        match self {
            ModuliSpec::Auto(k) => Ok(ModuliSet::auto(required_bits, *k)?),
            ModuliSpec::Explicit(info, redundant) => Ok(ModuliSet::new(
                info.clone(),
                redundant.clone(),
                required_bits,
            )?),
        }
    }
}

pub fn parse_moduli(text: &str) -> Result<ModuliSpec> {
    if let Some(k) = text.strip_prefix("auto:") {
        let k = k
            .trim()
            .parse()
            .with_context(|| format!("bad redundancy in moduli '{text}'"))?;
        return Ok(ModuliSpec::Auto(k));
    }
    let (info, redundant) = text.split_once(':').with_context(|| {
        format!("moduli '{text}' must look like 'info,...:redundant,...' or 'auto:<k>'")
    })?;
    let list = |part: &str| -> Result<Vec<u64>> {
        part.split(',')
            .map(|m| {
                m.trim()
                    .parse()
                    .with_context(|| format!("bad modulus '{m}' in '{text}'"))
            })
            .collect()
    };
    Ok(ModuliSpec::Explicit(list(info)?, list(redundant)?))
}

pub fn moduli_to_string(set: &ModuliSet) -> String {
    let join = |ms: &[u64]| {
        ms.iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{}:{}", join(set.info()), join(set.redundant()))
}

/// `target@timing:model[:permanent]` with targets `register:<pos>`,
/// `feedback`, `block:<pos>`, `check:<j>`, `channel:<ordinal>` and
/// models `invert`, `stuck0`, `stuck1`, `add:<delta>`.
pub fn parse_fault(text: &str) -> Result<FaultSpec> {
    let (target, rest) = text
        .split_once('@')
        .with_context(|| format!("fault '{text}' must look like 'target@timing:model'"))?;

    let target = match target.split_once(':') {
        None => match target {
            "feedback" => FaultTarget::FeedbackBit,
            other => bail!("unknown fault target '{other}' in '{text}'"),
        },
        Some((kind, arg)) => {
            let arg: usize = arg
                .parse()
                .with_context(|| format!("bad target index '{arg}' in '{text}'"))?;
            match kind {
                "register" => FaultTarget::SerialRegisterBit(arg),
                "block" => FaultTarget::BlockBit(arg),
                "check" => FaultTarget::CheckSymbol(arg),
                "channel" => FaultTarget::ResidueChannel(arg),
                other => bail!("unknown fault target '{other}' in '{text}'"),
            }
        }
    };

    let mut parts = rest.split(':');
    let timing = parts
        .next()
        .filter(|t| !t.is_empty())
        .with_context(|| format!("missing timing in fault '{text}'"))?;
    let timing: u64 = timing
        .parse()
        .with_context(|| format!("bad timing '{timing}' in '{text}'"))?;
    let model = match parts.next() {
        Some("invert") => FaultModel::Invert,
        Some("stuck0") => FaultModel::StuckAt(false),
        Some("stuck1") => FaultModel::StuckAt(true),
        Some("add") => {
            let delta = parts
                .next()
                .with_context(|| format!("add model in '{text}' needs a delta"))?;
            let delta: u64 = delta
                .parse()
                .with_context(|| format!("bad delta '{delta}' in '{text}'"))?;
            FaultModel::Additive(delta)
        }
        other => bail!("unknown fault model '{}' in '{text}'", other.unwrap_or("")),
    };
    let persistence = match parts.next() {
        None => Persistence::Transient,
        Some("permanent") => Persistence::Permanent,
        Some(other) => bail!("unexpected trailing '{other}' in fault '{text}'"),
    };
    ensure!(
        parts.next().is_none(),
        "unexpected trailing text in fault '{text}'"
    );
    Ok(FaultSpec {
        target,
        model,
        timing,
        persistence,
    })
}

pub fn fault_to_string(fault: &FaultSpec) -> String {
    let target = match fault.target {
        FaultTarget::SerialRegisterBit(p) => format!("register:{p}"),
        FaultTarget::FeedbackBit => "feedback".to_string(),
        FaultTarget::BlockBit(p) => format!("block:{p}"),
        FaultTarget::CheckSymbol(j) => format!("check:{j}"),
        FaultTarget::ResidueChannel(t) => format!("channel:{t}"),
    };
    let model = match fault.model {
        FaultModel::Invert => "invert".to_string(),
        FaultModel::StuckAt(false) => "stuck0".to_string(),
        FaultModel::StuckAt(true) => "stuck1".to_string(),
        FaultModel::Additive(d) => format!("add:{d}"),
    };
    let tail = match fault.persistence {
        Persistence::Transient => "",
        Persistence::Permanent => ":permanent",
    };
    format!("{target}@{}:{model}{tail}", fault.timing)
}
