//! Flat key=value run configs with `[generator]`, `[rns]` and
//! `[faults]` sections.

use anyhow::{bail, Context, Result};

/// Raw settings from a config file; strings stay in their flag syntax
/// so one parser serves both sources.
#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    pub poly: Option<String>,
    pub seed: Option<String>,
    pub mode: Option<String>,
    pub length: Option<usize>,
    pub format: Option<String>,
    pub moduli: Option<String>,
    pub threshold: Option<usize>,
    pub faults: Vec<String>,
}

pub fn parse(text: &str) -> Result<FileConfig> {
    let mut config = FileConfig::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("config line {}: '{raw}'", idx + 1);
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .with_context(|| format!("unterminated section header, {}", at()))?;
            match name {
                "generator" | "rns" | "faults" => section = name.to_string(),
                other => bail!("unknown section '[{other}]', {}", at()),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("expected 'key = value', {}", at()))?;
        let key = key.trim();
        let value = value.trim().to_string();
        match (section.as_str(), key) {
            ("generator", "poly") => config.poly = Some(value),
            ("generator", "seed") => config.seed = Some(value),
            ("generator", "mode") => config.mode = Some(value),
            ("generator", "length") => {
                config.length = Some(
                    value
                        .parse()
                        .with_context(|| format!("bad length, {}", at()))?,
                )
            }
            ("generator", "format") => config.format = Some(value),
            ("rns", "moduli") => config.moduli = Some(value),
            ("rns", "threshold") => {
                config.threshold = Some(
                    value
                        .parse()
                        .with_context(|| format!("bad threshold, {}", at()))?,
                )
            }
            ("faults", "fault") => config.faults.push(value),
            ("", _) => bail!("key outside any section, {}", at()),
            (section, key) => bail!("unknown key '{key}' in [{section}], {}", at()),
        }
    }
    Ok(config)
}

/// Effective settings back to config text; reading it reproduces the
/// same run.
pub fn render(
    poly: &str,
    seed: &str,
    mode: &str,
    length: usize,
    format: &str,
    rns: Option<(&str, usize)>,
    faults: &[String],
) -> String {
    let mut out = String::new();
    out.push_str("[generator]\n");
    out.push_str(&format!("poly = {poly}\n"));
    out.push_str(&format!("seed = {seed}\n"));
    out.push_str(&format!("mode = {mode}\n"));
    out.push_str(&format!("length = {length}\n"));
    out.push_str(&format!("format = {format}\n"));
    if let Some((moduli, threshold)) = rns {
        out.push_str("\n[rns]\n");
        out.push_str(&format!("moduli = {moduli}\n"));
        out.push_str(&format!("threshold = {threshold}\n"));
    }
    if !faults.is_empty() {
        out.push_str("\n[faults]\n");
        for fault in faults {
            out.push_str(&format!("fault = {fault}\n"));
        }
    }
    out
}
