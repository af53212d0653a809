//! Report envelope and artifact writers.
//!
//! Reports carry no timestamps, so two runs on the same inputs produce
//! byte-identical output; the embedded config hash ties every report back
//! to the exact file it came from.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use crate::config::{EffectiveConfig, Overrides};
use crate::CliError;

#[derive(Serialize)]
pub struct OperatorEcho {
    pub factors: Vec<FactorEcho>,
    pub delta: f64,
    pub alpha: [f64; 2],
    pub s0: f64,
    pub q0: f64,
}

#[derive(Serialize)]
pub struct FactorEcho {
    pub kind: &'static str,
    pub lambda: f64,
    pub p0: f64,
}

#[derive(Serialize)]
pub struct TruncationEcho {
    pub bounds: Vec<u32>,
    pub n_t: usize,
}

/// The common outer layer of every report.
#[derive(Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub task: &'static str,
    pub config_path: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
    pub operator: OperatorEcho,
    pub truncation: TruncationEcho,
    pub result: Value,
}

pub fn envelope(
    task: &'static str,
    config_path: &str,
    eff: &EffectiveConfig,
    result: Value,
) -> Result<Envelope, CliError> {
    use crate::config::FactorKind;
    let op = &eff.config.operator;
    let params = eff.params()?;
    let factors = op
        .factors
        .iter()
        .map(|f| FactorEcho {
            kind: match f.kind {
                FactorKind::Circle => "circle",
                FactorKind::Su2 => "su2",
            },
            lambda: f.lambda,
            p0: f.p0,
        })
        .collect();
    Ok(Envelope {
        tool: "vekua",
        task,
        config_path: config_path.to_string(),
        config_hash: eff.config_hash.clone(),
        overrides: eff.overrides.clone(),
        operator: OperatorEcho {
            factors,
            delta: op.delta,
            alpha: [op.alpha.re, op.alpha.im],
            s0: params.s0(),
            q0: params.q0(),
        },
        truncation: TruncationEcho {
            bounds: eff.config.truncation.bounds.clone(),
            n_t: eff.config.truncation.n_t,
        },
        result,
    })
}

/// Print the report to stdout and, when an output prefix is configured,
/// mirror it to `<prefix>.report.json`.
pub fn emit(envelope: &Envelope, eff: &EffectiveConfig) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(envelope)
        .map_err(|e| CliError::Config(format!("report serialization: {e}")))?;
    println!("{text}");
    if let Some(prefix) = output_prefix(eff) {
        let path = PathBuf::from(format!("{}.report.json", prefix.display()));
        fs::write(&path, format!("{text}\n"))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Output prefix resolved against the config file's directory, or the
/// command-line override verbatim.
pub fn output_prefix(eff: &EffectiveConfig) -> Option<PathBuf> {
    eff.config.output.as_ref().map(|p| {
        let path = PathBuf::from(p);
        if path.is_absolute() {
            path
        } else {
            eff.config_dir.join(path)
        }
    })
}

pub fn write_artifact(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Render a complex number as a fixed-width scientific pair for tables.
pub fn fmt_c(z: num_complex::Complex64) -> String {
    format!("{:>13.6e} {:>+13.6e}i", z.re, z.im)
}
