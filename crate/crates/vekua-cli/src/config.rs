//! Run configuration: JSON schema, validation, scalar overrides, and the
//! translation into library types.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use vekua::field::{CoefficientField, PairedField, Profile};
use vekua::group::{FactorIndex, GroupFactor, GroupModel, ModeIndex};
use vekua::mode::VekuaParams;
use vekua::profile::{FourierPoly, TrigPoly};

use crate::CliError;

/// One factor of the group: kind plus its drift coefficients.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub lambda: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Circle,
    Su2,
}

/// Real trigonometric polynomial: mean plus cosine/sine harmonics.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSpec {
    pub mean: f64,
    #[serde(default)]
    pub harmonics: Vec<HarmonicSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub freq: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub factors: Vec<FactorSpec>,
    pub delta: f64,
    pub alpha: ComplexSpec,
    pub s: TrigSpec,
    pub q: TrigSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Per-factor bounds: `|k| <= bound` for circle factors, `two_l <=
    /// bound` for SU(2) factors.
    pub bounds: Vec<u32>,
    pub n_t: usize,
}

/// Mode index in configuration form, also used to serialize solutions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FactorIndexSpec {
    Circle { k: i64 },
    Su2 { two_l: i64, two_m: i64, two_n: i64 },
}

impl FactorIndexSpec {
    pub fn to_lib(&self) -> FactorIndex {
        match *self {
            FactorIndexSpec::Circle { k } => FactorIndex::Circle { k },
            FactorIndexSpec::Su2 { two_l, two_m, two_n } => {
                FactorIndex::Su2 { two_l, two_m, two_n }
            }
        }
    }

    pub fn from_lib(entry: &FactorIndex) -> Self {
        match *entry {
            FactorIndex::Circle { k } => FactorIndexSpec::Circle { k },
            FactorIndex::Su2 { two_l, two_m, two_n } => {
                FactorIndexSpec::Su2 { two_l, two_m, two_n }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// One mode's profile: exactly one of `coeffs` (trigonometric polynomial in
/// `e^{int}`) or `samples` (closed grid of `n_t + 1` `[re, im]` pairs).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub index: Vec<FactorIndexSpec>,
    #[serde(default)]
    pub coeffs: Option<Vec<CoeffSpec>>,
    #[serde(default)]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub modes: Vec<ModeSpec>,
}

/// Forcing source: a separate field-spec file or an inline field spec.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub inline: Option<FieldSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonancesSpec {
    #[serde(default = "default_k_bound")]
    pub k_bound: i64,
}

fn default_k_bound() -> i64 {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineSpec {
    #[serde(default = "default_dio_m")]
    pub m: f64,
}

fn default_dio_m() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_oracle_nt")]
    pub n_t: usize,
    #[serde(default = "default_oracle_substeps")]
    pub substeps: usize,
    #[serde(default = "default_oracle_classes")]
    pub max_classes: usize,
}

fn default_oracle_nt() -> usize {
    512
}

fn default_oracle_substeps() -> usize {
    16
}

fn default_oracle_classes() -> usize {
    6
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            n_t: default_oracle_nt(),
            substeps: default_oracle_substeps(),
            max_classes: default_oracle_classes(),
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub operator: OperatorSpec,
    pub truncation: TruncationSpec,
    /// Optional self-description; when present it must match the invoked
    /// subcommand.
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    /// Path prefix for artifacts (`<prefix>.report.json` and task-specific
    /// files); without it the report goes to stdout only.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub resonances: Option<ResonancesSpec>,
    #[serde(default)]
    pub diophantine: Option<DiophantineSpec>,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
}

/// Scalar overrides from the command line; everything else comes from the
/// config file.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc_l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.delta.is_none()
            && self.alpha_re.is_none()
            && self.alpha_im.is_none()
            && self.trunc_l.is_none()
            && self.nt.is_none()
    }
}

/// Parsed, validated, override-applied configuration plus the raw-file hash.
pub struct EffectiveConfig {
    pub config: ConfigFile,
    pub config_hash: String,
    pub config_dir: std::path::PathBuf,
    pub overrides: Overrides,
}

/// 64-bit FNV-1a over the raw config bytes; reports embed it so evidence
/// can be tied back to the exact input file.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn load_config(path: &Path, overrides: Overrides) -> Result<EffectiveConfig, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut config: ConfigFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    let config_hash = format!("{:016x}", fnv1a64(&bytes));

    if let Some(delta) = overrides.delta {
        config.operator.delta = delta;
    }
    if let Some(re) = overrides.alpha_re {
        config.operator.alpha.re = re;
    }
    if let Some(im) = overrides.alpha_im {
        config.operator.alpha.im = im;
    }
    if let Some(l) = overrides.trunc_l {
        for b in &mut config.truncation.bounds {
            *b = l;
        }
    }
    if let Some(nt) = overrides.nt {
        config.truncation.n_t = nt;
    }

    validate(&config)?;
    let config_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    Ok(EffectiveConfig { config, config_hash, config_dir, overrides })
}

fn validate(config: &ConfigFile) -> Result<(), CliError> {
    let op = &config.operator;
    if op.factors.is_empty() {
        return Err(CliError::Config("operator.factors: need at least one factor".into()));
    }
    if op.alpha.re == 0.0 && op.alpha.im == 0.0 {
        return Err(CliError::Hypothesis(
            "operator.alpha: alpha = 0 violates the nonzero-coupling hypothesis \
             (alpha must lie in C \\ {0})"
                .into(),
        ));
    }
    for (j, f) in op.factors.iter().enumerate() {
        if !f.lambda.is_finite() || !f.p0.is_finite() {
            return Err(CliError::Config(format!(
                "operator.factors[{j}]: lambda and p0 must be finite"
            )));
        }
    }
    if !op.delta.is_finite() || !op.alpha.re.is_finite() || !op.alpha.im.is_finite() {
        return Err(CliError::Config(
            "operator: delta and alpha components must be finite".into(),
        ));
    }
    if config.truncation.bounds.len() != op.factors.len() {
        return Err(CliError::Config(format!(
            "truncation.bounds: got {} bounds for {} factors",
            config.truncation.bounds.len(),
            op.factors.len()
        )));
    }
    if config.truncation.n_t < 8 || config.truncation.n_t % 2 != 0 {
        return Err(CliError::Config(format!(
            "truncation.n_t: must be even and at least 8, got {}",
            config.truncation.n_t
        )));
    }
    if let Some(forcing) = &config.forcing {
        match (&forcing.path, &forcing.inline) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "forcing: give either path or inline, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "forcing: give either path or inline".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

fn trig_from_spec(name: &str, spec: &TrigSpec) -> Result<TrigPoly, CliError> {
    let terms: Vec<(u32, f64, f64)> =
        spec.harmonics.iter().map(|h| (h.freq, h.cos, h.sin)).collect();
    TrigPoly::new(spec.mean, &terms)
        .map_err(|e| CliError::Config(format!("operator.{name}: {e}")))
}

impl EffectiveConfig {
    pub fn model(&self) -> Result<GroupModel, CliError> {
        let op = &self.config.operator;
        let factors = op
            .factors
            .iter()
            .map(|f| match f.kind {
                FactorKind::Circle => GroupFactor::Circle,
                FactorKind::Su2 => GroupFactor::Su2,
            })
            .collect();
        let lambda = op.factors.iter().map(|f| f.lambda).collect();
        let p0 = op.factors.iter().map(|f| f.p0).collect();
        GroupModel::new(factors, lambda, p0)
            .map_err(|e| CliError::Config(format!("operator.factors: {e}")))
    }

    pub fn params(&self) -> Result<VekuaParams, CliError> {
        let op = &self.config.operator;
        let s = trig_from_spec("s", &op.s)?;
        let q = trig_from_spec("q", &op.q)?;
        VekuaParams::new(
            self.model()?,
            op.delta,
            Complex64::new(op.alpha.re, op.alpha.im),
            s,
            q,
        )
        .map_err(CliError::Lib)
    }

    /// Load the forcing pair for a solve; the conjugate side is derived
    /// from the primal field.
    pub fn forcing(&self, model: &GroupModel) -> Result<PairedField, CliError> {
        let forcing = self.config.forcing.as_ref().ok_or_else(|| {
            CliError::Config("forcing required: task solve needs a forcing field".into())
        })?;
        let spec_owned;
        let spec: &FieldSpec = if let Some(inline) = &forcing.inline {
            inline
        } else {
            let rel = forcing.path.as_ref().expect("validated");
            let path = self.config_dir.join(rel);
            let bytes = fs::read(&path).map_err(|e| {
                CliError::Config(format!("cannot read forcing {}: {e}", path.display()))
            })?;
            spec_owned = serde_json::from_slice::<FieldSpec>(&bytes)
                .map_err(|e| CliError::Config(format!("forcing {}: {e}", path.display())))?;
            &spec_owned
        };
        let n_t = self.config.truncation.n_t;
        let mut field =
            CoefficientField::new(model.clone(), self.config.truncation.bounds.clone(), n_t)
                .map_err(CliError::Lib)?;
        for (j, mode_spec) in spec.modes.iter().enumerate() {
            let mode = ModeIndex::new(mode_spec.index.iter().map(|e| e.to_lib()).collect());
            let profile = match (&mode_spec.coeffs, &mode_spec.samples) {
                (Some(coeffs), None) => {
                    let pairs: Vec<(i64, Complex64)> = coeffs
                        .iter()
                        .map(|c| (c.n, Complex64::new(c.re, c.im)))
                        .collect();
                    Profile::Poly(FourierPoly::from_coeffs(&pairs))
                }
                (None, Some(samples)) => Profile::Samples(
                    samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                ),
                _ => {
                    return Err(CliError::Config(format!(
                        "forcing.modes[{j}]: give exactly one of coeffs or samples"
                    )))
                }
            };
            field.insert(mode, profile).map_err(CliError::Lib)?;
        }
        PairedField::from_primal(field).map_err(CliError::Lib)
    }
}
