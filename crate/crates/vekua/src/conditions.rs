//! Executable solvability conditions: global constants, the resonance
//! system, the lambda = 0 case classifier, and the Diophantine small-divisor
//! checks with their phase/denominator equivalence.
//!
//! Global solvability of `P u = f` hinges on the boundary denominators of
//! every mode staying away from zero. Squaring the vanishing condition
//! `rho q0 = +-(s0 + 2 pi i (b + k))` (the `+` branch is `D2 = 0`, the `-`
//! branch is `D1 = 0` after relabeling `k`) and splitting into real and
//! imaginary parts yields the per-mode resonance system in the scalars
//! `(a, b)`:
//!
//! ```text
//! r1 = 2 pi s0 (k + b) + delta a q0^2                 = 0
//! r2 = (2 pi (k + b))^2 + (a q0)^2 - (|A0|^2 - |B0|^2) = 0
//! ```
//!
//! with `A0 = s0 + i delta q0` and `B0 = alpha q0`. A mode is resonant
//! exactly when some integer `k` solves both. [`find_resonances`] solves the
//! system in closed form and cross-checks by brute-force scan over `k`; both
//! paths share one residual predicate, so they agree by construction.
//!
//! When every `lambda_j = 0` the scalars collapse to `a = 0` and
//! [`classify_lambda0`] reproduces the four-way solvability trichotomy: a
//! dominant coupling (`|B0| > |A0|`) is unconditionally solvable, `|alpha| >
//! |delta|` reduces to absence of resonances, `|alpha| < |delta|` with `s0 !=
//! 0` is again unconditional, and `|alpha| < |delta|` with `s0 = 0` needs
//! both no resonances and a Diophantine gap condition because the
//! denominators `|1 - e^{i theta}|` can approach zero along a subsequence of
//! modes. [`diophantine_check`] quantifies that gap in three interchangeable
//! currencies: the phase distance `dist(theta, 2 pi Z)`, the chord
//! `|e^{i theta} - 1|`, and the raw denominators `min(|D1|, |D2|)`;
//! [`dc_prime_equivalence`] pins the two phase forms against each other
//! through `|e^{i theta} - 1|^2 = 2 (1 - cos theta)` and the two-sided bound
//! `(2/pi) d <= |e^{i theta} - 1| <= d`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GroupFactor, ModeIndex, ModeScalars};
use crate::mode::{mode_denominators, rho_branch, VekuaParams};
use crate::profile::TWO_PI;

/// Residual tolerance of the shared resonance-hit predicate; also the
/// near-integrality tolerance for analytically solved `k`.
pub const TOL_RES_CHECK: f64 = 1e-9;

/// Largest denominator recognized when testing drift coefficients for
/// rationality during certification.
pub const CERT_MAX_DENOM: u64 = 64;

/// Largest common phase period enumerated during certification.
pub const CERT_MAX_PERIOD: u64 = 4096;

/// The constants every solvability condition is phrased in.
///
/// `A0 = s0 + i delta q0` and `B0 = alpha q0`; the drift pairing of a mode
/// with scalars `(a, b)` is exposed as [`GlobalConstants::mu_dot_c0`] since
/// the per-factor vector `C0 = 2 pi p0 + i lambda q0` only ever enters
/// through the reduced values `2 pi b + i a q0`.
#[derive(Debug, Clone, Copy)]
pub struct GlobalConstants {
    pub a0: Complex64,
    pub b0: Complex64,
    pub s0: f64,
    pub q0: f64,
}

impl GlobalConstants {
    /// `mu . C0 = 2 pi b + i a q0`.
    pub fn mu_dot_c0(&self, scalars: &ModeScalars) -> Complex64 {
        Complex64::new(TWO_PI * scalars.b, scalars.a * self.q0)
    }

    /// `mu . conj(C0) = 2 pi b - i a q0`.
    pub fn mu_dot_c0_bar(&self, scalars: &ModeScalars) -> Complex64 {
        self.mu_dot_c0(scalars).conj()
    }

    /// `|A0|^2 - |B0|^2`, the right-hand side of the resonance system.
    pub fn gap(&self) -> f64 {
        self.a0.norm_sqr() - self.b0.norm_sqr()
    }
}

/// Evaluate `A0`, `B0`, `s0`, `q0` from the operator data.
pub fn global_constants(params: &VekuaParams) -> GlobalConstants {
    let s0 = params.s0();
    let q0 = params.q0();
    GlobalConstants {
        a0: Complex64::new(s0, params.delta() * q0),
        b0: params.alpha() * q0,
        s0,
        q0,
    }
}

/// One solution of the resonance system: the scalar class `(a, b)` shared by
/// the affected modes, the integer `k`, and the two residuals (both below
/// the hit tolerance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceHit {
    pub a: f64,
    pub b: f64,
    pub k: i64,
    pub r1: f64,
    pub r2: f64,
}

/// Residuals of the resonance system at integer `k` for scalars `(a, b)`.
pub fn resonance_residuals(
    constants: &GlobalConstants,
    scalars: &ModeScalars,
    k: i64,
) -> (f64, f64) {
    let (a, b) = (scalars.a, scalars.b);
    let (s0, q0) = (constants.s0, constants.q0);
    let delta_aq = constants.a0.im * a * q0;
    let kb = k as f64 + b;
    let r1 = TWO_PI * s0 * kb + delta_aq;
    let r2 = (TWO_PI * kb).powi(2) + (a * q0).powi(2) - constants.gap();
    (r1, r2)
}

fn is_hit(constants: &GlobalConstants, scalars: &ModeScalars, k: i64) -> Option<(f64, f64)> {
    let (r1, r2) = resonance_residuals(constants, scalars, k);
    let (a, b) = (scalars.a, scalars.b);
    let (s0, q0) = (constants.s0, constants.q0);
    let kf = k as f64;
    let scale1 = 1.0
        + TWO_PI * s0.abs() * (kf.abs() + b.abs())
        + (constants.a0.im * a * q0).abs();
    let scale2 = 1.0
        + (TWO_PI * (kf.abs() + b.abs())).powi(2)
        + (a * q0).powi(2)
        + constants.gap().abs();
    if r1.abs() <= TOL_RES_CHECK * scale1 && r2.abs() <= TOL_RES_CHECK * scale2 {
        Some((r1, r2))
    } else {
        None
    }
}

/// Closed-form candidate integers for one scalar class: the roots of `r1`
/// (when `s0 != 0`) and of the quadratic `r2` (when its right side is
/// nonnegative), rounded to the nearest integer, plus `round(-b)` for the
/// degenerate overlaps.
pub fn resonance_hits_analytic(
    constants: &GlobalConstants,
    scalars: &ModeScalars,
) -> Vec<ResonanceHit> {
    let (a, b) = (scalars.a, scalars.b);
    let (s0, q0) = (constants.s0, constants.q0);
    let mut candidates: Vec<i64> = vec![round_to_i64(-b)];
    if s0 != 0.0 {
        candidates.push(round_to_i64(-b - constants.a0.im * a * q0 / (TWO_PI * s0)));
    }
    let discriminant = constants.gap() - (a * q0).powi(2);
    if discriminant >= 0.0 {
        let half_width = discriminant.sqrt() / TWO_PI;
        candidates.push(round_to_i64(-b + half_width));
        candidates.push(round_to_i64(-b - half_width));
    }
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .filter_map(|k| is_hit(constants, scalars, k).map(|(r1, r2)| ResonanceHit {
            a,
            b,
            k,
            r1,
            r2,
        }))
        .collect()
}

/// Brute-force scan of `k` in `[-k_bound, k_bound]` with the same hit
/// predicate as the analytic path.
pub fn resonance_hits_bruteforce(
    constants: &GlobalConstants,
    scalars: &ModeScalars,
    k_bound: i64,
) -> Vec<ResonanceHit> {
    (-k_bound..=k_bound)
        .filter_map(|k| is_hit(constants, scalars, k).map(|(r1, r2)| ResonanceHit {
            a: scalars.a,
            b: scalars.b,
            k,
            r1,
            r2,
        }))
        .collect()
}

fn round_to_i64(x: f64) -> i64 {
    x.round().clamp(i64::MIN as f64, i64::MAX as f64) as i64
}

/// Solve the resonance system over a spectrum.
///
/// Hits are reported once per scalar class `(a, b)`: modes sharing the same
/// scalars resonate identically. The analytic roots and a brute-force scan
/// over `|k| <= k_bound` are merged, so a hit beyond the scan bound is still
/// found while the scan guards the algebra.
pub fn find_resonances(
    constants: &GlobalConstants,
    spectrum: &[ModeScalars],
    k_bound: i64,
) -> Vec<ResonanceHit> {
    let mut seen = std::collections::BTreeSet::new();
    let mut hits = Vec::new();
    for scalars in spectrum {
        if !seen.insert((scalars.a.to_bits(), scalars.b.to_bits())) {
            continue;
        }
        let mut class_hits = resonance_hits_analytic(constants, scalars);
        for hit in resonance_hits_bruteforce(constants, scalars, k_bound) {
            if !class_hits.iter().any(|h| h.k == hit.k) {
                class_hits.push(hit);
            }
        }
        hits.extend(class_hits);
    }
    hits.sort_by(|x, y| {
        (x.b, x.a, x.k)
            .partial_cmp(&(y.b, y.a, y.k))
            .expect("scalars are finite")
    });
    hits
}

/// Which small-divisor quantity [`diophantine_check`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DioVariant {
    /// Phase distance `dist(2 pi b -+ q0 omega, 2 pi Z)` with
    /// `omega = sqrt(delta^2 - |alpha|^2)`; requires `|alpha| < |delta|` and
    /// `s0 = 0`.
    PhaseGap,
    /// Chord length `|e^{i (2 pi b -+ q0 omega)} - 1|`, the same gap in the
    /// equivalent exponential form; same preconditions.
    PhaseGapPrime,
    /// The raw boundary denominators `|D1|`, `|D2|`; no preconditions.
    Denominators,
}

/// Per-weight minima of the two measured denominators.
#[derive(Debug, Clone, Copy)]
pub struct DioRow {
    pub weight: f64,
    pub min_d1: f64,
    pub min_d2: f64,
}

impl DioRow {
    pub fn min_value(&self) -> f64 {
        self.min_d1.min(self.min_d2)
    }
}

/// Outcome of a Diophantine check at fixed exponent `M`.
#[derive(Debug, Clone, PartialEq)]
pub enum DioVerdict {
    /// Every tested mode satisfied `value >= weight^{-M}`.
    HoldsUpToTruncation,
    /// A mode broke the bound.
    Violated { witness: ModeIndex, weight: f64, value: f64, bound: f64 },
}

impl DioVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, DioVerdict::HoldsUpToTruncation)
    }
}

/// Report of one Diophantine check.
///
/// `rows` hold the per-weight minima over all modes of that weight,
/// ascending; `m_hat` is the least-squares slope exponent of
/// `log min` against `log weight` (values behave like `weight^{-m_hat}`),
/// absent when fewer than two positive bins exist. `certified` upgrades
/// "holds up to the truncation" to "holds for the whole group": it is set
/// when the drift coefficients are recognized small-denominator rationals,
/// so the phases only take finitely many values and all of them clear the
/// bound (phase variants only).
#[derive(Debug, Clone)]
pub struct DiophantineReport {
    pub variant: DioVariant,
    pub m: f64,
    /// Modes with weight below this are exempt (`max(M, 1)`).
    pub threshold: f64,
    /// Largest weight present in the tested spectrum.
    pub max_weight: f64,
    pub rows: Vec<DioRow>,
    pub m_hat: Option<f64>,
    pub verdict: DioVerdict,
    pub certified: bool,
}

fn phase_gap_omega(params: &VekuaParams) -> Result<f64> {
    let delta = params.delta().abs();
    let alpha = params.alpha().norm();
    if alpha >= delta {
        return Err(Error::InvalidInput(format!(
            "phase-gap check needs |alpha| < |delta| (got |alpha| = {alpha}, |delta| = {delta})"
        )));
    }
    if params.s0().abs() > 1e-14 {
        return Err(Error::InvalidInput(format!(
            "phase-gap check needs s0 = 0 (got s0 = {})",
            params.s0()
        )));
    }
    Ok((params.delta().powi(2) - params.alpha().norm_sqr()).sqrt())
}

/// Distance from `theta` to the nearest multiple of `2 pi`.
pub fn phase_distance(theta: f64) -> f64 {
    let r = theta.rem_euclid(TWO_PI);
    r.min(TWO_PI - r)
}

/// Chord length `|e^{i theta} - 1| = 2 |sin(theta / 2)|`.
pub fn chord_length(theta: f64) -> f64 {
    2.0 * (0.5 * theta).sin().abs()
}

/// The pair of measured quantities for one mode under a variant.
fn measured_pair(
    params: &VekuaParams,
    variant: DioVariant,
    omega: f64,
    scalars: &ModeScalars,
) -> (f64, f64) {
    let q0 = params.q0();
    match variant {
        DioVariant::PhaseGap => {
            let minus = -TWO_PI * scalars.b - q0 * omega;
            let plus = TWO_PI * scalars.b - q0 * omega;
            (phase_distance(minus), phase_distance(plus))
        }
        DioVariant::PhaseGapPrime => {
            let minus = -TWO_PI * scalars.b - q0 * omega;
            let plus = TWO_PI * scalars.b - q0 * omega;
            (chord_length(minus), chord_length(plus))
        }
        DioVariant::Denominators => {
            let rho = rho_branch(scalars.a, params.delta(), params.alpha());
            let (d1, d2) = mode_denominators(rho, scalars.b, params.s0(), q0);
            (d1.norm(), d2.norm())
        }
    }
}

/// Check a small-divisor lower bound `value >= weight^{-M}` over the
/// spectrum.
pub fn diophantine_check(
    params: &VekuaParams,
    spectrum: &[(ModeIndex, ModeScalars)],
    variant: DioVariant,
    m: f64,
) -> Result<DiophantineReport> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidInput(format!("exponent M must be positive, got {m}")));
    }
    let omega = match variant {
        DioVariant::Denominators => 0.0,
        _ => phase_gap_omega(params)?,
    };
    let threshold = m.max(1.0);
    let mut rows: std::collections::BTreeMap<u64, DioRow> = std::collections::BTreeMap::new();
    let mut verdict = DioVerdict::HoldsUpToTruncation;
    let mut worst_margin = f64::INFINITY;
    let mut max_weight: f64 = 0.0;
    for (mode, scalars) in spectrum {
        let w = scalars.weight;
        max_weight = max_weight.max(w);
        if w < threshold {
            continue;
        }
        let (v1, v2) = measured_pair(params, variant, omega, scalars);
        let row = rows.entry(w.to_bits()).or_insert(DioRow {
            weight: w,
            min_d1: f64::INFINITY,
            min_d2: f64::INFINITY,
        });
        row.min_d1 = row.min_d1.min(v1);
        row.min_d2 = row.min_d2.min(v2);
        let bound = w.powf(-m);
        let value = v1.min(v2);
        if value < bound && value - bound < worst_margin {
            worst_margin = value - bound;
            verdict = DioVerdict::Violated { witness: mode.clone(), weight: w, value, bound };
        }
    }
    let rows: Vec<DioRow> = rows.into_values().collect();
    let m_hat = fit_exponent(&rows);
    let certified = verdict.holds()
        && match variant {
            DioVariant::PhaseGap => certify_phase(params, omega, m, threshold, phase_distance),
            DioVariant::PhaseGapPrime => certify_phase(params, omega, m, threshold, chord_length),
            DioVariant::Denominators => false,
        };
    Ok(DiophantineReport {
        variant,
        m,
        threshold,
        max_weight,
        rows,
        m_hat,
        verdict,
        certified,
    })
}

/// Least-squares exponent of `min value ~ weight^{-m_hat}` over positive
/// bins.
fn fit_exponent(rows: &[DioRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.min_value() > 0.0 && r.weight > 0.0)
        .map(|r| (r.weight.ln(), r.min_value().ln()))
        .collect();
    let distinct = {
        let mut xs: Vec<u64> = pts.iter().map(|p| p.0.to_bits()).collect();
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some(-((n * sxy - sx * sy) / denom))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Recognize `x` as a fraction with denominator at most [`CERT_MAX_DENOM`].
fn small_denominator(x: f64) -> Option<u64> {
    for d in 1..=CERT_MAX_DENOM {
        let scaled = x * d as f64;
        if (scaled - scaled.round()).abs() <= 1e-9 * (1.0 + scaled.abs()) {
            return Some(d);
        }
    }
    None
}

/// Finite certification of a phase-variant bound.
///
/// When every drift coefficient `p0_j` is a small-denominator rational, the
/// attainable values of `b` modulo 1 form the cyclic group generated by the
/// `p0_j` (halved on SU(2) factors, where `mu` ranges over half-integers),
/// so the phases `+-2 pi b - q0 omega` take finitely many values modulo
/// `2 pi`. If the measured quantity clears `threshold^{-M}` on every one of
/// them, the bound holds for the entire group, not just the truncation.
fn certify_phase(
    params: &VekuaParams,
    omega: f64,
    m: f64,
    threshold: f64,
    quantity: fn(f64) -> f64,
) -> bool {
    let mut period: u64 = 1;
    let mut steps: Vec<u64> = Vec::new();
    for (j, factor) in params.group().factors().iter().enumerate() {
        let p0 = params.group().p0()[j];
        let Some(denom) = small_denominator(p0) else { return false };
        let denom = match factor {
            GroupFactor::Circle => denom,
            GroupFactor::Su2 => denom * 2,
        };
        let Some(next) = lcm(period, denom) else { return false };
        if next > CERT_MAX_PERIOD {
            return false;
        }
        period = next;
    }
    for (j, factor) in params.group().factors().iter().enumerate() {
        let p0 = params.group().p0()[j];
        let scale = match factor {
            GroupFactor::Circle => period as f64,
            GroupFactor::Su2 => period as f64 / 2.0,
        };
        steps.push((p0 * scale).round().rem_euclid(period as f64) as u64);
    }
    let generator = steps.iter().fold(period, |g, &s| gcd(g, s));
    let bound = threshold.powf(-m);
    let count = period / generator.max(1);
    for i in 0..count {
        let b_frac = (i * generator) as f64 / period as f64;
        let v = quantity(TWO_PI * b_frac - params.q0() * omega)
            .min(quantity(-TWO_PI * b_frac - params.q0() * omega));
        if v < bound {
            return false;
        }
    }
    true
}

/// Which of the four solvability regimes the constants fall in
/// (`lambda = 0` only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda0Case {
    /// `|B0| > |A0|`: solvable, no further conditions.
    Case1,
    /// `|B0| <= |A0|`, `|alpha| > |delta|`: solvable iff no resonance.
    Case2,
    /// `|alpha| < |delta|`, `s0 != 0`: solvable, no further conditions.
    Case3,
    /// `|alpha| < |delta|`, `s0 = 0`: solvable iff no resonance and the
    /// phase gap condition holds.
    Case4,
}

/// Classifier outcome with the evidence that produced it.
#[derive(Debug, Clone)]
pub struct Lambda0Verdict {
    pub case: Lambda0Case,
    pub solvable: bool,
    pub constants: GlobalConstants,
    /// Resonance hits found (cases 2 and 4; empty otherwise).
    pub hits: Vec<ResonanceHit>,
    /// Phase-gap report (case 4 only): the first exponent on a small ladder
    /// for which the bound holds, or the last attempt when none does.
    pub dc: Option<DiophantineReport>,
}

/// Exponent ladder tried by the case 4 classifier; the condition is an
/// existential over `M`, so any holding rung settles it.
pub const DC_LADDER: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Decide solvability for `lambda = 0` from the four-case trichotomy.
pub fn classify_lambda0(
    params: &VekuaParams,
    spectrum: &[(ModeIndex, ModeScalars)],
    k_bound: i64,
) -> Result<Lambda0Verdict> {
    if !params.group().lambda_is_zero() {
        return Err(Error::LambdaNotZero);
    }
    let alpha_abs = params.alpha().norm();
    let delta_abs = params.delta().abs();
    if (alpha_abs - delta_abs).abs() <= 1e-12 * alpha_abs.max(delta_abs) {
        return Err(Error::HypothesisViolation { value: alpha_abs - delta_abs });
    }
    let constants = global_constants(params);
    let scalars: Vec<ModeScalars> = spectrum.iter().map(|(_, s)| *s).collect();
    if constants.b0.norm() > constants.a0.norm() {
        return Ok(Lambda0Verdict {
            case: Lambda0Case::Case1,
            solvable: true,
            constants,
            hits: Vec::new(),
            dc: None,
        });
    }
    if alpha_abs > delta_abs {
        let hits = find_resonances(&constants, &scalars, k_bound);
        return Ok(Lambda0Verdict {
            case: Lambda0Case::Case2,
            solvable: hits.is_empty(),
            constants,
            hits,
            dc: None,
        });
    }
    if constants.s0.abs() > 1e-14 {
        return Ok(Lambda0Verdict {
            case: Lambda0Case::Case3,
            solvable: true,
            constants,
            hits: Vec::new(),
            dc: None,
        });
    }
    let hits = find_resonances(&constants, &scalars, k_bound);
    let mut dc = None;
    for m in DC_LADDER {
        let report = diophantine_check(params, spectrum, DioVariant::PhaseGap, m)?;
        let holds = report.verdict.holds();
        dc = Some(report);
        if holds {
            break;
        }
    }
    let dc_holds = dc.as_ref().map(|r| r.verdict.holds()).unwrap_or(false);
    Ok(Lambda0Verdict {
        case: Lambda0Case::Case4,
        solvable: hits.is_empty() && dc_holds,
        constants,
        hits,
        dc,
    })
}

/// Side-by-side phase-gap check in both currencies of the distance/chord
/// equivalence, with the comparability evidence.
#[derive(Debug, Clone)]
pub struct DcPrimeReport {
    pub dc: DiophantineReport,
    pub dc_prime: DiophantineReport,
    /// Max over modes of `| |e^{i theta} - 1|^2 - 2 (1 - cos theta) |`.
    pub identity_residual_max: f64,
    /// Min over modes of `chord - (2/pi) dist` (nonnegative up to roundoff).
    pub lower_margin_min: f64,
    /// Min over modes of `dist - chord` (nonnegative up to roundoff).
    pub upper_margin_min: f64,
}

/// Run [`diophantine_check`] in both phase variants and verify the pointwise
/// comparability `(2/pi) dist(theta, 2 pi Z) <= |e^{i theta} - 1| <=
/// dist(theta, 2 pi Z)` together with the chord identity.
pub fn dc_prime_equivalence(
    params: &VekuaParams,
    spectrum: &[(ModeIndex, ModeScalars)],
    m: f64,
) -> Result<DcPrimeReport> {
    let dc = diophantine_check(params, spectrum, DioVariant::PhaseGap, m)?;
    let dc_prime = diophantine_check(params, spectrum, DioVariant::PhaseGapPrime, m)?;
    let omega = phase_gap_omega(params)?;
    let q0 = params.q0();
    let mut identity_residual_max: f64 = 0.0;
    let mut lower_margin_min = f64::INFINITY;
    let mut upper_margin_min = f64::INFINITY;
    for (_, scalars) in spectrum {
        for theta in [
            TWO_PI * scalars.b - q0 * omega,
            -TWO_PI * scalars.b - q0 * omega,
        ] {
            let d = phase_distance(theta);
            let e = chord_length(theta);
            let identity = (e * e - 2.0 * (1.0 - theta.cos())).abs();
            identity_residual_max = identity_residual_max.max(identity);
            lower_margin_min = lower_margin_min.min(e - d * 2.0 / std::f64::consts::PI);
            upper_margin_min = upper_margin_min.min(d - e);
        }
    }
    Ok(DcPrimeReport {
        dc,
        dc_prime,
        identity_residual_max,
        lower_margin_min,
        upper_margin_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{spectrum, GroupModel};
    use crate::profile::TrigPoly;

    fn circle_params(
        lambda: f64,
        p0: f64,
        delta: f64,
        alpha: Complex64,
        s_mean: f64,
        q: TrigPoly,
    ) -> VekuaParams {
        let model =
            GroupModel::new(vec![GroupFactor::Circle], vec![lambda], vec![p0]).unwrap();
        VekuaParams::new(model, delta, alpha, TrigPoly::constant(s_mean), q).unwrap()
    }

    fn circle_spectrum(params: &VekuaParams, bound: u32) -> Vec<(ModeIndex, ModeScalars)> {
        spectrum(params.group(), &[bound]).unwrap()
    }

    #[test]
    fn global_constants_pinned() {
        // s = 0, delta = 2, q = 1, alpha = 1: A0 = 4 pi i, B0 = 2 pi.
        let params = circle_params(
            0.0,
            0.0,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        assert_eq!(c.a0, Complex64::new(0.0, 2.0 * TWO_PI));
        assert_eq!(c.b0, Complex64::new(TWO_PI, 0.0));
        assert_eq!(c.q0, TWO_PI);
        // Mean 1/(2 pi) integrates to s0 = 1; delta = 0 makes A0 real.
        let params = circle_params(
            0.0,
            0.0,
            0.0,
            Complex64::new(1.0, 0.0),
            1.0 / TWO_PI,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        assert!((c.a0 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constants_pair_with_mode_scalars() {
        let params = circle_params(
            0.5,
            0.3,
            1.0,
            Complex64::new(2.0, 0.0),
            0.2,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        let sc = ModeScalars { a: 1.5, b: 0.9, weight: 2.0 };
        let paired = c.mu_dot_c0(&sc);
        assert!((paired - Complex64::new(TWO_PI * 0.9, 1.5 * TWO_PI)).norm() < 1e-12);
        assert_eq!(c.mu_dot_c0_bar(&sc), paired.conj());
    }

    #[test]
    fn resonance_witness_k_plus_minus_one() {
        // delta = sqrt(2), alpha = 1, q0 = 2 pi, s0 = 0, p0 = 0, lambda = 0:
        // every mode has (a, b) = (0, 0) and (2 pi k)^2 = 4 pi^2, so k = +-1.
        let params = circle_params(
            0.0,
            0.0,
            2f64.sqrt(),
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        let spec = circle_spectrum(&params, 3);
        let scalars: Vec<ModeScalars> = spec.iter().map(|(_, s)| *s).collect();
        let hits = find_resonances(&c, &scalars, 50);
        let ks: Vec<i64> = hits.iter().map(|h| h.k).collect();
        assert_eq!(ks, vec![-1, 1]);
        for h in &hits {
            assert_eq!((h.a, h.b), (0.0, 0.0));
            assert!(h.r1.abs() < 1e-12 && h.r2.abs() < 1e-9);
        }
    }

    #[test]
    fn dominant_coupling_never_resonates() {
        // |B0| > |A0| makes the right side of r2 = 0 negative.
        let params = circle_params(
            0.0,
            0.7,
            0.5,
            Complex64::new(2.0, 1.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        assert!(c.b0.norm() > c.a0.norm());
        let scalars: Vec<ModeScalars> =
            circle_spectrum(&params, 10).iter().map(|(_, s)| *s).collect();
        assert!(find_resonances(&c, &scalars, 50).is_empty());
    }

    #[test]
    fn twist_locked_resonance_hits_every_integer_b() {
        // s0 = 2 pi (= |alpha| q0 so |A0| = |B0|), delta = 0, p0 = 1: r1
        // forces k = -b and r2 collapses to 0, so every integer b hits.
        let params = circle_params(
            0.0,
            1.0,
            0.0,
            Complex64::new(1.0, 0.0),
            1.0,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        assert!((c.a0.norm() - c.b0.norm()).abs() < 1e-12);
        let sc = ModeScalars { a: 0.0, b: 1.0, weight: 2f64.sqrt() };
        let hits = resonance_hits_analytic(&c, &sc);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].k, -1);
    }

    #[test]
    fn analytic_and_bruteforce_hit_sets_agree() {
        // Sweep several parameter mixes; within the scan bound the two paths
        // must return identical k sets for every scalar class.
        let cases = [
            (0.0, 0.0, 2f64.sqrt(), Complex64::new(1.0, 0.0), 0.0),
            (0.4, 0.3, 1.5, Complex64::new(0.8, 0.3), 0.1),
            (0.0, 1.0, 0.0, Complex64::new(1.0, 0.0), 1.0),
            (1.0, 0.25, 0.5, Complex64::new(2.0, 0.0), -0.2),
            (0.0, 0.5, 2.0, Complex64::new(0.5, 0.5), 0.0),
        ];
        for (lambda, p0, delta, alpha, s_mean) in cases {
            let params =
                circle_params(lambda, p0, delta, alpha, s_mean, TrigPoly::constant(1.0));
            let c = global_constants(&params);
            for (_, sc) in circle_spectrum(&params, 6) {
                let analytic: Vec<i64> = resonance_hits_analytic(&c, &sc)
                    .into_iter()
                    .map(|h| h.k)
                    .filter(|k| k.abs() <= 40)
                    .collect();
                let brute: Vec<i64> = resonance_hits_bruteforce(&c, &sc, 40)
                    .into_iter()
                    .map(|h| h.k)
                    .collect();
                assert_eq!(analytic, brute, "scalars {sc:?}");
            }
        }
    }

    #[test]
    fn conjugate_spectrum_negates_hits() {
        let params = circle_params(
            0.3,
            0.5,
            1.2,
            Complex64::new(0.6, 0.2),
            0.05,
            TrigPoly::constant(1.0),
        );
        let c = global_constants(&params);
        for (_, sc) in circle_spectrum(&params, 8) {
            let neg = ModeScalars { a: -sc.a, b: -sc.b, weight: sc.weight };
            let hits: Vec<i64> =
                resonance_hits_bruteforce(&c, &sc, 30).into_iter().map(|h| h.k).collect();
            let neg_hits: Vec<i64> = resonance_hits_bruteforce(&c, &neg, 30)
                .into_iter()
                .map(|h| -h.k)
                .rev()
                .collect();
            assert_eq!(hits, neg_hits);
        }
    }

    #[test]
    fn classifier_four_cases_pinned() {
        let q = TrigPoly::constant(1.0);
        // Case 1: alpha = 2, delta = 0, s = 0 gives B0 = 4 pi > 0 = A0.
        let p = circle_params(0.0, 0.3, 0.0, Complex64::new(2.0, 0.0), 0.0, q.clone());
        let v = classify_lambda0(&p, &circle_spectrum(&p, 4), 50).unwrap();
        assert_eq!(v.case, Lambda0Case::Case1);
        assert!(v.solvable);
        // Case 2: |alpha| > |delta|, |B0| <= |A0| via large s0.
        let p = circle_params(0.0, 0.3, 0.5, Complex64::new(1.0, 0.0), 1.5, q.clone());
        let v = classify_lambda0(&p, &circle_spectrum(&p, 4), 50).unwrap();
        assert_eq!(v.case, Lambda0Case::Case2);
        assert!(v.solvable && v.hits.is_empty());
        // Case 3: |alpha| < |delta| and s0 = 1 != 0.
        let p = circle_params(
            0.0,
            0.3,
            2.0,
            Complex64::new(1.0, 0.0),
            1.0 / TWO_PI,
            q.clone(),
        );
        let v = classify_lambda0(&p, &circle_spectrum(&p, 4), 50).unwrap();
        assert_eq!(v.case, Lambda0Case::Case3);
        assert!(v.solvable);
        // Case 4: |alpha| < |delta|, s0 = 0, irrational gap: solvable with a
        // certificate.
        let p = circle_params(0.0, 0.0, 2.0, Complex64::new(1.0, 0.0), 0.0, q.clone());
        let v = classify_lambda0(&p, &circle_spectrum(&p, 4), 50).unwrap();
        assert_eq!(v.case, Lambda0Case::Case4);
        assert!(v.solvable);
        assert!(v.dc.as_ref().unwrap().certified);
        // Hypothesis violation: |alpha| = |delta|.
        let p = circle_params(0.0, 0.3, 1.0, Complex64::new(1.0, 0.0), 0.0, q);
        match classify_lambda0(&p, &circle_spectrum(&p, 4), 50) {
            Err(Error::HypothesisViolation { .. }) => {}
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn classifier_case_four_detects_resonance() {
        // The k = +-1 witness parameters land in case 4 and are not solvable.
        let p = circle_params(
            0.0,
            0.0,
            2f64.sqrt(),
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let v = classify_lambda0(&p, &circle_spectrum(&p, 4), 50).unwrap();
        assert_eq!(v.case, Lambda0Case::Case4);
        assert!(!v.solvable);
        assert_eq!(v.hits.len(), 2);
    }

    #[test]
    fn classifier_rejects_nonzero_lambda() {
        let p = circle_params(
            0.5,
            0.3,
            0.0,
            Complex64::new(2.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        match classify_lambda0(&p, &circle_spectrum(&p, 4), 50) {
            Err(Error::LambdaNotZero) => {}
            other => panic!("expected lambda rejection, got {other:?}"),
        }
    }

    #[test]
    fn phase_gap_irrational_distance_pinned() {
        // delta = 2, alpha = 1: omega = sqrt(3), q0 omega = 2 pi sqrt(3),
        // p0 = 0 keeps b = 0, so the gap is 2 pi (2 - sqrt(3)) ~ 1.684 at
        // every mode; the check holds and certifies.
        let p = circle_params(
            0.0,
            0.0,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 12);
        let report = diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).unwrap();
        assert!(report.verdict.holds());
        assert!(report.certified);
        let expected = TWO_PI * (2.0 - 3f64.sqrt());
        for row in &report.rows {
            assert!((row.min_value() - expected).abs() < 1e-9);
        }
        // Brute-force the nearest-multiple search as an oracle for the
        // distance itself.
        let theta: f64 = -TWO_PI * 3f64.sqrt();
        let scan = (-1_000_000i64..=1_000_000)
            .step_by(250_000)
            .map(|k| (theta - TWO_PI * k as f64).abs())
            .fold(f64::INFINITY, f64::min)
            .min(
                (-4i64..=4)
                    .map(|k| (theta - TWO_PI * k as f64).abs())
                    .fold(f64::INFINITY, f64::min),
            );
        assert!((phase_distance(theta) - scan).abs() < 1e-9);
    }

    #[test]
    fn phase_gap_integer_drift_violated() {
        // p0 = 1, delta = sqrt(2), alpha = 1: omega = 1, q0 omega = 2 pi, so
        // the mode b = 1 gives phase 2 pi - 2 pi = 0 exactly.
        let p = circle_params(
            0.0,
            1.0,
            2f64.sqrt(),
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 6);
        let report = diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).unwrap();
        match &report.verdict {
            DioVerdict::Violated { value, .. } => assert_eq!(*value, 0.0),
            other => panic!("expected violation, got {other:?}"),
        }
        assert!(!report.certified);
    }

    #[test]
    fn denominators_variant_uniform_for_real_rho() {
        // s0 != 0 and |alpha| > |delta|: rho is real positive, so |D1| >=
        // |e^{-rho q0} - e^{s0}| is uniformly positive and the check holds;
        // with p0 = 0 every mode shares b = 0 and the rows are exactly flat.
        let p = circle_params(
            0.0,
            0.0,
            0.5,
            Complex64::new(1.5, 0.0),
            0.5,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 100);
        let report = diophantine_check(&p, &spec, DioVariant::Denominators, 2.0).unwrap();
        assert!(report.verdict.holds());
        let first = report.rows.first().unwrap().min_value();
        for row in &report.rows {
            assert!((row.min_value() - first).abs() < 1e-9, "rows should be flat");
        }
    }

    #[test]
    fn diophantine_monotone_in_exponent() {
        // A holding bound keeps holding when M grows (threshold rises and
        // the bound weakens together).
        let p = circle_params(
            0.0,
            0.5,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 20);
        let mut previous_holds = false;
        for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let holds = diophantine_check(&p, &spec, DioVariant::PhaseGap, m)
                .unwrap()
                .verdict
                .holds();
            assert!(!previous_holds || holds, "verdict regressed at M = {m}");
            previous_holds = holds;
        }
    }

    #[test]
    fn phase_gap_requires_preconditions() {
        let p = circle_params(
            0.0,
            0.0,
            0.5,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 4);
        assert!(diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).is_err());
        let p = circle_params(
            0.0,
            0.0,
            2.0,
            Complex64::new(1.0, 0.0),
            0.3,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 4);
        assert!(diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).is_err());
    }

    #[test]
    fn chord_identity_and_comparability() {
        // 2 (1 - cos t) = |e^{it} - 1|^2 and (2/pi) d <= chord <= d across
        // the fundamental domain, with equality at t = pi: chord 2, d = pi.
        let mut t = -std::f64::consts::PI + 1e-6;
        while t <= std::f64::consts::PI {
            let e = chord_length(t);
            let d = phase_distance(t);
            assert!((e * e - 2.0 * (1.0 - t.cos())).abs() < 1e-12);
            assert!(e <= d + 1e-12);
            assert!(e >= 2.0 / std::f64::consts::PI * d - 1e-12);
            t += 0.0137;
        }
        assert!((chord_length(std::f64::consts::PI) - 2.0).abs() < 1e-12);
        assert!((phase_distance(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn dc_prime_pairs_with_dc() {
        let p = circle_params(
            0.0,
            0.5,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 16);
        let paired = dc_prime_equivalence(&p, &spec, 2.0).unwrap();
        assert!(paired.identity_residual_max < 1e-12);
        assert!(paired.lower_margin_min > -1e-12);
        assert!(paired.upper_margin_min > -1e-12);
        // chord <= dist: the chord form implies the distance form at the
        // same exponent.
        if paired.dc_prime.verdict.holds() {
            assert!(paired.dc.verdict.holds());
        }
        // dist >= bound implies chord >= (2/pi) bound >= weight^{-(M+1)}
        // once weight >= pi/2, which the M+1 threshold guarantees.
        if paired.dc.verdict.holds() {
            let bumped =
                diophantine_check(&p, &spec, DioVariant::PhaseGapPrime, 3.0).unwrap();
            assert!(bumped.verdict.holds());
        }
    }

    #[test]
    fn exponent_fit_recovers_power_law() {
        let rows: Vec<DioRow> = (1..=8)
            .map(|i| {
                let w = i as f64;
                DioRow { weight: w, min_d1: w.powf(-2.5), min_d2: 1.0 }
            })
            .collect();
        let m_hat = fit_exponent(&rows).unwrap();
        assert!((m_hat - 2.5).abs() < 1e-10);
    }

    #[test]
    fn certification_enumerates_rational_drift() {
        // p0 = 1/3: b takes residues {0, 1/3, 2/3} mod 1; omega = sqrt(3)
        // keeps every phase away from 2 pi Z, so the check certifies.
        let p = circle_params(
            0.0,
            1.0 / 3.0,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 9);
        let report = diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).unwrap();
        assert!(report.verdict.holds());
        assert!(report.certified);
        // An irrational drift cannot be certified even though no violation
        // shows up at this truncation.
        let p = circle_params(
            0.0,
            std::f64::consts::SQRT_2 / 2.0,
            2.0,
            Complex64::new(1.0, 0.0),
            0.0,
            TrigPoly::constant(1.0),
        );
        let spec = circle_spectrum(&p, 9);
        let report = diophantine_check(&p, &spec, DioVariant::PhaseGap, 2.0).unwrap();
        assert!(!report.certified);
    }
}
