//! The group side of the problem: mode enumeration and per-mode scalars.
//!
//! The spatial domain is a finite product of circle and SU(2) factors. The
//! vector field on each factor is normalized so its symbol is diagonal on
//! matrix coefficients: on the circle the frequency `k` contributes `mu = k`;
//! on SU(2) the coefficient row index `m` of the spin-`l` representation
//! contributes `mu = m` (half-integers stored doubled). Everything downstream
//! needs only three scalars per mode:
//!
//! * `a = sum_j lambda_j mu_j` (imaginary drift),
//! * `b = sum_j p0_j mu_j` (real drift),
//! * `weight = (1 + sum_j nu_j)^{1/2}` with `nu = k^2` resp. `l(l+1)`.
//!
//! All `mu` arithmetic happens on (half-)integers before any float conversion,
//! so equal modes always produce bitwise-equal scalars.

use crate::error::{Error, Result};

/// Kind of one factor of the product group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFactor {
    Circle,
    Su2,
}

/// The product group together with the per-factor drift coefficients
/// `lambda_j` (imaginary part) and `p0_j` (real part).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    factors: Vec<GroupFactor>,
    lambda: Vec<f64>,
    p0: Vec<f64>,
}

impl GroupModel {
    pub fn new(factors: Vec<GroupFactor>, lambda: Vec<f64>, p0: Vec<f64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("group model needs at least one factor".into()));
        }
        if lambda.len() != factors.len() || p0.len() != factors.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient vectors must match the {} factors (lambda: {}, p0: {})",
                factors.len(),
                lambda.len(),
                p0.len()
            )));
        }
        if !lambda.iter().chain(p0.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("lambda and p0 must be finite".into()));
        }
        Ok(GroupModel { factors, lambda, p0 })
    }

    pub fn factors(&self) -> &[GroupFactor] {
        &self.factors
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    /// True when every `lambda_j` is exactly zero (the classifier's scope).
    pub fn lambda_is_zero(&self) -> bool {
        self.lambda.iter().all(|&x| x == 0.0)
    }
}

/// Index of one factor's representation entry.
///
/// Circle: the frequency `k`. SU(2): the spin and matrix position, all doubled
/// so half-integers stay integers (`two_l >= 0`, `|two_m|, |two_n| <= two_l`,
/// same parity as `two_l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorIndex {
    Circle { k: i64 },
    Su2 { two_l: i64, two_m: i64, two_n: i64 },
}

impl FactorIndex {
    /// The diagonal symbol entry of this factor's vector field.
    pub fn mu(&self) -> f64 {
        match *self {
            FactorIndex::Circle { k } => k as f64,
            FactorIndex::Su2 { two_m, .. } => two_m as f64 / 2.0,
        }
    }

    /// Casimir eigenvalue `nu`: `k^2` on the circle, `l(l+1)` on SU(2).
    pub fn nu(&self) -> f64 {
        match *self {
            FactorIndex::Circle { k } => (k * k) as f64,
            FactorIndex::Su2 { two_l, .. } => (two_l * (two_l + 2)) as f64 / 4.0,
        }
    }

    fn check(&self, factor: GroupFactor) -> Result<()> {
        match (*self, factor) {
            (FactorIndex::Circle { .. }, GroupFactor::Circle) => Ok(()),
            (FactorIndex::Su2 { two_l, two_m, two_n }, GroupFactor::Su2) => {
                if two_l < 0 {
                    return Err(Error::InadmissibleMode(format!("two_l = {two_l} < 0")));
                }
                for (name, v) in [("two_m", two_m), ("two_n", two_n)] {
                    if v.abs() > two_l {
                        return Err(Error::InadmissibleMode(format!(
                            "|{name}| = {} exceeds two_l = {two_l}",
                            v.abs()
                        )));
                    }
                    if (v - two_l) % 2 != 0 {
                        return Err(Error::InadmissibleMode(format!(
                            "{name} = {v} has wrong parity for two_l = {two_l}"
                        )));
                    }
                }
                Ok(())
            }
            (idx, factor) => {
                Err(Error::InadmissibleMode(format!("index {idx:?} does not fit factor {factor:?}")))
            }
        }
    }
}

/// A full mode of the product group: one [`FactorIndex`] per factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    entries: Vec<FactorIndex>,
}

impl ModeIndex {
    pub fn new(entries: Vec<FactorIndex>) -> Self {
        ModeIndex { entries }
    }

    pub fn entries(&self) -> &[FactorIndex] {
        &self.entries
    }

    /// Per-factor symbol entries.
    pub fn mus(&self) -> Vec<f64> {
        self.entries.iter().map(FactorIndex::mu).collect()
    }

    /// Unweighted sum of the per-factor symbol entries. This is the multiplier
    /// frequency used when one oscillatory drift profile is shared by all
    /// factors.
    pub fn mu_sum(&self) -> f64 {
        self.entries.iter().map(FactorIndex::mu).sum()
    }

    /// Validate this index against a model.
    pub fn check_against(&self, model: &GroupModel) -> Result<()> {
        if self.entries.len() != model.n_factors() {
            return Err(Error::InadmissibleMode(format!(
                "mode has {} entries but the model has {} factors",
                self.entries.len(),
                model.n_factors()
            )));
        }
        for (idx, &factor) in self.entries.iter().zip(model.factors()) {
            idx.check(factor)?;
        }
        Ok(())
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match e {
                FactorIndex::Circle { k } => write!(f, "k={k}")?,
                FactorIndex::Su2 { two_l, two_m, two_n } => {
                    write!(f, "2l={two_l},2m={two_m},2n={two_n}")?
                }
            }
        }
        write!(f, ")")
    }
}

/// The three scalars the per-mode analysis consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeScalars {
    /// `sum_j lambda_j mu_j`.
    pub a: f64,
    /// `sum_j p0_j mu_j`.
    pub b: f64,
    /// `(1 + sum_j nu_j)^{1/2} >= 1`.
    pub weight: f64,
}

/// Enumerate all modes with per-factor bounds, in lexicographic order.
///
/// For a circle factor the bound `B` keeps `|k| <= B`; for an SU(2) factor it
/// keeps `two_l <= B`. The output is deterministic and closed under
/// conjugation (every bound is symmetric).
pub fn enumerate_modes(model: &GroupModel, bounds: &[u32]) -> Result<Vec<ModeIndex>> {
    if bounds.len() != model.n_factors() {
        return Err(Error::InvalidInput(format!(
            "got {} truncation bounds for {} factors",
            bounds.len(),
            model.n_factors()
        )));
    }
    let per_factor: Vec<Vec<FactorIndex>> = model
        .factors()
        .iter()
        .zip(bounds)
        .map(|(&factor, &bound)| {
            let mut list = Vec::new();
            match factor {
                GroupFactor::Circle => {
                    let b = bound as i64;
                    for k in -b..=b {
                        list.push(FactorIndex::Circle { k });
                    }
                }
                GroupFactor::Su2 => {
                    for two_l in 0..=bound as i64 {
                        let mut two_m = -two_l;
                        while two_m <= two_l {
                            let mut two_n = -two_l;
                            while two_n <= two_l {
                                list.push(FactorIndex::Su2 { two_l, two_m, two_n });
                                two_n += 2;
                            }
                            two_m += 2;
                        }
                    }
                }
            }
            list
        })
        .collect();

    let mut modes = Vec::new();
    let mut cursor = vec![0usize; per_factor.len()];
    loop {
        modes.push(ModeIndex::new(
            cursor.iter().zip(&per_factor).map(|(&i, list)| list[i]).collect(),
        ));
        // Odometer increment, last factor fastest.
        let mut pos = per_factor.len();
        loop {
            if pos == 0 {
                return Ok(modes);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < per_factor[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Compute the drift scalars and the weight of one mode.
pub fn mode_scalars(model: &GroupModel, mode: &ModeIndex) -> Result<ModeScalars> {
    mode.check_against(model)?;
    let mut a = 0.0;
    let mut b = 0.0;
    let mut nu_sum = 0.0;
    for (j, idx) in mode.entries().iter().enumerate() {
        let mu = idx.mu();
        a += model.lambda()[j] * mu;
        b += model.p0()[j] * mu;
        nu_sum += idx.nu();
    }
    Ok(ModeScalars { a, b, weight: (1.0 + nu_sum).sqrt() })
}

/// The conjugate partner of a mode and the unit phase relating their basis
/// matrix coefficients.
///
/// Conjugating a matrix coefficient flips signs of all indices: on the circle
/// `conj(e^{ikx}) = e^{-ikx}` with phase `1`; on SU(2) the representation
/// matrices obey `conj(t^l_{nm}) = (-1)^{m-n} t^l_{-n,-m}`, so the mode
/// `(l, m, n)` pairs with `(l, -m, -n)` and picks up the sign
/// `(-1)^{(two_m - two_n)/2}`. Phases multiply over factors; applying the map
/// twice returns the original mode with total phase `+1`.
pub fn conjugate_mode(model: &GroupModel, mode: &ModeIndex) -> Result<(ModeIndex, f64)> {
    mode.check_against(model)?;
    let mut phase = 1.0;
    let entries = mode
        .entries()
        .iter()
        .map(|idx| match *idx {
            FactorIndex::Circle { k } => FactorIndex::Circle { k: -k },
            FactorIndex::Su2 { two_l, two_m, two_n } => {
                if ((two_m - two_n) / 2).rem_euclid(2) == 1 {
                    phase = -phase;
                }
                FactorIndex::Su2 { two_l, two_m: -two_m, two_n: -two_n }
            }
        })
        .collect();
    Ok((ModeIndex::new(entries), phase))
}

/// Enumerate modes together with their scalars.
pub fn spectrum(model: &GroupModel, bounds: &[u32]) -> Result<Vec<(ModeIndex, ModeScalars)>> {
    enumerate_modes(model, bounds)?
        .into_iter()
        .map(|m| {
            let sc = mode_scalars(model, &m)?;
            Ok((m, sc))
        })
        .collect()
}
