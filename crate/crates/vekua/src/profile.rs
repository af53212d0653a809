//! Exact calculus on 2pi-periodic time profiles.
//!
//! Two representations are used throughout the crate:
//!
//! * [`TrigPoly`]: a real trigonometric polynomial
//!   `f(t) = mean + sum_n (cos_n cos(nt) + sin_n sin(nt))`, the form the
//!   operator coefficients `p`, `q`, `s` are given in. Differentiation,
//!   antidifferentiation and period integrals are exact term by term.
//! * [`FourierPoly`]: a complex Laurent polynomial in `e^{it}`,
//!   `sum_n c_n e^{int}`, used for partial Fourier coefficient profiles.
//!   Products (convolutions), derivatives and conjugations are exact, which is
//!   what makes manufactured-solution tests meaningful.
//!
//! Antiderivatives of periodic functions are generally not periodic, so they
//! are kept split as `linear_coeff * t + periodic(t)` ([`SplitAntiderivative`]);
//! the split is what allows boundary constants like `q0 = Q(2pi)` to be formed
//! without cancellation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One full period.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Values above `-TOL_NONNEG` count as nonnegative in profile checks.
pub const TOL_NONNEG: f64 = 1e-12;

/// Default sampling density for nonnegativity scans.
pub const NONNEG_SAMPLES: usize = 4096;

/// A single harmonic `cos_c * cos(freq t) + sin_c * sin(freq t)`, `freq >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub freq: u32,
    pub cos_c: f64,
    pub sin_c: f64,
}

/// Real trigonometric polynomial with strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    mean: f64,
    harmonics: Vec<Harmonic>,
}

impl TrigPoly {
    /// The zero profile.
    pub fn zero() -> Self {
        TrigPoly { mean: 0.0, harmonics: Vec::new() }
    }

    /// The constant profile `c`.
    pub fn constant(c: f64) -> Self {
        TrigPoly { mean: c, harmonics: Vec::new() }
    }

    /// Build from `(freq, cos_c, sin_c)` triples. Frequencies must be >= 1;
    /// duplicates are merged and the list is sorted.
    pub fn new(mean: f64, terms: &[(u32, f64, f64)]) -> Result<Self> {
        let mut harmonics: Vec<Harmonic> = Vec::new();
        for &(freq, cos_c, sin_c) in terms {
            if freq == 0 {
                return Err(Error::InvalidInput(
                    "harmonic frequency must be >= 1 (use the mean for frequency 0)".into(),
                ));
            }
            harmonics.push(Harmonic { freq, cos_c, sin_c });
        }
        harmonics.sort_by_key(|h| h.freq);
        let mut merged: Vec<Harmonic> = Vec::new();
        for h in harmonics {
            match merged.last_mut() {
                Some(last) if last.freq == h.freq => {
                    last.cos_c += h.cos_c;
                    last.sin_c += h.sin_c;
                }
                _ => merged.push(h),
            }
        }
        Ok(TrigPoly { mean, harmonics: merged })
    }

    /// Build from separate cosine and sine coefficient lists `(freq, coeff)`.
    pub fn from_cos_sin(mean: f64, cos: &[(u32, f64)], sin: &[(u32, f64)]) -> Result<Self> {
        let mut terms: Vec<(u32, f64, f64)> = cos.iter().map(|&(f, c)| (f, c, 0.0)).collect();
        terms.extend(sin.iter().map(|&(f, c)| (f, 0.0, c)));
        TrigPoly::new(mean, &terms)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// Largest participating frequency (0 for constants).
    pub fn max_freq(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.freq)
    }

    /// True when every stored coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.harmonics.iter().all(|h| h.cos_c == 0.0 && h.sin_c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.mean;
        for h in &self.harmonics {
            let ft = h.freq as f64 * t;
            v += h.cos_c * ft.cos() + h.sin_c * ft.sin();
        }
        v
    }

    /// Integral over one full period, `2pi * mean`, exactly.
    pub fn period_integral(&self) -> f64 {
        TWO_PI * self.mean
    }

    /// Exact term-by-term derivative.
    pub fn derivative(&self) -> TrigPoly {
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| {
                let n = h.freq as f64;
                Harmonic { freq: h.freq, cos_c: h.sin_c * n, sin_c: -h.cos_c * n }
            })
            .collect();
        TrigPoly { mean: 0.0, harmonics }
    }

    /// Exact antiderivative `F` with `F(0) = 0`, split into linear and
    /// periodic parts.
    pub fn antiderivative(&self) -> SplitAntiderivative {
        let mut const_shift = 0.0;
        let harmonics: Vec<Harmonic> = self
            .harmonics
            .iter()
            .map(|h| {
                let n = h.freq as f64;
                // int cos(nt) = sin(nt)/n, int sin(nt) = -cos(nt)/n.
                const_shift += h.sin_c / n;
                Harmonic { freq: h.freq, cos_c: -h.sin_c / n, sin_c: h.cos_c / n }
            })
            .collect();
        SplitAntiderivative {
            linear_coeff: self.mean,
            periodic: TrigPoly { mean: const_shift, harmonics },
        }
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        TrigPoly {
            mean: self.mean * c,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic { freq: h.freq, cos_c: h.cos_c * c, sin_c: h.sin_c * c })
                .collect(),
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms: Vec<(u32, f64, f64)> =
            self.harmonics.iter().map(|h| (h.freq, h.cos_c, h.sin_c)).collect();
        terms.extend(other.harmonics.iter().map(|h| (h.freq, h.cos_c, h.sin_c)));
        TrigPoly::new(self.mean + other.mean, &terms).expect("frequencies already validated")
    }

    /// Scan `samples` equispaced points; fail on a negative value (with the
    /// witness) or when the profile is identically zero. Callers must supply
    /// at least `4 * (max_freq + 1)` samples so no sign dip can hide between
    /// grid points of the scan.
    pub fn ensure_nonnegative(&self, samples: usize) -> Result<()> {
        if self.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        let needed = 4 * (self.max_freq() as usize + 1);
        if samples < needed {
            return Err(Error::InvalidInput(format!(
                "nonnegativity scan needs at least {needed} samples, got {samples}"
            )));
        }
        for j in 0..samples {
            let t = TWO_PI * j as f64 / samples as f64;
            let v = self.eval(t);
            if v < -TOL_NONNEG {
                return Err(Error::NotNonnegative { t, value: v });
            }
        }
        Ok(())
    }
}

/// Antiderivative of a [`TrigPoly`], stored as `linear_coeff * t + periodic(t)`
/// with value 0 at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAntiderivative {
    linear_coeff: f64,
    periodic: TrigPoly,
}

impl SplitAntiderivative {
    /// Slope of the linear part; equals the mean of the integrand.
    pub fn linear_coeff(&self) -> f64 {
        self.linear_coeff
    }

    /// The periodic remainder.
    pub fn periodic_part(&self) -> &TrigPoly {
        &self.periodic
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.linear_coeff * t + self.periodic.eval(t)
    }

    /// Exact increase over one period, `2pi * linear_coeff`.
    pub fn period_increment(&self) -> f64 {
        TWO_PI * self.linear_coeff
    }
}

/// The cumulative weights `Q(t) = int_0^t q` and `Q~(t) = Q(t) - q0` attached
/// to a nonnegative, not identically zero profile `q`.
#[derive(Debug, Clone)]
pub struct QWeights {
    q0: f64,
    anti: SplitAntiderivative,
}

impl QWeights {
    /// Validates `q >= 0` and `q != 0` (scanning `samples` points), then
    /// builds the exact antiderivative.
    pub fn new(q: &TrigPoly, samples: usize) -> Result<Self> {
        q.ensure_nonnegative(samples)?;
        let anti = q.antiderivative();
        Ok(QWeights { q0: anti.period_increment(), anti })
    }

    /// `q0 = Q(2pi) = int_0^{2pi} q > 0`.
    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// `Q(t)`, nondecreasing from 0 to `q0`.
    pub fn q_upper(&self, t: f64) -> f64 {
        self.anti.eval(t)
    }

    /// `Q~(t) = Q(t) - q0 = -int_t^{2pi} q`, nonpositive on `[0, 2pi]`.
    pub fn q_tilde(&self, t: f64) -> f64 {
        self.anti.eval(t) - self.q0
    }
}

/// Complex Laurent polynomial `sum_{n} c_n e^{int}` with a dense coefficient
/// window `[min_n, min_n + coeffs.len())`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPoly {
    min_n: i64,
    coeffs: Vec<Complex64>,
}

impl FourierPoly {
    pub fn zero() -> Self {
        FourierPoly { min_n: 0, coeffs: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        FourierPoly { min_n: 0, coeffs: vec![c] }
    }

    /// Build from `(n, c_n)` pairs; later duplicates add.
    pub fn from_coeffs(pairs: &[(i64, Complex64)]) -> Self {
        if pairs.is_empty() {
            return FourierPoly::zero();
        }
        let min_n = pairs.iter().map(|&(n, _)| n).min().unwrap();
        let max_n = pairs.iter().map(|&(n, _)| n).max().unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (max_n - min_n) as usize + 1];
        for &(n, c) in pairs {
            coeffs[(n - min_n) as usize] += c;
        }
        FourierPoly { min_n, coeffs }
    }

    /// Embed a real trigonometric polynomial:
    /// `c_0 = mean`, `c_{+-n} = (cos_n -+ i sin_n) / 2`.
    pub fn from_real(p: &TrigPoly) -> Self {
        let mut pairs = vec![(0i64, Complex64::new(p.mean(), 0.0))];
        for h in p.harmonics() {
            let n = h.freq as i64;
            pairs.push((n, Complex64::new(h.cos_c / 2.0, -h.sin_c / 2.0)));
            pairs.push((-n, Complex64::new(h.cos_c / 2.0, h.sin_c / 2.0)));
        }
        FourierPoly::from_coeffs(&pairs)
    }

    /// Inclusive frequency window `(min_n, max_n)`.
    pub fn degree_range(&self) -> (i64, i64) {
        (self.min_n, self.min_n + self.coeffs.len() as i64 - 1)
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        let idx = n - self.min_n;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Nonzero coefficients as `(n, c_n)` pairs.
    pub fn coeffs(&self) -> Vec<(i64, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .map(|(j, &c)| (self.min_n + j as i64, c))
            .collect()
    }

    /// Horner evaluation in `e^{it}`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let phi = Complex64::new(0.0, t).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * phi + c;
        }
        acc * Complex64::new(0.0, self.min_n as f64 * t).exp()
    }

    /// Exact derivative: `c_n -> i n c_n`.
    pub fn derivative(&self) -> FourierPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * Complex64::new(0.0, (self.min_n + j as i64) as f64))
            .collect();
        FourierPoly { min_n: self.min_n, coeffs }
    }

    /// Pointwise complex conjugate: `c_n -> conj(c_{-n})`.
    pub fn conj(&self) -> FourierPoly {
        let (lo, hi) = self.degree_range();
        let coeffs = (-hi..=-lo).map(|n| self.coeff(-n).conj()).collect();
        FourierPoly { min_n: -hi, coeffs }
    }

    pub fn scale(&self, c: Complex64) -> FourierPoly {
        FourierPoly { min_n: self.min_n, coeffs: self.coeffs.iter().map(|&x| x * c).collect() }
    }

    pub fn add(&self, other: &FourierPoly) -> FourierPoly {
        let mut pairs = self.coeffs();
        pairs.extend(other.coeffs());
        FourierPoly::from_coeffs(&pairs)
    }

    pub fn sub(&self, other: &FourierPoly) -> FourierPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Exact product by coefficient convolution.
    pub fn mul(&self, other: &FourierPoly) -> FourierPoly {
        let min_n = self.min_n + other.min_n;
        let mut coeffs =
            vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        FourierPoly { min_n, coeffs }
    }

    /// Values at the closed uniform grid `t_i = 2pi i / n_t`, `i = 0..=n_t`.
    pub fn sample(&self, n_t: usize) -> Vec<Complex64> {
        (0..=n_t).map(|i| self.eval(TWO_PI * i as f64 / n_t as f64)).collect()
    }

    /// Least-squares trigonometric fit of degree `max_deg` on a uniform grid
    /// of `samples.len()` points covering one period (no endpoint duplicate).
    /// For `max_deg < len/2` this is the truncated discrete Fourier transform,
    /// and it reproduces any band-limited input exactly.
    pub fn fit_grid(samples: &[Complex64], max_deg: usize) -> FourierPoly {
        let n = samples.len();
        assert!(n > 0, "fit_grid needs at least one sample");
        assert!(2 * max_deg < n, "fit degree must be below the Nyquist limit");
        let d = max_deg as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * max_deg + 1];
        let scale = 1.0 / n as f64;
        for (j, &x) in samples.iter().enumerate() {
            let t = TWO_PI * j as f64 / n as f64;
            // Running powers of e^{-it_j}, starting at e^{+i d t_j}.
            let step = Complex64::new(0.0, -t).exp();
            let mut p = Complex64::new(0.0, d as f64 * t).exp();
            for slot in coeffs.iter_mut() {
                *slot += x * p;
                p *= step;
            }
        }
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        FourierPoly { min_n: -d, coeffs }
    }

    /// Max modulus over a closed uniform grid of `n_t` intervals.
    pub fn sup_on_grid(&self, n_t: usize) -> f64 {
        self.sample(n_t).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
