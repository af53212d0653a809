//! Per-mode closed-form solver and its independent shooting oracle.
//!
//! Taking partial Fourier coefficients turns the evolution equation into an
//! uncoupled family of 2x2 periodic ODE systems, one per mode: the coefficient
//! pair `w = (u_hat, conj-coefficient)` satisfies `w' = M(t) w + F(t)` with
//!
//! ```text
//! M(t) = [ s(t) + i b + q(t)(-a + i delta)        alpha q(t)              ]
//!        [ conj(alpha) q(t)                        s(t) + i b + q(t)(a - i delta) ]
//! ```
//!
//! Substituting `w = e^{i b t + S(t)} y` with `S = int_0^t s` removes the
//! time-dependent trace and leaves `y' = q(t) C y` with the constant coupling
//! matrix `C = [[-c, alpha], [conj(alpha), c]]`, `c = a - i delta`. `C` has
//! eigenvalues `+-rho`, `rho = sqrt(c^2 + |alpha|^2)` on the branch with
//! `Re rho >= 0`. Diagonalizing and integrating gives one growing and one
//! decaying scalar component; both are evaluated here through rearrangements
//! whose exponentials all have nonpositive real part, so arbitrarily large
//! `|rho| q0` never overflows. The boundary constants are fixed by the twisted
//! periodicity `z(0) = e^{2 pi i b + s0} z(2pi)` inherited from periodicity of
//! `w`, with denominators
//!
//! ```text
//! D1 = e^{-rho q0} - e^{s0 + 2 pi i b},    D2 = 1 - e^{-rho q0 + s0 + 2 pi i b}.
//! ```
//!
//! A vanishing denominator is a resonant mode; the homogeneous equation then
//! has a twisted-periodic solution and no forcing-independent inverse exists.
//!
//! [`oracle_shooting`] solves the same 2x2 system by classical Runge-Kutta
//! time stepping plus a monodromy solve. It shares no formulas with
//! [`solve_mode`] beyond `M(t)` itself and is used to cross-check the closed
//! form on randomized systems.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GroupModel, ModeScalars};
use crate::profile::{QWeights, TrigPoly, NONNEG_SAMPLES, TWO_PI};
use crate::quad::{GL5_NODES, GL5_WEIGHTS};

/// Boundary denominators below `RESONANCE_TOL_BASE * (1 + e^{s0})` count as
/// resonant.
pub const RESONANCE_TOL_BASE: f64 = 1e-14;

/// The shooting oracle reports a singular periodicity system below this
/// absolute determinant size.
pub const MONODROMY_TOL: f64 = 1e-8;

/// Allowed roundoff excursion of exponent real parts above zero inside
/// [`solve_mode`].
pub const STABILITY_SLACK: f64 = 1e-12;

/// Operator data: the group model plus the zero-order coefficients.
///
/// The evolution operator is
/// `P u = d_t u - sum_j (p0_j + i lambda_j q(t)) X_j u - (s(t) + i delta q(t)) u - alpha q(t) conj(u)`
/// with `q >= 0`, `q` not identically zero, and `alpha != 0`.
#[derive(Debug, Clone)]
pub struct VekuaParams {
    group: GroupModel,
    delta: f64,
    alpha: Complex64,
    s: TrigPoly,
    q: TrigPoly,
    s0: f64,
    q0: f64,
    big_s: crate::profile::SplitAntiderivative,
    q_weights: QWeights,
}

impl VekuaParams {
    pub fn new(
        group: GroupModel,
        delta: f64,
        alpha: Complex64,
        s: TrigPoly,
        q: TrigPoly,
    ) -> Result<Self> {
        if !delta.is_finite() || !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::InvalidInput("delta and alpha must be finite".into()));
        }
        if alpha.norm_sqr() == 0.0 {
            return Err(Error::ZeroAlpha);
        }
        let samples = NONNEG_SAMPLES.max(4 * (q.max_freq() as usize + 1));
        let q_weights = QWeights::new(&q, samples)?;
        let big_s = s.antiderivative();
        Ok(VekuaParams {
            s0: s.period_integral(),
            q0: q_weights.q0(),
            group,
            delta,
            alpha,
            s,
            q,
            big_s,
            q_weights,
        })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn s(&self) -> &TrigPoly {
        &self.s
    }

    pub fn q(&self) -> &TrigPoly {
        &self.q
    }

    /// `s0 = int_0^{2pi} s`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// `q0 = int_0^{2pi} q > 0`.
    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn s_at(&self, t: f64) -> f64 {
        self.s.eval(t)
    }

    pub fn q_at(&self, t: f64) -> f64 {
        self.q.eval(t)
    }

    /// `S(t) = int_0^t s`.
    pub fn big_s_at(&self, t: f64) -> f64 {
        self.big_s.eval(t)
    }

    /// `Q(t) = int_0^t q`.
    pub fn big_q_at(&self, t: f64) -> f64 {
        self.q_weights.q_upper(t)
    }

    pub fn q_weights(&self) -> &QWeights {
        &self.q_weights
    }
}

/// Small dense complex 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[Complex64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Mat2::zero();
        m.0[0][0] = Complex64::new(1.0, 0.0);
        m.0[1][1] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] =
                    self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn scale(&self, c: Complex64) -> Mat2 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Solve `self x = rhs` by Cramer's rule.
    pub fn solve(&self, rhs: [Complex64; 2]) -> Option<[Complex64; 2]> {
        let det = self.det();
        if det.norm_sqr() == 0.0 {
            return None;
        }
        Some([
            (rhs[0] * self.0[1][1] - rhs[1] * self.0[0][1]) / det,
            (rhs[1] * self.0[0][0] - rhs[0] * self.0[1][0]) / det,
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// The eigenvalue branch `rho = sqrt((a - i delta)^2 + |alpha|^2)` with
/// `Re rho >= 0`, and `Im rho >= 0` when the square is a nonpositive real
/// number (so purely imaginary results sit on the upper half-axis exactly).
pub fn rho_branch(a: f64, delta: f64, alpha: Complex64) -> Complex64 {
    let c = Complex64::new(a, -delta);
    let rho2 = c * c + alpha.norm_sqr();
    if rho2.im == 0.0 {
        // Keep the real/imaginary cases exact instead of relying on
        // cos(pi/2) != 0 in floating point.
        if rho2.re >= 0.0 {
            Complex64::new(rho2.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-rho2.re).sqrt())
        }
    } else {
        let r = rho2.sqrt();
        if r.re < 0.0 {
            -r
        } else {
            r
        }
    }
}

/// The twisted-periodicity denominators
/// `D1 = e^{-rho q0} - e^{s0 + 2 pi i b}` and
/// `D2 = 1 - e^{-rho q0 + s0 + 2 pi i b}`.
pub fn mode_denominators(
    rho: Complex64,
    b: f64,
    s0: f64,
    q0: f64,
) -> (Complex64, Complex64) {
    let decay = (-rho * q0).exp();
    let twist = Complex64::new(s0, TWO_PI * b).exp();
    (decay - twist, Complex64::new(1.0, 0.0) - decay * twist)
}

/// Everything about one mode the solver and the condition checkers need.
#[derive(Debug, Clone, Copy)]
pub struct ModeSystem {
    pub a: f64,
    pub b: f64,
    pub rho: Complex64,
    /// Eigenbasis `T = [[alpha, alpha], [c + rho, c - rho]]`, `c = a - i delta`.
    pub t_mat: Mat2,
    /// Closed-form inverse `T^{-1} = -(2 alpha rho)^{-1} [[c - rho, -alpha], [-c - rho, alpha]]`.
    pub t_inv: Mat2,
    pub d1: Complex64,
    pub d2: Complex64,
    pub s0: f64,
    pub q0: f64,
}

impl ModeSystem {
    /// `c = a - i delta`, recovered from the stored eigenbasis.
    pub fn c(&self) -> Complex64 {
        (self.t_mat.0[1][0] + self.t_mat.0[1][1]) / 2.0
    }

    pub fn alpha(&self) -> Complex64 {
        self.t_mat.0[0][0]
    }
}

/// Assemble the per-mode system: eigenvalue branch, eigenbasis, and boundary
/// denominators. Fails on `rho = 0` and on resonant denominators.
pub fn build_mode_system(params: &VekuaParams, scalars: &ModeScalars) -> Result<ModeSystem> {
    let (a, b) = (scalars.a, scalars.b);
    let alpha = params.alpha();
    let delta = params.delta();
    let rho = rho_branch(a, delta, alpha);
    if rho.norm_sqr() == 0.0 {
        return Err(Error::DegenerateRho { a, delta, alpha_abs: alpha.norm() });
    }
    let c = Complex64::new(a, -delta);
    let t_mat = Mat2([[alpha, alpha], [c + rho, c - rho]]);
    let t_inv = Mat2([[c - rho, -alpha], [-c - rho, alpha]])
        .scale(Complex64::new(-1.0, 0.0) / (alpha * rho * 2.0));
    let (s0, q0) = (params.s0(), params.q0());
    let (d1, d2) = mode_denominators(rho, b, s0, q0);
    let tol = RESONANCE_TOL_BASE * (1.0 + s0.exp());
    if d1.norm() < tol || d2.norm() < tol {
        return Err(Error::ResonantMode {
            modes: Vec::new(),
            d1_abs: d1.norm(),
            d2_abs: d2.norm(),
        });
    }
    Ok(ModeSystem { a, b, rho, t_mat, t_inv, d1, d2, s0, q0 })
}

/// One solved mode on the closed uniform grid `t_i = 2 pi i / n_t`.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub times: Vec<f64>,
    /// Diagonalized components (`z1` pairs with `+rho`, `z2` with `-rho`).
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    /// Boundary constants of the two components.
    pub k1: Complex64,
    pub k2: Complex64,
    /// Reconstructed coefficient pair `w = e^{i b t + S(t)} T z`.
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    /// Largest real part among all rho-weighted exponential arguments that
    /// were evaluated; the stability contract keeps this below
    /// [`STABILITY_SLACK`].
    pub max_exp_re: f64,
}

struct ExpTracker {
    max_re: f64,
}

impl ExpTracker {
    fn new() -> Self {
        ExpTracker { max_re: f64::NEG_INFINITY }
    }

    fn exp(&mut self, arg: Complex64) -> Complex64 {
        if arg.re > self.max_re {
            self.max_re = arg.re;
        }
        arg.exp()
    }
}

/// Solve one mode in closed form.
///
/// `g1`, `g2` are the diagonalized forcing components `G = T^{-1} (f1, f2)`,
/// evaluable anywhere on `[0, 2pi]` (panel quadrature samples between grid
/// points). `big_q` and `big_s` are the exact antiderivatives `Q` and `S`.
/// The growing component is integrated backwards and the decaying component
/// forwards, so every rho-weighted exponential argument has nonpositive real
/// part up to roundoff.
pub fn solve_mode(
    system: &ModeSystem,
    g1: impl Fn(f64) -> Complex64,
    g2: impl Fn(f64) -> Complex64,
    big_q: impl Fn(f64) -> f64,
    big_s: impl Fn(f64) -> f64,
    n_t: usize,
) -> Result<ModeSolution> {
    if n_t < 8 {
        return Err(Error::InvalidInput(format!("grid size {n_t} is too small (need >= 8)")));
    }
    let rho = system.rho;
    let b = system.b;
    let q0 = system.q0;
    let zero = Complex64::new(0.0, 0.0);
    let mut tracker = ExpTracker::new();

    let times: Vec<f64> = (0..=n_t).map(|i| TWO_PI * i as f64 / n_t as f64).collect();
    let qg: Vec<f64> = times.iter().map(|&t| big_q(t)).collect();

    // Per-panel node data: Q(sigma) and the damped forcings
    // h(sigma) g(sigma), h(sigma) = e^{-i b sigma - S(sigma)}.
    let half = std::f64::consts::PI / n_t as f64;
    let mut q_node = vec![[0.0f64; 5]; n_t];
    let mut hg1 = vec![[zero; 5]; n_t];
    let mut hg2 = vec![[zero; 5]; n_t];
    for i in 0..n_t {
        let mid = 0.5 * (times[i] + times[i + 1]);
        for k in 0..5 {
            let sigma = mid + half * GL5_NODES[k];
            let h = Complex64::new(-big_s(sigma), -b * sigma).exp();
            q_node[i][k] = big_q(sigma);
            hg1[i][k] = h * g1(sigma);
            hg2[i][k] = h * g2(sigma);
        }
    }

    // Boundary-constant numerators (both integrands decay under rho).
    let mut k1_num = zero;
    let mut k2_num = zero;
    for i in 0..n_t {
        for k in 0..5 {
            let wq = GL5_WEIGHTS[k] * half;
            k1_num += wq * tracker.exp(-rho * q_node[i][k]) * hg1[i][k];
            k2_num += wq * tracker.exp(rho * (q_node[i][k] - q0)) * hg2[i][k];
        }
    }
    let twist = Complex64::new(system.s0, TWO_PI * b).exp();
    let k1 = k1_num / system.d1;
    let k2 = twist * k2_num / system.d2;

    // Growing component, integrated backwards from t = 2pi:
    // z1(t) = -int_t^{2pi} e^{rho (Q(t) - Q(sigma))} h g1 dsigma + K1 e^{rho (Q(t) - q0)}.
    let mut z1 = vec![zero; n_t + 1];
    z1[n_t] = k1 * tracker.exp(rho * (qg[n_t] - q0));
    let mut tail = zero;
    for i in (0..n_t).rev() {
        let mut panel = zero;
        for k in 0..5 {
            let wq = GL5_WEIGHTS[k] * half;
            panel += wq * tracker.exp(rho * (qg[i] - q_node[i][k])) * hg1[i][k];
        }
        tail = tracker.exp(rho * (qg[i] - qg[i + 1])) * tail + panel;
        z1[i] = -tail + k1 * tracker.exp(rho * (qg[i] - q0));
    }

    // Decaying component, integrated forwards from t = 0:
    // z2(t) = int_0^t e^{-rho (Q(t) - Q(sigma))} h g2 dsigma + K2 e^{-rho Q(t)}.
    let mut z2 = vec![zero; n_t + 1];
    z2[0] = k2 * tracker.exp(-rho * qg[0]);
    let mut head = zero;
    for i in 1..=n_t {
        let mut panel = zero;
        for k in 0..5 {
            let wq = GL5_WEIGHTS[k] * half;
            panel += wq * tracker.exp(-rho * (qg[i] - q_node[i - 1][k])) * hg2[i - 1][k];
        }
        head = tracker.exp(-rho * (qg[i] - qg[i - 1])) * head + panel;
        z2[i] = head + k2 * tracker.exp(-rho * qg[i]);
    }

    // Undo the trace substitution: w = e^{i b t + S(t)} T z.
    let t_mat = system.t_mat;
    let mut w1 = vec![zero; n_t + 1];
    let mut w2 = vec![zero; n_t + 1];
    for i in 0..=n_t {
        let restore = Complex64::new(big_s(times[i]), b * times[i]).exp();
        w1[i] = restore * (t_mat.0[0][0] * z1[i] + t_mat.0[0][1] * z2[i]);
        w2[i] = restore * (t_mat.0[1][0] * z1[i] + t_mat.0[1][1] * z2[i]);
    }

    let finite = w1.iter().chain(&w2).all(|c| c.re.is_finite() && c.im.is_finite())
        && k1.is_finite()
        && k2.is_finite();
    if !finite {
        return Err(Error::QuadratureFailure(
            "mode solve produced non-finite values".into(),
        ));
    }
    Ok(ModeSolution { times, z1, z2, k1, k2, w1, w2, max_exp_re: tracker.max_re })
}

/// Result of the Runge-Kutta shooting oracle.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub times: Vec<f64>,
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    /// `|det(I - Phi(2pi))|`, the distance from a singular periodicity system.
    pub monodromy_defect: f64,
}

#[derive(Clone, Copy)]
struct OdeState {
    phi: Mat2,
    wp: [Complex64; 2],
}

impl OdeState {
    fn axpy(&self, c: f64, d: &OdeState) -> OdeState {
        let cc = Complex64::new(c, 0.0);
        let mut phi = self.phi;
        for i in 0..2 {
            for j in 0..2 {
                phi.0[i][j] += cc * d.phi.0[i][j];
            }
        }
        OdeState { phi, wp: [self.wp[0] + cc * d.wp[0], self.wp[1] + cc * d.wp[1]] }
    }
}

/// Independent check of [`solve_mode`]: integrate `w' = M(t) w + F` with
/// classical fourth-order Runge-Kutta (`n_t * substeps` uniform steps),
/// propagate the fundamental matrix alongside a particular solution, and
/// enforce periodicity through the monodromy system
/// `(I - Phi(2pi)) w(0) = w_p(2pi)`.
///
/// Unlike the closed form this path never diagonalizes and never needs `Q` or
/// `S`; agreement between the two is therefore meaningful evidence.
pub fn oracle_shooting(
    params: &VekuaParams,
    scalars: &ModeScalars,
    f1: impl Fn(f64) -> Complex64,
    f2: impl Fn(f64) -> Complex64,
    n_t: usize,
    substeps: usize,
) -> Result<OracleSolution> {
    if n_t == 0 || substeps == 0 {
        return Err(Error::InvalidInput("oracle needs positive step counts".into()));
    }
    let (a, b) = (scalars.a, scalars.b);
    let delta = params.delta();
    let alpha = params.alpha();
    let m_at = |t: f64| -> Mat2 {
        let q = params.q_at(t);
        let s = params.s_at(t);
        Mat2([
            [Complex64::new(s - a * q, b + delta * q), alpha * q],
            [alpha.conj() * q, Complex64::new(s + a * q, b - delta * q)],
        ])
    };
    let deriv = |t: f64, state: &OdeState| -> OdeState {
        let m = m_at(t);
        let f = [f1(t), f2(t)];
        let mw = m.mul_vec(state.wp);
        OdeState { phi: m.mul(&state.phi), wp: [mw[0] + f[0], mw[1] + f[1]] }
    };

    let total = n_t * substeps;
    let h = TWO_PI / total as f64;
    let mut state = OdeState { phi: Mat2::identity(), wp: [Complex64::new(0.0, 0.0); 2] };
    let mut phis = Vec::with_capacity(n_t + 1);
    let mut wps = Vec::with_capacity(n_t + 1);
    phis.push(state.phi);
    wps.push(state.wp);
    for step in 0..total {
        let t = h * step as f64;
        let k1 = deriv(t, &state);
        let k2 = deriv(t + 0.5 * h, &state.axpy(0.5 * h, &k1));
        let k3 = deriv(t + 0.5 * h, &state.axpy(0.5 * h, &k2));
        let k4 = deriv(t + h, &state.axpy(h, &k3));
        state = state
            .axpy(h / 6.0, &k1)
            .axpy(h / 3.0, &k2)
            .axpy(h / 3.0, &k3)
            .axpy(h / 6.0, &k4);
        if (step + 1) % substeps == 0 {
            phis.push(state.phi);
            wps.push(state.wp);
        }
    }

    let residual_matrix = Mat2::identity().sub(&state.phi);
    let defect = residual_matrix.det().norm();
    if defect < MONODROMY_TOL {
        return Err(Error::SingularMonodromy { det_abs: defect });
    }
    let w0 = residual_matrix
        .solve(state.wp)
        .ok_or(Error::SingularMonodromy { det_abs: defect })?;

    let times: Vec<f64> = (0..=n_t).map(|i| TWO_PI * i as f64 / n_t as f64).collect();
    let mut w1 = Vec::with_capacity(n_t + 1);
    let mut w2 = Vec::with_capacity(n_t + 1);
    for i in 0..=n_t {
        let w = phis[i].mul_vec(w0);
        w1.push(w[0] + wps[i][0]);
        w2.push(w[1] + wps[i][1]);
    }
    Ok(OracleSolution { times, w1, w2, monodromy_defect: defect })
}

/// Max pointwise deviation between two coefficient pairs, relative to the
/// larger of 1 and the second pair's sup norm.
pub fn relative_deviation(
    w1a: &[Complex64],
    w2a: &[Complex64],
    w1b: &[Complex64],
    w2b: &[Complex64],
) -> f64 {
    let num = w1a
        .iter()
        .zip(w1b)
        .chain(w2a.iter().zip(w2b))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let den = w1b.iter().chain(w2b).map(|c| c.norm()).fold(1.0, f64::max);
    num / den
}
