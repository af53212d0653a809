//! Explicit SU(2) irreducible representation matrices.
//!
//! Only small spins are ever materialized; their purpose is to pin down the
//! index and conjugation conventions used by [`crate::group`] against honest
//! matrix arithmetic rather than against themselves. The representation of
//! spin `l` acts on homogeneous polynomials of degree `2l` in two complex
//! variables: with the orthonormal basis
//! `e_m = z1^{l-m} z2^{l+m} / sqrt((l-m)!(l+m)!)` and the action
//! `(pi(g) e)(z) = e(z g)`, the matrix coefficients satisfy
//!
//! * `t(gh) = t(g) t(h)` and unitarity,
//! * `conj(t^l_{nm}) = (-1)^{m-n} t^l_{-n,-m}`,
//! * `t(exp(tau X))` is diagonal with entries `e^{i m tau}` for the generator
//!   `X = diag(-i/2, i/2)`, i.e. the symbol of the canonical field is
//!   `i m` on row `m`.

use num_complex::Complex64;

/// A group element `[[a, b], [-conj(b), conj(a)]]` with `|a|^2 + |b|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Element {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2Element {
    /// Normalize `(a, b)` onto the unit sphere. Returns `None` for the zero
    /// pair.
    pub fn new(a: Complex64, b: Complex64) -> Option<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        Some(Su2Element { a: a / norm, b: b / norm })
    }

    pub fn identity() -> Self {
        Su2Element { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    /// One-parameter subgroup of the canonical generator:
    /// `exp(tau X) = diag(e^{-i tau/2}, e^{i tau/2})`.
    pub fn torus(tau: f64) -> Self {
        Su2Element { a: Complex64::new(0.0, -tau / 2.0).exp(), b: Complex64::new(0.0, 0.0) }
    }

    /// Group multiplication in the `(a, b)` parametrization.
    pub fn mul(&self, other: &Su2Element) -> Su2Element {
        Su2Element {
            a: self.a * other.a - self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: i64, k: i64) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Dense `(two_l + 1) x (two_l + 1)` matrix of the spin-`two_l/2`
/// representation at `g`, row-major with rows and columns ordered by
/// `m = -l, ..., l` (doubled index `two_m = -two_l, -two_l + 2, ...`).
///
/// Entry `(row m, col n)` is the coefficient `t^l_{mn}(g)` of the action on
/// the basis vector `e_n` expanded over `e_m`.
pub fn rep_matrix(two_l: i64, g: &Su2Element) -> Vec<Vec<Complex64>> {
    assert!(two_l >= 0, "spin index must be nonnegative");
    let dim = (two_l + 1) as usize;
    let (a, b) = (g.a, g.b);
    let neg_b_conj = -b.conj();
    let a_conj = a.conj();
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        // two_n = -two_l + 2 col; p = l - n, q = l + n as plain integers.
        let two_n = -two_l + 2 * col as i64;
        let p = (two_l - two_n) / 2;
        let q = (two_l + two_n) / 2;
        for row in 0..dim {
            let two_m = -two_l + 2 * row as i64;
            let r = (two_l - two_m) / 2;
            let s = (two_l + two_m) / 2;
            // (z1 a - z2 conj(b))^p (z1 b + z2 conj(a))^q: the z1^{l-m} z2^{l+m}
            // coefficient collects binomial terms with i + j = s.
            let mut sum = Complex64::new(0.0, 0.0);
            let i_lo = (s - q).max(0);
            let i_hi = s.min(p);
            for i in i_lo..=i_hi {
                let j = s - i;
                sum += binomial(p, i)
                    * binomial(q, j)
                    * a.powi((p - i) as i32)
                    * neg_b_conj.powi(i as i32)
                    * b.powi((q - j) as i32)
                    * a_conj.powi(j as i32);
            }
            let scale = (factorial(r) * factorial(s) / (factorial(p) * factorial(q))).sqrt();
            mat[row][col] = scale * sum;
        }
    }
    mat
}
