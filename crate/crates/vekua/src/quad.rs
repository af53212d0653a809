//! Panel-wise Gauss-Legendre quadrature.
//!
//! The mode solver integrates smooth 2pi-periodic integrands accumulated over
//! the subintervals of a uniform grid. A fixed 5-point Gauss-Legendre rule per
//! panel is exact for polynomials of degree 9, giving composite convergence of
//! order 10 on smooth integrands; grid-doubling tests pin the observed order.

/// 5-point Gauss-Legendre nodes on [-1, 1].
pub(crate) const GL5_NODES: [f64; 5] = [
    -0.9061798459386640,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.9061798459386640,
];

/// Weights matching [`GL5_NODES`]; they sum to 2.
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// Integrate `f` over `[a, b]` with a single 5-point panel.
#[cfg(test)]
pub(crate) fn panel<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over `[a, b]` split into `n` equal panels.
#[cfg(test)]
pub(crate) fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| panel(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
}
