//! Two-node, degree-7 Hermite shape functions on the unit interval.
//!
//! `L0k` carries the k-th derivative datum of the left node and `L1k` that of
//! the right node. Interpolating `u` on `[X_i, X_i + H]` is
//! `sum_k (u_i^(k) L0k(s) + u_{i+1}^(k) L1k(s)) H^k` with `s = (x - X_i)/H`.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    L0,
    L1,
}

/// Monomial coefficients (ascending powers) of each shape function.
const COEFFS: [[[f64; 8]; 4]; 2] = [
    [
        [1.0, 0.0, 0.0, 0.0, -35.0, 84.0, -70.0, 20.0],
        [0.0, 1.0, 0.0, 0.0, -20.0, 45.0, -36.0, 10.0],
        [0.0, 0.0, 0.5, 0.0, -5.0, 10.0, -7.5, 2.0],
        [
            0.0,
            0.0,
            0.0,
            1.0 / 6.0,
            -2.0 / 3.0,
            1.0,
            -2.0 / 3.0,
            1.0 / 6.0,
        ],
    ],
    [
        [0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0],
        [0.0, 0.0, 0.0, 0.0, -15.0, 39.0, -34.0, 10.0],
        [0.0, 0.0, 0.0, 0.0, 2.5, -7.0, 6.5, -2.0],
        [0.0, 0.0, 0.0, 0.0, -1.0 / 6.0, 0.5, -0.5, 1.0 / 6.0],
    ],
];

/// Value of `d^order/ds^order L_{family,k}(s)`; orders above 7 are zero.
pub fn shape_value(family: Family, k: usize, order: usize, s: f64) -> f64 {
    assert!(k < 4, "shape index k must be 0..=3");
    let c = &COEFFS[family as usize][k];
    let mut acc = 0.0;
    for p in (order..8).rev() {
        // falling factorial p (p-1) ... (p-order+1)
        let ff: f64 = (0..order).map(|q| (p - q) as f64).product();
        acc = acc * s + ff * c[p];
    }
    acc
}

/// All eight shape functions (`[family][k]`) and their s-derivatives up to
/// fourth order at one point, `[order][family][k]`.
pub fn shape_table(s: f64) -> [[[f64; 4]; 2]; 5] {
    let mut t = [[[0.0; 4]; 2]; 5];
    for (order, slab) in t.iter_mut().enumerate() {
        for (fam, row) in slab.iter_mut().enumerate() {
            let family = if fam == 0 { Family::L0 } else { Family::L1 };
            for (k, v) in row.iter_mut().enumerate() {
                *v = shape_value(family, k, order, s);
            }
        }
    }
    t
}

/// Four-point Gauss–Legendre abscissae on (0, 1).
pub fn gauss_points() -> [f64; 4] {
    let r30 = 30f64.sqrt();
    let rho1 = 0.5 - (525.0 + 70.0 * r30).sqrt() / 70.0;
    let rho2 = 0.5 - (525.0 - 70.0 * r30).sqrt() / 70.0;
    [rho1, rho2, 1.0 - rho2, 1.0 - rho1]
}

/// Matching weights on (0, 1), summing to one.
pub fn gauss_weights() -> [f64; 4] {
    let r30 = 30f64.sqrt();
    let outer = (18.0 - r30) / 72.0;
    let inner = (18.0 + r30) / 72.0;
    [outer, inner, inner, outer]
}
