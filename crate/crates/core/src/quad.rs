//! Quadrature rules on reference simplices and facets.
//!
//! Rules are stored in barycentric coordinates with weights summing to one,
//! so an integral over a physical simplex `K` is `|K| * sum_q w_q f(x_q)`.

use crate::error::{Error, Result};

/// One quadrature point in barycentric coordinates.
#[derive(Debug, Clone, Copy)]
pub struct QPoint {
    /// Barycentric coordinates; entries beyond `dim + 1` are zero.
    pub bary: [f64; 4],
    /// Normalized weight (the full rule sums to 1).
    pub weight: f64,
}

const fn qp2(l0: f64, l1: f64, l2: f64, w: f64) -> QPoint {
    QPoint { bary: [l0, l1, l2, 0.0], weight: w }
}

const fn qp3(l0: f64, l1: f64, l2: f64, l3: f64, w: f64) -> QPoint {
    QPoint { bary: [l0, l1, l2, l3], weight: w }
}

const TRI_DEG1: [QPoint; 1] = [qp2(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0)];

const TRI_DEG2: [QPoint; 3] = [
    qp2(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    qp2(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    qp2(1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

// Six-point symmetric rule, exact to degree 4.
const TRI_A1: f64 = 0.445_948_490_915_965;
const TRI_B1: f64 = 1.0 - 2.0 * TRI_A1;
const TRI_W1: f64 = 0.223_381_589_678_011;
const TRI_A2: f64 = 0.091_576_213_509_771;
const TRI_B2: f64 = 1.0 - 2.0 * TRI_A2;
const TRI_W2: f64 = 0.109_951_743_655_322;
const TRI_DEG4: [QPoint; 6] = [
    qp2(TRI_B1, TRI_A1, TRI_A1, TRI_W1),
    qp2(TRI_A1, TRI_B1, TRI_A1, TRI_W1),
    qp2(TRI_A1, TRI_A1, TRI_B1, TRI_W1),
    qp2(TRI_B2, TRI_A2, TRI_A2, TRI_W2),
    qp2(TRI_A2, TRI_B2, TRI_A2, TRI_W2),
    qp2(TRI_A2, TRI_A2, TRI_B2, TRI_W2),
];

const TET_DEG1: [QPoint; 1] = [qp3(0.25, 0.25, 0.25, 0.25, 1.0)];

// Four-point symmetric rule, exact to degree 2.
const TET_A: f64 = 0.585_410_196_624_968_5;
const TET_B: f64 = 0.138_196_601_125_010_5;
const TET_DEG2: [QPoint; 4] = [
    qp3(TET_A, TET_B, TET_B, TET_B, 0.25),
    qp3(TET_B, TET_A, TET_B, TET_B, 0.25),
    qp3(TET_B, TET_B, TET_A, TET_B, 0.25),
    qp3(TET_B, TET_B, TET_B, TET_A, 0.25),
];

// Fourteen-point symmetric rule, exact to degree 5.
const TET_G1A: f64 = 0.310_885_919_263_300_5;
const TET_G1D: f64 = 1.0 - 3.0 * TET_G1A;
const TET_G1W: f64 = 0.112_687_925_718_016_2;
const TET_G2A: f64 = 0.092_735_250_310_891_2;
const TET_G2D: f64 = 1.0 - 3.0 * TET_G2A;
const TET_G2W: f64 = 0.073_493_043_116_361_9;
const TET_G3A: f64 = 0.045_503_704_125_649_7;
const TET_G3B: f64 = 0.5 - TET_G3A;
const TET_G3W: f64 = 0.042_546_020_777_081_2;
const TET_DEG4: [QPoint; 14] = [
    qp3(TET_G1D, TET_G1A, TET_G1A, TET_G1A, TET_G1W),
    qp3(TET_G1A, TET_G1D, TET_G1A, TET_G1A, TET_G1W),
    qp3(TET_G1A, TET_G1A, TET_G1D, TET_G1A, TET_G1W),
    qp3(TET_G1A, TET_G1A, TET_G1A, TET_G1D, TET_G1W),
    qp3(TET_G2D, TET_G2A, TET_G2A, TET_G2A, TET_G2W),
    qp3(TET_G2A, TET_G2D, TET_G2A, TET_G2A, TET_G2W),
    qp3(TET_G2A, TET_G2A, TET_G2D, TET_G2A, TET_G2W),
    qp3(TET_G2A, TET_G2A, TET_G2A, TET_G2D, TET_G2W),
    qp3(TET_G3A, TET_G3A, TET_G3B, TET_G3B, TET_G3W),
    qp3(TET_G3A, TET_G3B, TET_G3A, TET_G3B, TET_G3W),
    qp3(TET_G3A, TET_G3B, TET_G3B, TET_G3A, TET_G3W),
    qp3(TET_G3B, TET_G3A, TET_G3A, TET_G3B, TET_G3W),
    qp3(TET_G3B, TET_G3A, TET_G3B, TET_G3A, TET_G3W),
    qp3(TET_G3B, TET_G3B, TET_G3A, TET_G3A, TET_G3W),
];

/// Symmetric rule on a `dim`-simplex exact at least to `degree`.
///
/// Supported degrees: 1, 2 and 4 (requests are rounded up to the next
/// available rule; anything above 4 is unknown).
pub fn simplex_rule(dim: usize, degree: usize) -> Result<&'static [QPoint]> {
    match (dim, degree) {
        (2, 0 | 1) => Ok(&TRI_DEG1),
        (2, 2) => Ok(&TRI_DEG2),
        (2, 3 | 4) => Ok(&TRI_DEG4),
        (3, 0 | 1) => Ok(&TET_DEG1),
        (3, 2) => Ok(&TET_DEG2),
        (3, 3 | 4) => Ok(&TET_DEG4),
        _ => Err(Error::UnknownQuadratureDegree { dim, degree }),
    }
}

/// Gauss-Legendre nodes/weights on [0, 1]; seven points, exact to degree 13.
pub const EDGE_GAUSS: [(f64, f64); 7] = [
    (0.5 - 0.474_553_956_171_379_2, 0.064_742_483_084_434_85),
    (0.5 - 0.370_765_592_799_697_2, 0.139_852_695_744_638_3),
    (0.5 - 0.202_922_575_688_698_6, 0.190_915_025_252_559_46),
    (0.5, 0.208_979_591_836_734_7),
    (0.5 + 0.202_922_575_688_698_6, 0.190_915_025_252_559_46),
    (0.5 + 0.370_765_592_799_697_2, 0.139_852_695_744_638_3),
    (0.5 + 0.474_553_956_171_379_2, 0.064_742_483_084_434_85),
];

/// Maps barycentric coordinates to a physical point of the simplex with the
/// given vertices (only the leading `nv` vertices are used).
pub fn bary_to_point(vertices: &[[f64; 3]], bary: &[f64; 4]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for (v, &l) in vertices.iter().zip(bary.iter()) {
        for c in 0..3 {
            x[c] += l * v[c];
        }
    }
    x
}
