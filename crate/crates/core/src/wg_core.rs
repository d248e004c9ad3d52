//! Closed-form local WG operators on a single simplex.
//!
//! The lowest-order scheme approximates each velocity component by a constant
//! on the element interior plus a constant per facet. The weak gradient of
//! such a function lives in the lowest-order Raviart-Thomas space
//! `RT0(K) = {a + c (x - x_K)}`, and has an explicit closed form:
//!
//! * interior basis:  `∇_w φ° = -C_K (x - x_K)`,
//! * facet basis `i`: `∇_w φ^∂_i = C_K/(d+1) (x - x_K) + |e_i|/|K| n_i`,
//!
//! with `C_K = d |K| / m_K`. All local matrices follow from the exact
//! `RT0` inner product `(a + c r, a' + c' r)_K = |K| a·a' + c c' m_K`
//! (the cross terms vanish because `∫_K (x - x_K) = 0`).

use crate::error::Result;
use crate::mesh::{dot, sub, ElementGeometry};
use crate::quad::{bary_to_point, simplex_rule};

/// A field `a + c (x - x_K)` in `RT0(K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rt0Field {
    pub const_part: [f64; 3],
    pub radial_coef: f64,
}

impl Rt0Field {
    pub const ZERO: Rt0Field = Rt0Field { const_part: [0.0; 3], radial_coef: 0.0 };

    pub fn add(&self, other: &Rt0Field) -> Rt0Field {
        Rt0Field {
            const_part: [
                self.const_part[0] + other.const_part[0],
                self.const_part[1] + other.const_part[1],
                self.const_part[2] + other.const_part[2],
            ],
            radial_coef: self.radial_coef + other.radial_coef,
        }
    }

    pub fn scale(&self, s: f64) -> Rt0Field {
        Rt0Field {
            const_part: [s * self.const_part[0], s * self.const_part[1], s * self.const_part[2]],
            radial_coef: s * self.radial_coef,
        }
    }

    pub fn axpy(&mut self, s: f64, other: &Rt0Field) {
        for c in 0..3 {
            self.const_part[c] += s * other.const_part[c];
        }
        self.radial_coef += s * other.radial_coef;
    }

    /// Evaluates the field at a physical point.
    pub fn eval(&self, geom: &ElementGeometry, x: &[f64; 3]) -> [f64; 3] {
        let r = sub(x, &geom.barycenter);
        [
            self.const_part[0] + self.radial_coef * r[0],
            self.const_part[1] + self.radial_coef * r[1],
            self.const_part[2] + self.radial_coef * r[2],
        ]
    }

    /// Exact `L^2(K)` inner product with another `RT0` field.
    pub fn inner(&self, geom: &ElementGeometry, other: &Rt0Field) -> f64 {
        geom.measure * dot(&self.const_part, &other.const_part)
            + self.radial_coef * other.radial_coef * geom.second_moment
    }
}

/// All local operators for one element, over the scalar basis
/// `{φ°, φ^∂_1, ..., φ^∂_{d+1}}`.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    pub grad_interior: Rt0Field,
    pub grad_facet: [Rt0Field; 4],
    /// `(d+2) x (d+2)` symmetric matrix of `(∇_w φ_i, ∇_w φ_j)_K`.
    pub stiffness: [[f64; 5]; 5],
    /// `|e_{K,i}| n_{K,i}` per facet; the weak divergence of facet data `u^∂`
    /// is `(1/|K|) Σ_i div_row[i] · u^∂_i`, interiors do not contribute.
    pub div_row: [[f64; 3]; 4],
    /// `|K|`.
    pub pressure_mass: f64,
}

/// Weak gradients of the interior and facet basis functions.
pub fn weak_gradient_basis(geom: &ElementGeometry) -> (Rt0Field, [Rt0Field; 4]) {
    let d = geom.dim;
    let grad_interior = Rt0Field { const_part: [0.0; 3], radial_coef: -geom.c_k };
    let mut grad_facet = [Rt0Field::ZERO; 4];
    for i in 0..=d {
        let s = geom.facet_measures[i] / geom.measure;
        grad_facet[i] = Rt0Field {
            const_part: [
                s * geom.facet_normals[i][0],
                s * geom.facet_normals[i][1],
                s * geom.facet_normals[i][2],
            ],
            radial_coef: geom.c_k / (d as f64 + 1.0),
        };
    }
    (grad_interior, grad_facet)
}

/// `(d+2) x (d+2)` local stiffness `(∇_w φ_i, ∇_w φ_j)_K`; symmetric positive
/// semidefinite with the constant function in its null space.
pub fn local_stiffness(geom: &ElementGeometry) -> [[f64; 5]; 5] {
    let d = geom.dim;
    let (gi, gf) = weak_gradient_basis(geom);
    let mut basis = [Rt0Field::ZERO; 5];
    basis[0] = gi;
    basis[1..=(d + 1)].copy_from_slice(&gf[..=d]);
    let mut s = [[0.0; 5]; 5];
    for i in 0..=(d + 1) {
        for j in i..=(d + 1) {
            let v = basis[i].inner(geom, &basis[j]);
            s[i][j] = v;
            s[j][i] = v;
        }
    }
    s
}

/// Per-facet weak divergence rows `|e_{K,i}| n_{K,i}`.
pub fn local_divergence(geom: &ElementGeometry) -> [[f64; 3]; 4] {
    let mut rows = [[0.0; 3]; 4];
    for i in 0..=geom.dim {
        for c in 0..3 {
            rows[i][c] = geom.facet_measures[i] * geom.facet_normals[i][c];
        }
    }
    rows
}

/// All local operators at once.
pub fn local_operators(geom: &ElementGeometry) -> LocalOperators {
    let (grad_interior, grad_facet) = weak_gradient_basis(geom);
    LocalOperators {
        grad_interior,
        grad_facet,
        stiffness: local_stiffness(geom),
        div_row: local_divergence(geom),
        pressure_mass: geom.measure,
    }
}

/// The `RT0` facet basis `ψ_i = σ_i (x - v_i)` with unit normal trace on
/// facet `i` and zero on the others; `σ_i = |e_i| / (d |K|)` and `v_i` is the
/// vertex opposite facet `i`. The lifting of a WG test function is the `RT0`
/// field whose facet fluxes match the facet normal traces, so its pairing
/// with the body force decomposes over these basis fields.
pub fn lifting_basis(geom: &ElementGeometry, i: usize) -> (f64, [f64; 3]) {
    let sigma = geom.facet_measures[i] / (geom.dim as f64 * geom.measure);
    (sigma, geom.vertices[i])
}

/// Per-facet load contributions `∫_K f · ψ_i dx` by quadrature of the given
/// degree. The load carried by the velocity DOF (facet `i`, component `m`)
/// is `n_i[m]` times this scalar.
pub fn lifting_load<F>(geom: &ElementGeometry, f: F, quad_degree: usize) -> Result<[f64; 4]>
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    let d = geom.dim;
    let rule = simplex_rule(d, quad_degree)?;
    let mut sigmas = [0.0; 4];
    for i in 0..=d {
        sigmas[i] = geom.facet_measures[i] / (d as f64 * geom.measure);
    }
    let mut loads = [0.0; 4];
    for q in rule {
        let x = bary_to_point(&geom.vertices, &q.bary);
        let fx = f(&x);
        for i in 0..=d {
            let r = sub(&x, &geom.vertices[i]);
            loads[i] += q.weight * sigmas[i] * dot(&fx, &r);
        }
    }
    for l in loads.iter_mut() {
        *l *= geom.measure;
    }
    Ok(loads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{element_geometry_from_vertices, norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_right_triangle() -> ElementGeometry {
        let verts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0],
        ];
        element_geometry_from_vertices(2, &verts).unwrap()
    }

    pub(crate) fn random_simplex(rng: &mut ChaCha8Rng, dim: usize) -> ElementGeometry {
        loop {
            let mut verts = [[0.0; 3]; 4];
            for v in verts.iter_mut().take(dim + 1) {
                for c in v.iter_mut().take(dim) {
                    *c = rng.gen_range(-1.0..1.0);
                }
            }
            if let Ok(g) = element_geometry_from_vertices(dim, &verts) {
                if g.measure > 1e-3 {
                    return g;
                }
            }
        }
    }

    #[test]
    fn gradients_on_unit_right_triangle() {
        let g = unit_right_triangle();
        let (gi, gf) = weak_gradient_basis(&g);
        // ∇_w φ° = -18 (x - x_K); C_K = 18 is frozen from the m_K oracle.
        assert!(gi.const_part.iter().all(|&c| c == 0.0));
        assert!((gi.radial_coef + 18.0).abs() < 1e-12);
        // Hypotenuse facet (opposite vertex 0): a = (2, 2), c = 6.
        assert!((gf[0].const_part[0] - 2.0).abs() < 1e-12);
        assert!((gf[0].const_part[1] - 2.0).abs() < 1e-12);
        assert!((gf[0].radial_coef - 6.0).abs() < 1e-12);
    }

    #[test]
    fn weak_gradient_of_global_constant_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for dim in [2usize, 3] {
            for _ in 0..100 {
                let g = random_simplex(&mut rng, dim);
                let (gi, gf) = weak_gradient_basis(&g);
                let mut total = gi;
                for f in gf.iter().take(dim + 1) {
                    total = total.add(f);
                }
                assert!(norm(&total.const_part) < 1e-10 * g.c_k.max(1.0));
                assert!(total.radial_coef.abs() < 1e-10 * g.c_k.max(1.0));
            }
        }
    }

    /// Verifies the closed-form gradients against the defining relation
    /// `(∇_w φ, w)_K = (φ^∂, w·n)_{∂K} - (φ°, ∇·w)_K` for a basis of RT0
    /// test fields, with the left side integrated by quadrature.
    #[test]
    fn gradients_satisfy_defining_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        for dim in [2usize, 3] {
            for _ in 0..200 {
                let g = random_simplex(&mut rng, dim);
                let (gi, gf) = weak_gradient_basis(&g);
                let rule = simplex_rule(dim, 2).unwrap();
                // Test fields: w = e_m, then w = x - x_K.
                let mut tests: Vec<Rt0Field> = Vec::new();
                for m in 0..dim {
                    let mut a = [0.0; 3];
                    a[m] = 1.0;
                    tests.push(Rt0Field { const_part: a, radial_coef: 0.0 });
                }
                tests.push(Rt0Field { const_part: [0.0; 3], radial_coef: 1.0 });
                for w in &tests {
                    let div_w = w.radial_coef * dim as f64;
                    // Interior basis: (∇_w φ°, w) = -(1, ∇·w)_K.
                    let mut lhs = 0.0;
                    for q in rule {
                        let x = bary_to_point(&g.vertices, &q.bary);
                        lhs += q.weight * dot(&gi.eval(&g, &x), &w.eval(&g, &x));
                    }
                    lhs *= g.measure;
                    let rhs = -div_w * g.measure;
                    assert!((lhs - rhs).abs() < 1e-10, "interior basis: {lhs} vs {rhs}");
                    // Facet bases: (∇_w φ^∂_i, w) = |e_i| (w·n_i at the facet).
                    for i in 0..=dim {
                        let mut lhs = 0.0;
                        for q in rule {
                            let x = bary_to_point(&g.vertices, &q.bary);
                            lhs += q.weight * dot(&gf[i].eval(&g, &x), &w.eval(&g, &x));
                        }
                        lhs *= g.measure;
                        // w·n_i is constant on the facet plane; take any facet vertex.
                        let mut centroid = [0.0; 3];
                        let mut cnt = 0.0;
                        for (j, v) in g.vertices.iter().take(dim + 1).enumerate() {
                            if j != i {
                                for c in 0..3 {
                                    centroid[c] += v[c];
                                }
                                cnt += 1.0;
                            }
                        }
                        for c in centroid.iter_mut() {
                            *c /= cnt;
                        }
                        let wn = dot(&w.eval(&g, &centroid), &g.facet_normals[i]);
                        let rhs = g.facet_measures[i] * wn;
                        assert!((lhs - rhs).abs() < 1e-10, "facet {i}: {lhs} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn stiffness_on_unit_right_triangle() {
        let g = unit_right_triangle();
        let s = local_stiffness(&g);
        // (φ°, φ°) = C_K^2 m_K = C_K d |K| = 18.
        assert!((s[0][0] - 18.0).abs() < 1e-12);
        // (φ°, φ^∂_hyp) = -C_K (C_K/(d+1)) m_K = -6.
        assert!((s[0][1] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        for dim in [2usize, 3] {
            for _ in 0..100 {
                let g = random_simplex(&mut rng, dim);
                let s = local_stiffness(&g);
                let scale = s.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
                for row in s.iter().take(dim + 2) {
                    let sum: f64 = row.iter().take(dim + 2).sum();
                    assert!(sum.abs() <= 1e-12 * scale);
                }
            }
        }
    }

    /// Degree-2 quadrature assembly of the stiffness as an independent oracle.
    #[test]
    fn stiffness_matches_quadrature_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        for _ in 0..1000 {
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let g = random_simplex(&mut rng, dim);
            let (gi, gf) = weak_gradient_basis(&g);
            let mut basis = vec![gi];
            basis.extend_from_slice(&gf[..=dim]);
            let s = local_stiffness(&g);
            let rule = simplex_rule(dim, 2).unwrap();
            let scale = s.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
            for i in 0..dim + 2 {
                for j in 0..dim + 2 {
                    let mut q_ij = 0.0;
                    for q in rule {
                        let x = bary_to_point(&g.vertices, &q.bary);
                        q_ij += q.weight * dot(&basis[i].eval(&g, &x), &basis[j].eval(&g, &x));
                    }
                    q_ij *= g.measure;
                    assert!(
                        (q_ij - s[i][j]).abs() <= 1e-12 * scale,
                        "entry ({i},{j}): {q_ij} vs {}",
                        s[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn divergence_rows_on_unit_right_triangle() {
        let g = unit_right_triangle();
        let rows = local_divergence(&g);
        // Facet 2 (opposite vertex (0,1)) is the bottom edge: |e| n = (0, -1).
        assert!((rows[2][0] - 0.0).abs() < 1e-14);
        assert!((rows[2][1] + 1.0).abs() < 1e-14);
        // Hypotenuse (opposite vertex 0): |e| n = (1, 1).
        assert!((rows[0][0] - 1.0).abs() < 1e-12);
        assert!((rows[0][1] - 1.0).abs() < 1e-12);
    }

    /// Divergence-theorem oracle: for facet data taken from a linear field
    /// `v(x) = M x + b`, the weak divergence equals `tr(M)`.
    #[test]
    fn divergence_matches_divergence_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        for _ in 0..1000 {
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let g = random_simplex(&mut rng, dim);
            let rows = local_divergence(&g);
            let mut mat = [[0.0; 3]; 3];
            let mut b = [0.0; 3];
            let mut trace = 0.0;
            for r in 0..dim {
                for c in 0..dim {
                    mat[r][c] = rng.gen_range(-1.0..1.0);
                }
                trace += mat[r][r];
                b[r] = rng.gen_range(-1.0..1.0);
            }
            let lin = |x: &[f64; 3]| {
                let mut y = b;
                for r in 0..dim {
                    for c in 0..dim {
                        y[r] += mat[r][c] * x[c];
                    }
                }
                y
            };
            // Facet averages of a linear field are its values at facet centroids.
            let mut div = 0.0;
            for i in 0..=dim {
                let mut centroid = [0.0; 3];
                for (j, v) in g.vertices.iter().take(dim + 1).enumerate() {
                    if j != i {
                        for c in 0..3 {
                            centroid[c] += v[c] / dim as f64;
                        }
                    }
                }
                div += dot(&rows[i], &lin(&centroid));
            }
            div /= g.measure;
            assert!((div - trace).abs() <= 1e-11 * (1.0 + trace.abs()) * g.c_k.max(1.0));
        }
    }

    #[test]
    fn divergence_of_identity_trace_is_d_and_constants_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
        for dim in [2usize, 3] {
            let g = random_simplex(&mut rng, dim);
            let rows = local_divergence(&g);
            // u^∂ = facet averages of x: ∇_w·u = d.
            let mut div = 0.0;
            for i in 0..=dim {
                let mut centroid = [0.0; 3];
                for (j, v) in g.vertices.iter().take(dim + 1).enumerate() {
                    if j != i {
                        for c in 0..3 {
                            centroid[c] += v[c] / dim as f64;
                        }
                    }
                }
                div += dot(&rows[i], &centroid);
            }
            div /= g.measure;
            assert!((div - dim as f64).abs() < 1e-11);
            // Constant facet data has zero weak divergence.
            let u = [0.3, -0.7, 0.2];
            let mut div = 0.0;
            for i in 0..=dim {
                div += dot(&rows[i], &u);
            }
            assert!(div.abs() < 1e-12 * g.c_k.max(1.0));
        }
    }

    #[test]
    fn lifting_basis_has_unit_normal_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
        for dim in [2usize, 3] {
            for _ in 0..100 {
                let g = random_simplex(&mut rng, dim);
                for i in 0..=dim {
                    let (sigma, vopp) = lifting_basis(&g, i);
                    for j in 0..=dim {
                        // ψ_i · n_j is constant on facet j; evaluate at its centroid.
                        let mut centroid = [0.0; 3];
                        for (l, v) in g.vertices.iter().take(dim + 1).enumerate() {
                            if l != j {
                                for c in 0..3 {
                                    centroid[c] += v[c] / dim as f64;
                                }
                            }
                        }
                        let psi = [
                            sigma * (centroid[0] - vopp[0]),
                            sigma * (centroid[1] - vopp[1]),
                            sigma * (centroid[2] - vopp[2]),
                        ];
                        let trace = dot(&psi, &g.facet_normals[j]);
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (trace - expected).abs() < 1e-10,
                            "dim {dim} facet pair ({i},{j}): {trace}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lifting_load_zero_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
        let g = random_simplex(&mut rng, 2);
        let loads = lifting_load(&g, |_| [0.0; 3], 4).unwrap();
        assert!(loads.iter().all(|&l| l == 0.0));
    }

    /// Symbolic oracle for constant force: `∫_K ψ_i = σ_i |K| (x_K - v_i)`.
    #[test]
    fn lifting_load_constant_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000a);
        for _ in 0..1000 {
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let g = random_simplex(&mut rng, dim);
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), {
                if dim == 3 {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            }];
            let loads = lifting_load(&g, |_| c, 4).unwrap();
            for i in 0..=dim {
                let (sigma, vopp) = lifting_basis(&g, i);
                let exact = sigma * g.measure * dot(&c, &sub(&g.barycenter, &vopp));
                assert!(
                    (loads[i] - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                    "facet {i}: {} vs {exact}",
                    loads[i]
                );
            }
        }
    }

    #[test]
    fn lifting_load_unknown_degree_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000b);
        let g = random_simplex(&mut rng, 2);
        assert!(lifting_load(&g, |_| [0.0; 3], 11).is_err());
    }

    /// Discrete form of `Σ(∇_w·u, ∇_w·u)_K ≤ d Σ(∇_w u, ∇_w u)_K` on one
    /// element with random facet data.
    #[test]
    fn divergence_energy_bounded_by_gradient_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000c);
        for _ in 0..500 {
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let g = random_simplex(&mut rng, dim);
            let ops = local_operators(&g);
            // Random facet values, zero interior values.
            let mut u = [[0.0; 3]; 4];
            for f in u.iter_mut().take(dim + 1) {
                for c in f.iter_mut().take(dim) {
                    *c = rng.gen_range(-1.0..1.0);
                }
            }
            let mut div = 0.0;
            for i in 0..=dim {
                div += dot(&ops.div_row[i], &u[i]);
            }
            div /= g.measure;
            let lhs = div * div * g.measure;
            let mut rhs = 0.0;
            for m in 0..dim {
                // Energy of component m: coeffs (0, u[0][m], ..., u[d][m]).
                for i in 0..=dim {
                    for j in 0..=dim {
                        rhs += u[i][m] * ops.stiffness[i + 1][j + 1] * u[j][m];
                    }
                }
            }
            rhs *= dim as f64;
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-13, "lhs {lhs} > d*energy {rhs}");
        }
    }
}
