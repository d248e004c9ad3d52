//! Global assembly of the saddle-point blocks with Dirichlet data eliminated.
//!
//! Degrees of freedom are ordered interior velocity first (element-major,
//! component-minor), then interior-facet velocity, then pressure. Boundary
//! facet values are projected onto facet means (`Q_h^∂ g`), removed from the
//! unknowns and folded into the right-hand sides. The assembled `A` carries
//! no viscosity factor, matching the rescaled form of the system.

use crate::error::{Error, Result};
use crate::mesh::{dot, sub, Mesh};
use crate::quad::{bary_to_point, simplex_rule, EDGE_GAUSS};
use crate::sparse::CsrMatrix;
use crate::wg_core::{lifting_load, local_operators, Rt0Field};

/// Default quadrature degree for right-hand side and error integration.
pub const DEFAULT_QUAD_DEGREE: usize = 4;

/// Velocity/pressure DOF numbering with boundary elimination.
#[derive(Debug, Clone)]
pub struct WgSpace {
    pub dim: usize,
    pub n_elements: usize,
    pub n_interior_facets: usize,
    pub n_interior_vel: usize,
    pub n_facet_vel: usize,
    pub n_pressure: usize,
    /// facet index -> compact interior-facet index (None on the boundary).
    pub interior_facet_index: Vec<Option<usize>>,
    /// facet index -> eliminated boundary value `Q_h^∂ g` (None in the interior).
    pub boundary_values: Vec<Option<[f64; 3]>>,
}

impl WgSpace {
    pub fn n_velocity(&self) -> usize {
        self.n_interior_vel + self.n_facet_vel
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure
    }

    pub fn interior_dof(&self, element: usize, comp: usize) -> usize {
        element * self.dim + comp
    }

    pub fn facet_dof(&self, interior_facet: usize, comp: usize) -> usize {
        self.n_interior_vel + interior_facet * self.dim + comp
    }
}

/// Assembled sparse blocks and right-hand sides.
#[derive(Debug, Clone)]
pub struct SaddleBlocks {
    /// Spatial dimension of the underlying mesh.
    pub dim: usize,
    /// Velocity stiffness (no viscosity factor), SPD on the interior space.
    pub a: CsrMatrix,
    /// Pressure-velocity coupling; row `K` holds `|e| n` for interior facets.
    pub b0: CsrMatrix,
    /// Diagonal pressure mass `diag(|K_1|, ..., |K_N|)`.
    pub mp: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

impl SaddleBlocks {
    pub fn n_velocity(&self) -> usize {
        self.a.nrows
    }

    pub fn n_pressure(&self) -> usize {
        self.mp.len()
    }

    pub fn omega_measure(&self) -> f64 {
        self.mp.iter().sum()
    }
}

/// Mean value of `g` over a mesh facet (the `Q_h^∂` projection).
pub fn project_boundary<F>(mesh: &Mesh, facet: usize, g: F) -> [f64; 3]
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    let f = &mesh.facets[facet];
    let mut mean = [0.0; 3];
    match mesh.dim {
        2 => {
            let a = mesh.vertex(f.vertices[0]);
            let b = mesh.vertex(f.vertices[1]);
            for &(t, w) in EDGE_GAUSS.iter() {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0];
                let gx = g(&x);
                for c in 0..3 {
                    mean[c] += w * gx[c];
                }
            }
        }
        _ => {
            let verts = [
                mesh.vertex(f.vertices[0]),
                mesh.vertex(f.vertices[1]),
                mesh.vertex(f.vertices[2]),
                [0.0; 3],
            ];
            let rule = simplex_rule(2, DEFAULT_QUAD_DEGREE).expect("default rule exists");
            for q in rule {
                let x = bary_to_point(&verts, &q.bary);
                let gx = g(&x);
                for c in 0..3 {
                    mean[c] += q.weight * gx[c];
                }
            }
        }
    }
    mean
}

/// Mean value of `u` over element `k` (the `Q_h°` projection).
pub fn project_interior<F>(mesh: &Mesh, k: usize, u: F) -> [f64; 3]
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    let elem = &mesh.elements[k];
    let mut verts = [[0.0; 3]; 4];
    for i in 0..=mesh.dim {
        verts[i] = mesh.vertex(elem[i]);
    }
    let rule = simplex_rule(mesh.dim, DEFAULT_QUAD_DEGREE).expect("default rule exists");
    let mut mean = [0.0; 3];
    for q in rule {
        let x = bary_to_point(&verts, &q.bary);
        let ux = u(&x);
        for c in 0..3 {
            mean[c] += q.weight * ux[c];
        }
    }
    mean
}

enum Slot {
    Dof(usize),
    Boundary([f64; 3]),
}

/// Assembles `A`, `B°`, `M_p°`, `b_1`, `b_2` for viscosity `mu`, body force
/// `f` and Dirichlet datum `g`.
pub fn assemble<F, G>(mesh: &Mesh, mu: f64, f: F, g: G) -> Result<(WgSpace, SaddleBlocks)>
where
    F: Fn(&[f64; 3]) -> [f64; 3],
    G: Fn(&[f64; 3]) -> [f64; 3],
{
    if mu < 0.0 {
        return Err(Error::InvalidViscosity(mu));
    }
    if !mesh.check_connected() {
        return Err(Error::DisconnectedMesh);
    }
    let d = mesh.dim;
    let ne = mesh.n_elements();

    let mut interior_facet_index = vec![None; mesh.n_facets()];
    let mut boundary_values = vec![None; mesh.n_facets()];
    let mut n_interior_facets = 0;
    for (idx, facet) in mesh.facets.iter().enumerate() {
        if facet.is_boundary() {
            boundary_values[idx] = Some(project_boundary(mesh, idx, &g));
        } else {
            interior_facet_index[idx] = Some(n_interior_facets);
            n_interior_facets += 1;
        }
    }
    let space = WgSpace {
        dim: d,
        n_elements: ne,
        n_interior_facets,
        n_interior_vel: d * ne,
        n_facet_vel: d * n_interior_facets,
        n_pressure: ne,
        interior_facet_index,
        boundary_values,
    };

    let n_vel = space.n_velocity();
    let mut a_trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut b0_trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut b1 = vec![0.0; n_vel];
    let mut b2 = vec![0.0; ne];
    let mut mp = vec![0.0; ne];

    for k in 0..ne {
        let geom = mesh.element_geometry(k)?;
        let ops = local_operators(&geom);
        let loads = lifting_load(&geom, &f, DEFAULT_QUAD_DEGREE)?;
        mp[k] = geom.measure;

        // Global DOF (or eliminated boundary value) per local slot; slot 0 is
        // the interior basis, slot 1 + i is facet i. A Dof entry stores the
        // component-0 index, components are contiguous.
        let mut slots: Vec<Slot> = Vec::with_capacity(d + 2);
        slots.push(Slot::Dof(space.interior_dof(k, 0)));
        for i in 0..=d {
            let fidx = mesh.element_facets[k][i];
            match space.interior_facet_index[fidx] {
                Some(compact) => slots.push(Slot::Dof(space.facet_dof(compact, 0))),
                None => slots.push(Slot::Boundary(space.boundary_values[fidx].unwrap())),
            }
        }

        // Stiffness: component-diagonal, same scalar local matrix per component.
        for (si, slot_i) in slots.iter().enumerate() {
            let Slot::Dof(gi) = slot_i else { continue };
            for (sj, slot_j) in slots.iter().enumerate() {
                let s_ij = ops.stiffness[si][sj];
                if s_ij == 0.0 {
                    continue;
                }
                match slot_j {
                    Slot::Dof(gj) => {
                        for m in 0..d {
                            a_trips.push((gi + m, gj + m, s_ij));
                        }
                    }
                    Slot::Boundary(gval) => {
                        for m in 0..d {
                            b1[gi + m] -= mu * s_ij * gval[m];
                        }
                    }
                }
            }
        }

        // Divergence rows and lifting loads (facet slots only).
        for i in 0..=d {
            let row = ops.div_row[i];
            match &slots[i + 1] {
                Slot::Dof(gf) => {
                    for m in 0..d {
                        b0_trips.push((k, gf + m, row[m]));
                        b1[gf + m] += loads[i] * geom.facet_normals[i][m];
                    }
                }
                Slot::Boundary(gval) => {
                    b2[k] += dot(&row, gval);
                }
            }
        }
    }

    let blocks = SaddleBlocks {
        dim: d,
        a: CsrMatrix::from_triplets(n_vel, n_vel, &mut a_trips),
        b0: CsrMatrix::from_triplets(ne, n_vel, &mut b0_trips),
        mp,
        b1,
        b2,
    };
    Ok((space, blocks))
}

/// Discrete solution in unscaled variables: velocity DOFs (interior then
/// facet) and element pressures.
#[derive(Debug, Clone)]
pub struct WgSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

/// Error norms of a discrete solution against a smooth exact pair.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    /// `‖p - p_h‖` (both shifted to zero mean).
    pub err_p: f64,
    /// `‖∇u - ∇_w u_h‖` (broken norm over elements).
    pub err_grad: f64,
    /// `‖u - u_h°‖`.
    pub err_u0: f64,
    /// `‖Q_h° u - u_h°‖`.
    pub err_proj: f64,
}

/// Computes the four error norms. `exact_grad` returns the Jacobian with
/// rows indexed by velocity component. Pressures are compared after shifting
/// both to zero mean, consistent with a pinned pressure value.
pub fn compute_errors<U, GU, P>(
    mesh: &Mesh,
    space: &WgSpace,
    solution: &WgSolution,
    exact_u: U,
    exact_grad: GU,
    exact_p: P,
) -> Result<ErrorNorms>
where
    U: Fn(&[f64; 3]) -> [f64; 3],
    GU: Fn(&[f64; 3]) -> [[f64; 3]; 3],
    P: Fn(&[f64; 3]) -> f64,
{
    let d = mesh.dim;
    let rule = simplex_rule(d, DEFAULT_QUAD_DEGREE)?;

    let omega: f64 = (0..mesh.n_elements())
        .map(|k| mesh.element_geometry(k).map(|g| g.measure))
        .sum::<Result<f64>>()?;

    // Means of the exact and discrete pressures.
    let mut p_mean = 0.0;
    let mut ph_mean = 0.0;
    for k in 0..mesh.n_elements() {
        let geom = mesh.element_geometry(k)?;
        for q in rule {
            let x = bary_to_point(&geom.vertices, &q.bary);
            p_mean += geom.measure * q.weight * exact_p(&x);
        }
        ph_mean += geom.measure * solution.pressure[k];
    }
    p_mean /= omega;
    ph_mean /= omega;

    let mut err_p2 = 0.0;
    let mut err_grad2 = 0.0;
    let mut err_u02 = 0.0;
    let mut err_proj2 = 0.0;

    for k in 0..mesh.n_elements() {
        let geom = mesh.element_geometry(k)?;
        let ops = local_operators(&geom);

        // Facet values: interior DOFs from the solution, boundary from Q_h^∂g.
        let mut facet_vals = [[0.0; 3]; 4];
        for i in 0..=d {
            let fidx = mesh.element_facets[k][i];
            match space.interior_facet_index[fidx] {
                Some(compact) => {
                    for m in 0..d {
                        facet_vals[i][m] = solution.velocity[space.facet_dof(compact, m)];
                    }
                }
                None => facet_vals[i] = space.boundary_values[fidx].unwrap(),
            }
        }
        let mut u0 = [0.0; 3];
        for m in 0..d {
            u0[m] = solution.velocity[space.interior_dof(k, m)];
        }

        // Weak gradient of u_h on K, one RT0 field per component.
        let mut grad_rows = [Rt0Field::ZERO; 3];
        for (m, row) in grad_rows.iter_mut().enumerate().take(d) {
            let mut field = ops.grad_interior.scale(u0[m]);
            for i in 0..=d {
                field.axpy(facet_vals[i][m], &ops.grad_facet[i]);
            }
            *row = field;
        }

        let ph = solution.pressure[k] - ph_mean;
        for q in rule {
            let x = bary_to_point(&geom.vertices, &q.bary);
            let w = geom.measure * q.weight;
            let dp = exact_p(&x) - p_mean - ph;
            err_p2 += w * dp * dp;
            let ju = exact_grad(&x);
            for m in 0..d {
                let gm = grad_rows[m].eval(&geom, &x);
                let r = sub(&ju[m], &gm);
                err_grad2 += w * dot(&r, &r);
            }
            let ue = exact_u(&x);
            let du = sub(&ue, &u0);
            err_u02 += w * dot(&du, &du);
        }

        let qmean = project_interior(mesh, k, &exact_u);
        let dproj = sub(&qmean, &u0);
        err_proj2 += geom.measure * dot(&dproj, &dproj);
    }

    Ok(ErrorNorms {
        err_p: err_p2.sqrt(),
        err_grad: err_grad2.sqrt(),
        err_u0: err_u02.sqrt(),
        err_proj: err_proj2.sqrt(),
    })
}
