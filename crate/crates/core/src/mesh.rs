//! Structured simplicial meshes of the unit square/cube with facet topology.
//!
//! Facet `i` of an element is the one opposite local vertex `i`. Facets are
//! keyed by their sorted vertex indices; per-element outward normals are
//! recomputed from the geometry and never rely on orientation conventions.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

/// A facet (edge in 2D, triangle in 3D) with element adjacency.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Sorted global vertex indices; only the leading `dim` entries are used.
    pub vertices: [usize; 3],
    /// Owning element and its local facet index.
    pub owner: (usize, usize),
    /// Second owner for interior facets.
    pub neighbor: Option<(usize, usize)>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

/// Simplicial mesh (triangles for `dim = 2`, tetrahedra for `dim = 3`).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Vertex coordinates; the third component is zero in 2D.
    pub vertices: Vec<[f64; 3]>,
    /// Element connectivity; only the leading `dim + 1` entries are used.
    pub elements: Vec<[usize; 4]>,
    pub facets: Vec<Facet>,
    /// `element_facets[k][i]` is the global facet opposite local vertex `i`.
    pub element_facets: Vec<[usize; 4]>,
}

/// Per-element geometry quantities used by the local WG operators.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub dim: usize,
    /// Element vertices, in local order.
    pub vertices: [[f64; 3]; 4],
    /// `|K|`, the area/volume.
    pub measure: f64,
    /// Barycenter `x_K`.
    pub barycenter: [f64; 3],
    /// `|e_{K,i}|` for the facet opposite vertex `i`.
    pub facet_measures: [f64; 4],
    /// Unit outward normals `n_{K,i}`.
    pub facet_normals: [[f64; 3]; 4],
    /// `m_K = ∫_K |x - x_K|^2 dx`.
    pub second_moment: f64,
    /// `C_K = d |K| / m_K`.
    pub c_k: f64,
}

pub fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl Mesh {
    /// Builds a mesh from raw vertices and elements, deriving facet topology.
    ///
    /// Rejects elements with (numerically) zero measure and facets shared by
    /// more than two elements. Connectivity is *not* required here; use
    /// [`Mesh::check_connected`].
    pub fn from_parts(
        dim: usize,
        vertices: Vec<[f64; 3]>,
        elements: Vec<[usize; 4]>,
    ) -> Result<Mesh> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut mesh = Mesh {
            dim,
            vertices,
            elements,
            facets: Vec::new(),
            element_facets: Vec::new(),
        };
        mesh.build_facets()?;
        for k in 0..mesh.elements.len() {
            mesh.element_geometry(k)?;
        }
        Ok(mesh)
    }

    fn build_facets(&mut self) -> Result<()> {
        let d = self.dim;
        let mut lookup: HashMap<[usize; 3], usize> = HashMap::new();
        self.element_facets = vec![[usize::MAX; 4]; self.elements.len()];
        for (k, elem) in self.elements.iter().enumerate() {
            for i in 0..=d {
                let mut key = [usize::MAX; 3];
                let mut w = 0;
                for (j, &v) in elem.iter().take(d + 1).enumerate() {
                    if j != i {
                        key[w] = v;
                        w += 1;
                    }
                }
                key[..d].sort_unstable();
                match lookup.get(&key) {
                    None => {
                        let idx = self.facets.len();
                        lookup.insert(key, idx);
                        self.facets.push(Facet {
                            vertices: key,
                            owner: (k, i),
                            neighbor: None,
                        });
                        self.element_facets[k][i] = idx;
                    }
                    Some(&idx) => {
                        let facet = &mut self.facets[idx];
                        if facet.neighbor.is_some() {
                            return Err(Error::NonmanifoldFacet(key));
                        }
                        facet.neighbor = Some((k, i));
                        self.element_facets[k][i] = idx;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn n_interior_facets(&self) -> usize {
        self.facets.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.vertices[v]
    }

    /// True iff a breadth-first walk over interior-facet adjacency reaches
    /// every element.
    pub fn check_connected(&self) -> bool {
        let n = self.elements.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for i in 0..=self.dim {
                let f = &self.facets[self.element_facets[k][i]];
                if let Some((a, _)) = f.neighbor {
                    let other = if f.owner.0 == k { a } else { f.owner.0 };
                    if !seen[other] {
                        seen[other] = true;
                        count += 1;
                        queue.push_back(other);
                    }
                }
            }
        }
        count == n
    }

    /// Computes all geometry quantities for element `k` from its vertex
    /// coordinates. Degenerate (zero-measure) elements are a distinct error.
    pub fn element_geometry(&self, k: usize) -> Result<ElementGeometry> {
        let d = self.dim;
        let elem = &self.elements[k];
        let mut verts = [[0.0; 3]; 4];
        for i in 0..=d {
            verts[i] = self.vertices[elem[i]];
        }
        element_geometry_from_vertices(d, &verts).map_err(|e| match e {
            Error::DegenerateElement { measure, .. } => Error::DegenerateElement { index: k, measure },
            other => other,
        })
    }

    /// Plain-text dump: header `dim n_vertices n_elements`, vertex lines,
    /// then element lines with 0-based indices.
    pub fn dump<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{} {} {}", self.dim, self.vertices.len(), self.elements.len())?;
        for v in &self.vertices {
            for c in 0..self.dim {
                if c > 0 {
                    write!(out, " ")?;
                }
                write!(out, "{:.17e}", v[c])?;
            }
            writeln!(out)?;
        }
        for e in &self.elements {
            for (i, v) in e.iter().take(self.dim + 1).enumerate() {
                if i > 0 {
                    write!(out, " ")?;
                }
                write!(out, "{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Parses the format written by [`Mesh::dump`].
    pub fn parse(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Config("empty mesh dump".into()))?;
        let mut it = header.split_whitespace();
        let parse_usize = |s: Option<&str>| -> Result<usize> {
            s.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Config("bad mesh dump header".into()))
        };
        let dim = parse_usize(it.next())?;
        let nv = parse_usize(it.next())?;
        let ne = parse_usize(it.next())?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| Error::Config("truncated mesh dump".into()))?;
            let mut v = [0.0; 3];
            for (c, tok) in line.split_whitespace().take(dim).enumerate() {
                v[c] = tok
                    .parse()
                    .map_err(|_| Error::Config(format!("bad vertex line: {line}")))?;
            }
            vertices.push(v);
        }
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let line = lines.next().ok_or_else(|| Error::Config("truncated mesh dump".into()))?;
            let mut e = [0usize; 4];
            for (c, tok) in line.split_whitespace().take(dim + 1).enumerate() {
                e[c] = tok
                    .parse()
                    .map_err(|_| Error::Config(format!("bad element line: {line}")))?;
            }
            elements.push(e);
        }
        Mesh::from_parts(dim, vertices, elements)
    }
}

/// Geometry of a standalone simplex (used by local-operator tests as well).
pub fn element_geometry_from_vertices(dim: usize, verts: &[[f64; 3]; 4]) -> Result<ElementGeometry> {
    let d = dim;
    let measure = match d {
        2 => {
            let a = sub(&verts[1], &verts[0]);
            let b = sub(&verts[2], &verts[0]);
            0.5 * (a[0] * b[1] - a[1] * b[0]).abs()
        }
        3 => {
            let a = sub(&verts[1], &verts[0]);
            let b = sub(&verts[2], &verts[0]);
            let c = sub(&verts[3], &verts[0]);
            dot(&a, &cross(&b, &c)).abs() / 6.0
        }
        _ => return Err(Error::InvalidDimension(d)),
    };
    let mut scale: f64 = 0.0;
    for i in 0..=d {
        for j in (i + 1)..=d {
            scale = scale.max(norm(&sub(&verts[i], &verts[j])));
        }
    }
    if measure <= 1e-14 * scale.powi(d as i32) {
        return Err(Error::DegenerateElement { index: usize::MAX, measure });
    }

    let mut barycenter = [0.0; 3];
    for v in verts.iter().take(d + 1) {
        for c in 0..3 {
            barycenter[c] += v[c] / (d as f64 + 1.0);
        }
    }

    // m_K in closed form: |K| / ((d+1)(d+2)) * sum_i |v_i - x_K|^2.
    let mut vertex_spread = 0.0;
    for v in verts.iter().take(d + 1) {
        let r = sub(v, &barycenter);
        vertex_spread += dot(&r, &r);
    }
    let second_moment = measure / (((d + 1) * (d + 2)) as f64) * vertex_spread;
    let c_k = d as f64 * measure / second_moment;

    let mut facet_measures = [0.0; 4];
    let mut facet_normals = [[0.0; 3]; 4];
    for i in 0..=d {
        let mut fv = [[0.0; 3]; 3];
        let mut w = 0;
        for (j, v) in verts.iter().take(d + 1).enumerate() {
            if j != i {
                fv[w] = *v;
                w += 1;
            }
        }
        let (meas, mut normal) = match d {
            2 => {
                let e = sub(&fv[1], &fv[0]);
                let len = norm(&e);
                (len, [e[1] / len, -e[0] / len, 0.0])
            }
            _ => {
                let c = cross(&sub(&fv[1], &fv[0]), &sub(&fv[2], &fv[0]));
                let len = norm(&c);
                (0.5 * len, [c[0] / len, c[1] / len, c[2] / len])
            }
        };
        // Outward: away from the opposite vertex.
        let mut centroid = [0.0; 3];
        for v in fv.iter().take(d) {
            for c in 0..3 {
                centroid[c] += v[c] / d as f64;
            }
        }
        if dot(&normal, &sub(&centroid, &verts[i])) < 0.0 {
            for c in normal.iter_mut() {
                *c = -*c;
            }
        }
        facet_measures[i] = meas;
        facet_normals[i] = normal;
    }

    Ok(ElementGeometry {
        dim: d,
        vertices: *verts,
        measure,
        barycenter,
        facet_measures,
        facet_normals,
        second_moment,
        c_k,
    })
}

/// Structured mesh of the unit square (`2n^2` triangles, each grid cell split
/// along the same diagonal) or unit cube (`6n^3` tetrahedra, Kuhn subdivision
/// of each cell). Element 0 is the designated `K_1` used by the pressure
/// regularization.
pub fn generate_structured_mesh(dim: usize, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivisions);
    }
    match dim {
        2 => generate_2d(n),
        3 => generate_3d(n),
        _ => Err(Error::InvalidDimension(dim)),
    }
}

fn generate_2d(n: usize) -> Result<Mesh> {
    let h = 1.0 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            elements.push([v00, v10, v11, usize::MAX]);
            elements.push([v00, v11, v01, usize::MAX]);
        }
    }
    Mesh::from_parts(2, vertices, elements)
}

fn generate_3d(n: usize) -> Result<Mesh> {
    let h = 1.0 / n as f64;
    let vid = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    // Kuhn subdivision: one tetrahedron per permutation of the axis order,
    // all sharing the cell's main diagonal.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut elements = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in &PERMS {
                    let mut p = [i, j, k];
                    let mut tet = [0usize; 4];
                    tet[0] = vid(p[0], p[1], p[2]);
                    for (step, &axis) in perm.iter().enumerate() {
                        p[axis] += 1;
                        tet[step + 1] = vid(p[0], p[1], p[2]);
                    }
                    elements.push(tet);
                }
            }
        }
    }
    Mesh::from_parts(3, vertices, elements)
}
