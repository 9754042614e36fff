//! Triangle meshes of closed convex surfaces embedded either in the round
//! 3-sphere of curvature kappa (as unit quaternions scaled to radius
//! 1/sqrt(kappa) in R^4) or in flat R^3 (sanity mode, embedded in the last
//! three coordinates of R^4).
//!
//! Topology comes from subdivided icosahedra, cached per level. Mean
//! curvature is estimated by the cotangent-weight mean-curvature normal
//! projected onto the surface normal: the ambient-sphere correction to the
//! Laplacian of the position is radial and drops under that projection, so
//! the same estimator serves both ambients. The smallest principal
//! curvature is attached analytically by the generator (umbilic value for
//! geodesic spheres, interpolated profile curvature for rotationally
//! symmetric graphs), since the inequality checks need it signed and the
//! cotangent estimator only gives the trace.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::flow::{profile_geometry, AxisymmetricProfile};
use crate::orbifold::METRIC_MARGIN;
use crate::su2::{quaternion_multiply, GroupElement};

/// Highest cached subdivision level (10242 vertices, 20480 faces).
pub const MAX_MESH_LEVEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ambient {
    /// Round 3-sphere of sectional curvature kappa > 0.
    Sphere3 { kappa: f64 },
    /// Flat R^3, used only as a sanity target for the discrete operators.
    Euclidean3,
}

/// Icosphere connectivity plus unit directions, shared across generators.
struct IcoTopology {
    dirs: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

fn base_icosahedron() -> IcoTopology {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let dirs = raw.iter().map(|v| normalize3(*v)).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    IcoTopology { dirs, faces }
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn subdivide(coarse: &IcoTopology) -> IcoTopology {
    let mut dirs = coarse.dirs.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces = Vec::with_capacity(coarse.faces.len() * 4);
    let mut mid = |a: usize, b: usize, dirs: &mut Vec<[f64; 3]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let pa = dirs[a];
            let pb = dirs[b];
            dirs.push(normalize3([pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
            dirs.len() - 1
        })
    };
    for &[a, b, c] in &coarse.faces {
        let ab = mid(a, b, &mut dirs);
        let bc = mid(b, c, &mut dirs);
        let ca = mid(c, a, &mut dirs);
        faces.push([a, ab, ca]);
        faces.push([b, bc, ab]);
        faces.push([c, ca, bc]);
        faces.push([ab, bc, ca]);
    }
    IcoTopology { dirs, faces }
}

fn icosphere(level: usize) -> Result<&'static IcoTopology> {
    static CACHE: [OnceLock<IcoTopology>; MAX_MESH_LEVEL + 1] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    if level > MAX_MESH_LEVEL {
        return Err(Error::PreconditionViolated(format!(
            "mesh level {level} exceeds maximum {MAX_MESH_LEVEL}"
        )));
    }
    Ok(CACHE[level].get_or_init(|| {
        if level == 0 {
            base_icosahedron()
        } else {
            subdivide(icosphere(level - 1).expect("level below maximum"))
        }
    }))
}

/// Closed oriented triangle mesh with the per-vertex data the analytic
/// checks consume. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MeshedHypersurface {
    ambient: Ambient,
    vertices: Vec<[f64; 4]>,
    faces: Vec<[usize; 3]>,
    normals: Vec<[f64; 4]>,
    h: Vec<f64>,
    lambda1: Vec<f64>,
    vertex_areas: Vec<f64>,
    face_areas: Vec<f64>,
    total_area: f64,
}

impl MeshedHypersurface {
    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[[f64; 4]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> &[[f64; 4]] {
        &self.normals
    }

    /// Discrete mean curvature (sum of principal curvatures), positive for
    /// spheres with the outward normal, i.e. the flow engine's convention.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Smallest principal curvature, attached analytically by the generator.
    pub fn lambda1(&self) -> &[f64] {
        &self.lambda1
    }

    /// Mixed Voronoi vertex areas; they partition the total area.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Per-face norm of the linear-interpolation gradient of a per-vertex
    /// function. Solves the 2x2 Gram system of the two edge vectors, so it
    /// works for faces embedded in R^4.
    pub fn face_gradient_norm(&self, values: &[f64], face: usize) -> f64 {
        let [a, b, c] = self.faces[face];
        let u = sub4(self.vertices[b], self.vertices[a]);
        let v = sub4(self.vertices[c], self.vertices[a]);
        let guu = dot4(u, u);
        let guv = dot4(u, v);
        let gvv = dot4(v, v);
        let det = guu * gvv - guv * guv;
        let r1 = values[b] - values[a];
        let r2 = values[c] - values[a];
        let c1 = (gvv * r1 - guv * r2) / det;
        let c2 = (guu * r2 - guv * r1) / det;
        // grad . grad = c^T G c = c^T rhs for the Gram solve.
        (c1 * r1 + c2 * r2).max(0.0).sqrt()
    }

    /// Geodesic distance from an ambient base point to the farthest vertex.
    pub fn max_distance_from(&self, x0: &GroupElement) -> f64 {
        let mut max_d = 0.0f64;
        match self.ambient {
            Ambient::Sphere3 { kappa } => {
                let radius = 1.0 / kappa.sqrt();
                let q0 = x0.components();
                for p in &self.vertices {
                    let cos = (dot4(*p, q0) / radius).clamp(-1.0, 1.0);
                    max_d = max_d.max(radius * cos.acos());
                }
            }
            Ambient::Euclidean3 => {
                let c = x0.components();
                for p in &self.vertices {
                    let d = ((p[1] - c[1]).powi(2)
                        + (p[2] - c[2]).powi(2)
                        + (p[3] - c[3]).powi(2))
                    .sqrt();
                    max_d = max_d.max(d);
                }
            }
        }
        max_d
    }
}

fn dot4(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn sub4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn scale4(a: [f64; 4], s: f64) -> [f64; 4] {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

fn add4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Triangle area from edge vectors via the Gram determinant (valid in R^4).
fn triangle_area(u: [f64; 4], v: [f64; 4]) -> f64 {
    let guu = dot4(u, u);
    let guv = dot4(u, v);
    let gvv = dot4(v, v);
    0.5 * (guu * gvv - guv * guv).max(0.0).sqrt()
}

/// Validates closedness and consistent orientation: every directed edge must
/// appear exactly once.
fn check_closed_oriented(n_vertices: usize, faces: &[[usize; 3]]) -> Result<()> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
    for f in faces {
        for k in 0..3 {
            let e = (f[k], f[(k + 1) % 3]);
            *seen.entry(e).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &seen {
        if count != 1 || !seen.contains_key(&(b, a)) {
            return Err(Error::PreconditionViolated(format!(
                "mesh not closed/oriented at edge ({a}, {b})"
            )));
        }
    }
    let n_edges = seen.len() / 2;
    let euler = n_vertices as i64 - n_edges as i64 + faces.len() as i64;
    if euler != 2 {
        return Err(Error::PreconditionViolated(format!(
            "Euler characteristic {euler}, expected 2"
        )));
    }
    Ok(())
}

/// Assembles areas and the cotangent mean curvature for given vertex data.
fn build_mesh(
    ambient: Ambient,
    vertices: Vec<[f64; 4]>,
    faces: Vec<[usize; 3]>,
    normals: Vec<[f64; 4]>,
    lambda1: Vec<f64>,
) -> Result<MeshedHypersurface> {
    check_closed_oriented(vertices.len(), &faces)?;
    let nv = vertices.len();
    let mut vertex_areas = vec![0.0f64; nv];
    let mut face_areas = Vec::with_capacity(faces.len());
    let mut laplacian = vec![[0.0f64; 4]; nv];

    for f in &faces {
        let p = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        let area = triangle_area(sub4(p[1], p[0]), sub4(p[2], p[0]));
        if !(area > 0.0) {
            return Err(Error::PreconditionViolated(
                "degenerate face with zero area".into(),
            ));
        }
        face_areas.push(area);

        // Cotangent of the interior angle at each corner.
        let mut cot = [0.0f64; 3];
        let mut obtuse = None;
        for k in 0..3 {
            let u = sub4(p[(k + 1) % 3], p[k]);
            let v = sub4(p[(k + 2) % 3], p[k]);
            let d = dot4(u, v);
            cot[k] = d / (2.0 * area);
            if d < 0.0 {
                obtuse = Some(k);
            }
        }

        // Cotangent Laplacian contribution: the edge opposite corner k gets
        // weight cot[k] / 2 from this face.
        for k in 0..3 {
            let b = f[(k + 1) % 3];
            let c = f[(k + 2) % 3];
            let w = 0.5 * cot[k];
            let d_bc = sub4(p[(k + 2) % 3], p[(k + 1) % 3]);
            laplacian[b] = add4(laplacian[b], scale4(d_bc, w));
            laplacian[c] = add4(laplacian[c], scale4(d_bc, -w));
        }

        // Mixed Voronoi areas: circumcentric for non-obtuse faces, halved
        // at the obtuse corner otherwise.
        match obtuse {
            None => {
                for k in 0..3 {
                    let e1 = sub4(p[(k + 1) % 3], p[k]);
                    let e2 = sub4(p[(k + 2) % 3], p[k]);
                    let part = (dot4(e1, e1) * cot[(k + 2) % 3]
                        + dot4(e2, e2) * cot[(k + 1) % 3])
                        / 8.0;
                    vertex_areas[f[k]] += part;
                }
            }
            Some(j) => {
                for k in 0..3 {
                    vertex_areas[f[k]] += if k == j { area / 2.0 } else { area / 4.0 };
                }
            }
        }
    }

    let mut h = Vec::with_capacity(nv);
    for i in 0..nv {
        if !(vertex_areas[i] > 0.0) {
            return Err(Error::PreconditionViolated(format!(
                "non-positive area weight at vertex {i}"
            )));
        }
        // Mean curvature normal: -L x / A approximates H nu_out with the
        // convex-positive sign; ambient-sphere radial terms are killed by
        // the projection since <x, nu> = 0.
        h.push(-dot4(laplacian[i], normals[i]) / vertex_areas[i]);
    }

    let total_area: f64 = face_areas.iter().sum();
    Ok(MeshedHypersurface {
        ambient,
        vertices,
        faces,
        normals,
        h,
        lambda1,
        vertex_areas,
        face_areas,
        total_area,
    })
}

fn check_sphere_radius(r: f64, kappa: f64) -> Result<()> {
    crate::flow::check_kappa(kappa)?;
    let hi = std::f64::consts::PI / kappa.sqrt();
    if !(r > 0.0 && r < hi * (1.0 - 1e-12)) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            lo: 0.0,
            hi,
        });
    }
    Ok(())
}

/// Embedding of the point at geodesic distance r from x0 in direction d
/// (unit imaginary), together with the outward unit normal there.
fn sphere_point_normal(
    q0: [f64; 4],
    d: [f64; 3],
    r: f64,
    kappa: f64,
) -> ([f64; 4], [f64; 4]) {
    let sk = kappa.sqrt();
    let radius = 1.0 / sk;
    let (s, c) = (sk * r).sin_cos();
    let qd = quaternion_multiply(q0, [0.0, d[0], d[1], d[2]]);
    let point = add4(scale4(q0, radius * c), scale4(qd, radius * s));
    let normal = add4(scale4(q0, -s), scale4(qd, c));
    (point, normal)
}

/// Geodesic sphere of radius r about x0 in the round 3-sphere of curvature
/// kappa. Umbilic: lambda1 = sqrt(kappa) * cot(sqrt(kappa) r) analytically.
pub fn geodesic_sphere_mesh(
    x0: &GroupElement,
    r: f64,
    kappa: f64,
    level: usize,
) -> Result<MeshedHypersurface> {
    check_sphere_radius(r, kappa)?;
    let topo = icosphere(level)?;
    let q0 = x0.components();
    let sk = kappa.sqrt();
    let lambda = sk * (sk * r).cos() / (sk * r).sin();
    let mut vertices = Vec::with_capacity(topo.dirs.len());
    let mut normals = Vec::with_capacity(topo.dirs.len());
    for d in &topo.dirs {
        let (p, n) = sphere_point_normal(q0, *d, r, kappa);
        vertices.push(p);
        normals.push(n);
    }
    build_mesh(
        Ambient::Sphere3 { kappa },
        vertices,
        topo.faces.clone(),
        normals,
        vec![lambda; topo.dirs.len()],
    )
}

/// Rotationally symmetric radial graph about x0: geodesic radius profile.r
/// as a function of the polar angle psi measured from the first imaginary
/// axis (the axis the cyclic quotients rotate about). The exact outward
/// normal tilts within the (radial, polar) plane by phi = atan(r' / sn(r)).
/// lambda1 is interpolated from the profile's principal curvatures.
pub fn profile_mesh(
    x0: &GroupElement,
    profile: &AxisymmetricProfile,
    kappa: f64,
    level: usize,
) -> Result<MeshedHypersurface> {
    let geometry = profile_geometry(profile, kappa)?;
    let topo = icosphere(level)?;
    let q0 = x0.components();
    let sk = kappa.sqrt();
    let radius = 1.0 / sk;
    let grid = profile.r();
    let n = grid.len();
    let h_psi = profile.h_step();
    let lambda_node: Vec<f64> = (0..n)
        .map(|i| geometry.lambda1[i].min(geometry.lambda2[i]))
        .collect();
    // One-sided slopes at the poles vanish by the Neumann regularity
    // condition; interior slopes are central.
    let slope = |i: usize| -> f64 {
        if i == 0 || i == n - 1 {
            0.0
        } else {
            (grid[i + 1] - grid[i - 1]) / (2.0 * h_psi)
        }
    };

    let mut vertices = Vec::with_capacity(topo.dirs.len());
    let mut normals = Vec::with_capacity(topo.dirs.len());
    let mut lambda1 = Vec::with_capacity(topo.dirs.len());
    for d in &topo.dirs {
        let cos_psi = d[0].clamp(-1.0, 1.0);
        let psi = cos_psi.acos();
        // Fractional grid position; linear interpolation of r, slope, lambda.
        let x = psi / h_psi;
        let i0 = (x.floor() as usize).min(n - 2);
        let t = (x - i0 as f64).clamp(0.0, 1.0);
        let r_here = grid[i0] * (1.0 - t) + grid[i0 + 1] * t;
        let rp_here = slope(i0) * (1.0 - t) + slope(i0 + 1) * t;
        let lam_here = lambda_node[i0] * (1.0 - t) + lambda_node[i0 + 1] * t;

        let (s, c) = (sk * r_here).sin_cos();
        let qd = quaternion_multiply(q0, [0.0, d[0], d[1], d[2]]);
        let point = add4(scale4(q0, radius * c), scale4(qd, radius * s));

        // Unit vector in the polar direction (d rotated toward the axis).
        let sin_psi = (1.0 - cos_psi * cos_psi).max(0.0).sqrt();
        // d = cos(psi) a + sin(psi) u with a the polar axis and u the unit
        // azimuthal foot; the polar coordinate direction is
        // e_psi = -sin(psi) a + cos(psi) u.
        let e_psi3 = if sin_psi > 1e-12 {
            let inv = 1.0 / sin_psi;
            [-sin_psi, cos_psi * d[1] * inv, cos_psi * d[2] * inv]
        } else {
            [0.0, 0.0, 0.0]
        };
        let q_epsi = quaternion_multiply(q0, [0.0, e_psi3[0], e_psi3[1], e_psi3[2]]);

        // Graph normal: rotate the radial direction against the psi-tangent:
        // nu = (sn * nu_radial - r' * e_psi_ambient) / sqrt(r'^2 + sn^2),
        // with sn = sin(sk r)/sk and e_psi_ambient the unit psi-coordinate
        // direction on the geodesic sphere of radius r_here.
        let nu_radial = add4(scale4(q0, -s), scale4(qd, c));
        let sn = s / sk;
        let w = (rp_here * rp_here + sn * sn).sqrt();
        let normal = if sin_psi > 1e-12 {
            add4(scale4(nu_radial, sn / w), scale4(q_epsi, -rp_here / w))
        } else {
            nu_radial
        };
        vertices.push(point);
        normals.push(normal);
        lambda1.push(lam_here);
    }
    build_mesh(
        Ambient::Sphere3 { kappa },
        vertices,
        topo.faces.clone(),
        normals,
        lambda1,
    )
}

/// Round 2-sphere of the given Euclidean radius, flat-ambient sanity mode.
pub fn euclidean_sphere_mesh(radius: f64, level: usize) -> Result<MeshedHypersurface> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::OutOfRange {
            name: "radius",
            value: radius,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let topo = icosphere(level)?;
    let mut vertices = Vec::with_capacity(topo.dirs.len());
    let mut normals = Vec::with_capacity(topo.dirs.len());
    for d in &topo.dirs {
        vertices.push([0.0, radius * d[0], radius * d[1], radius * d[2]]);
        normals.push([0.0, d[0], d[1], d[2]]);
    }
    build_mesh(
        Ambient::Euclidean3,
        vertices,
        topo.faces.clone(),
        normals,
        vec![1.0 / radius; topo.dirs.len()],
    )
}

/// Ball-inclusion condition: every vertex strictly inside the geodesic ball
/// of radius pi/b about x0, with a metric margin. Injectivity of the
/// exponential map on that ball is automatic below the cut radius in
/// constant positive curvature.
pub fn check_ball_condition(mesh: &MeshedHypersurface, x0: &GroupElement, b: f64) -> bool {
    debug_assert!(b > 0.0, "ball condition needs a real positive b");
    mesh.max_distance_from(x0) < std::f64::consts::PI / b - METRIC_MARGIN
}
