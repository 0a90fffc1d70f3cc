//! Geometric invariants: central points of face pairs, significant points
//! and their strengths, fold angles, and the denting operation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{IcoGraph, N};
use crate::error::{Error, Result};
use crate::realization::CoordinateMatrix;

/// Points closer than this are treated as the same vertex of a face pair.
const SAME_POINT: f64 = 1e-9;
/// Smallest singular value below which the pair's vertices are coplanar.
const PAIR_COPLANAR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTolerances {
    /// Consistency of the equidistance system and radius spreads.
    pub central: f64,
    /// Single-linkage radius for clustering central points.
    pub cluster: f64,
    /// Absolute tolerance on the common midpoint-sphere radius.
    pub radius: f64,
    /// Plane-fit threshold for the five neighbours of a dented vertex.
    pub coplanar: f64,
    /// Distance of a fold angle from `π` below which two faces are coplanar.
    pub flat: f64,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        InvariantTolerances {
            central: 1e-9,
            cluster: 1e-6,
            radius: 1e-7,
            coplanar: 1e-7,
            flat: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralPoint {
    pub point: [f64; 3],
    pub vertex_radius: f64,
    pub midpoint_radius: f64,
    pub pair: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificantPoint {
    pub point: [f64; 3],
    pub strength: usize,
    /// Member faces as indices into the face list, ascending.
    pub faces: Vec<usize>,
    pub vertex_radius: f64,
    pub midpoint_radius: f64,
    /// Strength 2 with the two faces sharing an edge.
    pub trivial: bool,
}

pub type Triangle = [Vector3<f64>; 3];

pub fn face_triangle(m: &CoordinateMatrix, face: &[usize; 3]) -> Triangle {
    [m.vertex(face[0]), m.vertex(face[1]), m.vertex(face[2])]
}

fn incenter(t: &Triangle) -> Vector3<f64> {
    let a = (t[1] - t[2]).norm();
    let b = (t[0] - t[2]).norm();
    let c = (t[0] - t[1]).norm();
    (t[0] * a + t[1] * b + t[2] * c) / (a + b + c)
}

fn midpoints(t: &Triangle) -> [Vector3<f64>; 3] {
    [
        (t[0] + t[1]) * 0.5,
        (t[1] + t[2]) * 0.5,
        (t[0] + t[2]) * 0.5,
    ]
}

fn spread(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
        n += 1;
    }
    (hi - lo, sum / n as f64)
}

/// The point in the affine span of two triangles that is equidistant from
/// all their vertices and from all their edge midpoints, if it exists.
///
/// Returns `None` when the incircle centers coincide, when the equidistance
/// system is inconsistent (for instance coplanar faces sharing an edge), or
/// when the radii disagree beyond `tol`.
pub fn central_point(t1: &Triangle, t2: &Triangle, tol: f64) -> Option<(Vector3<f64>, f64, f64)> {
    if (incenter(t1) - incenter(t2)).norm() < SAME_POINT {
        return None;
    }
    let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(6);
    for p in t1.iter().chain(t2.iter()) {
        if pts.iter().all(|q| (p - q).norm() > SAME_POINT) {
            pts.push(*p);
        }
    }
    let n = pts.len();
    let centroid = pts.iter().sum::<Vector3<f64>>() / n as f64;
    let spread_m = DMatrix::from_fn(n, 3, |i, j| pts[i][j] - centroid[j]);
    let svd = spread_m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let coplanar = svd.singular_values[order[2]] < PAIR_COPLANAR;
    // Unknowns: P = centroid + B·x with B spanning the affine directions.
    let dirs: Vec<Vector3<f64>> = if coplanar {
        order[..2]
            .iter()
            .map(|&k| Vector3::new(v_t[(k, 0)], v_t[(k, 1)], v_t[(k, 2)]))
            .collect()
    } else {
        vec![Vector3::x(), Vector3::y(), Vector3::z()]
    };
    let rows = n - 1;
    let a = DMatrix::from_fn(rows, dirs.len(), |k, j| {
        2.0 * (pts[k + 1] - pts[0]).dot(&dirs[j])
    });
    let rhs = DVector::from_fn(rows, |k, _| {
        (pts[k + 1] - centroid).norm_squared() - (pts[0] - centroid).norm_squared()
    });
    let lsq = a.clone().svd(true, true);
    let smax = lsq.singular_values.max();
    let x = lsq.solve(&rhs, 1e-12 * smax.max(1.0)).ok()?;
    let p = centroid
        + dirs
            .iter()
            .zip(x.iter())
            .map(|(d, xi)| d * *xi)
            .sum::<Vector3<f64>>();
    if (&a * &x - &rhs).amax() > tol {
        return None;
    }
    let (vspread, vr) = spread(pts.iter().map(|q| (q - p).norm()));
    let mids: Vec<Vector3<f64>> = midpoints(t1).into_iter().chain(midpoints(t2)).collect();
    let (mspread, mr) = spread(mids.iter().map(|q| (q - p).norm()));
    if vspread > tol || mspread > tol {
        return None;
    }
    Some((p, vr, mr))
}

/// Central points of all face pairs, in lexicographic pair order.
pub fn central_points(m: &CoordinateMatrix, graph: &IcoGraph, tol: f64) -> Vec<CentralPoint> {
    let tris: Vec<Triangle> = graph.faces().iter().map(|f| face_triangle(m, f)).collect();
    let mut out = Vec::new();
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            if let Some((p, vr, mr)) = central_point(&tris[i], &tris[j], tol) {
                out.push(CentralPoint {
                    point: [p.x, p.y, p.z],
                    vertex_radius: vr,
                    midpoint_radius: mr,
                    pair: (i, j),
                });
            }
        }
    }
    out
}

fn shares_edge(f: &[usize; 3], g: &[usize; 3]) -> bool {
    f.iter().filter(|v| g.contains(v)).count() == 2
}

/// Significant points: central points grouped by location (single linkage)
/// and common midpoint-sphere radius, with the union of their faces.
pub fn significant_points(
    m: &CoordinateMatrix,
    graph: &IcoGraph,
    tol: &InvariantTolerances,
) -> Vec<SignificantPoint> {
    let cps = central_points(m, graph, tol.central);
    let n = cps.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let vec = |c: &CentralPoint| Vector3::from(c.point);
    for i in 0..n {
        for j in i + 1..n {
            if (vec(&cps[i]) - vec(&cps[j])).norm() < tol.cluster
                && (cps[i].midpoint_radius - cps[j].midpoint_radius).abs() < tol.radius
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let faces = graph.faces();
    let mut out: Vec<SignificantPoint> = groups
        .into_iter()
        .map(|(_, members)| {
            let mut fs: Vec<usize> = members
                .iter()
                .flat_map(|&k| [cps[k].pair.0, cps[k].pair.1])
                .collect();
            fs.sort_unstable();
            fs.dedup();
            let count = members.len() as f64;
            let mean = |f: &dyn Fn(&CentralPoint) -> f64| {
                members.iter().map(|&k| f(&cps[k])).sum::<f64>() / count
            };
            let point = [
                mean(&|c| c.point[0]),
                mean(&|c| c.point[1]),
                mean(&|c| c.point[2]),
            ];
            let trivial = fs.len() == 2 && shares_edge(&faces[fs[0]], &faces[fs[1]]);
            SignificantPoint {
                point,
                strength: fs.len(),
                vertex_radius: mean(&|c| c.vertex_radius),
                midpoint_radius: mean(&|c| c.midpoint_radius),
                faces: fs,
                trivial,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.strength
            .cmp(&a.strength)
            .then_with(|| a.faces.cmp(&b.faces))
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrengthSum {
    /// Sum of all strengths.
    pub total: usize,
    /// Whether the member-face sets partition the 20 faces.
    pub partition: bool,
    /// Sum over non-trivial points only.
    pub nontrivial_total: usize,
    pub nontrivial_partition: bool,
}

fn is_partition<'a>(sets: impl Iterator<Item = &'a Vec<usize>>, n_faces: usize) -> bool {
    let mut seen = vec![0usize; n_faces];
    for s in sets {
        for &f in s {
            if f >= n_faces {
                return false;
            }
            seen[f] += 1;
        }
    }
    seen.iter().all(|&c| c == 1)
}

pub fn strength_sum(points: &[SignificantPoint]) -> StrengthSum {
    let nontrivial = || points.iter().filter(|p| !p.trivial);
    StrengthSum {
        total: points.iter().map(|p| p.strength).sum(),
        partition: is_partition(points.iter().map(|p| &p.faces), 20),
        nontrivial_total: nontrivial().map(|p| p.strength).sum(),
        nontrivial_partition: is_partition(nontrivial().map(|p| &p.faces), 20),
    }
}

/// Fold angle at the edge shared by two faces, in `(0, 2π)`, measured on
/// the side given by the combinatorial orientation; `π` means coplanar.
pub fn fold_angle(m: &CoordinateMatrix, oriented: &[usize; 3], other: &[usize; 3]) -> f64 {
    let shared: Vec<usize> = oriented
        .iter()
        .copied()
        .filter(|v| other.contains(v))
        .collect();
    assert_eq!(shared.len(), 2, "faces must share an edge");
    let apex1 = oriented
        .iter()
        .copied()
        .find(|v| !shared.contains(v))
        .unwrap();
    let apex2 = other.iter().copied().find(|v| !shared.contains(v)).unwrap();
    let t = face_triangle(m, oriented);
    let normal = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
    let mid = (m.vertex(shared[0]) + m.vertex(shared[1])) * 0.5;
    let away = (mid - m.vertex(apex1)).normalize();
    let w = m.vertex(apex2) - mid;
    let fold = w.dot(&normal).atan2(w.dot(&away));
    PI - fold
}

/// Fold angles of each face towards its three neighbours, in the order of
/// the face list; entries are `(neighbour face, angle)`.
pub fn face_fold_angles(m: &CoordinateMatrix, graph: &IcoGraph) -> Vec<Vec<(usize, f64)>> {
    let oriented = graph.oriented_faces();
    let faces = graph.faces();
    (0..faces.len())
        .map(|i| {
            (0..faces.len())
                .filter(|&j| j != i && shares_edge(&faces[i], &faces[j]))
                .map(|j| (j, fold_angle(m, &oriented[i], &faces[j])))
                .collect()
        })
        .collect()
}

/// Number of neighbouring face pairs lying in a common plane.
pub fn coplanar_neighbor_pairs(m: &CoordinateMatrix, graph: &IcoGraph, flat_tol: f64) -> usize {
    face_fold_angles(m, graph)
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().filter(move |(j, _)| *j > i))
        .filter(|(_, angle)| (angle - PI).abs() < flat_tol)
        .count()
}

/// Faces whose three fold angles agree (within `tol`) and differ from `π`
/// but which belong to no significant point of strength at least 4.
pub fn face_angle_rule_violations(
    m: &CoordinateMatrix,
    graph: &IcoGraph,
    points: &[SignificantPoint],
    tol: f64,
) -> Vec<usize> {
    face_fold_angles(m, graph)
        .iter()
        .enumerate()
        .filter(|(_, row)| {
            let a0 = row[0].1;
            (a0 - PI).abs() > tol && row.iter().all(|(_, a)| (a - a0).abs() < tol)
        })
        .map(|(i, _)| i)
        .filter(|i| {
            !points
                .iter()
                .any(|p| p.strength >= 4 && p.faces.contains(i))
        })
        .collect()
}

/// Reflects vertex `v` across the plane of its five neighbours and
/// re-centers. Edge lengths are preserved since the neighbours are fixed.
pub fn dent(
    m: &CoordinateMatrix,
    v: usize,
    graph: &IcoGraph,
    tol: f64,
) -> Result<CoordinateMatrix> {
    let nbrs = graph.neighbors(v);
    let pts: Vec<Vector3<f64>> = nbrs.iter().map(|&w| m.vertex(w)).collect();
    let c = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in &pts {
        cov += (p - c) * (p - c).transpose();
    }
    let eig = cov.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let residual = eig.eigenvalues[k].max(0.0).sqrt();
    if residual >= tol {
        return Err(Error::NotCoplanar {
            vertex: v + 1,
            residual,
        });
    }
    let normal = eig.eigenvectors.column(k).into_owned();
    let p = m.vertex(v);
    let offset = (p - c).dot(&normal);
    if (2.0 * offset).abs() < tol {
        return Err(Error::DegenerateResult { vertex: v + 1 });
    }
    let mut out = m.clone();
    out.set_vertex(v, &(p - normal * (2.0 * offset)));
    Ok(out.centered())
}

/// A named dent construction.
#[derive(Clone, Debug)]
pub struct DentedClass {
    pub name: &'static str,
    /// Dented vertices in order of application (0-based).
    pub vertices: Vec<usize>,
    pub coords: CoordinateMatrix,
}

/// The four constructions from a regular icosahedron: one dent; two dents
/// at distance 2; two dents at distance 3; three dents pairwise at
/// distance 2.
pub fn dent_family(
    regular: &CoordinateMatrix,
    graph: &IcoGraph,
    tol: f64,
) -> Result<Vec<DentedClass>> {
    let v = 0;
    let at_two = (0..N)
        .find(|&w| graph.distance(v, w) == 2)
        .expect("distance-2 vertex");
    let anti = graph.antipode(v);
    let triple = (0..N)
        .flat_map(|p| (p + 1..N).map(move |q| (p, q)))
        .find(|&(p, q)| {
            graph.distance(v, p) == 2 && graph.distance(v, q) == 2 && graph.distance(p, q) == 2
        })
        .map(|(p, q)| vec![v, p, q])
        .expect("triangle of distance-2 vertices");
    let specs: [(&'static str, Vec<usize>); 4] = [
        ("single", vec![v]),
        ("double-distance-2", vec![v, at_two]),
        ("double-distance-3", vec![v, anti]),
        ("triple-distance-2", triple),
    ];
    specs
        .into_iter()
        .map(|(name, vertices)| {
            let mut coords = regular.clone();
            for &w in &vertices {
                coords = dent(&coords, w, graph, tol)?;
            }
            Ok(DentedClass {
                name,
                vertices,
                coords,
            })
        })
        .collect()
}
