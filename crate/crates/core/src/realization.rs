//! Coordinate matrices, Gram matrices and the action of `A` on them.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SMatrix, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{AutGroup, IcoGraph, Perm, N};
use crate::error::{Error, Result};

pub type Mat3x12 = SMatrix<f64, 3, N>;
pub type Mat12 = SMatrix<f64, N, N>;

/// Numerical thresholds shared by the whole pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Maximum |edge residual| for accepting a solution.
    pub residual: f64,
    /// Minimum pairwise vertex distance for "twelve different vertices".
    pub distinct: f64,
    /// Eigenvalue threshold for semidefiniteness and rank.
    pub psd: f64,
    /// Entrywise threshold for Gram-matrix equality under permutation.
    pub equivalence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-8,
            distinct: 1e-5,
            psd: 1e-9,
            equivalence: 1e-6,
        }
    }
}

/// A 3×12 matrix whose columns are the vertices `V_1, …, V_12`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMatrix(Mat3x12);

impl CoordinateMatrix {
    pub fn new(m: Mat3x12) -> Self {
        CoordinateMatrix(m)
    }

    pub fn zeros() -> Self {
        CoordinateMatrix(Mat3x12::zeros())
    }

    pub fn from_columns(cols: &[[f64; 3]; N]) -> Self {
        CoordinateMatrix(Mat3x12::from_fn(|r, c| cols[c][r]))
    }

    pub fn to_columns(&self) -> [[f64; 3]; N] {
        let mut out = [[0.0; 3]; N];
        for (c, col) in out.iter_mut().enumerate() {
            for (r, x) in col.iter_mut().enumerate() {
                *x = self.0[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Mat3x12 {
        &self.0
    }

    pub fn vertex(&self, i: usize) -> Vector3<f64> {
        self.0.column(i).into_owned()
    }

    pub fn set_vertex(&mut self, i: usize, v: &Vector3<f64>) {
        self.0.set_column(i, v);
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.0.column_mean()
    }

    /// Translates so that the center of mass is the origin.
    pub fn centered(&self) -> Self {
        let c = self.centroid();
        let mut m = self.0;
        for mut col in m.column_iter_mut() {
            col -= c;
        }
        CoordinateMatrix(m)
    }

    /// `M·π(g)`: column `j` becomes `V_{g(j)}`.
    pub fn permuted(&self, g: &Perm) -> Self {
        CoordinateMatrix(Mat3x12::from_fn(|r, c| self.0[(r, g.apply(c))]))
    }

    /// `R·M`.
    pub fn transformed(&self, rot: &Matrix3<f64>) -> Self {
        CoordinateMatrix(rot * self.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoordinateMatrix(self.0 * s)
    }

    pub fn min_vertex_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..N {
            for j in i + 1..N {
                best = best.min((self.vertex(i) - self.vertex(j)).norm());
            }
        }
        best
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [f64; 3] {
        let sv = self.0.svd(false, false).singular_values;
        let mut s = [sv[0], sv[1], sv[2]];
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Numerical rank with a relative threshold on singular values.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.singular_values();
        if s[0] == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x > rel_tol * s[0]).count()
    }
}

/// Symmetric 12×12 matrix `G = MᵀM`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix(Mat12);

impl GramMatrix {
    pub fn new(m: Mat12) -> Self {
        GramMatrix(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        if rows.len() != N || rows.iter().any(|r| r.len() != N) {
            return None;
        }
        Some(GramMatrix(Mat12::from_fn(|i, j| rows[i][j])))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..N)
            .map(|i| (0..N).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn matrix(&self) -> &Mat12 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `π(g)ᵀ·G·π(g)`, i.e. the entries `G[g(i), g(j)]`.
    pub fn act(&self, g: &Perm) -> Self {
        GramMatrix(Mat12::from_fn(|i, j| self.0[(g.apply(i), g.apply(j))]))
    }

    /// `max |(π(g)ᵀ·G·π(g)) − other|`, stopping early once `cutoff` is exceeded.
    pub fn action_deviation(&self, g: &Perm, other: &GramMatrix, cutoff: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..N {
            let gi = g.apply(i);
            for j in i..N {
                let dev = (self.0[(gi, g.apply(j))] - other.0[(i, j)]).abs();
                if dev > worst {
                    worst = dev;
                    if worst > cutoff {
                        return worst;
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &GramMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; N] {
        let eig = SymmetricEigen::new(self.0);
        let mut ev = [0.0; N];
        ev.copy_from_slice(eig.eigenvalues.as_slice());
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0 - self.0.transpose()).abs().max() <= tol
    }
}

pub fn gram_from_coords(m: &CoordinateMatrix) -> GramMatrix {
    GramMatrix(m.0.transpose() * m.0)
}

/// Rank-3 factorization `G = MᵀM` from the top three eigenpairs.
///
/// Unique up to left multiplication by an orthogonal 3×3 matrix.
pub fn coords_from_gram(g: &GramMatrix, psd_tol: f64) -> Result<CoordinateMatrix> {
    let sym = (g.0 + g.0.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let smallest = eig.eigenvalues[order[N - 1]];
    if smallest < -psd_tol {
        return Err(Error::NotPsd {
            eigenvalue: smallest,
        });
    }
    let fourth = eig.eigenvalues[order[3]];
    if fourth > psd_tol {
        return Err(Error::RankExceeded { eigenvalue: fourth });
    }
    let mut m = Mat3x12::zeros();
    for r in 0..3 {
        let lambda = eig.eigenvalues[order[r]].max(0.0);
        let v = eig.eigenvectors.column(order[r]);
        for c in 0..N {
            m[(r, c)] = lambda.sqrt() * v[c];
        }
    }
    Ok(CoordinateMatrix(m))
}

/// `|V_i − V_j|² − 1` for every edge, in canonical edge order.
pub fn edge_residuals(m: &CoordinateMatrix, graph: &IcoGraph) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|&(i, j)| (m.vertex(i) - m.vertex(j)).norm_squared() - 1.0)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcosahedronCheck {
    pub is_icosahedron: bool,
    pub max_residual: f64,
    pub min_distance: f64,
    pub centroid_norm: f64,
}

pub fn is_icosahedron(
    m: &CoordinateMatrix,
    graph: &IcoGraph,
    tol: &Tolerances,
) -> IcosahedronCheck {
    let max_residual = edge_residuals(m, graph)
        .iter()
        .fold(0.0f64, |acc, r| acc.max(r.abs()));
    let min_distance = m.min_vertex_distance();
    let centroid_norm = (m.centroid() * N as f64).norm();
    IcosahedronCheck {
        is_icosahedron: max_residual < tol.residual
            && min_distance > tol.distinct
            && centroid_norm < tol.residual,
        max_residual,
        min_distance,
        centroid_norm,
    }
}

/// First `g ∈ A` (in group order) with `π(g)ᵀ·G1·π(g) = G2` within `tol`.
pub fn gram_equivalent(
    g1: &GramMatrix,
    g2: &GramMatrix,
    group: &AutGroup,
    tol: f64,
) -> Option<Perm> {
    if (g1.trace() - g2.trace()).abs() > N as f64 * tol {
        return None;
    }
    group
        .elements()
        .iter()
        .copied()
        .find(|g| g1.action_deviation(g, g2, tol) < tol)
}

/// Stabilizer of `G` in `A` together with the worst near-miss: an element
/// whose deviation lies in `[tol, 10·tol]`.
pub fn stabilizer_with_margin(
    g: &GramMatrix,
    group: &AutGroup,
    tol: f64,
) -> (Vec<Perm>, Option<(Perm, f64)>) {
    let mut stab = Vec::new();
    let mut ambiguous: Option<(Perm, f64)> = None;
    for p in group.elements() {
        let dev = g.action_deviation(p, g, 10.0 * tol);
        if dev < tol {
            stab.push(*p);
        } else if dev <= 10.0 * tol && ambiguous.is_none_or(|(_, d)| dev < d) {
            ambiguous = Some((*p, dev));
        }
    }
    (stab, ambiguous)
}

/// The automorphism group `{g ∈ A : π(g)ᵀ·G·π(g) = G}`.
pub fn automorphism_group(g: &GramMatrix, group: &AutGroup, tol: f64) -> Result<Vec<Perm>> {
    let (stab, ambiguous) = stabilizer_with_margin(g, group, tol);
    if let Some((p, deviation)) = ambiguous {
        return Err(Error::ToleranceAmbiguity {
            perm: p.cycle_notation(),
            deviation,
            tol,
        });
    }
    debug_assert!(is_closed(&stab));
    Ok(stab)
}

pub fn is_closed(elements: &[Perm]) -> bool {
    elements
        .iter()
        .all(|x| elements.iter().all(|y| elements.contains(&(*x * *y))))
}

/// The orthogonal map `δ(g)` with `δ(g)·M = M·π(g)`.
pub fn induced_rotation(m: &CoordinateMatrix, g: &Perm, tol: f64) -> Result<Matrix3<f64>> {
    let gram = gram_from_coords(m);
    let scale = gram.matrix().abs().max().max(1.0);
    let dev = gram.action_deviation(g, &gram, f64::INFINITY);
    if dev > tol * scale {
        return Err(Error::NotAnAutomorphism {
            perm: g.cycle_notation(),
            deviation: dev,
        });
    }
    let rank = m.rank(1e-8);
    if rank < 3 {
        return Err(Error::RankDeficient { rank });
    }
    let mm = m.0 * m.0.transpose();
    let inv = mm.try_inverse().ok_or(Error::RankDeficient { rank: 2 })?;
    let moved = m.permuted(g).0;
    let delta = moved * m.0.transpose() * inv;
    let intertwine = (delta * m.0 - moved).abs().max();
    let ortho = (delta.transpose() * delta - Matrix3::identity())
        .abs()
        .max();
    if intertwine > tol * scale || ortho > tol {
        return Err(Error::NotAnAutomorphism {
            perm: g.cycle_notation(),
            deviation: intertwine.max(ortho),
        });
    }
    Ok(delta)
}

/// The regular icosahedron with unit edges in the fixed vertex labeling.
///
/// With `galois_conjugate` the golden ratio is replaced by its conjugate,
/// which gives the unit-edge great icosahedron on the same graph.
pub fn regular_icosahedron(graph: &IcoGraph, galois_conjugate: bool) -> CoordinateMatrix {
    let sqrt5 = 5f64.sqrt();
    let phi = if galois_conjugate {
        (1.0 - sqrt5) / 2.0
    } else {
        (1.0 + sqrt5) / 2.0
    };
    let mut pts = Vec::with_capacity(N);
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            pts.push(Vector3::new(0.0, s1, s2 * phi) * 0.5);
            pts.push(Vector3::new(s1, s2 * phi, 0.0) * 0.5);
            pts.push(Vector3::new(s2 * phi, 0.0, s1) * 0.5);
        }
    }
    // Geometric adjacency is edge length 1; match it to the labeled graph.
    let geo_adj = |u: usize, v: usize| ((pts[u] - pts[v]).norm() - 1.0).abs() < 1e-9;
    let mut assignment = [usize::MAX; N];
    let mut used = [false; N];
    fn extend(
        k: usize,
        graph: &IcoGraph,
        geo_adj: &dyn Fn(usize, usize) -> bool,
        assignment: &mut [usize; N],
        used: &mut [bool; N],
    ) -> bool {
        if k == N {
            return true;
        }
        for v in 0..N {
            if used[v] {
                continue;
            }
            if (0..k).all(|j| graph.is_edge(j, k) == geo_adj(assignment[j], v)) {
                assignment[k] = v;
                used[v] = true;
                if extend(k + 1, graph, geo_adj, assignment, used) {
                    return true;
                }
                used[v] = false;
            }
        }
        false
    }
    assert!(
        extend(0, graph, &geo_adj, &mut assignment, &mut used),
        "icosahedral graph embeds"
    );
    let mut m = Mat3x12::zeros();
    for (c, &v) in assignment.iter().enumerate() {
        m.set_column(c, &pts[v]);
    }
    CoordinateMatrix(m).centered()
}

/// A verified icosahedron together with its symmetry data.
#[derive(Clone, Debug)]
pub struct IcosaSolution {
    pub coords: CoordinateMatrix,
    pub gram: GramMatrix,
    pub trace: f64,
    pub aut: Vec<Perm>,
    /// Trace of `δ(g)` keyed by cycle notation of `g`, for a generating set of
    /// `aut` and the named involutions `a`, `d`, `ad` when present.
    pub delta_traces: BTreeMap<String, f64>,
    pub ansatz_tag: String,
    /// Whether the stabilizer had an element just outside tolerance.
    pub aut_ambiguous: bool,
    pub rank: usize,
    pub check: IcosahedronCheck,
}

/// Greedy generating set: elements in group order that enlarge the closure.
pub fn generating_set(elements: &[Perm]) -> Vec<Perm> {
    let mut gens: Vec<Perm> = Vec::new();
    let mut span = vec![Perm::identity()];
    for p in elements {
        if !span.contains(p) {
            gens.push(*p);
            span = crate::combinatorics::closure(&gens);
        }
    }
    gens
}

impl IcosaSolution {
    pub fn from_coords(
        coords: CoordinateMatrix,
        graph: &IcoGraph,
        group: &AutGroup,
        tol: &Tolerances,
        ansatz_tag: &str,
    ) -> Self {
        let gram = gram_from_coords(&coords);
        let (aut, ambiguous) = stabilizer_with_margin(&gram, group, tol.equivalence);
        let rank = coords.rank(1e-8);
        let mut delta_traces = BTreeMap::new();
        if rank == 3 {
            let mut keys = generating_set(&aut);
            for named in [group.a(), group.d(), group.ad()] {
                if aut.contains(&named) && !keys.contains(&named) {
                    keys.push(named);
                }
            }
            for g in keys {
                if let Ok(delta) = induced_rotation(&coords, &g, tol.equivalence) {
                    delta_traces.insert(g.cycle_notation(), delta.trace());
                }
            }
        }
        let check = is_icosahedron(&coords, graph, tol);
        IcosaSolution {
            trace: gram.trace(),
            coords,
            gram,
            aut,
            delta_traces,
            ansatz_tag: ansatz_tag.to_string(),
            aut_ambiguous: ambiguous.is_some(),
            rank,
            check,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{build_graph, build_group};

    fn setup() -> (AutGroup, IcoGraph) {
        let g = build_group();
        let graph = build_graph(&g);
        (g, graph)
    }

    #[test]
    fn regular_has_unit_edges_and_known_trace() {
        let (_, graph) = setup();
        let m = regular_icosahedron(&graph, false);
        assert!(edge_residuals(&m, &graph).iter().all(|r| r.abs() < 1e-12));
        let t = gram_from_coords(&m).trace();
        assert!((t - (15.0 + 3.0 * 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let ev = gram_from_coords(&m).eigenvalues();
        assert_eq!(ev.iter().filter(|&&x| x > 1e-9).count(), 3);
    }

    #[test]
    fn scaling_by_two_gives_residual_three() {
        let (_, graph) = setup();
        let m = regular_icosahedron(&graph, false).scaled(2.0);
        assert!(edge_residuals(&m, &graph)
            .iter()
            .all(|r| (r - 3.0).abs() < 1e-12));
    }

    #[test]
    fn zero_coords_give_zero_gram() {
        let g = gram_from_coords(&CoordinateMatrix::zeros());
        assert_eq!(g.matrix().abs().max(), 0.0);
    }

    #[test]
    fn coincident_vertices_rejected() {
        let (_, graph) = setup();
        let mut m = regular_icosahedron(&graph, false);
        let v = m.vertex(0);
        m.set_vertex(1, &v);
        let check = is_icosahedron(&m, &graph, &Tolerances::default());
        assert!(!check.is_icosahedron);
        assert_eq!(check.min_distance, 0.0);
    }

    #[test]
    fn factorization_round_trip() {
        let (_, graph) = setup();
        let m = regular_icosahedron(&graph, true);
        let g = gram_from_coords(&m);
        let back = coords_from_gram(&g, 1e-9).unwrap();
        assert!(gram_from_coords(&back).max_abs_diff(&g) < 1e-10);
    }

    #[test]
    fn planar_gram_gives_flat_third_row() {
        let cols: [[f64; 3]; N] =
            std::array::from_fn(|i| [(i as f64).cos(), (2.0 * i as f64).sin(), 0.0]);
        let m = CoordinateMatrix::from_columns(&cols);
        let back = coords_from_gram(&gram_from_coords(&m), 1e-9).unwrap();
        assert!(back.matrix().row(2).abs().max() < 1e-7);
    }

    #[test]
    fn indefinite_rejected() {
        let mut g = Mat12::identity();
        g[(0, 0)] = -1.0;
        assert!(matches!(
            coords_from_gram(&GramMatrix::new(g), 1e-9),
            Err(Error::NotPsd { .. })
        ));
        let g = GramMatrix::new(Mat12::identity());
        assert!(matches!(
            coords_from_gram(&g, 1e-9),
            Err(Error::RankExceeded { .. })
        ));
    }

    #[test]
    fn equivalence_witnesses() {
        let (group, graph) = setup();
        let g = gram_from_coords(&regular_icosahedron(&graph, false));
        assert_eq!(
            gram_equivalent(&g, &g, &group, 1e-6),
            Some(Perm::identity())
        );
        let conj = gram_from_coords(&regular_icosahedron(&graph, true));
        assert_eq!(gram_equivalent(&g, &conj, &group, 1e-6), None);
    }

    #[test]
    fn regular_is_fully_symmetric() {
        let (group, graph) = setup();
        for conj in [false, true] {
            let g = gram_from_coords(&regular_icosahedron(&graph, conj));
            let aut = automorphism_group(&g, &group, 1e-6).unwrap();
            assert_eq!(aut.len(), 120);
            assert!(is_closed(&aut));
        }
    }

    #[test]
    fn d_acts_as_minus_identity_on_regular() {
        let (group, graph) = setup();
        let m = regular_icosahedron(&graph, false);
        let delta = induced_rotation(&m, &group.d(), 1e-8).unwrap();
        assert!((delta.trace() + 3.0).abs() < 1e-10);
        let id = induced_rotation(&m, &Perm::identity(), 1e-8).unwrap();
        assert!((id - Matrix3::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn induced_rotation_is_homomorphism() {
        let (group, graph) = setup();
        let m = regular_icosahedron(&graph, true);
        let els = group.elements();
        for (k, g) in els.iter().enumerate().step_by(7) {
            let h = els[(k * 13 + 5) % els.len()];
            let dg = induced_rotation(&m, g, 1e-8).unwrap();
            let dh = induced_rotation(&m, &h, 1e-8).unwrap();
            let dgh = induced_rotation(&m, &(*g * h), 1e-8).unwrap();
            assert!((dg * dh - dgh).abs().max() < 1e-10);
        }
    }

    #[test]
    fn non_automorphism_rejected() {
        let (group, graph) = setup();
        let mut m = regular_icosahedron(&graph, false);
        let v = m.vertex(0) * 1.1;
        m.set_vertex(0, &v);
        let m = m.centered();
        assert!(matches!(
            induced_rotation(&m, &group.d(), 1e-8),
            Err(Error::NotAnAutomorphism { .. })
        ));
    }
}
