//! Symmetry-constrained parametrizations `M(y)` of coordinate matrices.
//!
//! A case fixes an involution `x ∈ {a, d, ad}` and a diagonal sign matrix
//! `δ(x)`. Row `r` of `M` then lies in the `δ[r]`-eigenspace of `π(x)`, rows
//! with sign `+1` carry the center-of-mass condition, and a few gauge pins
//! remove the orthogonal maps commuting with `δ(x)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{AutGroup, IcoGraph, Perm, N};
use crate::error::{Error, Result};
use crate::realization::{induced_rotation, CoordinateMatrix, Mat3x12};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A,
    D,
    Ad,
}

impl Generator {
    pub fn label(&self) -> &'static str {
        match self {
            Generator::A => "a",
            Generator::D => "d",
            Generator::Ad => "ad",
        }
    }

    pub fn element(&self, group: &AutGroup) -> Perm {
        match self {
            Generator::A => group.a(),
            Generator::D => group.d(),
            Generator::Ad => group.ad(),
        }
    }
}

/// What the case analysis predicts for a case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpectedOutcome {
    /// Finitely many classes of valid icosahedra.
    Solutions,
    /// No icosahedron with twelve distinct vertices.
    Empty,
    /// A one-parameter family.
    OneDimensional,
}

/// One cell of the 3×3 grid of cases (generator × sign pattern), with the
/// sign of the second half-edge as sub-case for `ad-++`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaseId {
    pub generator: Generator,
    pub signs: [i8; 3],
    pub subcase: Option<u8>,
}

pub const SIGN_PATTERNS: [[i8; 3]; 3] = [[1, -1, -1], [-1, 1, 1], [-1, -1, -1]];

impl CaseId {
    pub fn new(generator: Generator, signs: [i8; 3]) -> Self {
        CaseId {
            generator,
            signs,
            subcase: None,
        }
    }

    /// The nine grid cells, `ad-++` split into its two sub-cases.
    pub fn all() -> Vec<CaseId> {
        let mut out = Vec::new();
        for generator in [Generator::A, Generator::D, Generator::Ad] {
            for signs in SIGN_PATTERNS {
                let case = CaseId::new(generator, signs);
                if case.needs_subcase() {
                    out.push(CaseId {
                        subcase: Some(1),
                        ..case
                    });
                    out.push(CaseId {
                        subcase: Some(2),
                        ..case
                    });
                } else {
                    out.push(case);
                }
            }
        }
        out
    }

    /// Expands a case string; `ad-++` without suffix yields both sub-cases.
    pub fn expand(s: &str) -> Result<Vec<CaseId>> {
        let case: CaseId = s.parse()?;
        if case.needs_subcase() && case.subcase.is_none() {
            Ok(vec![
                CaseId {
                    subcase: Some(1),
                    ..case
                },
                CaseId {
                    subcase: Some(2),
                    ..case
                },
            ])
        } else {
            Ok(vec![case])
        }
    }

    pub fn needs_subcase(&self) -> bool {
        self.generator == Generator::Ad && self.signs == [-1, 1, 1]
    }

    pub fn expected_outcome(&self) -> ExpectedOutcome {
        use ExpectedOutcome::*;
        match (self.generator, self.signs) {
            (Generator::A, [-1, 1, 1]) => Empty,
            (Generator::D, [1, -1, -1]) => OneDimensional,
            (Generator::Ad, [1, -1, -1]) | (Generator::Ad, [-1, -1, -1]) => Empty,
            _ => Solutions,
        }
    }

    pub fn delta(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(
            self.signs[0] as f64,
            self.signs[1] as f64,
            self.signs[2] as f64,
        ))
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.generator.label())?;
        for s in self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        if let Some(k) = self.subcase {
            write!(f, "/{k}")?;
        }
        Ok(())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCase(s.to_string());
        let (body, subcase) = match s.split_once('/') {
            Some((body, "1")) => (body, Some(1)),
            Some((body, "2")) => (body, Some(2)),
            Some(_) => return Err(bad()),
            None => (s, None),
        };
        let split = body.find(['+', '-']).ok_or_else(bad)?;
        let generator = match &body[..split] {
            "a" => Generator::A,
            "d" => Generator::D,
            "ad" => Generator::Ad,
            _ => return Err(bad()),
        };
        let sign_str = &body[split..];
        if sign_str.len() != 3 {
            return Err(bad());
        }
        let mut signs = [0i8; 3];
        for (slot, ch) in signs.iter_mut().zip(sign_str.chars()) {
            *slot = if ch == '+' { 1 } else { -1 };
        }
        if !SIGN_PATTERNS.contains(&signs) {
            return Err(bad());
        }
        let case = CaseId {
            generator,
            signs,
            subcase,
        };
        if subcase.is_some() && !case.needs_subcase() {
            return Err(bad());
        }
        Ok(case)
    }
}

/// Affine constraint `M[row, col] = value` (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Pin {
    fn new(row: usize, col: usize, value: f64) -> Self {
        Pin { row, col, value }
    }
}

/// Cycles of `x` plus fixed points: the supports of the eigenvectors of `π(x)`.
fn units(x: &Perm, sign: i8) -> Vec<(usize, Option<usize>)> {
    let mut out = Vec::new();
    for i in 0..N {
        let j = x.apply(i);
        if j == i {
            if sign > 0 {
                out.push((i, None));
            }
        } else if i < j {
            out.push((i, Some(j)));
        }
    }
    out
}

fn unit_row(unit: (usize, Option<usize>), sign: i8) -> [f64; N] {
    let mut v = [0.0; N];
    v[unit.0] = 1.0;
    if let Some(j) = unit.1 {
        v[j] = sign as f64;
    }
    v
}

/// Dimension of the `sign`-eigenspace of `π(x)`.
pub fn eigenspace_dim(x: &Perm, sign: i8) -> usize {
    units(x, sign).len()
}

/// Basis of `{M : δ·M = M·π(x)}` for `δ = diag(signs)`, one matrix per
/// eigenvector `e_i ± e_j` (cycle) or `e_i` (fixed point, `+1` rows only).
pub fn intertwiner_basis(x: &Perm, signs: [i8; 3]) -> Vec<Mat3x12> {
    let mut out = Vec::new();
    for (r, &s) in signs.iter().enumerate() {
        for u in units(x, s) {
            let row = unit_row(u, s);
            let mut m = Mat3x12::zeros();
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = *v;
            }
            out.push(m);
        }
    }
    out
}

/// Gauge pins for cases whose reduction is not prescribed: an `n`-dimensional
/// sign block keeps `O(n)` freedom, removed by a QR-shaped zero pattern on the
/// first supported columns.
pub fn generic_pins(x: &Perm, signs: [i8; 3]) -> Vec<Pin> {
    let mut pins = Vec::new();
    for s in [1i8, -1] {
        let rows: Vec<usize> = (0..3).filter(|&r| signs[r] == s).collect();
        let cols: Vec<usize> = units(x, s).iter().map(|u| u.0).collect();
        for (t, &c) in cols.iter().take(rows.len().saturating_sub(1)).enumerate() {
            for &r in &rows[t + 1..] {
                pins.push(Pin::new(r, c, 0.0));
            }
        }
    }
    pins.sort_by_key(|p| (p.col, p.row));
    pins
}

/// The pin set used for a case.
pub fn case_pins(case: &CaseId, x: &Perm) -> Result<Vec<Pin>> {
    let pins = match (case.generator, case.signs) {
        (Generator::A, [1, -1, -1]) => {
            vec![
                Pin::new(1, 0, 0.5),
                Pin::new(2, 0, 0.0),
                Pin::new(1, 2, 0.0),
            ]
        }
        (Generator::A, [-1, 1, 1]) => vec![Pin::new(0, 0, 0.5)],
        (Generator::A, [-1, -1, -1]) => vec![
            Pin::new(0, 0, 0.5),
            Pin::new(1, 0, 0.0),
            Pin::new(2, 0, 0.0),
            Pin::new(2, 2, 0.0),
        ],
        (Generator::Ad, [-1, 1, 1]) => {
            let x4 = match case.subcase {
                Some(1) => 0.5,
                Some(2) => -0.5,
                _ => {
                    return Err(Error::InvalidCase(format!(
                        "{case} needs sub-case /1 or /2"
                    )))
                }
            };
            vec![Pin::new(2, 4, 0.0), Pin::new(0, 2, 0.5), Pin::new(0, 3, x4)]
        }
        _ => generic_pins(x, case.signs),
    };
    Ok(pins)
}

/// Orbit representatives of `⟨x⟩` on the edges, smallest edge first.
pub fn edge_orbit_representatives(x: &Perm, graph: &IcoGraph) -> Vec<(usize, usize)> {
    let mut seen = vec![false; graph.edges().len()];
    let mut reps = Vec::new();
    for (k, &e) in graph.edges().iter().enumerate() {
        if seen[k] {
            continue;
        }
        seen[k] = true;
        let img = x.map_pair(e);
        if let Some(m) = graph.edge_index(img.0, img.1) {
            seen[m] = true;
        }
        reps.push(e);
    }
    reps
}

/// An affine family `M(y) = offset + Σ y_k·B_k`.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub case: CaseId,
    pub generator: Perm,
    pub pins: Vec<Pin>,
    pub offset: Mat3x12,
    pub basis: Vec<Mat3x12>,
    /// Entry of `M` that equals `y_k` exactly.
    pub reps: Vec<(usize, usize)>,
    pub raw_dim: usize,
    pub com_conditions: usize,
    pub edge_reps: Vec<(usize, usize)>,
}

impl Ansatz {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn signs(&self) -> [i8; 3] {
        self.case.signs
    }

    pub fn delta(&self) -> Matrix3<f64> {
        self.case.delta()
    }

    pub fn equation_count(&self) -> usize {
        self.edge_reps.len()
    }
}

pub fn build_ansatz(case: &CaseId, group: &AutGroup, graph: &IcoGraph) -> Result<Ansatz> {
    let x = case.generator.element(group);
    let pins = case_pins(case, &x)?;
    build_with_pins(case, x, pins, graph)
}

/// Builds the family for explicit pins; fails if a pin hits a forced-zero
/// entry, two pins disagree on a unit, or the center of mass is violated.
pub fn build_with_pins(case: &CaseId, x: Perm, pins: Vec<Pin>, graph: &IcoGraph) -> Result<Ansatz> {
    let mut offset = Mat3x12::zeros();
    let mut basis = Vec::new();
    let mut reps = Vec::new();
    let mut raw_dim = 0;
    let mut com_conditions = 0;
    for p in &pins {
        if p.row >= 3 || p.col >= N {
            return Err(Error::InfeasiblePins(format!(
                "pin ({}, {}) out of range",
                p.row, p.col
            )));
        }
    }
    for (r, &s) in case.signs.iter().enumerate() {
        let row_units = units(&x, s);
        raw_dim += row_units.len();
        let mut off = [0.0; N];
        let mut free: Vec<(usize, Option<usize>)> = Vec::new();
        for p in pins.iter().filter(|p| p.row == r) {
            if !row_units.iter().any(|u| u.0 == p.col || u.1 == Some(p.col)) {
                return Err(Error::InfeasiblePins(format!(
                    "entry ({}, {}) is forced to zero by the symmetry",
                    p.row, p.col
                )));
            }
        }
        for &u in &row_units {
            let mut coef: Option<f64> = None;
            for p in pins
                .iter()
                .filter(|p| p.row == r && (p.col == u.0 || Some(p.col) == u.1))
            {
                let c = if p.col == u.0 {
                    p.value
                } else {
                    p.value * s as f64
                };
                if coef.is_some() {
                    return Err(Error::InfeasiblePins(format!(
                        "two pins on the orbit of column {} in row {}",
                        u.0, r
                    )));
                }
                coef = Some(c);
            }
            match coef {
                Some(c) => {
                    for (o, v) in off.iter_mut().zip(unit_row(u, s)) {
                        *o += c * v;
                    }
                }
                None => free.push(u),
            }
        }
        let mut row_basis: Vec<([f64; N], (usize, usize))> = Vec::new();
        if s > 0 {
            com_conditions += 1;
            let weight = |u: &(usize, Option<usize>)| if u.1.is_some() { 2.0 } else { 1.0 };
            let total: f64 = off.iter().sum();
            let elim = free
                .iter()
                .rposition(|u| u.1.is_some())
                .or(free.len().checked_sub(1));
            match elim {
                None => {
                    if total.abs() > 0.0 {
                        return Err(Error::InfeasiblePins(format!(
                            "row {r} is fully pinned with nonzero sum"
                        )));
                    }
                }
                Some(k) => {
                    let ue = free.remove(k);
                    let ve = unit_row(ue, s);
                    let we = weight(&ue);
                    for (o, v) in off.iter_mut().zip(ve) {
                        *o -= v * total / we;
                    }
                    for u in &free {
                        let mut b = unit_row(*u, s);
                        let w = weight(u);
                        for (bb, v) in b.iter_mut().zip(ve) {
                            *bb -= v * w / we;
                        }
                        row_basis.push((b, (r, u.0)));
                    }
                }
            }
        } else {
            for u in &free {
                row_basis.push((unit_row(*u, s), (r, u.0)));
            }
        }
        for c in 0..N {
            offset[(r, c)] = off[c];
        }
        for (b, rep) in row_basis {
            let mut m = Mat3x12::zeros();
            for c in 0..N {
                m[(r, c)] = b[c];
            }
            basis.push(m);
            reps.push(rep);
        }
    }
    Ok(Ansatz {
        case: *case,
        generator: x,
        pins,
        offset,
        basis,
        reps,
        raw_dim,
        com_conditions,
        edge_reps: edge_orbit_representatives(&x, graph),
    })
}

fn check_dim(ansatz: &Ansatz, y: &[f64]) -> Result<()> {
    if y.len() != ansatz.dim() {
        return Err(Error::DimensionMismatch {
            expected: ansatz.dim(),
            got: y.len(),
        });
    }
    Ok(())
}

pub fn materialize(ansatz: &Ansatz, y: &[f64]) -> Result<CoordinateMatrix> {
    check_dim(ansatz, y)?;
    Ok(CoordinateMatrix::new(materialize_unchecked(ansatz, y)))
}

fn materialize_unchecked(ansatz: &Ansatz, y: &[f64]) -> Mat3x12 {
    let mut m = ansatz.offset;
    for (b, &yk) in ansatz.basis.iter().zip(y) {
        m += b * yk;
    }
    m
}

/// `|V_i − V_j|² − 1` for one representative per `⟨x⟩`-orbit of edges.
pub fn symmetric_residuals(ansatz: &Ansatz, y: &[f64]) -> Result<Vec<f64>> {
    check_dim(ansatz, y)?;
    let m = materialize_unchecked(ansatz, y);
    Ok(reduced_residuals(ansatz, &m).iter().copied().collect())
}

fn reduced_residuals(ansatz: &Ansatz, m: &Mat3x12) -> DVector<f64> {
    DVector::from_iterator(
        ansatz.edge_reps.len(),
        ansatz
            .edge_reps
            .iter()
            .map(|&(i, j)| (m.column(i) - m.column(j)).norm_squared() - 1.0),
    )
}

/// Reduced residuals and their analytic Jacobian at `y`.
pub fn residuals_and_jacobian(ansatz: &Ansatz, y: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_dim(ansatz, y)?;
    let m = materialize_unchecked(ansatz, y);
    let r = reduced_residuals(ansatz, &m);
    let mut jac = DMatrix::zeros(ansatz.edge_reps.len(), ansatz.dim());
    for (e, &(i, j)) in ansatz.edge_reps.iter().enumerate() {
        let diff = m.column(i) - m.column(j);
        for (k, b) in ansatz.basis.iter().enumerate() {
            let db = b.column(i) - b.column(j);
            jac[(e, k)] = 2.0 * diff.dot(&db);
        }
    }
    Ok((r, jac))
}

pub fn jacobian(ansatz: &Ansatz, y: &[f64]) -> Result<DMatrix<f64>> {
    Ok(residuals_and_jacobian(ansatz, y)?.1)
}

/// Rotation zeroing `v[i]` against `v[i-1]`, applied to rows `i-1, i`.
fn givens(m: &mut Mat3x12, q: &mut Matrix3<f64>, r0: usize, r1: usize, col: usize) {
    let (p, s) = (m[(r0, col)], m[(r1, col)]);
    let h = p.hypot(s);
    if h == 0.0 {
        return;
    }
    let (c, sn) = (p / h, s / h);
    for k in 0..N {
        let (u, v) = (m[(r0, k)], m[(r1, k)]);
        m[(r0, k)] = c * u + sn * v;
        m[(r1, k)] = -sn * u + c * v;
    }
    for k in 0..3 {
        let (u, v) = (q[(r0, k)], q[(r1, k)]);
        q[(r0, k)] = c * u + sn * v;
        q[(r1, k)] = -sn * u + c * v;
    }
    m[(r1, col)] = 0.0;
}

/// Brings a centered coordinate matrix with `x` in its automorphism group
/// into the gauge of `ansatz` and returns its parameters.
///
/// Fails with `FitMismatch` when the induced action has the wrong
/// signature, when a pin that is not pure gauge is violated, or when the
/// sub-case sign disagrees.
pub fn fit(ansatz: &Ansatz, coords: &CoordinateMatrix, tol: f64) -> Result<Vec<f64>> {
    let centered = coords.centered();
    let delta = induced_rotation(&centered, &ansatz.generator, tol)?;
    let eig = SymmetricEigen::new((delta + delta.transpose()) * 0.5);
    let signs = ansatz.signs();
    let mut q = Matrix3::zeros();
    let mut used = [false; 3];
    for (r, &s) in signs.iter().enumerate() {
        let k = (0..3)
            .find(|&k| !used[k] && (eig.eigenvalues[k] - s as f64).abs() < 1e-6)
            .ok_or_else(|| {
                Error::FitMismatch(format!(
                    "induced action has eigenvalues {:?}, case needs {:?}",
                    eig.eigenvalues.as_slice(),
                    signs
                ))
            })?;
        used[k] = true;
        q.set_row(r, &eig.eigenvectors.column(k).transpose());
    }
    let mut m = q * centered.matrix();
    // Zero pins inside each sign block, QR style on the pinned columns.
    for s in [1i8, -1] {
        let rows: Vec<usize> = (0..3).filter(|&r| signs[r] == s).collect();
        let mut cols: Vec<usize> = Vec::new();
        for p in ansatz
            .pins
            .iter()
            .filter(|p| p.value == 0.0 && rows.contains(&p.row))
        {
            if !cols.contains(&p.col) {
                cols.push(p.col);
            }
        }
        let count = |c: usize| {
            ansatz
                .pins
                .iter()
                .filter(|p| p.value == 0.0 && p.col == c)
                .count()
        };
        cols.sort_by_key(|&c| std::cmp::Reverse(count(c)));
        for (t, &c) in cols.iter().enumerate() {
            for i in (t + 1..rows.len()).rev() {
                givens(&mut m, &mut q, rows[i - 1], rows[i], c);
            }
        }
    }
    // Row signs from value pins (first pin per row decides).
    for r in 0..3 {
        if let Some(p) = ansatz.pins.iter().find(|p| p.row == r && p.value != 0.0) {
            if m[(r, p.col)] * p.value < 0.0 {
                for k in 0..N {
                    m[(r, k)] = -m[(r, k)];
                }
            }
        }
    }
    let y: Vec<f64> = ansatz.reps.iter().map(|&(r, c)| m[(r, c)]).collect();
    let rebuilt = materialize_unchecked(ansatz, &y);
    let dev = (rebuilt - m).abs().max();
    if dev > tol {
        return Err(Error::FitMismatch(format!(
            "gauge-fixed matrix deviates from the family by {dev:e}"
        )));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{build_graph, build_group};
    use crate::realization::{gram_from_coords, regular_icosahedron};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (AutGroup, IcoGraph) {
        let g = build_group();
        let graph = build_graph(&g);
        (g, graph)
    }

    fn random_y(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    #[test]
    fn case_ids_round_trip() {
        let all = CaseId::all();
        assert_eq!(all.len(), 10);
        for c in &all {
            assert_eq!(c.to_string().parse::<CaseId>().unwrap(), *c);
        }
        assert_eq!(CaseId::expand("ad-++").unwrap().len(), 2);
        for bad in ["b+--", "a++-", "a+--/1", "ad-++/3", "", "d"] {
            assert!(bad.parse::<CaseId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn eigenspace_dimensions() {
        let (group, _) = setup();
        for (x, plus, minus) in [(group.a(), 6, 6), (group.d(), 6, 6), (group.ad(), 8, 4)] {
            assert_eq!(eigenspace_dim(&x, 1), plus);
            assert_eq!(eigenspace_dim(&x, -1), minus);
        }
        assert_eq!(intertwiner_basis(&group.a(), [1, -1, -1]).len(), 18);
        assert_eq!(intertwiner_basis(&group.ad(), [-1, 1, 1]).len(), 20);
        assert_eq!(intertwiner_basis(&group.ad(), [-1, -1, -1]).len(), 12);
    }

    #[test]
    fn basis_entries_intertwine() {
        let (group, _) = setup();
        for case in CaseId::all() {
            let x = case.generator.element(&group);
            for b in intertwiner_basis(&x, case.signs) {
                let moved = CoordinateMatrix::new(b).permuted(&x);
                assert_eq!(case.delta() * b, *moved.matrix());
            }
        }
    }

    #[test]
    fn dimensions_per_case() {
        let (group, graph) = setup();
        let expected = [
            ("a+--", 14, 16),
            ("a-++", 15, 16),
            ("a---", 14, 16),
            ("d+--", 16, 15),
            ("d-++", 15, 15),
            ("d---", 15, 15),
            ("ad+--", 14, 17),
            ("ad-++/1", 15, 17),
            ("ad-++/2", 15, 17),
            ("ad---", 9, 17),
        ];
        for (name, dim, eqs) in expected {
            let a = build_ansatz(&name.parse().unwrap(), &group, &graph).unwrap();
            assert_eq!(a.dim(), dim, "{name}");
            assert_eq!(a.equation_count(), eqs, "{name}");
            assert_eq!(
                a.dim(),
                a.raw_dim - a.com_conditions - a.pins.len(),
                "{name}"
            );
        }
    }

    #[test]
    fn zero_parameters_give_offset() {
        let (group, graph) = setup();
        let a = build_ansatz(&"a+--".parse().unwrap(), &group, &graph).unwrap();
        let m = materialize(&a, &vec![0.0; a.dim()]).unwrap();
        assert_eq!(*m.matrix(), a.offset);
        assert!(matches!(
            materialize(&a, &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn families_are_symmetric_centered_and_pinned() {
        let (group, graph) = setup();
        for (n, case) in CaseId::all().into_iter().enumerate() {
            let a = build_ansatz(&case, &group, &graph).unwrap();
            let y = random_y(a.dim(), n as u64);
            let m = materialize(&a, &y).unwrap();
            let moved = m.permuted(&a.generator);
            assert!(
                (case.delta() * m.matrix() - moved.matrix()).abs().max() == 0.0,
                "{case}"
            );
            assert!(m.centroid().norm() < 1e-14, "{case}");
            for p in &a.pins {
                assert_eq!(m.matrix()[(p.row, p.col)], p.value, "{case}");
            }
            for (k, &(r, c)) in a.reps.iter().enumerate() {
                assert_eq!(m.matrix()[(r, c)], y[k]);
            }
            let g = gram_from_coords(&m);
            assert!(g.act(&a.generator).max_abs_diff(&g) < 1e-13);
        }
    }

    #[test]
    fn first_edge_satisfied_by_pins() {
        let (group, graph) = setup();
        for name in ["a+--", "a---"] {
            let a = build_ansatz(&name.parse().unwrap(), &group, &graph).unwrap();
            let y = random_y(a.dim(), 3);
            let m = materialize(&a, &y).unwrap();
            assert!(
                ((m.vertex(0) - m.vertex(1)).norm() - 1.0).abs() < 1e-15,
                "{name}"
            );
        }
    }

    #[test]
    fn minus_rows_sum_to_zero_for_d() {
        let (group, graph) = setup();
        let a = build_ansatz(&"d+--".parse().unwrap(), &group, &graph).unwrap();
        let m = materialize(&a, &random_y(16, 11)).unwrap();
        for r in 1..3 {
            assert!(m.matrix().row(r).sum().abs() < 1e-15);
        }
    }

    #[test]
    fn flexible_case_has_full_rank_jacobian() {
        let (group, graph) = setup();
        let a = build_ansatz(&"d+--".parse().unwrap(), &group, &graph).unwrap();
        let jac = jacobian(&a, &random_y(16, 5)).unwrap();
        assert_eq!(jac.shape(), (15, 16));
        assert_eq!(jac.rank(1e-10), 15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (group, graph) = setup();
        for case in CaseId::all() {
            let a = build_ansatz(&case, &group, &graph).unwrap();
            let y = random_y(a.dim(), 9);
            let jac = jacobian(&a, &y).unwrap();
            let h = 1e-6;
            for k in 0..a.dim() {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[k] += h;
                ym[k] -= h;
                let rp = symmetric_residuals(&a, &yp).unwrap();
                let rm = symmetric_residuals(&a, &ym).unwrap();
                for e in 0..a.equation_count() {
                    let fd = (rp[e] - rm[e]) / (2.0 * h);
                    assert!(
                        (fd - jac[(e, k)]).abs() <= 1e-6 * (1.0 + fd.abs()),
                        "{case}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_residuals_vanish_iff_full_residuals_vanish() {
        let (group, graph) = setup();
        let a = build_ansatz(&"d---".parse().unwrap(), &group, &graph).unwrap();
        let reg = regular_icosahedron(&graph, false);
        let y = fit(&a, &reg, 1e-9).unwrap();
        assert!(symmetric_residuals(&a, &y)
            .unwrap()
            .iter()
            .all(|r| r.abs() < 1e-12));
        let m = materialize(&a, &y).unwrap();
        let full = crate::realization::edge_residuals(&m, &graph);
        assert!(full.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn inconsistent_pins_rejected() {
        let (group, graph) = setup();
        let case: CaseId = "ad---".parse().unwrap();
        let x = group.ad();
        let forced_zero = vec![Pin::new(0, 4, 0.3)];
        assert!(matches!(
            build_with_pins(&case, x, forced_zero, &graph),
            Err(Error::InfeasiblePins(_))
        ));
        let clash = vec![Pin::new(0, 0, 0.5), Pin::new(0, 9, 0.5)];
        assert!(matches!(
            build_with_pins(&case, x, clash, &graph),
            Err(Error::InfeasiblePins(_))
        ));
    }

    #[test]
    fn fit_recovers_parameters_after_gauge_change() {
        let (group, graph) = setup();
        for case in CaseId::all() {
            if case.generator == Generator::A && case.signs == [1, -1, -1] {
                continue;
            }
            let a = build_ansatz(&case, &group, &graph).unwrap();
            let y = random_y(a.dim(), 21);
            let m = materialize(&a, &y).unwrap();
            if m.rank(1e-8) < 3 {
                continue;
            }
            // Random orthogonal map commuting with δ: rotate inside the
            // two-dimensional block and flip the remaining row.
            let block: Vec<usize> = (0..3).filter(|&r| case.signs[r] == case.signs[1]).collect();
            let mut rot = Matrix3::identity();
            if block.len() == 2 {
                let (c, s) = (0.3f64.cos(), 0.3f64.sin());
                rot[(block[0], block[0])] = c;
                rot[(block[0], block[1])] = -s;
                rot[(block[1], block[0])] = s;
                rot[(block[1], block[1])] = c;
            } else {
                rot = nalgebra::Rotation3::from_euler_angles(0.2, -0.4, 0.9).into_inner();
            }
            let moved = m.transformed(&rot);
            let back = fit(&a, &moved, 1e-8).unwrap();
            let m2 = materialize(&a, &back).unwrap();
            assert!(
                gram_from_coords(&m2).max_abs_diff(&gram_from_coords(&m)) < 1e-10,
                "{case}"
            );
        }
    }

    #[test]
    fn regular_icosahedron_fits_minus_identity_case_only() {
        let (group, graph) = setup();
        let reg = regular_icosahedron(&graph, false);
        let ok = build_ansatz(&"d---".parse().unwrap(), &group, &graph).unwrap();
        assert!(fit(&ok, &reg, 1e-9).is_ok());
        let wrong = build_ansatz(&"d+--".parse().unwrap(), &group, &graph).unwrap();
        assert!(matches!(
            fit(&wrong, &reg, 1e-9),
            Err(Error::FitMismatch(_))
        ));
    }
}
