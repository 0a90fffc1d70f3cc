//! The labeled icosahedral graph and its combinatorial automorphism group.
//!
//! Vertices are stored 0-based internally; everything that is printed or
//! parsed (cycle notation, file formats) uses the labels `1..=12`.
//!
//! The group `A ≅ C2 × A5` is generated by four fixed involutions `a, b, c, d`
//! and is small enough that every orbit, stabilizer and centralizer query is
//! an exhaustive scan over its 120 elements.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

/// Number of vertices.
pub const N: usize = 12;

/// A permutation of the twelve vertices, stored as its image array.
///
/// Products compose like functions: `(g * h)(i) = g(h(i))`. With this
/// convention both the permutation-matrix representation and the induced
/// action on 3-space are homomorphisms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm([u8; N]);

impl Perm {
    pub fn identity() -> Self {
        let mut images = [0u8; N];
        for (i, slot) in images.iter_mut().enumerate() {
            *slot = i as u8;
        }
        Perm(images)
    }

    /// Builds a permutation from 0-based images; `None` unless it is a bijection.
    pub fn from_images(images: [u8; N]) -> Option<Self> {
        let mut seen = [false; N];
        for &x in &images {
            let x = x as usize;
            if x >= N || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        Some(Perm(images))
    }

    /// Builds a permutation from disjoint cycles written with 1-based labels.
    ///
    /// Panics on malformed input; intended for literal generator tables.
    pub fn from_cycles(cycles: &[&[u8]]) -> Self {
        Self::try_from_cycles(cycles).expect("malformed cycle literal")
    }

    fn try_from_cycles(cycles: &[&[u8]]) -> Option<Self> {
        let mut images = Self::identity().0;
        let mut touched = [false; N];
        for cycle in cycles {
            for (k, &v) in cycle.iter().enumerate() {
                let from = (v as usize).checked_sub(1)?;
                let to = (cycle[(k + 1) % cycle.len()] as usize).checked_sub(1)?;
                if from >= N || to >= N || touched[from] {
                    return None;
                }
                touched[from] = true;
                images[from] = to as u8;
            }
        }
        Self::from_images(images)
    }

    /// Parses cycle notation such as `(1,2)(3,4)`; `()` is the identity.
    pub fn parse_cycles(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() || text == "()" {
            return Some(Self::identity());
        }
        let mut cycles: Vec<Vec<u8>> = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let body = rest.strip_prefix('(')?;
            let close = body.find(')')?;
            let cycle = body[..close]
                .split(',')
                .map(|s| s.trim().parse::<u8>().ok())
                .collect::<Option<Vec<_>>>()?;
            cycles.push(cycle);
            rest = body[close + 1..].trim_start();
        }
        let refs: Vec<&[u8]> = cycles.iter().map(Vec::as_slice).collect();
        Self::try_from_cycles(&refs)
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn images(&self) -> &[u8; N] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [0u8; N];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn order(&self) -> usize {
        let mut p = *self;
        let mut k = 1;
        while !p.is_identity() {
            p = p * *self;
            k += 1;
        }
        k
    }

    pub fn is_involution(&self) -> bool {
        !self.is_identity() && (*self * *self).is_identity()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..N).filter(|&i| self.apply(i) == i).collect()
    }

    /// Nontrivial cycles, 0-based, each starting at its smallest entry.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = [false; N];
        let mut out = Vec::new();
        for start in 0..N {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.apply(j);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle notation with 1-based labels.
    pub fn cycle_notation(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        let mut s = String::new();
        for c in cycles {
            s.push('(');
            let labels: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
            s.push_str(&labels.join(","));
            s.push(')');
        }
        s
    }

    /// Image of an unordered pair, returned sorted.
    pub fn map_pair(&self, (i, j): (usize, usize)) -> (usize, usize) {
        sorted_pair(self.apply(i), self.apply(j))
    }

    /// Image of an unordered triple, returned sorted.
    pub fn map_triple(&self, t: [usize; 3]) -> [usize; 3] {
        let mut out = [self.apply(t[0]), self.apply(t[1]), self.apply(t[2])];
        out.sort_unstable();
        out
    }
}

impl Mul for Perm {
    type Output = Perm;

    fn mul(self, rhs: Perm) -> Perm {
        let mut images = [0u8; N];
        for (i, slot) in images.iter_mut().enumerate() {
            *slot = self.0[rhs.0[i] as usize];
        }
        Perm(images)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{}", self.cycle_notation())
    }
}

pub(crate) fn sorted_pair(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// The combinatorial automorphism group `A` with its named generators.
#[derive(Clone, Debug)]
pub struct AutGroup {
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
    in_a5: Vec<bool>,
    a: Perm,
    b: Perm,
    c: Perm,
    d: Perm,
}

/// Generator `a = (1,2)(3,4)(5,7)(6,8)(9,11)(10,12)`.
pub fn generator_a() -> Perm {
    Perm::from_cycles(&[&[1, 2], &[3, 4], &[5, 7], &[6, 8], &[9, 11], &[10, 12]])
}

/// Generator `b = (1,10)(3,9)(2,12)(4,11)(5,6)(7,8)`.
pub fn generator_b() -> Perm {
    Perm::from_cycles(&[&[1, 10], &[3, 9], &[2, 12], &[4, 11], &[5, 6], &[7, 8]])
}

/// Generator `c = (1,7)(2,3)(4,11)(5,12)(6,8)(9,10)`.
pub fn generator_c() -> Perm {
    Perm::from_cycles(&[&[1, 7], &[2, 3], &[4, 11], &[5, 12], &[6, 8], &[9, 10]])
}

/// Central generator `d = (1,12)(3,9)(2,10)(4,11)(5,7)(6,8)`, swapping antipodes.
pub fn generator_d() -> Perm {
    Perm::from_cycles(&[&[1, 12], &[3, 9], &[2, 10], &[4, 11], &[5, 7], &[6, 8]])
}

/// Closure of a generating set under composition, sorted.
pub fn closure(generators: &[Perm]) -> Vec<Perm> {
    let mut set = BTreeSet::new();
    set.insert(Perm::identity());
    let mut queue: VecDeque<Perm> = VecDeque::from([Perm::identity()]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x * *g;
            if set.insert(y) {
                queue.push_back(y);
            }
        }
    }
    set.into_iter().collect()
}

/// Builds `A` as the closure of `a, b, c, d`.
pub fn build_group() -> AutGroup {
    let (a, b, c, d) = (generator_a(), generator_b(), generator_c(), generator_d());
    let elements = closure(&[a, b, c, d]);
    assert_eq!(
        elements.len(),
        120,
        "generators must close to a group of order 120"
    );
    let index: HashMap<Perm, usize> = elements.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let a5: BTreeSet<Perm> = closure(&[a, b, c]).into_iter().collect();
    assert_eq!(a5.len(), 60, "a, b, c must generate A5");
    let in_a5 = elements.iter().map(|p| a5.contains(p)).collect();
    let group = AutGroup {
        elements,
        index,
        in_a5,
        a,
        b,
        c,
        d,
    };
    assert_eq!(
        group.center(),
        vec![Perm::identity(), d],
        "center must be {{id, d}}"
    );
    group
}

impl AutGroup {
    /// All 120 elements in a fixed order; the identity comes first.
    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.index.contains_key(p)
    }

    pub fn a(&self) -> Perm {
        self.a
    }

    pub fn b(&self) -> Perm {
        self.b
    }

    pub fn c(&self) -> Perm {
        self.c
    }

    pub fn d(&self) -> Perm {
        self.d
    }

    pub fn ad(&self) -> Perm {
        self.a * self.d
    }

    /// Membership in the index-2 subgroup `⟨a, b, c⟩ ≅ A5`.
    pub fn in_a5(&self, p: &Perm) -> bool {
        self.index_of(p).is_some_and(|i| self.in_a5[i])
    }

    pub fn center(&self) -> Vec<Perm> {
        self.elements
            .iter()
            .copied()
            .filter(|z| self.elements.iter().all(|g| *z * *g == *g * *z))
            .collect()
    }

    pub fn centralizer(&self, x: &Perm) -> Vec<Perm> {
        self.elements
            .iter()
            .copied()
            .filter(|g| *g * *x == *x * *g)
            .collect()
    }

    /// Normalizer of the subgroup given by its element list.
    pub fn normalizer(&self, subgroup: &[Perm]) -> Vec<Perm> {
        let members: BTreeSet<Perm> = subgroup.iter().copied().collect();
        self.elements
            .iter()
            .copied()
            .filter(|g| {
                let gi = g.inverse();
                subgroup.iter().all(|h| members.contains(&(*g * *h * gi)))
            })
            .collect()
    }

    pub fn conjugacy_class(&self, x: &Perm) -> Vec<Perm> {
        let set: BTreeSet<Perm> = self
            .elements
            .iter()
            .map(|g| *g * *x * g.inverse())
            .collect();
        set.into_iter().collect()
    }

    /// One element per line, in cycle notation.
    pub fn dump_cycles(&self) -> String {
        let mut s = String::new();
        for p in &self.elements {
            s.push_str(&p.cycle_notation());
            s.push('\n');
        }
        s
    }
}

/// The labeled icosahedron: faces, edges and the two kinds of diagonals.
#[derive(Clone, Debug)]
pub struct IcoGraph {
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    diag2: Vec<(usize, usize)>,
    diag3: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    distance: [[u8; N]; N],
}

fn pair_orbit(group: &AutGroup, seed: (usize, usize)) -> Vec<(usize, usize)> {
    let set: BTreeSet<_> = group.elements().iter().map(|g| g.map_pair(seed)).collect();
    set.into_iter().collect()
}

/// Builds faces, edges and diagonals as orbits of `{1,2,3}`, `{1,2}`, `{3,4}`, `{1,12}`.
pub fn build_graph(group: &AutGroup) -> IcoGraph {
    let faces: Vec<[usize; 3]> = {
        let set: BTreeSet<_> = group
            .elements()
            .iter()
            .map(|g| g.map_triple([0, 1, 2]))
            .collect();
        set.into_iter().collect()
    };
    let edges = pair_orbit(group, (0, 1));
    let diag2 = pair_orbit(group, (2, 3));
    let diag3 = pair_orbit(group, (0, 11));
    assert_eq!(faces.len(), 20, "face orbit size");
    assert_eq!(edges.len(), 30, "edge orbit size");
    assert_eq!(diag2.len(), 30, "distance-2 diagonal orbit size");
    assert_eq!(diag3.len(), 6, "distance-3 diagonal orbit size");

    let mut neighbors = vec![Vec::new(); N];
    for &(i, j) in &edges {
        neighbors[i].push(j);
        neighbors[j].push(i);
    }
    let mut distance = [[u8::MAX; N]; N];
    for (s, row) in distance.iter_mut().enumerate() {
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &neighbors[u] {
                if row[w] == u8::MAX {
                    row[w] = row[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    IcoGraph {
        faces,
        edges,
        diag2,
        diag3,
        neighbors,
        distance,
    }
}

impl IcoGraph {
    /// The 20 faces as sorted vertex triples, in lexicographic order.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// The 30 edges as sorted pairs in lexicographic order. This is the
    /// canonical ordering used for residual vectors.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn diag2(&self) -> &[(usize, usize)] {
        &self.diag2
    }

    pub fn diag3(&self) -> &[(usize, usize)] {
        &self.diag3
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        self.distance[u][v] as usize
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&sorted_pair(i, j)).ok()
    }

    /// The vertex combinatorially opposite to `v`.
    pub fn antipode(&self, v: usize) -> usize {
        (0..N)
            .find(|&w| self.distance(v, w) == 3)
            .expect("every vertex has an antipode")
    }

    /// The distance-2 diagonal joining the apexes of the two faces on edge `e`.
    ///
    /// Panics unless `e` is an edge lying in exactly two faces whose apexes
    /// form a distance-2 diagonal.
    pub fn orthogonal_diagonal(&self, e: (usize, usize)) -> (usize, usize) {
        let (i, j) = sorted_pair(e.0, e.1);
        assert!(self.is_edge(i, j), "({}, {}) is not an edge", i + 1, j + 1);
        let apexes: Vec<usize> = self
            .faces
            .iter()
            .filter(|f| f.contains(&i) && f.contains(&j))
            .map(|f| f.iter().copied().find(|&v| v != i && v != j).unwrap())
            .collect();
        assert_eq!(apexes.len(), 2, "edge must lie in exactly two faces");
        let diag = sorted_pair(apexes[0], apexes[1]);
        assert!(
            self.diag2.binary_search(&diag).is_ok(),
            "apexes must form a diagonal"
        );
        diag
    }

    /// Faces with a consistent combinatorial orientation: every edge is
    /// traversed in opposite directions by its two faces.
    pub fn oriented_faces(&self) -> Vec<[usize; 3]> {
        let mut oriented: Vec<Option<[usize; 3]>> = vec![None; self.faces.len()];
        oriented[0] = Some(self.faces[0]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            let f = oriented[k].unwrap();
            for (m, g) in self.faces.iter().enumerate() {
                if oriented[m].is_some() {
                    continue;
                }
                let shared: Vec<usize> = g.iter().copied().filter(|v| f.contains(v)).collect();
                if shared.len() != 2 {
                    continue;
                }
                // directed edge of f through the shared pair; g must traverse it reversed
                let (p, q) = (0..3)
                    .map(|s| (f[s], f[(s + 1) % 3]))
                    .find(|(p, q)| shared.contains(p) && shared.contains(q))
                    .unwrap();
                let r = g.iter().copied().find(|v| !shared.contains(v)).unwrap();
                oriented[m] = Some([q, p, r]);
                queue.push_back(m);
            }
        }
        oriented.into_iter().map(Option::unwrap).collect()
    }
}

/// Conjugacy-class label of an involution of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InvolutionClass {
    /// Conjugate to `a`: the involutions inside `A5`.
    A,
    /// The central involution `d`.
    D,
    /// Conjugate to `ad`: involutions outside `A5` other than `d`.
    AD,
}

impl InvolutionClass {
    pub fn label(&self) -> &'static str {
        match self {
            InvolutionClass::A => "a",
            InvolutionClass::D => "d",
            InvolutionClass::AD => "ad",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvolutionInfo {
    pub element: Perm,
    pub class: InvolutionClass,
    /// Equal to the normalizer of `⟨element⟩`.
    pub centralizer: Vec<Perm>,
}

#[derive(Clone, Debug)]
pub struct FourGroupInfo {
    pub elements: [Perm; 4],
    pub contains_d: bool,
    pub in_a5: bool,
    pub normalizer_order: usize,
}

#[derive(Clone, Debug)]
pub struct SubgroupClassification {
    pub involutions: Vec<InvolutionInfo>,
    pub four_groups: Vec<FourGroupInfo>,
}

impl SubgroupClassification {
    pub fn involution(&self, x: &Perm) -> Option<&InvolutionInfo> {
        self.involutions.iter().find(|i| i.element == *x)
    }
}

pub fn involution_class(group: &AutGroup, x: &Perm) -> InvolutionClass {
    if *x == group.d() {
        InvolutionClass::D
    } else if group.in_a5(x) {
        InvolutionClass::A
    } else {
        InvolutionClass::AD
    }
}

/// Labels every involution of `A` and lists the subgroups of order 4.
///
/// The membership-based label is checked against genuine conjugacy classes.
pub fn subgroup_classification(group: &AutGroup) -> SubgroupClassification {
    let involutions: Vec<InvolutionInfo> = group
        .elements()
        .iter()
        .filter(|x| x.is_involution())
        .map(|x| InvolutionInfo {
            element: *x,
            class: involution_class(group, x),
            centralizer: group.centralizer(x),
        })
        .collect();
    for info in &involutions {
        for y in group.conjugacy_class(&info.element) {
            assert_eq!(
                involution_class(group, &y),
                info.class,
                "label not a class function"
            );
        }
    }

    // Every group of order 4 here is a Klein four-group: A5 has no element of order 4.
    let mut seen = BTreeSet::new();
    let mut four_groups = Vec::new();
    for (k, x) in involutions.iter().enumerate() {
        for y in &involutions[k + 1..] {
            let (x, y) = (x.element, y.element);
            if x * y != y * x {
                continue;
            }
            let mut els = [Perm::identity(), x, y, x * y];
            els.sort();
            if seen.insert(els) {
                four_groups.push(FourGroupInfo {
                    elements: els,
                    contains_d: els.contains(&group.d()),
                    in_a5: els.iter().all(|p| group.in_a5(p)),
                    normalizer_order: group.normalizer(&els).len(),
                });
            }
        }
    }
    SubgroupClassification {
        involutions,
        four_groups,
    }
}

/// Isomorphism type of a stabilizer, refined by the membership flags used to
/// label the rows of the classification table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StabilizerType {
    C2xA5,
    C2xD10,
    C2xD6,
    /// `D10`, not contained in `A5`.
    D10,
    /// `D6`, not contained in `A5`.
    D6,
    /// `C2²` containing `d`.
    KleinWithD,
    /// `C2²` neither containing `d` nor inside `A5`.
    KleinMixed,
    /// `C2²` inside `A5`.
    KleinInA5,
    /// `C2` inside `A5`.
    C2InA5,
    /// `C2` outside `A5` and different from `⟨d⟩`.
    C2Mixed,
    /// `⟨d⟩`.
    C2Central,
    Trivial,
    Other {
        order: usize,
        note: String,
    },
}

impl StabilizerType {
    pub fn label(&self) -> String {
        match self {
            StabilizerType::C2xA5 => "C2 x A5".into(),
            StabilizerType::C2xD10 => "C2 x D10".into(),
            StabilizerType::C2xD6 => "C2 x D6".into(),
            StabilizerType::D10 => "D10 (not <= A5)".into(),
            StabilizerType::D6 => "D6 (not <= A5)".into(),
            StabilizerType::KleinWithD => "C2^2 (contains d)".into(),
            StabilizerType::KleinMixed => "C2^2 (not contains d, not <= A5)".into(),
            StabilizerType::KleinInA5 => "C2^2 (<= A5)".into(),
            StabilizerType::C2InA5 => "C2 (<= A5)".into(),
            StabilizerType::C2Mixed => "C2 (not contains d, not <= A5)".into(),
            StabilizerType::C2Central => "C2 (= <d>)".into(),
            StabilizerType::Trivial => "1".into(),
            StabilizerType::Other { order, note } => format!("order {order} ({note})"),
        }
    }

    /// Number of equivalence classes of icosahedra with this automorphism
    /// group according to the published classification; `None` for the
    /// infinite `⟨d⟩` row and for types outside the table.
    pub fn paper_count(&self) -> Option<usize> {
        match self {
            StabilizerType::C2xA5 => Some(2),
            StabilizerType::C2xD10 => Some(4),
            StabilizerType::C2xD6 => Some(2),
            StabilizerType::D10 => Some(3),
            StabilizerType::D6 => Some(2),
            StabilizerType::KleinWithD => Some(1),
            StabilizerType::KleinMixed => Some(5),
            StabilizerType::KleinInA5 => Some(1),
            StabilizerType::C2InA5 => Some(5),
            StabilizerType::C2Mixed => Some(10),
            _ => None,
        }
    }

    /// The eleven table rows in their published order.
    pub fn table_rows() -> Vec<StabilizerType> {
        vec![
            StabilizerType::C2xA5,
            StabilizerType::C2xD10,
            StabilizerType::C2xD6,
            StabilizerType::D10,
            StabilizerType::D6,
            StabilizerType::KleinWithD,
            StabilizerType::KleinMixed,
            StabilizerType::KleinInA5,
            StabilizerType::C2InA5,
            StabilizerType::C2Mixed,
            StabilizerType::C2Central,
        ]
    }
}

fn is_abelian(elements: &[Perm]) -> bool {
    elements
        .iter()
        .all(|x| elements.iter().all(|y| *x * *y == *y * *x))
}

/// Identifies a subgroup of `A` (given by all of its elements).
pub fn classify_subgroup(group: &AutGroup, elements: &[Perm]) -> StabilizerType {
    let has_d = elements.contains(&group.d());
    let in_a5 = elements.iter().all(|p| group.in_a5(p));
    let abelian = is_abelian(elements);
    let other = |note: &str| StabilizerType::Other {
        order: elements.len(),
        note: note.into(),
    };
    match elements.len() {
        1 => StabilizerType::Trivial,
        2 if has_d => StabilizerType::C2Central,
        2 if in_a5 => StabilizerType::C2InA5,
        2 => StabilizerType::C2Mixed,
        4 if has_d => StabilizerType::KleinWithD,
        4 if in_a5 => StabilizerType::KleinInA5,
        4 => StabilizerType::KleinMixed,
        6 if !abelian && !in_a5 => StabilizerType::D6,
        10 if !abelian && !in_a5 => StabilizerType::D10,
        12 if has_d && elements.iter().any(|p| p.order() == 6) => StabilizerType::C2xD6,
        20 if has_d => StabilizerType::C2xD10,
        120 => StabilizerType::C2xA5,
        3 | 5 => other("cyclic"),
        6 if abelian => other("C6"),
        6 => other("D6 <= A5"),
        10 if abelian => other("C10"),
        10 => other("D10 <= A5"),
        12 => other("A4"),
        _ => other("unlisted"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_has_order_120_and_identity_first() {
        let g = build_group();
        assert_eq!(g.len(), 120);
        assert!(g.elements()[0].is_identity());
    }

    #[test]
    fn d_is_central_involution() {
        let g = build_group();
        let d = g.d();
        assert!((d * d).is_identity());
        for x in g.elements() {
            assert_eq!(*x * d, d * *x);
        }
        assert_eq!(g.center().len(), 2);
    }

    #[test]
    fn cycle_notation_round_trip() {
        let a = generator_a();
        assert_eq!(a.cycle_notation(), "(1,2)(3,4)(5,7)(6,8)(9,11)(10,12)");
        assert_eq!(Perm::parse_cycles(&a.cycle_notation()), Some(a));
        assert_eq!(Perm::parse_cycles("()"), Some(Perm::identity()));
        assert_eq!(Perm::parse_cycles("(1,2)(2,3)"), None);
        assert_eq!(Perm::parse_cycles("(1,13)"), None);
    }

    #[test]
    fn ad_moves_eight_vertices() {
        let g = build_group();
        let ad = g.ad();
        assert_eq!(ad.cycle_notation(), "(1,10)(2,12)(3,11)(4,9)");
        assert_eq!(ad.fixed_points(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn orbit_sizes_and_seeds() {
        let g = build_group();
        let graph = build_graph(&g);
        assert_eq!(graph.faces().len(), 20);
        assert_eq!(graph.edges().len(), 30);
        assert!(graph.diag3().contains(&(0, 11)));
        // a fixes {1,2} setwise and sends 3 to 4
        assert!(graph.faces().contains(&[0, 1, 3]));
    }

    #[test]
    fn incidence_counts() {
        let g = build_group();
        let graph = build_graph(&g);
        for v in 0..N {
            assert_eq!(graph.neighbors(v).len(), 5);
            assert_eq!(graph.faces().iter().filter(|f| f.contains(&v)).count(), 5);
        }
        for &(i, j) in graph.edges() {
            let n = graph
                .faces()
                .iter()
                .filter(|f| f.contains(&i) && f.contains(&j))
                .count();
            assert_eq!(n, 2);
        }
        for f in graph.faces() {
            assert!(
                graph.is_edge(f[0], f[1]) && graph.is_edge(f[1], f[2]) && graph.is_edge(f[0], f[2])
            );
        }
    }

    #[test]
    fn pair_sets_are_disjoint() {
        let g = build_group();
        let graph = build_graph(&g);
        let e: BTreeSet<_> = graph.edges().iter().collect();
        let d2: BTreeSet<_> = graph.diag2().iter().collect();
        let d3: BTreeSet<_> = graph.diag3().iter().collect();
        assert!(e.is_disjoint(&d2) && e.is_disjoint(&d3) && d2.is_disjoint(&d3));
        assert_eq!(e.len() + d2.len() + d3.len(), 66);
    }

    #[test]
    fn diag3_matches_cycles_of_d() {
        let g = build_group();
        let graph = build_graph(&g);
        let from_d: BTreeSet<(usize, usize)> = g
            .d()
            .cycles()
            .iter()
            .map(|c| sorted_pair(c[0], c[1]))
            .collect();
        let diag3: BTreeSet<(usize, usize)> = graph.diag3().iter().copied().collect();
        assert_eq!(from_d, diag3);
        for v in 0..N {
            assert_eq!(graph.antipode(v), g.d().apply(v));
        }
    }

    #[test]
    fn orthogonal_diagonal_of_first_edge() {
        let g = build_group();
        let graph = build_graph(&g);
        assert_eq!(graph.orthogonal_diagonal((0, 1)), (2, 3));
    }

    #[test]
    fn orthogonal_diagonal_is_equivariant_bijection() {
        let g = build_group();
        let graph = build_graph(&g);
        let image: BTreeSet<_> = graph
            .edges()
            .iter()
            .map(|&e| graph.orthogonal_diagonal(e))
            .collect();
        assert_eq!(image.len(), 30);
        assert_eq!(
            image.into_iter().collect::<Vec<_>>(),
            graph.diag2().to_vec()
        );
        for x in g.elements() {
            for &e in graph.edges() {
                assert_eq!(
                    graph.orthogonal_diagonal(x.map_pair(e)),
                    x.map_pair(graph.orthogonal_diagonal(e))
                );
            }
        }
    }

    #[test]
    fn oriented_faces_are_consistent() {
        let g = build_group();
        let graph = build_graph(&g);
        let faces = graph.oriented_faces();
        let mut directed = BTreeSet::new();
        for f in &faces {
            for s in 0..3 {
                assert!(
                    directed.insert((f[s], f[(s + 1) % 3])),
                    "directed edge used twice"
                );
            }
        }
        assert_eq!(directed.len(), 60);
    }

    #[test]
    fn involution_labels_and_centralizers() {
        let g = build_group();
        let cls = subgroup_classification(&g);
        assert_eq!(cls.involutions.len(), 31);
        let count = |c| cls.involutions.iter().filter(|i| i.class == c).count();
        assert_eq!(count(InvolutionClass::A), 15);
        assert_eq!(count(InvolutionClass::AD), 15);
        assert_eq!(count(InvolutionClass::D), 1);

        let a = cls.involution(&g.a()).unwrap();
        assert_eq!(a.class, InvolutionClass::A);
        let expected = closure(&[g.a(), g.b(), g.d()]);
        assert_eq!(expected.len(), 8);
        assert_eq!(a.centralizer, expected);

        let d = cls.involution(&g.d()).unwrap();
        assert_eq!(d.class, InvolutionClass::D);
        assert_eq!(d.centralizer.len(), 120);
        assert_eq!(cls.involution(&g.ad()).unwrap().class, InvolutionClass::AD);
    }

    #[test]
    fn four_groups_split_by_flags() {
        let g = build_group();
        let cls = subgroup_classification(&g);
        let with_d = cls.four_groups.iter().filter(|f| f.contains_d).count();
        let in_a5 = cls.four_groups.iter().filter(|f| f.in_a5).count();
        // one <x, d> for each of the 15 A5-involutions; five Klein groups in A5
        assert_eq!(with_d, 15);
        assert_eq!(in_a5, 5);
        assert_eq!(cls.four_groups.len(), 35);
    }

    #[test]
    fn classify_named_subgroups() {
        let g = build_group();
        assert_eq!(classify_subgroup(&g, g.elements()), StabilizerType::C2xA5);
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.d()])),
            StabilizerType::C2Central
        );
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.a()])),
            StabilizerType::C2InA5
        );
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.ad()])),
            StabilizerType::C2Mixed
        );
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.a(), g.d()])),
            StabilizerType::KleinWithD
        );
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.a(), g.b()])),
            StabilizerType::KleinInA5
        );
        assert_eq!(
            classify_subgroup(&g, &closure(&[g.a(), g.b() * g.d()])),
            StabilizerType::KleinMixed
        );
    }
}
