//! Multistart damped Gauss–Newton over an ansatz, deduplication into
//! equivalence classes under `A`, and the classification report.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{materialize, residuals_and_jacobian, Ansatz, CaseId, ExpectedOutcome};
use crate::combinatorics::{classify_subgroup, AutGroup, IcoGraph, StabilizerType};
use crate::oracle::{trace_oracles, TraceOracle};
use crate::realization::{
    gram_equivalent, is_icosahedron, CoordinateMatrix, IcosaSolution, Tolerances,
};

/// Relative singular-value cutoff for the least-squares step.
pub const PINV_RTOL: f64 = 1e-10;
/// Maximum number of step halvings in the line search.
pub const MAX_HALVINGS: usize = 30;
/// Width of the trace window searched for equivalent representatives.
pub const TRACE_WINDOW: f64 = 2e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub n_starts: usize,
    /// Half-width of the uniform start box.
    pub start_box: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub rng_seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            n_starts: 2000,
            start_box: 1.5,
            max_iters: 200,
            residual_tol: 1e-8,
            rng_seed: 7,
            tolerances: Tolerances::default(),
        }
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Least-squares Gauss–Newton step `−J⁺ r` with a relative rank cutoff.
pub fn gauss_newton_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = (PINV_RTOL * smax).max(f64::MIN_POSITIVE);
    match svd.solve(r, eps) {
        Ok(step) => -step,
        Err(_) => DVector::zeros(jac.ncols()),
    }
}

/// Damped Gauss–Newton from `y0`; returns the end point iff its maximal
/// reduced residual is below `cfg.residual_tol`.
pub fn solve_once(ansatz: &Ansatz, y0: &[f64], cfg: &SolveConfig) -> Option<Vec<f64>> {
    let (y, res) = gauss_newton(ansatz, y0, cfg.max_iters)?;
    (res < cfg.residual_tol).then_some(y)
}

/// Runs damped Gauss–Newton to stagnation; returns the end point and its
/// maximal residual. `None` only on a dimension mismatch.
pub fn gauss_newton(ansatz: &Ansatz, y0: &[f64], max_iters: usize) -> Option<(Vec<f64>, f64)> {
    let mut y = DVector::from_column_slice(y0);
    let (mut r, mut jac) = residuals_and_jacobian(ansatz, y.as_slice()).ok()?;
    let mut f = r.norm_squared();
    for _ in 0..max_iters {
        if max_abs(&r) < 1e-14 {
            break;
        }
        let step = gauss_newton_step(&jac, &r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &y + &step * t;
            let (rt, jt) = residuals_and_jacobian(ansatz, trial.as_slice()).ok()?;
            let ft = rt.norm_squared();
            if ft < f {
                accepted = Some((trial, rt, jt, ft));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((yn, rn, jn, fnew)) => {
                y = yn;
                r = rn;
                jac = jn;
                f = fnew;
            }
            None => break,
        }
    }
    let res = max_abs(&r);
    Some((y.as_slice().to_vec(), res))
}

/// Outcome of one start.
#[derive(Clone, Debug)]
pub enum StartOutcome {
    NotConverged,
    /// All residuals vanish but two vertices coincide.
    Degenerate,
    /// Reduced residuals vanish but some full edge residual does not.
    FalseAccept,
    Accepted {
        y: Vec<f64>,
        coords: CoordinateMatrix,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartStats {
    pub starts: usize,
    pub converged: usize,
    pub accepted: usize,
    pub degenerate: usize,
    pub false_accepts: usize,
}

/// One equivalence class under `A`.
#[derive(Clone, Debug)]
pub struct ClassRecord {
    pub solution: IcosaSolution,
    /// Parameters of the representative in the ansatz it was found in.
    pub y: Vec<f64>,
    /// Number of accepted starts landing in this class.
    pub count: usize,
    /// Every case whose multistart found the class.
    pub cases: Vec<CaseId>,
    pub stabilizer: StabilizerType,
    /// Label and residual of the matching certified trace relation.
    pub oracle: Option<(String, f64)>,
    /// `|C(x)| / |Aut ∩ C(x)|` for the generator `x` of the finding case.
    pub centralizer_orbit: usize,
    /// `|A| / |Aut|`.
    pub group_orbit: usize,
}

impl ClassRecord {
    /// Derives the stabilizer type, oracle match and orbit lengths of a
    /// verified solution.
    pub fn new(
        solution: IcosaSolution,
        y: Vec<f64>,
        count: usize,
        cases: Vec<CaseId>,
        group: &AutGroup,
    ) -> Self {
        make_record(solution, y, count, cases, group, &trace_oracles())
    }
}

#[derive(Clone, Debug)]
pub struct ClassCatalog {
    pub case: Option<CaseId>,
    pub config: SolveConfig,
    pub stats: StartStats,
    /// Representatives sorted by trace, pairwise inequivalent under `A`.
    pub classes: Vec<ClassRecord>,
}

impl ClassCatalog {
    pub fn traces(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.solution.trace).collect()
    }
}

/// Best certified oracle for a class: the stabilizer must agree and the
/// polynomial must vanish within the match threshold.
pub fn match_oracle(
    trace: f64,
    stabilizer: &StabilizerType,
    oracles: &[TraceOracle],
) -> Option<(String, f64)> {
    oracles
        .iter()
        .filter(|o| &o.stabilizer == stabilizer)
        .filter_map(|o| o.residual(trace).map(|r| (o.label.to_string(), r)))
        .filter(|(_, r)| *r < crate::oracle::MATCH_TOL)
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn lex_cmp(a: &IcosaSolution, b: &IcosaSolution) -> std::cmp::Ordering {
    a.trace.total_cmp(&b.trace).then_with(|| {
        let (ga, gb) = (a.gram.matrix(), b.gram.matrix());
        ga.iter()
            .zip(gb.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Deterministic start vector for start number `index`.
pub fn start_vector(seed: u64, index: u64, dim: usize, half_width: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..dim)
        .map(|_| rng.random_range(-half_width..half_width))
        .collect()
}

pub fn run_start(ansatz: &Ansatz, y0: &[f64], cfg: &SolveConfig, graph: &IcoGraph) -> StartOutcome {
    let Some(y) = solve_once(ansatz, y0, cfg) else {
        return StartOutcome::NotConverged;
    };
    let Ok(coords) = materialize(ansatz, &y) else {
        return StartOutcome::NotConverged;
    };
    let check = is_icosahedron(&coords, graph, &cfg.tolerances);
    if check.max_residual >= cfg.tolerances.residual {
        StartOutcome::FalseAccept
    } else if !check.is_icosahedron {
        StartOutcome::Degenerate
    } else {
        StartOutcome::Accepted { y, coords }
    }
}

/// Merges solutions into classes: sort by (trace, Gram entries), then scan
/// each against the classes inside the trace window.
fn dedupe(
    mut found: Vec<(IcosaSolution, Vec<f64>, usize, Vec<CaseId>)>,
    group: &AutGroup,
    tol: f64,
) -> Vec<(IcosaSolution, Vec<f64>, usize, Vec<CaseId>)> {
    found.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let mut classes: Vec<(IcosaSolution, Vec<f64>, usize, Vec<CaseId>)> = Vec::new();
    for (sol, y, count, cases) in found {
        let mut hit = None;
        for k in (0..classes.len()).rev() {
            if sol.trace - classes[k].0.trace > TRACE_WINDOW {
                break;
            }
            if gram_equivalent(&classes[k].0.gram, &sol.gram, group, tol).is_some() {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => {
                classes[k].2 += count;
                for c in cases {
                    if !classes[k].3.contains(&c) {
                        classes[k].3.push(c);
                    }
                }
                classes[k].3.sort();
            }
            None => classes.push((sol, y, count, cases)),
        }
    }
    classes
}

fn make_record(
    solution: IcosaSolution,
    y: Vec<f64>,
    count: usize,
    cases: Vec<CaseId>,
    group: &AutGroup,
    oracles: &[TraceOracle],
) -> ClassRecord {
    let stabilizer = classify_subgroup(group, &solution.aut);
    let oracle = match_oracle(solution.trace, &stabilizer, oracles);
    let x = cases
        .first()
        .map(|c| c.generator.element(group))
        .unwrap_or(group.d());
    let cent = group.centralizer(&x);
    let inter = cent.iter().filter(|g| solution.aut.contains(g)).count();
    ClassRecord {
        group_orbit: group.len() / solution.aut.len(),
        centralizer_orbit: cent.len() / inter.max(1),
        stabilizer,
        oracle,
        solution,
        y,
        count,
        cases,
    }
}

/// Runs `cfg.n_starts` independent starts (in parallel) and collects the
/// accepted solutions into equivalence classes under `A`.
pub fn multistart(
    ansatz: &Ansatz,
    cfg: &SolveConfig,
    graph: &IcoGraph,
    group: &AutGroup,
) -> ClassCatalog {
    let outcomes: Vec<StartOutcome> = (0..cfg.n_starts as u64)
        .into_par_iter()
        .map(|i| {
            let y0 = start_vector(cfg.rng_seed, i, ansatz.dim(), cfg.start_box);
            run_start(ansatz, &y0, cfg, graph)
        })
        .collect();
    let mut stats = StartStats {
        starts: cfg.n_starts,
        ..Default::default()
    };
    let mut accepted = Vec::new();
    for o in outcomes {
        match o {
            StartOutcome::NotConverged => {}
            StartOutcome::Degenerate => {
                stats.converged += 1;
                stats.degenerate += 1;
            }
            StartOutcome::FalseAccept => {
                stats.converged += 1;
                stats.false_accepts += 1;
            }
            StartOutcome::Accepted { y, coords } => {
                stats.converged += 1;
                stats.accepted += 1;
                accepted.push((y, coords));
            }
        }
    }
    let tag = ansatz.case.to_string();
    let found: Vec<_> = accepted
        .into_par_iter()
        .map(|(y, coords)| {
            let sol = IcosaSolution::from_coords(coords, graph, group, &cfg.tolerances, &tag);
            (sol, y, 1usize, vec![ansatz.case])
        })
        .collect();
    let oracles = trace_oracles();
    let classes = dedupe(found, group, cfg.tolerances.equivalence)
        .into_iter()
        .map(|(sol, y, count, cases)| make_record(sol, y, count, cases, group, &oracles))
        .collect();
    ClassCatalog {
        case: Some(ansatz.case),
        config: cfg.clone(),
        stats,
        classes,
    }
}

/// Cross-case merge of catalogs into one list of unique classes.
pub fn merge_catalogs(catalogs: &[ClassCatalog], group: &AutGroup, tol: f64) -> Vec<ClassRecord> {
    let found: Vec<_> = catalogs
        .iter()
        .flat_map(|cat| cat.classes.iter())
        .map(|c| (c.solution.clone(), c.y.clone(), c.count, c.cases.clone()))
        .collect();
    let oracles = trace_oracles();
    dedupe(found, group, tol)
        .into_iter()
        .map(|(sol, y, count, cases)| make_record(sol, y, count, cases, group, &oracles))
        .collect()
}

/// How an observed count relates to the published one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    /// Certified row, observed = published.
    Match,
    /// Certified row, fewer classes observed (multistart is a lower bound).
    Missing,
    /// More classes than published: a numerical artifact or a discrepancy.
    Excess,
    /// Row depends on high-degree algebra; observed counts are reported,
    /// not asserted.
    Reported,
    /// The infinite family of `⟨d⟩`-invariant icosahedra.
    Curve,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub paper: Option<usize>,
    pub observed: usize,
    pub status: RowStatus,
    /// Traces of the observed classes.
    pub traces: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleRow {
    pub label: String,
    pub r_f: usize,
    pub certified: bool,
    pub observed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub rows: Vec<ReportRow>,
    pub oracle_rows: Vec<OracleRow>,
    /// Classes whose stabilizer is trivial or outside the table.
    pub other: Vec<(String, f64)>,
    pub total_classes: usize,
}

/// Whether every trace relation behind a stabilizer row is certified.
fn row_certified(ty: &StabilizerType, oracles: &[TraceOracle]) -> bool {
    oracles
        .iter()
        .filter(|o| &o.stabilizer == ty)
        .all(|o| o.certified())
}

/// Observed-versus-published counts per automorphism-group type, from
/// already merged classes.
pub fn classification_report(classes: &[ClassRecord]) -> ClassificationReport {
    let oracles = trace_oracles();
    let mut by_type: BTreeMap<StabilizerType, Vec<f64>> = BTreeMap::new();
    for c in classes {
        by_type
            .entry(c.stabilizer.clone())
            .or_default()
            .push(c.solution.trace);
    }
    let rows = StabilizerType::table_rows()
        .into_iter()
        .map(|ty| {
            let traces = by_type.get(&ty).cloned().unwrap_or_default();
            let observed = traces.len();
            let paper = ty.paper_count();
            let status = match paper {
                None => RowStatus::Curve,
                Some(_) if !row_certified(&ty, &oracles) => RowStatus::Reported,
                Some(p) if observed == p => RowStatus::Match,
                Some(p) if observed < p => RowStatus::Missing,
                Some(_) => RowStatus::Excess,
            };
            ReportRow {
                label: ty.label(),
                paper,
                observed,
                status,
                traces,
            }
        })
        .collect();
    let oracle_rows = oracles
        .iter()
        .map(|o| OracleRow {
            label: o.label.to_string(),
            r_f: o.r_f,
            certified: o.certified(),
            observed: classes
                .iter()
                .filter(|c| c.oracle.as_ref().is_some_and(|(l, _)| l == o.label))
                .count(),
        })
        .collect();
    let table: Vec<StabilizerType> = StabilizerType::table_rows();
    let other = classes
        .iter()
        .filter(|c| !table.contains(&c.stabilizer))
        .map(|c| (c.stabilizer.label(), c.solution.trace))
        .collect();
    ClassificationReport {
        rows,
        oracle_rows,
        other,
        total_classes: classes.len(),
    }
}

/// Whether an empty catalog is a failure for this case.
pub fn unexpected_empty(case: &CaseId, catalog: &ClassCatalog) -> bool {
    catalog.classes.is_empty() && case.expected_outcome() != ExpectedOutcome::Empty
}
