//! The one-parameter family of `⟨d⟩`-invariant icosahedra with
//! `δ(d) = diag(1, −1, −1)`: tangent field from signed maximal minors of the
//! Jacobian, Runge–Kutta tracing and a certificate of non-constant trace.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, materialize, residuals_and_jacobian, Ansatz, CaseId, Generator};
use crate::combinatorics::{AutGroup, IcoGraph};
use crate::error::{Error, Result};
use crate::realization::{
    gram_equivalent, gram_from_coords, is_icosahedron, stabilizer_with_margin, Tolerances,
};
use crate::solver::{gauss_newton, multistart, SolveConfig};

/// Relative kernel residual accepted for `τ·Dpᵀ`.
pub const KERNEL_TOL: f64 = 1e-8;
/// `|τ|` below this fraction of the Hadamard bound counts as degenerate.
pub const DEGENERATE_RTOL: f64 = 1e-14;
/// Residual at which a step is declared failed.
pub const STEP_FAILURE: f64 = 1e-3;
/// Residual reached by the projection in projected mode.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Local error per Runge–Kutta substep, estimated by step doubling.
pub const LOCAL_TOL: f64 = 1e-12;
/// Smallest admissible substep as a fraction of the output step.
const MIN_SUBSTEP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    /// The tangent field as is.
    Raw,
    /// Unit-speed field `τ/|τ|`.
    Arclength,
    /// Unit-speed field followed by a Gauss–Newton projection every step.
    Projected,
}

impl fmt::Display for TraceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceMode::Raw => "raw",
            TraceMode::Arclength => "arclength",
            TraceMode::Projected => "projected",
        })
    }
}

impl FromStr for TraceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(TraceMode::Raw),
            "arclength" => Ok(TraceMode::Arclength),
            "projected" => Ok(TraceMode::Projected),
            other => Err(format!(
                "unknown mode {other:?} (raw, arclength, projected)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveState {
    pub step: usize,
    pub t: f64,
    pub y: Vec<f64>,
    /// Maximal absolute reduced residual.
    pub residual: f64,
    pub trace: f64,
    pub min_distance: f64,
    /// Two vertices closer than the distinctness tolerance.
    pub degenerate: bool,
    /// Runge–Kutta substeps taken since the previous state.
    pub substeps: usize,
}

/// Signed maximal minors of an `n × (n+1)` matrix:
/// `τ_i = (−1)^i det(J without column i)`, 0-based, one LU per minor.
pub fn laplace_tangent(jac: &DMatrix<f64>) -> DVector<f64> {
    let (n, m) = jac.shape();
    assert_eq!(m, n + 1, "need one more column than rows");
    DVector::from_fn(m, |i, _| {
        let minor = jac.clone().remove_column(i);
        let det = minor.lu().determinant();
        if i % 2 == 0 {
            det
        } else {
            -det
        }
    })
}

/// `|τ·Jᵀ| / (|τ|·|J|)`.
pub fn kernel_residual(tau: &DVector<f64>, jac: &DMatrix<f64>) -> f64 {
    let denom = tau.norm() * jac.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (jac * tau).norm() / denom
}

/// Product of row norms: an upper bound for every maximal minor.
pub fn hadamard_scale(jac: &DMatrix<f64>) -> f64 {
    jac.row_iter().map(|r| r.norm()).product()
}

/// The flexible case and its tangent field.
#[derive(Clone, Debug)]
pub struct Flex {
    pub ansatz: Ansatz,
}

impl Flex {
    pub fn case() -> CaseId {
        CaseId::new(Generator::D, [1, -1, -1])
    }

    pub fn new(group: &AutGroup, graph: &IcoGraph) -> Result<Self> {
        Ok(Flex {
            ansatz: build_ansatz(&Self::case(), group, graph)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.ansatz.dim()
    }

    pub fn residuals(&self, y: &[f64]) -> Result<DVector<f64>> {
        Ok(residuals_and_jacobian(&self.ansatz, y)?.0)
    }

    pub fn jacobian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        Ok(residuals_and_jacobian(&self.ansatz, y)?.1)
    }

    pub fn max_residual(&self, y: &[f64]) -> Result<f64> {
        Ok(self.residuals(y)?.amax())
    }

    /// `τ(y)`; fails when the Jacobian is (numerically) rank deficient.
    pub fn tangent(&self, y: &[f64]) -> Result<DVector<f64>> {
        let jac = self.jacobian(y)?;
        let tau = laplace_tangent(&jac);
        let scale = hadamard_scale(&jac);
        let norm = tau.norm();
        if norm == 0.0 || norm < DEGENERATE_RTOL * scale || {
            let r = kernel_residual(&tau, &jac);
            r.is_nan() || r >= KERNEL_TOL
        } {
            return Err(Error::DegeneratePoint { norm, scale });
        }
        Ok(tau)
    }

    fn field(&self, y: &DVector<f64>, mode: TraceMode) -> Result<DVector<f64>> {
        let tau = self.tangent(y.as_slice())?;
        Ok(match mode {
            TraceMode::Raw => tau,
            TraceMode::Arclength | TraceMode::Projected => {
                let n = tau.norm();
                tau / n
            }
        })
    }

    fn state(
        &self,
        step: usize,
        t: f64,
        y: &DVector<f64>,
        graph: &IcoGraph,
        tol: &Tolerances,
    ) -> Result<CurveState> {
        let m = materialize(&self.ansatz, y.as_slice())?;
        let check = is_icosahedron(&m, graph, tol);
        Ok(CurveState {
            step,
            t,
            y: y.as_slice().to_vec(),
            residual: self.max_residual(y.as_slice())?,
            trace: gram_from_coords(&m).trace(),
            min_distance: check.min_distance,
            degenerate: check.min_distance <= tol.distinct,
            substeps: 0,
        })
    }

    fn rk4(
        &self,
        y: &DVector<f64>,
        h: f64,
        k1: &DVector<f64>,
        mode: TraceMode,
    ) -> Result<DVector<f64>> {
        let k2 = self.field(&(y + k1 * (h / 2.0)), mode)?;
        let k3 = self.field(&(y + &k2 * (h / 2.0)), mode)?;
        let k4 = self.field(&(y + &k3 * h), mode)?;
        Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
    }

    /// Integrates over one output step of length `h` with classical
    /// Runge–Kutta substeps whose size is controlled by step doubling.
    /// Returns the new point, the number of substeps and the proposed
    /// substep size for the next output step.
    fn advance(
        &self,
        y: &DVector<f64>,
        h: f64,
        h_guess: f64,
        mode: TraceMode,
        step: usize,
    ) -> Result<(DVector<f64>, usize, f64)> {
        let mut y = y.clone();
        let mut done = 0.0;
        let mut hs = h_guess.min(h);
        let mut substeps = 0;
        while done < h {
            let hs_try = hs.min(h - done);
            let k1 = self.field(&y, mode)?;
            let full = self.rk4(&y, hs_try, &k1, mode)?;
            let half = self.rk4(&y, hs_try / 2.0, &k1, mode)?;
            let k1_half = self.field(&half, mode)?;
            let two_halves = self.rk4(&half, hs_try / 2.0, &k1_half, mode)?;
            let err = (&two_halves - &full).norm() / 15.0;
            let factor = if err > 0.0 {
                0.9 * (LOCAL_TOL / err).powf(0.2)
            } else {
                2.0
            };
            if err <= LOCAL_TOL {
                y = two_halves;
                done += hs_try;
                substeps += 1;
                hs = hs.max(hs_try) * factor.clamp(1.0, 2.0);
            } else {
                hs = hs_try * factor.clamp(0.2, 0.9);
                if hs < MIN_SUBSTEP * h {
                    let residual = self.max_residual(y.as_slice())?;
                    return Err(Error::StepFailure { step, residual });
                }
            }
        }
        Ok((y, substeps, hs.min(h)))
    }

    /// Integrates `φ' = field(φ)`, `φ(0) = y0` over `[0, t_end]` and records
    /// `n_steps + 1` equally spaced states. Each output step is covered by
    /// classical RK4 substeps with step-doubling error control.
    pub fn trace_curve(
        &self,
        y0: &[f64],
        t_end: f64,
        n_steps: usize,
        mode: TraceMode,
        graph: &IcoGraph,
        tol: &Tolerances,
    ) -> Result<Vec<CurveState>> {
        let h = t_end / n_steps as f64;
        let mut y = DVector::from_column_slice(y0);
        let mut states = Vec::with_capacity(n_steps + 1);
        states.push(self.state(0, 0.0, &y, graph, tol)?);
        let mut h_sub = h;
        for step in 1..=n_steps {
            let (y_next, substeps, h_last) = self.advance(&y, h, h_sub, mode, step)?;
            y = y_next;
            h_sub = h_last;
            if mode == TraceMode::Projected {
                let (yp, res) =
                    gauss_newton(&self.ansatz, y.as_slice(), 50).expect("dimension fixed");
                if res >= PROJECTION_TOL {
                    return Err(Error::StepFailure {
                        step,
                        residual: res,
                    });
                }
                y = DVector::from_vec(yp);
            }
            let mut state = self.state(step, h * step as f64, &y, graph, tol)?;
            state.substeps = substeps;
            if state.residual.is_nan() || state.residual > STEP_FAILURE {
                return Err(Error::StepFailure {
                    step,
                    residual: state.residual,
                });
            }
            states.push(state);
        }
        Ok(states)
    }

    /// A solved start point: the multistart solution with the largest `|τ|`.
    pub fn starting_point(
        &self,
        cfg: &SolveConfig,
        graph: &IcoGraph,
        group: &AutGroup,
    ) -> Option<Vec<f64>> {
        let catalog = multistart(&self.ansatz, cfg, graph, group);
        catalog
            .classes
            .iter()
            .filter_map(|c| self.tangent(&c.y).ok().map(|tau| (tau.norm(), c.y.clone())))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, y)| y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateMember {
    pub step: usize,
    pub t: f64,
    pub trace: f64,
    /// Maximal absolute residual over all 30 edges.
    pub edge_residual: f64,
    pub min_distance: f64,
    pub coords: [[f64; 3]; 12],
}

/// Icosahedra from one traced arc, all `d`-invariant, pairwise
/// inequivalent under `A`, with separated Gram traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveCertificate {
    pub members: Vec<CertificateMember>,
    pub min_trace_gap: f64,
    pub trace_span: f64,
}

/// Selects up to `max_members` states with pairwise trace gaps above
/// `10·tol.equivalence`, re-verifies each one and checks pairwise
/// inequivalence by scanning `A`.
pub fn curve_certificate(
    flex: &Flex,
    states: &[CurveState],
    graph: &IcoGraph,
    group: &AutGroup,
    tol: &Tolerances,
    min_members: usize,
    max_members: usize,
) -> Result<CurveCertificate> {
    let gap = 10.0 * tol.equivalence;
    let mut valid: Vec<(&CurveState, crate::realization::CoordinateMatrix)> = states
        .iter()
        .filter(|s| !s.degenerate)
        .filter_map(|s| {
            let m = materialize(&flex.ansatz, &s.y).ok()?;
            let check = is_icosahedron(&m, graph, tol);
            let gram = gram_from_coords(&m);
            let (aut, _) = stabilizer_with_margin(&gram, group, tol.equivalence);
            (check.is_icosahedron && aut.contains(&group.d())).then_some((s, m))
        })
        .collect();
    valid.sort_by(|a, b| a.0.trace.total_cmp(&b.0.trace));
    let mut picked: Vec<usize> = Vec::new();
    for (k, (s, _)) in valid.iter().enumerate() {
        if picked
            .last()
            .is_none_or(|&p| s.trace - valid[p].0.trace > gap)
        {
            picked.push(k);
        }
    }
    if picked.len() > max_members && max_members >= 2 {
        let n = picked.len();
        picked = (0..max_members)
            .map(|i| picked[i * (n - 1) / (max_members - 1)])
            .collect();
    }
    let grams: Vec<_> = picked
        .iter()
        .map(|&k| gram_from_coords(&valid[k].1))
        .collect();
    for i in 0..grams.len() {
        for j in i + 1..grams.len() {
            if gram_equivalent(&grams[i], &grams[j], group, tol.equivalence).is_some() {
                return Err(Error::InsufficientSpread {
                    found: 0,
                    needed: min_members,
                });
            }
        }
    }
    if picked.len() < min_members {
        return Err(Error::InsufficientSpread {
            found: picked.len(),
            needed: min_members,
        });
    }
    let members: Vec<CertificateMember> = picked
        .iter()
        .map(|&k| {
            let (s, m) = &valid[k];
            let check = is_icosahedron(m, graph, tol);
            CertificateMember {
                step: s.step,
                t: s.t,
                trace: s.trace,
                edge_residual: check.max_residual,
                min_distance: check.min_distance,
                coords: m.to_columns(),
            }
        })
        .collect();
    let traces: Vec<f64> = members.iter().map(|m| m.trace).collect();
    let min_trace_gap = traces
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(CurveCertificate {
        trace_span: traces.last().unwrap() - traces[0],
        min_trace_gap,
        members,
    })
}
