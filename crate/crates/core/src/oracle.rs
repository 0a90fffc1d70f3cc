//! Minimal polynomials of Gram traces, one row per formal Gram matrix with
//! non-central automorphism group, and their compensated evaluation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::combinatorics::StabilizerType;

/// Threshold on `|p(trace)|` for declaring a match.
pub const MATCH_TOL: f64 = 1e-6;

/// One row of the classification of formal Gram matrices.
#[derive(Clone, Debug, Serialize)]
pub struct TraceOracle {
    /// Short unique tag, e.g. `"C2xD10/dG4"`.
    pub label: &'static str,
    /// Automorphism group type of the real icosahedra in this row.
    #[serde(skip)]
    pub stabilizer: StabilizerType,
    /// Sylow-2 generators with the traces of `δ` on the two generators and
    /// on their product (`+`, `-`, `*` for 1, −1, −3).
    pub sylow: &'static str,
    /// Degree of the residue class field.
    pub d_g: usize,
    /// Number of real embeddings up to `A`-equivalence.
    pub r_f: usize,
    /// Degree of the minimal polynomial of the trace.
    pub degree: usize,
    /// Monic coefficients `(num, den)` from the leading term down; `None`
    /// for rows whose polynomial is only known through its first terms.
    pub coefficients: Option<Vec<(i64, i64)>>,
    /// The coefficient of `λ^{degree−1}`, also for metadata-only rows.
    pub subleading: (i64, i64),
}

impl TraceOracle {
    pub fn certified(&self) -> bool {
        self.coefficients.is_some()
    }

    /// `|p(trace)|` with compensated Horner evaluation, or `None` for
    /// metadata-only rows.
    pub fn residual(&self, trace: f64) -> Option<f64> {
        self.coefficients.as_ref().map(|c| verify_trace(c, trace))
    }

    pub fn matches(&self, trace: f64) -> bool {
        self.residual(trace).is_some_and(|r| r < MATCH_TOL)
    }

    /// Real roots in ascending order (certified rows only).
    pub fn real_roots(&self) -> Vec<f64> {
        let Some(c) = &self.coefficients else {
            return Vec::new();
        };
        let n = c.len() - 1;
        let mut companion = DMatrix::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for (k, &(num, den)) in c.iter().skip(1).enumerate() {
            companion[(n - 1 - k, n - 1)] = -(num as f64) / den as f64;
        }
        let mut roots: Vec<f64> = companion
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() < 1e-9 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        // Polish each root with Newton steps on the exact polynomial.
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = horner_with_derivative(c, *r);
                if dp != 0.0 {
                    *r -= p / dp;
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }
}

fn horner_with_derivative(coeffs: &[(i64, i64)], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &(num, den) in coeffs {
        dp = dp * x + p;
        p = p * x + num as f64 / den as f64;
    }
    (p, dp)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `|p(x)|` for a rational polynomial (leading coefficient first), computed
/// by clearing denominators and running compensated Horner on the integer
/// coefficients, which are exact in double precision.
pub fn verify_trace(coeffs: &[(i64, i64)], x: f64) -> f64 {
    let lcm = coeffs.iter().fold(1i128, |l, &(_, den)| {
        let den = den as i128;
        l / gcd(l, den) * den
    });
    let ints: Vec<f64> = coeffs
        .iter()
        .map(|&(num, den)| (num as i128 * (lcm / den as i128)) as f64)
        .collect();
    let mut s = ints[0];
    let mut c = 0.0;
    for &a in &ints[1..] {
        let (p, pi) = two_prod(s, x);
        let (t, sigma) = two_sum(p, a);
        s = t;
        c = c * x + (pi + sigma);
    }
    ((s + c) / lcm as f64).abs()
}

#[allow(clippy::too_many_arguments)]
fn row(
    label: &'static str,
    stabilizer: StabilizerType,
    sylow: &'static str,
    d_g: usize,
    r_f: usize,
    degree: usize,
    coefficients: Option<Vec<(i64, i64)>>,
    subleading: (i64, i64),
) -> TraceOracle {
    if let Some(c) = &coefficients {
        debug_assert_eq!(c.len(), degree + 1);
        debug_assert_eq!(c[1], subleading);
    }
    TraceOracle {
        label,
        stabilizer,
        sylow,
        d_g,
        r_f,
        degree,
        coefficients,
        subleading,
    }
}

/// The fourteen formal Gram matrices. Together their real embeddings give
/// the 35 classes of icosahedra with non-central automorphism group.
pub fn trace_oracles() -> Vec<TraceOracle> {
    use StabilizerType::*;
    let one = |v: i64| (v, 1);
    vec![
        row(
            "C2^2<a,d>",
            KleinWithD,
            "<a,d> *-/+",
            8,
            1,
            4,
            Some(vec![one(1), (-76, 3), one(238), (-4964, 5), (23767, 15)]),
            (-76, 3),
        ),
        row(
            "C2xA5",
            C2xA5,
            "<a,b,d>",
            2,
            2,
            2,
            Some(vec![one(1), one(-15), one(45)]),
            one(-15),
        ),
        row(
            "C2xD10",
            C2xD10,
            "<a,d> -*/+",
            2,
            2,
            2,
            Some(vec![one(1), one(-15), (269, 5)]),
            one(-15),
        ),
        row(
            "C2^2<a,bd>",
            KleinMixed,
            "<a,bd> -+/+",
            2,
            2,
            2,
            Some(vec![one(1), (-71, 5), (10561, 225)]),
            (-71, 5),
        ),
        row(
            "C2xD10/dG4",
            C2xD10,
            "<a,d> -+/+",
            4,
            2,
            4,
            Some(vec![one(1), one(-18), (583, 5), (-1658, 5), (9101, 25)]),
            one(-18),
        ),
        row(
            "C2xD6",
            C2xD6,
            "<a,d> -+/+",
            4,
            2,
            4,
            Some(vec![one(1), one(-26), one(243), one(-970), one(1397)]),
            one(-26),
        ),
        row(
            "C2^2<a,bd>/dG24",
            KleinMixed,
            "<a,bd> -+/+",
            24,
            3,
            12,
            None,
            (-5179 * 4, 225),
        ),
        row(
            "C2^2<a,b>/dG30",
            KleinInA5,
            "<a,b> --/-",
            30,
            1,
            5,
            None,
            (-117, 2),
        ),
        row(
            "C2<a>/dG172",
            C2InA5,
            "<a> -",
            172,
            5,
            43,
            None,
            (-73 * 7 * 11 * 461_687, 4 * 27 * 25 * 29 * 79),
        ),
        row(
            "D10",
            D10,
            "<ad> +",
            2,
            2,
            2,
            Some(vec![one(1), (-44, 3), (2131, 45)]),
            (-44, 3),
        ),
        row(
            "D6",
            D6,
            "<ad> +",
            2,
            2,
            2,
            Some(vec![one(1), (-68, 5), (1111, 25)]),
            (-68, 5),
        ),
        row(
            "C2<ad>/dG36",
            C2Mixed,
            "<ad> +",
            36,
            4,
            18,
            None,
            (-1106, 9),
        ),
        row(
            "C2<ad>/dG168",
            C2Mixed,
            "<ad> +",
            168,
            6,
            42,
            None,
            (-2 * 719 * 1223, 27 * 5 * 43),
        ),
        row(
            "D10/dG4",
            D10,
            "<ad> +",
            4,
            1,
            2,
            Some(vec![one(1), (-26, 3), (149, 9)]),
            (-26, 3),
        ),
    ]
}

/// Certified oracles whose polynomial vanishes at `trace` within
/// [`MATCH_TOL`], optionally restricted to a stabilizer type.
pub fn matching_oracles(trace: f64, stabilizer: Option<&StabilizerType>) -> Vec<TraceOracle> {
    trace_oracles()
        .into_iter()
        .filter(|o| stabilizer.is_none_or(|s| &o.stabilizer == s))
        .filter(|o| o.matches(trace))
        .collect()
}
