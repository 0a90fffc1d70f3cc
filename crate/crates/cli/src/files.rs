//! On-disk formats: JSON documents with a common header, and OBJ meshes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use icosa_core::ansatz::CaseId;
use icosa_core::combinatorics::{classify_subgroup, AutGroup, IcoGraph, N};
use icosa_core::invariants::{SignificantPoint, StrengthSum};
use icosa_core::oracle::trace_oracles;
use icosa_core::realization::{generating_set, CoordinateMatrix, IcosaSolution, Tolerances};
use icosa_core::solver::{match_oracle, ClassRecord, ClassificationReport, StartStats};

use crate::config::{RunConfig, FORMAT_VERSION};
use crate::error::CliError;

pub const CATALOG: &str = "icosa-catalog";
pub const SHAPE: &str = "icosa-shape";
pub const REPORT: &str = "icosa-report";
pub const INVARIANTS: &str = "icosa-invariants";
pub const CURVE: &str = "icosa-curve";
pub const CERTIFICATE: &str = "icosa-certificate";

/// Fields shared by every output document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub input_hash: String,
}

impl Header {
    pub fn new(format: &str, config: RunConfig, input_hash: String) -> Self {
        Header {
            format: format.into(),
            version: FORMAT_VERSION,
            config,
            input_hash,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleMatch {
    pub label: String,
    pub residual: f64,
}

/// One verified icosahedron with its symmetry data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub label: String,
    pub trace: f64,
    pub stabilizer: String,
    pub aut_order: usize,
    /// Generators of the automorphism group in 1-based cycle notation.
    pub aut_generators: Vec<String>,
    pub delta_traces: BTreeMap<String, f64>,
    pub oracle: Option<OracleMatch>,
    pub max_edge_residual: f64,
    pub min_distance: f64,
    /// Vertex coordinates, one `[x, y, z]` per vertex.
    pub coords: [[f64; 3]; N],
}

impl ShapeEntry {
    pub fn from_solution(label: String, sol: &IcosaSolution, group: &AutGroup) -> Self {
        let stabilizer = classify_subgroup(group, &sol.aut);
        let oracle = match_oracle(sol.trace, &stabilizer, &trace_oracles())
            .map(|(label, residual)| OracleMatch { label, residual });
        ShapeEntry {
            label,
            trace: sol.trace,
            stabilizer: stabilizer.label(),
            aut_order: sol.aut.len(),
            aut_generators: generating_set(&sol.aut)
                .iter()
                .map(|g| g.cycle_notation())
                .collect(),
            delta_traces: sol.delta_traces.clone(),
            oracle,
            max_edge_residual: sol.check.max_residual,
            min_distance: sol.check.min_distance,
            coords: sol.coords.to_columns(),
        }
    }
}

/// One equivalence class found by multistart.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassEntry {
    pub shape: ShapeEntry,
    /// Accepted starts that landed in the class.
    pub count: usize,
    pub cases: Vec<String>,
    pub centralizer_orbit: usize,
    pub group_orbit: usize,
    /// Ansatz parameters of the representative.
    pub y: Vec<f64>,
}

impl ClassEntry {
    pub fn from_record(label: String, rec: &ClassRecord, group: &AutGroup) -> Self {
        ClassEntry {
            shape: ShapeEntry::from_solution(label, &rec.solution, group),
            count: rec.count,
            cases: rec.cases.iter().map(|c| c.to_string()).collect(),
            centralizer_orbit: rec.centralizer_orbit,
            group_orbit: rec.group_orbit,
            y: rec.y.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseRun {
    pub case: String,
    /// What the case analysis predicts: solutions, empty or a curve.
    pub expected: String,
    pub note: Option<String>,
    pub stats: StartStats,
    pub classes: Vec<ClassEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogFile {
    #[serde(flatten)]
    pub header: Header,
    pub runs: Vec<CaseRun>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeFile {
    #[serde(flatten)]
    pub header: Header,
    /// Dented vertices, 1-based, in order of application.
    pub dented: Vec<usize>,
    pub shape: ShapeEntry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(flatten)]
    pub header: Header,
    pub report: ClassificationReport,
    pub classes: Vec<ClassEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub label: String,
    pub trace: f64,
    pub significant_points: Vec<SignificantPoint>,
    pub strength_sum: StrengthSum,
    pub coplanar_neighbor_pairs: usize,
    /// Faces (0-based, in face-list order) breaking the face-angle rule.
    pub face_angle_rule_violations: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantsFile {
    #[serde(flatten)]
    pub header: Header,
    pub entries: Vec<InvariantEntry>,
}

/// First line of a curve stream; every further line is one curve state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveHeader {
    #[serde(flatten)]
    pub header: Header,
    pub start: Vec<f64>,
    pub start_trace: f64,
}

/// An icosahedron read back from any document, ready for re-verification.
#[derive(Clone, Debug)]
pub struct LoadedShape {
    pub label: String,
    pub coords: CoordinateMatrix,
    pub y: Vec<f64>,
    pub count: usize,
    pub cases: Vec<CaseId>,
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("document serializes");
    bytes.push(b'\n');
    bytes
}

fn data(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {msg}", path.display()))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| data(path, format!("schema mismatch: {e}")))
}

fn parse_cases(path: &Path, cases: &[String]) -> Result<Vec<CaseId>, CliError> {
    cases
        .iter()
        .map(|c| c.parse().map_err(|e| data(path, e)))
        .collect()
}

fn loaded(path: &Path, entry: &ClassEntry) -> Result<LoadedShape, CliError> {
    Ok(LoadedShape {
        label: entry.shape.label.clone(),
        coords: CoordinateMatrix::from_columns(&entry.shape.coords),
        y: entry.y.clone(),
        count: entry.count,
        cases: parse_cases(path, &entry.cases)?,
    })
}

/// Reads every icosahedron stored in a catalog, report or shape document.
pub fn load_shapes(path: &Path, bytes: &[u8]) -> Result<Vec<LoadedShape>, CliError> {
    #[derive(Deserialize)]
    struct Probe {
        format: String,
        version: u32,
    }
    let probe: Probe = parse(path, bytes)?;
    if probe.version != FORMAT_VERSION {
        return Err(data(
            path,
            format!(
                "format version {} (expected {FORMAT_VERSION})",
                probe.version
            ),
        ));
    }
    match probe.format.as_str() {
        CATALOG => {
            let file: CatalogFile = parse(path, bytes)?;
            file.runs
                .iter()
                .flat_map(|r| r.classes.iter())
                .map(|c| loaded(path, c))
                .collect()
        }
        REPORT => {
            let file: ReportFile = parse(path, bytes)?;
            file.classes.iter().map(|c| loaded(path, c)).collect()
        }
        SHAPE => {
            let file: ShapeFile = parse(path, bytes)?;
            Ok(vec![LoadedShape {
                label: file.shape.label,
                coords: CoordinateMatrix::from_columns(&file.shape.coords),
                y: Vec::new(),
                count: 1,
                cases: Vec::new(),
            }])
        }
        other => Err(data(path, format!("unsupported format {other:?}"))),
    }
}

/// Re-verifies a loaded icosahedron and recomputes its symmetry data.
pub fn verify_shape(
    shape: &LoadedShape,
    graph: &IcoGraph,
    group: &AutGroup,
    tol: &Tolerances,
) -> Result<IcosaSolution, CliError> {
    let tag = shape
        .cases
        .first()
        .map(|c| c.to_string())
        .unwrap_or_default();
    let sol = IcosaSolution::from_coords(shape.coords.clone(), graph, group, tol, &tag);
    if !sol.check.is_icosahedron {
        return Err(CliError::Data(format!(
            "{}: not an icosahedron (max edge residual {:.3e}, min vertex distance {:.3e})",
            shape.label, sol.check.max_residual, sol.check.min_distance
        )));
    }
    Ok(sol)
}

/// OBJ mesh with 17 significant digits and consistently oriented faces.
pub fn obj_string(
    label: &str,
    coords: &CoordinateMatrix,
    graph: &IcoGraph,
    comments: &[String],
) -> String {
    let mut out = format!("# {label}\n");
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for v in coords.to_columns() {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    for f in graph.oriented_faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

/// Vertex coordinates of an OBJ mesh with exactly twelve vertices.
pub fn parse_obj(text: &str) -> Result<CoordinateMatrix, CliError> {
    let mut cols = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        if it.next() != Some("v") {
            continue;
        }
        let v: Vec<f64> = it
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| CliError::Data(format!("bad vertex line {line:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if v.len() != 3 {
            return Err(CliError::Data(format!("bad vertex line {line:?}")));
        }
        cols.push([v[0], v[1], v[2]]);
    }
    let cols: [[f64; 3]; N] = cols
        .try_into()
        .map_err(|c: Vec<_>| CliError::Data(format!("expected 12 vertices, found {}", c.len())))?;
    Ok(CoordinateMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use icosa_core::combinatorics::{build_graph, build_group};
    use icosa_core::realization::regular_icosahedron;

    #[test]
    fn obj_round_trip_is_exact() {
        let graph = build_graph(&build_group());
        let m = regular_icosahedron(&graph, true).scaled(1.0 / 3.0);
        let text = obj_string("great", &m, &graph, &["trace 4.1".into()]);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 20);
        let back = parse_obj(&text).unwrap();
        for (a, b) in back
            .to_columns()
            .iter()
            .flatten()
            .zip(m.to_columns().iter().flatten())
        {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn obj_with_wrong_vertex_count_is_rejected() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\n").is_err());
        assert!(parse_obj("v 0 0 x\n").is_err());
    }
}
