//! Implementations of the subcommands. Each returns the process exit code.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use icosa_core::ansatz::{build_ansatz, materialize, CaseId, ExpectedOutcome};
use icosa_core::combinatorics::{build_graph, build_group, AutGroup, IcoGraph};
use icosa_core::flex::{curve_certificate, CurveCertificate, Flex};
use icosa_core::invariants::{
    coplanar_neighbor_pairs, dent as dent_vertex, face_angle_rule_violations, significant_points,
    strength_sum, InvariantTolerances,
};
use icosa_core::realization::{regular_icosahedron, IcosaSolution, Tolerances};
use icosa_core::solver::{
    classification_report, merge_catalogs, multistart, unexpected_empty, ClassCatalog, ClassRecord,
    ClassificationReport, RowStatus, SolveConfig, StartStats,
};
use serde::{Deserialize, Serialize};

use crate::config::{input_hash, RunConfig};
use crate::error::{CliError, EXIT_UNEXPECTED_EMPTY};
use crate::files::{
    load_shapes, obj_string, parse_obj, read_bytes, to_json, verify_shape, write_bytes, CaseRun,
    CatalogFile, ClassEntry, CurveHeader, Header, InvariantEntry, InvariantsFile, LoadedShape,
    ReportFile, ShapeEntry, ShapeFile, CATALOG, CERTIFICATE, CURVE, INVARIANTS, REPORT, SHAPE,
};
use crate::{CurveArgs, DentArgs, ExportArgs, InvariantsArgs, ReportArgs, SolveArgs};

/// Minimum and maximum number of certificate members.
const CERTIFICATE_MEMBERS: (usize, usize) = (5, 10);
/// Largest coordinate change allowed when re-reading an exported mesh.
const OBJ_ROUND_TRIP: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub header: Header,
    pub certificate: CurveCertificate,
}

struct Context {
    group: AutGroup,
    graph: IcoGraph,
    tol: Tolerances,
    inv: InvariantTolerances,
}

fn context() -> Context {
    let group = build_group();
    let graph = build_graph(&group);
    Context {
        group,
        graph,
        tol: Tolerances::default(),
        inv: InvariantTolerances::default(),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_bytes(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn path_strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn expected_label(e: ExpectedOutcome) -> &'static str {
    match e {
        ExpectedOutcome::Solutions => "solutions",
        ExpectedOutcome::Empty => "empty",
        ExpectedOutcome::OneDimensional => "curve",
    }
}

pub fn solve(a: SolveArgs) -> Result<u8, CliError> {
    let cases = if a.case == "all" {
        CaseId::all()
    } else {
        CaseId::expand(&a.case)?
    };
    if a.starts == 0 || a.start_box.is_nan() || a.start_box <= 0.0 || a.max_iters == 0 {
        return Err(CliError::Usage(
            "--starts, --start-box and --max-iters must be positive".into(),
        ));
    }
    let solver = SolveConfig {
        n_starts: a.starts,
        start_box: a.start_box,
        max_iters: a.max_iters,
        rng_seed: a.seed,
        ..SolveConfig::default()
    };
    let config = RunConfig::Solve {
        cases: cases.iter().map(|c| c.to_string()).collect(),
        solver: solver.clone(),
    };
    let ctx = context();
    let mut code = 0;
    let mut runs = Vec::new();
    for case in cases {
        let ansatz = build_ansatz(&case, &ctx.group, &ctx.graph)?;
        let cat = multistart(&ansatz, &solver, &ctx.graph, &ctx.group);
        let expected = case.expected_outcome();
        let empty = cat.classes.is_empty();
        let note = if unexpected_empty(&case, &cat) {
            code = EXIT_UNEXPECTED_EMPTY;
            Some("unexpected empty: the case analysis predicts solutions".to_string())
        } else {
            match (expected, empty) {
                (ExpectedOutcome::Empty, true) => {
                    Some("expected empty: no icosahedron with twelve distinct vertices".into())
                }
                (ExpectedOutcome::Empty, false) => {
                    Some("solutions found although the case analysis predicts none".into())
                }
                (ExpectedOutcome::OneDimensional, _) => {
                    Some("one-dimensional family: classes sample a curve".into())
                }
                _ => None,
            }
        };
        eprintln!(
            "{case}: {} starts, {} converged, {} accepted, {} degenerate, {} classes{}",
            cat.stats.starts,
            cat.stats.converged,
            cat.stats.accepted,
            cat.stats.degenerate,
            cat.classes.len(),
            note.as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
        let classes = cat
            .classes
            .iter()
            .enumerate()
            .map(|(k, rec)| ClassEntry::from_record(format!("{case}:{k}"), rec, &ctx.group))
            .collect();
        runs.push(CaseRun {
            case: case.to_string(),
            expected: expected_label(expected).into(),
            note,
            stats: cat.stats,
            classes,
        });
    }
    let hash = input_hash(&config, &[]);
    let file = CatalogFile {
        header: Header::new(CATALOG, config, hash),
        runs,
    };
    emit(a.out.as_deref(), &to_json(&file))?;
    Ok(code)
}

/// Reads, re-verifies and merges every icosahedron from the inputs.
fn load_classes(
    ctx: &Context,
    inputs: &[PathBuf],
) -> Result<(Vec<Vec<u8>>, Vec<ClassRecord>), CliError> {
    let mut blobs = Vec::new();
    let mut records = Vec::new();
    for path in inputs {
        let bytes = read_bytes(path)?;
        for shape in load_shapes(path, &bytes)? {
            let LoadedShape {
                y, count, cases, ..
            } = shape.clone();
            let sol = verify_shape(&shape, &ctx.graph, &ctx.group, &ctx.tol)?;
            records.push(ClassRecord::new(sol, y, count, cases, &ctx.group));
        }
        blobs.push(bytes);
    }
    let catalog = ClassCatalog {
        case: None,
        config: SolveConfig::default(),
        stats: StartStats::default(),
        classes: records,
    };
    Ok((
        blobs,
        merge_catalogs(&[catalog], &ctx.group, ctx.tol.equivalence),
    ))
}

fn status_label(s: RowStatus) -> &'static str {
    match s {
        RowStatus::Match => "match",
        RowStatus::Missing => "missing",
        RowStatus::Excess => "excess",
        RowStatus::Reported => "reported",
        RowStatus::Curve => "curve",
    }
}

/// Observed counts next to the published ones, one row per automorphism
/// group type.
fn paper_table(report: &ClassificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<36} {:>6} {:>9}  {:<9} traces",
        "Aut(X)", "paper", "observed", "status"
    );
    let mut paper_total = 0;
    let mut observed_total = 0;
    for row in &report.rows {
        let paper = row
            .paper
            .map(|p| p.to_string())
            .unwrap_or_else(|| "inf".into());
        paper_total += row.paper.unwrap_or(0);
        if row.paper.is_some() {
            observed_total += row.observed;
        }
        let traces: Vec<String> = if row.status == RowStatus::Curve && !row.traces.is_empty() {
            let (lo, hi) = row
                .traces
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| {
                    (l.min(t), h.max(t))
                });
            vec![format!("samples in [{lo:.10}, {hi:.10}]")]
        } else {
            row.traces.iter().map(|t| format!("{t:.10}")).collect()
        };
        let _ = writeln!(
            out,
            "{:<36} {:>6} {:>9}  {:<9} {}",
            row.label,
            paper,
            row.observed,
            status_label(row.status),
            traces.join(" ")
        );
    }
    let _ = writeln!(
        out,
        "{:<36} {:>6} {:>9}",
        "total (finite rows)", paper_total, observed_total
    );
    for (label, trace) in &report.other {
        let _ = writeln!(out, "outside the table: {label} at trace {trace:.10}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<20} {:>4} {:>9} {:>9}",
        "trace relation", "r_F", "certified", "observed"
    );
    for o in &report.oracle_rows {
        let _ = writeln!(
            out,
            "{:<20} {:>4} {:>9} {:>9}",
            o.label, o.r_f, o.certified, o.observed
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Counts for rows resting on high-degree trace relations are observations of a finite multistart, not proofs."
    );
    out
}

fn class_list(classes: &[ClassRecord]) -> String {
    let mut out = String::new();
    for (k, c) in classes.iter().enumerate() {
        let cases: Vec<String> = c.cases.iter().map(|c| c.to_string()).collect();
        let oracle = c
            .oracle
            .as_ref()
            .map(|(l, r)| format!("{l} ({r:.1e})"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{k:>3}  trace {:.10}  |Aut| {:>3}  {:<34} oracle {oracle}  cases {}",
            c.solution.trace,
            c.solution.aut.len(),
            c.stabilizer.label(),
            cases.join(",")
        );
    }
    out
}

fn class_entries(classes: &[ClassRecord], group: &AutGroup) -> Vec<ClassEntry> {
    classes
        .iter()
        .enumerate()
        .map(|(k, rec)| ClassEntry::from_record(format!("class-{k}"), rec, group))
        .collect()
}

pub fn report(a: ReportArgs) -> Result<u8, CliError> {
    let ctx = context();
    let config = RunConfig::Report {
        inputs: path_strings(&a.inputs),
        tolerances: ctx.tol,
    };
    let (blobs, classes) = load_classes(&ctx, &a.inputs)?;
    let report = classification_report(&classes);
    let text = if a.paper_table {
        paper_table(&report)
    } else {
        class_list(&classes)
    };
    print!("{text}");
    if let Some(out) = &a.out {
        let hash = input_hash(&config, &blobs);
        let file = ReportFile {
            header: Header::new(REPORT, config, hash),
            report,
            classes: class_entries(&classes, &ctx.group),
        };
        write_bytes(out, &to_json(&file))?;
    }
    Ok(0)
}

pub fn curve(a: CurveArgs) -> Result<u8, CliError> {
    if a.steps == 0 || a.t_end.is_nan() || a.t_end <= 0.0 || a.starts == 0 {
        return Err(CliError::Usage(
            "--steps, --t-end and --starts must be positive".into(),
        ));
    }
    let obj_dir = match (a.export_obj_every, &a.obj_dir, &a.out) {
        (Some(0), _, _) => {
            return Err(CliError::Usage(
                "--export-obj-every must be positive".into(),
            ))
        }
        (Some(_), Some(dir), _) => Some(dir.clone()),
        (Some(_), None, Some(out)) => Some(PathBuf::from(format!("{}.obj", out.display()))),
        (Some(_), None, None) => {
            return Err(CliError::Usage(
                "--export-obj-every needs --obj-dir or --out".into(),
            ))
        }
        (None, _, _) => None,
    };
    let ctx = context();
    let flex = Flex::new(&ctx.group, &ctx.graph)?;
    let start = SolveConfig {
        n_starts: a.starts,
        rng_seed: a.seed,
        ..SolveConfig::default()
    };
    let config = RunConfig::Curve {
        mode: a.mode,
        steps: a.steps,
        t_end: a.t_end,
        start: start.clone(),
        export_obj_every: a.export_obj_every,
    };
    let y0 = flex
        .starting_point(&start, &ctx.graph, &ctx.group)
        .ok_or_else(|| {
            CliError::Data("multistart found no non-degenerate d-invariant starting point".into())
        })?;
    let states = flex.trace_curve(&y0, a.t_end, a.steps, a.mode, &ctx.graph, &ctx.tol)?;

    let hash = input_hash(&config, &[]);
    let header = CurveHeader {
        header: Header::new(CURVE, config.clone(), hash.clone()),
        start: y0.clone(),
        start_trace: states[0].trace,
    };
    let mut stream = serde_json::to_vec(&header).expect("header serializes");
    stream.push(b'\n');
    for s in &states {
        serde_json::to_writer(&mut stream, s).expect("state serializes");
        stream.push(b'\n');
    }
    emit(a.out.as_deref(), &stream)?;

    if let (Some(every), Some(dir)) = (a.export_obj_every, &obj_dir) {
        for s in states.iter().filter(|s| s.step % every == 0) {
            let m = materialize(&flex.ansatz, &s.y)?;
            let comments = [
                format!("t {:.16e}", s.t),
                format!("trace {:.16e}", s.trace),
                format!("residual {:.3e}", s.residual),
            ];
            let text = obj_string(&format!("curve step {}", s.step), &m, &ctx.graph, &comments);
            write_bytes(
                &dir.join(format!("curve_{:06}.obj", s.step)),
                text.as_bytes(),
            )?;
        }
    }

    if let Some(path) = &a.certificate {
        let certificate = curve_certificate(
            &flex,
            &states,
            &ctx.graph,
            &ctx.group,
            &ctx.tol,
            CERTIFICATE_MEMBERS.0,
            CERTIFICATE_MEMBERS.1,
        )?;
        eprintln!(
            "certificate: {} pairwise inequivalent members, min trace gap {:.3e}",
            certificate.members.len(),
            certificate.min_trace_gap
        );
        let file = CertificateFile {
            header: Header::new(CERTIFICATE, config, hash),
            certificate,
        };
        write_bytes(path, &to_json(&file))?;
    }

    let max_res = states.iter().map(|s| s.residual).fold(0.0f64, f64::max);
    let (lo, hi) = states
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| {
            (l.min(s.trace), h.max(s.trace))
        });
    let degenerate = states.iter().filter(|s| s.degenerate).count();
    eprintln!(
        "{} mode, {} steps on [0, {}]: max residual {max_res:.3e}, trace in [{lo:.10}, {hi:.10}], {degenerate} degenerate states",
        a.mode, a.steps, a.t_end
    );
    Ok(0)
}

pub fn invariants(a: InvariantsArgs) -> Result<u8, CliError> {
    let ctx = context();
    let config = RunConfig::Invariants {
        input: a.input.display().to_string(),
        tolerances: ctx.inv,
    };
    let bytes = read_bytes(&a.input)?;
    let mut entries = Vec::new();
    for shape in load_shapes(&a.input, &bytes)? {
        let sol = verify_shape(&shape, &ctx.graph, &ctx.group, &ctx.tol)?;
        let points = significant_points(&sol.coords, &ctx.graph, &ctx.inv);
        let sum = strength_sum(&points);
        let mut strengths: Vec<usize> = points
            .iter()
            .filter(|p| !p.trivial)
            .map(|p| p.strength)
            .collect();
        strengths.sort_unstable_by(|x, y| y.cmp(x));
        let trivial = points.iter().filter(|p| p.trivial).count();
        eprintln!(
            "{}: trace {:.10}, s = {}, non-trivial strengths {strengths:?}, {trivial} trivial",
            shape.label, sol.trace, sum.total
        );
        entries.push(InvariantEntry {
            label: shape.label.clone(),
            trace: sol.trace,
            coplanar_neighbor_pairs: coplanar_neighbor_pairs(&sol.coords, &ctx.graph, ctx.inv.flat),
            face_angle_rule_violations: face_angle_rule_violations(
                &sol.coords,
                &ctx.graph,
                &points,
                ctx.inv.cluster,
            ),
            strength_sum: sum,
            significant_points: points,
        });
    }
    let hash = input_hash(&config, &[bytes]);
    let file = InvariantsFile {
        header: Header::new(INVARIANTS, config, hash),
        entries,
    };
    emit(a.out.as_deref(), &to_json(&file))?;
    Ok(0)
}

pub fn dent(a: DentArgs) -> Result<u8, CliError> {
    let ctx = context();
    let config = RunConfig::Dent {
        input: a.input.as_ref().map(|p| p.display().to_string()),
        class: a.class,
        great: a.great,
        vertex: a.vertex as usize,
        then_antipodal: a.then_antipodal,
        tolerances: ctx.inv,
    };
    let (blobs, base_label, base) = match &a.input {
        Some(path) => {
            let bytes = read_bytes(path)?;
            let shapes = load_shapes(path, &bytes)?;
            let index = match (a.class, shapes.len()) {
                (Some(k), n) if k < n => k,
                (Some(k), n) => {
                    return Err(CliError::Usage(format!(
                        "--class {k} out of range ({n} classes)"
                    )))
                }
                (None, 1) => 0,
                (None, n) => {
                    return Err(CliError::Usage(format!(
                        "input holds {n} classes; choose one with --class"
                    )))
                }
            };
            let sol = verify_shape(&shapes[index], &ctx.graph, &ctx.group, &ctx.tol)?;
            (vec![bytes], shapes[index].label.clone(), sol.coords)
        }
        None => {
            let label = if a.great {
                "great icosahedron"
            } else {
                "regular icosahedron"
            };
            (
                Vec::new(),
                label.to_string(),
                regular_icosahedron(&ctx.graph, a.great),
            )
        }
    };
    let v = a.vertex as usize - 1;
    let mut vertices = vec![v];
    if a.then_antipodal {
        vertices.push(ctx.graph.antipode(v));
    }
    let mut coords = base;
    for &w in &vertices {
        coords = dent_vertex(&coords, w, &ctx.graph, ctx.inv.coplanar)?;
    }
    let dented: Vec<usize> = vertices.iter().map(|w| w + 1).collect();
    let list: Vec<String> = dented.iter().map(|w| w.to_string()).collect();
    let label = format!("{base_label} dented at {}", list.join(","));
    let sol = IcosaSolution::from_coords(coords, &ctx.graph, &ctx.group, &ctx.tol, "dent");
    if !sol.check.is_icosahedron {
        return Err(CliError::Data(format!(
            "dent produced coinciding vertices (min distance {:.3e})",
            sol.check.min_distance
        )));
    }
    let shape = ShapeEntry::from_solution(label, &sol, &ctx.group);
    eprintln!(
        "{}: trace {:.10}, |Aut| = {}, {}{}",
        shape.label,
        shape.trace,
        shape.aut_order,
        shape.stabilizer,
        shape
            .oracle
            .as_ref()
            .map(|o| format!(", trace relation {}", o.label))
            .unwrap_or_default()
    );
    let hash = input_hash(&config, &blobs);
    let file = ShapeFile {
        header: Header::new(SHAPE, config, hash),
        dented,
        shape,
    };
    emit(a.out.as_deref(), &to_json(&file))?;
    Ok(0)
}

pub fn export(a: ExportArgs) -> Result<u8, CliError> {
    let ctx = context();
    let config = RunConfig::Export {
        inputs: path_strings(&a.inputs),
    };
    let (blobs, classes) = load_classes(&ctx, &a.inputs)?;
    for (k, c) in classes.iter().enumerate() {
        let mut comments = vec![
            format!("trace {:.16e}", c.solution.trace),
            format!(
                "automorphism group {} of order {}",
                c.stabilizer.label(),
                c.solution.aut.len()
            ),
        ];
        if let Some((label, r)) = &c.oracle {
            comments.push(format!("trace relation {label} residual {r:.3e}"));
        }
        let text = obj_string(
            &format!("class-{k}"),
            &c.solution.coords,
            &ctx.graph,
            &comments,
        );
        let back = parse_obj(&text)?;
        let drift = (back.matrix() - c.solution.coords.matrix()).amax();
        if drift > OBJ_ROUND_TRIP {
            return Err(CliError::Data(format!(
                "class-{k}: OBJ round trip drifts by {drift:.3e}"
            )));
        }
        write_bytes(
            &a.out_dir.join(format!("class-{k:03}.obj")),
            text.as_bytes(),
        )?;
    }
    let report = classification_report(&classes);
    let mut summary = format!("# input hash {}\n", input_hash(&config, &blobs));
    summary.push_str(&paper_table(&report));
    summary.push('\n');
    summary.push_str(&class_list(&classes));
    write_bytes(&a.out_dir.join("summary.txt"), summary.as_bytes())?;
    eprintln!(
        "wrote {} meshes and summary.txt to {}",
        classes.len(),
        a.out_dir.display()
    );
    Ok(0)
}
