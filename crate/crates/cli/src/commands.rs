use std::collections::BTreeMap;
use std::path::Path;

use schatten_core::group::{induce, pullback_ideal, GroupFunction, GroupSpec, UnitaryRep};
use schatten_core::linalg::svd_values;
use schatten_core::multiplication::{
    build_truncation, classify_exact, classify_with, diagnose_divergence_with,
    trace_power_partial, MembershipVerdict, MultiplicationError, SchedulePoint,
    TruncationSchedule, SLOPE_TOL,
};
use schatten_core::schatten::{norm_of_values, PExponent};
use schatten_core::system::{build_node, verify_exactness, verify_fig2, NodeContext};
use schatten_core::verify::{self, SuiteConfig, Tolerances};
use schatten_core::{Execution, MeasureSpace, SimpleFunction};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, Common, ContextInput, DivergeInput, Format, OperatorInput};
use crate::report::{to_value, CliError, CliResult, Report, Status};

/// Relative slack for the monotonicity check of a sweep.
const SWEEP_MONOTONE_TOL: f64 = 1e-10;

pub struct Outcome {
    pub report: Report,
    pub status: Status,
    /// Sweep rows for CSV output.
    pub table: Option<Vec<SweepRow>>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("parse", format!("{}: {e}", path.display())))
}

struct MeasureCase {
    space: MeasureSpace,
    f: SimpleFunction,
}

fn load_measure(report: &mut Report, space: &Path, function: &Path) -> CliResult<MeasureCase> {
    let space: MeasureSpace = read_json(space)?;
    let f: SimpleFunction = read_json(function)?;
    f.check_against(&space)
        .map_err(|e| CliError::new("input", e))?;
    report.input("space", &space)?;
    report.input("function", &f)?;
    Ok(MeasureCase { space, f })
}

fn load_group(report: &mut Report, path: &Path) -> CliResult<(UnitaryRep, Option<GroupFunction>)> {
    let spec: GroupSpec = read_json(path)?;
    let built = spec.build().map_err(|e| CliError::new("input", e))?;
    report.input("group", &spec)?;
    Ok(built)
}

fn need_function(f: Option<GroupFunction>) -> CliResult<GroupFunction> {
    f.ok_or_else(|| CliError::new("input", "group spec needs a `function` field here"))
}

/// Named tolerances of one command, with CLI overrides applied and recorded.
fn tolerances(
    report: &mut Report,
    defaults: &[(&str, f64)],
    overrides: &[(String, f64)],
) -> CliResult<BTreeMap<String, f64>> {
    let mut map: BTreeMap<String, f64> =
        defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for (name, value) in overrides {
        if !map.contains_key(name) {
            let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
            return Err(CliError::new(
                "input",
                format!("unknown tolerance {name}; this command accepts [{}]", known.join(", ")),
            ));
        }
        if !(value.is_finite() && *value > 0.0) {
            return Err(CliError::new("input", format!("tolerance {name} must be positive")));
        }
        map.insert(name.clone(), *value);
        report.overrides.insert(name.clone(), *value);
    }
    report.tolerances = map.clone();
    Ok(map)
}

fn check_grid(grid: &[PExponent]) -> CliResult<()> {
    if grid.is_empty() {
        return Err(CliError::new("input", "empty p-grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::new("input", "p-grid must be strictly increasing"));
    }
    Ok(())
}

fn done(report: Report, status: Status) -> CliResult<Outcome> {
    let mut report = report;
    report.set_status(status);
    Ok(Outcome {
        report,
        status,
        table: None,
    })
}

pub fn run(command: &Command, common: &Common) -> CliResult<Outcome> {
    if common.format == Format::Csv && !matches!(command, Command::Sweep { .. }) {
        return Err(CliError::new("input", "csv output is only available for sweep"));
    }
    let seed = common.seed.unwrap_or(verify::DEFAULT_SEED);
    let exec = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match command {
        Command::Classify { input, p, modes } => {
            let mut report = Report::new("classify", seed);
            let case = load_measure(&mut report, &input.space, &input.function)?;
            let tol = tolerances(&mut report, &[("slope", SLOPE_TOL)], &common.tolerances)?;
            report.input("p", p)?;
            report.input("modes", &modes.modes)?;
            let r = classify_with(&case.space, &case.f, *p, &modes.modes, exec, tol["slope"])
                .map_err(|e| CliError::new("classify", e))?;
            let status = if r.inconclusive {
                Status::Inconclusive
            } else if r.agreement {
                Status::Ok
            } else {
                Status::Failed
            };
            report.result = to_value(&r)?;
            done(report, status)
        }
        Command::Norm { input, p, m } => {
            let mut report = Report::new("norm", seed);
            report.input("p", p)?;
            report.result = operator_norms(&mut report, input, std::slice::from_ref(p), *m)?
                .into_iter()
                .next()
                .map(to_value)
                .transpose()?
                .unwrap_or(Value::Null);
            done(report, Status::Ok)
        }
        Command::Sweep { input, grid } => {
            check_grid(&grid.p_grid)?;
            let mut report = Report::new("sweep", seed);
            let tol = tolerances(&mut report, &[("monotone", SWEEP_MONOTONE_TOL)], &common.tolerances)?;
            report.input("p_grid", &grid.p_grid)?;
            let rows = operator_norms(&mut report, input, &grid.p_grid, 8)?;
            let monotone = is_monotone(&rows, tol["monotone"]);
            report.result = json!({ "rows": to_value(&rows)?, "monotone": monotone });
            let status = if monotone { Status::Ok } else { Status::Failed };
            let mut out = done(report, status)?;
            out.table = Some(rows);
            Ok(out)
        }
        Command::Diverge { input, p, modes } => diverge(input, *p, &modes.modes, seed, common, exec),
        Command::Group { group, grid } => {
            check_grid(&grid.p_grid)?;
            let mut report = Report::new("group", seed);
            let (rep, f) = load_group(&mut report, group)?;
            report.input("p_grid", &grid.p_grid)?;
            report.result = group_summary(&rep, f.as_ref(), &grid.p_grid)?;
            let exact = report.result["nodes"]
                .as_array()
                .is_some_and(|nodes| nodes.iter().all(|n| n["exactness"]["passes"] == json!(true)));
            done(report, if exact { Status::Ok } else { Status::Failed })
        }
        Command::Fig2 { input, grid, m } => {
            check_grid(&grid.p_grid)?;
            let mut report = Report::new("fig2", seed);
            let ctx = context(&mut report, input, *m)?;
            report.input("p_grid", &grid.p_grid)?;
            let r = verify_fig2(&ctx, &grid.p_grid, seed, exec)
                .map_err(|e| CliError::new("fig2", e))?;
            let status = if r.passes { Status::Ok } else { Status::Failed };
            report.result = to_value(&r)?;
            done(report, status)
        }
        Command::VerifyAll => {
            let mut report = Report::new("verify-all", seed);
            let mut tol = Tolerances::default();
            let defaults: Vec<(&str, f64)> = Tolerances::names()
                .iter()
                .map(|&n| (n, tolerance_value(&tol, n)))
                .collect();
            let chosen = tolerances(&mut report, &defaults, &common.tolerances)?;
            for (name, value) in &chosen {
                tol.set(name, *value).map_err(|e| CliError::new("input", e))?;
            }
            let cfg = SuiteConfig {
                seed,
                exec,
                tolerances: tol,
                ..SuiteConfig::default()
            };
            let suite = verify::run_suite(&cfg);
            let status = if suite.passed { Status::Ok } else { Status::Failed };
            report.result = to_value(&suite)?;
            done(report, status)
        }
    }
}

fn tolerance_value(t: &Tolerances, name: &str) -> f64 {
    let v = serde_json::to_value(t).expect("tolerances serialize");
    v[name].as_f64().expect("every named tolerance is a number")
}

fn context(report: &mut Report, input: &ContextInput, m: u32) -> CliResult<NodeContext> {
    match (&input.space, &input.group) {
        (Some(space), None) => {
            let space: MeasureSpace = read_json(space)?;
            report.input("space", &space)?;
            report.input("m", m)?;
            Ok(NodeContext::Measure {
                space,
                schedule: TruncationSchedule::full(m),
            })
        }
        (None, Some(group)) => Ok(NodeContext::Group {
            rep: load_group(report, group)?.0,
        }),
        _ => Err(CliError::new("input", "give exactly one of --space or --group")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: PExponent,
    /// `None` when the operator is not in `S_p`.
    pub norm: Option<f64>,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_dim: Option<usize>,
}

fn operator_norms(
    report: &mut Report,
    input: &OperatorInput,
    ps: &[PExponent],
    m: u32,
) -> CliResult<Vec<SweepRow>> {
    match (&input.space, &input.function, &input.group) {
        (Some(space), Some(function), None) => {
            let case = load_measure(report, space, function)?;
            report.input("m", m)?;
            let t = build_truncation(&case.space, &case.f, &TruncationSchedule::full(m))
                .map_err(|e| CliError::new("norm", e))?;
            let s = svd_values(&t.matrix).map_err(|e| CliError::new("norm", e))?;
            ps.iter()
                .map(|&p| {
                    let verdict = classify_exact(&case.space, &case.f, p)
                        .map_err(|e| CliError::new("norm", e))?;
                    let (norm, label) = match verdict {
                        MembershipVerdict::Member { norm } => (Some(norm), "member"),
                        MembershipVerdict::NotMember { .. } => (None, "not_member"),
                    };
                    Ok(SweepRow {
                        p,
                        norm,
                        verdict: label,
                        truncated_norm: Some(norm_of_values(s.values(), p)),
                        truncation_dim: Some(t.matrix.rows()),
                    })
                })
                .collect()
        }
        (None, None, Some(group)) => {
            let (rep, f) = load_group(report, group)?;
            let f = need_function(f)?;
            let m = induce(&rep, &f).map_err(|e| CliError::new("norm", e))?;
            let s = svd_values(&m).map_err(|e| CliError::new("norm", e))?;
            Ok(ps
                .iter()
                .map(|&p| SweepRow {
                    p,
                    norm: Some(norm_of_values(s.values(), p)),
                    verdict: "member",
                    truncated_norm: None,
                    truncation_dim: None,
                })
                .collect())
        }
        _ => Err(CliError::new(
            "input",
            "give either --space with --function, or --group",
        )),
    }
}

/// Norms never increase with `p`, and membership is inherited upwards.
fn is_monotone(rows: &[SweepRow], tol: f64) -> bool {
    rows.windows(2).all(|w| match (w[0].norm, w[1].norm) {
        (Some(a), Some(b)) => b <= a * (1.0 + tol) + tol,
        (Some(_), None) => false,
        (None, _) => true,
    }) && rows.windows(2).all(|w| match (w[0].truncated_norm, w[1].truncated_norm) {
        (Some(a), Some(b)) => b <= a * (1.0 + tol) + tol,
        _ => true,
    })
}

fn diverge(
    input: &DivergeInput,
    p: PExponent,
    modes: &[u32],
    seed: u64,
    common: &Common,
    exec: Execution,
) -> CliResult<Outcome> {
    let mut report = Report::new("diverge", seed);
    let tol = tolerances(&mut report, &[("slope", SLOPE_TOL)], &common.tolerances)?;
    let points: Vec<SchedulePoint> = match (&input.space, &input.function, &input.partials) {
        (Some(space), Some(function), None) => {
            let case = load_measure(&mut report, space, function)?;
            let PExponent::Finite(pv) = p else {
                return Err(CliError::new("input", "diverge needs a finite p"));
            };
            report.input("p", p)?;
            report.input("modes", modes)?;
            exec.map_slice(modes, |&m| {
                trace_power_partial(&case.space, &case.f, pv, &TruncationSchedule::full(m))
                    .map(|value| SchedulePoint { size: m as f64, value })
            })
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::new("diverge", e))?
        }
        (None, None, Some(path)) => {
            let points: Vec<SchedulePoint> = read_json(path)?;
            report.input("partials", &points)?;
            points
        }
        _ => {
            return Err(CliError::new(
                "input",
                "give either --space with --function, or --partials",
            ))
        }
    };
    match diagnose_divergence_with(&points, tol["slope"]) {
        Ok(d) => {
            report.result = json!({ "partials": to_value(&points)?, "diagnosis": to_value(d)? });
            done(report, Status::Ok)
        }
        Err(MultiplicationError::Inconclusive { slope, tolerance, divergent }) => {
            report.result = json!({
                "partials": to_value(&points)?,
                "diagnosis": null,
                "slope": slope,
                "converged_below": tolerance,
                "diverges_above": divergent,
            });
            done(report, Status::Inconclusive)
        }
        Err(e) => Err(CliError::new("diverge", e)),
    }
}

fn group_summary(rep: &UnitaryRep, f: Option<&GroupFunction>, grid: &[PExponent]) -> CliResult<Value> {
    let ideal = pullback_ideal(rep, grid[0]);
    let ctx = NodeContext::Group { rep: rep.clone() };
    let nodes = grid
        .iter()
        .map(|&p| {
            let node = build_node(&ctx, p).map_err(|e| CliError::new("group", e))?;
            let exactness = verify_exactness(&node).map_err(|e| CliError::new("group", e))?;
            Ok(json!({ "p": to_value(p)?, "exactness": to_value(exactness)? }))
        })
        .collect::<CliResult<Vec<Value>>>()?;
    let norms = match f {
        Some(f) => {
            let m = induce(rep, f).map_err(|e| CliError::new("group", e))?;
            let s = svd_values(&m).map_err(|e| CliError::new("group", e))?;
            let rows = grid
                .iter()
                .map(|&p| Ok(json!({ "p": to_value(p)?, "norm": norm_of_values(s.values(), p) })))
                .collect::<CliResult<Vec<Value>>>()?;
            json!({ "singular_values": s.values(), "norms": rows })
        }
        None => Value::Null,
    };
    Ok(json!({
        "order": rep.group().order(),
        "dimension": rep.dim(),
        "pullback_ideal": to_value(&ideal)?,
        "nodes": nodes,
        "induced": norms,
    }))
}
