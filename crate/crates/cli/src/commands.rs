use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use q8_core::dynamics::{
    equilibria, find_connections, ConnectionReport, ConnectionVerdict, CubePoint, ShootOptions,
};
use q8_core::error::Error;
use q8_core::group::{audit_eq1, q8_group, verify_presentation, CayleyGraph};
use q8_core::hopf::{classify_branches, isotropy_table_c2, BranchVerdict, HopfCoeffs};
use q8_core::ledger::discrepancy_report;
use q8_core::network::{
    audit_eq3, build_network, random_state, CellMap, CouplingSpec, PairMap, Wiring,
};
use q8_core::stability::{
    basin_probe, classify, compare_with_closed_form, rho_km, rho_paper, split_eigenvalues,
    transition_index,
};
use q8_core::sweep::{run_sweep, Range, SweepSpec};
use q8_core::torus::{field, isotropy_catalog, FieldForm, Params, RowVerdict, Theta3};
use serde_json::{json, Value};

use crate::cli::{
    ClassifyArgs, ConnectArgs, FieldArgs, FormArg, HopfArgs, ParamArgs, ShootArgs, SimulateArgs,
    SweepArgs,
};
use crate::output::{csv_records, csv_string, num, opt, table, Report};

fn params(a: &ParamArgs) -> Result<Params> {
    let p = Params::new(a.u, a.eps, a.q);
    p.validate()?;
    Ok(p)
}

fn shoot_options(a: &ShootArgs) -> Result<ShootOptions> {
    let o = ShootOptions {
        delta: a.delta,
        tol: a.tol,
        t_max: a.t_max,
        integrator_tol: a.integrator_tol,
        ..ShootOptions::default()
    };
    o.validate()?;
    Ok(o)
}

fn floats(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("{what}: {s:?} is not a number")).into()
            })
        })
        .collect()
}

fn complex(text: &str, what: &str) -> Result<Complex64> {
    match floats(text, what)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Error::InvalidArgument(format!("{what}: expected re,im, got {text:?}")).into()),
    }
}

pub fn group_verify() -> Result<Report> {
    let group = q8_group()?;
    let relations = verify_presentation(&group);
    let audit = audit_eq1(&group);
    let rel_rows: Vec<Vec<String>> = relations
        .relations
        .iter()
        .map(|r| vec![r.name.clone(), r.holds.to_string()])
        .collect();
    let audit_rows: Vec<Vec<String>> = audit
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                serde_json::to_value(&r.verdict)
                    .map(|v| v.as_str().unwrap_or("").to_string())
                    .unwrap_or_default(),
                r.printed.clone(),
                r.corrected_cycles.clone(),
                r.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let text = format!(
        "relations\n{}\nelement list\n{}",
        table(&["relation", "holds"], &rel_rows),
        table(
            &["label", "verdict", "printed", "evaluates to", "note"],
            &audit_rows
        )
    );
    let mut csv_rows: Vec<Vec<String>> = rel_rows
        .iter()
        .map(|r| vec!["relation".into(), r[0].clone(), r[1].clone(), String::new()])
        .collect();
    csv_rows.extend(
        audit_rows
            .iter()
            .map(|r| vec!["element".into(), r[0].clone(), r[1].clone(), r[3].clone()]),
    );
    Ok(Report {
        payload: json!({ "relations": relations.relations, "eq1_audit": audit }),
        text,
        csv: csv_string(&["kind", "name", "status", "detail"], &csv_rows)?,
        raw_text: false,
    })
}

fn initial_state(spec: &str) -> Result<[f64; 16]> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("x0: bad seed {seed:?}")))?;
        return Ok(random_state(seed));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading x0 file {spec}"))?;
    let values = match serde_json::from_str::<Vec<f64>>(&text) {
        Ok(v) => v,
        Err(_) => floats(&text, "x0")?,
    };
    let n = values.len();
    values
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("x0: expected 16 values, found {n}")).into())
}

pub fn network_simulate(a: &SimulateArgs) -> Result<Report> {
    if a.samples < 2 {
        bail!(Error::InvalidArgument("samples must be at least 2".into()));
    }
    let coupling = CouplingSpec::new(
        CellMap::parse(&a.f)?,
        PairMap::parse(&a.g)?,
        PairMap::parse(&a.h)?,
    )?;
    let group = q8_group()?;
    let net = build_network(&CayleyGraph::from_table(&group)?, coupling, a.eps, &group)?;
    let x0 = initial_state(&a.x0)?;
    let times: Vec<f64> = (0..a.samples)
        .map(|k| {
            if k + 1 == a.samples {
                a.t_end
            } else {
                a.t_end * k as f64 / (a.samples - 1) as f64
            }
        })
        .collect();
    let traj = net.simulate(&x0, a.t_end, a.tol, &times)?;
    let mut headers = vec!["t".to_string()];
    headers.extend((1..=16).map(|i| format!("x{i}")));
    let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| {
            std::iter::once(*t)
                .chain(x.iter().copied())
                .map(num)
                .collect()
        })
        .collect();
    let csv = csv_string(&headers, &rows)?;
    Ok(Report {
        payload: json!({ "x0": x0, "times": traj.times, "states": traj.states }),
        text: csv.clone(),
        csv,
        raw_text: true,
    })
}

pub fn network_audit() -> Result<Report> {
    let group = q8_group()?;
    let rows = audit_eq3(&Wiring::from_graph(&CayleyGraph::from_table(&group)?));
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.cell.to_string(),
                format!("g{:?} h{:?}", r.printed_g, r.printed_h),
                format!("g{:?} h{:?}", r.derived_g, r.derived_h),
                r.g_matches.to_string(),
                r.h_matches.to_string(),
            ]
        })
        .collect();
    let mismatches = rows
        .iter()
        .filter(|r| !(r.g_matches && r.h_matches))
        .count();
    let text = format!(
        "{}{mismatches} of {} rows differ from the derived wiring\n",
        table(&["cell", "printed", "derived", "g ok", "h ok"], &cells),
        rows.len()
    );
    Ok(Report {
        payload: json!({ "rows": rows, "mismatches": mismatches }),
        text,
        csv: csv_string(
            &["cell", "printed", "derived", "g_matches", "h_matches"],
            &cells,
        )?,
        raw_text: false,
    })
}

pub fn hopf_classify(a: &HopfArgs) -> Result<Report> {
    let coeffs = HopfCoeffs {
        a: complex(&a.a, "a")?,
        b: complex(&a.b, "b")?,
        c: complex(&a.c, "c")?,
        d: complex(&a.d, "d")?,
        a_n: complex(&a.an, "an")?,
        a_lambda: complex(&a.alambda, "alambda")?,
    };
    let cls = classify_branches(&coeffs);
    let verdict = |v: &BranchVerdict| match v {
        BranchVerdict::Determined {
            criticality,
            stable,
        } => format!(
            "{}critical, {}",
            if matches!(criticality, q8_core::hopf::Criticality::Super) {
                "super"
            } else {
                "sub"
            },
            if *stable { "stable" } else { "unstable" }
        ),
        BranchVerdict::Inconclusive { failed } => {
            format!("inconclusive, fails {}", failed.iter().collect::<String>())
        }
    };
    let cond_rows: Vec<Vec<String>> = cls
        .nondegeneracy
        .conditions
        .iter()
        .map(|c| {
            vec![
                c.label.to_string(),
                c.expression.clone(),
                num(c.value),
                c.holds.to_string(),
            ]
        })
        .collect();
    let branch_rows: Vec<Vec<String>> = cls
        .branches
        .iter()
        .map(|b| {
            vec![
                b.notation.clone(),
                b.q8_name.clone(),
                b.d8_name.clone(),
                verdict(&b.verdict),
                b.eigen_signs
                    .iter()
                    .map(|e| format!("{} = {}", e.expression, e.value))
                    .collect::<Vec<_>>()
                    .join("; "),
                opt(b.amplitude_sq_per_lambda),
            ]
        })
        .collect();
    let text = format!(
        "nondegeneracy\n{}\nbranches\n{}stable branches: {}\n",
        table(&["", "condition", "value", "holds"], &cond_rows),
        table(
            &[
                "orbit",
                "isotropy",
                "dihedral",
                "verdict",
                "eigenvalue signs",
                "a^2/lambda"
            ],
            &branch_rows
        ),
        cls.stable_count
    );
    Ok(Report {
        payload: json!({ "coefficients": coeffs, "classification": cls }),
        text,
        csv: csv_string(
            &[
                "orbit",
                "isotropy",
                "dihedral",
                "verdict",
                "eigenvalue_signs",
                "amplitude_sq_per_lambda",
            ],
            &branch_rows,
        )?,
        raw_text: false,
    })
}

pub fn hopf_isotropy() -> Result<Report> {
    let rows = isotropy_table_c2(&q8_group()?);
    let words = |v: &[q8_core::hopf::TwistedElement]| {
        v.iter()
            .map(|t| format!("({}, {:.4})", t.word, t.phase))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.fix.clone(),
                r.q8_name.clone(),
                r.d8_name.clone(),
                r.complex_dim.to_string(),
                r.q8_isotropy.len().to_string(),
                r.d8_isotropy.len().to_string(),
                r.generators_fix_family.to_string(),
                r.notes.join("; "),
            ]
        })
        .collect();
    let mut text = table(
        &[
            "fix",
            "isotropy",
            "dihedral",
            "dim",
            "|scan|",
            "|dihedral scan|",
            "generators fix",
            "notes",
        ],
        &cells,
    );
    for r in &rows {
        let _ = writeln!(text, "{}: generators {}", r.fix, words(&r.generators));
    }
    Ok(Report {
        payload: json!({ "rows": rows }),
        text,
        csv: csv_string(
            &[
                "fix",
                "isotropy",
                "dihedral",
                "complex_dim",
                "scan_size",
                "dihedral_scan_size",
                "generators_fix",
                "notes",
            ],
            &cells,
        )?,
        raw_text: false,
    })
}

pub fn torus_catalog() -> Result<Report> {
    let (_, report) = isotropy_catalog(&q8_group()?)?;
    let cells: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let verdict = match &r.verdict {
                RowVerdict::Verified => "verified".to_string(),
                RowVerdict::Failed {
                    failing_generators, ..
                } => {
                    format!("failed ({})", failing_generators.join(", "))
                }
            };
            vec![
                r.row.to_string(),
                r.name.clone(),
                r.printed_dim.to_string(),
                verdict,
                r.corrected_family.clone().unwrap_or_default(),
                r.corrected_dim.map(|d| d.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let mut text = table(
        &[
            "row",
            "subgroup",
            "dim",
            "verdict",
            "fixed set",
            "fixed dim",
        ],
        &cells,
    );
    for (i, j) in &report.duplicate_families {
        let _ = writeln!(text, "rows {i} and {j} print the same family");
    }
    for (i, j) in &report.duplicate_names {
        let _ = writeln!(text, "rows {i} and {j} print the same name");
    }
    Ok(Report {
        payload: serde_json::to_value(&report)?,
        text,
        csv: csv_string(
            &[
                "row",
                "name",
                "printed_dim",
                "verdict",
                "fixed_set",
                "fixed_dim",
            ],
            &cells,
        )?,
        raw_text: false,
    })
}

pub fn torus_field(a: &FieldArgs) -> Result<Report> {
    let th: [f64; 3] = floats(&a.theta, "theta")?.try_into().map_err(|_| {
        Error::InvalidArgument(format!("theta: expected three angles, got {:?}", a.theta))
    })?;
    let p = params(&a.params)?;
    let form = match a.form {
        FormArg::Expanded => FieldForm::Expanded,
        FormArg::Factored => FieldForm::Factored,
    };
    let v = field(form, &Theta3(th), &p);
    let rows = vec![vec![num(v[0]), num(v[1]), num(v[2])]];
    Ok(Report {
        payload: json!({ "theta": th, "params": p, "form": form, "derivative": v }),
        text: format!("d(theta)/dt = ({}, {}, {})\n", v[0], v[1], v[2]),
        csv: csv_string(&["dtheta1", "dtheta2", "dtheta3"], &rows)?,
        raw_text: false,
    })
}

pub fn reduced_eigs(a: &ParamArgs) -> Result<Report> {
    let p = params(a)?;
    let eq = equilibria(&p);
    let cells: Vec<Vec<String>> = eq
        .iter()
        .flat_map(|e| {
            (0..3).map(move |k| {
                vec![
                    e.label.clone(),
                    e.point.coordinates(),
                    format!("theta{}", k + 1),
                    num(e.eigenvalues[k]),
                    e.formulas[k].clone(),
                    num(e.formula_values[k]),
                ]
            })
        })
        .collect();
    let mut text = table(
        &[
            "point",
            "location",
            "axis",
            "eigenvalue",
            "formula",
            "formula value",
        ],
        &cells,
    );
    let worst = eq.iter().map(|e| e.max_formula_error).fold(0.0, f64::max);
    let fd = eq
        .iter()
        .map(|e| e.finite_difference_error)
        .fold(0.0, f64::max);
    let _ = writeln!(
        text,
        "max formula error {worst:.3e}, max finite-difference error {fd:.3e}"
    );
    Ok(Report {
        payload: json!({ "params": p, "equilibria": eq }),
        text,
        csv: csv_string(
            &[
                "point",
                "location",
                "axis",
                "eigenvalue",
                "formula",
                "formula_value",
            ],
            &cells,
        )?,
        raw_text: false,
    })
}

fn verdict_text(v: &ConnectionVerdict) -> String {
    match v {
        ConnectionVerdict::Connected { .. } => "connected".into(),
        ConnectionVerdict::Diverted { reached, is_sink } => {
            format!(
                "diverted to {reached}{}",
                if *is_sink { " (sink)" } else { "" }
            )
        }
        ConnectionVerdict::Timeout => "timeout".into(),
        ConnectionVerdict::Diverged => "diverged".into(),
    }
}

fn shot_rows(report: &ConnectionReport) -> Vec<Vec<String>> {
    report
        .legs
        .iter()
        .flat_map(|l| {
            l.shots.iter().map(move |s| {
                vec![
                    format!("{} -> {}", l.from_label, l.to_label),
                    format!(
                        "{}theta{}",
                        if s.direction < 0 { "-" } else { "+" },
                        s.axis + 1
                    ),
                    verdict_text(&s.verdict),
                    s.reached_label.clone().unwrap_or_default(),
                    format!("{:.3e}", s.terminal_distance),
                    format!("{:.3}", s.terminal_time),
                ]
            })
        })
        .collect()
}

fn write_arcs(report: &ConnectionReport, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .legs
        .iter()
        .flat_map(|l| {
            l.shots.iter().flat_map(move |s| {
                let shot = format!(
                    "{}theta{}",
                    if s.direction < 0 { "-" } else { "+" },
                    s.axis + 1
                );
                s.arc.iter().map(move |a| {
                    vec![
                        format!("{} -> {}", l.from_label, l.to_label),
                        shot.clone(),
                        num(a.t),
                        num(a.theta.0[0]),
                        num(a.theta.0[1]),
                        num(a.theta.0[2]),
                    ]
                })
            })
        })
        .collect();
    let body = csv_string(&["leg", "shot", "t", "theta1", "theta2", "theta3"], &rows)?;
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

const SHOT_HEADERS: [&str; 6] = ["leg", "shot", "verdict", "reached", "distance", "time"];

pub fn reduced_connect(a: &ConnectArgs) -> Result<Report> {
    let p = params(&a.params)?;
    let report = find_connections(&p, &shoot_options(&a.shoot)?)?;
    if let Some(path) = &a.arcs_out {
        write_arcs(&report, path)?;
    }
    let rows = shot_rows(&report);
    let mut text = String::new();
    for l in &report.legs {
        let _ = writeln!(
            text,
            "{} -> {}: eigenvalues {:?}{}",
            l.from_label,
            l.to_label,
            l.source_eigenvalues,
            l.precondition_violation
                .as_deref()
                .map(|v| format!(" ({v})"))
                .unwrap_or_default()
        );
    }
    text.push_str(&table(&SHOT_HEADERS, &rows));
    let _ = writeln!(text, "all legs connected: {}", report.all_connected());
    Ok(Report {
        payload: json!({ "all_connected": report.all_connected(), "report": report }),
        text,
        csv: csv_string(&SHOT_HEADERS, &rows)?,
        raw_text: false,
    })
}

fn parse_probe(text: &str) -> Result<(f64, usize, u64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::InvalidArgument(format!("probe: expected r,n,seed, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad().into());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

/// Keeps precondition failures as data; anything else aborts the command.
fn soft<T: serde::Serialize>(r: q8_core::error::Result<T>) -> Result<Value> {
    match r {
        Ok(v) => Ok(serde_json::to_value(v)?),
        Err(e @ (Error::Precondition(_) | Error::Singular(_))) => {
            Ok(json!({ "error": e.to_string() }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn classify_cmd(a: &ClassifyArgs) -> Result<Report> {
    let p = params(&a.params)?;
    let opts = shoot_options(&a.shoot)?;
    let probe_args = a.probe.as_deref().map(parse_probe).transpose()?;
    let cls = classify(&p);
    let connections = find_connections(&p, &opts)?;
    let connected = connections.all_connected();
    let (splits, rho) = if connected {
        let splits = split_eigenvalues(&connections)?;
        let rho = rho_km(&splits).map(|mut r| {
            compare_with_closed_form(&mut r, &p);
            r
        });
        (serde_json::to_value(&splits)?, soft(rho)?)
    } else {
        (
            Value::Null,
            json!({ "error": "no cycle detected; rho needs every leg connected" }),
        )
    };
    let closed_form = soft(rho_paper(&p))?;
    let loop_index = soft(transition_index(&p, CubePoint::A, &opts))?;
    let probe = match probe_args {
        Some((r, n, seed)) => soft(basin_probe(&p, r, n, seed, &opts))?,
        None => Value::Null,
    };

    let mut text = String::new();
    let _ = writeln!(text, "class: {}", cls.class.as_str());
    if let Some(c) = &cls.triggering_condition {
        let _ = writeln!(text, "condition: {c}");
    }
    let _ = writeln!(
        text,
        "existence: as printed {}, with |u| {}",
        cls.existence.as_printed, cls.existence.with_abs_u
    );
    for n in &cls.notes {
        let _ = writeln!(text, "note: {n}");
    }
    let _ = writeln!(text, "cycle detected: {connected}");
    text.push_str(&table(&SHOT_HEADERS, &shot_rows(&connections)));
    let field = |v: &Value, k: &str| {
        v.get(k)
            .map(|x| x.to_string())
            .unwrap_or_else(|| "-".into())
    };
    match rho.get("error") {
        Some(e) => {
            let _ = writeln!(text, "rho: {}", e.as_str().unwrap_or_default());
        }
        None => {
            let _ = writeln!(
                text,
                "rho: {} (per node {})",
                field(&rho, "rho"),
                field(&rho, "per_node")
            );
            if let Some(notes) = rho.get("discrepancy_notes").and_then(Value::as_array) {
                for n in notes {
                    let _ = writeln!(text, "note: {}", n.as_str().unwrap_or_default());
                }
            }
        }
    }
    match closed_form.get("error") {
        Some(e) => {
            let _ = writeln!(text, "closed form: {}", e.as_str().unwrap_or_default());
        }
        None => {
            let _ = writeln!(
                text,
                "closed form: rho = {} as printed, {} with magnitudes",
                field(&closed_form, "rho"),
                field(&closed_form, "rho_abs")
            );
        }
    }
    match loop_index.get("error") {
        Some(e) => {
            let _ = writeln!(text, "traced loop: {}", e.as_str().unwrap_or_default());
        }
        None => {
            let _ = writeln!(
                text,
                "traced loop: {} nodes, transition radius {}, attracting {}",
                loop_index
                    .get("nodes")
                    .and_then(Value::as_array)
                    .map_or(0, Vec::len),
                field(&loop_index, "perron"),
                field(&loop_index, "attracting")
            );
        }
    }
    if !probe.is_null() {
        match probe.get("error") {
            Some(e) => {
                let _ = writeln!(text, "probe: {}", e.as_str().unwrap_or_default());
            }
            None => {
                let _ = writeln!(
                    text,
                    "probe: returned {} of {} (fraction {}, horizon {})",
                    field(&probe, "returned"),
                    field(&probe, "samples"),
                    field(&probe, "returned_fraction"),
                    field(&probe, "horizon")
                );
            }
        }
    }

    let csv_rows = vec![vec![
        num(p.u),
        num(p.epsilon),
        num(p.q),
        cls.class.as_str().to_string(),
        connected.to_string(),
        rho.get("rho")
            .and_then(Value::as_f64)
            .map(num)
            .unwrap_or_default(),
        closed_form
            .get("rho")
            .and_then(Value::as_f64)
            .map(num)
            .unwrap_or_default(),
        loop_index
            .get("perron")
            .and_then(Value::as_f64)
            .map(num)
            .unwrap_or_default(),
        probe
            .get("returned_fraction")
            .and_then(Value::as_f64)
            .map(num)
            .unwrap_or_default(),
    ]];
    Ok(Report {
        payload: json!({
            "class": cls.class.as_str(),
            "classification": cls,
            "cycle_detected": connected,
            "connections": shot_rows_json(&connections),
            "splits": splits,
            "rho": rho,
            "closed_form": closed_form,
            "traced_loop": loop_index,
            "probe": probe,
        }),
        text,
        csv: csv_string(
            &[
                "u",
                "epsilon",
                "q",
                "class",
                "connected",
                "rho_km",
                "rho_paper_printed",
                "transition_radius",
                "returned_fraction",
            ],
            &csv_rows,
        )?,
        raw_text: false,
    })
}

fn shot_rows_json(report: &ConnectionReport) -> Value {
    Value::Array(
        shot_rows(report)
            .into_iter()
            .map(|r| {
                let mut m = serde_json::Map::new();
                for (k, v) in SHOT_HEADERS.iter().zip(r) {
                    m.insert((*k).to_string(), Value::String(v));
                }
                Value::Object(m)
            })
            .collect(),
    )
}

pub fn sweep_cmd(a: &SweepArgs) -> Result<Report> {
    let spec = SweepSpec {
        u: Range::parse(&a.u_range)?,
        q: Range::parse(&a.q_range)?,
        epsilon: a.eps,
        shoot: !a.no_shoot,
        shoot_options: shoot_options(&a.shoot)?,
    };
    let rows = run_sweep(&spec)?;
    let csv = csv_records(&rows)?;
    Ok(Report {
        payload: json!({ "rows": rows }),
        text: csv.clone(),
        csv,
        raw_text: true,
    })
}

pub fn discrepancies() -> Result<Report> {
    let report = discrepancy_report()?;
    let cells: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| vec![e.category.clone(), e.item.clone(), e.detail.clone()])
        .collect();
    let mut text = table(&["category", "item", "detail"], &cells);
    for (k, v) in &report.counts {
        let _ = writeln!(text, "{k}: {v}");
    }
    Ok(Report {
        payload: serde_json::to_value(&report)?,
        text,
        csv: csv_string(&["category", "item", "detail"], &cells)?,
        raw_text: false,
    })
}
