//! Machine-readable list of every inconsistency the checks detect in the
//! printed data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{find_connections, CubePoint, ShootOptions};
use crate::error::Result;
use crate::group::{audit_eq1, q8_group, CayleyGraph, Verdict};
use crate::hopf::{classify_branches, isotropy_table_c2, HopfCoeffs};
use crate::network::{audit_eq3, Wiring, WiringVerdict};
use crate::stability::{
    classify, existence_conditions, rho_paper, transition_index, StabilityClass,
};
use crate::torus::{isotropy_catalog, Params, RowVerdict};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub category: String,
    pub item: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub entries: Vec<Discrepancy>,
    pub counts: BTreeMap<String, usize>,
}

impl DiscrepancyReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn category(&self, name: &str) -> impl Iterator<Item = &Discrepancy> {
        let name = name.to_string();
        self.entries.iter().filter(move |e| e.category == name)
    }
}

/// Parameter points at which the closed forms and predicates are probed.
pub const REFERENCE_PARAMS: [(f64, f64, f64); 3] =
    [(1.0, 0.1, -0.15), (-1.0, 0.1, -1.0), (-1.0, 0.1, -0.5)];

struct Builder(Vec<Discrepancy>);

impl Builder {
    fn push(&mut self, category: &str, item: impl Into<String>, detail: impl Into<String>) {
        self.0.push(Discrepancy {
            category: category.into(),
            item: item.into(),
            detail: detail.into(),
        });
    }
}

/// Runs every audit and collects the disagreements. Deterministic.
pub fn discrepancy_report() -> Result<DiscrepancyReport> {
    let mut b = Builder(Vec::new());
    let table = q8_group()?;

    for row in audit_eq1(&table) {
        if row.verdict != Verdict::Match {
            let verdict = match row.verdict {
                Verdict::Malformed => "malformed",
                _ => "mismatch",
            };
            b.push(
                "group_elements",
                format!("row {}", row.label),
                format!(
                    "{verdict}: printed {} but the word evaluates to {}{}",
                    row.printed,
                    row.corrected_cycles,
                    row.note.map(|n| format!(" ({n})")).unwrap_or_default()
                ),
            );
        }
    }

    let wiring = Wiring::from_graph(&CayleyGraph::from_table(&table)?);
    for row in audit_eq3(&wiring) {
        if row.verdict == WiringVerdict::Mismatch {
            b.push(
                "wiring",
                format!("cell {}", row.cell),
                format!(
                    "printed g{:?} h{:?}, derived g{:?} h{:?}",
                    row.printed_g, row.printed_h, row.derived_g, row.derived_h
                ),
            );
        }
    }

    let (_, catalog) = isotropy_catalog(&table)?;
    for row in &catalog.rows {
        if let RowVerdict::Failed {
            failing_generators,
            worst_distance,
            ..
        } = &row.verdict
        {
            b.push(
                "isotropy_catalog",
                format!("row {} ({})", row.row, row.name),
                format!(
                    "generators {} move the printed family by up to {worst_distance:.3}; \
                     fixed set of the generators: {}",
                    failing_generators.join(", "),
                    row.corrected_family.as_deref().unwrap_or("empty")
                ),
            );
        }
        if row.free_parameters != row.printed_dim {
            b.push(
                "isotropy_catalog",
                format!("row {} ({})", row.row, row.name),
                format!(
                    "printed dimension {} but {} free parameters",
                    row.printed_dim, row.free_parameters
                ),
            );
        }
    }
    for (i, j) in &catalog.duplicate_families {
        b.push(
            "isotropy_catalog",
            format!("rows {i} and {j}"),
            "identical fixed-point families printed for different subgroups",
        );
    }
    for (i, j) in &catalog.duplicate_names {
        b.push(
            "isotropy_catalog",
            format!("rows {i} and {j}"),
            "same subgroup name printed twice",
        );
    }

    for row in isotropy_table_c2(&table) {
        for note in &row.notes {
            b.push(
                "c2_isotropy",
                format!("{} / {}", row.q8_name, row.d8_name),
                note.clone(),
            );
        }
    }

    // Closed-form stability conditions for the edge branch ask for Re(B) > 0,
    // while its eigenvalue block needs trace Re(B) < 0.
    let probe = HopfCoeffs {
        a_n: Complex64::new(1.0, 0.0),
        b: Complex64::new(1.0, 0.0),
        c: Complex64::new(-1.0, 0.0),
        ..Default::default()
    };
    let edge = &classify_branches(&probe).branches[1];
    b.push(
        "branch_stability_rule",
        format!("{} with A_N = 1, B = 1, C = -1", edge.notation),
        format!(
            "closed-form conditions Re(2A_N+B) > 0, Re(B) > 0, Re(B conj C) < 0 all hold, \
             yet trace = Re(B) = 1 > 0 so the branch is {}",
            if edge.is_stable() {
                "stable"
            } else {
                "unstable"
            }
        ),
    );

    for (u, e, q) in REFERENCE_PARAMS {
        let p = Params::new(u, e, q);
        let label = format!("(u, eps, q) = ({u}, {e}, {q})");
        let class = classify(&p);
        let ex = existence_conditions(&p);
        if class.class != StabilityClass::Inconclusive && !ex.as_printed {
            b.push(
                "existence_conditions",
                label.clone(),
                format!(
                    "class {} but |eps| < u/2, |eps+2q| < u/2 fails as printed (with |u|: {})",
                    class.class.as_str(),
                    ex.with_abs_u
                ),
            );
        }
        if let Ok(r) = rho_paper(&p) {
            if r.rho < 0.0 {
                b.push(
                    "rho_closed_form",
                    label.clone(),
                    format!(
                        "closed form gives rho = {} (negative); magnitudes give {}",
                        r.rho, r.rho_abs
                    ),
                );
            }
        }
        if class.class == StabilityClass::CompletelyUnstable {
            if let Ok(ti) = transition_index(&p, CubePoint::A, &ShootOptions::default()) {
                if ti.attracting == Some(true) {
                    b.push(
                        "heteroclinic_cycle",
                        label.clone(),
                        format!(
                            "class CompletelyUnstable but the loop {} has all transverse \
                             eigenvalues negative and transition-matrix spectral radius {:.4} > 1, \
                             so it attracts",
                            ti.nodes.join(" -> "),
                            ti.perron
                        ),
                    );
                }
            }
        }
        if matches!(
            class.class,
            StabilityClass::AsymptoticallyStable | StabilityClass::EssentiallyAsymptoticallyStable
        ) {
            let report = find_connections(&p, &ShootOptions::default())?;
            for leg in report.legs.iter().filter(|l| !l.connected()) {
                let outcome = leg
                    .shots
                    .iter()
                    .map(|s| s.reached_label.clone().unwrap_or_else(|| "nothing".into()))
                    .collect::<Vec<_>>()
                    .join(", ");
                b.push(
                    "heteroclinic_cycle",
                    format!("{label}: {} -> {}", leg.from_label, leg.to_label),
                    format!(
                        "class {} but the leg is not connected; eigenvalues {:?}; shots reach {}",
                        class.class.as_str(),
                        leg.source_eigenvalues,
                        if outcome.is_empty() { "none" } else { &outcome }
                    ),
                );
            }
        }
    }

    let mut counts = BTreeMap::new();
    for e in &b.0 {
        *counts.entry(e.category.clone()).or_insert(0) += 1;
    }
    Ok(DiscrepancyReport {
        entries: b.0,
        counts,
    })
}
