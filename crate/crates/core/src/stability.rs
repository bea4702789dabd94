//! Stability of the heteroclinic cycle: eigenvalue splits, the product index
//! `ρ`, the closed-form predicates and an empirical basin probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    axis_eigenvalues, find_connections, integrate3, shoot, ConnectionReport, CubePoint,
    ShootOptions,
};
use crate::error::{Error, Result};
use crate::torus::{circular_distance, Params, Theta3};

const AXES: [&str; 3] = ["theta1", "theta2", "theta3"];

/// Eigenvalue roles at one node of the cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeEigenSplit {
    pub node: String,
    pub out_axis: usize,
    pub in_axis: usize,
    pub transverse_axis: usize,
    /// Expanding eigenvalue.
    pub e: f64,
    /// Magnitude of the contracting eigenvalue.
    pub c: f64,
    /// Transverse eigenvalue, signed.
    pub t: f64,
    pub geometry_ok: bool,
    pub transverse_expanding: bool,
    pub diagnostic: Option<String>,
}

impl NodeEigenSplit {
    /// Assigns roles from the node's axis eigenvalues and the two axes used
    /// by the outgoing and incoming connections.
    pub fn from_axes(node: &str, eig: [f64; 3], out_axis: usize, in_axis: usize) -> Result<Self> {
        if out_axis > 2 || in_axis > 2 || out_axis == in_axis {
            return Err(Error::InvalidArgument(format!(
                "outgoing axis {out_axis} and incoming axis {in_axis} must be distinct axes"
            )));
        }
        let transverse_axis = 3 - out_axis - in_axis;
        let e = eig[out_axis];
        let incoming = eig[in_axis];
        let t = eig[transverse_axis];
        let mut problems = Vec::new();
        if e <= 0.0 {
            problems.push(format!(
                "eigenvalue {e} on outgoing axis {} is not expanding",
                AXES[out_axis]
            ));
        }
        if incoming >= 0.0 {
            problems.push(format!(
                "eigenvalue {incoming} on incoming axis {} is not contracting",
                AXES[in_axis]
            ));
        }
        Ok(Self {
            node: node.to_string(),
            out_axis,
            in_axis,
            transverse_axis,
            e,
            c: -incoming,
            t,
            geometry_ok: problems.is_empty(),
            transverse_expanding: t > 0.0,
            diagnostic: (!problems.is_empty()).then(|| problems.join("; ")),
        })
    }

    /// `min{c/e, 1 − t/e}`.
    pub fn rho(&self) -> f64 {
        (self.c / self.e).min(1.0 - self.t / self.e)
    }
}

/// Axis along which the arc's last point differs most from where it landed.
fn approach_axis(arc_end: &Theta3, landing: &Theta3) -> usize {
    (0..3)
        .max_by(|&a, &b| {
            circular_distance(arc_end.0[a], landing.0[a])
                .total_cmp(&circular_distance(arc_end.0[b], landing.0[b]))
        })
        .expect("three axes")
}

/// Splits the eigenvalues of every cycle node using the departure axis of
/// its outgoing leg and the approach axis of its incoming leg.
pub fn split_eigenvalues(report: &ConnectionReport) -> Result<Vec<NodeEigenSplit>> {
    let n = report.legs.len();
    let mut best = Vec::with_capacity(n);
    for leg in &report.legs {
        match leg.best() {
            Some(s) => best.push(s),
            None => {
                return Err(Error::Precondition(format!(
                    "leg {} -> {} is not connected",
                    leg.from_label, leg.to_label
                )))
            }
        }
    }
    (0..n)
        .map(|k| {
            let leg = &report.legs[k];
            let prev = best[(k + n - 1) % n];
            let landing = prev
                .reached
                .expect("connected shot has a landing point")
                .theta();
            let end = prev.arc.last().expect("non-empty arc").theta;
            let in_axis = approach_axis(&end, &landing);
            let eig = axis_eigenvalues(leg.from, &report.params);
            NodeEigenSplit::from_axes(&leg.from_label, eig, best[k].axis, in_axis)
        })
        .collect()
}

/// Which printed branch of the closed form applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoBranch {
    /// `q < 3u/4 − ε/2`
    Below,
    /// `q > 3u/4 − ε/2`
    Above,
    /// `q` equals the threshold; both branches agree there.
    Boundary,
}

/// The closed-form index values exactly as printed, plus magnitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRho {
    pub branch: RhoBranch,
    pub threshold: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho: f64,
    pub rho_abs: f64,
    /// Product of the magnitudes of the three factors.
    pub rho_factor_abs: f64,
    /// The product form is only stated for `u < 0`.
    pub in_stated_domain: bool,
}

/// Evaluates the printed closed forms for `ρ₁`, `ρ₂ = ρ₃` and `ρ`.
pub fn rho_paper(p: &Params) -> Result<ClosedFormRho> {
    p.validate()?;
    let (u, e, q) = (p.u, p.epsilon, p.q);
    let den = u + 2.0 * e;
    if den == 0.0 {
        return Err(Error::Singular("u + 2*epsilon = 0".into()));
    }
    let threshold = 0.75 * u - 0.5 * e;
    let branch = if q < threshold {
        RhoBranch::Below
    } else if q > threshold {
        RhoBranch::Above
    } else {
        RhoBranch::Boundary
    };
    let minus = -u + 2.0 * e;
    let rho1 = match branch {
        RhoBranch::Below => (2.0 * u - 4.0 * q) / den,
        _ => minus / den,
    };
    let rho2 = minus / den;
    let rho = match branch {
        RhoBranch::Below => minus * minus * (2.0 * u - 4.0 * q) / den.powi(3),
        _ => minus.powi(3) / den.powi(3),
    };
    Ok(ClosedFormRho {
        branch,
        threshold,
        rho1,
        rho2,
        rho3: rho2,
        rho,
        rho_abs: rho.abs(),
        rho_factor_abs: rho1.abs() * rho2.abs() * rho2.abs(),
        in_stated_domain: u < 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub per_node: Vec<f64>,
    pub rho: f64,
    pub km_convention_used: bool,
    pub all_positive: bool,
    pub interpretation: String,
    pub paper_formula_values: Option<ClosedFormRho>,
    pub discrepancy_notes: Vec<String>,
}

/// `ρ = Π min{cᵢ/eᵢ, 1 − tᵢ/eᵢ}` with `e, c` as positive magnitudes.
pub fn rho_km(splits: &[NodeEigenSplit]) -> Result<RhoReport> {
    if splits.is_empty() {
        return Err(Error::InvalidArgument("no nodes to combine".into()));
    }
    if let Some(bad) = splits.iter().find(|s| !s.geometry_ok) {
        return Err(Error::Precondition(format!(
            "node {}: {}",
            bad.node,
            bad.diagnostic.clone().unwrap_or_default()
        )));
    }
    let per_node: Vec<f64> = splits.iter().map(NodeEigenSplit::rho).collect();
    let rho = per_node.iter().product();
    let all_positive = per_node.iter().all(|r| *r > 0.0);
    let interpretation = if all_positive && rho > 1.0 {
        "rho > 1 with every rho_i > 0: asymptotically stable"
    } else if all_positive {
        "rho <= 1 with every rho_i > 0: not asymptotically stable"
    } else {
        "some rho_i <= 0: a transverse direction expands"
    };
    Ok(RhoReport {
        per_node,
        rho,
        km_convention_used: true,
        all_positive,
        interpretation: interpretation.into(),
        paper_formula_values: None,
        discrepancy_notes: Vec::new(),
    })
}

/// Attaches the closed-form values and notes every disagreement.
pub fn compare_with_closed_form(report: &mut RhoReport, p: &Params) {
    match rho_paper(p) {
        Ok(pr) => {
            if !pr.in_stated_domain {
                report
                    .discrepancy_notes
                    .push("closed form for rho is only stated for u < 0".into());
            }
            if pr.rho < 0.0 {
                report.discrepancy_notes.push(format!(
                    "closed form gives negative rho = {} while magnitudes give {}",
                    pr.rho, report.rho
                ));
            }
            if (pr.rho - report.rho).abs() > 1e-9 * (1.0 + report.rho.abs()) {
                report.discrepancy_notes.push(format!(
                    "closed form rho = {} differs from computed rho = {}",
                    pr.rho, report.rho
                ));
            }
            report.paper_formula_values = Some(pr);
        }
        Err(e) => report
            .discrepancy_notes
            .push(format!("closed form not evaluated: {e}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    AsymptoticallyStable,
    EssentiallyAsymptoticallyStable,
    CompletelyUnstable,
    Inconclusive,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::AsymptoticallyStable => "AsymptoticallyStable",
            StabilityClass::EssentiallyAsymptoticallyStable => "EssentiallyAsymptoticallyStable",
            StabilityClass::CompletelyUnstable => "CompletelyUnstable",
            StabilityClass::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// `u < 0` and `q < 3u/4 − ε/2`.
    BelowThreshold,
    /// `u < 0` and `3u/4 − ε/2 < q < u/2 − (u+2ε)³/(−u+2ε)²`.
    Window,
    /// `u > 0`.
    PositiveU,
}

impl Trigger {
    pub fn predicate(self) -> &'static str {
        match self {
            Trigger::BelowThreshold => "u < 0 and q < 3u/4 - eps/2",
            Trigger::Window => "u < 0 and 3u/4 - eps/2 < q < u/2 - (u+2eps)^3/(-u+2eps)^2",
            Trigger::PositiveU => "u > 0",
        }
    }
}

/// The pair of existence inequalities under both readings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceConditions {
    /// `|ε| < u/2` and `|ε + 2q| < u/2`.
    pub as_printed: bool,
    /// `|ε| < |u|/2` and `|ε + 2q| < |u|/2`.
    pub with_abs_u: bool,
    pub note: String,
}

pub fn existence_conditions(p: &Params) -> ExistenceConditions {
    let lhs1 = p.epsilon.abs();
    let lhs2 = (p.epsilon + 2.0 * p.q).abs();
    let as_printed = lhs1 < p.u / 2.0 && lhs2 < p.u / 2.0;
    let with_abs_u = lhs1 < p.u.abs() / 2.0 && lhs2 < p.u.abs() / 2.0;
    let note = if p.u < 0.0 {
        "the printed reading cannot hold for u < 0, where the stable classes live".to_string()
    } else if p.u == 0.0 {
        "both readings fail at u = 0".to_string()
    } else {
        "both readings coincide for u > 0".to_string()
    };
    ExistenceConditions {
        as_printed,
        with_abs_u,
        note,
    }
}

/// Upper end of the window predicate, `None` when `−u + 2ε = 0`.
pub fn window_upper_bound(p: &Params) -> Option<f64> {
    let d = -p.u + 2.0 * p.epsilon;
    (d != 0.0).then(|| p.u / 2.0 - (p.u + 2.0 * p.epsilon).powi(3) / (d * d))
}

/// Evaluates the three predicates independently.
pub fn predicates(p: &Params) -> [bool; 3] {
    let threshold = 0.75 * p.u - 0.5 * p.epsilon;
    let below = p.u < 0.0 && p.q < threshold;
    let window =
        p.u < 0.0 && p.q > threshold && window_upper_bound(p).is_some_and(|upper| p.q < upper);
    [below, window, p.u > 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub params: Params,
    pub class: StabilityClass,
    pub trigger: Option<Trigger>,
    pub triggering_condition: Option<String>,
    pub threshold: f64,
    pub window_upper: Option<f64>,
    pub existence: ExistenceConditions,
    pub notes: Vec<String>,
}

pub fn classify(p: &Params) -> Classification {
    let fired = predicates(p);
    let triggers = [Trigger::BelowThreshold, Trigger::Window, Trigger::PositiveU];
    let hits: Vec<Trigger> = (0..3).filter(|k| fired[*k]).map(|k| triggers[k]).collect();
    let mut notes = Vec::new();
    let trigger = match hits.as_slice() {
        [] => None,
        [t] => Some(*t),
        many => {
            notes.push(format!("{} predicates fired at once", many.len()));
            None
        }
    };
    let class = match trigger {
        Some(Trigger::BelowThreshold) => StabilityClass::AsymptoticallyStable,
        Some(Trigger::Window) => StabilityClass::EssentiallyAsymptoticallyStable,
        Some(Trigger::PositiveU) => StabilityClass::CompletelyUnstable,
        None => StabilityClass::Inconclusive,
    };
    let window_upper = window_upper_bound(p);
    if p.u < 0.0 && window_upper.is_none() {
        notes.push("window bound undefined: -u + 2eps = 0".into());
    }
    let existence = existence_conditions(p);
    if class != StabilityClass::Inconclusive && !existence.as_printed {
        notes.push("existence inequalities fail as printed".into());
    }
    Classification {
        params: *p,
        class,
        trigger,
        triggering_condition: trigger.map(|t| t.predicate().to_string()),
        threshold: 0.75 * p.u - 0.5 * p.epsilon,
        window_upper,
        existence,
        notes,
    }
}

/// Closed loop actually traced by the flow between cube points, with the
/// return map linearised in logarithmic coordinates.
///
/// Every coordinate plane is invariant, so after a node the transverse
/// coordinate can become the next node's expanding one. The product index
/// above does not see this; the transition matrices do.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionIndex {
    pub nodes: Vec<String>,
    pub splits: Vec<NodeEigenSplit>,
    /// Return map on `(-ln |x_out|, -ln |x_transverse|)` at the first node.
    pub matrix: [[f64; 2]; 2],
    /// Spectral radius of `matrix`.
    pub perron: f64,
    /// `Some` only when every transverse eigenvalue is negative.
    pub attracting: Option<bool>,
}

/// Largest number of nodes followed before giving up on closing the loop.
const MAX_LOOP: usize = 16;

/// Follows the one-dimensional unstable manifolds from `start` until the
/// flow comes back to it, then composes the transition matrices.
pub fn transition_index(
    p: &Params,
    start: CubePoint,
    opts: &ShootOptions,
) -> Result<TransitionIndex> {
    let mut path: Vec<(CubePoint, usize)> = Vec::new();
    let mut cur = start;
    loop {
        let eig = axis_eigenvalues(cur, p);
        let expanding: Vec<usize> = (0..3).filter(|&k| eig[k] > 0.0).collect();
        if expanding.len() != 1 {
            return Err(Error::Precondition(format!(
                "{} has {} expanding axes; eigenvalues {eig:?}",
                cur.coordinates(),
                expanding.len()
            )));
        }
        let axis = expanding[0];
        let res = shoot(p, cur, cur, axis, 1, opts)?;
        let next = res.reached.ok_or_else(|| {
            Error::Precondition(format!(
                "unstable manifold of {} along {} reaches no equilibrium",
                cur.coordinates(),
                AXES[axis]
            ))
        })?;
        path.push((cur, axis));
        cur = next;
        if cur == start {
            break;
        }
        if path.len() == MAX_LOOP || path.iter().any(|(c, _)| *c == cur) {
            return Err(Error::Precondition(format!(
                "flow from {} does not return to it",
                start.coordinates()
            )));
        }
    }
    let n = path.len();
    let splits = (0..n)
        .map(|j| {
            let (node, out) = path[j];
            let incoming = path[(j + n - 1) % n].1;
            NodeEigenSplit::from_axes(
                &node.coordinates(),
                axis_eigenvalues(node, p),
                out,
                incoming,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = splits.iter().find(|s| !s.geometry_ok) {
        return Err(Error::Precondition(format!(
            "node {}: {}",
            bad.node,
            bad.diagnostic.clone().unwrap_or_default()
        )));
    }
    // Columns: images of unit log-distance along out_0 and transverse_0.
    let first = &splits[0];
    let mut cols = [[0.0; 3]; 2];
    cols[0][first.out_axis] = 1.0;
    cols[1][first.transverse_axis] = 1.0;
    for s in &splits {
        for xi in cols.iter_mut() {
            let mut next = [0.0; 3];
            next[s.in_axis] = s.c / s.e * xi[s.out_axis];
            next[s.transverse_axis] = xi[s.transverse_axis] - s.t / s.e * xi[s.out_axis];
            *xi = next;
        }
    }
    let matrix = [
        [cols[0][first.out_axis], cols[1][first.out_axis]],
        [
            cols[0][first.transverse_axis],
            cols[1][first.transverse_axis],
        ],
    ];
    let tr = matrix[0][0] + matrix[1][1];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let disc = tr * tr / 4.0 - det;
    let perron = if disc >= 0.0 {
        (tr / 2.0 + disc.sqrt())
            .abs()
            .max((tr / 2.0 - disc.sqrt()).abs())
    } else {
        det.abs().sqrt()
    };
    let attracting = splits.iter().all(|s| s.t < 0.0).then_some(perron > 1.0);
    Ok(TransitionIndex {
        nodes: path.iter().map(|(c, _)| c.coordinates()).collect(),
        splits,
        matrix,
        perron,
        attracting,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinProbeResult {
    pub params: Params,
    pub radius: f64,
    pub samples: usize,
    pub returned: usize,
    pub returned_fraction: f64,
    /// Binomial standard error of the fraction.
    pub std_error: f64,
    pub seed: u64,
    pub horizon: f64,
}

/// Number of points in the discretised cycle used for distance tests.
pub const ARC_POINTS: usize = 1000;

fn arc_set(report: &ConnectionReport) -> Vec<Theta3> {
    let all: Vec<Theta3> = report
        .legs
        .iter()
        .filter_map(|l| l.best())
        .flat_map(|s| s.arc.iter().map(|a| a.theta))
        .collect();
    if all.len() <= 1 {
        return all;
    }
    (0..ARC_POINTS)
        .map(|k| all[(k * (all.len() - 1) + (ARC_POINTS - 1) / 2) / (ARC_POINTS - 1)])
        .collect()
}

fn distance_to_set(x: &Theta3, set: &[Theta3]) -> f64 {
    set.iter()
        .map(|s| {
            (0..3)
                .map(|k| circular_distance(x.0[k], s.0[k]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Perturbs random points of the cycle by `r` in a random direction,
/// integrates for a fixed horizon and counts returns to within `r/10`.
///
/// Sample `i` draws from its own ChaCha stream, so the result does not depend
/// on how the work is scheduled.
pub fn basin_probe(
    p: &Params,
    r: f64,
    n: usize,
    seed: u64,
    opts: &ShootOptions,
) -> Result<BasinProbeResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {r}"
        )));
    }
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 samples, got {n}"
        )));
    }
    let report = find_connections(p, opts)?;
    if !report.all_connected() {
        let missing: Vec<String> = report
            .legs
            .iter()
            .filter(|l| !l.connected())
            .map(|l| format!("{} -> {}", l.from_label, l.to_label))
            .collect();
        return Err(Error::Precondition(format!(
            "no cycle detected; unconnected legs: {}",
            missing.join(", ")
        )));
    }
    basin_probe_on(&report, r, n, seed)
}

/// Basin probe around an already detected cycle.
pub fn basin_probe_on(
    report: &ConnectionReport,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<BasinProbeResult> {
    let p = report.params;
    let arcs = arc_set(report);
    if arcs.is_empty() {
        return Err(Error::Precondition("cycle has no arcs".into()));
    }
    let min_eig = report
        .legs
        .iter()
        .flat_map(|l| axis_eigenvalues(l.from, &p))
        .map(f64::abs)
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let horizon = if min_eig.is_finite() {
        (20.0 / min_eig).min(1000.0)
    } else {
        1000.0
    };
    let outcomes: Vec<Result<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let base = arcs[rng.gen_range(0..arcs.len())];
            let dir = loop {
                let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.1 && norm <= 1.0 {
                    break v.map(|x| x / norm);
                }
            };
            let start = Theta3(std::array::from_fn(|k| base.0[k] + r * dir[k]));
            let end = integrate3(&start, &p, horizon, 1e-9)?.final_state();
            Ok(distance_to_set(&end, &arcs) < r / 10.0)
        })
        .collect();
    let mut returned = 0;
    for o in outcomes {
        if o? {
            returned += 1;
        }
    }
    let f = returned as f64 / n as f64;
    Ok(BasinProbeResult {
        params: p,
        radius: r,
        samples: n,
        returned,
        returned_fraction: f,
        std_error: (f * (1.0 - f) / n as f64).sqrt(),
        seed,
        horizon,
    })
}
