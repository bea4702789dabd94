//! The sixteen-cell coupled system wired by the Cayley graph.
//!
//! Cell `i` evolves as
//!
//! ```text
//! x_i' = f(x_i) + ε [ g(x_{a⁻(i)}, x_i) + h(x_{b⁻(i)}, x_{b⁺(i)}) ]
//! ```
//!
//! where `a⁻(i)` is the a-predecessor of `i` in the Cayley graph and
//! `b⁻(i)`, `b⁺(i)` are its b-predecessor and b-successor.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CayleyGraph, GroupTable, Perm16, CELLS};
use crate::ode::{self, OdeSystem, Options};

pub type StateVec16 = [f64; CELLS];

/// Largest allowed `|F(γx) − γF(x)|` when a network is built.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Internal cell dynamics `f`.
#[derive(Clone)]
pub enum CellMap {
    Zero,
    Identity,
    /// `f(x) = -x`
    Decay,
    /// `f(x) = x - x³`
    Bistable,
    /// `f(x) = ω + a sin x`; a running phase when `|a| < ω`.
    Phase {
        omega: f64,
        a: f64,
    },
    Custom(ScalarFn),
}

impl CellMap {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CellMap::Zero => 0.0,
            CellMap::Identity => x,
            CellMap::Decay => -x,
            CellMap::Bistable => x - x * x * x,
            CellMap::Phase { omega, a } => omega + a * x.sin(),
            CellMap::Custom(f) => f(x),
        }
    }

    /// Parses `zero`, `identity`, `decay`, `bistable`, `phase` or
    /// `phase:<omega>,<a>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = split_spec(spec)?;
        match (name, args.as_slice()) {
            ("zero", []) => Ok(CellMap::Zero),
            ("identity", []) => Ok(CellMap::Identity),
            ("decay", []) => Ok(CellMap::Decay),
            ("bistable", []) => Ok(CellMap::Bistable),
            ("phase", []) => Ok(CellMap::Phase { omega: 1.0, a: 0.5 }),
            ("phase", [omega, a]) => Ok(CellMap::Phase {
                omega: *omega,
                a: *a,
            }),
            _ => Err(Error::InvalidArgument(format!("unknown cell map {spec:?}"))),
        }
    }
}

impl fmt::Debug for CellMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellMap::Zero => f.write_str("zero"),
            CellMap::Identity => f.write_str("identity"),
            CellMap::Decay => f.write_str("decay"),
            CellMap::Bistable => f.write_str("bistable"),
            CellMap::Phase { omega, a } => write!(f, "phase:{omega},{a}"),
            CellMap::Custom(_) => f.write_str("custom"),
        }
    }
}

/// Two-argument coupling `g(source, target)` or `h(left, right)`.
#[derive(Clone)]
pub enum PairMap {
    Zero,
    /// `k (y - x)`
    Diffusive {
        k: f64,
    },
    /// `k sin(y - x)`
    Sine {
        k: f64,
    },
    /// A deliberately asymmetric smooth map, `y - x + 0.3 x y² + 0.2 sin x`.
    Mixed,
    Custom(PairFn),
}

impl PairMap {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            PairMap::Zero => 0.0,
            PairMap::Diffusive { k } => k * (y - x),
            PairMap::Sine { k } => k * (y - x).sin(),
            PairMap::Mixed => y - x + 0.3 * x * y * y + 0.2 * x.sin(),
            PairMap::Custom(g) => g(x, y),
        }
    }

    /// Parses `zero`, `diffusive[:k]`, `sine[:k]` or `mixed`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = split_spec(spec)?;
        match (name, args.as_slice()) {
            ("zero", []) => Ok(PairMap::Zero),
            ("diffusive", []) => Ok(PairMap::Diffusive { k: 1.0 }),
            ("diffusive", [k]) => Ok(PairMap::Diffusive { k: *k }),
            ("sine", []) => Ok(PairMap::Sine { k: 1.0 }),
            ("sine", [k]) => Ok(PairMap::Sine { k: *k }),
            ("mixed", []) => Ok(PairMap::Mixed),
            _ => Err(Error::InvalidArgument(format!(
                "unknown coupling map {spec:?}"
            ))),
        }
    }
}

impl fmt::Debug for PairMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairMap::Zero => f.write_str("zero"),
            PairMap::Diffusive { k } => write!(f, "diffusive:{k}"),
            PairMap::Sine { k } => write!(f, "sine:{k}"),
            PairMap::Mixed => f.write_str("mixed"),
            PairMap::Custom(_) => f.write_str("custom"),
        }
    }
}

fn split_spec(spec: &str) -> Result<(&str, Vec<f64>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (spec, None),
    };
    let args = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad parameter {v:?} in {spec:?}")))
            })
            .collect::<Result<_>>()?,
    };
    Ok((name.trim(), args))
}

/// The maps `f`, `g`, `h`.
#[derive(Clone, Debug)]
pub struct CouplingSpec {
    pub f: CellMap,
    pub g: PairMap,
    pub h: PairMap,
}

impl CouplingSpec {
    /// Checks the maps are finite on a grid over `[-2, 2]`.
    pub fn new(f: CellMap, g: PairMap, h: PairMap) -> Result<Self> {
        let grid: Vec<f64> = (0..9).map(|k| -2.0 + 0.5 * k as f64).collect();
        for &x in &grid {
            if !f.eval(x).is_finite() {
                return Err(Error::NonFinite(format!("f({x})")));
            }
            for &y in &grid {
                if !g.eval(x, y).is_finite() || !h.eval(x, y).is_finite() {
                    return Err(Error::NonFinite(format!("coupling at ({x}, {y})")));
                }
            }
        }
        Ok(Self { f, g, h })
    }

    pub fn decoupled(f: CellMap) -> Self {
        Self {
            f,
            g: PairMap::Zero,
            h: PairMap::Zero,
        }
    }
}

/// Which cells feed each cell's coupling terms (zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wiring {
    pub a_pred: [usize; CELLS],
    pub b_pred: [usize; CELLS],
    pub b_succ: [usize; CELLS],
}

impl Wiring {
    pub fn from_graph(graph: &CayleyGraph) -> Self {
        Self {
            a_pred: graph.a_successor().inverse().images(),
            b_pred: graph.b_successor().inverse().images(),
            b_succ: graph.b_successor().images(),
        }
    }
}

/// The coupled sixteen-cell system.
#[derive(Clone, Debug)]
pub struct CellNetwork {
    wiring: Wiring,
    coupling: CouplingSpec,
    epsilon: f64,
}

/// Builds the network and checks it commutes with every element of `group`.
pub fn build_network(
    graph: &CayleyGraph,
    coupling: CouplingSpec,
    epsilon: f64,
    group: &GroupTable,
) -> Result<CellNetwork> {
    let net = CellNetwork::unchecked(graph, coupling, epsilon);
    let residual = net.max_equivariance_residual(group, 100, 0x51_6e_7e_d0);
    if let Some((element, r)) = residual.filter(|(_, r)| !(*r < EQUIVARIANCE_TOL)) {
        return Err(Error::NotEquivariant {
            element,
            residual: r,
        });
    }
    Ok(net)
}

impl CellNetwork {
    /// Builds the network without the equivariance check.
    pub fn unchecked(graph: &CayleyGraph, coupling: CouplingSpec, epsilon: f64) -> Self {
        Self {
            wiring: Wiring::from_graph(graph),
            coupling,
            epsilon,
        }
    }

    pub fn wiring(&self) -> &Wiring {
        &self.wiring
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    fn field_into(&self, x: &[f64], dx: &mut [f64]) {
        let w = &self.wiring;
        let c = &self.coupling;
        for i in 0..CELLS {
            let coupling =
                c.g.eval(x[w.a_pred[i]], x[i]) + c.h.eval(x[w.b_pred[i]], x[w.b_succ[i]]);
            dx[i] = c.f.eval(x[i]) + self.epsilon * coupling;
        }
    }

    /// The vector field at `x`.
    pub fn vector_field(&self, x: &StateVec16) -> Result<StateVec16> {
        let mut dx = [0.0; CELLS];
        self.field_into(x, &mut dx);
        if dx.iter().all(|v| v.is_finite()) {
            Ok(dx)
        } else {
            Err(Error::NonFinite("coupled field overflow".into()))
        }
    }

    /// `max |F(γx) − γF(x)|` for one element and state.
    pub fn equivariance_residual(&self, gamma: &Perm16, x: &StateVec16) -> Result<f64> {
        let lhs = self.vector_field(&permute_state(gamma, x))?;
        let rhs = permute_state(gamma, &self.vector_field(x)?);
        Ok(lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Worst residual over `samples` random states in `[-1.5, 1.5]^16` and
    /// all group elements, with the element that attains it.
    pub fn max_equivariance_residual(
        &self,
        group: &GroupTable,
        samples: usize,
        seed: u64,
    ) -> Option<(String, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<(String, f64)> = None;
        for _ in 0..samples {
            let x: StateVec16 = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
            for (k, gamma) in group.elements().iter().enumerate() {
                let r = self
                    .equivariance_residual(gamma, &x)
                    .unwrap_or(f64::INFINITY);
                if worst.as_ref().is_none_or(|(_, w)| r > *w || r.is_nan()) {
                    worst = Some((group.name(k), r));
                }
            }
        }
        worst
    }

    /// Integrates from `x0` to `t_end` and samples the trajectory at
    /// `sample_times` (all within `[0, t_end]`).
    pub fn simulate(
        &self,
        x0: &StateVec16,
        t_end: f64,
        tol: f64,
        sample_times: &[f64],
    ) -> Result<Trajectory> {
        if !(t_end > 0.0) || !(tol > 0.0) {
            return Err(Error::InvalidArgument(
                "t_end and tol must be positive".into(),
            ));
        }
        if let Some(t) = sample_times.iter().find(|t| !(0.0..=t_end).contains(*t)) {
            return Err(Error::InvalidArgument(format!(
                "sample time {t} outside [0, {t_end}]"
            )));
        }
        let sol = ode::integrate(self, 0.0, x0, t_end, &Options::with_tol(tol))?;
        let states = sol
            .sample(sample_times)
            .into_iter()
            .map(|v| v.try_into().expect("sixteen components"))
            .collect();
        Ok(Trajectory {
            times: sample_times.to_vec(),
            states,
        })
    }
}

impl OdeSystem for CellNetwork {
    fn dim(&self) -> usize {
        CELLS
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.field_into(y, dy);
    }
}

/// `(γx)_{γ(i)} = x_i`: cell `i`'s value moves to cell `γ(i)`.
pub fn permute_state(gamma: &Perm16, x: &StateVec16) -> StateVec16 {
    let mut out = [0.0; CELLS];
    for (i, &v) in x.iter().enumerate() {
        out[gamma.apply(i)] = v;
    }
    out
}

/// Uniform random state in `[-1, 1]^16`.
pub fn random_state(seed: u64) -> StateVec16 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVec16>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&StateVec16> {
        self.states.last()
    }
}

/// The sixteen printed rows of the coupled system: one-based
/// `(g source, g target)` and `(h left, h right)` for cells 1..=16.
pub const PRINTED_WIRING: [((usize, usize), (usize, usize)); CELLS] = [
    ((12, 1), (5, 9)),
    ((1, 2), (9, 13)),
    ((2, 3), (13, 1)),
    ((3, 4), (1, 5)),
    ((4, 9), (2, 6)),
    ((9, 10), (6, 10)),
    ((10, 11), (10, 14)),
    ((11, 12), (14, 2)),
    ((6, 5), (3, 7)),
    ((5, 16), (7, 11)),
    ((16, 15), (11, 15)),
    ((15, 14), (15, 3)),
    ((14, 13), (4, 8)),
    ((13, 8), (8, 12)),
    ((8, 7), (12, 16)),
    ((7, 6), (16, 4)),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WiringVerdict {
    Match,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiringAuditRow {
    /// One-based cell index.
    pub cell: usize,
    pub printed_g: (usize, usize),
    pub printed_h: (usize, usize),
    pub derived_g: (usize, usize),
    pub derived_h: (usize, usize),
    pub g_matches: bool,
    pub h_matches: bool,
    pub verdict: WiringVerdict,
}

/// Compares derived wiring with the printed rows.
pub fn audit_eq3(wiring: &Wiring) -> Vec<WiringAuditRow> {
    PRINTED_WIRING
        .iter()
        .enumerate()
        .map(|(i, &(printed_g, printed_h))| {
            let derived_g = (wiring.a_pred[i] + 1, i + 1);
            let derived_h = (wiring.b_pred[i] + 1, wiring.b_succ[i] + 1);
            let g_matches = derived_g == printed_g;
            let h_matches = derived_h == printed_h;
            WiringAuditRow {
                cell: i + 1,
                printed_g,
                printed_h,
                derived_g,
                derived_h,
                g_matches,
                h_matches,
                verdict: if g_matches && h_matches {
                    WiringVerdict::Match
                } else {
                    WiringVerdict::Mismatch
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::q8_group;

    fn setup() -> (GroupTable, CayleyGraph) {
        let t = q8_group().unwrap();
        let g = CayleyGraph::from_table(&t).unwrap();
        (t, g)
    }

    fn mixed() -> CouplingSpec {
        CouplingSpec::new(CellMap::Bistable, PairMap::Mixed, PairMap::Sine { k: 0.7 }).unwrap()
    }

    #[test]
    fn builds_and_is_equivariant() {
        let (t, g) = setup();
        let net = build_network(&g, mixed(), 0.3, &t).unwrap();
        let (_, worst) = net.max_equivariance_residual(&t, 100, 9).unwrap();
        assert!(worst < 1e-9);
    }

    #[test]
    fn left_translation_wiring_is_rejected() {
        let (t, _) = setup();
        let g = CayleyGraph::left_translation_edges(&t);
        assert!(matches!(
            build_network(&g, mixed(), 0.3, &t),
            Err(Error::NotEquivariant { .. })
        ));
    }

    #[test]
    fn decoupled_limit() {
        let (t, g) = setup();
        let net = build_network(&g, CouplingSpec::decoupled(CellMap::Bistable), 1.0, &t).unwrap();
        let x = random_state(3);
        let dx = net.vector_field(&x).unwrap();
        for i in 0..CELLS {
            assert_eq!(dx[i], x[i] - x[i].powi(3));
        }
        assert_eq!(net.vector_field(&[1.0; CELLS]).unwrap(), [0.0; CELLS]);
    }

    #[test]
    fn identity_cell_map() {
        let (t, g) = setup();
        let net = build_network(&g, CouplingSpec::decoupled(CellMap::Identity), 1.0, &t).unwrap();
        let x = random_state(4);
        assert_eq!(net.vector_field(&x).unwrap(), x);
    }

    #[test]
    fn homogeneous_state_gives_equal_components() {
        let (t, g) = setup();
        let net = build_network(&g, mixed(), 0.5, &t).unwrap();
        let dx = net.vector_field(&[0.37; CELLS]).unwrap();
        assert!(dx.iter().all(|v| *v == dx[0]));
    }

    #[test]
    fn permuting_by_a_commutes() {
        let (t, g) = setup();
        let net = build_network(&g, mixed(), 0.5, &t).unwrap();
        let x = random_state(5);
        assert!(net.equivariance_residual(t.a(), &x).unwrap() < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let (_, g) = setup();
        let f = CellMap::Custom(Arc::new(|x: f64| x.exp()));
        let net = CellNetwork::unchecked(&g, CouplingSpec::decoupled(f), 0.0);
        assert!(net.vector_field(&[1000.0; CELLS]).is_err());
    }

    #[test]
    fn coupling_probe_rejects_singular_maps() {
        let f = CellMap::Custom(Arc::new(|x: f64| 1.0 / x));
        assert!(CouplingSpec::new(f, PairMap::Zero, PairMap::Zero).is_err());
    }

    #[test]
    fn map_parsing() {
        assert!(
            matches!(CellMap::parse("phase:2,0.5").unwrap(), CellMap::Phase { omega, a } if omega == 2.0 && a == 0.5)
        );
        assert!(
            matches!(PairMap::parse("diffusive:0.2").unwrap(), PairMap::Diffusive { k } if k == 0.2)
        );
        assert!(CellMap::parse("nope").is_err());
        assert!(PairMap::parse("sine:x").is_err());
    }

    #[test]
    fn linear_decay_simulation() {
        let (t, g) = setup();
        let net = build_network(&g, CouplingSpec::decoupled(CellMap::Decay), 0.0, &t).unwrap();
        let x0 = random_state(11);
        let times = [0.0, 1.0, 2.5, 4.0];
        let traj = net.simulate(&x0, 4.0, 1e-10, &times).unwrap();
        for (tk, s) in times.iter().zip(&traj.states) {
            for i in 0..CELLS {
                assert!((s[i] - x0[i] * (-tk).exp()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn phase_cells_run_round_their_cycle() {
        // x' = ω + a sin x advances by 2π every 2π / sqrt(ω² − a²)
        let (t, g) = setup();
        let f = CellMap::Phase { omega: 1.0, a: 0.5 };
        let net = build_network(&g, CouplingSpec::decoupled(f), 0.0, &t).unwrap();
        let period = 2.0 * std::f64::consts::PI / (1.0f64 - 0.25).sqrt();
        let x0 = random_state(12);
        let traj = net.simulate(&x0, period, 1e-11, &[period]).unwrap();
        for i in 0..CELLS {
            let advance = traj.states[0][i] - x0[i];
            assert!(
                (advance - 2.0 * std::f64::consts::PI).abs() < 1e-7,
                "{advance}"
            );
        }
    }

    #[test]
    fn uncoupled_cells_are_independent() {
        let (t, g) = setup();
        let net = build_network(&g, CouplingSpec::decoupled(CellMap::Bistable), 0.0, &t).unwrap();
        let x0 = random_state(13);
        let mut x1 = x0;
        x1[7] += 0.5;
        let a = net.simulate(&x0, 5.0, 1e-10, &[5.0]).unwrap();
        let b = net.simulate(&x1, 5.0, 1e-10, &[5.0]).unwrap();
        for i in (0..CELLS).filter(|&i| i != 7) {
            assert!((a.states[0][i] - b.states[0][i]).abs() < 1e-9);
        }
    }

    #[test]
    fn flow_commutes_with_group() {
        let (t, g) = setup();
        let net = build_network(&g, mixed(), 0.2, &t).unwrap();
        let x0 = random_state(14);
        let base = net.simulate(&x0, 10.0, 1e-10, &[10.0]).unwrap();
        for gamma in t.elements() {
            let moved = net
                .simulate(&permute_state(gamma, &x0), 10.0, 1e-10, &[10.0])
                .unwrap();
            let expect = permute_state(gamma, &base.states[0]);
            let dev = moved.states[0]
                .iter()
                .zip(&expect)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-6, "{dev}");
        }
    }

    #[test]
    fn simulate_validates_arguments() {
        let (t, g) = setup();
        let net = build_network(&g, mixed(), 0.2, &t).unwrap();
        let x0 = random_state(1);
        assert!(net.simulate(&x0, 0.0, 1e-8, &[]).is_err());
        assert!(net.simulate(&x0, 1.0, 0.0, &[]).is_err());
        assert!(net.simulate(&x0, 1.0, 1e-8, &[2.0]).is_err());
    }

    #[test]
    fn wiring_audit() {
        let (_, g) = setup();
        let rows = audit_eq3(&Wiring::from_graph(&g));
        assert_eq!(rows.len(), 16);
        // cell 1's g term agrees with the printed g(x12, x1)
        assert!(rows[0].g_matches);
        assert_eq!(rows[0].derived_g, (12, 1));
        assert_eq!(rows, audit_eq3(&Wiring::from_graph(&g)));
    }

    #[test]
    fn shuffled_graph_mismatches_everywhere() {
        let (_, g) = setup();
        let sigma = Perm16::from_cycles(&[(1..=16).collect::<Vec<_>>()]).unwrap();
        let rows = audit_eq3(&Wiring::from_graph(&g.relabel(&sigma)));
        assert!(rows.iter().all(|r| r.verdict == WiringVerdict::Mismatch));
    }
}
