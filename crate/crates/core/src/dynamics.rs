//! Reduced three-angle dynamics: Jacobian, equilibria, invariant planes,
//! integration and the connection shooter.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, FnSystem, Options, Solution};
use crate::torus::{factored_field, reduced_field, sin_cos, Params, Theta3};

pub type Mat3 = [[f64; 3]; 3];

/// Analytic Jacobian of the factored field.
pub fn jacobian(t: &Theta3, p: &Params) -> Mat3 {
    let [t1, t2, t3] = t.0;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let (sd1, cd1) = sin_cos(2.0 * t1);
    let (sd2, cd2) = sin_cos(2.0 * t2);
    let (sd3, cd3) = sin_cos(2.0 * t3);
    let (u, e, q) = (p.u, p.epsilon, p.q);
    let w = 2.0 * q * (1.0 - c1);
    [
        [
            c1 * (u * c2 + 2.0 * e * c1 * cd2) - 2.0 * e * s1 * s1 * cd2,
            s1 * (-u * s2 - 4.0 * e * c1 * sd2),
            0.0,
        ],
        [
            0.0,
            c2 * (u * c3 + 2.0 * e * c2 * cd3) - 2.0 * e * s2 * s2 * cd3,
            s2 * (-u * s3 - 4.0 * e * c2 * sd3),
        ],
        [
            s3 * (-u * s1 - 4.0 * e * sd1 * c3 + 2.0 * q * s1 * c3),
            0.0,
            c3 * (u * c1 + 2.0 * e * cd1 * c3 + w * c3) - s3 * s3 * (2.0 * e * cd1 + w),
        ],
    ]
}

/// Central differences of the factored field with step `h`.
pub fn finite_difference_jacobian(t: &Theta3, p: &Params, h: f64) -> Mat3 {
    let mut j = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut plus = *t;
        let mut minus = *t;
        plus.0[col] += h;
        minus.0[col] -= h;
        let fp = factored_field(&plus, p);
        let fm = factored_field(&minus, p);
        for row in 0..3 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

pub fn max_abs_difference(a: &Mat3, b: &Mat3) -> f64 {
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (a[i][j] - b[i][j]).abs()))
        .fold(0.0, f64::max)
}

/// Eigenvalues of a general real 3×3 matrix via the real Schur form,
/// sorted by real part then imaginary part.
pub fn eigenvalues(m: &Mat3) -> Vec<Complex64> {
    let mat = Matrix3::from_fn(|i, j| m[i][j]);
    let mut ev: Vec<Complex64> = mat.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// A corner of the cube `{0, π}³`, one bit per angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubePoint(pub [bool; 3]);

impl CubePoint {
    pub const ORIGIN: CubePoint = CubePoint([false, false, false]);
    pub const A: CubePoint = CubePoint([true, false, false]);
    pub const B: CubePoint = CubePoint([false, true, false]);
    pub const AB: CubePoint = CubePoint([false, false, true]);

    /// The four points with printed eigenvalue formulas.
    pub const TABULATED: [CubePoint; 4] = [Self::ORIGIN, Self::A, Self::B, Self::AB];

    pub fn all() -> [CubePoint; 8] {
        std::array::from_fn(|k| CubePoint([k & 4 != 0, k & 2 != 0, k & 1 != 0]))
    }

    pub fn theta(&self) -> Theta3 {
        Theta3(self.0.map(|b| if b { PI } else { 0.0 }))
    }

    pub fn pi_count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    /// Isotropy label for the tabulated points, coordinates otherwise.
    pub fn label(&self) -> String {
        match *self {
            Self::ORIGIN => "Q8".into(),
            Self::A => "~Q8^a".into(),
            Self::B => "~Q8^b".into(),
            Self::AB => "~Q8^ab".into(),
            _ => self.coordinates(),
        }
    }

    pub fn coordinates(&self) -> String {
        let c: Vec<&str> = self.0.iter().map(|b| if *b { "pi" } else { "0" }).collect();
        format!("({})", c.join(","))
    }

    /// Points with two angles at `π`, one of them shared with `self`.
    ///
    /// Arrival at one of these counts as reaching a conjugate copy of `self`.
    pub fn conjugate_copies(&self) -> Vec<CubePoint> {
        if self.pi_count() != 1 {
            return Vec::new();
        }
        Self::all()
            .into_iter()
            .filter(|p| p.pi_count() == 2 && (0..3).any(|i| p.0[i] && self.0[i]))
            .collect()
    }
}

impl fmt::Display for CubePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The printed eigenvalue formulas at a tabulated point, per axis.
pub fn tabulated_eigenvalues(
    point: CubePoint,
    p: &Params,
) -> Option<([f64; 3], [&'static str; 3])> {
    let plus = p.u + 2.0 * p.epsilon;
    let minus = -p.u + 2.0 * p.epsilon;
    let (vals, text) = match point {
        CubePoint::ORIGIN => ([plus, plus, plus], ["u + 2eps", "u + 2eps", "u + 2eps"]),
        CubePoint::A => (
            [minus, plus, minus + 4.0 * p.q],
            ["-u + 2eps", "u + 2eps", "-u + 2eps + 4q"],
        ),
        CubePoint::B => ([minus, minus, plus], ["-u + 2eps", "-u + 2eps", "u + 2eps"]),
        CubePoint::AB => ([plus, minus, minus], ["u + 2eps", "-u + 2eps", "-u + 2eps"]),
        _ => return None,
    };
    Some((vals, text))
}

/// Diagonal of the Jacobian at any cube point.
pub fn axis_eigenvalues(point: CubePoint, p: &Params) -> [f64; 3] {
    let j = jacobian(&point.theta(), p);
    [j[0][0], j[1][1], j[2][2]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumInfo {
    pub point: CubePoint,
    pub label: String,
    pub location: Theta3,
    pub field_norm: f64,
    pub jacobian: Mat3,
    /// Eigenvalues along the θ₁, θ₂, θ₃ axes.
    pub eigenvalues: [f64; 3],
    pub formulas: [String; 3],
    pub formula_values: [f64; 3],
    pub max_formula_error: f64,
    pub max_offdiagonal: f64,
    pub finite_difference_error: f64,
}

/// The four tabulated equilibria with their linearisations.
pub fn equilibria(p: &Params) -> Vec<EquilibriumInfo> {
    CubePoint::TABULATED
        .into_iter()
        .map(|point| {
            let location = point.theta();
            let f = factored_field(&location, p);
            let j = jacobian(&location, p);
            let eig = [j[0][0], j[1][1], j[2][2]];
            let (vals, text) = tabulated_eigenvalues(point, p).expect("tabulated point");
            let max_offdiagonal = (0..3)
                .flat_map(|r| (0..3).filter(move |c| *c != r).map(move |c| (r, c)))
                .map(|(r, c)| j[r][c].abs())
                .fold(0.0, f64::max);
            EquilibriumInfo {
                point,
                label: point.label(),
                location,
                field_norm: f.iter().map(|v| v * v).sum::<f64>().sqrt(),
                jacobian: j,
                eigenvalues: eig,
                formulas: text.map(String::from),
                formula_values: vals,
                max_formula_error: (0..3).map(|k| (eig[k] - vals[k]).abs()).fold(0.0, f64::max),
                max_offdiagonal,
                finite_difference_error: max_abs_difference(
                    &j,
                    &finite_difference_jacobian(&location, p, 1e-6),
                ),
            }
        })
        .collect()
}

/// `(Xh, K h)` for `h = sin θ_axis`, with `Xh` taken from the expanded field
/// and `K` from the factored one.
pub fn cofactor_terms(axis: usize, t: &Theta3, p: &Params) -> (f64, f64) {
    let [t1, t2, t3] = t.0;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let cd1 = sin_cos(2.0 * t1).1;
    let cd2 = sin_cos(2.0 * t2).1;
    let cd3 = sin_cos(2.0 * t3).1;
    let f = reduced_field(t, p);
    let (h, cos_i, k) = match axis {
        0 => (s1, c1, c1 * (p.u * c2 + 2.0 * p.epsilon * c1 * cd2)),
        1 => (s2, c2, c2 * (p.u * c3 + 2.0 * p.epsilon * c2 * cd3)),
        _ => (
            s3,
            c3,
            c3 * (p.u * c1 + 2.0 * p.epsilon * cd1 * c3 + 2.0 * p.q * (1.0 - c1) * c3),
        ),
    };
    (cos_i * f[axis], k * h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantResidual {
    /// Zero-based angle index of the surface `sin θ = 0`.
    pub axis: usize,
    pub max_drift: f64,
    pub max_cofactor_residual: f64,
    pub steps: usize,
}

/// Integrates from an on-surface start and records the largest `|sin θ_axis|`
/// seen, along with the cofactor identity residual at every step.
pub fn invariant_surface_check(
    axis: usize,
    start: &Theta3,
    p: &Params,
    t_end: f64,
    tol: f64,
) -> Result<InvariantResidual> {
    if axis > 2 {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let h0 = sin_cos(start.0[axis]).0.abs();
    if h0 >= 1e-12 {
        return Err(Error::Precondition(format!(
            "start is not on the surface: |sin theta| = {h0:e}"
        )));
    }
    let traj = integrate3(start, p, t_end, tol)?;
    let mut max_drift = 0.0f64;
    let mut max_res = 0.0f64;
    for k in 0..traj.solution.len() {
        let th = traj.state(k);
        max_drift = max_drift.max(sin_cos(th.0[axis]).0.abs());
        let (xh, kh) = cofactor_terms(axis, &th, p);
        max_res = max_res.max((xh - kh).abs());
    }
    Ok(InvariantResidual {
        axis,
        max_drift,
        max_cofactor_residual: max_res,
        steps: traj.solution.len(),
    })
}

/// A trajectory of the reduced system in the universal cover.
#[derive(Clone, Debug)]
pub struct Trajectory3 {
    pub solution: Solution,
}

impl Trajectory3 {
    pub fn state(&self, k: usize) -> Theta3 {
        let s = self.solution.state(k);
        Theta3([s[0], s[1], s[2]])
    }

    pub fn final_state(&self) -> Theta3 {
        let s = self.solution.final_state();
        Theta3([s[0], s[1], s[2]])
    }

    pub fn eval(&self, t: f64) -> Theta3 {
        let s = self.solution.eval(t);
        Theta3([s[0], s[1], s[2]])
    }

    pub fn t_final(&self) -> f64 {
        self.solution.t_final()
    }

    /// `n + 1` evenly spaced samples, angles reduced to `[0, 2π)`.
    pub fn rows(&self, n: usize) -> Vec<ArcPoint> {
        let t0 = self.solution.times()[0];
        let t1 = self.t_final();
        (0..=n)
            .map(|k| {
                let t = t0 + (t1 - t0) * k as f64 / n.max(1) as f64;
                ArcPoint {
                    t,
                    theta: self.eval(t).canonical(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcPoint {
    pub t: f64,
    pub theta: Theta3,
}

fn system3(p: Params) -> FnSystem<impl Fn(f64, &[f64], &mut [f64])> {
    FnSystem::new(3, move |_t, y: &[f64], dy: &mut [f64]| {
        let f = factored_field(&Theta3([y[0], y[1], y[2]]), &p);
        dy.copy_from_slice(&f);
    })
}

/// Adaptive integration of the factored field over `[0, t_end]`.
pub fn integrate3(start: &Theta3, p: &Params, t_end: f64, tol: f64) -> Result<Trajectory3> {
    integrate3_observed(start, p, t_end, tol, |_, _| Control::Continue)
}

/// As [`integrate3`], calling `observe` after every accepted step.
pub fn integrate3_observed<F>(
    start: &Theta3,
    p: &Params,
    t_end: f64,
    tol: f64,
    mut observe: F,
) -> Result<Trajectory3>
where
    F: FnMut(f64, &Theta3) -> Control,
{
    p.validate()?;
    let sys = system3(*p);
    let opts = Options::with_tol(tol);
    let solution = ode::integrate_observed(&sys, 0.0, &start.0, t_end, &opts, |t, y| {
        observe(t, &Theta3([y[0], y[1], y[2]]))
    })?;
    Ok(Trajectory3 { solution })
}

/// Integrates the time-reversed field.
pub fn integrate3_backward(
    start: &Theta3,
    p: &Params,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory3> {
    p.validate()?;
    let p = *p;
    let sys = FnSystem::new(3, move |_t, y: &[f64], dy: &mut [f64]| {
        let f = factored_field(&Theta3([y[0], y[1], y[2]]), &p);
        for k in 0..3 {
            dy[k] = -f[k];
        }
    });
    let solution = ode::integrate(&sys, 0.0, &start.0, t_end, &Options::with_tol(tol))?;
    Ok(Trajectory3 { solution })
}

/// Shooter settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub delta: f64,
    pub tol: f64,
    pub t_max: f64,
    pub integrator_tol: f64,
    /// Number of intervals in each stored arc.
    pub arc_samples: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            delta: 1e-4,
            tol: 1e-4,
            t_max: 500.0,
            integrator_tol: 1e-10,
            arc_samples: 200,
        }
    }
}

impl ShootOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1e-2) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1e-2], got {}",
                self.delta
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.arc_samples == 0 {
            return Err(Error::InvalidArgument(
                "arc_samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConnectionVerdict {
    /// Reached the target or one of its conjugate copies.
    Connected {
        tol: f64,
    },
    /// Settled near a different equilibrium first.
    Diverted {
        reached: String,
        is_sink: bool,
    },
    Timeout,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionResult {
    pub from: String,
    pub to: String,
    /// Zero-based departure axis.
    pub axis: usize,
    /// `+1` or `-1`.
    pub direction: i8,
    pub seed_offset: f64,
    /// Equilibrium actually approached, if any.
    pub reached: Option<CubePoint>,
    pub reached_label: Option<String>,
    pub via_conjugate_copy: bool,
    pub terminal_distance: f64,
    pub terminal_time: f64,
    pub verdict: ConnectionVerdict,
    pub arc: Vec<ArcPoint>,
}

impl ConnectionResult {
    pub fn is_connected(&self) -> bool {
        matches!(self.verdict, ConnectionVerdict::Connected { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegReport {
    pub from: CubePoint,
    pub to: CubePoint,
    pub from_label: String,
    pub to_label: String,
    pub source_eigenvalues: [f64; 3],
    /// Set when the source has no unstable direction.
    pub precondition_violation: Option<String>,
    pub shots: Vec<ConnectionResult>,
}

impl LegReport {
    pub fn connected(&self) -> bool {
        self.shots.iter().any(ConnectionResult::is_connected)
    }

    /// The connected shot closest to its target.
    pub fn best(&self) -> Option<&ConnectionResult> {
        self.shots
            .iter()
            .filter(|s| s.is_connected())
            .min_by(|a, b| a.terminal_distance.total_cmp(&b.terminal_distance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub params: Params,
    pub options: ShootOptions,
    pub legs: Vec<LegReport>,
}

impl ConnectionReport {
    pub fn all_connected(&self) -> bool {
        self.legs.iter().all(LegReport::connected)
    }
}

/// The three legs of the cycle, in order.
pub const CYCLE: [(CubePoint, CubePoint); 3] = [
    (CubePoint::A, CubePoint::B),
    (CubePoint::B, CubePoint::AB),
    (CubePoint::AB, CubePoint::A),
];

/// Shoots one trajectory from `from + direction·δ·e_axis`.
pub fn shoot(
    p: &Params,
    from: CubePoint,
    to: CubePoint,
    axis: usize,
    direction: i8,
    opts: &ShootOptions,
) -> Result<ConnectionResult> {
    opts.validate()?;
    let mut start = from.theta();
    start.0[axis] += f64::from(direction) * opts.delta;
    let targets: Vec<CubePoint> = std::iter::once(to).chain(to.conjugate_copies()).collect();
    let source = from.theta();
    let mut left_source = false;
    let mut hit: Option<(CubePoint, f64, f64)> = None;
    let mut diverged = false;
    let traj = integrate3_observed(&start, p, opts.t_max, opts.integrator_tol, |t, th| {
        if th.0.iter().any(|v| v.abs() > 1e3) {
            diverged = true;
            return Control::Stop;
        }
        if !left_source && th.distance(&source) > 2.0 * opts.tol {
            left_source = true;
        }
        for c in CubePoint::all() {
            if c == from && !left_source {
                continue;
            }
            let d = th.distance(&c.theta());
            if d < opts.tol {
                hit = Some((c, d, t));
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    let final_state = traj.final_state();
    let (reached, terminal_distance, terminal_time) = match hit {
        Some((c, d, t)) => (Some(c), d, t),
        None => {
            let d = targets
                .iter()
                .map(|c| final_state.distance(&c.theta()))
                .fold(f64::INFINITY, f64::min);
            (None, d, traj.t_final())
        }
    };
    let verdict = match reached {
        _ if diverged => ConnectionVerdict::Diverged,
        Some(c) if targets.contains(&c) => ConnectionVerdict::Connected { tol: opts.tol },
        Some(c) => ConnectionVerdict::Diverted {
            reached: c.label(),
            is_sink: axis_eigenvalues(c, p).iter().all(|v| *v < 0.0),
        },
        None => ConnectionVerdict::Timeout,
    };
    Ok(ConnectionResult {
        from: from.label(),
        to: to.label(),
        axis,
        direction,
        seed_offset: opts.delta,
        reached,
        reached_label: reached.map(|c| c.label()),
        via_conjugate_copy: reached.is_some_and(|c| c != to && targets.contains(&c)),
        terminal_distance,
        terminal_time,
        verdict,
        arc: traj.rows(opts.arc_samples),
    })
}

/// Shoots every unstable axis (both signs) of every cycle node.
pub fn find_connections(p: &Params, opts: &ShootOptions) -> Result<ConnectionReport> {
    opts.validate()?;
    p.validate()?;
    let mut legs = Vec::with_capacity(CYCLE.len());
    for (from, to) in CYCLE {
        let eig = axis_eigenvalues(from, p);
        let unstable: Vec<usize> = (0..3).filter(|k| eig[*k] > 0.0).collect();
        let mut shots = Vec::new();
        let precondition_violation = if unstable.is_empty() {
            Some(format!(
                "{} has no positive eigenvalue ({:?}); it is not a saddle",
                from.label(),
                eig
            ))
        } else {
            for &axis in &unstable {
                for direction in [1i8, -1] {
                    shots.push(shoot(p, from, to, axis, direction, opts)?);
                }
            }
            None
        };
        legs.push(LegReport {
            from,
            to,
            from_label: from.label(),
            to_label: to.label(),
            source_eigenvalues: eig,
            precondition_violation,
            shots,
        });
    }
    Ok(ConnectionReport {
        params: *p,
        options: *opts,
        legs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng) -> Params {
        Params::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn jacobian_at_origin() {
        let p = Params::new(0.7, 0.3, -1.1);
        let j = jacobian(&Theta3::ORIGIN, &p);
        for i in 0..3 {
            for k in 0..3 {
                let expected = if i == k { 0.7 + 0.6 } else { 0.0 };
                assert!((j[i][k] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jacobian_at_a_point() {
        let p = Params::new(1.0, 0.1, -0.15);
        let j = jacobian(&CubePoint::A.theta(), &p);
        let d = [j[0][0], j[1][1], j[2][2]];
        for (v, e) in d.iter().zip([-0.8, 1.2, -1.4]) {
            assert!((v - e).abs() < 1e-14);
        }
        let fd = finite_difference_jacobian(&CubePoint::A.theta(), &p, 1e-6);
        assert!(max_abs_difference(&j, &fd) < 1e-6);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let t = Theta3(std::array::from_fn(|_| rng.gen_range(-7.0..7.0)));
            let err =
                max_abs_difference(&jacobian(&t, &p), &finite_difference_jacobian(&t, &p, 1e-6));
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn tabulated_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            for e in equilibria(&p) {
                assert!(e.field_norm < 1e-14);
                assert!(e.max_formula_error < 1e-12);
                assert_eq!(e.max_offdiagonal, 0.0);
                assert!(e.finite_difference_error < 1e-6);
            }
        }
        let p = Params::new(1.3, 0.2, 0.5);
        let eq = equilibria(&p);
        assert_eq!(eq[2].eigenvalues, [-1.3 + 0.4, -1.3 + 0.4, 1.3 + 0.4]);
        assert_eq!(eq[3].label, "~Q8^ab");
    }

    #[test]
    fn general_eigen_solver() {
        let m = [[2.0, 1.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, -1.0]];
        let ev = eigenvalues(&m);
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        for (a, b) in re.iter().zip([-1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.5]];
        let ev = eigenvalues(&rot);
        assert!(
            ev.iter()
                .filter(|z| (z.im.abs() - 1.0).abs() < 1e-12)
                .count()
                == 2
        );
    }

    #[test]
    fn cube_points() {
        assert_eq!(CubePoint::all().len(), 8);
        let copies = CubePoint::B.conjugate_copies();
        assert_eq!(copies.len(), 2);
        assert!(copies.contains(&CubePoint([true, true, false])));
        assert!(CubePoint::ORIGIN.conjugate_copies().is_empty());
        assert_eq!(CubePoint([true, true, false]).label(), "(pi,pi,0)");
    }

    #[test]
    fn cofactor_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let t = Theta3(std::array::from_fn(|_| rng.gen_range(-7.0..7.0)));
            for axis in 0..3 {
                let (xh, kh) = cofactor_terms(axis, &t, &p);
                assert!((xh - kh).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn surface_drift() {
        let p = Params::new(1.0, 0.1, -0.15);
        let r = invariant_surface_check(1, &Theta3::new(0.3, 0.0, 0.2), &p, 100.0, 1e-12).unwrap();
        assert!(r.max_drift < 1e-9);
        let r = invariant_surface_check(0, &CubePoint::A.theta(), &p, 10.0, 1e-10).unwrap();
        assert_eq!(r.max_drift, 0.0);
        assert!(invariant_surface_check(0, &Theta3::new(0.1, 0.0, 0.0), &p, 1.0, 1e-8).is_err());
    }

    #[test]
    fn equilibrium_is_constant() {
        let p = Params::new(-1.0, 0.1, -1.0);
        let tr = integrate3(&CubePoint::B.theta(), &p, 50.0, 1e-10).unwrap();
        assert!(tr.final_state().distance(&CubePoint::B.theta()) == 0.0);
    }

    #[test]
    fn time_reversal() {
        let p = Params::new(0.6, 0.2, -0.3);
        let start = Theta3::new(0.4, 1.1, -0.7);
        let tol = 1e-10;
        let fwd = integrate3(&start, &p, 3.0, tol).unwrap();
        let back = integrate3_backward(&fwd.final_state(), &p, 3.0, tol).unwrap();
        assert!(back.final_state().distance(&start) < 10.0 * tol * 10.0);
    }

    #[test]
    fn sign_flip_maps_trajectories() {
        let p = Params::new(0.6, 0.2, -0.3);
        let start = Theta3::new(0.4, 1.1, -0.7);
        let neg = Theta3(start.0.map(|v| -v));
        let a = integrate3(&start, &p, 5.0, 1e-11).unwrap().final_state();
        let b = integrate3(&neg, &p, 5.0, 1e-11).unwrap().final_state();
        for k in 0..3 {
            assert!((a.0[k] + b.0[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn plane_stays_invariant() {
        let p = Params::new(1.0, 0.1, -0.15);
        let tr = integrate3(&Theta3::new(0.5, 2.0, 0.0), &p, 40.0, 1e-10).unwrap();
        for k in 0..tr.solution.len() {
            assert_eq!(tr.state(k).0[2], 0.0);
        }
    }

    #[test]
    fn cycle_exists_for_positive_u() {
        let p = Params::new(1.0, 0.1, -0.15);
        let r = find_connections(&p, &ShootOptions::default()).unwrap();
        assert!(
            r.all_connected(),
            "{:#?}",
            r.legs.iter().map(|l| &l.shots).collect::<Vec<_>>()
        );
        for leg in &r.legs {
            let best = leg.best().unwrap();
            assert!(best.terminal_distance < 1e-4);
            assert!(best.via_conjugate_copy);
            assert!(best.arc[0].theta.distance(&leg.from.theta()) <= 1e-4 * (1.0 + 1e-6));
        }
    }

    #[test]
    fn halved_delta_is_robust() {
        let p = Params::new(1.0, 0.1, -0.15);
        let a = find_connections(&p, &ShootOptions::default()).unwrap();
        let b = find_connections(
            &p,
            &ShootOptions {
                delta: 5e-5,
                ..Default::default()
            },
        )
        .unwrap();
        for (la, lb) in a.legs.iter().zip(&b.legs) {
            let da = la.best().unwrap().terminal_distance;
            let db = lb.best().unwrap().terminal_distance;
            assert!(db <= 10.0 * da);
        }
    }

    #[test]
    fn sink_source_is_a_precondition_violation() {
        // u + 2ε < 0 and -u + 2ε < 0 with strongly negative q make ~Q8^a a sink
        let p = Params::new(0.5, -0.5, -2.0);
        let r = find_connections(&p, &ShootOptions::default()).unwrap();
        assert!(r.legs[0].precondition_violation.is_some());
        assert!(!r.all_connected());
    }

    #[test]
    fn negative_u_leg_falls_into_the_origin() {
        let p = Params::new(-1.0, 0.1, -1.0);
        let r = find_connections(&p, &ShootOptions::default()).unwrap();
        let leg = &r.legs[0];
        assert!(!leg.connected());
        for s in &leg.shots {
            assert_eq!(
                s.verdict,
                ConnectionVerdict::Diverted {
                    reached: "Q8".into(),
                    is_sink: true
                }
            );
        }
    }

    #[test]
    fn deterministic() {
        let p = Params::new(1.0, 0.1, -0.15);
        let a = find_connections(&p, &ShootOptions::default()).unwrap();
        let b = find_connections(&p, &ShootOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_options() {
        let p = Params::new(1.0, 0.1, -0.15);
        for delta in [0.0, 0.02, f64::NAN] {
            let o = ShootOptions {
                delta,
                ..Default::default()
            };
            assert!(find_connections(&p, &o).is_err());
        }
    }
}
