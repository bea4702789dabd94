//! Hopf bifurcation on `C²` with the quaternion/dihedral-times-circle action.
//!
//! Linear actions of the generators, the truncated equivariant normal form,
//! the nondegeneracy conditions and the branch classifier.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupTable;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// A point `(z₊, z₋)` of `C²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub z_plus: C,
    pub z_minus: C,
}

impl ComplexPair {
    pub fn new(z_plus: C, z_minus: C) -> Self {
        Self { z_plus, z_minus }
    }

    pub fn is_finite(&self) -> bool {
        self.z_plus.is_finite() && self.z_minus.is_finite()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.z_plus - other.z_plus)
            .norm()
            .max((self.z_minus - other.z_minus).norm())
    }

    pub fn norm(&self) -> f64 {
        (self.z_plus.norm_sqr() + self.z_minus.norm_sqr()).sqrt()
    }

    fn apply(m: &Mat2, z: &Self) -> Self {
        Self {
            z_plus: m[0][0] * z.z_plus + m[0][1] * z.z_minus,
            z_minus: m[1][0] * z.z_plus + m[1][1] * z.z_minus,
        }
    }

    fn scale(&self, s: C) -> Self {
        Self::new(self.z_plus * s, self.z_minus * s)
    }
}

fn mat_mul(p: &Mat2, q: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| p[i][0] * q[0][j] + p[i][1] * q[1][j]))
}

const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

fn omega() -> C {
    C::from_polar(1.0, FRAC_PI_4)
}

/// `a = diag(ω, ω̄)`, `ω = e^{iπ/4}`.
fn mat_a() -> Mat2 {
    [[omega(), ZERO], [ZERO, omega().conj()]]
}

/// `b(z₊, z₋) = (−z₋, z₊)`.
fn mat_b() -> Mat2 {
    [[ZERO, -ONE], [ONE, ZERO]]
}

/// `κ(z₊, z₋) = (z₋, z₊)`.
fn mat_kappa() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

/// `ρ(z₊, z₋) = (i z₊, −i z₋)`.
fn mat_rho() -> Mat2 {
    [[I, ZERO], [ZERO, -I]]
}

/// Linear map of a word in the letters `a`, `b`, `κ` (`k`, `kappa`) and
/// `ρ` (`r`, `rho`), with optional `^n` exponents. `e`, `Id` and `1` denote
/// the identity. The rightmost letter acts first.
pub fn word_matrix(word: &str) -> Result<[[C; 2]; 2]> {
    let w: String = word
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '·' && *c != '*')
        .collect();
    if w.is_empty() || w == "e" || w == "Id" || w == "1" {
        return Ok(IDENTITY);
    }
    let mut m = IDENTITY;
    let mut rest = w.as_str();
    while !rest.is_empty() {
        let (letter, tail) = if let Some(t) = rest.strip_prefix("kappa") {
            (mat_kappa(), t)
        } else if let Some(t) = rest.strip_prefix("rho") {
            (mat_rho(), t)
        } else if let Some(t) = rest.strip_prefix('κ') {
            (mat_kappa(), t)
        } else if let Some(t) = rest.strip_prefix('ρ') {
            (mat_rho(), t)
        } else {
            let mut chars = rest.chars();
            let c = chars.next().expect("non-empty");
            let mat = match c {
                'a' => mat_a(),
                'b' => mat_b(),
                'k' => mat_kappa(),
                'r' => mat_rho(),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown symmetry {c:?} in word {word:?}"
                    )))
                }
            };
            (mat, chars.as_str())
        };
        let (power, tail) = match tail.strip_prefix('^') {
            Some(t) => {
                let digits: String = t.chars().take_while(|c| c.is_ascii_digit()).collect();
                let n = digits.parse::<u32>().map_err(|_| {
                    Error::InvalidArgument(format!("bad exponent in word {word:?}"))
                })?;
                (n, &t[digits.len()..])
            }
            None => (1, tail),
        };
        for _ in 0..power {
            m = mat_mul(&m, &letter);
        }
        rest = tail;
    }
    Ok(m)
}

/// Applies `R_φ ∘ g` to `z`.
pub fn act(word: &str, z: &ComplexPair, phi: f64) -> Result<ComplexPair> {
    let m = word_matrix(word)?;
    Ok(ComplexPair::apply(&m, z).scale(C::from_polar(1.0, phi)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub element: String,
    pub phase: f64,
    pub max_residual: f64,
    pub is_identity: bool,
}

/// Checks which of `(a⁴, π)`, `(ρ², π)` and `(a², π)` act trivially on a
/// deterministic sample of 50 points.
pub fn kernel_check() -> Vec<KernelCheck> {
    let samples: Vec<ComplexPair> = (0..50)
        .map(|k| {
            let t = k as f64;
            ComplexPair::new(
                C::new((0.7 * t).sin() + 0.1, (1.3 * t).cos()),
                C::new((0.4 * t + 1.0).cos(), (0.9 * t).sin() - 0.2),
            )
        })
        .collect();
    [("a^4", PI), ("rho^2", PI), ("a^2", PI)]
        .into_iter()
        .map(|(w, phase)| {
            let max_residual = samples
                .iter()
                .map(|z| act(w, z, phase).expect("known word").distance(z))
                .fold(0.0, f64::max);
            KernelCheck {
                element: w.to_string(),
                phase,
                max_residual,
                is_identity: max_residual < 1e-14,
            }
        })
        .collect()
}

/// Origin values of the invariant functions and the two derivatives of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfCoeffs {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
    pub a_n: C,
    pub a_lambda: C,
}

impl Default for HopfCoeffs {
    fn default() -> Self {
        Self {
            a: ZERO,
            b: ZERO,
            c: ZERO,
            d: ZERO,
            a_n: ZERO,
            a_lambda: ONE,
        }
    }
}

impl HopfCoeffs {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.a_n, self.a_lambda];
        if all.iter().all(|z| z.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("non-finite Hopf coefficient".into()))
        }
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
            a_n: self.a_n * s,
            a_lambda: self.a_lambda * s,
        }
    }
}

/// The truncated equivariant map with `A, B, C, D` frozen at the origin.
pub fn normal_form(z: &ComplexPair, c: &HopfCoeffs) -> ComplexPair {
    let (z1, z2) = (z.z_plus, z.z_minus);
    let (w1, w2) = (z1.conj(), z2.conj());
    ComplexPair {
        z_plus: c.a * z1
            + c.b * z1 * z1 * w1
            + c.c * w1.powu(3) * z2.powu(4)
            + c.d * z1.powu(5) * w2.powu(4),
        z_minus: c.a * z2
            + c.b * z2 * z2 * w2
            + c.c * z1.powu(4) * w2.powu(3)
            + c.d * w1.powu(4) * z2.powu(5),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub label: char,
    pub expression: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub conditions: Vec<Condition>,
}

impl Nondegeneracy {
    pub fn holds(&self, label: char) -> bool {
        self.conditions
            .iter()
            .find(|c| c.label == label)
            .is_some_and(|c| c.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// The five real parts that must be nonzero for a generic bifurcation.
pub fn nondegeneracy(c: &HopfCoeffs) -> Nondegeneracy {
    let rows = [
        ('a', "Re(A_N + B)", (c.a_n + c.b).re),
        ('b', "Re(B)", c.b.re),
        ('c', "Re(2A_N + B)", (2.0 * c.a_n + c.b).re),
        ('d', "Re(B conj(C))", (c.b * c.c.conj()).re),
        ('e', "Re(A_lambda)", c.a_lambda.re),
    ];
    Nondegeneracy {
        conditions: rows
            .into_iter()
            .map(|(label, expr, value)| Condition {
                label,
                expression: expr.to_string(),
                value,
                holds: value != 0.0,
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitType {
    /// `(a, 0)`
    RotatingWave,
    /// `(a, a)`
    Edge,
    /// `(a, e^{iπ/4} a)`
    Vertex,
}

impl OrbitType {
    pub const ALL: [OrbitType; 3] = [OrbitType::RotatingWave, OrbitType::Edge, OrbitType::Vertex];

    pub fn notation(self) -> &'static str {
        match self {
            OrbitType::RotatingWave => "(a,0)",
            OrbitType::Edge => "(a,a)",
            OrbitType::Vertex => "(a,e^{i pi/4}a)",
        }
    }

    /// Name of the branch's isotropy subgroup in the quaternion picture.
    pub fn q8_name(self) -> &'static str {
        match self {
            OrbitType::RotatingWave => "~Z8^a",
            OrbitType::Edge => "~Z8^b",
            OrbitType::Vertex => "~Z8^c",
        }
    }

    pub fn d8_name(self) -> &'static str {
        match self {
            OrbitType::RotatingWave => "Rotating Wave",
            OrbitType::Edge => "Edge Solution",
            OrbitType::Vertex => "Vertex Oscillation",
        }
    }

    /// Label used by the stability theorem for this branch.
    pub fn theorem_name(self) -> &'static str {
        match self {
            OrbitType::RotatingWave => "~Z8",
            OrbitType::Edge => "Z2(kappa)[+Z2^c]",
            OrbitType::Vertex => "Z2(kappa,pi)[+Z2^c] / Z2(kappa,xi)+Z2^c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Super,
    Sub,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSign {
    pub expression: String,
    pub value: f64,
    /// `-1`, `0` or `1`.
    pub sign: i8,
}

impl EigenSign {
    fn new(expression: &str, value: f64) -> Self {
        let sign = if value > 0.0 {
            1
        } else if value < 0.0 {
            -1
        } else {
            0
        };
        Self {
            expression: expression.to_string(),
            value,
            sign,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BranchVerdict {
    Determined {
        criticality: Criticality,
        stable: bool,
    },
    /// Lists the conditions that failed.
    Inconclusive { failed: Vec<char> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub orbit_type: OrbitType,
    pub notation: String,
    pub q8_name: String,
    pub d8_name: String,
    pub theorem_name: String,
    pub verdict: BranchVerdict,
    pub eigen_signs: Vec<EigenSign>,
    /// Leading-order `a²/λ` along the branch, when the radial term is nonzero.
    pub amplitude_sq_per_lambda: Option<f64>,
}

impl BranchReport {
    pub fn is_stable(&self) -> bool {
        matches!(self.verdict, BranchVerdict::Determined { stable: true, .. })
    }

    pub fn criticality(&self) -> Option<Criticality> {
        match self.verdict {
            BranchVerdict::Determined { criticality, .. } => Some(criticality),
            BranchVerdict::Inconclusive { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchClassification {
    pub nondegeneracy: Nondegeneracy,
    pub branches: Vec<BranchReport>,
    pub stable_count: usize,
}

/// Classifies the three generic branches.
///
/// The rotating wave is supercritical iff `Re(A_N + B) > 0` and stable iff in
/// addition `Re(B) < 0`. The two other branches are supercritical iff
/// `Re(2A_N + B) > 0`; they are stable iff that radial quantity is positive
/// and the transverse 2×2 block has negative trace `Re(B)` and positive
/// determinant (`−Re(BC̄)` for the edge, `+Re(BC̄)` for the vertex branch).
pub fn classify_branches(c: &HopfCoeffs) -> BranchClassification {
    let nd = nondegeneracy(c);
    let re_an_b = (c.a_n + c.b).re;
    let re_2an_b = (2.0 * c.a_n + c.b).re;
    let re_b = c.b.re;
    let re_bc = (c.b * c.c.conj()).re;
    let re_al = c.a_lambda.re;

    let branches: Vec<BranchReport> = OrbitType::ALL
        .into_iter()
        .map(|orbit| {
            let (needed, eigen_signs, radial): (&[char], Vec<EigenSign>, f64) = match orbit {
                OrbitType::RotatingWave => (
                    &['a', 'b', 'e'],
                    vec![
                        EigenSign::new("Re(A_N + B)", re_an_b),
                        EigenSign::new("-Re(B)", -re_b),
                        EigenSign::new("-Re(B)", -re_b),
                    ],
                    re_an_b,
                ),
                OrbitType::Edge => (
                    &['b', 'c', 'd', 'e'],
                    vec![
                        EigenSign::new("Re(2A_N + B)", re_2an_b),
                        EigenSign::new("trace = Re(B)", re_b),
                        EigenSign::new("det = -Re(B conj(C))", -re_bc),
                    ],
                    re_2an_b,
                ),
                OrbitType::Vertex => (
                    &['b', 'c', 'd', 'e'],
                    vec![
                        EigenSign::new("Re(2A_N + B)", re_2an_b),
                        EigenSign::new("trace = Re(B)", re_b),
                        EigenSign::new("det = Re(B conj(C))", re_bc),
                    ],
                    re_2an_b,
                ),
            };
            let failed: Vec<char> = needed.iter().copied().filter(|l| !nd.holds(*l)).collect();
            let verdict = if failed.is_empty() {
                let criticality = if radial > 0.0 {
                    Criticality::Super
                } else {
                    Criticality::Sub
                };
                let stable = match orbit {
                    OrbitType::RotatingWave => re_an_b > 0.0 && re_b < 0.0,
                    _ => radial > 0.0 && eigen_signs[1].value < 0.0 && eigen_signs[2].value > 0.0,
                };
                BranchVerdict::Determined {
                    criticality,
                    stable,
                }
            } else {
                BranchVerdict::Inconclusive { failed }
            };
            BranchReport {
                orbit_type: orbit,
                notation: orbit.notation().into(),
                q8_name: orbit.q8_name().into(),
                d8_name: orbit.d8_name().into(),
                theorem_name: orbit.theorem_name().into(),
                verdict,
                eigen_signs,
                amplitude_sq_per_lambda: (radial != 0.0).then(|| -re_al / radial),
            }
        })
        .collect();
    let stable_count = branches.iter().filter(|b| b.is_stable()).count();
    BranchClassification {
        nondegeneracy: nd,
        branches,
        stable_count,
    }
}

/// An element of the finite group paired with a phase, `R_φ ∘ g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedElement {
    pub word: String,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2IsotropyRow {
    pub q8_name: String,
    pub d8_name: String,
    pub fix: String,
    pub complex_dim: usize,
    pub solution_name: String,
    /// Generators of the isotropy subgroup on the dihedral side.
    pub generators: Vec<TwistedElement>,
    pub generators_fix_family: bool,
    pub max_residual: f64,
    /// Elements of the dihedral group (with solved phase) fixing a sample point.
    pub d8_isotropy: Vec<TwistedElement>,
    /// Same scan over the quaternion group of order 16.
    pub q8_isotropy: Vec<TwistedElement>,
    pub notes: Vec<String>,
}

fn d8_words() -> Vec<String> {
    let mut out = Vec::new();
    for k in 0..4 {
        out.push(if k == 0 {
            "e".to_string()
        } else {
            format!("rho^{k}")
        });
    }
    for k in 0..4 {
        out.push(if k == 0 {
            "kappa".to_string()
        } else {
            format!("rho^{k}kappa")
        });
    }
    out
}

/// Phases `φ` with `R_φ g z = z`, or `None`.
fn solve_phase(m: &Mat2, z: &ComplexPair) -> Option<f64> {
    let gz = ComplexPair::apply(m, z);
    let (num, den) = if z.z_plus.norm() >= z.z_minus.norm() {
        (z.z_plus, gz.z_plus)
    } else {
        (z.z_minus, gz.z_minus)
    };
    let phi = if num.norm() == 0.0 {
        0.0
    } else {
        if den.norm() == 0.0 {
            return None;
        }
        (num / den).arg().rem_euclid(TAU)
    };
    let back = gz.scale(C::from_polar(1.0, phi));
    (back.distance(z) < 1e-12 * (1.0 + z.norm())).then_some(phi)
}

fn isotropy_scan(words: &[String], z: &ComplexPair) -> Vec<TwistedElement> {
    words
        .iter()
        .filter_map(|w| {
            let m = word_matrix(w).expect("generated word");
            solve_phase(&m, z).map(|phase| TwistedElement {
                word: w.clone(),
                phase,
            })
        })
        .collect()
}

/// The five rows of the `C²` isotropy table, each verified by direct action
/// and by an exhaustive scan over both finite groups with phases solved per
/// element. `q8` supplies the quaternion element names.
pub fn isotropy_table_c2(q8: &GroupTable) -> Vec<C2IsotropyRow> {
    type Family = fn(C, C) -> ComplexPair;
    let rows: [(
        &str,
        &str,
        &str,
        usize,
        &str,
        Family,
        Vec<(&str, f64)>,
        usize,
    ); 5] = [
        (
            "Q8 x S1",
            "D8 x S1",
            "(0,0)",
            0,
            "Trivial solution",
            |_, _| ComplexPair::new(ZERO, ZERO),
            vec![("rho", 0.0), ("kappa", 0.0), ("e", 1.0)],
            8,
        ),
        (
            "~Z8^a",
            "~Z8(rho)",
            "(z,0)",
            1,
            "Rotating Wave",
            |z, _| ComplexPair::new(z, ZERO),
            vec![("rho", 3.0 * FRAC_PI_2)],
            4,
        ),
        (
            "~Z8^b",
            "~Z2(rho^2) x ~Z2(kappa)",
            "(z,z)",
            1,
            "Edge Solution",
            |z, _| ComplexPair::new(z, z),
            vec![("kappa", 0.0), ("rho^2", PI)],
            4,
        ),
        (
            "~Z8^c",
            "~Z2(rho^2) x ~Z2(rho kappa)",
            "(z,iz)",
            1,
            "Vertex Oscillation",
            |z, _| ComplexPair::new(z, I * z),
            vec![("rho kappa", PI), ("rho^2", PI)],
            4,
        ),
        (
            "~Z2",
            "~Z2(rho^2)",
            "(w,z)",
            2,
            "Submaximal",
            |z, w| ComplexPair::new(w, z),
            vec![("rho^2", PI)],
            2,
        ),
    ];
    let d8 = d8_words();
    let q8_words: Vec<String> = (0..q8.len()).map(|i| q8.name(i)).collect();
    let w_generic = C::new(0.37, 0.11);
    let samples: Vec<C> = [0.5, 1.3]
        .iter()
        .flat_map(|&r| (0..8).map(move |k| C::from_polar(r, k as f64 * FRAC_PI_4 + 0.1)))
        .collect();

    rows.into_iter()
        .map(
            |(q8_name, d8_name, fix, dim, sol, family, gens, expected)| {
                let mut max_residual = 0.0f64;
                for z in &samples {
                    let p = family(*z, w_generic);
                    for (w, phase) in &gens {
                        let r = act(w, &p, *phase).expect("known word").distance(&p);
                        max_residual = max_residual.max(r);
                    }
                }
                let probe = family(samples[3], w_generic);
                let d8_isotropy = isotropy_scan(&d8, &probe);
                let q8_isotropy = isotropy_scan(&q8_words, &probe);
                let mut notes = Vec::new();
                if dim > 0 && d8_isotropy.len() != expected {
                    notes.push(format!(
                        "dihedral scan found {} elements, expected {expected}",
                        d8_isotropy.len()
                    ));
                }
                if dim > 0 && q8_isotropy.len() != d8_isotropy.len() {
                    notes.push(format!(
                        "quaternion scan found {} elements, dihedral scan {}",
                        q8_isotropy.len(),
                        d8_isotropy.len()
                    ));
                }
                C2IsotropyRow {
                    q8_name: q8_name.into(),
                    d8_name: d8_name.into(),
                    fix: fix.into(),
                    complex_dim: dim,
                    solution_name: sol.into(),
                    generators: gens
                        .iter()
                        .map(|(w, p)| TwistedElement {
                            word: (*w).into(),
                            phase: *p,
                        })
                        .collect(),
                    generators_fix_family: max_residual < 1e-12,
                    max_residual,
                    d8_isotropy,
                    q8_isotropy,
                    notes,
                }
            },
        )
        .collect()
}
