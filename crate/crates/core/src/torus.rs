//! Weak-coupling phase dynamics on the 16-torus.
//!
//! Covers the group-times-circle action on phases, the printed catalog of
//! isotropy subgroups with a numerical check of every row, the
//! three-angle coordinates on the `Z₂` fixed-point plane and the reduced
//! vector field in both its expanded and factored forms.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupTable, Perm16, CELLS};

/// Tolerance for circular comparisons of angles.
pub const ANGLE_TOL: f64 = 1e-9;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// `(sin θ, cos θ)` with the argument reduced against the nearest multiple
/// of `π` first, so that `sin` vanishes exactly on every float `kπ`.
#[inline]
pub fn sin_cos(theta: f64) -> (f64, f64) {
    let k = (theta / PI).round();
    let r = theta - k * PI;
    let (s, c) = r.sin_cos();
    if k.rem_euclid(2.0) == 0.0 {
        (s, c)
    } else {
        (-s, -c)
    }
}

/// A point of the 16-torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase16(pub [f64; CELLS]);

impl Phase16 {
    pub fn zero() -> Self {
        Phase16([0.0; CELLS])
    }

    /// Every component reduced to `[0, 2π)`.
    pub fn canonical(&self) -> Self {
        Phase16(self.0.map(wrap))
    }

    /// Largest componentwise circular distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| circular_distance(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// Adds `theta` to every phase.
pub fn phase_shift(p: &Phase16, theta: f64) -> Phase16 {
    Phase16(p.0.map(|v| wrap(v + theta)))
}

/// Moves cell `i`'s phase to cell `g(i)`, then shifts everything by `theta`.
pub fn group_phase_action(g: &Perm16, theta: f64, p: &Phase16) -> Phase16 {
    let mut out = [0.0; CELLS];
    for (i, &v) in p.0.iter().enumerate() {
        out[g.apply(i)] = v;
    }
    phase_shift(&Phase16(out), theta)
}

/// One component of a family: `constant (+ parameter)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineAngle {
    pub constant: f64,
    /// Zero-based index of the free parameter, if any.
    pub param: Option<usize>,
}

impl AffineAngle {
    pub fn eval(&self, params: &[f64]) -> f64 {
        self.constant + self.param.map_or(0.0, |k| params[k])
    }

    /// Parses `0`, `pi`, `7pi/4`, `phi`, `phi2`, `phi+3pi/4`, `phi1+pi`.
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("bad angle expression {text:?}"));
        let (param_part, const_part) = if let Some(rest) = s.strip_prefix("phi") {
            let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
            let idx = if digits.is_empty() {
                0
            } else {
                digits
                    .parse::<usize>()
                    .map_err(|_| bad())?
                    .checked_sub(1)
                    .ok_or_else(bad)?
            };
            let tail = &rest[digits.len()..];
            let tail = if tail.is_empty() {
                "0"
            } else {
                tail.strip_prefix('+').ok_or_else(bad)?
            };
            (Some(idx), tail.to_string())
        } else {
            (None, s.clone())
        };
        let constant = parse_pi_multiple(&const_part).ok_or_else(bad)?;
        Ok(Self {
            constant,
            param: param_part,
        })
    }
}

fn parse_pi_multiple(s: &str) -> Option<f64> {
    if s == "0" {
        return Some(0.0);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coeff = num.strip_suffix("pi")?;
    let coeff = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().ok()?
    };
    Some(coeff * PI / den)
}

impl fmt::Display for AffineAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = format_pi_multiple(self.constant);
        match (self.param, c.as_str()) {
            (None, _) => f.write_str(&c),
            (Some(k), "0") => write!(f, "phi{}", k + 1),
            (Some(k), _) => write!(f, "phi{}+{}", k + 1, c),
        }
    }
}

/// Prints multiples of `π/4` symbolically, anything else as a decimal.
pub fn format_pi_multiple(x: f64) -> String {
    let x = wrap(x);
    let quarters = x / (PI / 4.0);
    let q = quarters.round();
    if (quarters - q).abs() > 1e-9 {
        return format!("{x:.6}");
    }
    let q = (q as i64).rem_euclid(8);
    match q {
        0 => "0".into(),
        4 => "pi".into(),
        2 => "pi/2".into(),
        6 => "3pi/2".into(),
        1 => "pi/4".into(),
        _ => format!("{q}pi/4"),
    }
}

/// A parameterised set of phase points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub components: Vec<AffineAngle>,
}

impl Family {
    pub fn parse(text: &str) -> Result<Self> {
        let components = text
            .split(',')
            .map(AffineAngle::parse)
            .collect::<Result<Vec<_>>>()?;
        if components.len() != CELLS {
            return Err(Error::Parse(format!(
                "family has {} components, expected {CELLS}",
                components.len()
            )));
        }
        Ok(Self { components })
    }

    /// Number of distinct free parameters.
    pub fn free_parameters(&self) -> usize {
        self.components
            .iter()
            .filter_map(|c| c.param)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn point(&self, params: &[f64]) -> Phase16 {
        Phase16(std::array::from_fn(|i| {
            wrap(self.components[i].eval(params))
        }))
    }

    /// Canonical text used for literal row comparison.
    pub fn text(&self) -> String {
        self.components
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A generator of an isotropy subgroup: a group element and a phase shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGenerator {
    pub word: String,
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyEntry {
    /// One-based row number in the printed catalog.
    pub row: usize,
    pub name: String,
    pub generators: Vec<PhaseGenerator>,
    pub family: Family,
    /// Dimension as printed.
    pub dim: usize,
}

/// Rows as printed: name, fixed-point family, generators, dimension.
const PRINTED_ISOTROPY_ROWS: [(&str, &str, &[(&str, &str)], usize); 15] = [
    ("Q8", "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0", &[("a", "0"), ("b", "0")], 0),
    ("Q8^a", "0,0,0,0,0,0,0,0,pi,pi,pi,pi,pi,pi,pi,pi", &[("b", "pi"), ("ab", "pi")], 0),
    ("Q8^b", "0,pi,0,pi,0,pi,0,pi,0,pi,0,pi,0,pi,0,pi", &[("a", "pi"), ("ab", "pi")], 0),
    ("Q8^ab", "0,pi,0,pi,0,pi,0,pi,0,pi,0,pi,0,pi,0,pi", &[("a", "pi"), ("b", "pi")], 0),
    ("Z8^a", "0,0,0,0,0,0,0,0,phi,phi,phi,phi,phi,phi,phi,phi", &[("a", "0")], 1),
    ("Z8^b", "0,phi,0,phi,0,phi,0,phi,0,phi,0,phi,0,phi,0,phi", &[("b", "0")], 1),
    ("Z8^ab", "0,phi,0,phi,0,phi,0,phi,phi,phi,0,phi,0,phi,0,phi", &[("ab", "0")], 1),
    (
        "Z8^a",
        "0,pi,0,pi,0,pi,0,pi,phi,phi+pi,phi,phi+pi,phi,phi+pi,phi,phi+pi",
        &[("a", "pi")],
        1,
    ),
    (
        "Z8^b",
        "0,phi,0,phi,0,phi,0,phi,phi,phi+pi,phi,phi+pi,phi,phi+pi,phi,phi+pi",
        &[("b", "pi")],
        1,
    ),
    (
        "Z8^ab",
        "0,phi,0,phi,0,phi,0,phi,phi,phi+pi,phi,phi+pi,phi,phi+pi,phi,phi+pi",
        &[("ab", "pi")],
        1,
    ),
    (
        "~Z8^{a/4}",
        "0,7pi/4,3pi/2,5pi/4,pi,3pi/4,pi/2,pi/4,phi,phi+pi/4,phi+pi/2,phi+3pi/4,phi+pi,phi+5pi/4,phi+3pi/2,phi+7pi/4",
        &[("a", "pi/4")],
        1,
    ),
    (
        "~Z8^{b/4}",
        "0,phi,pi,phi+pi,phi+7pi/4,7pi/4,phi+3pi/2,3pi/2,phi+5pi/4,phi,phi+3pi/4,phi,phi+pi/2,phi,phi+pi/4,pi/4",
        &[("b", "pi/4")],
        1,
    ),
    (
        "~Z8^{ab/4}",
        "0,phi,pi,phi+pi,pi/4,phi+pi/4,pi/2,phi+pi/2,3pi/4,phi+3pi/4,3pi/4,phi+3pi/4,5pi/4,phi+5pi/4,7pi/4,phi+7pi/4",
        &[("ab", "pi/4")],
        1,
    ),
    (
        "Z2",
        "0,phi1,0,phi1,0,phi1,0,phi1,phi2,phi3,phi2,phi3,phi2,phi3,phi2,phi3",
        &[("b^2", "0")],
        3,
    ),
    (
        "Z2",
        "0,phi1,pi,phi1+pi,0,phi1,pi,phi1+pi,phi2,phi3,phi2+pi,phi3+pi,phi2,phi3,phi2+pi,phi3+pi",
        &[("b^2", "pi")],
        3,
    ),
];

/// The printed isotropy rows, parsed.
pub fn printed_isotropy_entries() -> Vec<IsotropyEntry> {
    PRINTED_ISOTROPY_ROWS
        .iter()
        .enumerate()
        .map(|(i, (name, family, gens, dim))| IsotropyEntry {
            row: i + 1,
            name: (*name).to_string(),
            generators: gens
                .iter()
                .map(|(w, s)| PhaseGenerator {
                    word: (*w).to_string(),
                    shift: parse_pi_multiple(s).expect("printed shift"),
                })
                .collect(),
            family: Family::parse(family).expect("printed family"),
            dim: *dim,
        })
        .collect()
}

/// Parameter samples `{kπ/4 + 0.1 : k = 0..7}` per free parameter.
pub fn sample_grid(dim: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..8).map(|k| k as f64 * PI / 4.0 + 0.1).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowVerdict {
    Verified,
    Failed {
        /// Generator words that moved at least one sample.
        failing_generators: Vec<String>,
        /// Up to five offending parameter samples.
        samples: Vec<Vec<f64>>,
        worst_distance: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub row: usize,
    pub name: String,
    pub printed_family: String,
    pub printed_dim: usize,
    pub free_parameters: usize,
    pub verdict: RowVerdict,
    /// Full fixed-point set of the generators, normalised so cell 1 has
    /// phase 0; `None` when the row verified or no fixed point exists.
    pub corrected_family: Option<String>,
    pub corrected_dim: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub rows: Vec<RowReport>,
    /// Pairs of rows (one-based) whose printed fixed-point families coincide.
    pub duplicate_families: Vec<(usize, usize)>,
    /// Pairs of rows sharing a printed name.
    pub duplicate_names: Vec<(usize, usize)>,
}

impl CatalogReport {
    pub fn failed_rows(&self) -> impl Iterator<Item = &RowReport> {
        self.rows
            .iter()
            .filter(|r| matches!(r.verdict, RowVerdict::Failed { .. }))
    }
}

/// Verifies every printed row against the action of `group`.
pub fn isotropy_catalog(group: &GroupTable) -> Result<(Vec<IsotropyEntry>, CatalogReport)> {
    let entries = printed_isotropy_entries();
    let mut rows = Vec::with_capacity(entries.len());
    for e in &entries {
        rows.push(verify_entry(group, e)?);
    }
    let mut duplicate_families = Vec::new();
    let mut duplicate_names = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if entries[i].family == entries[j].family {
                duplicate_families.push((entries[i].row, entries[j].row));
            }
            if entries[i].name == entries[j].name {
                duplicate_names.push((entries[i].row, entries[j].row));
            }
        }
    }
    for (i, j) in &duplicate_families {
        for r in rows.iter_mut().filter(|r| r.row == *i || r.row == *j) {
            let other = if r.row == *i { j } else { i };
            r.notes.push(format!(
                "printed fixed-point family identical to row {other}"
            ));
        }
    }
    Ok((
        entries,
        CatalogReport {
            rows,
            duplicate_families,
            duplicate_names,
        },
    ))
}

fn resolve_generators(group: &GroupTable, e: &IsotropyEntry) -> Result<Vec<(Perm16, f64, String)>> {
    e.generators
        .iter()
        .map(|g| {
            let idx = group.lookup(&g.word)?;
            Ok((*group.element(idx), g.shift, g.word.clone()))
        })
        .collect()
}

fn verify_entry(group: &GroupTable, e: &IsotropyEntry) -> Result<RowReport> {
    let gens = resolve_generators(group, e)?;
    let free = e.family.free_parameters();
    let mut failing = Vec::new();
    let mut samples = Vec::new();
    let mut worst = 0.0f64;
    for params in sample_grid(free) {
        let p = e.family.point(&params);
        let mut bad = false;
        for (g, shift, word) in &gens {
            let d = group_phase_action(g, *shift, &p).distance(&p);
            if d > ANGLE_TOL {
                bad = true;
                worst = worst.max(d);
                if !failing.contains(word) {
                    failing.push(word.clone());
                }
            }
        }
        if bad && samples.len() < 5 {
            samples.push(params);
        }
    }
    let mut notes = Vec::new();
    if free != e.dim {
        notes.push(format!(
            "printed dimension {} but the family has {free} free parameters",
            e.dim
        ));
    }
    let verdict = if failing.is_empty() {
        RowVerdict::Verified
    } else {
        RowVerdict::Failed {
            failing_generators: failing,
            samples,
            worst_distance: worst,
        }
    };
    let (corrected_family, corrected_dim) = match verdict {
        RowVerdict::Verified => (None, None),
        RowVerdict::Failed { .. } => {
            let pairs: Vec<(Perm16, f64)> = gens.iter().map(|(g, s, _)| (*g, *s)).collect();
            match solve_fixed_family(&pairs) {
                Some(f) => {
                    let d = f.free_parameters();
                    if d != e.dim {
                        notes.push(format!(
                            "fixed-point set of the listed generators has dimension {d} \
                             (modulo the diagonal phase)"
                        ));
                    }
                    (Some(f.text()), Some(d))
                }
                None => {
                    notes.push("listed generators have no common fixed point".into());
                    (None, None)
                }
            }
        }
    };
    Ok(RowReport {
        row: e.row,
        name: e.name.clone(),
        printed_family: e.family.text(),
        printed_dim: e.dim,
        free_parameters: free,
        verdict,
        corrected_family,
        corrected_dim,
        notes,
    })
}

/// Solves `φ_{g(i)} = φ_i + ψ` for every generator `(g, ψ)`.
///
/// The solution is a union of orbit-wise offsets: the orbit of cell 1 is
/// pinned to phase 0 and every other orbit gets one free parameter.
/// Returns `None` when the constraints are inconsistent around some cycle.
pub fn solve_fixed_family(generators: &[(Perm16, f64)]) -> Option<Family> {
    let mut offset: [Option<f64>; CELLS] = [None; CELLS];
    let mut param: [Option<usize>; CELLS] = [None; CELLS];
    let mut next_param = 0usize;
    for root in 0..CELLS {
        if offset[root].is_some() {
            continue;
        }
        let root_param = if root == 0 {
            None
        } else {
            next_param += 1;
            Some(next_param - 1)
        };
        offset[root] = Some(0.0);
        param[root] = root_param;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let oi = offset[i].expect("visited");
            for (g, shift) in generators {
                let forward = (g.apply(i), oi + shift);
                let backward = (g.inverse().apply(i), oi - shift);
                for (j, oj) in [forward, backward] {
                    match offset[j] {
                        None => {
                            offset[j] = Some(wrap(oj));
                            param[j] = root_param;
                            queue.push_back(j);
                        }
                        Some(existing) => {
                            if circular_distance(existing, oj) > ANGLE_TOL {
                                return None;
                            }
                        }
                    }
                }
            }
        }
    }
    Some(Family {
        components: (0..CELLS)
            .map(|i| AffineAngle {
                constant: offset[i].expect("all cells visited"),
                param: param[i],
            })
            .collect(),
    })
}

/// A point of the `Z₂` fixed-point plane in `(θ₁, θ₂, θ₃)` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta3(pub [f64; 3]);

impl Theta3 {
    pub const ORIGIN: Theta3 = Theta3([0.0; 3]);

    pub fn new(t1: f64, t2: f64, t3: f64) -> Self {
        Theta3([t1, t2, t3])
    }

    /// Representative in `[0, 2π)³`.
    pub fn canonical(&self) -> Self {
        Theta3(self.0.map(wrap))
    }

    /// Largest componentwise circular distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| circular_distance(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// Coefficients `(u, ε, q)` of the reduced field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub u: f64,
    pub epsilon: f64,
    pub q: f64,
}

impl Params {
    pub fn new(u: f64, epsilon: f64, q: f64) -> Self {
        Self { u, epsilon, q }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.u, self.epsilon, self.q].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "non-finite parameters {self:?}"
            )))
        }
    }
}

/// Basis vectors of the three-angle plane, as printed (with the `-1/8`).
pub fn basis() -> [[f64; CELLS]; 3] {
    let s = -1.0 / 8.0;
    let half = |i: usize| if i < 8 { 1.0 } else { -1.0 };
    let parity = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    [
        std::array::from_fn(|i| s * half(i)),
        std::array::from_fn(|i| s * parity(i)),
        std::array::from_fn(|i| s * parity(i) * half(i)),
    ]
}

/// `Σ θₙ eₙ` before reduction.
pub fn embed_unreduced(t: &Theta3) -> [f64; CELLS] {
    let e = basis();
    std::array::from_fn(|i| (0..3).map(|n| t.0[n] * e[n][i]).sum())
}

/// `Σ θₙ eₙ`, reduced mod 2π.
pub fn embed(t: &Theta3) -> Phase16 {
    Phase16(embed_unreduced(t).map(wrap))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub theta: Theta3,
    /// Euclidean distance from the lifted point to the plane.
    pub residual: f64,
}

/// Least-squares coordinates of `p` in the plane, lifting each phase to the
/// branch nearest `embed(reference)`.
pub fn project(p: &Phase16, reference: &Theta3) -> Projection {
    let r = embed_unreduced(reference);
    let lifted: [f64; CELLS] = std::array::from_fn(|i| {
        let k = ((r[i] - p.0[i]) / TAU).round();
        p.0[i] + k * TAU
    });
    let e = basis();
    // The basis is orthogonal with |eₙ|² = 1/4.
    let theta: [f64; 3] = std::array::from_fn(|n| {
        let dot: f64 = (0..CELLS).map(|i| lifted[i] * e[n][i]).sum();
        dot / (0..CELLS).map(|i| e[n][i] * e[n][i]).sum::<f64>()
    });
    let recon = embed_unreduced(&Theta3(theta));
    let residual = (0..CELLS)
        .map(|i| (lifted[i] - recon[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    Projection {
        theta: Theta3(theta),
        residual,
    }
}

/// The reduced field in its expanded form,
/// `θ̇₁ = u sin θ₁ cos θ₂ + ε sin 2θ₁ cos 2θ₂` and cyclically, with the extra
/// `q (1 − cos θ₁) sin 2θ₃` in the third component.
pub fn reduced_field(t: &Theta3, p: &Params) -> [f64; 3] {
    let [t1, t2, t3] = t.0;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let (s21, c21) = sin_cos(2.0 * t1);
    let (s22, c22) = sin_cos(2.0 * t2);
    let (s23, c23) = sin_cos(2.0 * t3);
    [
        p.u * s1 * c2 + p.epsilon * s21 * c22,
        p.u * s2 * c3 + p.epsilon * s22 * c23,
        p.u * s3 * c1 + p.epsilon * s23 * c21 + p.q * (1.0 - c1) * s23,
    ]
}

/// The same field with `sin θᵢ` factored out of component `i`.
pub fn factored_field(t: &Theta3, p: &Params) -> [f64; 3] {
    let [t1, t2, t3] = t.0;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let c21 = sin_cos(2.0 * t1).1;
    let c22 = sin_cos(2.0 * t2).1;
    let c23 = sin_cos(2.0 * t3).1;
    [
        s1 * (p.u * c2 + 2.0 * p.epsilon * c1 * c22),
        s2 * (p.u * c3 + 2.0 * p.epsilon * c2 * c23),
        s3 * (p.u * c1 + 2.0 * p.epsilon * c21 * c3 + 2.0 * p.q * (1.0 - c1) * c3),
    ]
}

/// Which printed form of the reduced field to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldForm {
    Expanded,
    Factored,
}

pub fn field(form: FieldForm, t: &Theta3, p: &Params) -> [f64; 3] {
    match form {
        FieldForm::Expanded => reduced_field(t, p),
        FieldForm::Factored => factored_field(t, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::q8_group;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phase_shift_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Phase16(std::array::from_fn(|_| rng.gen_range(0.0..TAU)));
        assert!(phase_shift(&p, 0.0).distance(&p) < 1e-15);
        assert!(phase_shift(&p, TAU).distance(&p) < 1e-12);
        assert!(phase_shift(&phase_shift(&p, PI), PI).distance(&p) < 1e-12);
    }

    #[test]
    fn identity_action() {
        let p = Phase16(std::array::from_fn(|i| 0.3 * i as f64));
        let q = group_phase_action(&Perm16::identity(), 0.0, &p);
        assert!(q.distance(&p) < 1e-15);
    }

    #[test]
    fn sin_cos_exact_on_pi_multiples() {
        assert_eq!(sin_cos(PI).0, 0.0);
        assert_eq!(sin_cos(-PI).0, 0.0);
        assert_eq!(sin_cos(2.0 * PI).0, 0.0);
        assert_eq!(sin_cos(PI).1, -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = rng.gen_range(-20.0..20.0);
            let (s, c) = sin_cos(x);
            assert!((s - x.sin()).abs() < 1e-14 && (c - x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(AffineAngle::parse("0").unwrap().constant, 0.0);
        assert!((AffineAngle::parse("7pi/4").unwrap().constant - 7.0 * PI / 4.0).abs() < 1e-15);
        let a = AffineAngle::parse("phi2+pi").unwrap();
        assert_eq!(a.param, Some(1));
        assert!((a.constant - PI).abs() < 1e-15);
        assert_eq!(AffineAngle::parse("phi").unwrap().param, Some(0));
        assert!(AffineAngle::parse("psi").is_err());
        assert_eq!(a.to_string(), "phi2+pi");
    }

    #[test]
    fn catalog_rows() {
        let t = q8_group().unwrap();
        let (entries, report) = isotropy_catalog(&t).unwrap();
        assert_eq!(entries.len(), 15);
        let q8 = &report.rows[0];
        assert_eq!(q8.verdict, RowVerdict::Verified);
        assert!(report.duplicate_families.contains(&(3, 4)));
        assert_eq!(report.rows[2].verdict, RowVerdict::Verified);
        assert_eq!(report.rows[5].verdict, RowVerdict::Verified);
        assert!(report.duplicate_names.contains(&(14, 15)));
        let (_, again) = isotropy_catalog(&t).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn z8a_row_is_not_fixed_by_a() {
        // a's first 8-cycle joins cells 1-4 with cells 9-12, so a constant
        // phase on each cycle is 0 on cells 1-4, 9-12 and φ elsewhere
        let t = q8_group().unwrap();
        let (_, report) = isotropy_catalog(&t).unwrap();
        let row = &report.rows[4];
        assert!(matches!(row.verdict, RowVerdict::Failed { .. }));
        assert_eq!(
            row.corrected_family.as_deref(),
            Some("0, 0, 0, 0, phi1, phi1, phi1, phi1, 0, 0, 0, 0, phi1, phi1, phi1, phi1")
        );
        let a = *t.a();
        let fam = Family::parse(row.corrected_family.as_ref().unwrap()).unwrap();
        let p = fam.point(&[1.3]);
        assert!(group_phase_action(&a, 0.0, &p).distance(&p) < 1e-12);
    }

    #[test]
    fn z2_row_is_not_fixed_by_b_squared() {
        // b² swaps cell i with cell i + 8, which the printed family does not
        // respect (cell 1 has phase 0, cell 9 has phase φ₂).
        let t = q8_group().unwrap();
        let (_, report) = isotropy_catalog(&t).unwrap();
        let z2 = &report.rows[13];
        assert!(matches!(z2.verdict, RowVerdict::Failed { .. }));
        assert_eq!(z2.corrected_dim, Some(7));
        let b2 = *t.element(t.lookup("b^2").unwrap());
        let fam = Family::parse(z2.corrected_family.as_ref().unwrap()).unwrap();
        for params in [vec![0.1; 7], (0..7).map(|k| 0.3 * k as f64).collect()] {
            let p = fam.point(&params);
            assert!(group_phase_action(&b2, 0.0, &p).distance(&p) < 1e-12);
        }
    }

    #[test]
    fn z2_family_point_under_b_squared() {
        let t = q8_group().unwrap();
        let b2 = *t.element(t.lookup("b^2").unwrap());
        let entries = printed_isotropy_entries();
        let p = entries[13].family.point(&[0.4, 0.4, 0.4]);
        // fixed only on the slice φ₂ = 0, φ₁ = φ₃
        assert!(group_phase_action(&b2, 0.0, &p).distance(&p) > 0.1);
        let p = entries[13].family.point(&[0.4, 0.0, 0.4]);
        assert!(group_phase_action(&b2, 0.0, &p).distance(&p) < 1e-12);
    }

    #[test]
    fn solver_reports_inconsistency() {
        let t = q8_group().unwrap();
        // (a, π/3): an 8-cycle needs 8·π/3 ≡ 0 mod 2π, which fails
        assert!(solve_fixed_family(&[(*t.a(), PI / 3.0)]).is_none());
        let fam = solve_fixed_family(&[(*t.a(), PI / 4.0)]).unwrap();
        assert_eq!(fam.free_parameters(), 1);
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&Theta3::ORIGIN), Phase16::zero());
        let p = embed_unreduced(&Theta3::new(0.8, 0.0, 0.0));
        for (i, v) in p.iter().enumerate() {
            let expected = if i < 8 { -0.1 } else { 0.1 };
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn embed_project_roundtrip() {
        let t = Theta3::new(1.0, 0.5, -0.2);
        let pr = project(&embed(&t), &Theta3::ORIGIN);
        assert!(pr.residual < 1e-12);
        for n in 0..3 {
            assert!((pr.theta.0[n] - t.0[n]).abs() < 1e-12);
        }
        let pr = project(&embed(&Theta3::new(2.0, 0.0, 0.0)), &Theta3::ORIGIN);
        assert!((pr.theta.0[0] - 2.0).abs() < 1e-12);
        assert!(pr.theta.0[1].abs() < 1e-12 && pr.theta.0[2].abs() < 1e-12);
    }

    #[test]
    fn projection_residual_off_plane() {
        // add a vector orthogonal to e1, e2, e3 and to the diagonal
        let e = basis();
        let mut off = [0.0; CELLS];
        off[0] = 0.01;
        off[2] = -0.01;
        for n in 0..3 {
            let dot: f64 = (0..CELLS).map(|i| off[i] * e[n][i]).sum();
            assert!(dot.abs() < 1e-15);
        }
        let base = embed_unreduced(&Theta3::new(0.3, 0.2, 0.1));
        let p = Phase16(std::array::from_fn(|i| wrap(base[i] + off[i])));
        let pr = project(&p, &Theta3::ORIGIN);
        let expected = (2.0f64 * 0.01 * 0.01).sqrt();
        assert!((pr.residual - expected).abs() < 1e-12);
    }

    #[test]
    fn field_examples() {
        let p = Params::new(1.3, 0.2, -0.4);
        assert_eq!(reduced_field(&Theta3::ORIGIN, &p), [0.0; 3]);
        assert_eq!(reduced_field(&Theta3::new(PI, 0.0, 0.0), &p), [0.0; 3]);
        assert_eq!(
            factored_field(&Theta3::ORIGIN, &Params::new(1.0, 0.1, 0.0)),
            [0.0; 3]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = Theta3::new(0.0, rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0));
            assert_eq!(factored_field(&t, &p)[0], 0.0);
        }
    }

    #[test]
    fn forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let t = Theta3(std::array::from_fn(|_| rng.gen_range(-7.0..7.0)));
            let p = Params::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let a = reduced_field(&t, &p);
            let b = factored_field(&t, &p);
            for n in 0..3 {
                assert!((a[n] - b[n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_under_simultaneous_sign_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t = Theta3(std::array::from_fn(|_| rng.gen_range(-4.0..4.0)));
            let neg = Theta3(t.0.map(|v| -v));
            let p = Params::new(0.7, -0.3, 1.1);
            let a = reduced_field(&t, &p);
            let b = reduced_field(&neg, &p);
            for n in 0..3 {
                assert!((a[n] + b[n]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn theta_canonical_and_distance() {
        let t = Theta3::new(-0.1, 7.0, PI);
        let c = t.canonical();
        assert!(c.0.iter().all(|v| (0.0..TAU).contains(v)));
        assert!(t.distance(&c) < 1e-12);
        assert!(
            (Theta3::new(0.1, 0.0, 0.0).distance(&Theta3::new(TAU - 0.1, 0.0, 0.0)) - 0.2).abs()
                < 1e-12
        );
    }
}
