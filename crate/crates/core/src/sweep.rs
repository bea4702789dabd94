//! Parameter sweeps over `(u, q)` at fixed `ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{find_connections, ShootOptions};
use crate::error::{Error, Result};
use crate::stability::{classify, rho_km, rho_paper, split_eigenvalues, StabilityClass};
use crate::torus::Params;

/// Largest grid a sweep accepts.
pub const MAX_POINTS: usize = 1_000_000;

/// `n` evenly spaced values from `start` to `end` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Range {
    /// Parses `start:end:n`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidArgument(format!("range {text:?} is not start:end:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let r = Self { start, end, n };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("range is empty".into()));
        }
        if !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidArgument("range bounds must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.n == 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * k as f64 / (self.n - 1) as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub u: Range,
    pub q: Range,
    pub epsilon: f64,
    /// Run the connection shooter at every point.
    pub shoot: bool,
    pub shoot_options: ShootOptions,
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub u: f64,
    pub epsilon: f64,
    pub q: f64,
    pub class: String,
    pub rho_km: Option<f64>,
    pub rho_paper_printed: Option<f64>,
    pub rho_paper_abs: Option<f64>,
    pub connected: Option<bool>,
    pub notes: String,
}

/// Evaluates one grid point. Errors are folded into the row.
pub fn evaluate_point(p: &Params, shoot: bool, opts: &ShootOptions) -> SweepRow {
    let mut notes = Vec::new();
    let class = classify(p);
    notes.extend(class.notes.iter().cloned());
    let (printed, abs) = match rho_paper(p) {
        Ok(r) => (Some(r.rho), Some(r.rho_abs)),
        Err(e) => {
            notes.push(format!("closed-form rho: {e}"));
            (None, None)
        }
    };
    let mut row = SweepRow {
        u: p.u,
        epsilon: p.epsilon,
        q: p.q,
        class: class.class.as_str().to_string(),
        rho_km: None,
        rho_paper_printed: printed,
        rho_paper_abs: abs,
        connected: None,
        notes: String::new(),
    };
    if shoot {
        match find_connections(p, opts) {
            Ok(report) => {
                let connected = report.all_connected();
                row.connected = Some(connected);
                if connected {
                    match split_eigenvalues(&report).and_then(|s| rho_km(&s).map(|r| (s, r))) {
                        Ok((splits, r)) => {
                            row.rho_km = Some(r.rho);
                            let transverse_contracting = splits.iter().all(|s| s.t < 0.0);
                            if class.class == StabilityClass::AsymptoticallyStable
                                && transverse_contracting
                                && r.rho <= 1.0
                            {
                                notes.push(format!(
                                    "cross-check counterexample: predicate says asymptotically \
                                     stable but rho = {}",
                                    r.rho
                                ));
                            }
                        }
                        Err(e) => notes.push(format!("rho: {e}")),
                    }
                }
            }
            Err(e) => {
                row.class = "Error".into();
                notes.push(e.to_string());
            }
        }
    }
    row.notes = notes.join("; ");
    row
}

/// Row-major over `(u, q)`: `u` outer, `q` inner.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.u.validate()?;
    spec.q.validate()?;
    if !spec.epsilon.is_finite() {
        return Err(Error::InvalidArgument("epsilon must be finite".into()));
    }
    if spec.shoot {
        spec.shoot_options.validate()?;
    }
    let total = spec
        .u
        .n
        .checked_mul(spec.q.n)
        .filter(|t| *t <= MAX_POINTS)
        .ok_or_else(|| Error::InvalidArgument(format!("grid exceeds {MAX_POINTS} points")))?;
    Ok((0..total)
        .into_par_iter()
        .map(|k| {
            let p = Params::new(
                spec.u.value(k / spec.q.n),
                spec.epsilon,
                spec.q.value(k % spec.q.n),
            );
            evaluate_point(&p, spec.shoot, &spec.shoot_options)
        })
        .collect())
}
