use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Grid2D, InteractionSpec, PotentialSpec, ScaledInteraction, VectorPotentialSpec};

/// Outcome of one standing-assumption check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail list for the trap, magnetic, interaction and resolution checks.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Turn a failed report into an error naming the first failing check.
    pub fn into_result(self) -> Result<Self> {
        let failure = self.failures().next().map(|c| format!("{}: {}", c.name, c.detail));
        match failure {
            None => Ok(self),
            Some(msg) => Err(Error::Validation(msg)),
        }
    }
}

pub const TRAPPING: &str = "trapping bound V(x) >= |x|^s/c - c";
pub const W_INTEGRABLE: &str = "w in L1 and L2";
pub const W_SYMMETRIC: &str = "w(x) = w(-x)";
pub const A_BOUNDED: &str = "|A| bounded on the domain";
pub const RESOLUTION: &str = "scaled interaction resolved";

/// Check the standing assumptions on `(V, A, w)` over `grid`, and that the
/// scaled interaction is resolved for every requested `(N, β)`.
pub fn validate_config(
    v: &PotentialSpec,
    a: &VectorPotentialSpec,
    w: &InteractionSpec,
    grid: &Grid2D,
    scalings: &[(usize, f64)],
) -> ValidationReport {
    let mut checks = Vec::new();

    checks.push(match v.trapping_margin(grid) {
        Ok(m) => Check {
            name: TRAPPING.into(),
            passed: m >= -1e-12,
            detail: format!("minimum slack {m:.6e} (s = {}, c = {})", v.exponent, v.trap_constant),
        },
        Err(e) => Check { name: TRAPPING.into(), passed: false, detail: e.to_string() },
    });

    let l1 = w.abs_integral();
    let l2 = w.square_integral();
    checks.push(Check {
        name: W_INTEGRABLE.into(),
        passed: l1.is_finite() && l2.is_finite(),
        detail: format!("int|w| = {l1:.6e}, int w^2 = {l2:.6e}"),
    });

    let scale = grid
        .points()
        .map(|(x, y)| w.eval(x, y).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let asym = grid
        .points()
        .map(|(x, y)| (w.eval(x, y) - w.eval(-x, -y)).abs())
        .fold(0.0f64, f64::max);
    checks.push(Check {
        name: W_SYMMETRIC.into(),
        passed: asym <= 1e-12 * scale,
        detail: format!("max |w(x) - w(-x)| = {asym:.3e}"),
    });

    checks.push(match a.sample(grid) {
        Ok(None) => Check { name: A_BOUNDED.into(), passed: true, detail: "A = 0".into() },
        Ok(Some((ax, ay))) => {
            let m = ax.iter().zip(&ay).map(|(x, y)| x.hypot(*y)).fold(0.0f64, f64::max);
            Check { name: A_BOUNDED.into(), passed: m.is_finite(), detail: format!("max |A| = {m:.6e}") }
        }
        Err(e) => Check { name: A_BOUNDED.into(), passed: false, detail: e.to_string() },
    });

    // The largest N at each β has the shortest range.
    let mut worst: Option<(usize, f64, f64)> = None;
    let mut detail = String::from("no scaled interaction requested");
    let mut passed = true;
    for &(n, beta) in scalings {
        match ScaledInteraction::new(w, n, beta) {
            Ok(s) => {
                let r = s.effective_range();
                if worst.map_or(true, |(_, _, wr)| r < wr) {
                    worst = Some((n, beta, r));
                }
            }
            Err(e) => {
                passed = false;
                detail = e.to_string();
            }
        }
    }
    if let (true, Some((n, beta, r))) = (passed, worst) {
        let two = 2.0 * grid.spacing();
        passed = w.is_zero() || r >= two;
        detail = format!("N = {n}, beta = {beta}: range {r:.4e} vs two spacings {two:.4e}");
        if !passed {
            detail = format!("under-resolved interaction at {detail}");
        }
    }
    checks.push(Check { name: RESOLUTION.into(), passed, detail });

    ValidationReport { checks }
}
