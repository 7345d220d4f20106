use serde::Serialize;

use crate::error::{Error, Result};

/// Search box and resolution for the exponent offsets `(a, b)`.
#[derive(Clone, Debug)]
pub struct BootstrapSearch {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub resolution: f64,
    pub max_steps: usize,
}

impl Default for BootstrapSearch {
    fn default() -> Self {
        Self { a_range: (0.0, 0.5), b_range: (0.0, 0.5), resolution: 1e-3, max_steps: 1000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapState {
    pub alpha: f64,
    /// `a`: the cutoff is `Λ = N^{α + a}`.
    pub a_exp: f64,
    /// `b`: the localization exponent is `δ = 1/2 + b`.
    pub b_exp: f64,
    pub delta: f64,
    pub lambda_exponent: f64,
    /// `α - α'` of the step that produced this state.
    pub gain: f64,
    /// Which error term sets the new exponent; the cutoff term carries a
    /// `log N` factor, recorded here rather than as a number.
    pub log_flags: Vec<String>,
    pub trajectory: Vec<f64>,
    pub beta: f64,
    pub eps0: f64,
}

impl BootstrapState {
    pub fn start(beta: f64, eps0: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::InvalidParameter(format!("ε₀ = {eps0} outside (0, 1)")));
        }
        Ok(Self {
            alpha: 2.0 * beta,
            a_exp: 0.0,
            b_exp: 0.0,
            delta: 0.5,
            lambda_exponent: 2.0 * beta,
            gain: 0.0,
            log_flags: Vec::new(),
            trajectory: vec![2.0 * beta],
            beta,
            eps0,
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("β = {beta} must be positive")));
    }
    if beta >= 1.0 {
        return Err(Error::Precondition(format!(
            "second-moment estimate unavailable: the recursion requires β < 1, got β = {beta}"
        )));
    }
    Ok(())
}

/// The two exponents of the error terms for given `(α, a, b)`: the cutoff
/// term `N^{α + a - 1/2} log N` and the localization term
/// `N^{α + 2bα + ab/2 - a/4}`.
pub fn step_exponents(alpha: f64, a: f64, b: f64) -> (f64, f64) {
    (alpha + a - 0.5, alpha + 2.0 * b * alpha + a * b / 2.0 - a / 4.0)
}

fn open_grid(range: (f64, f64), resolution: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut i = 1;
    loop {
        let x = range.0 + i as f64 * resolution;
        if x >= range.1 - 1e-12 {
            break;
        }
        v.push(x);
        i += 1;
    }
    v
}

fn apply(state: &BootstrapState, a: f64, b: f64) -> BootstrapState {
    let (cut, loc) = step_exponents(state.alpha, a, b);
    let raw = cut.max(loc);
    let next = raw.max(0.0);
    let mut flags = Vec::new();
    if raw > 0.0 && cut >= loc - 1e-12 {
        flags.push("+o(exponent): log N from the cutoff term".to_string());
    }
    let mut trajectory = state.trajectory.clone();
    trajectory.push(next);
    BootstrapState {
        alpha: next,
        a_exp: a,
        b_exp: b,
        delta: 0.5 + b,
        lambda_exponent: state.alpha + a,
        gain: state.alpha - next,
        log_flags: flags,
        trajectory,
        beta: state.beta,
        eps0: state.eps0,
    }
}

/// One step with the offsets fixed by the caller.
pub fn bootstrap_step_with(state: &BootstrapState, a: f64, b: f64) -> Result<BootstrapState> {
    if !(a > 0.0 && a < 0.5 && b > 0.0 && b < 0.5) {
        return Err(Error::InvalidParameter(format!("(a, b) = ({a}, {b}) outside (0, 1/2)²")));
    }
    Ok(apply(state, a, b))
}

/// One step with `(a, b)` minimizing the new exponent over the search grid.
pub fn bootstrap_step(state: &BootstrapState, search: &BootstrapSearch) -> Result<BootstrapState> {
    if state.alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("α = {} is negative", state.alpha)));
    }
    if state.alpha == 0.0 {
        return Ok(apply(state, search.resolution, search.resolution));
    }
    let a_grid = open_grid(search.a_range, search.resolution);
    let b_grid = open_grid(search.b_range, search.resolution);
    let mut best: Option<(f64, f64, f64)> = None;
    for &a in &a_grid {
        for &b in &b_grid {
            let (cut, loc) = step_exponents(state.alpha, a, b);
            let v = cut.max(loc);
            if best.map_or(true, |(bv, _, _)| v < bv) {
                best = Some((v, a, b));
            }
        }
    }
    let (_, a, b) = best.expect("admissible set is nonempty for α ≥ 0");
    Ok(apply(state, a, b))
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapRun {
    pub beta: f64,
    pub eps0: f64,
    pub steps: Vec<BootstrapState>,
    pub trajectory: Vec<f64>,
    pub reached_zero: bool,
}

/// Iterates from `α = 2β` until `α = 0`.
pub fn run_bootstrap(beta: f64, eps0: f64, search: &BootstrapSearch) -> Result<BootstrapRun> {
    let mut state = BootstrapState::start(beta, eps0)?;
    let mut steps = Vec::new();
    while state.alpha > 0.0 && steps.len() < search.max_steps {
        let next = bootstrap_step(&state, search)?;
        if !(next.gain > 0.0) {
            return Err(Error::Degenerate(format!("no gain at α = {}", state.alpha)));
        }
        steps.push(next.clone());
        state = next;
    }
    Ok(BootstrapRun { beta, eps0, trajectory: state.trajectory.clone(), reached_zero: state.alpha == 0.0, steps })
}
