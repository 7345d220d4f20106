use serde::Serialize;

pub const BOUNDED: &str = "bounded";
pub const UNBOUNDED: &str = "unbounded trend";

/// Shape of `e_N` over the scanned particle numbers.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Trend {
    pub strictly_decreasing: bool,
    /// Least-squares fit `e_N ≈ c0 + c1·N + c2·N²`.
    pub fit: [f64; 3],
    /// `c2` relative to the spread of the data; negative when the decrease
    /// accelerates.
    pub curvature: f64,
    pub verdict: &'static str,
}

/// Least-squares quadratic through `(x, y)`.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut a = [[0.0f64; 4]; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let p = [1.0, xi, xi * xi];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += p[r] * p[c];
            }
            a[r][3] += p[r] * yi;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return [y.iter().sum::<f64>() / y.len().max(1) as f64, 0.0, 0.0];
        }
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

/// "unbounded trend" when `e_N` falls strictly at every step and the fitted
/// curve bends downward; "bounded" otherwise.
pub fn classify(particles: &[usize], e: &[f64]) -> Trend {
    let strictly_decreasing = e.len() >= 2 && e.windows(2).all(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0));
    let x: Vec<f64> = particles.iter().map(|&n| n as f64).collect();
    let (fit, curvature) = if e.len() >= 3 {
        let fit = quadratic_fit(&x, e);
        let span_x = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
        let span_y = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min);
        (fit, fit[2] * span_x * span_x / span_y.max(1e-300))
    } else {
        ([e.first().copied().unwrap_or(0.0), 0.0, 0.0], 0.0)
    };
    let superlinear = curvature < -1e-3;
    let verdict = if strictly_decreasing && superlinear { UNBOUNDED } else { BOUNDED };
    Trend { strictly_decreasing, fit, curvature, verdict }
}

/// Expected verdict for attraction multiplier `g = m⁻/a*`, when the
/// threshold makes a prediction.
pub fn expected_verdict(g: f64) -> Option<&'static str> {
    if g < 1.0 {
        Some(BOUNDED)
    } else if g > 1.0 {
        Some(UNBOUNDED)
    } else {
        None
    }
}

/// Every step of `seq` stays below `(1 + band)` times the previous one.
pub fn non_increasing_within(seq: &[f64], band: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + band) + 1e-14)
}

/// Ratio of the largest to the smallest positive entry.
pub fn spread(values: &[f64]) -> f64 {
    let pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    if pos.is_empty() {
        return 1.0;
    }
    let hi = pos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pos.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}
