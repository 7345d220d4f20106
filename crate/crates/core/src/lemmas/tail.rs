use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{InteractionSpec, ScaledInteraction};

#[derive(Clone, Debug, Serialize)]
pub struct TailBound {
    /// `|k| ≤ 1`.
    pub inner: f64,
    /// `1 < |k| ≤ N^β`.
    pub middle: f64,
    /// `|k| > N^β`.
    pub outer: f64,
    pub total: f64,
}

/// `∫_{a}^{b} f(r) dr` by composite Gauss–Legendre (8 points per panel).
fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            s += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
        }
    }
    s * 0.5 * h
}

/// `∫ min{1, CΛ/|k|²} |ŵ(N^{-β}k)| dk` split at `|k| = 1` and `|k| = N^β`.
/// The angular integral is done with 64 equispaced angles, exact for the
/// radial interactions used here.
pub fn interaction_tail_bound(
    w: &InteractionSpec,
    particles: usize,
    beta: f64,
    lambda: f64,
    c: f64,
) -> Result<TailBound> {
    if !(lambda > 0.0 && c >= 0.0) {
        return Err(Error::InvalidParameter(format!("Λ = {lambda}, C = {c}")));
    }
    let scaled = ScaledInteraction::new(w, particles, beta)?;
    let split = scaled.dilation();
    let angles = 64;
    let radial = |r: f64| -> f64 {
        let envelope = (c * lambda / (r * r)).min(1.0);
        let avg = (0..angles)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / angles as f64;
                scaled.fourier(r * t.cos(), r * t.sin()).abs()
            })
            .sum::<f64>()
            / angles as f64;
        2.0 * PI * r * envelope * avg
    };
    // ŵ(N^{-β}k) has decayed by |k| ~ N^β / range; integrate well past it
    let far = split * (40.0 / w.min_range()).max(40.0);
    let knee = (c * lambda).sqrt();
    let piece = |a: f64, b: f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        // split at the kink of the envelope for accuracy
        if knee > a && knee < b {
            gauss_legendre(&radial, a, knee, 200) + gauss_legendre(&radial, knee, b, 200)
        } else {
            gauss_legendre(&radial, a, b, 400)
        }
    };
    let inner = piece(0.0, 1.0_f64.min(split));
    let middle = piece(1.0, split);
    let outer = piece(split.max(1.0), far);
    Ok(TailBound { inner, middle, outer, total: inner + middle + outer })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_interaction() {
        let t = interaction_tail_bound(&InteractionSpec::zero(), 16, 0.75, 10.0, 1.0).unwrap();
        assert_eq!(t.total, 0.0);
    }
}
