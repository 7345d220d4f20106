use crate::C64;

/// Accepted and rejected step counts of an adaptive integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with the Dormand–Prince 5(4)
/// pair, controlling the mixed absolute/relative error per step.
pub fn dopri45(
    f: &dyn Fn(f64, &[C64], &mut [C64]),
    y0: &[C64],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    stats: &mut OdeStats,
) -> Vec<C64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] =
        [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let span = t1 - t0;
    let mut h = span / 16.0;
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); n];
    while (t1 - t) > 1e-14 * span.abs().max(1.0) {
        h = h.min(t1 - t);
        for s in 0..7 {
            stage.copy_from_slice(&y);
            for (p, a) in A[s].iter().enumerate().take(s) {
                for (st, kp) in stage.iter_mut().zip(&k[p]) {
                    *st += kp * (h * a);
                }
            }
            f(t + C[s] * h, &stage, &mut k[s]);
        }
        let mut err = 0.0f64;
        let mut next = y.clone();
        for i in 0..n {
            let mut d5 = C64::new(0.0, 0.0);
            let mut d4 = C64::new(0.0, 0.0);
            for s in 0..7 {
                d5 += k[s][i] * B5[s];
                d4 += k[s][i] * B4[s];
            }
            next[i] += d5 * h;
            let scale = atol + rtol * y[i].norm().max(next[i].norm());
            err = err.max(((d5 - d4) * h).norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = next;
            stats.accepted += 1;
            h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_phase() {
        let f = |_: f64, y: &[C64], out: &mut [C64]| {
            out[0] = C64::new(0.0, -3.0) * y[0];
        };
        let mut stats = OdeStats::default();
        let y = dopri45(&f, &[C64::new(1.0, 0.0)], 0.0, 2.0, 1e-12, 1e-14, &mut stats);
        assert!((y[0] - C64::from_polar(1.0, -6.0)).norm() < 1e-10);
    }
}
