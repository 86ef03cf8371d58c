//! Butcher's seven-stage, sixth-order explicit Runge-Kutta scheme for real
//! first-order systems y' = g(t, y).

const STAGES: usize = 7;

const C: [f64; STAGES] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 0.5, 0.5, 1.0];

#[rustfmt::skip]
const A: [[f64; STAGES - 1]; STAGES] = [
    [0.0; 6],
    [1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 2.0 / 3.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 12.0, 1.0 / 3.0, -1.0 / 12.0, 0.0, 0.0, 0.0],
    [-1.0 / 16.0, 9.0 / 8.0, -3.0 / 16.0, -3.0 / 8.0, 0.0, 0.0],
    [0.0, 9.0 / 8.0, -3.0 / 8.0, -3.0 / 4.0, 0.5, 0.0],
    [9.0 / 44.0, -9.0 / 11.0, 63.0 / 44.0, 18.0 / 11.0, 0.0, -16.0 / 11.0],
];

const B: [f64; STAGES] = [
    11.0 / 120.0,
    0.0,
    27.0 / 40.0,
    27.0 / 40.0,
    -4.0 / 15.0,
    -4.0 / 15.0,
    11.0 / 120.0,
];

/// Formal order of the scheme.
pub const ORDER: u32 = 6;

/// Stage buffers for one system size; reused across steps.
#[derive(Debug, Clone)]
pub struct Rk6 {
    k: [Vec<f64>; STAGES],
    stage: Vec<f64>,
}

impl Rk6 {
    pub fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            stage: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.stage.len()
    }

    /// Advances `y` from t to t + dt in place.
    ///
    /// `rhs(t, y, out)` writes g(t, y) into `out`.
    pub fn step<F>(&mut self, t: f64, dt: f64, y: &mut [f64], mut rhs: F)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        debug_assert_eq!(y.len(), self.stage.len());
        let (k, stage) = (&mut self.k, &mut self.stage);
        for s in 0..STAGES {
            stage.copy_from_slice(y);
            for (j, &a) in A[s][..s].iter().enumerate() {
                if a != 0.0 {
                    let w = dt * a;
                    for (out, kj) in stage.iter_mut().zip(&k[j]) {
                        *out += w * kj;
                    }
                }
            }
            rhs(t + C[s] * dt, stage, &mut k[s]);
        }
        // accumulate the weighted slopes first so y receives a single update
        stage.fill(0.0);
        for (s, &b) in B.iter().enumerate() {
            if b != 0.0 {
                for (acc, ks) in stage.iter_mut().zip(&k[s]) {
                    *acc += b * ks;
                }
            }
        }
        for (yi, acc) in y.iter_mut().zip(stage.iter()) {
            *yi += dt * acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for s in 0..STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-15, "row {s}");
        }
        // b·c^q = 1/(q+1) for q < 6
        for q in 0..6 {
            let lhs: f64 = (0..STAGES).map(|s| B[s] * C[s].powi(q)).sum();
            assert!((lhs - 1.0 / (q as f64 + 1.0)).abs() < 1e-14, "q = {q}");
        }
    }

    #[test]
    fn polynomial_exactness() {
        // y' = t^5 is integrated exactly by a sixth-order scheme
        let mut rk = Rk6::new(1);
        let mut y = [0.0];
        let dt = 0.25;
        for n in 0..8 {
            rk.step(n as f64 * dt, dt, &mut y, |t, _, out| out[0] = t.powi(5));
        }
        let want = 2.0_f64.powi(6) / 6.0;
        assert!((y[0] - want).abs() < 1e-12 * want);
    }

    #[test]
    fn exponential_order() {
        let run = |dt: f64| {
            let mut rk = Rk6::new(1);
            let mut y = [1.0];
            let n = (1.0 / dt).round() as usize;
            for i in 0..n {
                rk.step(i as f64 * dt, dt, &mut y, |t, y, out| out[0] = -y[0] * (1.0 + t));
            }
            (y[0] - (-1.5_f64).exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 5.7 && order < 6.5, "order {order}");
    }
}
