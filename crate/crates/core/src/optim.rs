//! Derivative-free minimization and bracketing root finders.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub initial_step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { initial_step: 0.1, x_tol: 1e-12, f_tol: 1e-16, max_evals: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Nelder-Mead with the standard coefficients (1, 2, 1/2, 1/2).
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let size = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if size <= self.x_tol || spread <= self.f_tol {
                break;
            }

            let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };

            let xr = along(-1.0);
            let fr = f(&xr);
            evals += 1;
            if fr < values[0] {
                let xe = along(-2.0);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let xc = along(if fr < values[n] { -0.5 } else { 0.5 });
            let fc = f(&xc);
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                for j in 0..n {
                    simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                }
                values[i] = f(&simplex[i]);
            }
            evals += n;
        }

        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("non-empty simplex");
        Minimum { x: simplex[best].clone(), value: values[best], evals }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to `x_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64, what: &'static str) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoRoot(what));
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Brackets of every sign change of `f` on a uniform scan of `[lo, hi]`.
pub fn sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    (0..steps)
        .filter(|&i| fs[i] != 0.0 && (fs[i].signum() != fs[i + 1].signum() || fs[i + 1] == 0.0))
        .map(|i| (xs[i], xs[i + 1]))
        .collect()
}
