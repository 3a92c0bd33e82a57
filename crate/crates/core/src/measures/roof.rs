//! Numerical upper bound on a convex roof by searching over decompositions.
//!
//! Every decomposition of `rho = sum_i l_i |e_i><e_i|` into `m` states has
//! the form `|psi_j> = sum_i V_ji sqrt(l_i) |e_i>` with `V` an `m x r`
//! isometry. Restarts draw `V` at random; the local search then applies
//! unitary mixing between pairs of members.

use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{c64, ginibre, herm_eig, orthonormalize_columns, CMatrix, CVector, CLIP_TOL};
use crate::states::MixedState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofOptions {
    /// Ensemble size; `None` means rank + 2.
    pub m: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub patience: usize,
    pub max_evals: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self { m: None, restarts: 64, seed: 0, initial_step: 0.2, min_step: 1e-6, patience: 20, max_evals: 200_000 }
    }
}

impl RoofOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    pub value: f64,
    pub ensemble: Ensemble,
    /// Average over the eigen-decomposition.
    pub eigen_average: f64,
    pub rank: usize,
    pub m: usize,
    pub best_restart: usize,
}

struct Problem<'a, F> {
    /// `dim x r`, columns `sqrt(l_i) e_i`.
    scaled: CMatrix,
    measure: &'a F,
}

impl<F: Fn(&[Complex64]) -> f64 + Sync> Problem<'_, F> {
    /// Unnormalized members `psi_j` as columns.
    fn vectors(&self, v: &CMatrix) -> CMatrix {
        &self.scaled * v.transpose()
    }

    fn contribution(&self, psi: &[Complex64]) -> f64 {
        let p: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if p <= 0.0 {
            return 0.0;
        }
        let scale = 1.0 / p.sqrt();
        let normalized: Vec<Complex64> = psi.iter().map(|z| z * scale).collect();
        p * (self.measure)(&normalized).max(0.0)
    }

    fn average(&self, v: &CMatrix) -> f64 {
        let psi = self.vectors(v);
        psi.column_iter().map(|c| self.contribution(c.as_slice())).sum()
    }

    /// Local search by random two-member rotations
    /// `(psi_j, psi_k) -> (c psi_j + s e^{if} psi_k, -s e^{-if} psi_j + c psi_k)`,
    /// which keep the decomposition exact. Only improvements are kept.
    fn refine(&self, v: CMatrix, rng: &mut ChaCha8Rng, opts: &RoofOptions) -> (f64, CMatrix) {
        let mut psi = self.vectors(&v);
        let m = psi.ncols();
        let mut contrib: Vec<f64> = psi.column_iter().map(|c| self.contribution(c.as_slice())).collect();
        let mut best: f64 = contrib.iter().sum();
        if m < 2 {
            return (best, psi);
        }
        let mut step = opts.initial_step;
        let mut failures = 0;
        let mut evals = 0;
        while step >= opts.min_step && evals < opts.max_evals {
            let j = rng.random_range(0..m);
            let k = (j + rng.random_range(1..m)) % m;
            let z: f64 = StandardNormal.sample(rng);
            let angle = step * z;
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let (c, s) = (angle.cos(), angle.sin());
            let a = psi.column(j);
            let b = psi.column(k);
            let new_j = a * c64(c, 0.0) + b * (phase * s);
            let new_k = b * c64(c, 0.0) - a * (phase.conj() * s);
            let (cj, ck) = (self.contribution(new_j.as_slice()), self.contribution(new_k.as_slice()));
            evals += 1;
            let value = best - contrib[j] - contrib[k] + cj + ck;
            if value < best {
                psi.set_column(j, &new_j);
                psi.set_column(k, &new_k);
                contrib[j] = cj;
                contrib[k] = ck;
                best = contrib.iter().sum();
                failures = 0;
            } else {
                failures += 1;
                if failures >= opts.patience {
                    step *= 0.5;
                    failures = 0;
                }
            }
        }
        (best, psi)
    }
}

/// Searches decompositions of `rho` for the smallest average of `measure`,
/// which receives normalized amplitudes. The result is an upper bound on the
/// convex roof and never exceeds the eigen-decomposition average.
///
/// Restart 0 starts from the eigen-decomposition; restart `k > 0` starts from
/// a Haar isometry drawn from stream `k` of the seeded generator.
pub fn convex_roof<F>(rho: &MixedState, measure: F, opts: &RoofOptions) -> Result<RoofResult>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let eig = herm_eig(rho.rho())?;
    let dim = rho.dim();
    let kept: Vec<usize> = (0..dim).filter(|&i| eig.values[i] > CLIP_TOL).collect();
    let r = kept.len();
    let m = opts.m.unwrap_or(r + 2);
    if m < r {
        return Err(Error::EnsembleTooSmall { m, rank: r });
    }
    let scaled = CMatrix::from_fn(dim, r, |row, c| eig.vectors[(row, kept[c])] * eig.values[kept[c]].sqrt());
    let problem = Problem { scaled, measure: &measure };

    let mut eigen_start = CMatrix::zeros(m, r);
    for i in 0..r {
        eigen_start[(i, i)] = c64(1.0, 0.0);
    }
    let eigen_average = problem.average(&eigen_start);

    let runs: Vec<(f64, CMatrix)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let start = if k == 0 { eigen_start.clone() } else { orthonormalize_columns(&ginibre(m, r, &mut rng)) };
            problem.refine(start, &mut rng, opts)
        })
        .collect();

    let (best_restart, (value, psi)) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    debug!("convex roof: rank {r}, m {m}, best restart {best_restart}, value {value:e}");

    let vectors: Vec<CVector> = psi.column_iter().map(|c| c.into_owned()).collect();
    let ensemble = Ensemble::from_unnormalized(rho.n_qubits(), &vectors)?;
    Ok(RoofResult { value: value.min(eigen_average), ensemble, eigen_average, rank: r, m, best_restart })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_norm;
    use crate::measures::{concurrence_amplitudes, concurrence_wootters, tangle_normalized};
    use crate::states::{ghz, mix, noise_op_2q, noise_op_3q, phi};
    use std::f64::consts::FRAC_PI_4;

    fn quick(seed: u64, restarts: usize) -> RoofOptions {
        RoofOptions { restarts, ..RoofOptions::with_seed(seed) }
    }

    #[test]
    fn pure_state_returns_its_measure() {
        let k = phi(0.3).unwrap();
        for m in [1, 3] {
            let opts = RoofOptions { m: Some(m), ..quick(1, 4) };
            let r = convex_roof(&MixedState::pure(&k), concurrence_amplitudes, &opts).unwrap();
            assert!((r.value - (0.6f64).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_with_noise_matches_wootters() {
        let rho = mix(&phi(FRAC_PI_4).unwrap(), &noise_op_2q(), 0.1).unwrap();
        let r = convex_roof(&rho, concurrence_amplitudes, &quick(3, 16)).unwrap();
        let exact = concurrence_wootters(&rho).unwrap();
        assert!(r.value >= exact - 1e-10);
        assert!(r.value - exact < 1e-4, "{} vs {}", r.value, exact);
        assert!(trace_norm(&(r.ensemble.density() - rho.rho())).unwrap() < 1e-10);
    }

    #[test]
    fn ghz_with_noise_below_ansatz_bound() {
        let rho = mix(&ghz(), &noise_op_3q(0.5).unwrap(), 0.01).unwrap();
        let r = convex_roof(&rho, tangle_normalized, &quick(5, 16)).unwrap();
        assert!(r.value <= 0.96 + 1e-4, "{}", r.value);
        assert!(r.value <= r.eigen_average);
        assert!(r.value >= 0.0);
    }

    #[test]
    fn more_restarts_never_worse() {
        let rho = mix(&phi(0.5).unwrap(), &noise_op_2q(), 0.2).unwrap();
        let few = convex_roof(&rho, concurrence_amplitudes, &quick(9, 4)).unwrap();
        let many = convex_roof(&rho, concurrence_amplitudes, &quick(9, 12)).unwrap();
        assert!(many.value <= few.value);
        let again = convex_roof(&rho, concurrence_amplitudes, &quick(9, 4)).unwrap();
        assert_eq!(few.value, again.value);
    }

    #[test]
    fn ensemble_too_small() {
        let rho = mix(&phi(0.5).unwrap(), &noise_op_2q(), 0.2).unwrap();
        let opts = RoofOptions { m: Some(2), ..quick(0, 1) };
        assert!(matches!(convex_roof(&rho, concurrence_amplitudes, &opts), Err(Error::EnsembleTooSmall { m: 2, rank: 3 })));
    }
}
