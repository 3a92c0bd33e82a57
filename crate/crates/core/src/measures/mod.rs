//! Entanglement measures on two- and three-qubit registers.

mod roof;

pub use roof::{convex_roof, RoofOptions, RoofResult};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, kron, pauli, partial_trace, sqrt_psd, CMatrix, CVector, CLIP_TOL};
use crate::states::{Ket, MixedState, SymParams};

/// Complex tangle amplitude; its modulus is the three-tangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangleAmplitude(pub Complex64);

impl TangleAmplitude {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn tangle(&self) -> f64 {
        self.0.norm()
    }

    /// `arg` on `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.0.arg()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub p: f64,
    pub ket: Ket,
}

/// Probability-weighted decomposition of a mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<Member>,
}

pub const PROB_TOL: f64 = 1e-12;

impl Ensemble {
    pub fn new(members: Vec<Member>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidDensity("empty ensemble".into()));
        }
        let n = members[0].ket.n_qubits();
        let mut total = 0.0;
        for m in &members {
            if m.ket.n_qubits() != n {
                return Err(Error::DimensionMismatch { expected: 1 << n, found: m.ket.amplitudes().len() });
            }
            if m.p.is_nan() || m.p < 0.0 {
                return Err(Error::OutOfRange { name: "p", value: m.p, range: "[0, 1]" });
            }
            total += m.p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDensity(format!("probabilities sum to {total}")));
        }
        Ok(Self { members })
    }

    /// Builds an ensemble from unnormalized vectors `psi_j`, with
    /// `p_j = |psi_j|^2`. Zero vectors are dropped.
    pub fn from_unnormalized(n_qubits: usize, vectors: &[CVector]) -> Result<Self> {
        let mut members = Vec::with_capacity(vectors.len());
        for v in vectors {
            let p = v.norm_squared();
            if p > 0.0 {
                members.push(Member { p, ket: Ket::normalized(n_qubits, v.clone())? });
            }
        }
        let total: f64 = members.iter().map(|m| m.p).sum();
        for m in &mut members {
            m.p /= total;
        }
        Self::new(members)
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.members[0].ket.n_qubits()
    }

    pub fn density(&self) -> CMatrix {
        let dim = 1 << self.n_qubits();
        self.members.iter().fold(CMatrix::zeros(dim, dim), |acc, m| acc + m.ket.projector() * c64(m.p, 0.0))
    }

    /// `sum_j p_j f(psi_j)`.
    pub fn average<F: Fn(&Ket) -> f64>(&self, f: F) -> f64 {
        self.members.iter().map(|m| m.p * f(&m.ket)).sum()
    }
}

fn require_qubits(k: &Ket, n: usize) -> Result<()> {
    if k.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: k.amplitudes().len() });
    }
    Ok(())
}

/// `|<psi*|sigma_y ⊗ sigma_y|psi>| = 2|psi_00 psi_11 - psi_01 psi_10|`.
/// Homogeneous of degree two, so unnormalized input scales accordingly.
pub fn concurrence_amplitudes(a: &[Complex64]) -> f64 {
    2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
}

pub fn concurrence_pure(k: &Ket) -> Result<f64> {
    require_qubits(k, 2)?;
    Ok(concurrence_amplitudes(k.as_slice()).min(1.0))
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_wootters(rho: &MixedState) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
    }
    // lambda_i are the singular values of sqrt(rho) * sqrt(rho~), which avoids
    // square-rooting eigenvalue noise of the product
    let yy = kron(&pauli::y(), &pauli::y());
    let s = sqrt_psd(rho.rho())?;
    let s_tilde = &yy * s.map(|z| z.conj()) * &yy;
    let mut lambdas: Vec<f64> = (&s * s_tilde).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

fn check_cut(cut: usize) -> Result<()> {
    if cut > 2 {
        return Err(Error::QubitOutOfRange { index: cut, n_qubits: 3 });
    }
    Ok(())
}

/// `sqrt(4 det rho_cut)` for the single qubit `cut` (0-based) against the
/// other two.
pub fn negativity_one_rest(k: &Ket, cut: usize) -> Result<f64> {
    require_qubits(k, 3)?;
    check_cut(cut)?;
    let traced: Vec<usize> = (0..3).filter(|&q| q != cut).collect();
    let r = partial_trace(&k.projector(), 3, &traced)?;
    let det = (r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)]).re;
    Ok((4.0 * det).max(0.0).sqrt().min(1.0))
}

/// Partial transpose on qubit `qubit` of an `n_qubits` register.
pub fn partial_transpose(rho: &CMatrix, n_qubits: usize, qubit: usize) -> Result<CMatrix> {
    if qubit >= n_qubits {
        return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
    }
    let dim = 1 << n_qubits;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.nrows() });
    }
    let mask = 1 << (n_qubits - 1 - qubit);
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let (bi, bj) = (i & mask, j & mask);
        rho[((i & !mask) | bj, (j & !mask) | bi)]
    }))
}

/// Twice the absolute sum of the negative eigenvalues of the partial
/// transpose on qubit `cut`.
pub fn negativity_partial_transpose(rho: &MixedState, cut: usize) -> Result<f64> {
    let pt = partial_transpose(rho.rho(), rho.n_qubits(), cut)?;
    let neg: f64 = herm_eig(&pt)?.values.iter().filter(|&&v| v < -CLIP_TOL).map(|v| -v).sum();
    Ok(2.0 * neg)
}

fn bilinear(u: &[Complex64], w: &[Complex64]) -> Complex64 {
    -u[0] * w[3] - u[3] * w[0] + u[1] * w[2] + u[2] * w[1]
}

/// The quartic `sum_{j=0,x,z} (psi^T (sigma_j ⊗ sigma_y ⊗ sigma_y) psi)^2`,
/// `sigma_0 = i*1`, evaluated on raw amplitudes (no normalization).
pub fn tangle_polynomial(a: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), 8);
    let (u, v) = a.split_at(4);
    let b = bilinear(u, v);
    c64(4.0, 0.0) * (b * b - bilinear(u, u) * bilinear(v, v))
}

/// Three-tangle `|T|` of a possibly unnormalized vector, scaled to unit norm.
pub fn tangle_normalized(a: &[Complex64]) -> f64 {
    let n2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if n2 == 0.0 {
        return 0.0;
    }
    tangle_polynomial(a).norm() / (n2 * n2)
}

pub fn tangle_amplitude(k: &Ket) -> Result<TangleAmplitude> {
    require_qubits(k, 3)?;
    Ok(TangleAmplitude(tangle_polynomial(k.as_slice())))
}

pub fn tangle_pure(k: &Ket) -> Result<f64> {
    Ok(tangle_amplitude(k)?.tangle())
}

/// Closed-form amplitude of the symmetric state:
/// `(16 sqrt3/9) cos^3 a sin a cos b + 4 e^{2ig} sin^4 a cos^2 b sin^2 b`.
pub fn tangle_param(p: &SymParams) -> TangleAmplitude {
    let (ca, sa) = (p.alpha.cos(), p.alpha.sin());
    let (cb, sb) = (p.beta.cos(), p.beta.sin());
    let first = 16.0 * 3f64.sqrt() / 9.0 * ca.powi(3) * sa * cb;
    let second = Complex64::from_polar(4.0 * sa.powi(4) * cb * cb * sb * sb, 2.0 * p.gamma);
    TangleAmplitude(c64(first, 0.0) + second)
}

/// Negativity of the symmetric state (identical for every cut).
pub fn negativity_param(p: &SymParams) -> f64 {
    negativity_one_rest(&crate::states::sym_state(p), 0).expect("three-qubit state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_norm};
    use crate::states::{ghz, mix, noise_kets, noise_op_2q, phi, sym_state, w_bar, w_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn tangle_by_paulis(k: &Ket) -> Complex64 {
        let yy = kron(&pauli::y(), &pauli::y());
        let v = k.amplitudes();
        [pauli::i_identity(), pauli::x(), pauli::z()]
            .iter()
            .map(|s| {
                let op = kron(s, &yy);
                let m = (v.transpose() * op * v)[(0, 0)];
                m * m
            })
            .sum()
    }

    #[test]
    fn pure_concurrence_examples() {
        assert!((concurrence_pure(&phi(FRAC_PI_4).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence_pure(&Ket::basis("01")).unwrap(), 0.0);
        assert!((concurrence_pure(&phi(PI / 12.0).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert!(concurrence_pure(&ghz()).is_err());
    }

    #[test]
    fn wootters_examples() {
        let bell = phi(FRAC_PI_4).unwrap();
        assert!((concurrence_wootters(&MixedState::pure(&bell)).unwrap() - 1.0).abs() < 1e-10);
        let m = mix(&bell, &noise_op_2q(), 0.1).unwrap();
        assert!((concurrence_wootters(&m).unwrap() - 0.8).abs() < 1e-10);
        let id = MixedState::new(CMatrix::identity(4, 4) * c64(0.25, 0.0), 2).unwrap();
        assert!(concurrence_wootters(&id).unwrap().abs() < 1e-10);
        // the noise operator alone is separable
        assert!(concurrence_wootters(&noise_op_2q()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn wootters_matches_pure_on_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = CVector::from_fn(4, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let k = Ket::normalized(2, v).unwrap();
            let a = concurrence_pure(&k).unwrap();
            let b = concurrence_wootters(&MixedState::pure(&k)).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn negativity_examples() {
        assert!((negativity_one_rest(&ghz(), 0).unwrap() - 1.0).abs() < 1e-14);
        let w = negativity_one_rest(&w_bar(), 0).unwrap();
        assert!((w - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-14);
        assert_eq!(negativity_one_rest(&Ket::basis("000"), 1).unwrap(), 0.0);
        assert!(negativity_one_rest(&ghz(), 3).is_err());
    }

    #[test]
    fn negativity_matches_partial_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let v = CVector::from_fn(8, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let k = Ket::normalized(3, v).unwrap();
            for cut in 0..3 {
                let a = negativity_one_rest(&k, cut).unwrap();
                let b = negativity_partial_transpose(&MixedState::pure(&k), cut).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tangle_examples() {
        let g = tangle_amplitude(&ghz()).unwrap();
        assert!((g.tangle() - 1.0).abs() < 1e-14);
        assert!(tangle_pure(&w_state()).unwrap() < 1e-15);
        for k in noise_kets() {
            assert!(tangle_pure(&k).unwrap() < 1e-14);
        }
        let t = tangle_param(&SymParams::new(FRAC_PI_2, FRAC_PI_4, 0.7).unwrap());
        assert!((t.value() - Complex64::from_polar(1.0, 1.4)).norm() < 1e-14);
        assert_eq!(tangle_param(&SymParams::new(0.0, 0.3, 0.1).unwrap()).tangle(), 0.0);
        let t = tangle_param(&SymParams::new(PI / 6.0, 0.0, 0.4).unwrap());
        assert!((t.value() - c64(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn fast_tangle_matches_pauli_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v = CVector::from_fn(8, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let k = Ket::normalized(3, v).unwrap();
            assert!((tangle_amplitude(&k).unwrap().value() - tangle_by_paulis(&k)).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_amplitude_on_grid() {
        let n = 10;
        for ia in 0..n {
            for ib in 0..n {
                for ig in 0..n {
                    let p = SymParams::new(
                        FRAC_PI_2 * ia as f64 / (n - 1) as f64,
                        FRAC_PI_2 * ib as f64 / (n - 1) as f64,
                        -FRAC_PI_2 + PI * ig as f64 / (n - 1) as f64,
                    )
                    .unwrap();
                    let a = tangle_amplitude(&sym_state(&p)).unwrap().value();
                    assert!((a - tangle_param(&p).value()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ensemble_validation_and_density() {
        let a = Member { p: 0.5, ket: Ket::basis("00") };
        let b = Member { p: 0.5, ket: Ket::basis("11") };
        let e = Ensemble::new(vec![a.clone(), b]).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = c64(0.5, 0.0);
        expect[(3, 3)] = c64(0.5, 0.0);
        assert!(max_abs(&(e.density() - expect)) < 1e-15);
        assert!(Ensemble::new(vec![Member { p: 1.0, ket: a.ket.clone() }]).is_ok());
        assert!(Ensemble::new(vec![Member { p: 0.7, ket: a.ket.clone() }]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
        let mixed = Ensemble::new(vec![Member { p: 0.5, ket: ghz() }, Member { p: 0.5, ket: a.ket }]);
        assert!(mixed.is_err());
    }

    #[test]
    fn from_unnormalized_reconstructs() {
        let v1 = CVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let v2 = CVector::from_vec(vec![c64(0.0, 0.0), c64(0.0, 0.8), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let e = Ensemble::from_unnormalized(2, &[v1.clone(), v2.clone(), CVector::zeros(4)]).unwrap();
        assert_eq!(e.len(), 2);
        let target = crate::linalg::projector(&v1) + crate::linalg::projector(&v2);
        assert!(trace_norm(&(e.density() - target)).unwrap() < 1e-15);
    }
}
