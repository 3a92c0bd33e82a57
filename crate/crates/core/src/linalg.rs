//! Dense complex linear algebra for registers of at most three qubits.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! basis index, so `|abc>` lives at index `4a + 2b + c`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for structural checks (Hermiticity, symmetry).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Eigenvalues above `-CLIP_TOL` are clipped to zero.
pub const CLIP_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices and the `sigma_0 = i*1` convention used by the tangle.
pub mod pauli {
    use super::{c64, CMatrix};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn i_identity() -> CMatrix {
        CMatrix::from_diagonal_element(2, 2, c64(0.0, 1.0))
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)])
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn symmetric_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Reduced state after tracing out the qubits in `traced`.
///
/// `traced` holds 0-based qubit labels; the remaining qubits keep their
/// relative order.
pub fn partial_trace(rho: &CMatrix, n_qubits: usize, traced: &[usize]) -> Result<CMatrix> {
    let dim = ensure_square(rho)?;
    if dim != 1 << n_qubits {
        return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: dim });
    }
    let mut is_traced = vec![false; n_qubits];
    for &q in traced {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        is_traced[q] = true;
    }
    let kept: Vec<usize> = (0..n_qubits).filter(|&q| !is_traced[q]).collect();
    let gone: Vec<usize> = (0..n_qubits).filter(|&q| is_traced[q]).collect();

    // Scatter a value of `bits.len()` bits onto the listed qubit positions.
    let scatter = |value: usize, qubits: &[usize]| -> usize {
        qubits.iter().enumerate().fold(0, |acc, (k, &q)| {
            let bit = (value >> (qubits.len() - 1 - k)) & 1;
            acc | (bit << (n_qubits - 1 - q))
        })
    };

    let dk = 1 << kept.len();
    let dg = 1 << gone.len();
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        let fi = scatter(i, &kept);
        for j in 0..dk {
            let fj = scatter(j, &kept);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dg {
                let ft = scatter(t, &gone);
                acc += rho[(fi | ft, fj | ft)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Spectrum of a Hermitian matrix, ascending, with orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    let n = ensure_square(h)?;
    let scale = max_abs(h).max(1.0);
    let deviation = hermitian_deviation(h);
    if deviation > STRUCTURE_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        // first non-negligible component real positive
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-8) {
            let phase = lead.conj() / lead.norm();
            col *= phase;
        }
        vectors.set_column(dst, &col);
    }
    Ok(HermEig { values, vectors })
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(h: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    if let Some(&low) = eig.values.first() {
        if low < -CLIP_TOL {
            return Err(Error::NotPositive { eigenvalue: low });
        }
    }
    let roots: Vec<Complex64> = eig.values.iter().map(|&l| c64(l.max(0.0).sqrt(), 0.0)).collect();
    let d = CMatrix::from_diagonal(&CVector::from_vec(roots));
    Ok(&eig.vectors * d * eig.vectors.adjoint())
}

/// Takagi factorization `s = uᵀ · diag(omega) · u` of a complex symmetric
/// matrix, with `omega` real, non-negative and descending.
#[derive(Debug, Clone)]
pub struct Takagi {
    pub u: CMatrix,
    pub omega: Vec<Complex64>,
}

impl Takagi {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_vec(self.omega.clone()));
        self.u.transpose() * d * &self.u
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.omega.iter().map(|w| w.norm()).collect()
    }
}

/// Takagi factorization through the real symmetric embedding
/// `[[Re s, Im s], [Im s, -Re s]]`, whose spectrum is `±|omega_k|`. A
/// positive eigenvector `(x, y)` gives a column `w = x + iy` with
/// `s·conj(w) = |omega|·w`; the null space is completed by Gram-Schmidt.
pub fn takagi(s: &CMatrix) -> Result<Takagi> {
    let n = ensure_square(s)?;
    let scale = max_abs(s).max(1.0);
    let deviation = symmetric_deviation(s);
    if deviation > STRUCTURE_TOL * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    let s = (s + s.transpose()).scale(0.5);

    let mut h = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = s[(i, j)];
            h[(i, j)] = c64(z.re, 0.0);
            h[(i, j + n)] = c64(z.im, 0.0);
            h[(i + n, j)] = c64(z.im, 0.0);
            h[(i + n, j + n)] = c64(-z.re, 0.0);
        }
    }
    let eig = herm_eig(&h)?;
    let null_tol = STRUCTURE_TOL * scale;

    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for k in (0..2 * n).rev().take(n) {
        let sigma = eig.values[k];
        if sigma <= null_tol {
            break;
        }
        let v = eig.vectors.column(k);
        let w = CVector::from_fn(n, |i, _| c64(v[i].re, v[i + n].re));
        let norm = w.norm();
        columns.push(w / c64(norm, 0.0));
        omega.push(c64(sigma, 0.0));
    }
    complete_basis(&mut columns, n);
    omega.resize(n, c64(0.0, 0.0));

    let w = CMatrix::from_columns(&columns);
    Ok(Takagi { u: w.transpose(), omega })
}

/// Extends orthonormal `columns` to an orthonormal basis of Cⁿ.
fn complete_basis(columns: &mut Vec<CVector>, n: usize) {
    while columns.len() < n {
        let mut best: Option<CVector> = None;
        let mut best_norm = 0.0;
        for i in 0..n {
            let mut e = CVector::zeros(n);
            e[i] = c64(1.0, 0.0);
            for _ in 0..2 {
                for c in columns.iter() {
                    let proj = c.dotc(&e);
                    e -= c * proj;
                }
            }
            let norm = e.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(e / c64(norm, 0.0));
            }
        }
        columns.push(best.expect("basis completion always finds a direction"));
    }
}

/// Orthonormalizes the columns of `m` by thin QR, with the phases fixed so
/// that R has a positive diagonal.
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let r_cols = m.ncols();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..r_cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(k);
            col *= phase;
        }
    }
    q
}

pub(crate) fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re * scale, im * scale)
    })
}

/// Haar-distributed `m x r` isometry, deterministic in `seed`.
pub fn haar_isometry(m: usize, r: usize, seed: u64) -> Result<CMatrix> {
    if m < r {
        return Err(Error::IsometryShape { rows: m, cols: r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(orthonormalize_columns(&ginibre(m, r, &mut rng)))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> Result<f64> {
    Ok(herm_eig(h)?.values.iter().map(|l| l.abs()).sum())
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c64(v, 0.0)),
        ))
    }

    fn random_symmetric(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ginibre(n, n, &mut rng);
        &g + g.transpose()
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&pauli::identity(), &pauli::identity());
        assert_eq!(i4, CMatrix::identity(4, 4));

        let yy = kron(&pauli::y(), &pauli::y());
        let anti = [-1.0, 1.0, 1.0, -1.0];
        for (r, &v) in anti.iter().enumerate() {
            for col in 0..4 {
                let expect = if col == 3 - r { v } else { 0.0 };
                assert_eq!(yy[(r, col)], c64(expect, 0.0));
            }
        }

        let zz = kron(&pauli::z(), &pauli::z());
        let mut ket01 = CVector::zeros(4);
        ket01[1] = c64(1.0, 0.0);
        assert_eq!(&zz * &ket01, -ket01);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMatrix::from_row_slice(2, 2, &[c64(0.7, 0.0), c64(0.1, 0.2), c64(0.1, -0.2), c64(0.3, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c64(0.4, 0.0), c64(0.0, 0.3), c64(0.0, -0.3), c64(0.6, 0.0)]);
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, 2, &[1]).unwrap();
        let rb = partial_trace(&ab, 2, &[0]).unwrap();
        assert!(max_abs(&(ra - &a)) < 1e-15);
        assert!(max_abs(&(rb - &b)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = CMatrix::identity(4, 4);
        assert!(matches!(partial_trace(&rho, 2, &[2]), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(partial_trace(&rho, 3, &[0]), Err(Error::DimensionMismatch { .. })));
        let rect = CMatrix::zeros(4, 2);
        assert!(matches!(partial_trace(&rect, 2, &[0]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn herm_eig_small_cases() {
        let e = herm_eig(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);

        let e = herm_eig(&pauli::x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);

        let bad = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(herm_eig(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_phase_convention() {
        let e = herm_eig(&pauli::y()).unwrap();
        for k in 0..2 {
            let lead = e.vectors[(0, k)];
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn sqrt_psd_cases() {
        let i3 = CMatrix::identity(3, 3);
        assert!(max_abs(&(sqrt_psd(&i3).unwrap() - &i3)) < 1e-14);
        let r = sqrt_psd(&diag(&[4.0, 9.0])).unwrap();
        assert!(max_abs(&(r - diag(&[2.0, 3.0]))) < 1e-14);

        let mut v = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(1.0, -1.0)]);
        v /= c64(v.norm(), 0.0);
        let p = projector(&v);
        assert!(max_abs(&(sqrt_psd(&p).unwrap() - &p)) < 1e-12);

        assert!(matches!(sqrt_psd(&diag(&[1.0, -0.1])), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn takagi_diagonal_cases() {
        let t = takagi(&CMatrix::identity(4, 4)).unwrap();
        for m in t.moduli() {
            assert!((m - 1.0).abs() < 1e-12);
        }

        let s = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.0, 2.0), c64(-3.0, 0.0)]));
        let t = takagi(&s).unwrap();
        let m = t.moduli();
        assert!((m[0] - 3.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
        assert!(max_abs(&(t.reconstruct() - s)) < 1e-12);
    }

    #[test]
    fn takagi_rank_deficient() {
        // rank-2 symmetric matrix with a degenerate non-zero pair
        let mut s = CMatrix::zeros(4, 4);
        s[(0, 1)] = c64(0.0, 2.0);
        s[(1, 0)] = c64(0.0, 2.0);
        let t = takagi(&s).unwrap();
        let m = t.moduli();
        assert!((m[0] - 2.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
        assert!(m[2] < 1e-12 && m[3] < 1e-12);
        assert!(max_abs(&(t.reconstruct() - &s)) < 1e-12);
        let uu = &t.u * t.u.adjoint();
        assert!(max_abs(&(uu - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn takagi_random_reconstruction() {
        for seed in 0..20 {
            let s = random_symmetric(4, seed);
            let t = takagi(&s).unwrap();
            assert!(max_abs(&(t.reconstruct() - &s)) < 1e-8);
        }
    }

    #[test]
    fn takagi_rejects_asymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ginibre(3, 3, &mut rng);
        assert!(matches!(takagi(&g), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn haar_isometry_properties() {
        let v = haar_isometry(8, 4, 7).unwrap();
        let gram = v.adjoint() * &v;
        assert!(max_abs(&(gram - CMatrix::identity(4, 4))) < 1e-12);

        let u = haar_isometry(5, 5, 11).unwrap();
        assert!(max_abs(&(&u * u.adjoint() - CMatrix::identity(5, 5))) < 1e-12);

        assert_eq!(haar_isometry(6, 3, 42).unwrap(), haar_isometry(6, 3, 42).unwrap());
        assert!(matches!(haar_isometry(2, 3, 0), Err(Error::IsometryShape { .. })));
    }
}
