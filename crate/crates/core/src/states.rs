//! Pure states, W-type noise operators, mixtures, and the local filtering
//! `A(x) = [x|0><0| + (1/x)|1><1|]^{⊗3}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, herm_eig, hermitian_deviation, projector, CMatrix, CVector, CLIP_TOL};

pub const NORM_TOL: f64 = 1e-12;
const RANGE_SLACK: f64 = 1e-12;

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if !value.is_finite() || value < lo - RANGE_SLACK || value > hi + RANGE_SLACK {
        return Err(Error::OutOfRange { name, value, range });
    }
    Ok(())
}

/// Normalized pure state of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    n_qubits: usize,
    amplitudes: CVector,
}

impl Ket {
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(n_qubits, amplitudes / c64(norm, 0.0))
    }

    /// Computational basis state `|bits>` with qubit 0 leftmost.
    pub fn basis(bits: &str) -> Self {
        let n = bits.len();
        let index = usize::from_str_radix(bits, 2).expect("basis label must be binary");
        let mut v = CVector::zeros(1 << n);
        v[index] = c64(1.0, 0.0);
        Self { n_qubits: n, amplitudes: v }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        projector(&self.amplitudes)
    }
}

/// Parameters `(alpha, beta, gamma)` of the symmetric three-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SymParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, FRAC_PI_2, "[0, pi/2]")?;
        check_range("beta", beta, 0.0, FRAC_PI_2, "[0, pi/2]")?;
        check_range("gamma", gamma, -FRAC_PI_2, FRAC_PI_2, "[-pi/2, pi/2]")?;
        Ok(Self { alpha, beta, gamma })
    }

    pub fn ghz() -> Self {
        Self { alpha: FRAC_PI_2, beta: FRAC_PI_4, gamma: 0.0 }
    }
}

/// Valid density matrix on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    rho: CMatrix,
    n_qubits: usize,
}

impl MixedState {
    pub fn new(rho: CMatrix, n_qubits: usize) -> Result<Self> {
        let dim = 1 << n_qubits;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.nrows() });
        }
        let dev = hermitian_deviation(&rho);
        if dev > NORM_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {dev:e})")));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let low = herm_eig(&rho)?.values[0];
        if low < -CLIP_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {low:e}")));
        }
        Ok(Self { rho, n_qubits })
    }

    pub fn pure(k: &Ket) -> Self {
        Self { rho: k.projector(), n_qubits: k.n_qubits() }
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Noise strength `q` and the W-sector weight `p` (three qubits only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub q: f64,
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        check_range("q", q, 0.0, 1.0, "[0, 1]")?;
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { q, p })
    }
}

fn ket_from(n_qubits: usize, terms: &[(&str, Complex64)]) -> Ket {
    let mut v = CVector::zeros(1 << n_qubits);
    for (bits, amp) in terms {
        v[usize::from_str_radix(bits, 2).expect("binary label")] += amp;
    }
    Ket::normalized(n_qubits, v).expect("fixed states are normalizable")
}

fn re(x: f64) -> Complex64 {
    c64(x, 0.0)
}

/// `cos(theta)|00> + sin(theta)|11>`, theta in `[0, pi/4]`.
pub fn phi(theta: f64) -> Result<Ket> {
    check_range("theta", theta, 0.0, FRAC_PI_4, "[0, pi/4]")?;
    Ok(ket_from(2, &[("00", re(theta.cos())), ("11", re(theta.sin()))]))
}

/// States orthogonal to `phi(theta)`: `k = 0` is `sin|00> - cos|11>`,
/// `k = 1` is `|01>`, `k = 2` is `|10>`.
pub fn phi_perp(k: usize, theta: f64) -> Result<Ket> {
    check_range("theta", theta, 0.0, FRAC_PI_4, "[0, pi/4]")?;
    match k {
        0 => Ok(ket_from(2, &[("00", re(theta.sin())), ("11", re(-theta.cos()))])),
        1 => Ok(Ket::basis("01")),
        2 => Ok(Ket::basis("10")),
        _ => Err(Error::OutOfRange { name: "k", value: k as f64, range: "{0, 1, 2}" }),
    }
}

pub fn w_state() -> Ket {
    let a = re(1.0);
    ket_from(3, &[("001", a), ("010", a), ("100", a)])
}

/// Spin-flipped W state `sigma_x^{⊗3}|W>`.
pub fn w_bar() -> Ket {
    let a = re(1.0);
    ket_from(3, &[("110", a), ("101", a), ("011", a)])
}

pub fn ghz() -> Ket {
    ket_from(3, &[("000", re(1.0)), ("111", re(1.0))])
}

/// `cos(a)|W̄> + sin(a)(cos(b)|000> + sin(b)e^{ig}|111>)`.
pub fn sym_state(p: &SymParams) -> Ket {
    let (ca, sa) = (p.alpha.cos(), p.alpha.sin());
    let w = ca / 3f64.sqrt();
    let mut v = CVector::zeros(8);
    v[0b000] = re(sa * p.beta.cos());
    v[0b111] = Complex64::from_polar(sa * p.beta.sin(), p.gamma);
    v[0b110] = re(w);
    v[0b101] = re(w);
    v[0b011] = re(w);
    Ket::normalized(3, v).expect("symmetric state has unit norm")
}

/// The four zero-tangle states orthogonal to every `sym_state`: phase
/// rotations `e^{±i2π/3 σz}` of |W> on qubits (0, 1) for k = 1, 2 and of
/// |W̄> on qubits (1, 2) for k = 3, 4.
pub fn noise_basis(k: usize) -> Result<Ket> {
    let phase = 2.0 * PI / 3.0;
    let rz = |angle: f64, bit: u8| -> Complex64 {
        // e^{i angle σz} acting on |bit>
        if bit == 0 {
            Complex64::from_polar(1.0, angle)
        } else {
            Complex64::from_polar(1.0, -angle)
        }
    };
    let (base, angles) = match k {
        1 => (w_state(), [phase, -phase, 0.0]),
        2 => (w_state(), [-phase, phase, 0.0]),
        3 => (w_bar(), [0.0, phase, -phase]),
        4 => (w_bar(), [0.0, -phase, phase]),
        _ => return Err(Error::OutOfRange { name: "k", value: k as f64, range: "{1, 2, 3, 4}" }),
    };
    let amps = base.amplitudes();
    let v = CVector::from_fn(8, |idx, _| {
        let mut z = amps[idx];
        for (q, &angle) in angles.iter().enumerate() {
            let bit = ((idx >> (2 - q)) & 1) as u8;
            z *= rz(angle, bit);
        }
        z
    });
    Ket::new(3, v)
}

pub fn noise_kets() -> [Ket; 4] {
    [1, 2, 3, 4].map(|k| noise_basis(k).expect("valid index"))
}

/// Two-qubit W-type noise `(|01><01| + |10><10|)/2`.
pub fn noise_op_2q() -> MixedState {
    let mut rho = CMatrix::zeros(4, 4);
    rho[(1, 1)] = re(0.5);
    rho[(2, 2)] = re(0.5);
    MixedState { rho, n_qubits: 2 }
}

/// Three-qubit W-type noise with W-sector weight `p`; `p = 1/2` is the
/// uniform mixture of the four noise states.
pub fn noise_op_3q(p: f64) -> Result<MixedState> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let kets = noise_kets();
    let weights = [p / 2.0, p / 2.0, (1.0 - p) / 2.0, (1.0 - p) / 2.0];
    let mut rho = CMatrix::zeros(8, 8);
    for (k, w) in kets.iter().zip(weights) {
        rho += k.projector() * re(w);
    }
    Ok(MixedState { rho, n_qubits: 3 })
}

/// `(1 - q)|pure><pure| + q·noise`.
pub fn mix(pure: &Ket, noise: &MixedState, q: f64) -> Result<MixedState> {
    check_range("q", q, 0.0, 1.0, "[0, 1]")?;
    if pure.n_qubits() != noise.n_qubits() {
        return Err(Error::DimensionMismatch { expected: noise.dim(), found: pure.amplitudes().len() });
    }
    let rho = pure.projector() * re(1.0 - q) + noise.rho() * re(q);
    Ok(MixedState { rho, n_qubits: pure.n_qubits() })
}

/// Diagonal `[x|0><0| + (1/x)|1><1|]^{⊗3}`; determinant one for every x.
pub fn local_a(x: Complex64) -> Result<CMatrix> {
    if x.norm() == 0.0 || !x.norm().is_finite() {
        return Err(Error::OutOfRange { name: "|x|", value: x.norm(), range: "(0, inf)" });
    }
    let inv = x.inv();
    let diag = CVector::from_fn(8, |idx, _| {
        (0..3).fold(re(1.0), |acc, q| if (idx >> (2 - q)) & 1 == 0 { acc * x } else { acc * inv })
    });
    Ok(CMatrix::from_diagonal(&diag))
}

/// `A rho A† / tr(A rho A†)`.
pub fn rescale(rho: &MixedState, x: Complex64) -> Result<MixedState> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 8, found: rho.dim() });
    }
    let a = local_a(x)?;
    let m = &a * rho.rho() * a.adjoint();
    let tr = m.trace().re;
    let mut out = m / re(tr);
    // restore exact Hermiticity lost to rounding
    out = (&out + out.adjoint()) * re(0.5);
    MixedState::new(out, 3)
}

/// Generalized GHZ state `cos(b)|000> + sin(b)e^{ig}|111>`.
pub fn g_state(beta: f64, gamma: f64) -> Result<Ket> {
    Ok(sym_state(&SymParams::new(FRAC_PI_2, beta, gamma)?))
}

/// W-like state `cos(a)|W̄> + sin(a)|000>`.
pub fn j_state(alpha: f64) -> Result<Ket> {
    Ok(sym_state(&SymParams::new(alpha, 0.0, 0.0)?))
}

pub fn g_tilde() -> Ket {
    ghz()
}

/// `(|000> + |110> + |101> + |011>)/2`.
pub fn j_tilde() -> Ket {
    let a = re(1.0);
    ket_from(3, &[("000", a), ("110", a), ("101", a), ("011", a)])
}

fn check_interior(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < FRAC_PI_2) {
        return Err(Error::OutOfRange { name, value, range: "(0, pi/2)" });
    }
    Ok(())
}

/// `x = (tan(b) e^{ig})^{1/6}` on the principal branch.
pub fn x_for_g(beta: f64, gamma: f64) -> Result<Complex64> {
    check_interior("beta", beta)?;
    Ok(Complex64::from_polar(beta.tan(), gamma).powf(1.0 / 6.0))
}

/// `x = (cot(a)/sqrt(3))^{1/4}`.
pub fn x_for_j(alpha: f64) -> Result<Complex64> {
    check_interior("alpha", alpha)?;
    Ok(re((1.0 / (alpha.tan() * 3f64.sqrt())).powf(0.25)))
}

/// Applies `A(x)` to a ket without normalizing.
pub fn apply_local_a(k: &Ket, x: Complex64) -> Result<CVector> {
    Ok(local_a(x)? * k.amplitudes())
}
