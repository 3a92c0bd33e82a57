//! First-order decay of concurrence and three-tangle under W-type noise.
//!
//! For the symmetric state `Psi(a, b, g)` mixed with `Pi_W` at strength `q`
//! the tangle decays as `tau - eta q`, where `eta = 2 tau + sum_k |w_k| / 4`
//! and `|w_k|` are the Takagi values of the 4x4 coupling matrix `Omega`.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

use log::warn;
use nalgebra::{Matrix5, Vector5};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, takagi, CMatrix, CVector, Takagi, CLIP_TOL};
use crate::measures::{negativity_param, tangle_param, tangle_polynomial, tangle_pure, Ensemble, Member};
use crate::states::{noise_kets, phi, phi_perp, sym_state, Ket, SymParams};

/// Bundle of first-order quantities for one symmetric state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseReport {
    pub tau: f64,
    pub negativity: f64,
    /// Descending.
    pub omega_moduli: [f64; 4],
    pub eta: f64,
}

/// Entries of `R = conj(Omega) Omega`, laid out as
/// `[[X,0,0,Z+],[0,X,Z-,0],[0,Z-*,Y,0],[Z+*,0,0,Y]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrixElements {
    pub x: f64,
    pub y: f64,
    pub z_plus: Complex64,
    pub z_minus: Complex64,
}

impl RMatrixElements {
    pub fn matrix(&self) -> CMatrix {
        let mut r = CMatrix::zeros(4, 4);
        r[(0, 0)] = c64(self.x, 0.0);
        r[(1, 1)] = c64(self.x, 0.0);
        r[(2, 2)] = c64(self.y, 0.0);
        r[(3, 3)] = c64(self.y, 0.0);
        r[(0, 3)] = self.z_plus;
        r[(3, 0)] = self.z_plus.conj();
        r[(1, 2)] = self.z_minus;
        r[(2, 1)] = self.z_minus.conj();
        r
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4 + 1e-12).contains(&theta) {
        return Err(Error::OutOfRange { name: "theta", value: theta, range: "[0, pi/4]" });
    }
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange { name: "q", value: q, range: "[0, 1]" });
    }
    Ok(())
}

/// Two-qubit decay rate `sin 2t + 1`. Only meaningful for `q << sin 2t`.
pub fn lrc(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((2.0 * theta).sin() + 1.0)
}

/// `max(0, sin 2t - q (1 + sin 2t))`.
pub fn exact_concurrence_curve(theta: f64, q: f64) -> Result<f64> {
    check_theta(theta)?;
    check_q(q)?;
    let c = (2.0 * theta).sin();
    Ok((c - q * (1.0 + c)).max(0.0))
}

/// Four equally weighted states `sqrt(1-q) Phi + sqrt(q) (A_j Phi+ + B_j Phi-)`
/// with `Phi+- = (|01> +- |10>)/sqrt2` up to the phase `i` on `Phi-`.
pub fn optimal_ensemble_2q(theta: f64, q: f64) -> Result<Ensemble> {
    check_q(q)?;
    let base = phi(theta)?;
    let p1 = phi_perp(1, theta)?;
    let p2 = phi_perp(2, theta)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = (p1.amplitudes() + p2.amplitudes()) * c64(h, 0.0);
    let minus = (p1.amplitudes() - p2.amplitudes()) * c64(0.0, h);
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let members = signs
        .iter()
        .map(|&(a, b)| {
            let v = base.amplitudes() * c64((1.0 - q).sqrt(), 0.0)
                + (&plus * c64(a * h, 0.0) + &minus * c64(b * h, 0.0)) * c64(q.sqrt(), 0.0);
            Ok(Member { p: 0.25, ket: Ket::normalized(2, v)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

const NODES: [f64; 5] = [-2.0, -1.0, 1.0, 2.0, 3.0];

/// Coefficients `c_0..c_4` of a quartic sampled at `NODES`.
fn quartic_coefficients(values: [Complex64; 5]) -> [Complex64; 5] {
    let v = Matrix5::from_fn(|i, j| NODES[i].powi(j as i32));
    let lu = v.lu();
    let re = lu.solve(&Vector5::from_fn(|i, _| values[i].re)).expect("Vandermonde nodes are distinct");
    let im = lu.solve(&Vector5::from_fn(|i, _| values[i].im)).expect("Vandermonde nodes are distinct");
    std::array::from_fn(|k| c64(re[k], im[k]))
}

fn expansion<F: Fn(&[Complex64]) -> Complex64>(f: &F, base: &CVector, dir: &CVector) -> [Complex64; 5] {
    quartic_coefficients(NODES.map(|s| f((base + dir * c64(s, 0.0)).as_slice())))
}

/// Symmetric matrix `W` with `f(base + s chi) = f(base) + s L(chi) - s^2 chi^T W chi + ...`
/// for `chi` expanded in `dirs`, together with the linear terms `L(dir_k)`.
/// Built by polarization of the `s^2` coefficient.
pub fn polarize<F: Fn(&[Complex64]) -> Complex64>(f: F, base: &CVector, dirs: &[CVector]) -> (CMatrix, Vec<Complex64>) {
    let n = dirs.len();
    let mut w = CMatrix::zeros(n, n);
    let mut linear = Vec::with_capacity(n);
    for k in 0..n {
        let c = expansion(&f, base, &dirs[k]);
        w[(k, k)] = -c[2];
        linear.push(c[1]);
    }
    for k in 0..n {
        for l in k + 1..n {
            let c = expansion(&f, base, &(&dirs[k] + &dirs[l]));
            let off = (-c[2] - w[(k, k)] - w[(l, l)]) * 0.5;
            w[(k, l)] = off;
            w[(l, k)] = off;
        }
    }
    (w, linear)
}

/// Coupling matrix `Omega` of the noise states into the tangle amplitude of
/// `Psi(a, b, g)`, plus the `s^1` coefficients (which vanish).
pub fn omega_expansion(p: &SymParams) -> (CMatrix, Vec<Complex64>) {
    let base = sym_state(p);
    let dirs: Vec<CVector> = noise_kets().iter().map(|k| k.amplitudes().clone()).collect();
    polarize(tangle_polynomial, base.amplitudes(), &dirs)
}

pub fn omega_matrix(p: &SymParams) -> CMatrix {
    omega_expansion(p).0
}

/// Two-qubit analogue of `Omega`: coupling of `|01>`, `|10>` into the
/// concurrence amplitude `psi^T (sigma_y ⊗ sigma_y) psi` of `Phi(theta)`.
pub fn omega_matrix_2q(theta: f64) -> Result<CMatrix> {
    let base = phi(theta)?;
    let dirs = [phi_perp(1, theta)?.amplitudes().clone(), phi_perp(2, theta)?.amplitudes().clone()];
    let amp = |a: &[Complex64]| c64(2.0, 0.0) * (a[1] * a[2] - a[0] * a[3]);
    Ok(polarize(amp, base.amplitudes(), &dirs).0)
}

/// Closed-form entries of `R`.
pub fn r_elements(p: &SymParams) -> RMatrixElements {
    let (ca, sa) = (p.alpha.cos(), p.alpha.sin());
    let (cb, sb) = (p.beta.cos(), p.beta.sin());
    let g = p.gamma;
    let x = 64.0 / 9.0 * ca.powi(4) + 4.0 * sa.powi(4) * (2.0 * p.beta).sin().powi(2);
    let y = 64.0 / 3.0 * ca * ca * sa * sa * cb * cb + 16.0 * sa.powi(4) * cb * cb * sb * sb;
    let z = |sign: f64| {
        Complex64::from_polar(32.0 / 3.0 * ca * ca * sa * sa * sb * cb, g + sign * FRAC_PI_3)
            - Complex64::from_polar(32.0 / 3f64.sqrt() * ca * sa.powi(3) * cb * cb * sb, -g + sign * FRAC_PI_3)
    };
    RMatrixElements { x, y, z_plus: z(1.0), z_minus: z(-1.0) }
}

pub fn r_matrix(p: &SymParams) -> CMatrix {
    r_elements(p).matrix()
}

/// Square roots of the eigenvalues of `R`, descending. Each 2x2 block is
/// solved in closed form with the small root taken from the determinant.
pub fn omega_moduli(p: &SymParams) -> [f64; 4] {
    let r = r_elements(p);
    let block = |z: Complex64| {
        let mean = 0.5 * (r.x + r.y);
        let big = mean + (0.25 * (r.x - r.y).powi(2) + z.norm_sqr()).sqrt();
        let det = (r.x * r.y - z.norm_sqr()).max(0.0);
        let small = if big > 0.0 { det / big } else { 0.0 };
        [big.sqrt(), small.sqrt()]
    };
    let mut out = [block(r.z_plus), block(r.z_minus)].concat();
    out.sort_by(|a, b| b.total_cmp(a));
    [out[0], out[1], out[2], out[3]]
}

/// `2 tau + sqrt(N^2 - sqrt(N^4 - tau^2)) + sqrt(N^2 + sqrt(N^4 - tau^2))`.
pub fn lrt_formula(tau: f64, negativity: f64) -> Result<f64> {
    let n2 = negativity * negativity;
    let radicand = n2 * n2 - tau * tau;
    if radicand < -CLIP_TOL {
        return Err(Error::NegativeRadicand(radicand));
    }
    let root = radicand.max(0.0).sqrt();
    Ok(2.0 * tau + (n2 - root).max(0.0).sqrt() + (n2 + root).sqrt())
}

pub fn lrt(p: &SymParams) -> Result<ResponseReport> {
    let tau = tangle_param(p).tangle();
    let negativity = negativity_param(p);
    let eta = lrt_formula(tau, negativity)?;
    Ok(ResponseReport { tau, negativity, omega_moduli: omega_moduli(p), eta })
}

/// Sign of `zeta_k = s * arg(w_k) / 2` in the ensemble phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZetaSign {
    Negative,
    Positive,
}

/// Sixteen equally weighted states `sqrt(1-q) Psi + sqrt(q) sum_k C_k Psi~_k`
/// with `C_k = +-(1/2) e^{i(xi + zeta_k)}`, built on the Takagi basis `Psi~`
/// of the supplied factorization of `Omega`.
pub fn ensemble_3q_from(p: &SymParams, q: f64, tk: &Takagi, sign: ZetaSign) -> Result<Ensemble> {
    check_q(q)?;
    let t = tangle_param(p);
    if t.tangle() < CLIP_TOL {
        return Err(Error::ZeroTangle);
    }
    let xi = 0.5 * t.phase();
    let s = match sign {
        ZetaSign::Negative => -0.5,
        ZetaSign::Positive => 0.5,
    };
    let noise = noise_kets();
    let rotated: Vec<CVector> = (0..4)
        .map(|l| (0..4).fold(CVector::zeros(8), |acc, k| acc + noise[k].amplitudes() * tk.u[(l, k)].conj()))
        .collect();
    let phases: Vec<Complex64> = tk.omega.iter().map(|w| Complex64::from_polar(0.5, xi + s * w.arg())).collect();
    let base = sym_state(p).amplitudes() * c64((1.0 - q).sqrt(), 0.0);
    let mut members = Vec::with_capacity(16);
    for pattern in 0..16u32 {
        let mut v = base.clone();
        for k in 0..4 {
            let sgn = if pattern >> k & 1 == 0 { 1.0 } else { -1.0 };
            v += &rotated[k] * (phases[k] * (sgn * q.sqrt()));
        }
        members.push(Member { p: 1.0 / 16.0, ket: Ket::normalized(3, v)? });
    }
    Ensemble::new(members)
}

/// Ansatz decomposition of `mix(Psi, Pi_W(1/2), q)`. Both phase conventions
/// are tried and the lower average tangle is kept.
pub fn optimal_ensemble_3q(p: &SymParams, q: f64) -> Result<Ensemble> {
    let tk = takagi(&omega_matrix(p))?;
    let neg = ensemble_3q_from(p, q, &tk, ZetaSign::Negative)?;
    let pos = ensemble_3q_from(p, q, &tk, ZetaSign::Positive)?;
    let avg = |e: &Ensemble| e.average(|k| tangle_pure(k).expect("three qubits"));
    let (a_neg, a_pos) = (avg(&neg), avg(&pos));
    if a_pos < a_neg - 1e-12 {
        warn!("positive zeta sign gives a lower average tangle ({a_pos} < {a_neg})");
        return Ok(pos);
    }
    Ok(neg)
}

/// First-order prediction `(1 - 2q) tau - (q/4) sum_k |w_k|`.
pub fn first_order_tangle(p: &SymParams, q: f64) -> f64 {
    let tau = tangle_param(p).tangle();
    (1.0 - 2.0 * q) * tau - q / 4.0 * omega_moduli(p).iter().sum::<f64>()
}

/// Lower boundary of the response cloud, reached by the GHZ family.
pub fn ghz_curve(tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::OutOfRange { name: "tau", value: tau, range: "[0, 1]" });
    }
    Ok(2.0 * tau + 2.0 * tau.sqrt())
}

/// `(tau, eta)` of `cos(a)|W̄> + sin(a)|000>`.
pub fn jcurve_point(alpha: f64) -> Result<(f64, f64)> {
    let r = lrt(&SymParams::new(alpha, 0.0, 0.0)?)?;
    Ok((r.tau, r.eta))
}

/// Moduli of a Takagi factorization, sorted descending.
pub fn takagi_moduli(m: &CMatrix) -> Result<Vec<f64>> {
    let mut v = takagi(m)?.moduli();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}
