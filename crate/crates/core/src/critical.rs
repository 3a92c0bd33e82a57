//! Sudden-death thresholds of the GHZ-type and W-like families.
//!
//! The filter `A(x)` maps `mix(Psi, Pi_W, q)` onto `(1 - qt)|Psi~><Psi~| + qt Pi_W(p)`
//! with `Psi~` one of two normal forms, where the minimal tangle is known in
//! closed form. A vanishing tangle after filtering implies a vanishing tangle
//! before, so the zero of the closed form gives the critical noise strength.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::measures::{tangle_polynomial, tangle_pure, Ensemble, Member};
use crate::optim::{bisect, sign_changes, NelderMead};
use crate::states::{apply_local_a, g_state, g_tilde, j_state, j_tilde, noise_kets, x_for_g, x_for_j, Ket};

pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalForm {
    /// `(|000> + |111>)/sqrt2`
    G,
    /// `(|000> + |110> + |101> + |011>)/2`
    J,
}

impl NormalForm {
    pub fn ket(&self) -> Ket {
        match self {
            NormalForm::G => g_tilde(),
            NormalForm::J => j_tilde(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormalForm::G => "G",
            NormalForm::J => "J",
        }
    }
}

/// Initial pure state, interior parameters only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    G { beta: f64, gamma: f64 },
    J { alpha: f64 },
}

impl Family {
    pub fn normal_form(&self) -> NormalForm {
        match self {
            Family::G { .. } => NormalForm::G,
            Family::J { .. } => NormalForm::J,
        }
    }

    pub fn state(&self) -> Result<Ket> {
        match *self {
            Family::G { beta, gamma } => g_state(beta, gamma),
            Family::J { alpha } => j_state(alpha),
        }
    }

    pub fn x(&self) -> Result<Complex64> {
        match *self {
            Family::G { beta, gamma } => x_for_g(beta, gamma),
            Family::J { alpha } => x_for_j(alpha),
        }
    }

    pub fn tau(&self) -> Result<f64> {
        tangle_pure(&self.state()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaledParams {
    pub q_tilde: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalResult {
    pub tau: f64,
    pub p: f64,
    pub q_tilde_c: f64,
    pub q_c: f64,
    pub avg_decay: f64,
}

/// Quantities fixed by the filter: `n = |A Psi|^2`, `c = |x|^2 + |x|^-2`, and `p`.
#[derive(Debug, Clone, Copy)]
struct Filter {
    n: f64,
    c: f64,
    p: f64,
}

impl Filter {
    fn of(family: &Family) -> Result<Self> {
        let x = family.x()?;
        let n = apply_local_a(&family.state()?, x)?.norm_squared();
        let m2 = x.norm_sqr();
        let x4 = m2 * m2;
        Ok(Self { n, c: m2 + 1.0 / m2, p: x4 / (1.0 + x4) })
    }

    /// `qt = q c / (2 tr(A rho A†))` with `tr = (1 - q) n + q c / 2`.
    fn q_tilde(&self, q: f64) -> f64 {
        let tr = (1.0 - q) * self.n + 0.5 * q * self.c;
        q * self.c / (2.0 * tr)
    }

    fn q_from_tilde(&self, qt: f64) -> f64 {
        2.0 * qt * self.n / (self.c * (1.0 - qt) + 2.0 * qt * self.n)
    }
}

pub fn rescaled_params(family: &Family, q: f64) -> Result<RescaledParams> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange { name: "q", value: q, range: "[0, 1]" });
    }
    let f = Filter::of(family)?;
    Ok(RescaledParams { q_tilde: f.q_tilde(q), p: f.p })
}

/// Closed-form inverse of `q -> qt` for the given family.
pub fn q_from_q_tilde(family: &Family, q_tilde: f64) -> Result<f64> {
    Ok(Filter::of(family)?.q_from_tilde(q_tilde))
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { name, value: v, range: "[0, 1]" });
    }
    Ok(())
}

/// Unclipped closed-form minimal tangle for the G normal form.
pub fn g_bracket(qt: f64, p: f64) -> f64 {
    let s6 = 6f64.sqrt();
    let r = (1.0 - qt).sqrt();
    (9.0 * (1.0 - qt).powi(2)
        - 12.0 * (1.0 - p) * p * qt * qt
        - 8.0 * s6 * r * qt.powf(1.5) * (1.0 - p).powf(1.5)
        - 2.0 * p.sqrt() * (18.0 * (1.0 - p).sqrt() * (1.0 - qt) * qt + 4.0 * p * s6 * r * qt.powf(1.5)))
        / 9.0
}

/// Unclipped closed-form minimal tangle for the J normal form.
pub fn j_bracket(qt: f64, p: f64) -> f64 {
    let s6 = 6f64.sqrt();
    let root = ((1.0 - p) * (1.0 - qt) * qt.powi(3)).sqrt();
    (9.0 - 36.0 * qt + 3.0 * (9.0 - 4.0 * p + 4.0 * p * p) * qt * qt - 4.0 * s6 * root - 8.0 * s6 * p * root) / 9.0
}

pub fn bracket(nf: NormalForm, qt: f64, p: f64) -> f64 {
    match nf {
        NormalForm::G => g_bracket(qt, p),
        NormalForm::J => j_bracket(qt, p),
    }
}

pub fn tau_tilde_g(qt: f64, p: f64) -> Result<f64> {
    check_unit("q_tilde", qt)?;
    check_unit("p", p)?;
    Ok(g_bracket(qt, p).max(0.0))
}

pub fn tau_tilde_j(qt: f64, p: f64) -> Result<f64> {
    check_unit("q_tilde", qt)?;
    check_unit("p", p)?;
    Ok(j_bracket(qt, p).max(0.0))
}

pub fn tau_tilde(nf: NormalForm, qt: f64, p: f64) -> Result<f64> {
    match nf {
        NormalForm::G => tau_tilde_g(qt, p),
        NormalForm::J => tau_tilde_j(qt, p),
    }
}

/// The pure states `sqrt(1-qt) Psi~ + sqrt(qt) (sqrt(p)(d1 Psi1 + d2 Psi2) + sqrt(1-p)(d3 Psi3 + d4 Psi4))`
/// parameterized by `[t1, t2, f1, f2, f3, f4]` with
/// `d = (cos t1 e^{if1}, sin t1 e^{if2}, cos t2 e^{if3}, sin t2 e^{if4})`.
pub struct CharacteristicFamily {
    base: [Complex64; 8],
    noise: [[Complex64; 8]; 4],
    weights: [f64; 4],
}

impl CharacteristicFamily {
    pub fn new(nf: NormalForm, qt: f64, p: f64) -> Result<Self> {
        check_unit("q_tilde", qt)?;
        check_unit("p", p)?;
        let mut base = [c64(0.0, 0.0); 8];
        for (b, a) in base.iter_mut().zip(nf.ket().as_slice()) {
            *b = a * (1.0 - qt).sqrt();
        }
        let kets = noise_kets();
        let noise = std::array::from_fn(|k| std::array::from_fn(|i| kets[k].as_slice()[i]));
        let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
        let weights = [sp, sp, sq, sq].map(|w| w * qt.sqrt());
        Ok(Self { base, noise, weights })
    }

    pub fn vector(&self, x: &[f64]) -> [Complex64; 8] {
        let d = [
            Complex64::from_polar(x[0].cos(), x[2]),
            Complex64::from_polar(x[0].sin(), x[3]),
            Complex64::from_polar(x[1].cos(), x[4]),
            Complex64::from_polar(x[1].sin(), x[5]),
        ];
        let mut v = self.base;
        for k in 0..4 {
            let w = d[k] * self.weights[k];
            for (vi, ni) in v.iter_mut().zip(&self.noise[k]) {
                *vi += w * ni;
            }
        }
        v
    }

    pub fn amplitude(&self, x: &[f64]) -> Complex64 {
        tangle_polynomial(&self.vector(x))
    }

    pub fn tangle(&self, x: &[f64]) -> f64 {
        self.amplitude(x).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Seeds per angle in the initial grid.
    pub grid: usize,
    /// Number of best seeds refined by Nelder-Mead.
    pub polish: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid: 8, polish: 4 }
    }
}

/// Gauss-Newton on `(Re T, Im T) = 0` with minimum-norm steps.
fn newton_to_zero(fam: &CharacteristicFamily, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let h = 1e-7;
    let mut best = fam.tangle(&x);
    for _ in 0..60 {
        if best < 1e-15 {
            break;
        }
        let t = fam.amplitude(&x);
        let mut jac = [[0.0; 6]; 2];
        for i in 0..6 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let d = (fam.amplitude(&xp) - fam.amplitude(&xm)) / (2.0 * h);
            jac[0][i] = d.re;
            jac[1][i] = d.im;
        }
        // J J^T is 2x2
        let g = |a: usize, b: usize| (0..6).map(|i| jac[a][i] * jac[b][i]).sum::<f64>();
        let (a, b, d) = (g(0, 0), g(0, 1), g(1, 1));
        let det = a * d - b * b;
        if det.abs() < 1e-300 {
            break;
        }
        let y0 = (d * t.re - b * t.im) / det;
        let y1 = (-b * t.re + a * t.im) / det;
        let step: Vec<f64> = (0..6).map(|i| jac[0][i] * y0 + jac[1][i] * y1).collect();
        let mut scale = 1.0;
        let mut improved = false;
        while scale > 1e-4 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi - scale * si).collect();
            let v = fam.tangle(&trial);
            if v < best {
                best = v;
                x = trial;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (best, x)
}

/// Minimum of the tangle over the characteristic family, by grid seeding,
/// Nelder-Mead refinement and, near zero, Gauss-Newton on the amplitude.
pub fn characteristic_min(nf: NormalForm, qt: f64, p: f64, opts: &SearchOptions) -> Result<(f64, Vec<f64>)> {
    let fam = CharacteristicFamily::new(nf, qt, p)?;
    let n = opts.grid.max(2);
    let amp_nodes: Vec<f64> = (0..n).map(|i| FRAC_PI_2 * (i as f64 + 0.5) / n as f64).collect();
    let phase_nodes: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();

    let keep = opts.polish.max(1);
    let mut seeds: Vec<(f64, [f64; 6])> = Vec::with_capacity(keep + 1);
    let mut x = [0.0; 6];
    let total = n.pow(6);
    for idx in 0..total {
        let mut r = idx;
        for (slot, xi) in x.iter_mut().enumerate() {
            let i = r % n;
            r /= n;
            *xi = if slot < 2 { amp_nodes[i] } else { phase_nodes[i] };
        }
        let v = fam.tangle(&x);
        if seeds.len() < keep || v < seeds[seeds.len() - 1].0 {
            let pos = seeds.partition_point(|s| s.0 <= v);
            seeds.insert(pos, (v, x));
            seeds.truncate(keep);
        }
    }

    let nm = NelderMead { initial_step: 0.5 * PI / n as f64, x_tol: 1e-11, f_tol: 0.0, max_evals: 20_000 };
    let mut best = (f64::INFINITY, Vec::new());
    for (_, s) in &seeds {
        let m = nm.minimize(|x| fam.tangle(x), s);
        if m.value < best.0 {
            best = (m.value, m.x);
        }
    }
    if best.0 < 1e-3 {
        let polished = newton_to_zero(&fam, best.1.clone());
        if polished.0 < best.0 {
            best = polished;
        }
    }
    Ok(best)
}

fn six_state_ensemble(nf: NormalForm, qt: f64, p: f64, coefficients: &[[Complex64; 4]]) -> Result<Ensemble> {
    check_unit("q_tilde", qt)?;
    check_unit("p", p)?;
    let base = nf.ket().amplitudes() * c64((1.0 - qt).sqrt(), 0.0);
    let kets = noise_kets();
    let members = coefficients
        .iter()
        .map(|d| {
            let v = (0..4).fold(base.clone(), |acc, k| acc + kets[k].amplitudes() * d[k]);
            Ok(Member { p: 1.0 / coefficients.len() as f64, ket: Ket::normalized(3, v)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// Six equally weighted states of the G family, three mixing `Psi1` with
/// `Psi3` and three mixing `Psi2` with `Psi4`.
pub fn optimal_ensemble_g_tilde(qt: f64, p: f64) -> Result<Ensemble> {
    let (a, b) = ((qt * p).sqrt(), (qt * (1.0 - p)).sqrt());
    let z = c64(0.0, 0.0);
    let thetas = [FRAC_PI_3, PI, -FRAC_PI_3];
    let mut coeffs = Vec::with_capacity(6);
    for t in thetas {
        coeffs.push([Complex64::from_polar(a, t), z, Complex64::from_polar(b, -2.0 * FRAC_PI_3 - t), z]);
    }
    for t in thetas {
        coeffs.push([z, Complex64::from_polar(a, t), z, Complex64::from_polar(b, 2.0 * FRAC_PI_3 - t)]);
    }
    six_state_ensemble(NormalForm::G, qt, p, &coeffs)
}

/// Six equally weighted states of the J family with phases
/// `d1 = j pi/3` on `Psi2`, `pi - d1` on `Psi1`, `d3 = 2 d1 - pi/3` on `Psi4`, `-d3` on `Psi3`.
pub fn optimal_ensemble_j_tilde(qt: f64, p: f64) -> Result<Ensemble> {
    let (a, b) = ((qt * p / 2.0).sqrt(), (qt * (1.0 - p) / 2.0).sqrt());
    let coeffs: Vec<[Complex64; 4]> = (0..6)
        .map(|j| {
            let d1 = j as f64 * FRAC_PI_3;
            let d3 = 2.0 * d1 - FRAC_PI_3;
            [
                Complex64::from_polar(a, PI - d1),
                Complex64::from_polar(a, d1),
                Complex64::from_polar(b, -d3),
                Complex64::from_polar(b, d3),
            ]
        })
        .collect();
    six_state_ensemble(NormalForm::J, qt, p, &coeffs)
}

pub fn optimal_ensemble_tilde(nf: NormalForm, qt: f64, p: f64) -> Result<Ensemble> {
    match nf {
        NormalForm::G => optimal_ensemble_g_tilde(qt, p),
        NormalForm::J => optimal_ensemble_j_tilde(qt, p),
    }
}

/// Smallest `qt` where the closed-form minimal tangle reaches zero.
pub fn critical_qtilde(nf: NormalForm, p: f64) -> Result<f64> {
    check_unit("p", p)?;
    let f = |qt: f64| bracket(nf, qt, p);
    let brackets = sign_changes(f, 0.0, 1.0, 1000);
    let (lo, hi) = *brackets.first().ok_or(Error::NoRoot("minimal tangle"))?;
    bisect(f, lo, hi, ROOT_TOL, "minimal tangle")
}

/// Critical `q` of `mix(Psi, Pi_W, q)` for a family member, found by
/// bisection of `qt(q) = qt_c`.
pub fn critical_q(family: &Family) -> Result<CriticalResult> {
    let filter = Filter::of(family)?;
    let tau = family.tau()?;
    let q_tilde_c = critical_qtilde(family.normal_form(), filter.p)?;
    let g = |q: f64| filter.q_tilde(q) - q_tilde_c;
    let roots = sign_changes(g, 0.0, 1.0, 1000);
    if roots.len() > 1 {
        warn!("q -> qt is not monotone: {} crossings, using the smallest", roots.len());
    }
    let (lo, hi) = *roots.first().ok_or_else(|| Error::Inversion(format!("qt = {q_tilde_c} not reached on [0, 1]")))?;
    // relative tolerance: q_c is tiny for nearly unentangled states
    let q_c = bisect(g, lo, hi, ROOT_TOL * hi, "qt(q) - qt_c")?;
    if !(q_c > 0.0 && q_c < 1.0) {
        return Err(Error::Inversion(format!("q_c = {q_c}")));
    }
    Ok(CriticalResult { tau, p: filter.p, q_tilde_c, q_c, avg_decay: tau / q_c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub q_tilde_c: f64,
    pub x: f64,
    pub y: f64,
}

/// `n` uniform points of `p` in `[0.01, 0.99]` mapped to `(qt_c p, qt_c (1-p))`.
pub fn critical_curve(nf: NormalForm, n: usize) -> Result<Vec<CurvePoint>> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let p = 0.01 + 0.98 * i as f64 / (n - 1) as f64;
            let qt = critical_qtilde(nf, p)?;
            Ok(CurvePoint { p, q_tilde_c: qt, x: qt * p, y: qt * (1.0 - p) })
        })
        .collect()
}

/// Smallest change of slope along the curve read as `y(x)`; convex means
/// nonnegative up to rounding.
pub fn min_slope_change(curve: &[CurvePoint]) -> f64 {
    let slopes: Vec<f64> = curve.windows(2).map(|w| (w[1].y - w[0].y) / (w[1].x - w[0].x)).collect();
    slopes.windows(2).map(|s| s[1] - s[0]).fold(f64::INFINITY, f64::min)
}

pub fn is_convex(curve: &[CurvePoint]) -> bool {
    let increasing = curve.windows(2).all(|w| w[1].x > w[0].x);
    increasing && min_slope_change(curve) >= -1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_norm};
    use crate::states::{mix, noise_op_3q, rescale};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn rescaled_params_examples() {
        let g = Family::G { beta: FRAC_PI_4, gamma: 0.0 };
        let r = rescaled_params(&g, 0.2).unwrap();
        assert!((r.q_tilde - 0.2).abs() < 1e-14 && (r.p - 0.5).abs() < 1e-14);
        assert_eq!(rescaled_params(&g, 0.0).unwrap().q_tilde, 0.0);
        let g2 = Family::G { beta: FRAC_PI_4, gamma: 0.9 };
        assert!((rescaled_params(&g2, 0.3).unwrap().p - 0.5).abs() < 1e-14);
        assert!(rescaled_params(&Family::J { alpha: 0.0 }, 0.1).is_err());
    }

    #[test]
    fn rescaled_params_match_filtered_matrix() {
        for fam in [Family::G { beta: 0.4, gamma: 0.3 }, Family::J { alpha: 0.3 }, Family::J { alpha: 1.2 }] {
            let q = 0.07;
            let rho = mix(&fam.state().unwrap(), &noise_op_3q(0.5).unwrap(), q).unwrap();
            let filtered = rescale(&rho, fam.x().unwrap()).unwrap();
            let r = rescaled_params(&fam, q).unwrap();
            let target = fam.normal_form().ket().projector() * c64(1.0 - r.q_tilde, 0.0)
                + noise_op_3q(r.p).unwrap().rho() * c64(r.q_tilde, 0.0);
            assert!(max_abs(&(filtered.rho() - target)) < 1e-12);
            let back = q_from_q_tilde(&fam, r.q_tilde).unwrap();
            assert!((back - q).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_endpoints() {
        for p in [0.0, 0.3, 1.0] {
            assert!((tau_tilde_g(0.0, p).unwrap() - 1.0).abs() < 1e-15);
            assert!((tau_tilde_j(0.0, p).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(tau_tilde_g(1.0, p).unwrap(), 0.0);
        }
        assert!(tau_tilde_g(1.5, 0.5).is_err());
    }

    #[test]
    fn characteristic_min_matches_closed_forms() {
        let opts = SearchOptions { grid: 6, polish: 3 };
        for nf in [NormalForm::G, NormalForm::J] {
            assert!((characteristic_min(nf, 0.0, 0.4, &opts).unwrap().0 - 1.0).abs() < 1e-12);
            for (qt, p) in [(0.05, 0.3), (0.12, 0.7), (0.5, 0.5), (0.9, 0.2)] {
                let (brute, _) = characteristic_min(nf, qt, p, &opts).unwrap();
                let exact = tau_tilde(nf, qt, p).unwrap();
                assert!((brute - exact).abs() < 1e-8, "{nf:?} ({qt}, {p}): {brute} vs {exact}");
            }
        }
    }

    #[test]
    fn six_state_ensembles() {
        for nf in [NormalForm::G, NormalForm::J] {
            for (qt, p) in [(0.1, 0.4), (0.05, 0.8), (0.2, 0.5)] {
                let e = optimal_ensemble_tilde(nf, qt, p).unwrap();
                assert_eq!(e.len(), 6);
                let target = nf.ket().projector() * c64(1.0 - qt, 0.0) + noise_op_3q(p).unwrap().rho() * c64(qt, 0.0);
                assert!(trace_norm(&(e.density() - target)).unwrap() < 1e-10);
                let exact = tau_tilde(nf, qt, p).unwrap();
                for m in e.members() {
                    assert!((tangle_pure(&m.ket).unwrap() - exact).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn critical_values() {
        let g = critical_qtilde(NormalForm::G, 0.5).unwrap();
        assert!(g_bracket(g, 0.5).abs() < 1e-10);
        assert!((g - 0.25).abs() < 1e-10, "{g}");
        let j = critical_qtilde(NormalForm::J, 1.0).unwrap();
        assert!((j - 1.0 / 3.0).abs() < 1e-10);
        let r = critical_q(&Family::G { beta: FRAC_PI_4, gamma: 0.0 }).unwrap();
        assert!((r.q_c - r.q_tilde_c).abs() < 1e-11);
        assert!((r.avg_decay - 4.0).abs() < 1e-9);
    }

    #[test]
    fn critical_q_matches_closed_inverse() {
        for fam in [Family::G { beta: 0.3, gamma: 0.5 }, Family::J { alpha: 0.2 }, Family::J { alpha: 1e-4 }] {
            let r = critical_q(&fam).unwrap();
            let direct = q_from_q_tilde(&fam, r.q_tilde_c).unwrap();
            assert!((r.q_c - direct).abs() < 1e-10 * direct, "{fam:?}");
        }
    }

    #[test]
    fn curves_are_convex() {
        for nf in [NormalForm::G, NormalForm::J] {
            let c = critical_curve(nf, 101).unwrap();
            assert!(is_convex(&c), "{nf:?}: {}", min_slope_change(&c));
        }
    }
}
