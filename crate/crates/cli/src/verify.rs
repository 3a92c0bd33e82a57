//! `verify` subcommand: a fast pass over the library invariants.
//!
//! Each check reduces to a nonnegative residual compared against a fixed
//! tolerance; `--tol-scale` multiplies every tolerance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tangle_core::critical::{
    characteristic_min, critical_curve, critical_qtilde, min_slope_change, optimal_ensemble_tilde, tau_tilde,
    NormalForm, SearchOptions,
};
use tangle_core::figures::{envelope_violation, fig1, fig2, Tag};
use tangle_core::linalg::{c64, max_abs, takagi, trace_norm};
use tangle_core::measures::{
    concurrence_amplitudes, concurrence_wootters, convex_roof, negativity_one_rest, negativity_param, tangle_normalized,
    tangle_param, tangle_pure, RoofOptions,
};
use tangle_core::response::{
    exact_concurrence_curve, first_order_tangle, lrt, omega_expansion, omega_matrix, omega_moduli,
    optimal_ensemble_2q, optimal_ensemble_3q, r_elements,
};
use tangle_core::states::{
    apply_local_a, g_state, g_tilde, j_state, j_tilde, mix, noise_op_2q, noise_op_3q, phi, sym_state, x_for_g,
    x_for_j, SymParams,
};
use tangle_core::Result;

use crate::{Failure, SCHEMA};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Multiplier applied to every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// The two noise strengths of the Richardson slope estimate.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1e-3, 1e-4])]
    slope_q: Vec<f64>,
    /// Seed for the randomly sampled states.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    schema: &'static str,
    tol_scale: f64,
    seed: u64,
    checks: &'a [CheckRecord],
    failed: Vec<&'static str>,
    pass: bool,
}

struct Check {
    name: &'static str,
    tolerance: f64,
    run: fn(&Context) -> Result<f64>,
}

struct Context {
    seed: u64,
    slope_q: (f64, f64),
}

impl Context {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> Result<SymParams> {
    SymParams::new(
        rng.random_range(0.0..FRAC_PI_2),
        rng.random_range(0.0..FRAC_PI_2),
        rng.random_range(-FRAC_PI_2..FRAC_PI_2),
    )
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn wootters_curve(theta: f64, q: f64) -> Result<f64> {
    concurrence_wootters(&mix(&phi(theta)?, &noise_op_2q(), q)?)
}

fn wootters_closed_form(_: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &theta in &uniform(0.05, FRAC_PI_4, 10) {
        for &q in &uniform(0.0, 0.9, 10) {
            worst = worst.max((wootters_curve(theta, q)? - exact_concurrence_curve(theta, q)?).abs());
        }
    }
    Ok(worst)
}

fn lrc_slope(ctx: &Context) -> Result<f64> {
    let (h1, h2) = ctx.slope_q;
    let mut worst: f64 = 0.0;
    for &theta in &uniform(0.05, FRAC_PI_4, 8) {
        let c0 = wootters_curve(theta, 0.0)?;
        let s1 = (c0 - wootters_curve(theta, h1)?) / h1;
        let s2 = (c0 - wootters_curve(theta, h2)?) / h2;
        let richardson = (h1 * s2 - h2 * s1) / (h1 - h2);
        worst = worst.max((richardson - ((2.0 * theta).sin() + 1.0)).abs());
    }
    Ok(worst)
}

fn r_identities(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let p = random_params(&mut rng)?;
        let r = r_elements(&p);
        let tau = tangle_param(&p).tangle();
        let n = negativity_param(&p);
        worst = worst.max((r.x + r.y - 8.0 * n * n).abs());
        for z in [r.z_plus, r.z_minus] {
            worst = worst.max((r.x * r.y - z.norm_sqr() - 16.0 * tau * tau).abs());
        }
    }
    Ok(worst)
}

fn omega_spectrum(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_params(&mut rng)?;
        let (omega, _) = omega_expansion(&p);
        let mut sv: Vec<f64> = omega.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in sv.iter().zip(omega_moduli(&p)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn omega_linear_term(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (_, linear) = omega_expansion(&random_params(&mut rng)?);
        worst = linear.iter().map(|l| l.norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

fn takagi_reconstruction(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let omega = omega_matrix(&random_params(&mut rng)?);
        worst = worst.max(max_abs(&(takagi(&omega)?.reconstruct() - &omega)));
    }
    Ok(worst)
}

fn lrt_spectrum(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let r = lrt(&random_params(&mut rng)?)?;
        worst = worst.max((r.eta - 2.0 * r.tau - r.omega_moduli.iter().sum::<f64>() / 4.0).abs());
    }
    Ok(worst)
}

fn lrt_fixed_points(_: &Context) -> Result<f64> {
    let cases = [
        (SymParams::ghz(), 4.0),
        (SymParams::new(0.0, 0.0, 0.0)?, 4.0 / 3.0),
        (SymParams::new(FRAC_PI_2, 0.0, 0.0)?, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (p, eta) in cases {
        worst = worst.max((lrt(&p)?.eta - eta).abs());
    }
    Ok(worst)
}

fn negativity_cuts(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_params(&mut rng)?;
        let k = sym_state(&p);
        for cut in 0..3 {
            worst = worst.max((negativity_one_rest(&k, cut)? - negativity_param(&p)).abs());
        }
    }
    Ok(worst)
}

fn ensemble_2q_reconstruction(_: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(theta, q) in &[(FRAC_PI_4, 0.1), (0.1, 0.02), (0.5, 0.2), (0.3, 0.7)] {
        let e = optimal_ensemble_2q(theta, q)?;
        let rho = mix(&phi(theta)?, &noise_op_2q(), q)?;
        worst = worst.max(trace_norm(&(e.density() - rho.rho()))?);
    }
    Ok(worst)
}

fn ensemble_3q_reconstruction(ctx: &Context) -> Result<f64> {
    let mut rng = ctx.rng(9);
    let noise = noise_op_3q(0.5)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_params(&mut rng)?;
        let q = rng.random_range(0.0..0.1);
        let e = optimal_ensemble_3q(&p, q)?;
        let rho = mix(&sym_state(&p), &noise, q)?;
        worst = worst.max(trace_norm(&(e.density() - rho.rho()))?);
    }
    Ok(worst)
}

/// Relative deviation of the O(q^2) ratio at `q = 1e-2` and `1e-3` from 100.
fn ansatz_second_order(_: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in [SymParams::ghz(), SymParams::new(std::f64::consts::PI / 3.0, std::f64::consts::PI / 5.0, 0.3)?] {
        let excess = |q: f64| -> Result<f64> {
            let avg = optimal_ensemble_3q(&p, q)?.average(|k| tangle_pure(k).expect("three qubits"));
            Ok(avg - first_order_tangle(&p, q))
        };
        worst = worst.max((excess(1e-2)? / excess(1e-3)? / 100.0 - 1.0).abs());
    }
    Ok(worst)
}

fn closed_form_vs_search(_: &Context) -> Result<f64> {
    let mids = [0.15, 0.5, 0.85];
    let mut worst: f64 = 0.0;
    for nf in [NormalForm::G, NormalForm::J] {
        for &qt in &mids {
            for &p in &mids {
                let (brute, _) = characteristic_min(nf, qt, p, &SearchOptions::default())?;
                worst = worst.max((brute - tau_tilde(nf, qt, p)?).abs());
            }
        }
    }
    Ok(worst)
}

fn six_state_reconstruction(_: &Context) -> Result<f64> {
    let grid = [0.1, 0.4, 0.6, 0.9];
    let mut worst: f64 = 0.0;
    for nf in [NormalForm::G, NormalForm::J] {
        for &qt in &grid {
            for &p in &grid {
                let e = optimal_ensemble_tilde(nf, qt, p)?;
                let target = nf.ket().projector() * c64(1.0 - qt, 0.0) + noise_op_3q(p)?.rho() * c64(qt, 0.0);
                worst = worst.max(trace_norm(&(e.density() - target))?);
            }
        }
    }
    Ok(worst)
}

fn filter_proportionality(_: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &beta in &[0.2, 0.7, 1.3] {
        for &gamma in &[-1.2, 0.0, 0.8] {
            let g = g_state(beta, gamma)?;
            let tau = tangle_pure(&g)?;
            let ag = apply_local_a(&g, x_for_g(beta, gamma)?)?;
            let expect = g_tilde().amplitudes() * Complex64::from_polar(tau.powf(0.25), gamma / 2.0);
            worst = worst.max((ag - expect).norm());
        }
    }
    for &alpha in &[0.1, FRAC_PI_6, 1.4] {
        let j = j_state(alpha)?;
        let tau = tangle_pure(&j)?;
        let aj = apply_local_a(&j, x_for_j(alpha)?)?;
        worst = worst.max((aj - j_tilde().amplitudes() * c64(tau.powf(0.25), 0.0)).norm());
    }
    Ok(worst)
}

fn critical_point_g(_: &Context) -> Result<f64> {
    Ok((critical_qtilde(NormalForm::G, 0.5)? - 0.25).abs())
}

/// Largest negative change of slope along either critical curve.
fn critical_convexity(_: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for nf in [NormalForm::G, NormalForm::J] {
        worst = worst.max(-min_slope_change(&critical_curve(nf, 41)?));
    }
    Ok(worst)
}

fn response_envelope(ctx: &Context) -> Result<f64> {
    Ok(envelope_violation(&fig1(8, ctx.seed)?).max(0.0))
}

/// Relative distance of the extreme decay rates from 4 (G) and 4/3 (J).
fn decay_endpoints(_: &Context) -> Result<f64> {
    let rows = fig2(20)?;
    let g = rows.iter().filter(|r| r.family == Tag::G).max_by(|a, b| a.tau.total_cmp(&b.tau));
    let j = rows.iter().filter(|r| r.family == Tag::J).min_by(|a, b| a.tau.total_cmp(&b.tau));
    let (g, j) = (g.expect("G rows"), j.expect("J rows"));
    Ok(((g.avg_decay - 4.0).abs() / 4.0).max((j.avg_decay - 4.0 / 3.0).abs() * 0.75))
}

fn roof_two_qubit(ctx: &Context) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, &(theta, q)) in [(FRAC_PI_4, 0.1), (0.3, 0.05), (0.6, 0.5)].iter().enumerate() {
        let rho = mix(&phi(theta)?, &noise_op_2q(), q)?;
        let opts = RoofOptions { restarts: 16, ..RoofOptions::with_seed(ctx.seed + i as u64) };
        let roof = convex_roof(&rho, concurrence_amplitudes, &opts)?;
        worst = worst.max((roof.value - concurrence_wootters(&rho)?).abs());
    }
    Ok(worst)
}

/// Amount by which the oracle exceeds the ansatz average for GHZ at `q = 0.01`.
fn roof_three_qubit(ctx: &Context) -> Result<f64> {
    let p = SymParams::ghz();
    let q = 0.01;
    let rho = mix(&sym_state(&p), &noise_op_3q(0.5)?, q)?;
    let opts = RoofOptions { restarts: 8, ..RoofOptions::with_seed(ctx.seed) };
    let roof = convex_roof(&rho, tangle_normalized, &opts)?;
    let ansatz = optimal_ensemble_3q(&p, q)?.average(|k| tangle_pure(k).expect("three qubits"));
    Ok((roof.value - ansatz).max(0.0))
}

const CHECKS: &[Check] = &[
    Check { name: "wootters_closed_form", tolerance: 1e-10, run: wootters_closed_form },
    Check { name: "lrc_slope", tolerance: 1e-5, run: lrc_slope },
    Check { name: "r_identities", tolerance: 1e-10, run: r_identities },
    Check { name: "omega_spectrum", tolerance: 1e-8, run: omega_spectrum },
    Check { name: "omega_linear_term", tolerance: 1e-10, run: omega_linear_term },
    Check { name: "takagi_reconstruction", tolerance: 1e-8, run: takagi_reconstruction },
    Check { name: "lrt_spectrum", tolerance: 1e-10, run: lrt_spectrum },
    Check { name: "lrt_fixed_points", tolerance: 1e-10, run: lrt_fixed_points },
    Check { name: "negativity_cuts", tolerance: 1e-10, run: negativity_cuts },
    Check { name: "ensemble_2q_reconstruction", tolerance: 1e-10, run: ensemble_2q_reconstruction },
    Check { name: "ensemble_3q_reconstruction", tolerance: 1e-10, run: ensemble_3q_reconstruction },
    Check { name: "ansatz_second_order", tolerance: 0.2, run: ansatz_second_order },
    Check { name: "closed_form_vs_search", tolerance: 1e-8, run: closed_form_vs_search },
    Check { name: "six_state_reconstruction", tolerance: 1e-10, run: six_state_reconstruction },
    Check { name: "filter_proportionality", tolerance: 1e-10, run: filter_proportionality },
    Check { name: "critical_point_g", tolerance: 1e-10, run: critical_point_g },
    Check { name: "critical_convexity", tolerance: 1e-9, run: critical_convexity },
    Check { name: "response_envelope", tolerance: 1e-9, run: response_envelope },
    Check { name: "decay_endpoints", tolerance: 1e-2, run: decay_endpoints },
    Check { name: "roof_two_qubit", tolerance: 1e-4, run: roof_two_qubit },
    Check { name: "roof_three_qubit", tolerance: 1e-4, run: roof_three_qubit },
];

/// A check passes when its residual is strictly below the scaled tolerance,
/// so a zero scale fails every check.
fn run_checks(ctx: &Context, tol_scale: f64) -> Vec<CheckRecord> {
    CHECKS
        .iter()
        .map(|c| {
            let tolerance = c.tolerance * tol_scale;
            let residual = (c.run)(ctx).unwrap_or_else(|e| {
                log::error!("{}: {e}", c.name);
                f64::NAN
            });
            CheckRecord { name: c.name, residual, tolerance, pass: residual < tolerance }
        })
        .collect()
}

pub fn cmd_verify(args: &VerifyArgs) -> std::result::Result<(), Failure> {
    if !args.tol_scale.is_finite() || args.tol_scale < 0.0 {
        return Err(Failure::Usage(format!("--tol-scale must be finite and nonnegative, got {}", args.tol_scale)));
    }
    let (h1, h2) = (args.slope_q[0], args.slope_q[1]);
    for h in [h1, h2] {
        if !(h > 0.0 && h <= 0.05) {
            return Err(Failure::Usage(format!("--slope-q values must lie in (0, 0.05], got {h}")));
        }
    }
    if h1 == h2 {
        return Err(Failure::Usage("--slope-q values must differ".into()));
    }
    let records = run_checks(&Context { seed: args.seed, slope_q: (h1, h2) }, args.tol_scale);
    let failed: Vec<&'static str> = records.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    let json = VerifyJson {
        schema: SCHEMA,
        tol_scale: args.tol_scale,
        seed: args.seed,
        checks: &records,
        failed: failed.clone(),
        pass: failed.is_empty(),
    };
    // NaN residuals print as null.
    println!("{}", serde_json::to_string_pretty(&json).expect("verify report serializes"));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}
