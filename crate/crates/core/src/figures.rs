//! Row data for the three sweeps: response cloud, average decay rates and
//! critical curves.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::critical::{critical_curve, critical_q, is_convex, min_slope_change, CurvePoint, Family, NormalForm};
use crate::error::Result;
use crate::response::{ghz_curve, lrt};
use crate::states::SymParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tag {
    #[serde(rename = "cloud")]
    Cloud,
    G,
    J,
}

impl Tag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::Cloud => "cloud",
            Tag::G => "G",
            Tag::J => "J",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub negativity: f64,
    pub eta: f64,
    pub family: Tag,
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn response_row(p: SymParams, family: Tag) -> Result<ResponseRow> {
    let r = lrt(&p)?;
    Ok(ResponseRow { alpha: p.alpha, beta: p.beta, gamma: p.gamma, tau: r.tau, negativity: r.negativity, eta: r.eta, family })
}

/// Cloud of symmetric states (closed lattice of `grid^3` points plus
/// `grid^3` seeded random points) followed by the G and J boundary curves.
pub fn fig1(grid: usize, seed: u64) -> Result<Vec<ResponseRow>> {
    let grid = grid.max(2);
    let mut params = Vec::new();
    for &a in &lattice(0.0, FRAC_PI_2, grid) {
        for &b in &lattice(0.0, FRAC_PI_2, grid) {
            for &g in &lattice(-FRAC_PI_2, FRAC_PI_2, grid) {
                params.push((SymParams::new(a, b, g)?, Tag::Cloud));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..grid.pow(3) {
        let p = SymParams::new(
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        )?;
        params.push((p, Tag::Cloud));
    }
    let curve = 4 * grid;
    for &b in &lattice(0.0, FRAC_PI_4, curve) {
        params.push((SymParams::new(FRAC_PI_2, b, 0.0)?, Tag::G));
    }
    for &a in &lattice(0.0, FRAC_PI_2, curve) {
        params.push((SymParams::new(a, 0.0, 0.0)?, Tag::J));
    }
    params.into_par_iter().map(|(p, t)| response_row(p, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeBin {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub min_eta: f64,
    pub count: usize,
}

/// Per-bin minimum of `eta` over `bins` equal-width bins of `tau`.
pub fn envelope(rows: &[ResponseRow], bins: usize) -> Vec<EnvelopeBin> {
    let mut out: Vec<EnvelopeBin> = (0..bins)
        .map(|i| EnvelopeBin {
            tau_lo: i as f64 / bins as f64,
            tau_hi: (i + 1) as f64 / bins as f64,
            min_eta: f64::INFINITY,
            count: 0,
        })
        .collect();
    for r in rows {
        let i = ((r.tau * bins as f64) as usize).min(bins - 1);
        out[i].min_eta = out[i].min_eta.min(r.eta);
        out[i].count += 1;
    }
    out
}

/// Largest violation of `eta >= 2 tau + 2 sqrt(tau)` over the rows.
pub fn envelope_violation(rows: &[ResponseRow]) -> f64 {
    rows.iter().map(|r| ghz_curve(r.tau.min(1.0)).unwrap_or(f64::NAN) - r.eta).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub family: Tag,
    /// `beta` for G (with `gamma = 0`), `alpha` for J.
    pub param: f64,
    pub tau: f64,
    pub p: f64,
    pub q_tilde_c: f64,
    pub q_c: f64,
    pub avg_decay: f64,
}

/// Parameters for the decay sweep: G over `beta` in `(0, pi/4]`, J over
/// `alpha` in `(0, pi/6]` with a log-spaced tail down to `1e-6`, where the
/// approach to the small-tangle limit is slow.
pub fn fig2_params(grid: usize) -> Vec<Family> {
    let grid = grid.max(2);
    let mut out: Vec<Family> =
        (1..=grid).map(|i| Family::G { beta: FRAC_PI_4 * i as f64 / grid as f64, gamma: 0.0 }).collect();
    let first = FRAC_PI_6 / grid as f64;
    let tail = grid.max(10);
    let (lo, hi) = (1e-6f64.ln(), first.ln());
    for i in 0..tail {
        out.push(Family::J { alpha: (lo + (hi - lo) * i as f64 / tail as f64).exp() });
    }
    out.extend((1..=grid).map(|i| Family::J { alpha: FRAC_PI_6 * i as f64 / grid as f64 }));
    out
}

pub fn fig2(grid: usize) -> Result<Vec<DecayRow>> {
    fig2_params(grid)
        .into_par_iter()
        .map(|f| {
            let r = critical_q(&f)?;
            let (family, param) = match f {
                Family::G { beta, .. } => (Tag::G, beta),
                Family::J { alpha } => (Tag::J, alpha),
            };
            Ok(DecayRow { family, param, tau: r.tau, p: r.p, q_tilde_c: r.q_tilde_c, q_c: r.q_c, avg_decay: r.avg_decay })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCurve {
    pub family: Tag,
    pub convex: bool,
    pub min_slope_change: f64,
    pub points: Vec<CurvePoint>,
}

pub fn fig3(grid: usize) -> Result<Vec<CriticalCurve>> {
    [(NormalForm::G, Tag::G), (NormalForm::J, Tag::J)]
        .into_iter()
        .map(|(nf, tag)| {
            let points = critical_curve(nf, grid)?;
            Ok(CriticalCurve { family: tag, convex: is_convex(&points), min_slope_change: min_slope_change(&points), points })
        })
        .collect()
}
