//! `roof` subcommand: numerical convex roof next to the analytic ensemble.

use std::str::FromStr;

use clap::Args;
use serde::Serialize;

use tangle_core::measures::{
    concurrence_amplitudes, concurrence_pure, concurrence_wootters, convex_roof, tangle_normalized, tangle_pure,
    RoofOptions,
};
use tangle_core::response::{optimal_ensemble_2q, optimal_ensemble_3q};
use tangle_core::states::{mix, noise_op_2q, noise_op_3q, phi, sym_state, SymParams};
use tangle_core::Error;

use crate::{compute, usage, Failure, SCHEMA};

/// Largest allowed amount by which the oracle may undercut the ansatz.
pub const GAP_TOL: f64 = 1e-4;

#[derive(Args, Debug)]
pub struct RoofArgs {
    /// `2q:THETA` or `3q:ALPHA,BETA,GAMMA`.
    #[arg(long)]
    state: StateSpec,
    /// Noise strength.
    #[arg(long, default_value_t = 0.01)]
    q: f64,
    /// Ensemble size; rank + 2 when omitted.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    #[serde(rename = "2q")]
    TwoQubit { theta: f64 },
    #[serde(rename = "3q")]
    ThreeQubit { alpha: f64, beta: f64, gamma: f64 },
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected 2q:THETA or 3q:A,B,G, got {s:?}"))?;
        let values = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        match (kind.trim(), values.as_slice()) {
            ("2q", &[theta]) => Ok(StateSpec::TwoQubit { theta }),
            ("3q", &[alpha, beta, gamma]) => Ok(StateSpec::ThreeQubit { alpha, beta, gamma }),
            ("2q", _) => Err(format!("2q takes one angle, got {}", values.len())),
            ("3q", _) => Err(format!("3q takes three angles, got {}", values.len())),
            (k, _) => Err(format!("unknown state kind {k:?}")),
        }
    }
}

#[derive(Serialize)]
struct RoofJson {
    schema: &'static str,
    state: StateSpec,
    q: f64,
    m: usize,
    rank: usize,
    restarts: usize,
    seed: u64,
    /// Measure of the noiseless state.
    pure: f64,
    oracle: f64,
    ansatz: f64,
    /// `ansatz - oracle`.
    gap: f64,
    /// Closed-form value, two qubits only.
    exact: Option<f64>,
    eigen_average: f64,
    best_restart: usize,
    pass: bool,
}

pub fn cmd_roof(args: &RoofArgs) -> Result<(), Failure> {
    if args.restarts == 0 {
        return Err(Failure::Usage("--restarts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&args.q) {
        return Err(Failure::Usage(format!("--q = {} outside [0, 1]", args.q)));
    }
    let opts = RoofOptions { m: args.m, restarts: args.restarts, seed: args.seed, ..RoofOptions::default() };
    let roof_err = |e: Error| match e {
        Error::EnsembleTooSmall { .. } => usage(e),
        e => compute(e),
    };
    let (pure, roof, ansatz, exact) = match args.state {
        StateSpec::TwoQubit { theta } => {
            let k = phi(theta).map_err(usage)?;
            let rho = mix(&k, &noise_op_2q(), args.q).map_err(usage)?;
            let roof = convex_roof(&rho, concurrence_amplitudes, &opts).map_err(roof_err)?;
            let ansatz = optimal_ensemble_2q(theta, args.q).map_err(usage)?;
            let ansatz = ansatz.average(|m| concurrence_pure(m).expect("two qubits"));
            let exact = concurrence_wootters(&rho).map_err(compute)?;
            (concurrence_pure(&k).map_err(compute)?, roof, ansatz, Some(exact))
        }
        StateSpec::ThreeQubit { alpha, beta, gamma } => {
            let p = SymParams::new(alpha, beta, gamma).map_err(usage)?;
            let k = sym_state(&p);
            let rho = mix(&k, &noise_op_3q(0.5).map_err(compute)?, args.q).map_err(usage)?;
            let roof = convex_roof(&rho, tangle_normalized, &opts).map_err(roof_err)?;
            let ansatz = optimal_ensemble_3q(&p, args.q).map_err(usage)?;
            let ansatz = ansatz.average(|m| tangle_pure(m).expect("three qubits"));
            (tangle_pure(&k).map_err(compute)?, roof, ansatz, None)
        }
    };
    let gap = ansatz - roof.value;
    let pass = gap >= -GAP_TOL;
    let json = RoofJson {
        schema: SCHEMA,
        state: args.state,
        q: args.q,
        m: roof.m,
        rank: roof.rank,
        restarts: args.restarts,
        seed: args.seed,
        pure,
        oracle: roof.value,
        ansatz,
        gap,
        exact,
        eigen_average: roof.eigen_average,
        best_restart: roof.best_restart,
        pass,
    };
    println!("{}", serde_json::to_string_pretty(&json).expect("roof report serializes"));
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("oracle undercuts the ansatz by {:.3e} (tolerance {GAP_TOL:.0e})", -gap)))
    }
}
