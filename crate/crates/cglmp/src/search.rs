//! Numerical search over arbitrary UMBS phase settings at small d.
//!
//! The phase rules are stated, not derived; this module checks them the
//! empirical way, by multi-restart coordinate descent over all free
//! phases. phi_1 is gauge-fixed to zero (only differences within each
//! vector matter), leaving 3d parameters. The search should never beat
//! the rule value; if it ever does, the rules are wrong.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::BellMatrix;
use crate::rules::Side;
use crate::solver::{extreme_eigen, Extreme, SolverConfig};
use crate::types::{Dimension, PhaseSettings};

/// Largest d accepted by [`objective`] (a dense eigensolve runs per
/// evaluation).
pub const OBJECTIVE_CAP: usize = 12;

/// Largest d accepted by [`search`], mirroring how far the rule
/// confirmation is taken.
pub const SEARCH_CAP: usize = 9;

/// Smallest coordinate step before a restart is considered converged.
const MIN_STEP: f64 = 1e-7;

/// A search instance: which side to extremise at which dimension, and
/// the restart schedule.
#[derive(Debug, Clone, Copy)]
pub struct SearchProblem {
    d: Dimension,
    side: Side,
    restarts: usize,
    seed: u64,
}

impl SearchProblem {
    pub fn new(d: Dimension, side: Side, restarts: usize, seed: u64) -> Result<Self> {
        if d.get() > SEARCH_CAP {
            return Err(Error::InvalidArgument(format!(
                "search is capped at d = {SEARCH_CAP}, got {}",
                d.get()
            )));
        }
        if restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        Ok(Self {
            d,
            side,
            restarts,
            seed,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }
}

/// Best value found by one restart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartRecord {
    pub restart: usize,
    pub value: f64,
}

/// Search result: the winning phases (gauge-normalised), their value,
/// and the per-restart history.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best_phases: PhaseSettings,
    pub best_value: f64,
    pub history: Vec<RestartRecord>,
}

/// Extremal eigenvalue of the Bell matrix at the given phases: the
/// largest for the positive side, the smallest for the negative side.
pub fn objective(phases: &PhaseSettings, side: Side) -> Result<f64> {
    let d = phases.dimension();
    if d.get() > OBJECTIVE_CAP {
        return Err(Error::InvalidArgument(format!(
            "objective is capped at d = {OBJECTIVE_CAP}, got {}",
            d.get()
        )));
    }
    let b = BellMatrix::from_phases(phases, OBJECTIVE_CAP)?;
    let extreme = match side {
        Side::Positive => Extreme::Max,
        Side::Negative => Extreme::Min,
    };
    Ok(extreme_eigen(&b, extreme, SolverConfig::default())?.eigenvalue)
}

/// Objective for intermediate search points: bounded iteration budget,
/// and a non-converged solve still yields its best estimate. Candidate
/// ranking tolerates that; the winning point is re-evaluated strictly.
fn eval_lenient(phases: &PhaseSettings, side: Side) -> f64 {
    let b = BellMatrix::from_phases(phases, OBJECTIVE_CAP).expect("dimension pre-validated");
    let extreme = match side {
        Side::Positive => Extreme::Max,
        Side::Negative => Extreme::Min,
    };
    let cfg = SolverConfig {
        max_iterations: 50_000,
        ..SolverConfig::default()
    };
    match extreme_eigen(&b, extreme, cfg) {
        Ok(r) => r.eigenvalue,
        Err(Error::NotConverged { best }) => best.eigenvalue,
        Err(e) => unreachable!("validated inputs cannot fail the solver: {e}"),
    }
}

fn phases_from_params(d: usize, p: &[f64]) -> PhaseSettings {
    PhaseSettings {
        phi1: vec![0.0; d],
        phi2: p[..d].to_vec(),
        vphi1: p[d..2 * d].to_vec(),
        vphi2: p[2 * d..3 * d].to_vec(),
    }
}

/// One coordinate-descent run from a random start: greedy line walks
/// per coordinate, halving the step whenever a full sweep stalls.
fn descend(d: usize, side: Side, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let better = |a: f64, b: f64| match side {
        Side::Positive => a > b,
        Side::Negative => a < b,
    };
    let n = 3 * d;
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
    let mut value = eval_lenient(&phases_from_params(d, &p), side);
    let mut step = PI / 2.0;
    while step >= MIN_STEP {
        let mut improved = false;
        for i in 0..n {
            for dir in [step, -step] {
                // Walk while the direction keeps paying.
                loop {
                    let old = p[i];
                    p[i] = old + dir;
                    let candidate = eval_lenient(&phases_from_params(d, &p), side);
                    if better(candidate, value) {
                        value = candidate;
                        improved = true;
                    } else {
                        p[i] = old;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (p, value)
}

/// Shift each free vector so its first entry is zero and reduce to
/// [0, 2pi); pure gauge, for readable output.
fn normalise_gauge(d: usize, p: &mut [f64]) {
    for v in p.chunks_mut(d) {
        let base = v[0];
        for x in v.iter_mut() {
            *x = (*x - base).rem_euclid(TAU);
        }
    }
}

fn run_restart(problem: &SearchProblem, r: usize) -> (Vec<f64>, f64) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(problem.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    descend(problem.d.get(), problem.side, &mut rng)
}

/// Multi-restart search. Restarts run concurrently under the
/// `parallel` feature; the winner is chosen by best value with ties
/// going to the lowest restart index, so the outcome is identical
/// either way.
pub fn search(problem: &SearchProblem) -> SearchOutcome {
    let d = problem.d.get();
    #[cfg(feature = "parallel")]
    let runs: Vec<(Vec<f64>, f64)> = (0..problem.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, r))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<(Vec<f64>, f64)> = (0..problem.restarts)
        .map(|r| run_restart(problem, r))
        .collect();

    let history: Vec<RestartRecord> = runs
        .iter()
        .enumerate()
        .map(|(restart, (_, value))| RestartRecord {
            restart,
            value: *value,
        })
        .collect();
    let better = |a: f64, b: f64| match problem.side {
        Side::Positive => a > b,
        Side::Negative => a < b,
    };
    let mut best = 0;
    for r in 1..runs.len() {
        if better(runs[r].1, runs[best].1) {
            best = r;
        }
    }
    let (mut params, best_value) = runs.into_iter().nth(best).expect("restarts >= 1");
    normalise_gauge(d, &mut params);
    SearchOutcome {
        best_phases: phases_from_params(d, &params),
        best_value,
        history,
    }
}
