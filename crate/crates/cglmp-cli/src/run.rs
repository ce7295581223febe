//! Command implementations on top of the library crate.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use cglmp::{
    bell_value_closed_form, bell_value_from_probabilities, classical_bounds, classical_extremes,
    entropy_ratio, extreme_eigen, noise_threshold_negative, noise_threshold_positive, objective,
    phases_from_rule, search, BellMatrix, Dimension, Extreme, PhaseRule, PhaseSettings,
    Representation, SchmidtState, SearchProblem, Side,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{DumpMatrixArgs, ReportArgs, ScanArgs, SolverOpts, VerifyArgs};
use crate::error::CliError;
use crate::grid;
use crate::record::{preserved_rows, preserved_states, Format, ScanRecord, ScanRow, CSV_HEADER};

/// One solved (d, side) pair with its extremal state.
pub struct Solved {
    pub record: ScanRecord,
    pub state: SchmidtState,
    pub representation: &'static str,
}

pub fn solve_one(d: usize, side: Side, opts: &SolverOpts) -> cglmp::Result<Solved> {
    let start = Instant::now();
    let dim = Dimension::new(d)?;
    let rule = PhaseRule::for_side(side, dim);
    let b = BellMatrix::from_rule(&rule, Representation::Auto, opts.dense_cap)?;
    let extreme = match side {
        Side::Positive => Extreme::Max,
        Side::Negative => Extreme::Min,
    };
    let result = extreme_eigen(&b, extreme, opts.config())?;
    let threshold = match side {
        Side::Positive => noise_threshold_positive(result.eigenvalue)?,
        Side::Negative => noise_threshold_negative(result.eigenvalue, dim)?,
    };
    let state = result.state()?;
    let (entropy, ratio) = entropy_ratio(&state);
    let record = ScanRecord {
        d,
        side,
        extremal_value: result.eigenvalue,
        f_min: threshold.f_min,
        violation_flag: threshold.violation,
        entropy,
        entropy_ratio: ratio,
        iterations: result.iterations,
        residual: result.residual,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Solved {
        record,
        state,
        representation: b.representation_name(),
    })
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32, CliError> {
    let solved = solve_one(args.d, args.side, &args.solver)?;
    let r = &solved.record;
    let (lower, upper) = classical_bounds(Dimension::new(args.d)?);
    let bound = match args.side {
        Side::Positive => upper,
        Side::Negative => lower,
    };
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(&format!("{k:<18}{v}\n"));
    };
    line("d", r.d.to_string());
    line("side", r.side.to_string());
    line("representation", solved.representation.to_string());
    line("extremal value", format!("{}", r.extremal_value));
    line("classical bound", format!("{bound}"));
    line(
        "violation",
        if r.violation_flag {
            "yes".into()
        } else {
            "no".into()
        },
    );
    line("F_min", format!("{}", r.f_min));
    line("entropy", format!("{}", r.entropy));
    line("entropy ratio", format!("{}", r.entropy_ratio));
    line("iterations", r.iterations.to_string());
    line("residual", format!("{:e}", r.residual));
    line("wall time", format!("{} ms", r.wall_time_ms));
    out.push_str("schmidt coefficients\n");
    let alphas = solved.state.alphas();
    let shown = if alphas.len() <= 16 {
        alphas
    } else {
        &alphas[..8]
    };
    for a in shown {
        out.push_str(&format!("  {a}\n"));
    }
    if shown.len() < alphas.len() {
        out.push_str(&format!("  ... {} more\n", alphas.len() - shown.len()));
    }
    print!("{out}");

    if let Some(path) = &args.out {
        let payload = json!({
            "d": r.d,
            "side": r.side.to_string(),
            "representation": solved.representation,
            "extremal_value": r.extremal_value,
            "classical_bound": bound,
            "f_min": r.f_min,
            "violation_flag": r.violation_flag,
            "entropy": r.entropy,
            "entropy_ratio": r.entropy_ratio,
            "iterations": r.iterations,
            "residual": r.residual,
            "wall_time_ms": r.wall_time_ms,
            "schmidt_coefficients": solved.state.alphas(),
        });
        std::fs::write(path, format!("{payload:#}\n"))?;
    }
    Ok(0)
}

pub fn cmd_dump_matrix(args: &DumpMatrixArgs) -> Result<i32, CliError> {
    if !(2..=64).contains(&args.d) {
        return Err(CliError::Usage(format!(
            "dump-matrix supports 2 <= d <= 64, got {}",
            args.d
        )));
    }
    let dim = Dimension::new(args.d)?;
    let rule = PhaseRule::for_side(args.side, dim);
    let b = BellMatrix::from_rule(&rule, Representation::Dense, 64)?;
    let mut w = writer(args.out.as_deref())?;
    writeln!(w, "# bell operator  d={}  side={}", args.d, args.side)?;
    for j in 0..args.d {
        let row: Vec<String> = (0..args.d)
            .map(|m| format!("{:>13.6}", b.element(j, m)))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(0)
}

fn writer(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `<out>.states.jsonl`, next to the scan output.
fn companion_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".states.jsonl");
    PathBuf::from(s)
}

fn state_line(d: usize, side: Side, state: &SchmidtState) -> String {
    json!({ "d": d, "side": side.to_string(), "schmidt_coefficients": state.alphas() }).to_string()
}

/// A produced row: fresh (solved this run) or preserved verbatim from
/// a resumed file.
enum Produced {
    Fresh(ScanRow, Option<String>),
    Kept(String, Option<String>),
}

pub fn cmd_scan(args: &ScanArgs) -> Result<i32, CliError> {
    let ds = grid::parse(&args.d).map_err(CliError::Usage)?;
    if let Some(&bad) = ds.iter().find(|&&d| d < 2) {
        return Err(CliError::Usage(format!(
            "dimensions must be >= 2, got {bad}"
        )));
    }
    if args.states && args.out.is_none() {
        return Err(CliError::Usage(
            "--states needs --out to name the companion file".into(),
        ));
    }
    if args.resume && args.out.is_none() {
        return Err(CliError::Usage("--resume needs --out".into()));
    }
    if args.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    configure_workers(args.workers)?;

    let sides = args.side.sides();
    let items: Vec<(usize, Side)> = ds
        .iter()
        .flat_map(|&d| sides.iter().map(move |&s| (d, s)))
        .collect();

    // Resume: keep rows (and, when requested, state lines) already on
    // disk. A key counts as done only if every requested file has it.
    let states_path = args.out.as_deref().map(companion_path);
    let mut kept_rows: HashMap<(usize, Side), String> = HashMap::new();
    let mut kept_states: HashMap<(usize, Side), String> = HashMap::new();
    if args.resume {
        let out_path = args.out.as_deref().expect("checked above");
        if out_path.exists() {
            kept_rows = preserved_rows(out_path, args.format)?;
        }
        if args.states {
            if let Some(p) = states_path.as_deref() {
                if p.exists() {
                    kept_states = preserved_states(p)?;
                }
            }
            kept_rows.retain(|k, _| kept_states.contains_key(k));
            kept_states.retain(|k, _| kept_rows.contains_key(k));
        }
    }

    let mut out = writer(args.out.as_deref())?;
    let mut states_out = match (args.states, states_path.as_deref()) {
        (true, Some(p)) => Some(BufWriter::new(File::create(p)?)),
        _ => None,
    };
    if args.format == Format::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }

    let chunk = workers_hint().max(1) * 2;
    let total = items.len();
    let mut written = 0usize;
    let mut failures = 0usize;
    for batch in items.chunks(chunk) {
        let fresh_items: Vec<(usize, Side)> = batch
            .iter()
            .copied()
            .filter(|k| !kept_rows.contains_key(k))
            .collect();
        let mut fresh = solve_batch(&fresh_items, &args.solver, args.states).into_iter();
        for key in batch {
            let produced = match kept_rows.get(key) {
                Some(line) => Produced::Kept(line.clone(), kept_states.get(key).cloned()),
                None => {
                    let (row, state) = fresh.next().expect("one solve per non-kept key");
                    Produced::Fresh(row, state)
                }
            };
            written += 1;
            match produced {
                Produced::Kept(line, state) => {
                    writeln!(out, "{line}")?;
                    if let (Some(w), Some(s)) = (states_out.as_mut(), state) {
                        writeln!(w, "{s}")?;
                    }
                }
                Produced::Fresh(row, state) => {
                    writeln!(out, "{}", row.line(args.format))?;
                    if let (Some(w), Some(s)) = (states_out.as_mut(), state.as_ref()) {
                        writeln!(w, "{s}")?;
                    }
                    if row.is_failed() {
                        failures += 1;
                    }
                    if args.progress > 0 && written.is_multiple_of(args.progress) {
                        match &row {
                            ScanRow::Done(r) => eprintln!(
                                "progress {written}/{total}: d={} side={} iterations={} residual={:e}",
                                r.d, r.side, r.iterations, r.residual
                            ),
                            ScanRow::Failed { d, side, error } => {
                                eprintln!("progress {written}/{total}: d={d} side={side} error={error}")
                            }
                        }
                    }
                }
            }
        }
        out.flush()?;
        if let Some(w) = states_out.as_mut() {
            w.flush()?;
        }
    }

    if failures > 0 {
        eprintln!("scan: {failures} of {total} solves failed; failure rows recorded");
        Ok(2)
    } else {
        Ok(0)
    }
}

fn solve_row(
    d: usize,
    side: Side,
    opts: &SolverOpts,
    want_state: bool,
) -> (ScanRow, Option<String>) {
    match solve_one(d, side, opts) {
        Ok(solved) => {
            let state = want_state.then(|| state_line(d, side, &solved.state));
            (ScanRow::Done(solved.record), state)
        }
        Err(e) => (
            ScanRow::Failed {
                d,
                side,
                error: e.to_string(),
            },
            None,
        ),
    }
}

#[cfg(feature = "parallel")]
fn solve_batch(
    items: &[(usize, Side)],
    opts: &SolverOpts,
    want_state: bool,
) -> Vec<(ScanRow, Option<String>)> {
    use rayon::prelude::*;
    items
        .par_iter()
        .map(|&(d, s)| solve_row(d, s, opts, want_state))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_batch(
    items: &[(usize, Side)],
    opts: &SolverOpts,
    want_state: bool,
) -> Vec<(ScanRow, Option<String>)> {
    items
        .iter()
        .map(|&(d, s)| solve_row(d, s, opts, want_state))
        .collect()
}

#[cfg(feature = "parallel")]
fn configure_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {w} workers: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_workers(workers: Option<usize>) -> Result<(), CliError> {
    if workers.map_or(false, |w| w > 1) {
        eprintln!("note: built without the parallel feature; scanning sequentially");
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn workers_hint() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn workers_hint() -> usize {
    1
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    if args.d_max < 2 {
        return Err(CliError::Usage(format!(
            "--d-max must be >= 2, got {}",
            args.d_max
        )));
    }
    let run_all = !(args.bounds || args.paths || args.rules);
    let mut checks: Vec<(bool, String)> = Vec::new();
    if run_all || args.bounds {
        verify_bounds(args, &mut checks)?;
    }
    if run_all || args.paths {
        verify_paths(args, &mut checks)?;
    }
    if run_all || args.rules {
        verify_rules(args, &mut checks)?;
    }
    let failed = checks.iter().filter(|(ok, _)| !ok).count();
    for (ok, line) in &checks {
        println!("{} {line}", if *ok { "PASS" } else { "FAIL" });
    }
    eprintln!("verify: {} checks, {failed} failed", checks.len());
    if failed > 0 {
        Err(CliError::Verification(failed))
    } else {
        Ok(0)
    }
}

/// Brute-force classical extremes equal the closed-form bounds,
/// exactly.
fn verify_bounds(args: &VerifyArgs, checks: &mut Vec<(bool, String)>) -> Result<(), CliError> {
    for d in 2..=args.d_max {
        let dim = Dimension::new(d)?;
        let extremes = classical_extremes(dim)?;
        let (lower, upper) = classical_bounds(dim);
        let ok = extremes.min == lower && extremes.max == upper;
        checks.push((
            ok,
            format!(
                "classical-bounds d={d} min={} max={}",
                extremes.min, extremes.max
            ),
        ));
    }
    Ok(())
}

/// Probability path, closed form, and quadratic form agree on random
/// states and phases, within 1e-9.
fn verify_paths(args: &VerifyArgs, checks: &mut Vec<(bool, String)>) -> Result<(), CliError> {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for d in 2..=args.d_max {
        let dim = Dimension::new(d)?;
        let mut max_dev = 0.0f64;
        for _ in 0..args.samples {
            let state = random_state(&mut rng, d)?;
            let phases = random_phases(&mut rng, dim)?;
            let slow = bell_value_from_probabilities(&state, &phases)?;
            let closed = bell_value_closed_form(&state, &phases)?;
            let quad = BellMatrix::from_phases(&phases, d)?.quadratic_form(&state)?;
            max_dev = max_dev
                .max((slow - closed).abs())
                .max((closed - quad).abs());
        }
        let ok = max_dev < TOL;
        checks.push((
            ok,
            format!(
                "paths d={d} samples={} max_deviation={max_dev:.2e}",
                args.samples
            ),
        ));
    }
    Ok(())
}

/// Multi-restart search never beats the fixed rule by more than 1e-6.
fn verify_rules(args: &VerifyArgs, checks: &mut Vec<(bool, String)>) -> Result<(), CliError> {
    const TOL: f64 = 1e-6;
    for d in 2..=args.d_max {
        let dim = Dimension::new(d)?;
        for side in [Side::Positive, Side::Negative] {
            let rule_value = objective(&phases_from_rule(&PhaseRule::for_side(side, dim)), side)?;
            let problem = SearchProblem::new(dim, side, args.restarts, args.seed)?;
            let found = search(&problem).best_value;
            let excess = match side {
                Side::Positive => found - rule_value,
                Side::Negative => rule_value - found,
            };
            let ok = excess <= TOL;
            checks.push((
                ok,
                format!("rules d={d} side={side} rule={rule_value:.9} search={found:.9} excess={excess:.2e}"),
            ));
        }
    }
    Ok(())
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> cglmp::Result<SchmidtState> {
    loop {
        let raw: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        if raw.iter().map(|a| a * a).sum::<f64>() > 1e-6 {
            return SchmidtState::from_unnormalized(&raw);
        }
    }
}

fn random_phases(rng: &mut ChaCha8Rng, d: Dimension) -> cglmp::Result<PhaseSettings> {
    let mut vector = |_| {
        (0..d.get())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect()
    };
    let (a, b, c, e): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) =
        (vector(0), vector(1), vector(2), vector(3));
    PhaseSettings::new(a, b, c, e)
}
