//! ε-sweeps: solve per ε, normalise, measure, persist, judge.
//!
//! Artifacts written to the output directory:
//! - `field_eps<ε>.nsfield`: the normalised solution for each ε;
//! - `rescaled_eps<ε>.nsfield` when rescaling is enabled;
//! - `summary.csv`: one row per ε (first line is a `#` timestamp comment);
//! - `starts.csv`: every start's energy when more than one start is used;
//! - `exploratory.csv`: rescaling and limit-profile measurements;
//! - `verdict.txt`: one line per enabled check plus the overall verdict.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::diagnostics::{
    concentration_ratios, limit_profile_compare, normalize_translation, psi_identity_check,
    rescale, rescaled_grid, rescaled_residual, ConcentrationReport,
};
use crate::error::{Error, Result};
use crate::grid::{restrict_integrals, Field, Grid, Region};
use crate::potential::{PotentialVariant, ProblemSpec};
use crate::solver::{
    random_starts, solve_least_energy, solve_starts, InitialGuess, SolveResult, SolveStatus,
    SolverOptions,
};

use super::config::{Check, ExperimentConfig};
use super::field_io::{load_field, save_field};

pub const SUMMARY_COLUMNS: &str = "epsilon,p,N,L,n,energy,h1_norm_omega,residual_rel,ratio_h1,ratio_lp,global_ratio_h1,global_ratio_lp,shift,converged";
pub const EXPLORATORY_COLUMNS: &str = "epsilon,rescaled_residual,rescaled_max,limit_grad_rel,limit_lp_rel,lp_outside_u";

/// Energy and status of one start.
#[derive(Debug, Clone)]
pub struct StartRecord {
    pub index: usize,
    pub center: Vec<f64>,
    pub energy: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct Exploratory {
    pub rescaled_residual: f64,
    pub rescaled_max: f64,
    /// `None` when the limit comparison is off or unsupported for N.
    pub limit: Option<(f64, f64)>,
    pub limit_note: Option<String>,
    pub lp_outside_u: f64,
}

#[derive(Debug, Clone)]
pub struct EntryData {
    pub solve: SolveResult,
    pub normalized: Field,
    pub shift: Vec<i64>,
    pub h1_norm_omega: f64,
    pub report: Option<ConcentrationReport>,
    pub exploratory: Option<Exploratory>,
    pub starts: Vec<StartRecord>,
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub cells_per_axis: usize,
    pub outcome: std::result::Result<EntryData, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictState {
    Pass,
    Fail,
    /// Could not be evaluated (for instance a single ε for a trend check).
    Skip,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub check: Check,
    pub state: VerdictState,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub entries: Vec<SweepEntry>,
    pub verdicts: Vec<Verdict>,
    /// No enabled check failed and every entry produced a solution.
    pub passed: bool,
}

impl SweepOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the sweep described by `config`, with at most `threads` ε-entries in
/// flight (`None`: one per core). Artifacts go to `config.out_dir`.
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepOutcome> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let init_field = match &config.init_file {
        Some(path) => Some(load_field(path)?.field),
        None => None,
    };

    let run_entry = |&epsilon: &f64| -> Result<SweepEntry> {
        let grid = config.grid(epsilon)?;
        let outcome = solve_entry(config, epsilon, &grid, init_field.as_ref()).map_err(|e| e.to_string());
        Ok(SweepEntry {
            epsilon,
            cells_per_axis: grid.cells_per_axis(),
            outcome,
        })
    };

    #[cfg(feature = "parallel")]
    let entries: Vec<SweepEntry> = {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = threads {
            builder = builder.num_threads(k.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot start thread pool: {e}")))?;
        pool.install(|| config.epsilons.par_iter().map(run_entry).collect::<Result<Vec<_>>>())?
    };
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<SweepEntry> = {
        let _ = threads;
        config.epsilons.iter().map(run_entry).collect::<Result<Vec<_>>>()?
    };

    let verdicts = judge(config, &entries);
    let passed = entries.iter().all(|e| e.outcome.is_ok())
        && verdicts.iter().all(|v| v.state != VerdictState::Fail);
    let outcome = SweepOutcome {
        entries,
        verdicts,
        passed,
    };

    write_text(&out.join("summary.csv"), &summary_csv(config, &outcome.entries, timestamp()))?;
    if config.starts > 1 {
        write_text(&out.join("starts.csv"), &starts_csv(&outcome.entries))?;
    }
    if config.modes.rescale || config.modes.limit_compare {
        write_text(&out.join("exploratory.csv"), &exploratory_csv(&outcome.entries))?;
    }
    write_text(&out.join("verdict.txt"), &verdict_text(&outcome))?;
    Ok(outcome)
}

pub fn field_file_name(prefix: &str, epsilon: f64) -> String {
    format!("{prefix}_eps{epsilon}.nsfield")
}

fn solve_entry(
    config: &ExperimentConfig,
    epsilon: f64,
    grid: &Grid,
    init_field: Option<&Field>,
) -> Result<EntryData> {
    let spec = config.spec(epsilon)?;
    let opts = config.solver.clone();
    let base = match init_field {
        Some(f) => {
            grid.check_same(f.grid())?;
            InitialGuess::Field(f.clone())
        }
        None => opts.init.clone(),
    };
    let (solve, starts) = if config.starts == 1 {
        (solve_least_energy(&spec, grid, &SolverOptions { init: base, ..opts })?, Vec::new())
    } else {
        solve_many(&spec, grid, &opts, base, config.starts)?
    };

    let (normalized, shift) = normalize_translation(&solve.u, &config.window)?;
    save_field(
        &config.out_dir.join(field_file_name("field", epsilon)),
        &normalized,
        spec.p,
        spec.epsilon,
        spec.variant,
    )?;
    let omega = Region::cube(&vec![0.0; grid.dim()], config.window.omega_half_width);
    let h1_norm_omega = restrict_integrals(&normalized, &omega, spec.p).h1.sqrt();
    let report = if config.modes.concentrate {
        Some(concentration_ratios(&normalized, &spec, &config.window)?)
    } else {
        None
    };
    let exploratory = if config.modes.rescale || config.modes.limit_compare {
        Some(explore(config, &spec, grid, &normalized)?)
    } else {
        None
    };
    Ok(EntryData {
        solve,
        normalized,
        shift,
        h1_norm_omega,
        report,
        exploratory,
        starts,
    })
}

/// Multi-start with a fallback: the converged result of least energy if any
/// start converged, else the least-energy result that came back at all.
fn solve_many(
    spec: &ProblemSpec,
    grid: &Grid,
    opts: &SolverOptions,
    base: InitialGuess,
    count: usize,
) -> Result<(SolveResult, Vec<StartRecord>)> {
    let mut guesses = vec![base.clone()];
    if let InitialGuess::Bump {
        center,
        amplitude,
        width,
    } = &base
    {
        for c in random_starts(center, count - 1, opts.seed) {
            guesses.push(InitialGuess::Bump {
                center: c,
                amplitude: *amplitude,
                width: *width,
            });
        }
    } else {
        let origin = vec![0.0; grid.dim()];
        guesses.extend(random_starts(&origin, count - 1, opts.seed).into_iter().map(InitialGuess::bump_at));
    }
    let results = solve_starts(spec, grid, opts, &guesses);
    let records = guesses
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(index, (g, r))| StartRecord {
            index,
            center: match g {
                InitialGuess::Bump { center, .. } => center.clone(),
                InitialGuess::Field(_) => Vec::new(),
            },
            energy: r.as_ref().ok().map(|s| s.energy.total),
            status: match r {
                Ok(s) => s.status.label().to_string(),
                Err(e) => format!("error: {e}"),
            },
        })
        .collect();
    let mut ok: Vec<SolveResult> = results.into_iter().filter_map(|r| r.ok()).collect();
    if ok.is_empty() {
        return Err(Error::AllStartsFailed { attempts: count });
    }
    let any_converged = ok.iter().any(|r| r.converged);
    ok.retain(|r| r.converged || !any_converged);
    let best = ok
        .into_iter()
        .reduce(|a, b| if b.energy.total < a.energy.total { b } else { a })
        .expect("nonempty");
    Ok((best, records))
}

fn explore(config: &ExperimentConfig, spec: &ProblemSpec, grid: &Grid, u: &Field) -> Result<Exploratory> {
    let target = rescaled_grid(grid, spec.epsilon)?;
    let v = rescale(u, spec, &target);
    let rescaled_spec = spec.rescaled()?;
    if config.modes.rescale {
        save_field(
            &config.out_dir.join(field_file_name("rescaled", spec.epsilon)),
            &v,
            rescaled_spec.p,
            rescaled_spec.epsilon,
            rescaled_spec.variant,
        )?;
    }
    let (limit, limit_note) = if !config.modes.limit_compare {
        (None, None)
    } else if spec.dim < 3 {
        (None, Some(Error::DimensionUnsupported(spec.dim).to_string()))
    } else {
        let limit_spec = ProblemSpec::new(spec.dim, spec.p, 0.0, PotentialVariant::LimitSingleBall)?;
        let opts = SolverOptions {
            init: InitialGuess::bump_at(vec![0.0; spec.dim]),
            ..config.solver.clone()
        };
        match solve_least_energy(&limit_spec, &target, &opts) {
            Ok(w) => (Some(limit_profile_compare(&v, &w.u, spec.p)?), Some(w.status.label().to_string())),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let u_box = Region::Box {
        lo: config.window.u_lo.clone(),
        hi: config.window.u_hi.clone(),
    };
    let inside = restrict_integrals(u, &u_box, spec.p).lp;
    let total = restrict_integrals(u, &Region::Whole, spec.p).lp;
    Ok(Exploratory {
        rescaled_residual: rescaled_residual(&v, &rescaled_spec),
        rescaled_max: v.max_abs(),
        limit,
        limit_note,
        lp_outside_u: if total > 0.0 { 1.0 - inside / total } else { 0.0 },
    })
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" < ")
}

fn judge(config: &ExperimentConfig, entries: &[SweepEntry]) -> Vec<Verdict> {
    let ok: Vec<&EntryData> = entries.iter().filter_map(|e| e.outcome.as_ref().ok()).collect();
    let complete = ok.len() == entries.len();
    let mut verdicts = Vec::new();
    for &check in &config.checks {
        if !config.check_enabled(check) {
            continue;
        }
        let (state, detail) = match check {
            Check::MonotoneRatios => {
                let reports: Vec<&ConcentrationReport> = ok.iter().filter_map(|d| d.report.as_ref()).collect();
                if !config.modes.concentrate {
                    (VerdictState::Skip, "concentrate mode is off".to_string())
                } else if !complete {
                    (VerdictState::Fail, "some entries failed".to_string())
                } else if reports.len() < 2 {
                    (VerdictState::Skip, "needs at least two epsilons".to_string())
                } else {
                    let h1: Vec<f64> = reports.iter().map(|r| r.ratio_h1).collect();
                    let lp: Vec<f64> = reports.iter().map(|r| r.ratio_lp).collect();
                    let pass = strictly_increasing(&h1) && strictly_increasing(&lp);
                    (
                        if pass { VerdictState::Pass } else { VerdictState::Fail },
                        format!("ratio_h1 {} ; ratio_lp {}", list(&h1), list(&lp)),
                    )
                }
            }
            Check::BlowUp => {
                if !complete {
                    (VerdictState::Fail, "some entries failed".to_string())
                } else if ok.len() < 2 {
                    (VerdictState::Skip, "needs at least two epsilons".to_string())
                } else {
                    let norms: Vec<f64> = ok.iter().map(|d| d.h1_norm_omega).collect();
                    (
                        if strictly_increasing(&norms) { VerdictState::Pass } else { VerdictState::Fail },
                        format!("h1_norm_omega {}", list(&norms)),
                    )
                }
            }
            Check::PsiIdentity => psi_verdict(config, entries),
            Check::Residuals => {
                let bad: Vec<String> = entries
                    .iter()
                    .filter_map(|e| match &e.outcome {
                        Ok(d) if d.solve.status == SolveStatus::Converged => None,
                        Ok(d) => Some(format!(
                            "eps={} {} (residual {:.3e}, boundary ratio {:.3e})",
                            e.epsilon,
                            d.solve.status.label(),
                            d.solve.residual_rel,
                            d.solve.boundary_ratio
                        )),
                        Err(msg) => Some(format!("eps={} error: {msg}", e.epsilon)),
                    })
                    .collect();
                if bad.is_empty() {
                    (VerdictState::Pass, format!("{} solves converged", entries.len()))
                } else {
                    (VerdictState::Fail, bad.join("; "))
                }
            }
        };
        verdicts.push(Verdict { check, state, detail });
    }
    verdicts
}

/// Error ratio between the halved and the full resolution of the first entry.
fn psi_verdict(config: &ExperimentConfig, entries: &[SweepEntry]) -> (VerdictState, String) {
    let Some(first) = entries.first() else {
        return (VerdictState::Skip, "no entries".to_string());
    };
    let n = first.cells_per_axis;
    let (coarse, fine) = if n % 2 == 0 { (n / 2, n) } else { (n, 2 * n) };
    let grids = (
        Grid::new(config.dim, config.half_width, coarse),
        Grid::new(config.dim, config.half_width, fine),
    );
    let (Ok(a), Ok(b)) = grids else {
        return (VerdictState::Skip, "grid too coarse to halve".to_string());
    };
    if config.half_width - 1.0 < 0.5 {
        return (VerdictState::Skip, "annulus 0.5 ≤ |x| ≤ L−1 is empty".to_string());
    }
    let (ea, eb) = (psi_identity_check(&a), psi_identity_check(&b));
    let factor = ea / eb;
    let pass = (3.5..=4.5).contains(&factor);
    (
        if pass { VerdictState::Pass } else { VerdictState::Fail },
        format!("n={coarse}: {ea:.4e}, n={fine}: {eb:.4e}, factor {factor:.4} (want 3.5..4.5)"),
    )
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Shortest round-trip text; exponent form outside [1e-3, 1e6).
fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub fn summary_csv(config: &ExperimentConfig, entries: &[SweepEntry], unix_time: u64) -> String {
    let mut s = format!("# generated at unix time {unix_time}\n{SUMMARY_COLUMNS}\n");
    for e in entries {
        let lead = format!(
            "{},{},{},{},{}",
            e.epsilon, config.p, config.dim, config.half_width, e.cells_per_axis
        );
        match &e.outcome {
            Ok(d) => {
                let r = d.report.as_ref();
                let shift = d.shift.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
                let _ = writeln!(
                    s,
                    "{lead},{},{},{},{},{},{},{},{shift},{}",
                    num(d.solve.energy.total),
                    num(d.h1_norm_omega),
                    num(d.solve.residual_rel),
                    opt(r.map(|r| r.ratio_h1)),
                    opt(r.map(|r| r.ratio_lp)),
                    opt(r.map(|r| r.global_ratio_h1)),
                    opt(r.map(|r| r.global_ratio_lp)),
                    d.solve.status.label()
                );
            }
            Err(_) => {
                let _ = writeln!(s, "{lead},,,,,,,,,error");
            }
        }
    }
    s
}

fn starts_csv(entries: &[SweepEntry]) -> String {
    let mut s = String::from("epsilon,start,center,energy,status\n");
    for e in entries {
        if let Ok(d) = &e.outcome {
            for st in &d.starts {
                let center = st.center.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
                let _ = writeln!(s, "{},{},{center},{},{}", e.epsilon, st.index, opt(st.energy), st.status.replace(',', ";"));
            }
        }
    }
    s
}

fn exploratory_csv(entries: &[SweepEntry]) -> String {
    let mut s = format!("{EXPLORATORY_COLUMNS},note\n");
    for e in entries {
        match e.outcome.as_ref().ok().and_then(|d| d.exploratory.as_ref()) {
            Some(x) => {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    e.epsilon,
                    num(x.rescaled_residual),
                    num(x.rescaled_max),
                    opt(x.limit.map(|l| l.0)),
                    opt(x.limit.map(|l| l.1)),
                    num(x.lp_outside_u),
                    x.limit_note.as_deref().unwrap_or("").replace(',', ";")
                );
            }
            None => {
                let _ = writeln!(s, "{},,,,,,error", e.epsilon);
            }
        }
    }
    s
}

pub fn verdict_text(outcome: &SweepOutcome) -> String {
    let mut s = String::new();
    for v in &outcome.verdicts {
        let state = match v.state {
            VerdictState::Pass => "PASS",
            VerdictState::Fail => "FAIL",
            VerdictState::Skip => "SKIP",
        };
        let _ = writeln!(s, "{} {state} {}", v.check.name(), v.detail);
    }
    let failed: Vec<String> = outcome
        .entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().err().map(|m| format!("eps={} {m}", e.epsilon)))
        .collect();
    if !failed.is_empty() {
        let _ = writeln!(s, "entries FAIL {}", failed.join("; "));
    }
    let _ = writeln!(s, "overall {}", if outcome.passed { "PASS" } else { "FAIL" });
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
