use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lattice_nls::diagnostics::{
    concentration_ratios, normalize_translation, rescale, rescaled_grid, rescaled_residual, CellWindow,
};
use lattice_nls::harness::sweep::{field_file_name, verdict_text};
use lattice_nls::harness::{load_field, parse_config_with_overrides, run_sweep, save_field, ExperimentConfig, Modes};
use lattice_nls::potential::ProblemSpec;

#[derive(Parser)]
#[command(name = "lnls", version, about = "Least-energy solutions on a lattice of self-focusing balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment configuration (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` from the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace one config entry, e.g. `--override n=128`
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Maximum number of ε-values solved at once
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct WindowArgs {
    #[arg(long, default_value_t = 0.625)]
    omega_half_width: f64,
    #[arg(long, default_value_t = 1.6)]
    u_half_width: f64,
    #[arg(long, default_value_t = 0.45)]
    delta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for every ε and write the fields and summary.csv
    Solve(Common),
    /// Run the modes and checks named in the config
    Sweep(Common),
    /// Concentration ratios of a stored field, or of fresh solutions
    Concentrate {
        #[command(flatten)]
        common: Common,
        /// NSFIELD file to analyse instead of solving
        #[arg(long, conflicts_with = "config")]
        field: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Blow-up rescaling of a stored field, or of fresh solutions
    Rescale {
        #[command(flatten)]
        common: Common,
        /// NSFIELD file to rescale instead of solving
        #[arg(long, conflicts_with = "config")]
        field: Option<PathBuf>,
    },
    /// Run the config with every configured check; the exit status is the verdict
    Check(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type Failure = Box<dyn std::error::Error>;

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Solve(common) => sweep(&common, |m| {
            *m = Modes {
                solve: true,
                ..Modes::default()
            }
        }),
        Command::Sweep(common) => sweep(&common, |_| {}),
        Command::Check(common) => sweep(&common, |m| m.checks = true),
        Command::Concentrate {
            common,
            field: Some(path),
            window,
        } => concentrate_file(&path, &window, &common),
        Command::Concentrate { common, .. } => sweep(&common, |m| {
            *m = Modes {
                solve: true,
                concentrate: true,
                ..Modes::default()
            }
        }),
        Command::Rescale {
            common,
            field: Some(path),
        } => rescale_file(&path, &common),
        Command::Rescale { common, .. } => sweep(&common, |m| {
            *m = Modes {
                solve: true,
                rescale: true,
                ..Modes::default()
            }
        }),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or("--config is required for this command")?;
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut config = parse_config_with_overrides(&text, &common.overrides)?;
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn sweep(common: &Common, modes: impl FnOnce(&mut Modes)) -> Result<ExitCode, Failure> {
    let mut config = load_config(common)?;
    modes(&mut config.modes);
    let outcome = run_sweep(&config, common.threads)?;
    for e in &outcome.entries {
        match &e.outcome {
            Ok(d) => {
                let mut line = format!(
                    "eps={} n={} {} energy={:.10} residual={:.3e} iterations={} shift={:?}",
                    e.epsilon,
                    e.cells_per_axis,
                    d.solve.status.label(),
                    d.solve.energy.total,
                    d.solve.residual_rel,
                    d.solve.iterations,
                    d.shift
                );
                if let Some(r) = &d.report {
                    line += &format!(" ratio_h1={:.6} ratio_lp={:.6}", r.ratio_h1, r.ratio_lp);
                }
                if let Some(x) = &d.exploratory {
                    line += &format!(" rescaled_residual={:.3e}", x.rescaled_residual);
                }
                println!("{line}");
            }
            Err(msg) => println!("eps={} n={} error: {msg}", e.epsilon, e.cells_per_axis),
        }
    }
    print!("{}", verdict_text(&outcome));
    println!("artifacts in {}", config.out_dir.display());
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn stored_spec(path: &Path) -> Result<(lattice_nls::harness::StoredField, ProblemSpec), Failure> {
    let stored = load_field(path)?;
    let spec = ProblemSpec::new(stored.field.grid().dim(), stored.p, stored.epsilon, stored.variant)?;
    Ok((stored, spec))
}

fn concentrate_file(path: &Path, w: &WindowArgs, common: &Common) -> Result<ExitCode, Failure> {
    if !common.overrides.is_empty() {
        return Err("--override needs --config".into());
    }
    let (stored, spec) = stored_spec(path)?;
    let window = CellWindow::new(spec.dim, w.omega_half_width, w.u_half_width, w.delta)?;
    let (u, shift) = normalize_translation(&stored.field, &window)?;
    let r = concentration_ratios(&u, &spec, &window)?;
    println!("shift={shift:?}");
    println!("ratio_h1={} ratio_lp={}", r.ratio_h1, r.ratio_lp);
    println!("global_ratio_h1={} global_ratio_lp={}", r.global_ratio_h1, r.global_ratio_lp);
    println!("h1_norm_omega={}", r.omega_h1_sq.sqrt());
    Ok(ExitCode::SUCCESS)
}

fn rescale_file(path: &Path, common: &Common) -> Result<ExitCode, Failure> {
    if !common.overrides.is_empty() {
        return Err("--override needs --config".into());
    }
    let (stored, spec) = stored_spec(path)?;
    let rescaled_spec = spec.rescaled()?;
    let target = rescaled_grid(stored.field.grid(), spec.epsilon)?;
    let v = rescale(&stored.field, &spec, &target);
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let out = dir.join(field_file_name("rescaled", spec.epsilon));
    save_field(&out, &v, rescaled_spec.p, rescaled_spec.epsilon, rescaled_spec.variant)?;
    println!("rescaled_residual={}", rescaled_residual(&v, &rescaled_spec));
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
