//! Command-line front end for the viscoelastic spectral solver.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use viscospec::cli::{self, PropsOptions, RunConfig};

#[derive(Parser)]
#[command(
    name = "viscospec",
    about = "Spectral Galerkin solver for a strain-limiting viscoelastic wave system on the periodic box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to a `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppresses the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured problem, writing diagnostics and snapshots.
    Run,
    /// Repeat the run over the configured `n_list` and compare stresses.
    SweepN,
    /// Repeat the run over the configured `m_list` and compare final fields.
    SweepM,
    /// Manufactured-solution convergence ladders (temporal and spatial).
    Mms,
    /// Seeded constitutive property suite; nonzero exit on any failure.
    CheckProps {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let path = cli.config.as_ref().ok_or("--config is required for this command")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut config = cli::parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Run => {
            let config = load_config(cli)?;
            let summary = cli::cmd_run(&config).map_err(|e| e.to_string())?;
            if !cli.quiet {
                let last = summary.records.last().expect("at least the initial row");
                println!(
                    "run: {} steps (max subdivision {}), final t = {}, total energy = {:.6e}",
                    summary.steps, summary.max_subdivision, last.t, last.total
                );
                println!("wrote {}", summary.out_dir.join("diagnostics.csv").display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepN => {
            let config = load_config(cli)?;
            let report = cli::cmd_sweep_n(&config, &config.n_list).map_err(|e| e.to_string())?;
            if !cli.quiet {
                for e in &report.entries {
                    println!(
                        "n = {:4}: ||reg||_L2(Q) = {:.6e}, sup T_L1pd = {:.6e}",
                        e.n, e.regulariser_l2, e.t_l1pd_sup
                    );
                }
                for p in &report.pairs {
                    println!(
                        "n {:4} -> {:4}: ||dT||_L1(Q) = {:.6e}, ||dv(T)||_2 = {:.6e}",
                        p.n_lo, p.n_hi, p.stress_l1_diff, p.velocity_l2_diff
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepM => {
            let config = load_config(cli)?;
            let report = cli::cmd_sweep_m(&config, &config.m_list).map_err(|e| e.to_string())?;
            if !cli.quiet {
                for p in &report.pairs {
                    println!(
                        "m {:3} -> {:3}: ||du||_2 = {:.6e}, ||dv||_2 = {:.6e}",
                        p.m_lo, p.m_hi, p.u_l2_diff, p.v_l2_diff
                    );
                }
                for (name, spread) in &report.diagnostic_spreads {
                    println!("spread {name}: {spread:.3}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mms => {
            let config = load_config(cli)?;
            let report = cli::cmd_mms(&config).map_err(|e| e.to_string())?;
            if !cli.quiet {
                for p in &report.temporal {
                    println!("dt = {:10.4e}: err_u = {:.6e}, err_v = {:.6e}", p.dt, p.err_u, p.err_v);
                }
                println!(
                    "temporal order: u {:.3}, v {:.3}",
                    report.temporal_order_u, report.temporal_order_v
                );
                for (m, err) in &report.spatial {
                    println!("m = {m:3}: err_u = {err:.6e}");
                }
                println!("spatial error drop: {:.1}x", report.spatial_drop);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckProps { samples } => {
            let opts = PropsOptions { samples: *samples, seed: cli.seed.unwrap_or(0) };
            let report = cli::run_suite(&opts);
            if !cli.quiet {
                for p in &report.properties {
                    println!(
                        "{} {:28} worst slack {:>13.4e}  ({})",
                        if p.pass { "PASS" } else { "FAIL" },
                        p.name,
                        p.worst,
                        p.detail
                    );
                }
                println!(
                    "lemma2 max-form (informational): {}; empirical kappa ratio {:.4}",
                    if report.lemma2_max_form_held { "held" } else { "violated" },
                    report.lemma2_empirical_kappa
                );
            }
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}
