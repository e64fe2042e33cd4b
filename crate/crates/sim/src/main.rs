use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use usv_core::control::{synthesize_gains, ControllerKind, LqrPiGains};
use usv_core::vehicle::ClosedLoopModel;
use usv_sim::log::Outcome;
use usv_sim::offline::certify_log;
use usv_sim::suite::{run_suite, write_suite};
use usv_sim::{run_scenario, ScenarioConfig, SimResult};

#[derive(Parser)]
#[command(name = "usv-sim", version, about = "Deterministic USV autonomy scenario simulator")]
struct Cli {
    /// Exit nonzero when any run ends in a HALT.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// pid, lqr-pi or mrac; defaults to the scenario's own choice.
        #[arg(long)]
        controller: Option<ControllerKind>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every built-in scenario and write the comparison table.
    Suite {
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify the estimates stored in a run log.
    Certify {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        gamma: f64,
    },
    /// Print the published and re-synthesized LQR-PI gains.
    Gains,
}

const HALT_EXIT: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(halted) if halted && cli.strict => ExitCode::from(HALT_EXIT),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether any run halted.
fn execute(cli: &Cli) -> SimResult<bool> {
    match &cli.command {
        Command::Run {
            scenario,
            controller,
            seed,
            out,
        } => {
            let mut cfg = ScenarioConfig::load(scenario)?;
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let kind = controller.or(cfg.controller).unwrap_or(ControllerKind::Mrac);
            let log = run_scenario(&cfg, kind)?;
            log.write_dir(out)?;
            let s = &log.summary;
            let m = s.primary_metrics();
            println!(
                "{} {} seed {}: {} at {:.2} s, position RMSE {:.3} m",
                s.scenario,
                kind,
                s.seed,
                s.outcome.as_str(),
                s.end_time,
                m.position.rmse
            );
            Ok(s.outcome == Outcome::Halted)
        }
        Command::Suite { out } => {
            let runs = run_suite()?;
            let report = write_suite(out, &runs)?;
            print!("{}", report.to_markdown());
            Ok(report.rows.iter().any(|r| r.outcome == Outcome::Halted))
        }
        Command::Certify { log, horizon, gamma } => {
            let r = certify_log(log, *horizon, *gamma)?;
            println!(
                "{} estimates, {} certified, {} unsafe, {} skipped; wrote {}",
                r.estimates,
                r.certified,
                r.unsafe_count,
                r.skipped,
                r.output.display()
            );
            Ok(false)
        }
        Command::Gains => {
            let published = LqrPiGains::default();
            let model = ClosedLoopModel::default();
            let synth = synthesize_gains(&model.speed, &model.sway_yaw)?;
            println!("{:<8} {:>12} {:>12}", "gain", "published", "synthesized");
            let rows = [
                ("k_u_p", published.k_u_p, synth.k_u_p),
                ("k_u_i", published.k_u_i, synth.k_u_i),
                ("k_v_p", published.k_v_p, synth.k_v_p),
                ("k_r_p", published.k_r_p, synth.k_r_p),
                ("k_r_i", published.k_r_i, synth.k_r_i),
                ("k_u_aw", published.k_u_aw, synth.k_u_aw),
                ("k_r_aw", published.k_r_aw, synth.k_r_aw),
            ];
            for (name, p, s) in rows {
                println!("{name:<8} {p:>12.5} {s:>12.5}");
            }
            Ok(false)
        }
    }
}
