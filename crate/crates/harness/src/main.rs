use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hierobs::synthesis::{check_uniform_observability, pole_place_real, verify_contraction_lmi};
use hierobs::ContractionCertificate;
use hierobs_harness::config::{FeedMode, OmegaDotSource, RunConfig};
use hierobs_harness::metrics::{attitude_threshold, corollary_envelope_check, first_crossing, sup_gyro_bias_err};
use hierobs_harness::{output, run_simulation, sim, verify};

#[derive(Parser)]
#[command(name = "hierobs", version, about = "Hierarchical pose-inertial observer simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write CSV and plots.
    Run(RunArgs),
    /// Print gains, certificate and observability report.
    Synth(ConfigArgs),
    /// Run the acceptance criteria; exits nonzero on any failure.
    Verify,
    /// Write the truth and IMU streams as CSV.
    DumpTruth(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FeedArg {
    True,
    Estimated,
}

#[derive(Clone, Copy, ValueEnum)]
enum OmegaDotArg {
    Analytic,
    Fd,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; the shipped reference config when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, value_enum)]
    feed: Option<FeedArg>,
    #[arg(long = "omega-dot", value_enum)]
    omega_dot: Option<OmegaDotArg>,
    #[arg(long)]
    randomize_init: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Skip the SVG plots.
    #[arg(long)]
    no_plots: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::table1(),
        };
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
        }
        if let Some(d) = self.duration {
            cfg.sim.duration = d;
        }
        if let Some(f) = self.feed {
            cfg.sim.feed = match f {
                FeedArg::True => FeedMode::True,
                FeedArg::Estimated => FeedMode::Estimated,
            };
        }
        if let Some(m) = self.omega_dot {
            cfg.sim.omega_dot = match m {
                OmegaDotArg::Analytic => OmegaDotSource::Analytic,
                OmegaDotArg::Fd => OmegaDotSource::Fd,
            };
        }
        if self.randomize_init {
            cfg.sim.randomize_init = true;
        }
        if let Some(s) = self.seed {
            cfg.sim.seed = s;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let rec = run_simulation(&cfg)?;
    let dir = &cfg.output.dir;
    let csv_path = dir.join("run.csv");
    output::emit_csv(&rec, &csv_path)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()).context("writing config.toml")?;

    let c1 = cfg.gains.c1;
    let line = attitude_threshold(cfg.analysis.gyro_bias_bound, c1);
    let crossing = first_crossing(&rec, line);
    let b_bar = sup_gyro_bias_err(&rec);
    let env = corollary_envelope_check(&rec, c1, b_bar);
    let last = rec.last().context("empty run")?;
    println!("wrote {} ({} rows)", csv_path.display(), rec.len());
    println!("final |q_e|          {:.6e}", last.qe_norm);
    println!("final |x_e|          {:.6e}", last.xe_norm());
    println!("final x_e' M x_e     {:.6e}", last.xe_metric);
    match crossing {
        Some(t) => println!("threshold {line:.5} first reached at t = {t:.3} s"),
        None => println!("threshold {line:.5} not reached"),
    }
    println!(
        "envelope with measured sup|b_e| = {b_bar:.4}: {} (max violation {:.3e})",
        if env.holds { "holds" } else { "violated" },
        env.max_violation
    );
    if !args.no_plots {
        let qe = dir.join("qe_norm.svg");
        let xe = dir.join("xe_metric.svg");
        output::plot_attitude_error(&rec, &qe, line, crossing)?;
        output::plot_translation_error(&rec, &xe)?;
        println!("wrote {} and {}", qe.display(), xe.display());
    }
    Ok(())
}

fn synth(args: &ConfigArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let gains = cfg.translation_gains()?;
    let lambda = cfg.gains.lambda;
    let placed = pole_place_real([-2.0 * lambda; 3])?.as_array();
    println!("configured gains     k = {:?}", gains.as_array());
    println!("poles                {:?}", gains.poles());
    println!("triple pole at -2λ   k = {placed:?}");
    let cert = ContractionCertificate::from_lyapunov(&gains, lambda, &ContractionCertificate::output_weight())?;
    let lmi = verify_contraction_lmi(&cert, &gains)?;
    println!("rho                  {}", cert.rho);
    println!("cond(P)              {:.6e}", cert.condition_number());
    println!("LMI max eigenvalue   {:.6e}", lmi.max_eigenvalue);
    println!("gain residual        {:.6e}", lmi.gain_residual);
    let r = cfg.truth_init().q.to_rotation()?;
    let obs = check_uniform_observability(r.matrix());
    println!(
        "observability at R(q(0)): observable = {}, det = {:.12}, cond = {:.6e}",
        obs.observable, obs.det, obs.condition_number
    );
    Ok(())
}

fn dump_truth(args: &ConfigArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let rows = sim::truth_stream(&cfg)?;
    let path = cfg.output.dir.join("truth.csv");
    output::emit_truth_csv(&rows, &path)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::DumpTruth(a) => dump_truth(a),
        Command::Verify => {
            let outcomes = verify::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            return if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
