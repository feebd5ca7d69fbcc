//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! failures while running.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::harness::{self, ExperimentConfig, ModeKind, SweepPoint};
use crate::placement::{grid_oracle, optimize_cu, optimize_d2d, Bounds};
use crate::scenario::{generate_scenario, Scenario};
use crate::throughput::{total_cu, total_d2d};

#[derive(Debug, Parser)]
#[command(name = "risuav", about = "RIS-mounted UAV placement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit a generated scenario as JSON.
    Generate(Common),
    /// Run one trial and print the three placements and their rates.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Use this scenario JSON instead of generating one.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Run the full seeded experiment and write CSV files.
    Experiment(Common),
    /// Cross-check both gradient ascents against an exhaustive grid search.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Grid spacing in meters.
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl Common {
    fn load(&self) -> std::result::Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => harness::load_config(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(mode) = &self.mode {
            cfg.mode = mode.parse::<ModeKind>()?;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let is_help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if is_help {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 1;
        }
    };
    let result = match cli.command {
        Command::Generate(common) => generate(&common, out),
        Command::Optimize { common, scenario } => optimize(&common, scenario, out),
        Command::Experiment(common) => experiment(&common, out),
        Command::Oracle { common, resolution } => oracle(&common, resolution, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn generate(common: &Common, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let cfg = common.load()?;
    let scn = generate_scenario(&cfg.generation, &cfg.radio, cfg.base_seed)?;
    let json = scn.to_json()?;
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_failure)?;
            let path = dir.join(format!("scenario_seed{}.json", cfg.base_seed));
            std::fs::write(&path, json).map_err(io_failure)?;
            writeln!(out, "{}", path.display()).map_err(io_failure)?;
        }
        None => writeln!(out, "{json}").map_err(io_failure)?,
    }
    Ok(())
}

fn optimize(
    common: &Common,
    scenario: Option<PathBuf>,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let cfg = common.load()?;
    let seed = cfg.base_seed;
    let outcome = match scenario {
        None => harness::run_trial(&cfg, seed, SweepPoint::Baseline)?,
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let scn = Scenario::from_json(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            harness::run_trial_on(&cfg, seed, SweepPoint::Baseline, &scn)?
        }
    };
    print_outcome(&outcome, out).map_err(|e| Failure::Runtime(e.to_string()))
}

fn print_outcome(t: &harness::TrialOutcome, out: &mut dyn Write) -> Result<()> {
    for s in &t.schemes {
        writeln!(
            out,
            "# {:<17} x={:.4} y={:.4} iters={} stop={} T={:.6}",
            s.scheme.as_str(),
            s.position.x,
            s.position.y,
            s.iters,
            s.stop_reason.as_str(),
            s.t_value
        )?;
    }
    writeln!(out, "# phi={:.6} T(s0)={:.6}", t.phi, t.start_t_value)?;
    let mut w = csv::Writer::from_writer(out);
    for row in t.report_rows() {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn experiment(common: &Common, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let cfg = common.load()?;
    let res = harness::run_experiment(&cfg)?;
    let write = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            out,
            "wrote {} rows to {}",
            res.rows.len(),
            res.rows_path.display()
        )?;
        writeln!(out, "wrote {}", res.summary_path.display())?;
        for s in &res.summary {
            writeln!(
                out,
                "{:>9} {:>4} {:<17} net={:.3}±{:.3} jain={:.4}",
                s.sweep_param, s.sweep_value, s.scheme, s.net_mean, s.net_std, s.jain_mean
            )?;
        }
        Ok(())
    };
    write(out).map_err(io_failure)
}

fn oracle(
    common: &Common,
    resolution: f64,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let cfg = common.load()?;
    if !(resolution > 0.0) {
        return Err(Failure::Config("--resolution must be > 0".into()));
    }
    let scn = generate_scenario(&cfg.generation, &cfg.radio, cfg.base_seed)?;
    let channel = ChannelRealization::new(&scn, cfg.mode.channel_mode(cfg.base_seed));
    let bounds = cfg
        .optimizer
        .bounds
        .unwrap_or_else(|| Bounds::from(scn.region));

    let d2d = optimize_d2d(&scn, &channel, &cfg.optimizer)?;
    let (d2d_arg, d2d_best) = grid_oracle(
        |r| total_d2d(r, &channel.state_at(&scn, r), &scn),
        &bounds,
        scn.uav_height,
        resolution,
    )?;
    let cu = optimize_cu(&scn, &channel, &cfg.optimizer)?;
    let (cu_arg, cu_best) = grid_oracle(
        |r| total_cu(r, &channel.state_at(&scn, r), &scn),
        &bounds,
        scn.uav_height,
        resolution,
    )?;
    let write = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            out,
            "objective,ascent_x,ascent_y,ascent_value,grid_x,grid_y,grid_value,rel_gap"
        )?;
        for (name, run, arg, best) in [
            ("d2d", &d2d, d2d_arg, d2d_best),
            ("cu", &cu, cu_arg, cu_best),
        ] {
            writeln!(
                out,
                "{name},{},{},{},{},{},{},{}",
                run.position.x,
                run.position.y,
                run.objective,
                arg.x,
                arg.y,
                best,
                (best - run.objective) / best
            )?;
        }
        Ok(())
    };
    write(out).map_err(io_failure)
}
