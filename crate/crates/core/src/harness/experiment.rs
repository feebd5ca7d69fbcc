use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::channel::ChannelRealization;
use crate::error::Result;
use crate::placement::{
    joint_search_from_optima, optimize_cu, optimize_d2d, PlacementResult, StopReason,
};
use crate::scenario::{generate_scenario, Position3, Scenario};
use crate::throughput::{deviation_of, report_at, Jain, RateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    JointOpt,
    D2DOnlyPlacement,
    CUOnlyPlacement,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::JointOpt,
        Scheme::D2DOnlyPlacement,
        Scheme::CUOnlyPlacement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::JointOpt => "JointOpt",
            Scheme::D2DOnlyPlacement => "D2DOnlyPlacement",
            Scheme::CUOnlyPlacement => "CUOnlyPlacement",
        }
    }
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    Baseline,
    Obstacles(usize),
    RicianK(f64),
}

impl SweepPoint {
    pub fn param(&self) -> &'static str {
        match self {
            SweepPoint::Baseline => "none",
            SweepPoint::Obstacles(_) => "obstacles",
            SweepPoint::RicianK(_) => "rician_k",
        }
    }

    pub fn value(&self) -> String {
        match self {
            SweepPoint::Baseline => String::new(),
            SweepPoint::Obstacles(n) => n.to_string(),
            SweepPoint::RicianK(k) => k.to_string(),
        }
    }

    /// Obstacle sweep first, then the K sweep; a lone baseline otherwise.
    pub fn from_config(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
        let mut points = Vec::new();
        if let Some(counts) = &cfg.sweeps.obstacle_counts {
            points.extend(counts.iter().map(|&n| SweepPoint::Obstacles(n)));
        }
        if let Some(ks) = &cfg.sweeps.rician_k {
            points.extend(ks.iter().map(|&k| SweepPoint::RicianK(k)));
        }
        if points.is_empty() {
            points.push(SweepPoint::Baseline);
        }
        points
    }
}

/// Outcome of one scheme in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeReport {
    pub scheme: Scheme,
    pub position: Position3,
    pub report: RateReport,
    pub jain: Jain,
    /// Ratio deviation at `position` for the trial's target ratio.
    pub t_value: f64,
    pub iters: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    pub point: SweepPoint,
    pub num_pairs: usize,
    pub num_cus: usize,
    pub num_obstacles: usize,
    pub rician_k: f64,
    pub phi: f64,
    /// Ratio deviation at the joint search's starting midpoint.
    pub start_t_value: f64,
    /// In `Scheme::ALL` order.
    pub schemes: [SchemeReport; 3],
    pub d2d_run: PlacementResult,
    pub cu_run: PlacementResult,
    pub joint_run: PlacementResult,
}

impl TrialOutcome {
    pub fn scheme(&self, scheme: Scheme) -> &SchemeReport {
        self.schemes
            .iter()
            .find(|s| s.scheme == scheme)
            .expect("every scheme is evaluated")
    }

    pub fn rows(&self) -> Vec<TrialRow> {
        self.schemes
            .iter()
            .map(|s| TrialRow {
                seed: self.seed,
                sweep_param: self.point.param().to_string(),
                sweep_value: self.point.value(),
                scheme: s.scheme.as_str().to_string(),
                x: s.position.x,
                y: s.position.y,
                d2d_total: s.report.d2d_total,
                cu_total: s.report.cu_total,
                net: s.report.net,
                jain: s.jain.value,
                t_value: s.t_value,
                iters: s.iters,
                stop_reason: s.stop_reason.as_str().to_string(),
            })
            .collect()
    }

    pub fn report_rows(&self) -> Vec<ReportRow> {
        self.schemes
            .iter()
            .map(|s| ReportRow {
                seed: self.seed,
                scheme: s.scheme.as_str().to_string(),
                m: self.num_pairs,
                n: self.num_cus,
                obstacles: self.num_obstacles,
                k: self.rician_k,
                x: s.position.x,
                y: s.position.y,
                d2d_total: s.report.d2d_total,
                cu_total: s.report.cu_total,
                net: s.report.net,
                jain: s.jain.value,
            })
            .collect()
    }
}

/// One line of `rows.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub sweep_param: String,
    pub sweep_value: String,
    pub scheme: String,
    pub x: f64,
    pub y: f64,
    pub d2d_total: f64,
    pub cu_total: f64,
    pub net: f64,
    pub jain: f64,
    pub t_value: f64,
    pub iters: usize,
    pub stop_reason: String,
}

/// A rate report flattened to one CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub seed: u64,
    pub scheme: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub obstacles: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub x: f64,
    pub y: f64,
    pub d2d_total: f64,
    pub cu_total: f64,
    pub net: f64,
    pub jain: f64,
}

/// Ensemble statistics per sweep point and scheme (sample std, 0 for n = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_param: String,
    pub sweep_value: String,
    pub scheme: String,
    pub trials: usize,
    pub d2d_total_mean: f64,
    pub d2d_total_std: f64,
    pub cu_total_mean: f64,
    pub cu_total_std: f64,
    pub net_mean: f64,
    pub net_std: f64,
    pub jain_mean: f64,
    pub jain_std: f64,
    pub t_value_mean: f64,
    pub t_value_std: f64,
}

/// Generate the scenario for `seed`, run both gradient ascents and the joint
/// search, and evaluate every scheme on the same scenario and fading draw.
pub fn run_trial(cfg: &ExperimentConfig, seed: u64, point: SweepPoint) -> Result<TrialOutcome> {
    let mut generation = cfg.generation.clone();
    let mut radio = cfg.radio.clone();
    match point {
        SweepPoint::Baseline => {}
        SweepPoint::Obstacles(n) => generation.num_obstacles = n,
        SweepPoint::RicianK(k) => radio.rician_k = k,
    }
    let scn = generate_scenario(&generation, &radio, seed)?;
    run_trial_on(cfg, seed, point, &scn)
}

/// Trial on a given scenario; the radio constants come from the scenario.
pub fn run_trial_on(
    cfg: &ExperimentConfig,
    seed: u64,
    point: SweepPoint,
    scn: &Scenario,
) -> Result<TrialOutcome> {
    let channel = ChannelRealization::new(scn, cfg.mode.channel_mode(seed));

    let d2d_run = optimize_d2d(scn, &channel, &cfg.optimizer)?;
    let cu_run = optimize_cu(scn, &channel, &cfg.optimizer)?;
    let joint = joint_search_from_optima(
        &d2d_run.position,
        &cu_run.position,
        &cfg.search,
        scn,
        &channel,
    )?;
    let phi = joint.phi;

    let scheme_report =
        |scheme, position: Position3, report: RateReport, run: &PlacementResult| SchemeReport {
            scheme,
            position,
            jain: report.fairness(),
            t_value: deviation_of(&report, phi),
            report,
            iters: run.iterations,
            stop_reason: run.stop_reason,
        };
    let schemes = [
        scheme_report(
            Scheme::JointOpt,
            joint.placement.position,
            joint.report.clone(),
            &joint.placement,
        ),
        scheme_report(
            Scheme::D2DOnlyPlacement,
            d2d_run.position,
            report_at(scn, &channel, &d2d_run.position),
            &d2d_run,
        ),
        scheme_report(
            Scheme::CUOnlyPlacement,
            cu_run.position,
            report_at(scn, &channel, &cu_run.position),
            &cu_run,
        ),
    ];

    Ok(TrialOutcome {
        seed,
        point,
        num_pairs: scn.num_pairs(),
        num_cus: scn.num_cus(),
        num_obstacles: scn.obstacles.len(),
        rician_k: scn.radio.rician_k,
        phi,
        start_t_value: joint.start_value,
        schemes,
        d2d_run,
        cu_run,
        joint_run: joint.placement,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Ensemble statistics, ordered by first appearance of each
/// (sweep point, scheme).
pub fn summarize(rows: &[TrialRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for r in rows {
        let key = (
            r.sweep_param.clone(),
            r.sweep_value.clone(),
            r.scheme.clone(),
        );
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(param, value, scheme)| {
            let group: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.sweep_param == param && r.sweep_value == value && r.scheme == scheme)
                .collect();
            let stat =
                |f: fn(&TrialRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (d2d_total_mean, d2d_total_std) = stat(|r| r.d2d_total);
            let (cu_total_mean, cu_total_std) = stat(|r| r.cu_total);
            let (net_mean, net_std) = stat(|r| r.net);
            let (jain_mean, jain_std) = stat(|r| r.jain);
            let (t_value_mean, t_value_std) = stat(|r| r.t_value);
            SummaryRow {
                sweep_param: param,
                sweep_value: value,
                scheme,
                trials: group.len(),
                d2d_total_mean,
                d2d_total_std,
                cu_total_mean,
                cu_total_std,
                net_mean,
                net_std,
                jain_mean,
                jain_std,
                t_value_mean,
                t_value_std,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialOutcome>,
    pub rows: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    pub rows_path: PathBuf,
    pub summary_path: PathBuf,
    pub traces_dir: PathBuf,
}

#[cfg(feature = "parallel")]
fn run_jobs(cfg: &ExperimentConfig, jobs: &[(SweepPoint, u64)]) -> Vec<Result<TrialOutcome>> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|&(point, seed)| run_trial(cfg, seed, point))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_jobs(cfg: &ExperimentConfig, jobs: &[(SweepPoint, u64)]) -> Vec<Result<TrialOutcome>> {
    jobs.iter()
        .map(|&(point, seed)| run_trial(cfg, seed, point))
        .collect()
}

/// Run every (sweep point, trial) and write `rows.csv`, `summary.csv` and
/// per-run convergence traces under `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let jobs: Vec<(SweepPoint, u64)> = SweepPoint::from_config(cfg)
        .into_iter()
        .flat_map(|p| (0..cfg.trials as u64).map(move |i| (p, cfg.base_seed.wrapping_add(i))))
        .collect();
    let trials = run_jobs(cfg, &jobs)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<TrialRow> = trials.iter().flat_map(|t| t.rows()).collect();
    let summary = summarize(&rows);

    let out = &cfg.out_dir;
    let rows_path = out.join("rows.csv");
    let summary_path = out.join("summary.csv");
    let traces_dir = out.join("traces");
    let written = write_outputs(
        out,
        &rows_path,
        &summary_path,
        &traces_dir,
        &trials,
        &rows,
        &summary,
    );
    if let Err(e) = written {
        let _ = fs::remove_file(&rows_path);
        let _ = fs::remove_file(&summary_path);
        let _ = fs::remove_dir_all(&traces_dir);
        return Err(e);
    }
    Ok(ExperimentOutput {
        trials,
        rows,
        summary,
        rows_path,
        summary_path,
        traces_dir,
    })
}

fn write_csv<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for item in items {
        w.serialize(item)?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(
    out: &Path,
    rows_path: &Path,
    summary_path: &Path,
    traces_dir: &Path,
    trials: &[TrialOutcome],
    rows: &[TrialRow],
    summary: &[SummaryRow],
) -> Result<()> {
    fs::create_dir_all(out)?;
    write_csv(rows_path, rows)?;
    write_csv(summary_path, summary)?;
    fs::create_dir_all(traces_dir)?;
    for t in trials {
        let stem = match t.point {
            SweepPoint::Baseline => format!("seed{}", t.seed),
            p => format!("{}{}_seed{}", p.param(), p.value(), t.seed),
        };
        for (tag, run) in [
            ("d2d", &t.d2d_run),
            ("cu", &t.cu_run),
            ("joint", &t.joint_run),
        ] {
            let file = fs::File::create(traces_dir.join(format!("{stem}_{tag}.csv")))?;
            run.write_trace_csv(std::io::BufWriter::new(file))?;
        }
    }
    Ok(())
}
