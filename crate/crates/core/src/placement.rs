//! Placement optimizers.
//!
//! The D2D and CU optima are found with projected gradient ascent over the
//! horizontal coordinates at the fixed UAV altitude. The joint position is then
//! chosen by a directional coordinate search that keeps the per-capita CU/D2D
//! throughput ratio as close as possible to the ratio of the two optima.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{eta_m, lambda_n, ChannelRealization, ChannelState};
use crate::error::{Error, Result};
use crate::scenario::{distance3, Position3, Region, Scenario};
use crate::throughput::{deviation_of, report_at, target_ratio, total_cu, total_d2d, RateReport};

/// Horizontal search box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn is_valid(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn contains(&self, p: &Position3) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn clamp(&self, p: Position3) -> Position3 {
        Position3::new(
            p.x.max(self.x_min).min(self.x_max),
            p.y.max(self.y_min).min(self.y_max),
            p.z,
        )
    }
}

impl From<Region> for Bounds {
    fn from(r: Region) -> Self {
        Bounds {
            x_min: r.x_lo,
            y_min: r.y_lo,
            x_max: r.x_hi,
            y_max: r.y_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    /// Threshold for both the gradient norm and the step length.
    pub tolerance: f64,
    /// Push applied when an iterate lands within `tolerance` of a user.
    pub displacement: f64,
    pub max_iters: usize,
    /// Defaults to the scenario region.
    pub bounds: Option<Bounds>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            tolerance: 1e-4,
            displacement: 1.0,
            max_iters: 10_000,
            bounds: None,
        }
    }
}

impl OptimizerConfig {
    pub fn range_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            errs.push("optimizer.learning_rate: must be > 0".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            errs.push("optimizer.tolerance: must be > 0".into());
        }
        if !(self.displacement.is_finite() && self.displacement > self.tolerance) {
            errs.push("optimizer.displacement: must exceed tolerance".into());
        }
        if self.max_iters < 1 {
            errs.push("optimizer.max_iters: must be >= 1".into());
        }
        if matches!(self.bounds, Some(b) if !b.is_valid()) {
            errs.push("optimizer.bounds: need x_min < x_max and y_min < y_max".into());
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub num_directions: usize,
    pub step_size: f64,
    pub max_steps: usize,
    /// Defaults to the scenario region.
    pub bounds: Option<Bounds>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            num_directions: 360,
            step_size: 1.0,
            max_steps: 300,
            bounds: None,
        }
    }
}

impl SearchConfig {
    pub fn range_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.num_directions < 1 {
            errs.push("search.num_directions: must be >= 1".into());
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            errs.push("search.step_size: must be > 0".into());
        }
        if self.max_steps < 1 {
            errs.push("search.max_steps: must be >= 1".into());
        }
        if matches!(self.bounds, Some(b) if !b.is_valid()) {
            errs.push("search.bounds: need x_min < x_max and y_min < y_max".into());
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GradSmall,
    StepSmall,
    MaxIters,
    SearchExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GradSmall => "GradSmall",
            StopReason::StepSmall => "StepSmall",
            StopReason::MaxIters => "MaxIters",
            StopReason::SearchExhausted => "SearchExhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub position: Position3,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub position: Position3,
    pub objective: f64,
    pub trace: Vec<TracePoint>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Best iterate seen; raw iterates may oscillate for large step sizes.
    pub best_position: Position3,
    pub best_objective: f64,
}

impl PlacementResult {
    /// Writes the trace as `iter,x,y,objective` CSV.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "x", "y", "objective"])?;
        for p in &self.trace {
            w.serialize((p.iter, p.position.x, p.position.y, p.objective))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Moves `r` by `displacement` away from every center closer than `tolerance`
/// horizontally.
fn push_from_centers(
    mut r: Position3,
    centers: &[Position3],
    tolerance: f64,
    displacement: f64,
) -> Position3 {
    for c in centers {
        if r.horizontal_distance(c) < tolerance {
            r.x += sign(r.x - c.x) * displacement;
            r.y += sign(r.y - c.y) * displacement;
        }
    }
    r
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Horizontal gradient of the total D2D throughput, link classes held fixed.
pub fn grad_d2d(r: &Position3, state: &ChannelState, scn: &Scenario) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (m, pair) in scn.d2d_pairs.iter().enumerate() {
        let eta = eta_m(m, state, scn);
        if eta == 0.0 {
            continue;
        }
        let link = &state.pairs[m];
        let b1 = scn.radio.path_loss(link.hop_in).beta;
        let b2 = scn.radio.path_loss(link.hop_out).beta;
        let d1 = distance3(&pair.tx, r);
        let d2 = distance3(&pair.rx, r);
        let p1 = d1.powf(-b1);
        let p2 = d2.powf(-b2);
        let denom = std::f64::consts::LN_2 * (1.0 + eta * p1 * p2);
        // d(d1)/dx = (x - tx.x)/d1, and likewise for the other terms.
        let dd1 = [(r.x - pair.tx.x) / d1, (r.y - pair.tx.y) / d1];
        let dd2 = [(r.x - pair.rx.x) / d2, (r.y - pair.rx.y) / d2];
        for axis in 0..2 {
            let a = b1 * p1 / d1 * dd1[axis] * p2 + b2 * p1 * p2 / d2 * dd2[axis];
            g[axis] -= eta * a / denom;
        }
    }
    g
}

/// Horizontal gradient of the total CU throughput, link classes held fixed.
pub fn grad_cu(r: &Position3, state: &ChannelState, scn: &Scenario) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (n, cu) in scn.cus.iter().enumerate() {
        let lambda = lambda_n(n, state, scn);
        if lambda == 0.0 {
            continue;
        }
        let beta = scn.radio.path_loss(state.cus[n].class).beta;
        let d = distance3(cu, r);
        let p = d.powf(-beta);
        let denom = std::f64::consts::LN_2 * (1.0 + lambda * p);
        let dd = [(r.x - cu.x) / d, (r.y - cu.y) / d];
        for axis in 0..2 {
            g[axis] -= lambda * beta * p / d * dd[axis] / denom;
        }
    }
    g
}

/// Projected gradient ascent with exclusion discs around `exclusion_centers`.
///
/// `eval` returns the objective and its horizontal gradient at a position.
/// Stops when the gradient norm or the step length drops below the tolerance,
/// or after `max_iters` updates.
pub fn gradient_ascent<F>(
    eval: F,
    cfg: &OptimizerConfig,
    bounds: &Bounds,
    exclusion_centers: &[Position3],
    r0: Position3,
) -> PlacementResult
where
    F: Fn(&Position3) -> (f64, [f64; 2]),
{
    let (mut value, mut grad) = eval(&r0);
    let mut r = r0;
    let mut trace = vec![TracePoint {
        iter: 0,
        position: r0,
        objective: value,
    }];
    let (mut best_position, mut best_objective) = (r0, value);
    let mut k = 0;
    let stop_reason = loop {
        let stepped = Position3::new(
            r.x + cfg.learning_rate * grad[0],
            r.y + cfg.learning_rate * grad[1],
            r.z,
        );
        let pushed = push_from_centers(stepped, exclusion_centers, cfg.tolerance, cfg.displacement);
        let next = bounds.clamp(pushed);
        k += 1;

        (value, grad) = eval(&next);
        trace.push(TracePoint {
            iter: k,
            position: next,
            objective: value,
        });
        if value > best_objective {
            best_objective = value;
            best_position = next;
        }
        let step = next.horizontal_distance(&r);
        r = next;

        if norm2(grad) < cfg.tolerance {
            break StopReason::GradSmall;
        }
        if step < cfg.tolerance {
            break StopReason::StepSmall;
        }
        if k >= cfg.max_iters {
            break StopReason::MaxIters;
        }
    };
    PlacementResult {
        position: r,
        objective: value,
        trace,
        stop_reason,
        iterations: k,
        best_position,
        best_objective,
    }
}

/// Bounds center, pushed out of any exclusion disc.
pub fn default_start(
    bounds: &Bounds,
    height: f64,
    centers: &[Position3],
    cfg: &OptimizerConfig,
) -> Position3 {
    let center = Position3::new(
        0.5 * (bounds.x_min + bounds.x_max),
        0.5 * (bounds.y_min + bounds.y_max),
        height,
    );
    bounds.clamp(push_from_centers(
        center,
        centers,
        cfg.tolerance,
        cfg.displacement,
    ))
}

fn resolve_bounds(explicit: Option<Bounds>, scn: &Scenario) -> Result<Bounds> {
    let b = explicit.unwrap_or_else(|| scn.region.into());
    if !b.is_valid() {
        return Err(Error::InvalidInput(format!("invalid bounds {b:?}")));
    }
    Ok(b)
}

/// Position maximizing the total D2D throughput.
pub fn optimize_d2d(
    scn: &Scenario,
    channel: &ChannelRealization,
    cfg: &OptimizerConfig,
) -> Result<PlacementResult> {
    if scn.num_pairs() == 0 {
        return Err(Error::DegeneratePopulation(
            "no D2D pairs to place the RIS for",
        ));
    }
    let bounds = resolve_bounds(cfg.bounds, scn)?;
    let centers: Vec<Position3> = scn.d2d_pairs.iter().flat_map(|p| [p.tx, p.rx]).collect();
    let r0 = default_start(&bounds, scn.uav_height, &centers, cfg);
    Ok(gradient_ascent(
        |r| {
            let st = channel.state_at(scn, r);
            (total_d2d(r, &st, scn), grad_d2d(r, &st, scn))
        },
        cfg,
        &bounds,
        &centers,
        r0,
    ))
}

/// Position maximizing the total CU throughput.
pub fn optimize_cu(
    scn: &Scenario,
    channel: &ChannelRealization,
    cfg: &OptimizerConfig,
) -> Result<PlacementResult> {
    if scn.num_cus() == 0 {
        return Err(Error::DegeneratePopulation("no CUs to place the UAV for"));
    }
    let bounds = resolve_bounds(cfg.bounds, scn)?;
    let r0 = default_start(&bounds, scn.uav_height, &scn.cus, cfg);
    Ok(gradient_ascent(
        |r| {
            let st = channel.state_at(scn, r);
            (total_cu(r, &st, scn), grad_cu(r, &st, scn))
        },
        cfg,
        &bounds,
        &scn.cus,
        r0,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointResult {
    /// `objective` holds the ratio deviation at the returned position.
    pub placement: PlacementResult,
    pub report: RateReport,
    pub start: Position3,
    pub start_value: f64,
    pub phi: f64,
}

/// Every probe position of the directional search, in scan order
/// (direction-major, then distance).
pub fn probe_positions(start: &Position3, cfg: &SearchConfig) -> Vec<Position3> {
    let mut probes = Vec::with_capacity(cfg.num_directions * cfg.max_steps);
    for i in 0..cfg.num_directions {
        let theta = (360.0 / cfg.num_directions as f64 * i as f64).to_radians();
        let (dy, dx) = theta.sin_cos();
        for step in 1..=cfg.max_steps {
            let dist = cfg.step_size * step as f64;
            probes.push(Position3::new(
                start.x + dx * dist,
                start.y + dy * dist,
                start.z,
            ));
        }
    }
    probes
}

/// Directional coordinate search for the joint RIS/UAV position.
///
/// Starts from the midpoint of `r_d` and `r_c` and probes `max_steps` points
/// along each of `num_directions` rays, keeping the first probe with the
/// smallest ratio deviation. Probes outside the bounds are skipped.
pub fn joint_search(
    r_d: &Position3,
    r_c: &Position3,
    phi: f64,
    cfg: &SearchConfig,
    scn: &Scenario,
    channel: &ChannelRealization,
) -> Result<JointResult> {
    let errs = cfg.range_errors();
    if !errs.is_empty() {
        return Err(Error::ConfigRange(errs));
    }
    let bounds = resolve_bounds(cfg.bounds, scn)?;
    let start = Position3::new(0.5 * (r_d.x + r_c.x), 0.5 * (r_d.y + r_c.y), scn.uav_height);
    let deviation = |p: &Position3| deviation_of(&report_at(scn, channel, p), phi);
    let start_value = deviation(&start);

    let probes: Vec<(usize, Position3)> = probe_positions(&start, cfg)
        .into_iter()
        .enumerate()
        .filter(|(_, p)| bounds.contains(p))
        .collect();
    let values = evaluate_all(&probes, |(_, p)| deviation(p));

    let mut best = (start, start_value);
    let mut trace = vec![TracePoint {
        iter: 0,
        position: start,
        objective: start_value,
    }];
    for ((idx, p), v) in probes.iter().zip(values) {
        if v < best.1 {
            best = (*p, v);
            trace.push(TracePoint {
                iter: idx + 1,
                position: *p,
                objective: v,
            });
        }
    }
    let (position, objective) = best;
    Ok(JointResult {
        placement: PlacementResult {
            position,
            objective,
            trace,
            stop_reason: StopReason::SearchExhausted,
            iterations: probes.len(),
            best_position: position,
            best_objective: objective,
        },
        report: report_at(scn, channel, &position),
        start,
        start_value,
        phi,
    })
}

/// Joint search with the target ratio taken from the reports at `r_d`, `r_c`.
pub fn joint_search_from_optima(
    r_d: &Position3,
    r_c: &Position3,
    cfg: &SearchConfig,
    scn: &Scenario,
    channel: &ChannelRealization,
) -> Result<JointResult> {
    let phi = target_ratio(&report_at(scn, channel, r_c), &report_at(scn, channel, r_d));
    joint_search(r_d, r_c, phi, cfg, scn, channel)
}

#[cfg(feature = "parallel")]
fn evaluate_all<T: Sync, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> Vec<f64> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all<T, F: Fn(&T) -> f64>(items: &[T], f: F) -> Vec<f64> {
    items.iter().map(f).collect()
}

/// Uniform grid points over `bounds`, row by row (y outer, x inner).
pub fn grid_points(bounds: &Bounds, height: f64, resolution: f64) -> Vec<Position3> {
    let count = |span: f64| (span / resolution + 1e-9).floor() as usize + 1;
    let nx = count(bounds.x_max - bounds.x_min);
    let ny = count(bounds.y_max - bounds.y_min);
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(Position3::new(
                bounds.x_min + i as f64 * resolution,
                bounds.y_min + j as f64 * resolution,
                height,
            ));
        }
    }
    pts
}

/// Exhaustive grid search for the maximum of `objective`; the first maximal
/// point in row-major order wins ties.
pub fn grid_oracle<F>(
    objective: F,
    bounds: &Bounds,
    height: f64,
    resolution: f64,
) -> Result<(Position3, f64)>
where
    F: Fn(&Position3) -> f64 + Sync + Send,
{
    if !(resolution > 0.0) || !bounds.is_valid() {
        return Err(Error::InvalidInput(
            "grid oracle needs a positive resolution and valid bounds".into(),
        ));
    }
    let pts = grid_points(bounds, height, resolution);
    let values = evaluate_all(&pts, |p| objective(p));
    let mut best = (pts[0], values[0]);
    for (p, v) in pts.iter().zip(values) {
        if v > best.1 {
            best = (*p, v);
        }
    }
    Ok(best)
}
