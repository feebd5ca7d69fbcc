//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: scenario generation, a throughput heat map
//! over the service area, and a full placement trial (both gradient ascents
//! plus the joint search). Scenarios cross the boundary as JSON text.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use risuav::harness::{run_trial_on, ExperimentConfig, ModeKind, SweepPoint};
use risuav::placement::{grid_points, Bounds, PlacementResult};
use risuav::{generate_scenario, ChannelRealization, GenerationConfig, RadioConfig, Scenario};

fn mode_from(name: &str) -> Result<ModeKind, String> {
    name.parse::<ModeKind>().map_err(|e| e.to_string())
}

pub fn generate_json(
    seed: u64,
    pairs: usize,
    cus: usize,
    obstacles: usize,
    rician_k: f64,
) -> Result<String, String> {
    let cfg = GenerationConfig {
        num_pairs: pairs,
        num_cus: cus,
        num_obstacles: obstacles,
        ..Default::default()
    };
    let radio = RadioConfig {
        rician_k,
        ..Default::default()
    };
    let scn = generate_scenario(&cfg, &radio, seed).map_err(|e| e.to_string())?;
    scn.to_json().map_err(|e| e.to_string())
}

/// Heat map of `quantity` (`net`, `d2d`, `cu` or `jain`) on a grid with the
/// given spacing. The first two entries are the column and row counts,
/// followed by the values row by row from the region's lower-left corner.
pub fn field_values(
    scenario_json: &str,
    quantity: &str,
    resolution: f64,
    mode: &str,
    fading_seed: u64,
) -> Result<Vec<f64>, String> {
    let scn = Scenario::from_json(scenario_json).map_err(|e| e.to_string())?;
    if !(resolution > 0.0) {
        return Err("resolution must be positive".into());
    }
    let channel = ChannelRealization::new(&scn, mode_from(mode)?.channel_mode(fading_seed));
    let bounds = Bounds::from(scn.region);
    let pts = grid_points(&bounds, scn.uav_height, resolution);
    let nx = pts.iter().take_while(|p| p.y == pts[0].y).count();
    let ny = pts.len() / nx;
    let pick: fn(&risuav::RateReport) -> f64 = match quantity {
        "net" => |r| r.net,
        "d2d" => |r| r.d2d_total,
        "cu" => |r| r.cu_total,
        "jain" => |r| r.fairness().value,
        other => return Err(format!("unknown quantity `{other}`")),
    };
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(nx as f64);
    out.push(ny as f64);
    out.extend(
        pts.iter()
            .map(|p| pick(&risuav::throughput::report_at(&scn, &channel, p))),
    );
    Ok(out)
}

#[derive(Serialize)]
struct RunView {
    x: f64,
    y: f64,
    objective: f64,
    iterations: usize,
    stop_reason: &'static str,
    trace: Vec<[f64; 3]>,
}

impl From<&PlacementResult> for RunView {
    fn from(r: &PlacementResult) -> Self {
        RunView {
            x: r.position.x,
            y: r.position.y,
            objective: r.objective,
            iterations: r.iterations,
            stop_reason: r.stop_reason.as_str(),
            trace: r
                .trace
                .iter()
                .map(|t| [t.position.x, t.position.y, t.objective])
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct SchemeView {
    scheme: &'static str,
    x: f64,
    y: f64,
    d2d_total: f64,
    cu_total: f64,
    net: f64,
    jain: f64,
    t_value: f64,
}

#[derive(Serialize)]
struct PlaceView {
    d2d: RunView,
    cu: RunView,
    joint: RunView,
    phi: f64,
    schemes: Vec<SchemeView>,
}

/// Runs one placement trial and returns positions, traces and rates as JSON.
pub fn place_json(
    scenario_json: &str,
    learning_rate: f64,
    num_directions: usize,
    max_steps: usize,
    mode: &str,
    fading_seed: u64,
) -> Result<String, String> {
    let scn = Scenario::from_json(scenario_json).map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig {
        mode: mode_from(mode)?,
        ..Default::default()
    };
    cfg.optimizer.learning_rate = learning_rate;
    cfg.search.num_directions = num_directions;
    cfg.search.max_steps = max_steps;
    cfg.validate().map_err(|e| e.to_string())?;
    let t =
        run_trial_on(&cfg, fading_seed, SweepPoint::Baseline, &scn).map_err(|e| e.to_string())?;
    let view = PlaceView {
        d2d: (&t.d2d_run).into(),
        cu: (&t.cu_run).into(),
        joint: (&t.joint_run).into(),
        phi: t.phi,
        schemes: t
            .schemes
            .iter()
            .map(|s| SchemeView {
                scheme: s.scheme.as_str(),
                x: s.position.x,
                y: s.position.y,
                d2d_total: s.report.d2d_total,
                cu_total: s.report.cu_total,
                net: s.report.net,
                jain: s.jain.value,
                t_value: s.t_value,
            })
            .collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(
    seed: u32,
    pairs: u32,
    cus: u32,
    obstacles: u32,
    rician_k: f64,
) -> Result<String, JsValue> {
    generate_json(
        seed as u64,
        pairs as usize,
        cus as usize,
        obstacles as usize,
        rician_k,
    )
    .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn throughput_field(
    scenario_json: &str,
    quantity: &str,
    resolution: f64,
    mode: &str,
    fading_seed: u32,
) -> Result<Vec<f64>, JsValue> {
    field_values(
        scenario_json,
        quantity,
        resolution,
        mode,
        fading_seed as u64,
    )
    .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn place(
    scenario_json: &str,
    learning_rate: f64,
    num_directions: u32,
    max_steps: u32,
    mode: &str,
    fading_seed: u32,
) -> Result<String, JsValue> {
    place_json(
        scenario_json,
        learning_rate,
        num_directions as usize,
        max_steps as usize,
        mode,
        fading_seed as u64,
    )
    .map_err(|e| JsValue::from_str(&e))
}
