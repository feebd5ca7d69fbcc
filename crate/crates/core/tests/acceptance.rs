//! Acceptance criteria 1 to 10. Each test writes one `criterion N: PASS|FAIL`
//! line to stdout (uncaptured) before asserting.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risuav::channel::{
    dbm_to_watt, path_loss_db, received_power_d2d_dbm, sample_fading_amp, ChannelMode,
    ChannelRealization, RadioConfig,
};
use risuav::harness::{run_trial, ExperimentConfig, ModeKind, Scheme, SweepPoint, TrialOutcome};
use risuav::placement::{
    grad_cu, grad_d2d, grid_oracle, joint_search, optimize_cu, optimize_d2d, Bounds,
    OptimizerConfig, SearchConfig, StopReason,
};
use risuav::scenario::{
    generate_scenario, GenerationConfig, LinkClass, Position3, Region, Scenario,
};
use risuav::throughput::{cu_rate, d2d_rate, report_at, target_ratio, total_cu, total_d2d};

const TRIALS: u64 = 20;
const OBSTACLE_SWEEP: [usize; 5] = [0, 15, 30, 45, 60];
const K_SWEEP: [f64; 3] = [0.0, 5.0, 10.0];

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n}: {verdict} {detail}");
    let _ = out.flush();
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn table_scenario(seed: u64) -> Scenario {
    generate_scenario(&GenerationConfig::default(), &RadioConfig::default(), seed).unwrap()
}

struct Sweep {
    points: Vec<(usize, Vec<TrialOutcome>, Duration)>,
}

impl Sweep {
    fn at(&self, obstacles: usize) -> (&[TrialOutcome], Duration) {
        let (_, t, d) = self.points.iter().find(|p| p.0 == obstacles).unwrap();
        (t, *d)
    }
}

fn obstacle_sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let cfg = ExperimentConfig::default();
        let points = OBSTACLE_SWEEP
            .iter()
            .map(|&n| {
                let start = Instant::now();
                let trials = (0..TRIALS)
                    .map(|i| run_trial(&cfg, cfg.base_seed + i, SweepPoint::Obstacles(n)).unwrap())
                    .collect();
                (n, trials, start.elapsed())
            })
            .collect();
        Sweep { points }
    })
}

fn scheme_mean(
    trials: &[TrialOutcome],
    scheme: Scheme,
    f: impl Fn(&TrialOutcome, Scheme) -> f64,
) -> f64 {
    mean(trials.iter().map(|t| f(t, scheme)))
}

#[test]
fn criterion_01_gradient_fidelity() {
    let start = Instant::now();
    let scn = table_scenario(11);
    let h = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for mode in [ChannelMode::Expected, ChannelMode::Sampled { seed: 5 }] {
        let chan = ChannelRealization::new(&scn, mode);
        let mut here = 0;
        while here < 100 {
            let r = scn.aerial(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0));
            let st = chan.state_at(&scn, &r);
            let shifted = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)]
                .map(|(dx, dy)| Position3::new(r.x + dx, r.y + dy, r.z));
            if shifted.iter().any(|p| chan.state_at(&scn, p) != st) {
                continue;
            }
            for (f, g) in [
                (
                    total_d2d as fn(&Position3, _, &Scenario) -> f64,
                    grad_d2d(&r, &st, &scn),
                ),
                (total_cu, grad_cu(&r, &st, &scn)),
            ] {
                let fd = [
                    (f(&shifted[0], &st, &scn) - f(&shifted[1], &st, &scn)) / (2.0 * h),
                    (f(&shifted[2], &st, &scn) - f(&shifted[3], &st, &scn)) / (2.0 * h),
                ];
                let err = (g[0] - fd[0]).hypot(g[1] - fd[1]) / fd[0].hypot(fd[1]);
                worst = worst.max(err);
            }
            here += 1;
        }
        checked += here;
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-5 && elapsed < Duration::from_secs(5);
    report(
        1,
        pass,
        &format!(
            "{checked} positions, worst rel err {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Worst relative gap between both gradient ascents and the 1 m grid optimum.
fn oracle_gap(gen: &GenerationConfig, seed: u64) -> f64 {
    let scn = generate_scenario(gen, &RadioConfig::default(), seed).unwrap();
    let chan = ChannelRealization::new(&scn, ChannelMode::Expected);
    let cfg = OptimizerConfig::default();
    let bounds = Bounds::from(scn.region);
    let d2d = optimize_d2d(&scn, &chan, &cfg).unwrap();
    let (_, d2d_best) = grid_oracle(
        |r| total_d2d(r, &chan.state_at(&scn, r), &scn),
        &bounds,
        scn.uav_height,
        1.0,
    )
    .unwrap();
    let cu = optimize_cu(&scn, &chan, &cfg).unwrap();
    let (_, cu_best) = grid_oracle(
        |r| total_cu(r, &chan.state_at(&scn, r), &scn),
        &bounds,
        scn.uav_height,
        1.0,
    )
    .unwrap();
    ((d2d_best - d2d.objective) / d2d_best).max((cu_best - cu.objective) / cu_best)
}

#[test]
fn criterion_02_oracle_equivalence() {
    let start = Instant::now();
    let instances: Vec<(GenerationConfig, u64)> = (0..10u64)
        .map(|i| {
            let gen = GenerationConfig {
                num_pairs: 1 + (i as usize % 5),
                num_cus: 1 + ((i as usize + 2) % 5),
                num_obstacles: i as usize % 4,
                region: Region::new(0.0, 100.0, 0.0, 100.0),
                obstacle_side: [5.0, 15.0],
                max_pair_distance: 30.0,
                ..Default::default()
            };
            (gen, 200 + i)
        })
        .collect();
    let gaps: Vec<f64> = instances.iter().map(|(g, s)| oracle_gap(g, *s)).collect();
    let elapsed = start.elapsed();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    let misses = gaps.iter().filter(|g| **g > 0.01).count();
    let clear = instances
        .iter()
        .map(|(g, s)| {
            let gen = GenerationConfig {
                num_obstacles: 0,
                ..g.clone()
            };
            oracle_gap(&gen, *s)
        })
        .fold(0.0, f64::max);
    let pass = worst <= 0.01 && elapsed < Duration::from_secs(60);
    report(
        2,
        pass,
        &format!(
            "worst gap to grid optimum {:.3}% ({misses}/10 instances over 1%), {:.1}s; \
             same instances without obstacles: worst gap {:.3}%",
            worst * 100.0,
            elapsed.as_secs_f64(),
            clear * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_joint_search_identity() {
    let mut pass = true;
    for seed in [3u64, 4, 5] {
        let scn = table_scenario(seed);
        let chan = ChannelRealization::new(&scn, ChannelMode::Sampled { seed });
        let r = optimize_d2d(&scn, &chan, &OptimizerConfig::default())
            .unwrap()
            .position;
        let at_r = report_at(&scn, &chan, &r);
        let phi = target_ratio(&at_r, &at_r);
        let joint = joint_search(&r, &r, phi, &SearchConfig::default(), &scn, &chan).unwrap();
        pass &= joint.start == r
            && joint.start_value == 0.0
            && joint.placement.position == r
            && joint.placement.objective == 0.0
            && joint.report.net == at_r.net;
    }
    report(
        3,
        pass,
        "T(s0) = 0 and identical net at r_D = r_C on 3 scenarios",
    );
    assert!(pass);
}

#[test]
fn criterion_04_joint_beats_baselines() {
    let (trials, elapsed) = obstacle_sweep().at(45);
    let net = |t: &TrialOutcome, s| t.scheme(s).report.net;
    let joint = scheme_mean(trials, Scheme::JointOpt, net);
    let d2d = scheme_mean(trials, Scheme::D2DOnlyPlacement, net);
    let cu = scheme_mean(trials, Scheme::CUOnlyPlacement, net);
    let wins = |other| {
        trials
            .iter()
            .filter(|t| net(t, Scheme::JointOpt) >= net(t, other))
            .count()
    };
    let (w_d, w_c) = (
        wins(Scheme::D2DOnlyPlacement),
        wins(Scheme::CUOnlyPlacement),
    );
    let pass = joint >= d2d && joint >= cu && elapsed < Duration::from_secs(600);
    report(
        4,
        pass,
        &format!(
            "mean net joint {joint:.2} d2d-only {d2d:.2} cu-only {cu:.2}; \
             win rate {w_d}/{n} vs d2d-only, {w_c}/{n} vs cu-only; {:.0}s",
            elapsed.as_secs_f64(),
            n = trials.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_obstacle_monotonicity() {
    let sweep = obstacle_sweep();
    let mut pass = true;
    let mut detail = Vec::new();
    for scheme in Scheme::ALL {
        let means: Vec<f64> = OBSTACLE_SWEEP
            .iter()
            .map(|&n| scheme_mean(sweep.at(n).0, scheme, |t, s| t.scheme(s).report.net))
            .collect();
        let rises: Vec<f64> = means
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[1] - w[0]) / w[0])
            .collect();
        let ok = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.05);
        pass &= ok;
        let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
        detail.push(format!("{} [{}]", scheme.as_str(), shown.join(", ")));
    }
    report(5, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_06_rician_k_trend() {
    let cfg = ExperimentConfig {
        mode: ModeKind::Sampled,
        ..Default::default()
    };
    let means: Vec<(f64, f64)> = K_SWEEP
        .iter()
        .map(|&k| {
            let trials: Vec<TrialOutcome> = (0..TRIALS)
                .map(|i| run_trial(&cfg, cfg.base_seed + i, SweepPoint::RicianK(k)).unwrap())
                .collect();
            (
                scheme_mean(&trials, Scheme::D2DOnlyPlacement, |t, s| {
                    t.scheme(s).report.d2d_total
                }),
                scheme_mean(&trials, Scheme::CUOnlyPlacement, |t, s| {
                    t.scheme(s).report.cu_total
                }),
            )
        })
        .collect();
    let pass = means.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    let shown: Vec<String> = K_SWEEP
        .iter()
        .zip(&means)
        .map(|(k, (d, c))| format!("K={k}: D2D {d:.2} CU {c:.2}"))
        .collect();
    report(6, pass, &shown.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_jain_fairness() {
    let sweep = obstacle_sweep();
    let mut pass = true;
    let mut detail = Vec::new();
    for &n in &OBSTACLE_SWEEP {
        let trials = sweep.at(n).0;
        let jain = |s| scheme_mean(trials, s, |t, s| t.scheme(s).jain.value);
        let (j, d, c) = (
            jain(Scheme::JointOpt),
            jain(Scheme::D2DOnlyPlacement),
            jain(Scheme::CUOnlyPlacement),
        );
        pass &= j >= d && j >= c;
        detail.push(format!("{n}: {j:.4}/{d:.4}/{c:.4}"));
    }
    report(
        7,
        pass,
        &format!(
            "mean Jain joint/d2d-only/cu-only by obstacles {}",
            detail.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_fading_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for k in [0.0, 3.0, 10.0] {
        let ms = (0..draws)
            .map(|_| sample_fading_amp(LinkClass::LoS, k, &mut rng).powi(2))
            .sum::<f64>()
            / draws as f64;
        worst = worst.max((ms - 1.0).abs());
        detail.push(format!("K={k}: {ms:.5}"));
    }
    let ms = (0..draws)
        .map(|_| sample_fading_amp(LinkClass::NLoS, 10.0, &mut rng).powi(2))
        .sum::<f64>()
        / draws as f64;
    worst = worst.max((ms - 1.0).abs());
    detail.push(format!("NLoS: {ms:.5}"));
    let pass = worst < 0.01;
    report(8, pass, &detail.join(", "));
    assert!(pass);
}

#[test]
fn criterion_09_convergence_bookkeeping() {
    let max_iters = OptimizerConfig::default().max_iters;
    let declared = [
        StopReason::GradSmall,
        StopReason::StepSmall,
        StopReason::MaxIters,
    ];
    let mut runs = 0;
    let mut pass = true;
    for (_, trials, _) in &obstacle_sweep().points {
        for t in trials {
            for run in [&t.d2d_run, &t.cu_run] {
                runs += 1;
                pass &= declared.contains(&run.stop_reason)
                    && run.iterations <= max_iters
                    && run.trace.len() == run.iterations + 1
                    && (run.stop_reason != StopReason::MaxIters || run.iterations == max_iters);
            }
        }
    }
    let cfg = ExperimentConfig::default();
    let reruns = [1u64, 2];
    let identical = reruns.iter().all(|&seed| {
        let a = run_trial(&cfg, seed, SweepPoint::Baseline).unwrap();
        let b = run_trial(&cfg, seed, SweepPoint::Baseline).unwrap();
        a == b
            && a.schemes
                .iter()
                .zip(&b.schemes)
                .all(|(x, y)| x.report.net.to_bits() == y.report.net.to_bits())
    });
    pass &= identical;
    report(
        9,
        pass,
        &format!("{runs} runs with declared stops; reruns identical: {identical}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_pipeline_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut links = 0;
    while links < 1000 {
        let scn = table_scenario(rng.random_range(0..1_000_000));
        let chan = ChannelRealization::new(&scn, ChannelMode::Sampled { seed: rng.random() });
        let r = scn.aerial(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0));
        let st = chan.state_at(&scn, &r);
        let radio = &scn.radio;
        let noise = dbm_to_watt(radio.noise_dbm);
        for _ in 0..50 {
            let m = rng.random_range(0..scn.num_pairs());
            let prx = received_power_d2d_dbm(&scn, m, &st, &r).unwrap();
            let snr = st.pairs[m].kappa * dbm_to_watt(prx) / noise;
            let direct = snr.ln_1p() / std::f64::consts::LN_2;
            let reduced = d2d_rate(m, &r, &st, &scn);
            worst = worst.max((reduced - direct).abs() / direct);

            let n = rng.random_range(0..scn.num_cus());
            let cu = &st.cus[n];
            let d = risuav::scenario::distance3(&scn.cus[n], &r);
            let prx = radio.tx_power_cu_dbm + radio.gain_tx_dbi + radio.gain_uav_dbi
                - path_loss_db(d, cu.class, radio).unwrap();
            let snr = cu.f_sq * dbm_to_watt(prx) / noise;
            let direct = snr.ln_1p() / std::f64::consts::LN_2;
            let reduced = cu_rate(n, &r, &st, &scn);
            worst = worst.max((reduced - direct).abs() / direct);
            links += 2;
        }
    }
    let pass = worst < 1e-10;
    report(
        10,
        pass,
        &format!("{links} links, worst rel err {worst:.2e}"),
    );
    assert!(pass);
}
