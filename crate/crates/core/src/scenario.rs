//! World geometry: positions, obstacles, scenario generation and line-of-sight
//! classification.
//!
//! Obstacles are axis-aligned boxes standing on the ground. A link is NLoS when
//! the straight segment between its two endpoints passes through any box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::RadioConfig;
use crate::error::{Error, Result};

/// Rejection-sampling budget per placed entity.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

// Independent RNG streams so that, for a fixed seed, the first `k` obstacles
// are the same whatever the total obstacle count is.
const OBSTACLE_STREAM: u64 = 1;
const USER_STREAM: u64 = 2;

/// A point in meters. `z` is the height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= 0.0
    }

    pub fn horizontal_distance(&self, other: &Position3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Same horizontal coordinates, new height.
    pub fn at_height(&self, z: f64) -> Self {
        Self { z, ..*self }
    }
}

/// Euclidean distance in three dimensions.
pub fn distance3(p: &Position3, q: &Position3) -> f64 {
    let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Axis-aligned box obstacle standing on the ground (`z` from 0 to `height`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub height: f64,
}

impl Obstacle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, height: f64) -> Result<Self> {
        let obs = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            height,
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.height]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max || self.height <= 0.0 {
            return Err(Error::InvalidInput(format!("degenerate obstacle {self:?}")));
        }
        Ok(())
    }

    /// Whether the ground footprint contains `(x, y)` (closed rectangle).
    pub fn footprint_contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// Rectangular service area in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Region {
    pub const fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.x_lo, self.x_hi, self.y_lo, self.y_hi]
            .iter()
            .all(|v| v.is_finite())
            && self.x_lo < self.x_hi
            && self.y_lo < self.y_hi
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_lo..=self.x_hi).contains(&x) && (self.y_lo..=self.y_hi).contains(&y)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_lo + self.x_hi), 0.5 * (self.y_lo + self.y_hi))
    }
}

impl Default for Region {
    fn default() -> Self {
        Region::new(0.0, 300.0, 0.0, 300.0)
    }
}

/// A transmitter/receiver pair that talks through the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2dPair {
    pub tx: Position3,
    pub rx: Position3,
}

/// Immutable description of one deployment: users, obstacles, area and radio
/// constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub d2d_pairs: Vec<D2dPair>,
    pub cus: Vec<Position3>,
    pub obstacles: Vec<Obstacle>,
    pub region: Region,
    pub uav_height: f64,
    pub radio: RadioConfig,
}

impl Scenario {
    pub fn num_pairs(&self) -> usize {
        self.d2d_pairs.len()
    }

    pub fn num_cus(&self) -> usize {
        self.cus.len()
    }

    /// Total number of communicating devices, `2M + N`.
    pub fn num_devices(&self) -> usize {
        2 * self.d2d_pairs.len() + self.cus.len()
    }

    /// Every ground user: all transmitters, all receivers, then all CUs.
    pub fn users(&self) -> impl Iterator<Item = &Position3> {
        self.d2d_pairs
            .iter()
            .flat_map(|p| [&p.tx, &p.rx])
            .chain(self.cus.iter())
    }

    /// Lift a horizontal position to the UAV altitude.
    pub fn aerial(&self, x: f64, y: f64) -> Position3 {
        Position3::new(x, y, self.uav_height)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.region.is_valid() {
            return Err(Error::InvalidInput(format!(
                "degenerate region {:?}",
                self.region
            )));
        }
        for obs in &self.obstacles {
            obs.validate()?;
        }
        self.radio.validate()?;
        let mut ground: Option<f64> = None;
        for u in self.users() {
            if !u.is_valid() || !self.region.contains(u.x, u.y) {
                return Err(Error::InvalidInput(format!(
                    "user {u:?} outside region or not finite"
                )));
            }
            match ground {
                None => ground = Some(u.z),
                Some(z) if z != u.z => {
                    return Err(Error::InvalidInput(
                        "users are not at a common ground height".into(),
                    ))
                }
                _ => {}
            }
        }
        if !self.uav_height.is_finite() || self.uav_height <= ground.unwrap_or(0.0) {
            return Err(Error::InvalidInput(format!(
                "uav_height {} must exceed user height",
                self.uav_height
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scn: Scenario = serde_json::from_str(text)?;
        scn.validate()?;
        Ok(scn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    LoS,
    NLoS,
}

impl LinkClass {
    pub(crate) fn index(self) -> usize {
        match self {
            LinkClass::LoS => 0,
            LinkClass::NLoS => 1,
        }
    }
}

/// Slab test of the open segment `pq` against the closed box of `obs`.
///
/// A segment that only touches the box at one of its endpoints is not blocked.
pub fn segment_blocked(p: &Position3, q: &Position3, obs: &Obstacle) -> bool {
    let origin = [p.x, p.y, p.z];
    let dir = [q.x - p.x, q.y - p.y, q.z - p.z];
    let lo = [obs.x_min, obs.y_min, 0.0];
    let hi = [obs.x_max, obs.y_max, obs.height];

    let mut t_enter = 0.0_f64;
    let mut t_exit = 1.0_f64;
    for axis in 0..3 {
        if dir[axis] == 0.0 {
            if origin[axis] < lo[axis] || origin[axis] > hi[axis] {
                return false;
            }
            continue;
        }
        let inv = 1.0 / dir[axis];
        let mut t0 = (lo[axis] - origin[axis]) * inv;
        let mut t1 = (hi[axis] - origin[axis]) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return false;
        }
    }
    // Overlap must include some t strictly inside (0, 1).
    t_enter < 1.0 && t_exit > 0.0
}

pub fn classify_link(p: &Position3, q: &Position3, obstacles: &[Obstacle]) -> LinkClass {
    if obstacles.iter().any(|o| segment_blocked(p, q, o)) {
        LinkClass::NLoS
    } else {
        LinkClass::LoS
    }
}

/// Parameters for random scenario generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub num_pairs: usize,
    pub num_cus: usize,
    pub num_obstacles: usize,
    pub region: Region,
    pub uav_height: f64,
    pub user_height: f64,
    pub max_pair_distance: f64,
    /// Footprint side length range `[lo, hi]`, meters.
    pub obstacle_side: [f64; 2],
    /// Obstacle height range `[lo, hi]`, meters.
    pub obstacle_height: [f64; 2],
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            num_pairs: 80,
            num_cus: 30,
            num_obstacles: 45,
            region: Region::default(),
            uav_height: 25.0,
            user_height: 1.5,
            max_pair_distance: 50.0,
            obstacle_side: [10.0, 30.0],
            obstacle_height: [10.0, 40.0],
        }
    }
}

impl GenerationConfig {
    /// Returns one message per offending key.
    pub fn range_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !self.region.is_valid() {
            errs.push("generation.region: must satisfy x_lo < x_hi and y_lo < y_hi".into());
        }
        if !(self.user_height.is_finite() && self.user_height >= 0.0) {
            errs.push("generation.user_height: must be finite and >= 0".into());
        }
        if !(self.uav_height.is_finite() && self.uav_height > self.user_height) {
            errs.push("generation.uav_height: must exceed user_height".into());
        }
        if !(self.max_pair_distance.is_finite() && self.max_pair_distance > 0.0) {
            errs.push("generation.max_pair_distance: must be > 0".into());
        }
        let [s0, s1] = self.obstacle_side;
        if !(s0.is_finite() && s1.is_finite() && s0 > 0.0 && s0 <= s1) {
            errs.push("generation.obstacle_side: need 0 < lo <= hi".into());
        }
        let [h0, h1] = self.obstacle_height;
        if !(h0.is_finite() && h1.is_finite() && h0 > 0.0 && h0 <= h1) {
            errs.push("generation.obstacle_height: need 0 < lo <= hi".into());
        }
        errs
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Deterministically generate a scenario from `seed`.
///
/// Obstacles are placed fully inside the region. Users are uniform over the
/// region at ground height and never inside an obstacle footprint; each D2D
/// receiver lies within `max_pair_distance` of its transmitter.
pub fn generate_scenario(
    cfg: &GenerationConfig,
    radio: &RadioConfig,
    seed: u64,
) -> Result<Scenario> {
    let errs = cfg.range_errors();
    if !errs.is_empty() {
        return Err(Error::ConfigRange(errs));
    }
    radio.validate()?;
    let region = cfg.region;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(OBSTACLE_STREAM);
    let mut obstacles = Vec::with_capacity(cfg.num_obstacles);
    for i in 0..cfg.num_obstacles {
        let w = uniform(&mut rng, cfg.obstacle_side[0], cfg.obstacle_side[1]);
        let d = uniform(&mut rng, cfg.obstacle_side[0], cfg.obstacle_side[1]);
        let h = uniform(&mut rng, cfg.obstacle_height[0], cfg.obstacle_height[1]);
        if w >= region.x_hi - region.x_lo || d >= region.y_hi - region.y_lo {
            return Err(Error::Generation(format!(
                "obstacle {i} ({w:.1} x {d:.1} m) does not fit in the region"
            )));
        }
        let x0 = uniform(&mut rng, region.x_lo, region.x_hi - w);
        let y0 = uniform(&mut rng, region.y_lo, region.y_hi - d);
        obstacles.push(Obstacle {
            x_min: x0,
            x_max: x0 + w,
            y_min: y0,
            y_max: y0 + d,
            height: h,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(USER_STREAM);
    let z = cfg.user_height;
    let free = |x: f64, y: f64| !obstacles.iter().any(|o| o.footprint_contains(x, y));

    let place_user = |rng: &mut ChaCha8Rng, what: &str| -> Result<Position3> {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let x = uniform(rng, region.x_lo, region.x_hi);
            let y = uniform(rng, region.y_lo, region.y_hi);
            if free(x, y) {
                return Ok(Position3::new(x, y, z));
            }
        }
        Err(Error::Generation(format!(
            "could not place {what} outside obstacles after {MAX_PLACEMENT_ATTEMPTS} attempts"
        )))
    };

    let mut d2d_pairs = Vec::with_capacity(cfg.num_pairs);
    for m in 0..cfg.num_pairs {
        let tx = place_user(&mut rng, &format!("D2D transmitter {m}"))?;
        let mut rx = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            // Uniform over the disc around the transmitter.
            let radius = cfg.max_pair_distance * rng.random::<f64>().sqrt();
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let (x, y) = (tx.x + radius * angle.cos(), tx.y + radius * angle.sin());
            if radius > 0.0 && region.contains(x, y) && free(x, y) {
                rx = Some(Position3::new(x, y, z));
                break;
            }
        }
        let rx = rx.ok_or_else(|| {
            Error::Generation(format!(
                "could not place D2D receiver {m} after {MAX_PLACEMENT_ATTEMPTS} attempts"
            ))
        })?;
        d2d_pairs.push(D2dPair { tx, rx });
    }

    let mut cus = Vec::with_capacity(cfg.num_cus);
    for n in 0..cfg.num_cus {
        cus.push(place_user(&mut rng, &format!("CU {n}"))?);
    }

    Ok(Scenario {
        d2d_pairs,
        cus,
        obstacles,
        region,
        uav_height: cfg.uav_height,
        radio: radio.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tower() -> Obstacle {
        Obstacle::new(40.0, 60.0, 40.0, 60.0, 50.0).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = Position3::new(1.0, 2.0, 3.0);
        assert_eq!(distance3(&p, &p), 0.0);
        assert_eq!(
            distance3(
                &Position3::new(0.0, 0.0, 0.0),
                &Position3::new(3.0, 4.0, 0.0)
            ),
            5.0
        );
        assert_eq!(
            distance3(
                &Position3::new(0.0, 0.0, 1.5),
                &Position3::new(0.0, 0.0, 25.0)
            ),
            23.5
        );
    }

    #[test]
    fn diagonal_through_tower_is_blocked() {
        // Midpoint (50, 50, 13.25) is strictly inside the box.
        let p = Position3::new(0.0, 0.0, 1.5);
        let q = Position3::new(100.0, 100.0, 25.0);
        assert!(segment_blocked(&p, &q, &tower()));
        assert_eq!(classify_link(&p, &q, &[tower()]), LinkClass::NLoS);
    }

    #[test]
    fn disjoint_x_range_is_clear() {
        let p = Position3::new(0.0, 0.0, 1.5);
        let q = Position3::new(10.0, 0.0, 25.0);
        assert!(!segment_blocked(&p, &q, &tower()));
    }

    #[test]
    fn obstacle_behind_receiver_is_clear() {
        let p = Position3::new(0.0, 50.0, 1.5);
        let q = Position3::new(30.0, 50.0, 25.0);
        assert_eq!(classify_link(&p, &q, &[tower()]), LinkClass::LoS);
        // Extending the segment past the tower would hit it.
        let far = Position3::new(70.0, 50.0, 25.0);
        assert_eq!(classify_link(&p, &far, &[tower()]), LinkClass::NLoS);
    }

    #[test]
    fn empty_obstacle_list_is_los() {
        let p = Position3::new(0.0, 0.0, 1.5);
        let q = Position3::new(100.0, 100.0, 25.0);
        assert_eq!(classify_link(&p, &q, &[]), LinkClass::LoS);
    }

    #[test]
    fn endpoint_on_face_is_not_blocked() {
        // User leaning on the west wall, segment heading away from the box.
        let p = Position3::new(40.0, 50.0, 1.5);
        let q = Position3::new(0.0, 50.0, 25.0);
        assert!(!segment_blocked(&p, &q, &tower()));
        // Same user, segment crossing the box interior.
        let q = Position3::new(100.0, 50.0, 25.0);
        assert!(segment_blocked(&p, &q, &tower()));
    }

    #[test]
    fn segment_over_roof_is_clear() {
        let low = Obstacle::new(40.0, 60.0, 40.0, 60.0, 5.0).unwrap();
        let p = Position3::new(0.0, 50.0, 10.0);
        let q = Position3::new(100.0, 50.0, 25.0);
        assert!(!segment_blocked(&p, &q, &low));
    }

    #[test]
    fn degenerate_obstacle_rejected() {
        assert!(Obstacle::new(1.0, 1.0, 0.0, 2.0, 3.0).is_err());
        assert!(Obstacle::new(0.0, 1.0, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenerationConfig::default();
        let a = generate_scenario(&cfg, &RadioConfig::default(), 11).unwrap();
        let b = generate_scenario(&cfg, &RadioConfig::default(), 11).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&cfg, &RadioConfig::default(), 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn default_counts() {
        let scn =
            generate_scenario(&GenerationConfig::default(), &RadioConfig::default(), 3).unwrap();
        assert_eq!(scn.num_pairs(), 80);
        assert_eq!(scn.num_cus(), 30);
        assert_eq!(scn.num_devices(), 190);
        assert_eq!(scn.obstacles.len(), 45);
    }

    #[test]
    fn obstacles_nested_across_counts() {
        let mut cfg = GenerationConfig::default();
        cfg.num_obstacles = 15;
        let few = generate_scenario(&cfg, &RadioConfig::default(), 5).unwrap();
        cfg.num_obstacles = 45;
        let many = generate_scenario(&cfg, &RadioConfig::default(), 5).unwrap();
        assert_eq!(few.obstacles[..], many.obstacles[..15]);
    }

    #[test]
    fn no_obstacles_means_all_los() {
        let cfg = GenerationConfig {
            num_obstacles: 0,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg, &RadioConfig::default(), 9).unwrap();
        let uav = scn.aerial(17.0, 230.0);
        assert!(scn
            .users()
            .all(|u| classify_link(u, &uav, &scn.obstacles) == LinkClass::LoS));
    }

    #[test]
    fn oversized_obstacle_fails() {
        let cfg = GenerationConfig {
            region: Region::new(0.0, 20.0, 0.0, 20.0),
            obstacle_side: [25.0, 30.0],
            ..Default::default()
        };
        match generate_scenario(&cfg, &RadioConfig::default(), 1) {
            Err(Error::Generation(msg)) => assert!(msg.contains("does not fit"), "{msg}"),
            other => panic!("expected generation failure, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = GenerationConfig {
            num_pairs: 4,
            num_cus: 3,
            num_obstacles: 5,
            ..Default::default()
        };
        let scn = generate_scenario(&cfg, &RadioConfig::default(), 21).unwrap();
        let text = scn.to_json().unwrap();
        assert!(text.contains("\"d2d_pairs\"") && text.contains("\"uav_height\""));
        assert_eq!(Scenario::from_json(&text).unwrap(), scn);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -200.0..200.0f64
    }

    fn point() -> impl Strategy<Value = Position3> {
        (coord(), coord(), 0.0..60.0f64).prop_map(|(x, y, z)| Position3::new(x, y, z))
    }

    fn obstacle() -> impl Strategy<Value = Obstacle> {
        (coord(), coord(), 1.0..40.0f64, 1.0..40.0f64, 1.0..50.0f64)
            .prop_map(|(x, y, w, d, h)| Obstacle::new(x, x + w, y, y + d, h).unwrap())
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in point(), b in point(), c in point()) {
            prop_assert!(distance3(&a, &c) <= distance3(&a, &b) + distance3(&b, &c) + 1e-9);
            prop_assert_eq!(distance3(&a, &b), distance3(&b, &a));
        }

        #[test]
        fn blocking_symmetric(p in point(), q in point(), o in obstacle()) {
            prop_assume!(p != q);
            prop_assert_eq!(segment_blocked(&p, &q, &o), segment_blocked(&q, &p, &o));
        }

        #[test]
        fn blocking_translation_invariant(
            (px, py, pz) in (-200i32..200, -200i32..200, 0i32..60),
            (qx, qy, qz) in (-200i32..200, -200i32..200, 0i32..60),
            (ox, oy, w, d, h) in (-200i32..200, -200i32..200, 1i32..40, 1i32..40, 1i32..50),
            (dx, dy) in (-500i32..500, -500i32..500),
        ) {
            // Integer coordinates keep the translated arithmetic exact.
            let p = Position3::new(px as f64, py as f64, pz as f64);
            let q = Position3::new(qx as f64, qy as f64, qz as f64);
            prop_assume!(p != q);
            let o = Obstacle::new(ox as f64, (ox + w) as f64, oy as f64, (oy + d) as f64, h as f64)
                .unwrap();
            let (dx, dy) = (dx as f64, dy as f64);
            let shift = |v: &Position3| Position3::new(v.x + dx, v.y + dy, v.z);
            let moved = Obstacle {
                x_min: o.x_min + dx, x_max: o.x_max + dx,
                y_min: o.y_min + dy, y_max: o.y_max + dy, height: o.height,
            };
            prop_assert_eq!(
                segment_blocked(&p, &q, &o),
                segment_blocked(&shift(&p), &shift(&q), &moved)
            );
        }

        #[test]
        fn classification_order_independent(
            p in point(), q in point(), obs in prop::collection::vec(obstacle(), 0..8),
        ) {
            prop_assume!(p != q);
            let mut rev = obs.clone();
            rev.reverse();
            prop_assert_eq!(classify_link(&p, &q, &obs), classify_link(&p, &q, &rev));
        }
    }

    #[test]
    fn generated_scenarios_satisfy_invariants() {
        let cfg = GenerationConfig {
            num_pairs: 10,
            num_cus: 6,
            ..Default::default()
        };
        for seed in 0..1000 {
            let scn = generate_scenario(&cfg, &RadioConfig::default(), seed).unwrap();
            scn.validate().unwrap();
            for pair in &scn.d2d_pairs {
                assert!(pair.tx.horizontal_distance(&pair.rx) <= cfg.max_pair_distance);
            }
            for u in scn.users() {
                assert_eq!(u.z, cfg.user_height);
                assert!(!scn.obstacles.iter().any(|o| o.footprint_contains(u.x, u.y)));
            }
        }
    }
}
