//! mmWave link budget.
//!
//! Path loss follows the log-distance law `PL = alpha + 10 beta log10(d)` with
//! separate constants for LoS and NLoS links. Small-scale fading is Rician on
//! LoS links and Rayleigh on NLoS links, normalized to unit mean-square power
//! so all large-scale effects stay in the path-loss term.
//!
//! RIS phases are assumed perfectly compensated, so a D2D pair only sees the
//! coherent amplitude sum `kappa = (sum_z |h_z| |g_z|)^2` over the R elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{classify_link, distance3, LinkClass, Position3, Scenario};

/// K-factors above this are treated as pure LoS.
pub const RICIAN_K_CAP: f64 = 1e6;

const FADING_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossParams {
    pub alpha_db: f64,
    pub beta: f64,
}

/// Radio constants shared by every link in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub tx_power_d2d_dbm: f64,
    pub tx_power_cu_dbm: f64,
    /// Transmit antenna gain of D2D transmitters and CUs.
    pub gain_tx_dbi: f64,
    /// Receive antenna gain of D2D receivers.
    pub gain_rx_dbi: f64,
    pub gain_uav_dbi: f64,
    pub noise_dbm: f64,
    pub ris_elements: u32,
    pub pl_los: PathLossParams,
    pub pl_nlos: PathLossParams,
    pub rician_k: f64,
    /// Informational only; the path-loss constants already encode it.
    pub carrier_ghz: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_power_d2d_dbm: 30.0,
            tx_power_cu_dbm: 30.0,
            gain_tx_dbi: 24.5,
            gain_rx_dbi: 24.5,
            gain_uav_dbi: 24.5,
            noise_dbm: -100.0,
            ris_elements: 250,
            pl_los: PathLossParams {
                alpha_db: 61.2,
                beta: 2.0,
            },
            pl_nlos: PathLossParams {
                alpha_db: 72.0,
                beta: 2.92,
            },
            rician_k: 5.0,
            carrier_ghz: 28.0,
        }
    }
}

impl RadioConfig {
    pub fn path_loss(&self, class: LinkClass) -> PathLossParams {
        match class {
            LinkClass::LoS => self.pl_los,
            LinkClass::NLoS => self.pl_nlos,
        }
    }

    pub fn noise_watt(&self) -> f64 {
        dbm_to_watt(self.noise_dbm)
    }

    pub fn range_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let finite = [
            ("radio.tx_power_d2d_dbm", self.tx_power_d2d_dbm),
            ("radio.tx_power_cu_dbm", self.tx_power_cu_dbm),
            ("radio.gain_tx_dbi", self.gain_tx_dbi),
            ("radio.gain_rx_dbi", self.gain_rx_dbi),
            ("radio.gain_uav_dbi", self.gain_uav_dbi),
            ("radio.noise_dbm", self.noise_dbm),
            ("radio.pl_los.alpha_db", self.pl_los.alpha_db),
            ("radio.pl_nlos.alpha_db", self.pl_nlos.alpha_db),
            ("radio.carrier_ghz", self.carrier_ghz),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                errs.push(format!("{key}: must be finite"));
            }
        }
        if self.ris_elements < 1 {
            errs.push("radio.ris_elements: must be >= 1".into());
        }
        for (key, b) in [
            ("radio.pl_los.beta", self.pl_los.beta),
            ("radio.pl_nlos.beta", self.pl_nlos.beta),
        ] {
            if !(b.is_finite() && b > 0.0) {
                errs.push(format!("{key}: must be > 0"));
            }
        }
        if !(self.rician_k >= 0.0) {
            errs.push("radio.rician_k: must be >= 0".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.range_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigRange(errs))
        }
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

/// Log-distance path loss in dB for a link of length `d` meters.
pub fn path_loss_db(d: f64, class: LinkClass, radio: &RadioConfig) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidInput(format!(
            "path loss needs a positive distance, got {d}"
        )));
    }
    let pl = radio.path_loss(class);
    Ok(pl.alpha_db + 10.0 * pl.beta * d.log10())
}

/// Fading amplitude built from two standard normal draws.
///
/// Rician and Rayleigh consume the same two draws, so changing a link's class
/// at a fixed seed does not shift the random stream of other links.
pub fn fading_amp_from_normals(class: LinkClass, k: f64, n_re: f64, n_im: f64) -> f64 {
    let k = match class {
        LinkClass::LoS => k.min(RICIAN_K_CAP),
        LinkClass::NLoS => 0.0,
    };
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (2.0 * (k + 1.0))).sqrt();
    (los + scatter * n_re).hypot(scatter * n_im)
}

/// Draw one fading amplitude with unit mean-square power.
pub fn sample_fading_amp<R: Rng + ?Sized>(class: LinkClass, k: f64, rng: &mut R) -> f64 {
    let n_re: f64 = rng.sample(StandardNormal);
    let n_im: f64 = rng.sample(StandardNormal);
    fading_amp_from_normals(class, k, n_re, n_im)
}

/// How small-scale fading is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// All amplitudes equal to one.
    Expected,
    /// One frozen random draw per trial.
    Sampled { seed: u64 },
}

/// One fading realization of a scenario, independent of the UAV position.
///
/// Per D2D pair the coherent gain is precomputed for each of the four
/// (in-hop, out-hop) class combinations, and per CU the power gain for both
/// classes. Evaluating a position then only costs the LoS classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    mode: ChannelMode,
    pair_kappa: Vec<[f64; 4]>,
    cu_gain: Vec<[f64; 2]>,
}

const CLASSES: [LinkClass; 2] = [LinkClass::LoS, LinkClass::NLoS];

fn kappa_index(hop_in: LinkClass, hop_out: LinkClass) -> usize {
    2 * hop_in.index() + hop_out.index()
}

impl ChannelRealization {
    pub fn new(scn: &Scenario, mode: ChannelMode) -> Self {
        let m = scn.num_pairs();
        let n = scn.num_cus();
        let r = scn.radio.ris_elements as usize;
        match mode {
            ChannelMode::Expected => {
                let full = (r as f64).powi(2);
                Self {
                    mode,
                    pair_kappa: vec![[full; 4]; m],
                    cu_gain: vec![[1.0; 2]; n],
                }
            }
            ChannelMode::Sampled { seed } => {
                let k = scn.radio.rician_k;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(FADING_STREAM);
                let mut normal = || -> f64 { rng.sample(StandardNormal) };
                let mut pair_kappa = Vec::with_capacity(m);
                for _ in 0..m {
                    let mut sums = [0.0; 4];
                    for _ in 0..r {
                        let (h_re, h_im, g_re, g_im) = (normal(), normal(), normal(), normal());
                        for ci in CLASSES {
                            let h = fading_amp_from_normals(ci, k, h_re, h_im);
                            for co in CLASSES {
                                let g = fading_amp_from_normals(co, k, g_re, g_im);
                                sums[kappa_index(ci, co)] += h * g;
                            }
                        }
                    }
                    pair_kappa.push(sums.map(|s| s * s));
                }
                let cu_gain = (0..n)
                    .map(|_| {
                        let (re, im) = (normal(), normal());
                        CLASSES.map(|c| fading_amp_from_normals(c, k, re, im).powi(2))
                    })
                    .collect();
                Self {
                    mode,
                    pair_kappa,
                    cu_gain,
                }
            }
        }
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    /// Classify every link against a UAV at `r` and attach the fading gains.
    pub fn state_at(&self, scn: &Scenario, r: &Position3) -> ChannelState {
        let obstacles = &scn.obstacles;
        let pairs = scn
            .d2d_pairs
            .iter()
            .zip(&self.pair_kappa)
            .map(|(pair, kappa)| {
                let hop_in = classify_link(&pair.tx, r, obstacles);
                let hop_out = classify_link(r, &pair.rx, obstacles);
                PairChannel {
                    hop_in,
                    hop_out,
                    kappa: kappa[kappa_index(hop_in, hop_out)],
                }
            })
            .collect();
        let cus = scn
            .cus
            .iter()
            .zip(&self.cu_gain)
            .map(|(cu, gain)| {
                let class = classify_link(cu, r, obstacles);
                CuChannel {
                    class,
                    f_sq: gain[class.index()],
                }
            })
            .collect();
        ChannelState {
            pairs,
            cus,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChannel {
    /// Transmitter to RIS.
    pub hop_in: LinkClass,
    /// RIS to receiver.
    pub hop_out: LinkClass,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuChannel {
    pub class: LinkClass,
    pub f_sq: f64,
}

/// Link classes and fading gains for one UAV position.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub pairs: Vec<PairChannel>,
    pub cus: Vec<CuChannel>,
    pub mode: ChannelMode,
}

pub fn build_channel_state(scn: &Scenario, r: &Position3, mode: ChannelMode) -> ChannelState {
    ChannelRealization::new(scn, mode).state_at(scn, r)
}

/// Linear SNR prefactor of pair `m`: everything but the two distance terms.
pub fn eta_m(m: usize, state: &ChannelState, scn: &Scenario) -> f64 {
    let radio = &scn.radio;
    let link = &state.pairs[m];
    let exponent = radio.tx_power_d2d_dbm + radio.gain_tx_dbi + radio.gain_rx_dbi
        - radio.path_loss(link.hop_in).alpha_db
        - radio.path_loss(link.hop_out).alpha_db
        - 30.0;
    link.kappa / radio.noise_watt() * 10f64.powf(exponent / 10.0)
}

/// Linear SNR prefactor of CU `n`: everything but the distance term.
pub fn lambda_n(n: usize, state: &ChannelState, scn: &Scenario) -> f64 {
    let radio = &scn.radio;
    let link = &state.cus[n];
    let exponent = radio.tx_power_cu_dbm + radio.gain_tx_dbi + radio.gain_uav_dbi
        - radio.path_loss(link.class).alpha_db
        - 30.0;
    link.f_sq / radio.noise_watt() * 10f64.powf(exponent / 10.0)
}

/// Received-power pipeline in dB, for cross-checking the reduced forms.
pub fn received_power_d2d_dbm(
    scn: &Scenario,
    m: usize,
    state: &ChannelState,
    r: &Position3,
) -> Result<f64> {
    let radio = &scn.radio;
    let pair = &scn.d2d_pairs[m];
    let link = &state.pairs[m];
    Ok(
        radio.tx_power_d2d_dbm + radio.gain_tx_dbi + radio.gain_rx_dbi
            - path_loss_db(distance3(&pair.tx, r), link.hop_in, radio)?
            - path_loss_db(distance3(r, &pair.rx), link.hop_out, radio)?,
    )
}
