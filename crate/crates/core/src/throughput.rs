//! Rate metrics in bps/Hz.
//!
//! Links are orthogonal (OFDMA), so every rate is a plain `log2(1 + SNR)`
//! without interference terms.

use serde::{Deserialize, Serialize};

use crate::channel::{eta_m, lambda_n, ChannelRealization, ChannelState};
use crate::error::{Error, Result};
use crate::scenario::{distance3, Position3, Scenario};

/// Rate of D2D pair `m` with the RIS at `r`.
pub fn d2d_rate(m: usize, r: &Position3, state: &ChannelState, scn: &Scenario) -> f64 {
    let pair = &scn.d2d_pairs[m];
    let link = &state.pairs[m];
    let b_in = scn.radio.path_loss(link.hop_in).beta;
    let b_out = scn.radio.path_loss(link.hop_out).beta;
    let snr = eta_m(m, state, scn)
        * distance3(&pair.tx, r).powf(-b_in)
        * distance3(&pair.rx, r).powf(-b_out);
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Rate of CU `n` with the UAV at `r`.
pub fn cu_rate(n: usize, r: &Position3, state: &ChannelState, scn: &Scenario) -> f64 {
    let beta = scn.radio.path_loss(state.cus[n].class).beta;
    let snr = lambda_n(n, state, scn) * distance3(&scn.cus[n], r).powf(-beta);
    snr.ln_1p() / std::f64::consts::LN_2
}

pub fn total_d2d(r: &Position3, state: &ChannelState, scn: &Scenario) -> f64 {
    (0..scn.num_pairs())
        .map(|m| d2d_rate(m, r, state, scn))
        .sum()
}

pub fn total_cu(r: &Position3, state: &ChannelState, scn: &Scenario) -> f64 {
    (0..scn.num_cus()).map(|n| cu_rate(n, r, state, scn)).sum()
}

/// All rates at one UAV position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub per_pair_rates: Vec<f64>,
    pub per_cu_rates: Vec<f64>,
    pub d2d_total: f64,
    pub cu_total: f64,
    pub net: f64,
}

impl RateReport {
    pub fn d2d_avg(&self) -> f64 {
        per_capita(self.d2d_total, self.per_pair_rates.len())
    }

    pub fn cu_avg(&self) -> f64 {
        per_capita(self.cu_total, self.per_cu_rates.len())
    }

    /// Per-entity rates: one per D2D pair followed by one per CU.
    pub fn entity_rates(&self) -> Vec<f64> {
        self.per_pair_rates
            .iter()
            .chain(&self.per_cu_rates)
            .copied()
            .collect()
    }

    /// Jain's index over all D2D pairs and CUs.
    pub fn fairness(&self) -> Jain {
        jain_index(&self.entity_rates()).unwrap_or(Jain {
            value: 1.0,
            all_zero: true,
        })
    }
}

fn per_capita(total: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

pub fn net_throughput(r: &Position3, state: &ChannelState, scn: &Scenario) -> RateReport {
    let per_pair_rates: Vec<f64> = (0..scn.num_pairs())
        .map(|m| d2d_rate(m, r, state, scn))
        .collect();
    let per_cu_rates: Vec<f64> = (0..scn.num_cus())
        .map(|n| cu_rate(n, r, state, scn))
        .collect();
    let d2d_total = per_pair_rates.iter().sum::<f64>();
    let cu_total = per_cu_rates.iter().sum::<f64>();
    RateReport {
        per_pair_rates,
        per_cu_rates,
        d2d_total,
        cu_total,
        net: d2d_total + cu_total,
    }
}

/// Rate report with link classes re-derived at `r`.
pub fn report_at(scn: &Scenario, channel: &ChannelRealization, r: &Position3) -> RateReport {
    net_throughput(r, &channel.state_at(scn, r), scn)
}

/// Target ratio of per-CU to per-pair throughput, taken from the two
/// individual optima.
pub fn target_ratio(cu_at_rc: &RateReport, d2d_at_rd: &RateReport) -> f64 {
    cu_at_rc.cu_avg() / d2d_at_rd.d2d_avg()
}

/// Absolute deviation of the per-capita throughput ratio at `s` from `phi`.
///
/// Returns `f64::INFINITY` when the per-pair throughput at `s` is zero.
pub fn ratio_deviation(
    s: &Position3,
    phi: f64,
    channel: &ChannelRealization,
    scn: &Scenario,
) -> f64 {
    deviation_of(&report_at(scn, channel, s), phi)
}

pub(crate) fn deviation_of(report: &RateReport, phi: f64) -> f64 {
    let d2d_avg = report.d2d_avg();
    if !(d2d_avg > 0.0) {
        return f64::INFINITY;
    }
    (report.cu_avg() / d2d_avg - phi).abs()
}

/// Jain's fairness index and whether it was defaulted for an all-zero input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jain {
    pub value: f64,
    pub all_zero: bool,
}

/// `(sum x)^2 / (n sum x^2)`. An all-zero input counts as perfectly fair.
pub fn jain_index(rates: &[f64]) -> Result<Jain> {
    if rates.is_empty() {
        return Err(Error::InvalidInput("Jain's index of an empty set".into()));
    }
    if rates.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(
            "Jain's index needs finite non-negative rates".into(),
        ));
    }
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Ok(Jain {
            value: 1.0,
            all_zero: true,
        });
    }
    Ok(Jain {
        value: sum * sum / (rates.len() as f64 * sum_sq),
        all_zero: false,
    })
}
