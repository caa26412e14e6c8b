//! Downlink radio model: free-space style path loss with a fixed extra
//! attenuation on blocked links, SINR against co-channel drones, Shannon
//! rate, and the elevation-angle LoS probability used by the statistical
//! baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Radio constants. Units follow the configuration file: powers in watts,
/// spectral density in dBm/Hz, thresholds and penalties in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Drone transmit power (W).
    pub tx_power: f64,
    pub path_loss_exponent: f64,
    /// Linear reference gain at 1 m. Free-space value at `carrier_hz` when unset.
    pub path_loss_constant: Option<f64>,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub sinr_threshold_db: f64,
    /// Extra attenuation applied to blocked links.
    pub nlos_penalty_db: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            tx_power: 1.0,
            path_loss_exponent: 2.0,
            path_loss_constant: None,
            noise_psd_dbm_hz: -170.0,
            bandwidth_hz: 1e6,
            carrier_hz: 2e9,
            sinr_threshold_db: 5.0,
            nlos_penalty_db: 20.0,
            b1: 0.36,
            b2: 0.21,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("channel: {what}")));
        if !(self.tx_power > 0.0) {
            return bad("tx_power must be > 0");
        }
        if !(self.path_loss_exponent > 0.0) {
            return bad("path_loss_exponent must be > 0");
        }
        if let Some(k) = self.path_loss_constant {
            if !(k > 0.0) {
                return bad("path_loss_constant must be > 0");
            }
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth_hz must be > 0");
        }
        if !(self.carrier_hz > 0.0) {
            return bad("carrier_hz must be > 0");
        }
        if !(self.nlos_penalty_db >= 0.0) {
            return bad("nlos_penalty_db must be >= 0");
        }
        if !(self.b1 > 0.0 && self.b2 > 0.0) {
            return bad("b1 and b2 must be > 0");
        }
        if !self.noise_psd_dbm_hz.is_finite() || self.sinr_threshold_db.is_nan() {
            return bad("noise_psd_dbm_hz and sinr_threshold_db must be numbers");
        }
        Ok(())
    }

    /// `(c / (4 pi f_c))^2` unless overridden.
    pub fn path_loss_gain(&self) -> f64 {
        self.path_loss_constant.unwrap_or_else(|| {
            let k = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.carrier_hz);
            k * k
        })
    }

    pub fn sinr_threshold_linear(&self) -> f64 {
        db_to_linear(self.sinr_threshold_db)
    }

    pub fn nlos_factor(&self) -> f64 {
        db_to_linear(-self.nlos_penalty_db)
    }

    /// Received power (W) before the NLoS penalty at distance `d`.
    pub(crate) fn los_power_at(&self, d: f64) -> f64 {
        self.path_loss_gain() * self.tx_power * d.powf(-self.path_loss_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub distance: f64,
    pub los: bool,
}

impl LinkState {
    pub fn new(distance: f64, los: bool) -> Self {
        LinkState { distance, los }
    }
}

/// Thermal noise power over the full bandwidth (W).
pub fn noise_power(params: &ChannelParams) -> f64 {
    dbm_to_watts(params.noise_psd_dbm_hz) * params.bandwidth_hz
}

pub fn received_power(params: &ChannelParams, link: &LinkState) -> Result<f64> {
    if !(link.distance > 0.0) || !link.distance.is_finite() {
        return Err(Error::InvalidLink(format!(
            "distance must be positive and finite, got {}",
            link.distance
        )));
    }
    let p = params.los_power_at(link.distance);
    Ok(if link.los {
        p
    } else {
        p * params.nlos_factor()
    })
}

/// SINR in dB of `serving` against the summed power of `interferers` plus noise.
pub fn sinr(params: &ChannelParams, serving: &LinkState, interferers: &[LinkState]) -> Result<f64> {
    let signal = received_power(params, serving)?;
    let mut denom = noise_power(params);
    for link in interferers {
        denom += received_power(params, link)?;
    }
    Ok(linear_to_db(signal / denom))
}

/// Probability of a LoS link at elevation `theta` (radians), clamped to
/// `[0, 1]` and zero at or below 15 degrees.
pub fn p_los(params: &ChannelParams, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::Domain(theta));
    }
    let base = theta.to_degrees() - 15.0;
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok((params.b1 * base.powf(params.b2)).clamp(0.0, 1.0))
}

/// Shannon rate (bit/s) at an SINR given in dB.
pub fn rate(params: &ChannelParams, sinr_db: f64) -> f64 {
    rate_linear(params, db_to_linear(sinr_db))
}

pub fn rate_linear(params: &ChannelParams, sinr: f64) -> f64 {
    params.bandwidth_hz * (1.0 + sinr).log2()
}

/// Time (s) to deliver each load at its rate, summed.
pub fn hover_time(loads: &[f64], rates: &[f64]) -> Result<f64> {
    if loads.len() != rates.len() {
        return Err(Error::Precondition(format!(
            "{} loads but {} rates",
            loads.len(),
            rates.len()
        )));
    }
    let mut total = 0.0;
    for (i, (beta, b)) in loads.iter().zip(rates).enumerate() {
        if !(*b > 0.0) {
            return Err(Error::UnservableUser(i));
        }
        total += beta / b;
    }
    Ok(total)
}
