//! Physical device parameters and the per-mode detector click model.
//!
//! Everything downstream consumes two things from here: the per-photon
//! arrival probability at the central relay (source, fiber leg, heralded
//! nondestructive check, feedforward) and the [`ClickModel`] describing
//! what the analyzer's threshold detectors do with 0, 1 or 2 photons in
//! one spatial mode.

use crate::config::KvConfig;
use crate::error::{QssError, Result};

/// All physical constants of the simulated link.
///
/// Lengths are kilometers, times seconds; conversions happen once inside
/// the operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Single-photon-source emission efficiency.
    pub eta_sps: f64,
    /// Fiber attenuation length in km.
    pub l_att: f64,
    /// User-to-relay fiber distance in km (one leg of the star).
    pub leg_distance: f64,
    /// Heralding success probability of the nondestructive arrival check.
    pub p_qnd: f64,
    /// Feedforward latency in seconds.
    pub tau_a: f64,
    /// Speed of light in fiber, m/s.
    pub c_fiber: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Dark-count probability per detector per gate.
    pub p_d: f64,
    /// Number of communicating parties (dealer included).
    pub n_parties: u32,
    /// Error-correction inefficiency, >= 1.
    pub f_ec: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            eta_sps: 0.9,
            l_att: 27.14,
            leg_distance: 0.0,
            p_qnd: 0.5,
            tau_a: 67e-9,
            c_fiber: 2.0e8,
            eta_d: 0.93,
            p_d: 1e-9,
            n_parties: 3,
            f_ec: 1.1,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("eta_sps", self.eta_sps),
            ("p_qnd", self.p_qnd),
            ("eta_d", self.eta_d),
            ("p_d", self.p_d),
        ];
        for (name, value) in probs {
            if !(0.0..=1.0).contains(&value) {
                return Err(QssError::invalid(format!("{name} = {value} not in [0, 1]")));
            }
        }
        if !(self.l_att > 0.0) {
            return Err(QssError::invalid(format!("l_att = {} must be > 0", self.l_att)));
        }
        if !(self.leg_distance >= 0.0) {
            return Err(QssError::invalid(format!(
                "leg_distance = {} must be >= 0",
                self.leg_distance
            )));
        }
        if !(self.tau_a >= 0.0) || !(self.c_fiber > 0.0) {
            return Err(QssError::invalid("tau_a must be >= 0 and c_fiber > 0".to_string()));
        }
        if self.n_parties < 3 {
            return Err(QssError::invalid(format!(
                "n_parties = {} must be >= 3",
                self.n_parties
            )));
        }
        if !(self.f_ec >= 1.0) {
            return Err(QssError::invalid(format!("f_ec = {} must be >= 1", self.f_ec)));
        }
        Ok(())
    }

    pub fn with_leg_distance(mut self, km: f64) -> Self {
        self.leg_distance = km;
        self
    }

    pub fn with_parties(mut self, n: u32) -> Self {
        self.n_parties = n;
        self
    }

    /// Consume the device keys of a parsed config, leaving the rest.
    pub fn apply_config(&mut self, kv: &mut KvConfig) -> Result<()> {
        if let Some(v) = kv.take_f64("eta_sps")? {
            self.eta_sps = v;
        }
        if let Some(v) = kv.take_f64("l_att")? {
            self.l_att = v;
        }
        if let Some(v) = kv.take_f64("leg_distance")? {
            self.leg_distance = v;
        }
        if let Some(v) = kv.take_f64("p_qnd")? {
            self.p_qnd = v;
        }
        if let Some(v) = kv.take_f64("tau_a")? {
            self.tau_a = v;
        }
        if let Some(v) = kv.take_f64("c_fiber")? {
            self.c_fiber = v;
        }
        if let Some(v) = kv.take_f64("eta_d")? {
            self.eta_d = v;
        }
        if let Some(v) = kv.take_f64("p_d")? {
            self.p_d = v;
        }
        if let Some(v) = kv.take_u32("n_parties")? {
            self.n_parties = v;
        }
        if let Some(v) = kv.take_f64("f_ec")? {
            self.f_ec = v;
        }
        self.validate()
    }
}

/// Per-spatial-mode click probabilities of the analyzer detectors.
///
/// A "click" on a mode means exactly one of its two detectors fires; the
/// silent partner's `(1 - p_d)` factor is folded into every entry. The
/// two-photon entries describe a bunched pair (both photons on one
/// detector, either side with probability 1/2); only their sum enters
/// the coincidence formulas, so the sum is split evenly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickModel {
    /// A given detector of an empty mode fires, its partner stays silent.
    pub x0: f64,
    /// Single photon: the detector it reaches fires alone.
    pub x1c: f64,
    /// Single photon: only the opposite detector fires (lost photon plus
    /// dark count).
    pub x1e: f64,
    pub x2c: f64,
    pub x2e: f64,
}

impl ClickModel {
    pub fn one_photon_sum(&self) -> f64 {
        self.x1c + self.x1e
    }

    pub fn two_photon_sum(&self) -> f64 {
        self.x2c + self.x2e
    }
}

/// One fiber leg's amplitude transmittance, `exp(-l / l_att)`.
pub fn channel_leg_transmittance(params: &DeviceParams) -> f64 {
    (-params.leg_distance / params.l_att).exp()
}

/// Feedforward latency expressed as an equivalent fiber loss.
pub fn feedforward_transmittance(params: &DeviceParams) -> f64 {
    let meters = params.tau_a * params.c_fiber;
    (-meters / (params.l_att * 1000.0)).exp()
}

/// Probability that one emitted photon is confirmed at the relay.
pub fn arrival_probability(params: &DeviceParams) -> f64 {
    params.p_qnd
        * channel_leg_transmittance(params)
        * params.eta_sps
        * feedforward_transmittance(params)
}

/// Build the exactly-one-click-per-mode model from detector properties.
///
/// Per detector with `c` photons the click probability is
/// `1 - (1 - eta_d)^c (1 - p_d)`; detectors are independent. The entries
/// below are the closed forms of "exactly one of the pair fires" under
/// that model, so they agree with the brute-force simulator identically.
pub fn build_click_model(params: &DeviceParams) -> Result<ClickModel> {
    params.validate()?;
    let eta = params.eta_d;
    let p = params.p_d;
    let miss = 1.0 - eta;
    let x0 = p * (1.0 - p);
    let x1c = (eta + miss * p) * (1.0 - p);
    let x1e = miss * p * (1.0 - p);
    // bunched pair: both photons detected-or-missed on one side, the
    // double-miss path can still click through either dark count
    let x2_sum = (1.0 - miss * miss) * (1.0 - p) + miss * miss * 2.0 * p * (1.0 - p);
    Ok(ClickModel {
        x0,
        x1c,
        x1e,
        x2c: x2_sum / 2.0,
        x2e: x2_sum / 2.0,
    })
}
