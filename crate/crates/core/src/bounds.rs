//! Rate-distance benchmark bounds, bound-crossing search and digital
//! signature rates.

use crate::device::{self, DeviceParams};
use crate::error::{QssError, Result};
use crate::ghz::ghz_projection_stats;
use crate::multiplex::asymptotic_gain;
use crate::security::asymptotic_rate;

/// Repeaterless secret-key capacity of a lossy channel,
/// `-log2(1 - eta)` bits per use.
pub fn plob_bound(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(QssError::domain(format!("eta = {eta} must be in [0, 1)")));
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Star-network benchmark: one user runs pairwise point-to-point key
/// exchange with the other `n - 1` and combines the strings, so the
/// per-use rate is the point-to-point capacity divided by `n - 1`.
pub fn direct_transmission_bound(eta: f64, n_parties: u32) -> Result<f64> {
    if n_parties < 3 {
        return Err(QssError::domain(format!(
            "n_parties = {n_parties} must be >= 3"
        )));
    }
    Ok(plob_bound(eta)? / (n_parties - 1) as f64)
}

/// End-to-end transmittance between two users through the relay
/// (two legs).
pub fn end_to_end_transmittance(params: &DeviceParams) -> f64 {
    let leg = device::channel_leg_transmittance(params);
    leg * leg
}

/// Asymptotic protocol rate at a given leg distance, with the
/// distance-independent analyzer statistics precomputed.
fn rate_at(params: &DeviceParams, leg_km: f64, q_ghz: f64, e_z: f64, e_x: f64) -> Result<f64> {
    let p = params.with_leg_distance(leg_km);
    let gain = asymptotic_gain(&p, q_ghz)?;
    asymptotic_rate(gain, e_z, e_x, p.f_ec)
}

/// Smallest leg distance in `[lo_km, hi_km]` where the protocol rate
/// rises above the direct-transmission bound, to 0.01 km, or `None`.
///
/// Coarse 1 km scan for a sign change, then bisection.
pub fn crossing_distance(params: &DeviceParams, lo_km: f64, hi_km: f64) -> Result<Option<f64>> {
    params.validate()?;
    if !(lo_km >= 0.0 && hi_km > lo_km) {
        return Err(QssError::domain(format!(
            "invalid search range [{lo_km}, {hi_km}]"
        )));
    }
    let clicks = device::build_click_model(params)?;
    let stats = ghz_projection_stats(params.n_parties, &clicks)?;
    let margin = |leg: f64| -> Result<f64> {
        let r = rate_at(params, leg, stats.q_ghz_x, stats.e_z, stats.e_x)?;
        let bound = direct_transmission_bound(
            end_to_end_transmittance(&params.with_leg_distance(leg)),
            params.n_parties,
        )?;
        Ok(r - bound)
    };
    let mut prev_leg = lo_km.max(1e-6); // eta -> 1 at zero distance
    let mut prev = margin(prev_leg)?;
    if prev > 0.0 {
        return Ok(Some(prev_leg));
    }
    let mut leg = prev_leg;
    while leg < hi_km {
        leg = (leg + 1.0).min(hi_km);
        let here = margin(leg)?;
        if here > 0.0 {
            // bisect [prev_leg, leg] down to 0.01 km
            let (mut lo, mut hi) = (prev_leg, leg);
            while hi - lo > 0.01 {
                let mid = 0.5 * (lo + hi);
                if margin(mid)? > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
        prev = here;
        prev_leg = leg;
        if leg >= hi_km {
            break;
        }
    }
    let _ = prev;
    Ok(None)
}

/// Documents signed per second given a per-photon key rate, the system
/// clock and the secret bits consumed per signature.
pub fn qds_signature_rate(
    rate_per_pulse: f64,
    clock_hz: f64,
    sig_consumption_bits: u64,
) -> Result<f64> {
    if sig_consumption_bits == 0 {
        return Err(QssError::domain("signature consumption must be >= 1 bit".to_string()));
    }
    if !(rate_per_pulse >= 0.0 && clock_hz >= 0.0) {
        return Err(QssError::invalid("rate and clock must be >= 0".to_string()));
    }
    Ok(rate_per_pulse * clock_hz / sig_consumption_bits as f64)
}

/// One row of the signature-rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureTableRow {
    /// Total dealer-to-player distance; the relay sits at the midpoint.
    pub total_km: f64,
    pub leg_km: f64,
    pub rate_per_pulse: f64,
    pub signature_rate_tps: f64,
    /// Published operating point for this distance, if any.
    pub reference_tps: f64,
}

/// Reference operating points: (total distance km, signatures/s) for
/// three parties at a 1 MHz clock and 384 bits per signature.
pub const SIGNATURE_REFERENCES: [(f64, f64); 2] = [(20.0, 162.0), (50.0, 93.0)];

/// Three-party signature rates at the reference distances.
///
/// Distances are total dealer-to-player separations with the relay at
/// the midpoint; 384 bits per signature covers one order-128
/// irreducible-polynomial hash key plus the one-time pad.
pub fn signature_table(
    params: &DeviceParams,
    clock_hz: f64,
    sig_consumption_bits: u64,
) -> Result<Vec<SignatureTableRow>> {
    let params = params.with_parties(3);
    params.validate()?;
    let clicks = device::build_click_model(&params)?;
    let stats = ghz_projection_stats(3, &clicks)?;
    SIGNATURE_REFERENCES
        .iter()
        .map(|&(total_km, reference_tps)| {
            let leg_km = total_km / 2.0;
            let rate_per_pulse = rate_at(&params, leg_km, stats.q_ghz_x, stats.e_z, stats.e_x)?;
            Ok(SignatureTableRow {
                total_km,
                leg_km,
                rate_per_pulse,
                signature_rate_tps: qds_signature_rate(
                    rate_per_pulse,
                    clock_hz,
                    sig_consumption_bits,
                )?,
                reference_tps,
            })
        })
        .collect()
}
