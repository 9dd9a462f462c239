//! Asymptotic key rate and composable finite-size key length.
//!
//! The finite-size chain converts a total signal budget into key rounds
//! `m` (all parties in the diagonal basis) and parameter-estimation
//! rounds `k_j` (dealer plus the complementary player of untrusted
//! subset `j` in the computational basis), then applies the
//! statistical-fluctuation penalty `mu` to each observed marginal error
//! and extracts the worst case over subsets.

use crate::device::{ClickModel, DeviceParams};
use crate::error::{QssError, Result};
use crate::ghz::ghz_projection_stats;
use crate::multiplex::{self, MultiplexConfig};
use std::f64::consts::{LN_2, PI};

/// Binary Shannon entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(QssError::domain(format!("entropy argument {x} not in [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-(x * x.ln() + (1.0 - x) * (-x).ln_1p()) / LN_2)
}

/// Asymptotic key rate per transmitted photon,
/// `max(0, Q_X [1 - h(E_Z) - f h(E_X)])`.
pub fn asymptotic_rate(q_x: f64, e_z: f64, e_x: f64, f_ec: f64) -> Result<f64> {
    let r = q_x * (1.0 - binary_entropy(e_z)? - f_ec * binary_entropy(e_x)?);
    Ok(r.max(0.0))
}

/// Statistical penalty added to an observed error rate.
///
/// `A = max(m, k_j)`, `G = (m + k_j) / (m k_j) *
/// ln((m + k_j) / (2 pi m k_j lambda (1 - lambda) eps^2))`. The rate is
/// floored at `1 / (2 k_j)` to keep the logarithm finite for a zero
/// observed error.
pub fn mu_correction(lambda: f64, eps: f64, m: u64, k_j: u64) -> Result<f64> {
    if m == 0 || k_j == 0 {
        return Err(QssError::domain("mu requires m >= 1 and k_j >= 1".to_string()));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(QssError::domain(format!("lambda = {lambda} not in [0, 1)")));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(QssError::domain(format!("eps = {eps} not in (0, 1)")));
    }
    let lam = lambda.max(0.5 / k_j as f64).min(0.5);
    let m_f = m as f64;
    let k_f = k_j as f64;
    let s = m_f + k_f;
    let mk = m_f * k_f;
    let g = s / mk * (s / (2.0 * PI * mk * lam * (1.0 - lam) * eps * eps)).ln();
    if !(g > 0.0) {
        return Err(QssError::domain(format!(
            "nonpositive fluctuation term (m={m}, k_j={k_j}, lambda={lambda}, eps={eps})"
        )));
    }
    let a = m_f.max(k_f);
    let ag_s = a * g / s;
    let mu = ((1.0 - 2.0 * lam) * ag_s + (ag_s * ag_s + 4.0 * lam * (1.0 - lam) * g).sqrt())
        / (2.0 + 2.0 * a * a * g / (s * s));
    Ok(mu)
}

/// Signal budget and security parameters for one finite-size evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKeyBudget {
    /// Total transmitted signals per party.
    pub n_total: u64,
    /// Key-generation rounds.
    pub m: u64,
    /// Parameter-estimation rounds, one entry per untrusted subset.
    pub k_j: Vec<u64>,
    /// Correctness parameter.
    pub eps_c: f64,
    /// Secrecy parameter.
    pub eps_s: f64,
    pub eps_bar: f64,
    pub eps_prime: f64,
    /// Preparation quality of the complementary basis, in [0, 1].
    pub q_prep: f64,
    /// Error-correction leakage in bits.
    pub leak_ec: f64,
}

impl FiniteKeyBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, e) in [
            ("eps_c", self.eps_c),
            ("eps_s", self.eps_s),
            ("eps_bar", self.eps_bar),
            ("eps_prime", self.eps_prime),
        ] {
            if !(0.0 < e && e < 1.0) {
                return Err(QssError::invalid(format!("{name} = {e} not in (0, 1)")));
            }
        }
        if !(0.0..=1.0).contains(&self.q_prep) {
            return Err(QssError::invalid(format!("q_prep = {} not in [0, 1]", self.q_prep)));
        }
        if self.k_j.is_empty() {
            return Err(QssError::invalid("k_j must have one entry per subset".to_string()));
        }
        if !(self.leak_ec >= 0.0) {
            return Err(QssError::invalid("leak_ec must be >= 0".to_string()));
        }
        Ok(())
    }
}

/// Split a signal budget into key rounds and per-subset estimation
/// rounds.
///
/// Key rounds need all `n` parties in the diagonal basis
/// (`bias^n_parties`); an estimation round with subset `j` needs the
/// dealer and the complementary player in the computational basis
/// (`(1 - bias)^2`), with the other parties unconstrained.
pub fn sifting_counts(
    n_total: u64,
    n_parties: u32,
    q_x_gain: f64,
    q_z_gain: f64,
    basis_bias: f64,
) -> Result<(u64, Vec<u64>)> {
    if !(0.0 < basis_bias && basis_bias < 1.0) {
        return Err(QssError::invalid(format!("basis_bias = {basis_bias} not in (0, 1)")));
    }
    if n_parties < 3 {
        return Err(QssError::invalid("n_parties must be >= 3".to_string()));
    }
    for (name, q) in [("q_x_gain", q_x_gain), ("q_z_gain", q_z_gain)] {
        if !(0.0..=1.0).contains(&q) {
            return Err(QssError::invalid(format!("{name} = {q} not in [0, 1]")));
        }
    }
    let m = (n_total as f64 * q_x_gain * basis_bias.powi(n_parties as i32)).floor() as u64;
    let k = (n_total as f64 * q_z_gain * (1.0 - basis_bias) * (1.0 - basis_bias)).floor() as u64;
    Ok((m, vec![k; (n_parties - 1) as usize]))
}

/// Extractable key length
/// `l = m [q - max_j h(E_j + mu_j)] - leak_EC - log2(4 / (eps_c eps_bar^2))`,
/// floored at zero and truncated to whole bits.
pub fn finite_key_length(budget: &FiniteKeyBudget, e_z_marginals: &[f64]) -> Result<u64> {
    budget.validate()?;
    if e_z_marginals.len() != budget.k_j.len() {
        return Err(QssError::domain(format!(
            "{} marginals for {} subsets",
            e_z_marginals.len(),
            budget.k_j.len()
        )));
    }
    if budget.m == 0 {
        return Ok(0);
    }
    let mut worst_penalty: f64 = 0.0;
    for (&k_j, &e_j) in budget.k_j.iter().zip(e_z_marginals) {
        if k_j == 0 {
            return Ok(0); // no estimation data for this subset
        }
        if !(0.0..=1.0).contains(&e_j) {
            return Err(QssError::domain(format!("marginal error {e_j} not in [0, 1]")));
        }
        let mu = mu_correction(e_j.min(1.0 - f64::EPSILON), budget.eps_prime, budget.m, k_j)?;
        let penalty = binary_entropy((e_j + mu).min(0.5))?;
        worst_penalty = worst_penalty.max(penalty);
    }
    let overhead = (4.0 / (budget.eps_c * budget.eps_bar * budget.eps_bar)).log2();
    let l = budget.m as f64 * (budget.q_prep - worst_penalty) - budget.leak_ec - overhead;
    Ok(l.max(0.0).floor() as u64)
}

/// Model knobs for the finite-size chain that the protocol definition
/// leaves open; all values are surfaced in sweep metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteModel {
    /// Total transmitted signals per party.
    pub n_total: u64,
    pub eps_c: f64,
    pub eps_s: f64,
    /// Probability of choosing the diagonal (key) basis.
    pub basis_bias: f64,
    pub q_prep: f64,
    /// Multiplexing depth; `None` evaluates the infinite-depth limit.
    pub m_channels: Option<u64>,
}

impl Default for FiniteModel {
    fn default() -> Self {
        FiniteModel {
            n_total: 1_000_000_000_000,
            eps_c: 1e-15,
            eps_s: 1e-10,
            basis_bias: 0.5,
            q_prep: 1.0,
            m_channels: Some(100),
        }
    }
}

impl FiniteModel {
    pub fn eps_bar(&self) -> f64 {
        self.eps_s / 4.0
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_s / 4.0
    }
}

/// One fully evaluated operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    /// Gain in the infinite-multiplexing limit.
    pub q_x_gain: f64,
    pub e_x: f64,
    pub e_z: f64,
    pub rate_asymptotic: f64,
    pub key_length: u64,
    pub rate_finite: f64,
}

/// Full chain from device parameters to a finite-size rate.
pub fn finite_rate(params: &DeviceParams, model: &FiniteModel) -> Result<RatePoint> {
    params.validate()?;
    let clicks = crate::device::build_click_model(params)?;
    finite_rate_with_clicks(params, &clicks, model)
}

/// Same as [`finite_rate`] but reusing a prebuilt click model and its
/// projection statistics (they do not depend on the distance).
pub fn finite_rate_with_clicks(
    params: &DeviceParams,
    clicks: &ClickModel,
    model: &FiniteModel,
) -> Result<RatePoint> {
    let stats = ghz_projection_stats(params.n_parties, clicks)?;
    let q_x_gain = multiplex::asymptotic_gain(params, stats.q_ghz_x)?;
    let rate_asymptotic = asymptotic_rate(q_x_gain, stats.e_z, stats.e_x, params.f_ec)?;

    let sift_gain = match model.m_channels {
        None => q_x_gain,
        Some(m) => multiplex::finite_multiplexing_gain(&MultiplexConfig {
            m_channels: m,
            n_parties: params.n_parties,
            eta: crate::device::arrival_probability(params),
            q_ghz: stats.q_ghz_x,
        })?,
    };
    let (m, k_j) = sifting_counts(
        model.n_total,
        params.n_parties,
        sift_gain,
        sift_gain,
        model.basis_bias,
    )?;
    let leak_ec = params.f_ec * binary_entropy(stats.e_x)? * m as f64;
    let budget = FiniteKeyBudget {
        n_total: model.n_total,
        m,
        k_j: k_j.clone(),
        eps_c: model.eps_c,
        eps_s: model.eps_s,
        eps_bar: model.eps_bar(),
        eps_prime: model.eps_prime(),
        q_prep: model.q_prep,
        leak_ec,
    };
    let marginals = vec![stats.e_z; k_j.len()];
    let key_length = if m == 0 {
        0
    } else {
        finite_key_length(&budget, &marginals)?
    };
    Ok(RatePoint {
        q_x_gain,
        e_x: stats.e_x,
        e_z: stats.e_z,
        rate_asymptotic,
        key_length,
        rate_finite: key_length as f64 / model.n_total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_reference_points() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.8112781).abs() < 1e-7);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn asymptotic_rate_limits() {
        assert_eq!(asymptotic_rate(1.0, 0.0, 0.0, 1.1).unwrap(), 1.0);
        assert_eq!(asymptotic_rate(0.5, 0.5, 0.0, 1.1).unwrap(), 0.0);
    }

    #[test]
    fn mu_reference_point() {
        let mu = mu_correction(0.01, 1e-10, 1_000_000, 1_000_000).unwrap();
        assert!((mu - 8.6e-4).abs() < 2e-5, "mu = {mu}");
    }

    #[test]
    fn mu_shrinks_with_block_size() {
        let mut last = f64::INFINITY;
        for size in [10_000u64, 1_000_000, 100_000_000] {
            let mu = mu_correction(0.01, 1e-10, size, size).unwrap();
            assert!(mu < last);
            last = mu;
        }
    }

    #[test]
    fn mu_decreases_with_eps() {
        let tight = mu_correction(0.01, 1e-10, 1_000_000, 1_000_000).unwrap();
        let loose = mu_correction(0.01, 2e-10, 1_000_000, 1_000_000).unwrap();
        assert!(loose < tight);
    }

    #[test]
    fn mu_zero_lambda_is_floored() {
        let mu = mu_correction(0.0, 1e-10, 1_000_000, 1_000_000).unwrap();
        assert!(mu.is_finite() && mu > 0.0);
        assert!(mu_correction(0.01, 1e-10, 0, 10).is_err());
    }

    #[test]
    fn sifting_examples() {
        let (m, ks) = sifting_counts(8, 3, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(m, 1);
        assert_eq!(ks, vec![2, 2]);
        let (m, ks) = sifting_counts(1_000_000, 3, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(m, 125_000);
        assert_eq!(ks, vec![250_000, 250_000]);
        let (m, ks) = sifting_counts(1_000_000, 3, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(m, 0);
        assert_eq!(ks, vec![0, 0]);
    }

    fn budget(m: u64, k: u64, leak: f64) -> FiniteKeyBudget {
        FiniteKeyBudget {
            n_total: 0,
            m,
            k_j: vec![k, k],
            eps_c: 1e-15,
            eps_s: 1e-10,
            eps_bar: 2.5e-11,
            eps_prime: 2.5e-11,
            q_prep: 1.0,
            leak_ec: leak,
        }
    }

    #[test]
    fn key_length_clamps() {
        assert_eq!(finite_key_length(&budget(0, 100, 0.0), &[0.0, 0.0]).unwrap(), 0);
        // error at the entropy saturation point gives zero
        assert_eq!(
            finite_key_length(&budget(10_000, 10_000, 0.0), &[0.5, 0.5]).unwrap(),
            0
        );
        assert!(finite_key_length(&budget(10, 10, 0.0), &[0.0]).is_err());
    }

    #[test]
    fn key_length_never_exceeds_m_q() {
        for e in [0.0, 0.01, 0.1] {
            let b = budget(1_000_000, 1_000_000, 0.0);
            let l = finite_key_length(&b, &[e, e]).unwrap();
            assert!(l as f64 <= b.m as f64 * b.q_prep);
        }
    }

    #[test]
    fn key_length_monotonicity() {
        let base = finite_key_length(&budget(1_000_000, 1_000_000, 0.0), &[0.02, 0.02]).unwrap();
        let more_key_rounds =
            finite_key_length(&budget(2_000_000, 1_000_000, 0.0), &[0.02, 0.02]).unwrap();
        assert!(more_key_rounds >= base);
        let more_estimation =
            finite_key_length(&budget(1_000_000, 4_000_000, 0.0), &[0.02, 0.02]).unwrap();
        assert!(more_estimation >= base);
        let worse_error =
            finite_key_length(&budget(1_000_000, 1_000_000, 0.0), &[0.05, 0.02]).unwrap();
        assert!(worse_error <= base);

        // secrecy parameter: smaller eps_s can only shrink the key
        let mut tight = budget(1_000_000, 1_000_000, 0.0);
        tight.eps_s = 1e-12;
        tight.eps_bar = 0.25e-12;
        tight.eps_prime = 0.25e-12;
        let l_tight = finite_key_length(&tight, &[0.02, 0.02]).unwrap();
        let mut loose = budget(1_000_000, 1_000_000, 0.0);
        loose.eps_s = 1e-6;
        loose.eps_bar = 0.25e-6;
        loose.eps_prime = 0.25e-6;
        let l_loose = finite_key_length(&loose, &[0.02, 0.02]).unwrap();
        assert!(l_tight <= l_loose);
    }

    #[test]
    fn large_block_matches_asymptotic_form() {
        // m = k_j = 1e8 at one-percent errors reproduces
        // 1 - h(E_Z) - f h(E_X) within three percent
        let m = 100_000_000u64;
        let e = 0.01;
        let f_ec = 1.1;
        let leak = f_ec * binary_entropy(e).unwrap() * m as f64;
        let b = FiniteKeyBudget {
            n_total: 0,
            m,
            k_j: vec![m, m],
            eps_c: 1e-15,
            eps_s: 1e-10,
            eps_bar: 2.5e-11,
            eps_prime: 2.5e-11,
            q_prep: 1.0,
            leak_ec: leak,
        };
        let l = finite_key_length(&b, &[e, e]).unwrap();
        let per_bit = l as f64 / m as f64;
        let asymptotic = 1.0 - binary_entropy(e).unwrap() - f_ec * binary_entropy(e).unwrap();
        assert!(
            (per_bit / asymptotic - 1.0).abs() < 0.03,
            "per-bit {per_bit} vs {asymptotic}"
        );
    }

    #[test]
    fn finite_rate_dies_far_out_and_recovers_near() {
        let model = FiniteModel::default();
        let near = finite_rate(
            &DeviceParams::default().with_parties(4).with_leg_distance(50.0),
            &model,
        )
        .unwrap();
        assert!(near.rate_finite > 0.0);
        let far = finite_rate(
            &DeviceParams::default().with_parties(4).with_leg_distance(300.0),
            &model,
        )
        .unwrap();
        assert_eq!(far.key_length, 0);
        assert_eq!(far.rate_finite, 0.0);
        assert!(near.rate_asymptotic <= near.q_x_gain);
    }

    #[test]
    fn finite_rate_converges_to_sifted_asymptotic() {
        // with the statistical penalties off the table, the per-signal
        // rate approaches gain * bias^n * [1 - h(E_Z) - f h(E_X)]
        let params = DeviceParams::default().with_parties(4).with_leg_distance(50.0);
        let mut model = FiniteModel::default();
        model.n_total = 10_000_000_000_000_000; // 1e16
        let point = finite_rate(&params, &model).unwrap();
        let clicks = crate::device::build_click_model(&params).unwrap();
        let stats = ghz_projection_stats(4, &clicks).unwrap();
        let sift_gain = multiplex::finite_multiplexing_gain(&MultiplexConfig {
            m_channels: 100,
            n_parties: 4,
            eta: crate::device::arrival_probability(&params),
            q_ghz: stats.q_ghz_x,
        })
        .unwrap();
        let bracket = 1.0
            - binary_entropy(stats.e_z).unwrap()
            - params.f_ec * binary_entropy(stats.e_x).unwrap();
        let sifted_asymptotic = sift_gain * 0.5f64.powi(4) * bracket;
        assert!(
            (point.rate_finite / sifted_asymptotic - 1.0).abs() < 0.05,
            "finite {} vs sifted asymptotic {sifted_asymptotic}",
            point.rate_finite
        );
    }

    #[test]
    fn finite_rate_monotone_in_secrecy() {
        let params = DeviceParams::default().with_parties(4).with_leg_distance(80.0);
        let mut loose = FiniteModel::default();
        loose.eps_s = 1e-6;
        let mut tight = FiniteModel::default();
        tight.eps_s = 1e-12;
        let l_loose = finite_rate(&params, &loose).unwrap().key_length;
        let l_tight = finite_rate(&params, &tight).unwrap().key_length;
        assert!(l_tight <= l_loose);
    }
}
