//! Closed-form gain and error rates of the linear-optical GHZ analyzer.
//!
//! The analyzer routes each party's horizontal photon straight through
//! and shifts each vertical photon one spatial mode around the ring, so
//! a computational-basis input pattern with `k` vertical photons in `l`
//! cyclic blocks produces `l` empty modes, `l` doubly occupied modes and
//! `n - 2l` singly occupied modes. Gains follow by counting patterns per
//! block number and weighting with per-mode click probabilities; every
//! formula here is validated against the brute-force simulator in
//! [`crate::oracle`].
//!
//! Only the two uniform patterns interfere (they share the all-single
//! occupation), which is what makes the diagonal-basis error a
//! click-flip parity count on the uniform sector plus a fair coin on
//! everything else: an empty mode clicks through a dark count on either
//! detector with equal probability, randomizing the parity.

use crate::device::ClickModel;
use crate::error::{QssError, Result};
use crate::numeric::{binomial_f64, binomial_u128, ln_binomial};

/// Gain and error rates of the analyzer for `n` parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzProjectionStats {
    pub n_parties: u32,
    pub q_ghz_z: f64,
    pub q_ghz_x: f64,
    pub e_z: f64,
    pub e_x: f64,
}

/// Projection outcome announced by the relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzProjection {
    PhiPlus,
    PhiMinus,
}

/// Number of length-`n` cyclic arrangements of `k` vertical photons
/// forming exactly `l` maximal blocks.
///
/// Exact value `(n / l) * C(k-1, l-1) * C(n-k-1, l-1)`; the division is
/// always exact. Symmetric in `k <-> n - k`, covers the self-mirrored
/// `l = k = n/2` case (value 2), and sums to `C(n, k)` over `l`.
pub fn arrangement_count(n: u32, k: u32, l: u32) -> Result<u128> {
    if n < 3 {
        return Err(QssError::domain(format!("n = {n} must be >= 3")));
    }
    if k == 0 || k >= n {
        return Err(QssError::domain(format!("k = {k} must satisfy 1 <= k <= n-1")));
    }
    let l_max = k.min(n - k);
    if l == 0 || l > l_max {
        return Err(QssError::domain(format!(
            "l = {l} must satisfy 1 <= l <= min(k, n-k) = {l_max}"
        )));
    }
    let a = binomial_u128((k - 1) as u64, (l - 1) as u64)
        .ok_or_else(|| QssError::domain("arrangement count overflow".to_string()))?;
    let b = binomial_u128((n - k - 1) as u64, (l - 1) as u64)
        .ok_or_else(|| QssError::domain("arrangement count overflow".to_string()))?;
    let numerator = (n as u128)
        .checked_mul(a)
        .and_then(|x| x.checked_mul(b))
        .ok_or_else(|| QssError::domain("arrangement count overflow".to_string()))?;
    debug_assert_eq!(numerator % l as u128, 0);
    Ok(numerator / l as u128)
}

fn arrangement_count_f64(n: u32, k: u32, l: u32) -> f64 {
    if n <= 20 {
        arrangement_count(n, k, l).map(|c| c as f64).unwrap_or(0.0)
    } else {
        let ln = (n as f64).ln() - (l as f64).ln()
            + ln_binomial((k - 1) as u64, (l - 1) as u64)
            + ln_binomial((n - k - 1) as u64, (l - 1) as u64);
        ln.exp()
    }
}

/// Coincidence probability of a pattern with `l` vertical blocks:
/// `2^l (x2C + x2E)^l x0^l (x1C + x1E)^(n - 2l)`.
pub fn coincidence_probability(n: u32, l: u32, clicks: &ClickModel) -> Result<f64> {
    if 2 * l > n {
        return Err(QssError::domain(format!("2l = {} exceeds n = {n}", 2 * l)));
    }
    let li = l as i32;
    Ok(2f64.powi(li)
        * clicks.two_photon_sum().powi(li)
        * clicks.x0.powi(li)
        * clicks.one_photon_sum().powi((n - 2 * l) as i32))
}

/// Total success probability contributed by non-uniform input patterns,
/// averaged over the 2^n equiprobable patterns.
fn nonuniform_success(n: u32, clicks: &ClickModel) -> f64 {
    let mut w = 0.0;
    for k in 1..n {
        let l_max = k.min(n - k);
        for l in 1..=l_max {
            let f = coincidence_probability(n, l, clicks).expect("l <= n/2 by construction");
            if f > 0.0 {
                w += arrangement_count_f64(n, k, l) * f;
            }
        }
    }
    w * 2f64.powi(-(n as i32))
}

/// Gain and error rate for computational-basis input.
///
/// Averages over the 2^n equiprobable patterns with a uniform 2^-n
/// prefactor so the gain is a genuine probability; an error is any
/// coincidence produced by a non-uniform pattern.
pub fn z_basis_stats(n: u32, clicks: &ClickModel) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(QssError::domain(format!("n = {n} must be >= 3")));
    }
    let uniform = 2f64.powi(1 - n as i32) * clicks.one_photon_sum().powi(n as i32);
    let nonuniform = nonuniform_success(n, clicks);
    let q = uniform + nonuniform;
    let e = if q > 0.0 { nonuniform / q } else { 0.0 };
    Ok((q, e))
}

/// Per input-parity class, the probability that a coincidence is
/// classified as the projection the input implies (`matched`) versus the
/// opposite one (`mismatched`).
///
/// Both diagonal-basis parity classes give the same pair, and
/// `matched + mismatched` equals the basis-independent gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XBasisSplit {
    pub matched: f64,
    pub mismatched: f64,
}

pub fn x_basis_split(n: u32, clicks: &ClickModel) -> Result<XBasisSplit> {
    if n < 3 {
        return Err(QssError::domain(format!("n = {n} must be >= 3")));
    }
    // uniform sector: classification flips iff an odd number of modes
    // report through the lost-photon-plus-dark-count path
    let mut flips_even = 0.0;
    let mut flips_odd = 0.0;
    for j in 0..=n {
        let term = binomial_f64(n as u64, j as u64)
            * clicks.x1e.powi(j as i32)
            * clicks.x1c.powi((n - j) as i32);
        if j % 2 == 0 {
            flips_even += term;
        } else {
            flips_odd += term;
        }
    }
    let uniform_weight = 2f64.powi(1 - n as i32);
    // non-uniform sector: every empty mode clicks on either detector
    // with equal probability, so classification is a fair coin
    let half_nonuniform = 0.5 * nonuniform_success(n, clicks);
    Ok(XBasisSplit {
        matched: uniform_weight * flips_even + half_nonuniform,
        mismatched: uniform_weight * flips_odd + half_nonuniform,
    })
}

/// Gain and error rate for diagonal-basis input.
///
/// The density matrix seen by the analyzer is the same in both bases, so
/// the gain is taken from [`z_basis_stats`].
pub fn x_basis_stats(n: u32, clicks: &ClickModel) -> Result<(f64, f64)> {
    let (q, _) = z_basis_stats(n, clicks)?;
    let split = x_basis_split(n, clicks)?;
    let total = split.matched + split.mismatched;
    let e = if total > 0.0 {
        split.mismatched / total
    } else {
        0.0
    };
    Ok((q, e))
}

/// Full per-`n` statistics consumed by the rate chain.
pub fn ghz_projection_stats(n: u32, clicks: &ClickModel) -> Result<GhzProjectionStats> {
    let (q_z, e_z) = z_basis_stats(n, clicks)?;
    let (q_x, e_x) = x_basis_stats(n, clicks)?;
    Ok(GhzProjectionStats {
        n_parties: n,
        q_ghz_z: q_z,
        q_ghz_x: q_x,
        e_z,
        e_x,
    })
}

/// Map a count of vertical-detector clicks to the announced projection.
///
/// Odd `n`: even count means PhiPlus. Even `n`: the assignment swaps.
pub fn classify_parity(n: u32, v_click_count: u32) -> Result<GhzProjection> {
    if n < 3 {
        return Err(QssError::domain(format!("n = {n} must be >= 3")));
    }
    if v_click_count > n {
        return Err(QssError::domain(format!(
            "v_click_count = {v_click_count} exceeds n = {n}"
        )));
    }
    let even_clicks = v_click_count % 2 == 0;
    let plus = if n % 2 == 1 { even_clicks } else { !even_clicks };
    Ok(if plus {
        GhzProjection::PhiPlus
    } else {
        GhzProjection::PhiMinus
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{build_click_model, DeviceParams};

    fn clicks(eta_d: f64, p_d: f64) -> ClickModel {
        let mut p = DeviceParams::default();
        p.eta_d = eta_d;
        p.p_d = p_d;
        build_click_model(&p).unwrap()
    }

    /// Count cyclic bit patterns by brute force: `k` ones among `n`
    /// labeled positions forming exactly `l` maximal cyclic blocks.
    fn brute_force_blocks(n: u32, k: u32, l: u32) -> u128 {
        let mut count = 0u128;
        for pattern in 0u32..(1 << n) {
            if pattern.count_ones() != k {
                continue;
            }
            let mut blocks = 0;
            for i in 0..n {
                let here = pattern >> i & 1;
                let prev = pattern >> ((i + n - 1) % n) & 1;
                if here == 1 && prev == 0 {
                    blocks += 1;
                }
            }
            if blocks == l {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn arrangement_count_single_block_is_n() {
        for n in 3..=10 {
            for k in 1..n {
                assert_eq!(arrangement_count(n, k, 1).unwrap(), n as u128);
            }
        }
    }

    #[test]
    fn arrangement_count_spec_points() {
        assert_eq!(arrangement_count(5, 2, 2).unwrap(), 5);
        assert_eq!(arrangement_count(4, 2, 2).unwrap(), 2);
        assert_eq!(arrangement_count(6, 3, 3).unwrap(), 2);
    }

    #[test]
    fn arrangement_count_matches_brute_force() {
        for n in 3..=8u32 {
            for k in 1..n {
                let l_max = k.min(n - k);
                let mut total = 0u128;
                for l in 1..=l_max {
                    let c = arrangement_count(n, k, l).unwrap();
                    assert_eq!(c, brute_force_blocks(n, k, l), "n={n} k={k} l={l}");
                    total += c;
                }
                assert_eq!(total, binomial_u128(n as u64, k as u64).unwrap());
            }
        }
    }

    #[test]
    fn arrangement_count_domain_errors() {
        assert!(arrangement_count(5, 0, 1).is_err());
        assert!(arrangement_count(5, 5, 1).is_err());
        assert!(arrangement_count(5, 2, 3).is_err());
        assert!(arrangement_count(5, 2, 0).is_err());
        assert!(arrangement_count(2, 1, 1).is_err());
    }

    #[test]
    fn coincidence_probability_cases() {
        let perfect = clicks(1.0, 0.0);
        assert_eq!(coincidence_probability(3, 1, &perfect).unwrap(), 0.0);
        assert_eq!(coincidence_probability(3, 0, &perfect).unwrap(), 1.0);
        assert!(coincidence_probability(3, 2, &perfect).is_err());

        let c = clicks(0.93, 1e-9);
        let f1 = coincidence_probability(4, 1, &c).unwrap();
        let expect = 2.0 * c.two_photon_sum() * c.x0 * c.one_photon_sum().powi(2);
        assert!((f1 - expect).abs() < 1e-24);
        assert!((f1 - 1.7213e-9).abs() < 1e-12, "f1={f1}");
    }

    #[test]
    fn perfect_device_limits() {
        let perfect = clicks(1.0, 0.0);
        for n in 3..=10 {
            let s = ghz_projection_stats(n, &perfect).unwrap();
            let expect = 2f64.powi(1 - n as i32);
            assert!((s.q_ghz_z - expect).abs() < 1e-15);
            assert!((s.q_ghz_x - expect).abs() < 1e-15);
            assert_eq!(s.e_z, 0.0);
            assert_eq!(s.e_x, 0.0);
        }
    }

    #[test]
    fn paper_point_three_parties() {
        let c = clicks(0.93, 1e-9);
        let (q, e_z) = z_basis_stats(3, &c).unwrap();
        assert!((q - 0.25 * 0.93f64.powi(3)).abs() < 1e-6, "q={q}");
        assert!(e_z > 0.0 && e_z < 1e-7, "e_z={e_z}");
        let (_, e_x) = x_basis_stats(3, &c).unwrap();
        assert!(e_x > 0.0 && e_x < 1e-6, "e_x={e_x}");
    }

    #[test]
    fn gains_equal_between_bases() {
        for (eta, pd) in [(1.0, 0.0), (0.93, 1e-9), (0.5, 1e-3)] {
            let c = clicks(eta, pd);
            for n in [3, 4, 5, 8] {
                let s = ghz_projection_stats(n, &c).unwrap();
                assert!(
                    (s.q_ghz_x - s.q_ghz_z).abs() <= 1e-12 * s.q_ghz_z.max(f64::MIN_POSITIVE),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn split_sums_to_gain() {
        for (eta, pd) in [(0.93, 1e-9), (0.5, 1e-3), (0.93, 1e-3)] {
            let c = clicks(eta, pd);
            for n in 3..=8 {
                let (q, _) = z_basis_stats(n, &c).unwrap();
                let split = x_basis_split(n, &c).unwrap();
                let total = split.matched + split.mismatched;
                assert!((total - q).abs() < 1e-15 + 1e-12 * q, "n={n}");
            }
        }
    }

    #[test]
    fn z_error_nondecreasing_in_dark_counts() {
        for n in [3, 5, 8] {
            let mut last = -1.0;
            for pd in [0.0, 1e-9, 1e-6, 1e-3, 1e-2] {
                let (_, e) = z_basis_stats(n, &clicks(0.93, pd)).unwrap();
                assert!(e >= last, "n={n} pd={pd}");
                last = e;
            }
        }
    }

    #[test]
    fn large_n_log_space_path_is_continuous() {
        // n = 20 uses exact counts, n = 21 the log-space route
        let c = clicks(0.9, 1e-4);
        let (q20, e20) = z_basis_stats(20, &c).unwrap();
        let (q21, e21) = z_basis_stats(21, &c).unwrap();
        assert!(q21 < q20 && q21 > 0.0);
        assert!(e20 > 0.0 && e21 > 0.0);
        // log-space counts agree with exact ones where both are available
        for (k, l) in [(5u32, 3u32), (10, 7), (12, 2)] {
            let exact = arrangement_count(21, k, l).unwrap() as f64;
            let ln = (21f64).ln() - (l as f64).ln()
                + ln_binomial((k - 1) as u64, (l - 1) as u64)
                + ln_binomial((21 - k - 1) as u64, (l - 1) as u64);
            assert!((ln.exp() - exact).abs() / exact < 1e-11);
        }
    }

    #[test]
    fn parity_classification_table() {
        use GhzProjection::*;
        assert_eq!(classify_parity(3, 0).unwrap(), PhiPlus);
        assert_eq!(classify_parity(3, 1).unwrap(), PhiMinus);
        assert_eq!(classify_parity(3, 2).unwrap(), PhiPlus);
        assert_eq!(classify_parity(4, 1).unwrap(), PhiPlus);
        assert_eq!(classify_parity(4, 2).unwrap(), PhiMinus);
        assert_eq!(classify_parity(4, 0).unwrap(), PhiMinus);
        assert!(classify_parity(3, 4).is_err());
        assert!(classify_parity(2, 0).is_err());
    }
}
