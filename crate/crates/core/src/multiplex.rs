//! Spatially multiplexed transmission statistics with adaptive grouping.
//!
//! Each party fires `M` photons per slot; the relay confirms arrivals
//! and routes one confirmed photon per party into each analyzer group,
//! so the number of groups is the minimum of the parties' arrival
//! counts. The analytic side works with the exact law of that minimum;
//! [`monte_carlo_gain`] re-derives the same mean stochastically as a
//! cross-check.

use crate::device::{arrival_probability, DeviceParams};
use crate::error::{QssError, Result};
use crate::exec;
use crate::numeric::BinomialDist;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};

/// Trials per deterministic Monte Carlo chunk; fixed so results do not
/// depend on the worker count.
const MC_CHUNK: u64 = 8192;

/// PRNG identifier recorded alongside Monte Carlo output.
pub const MC_ALGORITHM: &str = "chacha12/splitmix64-per-chunk";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplexConfig {
    /// Multiplexing depth M (parallel channels per slot).
    pub m_channels: u64,
    pub n_parties: u32,
    /// Per-photon confirmed-arrival probability.
    pub eta: f64,
    /// Projection success probability per formed group.
    pub q_ghz: f64,
}

impl MultiplexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_channels < 1 {
            return Err(QssError::invalid("m_channels must be >= 1".to_string()));
        }
        if self.n_parties < 1 {
            return Err(QssError::invalid("n_parties must be >= 1".to_string()));
        }
        for (name, v) in [("eta", self.eta), ("q_ghz", self.q_ghz)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(QssError::invalid(format!("{name} = {v} not in [0, 1]")));
            }
        }
        Ok(())
    }

    fn arrivals(&self) -> Result<BinomialDist> {
        BinomialDist::new(self.m_channels, self.eta)
    }
}

/// Exact pmf of the minimum of `n_parties` iid Binomial(M, eta) counts:
/// `P(min = l) = prod_i P(X_i >= l) - prod_i P(X_i >= l + 1)`.
///
/// Note: treating the parties' "at least `l` arrivals" events as one
/// factorized cube `3 B S^2 - 2 B^3` does not give this law (at M = 2,
/// eta = 0.5, n = 3, l = 1 it yields 0.59375 against the exact 0.40625);
/// only the survival-product form is used here.
pub fn min_arrival_pmf(cfg: &MultiplexConfig, l: u64) -> Result<f64> {
    cfg.validate()?;
    if l > cfg.m_channels {
        return Err(QssError::domain(format!(
            "l = {l} exceeds m_channels = {}",
            cfg.m_channels
        )));
    }
    let dist = cfg.arrivals()?;
    let n = cfg.n_parties as i32;
    let at_least_l = dist.survival(l).powi(n);
    let at_least_next = if l == cfg.m_channels {
        0.0
    } else {
        dist.survival(l + 1).powi(n)
    };
    Ok((at_least_l - at_least_next).max(0.0))
}

/// `E[min of n_parties Binomial(M, eta)]`.
pub fn expected_min_arrivals(cfg: &MultiplexConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.arrivals()?.expected_min(cfg.n_parties))
}

/// Mean number of successfully projected groups per slot.
pub fn expected_groups(cfg: &MultiplexConfig) -> Result<f64> {
    Ok(cfg.q_ghz * expected_min_arrivals(cfg)?)
}

/// Gain per transmitted photon in the infinite-multiplexing limit:
/// the projection probability times the arrival probability.
pub fn asymptotic_gain(params: &DeviceParams, q_ghz: f64) -> Result<f64> {
    params.validate()?;
    if !(0.0..=1.0).contains(&q_ghz) {
        return Err(QssError::invalid(format!("q_ghz = {q_ghz} not in [0, 1]")));
    }
    Ok(q_ghz * arrival_probability(params))
}

/// Gain per transmitted photon at finite multiplexing depth.
pub fn finite_multiplexing_gain(cfg: &MultiplexConfig) -> Result<f64> {
    Ok(expected_groups(cfg)? / cfg.m_channels as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    /// Mean successful groups per channel (comparable to
    /// `expected_groups / M`).
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub algorithm: &'static str,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn mc_chunk_sums(cfg: &MultiplexConfig, trials: u64, seed: u64, chunk: u64) -> (f64, f64) {
    let lo = chunk * MC_CHUNK;
    let hi = ((chunk + 1) * MC_CHUNK).min(trials);
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(chunk)));
    let arrivals = Binomial::new(cfg.m_channels, cfg.eta).expect("validated");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in lo..hi {
        let mut groups = u64::MAX;
        for _ in 0..cfg.n_parties {
            groups = groups.min(arrivals.sample(&mut rng));
        }
        let successes = if groups == 0 || cfg.q_ghz == 0.0 {
            0
        } else {
            Binomial::new(groups, cfg.q_ghz)
                .expect("validated")
                .sample(&mut rng)
        };
        let x = successes as f64 / cfg.m_channels as f64;
        sum += x;
        sum_sq += x * x;
    }
    (sum, sum_sq)
}

fn mc_reduce(partials: Vec<(f64, f64)>, trials: u64, seed: u64) -> MonteCarloEstimate {
    let (sum, sum_sq) = partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let t = trials as f64;
    let estimate = sum / t;
    let std_error = if trials > 1 {
        let var = ((sum_sq - sum * sum / t) / (t - 1.0)).max(0.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    MonteCarloEstimate {
        estimate,
        std_error,
        trials,
        seed,
        algorithm: MC_ALGORITHM,
    }
}

/// Stochastic estimate of the per-channel group rate.
///
/// Trials are split into fixed-size chunks, each driven by its own
/// generator seeded from (seed, chunk index); chunk results are folded
/// in index order, so the output is identical for any worker count.
pub fn monte_carlo_gain(cfg: &MultiplexConfig, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(QssError::domain("trials must be >= 1".to_string()));
    }
    let chunks: Vec<u64> = (0..trials.div_ceil(MC_CHUNK)).collect();
    let partials = exec::map_collect(chunks, |chunk| mc_chunk_sums(cfg, trials, seed, chunk));
    Ok(mc_reduce(partials, trials, seed))
}

/// Sequential twin of [`monte_carlo_gain`] for the benchmark suite;
/// chunking is identical, so the results match bit for bit.
pub fn monte_carlo_gain_seq(
    cfg: &MultiplexConfig,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(QssError::domain("trials must be >= 1".to_string()));
    }
    let chunks: Vec<u64> = (0..trials.div_ceil(MC_CHUNK)).collect();
    let partials = exec::map_collect_seq(chunks, |chunk| mc_chunk_sums(cfg, trials, seed, chunk));
    Ok(mc_reduce(partials, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: u64, n: u32, eta: f64, q: f64) -> MultiplexConfig {
        MultiplexConfig {
            m_channels: m,
            n_parties: n,
            eta,
            q_ghz: q,
        }
    }

    #[test]
    fn pmf_trivial_cases() {
        let c = cfg(1, 3, 1.0, 1.0);
        assert_eq!(min_arrival_pmf(&c, 1).unwrap(), 1.0);
        assert!(min_arrival_pmf(&c, 2).is_err());
    }

    #[test]
    fn pmf_matches_exhaustive_enumeration() {
        // 27 weighted joint outcomes for 3 parties with M = 2
        let c = cfg(2, 3, 0.5, 1.0);
        assert!((min_arrival_pmf(&c, 1).unwrap() - 0.40625).abs() < 1e-15);
        assert!((min_arrival_pmf(&c, 2).unwrap() - 0.015625).abs() < 1e-15);

        // independently for a lopsided eta
        let c = cfg(3, 2, 0.3, 1.0);
        let d = BinomialDist::new(3, 0.3).unwrap();
        for l in 0..=3u64 {
            let mut expect = 0.0;
            for a in 0..=3u64 {
                for b in 0..=3u64 {
                    if a.min(b) == l {
                        expect += d.pmf(a) * d.pmf(b);
                    }
                }
            }
            assert!((min_arrival_pmf(&c, l).unwrap() - expect).abs() < 1e-14, "l={l}");
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        let c = cfg(10, 4, 0.3, 1.0);
        let total: f64 = (0..=10).map(|l| min_arrival_pmf(&c, l).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_party_degenerates_to_binomial() {
        let c = cfg(12, 1, 0.37, 1.0);
        let d = BinomialDist::new(12, 0.37).unwrap();
        for l in 0..=12u64 {
            assert!((min_arrival_pmf(&c, l).unwrap() - d.pmf(l)).abs() < 1e-13);
        }
    }

    #[test]
    fn expected_groups_examples() {
        assert_eq!(expected_groups(&cfg(1, 3, 1.0, 1.0)).unwrap(), 1.0);
        assert!((expected_groups(&cfg(2, 3, 0.5, 1.0)).unwrap() - 0.4375).abs() < 1e-15);
        assert_eq!(expected_groups(&cfg(2, 3, 0.5, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn expected_groups_monotone_in_m_and_eta() {
        let mut last = 0.0;
        for m in [1u64, 2, 5, 20, 100] {
            let v = expected_groups(&cfg(m, 3, 0.3, 0.5)).unwrap();
            assert!(v >= last);
            last = v;
        }
        let mut last = 0.0;
        for eta in [0.05, 0.1, 0.3, 0.6, 0.9] {
            let v = expected_groups(&cfg(50, 3, eta, 0.5)).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn asymptotic_gain_examples() {
        let mut p = DeviceParams::default();
        p.eta_sps = 1.0;
        p.p_qnd = 1.0;
        p.tau_a = 0.0;
        assert!((asymptotic_gain(&p, 0.7).unwrap() - 0.7).abs() < 1e-15);

        let p = DeviceParams::default().with_leg_distance(10.0);
        let q_ghz = 0.25 * 0.93f64.powi(3);
        let g = asymptotic_gain(&p, q_ghz).unwrap();
        assert!((g - 0.06258).abs() < 5e-5, "gain = {g}");

        let p = DeviceParams::default().with_leg_distance(1e6);
        assert!(asymptotic_gain(&p, 0.25).unwrap() < 1e-300);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let c = cfg(40, 3, 0.3, 0.25);
        let a = monte_carlo_gain(&c, 20_000, 7).unwrap();
        let b = monte_carlo_gain(&c, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let seq = monte_carlo_gain_seq(&c, 20_000, 7).unwrap();
        assert_eq!(a, seq);
        let other = monte_carlo_gain(&c, 20_000, 8).unwrap();
        assert_ne!(a.estimate, other.estimate);
    }

    #[test]
    fn monte_carlo_exact_at_unit_probabilities() {
        let c = cfg(5, 3, 1.0, 1.0);
        let est = monte_carlo_gain(&c, 1000, 3).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn monte_carlo_agrees_with_analytic_mean() {
        let c = cfg(100, 3, 0.3, 0.25);
        let analytic = expected_groups(&c).unwrap() / 100.0;
        let est = monte_carlo_gain(&c, 100_000, 42).unwrap();
        assert!(
            (est.estimate - analytic).abs() <= 4.0 * est.std_error,
            "estimate {} vs analytic {analytic} (se {})",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn monte_carlo_rejects_zero_trials() {
        assert!(monte_carlo_gain(&cfg(10, 3, 0.5, 0.5), 0, 1).is_err());
    }
}
