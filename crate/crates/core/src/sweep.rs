//! Parameter sweeps over (party count, leg distance) grids with
//! deterministic CSV output.
//!
//! Grid points are evaluated concurrently but assembled in sorted
//! order, all floats are printed with nine significant digits in
//! scientific notation, and a sidecar `<out>.meta` file records every
//! model flag in effect, so identical configs produce identical bytes.

use crate::bounds;
use crate::config::KvConfig;
use crate::device::{self, DeviceParams};
use crate::error::{QssError, Result};
use crate::exec;
use crate::ghz::ghz_projection_stats;
use crate::multiplex::{self, MC_ALGORITHM};
use crate::security::{self, FiniteModel};

/// CSV header, fixed column order.
pub const CSV_HEADER: &str = "leg_distance_km,n_parties,q_x_gain,e_x,e_z,rate_asymptotic,rate_finite,bound_direct,bound_plob,key_length_bits";

/// One row of a rate-distance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub leg_distance_km: f64,
    pub n_parties: u32,
    pub q_x_gain: f64,
    pub e_x: f64,
    pub e_z: f64,
    pub rate_asymptotic: f64,
    pub rate_finite: f64,
    pub bound_direct: f64,
    pub bound_plob: f64,
    pub key_length_bits: u64,
}

/// Whether a sweep also evaluates the finite-size chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Asymptotic,
    Finite,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub device: DeviceParams,
    pub party_counts: Vec<u32>,
    pub distances_km: Vec<f64>,
    pub mode: SweepMode,
    pub finite: FiniteModel,
    pub seed: u64,
}

impl SweepConfig {
    /// Parse a flat key-value config; unknown keys are errors.
    pub fn from_kv(mut kv: KvConfig) -> Result<Self> {
        let mut device = DeviceParams::default();
        device.apply_config(&mut kv)?;
        let party_counts = kv
            .take_list_u32("sweep_parties")?
            .unwrap_or_else(|| vec![device.n_parties]);
        let distances_km = kv
            .take_grid("leg_km")?
            .ok_or_else(|| QssError::config(0, "missing required key `leg_km`"))?;
        let mode = match kv.take("mode").as_deref() {
            None | Some("asymptotic") => SweepMode::Asymptotic,
            Some("finite") => SweepMode::Finite,
            Some(other) => {
                return Err(QssError::config(
                    0,
                    format!("mode must be `asymptotic` or `finite`, got `{other}`"),
                ))
            }
        };
        let mut finite = FiniteModel::default();
        if let Some(v) = kv.take_u64("n_total")? {
            finite.n_total = v;
        }
        if let Some(v) = kv.take_f64("eps_c")? {
            finite.eps_c = v;
        }
        if let Some(v) = kv.take_f64("eps_s")? {
            finite.eps_s = v;
        }
        if let Some(v) = kv.take_f64("basis_bias")? {
            finite.basis_bias = v;
        }
        if let Some(v) = kv.take_f64("q_prep")? {
            finite.q_prep = v;
        }
        if let Some(v) = kv.take_u64("finite_m")? {
            finite.m_channels = if v == 0 { None } else { Some(v) };
        }
        let seed = kv.take_u64("seed")?.unwrap_or(1);
        kv.finish()?;
        for &n in &party_counts {
            if n < 3 {
                return Err(QssError::invalid(format!("sweep party count {n} < 3")));
            }
        }
        for &d in &distances_km {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(QssError::invalid(format!("sweep distance {d} invalid")));
            }
        }
        Ok(SweepConfig {
            device,
            party_counts,
            distances_km,
            mode,
            finite,
            seed,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(KvConfig::parse_str(text)?)
    }
}

fn evaluate_point(cfg: &SweepConfig, n: u32, leg_km: f64) -> Result<SweepPoint> {
    let params = cfg.device.with_parties(n).with_leg_distance(leg_km);
    let clicks = device::build_click_model(&params)?;
    let stats = ghz_projection_stats(n, &clicks)?;
    let q_x_gain = multiplex::asymptotic_gain(&params, stats.q_ghz_x)?;
    let rate_asymptotic = security::asymptotic_rate(q_x_gain, stats.e_z, stats.e_x, params.f_ec)?;
    let eta_e2e = bounds::end_to_end_transmittance(&params);
    let bound_plob = bounds::plob_bound(eta_e2e)?;
    let bound_direct = bounds::direct_transmission_bound(eta_e2e, n)?;
    let (rate_finite, key_length_bits) = match cfg.mode {
        SweepMode::Asymptotic => (0.0, 0),
        SweepMode::Finite => {
            let point = security::finite_rate_with_clicks(&params, &clicks, &cfg.finite)?;
            (point.rate_finite, point.key_length)
        }
    };
    Ok(SweepPoint {
        leg_distance_km: leg_km,
        n_parties: n,
        q_x_gain,
        e_x: stats.e_x,
        e_z: stats.e_z,
        rate_asymptotic,
        rate_finite,
        bound_direct,
        bound_plob,
        key_length_bits,
    })
}

fn build_grid(cfg: &SweepConfig) -> Vec<(u32, f64)> {
    let mut grid = Vec::with_capacity(cfg.party_counts.len() * cfg.distances_km.len());
    for &n in &cfg.party_counts {
        for &d in &cfg.distances_km {
            grid.push((n, d));
        }
    }
    grid
}

fn sort_points(results: Vec<Result<SweepPoint>>) -> Result<Vec<SweepPoint>> {
    let mut points = results.into_iter().collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        (a.n_parties, a.leg_distance_km)
            .partial_cmp(&(b.n_parties, b.leg_distance_km))
            .expect("finite grid")
    });
    Ok(points)
}

/// Evaluate the whole grid, concurrently when the `parallel` feature is
/// enabled; output order is sorted by (parties, distance) either way.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let results = exec::map_collect(build_grid(cfg), |(n, d)| evaluate_point(cfg, n, d));
    sort_points(results)
}

/// Always-sequential twin of [`run_sweep`] for benchmarking.
pub fn run_sweep_seq(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let results = exec::map_collect_seq(build_grid(cfg), |(n, d)| evaluate_point(cfg, n, d));
    sort_points(results)
}

/// Nine significant digits, scientific, locale-independent.
pub fn fmt_g9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Render rows as CSV with the fixed header.
pub fn render_csv(points: &[SweepPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_g9(p.leg_distance_km),
            p.n_parties,
            fmt_g9(p.q_x_gain),
            fmt_g9(p.e_x),
            fmt_g9(p.e_z),
            fmt_g9(p.rate_asymptotic),
            fmt_g9(p.rate_finite),
            fmt_g9(p.bound_direct),
            fmt_g9(p.bound_plob),
            p.key_length_bits,
        ));
    }
    out
}

/// First grid distance per party count at which the finite rate is zero
/// while a shorter distance still had key.
pub fn finite_cutoffs(points: &[SweepPoint]) -> Vec<(u32, Option<f64>)> {
    let mut parties: Vec<u32> = points.iter().map(|p| p.n_parties).collect();
    parties.sort_unstable();
    parties.dedup();
    parties
        .into_iter()
        .map(|n| {
            let mut saw_key = false;
            let mut cutoff = None;
            for p in points.iter().filter(|p| p.n_parties == n) {
                if p.rate_finite > 0.0 {
                    saw_key = true;
                    cutoff = None;
                } else if saw_key && cutoff.is_none() {
                    cutoff = Some(p.leg_distance_km);
                }
            }
            (n, cutoff)
        })
        .collect()
}

/// Model flags in effect, one `name = value` per line.
pub fn render_metadata(cfg: &SweepConfig, points: &[SweepPoint]) -> String {
    let mut out = String::new();
    let d = &cfg.device;
    out.push_str("# model flags in effect for the accompanying CSV\n");
    out.push_str(&format!(
        "mode = {}\n",
        match cfg.mode {
            SweepMode::Asymptotic => "asymptotic",
            SweepMode::Finite => "finite",
        }
    ));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("eta_sps = {}\n", d.eta_sps));
    out.push_str(&format!("l_att = {}\n", d.l_att));
    out.push_str(&format!("p_qnd = {}\n", d.p_qnd));
    out.push_str(&format!("tau_a = {}\n", d.tau_a));
    out.push_str(&format!("c_fiber = {}\n", d.c_fiber));
    out.push_str(&format!("eta_d = {}\n", d.eta_d));
    out.push_str(&format!("p_d = {}\n", d.p_d));
    out.push_str(&format!("f_ec = {}\n", d.f_ec));
    out.push_str("input_averaging = uniform 2^-n over basis patterns\n");
    out.push_str("two_photon_split = x2c and x2e share the bunched sum equally\n");
    out.push_str("click_convention = exactly one detector per mode, silent partner folded in\n");
    if cfg.mode == SweepMode::Finite {
        let f = &cfg.finite;
        out.push_str(&format!("n_total = {}\n", f.n_total));
        out.push_str(&format!("eps_c = {}\n", f.eps_c));
        out.push_str(&format!("eps_s = {}\n", f.eps_s));
        out.push_str("eps_bar = eps_s / 4\n");
        out.push_str("eps_prime = eps_s / 4\n");
        out.push_str(&format!("basis_bias = {}\n", f.basis_bias));
        out.push_str(&format!("q_prep = {}\n", f.q_prep));
        match f.m_channels {
            Some(m) => out.push_str(&format!("finite_m = {m}\n")),
            None => out.push_str("finite_m = unlimited\n"),
        }
        out.push_str("sifting = key rounds bias^n, estimation rounds (1-bias)^2 per subset\n");
        out.push_str("lambda_floor = max(observed, 1/(2 k_j))\n");
        out.push_str("leak_ec = f_ec * h(e_x) * m\n");
        out.push_str(&format!("mc_algorithm = {MC_ALGORITHM}\n"));
        for (n, cutoff) in finite_cutoffs(points) {
            match cutoff {
                Some(km) => out.push_str(&format!("zero_rate_from_km_n{n} = {}\n", fmt_g9(km))),
                None => out.push_str(&format!("zero_rate_from_km_n{n} = none-in-grid\n")),
            }
        }
    }
    out
}

/// Run a sweep config and write `out` and `out.meta`.
pub fn write_sweep(cfg: &SweepConfig, out_path: &std::path::Path) -> Result<Vec<SweepPoint>> {
    let points = run_sweep(cfg)?;
    std::fs::write(out_path, render_csv(&points))?;
    let meta_path = out_path.with_extension(match out_path.extension() {
        Some(ext) => format!("{}.meta", ext.to_string_lossy()),
        None => "meta".to_string(),
    });
    std::fs::write(meta_path, render_metadata(cfg, &points))?;
    Ok(points)
}
