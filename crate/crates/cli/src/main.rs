//! Command-line front end: rate-distance sweeps, closed-form versus
//! brute-force consistency checks, and signature-rate tables.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qss_core::config::KvConfig;
use qss_core::device::DeviceParams;
use qss_core::ghz::ghz_projection_stats;
use qss_core::oracle::{oracle_stats, Basis, MAX_ORACLE_PARTIES};
use qss_core::sweep::{fmt_g9, write_sweep, SweepConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qss", about = "Multiparty key-sharing rate toolkit", version)]
struct Cli {
    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a rate-distance sweep and write CSV plus metadata.
    Sweep {
        /// Flat `name = value` config file (see presets/).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; a `.meta` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Seed recorded in metadata and used by any stochastic step.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare closed-form analyzer statistics with the brute-force
    /// simulation on a detector-parameter grid.
    OracleCheck {
        /// Optional config overriding the default grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Signature rates at the reference distances.
    Table1 {
        /// Optional config overriding clock and consumption.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads > 0 {
        eprintln!("note: built without the parallel feature, --threads has no effect");
    }
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { config, out, seed } => {
            let kv = KvConfig::parse_file(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut sweep = SweepConfig::from_kv(kv)?;
            if let Some(seed) = seed {
                sweep.seed = seed;
            }
            let points = write_sweep(&sweep, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} rows to {}", points.len(), out.display());
            Ok(())
        }
        Command::OracleCheck { config, out } => oracle_check(config, out),
        Command::Table1 { config, out } => table1(config, out),
    }
}

const ORACLE_TOL: f64 = 1e-9;

fn oracle_check(config: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let mut parties = vec![3u32, 4, 5];
    let mut etas = vec![1.0, 0.93, 0.5];
    let mut darks = vec![0.0, 1e-9, 1e-3];
    if let Some(path) = config {
        let mut kv =
            KvConfig::parse_file(&path).with_context(|| format!("reading {}", path.display()))?;
        if let Some(v) = kv.take_list_u32("oracle_parties")? {
            parties = v;
        }
        if let Some(v) = kv.take_list_f64("oracle_eta_d")? {
            etas = v;
        }
        if let Some(v) = kv.take_list_f64("oracle_p_d")? {
            darks = v;
        }
        kv.finish()?;
    }
    for &n in &parties {
        if n > MAX_ORACLE_PARTIES {
            bail!("oracle check supports at most {MAX_ORACLE_PARTIES} parties, got {n}");
        }
    }
    let mut csv = String::from("n_parties,eta_d,p_d,dev_q_z,dev_e_z,dev_q_x,dev_e_x,max_dev\n");
    let mut worst: f64 = 0.0;
    for &n in &parties {
        for &eta_d in &etas {
            for &p_d in &darks {
                let mut device = DeviceParams::default();
                device.eta_d = eta_d;
                device.p_d = p_d;
                let clicks = qss_core::device::build_click_model(&device)?;
                let stats = ghz_projection_stats(n, &clicks)?;
                let (qz, ez) = oracle_stats(n, Basis::Z, eta_d, p_d)?;
                let (qx, ex) = oracle_stats(n, Basis::X, eta_d, p_d)?;
                let devs = [
                    (stats.q_ghz_z - qz).abs(),
                    (stats.e_z - ez).abs(),
                    (stats.q_ghz_x - qx).abs(),
                    (stats.e_x - ex).abs(),
                ];
                let max_dev = devs.iter().fold(0.0f64, |a, &b| a.max(b));
                worst = worst.max(max_dev);
                csv.push_str(&format!(
                    "{n},{},{},{},{},{},{},{}\n",
                    fmt_g9(eta_d),
                    fmt_g9(p_d),
                    fmt_g9(devs[0]),
                    fmt_g9(devs[1]),
                    fmt_g9(devs[2]),
                    fmt_g9(devs[3]),
                    fmt_g9(max_dev),
                ));
            }
        }
    }
    std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
    println!("max deviation {} (tolerance {})", fmt_g9(worst), fmt_g9(ORACLE_TOL));
    if worst > ORACLE_TOL {
        bail!("closed forms deviate from the simulation by {worst:e}");
    }
    Ok(())
}

fn table1(config: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let mut device = DeviceParams::default();
    let mut clock_hz = 1e6;
    let mut consumption = 384u64;
    if let Some(path) = config {
        let mut kv =
            KvConfig::parse_file(&path).with_context(|| format!("reading {}", path.display()))?;
        device.apply_config(&mut kv)?;
        if let Some(v) = kv.take_f64("clock_hz")? {
            clock_hz = v;
        }
        if let Some(v) = kv.take_u64("sig_consumption_bits")? {
            consumption = v;
        }
        kv.finish()?;
    }
    let rows = qss_core::bounds::signature_table(&device, clock_hz, consumption)?;
    let mut csv =
        String::from("total_km,leg_km,rate_per_pulse,signature_rate_tps,reference_tps\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_g9(row.total_km),
            fmt_g9(row.leg_km),
            fmt_g9(row.rate_per_pulse),
            fmt_g9(row.signature_rate_tps),
            fmt_g9(row.reference_tps),
        ));
        println!(
            "{} km total: {:.1} signatures/s (reference {})",
            row.total_km, row.signature_rate_tps, row.reference_tps
        );
    }
    std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}
