//! `size` calculators.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Subcommand;

use dronerad::atr::sig6;
use dronerad::dsp::resolutions;
use dronerad::reference::reference_budget;
use dronerad::scattering::{ka_sweep, scattering_region, sphere_rcs};
use dronerad::scenario::RadarParams;
use dronerad::tradestudy::{
    alert_time, detection_range, kmh_to_mps, latency_budget, pulses_for_ms, scale_range, sensor_resolution,
};
use dronerad::SPEED_OF_LIGHT;

use crate::{require_positive, scenario_from};

#[derive(Debug, Subcommand)]
pub enum SizeCommand {
    /// Detection range for a target RCS. With --ref-range and --ref-rcs the
    /// range is scaled from that calibration point; otherwise the link
    /// budget of --scenario (or the reference budget) is used.
    Range {
        #[arg(long)]
        rcs: f64,
        /// Required SNR, dB.
        #[arg(long, default_value_t = 13.1, allow_negative_numbers = true)]
        snr: f64,
        #[arg(long)]
        ref_range: Option<f64>,
        #[arg(long)]
        ref_rcs: Option<f64>,
        /// SNR at the calibration point, dB (defaults to --snr).
        #[arg(long, allow_negative_numbers = true)]
        ref_snr: Option<f64>,
        /// Scenario whose link budget and carrier are used.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Wavelength when no scenario is given, m.
        #[arg(long, default_value_t = 0.03)]
        wavelength: f64,
    },
    /// R ∝ (σ/SNR)^¼ scaling between two operating points.
    Scale {
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        sigma0: f64,
        #[arg(long, allow_negative_numbers = true)]
        snr0: f64,
        #[arg(long)]
        sigma1: f64,
        #[arg(long, allow_negative_numbers = true)]
        snr1: f64,
    },
    /// Detection-and-recognition latency sum, ms.
    Latency {
        #[arg(long)]
        drl: f64,
        #[arg(long)]
        srl: f64,
        #[arg(long)]
        rrl: f64,
        #[arg(long)]
        com: f64,
    },
    /// Conducting-sphere RCS, or a ka sweep of σ/πa² as CSV.
    SphereRcs {
        #[arg(long, requires = "wavelength")]
        radius: Option<f64>,
        #[arg(long)]
        wavelength: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        ka_min: f64,
        #[arg(long, default_value_t = 50.0)]
        ka_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Range and Doppler resolution of a waveform.
    Resolution {
        #[arg(long)]
        bandwidth: f64,
        #[arg(long, default_value_t = 10e9)]
        carrier: f64,
        #[arg(long, default_value_t = 5000.0)]
        prf: f64,
        /// CPI length, ms.
        #[arg(long, default_value_t = 20.0)]
        cpi_ms: f64,
    },
    /// Diffraction-limited angular resolution.
    Angular {
        #[arg(long)]
        wavelength: f64,
        #[arg(long)]
        aperture: f64,
    },
    /// Warning time before a threat arrives.
    Alert {
        #[arg(long)]
        range: f64,
        #[arg(long)]
        speed_kmh: f64,
    },
}

/// Report rows: (quantity, value, unit).
struct Report(Vec<(&'static str, f64, &'static str)>);

impl Report {
    fn render(&self, csv: bool) -> String {
        let mut s = String::new();
        if csv {
            s.push_str("quantity,value,unit\n");
            for (q, v, u) in &self.0 {
                let _ = writeln!(s, "{q},{},{u}", sig6(*v));
            }
        } else {
            let w = self.0.iter().map(|r| r.0.len()).max().unwrap_or(0);
            for (q, v, u) in &self.0 {
                let line = format!("{q:<w$}  {:>12} {u}", sig6(*v));
                let _ = writeln!(s, "{}", line.trim_end());
            }
        }
        s
    }
}

pub fn cmd_size(cmd: &SizeCommand, csv: bool) -> Result<String> {
    let report = match *cmd {
        SizeCommand::Range {
            rcs,
            snr,
            ref_range,
            ref_rcs,
            ref_snr,
            ref scenario,
            wavelength,
        } => {
            require_positive("rcs", rcs)?;
            let range = match (ref_range, ref_rcs) {
                (Some(r0), Some(s0)) => scale_range(r0, s0, ref_snr.unwrap_or(snr), rcs, snr)?,
                (None, None) => {
                    let (budget, lam) = match scenario {
                        Some(p) => {
                            let sc = scenario_from(p, None)?;
                            (sc.budget, sc.radar.wavelength)
                        }
                        None => (reference_budget(), require_positive("wavelength", wavelength)?),
                    };
                    detection_range(&budget, lam, rcs, snr)?
                }
                _ => bail!("--ref-range and --ref-rcs must be given together"),
            };
            Report(vec![
                ("rcs", rcs, "m2"),
                ("snr_required", snr, "dB"),
                ("range", range, "m"),
            ])
        }
        SizeCommand::Scale {
            r0,
            sigma0,
            snr0,
            sigma1,
            snr1,
        } => {
            let r1 = scale_range(r0, sigma0, snr0, sigma1, snr1)?;
            Report(vec![
                ("range", r1, "m"),
                ("ratio", r1 / r0, ""),
                ("ratio_db", 10.0 * (r1 / r0).log10(), "dB"),
            ])
        }
        SizeCommand::Latency { drl, srl, rrl, com } => {
            let l = latency_budget(drl, srl, rrl, com)?;
            Report(vec![
                ("drl_radar", l.drl_radar, "ms"),
                ("srl_eo", l.srl_eo, "ms"),
                ("rrl_eo", l.rrl_eo, "ms"),
                ("t_com", l.t_com, "ms"),
                ("total", l.total, "ms"),
            ])
        }
        SizeCommand::SphereRcs {
            radius,
            wavelength,
            ka_min,
            ka_max,
            points,
        } => match (radius, wavelength) {
            (Some(a), Some(lam)) => {
                let sigma = sphere_rcs(a, lam)?;
                let ka = std::f64::consts::TAU * a / lam;
                let region = scattering_region(a, lam)?;
                let mut s = Report(vec![
                    ("ka", ka, ""),
                    ("rcs", sigma, "m2"),
                    ("rcs_over_pi_a2", sigma / (std::f64::consts::PI * a * a), ""),
                ])
                .render(csv);
                if !csv {
                    let _ = writeln!(s, "region  {region:?}");
                }
                return Ok(s);
            }
            _ => {
                let mut s = String::from("ka,rcs_over_pi_a2\n");
                for (ka, v) in ka_sweep(ka_min, ka_max, points)? {
                    let _ = writeln!(s, "{},{}", sig6(ka), sig6(v));
                }
                return Ok(s);
            }
        },
        SizeCommand::Resolution {
            bandwidth,
            carrier,
            prf,
            cpi_ms,
        } => {
            require_positive("bandwidth", bandwidth)?;
            require_positive("carrier", carrier)?;
            require_positive("prf", prf)?;
            require_positive("cpi-ms", cpi_ms)?;
            let mut radar = RadarParams::new(carrier, prf, 2, bandwidth, 16);
            let probe = dronerad::scenario::Scenario::new(radar.clone(), reference_budget());
            radar.pulses_per_cpi = pulses_for_ms(&probe, cpi_ms);
            let r = resolutions(&radar);
            Report(vec![
                ("range_resolution", r.range_resolution, "m"),
                ("doppler_resolution", r.doppler_resolution, "Hz"),
                ("velocity_resolution", r.velocity_resolution, "m/s"),
                ("wavelength", SPEED_OF_LIGHT / carrier, "m"),
                ("pulses", radar.pulses_per_cpi as f64, ""),
            ])
        }
        SizeCommand::Angular { wavelength, aperture } => {
            let s = sensor_resolution(wavelength, aperture)?;
            Report(vec![
                ("angular_resolution", s.angular_resolution, "rad"),
                ("angular_resolution_deg", s.angular_resolution.to_degrees(), "deg"),
            ])
        }
        SizeCommand::Alert { range, speed_kmh } => {
            let v = kmh_to_mps(speed_kmh);
            Report(vec![("speed", v, "m/s"), ("alert_time", alert_time(range, v)?, "s")])
        }
    };
    Ok(report.render(csv))
}
