//! Sizing calculators, dwell-time sweep and dwell adaptation.

use serde::Serialize;

use crate::atr::{self, ClassifierConfig};
use crate::detector::Detection;
use crate::dsp::{self, Window};
use crate::echo_synth::{self, CellDwell};
use crate::scenario::{state_from, LinkBudget, Scenario};
use crate::{Error, Result};

pub const MIN_DWELL_MS: f64 = 1.0;
pub const MAX_DWELL_MS: f64 = 200.0;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive")))
    }
}

/// Range at which a target of RCS `rcs` gives `snr_required` dB.
pub fn detection_range(budget: &LinkBudget, wavelength: f64, rcs: f64, snr_required: f64) -> Result<f64> {
    positive("wavelength", wavelength)?;
    positive("rcs", rcs)?;
    if !snr_required.is_finite() {
        return Err(Error::invalid("snr_required must be finite"));
    }
    let snr = 10f64.powf(snr_required / 10.0);
    Ok((budget.gain_term(wavelength) * rcs / (budget.loss_term() * snr)).powf(0.25))
}

/// R ∝ (σ/SNR)^¼ scaling from a reference point.
pub fn scale_range(r0: f64, sigma0: f64, snr0: f64, sigma1: f64, snr1: f64) -> Result<f64> {
    positive("r0", r0)?;
    positive("sigma0", sigma0)?;
    positive("sigma1", sigma1)?;
    let snr_ratio = 10f64.powf((snr0 - snr1) / 10.0);
    Ok(r0 * (sigma1 / sigma0 * snr_ratio).powf(0.25))
}

/// Detection-and-recognition latency terms, ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyBudget {
    pub drl_radar: f64,
    pub srl_eo: f64,
    pub rrl_eo: f64,
    pub t_com: f64,
    pub total: f64,
}

pub fn latency_budget(drl: f64, srl: f64, rrl: f64, t_com: f64) -> Result<LatencyBudget> {
    for (n, v) in [("drl", drl), ("srl", srl), ("rrl", rrl), ("t_com", t_com)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{n} must be >= 0")));
        }
    }
    Ok(LatencyBudget {
        drl_radar: drl,
        srl_eo: srl,
        rrl_eo: rrl,
        t_com,
        total: drl + srl + rrl + t_com,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorResolution {
    pub wavelength: f64,
    pub aperture: f64,
    pub angular_resolution: f64,
}

/// Diffraction-limited angular resolution 1.22 λ/D, rad.
pub fn angular_resolution(wavelength: f64, aperture: f64) -> Result<f64> {
    positive("wavelength", wavelength)?;
    positive("aperture", aperture)?;
    Ok(1.22 * wavelength / aperture)
}

pub fn sensor_resolution(wavelength: f64, aperture: f64) -> Result<SensorResolution> {
    Ok(SensorResolution {
        wavelength,
        aperture,
        angular_resolution: angular_resolution(wavelength, aperture)?,
    })
}

pub fn kmh_to_mps(v: f64) -> f64 {
    v / 3.6
}

/// Seconds until a threat at `range` arrives at `speed`.
pub fn alert_time(range: f64, speed: f64) -> Result<f64> {
    if !(range >= 0.0) {
        return Err(Error::invalid("range must be >= 0"));
    }
    if !(speed > 0.0) {
        return Err(Error::invalid("speed must be > 0"));
    }
    Ok(range / speed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cpi_ms: f64,
    pub pulses: usize,
    pub ratio: f64,
    pub detectable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Independent CPIs averaged per row.
    pub repeats: usize,
    /// Spacing between repeat start times, s.
    pub repeat_interval: f64,
    /// Sideband margin over the noise floor counted as detectable, dB.
    pub dscr_threshold: f64,
    pub classifier: ClassifierConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            repeats: 12,
            repeat_interval: 0.25,
            dscr_threshold: 10.0,
            classifier: ClassifierConfig::default(),
        }
    }
}

/// CPI duration in ms → pulse count at the scenario PRF.
pub fn pulses_for_ms(scenario: &Scenario, cpi_ms: f64) -> usize {
    ((cpi_ms * 1e-3 * scenario.radar.prf).round() as usize).max(2)
}

/// Micro-Doppler visibility against CPI length.
///
/// For each CPI the scenario is re-synthesized with that pulse count and
/// the bladed target's cell is analysed over the CPI alone. The ratio is
/// the mean micro_body_ratio over repeats; a row is detectable when most
/// repeats show a sideband above the threshold.
pub fn dwell_sweep(scenario: &Scenario, cpi_list: &[usize], cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cpi_list.is_empty() {
        return Err(Error::invalid("cpi list is empty"));
    }
    let target = scenario
        .targets
        .iter()
        .find(|t| !t.blade_sets.is_empty())
        .ok_or_else(|| Error::invalid("scenario has no bladed target"))?;
    let mut rows = Vec::with_capacity(cpi_list.len());
    for &pulses in cpi_list {
        if pulses < 2 {
            return Err(Error::invalid("each CPI needs at least 2 pulses"));
        }
        let mut sc = scenario.clone();
        sc.radar.pulses_per_cpi = pulses;
        let mut ccfg = cfg.classifier.clone();
        ccfg.welch_segment = pulses;
        ccfg.line_gate_db = cfg.dscr_threshold;
        let (mut sum, mut hits) = (0.0, 0usize);
        for r in 0..cfg.repeats.max(1) {
            let t0 = r as f64 * cfg.repeat_interval;
            let (pos, vel) = target.kinematics_at(t0)?;
            let st = state_from(sc.radar.position, pos, vel);
            let bin = (st.range / sc.radar.range_bin_size()).floor() as usize;
            if bin >= sc.radar.range_bins {
                return Err(Error::invalid(format!(
                    "target `{}` beyond unambiguous range",
                    target.id
                )));
            }
            let cube = echo_synth::synth_cpi(&sc, t0)?;
            let map = dsp::range_doppler(&cube, Window::Hann);
            let row = map.row(bin);
            let d = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            let det = Detection {
                range_bin: bin,
                doppler_bin: d,
                range: bin as f64 * map.range_bin_size,
                radial_speed: map.doppler_hz(d) * map.wavelength / 2.0,
                snr: map.magnitude_db(bin, d) - map.noise_floor_estimate,
                dscr: None,
                t0,
                beam_azimuth: map.beam_azimuth,
                detector: crate::detector::DetectorKind::Snr,
            };
            let dwell = CellDwell {
                range_bin: bin,
                samples: cube.column(bin),
                prf: cube.prf,
                t0,
            };
            let f = atr::extract_features(&det, &dwell, &map, &sc.radar, &sc.budget, &ccfg)?;
            sum += f.micro_body_ratio;
            if f.micro_body_ratio > 0.0 {
                hits += 1;
            }
        }
        let n = cfg.repeats.max(1);
        rows.push(SweepRow {
            cpi_ms: pulses as f64 / scenario.radar.prf * 1e3,
            pulses,
            ratio: sum / n as f64,
            detectable: 2 * hits > n,
        });
    }
    Ok(rows)
}

/// Replay a dwell history: returns (best CPI, next step), ms.
///
/// An improving step makes the next step continue the same way, 1.5×
/// longer unless it came straight after a reversal; a worsening step
/// returns to the best CPI, reverses and halves.
pub fn adapt_state(history: &[(f64, f64)]) -> Result<(f64, f64)> {
    let Some(&first) = history.first() else {
        return Err(Error::invalid("history is empty"));
    };
    let mut best = first;
    let mut step = 0.5 * first.0;
    let mut growing = true;
    for &(cpi, ratio) in &history[1..] {
        let mut taken = cpi - best.0;
        if taken == 0.0 {
            taken = step;
        }
        if ratio > best.1 {
            best = (cpi, ratio);
            step = if growing { 1.5 * taken } else { taken };
            growing = true;
        } else {
            step = -0.5 * taken;
            growing = false;
        }
    }
    Ok((best.0, step))
}

/// Next CPI (ms) for the perception-action loop, clamped to [1, 200] ms.
pub fn adapt_dwell(history: &[(f64, f64)]) -> Result<f64> {
    let (best, step) = adapt_state(history)?;
    Ok((best + step).clamp(MIN_DWELL_MS, MAX_DWELL_MS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_scaling_pairs() {
        let r = scale_range(60e3, 100.0, 13.0, 0.01, 13.0).unwrap();
        assert!((r - 6000.0).abs() / 6000.0 < 1e-9);
        let r = scale_range(1000.0, 1.0, 13.0, 1.0, 1.0).unwrap();
        assert!((r / 1000.0 - 10f64.powf(12.0 / 40.0)).abs() < 1e-12);
        assert_eq!(scale_range(5.0, 2.0, 3.0, 2.0, 3.0).unwrap(), 5.0);
        assert!(scale_range(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn detection_range_fourth_root() {
        let b = LinkBudget::default();
        let r1 = detection_range(&b, 0.03, 1.0, 13.0).unwrap();
        let r16 = detection_range(&b, 0.03, 16.0, 13.0).unwrap();
        assert!((r16 / r1 - 2.0).abs() < 1e-12);
        assert!(detection_range(&b, 0.03, -1.0, 13.0).is_err());
    }

    #[test]
    fn latency_sums() {
        assert_eq!(latency_budget(10.0, 500.0, 400.0, 50.0).unwrap().total, 960.0);
        assert_eq!(latency_budget(0.0, 0.0, 0.0, 0.0).unwrap().total, 0.0);
        let a = latency_budget(1000.0, 500.0, 400.0, 50.0).unwrap().total;
        let b = latency_budget(10.0, 500.0, 400.0, 50.0).unwrap().total;
        assert_eq!(a - b, 990.0);
        assert!(latency_budget(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn angular_and_alert() {
        // 1.22 · 0.03 / 0.3
        assert!((angular_resolution(0.03, 0.3).unwrap() - 0.122).abs() < 1e-12);
        let a = angular_resolution(0.03, 0.3).unwrap();
        let b = angular_resolution(0.015, 0.3).unwrap();
        assert!((b / a - 0.5).abs() < 1e-12);
        let v = kmh_to_mps(185.0);
        assert!((v - 51.39).abs() < 0.1);
        assert!((alert_time(6000.0, v).unwrap() - 116.8).abs() < 0.1);
        assert!((alert_time(3000.0, v).unwrap() - 58.4).abs() < 0.1);
        assert!(alert_time(6000.0, 0.0).is_err());
    }

    #[test]
    fn adapt_rules() {
        let up = [(10.0, 0.1), (15.0, 0.2), (22.5, 0.3)];
        assert!(adapt_dwell(&up).unwrap() > 22.5);
        // worsening reverses direction from the best point
        let worse = [(10.0, 0.1), (15.0, 0.2), (22.5, 0.15)];
        let n = adapt_dwell(&worse).unwrap();
        assert!(n < 15.0 + 1e-9 && n > 10.0);
        let big = [(150.0, 0.1), (190.0, 0.2)];
        assert_eq!(adapt_dwell(&big).unwrap(), 200.0);
        assert!(adapt_dwell(&[]).is_err());
        assert_eq!(adapt_dwell(&[(20.0, 0.5)]).unwrap(), 30.0);
    }
}
