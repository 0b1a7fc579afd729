//! Slow-time echo synthesis: one complex sample per pulse per range bin.
//!
//! Noise is unit power per cell, so a target's amplitude is the square root
//! of its single-pulse SNR.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::dsp::fft_plan;
use crate::rng::{self, Stream};
use crate::scenario::LinkBudget;
use crate::scenario::{los_geometry, state_from, BladeSet, ClutterParams, RadarParams, Scenario, TargetModel};
use crate::{Complex64, Error, Result};

/// Peak Doppler excursion of the bird flapping modulation, m/s.
pub const FLAP_SPEED_EXCURSION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthWarning {
    BeyondUnambiguousRange { target_id: String, range_m: f64 },
    DopplerAliased { target_id: String, doppler_hz: f64 },
}

/// One CPI of baseband samples, stored pulse-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IqCube {
    pub pulses: usize,
    pub range_bins: usize,
    pub samples: Vec<Complex64>,
    pub t0: f64,
    pub prf: f64,
    pub range_bin_size: f64,
    pub beam_azimuth: f64,
    pub wavelength: f64,
    pub warnings: Vec<SynthWarning>,
}

impl IqCube {
    pub fn zeros(radar: &RadarParams, t0: f64) -> Self {
        Self {
            pulses: radar.pulses_per_cpi,
            range_bins: radar.range_bins,
            samples: vec![Complex64::new(0.0, 0.0); radar.pulses_per_cpi * radar.range_bins],
            t0,
            prf: radar.prf,
            range_bin_size: radar.range_bin_size(),
            beam_azimuth: radar.beam_azimuth_at(t0),
            wavelength: radar.wavelength,
            warnings: Vec::new(),
        }
    }

    #[inline]
    pub fn get(&self, pulse: usize, bin: usize) -> Complex64 {
        self.samples[pulse * self.range_bins + bin]
    }

    #[inline]
    pub fn get_mut(&mut self, pulse: usize, bin: usize) -> &mut Complex64 {
        &mut self.samples[pulse * self.range_bins + bin]
    }

    /// Slow-time series of one range bin.
    pub fn column(&self, bin: usize) -> Vec<Complex64> {
        (0..self.pulses).map(|p| self.get(p, bin)).collect()
    }
}

/// Long slow-time record of a single range cell, used for ATR.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDwell {
    pub range_bin: usize,
    pub samples: Vec<Complex64>,
    pub prf: f64,
    pub t0: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive")))
    }
}

/// Single-pulse SNR from the radar equation, linear.
pub fn single_pulse_snr_linear(budget: &LinkBudget, radar: &RadarParams, rcs: f64, range: f64) -> Result<f64> {
    positive("rcs", rcs)?;
    positive("range", range)?;
    Ok(budget.gain_term(radar.wavelength) * rcs / (budget.loss_term() * range.powi(4)))
}

/// Single-pulse SNR from the radar equation, dB.
pub fn single_pulse_snr(budget: &LinkBudget, radar: &RadarParams, rcs: f64, range: f64) -> Result<f64> {
    Ok(10.0 * single_pulse_snr_linear(budget, radar, rcs, range)?.log10())
}

/// Two-way Doppler of a radial speed (approaching positive).
pub fn doppler_of(radial_speed: f64, wavelength: f64) -> f64 {
    2.0 * radial_speed / wavelength
}

/// Instantaneous blade-tip Doppler, Hz.
///
/// Uses the instantaneous rotation angle and rate, so a wobbling rotor is
/// followed exactly; with no wobble this is the textbook cosine form.
pub fn micro_doppler_shift(blade: &BladeSet, alpha: f64, beta: f64, body_doppler: f64, wavelength: f64, t: f64) -> f64 {
    let cc = alpha.cos() * beta.cos();
    blade.blade_length / wavelength * blade.rate_at(t) * cc * blade.angle_at(t).cos() + body_doppler
}

/// Phase and relative amplitude of every point scatterer of a blade set.
///
/// Amplitudes are relative to the body return amplitude: the blade set
/// carries `reflectivity_scale` of the body RCS, split equally over
/// `blade_count × scatterers_per_blade` points.
pub fn blade_scatterer_phases(blade: &BladeSet, alpha: f64, beta: f64, wavelength: f64, t: f64) -> Vec<(f64, f64)> {
    let n = blade.blade_count;
    let p = blade.scatterers_per_blade;
    let amp = (blade.reflectivity_scale / (n * p) as f64).sqrt();
    let k_cc = TAU / wavelength * alpha.cos() * beta.cos();
    let theta = blade.angle_at(t);
    let mut out = Vec::with_capacity(n * p);
    for k in 0..n {
        let s = (theta + TAU * k as f64 / n as f64).sin();
        for i in 1..=p {
            let rho = blade.blade_length * i as f64 / p as f64;
            out.push((k_cc * rho * s, amp));
        }
    }
    out
}

/// Coherent sum of a blade set's scatterers at time t (relative amplitude).
#[inline]
fn blade_sum(blade: &BladeSet, k_cc: f64, amp: f64, t: f64) -> Complex64 {
    let n = blade.blade_count;
    let p = blade.scatterers_per_blade;
    let theta = blade.angle_at(t);
    let step = k_cc * blade.blade_length / p as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let x = step * (theta + TAU * k as f64 / n as f64).sin();
        let z = Complex64::from_polar(1.0, x);
        let mut zp = z;
        for _ in 0..p {
            acc += zp;
            zp *= z;
        }
    }
    acc * amp
}

struct TargetEcho {
    bin: usize,
    series: Vec<Complex64>,
}

/// Slow-time return of one target starting at `t0`, noise free.
fn target_echo(
    scenario: &Scenario,
    target: &TargetModel,
    t0: f64,
    pulses: usize,
    warnings: &mut Vec<SynthWarning>,
) -> Result<Option<TargetEcho>> {
    let radar = &scenario.radar;
    let Ok((pos, vel)) = target.kinematics_at(t0) else {
        // not yet present in the scene
        return Ok(None);
    };
    let state = state_from(radar.position, pos, vel);
    if !(state.range > 0.0) {
        return Ok(None);
    }
    if state.range >= radar.unambiguous_range() {
        warnings.push(SynthWarning::BeyondUnambiguousRange {
            target_id: target.id.clone(),
            range_m: state.range,
        });
        return Ok(None);
    }
    let lam = radar.wavelength;
    let rcs = target.mean_rcs(lam);
    if !(rcs > 0.0) {
        return Ok(None);
    }
    let a = single_pulse_snr_linear(&scenario.budget, radar, rcs, state.range)?.sqrt();
    let fbd = doppler_of(state.radial_speed, lam);
    if fbd.abs() > radar.prf / 2.0 {
        warnings.push(SynthWarning::DopplerAliased {
            target_id: target.id.clone(),
            doppler_hz: fbd,
        });
    }
    let bin = (state.range / radar.range_bin_size()).floor() as usize;

    let blades: Vec<(&BladeSet, f64, f64)> = target
        .blade_sets
        .iter()
        .map(|b| {
            let (alpha, beta) = los_geometry(radar.position, &state, b)?;
            let k_cc = TAU / lam * alpha.cos() * beta.cos();
            let amp = (b.reflectivity_scale / (b.blade_count * b.scatterers_per_blade) as f64).sqrt();
            Ok((b, k_cc, amp))
        })
        .collect::<Result<_>>()?;

    let flap = target.flap_rate;
    let flap_phase = 0.7 * flap;
    let flap_dev = doppler_of(FLAP_SPEED_EXCURSION, lam);
    let appendage = target
        .appendage
        .map(|ap| Complex64::from_polar(ap.reflectivity.sqrt(), 4.0 * PI * ap.offset_m / lam));

    let mut series = Vec::with_capacity(pulses);
    for n in 0..pulses {
        let t = t0 + n as f64 / radar.prf;
        let carrier_phase = TAU * fbd * t;
        let mut body = if flap > 0.0 {
            let arg = TAU * flap * t + flap_phase;
            let env = 1.0 + 0.5 * arg.sin();
            Complex64::from_polar(env, carrier_phase - flap_dev / flap * arg.cos())
        } else {
            Complex64::from_polar(1.0, carrier_phase)
        };
        let carrier = Complex64::from_polar(1.0, carrier_phase);
        for &(b, k_cc, amp) in &blades {
            body += blade_sum(b, k_cc, amp, t) * carrier;
        }
        if let Some(ap) = appendage {
            body += ap * carrier;
        }
        series.push(body * a);
    }
    Ok(Some(TargetEcho { bin, series }))
}

/// Doppler shaping of zero-mean complex Gaussian clutter: a Gaussian
/// spectrum centred on zero Doppler, with mean power per sample equal to
/// the clutter-to-noise ratio.
struct ClutterShape {
    n: usize,
    /// (DFT bin, amplitude) of every component above -120 dB.
    comps: Vec<(usize, f64)>,
}

impl ClutterShape {
    fn new(clutter: &ClutterParams, radar: &RadarParams, n: usize) -> Self {
        let cnr = 10f64.powf(clutter.clutter_to_noise / 10.0);
        let sigma_f = 2.0 * clutter.doppler_spread / radar.wavelength;
        let df = radar.prf / n as f64;
        let g: Vec<f64> = (0..n)
            .map(|k| {
                let ks = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let f = ks * df;
                if sigma_f > 0.0 {
                    (-(f * f) / (2.0 * sigma_f * sigma_f)).exp()
                } else if k == 0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let gsum: f64 = g.iter().sum();
        let comps = g
            .iter()
            .enumerate()
            .filter(|(_, &gk)| gk > 1e-12 * gsum)
            .map(|(k, &gk)| (k, (cnr * gk / gsum).sqrt()))
            .collect();
        Self { n, comps }
    }

    /// Add an independent clutter series to every range bin of `cube`.
    /// Draws the same samples, bin after bin, as repeated [`Self::series`].
    fn add_to_cube<R: rand::Rng>(&self, cube: &mut IqCube, rng: &mut R) {
        let (np, nb) = (cube.pulses, cube.range_bins);
        if self.comps.len() > 32 {
            for bin in 0..nb {
                for (p, v) in self.series(rng).into_iter().enumerate() {
                    *cube.get_mut(p, bin) += v;
                }
            }
            return;
        }
        let nc = self.comps.len();
        // component-major coefficients, bin fastest
        let mut coef = vec![Complex64::new(0.0, 0.0); nc * nb];
        for bin in 0..nb {
            for (c, &(_, amp)) in self.comps.iter().enumerate() {
                coef[c * nb + bin] = rng::complex_normal(rng) * amp;
            }
        }
        for p in 0..np {
            let row = &mut cube.samples[p * nb..(p + 1) * nb];
            for (c, &(k, _)) in self.comps.iter().enumerate() {
                let e = Complex64::from_polar(1.0, TAU * ((k * p) % np) as f64 / np as f64);
                for (o, v) in row.iter_mut().zip(&coef[c * nb..(c + 1) * nb]) {
                    *o += v * e;
                }
            }
        }
    }

    fn series<R: rand::Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        let n = self.n;
        if self.comps.len() > 32 {
            let mut spec = vec![Complex64::new(0.0, 0.0); n];
            for &(k, amp) in &self.comps {
                spec[k] = rng::complex_normal(rng) * amp;
            }
            fft_plan(n, true).process(&mut spec);
            return spec;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for &(k, amp) in &self.comps {
            let mut v = rng::complex_normal(rng) * amp;
            if k == 0 {
                for o in out.iter_mut() {
                    *o += v;
                }
                continue;
            }
            let step = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            for o in out.iter_mut() {
                *o += v;
                v *= step;
            }
        }
        out
    }
}

/// Synthesize one CPI starting at `t0`.
pub fn synth_cpi(scenario: &Scenario, t0: f64) -> Result<IqCube> {
    let mut cube = IqCube::zeros(&scenario.radar, t0);
    synth_cpi_into(scenario, t0, &mut cube)?;
    Ok(cube)
}

/// [`synth_cpi`] into an existing cube, reusing its sample storage.
pub fn synth_cpi_into(scenario: &Scenario, t0: f64, cube: &mut IqCube) -> Result<()> {
    let radar = &scenario.radar;
    let mut samples = std::mem::take(&mut cube.samples);
    samples.clear();
    samples.resize(radar.pulses_per_cpi * radar.range_bins, Complex64::new(0.0, 0.0));
    *cube = IqCube {
        samples,
        ..IqCube::zeros(&radar.with_pulses(0), t0)
    };
    cube.pulses = radar.pulses_per_cpi;
    let np = cube.pulses;

    if scenario.noise_enabled {
        let mut r = rng::stream(scenario.noise_seed, Stream::CubeNoise, &[rng::time_key(t0)]);
        for s in cube.samples.iter_mut() {
            *s = rng::complex_normal(&mut r);
        }
    }
    if let Some(c) = &scenario.clutter {
        let mut r = rng::stream(scenario.noise_seed, Stream::Clutter, &[rng::time_key(t0)]);
        let shape = ClutterShape::new(c, radar, np);
        shape.add_to_cube(cube, &mut r);
    }
    let mut warnings = Vec::new();
    for target in &scenario.targets {
        if let Some(echo) = target_echo(scenario, target, t0, np, &mut warnings)? {
            for (p, v) in echo.series.into_iter().enumerate() {
                *cube.get_mut(p, echo.bin) += v;
            }
        }
    }
    cube.warnings = warnings;
    Ok(())
}

/// Synthesize a long slow-time record of one range cell.
///
/// Noise and clutter streams depend on the seed and `t0` only, so the
/// same dwell placed in a different cell sees the same noise.
pub fn synth_cell_dwell(scenario: &Scenario, range_bin: usize, t0: f64, pulses: usize) -> Result<CellDwell> {
    let radar = &scenario.radar;
    if range_bin >= radar.range_bins {
        return Err(Error::OutOfBounds(format!("range bin {range_bin}")));
    }
    if pulses < 2 {
        return Err(Error::invalid("dwell needs at least 2 pulses"));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); pulses];
    if scenario.noise_enabled {
        let mut r = rng::stream(scenario.noise_seed, Stream::CellNoise, &[rng::time_key(t0)]);
        for s in samples.iter_mut() {
            *s = rng::complex_normal(&mut r);
        }
    }
    if let Some(c) = &scenario.clutter {
        let mut r = rng::stream(scenario.noise_seed, Stream::CellClutter, &[rng::time_key(t0)]);
        for (s, v) in samples
            .iter_mut()
            .zip(ClutterShape::new(c, radar, pulses).series(&mut r))
        {
            *s += v;
        }
    }
    let mut warnings = Vec::new();
    for target in &scenario.targets {
        if let Some(echo) = target_echo(scenario, target, t0, pulses, &mut warnings)? {
            if echo.bin == range_bin {
                for (s, v) in samples.iter_mut().zip(echo.series) {
                    *s += v;
                }
            }
        }
    }
    Ok(CellDwell {
        range_bin,
        samples,
        prf: radar.prf,
        t0,
    })
}
