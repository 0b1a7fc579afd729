//! Range-Doppler processing, short-time spectra and resolution formulas.
//!
//! All spectra are centred: index `n/2` holds zero Doppler. Power is
//! normalized by Σw², so unit-power white noise has unit mean power in
//! every bin whatever the window.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::echo_synth::IqCube;
use crate::scenario::RadarParams;
use crate::{Complex64, Error, Result, SPEED_OF_LIGHT};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Cached FFT plan for this thread.
pub fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Window coefficients. Hann excludes the zero end points.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * (i + 1) as f64 / (n + 1) as f64).cos())
                .collect(),
        }
    }
}

/// Centred index → unshifted FFT index.
#[inline]
fn unshift(i: usize, n: usize) -> usize {
    (i + n - n / 2) % n
}

/// Signed frequency bin of a centred index.
#[inline]
pub fn signed_bin(i: usize, n: usize) -> isize {
    i as isize - (n / 2) as isize
}

/// Centred index of a signed frequency bin, wrapping.
#[inline]
pub fn centred_index(signed: isize, n: usize) -> usize {
    (signed + (n / 2) as isize).rem_euclid(n as isize) as usize
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    *m
}

/// Median of an exponential variate is ln 2 times its mean.
pub fn median_to_mean(median: f64) -> f64 {
    median / std::f64::consts::LN_2
}

pub fn to_db(p: f64) -> f64 {
    10.0 * p.max(1e-300).log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub range_bins: usize,
    pub doppler_bins: usize,
    /// Linear power, range-major: `power[r * doppler_bins + d]`.
    pub power: Vec<f64>,
    pub doppler_bin_size: f64,
    pub range_bin_size: f64,
    pub noise_floor_estimate: f64,
    pub t0: f64,
    pub beam_azimuth: f64,
    pub wavelength: f64,
    pub window: Window,
}

impl RangeDopplerMap {
    #[inline]
    pub fn power_at(&self, r: usize, d: usize) -> f64 {
        self.power[r * self.doppler_bins + d]
    }

    pub fn magnitude_db(&self, r: usize, d: usize) -> f64 {
        to_db(self.power_at(r, d))
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.power[r * self.doppler_bins..(r + 1) * self.doppler_bins]
    }

    /// Doppler frequency of a centred column, Hz.
    pub fn doppler_hz(&self, d: usize) -> f64 {
        signed_bin(d, self.doppler_bins) as f64 * self.doppler_bin_size
    }

    pub fn zero_doppler_index(&self) -> usize {
        self.doppler_bins / 2
    }

    pub fn noise_floor_linear(&self) -> f64 {
        10f64.powf(self.noise_floor_estimate / 10.0)
    }

    /// Rebuild a map from linear power with a fresh noise-floor estimate.
    pub fn from_power(template: &RangeDopplerMap, power: Vec<f64>) -> Self {
        let mut scratch = power.clone();
        let floor = to_db(median_to_mean(median(&mut scratch)));
        Self {
            power,
            noise_floor_estimate: floor,
            ..template.clone()
        }
    }
}

/// Per range bin slow-time DFT.
pub fn range_doppler(cube: &IqCube, window: Window) -> RangeDopplerMap {
    DopplerWork::default().process(cube, window, Vec::new())
}

/// Scratch storage for repeated range-Doppler processing.
#[derive(Debug, Default, Clone)]
pub struct DopplerWork {
    buf: Vec<Complex64>,
    scratch: Vec<f64>,
}

impl DopplerWork {
    /// Process `cube` into a map whose power vector reuses `power`.
    pub fn process(&mut self, cube: &IqCube, window: Window, mut power: Vec<f64>) -> RangeDopplerMap {
        let (np, nb) = (cube.pulses, cube.range_bins);
        let w = window.coefficients(np);
        let sw2: f64 = w.iter().map(|v| v * v).sum();
        let buf = &mut self.buf;
        buf.resize(np * nb, Complex64::new(0.0, 0.0));
        // tiled transpose to range-major
        const TILE: usize = 16;
        for p0 in (0..np).step_by(TILE) {
            for b0 in (0..nb).step_by(TILE) {
                for p in p0..(p0 + TILE).min(np) {
                    let row = &cube.samples[p * nb..(p + 1) * nb];
                    for b in b0..(b0 + TILE).min(nb) {
                        buf[b * np + p] = row[b] * w[p];
                    }
                }
            }
        }
        fft_plan(np, false).process(buf);
        power.clear();
        power.resize(np * nb, 0.0);
        for b in 0..nb {
            let src = &buf[b * np..(b + 1) * np];
            let dst = &mut power[b * np..(b + 1) * np];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = src[unshift(i, np)].norm_sqr() / sw2;
            }
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(&power);
        let floor = to_db(median_to_mean(median(&mut self.scratch)));
        RangeDopplerMap {
            range_bins: nb,
            doppler_bins: np,
            power,
            doppler_bin_size: cube.prf / np as f64,
            range_bin_size: cube.range_bin_size,
            noise_floor_estimate: floor,
            t0: cube.t0,
            beam_azimuth: cube.beam_azimuth,
            wavelength: cube.wavelength,
            window,
        }
    }
}

/// Centred, Σw²-normalized power spectrum of one block.
pub fn power_spectrum(series: &[Complex64], window: Window, nfft: usize) -> Vec<f64> {
    let n = series.len();
    let w = window.coefficients(n);
    let sw2: f64 = w.iter().map(|v| v * v).sum();
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft.max(n)];
    for i in 0..n {
        buf[i] = series[i] * w[i];
    }
    let m = buf.len();
    fft_plan(m, false).process(&mut buf);
    (0..m).map(|i| buf[unshift(i, m)].norm_sqr() / sw2).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub frames: usize,
    pub frequency_bins: usize,
    /// Linear power, frame-major.
    pub power: Vec<f64>,
    pub frame_hop: f64,
    pub window_length: usize,
    pub hop: usize,
    pub range_bin: usize,
    pub prf: f64,
}

impl Spectrogram {
    pub fn frame(&self, f: usize) -> &[f64] {
        &self.power[f * self.frequency_bins..(f + 1) * self.frequency_bins]
    }

    pub fn magnitude_db(&self, f: usize, k: usize) -> f64 {
        to_db(self.power[f * self.frequency_bins + k])
    }

    pub fn bin_hz(&self) -> f64 {
        self.prf / self.frequency_bins as f64
    }

    pub fn frequency_hz(&self, k: usize) -> f64 {
        signed_bin(k, self.frequency_bins) as f64 * self.bin_hz()
    }
}

pub const SPECTROGRAM_ZERO_PAD: usize = 4;

/// Hann STFT with ×4 zero padding.
pub fn spectrogram(series: &[Complex64], prf: f64, window_length: usize, hop: usize) -> Result<Spectrogram> {
    spectrogram_with(series, prf, window_length, hop, SPECTROGRAM_ZERO_PAD, Window::Hann)
}

pub fn spectrogram_with(
    series: &[Complex64],
    prf: f64,
    window_length: usize,
    hop: usize,
    zero_pad: usize,
    window: Window,
) -> Result<Spectrogram> {
    if window_length == 0 || hop == 0 || zero_pad == 0 {
        return Err(Error::invalid("window, hop and zero padding must be >= 1"));
    }
    if series.len() < window_length {
        return Err(Error::invalid(format!(
            "series of {} samples is shorter than the {window_length}-sample window",
            series.len()
        )));
    }
    let frames = (series.len() - window_length) / hop + 1;
    let nfft = window_length * zero_pad;
    let w = window.coefficients(window_length);
    let sw2: f64 = w.iter().map(|v| v * v).sum();
    let plan = fft_plan(nfft, false);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft * frames];
    for f in 0..frames {
        let seg = &series[f * hop..f * hop + window_length];
        let dst = &mut buf[f * nfft..f * nfft + window_length];
        for i in 0..window_length {
            dst[i] = seg[i] * w[i];
        }
    }
    plan.process(&mut buf);
    let mut power = vec![0.0; nfft * frames];
    for f in 0..frames {
        for i in 0..nfft {
            power[f * nfft + i] = buf[f * nfft + unshift(i, nfft)].norm_sqr() / sw2;
        }
    }
    Ok(Spectrogram {
        frames,
        frequency_bins: nfft,
        power,
        frame_hop: hop as f64 / prf,
        window_length,
        hop,
        range_bin: 0,
        prf,
    })
}

/// Welch-averaged spectrum (Hann, 50% overlap).
#[derive(Debug, Clone, PartialEq)]
pub struct WelchSpectrum {
    pub power: Vec<f64>,
    pub bin_hz: f64,
    pub segments: usize,
    pub segment_len: usize,
}

impl WelchSpectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn frequency_hz(&self, k: usize) -> f64 {
        signed_bin(k, self.power.len()) as f64 * self.bin_hz
    }

    pub fn zero_index(&self) -> usize {
        self.power.len() / 2
    }
}

pub fn welch(series: &[Complex64], prf: f64, segment: usize) -> Result<WelchSpectrum> {
    if segment < 2 || series.len() < segment {
        return Err(Error::invalid("welch segment must fit the series"));
    }
    let hop = (segment / 2).max(1);
    let sg = spectrogram_with(series, prf, segment, hop, 1, Window::Hann)?;
    let mut power = vec![0.0; segment];
    for f in 0..sg.frames {
        for (p, v) in power.iter_mut().zip(sg.frame(f)) {
            *p += v;
        }
    }
    for p in power.iter_mut() {
        *p /= sg.frames as f64;
    }
    Ok(WelchSpectrum {
        power,
        bin_hz: prf / segment as f64,
        segments: sg.frames,
        segment_len: segment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolutions {
    pub range_resolution: f64,
    pub doppler_resolution: f64,
    pub velocity_resolution: f64,
}

pub fn resolutions(radar: &RadarParams) -> Resolutions {
    let range_resolution = SPEED_OF_LIGHT / (2.0 * radar.bandwidth);
    let doppler_resolution = radar.prf / radar.pulses_per_cpi as f64;
    Resolutions {
        range_resolution,
        doppler_resolution,
        velocity_resolution: doppler_resolution * radar.wavelength / 2.0,
    }
}

/// Doppler separation of two scatterers ΔR apart on a rotating body.
pub fn cross_range_separation(scatterer_distance: f64, rotation_rate: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength must be positive"));
    }
    Ok(2.0 * scatterer_distance * rotation_rate / wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone_cube(np: usize, nb: usize, bin: usize, f: f64, prf: f64, amp: f64) -> IqCube {
        let radar = RadarParams::new(1e10, prf, np, 12.5e6, nb);
        let mut c = IqCube::zeros(&radar, 0.0);
        for p in 0..np {
            *c.get_mut(p, bin) = Complex64::from_polar(amp, TAU * f * p as f64 / prf);
        }
        c
    }

    #[test]
    fn tone_maps_to_bin() {
        let c = tone_cube(64, 4, 2, 3.0 * 5000.0 / 64.0, 5000.0, 1.0);
        let m = range_doppler(&c, Window::Rectangular);
        let row = m.row(2);
        let best = (0..64).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert_eq!(signed_bin(best, 64), 3);
        assert!((m.doppler_hz(best) - 3.0 * m.doppler_bin_size).abs() < 1e-9);
    }

    #[test]
    fn parseval_rectangular() {
        let mut c = tone_cube(32, 3, 1, 417.0, 5000.0, 2.0);
        for (i, v) in c.samples.iter_mut().enumerate() {
            *v += Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let e_time: f64 = c.samples.iter().map(|v| v.norm_sqr()).sum();
        let e_freq: f64 = range_doppler(&c, Window::Rectangular).power.iter().sum();
        assert!(((e_time - e_freq) / e_time).abs() < 1e-6);
    }

    #[test]
    fn resolution_values() {
        let r = resolutions(&RadarParams::new(1e10, 5000.0, 100, 12.5e6, 16));
        assert_eq!(r.range_resolution, 12.0);
        assert!((r.doppler_resolution - 50.0).abs() < 1e-12);
        assert!((r.velocity_resolution - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cross_range_examples() {
        // 2 · 1 · 1 / 0.03
        assert!((cross_range_separation(1.0, 1.0, 0.03).unwrap() - 66.666_666_666_666_67).abs() < 1e-9);
        assert_eq!(cross_range_separation(1.0, 0.0, 0.03).unwrap(), 0.0);
        let a = cross_range_separation(0.5, 3.0, 0.03).unwrap();
        let b = cross_range_separation(0.5, 3.0, 0.015).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(cross_range_separation(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn spectrogram_frames() {
        let x: Vec<Complex64> = (0..100).map(|i| Complex64::from_polar(1.0, 0.3 * i as f64)).collect();
        let s = spectrogram(&x, 1000.0, 100, 10).unwrap();
        assert_eq!(s.frames, 1);
        let s = spectrogram(&x, 1000.0, 25, 12).unwrap();
        assert_eq!(s.frames, (100 - 25) / 12 + 1);
        assert!(spectrogram(&x, 1000.0, 101, 10).is_err());
    }

    #[test]
    fn stationary_tone_ridge() {
        let prf = 2000.0;
        let f0 = 250.0;
        let x: Vec<Complex64> = (0..400)
            .map(|i| Complex64::from_polar(1.0, TAU * f0 * i as f64 / prf))
            .collect();
        let s = spectrogram(&x, prf, 64, 32).unwrap();
        for f in 0..s.frames {
            let fr = s.frame(f);
            let k = (0..fr.len()).max_by(|&a, &b| fr[a].total_cmp(&fr[b])).unwrap();
            assert!((s.frequency_hz(k) - f0).abs() <= s.bin_hz());
        }
    }

    #[test]
    fn welch_noise_level_is_unity() {
        let mut r = crate::rng::stream(1, crate::rng::Stream::CellNoise, &[]);
        let x: Vec<Complex64> = (0..8192).map(|_| crate::rng::complex_normal(&mut r)).collect();
        let w = welch(&x, 1000.0, 256).unwrap();
        let mean: f64 = w.power.iter().sum::<f64>() / w.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }
}
