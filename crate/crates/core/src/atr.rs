//! Recognition signatures and the rule-based classifier.
//!
//! Features come from a long slow-time record of the detection cell: a
//! Welch spectrum for line structure (JEM comb, sidebands, body energy)
//! and a short-window spectrogram for slow amplitude modulation (wing
//! flapping).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::detector::Detection;
use crate::dsp::{self, RangeDopplerMap};
use crate::echo_synth::CellDwell;
use crate::scenario::{LinkBudget, RadarParams};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetCategory {
    MultiRotorDrone,
    FixedWingDrone,
    VtolHybridDrone,
    LargeBird,
    SmallBird,
    Vehicle,
    Ship,
    Helicopter,
    Pedestrian,
    Clutter,
    Unknown,
}

impl TargetCategory {
    pub const ALL: [TargetCategory; 11] = [
        TargetCategory::MultiRotorDrone,
        TargetCategory::FixedWingDrone,
        TargetCategory::VtolHybridDrone,
        TargetCategory::LargeBird,
        TargetCategory::SmallBird,
        TargetCategory::Vehicle,
        TargetCategory::Ship,
        TargetCategory::Helicopter,
        TargetCategory::Pedestrian,
        TargetCategory::Clutter,
        TargetCategory::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetCategory::MultiRotorDrone => "multi_rotor_drone",
            TargetCategory::FixedWingDrone => "fixed_wing_drone",
            TargetCategory::VtolHybridDrone => "vtol_hybrid_drone",
            TargetCategory::LargeBird => "large_bird",
            TargetCategory::SmallBird => "small_bird",
            TargetCategory::Vehicle => "vehicle",
            TargetCategory::Ship => "ship",
            TargetCategory::Helicopter => "helicopter",
            TargetCategory::Pedestrian => "pedestrian",
            TargetCategory::Clutter => "clutter",
            TargetCategory::Unknown => "unknown",
        }
    }

    pub fn is_drone(self) -> bool {
        matches!(
            self,
            TargetCategory::MultiRotorDrone | TargetCategory::FixedWingDrone | TargetCategory::VtolHybridDrone
        )
    }

    pub fn is_bird(self) -> bool {
        matches!(self, TargetCategory::LargeBird | TargetCategory::SmallBird)
    }
}

impl std::fmt::Display for TargetCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A category with its rule-agreement confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryDecision {
    pub category: TargetCategory,
    pub confidence: f64,
}

impl CategoryDecision {
    pub fn unknown() -> Self {
        Self {
            category: TargetCategory::Unknown,
            confidence: 0.0,
        }
    }
}

/// Classifier and feature-extraction thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// micro_body_ratio at or above which micro-Doppler is present.
    pub micro_ratio_min: f64,
    /// Minimum rotor rate for a blade signature, Hz.
    pub rotation_min_hz: f64,
    pub flap_min_hz: f64,
    pub flap_max_hz: f64,
    /// Peak-to-median ratio of the body-line modulation spectrum.
    pub flap_prominence_min: f64,
    pub helicopter_blade_length_m: f64,
    /// Coherent comb power over body power marking a steady puller.
    pub stable_line_min: f64,
    /// Non-comb micro energy over body power marking lifting rotors.
    pub diffuse_min: f64,
    pub appendage_line_min: f64,
    pub ship_rcs_min: f64,
    pub ship_speed_max: f64,
    pub vehicle_rcs_min: f64,
    pub vehicle_rcs_max: f64,
    pub clutter_speed_max: f64,
    pub drone_rcs_max: f64,
    pub drone_speed_max: f64,
    pub bird_rcs_max: f64,
    pub bird_speed_max: f64,
    pub pedestrian_speed_max: f64,
    /// Spectral lines must clear the noise floor by this much, dB.
    pub line_gate_db: f64,
    /// Half-width of the zero-Doppler clutter notch, Hz.
    pub clutter_notch_hz: f64,
    pub welch_segment: usize,
    pub comb_min_hz: f64,
    pub comb_max_hz: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            micro_ratio_min: 0.01,
            rotation_min_hz: 40.0,
            flap_min_hz: 0.5,
            flap_max_hz: 20.0,
            flap_prominence_min: 20.0,
            helicopter_blade_length_m: 1.0,
            stable_line_min: 0.15,
            diffuse_min: 0.8,
            appendage_line_min: 0.1,
            ship_rcs_min: 10.0,
            ship_speed_max: 15.0,
            vehicle_rcs_min: 1.0,
            vehicle_rcs_max: 10.0,
            clutter_speed_max: 0.5,
            drone_rcs_max: 2.0,
            drone_speed_max: 55.6,
            bird_rcs_max: 1.0,
            bird_speed_max: 30.0,
            pedestrian_speed_max: 3.0,
            line_gate_db: 6.0,
            clutter_notch_hz: 60.0,
            welch_segment: 512,
            comb_min_hz: 80.0,
            comb_max_hz: 1000.0,
        }
    }
}

impl ClassifierConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        if c.welch_segment < 8 {
            return Err(Error::validation("welch_segment must be >= 8"));
        }
        if !(c.comb_max_hz > c.comb_min_hz && c.comb_min_hz > 0.0) {
            return Err(Error::validation("comb range must satisfy 0 < min < max"));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FeatureVector {
    pub range: f64,
    pub body_speed: f64,
    pub rcs_estimate: f64,
    /// Strongest micro-Doppler sideband over the body line, both noise
    /// subtracted; zero when no sideband clears the line gate.
    pub micro_body_ratio: f64,
    /// Total micro-Doppler energy over body-line energy.
    pub micro_energy_ratio: f64,
    pub md_bandwidth: f64,
    pub jem_spacing: f64,
    pub jem_line_count: usize,
    /// Best comb spacing found in the sideband search, Hz.
    pub comb_spacing: f64,
    pub stable_line_ratio: f64,
    pub diffuse_ratio: f64,
    pub rotation_rate_estimate: f64,
    pub blade_count_estimate: usize,
    /// md_bandwidth inverted for blade length at broadside geometry.
    pub blade_length_estimate: f64,
    pub flap_rate_estimate: f64,
    pub flap_prominence: f64,
    /// Steady-line share of the flapping body power.
    pub appendage_line_ratio: f64,
    pub appendage_flag: bool,
}

impl FeatureVector {
    pub const CSV_HEADER: &'static str = "body_speed,rcs_estimate,micro_body_ratio,md_bandwidth,jem_spacing,jem_line_count,rotation_rate_estimate,blade_count_estimate,flap_rate_estimate,appendage_flag";

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            sig6(self.body_speed),
            sig6(self.rcs_estimate),
            sig6(self.micro_body_ratio),
            sig6(self.md_bandwidth),
            sig6(self.jem_spacing),
            self.jem_line_count.to_string(),
            sig6(self.rotation_rate_estimate),
            self.blade_count_estimate.to_string(),
            sig6(self.flap_rate_estimate),
            self.appendage_flag.to_string(),
        ]
    }
}

/// Six significant digits, the fixed precision of every text artifact.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { v.to_string() };
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=14).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticFeatures {
    pub mean_speed: f64,
    pub speed_variance: f64,
    pub heading_change_rate: f64,
    pub acceleration: f64,
    pub track_duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackPoint {
    pub t: f64,
    pub position: [f64; 2],
    pub speed: f64,
}

fn median_of(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Vertex offset of a parabola through three samples, in bins.
fn parabolic(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// Equally spaced spectral lines.
///
/// Peaks are local maxima more than 6 dB above the floor, where the floor
/// is the spectrum median but never lower than 40 dB under the strongest
/// bin. A spacing is reported when at least three peaks share one gap to
/// within a bin; otherwise the spacing is zero.
pub fn jem_line_spacing(spectrum: &[f64], bin_hz: f64) -> Result<(f64, usize)> {
    if spectrum.len() < 8 {
        return Err(Error::invalid("spectrum needs at least 8 bins"));
    }
    let peaks = line_peaks(spectrum, 6.0);
    Ok(spacing_of(&peaks, bin_hz))
}

fn line_peaks(spectrum: &[f64], gate_db: f64) -> Vec<f64> {
    let max = spectrum.iter().cloned().fold(0.0, f64::max);
    let floor = median_of(spectrum).max(max * 1e-4);
    let thr = floor * 10f64.powf(gate_db / 10.0);
    let n = spectrum.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        let (l, c, r) = (spectrum[(i + n - 1) % n], spectrum[i], spectrum[(i + 1) % n]);
        if c > thr && c >= l && c > r {
            let off = if c > 0.0 && l > 0.0 && r > 0.0 {
                parabolic(l.ln(), c.ln(), r.ln())
            } else {
                0.0
            };
            peaks.push(i as f64 + off);
        }
    }
    peaks
}

fn spacing_of(peaks: &[f64], bin_hz: f64) -> (f64, usize) {
    let count = peaks.len();
    if count < 3 {
        return (0.0, count);
    }
    let gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median_of(&gaps);
    let agreeing: Vec<f64> = gaps.iter().cloned().filter(|g| (g - med).abs() <= 1.0).collect();
    if agreeing.len() >= 2 {
        (median_of(&agreeing) * bin_hz, count)
    } else {
        (0.0, count)
    }
}

/// Largest Doppler excursion from `body_hz` of the spectrogram ridge, Hz.
///
/// The ridge is taken as the local spectral peaks of each frame standing
/// more than `gate_db` above `floor` (linear power); locating peaks rather
/// than the gated edge keeps the window main lobe out of the estimate.
pub fn ridge_excursion(sg: &dsp::Spectrogram, body_hz: f64, floor: f64, gate_db: f64) -> f64 {
    let level = floor * 10f64.powf(gate_db / 10.0);
    let n = sg.frequency_bins;
    let mut best = 0.0f64;
    for f in 0..sg.frames {
        let row = sg.frame(f);
        for k in 1..n.saturating_sub(1) {
            let p = row[k];
            if p > level && p >= row[k - 1] && p >= row[k + 1] {
                best = best.max((sg.frequency_hz(k) - body_hz).abs());
            }
        }
    }
    best
}

/// Blade length from the peak micro-Doppler excursion.
pub fn invert_blade_length(
    peak_excursion: f64,
    rotation_rate: f64,
    wavelength: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(rotation_rate > 0.0) {
        return Err(Error::invalid("rotation_rate must be > 0"));
    }
    let cc = alpha.cos() * beta.cos();
    if cc.abs() < 1e-9 {
        return Err(Error::Unobservable("cos(alpha)*cos(beta) is zero".into()));
    }
    Ok(peak_excursion * wavelength / (rotation_rate * cc))
}

fn wrap_pi(a: f64) -> f64 {
    let mut x = (a + PI).rem_euclid(TAU) - PI;
    if x <= -PI {
        x += TAU;
    }
    x
}

/// Speed, heading and acceleration statistics from finite differences.
pub fn kinetic_features(points: &[TrackPoint]) -> Result<KineticFeatures> {
    if points.len() < 3 {
        return Err(Error::InsufficientTrace(format!("{} points, need 3", points.len())));
    }
    for w in points.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::NonMonotone("trace times must increase".into()));
        }
    }
    let vel: Vec<[f64; 2]> = points
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            [
                (w[1].position[0] - w[0].position[0]) / dt,
                (w[1].position[1] - w[0].position[1]) / dt,
            ]
        })
        .collect();
    let speeds: Vec<f64> = vel.iter().map(|v| v[0].hypot(v[1])).collect();
    let n = speeds.len() as f64;
    let mean = speeds.iter().sum::<f64>() / n;
    let var = speeds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;

    let mut turn = 0.0;
    let mut accel = 0.0;
    for i in 0..vel.len() - 1 {
        let dt = 0.5 * (points[i + 2].t - points[i].t);
        let h0 = vel[i][0].atan2(vel[i][1]);
        let h1 = vel[i + 1][0].atan2(vel[i + 1][1]);
        if speeds[i] > 1e-9 && speeds[i + 1] > 1e-9 {
            turn += wrap_pi(h1 - h0).abs() / dt;
        }
        accel += (vel[i + 1][0] - vel[i][0]).hypot(vel[i + 1][1] - vel[i][1]) / dt;
    }
    let m = (vel.len() - 1) as f64;
    Ok(KineticFeatures {
        mean_speed: mean,
        speed_variance: var,
        heading_change_rate: turn / m,
        acceleration: accel / m,
        track_duration: points.last().unwrap().t - points[0].t,
    })
}

struct CombFit {
    spacing_bins: f64,
    on_minus_off: f64,
    teeth: usize,
}

/// Search for the comb of lines about the body line that best stands out
/// from the gaps between its teeth.
fn comb_search(q: &[f64], body: usize, min_bins: f64, max_bins: f64, excluded: &[bool]) -> Option<CombFit> {
    let n = q.len() as isize;
    let at = |x: f64| -> Option<f64> {
        let i = x.round() as isize;
        if i < 0 || i >= n || excluded[i as usize] {
            None
        } else {
            Some(q[i as usize])
        }
    };
    let mut fits: Vec<CombFit> = Vec::new();
    let step = 0.05;
    let mut s = min_bins;
    while s <= max_bins {
        let kmax = (n as f64 / s).ceil() as isize;
        let (mut on, mut n_on, mut off, mut n_off) = (0.0, 0usize, 0.0, 0usize);
        for k in -kmax..=kmax {
            if k == 0 {
                continue;
            }
            let x = body as f64 + k as f64 * s;
            if (x - body as f64).abs() > 1.5 {
                if let Some(v) = at(x) {
                    on += v;
                    n_on += 1;
                }
            }
            let xo = body as f64 + (k as f64 + 0.5) * s;
            if (xo - body as f64).abs() > 1.5 {
                if let Some(v) = at(xo) {
                    off += v;
                    n_off += 1;
                }
            }
        }
        if n_on >= 2 && n_off >= 1 {
            fits.push(CombFit {
                spacing_bins: s,
                on_minus_off: on / n_on as f64 - off / n_off as f64,
                teeth: n_on,
            });
        }
        s += step;
    }
    // a comb also fits at multiples of its spacing; keep the finest one
    // that scores close to the best
    let top = fits.iter().map(|f| f.on_minus_off).fold(f64::NEG_INFINITY, f64::max);
    let first = fits.iter().find(|f| f.on_minus_off >= 0.7 * top)?.spacing_bins;
    fits.into_iter()
        .filter(|f| f.spacing_bins <= 1.05 * first)
        .max_by(|a, b| a.on_minus_off.total_cmp(&b.on_minus_off))
}

/// Rate of broadband blade flashes, from the envelope of the record with
/// the body line removed.
fn flash_rate(samples: &[Complex64], prf: f64, body_hz: f64, lo_hz: f64, hi_hz: f64) -> Option<f64> {
    let n = samples.len();
    let step = Complex64::from_polar(1.0, -TAU * body_hz / prf);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut y: Vec<Complex64> = Vec::with_capacity(n);
    for s in samples {
        y.push(s * rot);
        rot *= step;
    }
    let mean = y.iter().sum::<Complex64>() / n as f64;
    let env: Vec<f64> = y.iter().map(|v| (v - mean).norm_sqr()).collect();
    let em = env.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = env.iter().map(|v| Complex64::new(v - em, 0.0)).collect();
    dsp::fft_plan(n, false).process(&mut buf);
    let df = prf / n as f64;
    let lo = (lo_hz / df).ceil() as usize;
    let hi = ((hi_hz / df).floor() as usize).min(n / 2);
    (lo.max(1)..=hi)
        .max_by(|&a, &b| buf[a].norm_sqr().total_cmp(&buf[b].norm_sqr()))
        .map(|k| k as f64 * df)
}

/// Dominant slow amplitude modulation of the body line.
///
/// Returns (frequency Hz, peak-to-median prominence).
fn flap_modulation(sg: &dsp::Spectrogram, body_hz: f64, half_span_hz: f64, lo: f64, hi: f64) -> (f64, f64) {
    if sg.frames < 8 {
        return (0.0, 0.0);
    }
    let bin = sg.bin_hz();
    let nb = sg.frequency_bins;
    let centre = dsp::centred_index((body_hz / bin).round() as isize, nb);
    let half = (half_span_hz / bin).ceil() as isize;
    let mut mag: Vec<f64> = (0..sg.frames)
        .map(|f| {
            let fr = sg.frame(f);
            (-half..=half)
                .map(|k| fr[(centre as isize + k).rem_euclid(nb as isize) as usize])
                .fold(0.0, f64::max)
                .sqrt()
        })
        .collect();
    let m = mag.iter().sum::<f64>() / mag.len() as f64;
    let w = dsp::Window::Hann.coefficients(mag.len());
    for (v, wi) in mag.iter_mut().zip(&w) {
        *v = (*v - m) * wi;
    }
    let dt = sg.frame_hop;
    let mut spec = Vec::new();
    let mut f = lo;
    while f <= hi + 1e-9 {
        let step = Complex64::from_polar(1.0, -TAU * f * dt);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &v in &mag {
            acc += rot * v;
            rot *= step;
        }
        spec.push((f, acc.norm_sqr()));
        f += 0.02;
    }
    let med = median_of(&spec.iter().map(|s| s.1).collect::<Vec<_>>());
    let (fpk, ppk) = spec
        .iter()
        .cloned()
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if med > 0.0 {
        (fpk, ppk / med)
    } else {
        (fpk, 0.0)
    }
}

/// Extract the recognition features of one detection.
///
/// `dwell` must be the slow-time record of the detection's range cell;
/// `map` supplies the receiver noise level.
pub fn extract_features(
    det: &Detection,
    dwell: &CellDwell,
    map: &RangeDopplerMap,
    radar: &RadarParams,
    budget: &LinkBudget,
    cfg: &ClassifierConfig,
) -> Result<FeatureVector> {
    if dwell.range_bin != det.range_bin {
        return Err(Error::invalid(format!(
            "dwell taken at range bin {} but detection is at {}",
            dwell.range_bin, det.range_bin
        )));
    }
    let n = dwell.samples.len();
    let seg = cfg.welch_segment.min(n);
    let w = dsp::welch(&dwell.samples, dwell.prf, seg)?;
    let nf = map.noise_floor_linear().max(1e-300);
    let nb = w.len();
    let bin_hz = w.bin_hz;
    let z = w.zero_index();
    let p = &w.power;
    let lam = radar.wavelength;

    // body line: strongest bin near the detected Doppler
    let det_hz = 2.0 * det.radial_speed / lam;
    let search = ((map.doppler_bin_size / bin_hz).ceil() as isize).max(1) + 1;
    let det_idx = dsp::centred_index((det_hz / bin_hz).round() as isize, nb) as isize;
    let b = (-search..=search)
        .map(|k| (det_idx + k).rem_euclid(nb as isize) as usize)
        .max_by(|&a, &c| p[a].total_cmp(&p[c]))
        .unwrap();
    let wrap = |i: isize| i.rem_euclid(nb as isize) as usize;
    let off = parabolic(
        p[wrap(b as isize - 1)].max(1e-300).ln(),
        p[b].max(1e-300).ln(),
        p[wrap(b as isize + 1)].max(1e-300).ln(),
    );
    let body_hz = (dsp::signed_bin(b, nb) as f64 + off) * bin_hz;
    let body_speed = body_hz * lam / 2.0;

    let q: Vec<f64> = p.iter().map(|v| (v - nf).max(0.0)).collect();
    let body_peak = q[b];
    let body_energy: f64 = (-1..=1).map(|k| q[wrap(b as isize + k)]).sum();

    // RCS from body energy (±2 bins holds the Hann main lobe of any tone)
    let tone_energy: f64 = (-2..=2).map(|k| q[wrap(b as isize + k)]).sum();
    let snr_pulse = tone_energy / seg as f64;
    let r_mid = det.range + 0.5 * map.range_bin_size;
    let rcs_estimate = snr_pulse * budget.loss_term() * r_mid.powi(4) / budget.gain_term(lam);

    let notch_bins = (cfg.clutter_notch_hz / bin_hz).ceil() as isize;
    let mut excluded = vec![false; nb];
    for k in -1..=1 {
        excluded[wrap(b as isize + k)] = true;
    }
    if (dsp::signed_bin(b, nb)).abs() > notch_bins {
        for k in -notch_bins..=notch_bins {
            excluded[wrap(z as isize + k)] = true;
        }
    }
    let gate = nf * 10f64.powf(cfg.line_gate_db / 10.0);
    let mut side_peak = 0.0f64;
    let mut micro_energy = 0.0;
    let mut md_bw = 0.0f64;
    for k in 0..nb {
        if excluded[k] {
            continue;
        }
        micro_energy += q[k];
        if p[k] > gate {
            side_peak = side_peak.max(q[k]);
            let f = dsp::signed_bin(k, nb) as f64 * bin_hz;
            md_bw = md_bw.max((f - body_hz).abs());
        }
    }
    let micro_body_ratio = if body_peak > 0.0 { side_peak / body_peak } else { 0.0 };
    let micro_energy_ratio = if body_energy > 0.0 {
        micro_energy / body_energy
    } else {
        0.0
    };

    // JEM lines
    let peaks = line_peaks(p, cfg.line_gate_db);
    let (jem_spacing, raw_count) = spacing_of(&peaks, bin_hz);
    let jem_line_count = if jem_spacing > 0.0 { raw_count } else { raw_count.min(1) };

    // comb signature
    let (mut comb_spacing, mut stable, mut diffuse) = (0.0, 0.0, 0.0);
    if side_peak > 0.0 && body_energy > 0.0 {
        let qm: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(i, &v)| if excluded[i] { 0.0 } else { v })
            .collect();
        let lo = cfg.comb_min_hz / bin_hz;
        let hi = (cfg.comb_max_hz / bin_hz).min(nb as f64 / 3.0);
        if let Some(fit) = comb_search(&qm, b, lo, hi, &excluded) {
            comb_spacing = fit.spacing_bins * bin_hz;
            stable = (fit.on_minus_off * fit.teeth as f64 / body_energy).max(0.0);
            diffuse = (micro_energy_ratio - stable).max(0.0);
        }
    }

    let line_rate = if jem_spacing > 0.0 { jem_spacing } else { comb_spacing };
    let blade_count_estimate = if line_rate > 0.0 {
        match flash_rate(&dwell.samples, dwell.prf, body_hz, 0.5 * line_rate, 2.5 * line_rate) {
            Some(fr) if (fr / line_rate - 2.0).abs() < 0.25 => 3,
            _ => 2,
        }
    } else {
        0
    };
    let rotation_rate_estimate = if blade_count_estimate > 0 {
        line_rate / blade_count_estimate as f64
    } else {
        0.0
    };
    let blade_length_estimate = if rotation_rate_estimate > 0.0 {
        md_bw * lam / (TAU * rotation_rate_estimate)
    } else {
        0.0
    };

    // flapping
    let win = (radar.pulses_per_cpi / 4).max(8).min(n);
    let sg = dsp::spectrogram(&dwell.samples, dwell.prf, win, (win / 2).max(1))?;
    let flap_span = 2.0 * crate::echo_synth::FLAP_SPEED_EXCURSION / lam + 2.0 * sg.bin_hz();
    let (flap_f, prominence) = flap_modulation(&sg, body_hz, flap_span, cfg.flap_min_hz, cfg.flap_max_hz);
    let flap_rate_estimate = if prominence >= cfg.flap_prominence_min {
        flap_f
    } else {
        0.0
    };

    // appendage: a steady line at the carrier of the flapping body, taken
    // as the midpoint of the spread spectrum, as a share of the body-region
    // power over the whole dwell
    let span = ((2.0 * crate::echo_synth::FLAP_SPEED_EXCURSION / lam) / bin_hz).ceil() as isize + 2;
    let lit: Vec<isize> = (-2 * span..=2 * span)
        .filter(|&k| p[wrap(b as isize + k)] > gate)
        .collect();
    let centre = match (lit.first(), lit.last()) {
        (Some(&lo), Some(&hi)) => b as isize + (lo + hi) / 2,
        _ => b as isize,
    };
    let centre_hz = dsp::signed_bin(wrap(centre), nb) as f64 * bin_hz;
    let full: Vec<f64> = dsp::power_spectrum(&dwell.samples, dsp::Window::Hann, n)
        .into_iter()
        .map(|v| (v - nf).max(0.0))
        .collect();
    let fb = dwell.prf / n as f64;
    let fwrap = |i: isize| i.rem_euclid(n as isize) as usize;
    let fc = dsp::centred_index((centre_hz / fb).round() as isize, n) as isize;
    let fhalf = (span as f64 * bin_hz / fb).ceil() as isize;
    let total: f64 = (-fhalf..=fhalf).map(|k| full[fwrap(fc + k)]).sum();
    let reach = (bin_hz / fb).ceil() as isize;
    let line = (-reach..=reach)
        .map(|j| (-1..=1).map(|k| full[fwrap(fc + j + k)]).sum::<f64>())
        .fold(0.0, f64::max);
    let appendage_line_ratio = if total > 0.0 { line / total } else { 0.0 };
    let appendage_flag = flap_rate_estimate > 0.0 && appendage_line_ratio >= cfg.appendage_line_min;

    Ok(FeatureVector {
        range: det.range,
        body_speed,
        rcs_estimate,
        micro_body_ratio,
        micro_energy_ratio,
        md_bandwidth: md_bw,
        jem_spacing,
        jem_line_count,
        comb_spacing,
        stable_line_ratio: stable,
        diffuse_ratio: diffuse,
        rotation_rate_estimate,
        blade_count_estimate,
        blade_length_estimate,
        flap_rate_estimate,
        flap_prominence: prominence,
        appendage_line_ratio,
        appendage_flag,
    })
}

fn decide(category: TargetCategory, required: usize, supporting: &[bool]) -> CategoryDecision {
    let agree = required + supporting.iter().filter(|&&b| b).count();
    CategoryDecision {
        category,
        confidence: agree as f64 / (required + supporting.len()) as f64,
    }
}

/// Rule-tree classification with the default thresholds.
pub fn classify(f: &FeatureVector, k: Option<&KineticFeatures>) -> CategoryDecision {
    classify_with(f, k, &ClassifierConfig::default())
}

pub fn classify_with(f: &FeatureVector, k: Option<&KineticFeatures>, c: &ClassifierConfig) -> CategoryDecision {
    use TargetCategory as T;
    let speed = k.map_or(f.body_speed.abs(), |k| k.mean_speed.max(f.body_speed.abs()));
    let micro = f.micro_body_ratio >= c.micro_ratio_min;
    let lines = f.jem_line_count >= 2 || f.stable_line_ratio + f.diffuse_ratio > 0.0;
    let flap = f.flap_rate_estimate >= c.flap_min_hz && f.flap_rate_estimate <= c.flap_max_hz;
    // wing-beat sidebands can pass for blade lines
    let blades = micro && lines && f.rotation_rate_estimate >= c.rotation_min_hz && !flap;
    let small = f.rcs_estimate > 0.0 && f.rcs_estimate <= c.drone_rcs_max;

    if micro && f.jem_line_count >= 2 && f.blade_length_estimate > c.helicopter_blade_length_m {
        return decide(T::Helicopter, 3, &[f.rcs_estimate > c.drone_rcs_max]);
    }
    if blades {
        let lifting = f.diffuse_ratio >= c.diffuse_min;
        let puller = f.stable_line_ratio >= c.stable_line_min;
        let support = [small, speed <= c.drone_speed_max];
        return match (lifting, puller) {
            (true, true) => decide(T::VtolHybridDrone, 4, &support),
            (false, true) => decide(T::FixedWingDrone, 4, &support),
            (true, false) => decide(T::MultiRotorDrone, 4, &support),
            // blade lines but no clear sub-class signature
            (false, false) => decide(T::MultiRotorDrone, 2, &[support[0], support[1], false, false]),
        };
    }
    if flap && !blades {
        let support = [f.rcs_estimate <= c.bird_rcs_max, speed <= c.bird_speed_max];
        return if f.appendage_flag {
            decide(T::LargeBird, 3, &support)
        } else {
            decide(T::SmallBird, 2, &support)
        };
    }
    if !micro && !flap {
        if f.rcs_estimate > c.ship_rcs_min && speed < c.ship_speed_max && speed >= c.clutter_speed_max {
            return decide(T::Ship, 4, &[]);
        }
        if speed < c.clutter_speed_max && f.rcs_estimate > 0.0 {
            return decide(T::Clutter, 2, &[]);
        }
        if f.rcs_estimate >= c.vehicle_rcs_min && f.rcs_estimate < c.vehicle_rcs_max {
            return decide(T::Vehicle, 3, &[speed <= 40.0]);
        }
    }
    if micro && !flap && !blades && speed >= c.clutter_speed_max && speed <= c.pedestrian_speed_max {
        return decide(T::Pedestrian, 3, &[f.rcs_estimate <= c.vehicle_rcs_min]);
    }
    CategoryDecision::unknown()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(std::f64::consts::PI), "3.14159");
        assert_eq!(sig6(6000.0), "6000");
        assert_eq!(sig6(116.7639), "116.764");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(1.5e-9), "1.50000e-9");
    }

    #[test]
    fn jem_cases() {
        let mut s = vec![1.0; 256];
        s[100] = 1e3;
        assert_eq!(jem_line_spacing(&s, 10.0).unwrap(), (0.0, 1));
        for k in 0..6 {
            s[40 + 32 * k] = 500.0;
        }
        let (sp, n) = jem_line_spacing(&s, 10.0).unwrap();
        assert!((sp - 320.0).abs() <= 10.0, "{sp}");
        assert!(n >= 6);
        let scaled: Vec<f64> = s.iter().map(|v| v * 37.0).collect();
        assert_eq!(jem_line_spacing(&scaled, 10.0).unwrap(), (sp, n));
        assert!(jem_line_spacing(&s[..7], 1.0).is_err());
    }

    #[test]
    fn blade_length_inversion() {
        let l = invert_blade_length(2_010.619_298_297_467_6, TAU * 80.0, 0.03, 0.0, 0.0).unwrap();
        assert!((l - 0.12).abs() < 1e-12);
        let l2 = invert_blade_length(2.0 * 2_010.619_298_297_467_6, TAU * 80.0, 0.03, 0.0, 0.0).unwrap();
        assert!((l2 / l - 2.0).abs() < 1e-12);
        assert!(matches!(
            invert_blade_length(100.0, 10.0, 0.03, 0.0, std::f64::consts::FRAC_PI_2),
            Err(Error::Unobservable(_))
        ));
    }

    fn pt(t: f64, x: f64, y: f64) -> TrackPoint {
        TrackPoint {
            t,
            position: [x, y],
            speed: 0.0,
        }
    }

    #[test]
    fn kinetics_constant_velocity() {
        let pts: Vec<_> = (0..6)
            .map(|i| pt(i as f64 * 0.5, 3.0 * i as f64, 4.0 * i as f64))
            .collect();
        let k = kinetic_features(&pts).unwrap();
        assert!((k.mean_speed - 10.0).abs() < 1e-12);
        assert!(k.speed_variance.abs() < 1e-20);
        assert!(k.heading_change_rate.abs() < 1e-12);
        assert!(k.acceleration.abs() < 1e-12);
        assert!((k.track_duration - 2.5).abs() < 1e-12);
        assert!(matches!(kinetic_features(&pts[..2]), Err(Error::InsufficientTrace(_))));
    }

    #[test]
    fn zero_features_are_unknown() {
        let d = classify(&FeatureVector::default(), None);
        assert_eq!(d, CategoryDecision::unknown());
    }

    #[test]
    fn config_json_defaults() {
        let c = ClassifierConfig::from_json("{\"rotation_min_hz\": 50}").unwrap();
        assert_eq!(c.rotation_min_hz, 50.0);
        assert_eq!(c.flap_max_hz, 20.0);
        assert!(ClassifierConfig::from_json("{\"bogus\": 1}").is_err());
    }
}
