//! Target detection on range-Doppler maps: CA-CFAR, fixed SNR thresholds
//! and the Doppler-domain signal-to-clutter (DSCR) detector.

use serde::{Deserialize, Serialize};

use crate::dsp::{signed_bin, to_db, RangeDopplerMap};
use crate::{Error, Result};

/// Fixed threshold giving Pd just above one half for a steady target.
pub const SNR_THRESHOLD_PD50: f64 = 13.1;
/// Fixed threshold associated with Pd ≈ 0.95.
pub const SNR_THRESHOLD_PD95: f64 = 16.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Snr,
    Dscr,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Snr => "snr",
            DetectorKind::Dscr => "dscr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub range_bin: usize,
    /// Centred Doppler column (zero Doppler at `doppler_bins / 2`).
    pub doppler_bin: usize,
    pub range: f64,
    pub radial_speed: f64,
    pub snr: f64,
    pub dscr: Option<f64>,
    pub t0: f64,
    pub beam_azimuth: f64,
    pub detector: DetectorKind,
}

fn make_detection(map: &RangeDopplerMap, r: usize, d: usize, kind: DetectorKind, dscr: Option<f64>) -> Detection {
    Detection {
        range_bin: r,
        doppler_bin: d,
        range: r as f64 * map.range_bin_size,
        radial_speed: map.doppler_hz(d) * map.wavelength / 2.0,
        snr: map.magnitude_db(r, d) - map.noise_floor_estimate,
        dscr,
        t0: map.t0,
        beam_azimuth: map.beam_azimuth,
        detector: kind,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarParams {
    pub pfa: f64,
    /// Guard cells on each side of the cell under test.
    pub guard: usize,
    /// Total number of training cells.
    pub train: usize,
    /// Half-width of the zero-Doppler notch; `None` keeps every column.
    pub notch: Option<usize>,
    /// Reduce detections to 8-neighbour local maxima.
    pub merge: bool,
}

impl CfarParams {
    pub fn new(pfa: f64, guard: usize, train: usize) -> Self {
        Self {
            pfa,
            guard,
            train,
            notch: None,
            merge: true,
        }
    }

    /// Threshold multiplier on the mean training power.
    pub fn alpha(&self) -> f64 {
        let n = self.train as f64;
        n * (self.pfa.powf(-1.0 / n) - 1.0)
    }
}

fn in_notch(map: &RangeDopplerMap, d: usize, notch: Option<usize>) -> bool {
    match notch {
        Some(w) => signed_bin(d, map.doppler_bins).unsigned_abs() <= w,
        None => false,
    }
}

/// Raw CA-CFAR decisions for every cell (no merging).
///
/// Training cells run along range at fixed Doppler. Near the map edges the
/// training window slides inward so it always holds `train` cells.
pub fn cfar_mask(map: &RangeDopplerMap, p: &CfarParams) -> Result<Vec<bool>> {
    if !(p.pfa > 0.0 && p.pfa < 1.0) {
        return Err(Error::invalid("pfa must be in (0, 1)"));
    }
    if p.train < 4 {
        return Err(Error::invalid("train must be >= 4"));
    }
    let (nr, nd) = (map.range_bins, map.doppler_bins);
    if nr < p.train + 2 * p.guard + 1 {
        return Err(Error::invalid(format!(
            "map with {nr} range bins is smaller than the CFAR window"
        )));
    }
    let alpha = p.alpha();
    let g = p.guard as isize;
    let half_l = (p.train / 2) as isize;
    let half_r = (p.train - p.train / 2) as isize;
    let nri = nr as isize;
    let mut mask = vec![false; nr * nd];
    let mut prefix = vec![0.0; nr + 1];
    for d in 0..nd {
        if in_notch(map, d, p.notch) {
            continue;
        }
        for r in 0..nr {
            prefix[r + 1] = prefix[r] + map.power[r * nd + d];
        }
        let sum = |a: isize, b: isize| prefix[b as usize] - prefix[a as usize];
        for r in 0..nri {
            let mut l = half_l;
            let mut rr = half_r;
            let left_room = r - g;
            let right_room = nri - 1 - (r + g);
            if left_room < l {
                rr += l - left_room.max(0);
                l = left_room.max(0);
            }
            if right_room < rr {
                l += rr - right_room.max(0);
                rr = right_room.max(0);
            }
            let mut total = 0.0;
            if l > 0 {
                total += sum(r - g - l, r - g);
            }
            if rr > 0 {
                total += sum(r + g + 1, r + g + 1 + rr);
            }
            let mean = total / (l + rr) as f64;
            let idx = r as usize * nd + d;
            mask[idx] = map.power[idx] > alpha * mean;
        }
    }
    Ok(mask)
}

/// Keep cells of `mask` that are 8-neighbour local maxima of the map
/// power. Doppler wraps; range does not. Ties go to the lower index.
fn local_maxima(map: &RangeDopplerMap, mask: &[bool]) -> Vec<(usize, usize)> {
    let (nr, nd) = (map.range_bins, map.doppler_bins);
    let mut out = Vec::new();
    for r in 0..nr {
        for d in 0..nd {
            let idx = r * nd + d;
            if !mask[idx] {
                continue;
            }
            let v = map.power[idx];
            let mut is_max = true;
            'n: for dr in -1isize..=1 {
                let rr = r as isize + dr;
                if rr < 0 || rr >= nr as isize {
                    continue;
                }
                for dd in -1isize..=1 {
                    if dr == 0 && dd == 0 {
                        continue;
                    }
                    let ddi = (d as isize + dd).rem_euclid(nd as isize) as usize;
                    let j = rr as usize * nd + ddi;
                    if j == idx {
                        continue;
                    }
                    let w = map.power[j];
                    if w > v || (w == v && j < idx) {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                out.push((r, d));
            }
        }
    }
    out
}

fn cells(mask: &[bool], nd: usize) -> Vec<(usize, usize)> {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| (i / nd, i % nd))
        .collect()
}

/// CA-CFAR with merging to local maxima and no clutter notch.
pub fn cfar_detect(map: &RangeDopplerMap, pfa: f64, guard: usize, train: usize) -> Result<Vec<Detection>> {
    cfar_detect_with(map, &CfarParams::new(pfa, guard, train))
}

pub fn cfar_detect_with(map: &RangeDopplerMap, p: &CfarParams) -> Result<Vec<Detection>> {
    let mask = cfar_mask(map, p)?;
    let hits = if p.merge {
        local_maxima(map, &mask)
    } else {
        cells(&mask, map.doppler_bins)
    };
    Ok(hits
        .into_iter()
        .map(|(r, d)| make_detection(map, r, d, DetectorKind::Snr, None))
        .collect())
}

/// Fixed-threshold detection: measured SNR against the map noise floor.
pub fn threshold_detect(map: &RangeDopplerMap, threshold_db: f64, notch: Option<usize>) -> Vec<Detection> {
    let limit = map.noise_floor_linear() * 10f64.powf(threshold_db / 10.0);
    let nd = map.doppler_bins;
    let mask: Vec<bool> = map
        .power
        .iter()
        .enumerate()
        .map(|(i, &p)| p >= limit && !in_notch(map, i % nd, notch))
        .collect();
    local_maxima(map, &mask)
        .into_iter()
        .map(|(r, d)| make_detection(map, r, d, DetectorKind::Snr, None))
        .collect()
}

/// Doppler-domain signal-to-clutter detector.
///
/// For each range bin the clutter reference is the mean power inside
/// ±`notch_width` bins of zero Doppler, floored at the map noise level.
/// Cells outside the notch exceeding that reference by `threshold` dB are
/// detected; the margin is reported as `dscr`.
pub fn dscr_detect(map: &RangeDopplerMap, notch_width: usize, threshold: f64) -> Result<Vec<Detection>> {
    if notch_width < 1 {
        return Err(Error::invalid("notch_width must be >= 1"));
    }
    let nd = map.doppler_bins;
    if 2 * notch_width + 1 >= nd {
        return Err(Error::invalid("notch covers the whole Doppler axis"));
    }
    let z = map.zero_doppler_index();
    let floor = map.noise_floor_linear();
    let gain = 10f64.powf(threshold / 10.0);
    let mut mask = vec![false; map.power.len()];
    let mut reference = vec![0.0; map.range_bins];
    for r in 0..map.range_bins {
        let row = map.row(r);
        let mut s = 0.0;
        for k in -(notch_width as isize)..=notch_width as isize {
            s += row[(z as isize + k).rem_euclid(nd as isize) as usize];
        }
        let clutter = (s / (2 * notch_width + 1) as f64).max(floor);
        reference[r] = clutter;
        for d in 0..nd {
            if in_notch(map, d, Some(notch_width)) {
                continue;
            }
            mask[r * nd + d] = row[d] > clutter * gain;
        }
    }
    Ok(local_maxima(map, &mask)
        .into_iter()
        .map(|(r, d)| {
            let margin = to_db(map.power_at(r, d)) - to_db(reference[r]);
            make_detection(map, r, d, DetectorKind::Dscr, Some(margin))
        })
        .collect())
}

/// Cell power over the map noise floor, dB.
pub fn measure_snr(map: &RangeDopplerMap, range_bin: usize, doppler_bin: usize) -> Result<f64> {
    if range_bin >= map.range_bins || doppler_bin >= map.doppler_bins {
        return Err(Error::OutOfBounds(format!(
            "cell ({range_bin}, {doppler_bin}) outside {}x{} map",
            map.range_bins, map.doppler_bins
        )));
    }
    Ok(map.magnitude_db(range_bin, doppler_bin) - map.noise_floor_estimate)
}
