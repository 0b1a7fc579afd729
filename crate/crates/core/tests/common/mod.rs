//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dronerad::atr::TargetCategory;
use dronerad::scenario::{LinkBudget, RadarParams, Scenario, TargetModel, Waypoint};
use dronerad::tradestudy::detection_range;

/// Spherical Bessel j_n(x), n = 0..=nmax, by downward recurrence normalised
/// to j_0 = sin x / x.
pub fn spherical_j(nmax: usize, x: f64) -> Vec<f64> {
    let start = nmax + 20 + x as usize;
    let mut j = vec![0.0; start + 2];
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    for n in (1..=start).rev() {
        j[n - 1] = (2 * n + 1) as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(n - 1) {
                *v *= 1e-250;
            }
        }
    }
    let scale = (x.sin() / x) / j[0];
    j.truncate(nmax + 1);
    j.iter().map(|v| v * scale).collect()
}

/// Spherical Bessel y_n(x) by upward recurrence.
pub fn spherical_y(nmax: usize, x: f64) -> Vec<f64> {
    let mut y = vec![0.0; nmax + 1];
    y[0] = -x.cos() / x;
    if nmax >= 1 {
        y[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for n in 1..nmax {
        y[n + 1] = (2 * n + 1) as f64 / x * y[n] - y[n - 1];
    }
    y
}

/// Monostatic RCS of a perfectly conducting sphere over πa², exact Mie series.
pub fn mie_pec(ka: f64) -> f64 {
    let nmax = (ka + 4.0 * ka.cbrt() + 2.0).ceil() as usize + 2;
    let j = spherical_j(nmax, ka);
    let y = spherical_y(nmax, ka);
    let (mut re, mut im) = (0.0, 0.0);
    for n in 1..nmax {
        let nf = n as f64;
        // h = j + i y ; a_n = j/h ; b_n = (x j)' / (x h)'
        let (hr, hi) = (j[n], y[n]);
        let dj = ka * j[n - 1] - nf * j[n];
        let (dhr, dhi) = (dj, ka * y[n - 1] - nf * y[n]);
        let den_a = hr * hr + hi * hi;
        let (ar, ai) = (j[n] * hr / den_a, -j[n] * hi / den_a);
        let den_b = dhr * dhr + dhi * dhi;
        let (br, bi) = (dj * dhr / den_b, -dj * dhi / den_b);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * (2.0 * nf + 1.0);
        re += w * (ar - br);
        im += w * (ai - bi);
    }
    (re * re + im * im) / (ka * ka)
}

/// Probability that a unit-power complex Gaussian plus a tone of power
/// `snr` exceeds `threshold` (both linear), by numerical integration of
/// the Rice density.
pub fn rice_pd(snr: f64, threshold: f64) -> f64 {
    // power z = |s+n|^2, density exp(-(z+s)) I0(2 sqrt(z s))
    let top = threshold.max(snr) * 4.0 + 60.0;
    let steps = 200_000;
    let dz = (top - threshold) / steps as f64;
    let mut acc = 0.0;
    for i in 0..steps {
        let z = threshold + (i as f64 + 0.5) * dz;
        acc += (-(z + snr) + log_i0(2.0 * (z * snr).sqrt())).exp() * dz;
    }
    acc
}

/// ln I0(x) from the power series or the asymptotic expansion.
fn log_i0(x: f64) -> f64 {
    if x < 30.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = x * x / 4.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum.ln()
    } else {
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x)).ln()
    }
}

/// Point target `range` metres north of the radar, closing at `speed`,
/// with the RCS that gives a single-pulse SNR of `snr_db`.
pub fn point_target(
    id: &str,
    radar: &RadarParams,
    budget: &LinkBudget,
    range: f64,
    snr_db: f64,
    speed: f64,
) -> TargetModel {
    let rcs = rcs_for(radar, budget, range, snr_db);
    let mut t = TargetModel::point(id, TargetCategory::Unknown, rcs, [0.0; 3]);
    t.waypoints = vec![
        Waypoint {
            t: 0.0,
            position: [radar.position[0], radar.position[1] + range, radar.position[2]],
        },
        Waypoint {
            t: 1000.0,
            position: [
                radar.position[0],
                radar.position[1] + range - 1000.0 * speed,
                radar.position[2],
            ],
        },
    ];
    t
}

/// RCS giving `snr_db` at `range`, from R ∝ σ^¼.
pub fn rcs_for(radar: &RadarParams, budget: &LinkBudget, range: f64, snr_db: f64) -> f64 {
    let r1 = detection_range(budget, radar.wavelength, 1.0, snr_db).unwrap();
    (range / r1).powi(4)
}

/// Radial speed whose Doppler falls exactly on signed bin `k`.
pub fn on_bin_speed(radar: &RadarParams, k: i64) -> f64 {
    k as f64 * radar.doppler_bin_size() * radar.wavelength / 2.0
}

pub fn bare_scenario(radar: RadarParams) -> Scenario {
    Scenario::new(radar, LinkBudget::default())
}
