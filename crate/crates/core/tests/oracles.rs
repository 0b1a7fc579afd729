//! Oracle self-checks and library-versus-oracle comparisons.

mod common;

use common::{mie_pec, rice_pd};
use dronerad::dsp::{power_spectrum, Window};
use dronerad::echo_synth::blade_scatterer_phases;
use dronerad::scattering::normalized_rcs;
use dronerad::scenario::{BladeSet, RotorPlane};
use dronerad::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn mie_rayleigh_limit() {
    for ka in [0.01, 0.03, 0.05] {
        let ray = 9.0 * f64::powi(ka, 4);
        assert!(
            (mie_pec(ka) / ray - 1.0).abs() < 0.02,
            "ka {ka}: {} vs {ray}",
            mie_pec(ka)
        );
    }
}

#[test]
fn mie_first_peak() {
    let (mut best, mut at) = (0.0, 0.0);
    for i in 0..400 {
        let ka = 0.5 + i as f64 * 0.005;
        let v = mie_pec(ka);
        if v > best {
            best = v;
            at = ka;
        }
    }
    // classic PEC sphere: peak of about 3.65 just above ka = 1
    assert!((best - 3.65).abs() < 0.05, "{best}");
    assert!((at - 1.0).abs() < 0.1, "{at}");
}

#[test]
fn mie_optical_limit() {
    for ka in [30.0, 60.0, 100.0] {
        assert!((mie_pec(ka) - 1.0).abs() < 0.1, "ka {ka}: {}", mie_pec(ka));
    }
}

#[test]
fn surrogate_tracks_mie_in_optical_region() {
    for i in 0..=80 {
        let ka = 20.0 + i as f64;
        let m = mie_pec(ka);
        assert!((normalized_rcs(ka) - m).abs() / m <= 0.2, "ka {ka}");
    }
}

#[test]
fn surrogate_peak_near_mie_peak() {
    let peak = |f: &dyn Fn(f64) -> f64| {
        (0..400)
            .map(|i| 0.5 + i as f64 * 0.005)
            .max_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    };
    let a = peak(&normalized_rcs);
    let b = peak(&mie_pec);
    assert!((a - b).abs() < 0.25, "{a} vs {b}");
}

#[test]
fn rice_oracle_matches_monte_carlo() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let (snr, thr) = (20.0, 25.0);
    let s = snr_f64(snr);
    let trials = 200_000;
    let mut hits = 0;
    for _ in 0..trials {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let z = Complex64::new(
            s + re * std::f64::consts::FRAC_1_SQRT_2,
            im * std::f64::consts::FRAC_1_SQRT_2,
        );
        if z.norm_sqr() > thr {
            hits += 1;
        }
    }
    let mc = hits as f64 / trials as f64;
    assert!((mc - rice_pd(snr, thr)).abs() < 0.005, "{mc} vs {}", rice_pd(snr, thr));
}

fn snr_f64(p: f64) -> f64 {
    p.sqrt()
}

/// Plain O(n²) DFT, centred like the library spectra.
fn naive_power(x: &[Complex64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let k = i as f64 - (n / 2) as f64;
            let s: Complex64 = x
                .iter()
                .enumerate()
                .map(|(m, v)| v * Complex64::from_polar(1.0, -std::f64::consts::TAU * k * m as f64 / n as f64))
                .sum();
            s.norm_sqr() / n as f64
        })
        .collect()
}

#[test]
fn naive_dft_agrees_with_fft() {
    let x: Vec<Complex64> = (0..64)
        .map(|i| Complex64::new((i as f64 * 0.3).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let a = naive_power(&x);
    let b = power_spectrum(&x, Window::Rectangular, 64);
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-9 * (1.0 + u.abs()));
    }
}

/// Blade lines fall at multiples of N·f_rot: checked with the naive DFT on
/// the raw scatterer phases, independent of the synthesis path.
#[test]
fn blade_lines_at_n_times_rotation() {
    let prf = 10_240.0;
    let n = 1024;
    let bin = prf / n as f64;
    for blades in [2usize, 3, 4] {
        let b = BladeSet::new(blades, 0.12, 80.0, RotorPlane::Lifting);
        let x: Vec<Complex64> = (0..n)
            .map(|m| {
                blade_scatterer_phases(&b, 0.0, 0.0, 0.03, m as f64 / prf)
                    .into_iter()
                    .map(|(ph, a)| Complex64::from_polar(a, ph))
                    .sum()
            })
            .collect();
        let p = naive_power(&x);
        let total: f64 = p.iter().sum();
        // energy at non-multiples of N·80 Hz is negligible
        let spacing = blades as f64 * 80.0;
        let off: f64 = p
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let f = (*i as f64 - (n / 2) as f64) * bin;
                let r = f / spacing;
                (r - r.round()).abs() * spacing > 2.0 * bin
            })
            .map(|(_, v)| v)
            .sum();
        assert!(off / total < 1e-3, "{blades} blades: {}", off / total);
    }
}
