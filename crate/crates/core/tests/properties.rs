//! Property-based invariants.

mod common;

use proptest::prelude::*;

use dronerad::atr::{classify, FeatureVector, TargetCategory};
use dronerad::detector::{cfar_mask, CfarParams};
use dronerad::dsp::{centred_index, range_doppler, signed_bin, RangeDopplerMap, Window};
use dronerad::echo_synth::{single_pulse_snr, IqCube};
use dronerad::scenario::{
    load_scenario, los_geometry, state_from, BladeSet, ClutterParams, LinkBudget, RadarParams, RotorPlane, Scenario,
    TargetModel, Waypoint,
};
use dronerad::tracker::{associate, CwsConfig, CwsPipeline};
use dronerad::tradestudy::{adapt_state, detection_range, scale_range};
use dronerad::Complex64;

fn cube_from(values: &[(f64, f64)], pulses: usize, bins: usize) -> IqCube {
    let radar = RadarParams::new(1e10, 4000.0, pulses, 12.5e6, bins);
    let mut c = IqCube::zeros(&radar, 0.0);
    for (s, &(re, im)) in c.samples.iter_mut().zip(values.iter().cycle()) {
        *s = Complex64::new(re, im);
    }
    c
}

fn window() -> impl Strategy<Value = Window> {
    prop_oneof![Just(Window::Rectangular), Just(Window::Hann)]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doppler_power_scales_with_amplitude(
        v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 8..64),
        gain in 0.1f64..10.0,
        w in window(),
    ) {
        let a = cube_from(&v, 16, 4);
        let mut b = a.clone();
        for s in b.samples.iter_mut() {
            *s *= gain;
        }
        let (ma, mb) = (range_doppler(&a, w), range_doppler(&b, w));
        for (x, y) in ma.power.iter().zip(&mb.power) {
            prop_assert!(close(x * gain * gain, *y, 1e-9));
        }
    }

    #[test]
    fn conjugate_mirrors_doppler(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 8..64), w in window()) {
        let a = cube_from(&v, 32, 3);
        let mut b = a.clone();
        for s in b.samples.iter_mut() {
            *s = s.conj();
        }
        let (ma, mb) = (range_doppler(&a, w), range_doppler(&b, w));
        for r in 0..3 {
            for d in 0..32 {
                let m = centred_index(-signed_bin(d, 32), 32);
                prop_assert!(close(ma.power_at(r, d), mb.power_at(r, m), 1e-9));
            }
        }
    }

    #[test]
    fn spectral_energy_is_additive_for_disjoint_bins(
        v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 16..40),
        w in window(),
    ) {
        // two cubes occupying different range bins add without interaction
        let pulses = 16;
        let mut a = cube_from(&v, pulses, 2);
        let mut b = a.clone();
        for p in 0..pulses {
            *a.get_mut(p, 1) = Complex64::new(0.0, 0.0);
            *b.get_mut(p, 0) = Complex64::new(0.0, 0.0);
        }
        let mut sum = a.clone();
        for (s, t) in sum.samples.iter_mut().zip(&b.samples) {
            *s += t;
        }
        let (ma, mb, ms) = (range_doppler(&a, w), range_doppler(&b, w), range_doppler(&sum, w));
        let total = |m: &RangeDopplerMap| m.power.iter().sum::<f64>();
        prop_assert!(close(total(&ma) + total(&mb), total(&ms), 1e-9));
    }

    #[test]
    fn cfar_is_scale_invariant(
        p in prop::collection::vec(0.01f64..10.0, 40 * 4),
        scale in 1e-3f64..1e3,
        pfa in 1e-6f64..1e-1,
    ) {
        let map = RangeDopplerMap {
            range_bins: 40,
            doppler_bins: 4,
            power: p.clone(),
            doppler_bin_size: 1.0,
            range_bin_size: 12.0,
            noise_floor_estimate: 0.0,
            t0: 0.0,
            beam_azimuth: 0.0,
            wavelength: 0.03,
            window: Window::Hann,
        };
        let scaled = RangeDopplerMap { power: p.iter().map(|v| v * scale).collect(), ..map.clone() };
        let params = CfarParams { merge: false, ..CfarParams::new(pfa, 2, 16) };
        let a = cfar_mask(&map, &params).unwrap();
        let b = cfar_mask(&scaled, &params).unwrap();
        // cells sitting on the threshold may flip through rounding
        let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        prop_assert!(diff <= 1);
    }

    #[test]
    fn detection_range_inverts_snr(rcs in 1e-4f64..100.0, snr in -10.0f64..30.0) {
        let budget = LinkBudget::default();
        let radar = RadarParams::new(1e10, 5000.0, 64, 12.5e6, 64);
        let r = detection_range(&budget, radar.wavelength, rcs, snr).unwrap();
        let back = single_pulse_snr(&budget, &radar, rcs, r).unwrap();
        prop_assert!((back - snr).abs() < 1e-9);
    }

    #[test]
    fn scale_range_composes(
        r0 in 10.0f64..1e5,
        s in prop::array::uniform3(1e-4f64..100.0),
        q in prop::array::uniform3(-10.0f64..30.0),
    ) {
        let direct = scale_range(r0, s[0], q[0], s[2], q[2]).unwrap();
        let mid = scale_range(r0, s[0], q[0], s[1], q[1]).unwrap();
        let via = scale_range(mid, s[1], q[1], s[2], q[2]).unwrap();
        prop_assert!(close(direct, via, 1e-12));
    }

    #[test]
    fn adapt_dwell_converges(opt in 5.0f64..150.0, start in 2.0f64..60.0) {
        let quality = |cpi: f64| -(cpi - opt).powi(2);
        let mut history = vec![(start, quality(start))];
        for _ in 0..30 {
            let (best, step) = adapt_state(&history).unwrap();
            let next = (best + step).clamp(1.0, 200.0);
            history.push((next, quality(next)));
        }
        let (best, _) = adapt_state(&history).unwrap();
        prop_assert!((best - opt).abs() < 0.05 * opt, "best {best} opt {opt}");
    }

    #[test]
    fn classification_is_total(
        x in prop::collection::vec(-1e3f64..1e3, 14),
        n in 0usize..20,
        flag in any::<bool>(),
    ) {
        let f = FeatureVector {
            range: x[0].abs(),
            body_speed: x[1],
            rcs_estimate: x[2].abs(),
            micro_body_ratio: x[3].abs(),
            micro_energy_ratio: x[4].abs(),
            md_bandwidth: x[5].abs(),
            jem_spacing: x[6].abs(),
            jem_line_count: n,
            comb_spacing: x[7].abs(),
            stable_line_ratio: x[8].abs() / 1e3,
            diffuse_ratio: x[9].abs() / 1e3,
            rotation_rate_estimate: x[10].abs(),
            blade_count_estimate: n % 7,
            blade_length_estimate: x[11].abs() / 1e3,
            flap_rate_estimate: x[12].abs() / 10.0,
            flap_prominence: x[13].abs(),
            appendage_line_ratio: x[0].abs() / 1e3,
            appendage_flag: flag,
        };
        let d = classify(&f, None);
        prop_assert!((0.0..=1.0).contains(&d.confidence));
        if d.category == TargetCategory::Unknown {
            prop_assert!(d.confidence <= 1.0);
        }
    }

    #[test]
    fn lifting_elevation_matches_slant_geometry(
        x in -5e3f64..5e3,
        y in -5e3f64..5e3,
        z in 0.0f64..2e3,
    ) {
        prop_assume!(x.hypot(y) > 1.0);
        let radar = [0.0, 0.0, 10.0];
        let st = state_from(radar, [x, y, z], [0.0; 3]);
        let blade = BladeSet::new(2, 0.1, 50.0, RotorPlane::Lifting);
        let (_, beta) = los_geometry(radar, &st, &blade).unwrap();
        let slant = (x * x + y * y + (z - 10.0).powi(2)).sqrt();
        prop_assert!((beta.cos() - x.hypot(y) / slant).abs() < 1e-12);
    }

    #[test]
    fn scenario_json_round_trips(
        prf in 1000.0f64..20_000.0,
        pulses in 2usize..512,
        bins in 16usize..2048,
        seed in any::<u32>(),
        rcs in 1e-3f64..10.0,
        pos in prop::array::uniform3(-3e3f64..3e3),
        rate in 0.0f64..150.0,
        blades in 1usize..6,
        clutter in prop::option::of((0.0f64..40.0, 0.0f64..2.0)),
    ) {
        let mut sc = Scenario::new(RadarParams::new(1e10, prf, pulses, 12.5e6, bins), LinkBudget::default());
        sc.noise_seed = seed as u64;
        sc.clutter = clutter.map(|(c, s)| ClutterParams { clutter_to_noise: c, doppler_spread: s });
        let mut t = TargetModel::point("t", TargetCategory::MultiRotorDrone, rcs, pos);
        t.waypoints.push(Waypoint { t: 10.0, position: [pos[0] + 1.0, pos[1], pos[2]] });
        t.blade_sets = vec![BladeSet::new(blades, 0.1, rate, RotorPlane::Lifting)];
        sc.targets = vec![t];
        let back = load_scenario(&sc.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), sc.to_json());
        prop_assert_eq!(back, sc);
    }

    #[test]
    fn association_is_one_to_one(
        dets in prop::collection::vec(prop::array::uniform2(-100.0f64..100.0), 0..12),
        preds in prop::collection::vec(prop::array::uniform2(-100.0f64..100.0), 0..12),
        gate in 1.0f64..80.0,
    ) {
        let a = associate(&dets, &preds, gate).unwrap();
        let mut seen_d = vec![false; dets.len()];
        let mut seen_t = vec![false; preds.len()];
        for &(i, j) in &a.pairs {
            prop_assert!(!seen_d[i] && !seen_t[j]);
            seen_d[i] = true;
            seen_t[j] = true;
            let d = (dets[i][0] - preds[j][0]).hypot(dets[i][1] - preds[j][1]);
            prop_assert!(d <= gate);
        }
        prop_assert_eq!(a.pairs.len() + a.unassigned_detections.len(), dets.len());
        prop_assert_eq!(a.pairs.len() + a.unassigned_tracks.len(), preds.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn track_ids_are_unique(seed in 0u64..1000, n in 1usize..4) {
        let radar = RadarParams::new(1e10, 5000.0, 64, 12.5e6, 256);
        let budget = LinkBudget::default();
        let mut sc = Scenario::new(radar.clone(), budget.clone());
        sc.noise_seed = seed;
        sc.targets = (0..n)
            .map(|i| {
                let mut t = common::point_target(&format!("t{i}"), &radar, &budget, 600.0 + 500.0 * i as f64, 10.0, 5.0);
                t.id = format!("t{i}");
                t
            })
            .collect();
        let cfg = CwsConfig { dwell_pulses: None, ..CwsConfig::default() };
        let mut p = CwsPipeline::new(sc, cfg).unwrap();
        for _ in 0..4 {
            let pic = p.step().unwrap();
            let mut ids: Vec<u64> = pic.tracks.iter().map(|t| t.id).collect();
            let len = ids.len();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), len);
        }
    }
}
