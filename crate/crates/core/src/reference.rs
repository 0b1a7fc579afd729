//! Reference scenarios shipped in `docs/`.
//!
//! Target ranges are placed with the radar equation so every body return
//! has the same single-pulse SNR.

use crate::atr::TargetCategory as C;
use crate::scenario::{
    Appendage, BladeSet, ClutterParams, LinkBudget, RadarParams, RotorPlane, Scenario, TargetModel, Waypoint,
};
use crate::tradestudy::detection_range;

/// Single-pulse SNR of every reference target: 20 dB after a 100-pulse CPI.
pub const REFERENCE_PULSE_SNR_DB: f64 = 0.0;

pub fn reference_radar() -> RadarParams {
    let mut r = RadarParams::new(10e9, 5000.0, 100, 12.5e6, 512);
    r.position = [0.0, 0.0, 12.0];
    r
}

pub fn reference_budget() -> LinkBudget {
    LinkBudget {
        transmit_power: 10.0,
        tx_gain: 1000.0,
        rx_gain: 1000.0,
        system_noise_temp: 500.0,
        noise_bandwidth: 12.5e6,
        system_losses: 2.0,
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Straight leg from `start` for 60 s along `heading` (rad from north).
fn leg(start: [f64; 3], heading: f64, climb: f64, speed: f64) -> Vec<Waypoint> {
    let d = 60.0 * speed;
    vec![
        Waypoint {
            t: 0.0,
            position: start,
        },
        Waypoint {
            t: 60.0,
            position: [
                start[0] + d * heading.sin(),
                start[1] + d * heading.cos(),
                start[2] + 60.0 * climb,
            ],
        },
    ]
}

fn lifting(rate_hz: f64, phase: f64) -> BladeSet {
    let mut b = BladeSet::new(2, 0.12, rate_hz, RotorPlane::Lifting);
    b.reflectivity_scale = 0.5;
    b.phase_offset = phase;
    b.wobble_depth = 0.1;
    b.wobble_hz = 1.5;
    b
}

fn puller() -> BladeSet {
    let mut b = BladeSet::new(2, 0.10, 120.0, RotorPlane::Puller);
    b.reflectivity_scale = 0.5;
    b.phase_offset = 0.3;
    b
}

fn quad_rotors() -> Vec<BladeSet> {
    [(78.0, 0.0), (84.0, 1.1), (90.0, 2.3), (96.0, 4.0)]
        .into_iter()
        .map(|(r, p)| lifting(r, p))
        .collect()
}

/// Range (m, rounded to 10 m) giving the reference SNR for `rcs`.
fn snr_range(rcs: f64) -> f64 {
    let r = reference_radar();
    let d = detection_range(&reference_budget(), r.wavelength, rcs, REFERENCE_PULSE_SNR_DB).unwrap();
    round_to(d, 10.0)
}

/// Multi-rotor, fixed-wing, VTOL hybrid, large bird, small bird and ship.
pub fn six_target_scenario() -> Scenario {
    let mut s = Scenario::new(reference_radar(), reference_budget());
    s.noise_seed = 1;
    s.clutter = Some(ClutterParams {
        clutter_to_noise: 10.0,
        doppler_spread: 0.25,
    });
    let oblique = 60f64.to_radians();

    let mut mr = TargetModel::point("multirotor", C::MultiRotorDrone, 0.05, [0.0; 3]);
    mr.waypoints = leg([0.0, snr_range(0.05), 80.0], std::f64::consts::PI, 0.0, 15.0);
    mr.blade_sets = quad_rotors();

    let mut fw = TargetModel::point("fixedwing", C::FixedWingDrone, 0.1, [0.0; 3]);
    let r = snr_range(0.1);
    fw.waypoints = leg([-0.1 * r, 0.995 * r, 60.0], std::f64::consts::PI + oblique, 0.0, 20.0);
    fw.blade_sets = vec![puller()];

    let mut vt = TargetModel::point("vtol", C::VtolHybridDrone, 0.2, [0.0; 3]);
    let r = snr_range(0.2);
    vt.waypoints = leg([0.1 * r, 0.995 * r, 100.0], std::f64::consts::PI - oblique, 0.0, 18.0);
    vt.blade_sets = quad_rotors();
    vt.blade_sets.push(puller());

    let mut lb = TargetModel::point("largebird", C::LargeBird, 0.02, [0.0; 3]);
    lb.waypoints = leg([0.0, snr_range(0.02), 40.0], std::f64::consts::PI, 0.0, 10.0);
    lb.flap_rate = 4.0;
    lb.appendage = Some(Appendage {
        offset_m: 0.3,
        reflectivity: 0.3,
    });

    let mut sb = TargetModel::point("smallbird", C::SmallBird, 0.005, [0.0; 3]);
    sb.waypoints = leg([0.0, snr_range(0.005), 30.0], std::f64::consts::PI, 0.0, 8.0);
    sb.flap_rate = 8.0;

    let mut ship = TargetModel::point("ship", C::Ship, 20.0, [0.0; 3]);
    ship.waypoints = leg([0.0, snr_range(20.0), 0.0], std::f64::consts::PI, 0.0, 10.0);

    s.targets = vec![mr, fw, vt, lb, sb, ship];
    s
}

/// A single quad-rotor whose rotor rates wander ±2% at 6 Hz.
pub fn quad_rotor_scenario() -> Scenario {
    let mut s = Scenario::new(reference_radar(), reference_budget());
    s.noise_seed = 7;
    let mut mr = TargetModel::point("quad", C::MultiRotorDrone, 0.05, [0.0; 3]);
    mr.waypoints = leg([0.0, snr_range(0.05), 80.0], std::f64::consts::PI, 0.0, 15.0);
    mr.blade_sets = [(80.0, 0.0), (80.0, 1.3), (80.0, 2.1), (80.0, 3.9)]
        .into_iter()
        .map(|(r, p)| {
            let mut b = BladeSet::new(2, 0.12, r, RotorPlane::Lifting);
            b.reflectivity_scale = 0.5;
            b.phase_offset = p;
            b.wobble_depth = 0.02;
            b.wobble_hz = 6.0;
            b
        })
        .collect();
    s.targets = vec![mr];
    s
}
