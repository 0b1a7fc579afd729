//! Simulated world: radar, link budget, clutter and truth targets.
//!
//! Axes are east (x), north (y), up (z). Azimuth is measured clockwise from
//! north. Approaching targets have positive radial speed and positive
//! Doppler.

use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::atr::TargetCategory;
use crate::scattering::sphere_rcs;
use crate::{Error, Result, BOLTZMANN, SPEED_OF_LIGHT};

pub type Vec3 = [f64; 3];

pub const DEFAULT_SCATTERERS_PER_BLADE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RadarParams {
    pub carrier_frequency: f64,
    pub wavelength: f64,
    pub prf: f64,
    pub pulses_per_cpi: usize,
    pub bandwidth: f64,
    pub range_bins: usize,
    pub beam_azimuth: f64,
    pub scan_rate: f64,
    pub position: Vec3,
}

impl RadarParams {
    /// Staring radar at the origin pointing north.
    pub fn new(carrier_frequency: f64, prf: f64, pulses_per_cpi: usize, bandwidth: f64, range_bins: usize) -> Self {
        Self {
            carrier_frequency,
            wavelength: SPEED_OF_LIGHT / carrier_frequency,
            prf,
            pulses_per_cpi,
            bandwidth,
            range_bins,
            beam_azimuth: 0.0,
            scan_rate: 0.0,
            position: [0.0; 3],
        }
    }

    /// CPI duration in seconds.
    pub fn cpi(&self) -> f64 {
        self.pulses_per_cpi as f64 / self.prf
    }

    pub fn range_bin_size(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    pub fn unambiguous_range(&self) -> f64 {
        self.range_bins as f64 * self.range_bin_size()
    }

    pub fn doppler_bin_size(&self) -> f64 {
        self.prf / self.pulses_per_cpi as f64
    }

    /// Beam pointing at time `t`.
    pub fn beam_azimuth_at(&self, t: f64) -> f64 {
        self.beam_azimuth + self.scan_rate * t
    }

    pub fn with_pulses(&self, pulses: usize) -> Self {
        Self {
            pulses_per_cpi: pulses,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency > 0.0) {
            return Err(Error::validation("carrier_frequency must be > 0"));
        }
        if !(self.prf > 0.0) {
            return Err(Error::validation("prf must be > 0"));
        }
        if self.pulses_per_cpi < 2 {
            return Err(Error::validation("pulses_per_cpi must be >= 2"));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::validation("bandwidth must be > 0"));
        }
        if self.range_bins == 0 {
            return Err(Error::validation("range_bins must be >= 1"));
        }
        let rel = (self.wavelength * self.carrier_frequency - SPEED_OF_LIGHT).abs() / SPEED_OF_LIGHT;
        if !(rel <= 1e-6) {
            return Err(Error::validation("wavelength * carrier_frequency must equal c"));
        }
        if !self.beam_azimuth.is_finite() || !self.scan_rate.is_finite() || self.position.iter().any(|v| !v.is_finite())
        {
            return Err(Error::validation("radar pointing/position must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub transmit_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub system_noise_temp: f64,
    pub noise_bandwidth: f64,
    pub system_losses: f64,
}

impl LinkBudget {
    pub fn boltzmann(&self) -> f64 {
        BOLTZMANN
    }

    /// Numerator of the radar equation without σ: P_t G_t G_r λ².
    pub(crate) fn gain_term(&self, wavelength: f64) -> f64 {
        self.transmit_power * self.tx_gain * self.rx_gain * wavelength * wavelength
    }

    /// Denominator of the radar equation without R⁴.
    pub(crate) fn loss_term(&self) -> f64 {
        (4.0 * std::f64::consts::PI).powi(3)
            * BOLTZMANN
            * self.system_noise_temp
            * self.noise_bandwidth
            * self.system_losses
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("transmit_power", self.transmit_power),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("system_noise_temp", self.system_noise_temp),
            ("noise_bandwidth", self.noise_bandwidth),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be > 0")));
            }
        }
        if !(self.system_losses >= 1.0) {
            return Err(Error::validation("system_losses must be >= 1"));
        }
        Ok(())
    }
}

impl Default for LinkBudget {
    /// A modest X-band surveillance budget.
    fn default() -> Self {
        Self {
            transmit_power: 100.0,
            tx_gain: 1000.0,
            rx_gain: 1000.0,
            system_noise_temp: 500.0,
            noise_bandwidth: 12.5e6,
            system_losses: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotorPlane {
    /// Horizontal rotor disc.
    Lifting,
    /// Vertical propeller disc facing the direction of travel.
    Puller,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BladeSet {
    pub blade_count: usize,
    pub blade_length: f64,
    /// Rotation rate in revolutions per second.
    pub rate_hz: f64,
    pub plane: RotorPlane,
    pub phase_offset: f64,
    pub reflectivity_scale: f64,
    /// Fractional depth of a sinusoidal wobble in rotation rate.
    pub wobble_depth: f64,
    pub wobble_hz: f64,
    pub scatterers_per_blade: usize,
}

impl BladeSet {
    pub fn new(blade_count: usize, blade_length: f64, rate_hz: f64, plane: RotorPlane) -> Self {
        Self {
            blade_count,
            blade_length,
            rate_hz,
            plane,
            phase_offset: 0.0,
            reflectivity_scale: 0.1,
            wobble_depth: 0.0,
            wobble_hz: 0.0,
            scatterers_per_blade: DEFAULT_SCATTERERS_PER_BLADE,
        }
    }

    /// ω in rad/s.
    pub fn rotation_rate(&self) -> f64 {
        TAU * self.rate_hz
    }

    /// Blade rotation angle θ(t), including wobble.
    pub fn angle_at(&self, t: f64) -> f64 {
        let w0 = self.rotation_rate();
        let mut theta = w0 * t + self.phase_offset;
        if self.wobble_depth != 0.0 && self.wobble_hz > 0.0 {
            let wf = TAU * self.wobble_hz;
            let ph = self.phase_offset * 0.37;
            // ∫ ω0·ε·sin(wf·t + ph) dt, zero-referenced at t = 0
            theta -= w0 * self.wobble_depth / wf * ((wf * t + ph).cos() - ph.cos());
        }
        theta
    }

    /// Instantaneous rotation rate dθ/dt in rad/s.
    pub fn rate_at(&self, t: f64) -> f64 {
        let w0 = self.rotation_rate();
        if self.wobble_depth != 0.0 && self.wobble_hz > 0.0 {
            let wf = TAU * self.wobble_hz;
            let ph = self.phase_offset * 0.37;
            w0 * (1.0 + self.wobble_depth * (wf * t + ph).sin())
        } else {
            w0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blade_count < 1 {
            return Err(Error::validation("blade_count must be >= 1"));
        }
        if !(self.blade_length > 0.0) {
            return Err(Error::validation("blade_length must be > 0"));
        }
        if !(self.rate_hz >= 0.0) || !self.rate_hz.is_finite() {
            return Err(Error::validation("rotation_rate must be >= 0"));
        }
        if !(self.reflectivity_scale > 0.0 && self.reflectivity_scale <= 1.0) {
            return Err(Error::validation("reflectivity_scale must be in (0, 1]"));
        }
        if !(self.wobble_depth >= 0.0 && self.wobble_depth < 1.0) || !(self.wobble_hz >= 0.0) {
            return Err(Error::validation("wobble must satisfy 0 <= depth < 1, hz >= 0"));
        }
        if self.scatterers_per_blade < 2 {
            return Err(Error::validation("scatterers_per_blade must be >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appendage {
    /// Distance behind the body scatterer along the direction of travel.
    pub offset_m: f64,
    pub reflectivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RcsModel {
    Mean(f64),
    SphereRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    pub id: String,
    pub truth_category: TargetCategory,
    pub rcs: RcsModel,
    pub waypoints: Vec<Waypoint>,
    pub blade_sets: Vec<BladeSet>,
    pub flap_rate: f64,
    pub appendage: Option<Appendage>,
}

impl TargetModel {
    /// Static target with a fixed RCS.
    pub fn point(id: &str, category: TargetCategory, rcs: f64, position: Vec3) -> Self {
        Self {
            id: id.to_string(),
            truth_category: category,
            rcs: RcsModel::Mean(rcs),
            waypoints: vec![Waypoint { t: 0.0, position }],
            blade_sets: Vec::new(),
            flap_rate: 0.0,
            appendage: None,
        }
    }

    pub fn mean_rcs(&self, wavelength: f64) -> f64 {
        match self.rcs {
            RcsModel::Mean(s) => s,
            RcsModel::SphereRadius(a) => sphere_rcs(a, wavelength).unwrap_or(0.0),
        }
    }

    /// Position and velocity at time `t`.
    pub fn kinematics_at(&self, t: f64) -> Result<(Vec3, Vec3)> {
        let first = self.waypoints[0];
        if t < first.t {
            return Err(Error::BeforeFirstWaypoint { t, first: first.t });
        }
        let last = *self.waypoints.last().unwrap();
        if t >= last.t {
            return Ok((last.position, [0.0; 3]));
        }
        // waypoint times are strictly increasing, so this finds the bracket
        let k = self.waypoints.partition_point(|w| w.t <= t);
        let (a, b) = (self.waypoints[k - 1], self.waypoints[k]);
        let dt = b.t - a.t;
        let s = (t - a.t) / dt;
        let mut p = [0.0; 3];
        let mut v = [0.0; 3];
        for i in 0..3 {
            v[i] = (b.position[i] - a.position[i]) / dt;
            p[i] = a.position[i] + s * (b.position[i] - a.position[i]);
        }
        Ok((p, v))
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |m: &str| Error::validation(format!("target `{}`: {m}", self.id));
        if self.waypoints.is_empty() {
            return Err(ctx("at least one waypoint required"));
        }
        for w in self.waypoints.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(ctx("waypoint times must be strictly increasing"));
            }
        }
        for w in &self.waypoints {
            if !w.t.is_finite() || w.position.iter().any(|x| !x.is_finite()) {
                return Err(ctx("waypoints must be finite"));
            }
        }
        match self.rcs {
            RcsModel::Mean(s) if !(s > 0.0) => return Err(ctx("mean_rcs must be > 0")),
            RcsModel::SphereRadius(a) if !(a > 0.0) => return Err(ctx("sphere_radius must be > 0")),
            _ => {}
        }
        if !(self.flap_rate >= 0.0) {
            return Err(ctx("flap_rate must be >= 0"));
        }
        if let Some(a) = self.appendage {
            if !(a.reflectivity > 0.0 && a.reflectivity <= 1.0) || !a.offset_m.is_finite() {
                return Err(ctx("appendage reflectivity must be in (0, 1]"));
            }
        }
        for b in &self.blade_sets {
            b.validate().map_err(|e| ctx(&e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterParams {
    #[serde(rename = "clutter_to_noise_db")]
    pub clutter_to_noise: f64,
    #[serde(rename = "doppler_spread_mps")]
    pub doppler_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radar: RadarParams,
    pub budget: LinkBudget,
    pub targets: Vec<TargetModel>,
    /// `None` disables clutter.
    pub clutter: Option<ClutterParams>,
    pub noise_seed: u64,
    pub noise_enabled: bool,
}

impl Scenario {
    pub fn new(radar: RadarParams, budget: LinkBudget) -> Self {
        Self {
            radar,
            budget,
            targets: Vec::new(),
            clutter: None,
            noise_seed: 0,
            noise_enabled: true,
        }
    }

    pub fn target(&self, id: &str) -> Result<&TargetModel> {
        self.targets
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::UnknownTarget(id.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.budget.validate()?;
        let mut seen = HashSet::new();
        for t in &self.targets {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::validation(format!("duplicate target id `{}`", t.id)));
            }
            t.validate()?;
        }
        if let Some(c) = self.clutter {
            if !(c.clutter_to_noise >= 0.0) {
                return Err(Error::validation("clutter_to_noise must be >= 0 dB"));
            }
            if !(c.doppler_spread >= 0.0) {
                return Err(Error::validation("doppler_spread must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc::from(self);
        let mut s = serde_json::to_string_pretty(&doc).expect("scenario serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub radial_speed: f64,
    pub range: f64,
    pub azimuth: f64,
    /// In-plane azimuth for a horizontal (lifting) rotor.
    pub alpha: f64,
    /// LOS elevation relative to a horizontal (lifting) rotor.
    pub beta: f64,
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// State of a target from a radar at `radar_position`.
pub fn state_from(radar_position: Vec3, position: Vec3, velocity: Vec3) -> TargetState {
    let d = sub(position, radar_position);
    let range = norm(d);
    let (radial_speed, azimuth, alpha, beta) = if range > 0.0 {
        let u = [d[0] / range, d[1] / range, d[2] / range];
        let az = d[0].atan2(d[1]);
        (-dot(velocity, u), az, az, u[2].abs().clamp(0.0, 1.0).asin())
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };
    TargetState {
        position,
        velocity,
        radial_speed,
        range,
        azimuth,
        alpha,
        beta,
    }
}

pub fn target_state_at(scenario: &Scenario, target_id: &str, t: f64) -> Result<TargetState> {
    let target = scenario.target(target_id)?;
    let (p, v) = target.kinematics_at(t)?;
    Ok(state_from(scenario.radar.position, p, v))
}

/// Aspect angles (α, β) of the line of sight relative to a rotor plane.
///
/// Lifting rotors lie in the horizontal plane with their reference axis
/// pointing north. Puller rotors lie in the vertical plane whose normal is
/// the horizontal direction of travel (north when hovering); their
/// reference axis is the horizontal in-plane direction.
pub fn los_geometry(radar_position: Vec3, state: &TargetState, blade: &BladeSet) -> Result<(f64, f64)> {
    let d = sub(state.position, radar_position);
    let r = norm(d);
    if !(r > 0.0) {
        return Err(Error::Unobservable("zero range".into()));
    }
    let u = [d[0] / r, d[1] / r, d[2] / r];
    match blade.plane {
        RotorPlane::Lifting => {
            let beta = u[2].abs().min(1.0).asin();
            let alpha = if u[0] == 0.0 && u[1] == 0.0 {
                0.0
            } else {
                u[0].atan2(u[1])
            };
            Ok((alpha, beta))
        }
        RotorPlane::Puller => {
            let hv = (state.velocity[0].powi(2) + state.velocity[1].powi(2)).sqrt();
            let n = if hv > 1e-9 {
                [state.velocity[0] / hv, state.velocity[1] / hv, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            // z × n
            let h = [-n[1], n[0], 0.0];
            let un = dot(u, n);
            let beta = un.abs().min(1.0).asin();
            let proj = [u[0] - un * n[0], u[1] - un * n[1], u[2]];
            let (pz, ph) = (proj[2], dot(proj, h));
            let alpha = if pz == 0.0 && ph == 0.0 { 0.0 } else { pz.atan2(ph) };
            Ok((alpha, beta))
        }
    }
}

// ---------------------------------------------------------------------------
// JSON document form

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadarDoc {
    carrier_frequency_hz: Option<f64>,
    prf_hz: Option<f64>,
    pulses_per_cpi: Option<usize>,
    bandwidth_hz: Option<f64>,
    range_bins: Option<usize>,
    #[serde(default)]
    beam_azimuth_rad: f64,
    #[serde(default)]
    scan_rate_rad_s: f64,
    #[serde(default)]
    position_m: Vec3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetDoc {
    transmit_power_w: Option<f64>,
    tx_gain: Option<f64>,
    rx_gain: Option<f64>,
    system_noise_temp_k: Option<f64>,
    noise_bandwidth_hz: Option<f64>,
    #[serde(default = "one")]
    system_losses: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_reflectivity() -> f64 {
    0.1
}

fn default_scatterers() -> usize {
    DEFAULT_SCATTERERS_PER_BLADE
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BladeDoc {
    count: usize,
    length_m: f64,
    rate_hz: f64,
    plane: RotorPlane,
    #[serde(default)]
    phase_offset_rad: f64,
    #[serde(default = "default_reflectivity")]
    reflectivity: f64,
    #[serde(default)]
    wobble_depth: f64,
    #[serde(default)]
    wobble_hz: f64,
    #[serde(default = "default_scatterers")]
    scatterers_per_blade: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetDoc {
    id: String,
    category: TargetCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rcs_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sphere_radius_m: Option<f64>,
    waypoints: Vec<[f64; 4]>,
    #[serde(default)]
    blades: Vec<BladeDoc>,
    #[serde(default)]
    flap_rate_hz: f64,
    #[serde(default)]
    appendage: Option<Appendage>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    radar: RadarDoc,
    budget: BudgetDoc,
    #[serde(default)]
    clutter: Option<ClutterParams>,
    #[serde(default)]
    noise_seed: u64,
    #[serde(default = "yes")]
    noise_enabled: bool,
    #[serde(default)]
    targets: Vec<TargetDoc>,
}

fn required<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::validation(format!("{what} required")))
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario> {
        let r = self.radar;
        let carrier = required(r.carrier_frequency_hz, "carrier_frequency")?;
        let mut radar = RadarParams::new(
            carrier,
            required(r.prf_hz, "prf")?,
            required(r.pulses_per_cpi, "pulses_per_cpi")?,
            required(r.bandwidth_hz, "bandwidth")?,
            required(r.range_bins, "range_bins")?,
        );
        radar.beam_azimuth = r.beam_azimuth_rad;
        radar.scan_rate = r.scan_rate_rad_s;
        radar.position = r.position_m;

        let b = self.budget;
        let budget = LinkBudget {
            transmit_power: required(b.transmit_power_w, "transmit_power")?,
            tx_gain: required(b.tx_gain, "tx_gain")?,
            rx_gain: required(b.rx_gain, "rx_gain")?,
            system_noise_temp: required(b.system_noise_temp_k, "system_noise_temp")?,
            noise_bandwidth: required(b.noise_bandwidth_hz, "noise_bandwidth")?,
            system_losses: b.system_losses,
        };

        let mut targets = Vec::with_capacity(self.targets.len());
        for t in self.targets {
            let rcs = match (t.rcs_m2, t.sphere_radius_m) {
                (Some(s), None) => RcsModel::Mean(s),
                (None, Some(a)) => RcsModel::SphereRadius(a),
                _ => {
                    return Err(Error::validation(format!(
                        "target `{}`: exactly one of rcs_m2 or sphere_radius_m required",
                        t.id
                    )))
                }
            };
            let blade_sets = t
                .blades
                .into_iter()
                .map(|b| BladeSet {
                    blade_count: b.count,
                    blade_length: b.length_m,
                    rate_hz: b.rate_hz,
                    plane: b.plane,
                    phase_offset: b.phase_offset_rad,
                    reflectivity_scale: b.reflectivity,
                    wobble_depth: b.wobble_depth,
                    wobble_hz: b.wobble_hz,
                    scatterers_per_blade: b.scatterers_per_blade,
                })
                .collect();
            targets.push(TargetModel {
                id: t.id,
                truth_category: t.category,
                rcs,
                waypoints: t
                    .waypoints
                    .iter()
                    .map(|w| Waypoint {
                        t: w[0],
                        position: [w[1], w[2], w[3]],
                    })
                    .collect(),
                blade_sets,
                flap_rate: t.flap_rate_hz,
                appendage: t.appendage,
            });
        }

        let sc = Scenario {
            radar,
            budget,
            targets,
            clutter: self.clutter,
            noise_seed: self.noise_seed,
            noise_enabled: self.noise_enabled,
        };
        sc.validate()?;
        Ok(sc)
    }
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        let r = &s.radar;
        let b = &s.budget;
        ScenarioDoc {
            radar: RadarDoc {
                carrier_frequency_hz: Some(r.carrier_frequency),
                prf_hz: Some(r.prf),
                pulses_per_cpi: Some(r.pulses_per_cpi),
                bandwidth_hz: Some(r.bandwidth),
                range_bins: Some(r.range_bins),
                beam_azimuth_rad: r.beam_azimuth,
                scan_rate_rad_s: r.scan_rate,
                position_m: r.position,
            },
            budget: BudgetDoc {
                transmit_power_w: Some(b.transmit_power),
                tx_gain: Some(b.tx_gain),
                rx_gain: Some(b.rx_gain),
                system_noise_temp_k: Some(b.system_noise_temp),
                noise_bandwidth_hz: Some(b.noise_bandwidth),
                system_losses: b.system_losses,
            },
            clutter: s.clutter,
            noise_seed: s.noise_seed,
            noise_enabled: s.noise_enabled,
            targets: s
                .targets
                .iter()
                .map(|t| TargetDoc {
                    id: t.id.clone(),
                    category: t.truth_category,
                    rcs_m2: match t.rcs {
                        RcsModel::Mean(v) => Some(v),
                        _ => None,
                    },
                    sphere_radius_m: match t.rcs {
                        RcsModel::SphereRadius(v) => Some(v),
                        _ => None,
                    },
                    waypoints: t
                        .waypoints
                        .iter()
                        .map(|w| [w.t, w.position[0], w.position[1], w.position[2]])
                        .collect(),
                    blades: t
                        .blade_sets
                        .iter()
                        .map(|b| BladeDoc {
                            count: b.blade_count,
                            length_m: b.blade_length,
                            rate_hz: b.rate_hz,
                            plane: b.plane,
                            phase_offset_rad: b.phase_offset,
                            reflectivity: b.reflectivity_scale,
                            wobble_depth: b.wobble_depth,
                            wobble_hz: b.wobble_hz,
                            scatterers_per_blade: b.scatterers_per_blade,
                        })
                        .collect(),
                    flap_rate_hz: t.flap_rate,
                    appendage: t.appendage,
                })
                .collect(),
        }
    }
}

/// Parse and validate a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    doc.into_scenario()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atr::TargetCategory as C;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn doc(prf: &str) -> String {
        format!(
            r#"{{
  "radar": {{"carrier_frequency_hz": 1e10, {prf} "pulses_per_cpi": 100,
             "bandwidth_hz": 12.5e6, "range_bins": 256}},
  "budget": {{"transmit_power_w": 10, "tx_gain": 100, "rx_gain": 100,
              "system_noise_temp_k": 290, "noise_bandwidth_hz": 1e6}},
  "targets": [
    {{"id": "a", "category": "multi_rotor_drone", "rcs_m2": 0.05,
      "waypoints": [[0, 0, 1000, 50], [10, 100, 1000, 50]],
      "blades": [{{"count": 2, "length_m": 0.12, "rate_hz": 80, "plane": "lifting"}}]}},
    {{"id": "b", "category": "large_bird", "sphere_radius_m": 0.1,
      "waypoints": [[0, 0, 2000, 30]], "flap_rate_hz": 4,
      "appendage": {{"offset_m": 0.3, "reflectivity": 0.3}}}}
  ]
}}"#
        )
    }

    #[test]
    fn loads_and_derives_cpi() {
        let s = load_scenario(&doc(r#""prf_hz": 5000,"#)).unwrap();
        assert_eq!(s.targets.len(), 2);
        assert!((s.radar.cpi() - 0.020).abs() < 1e-15);
        assert!((s.radar.wavelength - 0.03).abs() < 1e-15);
    }

    #[test]
    fn missing_prf_is_reported() {
        let err = load_scenario(&doc("")).unwrap_err();
        assert!(err.to_string().contains("prf required"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = load_scenario("{\n  \"radar\": [}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let s = load_scenario(&doc(r#""prf_hz": 5000,"#)).unwrap();
        let text = s.to_json();
        let s2 = load_scenario(&text).unwrap();
        assert_eq!(s, s2);
        assert_eq!(text, s2.to_json());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut s = load_scenario(&doc(r#""prf_hz": 5000,"#)).unwrap();
        s.targets[1].id = "a".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn interpolation_and_hold() {
        let mut s = Scenario::new(RadarParams::new(1e10, 5000.0, 100, 12.5e6, 256), LinkBudget::default());
        let mut t = TargetModel::point("x", C::Vehicle, 1.0, [0.0, 0.0, 100.0]);
        t.waypoints.push(Waypoint {
            t: 10.0,
            position: [1000.0, 0.0, 100.0],
        });
        s.targets.push(t);
        let st = target_state_at(&s, "x", 5.0).unwrap();
        assert_eq!(st.position, [500.0, 0.0, 100.0]);
        assert!((norm(st.velocity) - 100.0).abs() < 1e-12);
        let st = target_state_at(&s, "x", 12.0).unwrap();
        assert_eq!(st.position, [1000.0, 0.0, 100.0]);
        assert_eq!(st.velocity, [0.0; 3]);
        assert!(matches!(
            target_state_at(&s, "x", -1.0),
            Err(Error::BeforeFirstWaypoint { .. })
        ));
        assert!(matches!(target_state_at(&s, "nope", 0.0), Err(Error::UnknownTarget(_))));
    }

    #[test]
    fn single_waypoint_is_static() {
        let mut s = Scenario::new(RadarParams::new(1e10, 5000.0, 100, 12.5e6, 256), LinkBudget::default());
        s.targets
            .push(TargetModel::point("x", C::Vehicle, 1.0, [3.0, 4.0, 0.0]));
        for t in [0.0, 1.0, 1e3] {
            let st = target_state_at(&s, "x", t).unwrap();
            assert_eq!(st.position, [3.0, 4.0, 0.0]);
            assert_eq!(st.velocity, [0.0; 3]);
            assert_eq!(st.range, 5.0);
        }
    }

    #[test]
    fn approaching_is_positive() {
        let st = state_from([0.0; 3], [0.0, 1000.0, 0.0], [0.0, -10.0, 0.0]);
        assert!((st.radial_speed - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lifting_geometry_cases() {
        let b = BladeSet::new(2, 0.1, 50.0, RotorPlane::Lifting);
        let level = state_from([0.0; 3], [0.0, 500.0, 0.0], [0.0; 3]);
        let (a, be) = los_geometry([0.0; 3], &level, &b).unwrap();
        assert_eq!(be, 0.0);
        assert_eq!(a, 0.0);
        let over = state_from([0.0; 3], [0.0, 0.0, 300.0], [0.0; 3]);
        let (_, be) = los_geometry([0.0; 3], &over, &b).unwrap();
        assert!((be - FRAC_PI_2).abs() < 1e-12);
        assert!(be.cos().abs() < 1e-12);
        let east = state_from([0.0; 3], [100.0, 0.0, 0.0], [0.0; 3]);
        let (a, _) = los_geometry([0.0; 3], &east, &b).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12);
        let zero = state_from([0.0; 3], [0.0; 3], [0.0; 3]);
        assert!(los_geometry([0.0; 3], &zero, &b).is_err());
    }

    #[test]
    fn puller_plane_follows_velocity() {
        let b = BladeSet::new(2, 0.1, 50.0, RotorPlane::Puller);
        // flying straight at the radar: LOS along the disc normal
        let st = state_from([0.0; 3], [0.0, 500.0, 0.0], [0.0, -20.0, 0.0]);
        let (_, be) = los_geometry([0.0; 3], &st, &b).unwrap();
        assert!((be - FRAC_PI_2).abs() < 1e-9);
        // crossing: LOS inside the disc plane
        let st = state_from([0.0; 3], [0.0, 500.0, 0.0], [20.0, 0.0, 0.0]);
        let (a, be) = los_geometry([0.0; 3], &st, &b).unwrap();
        assert!(be.abs() < 1e-12);
        assert!((a.abs() - PI).abs() < 1e-9 || a.abs() < 1e-9);
    }

    #[test]
    fn wobble_rate_is_derivative_of_angle() {
        let mut b = BladeSet::new(2, 0.1, 80.0, RotorPlane::Lifting);
        b.wobble_depth = 0.05;
        b.wobble_hz = 3.0;
        b.phase_offset = 0.4;
        for &t in &[0.0, 0.1, 0.237, 0.9] {
            let h = 1e-6;
            let fd = (b.angle_at(t + h) - b.angle_at(t - h)) / (2.0 * h);
            assert!((fd - b.rate_at(t)).abs() / b.rate_at(t) < 1e-6);
        }
    }
}
