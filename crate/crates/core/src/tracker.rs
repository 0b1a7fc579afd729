//! Track management and the classify-while-scan frame pipeline.
//!
//! Each frame is synthesized, processed, detected and classified per
//! resolution cell before any track is touched; tracks then fuse the
//! per-scan labels (track-after-identify).

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::atr::{
    self, CategoryDecision, ClassifierConfig, FeatureVector, KineticFeatures, TargetCategory, TrackPoint,
};
use crate::detector::{self, CfarParams, Detection};
use crate::dsp::{self, Window};
use crate::echo_synth::{self, CellDwell, SynthWarning};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Number of recent labels fused by the track-after-identify vote.
pub const TAI_WINDOW: usize = 10;
pub const DEFAULT_GATE_M: f64 = 50.0;
/// A track is retired once it has missed more than this many frames.
pub const MAX_MISSES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Track {
    pub id: u64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub last_update: f64,
    pub points: Vec<TrackPoint>,
    pub per_scan_labels: Vec<TargetCategory>,
    pub per_scan_confidence: Vec<f64>,
    pub fused_label: CategoryDecision,
    pub misses: usize,
    pub drt_history: Vec<f64>,
}

impl Track {
    pub fn new(id: u64, t: f64, position: [f64; 2]) -> Self {
        Self {
            id,
            position,
            velocity: [0.0; 2],
            last_update: t,
            points: vec![TrackPoint {
                t,
                position,
                speed: 0.0,
            }],
            per_scan_labels: Vec::new(),
            per_scan_confidence: Vec::new(),
            fused_label: CategoryDecision::unknown(),
            misses: 0,
            drt_history: Vec::new(),
        }
    }

    pub fn predicted(&self, t: f64) -> [f64; 2] {
        let dt = t - self.last_update;
        [
            self.position[0] + self.velocity[0] * dt,
            self.position[1] + self.velocity[1] * dt,
        ]
    }

    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }

    pub fn kinetics(&self) -> Option<KineticFeatures> {
        atr::kinetic_features(&self.points).ok()
    }

    /// Record a per-scan label and refresh the fused label.
    pub fn push_label(&mut self, d: CategoryDecision) {
        self.per_scan_labels.push(d.category);
        self.per_scan_confidence.push(d.confidence);
        let cat = tai_label(&self.per_scan_labels);
        let start = self.per_scan_labels.len().saturating_sub(TAI_WINDOW);
        let window = &self.per_scan_labels[start..];
        let conf = &self.per_scan_confidence[start..];
        let agree: f64 = window
            .iter()
            .zip(conf)
            .filter(|(l, _)| **l == cat)
            .map(|(_, c)| c)
            .sum();
        self.fused_label = CategoryDecision {
            category: cat,
            confidence: if cat == TargetCategory::Unknown {
                0.0
            } else {
                agree / window.len() as f64
            },
        };
    }
}

/// Majority vote over the last ten labels; ties go to the most recent.
pub fn tai_label(per_scan_labels: &[TargetCategory]) -> TargetCategory {
    let start = per_scan_labels.len().saturating_sub(TAI_WINDOW);
    let window = &per_scan_labels[start..];
    let mut counts: BTreeMap<TargetCategory, usize> = BTreeMap::new();
    for l in window {
        *counts.entry(*l).or_default() += 1;
    }
    let Some(best) = counts.values().max().copied() else {
        return TargetCategory::Unknown;
    };
    *window.iter().rev().find(|l| counts[l] == best).unwrap()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// (detection index, track index)
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_detections: Vec<usize>,
    pub unassigned_tracks: Vec<usize>,
}

/// Greedy nearest-neighbour gating: repeatedly pair the closest
/// detection/prediction couple inside the gate.
pub fn associate(detections: &[[f64; 2]], predictions: &[[f64; 2]], gate_radius: f64) -> Result<Assignment> {
    if !(gate_radius > 0.0) {
        return Err(Error::invalid("gate_radius must be > 0"));
    }
    let mut cand = Vec::new();
    for (i, d) in detections.iter().enumerate() {
        for (j, p) in predictions.iter().enumerate() {
            let dist = (d[0] - p[0]).hypot(d[1] - p[1]);
            if dist <= gate_radius {
                cand.push((dist, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut det_used = vec![false; detections.len()];
    let mut trk_used = vec![false; predictions.len()];
    let mut out = Assignment::default();
    for (_, i, j) in cand {
        if !det_used[i] && !trk_used[j] {
            det_used[i] = true;
            trk_used[j] = true;
            out.pairs.push((i, j));
        }
    }
    out.pairs.sort();
    out.unassigned_detections = (0..detections.len()).filter(|&i| !det_used[i]).collect();
    out.unassigned_tracks = (0..predictions.len()).filter(|&j| !trk_used[j]).collect();
    Ok(out)
}

/// One g-h (alpha-beta) filter step.
pub fn gh_update(track: &Track, measurement: [f64; 2], g: f64, h: f64, dt: f64) -> Result<Track> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be > 0"));
    }
    if !(0.0..=1.0).contains(&g) || !(0.0..=2.0).contains(&h) {
        return Err(Error::invalid("gains must satisfy 0 <= g <= 1, 0 <= h <= 2"));
    }
    let t = track.last_update + dt;
    let pred = track.predicted(t);
    let res = [measurement[0] - pred[0], measurement[1] - pred[1]];
    let mut out = track.clone();
    out.position = [pred[0] + g * res[0], pred[1] + g * res[1]];
    out.velocity = [track.velocity[0] + h / dt * res[0], track.velocity[1] + h / dt * res[1]];
    out.last_update = t;
    out.points.push(TrackPoint {
        t,
        position: out.position,
        speed: out.speed(),
    });
    out.misses = 0;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStamp {
    pub stage: String,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrtReport {
    pub drt_ms: f64,
    /// Time spent in each stage since the previous stamp.
    pub stages: Vec<StageStamp>,
}

/// Echo-to-display latency from ordered stage timestamps.
pub fn drt_accounting(stage_timestamps: &[StageStamp]) -> Result<DrtReport> {
    let Some(first) = stage_timestamps.first() else {
        return Ok(DrtReport {
            drt_ms: 0.0,
            stages: Vec::new(),
        });
    };
    let mut stages = Vec::new();
    for w in stage_timestamps.windows(2) {
        if w[1].ms < w[0].ms {
            return Err(Error::NonMonotone(format!("{} precedes {}", w[1].stage, w[0].stage)));
        }
        stages.push(StageStamp {
            stage: w[1].stage.clone(),
            ms: w[1].ms - w[0].ms,
        });
    }
    Ok(DrtReport {
        drt_ms: stage_timestamps.last().unwrap().ms - first.ms,
        stages,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CwsConfig {
    pub window: Window,
    pub cfar: CfarParams,
    /// Pulses in the per-cell recognition dwell; `None` classifies from
    /// the cell's slow-time record in the scan CPI itself.
    pub dwell_pulses: Option<usize>,
    pub gate_radius: f64,
    pub g: f64,
    pub h: f64,
    /// Time between frame starts, s.
    pub frame_interval: f64,
    pub classifier: ClassifierConfig,
}

impl Default for CwsConfig {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            cfar: CfarParams {
                pfa: 1e-6,
                guard: 2,
                train: 16,
                notch: Some(1),
                merge: true,
            },
            dwell_pulses: Some(2560),
            gate_radius: DEFAULT_GATE_M,
            g: 0.5,
            h: 0.1,
            frame_interval: 0.5,
            classifier: ClassifierConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedDetection {
    pub detection: Detection,
    pub features: FeatureVector,
    pub decision: CategoryDecision,
    pub track_id: u64,
    /// Start time of the slow-time record the decision was made from.
    pub dwell_t0: f64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackSnapshot {
    pub id: u64,
    pub position: [f64; 2],
    pub speed: f64,
    pub fused: CategoryDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePicture {
    pub frame: usize,
    pub t0: f64,
    pub detections: Vec<ClassifiedDetection>,
    pub tracks: Vec<TrackSnapshot>,
    pub warnings: Vec<SynthWarning>,
    /// Wall-clock latency; excluded from equality-sensitive outputs.
    pub drt: DrtReport,
}

impl FramePicture {
    /// Copy without wall-clock fields, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            drt: DrtReport {
                drt_ms: 0.0,
                stages: Vec::new(),
            },
            ..self.clone()
        }
    }
}

/// Stateful classify-while-scan pipeline over a scenario.
#[derive(Debug, Clone)]
pub struct CwsPipeline {
    pub scenario: Scenario,
    pub config: CwsConfig,
    pub tracks: Vec<Track>,
    next_id: u64,
    frame: usize,
    // reused between frames
    cube: echo_synth::IqCube,
    work: dsp::DopplerWork,
    power: Vec<f64>,
}

impl CwsPipeline {
    pub fn new(scenario: Scenario, config: CwsConfig) -> Result<Self> {
        scenario.validate()?;
        if config.dwell_pulses.is_some_and(|n| n < 2) || !(config.frame_interval > 0.0) {
            return Err(Error::invalid("dwell_pulses >= 2 and frame_interval > 0 required"));
        }
        let cube = echo_synth::IqCube::zeros(&scenario.radar.with_pulses(0), 0.0);
        Ok(Self {
            scenario,
            config,
            tracks: Vec::new(),
            next_id: 1,
            frame: 0,
            cube,
            work: dsp::DopplerWork::default(),
            power: Vec::new(),
        })
    }

    pub fn frame_index(&self) -> usize {
        self.frame
    }

    /// Process the next frame at `frame_index × frame_interval`.
    pub fn step(&mut self) -> Result<FramePicture> {
        let t0 = self.frame as f64 * self.config.frame_interval;
        self.process_frame(t0)
    }

    pub fn process_frame(&mut self, t0: f64) -> Result<FramePicture> {
        let clock = Instant::now();
        let stamp = |name: &str| StageStamp {
            stage: name.to_string(),
            ms: clock.elapsed().as_secs_f64() * 1e3,
        };
        let mut stamps = vec![stamp("echo")];
        let sc = &self.scenario;
        let radar = &sc.radar;
        let cfg = &self.config;

        echo_synth::synth_cpi_into(sc, t0, &mut self.cube)?;
        let cube = &self.cube;
        stamps.push(stamp("synthesis"));
        let map = self.work.process(cube, cfg.window, std::mem::take(&mut self.power));
        stamps.push(stamp("processing"));
        let raw = if radar.range_bins > cfg.cfar.train + 2 * cfg.cfar.guard {
            detector::cfar_detect_with(&map, &cfg.cfar)?
        } else {
            Vec::new()
        };
        // one recognition cell per range bin: keep the strongest return
        let mut per_bin: BTreeMap<usize, Detection> = BTreeMap::new();
        for d in raw {
            match per_bin.get(&d.range_bin) {
                Some(e) if e.snr >= d.snr => {}
                _ => {
                    per_bin.insert(d.range_bin, d);
                }
            }
        }
        stamps.push(stamp("detection"));

        let az = radar.beam_azimuth_at(t0);
        let mut classified = Vec::with_capacity(per_bin.len());
        for det in per_bin.into_values() {
            let r = det.range + 0.5 * map.range_bin_size;
            let position = [radar.position[0] + r * az.sin(), radar.position[1] + r * az.cos()];
            let dwell = match cfg.dwell_pulses {
                Some(n) => echo_synth::synth_cell_dwell(sc, det.range_bin, t0, n)?,
                None => CellDwell {
                    range_bin: det.range_bin,
                    samples: cube.column(det.range_bin),
                    prf: cube.prf,
                    t0,
                },
            };
            let features = atr::extract_features(&det, &dwell, &map, radar, &sc.budget, &cfg.classifier)?;
            let kin = self
                .tracks
                .iter()
                .map(|t| (t, dist(t.predicted(t0), position)))
                .filter(|(_, d)| *d <= cfg.gate_radius)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .and_then(|(t, _)| t.kinetics());
            let decision = atr::classify_with(&features, kin.as_ref(), &cfg.classifier);
            classified.push(ClassifiedDetection {
                detection: det,
                features,
                decision,
                track_id: 0,
                dwell_t0: dwell.t0,
                position,
            });
        }
        stamps.push(stamp("classification"));

        let positions: Vec<[f64; 2]> = classified.iter().map(|c| c.position).collect();
        let predictions: Vec<[f64; 2]> = self.tracks.iter().map(|t| t.predicted(t0)).collect();
        let asg = associate(&positions, &predictions, cfg.gate_radius)?;
        for &(i, j) in &asg.pairs {
            let dt = t0 - self.tracks[j].last_update;
            let mut t = if dt > 0.0 {
                gh_update(&self.tracks[j], positions[i], cfg.g, cfg.h, dt)?
            } else {
                self.tracks[j].clone()
            };
            t.push_label(classified[i].decision);
            classified[i].track_id = t.id;
            self.tracks[j] = t;
        }
        for &j in &asg.unassigned_tracks {
            self.tracks[j].misses += 1;
        }
        for &i in &asg.unassigned_detections {
            let mut t = Track::new(self.next_id, t0, positions[i]);
            self.next_id += 1;
            t.push_label(classified[i].decision);
            classified[i].track_id = t.id;
            self.tracks.push(t);
        }
        self.tracks.retain(|t| t.misses <= MAX_MISSES);
        stamps.push(stamp("display"));

        let drt = drt_accounting(&stamps)?;
        for t in self.tracks.iter_mut() {
            if t.misses == 0 {
                t.drt_history.push(drt.drt_ms);
            }
        }
        let tracks = self
            .tracks
            .iter()
            .map(|t| TrackSnapshot {
                id: t.id,
                position: t.position,
                speed: t.speed(),
                fused: t.fused_label,
            })
            .collect();
        let pic = FramePicture {
            frame: self.frame,
            t0,
            detections: classified,
            tracks,
            warnings: self.cube.warnings.clone(),
            drt,
        };
        self.power = map.power;
        self.frame += 1;
        Ok(pic)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Single classify-while-scan frame with a fresh track store.
pub fn cws_frame(scenario: &Scenario, t0: f64, config: &CwsConfig) -> Result<FramePicture> {
    let mut p = CwsPipeline::new(scenario.clone(), config.clone())?;
    p.process_frame(t0)
}
