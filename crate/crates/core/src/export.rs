//! Text and binary artifacts: CSV tables, 16-bit PGM images, JSON lines
//! and raw IQ dumps. Numbers are written with six significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::atr::{sig6, FeatureVector};
use crate::detector::Detection;
use crate::dsp::{to_db, RangeDopplerMap, Spectrogram};
use crate::echo_synth::IqCube;
use crate::tracker::FramePicture;
use crate::tradestudy::SweepRow;
use crate::Result;

pub const DETECTIONS_HEADER: &str = "t0,beam_az,range_m,speed_mps,snr_db,dscr_db,detector";
pub const TRACKS_HEADER: &str = "frame,t,track_id,x,y,speed,category,confidence,drt_ms";
pub const SWEEP_HEADER: &str = "cpi_ms,ratio,detectable";

pub fn detection_row(d: &Detection) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        sig6(d.t0),
        sig6(d.beam_azimuth),
        sig6(d.range),
        sig6(d.radial_speed),
        sig6(d.snr),
        d.dscr.map(sig6).unwrap_or_default(),
        d.detector.as_str()
    )
}

pub fn detections_csv<'a>(detections: impl IntoIterator<Item = &'a Detection>) -> String {
    let mut s = String::from(DETECTIONS_HEADER);
    s.push('\n');
    for d in detections {
        s.push_str(&detection_row(d));
        s.push('\n');
    }
    s
}

/// Track log. `drt_ms` is left empty unless `with_drt`, keeping the file
/// reproducible byte for byte.
pub fn tracks_csv(frames: &[FramePicture], with_drt: bool) -> String {
    let mut s = String::from(TRACKS_HEADER);
    s.push('\n');
    for f in frames {
        let drt = if with_drt { sig6(f.drt.drt_ms) } else { String::new() };
        for t in &f.tracks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                f.frame,
                sig6(f.t0),
                t.id,
                sig6(t.position[0]),
                sig6(t.position[1]),
                sig6(t.speed),
                t.fused.category,
                sig6(t.fused.confidence),
                drt
            );
        }
    }
    s
}

/// Per-detection classification log.
pub fn classification_csv(frames: &[FramePicture]) -> String {
    let mut s = format!("track_id,t,category,confidence,{}\n", FeatureVector::CSV_HEADER);
    for f in frames {
        for c in &f.detections {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.track_id,
                sig6(f.t0),
                c.decision.category,
                sig6(c.decision.confidence),
                c.features.csv_fields().join(",")
            );
        }
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{}", sig6(r.cpi_ms), sig6(r.ratio), r.detectable);
    }
    s
}

/// Range-Doppler map in dB; header row holds the Doppler axis (Hz).
pub fn map_csv(map: &RangeDopplerMap) -> String {
    let mut s = String::from("range_m");
    for d in 0..map.doppler_bins {
        let _ = write!(s, ",{}", sig6(map.doppler_hz(d)));
    }
    s.push('\n');
    for r in 0..map.range_bins {
        let _ = write!(s, "{}", sig6(r as f64 * map.range_bin_size));
        for d in 0..map.doppler_bins {
            let _ = write!(s, ",{}", sig6(map.magnitude_db(r, d)));
        }
        s.push('\n');
    }
    s
}

/// Spectrogram in dB; header row holds the frequency axis (Hz).
pub fn spectrogram_csv(sg: &Spectrogram) -> String {
    let mut s = String::from("t_s");
    for k in 0..sg.frequency_bins {
        let _ = write!(s, ",{}", sig6(sg.frequency_hz(k)));
    }
    s.push('\n');
    for f in 0..sg.frames {
        let _ = write!(s, "{}", sig6(f as f64 * sg.frame_hop));
        for k in 0..sg.frequency_bins {
            let _ = write!(s, ",{}", sig6(sg.magnitude_db(f, k)));
        }
        s.push('\n');
    }
    s
}

/// Binary 16-bit PGM of dB values scaled from `floor` (black) to the peak.
pub fn pgm16(width: usize, height: usize, db: &[f64], floor: f64) -> Vec<u8> {
    let peak = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (peak - floor).max(1e-12);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(db.len() * 2);
    for &v in db {
        let x = ((v - floor) / span).clamp(0.0, 1.0);
        let q = (x * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Map image: one row per range bin, Doppler across.
pub fn map_pgm(map: &RangeDopplerMap) -> Vec<u8> {
    let db: Vec<f64> = map.power.iter().map(|&p| to_db(p)).collect();
    pgm16(map.doppler_bins, map.range_bins, &db, map.noise_floor_estimate)
}

/// Spectrogram image: one row per frame.
pub fn spectrogram_pgm(sg: &Spectrogram) -> Vec<u8> {
    let db: Vec<f64> = sg.power.iter().map(|&p| to_db(p)).collect();
    let mut sorted = db.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    pgm16(sg.frequency_bins, sg.frames, &db, floor)
}

/// One JSON object per frame, wall-clock fields included.
pub fn frames_jsonl(frames: &[FramePicture]) -> Result<String> {
    let mut s = String::new();
    for f in frames {
        s.push_str(&serde_json::to_string(f)?);
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct CubeSidecar<'a> {
    format: &'static str,
    pulses: usize,
    range_bins: usize,
    t0: f64,
    prf: f64,
    range_bin_size: f64,
    beam_azimuth: f64,
    wavelength: f64,
    warnings: &'a [crate::echo_synth::SynthWarning],
}

/// Little-endian f32 interleaved (re, im), pulse-major.
pub fn cube_bytes(cube: &IqCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(cube.samples.len() * 8);
    for v in &cube.samples {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out
}

pub fn cube_sidecar(cube: &IqCube) -> Result<String> {
    let meta = CubeSidecar {
        format: "f32le interleaved re,im; row-major pulses x range_bins",
        pulses: cube.pulses,
        range_bins: cube.range_bins,
        t0: cube.t0,
        prf: cube.prf,
        range_bin_size: cube.range_bin_size,
        beam_azimuth: cube.beam_azimuth,
        wavelength: cube.wavelength,
        warnings: &cube.warnings,
    };
    Ok(serde_json::to_string_pretty(&meta)?)
}

/// Write `<stem>.iq` and `<stem>.json` into `dir`.
pub fn write_cube(dir: &Path, stem: &str, cube: &IqCube) -> Result<()> {
    let mut f = std::fs::File::create(dir.join(format!("{stem}.iq")))?;
    f.write_all(&cube_bytes(cube))?;
    std::fs::write(dir.join(format!("{stem}.json")), cube_sidecar(cube)?)?;
    Ok(())
}

/// Read back a cube dump written by [`write_cube`].
pub fn read_cube_samples(bytes: &[u8]) -> Vec<crate::Complex64> {
    bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            crate::Complex64::new(re as f64, im as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::RadarParams;
    use crate::Complex64;

    #[test]
    fn pgm_header_and_range() {
        let img = pgm16(2, 1, &[-10.0, 30.0], 0.0);
        let head = b"P5\n2 1\n65535\n";
        assert_eq!(&img[..head.len()], head);
        assert_eq!(&img[head.len()..], &[0, 0, 255, 255]);
    }

    #[test]
    fn cube_round_trip() {
        let radar = RadarParams::new(1e10, 1000.0, 3, 1e6, 2);
        let mut c = IqCube::zeros(&radar, 0.5);
        *c.get_mut(1, 1) = Complex64::new(1.5, -2.25);
        let back = read_cube_samples(&cube_bytes(&c));
        assert_eq!(back, c.samples);
        assert!(cube_sidecar(&c).unwrap().contains("\"pulses\": 3"));
    }
}
