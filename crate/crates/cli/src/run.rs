//! `run` and `sweep`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use dronerad::atr::sig6;
use dronerad::dsp::{range_doppler, spectrogram};
use dronerad::echo_synth::{synth_cell_dwell, synth_cpi};
use dronerad::export;
use dronerad::tracker::{CwsConfig, CwsPipeline, FramePicture};
use dronerad::tradestudy::{dwell_sweep, pulses_for_ms, SweepConfig};

use crate::{classifier_from, scenario_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Emit {
    Detections,
    Tracks,
    Frames,
    RdMaps,
    Spectrograms,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON, or `@six-target` / `@quad-rotor` for a built-in one.
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub frames: u64,
    /// Artifacts to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Emit::Detections, Emit::Tracks])]
    pub emit: Vec<Emit>,
    /// Pulses in the per-cell recognition dwell; 0 classifies from the scan
    /// CPI alone.
    #[arg(long)]
    pub dwell_pulses: Option<usize>,
    /// Classifier thresholds JSON.
    #[arg(long)]
    pub classifier: Option<PathBuf>,
    /// Fill the wall-clock `drt_ms` column of tracks.csv.
    #[arg(long)]
    pub with_drt: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario JSON with a bladed target, or `@quad-rotor`.
    pub scenario: PathBuf,
    /// CPI lengths in ms, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub cpis: Vec<f64>,
    /// CPIs averaged per row.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub classifier: Option<PathBuf>,
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))
}

pub fn cmd_run(args: &RunArgs, out: &Path, seed: Option<u64>, csv: bool) -> Result<()> {
    let sc = scenario_from(&args.scenario, seed)?;
    let mut cfg = CwsConfig {
        classifier: classifier_from(args.classifier.as_deref())?,
        ..CwsConfig::default()
    };
    if let Some(n) = args.dwell_pulses {
        cfg.dwell_pulses = (n > 0).then_some(n);
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let emit: BTreeSet<Emit> = args.emit.iter().copied().collect();

    let mut p = CwsPipeline::new(sc.clone(), cfg.clone())?;
    let mut frames: Vec<FramePicture> = Vec::with_capacity(args.frames as usize);
    for _ in 0..args.frames {
        let pic = p.step()?;
        if emit.contains(&Emit::RdMaps) {
            let map = range_doppler(&synth_cpi(&sc, pic.t0)?, cfg.window);
            write(out, &format!("rd_map_{:03}.csv", pic.frame), export::map_csv(&map))?;
            write(out, &format!("rd_map_{:03}.pgm", pic.frame), export::map_pgm(&map))?;
        }
        if emit.contains(&Emit::Spectrograms) {
            for c in &pic.detections {
                let n = cfg.dwell_pulses.unwrap_or(sc.radar.pulses_per_cpi);
                let dwell = synth_cell_dwell(&sc, c.detection.range_bin, pic.t0, n)?;
                let win = (n / 8).clamp(8, 128).min(n);
                let sg = spectrogram(&dwell.samples, dwell.prf, win, (win / 4).max(1))?;
                let stem = format!("spectrogram_{:03}_track{}", pic.frame, c.track_id);
                write(out, &format!("{stem}.csv"), export::spectrogram_csv(&sg))?;
                write(out, &format!("{stem}.pgm"), export::spectrogram_pgm(&sg))?;
            }
        }
        frames.push(pic);
    }

    if emit.contains(&Emit::Detections) {
        let dets = frames.iter().flat_map(|f| f.detections.iter().map(|c| &c.detection));
        write(out, "detections.csv", export::detections_csv(dets))?;
        write(out, "classifications.csv", export::classification_csv(&frames))?;
    }
    if emit.contains(&Emit::Tracks) {
        write(out, "tracks.csv", export::tracks_csv(&frames, args.with_drt))?;
    }
    if emit.contains(&Emit::Frames) {
        write(out, "frames.jsonl", export::frames_jsonl(&frames)?)?;
    }

    print!("{}", summary(&frames, csv));
    Ok(())
}

fn summary(frames: &[FramePicture], csv: bool) -> String {
    let mut s = String::new();
    let Some(last) = frames.last() else {
        return s;
    };
    if csv {
        s.push_str("track_id,category,confidence,x,y,speed\n");
        for t in &last.tracks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                t.id,
                t.fused.category,
                sig6(t.fused.confidence),
                sig6(t.position[0]),
                sig6(t.position[1]),
                sig6(t.speed)
            );
        }
        return s;
    }
    let detections: usize = frames.iter().map(|f| f.detections.len()).sum();
    let drt = frames.iter().map(|f| f.drt.drt_ms).sum::<f64>() / frames.len() as f64;
    let _ = writeln!(s, "frames      {}", frames.len());
    let _ = writeln!(s, "detections  {detections}");
    let _ = writeln!(s, "tracks      {}", last.tracks.len());
    let _ = writeln!(s, "mean DRT    {} ms", sig6(drt));
    for t in &last.tracks {
        let _ = writeln!(
            s,
            "  track {:>3}  {:<18} conf {:>8}  at ({}, {}) m  {} m/s",
            t.id,
            t.fused.category.to_string(),
            sig6(t.fused.confidence),
            sig6(t.position[0]),
            sig6(t.position[1]),
            sig6(t.speed)
        );
    }
    for w in frames.iter().flat_map(|f| &f.warnings) {
        let _ = writeln!(s, "warning: {w:?}");
    }
    s
}

pub fn cmd_sweep(args: &SweepArgs, out: &Path, seed: Option<u64>, csv: bool) -> Result<()> {
    if args.cpis.is_empty() {
        bail!("--cpis needs at least one CPI length");
    }
    let sc = scenario_from(&args.scenario, seed)?;
    let mut cfg = SweepConfig {
        classifier: classifier_from(args.classifier.as_deref())?,
        ..SweepConfig::default()
    };
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    let mut pulses = Vec::with_capacity(args.cpis.len());
    for &ms in &args.cpis {
        crate::require_positive("cpis", ms)?;
        pulses.push(pulses_for_ms(&sc, ms));
    }
    let rows = dwell_sweep(&sc, &pulses, &cfg)?;
    let text = export::sweep_csv(&rows);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(out, "sweep.csv", &text)?;
    if csv {
        print!("{text}");
    } else {
        println!("{:>10} {:>8} {:>12} detectable", "cpi_ms", "pulses", "ratio");
        for r in &rows {
            println!(
                "{:>10} {:>8} {:>12} {}",
                sig6(r.cpi_ms),
                r.pulses,
                sig6(r.ratio),
                r.detectable
            );
        }
    }
    Ok(())
}
