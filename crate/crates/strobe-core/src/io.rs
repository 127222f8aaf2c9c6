//! On-disk formats. Binary-bearing files are a short `key = value` text
//! header — floats printed in their exact shortest round-trip form —
//! terminated by a `---` line, then a little-endian payload whose length the
//! header declares. Text stays greppable, payloads stay exact, and every
//! file embeds the hash of the scenario that produced it.
//!
//! Complex payloads (echo cubes, images) narrow to f32 pairs on disk, the
//! one deliberately lossy step; re-reading a file and writing it again
//! reproduces it byte for byte. Plane phases and steering angles stay f64.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::codebook::{AtomGrid, TxCodebook};
use crate::imaging::{GridSpec, ImageGrid};
use crate::perturbation::DegradationPrediction;
use crate::plane::{PlaneDesign, PlaneSpec, ReflectionCodebook};
use crate::signal::{EchoCube, FastTimeGrid};
use crate::tomography::{resolution_bounds, WavenumberCoverage};
use crate::C64;

const MARKER: &[u8] = b"---\n";

/// Ordered header under construction. Values go through `Display`, which
/// for floats is the shortest exactly round-tripping decimal.
struct Header {
    text: String,
}

impl Header {
    fn new(format: &str) -> Self {
        let mut h = Header { text: String::new() };
        h.push("format", format);
        h
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(&mut self.text, "{key} = {value}").unwrap();
    }

    fn into_file(mut self, path: &Path, payload: &[&[u8]]) -> crate::Result<()> {
        self.text.push_str(std::str::from_utf8(MARKER).unwrap());
        let mut bytes = self.text.into_bytes();
        for block in payload {
            bytes.extend_from_slice(block);
        }
        std::fs::write(path, bytes).map_err(|e| file_err(path, e))
    }
}

fn file_err(path: &Path, e: impl std::fmt::Display) -> crate::Error {
    crate::Error::Io(format!("{}: {e}", path.display()))
}

/// A parsed header plus the raw payload that followed it.
struct Parsed {
    fields: BTreeMap<String, String>,
    payload: Vec<u8>,
    path: String,
}

impl Parsed {
    fn read(path: &Path, format: &str) -> crate::Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| file_err(path, e))?;
        let split = bytes
            .windows(MARKER.len())
            .position(|w| w == MARKER)
            .filter(|&p| p == 0 || bytes[p - 1] == b'\n')
            .ok_or_else(|| file_err(path, "no `---` header terminator"))?;
        let header = std::str::from_utf8(&bytes[..split])
            .map_err(|_| file_err(path, "header is not UTF-8"))?;
        let mut fields = BTreeMap::new();
        for line in header.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| file_err(path, format!("malformed header line `{line}`")))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let parsed = Parsed {
            fields,
            payload: bytes[split + MARKER.len()..].to_vec(),
            path: path.display().to_string(),
        };
        let got = parsed.str("format")?;
        if got != format {
            return Err(crate::Error::Io(format!(
                "{}: format `{got}`, expected `{format}`",
                parsed.path
            )));
        }
        Ok(parsed)
    }

    fn str(&self, key: &str) -> crate::Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| crate::Error::Io(format!("{}: missing header field `{key}`", self.path)))
    }

    fn f64(&self, key: &str) -> crate::Result<f64> {
        self.str(key)?
            .parse()
            .map_err(|_| crate::Error::Io(format!("{}: field `{key}` is not a number", self.path)))
    }

    fn usize(&self, key: &str) -> crate::Result<usize> {
        self.str(key)?
            .parse()
            .map_err(|_| crate::Error::Io(format!("{}: field `{key}` is not an index", self.path)))
    }

    fn u64(&self, key: &str) -> crate::Result<u64> {
        self.str(key)?
            .parse()
            .map_err(|_| crate::Error::Io(format!("{}: field `{key}` is not a u64", self.path)))
    }

    fn expect_payload(&self, bytes: usize) -> crate::Result<()> {
        if self.payload.len() != bytes {
            return Err(crate::Error::Io(format!(
                "{}: payload is {} bytes, header declares {bytes}",
                self.path,
                self.payload.len()
            )));
        }
        Ok(())
    }
}

fn f64s_le(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn c64s_le_f32(values: impl Iterator<Item = C64>) -> Vec<u8> {
    let mut out = Vec::new();
    for v in values {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out
}

fn read_f64s(buf: &[u8], count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| f64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().unwrap()))
        .collect()
}

fn read_c64s_f32(buf: &[u8], count: usize) -> Vec<C64> {
    (0..count)
        .map(|i| {
            let re = f32::from_le_bytes(buf[8 * i..8 * i + 4].try_into().unwrap());
            let im = f32::from_le_bytes(buf[8 * i + 4..8 * i + 8].try_into().unwrap());
            C64::new(re as f64, im as f64)
        })
        .collect()
}

// ---- plane ----

pub fn write_plane(path: &Path, design: &PlaneDesign, scenario_hash: &str) -> crate::Result<()> {
    let mut h = Header::new("strobe-plane/1");
    h.push("scenario_hash", scenario_hash);
    h.push("pitch_m", design.grid.pitch);
    h.push("origin_m", design.grid.origin);
    h.push("atoms", design.grid.count);
    h.push("lambda0_m", design.lambda0);
    match &design.spec {
        PlaneSpec::Stroboscopic { theta_i_bar, reflection, period, gamma } => {
            h.push("mode", "stroboscopic");
            h.push("theta_i_bar_rad", theta_i_bar);
            h.push("reflection_center_rad", reflection.center);
            h.push("reflection_span_rad", reflection.span);
            h.push("reflection_count", reflection.count);
            h.push("period_m", period);
            h.push("gamma_rad", gamma);
        }
        PlaneSpec::Lens { source, target } => {
            h.push("mode", "lens");
            h.push("source_x_m", source[0]);
            h.push("source_y_m", source[1]);
            h.push("target_x_m", target[0]);
            h.push("target_y_m", target[1]);
        }
        PlaneSpec::Mirror { alpha } => {
            h.push("mode", "mirror");
            h.push("alpha_rad", alpha);
        }
    }
    h.push("phases", design.phases.len());
    h.push("offsets", design.offsets.len());
    h.into_file(path, &[&f64s_le(&design.phases), &f64s_le(&design.offsets)])
}

/// Read a plane file back; returns the design and the scenario hash it was
/// built from. Bit-exact against what [`write_plane`] wrote.
pub fn read_plane(path: &Path) -> crate::Result<(PlaneDesign, String)> {
    let p = Parsed::read(path, "strobe-plane/1")?;
    let grid = AtomGrid {
        pitch: p.f64("pitch_m")?,
        origin: p.f64("origin_m")?,
        count: p.usize("atoms")?,
    };
    let spec = match p.str("mode")? {
        "stroboscopic" => PlaneSpec::Stroboscopic {
            theta_i_bar: p.f64("theta_i_bar_rad")?,
            reflection: ReflectionCodebook {
                center: p.f64("reflection_center_rad")?,
                span: p.f64("reflection_span_rad")?,
                count: p.usize("reflection_count")?,
            },
            period: p.f64("period_m")?,
            gamma: p.f64("gamma_rad")?,
        },
        "lens" => PlaneSpec::Lens {
            source: [p.f64("source_x_m")?, p.f64("source_y_m")?],
            target: [p.f64("target_x_m")?, p.f64("target_y_m")?],
        },
        "mirror" => PlaneSpec::Mirror { alpha: p.f64("alpha_rad")? },
        other => return Err(crate::Error::Io(format!("{}: unknown mode `{other}`", p.path))),
    };
    let n_phases = p.usize("phases")?;
    let n_offsets = p.usize("offsets")?;
    p.expect_payload(8 * (n_phases + n_offsets))?;
    let phases = read_f64s(&p.payload, n_phases);
    let offsets = read_f64s(&p.payload[8 * n_phases..], n_offsets);
    let hash = p.str("scenario_hash")?.to_string();
    Ok((PlaneDesign { grid, lambda0: p.f64("lambda0_m")?, spec, phases, offsets }, hash))
}

// ---- echo cube ----

pub fn write_cube(path: &Path, cube: &EchoCube, scenario_hash: &str) -> crate::Result<()> {
    let mut h = Header::new("strobe-cube/1");
    h.push("scenario_hash", scenario_hash);
    h.push("snapshots", cube.snapshots());
    h.push("samples", cube.fast_time.count);
    h.push("sweeps", cube.sweeps);
    h.push("seed", cube.seed);
    h.push("noise_power", cube.noise_power);
    h.push("narrowband_margin", cube.narrowband_margin);
    h.push("t_start_s", cube.fast_time.start);
    h.push("t_step_s", cube.fast_time.step);
    h.push("f_s_hz", 1.0 / cube.fast_time.step);
    // Codebook reference: count plus the end angles; the full per-snapshot
    // steering sequence rides in the payload at full precision.
    h.push("angles", cube.angles.len());
    h.push("angle_first_rad", cube.angles.first().copied().unwrap_or(f64::NAN));
    h.push("angle_last_rad", cube.angles.last().copied().unwrap_or(f64::NAN));
    let samples = c64s_le_f32(cube.data.iter().copied());
    h.into_file(path, &[&f64s_le(&cube.angles), &samples])
}

pub fn read_cube(path: &Path) -> crate::Result<(EchoCube, String)> {
    let p = Parsed::read(path, "strobe-cube/1")?;
    let snapshots = p.usize("snapshots")?;
    let samples = p.usize("samples")?;
    let n_angles = p.usize("angles")?;
    p.expect_payload(8 * n_angles + 8 * snapshots * samples)?;
    let angles = read_f64s(&p.payload, n_angles);
    let values = read_c64s_f32(&p.payload[8 * n_angles..], snapshots * samples);
    let data = Array2::from_shape_vec((snapshots, samples), values)
        .map_err(|e| crate::Error::Io(format!("{}: {e}", p.path)))?;
    let cube = EchoCube {
        data,
        fast_time: FastTimeGrid {
            start: p.f64("t_start_s")?,
            step: p.f64("t_step_s")?,
            count: samples,
        },
        angles,
        sweeps: p.usize("sweeps")?,
        seed: p.u64("seed")?,
        noise_power: p.f64("noise_power")?,
        narrowband_margin: p.f64("narrowband_margin")?,
    };
    let hash = p.str("scenario_hash")?.to_string();
    Ok((cube, hash))
}

// ---- image ----

pub fn write_image(
    path: &Path,
    image: &ImageGrid,
    scenario_hash: &str,
    tag: &str,
) -> crate::Result<()> {
    let mut h = Header::new("strobe-image/1");
    h.push("scenario_hash", scenario_hash);
    h.push("tag", tag);
    h.push("origin_x_m", image.spec.origin[0]);
    h.push("origin_y_m", image.spec.origin[1]);
    h.push("pitch_x_m", image.spec.pitch[0]);
    h.push("pitch_y_m", image.spec.pitch[1]);
    h.push("size_x", image.spec.size[0]);
    h.push("size_y", image.spec.size[1]);
    h.push("skipped_terms", image.skipped_terms);
    // Row-major with x as the slow index, matching the in-memory layout.
    let values = c64s_le_f32(image.values.iter().copied());
    h.into_file(path, &[&values])
}

pub fn read_image(path: &Path) -> crate::Result<(ImageGrid, String, String)> {
    let p = Parsed::read(path, "strobe-image/1")?;
    let size = [p.usize("size_x")?, p.usize("size_y")?];
    p.expect_payload(8 * size[0] * size[1])?;
    let values = read_c64s_f32(&p.payload, size[0] * size[1]);
    let data = Array2::from_shape_vec((size[0], size[1]), values)
        .map_err(|e| crate::Error::Io(format!("{}: {e}", p.path)))?;
    let image = ImageGrid {
        spec: GridSpec {
            origin: [p.f64("origin_x_m")?, p.f64("origin_y_m")?],
            pitch: [p.f64("pitch_x_m")?, p.f64("pitch_y_m")?],
            size,
        },
        values: data,
        skipped_terms: p.usize("skipped_terms")?,
    };
    Ok((image, p.str("scenario_hash")?.to_string(), p.str("tag")?.to_string()))
}

/// Long-form magnitude table: one `x,y,|v|` row per pixel, x varying slowest.
pub fn write_magnitude_csv(path: &Path, image: &ImageGrid) -> crate::Result<()> {
    let mut out = String::from("x_m,y_m,magnitude\n");
    for ix in 0..image.spec.size[0] {
        for iy in 0..image.spec.size[1] {
            let pos = image.spec.position(ix, iy);
            writeln!(&mut out, "{},{},{}", pos[0], pos[1], image.values[(ix, iy)].norm()).unwrap();
        }
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

/// 8-bit grayscale quick-look: peak-normalized magnitude in dB, `floor_db`
/// (negative, e.g. −40) mapping to black and the peak to white. Rows run
/// from the top, so +y points up in the picture.
pub fn write_pgm(path: &Path, image: &ImageGrid, floor_db: f64) -> crate::Result<()> {
    let (w, hgt) = (image.spec.size[0], image.spec.size[1]);
    let (_, peak) = image.peak();
    let mut bytes = format!("P5\n{w} {hgt}\n255\n").into_bytes();
    for iy in (0..hgt).rev() {
        for ix in 0..w {
            let m = image.values[(ix, iy)].norm();
            let level = if peak > 0.0 && m > 0.0 {
                let db = 20.0 * (m / peak).log10();
                (1.0 - db / floor_db).clamp(0.0, 1.0)
            } else {
                0.0
            };
            bytes.push((level * 255.0).round() as u8);
        }
    }
    std::fs::write(path, bytes).map_err(|e| file_err(path, e))
}

// ---- records (pure text) ----

/// Tx codebook record: angles in degrees plus the sampling-limit compliance
/// flag (`limit_rad` from the angular sampling analysis).
pub fn write_codebook(path: &Path, cb: &TxCodebook, limit_rad: f64) -> crate::Result<()> {
    let step = if cb.angles.len() > 1 { cb.angles[1] - cb.angles[0] } else { 0.0 };
    let mut h = Header::new("strobe-codebook/1");
    h.push("center_deg", cb.center.to_degrees());
    h.push("span_deg", cb.span.to_degrees());
    h.push("beams", cb.len());
    h.push("step_deg", step.to_degrees());
    h.push("step_limit_deg", limit_rad.to_degrees());
    h.push("compliant", step <= limit_rad);
    let list = cb
        .angles
        .iter()
        .map(|a| a.to_degrees().to_string())
        .collect::<Vec<_>>()
        .join(",");
    h.push("angles_deg", list);
    std::fs::write(path, h.text).map_err(|e| file_err(path, e))
}

/// Coverage samples as CSV, one wavevector per row.
pub fn write_coverage_csv(path: &Path, cov: &WavenumberCoverage) -> crate::Result<()> {
    let mut out = String::from("k_x_radpm,k_y_radpm\n");
    for s in &cov.samples {
        writeln!(&mut out, "{},{}", s[0], s[1]).unwrap();
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

/// Coverage summary record: extents, resolution bounds, occupancy, and the
/// provenance that produced them.
pub fn write_coverage_summary(path: &Path, cov: &WavenumberCoverage) -> crate::Result<()> {
    let (dx, dy) = resolution_bounds(cov);
    let mut h = Header::new("strobe-coverage/1");
    h.push("samples", cov.samples.len());
    h.push("extent_kx_radpm", cov.extent_x);
    h.push("extent_ky_radpm", cov.extent_y);
    h.push("bound_x_m", dx);
    h.push("bound_y_m", dy);
    h.push("occupancy", cov.occupancy);
    h.push("carrier_hz", cov.provenance.carrier);
    h.push("bandwidth_hz", cov.provenance.bandwidth);
    h.push("freq_samples", cov.provenance.freq_samples);
    h.push("source_x_m", cov.provenance.source[0]);
    h.push("source_y_m", cov.provenance.source[1]);
    h.push("target_x_m", cov.provenance.target[0]);
    h.push("target_y_m", cov.provenance.target[1]);
    h.push("element_sets", cov.provenance.sets.len());
    std::fs::write(path, h.text).map_err(|e| file_err(path, e))
}

/// Perturbation study table: per-snapshot distance errors and weights, the
/// aggregate prediction, and (when available) the shift a simulation
/// actually measured.
pub fn write_perturbation_report(
    path: &Path,
    pred: &DegradationPrediction,
    predicted_shift_m: f64,
    simulated_shift_m: Option<f64>,
) -> crate::Result<()> {
    let mut h = Header::new("strobe-perturbation/1");
    h.push("snapshots", pred.angles.len());
    h.push("mean_distance_error_m", pred.mean_distance_error());
    h.push("focusing_loss_db", pred.focusing_loss_db());
    h.push("predicted_shift_m", predicted_shift_m);
    match simulated_shift_m {
        Some(s) => h.push("simulated_shift_m", s),
        None => h.push("simulated_shift_m", "-"),
    }
    let mut out = h.text;
    out.push_str("l,theta_deg,distance_error_m,weight\n");
    for (l, ((theta, err), w)) in pred
        .angles
        .iter()
        .zip(&pred.distance_errors)
        .zip(&pred.weights)
        .enumerate()
    {
        writeln!(&mut out, "{l},{},{err},{w}", theta.to_degrees()).unwrap();
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}
