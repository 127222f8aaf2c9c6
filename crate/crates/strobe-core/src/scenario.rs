//! Reproducible run descriptions. A scenario file pins every knob of a run
//! in one structured text (TOML) document; the same scenario and seed must
//! produce bit-identical outputs, so every output file embeds the scenario's
//! SHA-256 for provenance.
//!
//! Field names carry explicit units (`carrier_ghz`, `pri_us`, ...) because
//! unit slips are the dominant bug class in this domain; conversion to SI
//! happens in exactly one place, the accessor methods below. Sections are
//! all-or-nothing: omit `[scene]` entirely to get the built-in defaults, but
//! a partially filled section is rejected naming the missing field. Use
//! `--override` (→ [`Scenario::with_override`]) for single-field tweaks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codebook::{SourceConfig, TxCodebook};
use crate::geometry::{SceneGeometry, Target, TargetSet};
use crate::imaging::{GridSpec, Window};
use crate::perturbation::{PerturbationSpec, MAX_TILT};
use crate::plane::{design_reflection_span, PlaneSpec, ReflectionCodebook};
use crate::signal::{Interpolation, SynthesisParams};

/// Full description of a run. The defaults reproduce the reference design:
/// 77 GHz carrier, 500 MHz band, source 5 m above the plane at 20 m/s,
/// a 60-beam sweep of 5° around 40°, a 2 m pattern period quantized on 13
/// reflection angles, and a 1×1 m region of interest centred at (13.8, 11).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default)]
    pub scene: SceneSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub tx_codebook: TxSection,
    #[serde(default)]
    pub reflection: ReflectionSection,
    #[serde(default)]
    pub roi: RoiSection,
    #[serde(default = "default_targets")]
    pub targets: Vec<TargetSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
}

fn default_seed() -> u64 {
    1
}

fn default_sweeps() -> usize {
    1
}

fn default_targets() -> Vec<TargetSection> {
    vec![TargetSection { x_m: 13.8, y_m: 11.0, rcs_m2: 1.0, phase_rad: 0.0 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub source_height_m: f64,
    pub source_start_x_m: f64,
    pub speed_mps: f64,
    pub pri_us: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        SceneSection { source_height_m: 5.0, source_start_x_m: 0.0, speed_mps: 20.0, pri_us: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    /// Broadside −3 dB beamwidth; the physical aperture follows from it.
    pub beamwidth_deg: f64,
    pub pulse_duration_us: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection {
            carrier_ghz: 77.0,
            bandwidth_mhz: 500.0,
            beamwidth_deg: 0.5,
            pulse_duration_us: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSection {
    pub center_deg: f64,
    pub span_deg: f64,
    /// Explicit angular step; give at most one of `step_deg` and `beams`.
    #[serde(default)]
    pub step_deg: Option<f64>,
    /// Beam count across the span; both absent defaults to 60 beams.
    #[serde(default)]
    pub beams: Option<usize>,
}

impl Default for TxSection {
    fn default() -> Self {
        TxSection { center_deg: 40.0, span_deg: 5.0, step_deg: None, beams: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneMode {
    Stroboscopic,
    Lens,
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaPolicy {
    /// Use `gamma_rad` as given.
    Fixed,
    /// Draw γ per sweep from the scenario seed (sweep-combination studies).
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionSection {
    pub period_m: f64,
    pub codebook_size: usize,
    pub mode: PlaneMode,
    pub gamma_policy: GammaPolicy,
    pub gamma_rad: f64,
    /// Phase slope per atom for mirror mode; 0 is a plain specular mirror.
    pub mirror_alpha_rad: f64,
}

impl Default for ReflectionSection {
    fn default() -> Self {
        ReflectionSection {
            period_m: 2.0,
            codebook_size: 13,
            mode: PlaneMode::Stroboscopic,
            gamma_policy: GammaPolicy::Fixed,
            gamma_rad: 0.0,
            mirror_alpha_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiSection {
    pub center_x_m: f64,
    pub center_y_m: f64,
    pub extent_x_m: f64,
    pub extent_y_m: f64,
    /// Image pixel pitch (both axes).
    pub pixel_m: f64,
}

impl Default for RoiSection {
    fn default() -> Self {
        RoiSection {
            center_x_m: 13.8,
            center_y_m: 11.0,
            extent_x_m: 1.0,
            extent_y_m: 1.0,
            pixel_m: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default = "default_rcs")]
    pub rcs_m2: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

fn default_rcs() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Complex noise power per fast-time sample (linear); 0 disables noise.
    #[serde(default)]
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpKind {
    Lanczos8,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Fast-time rate as a multiple of B (complex Nyquist needs ≥ 2).
    pub oversample: f64,
    /// Dominance factor demanded of the narrowband margin before warning.
    pub narrowband_factor: f64,
    pub interpolation: InterpKind,
    /// Extra plane coverage on each side, in pattern periods.
    pub plane_margin_periods: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            oversample: 2.0,
            narrowband_factor: 10.0,
            interpolation: InterpKind::Lanczos8,
            plane_margin_periods: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    #[serde(default)]
    pub height_error_m: f64,
    #[serde(default)]
    pub tilt_deg: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: default_seed(),
            sweeps: default_sweeps(),
            scene: SceneSection::default(),
            source: SourceSection::default(),
            tx_codebook: TxSection::default(),
            reflection: ReflectionSection::default(),
            roi: RoiSection::default(),
            targets: default_targets(),
            noise: NoiseSection::default(),
            sim: SimSection::default(),
            perturbation: PerturbationSection::default(),
        }
    }
}

impl Scenario {
    /// The reference parameter set, spelled out (same as `Default`).
    pub fn paper_defaults() -> Self {
        Scenario::default()
    }

    pub fn from_toml_str(text: &str) -> crate::Result<Self> {
        let sc: Scenario = toml::from_str(text)
            .map_err(|e| crate::Error::Validation(format!("scenario parse: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &std::path::Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical serialization (struct field order); also the hash input.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded. Embedded in
    /// every output file so artifacts can be traced to their inputs.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Apply one `key.path=value` override. The path walks the TOML tree
    /// (array indices are numeric components, e.g. `targets.0.rcs_m2`); the
    /// value is parsed as a TOML literal, falling back to a bare string so
    /// `reflection.mode=lens` works unquoted.
    pub fn with_override(&self, key: &str, value: &str) -> crate::Result<Self> {
        let mut root = toml::Value::try_from(self)
            .map_err(|e| crate::Error::Validation(format!("scenario serialize: {e}")))?;
        let mut node = &mut root;
        for part in key.split('.') {
            node = descend(node, part, key)?;
        }
        *node = parse_toml_literal(value);
        let sc: Scenario = root
            .try_into()
            .map_err(|e| crate::Error::Validation(format!("override `{key}={value}`: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    /// Reject physically inconsistent scenarios with messages that name the
    /// offending field and say what to change.
    pub fn validate(&self) -> crate::Result<()> {
        let err = |m: String| Err(crate::Error::Validation(m));
        if self.sweeps == 0 {
            return err("sweeps: need at least one sweep".into());
        }
        if !(self.scene.source_height_m > 0.0) {
            return err("scene.source_height_m: source must sit above the plane".into());
        }
        if !(self.scene.pri_us > 0.0) {
            return err("scene.pri_us: pulse repetition interval must be positive".into());
        }
        if self.scene.speed_mps < 0.0 {
            return err("scene.speed_mps: negative speed — flip source_start_x instead".into());
        }
        if !(self.source.carrier_ghz > 0.0) {
            return err("source.carrier_ghz: carrier must be positive".into());
        }
        if !(self.source.bandwidth_mhz > 0.0) {
            return err("source.bandwidth_mhz: zero bandwidth cannot resolve range".into());
        }
        if !(self.source.beamwidth_deg > 0.0) {
            return err("source.beamwidth_deg: beamwidth must be positive".into());
        }
        if !(self.source.pulse_duration_us > 0.0) {
            return err("source.pulse_duration_us: pulse duration must be positive".into());
        }
        if self.source.pulse_duration_us > self.scene.pri_us {
            return err(format!(
                "source.pulse_duration_us: pulse ({} µs) exceeds the PRI ({} µs); echoes would straddle snapshots",
                self.source.pulse_duration_us, self.scene.pri_us
            ));
        }
        if !(self.tx_codebook.span_deg > 0.0) {
            return err("tx_codebook.span_deg: sweep span must be positive".into());
        }
        if self.tx_codebook.step_deg.is_some() && self.tx_codebook.beams.is_some() {
            return err("tx_codebook: give step_deg or beams, not both".into());
        }
        if let Some(step) = self.tx_codebook.step_deg {
            if !(step > 0.0) || step > self.tx_codebook.span_deg {
                return err("tx_codebook.step_deg: step must be positive and at most the span".into());
            }
        }
        if self.tx_codebook.beams == Some(0) {
            return err("tx_codebook.beams: need at least one beam".into());
        }
        let edge = (self.tx_codebook.center_deg.abs() + self.tx_codebook.span_deg / 2.0).to_radians();
        if edge >= std::f64::consts::FRAC_PI_2 {
            return err("tx_codebook: sweep reaches ±90°, grazing the plane".into());
        }
        if !(self.reflection.period_m > 0.0) {
            return err("reflection.period_m: pattern period must be positive".into());
        }
        if self.reflection.codebook_size == 0 {
            return err("reflection.codebook_size: need at least one reflection angle".into());
        }
        if !self.reflection.gamma_rad.is_finite() || !self.reflection.mirror_alpha_rad.is_finite() {
            return err("reflection: gamma_rad and mirror_alpha_rad must be finite".into());
        }
        if self.roi.center_y_m - self.roi.extent_y_m / 2.0 <= 0.0 {
            return err(format!(
                "roi: region of interest reaches y = {} m, on or behind the reflection plane",
                self.roi.center_y_m - self.roi.extent_y_m / 2.0
            ));
        }
        if !(self.roi.pixel_m > 0.0) {
            return err("roi.pixel_m: pixel pitch must be positive".into());
        }
        if self.roi.extent_x_m < 0.0 || self.roi.extent_y_m < 0.0 {
            return err("roi: extents cannot be negative".into());
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.y_m <= 0.0 {
                return err(format!(
                    "targets[{i}].y_m: target lies on or below the reflection plane"
                ));
            }
            if t.rcs_m2 < 0.0 {
                return err(format!("targets[{i}].rcs_m2: radar cross section cannot be negative"));
            }
        }
        if self.noise.power < 0.0 {
            return err("noise.power: noise power cannot be negative".into());
        }
        if self.sim.oversample < 2.0 {
            return err("sim.oversample: below 2 the complex envelope aliases in fast time".into());
        }
        if !(self.sim.narrowband_factor > 0.0) {
            return err("sim.narrowband_factor: dominance factor must be positive".into());
        }
        if self.sim.plane_margin_periods < 0.0 {
            return err("sim.plane_margin_periods: margin cannot be negative".into());
        }
        if self.perturbation.tilt_deg.to_radians().abs() >= MAX_TILT {
            return err(format!(
                "perturbation.tilt_deg: |{}|° is outside the small-tilt regime (< {}°)",
                self.perturbation.tilt_deg,
                MAX_TILT.to_degrees()
            ));
        }
        Ok(())
    }

    // ---- SI accessors: the only unit conversions in the crate ----

    pub fn scene_geometry(&self) -> SceneGeometry {
        SceneGeometry {
            source_height: self.scene.source_height_m,
            source_start_x: self.scene.source_start_x_m,
            speed: self.scene.speed_mps,
            pri: self.scene.pri_us * 1e-6,
        }
    }

    pub fn source_config(&self) -> SourceConfig {
        let carrier = self.source.carrier_ghz * 1e9;
        SourceConfig {
            carrier,
            bandwidth: self.source.bandwidth_mhz * 1e6,
            aperture: SourceConfig::aperture_for_beamwidth(
                carrier,
                self.source.beamwidth_deg.to_radians(),
            ),
            pulse_duration: self.source.pulse_duration_us * 1e-6,
        }
    }

    pub fn tx_codebook_angles(&self) -> crate::Result<TxCodebook> {
        let center = self.tx_codebook.center_deg.to_radians();
        let span = self.tx_codebook.span_deg.to_radians();
        match (self.tx_codebook.step_deg, self.tx_codebook.beams) {
            (Some(step), None) => TxCodebook::build(center, span, step.to_radians()),
            (None, Some(beams)) => TxCodebook::with_count(center, span, beams),
            (None, None) => TxCodebook::with_count(center, span, 60),
            (Some(_), Some(_)) => Err(crate::Error::Validation(
                "tx_codebook: give step_deg or beams, not both".into(),
            )),
        }
    }

    /// Reflection codebook from the design rule: centre angle toward the ROI
    /// centre, span across the ROI diagonal, cardinality as requested.
    pub fn reflection_codebook(&self) -> ReflectionCodebook {
        let (center, span) = design_reflection_span(
            &self.scene_geometry(),
            self.tx_codebook.center_deg.to_radians(),
            [self.roi.center_x_m, self.roi.center_y_m],
            [self.roi.extent_x_m, self.roi.extent_y_m],
        );
        ReflectionCodebook { center, span, count: self.reflection.codebook_size }
    }

    /// Plane specification for this scenario. `gamma` lets sweep studies
    /// substitute per-sweep draws; pass `None` to use the file's value.
    /// Lens mode focuses from the sweep-centre source position onto the ROI
    /// centre — the references every lens baseline in the toolkit uses.
    pub fn plane_spec(&self, gamma: Option<f64>) -> crate::Result<PlaneSpec> {
        Ok(match self.reflection.mode {
            PlaneMode::Stroboscopic => PlaneSpec::Stroboscopic {
                theta_i_bar: self.tx_codebook.center_deg.to_radians(),
                reflection: self.reflection_codebook(),
                period: self.reflection.period_m,
                gamma: gamma.unwrap_or(self.reflection.gamma_rad),
            },
            PlaneMode::Lens => {
                let cb = self.tx_codebook_angles()?;
                let l_mid = (cb.len().saturating_sub(1)) as f64 / 2.0;
                PlaneSpec::Lens {
                    source: self.scene_geometry().source_position(l_mid),
                    target: [self.roi.center_x_m, self.roi.center_y_m],
                }
            }
            PlaneMode::Mirror => PlaneSpec::Mirror { alpha: self.reflection.mirror_alpha_rad },
        })
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::covering(
            [self.roi.center_x_m, self.roi.center_y_m],
            [self.roi.extent_x_m, self.roi.extent_y_m],
            [self.roi.pixel_m, self.roi.pixel_m],
        )
    }

    /// The ROI as a mainlobe window (for ISLR over the whole region).
    pub fn roi_window(&self) -> Window {
        Window {
            center: [self.roi.center_x_m, self.roi.center_y_m],
            extent: [self.roi.extent_x_m, self.roi.extent_y_m],
        }
    }

    pub fn target_set(&self) -> TargetSet {
        TargetSet {
            targets: self
                .targets
                .iter()
                .map(|t| Target {
                    position: [t.x_m, t.y_m],
                    rcs: t.rcs_m2,
                    phase: t.phase_rad,
                })
                .collect(),
        }
    }

    pub fn synthesis_params(&self) -> SynthesisParams {
        SynthesisParams {
            oversample: self.sim.oversample,
            noise_power: self.noise.power,
            seed: self.seed,
            narrowband_factor: self.sim.narrowband_factor,
        }
    }

    pub fn perturbation_spec(&self) -> PerturbationSpec {
        PerturbationSpec {
            epsilon: self.perturbation.height_error_m,
            beta: self.perturbation.tilt_deg.to_radians(),
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        match self.sim.interpolation {
            InterpKind::Lanczos8 => Interpolation::Lanczos8,
            InterpKind::Linear => Interpolation::Linear,
        }
    }
}

/// One step of the override-path walk: into a table by field name or into
/// an array by numeric index.
fn descend<'a>(
    node: &'a mut toml::Value,
    part: &str,
    key: &str,
) -> crate::Result<&'a mut toml::Value> {
    match node {
        // Insert missing keys: optional fields (e.g. tx_codebook.beams) are
        // absent from the canonical form when unset. Misspellings still fail
        // at deserialization, which rejects unknown fields by name.
        toml::Value::Table(map) => Ok(map
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()))),
        toml::Value::Array(items) => {
            let idx: usize = part.parse().map_err(|_| {
                crate::Error::Validation(format!(
                    "override key `{key}`: `{part}` is not an array index"
                ))
            })?;
            let len = items.len();
            items.get_mut(idx).ok_or_else(|| {
                crate::Error::Validation(format!(
                    "override key `{key}`: index {idx} out of range (length {len})"
                ))
            })
        }
        _ => Err(crate::Error::Validation(format!(
            "override key `{key}`: `{part}` is not a table or array"
        ))),
    }
}

/// Parse an override value as a TOML literal; bare words fall back to
/// strings so enum values can be given unquoted.
fn parse_toml_literal(value: &str) -> toml::Value {
    #[derive(Deserialize)]
    struct Probe {
        v: toml::Value,
    }
    toml::from_str::<Probe>(&format!("v = {value}"))
        .map(|p| p.v)
        .unwrap_or_else(|_| toml::Value::String(value.to_string()))
}
