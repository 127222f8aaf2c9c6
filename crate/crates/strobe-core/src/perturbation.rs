//! Truth-vs-assumption error injection and its first-order analysis: a height
//! error ε on the standoff distance D, a trajectory tilt β relative to the
//! plane, and the unknown phase γ of the periodic pattern under the
//! illuminated stretch.
//!
//! The imager always back-projects with the nominal geometry. The helpers
//! here build the *true* kinematics for a given error, differentiate the true
//! path lengths analytically at zero error (so end-to-end degradations can be
//! predicted and cross-checked without re-simulating), and run the
//! Monte-Carlo study over γ.

use crate::codebook::{AtomGrid, SourceConfig, TxCodebook};
use crate::geometry::{dist, SceneGeometry, Target, TargetSet};
use crate::imaging::{backproject, combine_sweeps, islr, measure_mainlobe, GridSpec, ImageGrid, Window};
use crate::plane::{build_plane, PlaneSpec};
use crate::signal::{
    delay_bounds, envelope, path_loss, snapshot_rng, synthesize_sweep, FastTimeGrid,
    Interpolation, SweepTruth, SynthesisParams,
};
use crate::{C64, SPEED_OF_LIGHT};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

/// Deterministic truth errors. `epsilon` lifts the true source and target
/// heights by ε (the platform believes the standoff is D when it is D + ε);
/// `beta` tilts the shared source/target trajectory away from the plane,
/// positive descending. Zeros reproduce the nominal kinematics exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationSpec {
    /// Height error ε on the standoff distance (m).
    pub epsilon: f64,
    /// Trajectory tilt β (rad).
    pub beta: f64,
}

impl PerturbationSpec {
    pub fn is_identity(&self) -> bool {
        self.epsilon == 0.0 && self.beta == 0.0
    }
}

/// Largest tilt the small-error model accepts.
pub const MAX_TILT: f64 = 10.0 * PI / 180.0;

/// True sweep kinematics for a nominal scene description under `spec`:
/// source starts at (s_x(0), D + ε) and both source and co-moving targets
/// advance along a track tilted by β, with the Tx beam co-rotating. Errors
/// if |β| is too large for a perturbation treatment (≥ 10°).
pub fn perturbed_truth(
    scene: &SceneGeometry,
    targets: &TargetSet,
    spec: &PerturbationSpec,
) -> crate::Result<SweepTruth> {
    if !spec.beta.is_finite() || spec.beta.abs() >= MAX_TILT {
        return Err(crate::Error::Validation(format!(
            "trajectory tilt {:.4} rad outside the perturbation regime (|β| < {:.4})",
            spec.beta, MAX_TILT
        )));
    }
    let lifted = TargetSet {
        targets: targets
            .targets
            .iter()
            .map(|t| Target {
                position: [t.position[0], t.position[1] + spec.epsilon],
                ..*t
            })
            .collect(),
    };
    Ok(SweepTruth {
        scene: SceneGeometry {
            source_height: scene.source_height + spec.epsilon,
            ..*scene
        },
        tilt: spec.beta,
        targets: lifted,
    })
}

/// Path lengths actually realized at snapshot ℓ when the platform commands
/// `theta_cmd`, mirroring the synthesis kinematics exactly (continuous beam
/// intercept, co-moving point). `point` is the *true* co-moving anchor — for
/// a perturbed truth read it off `truth.targets`, which carries the ε lift.
/// This is the quantity whose first-order expansion [`distance_sensitivity`]
/// describes.
pub fn true_path_lengths(
    truth: &SweepTruth,
    theta_cmd: f64,
    point: [f64; 2],
    l: f64,
) -> (f64, f64) {
    let s = truth.source_position(l);
    let theta = truth.beam_angle(theta_cmd);
    let p = [s[0] + s[1] * theta.tan(), 0.0];
    let r = truth.point_position(point, l);
    (dist(s, p), dist(p, r))
}

/// Which scalar error a sensitivity is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorParameter {
    /// ∂/∂ε of the true path lengths (height error; m per m).
    Height,
    /// ∂/∂β (trajectory tilt; m per rad).
    Tilt,
}

/// First-order sensitivities of the true incident/outgoing path lengths at
/// zero error, from analytic differentiation of the perturbed kinematics.
///
/// `compact_*` carry the alternative closed forms in which the outgoing leg
/// is linearized with the target height referred to the source track (D − y
/// in place of the height above the plane) and the tilt factors are quoted as
/// magnitudes. They coincide with the exact factors only in special positions
/// (e.g. the incident leg, or a target at track height); both are returned so
/// designs can report the discrepancy instead of silently picking one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSensitivity {
    pub incident: f64,
    pub outgoing: f64,
    pub compact_incident: f64,
    pub compact_outgoing: f64,
}

impl DistanceSensitivity {
    /// Round-trip distance error per unit of the perturbation parameter.
    pub fn total(&self) -> f64 {
        self.incident + self.outgoing
    }

    /// (incident, outgoing) gaps between the exact and compact forms.
    pub fn discrepancy(&self) -> (f64, f64) {
        (
            self.incident - self.compact_incident,
            self.outgoing - self.compact_outgoing,
        )
    }
}

/// Sensitivity of the true path lengths to `param` at snapshot ℓ for a
/// co-moving point, commanded angle θ_i, evaluated at zero error.
pub fn distance_sensitivity(
    scene: &SceneGeometry,
    theta_i: f64,
    point: [f64; 2],
    l: f64,
    param: ErrorParameter,
) -> DistanceSensitivity {
    let d = scene.source_height;
    let (tan, sec) = (theta_i.tan(), 1.0 / theta_i.cos());
    // Horizontal reach from the sweep-start source position to the point,
    // minus the beam's horizontal throw; ℓ-free because the point co-moves.
    let q = point[0] - scene.source_start_x - d * tan;
    let ry = point[1];
    let d_o = (q * q + ry * ry).sqrt();
    let a = l * scene.step();
    match param {
        ErrorParameter::Height => DistanceSensitivity {
            // D̂_i = (D+ε) sec θ; D̂_o² = (q − ε tanθ)² + (r_y + ε)².
            incident: sec,
            outgoing: (-tan * q + ry) / d_o,
            compact_incident: sec,
            compact_outgoing: (-tan * q + (d - ry)) / d_o,
        },
        ErrorParameter::Tilt => DistanceSensitivity {
            // D̂_i = (D − a sinβ) sec(θ−β); the β-derivatives of the outgoing
            // displacement are dΔx/dβ|₀ = a tanθ + D sec²θ, dΔy/dβ|₀ = −a.
            incident: -(d * tan + a) * sec,
            outgoing: (q * (a * tan + d * sec * sec) - ry * a) / d_o,
            compact_incident: (d * tan + a) * (1.0 + tan * tan).sqrt(),
            compact_outgoing: d_o * tan
                - (q * (point[0] - scene.source_start_x + a) * tan
                    + (d - ry) * (ry * tan + a))
                    / d_o,
        },
    }
}

/// Per-snapshot first-order prediction of the degraded image value at a
/// nominal point: weight_ℓ = η_ℓ · g(2Δ_ℓ/c) · e^{−j4πΔ_ℓ/λ0}, where Δ_ℓ is
/// the round-trip distance error and η_ℓ the double-bounce path amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationPrediction {
    /// Commanded angle per snapshot (one sweep).
    pub angles: Vec<f64>,
    /// Round-trip distance error Δ_ℓ (m).
    pub distance_errors: Vec<f64>,
    pub weights: Vec<C64>,
}

impl DegradationPrediction {
    /// Predicted complex image value at the point (coherent snapshot sum).
    pub fn coherent_sum(&self) -> C64 {
        self.weights.iter().sum()
    }

    /// Focusing loss in dB: coherent sum against the perfectly-aligned sum of
    /// the same amplitudes. 0 dB means the perturbation costs nothing.
    pub fn focusing_loss_db(&self) -> f64 {
        let aligned: f64 = self.weights.iter().map(|w| w.norm()).sum();
        if aligned <= 0.0 {
            return 0.0;
        }
        -20.0 * (self.coherent_sum().norm() / aligned).log10()
    }

    pub fn mean_distance_error(&self) -> f64 {
        if self.distance_errors.is_empty() {
            0.0
        } else {
            self.distance_errors.iter().sum::<f64>() / self.distance_errors.len() as f64
        }
    }
}

/// First-order prediction of the degradation a perturbed acquisition leaves
/// at the nominal position of a point target, one weight per snapshot of a
/// single sweep. Warns when the distance error exceeds a tenth of the range
/// cell, where first order starts to be optimistic.
pub fn predicted_degradation(
    scene: &SceneGeometry,
    cfg: &SourceConfig,
    codebook: &TxCodebook,
    spec: &PerturbationSpec,
    point: [f64; 2],
) -> DegradationPrediction {
    let lambda0 = cfg.lambda0();
    let mut angles = Vec::with_capacity(codebook.len());
    let mut errors = Vec::with_capacity(codebook.len());
    let mut weights = Vec::with_capacity(codebook.len());
    for (i, &theta) in codebook.angles.iter().enumerate() {
        let l = i as f64;
        let mut delta = 0.0;
        if spec.epsilon != 0.0 {
            delta += spec.epsilon
                * distance_sensitivity(scene, theta, point, l, ErrorParameter::Height).total();
        }
        if spec.beta != 0.0 {
            delta += spec.beta
                * distance_sensitivity(scene, theta, point, l, ErrorParameter::Tilt).total();
        }
        let (d_i, d_o) = scene.path_lengths(theta, point);
        let theta_o = scene.reflection_angle_to_target(theta, point);
        let eta = path_loss(cfg, theta, theta_o, d_i, d_o, 1.0);
        let phase = -4.0 * PI / lambda0 * delta;
        let w = C64::from_polar(eta * envelope(cfg.bandwidth, 2.0 * delta / SPEED_OF_LIGHT).abs(), phase);
        angles.push(theta);
        errors.push(delta);
        weights.push(w);
    }
    let cell = SPEED_OF_LIGHT / (2.0 * cfg.bandwidth);
    let worst = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if worst > 0.1 * cell {
        eprintln!(
            "warning: first-order distance error {:.4} m exceeds 10% of the range \
             cell ({:.4} m); the linearized degradation prediction is optimistic",
            worst, cell
        );
    }
    DegradationPrediction { angles, distance_errors: errors, weights }
}

/// Knobs for the pattern-phase Monte-Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationStudyConfig {
    /// Number of γ draws (sweeps observed with unknown pattern alignment).
    pub draws: usize,
    /// Seed for the counter-based γ stream (recorded in the result).
    pub seed: u64,
    pub synthesis: SynthesisParams,
    pub interpolation: Interpolation,
    /// Mainlobe window for the ISLR spread. `None` derives one window from
    /// the first draw (twice its −3 dB widths) and applies it to every draw,
    /// so the ratios stay comparable.
    pub window: Option<Window>,
}

/// Outcome of one γ draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDraw {
    pub gamma: f64,
    pub peak: f64,
    pub islr: f64,
}

/// All draws of the pattern-phase study plus the coherent combination.
#[derive(Debug, Clone)]
pub struct IlluminationStudy {
    pub seed: u64,
    pub draws: Vec<GammaDraw>,
    pub images: Vec<ImageGrid>,
    /// Coherent sum over every draw (the multi-sweep mitigation).
    pub combined: ImageGrid,
    pub combined_islr: f64,
    /// Mainlobe window the ISLR values were measured against.
    pub window: Window,
}

impl IlluminationStudy {
    /// (min, max) peak magnitude across draws.
    pub fn peak_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in &self.draws {
            lo = lo.min(d.peak);
            hi = hi.max(d.peak);
        }
        (lo, hi)
    }

    /// (min, max) ISLR across draws.
    pub fn islr_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in &self.draws {
            lo = lo.min(d.islr);
            hi = hi.max(d.islr);
        }
        (lo, hi)
    }
}

/// The γ value of draw `k` under `seed`: counter-based, uniform on [0, 2π).
pub fn gamma_draw(seed: u64, k: u64) -> f64 {
    snapshot_rng(seed, k).gen::<f64>() * TAU
}

/// One end-to-end pass at a fixed pattern phase: rebuild the plane with γ,
/// synthesize a sweep against it, back-project with the nominal geometry.
/// `base` must be the periodic-pattern plane mode; its own γ is replaced.
pub fn image_at_gamma(
    scene: &SceneGeometry,
    cfg: &SourceConfig,
    codebook: &TxCodebook,
    targets: &TargetSet,
    grid: AtomGrid,
    base: &PlaneSpec,
    gamma: f64,
    fast_time: &FastTimeGrid,
    image_spec: GridSpec,
    synthesis: &SynthesisParams,
    interp: Interpolation,
) -> crate::Result<ImageGrid> {
    let spec = match base {
        PlaneSpec::Stroboscopic { theta_i_bar, reflection, period, .. } => {
            PlaneSpec::Stroboscopic {
                theta_i_bar: *theta_i_bar,
                reflection: reflection.clone(),
                period: *period,
                gamma,
            }
        }
        _ => {
            return Err(crate::Error::Validation(
                "illumination study needs the periodic-pattern plane mode".into(),
            ))
        }
    };
    let plane = build_plane(cfg.lambda0(), grid, spec)?;
    let truth = SweepTruth::nominal(*scene, targets.clone());
    let cube = synthesize_sweep(&truth, cfg, &plane, codebook, 1, fast_time, synthesis)?;
    backproject(&cube, cfg, scene, &plane, image_spec, interp)
}

/// Monte-Carlo over the unknown pattern phase: one sweep and one image per
/// drawn γ, dispersion of peak and ISLR across draws, and the coherent
/// combination of all draws. Draws run in parallel; outputs depend only on
/// the seeds.
pub fn random_illumination_study(
    scene: &SceneGeometry,
    cfg: &SourceConfig,
    codebook: &TxCodebook,
    targets: &TargetSet,
    grid: AtomGrid,
    base: &PlaneSpec,
    image_spec: GridSpec,
    study: &IlluminationStudyConfig,
) -> crate::Result<IlluminationStudy> {
    if study.draws == 0 {
        return Err(crate::Error::Validation("need at least one γ draw".into()));
    }
    let points: Vec<[f64; 2]> = targets.targets.iter().map(|t| t.position).collect();
    if points.is_empty() {
        return Err(crate::Error::Validation("illumination study needs targets".into()));
    }
    let (lo, hi) = delay_bounds(scene, codebook, &points);
    let fast_time = FastTimeGrid::covering(lo, hi, cfg.bandwidth, study.synthesis.oversample)?;
    let gammas: Vec<f64> = (0..study.draws).map(|k| gamma_draw(study.seed, k as u64)).collect();
    let images: Vec<ImageGrid> = gammas
        .par_iter()
        .enumerate()
        .map(|(k, &gamma)| {
            // Distinct noise stream per draw, still counter-based.
            let synthesis = SynthesisParams {
                seed: study.synthesis.seed.wrapping_add(k as u64),
                ..study.synthesis
            };
            image_at_gamma(
                scene, cfg, codebook, targets, grid, base, gamma, &fast_time, image_spec,
                &synthesis, study.interpolation,
            )
        })
        .collect::<crate::Result<_>>()?;

    let window = match study.window {
        Some(w) => w,
        None => {
            let first = &images[0];
            let (peak_idx, _) = first.peak();
            let (wx, wy) = measure_mainlobe(first, peak_idx)?;
            Window {
                center: first.spec.position(peak_idx.0, peak_idx.1),
                extent: [2.0 * wx, 2.0 * wy],
            }
        }
    };
    let mut draws = Vec::with_capacity(study.draws);
    for (k, img) in images.iter().enumerate() {
        draws.push(GammaDraw {
            gamma: gammas[k],
            peak: img.peak().1,
            islr: islr(img, &window)?,
        });
    }
    let combined = combine_sweeps(&images)?;
    let combined_islr = islr(&combined, &window)?;
    Ok(IlluminationStudy {
        seed: study.seed,
        draws,
        images,
        combined,
        combined_islr,
        window,
    })
}
