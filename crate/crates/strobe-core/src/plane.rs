//! Reflection-plane design: the periodic anomalous-reflection offset profile,
//! its quantization onto the reflection codebook Θ_o, and the per-atom phase
//! profiles for the three operating modes (stroboscopic, lens, mirror).
//!
//! The stroboscopic profile makes the local reflection offset vary as
//!
//!   Δθ(x) = (θ̄_o − θ̄_i) + (Δθ_{o,obs}/2)·cos(2πx/Λ + γ),
//!
//! quantized pointwise onto Θ_o, so each half-period sweeps every codebook
//! angle once. Atoms sharing a quantized value form a module whose linear
//! phase gradient implements that anomalous reflection; module sizes average
//! Λ/(2d|Θ_o|) but vary along the cosine (widest where it is flattest).

use crate::codebook::AtomGrid;
use crate::geometry::{dist, SceneGeometry};
use crate::C64;
use std::f64::consts::PI;

/// Discrete set of anomalous-reflection angles the plane implements.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionCodebook {
    /// Central reflection angle θ̄_o (rad).
    pub center: f64,
    /// Observed span Δθ_{o,obs} (rad).
    pub span: f64,
    /// Cardinality |Θ_o|.
    pub count: usize,
}

impl ReflectionCodebook {
    /// Inclusive uniform angle grid across the span; a single-entry codebook
    /// collapses to {θ̄_o}.
    pub fn angles(&self) -> Vec<f64> {
        if self.count <= 1 || self.span == 0.0 {
            return vec![self.center];
        }
        let step = self.span / (self.count - 1) as f64;
        (0..self.count).map(|k| self.center - self.span / 2.0 + k as f64 * step).collect()
    }

    /// Grid step δθ_o (None for a degenerate single-angle codebook).
    pub fn step(&self) -> Option<f64> {
        (self.count > 1 && self.span > 0.0).then(|| self.span / (self.count - 1) as f64)
    }
}

/// Central reflection angle and observed span for a rectangular ROI:
/// θ̄_o toward the ROI center, span between the diagonal corner pair
/// r± = r* ± (Δx/2, Δy/2), all evaluated at θ_i = θ̄_i.
pub fn design_reflection_span(
    scene: &SceneGeometry,
    theta_i_bar: f64,
    roi_center: [f64; 2],
    roi_extent: [f64; 2],
) -> (f64, f64) {
    let center = scene.reflection_angle_to_target(theta_i_bar, roi_center);
    let rp = [roi_center[0] + roi_extent[0] / 2.0, roi_center[1] + roi_extent[1] / 2.0];
    let rm = [roi_center[0] - roi_extent[0] / 2.0, roi_center[1] - roi_extent[1] / 2.0];
    let span = scene.reflection_angle_to_target(theta_i_bar, rp)
        - scene.reflection_angle_to_target(theta_i_bar, rm);
    (center, span)
}

/// Unquantized periodic reflection offset Δθ(x).
pub fn continuous_reflection_offset(
    x: f64,
    theta_i_bar: f64,
    theta_o_bar: f64,
    span: f64,
    period: f64,
    gamma: f64,
) -> f64 {
    // γ reduced mod 2π so phases a full turn apart build identical planes
    // (cos(u + 2π) ≠ cos(u) bitwise otherwise).
    let gamma = gamma.rem_euclid(2.0 * PI);
    (theta_o_bar - theta_i_bar) + span / 2.0 * (2.0 * PI * x / period + gamma).cos()
}

/// Nearest codebook entry to `value` (angles in rad); ties resolve toward the
/// smaller angle. The returned value always belongs to the codebook and the
/// error never exceeds half the grid step.
pub fn quantize_offset(value: f64, entries: &[f64]) -> f64 {
    debug_assert!(!entries.is_empty());
    let mut best = entries[0];
    let mut best_err = (value - best).abs();
    for &e in &entries[1..] {
        let err = (value - e).abs();
        if err < best_err {
            best = e;
            best_err = err;
        }
    }
    best
}

/// Average atoms per module for period Λ, pitch d, and |Θ_o| entries:
/// each half-period visits every codebook angle once, so Λ/(2·d·|Θ_o|).
pub fn module_atoms(period: f64, pitch: f64, codebook_size: usize) -> f64 {
    period / (2.0 * pitch * codebook_size as f64)
}

/// Upper limit on the reflection-codebook step so that adjacent module beams
/// still overlap at −3 dB: δθ_o ≤ ½·min_ℓ λ0/(N_mod·d·cos θ_{o,ℓ}).
pub fn reflection_step_limit(lambda0: f64, module_len: f64, angles: &[f64]) -> f64 {
    let max_cos = angles.iter().map(|a| a.cos()).fold(f64::NEG_INFINITY, f64::max);
    0.5 * lambda0 / (module_len * max_cos)
}

/// Largest module (in atoms) for which some codebook satisfying both the step
/// limit and |Θ_o| = Λ/(2·d·N_mod) exists:
/// N_mod^max = √(Λ·λ0 / (8·d²·Δθ_{o,obs}·cos θ*)), θ* the codebook angle
/// nearest broadside. Larger modules force too-coarse quantization and the
/// image degrades (widened, displaced mainlobe).
pub fn max_module_atoms(lambda0: f64, period: f64, pitch: f64, span: f64, angles: &[f64]) -> f64 {
    let max_cos = angles.iter().map(|a| a.cos()).fold(f64::NEG_INFINITY, f64::max);
    (period * lambda0 / (8.0 * pitch * pitch * span * max_cos)).sqrt()
}

/// Which phase profile the plane carries.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneSpec {
    /// Periodic quantized anomalous reflection designed for sweep center θ̄_i.
    Stroboscopic {
        theta_i_bar: f64,
        reflection: ReflectionCodebook,
        period: f64,
        gamma: f64,
    },
    /// Focus the double bounce from a reference source position onto a point:
    /// φ_n = (2π/λ0)(‖s−p_n‖ + ‖p_n−r‖), cancelling each leg's path exactly.
    Lens { source: [f64; 2], target: [f64; 2] },
    /// Linear phase φ_n = α·n; α = 0 is a plain specular mirror.
    Mirror { alpha: f64 },
}

/// A fully built plane: atom grid plus per-atom phases (and, for the
/// stroboscopic mode, the quantized offset that produced each phase).
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneDesign {
    pub grid: AtomGrid,
    pub lambda0: f64,
    pub spec: PlaneSpec,
    /// Reflection phase per atom (rad), not wrapped.
    pub phases: Vec<f64>,
    /// Quantized reflection offset per atom (rad); empty for lens/mirror.
    pub offsets: Vec<f64>,
}

/// Materialize per-atom phases for `spec` on `grid`.
pub fn build_plane(lambda0: f64, grid: AtomGrid, spec: PlaneSpec) -> crate::Result<PlaneDesign> {
    if grid.count == 0 || !(grid.pitch > 0.0) {
        return Err(crate::Error::Validation("plane grid needs ≥1 atom and positive pitch".into()));
    }
    let k0 = 2.0 * PI / lambda0;
    let mut phases = Vec::with_capacity(grid.count);
    let mut offsets = Vec::new();
    match &spec {
        PlaneSpec::Stroboscopic { theta_i_bar, reflection, period, gamma } => {
            if !(*period > 0.0) {
                return Err(crate::Error::Validation("pattern period must be positive".into()));
            }
            let entries: Vec<f64> =
                reflection.angles().iter().map(|a| a - theta_i_bar).collect();
            offsets.reserve(grid.count);
            for n in 0..grid.count {
                let x = grid.atom_x(n);
                let cont = continuous_reflection_offset(
                    x,
                    *theta_i_bar,
                    reflection.center,
                    reflection.span,
                    *period,
                    *gamma,
                );
                let q = quantize_offset(cont, &entries);
                offsets.push(q);
                phases.push(k0 * x * (theta_i_bar.sin() - (theta_i_bar + q).sin()));
            }
        }
        PlaneSpec::Lens { source, target } => {
            if source[1] <= 0.0 || target[1] <= 0.0 {
                return Err(crate::Error::Validation(
                    "lens source and target must be above the plane".into(),
                ));
            }
            for n in 0..grid.count {
                let p = [grid.atom_x(n), 0.0];
                phases.push(k0 * (dist(*source, p) + dist(p, *target)));
            }
        }
        PlaneSpec::Mirror { alpha } => {
            for n in 0..grid.count {
                phases.push(alpha * n as f64);
            }
        }
    }
    Ok(PlaneDesign { grid, lambda0, spec, phases, offsets })
}

impl PlaneDesign {
    /// Far-field reflection pattern of the atoms in `[first, last]` for
    /// incidence θ_i, evaluated at each query reflection angle:
    /// R(θ_o) = Σ_n e^{j(φ_n − (2π/λ0)·x_n·(sin θ_i − sin θ_o))}.
    pub fn reflection_pattern(
        &self,
        first: usize,
        last: usize,
        theta_i: f64,
        theta_o: &[f64],
    ) -> Vec<C64> {
        let k0 = 2.0 * PI / self.lambda0;
        theta_o
            .iter()
            .map(|&to| {
                let u = theta_i.sin() - to.sin();
                let mut acc = C64::new(0.0, 0.0);
                for n in first..=last.min(self.grid.count - 1) {
                    let ph = self.phases[n] - k0 * self.grid.atom_x(n) * u;
                    acc += C64::new(ph.cos(), ph.sin());
                }
                acc
            })
            .collect()
    }

    /// Average length (in atoms) of the constant-offset runs — the realized
    /// module size. Only meaningful for the stroboscopic mode.
    pub fn mean_module_atoms(&self) -> Option<f64> {
        if self.offsets.is_empty() {
            return None;
        }
        let mut runs = 0usize;
        for i in 1..self.offsets.len() {
            if self.offsets[i] != self.offsets[i - 1] {
                runs += 1;
            }
        }
        Some(self.offsets.len() as f64 / (runs + 1) as f64)
    }
}

/// Plane extent needed to cover every illuminated footprint across `sweeps`
/// consecutive sweeps of `codebook`, with margin for one pattern period on
/// each side. Returns a grid aligned so atom positions are multiples of `d`.
pub fn required_grid(
    scene: &SceneGeometry,
    source: &crate::codebook::SourceConfig,
    codebook: &crate::codebook::TxCodebook,
    sweeps: usize,
    period_margin: f64,
    pitch: f64,
) -> AtomGrid {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let per_sweep = codebook.len() as f64;
    for s in 0..sweeps.max(1) {
        for (i, &theta) in codebook.angles.iter().enumerate() {
            let l = s as f64 * per_sweep + i as f64;
            let c = scene.intercept_point(theta, l)[0];
            let w = crate::codebook::footprint_width(
                scene.source_height,
                source.source_beamwidth(theta),
                theta,
            );
            lo = lo.min(c - w / 2.0);
            hi = hi.max(c + w / 2.0);
        }
    }
    let lo = lo - period_margin;
    let hi = hi + period_margin;
    let origin = (lo / pitch).floor() * pitch;
    let count = ((hi - origin) / pitch).ceil() as usize + 1;
    AtomGrid { pitch, origin, count }
}
