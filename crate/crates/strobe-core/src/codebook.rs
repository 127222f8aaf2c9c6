//! Source model and Tx-side sweep design: beamwidths, illuminated atom sets,
//! the angular sampling limit, and narrowband feasibility checks.
//!
//! The source carries an aperture of size A whose −3 dB beamwidth widens with
//! steering as Δθ_source(θ_i) = λ0/(A cos θ_i). Sweeping θ_i over the Tx
//! codebook Θ_i = {θ̄_i ± Δθ_{i,obs}/2} illuminates, snapshot by snapshot, a
//! sliding patch of the plane whose union over a sweep is the effective
//! aperture A_eff that bounds the achievable image resolution.

use crate::geometry::SceneGeometry;
use crate::SPEED_OF_LIGHT;

/// Transmit source parameters. Wavelength, beamwidths, and the fast-time
/// sample rate all derive from here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    /// Carrier frequency f0 (Hz).
    pub carrier: f64,
    /// Signal bandwidth B (Hz).
    pub bandwidth: f64,
    /// Physical aperture A (m).
    pub aperture: f64,
    /// Pulse duration T_s (s); must not exceed the PRI.
    pub pulse_duration: f64,
}

impl SourceConfig {
    /// Carrier wavelength λ0 (m).
    pub fn lambda0(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier
    }

    /// Half-wavelength atom pitch used by default for the plane.
    pub fn default_atom_pitch(&self) -> f64 {
        self.lambda0() / 2.0
    }

    /// Aperture sized to give `beamwidth` (rad) at broadside: A = λ0/Δθ.
    pub fn aperture_for_beamwidth(carrier: f64, beamwidth: f64) -> f64 {
        SPEED_OF_LIGHT / carrier / beamwidth
    }

    /// −3 dB beamwidth at steering angle θ_i: λ0/(A cos θ_i).
    pub fn source_beamwidth(&self, theta_i: f64) -> f64 {
        self.lambda0() / (self.aperture * theta_i.cos())
    }

    /// Source gain roll-off η_source(θ) = (2A/λ0)·cos θ — idealized boresight
    /// aperture gain mapped to the 2-D scene.
    pub fn source_gain(&self, theta: f64) -> f64 {
        2.0 * self.aperture / self.lambda0() * theta.cos()
    }
}

/// Atom lattice of the reflection plane: `count` atoms at x = x0 + n·d.
/// Lives here rather than in the plane module because illumination footprints
/// are a source/geometry concern; the plane adds phases on top of this grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomGrid {
    /// Atom pitch d (m).
    pub pitch: f64,
    /// x coordinate of atom 0 (m).
    pub origin: f64,
    /// Number of atoms.
    pub count: usize,
}

impl AtomGrid {
    pub fn atom_x(&self, n: usize) -> f64 {
        self.origin + n as f64 * self.pitch
    }

    pub fn x_max(&self) -> f64 {
        self.atom_x(self.count.saturating_sub(1))
    }
}

/// Contiguous run of illuminated atom indices plus the underlying continuous
/// footprint, `[center − width/2, center + width/2]` on the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminatedSet {
    pub first: usize,
    pub last: usize, // inclusive
    pub center_x: f64,
    pub width: f64,
}

impl IlluminatedSet {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false // construction fails instead of producing empty sets
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

/// Continuous illuminated footprint width on the plane for beamwidth
/// `beamwidth` at incidence θ_i and source height D.
///
/// Away from broadside this is the oblique-projection width
/// D·Δθ_source/(cos θ_i · sin θ_i) (≈ M_ℓ·d); that expression diverges as
/// θ_i → 0, where the exact intersection of the −3 dB cone with the plane,
/// D·[tan(θ_i+Δθ/2) − tan(θ_i−Δθ/2)], stays finite. The two are blended by a
/// smoothstep over |θ_i| ∈ [2°, 10°], in log width since the models differ by
/// a factor cot θ_i there, so the width is continuous everywhere and matches
/// the oblique model in the operating regime.
pub fn footprint_width(source_height: f64, beamwidth: f64, theta_i: f64) -> f64 {
    let geometric = source_height
        * ((theta_i + beamwidth / 2.0).tan() - (theta_i - beamwidth / 2.0).tan());
    let a = theta_i.abs();
    let (lo, hi) = (2f64.to_radians(), 10f64.to_radians());
    if a <= lo {
        return geometric;
    }
    let oblique = source_height * beamwidth / (theta_i.cos() * theta_i.sin().abs());
    if a >= hi {
        return oblique;
    }
    let t = (a - lo) / (hi - lo);
    let s = t * t * (3.0 - 2.0 * t);
    geometric * (oblique / geometric).powf(s)
}

/// Atoms illuminated at snapshot ℓ for incidence θ_i: the grid indices whose
/// positions fall inside the footprint centred on the beam intercept, clipped
/// to the grid. Errors if the footprint misses the grid entirely.
pub fn illuminated_set(
    scene: &SceneGeometry,
    source: &SourceConfig,
    grid: &AtomGrid,
    theta_i: f64,
    l: f64,
) -> crate::Result<IlluminatedSet> {
    illuminated_set_at(scene.source_position(l), source, grid, theta_i)
}

/// Same, but for an explicit source position (used when the true trajectory
/// deviates from the nominal scene description).
pub fn illuminated_set_at(
    source_pos: [f64; 2],
    source: &SourceConfig,
    grid: &AtomGrid,
    theta_i: f64,
) -> crate::Result<IlluminatedSet> {
    let center = source_pos[0] + source_pos[1] * theta_i.tan();
    let width = footprint_width(source_pos[1], source.source_beamwidth(theta_i), theta_i);
    let lo = center - width / 2.0;
    let hi = center + width / 2.0;
    let first = ((lo - grid.origin) / grid.pitch).ceil().max(0.0) as usize;
    let last_f = ((hi - grid.origin) / grid.pitch).floor();
    if last_f < 0.0 || first >= grid.count {
        return Err(crate::Error::Numeric(format!(
            "illuminated footprint [{lo:.3}, {hi:.3}] m misses the plane \
             [{:.3}, {:.3}] m",
            grid.origin,
            grid.x_max()
        )));
    }
    let last = (last_f as usize).min(grid.count - 1);
    if last < first {
        return Err(crate::Error::Numeric(format!(
            "footprint narrower than the atom pitch at θ_i = {:.4} rad",
            theta_i
        )));
    }
    Ok(IlluminatedSet { first, last, center_x: center, width })
}

/// Plane extent illuminated over one full sweep of the span:
/// A_eff = D·[tan(θ̄_i + Δθ_{i,obs}/2) − tan(θ̄_i − Δθ_{i,obs}/2)].
pub fn effective_aperture(source_height: f64, center: f64, span: f64) -> f64 {
    source_height * ((center + span / 2.0).tan() - (center - span / 2.0).tan())
}

/// Tx angular sampling limit: the largest δθ_i for which consecutive snapshots
/// stay within π of round-trip phase slope anywhere in the ROI,
///
///   δθ_i ≤ π / |max_r dφ/dθ_i|_{θ̄+Δ/2} − min_r dφ/dθ_i|_{θ̄−Δ/2}|,
///
/// with r ranging over the ROI's diagonal corner pair r± = r* ± (Δx/2, Δy/2)
/// (the same corner convention used to size the reflection span). Pass
/// `dense: true` to evaluate a 9×9 grid over the ROI instead, which is more
/// conservative (never larger).
pub fn angular_sampling_limit(
    scene: &SceneGeometry,
    lambda0: f64,
    center: f64,
    span: f64,
    roi_center: [f64; 2],
    roi_extent: [f64; 2],
    dense: bool,
) -> f64 {
    let mut points = Vec::new();
    if dense {
        for i in 0..9 {
            for j in 0..9 {
                points.push([
                    roi_center[0] + (i as f64 / 8.0 - 0.5) * roi_extent[0],
                    roi_center[1] + (j as f64 / 8.0 - 0.5) * roi_extent[1],
                ]);
            }
        }
    } else {
        points.push([roi_center[0] + roi_extent[0] / 2.0, roi_center[1] + roi_extent[1] / 2.0]);
        points.push([roi_center[0] - roi_extent[0] / 2.0, roi_center[1] - roi_extent[1] / 2.0]);
    }
    let hi = points
        .iter()
        .map(|&r| scene.propagation_phase_derivative(center + span / 2.0, lambda0, r))
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = points
        .iter()
        .map(|&r| scene.propagation_phase_derivative(center - span / 2.0, lambda0, r))
        .fold(f64::INFINITY, f64::min);
    std::f64::consts::PI / (hi - lo).abs()
}

/// The swept Tx angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TxCodebook {
    pub center: f64,
    pub span: f64,
    pub angles: Vec<f64>,
}

impl TxCodebook {
    /// Inclusive uniform grid θ̄ − Δ/2, θ̄ − Δ/2 + δ, …, up to θ̄ + Δ/2
    /// (the end point is included when the step divides the span).
    pub fn build(center: f64, span: f64, step: f64) -> crate::Result<Self> {
        if !(step > 0.0) || !(span > 0.0) {
            return Err(crate::Error::Validation(
                "codebook span and step must be positive".into(),
            ));
        }
        let n = (span / step + 1e-9).floor() as usize + 1;
        let start = center - span / 2.0;
        let angles = (0..n).map(|k| start + k as f64 * step).collect();
        Ok(TxCodebook { center, span, angles })
    }

    /// Exactly `count` angles across the span (half-open convention,
    /// step = span/count): reproduces parameter sets quoted as a count.
    pub fn with_count(center: f64, span: f64, count: usize) -> crate::Result<Self> {
        if count == 0 || !(span > 0.0) {
            return Err(crate::Error::Validation("codebook count must be ≥ 1".into()));
        }
        let step = span / count as f64;
        let start = center - span / 2.0;
        let angles = (0..count).map(|k| start + k as f64 * step).collect();
        Ok(TxCodebook { center, span, angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Observation time of one sweep, T_obs = |Θ_i|·Δτ.
    pub fn observation_time(&self, pri: f64) -> f64 {
        self.len() as f64 * pri
    }

    /// Distance the source travels during one sweep, v·T_obs.
    pub fn sweep_travel(&self, scene: &SceneGeometry) -> f64 {
        scene.speed * self.observation_time(scene.pri)
    }
}

/// Narrowband feasibility margin: ratio of 1/B to `dominance_factor` times the
/// worst-case delay spread across the illuminated footprint,
/// M_ℓ·(d/c)·max(sin θ_i, sin θ_o) — the echo model treats the footprint as a
/// single range cell, which needs margin ≥ 1.
pub fn narrowband_margin(
    bandwidth: f64,
    footprint: f64, // M_ℓ·d (m)
    theta_i: f64,
    theta_o: f64,
    dominance_factor: f64,
) -> f64 {
    let spread = footprint / SPEED_OF_LIGHT * theta_i.sin().abs().max(theta_o.sin().abs());
    if spread == 0.0 {
        return f64::INFINITY;
    }
    (1.0 / bandwidth) / (dominance_factor * spread)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_scene() -> SceneGeometry {
        SceneGeometry { source_height: 5.0, source_start_x: 0.0, speed: 20.0, pri: 50e-6 }
    }

    fn reference_source() -> SourceConfig {
        let carrier = 77e9;
        SourceConfig {
            carrier,
            bandwidth: 500e6,
            aperture: SourceConfig::aperture_for_beamwidth(carrier, 0.5f64.to_radians()),
            pulse_duration: 10e-6,
        }
    }

    fn reference_grid() -> AtomGrid {
        let d = reference_source().default_atom_pitch();
        // 8 m of plane starting at x = 0 comfortably covers the test sweeps.
        AtomGrid { pitch: d, origin: 0.0, count: (8.0 / d) as usize }
    }

    #[test]
    fn aperture_for_half_degree_beam() {
        let src = reference_source();
        assert!((src.aperture - 0.446_151_755).abs() < 1e-8);
        // Beamwidth widens with steering: λ0/(A cos40°) ≈ 0.6527°.
        let bw = src.source_beamwidth(40f64.to_radians());
        assert!((bw.to_degrees() - 0.652_703_645).abs() < 1e-8);
        assert!((src.source_beamwidth(0.0).to_degrees() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn effective_aperture_reference_value() {
        let a = effective_aperture(5.0, 40f64.to_radians(), 5f64.to_radians());
        assert!((a - 0.745_020_930).abs() < 1e-8);
        // Shrinks to the differential footprint D·Δ/cos²θ̄ as the span → 0.
        let tiny = effective_aperture(5.0, 40f64.to_radians(), 1e-6);
        let differential = 5.0 * 1e-6 / 40f64.to_radians().cos().powi(2);
        assert!((tiny - differential).abs() / differential < 1e-6);
    }

    #[test]
    fn illuminated_set_reference_count() {
        let scene = reference_scene();
        // Beamwidth specified at the 40° operating point (not at broadside):
        // aperture sized so λ0/(A cos40°) = 0.5°.
        let src = SourceConfig {
            aperture: SourceConfig::aperture_for_beamwidth(
                reference_source().carrier,
                0.5f64.to_radians() * 40f64.to_radians().cos(),
            ),
            ..reference_source()
        };
        let grid = reference_grid();
        let set = illuminated_set(&scene, &src, &grid, 40f64.to_radians(), 0.0).unwrap();
        // Oblique-projection width D·Δθ/(d cosθ sinθ) ≈ 45.5 atoms.
        assert!((set.width - 0.088_612_688).abs() < 1e-8);
        assert!(
            (44..=46).contains(&set.len()),
            "expected ≈45 illuminated atoms, got {}",
            set.len()
        );
        // Centered on the beam intercept.
        let p = scene.intercept_point(40f64.to_radians(), 0.0)[0];
        assert!((set.center_x - p).abs() < 1e-12);
        let mid_x = (grid.atom_x(set.first) + grid.atom_x(set.last)) / 2.0;
        assert!((mid_x - p).abs() < grid.pitch);
    }

    #[test]
    fn illuminated_set_counting_oracle() {
        // Independent count: walk every atom and test membership against the
        // same continuous interval.
        let scene = reference_scene();
        let src = reference_source();
        let grid = reference_grid();
        for deg in [15.0, 25.0, 40.0, 55.0] {
            let theta = (deg as f64).to_radians();
            let set = illuminated_set(&scene, &src, &grid, theta, 3.0).unwrap();
            let c = scene.intercept_point(theta, 3.0)[0];
            let w = footprint_width(scene.source_height, src.source_beamwidth(theta), theta);
            let brute = (0..grid.count)
                .filter(|&n| {
                    let x = grid.atom_x(n);
                    x >= c - w / 2.0 && x <= c + w / 2.0
                })
                .count();
            assert_eq!(set.len(), brute, "θ_i = {deg}°");
        }
    }

    #[test]
    fn doubling_pitch_halves_the_set() {
        let scene = reference_scene();
        let src = reference_source();
        let grid = reference_grid();
        let coarse = AtomGrid { pitch: 2.0 * grid.pitch, origin: 0.0, count: grid.count / 2 };
        let fine = illuminated_set(&scene, &src, &grid, 40f64.to_radians(), 0.0).unwrap();
        let half = illuminated_set(&scene, &src, &coarse, 40f64.to_radians(), 0.0).unwrap();
        let diff = fine.len() as f64 / 2.0 - half.len() as f64;
        assert!(diff.abs() <= 1.0, "expected ≈half the atoms, got {} vs {}", half.len(), fine.len());
    }

    #[test]
    fn footprint_is_finite_and_continuous_at_broadside() {
        let d = 5.0;
        let bw = 0.5f64.to_radians();
        let at_zero = footprint_width(d, bw, 0.0);
        // Exact cone/plane intersection at broadside ≈ D·Δθ.
        assert!((at_zero - d * bw).abs() / (d * bw) < 1e-3);
        // No jumps across the blend region.
        let mut prev = footprint_width(d, bw, 0.0);
        let mut t = 0.0005f64;
        while t < 0.25 {
            let w = footprint_width(d, bw, t);
            assert!((w - prev).abs() < 0.02 * prev, "jump at θ={t}");
            prev = w;
            t += 0.0005;
        }
    }

    #[test]
    fn snapshot_advance_shifts_footprint_by_source_travel() {
        let scene = reference_scene();
        let src = reference_source();
        let grid = reference_grid();
        let a = illuminated_set(&scene, &src, &grid, 40f64.to_radians(), 0.0).unwrap();
        let b = illuminated_set(&scene, &src, &grid, 40f64.to_radians(), 1.0).unwrap();
        assert!((b.center_x - a.center_x - scene.step()).abs() < 1e-12);
    }

    #[test]
    fn sampling_limit_reference_roi() {
        let scene = reference_scene();
        let lam = reference_source().lambda0();
        let lim = angular_sampling_limit(
            &scene,
            lam,
            40f64.to_radians(),
            5f64.to_radians(),
            [13.8, 11.0],
            [1.0, 1.0],
            false,
        );
        // Frozen from the corner finite-difference oracle: ≈1.15 mrad, i.e.
        // ≳70 Tx angles across the 5° span (order-consistent with a 60-angle
        // reference sweep).
        assert!((lim - 1.147_211_8e-3).abs() < 1e-8);
        let n = (5f64.to_radians() / lim).floor() as usize + 1;
        assert_eq!(n, 77);
        // Dense-grid evaluation is conservative: never a larger step.
        let dense = angular_sampling_limit(
            &scene,
            lam,
            40f64.to_radians(),
            5f64.to_radians(),
            [13.8, 11.0],
            [1.0, 1.0],
            true,
        );
        assert!(dense <= lim);
        assert!((dense - 6.812_735_75e-4).abs() < 1e-8);
    }

    #[test]
    fn codebook_inclusive_grid_count() {
        let cb =
            TxCodebook::build(40f64.to_radians(), 5f64.to_radians(), 0.0833f64.to_radians())
                .unwrap();
        assert_eq!(cb.len(), 61);
        // Symmetric about the center up to one trailing step.
        let first = cb.angles[0];
        let last = *cb.angles.last().unwrap();
        let asym = ((first + last) / 2.0 - cb.center).abs();
        assert!(asym <= 0.0833f64.to_radians() / 2.0 + 1e-12);
        assert!(cb.angles.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn codebook_with_explicit_count_reproduces_sweep_timing() {
        let scene = reference_scene();
        let cb = TxCodebook::with_count(40f64.to_radians(), 5f64.to_radians(), 60).unwrap();
        assert_eq!(cb.len(), 60);
        assert!((cb.observation_time(scene.pri) - 3e-3).abs() < 1e-15);
        assert!((cb.sweep_travel(&scene) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn narrowband_worked_numbers() {
        // θ_i = 60°, D_i = 10 m. Bare inequality (factor 1) passes up to
        // ≈1.7 GHz for a 1° beam; the factor-10 default fails a 10° beam at
        // 500 MHz by a wide margin.
        let ti = 60f64.to_radians();
        let d_height = 10.0 * ti.cos();
        let w1 = d_height * 1f64.to_radians() / (ti.cos() * ti.sin());
        let m1 = narrowband_margin(1e9, w1, ti, ti, 1.0);
        assert!((m1 - 1.717_684_26).abs() < 1e-6);
        assert!(m1 > 1.0, "1 GHz should pass the bare inequality");
        let w10 = d_height * 10f64.to_radians() / (ti.cos() * ti.sin());
        let m10 = narrowband_margin(500e6, w10, ti, ti, 10.0);
        assert!((m10 - 0.034_353_685).abs() < 1e-8);
        assert!(m10 < 1.0, "500 MHz must fail with factor-10 dominance");
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(TxCodebook::build(0.7, 0.1, 0.0).is_err());
        assert!(TxCodebook::with_count(0.7, 0.1, 0).is_err());
        let scene = reference_scene();
        let src = reference_source();
        // A grid far away from the footprint is a coverage error.
        let far = AtomGrid { pitch: src.default_atom_pitch(), origin: 100.0, count: 10 };
        assert!(illuminated_set(&scene, &src, &far, 40f64.to_radians(), 0.0).is_err());
    }
}
