//! Wavenumber-coverage analysis: which spatial frequencies of the target's
//! reflectivity an acquisition actually probes, and the resolution bounds
//! that follow.
//!
//! Each pair of illuminated atoms (n, n′) contributes one plane-wave
//! component of the double bounce source → n → target → n′ → source, at
//! wavevector (2πf/c)(û_n + û_{n′}). Collecting all pairs of every
//! illuminated patch over the signal band yields the probed set; a point
//! target can at best be resolved to 2π over that set's extent along each
//! axis. The lens configuration attains the bound, the stroboscopic design
//! approaches it as sweeps accumulate, and a plain mirror collapses it to
//! what a single snapshot's footprint supports.

use std::collections::HashSet;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::codebook::{illuminated_set_at, AtomGrid, SourceConfig, TxCodebook};
use crate::geometry::{dist, SceneGeometry};
use crate::SPEED_OF_LIGHT;

/// Frequency samples across the band when the caller passes 0. Extents are
/// pinned by the band edges (always sampled), so doubling this changes them
/// by far less than 1%.
pub const DEFAULT_FREQ_SAMPLES: usize = 64;

/// Dedup quantum for k samples (rad/m): well below the spacing of distinct
/// atom pairs at the geometries of interest (~1e−4 rad/m), far above
/// accumulated rounding noise, so equal-by-construction samples merge and
/// distinct ones never do.
const K_BIN: f64 = 1e-9;

/// Bins per axis for the occupancy fraction. Coarse on purpose: occupancy
/// grades how much of the bounding box the samples fill, not the dedup grid.
const OCCUPANCY_BINS: usize = 64;

/// Wavevector probed by the atom pair (n, n′) at frequency `f`:
/// (2πf/c)(û_n + û_{n′}), with û_m the unit vector from atom m toward `r`.
///
/// Monostatic pairs (n = n′) give the two-way magnitude 2·2πf/c; bistatic
/// pairs fall short of it by the cosine of the half-angle between the two
/// view directions. `r` must not coincide with either atom.
pub fn pair_wavevector(n: [f64; 2], n_prime: [f64; 2], r: [f64; 2], f: f64) -> [f64; 2] {
    let k = 2.0 * PI * f / SPEED_OF_LIGHT;
    let (ux, uy) = unit_toward(n, r);
    let (vx, vy) = unit_toward(n_prime, r);
    [k * (ux + vx), k * (uy + vy)]
}

fn unit_toward(p: [f64; 2], r: [f64; 2]) -> (f64, f64) {
    let d = dist(p, r);
    ((r[0] - p[0]) / d, (r[1] - p[1]) / d)
}

/// Classical range resolution from bandwidth alone: c/(2B) — the 2π span of
/// a monostatic pair's |k| swept across the band is 4πB/c.
pub fn range_bound(bandwidth: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * bandwidth)
}

/// Inputs a coverage set was computed from, kept for reports and exports.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageProvenance {
    pub source: [f64; 2],
    pub target: [f64; 2],
    /// Carrier f0 (Hz).
    pub carrier: f64,
    /// Bandwidth B (Hz).
    pub bandwidth: f64,
    pub freq_samples: usize,
    /// Inclusive atom-index runs, one per illuminated patch.
    pub sets: Vec<(usize, usize)>,
}

/// The set of wavevectors probed by an acquisition, with its axis-aligned
/// extents. Samples are deduplicated on a fine fixed grid (1e−9 rad/m bins)
/// so unions of overlapping patches are exact set unions; the extents are
/// taken from the unquantized values.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberCoverage {
    /// Deduplicated samples (bin centers), sorted by (k_x, k_y).
    pub samples: Vec<[f64; 2]>,
    /// Δk_x: max − min of the x components (rad/m).
    pub extent_x: f64,
    /// Δk_y: max − min of the y components (rad/m).
    pub extent_y: f64,
    /// Fraction of a 64×64 grid over the bounding box holding at least one
    /// sample. Disjoint illuminated patches widen the box without filling
    /// it, so low occupancy flags sidelobe risk that the extents alone hide.
    pub occupancy: f64,
    pub provenance: CoverageProvenance,
}

impl WavenumberCoverage {
    /// Build a coverage record from raw k samples: dedup, sort, extents,
    /// occupancy. The enumeration front end [`coverage`] feeds this; tests
    /// feed it synthetic sets.
    pub fn from_samples(
        samples: impl IntoIterator<Item = [f64; 2]>,
        provenance: CoverageProvenance,
    ) -> crate::Result<Self> {
        let mut acc = Accumulator::default();
        for s in samples {
            acc.push(s[0], s[1]);
        }
        acc.finish(provenance)
    }
}

/// Running dedup set plus exact bounds over the raw (unquantized) samples.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    bins: HashSet<(i64, i64)>,
    min_x: Option<f64>,
    max_x: Option<f64>,
    min_y: Option<f64>,
    max_y: Option<f64>,
}

impl Accumulator {
    fn push(&mut self, kx: f64, ky: f64) {
        self.bins.insert(((kx / K_BIN).round() as i64, (ky / K_BIN).round() as i64));
        self.min_x = Some(self.min_x.map_or(kx, |m| m.min(kx)));
        self.max_x = Some(self.max_x.map_or(kx, |m| m.max(kx)));
        self.min_y = Some(self.min_y.map_or(ky, |m| m.min(ky)));
        self.max_y = Some(self.max_y.map_or(ky, |m| m.max(ky)));
    }

    fn merge(mut self, other: Self) -> Self {
        self.bins.extend(other.bins);
        for (a, b) in [
            (&mut self.min_x, other.min_x),
            (&mut self.min_y, other.min_y),
        ] {
            *a = match (*a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        }
        for (a, b) in [
            (&mut self.max_x, other.max_x),
            (&mut self.max_y, other.max_y),
        ] {
            *a = match (*a, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            };
        }
        self
    }

    fn finish(self, provenance: CoverageProvenance) -> crate::Result<WavenumberCoverage> {
        let (Some(min_x), Some(max_x), Some(min_y), Some(max_y)) =
            (self.min_x, self.max_x, self.min_y, self.max_y)
        else {
            return Err(crate::Error::Validation("coverage needs at least one sample".into()));
        };
        if !(min_x.is_finite() && max_x.is_finite() && min_y.is_finite() && max_y.is_finite()) {
            return Err(crate::Error::Numeric(
                "non-finite wavevector (target coincides with an atom?)".into(),
            ));
        }
        let mut keys: Vec<(i64, i64)> = self.bins.into_iter().collect();
        keys.sort_unstable();
        let samples: Vec<[f64; 2]> =
            keys.iter().map(|&(bx, by)| [bx as f64 * K_BIN, by as f64 * K_BIN]).collect();
        let occupancy = occupancy(&samples, min_x, max_x, min_y, max_y);
        Ok(WavenumberCoverage {
            samples,
            extent_x: max_x - min_x,
            extent_y: max_y - min_y,
            occupancy,
            provenance,
        })
    }
}

fn occupancy(samples: &[[f64; 2]], min_x: f64, max_x: f64, min_y: f64, max_y: f64) -> f64 {
    let nx = if max_x > min_x { OCCUPANCY_BINS } else { 1 };
    let ny = if max_y > min_y { OCCUPANCY_BINS } else { 1 };
    let mut filled = HashSet::new();
    for s in samples {
        let bx = if nx == 1 {
            0
        } else {
            (((s[0] - min_x) / (max_x - min_x) * nx as f64) as usize).min(nx - 1)
        };
        let by = if ny == 1 {
            0
        } else {
            (((s[1] - min_y) / (max_y - min_y) * ny as f64) as usize).min(ny - 1)
        };
        filled.insert((bx, by));
    }
    filled.len() as f64 / (nx * ny) as f64
}

/// Inclusive frequency grid across [f0 − B/2, f0 + B/2]; a single sample
/// degenerates to the carrier alone.
fn frequency_samples(carrier: f64, bandwidth: f64, count: usize) -> Vec<f64> {
    let count = if count == 0 { DEFAULT_FREQ_SAMPLES } else { count };
    if count == 1 || bandwidth == 0.0 {
        return vec![carrier];
    }
    (0..count)
        .map(|i| carrier - bandwidth / 2.0 + i as f64 * bandwidth / (count - 1) as f64)
        .collect()
}

/// Wavenumber coverage of an acquisition: every unordered pair (n, n′)
/// within each element set, at `freq_samples` frequencies across the band
/// (0 picks [`DEFAULT_FREQ_SAMPLES`]), unioned over the sets. Pairs are never
/// formed across sets — patches illuminate the target at different times, so
/// their contributions add as separate looks, not as one larger aperture.
///
/// `source` enters the provenance only; it selected the sets, but the
/// wavevectors depend on the atoms and the target alone.
pub fn coverage(
    source: [f64; 2],
    target: [f64; 2],
    grid: &AtomGrid,
    sets: &[(usize, usize)],
    carrier: f64,
    bandwidth: f64,
    freq_samples: usize,
) -> crate::Result<WavenumberCoverage> {
    if sets.is_empty() {
        return Err(crate::Error::Validation("coverage needs at least one element set".into()));
    }
    for &(a, b) in sets {
        if a > b || b >= grid.count {
            return Err(crate::Error::Validation(format!(
                "element set {a}..={b} does not fit the plane's {} atoms",
                grid.count
            )));
        }
    }
    let freqs = frequency_samples(carrier, bandwidth, freq_samples);
    // The wavevector is symmetric in (n, n′), so enumerate n ≤ n′ only,
    // parallel over the outer atom of each set.
    let tasks: Vec<(usize, usize)> =
        sets.iter().flat_map(|&(a, b)| (a..=b).map(move |n| (n, b))).collect();
    let acc = tasks
        .par_iter()
        .fold(Accumulator::default, |mut acc, &(n, last)| {
            let (ux, uy) = unit_toward([grid.atom_x(n), 0.0], target);
            for m in n..=last {
                let (vx, vy) = unit_toward([grid.atom_x(m), 0.0], target);
                let (sx, sy) = (ux + vx, uy + vy);
                for &f in &freqs {
                    let k = 2.0 * PI * f / SPEED_OF_LIGHT;
                    acc.push(k * sx, k * sy);
                }
            }
            acc
        })
        .reduce(Accumulator::default, Accumulator::merge);
    acc.finish(CoverageProvenance {
        source,
        target,
        carrier,
        bandwidth,
        freq_samples: freqs.len(),
        sets: sets.to_vec(),
    })
}

/// Illuminated atom runs for one sweep, one per snapshot, in plane
/// coordinates. Feeding these to [`coverage`] with the sweep-center source
/// position approximates the co-moving acquisition; the source advances a
/// few cm over a sweep against ranges of tens of m, so the error is well
/// inside the bounds' own approximation.
pub fn sweep_element_sets(
    scene: &SceneGeometry,
    source: &SourceConfig,
    codebook: &TxCodebook,
    grid: &AtomGrid,
) -> crate::Result<Vec<(usize, usize)>> {
    codebook
        .angles
        .iter()
        .enumerate()
        .map(|(l, &theta)| {
            let s = scene.source_position(l as f64);
            illuminated_set_at(s, source, grid, theta).map(|set| (set.first, set.last))
        })
        .collect()
}

/// Lower bounds on the image mainlobe widths from the coverage extents:
/// (2π/Δk_x, 2π/Δk_y). A zero extent means that axis is not resolved at all;
/// the bound is +∞ and a diagnostic is printed.
pub fn resolution_bounds(cov: &WavenumberCoverage) -> (f64, f64) {
    let bound = |extent: f64, axis: &str| {
        if extent > 0.0 {
            2.0 * PI / extent
        } else {
            eprintln!("warning: wavenumber coverage has zero {axis} extent; resolution along {axis} is unbounded");
            f64::INFINITY
        }
    };
    (bound(cov.extent_x, "x"), bound(cov.extent_y, "y"))
}

/// Per-atom phases focusing the double bounce from `source` onto `target`:
/// φ_n = (2π/λ0)(‖s − p_n‖ + ‖p_n − r‖) for n over the inclusive run `set`.
/// Atom for atom the same numbers the plane module's lens mode builds.
pub fn focusing_phases(
    lambda0: f64,
    source: [f64; 2],
    target: [f64; 2],
    grid: &AtomGrid,
    set: (usize, usize),
) -> Vec<f64> {
    let k0 = 2.0 * PI / lambda0;
    (set.0..=set.1)
        .map(|n| {
            let p = [grid.atom_x(n), 0.0];
            k0 * (dist(source, p) + dist(p, target))
        })
        .collect()
}

/// Spread (max − min) across the run of the double-bounce phase left over
/// after `phases` are applied: how far the configuration is from focusing on
/// `probe`. Exactly zero on the design target; reaches π once the probe
/// moves a resolution cell off it. `phases` is indexed relative to the run,
/// as returned by [`focusing_phases`].
pub fn residual_phase_spread(
    lambda0: f64,
    source: [f64; 2],
    probe: [f64; 2],
    grid: &AtomGrid,
    set: (usize, usize),
    phases: &[f64],
) -> f64 {
    let k0 = 2.0 * PI / lambda0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, n) in (set.0..=set.1).enumerate() {
        let p = [grid.atom_x(n), 0.0];
        let res = phases[i] - k0 * (dist(source, p) + dist(p, probe));
        lo = lo.min(res);
        hi = hi.max(res);
    }
    hi - lo
}

/// Where the specular bounce from `source` to `target` meets the plane — the
/// image-source construction with s′ = (s_x, −s_y).
pub fn specular_point(source: [f64; 2], target: [f64; 2]) -> [f64; 2] {
    [
        source[0] + (target[0] - source[0]) * source[1] / (source[1] + target[1]),
        0.0,
    ]
}

/// Mirror-baseline cross-range resolution, set by the source alone. Over a
/// uniform mirror the relative patch geometry repeats identically every
/// snapshot, so the single footprint `footprint` around the specular point
/// is the only coherent aperture. The x spread of the viewing directions it
/// subtends at the target is W·r_y²/D_o³ (one r_y/D_o for the subtended
/// angle, one for its x projection), giving δ ≈ λ0·D_o³/(2·W·r_y²).
pub fn mirror_resolution_prediction(lambda0: f64, footprint: f64, d_o: f64, r_y: f64) -> f64 {
    lambda0 * d_o.powi(3) / (2.0 * footprint * r_y * r_y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::{build_plane, PlaneSpec};
    use proptest::prelude::*;

    const F0: f64 = 77e9;
    const B: f64 = 500e6;
    const LAMBDA: f64 = SPEED_OF_LIGHT / F0;

    fn grid(origin: f64, count: usize) -> AtomGrid {
        AtomGrid { pitch: LAMBDA / 2.0, origin, count }
    }

    #[test]
    fn monostatic_pair_is_the_two_way_wavevector() {
        let k = pair_wavevector([0.0, 0.0], [0.0, 0.0], [0.0, 7.0], F0);
        assert_eq!(k[0], 0.0);
        let expect = 4.0 * PI * F0 / SPEED_OF_LIGHT;
        assert!((k[1] - expect).abs() < 1e-12 * expect, "{} vs {expect}", k[1]);

        // Mirrored pairs about the target's foot cancel their x components
        // and share the y component.
        let r = [0.0, 9.0];
        let a = pair_wavevector([1.0, 0.0], [2.5, 0.0], r, F0);
        let b = pair_wavevector([-1.0, 0.0], [-2.5, 0.0], r, F0);
        assert_eq!(a[0] + b[0], 0.0);
        assert_eq!(a[1], b[1]);
    }

    #[test]
    fn band_sweep_spans_the_classical_range_cell() {
        // One atom, broadside target: all samples sit on the k_y axis and
        // the band sweep spans Δ|k| = 4πB/c exactly (edges included).
        let g = grid(0.0, 1);
        let cov = coverage([0.0, 5.0], [0.0, 10.0], &g, &[(0, 0)], F0, B, 64).unwrap();
        assert_eq!(cov.extent_x, 0.0);
        let expect = 4.0 * PI * B / SPEED_OF_LIGHT;
        assert!((cov.extent_y - expect).abs() < 1e-12 * expect);
        let (dx, dy) = resolution_bounds(&cov);
        assert!(dx.is_infinite());
        assert!((dy - range_bound(B)).abs() < 1e-12);
        assert_eq!(range_bound(500e6), 0.299_792_458);

        // Single atom at a single frequency probes a single wavevector.
        let single = coverage([0.0, 5.0], [3.0, 10.0], &g, &[(0, 0)], F0, B, 1).unwrap();
        assert_eq!(single.samples.len(), 1);
    }

    #[test]
    fn coverage_matches_a_literal_pair_enumeration() {
        // Brute-force oracle on a small instance: every ordered pair of each
        // set at every frequency, straight off pair_wavevector.
        let g = AtomGrid { pitch: 0.1, origin: 0.0, count: 7 };
        let r = [5.0, 8.0];
        let sets = [(0usize, 2usize), (4, 6)];
        let freqs = [F0 - B / 2.0, F0, F0 + B / 2.0];
        let mut expect = HashSet::new();
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(a, b) in &sets {
            for n in a..=b {
                for m in a..=b {
                    for &f in &freqs {
                        let k = pair_wavevector(
                            [g.atom_x(n), 0.0],
                            [g.atom_x(m), 0.0],
                            r,
                            f,
                        );
                        expect.insert((
                            (k[0] / 1e-9).round() as i64,
                            (k[1] / 1e-9).round() as i64,
                        ));
                        min_x = min_x.min(k[0]);
                        max_x = max_x.max(k[0]);
                    }
                }
            }
        }
        let cov = coverage([2.0, 5.0], r, &g, &sets, F0, B, 3).unwrap();
        let got: HashSet<(i64, i64)> = cov
            .samples
            .iter()
            .map(|s| ((s[0] / 1e-9).round() as i64, (s[1] / 1e-9).round() as i64))
            .collect();
        assert_eq!(got, expect);
        assert!((cov.extent_x - (max_x - min_x)).abs() < 1e-12);

        // Two disjoint patches at different bearings widen Δk_x beyond
        // either patch alone, but fill the box more sparsely than one
        // contiguous patch over the same span.
        let lo = coverage([2.0, 5.0], r, &g, &[(0, 2)], F0, B, 3).unwrap();
        let hi = coverage([2.0, 5.0], r, &g, &[(4, 6)], F0, B, 3).unwrap();
        assert!(cov.extent_x > lo.extent_x && cov.extent_x > hi.extent_x);
        let contiguous = coverage([2.0, 5.0], r, &g, &[(0, 6)], F0, B, 3).unwrap();
        assert!(cov.occupancy < contiguous.occupancy);

        // Bad sets are rejected up front.
        assert!(coverage([2.0, 5.0], r, &g, &[], F0, B, 3).is_err());
        assert!(coverage([2.0, 5.0], r, &g, &[(3, 9)], F0, B, 3).is_err());
    }

    #[test]
    fn overlapping_partitions_cover_identically() {
        // Re-adding subsets of an already-covered patch changes nothing
        // (set semantics under the dedup grid), and splitting a patch into
        // overlapping halves keeps the bounding box: the extremes ride on
        // monostatic end pairs, which every overlapping split retains. The
        // interior cross-half pairs are the only difference.
        let g = grid(3.0, 10);
        let r = [6.0, 12.0];
        let full = coverage([1.0, 5.0], r, &g, &[(0, 9)], F0, B, 4).unwrap();
        let redundant =
            coverage([1.0, 5.0], r, &g, &[(0, 9), (0, 6), (3, 9)], F0, B, 4).unwrap();
        assert_eq!(full.samples, redundant.samples);
        assert_eq!(full.extent_x, redundant.extent_x);
        assert_eq!(full.extent_y, redundant.extent_y);

        let halves = coverage([1.0, 5.0], r, &g, &[(0, 6), (3, 9)], F0, B, 4).unwrap();
        assert!((halves.extent_x - full.extent_x).abs() < 1e-12);
        assert!((halves.extent_y - full.extent_y).abs() < 1e-12);
    }

    #[test]
    fn doubling_the_extents_halves_the_bounds() {
        let g = grid(0.0, 12);
        let r = [4.0, 9.0];
        let base = coverage([0.0, 5.0], r, &g, &[(0, 11)], F0, B, 8).unwrap();
        let scaled = WavenumberCoverage::from_samples(
            base.samples.iter().map(|s| [2.0 * s[0], 2.0 * s[1]]),
            base.provenance.clone(),
        )
        .unwrap();
        let (bx, by) = resolution_bounds(&base);
        let (sx, sy) = resolution_bounds(&scaled);
        assert!((sx - bx / 2.0).abs() < 1e-9 * bx);
        assert!((sy - by / 2.0).abs() < 1e-9 * by);
    }

    #[test]
    fn frequency_sampling_is_converged_at_the_default() {
        let g = grid(2.0, 120);
        let r = [10.0, 11.0];
        let sets = [(0usize, 39usize), (40, 79), (80, 119)];
        let a = coverage([0.0, 5.0], r, &g, &sets, F0, B, 64).unwrap();
        let b = coverage([0.0, 5.0], r, &g, &sets, F0, B, 128).unwrap();
        assert!((a.extent_x - b.extent_x).abs() < 0.01 * b.extent_x);
        assert!((a.extent_y - b.extent_y).abs() < 0.01 * b.extent_y);
        // 0 picks the default count.
        let c = coverage([0.0, 5.0], r, &g, &sets, F0, B, 0).unwrap();
        assert_eq!(a.samples, c.samples);
        assert_eq!(c.provenance.freq_samples, DEFAULT_FREQ_SAMPLES);
    }

    #[test]
    fn near_targets_widen_vertical_coverage() {
        let g = grid(8.0, 200);
        let far = coverage([0.0, 5.0], [10.0, 20.0], &g, &[(0, 199)], F0, B, 2).unwrap();
        let near = coverage([0.0, 5.0], [10.0, 5.0], &g, &[(0, 199)], F0, B, 2).unwrap();
        assert!(near.extent_y > far.extent_y);
        let (_, dy_far) = resolution_bounds(&far);
        let (_, dy_near) = resolution_bounds(&near);
        assert!(dy_near < dy_far);
    }

    #[test]
    fn focusing_phases_match_the_lens_plane() {
        let g = grid(3.0, 40);
        let s = [0.0, 5.0];
        let r = [13.8, 11.0];
        let phases = focusing_phases(LAMBDA, s, r, &g, (0, 39));
        let lens = build_plane(LAMBDA, g, PlaneSpec::Lens { source: s, target: r }).unwrap();
        assert_eq!(phases, lens.phases);

        assert_eq!(focusing_phases(LAMBDA, s, r, &g, (7, 7)).len(), 1);
        assert_eq!(residual_phase_spread(LAMBDA, s, r, &g, (0, 39), &phases), 0.0);
    }

    #[test]
    fn defocusing_by_one_cell_spreads_the_phase_past_pi() {
        let g = grid(3.0, 40);
        let s = [0.0, 5.0];
        let r = [13.8, 11.0];
        let phases = focusing_phases(LAMBDA, s, r, &g, (0, 39));
        // One single-frequency resolution cell along x. Under the linearized
        // phase the spread at that displacement is exactly π; the exact
        // distances bend it a hair either way depending on the side, so
        // probe both and take the larger.
        let cov = coverage(s, r, &g, &[(0, 39)], F0, B, 1).unwrap();
        let (dx, _) = resolution_bounds(&cov);
        let spread = [r[0] - dx, r[0] + dx]
            .into_iter()
            .map(|x| residual_phase_spread(LAMBDA, s, [x, r[1]], &g, (0, 39), &phases))
            .fold(0.0, f64::max);
        assert!(spread >= PI, "spread {spread} at one cell {dx}");
    }

    #[test]
    fn mirror_restriction_matches_the_source_aperture() {
        // With a mirror, every snapshot repeats the same relative patch
        // geometry, so the coverage restricted to one specular footprint is
        // all the acquisition gets. Its bound must agree with the
        // closed-form source-aperture prediction; the full stroboscopic
        // sweep must beat it by a wide margin.
        let scene = SceneGeometry {
            source_height: 5.0,
            source_start_x: 0.0,
            speed: 20.0,
            pri: 50e-6,
        };
        let src = SourceConfig {
            carrier: F0,
            bandwidth: B,
            aperture: SourceConfig::aperture_for_beamwidth(F0, 0.5f64.to_radians()),
            pulse_duration: 10e-6,
        };
        let s = [0.0, 5.0];
        let r = [13.8, 11.0];
        let sp = specular_point(s, r);
        assert!((sp[0] - 4.3125).abs() < 1e-12);
        let theta_star = (sp[0] - s[0]).atan2(s[1]);

        let g = AtomGrid { pitch: LAMBDA / 2.0, origin: 3.5, count: 900 };
        let set = illuminated_set_at(s, &src, &g, theta_star).unwrap();
        let mirror =
            coverage(s, r, &g, &[(set.first, set.last)], F0, B, 1).unwrap();
        let (dx_mirror, _) = resolution_bounds(&mirror);
        let predicted =
            mirror_resolution_prediction(LAMBDA, set.width, dist(sp, r), r[1]);
        assert!(
            (dx_mirror - predicted).abs() < 0.3 * predicted,
            "coverage {dx_mirror} vs source-aperture {predicted}"
        );

        let sweep = TxCodebook::build(
            40f64.to_radians(),
            5f64.to_radians(),
            0.125f64.to_radians(),
        )
        .unwrap();
        let sets = sweep_element_sets(&scene, &src, &sweep, &g).unwrap();
        assert_eq!(sets.len(), sweep.angles.len());
        assert!(sets.windows(2).all(|w| w[1].0 >= w[0].0), "footprints march right");
        let strobe = coverage(s, r, &g, &sets, F0, B, 1).unwrap();
        let (dx_strobe, _) = resolution_bounds(&strobe);
        assert!(
            dx_strobe < 0.5 * dx_mirror,
            "sweep {dx_strobe} should beat the mirror {dx_mirror} by 2x"
        );
    }

    proptest! {
        // Monostatic pairs at the top band edge dominate: no sample exceeds
        // the two-way magnitude there, and some sample attains it.
        #[test]
        fn monostatic_pairs_dominate(
            origin in -10.0..10.0f64,
            count in 2usize..12,
            rx in -20.0..20.0f64,
            ry in 2.0..25.0f64,
        ) {
            let g = AtomGrid { pitch: 0.05, origin, count };
            let cov = coverage([0.0, 5.0], [rx, ry], &g, &[(0, count - 1)], F0, B, 5).unwrap();
            let k_top = 2.0 * 2.0 * PI * (F0 + B / 2.0) / SPEED_OF_LIGHT;
            let max_norm = cov
                .samples
                .iter()
                .map(|s| s[0].hypot(s[1]))
                .fold(0.0, f64::max);
            prop_assert!(max_norm <= k_top * (1.0 + 1e-9));
            prop_assert!(max_norm >= k_top * (1.0 - 1e-9));
        }
    }
}
