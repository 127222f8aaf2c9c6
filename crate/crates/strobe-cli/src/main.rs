//! Command-line driver. A scenario file (or `--paper-defaults`) fixes every
//! knob of a run; the subcommands stage the pipeline through ordinary files
//! so each step is cacheable and diffable:
//!
//!   strobe design    → plane.bin, design.report, tx_codebook.csv
//!   strobe simulate  → echo.cube, run.manifest
//!   strobe image     → image.bin + metrics/CSV/PGM sidecars
//!   strobe study     → study.<kind>.csv + summary
//!
//! `--threads` resizes the worker pool and must never change output bytes;
//! all parallelism is inside the library, behind order-preserving collects.

use std::fmt::Display;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use strobe_core::codebook::{
    angular_sampling_limit, effective_aperture, footprint_width, narrowband_margin,
};
use strobe_core::geometry::reflection_angle;
use strobe_core::imaging::{analyze, backproject, combine_sweeps, islr, ImageGrid, ImageMetrics};
use strobe_core::io;
use strobe_core::perturbation::{
    gamma_draw, perturbed_truth, random_illumination_study, IlluminationStudyConfig,
};
use strobe_core::plane::{
    build_plane, max_module_atoms, module_atoms, reflection_step_limit, required_grid, PlaneDesign,
};
use strobe_core::scenario::{GammaPolicy, PlaneMode, Scenario};
use strobe_core::signal::{delay_bounds, synthesize_sweep, FastTimeGrid};
use strobe_core::tomography::{coverage, resolution_bounds, sweep_element_sets};
use strobe_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "strobe",
    version,
    about = "Design, simulate and image roadside-plane radar scenarios"
)]
struct Cli {
    /// Scenario file (TOML). Exactly one of this and --paper-defaults.
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,

    /// Run on the built-in reference scenario instead of a file.
    #[arg(long, global = true)]
    paper_defaults: bool,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Replace the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads. Affects speed, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Single-field scenario tweak, dotted path = TOML value; repeatable.
    /// Example: --override reflection.period_m=1.0
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design the reflection plane; write the plane file and a design report.
    Design,
    /// Synthesize the echo cube for the scenario.
    Simulate {
        /// Reuse a designed plane file instead of designing in-process.
        #[arg(long, value_name = "PATH")]
        plane: Option<PathBuf>,
    },
    /// Back-project a cube into an image and measure it.
    Image {
        /// Echo cube to image (default: <out>/echo.cube).
        #[arg(long, value_name = "PATH")]
        cube: Option<PathBuf>,
        /// Label carried in the image file and metrics record
        /// (default: the plane mode).
        #[arg(long)]
        tag: Option<String>,
        /// Imaging-side scenario tweak (assumed geometry only — the cube is
        /// left as recorded); same syntax as --override, repeatable.
        #[arg(long, value_name = "KEY=VALUE")]
        assume: Vec<String>,
    },
    /// Run a predefined parameter study; write its table and summary.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StudyKind {
    /// ISLR of the coherent sweep combination versus sweep count.
    SweepConvergence,
    /// Image quality versus reflection-codebook size (module size).
    ModuleSize,
    /// Sidelobe level versus pattern period at fixed source aperture.
    Periodicity,
    /// Vertical resolution versus target distance.
    NearField,
    /// Image quality spread over random pattern alignments.
    Gamma,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = match &err {
                Error::Validation(_) => (2u8, "validation"),
                Error::Infeasible(_) => (3, "infeasible"),
                Error::Numeric(_) => (4, "numeric"),
                Error::Io(_) => (4, "io"),
            };
            // One parseable line: message is quoted/escaped by Debug.
            eprintln!("status=error kind={kind} exit={code} message={:?}", err.to_string());
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
    }
    let scenario = load_scenario(&cli)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.cmd {
        Cmd::Design => cmd_design(&cli.out, &scenario),
        Cmd::Simulate { plane } => cmd_simulate(&cli.out, &scenario, plane.as_deref()),
        Cmd::Image { cube, tag, assume } => {
            cmd_image(&cli.out, &scenario, cube.as_deref(), tag, &assume)
        }
        Cmd::Study { kind } => cmd_study(&cli.out, &scenario, kind),
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario> {
    let mut sc = match (&cli.scenario, cli.paper_defaults) {
        (Some(_), true) => {
            return Err(Error::Validation(
                "give --scenario or --paper-defaults, not both".into(),
            ))
        }
        (Some(path), false) => Scenario::load(path)?,
        (None, true) => Scenario::paper_defaults(),
        (None, false) => {
            return Err(Error::Validation(
                "no scenario: pass --scenario <file> or --paper-defaults".into(),
            ))
        }
    };
    for ov in &cli.overrides {
        let (key, value) = split_override(ov)?;
        sc = sc.with_override(key, value)?;
    }
    if let Some(seed) = cli.seed {
        sc = sc.with_override("seed", &seed.to_string())?;
    }
    Ok(sc)
}

fn split_override(ov: &str) -> Result<(&str, &str)> {
    ov.split_once('=')
        .ok_or_else(|| Error::Validation(format!("override '{ov}' is not KEY=VALUE")))
}

/// Pattern phase the plane is built with: the scenario value, or one draw
/// from the seed under the random policy (a physical plate has exactly one
/// alignment; per-sweep draws belong to the gamma/sweep-convergence studies).
fn plane_gamma(sc: &Scenario) -> Option<f64> {
    match (sc.reflection.mode, sc.reflection.gamma_policy) {
        (PlaneMode::Stroboscopic, GammaPolicy::Random) => Some(gamma_draw(sc.seed, 0)),
        _ => None,
    }
}

/// Build the scenario's plane over a grid sized for its sweeps.
fn design_plane(sc: &Scenario) -> Result<PlaneDesign> {
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let grid = required_grid(
        &scene,
        &cfg,
        &tx,
        sc.sweeps,
        sc.sim.plane_margin_periods * sc.reflection.period_m,
        cfg.default_atom_pitch(),
    );
    build_plane(cfg.lambda0(), grid, sc.plane_spec(plane_gamma(sc))?)
}

/// Fast-time window wide enough for every target and every ROI pixel over
/// the whole sweep, so back-projection never reads outside the recording.
fn fast_time_for(sc: &Scenario) -> Result<FastTimeGrid> {
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let mut points: Vec<[f64; 2]> =
        sc.target_set().targets.iter().map(|t| t.position).collect();
    let c = [sc.roi.center_x_m, sc.roi.center_y_m];
    let e = [sc.roi.extent_x_m, sc.roi.extent_y_m];
    for sx in [-0.5, 0.5] {
        for sy in [-0.5, 0.5] {
            points.push([c[0] + sx * e[0], c[1] + sy * e[1]]);
        }
    }
    let (lo, hi) = delay_bounds(&scene, &tx, &points);
    FastTimeGrid::covering(lo, hi, cfg.bandwidth, sc.sim.oversample)
}

/// Flat key=value record, one entry per line. Floats go through `Display`,
/// which round-trips f64 exactly.
struct Record {
    text: String,
}

impl Record {
    fn new(format: &str) -> Self {
        Record { text: format!("format={format}\n") }
    }

    fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        writeln!(self.text, "{key}={value}").expect("string write");
        self
    }

    fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.text)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// design

fn cmd_design(out: &Path, sc: &Scenario) -> Result<()> {
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let lambda0 = cfg.lambda0();
    let d = cfg.default_atom_pitch();
    let rc = sc.reflection_codebook();
    let angles = rc.angles();
    let period = sc.reflection.period_m;
    let roi_c = [sc.roi.center_x_m, sc.roi.center_y_m];
    let roi_e = [sc.roi.extent_x_m, sc.roi.extent_y_m];

    let n_mod = module_atoms(period, d, rc.count);
    let n_mod_max = max_module_atoms(lambda0, period, d, rc.span, &angles);
    let step_limit = reflection_step_limit(lambda0, n_mod * d, &angles);
    let tx_limit =
        angular_sampling_limit(&scene, lambda0, tx.center, tx.span, roi_c, roi_e, true);
    let tx_step = if tx.angles.len() > 1 { tx.angles[1] - tx.angles[0] } else { 0.0 };
    let a_eff = effective_aperture(scene.source_height, tx.center, tx.span);

    // Worst narrowband margin over the sweep, in the relative (co-moving)
    // geometry; the simulator rechecks per snapshot and warns the same way.
    let mut margin_min = f64::INFINITY;
    let mut margin_at = tx.center;
    for &theta in &tx.angles {
        let w = footprint_width(scene.source_height, cfg.source_beamwidth(theta), theta);
        let p = scene.intercept_point(theta, 0.0);
        let m = narrowband_margin(cfg.bandwidth, w, theta, reflection_angle(p, roi_c), 1.0)
            / sc.sim.narrowband_factor;
        if m < margin_min {
            margin_min = m;
            margin_at = theta;
        }
    }

    let mut notes: Vec<String> = Vec::new();
    let mut feasible = true;
    if n_mod > n_mod_max {
        feasible = false;
        notes.push(format!(
            "modules of {n_mod:.1} atoms exceed the focusing-error limit {n_mod_max:.1}; \
             enlarge the reflection codebook or shorten the period"
        ));
    }
    if let Some(step) = rc.step() {
        if step > step_limit {
            feasible = false;
            notes.push(format!(
                "reflection step {:.4}° exceeds the quantization limit {:.4}°",
                step.to_degrees(),
                step_limit.to_degrees()
            ));
        }
    }
    if rc.span == 0.0 {
        notes.push(
            "zero-extent region of interest: the reflection codebook collapses to a \
             single angle and offers no angular diversity"
                .into(),
        );
    }
    for note in &notes {
        eprintln!("warning: {note}");
    }

    let mut rep = Record::new("design-report");
    rep.push("scenario", sc.hash_hex())
        .push("mode", mode_name(sc.reflection.mode))
        .push("lambda0_m", lambda0)
        .push("atom_pitch_m", d)
        .push("tx_center_deg", tx.center.to_degrees())
        .push("tx_span_deg", tx.span.to_degrees())
        .push("tx_beams", tx.len())
        .push("tx_step_deg", tx_step.to_degrees())
        .push("tx_step_limit_deg", tx_limit.to_degrees())
        .push("tx_step_compliant", tx_step <= tx_limit)
        .push("observation_time_s", tx.observation_time(scene.pri))
        .push("sweep_travel_m", tx.sweep_travel(&scene))
        .push("effective_aperture_m", a_eff)
        .push("reflection_center_deg", rc.center.to_degrees())
        .push("reflection_span_deg", rc.span.to_degrees())
        .push("reflection_count", rc.count)
        .push(
            "reflection_step_deg",
            rc.step().map_or("none".to_string(), |s| s.to_degrees().to_string()),
        )
        .push("reflection_step_limit_deg", step_limit.to_degrees())
        .push(
            "reflection_step_compliant",
            rc.step().map_or(true, |s| s <= step_limit),
        )
        .push("period_m", period)
        .push("module_atoms", n_mod)
        .push("module_atoms_max", n_mod_max)
        .push("module_width_m", n_mod * d)
        .push("narrowband_margin_min", margin_min)
        .push("narrowband_margin_at_deg", margin_at.to_degrees())
        .push("feasible", feasible);
    let angle_list = angles
        .iter()
        .map(|a| format!("{:.6}", a.to_degrees()))
        .collect::<Vec<_>>()
        .join(",");
    rep.push("reflection_angles_deg", angle_list);
    for note in &notes {
        rep.push("note", note);
    }
    rep.write(&out.join("design.report"))?;

    io::write_codebook(&out.join("tx_codebook.csv"), &tx, tx_limit)?;
    println!("wrote {}", out.join("tx_codebook.csv").display());

    if !feasible {
        return Err(Error::Infeasible(format!(
            "{} (see {})",
            notes.join("; "),
            out.join("design.report").display()
        )));
    }

    let design = design_plane(sc)?;
    io::write_plane(&out.join("plane.bin"), &design, &sc.hash_hex())?;
    println!("wrote {}", out.join("plane.bin").display());
    println!(
        "design: {} atoms over [{:.3}, {:.3}] m, module width {:.4} m ({:.1} of max {:.1} atoms)",
        design.grid.count,
        design.grid.origin,
        design.grid.x_max(),
        n_mod * d,
        n_mod,
        n_mod_max
    );
    Ok(())
}

fn mode_name(mode: PlaneMode) -> &'static str {
    match mode {
        PlaneMode::Stroboscopic => "stroboscopic",
        PlaneMode::Lens => "lens",
        PlaneMode::Mirror => "mirror",
    }
}

// ---------------------------------------------------------------------------
// simulate

fn cmd_simulate(out: &Path, sc: &Scenario, plane_path: Option<&Path>) -> Result<()> {
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let targets = sc.target_set();

    let design = match plane_path {
        Some(path) => {
            let (design, hash) = io::read_plane(path)?;
            if hash != sc.hash_hex() {
                eprintln!(
                    "warning: plane {} was designed from scenario {hash}, current is {}",
                    path.display(),
                    sc.hash_hex()
                );
            }
            let lambda0 = cfg.lambda0();
            if (design.lambda0 - lambda0).abs() > 1e-9 * lambda0 {
                return Err(Error::Validation(format!(
                    "plane {} was built for wavelength {} m, scenario wants {} m",
                    path.display(),
                    design.lambda0,
                    lambda0
                )));
            }
            design
        }
        None => design_plane(sc)?,
    };

    // The plane must span every footprint of the requested sweeps.
    let req = required_grid(&scene, &cfg, &tx, sc.sweeps, 0.0, design.grid.pitch);
    let tol = design.grid.pitch / 2.0;
    if design.grid.origin > req.origin + tol || design.grid.x_max() < req.x_max() - tol {
        return Err(Error::Validation(format!(
            "plane [{:.3}, {:.3}] m does not cover the sweep footprints [{:.3}, {:.3}] m",
            design.grid.origin,
            design.grid.x_max(),
            req.origin,
            req.x_max()
        )));
    }

    let truth = perturbed_truth(&scene, &targets, &sc.perturbation_spec())?;
    let fast_time = fast_time_for(sc)?;
    let params = sc.synthesis_params();
    let started = Instant::now();
    let cube = synthesize_sweep(&truth, &cfg, &design, &tx, sc.sweeps, &fast_time, &params)?;
    let synthesis_ms = started.elapsed().as_millis();

    io::write_cube(&out.join("echo.cube"), &cube, &sc.hash_hex())?;
    println!("wrote {}", out.join("echo.cube").display());

    let mut man = Record::new("run-manifest");
    man.push("scenario", sc.hash_hex())
        .push("seed", cube.seed)
        .push("sweeps", cube.sweeps)
        .push("snapshots", cube.snapshots())
        .push("samples_per_snapshot", cube.fast_time.count)
        .push("noise_power", cube.noise_power)
        .push("narrowband_margin", cube.narrowband_margin)
        .push("plane_atoms", design.grid.count)
        .push("synthesis_ms", synthesis_ms);
    if let Some(gamma) = plane_gamma(sc) {
        if plane_path.is_none() {
            man.push("gamma_rad_drawn", gamma);
        }
    }
    man.write(&out.join("run.manifest"))?;
    println!(
        "simulate: {} snapshots x {} samples, narrowband margin {:.2}",
        cube.snapshots(),
        cube.fast_time.count,
        cube.narrowband_margin
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// image

fn cmd_image(
    out: &Path,
    sc: &Scenario,
    cube_path: Option<&Path>,
    tag: Option<String>,
    assume: &[String],
) -> Result<()> {
    let default_cube = out.join("echo.cube");
    let cube_path = cube_path.unwrap_or(&default_cube);
    let (cube, cube_hash) = io::read_cube(cube_path)?;
    if cube_hash != sc.hash_hex() {
        return Err(Error::Validation(format!(
            "cube {} was synthesized from scenario {cube_hash}, current is {}; \
             image with the matching scenario (use --assume for imaging-side tweaks)",
            cube_path.display(),
            sc.hash_hex()
        )));
    }

    // Assumed-geometry tweaks change only the back-projection side; the
    // recorded echoes stay as they are.
    let mut assumed = sc.clone();
    for ov in assume {
        let (key, value) = split_override(ov)?;
        assumed = assumed.with_override(key, value)?;
    }

    let cfg = assumed.source_config();
    let scene = assumed.scene_geometry();
    // The imager knows the plate it designed, so it is rebuilt from the base
    // scenario (hash-matched to the cube); --assume only bends the geometry
    // beliefs used to focus.
    let design = design_plane(sc)?;
    let started = Instant::now();
    let image =
        backproject(&cube, &cfg, &scene, &design, sc.grid_spec(), assumed.interpolation())?;
    let imaging_ms = started.elapsed().as_millis();
    let metrics = analyze(&image, None)?;

    let tag = tag.unwrap_or_else(|| mode_name(sc.reflection.mode).to_string());
    io::write_image(&out.join("image.bin"), &image, &sc.hash_hex(), &tag)?;
    io::write_magnitude_csv(&out.join("image.csv"), &image)?;
    io::write_pgm(&out.join("image.pgm"), &image, -40.0)?;
    for name in ["image.bin", "image.csv", "image.pgm"] {
        println!("wrote {}", out.join(name).display());
    }

    let mut rec = Record::new("image-metrics");
    rec.push("scenario", sc.hash_hex())
        .push("tag", &tag)
        .push("peak_x_m", metrics.peak_position[0])
        .push("peak_y_m", metrics.peak_position[1])
        .push("peak_value", metrics.peak_value)
        .push("width_x_m", metrics.width_x)
        .push("width_y_m", metrics.width_y)
        .push("islr", metrics.islr)
        .push("islr_db", 10.0 * metrics.islr.log10())
        .push("highest_sidelobe_db", metrics.highest_sidelobe_db)
        .push("skipped_terms", image.skipped_terms)
        .push("imaging_ms", imaging_ms);
    rec.write(&out.join("image.metrics"))?;
    println!(
        "image[{tag}]: peak ({:.3}, {:.3}) m, widths ({:.4}, {:.4}) m, ISLR {:.2} dB",
        metrics.peak_position[0],
        metrics.peak_position[1],
        metrics.width_x,
        metrics.width_y,
        10.0 * metrics.islr.log10()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// study

/// One full pipeline pass (design → simulate → image → analyze) for a study
/// point. Studies re-synthesize per point because every kind below varies a
/// physical parameter, not just an imaging one.
fn run_point(sc: &Scenario) -> Result<(ImageGrid, ImageMetrics)> {
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let targets = sc.target_set();
    let design = design_plane(sc)?;
    let truth = perturbed_truth(&scene, &targets, &sc.perturbation_spec())?;
    let fast_time = fast_time_for(sc)?;
    let cube =
        synthesize_sweep(&truth, &cfg, &design, &tx, sc.sweeps, &fast_time, &sc.synthesis_params())?;
    let image = backproject(&cube, &cfg, &scene, &design, sc.grid_spec(), sc.interpolation())?;
    let metrics = analyze(&image, None)?;
    Ok((image, metrics))
}

/// CSV escape for the free-text status column.
fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn cmd_study(out: &Path, sc: &Scenario, kind: StudyKind) -> Result<()> {
    match kind {
        StudyKind::SweepConvergence => study_sweep_convergence(out, sc),
        StudyKind::ModuleSize => study_module_size(out, sc),
        StudyKind::Periodicity => study_periodicity(out, sc),
        StudyKind::NearField => study_near_field(out, sc),
        StudyKind::Gamma => study_gamma(out, sc),
    }
}

fn illumination_study(
    sc: &Scenario,
    draws: usize,
) -> Result<strobe_core::perturbation::IlluminationStudy> {
    if sc.reflection.mode != PlaneMode::Stroboscopic {
        return Err(Error::Validation(
            "pattern-alignment studies need the periodic-pattern (stroboscopic) mode".into(),
        ));
    }
    let scene = sc.scene_geometry();
    let cfg = sc.source_config();
    let tx = sc.tx_codebook_angles()?;
    let grid = required_grid(
        &scene,
        &cfg,
        &tx,
        1,
        sc.sim.plane_margin_periods * sc.reflection.period_m,
        cfg.default_atom_pitch(),
    );
    let study_cfg = IlluminationStudyConfig {
        draws,
        seed: sc.seed,
        synthesis: sc.synthesis_params(),
        interpolation: sc.interpolation(),
        window: None,
    };
    random_illumination_study(
        &scene,
        &cfg,
        &tx,
        &sc.target_set(),
        grid,
        &sc.plane_spec(None)?,
        sc.grid_spec(),
        &study_cfg,
    )
}

fn study_sweep_convergence(out: &Path, sc: &Scenario) -> Result<()> {
    let draws = sc.sweeps.max(16);
    let study = illumination_study(sc, draws)?;

    let mut table = String::from("s,gamma_rad,islr,islr_db\n");
    for s in 1..=draws {
        let combined = combine_sweeps(&study.images[..s])?;
        let v = islr(&combined, &study.window)?;
        writeln!(table, "{s},{},{v},{}", study.draws[s - 1].gamma, 10.0 * v.log10())
            .expect("string write");
    }
    let table_path = out.join("study.sweep-convergence.csv");
    std::fs::write(&table_path, table)?;
    println!("wrote {}", table_path.display());

    // Reference floor: the focused-lens pipeline measured in the same window.
    let lens_sc = sc.with_override("reflection.mode", "lens")?;
    let (lens_image, _) = run_point(&lens_sc)?;
    let lens_islr = islr(&lens_image, &study.window)?;

    let mut sum = Record::new("study-summary");
    sum.push("scenario", sc.hash_hex())
        .push("kind", "sweep-convergence")
        .push("draws", draws)
        .push("combined_islr_db", 10.0 * study.combined_islr.log10())
        .push("lens_islr_db", 10.0 * lens_islr.log10())
        .push("window_center_x_m", study.window.center[0])
        .push("window_center_y_m", study.window.center[1])
        .push("window_extent_x_m", study.window.extent[0])
        .push("window_extent_y_m", study.window.extent[1]);
    sum.write(&out.join("study.sweep-convergence.summary"))
}

fn study_module_size(out: &Path, sc: &Scenario) -> Result<()> {
    let cfg = sc.source_config();
    let d = cfg.default_atom_pitch();
    let period = sc.reflection.period_m;
    let rc = sc.reflection_codebook();
    let n_mod_max = max_module_atoms(cfg.lambda0(), period, d, rc.span, &rc.angles());
    let target = [sc.roi.center_x_m, sc.roi.center_y_m];

    let mut table =
        String::from("codebook_size,module_atoms,module_atoms_max,width_x_m,width_y_m,peak_shift_m,islr_db,status\n");
    for k in [26usize, 13, 9, 5, 3, 2] {
        let n_mod = module_atoms(period, d, k);
        let point = sc.with_override("reflection.codebook_size", &k.to_string())?;
        match run_point(&point) {
            Ok((_, m)) => {
                let shift = ((m.peak_position[0] - target[0]).powi(2)
                    + (m.peak_position[1] - target[1]).powi(2))
                .sqrt();
                writeln!(
                    table,
                    "{k},{n_mod},{n_mod_max},{},{},{shift},{},ok",
                    m.width_x,
                    m.width_y,
                    10.0 * m.islr.log10()
                )
                .expect("string write");
            }
            Err(err) => {
                eprintln!("study point codebook_size={k} failed: {err}");
                writeln!(table, "{k},{n_mod},{n_mod_max},,,,,{}", csv_quote(&err.to_string()))
                    .expect("string write");
            }
        }
    }
    let path = out.join("study.module-size.csv");
    std::fs::write(&path, table)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn study_periodicity(out: &Path, sc: &Scenario) -> Result<()> {
    let mut table =
        String::from("period_m,width_x_m,width_y_m,islr_db,highest_sidelobe_db,status\n");
    for period in [2.0f64, 1.0, 0.5] {
        let point = sc.with_override("reflection.period_m", &period.to_string())?;
        match run_point(&point) {
            Ok((_, m)) => {
                writeln!(
                    table,
                    "{period},{},{},{},{},ok",
                    m.width_x,
                    m.width_y,
                    10.0 * m.islr.log10(),
                    m.highest_sidelobe_db
                )
                .expect("string write");
            }
            Err(err) => {
                eprintln!("study point period_m={period} failed: {err}");
                writeln!(table, "{period},,,,,{}", csv_quote(&err.to_string()))
                    .expect("string write");
            }
        }
    }
    let path = out.join("study.periodicity.csv");
    std::fs::write(&path, table)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn study_near_field(out: &Path, sc: &Scenario) -> Result<()> {
    let mut table =
        String::from("r_y_m,width_y_m,coverage_extent_y,bound_y_m,islr_db,status\n");
    for r_y in [20.0f64, 15.0, 10.0, 5.0] {
        let point = sc
            .with_override("roi.center_y_m", &r_y.to_string())
            .and_then(|p| p.with_override("targets.0.y_m", &r_y.to_string()));
        let row = point.and_then(|point| {
            let (_, m) = run_point(&point)?;
            let scene = point.scene_geometry();
            let cfg = point.source_config();
            let tx = point.tx_codebook_angles()?;
            let grid = required_grid(
                &scene,
                &cfg,
                &tx,
                1,
                point.sim.plane_margin_periods * point.reflection.period_m,
                cfg.default_atom_pitch(),
            );
            let sets = sweep_element_sets(&scene, &cfg, &tx, &grid)?;
            let cov = coverage(
                scene.source_position(0.0),
                [point.roi.center_x_m, r_y],
                &grid,
                &sets,
                cfg.carrier,
                cfg.bandwidth,
                0,
            )?;
            let (_, bound_y) = resolution_bounds(&cov);
            Ok((m, cov.extent_y, bound_y))
        });
        match row {
            Ok((m, extent_y, bound_y)) => {
                writeln!(
                    table,
                    "{r_y},{},{extent_y},{bound_y},{},ok",
                    m.width_y,
                    10.0 * m.islr.log10()
                )
                .expect("string write");
            }
            Err(err) => {
                eprintln!("study point r_y={r_y} failed: {err}");
                writeln!(table, "{r_y},,,,,{}", csv_quote(&err.to_string()))
                    .expect("string write");
            }
        }
    }
    let path = out.join("study.near-field.csv");
    std::fs::write(&path, table)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn study_gamma(out: &Path, sc: &Scenario) -> Result<()> {
    let draws = sc.sweeps.max(8);
    let study = illumination_study(sc, draws)?;

    let mut table = String::from("draw,gamma_rad,peak,islr_db\n");
    for (k, d) in study.draws.iter().enumerate() {
        writeln!(table, "{k},{},{},{}", d.gamma, d.peak, 10.0 * d.islr.log10())
            .expect("string write");
    }
    let path = out.join("study.gamma.csv");
    std::fs::write(&path, table)?;
    println!("wrote {}", path.display());

    let (peak_lo, peak_hi) = study.peak_range();
    let (islr_lo, islr_hi) = study.islr_range();
    let mut sum = Record::new("study-summary");
    sum.push("scenario", sc.hash_hex())
        .push("kind", "gamma")
        .push("draws", draws)
        .push("peak_min", peak_lo)
        .push("peak_max", peak_hi)
        .push("islr_min_db", 10.0 * islr_lo.log10())
        .push("islr_max_db", 10.0 * islr_hi.log10())
        .push("combined_islr_db", 10.0 * study.combined_islr.log10());
    sum.write(&out.join("study.gamma.summary"))
}
