//! Design and simulation toolkit for non-line-of-sight radar imaging with a
//! static, passive, periodically patterned reflection plane.
//!
//! A source moving at constant speed above the plane sweeps a narrow beam over
//! a codebook of incidence angles. The plane is partitioned into modules of
//! meta-atoms, each applying a fixed reflection phase gradient so that the
//! anomalous reflection angle varies periodically along the plane. A region of
//! interest co-moving with the source is thereby observed from many effective
//! viewpoints ("stroboscopically"), and back-projection over the sweep focuses
//! an image whose resolution is governed by the total illuminated aperture
//! rather than by the source aperture alone.
//!
//! Module map:
//! - [`geometry`]: scene frame, reflection angles, path lengths, phase slopes
//! - [`codebook`]: source model, Tx angle grids, illuminated atom sets
//! - [`plane`]: reflection-offset design, quantization, per-atom phase profiles
//! - [`signal`]: waveform, radar equation, echo-cube synthesis
//! - [`imaging`]: back-projection, image metrics (mainlobe, ISLR)
//! - [`perturbation`]: geometry-error models and first-order predictions
//! - [`tomography`]: wavenumber coverage and resolution bounds
//! - [`scenario`]: reproducible run descriptions (text files, hashing)
//! - [`io`]: on-disk formats for planes, echo cubes, images, reports
//!
//! All internal math is f64 and radians/meters/seconds; degrees and
//! unit-suffixed fields appear only at the scenario/CLI boundary.

pub mod codebook;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod perturbation;
pub mod plane;
pub mod scenario;
pub mod signal;
pub mod tomography;

/// Free-space speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex sample type used throughout (f64 parts in memory; files narrow to f32).
pub type C64 = num_complex::Complex<f64>;

/// Toolkit-wide error type. Variants mirror the CLI exit-code contract:
/// validation problems, infeasible designs, and numeric failures are distinct.
#[derive(Debug)]
pub enum Error {
    /// Scenario or argument validation failed (names the offending field).
    Validation(String),
    /// A requested design violates its own feasibility bounds.
    Infeasible(String),
    /// Numeric failure at runtime (degenerate geometry, empty image, ...).
    Numeric(String),
    /// File format or filesystem problem.
    Io(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::Validation(m) => write!(f, "validation: {m}"),
            Error::Infeasible(m) => write!(f, "infeasible design: {m}"),
            Error::Numeric(m) => write!(f, "numeric failure: {m}"),
            Error::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
