//! Fitting and the scan pipelines that turn simulated counts into S-values.

pub mod fit;
pub mod scan;

pub use fit::{
    fit_sinusoid, fit_sinusoid_points, normalize_by_reference, projections_from_fit, NormalizedFit, SinusoidFit,
};
pub use scan::{run_azimuthal_scan, run_polar_scan, AdjustedAngles, AzimuthalScanResult, ScanOptions, ScanResult};
