//! Parabolic-cylinder quantities, scaling checks, regularity monitors and
//! Campanato fits over recorded histories.

mod monitor;
mod quantity;
mod sampled;
mod scaling;

pub use monitor::{
    scan_point, singular_scan, summarize_scan, CampanatoFit, Criterion, Lattice, MonitorVerdict,
    Resolution, ScanConfig, ScanPoint, ScanReport, Thresholds, Verdict,
};
pub use quantity::{
    cylinder_quantity, MeanKind, ParabolicCylinder, QuantityReport, WeightedMeanSpec,
};
pub use sampled::{weighted_sum, SampledHistory, DEFAULT_OVERSAMPLE};
pub use scaling::{forcing_factor, height_factor, scaling_transform, MAX_SCALED_MODES};
