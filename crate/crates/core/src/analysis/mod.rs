//! Diagnostics built on top of the operators and eigensolvers: localization
//! measures, Weyl packets, the single-well ground curve and the Cook sums.

mod cook;
mod localization;
mod well;
mod weyl;

pub use cook::{cook_integral_probe, cook_time_integral_probe};
pub use localization::{decay_fit, decay_fit_on, ipr, linear_fit, DecayFit, LocalizationReport, NORMALIZATION_TOL};
pub use well::{hellmann_feynman_check, single_well_ground_curve, HfCheck, WellCurvePoint, WELL_TOL};
pub use weyl::{weyl_residual, WeylPacket, WEYL_RESOLUTION};
