// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo error studies, rate fitting and moment diagnostics.

mod coupling;
mod diagnostics;
mod noise_check;
mod rate;
mod report;
mod sum;

pub use coupling::{
    aggregate_increments, aggregate_noise, strong_error, AbortedPath, CouplingPlan, ErrorRecord,
    ErrorReport, ReferenceScheme, EXACT_RMSE, MAX_ABORT_FRACTION, REFERENCE_MARGIN,
};
pub use diagnostics::{
    derivative_moment_check, exp_moment_check, moment_sweep, relative_spread,
    stochastic_derivative_product, DerivativeDiagnostics, ExpMomentReport, MomentEstimate,
    MomentSweep, SweepRow,
};
pub use noise_check::{fgn_autocovariance_check, LagStatistic};
pub use rate::{fit_rate, slope_contrasts, theoretical_rate, RateFit};
pub use report::{write_errors_csv, write_metadata};
pub use sum::{CompensatedSum, MeanAccumulator};
