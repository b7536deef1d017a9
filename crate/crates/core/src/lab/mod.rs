//! Inequality checks, the Gowers-norm identity, ensemble surveys and the JSON
//! and CSV formats used by the command-line front end.

pub mod gowers;
pub mod io;
pub mod report;
pub mod survey;

pub use gowers::{gowers_bias_identity, gowers_norm_power};
pub use report::{check_suite, CheckId, CheckOutcome, CheckStatus, RankReport};
pub use survey::{run_survey, SurveyConfig, SurveyOutcome, SurveyRow, SurveySummary};
