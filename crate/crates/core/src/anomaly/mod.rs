//! Raw anomaly score, Gaussian tail probability and the rolling anomaly
//! likelihood built on them.

mod likelihood;
mod qfunc;
mod rolling;
mod score;

pub use likelihood::{flag, AnomalyLikelihood, DistributionEstimate, LikelihoodConfig, LikelihoodOutput};
pub use qfunc::q_function;
pub use rolling::RollingWindow;
pub use score::raw_score;
