//! PLS calibration, latent-variable selection, data splitting and
//! regression statistics.

mod plsr;
mod report;
mod split;

pub use plsr::{
    default_max_lv, plsr_fit, plsr_predict, select_lv_loocv, LvSelection, PlsrModel, DEFAULT_MAX_LV_CAP,
    MODEL_MAGIC, RANK_TOLERANCE,
};
pub use report::{regression_report, rpd, PlsrTableRow, RegressionReport, TABLE_HEADER};
pub use split::{partition_sizes, random_split, SplitIndices, DEFAULT_RATIOS};
