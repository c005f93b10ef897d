//! Metric-vs-MOS evaluation: logistic mapping and the four performance measures.

mod correlation;
mod evaluate;
mod logistic;

pub use correlation::{average_ranks, outlier_ratio, outlier_ratio_with, plcc, rmse, srocc};
pub use evaluate::{
    evaluate_metric, evaluate_report, MosTarget, OrThreshold, PerformanceReport, PerformanceRow,
    ReportEntry, RowDiagnostics,
};
pub use logistic::{fit_logistic5, FitDiagnostics, FitOptions, LogisticParams};
