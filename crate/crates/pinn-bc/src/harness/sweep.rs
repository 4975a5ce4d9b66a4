//! Hyperparameter sweeps over network depth and width, run concurrently with
//! per-run failures isolated.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{run_experiment, RunRecord};

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepEntry {
    pub hidden_layers: usize,
    pub width: usize,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

/// One run per `(hidden, width)` grid point. Failures land in the entry
/// instead of aborting the sweep; runs execute on scoped threads.
pub fn sweep(cfg: &ExperimentConfig, hidden: &[usize], widths: &[usize]) -> Result<Vec<SweepEntry>> {
    if hidden.is_empty() || widths.is_empty() {
        return Err(Error::config("the sweep grid must be nonempty"));
    }
    let grid: Vec<(usize, usize)> = hidden
        .iter()
        .flat_map(|&h| widths.iter().map(move |&w| (h, w)))
        .collect();
    let outcomes: Vec<std::result::Result<RunRecord, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .iter()
            .map(|&(h, w)| {
                let mut point = cfg.clone();
                point.hidden_layers = h;
                point.width = w;
                point.out_dir = cfg.out_dir.as_ref().map(|d| d.join(format!("h{h}_w{w}")));
                scope.spawn(move || run_experiment(&point).map_err(|e| e.to_string()))
            })
            .collect();
        handles.into_iter().map(|j| j.join().expect("run thread")).collect()
    });
    Ok(grid
        .into_iter()
        .zip(outcomes)
        .map(|((h, w), outcome)| match outcome {
            Ok(record) => SweepEntry {
                hidden_layers: h,
                width: w,
                record: Some(record),
                error: None,
            },
            Err(error) => SweepEntry {
                hidden_layers: h,
                width: w,
                record: None,
                error: Some(error),
            },
        })
        .collect())
}
