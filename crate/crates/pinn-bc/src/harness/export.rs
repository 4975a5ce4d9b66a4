//! Result export: JSON for full records, CSV tables, and plot-data series
//! for convergence studies. Every file carries the config hash and seed.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::run::RunRecord;
use super::study::StudyResult;
use super::sweep::SweepEntry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::config(format!("unknown export format '{other}'"))),
        }
    }
}

/// Write via a temporary sibling then rename, so readers never observe a
/// partial file.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(records).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(path, &json)
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

fn summary_csv(records: &[RunRecord]) -> String {
    let mut s = String::from(
        "problem,model,method,level,seed,config_hash,final_loss,final_h1,final_h1_rel,wall_time_s\n",
    );
    for r in records {
        let model = match r.config.model {
            super::config::ModelKind::Pinn => "pinn",
            super::config::ModelKind::Vpinn => "vpinn",
        };
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.16e},{},{},{:.3}\n",
            r.config.problem,
            model,
            r.config.method,
            r.config.level,
            r.seed,
            r.config_hash,
            r.final_loss,
            opt(r.final_h1),
            opt(r.final_h1_rel),
            r.wall_time_s
        ));
    }
    s
}

/// Export records to `out_dir`. JSON writes the full records; CSV writes a
/// summary table plus one training curve per record.
pub fn export_records(
    records: &[RunRecord],
    format: ExportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    match format {
        ExportFormat::Json => {
            let path = out_dir.join("records.json");
            save_records(records, &path)?;
            written.push(path);
        }
        ExportFormat::Csv => {
            let path = out_dir.join("summary.csv");
            write_atomic(&path, &summary_csv(records))?;
            written.push(path);
            for (i, r) in records.iter().enumerate() {
                let path = out_dir.join(format!("train_{i}_{}.csv", r.config.method));
                let stamp = format!("# config {} seed {}\n", r.config_hash, r.seed);
                write_atomic(&path, &format!("{stamp}{}", r.train.to_csv()))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Plot data for a convergence figure: one labelled series per method
/// variant, rows `series,h,error`.
pub fn export_study_series(series: &[(String, StudyResult)], path: &Path) -> Result<()> {
    let mut s = String::new();
    for (label, study) in series {
        s.push_str(&format!(
            "# series {label} config {} seed {} rate {} noisy {}\n",
            study.config_hash,
            study.seed,
            study.rate.map_or(String::from("-"), |r| format!("{r:.4}")),
            study.noisy
        ));
    }
    s.push_str("series,h,error\n");
    for (label, study) in series {
        for (h, e) in study.meshsizes.iter().zip(&study.errors) {
            s.push_str(&format!("{label},{h:.16e},{e:.16e}\n"));
        }
    }
    write_atomic(path, &s)
}

pub fn save_sweep(entries: &[SweepEntry], path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(entries).map_err(|e| Error::Parse(e.to_string()))?;
    write_atomic(path, &json)
}
