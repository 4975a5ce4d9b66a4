//! Training-free convergence study.
//!
//! Runs the least-squares oracle over four mesh levels for each boundary
//! condition method and writes one plot series per method. The oracle
//! minimizes the same variational loss that training would, so the fitted
//! rates isolate the discretization from the optimizer.
//!
//! Usage: oracle_study [out_dir]

use pinn_bc::harness::{convergence_study, export_study_series, ExperimentConfig, StudyMode};

fn main() {
    let out = std::env::args().nth(1);
    let levels = [0u32, 1, 2, 3];

    let mut series = Vec::new();
    for method in ["ma", "mb", "mc", "md"] {
        let mut cfg = ExperimentConfig::default();
        cfg.problem = "elliptic_sol2".into();
        cfg.domain = Some("unit-square".into());
        cfg.method = method.into();
        cfg.k_int = 3;
        cfg.k_test = 1;
        cfg.q = None; // defaults to the rate-optimal k_int + k_test - 2
        cfg.test_refines = 2;
        let study = convergence_study(&cfg, &levels, StudyMode::Oracle).unwrap();
        println!(
            "{method}: rate {:.2}{}  errors {:?}",
            study.rate.unwrap(),
            if study.noisy { " (noisy)" } else { "" },
            study.errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()
        );
        series.push((method.to_string(), study));
    }

    if let Some(dir) = out {
        let path = std::path::Path::new(&dir).join("oracle_study.csv");
        std::fs::create_dir_all(&dir).unwrap();
        export_study_series(&series, &path).unwrap();
        println!("wrote {}", path.display());
    }
}
