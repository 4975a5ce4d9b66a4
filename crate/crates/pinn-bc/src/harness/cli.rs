//! Command-line front end: `run`, `study`, `oracle`, `sweep`, `export`.
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::export::{export_records, export_study_series, load_records, save_sweep, ExportFormat};
use super::oracle::least_squares_oracle;
use super::run::run_experiment;
use super::study::{convergence_study, StudyMode};
use super::sweep::sweep;

#[derive(Parser)]
#[command(
    name = "pinn-bc",
    about = "Dirichlet boundary condition experiments for PINN and interpolated VPINN solvers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags that override fields of the (optional) TOML config file.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog case id.
    #[arg(long)]
    problem: Option<String>,
    /// Domain override for the elliptic cases.
    #[arg(long)]
    domain: Option<String>,
    /// Model: pinn or vpinn.
    #[arg(long)]
    model: Option<String>,
    /// Method tag: ma, mb, mc, or md.
    #[arg(long)]
    method: Option<String>,
    /// Penalty weight for ma.
    #[arg(long)]
    lambda: Option<f64>,
    /// ADF normalization order for mb.
    #[arg(long)]
    m: Option<u32>,
    /// Nitsche stabilization for md.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the configured model and report the result.
    Run {
        #[command(flatten)]
        ov: Overrides,
    },
    /// Per-level errors and the fitted convergence rate.
    Study {
        #[command(flatten)]
        ov: Overrides,
        /// Mesh levels, e.g. 0,1,2,3.
        #[arg(long, value_delimiter = ',', default_values_t = [0u32, 1, 2, 3])]
        levels: Vec<u32>,
        /// oracle or trained.
        #[arg(long, default_value = "oracle")]
        mode: String,
    },
    /// Training-free least-squares minimizer at one level.
    Oracle {
        #[command(flatten)]
        ov: Overrides,
    },
    /// Grid over network depth and width.
    Sweep {
        #[command(flatten)]
        ov: Overrides,
        /// Hidden layer counts, e.g. 2,3,4.
        #[arg(long, value_delimiter = ',', required = true)]
        hidden: Vec<usize>,
        /// Layer widths, e.g. 10,30,50.
        #[arg(long, value_delimiter = ',', required = true)]
        width: Vec<usize>,
    },
    /// Re-export saved run records (a records.json) as CSV or JSON.
    Export {
        /// A records.json written by a previous run or export.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

impl Overrides {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.problem {
            cfg.problem = v;
        }
        if let Some(v) = self.domain {
            cfg.domain = Some(v);
        }
        if let Some(v) = self.model {
            cfg.model = match v.as_str() {
                "pinn" => super::config::ModelKind::Pinn,
                "vpinn" => super::config::ModelKind::Vpinn,
                other => return Err(Error::config(format!("unknown model '{other}'"))),
            };
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { ov } => {
            let cfg = ov.into_config()?;
            let rec = run_experiment(&cfg)?;
            println!(
                "run {} {} seed {} loss {:.6e} h1 {} rel {} [{:.1}s]",
                rec.config.problem,
                rec.config.method,
                rec.seed,
                rec.final_loss,
                rec.final_h1
                    .map_or(String::from("-"), |v| format!("{v:.6e}")),
                rec.final_h1_rel
                    .map_or(String::from("-"), |v| format!("{v:.4}")),
                rec.wall_time_s
            );
            if let Some(dir) = &rec.config.out_dir {
                println!("outputs in {}", dir.display());
            }
            Ok(())
        }
        Cmd::Study { ov, levels, mode } => {
            let cfg = ov.into_config()?;
            let mode = match mode.as_str() {
                "oracle" => StudyMode::Oracle,
                "trained" => StudyMode::Trained,
                other => return Err(Error::config(format!("unknown study mode '{other}'"))),
            };
            let study = convergence_study(&cfg, &levels, mode)?;
            println!("level,h,h1_error");
            for ((l, h), e) in study
                .levels
                .iter()
                .zip(&study.meshsizes)
                .zip(&study.errors)
            {
                println!("{l},{h:.6e},{e:.6e}");
            }
            println!(
                "rate {}{}",
                study.rate.map_or(String::from("-"), |r| format!("{r:.3}")),
                if study.noisy { " (noisy)" } else { "" }
            );
            if let Some(dir) = &cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                let path = dir.join("study.csv");
                export_study_series(&[(cfg.method.clone(), study)], &path)?;
                println!("plot data in {}", path.display());
            }
            Ok(())
        }
        Cmd::Oracle { ov } => {
            let cfg = ov.into_config()?;
            let problem = cfg.resolve_problem()?;
            let sol = least_squares_oracle(
                &problem,
                &cfg.bc_method()?,
                cfg.level,
                cfg.k_int,
                cfg.k_test,
                cfg.q_value(),
                cfg.test_refines,
            )?;
            println!(
                "oracle {} {} level {} residual {:.6e} h1 {}",
                cfg.problem,
                cfg.method,
                cfg.level,
                sol.residual_norm,
                sol.h1_error
                    .map_or(String::from("-"), |v| format!("{v:.6e}")),
            );
            Ok(())
        }
        Cmd::Sweep { ov, hidden, width } => {
            let cfg = ov.into_config()?;
            let entries = sweep(&cfg, &hidden, &width)?;
            println!("hidden,width,final_loss,final_h1,status");
            for e in &entries {
                match (&e.record, &e.error) {
                    (Some(r), _) => println!(
                        "{},{},{:.6e},{},ok",
                        e.hidden_layers,
                        e.width,
                        r.final_loss,
                        r.final_h1
                            .map_or(String::from("-"), |v| format!("{v:.6e}"))
                    ),
                    (None, Some(msg)) => {
                        println!("{},{},-,-,failed: {msg}", e.hidden_layers, e.width)
                    }
                    (None, None) => unreachable!(),
                }
            }
            if let Some(dir) = &cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                let path = dir.join("sweep.json");
                save_sweep(&entries, &path)?;
                println!("sweep records in {}", path.display());
            }
            Ok(())
        }
        Cmd::Export {
            input,
            format,
            out_dir,
        } => {
            let format: ExportFormat = format.parse()?;
            let records = load_records(&input)?;
            let files = export_records(&records, format, &out_dir)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse(_) => 2,
        _ => 3,
    }
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
