//! Architecture sweep over a small depth/width grid.
//!
//! Trains one VPINN per grid point on concurrent threads and prints the
//! final H1 error per architecture. Short schedules keep the sweep quick;
//! expect the errors to shrink with capacity until optimization dominates.

use pinn_bc::harness::{sweep, ExperimentConfig, ModelKind};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.problem = "elliptic_sol2".into();
    cfg.domain = Some("unit-square".into());
    cfg.model = ModelKind::Vpinn;
    cfg.method = "mb".into();
    cfg.level = 2;
    cfg.k_int = 3;
    cfg.k_test = 1;
    cfg.test_refines = 2;
    cfg.adam_epochs = 500;
    cfg.qn_iters = 200;

    let hidden = [1usize, 2];
    let widths = [10usize, 20, 40];
    let entries = sweep(&cfg, &hidden, &widths).unwrap();

    println!("{:>7} {:>6} {:>12} {:>12} {:>8}", "hidden", "width", "loss", "h1", "time");
    for e in entries {
        match (&e.record, &e.error) {
            (Some(r), _) => println!(
                "{:>7} {:>6} {:>12.3e} {:>12.3e} {:>7.1}s",
                e.hidden_layers,
                e.width,
                r.final_loss,
                r.final_h1.unwrap_or(f64::NAN),
                r.wall_time_s
            ),
            (None, Some(err)) => {
                println!("{:>7} {:>6} failed: {err}", e.hidden_layers, e.width)
            }
            _ => unreachable!(),
        }
    }
}
