//! Collocation PINN for the space-time convection problem.
//!
//! The exact boundary layer for this problem is the product phi(x, t) = x t,
//! which pins the inflow and initial data exactly; the network only has to
//! learn the interior of sin(x - beta t). One seed with a short schedule; pass
//! more seeds or epochs for better errors.
//!
//! Usage: train_pinn_convection [n_seeds] [adam_epochs] [qn_iters]

use pinn_bc::harness::{run_experiment, ExperimentConfig, ModelKind};

fn main() {
    let arg = |i: usize, default: usize| {
        std::env::args()
            .nth(i)
            .map(|s| s.parse().expect("numeric argument"))
            .unwrap_or(default)
    };
    let mut cfg = ExperimentConfig::default();
    cfg.problem = "convection".into();
    cfg.model = ModelKind::Pinn;
    cfg.method = "mc".into();
    cfg.level = 3; // 1024 collocation nodes; the solution has ~5 periods in t
    cfg.hidden_layers = 2;
    cfg.width = 20;
    cfg.n_seeds = arg(1, 1);
    cfg.adam_epochs = arg(2, 200);
    cfg.adam_lr = 1e-2;
    cfg.qn_iters = arg(3, 400);

    let record = run_experiment(&cfg).unwrap();
    println!(
        "seed {}: final loss {:.3e}, relative H1 error {:.3} ({:.1}s)",
        record.seed,
        record.final_loss,
        record.final_h1_rel.unwrap(),
        record.wall_time_s
    );
}
