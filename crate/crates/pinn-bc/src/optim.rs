//! Full-batch training: ADAM with exponentially decaying learning rate,
//! followed by a quasi-Newton phase (limited-memory or dense BFGS with a
//! strong-Wolfe line search).

use std::path::Path;

use crate::error::Result;

/// Loss oracle: fills `grad` and returns the loss at `w`.
pub type Oracle<'a> = dyn FnMut(&[f64], &mut [f64]) -> f64 + 'a;

/// Periodic measurement hooked into training (e.g. H1 error).
pub struct Probe<'a> {
    pub interval: usize,
    pub measure: &'a mut dyn FnMut(&[f64]) -> f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Phase {
    Adam,
    QuasiNewton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StopReason {
    MaxIters,
    GradientNorm,
    IdenticalIterates,
    LineSearchFailure,
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RecordEntry {
    pub epoch: usize,
    pub phase: Phase,
    pub loss: f64,
    pub h1_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainRecord {
    pub entries: Vec<RecordEntry>,
    /// Index into `entries` where the quasi-Newton phase starts.
    pub phase_boundary: usize,
    pub stop_reason: StopReason,
}

impl TrainRecord {
    pub fn final_loss(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |e| e.loss)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,phase,loss,h1_error\n");
        for e in &self.entries {
            let phase = match e.phase {
                Phase::Adam => "adam",
                Phase::QuasiNewton => "quasi_newton",
            };
            let err = e.h1_error.map_or(String::new(), |v| format!("{v:.16e}"));
            s.push_str(&format!("{},{},{:.16e},{}\n", e.epoch, phase, e.loss, err));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr0: f64,
    /// Per-epoch multiplier on the learning rate.
    pub decay_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
}

impl AdamConfig {
    /// Rate decaying by 10x over the whole phase.
    pub fn with_tenfold_decay(lr0: f64, epochs: usize) -> Self {
        let decay_rate = if epochs > 1 {
            0.1f64.powf(1.0 / (epochs as f64 - 1.0))
        } else {
            1.0
        };
        AdamConfig {
            lr0,
            decay_rate,
            epochs,
            ..AdamConfig::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr0: 1e-3,
            decay_rate: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BfgsMemory {
    Limited(usize),
    Full,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct QuasiNewtonConfig {
    pub memory: BfgsMemory,
    pub max_iters: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub max_line_search_steps: usize,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        QuasiNewtonConfig {
            memory: BfgsMemory::Limited(50),
            max_iters: 0,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search_steps: 40,
        }
    }
}

impl QuasiNewtonConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        QuasiNewtonConfig {
            max_iters,
            ..Default::default()
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn probe_measure(probe: &mut Option<Probe<'_>>, epoch: usize, w: &[f64]) -> Option<f64> {
    match probe {
        Some(p) if p.interval > 0 && epoch % p.interval == 0 => Some((p.measure)(w)),
        _ => None,
    }
}

/// Standard full-batch ADAM with step size `lr0 * decay_rate^k` at epoch `k`.
pub fn adam_run(
    oracle: &mut Oracle<'_>,
    w0: Vec<f64>,
    cfg: &AdamConfig,
    mut probe: Option<Probe<'_>>,
) -> (Vec<f64>, TrainRecord) {
    let n = w0.len();
    let mut w = w0;
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut entries = Vec::with_capacity(cfg.epochs);
    let mut stop_reason = StopReason::MaxIters;
    for k in 0..cfg.epochs {
        let loss = oracle(&w, &mut grad);
        entries.push(RecordEntry {
            epoch: k,
            phase: Phase::Adam,
            loss,
            h1_error: probe_measure(&mut probe, k, &w),
        });
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            stop_reason = StopReason::NonFinite;
            break;
        }
        let lr = cfg.lr0 * cfg.decay_rate.powi(k as i32);
        let t = (k + 1) as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let mh = m[i] / bc1;
            let vh = v[i] / bc2;
            w[i] -= lr * mh / (vh.sqrt() + cfg.eps);
        }
    }
    (
        w,
        TrainRecord {
            phase_boundary: entries.len(),
            entries,
            stop_reason,
        },
    )
}

/// Strong-Wolfe line search (bracket + zoom). Returns the accepted step and
/// the loss/gradient at the new point, or `None` on failure.
fn strong_wolfe(
    oracle: &mut Oracle<'_>,
    w: &[f64],
    d: &[f64],
    f0: f64,
    g0d: f64,
    cfg: &QuasiNewtonConfig,
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let n = w.len();
    let phi = |oracle: &mut Oracle<'_>, alpha: f64, grad: &mut Vec<f64>| -> (f64, Vec<f64>, f64) {
        let x: Vec<f64> = (0..n).map(|i| w[i] + alpha * d[i]).collect();
        let f = oracle(&x, grad);
        let gd = dot(grad, d);
        (f, x, gd)
    };
    let c1 = cfg.wolfe_c1;
    let c2 = cfg.wolfe_c2;
    let mut grad = vec![0.0; n];
    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut alpha = 1.0;
    let mut bracket: Option<(f64, f64, f64, f64)> = None; // (lo, f_lo, hi, f_hi)
    for i in 0..cfg.max_line_search_steps {
        let (f, x, gd) = phi(oracle, alpha, &mut grad);
        if !f.is_finite() {
            // Step overshot into a non-finite region; shrink hard.
            alpha *= 0.25;
            if alpha < 1e-20 {
                return None;
            }
            continue;
        }
        if f > f0 + c1 * alpha * g0d || (i > 0 && f >= f_prev) {
            bracket = Some((alpha_prev, f_prev, alpha, f));
            break;
        }
        if gd.abs() <= -c2 * g0d {
            return Some((x, f, grad));
        }
        if gd >= 0.0 {
            bracket = Some((alpha, f, alpha_prev, f_prev));
            break;
        }
        alpha_prev = alpha;
        f_prev = f;
        alpha *= 2.0;
    }
    let (mut lo, mut f_lo, mut hi, mut f_hi) = bracket?;
    for _ in 0..cfg.max_line_search_steps {
        let mid = 0.5 * (lo + hi);
        let (f, x, gd) = phi(oracle, mid, &mut grad);
        if !f.is_finite() || f > f0 + c1 * mid * g0d || f >= f_lo {
            hi = mid;
            f_hi = f;
        } else {
            if gd.abs() <= -c2 * g0d {
                return Some((x, f, grad));
            }
            if gd * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = mid;
            f_lo = f;
        }
        if (hi - lo).abs() < 1e-16 * (1.0 + lo.abs()) {
            break;
        }
    }
    let _ = f_hi;
    // Fall back to the best admissible point if curvature never satisfied.
    if f_lo < f0 && lo > 0.0 {
        let (f, x, _) = phi(oracle, lo, &mut grad);
        return Some((x, f, grad));
    }
    None
}

/// BFGS with strong-Wolfe line search. Stops at `max_iters`, gradient norm
/// below 1e-12, or bitwise-identical consecutive iterates.
pub fn quasi_newton_run(
    oracle: &mut Oracle<'_>,
    w0: Vec<f64>,
    cfg: &QuasiNewtonConfig,
    mut probe: Option<Probe<'_>>,
) -> (Vec<f64>, TrainRecord) {
    let n = w0.len();
    let mut w = w0;
    let mut grad = vec![0.0; n];
    let mut f = oracle(&w, &mut grad);
    let mut entries = Vec::new();
    let mut stop_reason = StopReason::MaxIters;

    // Limited-memory pairs (s, y, rho) or the dense inverse Hessian.
    let mut pairs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut dense_h: Option<Vec<f64>> = match cfg.memory {
        BfgsMemory::Full => {
            let mut h = vec![0.0; n * n];
            for i in 0..n {
                h[i * n + i] = 1.0;
            }
            Some(h)
        }
        BfgsMemory::Limited(_) => None,
    };

    for k in 0..cfg.max_iters {
        entries.push(RecordEntry {
            epoch: k,
            phase: Phase::QuasiNewton,
            loss: f,
            h1_error: probe_measure(&mut probe, k, &w),
        });
        if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            stop_reason = StopReason::NonFinite;
            break;
        }
        if norm(&grad) < 1e-12 {
            stop_reason = StopReason::GradientNorm;
            break;
        }

        // Search direction d = -H grad.
        let mut d = match (&dense_h, cfg.memory) {
            (Some(h), _) => {
                let mut d = vec![0.0; n];
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += h[i * n + j] * grad[j];
                    }
                    d[i] = -acc;
                }
                d
            }
            (None, BfgsMemory::Limited(_)) => {
                // Two-loop recursion with gamma scaling.
                let mut q = grad.clone();
                let mut alphas = Vec::with_capacity(pairs.len());
                for (s, y, rho) in pairs.iter().rev() {
                    let a = rho * dot(s, &q);
                    for i in 0..n {
                        q[i] -= a * y[i];
                    }
                    alphas.push(a);
                }
                if let Some((s, y, _)) = pairs.last() {
                    let gamma = dot(s, y) / dot(y, y);
                    for qi in q.iter_mut() {
                        *qi *= gamma;
                    }
                }
                for ((s, y, rho), &a) in pairs.iter().zip(alphas.iter().rev()) {
                    let b = rho * dot(y, &q);
                    for i in 0..n {
                        q[i] += (a - b) * s[i];
                    }
                }
                q.iter().map(|&v| -v).collect()
            }
            (None, BfgsMemory::Full) => unreachable!(),
        };
        let mut g0d = dot(&grad, &d);
        if g0d >= 0.0 {
            // Not a descent direction; restart from steepest descent.
            pairs.clear();
            d = grad.iter().map(|&g| -g).collect();
            g0d = dot(&grad, &d);
        }

        let Some((w_new, f_new, grad_new)) = strong_wolfe(oracle, &w, &d, f, g0d, cfg) else {
            stop_reason = StopReason::LineSearchFailure;
            break;
        };
        if w_new
            .iter()
            .zip(&w)
            .all(|(a, b)| a.to_bits() == b.to_bits())
        {
            stop_reason = StopReason::IdenticalIterates;
            break;
        }

        let s: Vec<f64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) {
            match (&mut dense_h, cfg.memory) {
                (Some(h), _) => {
                    // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
                    let rho = 1.0 / sy;
                    let mut hy = vec![0.0; n];
                    for i in 0..n {
                        hy[i] = (0..n).map(|j| h[i * n + j] * y[j]).sum();
                    }
                    let yhy = dot(&y, &hy);
                    for i in 0..n {
                        for j in 0..n {
                            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                                + rho * rho * yhy * s[i] * s[j]
                                + rho * s[i] * s[j];
                        }
                    }
                }
                (None, BfgsMemory::Limited(mem)) => {
                    pairs.push((s, y, 1.0 / sy));
                    if pairs.len() > mem.max(1) {
                        pairs.remove(0);
                    }
                }
                (None, BfgsMemory::Full) => unreachable!(),
            }
        }
        w = w_new;
        f = f_new;
        grad = grad_new;
    }
    entries.push(RecordEntry {
        epoch: entries.len(),
        phase: Phase::QuasiNewton,
        loss: f,
        h1_error: None,
    });
    (
        w,
        TrainRecord {
            phase_boundary: 0,
            entries,
            stop_reason,
        },
    )
}

/// ADAM phase followed by a quasi-Newton phase from the ADAM result, with a
/// concatenated record and the phase boundary marked.
pub fn train_schedule(
    oracle: &mut Oracle<'_>,
    w0: Vec<f64>,
    adam: &AdamConfig,
    qn: &QuasiNewtonConfig,
    probe: Option<Probe<'_>>,
) -> (Vec<f64>, TrainRecord) {
    let mut probe = probe;
    let probe_a = probe.as_mut().map(|p| Probe {
        interval: p.interval,
        measure: &mut *p.measure,
    });
    let (w1, mut rec_a) = adam_run(oracle, w0, adam, probe_a);
    if rec_a.stop_reason == StopReason::NonFinite {
        return (w1, rec_a);
    }
    let probe_q = probe.as_mut().map(|p| Probe {
        interval: p.interval,
        measure: &mut *p.measure,
    });
    let (w2, rec_q) = quasi_newton_run(oracle, w1, qn, probe_q);
    let boundary = rec_a.entries.len();
    let offset = adam.epochs;
    rec_a
        .entries
        .extend(rec_q.entries.into_iter().map(|mut e| {
            e.epoch += offset;
            e
        }));
    (
        w2,
        TrainRecord {
            entries: rec_a.entries,
            phase_boundary: boundary,
            stop_reason: rec_q.stop_reason,
        },
    )
}
