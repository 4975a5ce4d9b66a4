//! Fully-connected tanh networks over a flat weight vector, evaluable on
//! plain numbers, on second-order input jets, and on recorded graph
//! expressions (for weight gradients).
//!
//! Weight packing is layer-major: for each layer, the matrix `A` in row-major
//! order followed by the bias `b`. This layout is frozen; checkpoints and
//! optimizers depend on it.

use std::io::{Read, Write};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Jet2, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MlpArchitecture {
    /// `[n_in, hidden..., n_out]`; tanh on hidden layers, identity output.
    pub layer_widths: Vec<usize>,
}

impl MlpArchitecture {
    pub fn new(layer_widths: Vec<usize>) -> Result<Self> {
        if layer_widths.len() < 2 || layer_widths.iter().any(|&w| w == 0) {
            return Err(Error::config(
                "architecture needs at least input and output layers of positive width",
            ));
        }
        Ok(MlpArchitecture { layer_widths })
    }

    /// `n_in` inputs, `hidden` layers of `width`, one output.
    pub fn scalar_net(n_in: usize, hidden: usize, width: usize) -> Self {
        let mut w = vec![n_in];
        w.extend(std::iter::repeat(width).take(hidden));
        w.push(1);
        MlpArchitecture { layer_widths: w }
    }

    pub fn n_in(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn n_out(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn n_weights(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[1] * w[0] + w[1])
            .sum()
    }
}

/// Glorot-uniform matrices, zero biases, fully determined by the seed.
pub fn init_weights(arch: &MlpArchitecture, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Vec::with_capacity(arch.n_weights());
    for layer in arch.layer_widths.windows(2) {
        let (n_prev, n) = (layer[0], layer[1]);
        let bound = (6.0 / (n_prev + n) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        for _ in 0..n * n_prev {
            w.push(dist.sample(&mut rng));
        }
        w.extend(std::iter::repeat(0.0).take(n));
    }
    w
}

/// Layer-by-layer forward pass over any scalar type.
pub fn forward<S: Scalar>(arch: &MlpArchitecture, w: &[S], x: &[S]) -> Vec<S> {
    assert_eq!(x.len(), arch.n_in(), "input width mismatch");
    assert_eq!(w.len(), arch.n_weights(), "weight length mismatch");
    let mut cur = x.to_vec();
    let mut off = 0;
    let n_layers = arch.n_layers();
    for (l, layer) in arch.layer_widths.windows(2).enumerate() {
        let (n_prev, n) = (layer[0], layer[1]);
        let mut next = Vec::with_capacity(n);
        for row in 0..n {
            let mut acc = w[off + n * n_prev + row]; // bias
            for col in 0..n_prev {
                acc = acc + w[off + row * n_prev + col] * cur[col];
            }
            next.push(if l + 1 < n_layers { acc.tanh() } else { acc });
        }
        cur = next;
        off += n * n_prev + n;
    }
    cur
}

/// Forward pass on second-order jets; weights enter as jet constants. With
/// `S = f64` this evaluates values, input gradients and input Hessians; with
/// a graph scalar it records a program whose inputs include the weights.
pub fn forward_jets<S: Scalar>(
    arch: &MlpArchitecture,
    w: &[S],
    x: &[Jet2<S>],
) -> Vec<Jet2<S>> {
    assert_eq!(x.len(), arch.n_in(), "input width mismatch");
    assert_eq!(w.len(), arch.n_weights(), "weight length mismatch");
    let mut cur = x.to_vec();
    let mut off = 0;
    let n_layers = arch.n_layers();
    for (l, layer) in arch.layer_widths.windows(2).enumerate() {
        let (n_prev, n) = (layer[0], layer[1]);
        let mut next = Vec::with_capacity(n);
        for row in 0..n {
            let mut acc = Jet2::frozen(w[off + n * n_prev + row]);
            for col in 0..n_prev {
                acc = acc + Jet2::frozen(w[off + row * n_prev + col]) * cur[col];
            }
            next.push(if l + 1 < n_layers { acc.tanh() } else { acc });
        }
        cur = next;
        off += n * n_prev + n;
    }
    cur
}

/// Network outputs with exact input derivatives at a 2D point.
#[derive(Clone, Debug)]
pub struct NetworkJet {
    pub value: Vec<f64>,
    /// `jacobian[out] = [d/dx, d/dy]`.
    pub jacobian: Vec<[f64; 2]>,
    /// `hessian[out] = [dxx, dxy, dyy]`, present only for `order = 2`.
    pub hessian: Option<Vec<[f64; 3]>>,
}

/// Exact derivatives of every output with respect to the two inputs.
pub fn input_jet(
    arch: &MlpArchitecture,
    w: &[f64],
    x: [f64; 2],
    order: usize,
) -> Result<NetworkJet> {
    if arch.n_in() != 2 {
        return Err(Error::config("input jets require a 2-input network"));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::config("jet order must be 1 or 2"));
    }
    let (jx, jy) = Jet2::at_point(x);
    let out = forward_jets(arch, w, &[jx, jy]);
    let value = out.iter().map(|j| j.v).collect();
    let jacobian = out.iter().map(|j| [j.dx, j.dy]).collect();
    let hessian = (order == 2).then(|| out.iter().map(|j| [j.dxx, j.dxy, j.dyy]).collect());
    Ok(NetworkJet {
        value,
        jacobian,
        hessian,
    })
}

/// `lambda_reg * ||w||^2`.
pub fn l2_penalty(w: &[f64], lambda_reg: f64) -> f64 {
    lambda_reg * w.iter().map(|v| v * v).sum::<f64>()
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"MLPW";
const CHECKPOINT_VERSION: u32 = 1;

/// Checkpoint: magic, packing version, seed, layer widths, then the flat
/// weight vector as little-endian f64.
pub fn save_checkpoint(
    path: impl AsRef<Path>,
    arch: &MlpArchitecture,
    seed: u64,
    w: &[f64],
) -> Result<()> {
    if w.len() != arch.n_weights() {
        return Err(Error::config("weight length does not match architecture"));
    }
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    buf.extend_from_slice(&(arch.layer_widths.len() as u32).to_le_bytes());
    for &width in &arch.layer_widths {
        buf.extend_from_slice(&(width as u32).to_le_bytes());
    }
    for &v in w {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(MlpArchitecture, u64, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > bytes.len() {
            return Err(Error::Parse("truncated checkpoint".into()));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != CHECKPOINT_MAGIC {
        return Err(Error::Parse("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!("unknown checkpoint version {version}")));
    }
    let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let n_layers = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut widths = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        widths.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
    }
    let arch = MlpArchitecture::new(widths)?;
    let mut w = Vec::with_capacity(arch.n_weights());
    for _ in 0..arch.n_weights() {
        w.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
    }
    Ok((arch, seed, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{Graph, Workspace};

    fn rand_inputs(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(-1.0, 1.0);
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let arch = MlpArchitecture::scalar_net(2, 2, 20);
        let w1 = init_weights(&arch, 7);
        let w2 = init_weights(&arch, 7);
        assert_eq!(w1, w2);
        let w3 = init_weights(&arch, 8);
        assert_ne!(w1, w3);
        // First layer bound: sqrt(6 / (2 + 20)).
        let bound = (6.0f64 / 22.0).sqrt();
        assert!(w1[..40].iter().all(|v| v.abs() <= bound));
        // Biases zero.
        assert!(w1[40..60].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_hand_cases() {
        let arch = MlpArchitecture::scalar_net(2, 1, 2);
        let zero = vec![0.0; arch.n_weights()];
        assert_eq!(forward(&arch, &zero, &[0.3, -0.4]), vec![0.0]);

        // Single linear layer with A = I, b = 0.
        let id = MlpArchitecture::new(vec![2, 2]).unwrap();
        let w = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(forward(&id, &w, &[0.7, -0.2]), vec![0.7, -0.2]);

        // 2-2-1 with hand weights: out = 2 tanh(x + 2y + 0.5) - tanh(3x - y) + 1.
        let net = MlpArchitecture::new(vec![2, 2, 1]).unwrap();
        let w = vec![1.0, 2.0, 3.0, -1.0, 0.5, 0.0, 2.0, -1.0, 1.0];
        let (x, y) = (0.3, -0.6);
        let expect = 2.0 * (x + 2.0 * y + 0.5f64).tanh() - (3.0 * x - y).tanh() + 1.0;
        let got = forward(&net, &w, &[x, y])[0];
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn input_jets_match_finite_differences() {
        let arch = MlpArchitecture::new(vec![2, 10, 10, 1]).unwrap();
        let w = init_weights(&arch, 42);
        let p = [0.37, -0.21];
        let jet = input_jet(&arch, &w, p, 2).unwrap();
        let f = |p: [f64; 2]| forward(&arch, &w, &p)[0];
        let h = 1e-5;
        let fx = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
        let fy = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
        assert!((jet.jacobian[0][0] - fx).abs() < 1e-6 * (1.0 + fx.abs()));
        assert!((jet.jacobian[0][1] - fy).abs() < 1e-6 * (1.0 + fy.abs()));
        let hess = &jet.hessian.as_ref().unwrap()[0];
        let fp = f(p);
        let fxx = (f([p[0] + h, p[1]]) - 2.0 * fp + f([p[0] - h, p[1]])) / (h * h);
        let fyy = (f([p[0], p[1] + h]) - 2.0 * fp + f([p[0], p[1] - h])) / (h * h);
        assert!((hess[0] - fxx).abs() < 1e-4 * (1.0 + fxx.abs()));
        assert!((hess[2] - fyy).abs() < 1e-4 * (1.0 + fyy.abs()));
        // Linear net: jacobian = A, hessian = 0.
        let lin = MlpArchitecture::new(vec![2, 1]).unwrap();
        let lw = vec![2.0, -3.0, 0.1];
        let lj = input_jet(&lin, &lw, [0.4, 0.5], 2).unwrap();
        assert_eq!(lj.jacobian[0], [2.0, -3.0]);
        assert_eq!(lj.hessian.unwrap()[0], [0.0, 0.0, 0.0]);
        // Order-1 jacobian identical to order-2's.
        let j1 = input_jet(&arch, &w, p, 1).unwrap();
        assert_eq!(j1.jacobian, jet.jacobian);
        assert!(j1.hessian.is_none());
    }

    #[test]
    fn weight_gradient_of_squared_output() {
        let arch = MlpArchitecture::new(vec![2, 8, 1]).unwrap();
        let w0 = init_weights(&arch, 3);
        let x0 = [0.25, -0.5];

        let g = Graph::new();
        let winputs = g.inputs(arch.n_weights());
        let x = [g.constant(x0[0]), g.constant(x0[1])];
        let out = forward(&arch, &winputs, &x)[0];
        let loss = out.square();
        let prog = g.finish(loss);

        let mut ws = Workspace::default();
        let mut grad = vec![0.0; arch.n_weights()];
        let val = prog.eval_with_gradient(&w0, &mut ws, &mut grad);
        let direct = forward(&arch, &w0, &x0)[0];
        assert!((val - direct * direct).abs() < 1e-14);

        let h = 1e-6;
        for &i in &[0usize, 5, 11, arch.n_weights() - 1] {
            let mut wp = w0.clone();
            let mut wm = w0.clone();
            wp[i] += h;
            wm[i] -= h;
            let fp = forward(&arch, &wp, &x0)[0].powi(2);
            let fm = forward(&arch, &wm, &x0)[0].powi(2);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                "w[{i}]: {} vs {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn recorded_jets_match_direct_jets() {
        // The same jet propagation over Expr scalars must reproduce the f64
        // jet evaluation once the program runs on the same weights.
        let arch = MlpArchitecture::new(vec![2, 6, 6, 1]).unwrap();
        let w0 = init_weights(&arch, 11);
        let p = [0.6, 0.1];

        let g = Graph::new();
        let winputs = g.inputs(arch.n_weights());
        let xj = Jet2::var(g.constant(p[0]), 0);
        let yj = Jet2::var(g.constant(p[1]), 1);
        let out = forward_jets(&arch, &winputs, &[xj, yj])[0];
        let lap = g.finish(out.laplacian());

        let mut ws = Workspace::default();
        let recorded = lap.eval(&w0, &mut ws);
        let direct = input_jet(&arch, &w0, p, 2).unwrap();
        let hess = &direct.hessian.unwrap()[0];
        assert!((recorded - (hess[0] + hess[2])).abs() < 1e-13);
    }

    #[test]
    fn l2_penalty_values() {
        assert_eq!(l2_penalty(&[0.0; 4], 1e-6), 0.0);
        assert_eq!(l2_penalty(&[3.0, 4.0], 1.0), 25.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let arch = MlpArchitecture::scalar_net(2, 2, 5);
        let w = init_weights(&arch, 99);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save_checkpoint(&path, &arch, 99, &w).unwrap();
        let (arch2, seed, w2) = load_checkpoint(&path).unwrap();
        assert_eq!(arch2, arch);
        assert_eq!(seed, 99);
        assert_eq!(w2, w);
    }

    #[test]
    fn differentiation_suite_random_cases() {
        // 20 random (arch, w, x) triples: first order rel. 1e-5, second 1e-3.
        let shapes = [vec![2, 5, 1], vec![2, 8, 4, 1], vec![2, 3, 3, 3, 1], vec![2, 12, 1]];
        for case in 0..20u64 {
            let arch = MlpArchitecture::new(shapes[case as usize % shapes.len()].clone()).unwrap();
            let w = init_weights(&arch, 1000 + case);
            let p = rand_inputs(2000 + case, 2);
            let p = [p[0], p[1]];
            let jet = input_jet(&arch, &w, p, 2).unwrap();
            let f = |p: [f64; 2]| forward(&arch, &w, &p)[0];
            let h = 1e-5;
            let fx = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
            let fy = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
            assert!((jet.jacobian[0][0] - fx).abs() <= 1e-5 * (1.0 + fx.abs()), "case {case}");
            assert!((jet.jacobian[0][1] - fy).abs() <= 1e-5 * (1.0 + fy.abs()), "case {case}");
            let hess = &jet.hessian.as_ref().unwrap()[0];
            let fp = f(p);
            let fxx = (f([p[0] + h, p[1]]) - 2.0 * fp + f([p[0] - h, p[1]])) / (h * h);
            let fyy = (f([p[0], p[1] + h]) - 2.0 * fp + f([p[0], p[1] - h])) / (h * h);
            let fxy = (f([p[0] + h, p[1] + h]) - f([p[0] + h, p[1] - h])
                - f([p[0] - h, p[1] + h])
                + f([p[0] - h, p[1] - h]))
                / (4.0 * h * h);
            assert!((hess[0] - fxx).abs() <= 1e-3 * (1.0 + fxx.abs()), "case {case}");
            assert!((hess[1] - fxy).abs() <= 1e-3 * (1.0 + fxy.abs()), "case {case}");
            assert!((hess[2] - fyy).abs() <= 1e-3 * (1.0 + fyy.abs()), "case {case}");
        }
    }
}
