//! Recordable scalar programs with reverse-mode differentiation.
//!
//! A loss is built once as a [`Program`] by tracing arithmetic on [`Expr`]
//! handles, then evaluated many times with different input vectors. The
//! backward sweep produces the exact gradient with respect to all inputs.
//! Evaluation is bit-deterministic: the op sequence is fixed at build time.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Scalar;

#[derive(Clone, Debug)]
pub enum Op {
    Input(u32),
    Const(f64),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Scale(f64, u32),
    AddConst(f64, u32),
    Sin(u32),
    Cos(u32),
    Tanh(u32),
    Exp(u32),
    Sqrt(u32),
    Square(u32),
    /// `base + sum(coeff * node)` with constant coefficients.
    AffineComb { base: f64, terms: Vec<(f64, u32)> },
    /// `sum(node^2)`.
    SumSquares(Vec<u32>),
}

/// Expression recorder. Create inputs and constants, combine them with the
/// usual operators, then call [`Graph::finish`] to freeze the program.
#[derive(Default)]
pub struct Graph {
    ops: RefCell<Vec<Op>>,
    n_inputs: RefCell<u32>,
}

#[derive(Clone, Copy)]
pub struct Expr<'g> {
    g: &'g Graph,
    id: u32,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    fn push(&self, op: Op) -> u32 {
        let mut ops = self.ops.borrow_mut();
        ops.push(op);
        (ops.len() - 1) as u32
    }

    pub fn input(&self) -> Expr<'_> {
        let mut n = self.n_inputs.borrow_mut();
        let idx = *n;
        *n += 1;
        Expr {
            g: self,
            id: self.push(Op::Input(idx)),
        }
    }

    pub fn inputs(&self, count: usize) -> Vec<Expr<'_>> {
        (0..count).map(|_| self.input()).collect()
    }

    pub fn constant(&self, c: f64) -> Expr<'_> {
        Expr {
            g: self,
            id: self.push(Op::Const(c)),
        }
    }

    pub fn affine_comb(&self, base: f64, terms: &[(f64, Expr<'_>)]) -> Expr<'_> {
        let terms = terms.iter().map(|(c, e)| (*c, e.id)).collect();
        Expr {
            g: self,
            id: self.push(Op::AffineComb { base, terms }),
        }
    }

    pub fn sum_squares(&self, terms: &[Expr<'_>]) -> Expr<'_> {
        let ids = terms.iter().map(|e| e.id).collect();
        Expr {
            g: self,
            id: self.push(Op::SumSquares(ids)),
        }
    }

    /// Freeze the recorded ops into a program. The graph is left empty.
    pub fn finish(&self, output: Expr<'_>) -> Program {
        Program {
            output: output.id,
            n_inputs: *self.n_inputs.borrow() as usize,
            ops: std::mem::take(&mut *self.ops.borrow_mut()),
        }
    }
}

impl<'g> Expr<'g> {
    fn unary(self, f: impl FnOnce(u32) -> Op) -> Expr<'g> {
        Expr {
            g: self.g,
            id: self.g.push(f(self.id)),
        }
    }

    fn binary(self, o: Expr<'g>, f: impl FnOnce(u32, u32) -> Op) -> Expr<'g> {
        Expr {
            g: self.g,
            id: self.g.push(f(self.id, o.id)),
        }
    }

    pub fn square(self) -> Expr<'g> {
        self.unary(Op::Square)
    }
}

impl<'g> Add for Expr<'g> {
    type Output = Expr<'g>;
    fn add(self, o: Self) -> Self {
        self.binary(o, Op::Add)
    }
}
impl<'g> Sub for Expr<'g> {
    type Output = Expr<'g>;
    fn sub(self, o: Self) -> Self {
        self.binary(o, Op::Sub)
    }
}
impl<'g> Mul for Expr<'g> {
    type Output = Expr<'g>;
    fn mul(self, o: Self) -> Self {
        self.binary(o, Op::Mul)
    }
}
impl<'g> Div for Expr<'g> {
    type Output = Expr<'g>;
    fn div(self, o: Self) -> Self {
        self.binary(o, Op::Div)
    }
}
impl<'g> Neg for Expr<'g> {
    type Output = Expr<'g>;
    fn neg(self) -> Self {
        self.unary(Op::Neg)
    }
}
impl<'g> Add<f64> for Expr<'g> {
    type Output = Expr<'g>;
    fn add(self, c: f64) -> Self {
        self.unary(|n| Op::AddConst(c, n))
    }
}
impl<'g> Sub<f64> for Expr<'g> {
    type Output = Expr<'g>;
    fn sub(self, c: f64) -> Self {
        self.unary(|n| Op::AddConst(-c, n))
    }
}
impl<'g> Mul<f64> for Expr<'g> {
    type Output = Expr<'g>;
    fn mul(self, c: f64) -> Self {
        self.unary(|n| Op::Scale(c, n))
    }
}

impl<'g> Scalar for Expr<'g> {
    fn lift(self, c: f64) -> Self {
        self.g.constant(c)
    }
    fn sin(self) -> Self {
        self.unary(Op::Sin)
    }
    fn cos(self) -> Self {
        self.unary(Op::Cos)
    }
    fn tanh(self) -> Self {
        self.unary(Op::Tanh)
    }
    fn exp(self) -> Self {
        self.unary(Op::Exp)
    }
    fn sqrt(self) -> Self {
        self.unary(Op::Sqrt)
    }
}

/// A frozen scalar program: a topologically ordered op list with one output.
pub struct Program {
    ops: Vec<Op>,
    n_inputs: usize,
    output: u32,
}

/// Reusable value/adjoint buffers for program evaluation.
#[derive(Default)]
pub struct Workspace {
    values: Vec<f64>,
    adjoints: Vec<f64>,
}

impl Program {
    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn forward(&self, inputs: &[f64], values: &mut Vec<f64>) {
        assert_eq!(inputs.len(), self.n_inputs, "input length mismatch");
        values.clear();
        values.reserve(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Input(i) => inputs[*i as usize],
                Op::Const(c) => *c,
                Op::Add(a, b) => values[*a as usize] + values[*b as usize],
                Op::Sub(a, b) => values[*a as usize] - values[*b as usize],
                Op::Mul(a, b) => values[*a as usize] * values[*b as usize],
                Op::Div(a, b) => values[*a as usize] / values[*b as usize],
                Op::Neg(a) => -values[*a as usize],
                Op::Scale(c, a) => c * values[*a as usize],
                Op::AddConst(c, a) => c + values[*a as usize],
                Op::Sin(a) => values[*a as usize].sin(),
                Op::Cos(a) => values[*a as usize].cos(),
                Op::Tanh(a) => values[*a as usize].tanh(),
                Op::Exp(a) => values[*a as usize].exp(),
                Op::Sqrt(a) => values[*a as usize].sqrt(),
                Op::Square(a) => {
                    let x = values[*a as usize];
                    x * x
                }
                Op::AffineComb { base, terms } => {
                    let mut acc = *base;
                    for (c, n) in terms {
                        acc += c * values[*n as usize];
                    }
                    acc
                }
                Op::SumSquares(terms) => {
                    let mut acc = 0.0;
                    for n in terms {
                        let x = values[*n as usize];
                        acc += x * x;
                    }
                    acc
                }
            };
            values.push(v);
        }
    }

    pub fn eval(&self, inputs: &[f64], ws: &mut Workspace) -> f64 {
        self.forward(inputs, &mut ws.values);
        ws.values[self.output as usize]
    }

    /// Evaluates the program and writes `d output / d input_i` into `grad`.
    /// Returns the output value.
    pub fn eval_with_gradient(&self, inputs: &[f64], ws: &mut Workspace, grad: &mut [f64]) -> f64 {
        assert_eq!(grad.len(), self.n_inputs);
        self.forward(inputs, &mut ws.values);
        let values = &ws.values;
        let adj = &mut ws.adjoints;
        adj.clear();
        adj.resize(self.ops.len(), 0.0);
        adj[self.output as usize] = 1.0;
        grad.fill(0.0);
        for (i, op) in self.ops.iter().enumerate().rev() {
            let a_out = adj[i];
            if a_out == 0.0 {
                continue;
            }
            match op {
                Op::Input(idx) => grad[*idx as usize] += a_out,
                Op::Const(_) => {}
                Op::Add(a, b) => {
                    adj[*a as usize] += a_out;
                    adj[*b as usize] += a_out;
                }
                Op::Sub(a, b) => {
                    adj[*a as usize] += a_out;
                    adj[*b as usize] -= a_out;
                }
                Op::Mul(a, b) => {
                    adj[*a as usize] += a_out * values[*b as usize];
                    adj[*b as usize] += a_out * values[*a as usize];
                }
                Op::Div(a, b) => {
                    let vb = values[*b as usize];
                    adj[*a as usize] += a_out / vb;
                    adj[*b as usize] -= a_out * values[i] / vb;
                }
                Op::Neg(a) => adj[*a as usize] -= a_out,
                Op::Scale(c, a) => adj[*a as usize] += c * a_out,
                Op::AddConst(_, a) => adj[*a as usize] += a_out,
                Op::Sin(a) => adj[*a as usize] += a_out * values[*a as usize].cos(),
                Op::Cos(a) => adj[*a as usize] -= a_out * values[*a as usize].sin(),
                Op::Tanh(a) => {
                    let y = values[i];
                    adj[*a as usize] += a_out * (1.0 - y * y);
                }
                Op::Exp(a) => adj[*a as usize] += a_out * values[i],
                Op::Sqrt(a) => adj[*a as usize] += a_out * 0.5 / values[i],
                Op::Square(a) => adj[*a as usize] += a_out * 2.0 * values[*a as usize],
                Op::AffineComb { terms, .. } => {
                    for (c, n) in terms {
                        adj[*n as usize] += c * a_out;
                    }
                }
                Op::SumSquares(terms) => {
                    for n in terms {
                        adj[*n as usize] += 2.0 * a_out * values[*n as usize];
                    }
                }
            }
        }
        values[self.output as usize]
    }
}
