//! Tape-based reverse-mode differentiation.
//!
//! A [`Tape`] records primitive operations in topological order as they are
//! built; values are computed eagerly at insertion. [`Tape::backward`] walks
//! the nodes once in reverse, accumulating adjoints, and returns gradients
//! for every parameter leaf. The tape itself is not consumed: leaf values
//! can be updated and the whole graph re-evaluated with [`Tape::recompute`],
//! which is what the finite-difference harness relies on.
//!
//! Training rebuilds a fresh tape per step; graphs are small enough (a few
//! thousand nodes per BPTT chunk) that this is the simplest correct choice
//! for variable-length sequences.

use crate::{Error, Result};

use super::kernels;
use super::tensor::Tensor;

/// Handle to a node on a specific tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf { param: bool },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// (m x k) @ (k x n)
    MatMul(NodeId, NodeId),
    /// (k) @ (k x n) -> (n)
    VecMat(NodeId, NodeId),
    /// (m x n) + row vector (n), broadcast over rows
    AddRows(NodeId, NodeId),
    /// (n) -> (m x n), every row a copy
    BroadcastRows(NodeId, usize),
    /// elementwise + scalar node broadcast to the full shape
    AddBroadcast(NodeId, NodeId),
    Concat(NodeId, NodeId),
    Slice { input: NodeId, start: usize, len: usize },
    Reshape(NodeId),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Exp(NodeId),
    Log(NodeId),
    /// all elements -> scalar
    Sum(NodeId),
    /// (m x n) -> (m) row sums
    SumRows(NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId, f64),
    /// max(x, c) elementwise; gradient passes through only where x > c
    ClampMin(NodeId, f64),
    /// vector -> scalar log(sum(exp(v))), max-subtracted
    LogSumExp(NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
}

/// Gradients of one backward pass, addressable by parameter leaf id.
pub struct Gradients {
    by_node: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient for a parameter leaf, as recorded by `backward`.
    pub fn get(&self, id: NodeId) -> &[f64] {
        self.by_node[id.0]
            .as_deref()
            .expect("gradient requested for a node that is not a parameter leaf")
    }
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf; `backward` reports a gradient for it.
    pub fn param(&mut self, t: &Tensor) -> NodeId {
        self.push_node(Op::Leaf { param: true }, t.shape().to_vec(), t.data().to_vec())
    }

    /// Non-trainable leaf (inputs, targets, frozen noise).
    pub fn constant(&mut self, t: &Tensor) -> NodeId {
        self.push_node(Op::Leaf { param: false }, t.shape().to_vec(), t.data().to_vec())
    }

    pub fn constant_vec(&mut self, data: Vec<f64>) -> NodeId {
        let shape = vec![data.len()];
        self.push_node(Op::Leaf { param: false }, shape, data)
    }

    pub fn constant_scalar(&mut self, value: f64) -> NodeId {
        self.push_node(Op::Leaf { param: false }, vec![1], vec![value])
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    /// Scalar value of a single-element node.
    pub fn scalar_value(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].value.len(), 1);
        self.nodes[id.0].value[0]
    }

    /// Overwrite a leaf's value. Downstream values are stale until
    /// [`Tape::recompute`] runs.
    pub fn set_leaf(&mut self, id: NodeId, data: &[f64]) -> Result<()> {
        let node = &mut self.nodes[id.0];
        if !matches!(node.op, Op::Leaf { .. }) {
            return Err(Error::Contract("set_leaf on a non-leaf node".into()));
        }
        if node.value.len() != data.len() {
            return Err(Error::Contract(format!(
                "set_leaf length mismatch: node has {}, got {}",
                node.value.len(),
                data.len()
            )));
        }
        node.value.copy_from_slice(data);
        Ok(())
    }

    // ---- op builders -------------------------------------------------

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.shape(a), self.shape(b), "add: shape mismatch");
        let shape = self.shape(a).to_vec();
        self.push(Op::Add(a, b), shape)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.shape(a), self.shape(b), "sub: shape mismatch");
        let shape = self.shape(a).to_vec();
        self.push(Op::Sub(a, b), shape)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.shape(a), self.shape(b), "mul: shape mismatch");
        let shape = self.shape(a).to_vec();
        self.push(Op::Mul(a, b), shape)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.shape(a), self.shape(b));
        assert!(sa.len() == 2 && sb.len() == 2, "matmul: operands must be matrices");
        assert_eq!(sa[1], sb[0], "matmul: inner dimensions differ");
        let shape = vec![sa[0], sb[1]];
        self.push(Op::MatMul(a, b), shape)
    }

    pub fn vecmat(&mut self, v: NodeId, m: NodeId) -> NodeId {
        let (sv, sm) = (self.shape(v), self.shape(m));
        assert!(sv.len() == 1 && sm.len() == 2, "vecmat: expects vector and matrix");
        assert_eq!(sv[0], sm[0], "vecmat: inner dimensions differ");
        let shape = vec![sm[1]];
        self.push(Op::VecMat(v, m), shape)
    }

    pub fn add_rows(&mut self, m: NodeId, v: NodeId) -> NodeId {
        let (sm, sv) = (self.shape(m), self.shape(v));
        assert!(sm.len() == 2 && sv.len() == 1 && sm[1] == sv[0], "add_rows: shape mismatch");
        let shape = sm.to_vec();
        self.push(Op::AddRows(m, v), shape)
    }

    pub fn broadcast_rows(&mut self, v: NodeId, rows: usize) -> NodeId {
        let sv = self.shape(v);
        assert!(sv.len() == 1 && rows > 0, "broadcast_rows: expects a vector");
        let shape = vec![rows, sv[0]];
        self.push(Op::BroadcastRows(v, rows), shape)
    }

    pub fn add_broadcast(&mut self, a: NodeId, scalar: NodeId) -> NodeId {
        assert_eq!(self.value(scalar).len(), 1, "add_broadcast: rhs must be scalar");
        let shape = self.shape(a).to_vec();
        self.push(Op::AddBroadcast(a, scalar), shape)
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (sa, sb) = (self.shape(a), self.shape(b));
        assert!(sa.len() == 1 && sb.len() == 1, "concat: expects vectors");
        let shape = vec![sa[0] + sb[0]];
        self.push(Op::Concat(a, b), shape)
    }

    pub fn slice(&mut self, input: NodeId, start: usize, len: usize) -> NodeId {
        let s = self.shape(input);
        assert!(s.len() == 1 && start + len <= s[0], "slice: out of bounds");
        self.push(Op::Slice { input, start, len }, vec![len])
    }

    pub fn reshape(&mut self, input: NodeId, shape: Vec<usize>) -> NodeId {
        let n: usize = shape.iter().product();
        assert_eq!(n, self.value(input).len(), "reshape: element count changed");
        self.push(Op::Reshape(input), shape)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::Tanh(a), shape)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::Sigmoid(a), shape)
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::Exp(a), shape)
    }

    pub fn log(&mut self, a: NodeId) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::Log(a), shape)
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Sum(a), vec![1])
    }

    pub fn sum_rows(&mut self, a: NodeId) -> NodeId {
        let s = self.shape(a);
        assert_eq!(s.len(), 2, "sum_rows: expects a matrix");
        let shape = vec![s[0]];
        self.push(Op::SumRows(a), shape)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::Scale(a, c), shape)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::AddScalar(a, c), shape)
    }

    pub fn clamp_min(&mut self, a: NodeId, c: f64) -> NodeId {
        let shape = self.shape(a).to_vec();
        self.push(Op::ClampMin(a, c), shape)
    }

    pub fn logsumexp(&mut self, a: NodeId) -> NodeId {
        assert!(!self.value(a).is_empty(), "logsumexp: input must be non-empty");
        self.push(Op::LogSumExp(a), vec![1])
    }

    // ---- evaluation ---------------------------------------------------

    fn push(&mut self, op: Op, shape: Vec<usize>) -> NodeId {
        let value = self.eval(&op);
        debug_assert_eq!(value.len(), shape.iter().product::<usize>());
        self.push_node(op, shape, value)
    }

    fn push_node(&mut self, op: Op, shape: Vec<usize>, value: Vec<f64>) -> NodeId {
        self.nodes.push(Node { op, shape, value });
        NodeId(self.nodes.len() - 1)
    }

    fn eval(&self, op: &Op) -> Vec<f64> {
        let val = |id: &NodeId| &self.nodes[id.0].value;
        let shape = |id: &NodeId| &self.nodes[id.0].shape;
        match op {
            Op::Leaf { .. } => unreachable!("leaves carry their own value"),
            Op::Add(a, b) => val(a).iter().zip(val(b)).map(|(x, y)| x + y).collect(),
            Op::Sub(a, b) => val(a).iter().zip(val(b)).map(|(x, y)| x - y).collect(),
            Op::Mul(a, b) => val(a).iter().zip(val(b)).map(|(x, y)| x * y).collect(),
            Op::MatMul(a, b) => {
                let (sa, sb) = (shape(a), shape(b));
                kernels::matmul(val(a), val(b), sa[0], sa[1], sb[1])
            }
            Op::VecMat(v, m) => {
                let sm = shape(m);
                kernels::vecmat(val(v), val(m), sm[0], sm[1])
            }
            Op::AddRows(m, v) => {
                let (mv, vv) = (val(m), val(v));
                let n = vv.len();
                mv.iter().enumerate().map(|(i, x)| x + vv[i % n]).collect()
            }
            Op::BroadcastRows(v, rows) => {
                let vv = val(v);
                let mut out = Vec::with_capacity(vv.len() * rows);
                for _ in 0..*rows {
                    out.extend_from_slice(vv);
                }
                out
            }
            Op::AddBroadcast(a, s) => {
                let c = val(s)[0];
                val(a).iter().map(|x| x + c).collect()
            }
            Op::Concat(a, b) => {
                let mut out = val(a).clone();
                out.extend_from_slice(val(b));
                out
            }
            Op::Slice { input, start, len } => val(input)[*start..*start + *len].to_vec(),
            Op::Reshape(a) => val(a).clone(),
            Op::Tanh(a) => kernels::tanh_vec(val(a)),
            Op::Sigmoid(a) => kernels::sigmoid_vec(val(a)),
            Op::Exp(a) => val(a).iter().map(|x| x.exp()).collect(),
            Op::Log(a) => val(a).iter().map(|x| x.ln()).collect(),
            Op::Sum(a) => vec![val(a).iter().sum()],
            Op::SumRows(a) => {
                let s = shape(a);
                let (rows, cols) = (s[0], s[1]);
                let v = val(a);
                (0..rows).map(|i| v[i * cols..(i + 1) * cols].iter().sum()).collect()
            }
            Op::Scale(a, c) => val(a).iter().map(|x| x * c).collect(),
            Op::AddScalar(a, c) => val(a).iter().map(|x| x + c).collect(),
            Op::ClampMin(a, c) => val(a).iter().map(|x| x.max(*c)).collect(),
            Op::LogSumExp(a) => {
                let v = val(a);
                let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = v.iter().map(|x| (x - max).exp()).sum();
                vec![max + sum.ln()]
            }
        }
    }

    /// Re-run the forward pass from the current leaf values, in recorded
    /// order. Makes the tape reusable after leaf updates.
    pub fn recompute(&mut self) {
        for idx in 0..self.nodes.len() {
            if matches!(self.nodes[idx].op, Op::Leaf { .. }) {
                continue;
            }
            let op = self.nodes[idx].op.clone();
            self.nodes[idx].value = self.eval(&op);
        }
    }

    /// Reverse pass from a scalar output node.
    ///
    /// Returns a gradient for every parameter leaf; parameters the output
    /// does not depend on get zero gradients. The tape is left intact.
    pub fn backward(&self, output: NodeId) -> Result<Gradients> {
        if self.nodes[output.0].value.len() != 1 {
            return Err(Error::Contract(format!(
                "backward requires a scalar output, node has shape {:?}",
                self.nodes[output.0].shape
            )));
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        adj[output.0] = Some(vec![1.0]);

        for idx in (0..=output.0).rev() {
            // Leaves keep their adjoints for collection below; interior
            // adjoints are consumed once their inputs have been updated.
            if matches!(self.nodes[idx].op, Op::Leaf { .. }) {
                continue;
            }
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            // Borrow adjoint buffers lazily so untouched nodes stay None.
            macro_rules! acc {
                ($id:expr) => {
                    adj[$id.0].get_or_insert_with(|| vec![0.0; self.nodes[$id.0].value.len()])
                };
            }
            match &node.op {
                Op::Leaf { .. } => {}
                Op::Add(a, b) => {
                    kernels::add_assign(acc!(a), &g);
                    kernels::add_assign(acc!(b), &g);
                }
                Op::Sub(a, b) => {
                    kernels::add_assign(acc!(a), &g);
                    let gb = acc!(b);
                    for (x, gv) in gb.iter_mut().zip(&g) {
                        *x -= gv;
                    }
                }
                Op::Mul(a, b) => {
                    let vb = &self.nodes[b.0].value;
                    let va = &self.nodes[a.0].value;
                    let ga = acc!(a);
                    for ((x, gv), bv) in ga.iter_mut().zip(&g).zip(vb) {
                        *x += gv * bv;
                    }
                    let gb = acc!(b);
                    for ((x, gv), av) in gb.iter_mut().zip(&g).zip(va) {
                        *x += gv * av;
                    }
                }
                Op::MatMul(a, b) => {
                    let (m, k) = (self.nodes[a.0].shape[0], self.nodes[a.0].shape[1]);
                    let n = self.nodes[b.0].shape[1];
                    let da = kernels::matmul_grad_lhs(&g, &self.nodes[b.0].value, m, k, n);
                    kernels::add_assign(acc!(a), &da);
                    let db = kernels::matmul_grad_rhs(&self.nodes[a.0].value, &g, m, k, n);
                    kernels::add_assign(acc!(b), &db);
                }
                Op::VecMat(v, mat) => {
                    let (k, n) = (self.nodes[mat.0].shape[0], self.nodes[mat.0].shape[1]);
                    let mval = &self.nodes[mat.0].value;
                    let vval = &self.nodes[v.0].value;
                    let gv = acc!(v);
                    for i in 0..k {
                        let row = &mval[i * n..(i + 1) * n];
                        let mut dot = 0.0;
                        for (rv, gj) in row.iter().zip(&g) {
                            dot += rv * gj;
                        }
                        gv[i] += dot;
                    }
                    let gm = acc!(mat);
                    for i in 0..k {
                        let row = &mut gm[i * n..(i + 1) * n];
                        let vi = vval[i];
                        for (rv, gj) in row.iter_mut().zip(&g) {
                            *rv += vi * gj;
                        }
                    }
                }
                Op::AddRows(m, v) => {
                    kernels::add_assign(acc!(m), &g);
                    let n = self.nodes[v.0].value.len();
                    let gv = acc!(v);
                    for (i, gval) in g.iter().enumerate() {
                        gv[i % n] += gval;
                    }
                }
                Op::BroadcastRows(v, rows) => {
                    let n = self.nodes[v.0].value.len();
                    let gv = acc!(v);
                    for r in 0..*rows {
                        for j in 0..n {
                            gv[j] += g[r * n + j];
                        }
                    }
                }
                Op::AddBroadcast(a, s) => {
                    kernels::add_assign(acc!(a), &g);
                    acc!(s)[0] += g.iter().sum::<f64>();
                }
                Op::Concat(a, b) => {
                    let na = self.nodes[a.0].value.len();
                    kernels::add_assign(acc!(a), &g[..na]);
                    kernels::add_assign(acc!(b), &g[na..]);
                }
                Op::Slice { input, start, len } => {
                    let gi = acc!(input);
                    for (x, gv) in gi[*start..*start + *len].iter_mut().zip(&g) {
                        *x += gv;
                    }
                }
                Op::Reshape(a) => kernels::add_assign(acc!(a), &g),
                Op::Tanh(a) => {
                    let y = &node.value;
                    let ga = acc!(a);
                    for ((x, gv), yv) in ga.iter_mut().zip(&g).zip(y) {
                        *x += gv * (1.0 - yv * yv);
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let ga = acc!(a);
                    for ((x, gv), yv) in ga.iter_mut().zip(&g).zip(y) {
                        *x += gv * yv * (1.0 - yv);
                    }
                }
                Op::Exp(a) => {
                    let y = &node.value;
                    let ga = acc!(a);
                    for ((x, gv), yv) in ga.iter_mut().zip(&g).zip(y) {
                        *x += gv * yv;
                    }
                }
                Op::Log(a) => {
                    let xv = &self.nodes[a.0].value;
                    let ga = acc!(a);
                    for ((x, gv), inp) in ga.iter_mut().zip(&g).zip(xv) {
                        *x += gv / inp;
                    }
                }
                Op::Sum(a) => {
                    let ga = acc!(a);
                    for x in ga.iter_mut() {
                        *x += g[0];
                    }
                }
                Op::SumRows(a) => {
                    let cols = self.nodes[a.0].shape[1];
                    let ga = acc!(a);
                    for (i, gv) in g.iter().enumerate() {
                        for x in ga[i * cols..(i + 1) * cols].iter_mut() {
                            *x += gv;
                        }
                    }
                }
                Op::Scale(a, c) => {
                    let ga = acc!(a);
                    for (x, gv) in ga.iter_mut().zip(&g) {
                        *x += gv * c;
                    }
                }
                Op::AddScalar(a, _) => kernels::add_assign(acc!(a), &g),
                Op::ClampMin(a, c) => {
                    let xv = &self.nodes[a.0].value;
                    let ga = acc!(a);
                    for ((x, gv), inp) in ga.iter_mut().zip(&g).zip(xv) {
                        if *inp > *c {
                            *x += gv;
                        }
                    }
                }
                Op::LogSumExp(a) => {
                    // d lse / d v_i = softmax(v)_i = exp(v_i - lse)
                    let lse = node.value[0];
                    let xv = &self.nodes[a.0].value;
                    let ga = acc!(a);
                    for (x, inp) in ga.iter_mut().zip(xv) {
                        *x += g[0] * (inp - lse).exp();
                    }
                }
            }
        }

        // Keep adjoints only for parameter leaves; zero-fill untouched ones.
        let mut by_node: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            if let Op::Leaf { param: true } = node.op {
                by_node[idx] = Some(adj[idx].take().unwrap_or_else(|| vec![0.0; node.value.len()]));
            }
        }
        Ok(Gradients { by_node })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(shape: Vec<usize>, data: Vec<f64>) -> Tensor {
        Tensor::from_vec(shape, data).unwrap()
    }

    #[test]
    fn square_gradient_is_two_x() {
        // f(x) = x*x at x=3 -> df/dx = 6
        let mut tape = Tape::new();
        let x = tape.param(&Tensor::scalar(3.0));
        let y = tape.mul(x, x);
        assert_eq!(tape.value(y), &[9.0]);
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get(x), &[6.0]);
    }

    #[test]
    fn linear_map_gradient_replicates_input() {
        // f(W) = sum(v @ W): dW[i][j] = v[i]
        let mut tape = Tape::new();
        let v = tape.constant(&tensor(vec![3], vec![2.0, -1.0, 0.5]));
        let w = tape.param(&Tensor::zeros(vec![3, 2]));
        let y = tape.vecmat(v, w);
        let loss = tape.sum(y);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w), &[2.0, 2.0, -1.0, -1.0, 0.5, 0.5]);
    }

    #[test]
    fn untouched_parameter_gets_zero_gradient() {
        let mut tape = Tape::new();
        let x = tape.param(&Tensor::scalar(3.0));
        let unused = tape.param(&tensor(vec![2], vec![1.0, 2.0]));
        let y = tape.mul(x, x);
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get(unused), &[0.0, 0.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.param(&tensor(vec![2], vec![1.0, 2.0]));
        let y = tape.tanh(x);
        assert!(tape.backward(y).is_err());
    }

    #[test]
    fn recompute_after_leaf_update() {
        let mut tape = Tape::new();
        let x = tape.param(&Tensor::scalar(2.0));
        let y = tape.mul(x, x);
        assert_eq!(tape.value(y), &[4.0]);
        tape.set_leaf(x, &[5.0]).unwrap();
        tape.recompute();
        assert_eq!(tape.value(y), &[25.0]);
        // Backward still works after recompute.
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get(x), &[10.0]);
    }

    #[test]
    fn concat_and_slice_route_gradients() {
        let mut tape = Tape::new();
        let a = tape.param(&tensor(vec![2], vec![1.0, 2.0]));
        let b = tape.param(&tensor(vec![3], vec![3.0, 4.0, 5.0]));
        let joined = tape.concat(a, b);
        let mid = tape.slice(joined, 1, 3); // [2, 3, 4]
        assert_eq!(tape.value(mid), &[2.0, 3.0, 4.0]);
        let loss = tape.sum(mid);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(a), &[0.0, 1.0]);
        assert_eq!(grads.get(b), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn logsumexp_node_matches_stable_fn() {
        let mut tape = Tape::new();
        let v = tape.param(&tensor(vec![3], vec![1000.0, 999.0, -5.0]));
        let l = tape.logsumexp(v);
        let expect = super::super::stable::logsumexp(&[1000.0, 999.0, -5.0]).unwrap();
        assert!((tape.scalar_value(l) - expect).abs() < 1e-12);
        // Gradient is the softmax of the inputs.
        let grads = tape.backward(l).unwrap();
        let sm = super::super::stable::softmax(&[1000.0, 999.0, -5.0], 1.0).unwrap();
        for (g, s) in grads.get(v).iter().zip(&sm) {
            assert!((g - s).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_subexpression_accumulates() {
        // f(x) = x*x + x at x=4 -> 2x + 1 = 9
        let mut tape = Tape::new();
        let x = tape.param(&Tensor::scalar(4.0));
        let sq = tape.mul(x, x);
        let y = tape.add(sq, x);
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get(x), &[9.0]);
    }
}
