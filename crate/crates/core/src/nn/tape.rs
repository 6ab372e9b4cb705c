//! Reverse-mode differentiation over a per-example tape. Forward ops compute
//! eagerly into the tape and record what they need for the backward sweep;
//! `backward` walks the tape once in reverse and returns per-parameter
//! gradient updates.
//!
//! Shape mismatches and non-finite results are contract violations and panic
//! at the offending op.

use rand::Rng;

use super::params::{ParamId, ParamStore};
use super::tensor::{matvec_into, matvec_transpose_accum, outer_accum, Scalar, Shape, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op<T> {
    Param(ParamId),
    Constant,
    MatVec { w: NodeId, x: NodeId },
    Add { a: NodeId, b: NodeId },
    AddN { parts: Vec<NodeId> },
    Mul { a: NodeId, b: NodeId },
    OneMinus { x: NodeId },
    Tanh { x: NodeId },
    Sigmoid { x: NodeId },
    Concat { parts: Vec<NodeId> },
    Row { table: NodeId, row: usize },
    Dropout { x: NodeId, mask: Vec<T> },
    Softmax { x: NodeId },
    LogSoftmax { x: NodeId },
    Nll { log_probs: NodeId, target: usize },
    Scale { x: NodeId, c: T },
    Sum { x: NodeId },
    Slice { x: NodeId, start: usize, len: usize },
    AttnMix { weights: NodeId, states: Vec<NodeId> },
}

struct Node<T> {
    op: Op<T>,
    value: Tensor<T>,
}

pub struct Tape<'s, T> {
    store: &'s ParamStore<T>,
    nodes: Vec<Node<T>>,
    param_nodes: Vec<Option<NodeId>>,
}

impl<'s, T: Scalar> Tape<'s, T> {
    pub fn new(store: &'s ParamStore<T>) -> Self {
        Tape { store, nodes: Vec::with_capacity(256), param_nodes: vec![None; store.len()] }
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>, context: &str) -> NodeId {
        value.assert_finite(context);
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { op, value });
        id
    }

    /// Leaf for a trainable parameter; memoized so each parameter appears on
    /// the tape once.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(node) = self.param_nodes[id.0] {
            return node;
        }
        let value = self.store.value(id).clone();
        let node = self.push(Op::Param(id), value, "param");
        self.param_nodes[id.0] = Some(node);
        node
    }

    /// Leaf for an input the pass does not differentiate through.
    pub fn constant(&mut self, value: Tensor<T>) -> NodeId {
        self.push(Op::Constant, value, "constant")
    }

    pub fn zeros(&mut self, n: usize) -> NodeId {
        self.constant(Tensor::zeros(Shape::Vector(n)))
    }

    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> NodeId {
        let Shape::Matrix(rows, cols) = self.value(w).shape() else {
            panic!("matvec weight must be a matrix");
        };
        assert_eq!(self.value(x).shape(), Shape::Vector(cols), "matvec shape mismatch");
        let mut out = vec![T::zero(); rows];
        matvec_into(self.value(w).data(), rows, cols, self.value(x).data(), &mut out);
        self.push(Op::MatVec { w, x }, Tensor::vector(out), "matvec")
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.value(a).shape(), self.value(b).shape(), "add shape mismatch");
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| x + y)
            .collect();
        let shape = self.value(a).shape();
        self.push(Op::Add { a, b }, Tensor::new(shape, data), "add")
    }

    /// Elementwise sum of several same-shape nodes.
    pub fn add_n(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "add_n of nothing");
        let shape = self.value(parts[0]).shape();
        let mut data = vec![T::zero(); shape.len()];
        for &p in parts {
            assert_eq!(self.value(p).shape(), shape, "add_n shape mismatch");
            for (d, &v) in data.iter_mut().zip(self.value(p).data()) {
                *d += v;
            }
        }
        self.push(Op::AddN { parts: parts.to_vec() }, Tensor::new(shape, data), "add_n")
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.value(a).shape(), self.value(b).shape(), "mul shape mismatch");
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| x * y)
            .collect();
        let shape = self.value(a).shape();
        self.push(Op::Mul { a, b }, Tensor::new(shape, data), "mul")
    }

    /// 1 - x, elementwise.
    pub fn one_minus(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|&v| T::one() - v).collect();
        let shape = self.value(x).shape();
        self.push(Op::OneMinus { x }, Tensor::new(shape, data), "one_minus")
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|v| v.tanh()).collect();
        let shape = self.value(x).shape();
        self.push(Op::Tanh { x }, Tensor::new(shape, data), "tanh")
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let one = T::one();
        let data = self
            .value(x)
            .data()
            .iter()
            .map(|&v| one / (one + (-v).exp()))
            .collect();
        let shape = self.value(x).shape();
        self.push(Op::Sigmoid { x }, Tensor::new(shape, data), "sigmoid")
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut data = Vec::new();
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
        }
        self.push(Op::Concat { parts: parts.to_vec() }, Tensor::vector(data), "concat")
    }

    /// One row of a matrix-shaped node (embedding lookup).
    pub fn row(&mut self, table: NodeId, row: usize) -> NodeId {
        let Shape::Matrix(rows, cols) = self.value(table).shape() else {
            panic!("row lookup needs a matrix");
        };
        assert!(row < rows, "row {row} out of range ({rows} rows)");
        let data = self.value(table).data()[row * cols..(row + 1) * cols].to_vec();
        self.push(Op::Row { table, row }, Tensor::vector(data), "row")
    }

    /// Inverted dropout: in training each element is zeroed with probability
    /// `p` and survivors are scaled by 1/(1-p); outside training (or at p=0)
    /// this is the identity.
    pub fn dropout<R: Rng>(&mut self, x: NodeId, p: f64, training: bool, rng: &mut R) -> NodeId {
        assert!((0.0..1.0).contains(&p), "dropout probability must be in [0, 1)");
        if !training || p == 0.0 {
            return x;
        }
        let keep_scale = T::from_f64_lossy(1.0 / (1.0 - p));
        let mask: Vec<T> = (0..self.value(x).len())
            .map(|_| if rng.random::<f64>() < p { T::zero() } else { keep_scale })
            .collect();
        let data = self
            .value(x)
            .data()
            .iter()
            .zip(&mask)
            .map(|(&v, &m)| v * m)
            .collect();
        let shape = self.value(x).shape();
        self.push(Op::Dropout { x, mask }, Tensor::new(shape, data), "dropout")
    }

    /// Numerically stable softmax over a vector.
    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let data = softmax_values(self.value(x).data());
        self.push(Op::Softmax { x }, Tensor::vector(data), "softmax")
    }

    /// Numerically stable log-softmax over a vector.
    pub fn log_softmax(&mut self, x: NodeId) -> NodeId {
        let xs = self.value(x).data();
        let max = xs.iter().cloned().fold(T::neg_infinity(), T::max);
        let log_z = xs.iter().map(|&v| (v - max).exp()).sum::<T>().ln() + max;
        let data = xs.iter().map(|&v| v - log_z).collect();
        self.push(Op::LogSoftmax { x }, Tensor::vector(data), "log_softmax")
    }

    /// Negative log likelihood of `target` under a log-probability vector.
    pub fn nll(&mut self, log_probs: NodeId, target: usize) -> NodeId {
        let lp = self.value(log_probs);
        assert!(target < lp.len(), "nll target {target} out of range ({})", lp.len());
        let loss = -lp.data()[target];
        self.push(Op::Nll { log_probs, target }, Tensor::scalar(loss), "nll")
    }

    pub fn scale(&mut self, x: NodeId, c: T) -> NodeId {
        let data = self.value(x).data().iter().map(|&v| v * c).collect();
        let shape = self.value(x).shape();
        self.push(Op::Scale { x, c }, Tensor::new(shape, data), "scale")
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let s = self.value(x).data().iter().copied().sum();
        self.push(Op::Sum { x }, Tensor::scalar(s), "sum")
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let data = self.value(x).data()[start..start + len].to_vec();
        self.push(Op::Slice { x, start, len }, Tensor::vector(data), "slice")
    }

    /// Weighted sum of state vectors: out = sum_k weights[k] * states[k].
    pub fn attn_mix(&mut self, weights: NodeId, states: &[NodeId]) -> NodeId {
        assert_eq!(self.value(weights).len(), states.len(), "one weight per state");
        assert!(!states.is_empty(), "attention over an empty state list");
        let dim = self.value(states[0]).len();
        let mut out = vec![T::zero(); dim];
        for (k, &s) in states.iter().enumerate() {
            let w = self.value(weights).data()[k];
            for (o, &v) in out.iter_mut().zip(self.value(s).data()) {
                *o += w * v;
            }
        }
        self.push(
            Op::AttnMix { weights, states: states.to_vec() },
            Tensor::vector(out),
            "attn_mix",
        )
    }

    /// Convenience: W x + b.
    pub fn affine(&mut self, w: ParamId, x: NodeId, b: ParamId) -> NodeId {
        let wn = self.param(w);
        let bn = self.param(b);
        let mv = self.matvec(wn, x);
        self.add(mv, bn)
    }

    /// Reverse sweep from a scalar loss node, seeded with `seed` (use 1/batch
    /// when accumulating a mean over examples). Consumes the tape and returns
    /// the gradient updates for every parameter the pass touched.
    pub fn backward(mut self, loss: NodeId, seed: T) -> Vec<(ParamId, Tensor<T>)> {
        assert_eq!(self.value(loss).len(), 1, "backward starts from a scalar");
        let mut adjoints: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        adjoints[loss.0] = Some(Tensor::scalar(seed));

        for i in (0..self.nodes.len()).rev() {
            let Some(g) = adjoints[i].take() else { continue };
            // Split borrows: nodes before i stay immutably readable for
            // values while adjoints are updated.
            let (before, at) = self.nodes.split_at_mut(i);
            let node = &at[0];
            let value = |id: NodeId| -> &Tensor<T> { &before[id.0].value };
            let bump = |adjs: &mut Vec<Option<Tensor<T>>>, id: NodeId, f: &mut dyn FnMut(&mut [T])| {
                let slot = &mut adjs[id.0];
                if slot.is_none() {
                    *slot = Some(Tensor::zeros(before[id.0].value.shape()));
                }
                f(slot.as_mut().unwrap().data_mut());
            };

            match &node.op {
                Op::Param(_) | Op::Constant => {
                    adjoints[i] = Some(g);
                    continue;
                }
                Op::MatVec { w, x } => {
                    let Shape::Matrix(rows, cols) = value(*w).shape() else { unreachable!() };
                    bump(&mut adjoints, *w, &mut |dw| {
                        outer_accum(g.data(), value(*x).data(), dw);
                    });
                    bump(&mut adjoints, *x, &mut |dx| {
                        matvec_transpose_accum(value(*w).data(), rows, cols, g.data(), dx);
                    });
                }
                Op::Add { a, b } => {
                    for id in [*a, *b] {
                        bump(&mut adjoints, id, &mut |d| {
                            for (dv, &gv) in d.iter_mut().zip(g.data()) {
                                *dv += gv;
                            }
                        });
                    }
                }
                Op::AddN { parts } => {
                    for &p in parts {
                        bump(&mut adjoints, p, &mut |d| {
                            for (dv, &gv) in d.iter_mut().zip(g.data()) {
                                *dv += gv;
                            }
                        });
                    }
                }
                Op::Mul { a, b } => {
                    bump(&mut adjoints, *a, &mut |d| {
                        for ((dv, &gv), &bv) in d.iter_mut().zip(g.data()).zip(value(*b).data()) {
                            *dv += gv * bv;
                        }
                    });
                    bump(&mut adjoints, *b, &mut |d| {
                        for ((dv, &gv), &av) in d.iter_mut().zip(g.data()).zip(value(*a).data()) {
                            *dv += gv * av;
                        }
                    });
                }
                Op::OneMinus { x } => {
                    bump(&mut adjoints, *x, &mut |d| {
                        for (dv, &gv) in d.iter_mut().zip(g.data()) {
                            *dv -= gv;
                        }
                    });
                }
                Op::Tanh { x } => {
                    let y = &node.value;
                    bump(&mut adjoints, *x, &mut |d| {
                        for ((dv, &gv), &yv) in d.iter_mut().zip(g.data()).zip(y.data()) {
                            *dv += gv * (T::one() - yv * yv);
                        }
                    });
                }
                Op::Sigmoid { x } => {
                    let y = &node.value;
                    bump(&mut adjoints, *x, &mut |d| {
                        for ((dv, &gv), &yv) in d.iter_mut().zip(g.data()).zip(y.data()) {
                            *dv += gv * yv * (T::one() - yv);
                        }
                    });
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for &p in parts {
                        let n = value(p).len();
                        let gpart = &g.data()[offset..offset + n];
                        bump(&mut adjoints, p, &mut |d| {
                            for (dv, &gv) in d.iter_mut().zip(gpart) {
                                *dv += gv;
                            }
                        });
                        offset += n;
                    }
                }
                Op::Row { table, row } => {
                    let cols = g.len();
                    bump(&mut adjoints, *table, &mut |d| {
                        for (dv, &gv) in d[row * cols..(row + 1) * cols].iter_mut().zip(g.data()) {
                            *dv += gv;
                        }
                    });
                }
                Op::Dropout { x, mask } => {
                    bump(&mut adjoints, *x, &mut |d| {
                        for ((dv, &gv), &m) in d.iter_mut().zip(g.data()).zip(mask.iter()) {
                            *dv += gv * m;
                        }
                    });
                }
                Op::Softmax { x } => {
                    let y = &node.value;
                    let dot: T = g.data().iter().zip(y.data()).map(|(&gv, &yv)| gv * yv).sum();
                    bump(&mut adjoints, *x, &mut |d| {
                        for ((dv, &gv), &yv) in d.iter_mut().zip(g.data()).zip(y.data()) {
                            *dv += (gv - dot) * yv;
                        }
                    });
                }
                Op::LogSoftmax { x } => {
                    let y = &node.value;
                    let gsum: T = g.data().iter().copied().sum();
                    bump(&mut adjoints, *x, &mut |d| {
                        for ((dv, &gv), &yv) in d.iter_mut().zip(g.data()).zip(y.data()) {
                            *dv += gv - yv.exp() * gsum;
                        }
                    });
                }
                Op::Nll { log_probs, target } => {
                    let gv = g.item();
                    let t = *target;
                    bump(&mut adjoints, *log_probs, &mut |d| {
                        d[t] -= gv;
                    });
                }
                Op::Scale { x, c } => {
                    let c = *c;
                    bump(&mut adjoints, *x, &mut |d| {
                        for (dv, &gv) in d.iter_mut().zip(g.data()) {
                            *dv += gv * c;
                        }
                    });
                }
                Op::Sum { x } => {
                    let gv = g.item();
                    bump(&mut adjoints, *x, &mut |d| {
                        for dv in d.iter_mut() {
                            *dv += gv;
                        }
                    });
                }
                Op::Slice { x, start, len } => {
                    let (start, len) = (*start, *len);
                    bump(&mut adjoints, *x, &mut |d| {
                        for (dv, &gv) in d[start..start + len].iter_mut().zip(g.data()) {
                            *dv += gv;
                        }
                    });
                }
                Op::AttnMix { weights, states } => {
                    for (k, &s) in states.iter().enumerate() {
                        let wk = value(*weights).data()[k];
                        bump(&mut adjoints, s, &mut |d| {
                            for (dv, &gv) in d.iter_mut().zip(g.data()) {
                                *dv += wk * gv;
                            }
                        });
                        let dot: T = g.data().iter().zip(value(s).data()).map(|(&gv, &sv)| gv * sv).sum();
                        bump(&mut adjoints, *weights, &mut |d| {
                            d[k] += dot;
                        });
                    }
                }
            }
        }

        let mut updates = Vec::new();
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if let Op::Param(pid) = node.op {
                if let Some(adj) = adjoints[i].take() {
                    updates.push((pid, adj));
                }
            }
        }
        updates
    }
}

pub(crate) fn softmax_values<T: Scalar>(xs: &[T]) -> Vec<T> {
    let max = xs.iter().cloned().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = xs.iter().map(|&v| (v - max).exp()).collect();
    let z: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the largest element (first on ties).
pub fn argmax<T: Scalar>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}
