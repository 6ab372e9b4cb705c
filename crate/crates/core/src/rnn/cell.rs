//! The three recurrent units. Every step takes the previous state, the
//! embedded previous word, and (decoder-side, when enabled) the
//! attention-weighted sum, which is concatenated into each gate's input.

use rand::Rng;

use crate::nn::{NodeId, ParamId, ParamStore, Scalar, Shape, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    Srn,
    Gru,
    Lstm,
}

impl CellKind {
    pub fn label(self) -> &'static str {
        match self {
            CellKind::Srn => "srn",
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
        }
    }

    /// Learning-rate default keyed to the cell type: SRNs do not converge at
    /// the gated cells' rate.
    pub fn default_learning_rate(self) -> f64 {
        match self {
            CellKind::Srn => 0.001,
            CellKind::Gru | CellKind::Lstm => 0.01,
        }
    }
}

impl std::str::FromStr for CellKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "srn" => Ok(CellKind::Srn),
            "gru" => Ok(CellKind::Gru),
            "lstm" => Ok(CellKind::Lstm),
            other => Err(format!("unknown cell kind {other:?}")),
        }
    }
}

/// Recurrent state: hidden vector, plus the cell vector for LSTMs.
#[derive(Debug, Clone, Copy)]
pub struct State {
    pub hidden: NodeId,
    pub cell: Option<NodeId>,
}

#[derive(Debug, Clone)]
pub enum CellParams {
    Srn {
        w: ParamId,
        b: ParamId,
    },
    Gru {
        w_r: ParamId,
        b_r: ParamId,
        w_z: ParamId,
        b_z: ParamId,
        w_nw: ParamId,
        b_nw: ParamId,
        w_nd: ParamId,
        b_nd: ParamId,
    },
    Lstm {
        w_i: ParamId,
        b_i: ParamId,
        w_f: ParamId,
        b_f: ParamId,
        w_g: ParamId,
        b_g: ParamId,
        w_o: ParamId,
        b_o: ParamId,
    },
}

impl CellParams {
    /// Register the parameters for one recurrent unit. `attn_dim` is the
    /// width of the attention-weighted sum fed to every gate (0 without
    /// attention).
    pub fn init<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        prefix: &str,
        kind: CellKind,
        hidden: usize,
        embedding: usize,
        attn_dim: usize,
        rng: &mut R,
    ) -> CellParams {
        let gate_in = hidden + embedding + attn_dim;
        let gate = |store: &mut ParamStore<T>, rng: &mut R, name: &str, cols: usize| {
            let w = store.add_uniform(
                format!("{prefix}.w_{name}"),
                Shape::Matrix(hidden, cols),
                cols,
                rng,
            );
            let b = store.add_uniform(format!("{prefix}.b_{name}"), Shape::Vector(hidden), cols, rng);
            (w, b)
        };
        match kind {
            CellKind::Srn => {
                let (w, b) = gate(store, rng, "h", gate_in);
                CellParams::Srn { w, b }
            }
            CellKind::Gru => {
                let (w_r, b_r) = gate(store, rng, "r", gate_in);
                let (w_z, b_z) = gate(store, rng, "z", gate_in);
                let (w_nw, b_nw) = gate(store, rng, "nw", embedding + attn_dim);
                let (w_nd, b_nd) = gate(store, rng, "nd", hidden);
                CellParams::Gru { w_r, b_r, w_z, b_z, w_nw, b_nw, w_nd, b_nd }
            }
            CellKind::Lstm => {
                let (w_i, b_i) = gate(store, rng, "i", gate_in);
                let (w_f, b_f) = gate(store, rng, "f", gate_in);
                let (w_g, b_g) = gate(store, rng, "g", gate_in);
                let (w_o, b_o) = gate(store, rng, "o", gate_in);
                CellParams::Lstm { w_i, b_i, w_f, b_f, w_g, b_g, w_o, b_o }
            }
        }
    }

    pub fn kind(&self) -> CellKind {
        match self {
            CellParams::Srn { .. } => CellKind::Srn,
            CellParams::Gru { .. } => CellKind::Gru,
            CellParams::Lstm { .. } => CellKind::Lstm,
        }
    }

    /// One step of the unit. `attn` must be `Some` exactly when the params
    /// were initialized with a nonzero attention width.
    pub fn step<T: Scalar>(
        &self,
        tape: &mut Tape<'_, T>,
        state: State,
        word: NodeId,
        attn: Option<NodeId>,
    ) -> State {
        match *self {
            CellParams::Srn { w, b } => {
                let cat = gate_input(tape, state.hidden, word, attn);
                let pre = tape.affine(w, cat, b);
                State { hidden: tape.tanh(pre), cell: None }
            }
            CellParams::Gru { w_r, b_r, w_z, b_z, w_nw, b_nw, w_nd, b_nd } => {
                let cat = gate_input(tape, state.hidden, word, attn);
                let r_pre = tape.affine(w_r, cat, b_r);
                let r = tape.sigmoid(r_pre);
                let z_pre = tape.affine(w_z, cat, b_z);
                let z = tape.sigmoid(z_pre);

                // n_t = tanh(W_nw [w, A] + b_nw + r * W_nD (D + b_nD))
                let n_in = match attn {
                    Some(a) => tape.concat(&[word, a]),
                    None => word,
                };
                let n_word = tape.affine(w_nw, n_in, b_nw);
                let b_nd_node = tape.param(b_nd);
                let shifted = tape.add(state.hidden, b_nd_node);
                let w_nd_node = tape.param(w_nd);
                let n_hidden = tape.matvec(w_nd_node, shifted);
                let gated = tape.mul(r, n_hidden);
                let n_pre = tape.add(n_word, gated);
                let n = tape.tanh(n_pre);

                // D_t = z * D_{t-1} + (1 - z) * n
                let keep = tape.mul(z, state.hidden);
                let anti = tape.one_minus(z);
                let update = tape.mul(anti, n);
                State { hidden: tape.add(keep, update), cell: None }
            }
            CellParams::Lstm { w_i, b_i, w_f, b_f, w_g, b_g, w_o, b_o } => {
                let cat = gate_input(tape, state.hidden, word, attn);
                let i_pre = tape.affine(w_i, cat, b_i);
                let i = tape.sigmoid(i_pre);
                let f_pre = tape.affine(w_f, cat, b_f);
                let f = tape.sigmoid(f_pre);
                let g_pre = tape.affine(w_g, cat, b_g);
                let g = tape.tanh(g_pre);
                let o_pre = tape.affine(w_o, cat, b_o);
                let o = tape.sigmoid(o_pre);

                let prev_cell = state.cell.expect("LSTM state carries a cell vector");
                let kept = tape.mul(f, prev_cell);
                let written = tape.mul(i, g);
                let cell = tape.add(kept, written);
                let cell_act = tape.tanh(cell);
                let hidden = tape.mul(o, cell_act);
                State { hidden, cell: Some(cell) }
            }
        }
    }
}

fn gate_input<T: Scalar>(
    tape: &mut Tape<'_, T>,
    hidden: NodeId,
    word: NodeId,
    attn: Option<NodeId>,
) -> NodeId {
    match attn {
        Some(a) => tape.concat(&[hidden, word, a]),
        None => tape.concat(&[hidden, word]),
    }
}
