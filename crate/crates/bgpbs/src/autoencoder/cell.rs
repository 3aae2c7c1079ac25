//! A single LSTM cell with explicit forward traces and a hand-derived
//! backward pass, the recurrent building block of the autoencoder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;

/// Gate indices into the per-gate parameter arrays.
pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CANDIDATE: usize = 3;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parameters of one LSTM cell. Gate order is input, forget, output,
/// candidate throughout: `w_input[k]` is `hidden_dim x input_dim`,
/// `w_recur[k]` is `hidden_dim x hidden_dim`, `bias[k]` has `hidden_dim`
/// entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_input: [Mat; 4],
    pub w_recur: [Mat; 4],
    pub bias: [Vec<f64>; 4],
}

/// Hidden and cell state of one LSTM cell.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Everything the backward pass needs about one forward step.
#[derive(Clone, Debug)]
pub struct StepTrace {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Post-activation gate values, indexed by the `GATE_*` constants.
    pub gates: [Vec<f64>; 4],
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmCellParams {
    /// All-zero parameters of the given shape.
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let wx = || Mat::zeros(hidden_dim, input_dim);
        let wh = || Mat::zeros(hidden_dim, hidden_dim);
        let b = || vec![0.0; hidden_dim];
        LstmCellParams {
            input_dim,
            hidden_dim,
            w_input: [wx(), wx(), wx(), wx()],
            w_recur: [wh(), wh(), wh(), wh()],
            bias: [b(), b(), b(), b()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Schema("cell dimensions must be positive".into()));
        }
        for k in 0..4 {
            if self.w_input[k].rows() != self.hidden_dim
                || self.w_input[k].cols() != self.input_dim
                || self.w_recur[k].rows() != self.hidden_dim
                || self.w_recur[k].cols() != self.hidden_dim
                || self.bias[k].len() != self.hidden_dim
            {
                return Err(Error::Schema(format!(
                    "gate {k} parameter shapes do not match a {}x{} cell",
                    self.input_dim, self.hidden_dim
                )));
            }
        }
        Ok(())
    }

    fn preactivations(&self, x: &[f64], h_prev: &[f64]) -> [Vec<f64>; 4] {
        std::array::from_fn(|k| {
            let mut a = self.bias[k].clone();
            self.w_input[k].matvec_acc(x, &mut a);
            self.w_recur[k].matvec_acc(h_prev, &mut a);
            a
        })
    }

    /// Advance the state by one timestep.
    #[allow(clippy::needless_range_loop)]
    pub fn step(&self, x: &[f64], state: &mut LstmState) {
        let pre = self.preactivations(x, &state.h);
        for j in 0..self.hidden_dim {
            let i = sigmoid(pre[GATE_INPUT][j]);
            let f = sigmoid(pre[GATE_FORGET][j]);
            let o = sigmoid(pre[GATE_OUTPUT][j]);
            let g = pre[GATE_CANDIDATE][j].tanh();
            let c = f * state.c[j] + i * g;
            state.c[j] = c;
            state.h[j] = o * c.tanh();
        }
    }

    /// Advance the state by one timestep, recording the forward trace.
    #[allow(clippy::needless_range_loop)]
    pub fn step_traced(&self, x: &[f64], state: &mut LstmState) -> StepTrace {
        let pre = self.preactivations(x, &state.h);
        let mut trace = StepTrace {
            x: x.to_vec(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates: std::array::from_fn(|_| vec![0.0; self.hidden_dim]),
            c: vec![0.0; self.hidden_dim],
            h: vec![0.0; self.hidden_dim],
        };
        for j in 0..self.hidden_dim {
            let i = sigmoid(pre[GATE_INPUT][j]);
            let f = sigmoid(pre[GATE_FORGET][j]);
            let o = sigmoid(pre[GATE_OUTPUT][j]);
            let g = pre[GATE_CANDIDATE][j].tanh();
            let c = f * trace.c_prev[j] + i * g;
            trace.gates[GATE_INPUT][j] = i;
            trace.gates[GATE_FORGET][j] = f;
            trace.gates[GATE_OUTPUT][j] = o;
            trace.gates[GATE_CANDIDATE][j] = g;
            trace.c[j] = c;
            trace.h[j] = o * c.tanh();
        }
        state.c.copy_from_slice(&trace.c);
        state.h.copy_from_slice(&trace.h);
        trace
    }

    /// One step of backpropagation through time.
    ///
    /// `dh` and `dc_in` are the loss gradients flowing into this step's
    /// output state. Parameter gradients accumulate into `grad` (a
    /// same-shaped cell); `dx`, `dh_prev`, and `dc_prev` are overwritten
    /// with the gradients flowing out toward the input and the previous
    /// state.
    #[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
    pub fn backward_step(
        &self,
        trace: &StepTrace,
        dh: &[f64],
        dc_in: &[f64],
        grad: &mut LstmCellParams,
        dx: &mut [f64],
        dh_prev: &mut [f64],
        dc_prev: &mut [f64],
    ) {
        let n = self.hidden_dim;
        let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
        for j in 0..n {
            let i = trace.gates[GATE_INPUT][j];
            let f = trace.gates[GATE_FORGET][j];
            let o = trace.gates[GATE_OUTPUT][j];
            let g = trace.gates[GATE_CANDIDATE][j];
            let tanh_c = trace.c[j].tanh();
            let dc_total = dc_in[j] + dh[j] * o * (1.0 - tanh_c * tanh_c);
            da[GATE_OUTPUT][j] = dh[j] * tanh_c * o * (1.0 - o);
            da[GATE_FORGET][j] = dc_total * trace.c_prev[j] * f * (1.0 - f);
            da[GATE_INPUT][j] = dc_total * g * i * (1.0 - i);
            da[GATE_CANDIDATE][j] = dc_total * i * (1.0 - g * g);
            dc_prev[j] = dc_total * f;
        }
        dx.fill(0.0);
        dh_prev.fill(0.0);
        for k in 0..4 {
            self.w_input[k].matvec_t_acc(&da[k], dx);
            self.w_recur[k].matvec_t_acc(&da[k], dh_prev);
            grad.w_input[k].add_outer(&da[k], &trace.x);
            grad.w_recur[k].add_outer(&da[k], &trace.h_prev);
            for (b, d) in grad.bias[k].iter_mut().zip(&da[k]) {
                *b += d;
            }
        }
    }
}
