//! LSTM encoder-decoder autoencoder for fixed-length feature windows,
//! implemented from scratch: forward pass, full backpropagation through
//! time, and an Adam training loop.
//!
//! The encoder consumes the `window x dimension` input from a zero state;
//! its final hidden vector is the latent code. The decoder runs the same
//! number of steps from a zero state, receiving the latent code as its
//! input at every step, and a linear projection maps each decoder hidden
//! state back to feature space. Training minimizes mean squared
//! reconstruction error; scoring uses mean absolute error, which keeps
//! scores in interpretable standardized-feature units.

mod cell;

pub use cell::{LstmCellParams, LstmState, StepTrace};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::pipeline::SequenceWindow;

/// Shape of the autoencoder: feature dimension, window length, hidden width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub input_dim: usize,
    pub window: usize,
    pub hidden_dim: usize,
}

impl ModelDims {
    pub fn validate(self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidInput(
                "model dimensions must be positive".into(),
            ));
        }
        if self.window < 2 {
            return Err(Error::InvalidInput(format!(
                "window must be at least 2, got {}",
                self.window
            )));
        }
        if self.hidden_dim >= self.window * self.input_dim {
            return Err(Error::InvalidInput(format!(
                "hidden_dim {} does not compress a {}x{} window; it must be smaller than {}",
                self.hidden_dim,
                self.window,
                self.input_dim,
                self.window * self.input_dim
            )));
        }
        Ok(())
    }
}

/// All weights of the autoencoder.
///
/// Deserialization re-validates every shape, so a hand-edited or truncated
/// model file is rejected instead of producing garbage scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutoencoderParamsDe")]
pub struct AutoencoderParams {
    pub dims: ModelDims,
    pub encoder: LstmCellParams,
    pub decoder: LstmCellParams,
    /// Output projection, `input_dim x hidden_dim`.
    pub proj_w: Mat,
    pub proj_b: Vec<f64>,
}

#[derive(Deserialize)]
struct AutoencoderParamsDe {
    dims: ModelDims,
    encoder: LstmCellParams,
    decoder: LstmCellParams,
    proj_w: Mat,
    proj_b: Vec<f64>,
}

impl TryFrom<AutoencoderParamsDe> for AutoencoderParams {
    type Error = Error;

    fn try_from(de: AutoencoderParamsDe) -> Result<Self> {
        let p = AutoencoderParams {
            dims: de.dims,
            encoder: de.encoder,
            decoder: de.decoder,
            proj_w: de.proj_w,
            proj_b: de.proj_b,
        };
        p.validate()?;
        Ok(p)
    }
}

impl AutoencoderParams {
    /// All-zero parameters of the given shape.
    pub fn zeros(dims: ModelDims) -> Result<Self> {
        dims.validate()?;
        Ok(AutoencoderParams {
            dims,
            encoder: LstmCellParams::zeros(dims.input_dim, dims.hidden_dim),
            decoder: LstmCellParams::zeros(dims.hidden_dim, dims.hidden_dim),
            proj_w: Mat::zeros(dims.input_dim, dims.hidden_dim),
            proj_b: vec![0.0; dims.input_dim],
        })
    }

    /// Random initialization: weights Uniform(-1/sqrt(H), 1/sqrt(H)),
    /// biases zero except the forget gates, which start at one so early
    /// training does not wipe the cell state.
    pub fn init(dims: ModelDims, rng: &mut impl Rng) -> Result<Self> {
        let mut p = Self::zeros(dims)?;
        let bound = 1.0 / (dims.hidden_dim as f64).sqrt();
        let mut draw = |m: &mut Mat| {
            for v in m.as_mut_slice() {
                *v = rng.gen_range(-bound..bound);
            }
        };
        for cell in [&mut p.encoder, &mut p.decoder] {
            for m in &mut cell.w_input {
                draw(m);
            }
            for m in &mut cell.w_recur {
                draw(m);
            }
            cell.bias[cell::GATE_FORGET].fill(1.0);
        }
        draw(&mut p.proj_w);
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        self.encoder.validate()?;
        self.decoder.validate()?;
        let ok = self.encoder.input_dim == self.dims.input_dim
            && self.encoder.hidden_dim == self.dims.hidden_dim
            && self.decoder.input_dim == self.dims.hidden_dim
            && self.decoder.hidden_dim == self.dims.hidden_dim
            && self.proj_w.rows() == self.dims.input_dim
            && self.proj_w.cols() == self.dims.hidden_dim
            && self.proj_b.len() == self.dims.input_dim;
        if !ok {
            return Err(Error::Schema(
                "autoencoder parameter shapes do not match the declared dimensions".into(),
            ));
        }
        Ok(())
    }

    fn check_window(&self, window: &Mat) -> Result<()> {
        if window.rows() != self.dims.window || window.cols() != self.dims.input_dim {
            return Err(Error::Schema(format!(
                "window is {}x{}, model expects {}x{}",
                window.rows(),
                window.cols(),
                self.dims.window,
                self.dims.input_dim
            )));
        }
        Ok(())
    }

    /// Flattened parameter count.
    pub fn num_params(&self) -> usize {
        let mut n = 0;
        self.for_each_slice(|s| n += s.len());
        n
    }

    /// Flatten all parameters in a fixed order: encoder input weights,
    /// encoder recurrent weights, encoder biases (each in gate order),
    /// then the decoder likewise, then the projection weights row-major,
    /// then the projection bias.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.for_each_slice(|s| out.extend_from_slice(s));
        out
    }

    /// Rebuild parameters of shape `dims` from [`Self::to_vec`] output.
    pub fn from_vec(dims: ModelDims, flat: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(dims)?;
        p.load_flat(flat)?;
        Ok(p)
    }

    /// Overwrite all parameters from a flat vector in [`Self::to_vec`] order.
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::InvalidInput(format!(
                "flat vector has {} entries, model has {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        self.for_each_slice_mut(|s| {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        });
        Ok(())
    }

    fn for_each_slice(&self, mut f: impl FnMut(&[f64])) {
        for cell in [&self.encoder, &self.decoder] {
            for m in &cell.w_input {
                f(m.as_slice());
            }
            for m in &cell.w_recur {
                f(m.as_slice());
            }
            for b in &cell.bias {
                f(b);
            }
        }
        f(self.proj_w.as_slice());
        f(&self.proj_b);
    }

    fn for_each_slice_mut(&mut self, mut f: impl FnMut(&mut [f64])) {
        for cell in [&mut self.encoder, &mut self.decoder] {
            for m in &mut cell.w_input {
                f(m.as_mut_slice());
            }
            for m in &mut cell.w_recur {
                f(m.as_mut_slice());
            }
            for b in &mut cell.bias {
                f(b);
            }
        }
        f(self.proj_w.as_mut_slice());
        f(&mut self.proj_b);
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_slice(|s| ok &= s.iter().all(|v| v.is_finite()));
        ok
    }

    /// Encode a window and decode it back to feature space.
    pub fn reconstruct(&self, window: &Mat) -> Result<Mat> {
        self.check_window(window)?;
        let h = self.dims.hidden_dim;
        let mut state = LstmState::zeros(h);
        for t in 0..self.dims.window {
            self.encoder.step(window.row(t), &mut state);
        }
        let latent = state.h.clone();
        let mut dec_state = LstmState::zeros(h);
        let mut output = Mat::zeros(self.dims.window, self.dims.input_dim);
        for t in 0..self.dims.window {
            self.decoder.step(&latent, &mut dec_state);
            let y = output.row_mut(t);
            y.copy_from_slice(&self.proj_b);
            self.proj_w.matvec_acc(&dec_state.h, y);
        }
        Ok(output)
    }

    /// Mean absolute reconstruction error of one window, the anomaly score.
    pub fn reconstruction_error(&self, window: &Mat) -> Result<f64> {
        mae(window, &self.reconstruct(window)?)
    }

    /// Mean squared reconstruction loss of one window and its gradient,
    /// flattened in [`Self::to_vec`] order.
    pub fn loss_and_gradient(&self, window: &Mat) -> Result<(f64, Vec<f64>)> {
        let mut grad = Self::zeros(self.dims)?;
        let loss = self.accumulate_loss_and_grad(window, &mut grad)?;
        Ok((loss, grad.to_vec()))
    }

    /// One window's forward pass, loss, and backward pass; parameter
    /// gradients accumulate into `grad`.
    fn accumulate_loss_and_grad(&self, window: &Mat, grad: &mut Self) -> Result<f64> {
        self.check_window(window)?;
        let w = self.dims.window;
        let d = self.dims.input_dim;
        let h = self.dims.hidden_dim;

        let mut enc_traces = Vec::with_capacity(w);
        let mut state = LstmState::zeros(h);
        for t in 0..w {
            enc_traces.push(self.encoder.step_traced(window.row(t), &mut state));
        }
        let latent = state.h;

        let mut dec_traces = Vec::with_capacity(w);
        let mut dec_state = LstmState::zeros(h);
        let mut output = Mat::zeros(w, d);
        for t in 0..w {
            dec_traces.push(self.decoder.step_traced(&latent, &mut dec_state));
            let y = output.row_mut(t);
            y.copy_from_slice(&self.proj_b);
            self.proj_w.matvec_acc(&dec_traces[t].h, y);
        }

        let norm = (w * d) as f64;
        let loss = output
            .as_slice()
            .iter()
            .zip(window.as_slice())
            .map(|(y, x)| (y - x) * (y - x))
            .sum::<f64>()
            / norm;

        // Decoder and projection backward, accumulating the latent gradient
        // from every decoder step.
        let scale = 2.0 / norm;
        let mut dz = vec![0.0; h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dh = vec![0.0; h];
        let mut dh_prev = vec![0.0; h];
        let mut dc_prev = vec![0.0; h];
        let mut dx_latent = vec![0.0; h];
        let mut dy = vec![0.0; d];
        for t in (0..w).rev() {
            for (j, dyj) in dy.iter_mut().enumerate() {
                *dyj = scale * (output.get(t, j) - window.get(t, j));
            }
            grad.proj_w.add_outer(&dy, &dec_traces[t].h);
            for (b, v) in grad.proj_b.iter_mut().zip(&dy) {
                *b += v;
            }
            dh.copy_from_slice(&dh_next);
            self.proj_w.matvec_t_acc(&dy, &mut dh);
            self.decoder.backward_step(
                &dec_traces[t],
                &dh,
                &dc_next,
                &mut grad.decoder,
                &mut dx_latent,
                &mut dh_prev,
                &mut dc_prev,
            );
            for (z, v) in dz.iter_mut().zip(&dx_latent) {
                *z += v;
            }
            std::mem::swap(&mut dh_next, &mut dh_prev);
            std::mem::swap(&mut dc_next, &mut dc_prev);
        }

        // Encoder backward: the latent gradient enters at the final step.
        dh_next.copy_from_slice(&dz);
        dc_next.fill(0.0);
        let mut dx_data = vec![0.0; d];
        for t in (0..w).rev() {
            self.encoder.backward_step(
                &enc_traces[t],
                &dh_next,
                &dc_next,
                &mut grad.encoder,
                &mut dx_data,
                &mut dh_prev,
                &mut dc_prev,
            );
            std::mem::swap(&mut dh_next, &mut dh_prev);
            std::mem::swap(&mut dc_next, &mut dc_prev);
        }
        Ok(loss)
    }
}

/// Mean absolute error between a window and its reconstruction, averaged
/// over all `window x dimension` entries.
pub fn mae(window: &Mat, reconstruction: &Mat) -> Result<f64> {
    if window.rows() != reconstruction.rows() || window.cols() != reconstruction.cols() {
        return Err(Error::InvalidInput(format!(
            "cannot compare a {}x{} window with a {}x{} reconstruction",
            window.rows(),
            window.cols(),
            reconstruction.rows(),
            reconstruction.cols()
        )));
    }
    let n = (window.rows() * window.cols()) as f64;
    let sum: f64 = window
        .as_slice()
        .iter()
        .zip(reconstruction.as_slice())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(sum / n)
}

/// Training hyperparameters. Every field has a serde default, so a partial
/// JSON config is valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_dim: 32,
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput(
                "hidden_dim, epochs, and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in [0,1), got {b}"
                )));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// What training produced besides the weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss per epoch, in sequence.
    pub epoch_losses: Vec<f64>,
    pub windows_trained: usize,
    pub windows_validated: usize,
    pub val_mae_mean: Option<f64>,
    pub val_mae_max: Option<f64>,
}

/// Train an autoencoder on benign windows with Adam.
///
/// Both window sets must be entirely benign; an anomalous window in either
/// would leak anomaly structure into the model or the threshold and is a
/// hard error. Training is deterministic for a fixed config: weight init
/// and batch order derive from `config.seed`. A non-finite loss or weight
/// aborts with a divergence error naming the 1-based epoch.
pub fn train(
    train_windows: &[SequenceWindow],
    val_windows: &[SequenceWindow],
    config: &TrainConfig,
) -> Result<(AutoencoderParams, TrainReport)> {
    config.validate()?;
    if train_windows.is_empty() {
        return Err(Error::EmptyInput("no training windows".into()));
    }
    for (name, set) in [("training", train_windows), ("validation", val_windows)] {
        if set.iter().any(|w| w.label.is_anomalous()) {
            return Err(Error::Leakage(format!(
                "{name} windows contain anomalous data"
            )));
        }
    }
    let first = &train_windows[0].values;
    let dims = ModelDims {
        input_dim: first.cols(),
        window: first.rows(),
        hidden_dim: config.hidden_dim,
    };
    for w in train_windows.iter().chain(val_windows) {
        if w.values.rows() != dims.window || w.values.cols() != dims.input_dim {
            return Err(Error::Schema("windows have inconsistent shapes".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = AutoencoderParams::init(dims, &mut rng)?;
    let n = params.num_params();
    let mut theta = params.to_vec();
    let mut adam_m = vec![0.0; n];
    let mut adam_v = vec![0.0; n];
    let mut step = 0i32;

    let mut order: Vec<usize> = (0..train_windows.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = AutoencoderParams::zeros(dims)?;
            let mut batch_loss = 0.0;
            for &idx in batch {
                batch_loss +=
                    params.accumulate_loss_and_grad(&train_windows[idx].values, &mut grad)?;
            }
            let inv = 1.0 / batch.len() as f64;
            batch_loss *= inv;
            if !batch_loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            loss_sum += batch_loss * batch.len() as f64;

            step += 1;
            let g = grad.to_vec();
            let bc1 = 1.0 - config.beta1.powi(step);
            let bc2 = 1.0 - config.beta2.powi(step);
            for k in 0..n {
                let gk = g[k] * inv;
                adam_m[k] = config.beta1 * adam_m[k] + (1.0 - config.beta1) * gk;
                adam_v[k] = config.beta2 * adam_v[k] + (1.0 - config.beta2) * gk * gk;
                let m_hat = adam_m[k] / bc1;
                let v_hat = adam_v[k] / bc2;
                theta[k] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
            }
            params.load_flat(&theta)?;
        }
        if !params.all_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        epoch_losses.push(loss_sum / train_windows.len() as f64);
    }

    let mut val_errors = Vec::with_capacity(val_windows.len());
    for w in val_windows {
        val_errors.push(params.reconstruction_error(&w.values)?);
    }
    let report = TrainReport {
        epoch_losses,
        windows_trained: train_windows.len(),
        windows_validated: val_windows.len(),
        val_mae_mean: if val_errors.is_empty() {
            None
        } else {
            Some(val_errors.iter().sum::<f64>() / val_errors.len() as f64)
        },
        val_mae_max: val_errors.iter().copied().fold(None, |acc, e| {
            Some(match acc {
                Some(a) if a >= e => a,
                _ => e,
            })
        }),
    };
    Ok((params, report))
}
