//! LSTM cells and stacked bidirectional LSTM sequence processing, with
//! backpropagation through time.
//!
//! Gate order within the stacked weight matrices and bias is fixed as
//! (input, forget, cell-candidate, output). A single combined bias vector
//! is used; there are no separate input/recurrent biases.

use super::dense::{sigmoid_scalar, tanh_scalar};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LstmCell {
    /// `[4*hidden, input]`, gate-major in (i, f, g, o) order.
    pub input_weights: Tensor,
    /// `[4*hidden, hidden]`, same gate order.
    pub recurrent_weights: Tensor,
    /// `[4*hidden]` combined bias.
    pub bias: Tensor,
}

impl LstmCell {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        LstmCell {
            input_weights: Tensor::zeros(vec![4 * hidden, input]),
            recurrent_weights: Tensor::zeros(vec![4 * hidden, hidden]),
            bias: Tensor::zeros(vec![4 * hidden]),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent_weights.cols()
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.input_weights.len() + self.recurrent_weights.len() + self.bias.len()
    }

    /// One recurrence step. Returns `(h_t, c_t)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.hidden_size();
        if x.len() != self.input_size() {
            return Err(Error::dimension(
                "lstm_step",
                "input",
                self.input_size(),
                x.len(),
            ));
        }
        if h_prev.len() != h || c_prev.len() != h {
            return Err(Error::dimension(
                "lstm_step",
                "state",
                h,
                h_prev.len().max(c_prev.len()),
            ));
        }
        let mut gates = vec![0.0; 4 * h];
        let mut h_out = vec![0.0; h];
        let mut c_out = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        self.step_into(
            x,
            h_prev,
            c_prev,
            &mut gates,
            &mut c_out,
            &mut tanh_c,
            &mut h_out,
        );
        Ok((h_out, c_out))
    }

    /// Core step writing post-activation gate values and new states into
    /// caller-provided buffers (no per-step allocation).
    fn step_into(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
        gates: &mut [f64],
        c_out: &mut [f64],
        tanh_c: &mut [f64],
        h_out: &mut [f64],
    ) {
        let h = self.hidden_size();
        let inp = self.input_size();
        let wi = self.input_weights.data();
        let wh = self.recurrent_weights.data();
        let b = self.bias.data();
        for r in 0..4 * h {
            let mut acc = b[r];
            let wir = &wi[r * inp..(r + 1) * inp];
            for (w, xv) in wir.iter().zip(x) {
                acc += w * xv;
            }
            let whr = &wh[r * h..(r + 1) * h];
            for (w, hv) in whr.iter().zip(h_prev) {
                acc += w * hv;
            }
            gates[r] = acc;
        }
        for k in 0..h {
            let i = sigmoid_scalar(gates[k]);
            let f = sigmoid_scalar(gates[h + k]);
            let g = tanh_scalar(gates[2 * h + k]);
            let o = sigmoid_scalar(gates[3 * h + k]);
            gates[k] = i;
            gates[h + k] = f;
            gates[2 * h + k] = g;
            gates[3 * h + k] = o;
            let c = f * c_prev[k] + i * g;
            c_out[k] = c;
            let tc = tanh_scalar(c);
            tanh_c[k] = tc;
            h_out[k] = o * tc;
        }
    }
}

/// Per-direction activations recorded over a sequence, in processing order
/// (index 0 is the first step the cell took, which for the backward
/// direction is the *last* sequence position).
#[derive(Clone, Debug)]
struct DirectionCache {
    /// `[T, 4h]` post-activation gate values.
    gates: Vec<f64>,
    /// `[T, h]` cell states after each step.
    c: Vec<f64>,
    /// `[T, h]` tanh of each cell state.
    tanh_c: Vec<f64>,
    /// `[T, h]` hidden states after each step.
    h: Vec<f64>,
}

fn run_direction(
    cell: &LstmCell,
    seq: &[f64],
    steps: usize,
    in_dim: usize,
    reverse: bool,
) -> DirectionCache {
    let h = cell.hidden_size();
    let mut cache = DirectionCache {
        gates: vec![0.0; steps * 4 * h],
        c: vec![0.0; steps * h],
        tanh_c: vec![0.0; steps * h],
        h: vec![0.0; steps * h],
    };
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for u in 0..steps {
        let pos = if reverse { steps - 1 - u } else { u };
        let x = &seq[pos * in_dim..(pos + 1) * in_dim];
        // Split the flat buffers at step u.
        let gates = &mut cache.gates[u * 4 * h..(u + 1) * 4 * h];
        let (c_out, tanh_c, h_out) = {
            let c = &mut cache.c[u * h..(u + 1) * h];
            let t = &mut cache.tanh_c[u * h..(u + 1) * h];
            let hh = &mut cache.h[u * h..(u + 1) * h];
            (c, t, hh)
        };
        cell.step_into(x, &h_prev, &c_prev, gates, c_out, tanh_c, h_out);
        h_prev.copy_from_slice(h_out);
        c_prev.copy_from_slice(c_out);
    }
    cache
}

/// BPTT for one direction. `d_h_by_pos` is `[T, h]` indexed by sequence
/// position; `d_input` (also by position) is accumulated into.
#[allow(clippy::too_many_arguments)]
fn backward_direction(
    cell: &LstmCell,
    seq: &[f64],
    steps: usize,
    in_dim: usize,
    reverse: bool,
    cache: &DirectionCache,
    d_h_by_pos: &[f64],
    dw_ih: &mut [f64],
    dw_hh: &mut [f64],
    db: &mut [f64],
    d_input: &mut [f64],
) {
    let h = cell.hidden_size();
    let wi = cell.input_weights.data();
    let wh = cell.recurrent_weights.data();
    let mut dh_rec = vec![0.0; h];
    let mut dc_rec = vec![0.0; h];
    let mut dpre = vec![0.0; 4 * h];
    for u in (0..steps).rev() {
        let pos = if reverse { steps - 1 - u } else { u };
        let gates = &cache.gates[u * 4 * h..(u + 1) * 4 * h];
        let tanh_c = &cache.tanh_c[u * h..(u + 1) * h];
        let c_prev = if u == 0 {
            None
        } else {
            Some(&cache.c[(u - 1) * h..u * h])
        };
        let h_prev = if u == 0 {
            None
        } else {
            Some(&cache.h[(u - 1) * h..u * h])
        };
        for k in 0..h {
            let i = gates[k];
            let f = gates[h + k];
            let g = gates[2 * h + k];
            let o = gates[3 * h + k];
            let tc = tanh_c[k];
            let dh = d_h_by_pos[pos * h + k] + dh_rec[k];
            let dc_total = dc_rec[k] + dh * o * (1.0 - tc * tc);
            let d_o = dh * tc;
            let d_i = dc_total * g;
            let d_f = dc_total * c_prev.map_or(0.0, |c| c[k]);
            let d_g = dc_total * i;
            dpre[k] = d_i * i * (1.0 - i);
            dpre[h + k] = d_f * f * (1.0 - f);
            dpre[2 * h + k] = d_g * (1.0 - g * g);
            dpre[3 * h + k] = d_o * o * (1.0 - o);
            dc_rec[k] = dc_total * f;
        }
        let x = &seq[pos * in_dim..(pos + 1) * in_dim];
        let dx = &mut d_input[pos * in_dim..(pos + 1) * in_dim];
        dh_rec.iter_mut().for_each(|v| *v = 0.0);
        for (r, &d) in dpre.iter().enumerate() {
            db[r] += d;
            let wir = &wi[r * in_dim..(r + 1) * in_dim];
            let dwir = &mut dw_ih[r * in_dim..(r + 1) * in_dim];
            for i in 0..in_dim {
                dwir[i] += d * x[i];
                dx[i] += d * wir[i];
            }
            if let Some(hp) = h_prev {
                let dwhr = &mut dw_hh[r * h..(r + 1) * h];
                for k in 0..h {
                    dwhr[k] += d * hp[k];
                }
            }
            let whr = &wh[r * h..(r + 1) * h];
            for k in 0..h {
                dh_rec[k] += d * whr[k];
            }
        }
    }
}

/// One bidirectional layer: independent forward and backward cells whose
/// per-position outputs are concatenated.
#[derive(Clone, Debug)]
pub struct BiLstmLayer {
    pub forward: LstmCell,
    pub backward: LstmCell,
}

/// A stack of bidirectional LSTM layers. Layer `l > 0` consumes the
/// concatenated (2x hidden) output sequence of layer `l - 1`.
#[derive(Clone, Debug)]
pub struct BiLstmStack {
    pub layers: Vec<BiLstmLayer>,
}

/// Activations recorded by [`BiLstmStack::forward_cached`].
#[derive(Clone, Debug)]
pub struct BiLstmCache {
    steps: usize,
    /// Input sequence of each layer, flattened `[T, in_l]`.
    layer_inputs: Vec<Vec<f64>>,
    layer_in_dims: Vec<usize>,
    directions: Vec<(DirectionCache, DirectionCache)>,
}

impl BiLstmStack {
    /// Builds a zero-initialized stack. `hidden_sizes[l]` is the per-cell
    /// hidden width of layer `l`; layer `l > 0` takes `2 * hidden_sizes[l-1]`
    /// inputs.
    pub fn zeros(input_dim: usize, hidden_sizes: &[usize]) -> Self {
        let mut layers = Vec::with_capacity(hidden_sizes.len());
        let mut in_dim = input_dim;
        for &h in hidden_sizes {
            layers.push(BiLstmLayer {
                forward: LstmCell::zeros(h, in_dim),
                backward: LstmCell::zeros(h, in_dim),
            });
            in_dim = 2 * h;
        }
        BiLstmStack { layers }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].forward.input_size()
    }

    /// Width of the concatenated per-position output of the last layer.
    pub fn output_size(&self) -> usize {
        2 * self.layers.last().unwrap().forward.hidden_size()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.forward.param_count() + l.backward.param_count())
            .sum()
    }

    /// `[T, in] -> [T, 2 * hidden_last]`.
    pub fn forward(&self, sequence: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(sequence)?.0)
    }

    pub fn forward_cached(&self, sequence: &Tensor) -> Result<(Tensor, BiLstmCache)> {
        let (steps, in_dim) = match sequence.shape() {
            [t, d] => (*t, *d),
            other => {
                return Err(Error::Input(format!(
                    "bilstm input must be rank 2 [steps, features], got {other:?}"
                )))
            }
        };
        if steps == 0 {
            return Err(Error::Input("bilstm input sequence is empty".into()));
        }
        if in_dim != self.input_size() {
            return Err(Error::dimension(
                "bilstm_forward",
                "features",
                self.input_size(),
                in_dim,
            ));
        }
        let mut cache = BiLstmCache {
            steps,
            layer_inputs: Vec::with_capacity(self.layers.len()),
            layer_in_dims: Vec::with_capacity(self.layers.len()),
            directions: Vec::with_capacity(self.layers.len()),
        };
        let mut seq = sequence.data().to_vec();
        let mut dim = in_dim;
        for layer in &self.layers {
            let h = layer.forward.hidden_size();
            let fwd = run_direction(&layer.forward, &seq, steps, dim, false);
            let bwd = run_direction(&layer.backward, &seq, steps, dim, true);
            // Concatenate per position: fwd state at pos t is processing
            // step t; bwd state at pos t is processing step T-1-t.
            let mut out = vec![0.0; steps * 2 * h];
            for t in 0..steps {
                out[t * 2 * h..t * 2 * h + h].copy_from_slice(&fwd.h[t * h..(t + 1) * h]);
                let u = steps - 1 - t;
                out[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(&bwd.h[u * h..(u + 1) * h]);
            }
            cache.layer_inputs.push(seq);
            cache.layer_in_dims.push(dim);
            cache.directions.push((fwd, bwd));
            seq = out;
            dim = 2 * h;
        }
        let out = Tensor::new(vec![steps, dim], seq)?;
        Ok((out, cache))
    }

    /// Backward through the stack. `grads` layout per layer: forward cell
    /// (w_ih, w_hh, bias) then backward cell (w_ih, w_hh, bias), i.e. six
    /// slots per layer. Returns the gradient w.r.t. the input sequence.
    pub fn backward(
        &self,
        cache: &BiLstmCache,
        grad_out: &Tensor,
        grads: &mut [Vec<f64>],
    ) -> Result<Tensor> {
        if grads.len() != 6 * self.layers.len() {
            return Err(Error::dimension(
                "bilstm_backward",
                "grads",
                6 * self.layers.len(),
                grads.len(),
            ));
        }
        let steps = cache.steps;
        if grad_out.shape() != [steps, self.output_size()] {
            return Err(Error::dimension(
                "bilstm_backward",
                "grad_out",
                steps * self.output_size(),
                grad_out.len(),
            ));
        }
        let mut d_out = grad_out.data().to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let h = layer.forward.hidden_size();
            let in_dim = cache.layer_in_dims[l];
            let seq = &cache.layer_inputs[l];
            let (fwd_cache, bwd_cache) = &cache.directions[l];
            // Split the concatenated output gradient into per-direction
            // [T, h] position-indexed halves.
            let mut d_fwd = vec![0.0; steps * h];
            let mut d_bwd = vec![0.0; steps * h];
            for t in 0..steps {
                d_fwd[t * h..(t + 1) * h]
                    .copy_from_slice(&d_out[t * 2 * h..t * 2 * h + h]);
                d_bwd[t * h..(t + 1) * h]
                    .copy_from_slice(&d_out[t * 2 * h + h..(t + 1) * 2 * h]);
            }
            let mut d_input = vec![0.0; steps * in_dim];
            let (gf, rest) = grads[6 * l..].split_at_mut(3);
            let gb = &mut rest[..3];
            {
                let (a, b) = gf.split_at_mut(1);
                let (b1, b2) = b.split_at_mut(1);
                backward_direction(
                    &layer.forward,
                    seq,
                    steps,
                    in_dim,
                    false,
                    fwd_cache,
                    &d_fwd,
                    &mut a[0],
                    &mut b1[0],
                    &mut b2[0],
                    &mut d_input,
                );
            }
            {
                let (a, b) = gb.split_at_mut(1);
                let (b1, b2) = b.split_at_mut(1);
                backward_direction(
                    &layer.backward,
                    seq,
                    steps,
                    in_dim,
                    true,
                    bwd_cache,
                    &d_bwd,
                    &mut a[0],
                    &mut b1[0],
                    &mut b2[0],
                    &mut d_input,
                );
            }
            d_out = d_input;
        }
        Tensor::new(vec![steps, self.input_size()], d_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cell_keeps_state_at_zero() {
        let cell = LstmCell::zeros(3, 2);
        let (h, c) = cell.step(&[5.0, -2.0], &[0.0; 3], &[0.0; 3]).unwrap();
        // Gates sit at 0.5 but the candidate is tanh(0) = 0.
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);
    }

    #[test]
    fn scalar_cell_matches_desk_recurrence() {
        // Single hidden unit; the oracle below re-derives each quantity
        // with plain scalar arithmetic.
        let mut cell = LstmCell::zeros(1, 1);
        let wi = [0.5, -0.3, 0.8, 0.2]; // i, f, g, o
        let wh = [0.1, 0.4, -0.2, 0.3];
        let b = [0.05, -0.1, 0.2, 0.15];
        cell.input_weights.data_mut().copy_from_slice(&wi);
        cell.recurrent_weights.data_mut().copy_from_slice(&wh);
        cell.bias.data_mut().copy_from_slice(&b);

        let sig = |a: f64| 1.0 / (1.0 + (-a).exp());
        let xs = [1.0, -0.5];
        let (mut h, mut c) = (0.0f64, 0.0f64);
        let (mut hv, mut cv) = (vec![0.0], vec![0.0]);
        for &x in &xs {
            let i = sig(wi[0] * x + wh[0] * h + b[0]);
            let f = sig(wi[1] * x + wh[1] * h + b[1]);
            let g = (wi[2] * x + wh[2] * h + b[2]).tanh();
            let o = sig(wi[3] * x + wh[3] * h + b[3]);
            c = f * c + i * g;
            h = o * c.tanh();

            let (nh, nc) = cell.step(&[x], &hv, &cv).unwrap();
            hv = nh;
            cv = nc;
            assert!((hv[0] - h).abs() < 1e-14, "h: {} vs {}", hv[0], h);
            assert!((cv[0] - c).abs() < 1e-14, "c: {} vs {}", cv[0], c);
        }
    }

    #[test]
    fn saturated_forget_gate_preserves_cell_state() {
        let mut cell = LstmCell::zeros(2, 1);
        // f-gate bias +20 (forget ~= 1), i-gate bias -20 (input ~= 0).
        cell.bias.data_mut()[0] = -20.0;
        cell.bias.data_mut()[1] = -20.0;
        cell.bias.data_mut()[2] = 20.0;
        cell.bias.data_mut()[3] = 20.0;
        let c_prev = [0.7, -0.4];
        let (_, c) = cell.step(&[1.0], &[0.0; 2], &c_prev).unwrap();
        for k in 0..2 {
            assert!((c[k] - c_prev[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn state_dim_mismatch_is_reported() {
        let cell = LstmCell::zeros(2, 1);
        let err = cell.step(&[1.0], &[0.0; 3], &[0.0; 2]).unwrap_err();
        assert!(err.to_string().contains("state"));
    }

    fn fill_with_pattern(t: &mut Tensor, scale: f64) {
        let n = t.len();
        for (k, v) in t.data_mut().iter_mut().enumerate() {
            *v = scale * ((k % 7) as f64 - 3.0) / (n as f64).sqrt();
        }
    }

    fn patterned_stack(input_dim: usize, hidden: &[usize]) -> BiLstmStack {
        let mut stack = BiLstmStack::zeros(input_dim, hidden);
        for (l, layer) in stack.layers.iter_mut().enumerate() {
            let s = 0.4 + 0.1 * l as f64;
            fill_with_pattern(&mut layer.forward.input_weights, s);
            fill_with_pattern(&mut layer.forward.recurrent_weights, 0.8 * s);
            fill_with_pattern(&mut layer.forward.bias, 0.3);
            fill_with_pattern(&mut layer.backward.input_weights, 1.1 * s);
            fill_with_pattern(&mut layer.backward.recurrent_weights, 0.7 * s);
            fill_with_pattern(&mut layer.backward.bias, 0.2);
        }
        stack
    }

    #[test]
    fn zero_weight_stack_outputs_zero() {
        let stack = BiLstmStack::zeros(3, &[4, 2]);
        let seq = Tensor::new(vec![5, 3], (0..15).map(|k| k as f64).collect()).unwrap();
        let out = stack.forward(&seq).unwrap();
        assert_eq!(out.shape(), &[5, 4]);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_sequence_is_an_input_error() {
        let stack = BiLstmStack::zeros(3, &[2]);
        let seq = Tensor::new(vec![0, 3], vec![]).unwrap();
        assert!(matches!(
            stack.forward(&seq).unwrap_err(),
            Error::Input(_)
        ));
    }

    #[test]
    fn single_step_output_concatenates_both_directions() {
        let stack = patterned_stack(2, &[3]);
        let x = Tensor::new(vec![1, 2], vec![0.3, -0.9]).unwrap();
        let out = stack.forward(&x).unwrap();
        // With T = 1 both cells see the same input and fresh state.
        let (hf, _) = stack.layers[0].forward.step(&[0.3, -0.9], &[0.0; 3], &[0.0; 3]).unwrap();
        let (hb, _) = stack.layers[0]
            .backward
            .step(&[0.3, -0.9], &[0.0; 3], &[0.0; 3])
            .unwrap();
        assert_eq!(out.data()[..3], hf[..]);
        assert_eq!(out.data()[3..], hb[..]);
    }

    #[test]
    fn reversing_input_and_swapping_cells_reverses_output() {
        // Single bidirectional layer: deeper layers would additionally need
        // their input columns permuted to follow the swapped halves.
        let stack = patterned_stack(2, &[3]);
        let mut swapped = stack.clone();
        for layer in swapped.layers.iter_mut() {
            std::mem::swap(&mut layer.forward, &mut layer.backward);
        }
        let t = 6;
        let data: Vec<f64> = (0..t * 2).map(|k| ((k * 13 % 11) as f64 - 5.0) / 4.0).collect();
        let seq = Tensor::new(vec![t, 2], data.clone()).unwrap();
        let mut rev = vec![0.0; t * 2];
        for pos in 0..t {
            rev[pos * 2..pos * 2 + 2].copy_from_slice(&data[(t - 1 - pos) * 2..(t - pos) * 2]);
        }
        let rev_seq = Tensor::new(vec![t, 2], rev).unwrap();

        let out = stack.forward(&seq).unwrap();
        let out_swapped = swapped.forward(&rev_seq).unwrap();
        let w = stack.output_size();
        let h = w / 2;
        for pos in 0..t {
            let a = out.row(pos);
            let b = out_swapped.row(t - 1 - pos);
            // Halves swap along with the cells.
            for k in 0..h {
                assert!((a[k] - b[h + k]).abs() < 1e-12);
                assert!((a[h + k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn palindromic_input_with_shared_cells_gives_palindromic_output() {
        let mut stack = patterned_stack(2, &[3]);
        stack.layers[0].backward = stack.layers[0].forward.clone();
        let t = 5;
        let mut data = vec![0.0; t * 2];
        for pos in 0..t {
            let mirrored = pos.min(t - 1 - pos) as f64;
            data[pos * 2] = 0.3 * mirrored;
            data[pos * 2 + 1] = -0.2 * mirrored + 0.1;
        }
        let out = stack.forward(&Tensor::new(vec![t, 2], data).unwrap()).unwrap();
        let h = 3;
        for pos in 0..t {
            let a = out.row(pos);
            let b = out.row(t - 1 - pos);
            for k in 0..h {
                assert!((a[k] - b[h + k]).abs() < 1e-12);
                assert!((a[h + k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bounded_input_keeps_cell_state_bounded() {
        let stack = patterned_stack(1, &[2]);
        let t = 64;
        let seq = Tensor::new(vec![t, 1], vec![1.0; t]).unwrap();
        let (_, cache) = stack.forward_cached(&seq).unwrap();
        // |c_t| <= t since |g| <= 1 and gates are in (0, 1).
        for (u, &c) in cache.directions[0].0.c.iter().enumerate() {
            let step = u / 2 + 1;
            assert!(c.abs() <= step as f64 + 1e-9);
        }
    }
}
