//! A single-direction LSTM cell with cached forward passes and exact
//! backpropagation through time.
//!
//! Gate layout stacks input, forget, cell, and output gates along the rows
//! of the weight matrices:
//!
//! ```text
//! pre = w_ih · x_t + w_hh · h_{t-1} + bias          (4·hidden)
//! i, f, g, o = sigmoid / sigmoid / tanh / sigmoid over the four blocks
//! c_t = f ∘ c_{t-1} + i ∘ g
//! h_t = o ∘ tanh(c_t)
//! ```

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Weights of one LSTM direction. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    /// `(4·hidden, input)`
    pub w_ih: Array2<f64>,
    /// `(4·hidden, hidden)`
    pub w_hh: Array2<f64>,
    /// `(4·hidden)`
    pub bias: Array1<f64>,
}

/// Per-timestep activations kept for the backward pass.
pub(crate) struct StepCache {
    x: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    c: Array1<f64>,
    tanh_c: Array1<f64>,
}

/// Forward cache for one direction over one sequence.
pub(crate) struct CellCache {
    steps: Vec<StepCache>,
    /// Hidden states `h_0..h_{n-1}` in processing order.
    pub hs: Vec<Array1<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmCell {
    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let limit_ih = (6.0 / (input + hidden) as f64).sqrt();
        let limit_hh = (6.0 / (2 * hidden) as f64).sqrt();
        LstmCell {
            w_ih: Array2::from_shape_fn((4 * hidden, input), |_| {
                rng.random_range(-limit_ih..limit_ih)
            }),
            w_hh: Array2::from_shape_fn((4 * hidden, hidden), |_| {
                rng.random_range(-limit_hh..limit_hh)
            }),
            bias: Array1::zeros(4 * hidden),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hh.ncols()
    }

    /// Runs the cell over `xs` in the given order, starting from zero states.
    pub(crate) fn forward(&self, xs: &[Array1<f64>]) -> CellCache {
        let hidden = self.hidden_size();
        let mut h_prev = Array1::zeros(hidden);
        let mut c_prev: Array1<f64> = Array1::zeros(hidden);
        let mut steps = Vec::with_capacity(xs.len());
        let mut hs = Vec::with_capacity(xs.len());

        for x in xs {
            let mut pre = self.w_ih.dot(x);
            pre += &self.w_hh.dot(&h_prev);
            pre += &self.bias;

            let i = pre.slice(ndarray::s![0..hidden]).mapv(sigmoid);
            let f = pre.slice(ndarray::s![hidden..2 * hidden]).mapv(sigmoid);
            let g = pre.slice(ndarray::s![2 * hidden..3 * hidden]).mapv(f64::tanh);
            let o = pre.slice(ndarray::s![3 * hidden..4 * hidden]).mapv(sigmoid);

            let c = &f * &c_prev + &i * &g;
            let tanh_c = c.mapv(f64::tanh);
            let h = &o * &tanh_c;

            steps.push(StepCache {
                x: x.clone(),
                i,
                f,
                g,
                o,
                c: c_prev.clone(),
                tanh_c,
            });
            hs.push(h.clone());
            h_prev = h;
            c_prev = c;
        }
        CellCache { steps, hs }
    }

    /// Backpropagates `dhs` (gradient of the loss in each hidden state, in
    /// processing order) through the cached forward pass. Accumulates weight
    /// gradients into `grads` and returns the input gradients.
    pub(crate) fn backward(
        &self,
        cache: &CellCache,
        dhs: &[Array1<f64>],
        grads: &mut LstmCell,
    ) -> Vec<Array1<f64>> {
        let hidden = self.hidden_size();
        let n = cache.steps.len();
        assert_eq!(dhs.len(), n);

        let mut dxs = vec![Array1::zeros(self.w_ih.ncols()); n];
        let mut dh_carry: Array1<f64> = Array1::zeros(hidden);
        let mut dc_carry: Array1<f64> = Array1::zeros(hidden);

        for t in (0..n).rev() {
            let step = &cache.steps[t];
            let dh = &dhs[t] + &dh_carry;

            let d_o = &dh * &step.tanh_c;
            let mut dc = &dh * &step.o;
            dc.zip_mut_with(&step.tanh_c, |d, &tc| *d *= 1.0 - tc * tc);
            dc += &dc_carry;

            let di = &dc * &step.g;
            let dg = &dc * &step.i;
            // step.c holds c_{t-1}.
            let df = &dc * &step.c;
            dc_carry = &dc * &step.f;

            // Pre-activation gradients, stacked in gate order.
            let mut dpre = Array1::zeros(4 * hidden);
            for k in 0..hidden {
                dpre[k] = di[k] * step.i[k] * (1.0 - step.i[k]);
                dpre[hidden + k] = df[k] * step.f[k] * (1.0 - step.f[k]);
                dpre[2 * hidden + k] = dg[k] * (1.0 - step.g[k] * step.g[k]);
                dpre[3 * hidden + k] = d_o[k] * step.o[k] * (1.0 - step.o[k]);
            }

            let h_prev = if t == 0 {
                Array1::zeros(hidden)
            } else {
                cache.hs[t - 1].clone()
            };

            let dpre2 = dpre.view().insert_axis(Axis(1));
            general_mat_mul(
                1.0,
                &dpre2,
                &step.x.view().insert_axis(Axis(0)),
                1.0,
                &mut grads.w_ih,
            );
            general_mat_mul(
                1.0,
                &dpre2,
                &h_prev.view().insert_axis(Axis(0)),
                1.0,
                &mut grads.w_hh,
            );
            grads.bias += &dpre;

            dxs[t] = self.w_ih.t().dot(&dpre);
            dh_carry = self.w_hh.t().dot(&dpre);
        }
        dxs
    }
}
