//! Stacked LSTM regressor with a single linear output unit.
//!
//! Parameters live in one flat buffer so the optimizer and the gradient
//! accumulator can treat them uniformly. Per layer the layout is the input
//! kernel `W` (`4H x in`, row-major), the recurrent kernel `U` (`4H x H`) and
//! the bias `b` (`4H`); gate rows are ordered input, forget, candidate,
//! output. The dense head (`w_out`, `b_out`) comes last.

mod adam;
mod io;
mod train;

pub use adam::{adam_step, AdamState};
pub use train::{
    predict, predict_normalized, train, EarlyStopping, EpochStats, TrainConfig, TrainedModel,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layer widths used by the reference architecture.
pub const DEFAULT_SIZES: [usize; 2] = [400, 800];

#[derive(Debug, Clone, Copy)]
struct LayerLayout {
    input: usize,
    units: usize,
    w: usize,
    u: usize,
    b: usize,
}

impl LayerLayout {
    fn w_len(&self) -> usize {
        4 * self.units * self.input
    }

    fn u_len(&self) -> usize {
        4 * self.units * self.units
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    input_dim: usize,
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Total parameter count for the given input width and layer sizes.
pub fn parameter_count(input_dim: usize, sizes: &[usize]) -> usize {
    let mut input = input_dim;
    let mut total = 0;
    for &units in sizes {
        total += 4 * (input * units + units * units + units);
        input = units;
    }
    total + input + 1
}

fn layouts(input_dim: usize, sizes: &[usize]) -> Vec<LayerLayout> {
    let mut input = input_dim;
    let mut offset = 0;
    sizes
        .iter()
        .map(|&units| {
            let w = offset;
            let u = w + 4 * units * input;
            let b = u + 4 * units * units;
            offset = b + 4 * units;
            let l = LayerLayout { input, units, w, u, b };
            input = units;
            l
        })
        .collect()
}

/// Glorot-uniform kernels, forget-gate biases of 1, other biases 0.
pub fn init_network(input_dim: usize, sizes: &[usize], seed: u64) -> Result<Network> {
    if input_dim == 0 || sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "invalid network shape: input {input_dim}, layers {sizes:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = vec![0.0; parameter_count(input_dim, sizes)];
    let lays = layouts(input_dim, sizes);
    for l in &lays {
        let limit = (6.0 / (l.input + 4 * l.units) as f64).sqrt();
        for p in &mut params[l.w..l.w + l.w_len()] {
            *p = rng.gen_range(-limit..limit);
        }
        let limit = (6.0 / (l.units + 4 * l.units) as f64).sqrt();
        for p in &mut params[l.u..l.u + l.u_len()] {
            *p = rng.gen_range(-limit..limit);
        }
        for p in &mut params[l.b + l.units..l.b + 2 * l.units] {
            *p = 1.0;
        }
    }
    let last = *sizes.last().unwrap();
    let dense = params.len() - last - 1;
    let limit = (6.0 / (last + 1) as f64).sqrt();
    for p in &mut params[dense..dense + last] {
        *p = rng.gen_range(-limit..limit);
    }
    Ok(Network {
        input_dim,
        sizes: sizes.to_vec(),
        params,
    })
}

/// Activations recorded by [`Network::forward`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    steps: usize,
    window: Vec<f64>,
    layers: Vec<LayerCache>,
}

#[derive(Debug, Clone)]
struct LayerCache {
    /// Post-activation gates per step, `4H` each: i, f, g, o.
    gates: Vec<f64>,
    cell: Vec<f64>,
    cell_tanh: Vec<f64>,
    hidden: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn from_parts(input_dim: usize, sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if input_dim == 0 || sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidArgument("invalid network shape".into()));
        }
        let expected = parameter_count(input_dim, &sizes);
        if params.len() != expected {
            return Err(Error::Shape(format!(
                "{} parameters for a network needing {expected}",
                params.len()
            )));
        }
        Ok(Network {
            input_dim,
            sizes,
            params,
        })
    }

    fn dense_offset(&self) -> usize {
        self.params.len() - self.sizes.last().unwrap() - 1
    }

    /// Dense output weights followed by the output bias.
    pub fn dense(&self) -> &[f64] {
        &self.params[self.dense_offset()..]
    }

    /// Bias slice of the forget gate for layer `layer`.
    pub fn forget_bias(&self, layer: usize) -> &[f64] {
        let l = layouts(self.input_dim, &self.sizes)[layer];
        &self.params[l.b + l.units..l.b + 2 * l.units]
    }

    /// Runs a `k x F` window (row-major, oldest day first) through the stack.
    pub fn forward(&self, window: &[f64]) -> Result<(f64, ForwardCache)> {
        let f = self.input_dim;
        if window.is_empty() || !window.len().is_multiple_of(f) {
            return Err(Error::Shape(format!(
                "window of {} values does not divide into rows of {f}",
                window.len()
            )));
        }
        let steps = window.len() / f;
        let mut layers: Vec<LayerCache> = Vec::with_capacity(self.sizes.len());
        for l in layouts(self.input_dim, &self.sizes) {
            let h = l.units;
            let mut cache = LayerCache {
                gates: vec![0.0; steps * 4 * h],
                cell: vec![0.0; steps * h],
                cell_tanh: vec![0.0; steps * h],
                hidden: vec![0.0; steps * h],
            };
            let w = &self.params[l.w..l.w + l.w_len()];
            let u = &self.params[l.u..l.u + l.u_len()];
            let b = &self.params[l.b..l.b + 4 * h];
            let inputs: &[f64] = match layers.last() {
                Some(prev) => &prev.hidden,
                None => window,
            };
            for t in 0..steps {
                let x = &inputs[t * l.input..(t + 1) * l.input];
                let z = &mut cache.gates[t * 4 * h..(t + 1) * 4 * h];
                for r in 0..4 * h {
                    z[r] = b[r] + dot(&w[r * l.input..(r + 1) * l.input], x);
                }
                // zero initial state: the recurrent term vanishes at t = 0
                if t > 0 {
                    let h_prev = &cache.hidden[(t - 1) * h..t * h];
                    for r in 0..4 * h {
                        z[r] += dot(&u[r * h..(r + 1) * h], h_prev);
                    }
                }
                for r in 0..h {
                    z[r] = sigmoid(z[r]);
                    z[h + r] = sigmoid(z[h + r]);
                    z[2 * h + r] = z[2 * h + r].tanh();
                    z[3 * h + r] = sigmoid(z[3 * h + r]);
                }
                for r in 0..h {
                    let c_prev = if t > 0 { cache.cell[(t - 1) * h + r] } else { 0.0 };
                    let c = z[h + r] * c_prev + z[r] * z[2 * h + r];
                    let tc = c.tanh();
                    cache.cell[t * h + r] = c;
                    cache.cell_tanh[t * h + r] = tc;
                    cache.hidden[t * h + r] = z[3 * h + r] * tc;
                }
            }
            layers.push(cache);
        }
        let top = layers.last().unwrap();
        let h = *self.sizes.last().unwrap();
        let dense = self.dense();
        let prediction = dot(&dense[..h], &top.hidden[(steps - 1) * h..]) + dense[h];
        Ok((
            prediction,
            ForwardCache {
                steps,
                window: window.to_vec(),
                layers,
            },
        ))
    }

    pub fn predict_one(&self, window: &[f64]) -> Result<f64> {
        self.forward(window).map(|(p, _)| p)
    }

    /// Adds `d_prediction * ∂prediction/∂θ` into `grads` (same layout as the
    /// parameters) by backpropagation through time.
    pub fn backward(&self, cache: &ForwardCache, d_prediction: f64, grads: &mut [f64]) -> Result<()> {
        if grads.len() != self.params.len()
            || cache.layers.len() != self.sizes.len()
            || cache.window.len() != cache.steps * self.input_dim
            || cache
                .layers
                .iter()
                .zip(&self.sizes)
                .any(|(c, &h)| c.hidden.len() != cache.steps * h)
        {
            return Err(Error::Shape("gradient buffer or cache does not match network".into()));
        }
        if d_prediction == 0.0 {
            return Ok(());
        }
        let steps = cache.steps;
        let lays = layouts(self.input_dim, &self.sizes);
        let top_units = *self.sizes.last().unwrap();
        let dense_at = self.dense_offset();
        let top_hidden = &cache.layers.last().unwrap().hidden;
        axpy(
            d_prediction,
            &top_hidden[(steps - 1) * top_units..],
            &mut grads[dense_at..dense_at + top_units],
        );
        grads[dense_at + top_units] += d_prediction;

        // gradient flowing into each step's hidden output from above
        let mut dh_above = vec![0.0; steps * top_units];
        axpy(
            d_prediction,
            &self.params[dense_at..dense_at + top_units],
            &mut dh_above[(steps - 1) * top_units..],
        );

        for (li, l) in lays.iter().enumerate().rev() {
            let h = l.units;
            let lc = &cache.layers[li];
            let inputs: &[f64] = if li == 0 { &cache.window } else { &cache.layers[li - 1].hidden };
            let mut dx = if li > 0 { vec![0.0; steps * l.input] } else { Vec::new() };
            let mut dh_rec = vec![0.0; h];
            let mut dc_next = vec![0.0; h];
            let mut dz = vec![0.0; 4 * h];
            for t in (0..steps).rev() {
                let g = &lc.gates[t * 4 * h..(t + 1) * 4 * h];
                for r in 0..h {
                    let dh = dh_above[t * h + r] + dh_rec[r];
                    let (gi, gf, gg, go) = (g[r], g[h + r], g[2 * h + r], g[3 * h + r]);
                    let tc = lc.cell_tanh[t * h + r];
                    let dc = dc_next[r] + dh * go * (1.0 - tc * tc);
                    let c_prev = if t > 0 { lc.cell[(t - 1) * h + r] } else { 0.0 };
                    dz[r] = dc * gg * gi * (1.0 - gi);
                    dz[h + r] = dc * c_prev * gf * (1.0 - gf);
                    dz[2 * h + r] = dc * gi * (1.0 - gg * gg);
                    dz[3 * h + r] = dh * tc * go * (1.0 - go);
                    dc_next[r] = dc * gf;
                }
                let x = &inputs[t * l.input..(t + 1) * l.input];
                for r in 0..4 * h {
                    let d = dz[r];
                    grads[l.b + r] += d;
                    if d != 0.0 {
                        let row = l.w + r * l.input;
                        axpy(d, x, &mut grads[row..row + l.input]);
                    }
                }
                if li > 0 {
                    let dxt = &mut dx[t * l.input..(t + 1) * l.input];
                    for r in 0..4 * h {
                        let row = l.w + r * l.input;
                        axpy(dz[r], &self.params[row..row + l.input], dxt);
                    }
                }
                dh_rec.iter_mut().for_each(|v| *v = 0.0);
                if t > 0 {
                    let h_prev = &lc.hidden[(t - 1) * h..t * h];
                    for r in 0..4 * h {
                        let d = dz[r];
                        if d == 0.0 {
                            continue;
                        }
                        let row = l.u + r * h;
                        axpy(d, h_prev, &mut grads[row..row + h]);
                        axpy(d, &self.params[row..row + h], &mut dh_rec);
                    }
                }
            }
            dh_above = dx;
        }
        Ok(())
    }
}
