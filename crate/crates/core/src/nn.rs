//! Single-hidden-layer tanh regression network with min-max scaling.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::propeller::DatasetRow;

pub const DEFAULT_HIDDEN: usize = 15;
/// Fewest rows accepted by [`train_mlp`].
pub const MIN_ROWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("dataset has {0} rows, need at least 100")]
    TooFewRows(usize),
    #[error("dataset contains a non-finite value at row {0}")]
    NonFinite(usize),
    #[error("input feature {0} is constant")]
    DegenerateNormalization(usize),
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    /// Hidden weights, row-major `n_hidden x n_in`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Output weights, row-major `n_out x n_hidden`.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub in_min: Vec<f64>,
    pub in_max: Vec<f64>,
    pub out_min: Vec<f64>,
    pub out_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub outputs: Vec<f64>,
    /// Some input was outside the training box and was clamped.
    pub clamped: bool,
}

impl MlpModel {
    pub fn validate(&self) -> Result<(), NnError> {
        let (i, h, o) = (self.n_in, self.n_hidden, self.n_out);
        if i == 0 || h == 0 || o == 0 {
            return Err(NnError::Shape("layer sizes must be non-zero"));
        }
        if self.w1.len() != h * i || self.b1.len() != h || self.w2.len() != o * h || self.b2.len() != o {
            return Err(NnError::Shape("weight arrays do not match layer sizes"));
        }
        if self.in_min.len() != i || self.in_max.len() != i || self.out_min.len() != o || self.out_max.len() != o {
            return Err(NnError::Shape("normalization arrays do not match layer sizes"));
        }
        let all = self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2);
        if all.chain(&self.in_min).chain(&self.in_max).chain(&self.out_min).chain(&self.out_max).any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite(0));
        }
        for k in 0..i {
            if !(self.in_max[k] > self.in_min[k]) {
                return Err(NnError::DegenerateNormalization(k));
            }
        }
        Ok(())
    }

    fn forward_normalized(&self, x: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        for j in 0..self.n_hidden {
            let row = &self.w1[j * self.n_in..(j + 1) * self.n_in];
            let z: f64 = self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            hidden[j] = tanh(z);
        }
        for k in 0..self.n_out {
            let row = &self.w2[k * self.n_hidden..(k + 1) * self.n_hidden];
            out[k] = self.b2[k] + row.iter().zip(hidden.iter()).map(|(w, h)| w * h).sum::<f64>();
        }
    }

    /// Output in normalized units for an already-normalized input.
    pub fn predict_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n_hidden];
        let mut o = vec![0.0; self.n_out];
        self.forward_normalized(x, &mut h, &mut o);
        o
    }

    /// Physical-unit prediction; inputs are clamped to the training box.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let mut clamped = false;
        let xn: Vec<f64> = (0..self.n_in)
            .map(|k| {
                let v = x[k].clamp(self.in_min[k], self.in_max[k]);
                clamped |= v != x[k];
                (v - self.in_min[k]) / (self.in_max[k] - self.in_min[k])
            })
            .collect();
        if clamped {
            log::warn!("network input {x:?} outside training range; clamped");
        }
        let on = self.predict_normalized(&xn);
        let outputs = (0..self.n_out).map(|k| self.out_min[k] + on[k] * (self.out_max[k] - self.out_min[k])).collect();
        Prediction { outputs, clamped }
    }
}

/// Row-major regression samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n_in: usize,
    pub n_out: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        Self { n_in, n_out, inputs: Vec::new(), targets: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) {
        self.inputs.extend_from_slice(&x[..self.n_in]);
        self.targets.extend_from_slice(&y[..self.n_out]);
    }

    pub fn len(&self) -> usize {
        self.inputs.len().checked_div(self.n_in).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.n_in..(i + 1) * self.n_in]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.n_out..(i + 1) * self.n_out]
    }
}

/// `[T, gamma] -> [omega]` samples from converged rows.
pub fn nn1_dataset(rows: &[DatasetRow]) -> Dataset {
    let mut d = Dataset::new(2, 1);
    for r in rows.iter().filter(|r| r.converged) {
        d.push(&[r.thrust, r.gamma], &[r.omega]);
    }
    d
}

/// `[T, tau] -> [gamma, omega]` samples from converged rows.
pub fn nn2_dataset(rows: &[DatasetRow]) -> Dataset {
    let mut d = Dataset::new(2, 2);
    for r in rows.iter().filter(|r| r.converged) {
        d.push(&[r.thrust, r.torque], &[r.gamma, r.omega]);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Weight-decay coefficient on the weights (not biases).
    pub l2: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            epochs: 60_000,
            learning_rate: 0.3,
            momentum: 0.9,
            l2: 1e-6,
            train_fraction: 0.7,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    /// Mean squared error on normalized targets.
    pub train_mse: f64,
    pub test_mse: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub epochs: usize,
}

fn column_range(values: &[f64], stride: usize, k: usize) -> (f64, f64) {
    values.iter().skip(k).step_by(stride).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

/// `tanh` through one `exp`; faster than the libm routine in training loops.
fn tanh(z: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * z).exp() + 1.0)
}

/// Standard normal draw by Box-Muller.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

/// Full-batch gradient descent with momentum and L2 weight decay.
pub fn train_mlp(data: &Dataset, cfg: &TrainConfig) -> Result<(MlpModel, TrainReport), NnError> {
    let n = data.len();
    let (ni, no, nh) = (data.n_in, data.n_out, cfg.hidden);
    if ni == 0 || no == 0 || nh == 0 {
        return Err(NnError::Shape("layer sizes must be non-zero"));
    }
    if data.inputs.len() != n * ni || data.targets.len() != n * no {
        return Err(NnError::Shape("ragged dataset"));
    }
    if n < MIN_ROWS {
        return Err(NnError::TooFewRows(n));
    }
    for i in 0..n {
        if data.input(i).iter().chain(data.target(i)).any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite(i));
        }
    }

    let (mut in_min, mut in_max) = (vec![0.0; ni], vec![0.0; ni]);
    for k in 0..ni {
        let (lo, hi) = column_range(&data.inputs, ni, k);
        if !(hi > lo) {
            return Err(NnError::DegenerateNormalization(k));
        }
        in_min[k] = lo;
        in_max[k] = hi;
    }
    let (mut out_min, mut out_max) = (vec![0.0; no], vec![0.0; no]);
    let mut active = vec![true; no];
    for k in 0..no {
        let (lo, hi) = column_range(&data.targets, no, k);
        out_min[k] = lo;
        out_max[k] = hi;
        active[k] = hi > lo;
    }

    let xn: Vec<f64> = (0..n * ni).map(|j| (data.inputs[j] - in_min[j % ni]) / (in_max[j % ni] - in_min[j % ni])).collect();
    let yn: Vec<f64> = (0..n * no)
        .map(|j| {
            let k = j % no;
            if active[k] {
                (data.targets[j] - out_min[k]) / (out_max[k] - out_min[k])
            } else {
                0.0
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let n_train = ((n as f64) * cfg.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, n);
    let (train_idx, test_idx) = order.split_at(n_train);

    let s1 = 1.0 / (ni as f64).sqrt();
    let s2 = 1.0 / (nh as f64).sqrt();
    let mut model = MlpModel {
        n_in: ni,
        n_hidden: nh,
        n_out: no,
        w1: (0..nh * ni).map(|_| s1 * normal(&mut rng)).collect(),
        b1: vec![0.0; nh],
        w2: (0..no * nh).map(|_| s2 * normal(&mut rng)).collect(),
        b2: vec![0.0; no],
        in_min,
        in_max,
        out_min,
        out_max,
    };
    for k in (0..no).filter(|k| !active[*k]) {
        model.w2[k * nh..(k + 1) * nh].iter_mut().for_each(|w| *w = 0.0);
    }

    let mut vw1 = vec![0.0; nh * ni];
    let mut vb1 = vec![0.0; nh];
    let mut vw2 = vec![0.0; no * nh];
    let mut vb2 = vec![0.0; no];
    let mut gw1 = vec![0.0; nh * ni];
    let mut gb1 = vec![0.0; nh];
    let mut gw2 = vec![0.0; no * nh];
    let mut gb2 = vec![0.0; no];
    let mut hidden = vec![0.0; nh];
    let mut out = vec![0.0; no];
    let mut delta_h = vec![0.0; nh];
    let scale = 2.0 / (n_train * no) as f64;

    for _ in 0..cfg.epochs {
        gw1.iter_mut().for_each(|g| *g = 0.0);
        gb1.iter_mut().for_each(|g| *g = 0.0);
        gw2.iter_mut().for_each(|g| *g = 0.0);
        gb2.iter_mut().for_each(|g| *g = 0.0);
        for &i in train_idx {
            let x = &xn[i * ni..(i + 1) * ni];
            model.forward_normalized(x, &mut hidden, &mut out);
            delta_h.iter_mut().for_each(|d| *d = 0.0);
            for k in 0..no {
                if !active[k] {
                    continue;
                }
                let err = scale * (out[k] - yn[i * no + k]);
                gb2[k] += err;
                for j in 0..nh {
                    gw2[k * nh + j] += err * hidden[j];
                    delta_h[j] += err * model.w2[k * nh + j];
                }
            }
            for j in 0..nh {
                let d = delta_h[j] * (1.0 - hidden[j] * hidden[j]);
                gb1[j] += d;
                for m in 0..ni {
                    gw1[j * ni + m] += d * x[m];
                }
            }
        }
        let decay = 2.0 * cfg.l2;
        let (lr, mu) = (cfg.learning_rate, cfg.momentum);
        for (j, w) in model.w1.iter_mut().enumerate() {
            vw1[j] = mu * vw1[j] - lr * (gw1[j] + decay * *w);
            *w += vw1[j];
        }
        for (j, b) in model.b1.iter_mut().enumerate() {
            vb1[j] = mu * vb1[j] - lr * gb1[j];
            *b += vb1[j];
        }
        for k in (0..no).filter(|k| active[*k]) {
            for j in 0..nh {
                let idx = k * nh + j;
                vw2[idx] = mu * vw2[idx] - lr * (gw2[idx] + decay * model.w2[idx]);
                model.w2[idx] += vw2[idx];
            }
            vb2[k] = mu * vb2[k] - lr * gb2[k];
            model.b2[k] += vb2[k];
        }
    }

    let mse = |idx: &[usize]| -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let mut s = 0.0;
        for &i in idx {
            let o = model.predict_normalized(&xn[i * ni..(i + 1) * ni]);
            for k in 0..no {
                s += (o[k] - yn[i * no + k]).powi(2);
            }
        }
        s / (idx.len() * no) as f64
    };
    let report = TrainReport {
        train_mse: mse(train_idx),
        test_mse: mse(test_idx),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        epochs: cfg.epochs,
    };
    if !report.train_mse.is_finite() {
        return Err(NnError::NonFinite(0));
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize) -> Dataset {
        let mut d = Dataset::new(2, 1);
        for i in 0..n {
            let a = i as f64 / n as f64;
            let b = ((i * 7) % n) as f64 / n as f64;
            d.push(&[a, b], &[a * a + 0.5 * b]);
        }
        d
    }

    #[test]
    fn constant_target_is_exact() {
        let mut d = synthetic(120);
        d.targets.iter_mut().for_each(|t| *t = 4.2);
        let (m, r) = train_mlp(&d, &TrainConfig { epochs: 50, ..Default::default() }).unwrap();
        assert_eq!(r.train_mse, 0.0);
        assert_eq!(r.test_mse, 0.0);
        assert_eq!(m.predict(&[0.3, 0.4]).outputs[0], 4.2);
    }

    #[test]
    fn rejects_bad_data() {
        assert_eq!(train_mlp(&synthetic(50), &TrainConfig::default()).unwrap_err(), NnError::TooFewRows(50));
        let mut d = synthetic(120);
        d.inputs[7] = f64::NAN;
        assert!(matches!(train_mlp(&d, &TrainConfig::default()), Err(NnError::NonFinite(3))));
        let mut d = synthetic(120);
        for i in 0..120 {
            d.inputs[2 * i + 1] = 1.0;
        }
        assert_eq!(train_mlp(&d, &TrainConfig::default()).unwrap_err(), NnError::DegenerateNormalization(1));
    }

    #[test]
    fn deterministic_given_seed() {
        let d = synthetic(150);
        let cfg = TrainConfig { epochs: 200, ..Default::default() };
        let (a, ra) = train_mlp(&d, &cfg).unwrap();
        let (b, rb) = train_mlp(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        let (c, _) = train_mlp(&d, &TrainConfig { seed: 99, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fits_smooth_function() {
        let d = synthetic(200);
        let (m, r) = train_mlp(&d, &TrainConfig { epochs: 5000, ..Default::default() }).unwrap();
        assert!(r.test_mse < 1e-3, "{r:?}");
        let rmse = r.train_mse.sqrt() * (m.out_max[0] - m.out_min[0]);
        let p = m.predict(d.input(10)).outputs[0];
        assert!((p - d.target(10)[0]).abs() <= 3.0 * rmse.max(1e-3));
    }

    #[test]
    fn inputs_clamped_to_box() {
        let d = synthetic(150);
        let (m, _) = train_mlp(&d, &TrainConfig { epochs: 10, ..Default::default() }).unwrap();
        let inside = m.predict(&[m.in_max[0], 0.5]);
        let outside = m.predict(&[m.in_max[0] + 10.0, 0.5]);
        assert!(!inside.clamped && outside.clamped);
        assert_eq!(inside.outputs, outside.outputs);
        assert!(m.validate().is_ok());
    }
}
