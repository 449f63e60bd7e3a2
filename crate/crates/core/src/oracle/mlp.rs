use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Cursor, Model, ParamBlock, ParamGroup};
use crate::qmodels::{squash_backward, squash_forward, ActorSample, Policy, QFunction};

/// Fully connected network with tanh hidden layers and a linear output.
///
/// Layer `k` maps `dims[k]` to `dims[k + 1]` with row-major
/// `dims[k] × dims[k + 1]` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Parameter and input gradients of `dout · f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

impl Mlp {
    pub fn new(dims: Vec<usize>, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self {
            dims,
            weights,
            biases,
        };
        m.check()?;
        Ok(m)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let weights = dims.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = dims.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Self::new(dims.to_vec(), weights, biases)
    }

    /// Normal weights with standard deviation `1/sqrt(fan_in)`, zero biases.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        for (k, w) in m.weights.iter_mut().enumerate() {
            let normal =
                Normal::new(0.0, 1.0 / (dims[k].max(1) as f64).sqrt()).expect("finite scale");
            w.iter_mut().for_each(|v| *v = normal.sample(rng));
        }
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let layers = self.dims.len().saturating_sub(1);
        let ok = self.dims.len() >= 2
            && self.weights.len() == layers
            && self.biases.len() == layers
            && (0..layers).all(|k| {
                self.weights[k].len() == self.dims[k] * self.dims[k + 1]
                    && self.biases[k].len() == self.dims[k + 1]
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Size(format!(
                "MLP parameters do not match dims {:?}",
                self.dims
            )))
        }
    }

    pub fn in_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    fn layer(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let out = self.dims[k + 1];
        let mut z = self.biases[k].clone();
        for (xi, row) in x.iter().zip(self.weights[k].chunks_exact(out)) {
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += w * xi;
            }
        }
        if k + 2 < self.dims.len() {
            z.iter_mut().for_each(|v| *v = v.tanh());
        }
        z
    }

    fn trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.in_dim() {
            return Err(Error::Size(format!(
                "MLP expects {} inputs, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        let mut acts = vec![x.to_vec()];
        for k in 0..self.weights.len() {
            let next = self.layer(k, acts.last().expect("non-empty"));
            acts.push(next);
        }
        Ok(acts)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(x)?.pop().expect("non-empty"))
    }

    pub fn backward(&self, x: &[f64], dout: &[f64]) -> Result<MlpGrads> {
        if dout.len() != self.out_dim() {
            return Err(Error::Size(format!(
                "expected {} output grads, got {}",
                self.out_dim(),
                dout.len()
            )));
        }
        let acts = self.trace(x)?;
        let layers = self.weights.len();
        let mut dw: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut db: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut delta = dout.to_vec();
        for k in (0..layers).rev() {
            if k + 1 < layers {
                // acts[k + 1] is a tanh output.
                for (d, a) in delta.iter_mut().zip(&acts[k + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let out = self.dims[k + 1];
            let input = &acts[k];
            let mut d_in = vec![0.0; self.dims[k]];
            let rows = self.weights[k]
                .chunks_exact(out)
                .zip(dw[k].chunks_exact_mut(out));
            for ((xi, di), (row, drow)) in input.iter().zip(d_in.iter_mut()).zip(rows) {
                for (dr, d) in drow.iter_mut().zip(&delta) {
                    *dr = xi * d;
                }
                *di = dot(row, &delta);
            }
            db[k].copy_from_slice(&delta);
            delta = d_in;
        }
        let mut params = Vec::with_capacity(self.num_params());
        for (w, b) in dw.iter().zip(&db) {
            params.extend_from_slice(w);
            params.extend_from_slice(b);
        }
        Ok(MlpGrads {
            params,
            input: delta,
        })
    }
}

/// Four-way split accumulation so the reduction can use SIMD lanes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

pub fn mlp_forward(m: &Mlp, x: &[f64]) -> Result<Vec<f64>> {
    m.forward(x)
}

pub fn mlp_grads(m: &Mlp, x: &[f64], dout: &[f64]) -> Result<MlpGrads> {
    m.backward(x, dout)
}

impl Model for Mlp {
    fn layout(&self) -> Vec<ParamBlock> {
        let len = self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>();
        vec![ParamBlock {
            group: ParamGroup::Weights,
            len,
        }]
    }

    fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    fn set_params(&mut self, flat: &[f64]) {
        let mut c = Cursor::new(flat);
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            c.fill(w);
            c.fill(b);
        }
    }
}

/// Classical Q-function baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpQ {
    pub mlp: Mlp,
}

impl MlpQ {
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: &[usize],
        num_actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(num_actions);
        Ok(Self {
            mlp: Mlp::random(&dims, rng)?,
        })
    }
}

impl Model for MlpQ {
    fn layout(&self) -> Vec<ParamBlock> {
        self.mlp.layout()
    }
    fn params(&self) -> Vec<f64> {
        self.mlp.params()
    }
    fn set_params(&mut self, flat: &[f64]) {
        self.mlp.set_params(flat)
    }
}

impl QFunction for MlpQ {
    fn in_dim(&self) -> usize {
        self.mlp.in_dim()
    }
    fn num_outputs(&self) -> usize {
        self.mlp.out_dim()
    }
    fn q_values(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.mlp.forward(s)
    }
    fn backward(&self, s: &[f64], dq: &[f64]) -> Result<Vec<f64>> {
        Ok(self.mlp.backward(s, dq)?.params)
    }
}

/// Classical squashed-Gaussian policy: the MLP output is the Gaussian mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpActor {
    pub mlp: Mlp,
    pub log_std: Vec<f64>,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
}

impl MlpActor {
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: &[usize],
        action_low: Vec<f64>,
        action_high: Vec<f64>,
        initial_log_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if action_low.len() != action_high.len()
            || action_low.iter().zip(&action_high).any(|(l, h)| !(l < h))
        {
            return Err(Error::Size("invalid action bounds".into()));
        }
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(action_low.len());
        let mut mlp = Mlp::random(&dims, rng)?;
        // Start near the box centre.
        if let Some(w) = mlp.weights.last_mut() {
            w.iter_mut().for_each(|v| *v *= 0.1);
        }
        let log_std = vec![initial_log_std; action_low.len()];
        Ok(Self {
            mlp,
            log_std,
            action_low,
            action_high,
        })
    }

    fn check_noise(&self, noise: Option<&[f64]>) -> Result<()> {
        match noise {
            Some(n) if n.len() != self.log_std.len() => {
                Err(Error::Size("noise length mismatch".into()))
            }
            _ => Ok(()),
        }
    }
}

impl Model for MlpActor {
    fn layout(&self) -> Vec<ParamBlock> {
        let mut l = self.mlp.layout();
        l.push(ParamBlock {
            group: ParamGroup::LogStd,
            len: self.log_std.len(),
        });
        l
    }
    fn params(&self) -> Vec<f64> {
        let mut p = self.mlp.params();
        p.extend_from_slice(&self.log_std);
        p
    }
    fn set_params(&mut self, flat: &[f64]) {
        let n = self.mlp.num_params();
        self.mlp.set_params(&flat[..n]);
        let d = self.log_std.len();
        self.log_std.copy_from_slice(&flat[n..n + d]);
    }
}

impl Policy for MlpActor {
    fn in_dim(&self) -> usize {
        self.mlp.in_dim()
    }

    fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    fn sample(&self, s: &[f64], noise: Option<&[f64]>) -> Result<ActorSample> {
        self.check_noise(noise)?;
        let mean = self.mlp.forward(s)?;
        Ok(squash_forward(
            &mean,
            &self.log_std,
            noise,
            &self.action_low,
            &self.action_high,
        ))
    }

    fn backward(
        &self,
        s: &[f64],
        noise: Option<&[f64]>,
        d_action: &[f64],
        d_log_prob: f64,
    ) -> Result<Vec<f64>> {
        self.check_noise(noise)?;
        if d_action.len() != self.action_dim() {
            return Err(Error::Size("d_action length mismatch".into()));
        }
        let sample = self.sample(s, noise)?;
        let (d_mean, d_log_std) = squash_backward(
            &sample,
            &self.log_std,
            noise,
            &self.action_low,
            &self.action_high,
            d_action,
            d_log_prob,
        );
        let mut out = self.mlp.backward(s, &d_mean)?.params;
        out.extend_from_slice(&d_log_std);
        Ok(out)
    }

    fn log_prob_of(&self, s: &[f64], action: &[f64]) -> Result<f64> {
        if action.len() != self.action_dim() {
            return Err(Error::Size("action length mismatch".into()));
        }
        let mean = self.mlp.forward(s)?;
        Ok(crate::qmodels::squash_log_prob(
            &mean,
            &self.log_std,
            action,
            &self.action_low,
            &self.action_high,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_output_final_bias() {
        let mut m = Mlp::zeros(&[3, 4, 2]).unwrap();
        m.biases[1] = vec![0.25, -1.5];
        m.biases[0] = vec![9.0; 4];
        assert_eq!(m.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.25, -1.5]);
    }

    #[test]
    fn single_layer_is_affine() {
        let m = Mlp::new(
            vec![2, 2],
            vec![vec![1.0, 2.0, 3.0, 4.0]],
            vec![vec![0.5, -0.5]],
        )
        .unwrap();
        // Row-major in x out: z_j = sum_i x_i W[i][j] + b_j.
        assert_eq!(m.forward(&[1.0, 1.0]).unwrap(), vec![4.5, 5.5]);
        assert_eq!(m.forward(&[2.0, 0.0]).unwrap(), vec![2.5, 3.5]);
    }

    #[test]
    fn shape_errors() {
        assert!(Mlp::new(vec![2, 2], vec![vec![0.0; 3]], vec![vec![0.0; 2]]).is_err());
        assert!(Mlp::zeros(&[2]).is_err());
        let m = Mlp::zeros(&[2, 1]).unwrap();
        assert!(m.forward(&[1.0]).is_err());
        assert!(m.backward(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn params_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a =
            MlpActor::random(3, &[4], vec![-1.0, -2.0], vec![1.0, 2.0], -0.5, &mut rng).unwrap();
        let p: Vec<f64> = (0..a.num_params()).map(|i| i as f64 * 0.01).collect();
        a.set_params(&p);
        assert_eq!(a.params(), p);
    }
}
