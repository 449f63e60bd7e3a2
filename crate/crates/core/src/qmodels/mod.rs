//! Classical/quantum interface: encodings, the layered ansatz, and the
//! hybrid Q-network and actor built on top of it.
//!
//! Both hybrid models share one trunk: a linear encoder reduces the raw
//! state to one value per qubit, the values are L2-normalized, squashed by
//! `tanh` and loaded as rotation angles, and the ansatz output is read as
//! the per-qubit Pauli-Z expectations. Circuit gradients come from the
//! parameter-shift rule on both trainable and data slots; everything
//! classical is differentiated analytically.

mod actor;
mod qnet;

pub(crate) use actor::squash_log_prob;
pub use actor::{
    actor_forward, squash_backward, squash_forward, ActorSample, QuantumActor, SQUASH_EPS,
};
pub use qnet::{q_values, QNetwork};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Model;
use crate::qsim::{Circuit, Gate, Param, SlotKind, Statevector};

/// Norm below which [`encode_reduce`] falls back to the uniform vector.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Loads `values` directly as amplitudes, `c_i = L_i / ‖L‖₂`.
pub fn amplitude_encode(values: &[f64]) -> Result<Statevector> {
    if values.len() < 2 || !values.len().is_power_of_two() {
        return Err(Error::Size(format!(
            "length {} is not a power of two",
            values.len()
        )));
    }
    let norm = l2(values);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateInput(
            "amplitude vector has zero norm".into(),
        ));
    }
    Statevector::from_amplitudes(
        values
            .iter()
            .map(|v| Complex64::new(v / norm, 0.0))
            .collect(),
    )
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Affine map `z = Wᵀx + b` from `in_dim` inputs to `out_dim` outputs.
/// `weights` is row-major `in_dim × out_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEncoder {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearEncoder {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (in_dim.max(1) as f64).sqrt();
        let normal = Normal::new(0.0, scale).expect("finite scale");
        let weights = (0..in_dim * out_dim).map(|_| normal.sample(rng)).collect();
        let bias = (0..out_dim).map(|_| normal.sample(rng)).collect();
        Self {
            in_dim,
            out_dim,
            weights,
            bias,
        }
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.in_dim * self.out_dim || self.bias.len() != self.out_dim {
            return Err(Error::Size(
                "encoder weight shape does not match its dims".into(),
            ));
        }
        Ok(())
    }

    fn affine(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        if x.len() != self.in_dim {
            return Err(Error::Size(format!(
                "encoder expects {} inputs, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let mut z = self.bias.clone();
        for (i, xi) in x.iter().enumerate() {
            let row = &self.weights[i * self.out_dim..(i + 1) * self.out_dim];
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += w * xi;
            }
        }
        Ok(z)
    }
}

/// `y = normalize(Wᵀx + b)`, or the uniform unit vector when the affine
/// output vanishes.
pub fn encode_reduce(enc: &LinearEncoder, x: &[f64]) -> Result<Vec<f64>> {
    let z = enc.affine(x)?;
    Ok(normalize(z).0)
}

fn normalize(mut z: Vec<f64>) -> (Vec<f64>, f64) {
    let norm = l2(&z);
    if norm < DEGENERATE_NORM {
        let u = 1.0 / (z.len() as f64).sqrt();
        z.iter_mut().for_each(|v| *v = u);
        return (z, 0.0);
    }
    z.iter_mut().for_each(|v| *v /= norm);
    (z, norm)
}

/// Single-qubit rotation used to load data angles after the Hadamard layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataRotation {
    /// RX after H. `|+>` is an X eigenstate, so this loading is invisible to
    /// every Z readout; kept for structural fidelity.
    Rx,
    #[default]
    Ry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    pub num_layers: usize,
    #[serde(default)]
    pub data_rotation: DataRotation,
    /// One trainable angle per (layer, qubit) instead of one per layer.
    #[serde(default)]
    pub per_qubit_angles: bool,
}

impl AnsatzSpec {
    pub fn new(num_qubits: usize, num_layers: usize) -> Self {
        Self {
            num_qubits,
            num_layers,
            data_rotation: DataRotation::Ry,
            per_qubit_angles: false,
        }
    }

    pub fn num_trainable(&self) -> usize {
        if self.per_qubit_angles {
            self.num_layers * self.num_qubits
        } else {
            self.num_layers
        }
    }

    fn check(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_layers == 0 {
            return Err(Error::Size(
                "ansatz needs at least one qubit and one layer".into(),
            ));
        }
        Ok(())
    }
}

/// Hadamard layer, one data rotation per qubit, then `num_layers` blocks
/// of a nearest-neighbour CZ chain followed by RY on every qubit.
pub fn build_vqc(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.check()?;
    let n = spec.num_qubits;
    let mut circuit = Circuit::new(n, n, spec.num_trainable())?;
    for q in 0..n {
        circuit.push(Gate::h(q))?;
    }
    for q in 0..n {
        circuit.push(match spec.data_rotation {
            DataRotation::Rx => Gate::rx(q, Param::Data(q)),
            DataRotation::Ry => Gate::ry(q, Param::Data(q)),
        })?;
    }
    for g in 0..spec.num_layers {
        for q in 1..n {
            circuit.push(Gate::cz(q - 1, q))?;
        }
        for q in 0..n {
            let slot = if spec.per_qubit_angles { g * n + q } else { g };
            circuit.push(Gate::ry(q, Param::Trainable(slot)))?;
        }
    }
    Ok(circuit)
}

/// Intermediate values of one trunk evaluation, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct TrunkPass {
    pub(crate) y: Vec<f64>,
    pub(crate) norm: f64,
    pub(crate) data_angles: Vec<f64>,
    pub(crate) train_angles: Vec<f64>,
    pub(crate) z: Vec<f64>,
}

/// Encoder + ansatz shared by the Q-network and the actor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Trunk {
    pub(crate) encoder: LinearEncoder,
    pub(crate) ansatz: AnsatzSpec,
    pub(crate) theta: Vec<f64>,
}

impl Trunk {
    pub(crate) fn new(encoder: LinearEncoder, ansatz: AnsatzSpec, theta: Vec<f64>) -> Result<Self> {
        ansatz.check()?;
        encoder.check()?;
        if encoder.out_dim != ansatz.num_qubits {
            return Err(Error::Size(format!(
                "encoder output {} must equal qubit count {}",
                encoder.out_dim, ansatz.num_qubits
            )));
        }
        if theta.len() != ansatz.num_trainable() {
            return Err(Error::Size(format!(
                "expected {} trainable angles, got {}",
                ansatz.num_trainable(),
                theta.len()
            )));
        }
        Ok(Self {
            encoder,
            ansatz,
            theta,
        })
    }

    pub(crate) fn random_theta<R: Rng + ?Sized>(ansatz: &AnsatzSpec, rng: &mut R) -> Vec<f64> {
        let normal = Normal::new(0.0, 0.5).expect("finite scale");
        (0..ansatz.num_trainable())
            .map(|_| normal.sample(rng))
            .collect()
    }

    pub(crate) fn forward(&self, s: &[f64]) -> Result<TrunkPass> {
        let (y, norm) = normalize(self.encoder.affine(s)?);
        let data_angles: Vec<f64> = y.iter().map(|v| v.tanh()).collect();
        let train_angles: Vec<f64> = self.theta.iter().map(|t| t.tanh()).collect();
        let circuit = build_vqc(&self.ansatz)?;
        let z = circuit.run(&data_angles, &train_angles)?.z_expectations();
        Ok(TrunkPass {
            y,
            norm,
            data_angles,
            train_angles,
            z,
        })
    }

    /// Returns `(d_theta, d_encoder_weights, d_encoder_bias)` for an upstream
    /// gradient `dz` over the per-qubit expectations.
    pub(crate) fn backward(
        &self,
        s: &[f64],
        pass: &TrunkPass,
        dz: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n_in = self.encoder.in_dim;
        let m = self.encoder.out_dim;
        if dz.iter().all(|v| *v == 0.0) {
            return Ok((
                vec![0.0; self.theta.len()],
                vec![0.0; n_in * m],
                vec![0.0; m],
            ));
        }
        let circuit = build_vqc(&self.ansatz)?;
        let contract = |jac: Vec<Vec<f64>>| -> Vec<f64> {
            jac.iter()
                .map(|row| row.iter().zip(dz).map(|(j, d)| j * d).sum())
                .collect()
        };

        let d_angle = contract(circuit.z_jacobian(
            &pass.data_angles,
            &pass.train_angles,
            SlotKind::Trainable,
        )?);
        let d_theta = d_angle
            .iter()
            .zip(&pass.train_angles)
            .map(|(g, a)| g * (1.0 - a * a))
            .collect();

        let mut d_w = vec![0.0; n_in * m];
        let mut d_b = vec![0.0; m];
        if pass.norm > 0.0 {
            let d_data = contract(circuit.z_jacobian(
                &pass.data_angles,
                &pass.train_angles,
                SlotKind::Data,
            )?);
            let d_y: Vec<f64> = d_data
                .iter()
                .zip(&pass.data_angles)
                .map(|(g, a)| g * (1.0 - a * a))
                .collect();
            // Jacobian of z/‖z‖ is (I - y yᵀ)/‖z‖.
            let proj: f64 = pass.y.iter().zip(&d_y).map(|(a, b)| a * b).sum();
            for j in 0..m {
                d_b[j] = (d_y[j] - pass.y[j] * proj) / pass.norm;
            }
            for (i, xi) in s.iter().enumerate() {
                for j in 0..m {
                    d_w[i * m + j] = xi * d_b[j];
                }
            }
        }
        Ok((d_theta, d_w, d_b))
    }
}

/// A function approximator over a discrete action set.
pub trait QFunction: Model {
    fn in_dim(&self) -> usize;
    fn num_outputs(&self) -> usize;
    fn q_values(&self, s: &[f64]) -> Result<Vec<f64>>;
    /// Flat parameter gradient of `Σ_a dq_a · Q_a(s)`.
    fn backward(&self, s: &[f64], dq: &[f64]) -> Result<Vec<f64>>;
}

/// A tanh-squashed Gaussian policy over a bounded box.
pub trait Policy: Model {
    fn in_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Draws an action with the given standard-normal `noise`, or returns the
    /// deterministic action when `noise` is `None`.
    fn sample(&self, s: &[f64], noise: Option<&[f64]>) -> Result<ActorSample>;
    /// Flat parameter gradient of `d_action · action + d_log_prob · log_prob`
    /// for the sample drawn with the same `noise`.
    fn backward(
        &self,
        s: &[f64],
        noise: Option<&[f64]>,
        d_action: &[f64],
        d_log_prob: f64,
    ) -> Result<Vec<f64>>;
    /// Log-density of a given action (in the squashed, pre-affine space).
    fn log_prob_of(&self, s: &[f64], action: &[f64]) -> Result<f64>;
}
