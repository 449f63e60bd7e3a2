use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{AnsatzSpec, LinearEncoder, QFunction, Trunk};
use crate::error::{Error, Result};
use crate::params::{Cursor, Model, ParamBlock, ParamGroup};

/// Hybrid Q-network: trunk expectations followed by a linear readout,
/// `Q(s, ·) = readout_wᵀ <Z>(s) + readout_b`.
///
/// `readout_w` is row-major `num_qubits × num_actions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub encoder: LinearEncoder,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub num_actions: usize,
    pub readout_w: Vec<f64>,
    pub readout_b: Vec<f64>,
}

impl QNetwork {
    pub fn new(
        encoder: LinearEncoder,
        ansatz: AnsatzSpec,
        theta: Vec<f64>,
        num_actions: usize,
        readout_w: Vec<f64>,
        readout_b: Vec<f64>,
    ) -> Result<Self> {
        Trunk::new(encoder.clone(), ansatz, theta.clone())?;
        if readout_w.len() != ansatz.num_qubits * num_actions || readout_b.len() != num_actions {
            return Err(Error::Size(format!(
                "readout must be {}x{} with {} biases",
                ansatz.num_qubits, num_actions, num_actions
            )));
        }
        Ok(Self {
            encoder,
            ansatz,
            theta,
            num_actions,
            readout_w,
            readout_b,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        ansatz: AnsatzSpec,
        num_actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let encoder = LinearEncoder::random(in_dim, ansatz.num_qubits, rng);
        let theta = Trunk::random_theta(&ansatz, rng);
        let bound = 1.0 / (ansatz.num_qubits as f64).sqrt();
        let uniform = Uniform::new_inclusive(-bound, bound).expect("finite bounds");
        let readout_w = (0..ansatz.num_qubits * num_actions)
            .map(|_| uniform.sample(rng))
            .collect();
        Self::new(
            encoder,
            ansatz,
            theta,
            num_actions,
            readout_w,
            vec![0.0; num_actions],
        )
    }

    fn trunk(&self) -> Result<Trunk> {
        Trunk::new(self.encoder.clone(), self.ansatz, self.theta.clone())
    }

    /// Per-qubit `<Z_q>` before the readout.
    pub fn expectations(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trunk()?.forward(s)?.z)
    }

    fn readout(&self, z: &[f64]) -> Vec<f64> {
        let a = self.num_actions;
        let mut q = self.readout_b.clone();
        for (qi, zq) in z.iter().enumerate() {
            for (out, w) in q.iter_mut().zip(&self.readout_w[qi * a..(qi + 1) * a]) {
                *out += w * zq;
            }
        }
        q
    }
}

/// `Q_θ(s, ·)` for every action.
pub fn q_values(net: &QNetwork, s: &[f64]) -> Result<Vec<f64>> {
    net.q_values(s)
}

impl Model for QNetwork {
    fn layout(&self) -> Vec<ParamBlock> {
        vec![
            ParamBlock {
                group: ParamGroup::Theta,
                len: self.theta.len(),
            },
            ParamBlock {
                group: ParamGroup::Readout,
                len: self.readout_w.len() + self.readout_b.len(),
            },
            ParamBlock {
                group: ParamGroup::Encoder,
                len: self.encoder.weights.len() + self.encoder.bias.len(),
            },
        ]
    }

    fn params(&self) -> Vec<f64> {
        let mut out = self.theta.clone();
        out.extend_from_slice(&self.readout_w);
        out.extend_from_slice(&self.readout_b);
        out.extend_from_slice(&self.encoder.weights);
        out.extend_from_slice(&self.encoder.bias);
        out
    }

    fn set_params(&mut self, flat: &[f64]) {
        let mut c = Cursor::new(flat);
        c.fill(&mut self.theta);
        c.fill(&mut self.readout_w);
        c.fill(&mut self.readout_b);
        c.fill(&mut self.encoder.weights);
        c.fill(&mut self.encoder.bias);
    }
}

impl QFunction for QNetwork {
    fn in_dim(&self) -> usize {
        self.encoder.in_dim
    }

    fn num_outputs(&self) -> usize {
        self.num_actions
    }

    fn q_values(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.readout(&self.expectations(s)?))
    }

    fn backward(&self, s: &[f64], dq: &[f64]) -> Result<Vec<f64>> {
        if dq.len() != self.num_actions {
            return Err(Error::Size(format!(
                "expected {} output grads, got {}",
                self.num_actions,
                dq.len()
            )));
        }
        let trunk = self.trunk()?;
        let pass = trunk.forward(s)?;
        let a = self.num_actions;
        let nq = self.ansatz.num_qubits;
        let mut d_w = vec![0.0; nq * a];
        let mut dz = vec![0.0; nq];
        for q in 0..nq {
            for k in 0..a {
                d_w[q * a + k] = pass.z[q] * dq[k];
                dz[q] += self.readout_w[q * a + k] * dq[k];
            }
        }
        let (d_theta, d_enc_w, d_enc_b) = trunk.backward(s, &pass, &dz)?;
        let mut out = d_theta;
        out.extend_from_slice(&d_w);
        out.extend_from_slice(dq);
        out.extend_from_slice(&d_enc_w);
        out.extend_from_slice(&d_enc_b);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmodels::DataRotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bias_only_readout() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = QNetwork::random(4, AnsatzSpec::new(2, 1), 2, &mut rng).unwrap();
        net.theta = vec![0.0];
        net.readout_w = vec![0.0; 4];
        net.readout_b = vec![0.5, -0.5];
        for s in [[0.0, 1.0, 2.0, 3.0], [-5.0, 0.1, 0.0, 7.0]] {
            assert_eq!(net.q_values(&s).unwrap(), vec![0.5, -0.5]);
        }
    }

    #[test]
    fn single_qubit_zero_data_angle() {
        // A 1-d encoder output always normalizes to ±1, so the zero data
        // angle is injected at the circuit level and read out by hand.
        for rot in [DataRotation::Rx, DataRotation::Ry] {
            let ansatz = AnsatzSpec {
                data_rotation: rot,
                ..AnsatzSpec::new(1, 1)
            };
            let net = QNetwork::new(
                LinearEncoder::zeros(1, 1),
                ansatz,
                vec![0.0],
                1,
                vec![1.0],
                vec![0.0],
            )
            .unwrap();
            let circuit = crate::qmodels::build_vqc(&net.ansatz).unwrap();
            let z = circuit.run(&[0.0], &[0.0]).unwrap().z_expectations();
            let q = net.readout(&z);
            assert!(q[0].abs() < 1e-15);
        }
    }

    #[test]
    fn shape_errors() {
        let ansatz = AnsatzSpec::new(2, 1);
        assert!(QNetwork::new(
            LinearEncoder::zeros(3, 3),
            ansatz,
            vec![0.0],
            2,
            vec![0.0; 4],
            vec![0.0; 2]
        )
        .is_err());
        assert!(QNetwork::new(
            LinearEncoder::zeros(3, 2),
            ansatz,
            vec![0.0; 2],
            2,
            vec![0.0; 4],
            vec![0.0; 2]
        )
        .is_err());
        let net = QNetwork::new(
            LinearEncoder::zeros(3, 2),
            ansatz,
            vec![0.0],
            2,
            vec![0.0; 4],
            vec![0.0; 2],
        )
        .unwrap();
        assert!(net.q_values(&[1.0]).is_err());
    }

    #[test]
    fn zero_downstream_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = QNetwork::random(3, AnsatzSpec::new(2, 2), 3, &mut rng).unwrap();
        let g = net.backward(&[0.2, -0.4, 1.0], &[0.0; 3]).unwrap();
        assert_eq!(g.len(), net.num_params());
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn params_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = QNetwork::random(3, AnsatzSpec::new(2, 2), 3, &mut rng).unwrap();
        let p: Vec<f64> = (0..net.num_params()).map(|i| i as f64).collect();
        net.set_params(&p);
        assert_eq!(net.params(), p);
    }
}
