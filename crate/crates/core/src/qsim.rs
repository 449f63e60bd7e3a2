//! Exact dense statevector simulation for small circuits.
//!
//! Qubit 0 is the least-significant bit of the basis-state index, so the
//! amplitude of `|q_{n-1} ... q_1 q_0>` lives at index `Σ q_k 2^k`.
//!
//! Rotations follow `R_P(θ) = exp(-iθP/2)`. Their generators have
//! eigenvalues ±1/2, which makes the two-point parameter-shift rule
//! `∂f/∂θ = [f(θ + π/2) - f(θ - π/2)] / 2` exact for every slot occurrence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 16;

/// Pure state of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n: usize) -> Result<Statevector> {
    Statevector::zero(n)
}

impl Statevector {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Applies `gate` in place. `resolved` supplies the angle of a rotation
    /// whose parameter is a data or trainable slot; it is ignored for fixed
    /// angles and for H/CZ.
    pub fn apply(&mut self, gate: &Gate, resolved: Option<f64>) -> Result<()> {
        gate.check(self.num_qubits)?;
        let theta = match gate.param {
            Some(Param::Fixed(angle)) => angle,
            Some(slot) => {
                resolved.ok_or_else(|| Error::Binding(format!("no value bound for {slot:?}")))?
            }
            None => 0.0,
        };
        self.apply_unchecked(gate, theta);
        Ok(())
    }

    /// Applies a validated gate with its rotation angle already resolved.
    fn apply_unchecked(&mut self, gate: &Gate, theta: f64) {
        let target = 1usize << gate.target;
        match gate.kind {
            GateKind::H => self.apply_pairs(target, |a0, a1| {
                ((a0 + a1) * FRAC_1_SQRT_2, (a0 - a1) * FRAC_1_SQRT_2)
            }),
            GateKind::Cz => {
                let mask = target | (1usize << gate.control.unwrap_or(gate.target));
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            GateKind::Rx => {
                let (s, c) = (theta / 2.0).sin_cos();
                let mis = Complex64::new(0.0, -s);
                self.apply_pairs(target, |a0, a1| (a0 * c + a1 * mis, a0 * mis + a1 * c))
            }
            GateKind::Ry => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.apply_pairs(target, |a0, a1| (a0 * c - a1 * s, a0 * s + a1 * c))
            }
            GateKind::Rz => {
                let (s, c) = (theta / 2.0).sin_cos();
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                self.apply_pairs(target, |a0, a1| (a0 * lo, a1 * hi))
            }
        }
    }

    fn apply_pairs<F>(&mut self, mask: usize, mut f: F)
    where
        F: FnMut(Complex64, Complex64) -> (Complex64, Complex64),
    {
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (b0, b1) = f(self.amps[i], self.amps[j]);
                self.amps[i] = b0;
                self.amps[j] = b1;
            }
        }
    }

    /// `<Z_q>` for every qubit, in qubit order.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_qubits];
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            for (q, z) in out.iter_mut().enumerate() {
                if i >> q & 1 == 0 {
                    *z += p;
                } else {
                    *z -= p;
                }
            }
        }
        out
    }

    pub fn expect_z(&self, obs: &Observable) -> Result<f64> {
        obs.check(self.num_qubits)?;
        let z = self.z_expectations();
        Ok(obs.evaluate(&z))
    }
}

/// Functional form of [`Statevector::apply`].
pub fn apply_gate(state: &Statevector, gate: &Gate, resolved: Option<f64>) -> Result<Statevector> {
    let mut next = state.clone();
    next.apply(gate, resolved)?;
    Ok(next)
}

pub fn expect_z(state: &Statevector, obs: &Observable) -> Result<f64> {
    state.expect_z(obs)
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Size(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    H,
    Rx,
    Ry,
    Rz,
    Cz,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }
}

/// Where a rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Fixed(f64),
    Data(usize),
    Trainable(usize),
}

/// A parameter vector slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Data(usize),
    Trainable(usize),
}

impl Param {
    fn slot(self) -> Option<Slot> {
        match self {
            Param::Fixed(_) => None,
            Param::Data(i) => Some(Slot::Data(i)),
            Param::Trainable(i) => Some(Slot::Trainable(i)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub param: Option<Param>,
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Self {
            kind: GateKind::H,
            target,
            control: None,
            param: None,
        }
    }

    pub fn rx(target: usize, param: Param) -> Self {
        Self {
            kind: GateKind::Rx,
            target,
            control: None,
            param: Some(param),
        }
    }

    pub fn ry(target: usize, param: Param) -> Self {
        Self {
            kind: GateKind::Ry,
            target,
            control: None,
            param: Some(param),
        }
    }

    pub fn rz(target: usize, param: Param) -> Self {
        Self {
            kind: GateKind::Rz,
            target,
            control: None,
            param: Some(param),
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            target,
            control: Some(control),
            param: None,
        }
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        if self.target >= num_qubits {
            return Err(Error::Size(format!(
                "target {} out of range for {num_qubits} qubits",
                self.target
            )));
        }
        match (self.kind, self.control) {
            (GateKind::Cz, Some(c)) if c >= num_qubits => {
                return Err(Error::Size(format!("control {c} out of range")))
            }
            (GateKind::Cz, Some(c)) if c == self.target => {
                return Err(Error::Size("control equals target".into()))
            }
            (GateKind::Cz, None) => return Err(Error::Size("CZ without control".into())),
            (GateKind::Cz, Some(_)) => {}
            (_, Some(_)) => return Err(Error::Size("control on a single-qubit gate".into())),
            _ => {}
        }
        match (self.kind.is_rotation(), self.param) {
            (true, None) => Err(Error::Binding(format!("{:?} without angle", self.kind))),
            (false, Some(_)) => Err(Error::UnsupportedGate(format!(
                "{:?} takes no parameter",
                self.kind
            ))),
            _ => Ok(()),
        }
    }
}

/// Weighted sum of single-qubit Pauli-Z terms plus a constant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Observable {
    pub fn z(qubit: usize) -> Self {
        Self {
            terms: vec![(qubit, 1.0)],
            constant: 0.0,
        }
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        match self.terms.iter().find(|(q, _)| *q >= num_qubits) {
            Some((q, _)) => Err(Error::Size(format!("observable qubit {q} out of range"))),
            None => Ok(()),
        }
    }

    fn evaluate(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(q, w)| acc + w * z[q])
    }
}

/// An ordered gate list with data and trainable parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    num_data_slots: usize,
    num_trainable_slots: usize,
}

impl Circuit {
    pub fn new(
        num_qubits: usize,
        num_data_slots: usize,
        num_trainable_slots: usize,
    ) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
            num_data_slots,
            num_trainable_slots,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.num_qubits)?;
        match gate.param.and_then(Param::slot) {
            Some(Slot::Data(i)) if i >= self.num_data_slots => {
                return Err(Error::Binding(format!("data slot {i} out of range")))
            }
            Some(Slot::Trainable(i)) if i >= self.num_trainable_slots => {
                return Err(Error::Binding(format!("trainable slot {i} out of range")))
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_data_slots(&self) -> usize {
        self.num_data_slots
    }

    pub fn num_trainable_slots(&self) -> usize {
        self.num_trainable_slots
    }

    fn check_lengths(&self, data: &[f64], trainable: &[f64]) -> Result<()> {
        if data.len() != self.num_data_slots || trainable.len() != self.num_trainable_slots {
            return Err(Error::Binding(format!(
                "expected {} data / {} trainable values, got {} / {}",
                self.num_data_slots,
                self.num_trainable_slots,
                data.len(),
                trainable.len()
            )));
        }
        Ok(())
    }

    /// Runs the circuit from `|0...0>`.
    pub fn run(&self, data: &[f64], trainable: &[f64]) -> Result<Statevector> {
        self.check_lengths(data, trainable)?;
        Ok(self.run_shifted(data, trainable, None))
    }

    /// Runs with gate `shift.0` rotated by an extra `shift.1` radians.
    /// Lengths must already be checked.
    fn run_shifted(
        &self,
        data: &[f64],
        trainable: &[f64],
        shift: Option<(usize, f64)>,
    ) -> Statevector {
        let mut state =
            Statevector::zero(self.num_qubits).expect("qubit count checked on construction");
        for (idx, gate) in self.gates.iter().enumerate() {
            let mut theta = match gate.param {
                Some(Param::Fixed(a)) => a,
                Some(Param::Data(i)) => data[i],
                Some(Param::Trainable(i)) => trainable[i],
                None => 0.0,
            };
            if let Some((at, delta)) = shift {
                if at == idx {
                    theta += delta;
                }
            }
            state.apply_unchecked(gate, theta);
        }
        state
    }

    fn occurrences(&self, slot: Slot) -> Result<Vec<usize>> {
        let mut found = Vec::new();
        for (idx, gate) in self.gates.iter().enumerate() {
            if gate.param.and_then(Param::slot) == Some(slot) {
                if !gate.kind.is_rotation() {
                    return Err(Error::UnsupportedGate(format!(
                        "{slot:?} is attached to {:?}",
                        gate.kind
                    )));
                }
                found.push(idx);
            }
        }
        Ok(found)
    }

    /// Derivative of every `<Z_q>` with respect to each slot of one kind.
    /// Row `k` holds `∂<Z_q>/∂slot_k` for all qubits `q`.
    pub fn z_jacobian(
        &self,
        data: &[f64],
        trainable: &[f64],
        kind: SlotKind,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_lengths(data, trainable)?;
        let count = match kind {
            SlotKind::Data => self.num_data_slots,
            SlotKind::Trainable => self.num_trainable_slots,
        };
        (0..count)
            .map(|k| {
                let slot = kind.slot(k);
                let mut row = vec![0.0; self.num_qubits];
                for idx in self.occurrences(slot)? {
                    let plus = self
                        .run_shifted(data, trainable, Some((idx, FRAC_PI_2)))
                        .z_expectations();
                    let minus = self
                        .run_shifted(data, trainable, Some((idx, -FRAC_PI_2)))
                        .z_expectations();
                    for ((r, p), m) in row.iter_mut().zip(&plus).zip(&minus) {
                        *r += 0.5 * (p - m);
                    }
                }
                Ok(row)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Data,
    Trainable,
}

impl SlotKind {
    fn slot(self, k: usize) -> Slot {
        match self {
            SlotKind::Data => Slot::Data(k),
            SlotKind::Trainable => Slot::Trainable(k),
        }
    }
}

pub fn run_circuit(circuit: &Circuit, data: &[f64], trainable: &[f64]) -> Result<Statevector> {
    circuit.run(data, trainable)
}

/// Parameter-shift derivative of `<obs>` with respect to one slot. A slot
/// shared by several gates accumulates one shift pair per occurrence; an
/// unused slot has derivative zero.
pub fn param_shift_grad(
    circuit: &Circuit,
    data: &[f64],
    trainable: &[f64],
    obs: &Observable,
    slot: Slot,
) -> Result<f64> {
    circuit.check_lengths(data, trainable)?;
    obs.check(circuit.num_qubits)?;
    let mut grad = 0.0;
    for idx in circuit.occurrences(slot)? {
        let plus = circuit.run_shifted(data, trainable, Some((idx, FRAC_PI_2)));
        let minus = circuit.run_shifted(data, trainable, Some((idx, -FRAC_PI_2)));
        grad +=
            0.5 * (obs.evaluate(&plus.z_expectations()) - obs.evaluate(&minus.z_expectations()));
    }
    Ok(grad)
}

/// Gradient of `<obs>` over all trainable slots, in slot order.
pub fn grad_vector(
    circuit: &Circuit,
    data: &[f64],
    trainable: &[f64],
    obs: &Observable,
) -> Result<Vec<f64>> {
    (0..circuit.num_trainable_slots)
        .map(|k| param_shift_grad(circuit, data, trainable, obs, Slot::Trainable(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn zero_state_shapes() {
        let s = zero_state(1).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
        let s = zero_state(2).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..]
            .iter()
            .all(|c| *c == Complex64::new(0.0, 0.0)));
        assert!(matches!(zero_state(0), Err(Error::Size(_))));
        assert!(matches!(zero_state(17), Err(Error::Size(_))));
    }

    #[test]
    fn hadamard_cz_and_rx() {
        let s = apply_gate(&zero_state(1).unwrap(), &Gate::h(0), None).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));

        // |11> with qubit 0 as the low bit is index 3.
        let mut s = zero_state(2).unwrap();
        s.apply(&Gate::rx(0, Param::Fixed(PI)), None).unwrap();
        s.apply(&Gate::rx(1, Param::Fixed(PI)), None).unwrap();
        let before = s.amplitudes()[3];
        s.apply(&Gate::cz(0, 1), None).unwrap();
        assert!(close(s.amplitudes()[3], -before.re, -before.im));

        let s = apply_gate(
            &zero_state(1).unwrap(),
            &Gate::rx(0, Param::Fixed(PI)),
            None,
        )
        .unwrap();
        assert!(close(s.amplitudes()[0], 0.0, 0.0));
        assert!(close(s.amplitudes()[1], 0.0, -1.0));
    }

    #[test]
    fn unresolved_slot_is_a_binding_error() {
        let s = zero_state(1).unwrap();
        let err = apply_gate(&s, &Gate::ry(0, Param::Trainable(0)), None).unwrap_err();
        assert!(matches!(err, Error::Binding(_)));
        let ok = apply_gate(&s, &Gate::ry(0, Param::Trainable(0)), Some(0.3)).unwrap();
        assert!((ok.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_circuit_examples() {
        let c = Circuit::new(2, 0, 0).unwrap();
        let s = c.run(&[], &[]).unwrap();
        assert_eq!(s, zero_state(2).unwrap());

        let mut c = Circuit::new(1, 0, 0).unwrap();
        c.push(Gate::h(0)).unwrap();
        let s = c.run(&[], &[]).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));

        let mut c = Circuit::new(1, 0, 1).unwrap();
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::ry(0, Param::Trainable(0))).unwrap();
        let s = c.run(&[], &[0.0]).unwrap();
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
        assert!(matches!(c.run(&[], &[]), Err(Error::Binding(_))));
    }

    #[test]
    fn expect_z_examples() {
        let obs = Observable::z(0);
        assert_eq!(zero_state(1).unwrap().expect_z(&obs).unwrap(), 1.0);
        let one = apply_gate(
            &zero_state(1).unwrap(),
            &Gate::rx(0, Param::Fixed(PI)),
            None,
        )
        .unwrap();
        assert!((one.expect_z(&obs).unwrap() + 1.0).abs() < 1e-12);
        let plus = apply_gate(&zero_state(1).unwrap(), &Gate::h(0), None).unwrap();
        assert!(plus.expect_z(&obs).unwrap().abs() < 1e-12);
        assert!(matches!(
            plus.expect_z(&Observable::z(1)),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn param_shift_on_single_rx() {
        let mut c = Circuit::new(1, 0, 1).unwrap();
        c.push(Gate::rx(0, Param::Trainable(0))).unwrap();
        let obs = Observable::z(0);
        let g0 = param_shift_grad(&c, &[], &[0.0], &obs, Slot::Trainable(0)).unwrap();
        assert!(g0.abs() < 1e-12);
        // f(θ) = cos θ; central difference with h = 1e-5 at π/2.
        let f = |t: f64| c.run(&[], &[t]).unwrap().expect_z(&obs).unwrap();
        let h = 1e-5;
        let fd = (f(FRAC_PI_2 + h) - f(FRAC_PI_2 - h)) / (2.0 * h);
        let g = param_shift_grad(&c, &[], &[FRAC_PI_2], &obs, Slot::Trainable(0)).unwrap();
        assert!((fd + 1.0).abs() < 1e-8);
        assert!((g - fd).abs() < 1e-8);
    }

    #[test]
    fn shared_and_unused_slots() {
        let mut c = Circuit::new(2, 0, 2).unwrap();
        c.push(Gate::ry(0, Param::Trainable(0))).unwrap();
        c.push(Gate::ry(1, Param::Trainable(0))).unwrap();
        let obs = Observable {
            terms: vec![(0, 1.0), (1, 1.0)],
            constant: 0.0,
        };
        // f = 2 cos θ → f' = -2 sin θ
        let g = grad_vector(&c, &[], &[0.4, 9.0], &obs).unwrap();
        assert!((g[0] + 2.0 * 0.4f64.sin()).abs() < 1e-12);
        assert_eq!(g[1], 0.0);
        assert!(grad_vector(&Circuit::new(1, 0, 0).unwrap(), &[], &[], &obs)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn parameters_on_h_or_cz_are_rejected() {
        let mut c = Circuit::new(2, 0, 1).unwrap();
        let bad = Gate {
            param: Some(Param::Trainable(0)),
            ..Gate::h(0)
        };
        assert!(matches!(c.push(bad), Err(Error::UnsupportedGate(_))));
        let bad = Gate {
            param: Some(Param::Trainable(0)),
            ..Gate::cz(0, 1)
        };
        assert!(matches!(c.push(bad), Err(Error::UnsupportedGate(_))));
        assert!(matches!(c.push(Gate::cz(1, 1)), Err(Error::Size(_))));
        assert!(matches!(
            c.push(Gate::ry(0, Param::Trainable(1))),
            Err(Error::Binding(_))
        ));
    }
}
