use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use qcommit_core::qsim::*;
use qcommit_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn assert_amps(state: &Statevector, expected: &[Complex64], tol: f64) {
    assert_eq!(state.amplitudes().len(), expected.len());
    for (a, e) in state.amplitudes().iter().zip(expected) {
        assert!((a - e).norm() <= tol, "{a} != {e}");
    }
}

/// Random layered circuit: H wall, data RY per qubit, then per layer random
/// rotations on trainable slots and a CZ chain. Slots are reused across
/// layers to exercise accumulation.
fn random_circuit(rng: &mut ChaCha8Rng, n: usize, layers: usize) -> (Circuit, Vec<f64>, Vec<f64>) {
    let slots = layers * n;
    let mut circ = Circuit::new(n, n, slots).unwrap();
    for q in 0..n {
        circ.push(Gate::h(q)).unwrap();
        circ.push(Gate::ry(q, Param::Data(q))).unwrap();
    }
    for l in 0..layers {
        for q in 0..n {
            let slot = if rng.random_bool(0.2) {
                rng.random_range(0..slots)
            } else {
                l * n + q
            };
            let p = Param::Trainable(slot);
            let g = match rng.random_range(0..3) {
                0 => Gate::rx(q, p),
                1 => Gate::ry(q, p),
                _ => Gate::rz(q, p),
            };
            circ.push(g).unwrap();
        }
        for q in 0..n.saturating_sub(1) {
            circ.push(Gate::cz(q, q + 1)).unwrap();
        }
    }
    let data = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
    let theta = (0..slots).map(|_| rng.random_range(-PI..PI)).collect();
    (circ, data, theta)
}

fn central_difference(
    circ: &Circuit,
    data: &[f64],
    theta: &[f64],
    obs: &Observable,
    k: usize,
    h: f64,
) -> f64 {
    let f = |t: &[f64]| circ.run(data, t).unwrap().expect_z(obs).unwrap();
    let mut p = theta.to_vec();
    let mut m = theta.to_vec();
    p[k] += h;
    m[k] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

#[test]
fn zero_state_examples() {
    assert_amps(&zero_state(1).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)], 0.0);
    assert_amps(
        &zero_state(2).unwrap(),
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        0.0,
    );
    assert!(matches!(zero_state(0), Err(Error::Size(_))));
    assert!(matches!(zero_state(17), Err(Error::Size(_))));
}

#[test]
fn hadamard_on_zero() {
    let s = apply_gate(&zero_state(1).unwrap(), &Gate::h(0), None).unwrap();
    assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15);
}

#[test]
fn cz_flips_sign_of_11() {
    let h = 0.5;
    let plus2 = Statevector::from_amplitudes(vec![c(h, 0.0); 4]).unwrap();
    let s = apply_gate(&plus2, &Gate::cz(0, 1), None).unwrap();
    assert_amps(&s, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)], 1e-15);
}

#[test]
fn rx_pi_on_zero() {
    let s = apply_gate(
        &zero_state(1).unwrap(),
        &Gate::rx(0, Param::Fixed(PI)),
        None,
    )
    .unwrap();
    assert_amps(&s, &[c(0.0, 0.0), c(0.0, -1.0)], 1e-15);
}

#[test]
fn unresolved_slot_is_binding_error() {
    let g = Gate::ry(0, Param::Trainable(0));
    assert!(matches!(
        apply_gate(&zero_state(1).unwrap(), &g, None),
        Err(Error::Binding(_))
    ));
}

#[test]
fn run_circuit_examples() {
    let empty = Circuit::new(2, 0, 0).unwrap();
    assert_amps(
        &run_circuit(&empty, &[], &[]).unwrap(),
        zero_state(2).unwrap().amplitudes(),
        0.0,
    );

    let mut h = Circuit::new(1, 0, 0).unwrap();
    h.push(Gate::h(0)).unwrap();
    let expected = [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)];
    assert_amps(&run_circuit(&h, &[], &[]).unwrap(), &expected, 1e-15);

    let mut hr = Circuit::new(1, 0, 1).unwrap();
    hr.push(Gate::h(0)).unwrap();
    hr.push(Gate::ry(0, Param::Trainable(0))).unwrap();
    assert_amps(&run_circuit(&hr, &[], &[0.0]).unwrap(), &expected, 1e-15);
    assert!(matches!(run_circuit(&hr, &[], &[]), Err(Error::Binding(_))));
    assert!(matches!(
        run_circuit(&hr, &[1.0], &[0.0]),
        Err(Error::Binding(_))
    ));
}

#[test]
fn expect_z_examples() {
    let z0 = Observable::z(0);
    let zero = zero_state(1).unwrap();
    let one = apply_gate(&zero, &Gate::rx(0, Param::Fixed(PI)), None).unwrap();
    let plus = apply_gate(&zero, &Gate::h(0), None).unwrap();
    assert_eq!(expect_z(&zero, &z0).unwrap(), 1.0);
    assert!((expect_z(&one, &z0).unwrap() + 1.0).abs() < 1e-15);
    assert!(expect_z(&plus, &z0).unwrap().abs() < 1e-15);
    assert!(matches!(
        expect_z(&zero, &Observable::z(1)),
        Err(Error::Size(_))
    ));
}

#[test]
fn expect_z_uses_lsb_qubit_order() {
    // |q1 q0> = |01> sits at index 1.
    let mut amps = vec![c(0.0, 0.0); 4];
    amps[1] = c(1.0, 0.0);
    let s = Statevector::from_amplitudes(amps).unwrap();
    assert_eq!(s.z_expectations(), vec![-1.0, 1.0]);
    let obs = Observable {
        terms: vec![(0, 2.0), (1, 0.5)],
        constant: 0.25,
    };
    assert!((expect_z(&s, &obs).unwrap() - (-2.0 + 0.5 + 0.25)).abs() < 1e-15);
}

#[test]
fn param_shift_single_rx() {
    let mut circ = Circuit::new(1, 0, 1).unwrap();
    circ.push(Gate::rx(0, Param::Trainable(0))).unwrap();
    let z0 = Observable::z(0);
    assert!(
        param_shift_grad(&circ, &[], &[0.0], &z0, Slot::Trainable(0))
            .unwrap()
            .abs()
            < 1e-15
    );
    let g = param_shift_grad(&circ, &[], &[FRAC_PI_2], &z0, Slot::Trainable(0)).unwrap();
    let fd = central_difference(&circ, &[], &[FRAC_PI_2], &z0, 0, 1e-5);
    assert!((g - fd).abs() < 1e-8);
    assert!((g + 1.0).abs() < 1e-12);
}

#[test]
fn param_shift_three_qubit_two_layer() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (circ, data, theta) = random_circuit(&mut rng, 3, 2);
    let obs = Observable {
        terms: vec![(0, 1.0), (1, -0.5), (2, 0.3)],
        constant: 0.0,
    };
    for k in 0..theta.len() {
        let g = param_shift_grad(&circ, &data, &theta, &obs, Slot::Trainable(k)).unwrap();
        let fd = central_difference(&circ, &data, &theta, &obs, k, 1e-4);
        assert!((g - fd).abs() < 1e-5, "slot {k}: {g} vs {fd}");
    }
}

#[test]
fn unused_slot_has_zero_gradient() {
    let mut circ = Circuit::new(1, 0, 2).unwrap();
    circ.push(Gate::ry(0, Param::Trainable(0))).unwrap();
    let g = param_shift_grad(
        &circ,
        &[],
        &[0.3, 0.7],
        &Observable::z(0),
        Slot::Trainable(1),
    )
    .unwrap();
    assert_eq!(g, 0.0);
}

#[test]
fn parameter_on_non_rotation_is_rejected() {
    let mut circ = Circuit::new(1, 0, 1).unwrap();
    let bad = Gate {
        kind: GateKind::H,
        target: 0,
        control: None,
        param: Some(Param::Trainable(0)),
    };
    assert!(matches!(circ.push(bad), Err(Error::UnsupportedGate(_))));
}

#[test]
fn shared_slot_accumulates() {
    // f(θ) = <Z> after RY(θ) RY(θ) = cos 2θ, f'(θ) = −2 sin 2θ.
    let mut circ = Circuit::new(1, 0, 1).unwrap();
    circ.push(Gate::ry(0, Param::Trainable(0))).unwrap();
    circ.push(Gate::ry(0, Param::Trainable(0))).unwrap();
    let theta = 0.4;
    let g = param_shift_grad(&circ, &[], &[theta], &Observable::z(0), Slot::Trainable(0)).unwrap();
    assert!((g + 2.0 * (2.0 * theta).sin()).abs() < 1e-12);
}

#[test]
fn grad_vector_examples() {
    let mut one = Circuit::new(1, 0, 1).unwrap();
    one.push(Gate::rx(0, Param::Trainable(0))).unwrap();
    let z0 = Observable::z(0);
    let v = grad_vector(&one, &[], &[0.9], &z0).unwrap();
    assert_eq!(
        v,
        vec![param_shift_grad(&one, &[], &[0.9], &z0, Slot::Trainable(0)).unwrap()]
    );

    let mut none = Circuit::new(2, 0, 0).unwrap();
    none.push(Gate::h(0)).unwrap();
    assert!(grad_vector(&none, &[], &[], &z0).unwrap().is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (circ, data, theta) = random_circuit(&mut rng, 3, 2);
    assert_eq!(theta.len(), 6);
    let obs = Observable::z(1);
    let v = grad_vector(&circ, &data, &theta, &obs).unwrap();
    for (k, g) in v.iter().enumerate() {
        let fd = central_difference(&circ, &data, &theta, &obs, k, 1e-4);
        assert!((g - fd).abs() < 1e-5);
    }
}

#[test]
fn gradient_exactness_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let layers = rng.random_range(1..=3);
        let (circ, data, theta) = random_circuit(&mut rng, n, layers);
        let obs = Observable {
            terms: (0..n).map(|q| (q, rng.random_range(-1.0..1.0))).collect(),
            constant: 0.0,
        };
        let v = grad_vector(&circ, &data, &theta, &obs).unwrap();
        for (k, g) in v.iter().enumerate() {
            let fd = central_difference(&circ, &data, &theta, &obs, k, 1e-4);
            assert!(
                (g - fd).abs() < 1e-5,
                "n={n} layers={layers} slot {k}: {g} vs {fd}"
            );
        }
    }
}

#[test]
fn z_jacobian_matches_per_qubit_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (circ, data, theta) = random_circuit(&mut rng, 3, 2);
    let jac = circ.z_jacobian(&data, &theta, SlotKind::Trainable).unwrap();
    for (k, row) in jac.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            let g = param_shift_grad(&circ, &data, &theta, &Observable::z(q), Slot::Trainable(k))
                .unwrap();
            assert!((v - g).abs() < 1e-14);
        }
    }
    let djac = circ.z_jacobian(&data, &theta, SlotKind::Data).unwrap();
    for (k, row) in djac.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            let mut p = data.clone();
            let mut m = data.clone();
            p[k] += 1e-4;
            m[k] -= 1e-4;
            let fd = (circ.run(&p, &theta).unwrap().z_expectations()[q]
                - circ.run(&m, &theta).unwrap().z_expectations()[q])
                / 2e-4;
            assert!((v - fd).abs() < 1e-5);
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (circ, data, theta) = random_circuit(&mut rng, 4, 3);
    let a = circ.run(&data, &theta).unwrap();
    let b = circ.run(&data, &theta).unwrap();
    assert_eq!(a, b);
    let obs = Observable::z(2);
    assert_eq!(
        grad_vector(&circ, &data, &theta, &obs).unwrap(),
        grad_vector(&circ, &data, &theta, &obs).unwrap()
    );
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let angle = -10.0f64..10.0;
    prop_oneof![
        (0..n).prop_map(Gate::h),
        (0..n, angle.clone()).prop_map(|(q, a)| Gate::rx(q, Param::Fixed(a))),
        (0..n, angle.clone()).prop_map(|(q, a)| Gate::ry(q, Param::Fixed(a))),
        (0..n, angle).prop_map(|(q, a)| Gate::rz(q, Param::Fixed(a))),
        (0..n, 0..n).prop_filter_map("distinct", |(a, b)| (a != b).then(|| Gate::cz(a, b))),
    ]
}

fn inverse(g: &Gate) -> Gate {
    match g.param {
        Some(Param::Fixed(a)) => Gate {
            param: Some(Param::Fixed(-a)),
            ..*g
        },
        _ => *g,
    }
}

proptest! {
    #[test]
    fn norm_is_preserved(gates in proptest::collection::vec(gate_strategy(4), 0..40)) {
        let mut s = zero_state(4).unwrap();
        for g in &gates {
            s = apply_gate(&s, g, None).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gate_then_inverse_is_identity(
        prefix in proptest::collection::vec(gate_strategy(3), 0..10),
        g in gate_strategy(3),
    ) {
        let mut s = zero_state(3).unwrap();
        for p in &prefix {
            s = apply_gate(&s, p, None).unwrap();
        }
        let back = apply_gate(&apply_gate(&s, &g, None).unwrap(), &inverse(&g), None).unwrap();
        for (a, b) in back.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_weight_expectations_are_bounded(
        gates in proptest::collection::vec(gate_strategy(3), 0..30),
        qubits in proptest::collection::vec(0usize..3, 1..6),
    ) {
        let mut s = zero_state(3).unwrap();
        for g in &gates {
            s = apply_gate(&s, g, None).unwrap();
        }
        let obs = Observable { terms: qubits.iter().map(|&q| (q, 1.0)).collect(), constant: 0.0 };
        let v = expect_z(&s, &obs).unwrap();
        let n = qubits.len() as f64;
        prop_assert!(v >= -n - 1e-12 && v <= n + 1e-12);
    }
}
