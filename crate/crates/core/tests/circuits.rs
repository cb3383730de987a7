mod common;

use std::f64::consts::PI;

use common::{cnot_01, h, kron, matmul, matvec, max_diff, phase, run_from_zero, ry, c};
use eqnn::circuit::{
    benchmark_feature_map, enhanced_feature_map, real_amplitudes, Circuit, Gate, Param, Rescale,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

/// `CNOT(q0 → q1) · (RY(a1) ⊗ RY(a0)) · (H ⊗ H) |00⟩`, with `a_i = 2 x_i - 1.5`
/// acting on qubit `q_i`.
fn efm_reference(x0: f64, x1: f64) -> Vec<num_complex::Complex64> {
    let hh = kron(&h(), &h());
    let rr = kron(&ry(2.0 * x1 - 1.5), &ry(2.0 * x0 - 1.5));
    let u = matmul(&cnot_01(), &matmul(&rr, &hh));
    matvec(&u, &[c(1.0), c(0.0), c(0.0), c(0.0)])
}

fn gate_strategy() -> impl Strategy<Value = Gate<Param>> {
    prop_oneof![
        (0usize..2).prop_map(|qubit| Gate::H { qubit }),
        (0usize..2, 0usize..3).prop_map(|(qubit, j)| Gate::Ry { qubit, angle: Param::Weight(j) }),
        (0usize..2, -3.0f64..3.0).prop_map(|(qubit, v)| Gate::Phase { qubit, angle: Param::Constant(v) }),
        Just(Gate::Cnot { control: 0, target: 1 }),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate_strategy(), 0..6).prop_map(|gates| {
        let mut c = Circuit::new(2).unwrap();
        for g in gates {
            c.push(g).unwrap();
        }
        c
    })
}

#[test]
fn efm_matches_matrix_product_on_random_inputs() {
    let fm = enhanced_feature_map(2, Rescale::Standard).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (x0, x1): (f64, f64) = (rng.random(), rng.random());
        let got = fm.run(&[x0, x1], &[]).unwrap();
        worst = worst.max(max_diff(got.amplitudes(), &efm_reference(x0, x1)));
    }
    assert!(worst <= TOL, "max amplitude error {worst}");
}

#[test]
fn efm_probabilities_at_half() {
    let fm = enhanced_feature_map(2, Rescale::Standard).unwrap();
    let probs = fm.run(&[0.5, 0.5], &[]).unwrap().probabilities();
    let expected: Vec<f64> = efm_reference(0.5, 0.5).iter().map(|a| a.norm_sqr()).collect();
    for (p, e) in probs.iter().zip(&expected) {
        assert!((p - e).abs() <= TOL);
    }
    assert!((probs.iter().sum::<f64>() - 1.0).abs() <= TOL);
}

#[test]
fn benchmark_map_matches_reference() {
    let fm = benchmark_feature_map(2).unwrap();
    for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 0.25]] {
        let bound = fm.bind(&x, &[]).unwrap();
        let got = fm.run(&x, &[]).unwrap();
        assert!(max_diff(got.amplitudes(), &run_from_zero(&bound, 2)) <= TOL);

        // explicit product: CX · (P(pair) on q1) · CX · (P(2x1) ⊗ P(2x0)) · (H ⊗ H)
        let pair = 2.0 * (PI - x[0]) * (PI - x[1]);
        let id = common::identity(2);
        let u = [
            kron(&h(), &h()),
            kron(&phase(2.0 * x[1]), &phase(2.0 * x[0])),
            cnot_01(),
            kron(&phase(pair), &id),
            cnot_01(),
        ]
        .iter()
        .fold(common::identity(4), |acc, g| matmul(g, &acc));
        let expected = matvec(&u, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(max_diff(got.amplitudes(), &expected) <= TOL);
    }
}

#[test]
fn real_amplitudes_counts() {
    for reps in 1..=3 {
        let c = real_amplitudes(2, reps).unwrap();
        assert_eq!(c.gate_count(), 2 + 3 * reps);
        assert_eq!(c.n_weights(), 2 * (reps + 1));
        assert_eq!(c.n_inputs(), 0);
    }
}

#[test]
fn weights_alternate_between_qubits() {
    let c = real_amplitudes(2, 3).unwrap();
    for g in c.gates() {
        if let Gate::Ry { qubit, angle: Param::Weight(j) } = g {
            assert_eq!(*qubit, j % 2);
        }
    }
}

proptest! {
    #[test]
    fn concat_is_associative(a in circuit_strategy(), b in circuit_strategy(), d in circuit_strategy()) {
        let left = a.concat(&b).unwrap().concat(&d).unwrap();
        let right = a.concat(&b.concat(&d).unwrap()).unwrap();
        prop_assert_eq!(left.gates(), right.gates());
        prop_assert_eq!(left.gate_count(), a.gate_count() + b.gate_count() + d.gate_count());
    }

    #[test]
    fn random_circuits_match_reference(c in circuit_strategy(), w in prop::collection::vec(-4.0f64..4.0, 3)) {
        let w = &w[..c.n_weights()];
        let bound = c.bind(&[], w).unwrap();
        let got = c.run(&[], w).unwrap();
        prop_assert!(max_diff(got.amplitudes(), &run_from_zero(&bound, 2)) <= TOL);
    }

    #[test]
    fn efm_wide_rescale_reaches_both_ends(x in 0.0f64..=1.0) {
        let fm = enhanced_feature_map(2, Rescale::Wide).unwrap();
        let bound = fm.bind(&[x, x], &[]).unwrap();
        let Gate::Ry { angle, .. } = bound[2] else { panic!("gate 2 is RY") };
        prop_assert!((angle - (3.0 * x - 1.5)).abs() <= TOL);
        prop_assert!((-1.5..=1.5).contains(&angle));
    }
}
