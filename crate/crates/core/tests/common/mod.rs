//! Dense-matrix reference simulator for 1- and 2-qubit circuits.
//!
//! Builds the full unitary of each gate by Kronecker products of explicit
//! 2×2 matrices and multiplies it onto the state. Shares nothing with the
//! strided in-place simulator beyond the complex number type.

#![allow(dead_code)]

use eqnn::circuit::{BoundGate, Gate};
use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect()
}

pub fn h() -> Mat {
    let s = 0.5f64.sqrt();
    vec![vec![c(s), c(s)], vec![c(s), c(-s)]]
}

pub fn ry(theta: f64) -> Mat {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co), c(-s)], vec![c(s), c(co)]]
}

pub fn phase(theta: f64) -> Mat {
    vec![vec![c(1.0), c(0.0)], vec![c(0.0), C::from_polar(1.0, theta)]]
}

/// Control q0, target q1, in the `[v00, v01, v10, v11]` basis.
pub fn cnot_01() -> Mat {
    let rows = [[1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.], [0., 1., 0., 0.]];
    rows.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect()
}

/// Control q1, target q0.
pub fn cnot_10() -> Mat {
    let rows = [[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]];
    rows.iter().map(|r| r.iter().map(|&v| c(v)).collect()).collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn matvec(a: &Mat, v: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Lifts a one-qubit matrix onto qubit `q` of an `n`-qubit register
/// (`|q_{n-1} … q_0⟩` ordering, so `q0` is the rightmost factor).
pub fn lift(u: &Mat, q: usize, n: usize) -> Mat {
    let id = identity(2);
    let mut out = identity(1);
    for k in (0..n).rev() {
        out = kron(&out, if k == q { u } else { &id });
    }
    out
}

pub fn gate_matrix(g: &BoundGate, n: usize) -> Mat {
    match *g {
        Gate::H { qubit } => lift(&h(), qubit, n),
        Gate::Ry { qubit, angle } => lift(&ry(angle), qubit, n),
        Gate::Phase { qubit, angle } => lift(&phase(angle), qubit, n),
        Gate::Cnot { control: 0, target: 1 } => {
            assert_eq!(n, 2);
            cnot_01()
        }
        Gate::Cnot { control: 1, target: 0 } => {
            assert_eq!(n, 2);
            cnot_10()
        }
        Gate::Cnot { .. } => panic!("reference simulator only covers 2-qubit CNOTs"),
    }
}

/// Unitary of the whole gate list (later gates multiply on the left).
pub fn circuit_unitary(gates: &[BoundGate], n: usize) -> Mat {
    gates
        .iter()
        .fold(identity(1 << n), |acc, g| matmul(&gate_matrix(g, n), &acc))
}

pub fn run_from_zero(gates: &[BoundGate], n: usize) -> Vec<C> {
    let mut zero = vec![c(0.0); 1 << n];
    zero[0] = c(1.0);
    matvec(&circuit_unitary(gates, n), &zero)
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `P(even) - P(odd)` from amplitudes.
pub fn parity_expectation(amps: &[C]) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(k, a)| if k.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}
