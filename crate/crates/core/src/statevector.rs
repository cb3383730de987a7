//! Dense statevector simulation of the H, Phase, RY and CNOT gates.
//!
//! Amplitude index `k` encodes the basis state `|q_{n-1} … q_1 q_0⟩` with
//! qubit `q0` as bit 0 (little-endian). Gates are applied in place over the
//! strided amplitude pairs that differ only in the target bit.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::{config, usage};
use crate::math;
use crate::Result;

pub use num_complex::Complex64 as Complex;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 20;

/// The four gate kinds of the simulator, with concrete angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    Phase(f64),
    Ry(f64),
    Cnot { control: usize, target: usize },
}

impl GateKind {
    /// The 2×2 matrix of a single-qubit gate, row-major. `None` for CNOT.
    pub fn matrix(&self) -> Option<[[Complex; 2]; 2]> {
        let c = |re: f64| Complex::new(re, 0.0);
        match *self {
            GateKind::H => Some([
                [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
                [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
            ]),
            GateKind::Phase(theta) => Some([
                [c(1.0), c(0.0)],
                [c(0.0), Complex::new(math::cos(theta), math::sin(theta))],
            ]),
            GateKind::Ry(theta) => {
                let (s, co) = (math::sin(theta / 2.0), math::cos(theta / 2.0));
                Some([[c(co), c(-s)], [c(s), c(co)]])
            }
            GateKind::Cnot { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(config!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            ));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// and the vector must be normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(usage!("amplitude length {len} is not 2^n for 1 <= n <= {MAX_QUBITS}"));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
            return Err(usage!("amplitudes are not normalized (norm² = {norm})"));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amps
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(usage!(
                "qubit {qubit} out of range for a {}-qubit state",
                self.n_qubits
            ));
        }
        Ok(())
    }

    /// Applies H, Phase or RY to `qubit`.
    pub fn apply_single(&mut self, gate: GateKind, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = gate
            .matrix()
            .ok_or_else(|| usage!("apply_single called with a two-qubit gate"))?;
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*a0, *a1);
                *a0 = m[0][0] * v0 + m[0][1] * v1;
                *a1 = m[1][0] * v0 + m[1][1] * v1;
            }
        }
        Ok(())
    }

    /// Flips the target bit of every basis index whose control bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(usage!("CNOT control and target are both qubit {control}"));
        }
        let (cmask, tmask) = (1usize << control, 1usize << target);
        for k in 0..self.amps.len() {
            // visit each swapped pair once, from its target-bit-clear member
            if k & cmask != 0 && k & tmask == 0 {
                self.amps.swap(k, k | tmask);
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: GateKind, qubit: usize) -> Result<()> {
        match gate {
            GateKind::Cnot { control, target } => self.apply_cnot(control, target),
            g => self.apply_single(g, qubit),
        }
    }

    /// Born probabilities `|amp_k|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn assert_amps(actual: &[Complex], expected: &[Complex], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (k, (a, e)) in actual.iter().zip(expected).enumerate() {
            assert!((a - e).norm() <= tol, "amp {k}: {a} vs {e}");
        }
    }

    #[test]
    fn zero_state_shapes() {
        let one = StateVector::zero_state(1).unwrap();
        assert_eq!(one.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let two = StateVector::zero_state(2).unwrap();
        assert_eq!(two.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let three = StateVector::zero_state(3).unwrap();
        assert_eq!(three.amplitudes().len(), 8);
        assert_eq!(three.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn zero_state_rejects_out_of_range() {
        assert!(matches!(StateVector::zero_state(0), Err(crate::Error::Config(_))));
        assert!(matches!(StateVector::zero_state(21), Err(crate::Error::Config(_))));
    }

    #[test]
    fn hadamard_makes_uniform_superposition() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_single(GateKind::H, 0).unwrap();
        assert_amps(s.amplitudes(), &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15);
        assert_eq!(s.probabilities().len(), 2);
        for p in s.probabilities() {
            assert!((p - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_zero_is_identity() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_single(GateKind::H, 0).unwrap();
        s.apply_single(GateKind::Ry(0.7), 1).unwrap();
        let before = s.clone();
        s.apply_single(GateKind::Phase(0.0), 0).unwrap();
        s.apply_single(GateKind::Phase(0.0), 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_single(GateKind::Ry(PI), 0).unwrap();
        assert_amps(s.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)], 1e-15);
        let p = s.probabilities();
        assert!(p[0].abs() < 1e-30 && (p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_swaps_v01_and_v11() {
        let amps = vec![c(0.1, 0.0), c(0.2, 0.3), c(0.4, 0.0), c(0.5, -0.1)];
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<_> = amps.into_iter().map(|a| a / norm).collect();
        let mut s = StateVector::from_amplitudes(amps.clone()).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes(), &[amps[0], amps[3], amps[2], amps[1]]);
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes(), &amps[..]);
    }

    #[test]
    fn cnot_maps_basis_01_to_11() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_single(GateKind::Ry(PI), 0).unwrap(); // |01⟩
        s.apply_cnot(0, 1).unwrap();
        let p = s.probabilities();
        assert!((p[0b11] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gate_argument_errors() {
        let mut s = StateVector::zero_state(2).unwrap();
        assert!(matches!(s.apply_single(GateKind::H, 2), Err(crate::Error::Usage(_))));
        assert!(matches!(s.apply_cnot(1, 1), Err(crate::Error::Usage(_))));
        assert!(matches!(s.apply_cnot(0, 5), Err(crate::Error::Usage(_))));
        assert!(matches!(
            s.apply_single(GateKind::Cnot { control: 0, target: 1 }, 0),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let s = StateVector::from_amplitudes(vec![c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(s.n_qubits(), 1);
    }
}
