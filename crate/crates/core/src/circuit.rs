//! Parameterized circuit IR and the builders for the feature maps and ansatz.
//!
//! Gates carry symbolic angles ([`Param`]) that refer to model inputs `x_i`
//! and trainable weights `w_j`. [`Circuit::bind`] evaluates every angle and
//! yields concrete gates that can be run on a [`StateVector`].

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{config, usage};
use crate::statevector::{GateKind, StateVector};
use crate::Result;

/// Derived angle expressions used by the feature maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expr {
    /// `scale * x_input + offset`
    Affine { input: usize, scale: f64, offset: f64 },
    /// `scale * (shift - x_a) * (shift - x_b)`
    ShiftedProduct {
        inputs: [usize; 2],
        scale: f64,
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Input(usize),
    Weight(usize),
    Constant(f64),
    Expr(Expr),
}

impl Param {
    pub fn eval(&self, inputs: &[f64], weights: &[f64]) -> f64 {
        match *self {
            Param::Input(i) => inputs[i],
            Param::Weight(j) => weights[j],
            Param::Constant(v) => v,
            Param::Expr(Expr::Affine {
                input,
                scale,
                offset,
            }) => scale * inputs[input] + offset,
            Param::Expr(Expr::ShiftedProduct {
                inputs: [a, b],
                scale,
                shift,
            }) => scale * (shift - inputs[a]) * (shift - inputs[b]),
        }
    }

    /// One past the largest input index referenced, or 0.
    fn input_arity(&self) -> usize {
        match *self {
            Param::Input(i) => i + 1,
            Param::Expr(Expr::Affine { input, .. }) => input + 1,
            Param::Expr(Expr::ShiftedProduct { inputs: [a, b], .. }) => a.max(b) + 1,
            Param::Weight(_) | Param::Constant(_) => 0,
        }
    }

    fn weight_arity(&self) -> usize {
        match *self {
            Param::Weight(j) => j + 1,
            _ => 0,
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == PI {
        f.write_str("pi")
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Param::Input(i) => write!(f, "x{i}"),
            Param::Weight(j) => write!(f, "w{j}"),
            Param::Constant(v) => write_num(f, v),
            Param::Expr(Expr::Affine {
                input,
                scale,
                offset,
            }) => {
                write_num(f, scale)?;
                write!(f, "*x{input}")?;
                if offset < 0.0 {
                    f.write_str("-")?;
                    write_num(f, -offset)
                } else if offset > 0.0 {
                    f.write_str("+")?;
                    write_num(f, offset)
                } else {
                    Ok(())
                }
            }
            Param::Expr(Expr::ShiftedProduct {
                inputs: [a, b],
                scale,
                shift,
            }) => {
                write_num(f, scale)?;
                f.write_str("*(")?;
                write_num(f, shift)?;
                write!(f, "-x{a})*(")?;
                write_num(f, shift)?;
                write!(f, "-x{b})")
            }
        }
    }
}

/// A gate with angle type `A`: [`Param`] while symbolic, `f64` once bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<A> {
    H { qubit: usize },
    Phase { qubit: usize, angle: A },
    Ry { qubit: usize, angle: A },
    Cnot { control: usize, target: usize },
}

pub type BoundGate = Gate<f64>;

impl<A> Gate<A> {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H { .. } => "h",
            Gate::Phase { .. } => "p",
            Gate::Ry { .. } => "ry",
            Gate::Cnot { .. } => "cx",
        }
    }

    /// Operand qubits; for CNOT `[control, target]`.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit } | Gate::Phase { qubit, .. } | Gate::Ry { qubit, .. } => {
                alloc::vec![qubit]
            }
            Gate::Cnot { control, target } => alloc::vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<&A> {
        match self {
            Gate::Phase { angle, .. } | Gate::Ry { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn map_angle<B>(&self, f: impl FnOnce(&A) -> B) -> Gate<B> {
        match self {
            Gate::H { qubit } => Gate::H { qubit: *qubit },
            Gate::Phase { qubit, angle } => Gate::Phase {
                qubit: *qubit,
                angle: f(angle),
            },
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit: *qubit,
                angle: f(angle),
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: *control,
                target: *target,
            },
        }
    }
}

impl BoundGate {
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::H { qubit } => state.apply_single(GateKind::H, qubit),
            Gate::Phase { qubit, angle } => state.apply_single(GateKind::Phase(angle), qubit),
            Gate::Ry { qubit, angle } => state.apply_single(GateKind::Ry(angle), qubit),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
        }
    }
}

/// Runs bound gates on `|0…0⟩`.
pub fn simulate(n_qubits: usize, gates: &[BoundGate]) -> Result<StateVector> {
    let mut state = StateVector::zero_state(n_qubits)?;
    for gate in gates {
        gate.apply_to(&mut state)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate<Param>>,
}

impl Circuit {
    /// An empty circuit on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(config!("a circuit needs at least one qubit"));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate<Param>) -> Result<()> {
        let qubits = gate.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(usage!(
                "gate {} uses qubit {q} on a {}-qubit circuit",
                gate.name(),
                self.n_qubits
            ));
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(usage!("CNOT control and target are both qubit {control}"));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    fn with_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate<Param>>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate<Param>] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of inputs `x_i` the circuit reads.
    pub fn n_inputs(&self) -> usize {
        self.params().map(Param::input_arity).max().unwrap_or(0)
    }

    /// Number of weights `w_j` the circuit reads.
    pub fn n_weights(&self) -> usize {
        self.params().map(Param::weight_arity).max().unwrap_or(0)
    }

    fn params(&self) -> impl Iterator<Item = &Param> {
        self.gates.iter().filter_map(Gate::angle)
    }

    /// `self` followed by `back`.
    pub fn concat(&self, back: &Circuit) -> Result<Circuit> {
        if self.n_qubits != back.n_qubits {
            return Err(usage!(
                "cannot concatenate a {}-qubit circuit with a {}-qubit circuit",
                self.n_qubits,
                back.n_qubits
            ));
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&back.gates);
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
        })
    }

    /// Evaluates every angle. Array lengths must equal the circuit's arity.
    pub fn bind(&self, inputs: &[f64], weights: &[f64]) -> Result<Vec<BoundGate>> {
        let (ni, nw) = (self.n_inputs(), self.n_weights());
        if inputs.len() != ni {
            return Err(usage!("circuit takes {ni} inputs, got {}", inputs.len()));
        }
        if weights.len() != nw {
            return Err(usage!("circuit takes {nw} weights, got {}", weights.len()));
        }
        Ok(self
            .gates
            .iter()
            .map(|g| g.map_angle(|p| p.eval(inputs, weights)))
            .collect())
    }

    /// Binds and runs the circuit from `|0…0⟩`.
    pub fn run(&self, inputs: &[f64], weights: &[f64]) -> Result<StateVector> {
        simulate(self.n_qubits, &self.bind(inputs, weights)?)
    }
}

/// Angle scales for the benchmark ZZ-style feature map: per-qubit phases are
/// `single * x_i` and the entangling phase is `pair * (π - x0)(π - x1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkAngles {
    pub single: f64,
    pub pair: f64,
}

impl Default for BenchmarkAngles {
    fn default() -> Self {
        Self {
            single: 2.0,
            pair: 2.0,
        }
    }
}

/// Input rescale used by the enhanced feature map's RY angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rescale {
    /// `2x - 1.5`, mapping `[0, 1]` onto `[-1.5, 0.5]`.
    #[default]
    Standard,
    /// `3x - 1.5`, mapping `[0, 1]` onto `[-1.5, 1.5]`.
    Wide,
}

impl Rescale {
    pub fn expr(self, input: usize) -> Param {
        let scale = match self {
            Rescale::Standard => 2.0,
            Rescale::Wide => 3.0,
        };
        Param::Expr(Expr::Affine {
            input,
            scale,
            offset: -1.5,
        })
    }
}

fn require_two_qubits(n_qubits: usize, what: &str) -> Result<()> {
    if n_qubits != 2 {
        return Err(config!("{what} is only defined for 2 qubits, got {n_qubits}"));
    }
    Ok(())
}

/// The 7-gate ZZ-style feature map with the default angle convention.
pub fn benchmark_feature_map(n_qubits: usize) -> Result<Circuit> {
    benchmark_feature_map_with(n_qubits, BenchmarkAngles::default())
}

pub fn benchmark_feature_map_with(n_qubits: usize, angles: BenchmarkAngles) -> Result<Circuit> {
    require_two_qubits(n_qubits, "the benchmark feature map")?;
    let single = |i: usize| Param::Expr(Expr::Affine {
        input: i,
        scale: angles.single,
        offset: 0.0,
    });
    Circuit::with_gates(
        2,
        [
            Gate::H { qubit: 0 },
            Gate::H { qubit: 1 },
            Gate::Phase { qubit: 0, angle: single(0) },
            Gate::Phase { qubit: 1, angle: single(1) },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Phase {
                qubit: 1,
                angle: Param::Expr(Expr::ShiftedProduct {
                    inputs: [0, 1],
                    scale: angles.pair,
                    shift: PI,
                }),
            },
            Gate::Cnot { control: 0, target: 1 },
        ],
    )
}

/// The 5-gate enhanced feature map: `H⊗H`, then `RY(rescale(x_i))` on each
/// qubit, then `CNOT(q0 → q1)`.
pub fn enhanced_feature_map(n_qubits: usize, rescale: Rescale) -> Result<Circuit> {
    require_two_qubits(n_qubits, "the enhanced feature map")?;
    Circuit::with_gates(
        2,
        [
            Gate::H { qubit: 0 },
            Gate::H { qubit: 1 },
            Gate::Ry { qubit: 0, angle: rescale.expr(0) },
            Gate::Ry { qubit: 1, angle: rescale.expr(1) },
            Gate::Cnot { control: 0, target: 1 },
        ],
    )
}

/// RealAmplitudes-style ansatz: an RY layer, then `reps` times
/// `[CNOT(q0 → q1), RY layer]`. Weights are layer-major, qubit-minor.
pub fn real_amplitudes(n_qubits: usize, reps: usize) -> Result<Circuit> {
    require_two_qubits(n_qubits, "the RealAmplitudes ansatz")?;
    if reps < 1 {
        return Err(config!("RealAmplitudes needs at least one repetition"));
    }
    let mut c = Circuit::new(n_qubits)?;
    let mut next = 0;
    let mut layer = |c: &mut Circuit| -> Result<()> {
        for qubit in 0..n_qubits {
            c.push(Gate::Ry {
                qubit,
                angle: Param::Weight(next),
            })?;
            next += 1;
        }
        Ok(())
    };
    layer(&mut c)?;
    for _ in 0..reps {
        c.push(Gate::Cnot { control: 0, target: 1 })?;
        layer(&mut c)?;
    }
    Ok(c)
}

/// Feature map of the one-qubit model: `H` then `RY(x0)`.
pub fn single_qubit_feature_map() -> Circuit {
    Circuit {
        n_qubits: 1,
        gates: alloc::vec![
            Gate::H { qubit: 0 },
            Gate::Ry { qubit: 0, angle: Param::Input(0) },
        ],
    }
}

/// Variational part of the one-qubit model: `RY(w0)`.
pub fn single_qubit_variational() -> Circuit {
    Circuit {
        n_qubits: 1,
        gates: alloc::vec![Gate::Ry { qubit: 0, angle: Param::Weight(0) }],
    }
}

/// Text diagram, one line per qubit, one column per gate.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<String> = (0..self.n_qubits)
            .map(|q| alloc::format!("q{q}: "))
            .collect();
        let pad = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        for r in &mut rows {
            while r.len() < pad {
                r.push(' ');
            }
            r.push('─');
        }
        for gate in &self.gates {
            let mut labels: Vec<Option<String>> = alloc::vec![None; self.n_qubits];
            match gate {
                Gate::H { qubit } => labels[*qubit] = Some("H".into()),
                Gate::Phase { qubit, angle } => {
                    labels[*qubit] = Some(alloc::format!("P({angle})"))
                }
                Gate::Ry { qubit, angle } => {
                    labels[*qubit] = Some(alloc::format!("RY({angle})"))
                }
                Gate::Cnot { control, target } => {
                    labels[*control] = Some("●".into());
                    labels[*target] = Some("X".into());
                    let (lo, hi) = (*control.min(target), *control.max(target));
                    for l in &mut labels[lo + 1..hi] {
                        *l = Some("│".into());
                    }
                }
            }
            let width = labels
                .iter()
                .flatten()
                .map(|l| l.chars().count())
                .max()
                .unwrap_or(1);
            for (row, label) in rows.iter_mut().zip(&labels) {
                let text = label.as_deref().unwrap_or("");
                row.push_str(text);
                for _ in text.chars().count()..width {
                    row.push('─');
                }
                row.push('─');
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            f.write_str(row.trim_end_matches(' '))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::Complex;

    fn count(c: &Circuit, name: &str) -> usize {
        c.gates().iter().filter(|g| g.name() == name).count()
    }

    #[test]
    fn benchmark_structure() {
        let fm = benchmark_feature_map(2).unwrap();
        assert_eq!(fm.gate_count(), 7);
        assert_eq!(count(&fm, "cx"), 2);
        assert_eq!(count(&fm, "h"), 2);
        assert_eq!(fm.n_inputs(), 2);
        assert_eq!(fm.n_weights(), 0);
    }

    #[test]
    fn benchmark_middle_phase_vanishes_at_pi() {
        let gates = benchmark_feature_map(2).unwrap().bind(&[PI, PI], &[]).unwrap();
        assert_eq!(gates[5], Gate::Phase { qubit: 1, angle: 0.0 });
    }

    #[test]
    fn efm_structure_and_angles() {
        let efm = enhanced_feature_map(2, Rescale::Standard).unwrap();
        assert_eq!(efm.gate_count(), 5);
        let at0 = efm.bind(&[0.0, 1.0], &[]).unwrap();
        assert_eq!(at0[2], Gate::Ry { qubit: 0, angle: -1.5 });
        assert_eq!(at0[3], Gate::Ry { qubit: 1, angle: 0.5 });
        let at1 = efm.bind(&[1.0, 1.0], &[]).unwrap();
        assert_eq!(at1[2].angle(), Some(&0.5));
        assert_eq!(at1[3].angle(), Some(&0.5));

        let wide = enhanced_feature_map(2, Rescale::Wide).unwrap();
        let g = wide.bind(&[1.0, 0.0], &[]).unwrap();
        assert_eq!(g[2].angle(), Some(&1.5));
        assert_eq!(g[3].angle(), Some(&-1.5));
    }

    #[test]
    fn efm_at_three_quarters_is_uniform() {
        let s = enhanced_feature_map(2, Rescale::Standard)
            .unwrap()
            .run(&[0.75, 0.75], &[])
            .unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn real_amplitudes_counts() {
        for (reps, gates, weights) in [(1, 5, 4), (2, 8, 6), (3, 11, 8)] {
            let ra = real_amplitudes(2, reps).unwrap();
            assert_eq!(ra.gate_count(), gates);
            assert_eq!(ra.n_weights(), weights);
            assert_eq!(ra.n_inputs(), 0);
        }
        assert!(matches!(real_amplitudes(2, 0), Err(crate::Error::Config(_))));
    }

    #[test]
    fn real_amplitudes_weight_layout() {
        let ra = real_amplitudes(2, 3).unwrap();
        let ry: Vec<_> = ra
            .gates()
            .iter()
            .filter_map(|g| match g {
                Gate::Ry { qubit, angle: Param::Weight(j) } => Some((*j, *qubit)),
                _ => None,
            })
            .collect();
        for (j, q) in ry {
            assert_eq!(j % 2, q);
        }
    }

    #[test]
    fn real_amplitudes_zero_weights_bind_to_zero() {
        let g = real_amplitudes(2, 1).unwrap().bind(&[], &[0.0; 4]).unwrap();
        assert!(g.iter().filter_map(Gate::angle).all(|&a| a == 0.0));
    }

    #[test]
    fn builders_reject_other_sizes() {
        assert!(matches!(benchmark_feature_map(3), Err(crate::Error::Config(_))));
        assert!(matches!(enhanced_feature_map(1, Rescale::Standard), Err(crate::Error::Config(_))));
    }

    #[test]
    fn concat_counts() {
        let efm = enhanced_feature_map(2, Rescale::Standard).unwrap();
        let bench = benchmark_feature_map(2).unwrap();
        assert_eq!(efm.concat(&real_amplitudes(2, 1).unwrap()).unwrap().gate_count(), 10);
        assert_eq!(bench.concat(&real_amplitudes(2, 3).unwrap()).unwrap().gate_count(), 18);
        let empty = Circuit::new(2).unwrap();
        assert_eq!(empty.gate_count(), 0);
        assert_eq!(efm.concat(&empty).unwrap(), efm);
        assert!(matches!(
            efm.concat(&single_qubit_variational()),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn bind_checks_arity() {
        let efm = enhanced_feature_map(2, Rescale::Standard).unwrap();
        assert!(matches!(efm.bind(&[0.1], &[]), Err(crate::Error::Usage(_))));
        assert!(matches!(efm.bind(&[0.1, 0.2], &[1.0]), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn push_validates_operands() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(Gate::H { qubit: 2 }).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 0 }).is_ok());
    }

    #[test]
    fn expression_display() {
        let fm = benchmark_feature_map(2).unwrap();
        let angles: Vec<String> = fm
            .gates()
            .iter()
            .filter_map(|g| g.angle().map(|a| alloc::format!("{a}")))
            .collect();
        assert_eq!(angles, ["2*x0", "2*x1", "2*(pi-x0)*(pi-x1)"]);
        assert_eq!(alloc::format!("{}", Rescale::Standard.expr(1)), "2*x1-1.5");
    }

    #[test]
    fn diagram_has_one_line_per_qubit() {
        let text = alloc::format!("{}", enhanced_feature_map(2, Rescale::Standard).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("q0: ─H─"));
        assert!(lines[0].contains('●'));
        assert!(lines[1].contains('X'));
        assert_eq!(lines[0].chars().count(), lines[1].chars().count());
    }
}
