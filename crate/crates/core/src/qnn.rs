//! QNN models: feature map, variational circuit and a measurement head.
//!
//! Two heads are supported. `Regression` returns the parity expectation
//! `y' = P(even) - P(odd)`, which on one qubit is `ρ0² - ρ1²`.
//! `ClassifierParity` returns `(P(even), P(odd))` as the probabilities of
//! class 0 and class 1, where parity counts the 1-bits of the basis index.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::circuit::{
    benchmark_feature_map, enhanced_feature_map, real_amplitudes, simulate,
    single_qubit_feature_map, single_qubit_variational, BoundGate, Circuit, Gate, Param, Rescale,
};
use crate::data::{Dataset, DatasetKind, Target};
use crate::error::usage;
use crate::math;
use crate::optim::Objective;
use crate::{Error, Result};

/// Lower clamp applied to probabilities before taking a logarithm.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Regression,
    ClassifierParity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Regression(f64),
    /// `[P(class 0), P(class 1)]`
    Classes([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    SquaredError,
    CrossEntropy,
}

/// What a prediction is scored against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    Value(f64),
    /// `[p0, p1]`
    Probs([f64; 2]),
}

impl From<Target> for Expected {
    fn from(t: Target) -> Self {
        match t {
            Target::Value(y) => Expected::Value(y),
            Target::Label(0) => Expected::Probs([1.0, 0.0]),
            Target::Label(_) => Expected::Probs([0.0, 1.0]),
        }
    }
}

/// `[Σ even-parity probs, Σ odd-parity probs]`
pub fn parity_probabilities(probs: &[f64]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (k, p) in probs.iter().enumerate() {
        out[(k.count_ones() & 1) as usize] += p;
    }
    out
}

/// The models the toolkit knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// One qubit: `H`, `RY(x)`, `RY(w)`, regression head.
    SingleQubit,
    /// ZZ-style feature map + 3-rep RealAmplitudes.
    Benchmark,
    Eqnn1,
    Eqnn2,
    Eqnn3,
}

impl ModelKind {
    pub const CLASSIFIERS: [ModelKind; 4] = [
        ModelKind::Benchmark,
        ModelKind::Eqnn1,
        ModelKind::Eqnn2,
        ModelKind::Eqnn3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SingleQubit => "simplified",
            ModelKind::Benchmark => "benchmark",
            ModelKind::Eqnn1 => "eqnn1",
            ModelKind::Eqnn2 => "eqnn2",
            ModelKind::Eqnn3 => "eqnn3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ModelKind::SingleQubit,
            ModelKind::Benchmark,
            ModelKind::Eqnn1,
            ModelKind::Eqnn2,
            ModelKind::Eqnn3,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    pub fn build(self, rescale: Rescale) -> Result<QnnModel> {
        match self {
            ModelKind::SingleQubit => QnnModel::new(
                single_qubit_feature_map(),
                single_qubit_variational(),
                Head::Regression,
            ),
            ModelKind::Benchmark => QnnModel::new(
                benchmark_feature_map(2)?,
                real_amplitudes(2, 3)?,
                Head::ClassifierParity,
            ),
            ModelKind::Eqnn1 | ModelKind::Eqnn2 | ModelKind::Eqnn3 => {
                let reps = match self {
                    ModelKind::Eqnn1 => 1,
                    ModelKind::Eqnn2 => 2,
                    _ => 3,
                };
                QnnModel::new(
                    enhanced_feature_map(2, rescale)?,
                    real_amplitudes(2, reps)?,
                    Head::ClassifierParity,
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnnModel {
    feature_map: Circuit,
    variational: Circuit,
    head: Head,
    full: Circuit,
}

impl QnnModel {
    pub fn new(feature_map: Circuit, variational: Circuit, head: Head) -> Result<Self> {
        if variational.n_inputs() != 0 {
            return Err(usage!("the variational circuit must not read inputs"));
        }
        if feature_map.n_weights() != 0 {
            return Err(usage!("the feature map must not read weights"));
        }
        let full = feature_map.concat(&variational)?;
        Ok(Self {
            feature_map,
            variational,
            head,
            full,
        })
    }

    pub fn feature_map(&self) -> &Circuit {
        &self.feature_map
    }

    pub fn variational(&self) -> &Circuit {
        &self.variational
    }

    /// Feature map followed by the variational circuit.
    pub fn circuit(&self) -> &Circuit {
        &self.full
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn n_inputs(&self) -> usize {
        self.feature_map.n_inputs()
    }

    pub fn n_weights(&self) -> usize {
        self.variational.n_weights()
    }

    fn predict_from(&self, gates: &[BoundGate]) -> Result<Prediction> {
        let [even, odd] = self.parity_at(gates)?;
        Ok(match self.head {
            Head::Regression => Prediction::Regression(even - odd),
            Head::ClassifierParity => Prediction::Classes([even, odd]),
        })
    }

    pub fn forward(&self, x: &[f64], w: &[f64]) -> Result<Prediction> {
        self.predict_from(&self.full.bind(x, w)?)
    }

    /// Class with the larger probability; an exact tie goes to class 0.
    pub fn predict_class(&self, x: &[f64], w: &[f64]) -> Result<u8> {
        match self.forward(x, w)? {
            Prediction::Classes(p) => Ok(class_of(p)),
            Prediction::Regression(_) => Err(usage!("predict_class needs a classifier head")),
        }
    }

    /// Positions in the full circuit of the RY gates driven directly by a
    /// weight, paired with that weight's index. Any other use of a weight is
    /// rejected, since the ±π/2 shift rule would not apply to it.
    fn shiftable_gates(&self) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for (pos, gate) in self.full.gates().iter().enumerate() {
            match gate {
                Gate::Ry {
                    angle: Param::Weight(j),
                    ..
                } => out.push((pos, *j)),
                Gate::Phase {
                    angle: Param::Weight(_),
                    ..
                } => {
                    return Err(Error::UnsupportedModel(alloc::format!(
                        "gate {pos} is a weight-driven phase gate; only RY weights are differentiable"
                    )))
                }
                _ => {}
            }
        }
        Ok(out)
    }

    /// `∂y'/∂w_j` by the parameter-shift rule, where `y'` is the parity
    /// expectation `P(even) - P(odd)`.
    pub fn expectation_gradient(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let shifts = self.shiftable_gates()?;
        let mut gates = self.full.bind(x, w)?;
        let mut grad = vec![0.0; w.len()];
        for &(pos, j) in &shifts {
            let [plus, minus] = shifted_parity(self, &mut gates, pos)?;
            grad[j] += ((plus[0] - plus[1]) - (minus[0] - minus[1])) / 2.0;
        }
        Ok(grad)
    }

    fn parity_at(&self, gates: &[BoundGate]) -> Result<[f64; 2]> {
        let state = simulate(self.full.n_qubits(), gates)?;
        let mut out = [0.0; 2];
        for (k, a) in state.amplitudes().iter().enumerate() {
            out[(k.count_ones() & 1) as usize] += a.norm_sqr();
        }
        Ok(out)
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if dataset.is_empty() {
            return Err(usage!("dataset is empty"));
        }
        if dataset.n_features() != self.n_inputs() {
            return Err(usage!(
                "dataset has {} features but the model takes {} inputs",
                dataset.n_features(),
                self.n_inputs()
            ));
        }
        Ok(())
    }
}

fn class_of(p: [f64; 2]) -> u8 {
    if p[1] > p[0] {
        1
    } else {
        0
    }
}

/// Parity probabilities with the RY gate at `pos` shifted by `+π/2` and
/// `-π/2`. `gates` is restored before returning.
fn shifted_parity(
    model: &QnnModel,
    gates: &mut [BoundGate],
    pos: usize,
) -> Result<[[f64; 2]; 2]> {
    let Gate::Ry { angle, .. } = gates[pos] else {
        return Err(usage!("gate {pos} is not an RY gate"));
    };
    let mut out = [[0.0; 2]; 2];
    for (slot, delta) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
        gates[pos] = gates[pos].map_angle(|_| angle + delta);
        let r = model.parity_at(gates);
        gates[pos] = gates[pos].map_angle(|_| angle);
        out[slot] = r?;
    }
    Ok(out)
}

/// Per-sample loss. Squared error pairs a regression prediction with a
/// value; cross-entropy pairs class probabilities with target probabilities
/// and uses the natural log, clamping probabilities at [`PROB_EPSILON`].
pub fn loss(pred: Prediction, target: Expected, kind: LossKind) -> Result<f64> {
    match (kind, pred, target) {
        (LossKind::SquaredError, Prediction::Regression(y_hat), Expected::Value(y)) => {
            Ok((y_hat - y) * (y_hat - y))
        }
        (LossKind::CrossEntropy, Prediction::Classes(rho), Expected::Probs(p)) => Ok(-(p[0]
            * math::ln(rho[0].max(PROB_EPSILON))
            + p[1] * math::ln(rho[1].max(PROB_EPSILON)))),
        _ => Err(usage!(
            "{kind:?} cannot score a {pred:?} prediction against {target:?}"
        )),
    }
}

/// Mean per-sample loss, summed sequentially in dataset order.
pub fn batch_loss(model: &QnnModel, w: &[f64], dataset: &Dataset, kind: LossKind) -> Result<f64> {
    model.check_dataset(dataset)?;
    let mut total = 0.0;
    for s in dataset.samples() {
        total += loss(model.forward(&s.features, w)?, s.target.into(), kind)?;
    }
    Ok(total / dataset.len() as f64)
}

/// Fraction of samples whose predicted class matches the label.
pub fn accuracy(model: &QnnModel, w: &[f64], dataset: &Dataset) -> Result<f64> {
    model.check_dataset(dataset)?;
    if dataset.kind() != DatasetKind::Classification {
        return Err(usage!("accuracy needs a classification dataset"));
    }
    let mut correct = 0usize;
    for s in dataset.samples() {
        if let Target::Label(label) = s.target {
            if model.predict_class(&s.features, w)? == label {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Gradient of [`batch_loss`] with respect to the weights.
///
/// Each circuit-level derivative comes from the shift rule
/// `(f(θ + π/2) - f(θ - π/2)) / 2` applied to every RY gate a weight drives;
/// the loss's outer derivative is applied analytically to those values.
pub fn parameter_shift_gradient(
    model: &QnnModel,
    dataset: &Dataset,
    kind: LossKind,
    w: &[f64],
) -> Result<Vec<f64>> {
    model.check_dataset(dataset)?;
    let shifts = model.shiftable_gates()?;
    let mut grad = vec![0.0; w.len()];
    for s in dataset.samples() {
        let mut gates = model.full.bind(&s.features, w)?;
        let base = model.parity_at(&gates)?;
        let target = Expected::from(s.target);
        // dL/d(parity probabilities)
        let outer: [f64; 2] = match (kind, model.head, target) {
            (LossKind::SquaredError, Head::Regression, Expected::Value(y)) => {
                let d = 2.0 * ((base[0] - base[1]) - y);
                [d, -d]
            }
            (LossKind::CrossEntropy, Head::ClassifierParity, Expected::Probs(p)) => {
                let d = |c: usize| {
                    if base[c] > PROB_EPSILON {
                        -p[c] / base[c]
                    } else {
                        0.0
                    }
                };
                [d(0), d(1)]
            }
            _ => {
                return Err(usage!(
                    "{kind:?} loss does not match the model head {:?} and target {target:?}",
                    model.head
                ))
            }
        };
        for &(pos, j) in &shifts {
            let [plus, minus] = shifted_parity(model, &mut gates, pos)?;
            grad[j] += outer[0] * (plus[0] - minus[0]) / 2.0 + outer[1] * (plus[1] - minus[1]) / 2.0;
        }
    }
    let n = dataset.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok(grad)
}

/// A model, a dataset and a loss packaged as an [`Objective`] over weights.
#[derive(Debug, Clone)]
pub struct QnnObjective<'a> {
    model: &'a QnnModel,
    dataset: &'a Dataset,
    kind: LossKind,
}

impl<'a> QnnObjective<'a> {
    pub fn new(model: &'a QnnModel, dataset: &'a Dataset, kind: LossKind) -> Result<Self> {
        model.check_dataset(dataset)?;
        let compatible = matches!(
            (kind, model.head(), dataset.kind()),
            (LossKind::SquaredError, Head::Regression, DatasetKind::Regression)
                | (LossKind::CrossEntropy, Head::ClassifierParity, DatasetKind::Classification)
        );
        if !compatible {
            return Err(usage!(
                "{kind:?} loss, {:?} head and {} data do not go together",
                model.head(),
                dataset.kind().as_str()
            ));
        }
        Ok(Self {
            model,
            dataset,
            kind,
        })
    }
}

impl Objective for QnnObjective<'_> {
    fn dim(&self) -> usize {
        self.model.n_weights()
    }

    fn eval(&self, w: &[f64]) -> Result<f64> {
        batch_loss(self.model, w, self.dataset, self.kind)
    }

    fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        parameter_shift_gradient(self.model, self.dataset, self.kind, w)
    }
}
