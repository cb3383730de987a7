use serde::Serialize;

use eqnn::circuit::{Circuit, Gate};
use eqnn::qnn::{ModelKind, QnnModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub feature_map: usize,
    pub variational: usize,
    pub total: usize,
}

impl GateCounts {
    pub fn of(model: &QnnModel) -> Self {
        let feature_map = model.feature_map().gate_count();
        let variational = model.variational().gate_count();
        Self {
            feature_map,
            variational,
            total: feature_map + variational,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateCountRow {
    pub model: &'static str,
    #[serde(flatten)]
    pub counts: GateCounts,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateCountTable {
    pub schema: u32,
    pub models: Vec<GateCountRow>,
}

impl GateCountTable {
    pub fn new(models: &[ModelKind]) -> eqnn::Result<Self> {
        let models = models
            .iter()
            .map(|&m| {
                Ok(GateCountRow {
                    model: m.name(),
                    counts: GateCounts::of(&m.build(Default::default())?),
                })
            })
            .collect::<eqnn::Result<_>>()?;
        Ok(Self {
            schema: SCHEMA_VERSION,
            models,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<12}{:>12}{:>12}{:>8}\n", "model", "feature_map", "variational", "total");
        for row in &self.models {
            out.push_str(&format!(
                "{:<12}{:>12}{:>12}{:>8}\n",
                row.model, row.counts.feature_map, row.counts.variational, row.counts.total
            ));
        }
        out
    }
}

/// One training run. Everything except `wall_time` is a deterministic
/// function of the command's flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub model: String,
    pub optimizer: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub dataset: DatasetInfo,
    pub rescale: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub gate_counts: GateCounts,
    pub iterations: usize,
    pub evaluations: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    pub loss_history: Vec<f64>,
    pub trained_weights: Vec<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub generator: String,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateJson {
    pub gate: &'static str,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub n_inputs: usize,
    pub n_weights: usize,
    pub gate_count: usize,
    pub gates: Vec<GateJson>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        Self {
            n_qubits: c.n_qubits(),
            n_inputs: c.n_inputs(),
            n_weights: c.n_weights(),
            gate_count: c.gate_count(),
            gates: c
                .gates()
                .iter()
                .map(|g: &Gate<_>| GateJson {
                    gate: g.name(),
                    qubits: g.qubits(),
                    angle: g.angle().map(|a| a.to_string()),
                })
                .collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
