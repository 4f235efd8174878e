//! Versioned JSON document format for models.
//!
//! Schema (format 1.0):
//!
//! ```json
//! {
//!   "format_version": "1.0",
//!   "task": "classification",
//!   "num_input_qubits": 3,
//!   "num_output_qubits": 1,
//!   "layers": [[[0, 1], [2, 3]], [[1, 2]]],
//!   "params": [0.1, ...],
//!   "encoder": { ... }
//! }
//! ```
//!
//! Angles round-trip bit-exactly (serde_json emits shortest-round-trip
//! decimals). Readers accept any 1.x document and reject newer majors.

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderSpec;
use crate::error::{Error, Result};
use crate::model::{CircuitLayout, ParameterVector, QlmModel, Task};

pub const FORMAT_VERSION: &str = "1.0";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: String,
    pub task: String,
    pub num_input_qubits: usize,
    pub num_output_qubits: usize,
    /// Node layers as [qubit_a, qubit_b] pairs, in application order.
    pub layers: Vec<Vec<[usize; 2]>>,
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder: Option<EncoderSpec>,
}

impl ModelDocument {
    pub fn from_model(model: &QlmModel, encoder: Option<EncoderSpec>) -> Self {
        let layers = model
            .layout()
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|node| [node.qubit_a, node.qubit_b])
                    .collect()
            })
            .collect();
        ModelDocument {
            format_version: FORMAT_VERSION.to_string(),
            task: match model.task() {
                Task::Classification => "classification".to_string(),
                Task::Dynamics => "dynamics".to_string(),
            },
            num_input_qubits: model.layout().num_input_qubits(),
            num_output_qubits: model.layout().num_output_qubits(),
            layers,
            params: model.params().values().to_vec(),
            encoder,
        }
    }

    pub fn into_model(self) -> Result<(QlmModel, Option<EncoderSpec>)> {
        check_version(&self.format_version)?;
        let task = match self.task.as_str() {
            "classification" => Task::Classification,
            "dynamics" => Task::Dynamics,
            other => {
                return Err(Error::Parse(format!(
                    "field 'task': unknown kind {other:?} (expected \"classification\" or \"dynamics\")"
                )))
            }
        };
        let layer_pairs: Vec<Vec<(usize, usize)>> = self
            .layers
            .iter()
            .map(|layer| layer.iter().map(|&[a, b]| (a, b)).collect())
            .collect();
        let layout =
            CircuitLayout::from_layer_pairs(self.num_input_qubits, self.num_output_qubits, &layer_pairs)
                .map_err(|e| Error::Parse(format!("field 'layers': {e}")))?;
        if self.params.len() != layout.parameter_count() {
            return Err(Error::Parse(format!(
                "field 'params': expected {} values for this layout, got {}",
                layout.parameter_count(),
                self.params.len()
            )));
        }
        let params = ParameterVector::from_values(self.params)
            .map_err(|e| Error::Parse(format!("field 'params': {e}")))?;
        let model = QlmModel::new(layout, params, task)
            .map_err(|e| Error::Parse(format!("inconsistent document: {e}")))?;
        Ok((model, self.encoder))
    }
}

fn check_version(version: &str) -> Result<()> {
    let major = version
        .split('.')
        .next()
        .and_then(|m| m.parse::<u32>().ok())
        .ok_or_else(|| {
            Error::Parse(format!(
                "field 'format_version': malformed version {version:?}"
            ))
        })?;
    let supported: u32 = FORMAT_VERSION.split('.').next().unwrap().parse().unwrap();
    if major > supported {
        return Err(Error::Parse(format!(
            "field 'format_version': document major version {major} is newer than supported {supported}"
        )));
    }
    Ok(())
}

pub fn model_to_json(model: &QlmModel, encoder: Option<EncoderSpec>) -> String {
    let doc = ModelDocument::from_model(model, encoder);
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

pub fn model_from_json(json: &str) -> Result<(QlmModel, Option<EncoderSpec>)> {
    let doc: ModelDocument =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;

    fn sample_model() -> QlmModel {
        let layout = CircuitLayout::brickwork(2, 1, 2).unwrap();
        let params = ParameterVector::random(layout.parameter_count(), 42);
        QlmModel::new(layout, params, Task::Classification).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample_model();
        let json = model_to_json(&model, None);
        let (restored, encoder) = model_from_json(&json).unwrap();
        assert!(encoder.is_none());
        assert_eq!(restored.params().values(), model.params().values());
        for value in 0..4u64 {
            let z = BitString::new(value, 2).unwrap();
            let a = model.forward(z).unwrap();
            let b = restored.forward(z).unwrap();
            assert_eq!(a, b, "forward must be bit-identical after round trip");
        }
    }

    #[test]
    fn truncated_document_is_parse_error() {
        let model = sample_model();
        let json = model_to_json(&model, None);
        let err = model_from_json(&json[..json.len() / 2]).unwrap_err();
        assert_eq!(err.category(), "parse-error");
    }

    #[test]
    fn unknown_task_kind_is_named() {
        let model = sample_model();
        let json = model_to_json(&model, None).replace("classification", "telepathy");
        let err = model_from_json(&json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("telepathy"), "message should name the kind: {msg}");
    }

    #[test]
    fn newer_major_version_rejected() {
        let model = sample_model();
        let json = model_to_json(&model, None).replace("\"1.0\"", "\"2.0\"");
        let err = model_from_json(&json).unwrap_err();
        assert_eq!(err.category(), "parse-error");
        assert!(err.to_string().contains("format_version"));
    }

    #[test]
    fn wrong_param_count_is_parse_error() {
        let model = sample_model();
        let mut doc = ModelDocument::from_model(&model, None);
        doc.params.pop();
        let json = serde_json::to_string(&doc).unwrap();
        let err = model_from_json(&json).unwrap_err();
        assert!(err.to_string().contains("params"));
    }
}
