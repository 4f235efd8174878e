//! The quantum learning model: layered two-qubit entangling nodes with a
//! final Euler rotation per qubit.
//!
//! Each node consumes 9 consecutive parameters: an Euler triple on qubit_a,
//! an Euler triple on qubit_b, then a Heisenberg triple on the pair. An Euler
//! triple (t1, t2, t3) applies Rx(t1), Rz(t2), Rx(t3) in circuit order; a
//! Heisenberg triple applies Rxx(t1), Ryy(t2), Rzz(t3). All angles at zero
//! give the identity.
//!
//! Input bits occupy qubits 0..Nx-1 (bit i of z on qubit i); output qubits
//! are the top Ny wires Nx..Nq-1, initialized to |0>.

mod document;

pub use document::{model_from_json, model_to_json, ModelDocument, FORMAT_VERSION};

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::sim::{Gate, Statevector, MAX_QUBITS};

/// Angles per entangling node (two Euler triples + one Heisenberg triple).
pub const PARAMS_PER_NODE: usize = 9;
/// Angles in the final Euler rotation on each qubit.
pub const PARAMS_PER_FINAL_EULER: usize = 3;

/// One two-qubit entangling node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub qubit_a: usize,
    pub qubit_b: usize,
    /// Index of this node's first angle in the parameter vector.
    pub param_offset: usize,
}

/// The circuit structure: node layers plus one final Euler triple per qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitLayout {
    num_input_qubits: usize,
    num_output_qubits: usize,
    layers: Vec<Vec<NodeSpec>>,
    total_nodes: usize,
}

impl CircuitLayout {
    /// Build a layout from explicit layers of qubit pairs.
    ///
    /// Validates distinct in-range pairs, disjoint pairs within a layer, and
    /// that every qubit appears in at least one node.
    pub fn from_layer_pairs(
        num_input_qubits: usize,
        num_output_qubits: usize,
        layer_pairs: &[Vec<(usize, usize)>],
    ) -> Result<Self> {
        let nq = num_input_qubits + num_output_qubits;
        if num_input_qubits == 0 {
            return Err(Error::invalid("need at least one input qubit"));
        }
        if nq < 2 {
            return Err(Error::invalid(
                "a two-qubit entangling node needs at least 2 qubits in total",
            ));
        }
        if nq > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "{nq} qubits exceeds the supported maximum of {MAX_QUBITS}"
            )));
        }
        let mut layers = Vec::with_capacity(layer_pairs.len());
        let mut seen_qubit = vec![false; nq];
        let mut offset = 0usize;
        for (layer_idx, pairs) in layer_pairs.iter().enumerate() {
            let mut layer = Vec::with_capacity(pairs.len());
            let mut used_in_layer = vec![false; nq];
            for &(a, b) in pairs {
                if a == b {
                    return Err(Error::invalid(format!(
                        "layer {layer_idx}: node qubits must be distinct, got ({a}, {b})"
                    )));
                }
                if a >= nq || b >= nq {
                    return Err(Error::invalid(format!(
                        "layer {layer_idx}: node ({a}, {b}) out of range for {nq} qubits"
                    )));
                }
                if used_in_layer[a] || used_in_layer[b] {
                    return Err(Error::invalid(format!(
                        "layer {layer_idx}: node ({a}, {b}) overlaps another node in the same layer"
                    )));
                }
                used_in_layer[a] = true;
                used_in_layer[b] = true;
                seen_qubit[a] = true;
                seen_qubit[b] = true;
                layer.push(NodeSpec {
                    qubit_a: a,
                    qubit_b: b,
                    param_offset: offset,
                });
                offset += PARAMS_PER_NODE;
            }
            layers.push(layer);
        }
        if let Some(q) = seen_qubit.iter().position(|&s| !s) {
            return Err(Error::invalid(format!(
                "qubit {q} appears in no node; its data would be dead"
            )));
        }
        let total_nodes = offset / PARAMS_PER_NODE;
        Ok(CircuitLayout {
            num_input_qubits,
            num_output_qubits,
            layers,
            total_nodes,
        })
    }

    /// The default brickwork design: odd layers pair (0,1),(2,3),...; even
    /// layers pair (1,2),(3,4),.... Layers that would hold no node (even
    /// layers on 2 qubits) are skipped.
    pub fn brickwork(
        num_input_qubits: usize,
        num_output_qubits: usize,
        num_layers: usize,
    ) -> Result<Self> {
        if num_layers == 0 {
            return Err(Error::invalid("num_layers must be >= 1"));
        }
        let nq = num_input_qubits + num_output_qubits;
        if nq < 2 {
            return Err(Error::invalid(
                "brickwork layout needs Nx + Ny >= 2 for a two-qubit node",
            ));
        }
        let mut layer_pairs = Vec::with_capacity(num_layers);
        for layer in 0..num_layers {
            let start = if layer % 2 == 0 { 0 } else { 1 };
            let pairs: Vec<(usize, usize)> = (start..nq.saturating_sub(1))
                .step_by(2)
                .map(|q| (q, q + 1))
                .collect();
            if !pairs.is_empty() {
                layer_pairs.push(pairs);
            }
        }
        Self::from_layer_pairs(num_input_qubits, num_output_qubits, &layer_pairs)
    }

    /// A layout that contains `small` embedded via `embedding` as its leading
    /// layers, followed by `extra_layers` of full brickwork over all qubits.
    ///
    /// This is the growth layout: the embedded image is a prefix of the node
    /// sequence, so [`QlmModel::grow_from_subnet`] always matches it.
    pub fn embed_extend(
        small: &CircuitLayout,
        embedding: &BTreeMap<usize, usize>,
        num_input_qubits: usize,
        num_output_qubits: usize,
        extra_layers: usize,
    ) -> Result<Self> {
        let nq = num_input_qubits + num_output_qubits;
        check_embedding(embedding, small.num_qubits(), nq)?;
        let mut layer_pairs: Vec<Vec<(usize, usize)>> = Vec::new();
        for layer in &small.layers {
            let pairs: Vec<(usize, usize)> = layer
                .iter()
                .map(|node| (embedding[&node.qubit_a], embedding[&node.qubit_b]))
                .collect();
            if !pairs.is_empty() {
                layer_pairs.push(pairs);
            }
        }
        let brick = Self::brickwork(num_input_qubits, num_output_qubits, extra_layers.max(2))?;
        for layer in &brick.layers {
            layer_pairs.push(
                layer
                    .iter()
                    .map(|node| (node.qubit_a, node.qubit_b))
                    .collect(),
            );
        }
        Self::from_layer_pairs(num_input_qubits, num_output_qubits, &layer_pairs)
    }

    pub fn num_input_qubits(&self) -> usize {
        self.num_input_qubits
    }

    pub fn num_output_qubits(&self) -> usize {
        self.num_output_qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.num_input_qubits + self.num_output_qubits
    }

    pub fn layers(&self) -> &[Vec<NodeSpec>] {
        &self.layers
    }

    pub fn total_nodes(&self) -> usize {
        self.total_nodes
    }

    /// All nodes in application order.
    pub fn node_sequence(&self) -> impl Iterator<Item = &NodeSpec> {
        self.layers.iter().flatten()
    }

    /// parameter_count = 9 * nodes + 3 * Nq.
    pub fn parameter_count(&self) -> usize {
        PARAMS_PER_NODE * self.total_nodes + PARAMS_PER_FINAL_EULER * self.num_qubits()
    }

    /// Offset of qubit `q`'s final Euler triple in the parameter vector.
    pub fn final_euler_offset(&self, q: usize) -> usize {
        PARAMS_PER_NODE * self.total_nodes + PARAMS_PER_FINAL_EULER * q
    }
}

/// The model's trainable angles, in radians, unnormalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        ParameterVector(vec![0.0; len])
    }

    /// Seeded uniform draw from [-pi/2, pi/2); the full period of every
    /// rotation is pi, so this range covers all distinct gates.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_pi = std::f64::consts::FRAC_PI_2;
        ParameterVector((0..len).map(|_| rng.gen_range(-half_pi..half_pi)).collect())
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(ParameterVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.0[idx]
    }

    pub fn set(&mut self, idx: usize, value: f64) {
        self.0[idx] = value;
    }
}

/// What the model is trained to do; decides which qubits are read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Dynamics,
}

/// A parameterized circuit plus its task.
#[derive(Clone, Debug)]
pub struct QlmModel {
    layout: CircuitLayout,
    params: ParameterVector,
    task: Task,
}

impl QlmModel {
    pub fn new(layout: CircuitLayout, params: ParameterVector, task: Task) -> Result<Self> {
        if params.len() != layout.parameter_count() {
            return Err(Error::invalid(format!(
                "parameter vector length {} does not match layout parameter count {}",
                params.len(),
                layout.parameter_count()
            )));
        }
        if task == Task::Dynamics && layout.num_output_qubits() != 0 {
            return Err(Error::Config(
                "dynamics models read all qubits; Ny must be 0".into(),
            ));
        }
        Ok(QlmModel {
            layout,
            params,
            task,
        })
    }

    pub fn layout(&self) -> &CircuitLayout {
        &self.layout
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterVector {
        &mut self.params
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Number of distinct output readings (2^Ny, or 2^Nq for dynamics).
    pub fn num_outputs(&self) -> usize {
        match self.task {
            Task::Classification => 1 << self.layout.num_output_qubits(),
            Task::Dynamics => 1 << self.layout.num_qubits(),
        }
    }

    fn push_euler(gates: &mut Vec<Gate>, qubit: usize, angles: &[f64]) {
        gates.push(Gate::Rx {
            target: qubit,
            angle: angles[0],
        });
        gates.push(Gate::Rz {
            target: qubit,
            angle: angles[1],
        });
        gates.push(Gate::Rx {
            target: qubit,
            angle: angles[2],
        });
    }

    /// The full gate sequence for the current parameters.
    pub fn gate_sequence(&self) -> Vec<Gate> {
        let p = self.params.values();
        let mut gates =
            Vec::with_capacity(self.layout.total_nodes() * 9 + self.layout.num_qubits() * 3);
        for node in self.layout.node_sequence() {
            let o = node.param_offset;
            Self::push_euler(&mut gates, node.qubit_a, &p[o..o + 3]);
            Self::push_euler(&mut gates, node.qubit_b, &p[o + 3..o + 6]);
            gates.push(Gate::Rxx {
                a: node.qubit_a,
                b: node.qubit_b,
                angle: p[o + 6],
            });
            gates.push(Gate::Ryy {
                a: node.qubit_a,
                b: node.qubit_b,
                angle: p[o + 7],
            });
            gates.push(Gate::Rzz {
                a: node.qubit_a,
                b: node.qubit_b,
                angle: p[o + 8],
            });
        }
        for q in 0..self.layout.num_qubits() {
            let o = self.layout.final_euler_offset(q);
            Self::push_euler(&mut gates, q, &p[o..o + 3]);
        }
        gates
    }

    /// Exact output distribution for input bit string `z`.
    ///
    /// Prepares |0...0>|z>, runs the circuit, and returns the marginal over
    /// the output qubits (all qubits for dynamics).
    pub fn forward(&self, z: BitString) -> Result<Vec<f64>> {
        let nx = self.layout.num_input_qubits();
        if z.len() != nx {
            return Err(Error::invalid(format!(
                "input has {} bits but the model expects {nx}",
                z.len()
            )));
        }
        let nq = self.layout.num_qubits();
        let mut state = Statevector::from_basis_index(nq, z.value())?;
        state.apply_all(&self.gate_sequence())?;
        let qubits: Vec<usize> = match self.task {
            Task::Classification => (nx..nq).collect(),
            Task::Dynamics => (0..nq).collect(),
        };
        state.marginal_probabilities(&qubits)
    }

    /// Initialize a larger model from a trained sub-network.
    ///
    /// Nodes of `small` (in sequence order) are matched against the image of
    /// `embedding` inside `large_layout`'s node sequence and copied. Unmatched
    /// nodes touching an embedded qubit are zeroed (identity); nodes disjoint
    /// from the image draw from a seeded uniform [-pi/2, pi/2). Final Euler
    /// triples on embedded qubits are copied, all others zeroed.
    pub fn grow_from_subnet(
        small: &QlmModel,
        large_layout: CircuitLayout,
        embedding: &BTreeMap<usize, usize>,
        seed: u64,
    ) -> Result<QlmModel> {
        let small_nq = small.layout.num_qubits();
        let large_nq = large_layout.num_qubits();
        check_embedding(embedding, small_nq, large_nq)?;

        let mut embedded_qubit = vec![false; large_nq];
        for &lq in embedding.values() {
            embedded_qubit[lq] = true;
        }

        // Greedy leftmost subsequence match of small's node images.
        let small_nodes: Vec<&NodeSpec> = small.layout.node_sequence().collect();
        let large_nodes: Vec<&NodeSpec> = large_layout.node_sequence().collect();
        let mut matched: Vec<Option<usize>> = vec![None; large_nodes.len()];
        let mut next_small = 0usize;
        for (li, lnode) in large_nodes.iter().enumerate() {
            if next_small < small_nodes.len() {
                let snode = small_nodes[next_small];
                if embedding[&snode.qubit_a] == lnode.qubit_a
                    && embedding[&snode.qubit_b] == lnode.qubit_b
                {
                    matched[li] = Some(next_small);
                    next_small += 1;
                }
            }
        }
        if next_small < small_nodes.len() {
            let missing = small_nodes[next_small];
            return Err(Error::StructureMismatch(format!(
                "sub-network node {next_small} on qubits ({}, {}) (embedded as ({}, {})) \
                 has no match in the large layout",
                missing.qubit_a,
                missing.qubit_b,
                embedding[&missing.qubit_a],
                embedding[&missing.qubit_b]
            )));
        }

        let mut params = vec![0.0; large_layout.parameter_count()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_pi = std::f64::consts::FRAC_PI_2;
        for (li, lnode) in large_nodes.iter().enumerate() {
            match matched[li] {
                Some(si) => {
                    let src = small_nodes[si].param_offset;
                    let dst = lnode.param_offset;
                    params[dst..dst + PARAMS_PER_NODE]
                        .copy_from_slice(&small.params.values()[src..src + PARAMS_PER_NODE]);
                }
                None => {
                    let touches_subnet =
                        embedded_qubit[lnode.qubit_a] || embedded_qubit[lnode.qubit_b];
                    if !touches_subnet {
                        let dst = lnode.param_offset;
                        for p in params.iter_mut().skip(dst).take(PARAMS_PER_NODE) {
                            *p = rng.gen_range(-half_pi..half_pi);
                        }
                    }
                    // Nodes touching the sub-network stay at zero (identity).
                }
            }
        }
        for (&sq, &lq) in embedding {
            let src = small.layout.final_euler_offset(sq);
            let dst = large_layout.final_euler_offset(lq);
            params[dst..dst + PARAMS_PER_FINAL_EULER]
                .copy_from_slice(&small.params.values()[src..src + PARAMS_PER_FINAL_EULER]);
        }

        QlmModel::new(
            large_layout,
            ParameterVector::from_values(params)?,
            small.task,
        )
    }
}

fn check_embedding(
    embedding: &BTreeMap<usize, usize>,
    small_nq: usize,
    large_nq: usize,
) -> Result<()> {
    if embedding.len() != small_nq {
        return Err(Error::StructureMismatch(format!(
            "embedding must map all {small_nq} sub-network qubits, got {} entries",
            embedding.len()
        )));
    }
    let mut image = vec![false; large_nq];
    for (&sq, &lq) in embedding {
        if sq >= small_nq {
            return Err(Error::StructureMismatch(format!(
                "embedding key {sq} is not a sub-network qubit"
            )));
        }
        if lq >= large_nq {
            return Err(Error::StructureMismatch(format!(
                "embedding target {lq} out of range for {large_nq} qubits"
            )));
        }
        if image[lq] {
            return Err(Error::StructureMismatch(format!(
                "embedding is not injective: qubit {lq} is hit twice"
            )));
        }
        image[lq] = true;
    }
    Ok(())
}

/// Identity embedding 0->0, 1->1, ... over `n` qubits.
pub fn identity_embedding(n: usize) -> BTreeMap<usize, usize> {
    (0..n).map(|q| (q, q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_model(nx: usize, ny: usize, layers: usize) -> QlmModel {
        let layout = CircuitLayout::brickwork(nx, ny, layers).unwrap();
        let params = ParameterVector::zeros(layout.parameter_count());
        QlmModel::new(layout, params, Task::Classification).unwrap()
    }

    #[test]
    fn brickwork_counting_examples() {
        let layout = CircuitLayout::brickwork(3, 1, 2).unwrap();
        assert_eq!(layout.num_qubits(), 4);
        assert_eq!(layout.total_nodes(), 3);
        assert_eq!(layout.parameter_count(), 39);

        let layout = CircuitLayout::brickwork(1, 1, 1).unwrap();
        assert_eq!(layout.total_nodes(), 1);
        assert_eq!(layout.parameter_count(), 15);
    }

    #[test]
    fn brickwork_16_qubit_count_near_1407() {
        // 16 qubits, 20 layers: 9 * 150 + 48 = 1398 parameters. The exact
        // figure 1407 would need 151 nodes, which no alternating 8/7 brickwork
        // reaches; 20 layers is the closest (one node short).
        let layout = CircuitLayout::brickwork(15, 1, 20).unwrap();
        assert_eq!(layout.parameter_count(), 1398);
        assert!(1407usize.abs_diff(layout.parameter_count()) <= PARAMS_PER_NODE);
    }

    #[test]
    fn brickwork_rejects_too_few_qubits() {
        assert!(CircuitLayout::brickwork(1, 0, 1).is_err());
    }

    #[test]
    fn dead_qubit_rejected() {
        // 3 qubits, single odd layer leaves qubit 2 untouched.
        assert!(CircuitLayout::brickwork(3, 0, 1).is_err());
        let pairs = vec![vec![(0, 1)]];
        assert!(CircuitLayout::from_layer_pairs(3, 0, &pairs).is_err());
    }

    #[test]
    fn overlapping_nodes_in_layer_rejected() {
        let pairs = vec![vec![(0, 1), (1, 2)]];
        assert!(CircuitLayout::from_layer_pairs(3, 0, &pairs).is_err());
    }

    #[test]
    fn forward_identity_at_zero() {
        for (nx, ny) in [(1, 1), (2, 1), (3, 1), (2, 2)] {
            let model = zero_model(nx, ny, 2);
            for value in 0..(1u64 << nx) {
                let z = BitString::new(value, nx).unwrap();
                let probs = model.forward(z).unwrap();
                assert!((probs[0] - 1.0).abs() < 1e-12, "nx={nx} ny={ny} z={z}");
                for p in &probs[1..] {
                    assert!(p.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let model = zero_model(2, 1, 2);
        let z = BitString::new(0, 3).unwrap();
        assert!(model.forward(z).is_err());
    }

    #[test]
    fn parameter_count_formula_random_layouts() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let nx = rng.gen_range(1..6);
            let ny = rng.gen_range(0..3usize);
            if nx + ny < 2 {
                continue;
            }
            let layers = rng.gen_range(2..6);
            let layout = match CircuitLayout::brickwork(nx, ny, layers) {
                Ok(l) => l,
                Err(_) => continue,
            };
            assert_eq!(
                layout.parameter_count(),
                9 * layout.total_nodes() + 3 * layout.num_qubits()
            );
        }
    }

    #[test]
    fn grow_identity_embedding_copies_verbatim() {
        let layout = CircuitLayout::brickwork(2, 1, 2).unwrap();
        let params = ParameterVector::random(layout.parameter_count(), 3);
        let small = QlmModel::new(layout.clone(), params.clone(), Task::Classification).unwrap();
        let grown =
            QlmModel::grow_from_subnet(&small, layout, &identity_embedding(3), 17).unwrap();
        assert_eq!(grown.params().values(), params.values());
    }

    #[test]
    fn grow_rejects_non_injective_embedding() {
        let small = zero_model(1, 1, 1);
        let large = CircuitLayout::brickwork(2, 1, 2).unwrap();
        let mut embedding = BTreeMap::new();
        embedding.insert(0, 1);
        embedding.insert(1, 1);
        let err = QlmModel::grow_from_subnet(&small, large, &embedding, 0).unwrap_err();
        assert_eq!(err.category(), "structure-mismatch");
    }

    #[test]
    fn grow_reports_first_unmatched_node() {
        let small = zero_model(2, 1, 2);
        // Large layout without the even layer: small's (1,2) node cannot match.
        let pairs = vec![vec![(0, 1), (2, 3)], vec![(0, 1), (2, 3)]];
        let large = CircuitLayout::from_layer_pairs(3, 1, &pairs).unwrap();
        let err =
            QlmModel::grow_from_subnet(&small, large, &identity_embedding(3), 0).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("node 1") && msg.contains("(1, 2)"),
            "message should identify the first unmatched node: {msg}"
        );
    }

    #[test]
    fn embed_extend_always_matches() {
        let small_layout = CircuitLayout::brickwork(2, 1, 2).unwrap();
        let params = ParameterVector::random(small_layout.parameter_count(), 11);
        let small = QlmModel::new(small_layout, params, Task::Classification).unwrap();
        let mut embedding = BTreeMap::new();
        embedding.insert(0, 2);
        embedding.insert(1, 0);
        embedding.insert(2, 4);
        let large_layout =
            CircuitLayout::embed_extend(small.layout(), &embedding, 4, 1, 2).unwrap();
        let grown = QlmModel::grow_from_subnet(&small, large_layout, &embedding, 23).unwrap();
        assert_eq!(grown.layout().num_qubits(), 5);
    }
}
