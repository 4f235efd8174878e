//! Exact coordinate-update training.
//!
//! The loss is the probability of answering wrong when queried with the
//! empirical input distribution: `L = 1 - sum_z f(z) P[C(z) | z]`, computed
//! from exact simulator probabilities (one forward per distinct z).
//!
//! Every trainable angle enters through exactly one full-angle rotation
//! `exp(-i theta P)`, so the loss restricted to one coordinate is exactly
//! `L(theta) = c + p cos 2(theta - theta0) + q sin 2(theta - theta0)`.
//! Three evaluations at `theta0`, `theta0 +- pi/4` determine (c, p, q); the
//! update jumps to the analytic minimum `theta0 + atan2(-q, -p) / 2` with
//! new loss `c - sqrt(p^2 + q^2)`. Each update can therefore never increase
//! the loss.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::encoder::EncodedDataset;
use crate::error::{Error, Result};
use crate::model::QlmModel;

/// Loss together with the per-input success probabilities it was built from.
#[derive(Clone, Debug)]
pub struct LossEvaluation {
    /// 1 - sum_z f(z) P[C(z) | z], clamped to [0, 1].
    pub loss: f64,
    /// P[C(z) | z] per distinct input.
    pub success_probabilities: BTreeMap<u64, f64>,
}

/// Order in which coordinates are swept within an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    Sequential,
    /// A fresh seeded permutation every epoch (the default; reduces order bias).
    RandomPermutation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub sweep_order: SweepOrder,
    /// Stop when an epoch's total loss decrease falls below this.
    pub epsilon: f64,
    /// Coordinates with sinusoid amplitude below this are left unchanged.
    pub flat_tolerance: f64,
    pub seed: u64,
    /// When set, fit the per-coordinate sinusoid to shot-based loss estimates
    /// instead of exact probabilities. Monotonicity is not guaranteed then.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            sweep_order: SweepOrder::RandomPermutation,
            epsilon: 1e-6,
            flat_tolerance: 1e-12,
            seed: 0,
            shots: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    /// Loss after every coordinate update.
    pub loss_trace: Vec<f64>,
    pub epochs: Vec<EpochMetrics>,
    pub final_loss: f64,
}

impl TrainReport {
    pub fn final_train_accuracy(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_accuracy)
    }

    pub fn final_test_accuracy(&self) -> Option<f64> {
        self.epochs.last().and_then(|e| e.test_accuracy)
    }
}

fn check_compat(model: &QlmModel, data: &EncodedDataset) -> Result<()> {
    let nx = model.layout().num_input_qubits();
    if data.bits() != nx {
        return Err(Error::ArtifactMismatch(format!(
            "dataset has {}-bit inputs but the model expects {nx}",
            data.bits()
        )));
    }
    let outputs = model.num_outputs() as u64;
    if let Some((z, _, y)) = data.inputs().find(|&(_, _, y)| y as u64 >= outputs) {
        return Err(Error::Config(format!(
            "target label {y} for input {z} is out of range: the model reads {outputs} outcomes"
        )));
    }
    Ok(())
}

/// Forward contributions gathered over distinct inputs, optionally in
/// parallel. The reduction order is fixed, so results are bit-identical
/// regardless of thread count.
fn success_probabilities(model: &QlmModel, data: &EncodedDataset) -> Result<Vec<(u64, f64, f64)>> {
    let nx = model.layout().num_input_qubits();
    let inputs: Vec<(u64, f64, u32)> = data.inputs().collect();
    let work = inputs.len() << model.layout().num_qubits();
    let eval = |&(z, f, y): &(u64, f64, u32)| -> Result<(u64, f64, f64)> {
        let probs = model.forward(BitString::new(z, nx)?)?;
        Ok((z, f, probs[y as usize]))
    };
    if work >= 1 << 12 {
        inputs.par_iter().map(eval).collect()
    } else {
        inputs.iter().map(eval).collect()
    }
}

/// Exact loss from one forward per distinct input.
pub fn loss(model: &QlmModel, data: &EncodedDataset) -> Result<LossEvaluation> {
    check_compat(model, data)?;
    let contributions = success_probabilities(model, data)?;
    let mut success = BTreeMap::new();
    let mut weighted = 0.0;
    for (z, f, p) in contributions {
        success.insert(z, p);
        weighted += f * p;
    }
    Ok(LossEvaluation {
        loss: (1.0 - weighted).clamp(0.0, 1.0),
        success_probabilities: success,
    })
}

/// Shot-based loss estimate: samples each input's output distribution with a
/// budget proportional to f(z). For realism experiments only.
pub fn loss_with_shots(
    model: &QlmModel,
    data: &EncodedDataset,
    total_shots: u64,
    seed: u64,
) -> Result<LossEvaluation> {
    check_compat(model, data)?;
    if total_shots == 0 {
        return Err(Error::invalid("total_shots must be >= 1"));
    }
    let nx = model.layout().num_input_qubits();
    let mut success = BTreeMap::new();
    let mut weighted = 0.0;
    for (i, (z, f, y)) in data.inputs().enumerate() {
        let shots = ((f * total_shots as f64).round() as u64).max(1);
        let probs = model.forward(BitString::new(z, nx)?)?;
        let dist = rand::distributions::WeightedIndex::new(&probs)
            .map_err(|e| Error::invalid(format!("cannot sample outputs: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut hits = 0u64;
        for _ in 0..shots {
            use rand::distributions::Distribution;
            if dist.sample(&mut rng) as u32 == y {
                hits += 1;
            }
        }
        let p = hits as f64 / shots as f64;
        success.insert(z, p);
        weighted += f * p;
    }
    Ok(LossEvaluation {
        loss: (1.0 - weighted).clamp(0.0, 1.0),
        success_probabilities: success,
    })
}

/// The closed-form restricted sinusoid fitted from three loss evaluations.
#[derive(Clone, Copy, Debug)]
pub struct SinusoidFit {
    pub theta0: f64,
    pub offset: f64,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

impl SinusoidFit {
    /// Predicted restricted loss at `theta`.
    pub fn predict(&self, theta: f64) -> f64 {
        let phi = 2.0 * (theta - self.theta0);
        self.offset + self.cos_coeff * phi.cos() + self.sin_coeff * phi.sin()
    }

    pub fn amplitude(&self) -> f64 {
        self.cos_coeff.hypot(self.sin_coeff)
    }

    /// Argmin of the sinusoid.
    pub fn minimizer(&self) -> f64 {
        self.theta0 + 0.5 * (-self.sin_coeff).atan2(-self.cos_coeff)
    }

    pub fn minimum(&self) -> f64 {
        self.offset - self.amplitude()
    }
}

/// Fit the restricted loss of one coordinate from evaluations at
/// `theta0` and `theta0 +- pi/4`. Leaves the model unchanged.
pub fn fit_coordinate_sinusoid(
    model: &mut QlmModel,
    data: &EncodedDataset,
    param_index: usize,
    eval: &mut dyn FnMut(&QlmModel, &EncodedDataset) -> Result<f64>,
) -> Result<SinusoidFit> {
    if param_index >= model.params().len() {
        return Err(Error::invalid(format!(
            "parameter index {param_index} out of range for {} parameters",
            model.params().len()
        )));
    }
    let theta0 = model.params().get(param_index);
    let quarter = std::f64::consts::FRAC_PI_4;
    let l0 = eval(model, data)?;
    model.params_mut().set(param_index, theta0 + quarter);
    let l_plus = eval(model, data)?;
    model.params_mut().set(param_index, theta0 - quarter);
    let l_minus = eval(model, data)?;
    model.params_mut().set(param_index, theta0);
    let offset = 0.5 * (l_plus + l_minus);
    Ok(SinusoidFit {
        theta0,
        offset,
        cos_coeff: l0 - offset,
        sin_coeff: 0.5 * (l_plus - l_minus),
    })
}

/// Jump one coordinate to its exact restricted minimum.
///
/// Returns the new angle and the new loss. Coordinates whose sinusoid
/// amplitude is below `flat_tolerance` are left unchanged.
pub fn coordinate_update(
    model: &mut QlmModel,
    data: &EncodedDataset,
    param_index: usize,
    flat_tolerance: f64,
) -> Result<(f64, f64)> {
    let mut eval = |m: &QlmModel, d: &EncodedDataset| loss(m, d).map(|e| e.loss);
    let fit = fit_coordinate_sinusoid(model, data, param_index, &mut eval)?;
    if fit.amplitude() < flat_tolerance {
        return Ok((fit.theta0, fit.predict(fit.theta0)));
    }
    let theta_star = fit.minimizer();
    model.params_mut().set(param_index, theta_star);
    Ok((theta_star, fit.minimum()))
}

fn shot_eval_factory(
    shots: u64,
    seed: u64,
) -> impl FnMut(&QlmModel, &EncodedDataset) -> Result<f64> {
    let mut counter = 0u64;
    move |m, d| {
        counter += 1;
        loss_with_shots(m, d, shots, seed ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .map(|e| e.loss)
    }
}

/// Weighted per-sample accuracy: prediction is the argmax of the exact
/// output distribution (ties toward the smaller label), scored against each
/// sample's own label, so colliding inputs with minority labels count as
/// errors.
pub fn accuracy(model: &QlmModel, data: &EncodedDataset) -> Result<f64> {
    check_compat(model, data)?;
    let nx = model.layout().num_input_qubits();
    let mut correct = 0u64;
    for (z, _, _) in data.inputs() {
        let probs = model.forward(BitString::new(z, nx)?)?;
        let mut best = 0usize;
        for (j, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = j;
            }
        }
        if let Some(&count) = data.counts().get(&(z, best as u32)) {
            correct += count;
        }
    }
    Ok(correct as f64 / data.n_samples() as f64)
}

/// Sweep all coordinates for up to `max_epochs`, recording the loss after
/// every update and accuracies per epoch. Stops early once an epoch's total
/// loss decrease drops below `epsilon`.
pub fn train(
    model: &mut QlmModel,
    train_data: &EncodedDataset,
    test_data: Option<&EncodedDataset>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    if train_data.n_samples() == 0 {
        return Err(Error::invalid("training set is empty"));
    }
    check_compat(model, train_data)?;
    if let Some(test) = test_data {
        check_compat(model, test)?;
    }

    let n_params = model.params().len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut shot_eval = config.shots.map(|s| shot_eval_factory(s, config.seed));

    let initial_loss = loss(model, train_data)?.loss;
    let mut loss_trace = Vec::new();
    let mut epochs = Vec::new();
    let mut epoch_start_loss = initial_loss;

    for epoch in 0..config.max_epochs {
        let timer = Instant::now();
        let mut order: Vec<usize> = (0..n_params).collect();
        if config.sweep_order == SweepOrder::RandomPermutation {
            order.shuffle(&mut rng);
        }
        for idx in order {
            let new_loss = match shot_eval.as_mut() {
                None => coordinate_update(model, train_data, idx, config.flat_tolerance)?.1,
                Some(eval) => {
                    let fit = fit_coordinate_sinusoid(model, train_data, idx, eval)?;
                    if fit.amplitude() < config.flat_tolerance {
                        fit.predict(fit.theta0)
                    } else {
                        model.params_mut().set(idx, fit.minimizer());
                        fit.minimum()
                    }
                }
            };
            loss_trace.push(new_loss);
        }
        let epoch_loss = *loss_trace.last().expect("at least one parameter");
        let train_accuracy = accuracy(model, train_data)?;
        let test_accuracy = match test_data {
            Some(test) => Some(accuracy(model, test)?),
            None => None,
        };
        epochs.push(EpochMetrics {
            epoch,
            train_accuracy,
            test_accuracy,
            seconds: timer.elapsed().as_secs_f64(),
        });
        if epoch_start_loss - epoch_loss < config.epsilon {
            break;
        }
        epoch_start_loss = epoch_loss;
    }

    let final_loss = loss_trace.last().copied().unwrap_or(initial_loss);
    Ok(TrainReport {
        initial_loss,
        loss_trace,
        epochs,
        final_loss,
    })
}

/// One stage of a growth schedule: the layout to grow into, where the
/// previous model's qubits land, and the stage's data.
#[derive(Clone, Debug)]
pub struct GrowthStage {
    pub layout: crate::model::CircuitLayout,
    pub embedding: BTreeMap<usize, usize>,
    pub train_data: EncodedDataset,
    pub test_data: Option<EncodedDataset>,
}

/// Grow and train through a schedule of stages. Stage k's model is
/// initialized from stage k-1's result via sub-net embedding (the initial
/// model feeds stage 0), then trained to its stopping rule.
pub fn grow_and_train(
    initial: QlmModel,
    stages: &[GrowthStage],
    config: &TrainConfig,
) -> Result<(QlmModel, Vec<TrainReport>)> {
    let mut model = initial;
    let mut reports = Vec::with_capacity(stages.len());
    for (k, stage) in stages.iter().enumerate() {
        model = QlmModel::grow_from_subnet(
            &model,
            stage.layout.clone(),
            &stage.embedding,
            config.seed.wrapping_add(k as u64 + 1),
        )?;
        let report = train(&mut model, &stage.train_data, stage.test_data.as_ref(), config)?;
        reports.push(report);
    }
    Ok((model, reports))
}
