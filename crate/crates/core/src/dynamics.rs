//! Discrete time-evolution learning: encode trajectory states as bit
//! strings, extract consecutive-pair transitions, and roll out multi-step
//! predictions with a trained dynamics model (Nx = Nq, Ny = 0: the input
//! register is overwritten with the successor state).

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::encoder::{EncodedDataset, EncoderSpec, RawDataset};
use crate::error::{Error, Result};
use crate::model::{QlmModel, Task};

/// Toy systems whose RK4 trajectories stand in for measured concentrations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "system")]
pub enum ToySystem {
    /// dx_i/dt = -rate_i * x_i, closed form x_i(t) = x_i(0) exp(-rate_i t).
    LinearDecay { rates: Vec<f64> },
    /// Lotka-Volterra predator-prey pair:
    /// dx/dt = alpha x - beta x y, dy/dt = delta x y - gamma y.
    /// Conserves V = delta x - gamma ln x + beta y - alpha ln y.
    TwoSpeciesOscillator {
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    },
}

impl ToySystem {
    pub fn dim(&self) -> usize {
        match self {
            ToySystem::LinearDecay { rates } => rates.len(),
            ToySystem::TwoSpeciesOscillator { .. } => 2,
        }
    }

    fn derivative(&self, x: &[f64], out: &mut [f64]) {
        match self {
            ToySystem::LinearDecay { rates } => {
                for (o, (v, r)) in out.iter_mut().zip(x.iter().zip(rates)) {
                    *o = -r * v;
                }
            }
            ToySystem::TwoSpeciesOscillator {
                alpha,
                beta,
                gamma,
                delta,
            } => {
                out[0] = alpha * x[0] - beta * x[0] * x[1];
                out[1] = delta * x[0] * x[1] - gamma * x[1];
            }
        }
    }

    /// The conserved quantity of the oscillator (constant along exact
    /// trajectories with positive concentrations). Zero for other systems.
    pub fn invariant(&self, x: &[f64]) -> f64 {
        match self {
            ToySystem::LinearDecay { .. } => 0.0,
            ToySystem::TwoSpeciesOscillator {
                alpha,
                beta,
                gamma,
                delta,
            } => delta * x[0] - gamma * x[0].ln() + beta * x[1] - alpha * x[1].ln(),
        }
    }
}

/// Uniformly sampled states of one integrated trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::invalid("times and states must have equal length"));
        }
        if times.len() < 2 {
            return Err(Error::invalid("a trajectory needs at least 2 time points"));
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 {
                return Err(Error::invalid("trajectory time steps must be uniform"));
            }
        }
        Ok(Trajectory { times, states })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn rk4_step(system: &ToySystem, x: &[f64], dt: f64) -> Vec<f64> {
    let d = x.len();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    system.derivative(x, &mut k1);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    system.derivative(&tmp, &mut k2);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    system.derivative(&tmp, &mut k3);
    for i in 0..d {
        tmp[i] = x[i] + dt * k3[i];
    }
    system.derivative(&tmp, &mut k4);
    (0..d)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Fixed-step RK4 integration from each (optionally jittered) initial state.
///
/// The seed only perturbs initial conditions: each x0 is shifted by a
/// uniform draw from [-jitter, jitter) per component. `jitter = 0` keeps the
/// given points exactly.
pub fn generate_toy_trajectories(
    system: &ToySystem,
    x0_set: &[Vec<f64>],
    steps: usize,
    dt: f64,
    seed: u64,
    jitter: f64,
) -> Result<Vec<Trajectory>> {
    if dt <= 0.0 {
        return Err(Error::invalid("dt must be > 0"));
    }
    if steps == 0 {
        return Err(Error::invalid("steps must be >= 1"));
    }
    if x0_set.is_empty() {
        return Err(Error::invalid("need at least one initial condition"));
    }
    let d = system.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectories = Vec::with_capacity(x0_set.len());
    for x0 in x0_set {
        if x0.len() != d {
            return Err(Error::invalid(format!(
                "initial condition has {} components, system has {d}",
                x0.len()
            )));
        }
        let mut x: Vec<f64> = x0
            .iter()
            .map(|v| {
                if jitter > 0.0 {
                    v + rng.gen_range(-jitter..jitter)
                } else {
                    *v
                }
            })
            .collect();
        let mut times = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        times.push(0.0);
        states.push(x.clone());
        for step in 0..steps {
            x = rk4_step(system, &x, dt);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    step,
                    message: "state became non-finite".into(),
                });
            }
            times.push(dt * (step + 1) as f64);
            states.push(x.clone());
        }
        trajectories.push(Trajectory::new(times, states)?);
    }
    Ok(trajectories)
}

/// Consecutive-pair transitions, encoded: input z(t_n), label = integer value
/// of z(t_{n+1}). Colliding inputs keep full successor counts; the trainer's
/// argmax target then picks the majority successor.
#[derive(Clone, Debug)]
pub struct TransitionDataset {
    pub dataset: EncodedDataset,
    /// Fraction of distinct encoded inputs that occur with two or more
    /// distinct successors.
    pub conflicting_input_fraction: f64,
    pub num_transitions: u64,
}

/// Gather every state of every trajectory into one flat dataset (labels are
/// dummies), e.g. to fit a shared encoder over all time steps.
pub fn states_as_raw(trajectories: &[Trajectory]) -> Result<RawDataset> {
    let mut features = Vec::new();
    for traj in trajectories {
        features.extend(traj.states.iter().cloned());
    }
    let n = features.len();
    RawDataset::new(features, vec![0; n])
}

pub fn build_transition_dataset(
    trajectories: &[Trajectory],
    spec: &EncoderSpec,
) -> Result<TransitionDataset> {
    if trajectories.iter().any(|t| t.len() < 2) {
        return Err(Error::invalid("every trajectory needs at least 2 points"));
    }
    if trajectories.is_empty() {
        return Err(Error::invalid("need at least one trajectory"));
    }
    let mut counts: BTreeMap<(u64, u32), u64> = BTreeMap::new();
    let mut num_transitions = 0u64;
    for traj in trajectories {
        for pair in traj.states.windows(2) {
            let z_now = spec.encode(&pair[0])?;
            let z_next = spec.encode(&pair[1])?;
            *counts.entry((z_now.value(), z_next.value() as u32)).or_insert(0) += 1;
            num_transitions += 1;
        }
    }
    let mut successors: BTreeMap<u64, u32> = BTreeMap::new();
    let mut conflicted: BTreeMap<u64, bool> = BTreeMap::new();
    for &(z, _) in counts.keys() {
        *successors.entry(z).or_insert(0) += 1;
    }
    for (&z, &n_succ) in &successors {
        conflicted.insert(z, n_succ > 1);
    }
    let conflicting = conflicted.values().filter(|&&c| c).count();
    let dataset = EncodedDataset::from_counts(spec.total_bits(), counts)?;
    Ok(TransitionDataset {
        dataset,
        conflicting_input_fraction: conflicting as f64 / successors.len() as f64,
        num_transitions,
    })
}

/// How rollout picks each step's successor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutMode {
    /// Most probable full bit string, ties toward the smaller integer.
    Argmax,
    /// One draw per step from the output distribution.
    Sampled { seed: u64 },
}

/// Iterate the learned one-step map. Returns `horizon + 1` states starting
/// with `z0` itself.
pub fn rollout(
    model: &QlmModel,
    z0: BitString,
    horizon: usize,
    mode: RolloutMode,
) -> Result<Vec<BitString>> {
    if model.task() != Task::Dynamics {
        return Err(Error::Config(
            "rollout needs a dynamics model (Ny = 0)".into(),
        ));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    let bits = model.layout().num_qubits();
    let mut rng = match mode {
        RolloutMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        RolloutMode::Argmax => None,
    };
    let mut sequence = Vec::with_capacity(horizon + 1);
    sequence.push(z0);
    let mut current = z0;
    for _ in 0..horizon {
        let probs = model.forward(current)?;
        let next = match rng.as_mut() {
            None => {
                let mut best = 0usize;
                for (j, &p) in probs.iter().enumerate() {
                    if p > probs[best] {
                        best = j;
                    }
                }
                best as u64
            }
            Some(rng) => {
                let dist = WeightedIndex::new(&probs)
                    .map_err(|e| Error::invalid(format!("cannot sample successor: {e}")))?;
                dist.sample(rng) as u64
            }
        };
        current = BitString::new(next, bits)?;
        sequence.push(current);
    }
    Ok(sequence)
}
