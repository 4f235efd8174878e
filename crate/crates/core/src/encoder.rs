//! Compression of real-valued feature vectors to bit strings.
//!
//! The pipeline: PCA rotation, per-component min-max scaling to [0, 1],
//! greedy mutual-information bit allocation, then truncation to the allotted
//! bits (`z_i = floor(scaled_i * 2^{b_i})`). The encoded dataset keeps the
//! empirical joint counts over (z, y) and derives the target `C(z)` as the
//! most frequent label per input, ties toward the smaller label.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitString, MAX_BITS};
use crate::error::{Error, Result};

/// Total bits an encoder may allocate (keeps 2^B input tables at desk scale).
pub const MAX_TOTAL_BITS: usize = MAX_BITS;

/// Real-valued samples with integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<u32>,
}

impl RawDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u32>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.is_empty() {
            return Err(Error::invalid("dataset must not be empty"));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::invalid("samples must have at least one feature"));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} contains a non-finite value")));
            }
        }
        Ok(RawDataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of classes = max label + 1.
    pub fn num_classes(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0) + 1
    }
}

/// Seeded shuffle split on raw samples (before encoding, so collisions land
/// in both halves realistically). `test_fraction` of the samples go to the
/// second returned dataset.
pub fn train_test_split(
    raw: &RawDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(RawDataset, RawDataset)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::invalid("test_fraction must be in [0, 1)"));
    }
    let n = raw.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    if n - n_test < 2 {
        return Err(Error::invalid("training split needs at least 2 samples"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let take = |idxs: &[usize]| {
        RawDataset::new(
            idxs.iter().map(|&i| raw.features[i].clone()).collect(),
            idxs.iter().map(|&i| raw.labels[i]).collect(),
        )
    };
    let test = &order[..n_test];
    let train = &order[n_test..];
    Ok((take(train)?, take(test)?))
}

/// Mean and orthonormal component rows from a covariance eigendecomposition,
/// sorted by descending eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// One row per component, orthonormal.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

/// Fit PCA on the dataset's features.
///
/// Sign convention for determinism: the largest-magnitude entry of every
/// component is made positive (first such entry on ties).
pub fn fit_pca(raw: &RawDataset) -> Result<Pca> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least 2 samples"));
    }
    let d = raw.dim();
    let mut mean = vec![0.0; d];
    for row in raw.features() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in raw.features() {
        let centered = DVector::from_iterator(d, row.iter().zip(&mean).map(|(v, m)| v - m));
        cov += &centered * centered.transpose();
    }
    cov /= (n - 1) as f64;
    if cov.trace() <= 0.0 {
        return Err(Error::DegenerateData(
            "all samples identical: total variance is zero".into(),
        ));
    }

    let eigen = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[j]
            .partial_cmp(&eigen.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut components = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &idx in &order {
        let col = eigen.eigenvectors.column(idx);
        let mut row: Vec<f64> = col.iter().copied().collect();
        let mut pivot = 0usize;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[pivot].abs() {
                pivot = i;
            }
        }
        if row[pivot] < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
        }
        components.push(row);
        eigenvalues.push(eigen.eigenvalues[idx].max(0.0));
    }
    Ok(Pca {
        mean,
        components,
        eigenvalues,
    })
}

impl Pca {
    /// Coordinates of `x` in the component basis.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(c, (v, m))| c * (v - m))
                    .sum()
            })
            .collect()
    }

    /// Inverse of [`Pca::project`] (exact when all components are kept).
    pub fn reconstruct(&self, projected: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        let mut x = self.mean.clone();
        for (p, row) in projected.iter().zip(&self.components) {
            for i in 0..d {
                x[i] += p * row[i];
            }
        }
        x
    }
}

/// Plug-in (maximum likelihood) mutual information in nats between the two
/// coordinates of `pairs`.
pub fn plug_in_mi<A, B>(pairs: &[(A, B)]) -> f64
where
    A: Ord + Copy,
    B: Ord + Copy,
{
    let n = pairs.len() as f64;
    if pairs.is_empty() {
        return 0.0;
    }
    let mut joint: BTreeMap<(A, B), f64> = BTreeMap::new();
    let mut left: BTreeMap<A, f64> = BTreeMap::new();
    let mut right: BTreeMap<B, f64> = BTreeMap::new();
    for &(a, b) in pairs {
        *joint.entry((a, b)).or_insert(0.0) += 1.0;
        *left.entry(a).or_insert(0.0) += 1.0;
        *right.entry(b).or_insert(0.0) += 1.0;
    }
    let mut mi = 0.0;
    for (&(a, b), &c) in &joint {
        let p_ab = c / n;
        let p_a = left[&a] / n;
        let p_b = right[&b] / n;
        mi += p_ab * (p_ab / (p_a * p_b)).ln();
    }
    mi.max(0.0)
}

fn column_ranges(projected: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = projected[0].len();
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for row in projected {
        for i in 0..d {
            mins[i] = mins[i].min(row[i]);
            maxs[i] = maxs[i].max(row[i]);
        }
    }
    (mins, maxs)
}

fn scale01(value: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((value - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// `floor(scaled * 2^bits)` with the overflow case clamped to `2^bits - 1`.
fn quantize(scaled: f64, bits: usize) -> u64 {
    if bits == 0 {
        return 0;
    }
    let levels = 1u64 << bits;
    ((scaled * levels as f64) as u64).min(levels - 1)
}

/// Greedy one-bit-at-a-time allocation of `total_bits` over the projected
/// components, granting each bit to the component whose per-component
/// mutual information with the labels gains the most (ties toward the lower
/// index). Components may end with zero bits.
pub fn allocate_bits(
    projected: &[Vec<f64>],
    labels: &[u32],
    total_bits: usize,
) -> Result<Vec<usize>> {
    if total_bits == 0 {
        return Err(Error::invalid("total_bits must be >= 1"));
    }
    if total_bits > MAX_TOTAL_BITS {
        return Err(Error::invalid(format!(
            "total_bits {total_bits} exceeds the cap of {MAX_TOTAL_BITS}"
        )));
    }
    if projected.is_empty() || projected.len() != labels.len() {
        return Err(Error::invalid("projected rows and labels must match"));
    }
    let d = projected[0].len();
    let (mins, maxs) = column_ranges(projected);
    let scaled: Vec<Vec<f64>> = projected
        .iter()
        .map(|row| {
            (0..d)
                .map(|i| scale01(row[i], mins[i], maxs[i]))
                .collect()
        })
        .collect();

    let mi_at = |component: usize, bits: usize| -> f64 {
        if bits == 0 {
            return 0.0;
        }
        let pairs: Vec<(u64, u32)> = scaled
            .iter()
            .zip(labels)
            .map(|(row, &y)| (quantize(row[component], bits), y))
            .collect();
        plug_in_mi(&pairs)
    };

    let mut allocation = vec![0usize; d];
    let mut current_mi = vec![0.0f64; d];
    for _ in 0..total_bits {
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..d {
            let candidate_mi = mi_at(i, allocation[i] + 1);
            let gain = candidate_mi - current_mi[i];
            let better = match best {
                None => true,
                Some((_, best_gain, _)) => gain > best_gain,
            };
            if better {
                best = Some((i, gain, candidate_mi));
            }
        }
        let (winner, _, winner_mi) = best.expect("at least one component");
        allocation[winner] += 1;
        current_mi[winner] = winner_mi;
    }
    Ok(allocation)
}

/// A fitted encoder: PCA basis, training-range scaling, and bit allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub pca_mean: Vec<f64>,
    pub pca_components: Vec<Vec<f64>>,
    pub component_min: Vec<f64>,
    pub component_max: Vec<f64>,
    pub bit_allocation: Vec<usize>,
}

impl EncoderSpec {
    /// Fit the full pipeline on a dataset: PCA, ranges, greedy bit allocation.
    pub fn fit(raw: &RawDataset, total_bits: usize) -> Result<Self> {
        let pca = fit_pca(raw)?;
        let projected: Vec<Vec<f64>> = raw.features().iter().map(|x| pca.project(x)).collect();
        let (component_min, component_max) = column_ranges(&projected);
        let bit_allocation = allocate_bits(&projected, raw.labels(), total_bits)?;
        Ok(EncoderSpec {
            pca_mean: pca.mean,
            pca_components: pca.components,
            component_min,
            component_max,
            bit_allocation,
        })
    }

    pub fn dim(&self) -> usize {
        self.pca_mean.len()
    }

    pub fn total_bits(&self) -> usize {
        self.bit_allocation.iter().sum()
    }

    fn pca(&self) -> Pca {
        Pca {
            mean: self.pca_mean.clone(),
            components: self.pca_components.clone(),
            eigenvalues: vec![],
        }
    }

    /// Encode one feature vector to its bit string: project, scale (values
    /// outside the training range are clamped), truncate each component to
    /// its bits, and concatenate fields in component order, high bit first.
    pub fn encode(&self, x: &[f64]) -> Result<BitString> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "input has {} features but the encoder expects {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("input contains a non-finite value"));
        }
        let projected = self.pca().project(x);
        let mut value = 0u64;
        for (i, &bits) in self.bit_allocation.iter().enumerate() {
            if bits == 0 {
                continue;
            }
            let scaled = scale01(projected[i], self.component_min[i], self.component_max[i]);
            value = (value << bits) | quantize(scaled, bits);
        }
        BitString::new(value, self.total_bits())
    }

    /// Decode a bit string to feature space using each field's bin midpoint.
    /// Components with zero bits decode to their training mean.
    pub fn decode_midpoint(&self, z: BitString) -> Result<Vec<f64>> {
        if z.len() != self.total_bits() {
            return Err(Error::invalid(format!(
                "bit string has {} bits but the encoder produces {}",
                z.len(),
                self.total_bits()
            )));
        }
        let mut remaining = self.total_bits();
        let mut projected = vec![0.0; self.dim()];
        for (i, &bits) in self.bit_allocation.iter().enumerate() {
            if bits == 0 {
                continue;
            }
            remaining -= bits;
            let field = (z.value() >> remaining) & ((1u64 << bits) - 1);
            let scaled_mid = (field as f64 + 0.5) / (1u64 << bits) as f64;
            projected[i] =
                self.component_min[i] + scaled_mid * (self.component_max[i] - self.component_min[i]);
        }
        Ok(self.pca().reconstruct(&projected))
    }
}

/// Map each input qubit of a small encoder onto the matching input qubit of
/// a finer encoder fitted on the same data, then append the output qubits.
///
/// The greedy allocator grants bits one at a time, so a larger budget always
/// extends a smaller one component-wise; each small field is the high-bit
/// prefix of the corresponding large field. That makes the small encoding a
/// deterministic function of the large one, which is what lets a trained
/// small model seed the large one.
pub fn subnet_embedding(
    small: &EncoderSpec,
    large: &EncoderSpec,
    num_output_qubits: usize,
) -> Result<BTreeMap<usize, usize>> {
    if small.dim() != large.dim() {
        return Err(Error::ArtifactMismatch(format!(
            "encoders disagree on dimensionality: {} vs {}",
            small.dim(),
            large.dim()
        )));
    }
    if small.pca_mean != large.pca_mean
        || small.pca_components != large.pca_components
        || small.component_min != large.component_min
        || small.component_max != large.component_max
    {
        return Err(Error::ArtifactMismatch(
            "encoders were not fitted on the same data: PCA bases or ranges differ".into(),
        ));
    }
    let b_small = small.total_bits();
    let b_large = large.total_bits();
    let mut embedding = BTreeMap::new();
    let mut pos_small = 0usize;
    let mut pos_large = 0usize;
    for (i, (&bs, &bl)) in small
        .bit_allocation
        .iter()
        .zip(&large.bit_allocation)
        .enumerate()
    {
        if bl < bs {
            return Err(Error::ArtifactMismatch(format!(
                "component {i} has {bs} bits in the small encoder but only {bl} in the large one"
            )));
        }
        for j in 0..bs {
            let small_qubit = b_small - 1 - (pos_small + j);
            let large_qubit = b_large - 1 - (pos_large + j);
            embedding.insert(small_qubit, large_qubit);
        }
        pos_small += bs;
        pos_large += bl;
    }
    for t in 0..num_output_qubits {
        embedding.insert(b_small + t, b_large + t);
    }
    Ok(embedding)
}

/// Empirical joint counts over (z, y) with derived frequencies and targets.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedDataset {
    bits: usize,
    n_samples: u64,
    counts: BTreeMap<(u64, u32), u64>,
    targets: BTreeMap<u64, u32>,
}

impl EncodedDataset {
    pub fn from_counts(bits: usize, counts: BTreeMap<(u64, u32), u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("encoded dataset must not be empty"));
        }
        let n_samples: u64 = counts.values().sum();
        let mut targets = BTreeMap::new();
        let mut per_input: BTreeMap<u64, BTreeMap<u32, u64>> = BTreeMap::new();
        for (&(z, y), &c) in &counts {
            if z >> bits != 0 {
                return Err(Error::invalid(format!("input {z} does not fit in {bits} bits")));
            }
            *per_input.entry(z).or_default().entry(y).or_insert(0) += c;
        }
        for (z, by_label) in per_input {
            // argmax over labels, ties toward the smaller label: iterate in
            // ascending label order and keep strict improvements only.
            let mut best = (0u32, 0u64);
            for (&y, &c) in &by_label {
                if c > best.1 {
                    best = (y, c);
                }
            }
            targets.insert(z, best.0);
        }
        Ok(EncodedDataset {
            bits,
            n_samples,
            counts,
            targets,
        })
    }

    /// Encode every sample of `raw` and tabulate the joint counts.
    pub fn build(raw: &RawDataset, spec: &EncoderSpec) -> Result<Self> {
        let mut counts: BTreeMap<(u64, u32), u64> = BTreeMap::new();
        for (x, &y) in raw.features().iter().zip(raw.labels()) {
            let z = spec.encode(x)?;
            *counts.entry((z.value(), y)).or_insert(0) += 1;
        }
        Self::from_counts(spec.total_bits(), counts)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn counts(&self) -> &BTreeMap<(u64, u32), u64> {
        &self.counts
    }

    /// f(z, y).
    pub fn joint_freq(&self, z: u64, y: u32) -> f64 {
        *self.counts.get(&(z, y)).unwrap_or(&0) as f64 / self.n_samples as f64
    }

    /// f(z) = sum_y f(z, y).
    pub fn input_freq(&self, z: u64) -> f64 {
        self.counts
            .range((z, 0)..=(z, u32::MAX))
            .map(|(_, &c)| c)
            .sum::<u64>() as f64
            / self.n_samples as f64
    }

    /// C(z) = argmax_y f(z, y), ties toward the smaller label.
    pub fn target(&self, z: u64) -> Option<u32> {
        self.targets.get(&z).copied()
    }

    /// Distinct inputs in ascending order with their frequency and target.
    pub fn inputs(&self) -> impl Iterator<Item = (u64, f64, u32)> + '_ {
        self.targets
            .iter()
            .map(move |(&z, &c)| (z, self.input_freq(z), c))
    }

    pub fn num_distinct_inputs(&self) -> usize {
        self.targets.len()
    }

    /// Largest label present + 1.
    pub fn num_classes(&self) -> u32 {
        self.counts.keys().map(|&(_, y)| y).max().unwrap_or(0) + 1
    }

    /// Joint plug-in MI I(z; y) over the empirical counts, in nats.
    pub fn mutual_information(&self) -> f64 {
        let mut pairs = Vec::with_capacity(self.n_samples as usize);
        for (&(z, y), &c) in &self.counts {
            for _ in 0..c {
                pairs.push((z, y));
            }
        }
        plug_in_mi(&pairs)
    }
}
