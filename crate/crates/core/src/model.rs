//! Two-class sparsity ensemble, weight schemes and Gaussian measurement
//! instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    K1,
    K2,
}

/// Coordinates split into `K1` (nonzero w.p. `p1`) and `K2` (nonzero w.p. `p2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityModel {
    n1: usize,
    n2: usize,
    p1: f64,
    p2: f64,
    class_of: Vec<Class>,
}

impl SparsityModel {
    /// Contiguous layout: `K1 = {0, .., n1-1}`, `K2` the rest.
    pub fn new(n1: usize, n2: usize, p1: f64, p2: f64) -> Result<Self> {
        if n1 + n2 == 0 {
            return Err(Error::InvalidModel("n1 + n2 must be positive".into()));
        }
        for (name, p) in [("P1", p1), ("P2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidModel(format!("{name} = {p} outside [0, 1]")));
            }
        }
        let class_of = std::iter::repeat_n(Class::K1, n1)
            .chain(std::iter::repeat_n(Class::K2, n2))
            .collect();
        Ok(SparsityModel { n1, n2, p1, p2, class_of })
    }

    /// Relabels coordinates: index `i` of the contiguous layout moves to
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut class_of = vec![None; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || class_of[p].is_some() {
                return Err(Error::InvalidModel("layout is not a permutation".into()));
            }
            class_of[p] = Some(self.class_of[i]);
        }
        Ok(SparsityModel {
            class_of: class_of.into_iter().map(Option::unwrap).collect(),
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn p1(&self) -> f64 {
        self.p1
    }
    pub fn p2(&self) -> f64 {
        self.p2
    }
    pub fn class_of(&self, i: usize) -> Class {
        self.class_of[i]
    }
    pub fn classes(&self) -> &[Class] {
        &self.class_of
    }

    pub fn prob(&self, i: usize) -> f64 {
        match self.class_of[i] {
            Class::K1 => self.p1,
            Class::K2 => self.p2,
        }
    }

    /// `n1 P1 + n2 P2`.
    pub fn expected_support(&self) -> f64 {
        self.n1 as f64 * self.p1 + self.n2 as f64 * self.p2
    }

    /// Counts of `support ∩ K1` and `support ∩ K2`.
    pub fn class_counts(&self, support: &[usize]) -> (usize, usize) {
        support.iter().fold((0, 0), |(a, b), &i| match self.class_of[i] {
            Class::K1 => (a + 1, b),
            Class::K2 => (a, b + 1),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeLaw {
    /// Standard normal amplitudes.
    #[default]
    Gaussian,
    /// Uniform ±1 amplitudes.
    Rademacher,
}

/// Per-coordinate weights, `W1 = 1` on `K1` and `W2` on `K2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    w2: f64,
    weights: Vec<f64>,
}

impl WeightScheme {
    pub const W1: f64 = 1.0;

    pub fn two_valued(model: &SparsityModel, w2: f64) -> Result<Self> {
        if !(w2 > 0.0 && w2.is_finite()) {
            return Err(Error::InvalidArgument(format!("W2 = {w2} must be positive")));
        }
        let weights = model
            .classes()
            .iter()
            .map(|c| match c {
                Class::K1 => Self::W1,
                Class::K2 => w2,
            })
            .collect();
        Ok(WeightScheme { w2, weights })
    }

    /// All weights one (plain ℓ1).
    pub fn uniform(n: usize) -> Self {
        WeightScheme { w2: 1.0, weights: vec![1.0; n] }
    }

    pub fn w1(&self) -> f64 {
        Self::W1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    x: Vec<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    pub fn from_dense(x: Vec<f64>) -> Self {
        let support = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        SparseSignal { x, support }
    }

    pub fn zeros(n: usize) -> Self {
        SparseSignal { x: vec![0.0; n], support: Vec::new() }
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }
    pub fn support(&self) -> &[usize] {
        &self.support
    }
    pub fn signs(&self) -> Vec<f64> {
        self.support.iter().map(|&i| self.x[i].signum()).collect()
    }
    pub fn len(&self) -> usize {
        self.x.len()
    }
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
    pub fn max_abs(&self) -> f64 {
        self.x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Measurement matrix, ground truth and observation `y = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DMatrix<f64>,
    pub x_true: SparseSignal,
    pub y: DVector<f64>,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn from_parts(a: DMatrix<f64>, x_true: SparseSignal, seed: u64) -> Result<Self> {
        if a.ncols() != x_true.len() {
            return Err(Error::DimensionMismatch { expected: a.ncols(), got: x_true.len() });
        }
        let y = &a * DVector::from_column_slice(x_true.values());
        Ok(ProblemInstance { a, x_true, y, seed })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }
    pub fn n(&self) -> usize {
        self.a.ncols()
    }
    pub fn delta(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    /// FNV-1a over the bit patterns of `A` and `y`; used to verify pairing.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.a.iter().chain(self.y.iter()) {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

fn draw_amplitude<R: Rng>(law: AmplitudeLaw, rng: &mut R) -> f64 {
    match law {
        AmplitudeLaw::Gaussian => loop {
            let v: f64 = StandardNormal.sample(rng);
            if v != 0.0 {
                return v;
            }
        },
        AmplitudeLaw::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Draws a signal from the model. Index `i` is nonzero iff its support
/// uniform falls below its class probability; one uniform and one amplitude
/// are consumed per index regardless of class, so signals for the same seed
/// are coupled across `(P1, P2)`.
pub fn generate_signal(model: &SparsityModel, amplitude: AmplitudeLaw, seed: u64) -> SparseSignal {
    let mut support_rng = stream(seed, Stream::Support);
    let mut amp_rng = stream(seed, Stream::Amplitude);
    let x = (0..model.n())
        .map(|i| {
            let u: f64 = support_rng.random();
            let a = draw_amplitude(amplitude, &mut amp_rng);
            if u < model.prob(i) {
                a
            } else {
                0.0
            }
        })
        .collect();
    SparseSignal::from_dense(x)
}

/// Default `ε` for [`is_typical`].
pub const TYPICAL_EPS: f64 = 0.02;

/// `||K∩K1| − n1P1| ≤ εn` and `||K∩K2| − n2P2| ≤ εn`.
pub fn is_typical(support: &[usize], model: &SparsityModel, eps: f64) -> bool {
    let (c1, c2) = model.class_counts(support);
    let bound = eps * model.n() as f64;
    (c1 as f64 - model.n1 as f64 * model.p1).abs() <= bound
        && (c2 as f64 - model.n2 as f64 * model.p2).abs() <= bound
}

/// `A` has iid N(0,1) entries, filled column by column from the matrix stream.
pub fn gaussian_instance(
    model: &SparsityModel,
    m: usize,
    amplitude: AmplitudeLaw,
    seed: u64,
) -> Result<ProblemInstance> {
    let n = model.n();
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 0 < m < n, got m = {m}, n = {n}")));
    }
    Ok(gaussian_instance_unchecked(model, m, amplitude, seed))
}

/// Same as [`gaussian_instance`] without the `m < n` requirement (square and
/// tall systems are useful in tests).
pub fn gaussian_instance_unchecked(
    model: &SparsityModel,
    m: usize,
    amplitude: AmplitudeLaw,
    seed: u64,
) -> ProblemInstance {
    let a = gaussian_matrix(m, model.n(), seed);
    let x = generate_signal(model, amplitude, seed);
    ProblemInstance::from_parts(a, x, seed).expect("dimensions agree by construction")
}

pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream(seed, Stream::Matrix);
    let data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    DMatrix::from_vec(m, n, data)
}

pub fn weighted_l1(x: &[f64], weights: &[f64]) -> Result<f64> {
    if x.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), got: x.len() });
    }
    Ok(x.iter().zip(weights).map(|(v, w)| w * v.abs()).sum())
}

/// `Σ w_i |x_i|`.
pub fn weighted_norm(x: &[f64], w: &WeightScheme) -> Result<f64> {
    weighted_l1(x, w.weights())
}
