//! Datasets and their seeded generators.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` drawing
//! `f64` values through `rand`'s uniform range sampler, so a seed fully
//! determines a dataset. The CSV file written by the `eqnn` crate is the
//! portable record for other implementations.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::usage;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Regression target.
    Value(f64),
    /// Class label, 0 or 1.
    Label(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Regression,
    Classification,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Regression => "regression",
            DatasetKind::Classification => "classification",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regression" => Some(DatasetKind::Regression),
            "classification" => Some(DatasetKind::Classification),
            _ => None,
        }
    }

    fn accepts(self, target: &Target) -> bool {
        matches!(
            (self, target),
            (DatasetKind::Regression, Target::Value(_))
                | (DatasetKind::Classification, Target::Label(0 | 1))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    kind: DatasetKind,
    samples: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    /// Checks that every target matches `kind` and all samples have the
    /// same number of features.
    pub fn new(kind: DatasetKind, samples: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        if let Some(first) = samples.first() {
            let width = first.features.len();
            for (i, s) in samples.iter().enumerate() {
                if s.features.len() != width {
                    return Err(usage!(
                        "sample {i} has {} features, expected {width}",
                        s.features.len()
                    ));
                }
                if !kind.accepts(&s.target) {
                    return Err(usage!(
                        "sample {i} target {:?} does not fit a {} dataset",
                        s.target,
                        kind.as_str()
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            samples,
            provenance,
        })
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }

    /// Seeded shuffle, then the first `round(train_fraction * len)` samples
    /// go to the training set.
    pub fn shuffle_split(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(usage!("train fraction {train_fraction} is outside [0, 1]"));
        }
        let mut samples = self.samples.clone();
        samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cut = libm::round(train_fraction * samples.len() as f64) as usize;
        let test = samples.split_off(cut);
        let make = |samples| Dataset {
            kind: self.kind,
            samples,
            provenance: self.provenance.clone(),
        };
        Ok((make(samples), make(test)))
    }
}

fn regression(generator: &str, seed: u64, samples: Vec<Sample>) -> Dataset {
    Dataset {
        kind: DatasetKind::Regression,
        samples,
        provenance: Provenance {
            generator: generator.into(),
            seed,
        },
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(usage!("a dataset needs at least one sample"));
    }
    Ok(())
}

/// `n` points `x ~ U[-1, 1]` with target `y = x`.
pub fn gen_linear(n: usize, seed: u64) -> Result<Dataset> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let x = rng.random_range(-1.0..=1.0);
            Sample {
                features: alloc::vec![x],
                target: Target::Value(x),
            }
        })
        .collect();
    Ok(regression("linear", seed, samples))
}

/// `2 s(x) - 1` for the logistic function `s`.
pub fn scaled_sigmoid(x: f64) -> f64 {
    2.0 / (1.0 + math::exp(-x)) - 1.0
}

/// Raw `x ~ U[-3, 3]`; the stored feature is `x / 2` and the target is
/// `2 s(x) - 1`.
pub fn gen_sigmoid(n: usize, seed: u64) -> Result<Dataset> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-3.0..=3.0);
            Sample {
                features: alloc::vec![x / 2.0],
                target: Target::Value(scaled_sigmoid(x)),
            }
        })
        .collect();
    Ok(regression("sigmoid", seed, samples))
}

/// `x ~ U[-1.5, 1.5]` with target `tanh(x)`.
pub fn gen_tanh(n: usize, seed: u64) -> Result<Dataset> {
    check_count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let x = rng.random_range(-1.5..=1.5);
            Sample {
                features: alloc::vec![x],
                target: Target::Value(math::tanh(x)),
            }
        })
        .collect();
    Ok(regression("tanh", seed, samples))
}

/// Usage regimes (GB) for one class of the synthetic two-class set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsageRegime {
    /// Range of the mid-month reading.
    pub mid: (f64, f64),
    /// Range of the increment from mid-month to month-end.
    pub increment: (f64, f64),
}

pub const LOW_USAGE: UsageRegime = UsageRegime {
    mid: (0.5, 3.0),
    increment: (0.2, 2.0),
};

pub const HIGH_USAGE: UsageRegime = UsageRegime {
    mid: (6.0, 12.0),
    increment: (1.0, 8.0),
};

/// Unnormalized `(mid-month, month-end)` usage pairs: `per_class` samples of
/// class 0 from [`LOW_USAGE`] followed by `per_class` of class 1 from
/// [`HIGH_USAGE`].
pub fn gen_two_class_usage_raw(per_class: usize, seed: u64) -> Result<Dataset> {
    check_count(per_class)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(2 * per_class);
    for (label, regime) in [(0u8, LOW_USAGE), (1u8, HIGH_USAGE)] {
        for _ in 0..per_class {
            let mid = rng.random_range(regime.mid.0..=regime.mid.1);
            let end = mid + rng.random_range(regime.increment.0..=regime.increment.1);
            samples.push(Sample {
                features: alloc::vec![mid, end],
                target: Target::Label(label),
            });
        }
    }
    Ok(Dataset {
        kind: DatasetKind::Classification,
        samples,
        provenance: Provenance {
            generator: "two_class_usage".into(),
            seed,
        },
    })
}

/// Synthetic stand-in for the mobile data-usage set, min-max normalized
/// per feature to `[0, 1]`.
pub fn gen_two_class_usage(per_class: usize, seed: u64) -> Result<Dataset> {
    let raw = gen_two_class_usage_raw(per_class, seed)?;
    Ok(normalize_minmax(&raw)?.0)
}

/// Per-feature bounds captured by [`normalize_minmax`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, u: f64) -> f64 {
        self.min + u * (self.max - self.min)
    }
}

/// Maps every feature onto `[0, 1]` and returns the ranges used, so the same
/// transform can be applied at inference time.
pub fn normalize_minmax(dataset: &Dataset) -> Result<(Dataset, Vec<FeatureRange>)> {
    if dataset.is_empty() {
        return Err(usage!("cannot normalize an empty dataset"));
    }
    let ranges: Vec<FeatureRange> = (0..dataset.n_features())
        .map(|f| {
            let (min, max) = dataset.samples.iter().map(|s| s.features[f]).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), v| (lo.min(v), hi.max(v)),
            );
            if max > min {
                Ok(FeatureRange { min, max })
            } else {
                Err(Error::DegenerateRange {
                    feature: f,
                    value: min,
                })
            }
        })
        .collect::<Result<_>>()?;
    let samples = dataset
        .samples
        .iter()
        .map(|s| Sample {
            features: s
                .features
                .iter()
                .zip(&ranges)
                .map(|(&v, r)| r.normalize(v))
                .collect(),
            target: s.target,
        })
        .collect();
    Ok((
        Dataset {
            kind: dataset.kind,
            samples,
            provenance: dataset.provenance.clone(),
        },
        ranges,
    ))
}
