use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::allencahn::LabelData;
use crate::error::{Error, Result};

/// Share of each class revealed as known labels.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelFraction {
    Uniform(f64),
    PerClass(Vec<f64>),
}

impl LabelFraction {
    fn of(&self, class: usize) -> Result<f64> {
        let f = match self {
            Self::Uniform(f) => *f,
            Self::PerClass(v) => *v.get(class).ok_or_else(|| {
                Error::InvalidArgument(format!("no label fraction given for class {class}"))
            })?,
        };
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "label fraction {f} outside (0, 1]"
            )));
        }
        Ok(f)
    }
}

/// Draws `ceil(fraction * size)` nodes of every class uniformly without replacement.
/// Classes are `0..m` with `m = max(truth) + 1`; each must occur.
pub fn sample_label_mask(
    truth: &[usize],
    fraction: &LabelFraction,
    seed: u64,
) -> Result<Vec<Option<usize>>> {
    let m = truth.iter().max().map_or(0, |&c| c + 1);
    let mut members = vec![Vec::new(); m];
    for (i, &c) in truth.iter().enumerate() {
        members[c].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![None; truth.len()];
    for (c, nodes) in members.iter_mut().enumerate() {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "class {c} does not occur in the ground truth"
            )));
        }
        let f = fraction.of(c)?;
        let take = ((f * nodes.len() as f64 - 1e-9).ceil() as usize).clamp(1, nodes.len());
        let (chosen, _) = nodes.partial_shuffle(&mut rng, take);
        for &i in chosen.iter() {
            out[i] = Some(c);
        }
    }
    Ok(out)
}

/// [`sample_label_mask`] turned into fidelity data with weight `omega0`.
pub fn sample_labels(
    truth: &[usize],
    fraction: &LabelFraction,
    seed: u64,
    omega0: f64,
) -> Result<LabelData> {
    let m = truth.iter().max().map_or(0, |&c| c + 1);
    LabelData::from_labels(&sample_label_mask(truth, fraction, seed)?, m, omega0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_per_class() {
        let truth: Vec<usize> = (0..100).map(|i| i / 50).collect();
        let mask = sample_label_mask(&truth, &LabelFraction::Uniform(0.04), 1).unwrap();
        for c in 0..2 {
            assert_eq!(mask.iter().filter(|l| **l == Some(c)).count(), 2);
        }
        for (i, l) in mask.iter().enumerate() {
            if let Some(c) = l {
                assert_eq!(*c, truth[i]);
            }
        }
    }

    #[test]
    fn full_fraction_and_rounding_up() {
        let truth = vec![0, 0, 0, 1, 2, 2];
        let all = sample_label_mask(&truth, &LabelFraction::Uniform(1.0), 0).unwrap();
        assert!(all.iter().all(Option::is_some));
        let few = sample_label_mask(&truth, &LabelFraction::Uniform(0.01), 0).unwrap();
        assert_eq!(few.iter().flatten().count(), 3);
        let per =
            sample_label_mask(&truth, &LabelFraction::PerClass(vec![1.0, 0.5, 0.5]), 0).unwrap();
        assert_eq!(per.iter().flatten().count(), 5);
    }

    #[test]
    fn deterministic_per_seed() {
        let truth: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let f = LabelFraction::Uniform(0.05);
        assert_eq!(
            sample_labels(&truth, &f, 9, 1000.0).unwrap(),
            sample_labels(&truth, &f, 9, 1000.0).unwrap()
        );
        assert_ne!(
            sample_label_mask(&truth, &f, 9).unwrap(),
            sample_label_mask(&truth, &f, 10).unwrap()
        );
    }

    #[test]
    fn errors() {
        assert!(sample_label_mask(&[0, 2], &LabelFraction::Uniform(0.5), 0).is_err());
        assert!(sample_label_mask(&[0, 1], &LabelFraction::Uniform(0.0), 0).is_err());
        assert!(sample_label_mask(&[0, 1], &LabelFraction::PerClass(vec![0.5]), 0).is_err());
    }
}
