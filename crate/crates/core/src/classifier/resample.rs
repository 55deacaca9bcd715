//! Class rebalancing: SMOTE over-sampling and spread sub-sampling.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::LabeledDataset;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rng;
use crate::text::FeatureVector;

/// Indices of the `k` nearest other vectors of each vector, by Euclidean
/// distance with ties broken by index.
pub fn nearest_neighbors(vectors: &[FeatureVector], k: usize) -> Vec<Vec<usize>> {
    vectors
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut dist: Vec<(f64, usize)> = vectors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, y)| (x.squared_distance(y), j))
                .collect();
            let k = k.min(dist.len());
            if k < dist.len() {
                dist.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                dist.truncate(k);
            }
            dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// `x + lambda * (y - x)`, component-wise over the union of supports.
pub fn interpolate(x: &FeatureVector, y: &FeatureVector, lambda: f64) -> FeatureVector {
    let (a, b) = (x.entries(), y.entries());
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (id, xv, yv) = match (a.get(i), b.get(j)) {
            (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                i += 1;
                j += 1;
                (ia, va, vb)
            }
            (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                i += 1;
                (ia, va, 0.0)
            }
            (Some(&(ia, va)), None) => {
                i += 1;
                (ia, va, 0.0)
            }
            (_, Some(&(ib, vb))) => {
                j += 1;
                (ib, 0.0, vb)
            }
            (None, None) => unreachable!(),
        };
        let v = xv + lambda * (yv - xv);
        if v > 0.0 {
            out.push((id, v));
        }
    }
    FeatureVector::from_sorted(out)
}

/// Generates `percent / 100` synthetic vectors per minority vector, each on
/// the segment between the source and one of its `k` nearest neighbours.
pub fn smote(minority: &[FeatureVector], percent: u32, k: usize, seed: u64) -> Result<Vec<FeatureVector>> {
    if !percent.is_multiple_of(100) {
        return Err(Error::InvalidArgument(format!("SMOTE percent must be a multiple of 100, got {percent}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("SMOTE k must be at least 1".into()));
    }
    if minority.len() <= k {
        return Err(Error::InvalidArgument(format!(
            "SMOTE needs more than k={k} minority vectors, got {}",
            minority.len()
        )));
    }
    let rounds = (percent / 100) as usize;
    if rounds == 0 {
        return Ok(Vec::new());
    }
    let neighbors = nearest_neighbors(minority, k);
    let mut rng = rng::stream(seed, 0);
    let mut out = Vec::with_capacity(minority.len() * rounds);
    for (x, nn) in minority.iter().zip(&neighbors) {
        for _ in 0..rounds {
            let y = &minority[nn[rng.random_range(0..nn.len())]];
            let lambda: f64 = rng.random();
            out.push(interpolate(x, y, lambda));
        }
    }
    Ok(out)
}

/// Appends SMOTE samples of `label` to `data`.
pub fn oversample_class(
    data: &LabeledDataset,
    label: Label,
    percent: u32,
    k: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let minority: Vec<FeatureVector> = data.indices_of(label).into_iter().map(|i| data.vectors[i].clone()).collect();
    let synthetic = smote(&minority, percent, k, seed)?;
    let mut out = data.clone();
    for v in synthetic {
        out.push(v, label);
    }
    Ok(out)
}

/// Randomly drops instances of over-represented classes until the largest
/// class is at most `max_ratio` times the smallest non-empty class.
/// Kept instances retain their original order.
pub fn subsample_spread(data: &LabeledDataset, max_ratio: f64, seed: u64) -> Result<LabeledDataset> {
    if !(max_ratio >= 1.0) || !max_ratio.is_finite() {
        return Err(Error::InvalidArgument(format!("spread ratio must be >= 1, got {max_ratio}")));
    }
    let counts = data.class_counts();
    let Some(min) = counts.iter().copied().filter(|&c| c > 0).min() else {
        return Ok(data.clone());
    };
    let cap = (max_ratio * min as f64 + 1e-9).floor() as usize;
    let mut rng = rng::stream(seed, 0);
    let mut keep = Vec::with_capacity(data.len());
    for label in Label::ALL {
        let mut idx = data.indices_of(label);
        if idx.len() > cap {
            idx.shuffle(&mut rng);
            idx.truncate(cap);
        }
        keep.extend(idx);
    }
    keep.sort_unstable();
    Ok(data.subset(&keep))
}
