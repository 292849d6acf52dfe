//! Exemplar selection by distance to the class feature center.
//!
//! The center of a class is the mean of its L2-normalized embeddings. The K
//! samples whose normalized embeddings lie nearest (Euclidean) to that center
//! are kept. This is a single ranking pass, not iCaRL's greedy herding.

use crate::error::{Error, Result};
use crate::model::IncModel;
use crate::numkit::{euclidean, l2_normalize};

fn normalized_embeddings(model: &IncModel, samples: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .map(|x| model.embed(x).map(|e| l2_normalize(&e)))
        .collect()
}

fn mean(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut center = vec![0.0; vectors[0].len()];
    for v in vectors {
        for (c, x) in center.iter_mut().zip(v) {
            *c += x;
        }
    }
    let n = vectors.len() as f64;
    center.iter_mut().for_each(|c| *c /= n);
    center
}

/// Mean of the L2-normalized embeddings of one class's samples.
pub fn class_feature_center(model: &IncModel, samples: &[&[f64]]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyClass("feature center of an empty sample list".into()));
    }
    Ok(mean(&normalized_embeddings(model, samples)?))
}

/// Indices of the `min(k, n)` samples nearest the class center, ordered by
/// distance with ties going to the lower index.
pub fn herding_select(model: &IncModel, samples: &[&[f64]], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Argument("exemplar count K must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptyClass("herding over an empty sample list".into()));
    }
    let embeddings = normalized_embeddings(model, samples)?;
    let center = mean(&embeddings);
    let mut ranked: Vec<(f64, usize)> = embeddings
        .iter()
        .enumerate()
        .map(|(i, e)| (euclidean(e, &center), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(ranked.into_iter().take(k).map(|(_, i)| i).collect())
}
