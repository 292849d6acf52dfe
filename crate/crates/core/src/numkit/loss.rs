use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to the second argument of [`kl_divergence`].
pub const KL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    #[default]
    L2,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
        })
    }
}

/// Distance used for the teacher-student term of the training loss.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistillLoss {
    #[default]
    Mse,
    Kld,
    L1,
}

impl std::fmt::Display for DistillLoss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistillLoss::Mse => "mse",
            DistillLoss::Kld => "kld",
            DistillLoss::L1 => "l1",
        })
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(
            format!("length {}", a.len()),
            format!("length {}", b.len()),
        ));
    }
    Ok(())
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::EmptyInput("softmax of empty vector"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// `-ln softmax(logits)[label]`, evaluated through log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::Index {
            index: label,
            len: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    Ok((lse - logits[label]).max(0.0))
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

pub fn l1_loss(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// `Σ p·ln(p/q)` with `q` floored at [`KL_FLOOR`]; terms with `p == 0` contribute 0.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len(p, q)?;
    Ok(p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi.max(KL_FLOOR)).ln())
        .sum())
}

pub fn vec_norm(v: &[f64], kind: NormKind) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyInput("norm of empty vector"));
    }
    Ok(match kind {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    })
}

/// Divides by the L2 norm; the zero vector maps to itself.
pub fn l2_normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn argmax(v: &[f64]) -> Option<usize> {
    // First maximum wins on ties.
    v.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &x)| match best {
            Some((_, b)) if b >= x => best,
            _ => Some((i, x)),
        })
        .map(|(i, _)| i)
}
