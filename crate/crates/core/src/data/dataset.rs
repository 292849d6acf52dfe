use crate::error::{Error, Result};
use crate::numkit::Matrix2D;

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix2D,
    labels: Vec<usize>,
    class_ids: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(features: Matrix2D, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::shape(
                format!("{} feature rows", features.rows()),
                format!("{} labels", labels.len()),
            ));
        }
        let mut class_ids = labels.clone();
        class_ids.sort_unstable();
        class_ids.dedup();
        Ok(Self {
            features,
            labels,
            class_ids,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            features: Matrix2D::zeros(0, dim),
            labels: Vec::new(),
            class_ids: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix2D {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Distinct labels, ascending.
    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        (self.features.row(i), self.labels[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.features.iter_rows().zip(self.labels.iter().copied())
    }

    pub fn class_samples(&self, class: usize) -> Vec<&[f64]> {
        self.iter()
            .filter(|(_, y)| *y == class)
            .map(|(x, _)| x)
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut features = Matrix2D::zeros(0, self.dim());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.push_row(self.features.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset::new(features, labels).expect("rows and labels pushed together")
    }

    /// Same samples with every label passed through `f`.
    pub fn map_labels(&self, mut f: impl FnMut(usize) -> Result<usize>) -> Result<LabeledDataset> {
        let labels = self.labels.iter().map(|&y| f(y)).collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(self.features.clone(), labels)
    }

    pub fn map_features(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<LabeledDataset> {
        let mut features = Matrix2D::zeros(0, self.dim());
        for row in self.features.iter_rows() {
            features.push_row(&f(row));
        }
        let features = Matrix2D::from_vec(features.rows(), features.cols(), features.data().to_vec())?;
        LabeledDataset::new(features, self.labels.clone())
    }

    pub fn push(&mut self, x: &[f64], label: usize) -> Result<()> {
        if !self.is_empty() && x.len() != self.dim() {
            return Err(Error::shape(
                format!("dataset dim {}", self.dim()),
                format!("sample of length {}", x.len()),
            ));
        }
        self.features.push_row(x);
        self.labels.push(label);
        if let Err(pos) = self.class_ids.binary_search(&label) {
            self.class_ids.insert(pos, label);
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &LabeledDataset) -> Result<()> {
        for (x, y) in other.iter() {
            self.push(x, y)?;
        }
        Ok(())
    }
}
