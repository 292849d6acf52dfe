//! Feed-forward classifier with ReLU hidden layers and a bias-free prediction
//! head that can grow when new classes arrive.

mod io;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{argmax, dot, Matrix2D, SeededRng};

pub use io::MODEL_FORMAT_VERSION;
pub use train::Gradients;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs_per_stage: usize,
}

impl ModelConfig {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims: vec![64, 32],
            learning_rate: 0.05,
            batch_size: 32,
            epochs_per_stage: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be at least 1".into()));
        }
        if let Some(i) = self.hidden_dims.iter().position(|&d| d == 0) {
            return Err(Error::Config(format!("hidden_dims[{i}] must be at least 1")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn embed_dim(&self) -> usize {
        self.hidden_dims.last().copied().unwrap_or(self.input_dim)
    }
}

/// Fully connected layer followed by ReLU. `weights` is `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub(crate) weights: Matrix2D,
    pub(crate) bias: Vec<f64>,
}

impl DenseLayer {
    fn he_uniform(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Self {
        Self {
            weights: he_uniform_matrix(fan_out, fan_in, rng),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn weights(&self) -> &Matrix2D {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn pre_activation(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter_rows()
            .zip(&self.bias)
            .map(|(row, b)| dot(row, input) + b)
            .collect()
    }
}

fn he_uniform_matrix(rows: usize, fan_in: usize, rng: &mut SeededRng) -> Matrix2D {
    let limit = (6.0 / fan_in as f64).sqrt();
    let mut m = Matrix2D::zeros(rows, fan_in);
    for w in m.data_mut() {
        *w = rng.uniform(-limit, limit);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncModel {
    config: ModelConfig,
    hidden: Vec<DenseLayer>,
    head: Matrix2D,
}

impl IncModel {
    pub fn init(config: ModelConfig, num_classes: usize, rng: &mut SeededRng) -> Result<Self> {
        config.validate()?;
        if num_classes == 0 {
            return Err(Error::Config("num_classes must be at least 1".into()));
        }
        let mut hidden = Vec::with_capacity(config.hidden_dims.len());
        let mut fan_in = config.input_dim;
        for &width in &config.hidden_dims {
            hidden.push(DenseLayer::he_uniform(fan_in, width, rng));
            fan_in = width;
        }
        let head = he_uniform_matrix(num_classes, fan_in, rng);
        Ok(Self {
            config,
            hidden,
            head,
        })
    }

    /// Assembles a model from explicit parameters, checking every shape.
    pub fn from_parts(config: ModelConfig, hidden: Vec<DenseLayer>, head: Matrix2D) -> Result<Self> {
        config.validate()?;
        if hidden.len() != config.hidden_dims.len() {
            return Err(Error::shape(
                format!("{} hidden layers in config", config.hidden_dims.len()),
                format!("{} layers supplied", hidden.len()),
            ));
        }
        let mut fan_in = config.input_dim;
        for (i, (layer, &width)) in hidden.iter().zip(&config.hidden_dims).enumerate() {
            if layer.weights.shape() != (width, fan_in) || layer.bias.len() != width {
                return Err(Error::shape(
                    format!("layer {i} expected {width}x{fan_in} with {width} biases"),
                    format!(
                        "{}x{} with {} biases",
                        layer.weights.rows(),
                        layer.weights.cols(),
                        layer.bias.len()
                    ),
                ));
            }
            fan_in = width;
        }
        if head.cols() != fan_in || head.rows() == 0 {
            return Err(Error::shape(
                format!("head with {fan_in} columns"),
                format!("{}x{}", head.rows(), head.cols()),
            ));
        }
        Ok(Self {
            config,
            hidden,
            head,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn num_classes(&self) -> usize {
        self.head.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn embed_dim(&self) -> usize {
        self.head.cols()
    }

    pub fn head(&self) -> &Matrix2D {
        &self.head
    }

    pub fn hidden_layers(&self) -> &[DenseLayer] {
        &self.hidden
    }

    /// Replaces the head, keeping its shape.
    pub fn set_head(&mut self, head: Matrix2D) -> Result<()> {
        if head.shape() != self.head.shape() {
            return Err(Error::shape(
                format!("{}x{}", self.head.rows(), self.head.cols()),
                format!("{}x{}", head.rows(), head.cols()),
            ));
        }
        self.head = head;
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_dim {
            return Err(Error::shape(
                format!("model input dim {}", self.config.input_dim),
                format!("sample of length {}", x.len()),
            ));
        }
        Ok(())
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.embed_unchecked(x))
    }

    fn embed_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut act = x.to_vec();
        for layer in &self.hidden {
            act = layer.pre_activation(&act);
            act.iter_mut().for_each(|a| *a = a.max(0.0));
        }
        act
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        let embedding = self.embed(x)?;
        let logits = self.head.iter_rows().map(|w| dot(w, &embedding)).collect();
        Ok(Forward { logits, embedding })
    }

    /// Row-wise forward over a sample matrix: returns (logits, embeddings).
    pub fn forward_batch(&self, x: &Matrix2D) -> Result<(Matrix2D, Matrix2D)> {
        let mut logits = Matrix2D::zeros(0, self.num_classes());
        let mut embeddings = Matrix2D::zeros(0, self.embed_dim());
        for row in x.iter_rows() {
            let f = self.forward(row)?;
            logits.push_row(&f.logits);
            embeddings.push_row(&f.embedding);
        }
        Ok((logits, embeddings))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let f = self.forward(x)?;
        Ok(argmax(&f.logits).expect("head has at least one row"))
    }

    /// Appends `v` freshly initialized rows to the head; existing rows are untouched.
    pub fn expand_head(&mut self, v: usize, rng: &mut SeededRng) -> Result<()> {
        if v == 0 {
            return Err(Error::Argument("head expansion needs v >= 1".into()));
        }
        let fresh = he_uniform_matrix(v, self.embed_dim(), rng);
        self.head.append_rows(&fresh)
    }

    pub fn snapshot(&self) -> TeacherSnapshot {
        TeacherSnapshot {
            model: self.clone(),
        }
    }

    pub fn num_parameters(&self) -> usize {
        self.hidden
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum::<usize>()
            + self.head.data().len()
    }

    /// All parameters, flattened layer by layer (weights then bias), head last.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for layer in &self.hidden {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        out.extend_from_slice(self.head.data());
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_parameters() {
            return Err(Error::shape(
                format!("{} parameters", self.num_parameters()),
                format!("{} values", params.len()),
            ));
        }
        let mut rest = params;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        for layer in &mut self.hidden {
            take(layer.weights.data_mut());
            take(&mut layer.bias);
        }
        take(self.head.data_mut());
        Ok(())
    }
}

/// Frozen deep copy of a model, used as the distillation teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherSnapshot {
    model: IncModel,
}

impl TeacherSnapshot {
    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        self.model.forward(x)
    }

    pub fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    pub fn model(&self) -> &IncModel {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(input: usize, hidden: Vec<usize>) -> ModelConfig {
        ModelConfig {
            input_dim: input,
            hidden_dims: hidden,
            learning_rate: 0.1,
            batch_size: 4,
            epochs_per_stage: 1,
        }
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = IncModel::init(cfg(8, vec![64, 32]), 15, &mut SeededRng::new(1)).unwrap();
        let b = IncModel::init(cfg(8, vec![64, 32]), 15, &mut SeededRng::new(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.head().shape(), (15, 32));
        assert!(a.hidden_layers().iter().all(|l| l.bias().iter().all(|b| *b == 0.0)));
    }

    #[test]
    fn he_uniform_bounds() {
        let m = IncModel::init(cfg(6, vec![10]), 3, &mut SeededRng::new(2)).unwrap();
        let limit = (6.0f64 / 6.0).sqrt();
        assert!(m.hidden_layers()[0].weights().data().iter().all(|w| w.abs() <= limit));
        let head_limit = (6.0f64 / 10.0).sqrt();
        assert!(m.head().data().iter().all(|w| w.abs() <= head_limit));
    }

    #[test]
    fn linear_classifier_without_hidden_layers() {
        let m = IncModel::init(cfg(5, vec![]), 4, &mut SeededRng::new(3)).unwrap();
        assert_eq!(m.head().shape(), (4, 5));
        let x = [1.0, -2.0, 0.5, 0.0, 3.0];
        let f = m.forward(&x).unwrap();
        assert_eq!(f.embedding, x.to_vec());
        assert_eq!(f.logits, m.head().matvec(&x).unwrap());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut rng = SeededRng::new(0);
        assert!(matches!(IncModel::init(cfg(0, vec![]), 2, &mut rng), Err(Error::Config(_))));
        assert!(matches!(IncModel::init(cfg(2, vec![0]), 2, &mut rng), Err(Error::Config(_))));
        assert!(matches!(IncModel::init(cfg(2, vec![]), 0, &mut rng), Err(Error::Config(_))));
        let mut bad = cfg(2, vec![]);
        bad.learning_rate = 0.0;
        assert!(IncModel::init(bad, 2, &mut rng).is_err());
        let mut bad = cfg(2, vec![]);
        bad.batch_size = 0;
        assert!(IncModel::init(bad, 2, &mut rng).is_err());
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let mut m = IncModel::init(cfg(3, vec![4]), 2, &mut SeededRng::new(4)).unwrap();
        let zeros = vec![0.0; m.num_parameters()];
        m.set_parameters(&zeros).unwrap();
        assert_eq!(m.forward(&[1.0, 2.0, 3.0]).unwrap().logits, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_two_layer_net() {
        // x = (1, 2); hidden unit h = relu(0.5*1 - 0.25*2 + 0.3) = 0.3
        // logits = (2*h, -1*h) = (0.6, -0.3)
        let config = cfg(2, vec![1]);
        let layer = DenseLayer {
            weights: Matrix2D::from_rows(&[vec![0.5, -0.25]]).unwrap(),
            bias: vec![0.3],
        };
        let head = Matrix2D::from_rows(&[vec![2.0], vec![-1.0]]).unwrap();
        let m = IncModel::from_parts(config, vec![layer], head).unwrap();
        let f = m.forward(&[1.0, 2.0]).unwrap();
        assert!((f.embedding[0] - 0.3).abs() < 1e-15);
        assert!((f.logits[0] - 0.6).abs() < 1e-15);
        assert!((f.logits[1] + 0.3).abs() < 1e-15);
        // Negative pre-activation is clipped.
        let f = m.forward(&[-4.0, 2.0]).unwrap();
        assert_eq!(f.logits, vec![0.0, 0.0]);
    }

    #[test]
    fn batch_forward_matches_rows() {
        let m = IncModel::init(cfg(4, vec![6, 5]), 3, &mut SeededRng::new(5)).unwrap();
        let mut rng = SeededRng::new(6);
        let rows: Vec<Vec<f64>> = (0..7).map(|_| (0..4).map(|_| rng.normal()).collect()).collect();
        let x = Matrix2D::from_rows(&rows).unwrap();
        let (logits, emb) = m.forward_batch(&x).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let f = m.forward(row).unwrap();
            assert_eq!(logits.row(i), f.logits.as_slice());
            assert_eq!(emb.row(i), f.embedding.as_slice());
        }
    }

    #[test]
    fn forward_rejects_wrong_dim() {
        let m = IncModel::init(cfg(4, vec![3]), 2, &mut SeededRng::new(5)).unwrap();
        assert!(matches!(m.forward(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn expand_head_preserves_old_rows() {
        let mut rng = SeededRng::new(7);
        let mut m = IncModel::init(cfg(8, vec![64, 32]), 15, &mut rng).unwrap();
        let before = m.head().clone();
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.1 - 0.3).collect();
        let old_logits = m.forward(&x).unwrap().logits;

        m.expand_head(10, &mut rng).unwrap();
        assert_eq!(m.num_classes(), 25);
        for r in 0..15 {
            assert_eq!(m.head().row(r), before.row(r));
        }
        assert_eq!(&m.forward(&x).unwrap().logits[..15], old_logits.as_slice());

        m.expand_head(10, &mut rng).unwrap();
        assert_eq!(m.head().shape(), (35, 32));
        assert!(matches!(m.expand_head(0, &mut rng), Err(Error::Argument(_))));
    }

    #[test]
    fn parameters_roundtrip() {
        let mut m = IncModel::init(cfg(3, vec![4, 2]), 3, &mut SeededRng::new(8)).unwrap();
        let p = m.parameters();
        assert_eq!(p.len(), 3 * 4 + 4 + 4 * 2 + 2 + 3 * 2);
        let doubled: Vec<f64> = p.iter().map(|v| v * 2.0).collect();
        m.set_parameters(&doubled).unwrap();
        assert_eq!(m.parameters(), doubled);
        assert!(m.set_parameters(&p[1..]).is_err());
    }

    #[test]
    fn snapshot_is_a_faithful_copy() {
        let m = IncModel::init(cfg(3, vec![4]), 3, &mut SeededRng::new(9)).unwrap();
        let s1 = m.snapshot();
        let s2 = m.snapshot();
        let x = [0.3, -0.7, 1.1];
        assert_eq!(s1.forward(&x).unwrap(), m.forward(&x).unwrap());
        assert_eq!(s1.forward(&x).unwrap(), s2.forward(&x).unwrap());
        assert_eq!(s1.num_classes(), 3);
    }
}
