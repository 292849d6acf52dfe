//! Backpropagation for the mixed classification + distillation objective
//!
//! `loss = (1 - alpha) * CE(z, y) + alpha * D(z[..u], teacher(x))`
//!
//! where `z` are the student logits and `u` the teacher's class count. `D` is
//! MSE or L1 over raw logits, or KL(teacher || student) over softmaxed logits.

use crate::error::{Error, Result};
use crate::numkit::{cross_entropy, dot, kl_divergence, l1_loss, mse, softmax, DistillLoss, Matrix2D};

use super::{IncModel, TeacherSnapshot};

/// Parameter gradients laid out like the model: per hidden layer (weights, bias), then the head.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden: Vec<(Matrix2D, Vec<f64>)>,
    pub head: Matrix2D,
}

impl Gradients {
    fn zeros_like(model: &IncModel) -> Self {
        Self {
            hidden: model
                .hidden
                .iter()
                .map(|l| {
                    (
                        Matrix2D::zeros(l.weights.rows(), l.weights.cols()),
                        vec![0.0; l.bias.len()],
                    )
                })
                .collect(),
            head: Matrix2D::zeros(model.head.rows(), model.head.cols()),
        }
    }

    /// Same ordering as [`IncModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.hidden {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out.extend_from_slice(self.head.data());
        out
    }

    fn scale(&mut self, n: usize) {
        let n = n as f64;
        for (w, b) in &mut self.hidden {
            w.data_mut().iter_mut().for_each(|g| *g /= n);
            b.iter_mut().for_each(|g| *g /= n);
        }
        self.head.data_mut().iter_mut().for_each(|g| *g /= n);
    }
}

struct Trace {
    /// Input to each hidden layer, then the embedding.
    activations: Vec<Vec<f64>>,
    /// Pre-ReLU values of each hidden layer.
    pre: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl IncModel {
    fn trace(&self, x: &[f64]) -> Trace {
        let mut activations = Vec::with_capacity(self.hidden.len() + 1);
        let mut pre = Vec::with_capacity(self.hidden.len());
        let mut act = x.to_vec();
        for layer in &self.hidden {
            let z = layer.pre_activation(&act);
            let next = z.iter().map(|v| v.max(0.0)).collect();
            activations.push(act);
            pre.push(z);
            act = next;
        }
        let logits = self.head.iter_rows().map(|w| dot(w, &act)).collect();
        activations.push(act);
        Trace {
            activations,
            pre,
            logits,
        }
    }

    fn check_batch(
        &self,
        inputs: &[&[f64]],
        labels: &[usize],
        teacher: Option<&TeacherSnapshot>,
        alpha: f64,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Argument(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        match teacher {
            None if alpha > 0.0 => {
                return Err(Error::Argument("alpha > 0 requires a teacher".into()))
            }
            Some(_) if alpha == 0.0 => {
                return Err(Error::Argument("a teacher requires alpha > 0".into()))
            }
            Some(t) if t.num_classes() > self.num_classes() => {
                return Err(Error::shape(
                    format!("teacher with {} classes", t.num_classes()),
                    format!("student with {} classes", self.num_classes()),
                ))
            }
            Some(t) if t.model().input_dim() != self.input_dim() => {
                return Err(Error::shape(
                    format!("teacher input dim {}", t.model().input_dim()),
                    format!("student input dim {}", self.input_dim()),
                ))
            }
            _ => {}
        }
        if inputs.is_empty() {
            return Err(Error::EmptyInput("training batch"));
        }
        if inputs.len() != labels.len() {
            return Err(Error::shape(
                format!("{} samples", inputs.len()),
                format!("{} labels", labels.len()),
            ));
        }
        for (x, &y) in inputs.iter().zip(labels) {
            self.check_input(x)?;
            if y >= self.num_classes() {
                return Err(Error::Index {
                    index: y,
                    len: self.num_classes(),
                });
            }
        }
        Ok(())
    }

    /// Per-sample loss and its gradient with respect to the logits.
    fn logit_loss(
        logits: &[f64],
        label: usize,
        teacher_logits: Option<&[f64]>,
        alpha: f64,
        distill: DistillLoss,
    ) -> Result<(f64, Vec<f64>)> {
        let ce_weight = 1.0 - alpha;
        let p = softmax(logits)?;
        let mut dz: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, pj)| ce_weight * (pj - if j == label { 1.0 } else { 0.0 }))
            .collect();
        let mut loss = ce_weight * cross_entropy(logits, label)?;

        if let Some(t) = teacher_logits {
            let u = t.len();
            let s = &logits[..u];
            let un = u as f64;
            match distill {
                DistillLoss::Mse => {
                    loss += alpha * mse(s, t)?;
                    for j in 0..u {
                        dz[j] += alpha * 2.0 * (s[j] - t[j]) / un;
                    }
                }
                DistillLoss::L1 => {
                    loss += alpha * l1_loss(s, t)?;
                    for j in 0..u {
                        let diff = s[j] - t[j];
                        let sign = if diff > 0.0 {
                            1.0
                        } else if diff < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        dz[j] += alpha * sign / un;
                    }
                }
                DistillLoss::Kld => {
                    let pt = softmax(t)?;
                    let ps = softmax(s)?;
                    loss += alpha * kl_divergence(&pt, &ps)?;
                    for j in 0..u {
                        dz[j] += alpha * (ps[j] - pt[j]);
                    }
                }
            }
        }
        Ok((loss, dz))
    }

    /// Mean batch loss, forward only.
    pub fn batch_loss(
        &self,
        inputs: &[&[f64]],
        labels: &[usize],
        teacher: Option<&TeacherSnapshot>,
        alpha: f64,
        distill: DistillLoss,
    ) -> Result<f64> {
        self.check_batch(inputs, labels, teacher, alpha)?;
        let mut total = 0.0;
        for (x, &y) in inputs.iter().zip(labels) {
            let logits = self.forward(x)?.logits;
            let t = teacher.map(|t| t.forward(x)).transpose()?.map(|f| f.logits);
            total += Self::logit_loss(&logits, y, t.as_deref(), alpha, distill)?.0;
        }
        Ok(total / inputs.len() as f64)
    }

    /// Mean batch loss and its gradient with respect to every parameter.
    pub fn gradients(
        &self,
        inputs: &[&[f64]],
        labels: &[usize],
        teacher: Option<&TeacherSnapshot>,
        alpha: f64,
        distill: DistillLoss,
    ) -> Result<(f64, Gradients)> {
        self.check_batch(inputs, labels, teacher, alpha)?;
        let mut grads = Gradients::zeros_like(self);
        let mut total = 0.0;

        for (x, &y) in inputs.iter().zip(labels) {
            let trace = self.trace(x);
            let t = teacher.map(|t| t.forward(x)).transpose()?.map(|f| f.logits);
            let (loss, dz) = Self::logit_loss(&trace.logits, y, t.as_deref(), alpha, distill)?;
            total += loss;

            let embedding = trace.activations.last().expect("embedding is always traced");
            let mut delta = vec![0.0; embedding.len()];
            for (j, &g) in dz.iter().enumerate() {
                let grad_row = grads.head.row_mut(j);
                for (gw, e) in grad_row.iter_mut().zip(embedding) {
                    *gw += g * e;
                }
                for (d, w) in delta.iter_mut().zip(self.head.row(j)) {
                    *d += g * w;
                }
            }

            for (l, layer) in self.hidden.iter().enumerate().rev() {
                for (d, z) in delta.iter_mut().zip(&trace.pre[l]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
                let input = &trace.activations[l];
                let (gw, gb) = &mut grads.hidden[l];
                let mut next = vec![0.0; input.len()];
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    for (g, a) in gw.row_mut(o).iter_mut().zip(input) {
                        *g += d * a;
                    }
                    for (nx, w) in next.iter_mut().zip(layer.weights.row(o)) {
                        *nx += d * w;
                    }
                }
                delta = next;
            }
        }

        grads.scale(inputs.len());
        Ok((total / inputs.len() as f64, grads))
    }

    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.hidden.iter_mut().zip(&grads.hidden) {
            for (w, g) in layer.weights.data_mut().iter_mut().zip(gw.data()) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
        for (w, g) in self.head.data_mut().iter_mut().zip(grads.head.data()) {
            *w -= lr * g;
        }
    }

    /// One SGD step on the mean batch loss. Returns the pre-step loss.
    pub fn backward_and_step(
        &mut self,
        inputs: &[&[f64]],
        labels: &[usize],
        teacher: Option<&TeacherSnapshot>,
        alpha: f64,
        distill: DistillLoss,
        lr: f64,
    ) -> Result<f64> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Argument(format!("learning rate must be positive, got {lr}")));
        }
        let (loss, grads) = self.gradients(inputs, labels, teacher, alpha, distill)?;
        self.apply_gradients(&grads, lr);
        Ok(loss)
    }
}
