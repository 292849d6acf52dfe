//! Dense linear algebra, seeded randomness and loss/norm primitives.

mod loss;
mod matrix;
mod rng;

pub use loss::{
    argmax, cross_entropy, euclidean, kl_divergence, l1_loss, l2_normalize, mse, softmax,
    vec_norm, DistillLoss, NormKind, KL_FLOOR,
};
pub use matrix::{dot, matmul, Matrix2D};
pub use rng::SeededRng;
