//! Dense tensors, reverse-mode differentiation, layers and the optimizer.

pub mod adam;
pub mod fk_op;
pub mod gaussian;
pub mod gradcheck;
pub mod layers;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use fk_op::forward_kinematics_op;
pub use gaussian::{gaussian_kl, reparameterize, reparameterize_with};
pub use gradcheck::{grad_check, GradCheckReport};
pub use layers::{Bound, GruCell, Linear, ParamId, Params};
pub use tape::{CustomOp, Gradients, Tape, Var};
pub use tensor::Tensor;
