//! Sense-classification distillation: a student maps its features into the
//! teacher space and is trained so that its dot-product choice among a
//! token's senses matches the teacher's.

mod io;
mod loss;
mod model;
mod train;

pub use io::{load_model, read_file, save_model, to_bytes, write_file, MAGIC};
pub use loss::{ce_grad, ce_loss, sense_logits, softmax_prob, Gradients};
pub use model::{student_forward, Activation, StudentModel};
pub use train::{
    infer_embeddings, infer_labels, train, train_from, EpochStats, Optimizer, StudentArch,
    TrainConfig, TrainOutcome,
};
