pub mod eval;
pub mod gen_gt;
pub mod loss_eval;
pub mod netcheck;
pub mod postprocess;
pub mod render;
pub mod synth;
