//! Patch tiling, augmentation and the synthetic corpus generator.

mod augment;
mod patches;
pub mod synth;

pub use augment::{augment, gaussian_blur, median_blur, AugmentOp, AugmentationSpec};
pub use patches::{extract_patches, stitch, Patch, PatchGrid};
pub use synth::{synth_corpus, synth_image, ShapeFamily, SynthCorpusSpec, SynthSample};
