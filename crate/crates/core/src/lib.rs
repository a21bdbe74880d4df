//! Topology-aware gland segmentation toolkit.
//!
//! Medial-axis ground truth, marker-controlled watershed postprocessing,
//! topology and marker losses with analytic gradients, and object-level
//! evaluation (F1, object Dice, object Hausdorff).

pub mod error;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod morph;
pub mod netspec;
pub mod pipeline;
pub mod postprocess;
pub mod raster;
pub mod topo;

pub use error::{Error, Result};
pub use morph::StructuringElement;
pub use raster::{Connectivity, LabelMap, Mask, Raster, RealRaster};
