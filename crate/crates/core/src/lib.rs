//! Execution-Cache-Memory (ECM) performance model for streaming loop kernels.
//!
//! Given a machine description and a kernel description, the model predicts
//! the cycles one core needs per cache-line iteration with data in each
//! memory level, the resulting performance, and how it scales across cores
//! until memory bandwidth saturates.
//!
//! ```
//! use ecm_core::{assets, model, notation};
//!
//! let machine = assets::machine("haswell-ep-2695v3").unwrap();
//! let kernel = assets::kernel("ddot").unwrap();
//! let a = model::analyze(&kernel, &machine, 32.4, false).unwrap();
//! assert_eq!(
//!     notation::format_prediction(&a.prediction, notation::Style::Ascii),
//!     "{2 ] 4 ] 8 ] 17.1} cy/CL"
//! );
//! ```

pub mod assets;
pub mod cli;
pub mod error;
mod flow;
pub mod kernel;
pub mod machine;
pub mod model;
pub mod notation;
pub mod scaling;
pub mod scheduler;
pub mod traffic;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
pub use kernel::KernelModel;
pub use machine::MachineModel;
pub use model::{EcmInput, EcmPrediction};
