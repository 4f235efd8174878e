//! Quantum learning models on a classical statevector simulator.
//!
//! The pipeline: compress tabular data to bit strings (PCA + greedy
//! mutual-information bit allocation), load them as computational basis
//! states, run a layered two-qubit entangling circuit, and train each angle
//! to its exact restricted minimum via a closed-form sinusoid fit. Trained
//! small models seed larger ones through sub-net embedding. The same
//! machinery learns one-step transition maps of discrete dynamics.

pub mod baseline;
pub mod bits;
pub mod csv_io;
pub mod datagen;
pub mod dynamics;
pub mod encoder;
pub mod error;
pub mod model;
pub mod sim;
pub mod trainer;

pub use bits::BitString;
pub use encoder::{EncodedDataset, EncoderSpec, RawDataset};
pub use error::{Error, Result};
pub use model::{CircuitLayout, ModelDocument, ParameterVector, QlmModel, Task};
pub use sim::{Gate, Statevector};
pub use trainer::{TrainConfig, TrainReport};
