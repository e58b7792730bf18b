//! Parameter-free nearest-neighbor classification.
//!
//! The crate provides an exact k-d tree ([`spatial_index`]), the
//! natural-neighbor search that picks a neighborhood size from the data
//! ([`natural_neighbor`]), the extended nearest neighbor (ENN) classifier
//! and its natural-neighbor variant ENaN ([`classification`]), and a
//! cross-validation harness for benchmarking them ([`harness`]).
//!
//! ```
//! use enan::data_io::Dataset;
//! use enan::classification::train_enan;
//!
//! let rows = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.0, 0.1], vec![5.0, 5.0], vec![5.1, 5.0], vec![5.0, 5.1]];
//! let ds = Dataset::from_rows("toy", &rows, &["a", "a", "a", "b", "b", "b"]).unwrap();
//! let model = train_enan(ds).unwrap();
//! assert_eq!(model.predict_one(&[4.9, 5.2]).unwrap(), 1);
//! ```

pub mod classification;
pub mod data_io;
pub mod error;
pub mod harness;
pub mod natural_neighbor;
pub mod spatial_index;

pub use error::{Error, Result};
