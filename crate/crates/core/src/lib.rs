//! Sparse neural topic models built from Gaussian-sparsemax networks.
//!
//! A document's topic proportions are `θ = sparsemax(Wᵀx)` for a Gaussian
//! latent `x`, so most proportions are exactly zero. Two generative models
//! sit on top: [`Variant::Nsmdm`] with dense softmax topic-word rows and
//! [`Variant::Nsmtm`] with sparsemax topic-word rows. Both are trained with a
//! variational bound whose posterior penalty is the closed-form quadratic
//! (Relaxed-Wasserstein) divergence between diagonal Gaussians.
//!
//! ```
//! use sparsetopic::simplex::sparsemax;
//!
//! let p = sparsemax(&[1.0, 0.8, -1.0]).unwrap();
//! assert_eq!(p.values(), &[0.6, 0.4, 0.0][..]);
//! ```

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod gaussian;
pub mod metrics;
pub mod model;
pub mod net;
pub mod report;
pub mod simplex;
pub mod synthetic;

pub use corpus::{BowDocument, Corpus, SplitDocument, Vocabulary};
pub use error::{Error, Result};
pub use gaussian::DiagGaussian;
pub use model::{Regularizer, TopicModel, TrainConfig, TrainStatus, Training, Variant};
pub use simplex::{sparsemax, SparsePoint};
