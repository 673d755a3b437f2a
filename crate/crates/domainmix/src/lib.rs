//! Frequency-domain style augmentation and hyperspherical feature regularization.
//!
//! The crate has two algorithmic halves and the plumbing to run them:
//!
//! * [`spectral`] and [`augment`]: exact 2D DFT analysis of image channels and
//!   Amplitude Mix, which blends the amplitude spectrum of a content image with
//!   that of a style image while keeping the content phase. [`augment`] wraps
//!   the mix in a per-sample Bernoulli policy with a seeded, splittable RNG.
//! * [`vmf`]: the von Mises-Fisher distribution on the unit hypersphere:
//!   log-density with a numerically careful normalization constant, NLL loss
//!   and analytic gradients, EMA-maintained class prototypes, a maximum
//!   likelihood fitter, and a rejection sampler.
//!
//! [`io`] provides deterministic file formats (PPM/PGM images, `EMB1`
//! embedding files, flat key-value configs) and seeded RNG streams. [`harness`]
//! is a self-contained synthetic two-domain training loop that exercises both
//! mechanisms end to end, including an ablation matrix and feature-geometry
//! metrics. [`cli`] exposes everything as subcommands of one binary.
//!
//! See the crate examples for runnable tours of each capability.

pub mod augment;
pub mod cli;
pub mod harness;
pub mod image;
pub mod io;
pub mod spectral;
pub mod vmf;

pub use augment::{amplitude_mix, apply_policy, AugPolicy, AugRecord, LambdaSampler, StylePool};
pub use harness::{ablation_matrix, compactness_metrics, synth_dataset, train, SynthSpec, ToyModel, TrainReport};
pub use image::ImageTensor;
pub use spectral::{decompose, fft2d, ifft2d, recompose, AmplitudePhase, Spectrum};
pub use vmf::{EmbeddingBatch, UnitVector, VmfClassParams};
