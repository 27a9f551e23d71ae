//! Diet Networks for genotype classification.
//!
//! The very wide first layer of a classifier over SNP genotypes (and the
//! matching reconstruction layer) is not learnt directly. Instead a small
//! auxiliary network maps a per-SNP embedding to that SNP's row of the fat
//! weight matrix, so the number of free parameters depends on the embedding
//! width rather than on the number of SNPs.
//!
//! * [`genotype`]: `.raw`/panel parsing, MAF and LD filters, synthesis, folds.
//! * [`embedding`]: random projection, per-class histogram, DAE-based and
//!   one-hot SNP embeddings.
//! * [`nn`]: dense layers, losses, RMSProp, gradient checking.
//! * [`diet`]: the composite model and its training loop.
//! * [`baselines`]: PCA with linear and MLP heads.
//! * [`evaluation`]: cross-validation, confusion matrices, parameter counts.

pub mod baselines;
mod bin;
pub mod diet;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod genotype;
pub mod hash;
pub mod nn;
pub mod par;

pub use error::{Error, Result};
