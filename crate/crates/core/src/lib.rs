//! Automatic affine registration of image pairs with inconsistent content.
//!
//! Both images are segmented into line-support regions, SIFT features are
//! matched on the resulting binary masks, mismatches are removed by comparing
//! the side-of-edge classifications of the matched points, and an affine
//! transform is fitted by least squares. If the fit is not accurate enough
//! the pair is re-processed at a coarser resolution.

pub mod correspondence;
pub mod error;
pub mod estimate;
pub mod eval;
pub mod features;
pub mod gor;
pub mod imagecore;
pub mod lsr;
pub mod pipeline;
pub mod registry;

pub use correspondence::CorrespondenceSet;
pub use error::{Error, Result};
pub use imagecore::{AffineTransform, GrayImage};
