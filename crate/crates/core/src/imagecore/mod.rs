//! Image container, PNG/PGM I/O, box pyramid, gradient field, affine warping
//! and checkerboard mosaics.

mod gradient;
mod gray;
mod pyramid;
mod transform;
mod warp;

pub use gradient::{
    angular_distance, compute_gradient_field, wrap_degrees, GradientField, DEFAULT_FLAT_THRESHOLD,
};
pub use gray::{from_dynamic, load_image, GrayImage};
pub use pyramid::downsample;
pub use transform::AffineTransform;
pub use warp::{checkerboard_mosaic, sample_bilinear, warp_image};
