//! SIFT features computed on segmentation masks, and ratio-test matching.

mod matching;
pub(crate) mod scale_space;
mod sift;

pub use matching::{ratio_match, ratio_match_detailed, FeatureMatch, DEFAULT_D_RATIO};
pub use sift::{
    detect_and_describe, detect_and_describe_image, Descriptor, Feature, Keypoint, SiftParams,
    DESCRIPTOR_LEN,
};
