//! Coarse-to-fine registration loop.
//!
//! Each level segments and matches both images, filters the matches, fits an
//! affine map and accepts it when `2^L * rmse` drops below `epsilon`;
//! otherwise the next coarser level is tried.

use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};
use crate::estimate::{fit_affine_lsm, scaled_rmse, FitResult};
use crate::features::{detect_and_describe, ratio_match, SiftParams, DEFAULT_D_RATIO};
use crate::imagecore::{downsample, AffineTransform, GrayImage, DEFAULT_FLAT_THRESHOLD};
use crate::lsr::{segment, SegmentParams, SegmentationMask, DEFAULT_MIN_REGION_SIZE, DEFAULT_TAU};
use crate::registry::FilterRegistry;

pub const DEFAULT_EPSILON: f64 = 1.0;
pub const DEFAULT_MAX_LEVELS: u32 = 3;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_FILTER: &str = "gor";
/// Fewest filtered matches a fit is attempted on. Three pairs always fit
/// exactly, so a bare minimum would accept any surviving triple.
pub const DEFAULT_MIN_SURVIVORS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub tau: f64,
    pub d_ratio: f64,
    pub epsilon: f64,
    pub max_levels: u32,
    pub flat_threshold: f64,
    pub min_region_size: usize,
    pub seed: u64,
    pub filter: String,
    pub min_survivors: usize,
    pub sift: SiftParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            d_ratio: DEFAULT_D_RATIO,
            epsilon: DEFAULT_EPSILON,
            max_levels: DEFAULT_MAX_LEVELS,
            flat_threshold: DEFAULT_FLAT_THRESHOLD,
            min_region_size: DEFAULT_MIN_REGION_SIZE,
            seed: DEFAULT_SEED,
            filter: DEFAULT_FILTER.to_string(),
            min_survivors: DEFAULT_MIN_SURVIVORS,
            sift: SiftParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon {} must be > 0", self.epsilon));
        }
        if self.max_levels < 1 || self.max_levels > 16 {
            return bad(format!("max levels {} not in [1, 16]", self.max_levels));
        }
        if !(self.d_ratio > 0.0 && self.d_ratio < 1.0) {
            return bad(format!("dRatio {} not in (0, 1)", self.d_ratio));
        }
        if self.min_survivors < 3 {
            return bad(format!("min survivors {} must be >= 3", self.min_survivors));
        }
        self.segment_params().validate()
    }

    pub fn segment_params(&self) -> SegmentParams {
        SegmentParams {
            tau: self.tau,
            flat_threshold: self.flat_threshold,
            min_region_size: self.min_region_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    /// `2^L * rmse < epsilon`.
    Accepted,
    AboveThreshold,
    /// Too few matches survived, or the survivors were collinear.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    pub level: u32,
    pub ref_dims: (usize, usize),
    pub sensed_dims: (usize, usize),
    pub initial_matches: usize,
    pub survivors: usize,
    pub scaled_rmse: Option<f64>,
    pub status: LevelStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistrationStatus {
    Success,
    /// Every fitted level stayed at or above `epsilon`.
    Failure,
    /// No level produced a fit at all.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    pub status: RegistrationStatus,
    /// Full-resolution map from reference to sensed coordinates; only on success.
    pub final_transform: Option<AffineTransform>,
    /// Accepted level, or the level with the lowest scaled RMSE on failure.
    pub level_used: Option<u32>,
    pub scaled_rmse: Option<f64>,
    /// Filtered matches of `level_used`, in full-resolution coordinates.
    pub survivors: CorrespondenceSet,
    /// Unfiltered matches of `level_used`, in full-resolution coordinates.
    pub initial: CorrespondenceSet,
    pub per_level: Vec<LevelDiagnostics>,
}

impl RegistrationReport {
    pub fn is_success(&self) -> bool {
        self.status == RegistrationStatus::Success
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `S o t o S^-1` with `S` scaling by `2^level`: maps a level-`level` transform
/// to full-resolution coordinates.
pub fn rescale_transform(t: &AffineTransform, level: u32) -> AffineTransform {
    let f = 2f64.powi(level as i32);
    AffineTransform::scale(f)
        .compose(t)
        .compose(&AffineTransform::scale(1.0 / f))
}

/// Matches found at one pyramid level, in that level's coordinates.
#[derive(Debug, Clone)]
pub struct LevelMatches {
    pub matches: CorrespondenceSet,
    pub ref_dims: (usize, usize),
    pub sensed_dims: (usize, usize),
    pub masks: Option<(SegmentationMask, SegmentationMask)>,
}

/// Supplies initial matches per level.
pub trait LevelMatcher {
    fn matches_at(&self, level: u32, cfg: &PipelineConfig) -> Result<LevelMatches>;
}

/// Segments and matches an image pair.
pub struct ImagePair<'a> {
    pub reference: &'a GrayImage,
    pub sensed: &'a GrayImage,
}

impl LevelMatcher for ImagePair<'_> {
    fn matches_at(&self, level: u32, cfg: &PipelineConfig) -> Result<LevelMatches> {
        let side = |img: &GrayImage| -> Result<_> {
            let small = downsample(img, level)?;
            let seg = segment(&small, &cfg.segment_params())?;
            let feats = detect_and_describe(&small, &seg.mask, &cfg.sift)?;
            Ok((small.dims(), seg.mask, feats))
        };
        let (r, s) = rayon::join(|| side(self.reference), || side(self.sensed));
        let ((ref_dims, ref_mask, ref_feats), (sensed_dims, sensed_mask, sensed_feats)) = (r?, s?);
        let matches = ratio_match(&ref_feats, &sensed_feats, cfg.d_ratio)?;
        Ok(LevelMatches {
            matches,
            ref_dims,
            sensed_dims,
            masks: Some((ref_mask, sensed_mask)),
        })
    }
}

/// Fixed full-resolution matches, rescaled to every level; exercises the loop
/// without images.
pub struct FixedMatches {
    pub matches: CorrespondenceSet,
    pub ref_dims: (usize, usize),
    pub sensed_dims: (usize, usize),
}

impl LevelMatcher for FixedMatches {
    fn matches_at(&self, level: u32, _cfg: &PipelineConfig) -> Result<LevelMatches> {
        let f = 2f64.powi(level as i32);
        let shrink = |(w, h): (usize, usize)| (w.div_ceil(1 << level), h.div_ceil(1 << level));
        Ok(LevelMatches {
            matches: self.matches.scaled(1.0 / f),
            ref_dims: shrink(self.ref_dims),
            sensed_dims: shrink(self.sensed_dims),
            masks: None,
        })
    }
}

/// Per-level record kept for the final report.
struct LevelRun {
    initial: CorrespondenceSet,
    survivors: CorrespondenceSet,
    fit: Option<FitResult>,
    scaled: Option<f64>,
}

/// Runs the level loop; `on_level` sees every level's matches (used for dumping masks).
pub fn run_levels(
    source: &dyn LevelMatcher,
    cfg: &PipelineConfig,
    filters: &FilterRegistry,
    mut on_level: impl FnMut(u32, &LevelMatches),
) -> Result<RegistrationReport> {
    cfg.validate()?;
    let filter = filters.get(&cfg.filter)?;
    let mut per_level = Vec::new();
    let mut runs: Vec<LevelRun> = Vec::new();

    for level in 0..cfg.max_levels {
        let lm = source.matches_at(level, cfg)?;
        on_level(level, &lm);
        let out = filter.filter(&lm.matches, cfg.seed)?;
        let survivors = lm.matches.select(&out.kept);
        let fit = if out.degenerate || survivors.len() < cfg.min_survivors {
            None
        } else {
            match fit_affine_lsm(&survivors) {
                Ok(f) => Some(f),
                Err(Error::DegenerateConfiguration(_))
                | Err(Error::InsufficientCorrespondences { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        let scaled = fit.as_ref().map(|f| scaled_rmse(f, level));
        let status = match scaled {
            None => LevelStatus::Degenerate,
            Some(e) if e < cfg.epsilon => LevelStatus::Accepted,
            Some(_) => LevelStatus::AboveThreshold,
        };
        per_level.push(LevelDiagnostics {
            level,
            ref_dims: lm.ref_dims,
            sensed_dims: lm.sensed_dims,
            initial_matches: lm.matches.len(),
            survivors: survivors.len(),
            scaled_rmse: scaled,
            status,
        });
        runs.push(LevelRun {
            initial: lm.matches,
            survivors,
            fit,
            scaled,
        });
        if status == LevelStatus::Accepted {
            break;
        }
    }

    let best = runs
        .iter()
        .enumerate()
        .filter_map(|(l, r)| r.scaled.map(|e| (l, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(l, _)| l);
    let full = |cs: &CorrespondenceSet, l: usize| cs.scaled(2f64.powi(l as i32));

    Ok(match best {
        None => RegistrationReport {
            status: RegistrationStatus::Degenerate,
            final_transform: None,
            level_used: None,
            scaled_rmse: None,
            survivors: CorrespondenceSet::default(),
            initial: CorrespondenceSet::default(),
            per_level,
        },
        Some(l) => {
            let run = &runs[l];
            let accepted = per_level[l].status == LevelStatus::Accepted;
            RegistrationReport {
                status: if accepted {
                    RegistrationStatus::Success
                } else {
                    RegistrationStatus::Failure
                },
                final_transform: accepted.then(|| {
                    rescale_transform(&run.fit.as_ref().expect("fitted level").transform, l as u32)
                }),
                level_used: Some(l as u32),
                scaled_rmse: run.scaled,
                survivors: full(&run.survivors, l),
                initial: full(&run.initial, l),
                per_level,
            }
        }
    })
}

/// Registers `sensed` onto `reference` with the default filter registry.
pub fn register(
    reference: &GrayImage,
    sensed: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<RegistrationReport> {
    register_with(
        reference,
        sensed,
        cfg,
        &FilterRegistry::default(),
        |_, _| {},
    )
}

pub fn register_with(
    reference: &GrayImage,
    sensed: &GrayImage,
    cfg: &PipelineConfig,
    filters: &FilterRegistry,
    on_level: impl FnMut(u32, &LevelMatches),
) -> Result<RegistrationReport> {
    cfg.validate()?;
    let need = 1usize << cfg.max_levels;
    for (name, img) in [("reference", reference), ("sensed", sensed)] {
        if img.width() < need || img.height() < need {
            return Err(Error::ImageTooSmall(format!(
                "{name} image {}x{} is smaller than {need}x{need}",
                img.width(),
                img.height()
            )));
        }
    }
    run_levels(&ImagePair { reference, sensed }, cfg, filters, on_level)
}
