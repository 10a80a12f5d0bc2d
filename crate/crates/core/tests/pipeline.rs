use lsr_register::estimate::{fit_affine_lsm, FitResult};
use lsr_register::eval::{general_position_correspondences, synthetic_scene};
use lsr_register::pipeline::{
    register, run_levels, LevelMatcher, LevelMatches, LevelStatus, PipelineConfig,
    RegistrationStatus,
};
use lsr_register::registry::{FilterOutcome, FilterRegistry, OutlierFilter};
use lsr_register::{AffineTransform, CorrespondenceSet, GrayImage, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scene() -> GrayImage {
    synthetic_scene(256, 256, 1).unwrap()
}

#[test]
fn self_registration_is_identity_at_level_zero() {
    let img = scene();
    let rep = register(&img, &img, &PipelineConfig::default()).unwrap();
    assert!(rep.is_success(), "{:?}", rep.per_level);
    assert_eq!(rep.level_used, Some(0));
    assert!(rep.scaled_rmse.unwrap() < 1.0);
    let t = rep.final_transform.unwrap();
    assert!(
        t.max_coefficient_diff(&AffineTransform::IDENTITY) < 1e-3,
        "{t:?}"
    );
}

#[test]
fn reports_are_deterministic() {
    let img = scene();
    let t = AffineTransform::rotation(30.0).about(128.0, 128.0);
    let sensed = lsr_register::imagecore::warp_image(&img, &t, 256, 256).unwrap();
    let cfg = PipelineConfig::default();
    let a = register(&img, &sensed, &cfg).unwrap();
    let b = register(&img, &sensed, &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn unrelated_scenes_fail_without_a_transform() {
    let a = synthetic_scene(256, 256, 11).unwrap();
    let b = synthetic_scene(256, 256, 12).unwrap();
    let rep = register(&a, &b, &PipelineConfig::default()).unwrap();
    assert_ne!(
        rep.status,
        RegistrationStatus::Success,
        "{:?}",
        rep.per_level
    );
    assert!(rep.final_transform.is_none());
    assert_eq!(rep.per_level.len(), 3);
    assert!(rep
        .per_level
        .iter()
        .all(|d| d.status != LevelStatus::Accepted));
}

struct KeepAll;

impl OutlierFilter for KeepAll {
    fn name(&self) -> &str {
        "all"
    }

    fn filter(&self, cs: &CorrespondenceSet, _seed: u64) -> Result<FilterOutcome> {
        Ok(FilterOutcome {
            kept: (0..cs.len()).collect(),
            degenerate: false,
        })
    }
}

fn keep_all() -> (PipelineConfig, FilterRegistry) {
    let mut filters = FilterRegistry::empty();
    filters.register(Box::new(KeepAll));
    (
        PipelineConfig {
            filter: "all".into(),
            min_survivors: 3,
            ..Default::default()
        },
        filters,
    )
}

/// Noisy at full resolution, exact from level 1 on.
struct Escalating {
    truth: AffineTransform,
}

impl LevelMatcher for Escalating {
    fn matches_at(&self, level: u32, _cfg: &PipelineConfig) -> Result<LevelMatches> {
        let f = 2f64.powi(level as i32);
        let cs = general_position_correspondences(&self.truth, 20, (400, 400), 5);
        let mut r = ChaCha8Rng::seed_from_u64(9);
        let noise = if level == 0 { 3.0 } else { 0.0 };
        let pairs = cs.pairs().map(|(p, q)| {
            let q = [
                q[0] + noise * r.gen_range(-1.0..1.0),
                q[1] + noise * r.gen_range(-1.0..1.0),
            ];
            ([p[0] / f, p[1] / f], [q[0] / f, q[1] / f])
        });
        let dims = (400usize.div_ceil(1 << level), 400usize.div_ceil(1 << level));
        Ok(LevelMatches {
            matches: CorrespondenceSet::from_pairs(pairs.collect::<Vec<_>>()),
            ref_dims: dims,
            sensed_dims: dims,
            masks: None,
        })
    }
}

#[test]
fn coarse_success_reverifies_and_dims_shrink() {
    let truth = AffineTransform::new(0.9, -0.3, 20.0, 0.25, 1.05, -10.0);
    let src = Escalating { truth };
    let (cfg, filters) = keep_all();
    let rep = run_levels(&src, &cfg, &filters, |_, _| {}).unwrap();
    assert!(rep.is_success(), "{:?}", rep.per_level);
    assert_eq!(rep.level_used, Some(1));
    assert_eq!(rep.per_level[0].status, LevelStatus::AboveThreshold);
    assert!(rep
        .per_level
        .windows(2)
        .all(|w| w[1].ref_dims.0 < w[0].ref_dims.0));

    let level = rep.level_used.unwrap();
    let f = 2f64.powi(level as i32);
    let t = rep.final_transform.unwrap();
    let coarse = AffineTransform::scale(1.0 / f)
        .compose(&t)
        .compose(&AffineTransform::scale(f));
    let e = f * FitResult::evaluate(coarse, &rep.survivors.scaled(1.0 / f)).rmse;
    assert!(
        (e - rep.scaled_rmse.unwrap()).abs() < 1e-9,
        "{e} vs {:?}",
        rep.scaled_rmse
    );
    assert!(t.max_coefficient_diff(&truth) < 1e-6);
    for d in &rep.per_level {
        let m = src.matches_at(d.level, &cfg).unwrap().matches;
        let fit = fit_affine_lsm(&m).unwrap();
        assert!((d.scaled_rmse.unwrap() - 2f64.powi(d.level as i32) * fit.rmse).abs() < 1e-9);
    }
}

#[test]
fn failure_reports_best_level() {
    let truth = AffineTransform::rotation(10.0);
    struct Noisy(AffineTransform);
    impl LevelMatcher for Noisy {
        fn matches_at(&self, level: u32, _cfg: &PipelineConfig) -> Result<LevelMatches> {
            let cs = general_position_correspondences(&self.0, 15, (300, 300), level as u64);
            let mut r = ChaCha8Rng::seed_from_u64(100 + level as u64);
            let amp = [6.0, 3.0, 8.0][level as usize];
            let pairs: Vec<_> = cs
                .pairs()
                .map(|(p, q)| {
                    (
                        p,
                        [
                            q[0] + amp * r.gen_range(-1.0..1.0),
                            q[1] + amp * r.gen_range(-1.0..1.0),
                        ],
                    )
                })
                .collect();
            Ok(LevelMatches {
                matches: CorrespondenceSet::from_pairs(pairs),
                ref_dims: (300 >> level, 300 >> level),
                sensed_dims: (300 >> level, 300 >> level),
                masks: None,
            })
        }
    }
    let (cfg, filters) = keep_all();
    let rep = run_levels(&Noisy(truth), &cfg, &filters, |_, _| {}).unwrap();
    assert_eq!(
        rep.status,
        RegistrationStatus::Failure,
        "{:?}",
        rep.per_level
    );
    assert!(rep.final_transform.is_none());
    let best = rep
        .per_level
        .iter()
        .filter_map(|d| d.scaled_rmse.map(|e| (d.level, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(rep.level_used, Some(best.0));
    assert_eq!(rep.scaled_rmse, Some(best.1));
    assert!(!rep.survivors.is_empty());
}
