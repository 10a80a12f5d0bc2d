use lsr_register::features::{
    detect_and_describe, detect_and_describe_image, ratio_match_detailed, SiftParams,
};
use lsr_register::lsr::SegmentationMask;
use lsr_register::GrayImage;

const TEN_RECTS: [(usize, usize, usize, usize); 10] = [
    (10, 12, 30, 20),
    (50, 8, 62, 40),
    (80, 15, 120, 24),
    (14, 50, 22, 90),
    (40, 60, 70, 72),
    (90, 50, 110, 85),
    (20, 100, 60, 108),
    (75, 95, 85, 120),
    (100, 100, 118, 112),
    (30, 80, 36, 95),
];

fn ten_rect_mask() -> SegmentationMask {
    SegmentationMask::from_fn(128, 128, |x, y| {
        TEN_RECTS
            .iter()
            .any(|&(x0, y0, x1, y1)| x >= x0 && x < x1 && y >= y0 && y < y1)
    })
}

fn blank(w: usize, h: usize) -> GrayImage {
    GrayImage::filled(w, h, 0.5).unwrap()
}

#[test]
fn all_zero_mask_has_no_keypoints() {
    let mask = SegmentationMask::empty(64, 64);
    let feats = detect_and_describe(&blank(64, 64), &mask, &SiftParams::default()).unwrap();
    assert!(feats.is_empty());
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let mask = SegmentationMask::empty(64, 64);
    assert!(detect_and_describe(&blank(64, 32), &mask, &SiftParams::default()).is_err());
}

#[test]
fn ten_rectangle_mask_golden_count() {
    let mask = ten_rect_mask();
    let feats = detect_and_describe(&blank(128, 128), &mask, &SiftParams::default()).unwrap();
    assert!(feats.len() >= 10, "{}", feats.len());
    assert_eq!(feats.len(), 47, "golden count");
    for f in &feats {
        let k = &f.keypoint;
        assert!(k.x >= 0.0 && k.x < 128.0 && k.y >= 0.0 && k.y < 128.0);
        assert!(k.scale > 0.0);
        assert!((0.0..360.0).contains(&k.orientation));
        assert!((f.descriptor.norm() - 1.0).abs() < 1e-6);
        let px = (k.x.floor() as usize).min(127);
        let py = (k.y.floor() as usize).min(127);
        assert_eq!(k.mask_value, mask.get(px, py));
    }
}

#[test]
fn quarter_turn_preserves_descriptors() {
    let mask = ten_rect_mask();
    let n = 128;
    // Quarter turn: pixel (x, y) of the rotated mask comes from (y, n - 1 - x).
    let rotated = SegmentationMask::from_fn(n, n, |x, y| mask.get(y, n - 1 - x));
    let params = SiftParams::default();
    let a = detect_and_describe(&blank(n, n), &mask, &params).unwrap();
    let b = detect_and_describe(&blank(n, n), &rotated, &params).unwrap();
    // In continuous coordinates the map is (x, y) -> (n - y, x).
    let mut best = Vec::new();
    for f in &a {
        let (ex, ey) = (n as f64 - f.keypoint.y, f.keypoint.x);
        let near = b.iter().filter(|g| {
            (g.keypoint.x - ex).abs() < 0.5
                && (g.keypoint.y - ey).abs() < 0.5
                && (g.keypoint.scale / f.keypoint.scale - 1.0).abs() < 0.05
        });
        if let Some(d) = near
            .map(|g| f.descriptor.distance(&g.descriptor))
            .min_by(f64::total_cmp)
        {
            best.push(d);
        }
    }
    assert!(best.len() >= a.len() / 2, "{} of {}", best.len(), a.len());
    let worst = best.iter().copied().fold(0.0, f64::max);
    assert!(worst < 0.3, "{best:?}");
}

#[test]
fn constant_offset_leaves_features_unchanged() {
    let img = GrayImage::from_fn(96, 96, |x, y| {
        let r2 = (x as f64 - 40.0).powi(2) + (y as f64 - 52.0).powi(2);
        0.1 + 0.6 * (-r2 / 50.0).exp() + 0.2 * (((x / 16 + y / 16) % 2) as f64)
    })
    .unwrap();
    let shifted = img.map(|v| v + 0.1);
    let params = SiftParams::default();
    let a = detect_and_describe_image(&img, &params);
    let b = detect_and_describe_image(&shifted, &params);
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (f, g) in a.iter().zip(&b) {
        assert!((f.keypoint.x - g.keypoint.x).abs() < 1e-6);
        assert!((f.keypoint.y - g.keypoint.y).abs() < 1e-6);
        assert!(f.descriptor.distance(&g.descriptor) < 1e-6);
    }

    let mask = ten_rect_mask();
    let base = blank(128, 128);
    let a = detect_and_describe(&base, &mask, &params).unwrap();
    let b = detect_and_describe(&base.map(|v| v + 0.1), &mask, &params).unwrap();
    assert_eq!(a, b);
}

#[test]
fn identical_lists_match_their_twins() {
    let mask = ten_rect_mask();
    let feats = detect_and_describe(&blank(128, 128), &mask, &SiftParams::default()).unwrap();
    let m = ratio_match_detailed(&feats, &feats, 0.8).unwrap();
    assert!(!m.is_empty());
    for x in &m {
        assert_eq!(x.ref_index, x.sensed_index);
        assert_eq!(x.d1, 0.0);
    }
    let mut sensed: Vec<usize> = m.iter().map(|x| x.sensed_index).collect();
    sensed.dedup();
    assert_eq!(sensed.len(), m.len());
}

#[test]
fn detection_and_matching_are_deterministic() {
    let mask = ten_rect_mask();
    let rotated = SegmentationMask::from_fn(128, 128, |x, y| mask.get(y, 127 - x));
    let params = SiftParams::default();
    let run = || {
        let a = detect_and_describe(&blank(128, 128), &mask, &params).unwrap();
        let b = detect_and_describe(&blank(128, 128), &rotated, &params).unwrap();
        let m = ratio_match_detailed(&a, &b, 0.8).unwrap();
        (a, b, m)
    };
    let first = run();
    for _ in 0..3 {
        assert_eq!(run(), first);
    }
    let (a, b, m) = first;
    for x in &m {
        assert_eq!(
            a[x.ref_index].keypoint.mask_value,
            b[x.sensed_index].keypoint.mask_value
        );
    }
}
