use lsr_register::estimate::{fit_affine_lsm, fit_affine_ransac};
use lsr_register::{AffineTransform, CorrespondenceSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Independent transform application, written out by hand.
fn apply(c: [f64; 6], p: [f64; 2]) -> [f64; 2] {
    [
        c[0] * p[0] + c[1] * p[1] + c[2],
        c[3] * p[0] + c[4] * p[1] + c[5],
    ]
}

fn random_affine(rng: &mut ChaCha8Rng) -> [f64; 6] {
    loop {
        let c: [f64; 6] = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-100.0..100.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-100.0..100.0),
        ];
        if (c[0] * c[4] - c[1] * c[3]).abs() > 0.1 {
            return c;
        }
    }
}

#[test]
fn five_point_recovery_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let c = random_affine(&mut rng);
        let pairs: Vec<_> = (0..5)
            .map(|_| {
                let p = [rng.gen_range(0.0..512.0), rng.gen_range(0.0..512.0)];
                (p, apply(c, p))
            })
            .collect();
        let fit = fit_affine_lsm(&CorrespondenceSet::from_pairs(pairs)).unwrap();
        for (got, want) in fit.transform.coefficients().iter().zip(c) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}

#[test]
fn noisy_fit_rmse_is_in_expected_band() {
    // Displacement vectors with RMS length 0.5 px.
    let noise = Normal::new(0.0, 0.5 / 2f64.sqrt()).unwrap();
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_affine(&mut rng);
        let pairs: Vec<_> = (0..100)
            .map(|_| {
                let p = [rng.gen_range(0.0..512.0), rng.gen_range(0.0..512.0)];
                let q = apply(c, p);
                (
                    p,
                    [q[0] + noise.sample(&mut rng), q[1] + noise.sample(&mut rng)],
                )
            })
            .collect();
        let fit = fit_affine_lsm(&CorrespondenceSet::from_pairs(pairs)).unwrap();
        assert!((0.4..=0.8).contains(&fit.rmse), "seed {seed}: {}", fit.rmse);
        let direct = (fit.residuals.iter().map(|r| r * r).sum::<f64>() / 100.0).sqrt();
        assert!((direct - fit.rmse).abs() < 1e-12);
    }
}

#[test]
fn ransac_recovers_inliers_among_uniform_outliers() {
    let mut passes = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let t = AffineTransform::rotation(rng.gen_range(0.0..360.0))
            .compose(&AffineTransform::scale(rng.gen_range(0.7..1.3)))
            .about(256.0, 256.0);
        let mut cs = CorrespondenceSet::default();
        for _ in 0..80 {
            let p = [rng.gen_range(0.0..512.0), rng.gen_range(0.0..512.0)];
            cs.push(p, t.apply_point(p));
        }
        for _ in 0..20 {
            cs.push(
                [rng.gen_range(0.0..512.0), rng.gen_range(0.0..512.0)],
                [rng.gen_range(0.0..512.0), rng.gen_range(0.0..512.0)],
            );
        }
        let r = fit_affine_ransac(&cs, 1.0, 500, seed).unwrap();
        let kept = r.inliers[..80].iter().filter(|&&b| b).count();
        if kept >= 78 {
            passes += 1;
        }
    }
    println!("ransac pass rate {passes}/50");
    assert_eq!(passes, 50);
}
