use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::{Context, Result};
use clap::ValueEnum;
use lsr_register::eval::{
    general_position_correspondences, inject_outliers, rotation_scale_protocol, shear_protocol,
    synthesize_pair, synthetic_scene, GroundTruth,
};
use lsr_register::AffineTransform;
use serde::Serialize;

use crate::args::{MakeFixturesArgs, Protocol, SynthArgs};
use crate::eval::TRUTH_SUFFIX;
use crate::manifest::ManifestBuilder;

const FIXTURE_FRAME: usize = 512;

struct FixtureSpec {
    name: &'static str,
    transform: AffineTransform,
    inliers: usize,
    outliers: usize,
}

fn suite() -> Vec<FixtureSpec> {
    let c = FIXTURE_FRAME as f64 / 2.0;
    vec![
        FixtureSpec {
            name: "rotation_scale",
            transform: rotation_scale_protocol(FIXTURE_FRAME, FIXTURE_FRAME),
            inliers: 50,
            outliers: 30,
        },
        FixtureSpec {
            name: "shear",
            transform: shear_protocol(FIXTURE_FRAME, FIXTURE_FRAME),
            inliers: 50,
            outliers: 30,
        },
        FixtureSpec {
            name: "outlier_heavy",
            transform: AffineTransform::rotation(-35.0).about(c, c),
            inliers: 40,
            outliers: 60,
        },
    ]
}

/// Exact inliers in general position plus uniform outliers, one pair of files per fixture.
pub fn make_fixtures(args: &MakeFixturesArgs) -> Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = ManifestBuilder::start("make-fixtures", &args.out);
    let bounds = (FIXTURE_FRAME, FIXTURE_FRAME);
    for (k, s) in suite().iter().enumerate() {
        let seed = args.seed.wrapping_add(k as u64);
        let inliers = general_position_correspondences(&s.transform, s.inliers, bounds, seed);
        let (cs, _) = inject_outliers(&inliers, s.outliers, bounds, seed ^ 0x9e37);
        cs.write_csv(BufWriter::new(File::create(
            manifest.output(&format!("{}.csv", s.name)),
        )?))?;
        let truth = GroundTruth::new(s.transform);
        fs::write(
            manifest.output(&format!("{}{TRUTH_SUFFIX}", s.name)),
            serde_json::to_string_pretty(&truth)? + "\n",
        )?;
    }
    #[derive(Serialize)]
    struct Frame {
        frame: usize,
    }
    manifest.finish(
        Frame {
            frame: FIXTURE_FRAME,
        },
        Some(args.seed),
    )?;
    Ok(())
}

/// Synthetic scene, its warped copy and the ground-truth transform.
pub fn synth(args: &SynthArgs) -> Result<()> {
    let n = args.size;
    let t = match args.protocol {
        Protocol::RotationScale => rotation_scale_protocol(n, n),
        Protocol::Shear => shear_protocol(n, n),
        Protocol::Identity => AffineTransform::IDENTITY,
    };
    let (reference, sensed) = synthesize_pair(&synthetic_scene(n, n, args.seed)?, &t)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = ManifestBuilder::start("synth", &args.out);
    reference.save_png(manifest.output("ref.png"))?;
    sensed.save_png(manifest.output("sensed.png"))?;
    fs::write(
        manifest.output("truth.json"),
        serde_json::to_string_pretty(&GroundTruth::new(t))? + "\n",
    )?;
    #[derive(Serialize)]
    struct SynthRun {
        protocol: String,
        size: usize,
    }
    manifest.finish(
        SynthRun {
            protocol: args
                .protocol
                .to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default(),
            size: n,
        },
        Some(args.seed),
    )?;
    Ok(())
}
