use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::{Context, Result};
use image::{Rgb, RgbImage};
use lsr_register::imagecore::{downsample, load_image};
use lsr_register::lsr::{segment, write_regions_csv, LineSupportRegion, SegmentParams};
use lsr_register::GrayImage;

use crate::args::SegmentArgs;
use crate::manifest::ManifestBuilder;

const OUTLINE: Rgb<u8> = Rgb([255, 32, 32]);

/// The image in gray with every region rectangle outlined.
pub fn overlay(img: &GrayImage, regions: &[LineSupportRegion]) -> RgbImage {
    let gray = img.to_luma8();
    let mut out = RgbImage::from_fn(gray.width(), gray.height(), |x, y| {
        let v = gray.get_pixel(x, y)[0];
        Rgb([v, v, v])
    });
    let (w, h) = (out.width() as f64, out.height() as f64);
    for r in regions {
        let c = r.corners();
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            let steps = ((b.0 - a.0).hypot(b.1 - a.1) * 4.0).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let f = s as f64 / steps as f64;
                let (x, y) = (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
                if x >= 0.0 && y >= 0.0 && x < w && y < h {
                    out.put_pixel(x as u32, y as u32, OUTLINE);
                }
            }
        }
    }
    out
}

pub fn run(args: &SegmentArgs) -> Result<()> {
    let params = SegmentParams {
        tau: args.tau,
        ..SegmentParams::default()
    };
    params.validate()?;
    let img = downsample(&load_image(&args.input)?, args.level)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = ManifestBuilder::start("segment", &args.out);
    manifest.input(&args.input)?;

    let seg = segment(&img, &params)?;
    seg.mask.save_png(manifest.output("mask.png"))?;
    write_regions_csv(
        &seg.regions,
        BufWriter::new(File::create(manifest.output("regions.csv"))?),
    )?;
    overlay(&img, &seg.regions).save(manifest.output("overlay.png"))?;

    #[derive(serde::Serialize)]
    struct SegmentRun {
        #[serde(flatten)]
        params: SegmentParams,
        level: u32,
    }
    manifest.finish(
        SegmentRun {
            params,
            level: args.level,
        },
        None,
    )?;
    println!(
        "{} regions, {} mask pixels",
        seg.regions.len(),
        seg.mask.count_ones()
    );
    Ok(())
}
