use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;
use lsr_register::imagecore::{checkerboard_mosaic, load_image, warp_image};
use lsr_register::lsr::SegmentationMask;
use lsr_register::pipeline::{register_with, PipelineConfig, RegistrationReport};
use lsr_register::registry::FilterRegistry;
use lsr_register::CorrespondenceSet;

use crate::args::RegisterArgs;
use crate::manifest::ManifestBuilder;

pub const MOSAIC_CELL: usize = 32;

/// Reads a TOML config, or the `config` object of a JSON run manifest.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg = if is_json {
        let v: serde_json::Value = serde_json::from_str(&text)?;
        match v.get("config") {
            Some(c) => serde_json::from_value(c.clone())?,
            None => bail!("{} has no \"config\" object", path.display()),
        }
    } else {
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
    };
    Ok(cfg)
}

/// Flags given on the command line win over the config file, which wins over defaults.
pub fn resolve_config(args: &RegisterArgs, matches: &ArgMatches) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    let given = |id: &str| matches.value_source(id) == Some(ValueSource::CommandLine);
    if given("epsilon") {
        cfg.epsilon = args.epsilon;
    }
    if given("tau") {
        cfg.tau = args.tau;
    }
    if given("dratio") {
        cfg.d_ratio = args.dratio;
    }
    if given("max_levels") {
        cfg.max_levels = args.max_levels;
    }
    if given("seed") {
        cfg.seed = args.seed;
    }
    if given("filter") {
        cfg.filter = args.filter.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_csv(cs: &CorrespondenceSet, path: &Path) -> Result<()> {
    cs.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

/// Runs the pipeline and writes every artifact. Returns the report so the
/// caller can pick the exit code.
pub fn run(args: &RegisterArgs, matches: &ArgMatches) -> Result<RegistrationReport> {
    let cfg = resolve_config(args, matches)?;
    let reference = load_image(&args.reference)?;
    let sensed = load_image(&args.sensed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = ManifestBuilder::start("register", &args.out);
    manifest.input(&args.reference)?;
    manifest.input(&args.sensed)?;

    let mut masks: Vec<(u32, SegmentationMask, SegmentationMask)> = Vec::new();
    let report = register_with(
        &reference,
        &sensed,
        &cfg,
        &FilterRegistry::default(),
        |level, lm| {
            if let Some((r, s)) = &lm.masks {
                masks.push((level, r.clone(), s.clone()));
            }
        },
    )?;

    for (level, r, s) in &masks {
        r.save_png(manifest.output(&format!("mask_ref_L{level}.png")))?;
        s.save_png(manifest.output(&format!("mask_sensed_L{level}.png")))?;
    }
    fs::write(manifest.output("report.json"), report.to_json()? + "\n")?;
    write_csv(&report.survivors, &manifest.output("correspondences.csv"))?;
    write_csv(&report.initial, &manifest.output("initial_matches.csv"))?;
    if let Some(t) = &report.final_transform {
        fs::write(manifest.output("transform.json"), t.to_json() + "\n")?;
        let back = warp_image(
            &sensed,
            &t.inverse()?,
            reference.width(),
            reference.height(),
        )?;
        checkerboard_mosaic(&reference, &back, MOSAIC_CELL)?
            .save_png(manifest.output("mosaic.png"))?;
    }
    manifest.finish(&cfg, Some(cfg.seed))?;
    Ok(report)
}
