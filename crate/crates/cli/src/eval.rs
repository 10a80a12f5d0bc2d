use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lsr_register::estimate::fit_affine_lsm;
use lsr_register::eval::{score_matching, score_registration, GroundTruth, RegistrationScore};
use lsr_register::registry::{FilterRegistry, GorFilter, OutlierFilter, RansacFilter};
use lsr_register::CorrespondenceSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::EvalArgs;
use crate::manifest::ManifestBuilder;

pub const TRUTH_SUFFIX: &str = ".truth.json";

pub struct Fixture {
    pub name: String,
    pub initial: CorrespondenceSet,
    pub truth: GroundTruth,
    paths: [PathBuf; 2],
}

/// Every `NAME.csv` in `dir` with its `NAME.truth.json`, sorted by name.
pub fn load_fixtures(dir: &Path) -> Result<Vec<Fixture>> {
    let mut csvs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading fixture directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    csvs.sort();
    if csvs.is_empty() {
        bail!("no NAME.csv fixtures in {}", dir.display());
    }
    csvs.into_iter()
        .map(|csv| {
            let name = csv
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let truth_path = dir.join(format!("{name}{TRUTH_SUFFIX}"));
            let initial = CorrespondenceSet::read_csv(BufReader::new(File::open(&csv)?))
                .with_context(|| format!("fixture {}", csv.display()))?;
            let text = fs::read_to_string(&truth_path)
                .with_context(|| format!("fixture {name} needs {}", truth_path.display()))?;
            let truth: GroundTruth = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", truth_path.display()))?;
            if !(truth.inlier_tol > 0.0) || truth.transform.linear_determinant() == 0.0 {
                bail!(
                    "{}: transform must be invertible and inlier_tol > 0",
                    truth_path.display()
                );
            }
            Ok(Fixture {
                name,
                initial,
                truth,
                paths: [csv, truth_path],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub fixture: String,
    pub method: String,
    pub recall: f64,
    pub precision: f64,
    pub n_red: f64,
    /// Empty when no seed left enough survivors for leave-one-out scoring.
    pub rms_all: Option<f64>,
    pub rms_loo: Option<f64>,
    pub bpp2: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One filter run on one fixture, scored against the ground truth.
fn trial(
    filter: &dyn OutlierFilter,
    fx: &Fixture,
    seed: u64,
) -> Result<(f64, f64, usize, Option<RegistrationScore>)> {
    let out = filter.filter(&fx.initial, seed)?;
    let survivors = fx.initial.select(&out.kept);
    let m = score_matching(&fx.initial, &survivors, &fx.truth)?;
    let reg = if out.degenerate || survivors.len() < 4 {
        None
    } else {
        fit_affine_lsm(&survivors)
            .and_then(|fit| score_registration(&survivors, &fit.transform))
            .ok()
    };
    Ok((m.recall, m.precision, survivors.len(), reg))
}

pub fn evaluate(
    fixtures: &[Fixture],
    methods: &[String],
    seeds: u64,
    filters: &FilterRegistry,
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    for fx in fixtures {
        for method in methods {
            let filter = filters.get(method)?;
            let trials = (0..seeds)
                .into_par_iter()
                .map(|s| trial(filter, fx, s))
                .collect::<Result<Vec<_>>>()?;
            let regs: Vec<&RegistrationScore> =
                trials.iter().filter_map(|t| t.3.as_ref()).collect();
            rows.push(EvalRow {
                fixture: fx.name.clone(),
                method: method.clone(),
                recall: mean(trials.iter().map(|t| t.0)).unwrap_or(0.0),
                precision: mean(trials.iter().map(|t| t.1)).unwrap_or(0.0),
                n_red: mean(trials.iter().map(|t| t.2 as f64)).unwrap_or(0.0),
                rms_all: mean(regs.iter().map(|r| r.rms_all)),
                rms_loo: mean(regs.iter().map(|r| r.rms_loo)),
                bpp2: mean(regs.iter().map(|r| r.bpp2)),
            });
        }
    }
    Ok(rows)
}

pub fn run(args: &EvalArgs) -> Result<Vec<EvalRow>> {
    if args.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let fixtures = load_fixtures(&args.fixtures)?;
    let mut filters = FilterRegistry::empty();
    filters.register(Box::new(GorFilter));
    filters.register(Box::new(RansacFilter {
        inlier_tol: args.ransac_tol,
        ..Default::default()
    }));
    let rows = evaluate(&fixtures, &args.methods, args.seeds, &filters)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = ManifestBuilder::start("eval", &args.out);
    for fx in &fixtures {
        for p in &fx.paths {
            manifest.input(p)?;
        }
    }
    let mut w = csv::Writer::from_path(manifest.output("eval.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    fs::write(
        manifest.output("eval.json"),
        serde_json::to_string_pretty(&rows)? + "\n",
    )?;

    #[derive(Serialize)]
    struct EvalRun<'a> {
        methods: &'a [String],
        seeds: u64,
        ransac_tol: f64,
    }
    manifest.finish(
        EvalRun {
            methods: &args.methods,
            seeds: args.seeds,
            ransac_tol: args.ransac_tol,
        },
        None,
    )?;
    Ok(rows)
}
