use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use darksight::datasets::{read_ppm, write_ppm};
use darksight::gan::{load_weights, translate_with, GeneratorArch, Network};
use darksight::pixelops::{enhance_he, histogram_csv, histogram_report};
use darksight::{Error, RasterImage};
use rayon::prelude::*;
use serde_json::json;

use crate::{list_files, write_file, RunManifest, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnhanceMethod {
    /// Luma histogram equalization.
    He,
    /// A trained dark-to-bright generator.
    Cyclegan,
}

impl FromStr for EnhanceMethod {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s {
            "he" => Ok(Self::He),
            "cyclegan" => Ok(Self::Cyclegan),
            other => Err(UsageError(format!(
                "unknown method {other:?} (expected he or cyclegan)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnhanceOptions {
    pub method: EnhanceMethod,
    pub in_dir: PathBuf,
    pub out_dir: PathBuf,
    pub weights: Option<PathBuf>,
    pub arch: Option<GeneratorArch>,
    /// Also write `<stem>.hist_before.csv` and `<stem>.hist_after.csv` luma
    /// histograms next to each output.
    pub histograms: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceSummary {
    pub written: Vec<PathBuf>,
    /// `(input, reason)` for images that could not be processed.
    pub failed: Vec<(PathBuf, String)>,
}

/// Enhances every `.ppm` image in `in_dir` into a same-named file in
/// `out_dir`. Unreadable images are reported and skipped; the command fails
/// only if none succeed.
pub fn cmd_enhance(opts: &EnhanceOptions) -> Result<EnhanceSummary> {
    let start = Instant::now();
    let generator = match opts.method {
        EnhanceMethod::He => None,
        EnhanceMethod::Cyclegan => {
            let (Some(weights), Some(arch)) = (&opts.weights, opts.arch) else {
                return Err(
                    UsageError("--method cyclegan requires --weights and --arch".into()).into(),
                );
            };
            let bytes =
                fs::read(weights).with_context(|| format!("reading {}", weights.display()))?;
            let store =
                load_weights(&bytes).with_context(|| format!("loading {}", weights.display()))?;
            let net = Network::from_store(&arch.spec(3)?, &store).with_context(|| {
                format!("{} does not hold a {arch} generator", weights.display())
            })?;
            Some(net)
        }
    };
    let inputs = list_files(&opts.in_dir, "ppm")?;
    if inputs.is_empty() {
        return Err(Error::Validation(format!(
            "no inputs: {} contains no .ppm images",
            opts.in_dir.display()
        ))
        .into());
    }
    let enhance = |img: &RasterImage| -> darksight::Result<RasterImage> {
        match &generator {
            None => enhance_he(img),
            Some(net) => translate_with(net, img),
        }
    };
    let results: Vec<Result<(RasterImage, RasterImage, PathBuf)>> = inputs
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path)?;
            let img = read_ppm(&bytes)?;
            let out = enhance(&img)?;
            Ok((
                img,
                out,
                opts.out_dir
                    .join(path.file_name().expect("listed files have names")),
            ))
        })
        .collect();

    let mut manifest = RunManifest::new(
        "enhance",
        json!({
            "method": format!("{:?}", opts.method).to_lowercase(),
            "arch": opts.arch.map(|a| a.to_string()),
            "histograms": opts.histograms,
        }),
    );
    manifest.input(&opts.in_dir);
    if let Some(w) = &opts.weights {
        manifest.input(w);
    }
    let mut summary = EnhanceSummary {
        written: Vec::new(),
        failed: Vec::new(),
    };
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok((before, after, out_path)) => {
                write_file(&out_path, write_ppm(&after)?)?;
                manifest.output(&out_path);
                if opts.histograms {
                    for (tag, img) in [("hist_before", &before), ("hist_after", &after)] {
                        let hist_path = sibling(&out_path, tag);
                        write_file(&hist_path, histogram_csv(&histogram_report(img)?))?;
                        manifest.output(&hist_path);
                    }
                }
                summary.written.push(out_path);
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e:#}", path.display());
                summary.failed.push((path.clone(), format!("{e:#}")));
            }
        }
    }
    if summary.written.is_empty() {
        return Err(Error::Validation(format!(
            "none of the {} images in {} could be enhanced",
            inputs.len(),
            opts.in_dir.display()
        ))
        .into());
    }
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    manifest.write(&opts.out_dir.join("manifest.json"))?;
    Ok(summary)
}

fn sibling(image: &Path, tag: &str) -> PathBuf {
    let stem = image
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    image.with_file_name(format!("{stem}.{tag}.csv"))
}
