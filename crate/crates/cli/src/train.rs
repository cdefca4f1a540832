use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use darksight::datasets::read_ppm;
use darksight::gan::{metrics_csv, save_weights, train, MetricRow};
use darksight::RasterImage;

use crate::{list_files, parse_train_config, write_file, RunManifest};

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub config: PathBuf,
    pub domain_a: PathBuf,
    pub domain_b: PathBuf,
    /// Where the A→B generator goes; the other artifacts are siblings.
    pub out: PathBuf,
}

/// Output files of a training run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainPaths {
    pub g_ab: PathBuf,
    pub g_ba: PathBuf,
    pub d_a: PathBuf,
    pub d_b: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
}

/// For `dir/name.ext`: `dir/name.ext` (G_AB), `dir/name.g_ba.ext`,
/// `dir/name.d_a.ext`, `dir/name.d_b.ext`, `dir/name.metrics.csv` and
/// `dir/name.manifest.json`.
pub fn sibling_paths(out: &Path) -> TrainPaths {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("weights");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("llws");
    let sib = |tag: &str| out.with_file_name(format!("{stem}.{tag}.{ext}"));
    TrainPaths {
        g_ab: out.to_path_buf(),
        g_ba: sib("g_ba"),
        d_a: sib("d_a"),
        d_b: sib("d_b"),
        metrics: out.with_file_name(format!("{stem}.metrics.csv")),
        manifest: out.with_file_name(format!("{stem}.manifest.json")),
    }
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub paths: TrainPaths,
    pub metrics: Vec<MetricRow>,
}

fn load_domain(dir: &Path) -> Result<Vec<RasterImage>> {
    list_files(dir, "ppm")?
        .iter()
        .map(|p| {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            read_ppm(&bytes).with_context(|| format!("decoding {}", p.display()))
        })
        .collect()
}

/// Trains a CycleGAN from a config file and two directories of `.ppm`
/// images, writing all four networks and the metric log.
pub fn cmd_train(opts: &TrainOptions) -> Result<TrainSummary> {
    let start = Instant::now();
    let text = fs::read_to_string(&opts.config)
        .with_context(|| format!("reading {}", opts.config.display()))?;
    let settings =
        parse_train_config(&text).with_context(|| format!("in {}", opts.config.display()))?;
    let a = load_domain(&opts.domain_a).context("domain A")?;
    let b = load_domain(&opts.domain_b).context("domain B")?;
    let outcome = train(&settings.train, settings.arch, &a, &b)?;

    let paths = sibling_paths(&opts.out);
    let nets = &outcome.trained;
    for (net, path) in [
        (&nets.g_ab, &paths.g_ab),
        (&nets.g_ba, &paths.g_ba),
        (&nets.d_a, &paths.d_a),
        (&nets.d_b, &paths.d_b),
    ] {
        write_file(path, save_weights(&net.to_store()))?;
    }
    write_file(&paths.metrics, metrics_csv(&outcome.metrics))?;

    let mut manifest = RunManifest::new(
        "train",
        serde_json::to_value(&settings).expect("settings serialize"),
    );
    manifest.seed = Some(settings.train.seed);
    for p in [&opts.config, &opts.domain_a, &opts.domain_b] {
        manifest.input(p);
    }
    for p in [
        &paths.g_ab,
        &paths.g_ba,
        &paths.d_a,
        &paths.d_b,
        &paths.metrics,
    ] {
        manifest.output(p);
    }
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    manifest.write(&paths.manifest)?;
    Ok(TrainSummary {
        paths,
        metrics: outcome.metrics,
    })
}
