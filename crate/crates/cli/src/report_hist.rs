use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use darksight::datasets::read_ppm;
use darksight::pixelops::{enhance_he, histogram_csv, histogram_report};
use serde_json::json;

use crate::{write_file, RunManifest};

/// Writes the luma histogram CSV (`bin,count`) of one image, or of its
/// histogram-equalized version when `after_he` is set. Returns the CSV.
pub fn cmd_report_hist(input: &Path, out: Option<&Path>, after_he: bool) -> Result<String> {
    let start = Instant::now();
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let mut img = read_ppm(&bytes).with_context(|| format!("decoding {}", input.display()))?;
    if after_he {
        img = enhance_he(&img)?;
    }
    let csv = histogram_csv(&histogram_report(&img)?);
    if let Some(out) = out {
        write_file(out, &csv)?;
        let mut manifest = RunManifest::new("report-hist", json!({ "after_he": after_he }));
        manifest.input(input);
        manifest.output(out);
        manifest.wall_time_secs = start.elapsed().as_secs_f64();
        let name = format!(
            "{}.manifest.json",
            out.file_stem().and_then(|s| s.to_str()).unwrap_or("hist")
        );
        manifest.write(&out.with_file_name(name))?;
    }
    Ok(csv)
}
