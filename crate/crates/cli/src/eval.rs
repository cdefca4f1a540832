use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use darksight::datasets::{parse_detections, ClassTable, DatasetIndex};
use darksight::evalmap::{evaluate_protocol, Protocol};
use darksight::{Error, EvalReport};
use serde_json::json;

use crate::{write_file, RunManifest};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Directory of ExDark-style annotation `.txt` files.
    pub gt_dir: PathBuf,
    pub detections: PathBuf,
    pub protocol: Protocol,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub report: EvalReport,
    pub table: String,
}

/// Scores a detections file against annotations; writes `report.json`,
/// `pr.csv` and `manifest.json` into `out_dir`.
pub fn cmd_eval(opts: &EvalOptions) -> Result<EvalSummary> {
    let start = Instant::now();
    let classes = ClassTable::exdark();
    let index = DatasetIndex::load(&opts.gt_dir, &classes, None)
        .with_context(|| format!("loading annotations from {}", opts.gt_dir.display()))?;
    for (path, skip) in index.warnings() {
        eprintln!(
            "warning: {}:{}: unknown class {:?} skipped",
            path.display(),
            skip.line,
            skip.class_name
        );
    }
    let text = fs::read_to_string(&opts.detections)
        .with_context(|| format!("reading {}", opts.detections.display()))?;
    let parsed = parse_detections(&text, &classes)
        .with_context(|| format!("in {}", opts.detections.display()))?;
    if !parsed.unknown_classes.is_empty() {
        let names: BTreeSet<&str> = parsed
            .unknown_classes
            .iter()
            .map(|(_, n)| n.as_str())
            .collect();
        eprintln!(
            "warning: dropped {} detections of classes outside the vocabulary: {}",
            parsed.unknown_classes.len(),
            names.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    let unknown: BTreeSet<&str> = parsed
        .detections
        .iter()
        .map(|d| d.image_id.as_str())
        .filter(|id| !index.contains(id))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Validation(format!(
            "detections reference unknown image ids: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        ))
        .into());
    }
    let mut report = evaluate_protocol(&parsed.detections, index.ground_truth(), opts.protocol)?;
    report.label_classes(|id| classes.name(id).unwrap_or("?").to_string());

    let report_path = opts.out_dir.join("report.json");
    let pr_path = opts.out_dir.join("pr.csv");
    write_file(&report_path, report.to_json() + "\n")?;
    write_file(&pr_path, report.pr_csv())?;
    let mut manifest = RunManifest::new("eval", json!({ "protocol": opts.protocol.to_string() }));
    manifest.input(&opts.gt_dir);
    manifest.input(&opts.detections);
    manifest.output(&report_path);
    manifest.output(&pr_path);
    manifest.wall_time_secs = start.elapsed().as_secs_f64();
    manifest.write(&opts.out_dir.join("manifest.json"))?;
    let table = report.summary_table();
    Ok(EvalSummary { report, table })
}
