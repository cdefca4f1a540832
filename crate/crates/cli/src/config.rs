use std::str::FromStr;

use darksight::gan::{GeneratorArch, TrainConfig};
use darksight::{Error, Result};
use serde::Serialize;

/// Everything a training config file sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSettings {
    pub arch: GeneratorArch,
    pub train: TrainConfig,
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {raw:?}")))
}

/// Parses `key = value` lines; `#` starts a comment. Unset keys keep their
/// defaults (ResNet-9 generator, [`TrainConfig::default`]). The result is
/// validated.
///
/// Keys: `arch`, `epochs`, `batch_size`, `lr`, `beta1`, `beta2`,
/// `lambda_cyc`, `lambda_idt`, `pool_size`, `seed`, `image_size`,
/// `decay_epochs`, `disc_base`, `disc_layers`.
pub fn parse_train_config(text: &str) -> Result<TrainSettings> {
    let mut arch = GeneratorArch::RESNET9;
    let mut cfg = TrainConfig::default();
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        let (key, val) = (key.trim(), val.trim());
        if seen.contains(&key.to_string()) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("{key} is set twice"),
            });
        }
        seen.push(key.to_string());
        match key {
            "arch" => arch = val.parse()?,
            "epochs" => cfg.epochs = value(key, val)?,
            "batch_size" => cfg.batch_size = value(key, val)?,
            "lr" => cfg.lr = value(key, val)?,
            "beta1" => cfg.beta1 = value(key, val)?,
            "beta2" => cfg.beta2 = value(key, val)?,
            "lambda_cyc" => cfg.lambda_cyc = value(key, val)?,
            "lambda_idt" => cfg.lambda_idt = value(key, val)?,
            "pool_size" => cfg.pool_size = value(key, val)?,
            "seed" => cfg.seed = value(key, val)?,
            "image_size" => cfg.image_size = value(key, val)?,
            "decay_epochs" => cfg.decay_epochs = value(key, val)?,
            "disc_base" => cfg.disc_base = value(key, val)?,
            "disc_layers" => cfg.disc_layers = value(key, val)?,
            other => {
                return Err(Error::InvalidConfig(format!("{other}: unknown key")));
            }
        }
    }
    cfg.validate()?;
    arch.spec(3)?;
    Ok(TrainSettings { arch, train: cfg })
}
