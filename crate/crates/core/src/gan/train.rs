use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gan::losses::check_batches;
use crate::gan::{
    build_patchgan_layers, build_resnet9_generator, build_unet256_generator,
    discriminator_objective, generator_objective, normalize_in, BoundNets, CycleGan, ImagePool,
    Network, NetworkSpec,
};
use crate::pixelops::RasterImage;
use crate::tensor::{AdamState, Graph, Tensor};

const ADAM_EPS: f64 = 1e-8;

/// Generator family and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorArch {
    /// ResNet generator with `blocks` residual blocks.
    Resnet { base: usize, blocks: usize },
    /// U-Net generator with `depth` encoder levels.
    Unet { base: usize, depth: usize },
}

impl GeneratorArch {
    /// The full-size ResNet-9 generator.
    pub const RESNET9: GeneratorArch = GeneratorArch::Resnet {
        base: 64,
        blocks: 9,
    };
    /// The full-size U-Net-256 generator.
    pub const UNET256: GeneratorArch = GeneratorArch::Unet { base: 64, depth: 8 };

    pub fn spec(self, in_ch: usize) -> Result<NetworkSpec> {
        match self {
            GeneratorArch::Resnet { base, blocks } => build_resnet9_generator(in_ch, base, blocks),
            GeneratorArch::Unet { base, depth } => build_unet256_generator(in_ch, base, depth),
        }
    }
}

impl fmt::Display for GeneratorArch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorArch::Resnet { base, blocks } => write!(f, "resnet:{base}:{blocks}"),
            GeneratorArch::Unet { base, depth } => write!(f, "unet:{base}:{depth}"),
        }
    }
}

impl FromStr for GeneratorArch {
    type Err = Error;

    /// `resnet9`, `unet256`, `resnet:BASE:BLOCKS` or `unet:BASE:DEPTH`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "resnet9" | "resnet_9" => return Ok(Self::RESNET9),
            "unet256" | "unet_256" => return Ok(Self::UNET256),
            _ => {}
        }
        let parts: Vec<&str> = lower.split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad architecture {s:?}")))
        };
        match parts[..] {
            ["resnet", b, n] => Ok(Self::Resnet {
                base: num(b)?,
                blocks: num(n)?,
            }),
            ["unet", b, d] => Ok(Self::Unet {
                base: num(b)?,
                depth: num(d)?,
            }),
            _ => Err(Error::InvalidConfig(format!(
                "unknown architecture {s:?} (expected resnet9, unet256, resnet:BASE:BLOCKS or unet:BASE:DEPTH)"
            ))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda_cyc: f64,
    pub lambda_idt: f64,
    pub pool_size: usize,
    pub seed: u64,
    /// Square image extent every training image must have.
    pub image_size: usize,
    /// The lr decays linearly to zero over this many final epochs.
    pub decay_epochs: usize,
    pub disc_base: usize,
    /// Stride-2 layers of the PatchGAN discriminators.
    pub disc_layers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 3,
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            lambda_cyc: 10.0,
            lambda_idt: 0.0,
            pool_size: 50,
            seed: 0,
            image_size: 256,
            decay_epochs: 0,
            disc_base: 64,
            disc_layers: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::InvalidConfig(format!("{field}: {why}")));
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1");
        }
        if self.image_size == 0 {
            return bad("image_size", "must be >= 1");
        }
        if self.disc_base == 0 {
            return bad("disc_base", "must be >= 1");
        }
        if self.disc_layers == 0 {
            return bad("disc_layers", "must be >= 1");
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return bad("lr", "must be finite and >= 0");
        }
        for (field, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(field, "must lie in [0, 1)");
            }
        }
        for (field, v) in [
            ("lambda_cyc", self.lambda_cyc),
            ("lambda_idt", self.lambda_idt),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, "must be finite and >= 0");
            }
        }
        if self.decay_epochs > self.epochs {
            return bad("decay_epochs", "must not exceed epochs");
        }
        Ok(())
    }

    /// Learning rate used during `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let constant = self.epochs - self.decay_epochs;
        if epoch < constant {
            self.lr
        } else {
            let done = (epoch + 1 - constant) as f64;
            self.lr * (1.0 - done / (self.decay_epochs + 1) as f64)
        }
    }

    pub fn discriminator_spec(&self, in_ch: usize) -> Result<NetworkSpec> {
        build_patchgan_layers(in_ch, self.disc_base, self.disc_layers)
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: usize,
    pub loss_g: f64,
    pub loss_d_a: f64,
    pub loss_d_b: f64,
    /// Unweighted cycle L1 summed over both directions.
    pub cycle: f64,
    /// Unweighted identity L1 summed over both directions (0 when disabled).
    pub idt: f64,
}

/// CSV with header `step,loss_G,loss_D_A,loss_D_B,cycle,idt`.
pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut s = String::from("step,loss_G,loss_D_A,loss_D_B,cycle,idt\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step, r.loss_g, r.loss_d_a, r.loss_d_b, r.cycle, r.idt
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Networks as initialized, before any update.
    pub initial: CycleGan,
    pub trained: CycleGan,
    pub metrics: Vec<MetricRow>,
}

/// Builds and initializes the four networks. Initialization draws from
/// `rng` in the order G_AB, G_BA, D_A, D_B.
pub fn init_cyclegan<R: Rng + ?Sized>(
    cfg: &TrainConfig,
    arch: GeneratorArch,
    in_ch: usize,
    rng: &mut R,
) -> Result<CycleGan> {
    let gen = arch.spec(in_ch)?;
    let disc = cfg.discriminator_spec(in_ch)?;
    gen.output_shape([in_ch, cfg.image_size, cfg.image_size])?;
    disc.output_shape([in_ch, cfg.image_size, cfg.image_size])?;
    Ok(CycleGan {
        g_ab: Network::init(&gen, rng),
        g_ba: Network::init(&gen, rng),
        d_a: Network::init(&disc, rng),
        d_b: Network::init(&disc, rng),
    })
}

fn to_tensors(images: &[RasterImage], size: usize, domain: &str) -> Result<Vec<Tensor>> {
    if images.is_empty() {
        return Err(Error::InvalidInput(format!(
            "domain {domain} has no images"
        )));
    }
    images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            if img.width() != size || img.height() != size || img.channels() != 3 {
                return Err(Error::InvalidInput(format!(
                    "domain {domain} image {i} is {}x{}x{}, expected {size}x{size}x3",
                    img.width(),
                    img.height(),
                    img.channels()
                )));
            }
            normalize_in(img)
        })
        .collect()
}

fn batch(images: &[Tensor], order: &[usize], step: usize, size: usize) -> Result<Tensor> {
    let picked: Vec<Tensor> = (0..size)
        .map(|j| images[order[(step * size + j) % order.len()]].clone())
        .collect();
    Tensor::stack_batch(&picked)
}

/// Trains a CycleGAN between two unpaired image sets.
///
/// Each epoch has `ceil(max(|A|, |B|) / batch_size)` steps over fresh
/// seeded permutations of both domains (the smaller domain wraps around).
/// Each step updates both generators with the discriminators frozen, then
/// D_A and D_B on the real batch and pooled fakes.
pub fn train(
    cfg: &TrainConfig,
    arch: GeneratorArch,
    domain_a: &[RasterImage],
    domain_b: &[RasterImage],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let images_a = to_tensors(domain_a, cfg.image_size, "A")?;
    let images_b = to_tensors(domain_b, cfg.image_size, "B")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial = init_cyclegan(cfg, arch, 3, &mut rng)?;
    let mut nets = initial.clone();
    let mut pool_a = ImagePool::new(cfg.pool_size, rng.random());
    let mut pool_b = ImagePool::new(cfg.pool_size, rng.random());
    let adam = |n: &Network| AdamState::new(n.params(), cfg.lr, cfg.beta1, cfg.beta2, ADAM_EPS);
    let (mut opt_gab, mut opt_gba) = (adam(&nets.g_ab), adam(&nets.g_ba));
    let (mut opt_da, mut opt_db) = (adam(&nets.d_a), adam(&nets.d_b));

    let steps_per_epoch = images_a.len().max(images_b.len()).div_ceil(cfg.batch_size);
    let mut order_a: Vec<usize> = (0..images_a.len()).collect();
    let mut order_b: Vec<usize> = (0..images_b.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs * steps_per_epoch);
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        for opt in [&mut opt_gab, &mut opt_gba, &mut opt_da, &mut opt_db] {
            opt.lr = lr;
        }
        order_a.shuffle(&mut rng);
        order_b.shuffle(&mut rng);
        for s in 0..steps_per_epoch {
            let real_a = batch(&images_a, &order_a, s, cfg.batch_size)?;
            let real_b = batch(&images_b, &order_b, s, cfg.batch_size)?;
            check_batches(&real_a, &real_b)?;

            // generators, discriminators frozen
            let mut g = Graph::new();
            let ids = BoundNets {
                g_ab: nets.g_ab.bind(&mut g, true),
                g_ba: nets.g_ba.bind(&mut g, true),
                d_a: nets.d_a.bind(&mut g, false),
                d_b: nets.d_b.bind(&mut g, false),
            };
            let a = g.constant(real_a.clone());
            let b = g.constant(real_b.clone());
            let terms =
                generator_objective(&mut g, &nets, &ids, a, b, cfg.lambda_cyc, cfg.lambda_idt)?;
            g.backward(terms.total)?;
            let grads = |g: &Graph, ids: &[crate::tensor::NodeId]| {
                ids.iter().map(|&i| g.grad(i)).collect::<Vec<_>>()
            };
            opt_gab.step(nets.g_ab.params_mut(), &grads(&g, &ids.g_ab))?;
            opt_gba.step(nets.g_ba.params_mut(), &grads(&g, &ids.g_ba))?;
            let v = |id| g.value(id).item();
            let loss_g = v(terms.total);
            let cycle = v(terms.cycle_a) + v(terms.cycle_b);
            let idt = terms.idt.map_or(0.0, |(x, y)| v(x) + v(y));
            let fake_a = pool_a.query(g.value(terms.fake_a))?;
            let fake_b = pool_b.query(g.value(terms.fake_b))?;
            drop(g);

            let loss_d_a = discriminator_step(&mut nets.d_a, &mut opt_da, &real_a, fake_a)?;
            let loss_d_b = discriminator_step(&mut nets.d_b, &mut opt_db, &real_b, fake_b)?;
            metrics.push(MetricRow {
                step: metrics.len() + 1,
                loss_g,
                loss_d_a,
                loss_d_b,
                cycle,
                idt,
            });
        }
    }
    Ok(TrainOutcome {
        initial,
        trained: nets,
        metrics,
    })
}

fn discriminator_step(
    disc: &mut Network,
    opt: &mut AdamState,
    real: &Tensor,
    fake: Tensor,
) -> Result<f64> {
    let mut g = Graph::new();
    let ids = disc.bind(&mut g, true);
    let r = g.constant(real.clone());
    let f = g.constant(fake);
    let loss = discriminator_objective(&mut g, disc, &ids, r, f)?;
    g.backward(loss)?;
    let grads: Vec<Tensor> = ids.iter().map(|&i| g.grad(i)).collect();
    opt.step(disc.params_mut(), &grads)?;
    Ok(g.value(loss).item())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation_names_field() {
        assert!(TrainConfig::default().validate().is_ok());
        let cases: Vec<(&str, TrainConfig)> = vec![
            (
                "batch_size",
                TrainConfig {
                    batch_size: 0,
                    ..Default::default()
                },
            ),
            (
                "lambda_cyc",
                TrainConfig {
                    lambda_cyc: -1.0,
                    ..Default::default()
                },
            ),
            (
                "lambda_idt",
                TrainConfig {
                    lambda_idt: f64::NAN,
                    ..Default::default()
                },
            ),
            (
                "beta1",
                TrainConfig {
                    beta1: 1.0,
                    ..Default::default()
                },
            ),
            (
                "decay_epochs",
                TrainConfig {
                    decay_epochs: 201,
                    ..Default::default()
                },
            ),
        ];
        for (field, cfg) in cases {
            match cfg.validate() {
                Err(Error::InvalidConfig(m)) => assert!(m.starts_with(field), "{m}"),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn linear_decay_schedule() {
        let cfg = TrainConfig {
            epochs: 4,
            decay_epochs: 2,
            lr: 1.0,
            ..Default::default()
        };
        let lrs: Vec<f64> = (0..4).map(|e| cfg.lr_at(e)).collect();
        assert_eq!(lrs, vec![1.0, 1.0, 1.0 - 1.0 / 3.0, 1.0 - 2.0 / 3.0]);
    }

    #[test]
    fn arch_parsing() {
        assert_eq!(
            "resnet9".parse::<GeneratorArch>().unwrap(),
            GeneratorArch::RESNET9
        );
        assert_eq!(
            "unet:4:2".parse::<GeneratorArch>().unwrap(),
            GeneratorArch::Unet { base: 4, depth: 2 }
        );
        let a = GeneratorArch::Resnet { base: 8, blocks: 2 };
        assert_eq!(a.to_string().parse::<GeneratorArch>().unwrap(), a);
        assert!("vgg".parse::<GeneratorArch>().is_err());
    }

    #[test]
    fn csv_header() {
        assert_eq!(
            metrics_csv(&[]),
            "step,loss_G,loss_D_A,loss_D_B,cycle,idt\n"
        );
    }
}
