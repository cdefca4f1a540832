use rand::Rng;

use crate::error::{Error, Result};
use crate::gan::{Layer, NetworkSpec, WeightStore};
use crate::tensor::kernels::ConvGeometry;
use crate::tensor::{Activation, Graph, NodeId, PadMode, Tensor};

pub const NORM_EPS: f64 = 1e-5;
/// Standard deviation of the normal initialization of conv weights.
pub const INIT_STD: f64 = 0.02;

/// A [`NetworkSpec`] with concrete parameter values, in the order of
/// [`NetworkSpec::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<Tensor>,
}

impl Network {
    /// Conv weights ~ N(0, 0.02); biases and norm shifts 0; norm scales 1.
    pub fn init<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Self {
        let params = spec
            .parameters()
            .into_iter()
            .map(|(name, shape)| {
                if name.ends_with(".weight") {
                    Tensor::randn(&shape, INIT_STD, rng)
                } else if name.ends_with(".gamma") {
                    Tensor::full(&shape, 1.0)
                } else {
                    Tensor::zeros(&shape)
                }
            })
            .collect();
        Self {
            spec: spec.clone(),
            params,
        }
    }

    pub fn from_params(spec: &NetworkSpec, params: Vec<Tensor>) -> Result<Self> {
        let expected = spec.parameters();
        if expected.len() != params.len() {
            return Err(Error::InvalidShape(format!(
                "{} needs {} parameter tensors, got {}",
                spec.name(),
                expected.len(),
                params.len()
            )));
        }
        for ((name, shape), p) in expected.iter().zip(&params) {
            if p.shape() != &shape[..] {
                return Err(Error::InvalidShape(format!(
                    "{name}: expected {shape:?}, got {:?}",
                    p.shape()
                )));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            params,
        })
    }

    /// Rebuilds a network from stored weights, failing on a fingerprint
    /// mismatch.
    pub fn from_store(spec: &NetworkSpec, store: &WeightStore) -> Result<Self> {
        if store.fingerprint() != spec.fingerprint() {
            return Err(Error::IncompatibleWeights {
                expected: spec.fingerprint(),
                found: store.fingerprint(),
            });
        }
        let expected = spec.parameters();
        if store.len() != expected.len() {
            return Err(Error::Format(format!(
                "store has {} entries, {} expects {}",
                store.len(),
                spec.name(),
                expected.len()
            )));
        }
        let params = expected
            .iter()
            .map(|(name, shape)| {
                let t = store
                    .get(name)
                    .ok_or_else(|| Error::Format(format!("missing parameter {name}")))?;
                if t.shape() != &shape[..] {
                    return Err(Error::Format(format!(
                        "{name}: stored shape {:?}, expected {shape:?}",
                        t.shape()
                    )));
                }
                Ok(t.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            params,
        })
    }

    pub fn to_store(&self) -> WeightStore {
        let entries = self
            .spec
            .parameters()
            .into_iter()
            .map(|(name, _)| name)
            .zip(self.params.iter().cloned())
            .collect();
        WeightStore::new(self.spec.fingerprint(), entries).expect("spec names are unique")
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    /// Adds the parameters to `g`, as trainable parameters or as constants.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> Vec<NodeId> {
        self.params
            .iter()
            .map(|p| {
                if trainable {
                    g.parameter(p.clone())
                } else {
                    g.constant(p.clone())
                }
            })
            .collect()
    }

    /// Evaluates the network on a detached input batch.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut g = Graph::new();
        let ids = self.bind(&mut g, false);
        let xi = g.constant(x.clone());
        let y = forward_graph(&mut g, &self.spec, &ids, xi)?;
        Ok(g.value(y).clone())
    }
}

/// Records the forward pass of `spec` on node `x` using parameter nodes
/// `params` (as returned by [`Network::bind`]).
pub fn forward_graph(
    g: &mut Graph,
    spec: &NetworkSpec,
    params: &[NodeId],
    x: NodeId,
) -> Result<NodeId> {
    let [_, c, h, w] = g.value(x).dims4()?;
    spec.output_shape([c, h, w])?;
    let mut next = params.iter().copied();
    let mut take = || {
        next.next()
            .ok_or_else(|| Error::InvalidShape(format!("{}: too few parameters", spec.name())))
    };
    let mut cur = x;
    let mut skips: Vec<NodeId> = Vec::new();
    for layer in spec.layers() {
        cur = match *layer {
            Layer::Conv {
                stride,
                pad,
                pad_mode,
                norm,
                act,
                ..
            } => {
                let (k, b) = (take()?, take()?);
                let y = g.conv2d(cur, k, Some(b), ConvGeometry::new(stride, pad, pad_mode))?;
                let y = if norm {
                    let (gamma, beta) = (take()?, take()?);
                    g.instance_norm(y, gamma, beta, NORM_EPS)?
                } else {
                    y
                };
                match act {
                    Some(a) => g.activation(y, a),
                    None => y,
                }
            }
            Layer::ConvTranspose {
                stride,
                pad,
                norm,
                act,
                ..
            } => {
                let (k, b) = (take()?, take()?);
                let y = g.conv_transpose2d(cur, k, Some(b), stride, pad)?;
                let y = if norm {
                    let (gamma, beta) = (take()?, take()?);
                    g.instance_norm(y, gamma, beta, NORM_EPS)?
                } else {
                    y
                };
                match act {
                    Some(a) => g.activation(y, a),
                    None => y,
                }
            }
            Layer::Residual { .. } => {
                let geom = ConvGeometry::new(1, 1, PadMode::Reflect);
                let (k1, b1, g1, s1) = (take()?, take()?, take()?, take()?);
                let (k2, b2, g2, s2) = (take()?, take()?, take()?, take()?);
                let y = g.conv2d(cur, k1, Some(b1), geom)?;
                let y = g.instance_norm(y, g1, s1, NORM_EPS)?;
                let y = g.activation(y, Activation::Relu);
                let y = g.conv2d(y, k2, Some(b2), geom)?;
                let y = g.instance_norm(y, g2, s2, NORM_EPS)?;
                g.add(cur, y)?
            }
            Layer::MaxPool { kernel, stride } => g.max_pool2d(cur, kernel, stride)?,
            Layer::SaveSkip { .. } => {
                skips.push(cur);
                cur
            }
            Layer::ConcatSkip { .. } => {
                let skip = skips.pop().expect("validated at construction");
                g.concat_channels(cur, skip)?
            }
        };
    }
    if next.next().is_some() {
        return Err(Error::InvalidShape(format!(
            "{}: too many parameters",
            spec.name()
        )));
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::{build_patchgan_layers, build_resnet9_generator, build_unet256_generator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_matches_shape_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for spec in [
            build_resnet9_generator(3, 2, 2).unwrap(),
            build_unet256_generator(3, 2, 3).unwrap(),
            build_patchgan_layers(3, 2, 2).unwrap(),
        ] {
            let net = Network::init(&spec, &mut rng);
            let x = Tensor::randn(&[2, 3, 16, 24], 0.5, &mut rng);
            let y = net.forward(&x).unwrap();
            let [c, h, w] = spec.output_shape([3, 16, 24]).unwrap();
            assert_eq!(y.shape(), &[2, c, h, w], "{}", spec.name());
        }
    }

    #[test]
    fn zeroed_residual_block_is_identity() {
        let spec = NetworkSpec::new("res", 2, 2, 1, vec![Layer::Residual { channels: 2 }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = Network::init(&spec, &mut rng);
        for (p, (name, _)) in net.params.iter_mut().zip(spec.parameters()) {
            if name.contains("conv") {
                *p = Tensor::zeros(p.shape());
            }
        }
        let x = Tensor::randn(&[1, 2, 5, 4], 1.0, &mut rng);
        assert_eq!(net.forward(&x).unwrap(), x);
    }

    #[test]
    fn zero_weight_patchgan_outputs_final_bias() {
        let spec = build_patchgan_layers(3, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Network::init(&spec, &mut rng);
        let params = spec.parameters();
        let last = params.len() - 1;
        for (i, p) in net.params.iter_mut().enumerate() {
            if params[i].0.ends_with(".weight") {
                *p = Tensor::zeros(p.shape());
            }
        }
        net.params[last] = Tensor::scalar(0.375);
        let y = net
            .forward(&Tensor::randn(&[1, 3, 16, 16], 1.0, &mut rng))
            .unwrap();
        assert!(y.data().iter().all(|&v| v == 0.375));
    }

    #[test]
    fn wrong_parameter_list_is_rejected() {
        let spec = build_patchgan_layers(3, 4, 2).unwrap();
        assert!(Network::from_params(&spec, vec![]).is_err());
    }
}
