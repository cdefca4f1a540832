use crate::error::{Error, Result};
use crate::tensor::kernels::{self, Activation, ConvGeometry, InstanceNormCache};
use crate::tensor::{same_shape, Tensor};

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The operation that produced a node, with whatever its backward pass
/// needs beyond the input values.
#[derive(Debug, Clone)]
pub enum Op {
    Constant,
    Parameter,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sum(NodeId),
    Conv2d {
        x: NodeId,
        k: NodeId,
        bias: Option<NodeId>,
        geom: ConvGeometry,
    },
    ConvTranspose2d {
        x: NodeId,
        k: NodeId,
        bias: Option<NodeId>,
        stride: usize,
        pad: usize,
    },
    InstanceNorm {
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        cache: InstanceNormCache,
    },
    Activation(NodeId, Activation),
    MaxPool {
        x: NodeId,
        argmax: Vec<usize>,
    },
    ConcatChannels(NodeId, NodeId),
    L1Loss(NodeId, NodeId),
    MseLoss(NodeId, NodeId),
}

/// One recorded value: its producing op, output and (after backward) gradient.
#[derive(Debug, Clone)]
pub struct GraphNode {
    pub op: Op,
    pub value: Tensor,
    pub grad: Option<Tensor>,
    requires_grad: bool,
}

impl GraphNode {
    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }
}

/// Append-only computation graph. Nodes are stored in creation order, which
/// is a topological order, so cycles cannot be expressed.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<GraphNode>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &GraphNode {
        &self.nodes[id.0]
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Gradient of the last backward pass w.r.t. `id`; zeros if `id` was not
    /// reached.
    pub fn grad(&self, id: NodeId) -> Tensor {
        let node = &self.nodes[id.0];
        node.grad
            .clone()
            .unwrap_or_else(|| Tensor::zeros(node.value.shape()))
    }

    fn push(&mut self, op: Op, value: Tensor, requires_grad: bool) -> NodeId {
        self.nodes.push(GraphNode {
            op,
            value,
            grad: None,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn needs(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|id| self.nodes[id.0].requires_grad)
    }

    /// A leaf that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Constant, value, false)
    }

    /// A leaf whose gradient is tracked.
    pub fn parameter(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Parameter, value, true)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        same_shape(va, vb, "add")?;
        let mut out = va.clone();
        out.add_assign(vb)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::Add(a, b), out, rg))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        same_shape(va, vb, "sub")?;
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x - y)
            .collect();
        let out = Tensor::new(va.shape(), data)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::Sub(a, b), out, rg))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        same_shape(va, vb, "mul")?;
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let out = Tensor::new(va.shape(), data)?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::Mul(a, b), out, rg))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        let out = self.value(a).map(|v| v * factor);
        let rg = self.needs(&[a]);
        self.push(Op::Scale(a, factor), out, rg)
    }

    /// Sum of all elements, as a one-element tensor.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let out = Tensor::scalar(self.value(a).sum());
        let rg = self.needs(&[a]);
        self.push(Op::Sum(a), out, rg)
    }

    pub fn conv2d(
        &mut self,
        x: NodeId,
        k: NodeId,
        bias: Option<NodeId>,
        geom: ConvGeometry,
    ) -> Result<NodeId> {
        let out = kernels::conv2d(
            self.value(x),
            self.value(k),
            bias.map(|b| self.value(b)),
            geom,
        )?;
        let rg = self.needs(&[x, k]) || bias.is_some_and(|b| self.needs(&[b]));
        Ok(self.push(Op::Conv2d { x, k, bias, geom }, out, rg))
    }

    pub fn conv_transpose2d(
        &mut self,
        x: NodeId,
        k: NodeId,
        bias: Option<NodeId>,
        stride: usize,
        pad: usize,
    ) -> Result<NodeId> {
        let out = kernels::conv_transpose2d(
            self.value(x),
            self.value(k),
            bias.map(|b| self.value(b)),
            stride,
            pad,
        )?;
        let rg = self.needs(&[x, k]) || bias.is_some_and(|b| self.needs(&[b]));
        Ok(self.push(
            Op::ConvTranspose2d {
                x,
                k,
                bias,
                stride,
                pad,
            },
            out,
            rg,
        ))
    }

    pub fn instance_norm(
        &mut self,
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        eps: f64,
    ) -> Result<NodeId> {
        let (out, cache) =
            kernels::instance_norm(self.value(x), self.value(gamma), self.value(beta), eps)?;
        let rg = self.needs(&[x, gamma, beta]);
        Ok(self.push(
            Op::InstanceNorm {
                x,
                gamma,
                beta,
                cache,
            },
            out,
            rg,
        ))
    }

    pub fn activation(&mut self, x: NodeId, kind: Activation) -> NodeId {
        let out = kernels::activation(self.value(x), kind);
        let rg = self.needs(&[x]);
        self.push(Op::Activation(x, kind), out, rg)
    }

    pub fn max_pool2d(&mut self, x: NodeId, kernel: usize, stride: usize) -> Result<NodeId> {
        let (out, argmax) = kernels::max_pool2d(self.value(x), kernel, stride)?;
        let rg = self.needs(&[x]);
        Ok(self.push(Op::MaxPool { x, argmax }, out, rg))
    }

    pub fn concat_channels(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let out = kernels::concat_channels(self.value(a), self.value(b))?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::ConcatChannels(a, b), out, rg))
    }

    pub fn l1_loss(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = kernels::l1_loss(self.value(a), self.value(b))?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::L1Loss(a, b), Tensor::scalar(v), rg))
    }

    pub fn mse_loss(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = kernels::mse_loss(self.value(a), self.value(b))?;
        let rg = self.needs(&[a, b]);
        Ok(self.push(Op::MseLoss(a, b), Tensor::scalar(v), rg))
    }

    /// Backpropagates from a one-element `loss`, replacing any gradients
    /// from a previous pass.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if self.value(loss).numel() != 1 {
            return Err(Error::InvalidInput(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        for node in &mut self.nodes {
            node.grad = None;
        }
        let mut pending: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        pending[loss.0] = Some(Tensor::full(self.value(loss).shape(), 1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = pending[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            for (input, grad) in self.input_grads(i, &g)? {
                accumulate(&mut pending[input.0], grad)?;
            }
            self.nodes[i].grad = Some(g);
        }
        Ok(())
    }

    /// Gradients flowing from node `i` into each of its inputs that tracks
    /// gradients.
    fn input_grads(&self, i: usize, g: &Tensor) -> Result<Vec<(NodeId, Tensor)>> {
        let want = |id: NodeId| self.nodes[id.0].requires_grad;
        let mut out = Vec::new();
        match &self.nodes[i].op {
            Op::Constant | Op::Parameter => {}
            Op::Add(a, b) => {
                for id in [*a, *b] {
                    if want(id) {
                        out.push((id, g.clone()));
                    }
                }
            }
            Op::Sub(a, b) => {
                if want(*a) {
                    out.push((*a, g.clone()));
                }
                if want(*b) {
                    out.push((*b, g.map(|v| -v)));
                }
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if want(*a) {
                    out.push((*a, hadamard(g, vb)));
                }
                if want(*b) {
                    out.push((*b, hadamard(g, va)));
                }
            }
            Op::Scale(a, f) => {
                if want(*a) {
                    out.push((*a, g.map(|v| v * f)));
                }
            }
            Op::Sum(a) => {
                if want(*a) {
                    out.push((*a, Tensor::full(self.value(*a).shape(), g.item())));
                }
            }
            Op::Conv2d { x, k, bias, geom } => {
                let (dx, dk, db) =
                    kernels::conv2d_backward(self.value(*x), self.value(*k), g, *geom, want(*x))?;
                if let Some(dx) = dx {
                    out.push((*x, dx));
                }
                if want(*k) {
                    out.push((*k, dk));
                }
                if let Some(b) = bias.filter(|b| want(*b)) {
                    out.push((b, db));
                }
            }
            Op::ConvTranspose2d {
                x,
                k,
                bias,
                stride,
                pad,
            } => {
                let (dx, dk, db) = kernels::conv_transpose2d_backward(
                    self.value(*x),
                    self.value(*k),
                    g,
                    *stride,
                    *pad,
                    want(*x),
                )?;
                if let Some(dx) = dx {
                    out.push((*x, dx));
                }
                if want(*k) {
                    out.push((*k, dk));
                }
                if let Some(b) = bias.filter(|b| want(*b)) {
                    out.push((b, db));
                }
            }
            Op::InstanceNorm {
                x,
                gamma,
                beta,
                cache,
            } => {
                let (dx, dgamma, dbeta) =
                    kernels::instance_norm_backward(g, self.value(*gamma), cache)?;
                if want(*x) {
                    out.push((*x, dx));
                }
                if want(*gamma) {
                    out.push((*gamma, dgamma));
                }
                if want(*beta) {
                    out.push((*beta, dbeta));
                }
            }
            Op::Activation(x, kind) => {
                if want(*x) {
                    let y = &self.nodes[i].value;
                    out.push((
                        *x,
                        kernels::activation_backward(self.value(*x), y, g, *kind),
                    ));
                }
            }
            Op::MaxPool { x, argmax } => {
                if want(*x) {
                    let shape = self.value(*x).shape();
                    out.push((*x, kernels::max_pool2d_backward(shape, argmax, g)));
                }
            }
            Op::ConcatChannels(a, b) => {
                let ca = self.value(*a).dims4()?[1];
                let (ga, gb) = kernels::concat_channels_backward(g, ca)?;
                if want(*a) {
                    out.push((*a, ga));
                }
                if want(*b) {
                    out.push((*b, gb));
                }
            }
            Op::L1Loss(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if want(*a) {
                    out.push((*a, kernels::l1_loss_backward(va, vb, g.item())));
                }
                if want(*b) {
                    out.push((*b, kernels::l1_loss_backward(vb, va, g.item())));
                }
            }
            Op::MseLoss(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                if want(*a) {
                    out.push((*a, kernels::mse_loss_backward(va, vb, g.item())));
                }
                if want(*b) {
                    out.push((*b, kernels::mse_loss_backward(vb, va, g.item())));
                }
            }
        }
        Ok(out)
    }
}

fn hadamard(a: &Tensor, b: &Tensor) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::new(a.shape(), data).expect("same shape")
}

fn accumulate(slot: &mut Option<Tensor>, grad: Tensor) -> Result<()> {
    match slot {
        Some(existing) => existing.add_assign(&grad),
        None => {
            *slot = Some(grad);
            Ok(())
        }
    }
}
