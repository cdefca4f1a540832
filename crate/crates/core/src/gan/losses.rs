use crate::error::{Error, Result};
use crate::gan::{forward_graph, Network, TrainConfig};
use crate::tensor::{Graph, NodeId, Tensor};

/// The four networks of a CycleGAN. `g_ab` maps domain A to B, `d_b`
/// judges images of domain B.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleGan {
    pub g_ab: Network,
    pub g_ba: Network,
    pub d_a: Network,
    pub d_b: Network,
}

/// Parameter nodes of the four networks inside one graph.
#[derive(Debug, Clone)]
pub struct BoundNets {
    pub g_ab: Vec<NodeId>,
    pub g_ba: Vec<NodeId>,
    pub d_a: Vec<NodeId>,
    pub d_b: Vec<NodeId>,
}

/// Nodes of the generator objective.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorTerms {
    pub total: NodeId,
    pub adv_ab: NodeId,
    pub adv_ba: NodeId,
    pub cycle_a: NodeId,
    pub cycle_b: NodeId,
    /// Present only when the identity weight is positive.
    pub idt: Option<(NodeId, NodeId)>,
    pub fake_a: NodeId,
    pub fake_b: NodeId,
}

/// Scalar values of every loss term for one pair of batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValues {
    pub loss_g: f64,
    pub loss_d_a: f64,
    pub loss_d_b: f64,
    /// `adv_ab + adv_ba`, unweighted.
    pub adversarial: f64,
    /// `L1(rec_a, a) + L1(rec_b, b)`, before the cycle weight.
    pub cycle: f64,
    /// `L1(G_BA(a), a) + L1(G_AB(b), b)`, before weights; 0 when disabled.
    pub idt: f64,
}

fn target_mse(g: &mut Graph, pred: NodeId, target: f64) -> Result<NodeId> {
    let t = g.constant(Tensor::full(g.value(pred).shape(), target));
    g.mse_loss(pred, t)
}

pub(crate) fn check_batches(a: &Tensor, b: &Tensor) -> Result<()> {
    let [_, ca, ha, wa] = a.dims4()?;
    let [_, cb, hb, wb] = b.dims4()?;
    if (ca, ha, wa) != (cb, hb, wb) {
        return Err(Error::InvalidShape(format!(
            "domain batches differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Least-squares adversarial terms (target 1 for fakes) plus
/// `λ_cyc·(cycle_a + cycle_b)` plus `λ_idt·λ_cyc·(idt_a + idt_b)`.
pub fn generator_objective(
    g: &mut Graph,
    nets: &CycleGan,
    ids: &BoundNets,
    real_a: NodeId,
    real_b: NodeId,
    lambda_cyc: f64,
    lambda_idt: f64,
) -> Result<GeneratorTerms> {
    let fake_b = forward_graph(g, nets.g_ab.spec(), &ids.g_ab, real_a)?;
    let rec_a = forward_graph(g, nets.g_ba.spec(), &ids.g_ba, fake_b)?;
    let fake_a = forward_graph(g, nets.g_ba.spec(), &ids.g_ba, real_b)?;
    let rec_b = forward_graph(g, nets.g_ab.spec(), &ids.g_ab, fake_a)?;

    let judged_b = forward_graph(g, nets.d_b.spec(), &ids.d_b, fake_b)?;
    let adv_ab = target_mse(g, judged_b, 1.0)?;
    let judged_a = forward_graph(g, nets.d_a.spec(), &ids.d_a, fake_a)?;
    let adv_ba = target_mse(g, judged_a, 1.0)?;

    let cycle_a = g.l1_loss(rec_a, real_a)?;
    let cycle_b = g.l1_loss(rec_b, real_b)?;
    let adv = g.add(adv_ab, adv_ba)?;
    let cyc = g.add(cycle_a, cycle_b)?;
    let cyc = g.scale(cyc, lambda_cyc);
    let mut total = g.add(adv, cyc)?;

    let idt = if lambda_idt > 0.0 {
        let same_a = forward_graph(g, nets.g_ba.spec(), &ids.g_ba, real_a)?;
        let idt_a = g.l1_loss(same_a, real_a)?;
        let same_b = forward_graph(g, nets.g_ab.spec(), &ids.g_ab, real_b)?;
        let idt_b = g.l1_loss(same_b, real_b)?;
        let both = g.add(idt_a, idt_b)?;
        let weighted = g.scale(both, lambda_idt * lambda_cyc);
        total = g.add(total, weighted)?;
        Some((idt_a, idt_b))
    } else {
        None
    };
    Ok(GeneratorTerms {
        total,
        adv_ab,
        adv_ba,
        cycle_a,
        cycle_b,
        idt,
        fake_a,
        fake_b,
    })
}

/// `0.5·(mse(D(real), 1) + mse(D(fake), 0))`.
pub fn discriminator_objective(
    g: &mut Graph,
    disc: &Network,
    ids: &[NodeId],
    real: NodeId,
    fake: NodeId,
) -> Result<NodeId> {
    let on_real = forward_graph(g, disc.spec(), ids, real)?;
    let real_term = target_mse(g, on_real, 1.0)?;
    let on_fake = forward_graph(g, disc.spec(), ids, fake)?;
    let fake_term = target_mse(g, on_fake, 0.0)?;
    let sum = g.add(real_term, fake_term)?;
    Ok(g.scale(sum, 0.5))
}

/// Evaluates all loss terms on one pair of batches, with the discriminators
/// judging the freshly generated fakes.
pub fn cyclegan_losses(
    nets: &CycleGan,
    batch_a: &Tensor,
    batch_b: &Tensor,
    cfg: &TrainConfig,
) -> Result<LossValues> {
    check_batches(batch_a, batch_b)?;
    let mut g = Graph::new();
    let ids = BoundNets {
        g_ab: nets.g_ab.bind(&mut g, false),
        g_ba: nets.g_ba.bind(&mut g, false),
        d_a: nets.d_a.bind(&mut g, false),
        d_b: nets.d_b.bind(&mut g, false),
    };
    let a = g.constant(batch_a.clone());
    let b = g.constant(batch_b.clone());
    let terms = generator_objective(&mut g, nets, &ids, a, b, cfg.lambda_cyc, cfg.lambda_idt)?;
    let loss_d_a = discriminator_objective(&mut g, &nets.d_a, &ids.d_a, a, terms.fake_a)?;
    let loss_d_b = discriminator_objective(&mut g, &nets.d_b, &ids.d_b, b, terms.fake_b)?;
    let v = |id: NodeId| g.value(id).item();
    Ok(LossValues {
        loss_g: v(terms.total),
        loss_d_a: v(loss_d_a),
        loss_d_b: v(loss_d_b),
        adversarial: v(terms.adv_ab) + v(terms.adv_ba),
        cycle: v(terms.cycle_a) + v(terms.cycle_b),
        idt: terms.idt.map_or(0.0, |(x, y)| v(x) + v(y)),
    })
}
