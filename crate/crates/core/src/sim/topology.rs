use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::radio::RatKind;
use crate::selection::{NodeId, UeId};

pub type Point = [f64; 2];

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub rat: RatKind,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub area_m: (f64, f64),
    /// eNBs first, then gNBs; `nodes[i].id == i`.
    pub nodes: Vec<Node>,
    pub ues: Vec<Point>,
    pub pairs: Vec<(UeId, UeId)>,
}

impl Topology {
    pub fn enbs(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.rat == RatKind::Lte)
    }

    pub fn gnbs(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.rat == RatKind::Nr)
    }

    /// Pair partner of each UE, if any.
    pub fn partners(&self) -> Vec<Option<UeId>> {
        let mut out = vec![None; self.ues.len()];
        for &(a, b) in &self.pairs {
            out[a] = Some(b);
            out[b] = Some(a);
        }
        out
    }
}

pub fn uniform_point<R: Rng + ?Sized>(rng: &mut R, area_m: (f64, f64)) -> Point {
    [rng.random_range(0.0..area_m.0), rng.random_range(0.0..area_m.1)]
}

/// Uniform placement of base stations and UEs, then a random perfect
/// matching of UEs into D2D pairs (an odd UE stays unpaired).
pub fn place(seed: u64, area_m: (f64, f64), n_ue: usize, n_enb: usize, n_gnb: usize) -> Result<Topology, SimError> {
    if !(area_m.0 > 0.0 && area_m.1 > 0.0 && area_m.0.is_finite() && area_m.1.is_finite()) {
        return Err(SimError::Config(format!("area must be positive, got {area_m:?}")));
    }
    if n_enb == 0 || n_gnb == 0 || n_ue == 0 {
        return Err(SimError::Config("need at least one eNB, one gNB and one UE".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(n_enb + n_gnb);
    for i in 0..n_enb + n_gnb {
        let rat = if i < n_enb { RatKind::Lte } else { RatKind::Nr };
        nodes.push(Node { id: i, rat, position: uniform_point(&mut rng, area_m) });
    }
    let ues: Vec<Point> = (0..n_ue).map(|_| uniform_point(&mut rng, area_m)).collect();
    let mut order: Vec<UeId> = (0..n_ue).collect();
    order.shuffle(&mut rng);
    let pairs = order.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
    Ok(Topology { area_m, nodes, ues, pairs })
}
