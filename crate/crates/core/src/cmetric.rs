//! The condition metric `||(f', zeta')||_k^2 = mu_norm(f, zeta)^2 (||f'||^2 + ||zeta'||^2)`
//! on discretized paths in the solution variety: length, the exponential
//! growth audit, and local shortening.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::condition::{mu_norm, step_radius, RadiusKind};
use crate::error::{Error, Result};
use crate::newton::{newton_step, u0};
use crate::polysys::{kostlan_sample_with, HomSystem};
use crate::projective::{proj_distance, system_distance, system_geodesic, ProjPoint};
use crate::tracker::{track, Homotopy, TrackResult, TrackerConfig};

/// A point `(f, zeta)` of the solution variety with its cached `mu_norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathNode {
    /// Unit Bombieri-Weyl norm.
    pub system: HomSystem,
    pub zeta: ProjPoint,
    pub mu: f64,
}

impl PathNode {
    /// Normalizes `system` and caches `mu_norm(system, zeta)`.
    pub fn new(system: &HomSystem, zeta: ProjPoint) -> Result<Self> {
        let system = system.normalized()?;
        let mu = mu_norm(&system, &zeta)?.value;
        Ok(PathNode { system, zeta, mu })
    }

    /// `||f(zeta)|| / ||f||`.
    pub fn residual(&self) -> Result<f64> {
        let r = self
            .system
            .evaluate(self.zeta.as_slice())?
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt();
        Ok(r / self.system.bw_norm())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscretePath {
    pub nodes: Vec<PathNode>,
}

impl DiscretePath {
    pub fn new(nodes: Vec<PathNode>) -> Self {
        DiscretePath { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.nodes.first().map_or(1, |n| n.system.max_degree())
    }

    pub fn systems(&self) -> Vec<HomSystem> {
        self.nodes.iter().map(|n| n.system.clone()).collect()
    }

    /// Checks node residuals, finite condition and the overlap of consecutive
    /// trust regions. Reports the first violation.
    pub fn validate(&self, cfg: &TrackerConfig) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.mu.is_finite() {
                return Err(Error::InvalidPath(format!("node {i} is ill-posed")));
            }
            let r = node.residual()?;
            if !(r <= cfg.residual_tol) {
                return Err(Error::InvalidPath(format!("node {i} has residual {r:e}")));
            }
        }
        for (i, w) in self.nodes.windows(2).enumerate() {
            if !overlaps(&w[0], &w[1], cfg)? {
                return Err(Error::InvalidPath(format!(
                    "nodes {i} and {} are not inside each other's trust radii",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// `(d(f_a, f_b), d(zeta_a, zeta_b))`.
pub fn node_distances(a: &PathNode, b: &PathNode) -> Result<(f64, f64)> {
    Ok((system_distance(&a.system, &b.system)?, proj_distance(&a.zeta, &b.zeta)?))
}

/// `sqrt(mu_a mu_b) * (d_f^2 + d_zeta^2)^{1/2}`.
pub fn segment_length(a: &PathNode, b: &PathNode) -> Result<f64> {
    if !a.mu.is_finite() || !b.mu.is_finite() {
        return Err(Error::InfiniteCondition);
    }
    let (df, dz) = node_distances(a, b)?;
    Ok((a.mu * b.mu).sqrt() * df.hypot(dz))
}

/// Discrete condition length of the polygon through the nodes.
pub fn condition_length(p: &DiscretePath) -> Result<f64> {
    if p.nodes.iter().any(|n| !n.mu.is_finite()) {
        return Err(Error::InfiniteCondition);
    }
    p.nodes
        .windows(2)
        .try_fold(0.0, |acc, w| Ok(acc + segment_length(&w[0], &w[1])?))
}

/// Polygonal length in the product of the two projective metrics.
pub fn product_length(p: &DiscretePath) -> Result<f64> {
    p.nodes
        .windows(2)
        .try_fold(0.0, |acc, w| node_distances(&w[0], &w[1]).map(|(df, dz)| acc + df.hypot(dz)))
}

/// Whether each node lies inside the other's trust radii: `d_f < C/(D^{1/2} mu)`
/// and `d_zeta < C/(D^{3/2} mu)` with the larger of the two `mu`.
pub fn overlaps(a: &PathNode, b: &PathNode, cfg: &TrackerConfig) -> Result<bool> {
    let mu = a.mu.max(b.mu);
    if !mu.is_finite() {
        return Ok(false);
    }
    let d = a.system.max_degree().max(b.system.max_degree());
    let (df, dz) = node_distances(a, b)?;
    Ok(df < step_radius(mu, d, cfg.c, RadiusKind::System) && dz < step_radius(mu, d, cfg.c, RadiusKind::Solution))
}

/// `K = sqrt(2) (1 + eps) log(1 + eps) / C`, the rate in
/// `log(mu_end / mu_start) <= K D^{3/2} L` implied by the tracker's constants.
pub fn growth_constant(cfg: &TrackerConfig) -> f64 {
    SQRT_2 * (1.0 + cfg.eps) * (1.0 + cfg.eps).ln() / cfg.c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthAudit {
    /// `log(mu_end / mu_start)`.
    pub log_ratio: f64,
    pub length: f64,
    /// `K D^{3/2} L`.
    pub bound: f64,
    pub margin: f64,
    pub passes: bool,
}

pub fn growth_bound_audit(p: &DiscretePath, k: f64) -> Result<GrowthAudit> {
    let (Some(first), Some(last)) = (p.nodes.first(), p.nodes.last()) else {
        return Err(Error::InvalidPath("empty path".into()));
    };
    let length = condition_length(p)?;
    let log_ratio = (last.mu / first.mu).ln();
    let bound = k * (p.max_degree() as f64).powf(1.5) * length;
    Ok(GrowthAudit {
        log_ratio,
        length,
        bound,
        margin: bound - log_ratio,
        passes: log_ratio <= bound,
    })
}

/// Newton-projects `start` onto the zeros of `system` (unit norm) with at most
/// `steps` steps. `None` unless the result is well posed, has small residual,
/// and `start` lies in its certified basin.
fn project_node(system: HomSystem, start: &ProjPoint, cfg: &TrackerConfig, steps: usize) -> Result<Option<PathNode>> {
    let mut x = start.clone();
    for _ in 0..steps {
        let out = newton_step(&system, &x)?;
        if !out.solvable {
            return Ok(None);
        }
        let moved = proj_distance(&out.next, &x)?;
        x = out.next;
        if moved < 1e-15 {
            break;
        }
    }
    let mu = mu_norm(&system, &x)?.value;
    if !mu.is_finite() || 1.0 / mu < cfg.sigma_floor {
        return Ok(None);
    }
    let node = PathNode { system, zeta: x, mu };
    if !(node.residual()? <= cfg.residual_tol) {
        return Ok(None);
    }
    let d = proj_distance(start, &node.zeta)?;
    let basin = u0() / ((node.system.max_degree() as f64).powf(1.5) * mu);
    Ok((d < basin && d < FRAC_PI_4).then_some(node))
}

const PROJECTION_STEPS: usize = 5;
const MAX_BISECTIONS: usize = 16;

type Midpoint<'a> = dyn Fn(f64, f64, &PathNode, &PathNode) -> Result<HomSystem> + 'a;

/// Appends to `out` the nodes needed strictly between `a` and `b` (tagged
/// with path parameters `ta`, `tb`) so that consecutive nodes overlap.
fn bridge(
    (ta, a): (f64, &PathNode),
    (tb, b): (f64, &PathNode),
    midpoint: &Midpoint<'_>,
    cfg: &TrackerConfig,
    depth: usize,
    out: &mut Vec<PathNode>,
) -> Result<()> {
    if overlaps(a, b, cfg)? {
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::InvalidPath("could not restore trust-radius overlap".into()));
    }
    let system = midpoint(ta, tb, a, b)?.normalized()?;
    let start = a.zeta.geodesic(&b.zeta, 0.5)?;
    let m = project_node(system, &start, cfg, PROJECTION_STEPS)?
        .ok_or_else(|| Error::InvalidPath("inserted midpoint did not certify".into()))?;
    let tm = 0.5 * (ta + tb);
    bridge((ta, a), (tm, &m), midpoint, cfg, depth - 1, out)?;
    out.push(m.clone());
    bridge((tm, &m), (tb, b), midpoint, cfg, depth - 1, out)
}

fn geodesic_midpoint(_: f64, _: f64, a: &PathNode, b: &PathNode) -> Result<HomSystem> {
    system_geodesic(&a.system, &b.system, 0.5)
}

/// Inserts geodesic midpoints wherever consecutive nodes do not overlap.
pub fn resubdivide(p: &DiscretePath, cfg: &TrackerConfig) -> Result<DiscretePath> {
    let mut out = Vec::with_capacity(p.len());
    for (i, node) in p.nodes.iter().enumerate() {
        if i > 0 {
            bridge((0.0, &p.nodes[i - 1]), (0.0, node), &geodesic_midpoint, cfg, MAX_BISECTIONS, &mut out)?;
        }
        out.push(node.clone());
    }
    Ok(DiscretePath::new(out))
}

/// Converts a successful track into a path with nodes `(f_{S_i}, x_i)`.
///
/// Each iterate is refined with up to three Newton steps, must certify
/// against the refined zero, and gets its `mu` recomputed there. Missing
/// overlap is repaired with refined midpoints on the homotopy.
pub fn to_discrete_path(res: &TrackResult, h: &Homotopy, cfg: &TrackerConfig) -> Result<DiscretePath> {
    if let Some(reason) = res.failure_reason() {
        return Err(Error::TrackNotSuccessful(reason));
    }
    if res.iterates.len() != res.subdivision.len() {
        return Err(Error::InvalidPath(format!(
            "{} iterates for {} subdivision points",
            res.iterates.len(),
            res.subdivision.len()
        )));
    }
    let mut tagged = Vec::with_capacity(res.iterates.len());
    for (i, (&t, x)) in res.subdivision.iter().zip(&res.iterates).enumerate() {
        let system = h.system_at(t)?.normalized()?;
        let node = project_node(system, x, cfg, 3)?.ok_or_else(|| {
            Error::InvalidPath(format!("iterate {i} at t = {t} is not a certified approximate zero"))
        })?;
        tagged.push((t, node));
    }
    let midpoint = |ta: f64, tb: f64, _: &PathNode, _: &PathNode| h.system_at(0.5 * (ta + tb));
    let mut out = Vec::with_capacity(tagged.len());
    for (i, (t, node)) in tagged.iter().enumerate() {
        if i > 0 {
            let (tp, prev) = &tagged[i - 1];
            bridge((*tp, prev), (*t, node), &midpoint, cfg, MAX_BISECTIONS, &mut out)?;
        }
        out.push(node.clone());
    }
    Ok(DiscretePath::new(out))
}

/// Greedily drops nodes while the kept neighbors still overlap.
pub fn thinned(p: &DiscretePath, cfg: &TrackerConfig) -> Result<DiscretePath> {
    let n = p.len();
    if n < 3 {
        return Ok(p.clone());
    }
    let mut keep = vec![p.nodes[0].clone()];
    let mut a = 0;
    while a + 1 < n {
        let mut j = a + 1;
        while j + 1 < n && overlaps(&p.nodes[a], &p.nodes[j + 1], cfg)? {
            j += 1;
        }
        keep.push(p.nodes[j].clone());
        a = j;
    }
    Ok(DiscretePath::new(keep))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortenOptions {
    pub seed: u64,
    /// Random system-leg proposals per interior node and sweep.
    pub proposals: usize,
    /// Initial proposal scale, as a fraction of the node's system trust radius.
    pub initial_scale: f64,
    /// Consecutive rejections after which a node's scale is halved.
    pub streak: usize,
}

impl Default for ShortenOptions {
    fn default() -> Self {
        ShortenOptions {
            seed: 0,
            proposals: 8,
            initial_scale: 0.1,
            streak: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shortened {
    pub path: DiscretePath,
    /// Condition length before the first round and after each round.
    pub lengths: Vec<f64>,
    pub proposed: usize,
    pub accepted: usize,
}

struct Slot {
    node: PathNode,
    scale: f64,
    rejections: usize,
}

/// Unit BW tangent direction at the unit system `f`, isotropic Gaussian.
fn random_tangent(f: &HomSystem, rng: &mut ChaCha8Rng) -> Result<HomSystem> {
    let v = kostlan_sample_with(f.n(), f.degrees(), rng)?;
    let along = v.bw_inner(f)?;
    let t = v.combine(Complex64::new(1.0, 0.0), f, -along)?;
    t.normalized()
}

fn local_cost(prev: &PathNode, node: &PathNode, next: &PathNode) -> Result<f64> {
    Ok(segment_length(prev, node)? + segment_length(node, next)?)
}

/// `Some(cost)` when `node` overlaps both neighbors.
fn admissible(prev: &PathNode, node: &PathNode, next: &PathNode, cfg: &TrackerConfig) -> Result<Option<f64>> {
    if overlaps(prev, node, cfg)? && overlaps(node, next, cfg)? {
        local_cost(prev, node, next).map(Some)
    } else {
        Ok(None)
    }
}

/// Local relaxation of the condition length.
///
/// Each sweep visits the interior nodes in order. A node is replaced by the
/// geodesic midpoint of its neighbors, or by a random move of its system
/// leg, whenever the Newton-projected replacement certifies, overlaps both
/// neighbors and shortens the two adjacent segments. Nodes whose neighbors
/// already overlap are dropped when that does not lengthen the path, and
/// segments that lost overlap are re-subdivided. A round that would lengthen
/// the path is undone, so the recorded lengths never increase.
pub fn shorten(p: &DiscretePath, rounds: usize, cfg: &TrackerConfig, opts: &ShortenOptions) -> Result<Shortened> {
    cfg.validate()?;
    let initial = condition_length(p)?;
    let mut out = Shortened {
        path: p.clone(),
        lengths: vec![initial; rounds + 1],
        proposed: 0,
        accepted: 0,
    };
    if p.len() < 3 || rounds == 0 {
        return Ok(out);
    }
    let dmax = p.max_degree();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut slots: Vec<Slot> = p
        .nodes
        .iter()
        .map(|node| Slot {
            node: node.clone(),
            scale: opts.initial_scale,
            rejections: 0,
        })
        .collect();
    let mut current = initial;

    for round in 1..=rounds {
        let snapshot: Vec<PathNode> = slots.iter().map(|s| s.node.clone()).collect();
        for i in 1..slots.len() - 1 {
            let (head, tail) = slots.split_at_mut(i);
            let prev = &head[i - 1].node;
            let (slot, rest) = tail.split_first_mut().expect("interior node");
            let next = &rest[0].node;
            let mut cost = local_cost(prev, &slot.node, next)?;

            out.proposed += 1;
            let mid_system = system_geodesic(&prev.system, &next.system, 0.5)?;
            let mid_start = prev.zeta.geodesic(&next.zeta, 0.5)?;
            if let Some(node) = project_node(mid_system, &mid_start, cfg, PROJECTION_STEPS)? {
                if let Some(c) = admissible(prev, &node, next, cfg)? {
                    if c < cost {
                        slot.node = node;
                        cost = c;
                        out.accepted += 1;
                    }
                }
            }

            for _ in 0..opts.proposals {
                out.proposed += 1;
                let radius = step_radius(slot.node.mu, dmax, cfg.c, RadiusKind::System);
                let angle = slot.scale * radius;
                let dir = random_tangent(&slot.node.system, &mut rng)?;
                let (s, c) = angle.sin_cos();
                let system = slot
                    .node
                    .system
                    .combine(Complex64::new(c, 0.0), &dir, Complex64::new(s, 0.0))?
                    .normalized()?;
                let accepted = match project_node(system, &slot.node.zeta, cfg, PROJECTION_STEPS)? {
                    Some(node) => match admissible(prev, &node, next, cfg)? {
                        Some(c) if c < cost => {
                            slot.node = node;
                            cost = c;
                            true
                        }
                        _ => false,
                    },
                    None => false,
                };
                if accepted {
                    out.accepted += 1;
                    slot.rejections = 0;
                    slot.scale = (2.0 * slot.scale).min(opts.initial_scale);
                } else {
                    slot.rejections += 1;
                    if slot.rejections >= opts.streak {
                        slot.rejections = 0;
                        slot.scale *= 0.5;
                    }
                }
            }
        }

        let mut i = 1;
        while i + 1 < slots.len() {
            let (prev, node, next) = (&slots[i - 1].node, &slots[i].node, &slots[i + 1].node);
            if overlaps(prev, next, cfg)? && segment_length(prev, next)? <= local_cost(prev, node, next)? {
                slots.remove(i);
            } else {
                i += 1;
            }
        }

        let path = DiscretePath::new(slots.iter().map(|s| s.node.clone()).collect());
        let repaired = resubdivide(&path, cfg)?;
        let length = condition_length(&repaired)?;
        if length <= current {
            if repaired.len() != path.len() {
                slots = reslot(repaired.nodes, &slots, opts);
            }
            current = length;
        } else {
            slots = reslot(snapshot, &slots, opts);
        }
        out.lengths[round] = current;
    }
    out.path = DiscretePath::new(slots.into_iter().map(|s| s.node).collect());
    Ok(out)
}

// Carries proposal scales over to nodes that survived unchanged.
fn reslot(nodes: Vec<PathNode>, old: &[Slot], opts: &ShortenOptions) -> Vec<Slot> {
    nodes
        .into_iter()
        .map(|node| {
            let scale = old
                .iter()
                .find(|s| s.node == node)
                .map_or(opts.initial_scale, |s| s.scale);
            Slot {
                node,
                scale,
                rejections: 0,
            }
        })
        .collect()
}

/// Tracks the polygon of node systems as one piecewise great-circle
/// homotopy, starting from the first node's zero.
pub fn retrack(p: &DiscretePath, cfg: &TrackerConfig) -> Result<TrackResult> {
    if p.len() < 2 {
        return Err(Error::InvalidPath("need at least two nodes to track".into()));
    }
    let h = Homotopy::polyline(&p.systems())?;
    track(&h, &p.nodes[0].zeta, cfg)
}
