//! Exact selfmaps of a dendrite that fix a nowhere dense arc or a point.
//!
//! The complement of the fixed set `A` splits into bushes `D_k`, each hanging
//! on `A` at a single root `x_k`. After reweighting so that bush `k` has
//! measure `λ_k = (1-q) q^k` and `A` has `λ_0`, bush `k` is spread over a
//! larger set `E_k`: the arc from `x_k` to an older root `x_ℓk` together with
//! the bushes rooted along it. Bush 1 goes onto the whole space. Since
//! `ℓ_k < k`, every bush eventually covers `D_1` and then `D`.
//!
//! The spreading map `φ̃_k = g_k ∘ ν_k` runs a zigzag `ν_k` over an interval
//! `J_k⁺` in which every root on the arc has been blown up to a block `T_h`
//! of length `λ_h`; on `T_h` the map `g_k` is the walk `φ_h` of bush `h`, and
//! between blocks it runs along the arc. Bush `k` itself is first folded onto
//! `[0, 1]` by `ψ_k`.
//!
//! Everything is finite here: there are `K` bushes, the measures sum to
//! `1 - q^(K+1)`, and `A` keeps the gaps between roots, which are crossed at
//! speed `ρ`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::length_expanding::{build_pair, LelPair};
use crate::metric_tree::{Dendrite, EdgeId, Embedding, PointRef, Refinement, Region, VertexId};
use crate::rational::{self, q, serde_q, serde_vec_q, Q};
use crate::tree_map::TreeMap;

pub fn default_q() -> Q {
    q(1, 2)
}

pub fn default_rho() -> Q {
    q(6, 5)
}

/// Laps of `ν_k` after the initial run to the end of `J_k⁺`.
pub const NU_LAPS: u64 = 4;

/// The set the built map fixes, in the coordinates of the subdivided base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedSet {
    Arc { left: VertexId, right: VertexId, edges: BTreeSet<EdgeId> },
    Point(VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bush {
    pub edges: BTreeSet<EdgeId>,
    pub root: VertexId,
    #[serde(with = "serde_q")]
    pub measure: Q,
}

/// Bushes of `D \ A`, ordered by the first original edge they contain.
#[derive(Clone, Debug)]
pub struct BushDecomposition {
    pub original: Dendrite,
    /// `D` subdivided so that `A` is a union of whole edges.
    pub base: Dendrite,
    pub refinement: Refinement,
    pub fixed: FixedSet,
    pub bushes: Vec<Bush>,
    /// Position of each root along `A`, normalized to `[0, 1]` (arc case).
    pub positions: Vec<Q>,
}

impl BushDecomposition {
    pub fn is_point(&self) -> bool {
        matches!(self.fixed, FixedSet::Point(_))
    }

    pub fn roots(&self) -> Vec<VertexId> {
        self.bushes.iter().map(|b| b.root).collect()
    }

    /// `A` as a region of the base.
    pub fn fixed_region(&self) -> Region {
        match &self.fixed {
            FixedSet::Arc { edges, .. } => edges_region(&self.base, edges),
            FixedSet::Point(v) => {
                let mut r = Region::empty();
                r.add_vertex(*v);
                r
            }
        }
    }

    /// Bush `k` (1-based) as a region of the base.
    pub fn bush_region(&self, k: usize) -> Region {
        edges_region(&self.base, &self.bushes[k - 1].edges)
    }
}

/// Splits `D` along `A`, which must be an arc or a single point.
pub fn decompose_bushes(d: &Dendrite, a: &Region) -> Result<BushDecomposition> {
    if a.is_empty() || !a.is_connected(d) {
        return Err(Error::InvalidArgument("the fixed set must be a nonempty connected region".into()));
    }
    if a.is_whole(d) {
        return Err(Error::Hypothesis("the fixed set is the whole dendrite and has interior".into()));
    }
    if a.h1().is_zero() {
        let p = d.canon(&a.any_point().expect("nonempty"))?;
        return decompose_at_point(d, &p);
    }

    let mut cuts: BTreeMap<EdgeId, BTreeSet<Q>> = BTreeMap::new();
    for (e, ivs) in a.spans() {
        for (lo, hi) in ivs {
            for t in [lo, hi] {
                if !t.is_zero() && t != d.len(*e) {
                    cuts.entry(*e).or_default().insert(t.clone());
                }
            }
        }
    }
    let (base, refinement) = d.subdivide(&cuts)?;
    let lifted = refinement.lift_region(&base, a);
    let a_edges: BTreeSet<EdgeId> = (0..base.edge_count()).filter(|&e| lifted.covers_edge(&base, e)).collect();
    let mut deg: BTreeMap<VertexId, usize> = BTreeMap::new();
    for &e in &a_edges {
        *deg.entry(base.edge(e).u).or_default() += 1;
        *deg.entry(base.edge(e).v).or_default() += 1;
    }
    let ends: Vec<VertexId> = deg.iter().filter(|(_, c)| **c == 1).map(|(v, _)| *v).collect();
    if deg.values().any(|c| *c > 2) || ends.len() != 2 {
        return Err(Error::InvalidArgument("the fixed set must be an arc or a point".into()));
    }
    let (mut left, mut right) = (ends[0], ends[1]);
    if refinement.lower_point(d, &PointRef::Vertex(right)) < refinement.lower_point(d, &PointRef::Vertex(left)) {
        std::mem::swap(&mut left, &mut right);
    }

    let mut fixed_region = Region::empty();
    for &e in &a_edges {
        fixed_region.add_interval(e, Q::zero(), base.len(e).clone());
    }
    fixed_region.normalize(&base);
    let comps = base.components_minus(&fixed_region)?;
    let mut grouped: BTreeMap<VertexId, BTreeSet<EdgeId>> = BTreeMap::new();
    for c in &comps.components {
        let PointRef::Vertex(root) = c.boundary else {
            return Err(Error::InvalidArgument("a bush attaches inside an edge".into()));
        };
        let edges = grouped.entry(root).or_default();
        edges.extend((0..base.edge_count()).filter(|&e| c.closure.covers_edge(&base, e)));
    }
    let bushes = ordered_bushes(&base, &refinement, grouped.into_iter().collect())?;
    let h_a = fixed_region.h1();
    let positions = bushes.iter().map(|b| base.vertex_dist(left, b.root) / &h_a).collect();
    Ok(BushDecomposition {
        original: d.clone(),
        base,
        refinement,
        fixed: FixedSet::Arc { left, right, edges: a_edges },
        bushes,
        positions,
    })
}

fn decompose_at_point(d: &Dendrite, p: &PointRef) -> Result<BushDecomposition> {
    let mut cuts: BTreeMap<EdgeId, BTreeSet<Q>> = BTreeMap::new();
    if let PointRef::Edge(e, t) = p {
        cuts.insert(*e, BTreeSet::from([t.clone()]));
    }
    let (base, refinement) = d.subdivide(&cuts)?;
    let PointRef::Vertex(a) = refinement.lift_point(&base, p) else {
        unreachable!("the point was made a vertex");
    };
    let comps = base.components_minus(&base.point_region(&PointRef::Vertex(a))?)?;
    let parts = comps
        .components
        .iter()
        .map(|c| (a, (0..base.edge_count()).filter(|&e| c.closure.covers_edge(&base, e)).collect()))
        .collect();
    let bushes = ordered_bushes(&base, &refinement, parts)?;
    Ok(BushDecomposition {
        original: d.clone(),
        base,
        refinement,
        fixed: FixedSet::Point(a),
        bushes,
        positions: Vec::new(),
    })
}

fn ordered_bushes(
    base: &Dendrite,
    refinement: &Refinement,
    parts: Vec<(VertexId, BTreeSet<EdgeId>)>,
) -> Result<Vec<Bush>> {
    if parts.is_empty() {
        return Err(Error::Hypothesis("nothing hangs off the fixed set".into()));
    }
    let mut bushes: Vec<((EdgeId, EdgeId), Bush)> = parts
        .into_iter()
        .map(|(root, edges)| {
            let first = edges.iter().map(|&e| refinement.piece(e).parent).min().expect("bush has edges");
            let key = (first, *edges.iter().next().expect("bush has edges"));
            let measure = edges.iter().map(|&e| base.len(e).clone()).sum();
            (key, Bush { edges, root, measure })
        })
        .collect();
    bushes.sort_by_key(|a| a.0);
    Ok(bushes.into_iter().map(|(_, b)| b).collect())
}

/// The reweighted metric: `A` has measure `λ_0`, bush `k` has `λ_k = (1-q) q^k`.
#[derive(Clone, Debug, Serialize)]
pub struct MetricAssignment {
    #[serde(skip)]
    pub space: Dendrite,
    #[serde(with = "serde_q")]
    pub q: Q,
    /// `λ_0, λ_1, ..., λ_K`.
    #[serde(with = "serde_vec_q")]
    pub weights: Vec<Q>,
    #[serde(with = "serde_q")]
    pub total: Q,
    /// Mass `q^(K+1)` carried by the bushes beyond the truncation.
    #[serde(with = "serde_q")]
    pub deficit: Q,
}

pub fn assign_metric(dec: &BushDecomposition, ratio: &Q) -> Result<MetricAssignment> {
    if *ratio <= Q::zero() || *ratio >= Q::one() {
        return Err(Error::InvalidArgument("q must lie strictly between 0 and 1".into()));
    }
    let k = dec.bushes.len();
    let weights: Vec<Q> = (0..=k).map(|i| (Q::one() - ratio) * ratio.pow(i as i32)).collect();
    let mut lens: Vec<Q> = dec.base.edges().iter().map(|e| e.len.clone()).collect();
    if let FixedSet::Arc { edges, .. } = &dec.fixed {
        let h: Q = edges.iter().map(|&e| dec.base.len(e).clone()).sum();
        for &e in edges {
            lens[e] = &lens[e] * &weights[0] / &h;
        }
    }
    for (i, b) in dec.bushes.iter().enumerate() {
        for &e in &b.edges {
            lens[e] = &lens[e] * &weights[i + 1] / &b.measure;
        }
    }
    let space = dec.base.with_lengths(&lens)?;
    let total: Q = match dec.fixed {
        FixedSet::Arc { .. } => weights.iter().sum(),
        FixedSet::Point(_) => weights[1..].iter().sum(),
    };
    let deficit = ratio.pow(k as i32 + 1);
    Ok(MetricAssignment { space, q: ratio.clone(), weights, total, deficit })
}

/// Target `ℓ_k` and attachment set `N_k` of bush `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Target {
    pub k: usize,
    pub ell: Option<usize>,
    /// Bushes whose blocks make up `J_k⁺`, in order along the arc from `x_k`.
    pub n_set: Vec<usize>,
}

/// `ℓ_k`: the nearest older root, ties toward the older bush.
pub fn plan_targets(dec: &BushDecomposition) -> Result<Vec<Target>> {
    if dec.is_point() {
        return Err(Error::InvalidArgument("targets are planned along an arc".into()));
    }
    let t = &dec.positions;
    let kk = dec.bushes.len();
    let mut all: Vec<usize> = (1..=kk).collect();
    all.sort_by(|a, b| t[a - 1].cmp(&t[b - 1]));
    let mut out = vec![Target { k: 1, ell: None, n_set: all }];
    for k in 2..=kk {
        let gap = |j: usize| (&t[k - 1] - &t[j - 1]).abs();
        let ell = (1..k).min_by(|&a, &b| gap(a).cmp(&gap(b)).then(a.cmp(&b))).expect("k >= 2");
        let (lo, hi) = (rational::min(&t[k - 1], &t[ell - 1]), rational::max(&t[k - 1], &t[ell - 1]));
        let mut n_set: Vec<usize> = (k + 1..=kk).filter(|&h| t[h - 1] > lo && t[h - 1] < hi).collect();
        n_set.push(k);
        n_set.push(ell);
        let from = t[k - 1].clone();
        n_set.sort_by(|a, b| (&t[a - 1] - &from).abs().cmp(&(&t[b - 1] - &from).abs()));
        out.push(Target { k, ell: Some(ell), n_set });
    }
    Ok(out)
}

/// Block `T_h` of `J_k⁺`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub h: usize,
    #[serde(with = "serde_q")]
    pub start: Q,
    #[serde(with = "serde_q")]
    pub end: Q,
}

/// How bush `k` is spread: target, blocks of `J_k⁺` and lap counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupPlan {
    pub k: usize,
    pub ell: Option<usize>,
    pub n_set: Vec<usize>,
    pub blocks: Vec<Block>,
    #[serde(with = "serde_q")]
    pub j_length: Q,
    /// Where `g_k` takes the value `x_k`, so `ν_k(0)`.
    #[serde(with = "serde_q")]
    pub start: Q,
    pub nu_laps: u64,
    pub phi_laps: u64,
    pub psi_laps: u64,
    /// Set when the bush is an arc folded by a tent (point case).
    pub tent: bool,
}

/// A built exact map together with everything used to build it.
#[derive(Clone, Debug)]
pub struct ExactMap {
    pub decomposition: BushDecomposition,
    /// Present in the arc case; the point case keeps the original lengths.
    pub metric: Option<MetricAssignment>,
    pub plans: Vec<BlowupPlan>,
    pub rho: Q,
    /// The map, on [`ExactMap::space`].
    pub map: TreeMap,
}

struct BushPiece {
    emb: Embedding,
    pair: LelPair,
}

impl BushPiece {
    fn new(space: &Dendrite, bush: &Bush, rho: &Q) -> Result<Self> {
        let (sub, emb) = space.restrict(&bush.edges)?;
        let root = emb.sub_vertex(bush.root).expect("root lies in its bush");
        let pair = build_pair(&sub, &PointRef::Vertex(root), rho)?;
        Ok(BushPiece { emb, pair })
    }

    /// Factor taking normalized lengths back to the space.
    fn stretch(&self) -> Q {
        Q::one() / &self.pair.scale
    }
}

/// Builds an exact selfmap of `D` that is the identity on `A`.
pub fn build_exact(d: &Dendrite, a: &Region, ratio: &Q, rho: &Q) -> Result<ExactMap> {
    if *rho <= Q::one() {
        return Err(Error::InvalidArgument("rho must exceed 1".into()));
    }
    let dec = decompose_bushes(d, a)?;
    if dec.is_point() {
        return build_point_case(dec, rho);
    }
    let metric = assign_metric(&dec, ratio)?;
    let space = metric.space.clone();
    let targets = plan_targets(&dec)?;
    let pieces: Vec<BushPiece> = dec.bushes.iter().map(|b| BushPiece::new(&space, b, rho)).collect::<Result<_>>()?;
    let FixedSet::Arc { left, right, .. } = dec.fixed else { unreachable!() };

    let mut vimg: Vec<PointRef> = (0..space.vertex_count()).map(PointRef::Vertex).collect();
    let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
    let mut plans = Vec::with_capacity(targets.len());
    for t in &targets {
        let k = t.k;
        let (from, to) = match t.ell {
            None => (left, right),
            Some(ell) => (dec.bushes[k - 1].root, dec.bushes[ell - 1].root),
        };
        let (g, blocks) = blowup(&space, &dec, &pieces, &metric.weights, t, from, to, rho)?;
        let j_length = blocks_end(&g);
        let start = blocks.iter().find(|b| b.h == k).expect("k is in N_k").start.clone();
        let nu = zigzag_from(g.domain(), &start, NU_LAPS)?;
        let spread = g.after(&nu)?;
        let piece = &pieces[k - 1];
        let f_k = spread.after(&piece.pair.psi)?;
        place(&mut vimg, &mut knots, &f_k, &piece.emb, &piece.stretch(), &dec.bushes[k - 1]);
        plans.push(BlowupPlan {
            k,
            ell: t.ell,
            n_set: t.n_set.clone(),
            blocks,
            j_length,
            start,
            nu_laps: NU_LAPS,
            phi_laps: piece.pair.phi_laps,
            psi_laps: piece.pair.psi_laps,
            tent: false,
        });
    }
    let map = TreeMap::selfmap(space, vimg, knots)?;
    Ok(ExactMap { decomposition: dec, metric: Some(metric), plans, rho: rho.clone(), map })
}

fn blocks_end(g: &TreeMap) -> Q {
    g.domain().total_length()
}

/// `g_k: J_k⁺ → E_k`, walking the arc from `from` to `to` and blowing each root
/// of `N_k` up to a block carrying that bush's walk.
#[allow(clippy::too_many_arguments)]
fn blowup(
    space: &Dendrite,
    dec: &BushDecomposition,
    pieces: &[BushPiece],
    weights: &[Q],
    t: &Target,
    from: VertexId,
    to: VertexId,
    rho: &Q,
) -> Result<(TreeMap, Vec<Block>)> {
    let mut breaks = vec![Q::zero()];
    let mut vimg = vec![PointRef::Vertex(from)];
    let mut jknots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
    let mut blocks = Vec::new();
    let mut walked = Q::zero();
    let mut s = Q::zero();
    for &h in &t.n_set {
        let root = dec.bushes[h - 1].root;
        let at = space.vertex_dist(from, root);
        if at > walked {
            s += (&at - &walked) / rho;
            breaks.push(s.clone());
            vimg.push(PointRef::Vertex(root));
            walked = at;
        }
        let lam = &weights[h];
        let start = s.clone();
        s += lam;
        let edge = breaks.len() - 1;
        breaks.push(s.clone());
        vimg.push(PointRef::Vertex(root));
        let piece = &pieces[h - 1];
        let stretch = piece.stretch();
        let ks = jknots.entry(edge).or_default();
        for (x, y) in piece.pair.phi.knots() {
            if let PointRef::Edge(_, u) = x {
                ks.push((u * lam, piece.emb.to_parent(&y, &stretch)));
            }
        }
        blocks.push(Block { h, start, end: s.clone() });
    }
    let total = space.vertex_dist(from, to);
    if total > walked {
        s += (&total - &walked) / rho;
        breaks.push(s);
        vimg.push(PointRef::Vertex(to));
    }
    let j = Dendrite::arc(&breaks)?;
    Ok((TreeMap::from_knots(j, space.clone(), vimg, jknots)?, blocks))
}

/// Constant-slope map `[0, 1] → J` starting at `start`, running to the right
/// end and then covering `J` `laps` more times.
fn zigzag_from(j: &Dendrite, start: &Q, laps: u64) -> Result<TreeMap> {
    let len = j.total_length();
    let first = &len - start;
    let travel = &first + &len * Q::from_integer(laps.into());
    let (l, r) = (PointRef::Vertex(0), PointRef::Vertex(j.vertex_count() - 1));
    let at = |s: &Q| j.point_along(&l, &r, s);
    let mut knots = Vec::new();
    let mut acc = first.clone();
    let mut end = r.clone();
    for i in 0..laps {
        if !acc.is_zero() {
            knots.push((&acc / &travel, end.clone()));
        }
        end = if i % 2 == 0 { l.clone() } else { r.clone() };
        acc += &len;
    }
    TreeMap::from_knots(Dendrite::unit_interval(), j.clone(), vec![at(start)?, end], BTreeMap::from([(0, knots)]))
}

/// Writes a map of a (normalized) bush into the global vertex images and knots.
fn place(
    vimg: &mut [PointRef],
    knots: &mut BTreeMap<EdgeId, Vec<(Q, PointRef)>>,
    f_k: &TreeMap,
    emb: &Embedding,
    stretch: &Q,
    bush: &Bush,
) {
    for (x, y) in f_k.knots() {
        match emb.to_parent(&x, stretch) {
            PointRef::Vertex(v) => {
                if v != bush.root {
                    vimg[v] = y;
                }
            }
            PointRef::Edge(e, t) => knots.entry(e).or_default().push((t, y)),
        }
    }
}

fn build_point_case(dec: BushDecomposition, rho: &Q) -> Result<ExactMap> {
    let space = dec.base.clone();
    let mut vimg: Vec<PointRef> = (0..space.vertex_count()).map(PointRef::Vertex).collect();
    let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
    let mut plans = Vec::new();
    for (i, bush) in dec.bushes.iter().enumerate() {
        let (sub, emb) = space.restrict(&bush.edges)?;
        let root = emb.sub_vertex(bush.root).expect("root lies in its bush");
        let (local, tent, phi_laps, psi_laps) = match tent_on_arc(&sub, root)? {
            Some(t) => (t, true, 2, 1),
            None => {
                let pair = build_pair(&sub, &PointRef::Vertex(root), rho)?;
                let m = pair.phi.after(&pair.psi)?.transport(&sub, &sub)?;
                (m, false, pair.phi_laps, pair.psi_laps)
            }
        };
        let mapped: Vec<(PointRef, PointRef)> =
            local.knots().into_iter().map(|(x, y)| (x, emb.to_parent(&y, &Q::one()))).collect();
        for (x, y) in mapped {
            match emb.to_parent(&x, &Q::one()) {
                PointRef::Vertex(v) => vimg[v] = y,
                PointRef::Edge(e, t) => knots.entry(e).or_default().push((t, y)),
            }
        }
        plans.push(BlowupPlan {
            k: i + 1,
            ell: None,
            n_set: vec![i + 1],
            blocks: Vec::new(),
            j_length: Q::zero(),
            start: Q::zero(),
            nu_laps: 0,
            phi_laps,
            psi_laps,
            tent,
        });
    }
    let map = TreeMap::selfmap(space, vimg, knots)?;
    Ok(ExactMap { decomposition: dec, metric: None, plans, rho: rho.clone(), map })
}

/// The tent fixing `root` on an arc that ends at `root`; `None` if `t` is not such an arc.
fn tent_on_arc(t: &Dendrite, root: VertexId) -> Result<Option<TreeMap>> {
    if !t.branch_points().is_empty() || t.degree(root) != 1 {
        return Ok(None);
    }
    let far = *t.endpoints().iter().find(|&&v| v != root).expect("an arc has two ends");
    let len = t.total_length();
    let (r, f) = (PointRef::Vertex(root), PointRef::Vertex(far));
    let two = Q::from_integer(2.into());
    let fold = |p: Q| if p <= &len / &two { p * &two } else { (&len - p) * &two };
    let vimg = (0..t.vertex_count())
        .map(|v| t.point_along(&r, &f, &fold(t.vertex_dist(root, v))))
        .collect::<Result<Vec<_>>>()?;
    let mut knots = BTreeMap::new();
    if let PointRef::Edge(e, off) = t.point_along(&r, &f, &(&len / &two))? {
        knots.insert(e, vec![(off, f.clone())]);
    }
    Ok(Some(TreeMap::selfmap(t.clone(), vimg, knots)?))
}

impl ExactMap {
    /// The dendrite the map lives on: the base with reweighted lengths in the arc case.
    pub fn space(&self) -> &Dendrite {
        self.map.domain()
    }

    /// `A` in the coordinates of [`ExactMap::space`].
    pub fn fixed_region(&self) -> Region {
        match &self.decomposition.fixed {
            FixedSet::Arc { edges, .. } => edges_region(self.space(), edges),
            FixedSet::Point(_) => self.decomposition.fixed_region(),
        }
    }

    /// Bush `k` (1-based) in the coordinates of [`ExactMap::space`].
    pub fn bush_region(&self, k: usize) -> Region {
        bush_region_in(self.space(), &self.decomposition.bushes[k - 1])
    }

    pub fn bush_count(&self) -> usize {
        self.decomposition.bushes.len()
    }

    /// The map conjugated back to the base's original lengths.
    pub fn on_base(&self) -> Result<TreeMap> {
        let base = &self.decomposition.base;
        self.map.transport(base, base)
    }

    /// The map as a selfmap of the dendrite it was built for.
    pub fn on_original(&self) -> Result<TreeMap> {
        self.on_base()?.coarsen(&self.decomposition.original, &self.decomposition.refinement)
    }

    /// `E_k` in the coordinates of [`ExactMap::space`]; the bush itself in the point case.
    pub fn target_region(&self, k: usize) -> Region {
        let space = self.space();
        let dec = &self.decomposition;
        let plan = &self.plans[k - 1];
        if dec.is_point() {
            return bush_region_in(space, &dec.bushes[k - 1]);
        }
        let Some(ell) = plan.ell else {
            return space.whole();
        };
        let mut r = space
            .geodesic(&PointRef::Vertex(dec.bushes[k - 1].root), &PointRef::Vertex(dec.bushes[ell - 1].root))
            .expect("roots are points of the space");
        for &h in &plan.n_set {
            r = r.union(space, &bush_region_in(space, &dec.bushes[h - 1]));
        }
        r
    }

    /// Chain `k → ℓ_k → ℓ_ℓk → ...` down to bush 1.
    pub fn chain(&self, k: usize) -> Vec<usize> {
        let mut out = vec![k];
        let mut cur = k;
        while let Some(ell) = self.plans[cur - 1].ell {
            out.push(ell);
            cur = ell;
        }
        out
    }

    /// Checks that every piece of every bush edge covers its goal within the bound.
    ///
    /// Each bush edge is cut into `splits` equal pieces. The goal is the whole
    /// space in the arc case and the piece's own bush in the point case.
    pub fn verify(&self, n_max: usize, splits: u32) -> Result<ExactnessCertificate> {
        if n_max == 0 || splits == 0 {
            return Err(Error::InvalidArgument("n_max and splits must be positive".into()));
        }
        let space = self.space();
        let dec = &self.decomposition;
        let kk = self.bush_count();
        let rho2 = &self.rho * &self.rho;
        let chains: Vec<Vec<usize>> = (1..=kk).map(|k| self.chain(k)).collect();
        let chain_ok = !dec.is_point()
            && chains.iter().all(|c| c.last() == Some(&1) && c.windows(2).all(|w| w[1] < w[0]) && c.len() <= kk);
        let mut entries = Vec::new();
        for (i, bush) in dec.bushes.iter().enumerate() {
            let goal = if dec.is_point() { bush_region_in(space, bush) } else { space.whole() };
            let goal_measure = goal.h1();
            let slack = if dec.is_point() { 0 } else { kk };
            for &e in &bush.edges {
                let len = space.len(e);
                for p in 0..splits {
                    let lo = len * Q::from_integer(p.into()) / Q::from_integer(splits.into());
                    let hi = len * Q::from_integer((p + 1).into()) / Q::from_integer(splits.into());
                    let mut r = Region::empty();
                    r.add_interval(e, lo, hi);
                    r.normalize(space);
                    let measure = r.h1();
                    let bound = growth_steps(&measure, &goal_measure, &rho2) + slack;
                    let n = cover_time(&self.map, &r, &goal, n_max.max(bound));
                    entries.push(CoverEntry { bush: i + 1, edge: e, piece: p, measure, n, bound });
                }
            }
        }
        let all_covered = entries.iter().all(|c| c.n.is_some());
        let within_bound = entries.iter().all(|c| c.n.is_some_and(|n| n <= c.bound));
        Ok(ExactnessCertificate { n_max, entries, chains, chain_ok, all_covered, within_bound })
    }

    /// JSON-ready summary of weights, targets, laps and sizes.
    pub fn manifest(&self) -> BuildManifest {
        BuildManifest {
            rho: self.rho.clone(),
            point_case: self.decomposition.is_point(),
            roots: self
                .decomposition
                .roots()
                .into_iter()
                .map(|v| self.decomposition.refinement.lower_point(&self.decomposition.original, &PointRef::Vertex(v)))
                .collect(),
            positions: self.decomposition.positions.clone(),
            metric: self.metric.clone(),
            plans: self.plans.clone(),
            piece_count: self.map.piece_count(),
        }
    }
}

fn bush_region_in(space: &Dendrite, bush: &Bush) -> Region {
    edges_region(space, &bush.edges)
}

/// Least `s` with `ρ²ˢ · measure ≥ goal`.
fn growth_steps(measure: &Q, goal: &Q, rho2: &Q) -> usize {
    let mut s = 0;
    let mut m = measure.clone();
    while m < *goal {
        m *= rho2;
        s += 1;
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuildManifest {
    #[serde(with = "serde_q")]
    pub rho: Q,
    pub point_case: bool,
    pub roots: Vec<PointRef>,
    #[serde(with = "serde_vec_q")]
    pub positions: Vec<Q>,
    pub metric: Option<MetricAssignment>,
    pub plans: Vec<BlowupPlan>,
    pub piece_count: usize,
}

impl PartialEq for MetricAssignment {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.weights == other.weights
    }
}

impl Eq for MetricAssignment {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverEntry {
    pub bush: usize,
    pub edge: EdgeId,
    pub piece: u32,
    #[serde(with = "serde_q")]
    pub measure: Q,
    pub n: Option<usize>,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessCertificate {
    pub n_max: usize,
    pub entries: Vec<CoverEntry>,
    pub chains: Vec<Vec<usize>>,
    pub chain_ok: bool,
    pub all_covered: bool,
    pub within_bound: bool,
}

/// Least `n ≤ n_max` with `f^n(set) ⊇ goal`.
pub fn cover_time(f: &TreeMap, set: &Region, goal: &Region, n_max: usize) -> Option<usize> {
    let d = f.domain();
    let mut cur = set.clone();
    for n in 0..=n_max {
        if goal.is_subset(d, &cur) {
            return Some(n);
        }
        if n == n_max {
            break;
        }
        let next = f.image(&cur);
        if next == cur {
            return None;
        }
        cur = next;
    }
    None
}

/// Cover time of every domain edge onto the whole domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverCertificate {
    pub n_max: usize,
    /// `(edge, n)`: least `n` with `f^n(edge) = D`, if any within `n_max`.
    pub covers: Vec<(EdgeId, Option<usize>)>,
}

impl CoverCertificate {
    pub fn all_covered(&self) -> bool {
        self.covers.iter().all(|c| c.1.is_some())
    }
}

pub fn verify_exact(f: &TreeMap, n_max: usize) -> Result<CoverCertificate> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let d = f.domain();
    let whole = d.whole();
    let covers = (0..d.edge_count())
        .map(|e| {
            let mut r = Region::empty();
            r.add_interval(e, Q::zero(), d.len(e).clone());
            r.normalize(d);
            (e, cover_time(f, &r, &whole, n_max))
        })
        .collect();
    Ok(CoverCertificate { n_max, covers })
}

/// Where the counterexample map fixes things.
#[derive(Clone, Debug)]
pub enum GchBase {
    /// A point of infinite order; the pieces are the bushes at it.
    Point(PointRef),
    /// An arc and a point `a` on it; the pieces shrink to `a`.
    Arc { arc: Region, a: PointRef },
}

/// One invariant piece `E_j` of the counterexample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GchPiece {
    pub region: Region,
    /// `A_j`, or `{a}` in the point case.
    pub core: Region,
    pub roots: Vec<PointRef>,
    #[serde(with = "serde_q")]
    pub diam: Q,
    pub invariant: bool,
}

/// A map with invariant pieces of shrinking diameter, all meeting at `a`.
#[derive(Clone, Debug)]
pub struct GchSystem {
    pub original: Dendrite,
    pub space: Dendrite,
    pub refinement: Refinement,
    pub map: TreeMap,
    pub a: PointRef,
    pub pieces: Vec<GchPiece>,
}

impl GchSystem {
    pub fn all_invariant(&self) -> bool {
        self.pieces.iter().all(|p| p.invariant)
    }

    /// `E_j ∩ E_k = A_k` for `j < k` (the common point `a` in the point case).
    pub fn pairwise_meet_in_cores(&self) -> bool {
        let d = &self.space;
        for (j, pj) in self.pieces.iter().enumerate() {
            for pk in &self.pieces[j + 1..] {
                let meet = pj.region.intersect(d, &pk.region);
                let expect = pj.core.intersect(d, &pk.core);
                if meet != expect || meet.is_empty() {
                    return false;
                }
            }
        }
        true
    }

    pub fn on_original(&self) -> Result<TreeMap> {
        self.map.coarsen(&self.original, &self.refinement)
    }
}

/// A map of `D` whose invariant pieces shrink to one point; its pieces carry exact maps.
pub fn build_gch_not_eps(d: &Dendrite, base: &GchBase, ratio: &Q, rho: &Q) -> Result<GchSystem> {
    match base {
        GchBase::Point(a) => {
            if d.ideal_point_order(a)? != crate::metric_tree::Order::Omega {
                return Err(Error::Hypothesis("the point is not of infinite order".into()));
            }
            let ex = build_exact(d, &d.point_region(a)?, ratio, rho)?;
            let dec = &ex.decomposition;
            let FixedSet::Point(av) = dec.fixed else { unreachable!() };
            let core = dec.fixed_region();
            let pieces = (1..=ex.bush_count())
                .map(|k| piece_of(&ex.map, dec.bush_region(k), core.clone(), vec![PointRef::Vertex(av)]))
                .collect();
            Ok(GchSystem {
                original: d.clone(),
                space: dec.base.clone(),
                refinement: dec.refinement.clone(),
                map: ex.map,
                a: PointRef::Vertex(av),
                pieces,
            })
        }
        GchBase::Arc { arc, a } => build_gch_arc(d, arc, a, ratio, rho),
    }
}

fn piece_of(f: &TreeMap, region: Region, core: Region, roots: Vec<PointRef>) -> GchPiece {
    let d = f.domain();
    let invariant = f.maps_into(&region, &region);
    let diam = region.diam(d);
    GchPiece { region, core, roots, diam, invariant }
}

fn build_gch_arc(d: &Dendrite, arc: &Region, a: &PointRef, ratio: &Q, rho: &Q) -> Result<GchSystem> {
    let a = d.canon(a)?;
    if !arc.contains(d, &a) {
        return Err(Error::InvalidArgument("a must lie on the arc".into()));
    }
    // cut at the ends of the arc and at a, then decompose without further cuts
    let first = decompose_bushes(d, arc)?;
    let a_first = first.refinement.lift_point(&first.base, &a);
    let mut cuts: BTreeMap<EdgeId, BTreeSet<Q>> = BTreeMap::new();
    if let PointRef::Edge(e, t) = &a_first {
        cuts.insert(*e, BTreeSet::from([t.clone()]));
    }
    let (space, second) = first.base.subdivide(&cuts)?;
    let refinement = first.refinement.chain(&second);
    let arc_s = refinement.lift_region(&space, arc);
    let dec = decompose_bushes(&space, &arc_s)?;
    let PointRef::Vertex(av) = second.lift_point(&space, &a_first) else { unreachable!() };
    let FixedSet::Arc { left, .. } = dec.fixed else { unreachable!() };

    let dist_a = |v: VertexId| space.vertex_dist(av, v);
    let mut order: Vec<usize> = (0..dec.bushes.len()).filter(|&i| dec.bushes[i].root != av).collect();
    order.sort_by(|&x, &y| dist_a(dec.bushes[y].root).cmp(&dist_a(dec.bushes[x].root)).then(x.cmp(&y)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let mut take = rest.len().div_ceil(2);
        while take < rest.len() && dist_a(dec.bushes[rest[take]].root) == dist_a(dec.bushes[rest[take - 1]].root) {
            take += 1;
        }
        groups.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    let at_a: Vec<usize> = (0..dec.bushes.len()).filter(|&i| dec.bushes[i].root == av).collect();
    if groups.is_empty() {
        groups.push(Vec::new());
    }
    groups[0].extend(at_a);

    let FixedSet::Arc { edges: arc_edges, .. } = &dec.fixed else { unreachable!() };
    let mut vimg: Vec<PointRef> = (0..space.vertex_count()).map(PointRef::Vertex).collect();
    let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
    let mut pieces_meta = Vec::new();
    for (j, group) in groups.iter().enumerate() {
        let core_edges: BTreeSet<EdgeId> = if j == 0 {
            arc_edges.clone()
        } else {
            let inner: Vec<VertexId> = groups[j..].iter().flatten().map(|&i| dec.bushes[i].root).collect();
            let pos = |v: VertexId| space.vertex_dist(left, v);
            let lo = inner.iter().copied().chain([av]).min_by(|x, y| pos(*x).cmp(&pos(*y))).expect("nonempty");
            let hi = inner.iter().copied().chain([av]).max_by(|x, y| pos(*x).cmp(&pos(*y))).expect("nonempty");
            let path = space.geodesic(&PointRef::Vertex(lo), &PointRef::Vertex(hi))?;
            arc_edges.iter().copied().filter(|&e| path.covers_edge(&space, e)).collect()
        };
        let mut e_edges = core_edges.clone();
        for &i in group {
            e_edges.extend(dec.bushes[i].edges.iter().copied());
        }
        let (sub, emb) = space.restrict(&e_edges)?;
        let mut core_sub = Region::empty();
        for (se, pe) in emb.edges.iter().enumerate() {
            if core_edges.contains(pe) {
                core_sub.add_interval(se, Q::zero(), sub.len(se).clone());
            }
        }
        core_sub.normalize(&sub);
        let ex = build_exact(&sub, &core_sub, ratio, rho)?;
        if ex.decomposition.base.vertex_count() != sub.vertex_count() {
            return Err(Error::ConstructionFailed { attempts: 1, reason: "piece needed a further subdivision".into() });
        }
        let local = ex.on_base()?;
        for (x, y) in local.knots() {
            let y = emb.to_parent(&y, &Q::one());
            match emb.to_parent(&x, &Q::one()) {
                PointRef::Vertex(v) => {
                    if !core_edges.iter().any(|&e| space.edge(e).u == v || space.edge(e).v == v) {
                        vimg[v] = y;
                    }
                }
                PointRef::Edge(e, t) => {
                    if !core_edges.contains(&e) {
                        knots.entry(e).or_default().push((t, y));
                    }
                }
            }
        }
        let region = edges_region(&space, &e_edges);
        let core = edges_region(&space, &core_edges);
        let roots = group.iter().map(|&i| PointRef::Vertex(dec.bushes[i].root)).collect();
        pieces_meta.push((region, core, roots));
    }
    let map = TreeMap::selfmap(space.clone(), vimg, knots)?;
    let pieces = pieces_meta.into_iter().map(|(region, core, roots)| piece_of(&map, region, core, roots)).collect();
    Ok(GchSystem { original: d.clone(), space, refinement, map, a: PointRef::Vertex(av), pieces })
}

fn edges_region(d: &Dendrite, edges: &BTreeSet<EdgeId>) -> Region {
    let mut r = Region::empty();
    for &e in edges {
        r.add_interval(e, Q::zero(), d.len(e).clone());
    }
    r.normalize(d);
    r
}
