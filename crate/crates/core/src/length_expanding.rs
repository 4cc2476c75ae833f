//! ρ-length-expanding maps and the walk/zigzag surjections `φ: I → T`, `ψ: T → I`.
//!
//! A map is ρ-length-expanding for a family `𝒞` when every `C ∈ 𝒞` either
//! maps onto the whole codomain or gains measure: `H¹(f(C)) ≥ ρ·H¹(C)`. The
//! checker samples the family; a returned witness is a genuine violation,
//! while a pass is evidence only.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_tree::{Dendrite, PointRef, Region};
use crate::rational::{self, qi, serde_q, Q};
use crate::tree_map::TreeMap;

/// A set whose image neither covers the codomain nor grows by the factor ρ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LEWitness {
    pub set: Region,
    #[serde(with = "serde_q")]
    pub measure: Q,
    #[serde(with = "serde_q")]
    pub image_measure: Q,
    #[serde(with = "serde_q")]
    pub rho: Q,
}

impl LEWitness {
    /// Recomputes the image and confirms the violation.
    pub fn reverify(&self, f: &TreeMap) -> bool {
        violation(f, &self.set, &self.rho).as_ref() == Some(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LECheck {
    Pass { checked: usize },
    Witness(LEWitness),
}

impl LECheck {
    pub fn passed(&self) -> bool {
        matches!(self, LECheck::Pass { .. })
    }
}

/// Which nondegenerate sets the checker draws from. The whole domain is always included.
#[derive(Clone, Debug)]
pub enum DenseFamily {
    /// Arcs between random grid points of the domain.
    AllClosedIntervals,
    /// Images `φ(J)` of random intervals `J ⊆ I`.
    PhiImages(TreeMap),
    Explicit(Vec<Region>),
}

const GRID: u32 = 1 << 10;

impl DenseFamily {
    pub fn sample(&self, domain: &Dendrite, samples: usize, seed: u64) -> Vec<Region> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(samples + 1);
        match self {
            DenseFamily::AllClosedIntervals => {
                out.push(domain.whole());
                while out.len() < samples.max(1) {
                    out.push(domain.random_arc(&mut rng, GRID));
                }
            }
            DenseFamily::PhiImages(phi) => {
                out.push(domain.whole());
                let interval = phi.domain();
                while out.len() < samples.max(1) {
                    let j = interval.random_arc(&mut rng, GRID);
                    let c = phi.image(&j);
                    if c.h1() > Q::zero() {
                        out.push(c);
                    }
                }
            }
            DenseFamily::Explicit(sets) => out.extend(sets.iter().cloned()),
        }
        out
    }
}

fn violation(f: &TreeMap, c: &Region, rho: &Q) -> Option<LEWitness> {
    let measure = c.h1();
    if measure.is_zero() {
        return None;
    }
    let img = f.image(c);
    if img.is_whole(f.target()) {
        return None;
    }
    let image_measure = img.h1();
    if image_measure >= rho * &measure {
        return None;
    }
    Some(LEWitness { set: c.clone(), measure, image_measure, rho: rho.clone() })
}

/// Tests the ρ-length-expanding dichotomy on sampled members of `family`.
pub fn check_length_expanding(
    f: &TreeMap,
    family: &DenseFamily,
    rho: &Q,
    samples: usize,
    seed: u64,
) -> Result<LECheck> {
    if *rho <= Q::one() {
        return Err(Error::InvalidArgument("rho must exceed 1".into()));
    }
    let members = family.sample(f.domain(), samples, seed);
    for c in &members {
        if let Some(w) = violation(f, c, rho) {
            return Ok(LECheck::Witness(w));
        }
    }
    Ok(LECheck::Pass { checked: members.len() })
}

/// Constant-slope zigzag on `[0, 1]` with `laps` monotone pieces, starting at 0.
pub fn zigzag(laps: u64) -> Result<TreeMap> {
    if laps == 0 {
        return Err(Error::InvalidArgument("a zigzag needs at least one lap".into()));
    }
    let i = Dendrite::unit_interval();
    let level = |j: u64| PointRef::Vertex((j % 2) as usize);
    let knots: Vec<(Q, PointRef)> = (1..laps).map(|j| (Q::new(j.into(), laps.into()), level(j))).collect();
    TreeMap::selfmap(i, vec![level(0), level(laps)], BTreeMap::from([(0, knots)]))
}

/// Vertices of a closed walk from vertex `a` crossing every edge twice.
fn double_cover_walk(d: &Dendrite, a: usize) -> Vec<usize> {
    let mut walk = vec![a];
    let mut stack = vec![(a, usize::MAX, 0usize)];
    while let Some((v, from_edge, next)) = stack.pop() {
        let inc = d.incident(v);
        if next < inc.len() {
            stack.push((v, from_edge, next + 1));
            let (e, w) = inc[next];
            if e != from_edge {
                walk.push(w);
                stack.push((w, e, 0));
            }
        } else if let Some(&(p, _, _)) = stack.last() {
            walk.push(p);
        }
    }
    walk
}

/// Unit-speed closed double-cover walk of `t` from `a`, as a map `I → t`.
fn walk_map(t: &Dendrite, a: &PointRef) -> Result<TreeMap> {
    let (fine, refi, av) = split_at(t, a)?;
    let walk = double_cover_walk(&fine, av);
    let total: Q = fine.total_length() * qi(2);
    let mut acc = Q::zero();
    let mut knots = Vec::new();
    for w in walk.windows(2).take(walk.len().saturating_sub(2)) {
        acc += fine.vertex_dist(w[0], w[1]);
        knots.push((&acc / &total, refi.lower_point(t, &PointRef::Vertex(w[1]))));
    }
    let a = t.canon(a)?;
    TreeMap::from_knots(Dendrite::unit_interval(), t.clone(), vec![a.clone(), a], BTreeMap::from([(0, knots)]))
}

/// Subdivides so that `a` is a vertex.
fn split_at(t: &Dendrite, a: &PointRef) -> Result<(Dendrite, crate::metric_tree::Refinement, usize)> {
    let a = t.canon(a)?;
    let mut cuts = BTreeMap::new();
    if let PointRef::Edge(e, off) = &a {
        cuts.insert(*e, std::collections::BTreeSet::from([off.clone()]));
    }
    let (fine, refi) = t.subdivide(&cuts)?;
    let av = match refi.lift_point(&fine, &a) {
        PointRef::Vertex(v) => v,
        PointRef::Edge(..) => unreachable!("a was made a vertex"),
    };
    Ok((fine, refi, av))
}

/// `x ↦ d(a, x) / radius` as a map `t → I`.
fn normalized_distance(t: &Dendrite, a: &PointRef) -> Result<(TreeMap, Q)> {
    let (fine, refi, av) = split_at(t, a)?;
    let radius = (0..fine.vertex_count()).map(|v| fine.vertex_dist(av, v)).max().unwrap_or_else(Q::zero);
    if radius.is_zero() {
        return Err(Error::InvalidDendrite("degenerate tree".into()));
    }
    let i = Dendrite::unit_interval();
    let to_i = |v: usize| i.canon_unchecked(0, fine.vertex_dist(av, v) / &radius);
    let vimg: Vec<PointRef> = (0..t.vertex_count()).map(to_i).collect();
    let mut knots: BTreeMap<usize, Vec<(Q, PointRef)>> = BTreeMap::new();
    for v in t.vertex_count()..fine.vertex_count() {
        if let PointRef::Edge(e, off) = refi.lower_point(t, &PointRef::Vertex(v)) {
            knots.entry(e).or_default().push((off, to_i(v)));
        }
    }
    Ok((TreeMap::from_knots(t.clone(), i, vimg, knots)?, radius))
}

/// A validated pair `φ: I → T`, `ψ: T → I` on the normalized copy of `T`.
#[derive(Clone, Debug)]
pub struct LelPair {
    pub phi: TreeMap,
    pub psi: TreeMap,
    /// `T` rescaled to total length 1.
    pub space: Dendrite,
    /// Factor applied to the original lengths.
    pub scale: Q,
    pub phi_laps: u64,
    pub psi_laps: u64,
    pub attempts: u32,
}

pub const MAX_ATTEMPTS: u32 = 6;
const BUILD_SAMPLES: usize = 200;

/// Builds `φ` (closed walk ∘ zigzag) and `ψ` (zigzag ∘ normalized distance to `a`)
/// and validates both with the checker, doubling lap counts on failure.
pub fn build_pair(t: &Dendrite, a: &PointRef, rho: &Q) -> Result<LelPair> {
    build_pair_with(t, a, rho, BUILD_SAMPLES, 0)
}

pub fn build_pair_with(t: &Dendrite, a: &PointRef, rho: &Q, samples: usize, seed: u64) -> Result<LelPair> {
    if *rho <= Q::one() {
        return Err(Error::InvalidArgument("rho must exceed 1".into()));
    }
    let a = t.canon(a)?;
    let scale = Q::one() / t.total_length();
    let space = t.scaled(&scale)?;
    let walk = walk_map(&space, &a)?;
    let (dist, radius) = normalized_distance(&space, &a)?;
    let far_leaves = space.endpoints().into_iter().filter(|v| PointRef::Vertex(*v) != a).count().max(1);

    let two_rho = rho * qi(2);
    let mut phi_laps = rational::ceil_to_u64(&two_rho);
    phi_laps += phi_laps % 2;
    let mut psi_laps = rational::ceil_to_u64(&(&two_rho * qi(far_leaves as i64) * &radius)).max(1);

    let mut last: Option<LEWitness> = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let phi = walk.after(&zigzag(phi_laps)?)?;
        let phi_check = check_length_expanding(&phi, &DenseFamily::AllClosedIntervals, rho, samples, seed)?;
        if let LECheck::Witness(w) = phi_check {
            last = Some(w);
            phi_laps *= 2;
            continue;
        }
        let psi = zigzag(psi_laps)?.after(&dist)?;
        let fam = DenseFamily::PhiImages(phi.clone());
        match check_length_expanding(&psi, &fam, rho, samples, seed)? {
            LECheck::Pass { .. } => {
                return Ok(LelPair { phi, psi, space, scale, phi_laps, psi_laps, attempts: attempt });
            }
            LECheck::Witness(w) => {
                last = Some(w);
                psi_laps *= 2;
            }
        }
    }
    let reason = match last {
        Some(w) => format!(
            "last witness has measure {} and image measure {}",
            rational::fmt(&w.measure),
            rational::fmt(&w.image_measure)
        ),
        None => "no witness recorded".into(),
    };
    Err(Error::ConstructionFailed { attempts: MAX_ATTEMPTS, reason })
}
