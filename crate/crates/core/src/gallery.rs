//! Generators for the named dendrites and the assembled counterexamples.
//!
//! Every generated tree is a finite truncation; the ideal object it stands
//! for is described by its [`FamilyDescriptor`], whose flags are fixed per
//! family rather than inferred (any finite tree is completely regular).

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_builder::{self, GchBase, GchSystem};
use crate::metric_tree::{Dendrite, Edge, Order, PointRef};
use crate::odometer::{self, GehmanExtension};
use crate::rational::{self, q, qi, serde_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Arc,
    Star {
        #[serde(with = "rational::serde_vec_q")]
        arms: Vec<Q>,
    },
    OmegaStar {
        arms: usize,
        #[serde(with = "serde_q")]
        q: Q,
    },
    Comb {
        depth: usize,
    },
    Riemann {
        qmax: u64,
    },
    CantorComb {
        rank: u32,
    },
    Gehman {
        depth: u32,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Arc => "arc",
            Family::Star { .. } => "star",
            Family::OmegaStar { .. } => "omega_star",
            Family::Comb { .. } => "comb",
            Family::Riemann { .. } => "riemann",
            Family::CantorComb { .. } => "cantor_comb",
            Family::Gehman { .. } => "gehman",
        }
    }
}

/// Properties of the ideal (infinite) dendrite a family converges to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub completely_regular: bool,
    pub all_orders_finite: bool,
    pub in_theorem_class: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    #[serde(flatten)]
    pub family: Family,
    pub ideal: Classification,
}

impl FamilyDescriptor {
    pub fn new(family: Family) -> Self {
        let ideal = classify(&family);
        FamilyDescriptor { family, ideal }
    }

    /// Order of `x` in the ideal object, where it differs from the truncation.
    pub fn ideal_order_at(&self, d: &Dendrite, x: &PointRef) -> Option<Order> {
        match &self.family {
            Family::OmegaStar { .. } => {
                let c = d.marked("center").ok()?;
                (c == x).then_some(Order::Omega)
            }
            _ => None,
        }
    }
}

pub const FAMILIES: [&str; 7] = ["arc", "star", "omega_star", "comb", "riemann", "cantor_comb", "gehman"];

/// Ideal-object flags per family.
pub fn classify(family: &Family) -> Classification {
    let (cr, finite) = match family {
        Family::Arc | Family::Star { .. } | Family::Comb { .. } | Family::CantorComb { .. } => (true, true),
        Family::OmegaStar { .. } => (true, false),
        Family::Riemann { .. } | Family::Gehman { .. } => (false, true),
    };
    Classification { completely_regular: cr, all_orders_finite: finite, in_theorem_class: cr && finite }
}

pub fn classify_name(name: &str) -> Result<Classification> {
    let fam = match name {
        "arc" => Family::Arc,
        "star" => Family::Star { arms: vec![] },
        "omega_star" => Family::OmegaStar { arms: 0, q: q(1, 2) },
        "comb" => Family::Comb { depth: 0 },
        "riemann" => Family::Riemann { qmax: 1 },
        "cantor_comb" => Family::CantorComb { rank: 0 },
        "gehman" => Family::Gehman { depth: 0 },
        other => return Err(Error::Unknown(format!("family {other:?}"))),
    };
    Ok(classify(&fam))
}

pub fn generate(desc: &FamilyDescriptor) -> Result<Dendrite> {
    let d = match &desc.family {
        Family::Arc => Dendrite::unit_interval(),
        Family::Star { arms } => star(arms)?,
        Family::OmegaStar { arms, q } => omega_star(*arms, q)?,
        Family::Comb { depth } => comb(*depth)?,
        Family::Riemann { qmax } => riemann(*qmax)?,
        Family::CantorComb { rank } => cantor_comb(*rank)?,
        Family::Gehman { depth } => gehman(*depth)?,
    };
    Ok(d.with_descriptor(desc.clone()))
}

/// A star with the given arm lengths; center `0`, tip of arm `i` is vertex `i`.
pub fn star(arms: &[Q]) -> Result<Dendrite> {
    if arms.is_empty() {
        return Err(Error::InvalidArgument("a star needs at least one arm".into()));
    }
    let edges: Vec<(usize, usize, Q)> = arms.iter().enumerate().map(|(i, l)| (0, i + 1, l.clone())).collect();
    let mut d = Dendrite::from_edges(arms.len() + 1, &edges)?.with_marked("center", PointRef::Vertex(0))?;
    for i in 1..=arms.len() {
        d = d.with_marked(&format!("tip{i}"), PointRef::Vertex(i))?;
    }
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::Star { arms: arms.to_vec() })))
}

/// The three-armed star with arms 1/2, 1/3, 1/6.
pub fn star3() -> Dendrite {
    star(&[q(1, 2), q(1, 3), q(1, 6)]).expect("star3")
}

/// Truncated ω-star: arm `i` (1-based) has length `(1-q) q^(i-1)`.
pub fn omega_star(arms: usize, ratio: &Q) -> Result<Dendrite> {
    if arms == 0 || *ratio <= Q::zero() || *ratio >= Q::one() {
        return Err(Error::InvalidArgument("omega_star needs arms >= 1 and 0 < q < 1".into()));
    }
    let mut lens = Vec::with_capacity(arms);
    let mut l = Q::one() - ratio;
    for _ in 0..arms {
        lens.push(l.clone());
        l *= ratio;
    }
    let d = star(&lens)?;
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::OmegaStar { arms, q: ratio.clone() })))
}

/// Builds a comb: a base arc with vertical teeth `(position, height)`.
///
/// Base vertices come first in increasing position, then tips in the order
/// the teeth are given. Edges: base edges left to right, then teeth in order.
fn comb_like(left: Q, right: Q, teeth: &[(Q, Q)]) -> Result<(Dendrite, Vec<usize>)> {
    let mut pos: Vec<Q> = teeth.iter().map(|t| t.0.clone()).collect();
    pos.push(left.clone());
    pos.push(right.clone());
    pos.sort();
    pos.dedup();
    let base_id: BTreeMap<Q, usize> = pos.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let mut edges = Vec::new();
    for (i, w) in pos.windows(2).enumerate() {
        edges.push(Edge { u: i, v: i + 1, len: &w[1] - &w[0] });
    }
    let mut n = pos.len();
    let mut tips = Vec::new();
    for (p, h) in teeth {
        edges.push(Edge { u: base_id[p], v: n, len: h.clone() });
        tips.push(n);
        n += 1;
    }
    let mut d = Dendrite::new(n, edges, BTreeMap::new(), None)?;
    d = d.with_marked("base_left", PointRef::Vertex(0))?;
    d = d.with_marked("base_right", PointRef::Vertex(pos.len() - 1))?;
    Ok((d, tips))
}

/// Truncated comb: base `[-1, 1]`, tooth of height `1/k` at `1/k` for
/// `k = 1..=depth`, and a segment of height 1 at `0`.
///
/// Tooth `k` is edge `depth + 1 + k` counting base edges first; the segment
/// at `0` is the last edge.
pub fn comb(depth: usize) -> Result<Dendrite> {
    if depth == 0 {
        return Err(Error::InvalidArgument("comb depth must be at least 1".into()));
    }
    let mut teeth: Vec<(Q, Q)> = (1..=depth as i64).map(|k| (q(1, k), q(1, k))).collect();
    teeth.push((Q::zero(), Q::one()));
    let (mut d, tips) = comb_like(qi(-1), qi(1), &teeth)?;
    for k in 1..=depth {
        let tip = tips[k - 1];
        let root = d.edge(d.edge_count() - teeth.len() + k - 1).u;
        d = d.with_marked(&format!("root{k}"), PointRef::Vertex(root))?;
        d = d.with_marked(&format!("tip{k}"), PointRef::Vertex(tip))?;
    }
    let last = d.edge(d.edge_count() - 1).clone();
    d = d.with_marked("origin", PointRef::Vertex(last.u))?;
    d = d.with_marked("origin_tip", PointRef::Vertex(last.v))?;
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::Comb { depth })))
}

/// Reduced fractions `p/q` in `[0, 1]` with `q <= qmax`, increasing.
pub fn reduced_fractions(qmax: u64) -> Vec<Q> {
    let mut out = vec![Q::zero()];
    for den in 1..=qmax {
        for num in 1..=den {
            if num.gcd(&den) == 1 {
                out.push(q(num as i64, den as i64));
            }
        }
    }
    out.sort();
    out
}

/// Truncated Riemann dendrite: tooth of height `1/q` at every reduced `p/q`, `q <= qmax`.
pub fn riemann(qmax: u64) -> Result<Dendrite> {
    if qmax == 0 {
        return Err(Error::InvalidArgument("riemann needs qmax >= 1".into()));
    }
    let teeth: Vec<(Q, Q)> = reduced_fractions(qmax)
        .into_iter()
        .map(|x| {
            let h = if x.is_zero() { Q::one() } else { Q::new(1.into(), x.denom().clone()) };
            (x, h)
        })
        .collect();
    let (d, _) = comb_like(Q::zero(), Q::one(), &teeth)?;
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::Riemann { qmax })))
}

/// Endpoints of the ternary Cantor gaps of range `m` (the `2^(m-1)` gaps of length `3^-m`).
pub fn cantor_gap_endpoints(m: u32) -> Vec<Q> {
    let mut lefts = vec![Q::zero()];
    for level in 1..m {
        let step = rational::pow(3, -(level as i64));
        lefts = lefts.iter().flat_map(|l| [l.clone(), l + &step * qi(2)]).collect();
    }
    let width = rational::pow(3, -(m as i64));
    lefts.iter().flat_map(|l| [l + &width, l + &width * qi(2)]).collect()
}

/// Base `[0, 1]` with teeth of height `1/(m+1)` at range-`m` gap endpoints, `m <= rank`.
pub fn cantor_comb(rank: u32) -> Result<Dendrite> {
    let mut teeth = Vec::new();
    for m in 1..=rank {
        for x in cantor_gap_endpoints(m) {
            teeth.push((x, q(1, m as i64 + 1)));
        }
    }
    teeth.sort();
    let (d, _) = comb_like(Q::zero(), Q::one(), &teeth)?;
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::CantorComb { rank })))
}

/// Complete binary tree with `2^depth` leaves; level-`j` edges have length `2^-(j+1)`.
///
/// Vertex `0` is the root; children of `i` are `2i+1` and `2i+2`.
pub fn gehman(depth: u32) -> Result<Dendrite> {
    if depth == 0 {
        return Err(Error::InvalidArgument("gehman depth must be at least 1".into()));
    }
    let n = (1usize << (depth + 1)) - 1;
    let mut edges = Vec::new();
    for c in 1..n {
        let level = usize::BITS - (c + 1).leading_zeros() - 1;
        edges.push(Edge { u: (c - 1) / 2, v: c, len: rational::pow(2, -(level as i64)) });
    }
    let d = Dendrite::new(n, edges, BTreeMap::new(), None)?.with_marked("root", PointRef::Vertex(0))?;
    Ok(d.with_descriptor(FamilyDescriptor::new(Family::Gehman { depth })))
}

/// The assembled systems that are generically chaotic but not generically ε-chaotic,
/// plus the symbolic pieces around them.
#[derive(Clone, Debug)]
pub enum Counterexample {
    Gch(GchSystem),
    CantorShift(CantorShift),
    Gehman(GehmanExtension),
}

pub const COUNTEREXAMPLES: [&str; 4] = ["omega_star_gch", "comb_gch", "cantor_shift", "odometer_gehman"];

/// Builds a counterexample at truncation `size` (arms, comb depth, word length or tree depth).
pub fn build_counterexample(name: &str, size: usize) -> Result<Counterexample> {
    let (ratio, rho) = (exact_builder::default_q(), exact_builder::default_rho());
    match name {
        "omega_star_gch" => Ok(Counterexample::Gch(omega_star_gch(size)?)),
        "comb_gch" => {
            let d = comb(size)?;
            let arc = d.geodesic(d.marked("base_left")?, d.marked("base_right")?)?;
            let a = d.marked("origin")?.clone();
            Ok(Counterexample::Gch(exact_builder::build_gch_not_eps(&d, &GchBase::Arc { arc, a }, &ratio, &rho)?))
        }
        "cantor_shift" => Ok(Counterexample::CantorShift(CantorShift::new(size.max(1), &q(1, 2))?)),
        "odometer_gehman" => Ok(Counterexample::Gehman(odometer::gehman_extend(size as u32)?)),
        other => Err(Error::Unknown(format!("counterexample {other:?}"))),
    }
}

/// ω-star with `arms` arms, every arm carrying a tent fixing the center.
pub fn omega_star_gch(arms: usize) -> Result<GchSystem> {
    let d = omega_star(arms, &q(1, 2))?;
    let c = d.marked("center")?.clone();
    exact_builder::build_gch_not_eps(&d, &GchBase::Point(c), &exact_builder::default_q(), &exact_builder::default_rho())
}

/// An eventually-0 binary word on one arm; trailing zeros are dropped, so
/// the empty word is `0^∞`, the common center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArmWord {
    pub arm: usize,
    pub word: Vec<u8>,
}

impl ArmWord {
    pub fn new(arm: usize, word: &[u8]) -> Self {
        let mut w = word.to_vec();
        while w.last() == Some(&0) {
            w.pop();
        }
        ArmWord { arm, word: w }
    }

    pub fn is_center(&self) -> bool {
        self.word.is_empty()
    }
}

/// Per-arm Cantor sets of an ω-star glued at `0^∞`, with the one-sided shift.
///
/// The word `w` on arm `i` sits at distance `λ_i Σ 2 w_j / 3^(j+1)` from
/// the center, so `0^∞` is the center on every arm.
#[derive(Clone, Debug)]
pub struct CantorShift {
    pub star: Dendrite,
    pub arms: usize,
}

impl CantorShift {
    pub fn new(arms: usize, ratio: &Q) -> Result<Self> {
        Ok(CantorShift { star: omega_star(arms, ratio)?, arms })
    }

    pub fn shift(&self, x: &ArmWord) -> ArmWord {
        if x.is_center() {
            return x.clone();
        }
        ArmWord::new(x.arm, &x.word[1..])
    }

    /// Position of a word in the star.
    pub fn embed(&self, x: &ArmWord) -> Result<PointRef> {
        if x.arm == 0 || x.arm > self.arms || x.word.iter().any(|&b| b > 1) {
            return Err(Error::InvalidPoint(format!("{x:?}")));
        }
        let center = self.star.marked("center")?.clone();
        if x.is_center() {
            return Ok(center);
        }
        let tip = PointRef::Vertex(x.arm);
        let len = self.star.dist(&center, &tip)?;
        let mut t = Q::zero();
        let mut w = Q::one();
        for &b in &x.word {
            w /= qi(3);
            if b == 1 {
                t += &w * qi(2);
            }
        }
        self.star.point_along(&center, &tip, &(len * t))
    }

    /// Whether `σ^n [u] ∩ [v] ≠ ∅` for cylinders on one arm.
    pub fn cylinders_meet(u: &[u8], v: &[u8], n: usize) -> bool {
        (0..v.len()).all(|j| {
            let i = n + j;
            i >= u.len() || u[i] == v[j]
        })
    }
}

/// Parses `name` plus CLI-style parameters into a descriptor.
pub fn descriptor_from_params(
    name: &str,
    depth: Option<u64>,
    arms: Option<usize>,
    ratio: Option<Q>,
    qmax: Option<u64>,
) -> Result<FamilyDescriptor> {
    let fam = match name {
        "arc" => Family::Arc,
        "star" => Family::Star { arms: vec![q(1, 2), q(1, 3), q(1, 6)] },
        "omega_star" => Family::OmegaStar { arms: arms.unwrap_or(12), q: ratio.unwrap_or_else(|| q(1, 2)) },
        "comb" => Family::Comb { depth: depth.unwrap_or(4) as usize },
        "riemann" => Family::Riemann { qmax: qmax.or(depth).unwrap_or(5) },
        "cantor_comb" => Family::CantorComb { rank: depth.unwrap_or(3) as u32 },
        "gehman" => Family::Gehman { depth: depth.unwrap_or(3) as u32 },
        other => return Err(Error::Unknown(format!("family {other:?}"))),
    };
    Ok(FamilyDescriptor::new(fam))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_phi(n: u64) -> u64 {
        (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn comb3_layout() {
        let d = comb(3).unwrap();
        // base vertices -1, 0, 1/3, 1/2, 1
        assert_eq!(d.vertex_count(), 5 + 4);
        assert_eq!(d.dist(d.marked("tip1").unwrap(), d.marked("base_left").unwrap()).unwrap(), qi(3));
        for k in 1..=3i64 {
            let root = d.marked(&format!("root{k}")).unwrap();
            let tip = d.marked(&format!("tip{k}")).unwrap();
            assert_eq!(d.dist(root, tip).unwrap(), q(1, k));
            assert_eq!(d.dist(d.marked("origin").unwrap(), root).unwrap(), q(1, k));
        }
        assert_eq!(d.point_order(d.marked("root2").unwrap()).unwrap(), 3);
    }

    #[test]
    fn riemann_tooth_count() {
        for qmax in 1..=7u64 {
            let d = riemann(qmax).unwrap();
            let teeth = 1 + (1..=qmax).map(euler_phi).sum::<u64>();
            assert_eq!(d.endpoints().len() as u64, teeth);
            assert_eq!(reduced_fractions(qmax).len() as u64, teeth);
        }
        let r3 = reduced_fractions(3);
        assert_eq!(r3, vec![qi(0), q(1, 3), q(1, 2), q(2, 3), qi(1)]);
    }

    #[test]
    fn omega_star_arms() {
        let d = omega_star(3, &q(1, 2)).unwrap();
        let c = d.marked("center").unwrap().clone();
        let lens: Vec<Q> = (1..=3).map(|i| d.dist(&c, &PointRef::Vertex(i)).unwrap()).collect();
        assert_eq!(lens, vec![q(1, 2), q(1, 4), q(1, 8)]);
        assert_eq!(d.ideal_point_order(&c).unwrap(), Order::Omega);
        assert_eq!(d.ideal_point_order(&PointRef::Vertex(1)).unwrap(), Order::Finite(1));
    }

    #[test]
    fn cantor_gaps() {
        assert_eq!(cantor_gap_endpoints(1), vec![q(1, 3), q(2, 3)]);
        assert_eq!(cantor_gap_endpoints(2), vec![q(1, 9), q(2, 9), q(7, 9), q(8, 9)]);
        let d = cantor_comb(3).unwrap();
        assert_eq!(d.endpoints().len(), 2 + 4 + 8 + 2);
    }

    #[test]
    fn gehman_shape() {
        let d = gehman(2).unwrap();
        assert_eq!(d.vertex_count(), 7);
        assert_eq!(d.endpoints().len(), 4);
        assert!(d.branch_points().iter().all(|&v| d.degree(v) == 3));
    }

    #[test]
    fn classification_flags() {
        assert!(!classify_name("riemann").unwrap().completely_regular);
        assert!(!classify_name("omega_star").unwrap().all_orders_finite);
        assert!(classify_name("comb").unwrap().in_theorem_class);
        assert!(classify_name("nope").is_err());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let d = generate(&FamilyDescriptor::new(Family::OmegaStar { arms: 4, q: q(1, 3) })).unwrap();
        let back = Dendrite::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!(d.to_json().contains("\"family\": \"omega_star\""));
    }
    fn all_words(len: usize) -> Vec<Vec<u8>> {
        (0..1usize << len).map(|m| (0..len).map(|i| ((m >> i) & 1) as u8).collect()).collect()
    }

    #[test]
    fn cantor_shift_fixes_center_and_arms() {
        let cs = CantorShift::new(4, &q(1, 2)).unwrap();
        let c = ArmWord::new(2, &[0, 0, 0]);
        assert!(c.is_center());
        assert_eq!(cs.shift(&c), c);
        assert_eq!(cs.embed(&c).unwrap(), *cs.star.marked("center").unwrap());
        for arm in 1..=4 {
            for w in all_words(4) {
                let x = ArmWord::new(arm, &w);
                assert_eq!(cs.shift(&x).arm, arm);
                let p = cs.embed(&x).unwrap();
                let dc = cs.star.dist(cs.star.marked("center").unwrap(), &p).unwrap();
                assert!(dc <= cs.star.dist(cs.star.marked("center").unwrap(), &PointRef::Vertex(arm)).unwrap());
            }
        }
    }

    // Brute force: a word of length n + |v| extending u whose n-shift starts with v.
    fn meets_brute(u: &[u8], v: &[u8], n: usize) -> bool {
        let len = (n + v.len()).max(u.len());
        all_words(len).iter().any(|x| x.starts_with(u) && x[n..].starts_with(v))
    }

    #[test]
    fn cantor_shift_is_mixing_on_cylinders() {
        for lu in 0..=3 {
            for lv in 0..=3 {
                for u in all_words(lu) {
                    for v in all_words(lv) {
                        for n in 0..8 {
                            let fast = CantorShift::cylinders_meet(&u, &v, n);
                            assert_eq!(fast, meets_brute(&u, &v, n));
                            if n >= lu {
                                assert!(fast);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn counterexamples_build() {
        let Counterexample::Gch(sys) = build_counterexample("omega_star_gch", 12).unwrap() else { panic!() };
        assert_eq!(sys.pieces.len(), 12);
        assert!(sys.all_invariant());
        let c = sys.a.clone();
        for arm in 1..=12 {
            let tip = PointRef::Vertex(arm);
            // tent per arm: the tip goes to the center, the arm midpoint to the tip
            assert_eq!(sys.map.apply(&tip).unwrap(), c);
            let mid = sys.space.point_along(&c, &tip, &(sys.space.dist(&c, &tip).unwrap() / qi(2))).unwrap();
            assert_eq!(sys.map.apply(&mid).unwrap(), tip);
        }
        assert!(matches!(build_counterexample("comb_gch", 4).unwrap(), Counterexample::Gch(_)));
        assert!(matches!(build_counterexample("cantor_shift", 3).unwrap(), Counterexample::CantorShift(_)));
        assert!(matches!(build_counterexample("odometer_gehman", 3).unwrap(), Counterexample::Gehman(_)));
        assert!(build_counterexample("floyd", 3).is_err());
    }
}
