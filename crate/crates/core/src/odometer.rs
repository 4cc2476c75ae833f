//! The skew product `H` over the 3-adic odometer and its Gehman-tree shadow.
//!
//! Addresses `α ∈ {0,1,2}^ℕ` are added to with carry moving to higher
//! positions. Only addresses with finitely many digits different from 1 carry
//! a nondegenerate fibre `K_α = {x_α} × [0, 3^(-ℓ_α)]`, where `ℓ_α` counts the
//! non-1 digits; those are the ones represented here. `H` moves `K_α` onto
//! `K_(α+1)` by the increasing linear map, so along an orbit the fibre length
//! is `3^(-ℓ(α+n))`: it returns to `1/3` infinitely often and also gets
//! arbitrarily small.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gallery;
use crate::metric_tree::{Dendrite, PointRef};
use crate::rational::{self, q, serde_q, Q};
use crate::tree_map::TreeMap;

/// A 3-adic address whose digits are 1 from some position on.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    /// Position to digit, non-1 digits only.
    digits: BTreeMap<u64, u8>,
}

impl Address {
    /// `1^∞`.
    pub fn ones() -> Self {
        Address::default()
    }

    /// Address from its first digits; the rest are 1.
    pub fn from_prefix(prefix: &[u8]) -> Result<Self> {
        let mut digits = BTreeMap::new();
        for (i, &d) in prefix.iter().enumerate() {
            if d > 2 {
                return Err(Error::Parse(format!("digit {d} is not ternary")));
            }
            if d != 1 {
                digits.insert(i as u64, d);
            }
        }
        Ok(Address { digits })
    }

    pub fn digit(&self, i: u64) -> u8 {
        self.digits.get(&i).copied().unwrap_or(1)
    }

    /// Positions holding 0 or 2.
    pub fn support(&self) -> impl Iterator<Item = (u64, u8)> + '_ {
        self.digits.iter().map(|(i, d)| (*i, *d))
    }

    /// `ℓ_α`: the number of digits equal to 0 or 2.
    pub fn ell(&self) -> u64 {
        self.digits.len() as u64
    }

    /// `α + n` in the 3-adic group.
    pub fn add(&self, n: i64) -> Address {
        let mut digits = self.digits.clone();
        let mut carry = n as i128;
        let mut i = 0u64;
        while carry != 0 {
            let s = self.digit(i) as i128 + carry;
            let d = s.rem_euclid(3);
            carry = s.div_euclid(3);
            if d == 1 {
                digits.remove(&i);
            } else {
                digits.insert(i, d as u8);
            }
            i += 1;
        }
        Address { digits }
    }

    /// `x_α = Σ 2α_i / 5^(i+1)`.
    pub fn embed_x(&self) -> Q {
        let mut x = q(1, 2);
        for (i, d) in self.support() {
            x += Q::from_integer((2 * (d as i64 - 1)).into()) / five_pow(i + 1);
        }
        x
    }

    /// Least position where the digits differ.
    pub fn valuation(&self, other: &Address) -> Option<u64> {
        let keys: BTreeSet<u64> = self.digits.keys().chain(other.digits.keys()).copied().collect();
        keys.into_iter().find(|&i| self.digit(i) != other.digit(i))
    }

    /// Fibre length `3^(-ℓ_α)`.
    pub fn fiber_length(&self) -> Q {
        three_pow_neg(self.ell() as i64)
    }
}

fn five_pow(k: u64) -> Q {
    Q::from_integer(num_bigint::BigInt::from(5u32).pow(k as u32))
}

fn three_pow_neg(k: i64) -> Q {
    let p = Q::from_integer(num_bigint::BigInt::from(3u32).pow(k.unsigned_abs() as u32));
    if k >= 0 {
        Q::one() / p
    } else {
        p
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((&last, _)) = self.digits.iter().next_back() {
            for i in 0..=last {
                write!(f, "{}", self.digit(i))?;
            }
        }
        write!(f, "1^inf")
    }
}

impl FromStr for Address {
    type Err = Error;

    /// Little-endian digits followed by `1^inf`, as in `"021^inf"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let prefix = s.strip_suffix("1^inf").ok_or_else(|| Error::Parse(format!("address {s:?} must end in 1^inf")))?;
        let digits = prefix
            .chars()
            .map(|c| c.to_digit(3).map(|d| d as u8).ok_or_else(|| Error::Parse(format!("bad digit {c:?}"))))
            .collect::<Result<Vec<u8>>>()?;
        Address::from_prefix(&digits)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point `(x_α, y)` of a nondegenerate fibre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub alpha: Address,
    #[serde(with = "serde_q")]
    pub y: Q,
}

impl FiberPoint {
    pub fn new(alpha: Address, y: Q) -> Result<Self> {
        if y < Q::zero() || y > alpha.fiber_length() {
            return Err(Error::InvalidPoint(format!("y = {} is outside the fibre of {alpha}", rational::fmt(&y))));
        }
        Ok(FiberPoint { alpha, y })
    }

    pub fn x(&self) -> Q {
        self.alpha.embed_x()
    }
}

/// `H(x_α, y) = (x_(α+1), 3^(ℓ_α - ℓ_(α+1)) y)`.
pub fn step(p: &FiberPoint) -> FiberPoint {
    shift_by(p, 1)
}

pub fn step_inverse(p: &FiberPoint) -> FiberPoint {
    shift_by(p, -1)
}

/// `H^n(p)` for any integer `n`.
pub fn shift_by(p: &FiberPoint, n: i64) -> FiberPoint {
    let alpha = p.alpha.add(n);
    let factor = three_pow_neg(alpha.ell() as i64 - p.alpha.ell() as i64);
    FiberPoint { y: &p.y * factor, alpha }
}

/// `diam H^n(K_α) = 3^(-ℓ(α+n))` for `n = 0..=steps`.
pub fn fiber_diam_traj(alpha: &Address, steps: usize) -> Vec<Q> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = alpha.clone();
    for n in 0..=steps {
        if n > 0 {
            a = a.add(1);
        }
        out.push(a.fiber_length());
    }
    out
}

/// Same as [`fiber_diam_traj`] with `ℓ` alongside, for CSV export.
pub fn fiber_traj_rows(alpha: &Address, steps: usize) -> Vec<(usize, u64, Q)> {
    let mut a = alpha.clone();
    (0..=steps)
        .map(|n| {
            if n > 0 {
                a = a.add(1);
            }
            (n, a.ell(), a.fiber_length())
        })
        .collect()
}

/// Result of the ε-scrambled search inside one fibre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScrambledCount {
    /// Largest grid subset whose pairs all have `limsup d > ε`.
    pub max_size: usize,
    /// `⌊1/(3ε)⌋ + 1`, an upper bound.
    pub bound: u64,
    /// `⌈1/(3ε)⌉`, the size over the continuum fibre of `1^∞`.
    pub exact: u64,
}

/// Brute-force largest ε-scrambled subset of a grid in `K_α`.
///
/// Two points of one fibre stay in one fibre, and the distance of their
/// images is `Δy · 3^(ℓ_α - ℓ_(α+n))`, whose limsup is `Δy · 3^(ℓ_α - 1)`.
/// On a line, the greedy choice from the bottom is optimal.
pub fn eps_scrambled_max(alpha: &Address, epsilon: &Q, grid: u32) -> Result<ScrambledCount> {
    if *epsilon <= Q::zero() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if grid < 10 {
        return Err(Error::InvalidArgument("grid resolution must be at least 10".into()));
    }
    let len = alpha.fiber_length();
    let scale = three_pow_neg(1 - alpha.ell() as i64);
    let mut chosen: Vec<Q> = Vec::new();
    for i in 0..=grid {
        let y = &len * Q::new(i.into(), grid.into());
        if chosen.iter().all(|c| (&y - c) * &scale > *epsilon) {
            chosen.push(y);
        }
    }
    let inv = Q::one() / (epsilon * rational::qi(3));
    let bound = inv.floor().to_integer().try_into().unwrap_or(u64::MAX).saturating_add(1);
    let exact = inv.ceil().to_integer().try_into().unwrap_or(u64::MAX).max(1);
    Ok(ScrambledCount { max_size: chosen.len(), bound, exact })
}

/// Is `y` in the middle-thirds Cantor set? Exact for every rational.
pub fn in_cantor_set(y: &Q) -> bool {
    if *y < Q::zero() || *y > Q::one() {
        return false;
    }
    let third = q(1, 3);
    let two_thirds = q(2, 3);
    let mut seen = BTreeSet::new();
    let mut t = y.clone();
    loop {
        if t.is_zero() || t.is_one() || t == third || t == two_thirds {
            return true;
        }
        if t > third && t < two_thirds {
            return false;
        }
        if !seen.insert(t.clone()) {
            return true;
        }
        let three = rational::qi(3);
        t = if t < third { t * three } else { t * three - rational::qi(2) };
    }
}

/// Is `p` in `Y = X ∩ (C_1 × C_2)`? Every represented address lies over `C_1`.
pub fn in_cantor_restriction(p: &FiberPoint) -> bool {
    p.y >= Q::zero() && p.y <= p.alpha.fiber_length() && in_cantor_set(&p.y)
}

/// Axis-parallel rectangle `[a, b] × [c, d]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RectPattern {
    #[serde(with = "serde_q")]
    pub a: Q,
    #[serde(with = "serde_q")]
    pub b: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(with = "serde_q")]
    pub d: Q,
}

impl RectPattern {
    pub fn unit() -> Self {
        RectPattern { a: Q::zero(), b: Q::one(), c: Q::zero(), d: Q::one() }
    }

    /// Child `K_i`: horizontal fifth `2i..2i+1`, height ratio 1 for `i = 1` and 1/3 otherwise.
    pub fn child(&self, i: u8) -> Result<Self> {
        if i > 2 {
            return Err(Error::InvalidArgument(format!("child index {i} is not ternary")));
        }
        let w = &self.b - &self.a;
        let theta = if i == 1 { Q::one() } else { q(1, 3) };
        let i = i as i64;
        Ok(RectPattern {
            a: &self.a + &w * q(2 * i, 5),
            b: &self.a + &w * q(2 * i + 1, 5),
            c: self.c.clone(),
            d: &self.c + theta * (&self.d - &self.c),
        })
    }
}

/// The rectangles `K_w` of `X_depth`, keyed by their words in lexicographic order.
pub fn pattern(depth: u32) -> Vec<(String, RectPattern)> {
    let mut level = vec![(String::new(), RectPattern::unit())];
    for _ in 0..depth {
        level = level
            .into_iter()
            .flat_map(|(w, r)| (0..3u8).map(move |i| (format!("{w}{i}"), r.child(i).expect("ternary child"))))
            .collect();
    }
    level
}

/// CSV of `X_depth` with columns `word,a,b,c,d`.
pub fn pattern_csv(depth: u32) -> String {
    let mut out = String::from("word,a,b,c,d\n");
    for (w, r) in pattern(depth) {
        out.push_str(&format!(
            "{w},{},{},{},{}\n",
            rational::fmt(&r.a),
            rational::fmt(&r.b),
            rational::fmt(&r.c),
            rational::fmt(&r.d)
        ));
    }
    out
}

/// Finite shadow of the Gehman dendrite map extending `H` restricted to `Y`.
///
/// Leaves carry the level-`depth` cylinders of the Cantor set along a fibre,
/// labelled by words over `{0, 2}`. Since `H` is an increasing linear map from
/// fibre to fibre, it keeps the relative position in the fibre, so the
/// induced leaf action is the identity permutation. Internal vertices move one
/// level up; the root is the fixed point.
#[derive(Clone, Debug)]
pub struct GehmanExtension {
    pub tree: Dendrite,
    pub map: TreeMap,
    pub root: usize,
    /// Leaf vertex and its cylinder word.
    pub leaves: Vec<(usize, String)>,
    /// Leaf permutation induced on cylinder labels.
    pub leaf_action: Vec<usize>,
}

impl GehmanExtension {
    /// Steps until a vertex reaches the root, if it does.
    pub fn steps_to_root(&self, v: usize) -> Option<usize> {
        let mut p = PointRef::Vertex(v);
        for n in 0..=self.tree.vertex_count() {
            if p == PointRef::Vertex(self.root) {
                return Some(n);
            }
            p = self.map.apply(&p).ok()?;
        }
        None
    }

    /// Relative position interval `[lo, hi]` of the cylinder at a leaf.
    pub fn cylinder_interval(word: &str) -> (Q, Q) {
        let mut lo = Q::zero();
        let mut w = Q::one();
        for c in word.chars() {
            w /= rational::qi(3);
            if c == '2' {
                lo += &w * rational::qi(2);
            }
        }
        let hi = &lo + &w;
        (lo, hi)
    }
}

pub fn gehman_extend(depth: u32) -> Result<GehmanExtension> {
    if depth < 2 {
        return Err(Error::InvalidArgument("depth must be at least 2".into()));
    }
    let tree = gallery::gehman(depth)?;
    let n = tree.vertex_count();
    let first_leaf = (1usize << depth) - 1;
    let parent = |v: usize| (v - 1) / 2;
    let mut images = Vec::with_capacity(n);
    for v in 0..n {
        images.push(if v == 0 || v >= first_leaf { PointRef::Vertex(v) } else { PointRef::Vertex(parent(v)) });
    }
    let map = TreeMap::from_vertex_images(tree.clone(), tree.clone(), images)?;
    let leaves: Vec<(usize, String)> = (first_leaf..n)
        .map(|v| {
            let i = v - first_leaf;
            let word = (0..depth).rev().map(|b| if (i >> b) & 1 == 1 { '2' } else { '0' }).collect();
            (v, word)
        })
        .collect();
    let leaf_action = (0..leaves.len()).collect();
    Ok(GehmanExtension { tree, map, root: 0, leaves, leaf_action })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;
    use proptest::prelude::*;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn carries() {
        assert_eq!(Address::ones().add(1), a("21^inf"));
        assert_eq!(a("21^inf").add(1), a("021^inf"));
        assert_eq!(a("0211^inf"), a("021^inf"));
        assert_eq!(a("021^inf").to_string(), "021^inf");
        assert_eq!(Address::ones().to_string(), "1^inf");
        assert_eq!(Address::ones().add(-1), a("01^inf"));
        assert!("2x1^inf".parse::<Address>().is_err());
        assert!("22".parse::<Address>().is_err());
    }

    #[test]
    fn ell_and_x() {
        assert_eq!(Address::ones().ell(), 0);
        assert_eq!(a("21^inf").ell(), 1);
        assert_eq!(a("021^inf").ell(), 2);
        assert_eq!(Address::ones().embed_x(), q(1, 2));
        assert_eq!(a("21^inf").embed_x(), q(9, 10));
    }

    #[test]
    fn steps() {
        let p = FiberPoint::new(Address::ones(), qi(1)).unwrap();
        let p1 = step(&p);
        assert_eq!((p1.alpha.clone(), p1.y.clone()), (a("21^inf"), q(1, 3)));
        let p2 = step(&p1);
        assert_eq!((p2.alpha.clone(), p2.y.clone()), (a("021^inf"), q(1, 9)));
        assert_eq!(step_inverse(&p2), p1);
        assert!(FiberPoint::new(a("21^inf"), q(1, 2)).is_err());
    }

    #[test]
    fn diam_trajectory() {
        let t = fiber_diam_traj(&Address::ones(), 3);
        assert_eq!(t, vec![qi(1), q(1, 3), q(1, 9), q(1, 3)]);
    }

    #[test]
    fn scrambled_counts() {
        let one = Address::ones();
        let c = eps_scrambled_max(&one, &q(1, 10), 1000).unwrap();
        assert_eq!((c.max_size, c.bound, c.exact), (4, 4, 4));
        assert_eq!(eps_scrambled_max(&one, &q(1, 4), 1000).unwrap().max_size, 2);
        let c = eps_scrambled_max(&one, &q(1, 3), 1000).unwrap();
        assert_eq!((c.max_size, c.bound, c.exact), (1, 2, 1));
    }

    #[test]
    fn cantor_membership() {
        let p = FiberPoint::new(Address::ones(), q(2, 3)).unwrap();
        assert!(in_cantor_restriction(&p));
        let s = step(&p);
        assert_eq!(s.y, q(2, 9));
        assert!(in_cantor_restriction(&s));
        assert!(!in_cantor_restriction(&FiberPoint::new(Address::ones(), q(1, 2)).unwrap()));
        assert!(in_cantor_set(&q(1, 4)));
        assert!(!in_cantor_set(&q(5, 9)));
        assert!(in_cantor_restriction(&FiberPoint::new(a("0202021^inf"), Q::zero()).unwrap()));
    }

    #[test]
    fn rectangles() {
        assert_eq!(pattern(0), vec![(String::new(), RectPattern::unit())]);
        let p1 = pattern(1);
        assert_eq!(p1.len(), 3);
        assert_eq!(p1[1].1, RectPattern { a: q(2, 5), b: q(3, 5), c: qi(0), d: qi(1) });
        assert_eq!(p1[0].1, RectPattern { a: qi(0), b: q(1, 5), c: qi(0), d: q(1, 3) });
        assert_eq!(pattern(2).len(), 9);
        assert!(pattern_csv(1).starts_with("word,a,b,c,d\n0,0,1/5,0,1/3\n"));
    }

    #[test]
    fn gehman_shadow() {
        let g = gehman_extend(2).unwrap();
        assert_eq!(g.tree.vertex_count(), 7);
        assert_eq!(g.leaves.len(), 4);
        assert!(g.tree.branch_points().iter().all(|&v| g.tree.degree(v) == 3));
        for v in 0..3 {
            assert!(g.steps_to_root(v).unwrap() <= 2);
        }
        let mut seen = g.leaf_action.clone();
        seen.sort();
        assert_eq!(seen, (0..4).collect::<Vec<_>>());
        assert_eq!(GehmanExtension::cylinder_interval("20"), (q(2, 3), q(7, 9)));
        assert!(gehman_extend(1).is_err());
    }

    fn address() -> impl Strategy<Value = Address> {
        prop::collection::vec(0u8..3, 0..12).prop_map(|d| Address::from_prefix(&d).unwrap())
    }

    proptest! {
        #[test]
        fn group_action(al in address(), m in -500i64..500, n in -500i64..500) {
            prop_assert_eq!(al.add(m).add(n), al.add(m + n));
            prop_assert_eq!(al.add(m).add(-m), al.clone());
        }

        #[test]
        fn step_roundtrip(al in address(), num in 0u32..=1000) {
            let y = al.fiber_length() * Q::new(num.into(), 1000.into());
            let p = FiberPoint::new(al, y).unwrap();
            prop_assert_eq!(step_inverse(&step(&p)), p.clone());
            prop_assert_eq!(step(&step_inverse(&p)), p.clone());
            let s = step(&p);
            prop_assert!(s.y <= s.alpha.fiber_length());
        }

        #[test]
        fn cantor_invariance(al in address(), digits in prop::collection::vec(prop::bool::ANY, 1..10)) {
            let mut y = Q::zero();
            let mut w = al.fiber_length();
            for d in digits {
                w /= qi(3);
                if d { y += &w * qi(2); }
            }
            let p = FiberPoint::new(al, y).unwrap();
            prop_assert!(in_cantor_restriction(&p));
            prop_assert!(in_cantor_restriction(&step(&p)));
            prop_assert!(in_cantor_restriction(&step_inverse(&p)));
        }

        #[test]
        fn embedding_separates(x in address(), y in address()) {
            prop_assume!(x != y);
            prop_assert_ne!(x.embed_x(), y.embed_x());
        }
    }
}
