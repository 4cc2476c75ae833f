use serde::Serialize;

use super::TreeMap;
use crate::error::{Error, Result};
use crate::metric_tree::{PointRef, Region};

/// Where `f(x)` lands relative to a reference point `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Fixed,
    Evades,
    Admires,
    JumpsOver,
}

/// A finite-horizon answer: either found, or nothing within the horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding<T> {
    Found(T),
    Inconclusive { horizon: usize },
}

impl<T> Finding<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Finding::Found(t) => Some(t),
            Finding::Inconclusive { .. } => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Finding::Found(_))
    }
}

/// The eventual cyclic structure of the orbit of a connected set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitDecomposition {
    pub n0: usize,
    pub k: usize,
    pub k_sets: Vec<Region>,
    /// True when `K_0` was shown to be exactly `∪_j f^(n0+jk)(E)`; otherwise the
    /// sets are unions over the horizon only.
    pub stabilized: bool,
    pub r: usize,
    pub l_sets: Vec<Region>,
    pub horizon: usize,
    /// `f(K_i) = K_(i+1)`, `f(K_(k-1)) ⊆ K_0`, the same for the `L_j`, and `L_j = ∪ K_(j+ℓr)`.
    pub laws_hold: bool,
}

impl TreeMap {
    pub fn classify_relation(&self, a: &PointRef, x: &PointRef) -> Result<Relation> {
        let d = self.domain();
        let a = d.canon(a)?;
        let x = d.canon(x)?;
        if a == x {
            return Err(Error::InvalidArgument("the reference point must differ from x".into()));
        }
        let y = self.apply_unchecked(&x);
        if y == x {
            return Ok(Relation::Fixed);
        }
        if d.upper_set(&a, &x)?.contains(d, &y) {
            return Ok(Relation::Evades);
        }
        if d.enclosed(&a, &x)?.contains(d, &y) {
            return Ok(Relation::Admires);
        }
        Ok(Relation::JumpsOver)
    }

    /// Least `n0`, then least `k`, with `f^n0(E) ∩ f^(n0+k)(E) ≠ ∅`, and the sets built from them.
    pub fn orbit_decomposition(&self, e: &Region, horizon: usize) -> Result<Finding<OrbitDecomposition>> {
        let d = self.domain();
        if e.is_empty() || !e.is_connected(d) {
            return Err(Error::InvalidArgument("orbit decomposition needs a nonempty connected set".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        let u = self.orbit_of(e, horizon);
        let Some((n0, k)) = first_return(d, &u, horizon) else {
            return Ok(Finding::Inconclusive { horizon });
        };

        let mut k0 = u[n0].clone();
        let mut stabilized = false;
        let mut n = n0 + k;
        while n <= horizon {
            if u[n].is_subset(d, &k0) {
                stabilized = true;
                break;
            }
            k0 = k0.union(d, &u[n]);
            n += k;
        }
        let mut k_sets = vec![k0];
        for i in 1..k {
            let next = if stabilized {
                self.image(&k_sets[i - 1])
            } else {
                let mut s = Region::empty();
                let mut m = n0 + i;
                while m <= horizon {
                    s.extend_raw(&u[m]);
                    m += k;
                }
                s.normalize(d);
                s
            };
            k_sets.push(next);
        }

        let mut all = Region::empty();
        for s in &k_sets {
            all.extend_raw(s);
        }
        all.normalize(d);
        let comps = all.components(d);
        let r = comps.len();
        let mut l_sets = Vec::with_capacity(r);
        for j in 0..r.min(k) {
            let probe = k_sets[j].any_point().expect("nonempty");
            let c = comps.iter().find(|c| c.contains(d, &probe)).expect("K_j lies in a component");
            l_sets.push(c.clone());
        }

        let mut laws_hold = r >= 1 && k % r == 0 && l_sets.len() == r;
        if laws_hold && stabilized {
            laws_hold = cyclic(self, &k_sets) && cyclic(self, &l_sets);
        }
        if laws_hold {
            for (j, l) in l_sets.iter().enumerate() {
                let mut s = Region::empty();
                for ell in 0..k / r {
                    s.extend_raw(&k_sets[j + ell * r]);
                }
                s.normalize(d);
                if s != *l {
                    laws_hold = false;
                }
            }
        }
        Ok(Finding::Found(OrbitDecomposition { n0, k, k_sets, stabilized, r, l_sets, horizon, laws_hold }))
    }

    /// `min M_f(E)` over `n + l <= horizon`.
    pub fn m_min(&self, e: &Region, horizon: usize) -> Result<Finding<usize>> {
        if e.is_empty() {
            return Err(Error::EmptySet);
        }
        let d = self.domain();
        let u = self.orbit_of(e, horizon);
        for l in 1..=horizon {
            if (0..=horizon - l).any(|n| u[n].intersects(d, &u[n + l])) {
                return Ok(Finding::Found(l));
            }
        }
        Ok(Finding::Inconclusive { horizon })
    }
}

fn first_return(d: &crate::Dendrite, u: &[Region], horizon: usize) -> Option<(usize, usize)> {
    for n0 in 0..horizon {
        for k in 1..=horizon - n0 {
            if u[n0].intersects(d, &u[n0 + k]) {
                return Some((n0, k));
            }
        }
    }
    None
}

fn cyclic(f: &TreeMap, sets: &[Region]) -> bool {
    let d = f.domain();
    let m = sets.len();
    for i in 0..m {
        let img = f.image(&sets[i]);
        let ok = if i + 1 < m { img == sets[i + 1] } else { img.is_subset(d, &sets[0]) };
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{at, flip, tent};
    use super::*;
    use crate::metric_tree::Dendrite;
    use crate::rational::{q, qi};

    #[test]
    fn tent_relations() {
        let t = tent();
        let a = PointRef::Vertex(0);
        assert_eq!(t.classify_relation(&a, &at(q(1, 2))).unwrap(), Relation::Evades);
        assert_eq!(t.classify_relation(&a, &at(q(3, 4))).unwrap(), Relation::Admires);
        assert_eq!(t.classify_relation(&a, &at(q(2, 3))).unwrap(), Relation::Fixed);
        assert!(t.classify_relation(&a, &a).is_err());
    }

    #[test]
    fn flip_jumps_over_the_middle() {
        let f = flip();
        let rel = f.classify_relation(&PointRef::Vertex(1), &PointRef::Edge(1, q(1, 2))).unwrap();
        assert_eq!(rel, Relation::JumpsOver);
    }

    #[test]
    fn tent_decomposition() {
        let t = tent();
        let d = t.domain().clone();
        let e = d.geodesic(&at(qi(0)), &at(q(1, 4))).unwrap();
        let dec = t.orbit_decomposition(&e, 10).unwrap().found().unwrap();
        assert_eq!((dec.n0, dec.k, dec.r), (0, 1, 1));
        assert!(dec.stabilized && dec.laws_hold);
        assert!(dec.l_sets[0].is_whole(&d));
        assert_eq!(t.m_min(&e, 10).unwrap(), Finding::Found(1));
    }

    #[test]
    fn flip_decomposition() {
        let f = flip();
        let d: Dendrite = f.domain().clone();
        let half = |a: Q, b: Q| {
            d.geodesic(&d.canon(&PointRef::Edge(1, a)).unwrap(), &d.canon(&PointRef::Edge(1, b)).unwrap()).unwrap()
        };
        let e = half(q(1, 2), qi(1));
        let dec = f.orbit_decomposition(&e, 10).unwrap().found().unwrap();
        assert_eq!((dec.n0, dec.k, dec.r), (0, 2, 2));
        assert_eq!(dec.l_sets[0], e);
        assert_eq!(dec.l_sets[1], d.geodesic(&PointRef::Vertex(0), &PointRef::Edge(0, q(1, 2))).unwrap());
        assert!(dec.laws_hold);
        assert_eq!(f.m_min(&e, 10).unwrap(), Finding::Found(2));
    }

    #[test]
    fn invariant_set() {
        let t = tent();
        let w = t.domain().whole();
        let dec = t.orbit_decomposition(&w, 3).unwrap().found().unwrap();
        assert_eq!((dec.n0, dec.k, dec.r), (0, 1, 1));
        assert_eq!(t.m_min(&w, 3).unwrap(), Finding::Found(1));
    }

    #[test]
    fn no_return_is_inconclusive() {
        let f = flip();
        let d = f.domain().clone();
        let e = d.geodesic(&PointRef::Edge(1, q(1, 2)), &PointRef::Vertex(2)).unwrap();
        assert_eq!(f.orbit_decomposition(&e, 1).unwrap(), Finding::Inconclusive { horizon: 1 });
    }

    use crate::rational::Q;
}
