//! Finite-horizon proxies for (Prox), (Sens₀) and (Sens) over families of sets,
//! and Li-Yorke pair sampling.
//!
//! All answers are one-sided. A prox record of 0 certifies that two images
//! met at some step, which is evidence for `liminf = 0`; a positive record
//! says nothing. Sens records are lower bounds for the limsup of diameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metric_tree::{Dendrite, PointRef, Region};
use crate::rational::{self, q, serde_q, Q};
use crate::tree_map::TreeMap;

/// Which sets to test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetFamily {
    /// Balls around vertices and edge midpoints with radii `diam / 2^j`, `j = 1..=levels`.
    Balls {
        levels: u32,
    },
    /// The closed edges.
    FreeArcs,
    /// Random subtrees spanned by two or three grid points.
    Subdendrites {
        count: usize,
        seed: u64,
    },
    Explicit {
        sets: Vec<Region>,
    },
}

const SUBTREE_GRID: u32 = 64;

impl SetFamily {
    /// The nondegenerate members, without repeats.
    pub fn generate(&self, d: &Dendrite) -> Vec<Region> {
        let mut out: Vec<Region> = Vec::new();
        match self {
            SetFamily::Balls { levels } => {
                let diam = d.whole().diam(d);
                let centers: Vec<PointRef> = (0..d.vertex_count())
                    .map(PointRef::Vertex)
                    .chain((0..d.edge_count()).map(|e| d.edge_midpoint(e)))
                    .collect();
                let mut r = diam;
                for _ in 0..*levels {
                    r /= rational::qi(2);
                    for c in &centers {
                        push_new(&mut out, d.ball(c, &r).expect("center is a point of d"));
                    }
                }
            }
            SetFamily::FreeArcs => {
                for e in 0..d.edge_count() {
                    let ed = d.edge(e);
                    push_new(
                        &mut out,
                        d.geodesic(&PointRef::Vertex(ed.u), &PointRef::Vertex(ed.v)).expect("edge ends"),
                    );
                }
            }
            SetFamily::Subdendrites { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut tries = 0;
                while out.len() < *count && tries < count * 20 {
                    tries += 1;
                    let k = 2 + tries % 2;
                    push_new(&mut out, d.random_subtree(&mut rng, k, SUBTREE_GRID));
                }
            }
            SetFamily::Explicit { sets } => {
                for s in sets {
                    push_new(&mut out, s.clone());
                }
            }
        }
        out
    }
}

fn push_new(out: &mut Vec<Region>, r: Region) {
    if !r.h1().is_zero() && !out.contains(&r) {
        out.push(r);
    }
}

/// `min_{0 ≤ n ≤ N} d(f^n S1, f^n S2)`, with the first step where it is attained.
pub fn prox_record(f: &TreeMap, s1: &Region, s2: &Region, horizon: usize) -> (Q, usize) {
    let d = f.domain();
    let (mut a, mut b) = (s1.clone(), s2.clone());
    let mut best = a.distance(d, &b);
    let mut at = 0;
    for n in 1..=horizon {
        if best.is_zero() {
            break;
        }
        a = f.image(&a);
        b = f.image(&b);
        let dist = a.distance(d, &b);
        if dist < best {
            best = dist;
            at = n;
        }
    }
    (best, at)
}

/// `max_{N0 ≤ n ≤ N} diam f^n S`, with the first step where it is attained.
pub fn sens_record(f: &TreeMap, s: &Region, n0: usize, horizon: usize) -> Result<(Q, usize)> {
    if n0 > horizon {
        return Err(Error::InvalidArgument("N0 must not exceed N".into()));
    }
    let d = f.domain();
    let orbit = f.orbit_of(s, horizon);
    let mut best = orbit[n0].diam(d);
    let mut at = n0;
    for (n, r) in orbit.iter().enumerate().skip(n0 + 1) {
        let diam = r.diam(d);
        if diam > best {
            best = diam;
            at = n;
        }
    }
    Ok((best, at))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProxEntry {
    pub i: usize,
    pub j: usize,
    #[serde(with = "serde_q")]
    pub record: Q,
    pub at: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SensEntry {
    pub i: usize,
    #[serde(with = "serde_q")]
    pub measure: Q,
    #[serde(with = "serde_q")]
    pub record: Q,
    pub at: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaosParams {
    pub n0: usize,
    pub horizon: usize,
    /// Prox records at or below this count as meeting.
    #[serde(with = "serde_q")]
    pub tolerance: Q,
}

impl Default for ChaosParams {
    fn default() -> Self {
        ChaosParams { n0: 0, horizon: 200, tolerance: Q::zero() }
    }
}

pub const EPSILON_NOTE: &str =
    "generic epsilon-chaos is supported only for epsilon < eta_estimate / 2; records are finite-horizon proxies";
pub const FAMILY_NOTE: &str =
    "a truncated family can miss sensitivity witnesses that the family of all open balls would contain";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChaosReport {
    pub family: SetFamily,
    pub params: ChaosParams,
    pub members: usize,
    pub prox: Vec<ProxEntry>,
    pub sens: Vec<SensEntry>,
    pub prox_pass: bool,
    pub sens0_pass: bool,
    #[serde(with = "serde_q")]
    pub eta_estimate: Q,
    /// Both proxies hold on the family.
    pub chaos_evidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ly_sample: Option<LySample>,
    pub notes: Vec<String>,
}

impl ChaosReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates every family pair for (Prox) and every member for (Sens).
pub fn verdict(f: &TreeMap, family: &SetFamily, params: &ChaosParams) -> Result<ChaosReport> {
    if params.n0 > params.horizon {
        return Err(Error::InvalidArgument("N0 must not exceed N".into()));
    }
    let d = f.domain();
    let members = family.generate(d);
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let orbits: Vec<Vec<Region>> = members.iter().map(|m| f.orbit_of(m, params.horizon)).collect();
    let mut sens = Vec::with_capacity(members.len());
    for (i, o) in orbits.iter().enumerate() {
        let (mut record, mut at) = (o[params.n0].diam(d), params.n0);
        for (n, r) in o.iter().enumerate().skip(params.n0 + 1) {
            let diam = r.diam(d);
            if diam > record {
                record = diam;
                at = n;
            }
        }
        sens.push(SensEntry { i, measure: members[i].h1(), record, at });
    }
    let mut prox = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let mut record = orbits[i][0].distance(d, &orbits[j][0]);
            let mut at = 0;
            for n in 1..=params.horizon {
                if record.is_zero() {
                    break;
                }
                let dist = orbits[i][n].distance(d, &orbits[j][n]);
                if dist < record {
                    record = dist;
                    at = n;
                }
            }
            prox.push(ProxEntry { i, j, record, at });
        }
    }
    let prox_pass = prox.iter().all(|p| p.record <= params.tolerance);
    let sens0_pass = sens.iter().all(|s| s.record > Q::zero());
    let eta_estimate = sens.iter().map(|s| s.record.clone()).min().expect("nonempty family");
    Ok(ChaosReport {
        family: family.clone(),
        params: params.clone(),
        members: members.len(),
        prox,
        sens,
        prox_pass,
        sens0_pass,
        eta_estimate,
        chaos_evidence: prox_pass && sens0_pass,
        ly_sample: None,
        notes: vec![EPSILON_NOTE.into(), FAMILY_NOTE.into()],
    })
}

/// Counts of sampled point pairs showing both a close approach and a wide separation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LySample {
    pub pairs: usize,
    pub horizon: usize,
    #[serde(with = "serde_q")]
    pub delta: Q,
    #[serde(with = "serde_q")]
    pub epsilon: Q,
    pub seed: u64,
    /// Pairs with `min d ≤ δ` and `max d > ε` over `0 ≤ n ≤ N`.
    pub scrambling_evidence: usize,
    pub proximal_only: usize,
    pub separated_only: usize,
    pub note: String,
}

/// Offsets are drawn from a grid with this prime denominator so orbits of
/// doubling-type maps do not collapse onto dyadic fixed points.
pub const LY_GRID: u32 = 1_000_003;

pub fn default_delta() -> Q {
    q(1, 1000)
}

/// Half the diameter of the space.
pub fn default_epsilon(d: &Dendrite) -> Q {
    d.whole().diam(d) / rational::qi(2)
}

/// Samples point pairs and classifies their finite orbit-distance ranges.
pub fn ly_sample(f: &TreeMap, pairs: usize, horizon: usize, delta: &Q, epsilon: &Q, seed: u64) -> Result<LySample> {
    if *delta <= Q::zero() || *epsilon <= Q::zero() {
        return Err(Error::InvalidArgument("delta and epsilon must be positive".into()));
    }
    let d = f.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut both, mut prox_only, mut sep_only) = (0, 0, 0);
    for _ in 0..pairs {
        let mut x = d.random_point(&mut rng, LY_GRID);
        let mut y = d.random_point(&mut rng, LY_GRID);
        let mut lo = d.dist(&x, &y)?;
        let mut hi = lo.clone();
        for _ in 0..horizon {
            x = f.apply(&x)?;
            y = f.apply(&y)?;
            let dist = d.dist(&x, &y)?;
            if dist < lo {
                lo = dist.clone();
            }
            if dist > hi {
                hi = dist;
            }
        }
        match (lo <= *delta, hi > *epsilon) {
            (true, true) => both += 1,
            (true, false) => prox_only += 1,
            (false, true) => sep_only += 1,
            (false, false) => {}
        }
    }
    Ok(LySample {
        pairs,
        horizon,
        delta: delta.clone(),
        epsilon: epsilon.clone(),
        seed,
        scrambling_evidence: both,
        proximal_only: prox_only,
        separated_only: sep_only,
        note: "finite-horizon evidence only; liminf and limsup are not decided".into(),
    })
}

/// Rows `n, diam f^n(S1), d(f^n S1, f^n S2)` as CSV with rationals as `p/q`.
pub fn trajectory_csv(f: &TreeMap, s1: &Region, s2: &Region, horizon: usize) -> String {
    let d = f.domain();
    let o1 = f.orbit_of(s1, horizon);
    let o2 = f.orbit_of(s2, horizon);
    let mut out = String::from("n,diam,distance\n");
    for n in 0..=horizon {
        out.push_str(&format!("{n},{},{}\n", rational::fmt(&o1[n].diam(d)), rational::fmt(&o1[n].distance(d, &o2[n]))));
    }
    out
}
