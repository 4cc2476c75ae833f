#![allow(clippy::type_complexity)]

//! The ten acceptance criteria, one pass/fail line each.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dendro::chaos::{verdict, ChaosParams, SetFamily};
use dendro::exact_builder::{build_exact, default_q, default_rho};
use dendro::gallery::{comb, omega_star_gch, star3};
use dendro::length_expanding::{build_pair, check_length_expanding, zigzag, DenseFamily, LECheck};
use dendro::metric_tree::{Dendrite, PointRef, Region};
use dendro::odometer::{eps_scrambled_max, fiber_diam_traj, Address};
use dendro::rational::{self, q, qi, Q};
use dendro::tree_map::TreeMap;

use common::{image_by_span, random_selfmap, random_tree};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn three_pow(k: u32) -> Q {
    Q::from_integer(num_bigint::BigInt::from(3u32).pow(k))
}

/// `ℓ(1^∞ + n)` for `n = 0..=steps` by schoolbook addition on a digit array.
fn ell_by_digit_scan(steps: usize) -> Vec<u32> {
    let mut digits = [1u8; 24];
    let mut out = vec![0];
    for _ in 0..steps {
        let mut i = 0;
        loop {
            digits[i] += 1;
            if digits[i] < 3 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        out.push(digits.iter().filter(|&&d| d != 1).count() as u32);
    }
    out
}

fn c1_odometer_limsup() -> Check {
    let steps = 3usize.pow(7);
    let lib = fiber_diam_traj(&Address::ones(), steps);
    let oracle: Vec<Q> =
        ell_by_digit_scan(steps).into_iter().map(|l| Q::from_integer(1.into()) / three_pow(l)).collect();
    ensure(lib == oracle, "trajectory differs from the digit-scan oracle")?;
    let max = lib[1..].iter().max().unwrap().clone();
    ensure(max == q(1, 3), format!("max is {}", rational::fmt(&max)))?;
    let at: BTreeSet<usize> = (1..=steps).filter(|&n| lib[n] == max).collect();
    let powers: BTreeSet<usize> = (0..=7).map(|j| 3usize.pow(j)).collect();
    ensure(at == powers, format!("attained at {at:?}"))?;
    Ok(format!("max 1/3 attained exactly at n = 3^j, j = 0..7 (n <= {steps})"))
}

/// Smallest fibre diameter over `1 <= n <= 3^7`, pinned from the digit-scan oracle.
const PINNED_MIN_EXPONENT: u32 = 8;

fn c2_odometer_prox() -> Check {
    let steps = 3usize.pow(7);
    let lib = fiber_diam_traj(&Address::ones(), steps);
    let min = lib[1..].iter().min().unwrap().clone();
    let oracle_max_ell = ell_by_digit_scan(steps)[1..].iter().copied().max().unwrap();
    let oracle = Q::from_integer(1.into()) / three_pow(oracle_max_ell);
    ensure(min == oracle, format!("min {} but oracle {}", rational::fmt(&min), rational::fmt(&oracle)))?;
    ensure(oracle_max_ell == PINNED_MIN_EXPONENT, format!("oracle moved to 3^-{oracle_max_ell}"))?;
    ensure(min <= Q::from_integer(1.into()) / three_pow(6), "min above 3^-6")?;
    Ok(format!("min = {} <= 3^-6", rational::fmt(&min)))
}

fn c3_scrambled_cardinality() -> Check {
    let alpha = Address::ones();
    let mut parts = Vec::new();
    for (eps, want) in [(q(1, 10), 4), (q(1, 4), 2), (q(1, 3), 1)] {
        let s = eps_scrambled_max(&alpha, &eps, 1000).map_err(|e| e.to_string())?;
        ensure(s.max_size == want, format!("eps {}: got {}", rational::fmt(&eps), s.max_size))?;
        ensure(s.max_size as u64 <= s.bound, "bound violated")?;
        ensure(s.max_size as u64 == s.exact, "grid disagrees with the continuum count")?;
        parts.push(format!("eps {} -> {} (bound {})", rational::fmt(&eps), s.max_size, s.bound));
    }
    Ok(parts.join(", "))
}

fn c4_cross_fiber_distality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = Q::from_integer(1.into());
    for _ in 0..500 {
        let v = rng.gen_range(0..=5usize);
        let a: Vec<u8> = (0..8).map(|_| rng.gen_range(0..3)).collect();
        let mut b: Vec<u8> = (0..8).map(|_| rng.gen_range(0..3)).collect();
        b[..v].copy_from_slice(&a[..v]);
        b[v] = (a[v] + rng.gen_range(1..3)) % 3;
        let (mut x, mut y) = (Address::from_prefix(&a).unwrap(), Address::from_prefix(&b).unwrap());
        ensure(x.valuation(&y) == Some(v as u64), "valuation mismatch")?;
        let floor = Q::new(1.into(), num_bigint::BigInt::from(5u32).pow(v as u32 + 1));
        for _ in 0..=1000 {
            let gap = num_traits::Signed::abs(&(x.embed_x() - y.embed_x()));
            ensure(gap >= floor, format!("gap {} below 5^-{}", rational::fmt(&gap), v + 1))?;
            let ratio = gap / &floor;
            if ratio < worst {
                worst = ratio;
            }
            x = x.add(1);
            y = y.add(1);
        }
    }
    Ok(format!("500 pairs x 1001 steps, smallest gap / 5^-(v+1) = {}", rational::fmt(&worst)))
}

fn c5_exact_builder() -> Check {
    let d = comb(8).map_err(|e| e.to_string())?;
    let base = d.geodesic(d.marked("base_left").unwrap(), d.marked("base_right").unwrap()).unwrap();
    let ex = build_exact(&d, &base, &default_q(), &default_rho()).map_err(|e| e.to_string())?;
    let cert = ex.verify(64, 4).map_err(|e| e.to_string())?;
    ensure(cert.all_covered, "some bush edge never covers D")?;
    ensure(cert.within_bound, "a cover time exceeds its bound")?;
    ensure(cert.chain_ok, "target chains do not descend to the first bush")?;
    let space = ex.space();
    let a = ex.fixed_region();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sampled = 0;
    while sampled < 100 {
        let p = space.random_point(&mut rng, 997);
        if a.contains(space, &p) {
            ensure(ex.map.apply(&p).unwrap() == p, format!("f moves {p:?} on A"))?;
            sampled += 1;
        }
    }
    let worst = cert.entries.iter().filter_map(|c| c.n).max().unwrap_or(0);
    Ok(format!("{} bush-edge pieces cover D, slowest n = {worst}; f = id on 100 points of A", cert.entries.len()))
}

fn c6_counterexample() -> Check {
    let mut etas = Vec::new();
    for k in [4usize, 8, 12] {
        let sys = omega_star_gch(k).map_err(|e| e.to_string())?;
        let d = sys.map.domain();
        let family = SetFamily::Balls { levels: k as u32 + 1 };
        let params = ChaosParams { horizon: 200, ..Default::default() };
        let r = verdict(&sys.map, &family, &params).map_err(|e| e.to_string())?;
        ensure(r.prox_pass, format!("k = {k}: some ball pair never met"))?;
        let members = family.generate(d);
        let center = sys.a.clone();
        let mut inside = 0;
        for i in 1..=k {
            let arm = d.geodesic(&center, &PointRef::Vertex(i)).unwrap();
            let len = arm.h1();
            ensure(len == rational::pow(2, -(i as i64)), format!("arm {i} has length {}", rational::fmt(&len)))?;
            for s in &r.sens {
                if members[s.i].is_subset(d, &arm) {
                    inside += 1;
                    ensure(s.record <= len, format!("ball in arm {i} grew past the arm"))?;
                }
            }
        }
        let smallest = rational::pow(2, -(k as i64));
        ensure(r.eta_estimate == smallest, format!("k = {k}: eta {}", rational::fmt(&r.eta_estimate)))?;
        ensure(inside >= k, format!("k = {k}: only {inside} balls lie inside an arm"))?;
        etas.push(rational::fmt(&r.eta_estimate));
    }
    Ok(format!("prox 0 for all ball pairs; eta at k = 4, 8, 12: {}", etas.join(" > ")))
}

fn c7_tent() -> Check {
    let tent = zigzag(2).map_err(|e| e.to_string())?;
    let params = ChaosParams { horizon: 64, ..Default::default() };
    let r = verdict(&tent, &SetFamily::Balls { levels: 6 }, &params).map_err(|e| e.to_string())?;
    ensure(r.prox_pass, "prox failed")?;
    ensure(r.eta_estimate == qi(1), format!("eta {}", rational::fmt(&r.eta_estimate)))?;
    Ok(format!("{} balls, prox_pass, eta_estimate = 1", r.members))
}

fn c8_metric_tree() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let d = {
            let n = rng.gen_range(1..=8);
            random_tree(&mut rng, n)
        };
        let (x, y) = (d.random_point(&mut rng, 16), d.random_point(&mut rng, 16));
        let dxy = d.dist(&x, &y).unwrap();
        let s = &dxy * q(rng.gen_range(0..=16), 16);
        let z = d.point_along(&x, &y, &s).unwrap();
        ensure(d.dist(&x, &z).unwrap() + d.dist(&z, &y).unwrap() == dxy, "convexity identity failed")?;
        ensure(d.geodesic(&x, &y).unwrap().contains(&d, &z), "midpoint off the geodesic")?;
        let w = d.random_point(&mut rng, 16);
        let on = d.geodesic(&x, &y).unwrap().contains(&d, &w);
        let sum = d.dist(&x, &w).unwrap() + d.dist(&w, &y).unwrap();
        ensure(on == (sum == dxy), "geodesic membership disagrees with the distance sum")?;
    }
    let mut triples = 0;
    let mut tries = 0;
    while triples < 200 {
        tries += 1;
        let d = {
            let n = rng.gen_range(2..=8);
            random_tree(&mut rng, n)
        };
        let s: Vec<Region> = (0..3)
            .map(|_| {
                let k = rng.gen_range(2..=3);
                d.random_subtree(&mut rng, k, 8)
            })
            .collect();
        let pairwise = s[0].intersects(&d, &s[1]) && s[1].intersects(&d, &s[2]) && s[0].intersects(&d, &s[2]);
        if !pairwise {
            continue;
        }
        triples += 1;
        let all = s[0].intersect(&d, &s[1]).intersect(&d, &s[2]);
        let p = all.any_point().ok_or("pairwise-intersecting triple with empty intersection")?;
        ensure(s.iter().all(|r| r.contains(&d, &p)), "common point not in every subtree")?;
    }
    Ok(format!("1000 convexity triples exact; 200 Helly triples ({tries} draws)"))
}

/// `(n0, k, r, L_j)` by enumerating orbit sets built with [`image_by_span`].
fn brute_decomposition(f: &TreeMap, e: &Region, horizon: usize) -> Option<(usize, usize, usize, Vec<Region>)> {
    let d = f.domain();
    let mut u = vec![e.clone()];
    for n in 0..horizon {
        u.push(image_by_span(f, &u[n]));
    }
    let mut first = None;
    'outer: for n0 in 0..horizon {
        for m in n0 + 1..=horizon {
            if !u[n0].intersect(d, &u[m]).is_empty() {
                first = Some((n0, m - n0));
                break 'outer;
            }
        }
    }
    let (n0, k) = first?;
    let mut all = Region::empty();
    for s in &u[n0..] {
        all = all.union(d, s);
    }
    let comps = all.components(d);
    let r = comps.len();
    let l: Vec<Region> = (0..r.min(k))
        .map(|j| {
            let p = u[n0 + j].any_point().unwrap();
            comps.iter().find(|c| c.contains(d, &p)).unwrap().clone()
        })
        .collect();
    Some((n0, k, r, l))
}

fn c9_orbit_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let horizon = 24;
    let mut found = 0;
    for case in 0..20 {
        let d = {
            let n = rng.gen_range(1..=6);
            random_tree(&mut rng, n)
        };
        let f = random_selfmap(&mut rng, &d, 4);
        let e = d.random_arc(&mut rng, 8);
        let lib = f.orbit_decomposition(&e, horizon).map_err(|e| e.to_string())?.found();
        let brute = brute_decomposition(&f, &e, horizon);
        match (lib, brute) {
            (None, None) => {}
            (Some(o), Some((n0, k, r, l))) => {
                ensure(
                    (o.n0, o.k, o.r) == (n0, k, r),
                    format!("case {case}: ({}, {}, {}) vs ({n0}, {k}, {r})", o.n0, o.k, o.r),
                )?;
                ensure(o.l_sets == l, format!("case {case}: L_j differ"))?;
                found += 1;
            }
            _ => return Err(format!("case {case}: one side inconclusive")),
        }
    }
    Ok(format!("20 random maps agree ({found} decomposed within {horizon} steps)"))
}

fn c10_length_expanding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let rho = q(6, 5);
    let mut witnesses = 0;
    for seed in 0..20 {
        let d = {
            let n = rng.gen_range(1..=4);
            random_tree(&mut rng, n)
        };
        let f = random_selfmap(&mut rng, &d, 4);
        if let LECheck::Witness(w) =
            check_length_expanding(&f, &DenseFamily::AllClosedIntervals, &rho, 100, seed).unwrap()
        {
            ensure(w.reverify(&f), "witness does not re-verify")?;
            ensure(!w.set.is_empty() && w.image_measure < &w.measure * &rho, "witness is not a violation")?;
            witnesses += 1;
        }
    }
    let id = TreeMap::identity(&Dendrite::unit_interval());
    match check_length_expanding(&id, &DenseFamily::AllClosedIntervals, &rho, 50, 1).unwrap() {
        LECheck::Witness(w) => ensure(w.reverify(&id), "identity witness does not re-verify")?,
        LECheck::Pass { .. } => return Err("identity passed".into()),
    }
    for (name, t, a) in
        [("star3", star3(), PointRef::Vertex(0)), ("arc", Dendrite::unit_interval(), PointRef::Vertex(0))]
    {
        let pair = build_pair(&t, &a, &rho).map_err(|e| format!("{name}: {e}"))?;
        let phi = check_length_expanding(&pair.phi, &DenseFamily::AllClosedIntervals, &rho, 500, 11).unwrap();
        let psi = check_length_expanding(&pair.psi, &DenseFamily::PhiImages(pair.phi.clone()), &rho, 500, 12).unwrap();
        ensure(phi.passed(), format!("{name}: phi fails"))?;
        ensure(psi.passed(), format!("{name}: psi fails"))?;
    }
    Ok(format!("{witnesses} random-map witnesses re-verify; star3 and arc pairs pass on 500 members"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Duration); 10] = [
        ("odometer limsup", c1_odometer_limsup, Duration::from_secs(1)),
        ("odometer proximality", c2_odometer_prox, Duration::from_secs(1)),
        ("scrambled cardinality", c3_scrambled_cardinality, Duration::from_secs(10)),
        ("cross-fiber distality", c4_cross_fiber_distality, Duration::from_secs(30)),
        ("exact-map builder", c5_exact_builder, Duration::from_secs(120)),
        ("gch counterexample", c6_counterexample, Duration::from_secs(120)),
        ("tent generic chaos", c7_tent, Duration::from_secs(10)),
        ("metric-tree exactness", c8_metric_tree, Duration::from_secs(10)),
        ("orbit decomposition oracle", c9_orbit_oracle, Duration::from_secs(60)),
        ("length-expanding soundness", c10_length_expanding, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let over = if took > *limit { format!(" [over the {limit:?} budget]") } else { String::new() };
        match res {
            Ok(msg) => println!("criterion {:2} PASS {name}: {msg} ({took:.2?}){over}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2} FAIL {name}: {msg} ({took:.2?}){over}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
