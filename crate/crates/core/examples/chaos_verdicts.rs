//! Prox and Sens records for the tent map, the identity and the ω-star counterexample.

use dendro::chaos::{default_delta, ly_sample, verdict, ChaosParams, SetFamily};
use dendro::gallery::omega_star_gch;
use dendro::length_expanding::zigzag;
use dendro::metric_tree::Dendrite;
use dendro::rational::{fmt, q};
use dendro::tree_map::TreeMap;

fn main() -> dendro::Result<()> {
    let params = ChaosParams { horizon: 64, ..Default::default() };
    let tent = zigzag(2)?;
    let id = TreeMap::identity(&Dendrite::unit_interval());
    for (name, f) in [("tent", &tent), ("identity", &id)] {
        let r = verdict(f, &SetFamily::Balls { levels: 4 }, &params)?;
        println!(
            "{name}: {} balls, prox_pass {}, sens0_pass {}, eta {}",
            r.members,
            r.prox_pass,
            r.sens0_pass,
            fmt(&r.eta_estimate)
        );
    }
    let ly = ly_sample(&tent, 100, 200, &default_delta(), &q(1, 2), 1)?;
    println!("tent: {} of {} sampled pairs look scrambled", ly.scrambling_evidence, ly.pairs);

    // eta shrinks with the smallest arm
    for k in [4, 8] {
        let sys = omega_star_gch(k)?;
        let r = verdict(&sys.map, &SetFamily::Balls { levels: k as u32 + 1 }, &ChaosParams::default())?;
        println!("omega_star_gch({k}): prox_pass {}, eta {}", r.prox_pass, fmt(&r.eta_estimate));
    }
    Ok(())
}
