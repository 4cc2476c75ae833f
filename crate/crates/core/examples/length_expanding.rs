//! Builds the ρ-length-expanding pair for the three-armed star and checks both maps.

use dendro::gallery::star3;
use dendro::length_expanding::{build_pair, check_length_expanding, DenseFamily};
use dendro::rational::{fmt, q};
use dendro::PointRef;

fn main() -> dendro::Result<()> {
    let rho = q(6, 5);
    let t = star3();
    let pair = build_pair(&t, &PointRef::Vertex(0), &rho)?;
    println!("phi laps {}, psi laps {}, attempts {}", pair.phi_laps, pair.psi_laps, pair.attempts);
    let phi = check_length_expanding(&pair.phi, &DenseFamily::AllClosedIntervals, &rho, 500, 7)?;
    let psi = check_length_expanding(&pair.psi, &DenseFamily::PhiImages(pair.phi.clone()), &rho, 500, 7)?;
    println!("phi passes: {}, psi passes: {}", phi.passed(), psi.passed());
    println!("space rescaled by {} to length {}", fmt(&pair.scale), fmt(&pair.space.total_length()));
    Ok(())
}
