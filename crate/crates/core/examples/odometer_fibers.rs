//! Fibre diameters, scrambled sets and the pattern of the 3-adic skew product.

use dendro::odometer::{eps_scrambled_max, fiber_diam_traj, pattern, Address};
use dendro::rational::{fmt, q};

fn main() -> dendro::Result<()> {
    let alpha: Address = "1^inf".parse()?;
    let diams = fiber_diam_traj(&alpha, 27);
    for (n, d) in diams.iter().enumerate() {
        println!("n = {n:2}  alpha+n = {:>12}  diam = {}", alpha.add(n as i64).to_string(), fmt(d));
    }
    for eps in [q(1, 10), q(1, 4), q(1, 3)] {
        let s = eps_scrambled_max(&alpha, &eps, 1000)?;
        println!("eps = {}: largest scrambled grid set {}, bound {}", fmt(&eps), s.max_size, s.bound);
    }
    for (word, r) in pattern(1) {
        println!("K_{word}: [{}, {}] x [{}, {}]", fmt(&r.a), fmt(&r.b), fmt(&r.c), fmt(&r.d));
    }
    Ok(())
}
