//! Geodesics, balls and complements on the three-armed star.

use dendro::gallery::star3;
use dendro::rational::{fmt, q};
use dendro::PointRef;

fn main() -> dendro::Result<()> {
    let d = star3();
    let (a, b, c) = (PointRef::Vertex(1), PointRef::Vertex(2), PointRef::Vertex(3));
    println!("d(tip1, tip2) = {}", fmt(&d.dist(&a, &b)?));

    // the midpoint of [tip1, tip2] splits the distance exactly
    let mid = d.point_along(&a, &b, &(d.dist(&a, &b)? / q(2, 1)))?;
    println!("midpoint {mid:?}: {} + {}", fmt(&d.dist(&a, &mid)?), fmt(&d.dist(&mid, &b)?));

    let tri = d.span(&[a.clone(), b.clone(), c.clone()])?;
    println!("span of the tips: length {}, diam {}", fmt(&tri.h1()), fmt(&tri.diam(&d)));

    let ball = d.ball(&PointRef::Vertex(0), &q(1, 4))?;
    println!("ball(center, 1/4): length {}", fmt(&ball.h1()));

    let arm = d.geodesic(&PointRef::Vertex(0), &a)?;
    let comps = d.components_minus(&arm)?;
    println!("star minus arm 1 has {} components", comps.components.len());
    println!("{}", d.to_json());
    Ok(())
}
