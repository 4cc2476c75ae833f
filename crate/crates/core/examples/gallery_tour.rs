//! Named dendrites with their ideal classification, and the assembled counterexamples.

use dendro::gallery::{self, build_counterexample, ArmWord, CantorShift, Counterexample, FAMILIES};

fn main() -> dendro::Result<()> {
    for name in FAMILIES {
        let desc = gallery::descriptor_from_params(name, None, None, None, None)?;
        let d = gallery::generate(&desc)?;
        println!("{name:12} {:3} edges  {:?}", d.edge_count(), desc.ideal);
    }
    for name in gallery::COUNTEREXAMPLES {
        match build_counterexample(name, 4)? {
            Counterexample::Gch(sys) => println!(
                "{name}: {} invariant pieces, all invariant {}, meet in cores {}",
                sys.pieces.len(),
                sys.all_invariant(),
                sys.pairwise_meet_in_cores()
            ),
            Counterexample::CantorShift(cs) => {
                let x = ArmWord::new(2, &[1, 0, 1]);
                println!("{name}: {:?} -> {:?}", x.word, cs.shift(&x).word);
                println!("  [1] meets [0, 1] after 1 shift: {}", CantorShift::cylinders_meet(&[1], &[0, 1], 1));
            }
            Counterexample::Gehman(g) => {
                println!(
                    "{name}: {} leaves, the last internal vertex reaches the root in {:?} steps",
                    g.leaves.len(),
                    g.steps_to_root(g.leaves[0].0 - 1)
                );
            }
        }
    }
    Ok(())
}
