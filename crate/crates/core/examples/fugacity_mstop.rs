//! Vortex fugacity and the MSTOP order parameter across the transition.

use toric_ci::ci_engine::{coherent_information, mstop, vortex_fugacity};
use toric_ci::lattice::build_torus;

fn main() -> toric_ci::Result<()> {
    let lat = build_torus(8, 8)?;
    println!("p      fugacity           -2 MSTOP          I_c");
    for p in [0.02, 0.05, 0.08, 0.11, 0.14, 0.17, 0.2] {
        let u = vortex_fugacity(&lat, p, 400, 11)?;
        let m = mstop(&lat, p, 400, 11)?;
        let ci = coherent_information(&lat, p, 400, 11)?;
        println!(
            "{p:.2}  {:+.4} +- {:.4}  {:+.3} +- {:.3}  {:+.3} +- {:.3}",
            u.mean,
            u.std_err,
            -2.0 * m.mean,
            2.0 * m.std_err,
            ci.mean,
            ci.std_err
        );
    }
    Ok(())
}
