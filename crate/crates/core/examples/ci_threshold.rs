//! Monte Carlo coherent information on two lattice sizes and the crossing between them.

use toric_ci::ci_engine::{coherent_information, find_threshold, renyi2_ci, Quantity, ThresholdOptions};
use toric_ci::lattice::build_torus;

fn main() -> toric_ci::Result<()> {
    let small = build_torus(8, 8)?;
    let large = build_torus(12, 12)?;
    println!("p       I_c(8)            I_c(12)           I2(8)");
    for i in 0..7 {
        let p = 0.08 + 0.01 * f64::from(i);
        let a = coherent_information(&small, p, 500, 3)?;
        let b = coherent_information(&large, p, 500, 3)?;
        println!(
            "{p:.3}  {:+.4} +- {:.4}  {:+.4} +- {:.4}  {:+.4}",
            a.mean,
            a.std_err,
            b.mean,
            b.std_err,
            renyi2_ci(&small, p)?
        );
    }
    let report = find_threshold((&small, &large), Quantity::Ci, &ThresholdOptions::default())?;
    println!(
        "crossing p = {:.4} +- {:.4} ({:?}, {} probes)",
        report.estimate,
        report.std_err,
        report.stop,
        report.probes.len()
    );
    Ok(())
}
