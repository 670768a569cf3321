//! Single-particle spectrum of the clean Majorana model in each boundary sector.

use toric_ci::lattice::{build_torus, BoundarySector, GaugeConfig};
use toric_ci::majorana::{build_hamiltonian, spectrum, MajoranaModel};

fn main() -> toric_ci::Result<()> {
    let lat = build_torus(16, 16)?;
    let eta = GaugeConfig::uniform(&lat);
    for t in [0.2, 2f64.sqrt() - 1.0, 0.6] {
        print!("t = {t:.4}:");
        for alpha in BoundarySector::ALL {
            let h = build_hamiltonian(&MajoranaModel::new(&lat, t, &eta, alpha))?;
            let gap = spectrum(&h).iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
            print!("  {alpha} {gap:.3e}");
        }
        println!();
    }
    Ok(())
}
