//! Exact Ising and random-bond Ising dualities on small tori.

use toric_ci::lattice::{build_torus, BoundarySector, GaugeConfig};
use toric_ci::spin_oracle::{check_ising_duality, check_rbim_duality, dual_coupling, ising_log_partition, IsingParams};

fn main() -> toric_ci::Result<()> {
    let lat = build_torus(3, 3)?;
    let eta = GaugeConfig::uniform(&lat);
    for j in [0.2, 0.4406868, 1.0] {
        let z = ising_log_partition(&IsingParams {
            j,
            lattice: &lat,
            eta: &eta,
            alpha: BoundarySector::PP,
        })?;
        println!(
            "J = {j:.4}  J* = {:.4}  ln Z = {z:.10}  duality residual {:.2e}",
            dual_coupling(j),
            check_ising_duality(&lat, j)?
        );
    }
    let lat = build_torus(2, 2)?;
    for n in [2, 3] {
        for k in [0.3, 0.7] {
            println!("RBIM n = {n} K = {k}: residual {:.2e}", check_rbim_duality(&lat, k, n)?);
        }
    }
    Ok(())
}
