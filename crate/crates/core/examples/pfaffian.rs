//! Signed-log Pfaffian of a random skew matrix, checked against brute force and `det`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_ci::pfaffian::{pfaffian_brute, pfaffian_signed_log, SkewMatrix};

fn main() -> toric_ci::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = SkewMatrix::from_upper(8, |_, _| rng.gen_range(-1.0..1.0));
    let pf = pfaffian_signed_log(&m)?;
    println!("Pf (signed log)  sign {} log|Pf| {:.12}", pf.sign, pf.log_abs);
    println!("Pf (value)       {:.12}", pf.to_f64());
    println!("Pf (brute force) {:.12}", pfaffian_brute(&m)?);
    println!("sqrt(det)        {:.12}", m.to_nalgebra().determinant().sqrt());

    let big = SkewMatrix::from_upper(400, |_, _| rng.gen_range(-1.0..1.0));
    let pf = pfaffian_signed_log(&big)?;
    println!("400x400: sign {} log|Pf| {:.6}", pf.sign, pf.log_abs);
    Ok(())
}
