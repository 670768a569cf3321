//! Exact coherent information of small stabilizer codes under bit-flip noise.

use toric_ci::stabilizer_oracle::{
    color_code, exact_ci, find_crossing, kl_check, renyi_ci, rotated_surface, single_qubit, toric_code,
    weight_one_errors, ChannelKind, PauliChannel,
};

fn main() -> toric_ci::Result<()> {
    let codes = [single_qubit(), rotated_surface(3)?, color_code(5)?, toric_code(2, 2)?];
    for code in &codes {
        let kl = kl_check(code, &weight_one_errors(code.n_phys()));
        println!(
            "{} [[{}, {}]] css {} corrects single-qubit errors: {}",
            code.name(),
            code.n_phys(),
            code.k_logical(),
            code.is_css(),
            kl.correctable
        );
        for p in [0.05, 0.1, 0.2] {
            let ch = PauliChannel::new(ChannelKind::Bitflip, p)?;
            println!(
                "  p = {p:.2}  I_c {:+.6}  I_2 {:+.6}",
                exact_ci(code, &ch)?,
                renyi_ci(code, &ch, 2)?
            );
        }
    }
    let surface = find_crossing(&codes[0], &codes[1], ChannelKind::Depolarizing, 0.05, 0.4, 1e-9)?;
    let color = find_crossing(&color_code(1)?, &codes[2], ChannelKind::Bitflip, 0.02, 0.4, 1e-9)?;
    println!("surface d=1/3 depolarizing crossing {surface:.5}");
    println!("color d=1/5 bitflip crossing {color:.5}");
    Ok(())
}
