//! Runs the fast self-check suite, then again with a deliberately broken model.

use toric_ci::verify::{run_suite, Level, VerifyOptions};

fn main() {
    for mutate in [false, true] {
        println!("mutate intra-cell couplings: {mutate}");
        let results = run_suite(&VerifyOptions {
            level: Level::Fast,
            mutate_intra_cell: mutate,
        });
        for r in results {
            println!("  {} {:<24} {}", if r.passed { "ok  " } else { "FAIL" }, r.name, r.detail);
        }
    }
}
