//! Cross-oracle verification suites behind `toric-ci verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ci_engine::{ci_from_pfaffians, coherent_information, coherent_information_exhaustive, renyi2_ci};
use crate::error::Result;
use crate::lattice::{build_torus, gauge_transform, BoundarySector, GaugeConfig, TorusLattice};
use crate::majorana::{
    build_hamiltonian, sector_pfaffians_with, single_site_pfaffian, spectrum, t1, IntraCell, MajoranaModel,
    SectorSolver,
};
use crate::pfaffian::{pfaffian_brute, pfaffian_signed_log, SkewMatrix};
use crate::spin_oracle::{
    check_ising_duality, check_rbim_duality, exact_full_ci, ising_sector_log_partitions, ising_sector_ratio,
    self_dual_rate, transfer_matrix_partition,
};
use crate::stabilizer_oracle::{exact_ci, renyi_ci, single_qubit, toric_code, ChannelKind, PauliChannel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub level: Level,
    /// Replaces the intra-cell coupling pattern by a wrong one.
    pub mutate_intra_cell: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&VerifyOptions) -> Result<(bool, String)>;

const FAST: &[(&str, Check)] = &[
    ("pfaffian: Pf^2 = det and brute force", pfaffian_small),
    ("spin oracle: enumerator vs transfer matrix", transfer_matrix),
    ("duality: Ising torus", ising_duality),
    ("duality: RBIM n=2", rbim_duality_2),
    ("ratio identity: Majorana vs Ising", ratio_identity),
    ("closed form: single site", single_site),
    ("closed form: single qubit", single_qubit_forms),
    ("three-way 2x2 toric CI", three_way),
    ("renyi-2 self-dual zeros", renyi2_zeros),
];

const FULL: &[(&str, Check)] = &[
    ("pfaffian: Pf^2 = det up to n = 600", pfaffian_large),
    ("duality: RBIM n=3", rbim_duality_3),
    ("ratio identity: 3x3 random configs", ratio_identity_3x3),
    ("gauge invariance: exhaustive 2x2", gauge_invariance),
    ("monotonicity of CI in p", monotonicity),
    ("determinism across worker counts", determinism),
    ("spectrum anchor: 16x16 zero mode", spectrum_anchor),
];

/// Runs every check of the requested level in a fixed order.
pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks: Vec<(&str, Check)> = FAST.to_vec();
    if opts.level == Level::Full {
        checks.extend_from_slice(FULL);
    }
    checks
        .into_iter()
        .map(|(name, f)| match f(opts) {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn verdict(worst: f64, tol: f64) -> (bool, String) {
    (worst < tol, format!("max residual {worst:.3e} (tol {tol:.0e})"))
}

fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> SkewMatrix {
    SkewMatrix::from_upper(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// `2 log|Pf| - log|det|` and whether the determinant is positive.
fn pf_det_gap(a: &SkewMatrix) -> Result<(f64, bool)> {
    let pf = pfaffian_signed_log(a)?;
    let lu = a.to_nalgebra().lu();
    let u = lu.u();
    let mut log_det = 0.0;
    let mut neg = false;
    for i in 0..a.dim() {
        let d = u[(i, i)];
        log_det += d.abs().ln();
        neg ^= d < 0.0;
    }
    // Row swaps of the LU factorisation flip the sign.
    let swaps = lu.p().determinant::<f64>();
    neg ^= swaps < 0.0;
    Ok(((2.0 * pf.log_abs - log_det).abs(), !neg))
}

fn pf_det_sizes(sizes: &[usize], seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut signs_ok = true;
    for &n in sizes {
        let a = random_skew(n, &mut rng);
        let (gap, positive) = pf_det_gap(&a)?;
        worst = worst.max(gap / n as f64);
        signs_ok &= positive;
    }
    let (ok, detail) = verdict(worst, 1e-10);
    Ok((ok && signs_ok, format!("{detail} per mode in log; det sign positive: {signs_ok}")))
}

fn pfaffian_small(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for n in (2..=8).step_by(2) {
        for _ in 0..20 {
            let a = random_skew(n, &mut rng);
            let fast = pfaffian_signed_log(&a)?.to_f64();
            let brute = pfaffian_brute(&a)?;
            worst = worst.max((fast - brute).abs() / brute.abs().max(1e-300));
        }
    }
    let (brute_ok, brute_detail) = verdict(worst, 1e-10);
    let (det_ok, det_detail) = pf_det_sizes(&[10, 20, 40, 60], 12)?;
    Ok((brute_ok && det_ok, format!("brute: {brute_detail}; det: {det_detail}")))
}

fn pfaffian_large(_: &VerifyOptions) -> Result<(bool, String)> {
    pf_det_sizes(&[100, 300, 600], 13)
}

fn transfer_matrix(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (lx, ly) in [(2, 2), (3, 3), (4, 3)] {
        let lat = build_torus(lx, ly)?;
        for j in [0.2, 0.44, 1.0] {
            let lz = ising_sector_log_partitions(&lat, j, &GaugeConfig::uniform(&lat))?;
            for alpha in BoundarySector::ALL {
                let tm = transfer_matrix_partition(&lat, j, alpha)?;
                worst = worst.max((lz[alpha.index()].exp() / tm - 1.0).abs());
            }
        }
    }
    Ok(verdict(worst, 1e-11))
}

fn ising_duality(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (lx, ly) in [(2, 2), (2, 3), (3, 3)] {
        let lat = build_torus(lx, ly)?;
        for j in [0.2, (2f64.sqrt() - 1.0).atanh(), 1.0] {
            worst = worst.max(check_ising_duality(&lat, j)?);
        }
    }
    Ok(verdict(worst, 1e-11))
}

fn rbim_duality(n: u32) -> Result<(bool, String)> {
    let lat = build_torus(2, 2)?;
    let mut worst: f64 = 0.0;
    for k in [0.3, 0.7] {
        worst = worst.max(check_rbim_duality(&lat, k, n)?);
    }
    Ok(verdict(worst, 1e-10))
}

fn rbim_duality_2(_: &VerifyOptions) -> Result<(bool, String)> {
    rbim_duality(2)
}

fn rbim_duality_3(_: &VerifyOptions) -> Result<(bool, String)> {
    rbim_duality(3)
}

fn intra(opts: &VerifyOptions) -> IntraCell {
    if opts.mutate_intra_cell {
        IntraCell::perturbed()
    } else {
        IntraCell::default()
    }
}

/// `1 - 2 Pf_PP / sum Pf` against `2 Z_PP / sum Z` for the given configs.
fn ratio_residual(lat: &TorusLattice, p: f64, configs: &[GaugeConfig], intra: IntraCell) -> Result<f64> {
    let j = (1.0 - 2.0 * p).atanh();
    let mut worst: f64 = 0.0;
    for eta in configs {
        let pf = sector_pfaffians_with(lat, t1(p), eta, intra)?;
        let lhs = pf.parity_ratio().unwrap_or(f64::NAN);
        let rhs = ising_sector_ratio(lat, j, eta)?;
        let r = (lhs - rhs).abs();
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    Ok(worst)
}

fn ratio_identity(opts: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(2, 2)?;
    let configs: Vec<GaugeConfig> = (0..256).map(|m| GaugeConfig::from_mask(&lat, m)).collect();
    let mut worst: f64 = 0.0;
    for p in [0.05, 0.12] {
        worst = worst.max(ratio_residual(&lat, p, &configs, intra(opts))?);
    }
    Ok(verdict(worst, 1e-9))
}

fn ratio_identity_3x3(opts: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(3, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let configs: Vec<GaugeConfig> = (0..200)
        .map(|_| GaugeConfig::from_mask(&lat, rng.gen_range(0..1u64 << lat.n_bonds())))
        .collect();
    Ok(verdict(ratio_residual(&lat, 0.1, &configs, intra(opts))?, 1e-9))
}

fn single_site(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(1, 1)?;
    let mut worst_ci: f64 = 0.0;
    for i in 0..=50 {
        let p = 0.01 * f64::from(i);
        let ci = coherent_information_exhaustive(&lat, p)?;
        let h = if p > 0.0 {
            p * p.log2() + (1.0 - p) * (1.0 - p).log2()
        } else {
            0.0
        };
        worst_ci = worst_ci.max((ci - (4.0 * h + 2.0)).abs());
    }
    let mut worst_sum: f64 = 0.0;
    for t in [0.0, 0.3, 0.7, 1.0] {
        for (exx, eyy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let s: f64 = BoundarySector::ALL
                .iter()
                .map(|&a| single_site_pfaffian(t, exx, eyy, a))
                .sum();
            worst_sum = worst_sum.max((s - 1.0).abs());
        }
    }
    let ok = worst_ci < 1e-12 && worst_sum < 1e-14;
    Ok((ok, format!("CI residual {worst_ci:.3e}, sum-rule residual {worst_sum:.3e}")))
}

fn single_qubit_forms(_: &VerifyOptions) -> Result<(bool, String)> {
    let code = single_qubit();
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let p = 0.005 * f64::from(i);
        let ch = PauliChannel::new(ChannelKind::BitflipPhase, p)?;
        let h = if p > 0.0 && p < 1.0 {
            p * p.log2() + (1.0 - p) * (1.0 - p).log2()
        } else {
            0.0
        };
        worst = worst.max((exact_ci(&code, &ch)? - (2.0 * h + 1.0)).abs());
        for n in [2u32, 3] {
            let e = 2.0 / f64::from(n - 1) * ((1.0 - p).powi(n as i32) + p.powi(n as i32)).log2() + 1.0;
            worst = worst.max((renyi_ci(&code, &ch, n)? - e).abs());
        }
    }
    Ok(verdict(worst, 1e-12))
}

fn three_way(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(2, 2)?;
    let code = toric_code(2, 2)?;
    let mut worst: f64 = 0.0;
    for p in [0.05, 0.10, 0.15] {
        let a = exact_ci(&code, &PauliChannel::new(ChannelKind::BitflipPhase, p)?)?;
        let b = exact_full_ci(&lat, p)?;
        let c = coherent_information_exhaustive(&lat, p)?;
        worst = worst.max((a - b).abs()).max((b - c).abs()).max((a - c).abs());
    }
    Ok(verdict(worst, 1e-9))
}

fn renyi2_zeros(_: &VerifyOptions) -> Result<(bool, String)> {
    let pc = self_dual_rate();
    let mut worst: f64 = 0.0;
    for l in [2, 4, 8] {
        worst = worst.max(renyi2_ci(&build_torus(l, l)?, pc)?.abs());
    }
    Ok(verdict(worst, 1e-8))
}

fn gauge_invariance(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(2, 2)?;
    let solver = SectorSolver::new(&lat);
    let t = t1(0.1);
    let mut worst: f64 = 0.0;
    let mut signs_ok = true;
    for mask in 0..256u64 {
        let eta = GaugeConfig::from_mask(&lat, mask);
        let base = solver.solve(t, &eta)?;
        let v0 = ci_from_pfaffians(&base)?.value;
        for tau_mask in 1..16u32 {
            let tau: Vec<i8> = (0..4).map(|s| if tau_mask >> s & 1 == 1 { -1 } else { 1 }).collect();
            let other = solver.solve(t, &gauge_transform(&lat, &eta, &tau)?)?;
            worst = worst.max((ci_from_pfaffians(&other)?.value - v0).abs());
            signs_ok &= other.mstop_sign() == base.mstop_sign();
        }
    }
    let (ok, detail) = verdict(worst, 1e-10);
    Ok((ok && signs_ok, format!("CI {detail}; MSTOP sign invariant: {signs_ok}")))
}

fn monotonicity(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(4, 4)?;
    let mut prev: Option<(f64, f64)> = None;
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..=10 {
        let p = 0.02 * f64::from(i);
        let est = coherent_information(&lat, p, 400, 5)?;
        if let Some((m, e)) = prev {
            let sigma = e.hypot(est.std_err).max(1e-12);
            worst = worst.max((est.mean - m) / sigma);
        }
        prev = Some((est.mean, est.std_err));
    }
    Ok((worst <= 3.0, format!("largest upward step {worst:.2} sigma (tol 3)")))
}

fn determinism(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(4, 4)?;
    let run = |threads: usize| -> Result<(u64, u64)> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let est = pool.install(|| coherent_information(&lat, 0.11, 500, 99))?;
        Ok((est.mean.to_bits(), est.std_err.to_bits()))
    };
    let reference = run(1)?;
    let same = [2, 3, 8].iter().map(|&w| run(w)).collect::<Result<Vec<_>>>()?;
    let ok = same.iter().all(|r| *r == reference);
    Ok((ok, format!("bitwise identical for 1, 2, 3, 8 workers: {ok}")))
}

fn spectrum_anchor(_: &VerifyOptions) -> Result<(bool, String)> {
    let lat = build_torus(16, 16)?;
    let eta = GaugeConfig::uniform(&lat);
    let t = 2f64.sqrt() - 1.0;
    let mut mins = [0.0; 4];
    for alpha in BoundarySector::ALL {
        let h = build_hamiltonian(&MajoranaModel::new(&lat, t, &eta, alpha))?;
        mins[alpha.index()] = spectrum(&h).iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    }
    let pp = mins[0];
    let gapped = mins[1..].iter().all(|&m| m > 10.0 * pp.max(1e-8));
    Ok((
        pp < 1e-8 && gapped,
        format!("min |lambda| PP {pp:.2e}, PA {:.2e}, AP {:.2e}, AA {:.2e}", mins[1], mins[2], mins[3]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let results = run_suite(&VerifyOptions {
            level: Level::Fast,
            mutate_intra_cell: false,
        });
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn mutation_is_caught() {
        let opts = VerifyOptions {
            level: Level::Fast,
            mutate_intra_cell: true,
        };
        let (ok, _) = ratio_identity(&opts).unwrap();
        assert!(!ok);
    }
}
