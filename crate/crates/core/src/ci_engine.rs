//! Disorder-averaged coherent information and related order parameters.
//!
//! Every quantity here is a function of the four sector Pfaffians of the
//! Majorana model. Disorder samples are drawn on the Nishimori line, each
//! from its own counter-keyed random stream, and evaluated in parallel.
//! Samples are gathered in index order before reduction so that means do
//! not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GaugeConfig, TorusLattice};
use crate::majorana::{t1, t2, Hopping, SectorPfaffians, SectorSolver};
use crate::spin_oracle::check_rate;

/// Value substituted for `1 - 2r` when it is not positive.
pub const CLAMP_FLOOR: f64 = 1e-300;
/// Largest tolerated fraction of clamped or flagged samples.
pub const CLAMP_BUDGET: f64 = 1e-3;
/// Largest number of bonds for exhaustive disorder enumeration.
pub const MAX_EXHAUSTIVE_BONDS: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Ci,
    Renyi2,
    Fugacity,
    Mstop,
}

impl Quantity {
    pub fn is_statistical(self) -> bool {
        !matches!(self, Quantity::Renyi2)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Ci => "ci",
            Quantity::Renyi2 => "renyi2",
            Quantity::Fugacity => "fugacity",
            Quantity::Mstop => "mstop",
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Quantity::Ci),
            "renyi2" => Ok(Quantity::Renyi2),
            "fugacity" => Ok(Quantity::Fugacity),
            "mstop" => Ok(Quantity::Mstop),
            other => Err(Error::InvalidArgument(format!("unknown quantity {other:?}"))),
        }
    }
}

/// Monte-Carlo estimate of one quantity at one `(lattice, p)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiEstimate {
    pub quantity: Quantity,
    pub lx: usize,
    pub ly: usize,
    pub p: f64,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub n_clamped: usize,
    pub seed: u64,
}

/// One evaluated disorder sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiSample {
    pub value: f64,
    /// `1 - 2r` was not positive and got replaced by [`CLAMP_FLOOR`].
    pub clamped: bool,
}

/// Draws the `index`-th gauge configuration of stream `seed`.
pub fn sample_gauge(lat: &TorusLattice, p: f64, seed: u64, index: u64) -> Result<GaugeConfig> {
    check_rate(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let eta = (0..lat.n_bonds())
        .map(|_| if rng.gen::<f64>() < p { -1 } else { 1 })
        .collect();
    GaugeConfig::new(eta)
}

/// `2 log2(1 - 2 Pf_PP / sum Pf)`, clamping non-positive arguments.
pub fn ci_from_pfaffians(pf: &SectorPfaffians) -> Result<CiSample> {
    if pf.pf.iter().all(|x| x.is_zero()) {
        return Err(Error::DegenerateSectors);
    }
    let arg = pf.parity_ratio().unwrap_or(f64::NAN);
    if arg > 0.0 {
        Ok(CiSample {
            value: 2.0 * arg.log2(),
            clamped: false,
        })
    } else {
        Ok(CiSample {
            value: 2.0 * CLAMP_FLOOR.log2(),
            clamped: true,
        })
    }
}

/// Per-sample coherent information at hopping `1 - 2p`.
pub fn ci_sample_value(lat: &TorusLattice, p: f64, eta: &GaugeConfig) -> Result<CiSample> {
    check_rate(p)?;
    let pf = SectorSolver::new(lat).solve(t1(p), eta)?;
    ci_from_pfaffians(&pf)
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Outcome of one sample for quantities that may reject a sample.
enum Outcome {
    Value(f64),
    Clamped(f64),
    Flagged,
}

fn monte_carlo(
    quantity: Quantity,
    lat: &TorusLattice,
    p: f64,
    n_samples: usize,
    seed: u64,
    hopping: Hopping,
    eval: impl Fn(&SectorPfaffians) -> Result<Outcome> + Sync,
) -> Result<CiEstimate> {
    check_rate(p)?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let solver = SectorSolver::new(lat);
    let t = hopping.at(p);
    let outcomes: Vec<Outcome> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let eta = sample_gauge(lat, p, seed, i as u64)?;
            eval(&solver.solve(t, &eta)?)
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(n_samples);
    let mut n_clamped = 0;
    for o in outcomes {
        match o {
            Outcome::Value(v) => values.push(v),
            Outcome::Clamped(v) => {
                values.push(v);
                n_clamped += 1;
            }
            Outcome::Flagged => n_clamped += 1,
        }
    }
    if n_clamped as f64 > CLAMP_BUDGET * n_samples as f64 {
        return Err(Error::ClampBudgetExceeded {
            clamped: n_clamped,
            total: n_samples,
        });
    }
    let (mean, std_err) = mean_and_stderr(&values);
    Ok(CiEstimate {
        quantity,
        lx: lat.lx(),
        ly: lat.ly(),
        p,
        mean,
        std_err,
        n_samples,
        n_clamped,
        seed,
    })
}

/// Nishimori-sampled coherent information.
pub fn coherent_information(lat: &TorusLattice, p: f64, n_samples: usize, seed: u64) -> Result<CiEstimate> {
    monte_carlo(Quantity::Ci, lat, p, n_samples, seed, Hopping::T1, |pf| {
        let s = ci_from_pfaffians(pf)?;
        Ok(if s.clamped {
            Outcome::Clamped(s.value)
        } else {
            Outcome::Value(s.value)
        })
    })
}

/// Exact disorder average over all `2^(2N)` gauge configurations.
pub fn coherent_information_exhaustive(lat: &TorusLattice, p: f64) -> Result<f64> {
    check_rate(p)?;
    let nb = lat.n_bonds();
    if nb > MAX_EXHAUSTIVE_BONDS {
        return Err(Error::Infeasible {
            what: "exhaustive gauge enumeration",
            size: nb,
            cap: MAX_EXHAUSTIVE_BONDS,
        });
    }
    if p == 0.0 {
        return ci_from_pfaffians(&SectorSolver::new(lat).solve(1.0, &GaugeConfig::uniform(lat))?)
            .map(|s| s.value);
    }
    let solver = SectorSolver::new(lat);
    let t = t1(p);
    let terms: Vec<f64> = (0usize..1 << nb)
        .into_par_iter()
        .map(|mask| {
            let eta = GaugeConfig::from_mask(lat, mask as u64);
            let k = eta.n_negative() as i32;
            let w = p.powi(k) * (1.0 - p).powi(nb as i32 - k);
            let s = ci_from_pfaffians(&solver.solve(t, &eta)?)?;
            Ok(w * s.value)
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}

/// Renyi-2 coherent information of the clean model at hopping `(1 - 2p)^2`.
pub fn renyi2_ci(lat: &TorusLattice, p: f64) -> Result<f64> {
    check_rate(p)?;
    let pf = SectorSolver::new(lat).solve(t2(p), &GaugeConfig::uniform(lat))?;
    Ok(ci_from_pfaffians(&pf)?.value)
}

/// Disorder average of `Pf_PP / (Pf_PA + Pf_AP + Pf_AA)` at hopping `1 - 2p`.
pub fn vortex_fugacity(lat: &TorusLattice, p: f64, n_samples: usize, seed: u64) -> Result<CiEstimate> {
    vortex_fugacity_with(lat, p, n_samples, seed, Hopping::T1)
}

pub fn vortex_fugacity_with(
    lat: &TorusLattice,
    p: f64,
    n_samples: usize,
    seed: u64,
    hopping: Hopping,
) -> Result<CiEstimate> {
    monte_carlo(Quantity::Fugacity, lat, p, n_samples, seed, hopping, |pf| {
        Ok(match pf.fugacity_ratio() {
            Some(u) if u.is_finite() => Outcome::Value(u),
            _ => Outcome::Flagged,
        })
    })
}

/// Disorder average of `sign(Pf_PP Pf_AA / (Pf_AP Pf_PA))`.
pub fn mstop(lat: &TorusLattice, p: f64, n_samples: usize, seed: u64) -> Result<CiEstimate> {
    monte_carlo(Quantity::Mstop, lat, p, n_samples, seed, Hopping::T1, |pf| {
        Ok(match pf.mstop_sign() {
            Some(s) => Outcome::Value(f64::from(s)),
            None => Outcome::Flagged,
        })
    })
}

/// Evaluates `quantity` at one point. Renyi-2 is deterministic and reports
/// one sample with zero error.
pub fn estimate(quantity: Quantity, lat: &TorusLattice, p: f64, n_samples: usize, seed: u64) -> Result<CiEstimate> {
    match quantity {
        Quantity::Ci => coherent_information(lat, p, n_samples, seed),
        Quantity::Fugacity => vortex_fugacity(lat, p, n_samples, seed),
        Quantity::Mstop => mstop(lat, p, n_samples, seed),
        Quantity::Renyi2 => Ok(CiEstimate {
            quantity,
            lx: lat.lx(),
            ly: lat.ly(),
            p,
            mean: renyi2_ci(lat, p)?,
            std_err: 0.0,
            n_samples: 1,
            n_clamped: 0,
            seed,
        }),
    }
}

/// Mixes a seed with two counters into an independent seed.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub p_lo: f64,
    pub p_hi: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_probes: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            p_lo: 0.08,
            p_hi: 0.14,
            samples: 2000,
            seed: 1,
            tol: 1e-3,
            max_probes: 16,
        }
    }
}

/// One evaluation of the difference curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub p: f64,
    pub diff: f64,
    pub diff_err: f64,
    pub estimates: Vec<CiEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    StatisticalLimit,
    ProbeBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub quantity: Quantity,
    pub estimate: f64,
    pub std_err: f64,
    pub bracket: (f64, f64),
    pub stop: StopReason,
    pub probes: Vec<Probe>,
}

/// Locates the crossing of `quantity` between two lattice sizes.
///
/// Statistical quantities bisect on the difference of the two curves,
/// drawing fresh seeds at every probe, and read off the crossing from a
/// weighted linear fit of the probes nearest the final bracket. Renyi-2 is
/// deterministic and bisects on the zero of the first lattice's curve.
pub fn find_threshold(
    lats: (&TorusLattice, &TorusLattice),
    quantity: Quantity,
    opts: &ThresholdOptions,
) -> Result<ThresholdReport> {
    let (lo, hi) = (opts.p_lo, opts.p_hi);
    check_rate(lo)?;
    check_rate(hi)?;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty probe range [{lo}, {hi}]")));
    }
    if quantity == Quantity::Renyi2 {
        return renyi2_threshold(lats.0, lo, hi, opts);
    }
    if lats.0.lx() == lats.1.lx() && lats.0.ly() == lats.1.ly() {
        return Err(Error::ThresholdUndefined(
            "both lattices have the same size, so their curves coincide".into(),
        ));
    }
    let mut probes: Vec<Probe> = Vec::new();
    let probe = |p: f64, probes: &mut Vec<Probe>| -> Result<(f64, f64)> {
        let k = probes.len() as u64;
        let a = estimate(quantity, lats.0, p, opts.samples, derive_seed(opts.seed, k, 0))?;
        let b = estimate(quantity, lats.1, p, opts.samples, derive_seed(opts.seed, k, 1))?;
        let diff = b.mean - a.mean;
        let err = a.std_err.hypot(b.std_err);
        probes.push(Probe {
            p,
            diff,
            diff_err: err,
            estimates: vec![a, b],
        });
        Ok((diff, err))
    };

    let (d_lo, _) = probe(lo, &mut probes)?;
    let (d_hi, _) = probe(hi, &mut probes)?;
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::NoBracket {
            quantity: quantity.to_string(),
            lo,
            hi,
        });
    }
    let (mut a, mut b, mut sign_a) = (lo, hi, d_lo.signum());
    let stop = loop {
        if b - a < opts.tol {
            break StopReason::Tolerance;
        }
        if probes.len() >= opts.max_probes {
            break StopReason::ProbeBudget;
        }
        let mid = 0.5 * (a + b);
        let (d, err) = probe(mid, &mut probes)?;
        if d.abs() < 2.0 * err {
            break StopReason::StatisticalLimit;
        }
        if d.signum() == sign_a {
            a = mid;
            sign_a = d.signum();
        } else {
            b = mid;
        }
    };

    let (estimate, std_err) = crossing_fit(&probes, a, b);
    Ok(ThresholdReport {
        quantity,
        estimate,
        std_err,
        bracket: (a, b),
        stop,
        probes,
    })
}

/// Weighted least-squares line through the probes nearest the bracket,
/// returning its zero and a delta-method error.
fn crossing_fit(probes: &[Probe], a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let mut near: Vec<&Probe> = probes.iter().collect();
    near.sort_by(|x, y| (x.p - centre).abs().total_cmp(&(y.p - centre).abs()));
    near.truncate(4);
    let fallback = (centre, 0.5 * (b - a));
    let w: Vec<f64> = near.iter().map(|q| 1.0 / q.diff_err.max(1e-12).powi(2)).collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = near.iter().zip(&w).map(|(q, w)| w * q.p).sum();
    let sy: f64 = near.iter().zip(&w).map(|(q, w)| w * q.diff).sum();
    let sxx: f64 = near.iter().zip(&w).map(|(q, w)| w * q.p * q.p).sum();
    let sxy: f64 = near.iter().zip(&w).map(|(q, w)| w * q.p * q.diff).sum();
    let det = sw * sxx - sx * sx;
    if near.len() < 2 || det.abs() < 1e-300 {
        return fallback;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let icept = (sxx * sy - sx * sxy) / det;
    if slope == 0.0 {
        return fallback;
    }
    let root = -icept / slope;
    // Covariance of (icept, slope) for weights 1/sigma^2.
    let var_i = sxx / det;
    let var_s = sw / det;
    let cov = -sx / det;
    let g_i = -1.0 / slope;
    let g_s = icept / (slope * slope);
    let var = g_i * g_i * var_i + g_s * g_s * var_s + 2.0 * g_i * g_s * cov;
    if !root.is_finite() || !var.is_finite() {
        return fallback;
    }
    (root, var.max(0.0).sqrt())
}

fn renyi2_threshold(lat: &TorusLattice, lo: f64, hi: f64, opts: &ThresholdOptions) -> Result<ThresholdReport> {
    let mut probes = Vec::new();
    let eval = |p: f64, probes: &mut Vec<Probe>| -> Result<f64> {
        let e = estimate(Quantity::Renyi2, lat, p, 1, opts.seed)?;
        let v = e.mean;
        probes.push(Probe {
            p,
            diff: v,
            diff_err: 0.0,
            estimates: vec![e],
        });
        Ok(v)
    };
    let f_lo = eval(lo, &mut probes)?;
    let f_hi = eval(hi, &mut probes)?;
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
        let root = if f_lo == 0.0 { Some(lo) } else if f_hi == 0.0 { Some(hi) } else { None };
        return match root {
            Some(r) => Ok(ThresholdReport {
                quantity: Quantity::Renyi2,
                estimate: r,
                std_err: 0.0,
                bracket: (r, r),
                stop: StopReason::Tolerance,
                probes,
            }),
            None => Err(Error::NoBracket {
                quantity: Quantity::Renyi2.to_string(),
                lo,
                hi,
            }),
        };
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    let tol = opts.tol.min(1e-9);
    let mut stop = StopReason::Tolerance;
    while b - a > tol {
        if probes.len() >= 200 {
            stop = StopReason::ProbeBudget;
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = eval(mid, &mut probes)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(ThresholdReport {
        quantity: Quantity::Renyi2,
        estimate: 0.5 * (a + b),
        std_err: 0.5 * (b - a),
        bracket: (a, b),
        stop,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;
    use crate::spin_oracle::{exact_full_ci, ising_sector_ratio, rbim_renyi_ci, self_dual_rate};

    fn single_site_ci(p: f64) -> f64 {
        let h = if p > 0.0 {
            p * p.log2() + (1.0 - p) * (1.0 - p).log2()
        } else {
            0.0
        };
        4.0 * h + 2.0
    }

    #[test]
    fn sampling_basics() {
        let lat = build_torus(4, 4).unwrap();
        assert_eq!(sample_gauge(&lat, 0.0, 3, 9).unwrap(), GaugeConfig::uniform(&lat));
        assert_eq!(sample_gauge(&lat, 0.2, 3, 9).unwrap(), sample_gauge(&lat, 0.2, 3, 9).unwrap());
        assert_ne!(sample_gauge(&lat, 0.2, 3, 9).unwrap(), sample_gauge(&lat, 0.2, 3, 10).unwrap());
        assert!(sample_gauge(&lat, 0.6, 3, 9).is_err());
    }

    #[test]
    fn flip_fraction() {
        let lat = build_torus(4, 4).unwrap();
        let n = 100_000;
        let p = 0.1;
        let flips: usize = (0..n)
            .map(|i| sample_gauge(&lat, p, 17, i).unwrap().n_negative())
            .sum();
        let trials = (n as usize * lat.n_bonds()) as f64;
        let frac = flips as f64 / trials;
        let sigma = (p * (1.0 - p) / trials).sqrt();
        assert!((frac - p).abs() < 3.0 * sigma, "{frac}");
    }

    #[test]
    fn single_site_sample_values() {
        let lat = build_torus(1, 1).unwrap();
        for p in [0.05, 0.2, 0.35] {
            let k = (1.0 - 2.0 * p as f64).atanh();
            for (exx, eyy) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                let eta = GaugeConfig::new(vec![exx, eyy]).unwrap();
                let v = ci_sample_value(&lat, p, &eta).unwrap().value;
                let e = (k * f64::from(exx + eyy)).exp();
                let expected = 2.0 * (e / (2.0 * k.cosh().powi(2))).log2();
                assert!((v - expected).abs() < 1e-12, "p={p} {exx} {eyy}: {v} vs {expected}");
            }
        }
    }

    #[test]
    fn zero_rate() {
        let lat = build_torus(3, 3).unwrap();
        let est = coherent_information(&lat, 0.0, 10, 1).unwrap();
        assert_eq!((est.mean, est.std_err), (2.0, 0.0));
        assert_eq!(renyi2_ci(&lat, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn exhaustive_single_site() {
        let lat = build_torus(1, 1).unwrap();
        for p in [0.0, 0.01, 0.1, 0.3, 0.5] {
            let v = coherent_information_exhaustive(&lat, p).unwrap();
            assert!((v - single_site_ci(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_match_spin_ratio() {
        let lat = build_torus(2, 2).unwrap();
        let p: f64 = 0.12;
        let j = (1.0 - 2.0 * p).atanh();
        for mask in 0..256u64 {
            let eta = GaugeConfig::from_mask(&lat, mask);
            let v = ci_sample_value(&lat, p, &eta).unwrap().value;
            let r = ising_sector_ratio(&lat, j, &eta).unwrap();
            assert!((v - 2.0 * r.log2()).abs() < 1e-9, "mask {mask}");
        }
    }

    #[test]
    fn exhaustive_matches_spin_oracle() {
        for (lx, ly) in [(2, 2), (2, 3)] {
            let lat = build_torus(lx, ly).unwrap();
            for p in [0.05, 0.1, 0.15] {
                let a = coherent_information_exhaustive(&lat, p).unwrap();
                let b = exact_full_ci(&lat, p).unwrap();
                assert!((a - b).abs() < 1e-10, "{lx}x{ly} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn renyi2_matches_rbim() {
        let lat = build_torus(2, 2).unwrap();
        for p in [0.03, 0.1, 0.2] {
            let a = renyi2_ci(&lat, p).unwrap();
            let b = rbim_renyi_ci(&lat, p, 2).unwrap();
            assert!((a - b).abs() < 1e-9, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn renyi2_self_dual_zero() {
        let pc = self_dual_rate();
        for l in [2, 4, 8] {
            let lat = build_torus(l, l).unwrap();
            assert!(renyi2_ci(&lat, pc).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn renyi2_threshold_bisection() {
        let lat = build_torus(4, 4).unwrap();
        let opts = ThresholdOptions {
            p_lo: 0.1,
            p_hi: 0.3,
            ..Default::default()
        };
        let r = find_threshold((&lat, &lat), Quantity::Renyi2, &opts).unwrap();
        assert!((r.estimate - self_dual_rate()).abs() < 1e-6);
    }

    #[test]
    fn identical_lattices_rejected() {
        let lat = build_torus(4, 4).unwrap();
        let r = find_threshold((&lat, &lat), Quantity::Ci, &ThresholdOptions::default());
        assert!(matches!(r, Err(Error::ThresholdUndefined(_))));
    }

    #[test]
    fn single_site_fugacity() {
        let lat = build_torus(1, 1).unwrap();
        let est = vortex_fugacity(&lat, 0.0, 4, 0).unwrap();
        assert!((est.mean + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let lat = build_torus(4, 4).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| coherent_information(&lat, 0.1, 300, 42).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
    }

    #[test]
    fn quantity_names() {
        for q in [Quantity::Ci, Quantity::Renyi2, Quantity::Fugacity, Quantity::Mstop] {
            assert_eq!(q.to_string().parse::<Quantity>().unwrap(), q);
        }
        assert!("entropy".parse::<Quantity>().is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let probes: Vec<Probe> = [0.1, 0.11, 0.12, 0.13]
            .iter()
            .map(|&p| Probe {
                p,
                diff: 3.0 * (0.115 - p),
                diff_err: 0.01,
                estimates: vec![],
            })
            .collect();
        let (root, err) = crossing_fit(&probes, 0.11, 0.12);
        assert!((root - 0.115).abs() < 1e-12);
        assert!(err > 0.0 && err < 0.01);
    }
}
