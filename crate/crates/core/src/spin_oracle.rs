//! Brute-force spin-model ground truth.
//!
//! Partition functions are computed by Gray-code enumeration of all spin
//! configurations. All four boundary sectors come out of a single pass by
//! tracking the bulk energy and the two seam energies separately. Large
//! enumerations are split into a fixed number of blocks that are summed in
//! order, so results do not depend on the number of worker threads.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{BoundarySector, GaugeConfig, TorusLattice};

/// Largest number of spins enumerated directly.
pub const MAX_SPINS: usize = 24;
/// Largest `bonds + spins` exponent for nested gauge and spin enumeration.
pub const MAX_DISORDER_EXPONENT: usize = 27;
/// Largest total number of dual spins in the multi-flavor dual model.
pub const MAX_DUAL_SPINS: usize = 22;

const BLOCK_BITS: usize = 12;

/// Ising model on a torus with gauge field and boundary sector.
#[derive(Debug, Clone, Copy)]
pub struct IsingParams<'a> {
    pub j: f64,
    pub lattice: &'a TorusLattice,
    pub eta: &'a GaugeConfig,
    pub alpha: BoundarySector,
}

/// Error rate on the Nishimori line, `tanh K = 1 - 2p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NishimoriParams {
    pub p: f64,
    pub k: f64,
}

impl NishimoriParams {
    pub fn from_p(p: f64) -> Result<Self> {
        check_rate(p)?;
        Ok(Self {
            p,
            k: (1.0 - 2.0 * p).atanh(),
        })
    }

    pub fn from_k(k: f64) -> Self {
        Self {
            p: (-k).exp() / (2.0 * k.cosh()),
            k,
        }
    }
}

pub(crate) fn check_rate(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::RateOutOfRange(p));
    }
    Ok(())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Precomputed incidence structure for Gray-code enumeration.
struct Enumerator {
    n: usize,
    n_bonds: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    /// 0 bulk, 1 x-seam, 2 y-seam.
    category: Vec<usize>,
    incident: Vec<Vec<usize>>,
}

impl Enumerator {
    fn new(lat: &TorusLattice) -> Result<Self> {
        let n = lat.n_sites();
        if n > MAX_SPINS {
            return Err(Error::Infeasible {
                what: "spin enumeration",
                size: n,
                cap: MAX_SPINS,
            });
        }
        let mut incident = vec![Vec::new(); n];
        let mut category = vec![0; lat.n_bonds()];
        for &b in lat.seam_x() {
            category[b] = 1;
        }
        for &b in lat.seam_y() {
            category[b] = 2;
        }
        for (b, bond) in lat.bonds().iter().enumerate() {
            if bond.tail != bond.head {
                incident[bond.tail].push(b);
                incident[bond.head].push(b);
            }
        }
        Ok(Self {
            n,
            n_bonds: lat.n_bonds(),
            tails: lat.bonds().iter().map(|b| b.tail).collect(),
            heads: lat.bonds().iter().map(|b| b.head).collect(),
            category,
            incident,
        })
    }

    /// `log Z_alpha` for the four sectors at coupling `j`.
    fn sector_log_z(&self, eta: &[i8], j: f64) -> [f64; 4] {
        let m = self.n_bonds as i64;
        let shift = j.abs() * m as f64;
        let table: Vec<f64> = (-m..=m).map(|e| (j * e as f64 - shift).exp()).collect();
        let low = self.n.min(BLOCK_BITS);
        let n_blocks = 1usize << (self.n - low);
        let block_sum = |blk: usize| self.enumerate_block(eta, &table, blk << low, low);
        let sums: Vec<[f64; 4]> = if n_blocks > 1 {
            (0..n_blocks).into_par_iter().map(block_sum).collect()
        } else {
            vec![block_sum(0)]
        };
        let mut total = [0.0; 4];
        for s in &sums {
            for a in 0..4 {
                total[a] += s[a];
            }
        }
        total.map(|z| z.ln() + shift)
    }

    fn enumerate_block(&self, eta: &[i8], table: &[f64], start: usize, low: usize) -> [f64; 4] {
        let off = self.n_bonds as i32;
        let spin = |mask: usize, s: usize| if mask >> s & 1 == 1 { -1i32 } else { 1 };
        let mut term: Vec<i32> = (0..self.n_bonds)
            .map(|b| i32::from(eta[b]) * spin(start, self.tails[b]) * spin(start, self.heads[b]))
            .collect();
        let mut e = [0i32; 3];
        for b in 0..self.n_bonds {
            e[self.category[b]] += term[b];
        }
        let mut acc = [0.0; 4];
        let add = |e: &[i32; 3], acc: &mut [f64; 4]| {
            acc[0] += table[(e[0] + e[1] + e[2] + off) as usize];
            acc[1] += table[(e[0] + e[1] - e[2] + off) as usize];
            acc[2] += table[(e[0] - e[1] + e[2] + off) as usize];
            acc[3] += table[(e[0] - e[1] - e[2] + off) as usize];
        };
        add(&e, &mut acc);
        for g in 1usize..(1 << low) {
            let s = g.trailing_zeros() as usize;
            for &b in &self.incident[s] {
                e[self.category[b]] -= 2 * term[b];
                term[b] = -term[b];
            }
            add(&e, &mut acc);
        }
        acc
    }
}

/// `log Z` of the Ising model described by `params`.
pub fn ising_log_partition(params: &IsingParams) -> Result<f64> {
    params.eta.check_lattice(params.lattice)?;
    let en = Enumerator::new(params.lattice)?;
    Ok(en.sector_log_z(params.eta.as_slice(), params.j)[params.alpha.index()])
}

/// `Z = sum_sigma exp(J sum_b s_alpha(b) eta_b sigma_i sigma_j)`.
pub fn ising_partition(params: &IsingParams) -> Result<f64> {
    ising_log_partition(params).map(f64::exp)
}

/// `log Z_alpha` for all four sectors, indexed by [`BoundarySector::index`].
pub fn ising_sector_log_partitions(lat: &TorusLattice, j: f64, eta: &GaugeConfig) -> Result<[f64; 4]> {
    eta.check_lattice(lat)?;
    Ok(Enumerator::new(lat)?.sector_log_z(eta.as_slice(), j))
}

/// `2 Z_PP / sum_alpha Z_alpha`.
pub fn ising_sector_ratio(lat: &TorusLattice, j: f64, eta: &GaugeConfig) -> Result<f64> {
    let lz = ising_sector_log_partitions(lat, j, eta)?;
    Ok(2.0 * (lz[0] - log_sum_exp(&lz)).exp())
}

/// `tanh J~ = exp(-2J)`.
pub fn dual_coupling(j: f64) -> f64 {
    (-2.0 * j).exp().atanh()
}

/// Partition function of the dual Ising model including its prefactor.
pub fn dual_ising_log_partition(lat: &TorusLattice, j: f64) -> Result<f64> {
    let jt = dual_coupling(j);
    let n = lat.n_sites() as f64;
    let uniform = GaugeConfig::uniform(lat);
    let lz = ising_sector_log_partitions(lat, jt, &uniform)?[0];
    let pref = 2.0 * n * (j - (2f64.sqrt() * jt.cosh()).ln());
    Ok(pref + lz)
}

pub fn dual_ising_partition(lat: &TorusLattice, j: f64) -> Result<f64> {
    dual_ising_log_partition(lat, j).map(f64::exp)
}

/// `|2 Z~ - sum_alpha Z_alpha| / sum_alpha Z_alpha` for the clean model.
pub fn check_ising_duality(lat: &TorusLattice, j: f64) -> Result<f64> {
    let lz = ising_sector_log_partitions(lat, j, &GaugeConfig::uniform(lat))?;
    let lsum = log_sum_exp(&lz);
    let ldual = dual_ising_log_partition(lat, j)?;
    Ok((2.0 * (ldual - lsum).exp() - 1.0).abs())
}

/// Clean Ising partition function by row transfer matrices.
///
/// Independent of the enumerator; used to validate it.
pub fn transfer_matrix_partition(lat: &TorusLattice, j: f64, alpha: BoundarySector) -> Result<f64> {
    let lx = lat.lx();
    if lx > 12 {
        return Err(Error::Infeasible {
            what: "transfer matrix width",
            size: lx,
            cap: 12,
        });
    }
    let dim = 1usize << lx;
    let spin = |c: usize, x: usize| if c >> x & 1 == 1 { -1.0 } else { 1.0 };
    let sx = if alpha.antiperiodic_x() { -1.0 } else { 1.0 };
    // Energy of horizontal bonds within a row.
    let row_energy = |c: usize| -> f64 {
        (0..lx)
            .map(|x| {
                let s = if x + 1 == lx { sx } else { 1.0 };
                s * spin(c, x) * spin(c, (x + 1) % lx)
            })
            .sum()
    };
    let vertical = |c: usize, d: usize, sign: f64| -> f64 {
        (0..lx).map(|x| sign * spin(c, x) * spin(d, x)).sum()
    };
    let build = |sign: f64| {
        DMatrix::from_fn(dim, dim, |c, d| (j * (row_energy(c) + vertical(c, d, sign))).exp())
    };
    let t = build(1.0);
    let sy = if alpha.antiperiodic_y() { -1.0 } else { 1.0 };
    let last = build(sy);
    let mut prod = DMatrix::identity(dim, dim);
    for _ in 0..lat.ly() - 1 {
        prod = &prod * &t;
    }
    prod = &prod * &last;
    Ok(prod.trace())
}

/// Bernoulli weight `log P[eta]` with `P(eta_b = -1) = p`.
fn log_weight(n_neg: usize, n_bonds: usize, p: f64) -> f64 {
    let lp = if n_neg > 0 { n_neg as f64 * p.ln() } else { 0.0 };
    let lq = if n_neg < n_bonds {
        (n_bonds - n_neg) as f64 * (1.0 - p).ln()
    } else {
        0.0
    };
    lp + lq
}

fn check_disorder_cap(lat: &TorusLattice) -> Result<()> {
    let size = lat.n_bonds() + lat.n_sites();
    if size > MAX_DISORDER_EXPONENT {
        return Err(Error::Infeasible {
            what: "gauge and spin enumeration exponent",
            size,
            cap: MAX_DISORDER_EXPONENT,
        });
    }
    Ok(())
}

/// Applies `f(log P[eta], log Z_alpha[K; eta])` to every gauge configuration
/// and returns the results in mask order.
fn map_disorder<T: Send>(
    lat: &TorusLattice,
    p: f64,
    k: f64,
    f: impl Fn(f64, [f64; 4]) -> T + Sync,
) -> Result<Vec<T>> {
    check_disorder_cap(lat)?;
    let en = Enumerator::new(lat)?;
    let nb = lat.n_bonds();
    Ok((0usize..1 << nb)
        .into_par_iter()
        .map(|mask| {
            let mask = mask as u64;
            let eta = GaugeConfig::from_mask(lat, mask);
            let lw = log_weight(mask.count_ones() as usize, nb, p);
            f(lw, en.sector_log_z(eta.as_slice(), k))
        })
        .collect())
}

/// Log-sums of `log P + (n-1) log z_PP` and `log P + (n-1) log sum_alpha z_alpha`.
fn rbim_log_sums(lat: &TorusLattice, k: f64, p: f64, n: u32) -> Result<(f64, f64)> {
    let m = f64::from(n - 1);
    let terms = map_disorder(lat, p, k, |lw, lz| {
        (lw + m * lz[0], lw + m * log_sum_exp(&lz))
    })?;
    let pp: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let all: Vec<f64> = terms.iter().map(|t| t.1).collect();
    Ok((log_sum_exp(&pp), log_sum_exp(&all)))
}

fn check_renyi(n: u32) -> Result<()> {
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedRenyiIndex(n));
    }
    Ok(())
}

/// Exact Renyi-n coherent information from the (n-1)-flavor RBIM.
pub fn rbim_renyi_ci(lat: &TorusLattice, p: f64, n: u32) -> Result<f64> {
    check_renyi(n)?;
    check_rate(p)?;
    check_disorder_cap(lat)?;
    if p == 0.0 {
        return Ok(2.0);
    }
    let nish = NishimoriParams::from_p(p)?;
    let (lpp, lall) = rbim_log_sums(lat, nish.k, p, n)?;
    let m = f64::from(n - 1);
    let ln_ratio = lall - lpp - m * 2f64.ln();
    Ok(-2.0 / m * ln_ratio / 2f64.ln())
}

/// Exact quenched average of `2 log2(2 Z_PP / sum_alpha Z_alpha)`.
pub fn exact_full_ci(lat: &TorusLattice, p: f64) -> Result<f64> {
    check_rate(p)?;
    check_disorder_cap(lat)?;
    if p == 0.0 {
        return Ok(2.0);
    }
    let nish = NishimoriParams::from_p(p)?;
    let terms = map_disorder(lat, p, nish.k, |lw, lz| {
        let ratio = 2.0 * (lz[0] - log_sum_exp(&lz)).exp();
        lw.exp() * 2.0 * ratio.log2()
    })?;
    Ok(terms.iter().sum())
}

/// `log Z~^(n)` of the dual (n-1)-flavor model including its prefactor.
pub fn dual_rbim_log_partition(lat: &TorusLattice, k: f64, n: u32) -> Result<f64> {
    check_renyi(n)?;
    let flavors = (n - 1) as usize;
    let n_sites = lat.n_sites();
    let total = flavors * n_sites;
    if total > MAX_DUAL_SPINS {
        return Err(Error::Infeasible {
            what: "dual flavor spins",
            size: total,
            cap: MAX_DUAL_SPINS,
        });
    }
    let kt = -0.5 * k.tanh().ln();
    let bonds: Vec<(usize, usize)> = lat.bonds().iter().map(|b| (b.tail, b.head)).collect();
    let energy = |c: u64| -> i64 {
        let spin = |f: usize, s: usize| if c >> (f * n_sites + s) & 1 == 1 { -1i64 } else { 1 };
        bonds
            .iter()
            .map(|&(a, b)| {
                let prods: Vec<i64> = (0..flavors).map(|f| spin(f, a) * spin(f, b)).collect();
                prods.iter().sum::<i64>() + prods.iter().product::<i64>()
            })
            .sum()
    };
    let max_e = (bonds.len() * (flavors + 1)) as f64;
    let shift = kt.abs() * max_e;
    let low = total.min(BLOCK_BITS);
    let blocks: Vec<f64> = (0usize..1 << (total - low))
        .into_par_iter()
        .map(|blk| {
            let base = (blk as u64) << low;
            (0u64..1 << low)
                .map(|c| (kt * energy(base | c) as f64 - shift).exp())
                .sum()
        })
        .collect();
    let sum: f64 = blocks.iter().sum();
    let nn = n_sites as f64;
    let m = flavors as f64;
    let pref = 2.0 * nn * m * (k - (2f64.sqrt() * kt.cosh()).ln()) - 2.0 * nn * kt;
    Ok(pref + shift + sum.ln())
}

/// `|2^(n-1) Z~^(n) - sum_alpha Z^(n)_alpha| / sum_alpha Z^(n)_alpha`.
pub fn check_rbim_duality(lat: &TorusLattice, k: f64, n: u32) -> Result<f64> {
    check_renyi(n)?;
    let nish = NishimoriParams::from_k(k);
    let (_, lall) = rbim_log_sums(lat, k, nish.p, n)?;
    let ldual = dual_rbim_log_partition(lat, k, n)? + f64::from(n - 1) * 2f64.ln();
    Ok(((ldual - lall).exp() - 1.0).abs())
}

/// Renyi-2 self-dual error rate `(1 - sqrt(sqrt2 - 1)) / 2`.
pub fn self_dual_rate() -> f64 {
    0.5 * (1.0 - (2f64.sqrt() - 1.0).sqrt())
}
