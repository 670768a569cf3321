//! Class-D Majorana hopping model on the torus.
//!
//! Each site carries four Majorana modes ordered `(u, d, r, l)`, so mode
//! `4 * site + m`. The real antisymmetric matrix `A = -iH` couples modes
//! inside a cell with a fixed sign pattern and couples neighbouring cells
//! through the gauge field: a y-bond pairs `u` of its tail with `d` of its
//! head, an x-bond pairs `l` of its head with `r` of its tail. Antiperiodic
//! sectors flip the hopping on seam bonds.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{BoundarySector, Direction, GaugeConfig, TorusLattice};
use crate::pfaffian::{
    eliminate, pfaffian_in_place, pfaffian_signed_log, trailing_from_upper, SignedLog, SkewMatrix,
};

pub const MODES_PER_SITE: usize = 4;

/// Interior pivots below this multiple of the matrix scale send
/// [`SectorSolver`] to the dense path.
const SCHUR_PIVOT_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    U = 0,
    D = 1,
    R = 2,
    L = 3,
}

pub fn mode_index(site: usize, mode: Mode) -> usize {
    MODES_PER_SITE * site + mode as usize
}

/// Hopping for the full coherent information.
pub fn t1(p: f64) -> f64 {
    1.0 - 2.0 * p
}

/// Hopping for the Renyi-2 coherent information.
pub fn t2(p: f64) -> f64 {
    (1.0 - 2.0 * p) * (1.0 - 2.0 * p)
}

/// Which hopping map to use for a given error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hopping {
    #[default]
    T1,
    T2,
}

impl Hopping {
    pub fn at(self, p: f64) -> f64 {
        match self {
            Hopping::T1 => t1(p),
            Hopping::T2 => t2(p),
        }
    }
}

/// Coefficients `c` of the intra-cell terms `c * g_a g_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntraCell {
    pub lu: f64,
    pub dl: f64,
    pub rd: f64,
    pub ur: f64,
    pub ud: f64,
    pub lr: f64,
}

impl Default for IntraCell {
    fn default() -> Self {
        Self {
            lu: 1.0,
            dl: 1.0,
            rd: 1.0,
            ur: -1.0,
            ud: 1.0,
            lr: 1.0,
        }
    }
}

impl IntraCell {
    /// The standard pattern with the `(u, r)` coefficient negated.
    /// Used to check that the verification suite notices a sign error.
    pub fn perturbed() -> Self {
        Self {
            ur: 1.0,
            ..Self::default()
        }
    }

    fn terms(&self) -> [(Mode, Mode, f64); 6] {
        use Mode::*;
        [
            (L, U, self.lu),
            (D, L, self.dl),
            (R, D, self.rd),
            (U, R, self.ur),
            (U, D, self.ud),
            (L, R, self.lr),
        ]
    }
}

/// Parameters of one Majorana Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct MajoranaModel<'a> {
    pub lattice: &'a TorusLattice,
    pub t: f64,
    pub eta: &'a GaugeConfig,
    pub alpha: BoundarySector,
    pub intra: IntraCell,
}

impl<'a> MajoranaModel<'a> {
    pub fn new(
        lattice: &'a TorusLattice,
        t: f64,
        eta: &'a GaugeConfig,
        alpha: BoundarySector,
    ) -> Self {
        Self {
            lattice,
            t,
            eta,
            alpha,
            intra: IntraCell::default(),
        }
    }

    pub fn n_modes(&self) -> usize {
        MODES_PER_SITE * self.lattice.n_sites()
    }
}

/// Assembles `A = -iH` for `model`.
pub fn build_hamiltonian(model: &MajoranaModel) -> Result<SkewMatrix> {
    model.eta.check_lattice(model.lattice)?;
    let mut a = SkewMatrix::zeros(model.n_modes());
    fill(&mut a, model, |m| m);
    Ok(a)
}

/// Writes the terms of `model` into `a` with mode `m` stored at `pos(m)`.
fn fill(a: &mut SkewMatrix, model: &MajoranaModel, pos: impl Fn(usize) -> usize) {
    let lat = model.lattice;
    let mut add = |i: usize, j: usize, c: f64| a.add(pos(i), pos(j), 0.5 * c);
    for s in 0..lat.n_sites() {
        for (p, q, c) in model.intra.terms() {
            add(mode_index(s, p), mode_index(s, q), c);
        }
    }
    for (b, bond) in lat.bonds().iter().enumerate() {
        let c = model.t * f64::from(model.eta.get(b)) * lat.sector_sign(b, model.alpha);
        match bond.dir {
            Direction::Y => add(mode_index(bond.tail, Mode::U), mode_index(bond.head, Mode::D), c),
            Direction::X => add(mode_index(bond.head, Mode::L), mode_index(bond.tail, Mode::R), c),
        }
    }
}

/// Eigenvalues of `i * m`, ascending. They come in `+-` pairs.
pub fn spectrum(m: &SkewMatrix) -> Vec<f64> {
    let n = m.dim();
    if n == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    if n % 2 == 1 {
        out.push(0.0);
        k = 1;
    }
    while k + 1 < n {
        let s = 0.5 * (sv[k] + sv[k + 1]);
        out.push(-s);
        out.push(s);
        k += 2;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `Pf(-iH_alpha)` for the four boundary sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPfaffians {
    pub pf: [SignedLog; 4],
}

impl SectorPfaffians {
    pub fn get(&self, alpha: BoundarySector) -> SignedLog {
        self.pf[alpha.index()]
    }

    pub fn sum(&self) -> SignedLog {
        SignedLog::sum(&self.pf)
    }

    /// `Pf_PP / sum_alpha Pf_alpha`, or `None` if the sum vanishes.
    pub fn pp_fraction(&self) -> Option<f64> {
        self.pf[0].div(self.sum()).map(SignedLog::to_f64)
    }

    /// `(-Pf_PP + Pf_PA + Pf_AP + Pf_AA) / sum_alpha Pf_alpha`.
    pub fn parity_ratio(&self) -> Option<f64> {
        self.pp_fraction().map(|r| 1.0 - 2.0 * r)
    }

    /// `Pf_PP / (Pf_PA + Pf_AP + Pf_AA)`.
    pub fn fugacity_ratio(&self) -> Option<f64> {
        let rest = SignedLog::sum(&self.pf[1..]);
        self.pf[0].div(rest).map(SignedLog::to_f64)
    }

    /// Sign of `Pf_PP Pf_AA / (Pf_AP Pf_PA)`, or `None` if any vanishes.
    pub fn mstop_sign(&self) -> Option<i8> {
        if self.pf.iter().any(|p| p.sign == 0) {
            return None;
        }
        Some(self.pf.iter().map(|p| p.sign).product())
    }
}

/// Reference path: four dense Pfaffians.
pub fn sector_pfaffians(lat: &TorusLattice, t: f64, eta: &GaugeConfig) -> Result<SectorPfaffians> {
    sector_pfaffians_with(lat, t, eta, IntraCell::default())
}

pub fn sector_pfaffians_with(
    lat: &TorusLattice,
    t: f64,
    eta: &GaugeConfig,
    intra: IntraCell,
) -> Result<SectorPfaffians> {
    let mut pf = [SignedLog::ZERO; 4];
    for alpha in BoundarySector::ALL {
        let model = MajoranaModel {
            intra,
            ..MajoranaModel::new(lat, t, eta, alpha)
        };
        pf[alpha.index()] = pfaffian_signed_log(&build_hamiltonian(&model)?)?;
    }
    Ok(SectorPfaffians { pf })
}

/// Closed form of the single-site sector Pfaffian.
pub fn single_site_pfaffian(t: f64, eta_xx: i8, eta_yy: i8, alpha: BoundarySector) -> f64 {
    let sx = if alpha.antiperiodic_x() { -1.0 } else { 1.0 };
    let sy = if alpha.antiperiodic_y() { -1.0 } else { 1.0 };
    let bx = t * sx * f64::from(eta_xx) + 1.0;
    let by = t * sy * f64::from(eta_yy) + 1.0;
    -0.25 * bx * by + 0.5
}

/// Computes all four sector Pfaffians with one shared elimination.
///
/// Modes not touching a seam bond are ordered first and eliminated once on
/// the periodic matrix. The sectors differ only in seam couplings, which
/// live in the trailing block, so each sector then needs a Pfaffian of the
/// small Schur complement only. Falls back to [`sector_pfaffians`] when an
/// interior pivot is too small for the restricted elimination.
#[derive(Debug, Clone)]
pub struct SectorSolver {
    lattice: TorusLattice,
    intra: IntraCell,
    /// Position of each mode in the reordered matrix.
    pos: Vec<usize>,
    n_interior: usize,
    perm_sign: i8,
    /// `(row, col, bond)` in reordered indices for every seam coupling.
    seam: Vec<(usize, usize, usize)>,
}

impl SectorSolver {
    pub fn new(lat: &TorusLattice) -> Self {
        Self::with_intra(lat, IntraCell::default())
    }

    pub fn with_intra(lat: &TorusLattice, intra: IntraCell) -> Self {
        let n = MODES_PER_SITE * lat.n_sites();
        let mut boundary = vec![false; n];
        let mut seam_pairs = Vec::new();
        for &b in lat.seam_x().iter().chain(lat.seam_y()) {
            let bond = lat.bond(b);
            let (i, j) = match bond.dir {
                Direction::Y => (mode_index(bond.tail, Mode::U), mode_index(bond.head, Mode::D)),
                Direction::X => (mode_index(bond.head, Mode::L), mode_index(bond.tail, Mode::R)),
            };
            boundary[i] = true;
            boundary[j] = true;
            seam_pairs.push((i, j, b));
        }
        let order: Vec<usize> = (0..n)
            .filter(|&m| !boundary[m])
            .chain((0..n).filter(|&m| boundary[m]))
            .collect();
        let n_interior = boundary.iter().filter(|&&b| !b).count();
        let mut pos = vec![0; n];
        for (k, &m) in order.iter().enumerate() {
            pos[m] = k;
        }
        let seam = seam_pairs
            .into_iter()
            .map(|(i, j, b)| (pos[i], pos[j], b))
            .collect();
        Self {
            lattice: lat.clone(),
            intra,
            perm_sign: permutation_sign(&pos),
            pos,
            n_interior,
            seam,
        }
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn solve(&self, t: f64, eta: &GaugeConfig) -> Result<SectorPfaffians> {
        eta.check_lattice(&self.lattice)?;
        match self.solve_schur(t, eta) {
            Some(pf) => Ok(pf),
            None => sector_pfaffians_with(&self.lattice, t, eta, self.intra),
        }
    }

    fn solve_schur(&self, t: f64, eta: &GaugeConfig) -> Option<SectorPfaffians> {
        let n = self.pos.len();
        let m = self.n_interior;
        let model = MajoranaModel {
            intra: self.intra,
            ..MajoranaModel::new(&self.lattice, t, eta, BoundarySector::PP)
        };
        let mut a = SkewMatrix::zeros(n);
        fill(&mut a, &model, |k| self.pos[k]);
        let scale = a.max_abs();
        let head = eliminate(&mut a, m, m, SCHUR_PIVOT_RTOL * scale)?;
        let schur = trailing_from_upper(&a, m);

        let mut pf = [SignedLog::ZERO; 4];
        for alpha in BoundarySector::ALL {
            let mut s = schur.clone();
            for &(i, j, b) in &self.seam {
                if self.lattice.sector_sign(b, alpha) < 0.0 {
                    // Flip t*eta/2 to -t*eta/2.
                    s.add(i - m, j - m, -t * f64::from(eta.get(b)));
                }
            }
            let tail = pfaffian_in_place(&mut s, scale);
            let mut v = head.mul(tail);
            v.sign *= self.perm_sign;
            pf[alpha.index()] = v;
        }
        Some(SectorPfaffians { pf })
    }
}

/// Sign of the permutation `k -> pos[k]`.
fn permutation_sign(pos: &[usize]) -> i8 {
    let mut seen = vec![false; pos.len()];
    let mut sign = 1;
    for start in 0..pos.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = pos[k];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_torus, gauge_transform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_eta(lat: &TorusLattice, rng: &mut ChaCha8Rng) -> GaugeConfig {
        GaugeConfig::new((0..lat.n_bonds()).map(|_| if rng.gen_bool(0.3) { -1 } else { 1 }).collect())
            .unwrap()
    }

    #[test]
    fn single_site_matrix_layout() {
        let lat = build_torus(1, 1).unwrap();
        let (t, exx, eyy) = (0.37, -1i8, 1i8);
        let eta = GaugeConfig::new(vec![exx, eyy]).unwrap();
        for alpha in BoundarySector::ALL {
            let a = build_hamiltonian(&MajoranaModel::new(&lat, t, &eta, alpha)).unwrap();
            let sx = if alpha.antiperiodic_x() { -1.0 } else { 1.0 };
            let sy = if alpha.antiperiodic_y() { -1.0 } else { 1.0 };
            let by = t * sy * f64::from(eyy) + 1.0;
            let bx = t * sx * f64::from(exx) + 1.0;
            let expected = [
                [0.0, by, -1.0, -1.0],
                [-by, 0.0, -1.0, 1.0],
                [1.0, 1.0, 0.0, -bx],
                [1.0, -1.0, bx, 0.0],
            ];
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a.get(i, j) - 0.5 * expected[i][j]).abs() < 1e-15, "{alpha} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn single_site_closed_form() {
        let lat = build_torus(1, 1).unwrap();
        for t in [0.0, 0.5, 1.0, 0.123] {
            for (exx, eyy) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                let eta = GaugeConfig::new(vec![exx, eyy]).unwrap();
                let pf = sector_pfaffians(&lat, t, &eta).unwrap();
                let mut total = 0.0;
                for alpha in BoundarySector::ALL {
                    let closed = single_site_pfaffian(t, exx, eyy, alpha);
                    assert!((pf.get(alpha).to_f64() - closed).abs() < 1e-14);
                    total += closed;
                }
                assert!((total - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(single_site_pfaffian(1.0, 1, 1, BoundarySector::PP), -0.5);
        for alpha in BoundarySector::ALL {
            assert_eq!(single_site_pfaffian(0.0, 1, -1, alpha), 0.25);
        }
    }

    #[test]
    fn zero_hopping_decouples() {
        let lat = build_torus(3, 2).unwrap();
        let eta = GaugeConfig::uniform(&lat);
        let a = build_hamiltonian(&MajoranaModel::new(&lat, 0.0, &eta, BoundarySector::AA)).unwrap();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                if i / 4 != j / 4 {
                    assert_eq!(a.get(i, j), 0.0);
                } else {
                    assert_eq!(a.get(i, j), a.get(i % 4, j % 4));
                }
            }
        }
    }

    #[test]
    fn spectrum_pairs() {
        let m = SkewMatrix::from_upper(2, |_, _| 1.5);
        let s = spectrum(&m);
        assert!((s[0] + 1.5).abs() < 1e-14 && (s[1] - 1.5).abs() < 1e-14);

        let lat = build_torus(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eta = random_eta(&lat, &mut rng);
        let a = build_hamiltonian(&MajoranaModel::new(&lat, 0.6, &eta, BoundarySector::PA)).unwrap();
        let s = spectrum(&a);
        let n = s.len();
        for k in 0..n {
            assert!((s[k] + s[n - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn clean_critical_zero_mode_small() {
        let lat = build_torus(4, 4).unwrap();
        let eta = GaugeConfig::uniform(&lat);
        let tc = 2f64.sqrt() - 1.0;
        let pp = build_hamiltonian(&MajoranaModel::new(&lat, tc, &eta, BoundarySector::PP)).unwrap();
        let min_pp = spectrum(&pp).iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(min_pp < 1e-10, "{min_pp}");
        assert!(pfaffian_signed_log(&pp).unwrap().is_zero());
        for alpha in [BoundarySector::PA, BoundarySector::AP, BoundarySector::AA] {
            let a = build_hamiltonian(&MajoranaModel::new(&lat, tc, &eta, alpha)).unwrap();
            let min = spectrum(&a).iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
            assert!(min > 1e-3, "{alpha}: {min}");
        }
    }

    #[test]
    fn fast_solver_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (lx, ly) in [(1, 1), (1, 3), (2, 2), (3, 2), (4, 4), (5, 3), (6, 6)] {
            let lat = build_torus(lx, ly).unwrap();
            let solver = SectorSolver::new(&lat);
            for _ in 0..5 {
                let eta = random_eta(&lat, &mut rng);
                let t = rng.gen_range(0.05..0.95);
                let dense = sector_pfaffians(&lat, t, &eta).unwrap();
                let fast = solver.solve(t, &eta).unwrap();
                for alpha in BoundarySector::ALL {
                    let (d, f) = (dense.get(alpha), fast.get(alpha));
                    assert_eq!(d.sign, f.sign, "{lx}x{ly} {alpha}");
                    assert!((d.log_abs - f.log_abs).abs() < 1e-9, "{lx}x{ly} {alpha}");
                }
            }
        }
    }

    #[test]
    fn parity_ratio_gauge_invariant() {
        let lat = build_torus(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eta = random_eta(&lat, &mut rng);
        let base = sector_pfaffians(&lat, 0.7, &eta).unwrap().parity_ratio().unwrap();
        for mask in 0u32..16 {
            let tau: Vec<i8> = (0..4).map(|s| if mask >> s & 1 == 1 { -1 } else { 1 }).collect();
            let g = gauge_transform(&lat, &eta, &tau).unwrap();
            let r = sector_pfaffians(&lat, 0.7, &g).unwrap().parity_ratio().unwrap();
            assert!((r - base).abs() < 1e-12);
        }
    }

    #[test]
    fn ratios_from_closed_form() {
        let pf = SectorPfaffians {
            pf: [-0.5, 0.5, 0.5, 0.5].map(SignedLog::from_f64),
        };
        assert!((pf.fugacity_ratio().unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((pf.parity_ratio().unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(pf.mstop_sign(), Some(-1));
    }

    #[test]
    fn permutation_sign_basic() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
    }
}
