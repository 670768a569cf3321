//! Torus geometry shared by every other module.
//!
//! Sites are indexed row-major, `site = y * lx + x`. Each site owns two
//! directed bonds, the x-bond to `(x + 1, y)` and the y-bond to `(x, y + 1)`,
//! with bond index `2 * site` for x and `2 * site + 1` for y. This order is
//! frozen: Pfaffian signs in [`crate::majorana`] depend on it.
//!
//! Bonds leaving the last column (row) wrap around the torus and form the
//! x-seam (y-seam). An antiperiodic boundary sector flips the coupling sign
//! on every seam bond of the corresponding direction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
}

impl Direction {
    fn offset(self) -> usize {
        match self {
            Direction::X => 0,
            Direction::Y => 1,
        }
    }
}

/// A directed nearest-neighbour bond `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub tail: usize,
    pub head: usize,
    pub dir: Direction,
    /// Whether the bond crosses the periodic identification.
    pub seam: bool,
}

/// An `lx` by `ly` square lattice with periodic identification in both
/// directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusLattice {
    lx: usize,
    ly: usize,
    bonds: Vec<Bond>,
    plaquettes: Vec<[usize; 4]>,
    seam_x: Vec<usize>,
    seam_y: Vec<usize>,
}

/// Builds the torus of `lx` columns and `ly` rows.
pub fn build_torus(lx: usize, ly: usize) -> Result<TorusLattice> {
    TorusLattice::new(lx, ly)
}

impl TorusLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::InvalidDimensions { lx, ly });
        }
        let n = lx * ly;
        let mut bonds = Vec::with_capacity(2 * n);
        let mut seam_x = Vec::with_capacity(ly);
        let mut seam_y = Vec::with_capacity(lx);
        for y in 0..ly {
            for x in 0..lx {
                let site = y * lx + x;
                let sx = x + 1 == lx;
                let sy = y + 1 == ly;
                if sx {
                    seam_x.push(bonds.len());
                }
                bonds.push(Bond {
                    tail: site,
                    head: y * lx + (x + 1) % lx,
                    dir: Direction::X,
                    seam: sx,
                });
                if sy {
                    seam_y.push(bonds.len());
                }
                bonds.push(Bond {
                    tail: site,
                    head: ((y + 1) % ly) * lx + x,
                    dir: Direction::Y,
                    seam: sy,
                });
            }
        }
        // Plaquette with lower-left corner at (x, y): bottom, left, top, right.
        let mut plaquettes = Vec::with_capacity(n);
        for y in 0..ly {
            for x in 0..lx {
                let s = y * lx + x;
                let up = ((y + 1) % ly) * lx + x;
                let right = y * lx + (x + 1) % lx;
                plaquettes.push([2 * s, 2 * s + 1, 2 * up, 2 * right + 1]);
            }
        }
        Ok(Self {
            lx,
            ly,
            bonds,
            plaquettes,
            seam_x,
            seam_y,
        })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, index: usize) -> &Bond {
        &self.bonds[index]
    }

    pub fn plaquettes(&self) -> &[[usize; 4]] {
        &self.plaquettes
    }

    /// Bonds crossing the x identification, one per row.
    pub fn seam_x(&self) -> &[usize] {
        &self.seam_x
    }

    /// Bonds crossing the y identification, one per column.
    pub fn seam_y(&self) -> &[usize] {
        &self.seam_y
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        (y % self.ly) * self.lx + (x % self.lx)
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    pub fn bond_index(&self, site: usize, dir: Direction) -> usize {
        2 * site + dir.offset()
    }

    /// The four bonds touching `site` (with repetition on 1-wide tori).
    pub fn bonds_at(&self, site: usize) -> [usize; 4] {
        let (x, y) = self.coords(site);
        let left = self.site(x + self.lx - 1, y);
        let down = self.site(x, y + self.ly - 1);
        [2 * site, 2 * site + 1, 2 * left, 2 * down + 1]
    }

    /// x-bonds of row 0: a non-contractible loop winding along x.
    pub fn loop_x(&self) -> Vec<usize> {
        (0..self.lx).map(|x| 2 * x).collect()
    }

    /// y-bonds of column 0: a non-contractible loop winding along y.
    pub fn loop_y(&self) -> Vec<usize> {
        (0..self.ly).map(|y| 2 * (y * self.lx) + 1).collect()
    }

    /// Sign multiplying the coupling of `bond` in boundary sector `sector`.
    pub fn sector_sign(&self, bond: usize, sector: BoundarySector) -> f64 {
        let b = &self.bonds[bond];
        let flip = b.seam
            && match b.dir {
                Direction::X => sector.antiperiodic_x(),
                Direction::Y => sector.antiperiodic_y(),
            };
        if flip {
            -1.0
        } else {
            1.0
        }
    }
}

/// Periodic (P) or antiperiodic (A) boundary conditions along (x, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[derive(Default)]
pub enum BoundarySector {
    #[default]
    PP,
    PA,
    AP,
    AA,
}


impl BoundarySector {
    pub const ALL: [BoundarySector; 4] = [
        BoundarySector::PP,
        BoundarySector::PA,
        BoundarySector::AP,
        BoundarySector::AA,
    ];

    pub fn from_flags(antiperiodic_x: bool, antiperiodic_y: bool) -> Self {
        match (antiperiodic_x, antiperiodic_y) {
            (false, false) => BoundarySector::PP,
            (false, true) => BoundarySector::PA,
            (true, false) => BoundarySector::AP,
            (true, true) => BoundarySector::AA,
        }
    }

    pub fn antiperiodic_x(self) -> bool {
        matches!(self, BoundarySector::AP | BoundarySector::AA)
    }

    pub fn antiperiodic_y(self) -> bool {
        matches!(self, BoundarySector::PA | BoundarySector::AA)
    }

    /// Position in [`BoundarySector::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BoundarySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundarySector::PP => "PP",
            BoundarySector::PA => "PA",
            BoundarySector::AP => "AP",
            BoundarySector::AA => "AA",
        };
        f.write_str(s)
    }
}

impl FromStr for BoundarySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PP" => Ok(BoundarySector::PP),
            "PA" => Ok(BoundarySector::PA),
            "AP" => Ok(BoundarySector::AP),
            "AA" => Ok(BoundarySector::AA),
            other => Err(Error::InvalidArgument(format!("unknown sector {other:?}"))),
        }
    }
}

/// A Z2 gauge field: one sign per bond in lattice bond order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaugeConfig(Vec<i8>);

impl GaugeConfig {
    pub fn new(eta: Vec<i8>) -> Result<Self> {
        if let Some((bond, &value)) = eta.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::InvalidGauge { bond, value });
        }
        Ok(Self(eta))
    }

    /// All bonds ferromagnetic.
    pub fn uniform(lat: &TorusLattice) -> Self {
        Self(vec![1; lat.n_bonds()])
    }

    /// Decodes the low `n_bonds` bits of `mask`; bit `b` set means `eta_b = -1`.
    pub fn from_mask(lat: &TorusLattice, mask: u64) -> Self {
        Self((0..lat.n_bonds()).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, bond: usize) -> i8 {
        self.0[bond]
    }

    pub fn n_negative(&self) -> usize {
        self.0.iter().filter(|&&e| e < 0).count()
    }

    pub fn check_lattice(&self, lat: &TorusLattice) -> Result<()> {
        if self.0.len() != lat.n_bonds() {
            return Err(Error::LengthMismatch {
                what: "gauge config",
                expected: lat.n_bonds(),
                got: self.0.len(),
            });
        }
        Ok(())
    }

    /// Product of `eta` over a list of bonds.
    pub fn product(&self, bonds: &[usize]) -> i8 {
        bonds.iter().map(|&b| self.0[b]).product()
    }

    /// Plaquette fluxes followed by the two non-contractible Wilson loops.
    pub fn wilson_loops(&self, lat: &TorusLattice) -> Vec<i8> {
        let mut out: Vec<i8> = lat.plaquettes().iter().map(|p| self.product(p)).collect();
        out.push(self.product(&lat.loop_x()));
        out.push(self.product(&lat.loop_y()));
        out
    }
}

/// Applies the site gauge transformation `eta_ij -> tau_i eta_ij tau_j`.
pub fn gauge_transform(lat: &TorusLattice, eta: &GaugeConfig, tau: &[i8]) -> Result<GaugeConfig> {
    eta.check_lattice(lat)?;
    if tau.len() != lat.n_sites() {
        return Err(Error::LengthMismatch {
            what: "gauge transformation",
            expected: lat.n_sites(),
            got: tau.len(),
        });
    }
    let out = lat
        .bonds()
        .iter()
        .zip(eta.as_slice())
        .map(|(b, &e)| tau[b.tail] * e * tau[b.head])
        .collect();
    GaugeConfig::new(out)
}
