//! Exact coherent information of small stabilizer codes under Pauli noise.
//!
//! Paulis are stored as symplectic bitmasks (`x`, `z`) on at most 64 qubits.
//! A Pauli error is summarised by its syndrome and by its commutation with
//! every logical operator. Enumerating all error patterns gives the joint
//! distribution of (syndrome, logical class), from which the coherent
//! information is `k - H(logical | syndrome)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::TorusLattice;

/// Largest number of error patterns enumerated by [`exact_ci`].
pub const MAX_PATTERNS: u64 = 1 << 24;
const CHANNEL_TOL: f64 = 1e-12;

/// A Pauli operator up to phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Pauli {
    pub x: u64,
    pub z: u64,
}

impl Pauli {
    pub const IDENTITY: Pauli = Pauli { x: 0, z: 0 };

    pub fn x_on(qubits: &[usize]) -> Self {
        Pauli { x: mask(qubits), z: 0 }
    }

    pub fn z_on(qubits: &[usize]) -> Self {
        Pauli { x: 0, z: mask(qubits) }
    }

    pub fn single(qubit: usize, kind: char) -> Self {
        let b = 1u64 << qubit;
        match kind {
            'X' => Pauli { x: b, z: 0 },
            'Z' => Pauli { x: 0, z: b },
            'Y' => Pauli { x: b, z: b },
            _ => Pauli::IDENTITY,
        }
    }

    pub fn commutes(self, other: Pauli) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    pub fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support(self) -> u64 {
        self.x | self.z
    }

    fn packed(self) -> u128 {
        u128::from(self.x) | (u128::from(self.z) << 64)
    }

    /// Renders the operator on `n` qubits, e.g. `XIZY`.
    pub fn to_label(self, n: usize) -> String {
        (0..n)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }

    pub fn from_label(label: &str) -> Result<Self> {
        if label.len() > 64 {
            return Err(Error::InvalidArgument(format!("Pauli label longer than 64: {label}")));
        }
        let mut p = Pauli::IDENTITY;
        for (q, c) in label.chars().enumerate() {
            match c {
                'I' => {}
                'X' | 'Y' | 'Z' => {
                    let s = Pauli::single(q, c);
                    p = p * s;
                }
                _ => return Err(Error::InvalidArgument(format!("bad Pauli letter {c:?}"))),
            }
        }
        Ok(p)
    }
}

impl std::ops::Mul for Pauli {
    type Output = Pauli;

    fn mul(self, rhs: Pauli) -> Pauli {
        Pauli {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        }
    }
}

fn mask(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0, |m, &q| m | (1u64 << q))
}

/// Row-reduces `rows` over GF(2) and returns the reduced basis, sorted by
/// pivot so that membership tests can reduce greedily.
fn reduced_basis(rows: impl IntoIterator<Item = u128>) -> Vec<u128> {
    let mut basis: Vec<u128> = Vec::new();
    for mut r in rows {
        for &b in &basis {
            let pivot = 127 - b.leading_zeros();
            if (r >> pivot) & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            let pivot = 127 - r.leading_zeros();
            for b in basis.iter_mut() {
                if (*b >> pivot) & 1 == 1 {
                    *b ^= r;
                }
            }
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

fn in_span(basis: &[u128], mut r: u128) -> bool {
    for &b in basis {
        let pivot = 127 - b.leading_zeros();
        if (r >> pivot) & 1 == 1 {
            r ^= b;
        }
    }
    r == 0
}

/// A stabilizer code with independent generators and `k` logical pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    stabilizers: Vec<Pauli>,
    logicals: Vec<(Pauli, Pauli)>,
}

impl StabilizerCode {
    /// Validates commutation relations and the rank count `n - m = k`.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        stabilizers: Vec<Pauli>,
        logicals: Vec<(Pauli, Pauli)>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCode(msg));
        if n == 0 || n > 64 {
            return bad(format!("qubit count {n} outside 1..=64"));
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let outside = stabilizers
            .iter()
            .chain(logicals.iter().flat_map(|(a, b)| [a, b]))
            .any(|p| p.support() & !full != 0);
        if outside {
            return bad(format!("operator acts outside {n} qubits"));
        }
        for (i, a) in stabilizers.iter().enumerate() {
            for (j, b) in stabilizers.iter().enumerate().skip(i + 1) {
                if !a.commutes(*b) {
                    return bad(format!("generators {i} and {j} anticommute"));
                }
            }
            for (l, (lx, lz)) in logicals.iter().enumerate() {
                if !a.commutes(*lx) || !a.commutes(*lz) {
                    return bad(format!("generator {i} anticommutes with logical pair {l}"));
                }
            }
        }
        for (i, (xi, zi)) in logicals.iter().enumerate() {
            for (j, (xj, zj)) in logicals.iter().enumerate() {
                if xi.commutes(*zj) == (i == j) {
                    return bad(format!("logical X{i} and Z{j} have wrong commutation"));
                }
                if !xi.commutes(*xj) || !zi.commutes(*zj) {
                    return bad(format!("logicals {i} and {j} of equal type anticommute"));
                }
            }
        }
        let rank = reduced_basis(stabilizers.iter().map(|p| p.packed())).len();
        if rank != stabilizers.len() {
            return bad(format!("{} generators have rank {rank}", stabilizers.len()));
        }
        if n - rank != logicals.len() {
            return bad(format!(
                "n - rank = {} but {} logical pairs given",
                n - rank,
                logicals.len()
            ));
        }
        Ok(Self {
            name: name.into(),
            n,
            stabilizers,
            logicals,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_phys(&self) -> usize {
        self.n
    }

    pub fn k_logical(&self) -> usize {
        self.logicals.len()
    }

    pub fn stabilizers(&self) -> &[Pauli] {
        &self.stabilizers
    }

    pub fn logicals(&self) -> &[(Pauli, Pauli)] {
        &self.logicals
    }

    pub fn is_css(&self) -> bool {
        self.stabilizers.iter().all(|p| p.x == 0 || p.z == 0)
    }

    /// Syndrome bits followed by logical-class bits, packed into one key.
    fn key(&self, e: Pauli) -> u64 {
        let mut key = 0u64;
        for (i, s) in self.stabilizers.iter().enumerate() {
            if !s.commutes(e) {
                key |= 1 << i;
            }
        }
        let m = self.stabilizers.len();
        for (i, (lx, lz)) in self.logicals.iter().enumerate() {
            if !lz.commutes(e) {
                key |= 1 << (m + 2 * i);
            }
            if !lx.commutes(e) {
                key |= 1 << (m + 2 * i + 1);
            }
        }
        key
    }

    /// Writes the plain-text fixture format read by [`parse_code`].
    pub fn to_fixture(&self) -> String {
        let row = |p: &Pauli| {
            let bits = |m: u64| (0..self.n).map(|q| if (m >> q) & 1 == 1 { '1' } else { '0' }).collect::<String>();
            format!("{}|{}\n", bits(p.x), bits(p.z))
        };
        let mut out = format!("name {}\nn {}\nstabilizers\n", self.name, self.n);
        for s in &self.stabilizers {
            out.push_str(&row(s));
        }
        out.push_str("logicals\n");
        for (x, z) in &self.logicals {
            out.push_str(&row(x));
            out.push_str(&row(z));
        }
        out
    }
}

/// Parses the fixture format:
///
/// ```text
/// # comment
/// name steane
/// n 7
/// stabilizers
/// 1111000|0000000
/// logicals
/// 1111111|0000000
/// 0000000|1111111
/// ```
///
/// Each row lists the X part and Z part of one operator, qubit 0 first.
/// Logicals come in consecutive (X, Z) pairs.
pub fn parse_code(text: &str) -> Result<StabilizerCode> {
    #[derive(PartialEq)]
    enum Section {
        Header,
        Stabilizers,
        Logicals,
    }
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut name = String::from("fixture");
    let mut n: Option<usize> = None;
    let mut section = Section::Header;
    let mut stabs = Vec::new();
    let mut logs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "stabilizers" => {
                section = Section::Stabilizers;
                continue;
            }
            "logicals" => {
                section = Section::Logicals;
                continue;
            }
            _ => {}
        }
        if section == Section::Header {
            let mut parts = line.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap_or("");
            let value = parts.next().map(str::trim).unwrap_or("");
            match key {
                "name" => name = value.to_string(),
                "n" => n = Some(value.parse().map_err(|_| err(line_no, "bad qubit count"))?),
                _ => return Err(err(line_no, "expected `name`, `n` or a section header")),
            }
            continue;
        }
        let n = n.ok_or_else(|| err(line_no, "qubit count `n` must precede operators"))?;
        let (xs, zs) = line
            .split_once('|')
            .ok_or_else(|| err(line_no, "expected `xbits|zbits`"))?;
        let bits = |s: &str| -> Result<u64> {
            let s = s.trim();
            if s.len() != n {
                return Err(err(line_no, &format!("expected {n} bits, got {}", s.len())));
            }
            s.chars().enumerate().try_fold(0u64, |m, (q, c)| match c {
                '0' => Ok(m),
                '1' => Ok(m | 1 << q),
                _ => Err(err(line_no, "bits must be 0 or 1")),
            })
        };
        let p = Pauli {
            x: bits(xs)?,
            z: bits(zs)?,
        };
        match section {
            Section::Stabilizers => stabs.push(p),
            _ => logs.push(p),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing qubit count"))?;
    if logs.len() % 2 != 0 {
        return Err(err(0, "logicals must come in (X, Z) pairs"));
    }
    let pairs = logs.chunks(2).map(|c| (c[0], c[1])).collect();
    StabilizerCode::new(name, n, stabs, pairs)
}

/// Toric code on the bonds of an `lx` by `ly` torus. Stars are Z-type and
/// plaquettes X-type; one of each is dropped to keep generators independent.
pub fn toric_code(lx: usize, ly: usize) -> Result<StabilizerCode> {
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidDimensions { lx, ly });
    }
    let lat = TorusLattice::new(lx, ly)?;
    let n = lat.n_bonds();
    if n > 64 {
        return Err(Error::Infeasible {
            what: "toric code qubits",
            size: n,
            cap: 64,
        });
    }
    let mut stabs: Vec<Pauli> = (1..lat.n_sites()).map(|s| Pauli::z_on(&lat.bonds_at(s))).collect();
    stabs.extend(lat.plaquettes().iter().skip(1).map(|p| Pauli::x_on(p)));
    let z1: Vec<usize> = (0..ly).map(|y| 2 * lat.site(0, y)).collect();
    let z2: Vec<usize> = (0..lx).map(|x| 2 * lat.site(x, 0) + 1).collect();
    let logicals = vec![
        (Pauli::x_on(&lat.loop_x()), Pauli::z_on(&z1)),
        (Pauli::x_on(&lat.loop_y()), Pauli::z_on(&z2)),
    ];
    StabilizerCode::new(format!("toric-{lx}x{ly}"), n, stabs, logicals)
}

/// The trivial one-qubit code.
pub fn single_qubit() -> StabilizerCode {
    StabilizerCode::new("single-qubit", 1, vec![], vec![(Pauli::x_on(&[0]), Pauli::z_on(&[0]))])
        .expect("valid code")
}

/// Rotated surface code of distance 1 or 3.
pub fn rotated_surface(d: usize) -> Result<StabilizerCode> {
    match d {
        1 => Ok(single_qubit()),
        3 => {
            let q = |r: usize, c: usize| 3 * r + c;
            let plaquette = |i: usize, j: usize| -> Vec<usize> {
                let mut v = Vec::new();
                for r in i.saturating_sub(1)..=i.min(2) {
                    for c in j.saturating_sub(1)..=j.min(2) {
                        v.push(q(r, c));
                    }
                }
                v
            };
            let mut stabs = Vec::new();
            for (i, j) in [(1, 1), (2, 2), (0, 2), (3, 1)] {
                stabs.push(Pauli::x_on(&plaquette(i, j)));
            }
            for (i, j) in [(1, 2), (2, 1), (1, 0), (2, 3)] {
                stabs.push(Pauli::z_on(&plaquette(i, j)));
            }
            let logical = (Pauli::x_on(&[q(0, 0), q(1, 0), q(2, 0)]), Pauli::z_on(&[q(0, 0), q(0, 1), q(0, 2)]));
            StabilizerCode::new("rotated-surface-3", 9, stabs, vec![logical])
        }
        _ => Err(Error::InvalidArgument(format!(
            "rotated surface fixture available for d in {{1, 3}}, got {d}"
        ))),
    }
}

const STEANE_FACES: [&[usize]; 3] = [&[0, 1, 2, 3], &[1, 2, 4, 5], &[2, 3, 5, 6]];

const COLOR5_FACES: [&[usize]; 9] = [
    &[1, 2, 5, 6],
    &[3, 4, 7, 8],
    &[0, 1, 5, 9],
    &[2, 3, 6, 7, 10, 11],
    &[5, 6, 9, 10, 12, 13],
    &[7, 8, 11, 14],
    &[10, 11, 13, 14, 15, 16],
    &[12, 13, 15, 17],
    &[15, 16, 17, 18],
];

/// Triangular 6.6.6 color code of distance 1, 3 or 5.
pub fn color_code(d: usize) -> Result<StabilizerCode> {
    let (n, faces): (usize, &[&[usize]]) = match d {
        1 => return Ok(single_qubit()),
        3 => (7, &STEANE_FACES),
        5 => (19, &COLOR5_FACES),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "color code fixture available for d in {{1, 3, 5}}, got {d}"
            )))
        }
    };
    let mut stabs: Vec<Pauli> = faces.iter().map(|f| Pauli::x_on(f)).collect();
    stabs.extend(faces.iter().map(|f| Pauli::z_on(f)));
    let all: Vec<usize> = (0..n).collect();
    let logical = (Pauli::x_on(&all), Pauli::z_on(&all));
    StabilizerCode::new(format!("color-{d}"), n, stabs, vec![logical])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Bitflip,
    Phase,
    /// Independent bit flip and phase flip at the same rate.
    BitflipPhase,
    Depolarizing,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Bitflip => "bitflip",
            ChannelKind::Phase => "phase",
            ChannelKind::BitflipPhase => "bitflip+phase",
            ChannelKind::Depolarizing => "depolarizing",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip" => Ok(ChannelKind::Bitflip),
            "phase" => Ok(ChannelKind::Phase),
            "bitflip+phase" | "bitflip-phase" => Ok(ChannelKind::BitflipPhase),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::InvalidArgument(format!("unknown channel {other:?}"))),
        }
    }
}

/// Identical single-qubit Pauli noise on every qubit, stored as the
/// weights of `[I, X, Y, Z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel {
    weights: [f64; 4],
}

impl PauliChannel {
    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::RateOutOfRange(p));
        }
        let q = 1.0 - p;
        let weights = match kind {
            ChannelKind::Bitflip => [q, p, 0.0, 0.0],
            ChannelKind::Phase => [q, 0.0, 0.0, p],
            ChannelKind::BitflipPhase => [q * q, p * q, p * p, p * q],
            ChannelKind::Depolarizing => [q, p / 3.0, p / 3.0, p / 3.0],
        };
        Self::from_weights(weights)
    }

    /// Arbitrary weights for `[I, X, Y, Z]`; they must be non-negative and
    /// sum to one.
    pub fn from_weights(weights: [f64; 4]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > CHANNEL_TOL {
            return Err(Error::UnnormalizedChannel(sum));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }
}

/// Joint distribution of (syndrome, logical class), sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetDistribution {
    n_syndrome_bits: usize,
    k: usize,
    probs: Vec<(u64, f64)>,
}

impl CosetDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().map(|(_, q)| q).sum()
    }

    fn syndrome_marginal(&self) -> Vec<f64> {
        let mask = (1u64 << self.n_syndrome_bits) - 1;
        let mut m: BTreeMap<u64, f64> = BTreeMap::new();
        for &(key, q) in &self.probs {
            *m.entry(key & mask).or_default() += q;
        }
        m.into_values().collect()
    }

    fn joint(&self) -> Vec<f64> {
        self.probs.iter().map(|&(_, q)| q).collect()
    }

    pub fn coherent_information(&self) -> f64 {
        self.k as f64 - (shannon(&self.joint()) - shannon(&self.syndrome_marginal()))
    }

    pub fn renyi_coherent_information(&self, order: u32) -> f64 {
        self.k as f64 - (renyi(&self.joint(), order) - renyi(&self.syndrome_marginal(), order))
    }
}

fn shannon(q: &[f64]) -> f64 {
    -q.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn renyi(q: &[f64], order: u32) -> f64 {
    let s: f64 = q.iter().map(|&x| x.powi(order as i32)).sum();
    s.log2() / (1.0 - f64::from(order))
}

/// Enumerates every error pattern with nonzero weight.
pub fn coset_distribution(code: &StabilizerCode, channel: &PauliChannel) -> Result<CosetDistribution> {
    let n = code.n_phys();
    let letters = [Pauli::IDENTITY, Pauli { x: 1, z: 0 }, Pauli { x: 1, z: 1 }, Pauli { x: 0, z: 1 }];
    let w = channel.weights();
    // Per qubit: (key contribution, weight) for each Pauli with nonzero weight.
    let options: Vec<Vec<(u64, f64)>> = (0..n)
        .map(|q| {
            (0..4)
                .filter(|&a| w[a] > 0.0)
                .map(|a| {
                    let e = Pauli {
                        x: letters[a].x << q,
                        z: letters[a].z << q,
                    };
                    (code.key(e), w[a])
                })
                .collect()
        })
        .collect();
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .filter(|&t| t <= MAX_PATTERNS)
        .ok_or(Error::Infeasible {
            what: "Pauli error patterns",
            size: options.iter().fold(1usize, |acc, o| acc.saturating_mul(o.len())),
            cap: MAX_PATTERNS as usize,
        })?;

    // Split on leading qubits so each task enumerates a fixed suffix.
    let mut split = 0;
    let mut prefixes = 1u64;
    while split < n && prefixes < 256 && total / prefixes > 1024 {
        prefixes *= options[split].len() as u64;
        split += 1;
    }
    let (head, tail) = options.split_at(split);
    let partials: Vec<HashMap<u64, f64>> = (0..prefixes)
        .into_par_iter()
        .map(|mut idx| {
            let mut key = 0u64;
            let mut weight = 1.0;
            for o in head.iter().rev() {
                let (k, w) = o[(idx % o.len() as u64) as usize];
                idx /= o.len() as u64;
                key ^= k;
                weight *= w;
            }
            let mut acc = HashMap::new();
            enumerate_suffix(tail, key, weight, &mut acc);
            acc
        })
        .collect();

    let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
    for part in partials {
        let mut entries: Vec<(u64, f64)> = part.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        for (k, q) in entries {
            *merged.entry(k).or_default() += q;
        }
    }
    Ok(CosetDistribution {
        n_syndrome_bits: code.stabilizers().len(),
        k: code.k_logical(),
        probs: merged.into_iter().collect(),
    })
}

fn enumerate_suffix(options: &[Vec<(u64, f64)>], key: u64, weight: f64, acc: &mut HashMap<u64, f64>) {
    match options.split_first() {
        None => *acc.entry(key).or_default() += weight,
        Some((first, rest)) => {
            for &(k, w) in first {
                enumerate_suffix(rest, key ^ k, weight * w, acc);
            }
        }
    }
}

/// Coherent information `k - H(logical | syndrome)` in bits.
pub fn exact_ci(code: &StabilizerCode, channel: &PauliChannel) -> Result<f64> {
    Ok(coset_distribution(code, channel)?.coherent_information())
}

/// Renyi-`order` coherent information for `order` in {2, 3}.
pub fn renyi_ci(code: &StabilizerCode, channel: &PauliChannel, order: u32) -> Result<f64> {
    if !(2..=3).contains(&order) {
        return Err(Error::UnsupportedRenyiIndex(order));
    }
    Ok(coset_distribution(code, channel)?.renyi_coherent_information(order))
}

/// Outcome of a Knill-Laflamme check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KlReport {
    pub correctable: bool,
    /// A pair `(E_a, E_b)` whose product acts as a nontrivial logical.
    pub witness: Option<(Pauli, Pauli)>,
}

/// Checks the Knill-Laflamme condition for `errors` together with the
/// identity. A product `E_a E_b` is harmless if it anticommutes with some
/// generator or lies in the stabilizer group.
pub fn kl_check(code: &StabilizerCode, errors: &[Pauli]) -> KlReport {
    let basis = reduced_basis(code.stabilizers().iter().map(|p| p.packed()));
    let mut ops = vec![Pauli::IDENTITY];
    ops.extend_from_slice(errors);
    for (i, &a) in ops.iter().enumerate() {
        for &b in &ops[i..] {
            let e = a * b;
            let detected = code.stabilizers().iter().any(|s| !s.commutes(e));
            if !detected && !in_span(&basis, e.packed()) {
                return KlReport {
                    correctable: false,
                    witness: Some((a, b)),
                };
            }
        }
    }
    KlReport {
        correctable: true,
        witness: None,
    }
}

/// All single-qubit Paulis on `n` qubits.
pub fn weight_one_errors(n: usize) -> Vec<Pauli> {
    (0..n)
        .flat_map(|q| ['X', 'Y', 'Z'].map(|c| Pauli::single(q, c)))
        .collect()
}

/// Locates where the exact CI curves of two codes cross by bisection.
pub fn find_crossing(
    a: &StabilizerCode,
    b: &StabilizerCode,
    kind: ChannelKind,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let diff = |p: f64| -> Result<f64> {
        let ch = PauliChannel::new(kind, p)?;
        Ok(exact_ci(b, &ch)? - exact_ci(a, &ch)?)
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = diff(lo)?;
    let f_hi = diff(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket {
            quantity: format!("{} vs {} CI", a.name(), b.name()),
            lo,
            hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = diff(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;
    use crate::spin_oracle::{exact_full_ci, rbim_renyi_ci};
    use nalgebra::{DMatrix, DVector, SymmetricEigen};

    fn h2(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
        }
    }

    #[test]
    fn toric_structure() {
        let c = toric_code(2, 2).unwrap();
        assert_eq!((c.n_phys(), c.stabilizers().len(), c.k_logical()), (8, 6, 2));
        let (x1, _) = c.logicals()[0];
        let (_, z1) = c.logicals()[0];
        let (_, z2) = c.logicals()[1];
        assert!(!x1.commutes(z1));
        assert!(x1.commutes(z2));
        assert!(toric_code(1, 3).is_err());
        for (lx, ly) in [(3, 2), (3, 4), (4, 4)] {
            assert_eq!(toric_code(lx, ly).unwrap().k_logical(), 2);
        }
    }

    #[test]
    fn fixtures_are_valid() {
        let surf = rotated_surface(3).unwrap();
        assert_eq!((surf.n_phys(), surf.k_logical()), (9, 1));
        let steane = color_code(3).unwrap();
        assert_eq!((steane.n_phys(), steane.k_logical()), (7, 1));
        let c5 = color_code(5).unwrap();
        assert_eq!((c5.n_phys(), c5.k_logical()), (19, 1));
        assert!(color_code(7).is_err());
        assert!(rotated_surface(5).is_err());
    }

    /// Smallest pure-X or pure-Z logical operator, which is the distance
    /// of a CSS code.
    fn min_logical_weight(code: &StabilizerCode) -> u32 {
        let n = code.n_phys();
        let basis = reduced_basis(code.stabilizers().iter().map(|p| p.packed()));
        let mut best = u32::MAX;
        for m in 1u64..1 << n {
            if m.count_ones() >= best {
                continue;
            }
            for p in [Pauli { x: m, z: 0 }, Pauli { x: 0, z: m }] {
                if code.stabilizers().iter().all(|s| s.commutes(p)) && !in_span(&basis, p.packed()) {
                    best = m.count_ones();
                }
            }
        }
        best
    }

    #[test]
    fn fixture_distances() {
        assert_eq!(min_logical_weight(&rotated_surface(3).unwrap()), 3);
        assert_eq!(min_logical_weight(&color_code(3).unwrap()), 3);
        assert_eq!(min_logical_weight(&color_code(5).unwrap()), 5);
        assert_eq!(min_logical_weight(&toric_code(2, 2).unwrap()), 2);
    }

    #[test]
    fn rejects_bad_codes() {
        let anti = StabilizerCode::new("bad", 2, vec![Pauli::x_on(&[0]), Pauli::z_on(&[0])], vec![]);
        assert!(matches!(anti, Err(Error::InvalidCode(_))));
        let dependent = StabilizerCode::new(
            "bad",
            3,
            vec![Pauli::z_on(&[0, 1]), Pauli::z_on(&[1, 2]), Pauli::z_on(&[0, 2])],
            vec![],
        );
        assert!(matches!(dependent, Err(Error::InvalidCode(_))));
        let wrong_k = StabilizerCode::new("bad", 2, vec![], vec![(Pauli::x_on(&[0]), Pauli::z_on(&[0]))]);
        assert!(matches!(wrong_k, Err(Error::InvalidCode(_))));
    }

    #[test]
    fn channel_validation() {
        assert!(PauliChannel::new(ChannelKind::Bitflip, 1.2).is_err());
        assert!(matches!(
            PauliChannel::from_weights([0.5, 0.1, 0.1, 0.1]),
            Err(Error::UnnormalizedChannel(_))
        ));
        for kind in [ChannelKind::Bitflip, ChannelKind::Phase, ChannelKind::BitflipPhase, ChannelKind::Depolarizing] {
            let w = PauliChannel::new(kind, 0.3).unwrap().weights();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(kind.to_string().parse::<ChannelKind>().unwrap(), kind);
        }
    }

    #[test]
    fn single_qubit_closed_forms() {
        let c = single_qubit();
        for i in 0..=50 {
            let p = i as f64 / 100.0;
            let ch = PauliChannel::new(ChannelKind::BitflipPhase, p).unwrap();
            let ci = exact_ci(&c, &ch).unwrap();
            assert!((ci - (1.0 - 2.0 * h2(p))).abs() < 1e-12);
            for n in [2u32, 3] {
                let r = renyi_ci(&c, &ch, n).unwrap();
                let e = 2.0 / f64::from(n - 1) * ((1.0 - p).powi(n as i32) + p.powi(n as i32)).log2() + 1.0;
                assert!((r - e).abs() < 1e-12);
            }
        }
        let half = PauliChannel::new(ChannelKind::BitflipPhase, 0.5).unwrap();
        assert!((renyi_ci(&c, &half, 2).unwrap() + 1.0).abs() < 1e-12);
        assert!(renyi_ci(&c, &half, 4).is_err());
    }

    #[test]
    fn toric_matches_spin_oracle() {
        let code = toric_code(2, 2).unwrap();
        let lat = build_torus(2, 2).unwrap();
        let clean = PauliChannel::new(ChannelKind::BitflipPhase, 0.0).unwrap();
        assert!((exact_ci(&code, &clean).unwrap() - 2.0).abs() < 1e-15);
        for p in [0.05, 0.1, 0.15] {
            let ch = PauliChannel::new(ChannelKind::BitflipPhase, p).unwrap();
            let a = exact_ci(&code, &ch).unwrap();
            let b = exact_full_ci(&lat, p).unwrap();
            assert!((a - b).abs() < 1e-9, "p={p}: {a} vs {b}");
            let r = renyi_ci(&code, &ch, 2).unwrap();
            let s = rbim_renyi_ci(&lat, p, 2).unwrap();
            assert!((r - s).abs() < 1e-9, "p={p}: {r} vs {s}");
        }
    }

    #[test]
    fn css_decomposition() {
        for code in [toric_code(2, 2).unwrap(), rotated_surface(3).unwrap(), color_code(3).unwrap()] {
            assert!(code.is_css());
            for p in [0.03, 0.12, 0.3] {
                let joint = exact_ci(&code, &PauliChannel::new(ChannelKind::BitflipPhase, p).unwrap()).unwrap();
                let x = exact_ci(&code, &PauliChannel::new(ChannelKind::Bitflip, p).unwrap()).unwrap();
                let z = exact_ci(&code, &PauliChannel::new(ChannelKind::Phase, p).unwrap()).unwrap();
                assert!((joint - (x + z - code.k_logical() as f64)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ci_bounded_and_monotone() {
        for code in [toric_code(2, 2).unwrap(), rotated_surface(3).unwrap()] {
            let k = code.k_logical() as f64;
            let mut prev = f64::INFINITY;
            for i in 0..=20 {
                let p = 0.5 * i as f64 / 20.0;
                let ci = exact_ci(&code, &PauliChannel::new(ChannelKind::Depolarizing, p).unwrap()).unwrap();
                assert!(ci <= k + 1e-12 && ci >= -k - 1e-12);
                assert!(ci <= prev + 1e-12);
                prev = ci;
            }
        }
    }

    #[test]
    fn knill_laflamme() {
        let c = toric_code(2, 2).unwrap();
        assert!(kl_check(&c, &[]).correctable);
        for e in &weight_one_errors(8) {
            assert!(kl_check(&c, std::slice::from_ref(e)).correctable);
        }
        let (x1, _) = c.logicals()[0];
        let r = kl_check(&c, &[x1]);
        assert!(!r.correctable);
        assert_eq!(r.witness, Some((Pauli::IDENTITY, x1)));
        let steane = color_code(3).unwrap();
        assert!(kl_check(&steane, &weight_one_errors(7)).correctable);
        let s = c.stabilizers()[0];
        assert!(kl_check(&c, &[s]).correctable);
    }

    #[test]
    fn fixture_round_trip() {
        for code in [toric_code(2, 3).unwrap(), rotated_surface(3).unwrap(), color_code(5).unwrap()] {
            let text = code.to_fixture();
            assert_eq!(parse_code(&text).unwrap(), code);
        }
        let err = parse_code("n 2\nstabilizers\n10|0\n");
        assert!(matches!(err, Err(Error::Parse { line: 3, .. })));
        assert!(parse_code("n 2\nlogicals\n10|00\n").is_err());
    }

    #[test]
    fn pauli_labels() {
        let p = Pauli::from_label("XIZY").unwrap();
        assert_eq!(p.to_label(4), "XIZY");
        assert_eq!(p.weight(), 3);
        assert!(Pauli::from_label("XQ").is_err());
    }

    /// Builds `|Phi> = 2^{-k/2} sum_j |j>_R |j_L>` for a CSS code as a real vector
    /// with the reference in the high bits.
    fn encoded_state(code: &StabilizerCode) -> DVector<f64> {
        let n = code.n_phys();
        let k = code.k_logical();
        let dim = 1usize << n;
        let apply = |p: Pauli, v: &DVector<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(dim);
            for b in 0..dim {
                let sign = if ((b as u64) & p.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[b ^ p.x as usize] += sign * v[b];
            }
            out
        };
        let mut zero = DVector::zeros(dim);
        zero[0] = 1.0;
        let project = |v: DVector<f64>, p: Pauli| -> DVector<f64> { (apply(p, &v) + &v) * 0.5 };
        let mut v = zero;
        for &s in code.stabilizers() {
            v = project(v, s);
        }
        for &(_, z) in code.logicals() {
            v = project(v, z);
        }
        let v = &v / v.norm();
        let mut phi = DVector::zeros(dim << k);
        for j in 0..1usize << k {
            let mut w = v.clone();
            for (i, &(x, _)) in code.logicals().iter().enumerate() {
                if (j >> i) & 1 == 1 {
                    w = apply(x, &w);
                }
            }
            for b in 0..dim {
                phi[(j << n) | b] = w[b] / f64::from(1u32 << k).sqrt();
            }
        }
        phi
    }

    fn von_neumann(rho: DMatrix<f64>) -> f64 {
        shannon(&SymmetricEigen::new(rho).eigenvalues.iter().map(|&x| x.max(0.0)).collect::<Vec<_>>())
    }

    fn density_matrix_ci(code: &StabilizerCode, channel: &PauliChannel) -> f64 {
        let n = code.n_phys();
        let k = code.k_logical();
        let dim = 1usize << n;
        let phi = encoded_state(code);
        let w = channel.weights();
        let mut rho = DMatrix::zeros(dim << k, dim << k);
        for pattern in 0..4usize.pow(n as u32) {
            let mut e = Pauli::IDENTITY;
            let mut weight = 1.0;
            for q in 0..n {
                let a = (pattern >> (2 * q)) & 3;
                weight *= w[a];
                e = e * Pauli::single(q, ['I', 'X', 'Y', 'Z'][a]);
            }
            if weight == 0.0 {
                continue;
            }
            let mut v = DVector::zeros(dim << k);
            for idx in 0..dim << k {
                let b = idx & (dim - 1);
                let sign = if ((b as u64) & e.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                v[idx ^ e.x as usize] += sign * phi[idx];
            }
            rho += weight * &v * v.transpose();
        }
        let mut rho_q = DMatrix::zeros(dim, dim);
        for j in 0..1usize << k {
            let off = j << n;
            rho_q += rho.view((off, off), (dim, dim));
        }
        von_neumann(rho_q) - von_neumann(rho)
    }

    #[test]
    fn matches_density_matrix() {
        let rep3 = StabilizerCode::new(
            "rep3",
            3,
            vec![Pauli::z_on(&[0, 1]), Pauli::z_on(&[1, 2])],
            vec![(Pauli::x_on(&[0, 1, 2]), Pauli::z_on(&[0]))],
        )
        .unwrap();
        let four = StabilizerCode::new(
            "422",
            4,
            vec![Pauli::x_on(&[0, 1, 2, 3]), Pauli::z_on(&[0, 1, 2, 3])],
            vec![
                (Pauli::x_on(&[0, 1]), Pauli::z_on(&[0, 2])),
                (Pauli::x_on(&[0, 2]), Pauli::z_on(&[0, 1])),
            ],
        )
        .unwrap();
        for code in [single_qubit(), rep3, four] {
            for kind in [ChannelKind::Bitflip, ChannelKind::BitflipPhase, ChannelKind::Depolarizing] {
                for p in [0.07, 0.2] {
                    let ch = PauliChannel::new(kind, p).unwrap();
                    let a = exact_ci(&code, &ch).unwrap();
                    let b = density_matrix_ci(&code, &ch);
                    assert!((a - b).abs() < 1e-9, "{} {kind} p={p}: {a} vs {b}", code.name());
                }
            }
        }
    }

    #[test]
    fn pattern_cap() {
        let big = toric_code(4, 4).unwrap();
        let ch = PauliChannel::new(ChannelKind::Depolarizing, 0.1).unwrap();
        assert!(matches!(exact_ci(&big, &ch), Err(Error::Infeasible { .. })));
    }
}
