//! Shell enumeration: `r_L(m) = #{x in L : |x|^2 = m}` for `m <= M`.
//!
//! Two exact routes are available.
//!
//! * Fincke–Pohst: recursive coordinate bounds from the exact `U^T D U`
//!   decomposition of the Gram matrix, with outward integer rounding.
//!   Works for any integral lattice; cost grows like the number of points.
//! * Frame cosets: when a lattice contains `k Z^n` in its ambient
//!   coordinates with small index, it is a union of translated boxes
//!   `v + k Z^n`, and each box contributes a product of one-dimensional
//!   series. Cost grows like `M^{3/2}` per distinct coset shape.
//!
//! Before either route runs, the Gram matrix is split into orthogonal
//! blocks and the block series are combined by Cauchy convolution.

use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{self, int, inverse, lcm_of_denominators, ldl, Rational, RationalMatrix};
use super::Lattice;
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest `[L : kZ^n]` for which the frame-coset route is attempted.
const MAX_COSET_INDEX: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShellStrategy {
    /// Block split, then frame cosets where available, else Fincke–Pohst.
    Auto,
    /// Block split, then Fincke–Pohst on every block.
    FinckePohst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// Work units (visited nodes, convolution terms) before giving up.
    pub budget: u64,
    pub strategy: ShellStrategy,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            budget: DEFAULT_BUDGET,
            strategy: ShellStrategy::Auto,
        }
    }
}

/// Representation counts `counts[m] = r_L(m)` for `0 <= m <= max_norm`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellSeries {
    max_norm: u64,
    counts: Vec<u64>,
    dim: usize,
    lattice: String,
}

impl ShellSeries {
    pub fn new(dim: usize, lattice: impl Into<String>, counts: Vec<u64>) -> Result<ShellSeries> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter(
                "shell series needs counts[0]".into(),
            ));
        }
        Ok(ShellSeries {
            max_norm: counts.len() as u64 - 1,
            counts,
            dim,
            lattice: lattice.into(),
        })
    }

    pub fn max_norm(&self) -> u64 {
        self.max_norm
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> &str {
        &self.lattice
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, m: u64) -> u64 {
        self.counts.get(m as usize).copied().unwrap_or(0)
    }

    pub fn cumulative(&self, m: u64) -> u64 {
        self.counts.iter().take(m as usize + 1).sum()
    }

    /// Nonzero shells `(m, r(m))` with `m >= 1`.
    pub fn nonzero_shells(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(m, &c)| (m as u64, c))
    }

    pub fn truncated(&self, max_norm: u64) -> ShellSeries {
        let keep = (max_norm.min(self.max_norm) + 1) as usize;
        ShellSeries {
            max_norm: keep as u64 - 1,
            counts: self.counts[..keep].to_vec(),
            dim: self.dim,
            lattice: self.lattice.clone(),
        }
    }

    /// Cauchy product: the shells of an orthogonal direct sum.
    pub fn convolve(&self, other: &ShellSeries) -> Result<ShellSeries> {
        let max_norm = self.max_norm.min(other.max_norm);
        let counts = convolve_truncated(&self.counts, &other.counts, max_norm as usize)?;
        Ok(ShellSeries {
            max_norm,
            counts,
            dim: self.dim + other.dim,
            lattice: format!("{}+{}", self.lattice, other.lattice),
        })
    }
}

#[derive(Deserialize)]
struct ShellSeriesJson {
    max_norm: u64,
    counts: BTreeMap<String, u64>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    lattice: Option<String>,
}

/// Nonzero counts keyed by the decimal norm, in increasing norm order.
struct CountsMap<'a>(&'a [u64]);

impl Serialize for CountsMap<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        for (m, &c) in self.0.iter().enumerate().filter(|(_, &c)| c > 0) {
            map.serialize_entry(&m.to_string(), &c)?;
        }
        map.end()
    }
}

impl Serialize for ShellSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ShellSeries", 4)?;
        st.serialize_field("max_norm", &self.max_norm)?;
        st.serialize_field("counts", &CountsMap(&self.counts))?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("lattice", &self.lattice)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ShellSeries {
    fn deserialize<D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ShellSeries, D::Error> {
        use serde::de::Error as _;
        let json = ShellSeriesJson::deserialize(d)?;
        let mut counts = vec![0u64; json.max_norm as usize + 1];
        for (key, value) in json.counts {
            let m: usize = key.parse().map_err(D::Error::custom)?;
            let slot = counts
                .get_mut(m)
                .ok_or_else(|| D::Error::custom(format!("norm {m} exceeds max_norm")))?;
            *slot = value;
        }
        Ok(ShellSeries {
            max_norm: json.max_norm,
            counts,
            dim: json.dim.unwrap_or(0),
            lattice: json.lattice.unwrap_or_default(),
        })
    }
}

fn convolve_truncated(a: &[u64], b: &[u64], max_norm: usize) -> Result<Vec<u64>> {
    let mut out = vec![0u64; max_norm + 1];
    for (i, &x) in a.iter().enumerate().take(max_norm + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(max_norm + 1 - i) {
            if y == 0 {
                continue;
            }
            let term = x
                .checked_mul(y)
                .ok_or(Error::CountOverflow((i + j) as u64))?;
            out[i + j] = out[i + j]
                .checked_add(term)
                .ok_or(Error::CountOverflow((i + j) as u64))?;
        }
    }
    Ok(out)
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn spend(&mut self, units: u64) -> Result<()> {
        self.used = self.used.saturating_add(units);
        if self.used > self.limit {
            Err(Error::BudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

pub fn enumerate_shells(lattice: &Lattice, max_norm: u64) -> Result<ShellSeries> {
    enumerate_shells_with(lattice, max_norm, EnumerationOptions::default())
}

pub fn enumerate_shells_with(
    lattice: &Lattice,
    max_norm: u64,
    options: EnumerationOptions,
) -> Result<ShellSeries> {
    if !lattice.is_integral() {
        return Err(Error::NotIntegral(lattice.label()));
    }
    let mut budget = Budget {
        limit: options.budget,
        used: 0,
    };
    let mut total = vec![0u64; max_norm as usize + 1];
    total[0] = 1;
    for block in orthogonal_blocks(lattice.gram()) {
        let counts = block_shells(lattice, &block, max_norm, options.strategy, &mut budget)?;
        budget.spend(max_norm.saturating_mul(max_norm) / 2)?;
        total = convolve_truncated(&total, &counts, max_norm as usize)?;
    }
    ShellSeries::new(lattice.dim(), lattice.label(), total)
}

/// Connected components of the "nonzero off-diagonal Gram entry" graph.
fn orthogonal_blocks(gram: &RationalMatrix) -> Vec<Vec<usize>> {
    let n = gram.len();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut block = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            block.push(i);
            for j in 0..n {
                if !seen[j] && !gram[i][j].is_zero() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

fn block_shells(
    lattice: &Lattice,
    block: &[usize],
    max_norm: u64,
    strategy: ShellStrategy,
    budget: &mut Budget,
) -> Result<Vec<u64>> {
    let gram: RationalMatrix = block
        .iter()
        .map(|&i| {
            block
                .iter()
                .map(|&j| lattice.gram()[i][j].clone())
                .collect()
        })
        .collect();
    if strategy == ShellStrategy::Auto {
        if let Some(frame) = lattice.basis().and_then(|b| CosetFrame::new(b, block)) {
            return frame.shells(max_norm, budget);
        }
    }
    let mut counts = vec![0u64; max_norm as usize + 1];
    fincke_pohst(&gram, max_norm, budget, &mut |_, norm| {
        counts[norm as usize] += 1;
    })?;
    Ok(counts)
}

/// Integer coefficient vectors of all lattice points with `|x|^2 <= max_norm`,
/// paired with their squared norms, in deterministic enumeration order.
pub fn enumerate_vectors(
    lattice: &Lattice,
    max_norm: u64,
    budget: u64,
) -> Result<Vec<(Vec<i64>, u64)>> {
    if !lattice.is_integral() {
        return Err(Error::NotIntegral(lattice.label()));
    }
    let mut budget = Budget {
        limit: budget,
        used: 0,
    };
    let mut out = Vec::new();
    fincke_pohst(lattice.gram(), max_norm, &mut budget, &mut |x, norm| {
        out.push((x.to_vec(), norm));
    })?;
    Ok(out)
}

/// Visits every integer `x` with `x^T G x <= max_norm`.
fn fincke_pohst(
    gram: &RationalMatrix,
    max_norm: u64,
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[i64], u64),
) -> Result<()> {
    let n = gram.len();
    let (d, u) =
        ldl(gram).ok_or_else(|| Error::InvalidParameter("gram not positive definite".into()))?;
    let mut x = vec![0i64; n];
    let bound = int(max_norm as i64);
    recurse(n, &d, &u, &bound, &Rational::zero(), &mut x, budget, visit)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    level: usize,
    d: &[Rational],
    u: &RationalMatrix,
    bound: &Rational,
    partial: &Rational,
    x: &mut [i64],
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[i64], u64),
) -> Result<()> {
    budget.spend(1)?;
    if level == 0 {
        let norm = partial
            .to_integer()
            .to_u64()
            .filter(|_| rational::is_integer(partial))
            .ok_or_else(|| Error::NotIntegral("non-integer squared norm".into()))?;
        visit(x, norm);
        return Ok(());
    }
    let i = level - 1;
    let mut center = Rational::zero();
    for j in level..x.len() {
        if x[j] != 0 {
            center -= &u[i][j] * int(x[j]);
        }
    }
    let slack = (bound - partial) / &d[i];
    let Some((lo, hi)) = integer_window(&center, &slack) else {
        return Ok(());
    };
    for xi in lo..=hi {
        x[i] = xi;
        let offset = int(xi) - &center;
        let next = partial + &d[i] * &offset * &offset;
        recurse(i, d, u, bound, &next, x, budget, visit)?;
    }
    x[i] = 0;
    Ok(())
}

/// Integers `z` with `(z - center)^2 <= slack`, decided exactly.
fn integer_window(center: &Rational, slack: &Rational) -> Option<(i64, i64)> {
    if slack.is_negative() {
        return None;
    }
    let fits = |z: i64| {
        let off = int(z) - center;
        &off * &off <= *slack
    };
    let c = rational::to_f64(center);
    let r = rational::to_f64(slack).sqrt();
    let mut lo = (c - r).floor() as i64;
    let mut hi = (c + r).ceil() as i64;
    while fits(lo - 1) {
        lo -= 1;
    }
    while lo <= hi && !fits(lo) {
        lo += 1;
    }
    while fits(hi + 1) {
        hi += 1;
    }
    while hi >= lo && !fits(hi) {
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// A block whose basis lives on its own coordinates and contains `k Z^b`.
struct CosetFrame {
    dim: usize,
    /// Common denominator of the block basis entries.
    denom: i64,
    /// Residues of `denom * v` modulo `k * denom`, one entry per coset.
    cosets: Vec<Vec<i64>>,
    modulus: i64,
}

impl CosetFrame {
    fn new(basis: &RationalMatrix, block: &[usize]) -> Option<CosetFrame> {
        let support: Vec<usize> = (0..basis.len())
            .filter(|&c| block.iter().any(|&r| !basis[r][c].is_zero()))
            .collect();
        if support.len() != block.len() {
            return None;
        }
        let square: RationalMatrix = block
            .iter()
            .map(|&r| support.iter().map(|&c| basis[r][c].clone()).collect())
            .collect();
        let dim = block.len();
        let denom = lcm_of_denominators(square.iter().flatten()).to_i64()?;
        let inv = inverse(&square)?;
        let k = lcm_of_denominators(inv.iter().flatten()).to_i64()?;
        let det = rational::determinant(&square).abs();
        // [L : kZ^b] = k^b / covol(L)
        let index = Rational::from_integer(BigInt::from(k).pow(dim as u32)) / det;
        if !rational::is_integer(&index) || index > int(MAX_COSET_INDEX as i64) {
            return None;
        }
        let index = index.to_integer().to_u64()?;
        let modulus = k.checked_mul(denom)?;
        let generators: Vec<Vec<i64>> = square
            .iter()
            .map(|row| {
                row.iter()
                    .map(|q| {
                        let scaled = q * int(denom);
                        scaled.to_integer().to_i64().map(|v| v.rem_euclid(modulus))
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<_>>()?;
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let zero = vec![0i64; dim];
        seen.insert(zero.clone());
        let mut queue = VecDeque::from([zero]);
        let mut cosets = Vec::new();
        while let Some(v) = queue.pop_front() {
            for g in &generators {
                let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| (a + b) % modulus).collect();
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
            cosets.push(v);
            if cosets.len() as u64 > index {
                return None;
            }
        }
        if cosets.len() as u64 != index {
            return None;
        }
        Some(CosetFrame {
            dim,
            denom,
            cosets,
            modulus,
        })
    }

    fn shells(&self, max_norm: u64, budget: &mut Budget) -> Result<Vec<u64>> {
        let scale = (self.denom * self.denom) as u64;
        let limit = max_norm
            .checked_mul(scale)
            .ok_or_else(|| Error::InvalidParameter("max_norm too large".into()))?
            as usize;
        // A residue and its negative give the same one-dimensional series.
        let mut shapes: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for coset in &self.cosets {
            let mut key: Vec<i64> = coset
                .iter()
                .map(|&r| r.min((self.modulus - r) % self.modulus))
                .collect();
            key.sort_unstable();
            *shapes.entry(key).or_default() += 1;
        }
        let mut series_cache: BTreeMap<i64, Vec<(usize, u64)>> = BTreeMap::new();
        let mut total = vec![0u64; limit + 1];
        for (shape, multiplicity) in &shapes {
            let mut acc = vec![0u64; limit + 1];
            acc[0] = 1;
            for &residue in shape {
                let series = series_cache
                    .entry(residue)
                    .or_insert_with(|| one_dimensional(residue, self.modulus, limit));
                budget.spend((series.len() * (limit + 1)) as u64)?;
                let mut next = vec![0u64; limit + 1];
                for (v, &count) in acc.iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    for &(w, mult) in series.iter() {
                        if v + w > limit {
                            break;
                        }
                        let add = count
                            .checked_mul(mult)
                            .ok_or(Error::CountOverflow(max_norm))?;
                        next[v + w] = next[v + w]
                            .checked_add(add)
                            .ok_or(Error::CountOverflow(max_norm))?;
                    }
                }
                acc = next;
            }
            for (slot, value) in total.iter_mut().zip(&acc) {
                let add = value
                    .checked_mul(*multiplicity)
                    .ok_or(Error::CountOverflow(max_norm))?;
                *slot = slot
                    .checked_add(add)
                    .ok_or(Error::CountOverflow(max_norm))?;
            }
        }
        debug_assert_eq!(total[0], 1);
        let mut counts = vec![0u64; max_norm as usize + 1];
        for (value, &count) in total.iter().enumerate() {
            if count == 0 {
                continue;
            }
            if !(value as u64).is_multiple_of(scale) {
                return Err(Error::NotIntegral(format!(
                    "block of dimension {} has a vector of squared norm {value}/{scale}",
                    self.dim
                )));
            }
            counts[value / scale as usize] = count;
        }
        Ok(counts)
    }
}

/// `(value, multiplicity)` for `(residue + modulus * z)^2 <= limit`, sorted.
fn one_dimensional(residue: i64, modulus: i64, limit: usize) -> Vec<(usize, u64)> {
    let mut values: BTreeMap<usize, u64> = BTreeMap::new();
    let reach = (limit as f64).sqrt() as i64 + modulus + 1;
    let zmax = reach / modulus + 1;
    for z in -zmax..=zmax {
        let coord = residue + modulus * z;
        let sq = (coord as i128) * (coord as i128);
        if sq <= limit as i128 {
            *values.entry(sq as usize).or_default() += 1;
        }
    }
    values.into_iter().collect()
}
