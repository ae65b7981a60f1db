//! Multizeta values `ζ(s)`, degenerate values `ζ_I(s)` and preorder values
//! `ζ_ρ(s)`, with the linear-preorder combinatorics that index them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::powersums::{Method, PowerSums};
use crate::series::TildeSeries;

/// A tuple `(s_1, …, s_r)` of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition {
    pub s: Vec<u64>,
}

impl Composition {
    pub fn new(s: Vec<u64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("composition needs depth ≥ 1".into()));
        }
        if s.contains(&0) {
            return Err(Error::InvalidArgument("composition entries must be ≥ 1".into()));
        }
        Ok(Composition { s })
    }
    pub fn depth(&self) -> usize {
        self.s.len()
    }
    pub fn weight(&self) -> u64 {
        self.s.iter().sum()
    }
    /// Parses `"2,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad composition entry {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(s)
    }
    /// All compositions of `weight` with at most `max_depth` parts, in lexicographic order.
    pub fn all_of_weight(weight: u64, max_depth: usize) -> Vec<Composition> {
        fn rec(left: u64, depth_left: usize, cur: &mut Vec<u64>, out: &mut Vec<Composition>) {
            if left == 0 {
                out.push(Composition { s: cur.clone() });
                return;
            }
            if depth_left == 0 {
                return;
            }
            for first in 1..=left {
                cur.push(first);
                rec(left - first, depth_left - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if weight > 0 {
            rec(weight, max_depth, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.s.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Ordered blocks of indices `1..=r`, smallest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearPreorder {
    pub blocks: Vec<Vec<usize>>,
}

impl LinearPreorder {
    /// Validates that the blocks partition `1..=r` and sorts each block.
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        let r: usize = blocks.iter().map(|b| b.len()).sum();
        let seen: BTreeSet<usize> = blocks.iter().flatten().copied().collect();
        if blocks.iter().any(|b| b.is_empty()) || seen.len() != r || seen != (1..=r).collect() {
            return Err(Error::InvalidArgument(format!(
                "blocks {blocks:?} do not partition 1..={r}"
            )));
        }
        Ok(LinearPreorder { blocks })
    }

    pub fn depth(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Index of the block containing `i` (1-based element).
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&i)).expect("index in range")
    }

    /// `i ρ j`: the degree at `i` is at most the degree at `j`.
    pub fn relates(&self, i: usize, j: usize) -> bool {
        self.block_of(i) <= self.block_of(j)
    }

    /// Whether a degree vector `d` (0-based storage of `d_1..d_r`) has this shape.
    pub fn contains(&self, d: &[u32]) -> bool {
        let r = self.depth();
        d.len() == r
            && (1..=r).all(|i| {
                (1..=r).all(|j| self.relates(i, j) == (d[i - 1] <= d[j - 1]))
            })
    }

    /// Parses `"3|1,2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let blocks = text
            .split('|')
            .map(|b| {
                b.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad preorder entry {x:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    /// Restriction to the indices `lo..=hi`, renumbered from 1.
    pub fn restrict(&self, lo: usize, hi: usize) -> LinearPreorder {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .filter(|&&i| i >= lo && i <= hi)
                    .map(|&i| i + 1 - lo)
                    .collect::<Vec<_>>()
            })
            .filter(|b: &Vec<usize>| !b.is_empty())
            .collect();
        LinearPreorder { blocks }
    }
}

impl fmt::Display for LinearPreorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// Positions `i ∈ {1..r−1}` where `d_i > d_{i+1}` is required.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JumpSet {
    pub r: usize,
    pub set: BTreeSet<usize>,
}

impl JumpSet {
    pub fn new(r: usize, set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = set.into_iter().collect();
        if r == 0 || set.iter().any(|&i| i == 0 || i >= r) {
            return Err(Error::InvalidArgument(format!(
                "jump positions {set:?} not within 1..{r}"
            )));
        }
        Ok(JumpSet { r, set })
    }
    /// `{1, …, r−1}`: the non-degenerate shape.
    pub fn full(r: usize) -> Self {
        JumpSet {
            r,
            set: (1..r).collect(),
        }
    }
    pub fn empty(r: usize) -> Self {
        JumpSet {
            r,
            set: BTreeSet::new(),
        }
    }
    /// Parses `"1,3"` (empty string for no jumps).
    pub fn parse(r: usize, text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() {
            return Self::new(r, []);
        }
        let v = t
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad jump position {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(r, v)
    }
    /// All `2^{r−1}` jump sets, ordered by bitmask.
    pub fn all(r: usize) -> Vec<JumpSet> {
        (0u32..(1 << (r - 1)))
            .map(|mask| JumpSet {
                r,
                set: (1..r).filter(|i| mask >> (i - 1) & 1 == 1).collect(),
            })
            .collect()
    }
}

/// All ordered set partitions of `1..=r` (`1 ≤ r ≤ 6`), in a fixed order:
/// by number of blocks, then lexicographically by block assignment.
pub fn enumerate_preorders(r: usize) -> Result<Vec<LinearPreorder>> {
    if !(1..=6).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "preorder enumeration supports 1 ≤ r ≤ 6, got {r}"
        )));
    }
    let mut out = Vec::new();
    for k in 1..=r {
        let mut assign = vec![0usize; r];
        loop {
            let used: BTreeSet<usize> = assign.iter().copied().collect();
            if used.len() == k {
                let blocks = (0..k)
                    .map(|b| (1..=r).filter(|&i| assign[i - 1] == b).collect())
                    .collect();
                out.push(LinearPreorder { blocks });
            }
            // odometer over {0..k−1}^r, last index fastest
            let mut i = r;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                assign[i] += 1;
                if assign[i] < k {
                    break;
                }
                assign[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    Ok(out)
}

/// The preorder of weakly decreasing degrees `d_1 ≥ … ≥ d_r` with strict
/// drops exactly at the positions in `I`.
pub fn jumps_to_preorder(jumps: &JumpSet) -> LinearPreorder {
    let mut runs: Vec<Vec<usize>> = vec![vec![1]];
    for i in 2..=jumps.r {
        if jumps.set.contains(&(i - 1)) {
            runs.push(vec![i]);
        } else {
            runs.last_mut().unwrap().push(i);
        }
    }
    runs.reverse();
    LinearPreorder { blocks: runs }
}

/// Multizeta engine. Memoizes power sums per precision; one engine per computation.
pub struct MultiZeta {
    ps: PowerSums,
    method: Method,
    sd_cache: HashMap<(u32, u64, i64), TildeSeries>,
}

impl MultiZeta {
    pub fn new(field: &Field) -> Self {
        MultiZeta {
            ps: PowerSums::new(field),
            method: Method::Auto,
            sd_cache: HashMap::new(),
        }
    }

    /// Engine whose power sums all use one method (for cross-checks).
    pub fn with_method(field: &Field, method: Method) -> Self {
        MultiZeta {
            method,
            ..Self::new(field)
        }
    }

    pub fn field(&self) -> &Field {
        self.ps.field()
    }

    pub fn power_sums(&mut self) -> &mut PowerSums {
        &mut self.ps
    }

    /// `S_d(s)` to precision `n`, memoized.
    pub fn s_d(&mut self, d: u32, s: u64, n: i64) -> Result<TildeSeries> {
        if let Some(x) = self.sd_cache.get(&(d, s, n)) {
            return Ok(x.clone());
        }
        let x = self.ps.power_sum(d, s, n, self.method)?;
        self.sd_cache.insert((d, s, n), x.clone());
        Ok(x)
    }

    /// `ζ_ρ(s) = Σ_{d of shape ρ} Π_i S_{d_i}(s_i)` to precision `n`.
    pub fn zeta_rho(&mut self, s: &Composition, rho: &LinearPreorder, n: i64) -> Result<TildeSeries> {
        if rho.depth() != s.depth() {
            return Err(Error::InvalidArgument(format!(
                "preorder depth {} does not match composition depth {}",
                rho.depth(),
                s.depth()
            )));
        }
        let f = self.field().clone();
        let q = f.q() as i64;
        let k = rho.blocks.len();
        let top_weight: i64 = rho.blocks[k - 1].iter().map(|&i| s.s[i - 1] as i64).sum();
        // every term with top degree e has valuation ≥ e·(q−1)·(top block weight)
        let cutoff = ((n + (q - 1) * top_weight - 1) / ((q - 1) * top_weight) - 1).max(0) as u32;
        let mut prev: Vec<TildeSeries> = Vec::new();
        for (b, block) in rho.blocks.iter().enumerate() {
            let mut cur = Vec::with_capacity(cutoff as usize + 1);
            let mut prefix = TildeSeries::zero(&f, 0, n);
            for e in 0..=cutoff {
                let mut term = if b == 0 {
                    TildeSeries::one(&f).truncate(n)
                } else {
                    // Σ_{e' < e} A_{b−1}(e')
                    if e > 0 {
                        prefix = prefix.add(&prev[e as usize - 1]);
                    }
                    prefix.clone()
                };
                if !term.is_zero() {
                    for &i in block {
                        term = term.mul(&self.s_d(e, s.s[i - 1], n)?);
                        if term.is_zero() {
                            break;
                        }
                    }
                }
                cur.push(term.truncate(n));
            }
            prev = cur;
        }
        Ok(prev
            .into_iter()
            .fold(TildeSeries::zero(&f, 0, n), |acc, x| acc.add(&x)))
    }

    /// `ζ(s)`: strictly decreasing degrees.
    pub fn zeta(&mut self, s: &Composition, n: i64) -> Result<TildeSeries> {
        let rho = jumps_to_preorder(&JumpSet::full(s.depth()));
        self.zeta_rho(s, &rho, n)
    }

    /// `ζ_I(s)`: weakly decreasing degrees, strict exactly at `I`.
    pub fn zeta_i(&mut self, s: &Composition, jumps: &JumpSet, n: i64) -> Result<TildeSeries> {
        if jumps.r != s.depth() {
            return Err(Error::InvalidArgument("jump set depth mismatch".into()));
        }
        self.zeta_rho(s, &jumps_to_preorder(jumps), n)
    }

    /// The totally degenerate value `z(s) = ζ_∅(s)`.
    pub fn z(&mut self, s: &Composition, n: i64) -> Result<TildeSeries> {
        self.zeta_i(s, &JumpSet::empty(s.depth()), n)
    }
}

/// `ζ_ρ(s)` with a fresh engine.
pub fn zeta_rho(field: &Field, s: &Composition, rho: &LinearPreorder, n: i64) -> Result<TildeSeries> {
    MultiZeta::new(field).zeta_rho(s, rho, n)
}

/// `ζ(s)` with a fresh engine.
pub fn zeta(field: &Field, s: &Composition, n: i64) -> Result<TildeSeries> {
    MultiZeta::new(field).zeta(s, n)
}

/// `ζ_I(s)` with a fresh engine.
pub fn zeta_i(field: &Field, s: &Composition, jumps: &JumpSet, n: i64) -> Result<TildeSeries> {
    MultiZeta::new(field).zeta_i(s, jumps, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;
    use crate::powersums::power_sum_brute;

    #[test]
    fn preorder_counts() {
        let counts: Vec<usize> = (1..=5).map(|r| enumerate_preorders(r).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 3, 13, 75, 541]);
        assert!(enumerate_preorders(0).is_err());
        assert!(enumerate_preorders(7).is_err());
    }

    #[test]
    fn jumps_examples() {
        let full = jumps_to_preorder(&JumpSet::full(3));
        assert_eq!(full.blocks, vec![vec![3], vec![2], vec![1]]);
        let none = jumps_to_preorder(&JumpSet::empty(3));
        assert_eq!(none.blocks, vec![vec![1, 2, 3]]);
        let mid = jumps_to_preorder(&JumpSet::new(3, [2]).unwrap());
        assert_eq!(mid.blocks, vec![vec![3], vec![1, 2]]);
    }

    #[test]
    fn partition_property() {
        for r in 1..=4 {
            let all = enumerate_preorders(r).unwrap();
            let mut d = vec![0u32; r];
            loop {
                assert_eq!(all.iter().filter(|p| p.contains(&d)).count(), 1, "{d:?}");
                let mut i = 0;
                while i < r {
                    d[i] += 1;
                    if d[i] <= 4 {
                        break;
                    }
                    d[i] = 0;
                    i += 1;
                }
                if i == r {
                    break;
                }
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        let p = LinearPreorder::parse("3|1,2").unwrap();
        assert_eq!(p.to_string(), "3|1,2");
        assert!(LinearPreorder::parse("1|1").is_err());
        assert_eq!(Composition::parse("2,1").unwrap().s, vec![2, 1]);
    }

    #[test]
    fn zeta_one_q2_matches_direct_sum() {
        let f = make_field_context(2, 1).unwrap();
        let n = 30;
        let direct = (0..=20)
            .map(|d| power_sum_brute(&f, d, 1, n, 1 << 21).unwrap())
            .fold(TildeSeries::zero(&f, 0, n), |a, x| a.add(&x));
        let z = zeta(&f, &Composition::new(vec![1]).unwrap(), n).unwrap();
        assert_eq!(z.first_difference(&direct), None);
    }

    #[test]
    fn depth_two_matches_direct_sum() {
        let f = make_field_context(3, 1).unwrap();
        let n = 40;
        let s = Composition::new(vec![2, 1]).unwrap();
        let mut direct = TildeSeries::zero(&f, 0, n);
        let a: Vec<_> = (0..=10).map(|d| power_sum_brute(&f, d, 2, n, 1 << 20).unwrap()).collect();
        let b: Vec<_> = (0..=10).map(|d| power_sum_brute(&f, d, 1, n, 1 << 20).unwrap()).collect();
        for d1 in 0..=10usize {
            for d2 in 0..d1 {
                direct = direct.add(&a[d1].mul(&b[d2]));
            }
        }
        let z = zeta(&f, &s, n).unwrap();
        assert_eq!(z.first_difference(&direct), None);
        assert_eq!(z.precision(), n);
    }
}
