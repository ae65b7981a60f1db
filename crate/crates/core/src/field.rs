//! Finite fields `F_q = F_p[x]/(f)` with table-driven arithmetic.
//!
//! Elements are stored as a single index `Σ c_i p^i` where `c_i` is the
//! coefficient of `x^i` in the canonical representative. For `m = 1` the index
//! is the integer residue itself. The modulus is the lexicographically least
//! monic irreducible polynomial of degree `m` (compared from the `x^{m-1}`
//! coefficient down), so contexts are reproducible across runs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported field size. Addition uses a `q × q` table.
pub const MAX_FIELD_SIZE: u64 = 1024;

/// An element of `F_q`, as an index into the owning [`FieldContext`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(pub u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug)]
enum MulKernel {
    /// `m = 1`: elements are integers mod p.
    Prime,
    /// `p = 2`: carry-less products accumulated with xor, reduced at the end.
    Binary { clmul: Vec<u32>, reduce: Vec<u16> },
    /// Generic extension field: full table lookups.
    Table,
}

/// The finite field `F_q`, `q = p^m`.
pub struct FieldContext {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    neg: Vec<u16>,
    log: Vec<u32>,
    exp: Vec<u16>,
    inv: Vec<u16>,
    frob: Vec<u16>,
    kernel: MulKernel,
}

/// Shared handle to a field context.
pub type Field = Arc<FieldContext>;

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}
impl Eq for FieldContext {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Polynomials over F_p as little-endian coefficient vectors (no trailing zeros).
fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = fp_inv(b[db], p);
    while r.len() > db {
        let top = r.len() - 1;
        let c = (r[top] * lead_inv) % p;
        let shift = top - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - (c * bi) % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_inv(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn digits(mut n: u64, p: u32, len: u32) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (n % p as u64) as u32;
            n /= p as u64;
            d
        })
        .collect()
}

/// Is the monic polynomial `f` (degree `m`) irreducible over `F_p`?
/// Exhaustive trial division by every monic polynomial of degree `1..=m/2`.
pub fn is_irreducible_fp(f: &[u32], p: u32) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    for deg in 1..=m / 2 {
        let count = (p as u64).pow(deg as u32);
        for idx in 0..count {
            let mut g = digits(idx, p, deg as u32);
            g.push(1);
            if fp_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldContext {
    /// Builds `F_{p^m}` with the lexicographically least monic irreducible modulus.
    pub fn new(p: u64, m: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m < 1 {
            return Err(Error::InvalidDegree(m));
        }
        let q = p.checked_pow(m).unwrap_or(u64::MAX);
        if q > MAX_FIELD_SIZE {
            return Err(Error::FieldTooLarge(q));
        }
        let p = p as u32;
        let q = q as u32;
        let modulus = (0..q as u64)
            .map(|idx| {
                let mut f = digits(idx, p, m);
                f.push(1);
                f
            })
            .find(|f| is_irreducible_fp(f, p))
            .expect("an irreducible polynomial of every degree exists");
        Ok(Arc::new(Self::with_modulus(p, m, q, modulus)))
    }

    fn with_modulus(p: u32, m: u32, q: u32, modulus: Vec<u32>) -> Self {
        let qs = q as usize;
        let to_coords = |x: u32| digits(x as u64, p, m);
        let from_coords = |c: &[u32]| c.iter().rev().fold(0u32, |acc, &d| acc * p + d);

        let mut add = vec![0u16; qs * qs];
        let mut neg = vec![0u16; qs];
        for a in 0..q {
            let ca = to_coords(a);
            let na: Vec<u32> = ca.iter().map(|&d| (p - d) % p).collect();
            neg[a as usize] = from_coords(&na) as u16;
            for b in 0..q {
                let cb = to_coords(b);
                let s: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = from_coords(&s) as u16;
            }
        }

        let poly_mul = |a: u32, b: u32| -> u32 {
            let ca = to_coords(a);
            let cb = to_coords(b);
            let mut prod = vec![0u32; 2 * m as usize];
            for (i, x) in ca.iter().enumerate() {
                for (j, y) in cb.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let mut r = fp_rem(&prod, &modulus, p);
            r.resize(m as usize, 0);
            from_coords(&r)
        };

        // Smallest primitive element.
        let mut log = vec![0u32; qs];
        let mut exp = vec![0u16; 2 * (qs - 1).max(1)];
        'search: for g in 1..q {
            let mut x = 1u32;
            let mut seen = vec![false; qs];
            for k in 0..(q - 1) {
                if seen[x as usize] {
                    continue 'search;
                }
                seen[x as usize] = true;
                exp[k as usize] = x as u16;
                log[x as usize] = k;
                x = poly_mul(x, g);
            }
            if x == 1 {
                break;
            }
        }
        for k in (q - 1) as usize..exp.len() {
            exp[k] = exp[k - (qs - 1)];
        }

        let mut inv = vec![0u16; qs];
        let mut frob = vec![0u16; qs];
        for a in 1..qs {
            let la = log[a] as usize;
            inv[a] = exp[(qs - 1 - la) % (qs - 1)];
            frob[a] = exp[(la * p as usize) % (qs - 1)];
        }

        let kernel = if m == 1 {
            MulKernel::Prime
        } else if p == 2 {
            let mut clmul = vec![0u32; qs * qs];
            for a in 0..qs {
                for b in 0..qs {
                    let mut r = 0u32;
                    for i in 0..m {
                        if (b >> i) & 1 == 1 {
                            r ^= (a as u32) << i;
                        }
                    }
                    clmul[a * qs + b] = r;
                }
            }
            let red_len = 1usize << (2 * m - 1);
            let mut reduce = vec![0u16; red_len];
            for (v, slot) in reduce.iter_mut().enumerate() {
                let coords: Vec<u32> = (0..(2 * m - 1)).map(|i| ((v >> i) & 1) as u32).collect();
                let mut r = fp_rem(&coords, &modulus, 2);
                r.resize(m as usize, 0);
                *slot = from_coords(&r) as u16;
            }
            MulKernel::Binary { clmul, reduce }
        } else {
            MulKernel::Table
        };

        FieldContext {
            p,
            m,
            q,
            modulus,
            add,
            neg,
            log,
            exp,
            inv,
            frob,
            kernel,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Modulus coefficients `[c_0, …, c_{m-1}, 1]` over `F_p`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add[a.0 as usize * self.q as usize + b.0 as usize])
    }
    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.0 as usize])
    }
    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        Fq(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }
    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: Fq) -> Fq {
        assert!(!a.is_zero(), "inverse of zero in F_q");
        Fq(self.inv[a.0 as usize])
    }
    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b))
    }
    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        if a.is_zero() {
            return Fq::ZERO;
        }
        let l = self.log[a.0 as usize] as u64;
        Fq(self.exp[((l * (e % (self.q as u64 - 1).max(1))) % (self.q as u64 - 1).max(1)) as usize])
    }

    /// `x ↦ x^{p^k}`; for negative `k` the unique `p^{|k|}`-th root.
    pub fn frobenius(&self, x: Fq, k: i64) -> Fq {
        let steps = k.rem_euclid(self.m as i64);
        let mut y = x;
        for _ in 0..steps {
            y = Fq(self.frob[y.0 as usize]);
        }
        y
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u16)
    }

    /// Coordinates over `F_p` (coefficient of `x^i` at position `i`).
    pub fn coords(&self, a: Fq) -> Vec<u32> {
        digits(a.0 as u64, self.p, self.m)
    }

    pub fn from_coords(&self, c: &[u32]) -> Result<Fq> {
        if c.len() != self.m as usize || c.iter().any(|&d| d >= self.p) {
            return Err(Error::Parse(format!("bad F_p coordinates {c:?}")));
        }
        Ok(Fq(c.iter().rev().fold(0u32, |acc, &d| acc * self.p + d) as u16))
    }

    /// All field elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q as u16).map(Fq)
    }

    /// Human-readable element: integers for prime fields, polynomials in `g` otherwise.
    pub fn format(&self, a: Fq) -> String {
        if self.m == 1 {
            return a.0.to_string();
        }
        if a.is_zero() {
            return "0".into();
        }
        let c = self.coords(a);
        let mut parts = Vec::new();
        for (i, &d) in c.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "g".to_string(),
                _ => format!("g^{i}"),
            };
            parts.push(match (d, i) {
                (_, 0) => d.to_string(),
                (1, _) => mono,
                _ => format!("{d}*{mono}"),
            });
        }
        format!("({})", parts.join("+"))
    }

    /// Truncated convolution `out[k] = Σ_{i+j=k} a[i]·b[j]`, `k < len`.
    pub(crate) fn convolve(&self, a: &[Fq], b: &[Fq], len: usize) -> Vec<Fq> {
        let (a, b) = if a.iter().filter(|x| !x.is_zero()).count()
            <= b.iter().filter(|x| !x.is_zero()).count()
        {
            (a, b)
        } else {
            (b, a)
        };
        let len = len.min((a.len() + b.len()).saturating_sub(1));
        if len == 0 {
            return Vec::new();
        }
        let b_nz: Vec<(usize, Fq)> = b
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, &x)| (i, x))
            .collect();
        let sparse_b = b_nz.len() * 2 < b.len();
        match &self.kernel {
            MulKernel::Prime => {
                let p = self.p as u64;
                let mut acc = vec![0u64; len];
                for (i, &x) in a.iter().enumerate().take(len) {
                    if x.is_zero() {
                        continue;
                    }
                    let x = x.0 as u64;
                    let lim = len - i;
                    if sparse_b {
                        for &(j, y) in &b_nz {
                            if j >= lim {
                                break;
                            }
                            acc[i + j] += x * y.0 as u64;
                        }
                    } else {
                        let out = &mut acc[i..];
                        for (o, y) in out.iter_mut().zip(b.iter().take(lim)) {
                            *o += x * y.0 as u64;
                        }
                    }
                }
                acc.into_iter().map(|v| Fq((v % p) as u16)).collect()
            }
            MulKernel::Binary { clmul, reduce } => {
                let qs = self.q as usize;
                let mut acc = vec![0u32; len];
                for (i, &x) in a.iter().enumerate().take(len) {
                    if x.is_zero() {
                        continue;
                    }
                    let row = &clmul[x.0 as usize * qs..(x.0 as usize + 1) * qs];
                    let lim = len - i;
                    if sparse_b {
                        for &(j, y) in &b_nz {
                            if j >= lim {
                                break;
                            }
                            acc[i + j] ^= row[y.0 as usize];
                        }
                    } else {
                        let out = &mut acc[i..];
                        for (o, y) in out.iter_mut().zip(b.iter().take(lim)) {
                            *o ^= row[y.0 as usize];
                        }
                    }
                }
                acc.into_iter().map(|v| Fq(reduce[v as usize])).collect()
            }
            MulKernel::Table => {
                let mut out = vec![Fq::ZERO; len];
                for (i, &x) in a.iter().enumerate().take(len) {
                    if x.is_zero() {
                        continue;
                    }
                    let lim = len - i;
                    for &(j, y) in &b_nz {
                        if j >= lim {
                            break;
                        }
                        out[i + j] = self.add(out[i + j], self.mul(x, y));
                    }
                }
                out
            }
        }
    }
}

/// Builds a field context; see [`FieldContext::new`].
pub fn make_field_context(p: u64, m: u32) -> Result<Field> {
    FieldContext::new(p, m)
}

/// Binomial coefficient `C(n, k)` reduced mod `p`, via Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut result = 1u64;
    while n > 0 || k > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        // small binomial C(ni, ki) mod p
        let mut num = 1u64;
        let mut den = 1u64;
        for j in 0..ki {
            num = num * ((ni - j) % p) % p;
            den = den * ((j + 1) % p) % p;
        }
        result = result * num % p * fp_inv(den as u32, p as u32) as u64 % p;
        n /= p;
        k /= p;
    }
    result as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_two() {
        let f = make_field_context(2, 1).unwrap();
        assert_eq!(f.q(), 2);
        assert_eq!(f.modulus(), &[0, 1]);
    }

    #[test]
    fn gf4_modulus_is_x2_x_1() {
        let f = make_field_context(2, 2).unwrap();
        assert_eq!(f.q(), 4);
        assert_eq!(f.modulus(), &[1, 1, 1]);
        // exhaustive oracle: x^2+x+1 is the only irreducible monic quadratic over F_2
        let irreducible: Vec<usize> = (0..4u64)
            .filter(|&i| is_irreducible_fp(&[(i & 1) as u32, (i >> 1) as u32, 1], 2))
            .map(|i| i as usize)
            .collect();
        assert_eq!(irreducible, vec![3]);
    }

    #[test]
    fn rejects_non_prime_and_zero_degree() {
        assert_eq!(make_field_context(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(make_field_context(3, 0).unwrap_err(), Error::InvalidDegree(0));
    }

    #[test]
    fn frobenius_on_gf4() {
        let f = make_field_context(2, 2).unwrap();
        let g = Fq(2); // the class of x
        assert_eq!(f.frobenius(g, 0), g);
        // g^2 = g + 1
        assert_eq!(f.frobenius(g, 1), f.add(g, Fq::ONE));
        assert_eq!(f.frobenius(f.frobenius(g, 1), -1), g);
    }

    #[test]
    fn frobenius_is_identity_after_m_steps() {
        for (p, m) in [(2, 3), (3, 2), (5, 1), (2, 4)] {
            let f = make_field_context(p, m).unwrap();
            for x in f.elements() {
                assert_eq!(f.frobenius(x, m as i64), x);
                assert_eq!(f.pow(x, f.q() as u64), x);
            }
        }
    }

    #[test]
    fn field_axioms_small() {
        for (p, m) in [(2, 2), (3, 2), (5, 1), (2, 3)] {
            let f = make_field_context(p, m).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Fq::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a)), Fq::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn convolution_kernels_agree_with_schoolbook() {
        for (p, m) in [(3, 1), (2, 3), (3, 2)] {
            let f = make_field_context(p, m).unwrap();
            let q = f.q() as u16;
            let a: Vec<Fq> = (0..17u16).map(|i| Fq((i * 7 + 3) % q)).collect();
            let b: Vec<Fq> = (0..11u16).map(|i| Fq((i * i + 1) % q)).collect();
            let fast = f.convolve(&a, &b, 20);
            let mut slow = vec![Fq::ZERO; 20];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    if i + j < 20 {
                        slow[i + j] = f.add(slow[i + j], f.mul(x, y));
                    }
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn lucas_binomials() {
        assert_eq!(binomial_mod_p(4, 2, 3), 0); // 6 mod 3
        assert_eq!(binomial_mod_p(5, 2, 3), 1); // 10 mod 3
        assert_eq!(binomial_mod_p(10, 3, 7), 120 % 7);
        assert_eq!(binomial_mod_p(3, 5, 5), 0);
    }
}
