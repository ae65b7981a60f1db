//! Univariate polynomials over `F_q` and the rational function field `K = F_q(t)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};

/// A polynomial over `F_q`, little-endian, no trailing zeros.
#[derive(Clone)]
pub struct PolyT {
    field: Field,
    coeffs: Vec<Fq>,
}

impl PartialEq for PolyT {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.coeffs == other.coeffs
    }
}
impl Eq for PolyT {}

impl fmt::Debug for PolyT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("t"))
    }
}

impl PolyT {
    pub fn new(field: &Field, mut coeffs: Vec<Fq>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyT {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, Vec::new())
    }
    pub fn one(field: &Field) -> Self {
        Self::constant(field, Fq::ONE)
    }
    pub fn constant(field: &Field, c: Fq) -> Self {
        Self::new(field, vec![c])
    }
    /// `c · t^k`
    pub fn monomial(field: &Field, c: Fq, k: usize) -> Self {
        let mut v = vec![Fq::ZERO; k + 1];
        v[k] = c;
        Self::new(field, v)
    }
    /// The variable `t`.
    pub fn t(field: &Field) -> Self {
        Self::monomial(field, Fq::ONE, 1)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }
    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).copied().unwrap_or(Fq::ZERO)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.coeffs == [Fq::ONE]
    }
    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn leading(&self) -> Fq {
        self.coeffs.last().copied().unwrap_or(Fq::ZERO)
    }

    pub fn add(&self, other: &PolyT) -> PolyT {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        PolyT::new(f, v)
    }
    pub fn neg(&self) -> PolyT {
        let f = &self.field;
        PolyT::new(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }
    pub fn sub(&self, other: &PolyT) -> PolyT {
        self.add(&other.neg())
    }
    pub fn scale(&self, c: Fq) -> PolyT {
        let f = &self.field;
        PolyT::new(f, self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }
    pub fn mul(&self, other: &PolyT) -> PolyT {
        if self.is_zero() || other.is_zero() {
            return PolyT::zero(&self.field);
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        PolyT::new(&self.field, self.field.convolve(&self.coeffs, &other.coeffs, len))
    }
    pub fn pow(&self, mut e: u64) -> PolyT {
        let mut base = self.clone();
        let mut acc = PolyT::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
    /// Multiply by `t^k`.
    pub fn shift(&self, k: usize) -> PolyT {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Fq::ZERO; k];
        v.extend_from_slice(&self.coeffs);
        PolyT::new(&self.field, v)
    }

    /// Euclidean division; errors on a zero divisor.
    pub fn div_rem(&self, d: &PolyT) -> Result<(PolyT, PolyT)> {
        let f = &self.field;
        let dd = d.degree().ok_or(Error::ZeroDenominator)?;
        let lead_inv = f.inv(d.leading());
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((PolyT::zero(f), self.clone()));
        }
        let mut quo = vec![Fq::ZERO; r.len() - dd];
        for top in (dd..r.len()).rev() {
            let c = f.mul(r[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            let shift = top - dd;
            quo[shift] = c;
            for (i, &di) in d.coeffs.iter().enumerate() {
                r[shift + i] = f.sub(r[shift + i], f.mul(c, di));
            }
        }
        r.truncate(dd);
        Ok((PolyT::new(f, quo), PolyT::new(f, r)))
    }

    /// Exact division; `None` if the remainder is nonzero.
    pub fn div_exact(&self, d: &PolyT) -> Result<Option<PolyT>> {
        let (q, r) = self.div_rem(d)?;
        Ok(r.is_zero().then_some(q))
    }

    pub fn monic(&self) -> PolyT {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field.inv(self.leading()))
    }

    /// Monic gcd (zero iff both inputs are zero).
    pub fn gcd(&self, other: &PolyT) -> PolyT {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: Fq) -> Fq {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Fq::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// `f(t) ↦ f(t)^{q^n} = f(t^{q^n})` for `n ≥ 0` (coefficients lie in `F_q`).
    pub fn twist(&self, n: u32) -> PolyT {
        if self.is_zero() {
            return self.clone();
        }
        let step = (self.field.q() as usize).pow(n);
        let mut v = vec![Fq::ZERO; (self.coeffs.len() - 1) * step + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v[i * step] = c;
        }
        PolyT::new(&self.field, v)
    }

    /// If every exponent is divisible by `q`, returns `f(t^{1/q})`.
    pub fn q_th_root(&self) -> Option<PolyT> {
        let q = self.field.q() as usize;
        if self
            .coeffs
            .iter()
            .enumerate()
            .any(|(i, c)| !c.is_zero() && i % q != 0)
        {
            return None;
        }
        Some(PolyT::new(
            &self.field,
            self.coeffs.iter().step_by(q).copied().collect(),
        ))
    }

    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = &self.field;
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let cs = f.format(c);
            parts.push(match (c == Fq::ONE, i) {
                (_, 0) => cs,
                (true, _) => mono,
                (false, _) => format!("{cs}*{mono}"),
            });
        }
        parts.join(" + ")
    }
}

/// An element of `K = F_q(t)` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: PolyT,
    den: PolyT,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num.display("t"))
        } else {
            write!(f, "({}) / ({})", self.num.display("t"), self.den.display("t"))
        }
    }
}

impl RatFunc {
    /// Reduces `num/den`; errors if `den = 0`.
    pub fn new(num: PolyT, den: PolyT) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g)?.expect("gcd divides");
        let den = den.div_exact(&g)?.expect("gcd divides");
        let lc = den.leading();
        let inv = num.field().inv(lc);
        Ok(RatFunc {
            num: num.scale(inv),
            den: den.scale(inv),
        })
    }
    pub fn from_poly(p: PolyT) -> Self {
        let field = p.field().clone();
        RatFunc {
            num: p,
            den: PolyT::one(&field),
        }
    }
    pub fn num(&self) -> &PolyT {
        &self.num
    }
    pub fn den(&self) -> &PolyT {
        &self.den
    }
    pub fn field(&self) -> &Field {
        self.num.field()
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero dens")
    }
    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
        .expect("nonzero dens")
    }
    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    pub fn inv(&self) -> Result<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }
    pub fn pow(&self, e: u64) -> RatFunc {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }
    pub fn scale(&self, c: Fq) -> RatFunc {
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }
    /// Degree at infinity: `deg num − deg den`.
    pub fn degree(&self) -> Option<i64> {
        Some(self.num.degree()? as i64 - self.den.degree()? as i64)
    }
}

/// A polynomial in `T` with coefficients in `F_q[t]`, indexed by `T`-degree.
#[derive(Clone, PartialEq, Eq)]
pub struct TPoly {
    field: Field,
    coeffs: Vec<PolyT>,
}

impl fmt::Debug for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl TPoly {
    pub fn new(field: &Field, mut coeffs: Vec<PolyT>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TPoly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn one(field: &Field) -> Self {
        Self::new(field, vec![PolyT::one(field)])
    }

    /// A polynomial in `t` viewed as constant in `T`.
    pub fn from_t_poly(p: PolyT) -> Self {
        let f = p.field().clone();
        Self::new(&f, vec![p])
    }

    /// `T − t`.
    pub fn t_minus_theta(field: &Field) -> Self {
        Self::new(field, vec![PolyT::t(field).neg(), PolyT::one(field)])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn coeffs(&self) -> &[PolyT] {
        &self.coeffs
    }
    /// Coefficient of `T^j`.
    pub fn coeff(&self, j: usize) -> PolyT {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| PolyT::zero(&self.field))
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree_big_t(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    /// Largest `t`-degree among the coefficients.
    pub fn degree_t(&self) -> Option<usize> {
        self.coeffs.iter().filter_map(|c| c.degree()).max()
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(
            &self.field,
            (0..n).map(|j| self.coeff(j).add(&o.coeff(j))).collect(),
        )
    }
    pub fn neg(&self) -> TPoly {
        Self::new(&self.field, self.coeffs.iter().map(|c| c.neg()).collect())
    }
    pub fn sub(&self, o: &TPoly) -> TPoly {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &TPoly) -> TPoly {
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.field);
        }
        let mut out = vec![PolyT::zero(&self.field); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(&self.field, out)
    }
    pub fn pow(&self, e: u32) -> TPoly {
        let mut acc = Self::one(&self.field);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
    /// Multiplies every coefficient by a polynomial in `t`.
    pub fn scale_t(&self, p: &PolyT) -> TPoly {
        Self::new(&self.field, self.coeffs.iter().map(|c| c.mul(p)).collect())
    }

    /// Twist on coefficients: `t ↦ t^{q^n}`.
    pub fn twist(&self, n: u32) -> TPoly {
        Self::new(&self.field, self.coeffs.iter().map(|c| c.twist(n)).collect())
    }

    /// The inverse twist `t ↦ t^{1/q}` when every coefficient is a polynomial in `t^q`.
    pub fn inverse_twist(&self) -> Option<TPoly> {
        let roots = self
            .coeffs
            .iter()
            .map(|c| c.q_th_root())
            .collect::<Option<Vec<_>>>()?;
        Some(Self::new(&self.field, roots))
    }

    /// Coefficient of `t^i T^j`.
    pub fn coeff2(&self, i: usize, j: usize) -> Fq {
        self.coeffs.get(j).map(|c| c.coeff(i)).unwrap_or(Fq::ZERO)
    }

    /// Text form `Σ a_ij t^i T^j`, highest `T`-degree first.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = &self.field;
        let mut parts = Vec::new();
        for j in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[j];
            for i in (0..c.coeffs().len()).rev() {
                let a = c.coeff(i);
                if a.is_zero() {
                    continue;
                }
                let mut factors = Vec::new();
                if a != Fq::ONE || (i == 0 && j == 0) {
                    factors.push(f.format(a));
                }
                match i {
                    0 => {}
                    1 => factors.push("t".into()),
                    _ => factors.push(format!("t^{i}")),
                }
                match j {
                    0 => {}
                    1 => factors.push("T".into()),
                    _ => factors.push(format!("T^{j}")),
                }
                parts.push(factors.join("*"));
            }
        }
        parts.join(" + ")
    }

    /// Nested arrays `[T-degree][t-degree]` of `F_p` coordinate vectors.
    pub fn to_nested(&self) -> Vec<Vec<Vec<u32>>> {
        self.coeffs
            .iter()
            .map(|c| c.coeffs().iter().map(|&a| self.field.coords(a)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;

    #[test]
    fn degree_is_additive() {
        let f = make_field_context(3, 1).unwrap();
        let a = PolyT::new(&f, vec![Fq(1), Fq(2), Fq(1)]);
        let b = PolyT::new(&f, vec![Fq(2), Fq(0), Fq(0), Fq(1)]);
        assert_eq!(a.mul(&b).degree(), Some(5));
    }

    #[test]
    fn div_rem_roundtrip() {
        let f = make_field_context(5, 1).unwrap();
        let a = PolyT::new(&f, vec![Fq(3), Fq(1), Fq(4), Fq(2), Fq(1)]);
        let b = PolyT::new(&f, vec![Fq(1), Fq(2), Fq(3)]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn ratfunc_reduces() {
        let f = make_field_context(2, 1).unwrap();
        let t = PolyT::t(&f);
        let one = PolyT::one(&f);
        // (t^2+t)/(t) = t+1
        let r = RatFunc::new(t.mul(&t).add(&t), t.clone()).unwrap();
        assert_eq!(r.num(), &t.add(&one));
        assert!(r.den().is_one());
        assert!(RatFunc::new(one, PolyT::zero(&f)).is_err());
    }

    #[test]
    fn twist_and_root() {
        let f = make_field_context(3, 1).unwrap();
        let a = PolyT::new(&f, vec![Fq(1), Fq(2)]);
        let tw = a.twist(1);
        assert_eq!(tw, a.pow(3));
        assert_eq!(tw.q_th_root().unwrap(), a);
        assert!(a.q_th_root().is_none());
    }
}
