//! Truncated Laurent series in `u = 1/t̃` over `F_q`.
//!
//! Exponents live in the lattice `(1/q^w)·Z`; they are stored as integers
//! scaled by `q^w`. A series carries an absolute precision `prec` (also
//! scaled): every coefficient below `u^{prec/q^w}` is known, nothing above it
//! is. `t = −t̃^{q−1}` embeds `K_∞ = F_q((1/t))` as the series whose exponents
//! are multiples of `(q−1)·q^w`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldContext, Fq};
use crate::poly::{PolyT, RatFunc};

/// Precision of a series known exactly (a Laurent polynomial).
pub const EXACT: i64 = 1 << 60;

/// Default cap on the lattice exponent `w`.
pub const DEFAULT_LATTICE_CAP: u32 = 4;

#[inline]
pub(crate) fn sadd(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

#[inline]
pub(crate) fn smul(a: i64, k: i64) -> i64 {
    if a >= EXACT {
        return EXACT;
    }
    match a.checked_mul(k) {
        Some(v) if v < EXACT && v > -EXACT => v,
        _ if a > 0 => EXACT,
        _ => -EXACT,
    }
}

fn q_pow(q: u32, w: u32) -> i64 {
    (q as i64).pow(w)
}

/// A truncated Laurent series in `u = 1/t̃` with exponents in `(1/q^w)·Z`.
#[derive(Clone)]
pub struct TildeSeries {
    field: Field,
    w: u32,
    /// Scaled exponent of `coeffs[0]`; equals `prec` for the zero series.
    val: i64,
    coeffs: Vec<Fq>,
    prec: i64,
}

impl fmt::Debug for TildeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(12))
    }
}

impl TildeSeries {
    /// Builds a series from `(scaled exponent, coefficient)` pairs; terms at or
    /// above `prec` are dropped.
    pub fn from_terms(field: &Field, w: u32, terms: &[(i64, Fq)], prec: i64) -> Self {
        let kept: Vec<(i64, Fq)> = terms
            .iter()
            .copied()
            .filter(|&(e, c)| e < prec && !c.is_zero())
            .collect();
        if kept.is_empty() {
            return Self::zero(field, w, prec);
        }
        let lo = kept.iter().map(|t| t.0).min().unwrap();
        let hi = kept.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![Fq::ZERO; (hi - lo + 1) as usize];
        for (e, c) in kept {
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = field.add(*slot, c);
        }
        Self::from_dense(field, w, lo, coeffs, prec)
    }

    pub(crate) fn from_dense(field: &Field, w: u32, val: i64, coeffs: Vec<Fq>, prec: i64) -> Self {
        let mut s = TildeSeries {
            field: field.clone(),
            w,
            val,
            coeffs,
            prec,
        };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let keep = (self.prec - self.val).clamp(0, i64::MAX) as usize;
        if self.coeffs.len() > keep {
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = self.prec;
            }
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
        }
    }

    /// The zero series known to precision `prec`.
    pub fn zero(field: &Field, w: u32, prec: i64) -> Self {
        TildeSeries {
            field: field.clone(),
            w,
            val: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn one(field: &Field) -> Self {
        Self::monomial(field, Fq::ONE, 0, 0)
    }

    /// Exact `c · u^{e/q^w}`.
    pub fn monomial(field: &Field, c: Fq, e: i64, w: u32) -> Self {
        Self::from_terms(field, w, &[(e, c)], EXACT)
    }

    /// Exact image of `t^k = (−1)^k u^{−(q−1)k}` at lattice `w`.
    pub fn t_power(field: &Field, k: i64, w: u32) -> Self {
        let q = field.q() as i64;
        let sign = if k.rem_euclid(2) == 0 {
            Fq::ONE
        } else {
            field.neg(Fq::ONE)
        };
        Self::monomial(field, sign, -(q - 1) * k * q_pow(field.q(), w), w)
    }

    /// Exact image of a polynomial in `t`.
    pub fn from_poly(p: &PolyT, w: u32) -> Self {
        let field = p.field();
        let q = field.q() as i64;
        let scale = q_pow(field.q(), w);
        let terms: Vec<(i64, Fq)> = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| {
                let c = if i % 2 == 1 { field.neg(c) } else { c };
                (-(q - 1) * i as i64 * scale, c)
            })
            .collect();
        Self::from_terms(field, w, &terms, EXACT)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    /// Lattice exponent: stored exponents are scaled by `q^w`.
    pub fn w(&self) -> u32 {
        self.w
    }
    pub fn scale(&self) -> i64 {
        q_pow(self.field.q(), self.w)
    }
    /// Absolute precision (scaled).
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }
    /// Scaled valuation; `None` if the series is zero to its precision.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.val)
    }
    /// Lower bound on the valuation: the valuation, or the precision for zero.
    pub fn val_bound(&self) -> i64 {
        self.val
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn num_terms(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Coefficient at a scaled exponent; `None` beyond the precision.
    pub fn coeff(&self, e: i64) -> Option<Fq> {
        if e >= self.prec {
            return None;
        }
        if e < self.val {
            return Some(Fq::ZERO);
        }
        Some(
            self.coeffs
                .get((e - self.val) as usize)
                .copied()
                .unwrap_or(Fq::ZERO),
        )
    }

    /// Nonzero terms as `(scaled exponent, coefficient)`, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fq)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.val + i as i64, c))
    }

    /// Truncates to `min(prec, self.prec)`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let mut s = self.clone();
        s.prec = prec;
        s.trim();
        s
    }

    /// Re-expresses the series at a finer lattice `w' ≥ w`.
    pub fn lift(&self, w: u32) -> Self {
        assert!(w >= self.w, "lift can only refine the lattice");
        if w == self.w {
            return self.clone();
        }
        let k = q_pow(self.field.q(), w - self.w);
        let mut coeffs = Vec::new();
        if !self.coeffs.is_empty() {
            coeffs = vec![Fq::ZERO; (self.coeffs.len() - 1) * k as usize + 1];
            for (i, &c) in self.coeffs.iter().enumerate() {
                coeffs[i * k as usize] = c;
            }
        }
        TildeSeries {
            field: self.field.clone(),
            w,
            val: smul(self.val, k),
            coeffs,
            prec: smul(self.prec, k),
        }
    }

    /// Coarsens the lattice as far as the stored exponents allow.
    pub fn normalize(mut self) -> Self {
        let q = self.field.q() as i64;
        while self.w > 0 {
            let divisible = self.terms().all(|(e, _)| e.rem_euclid(q) == 0);
            if !divisible {
                break;
            }
            let coeffs: Vec<Fq> = if self.coeffs.is_empty() {
                Vec::new()
            } else {
                self.coeffs.iter().step_by(q as usize).copied().collect()
            };
            let val = if self.coeffs.is_empty() {
                0
            } else {
                self.val.div_euclid(q)
            };
            let prec = if self.prec >= EXACT {
                EXACT
            } else {
                // ceil: coarse exponents below ceil(prec/q) are fine exponents below prec
                -((-self.prec).div_euclid(q))
            };
            self.w -= 1;
            self.coeffs = coeffs;
            self.val = if self.coeffs.is_empty() { prec } else { val };
            self.prec = prec;
            self.trim();
        }
        self
    }

    fn check_field(&self, other: &Self) {
        assert!(
            *self.field == *other.field,
            "series over different fields combined"
        );
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        self.check_field(other);
        let w = self.w.max(other.w);
        (self.lift(w), other.lift(w))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.w != other.w {
            let (a, b) = self.aligned(other);
            return a.add(&b);
        }
        self.check_field(other);
        let prec = self.prec.min(other.prec);
        let f = &self.field;
        let lo = self.val.min(other.val);
        if lo >= prec {
            return Self::zero(f, self.w, prec);
        }
        let top = |s: &Self| {
            if s.coeffs.is_empty() {
                i64::MIN
            } else {
                s.val + s.coeffs.len() as i64
            }
        };
        let hi = top(self).max(top(other)).min(prec);
        if hi <= lo {
            return Self::zero(f, self.w, prec);
        }
        let mut coeffs = vec![Fq::ZERO; (hi - lo) as usize];
        for (e, c) in self.terms() {
            if e < hi {
                coeffs[(e - lo) as usize] = c;
            }
        }
        for (e, c) in other.terms() {
            if e < hi {
                let slot = &mut coeffs[(e - lo) as usize];
                *slot = f.add(*slot, c);
            }
        }
        Self::from_dense(f, self.w, lo, coeffs, prec)
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = self.field.neg(*c);
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies by a scalar in `F_q`.
    pub fn scale_by(&self, c: Fq) -> Self {
        if c.is_zero() {
            return Self::zero(&self.field, self.w, EXACT);
        }
        let mut s = self.clone();
        for x in s.coeffs.iter_mut() {
            *x = self.field.mul(*x, c);
        }
        s
    }

    /// Multiplies by `c·u^{e/q^w}` (scaled exponent at this series' lattice).
    pub fn mul_monomial(&self, c: Fq, e: i64) -> Self {
        let mut s = self.scale_by(c);
        if c.is_zero() {
            return s;
        }
        s.val = sadd(s.val, e);
        s.prec = sadd(s.prec, e);
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.w != other.w {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        self.check_field(other);
        let val = sadd(self.val, other.val);
        let prec = sadd(self.prec, other.val).min(sadd(other.prec, self.val));
        if self.is_zero() || other.is_zero() || val >= prec {
            return Self::zero(&self.field, self.w, prec);
        }
        let len = if prec >= EXACT {
            self.coeffs.len() + other.coeffs.len() - 1
        } else {
            (prec - val) as usize
        };
        let coeffs = self.field.convolve(&self.coeffs, &other.coeffs, len);
        Self::from_dense(&self.field, self.w, val, coeffs, prec)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplicative inverse to the relative precision the input carries.
    /// Exact non-monomial inputs need an explicit cap: see [`Self::inv_to`].
    pub fn inv(&self) -> Result<Self> {
        if self.is_exact() && self.num_terms() > 1 {
            return Err(Error::InsufficientPrecision(
                "inverse of an exact non-monomial needs a precision cap".into(),
            ));
        }
        self.inv_to(EXACT)
    }

    /// Inverse known to absolute precision `min(cap, propagated)`.
    pub fn inv_to(&self, cap: i64) -> Result<Self> {
        let v = self.valuation().ok_or_else(|| {
            Error::InsufficientPrecision("inverse of a series indistinguishable from 0".into())
        })?;
        let f = &self.field;
        let propagated = if self.prec >= EXACT {
            EXACT
        } else {
            self.prec - 2 * v
        };
        let prec = propagated.min(cap);
        if self.num_terms() == 1 {
            return Ok(Self::from_dense(
                f,
                self.w,
                -v,
                vec![f.inv(self.coeffs[0])],
                prec,
            ));
        }
        if prec >= EXACT {
            return Err(Error::InsufficientPrecision(
                "inverse of an exact non-monomial needs a precision cap".into(),
            ));
        }
        let rel = (prec + v).max(0) as usize;
        if rel == 0 {
            return Ok(Self::zero(f, self.w, prec));
        }
        let h: Vec<Fq> = self.coeffs.iter().take(rel).copied().collect();
        let g = inverse_power_series(f, &h, rel);
        Ok(Self::from_dense(f, self.w, -v, g, prec))
    }

    /// Quotient. An exact non-monomial divisor needs an inexact numerator,
    /// whose precision bounds the result.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_exact() && other.num_terms() > 1 {
            if self.is_exact() {
                return Err(Error::InsufficientPrecision(
                    "exact quotient needs a precision cap".into(),
                ));
            }
            let vo = other.valuation().unwrap_or(0);
            return self.div_to(other, self.prec - vo);
        }
        Ok(self.mul(&other.inv()?))
    }

    /// Quotient to absolute precision at most `cap`.
    pub fn div_to(&self, other: &Self, cap: i64) -> Result<Self> {
        let vs = self.val_bound();
        let inv = other.inv_to(cap - vs.min(cap))?;
        Ok(self.mul(&inv).truncate(cap))
    }

    /// `x ↦ x^p`: coefficients raised to the p-th power, exponents scaled by p.
    pub fn frobenius_p(&self) -> Self {
        let f = &self.field;
        let p = f.p() as i64;
        if self.coeffs.is_empty() {
            return Self::zero(f, self.w, smul(self.prec, p));
        }
        let mut coeffs = vec![Fq::ZERO; (self.coeffs.len() - 1) * p as usize + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * p as usize] = f.frobenius(c, 1);
        }
        Self::from_dense(f, self.w, smul(self.val, p), coeffs, smul(self.prec, p))
    }

    /// `x^n` for `n ≥ 0`, using the additive p-th power map on base-p digits.
    pub fn pow(&self, mut n: u64) -> Self {
        let p = self.field.p() as u64;
        let mut result = Self::one(&self.field).lift(self.w);
        let mut cur = self.clone();
        while n > 0 {
            let d = n % p;
            for _ in 0..d {
                result = result.mul(&cur);
            }
            n /= p;
            if n > 0 {
                cur = cur.frobenius_p();
            }
        }
        result
    }

    /// Twist `f ↦ f^{(n)}`: exponents multiplied by `q^n`, `F_q` coefficients fixed.
    pub fn twist(&self, n: i64) -> Result<Self> {
        self.twist_with(n, EXACT, DEFAULT_LATTICE_CAP)
    }

    /// Twist, truncating the result at absolute precision `cap` (scaled in the
    /// result's lattice after normalization is not guaranteed; the cap is
    /// applied in lattice `w = max(0, w − n)`) and with lattice cap `max_w`.
    pub fn twist_with(&self, n: i64, cap: i64, max_w: u32) -> Result<Self> {
        let q = self.field.q();
        if n == 0 {
            return Ok(self.truncate(cap));
        }
        if n < 0 {
            let needed = self.w + (-n) as u32;
            let mut s = self.clone();
            s.w = needed;
            let s = s.normalize();
            if s.w > max_w {
                return Err(Error::LatticeCap {
                    needed: s.w,
                    cap: max_w,
                });
            }
            return Ok(s.truncate(cap));
        }
        let n = n as u32;
        if self.w >= n {
            let mut s = self.clone();
            s.w -= n;
            return Ok(s.truncate(cap).normalize());
        }
        // w < n: move to lattice 0 and spread by q^{n-w}
        let k = (q as i64).checked_pow(n - self.w).unwrap_or(EXACT);
        let f = &self.field;
        let prec = smul(self.prec, k).min(cap);
        let val = smul(self.val, k);
        if self.coeffs.is_empty() || val >= prec {
            return Ok(Self::zero(f, 0, prec));
        }
        let terms: Vec<(i64, Fq)> = self
            .terms()
            .map(|(e, c)| (smul(e, k), c))
            .take_while(|&(e, _)| e < prec)
            .collect();
        Ok(Self::from_terms(f, 0, &terms, prec).normalize())
    }

    /// Degree at infinity, `−val/((q−1)q^w)`, as a reduced fraction.
    pub fn deg_at_infinity(&self) -> Result<(i64, i64)> {
        let v = self.valuation().ok_or_else(|| {
            Error::InsufficientPrecision("degree of a series indistinguishable from 0".into())
        })?;
        let den = (self.field.q() as i64 - 1) * self.scale();
        let g = gcd_i64(v.abs(), den);
        Ok((-v / g, den / g))
    }

    /// True if every exponent is a multiple of `(q−1)·q^w` (the series lies in `K_∞`).
    pub fn in_k_infinity(&self) -> bool {
        let step = (self.field.q() as i64 - 1) * self.scale();
        self.terms().all(|(e, _)| e.rem_euclid(step) == 0)
    }

    /// First scaled exponent (at the common lattice) where the two series
    /// differ, below their common precision. `None` if they agree.
    pub fn first_difference(&self, other: &Self) -> Option<i64> {
        self.sub(other).valuation()
    }

    /// Agreement to the common precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }

    /// Embedding of `K = F_q(t)` into the series ring, to absolute precision `prec` (w = 0).
    pub fn embed_rational(f: &RatFunc, prec: i64) -> Result<Self> {
        if f.den().is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let num = Self::from_poly(f.num(), 0);
        let den = Self::from_poly(f.den(), 0);
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let vn = num.val_bound().min(prec);
        let inv = den.inv_to(prec - vn)?;
        Ok(num.mul(&inv).truncate(prec))
    }

    /// Human-readable rendering with at most `max_terms` terms.
    pub fn display(&self, max_terms: usize) -> String {
        let f = &self.field;
        let scale = self.scale();
        let exp = |e: i64| -> String {
            if scale == 1 {
                e.to_string()
            } else {
                let g = gcd_i64(e.abs(), scale);
                if scale / g == 1 {
                    (e / g).to_string()
                } else {
                    format!("{}/{}", e / g, scale / g)
                }
            }
        };
        let mut parts: Vec<String> = self
            .terms()
            .take(max_terms)
            .map(|(e, c)| {
                let cs = f.format(c);
                if e == 0 {
                    cs
                } else if c == Fq::ONE {
                    format!("u^({})", exp(e))
                } else {
                    format!("{cs}*u^({})", exp(e))
                }
            })
            .collect();
        if self.num_terms() > max_terms {
            parts.push("...".into());
        }
        if !self.is_exact() {
            parts.push(format!("O(u^({}))", exp(self.prec)));
        }
        if parts.is_empty() {
            return "0".into();
        }
        parts.join(" + ")
    }

    /// F_p coordinates of the coefficients at scaled exponents `start..start+len`.
    pub fn coordinate_window(&self, start: i64, len: usize) -> Vec<u32> {
        let m = self.field.m() as usize;
        let mut out = Vec::with_capacity(len * m);
        for e in start..start + len as i64 {
            let c = self.coeff(e).unwrap_or(Fq::ZERO);
            out.extend(self.field.coords(c));
        }
        out
    }

    pub fn to_json(&self) -> SeriesJson {
        let f = &self.field;
        SeriesJson {
            p: f.p(),
            m: f.m(),
            q: f.q(),
            modulus: f.modulus().to_vec(),
            variable: "1/t~".into(),
            lattice_denom_exp: self.w,
            precision_scaled: (!self.is_exact()).then_some(self.prec),
            terms: self
                .terms()
                .map(|(e, c)| TermJson {
                    e,
                    c: f.coords(c),
                })
                .collect(),
        }
    }

    /// Reads the shared JSON series format. The field must match `field`.
    pub fn from_json(field: &Field, j: &SeriesJson) -> Result<Self> {
        if j.p != field.p() || j.m != field.m() || j.modulus != field.modulus() {
            return Err(Error::FieldMismatch);
        }
        if j.terms.windows(2).any(|w| w[0].e >= w[1].e) {
            return Err(Error::Parse("terms must be sorted by e ascending".into()));
        }
        let prec = j.precision_scaled.unwrap_or(EXACT);
        let terms = j
            .terms
            .iter()
            .map(|t| Ok((t.e, field.from_coords(&t.c)?)))
            .collect::<Result<Vec<_>>>()?;
        if terms.iter().any(|&(e, c)| e >= prec || c.is_zero()) {
            return Err(Error::Parse("terms must be nonzero and below precision".into()));
        }
        Ok(Self::from_terms(field, j.lattice_denom_exp, &terms, prec))
    }

    /// Reads a series with its own field context.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: SeriesJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let field = FieldContext::new(j.p as u64, j.m)?;
        Self::from_json(&field, &j)
    }
}

/// The shared JSON series schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u32,
    pub m: u32,
    pub q: u32,
    pub modulus: Vec<u32>,
    pub variable: String,
    #[serde(rename = "latticeDenomExp")]
    pub lattice_denom_exp: u32,
    /// `null` for an exact (finite) series.
    #[serde(rename = "precisionScaled")]
    pub precision_scaled: Option<i64>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: i64,
    pub c: Vec<u32>,
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}

/// Inverse of a power series with nonzero constant term, to `n` terms (Newton iteration).
pub(crate) fn inverse_power_series(f: &Field, h: &[Fq], n: usize) -> Vec<Fq> {
    let mut g = vec![f.inv(h[0])];
    let mut have = 1usize;
    let two = f.from_int(2);
    while have < n {
        let next = (2 * have).min(n);
        let hn = &h[..next.min(h.len())];
        let mut e = f.convolve(hn, &g, next);
        e.resize(next, Fq::ZERO);
        for x in e.iter_mut() {
            *x = f.neg(*x);
        }
        e[0] = f.add(e[0], two);
        g = f.convolve(&g, &e, next);
        g.resize(next, Fq::ZERO);
        have = next;
    }
    g.truncate(n);
    g
}
