//! Power sums `S_d(s) = Σ_{a monic, deg a = d} 1/a^s` by enumeration, by
//! closed formula, and by interpolation through `H_{s−1}Ω^s`.

use std::collections::HashMap;

use crate::carlitz::{special_poly, CarlitzCache, SpecialKind};
use crate::error::{Error, Result};
use crate::field::{binomial_mod_p, Field, Fq};
use crate::poly::{PolyT, RatFunc};
use crate::series::{inverse_power_series, TildeSeries, EXACT};
use crate::tseries::{Profile, TSeries};

/// Default cap on the number of monics `power_sum_brute` enumerates.
pub const DEFAULT_BRUTE_BUDGET: u128 = 10_000_000;
/// Largest degree the automatic method choice sends to enumeration.
pub const DEFAULT_BRUTE_MAX_DEGREE: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Brute,
    Formula,
    Interp,
    /// Delayed interpolation with delay `w ≥ 1`.
    Delayed(u32),
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Method::Brute),
            "formula" => Ok(Method::Formula),
            "interp" => Ok(Method::Interp),
            "auto" => Ok(Method::Auto),
            _ => match s.strip_prefix("delayed") {
                Some(w) => w
                    .trim_start_matches([':', '='])
                    .parse()
                    .map(Method::Delayed)
                    .map_err(|_| Error::InvalidArgument(format!("bad delay in {s:?}"))),
                None => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
            },
        }
    }
}

/// Which closed formula applies to an exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaShape {
    /// `s = k·p^n`, `0 < k < q`: `S_d(s) = 1/ℓ_d^s`.
    PrimePower,
    /// `s = aq + b`, `0 < a, b < q`.
    Digits { a: u64, b: u64 },
}

pub fn formula_shape(q: u32, p: u32, s: u64) -> Option<FormulaShape> {
    let (q, p) = (q as u64, p as u64);
    if s == 0 {
        return None;
    }
    let mut k = s;
    while k % p == 0 {
        k /= p;
    }
    if k < q {
        return Some(FormulaShape::PrimePower);
    }
    let (a, b) = (s / q, s % q);
    (a > 0 && a < q && b > 0).then_some(FormulaShape::Digits { a, b })
}

/// Exact `S_d(s)` as an element of `K` when a closed formula applies.
pub fn power_sum_formula(field: &Field, d: u32, s: u64) -> Option<RatFunc> {
    let (num, den) = formula_parts(field, d, s)?;
    Some(RatFunc::new(num, den).expect("ℓ_d is nonzero"))
}

fn formula_parts(field: &Field, d: u32, s: u64) -> Option<(PolyT, PolyT)> {
    let shape = formula_shape(field.q(), field.p(), s)?;
    let ell = special_poly(field, SpecialKind::Ell, d).unwrap();
    let den = ell.pow(s);
    Some(match shape {
        FormulaShape::PrimePower => (PolyT::one(field), den),
        FormulaShape::Digits { a, b } => {
            let br1 = special_poly(field, SpecialKind::Bracket, 1).unwrap();
            (digits_numerator(field, d, a, b), den.mul(&br1.pow(a)))
        }
    })
}

/// `[1]^a · (1 + Σ_{j=1}^{a} (−1)^j C(b+j−1, j) [d]^{jq}/[1]^j)`, cleared of the `[1]` denominators.
fn digits_numerator(field: &Field, d: u32, a: u64, b: u64) -> PolyT {
    let q = field.q() as u64;
    let br1 = special_poly(field, SpecialKind::Bracket, 1).unwrap();
    let brd = if d == 0 {
        PolyT::zero(field)
    } else {
        special_poly(field, SpecialKind::Bracket, d).unwrap()
    };
    let mut num = br1.pow(a);
    for j in 1..=a {
        let c = binomial_mod_p(b + j - 1, j, field.p());
        if c == 0 {
            continue;
        }
        let mut c = field.from_int(c as i64);
        if j % 2 == 1 {
            c = field.neg(c);
        }
        num = num.add(&brd.pow(j * q).mul(&br1.pow(a - j)).scale(c));
    }
    num
}

/// Lower bound on `val_u` of the formula value, from degrees alone.
fn formula_valuation_bound(q: u64, d: u32, s: u64, shape: FormulaShape) -> i128 {
    let trivial = (q as i128 - 1) * d as i128 * s as i128;
    let qd = match (q as u128).checked_pow(d + 2) {
        Some(x) if x < 1 << 60 => x as i128 / (q as i128 * q as i128),
        // the value is at least (q−1)·q^d in both shapes
        _ => return i128::MAX,
    };
    // deg ℓ_d = q(q^d − 1)/(q − 1)
    let den_deg = s as i128 * q as i128 * (qd - 1) / (q as i128 - 1);
    let num_excess = match shape {
        FormulaShape::Digits { a, .. } if d > 0 => a as i128 * q as i128 * (qd - 1),
        _ => 0,
    };
    trivial.max((q as i128 - 1) * (den_deg - num_excess))
}

/// Series of `num/den` at `w = 0` to absolute precision `n`.
fn embed_fraction(num: &PolyT, den: &PolyT, n: i64) -> Result<TildeSeries> {
    let ns = TildeSeries::from_poly(num, 0);
    let ds = TildeSeries::from_poly(den, 0);
    ns.div_to(&ds, n)
}

/// Converts `Σ_k c_k y^k` (with `y = 1/t = −u^{q−1}`) into a `u`-series.
fn y_series_to_u(field: &Field, c: &[Fq], shift: i64, n: i64) -> TildeSeries {
    let q = field.q() as i64;
    let terms: Vec<(i64, Fq)> = c
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(k, &x)| {
            let e = shift + k as i64;
            (
                (q - 1) * e,
                if e % 2 == 1 { field.neg(x) } else { x },
            )
        })
        .collect();
    TildeSeries::from_terms(field, 0, &terms, n)
}

fn truncated_pow(field: &Field, x: &[Fq], mut e: u64, k: usize) -> Vec<Fq> {
    let mut acc = vec![Fq::ZERO; k];
    acc[0] = Fq::ONE;
    let mut base = x.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = field.convolve(&acc, &base, k);
            acc.resize(k, Fq::ZERO);
        }
        e >>= 1;
        if e > 0 {
            base = field.convolve(&base, &base, k);
            base.resize(k, Fq::ZERO);
        }
    }
    acc
}

/// `S_d(s)` by enumerating all `q^d` monics of degree `d`.
pub fn power_sum_brute(field: &Field, d: u32, s: u64, n: i64, budget: u128) -> Result<TildeSeries> {
    let q = field.q() as i64;
    let count = (q as u128).checked_pow(d).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    // 1/a^s = y^{ds} / ã(y)^s with ã(y) = y^d a(1/y) = 1 + a_{d−1} y + … + a_0 y^d
    let shift = d as i64 * s as i64;
    let ky = (n + q - 2).div_euclid(q - 1) - shift;
    if ky <= 0 {
        return Ok(TildeSeries::zero(field, 0, n));
    }
    let k = ky as usize;
    let mut total = vec![Fq::ZERO; k];
    let mut digits = vec![0u16; d as usize];
    loop {
        let mut rev = vec![Fq::ZERO; (d as usize + 1).min(k)];
        rev[0] = Fq::ONE;
        for (i, &dg) in digits.iter().enumerate() {
            // digit i is the coefficient of t^i, which sits at y^{d−i}
            let pos = d as usize - i;
            if pos < k {
                rev[pos] = Fq(dg);
            }
        }
        let inv = inverse_power_series(field, &rev, k);
        let term = truncated_pow(field, &inv, s, k);
        for (t, x) in total.iter_mut().zip(term) {
            *t = field.add(*t, x);
        }
        // base-q counter, constant coefficient fastest
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(y_series_to_u(field, &total, shift, n));
            }
            digits[i] += 1;
            if digits[i] as i64 == q {
                digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// `S_d(s)` from the closed formula as a series to precision `n`; `None` if no formula applies.
pub fn power_sum_formula_series(field: &Field, d: u32, s: u64, n: i64) -> Result<Option<TildeSeries>> {
    let q = field.q() as u64;
    let Some(shape) = formula_shape(field.q(), field.p(), s) else {
        return Ok(None);
    };
    if formula_valuation_bound(q, d, s, shape) >= n as i128 {
        return Ok(Some(TildeSeries::zero(field, 0, n)));
    }
    let (num, den) = formula_parts(field, d, s).unwrap();
    Ok(Some(embed_fraction(&num, &den, n)?))
}

/// Cached `K(T)·Ω^s` for one interpolation polynomial `K`.
struct GEntry {
    profile: Profile,
    m: usize,
    g: TSeries,
}

/// Lower bound (scaled by `q^w`) on `val_u` of the `T^k` coefficient of `Ω^s`.
fn omega_pow_bound(q: i64, s: u64, k: usize, w: u32) -> i64 {
    // s·q plus (q−1)·(sum of the k smallest of {q^i repeated s times, i ≥ 1})
    let mut total = s as i64 * q;
    let mut left = k as u64;
    let mut qi = q;
    while left > 0 {
        let take = left.min(s);
        total = total.saturating_add((q - 1).saturating_mul(qi).saturating_mul(take as i64));
        left -= take;
        qi = qi.saturating_mul(q);
    }
    total.saturating_mul(q.pow(w))
}

/// Power-sum engine. Holds per-computation caches; not shared between threads.
pub struct PowerSums {
    field: Field,
    carlitz: CarlitzCache,
    pub brute_budget: u128,
    pub brute_max_degree: u32,
    g_cache: HashMap<(u64, u32), GEntry>,
    r_cache: HashMap<u64, TildeSeries>,
    k_cache: HashMap<(u64, u32), Vec<TildeSeries>>,
}

impl PowerSums {
    pub fn new(field: &Field) -> Self {
        PowerSums {
            field: field.clone(),
            carlitz: CarlitzCache::new(field),
            brute_budget: DEFAULT_BRUTE_BUDGET,
            brute_max_degree: DEFAULT_BRUTE_MAX_DEGREE,
            g_cache: HashMap::new(),
            r_cache: HashMap::new(),
            k_cache: HashMap::new(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn carlitz(&mut self) -> &mut CarlitzCache {
        &mut self.carlitz
    }

    /// `S_d(s)` with the requested method.
    pub fn power_sum(&mut self, d: u32, s: u64, n: i64, method: Method) -> Result<TildeSeries> {
        if s == 0 {
            return Err(Error::InvalidArgument("power sums need s ≥ 1".into()));
        }
        match method {
            Method::Brute => power_sum_brute(&self.field, d, s, n, self.brute_budget),
            Method::Formula => power_sum_formula_series(&self.field, d, s, n)?.ok_or_else(|| {
                Error::InvalidArgument(format!("no closed formula for s = {s}"))
            }),
            Method::Interp => self.interp(d, s, n),
            Method::Delayed(w) => self.delayed(d, s, w, n),
            Method::Auto => self.auto(d, s, n),
        }
    }

    /// Formula when applicable, enumeration for small degree, interpolation otherwise.
    pub fn auto(&mut self, d: u32, s: u64, n: i64) -> Result<TildeSeries> {
        if d == 0 {
            return Ok(TildeSeries::one(&self.field).truncate(n));
        }
        if let Some(x) = power_sum_formula_series(&self.field, d, s, n)? {
            return Ok(x);
        }
        let q = self.field.q() as i64;
        if d as i64 * s as i64 * (q - 1) >= n {
            return Ok(TildeSeries::zero(&self.field, 0, n));
        }
        let count = (self.field.q() as u128).checked_pow(d).unwrap_or(u128::MAX);
        if d <= self.brute_max_degree && count <= self.brute_budget {
            return power_sum_brute(&self.field, d, s, n, self.brute_budget);
        }
        self.interp(d, s, n)
    }

    /// `π̃^s/Γ_s` to relative precision `rel`.
    fn prefactor(&mut self, s: u64, rel: i64) -> Result<TildeSeries> {
        if let Some(r) = self.r_cache.get(&s) {
            if r.precision() - r.valuation().unwrap() >= rel {
                return Ok(r.truncate(r.valuation().unwrap() + rel));
            }
        }
        let q = self.field.q() as i64;
        let pi = self.carlitz.pi_tilde(rel - q);
        let gamma = TildeSeries::from_poly(&self.carlitz.gamma(s)?, 0);
        let vg = gamma.valuation().unwrap();
        let ginv = gamma.inv_to(-vg + rel)?;
        let r = pi.pow(s).mul(&ginv);
        self.r_cache.insert(s, r.clone());
        Ok(r)
    }

    /// The T-polynomial `H_{s−1}^{(−w)}·[(T−t)^{(0)}⋯(T−t)^{(−w+1)}]^s` with exact series coefficients.
    pub fn interpolation_poly(&mut self, s: u64, w: u32) -> Result<Vec<TildeSeries>> {
        if let Some(k) = self.k_cache.get(&(s, w)) {
            return Ok(k.clone());
        }
        let f = self.field.clone();
        let h = self.carlitz.h(s as usize - 1)?;
        let mut k: Vec<TildeSeries> = h
            .coeffs()
            .iter()
            .map(|c| TildeSeries::from_poly(c, 0).twist(-(w as i64)))
            .collect::<Result<_>>()?;
        if k.is_empty() {
            k.push(TildeSeries::zero(&f, 0, EXACT));
        }
        for j in 0..w {
            // (T − t^{1/q^j})^s
            let root = TildeSeries::t_power(&f, 1, 0).twist(-(j as i64))?;
            for _ in 0..s {
                let mut next = vec![TildeSeries::zero(&f, 0, EXACT); k.len() + 1];
                for (l, c) in k.iter().enumerate() {
                    next[l + 1] = next[l + 1].add(c);
                    next[l] = next[l].sub(&c.mul(&root));
                }
                k = next;
            }
        }
        let wmax = k.iter().map(|c| c.w()).max().unwrap_or(0).max(w);
        let k: Vec<TildeSeries> = k.into_iter().map(|c| c.lift(wmax)).collect();
        self.k_cache.insert((s, w), k.clone());
        Ok(k)
    }

    /// `X = (K·Ω^s)^{(shift)}|_{T=t}` to absolute precision `nx`, where `K` is
    /// the interpolation polynomial at delay `w`.
    fn interpolate(&mut self, s: u64, w: u32, shift: u32, nx: i64) -> Result<TildeSeries> {
        let f = self.field.clone();
        let q = f.q() as i64;
        let k = self.interpolation_poly(s, w)?;
        let lattice = k.iter().map(|c| c.w()).max().unwrap_or(0);
        let vals: Vec<Option<i64>> = k.iter().map(|c| c.valuation()).collect();
        // lower bound on val of coefficient j of K·Ω^s, scaled at `lattice`
        let bound = |j: usize| -> i64 {
            vals.iter()
                .enumerate()
                .take(j + 1)
                .filter_map(|(l, v)| v.map(|v| v + omega_pow_bound(q, s, j - l, lattice)))
                .min()
                .unwrap_or(EXACT)
        };
        // after the shift-fold twist, lattice-`lattice` exponents become lattice-0 exponents × q^{shift−lattice}
        let spread = q.checked_pow(shift - lattice).unwrap_or(i64::MAX);
        let lb = |j: usize| bound(j).saturating_mul(spread).saturating_sub((q - 1) * j as i64);
        let deg_k = k.len();
        let mut m = deg_k;
        while lb(m) < nx {
            m += 1;
        }
        m += 1;
        if (0..m).all(|j| lb(j) >= nx) {
            return Ok(TildeSeries::zero(&f, 0, nx));
        }
        let need = Profile {
            w: lattice,
            base: nx.div_euclid(spread) + 1,
            slope: (q - 1 + spread - 1) / spread,
        };
        let g = self.g_series(s, w, &k, m, need)?;
        let eval_profile = Profile::for_eval(&f, 0, nx);
        let tw = g.truncate_len(m).twist(shift as i64, Some(eval_profile))?;
        tw.eval_partial(nx, 0)
    }

    fn g_series(
        &mut self,
        s: u64,
        w: u32,
        k: &[TildeSeries],
        m: usize,
        need: Profile,
    ) -> Result<TSeries> {
        if let Some(e) = self.g_cache.get(&(s, w)) {
            if e.m >= m && e.profile.base >= need.base && e.profile.slope >= need.slope {
                return Ok(e.g.truncate(need));
            }
        }
        let (m, need) = match self.g_cache.get(&(s, w)) {
            Some(e) => (
                m.max(e.m),
                Profile {
                    w: need.w,
                    base: need.base.max(e.profile.base),
                    slope: need.slope.max(e.profile.slope),
                },
            ),
            None => (m, need),
        };
        // Ω^s must absorb the negative valuations of K's coefficients and the index shift
        let extra = k
            .iter()
            .enumerate()
            .filter_map(|(l, c)| c.valuation().map(|v| need.slope * l as i64 - v))
            .max()
            .unwrap_or(0)
            .max(0);
        let om = crate::carlitz::omega_pow(&self.field, s, m, need.shifted(extra));
        let g = om.mul_tpoly(k).truncate(need);
        self.g_cache.insert(
            (s, w),
            GEntry {
                profile: need,
                m,
                g: g.clone(),
            },
        );
        Ok(g)
    }

    /// `S_d(s) = π̃^s/Γ_s · (H_{s−1}Ω^s)^{(d)}|_{T=t}` to precision `n`.
    pub fn interp(&mut self, d: u32, s: u64, n: i64) -> Result<TildeSeries> {
        self.interp_delayed(d, s, 0, n)
    }

    /// Delayed interpolation with delay `w ≥ 1`.
    pub fn delayed(&mut self, d: u32, s: u64, w: u32, n: i64) -> Result<TildeSeries> {
        if w == 0 {
            return Err(Error::InvalidArgument("delay must be at least 1".into()));
        }
        self.interp_delayed(d, s, w, n)
    }

    fn interp_delayed(&mut self, d: u32, s: u64, w: u32, n: i64) -> Result<TildeSeries> {
        if s == 0 {
            return Err(Error::InvalidArgument("power sums need s ≥ 1".into()));
        }
        let q = self.field.q() as i64;
        let deg_gamma = self.carlitz.gamma(s)?.degree().unwrap() as i64;
        let v_r = -(s as i64) * q + (q - 1) * deg_gamma;
        let nx = n - v_r;
        let x = self.interpolate(s, w, d + w, nx)?;
        if x.is_zero() {
            return Ok(TildeSeries::zero(&self.field, 0, n));
        }
        let rel = (n - x.valuation().unwrap() - v_r).max(1);
        let r = self.prefactor(s, rel)?;
        Ok(r.mul(&x).truncate(n).normalize())
    }

    /// `Π_i S_{d_i}(s_i)` to precision `n` with automatic method choice.
    pub fn multi(&mut self, ds: &[u32], ss: &[u64], n: i64) -> Result<TildeSeries> {
        if ds.len() != ss.len() || ds.is_empty() {
            return Err(Error::InvalidArgument(
                "degree and exponent vectors must have equal nonzero length".into(),
            ));
        }
        let q = self.field.q() as i64;
        let vals: Vec<i64> = ds
            .iter()
            .zip(ss)
            .map(|(&d, &s)| d as i64 * s as i64 * (q - 1))
            .collect();
        let total: i64 = vals.iter().sum();
        if total >= n {
            return Ok(TildeSeries::zero(&self.field, 0, n));
        }
        let mut acc = TildeSeries::one(&self.field);
        for (i, (&d, &s)) in ds.iter().zip(ss).enumerate() {
            // the other factors contribute at least their valuation bounds
            let others = total - vals[i];
            let x = self.auto(d, s, n - others)?;
            acc = acc.mul(&x);
        }
        Ok(acc.truncate(n))
    }
}

/// `S_d(s)` by interpolation, with a fresh engine.
pub fn power_sum_interp(field: &Field, d: u32, s: u64, n: i64) -> Result<TildeSeries> {
    PowerSums::new(field).interp(d, s, n)
}

/// `S_d(s)` by delayed interpolation, with a fresh engine.
pub fn power_sum_delayed(field: &Field, d: u32, s: u64, w: u32, n: i64) -> Result<TildeSeries> {
    PowerSums::new(field).delayed(d, s, w, n)
}

/// `Π_i S_{d_i}(s_i)`, with a fresh engine.
pub fn multi_power_sum(field: &Field, ds: &[u32], ss: &[u64], n: i64) -> Result<TildeSeries> {
    PowerSums::new(field).multi(ds, ss, n)
}
