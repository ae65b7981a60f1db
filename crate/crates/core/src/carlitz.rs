//! Carlitz special polynomials, the Carlitz gamma function, `Ω`, `π̃`, and
//! the Anderson-Thakur polynomials `H_s`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::poly::{PolyT, TPoly};
use crate::series::{TildeSeries, EXACT};
use crate::tseries::{Profile, TSeries};

/// Which special polynomial [`special_poly`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    /// `[n] = t^{q^n} − t`
    Bracket,
    /// `D_n = Π_{i<n} (t^{q^n} − t^{q^i})`
    D,
    /// `ℓ_n = Π_{i=1}^{n} (t − t^{q^i})`
    Ell,
    /// `L_n = (−1)^n ℓ_n`
    L,
}

fn t_pow_qn(field: &Field, n: u32) -> PolyT {
    PolyT::monomial(field, Fq::ONE, (field.q() as usize).pow(n))
}

pub fn special_poly(field: &Field, kind: SpecialKind, n: u32) -> Result<PolyT> {
    let one = PolyT::one(field);
    Ok(match kind {
        SpecialKind::Bracket => {
            if n == 0 {
                return Err(Error::InvalidArgument("[n] needs n ≥ 1".into()));
            }
            t_pow_qn(field, n).sub(&PolyT::t(field))
        }
        SpecialKind::D => (0..n).fold(one, |acc, i| {
            acc.mul(&t_pow_qn(field, n).sub(&t_pow_qn(field, i)))
        }),
        SpecialKind::Ell => (1..=n).fold(one, |acc, i| {
            acc.mul(&PolyT::t(field).sub(&t_pow_qn(field, i)))
        }),
        SpecialKind::L => {
            let ell = special_poly(field, SpecialKind::Ell, n)?;
            if n % 2 == 1 {
                ell.neg()
            } else {
                ell
            }
        }
    })
}

/// Base-`q` digits of `n`, least significant first.
pub fn base_q_digits(n: u64, q: u32) -> Vec<u64> {
    let mut v = Vec::new();
    let mut n = n;
    while n > 0 {
        v.push(n % q as u64);
        n /= q as u64;
    }
    v
}

/// `Γ_n = Π_i D_i^{n_i}` where `n − 1 = Σ n_i q^i`.
pub fn carlitz_gamma(field: &Field, n: u64) -> Result<PolyT> {
    if n < 1 {
        return Err(Error::InvalidArgument("Γ_n needs n ≥ 1".into()));
    }
    let mut acc = PolyT::one(field);
    for (i, &d) in base_q_digits(n - 1, field.q()).iter().enumerate() {
        if d > 0 {
            acc = acc.mul(&special_poly(field, SpecialKind::D, i as u32)?.pow(d));
        }
    }
    Ok(acc)
}

/// `Ω^n` as a T-series with `m` coefficients meeting `profile`.
pub fn omega_pow(field: &Field, n: u64, m: usize, profile: Profile) -> TSeries {
    let q = field.q() as i64;
    let shift = n as i64 * q * q.pow(profile.w);
    let start = profile.shifted(-shift);
    let mut coeffs: Vec<TildeSeries> = (0..m)
        .map(|j| TildeSeries::zero(field, profile.w, start.at(j)))
        .collect();
    if m > 0 {
        coeffs[0] = TildeSeries::one(field).lift(profile.w).truncate(start.at(0));
    }
    TSeries::from_coeffs(field, coeffs, m)
        .mul_omega_pow(n)
        .expect("profile gives finite precision")
}

/// `Ω(T) = t̃^{−q} Π_{i≥1}(1 − T/t^{q^i})` with `m` T-coefficients, each to
/// precision `n` (lattice 0).
pub fn omega(field: &Field, m: usize, n: i64) -> TSeries {
    omega_pow(
        field,
        1,
        m,
        Profile {
            w: 0,
            base: n,
            slope: 0,
        },
    )
}

/// `Ω(t) = u^q Π_{i≥1}(1 − u^{(q−1)(q^i−1)})` to absolute precision `n`.
pub fn omega_at_t(field: &Field, n: i64) -> TildeSeries {
    let q = field.q() as i64;
    let mut acc = TildeSeries::monomial(field, Fq::ONE, q, 0).truncate(n);
    let mut qi = q;
    loop {
        let e = (q - 1) * (qi - 1);
        if q + e >= n {
            break;
        }
        let factor = TildeSeries::from_terms(
            field,
            0,
            &[(0, Fq::ONE), (e, field.neg(Fq::ONE))],
            EXACT,
        );
        acc = acc.mul(&factor);
        qi *= q;
    }
    acc
}

/// `π̃ = 1/Ω(t)` to absolute precision `n`.
pub fn pi_tilde(field: &Field, n: i64) -> TildeSeries {
    let q = field.q() as i64;
    omega_at_t(field, n + 2 * q)
        .inv()
        .expect("Ω(t) is a unit times u^q")
        .truncate(n)
}

/// Bivariate polynomial stored by `t`-degree, each row a polynomial in `T`.
#[derive(Clone)]
struct Bi {
    rows: Vec<PolyT>,
}

impl Bi {
    fn new(mut rows: Vec<PolyT>) -> Self {
        while rows.last().is_some_and(|r| r.is_zero()) {
            rows.pop();
        }
        Bi { rows }
    }
    fn from_tpoly(h: &TPoly) -> Self {
        let f = h.field();
        let dt = h.degree_t().map_or(0, |d| d + 1);
        let rows = (0..dt)
            .map(|i| {
                PolyT::new(
                    f,
                    (0..h.coeffs().len()).map(|j| h.coeff2(i, j)).collect(),
                )
            })
            .collect();
        Bi::new(rows)
    }
    fn to_tpoly(&self, f: &Field) -> TPoly {
        let dt = self.rows.iter().filter_map(|r| r.degree()).max().map_or(0, |d| d + 1);
        TPoly::new(
            f,
            (0..dt)
                .map(|j| PolyT::new(f, self.rows.iter().map(|r| r.coeff(j)).collect()))
                .collect(),
        )
    }
    fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }
    fn add(&self, o: &Bi, f: &Field) -> Bi {
        let n = self.rows.len().max(o.rows.len());
        let z = PolyT::zero(f);
        Bi::new(
            (0..n)
                .map(|i| self.rows.get(i).unwrap_or(&z).add(o.rows.get(i).unwrap_or(&z)))
                .collect(),
        )
    }
    fn mul(&self, o: &Bi, f: &Field) -> Bi {
        if self.is_zero() || o.is_zero() {
            return Bi::new(Vec::new());
        }
        let mut out = vec![PolyT::zero(f); self.rows.len() + o.rows.len() - 1];
        for (i, a) in self.rows.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.rows.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Bi::new(out)
    }
    fn scale_big_t(&self, p: &PolyT) -> Bi {
        Bi::new(self.rows.iter().map(|r| r.mul(p)).collect())
    }
    fn div_big_t(&self, p: &PolyT) -> Option<Bi> {
        self.rows
            .iter()
            .map(|r| r.div_exact(p).ok().flatten())
            .collect::<Option<Vec<_>>>()
            .map(Bi::new)
    }
    fn content(&self, f: &Field) -> PolyT {
        self.rows.iter().fold(PolyT::zero(f), |g, r| g.gcd(r))
    }
}

/// A fraction `num / den(T)` with a denominator in `T` only.
struct Frac {
    num: Bi,
    den: PolyT,
}

impl Frac {
    fn reduce(self, f: &Field) -> Frac {
        let g = self.num.content(f).gcd(&self.den);
        if g.degree().unwrap_or(0) == 0 {
            return self;
        }
        Frac {
            num: self.num.div_big_t(&g).expect("gcd divides content"),
            den: self.den.div_exact(&g).unwrap().expect("gcd divides den"),
        }
    }
    fn add(self, o: Frac, f: &Field) -> Frac {
        let g = self.den.gcd(&o.den);
        let a_mult = o.den.div_exact(&g).unwrap().unwrap();
        let b_mult = self.den.div_exact(&g).unwrap().unwrap();
        Frac {
            num: self.num.scale_big_t(&a_mult).add(&o.num.scale_big_t(&b_mult), f),
            den: self.den.mul(&a_mult),
        }
        .reduce(f)
    }
}

/// Anderson-Thakur polynomials `H_0..=H_{s_max}` from the generating series
/// `Σ_s H_s/Γ_{s+1}|_{t=T} x^s = (1 − Σ_i c_i x^{q^i})^{−1}`.
pub fn anderson_thakur_h(field: &Field, s_max: usize) -> Result<Vec<TPoly>> {
    let mut cache = CarlitzCache::new(field);
    cache.h_table(s_max)
}

/// Per-instance memo of the Carlitz quantities for one field.
pub struct CarlitzCache {
    field: Field,
    d: HashMap<u32, PolyT>,
    gamma: HashMap<u64, PolyT>,
    h: Vec<TPoly>,
    pi: Option<TildeSeries>,
}

impl CarlitzCache {
    pub fn new(field: &Field) -> Self {
        CarlitzCache {
            field: field.clone(),
            d: HashMap::new(),
            gamma: HashMap::new(),
            h: vec![TPoly::one(field)],
            pi: None,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d_poly(&mut self, n: u32) -> PolyT {
        if let Some(p) = self.d.get(&n) {
            return p.clone();
        }
        let p = special_poly(&self.field, SpecialKind::D, n).expect("D_n defined for n ≥ 0");
        self.d.insert(n, p.clone());
        p
    }

    pub fn gamma(&mut self, n: u64) -> Result<PolyT> {
        if n < 1 {
            return Err(Error::InvalidArgument("Γ_n needs n ≥ 1".into()));
        }
        if let Some(p) = self.gamma.get(&n) {
            return Ok(p.clone());
        }
        let mut acc = PolyT::one(&self.field);
        for (i, &d) in base_q_digits(n - 1, self.field.q()).iter().enumerate() {
            if d > 0 {
                acc = acc.mul(&self.d_poly(i as u32).pow(d));
            }
        }
        self.gamma.insert(n, acc.clone());
        Ok(acc)
    }

    /// `H_s`, extending the memo table as needed.
    pub fn h(&mut self, s: usize) -> Result<TPoly> {
        while self.h.len() <= s {
            let next = self.h.len();
            let hs = self.compute_h(next)?;
            self.h.push(hs);
        }
        Ok(self.h[s].clone())
    }

    pub fn h_table(&mut self, s_max: usize) -> Result<Vec<TPoly>> {
        self.h(s_max)?;
        Ok(self.h[..=s_max].to_vec())
    }

    fn compute_h(&mut self, s: usize) -> Result<TPoly> {
        let f = self.field.clone();
        let q = f.q() as usize;
        let gamma_s1 = self.gamma(s as u64 + 1)?;
        let mut total: Option<Frac> = None;
        let mut qi = 1usize;
        let mut i = 0u32;
        while qi <= s {
            // c_i numerator Π_{j=1}^{i} (T^{q^i} − t^{q^j}) as rows by t-degree
            let mut num = Bi::new(vec![PolyT::one(&f)]);
            for j in 1..=i {
                let mut rows = vec![PolyT::zero(&f); q.pow(j) + 1];
                rows[0] = PolyT::monomial(&f, Fq::ONE, qi);
                rows[q.pow(j)] = PolyT::constant(&f, f.neg(Fq::ONE));
                num = num.mul(&Bi::new(rows), &f);
            }
            let prev = Bi::from_tpoly(&self.h[s - qi]);
            let gamma_prev = self.gamma((s - qi) as u64 + 1)?;
            let den = self.d_poly(i).mul(&gamma_prev);
            let g = gamma_s1.gcd(&den);
            let up = gamma_s1.div_exact(&g)?.expect("gcd divides");
            let den = den.div_exact(&g)?.expect("gcd divides");
            let term = Frac {
                num: num.mul(&prev, &f).scale_big_t(&up),
                den,
            }
            .reduce(&f);
            total = Some(match total {
                None => term,
                Some(t) => t.add(term, &f),
            });
            qi *= q;
            i += 1;
        }
        let total = total.expect("s ≥ 1 has the i = 0 term");
        if total.den.degree() != Some(0) {
            return Err(Error::DenominatorNotCleared(s));
        }
        let c = f.inv(total.den.leading());
        let num = total.num.scale_big_t(&PolyT::constant(&f, c));
        Ok(num.to_tpoly(&f))
    }

    /// `π̃` to absolute precision `n`, memoized at the highest precision requested.
    pub fn pi_tilde(&mut self, n: i64) -> TildeSeries {
        if let Some(p) = &self.pi {
            if p.precision() >= n {
                return p.truncate(n);
            }
        }
        let p = pi_tilde(&self.field, n);
        self.pi = Some(p.clone());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;

    #[test]
    fn special_values() {
        let f = make_field_context(3, 1).unwrap();
        let t = PolyT::t(&f);
        let b1 = special_poly(&f, SpecialKind::Bracket, 1).unwrap();
        assert_eq!(b1, t.pow(3).sub(&t));
        assert_eq!(special_poly(&f, SpecialKind::D, 0).unwrap(), PolyT::one(&f));
        assert_eq!(special_poly(&f, SpecialKind::Ell, 0).unwrap(), PolyT::one(&f));
        let l2 = t.sub(&t.pow(3)).mul(&t.sub(&t.pow(9)));
        assert_eq!(special_poly(&f, SpecialKind::Ell, 2).unwrap(), l2);
    }

    #[test]
    fn gamma_digits() {
        let f = make_field_context(3, 1).unwrap();
        let d1 = special_poly(&f, SpecialKind::D, 1).unwrap();
        assert_eq!(carlitz_gamma(&f, 1).unwrap(), PolyT::one(&f));
        assert_eq!(carlitz_gamma(&f, 4).unwrap(), d1);
        assert_eq!(carlitz_gamma(&f, 5).unwrap(), d1);
        assert!(carlitz_gamma(&f, 0).is_err());
    }

    #[test]
    fn h_small_s_is_one() {
        for (p, m) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let f = make_field_context(p, m).unwrap();
            let h = anderson_thakur_h(&f, f.q() as usize - 1).unwrap();
            assert!(h.iter().all(|x| *x == TPoly::one(&f)));
        }
    }

    #[test]
    fn h_q_closed_form() {
        // H_q = 2T^q − T − t^q, which in characteristic 2 is T + t^2
        let f = make_field_context(3, 1).unwrap();
        let h = anderson_thakur_h(&f, 3).unwrap();
        let two = Fq(2);
        let expected = TPoly::new(
            &f,
            vec![
                PolyT::monomial(&f, two, 3),
                PolyT::constant(&f, two),
                PolyT::zero(&f),
                PolyT::constant(&f, two),
            ],
        );
        assert_eq!(h[3], expected);
        let f2 = make_field_context(2, 1).unwrap();
        let h2 = anderson_thakur_h(&f2, 2).unwrap();
        let expected2 = TPoly::new(
            &f2,
            vec![PolyT::monomial(&f2, Fq::ONE, 2), PolyT::one(&f2)],
        );
        assert_eq!(h2[2], expected2);
    }

    #[test]
    fn omega_leading_terms() {
        let f = make_field_context(3, 1).unwrap();
        let om = omega(&f, 3, 60);
        assert_eq!(om.coeff(0).valuation(), Some(3));
        assert_eq!(om.coeff(0).coeff(3), Some(Fq::ONE));
        assert_eq!(om.coeff(1).valuation(), Some(9));
    }

    #[test]
    fn omega_functional_equation() {
        for (p, m) in [(2, 1), (3, 1), (2, 2)] {
            let f = make_field_context(p, m).unwrap();
            let om = omega(&f, 6, 120);
            let lhs = om.twist(-1, None).unwrap();
            let rhs = om.mul_t_minus_theta_pow(1);
            assert_eq!(lhs.first_difference(&rhs), None);
            assert!(lhs.coeff(5).precision() * f.q() as i64 >= 120);
        }
    }

    #[test]
    fn omega_eval_is_inverse_pi() {
        let f = make_field_context(3, 1).unwrap();
        let n = 80;
        let profile = Profile::for_eval(&f, 0, n + 3);
        let om = omega_pow(&f, 1, 12, profile);
        let v = om.eval_at_t(n).unwrap();
        assert!(v.agrees_with(&omega_at_t(&f, n)));
        let prod = v.mul(&pi_tilde(&f, 60));
        assert!(prod.agrees_with(&TildeSeries::one(&f).truncate(prod.precision())));
        assert!(prod.precision() >= 50);
    }

    #[test]
    fn pi_tilde_valuation() {
        let f = make_field_context(2, 1).unwrap();
        let pi = pi_tilde(&f, 40);
        assert_eq!(pi.valuation(), Some(-2));
        assert_eq!(pi.precision(), 40);
    }
}
