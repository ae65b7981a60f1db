//! Recovering elements of `K = F_q(t)` from their expansions in `1/t`.

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::poly::{PolyT, RatFunc};
use crate::series::TildeSeries;

/// Coefficients beyond the Padé window that must also agree.
pub const RECONSTRUCT_MARGIN: usize = 8;

/// Coefficients of `x` as a series in `y = 1/t`, with the `y`-valuation.
/// `None` if `x` is not in `F_q((1/t))` at the current precision.
fn y_expansion(x: &TildeSeries) -> Option<(i64, Vec<Fq>)> {
    if x.w() > 0 {
        return None;
    }
    let f = x.field().clone();
    let step = f.q() as i64 - 1;
    if x.terms().any(|(e, _)| e.rem_euclid(step) != 0) {
        return None;
    }
    let v = x.valuation()?.div_euclid(step);
    // exponents (q−1)k with (q−1)k < precision
    let top = (x.precision() - 1).div_euclid(step);
    let coeffs = (v..=top)
        .map(|k| {
            let c = x.coeff(step * k).unwrap_or(Fq::ZERO);
            // u^{(q−1)k} = (−y)^k
            if k.rem_euclid(2) == 1 {
                f.neg(c)
            } else {
                c
            }
        })
        .collect();
    Some((v, coeffs))
}

/// Normalized copy of `x` with finite precision.
fn finite(x: &TildeSeries) -> TildeSeries {
    let x = x.clone().normalize();
    if !x.is_exact() {
        return x;
    }
    // an exact (Laurent polynomial) input: a finite window past its last term suffices
    let last = x.terms().map(|(e, _)| e).max().unwrap_or(0);
    let step = x.field().q() as i64 - 1;
    x.truncate(last + step * 64)
}

/// Padé approximant `p/q` of `g mod y^len` with `deg p ≤ dp`, by the extended Euclidean algorithm.
fn pade(field: &Field, g: &[Fq], len: usize, dp: usize) -> Result<(PolyT, PolyT)> {
    let mut r0 = PolyT::monomial(field, Fq::ONE, len);
    let mut r1 = PolyT::new(field, g[..len].to_vec());
    let mut t0 = PolyT::zero(field);
    let mut t1 = PolyT::one(field);
    while r1.degree().map_or(false, |d| d > dp) {
        let (quo, rem) = r0.div_rem(&r1)?;
        let t2 = t0.sub(&quo.mul(&t1));
        r0 = r1;
        r1 = rem;
        t0 = t1;
        t1 = t2;
    }
    Ok((r1, t1))
}

/// Finds `f ∈ K` with `deg num ≤ deg_num`, `deg den ≤ deg_den` whose expansion agrees with `x`.
/// Returns `Ok(None)` when no such `f` exists at the available precision.
pub fn rational_reconstruct(
    x: &TildeSeries,
    deg_num: usize,
    deg_den: usize,
) -> Result<Option<RatFunc>> {
    let f = x.field().clone();
    let x = &finite(x);
    if x.is_zero() {
        return Ok(Some(RatFunc::from_poly(PolyT::zero(&f))));
    }
    let Some((v, g)) = y_expansion(x) else {
        return Ok(None);
    };
    let needed = 2 * (deg_num + deg_den) + RECONSTRUCT_MARGIN;
    if g.len() < needed {
        return Err(Error::InsufficientPrecision(format!(
            "reconstruction with degree bounds ({deg_num}, {deg_den}) needs {needed} coefficients, have {}",
            g.len()
        )));
    }
    let (p, qy) = pade(&f, &g, deg_num + deg_den + 1, deg_num)?;
    if qy.is_zero() || qy.coeff(0) == Fq::ZERO {
        return Ok(None);
    }
    if qy.degree().unwrap() > deg_den {
        return Ok(None);
    }
    // x = y^v p(y)/q(y); clear powers of y by multiplying through by t^k
    let dp = p.degree().map_or(0, |d| d as i64);
    let dq = qy.degree().unwrap() as i64;
    let k = dq.max(v + dp).max(v).max(0);
    let flip = |poly: &PolyT, off: i64| -> PolyT {
        let mut c = vec![Fq::ZERO; (k - off + 1).max(1) as usize];
        for (i, &a) in poly.coeffs().iter().enumerate() {
            let e = k - off - i as i64;
            if e >= 0 {
                c[e as usize] = a;
            }
        }
        PolyT::new(&f, c)
    };
    let num = flip(&p, v);
    let den = flip(&qy, 0);
    let r = RatFunc::new(num, den)?;
    if r.num().degree().unwrap_or(0) > deg_num || r.den().degree().unwrap_or(0) > deg_den {
        return Ok(None);
    }
    let back = TildeSeries::embed_rational(&r, x.precision())?;
    if back.first_difference(x).is_some() {
        return Ok(None);
    }
    Ok(Some(r))
}

/// Reconstruction with the largest degree bounds the precision of `x` supports.
pub fn rational_reconstruct_auto(x: &TildeSeries) -> Result<Option<RatFunc>> {
    let x = &finite(x);
    if x.is_zero() {
        return Ok(Some(RatFunc::from_poly(PolyT::zero(x.field()))));
    }
    let Some((_, g)) = y_expansion(x) else {
        return Ok(None);
    };
    if g.len() < RECONSTRUCT_MARGIN + 4 {
        return Err(Error::InsufficientPrecision(
            "too few coefficients for reconstruction".into(),
        ));
    }
    let b = (g.len() - RECONSTRUCT_MARGIN) / 4;
    rational_reconstruct(x, b, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field_context;

    #[test]
    fn roundtrip_one_over_t_plus_one() {
        let f = make_field_context(3, 1).unwrap();
        let den = PolyT::new(&f, vec![Fq::ONE, Fq::ONE]);
        let r = RatFunc::new(PolyT::one(&f), den).unwrap();
        let x = TildeSeries::embed_rational(&r, 60).unwrap();
        let back = rational_reconstruct(&x, 0, 1).unwrap().unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn roundtrip_with_pole_and_zero_at_infinity() {
        let f = make_field_context(5, 1).unwrap();
        let num = PolyT::new(&f, vec![Fq(2), Fq(0), Fq(0), Fq(1)]);
        let den = PolyT::new(&f, vec![Fq(1), Fq(3)]);
        let r = RatFunc::new(num, den).unwrap();
        let x = TildeSeries::embed_rational(&r, 200).unwrap();
        assert_eq!(rational_reconstruct(&x, 3, 1).unwrap().unwrap(), r);
        assert_eq!(rational_reconstruct_auto(&x).unwrap().unwrap(), r);
        let inv = r.inv().unwrap();
        let y = TildeSeries::embed_rational(&inv, 200).unwrap();
        assert_eq!(rational_reconstruct(&y, 1, 3).unwrap().unwrap(), inv);
    }

    #[test]
    fn too_tight_bounds_fail() {
        let f = make_field_context(2, 1).unwrap();
        let den = PolyT::new(&f, vec![Fq::ONE, Fq::ONE, Fq::ONE]);
        let r = RatFunc::new(PolyT::one(&f), den).unwrap();
        let x = TildeSeries::embed_rational(&r, 80).unwrap();
        assert_eq!(rational_reconstruct(&x, 0, 1).unwrap(), None);
        assert!(rational_reconstruct(&x, 30, 30).is_err());
    }

    #[test]
    fn fractional_lattice_is_not_in_k() {
        let f = make_field_context(2, 1).unwrap();
        let x = TildeSeries::monomial(&f, Fq::ONE, 1, 1).truncate(40);
        assert_eq!(rational_reconstruct_auto(&x).unwrap(), None);
    }
}
