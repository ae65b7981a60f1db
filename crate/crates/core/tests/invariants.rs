//! Algebraic invariants checked exhaustively over small deterministic families.

use multizeta::carlitz::{omega_at_t, omega_pow};
use multizeta::reconstruct::{rational_reconstruct, rational_reconstruct_auto};
use multizeta::{make_field_context, Field, Fq, PolyT, Profile, RatFunc, TildeSeries};

fn fields() -> Vec<Field> {
    [(2, 1), (3, 1), (2, 2), (5, 1)]
        .into_iter()
        .map(|(p, m)| make_field_context(p, m).unwrap())
        .collect()
}

/// Polynomials of degree ≤ `deg` whose coefficients come from the first `k` field elements.
fn small_polys(f: &Field, deg: usize, k: usize) -> Vec<PolyT> {
    let elts: Vec<Fq> = f.elements().take(k).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..=deg {
        let mut next = Vec::new();
        for c in &out {
            for &e in &elts {
                let mut v: Vec<Fq> = c.clone();
                v.push(e);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(|c| PolyT::new(f, c)).collect()
}

fn small_fractions(f: &Field) -> Vec<RatFunc> {
    let polys = small_polys(f, 2, 3);
    let mut out = Vec::new();
    for (i, n) in polys.iter().enumerate().step_by(3) {
        let d = &polys[(7 * i + 5) % polys.len()];
        if !d.is_zero() {
            out.push(RatFunc::new(n.clone(), d.clone()).unwrap());
        }
    }
    out
}

/// Series with terms at fractional lattice 1 and an infinite tail.
fn sample_series(f: &Field) -> Vec<TildeSeries> {
    let mut out = Vec::new();
    let elts: Vec<Fq> = f.elements().filter(|c| !c.is_zero()).collect();
    for (k, &c) in elts.iter().enumerate() {
        let terms: Vec<(i64, Fq)> = (0..6)
            .map(|j| (j * (k as i64 + 1) - 2, if j % 2 == 0 { c } else { elts[j as usize % elts.len()] }))
            .collect();
        out.push(TildeSeries::from_terms(f, 1, &terms, 40));
        out.push(TildeSeries::from_terms(f, 0, &terms, 30));
    }
    out
}

#[test]
fn twist_is_a_ring_homomorphism() {
    for f in fields() {
        let xs = sample_series(&f);
        for n in -3..=3 {
            for a in &xs {
                for b in &xs {
                    let lhs = a.mul(b).twist(n).unwrap();
                    let rhs = a.twist(n).unwrap().mul(&b.twist(n).unwrap());
                    assert!(lhs.agrees_with(&rhs), "q={} n={n}", f.q());
                    let lhs = a.add(b).twist(n).unwrap();
                    let rhs = a.twist(n).unwrap().add(&b.twist(n).unwrap());
                    assert!(lhs.agrees_with(&rhs), "q={} n={n}", f.q());
                }
            }
        }
    }
}

#[test]
fn twist_inverts() {
    for f in fields() {
        for a in sample_series(&f) {
            for n in 1..=3 {
                let back = a.twist(n).unwrap().twist(-n).unwrap();
                assert!(back.agrees_with(&a));
            }
        }
    }
}

#[test]
fn embedding_is_a_ring_homomorphism() {
    let prec = 60;
    for f in fields() {
        let xs = small_fractions(&f);
        for a in &xs {
            for b in xs.iter().take(12) {
                let ea = TildeSeries::embed_rational(a, prec).unwrap();
                let eb = TildeSeries::embed_rational(b, prec).unwrap();
                let prod = TildeSeries::embed_rational(&a.mul(b), prec).unwrap();
                assert!(prod.agrees_with(&ea.mul(&eb)), "q={} {a} * {b}", f.q());
                let sum = TildeSeries::embed_rational(&a.add(b), prec).unwrap();
                assert!(sum.agrees_with(&ea.add(&eb)), "q={} {a} + {b}", f.q());
            }
        }
    }
}

#[test]
fn reconstruction_inverts_embedding() {
    for f in fields() {
        let step = f.q() as i64 - 1;
        for a in small_fractions(&f) {
            let x = TildeSeries::embed_rational(&a, step * 40).unwrap();
            assert_eq!(rational_reconstruct(&x, 2, 2).unwrap(), Some(a.clone()), "q={}", f.q());
            assert_eq!(rational_reconstruct_auto(&x).unwrap(), Some(a), "q={}", f.q());
        }
    }
}

#[test]
fn evaluation_at_t_is_multiplicative() {
    for f in fields() {
        let n = 120;
        let q = f.q() as i64;
        let profile = Profile::for_eval(&f, 0, n + 2 * q);
        let om = omega_pow(&f, 1, 40, profile);
        let om2 = omega_pow(&f, 2, 40, profile);
        let a = om.eval_at_t(n).unwrap();
        let b = om2.eval_at_t(n).unwrap();
        assert!(a.mul(&a).truncate(n).agrees_with(&b), "q={}", f.q());
        assert!(a.agrees_with(&omega_at_t(&f, n)));
        let prod = om.mul(&om).eval_at_t(n).unwrap();
        assert!(prod.agrees_with(&b), "q={}", f.q());
    }
}

#[test]
fn frobenius_p_matches_power() {
    for f in fields() {
        for a in sample_series(&f) {
            assert!(a.frobenius_p().agrees_with(&a.pow(f.p() as u64)));
        }
    }
}
