use multizeta::powersums::{power_sum_formula_series, PowerSums};
use multizeta::{make_field_context, Field, Fq, PolyT, RatFunc, TildeSeries};

fn monics(f: &Field, d: usize) -> Vec<PolyT> {
    let elts: Vec<Fq> = f.elements().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|c: Vec<Fq>| elts.iter().map(move |&e| [c.clone(), vec![e]].concat()))
            .collect();
    }
    out.into_iter()
        .map(|mut c| {
            c.push(Fq::ONE);
            PolyT::new(f, c)
        })
        .collect()
}

#[test]
fn each_reciprocal_power_has_valuation_d_s_q_minus_one() {
    for (p, m) in [(2, 1), (3, 1), (2, 2)] {
        let f = make_field_context(p, m).unwrap();
        let q = f.q() as i64;
        for d in 0..=2 {
            for s in 1..=3u64 {
                for a in monics(&f, d) {
                    let r = RatFunc::new(PolyT::one(&f), a.pow(s)).unwrap();
                    let x = TildeSeries::embed_rational(&r, 200).unwrap();
                    assert_eq!(x.valuation(), Some(d as i64 * s as i64 * (q - 1)), "q={q} a={a:?} s={s}");
                }
            }
        }
    }
}

#[test]
fn power_sum_valuation_is_that_of_one_over_l_d() {
    // S_d(s) = 1/ℓ_d^s for s ≤ q, with deg ℓ_d = q + q² + … + q^d
    let f = make_field_context(2, 1).unwrap();
    let x = power_sum_formula_series(&f, 10, 1, 3000).unwrap().unwrap();
    assert_eq!(x.valuation(), Some(2046));
    assert!(x.valuation().unwrap() >= 10);
    let f = make_field_context(3, 1).unwrap();
    let mut ps = PowerSums::new(&f);
    for d in 1..=3u32 {
        let x = ps.auto(d, 2, 400).unwrap();
        let deg: i64 = (1..=d).map(|k| 3i64.pow(k)).sum();
        assert_eq!(x.valuation(), Some(2 * 2 * deg));
    }
}
