use multizeta::carlitz::{omega_at_t, pi_tilde};
use multizeta::motive::*;
use multizeta::mzv::{zeta, zeta_i, Composition, JumpSet};
use multizeta::reconstruct::rational_reconstruct;
use multizeta::{make_field_context, PolyT, TPoly};

fn comp(s: &[u64]) -> Composition {
    Composition::new(s.to_vec()).unwrap()
}

#[test]
fn phi_is_integral_up_to_3q() {
    for (p, m) in [(2, 1), (3, 1)] {
        let f = make_field_context(p, m).unwrap();
        let rows = phi_integrality_check(&f, 3 * f.q() as usize).unwrap();
        assert!(rows.iter().all(|r| r.integral), "q={}: {rows:?}", f.q());
    }
}

#[test]
fn perturbed_polynomial_is_not_integral() {
    let f = make_field_context(3, 1).unwrap();
    let one_plus_t = PolyT::one(&f).add(&PolyT::t(&f));
    assert!(!is_twist_integral(&TPoly::from_t_poly(one_plus_t)));
    assert!(is_twist_integral(&TPoly::one(&f)));
}

#[test]
fn closed_form_agrees_with_recursion() {
    let f = make_field_context(3, 1).unwrap();
    for s in [comp(&[1, 2]), comp(&[2, 3]), comp(&[1, 1, 1])] {
        let b = solve_adaptive(&f, &s, &vec![0; s.depth()], 60, 60).unwrap();
        assert_eq!(b.recursion_residual().unwrap(), None);
        let r = s.depth();
        let closed = b.l_closed_form().unwrap();
        assert_eq!(closed.first_difference(b.l(r + 1, 1)), None, "s={s}");
    }
}

#[test]
fn depth_one_entry_is_zeta_over_pi() {
    let f = make_field_context(2, 1).unwrap();
    let n = 80;
    let s = comp(&[3]);
    let b = solve_adaptive(&f, &s, &[0], n, 0).unwrap();
    let v = b.l_at_t(2, 1, n).unwrap();
    // Γ_3 = D_1 = t² + t for q = 2
    let gamma = PolyT::new(&f, vec![multizeta::Fq(0), multizeta::Fq(1), multizeta::Fq(1)]);
    let expect = zeta(&f, &s, n + 10)
        .unwrap()
        .mul(&multizeta::TildeSeries::from_poly(&gamma, 0))
        .mul(&omega_at_t(&f, n + 10).pow(3))
        .truncate(n);
    assert_eq!(v.first_difference(&expect), None);
}

#[test]
fn period_matrix_inverse_is_identity() {
    let f = make_field_context(3, 1).unwrap();
    let n = 60;
    let pm = period_matrix(&f, &comp(&[1, 2, 1]), n).unwrap();
    let r = pm.psi_prime.len();
    for i in 0..r {
        for j in 0..=i {
            let mut acc = multizeta::TildeSeries::zero(&f, 0, n);
            for k in j..=i {
                acc = acc.add(&pm.psi_prime[i][k].mul(&pm.p_prime[k][j]));
            }
            let target = if i == j {
                multizeta::TildeSeries::one(&f).truncate(n)
            } else {
                multizeta::TildeSeries::zero(&f, 0, n)
            };
            assert!(acc.truncate(n).agrees_with(&target), "({i},{j})");
        }
    }
    assert_eq!(pm.p_expr[2][0].to_string(), "Z1*Z2 - Z12");
}

#[test]
fn degenerate_motive_q3() {
    let f = make_field_context(3, 1).unwrap();
    let n = 60;
    let s = comp(&[1, 1]);
    let jumps = JumpSet::empty(2);
    let (v, checks) = degenerate_value(&f, &s, &jumps, n).unwrap();
    assert!(checks.iter().all(|c| c.holds));
    let expect = zeta_i(&f, &s, &jumps, n + 6)
        .unwrap()
        .mul(&omega_at_t(&f, n + 6).pow(2))
        .truncate(n);
    assert_eq!(v.first_difference(&expect), None);
    let b = degenerate_motive(&f, &s, &jumps, 8, 40).unwrap();
    assert_eq!(b.delays(), &[1, 0]);
}

#[test]
fn zeta_22_over_pi4_is_not_rational() {
    let f = make_field_context(3, 1).unwrap();
    let n = 400;
    let z = zeta(&f, &comp(&[2, 2]), n).unwrap();
    let x = z.mul(&omega_at_t(&f, n + 12).pow(4)).truncate(n + 12);
    assert_eq!(rational_reconstruct(&x, 20, 20).unwrap(), None);
    // while ζ(2)/π̃² is
    let z2 = zeta(&f, &comp(&[2]), n).unwrap();
    let y = z2.mul(&omega_at_t(&f, n + 6).pow(2)).truncate(n + 6);
    assert!(rational_reconstruct(&y, 20, 20).unwrap().is_some());
    assert_eq!(pi_tilde(&f, 40).valuation(), Some(-3));
}
