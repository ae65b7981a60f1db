//! Finite fields, Laurent series in u = 1/t̃, embedding of F_q(t), and twisting.

use multizeta::{make_field_context, Fq, PolyT, RatFunc, TildeSeries};

fn main() -> multizeta::Result<()> {
    let f = make_field_context(2, 2)?;
    println!("F_4 modulus (low degree first): {:?}", f.modulus());
    let g = Fq(2);
    println!("g = {}, g^2 = {}, frobenius(g) = {}", f.format(g), f.format(f.mul(g, g)), f.format(f.frobenius(g, 1)));

    let f3 = make_field_context(3, 1)?;
    // t = −u^(−2) when q = 3
    let t = TildeSeries::from_poly(&PolyT::t(&f3), 0);
    println!("t = {}", t.display(4));

    let den = PolyT::new(&f3, vec![Fq(0), Fq(1), Fq(0), Fq(2)]);
    let x = TildeSeries::embed_rational(&RatFunc::new(PolyT::one(&f3), den)?, 40)?;
    println!("1/(t − t^3) = {}", x.display(6));
    println!("valuation {:?}, degree at infinity {:?}", x.valuation(), x.deg_at_infinity()?);

    let tw = x.twist(-1)?;
    println!("twist by −1 lives on lattice 1/q^{}: {}", tw.w(), tw.display(3));
    println!("twist back agrees: {}", tw.twist(1)?.agrees_with(&x));
    println!("JSON: {}", serde_json::to_string(&x.truncate(14).to_json()).unwrap());
    Ok(())
}
