//! ζ(s), degenerate ζ_I(s), preorder values ζ_ρ(s) and the sum shuffle.

use multizeta::make_field_context;
use multizeta::mzv::{enumerate_preorders, jumps_to_preorder, Composition, JumpSet, MultiZeta};

fn main() -> multizeta::Result<()> {
    let f = make_field_context(3, 1)?;
    let n = 80;
    let mut mz = MultiZeta::new(&f);
    let s = Composition::parse("2,1")?;
    println!("ζ(2,1) = {}", mz.zeta(&s, n)?.display(6));
    for jumps in JumpSet::all(2) {
        let rho = jumps_to_preorder(&jumps);
        println!("jumps {:?} ~ preorder {rho}: {}", jumps.set, mz.zeta_i(&s, &jumps, n)?.display(4));
    }
    let mut total = mz.zeta(&Composition::parse("2")?, n)?.mul(&mz.zeta(&Composition::parse("1")?, n)?);
    for rho in enumerate_preorders(2)? {
        total = total.sub(&mz.zeta_rho(&s, &rho, n)?);
    }
    println!("ζ(2)ζ(1) − Σ_ρ ζ_ρ(2,1) is zero to u^{n}: {}", total.is_zero());
    println!("totally degenerate z(1,2) = {}", mz.z(&Composition::parse("1,2")?, n)?.display(4));
    Ok(())
}
