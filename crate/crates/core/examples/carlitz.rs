//! The Carlitz period, Ω, Carlitz gamma values and Anderson-Thakur polynomials.

use multizeta::carlitz::{omega, pi_tilde, CarlitzCache};
use multizeta::make_field_context;

fn main() -> multizeta::Result<()> {
    let f = make_field_context(3, 1)?;
    let om = omega(&f, 4, 60);
    for (j, c) in om.coeffs().iter().enumerate() {
        println!("Ω, T^{j}: {}", c.display(4));
    }
    let residual = om.twist(-1, None)?.sub(&om.mul_t_minus_theta_pow(1));
    println!("Ω^(−1) − (T−t)Ω vanishes: {}", residual.coeffs().iter().all(|c| c.is_zero()));
    println!("π̃ = {}", pi_tilde(&f, 20).display(6));

    let mut cc = CarlitzCache::new(&f);
    for n in 1..=6 {
        println!("Γ_{n} = {}", cc.gamma(n)?.display("t"));
    }
    for s in 0..=7 {
        println!("H_{s} = {}", cc.h(s)?.display());
    }
    Ok(())
}
