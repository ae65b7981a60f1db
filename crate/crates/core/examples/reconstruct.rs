//! Recognizing ζ(s)/π̃^s in F_q(t) for s divisible by q − 1, and failing otherwise.

use multizeta::carlitz::omega_at_t;
use multizeta::make_field_context;
use multizeta::mzv::{zeta, Composition};
use multizeta::reconstruct::rational_reconstruct_auto;
use multizeta::relations::even_zeta_ratio;

fn main() -> multizeta::Result<()> {
    for (p, m) in [(3, 1), (2, 2), (5, 1)] {
        let f = make_field_context(p, m)?;
        let q = f.q() as u64;
        for s in [q - 1, 2 * (q - 1)] {
            let (_, r) = even_zeta_ratio(&f, s, 400)?;
            println!("q={q}: ζ({s})/π̃^{s} = {}", r.map_or("not found".into(), |r| r.to_string()));
        }
    }
    let f = make_field_context(3, 1)?;
    let z = zeta(&f, &Composition::parse("2,2")?, 400)?;
    let x = z.mul(&omega_at_t(&f, 412).pow(4)).truncate(412);
    println!("q=3: ζ(2,2)/π̃^4 in F_q(t)? {:?}", rational_reconstruct_auto(&x)?.map(|r| r.to_string()));
    Ok(())
}
