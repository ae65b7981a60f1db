//! Degenerate multizeta values from motives built with delayed polynomials.

use multizeta::carlitz::omega_at_t;
use multizeta::make_field_context;
use multizeta::motive::{cumulative_delays, degenerate_value};
use multizeta::mzv::{zeta_i, Composition, JumpSet};

fn main() -> multizeta::Result<()> {
    let f = make_field_context(3, 1)?;
    let n = 60;
    let s = Composition::parse("1,1,1")?;
    for jumps in JumpSet::all(3) {
        let (v, checks) = degenerate_value(&f, &s, &jumps, n)?;
        let expect = zeta_i(&f, &s, &jumps, n + 9)?.mul(&omega_at_t(&f, n + 9).pow(3)).truncate(n);
        println!(
            "I = {:?}, delays {:?}: {} bundles uniformizable, matches ζ_I/π̃^3: {}",
            jumps.set,
            cumulative_delays(&jumps),
            checks.iter().filter(|c| c.holds).count(),
            v.agrees_with(&expect)
        );
    }
    Ok(())
}
