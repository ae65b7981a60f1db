//! S_d(s) by enumeration, closed formula and Anderson-Thakur interpolation.

use multizeta::make_field_context;
use multizeta::powersums::{formula_shape, Method, PowerSums};

fn main() -> multizeta::Result<()> {
    let f = make_field_context(3, 1)?;
    let mut ps = PowerSums::new(&f);
    let n = 120;
    for (d, s) in [(1, 1), (2, 4), (3, 5), (2, 7)] {
        let brute = ps.power_sum(d, s, n, Method::Brute)?;
        let interp = ps.power_sum(d, s, n, Method::Interp)?;
        let delayed = ps.power_sum(d, s, n, Method::Delayed(1))?;
        let shape = formula_shape(f.q(), f.p(), s);
        let formula = match shape {
            Some(_) => Some(ps.power_sum(d, s, n, Method::Formula)?),
            None => None,
        };
        println!(
            "S_{d}({s}) = {}\n  interp agrees: {}, delayed agrees: {}, formula {:?} agrees: {:?}",
            brute.display(5),
            interp.agrees_with(&brute),
            delayed.agrees_with(&brute),
            shape,
            formula.map(|x| x.agrees_with(&brute)),
        );
    }
    // 3^9 monics of degree 9 is past the enumeration threshold; auto picks the formula
    let big = ps.power_sum(9, 2, 120_000, Method::Auto)?;
    println!("S_9(2): valuation {:?}, {} terms below u^120000", big.valuation(), big.num_terms());
    Ok(())
}
