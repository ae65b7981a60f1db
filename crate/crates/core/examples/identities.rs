//! The identity catalog, sum and product shuffles, and failure certificates.

use multizeta::make_field_context;
use multizeta::mzv::{Composition, LinearPreorder};
use multizeta::relations::{verify_catalog, verify_shuffle_product, verify_sum_shuffle, CatalogParams, CATALOG_IDS};

fn main() -> multizeta::Result<()> {
    let n = 150;
    for (p, m) in [(2, 1), (3, 1), (2, 2)] {
        let f = make_field_context(p, m)?;
        // the digit identities need explicit parameters, run below
        for id in CATALOG_IDS.iter().filter(|id| !id.starts_with("digit")) {
            match verify_catalog(&f, id, &CatalogParams::default(), n) {
                Ok(inst) => println!("{}", inst.summary()),
                Err(e) => println!("{id} q={}: {e}", f.q()),
            }
        }
    }
    let f16 = make_field_context(2, 4)?;
    let cube = CatalogParams { b: Some(3), ..Default::default() };
    println!("{}", verify_catalog(&f16, "digit-cube", &cube, n)?.summary());
    let f5 = make_field_context(5, 1)?;
    let quartic = CatalogParams { b: Some(2), k: Some(2), ..Default::default() };
    println!("{}", verify_catalog(&f5, "digit-quartic", &quartic, n)?.summary());

    let f3 = make_field_context(3, 1)?;
    println!("{}", verify_sum_shuffle(&f3, &Composition::parse("2,1,3")?, 100)?.summary());
    let inst = verify_shuffle_product(
        &f3,
        &Composition::parse("1")?,
        &LinearPreorder::parse("1")?,
        &Composition::parse("1,1")?,
        &LinearPreorder::parse("1,2")?,
        100,
    )?;
    println!("{}", inst.summary());
    Ok(())
}
