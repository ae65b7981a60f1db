//! Searching for F_p-linear relations among products of multizeta values.

use multizeta::make_field_context;
use multizeta::relations::find_relations;

fn main() -> multizeta::Result<()> {
    let f = make_field_context(3, 1)?;
    for w in 2..=4 {
        let rep = find_relations(&f, w, 2, 400)?;
        println!(
            "weight {w}: {} monomials, {} relations verified at u^{}",
            rep.basis.len(),
            rep.relations.len(),
            rep.verified_at
        );
        for rel in &rep.relations {
            println!("  {} = 0", rep.describe(rel));
        }
    }
    Ok(())
}
