//! The mixed Carlitz-Tate motive of a composition: Φ, Ψ and the normalized periods.

use multizeta::make_field_context;
use multizeta::motive::{assemble_psi_and_check, period_matrix};
use multizeta::mzv::Composition;

fn main() -> multizeta::Result<()> {
    let f = make_field_context(2, 1)?;
    let s = Composition::parse("1,2,1")?;
    let (bundle, check) = assemble_psi_and_check(&f, &s, 100)?;
    println!(
        "rank {}, {} T-terms, ΦΨ = Ψ^(−1): {} (compared to u^{})",
        bundle.rank(),
        bundle.t_terms(),
        check.holds,
        check.checked_to
    );
    for i in 1..bundle.rank() {
        println!("Φ[{}][{}] = {:?}", i + 1, i, bundle.phi_subdiagonal_poly(i).map(|p| p.display()));
    }
    let pm = period_matrix(&f, &s, 60)?;
    for (i, row) in pm.p_expr.iter().enumerate() {
        for (j, e) in row.iter().enumerate().take(i) {
            println!("p'[{}][{}] = {e}", i + 1, j + 1);
        }
    }
    println!(
        "ψ' matches Γ-scaled ζ: {}, p' matches its expression: {}",
        pm.psi_matches_z, pm.p_matches_expr
    );
    Ok(())
}
