//! Viscous Burgers u_t = u_xx + u u_x. Only mass is conserved among densities
//! of order two and degree two; its flux comes back from divergence inversion.

use parabolic_claws::claws::{find_conservation_laws, table_for, verify, AnsatzSpec};
use parabolic_claws::cli::{parse_expr, ProblemFile};

fn main() {
    let eq = ProblemFile::parse("n=1; u_t = u_xx + u*u_x")
        .unwrap()
        .equation()
        .unwrap();
    let result = find_conservation_laws(&eq, &AnsatzSpec::new(2, 2, 0), false).unwrap();
    for law in &result.laws {
        println!(
            "T = {}, X = {}",
            law.density.render(true),
            law.flux.as_ref().unwrap()[0].render(true)
        );
    }

    // a law can also be checked by hand
    let table = table_for(&eq).unwrap();
    let density = parse_expr("u", 1).unwrap();
    let good = parse_expr("-u_x - 1/2*u^2", 1).unwrap();
    let bad = parse_expr("-u_x", 1).unwrap();
    println!(
        "X = -u_x - u^2/2 conserves u: {}",
        verify(&table, &density, &[good]).unwrap()
    );
    println!("X = -u_x conserves u: {}", verify(&table, &density, &[bad]).unwrap());
}
