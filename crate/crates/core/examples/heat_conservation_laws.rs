//! Conservation laws of the heat equation u_t = u_xx with densities linear
//! in u, u_x, u_xx and polynomial of degree 3 in (t, x).
//!
//! The characteristics are the backward heat polynomials 1, x, x^2 - 2t, x^3 - 6tx.

use parabolic_claws::claws::{find_conservation_laws, AnsatzSpec};
use parabolic_claws::cli::ProblemFile;

fn main() {
    let file = ProblemFile::parse("n = 1; u_t = u_xx").unwrap();
    let eq = file.equation().unwrap();
    let result = find_conservation_laws(&eq, &AnsatzSpec::new(2, 1, 3), false).unwrap();

    println!(
        "{} unknowns, {} equations, nullity {}",
        result.unknowns, result.equations, result.nullity
    );
    for law in &result.laws {
        let flux = law.flux.as_ref().expect("flux reconstructed");
        println!("Q = {}", law.characteristic.render(true));
        println!("  T = {}", law.density.render(true));
        println!("  X = {}", flux[0].render(true));
    }
}
