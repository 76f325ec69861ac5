//! Euler operator and divergence inversion on a two-dimensional jet space.

use parabolic_claws::cli::parse_expr;
use parabolic_claws::jets::{euler_operator, invert_divergence, total_derivative, FluxBounds};

fn main() {
    let n = 2;
    let x1 = parse_expr("u*u_1 + x2*u_2", n).unwrap();
    let x2 = parse_expr("u_1*u_2", n).unwrap();
    let div = &total_derivative(&x1, 1) + &total_derivative(&x2, 2);
    println!("Div X = {}", div.render(false));
    println!("E(Div X) = {}", euler_operator(&div).unwrap().render(false));

    let flux = invert_divergence(&div, n, &FluxBounds::for_residual(&div)).unwrap();
    for (a, f) in flux.iter().enumerate() {
        println!("recovered X^{} = {}", a + 1, f.render(false));
    }

    let not_div = parse_expr("u^2", n).unwrap();
    println!("E(u^2) = {}", euler_operator(&not_div).unwrap().render(false));
    println!(
        "u^2 invertible: {}",
        invert_divergence(&not_div, n, &FluxBounds::for_residual(&not_div)).is_ok()
    );
}
