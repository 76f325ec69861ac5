//! Tableau and exterior-system dimensions for small n.

use parabolic_claws::jets::{deprolongation_dimension, parabolic_system_dimension, tableau_dimension};

fn main() {
    println!(" n  system  deprolonged  tableau r=0..4");
    for n in 1..=5 {
        let tableau: Vec<String> = (0..=4).map(|r| tableau_dimension(n, r).to_string()).collect();
        println!(
            "{n:>2}  {:>6}  {:>11}  {}",
            parabolic_system_dimension(n),
            deprolongation_dimension(n),
            tableau.join(" ")
        );
    }
}
