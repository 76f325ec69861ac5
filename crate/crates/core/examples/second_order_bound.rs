//! Raising the density order past two with the override does not produce
//! characteristics of order three for heat or Burgers.

use parabolic_claws::claws::{find_conservation_laws, jacobi_potential_order, table_for, AnsatzSpec};
use parabolic_claws::cli::ProblemFile;

fn main() {
    for (src, jet_degree, base_degree) in [("n=1; u_t = u_xx", 1, 3), ("n=1; u_t = u_xx + u*u_x", 2, 0)] {
        let eq = ProblemFile::parse(src).unwrap().equation().unwrap();
        let table = table_for(&eq).unwrap();
        for order in [2, 3] {
            let spec = AnsatzSpec::new(order, jet_degree, base_degree).allow_unsafe_order();
            let result = find_conservation_laws(&eq, &spec, false).unwrap();
            let orders: Vec<u32> = result
                .laws
                .iter()
                .map(|l| jacobi_potential_order(l, &table).unwrap())
                .collect();
            println!(
                "{src}, density order {order}: {} laws, characteristic orders {orders:?}",
                result.laws.len()
            );
            for w in &result.warnings {
                println!("  warning: {w}");
            }
        }
    }
}
