//! Parabolicity and Monge-Ampere verdicts for a handful of equations.

use parabolic_claws::cli::ProblemFile;
use parabolic_claws::parabolic::{ma_classify, parabolicity_check, ResidueMode};

const EQUATIONS: &[&str] = &[
    "n=1; u_t = u_xx",
    "n=1; u_t = u_xx + u_xx^2",
    "n=1; u_t = -u_xx",
    "n=2; u_t = u_11*u_22 - u_12^2; ref u_11 = 1; ref u_22 = 1",
    "n=2; u_t = u_11 + u_22 + (u_11 + u_22)^2",
    "n=2; u_t = u_11 + u_22 + u_11^2",
];

fn main() {
    for src in EQUATIONS {
        let eq = ProblemFile::parse(src).unwrap().equation().unwrap();
        let at_ref = ma_classify(&eq, ResidueMode::AtReference);
        let symbolic = ma_classify(&eq, ResidueMode::Symbolic);
        println!("{src}");
        println!("  parabolicity      {}", parabolicity_check(&eq).label());
        println!("  minor affine      {}", at_ref.minor_affine);
        println!(
            "  residue vanishes  {:?} (symbolic: {:?})",
            at_ref.residue_vanishes, symbolic.residue_vanishes
        );
        if let Some(a) = at_ref.n1_affine {
            println!("  affine in u_xx    {a}");
        }
    }
}
