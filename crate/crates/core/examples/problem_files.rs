//! Problem files: parse, inspect, print back, and run the `claws` command on one.

use parabolic_claws::cli::{cmd_claws, ClawsOptions, ParseError, ProblemFile};

// porous medium linearized around u = 1; newlines are plain whitespace
const SOURCE: &str = "\
n = 1;
u_t = u*u_xx + u_x^2;
ref u = 1;
jet_degree = 1;
base_degree = 1
";

fn main() {
    let file = ProblemFile::parse(SOURCE).unwrap();
    println!("{}", file.print());

    let report = cmd_claws(&file, &ClawsOptions::default()).unwrap();
    print!("{}", report.to_text(false));

    for bad in ["n = 1; u_t = u_tt", "n = 2; u_t = u_13", "n = 1; u_t = u_xx +"] {
        let err: ParseError = ProblemFile::parse(bad).unwrap_err();
        println!("{bad:<22} -> {err}");
    }
}
