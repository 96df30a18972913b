use halfloop::dunkl::{run_dunkl_checks, DunklSpec, ParamSpec};
use std::time::Instant;

fn main() {
    // the sign-sensitive case: three branches, grading (1,1,1) on N = 3
    let spec = DunklSpec::new(
        3,
        2,
        3,
        vec![1, 1, 1],
        ParamSpec::Symbolic,
        vec![ParamSpec::Symbolic; 3],
        -1,
        Some(3),
    )
    .unwrap();
    let start = Instant::now();
    for c in run_dunkl_checks(&spec) {
        println!(
            "{:<36} {} {:?}",
            c.name,
            if c.passed() { "pass" } else { "FAIL" },
            c.witness
        );
    }
    println!("total: {:?}", start.elapsed());
}
