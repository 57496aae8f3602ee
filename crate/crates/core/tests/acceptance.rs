//! Acceptance battery. Prints one line per criterion and fails the target if
//! any criterion fails.

use stiffkit::suite::run_criterion;

fn main() {
    let seed = std::env::var("STIFFKIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20240601);
    let only: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for id in 1..=12u8 {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let r = run_criterion(id, seed);
        println!("{}", r.line());
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
