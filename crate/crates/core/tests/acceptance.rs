//! Runs the ten acceptance checks and prints one PASS/FAIL line per check.
//! Pass check numbers as arguments to run a subset, e.g. `cargo test --test acceptance -- 1 2 3`.

use robin_wander::acceptance;

fn main() {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let reports = acceptance::run(&ids);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
