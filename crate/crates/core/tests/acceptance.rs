//! One line per acceptance criterion, on the named models and 100 seeded
//! random models. Exits nonzero if any criterion fails.

use eqih::selftest;

fn main() {
    let criteria = selftest::run_sequential(100);
    for c in &criteria {
        println!("{}", c.line());
    }
    let failed: Vec<usize> = criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    if criteria.len() != 9 || !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: 9/9 criteria pass");
}
