//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::process::ExitCode;

use hypwalk::cli::acceptance;

fn main() -> ExitCode {
    // Honour `cargo test -- <filter>` by suite name.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for id in 1..=11u8 {
        let Some(name) = acceptance::suite_names().get(usize::from(id) - 1).copied() else { continue };
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let r = acceptance::run_criterion(id).expect("criterion exists");
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    }
}
