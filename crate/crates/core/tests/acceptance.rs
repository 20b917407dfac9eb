use toeplitz_spectra::acceptance::{run_one, CRITERIA};

fn main() {
    let mut failed = 0;
    for &(name, criterion) in CRITERIA.iter() {
        let outcome = run_one(name, criterion);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
