//! Runs every catalogued fixture and prints expected against observed.
//!
//! ```text
//! cargo run --release --example fixture_catalog -- [seed]
//! ```

use pmt::fixtures::{list_fixtures, run_fixture, Value};

fn show(v: &Value) -> String {
    match v {
        Value::Flag(b) => b.to_string(),
        Value::Number(x) => format!("{x:.6e}"),
    }
}

fn main() -> pmt::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for fx in list_fixtures()? {
        let report = run_fixture(&fx.name, seed)?;
        println!("{} [{}]", fx.name, if report.passed() { "ok" } else { "MISMATCH" });
        println!("  {}", fx.description);
        for e in &report.expectations {
            println!(
                "  {:<34} expected {:<14} observed {:<14} tol {:<8} {:?}{}",
                e.name,
                show(&e.expected),
                show(&e.observed),
                e.tol,
                e.source,
                if e.pass { "" } else { "  <-- differs" }
            );
        }
    }
    Ok(())
}
