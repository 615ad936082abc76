//! One line per criterion; exits nonzero if any fails.
//!
//! `cargo test --test acceptance -- 3 5` runs a subset.

use hyperzeros::acceptance::{criterion_ids, run_criterion};

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ids: Vec<u32> = criterion_ids()
        .into_iter()
        .filter(|i| wanted.is_empty() || wanted.contains(i))
        .collect();
    let mut failed = 0;
    for id in ids {
        let r = run_criterion(id).expect("known id");
        failed += usize::from(!r.pass);
        println!(
            "criterion {:>2} {:<28} {} ({:.1}s) {}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.elapsed_secs,
            r.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
