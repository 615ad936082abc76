//! Fixtures shared by the benchmarks.

use hyperzeros::exact::{projected_counts, DEFAULT_BUDGET};
use hyperzeros::gen::{tiny_corpus, TinyInstance};
use hyperzeros::ProjectedCounts;

/// Tiny corpus entry by name.
pub fn tiny(name: &str) -> TinyInstance {
    tiny_corpus()
        .into_iter()
        .find(|t| t.name == name)
        .unwrap_or_else(|| panic!("no tiny instance {name}"))
}

pub fn counts(t: &TinyInstance) -> ProjectedCounts {
    projected_counts(&t.csp(), &t.projection(), DEFAULT_BUDGET).expect("tiny instances count")
}
