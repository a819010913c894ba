//! Batch compilation of independent diagrams. Uses rayon with the
//! `parallel` feature and a plain loop without it; results keep input order.

use crate::compile::{self, Compiled};
use crate::dsl::Diagnostics;
use crate::settings::CompileOptions;
use crate::styles::Metrics;

/// Applies `f` to every item, in parallel when the feature is on.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn compile_all<S: AsRef<str> + Sync>(
    sources: &[S],
    options: &CompileOptions,
    metrics: &dyn Metrics,
) -> Vec<Result<Compiled, Diagnostics>> {
    map(sources, |s| compile::compile(s.as_ref(), options, metrics))
}

/// Always sequential; the baseline for benchmarks.
pub fn compile_all_sequential<S: AsRef<str>>(
    sources: &[S],
    options: &CompileOptions,
    metrics: &dyn Metrics,
) -> Vec<Result<Compiled, Diagnostics>> {
    sources.iter().map(|s| compile::compile(s.as_ref(), options, metrics)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::styles::EmMetrics;

    #[test]
    fn parallel_matches_sequential() {
        let sources: Vec<String> = (1..12).map(|n| format!("A & \\rTo^{{f{n}}} & B{n}")).collect();
        let m = EmMetrics::default();
        let opts = CompileOptions::default();
        let par: Vec<String> = compile_all(&sources, &opts, &m).into_iter().map(|r| r.unwrap().svg()).collect();
        let seq: Vec<String> = compile_all_sequential(&sources, &opts, &m).into_iter().map(|r| r.unwrap().svg()).collect();
        assert_eq!(par, seq);
    }
}
