//! Thread-pool plumbing and reproducible reductions.
//!
//! Every parallel kernel in this crate is written so that the numeric result
//! is a pure function of the input, independent of thread count: work is
//! partitioned over a fixed outer index, each partial result is produced by a
//! sequential kernel, and partials are combined in a fixed order with pairwise
//! (cascade) summation. `WPC_THREADS` caps the pool size.

use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};

static POOL: OnceLock<ThreadPool> = OnceLock::new();
static OVERRIDE: Mutex<Option<Arc<ThreadPool>>> = Mutex::new(None);

fn build_pool(threads: usize) -> ThreadPool {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .thread_name(|i| format!("wpc-{i}"))
        .build()
        .expect("thread pool construction")
}

/// Global pool, sized by `WPC_THREADS` when set (0 or unset: rayon default).
pub fn pool() -> &'static ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var("WPC_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        build_pool(threads)
    })
}

fn override_pool() -> Option<Arc<ThreadPool>> {
    OVERRIDE.lock().expect("pool override lock").clone()
}

/// Runs `f` inside the active pool, so nested `par_iter` calls use it: the
/// dedicated pool installed by `with_threads` when one is active, otherwise
/// the global pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match override_pool() {
        Some(p) => p.install(f),
        None => pool().install(f),
    }
}

struct OverrideGuard;

impl Drop for OverrideGuard {
    fn drop(&mut self) {
        *OVERRIDE.lock().expect("pool override lock") = None;
    }
}

/// Runs `f` with every kernel in this crate routed to a dedicated pool of
/// exactly `threads` threads, for comparing runs across thread counts.
/// Callers are serialized so overrides never interleave.
pub fn with_threads<R>(threads: usize, f: impl FnOnce() -> R) -> R {
    static GATE: Mutex<()> = Mutex::new(());
    let _gate = GATE.lock().unwrap_or_else(|p| p.into_inner());
    *OVERRIDE.lock().expect("pool override lock") = Some(Arc::new(build_pool(threads)));
    let _guard = OverrideGuard;
    f()
}

/// Pairwise (cascade) summation. Fixed association order regardless of the
/// caller's thread count, and O(log n) error growth instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pairwise_sum(&v), 10.5);
    }

    #[test]
    fn pairwise_is_association_stable() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 1e-3).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum(&v);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn install_runs_closure() {
        let s = install(|| pairwise_sum(&[1.0; 64]));
        assert_eq!(s, 64.0);
    }

    #[test]
    fn with_threads_is_thread_count_invariant() {
        let data: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.37).sin()).collect();
        let one = with_threads(1, || pairwise_sum(&data));
        let eight = with_threads(8, || pairwise_sum(&data));
        assert_eq!(one.to_bits(), eight.to_bits());
    }

    #[test]
    fn with_threads_overrides_the_kernel_pool() {
        // two distinct counts prove the override tracks the argument rather
        // than falling through to the global pool
        assert_eq!(with_threads(3, || install(rayon::current_num_threads)), 3);
        assert_eq!(with_threads(5, || install(rayon::current_num_threads)), 5);
    }
}
