use std::ops::Range;

use rayon::prelude::*;
use rayon::ThreadPool;

use super::EngineError;

/// Trials per work unit. Fixed so that results do not depend on the thread count.
pub const DEFAULT_CHUNK: u64 = 4096;

/// An order-respecting summary of a run of trials.
pub trait TrialSummary: Send {
    type Item;
    fn record(&mut self, item: Self::Item);
    /// Appends `later`, which covers the trials right after `self`'s.
    fn merge(&mut self, later: Self);
}

/// Runs independent trials on a private thread pool.
///
/// Trial indices are cut into fixed chunks, chunks run in parallel, and their
/// results are handed back strictly in index order.
pub struct Runner {
    pool: ThreadPool,
    chunk: u64,
}

impl Runner {
    /// `threads == 0` uses one thread per logical core.
    pub fn new(threads: usize) -> Result<Self, EngineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
        Ok(Runner {
            pool,
            chunk: DEFAULT_CHUNK,
        })
    }

    pub fn with_chunk(mut self, chunk: u64) -> Self {
        self.chunk = chunk.max(1);
        self
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn chunks(&self, trials: Range<u64>) -> Vec<Range<u64>> {
        let mut out = Vec::new();
        let mut start = trials.start;
        while start < trials.end {
            let end = (start + self.chunk).min(trials.end);
            out.push(start..end);
            start = end;
        }
        out
    }

    /// Calls `work` on every chunk and feeds the results to `consume` in order.
    pub fn for_each_chunk<C, W, F>(&self, trials: Range<u64>, work: W, mut consume: F)
    where
        C: Send,
        W: Fn(Range<u64>) -> C + Sync,
        F: FnMut(C),
    {
        let chunks = self.chunks(trials);
        let wave = (self.threads() * 4).max(1);
        for batch in chunks.chunks(wave) {
            let results: Vec<C> = self
                .pool
                .install(|| batch.par_iter().cloned().map(&work).collect());
            results.into_iter().for_each(&mut consume);
        }
    }

    /// Folds per-trial items into a summary. Each chunk starts from `empty()`
    /// and chunks are merged in index order.
    pub fn run<S, E, T>(&self, trials: Range<u64>, empty: E, trial: T) -> S
    where
        S: TrialSummary,
        E: Fn() -> S + Sync,
        T: Fn(u64) -> S::Item + Sync,
    {
        let mut total = empty();
        self.for_each_chunk(
            trials,
            |range| {
                let mut s = empty();
                for i in range {
                    s.record(trial(i));
                }
                s
            },
            |s| total.merge(s),
        );
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Default)]
    struct Log(Vec<u64>);

    impl TrialSummary for Log {
        type Item = u64;
        fn record(&mut self, item: u64) {
            self.0.push(item);
        }
        fn merge(&mut self, later: Self) {
            self.0.extend(later.0);
        }
    }

    #[test]
    fn results_arrive_in_order_for_any_thread_count() {
        for threads in [1, 2, 5] {
            let runner = Runner::new(threads).unwrap().with_chunk(7);
            let log: Log = runner.run(3..200, Log::default, |i| i * i);
            assert_eq!(log.0, (3..200u64).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_range() {
        let runner = Runner::new(2).unwrap();
        let log: Log = runner.run(5..5, Log::default, |i| i);
        assert!(log.0.is_empty());
    }
}
