//! Thread-parallel block integration. Blocks are evaluated by a rayon pool
//! and collected by block index, then combined through the core crate's
//! ordered reduction, so results are bit-identical to the serial path for
//! any worker count.

use anyhow::Result;
use decofield_core::qmc::{combine, eval_block, FaureConfig, FaurePlan, MultiIntegrand, QmcEstimate};
use rayon::prelude::*;

/// Build a pool with `threads` workers (0 = rayon's default).
pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    Ok(builder.build()?)
}

pub fn integrate_many_parallel<I: MultiIntegrand>(
    integrand: &I,
    cfg: &FaureConfig,
    n_points: u64,
    threads: usize,
) -> Result<Vec<QmcEstimate>> {
    let plan = FaurePlan::new(cfg, n_points).map_err(|e| anyhow::anyhow!("{e}"))?;
    let partials: Vec<_> = pool(threads)?.install(|| {
        (0..plan.n_blocks())
            .into_par_iter()
            .map_init(
                || integrand.new_scratch(),
                |scratch, block| eval_block(integrand, &plan, block, scratch),
            )
            .collect()
    });
    combine(&plan, integrand.n_outputs(), &partials).map_err(|e| anyhow::anyhow!("{e}"))
}
