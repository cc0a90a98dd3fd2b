//! Multi-threaded runners. Every replicate has its own random stream, and
//! results are gathered in index order, so the thread count never changes
//! the output.

use dfgof_core::montecarlo::StudyConfig;
use dfgof_core::statistics::{
    null_replicate, table_from_draws, NullTable, StatisticKind, MIN_TABLE_REPS,
};
use dfgof_core::{AnchorPair, Error};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))
}

/// Replicate statistics of a study, one list per model.
pub fn run_study(config: &StudyConfig) -> CliResult<Vec<Vec<f64>>> {
    let prepared = config.prepare()?;
    let pool = pool(config.threads)?;
    let out = pool.install(|| {
        (0..config.models.len())
            .map(|j| {
                (0..config.reps)
                    .into_par_iter()
                    .map(|i| prepared.replicate(j, i))
                    .collect::<Result<Vec<f64>, Error>>()
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(out)
}

pub fn null_table(
    kind: StatisticKind,
    anchor: &AnchorPair,
    reps: usize,
    seed: u64,
    threads: usize,
) -> CliResult<NullTable> {
    if reps < MIN_TABLE_REPS {
        return Err(CliError::input(format!(
            "--reps must be at least {MIN_TABLE_REPS} for p-values"
        )));
    }
    let draws = pool(threads)?.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|i| null_replicate(kind, anchor, seed, i))
            .collect::<Result<Vec<f64>, Error>>()
    })?;
    Ok(table_from_draws(kind, anchor, seed, draws)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dfgof_core::montecarlo::run_replicates;
    use dfgof_core::AnchorPreset;

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = StudyConfig::smoke(5).unwrap();
        let serial = run_replicates(&cfg).unwrap();
        for threads in [1, 2, 7] {
            cfg.threads = threads;
            assert_eq!(run_study(&cfg).unwrap(), serial);
        }
    }

    #[test]
    fn parallel_table_matches_serial() {
        let a = AnchorPair::preset(AnchorPreset::E1, 5).unwrap();
        let serial =
            dfgof_core::statistics::null_table(StatisticKind::CvmZ, 5, &a, 1000, 4).unwrap();
        assert_eq!(
            null_table(StatisticKind::CvmZ, &a, 1000, 4, 3).unwrap(),
            serial
        );
    }
}
