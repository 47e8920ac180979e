use super::{generate_instance, GeneratorParams, IoError};
use crate::engine::{solve_uc, SolveOptions, SolveReport, SolveStatus};
use serde::Serialize;

pub const BENCH_COLUMNS: [&str; 9] =
    ["T", "N", "run", "iterations", "cuts_added", "objective", "oracle_ms", "master_ms", "total_ms"];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub steps: Vec<usize>,
    pub profiles: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    /// Template for every generated instance; `steps`, `num_profiles` and
    /// `seed` are overwritten.
    pub generator: GeneratorParams,
    pub solve: SolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(rename = "N")]
    pub profiles: usize,
    pub run: usize,
    pub iterations: usize,
    pub cuts_added: usize,
    pub objective: f64,
    pub oracle_ms: f64,
    pub master_ms: f64,
    pub total_ms: f64,
}

/// Seed for one `(T, N, run)` cell, mixed with SplitMix64.
fn cell_seed(seed: u64, steps: usize, profiles: usize, run: usize) -> u64 {
    let mut z = seed;
    for v in [steps as u64, profiles as u64, run as u64] {
        z = z.wrapping_add(v).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Runs every `(T, N, run)` combination; also returns the solve reports
/// with their cut pools dropped.
pub fn run_bench(cfg: &BenchConfig) -> Result<(Vec<BenchRow>, Vec<SolveReport>), IoError> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &steps in &cfg.steps {
        for &profiles in &cfg.profiles {
            for run in 0..cfg.runs {
                let params = GeneratorParams {
                    steps,
                    num_profiles: profiles,
                    seed: cell_seed(cfg.seed, steps, profiles, run),
                    ..cfg.generator.clone()
                };
                let instance = generate_instance(&params);
                let mut report = solve_uc(&instance, &cfg.solve)?;
                rows.push(BenchRow {
                    steps,
                    profiles,
                    run,
                    iterations: report.iterations.len(),
                    cuts_added: report.total_cuts,
                    objective: if report.status == SolveStatus::Optimal { report.objective } else { f64::NAN },
                    oracle_ms: report.iterations.iter().map(|r| r.oracle_ms).sum(),
                    master_ms: report.iterations.iter().map(|r| r.master_ms).sum(),
                    total_ms: report.total_ms,
                });
                report.pool.clear();
                reports.push(report);
            }
        }
    }
    Ok((rows, reports))
}

pub fn bench_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(BENCH_COLUMNS)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_differ() {
        let a = cell_seed(1, 24, 2, 0);
        assert_ne!(a, cell_seed(1, 24, 2, 1));
        assert_ne!(a, cell_seed(1, 2, 24, 0));
        assert_eq!(a, cell_seed(1, 24, 2, 0));
    }

    #[test]
    fn small_bench_fills_every_column() {
        let cfg = BenchConfig {
            steps: vec![6],
            profiles: vec![2],
            runs: 2,
            seed: 3,
            generator: GeneratorParams { num_units: 4, ..GeneratorParams::default() },
            solve: SolveOptions::default(),
        };
        let (rows, reports) = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(reports.iter().all(|r| r.pool.is_empty()));
        let mut buf = Vec::new();
        bench_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), BENCH_COLUMNS.join(","));
        for line in lines {
            assert_eq!(line.split(',').filter(|f| !f.is_empty()).count(), BENCH_COLUMNS.len());
        }
    }

    #[test]
    fn empty_bench_still_has_header() {
        let mut buf = Vec::new();
        bench_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), BENCH_COLUMNS.join(","));
    }
}
