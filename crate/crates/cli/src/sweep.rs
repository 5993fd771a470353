use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::runner::{execute, write_artifacts, RunSummary};
use crate::CliError;

/// One run of a sweep. Gap columns are `None` without Monte-Carlo sampling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub partition_delta: f64,
    pub magnitude_step: f64,
    pub sigma: f64,
    pub omega_cells: usize,
    pub q: usize,
    pub g: usize,
    pub input_count: usize,
    pub funnel_size: usize,
    pub image_gap: Option<f64>,
    pub section_gap: Option<f64>,
    pub funnel_gap: Option<f64>,
    pub seconds: f64,
}

impl SweepRow {
    pub fn from_summary(s: &RunSummary) -> Self {
        let mc = s.report.monte_carlo.as_ref();
        Self {
            partition_delta: s.realized.partition_delta,
            magnitude_step: s.realized.magnitude_step,
            sigma: s.realized.sigma,
            omega_cells: s.realized.omega_cells,
            q: s.realized.q,
            g: s.realized.g,
            input_count: s.input_count,
            funnel_size: s.funnel_size,
            image_gap: mc.map(|m| m.image_gap),
            section_gap: mc.map(|m| m.section_gap),
            funnel_gap: mc.map(|m| m.funnel_gap),
            seconds: s.timings.total,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn non_increasing(values: impl Iterator<Item = Option<f64>>) -> Vec<Option<bool>> {
    let mut previous: Option<f64> = None;
    values
        .map(|v| {
            let flag = v.map(|v| previous.is_none_or(|p| v <= p));
            previous = v.or(previous);
            flag
        })
        .collect()
}

impl SweepTable {
    /// Per row, whether each gap column is at most its value in the
    /// previous row.
    pub fn monotone_flags(&self) -> [Vec<Option<bool>>; 3] {
        [
            non_increasing(self.rows.iter().map(|r| r.image_gap)),
            non_increasing(self.rows.iter().map(|r| r.section_gap)),
            non_increasing(self.rows.iter().map(|r| r.funnel_gap)),
        ]
    }

    /// True when every gap column is non-increasing over the whole table.
    pub fn is_monotone(&self) -> bool {
        self.monotone_flags().iter().flatten().all(|f| f.unwrap_or(true))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "run,partition_delta,magnitude_step,sigma,omega_cells,q,g,input_count,funnel_size,\
             image_gap,section_gap,funnel_gap,image_gap_nonincreasing,section_gap_nonincreasing,\
             funnel_gap_nonincreasing,seconds\n",
        );
        let flags = self.monotone_flags();
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let flag = |v: Option<bool>| v.map(|v| v.to_string()).unwrap_or_default();
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.partition_delta,
                r.magnitude_step,
                r.sigma,
                r.omega_cells,
                r.q,
                r.g,
                r.input_count,
                r.funnel_size,
                opt(r.image_gap),
                opt(r.section_gap),
                opt(r.funnel_gap),
                flag(flags[0][i]),
                flag(flags[1][i]),
                flag(flags[2][i]),
                r.seconds
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// `halvings + 1` copies of an explicit-mode config with `(Δ, δ, σ)`
/// divided by `2^i`, each writing to `output_dir/run_i`.
pub fn halved_configs(base: &RunConfig, halvings: u32) -> Result<Vec<RunConfig>, CliError> {
    let Mode::Explicit(_) = base.mode()? else {
        return Err(CliError::Config("sweep needs an explicit resolution, not epsilon".into()));
    };
    let res = base.resolution.expect("explicit mode has a resolution");
    Ok((0..=halvings)
        .map(|i| {
            let f = 0.5f64.powi(i as i32);
            let mut c = base.clone();
            let r = c.resolution.as_mut().unwrap();
            r.partition_delta = res.partition_delta * f;
            r.magnitude_step = res.magnitude_step * f;
            r.sigma = res.sigma * f;
            c.output_dir = base.output_dir.join(format!("run_{i}"));
            c
        })
        .collect())
}

/// Runs every config in order, writing each run's artifacts, and tabulates
/// the results. An empty list gives an empty table.
pub fn sweep(configs: &[RunConfig]) -> Result<SweepTable, CliError> {
    let mut table = SweepTable::default();
    for c in configs {
        let out = execute(c)?;
        write_artifacts(&out, &c.output_dir)?;
        table.rows.push(SweepRow::from_summary(&out.summary));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_an_empty_table() {
        let t = sweep(&[]).unwrap();
        assert!(t.rows.is_empty() && t.is_monotone());
        assert_eq!(t.to_csv().lines().count(), 1);
    }

    #[test]
    fn flags_compare_with_the_previous_value() {
        let flags = non_increasing([Some(3.0), Some(2.0), Some(2.5), None, Some(1.0)].into_iter());
        assert_eq!(flags, vec![Some(true), Some(true), Some(false), None, Some(true)]);
    }
}
