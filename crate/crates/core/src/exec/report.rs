use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::faults::FaultSpec;
use super::runner::{execute_once, ExecConfig, RunOutcome};
use crate::control::{ticks_to_seconds, Buckets, TickRecord};
use crate::dspace::DirectionSet;
use crate::error::{ErrorType, ExecutionFailed};
use crate::model::AssemblyModel;
use crate::planner::PlanEntry;

/// Result of one repetition, as persisted next to its tick log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub repetition: usize,
    pub mp_count: usize,
    /// Time per controller in base ticks.
    pub buckets: Buckets,
    pub t_exe: f64,
    pub success: bool,
    pub failure: Option<ExecutionFailed>,
}

impl RepResult {
    pub fn from_outcome(outcome: &RunOutcome, mp_count: usize) -> RepResult {
        RepResult {
            repetition: outcome.repetition,
            mp_count,
            buckets: outcome.buckets,
            t_exe: ticks_to_seconds(outcome.buckets.total()),
            success: outcome.succeeded(),
            failure: outcome.failure().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub repetition: usize,
    pub error_type: ErrorType,
    /// Manipulation primitive index, counted from 1.
    pub step: usize,
    pub skill: String,
    pub message: String,
}

/// Aggregate over repetitions. Times are in seconds; means and population
/// standard deviations cover every repetition, failed ones included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub repetitions: usize,
    pub t_exe: f64,
    pub t_path: f64,
    pub t_vsc: f64,
    pub t_ftc: f64,
    pub t_n: f64,
    pub sigma_exe: f64,
    pub sigma_path: f64,
    pub sigma_vsc: f64,
    pub sigma_ftc: f64,
    pub sigma_n: f64,
    pub mp_count: usize,
    pub success_rate: f64,
    pub failures: Vec<FailureRecord>,
    pub runs: Vec<RepResult>,
}

/// Mean and population standard deviation, reduced in sorted order so the
/// result does not depend on the order repetitions finished in.
fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl MetricsReport {
    pub fn aggregate(runs: &[RepResult], mp_count: usize) -> MetricsReport {
        let mut runs = runs.to_vec();
        runs.sort_by_key(|r| r.repetition);
        let stat = |f: fn(&Buckets) -> u64| mean_std(runs.iter().map(|r| ticks_to_seconds(f(&r.buckets))));
        let (t_exe, sigma_exe) = stat(Buckets::total);
        let (t_path, sigma_path) = stat(|b| b.path);
        let (t_vsc, sigma_vsc) = stat(|b| b.vsc);
        let (t_ftc, sigma_ftc) = stat(|b| b.ftc);
        let (t_n, sigma_n) = stat(|b| b.n);
        let successes = runs.iter().filter(|r| r.success).count();
        let failures = runs
            .iter()
            .filter_map(|r| {
                r.failure.as_ref().map(|f| FailureRecord {
                    repetition: r.repetition,
                    error_type: f.error_type,
                    step: f.step + 1,
                    skill: f.skill.clone(),
                    message: f.message.clone(),
                })
            })
            .collect();
        MetricsReport {
            repetitions: runs.len(),
            t_exe,
            t_path,
            t_vsc,
            t_ftc,
            t_n,
            sigma_exe,
            sigma_path,
            sigma_vsc,
            sigma_ftc,
            sigma_n,
            mp_count,
            success_rate: if runs.is_empty() { 0.0 } else { successes as f64 / runs.len() as f64 },
            failures,
            runs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned two-column table with the usual row labels.
    pub fn to_table(&self) -> String {
        let rows: [(&str, String); 12] = [
            ("t_exe in [s]", format!("{:.3}", self.t_exe)),
            ("t_path in [s]", format!("{:.3}", self.t_path)),
            ("t_vsc in [s]", format!("{:.3}", self.t_vsc)),
            ("t_ftc in [s]", format!("{:.3}", self.t_ftc)),
            ("t_n in [s]", format!("{:.3}", self.t_n)),
            ("t_σ,exe in [s]", format!("{:.3}", self.sigma_exe)),
            ("t_σ,path in [s]", format!("{:.3}", self.sigma_path)),
            ("t_σ,vsc in [s]", format!("{:.3}", self.sigma_vsc)),
            ("t_σ,ftc in [s]", format!("{:.3}", self.sigma_ftc)),
            ("t_σ,neben in [s]", format!("{:.3}", self.sigma_n)),
            ("|MP|", self.mp_count.to_string()),
            ("S", format!("{}", self.success_rate)),
        ];
        let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, value) in rows {
            let pad = width - label.chars().count();
            writeln!(out, "{label}{}  {value:>10}", " ".repeat(pad)).expect("string write");
        }
        for f in &self.failures {
            writeln!(
                out,
                "rep {}: {} error at primitive {} ({}): {}",
                f.repetition,
                f.error_type,
                f.step,
                f.skill,
                f.message
            )
            .expect("string write");
        }
        out
    }
}

/// Tick log of one repetition as CSV.
pub fn ticks_csv(ticks: &[TickRecord]) -> String {
    let mut out = String::from(TickRecord::CSV_HEADER);
    out.push('\n');
    for t in ticks {
        out.push_str(&t.to_csv());
        out.push('\n');
    }
    out
}

/// Executed skill primitives of one repetition, one JSON object per line.
pub fn trace_jsonl(outcome: &RunOutcome) -> String {
    outcome
        .trace
        .entries
        .iter()
        .map(|e| format!("{}\n", e.ap.to_json_line()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub report: MetricsReport,
    pub outcomes: Vec<RunOutcome>,
}

/// Runs `repetitions` independent executions and aggregates them.
pub fn run_experiment(
    plan: &[PlanEntry],
    model: &AssemblyModel,
    dirs: &DirectionSet,
    config: &ExecConfig,
    repetitions: usize,
    faults: &[FaultSpec],
) -> Experiment {
    assert!(repetitions >= 1, "need at least one repetition");
    let outcomes: Vec<RunOutcome> = (1..=repetitions)
        .map(|rep| execute_once(plan, model, dirs, config, rep, faults))
        .collect();
    let results: Vec<RepResult> = outcomes.iter().map(|o| RepResult::from_outcome(o, plan.len())).collect();
    Experiment {
        report: MetricsReport::aggregate(&results, plan.len()),
        outcomes,
    }
}

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TABLE: &str = "report.txt";

fn rep_dir(out: &Path, repetition: usize) -> std::path::PathBuf {
    out.join(format!("rep_{repetition}"))
}

/// Writes the report, and per repetition its result, tick log and trace.
pub fn write_experiment(out: &Path, exp: &Experiment) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    for (o, r) in exp.outcomes.iter().zip(&exp.report.runs) {
        let dir = rep_dir(out, o.repetition);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(r).expect("result serializes"))?;
        std::fs::write(dir.join("ticks.csv"), ticks_csv(&o.ticks))?;
        std::fs::write(dir.join("trace.jsonl"), trace_jsonl(o))?;
    }
    write_report(out, &exp.report)
}

pub fn write_report(out: &Path, report: &MetricsReport) -> std::io::Result<()> {
    std::fs::write(out.join(REPORT_JSON), report.to_json())?;
    std::fs::write(out.join(REPORT_TABLE), report.to_table())
}

/// Rebuilds the report from the per-repetition results under `dir`.
pub fn read_results(dir: &Path) -> std::io::Result<MetricsReport> {
    let mut runs = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path().join("result.json");
        if path.is_file() {
            let text = std::fs::read_to_string(&path)?;
            let r: RepResult = serde_json::from_str(&text)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            runs.push(r);
        }
    }
    if runs.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no repetition results under {}", dir.display()),
        ));
    }
    let mp_count = runs[0].mp_count;
    Ok(MetricsReport::aggregate(&runs, mp_count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(rep: usize, b: Buckets, ok: bool) -> RepResult {
        RepResult {
            repetition: rep,
            mp_count: 2,
            buckets: b,
            t_exe: ticks_to_seconds(b.total()),
            success: ok,
            failure: (!ok).then(|| ExecutionFailed {
                step: 0,
                skill: "processObj".into(),
                error_type: ErrorType::Device,
                message: "slip".into(),
            }),
        }
    }

    #[test]
    fn population_statistics() {
        let b = |p| Buckets { path: p, vsc: 0, ftc: 0, n: 0 };
        let r = MetricsReport::aggregate(&[run(1, b(100), true), run(2, b(300), false)], 2);
        assert_eq!(r.t_path, 2.0);
        assert_eq!(r.sigma_path, 1.0);
        assert_eq!(r.success_rate, 0.5);
        assert_eq!(r.failures[0].step, 1);
    }

    #[test]
    fn single_repetition_has_zero_spread() {
        let b = Buckets { path: 7, vsc: 3, ftc: 5, n: 50 };
        let r = MetricsReport::aggregate(&[run(1, b, true)], 2);
        assert_eq!(r.sigma_exe + r.sigma_path + r.sigma_vsc + r.sigma_ftc + r.sigma_n, 0.0);
        assert_eq!(r.t_exe, 0.65);
    }

    #[test]
    fn table_labels() {
        let r = MetricsReport::aggregate(&[run(1, Buckets::default(), true)], 2);
        let t = r.to_table();
        for label in ["t_exe", "t_σ,neben", "|MP|", "S "] {
            assert!(t.contains(label), "{label} missing from\n{t}");
        }
    }
}
