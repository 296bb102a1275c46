//! Report emission: per-replication CSV rows, a Table-style structured
//! summary, and plot-ready long-format CSV for box plots. All output is
//! byte-deterministic for a given experiment; timestamps belong to run
//! manifests, never to these files.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::evaluate::experiment::{
    ArmSummary, ExperimentCell, ExperimentReport, MetricSet, METRIC_NAMES,
};
use crate::stats::paired_t_test;

pub const REPLICATION_CSV_HEADER: &str =
    "dispersion,synthetic_size,replication,arm,fi,pmd,mape_eb,mape_crash,mape_dispersion";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Base,
    Augmented,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Base => "base",
            Arm::Augmented => "augmented",
        }
    }
}

/// One per-replication result row, the unit of the resumable CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRow {
    pub dispersion: f64,
    pub synthetic_size: usize,
    pub replication: usize,
    pub arm: Arm,
    pub metrics: MetricSet,
}

pub fn rows_from_report(report: &ExperimentReport) -> Vec<ReplicationRow> {
    let mut rows = Vec::new();
    for cell in &report.cells {
        for (arm, summary) in [(Arm::Base, &cell.base), (Arm::Augmented, &cell.augmented)] {
            for &(replication, metrics) in &summary.per_replication {
                rows.push(ReplicationRow {
                    dispersion: cell.dispersion,
                    synthetic_size: cell.synthetic_size,
                    replication,
                    arm,
                    metrics,
                });
            }
        }
    }
    rows
}

pub fn rows_to_csv(rows: &[ReplicationRow]) -> String {
    let mut out = String::from(REPLICATION_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let m = row.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.dispersion,
            row.synthetic_size,
            row.replication,
            row.arm.name(),
            m.fi,
            m.pmd,
            m.mape_eb,
            m.mape_crash,
            m.mape_dispersion
        );
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ReplicationRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("replication csv".into()))?;
    if header.trim() != REPLICATION_CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 9 fields, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("not a number: {s:?}"),
            })
        };
        let arm = match fields[3].trim() {
            "base" => Arm::Base,
            "augmented" => Arm::Augmented,
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown arm {other:?}"),
                })
            }
        };
        rows.push(ReplicationRow {
            dispersion: parse_f(fields[0])?,
            synthetic_size: parse_f(fields[1])? as usize,
            replication: parse_f(fields[2])? as usize,
            arm,
            metrics: MetricSet {
                fi: parse_f(fields[4])?,
                pmd: parse_f(fields[5])?,
                mape_eb: parse_f(fields[6])?,
                mape_crash: parse_f(fields[7])?,
                mape_dispersion: parse_f(fields[8])?,
            },
        });
    }
    Ok(rows)
}

/// Rebuilds experiment cells from replication rows; used by the `report`
/// command to re-aggregate a (possibly partial) per-replication CSV.
/// Replications present in only one arm of a cell are dropped so pairing
/// stays intact.
pub fn cells_from_rows(rows: &[ReplicationRow]) -> Vec<ExperimentCell> {
    let mut keys: Vec<(f64, usize)> = rows
        .iter()
        .map(|r| (r.dispersion, r.synthetic_size))
        .collect();
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    keys.dedup();
    let mut cells = Vec::with_capacity(keys.len());
    for (dispersion, size) in keys {
        let mut base: Vec<(usize, MetricSet)> = Vec::new();
        let mut augmented: Vec<(usize, MetricSet)> = Vec::new();
        for row in rows {
            if row.dispersion == dispersion && row.synthetic_size == size {
                match row.arm {
                    Arm::Base => base.push((row.replication, row.metrics)),
                    Arm::Augmented => augmented.push((row.replication, row.metrics)),
                }
            }
        }
        base.sort_by_key(|(r, _)| *r);
        augmented.sort_by_key(|(r, _)| *r);
        // Keep only replications present in both arms.
        let aug_ids: std::collections::HashSet<usize> =
            augmented.iter().map(|(r, _)| *r).collect();
        let base_ids: std::collections::HashSet<usize> = base.iter().map(|(r, _)| *r).collect();
        base.retain(|(r, _)| aug_ids.contains(r));
        augmented.retain(|(r, _)| base_ids.contains(r));

        let base_mean = MetricSet::mean_of(&base.iter().map(|(_, m)| *m).collect::<Vec<_>>());
        let aug_mean = MetricSet::mean_of(&augmented.iter().map(|(_, m)| *m).collect::<Vec<_>>());
        let mut improvement = [0.0; 5];
        let mut p_values = [f64::NAN; 5];
        for m in 0..5 {
            let b = base_mean.as_array()[m];
            let a = aug_mean.as_array()[m];
            improvement[m] = if b == 0.0 {
                if a == 0.0 {
                    0.0
                } else {
                    f64::NAN
                }
            } else {
                (b - a) / b * 100.0
            };
            let base_vals: Vec<f64> = base.iter().map(|(_, s)| s.as_array()[m]).collect();
            let aug_vals: Vec<f64> = augmented.iter().map(|(_, s)| s.as_array()[m]).collect();
            if base_vals.len() >= 2 {
                if let Ok(test) = paired_t_test(&base_vals, &aug_vals) {
                    p_values[m] = test.p_value;
                }
            }
        }
        cells.push(ExperimentCell {
            dispersion,
            synthetic_size: size,
            base: ArmSummary {
                per_replication: base,
                mean: base_mean,
            },
            augmented: ArmSummary {
                per_replication: augmented,
                mean: aug_mean,
            },
            improvement: MetricSet::from_array(improvement),
            p_values: MetricSet::from_array(p_values),
            failed_replications: 0,
        });
    }
    cells
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "null".to_string()
    }
}

fn metric_object(m: &MetricSet) -> String {
    let mut out = String::from("{");
    for (i, (name, value)) in METRIC_NAMES.iter().zip(m.as_array()).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "\"{name}\": {}", json_number(value));
    }
    out.push('}');
    out
}

/// Structured summary in the layout of the results table: one object per
/// (dispersion, synthetic size) cell with arm means, improvement
/// percentages, and paired p-values.
pub fn summary_json(reports: &[&ExperimentReport]) -> String {
    let mut out = String::from("{\n");
    if let Some(first) = reports.first() {
        let _ = writeln!(out, "  \"eb_weighting\": \"{}\",", first.eb_weighting);
        let _ = writeln!(out, "  \"mape_target\": \"{}\",", first.mape_target);
    }
    out.push_str("  \"runs\": [\n");
    for (ri, report) in reports.iter().enumerate() {
        out.push_str("    {\n");
        let _ = writeln!(out, "      \"dispersion\": {},", json_number(report.dispersion));
        let _ = writeln!(out, "      \"sample_size\": {},", report.sample_size);
        let _ = writeln!(out, "      \"replications\": {},", report.replications);
        let _ = writeln!(
            out,
            "      \"expected_count_mean\": {},",
            json_number(report.expected_count_mean)
        );
        let _ = writeln!(
            out,
            "      \"intercept_count_mean\": {},",
            json_number(report.intercept_count_mean)
        );
        out.push_str("      \"cells\": [\n");
        for (ci, cell) in report.cells.iter().enumerate() {
            out.push_str("        {");
            let _ = write!(
                out,
                "\"synthetic_size\": {}, \"failed_replications\": {}, ",
                cell.synthetic_size, cell.failed_replications
            );
            let _ = write!(out, "\"base_mean\": {}, ", metric_object(&cell.base.mean));
            let _ = write!(
                out,
                "\"augmented_mean\": {}, ",
                metric_object(&cell.augmented.mean)
            );
            let _ = write!(
                out,
                "\"improvement_pct\": {}, ",
                metric_object(&cell.improvement)
            );
            let _ = write!(out, "\"paired_p\": {}", metric_object(&cell.p_values));
            out.push('}');
            if ci + 1 < report.cells.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("      ]\n");
        out.push_str("    }");
        if ri + 1 < reports.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

/// Long-format CSV for box-plot reproduction: one value per
/// (dispersion, size, metric, arm, replication).
pub fn plot_csv(reports: &[&ExperimentReport]) -> String {
    let mut out = String::from("dispersion,synthetic_size,metric,arm,replication,value\n");
    for report in reports {
        for cell in &report.cells {
            for (name, idx) in METRIC_NAMES.iter().zip(0..) {
                for (arm, summary) in
                    [(Arm::Base, &cell.base), (Arm::Augmented, &cell.augmented)]
                {
                    for (replication, metrics) in &summary.per_replication {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            cell.dispersion,
                            cell.synthetic_size,
                            name,
                            arm.name(),
                            replication,
                            metrics.as_array()[idx]
                        );
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ReplicationRow> {
        vec![
            ReplicationRow {
                dispersion: 0.5,
                synthetic_size: 200,
                replication: 0,
                arm: Arm::Base,
                metrics: MetricSet::from_array([10.0, 5.0, 30.0, 20.0, 50.0]),
            },
            ReplicationRow {
                dispersion: 0.5,
                synthetic_size: 200,
                replication: 0,
                arm: Arm::Augmented,
                metrics: MetricSet::from_array([8.0, 4.0, 28.0, 19.0, 40.0]),
            },
            ReplicationRow {
                dispersion: 0.5,
                synthetic_size: 200,
                replication: 1,
                arm: Arm::Base,
                metrics: MetricSet::from_array([12.0, 6.0, 32.0, 22.0, 60.0]),
            },
            ReplicationRow {
                dispersion: 0.5,
                synthetic_size: 200,
                replication: 1,
                arm: Arm::Augmented,
                metrics: MetricSet::from_array([10.0, 5.0, 30.0, 21.0, 45.0]),
            },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let rows = sample_rows();
        let parsed = rows_from_csv(&rows_to_csv(&rows)).unwrap();
        assert_eq!(rows, parsed);
    }

    #[test]
    fn cells_from_rows_aggregates_and_pairs() {
        let mut rows = sample_rows();
        // An unpaired replication must be dropped.
        rows.push(ReplicationRow {
            dispersion: 0.5,
            synthetic_size: 200,
            replication: 2,
            arm: Arm::Base,
            metrics: MetricSet::from_array([99.0; 5]),
        });
        let cells = cells_from_rows(&rows);
        assert_eq!(cells.len(), 1);
        let cell = &cells[0];
        assert_eq!(cell.base.per_replication.len(), 2);
        assert!((cell.base.mean.fi - 11.0).abs() < 1e-12);
        assert!((cell.augmented.mean.fi - 9.0).abs() < 1e-12);
        assert!((cell.improvement.fi - (2.0 / 11.0 * 100.0)).abs() < 1e-10);
    }

    #[test]
    fn summary_json_contains_cells_and_weighting() {
        let cells = cells_from_rows(&sample_rows());
        let report = ExperimentReport {
            dispersion: 0.5,
            sample_size: 100,
            replications: 2,
            cells,
            eb_weighting: "prediction-weighted".into(),
            expected_count_mean: 1.83,
            intercept_count_mean: 1.65,
            mape_target: "true-lambda".into(),
        };
        let json = summary_json(&[&report]);
        assert!(json.contains("\"eb_weighting\": \"prediction-weighted\""));
        assert!(json.contains("\"synthetic_size\": 200"));
        assert!(json.contains("\"improvement_pct\""));
        assert!(json.contains("\"dispersion\": 0.5"));
    }

    #[test]
    fn plot_csv_has_one_line_per_value() {
        let cells = cells_from_rows(&sample_rows());
        let report = ExperimentReport {
            dispersion: 0.5,
            sample_size: 100,
            replications: 2,
            cells,
            eb_weighting: "prediction-weighted".into(),
            expected_count_mean: 1.83,
            intercept_count_mean: 1.65,
            mape_target: "true-lambda".into(),
        };
        let csv = plot_csv(&[&report]);
        // header + 5 metrics * 2 arms * 2 replications
        assert_eq!(csv.lines().count(), 1 + 5 * 2 * 2);
    }
}
