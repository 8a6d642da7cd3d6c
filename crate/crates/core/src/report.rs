//! Rendering of the checked optimal-policy tables.

use serde::Serialize;

use crate::error::Result;
use crate::examples::tables::{check_table, episode_table, replanning_table, Column, Row};
use crate::objectives::Interpretation;
use crate::rational;
use crate::solvers::SolveOptions;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportCell {
    pub example: String,
    pub row: String,
    /// Expected pattern per case, in table notation.
    pub text: String,
    pub horizons: String,
    pub passed: bool,
    /// Optimal value per horizon for single-case cells with a value.
    pub values: Vec<(usize, String)>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableReport {
    pub interpretation: String,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// Row-major, one entry per (row, column).
    pub cells: Vec<ReportCell>,
}

fn cell_text(col: &Column, row: Row) -> String {
    col.cell(row)
        .map(|c| {
            c.cases
                .iter()
                .map(
                    |k| match (&k.start_theta, k.objective.strip_prefix("privileged:")) {
                        (Some(t), _) => format!("θ0={t}: {}", k.pattern),
                        (None, Some(t)) => format!("θ*={t}: {}", k.pattern),
                        (None, None) => k.pattern.to_string(),
                    },
                )
                .collect::<Vec<_>>()
                .join(" / ")
        })
        .unwrap_or_default()
}

/// Checks every expected cell of the chosen table with the solvers.
pub fn table_report(
    interpretation: Interpretation,
    scope: Option<&str>,
    opts: &SolveOptions,
) -> Result<TableReport> {
    let all = match interpretation {
        Interpretation::EpisodeLength => episode_table(),
        Interpretation::PlanningDepth => replanning_table(),
    };
    let columns: Vec<Column> = all
        .into_iter()
        .filter(|c| scope.map_or(true, |s| s == c.example))
        .collect();
    let checked = check_table(&columns, interpretation, opts)?;
    let mut cells = Vec::new();
    for row in Row::ALL {
        for col in &columns {
            let outcomes = checked
                .iter()
                .find(|(e, r, _)| *e == col.example && *r == row)
                .map(|(_, _, o)| o.clone())
                .unwrap_or_default();
            let single = col.cell(row).is_some_and(|c| c.cases.len() == 1);
            cells.push(ReportCell {
                example: col.example.to_string(),
                row: row.title().to_string(),
                text: cell_text(col, row),
                horizons: format!("{}..{}", col.horizons.start(), col.horizons.end()),
                passed: outcomes.iter().all(|o| o.passed),
                values: if single {
                    outcomes
                        .iter()
                        .filter_map(|o| o.value.as_ref().map(|v| (o.horizon, rational::format(v))))
                        .collect()
                } else {
                    Vec::new()
                },
                failures: outcomes
                    .iter()
                    .filter(|o| !o.passed)
                    .map(|o| format!("H={} {}: {}", o.horizon, o.case, o.detail))
                    .collect(),
            });
        }
    }
    Ok(TableReport {
        interpretation: match interpretation {
            Interpretation::EpisodeLength => "episode length".into(),
            Interpretation::PlanningDepth => "planning depth".into(),
        },
        columns: columns
            .iter()
            .map(|c| {
                format!(
                    "{} (H {}..{})",
                    c.title,
                    c.horizons.start(),
                    c.horizons.end()
                )
            })
            .collect(),
        rows: Row::ALL.iter().map(|r| r.title().to_string()).collect(),
        cells,
    })
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "✓"
    } else {
        "✗"
    }
}

impl TableReport {
    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed)
    }

    fn row_cells(&self, i: usize) -> &[ReportCell] {
        let n = self.columns.len();
        &self.cells[i * n..(i + 1) * n]
    }

    pub fn markdown(&self) -> String {
        let mut out = format!(
            "Optimal policies, {} interpretation\n\n",
            self.interpretation
        );
        out.push_str(&format!("| Objective | {} |\n", self.columns.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---|".repeat(self.columns.len())));
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = self
                .row_cells(i)
                .iter()
                .map(|c| format!("{} {}", c.text.replace('|', "\\|"), mark(c.passed)))
                .collect();
            out.push_str(&format!("| {row} | {} |\n", cells.join(" | ")));
        }
        let failures: Vec<&String> = self.cells.iter().flat_map(|c| &c.failures).collect();
        if !failures.is_empty() {
            out.push_str("\nMismatches:\n");
            for (c, f) in self
                .cells
                .iter()
                .flat_map(|c| c.failures.iter().map(move |f| (c, f)))
            {
                out.push_str(&format!("- {} / {}: {f}\n", c.example, c.row));
            }
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "interpretation",
            "example",
            "objective",
            "horizons",
            "pattern",
            "match",
            "values",
        ])
        .expect("in-memory write");
        for c in &self.cells {
            let values: Vec<String> = c.values.iter().map(|(h, v)| format!("H{h}={v}")).collect();
            w.write_record([
                self.interpretation.as_str(),
                &c.example,
                &c.row,
                &c.horizons,
                &c.text,
                mark(c.passed),
                &values.join(" "),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_markdown_agree() {
        let r = table_report(
            Interpretation::EpisodeLength,
            Some("conspiracy"),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.all_passed());
        let csv = r.csv();
        let mut rdr = csv::Reader::from_reader(csv.as_bytes());
        let md = r.markdown();
        for (rec, cell) in rdr.records().zip(&r.cells) {
            let rec = rec.unwrap();
            assert_eq!(&rec[4], cell.text);
            assert!(md.contains(&format!("{} {}", cell.text, mark(cell.passed))));
        }
        assert_eq!(r.cells.len(), 8);
    }
}
