//! Accuracy tables over result records.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mns_core::aog::{InterpretationKind, ProblemType};

use crate::bench::ResultRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// Problem type x interpretation, one row per method.
    Cell,
    IntegerCount,
    Budget,
}

impl GroupBy {
    pub fn parse(s: &str) -> Option<GroupBy> {
        match s {
            "cell" | "type" => Some(GroupBy::Cell),
            "integers" | "integer_count" => Some(GroupBy::IntegerCount),
            "steps" | "budget" => Some(GroupBy::Budget),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("no result records")]
    EmptyResults,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub correct: u64,
    pub total: u64,
}

impl Tally {
    pub fn add(&mut self, correct: bool) {
        self.correct += u64::from(correct);
        self.total += 1;
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Rows are methods. Except for budget tables, the last column is the
/// problem-weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Tally>)>,
}

impl StatsTable {
    pub fn cell(&self, row: &str, column: &str) -> Option<Tally> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|(r, _)| r == row).map(|(_, t)| t[c])
    }

    pub fn mean(&self, row: &str) -> Option<f64> {
        self.cell(row, "Mean")?.accuracy()
    }

    pub fn to_text(&self) -> String {
        let fmt = |t: &Tally| t.accuracy().map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0));
        let mut cells: Vec<Vec<String>> = vec![std::iter::once("Method".to_string()).chain(self.columns.clone()).collect()];
        for (name, tallies) in &self.rows {
            cells.push(std::iter::once(name.clone()).chain(tallies.iter().map(fmt)).collect());
        }
        let widths: Vec<usize> =
            (0..cells[0].len()).map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &cells {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("method,{}\n", self.columns.join(","));
        for (name, tallies) in &self.rows {
            let vals: Vec<String> =
                tallies.iter().map(|t| t.accuracy().map_or(String::new(), |a| format!("{a:.4}"))).collect();
            let _ = writeln!(out, "{name},{}", vals.join(","));
        }
        out
    }
}

fn title(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
}

pub fn cmd_stats(records: &[ResultRecord], group_by: GroupBy) -> Result<StatsTable, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyResults);
    }
    let budgets: std::collections::BTreeSet<u64> = records.iter().map(|r| r.budget).collect();
    let method = |r: &ResultRecord| {
        if group_by == GroupBy::Budget || budgets.len() == 1 {
            r.mode.to_string()
        } else {
            format!("{}@{}", r.mode, r.budget)
        }
    };
    let column = |r: &ResultRecord| match group_by {
        GroupBy::Cell => format!("{}-{}", title(&r.problem_type), title(&r.interpretation)),
        GroupBy::IntegerCount => r.integer_count.to_string(),
        GroupBy::Budget => r.budget.to_string(),
    };
    let mut columns: Vec<String> = match group_by {
        GroupBy::Cell => ProblemType::ALL
            .iter()
            .flat_map(|t| InterpretationKind::ALL.iter().map(move |k| format!("{}-{}", title(t.name()), title(k.name()))))
            .collect(),
        GroupBy::IntegerCount => {
            let set: std::collections::BTreeSet<usize> = records.iter().map(|r| r.integer_count).collect();
            set.iter().map(usize::to_string).collect()
        }
        GroupBy::Budget => budgets.iter().map(u64::to_string).collect(),
    };
    let mean_col = columns.len();
    if group_by != GroupBy::Budget {
        columns.push("Mean".to_string());
    }

    let mut rows: BTreeMap<(u8, u64, String), Vec<Tally>> = BTreeMap::new();
    for r in records {
        // pure before context, then budget
        let key = (r.mode as u8, if group_by == GroupBy::Budget { 0 } else { r.budget }, method(r));
        let tallies = rows.entry(key).or_insert_with(|| vec![Tally::default(); columns.len()]);
        let c = columns.iter().position(|x| *x == column(r)).expect("column exists");
        tallies[c].add(r.correct);
        if group_by != GroupBy::Budget {
            tallies[mean_col].add(r.correct);
        }
    }
    Ok(StatsTable { columns, rows: rows.into_iter().map(|((_, _, name), t)| (name, t)).collect() })
}
