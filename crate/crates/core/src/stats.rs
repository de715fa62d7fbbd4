//! Per-direction, per-domain corpus statistics: original size, size after
//! deduplication, and split sizes, with an arithmetic consistency flag per
//! row (the splits must sum to the after-dedup count, which in turn cannot
//! exceed the original count).

use crate::corpus::Direction;
use crate::split::SplitBundle;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsRow {
    pub direction: String,
    pub domain: String,
    pub original: usize,
    pub after_dedup: usize,
    pub train: usize,
    pub test: usize,
    pub validation: usize,
}

impl StatsRow {
    pub fn consistent(&self) -> bool {
        self.train + self.test + self.validation == self.after_dedup
            && self.after_dedup <= self.original
    }
}

#[derive(Debug, Clone, Default)]
pub struct StatsTable {
    pub rows: Vec<StatsRow>,
}

pub const STATS_COLUMNS: [&str; 9] = [
    "Direction",
    "Domain",
    "Original",
    "Duplicates removed",
    "train",
    "test",
    "validation",
    "Total",
    "Consistency",
];

/// Builds the per-direction, per-domain statistics table from split
/// bundles. Rows are grouped by direction in the order given, domains
/// alphabetical within a direction.
pub fn stats_report(bundles: &[(Direction, &SplitBundle)]) -> StatsTable {
    let mut rows = Vec::new();
    for (direction, bundle) in bundles {
        for (domain, c) in &bundle.report.per_domain {
            rows.push(StatsRow {
                direction: direction.to_string(),
                domain: domain.clone(),
                original: c.original,
                after_dedup: c.after_dedup,
                train: c.train,
                test: c.test,
                validation: c.validation,
            });
        }
    }
    StatsTable { rows }
}

impl StatsTable {
    /// Cell matrix including header. The direction and the per-direction
    /// total appear once per direction group, on its first row.
    fn cells(&self) -> Vec<Vec<String>> {
        let mut out = vec![STATS_COLUMNS.iter().map(|s| s.to_string()).collect()];
        let mut i = 0;
        while i < self.rows.len() {
            let direction = &self.rows[i].direction;
            let group_end = self.rows[i..]
                .iter()
                .position(|r| &r.direction != direction)
                .map(|off| i + off)
                .unwrap_or(self.rows.len());
            let total: usize = self.rows[i..group_end].iter().map(|r| r.after_dedup).sum();
            for (j, row) in self.rows[i..group_end].iter().enumerate() {
                out.push(vec![
                    if j == 0 { row.direction.clone() } else { String::new() },
                    row.domain.clone(),
                    row.original.to_string(),
                    row.after_dedup.to_string(),
                    row.train.to_string(),
                    row.test.to_string(),
                    row.validation.to_string(),
                    if j == 0 { total.to_string() } else { String::new() },
                    if row.consistent() { "OK" } else { "FAIL" }.to_string(),
                ]);
            }
            i = group_end;
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for row in self.cells() {
            s.push_str(&row.join("\t"));
            s.push('\n');
        }
        s
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let cells = self.cells();
        let ncols = STATS_COLUMNS.len();
        let mut widths = vec![0usize; ncols];
        for row in &cells {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let mut s = String::new();
        for row in &cells {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                for _ in cell.chars().count()..widths[i] {
                    line.push(' ');
                }
            }
            s.push_str(line.trim_end());
            s.push('\n');
        }
        s
    }
}
