//! The two proof-length measures: symbol counting over the displayed rows
//! (proof count) and vertex counting over the decomposed chain (proof
//! poset), plus the side-by-side comparison of several proofs.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::decompose::ProofPoset;
use crate::rules::RuleId;
use crate::script::ProofScript;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("step {0} lacks verbatim display text")]
    MissingDisplayText(usize),
    #[error("comparison needs at least two reports")]
    TooFewReports,
}

/// Symbol counts over the displayed equation rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountReport {
    pub lines: usize,
    pub variables: usize,
    pub operations: usize,
    pub grouping: usize,
    pub equals: usize,
    pub total: usize,
}

impl CountReport {
    pub fn as_tuple(&self) -> (usize, usize, usize, usize, usize, usize) {
        (self.lines, self.variables, self.operations, self.grouping, self.equals, self.total)
    }
}

/// Reconstruct the displayed rows of a script: the first row carries the
/// goal left-hand side, each later row opens with its alignment `=`, and a
/// trailing `= rhs` is merged onto the final row when the last step does
/// not already end at the goal right-hand side.
pub fn display_rows(script: &ProofScript) -> Result<Vec<String>, MetricsError> {
    if script.steps.is_empty() {
        return Ok(vec![format!(
            "{} = {}",
            script.goal_lhs_text, script.goal_rhs_text
        )]);
    }
    let mut rows = Vec::with_capacity(script.steps.len());
    for (i, step) in script.steps.iter().enumerate() {
        if step.text.trim().is_empty() {
            return Err(MetricsError::MissingDisplayText(i + 1));
        }
        if i == 0 {
            rows.push(format!("{} = {}", script.goal_lhs_text, step.text));
        } else {
            rows.push(format!("= {}", step.text));
        }
    }
    if script.steps.last().map(|s| &s.term) != Some(&script.goal.1) {
        let last = rows.last_mut().expect("at least one row");
        last.push_str(&format!(" = {}", script.goal_rhs_text));
    }
    Ok(rows)
}

/// Count lines, variables, operation symbols, grouping symbols and equal
/// signs over the displayed rows; `total` sums everything but the lines.
pub fn count_symbols(script: &ProofScript) -> Result<CountReport, MetricsError> {
    let rows = display_rows(script)?;
    let mut variables = 0;
    let mut operations = 0;
    let mut grouping = 0;
    let mut equals = 0;
    for row in &rows {
        let bytes = row.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] as char {
                'a'..='z' => {
                    variables += 1;
                    while i < bytes.len()
                        && matches!(bytes[i] as char, 'a'..='z' | '0'..='9' | '_')
                    {
                        i += 1;
                    }
                }
                '/' | '\\' => {
                    operations += 1;
                    i += 2;
                }
                '(' | ')' | '[' | ']' | '{' | '}' => {
                    grouping += 1;
                    i += 1;
                }
                '=' => {
                    equals += 1;
                    i += 1;
                }
                _ => i += 1,
            }
        }
    }
    Ok(CountReport {
        lines: rows.len(),
        variables,
        operations,
        grouping,
        equals,
        total: variables + operations + grouping + equals,
    })
}

/// Histogram bucket for poset edge labels; Connecting-Lemma rewrites count
/// under `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleClass {
    L1,
    L2,
    L3,
    L4,
    M,
    M1,
    M2,
    M3,
    M4,
    Def,
    Other,
}

impl RuleClass {
    pub const ALL: [RuleClass; 11] = [
        RuleClass::L1,
        RuleClass::L2,
        RuleClass::L3,
        RuleClass::L4,
        RuleClass::M,
        RuleClass::M1,
        RuleClass::M2,
        RuleClass::M3,
        RuleClass::M4,
        RuleClass::Def,
        RuleClass::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleClass::L1 => "L1",
            RuleClass::L2 => "L2",
            RuleClass::L3 => "L3",
            RuleClass::L4 => "L4",
            RuleClass::M => "M",
            RuleClass::M1 => "M1",
            RuleClass::M2 => "M2",
            RuleClass::M3 => "M3",
            RuleClass::M4 => "M4",
            RuleClass::Def => "Def",
            RuleClass::Other => "Other",
        }
    }

    pub fn is_m_family(self) -> bool {
        matches!(
            self,
            RuleClass::M | RuleClass::M1 | RuleClass::M2 | RuleClass::M3 | RuleClass::M4
        )
    }
}

impl From<RuleId> for RuleClass {
    fn from(id: RuleId) -> RuleClass {
        match id {
            RuleId::L1 => RuleClass::L1,
            RuleId::L2 => RuleClass::L2,
            RuleId::L3 => RuleClass::L3,
            RuleId::L4 => RuleClass::L4,
            RuleId::M => RuleClass::M,
            RuleId::M1 => RuleClass::M1,
            RuleId::M2 => RuleClass::M2,
            RuleId::M3 => RuleClass::M3,
            RuleId::M4 => RuleClass::M4,
            RuleId::Def => RuleClass::Def,
            RuleId::Order => RuleClass::Other,
        }
    }
}

impl fmt::Display for RuleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vertex count and rule histogram of a chain poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetReport {
    pub length: usize,
    pub histogram: BTreeMap<RuleClass, usize>,
}

impl PosetReport {
    pub fn m_family_total(&self) -> usize {
        self.histogram
            .iter()
            .filter(|(c, _)| c.is_m_family())
            .map(|(_, n)| n)
            .sum()
    }

    pub fn edge_total(&self) -> usize {
        self.histogram.values().sum()
    }
}

pub fn poset_metrics(poset: &ProofPoset) -> PosetReport {
    let mut histogram: BTreeMap<RuleClass, usize> = BTreeMap::new();
    for class in RuleClass::ALL {
        histogram.insert(class, 0);
    }
    for label in &poset.labels {
        *histogram.entry(RuleClass::from(*label)).or_insert(0) += 1;
    }
    PosetReport { length: poset.len(), histogram }
}

/// Side-by-side comparison of named reports under both methods.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<(String, CountReport, PosetReport)>,
    /// Row indices sorted ascending by symbol total.
    pub count_ranking: Vec<usize>,
    /// Row indices sorted ascending by poset length.
    pub poset_ranking: Vec<usize>,
    /// All rows tied for the smallest symbol total.
    pub count_best: Vec<usize>,
    /// All rows tied for the smallest poset length.
    pub poset_best: Vec<usize>,
}

pub fn compare(
    rows: Vec<(String, CountReport, PosetReport)>,
) -> Result<ComparisonTable, MetricsError> {
    if rows.len() < 2 {
        return Err(MetricsError::TooFewReports);
    }
    let mut count_ranking: Vec<usize> = (0..rows.len()).collect();
    count_ranking.sort_by_key(|&i| (rows[i].1.total, i));
    let mut poset_ranking: Vec<usize> = (0..rows.len()).collect();
    poset_ranking.sort_by_key(|&i| (rows[i].2.length, i));
    let best_count = rows[count_ranking[0]].1.total;
    let best_poset = rows[poset_ranking[0]].2.length;
    let count_best = (0..rows.len()).filter(|&i| rows[i].1.total == best_count).collect();
    let poset_best = (0..rows.len()).filter(|&i| rows[i].2.length == best_poset).collect();
    Ok(ComparisonTable { rows, count_ranking, poset_ranking, count_best, poset_best })
}

impl ComparisonTable {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>5} {:>9} {:>10} {:>8} {:>6} {:>5} {:>12}\n",
            "name", "lines", "variables", "operations", "grouping", "equals", "total", "poset_length"
        ));
        for (name, c, p) in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>5} {:>9} {:>10} {:>8} {:>6} {:>5} {:>12}\n",
                name, c.lines, c.variables, c.operations, c.grouping, c.equals, c.total, p.length
            ));
        }
        out.push_str("rule counts:\n");
        for (name, _, p) in &self.rows {
            let parts: Vec<String> = RuleClass::ALL
                .iter()
                .map(|cl| format!("{}={}", cl, p.histogram.get(cl).copied().unwrap_or(0)))
                .collect();
            out.push_str(&format!("  {:<10} {}\n", name, parts.join(" ")));
        }
        let describe = |best: &[usize]| {
            if best.len() == 1 {
                format!("{}", self.rows[best[0]].0)
            } else {
                let names: Vec<&str> = best.iter().map(|&i| self.rows[i].0.as_str()).collect();
                format!("tie between {}", names.join(", "))
            }
        };
        out.push_str(&format!("shortest by proof count: {}\n", describe(&self.count_best)));
        out.push_str(&format!("shortest by proof poset: {}\n", describe(&self.poset_best)));
        out
    }

    pub fn render_tsv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = vec![
            "name",
            "lines",
            "variables",
            "operations",
            "grouping",
            "equals",
            "total",
            "poset_length",
        ];
        for class in &RuleClass::ALL {
            header.push(class.name());
        }
        out.push_str(&header.join("\t"));
        out.push('\n');
        for (name, c, p) in &self.rows {
            let mut fields = vec![
                name.clone(),
                c.lines.to_string(),
                c.variables.to_string(),
                c.operations.to_string(),
                c.grouping.to_string(),
                c.equals.to_string(),
                c.total.to_string(),
                p.length.to_string(),
            ];
            for class in &RuleClass::ALL {
                fields.push(p.histogram.get(class).copied().unwrap_or(0).to_string());
            }
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_script;

    #[test]
    fn one_row_script_counts() {
        let script = parse_script("proof tiny\ngoal u /\\ v = p\nqed\n").unwrap();
        let c = count_symbols(&script).unwrap();
        assert_eq!(c.as_tuple(), (1, 3, 1, 0, 1, 5));
    }

    #[test]
    fn total_identity_holds() {
        let script = parse_script(crate::corpus::PROOF1).unwrap();
        let c = count_symbols(&script).unwrap();
        assert_eq!(c.total, c.variables + c.operations + c.grouping + c.equals);
    }

    #[test]
    fn counting_ignores_whitespace_and_comments() {
        let a = parse_script("proof t\ngoal u /\\ v = p\nstep p by Order u /\\ v <= p\nqed\n")
            .unwrap();
        let b = parse_script(
            "# a comment\nproof t\n\ngoal   u   /\\ v = p\nstep   p   by Order u /\\ v <= p\n# more\nqed\n",
        )
        .unwrap();
        assert_eq!(count_symbols(&a).unwrap(), count_symbols(&b).unwrap());
    }

    #[test]
    fn compare_requires_two_reports() {
        assert!(compare(Vec::new()).is_err());
    }
}
