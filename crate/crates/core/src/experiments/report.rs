use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentKind, ResolvedConfig};
use crate::error::{Error, Result};
use crate::stats::Summary;

/// Counts over fixed bins `[edges[i], edges[i+1])`, the last bin open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(edges: &[f64]) -> Histogram {
        Histogram { edges: edges.to_vec(), counts: vec![0; edges.len()] }
    }

    /// Values below the first edge fall in the first bin.
    pub fn add(&mut self, x: f64) {
        let bin = self.edges.iter().rposition(|&e| x >= e).unwrap_or(0);
        self.counts[bin] += 1;
    }

    fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::Config("cannot merge histograms with different bins".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

/// One CSV row: a statistic measured in one `(n, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    /// Trial index; fixes row order after merges.
    #[serde(skip)]
    pub trial: u64,
}

/// Raw accumulated state of a set of trials. Everything here merges exactly
/// and independently of order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub summaries: BTreeMap<String, Summary>,
    pub counters: BTreeMap<String, u64>,
    pub maxima: BTreeMap<String, f64>,
    pub histograms: BTreeMap<String, Histogram>,
    #[serde(skip)]
    pub cells: Vec<Cell>,
}

impl Tally {
    pub fn push(&mut self, key: &str, x: u64) {
        self.summaries.entry(key.to_owned()).or_default().push(x);
    }

    pub fn count(&mut self, key: &str, by: u64) {
        *self.counters.entry(key.to_owned()).or_default() += by;
    }

    pub fn max(&mut self, key: &str, x: f64) {
        let slot = self.maxima.entry(key.to_owned()).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(x);
    }

    pub fn hist(&mut self, key: &str, edges: &[f64], x: f64) {
        self.histograms.entry(key.to_owned()).or_insert_with(|| Histogram::new(edges)).add(x);
    }

    pub fn cell(&mut self, trial: u64, n: usize, seed: u64, statistic: &str, value: f64) {
        self.cells.push(Cell { n, seed, statistic: statistic.to_owned(), value, trial });
    }

    pub fn merge(mut self, other: Tally) -> Result<Tally> {
        self.absorb(other)?;
        // Stable: rows of one trial keep their emission order.
        self.cells.sort_by_key(|c| (c.n, c.trial));
        Ok(self)
    }

    /// `merge` without re-sorting the cells.
    pub(crate) fn absorb(&mut self, other: Tally) -> Result<()> {
        self.trials += other.trials;
        for (k, s) in other.summaries {
            let slot = self.summaries.entry(k).or_default();
            *slot = slot.merge(&s);
        }
        for (k, c) in other.counters {
            *self.counters.entry(k).or_default() += c;
        }
        for (k, m) in other.maxima {
            self.max(&k, m);
        }
        for (k, h) in other.histograms {
            match self.histograms.get_mut(&k) {
                Some(mine) => mine.merge(&h)?,
                None => {
                    self.histograms.insert(k, h);
                }
            }
        }
        self.cells.extend(other.cells);
        Ok(())
    }

    pub fn counter(&self, key: &str) -> u64 {
        self.counters.get(key).copied().unwrap_or(0)
    }

    pub fn summary(&self, key: &str) -> Summary {
        self.summaries.get(key).copied().unwrap_or_default()
    }

    pub fn cell_values(&self, statistic: &str) -> impl Iterator<Item = &Cell> {
        let statistic = statistic.to_owned();
        self.cells.iter().filter(move |c| c.statistic == statistic)
    }
}

/// A threshold comparison `value <= threshold` (or `>=`, `==`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: String,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: "<=".into(), threshold, passed: value <= threshold }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: "<".into(), threshold, passed: value < threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: ">=".into(), threshold, passed: value >= threshold }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, relation: ">".into(), threshold, passed: value > threshold }
    }
}

/// Finished experiment: the resolved config, the raw tally, statistics
/// derived from it, and the threshold checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub config: ResolvedConfig,
    pub tally: Tally,
    pub derived: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.derived.get(key).copied()
    }

    /// Combines the reports of two disjoint trial sets of the same
    /// experiment. Derived statistics are recomputed from the merged tally.
    pub fn merge(&self, other: &Report) -> Result<Report> {
        if self.config != other.config {
            return Err(Error::Config("cannot merge reports with different configs".into()));
        }
        let tally = self.tally.clone().merge(other.tally.clone())?;
        Ok(super::finalize(&self.config, tally))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub const CSV_HEADER: &'static str = "experiment,n,d,L,seed,statistic,value";

    /// One row per `(n, seed)` cell and statistic, columns
    /// `experiment,n,d,L,seed,statistic,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.tally.cells.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.tally.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.experiment, c.n, self.config.d, self.config.l, c.seed, c.statistic, c.value
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins() {
        let mut h = Histogram::new(&[1.0, 2.0, 4.0]);
        for x in [0.5, 1.0, 1.9, 2.0, 3.9, 4.0, 100.0] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![3, 2, 2]);
    }

    #[test]
    fn tally_merge_is_order_free() {
        let mut a = Tally::default();
        a.trials = 2;
        a.push("x", 3);
        a.push("x", 5);
        a.count("ev", 1);
        a.max("m", 0.5);
        a.hist("h", &[0.0, 1.0], 0.2);
        a.cell(0, 10, 7, "x", 3.0);
        a.cell(1, 10, 8, "x", 5.0);
        let mut b = Tally::default();
        b.trials = 1;
        b.push("x", 4);
        b.max("m", 0.7);
        b.hist("h", &[0.0, 1.0], 1.5);
        b.cell(2, 10, 9, "x", 4.0);

        let ab = a.clone().merge(b.clone()).unwrap();
        let ba = b.merge(a).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab.summary("x").count, 3);
        assert_eq!(ab.counter("ev"), 1);
        assert_eq!(ab.maxima["m"], 0.7);
        assert_eq!(ab.histograms["h"].counts, vec![1, 1]);
        assert_eq!(ab.cells.iter().map(|c| c.trial).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn checks() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::below("a", 1.0, 1.0).passed);
        assert!(Check::at_least("a", 1.0, 1.0).passed);
        assert!(!Check::above("a", f64::NAN, 0.0).passed);
    }
}
