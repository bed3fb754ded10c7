use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};
use crate::rank::{default_l, RankMode, DEFAULT_KWISE_K};
use crate::seed::Seed;

/// The experiments the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Mean query-tree size against `e^d`.
    Expectation,
    /// Largest query tree per graph across an `n` list.
    Tmax,
    /// Doubling events between consecutive layer prefixes.
    Layers,
    /// Per-layer concentration along adaptive exposures.
    Exposure,
    /// Monotone path counts against `d^k/(k+1)!`.
    Paths,
    /// Tree sizes under full versus k-wise independent ranks.
    Seedlen,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Expectation,
        ExperimentKind::Tmax,
        ExperimentKind::Layers,
        ExperimentKind::Exposure,
        ExperimentKind::Paths,
        ExperimentKind::Seedlen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Expectation => "expectation",
            ExperimentKind::Tmax => "tmax",
            ExperimentKind::Layers => "layers",
            ExperimentKind::Exposure => "exposure",
            ExperimentKind::Paths => "paths",
            ExperimentKind::Seedlen => "seedlen",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

/// Which ranks define the query trees measured by `tmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMode {
    #[default]
    Exact,
    Quantized,
}

/// Where `exposure` takes its exposure sequences from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExposureSource {
    /// The exploration trace when it is long enough, else a whole-graph walk.
    #[default]
    Auto,
    Trace,
    Synthetic,
}

/// Declarative experiment description, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub graph: GraphSpec,
    /// Degree bound; defaults to the graph's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Layer count; defaults to `4(d+1)`.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Constant in the `c·log n` thresholds; defaults to `15L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub trials: usize,
    pub base_seed: Seed,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub mode: RankMode,
    /// Second rank mode for `seedlen`; defaults to `kwise:4` (or `full` if
    /// `mode` is already k-wise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_mode: Option<RankMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Significance level of the KS test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Width of the standard-error margins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
    #[serde(default)]
    pub tree: TreeMode,
    #[serde(default)]
    pub exposure: ExposureSource,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, graph: GraphSpec, trials: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            graph,
            d: None,
            l: None,
            c: None,
            trials,
            base_seed: Seed(base_seed),
            n_list: Vec::new(),
            mode: RankMode::Full,
            compare_mode: None,
            k_max: None,
            alpha: None,
            sigmas: None,
            tree: TreeMode::Exact,
            exposure: ExposureSource::Auto,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills every default. `graph` is the already-built graph when the
    /// degree bound cannot be read off the spec (file graphs).
    pub fn resolve(&self, graph: Option<&Graph>) -> Result<ResolvedConfig> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.graph.check().map_err(|e| Error::Config(e.to_string()))?;
        let d = match (self.d, self.graph.degree_bound(), graph) {
            (Some(d), _, _) => d,
            (None, Some(d), _) => d,
            (None, None, Some(g)) => g.d_bound(),
            (None, None, None) => {
                return Err(Error::Config("cannot infer d; set it explicitly".into()))
            }
        };
        let l = self.l.unwrap_or_else(|| default_l(d));
        if l == 0 {
            return Err(Error::Config("L must be at least 1".into()));
        }
        let c = self.c.unwrap_or(15.0 * l as f64);
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("c must be positive, got {c}")));
        }
        let alpha = self.alpha.unwrap_or(1e-3);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let sigmas = self.sigmas.unwrap_or(3.0);
        if !(sigmas >= 0.0 && sigmas.is_finite()) {
            return Err(Error::Config(format!("sigmas must be non-negative, got {sigmas}")));
        }
        let k_max = self.k_max.unwrap_or(5);
        if self.experiment == ExperimentKind::Paths && k_max > 8 {
            return Err(Error::Config(format!("k_max must be at most 8, got {k_max}")));
        }
        let compare_mode = match self.experiment {
            ExperimentKind::Seedlen => {
                let other = self.compare_mode.unwrap_or(match self.mode {
                    RankMode::Full => RankMode::KWise { k: DEFAULT_KWISE_K },
                    RankMode::KWise { .. } => RankMode::Full,
                });
                if other == self.mode {
                    return Err(Error::Config(format!("seedlen needs two different rank modes, got {other} twice")));
                }
                Some(other)
            }
            _ => None,
        };
        if self.experiment == ExperimentKind::Tmax {
            if self.n_list.len() < 4 {
                return Err(Error::Config(format!(
                    "tmax needs at least 4 sizes in n_list for the regression, got {}",
                    self.n_list.len()
                )));
            }
            for &n in &self.n_list {
                self.graph.with_n(n)?.check().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(ResolvedConfig {
            experiment: self.experiment,
            graph: self.graph.clone(),
            d,
            l,
            c,
            trials: self.trials,
            base_seed: self.base_seed,
            n_list: self.n_list.clone(),
            mode: self.mode,
            compare_mode,
            k_max,
            alpha,
            sigmas,
            tree: self.tree,
            exposure: self.exposure,
        })
    }
}

/// A config with every default filled in; echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentKind,
    pub graph: GraphSpec,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub c: f64,
    pub trials: usize,
    pub base_seed: Seed,
    pub n_list: Vec<usize>,
    pub mode: RankMode,
    pub compare_mode: Option<RankMode>,
    pub k_max: usize,
    pub alpha: f64,
    pub sigmas: f64,
    pub tree: TreeMode,
    pub exposure: ExposureSource,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regular(n: usize, d: usize) -> GraphSpec {
        GraphSpec::Regular { n, d, seed: None }
    }

    #[test]
    fn defaults_follow_degree() {
        let cfg = ExperimentConfig::new(ExperimentKind::Expectation, regular(100, 3), 10, 1);
        let r = cfg.resolve(None).unwrap();
        assert_eq!((r.d, r.l, r.c), (3, 16, 240.0));
        assert_eq!((r.alpha, r.sigmas, r.k_max), (1e-3, 3.0, 5));
    }

    #[test]
    fn explicit_overrides() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Layers, GraphSpec::Cycle { n: 10 }, 1, 1);
        cfg.l = Some(3);
        cfg.c = Some(2.0);
        let r = cfg.resolve(None).unwrap();
        assert_eq!((r.d, r.l, r.c), (2, 3, 2.0));
    }

    #[test]
    fn config_errors() {
        let zero = ExperimentConfig::new(ExperimentKind::Expectation, regular(100, 3), 0, 1);
        assert!(matches!(zero.resolve(None), Err(Error::Config(_))));

        let mut tmax = ExperimentConfig::new(ExperimentKind::Tmax, regular(100, 3), 1, 1);
        tmax.n_list = vec![64, 128, 256];
        assert!(matches!(tmax.resolve(None), Err(Error::Config(_))));
        tmax.n_list.push(512);
        assert!(tmax.resolve(None).is_ok());

        let mut same = ExperimentConfig::new(ExperimentKind::Seedlen, regular(100, 3), 1, 1);
        same.compare_mode = Some(RankMode::Full);
        assert!(matches!(same.resolve(None), Err(Error::Config(_))));
        same.compare_mode = None;
        assert_eq!(same.resolve(None).unwrap().compare_mode, Some(RankMode::KWise { k: 4 }));

        let bad_graph = ExperimentConfig::new(ExperimentKind::Expectation, regular(5, 3), 1, 1);
        assert!(matches!(bad_graph.resolve(None), Err(Error::Config(_))));
    }

    #[test]
    fn parses_json_config() {
        let text = r#"{
            "experiment": "seedlen",
            "graph": {"kind": "regular", "n": 1000, "d": 3},
            "trials": 100,
            "base_seed": "0x2a",
            "mode": "full",
            "compare_mode": "kwise:6"
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.base_seed, Seed(42));
        assert_eq!(cfg.compare_mode, Some(RankMode::KWise { k: 6 }));
        assert!(ExperimentConfig::from_json(r#"{"experiment":"nope"}"#).is_err());
        let unknown = text.replace("\"trials\"", "\"bogus\": 1, \"trials\"");
        assert!(ExperimentConfig::from_json(&unknown).is_err());
    }
}
