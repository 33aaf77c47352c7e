//! Benchmark configuration, from a TOML file or command-line flags.
//!
//! ```toml
//! families = ["cellular", "er"]
//! replications = 100
//! seed = 1
//! methods = ["mv", "amv", "mas"]
//! strategies = ["initial", "mba"]
//! budget = 1.0
//! traces = false
//!
//! [generator]
//! n = 1000
//! er_p = 0.015
//! sf_m = 8
//! sf_gamma = 1.5
//! ```

use anyhow::{Context, Result};
use serde::Deserialize;

use modvit::experiment::ExperimentSpec;
use modvit::{Family, GeneratorConfig, Method, Strategy};

/// Default benchmark roster. Commn-centrality is left out by
/// default because it is undefined once any community is isolated.
pub const DEFAULT_METHODS: [Method; 9] = [
    Method::Mv,
    Method::Amv,
    Method::Rmv,
    Method::Cd,
    Method::AmcD,
    Method::Mas,
    Method::Chb,
    Method::WmcD,
    Method::Deg,
];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub n: Option<usize>,
    pub er_p: Option<f64>,
    pub sf_m: Option<usize>,
    pub sf_gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkFile {
    pub families: Option<Vec<String>>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<String>>,
    pub strategies: Option<Vec<String>>,
    pub budget: Option<f64>,
    pub traces: Option<bool>,
    #[serde(default)]
    pub generator: GeneratorSection,
}

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub specs: Vec<ExperimentSpec>,
    pub seed: u64,
    pub traces: bool,
}

impl BenchmarkFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing benchmark config")
    }

    /// Fills unset fields with the values of `fallback`.
    pub fn or(self, fallback: BenchmarkFile) -> BenchmarkFile {
        BenchmarkFile {
            families: self.families.or(fallback.families),
            replications: self.replications.or(fallback.replications),
            seed: self.seed.or(fallback.seed),
            methods: self.methods.or(fallback.methods),
            strategies: self.strategies.or(fallback.strategies),
            budget: self.budget.or(fallback.budget),
            traces: self.traces.or(fallback.traces),
            generator: GeneratorSection {
                n: self.generator.n.or(fallback.generator.n),
                er_p: self.generator.er_p.or(fallback.generator.er_p),
                sf_m: self.generator.sf_m.or(fallback.generator.sf_m),
                sf_gamma: self.generator.sf_gamma.or(fallback.generator.sf_gamma),
            },
        }
    }

    pub fn plan(&self, default_seed: u64) -> Result<BenchmarkPlan> {
        let families: Vec<Family> = match &self.families {
            Some(names) => names.iter().map(|s| s.parse()).collect::<modvit::Result<_>>()?,
            None => vec![Family::Cellular],
        };
        let methods: Vec<Method> = match &self.methods {
            Some(names) if names.iter().any(|n| n == "all") => Method::ALL.to_vec(),
            Some(names) => names.iter().map(|s| s.parse()).collect::<modvit::Result<_>>()?,
            None => DEFAULT_METHODS.to_vec(),
        };
        let strategies: Vec<Strategy> = match &self.strategies {
            Some(names) => names.iter().map(|s| s.parse()).collect::<modvit::Result<_>>()?,
            None => Strategy::ALL.to_vec(),
        };
        let seed = self.seed.unwrap_or(default_seed);
        let replications = self.replications.unwrap_or(100);
        anyhow::ensure!(replications > 0, "replications must be positive");
        let specs = families
            .into_iter()
            .map(|family| {
                let mut cfg = GeneratorConfig::new(family, seed);
                if let Some(n) = self.generator.n {
                    cfg.n = n;
                }
                if let Some(p) = self.generator.er_p {
                    cfg.er_p = p;
                }
                if let Some(m) = self.generator.sf_m {
                    cfg.sf_m = m;
                }
                if let Some(g) = self.generator.sf_gamma {
                    cfg.sf_gamma = g;
                }
                cfg.validate()?;
                let mut spec = ExperimentSpec::new(cfg, replications, seed);
                spec.methods = methods.clone();
                spec.strategies = strategies.clone();
                spec.budget = self.budget.unwrap_or(1.0);
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BenchmarkPlan {
            specs,
            seed,
            traces: self.traces.unwrap_or(false),
        })
    }
}
