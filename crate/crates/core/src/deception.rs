//! Community deception: delete the nodes whose removal lowers modularity the
//! most, so the partition stops looking like community structure.

use std::fmt;
use std::io::Write;

use crate::attacks::Residual;
use crate::centrality::{Method, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::vitality::modularity_vitality_all;

/// Greedy deception stops at the first rule that fires.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    /// Fraction of nodes that may be removed.
    pub budget: Option<f64>,
    /// Stop once residual modularity is at or below this value.
    pub target_q: Option<f64>,
    /// Stop when no single removal lowers modularity by at least this much.
    pub plateau: Option<f64>,
}

impl StopRule {
    pub const PLATEAU: f64 = 1e-9;

    pub fn budget(fraction: f64) -> Self {
        StopRule {
            budget: Some(fraction),
            ..Self::default()
        }
    }

    pub fn target_q(q: f64) -> Self {
        StopRule {
            target_q: Some(q),
            plateau: Some(Self::PLATEAU),
            ..Self::default()
        }
    }

    pub fn with_plateau(mut self) -> Self {
        self.plateau = Some(Self::PLATEAU);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stopping {
    NodeBudget,
    TargetQ,
    Plateau,
    Exhausted,
}

impl fmt::Display for Stopping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stopping::NodeBudget => "node_budget",
            Stopping::TargetQ => "target_q",
            Stopping::Plateau => "plateau",
            Stopping::Exhausted => "exhausted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: usize,
    pub node: Option<usize>,
    pub rho: f64,
    pub eta: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeceptionPlan {
    pub removals: Vec<usize>,
    /// Vitality of each removed node at the moment it was chosen.
    pub vitality: Vec<f64>,
    pub curve: Vec<CurvePoint>,
    pub stopping: Stopping,
}

impl DeceptionPlan {
    pub fn final_q(&self) -> f64 {
        self.curve.last().map_or(0.0, |c| c.q)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,node_id,rho,eta,q")?;
        for c in &self.curve {
            let node = c.node.map(|n| n.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", c.step, node, c.rho, c.eta, c.q)?;
        }
        Ok(())
    }
}

fn check(g: &Graph, p: &Partition, budget: Option<f64>) -> Result<()> {
    p.check_graph(g)?;
    if let Some(b) = budget {
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::InvalidParameter(format!("budget must lie in (0, 1], got {b}")));
        }
    }
    Ok(())
}

fn node_limit(n: usize, budget: Option<f64>) -> usize {
    budget.map_or(n, |b| ((b * n as f64).round() as usize).clamp(1, n))
}

/// Scores vitality once and removes the most positive nodes first.
pub fn deceive_initial(g: &Graph, p: &Partition, budget: f64) -> Result<DeceptionPlan> {
    check(g, p, Some(budget))?;
    let n = g.node_count();
    let report = modularity_vitality_all(g, p)?;
    let order = ScoreVector::new(Method::Rmv, report.vitality.clone());
    let k = node_limit(n, Some(budget));
    let mut residual = Residual::new(g, p);
    let mut curve = vec![CurvePoint {
        step: 0,
        node: None,
        rho: 0.0,
        eta: 0.0,
        q: report.q_original,
    }];
    let removals: Vec<usize> = order.ranking[..k].to_vec();
    for (t, &v) in removals.iter().enumerate() {
        residual.remove(v);
        curve.push(CurvePoint {
            step: t + 1,
            node: Some(v),
            rho: (t + 1) as f64 / n as f64,
            eta: residual.eta(),
            q: residual.modularity(),
        });
    }
    Ok(DeceptionPlan {
        vitality: removals.iter().map(|&v| report.vitality[v]).collect(),
        removals,
        curve,
        stopping: Stopping::NodeBudget,
    })
}

/// Recomputes vitality on the residual graph before every removal and
/// deletes the argmax (smallest id on ties).
pub fn deceive_greedy(g: &Graph, p: &Partition, stop: StopRule) -> Result<DeceptionPlan> {
    check(g, p, stop.budget)?;
    let n = g.node_count();
    let limit = node_limit(n, stop.budget);
    let mut residual = Residual::new(g, p);
    let mut removals = Vec::new();
    let mut vitality = Vec::new();
    let mut curve = Vec::new();
    let stopping = loop {
        let (rg, rp, original) = residual.snapshot();
        let report = modularity_vitality_all(&rg, &rp)?;
        curve.push(CurvePoint {
            step: removals.len(),
            node: removals.last().copied(),
            rho: removals.len() as f64 / n.max(1) as f64,
            eta: residual.eta(),
            q: report.q_original,
        });
        if let Some(target) = stop.target_q {
            if report.q_original <= target {
                break Stopping::TargetQ;
            }
        }
        if removals.len() >= limit {
            break if stop.budget.is_some() { Stopping::NodeBudget } else { Stopping::Exhausted };
        }
        let ranked = ScoreVector::new(Method::Rmv, report.vitality);
        let Some(top) = ranked.top() else {
            break Stopping::Exhausted;
        };
        let best = ranked.scores[top];
        if let Some(eps) = stop.plateau {
            if best < eps {
                break Stopping::Plateau;
            }
        }
        let v = original[top];
        residual.remove(v);
        removals.push(v);
        vitality.push(best);
    };
    Ok(DeceptionPlan {
        removals,
        vitality,
        curve,
        stopping,
    })
}
