//! Targeted node attacks and fragmentation accounting.
//!
//! Every strategy produces an [`AttackTrace`]: a step-0 record for the
//! intact graph followed by one record per removal with the fraction of
//! nodes removed (`rho`), the fraction of edge weight removed (`eta`), the
//! largest component relative to the original node count (`sigma`), and the
//! modularity of the residual graph under the induced partition (`q`).

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::centrality::{score_with, Method, ScoreOptions, ScoreVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Initial,
    Recomputed,
    Mba,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Initial, Strategy::Recomputed, Strategy::Mba];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Initial => "initial",
            Strategy::Recomputed => "recomputed",
            Strategy::Mba => "mba",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `None` for the step-0 record.
    pub node: Option<usize>,
    pub rho: f64,
    pub eta: f64,
    pub sigma: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackTrace {
    pub method: Method,
    pub strategy: Strategy,
    pub node_count: usize,
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub c_rho: f64,
    pub c_eta: f64,
}

impl AttackTrace {
    pub fn removed(&self) -> Vec<usize> {
        self.records.iter().filter_map(|r| r.node).collect()
    }

    pub fn cost(&self) -> CostReport {
        cost(&self.records)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_trace_csv(&self.records, out)
    }
}

pub fn write_trace_csv<W: Write>(records: &[StepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,node_id,rho,eta,sigma,q")?;
    for r in records {
        let node = r.node.map(|n| n.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.step, node, r.rho, r.eta, r.sigma, r.q)?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<Vec<StepRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<trace>", e))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 1 && line.starts_with("step")) {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let malformed = |reason: String| Error::Malformed { line: lineno, reason };
        if f.len() != 6 {
            return Err(malformed(format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| malformed(format!("bad number {s:?}")));
        records.push(StepRecord {
            step: f[0].parse().map_err(|_| malformed(format!("bad step {:?}", f[0])))?,
            node: if f[1].is_empty() {
                None
            } else {
                Some(f[1].parse().map_err(|_| malformed(format!("bad node id {:?}", f[1])))?)
            },
            rho: num(f[2])?,
            eta: num(f[3])?,
            sigma: num(f[4])?,
            q: num(f[5])?,
        });
    }
    Ok(records)
}

/// Area under `sigma` against `rho` and against `eta` on `[0, 1]`, by the
/// trapezoid rule. A trace that stops early is extended at its final
/// `sigma`.
pub fn cost(records: &[StepRecord]) -> CostReport {
    let area = |points: Vec<(f64, f64)>| -> f64 {
        let mut total = 0.0;
        for w in points.windows(2) {
            total += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
        }
        if let Some(&(x, y)) = points.last() {
            if x < 1.0 {
                total += (1.0 - x) * y;
            }
        }
        total
    };
    CostReport {
        c_rho: area(records.iter().map(|r| (r.rho, r.sigma)).collect()),
        c_eta: area(records.iter().map(|r| (r.eta, r.sigma)).collect()),
    }
}

/// Residual graph bookkeeping: modularity and removed weight maintained in
/// `O(deg)` per removal.
pub(crate) struct Residual<'a> {
    g: &'a Graph,
    p: &'a Partition,
    pub alive: Vec<bool>,
    d: Vec<f64>,
    m_internal: f64,
    removed_weight: f64,
    live_edges: usize,
}

impl<'a> Residual<'a> {
    pub fn new(g: &'a Graph, p: &'a Partition) -> Self {
        let mut d = vec![0.0; p.community_count()];
        let mut m_internal = 0.0;
        for i in 0..g.node_count() {
            d[p.community_of(i)] += g.degrees()[i];
        }
        for (u, v, w) in g.edges() {
            if p.community_of(u) == p.community_of(v) {
                m_internal += w;
            }
        }
        Residual {
            g,
            p,
            alive: vec![true; g.node_count()],
            d,
            m_internal,
            removed_weight: 0.0,
            live_edges: g.edge_count(),
        }
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(self.alive[i]);
        let ci = self.p.community_of(i);
        self.alive[i] = false;
        for (j, w) in self.g.neighbors(i) {
            if !self.alive[j] {
                continue;
            }
            let cj = self.p.community_of(j);
            self.removed_weight += w;
            self.live_edges -= 1;
            self.d[ci] -= w;
            self.d[cj] -= w;
            if ci == cj {
                self.m_internal -= w;
            }
        }
    }

    pub fn has_edges(&self) -> bool {
        self.live_edges > 0
    }

    pub fn eta(&self) -> f64 {
        let total = self.g.total_weight();
        if total > 0.0 {
            (self.removed_weight / total).min(1.0)
        } else {
            0.0
        }
    }

    pub fn modularity(&self) -> f64 {
        if self.live_edges == 0 {
            return 0.0;
        }
        let m = self.g.total_weight() - self.removed_weight;
        let sum_sq: f64 = self.d.iter().map(|x| x * x).sum();
        crate::vitality::single_fraction(self.m_internal, m, sum_sq)
    }

    /// The residual graph and partition with compacted ids, plus the
    /// original id of each residual node.
    pub fn snapshot(&self) -> (Graph, Partition, Vec<usize>) {
        let (g, original) = self.g.induced(&self.alive);
        (g, self.p.restrict(&self.alive), original)
    }
}

/// Largest-component size after each prefix of `order` is removed, computed
/// by adding the nodes back in reverse with union-find. Entry `t` is the
/// size after `t` removals.
pub fn largest_component_profile(g: &Graph, order: &[usize]) -> Vec<usize> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut alive = vec![true; n];
    for &v in order {
        alive[v] = false;
    }
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut best = 0usize;
    let union = |parent: &mut Vec<usize>, size: &mut Vec<usize>, a: usize, b: usize, best: &mut usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let (big, small) = if size[ra] >= size[rb] { (ra, rb) } else { (rb, ra) };
            parent[small] = big;
            size[big] += size[small];
            *best = (*best).max(size[big]);
        }
    };
    for v in 0..n {
        if alive[v] {
            best = best.max(1);
            for (u, _) in g.neighbors(v) {
                if u < v && alive[u] {
                    union(&mut parent, &mut size, u, v, &mut best);
                }
            }
        }
    }
    let mut profile = vec![0usize; order.len() + 1];
    profile[order.len()] = best;
    for t in (0..order.len()).rev() {
        let v = order[t];
        alive[v] = true;
        best = best.max(1);
        for (u, _) in g.neighbors(v) {
            if alive[u] {
                union(&mut parent, &mut size, u, v, &mut best);
            }
        }
        profile[t] = best;
    }
    profile
}

/// Connected components under node deletion. A deletion relabels only the
/// component that contained the deleted node.
pub(crate) struct ComponentTracker<'a> {
    g: &'a Graph,
    alive: Vec<bool>,
    label: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl<'a> ComponentTracker<'a> {
    pub fn new(g: &'a Graph) -> Self {
        let (label, count) = g.component_labels();
        let mut members = vec![Vec::new(); count];
        for (v, &l) in label.iter().enumerate() {
            members[l].push(v);
        }
        ComponentTracker {
            g,
            alive: vec![true; g.node_count()],
            label,
            members,
        }
    }

    pub fn remove(&mut self, v: usize) {
        self.alive[v] = false;
        let old = self.label[v];
        self.label[v] = usize::MAX;
        let pieces_of = std::mem::take(&mut self.members[old]);
        let mut stack = Vec::new();
        for &start in &pieces_of {
            if !self.alive[start] || self.label[start] != old {
                continue;
            }
            let id = self.members.len();
            let mut piece = vec![start];
            self.label[start] = id;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for (w, _) in self.g.neighbors(u) {
                    if self.alive[w] && self.label[w] == old {
                        self.label[w] = id;
                        piece.push(w);
                        stack.push(w);
                    }
                }
            }
            piece.sort_unstable();
            self.members.push(piece);
        }
    }

    /// Label of the largest component; ties go to the smallest member id.
    pub fn largest(&self) -> Option<usize> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .max_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .map(|(l, _)| l)
    }

    pub fn members(&self, label: usize) -> &[usize] {
        &self.members[label]
    }

    pub fn label(&self, v: usize) -> usize {
        self.label[v]
    }
}

#[derive(Debug, Clone, Default)]
pub struct AttackOptions {
    pub scoring: ScoreOptions,
}

fn removal_count(n: usize, budget: f64) -> Result<usize> {
    if !(budget > 0.0 && budget <= 1.0) {
        return Err(Error::InvalidParameter(format!("budget must lie in (0, 1], got {budget}")));
    }
    Ok(((budget * n as f64).round() as usize).clamp(1, n))
}

/// Turns a removal order into a trace.
fn trace_from_order(g: &Graph, p: &Partition, method: Method, strategy: Strategy, order: &[usize]) -> AttackTrace {
    let n = g.node_count();
    let profile = largest_component_profile(g, order);
    let mut residual = Residual::new(g, p);
    let mut records = Vec::with_capacity(order.len() + 1);
    records.push(StepRecord {
        step: 0,
        node: None,
        rho: 0.0,
        eta: 0.0,
        sigma: profile[0] as f64 / n as f64,
        q: residual.modularity(),
    });
    for (t, &v) in order.iter().enumerate() {
        residual.remove(v);
        records.push(StepRecord {
            step: t + 1,
            node: Some(v),
            rho: (t + 1) as f64 / n as f64,
            eta: residual.eta(),
            sigma: profile[t + 1] as f64 / n as f64,
            q: residual.modularity(),
        });
    }
    AttackTrace {
        method,
        strategy,
        node_count: n,
        records,
    }
}

fn check_input(g: &Graph, p: &Partition) -> Result<()> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    p.check_graph(g)
}

/// Scores once and removes the top `budget * N` nodes in attack order.
pub fn initial_attack(g: &Graph, p: &Partition, method: Method, budget: f64, opts: &AttackOptions) -> Result<AttackTrace> {
    check_input(g, p)?;
    let k = removal_count(g.node_count(), budget)?;
    let scores = score_with(g, p, method, &opts.scoring)?;
    Ok(trace_from_order(g, p, method, Strategy::Initial, &scores.ranking[..k]))
}

/// Rescores the residual graph after every removal and removes the current
/// top node. Once no edges remain every method here scores all nodes
/// equally, so the rest go in ascending id order without rescoring.
pub fn recomputed_attack(g: &Graph, p: &Partition, method: Method, budget: f64, opts: &AttackOptions) -> Result<AttackTrace> {
    check_input(g, p)?;
    let k = removal_count(g.node_count(), budget)?;
    let order = recomputed_order(g, p, method, k, opts, |_, _| {})?;
    Ok(trace_from_order(g, p, method, Strategy::Recomputed, &order))
}

/// Removal order of a recomputed attack. `observe` sees each residual score
/// vector (in residual ids) and the original id it led to remove.
pub(crate) fn recomputed_order<F>(
    g: &Graph,
    p: &Partition,
    method: Method,
    k: usize,
    opts: &AttackOptions,
    mut observe: F,
) -> Result<Vec<usize>>
where
    F: FnMut(&ScoreVector, usize),
{
    let mut residual = Residual::new(g, p);
    let mut order = Vec::with_capacity(k);
    // commn-centrality is undefined on edgeless graphs, so it never takes
    // the shortcut and reports the failure instead
    let shortcut = method != Method::Cc;
    while order.len() < k {
        if shortcut && !residual.has_edges() {
            let rest: Vec<usize> = (0..g.node_count()).filter(|&v| residual.alive[v]).collect();
            order.extend(rest.into_iter().take(k - order.len()));
            break;
        }
        let (rg, rp, original) = residual.snapshot();
        let scores = score_with(&rg, &rp, method, &opts.scoring)?;
        let top = original[scores.top().expect("residual graph is non-empty")];
        observe(&scores, top);
        residual.remove(top);
        order.push(top);
    }
    Ok(order)
}

/// Module-based attack: scores once, then only removes nodes that bridge
/// communities and sit in the current largest component. Non-bridges are
/// discarded from the queue, bridges outside the largest component are sent
/// to the back. Stops once the largest component holds no bridge.
pub fn mba_attack(g: &Graph, p: &Partition, method: Method, opts: &AttackOptions) -> Result<AttackTrace> {
    check_input(g, p)?;
    let n = g.node_count();
    let scores = score_with(g, p, method, &opts.scoring)?;
    let mut queue: VecDeque<usize> = scores.ranking.iter().copied().collect();
    // live neighbors in other communities; a bridge has at least one
    let mut foreign: Vec<usize> = (0..n)
        .map(|i| g.neighbors(i).filter(|&(j, _)| p.community_of(j) != p.community_of(i)).count())
        .collect();
    let mut tracker = ComponentTracker::new(g);
    let mut residual = Residual::new(g, p);

    let sigma_of = |t: &ComponentTracker| t.largest().map_or(0, |l| t.members(l).len()) as f64 / n as f64;
    let mut records = vec![StepRecord {
        step: 0,
        node: None,
        rho: 0.0,
        eta: 0.0,
        sigma: sigma_of(&tracker),
        q: residual.modularity(),
    }];

    let mut lc = tracker.largest();
    let lc_has_bridge = |tracker: &ComponentTracker, lc: Option<usize>, foreign: &[usize]| {
        lc.is_some_and(|l| tracker.members(l).iter().any(|&v| foreign[v] > 0))
    };
    let mut active = lc_has_bridge(&tracker, lc, &foreign);
    while active {
        let Some(tau) = queue.pop_front() else { break };
        let is_bridge = foreign[tau] > 0;
        let in_lc = residual.alive[tau] && Some(tracker.label(tau)) == lc;
        if is_bridge && in_lc {
            for (j, _) in g.neighbors(tau) {
                if residual.alive[j] && p.community_of(j) != p.community_of(tau) {
                    foreign[j] -= 1;
                }
            }
            foreign[tau] = 0;
            residual.remove(tau);
            tracker.remove(tau);
            lc = tracker.largest();
            let step = records.len();
            records.push(StepRecord {
                step,
                node: Some(tau),
                rho: step as f64 / n as f64,
                eta: residual.eta(),
                sigma: sigma_of(&tracker),
                q: residual.modularity(),
            });
            active = lc_has_bridge(&tracker, lc, &foreign);
        } else if !is_bridge {
            // external links never come back, so it can never qualify
        } else {
            queue.push_back(tau);
        }
    }
    Ok(AttackTrace {
        method,
        strategy: Strategy::Mba,
        node_count: n,
        records,
    })
}

/// Dispatches on strategy. `budget` is ignored by the module-based attack.
pub fn run_attack(g: &Graph, p: &Partition, method: Method, strategy: Strategy, budget: f64, opts: &AttackOptions) -> Result<AttackTrace> {
    match strategy {
        Strategy::Initial => initial_attack(g, p, method, budget, opts),
        Strategy::Recomputed => recomputed_attack(g, p, method, budget, opts),
        Strategy::Mba => mba_attack(g, p, method, opts),
    }
}
