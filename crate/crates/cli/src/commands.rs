//! Subcommand implementations. Every file written here uses the dense
//! internal node ids `0..N-1`; `partition --ids-out` records how they map
//! back to the labels of the input edge list.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde_json::Value;

use modvit::attacks::read_trace_csv;
use modvit::experiment::{aggregate, run_experiment, AggregateRow, CellResult};
use modvit::rank::kendall_tau_b;
use modvit::{
    deceive_greedy, deceive_initial, detect_communities, generate, load_edge_list, load_partition, modularity, run_attack,
    score_with, AttackOptions, DetectConfig, Family, GeneratorConfig, Graph, Method, Partition, ScoreOptions, StepRecord,
    StopRule, Strategy,
};

use crate::config::BenchmarkFile;
use crate::manifest::{sidecar, RunManifest};
use crate::output::{num, Table};
use crate::{Cli, Command, GraphInput};

/// Runs one subcommand and returns its exit status.
pub fn run(cli: &Cli) -> Result<u8> {
    let seed = cli.seed;
    match &cli.command {
        Command::Generate {
            family,
            n,
            er_p,
            sf_m,
            sf_gamma,
            out,
            partition_out,
        } => {
            let family: Family = family.parse()?;
            let mut cfg = GeneratorConfig::new(family, seed);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.er_p = er_p.unwrap_or(cfg.er_p);
            cfg.sf_m = sf_m.unwrap_or(cfg.sf_m);
            cfg.sf_gamma = sf_gamma.unwrap_or(cfg.sf_gamma);
            if partition_out.is_some() && family != Family::Cellular {
                bail!("--partition-out needs a cellular network; other families have no ground truth");
            }
            let mut manifest = RunManifest::new(seed);
            let generated = manifest.stage("generate", || generate(&cfg))?;
            write_with(out, |w| generated.graph.write_edge_list(w, None))?;
            manifest.output(out);
            if let (Some(path), Some(p)) = (partition_out, &generated.partition) {
                write_with(path, |w| p.write_csv(w))?;
                manifest.output(path);
            }
            write_manifests(&manifest)?;
            let mut t = Table::new(&["family", "nodes", "edges", "communities"]);
            t.push(vec![
                family.to_string().into(),
                generated.graph.node_count().into(),
                generated.graph.edge_count().into(),
                generated.partition.as_ref().map(|p| p.community_count()).into(),
            ]);
            t.print(cli.format)?;
        }
        Command::Partition {
            graph,
            weighted,
            max_levels,
            min_gain,
            out,
            ids_out,
        } => {
            let mut manifest = RunManifest::new(seed);
            manifest.input(graph)?;
            let (g, ids) = manifest.stage("load", || load_edge_list(graph, *weighted))?;
            let cfg = DetectConfig {
                seed,
                max_levels: *max_levels,
                min_gain: *min_gain,
            };
            let p = manifest.stage("detect", || detect_communities(&g, &cfg));
            write_with(out, |w| p.write_csv(w))?;
            manifest.output(out);
            match ids_out {
                Some(path) => {
                    write_with(path, |w| ids.write_csv(w))?;
                    manifest.output(path);
                }
                None if !ids.is_identity() => {
                    eprintln!("warning: node labels were renumbered; pass --ids-out to keep the mapping");
                }
                None => {}
            }
            write_manifests(&manifest)?;
            let mut t = Table::new(&["nodes", "communities", "modularity"]);
            t.push(vec![g.node_count().into(), p.community_count().into(), num(modularity(&g, &p)?)]);
            t.print(cli.format)?;
        }
        Command::Score {
            input,
            method,
            group_self_loops,
            out,
        } => {
            let method: Method = method.parse()?;
            let mut manifest = RunManifest::new(seed);
            let (g, p) = load_inputs(input, seed, &mut manifest)?;
            let opts = ScoreOptions {
                group_self_loops: *group_self_loops,
                ..Default::default()
            };
            let scores = manifest.stage("score", || score_with(&g, &p, method, &opts))?;
            let q = modularity(&g, &p)?;
            write_with(out, |w| {
                writeln!(w, "# method={method}")?;
                writeln!(w, "node_id,score")?;
                for (i, s) in scores.scores.iter().enumerate() {
                    writeln!(w, "{i},{s}")?;
                }
                Ok(())
            })?;
            manifest.output(out);
            write_manifests(&manifest)?;
            let mut t = Table::new(&["method", "nodes", "modularity", "top_node"]);
            t.push(vec![method.to_string().into(), g.node_count().into(), num(q), scores.top().into()]);
            t.print(cli.format)?;
        }
        Command::Attack {
            input,
            strategy,
            method,
            budget,
            group_self_loops,
            out,
        } => {
            let strategy: Strategy = strategy.parse()?;
            let method: Method = method.parse()?;
            let mut manifest = RunManifest::new(seed);
            let (g, p) = load_inputs(input, seed, &mut manifest)?;
            let opts = AttackOptions {
                scoring: ScoreOptions {
                    group_self_loops: *group_self_loops,
                    ..Default::default()
                },
            };
            let trace = manifest.stage("attack", || run_attack(&g, &p, method, strategy, *budget, &opts))?;
            write_with(out, |w| trace.write_csv(w))?;
            manifest.output(out);
            write_manifests(&manifest)?;
            let cost = trace.cost();
            let mut t = Table::new(&["strategy", "method", "removed", "c_rho", "c_eta"]);
            t.push(vec![
                strategy.to_string().into(),
                method.to_string().into(),
                trace.removed().len().into(),
                num(cost.c_rho),
                num(cost.c_eta),
            ]);
            t.print(cli.format)?;
        }
        Command::Deceive {
            input,
            strategy,
            budget,
            target_q,
            plateau,
            out,
        } => {
            let mut manifest = RunManifest::new(seed);
            let (g, p) = load_inputs(input, seed, &mut manifest)?;
            let plan = if strategy == "initial" {
                ensure!(target_q.is_none() && !plateau, "initial deception takes only --budget");
                let budget = budget.ok_or_else(|| anyhow!("initial deception needs --budget"))?;
                manifest.stage("deceive", || deceive_initial(&g, &p, budget))?
            } else {
                let mut rule = StopRule {
                    budget: *budget,
                    target_q: *target_q,
                    plateau: None,
                };
                if *plateau || budget.is_none() {
                    rule = rule.with_plateau();
                }
                manifest.stage("deceive", || deceive_greedy(&g, &p, rule))?
            };
            write_with(out, |w| plan.write_csv(w))?;
            manifest.output(out);
            write_manifests(&manifest)?;
            let mut t = Table::new(&["strategy", "removed", "initial_q", "final_q", "stopping"]);
            t.push(vec![
                strategy.as_str().into(),
                plan.removals.len().into(),
                num(plan.curve.first().map_or(f64::NAN, |c| c.q)),
                num(plan.final_q()),
                plan.stopping.to_string().into(),
            ]);
            t.print(cli.format)?;
        }
        Command::Cost { traces } => {
            let mut t = Table::new(&["trace", "c_rho", "c_eta"]);
            for path in traces {
                let records = load_trace(path)?;
                let cost = modvit::cost(&records);
                t.push(vec![path.display().to_string().into(), num(cost.c_rho), num(cost.c_eta)]);
            }
            t.print(cli.format)?;
        }
        Command::Correlate { scores, out } => {
            let files: Vec<ScoreFile> = scores.iter().map(|p| read_scores(p)).collect::<Result<_>>()?;
            let mut t = Table::new(&[]);
            t.columns.push("method".into());
            t.columns.extend(files.iter().map(|f| f.label.clone()));
            for a in &files {
                let mut row: Vec<Value> = vec![a.label.clone().into()];
                for b in &files {
                    ensure!(a.keys.len() == b.keys.len(), "{} and {} score different node counts", a.label, b.label);
                    row.push(num(kendall_tau_b(&a.keys, &b.keys)?));
                }
                t.push(row);
            }
            match out {
                Some(path) => {
                    let mut manifest = RunManifest::new(seed);
                    for p in scores {
                        manifest.input(p)?;
                    }
                    write_with(path, |w| t.write(crate::Format::Csv, w))?;
                    manifest.output(path);
                    write_manifests(&manifest)?;
                }
                None => t.print(cli.format)?,
            }
        }
        Command::Benchmark {
            config,
            families,
            replications,
            methods,
            strategies,
            budget,
            n,
            traces,
            out_dir,
        } => {
            let flags = BenchmarkFile {
                families: families.clone(),
                replications: *replications,
                seed: None,
                methods: methods.clone(),
                strategies: strategies.clone(),
                budget: *budget,
                traces: traces.then_some(true),
                generator: crate::config::GeneratorSection {
                    n: *n,
                    ..Default::default()
                },
            };
            let mut manifest = RunManifest::new(seed);
            let merged = match config {
                Some(path) => {
                    manifest.input(path)?;
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    flags.or(BenchmarkFile::parse(&text)?)
                }
                None => flags,
            };
            let plan = merged.plan(seed)?;
            manifest.seeds = vec![plan.seed];
            return benchmark(cli, &plan, out_dir, manifest);
        }
        Command::Report { traces, out } => {
            ensure!(!traces.is_empty(), "report needs at least one trace");
            let mut manifest = RunManifest::new(seed);
            let mut loaded = Vec::new();
            let mut nodes: Option<(usize, &Path)> = None;
            for path in traces {
                manifest.input(path)?;
                let records = load_trace(path)?;
                if let Some(n) = inferred_node_count(&records) {
                    match nodes {
                        Some((m, first)) if m != n => bail!(
                            "{} has {n} nodes but {} has {m}; traces must share a graph",
                            path.display(),
                            first.display()
                        ),
                        _ => nodes = Some((n, path)),
                    }
                }
                loaded.push((file_label(path), records));
            }
            write_with(out, |w| {
                writeln!(w, "method,x,x_value,sigma,q")?;
                for (label, records) in &loaded {
                    for axis in ["rho", "eta"] {
                        for r in records {
                            let x = if axis == "rho" { r.rho } else { r.eta };
                            writeln!(w, "{label},{axis},{x},{},{}", r.sigma, r.q)?;
                        }
                    }
                }
                Ok(())
            })?;
            manifest.output(out);
            write_manifests(&manifest)?;
        }
    }
    Ok(0)
}

/// Loads the graph and either reads or detects its partition.
fn load_inputs(input: &GraphInput, seed: u64, manifest: &mut RunManifest) -> Result<(Graph, Partition)> {
    manifest.input(&input.graph)?;
    let (g, _) = manifest.stage("load", || load_edge_list(&input.graph, input.weighted))?;
    let p = match &input.partition {
        Some(path) => {
            manifest.input(path)?;
            load_partition(path, g.node_count())?.partition
        }
        None => manifest.stage("detect", || detect_communities(&g, &DetectConfig::with_seed(seed))),
    };
    Ok((g, p))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

/// One manifest next to each output file.
fn write_manifests(manifest: &RunManifest) -> Result<()> {
    for out in &manifest.outputs {
        manifest.write(&sidecar(Path::new(out)))?;
    }
    Ok(())
}

fn load_trace(path: &Path) -> Result<Vec<StepRecord>> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    read_trace_csv(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn file_label(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Node count implied by the first removal, where `rho = 1 / N`.
fn inferred_node_count(records: &[StepRecord]) -> Option<usize> {
    let first = records.iter().find(|r| r.step == 1)?;
    (first.rho > 0.0).then(|| (1.0 / first.rho).round() as usize)
}

struct ScoreFile {
    label: String,
    /// Scores oriented so that larger means attacked earlier.
    keys: Vec<f64>,
}

/// Reads a scores CSV. The `# method=` line, or else a file stem naming a
/// method, decides whether low or high scores are attacked first.
fn read_scores(path: &Path) -> Result<ScoreFile> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut method: Option<Method> = None;
    let mut scores = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(name) = rest.trim().strip_prefix("method=") {
                method = Some(name.trim().parse()?);
            }
            continue;
        }
        if line.is_empty() || line.starts_with("node_id") {
            continue;
        }
        let bad = || anyhow!("{}:{}: expected node_id,score", path.display(), idx + 1);
        let (id, score) = line.split_once(',').ok_or_else(bad)?;
        let id: usize = id.trim().parse().map_err(|_| bad())?;
        ensure!(id == scores.len(), "{}:{}: node ids must run 0..N-1 in order", path.display(), idx + 1);
        scores.push(score.trim().parse::<f64>().map_err(|_| bad())?);
    }
    ensure!(!scores.is_empty(), "{} holds no scores", path.display());
    let label = file_label(path);
    let method = method.or_else(|| label.parse().ok());
    let keys = match method {
        Some(m) if m.ascending() => scores.iter().map(|s| -s).collect(),
        _ => scores,
    };
    Ok(ScoreFile {
        label: method.map_or(label, |m| m.to_string()),
        keys,
    })
}

fn benchmark(cli: &Cli, plan: &crate::config::BenchmarkPlan, out_dir: &Path, mut manifest: RunManifest) -> Result<u8> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut families: Vec<(Family, Vec<AggregateRow>, Vec<CellResult>)> = Vec::new();
    for spec in &plan.specs {
        let family = spec.generator.family;
        let outcome = manifest.stage(&format!("benchmark {family}"), || run_experiment(spec, plan.traces))?;
        let rows = aggregate(&outcome.cells);
        families.push((family, rows, outcome.cells));
    }

    let path = out_dir.join("aggregate.csv");
    write_with(&path, |w| {
        writeln!(w, "family,strategy,method,runs,failures,mean_c_rho,mean_c_eta")?;
        for (family, rows, _) in &families {
            for r in rows {
                writeln!(
                    w,
                    "{family},{},{},{},{},{:.6},{:.6}",
                    r.strategy, r.method, r.runs, r.failures, r.mean_c_rho, r.mean_c_eta
                )?;
            }
        }
        Ok(())
    })?;
    manifest.output(&path);

    let strategies = plan.specs.first().map(|s| s.strategies.clone()).unwrap_or_default();
    let methods = plan.specs.first().map(|s| s.methods.clone()).unwrap_or_default();
    let path = out_dir.join("table.csv");
    write_with(&path, |w| {
        write!(w, "family,method")?;
        for s in &strategies {
            write!(w, ",{s}_c_rho,{s}_c_eta")?;
        }
        writeln!(w)?;
        for (family, rows, _) in &families {
            for &m in &methods {
                write!(w, "{family},{m}")?;
                for &s in &strategies {
                    match modvit::experiment::find_row(rows, m, s) {
                        Some(r) if r.runs > 0 => write!(w, ",{:.3},{:.3}", r.mean_c_rho, r.mean_c_eta)?,
                        _ => write!(w, ",,")?,
                    }
                }
                writeln!(w)?;
            }
        }
        Ok(())
    })?;
    manifest.output(&path);

    let path = out_dir.join("runs.csv");
    write_with(&path, |w| {
        writeln!(w, "family,replication,seed,strategy,method,c_rho,c_eta,error")?;
        for (family, _, cells) in &families {
            for c in cells {
                let (rho, eta, err) = match &c.outcome {
                    Ok(cost) => (cost.c_rho.to_string(), cost.c_eta.to_string(), String::new()),
                    Err(e) => (String::new(), String::new(), e.replace(',', ";")),
                };
                writeln!(w, "{family},{},{},{},{},{rho},{eta},{err}", c.replication, c.seed, c.strategy, c.method)?;
            }
        }
        Ok(())
    })?;
    manifest.output(&path);

    if plan.traces {
        let dir = out_dir.join("traces");
        for (family, _, cells) in &families {
            for c in cells {
                if let Some(trace) = &c.trace {
                    let name = format!("{family}_{:03}_{}_{}.csv", c.replication, c.strategy, c.method);
                    let path: PathBuf = dir.join(name);
                    write_with(&path, |w| trace.write_csv(w))?;
                    manifest.output(&path);
                }
            }
        }
    }

    for (family, _, cells) in &families {
        for c in cells {
            if let Err(e) = &c.outcome {
                manifest
                    .failures
                    .push(format!("{family} replication {} {} {}: {e}", c.replication, c.strategy, c.method));
            }
        }
    }
    manifest.write(&out_dir.join("manifest.json"))?;

    let mut t = Table::new(&["family", "strategy", "method", "runs", "failures", "mean_c_rho", "mean_c_eta"]);
    for (family, rows, _) in &families {
        for r in rows {
            t.push(vec![
                family.to_string().into(),
                r.strategy.to_string().into(),
                r.method.to_string().into(),
                r.runs.into(),
                r.failures.into(),
                num(r.mean_c_rho),
                num(r.mean_c_eta),
            ]);
        }
    }
    t.print(cli.format)?;
    if manifest.failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("warning: {} benchmark cells failed; see manifest.json", manifest.failures.len());
        Ok(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_from_first_step() {
        let rec = |step, rho| StepRecord {
            step,
            node: None,
            rho,
            eta: 0.0,
            sigma: 1.0,
            q: 0.0,
        };
        assert_eq!(inferred_node_count(&[rec(0, 0.0), rec(1, 1.0 / 7.0)]), Some(7));
        assert_eq!(inferred_node_count(&[rec(0, 0.0)]), None);
    }

    #[test]
    fn score_files_orient_ascending_methods() {
        let dir = tempfile::tempdir().unwrap();
        let mv = dir.path().join("a.csv");
        fs::write(&mv, "# method=mv\nnode_id,score\n0,-1\n1,2\n").unwrap();
        let f = read_scores(&mv).unwrap();
        assert_eq!(f.label, "mv");
        assert_eq!(f.keys, vec![1.0, -2.0]);
        let deg = dir.path().join("deg.csv");
        fs::write(&deg, "node_id,score\n0,3\n1,1\n").unwrap();
        let f = read_scores(&deg).unwrap();
        assert_eq!(f.label, "deg");
        assert_eq!(f.keys, vec![3.0, 1.0]);
        let gap = dir.path().join("gap.csv");
        fs::write(&gap, "node_id,score\n1,3\n").unwrap();
        assert!(read_scores(&gap).is_err());
    }
}
