use std::io::Write as _;

use conduit_core::centrality::RankingTable;
use conduit_core::community::CurvePoint;
use conduit_core::export::{directed_adjacency, graphml_string, undirected_adjacency, write_json_adjacency};
use conduit_core::paths::{best_routes, DEFAULT_ROUTE_CAP};
use conduit_core::{
    apply_threshold, apply_threshold_undirected, build_directed, centrality, community_report, generate_synthetic,
    isolated_vertices, louvain, rank, sweep_centrality, sweep_modularity, to_affinity, to_undirected, validate,
    CentralityKind, CentralityScores, CommunityError, IncomeType, JurisdictionRegistry, PathError, Rate,
    SyntheticProfile, Weight,
};
use serde_json::json;

use crate::config::{Inputs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::Staged;

/// Six decimals, the precision of the published tables; never prints `-0.000000`.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn num6(x: f64) -> serde_json::Value {
    json!(fmt6(x).parse::<f64>().expect("formatted float parses"))
}

fn threshold_suffix(t: Option<Rate>) -> String {
    t.map_or_else(String::new, |t| format!("_t{t}"))
}

fn csv_bytes<F>(header: &[&str], fill: F) -> CliResult<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(buf)
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn json_bytes(value: &serde_json::Value) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn check_format(config: &RunConfig, allowed: &[crate::config::Format], command: &str) -> CliResult<()> {
    if allowed.contains(&config.format) {
        Ok(())
    } else {
        Err(CliError::Input(format!("--format {:?} does not apply to {command}", config.format).to_lowercase()))
    }
}

fn table_formats() -> [crate::config::Format; 3] {
    use crate::config::Format::*;
    [All, Csv, Json]
}

pub fn cmd_validate(config: &RunConfig, income: Option<IncomeType>) -> CliResult<()> {
    let inputs = Inputs::load(config)?;
    let incomes = match inputs.incomes(income) {
        Ok(v) => v,
        Err(_) if income.is_none() => {
            eprintln!("registry: {} jurisdictions, no matrix given", inputs.registry.len());
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let mut failed = 0;
    for income in incomes {
        let path = inputs.path(income).display().to_string();
        let report = validate(&inputs.draft(income)?, &inputs.registry);
        for e in &report.errors {
            eprintln!("{path}: error: {e}");
        }
        for w in &report.warnings {
            eprintln!("{path}: warning: {w}");
        }
        if report.is_accepted() {
            eprintln!("{path}: ok ({income}, {})", plural(report.warnings.len(), "warning"));
        } else {
            eprintln!("{path}: rejected ({income}, {})", plural(report.errors.len(), "error"));
            failed += 1;
        }
    }
    if failed > 0 {
        Err(CliError::Domain(format!("{failed} matrix file(s) failed validation")))
    } else {
        Ok(())
    }
}

fn ranking_json(table: &RankingTable<f64>) -> serde_json::Value {
    json!({
        "kind": table.kind,
        "income": table.meta.income,
        "threshold": table.meta.threshold,
        "n": table.meta.n,
        "rows": table.rows.iter().map(|r| json!({
            "rank": r.rank,
            "code": r.code,
            "raw": num6(r.raw),
            "normalized": num6(r.normalized),
        })).collect::<Vec<_>>(),
    })
}

pub fn cmd_centrality(
    config: &RunConfig,
    income: Option<IncomeType>,
    threshold: Option<Rate>,
    kind: CentralityKind,
    top: Option<usize>,
) -> CliResult<()> {
    check_format(config, &table_formats(), "centrality")?;
    let inputs = Inputs::load(config)?;
    let incomes = inputs.incomes(income)?;
    let options = json!({ "income": income, "threshold": threshold, "kind": kind, "top": top });
    let mut staged = Staged::new("centrality", options);
    let mut out = std::io::stdout().lock();
    for income in incomes {
        let base = build_directed(&inputs.matrix(income)?);
        let graph = match threshold {
            Some(t) => apply_threshold(&base, t),
            None => base,
        };
        let scores: CentralityScores = centrality(&graph, kind);
        let table = rank(&scores, &inputs.registry, top);
        let stem = format!("{}_{income}{}", kind.as_str(), threshold_suffix(threshold));
        if config.format.csv() {
            let bytes = csv_bytes(&["rank", "code", "raw", "normalized"], |w| {
                for r in &table.rows {
                    w.write_record([r.rank.to_string(), r.code.clone(), fmt6(r.raw), fmt6(r.normalized)])?;
                }
                Ok(())
            })?;
            staged.add(format!("{stem}.csv"), bytes);
        }
        if config.format.json() {
            staged.add(format!("{stem}.json"), json_bytes(&ranking_json(&table))?);
        }
        let _ = writeln!(out, "# {} centrality, {income}{}", kind.as_str(), threshold.map_or(String::new(), |t| format!(", threshold {t}")));
        for r in &table.rows {
            let _ = writeln!(out, "{:>4}  {:<24} {}", r.rank, r.code, fmt6(r.normalized));
        }
    }
    staged.commit(config, &inputs.records)
}

fn curve_cell(p: &CurvePoint<f64>) -> String {
    p.modularity.map_or_else(|| "NA".into(), fmt6)
}

pub fn cmd_sweep(
    config: &RunConfig,
    income: Option<IncomeType>,
    kind: CentralityKind,
    emit_curve: bool,
) -> CliResult<()> {
    let inputs = Inputs::load(config)?;
    let incomes = inputs.incomes(income)?;
    let options = json!({ "income": income, "kind": kind, "emit_curve": emit_curve });
    let mut staged = Staged::new("sweep", options);
    for income in incomes {
        let matrix = inputs.matrix(income)?;
        let sweep = sweep_centrality::<f64>(&matrix, &config.thresholds, kind);
        let bytes = csv_bytes(&["threshold", "code", "raw", "normalized"], |w| {
            for (t, s) in &sweep {
                for v in 0..s.raw.len() {
                    let code = inputs.registry.code(v);
                    w.write_record([t.to_string(), code.into(), fmt6(s.raw[v]), fmt6(s.normalized[v])])?;
                }
            }
            Ok(())
        })?;
        staged.add(format!("sweep_{}_{income}.csv", kind.as_str()), bytes);
        if emit_curve {
            let curve: conduit_core::ModularityCurve =
                sweep_modularity(&matrix, &config.thresholds, config.mode, &config.louvain());
            let bytes = csv_bytes(&["threshold", "modularity", "community_count", "isolate_count"], |w| {
                for p in &curve.points {
                    w.write_record([
                        p.threshold.to_string(),
                        curve_cell(p),
                        p.community_count.to_string(),
                        p.isolate_count.to_string(),
                    ])?;
                }
                Ok(())
            })?;
            staged.add(format!("modularity_{income}.csv"), bytes);
            match curve.argmax() {
                Some(k) => {
                    let p = &curve.points[k];
                    println!("{income}: peak modularity {} at threshold {}", curve_cell(p), p.threshold);
                }
                None => println!("{income}: modularity undefined at every threshold"),
            }
        }
    }
    staged.commit(config, &inputs.records)
}

pub fn cmd_communities(config: &RunConfig, income: Option<IncomeType>, threshold: Option<Rate>) -> CliResult<()> {
    check_format(config, &table_formats(), "communities")?;
    let inputs = Inputs::load(config)?;
    let incomes = inputs.incomes(income)?;
    let options = json!({ "income": income, "threshold": threshold });
    let mut staged = Staged::new("communities", options);
    for income in incomes {
        let matrix = inputs.matrix(income)?;
        let t = match threshold {
            Some(t) => t,
            None => {
                let curve: conduit_core::ModularityCurve =
                    sweep_modularity(&matrix, &config.thresholds, config.mode, &config.louvain());
                curve.argmax_threshold().ok_or_else(|| {
                    CliError::Domain(format!("{income}: no threshold leaves an edge, modularity undefined"))
                })?
            }
        };
        let base = build_directed(&matrix);
        let undirected = apply_threshold_undirected(&to_undirected(&base).expect("fresh graph"), t);
        let aff = to_affinity::<f64>(&undirected, config.mode).map_err(|e| community_error(income, t, e))?;
        let partition = louvain(&aff, &config.louvain()).map_err(|e| community_error(income, t, e))?;
        let scores: CentralityScores = centrality(&apply_threshold(&base, t), CentralityKind::Load);
        let isolates = isolated_vertices(&undirected);
        let report = community_report(&partition, &scores, &inputs.registry, &isolates);
        let stem = format!("communities_{income}_t{t}");
        if config.format.csv() {
            let bytes = csv_bytes(&["community", "code", "normalized"], |w| {
                for g in &report.communities {
                    for m in &g.members {
                        w.write_record([g.label.to_string(), m.code.clone(), fmt6(m.score)])?;
                    }
                }
                for m in &report.no_link {
                    w.write_record(["no_link".to_string(), m.code.clone(), fmt6(m.score)])?;
                }
                Ok(())
            })?;
            staged.add(format!("{stem}.csv"), bytes);
        }
        if config.format.json() {
            let member = |m: &conduit_core::community::ReportMember<f64>| json!({ "code": m.code, "normalized": num6(m.score) });
            let doc = json!({
                "income": income,
                "threshold": t,
                "mode": config.mode,
                "seed": config.seed,
                "modularity": num6(partition.modularity),
                "converged": partition.converged,
                "passes": partition.passes,
                "communities": report.communities.iter().map(|g| json!({
                    "label": g.label,
                    "members": g.members.iter().map(member).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "no_link": report.no_link.iter().map(member).collect::<Vec<_>>(),
            });
            staged.add(format!("{stem}.json"), json_bytes(&doc)?);
        }
        println!(
            "{income}: threshold {t}, modularity {}, {} communities, {} without links",
            fmt6(partition.modularity),
            report.communities.len(),
            report.no_link.len()
        );
    }
    staged.commit(config, &inputs.records)
}

fn community_error(income: IncomeType, t: Rate, e: CommunityError) -> CliError {
    CliError::Domain(format!("{income} at threshold {t}: {e}"))
}

/// Nearest registry code by edit distance, case-insensitively.
fn suggest(registry: &JurisdictionRegistry, code: &str) -> Option<String> {
    let lower = code.to_lowercase();
    registry
        .codes()
        .map(|c| (strsim::levenshtein(&lower, &c.to_lowercase()), c))
        .min()
        .map(|(_, c)| c.to_string())
}

fn lookup(registry: &JurisdictionRegistry, code: &str) -> CliResult<usize> {
    registry.id(code).ok_or_else(|| {
        let hint = suggest(registry, code).map_or(String::new(), |s| format!("; did you mean `{s}`?"));
        CliError::Domain(format!("unknown jurisdiction code `{code}`{hint}"))
    })
}

pub fn cmd_route(
    config: &RunConfig,
    from: &str,
    to: &str,
    income: Option<IncomeType>,
    threshold: Option<Rate>,
) -> CliResult<()> {
    let inputs = Inputs::load(config)?;
    let income = match income {
        Some(i) => i,
        None => inputs.incomes(None)?[0],
    };
    inputs.incomes(Some(income))?;
    let i = lookup(&inputs.registry, from)?;
    let j = lookup(&inputs.registry, to)?;
    if i == j {
        return Err(CliError::Domain(format!("degenerate query: `{from}` is both source and destination")));
    }
    let base = build_directed(&inputs.matrix(income)?);
    let graph = match threshold {
        Some(t) => apply_threshold(&base, t),
        None => base,
    };
    let routes = best_routes(&graph, i, j, DEFAULT_ROUTE_CAP).map_err(|e| match e {
        PathError::TooManyRoutes { count, cap } => {
            CliError::Domain(format!("{count} tied minimum routes exceed the listing cap of {cap}"))
        }
        other => CliError::Domain(other.to_string()),
    })?;
    let code = |v: usize| inputs.registry.code(v).to_string();
    let route_json: Vec<serde_json::Value> = routes
        .iter()
        .map(|r| {
            let mut v = json!({
                "path": r.path.iter().map(|&x| code(x)).collect::<Vec<_>>(),
                "total_rate": r.total_rate,
                "hop_count": r.hop_count,
                "saving": r.saving,
            });
            if config.show_sanction {
                let w = Weight(r.total_rate.units() + u64::from(r.hop_count));
                v["weight"] = json!(w.to_string());
            }
            v
        })
        .collect();
    let direct = graph.rate(i, j);
    let doc = json!({
        "from": code(i),
        "to": code(j),
        "income": income,
        "threshold": threshold,
        "status": if routes.is_empty() { "no route" } else { "ok" },
        "direct_rate": direct,
        "best_rate": routes.first().map(|r| r.total_rate),
        "saving": routes.first().and_then(|r| r.saving),
        "routes": route_json,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    match routes.first() {
        None => eprintln!("{} -> {}: no route{}", code(i), code(j), threshold.map_or(String::new(), |t| format!(" at threshold {t}"))),
        Some(r) => {
            let path: Vec<String> = r.path.iter().map(|&x| code(x)).collect();
            let direct = direct.map_or_else(|| "no direct arc".to_string(), |d| format!("direct {d}%"));
            let saving = r.saving.map_or(String::new(), |s| format!(", saving {s}%"));
            let more = if routes.len() > 1 { format!(" ({} tied routes)", routes.len()) } else { String::new() };
            eprintln!("{}: {}% vs {direct}{saving}{more}", path.join(" -> "), r.total_rate);
        }
    }
    Ok(())
}

pub fn cmd_export(config: &RunConfig, income: Option<IncomeType>, threshold: Option<Rate>) -> CliResult<()> {
    use crate::config::Format::*;
    check_format(config, &[All, Json, Graphml], "export")?;
    let inputs = Inputs::load(config)?;
    let incomes = inputs.incomes(income)?;
    let options = json!({ "income": income, "threshold": threshold });
    let mut staged = Staged::new("export", options);
    for income in incomes {
        let base = build_directed(&inputs.matrix(income)?);
        let undirected = to_undirected(&base).expect("fresh graph");
        let (directed, undirected) = match threshold {
            Some(t) => (apply_threshold(&base, t), apply_threshold_undirected(&undirected, t)),
            None => (base, undirected),
        };
        let stem = format!("graph_{income}{}", threshold_suffix(threshold));
        for (label, doc) in [
            ("directed", directed_adjacency(&directed, &inputs.registry)?),
            ("undirected", undirected_adjacency(&undirected, &inputs.registry)?),
        ] {
            if config.format.graphml() {
                staged.add(format!("{stem}_{label}.graphml"), graphml_string(&doc, &inputs.registry).into_bytes());
            }
            if config.format.json() {
                let mut buf = Vec::new();
                write_json_adjacency(&doc, &mut buf)?;
                staged.add(format!("{stem}_{label}.json"), buf);
            }
        }
    }
    for name in staged.names() {
        println!("{name}");
    }
    staged.commit(config, &inputs.records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileArg {
    Uniform,
    Planted,
    ZeroHeavy,
}

pub fn cmd_synth(config: &RunConfig, n: Option<usize>, profile: ProfileArg, blocks: usize) -> CliResult<()> {
    let (registry, records) = match (&config.registry, n) {
        (Some(_), Some(_)) => return Err(CliError::Input("give either --registry or --n, not both".into())),
        (Some(_), None) => {
            let inputs = Inputs::load(&RunConfig { dividends: None, interest: None, royalties: None, ..config.clone() })?;
            (inputs.registry, inputs.records)
        }
        (None, Some(n)) => (JurisdictionRegistry::synthetic(n), Vec::new()),
        (None, None) => (JurisdictionRegistry::builtin(), Vec::new()),
    };
    let profile_core = match profile {
        ProfileArg::Uniform => SyntheticProfile::Uniform,
        ProfileArg::Planted => SyntheticProfile::PlantedCommunities { blocks },
        ProfileArg::ZeroHeavy => SyntheticProfile::ZeroHeavy,
    };
    let options = json!({ "n": registry.len(), "profile": profile, "blocks": blocks });
    let mut staged = Staged::new("synth", options);
    let mut buf = Vec::new();
    registry.write_csv(&mut buf).map_err(|e| CliError::Input(e.to_string()))?;
    staged.add("registry.csv".into(), buf);
    for (k, income) in IncomeType::ALL.into_iter().enumerate() {
        let seed = config.seed.wrapping_add(k as u64);
        let m = generate_synthetic(registry.len(), seed, profile_core)
            .map_err(|e| CliError::Domain(e.to_string()))?
            .with_income(income);
        let mut buf = Vec::new();
        m.write_csv(&registry, &mut buf).map_err(|e| CliError::Input(e.to_string()))?;
        staged.add(format!("matrix_{income}.csv"), buf);
    }
    for name in staged.names() {
        println!("{name}");
    }
    staged.commit(config, &records)
}
