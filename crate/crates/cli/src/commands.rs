use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use logit_stability::dynamics::{
    log_stationary_distribution, log_transition_matrix, numeric_stable_estimate, simulate_from,
    stationary_distribution, transition_matrix, DynamicsConfig, EstimateOptions,
};
use logit_stability::game::state_cap;
use logit_stability::metrics::{self, classify_states, metric_report_with, parallel_links_report, table1_check};
use logit_stability::rational;
use logit_stability::revision::RevisionProcess;
use logit_stability::stability::{potentials_from_graph, radius_coradius_check_graph, WasteGraph};
use logit_stability::zoo::{self, GameSpec, LoadBalancingSpec, ParallelLinksSpec};
use logit_stability::{Error, Game, Rational, StateId};
use serde_json::{json, Value};

use crate::{
    AnalyzeArgs, Builtin, BuiltinParams, Format, GameSource, InstanceArgs, ReportCommand, RevisionArgs, RevisionKind,
    SimulateArgs, VerifyArgs,
};

/// The numeric estimate and the exact stable set disagree.
#[derive(Debug)]
pub struct Disagreement;

impl std::fmt::Display for Disagreement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("numeric estimate disagrees with the exact stable set")
    }
}

impl std::error::Error for Disagreement {}

fn rationals(field: &str, text: &str) -> Result<Vec<Rational>, Error> {
    text.split(',')
        .map(|t| rational::parse(t.trim()).map_err(|e| Error::InvalidParams(format!("--{field}: {e}"))))
        .collect()
}

fn floats(field: &str, text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::InvalidParams(format!("--{field}: `{}`: {e}", t.trim()))))
        .collect()
}

fn builtin_spec(name: Builtin, p: &BuiltinParams) -> Result<GameSpec, Error> {
    let lb = |spec: LoadBalancingSpec| GameSpec::LoadBalancing { machines: spec.machines, jobs: spec.job_weights };
    Ok(match name {
        Builtin::Triangle => GameSpec::from_network(&zoo::triangle_spec()),
        Builtin::LbUnit => lb(zoo::lb_unit_spec(p.m, p.l)?),
        Builtin::LbPos => lb(zoo::lb_pos_spec(p.m, p.l)?),
        Builtin::LbCustom => {
            let jobs = p.jobs.as_deref().ok_or_else(|| Error::InvalidParams("lb-custom needs --jobs".into()))?;
            lb(LoadBalancingSpec::new(p.m, rationals("jobs", jobs)?)?)
        }
        Builtin::Parallel => {
            let spec = ParallelLinksSpec::new(rationals("costs", &p.costs)?, p.players)?;
            GameSpec::ParallelLinks { costs: spec.link_costs, players: spec.n_players }
        }
    })
}

fn load_game(source: &GameSource) -> Result<Game> {
    let cap = state_cap();
    let game = match (&source.builtin, &source.file) {
        (_, Some(path)) => zoo::load_game_from_file(path, cap)?,
        (Some(name), None) => builtin_spec(*name, &source.params)?.build(cap)?,
        (None, None) => return Err(Error::InvalidParams("give --builtin or --file".into()).into()),
    };
    Ok(game)
}

impl RevisionArgs {
    fn independent(&self) -> Result<RevisionProcess, Error> {
        RevisionProcess::independent(rational::parse(&self.p).map_err(|e| Error::InvalidParams(format!("--p: {e}")))?)
    }

    fn process(&self) -> Result<RevisionProcess, Error> {
        match self.revision {
            RevisionKind::Independent => self.independent(),
            RevisionKind::Async => Ok(RevisionProcess::Asynchronous),
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&PathBuf>, value: &Value) -> Result<()> {
    let mut out = open_output(path.map(PathBuf::as_path))?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn revision_json(revision: &RevisionProcess) -> Value {
    match revision {
        RevisionProcess::Independent { p } => json!({"kind": "independent", "p": rational::format(p)}),
        other => json!({"kind": other.kind()}),
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let revision = args.revision.process()?;
    let report = metric_report_with(&game, &args.revision.independent()?)?;
    report.check_invariants()?;
    let records = classify_states(&game, &report);
    if let Some(path) = &args.states_csv {
        let out = open_output(Some(path))?;
        metrics::write_states_csv(&records, out)?;
    }
    if args.format == Format::Csv {
        let out = open_output(args.output.as_deref())?;
        return Ok(metrics::write_states_csv(&records, out)?);
    }

    let graph = WasteGraph::build(&game, &revision)?;
    let mut table = potentials_from_graph(&graph, revision.kind())?;
    let mut checks = Vec::new();
    for &s in &report.strict_nash {
        let (check, basin) = radius_coradius_check_graph(&graph, &table, s)?;
        checks.push(json!({
            "state": s,
            "profile": game.describe(s),
            "radius": basin.radius,
            "coradius": basin.coradius,
            "check": check,
        }));
    }
    table.witnesses.clear();
    let value = json!({
        "game": game.spec(),
        "revision": revision_json(&revision),
        "metrics": report,
        "stochastic_potential": table,
        "radius_coradius": checks,
    });
    write_json(args.output.as_ref(), &value)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let config = DynamicsConfig::new(args.beta, args.revision.process()?)?;
    if args.start >= game.n_states() {
        return Err(Error::InvalidParams(format!(
            "--start {} is not a state id (the game has {} states)",
            args.start,
            game.n_states()
        ))
        .into());
    }
    let run = simulate_from(&game, &config, args.start, args.steps, args.seed)?;
    let out = open_output(args.output.as_deref())?;
    run.write_csv(out)?;

    let mut summary = json!({
        "steps": run.steps,
        "seed": run.seed,
        "final_state": run.final_state,
        "transitions": run.transitions,
    });
    if let Ok(mu) = transition_matrix(&game, &config).and_then(|p| stationary_distribution(&p)) {
        summary["total_variation"] = json!(run.total_variation(&mu.probabilities));
    }
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn ladder(args: &crate::LadderArgs) -> Result<EstimateOptions, Error> {
    let options =
        EstimateOptions { betas: floats("betas", &args.betas)?, slope_tol: args.slope_tol, window: args.fit_window };
    options.validate()?;
    Ok(options)
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let revision = args.revision.process()?;
    let options = ladder(&args.ladder)?;
    let exact = potentials_from_graph(&WasteGraph::build(&game, &revision)?, revision.kind())?;
    let estimate = numeric_stable_estimate(&game, &revision, &options)?;
    let agree = estimate.persisting == exact.argmin;
    let disputed: BTreeSet<StateId> = estimate.persisting.symmetric_difference(&exact.argmin).copied().collect();
    let value = json!({
        "revision": revision_json(&revision),
        "betas": options.betas,
        "exact_stable": exact.argmin,
        "estimated_stable": estimate.persisting,
        "slopes": estimate.slopes,
        "max_residual": estimate.max_residual,
        "disputed": disputed,
        "agree": agree,
    });
    write_json(args.output.as_ref(), &value)?;
    if agree {
        Ok(())
    } else {
        Err(Disagreement.into())
    }
}

pub fn instance(args: &InstanceArgs) -> Result<()> {
    let spec = builtin_spec(args.name, &args.params)?;
    // Build once so that invalid parameters fail here rather than on load.
    spec.build(state_cap())?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{}", spec.to_json_pretty())?;
    out.flush()?;
    Ok(())
}

pub fn report(cmd: &ReportCommand) -> Result<()> {
    match cmd {
        ReportCommand::Table1 { m, l, format, output } => {
            let ls: Vec<usize> = l
                .split(',')
                .map(|t| t.trim().parse().map_err(|e| Error::InvalidParams(format!("--l: `{t}`: {e}"))))
                .collect::<Result<_, _>>()?;
            let rows = ls.iter().map(|&l| table1_check(*m, l)).collect::<Result<Vec<_>, _>>()?;
            match format {
                Format::Json => write_json(output.as_ref(), &serde_json::to_value(&rows)?),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(open_output(output.as_deref())?);
                    w.write_record([
                        "m",
                        "l",
                        "unit_ind_logit_poa",
                        "unit_expected",
                        "pos_ind_logit_pos",
                        "pos_apx_ratio",
                        "pos_limit",
                        "pos_apx_uniquely_stable",
                        "classical_poa",
                    ])?;
                    for r in &rows {
                        w.write_record([
                            r.m.to_string(),
                            r.l.to_string(),
                            r.unit_ind_logit_poa.computed.clone(),
                            r.unit_ind_logit_poa.expected.clone(),
                            r.pos_ind_logit_pos.computed.clone(),
                            r.pos_ind_logit_pos.expected.clone(),
                            r.pos_limit.clone(),
                            r.pos_apx_uniquely_stable.to_string(),
                            r.classical_poa.computed.clone(),
                        ])?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
        ReportCommand::Curve { game, revision, betas, output } => {
            let game = load_game(game)?;
            let revision = revision.process()?;
            let betas = floats("betas", betas)?;
            let mut w = csv::Writer::from_writer(open_output(output.as_deref())?);
            w.write_record(["beta", "state_id", "log_mu"])?;
            for beta in betas {
                let config = DynamicsConfig::new(beta, revision.clone())?;
                let (log_mu, _) = log_stationary_distribution(&log_transition_matrix(&game, &config)?)
                    .with_context(|| format!("stationary solve at β = {beta}"))?;
                for (s, v) in log_mu.iter().enumerate() {
                    w.write_record([beta.to_string(), s.to_string(), v.to_string()])?;
                }
            }
            w.flush()?;
            Ok(())
        }
        ReportCommand::Parallel { costs, players, revision, output } => {
            let spec = ParallelLinksSpec::new(rationals("costs", costs)?, *players)?;
            let report = parallel_links_report(&spec, &revision.process()?)?;
            write_json(output.as_ref(), &serde_json::to_value(&report)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BuiltinParams {
        BuiltinParams { m: 2, l: 2, costs: "1,2".into(), players: 3, jobs: None }
    }

    #[test]
    fn lists_parse_or_report_the_flag() {
        assert_eq!(rationals("costs", "1, 3/2").unwrap(), vec![rational::int(1), rational::ratio(3, 2)]);
        assert!(rationals("costs", "1,x").unwrap_err().to_string().contains("--costs"));
        assert_eq!(floats("betas", "4,8.5").unwrap(), vec![4.0, 8.5]);
        assert!(floats("betas", "4,,8").is_err());
    }

    #[test]
    fn builtins_build_the_expected_specs() {
        let GameSpec::LoadBalancing { machines, jobs } = builtin_spec(Builtin::LbUnit, &params()).unwrap() else {
            panic!("load balancing expected");
        };
        assert_eq!((machines, jobs.len()), (2, 3));
        assert!(matches!(
            builtin_spec(Builtin::Parallel, &params()).unwrap(),
            GameSpec::ParallelLinks { players: 3, .. }
        ));
        assert!(builtin_spec(Builtin::LbCustom, &params()).is_err());
        let custom = BuiltinParams { jobs: Some("2,1".into()), ..params() };
        assert!(builtin_spec(Builtin::LbCustom, &custom).is_ok());
    }

    #[test]
    fn revision_flags() {
        let args = RevisionArgs { revision: RevisionKind::Async, p: "1/3".into() };
        assert_eq!(args.process().unwrap(), RevisionProcess::Asynchronous);
        assert_eq!(args.independent().unwrap(), RevisionProcess::independent(rational::ratio(1, 3)).unwrap());
        let bad = RevisionArgs { revision: RevisionKind::Independent, p: "1".into() };
        assert!(bad.process().is_err());
    }
}
