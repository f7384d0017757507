use super::config::{Kind, Model, RunConfig};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{config, Result};
use crate::harness::{
    equilibrium_experiment, property_suite, simulate_experiment, skt_suite, uniqueness_smoke, weak_strong_experiment,
    ExperimentOutput,
};
use crate::solver::Trajectory;

/// Runs one experiment kind; the report carries the effective config.
pub fn run_experiment(kind: Kind, cfg: &RunConfig) -> Result<(DiagnosticsReport, Option<Trajectory>)> {
    if let Some(k) = cfg.experiment.kind {
        if k != kind {
            return Err(config(
                "experiment.kind",
                format!("config asks for {} but the command is {}", k.name(), kind.name()),
            ));
        }
    }
    let model = cfg.model.build()?;
    let ecfg = cfg.experiment_config();
    let (mut report, traj) = match (kind, &model) {
        (Kind::Check, Model::Erds(s)) => (property_suite(s, &cfg.suite_config())?, None),
        (Kind::Check, Model::Skt(_)) => {
            let params = cfg.model.mobility.skt.as_ref().expect("built above");
            (skt_suite(params, &cfg.suite_config())?, None)
        }
        (Kind::Equilibrium, Model::Erds(s)) => split(equilibrium_experiment(s, &ecfg)?),
        (Kind::Equilibrium, Model::Skt(_)) => {
            return Err(config("model.mobility.variant", "the equilibrium experiment needs M0"));
        }
        (Kind::Simulate, Model::Erds(s)) => split(simulate_experiment(s, &ecfg)?),
        (Kind::Simulate, Model::Skt(s)) => split(simulate_experiment(s, &ecfg)?),
        (Kind::Stability, Model::Erds(s)) => split(weak_strong_experiment(s, &ecfg)?),
        (Kind::Stability, Model::Skt(s)) => split(weak_strong_experiment(s, &ecfg)?),
        (Kind::Uniqueness, Model::Erds(s)) => split(uniqueness_smoke(s, &ecfg, cfg.experiment.levels)?),
        (Kind::Uniqueness, Model::Skt(s)) => split(uniqueness_smoke(s, &ecfg, cfg.experiment.levels)?),
    };
    report.config = Some(cfg.echo());
    Ok((report, traj))
}

fn split(out: ExperimentOutput) -> (DiagnosticsReport, Option<Trajectory>) {
    (out.report, Some(out.trajectory))
}
