use serde::Serialize;

use super::{Attachment, Check, Criterion, DemoOutput, RunSettings};
use crate::dynamics::{random_markovian_scenario, run_disd, run_markovian_classicality, DisdRun, DisdScenario, TimeGrid, TimeSeries};
use crate::error::Result;
use crate::scenario_file::{Scenario, ScenarioFile};

fn regrid(grid: &TimeGrid, points: Option<usize>) -> Result<TimeGrid> {
    match points {
        Some(n) => TimeGrid::linspace(grid.start(), grid.stop(), n),
        None => Ok(grid.clone()),
    }
}

fn max_discord(ts: &TimeSeries) -> Result<f64> {
    Ok(ts.max_of("D_left")?.max(ts.max_of("D_right")?))
}

fn series_attachments(stem: &str, ts: &TimeSeries, columns: &[&str]) -> Result<Vec<Attachment>> {
    let mut out = vec![Attachment::new(format!("{stem}.csv"), ts.to_csv()?)];
    for col in columns {
        out.push(Attachment::new(format!("{stem}_{col}.dat"), ts.to_gnuplot(col)?));
    }
    Ok(out)
}

/// `count` random qubit scenarios, each checked for zero two-way discord
/// and vanishing laziness commutators at every sampled time.
pub fn markovian_demo(count: usize, settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    let mut checks = Vec::with_capacity(3 * count);
    let mut attachments = Vec::new();
    for k in 0..count {
        let mut scn = random_markovian_scenario(settings.stream(100 + k as u64))?;
        scn.grid = regrid(&scn.grid, settings.time_points)?;
        let ts = run_markovian_classicality(&scn, &cfg)?;
        checks.push(Check::new(format!("max D [scenario {k}]"), max_discord(&ts)?, Criterion::Below { threshold: tol.zero_discord }).nats());
        checks.push(Check::new(format!("max lazy_left [scenario {k}]"), ts.max_of("lazy_left")?, Criterion::Below { threshold: tol.commutator }));
        checks.push(Check::new(format!("max lazy_right [scenario {k}]"), ts.max_of("lazy_right")?, Criterion::Below { threshold: tol.commutator }));
        let columns: &[&str] = if k == 0 { &["S_S", "S_Sp", "D_left", "D_right"] } else { &[] };
        attachments.extend(series_attachments(&format!("markovian_{k:02}"), &ts, columns)?);
    }
    Ok(settings.finish("markovian-classicality", checks, attachments))
}

#[derive(Debug, Clone, Serialize)]
pub struct DisdSummary {
    pub c: f64,
    pub epsilon: f64,
    pub max_mutual_info: f64,
    pub max_subsystem_entropy: f64,
    pub max_bound_excess: f64,
    pub max_correlation: f64,
    pub robustness_residual: f64,
}

impl DisdSummary {
    fn of(c: f64, run: &DisdRun) -> Self {
        Self {
            c,
            epsilon: run.epsilon,
            max_mutual_info: run.max_mutual_info(),
            max_subsystem_entropy: run.max_subsystem_entropy(),
            max_bound_excess: run.max_bound_excess(),
            max_correlation: run.max_correlation(),
            robustness_residual: run.robustness.residual,
        }
    }
}

fn disd_attachments(stem: &str, run: &DisdRun) -> Result<Vec<Attachment>> {
    let mut out = series_attachments(stem, &run.series, &["I", "S_S", "S_Sp", "S_E"])?;
    out.push(Attachment::new(format!("{stem}_extras.csv"), run.extras_csv()?));
    Ok(out)
}

/// Default qubit model at c = 0.01, 0.005 and 0 with C = 1.
pub fn disd_demo(settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    let mut runs = Vec::new();
    for c in [0.01, 0.005, 0.0] {
        let mut scn = DisdScenario::default_qubits(c)?;
        scn.grid = regrid(&scn.grid, settings.time_points)?;
        runs.push((c, run_disd(&scn, &cfg)?));
    }
    let summaries: Vec<DisdSummary> = runs.iter().map(|(c, r)| DisdSummary::of(*c, r)).collect();
    let ratio = summaries[0].max_mutual_info / summaries[1].max_mutual_info;
    let residual = summaries.iter().map(|s| s.robustness_residual).fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "max I(S:S') ratio c=0.01 / c=0.005",
            ratio,
            Criterion::Within { lo: tol.disd_ratio_min, hi: tol.disd_ratio_max },
        ),
        Check::new("robustness residual", residual, Criterion::Below { threshold: tol.robustness }),
        Check::new("max correlation measure [c=0]", summaries[2].max_correlation, Criterion::Below { threshold: tol.disd_zero }).nats(),
        Check::new("subsystem entropy - kappa*eps [c=0.01]", summaries[0].max_bound_excess, Criterion::AtMost { threshold: tol.bound_slack }).nats(),
        Check::new("subsystem entropy - kappa*eps [c=0.005]", summaries[1].max_bound_excess, Criterion::AtMost { threshold: tol.bound_slack }).nats(),
    ];
    let mut attachments = Vec::new();
    for (c, run) in &runs {
        attachments.extend(disd_attachments(&format!("disd_c{c}"), run)?);
    }
    let summary = serde_json::to_string_pretty(&summaries).expect("summaries serialize") + "\n";
    attachments.push(Attachment::new("disd_summary.json", summary));
    Ok(settings.finish("disd", checks, attachments))
}

/// Runs a parsed scenario document with the same checks as the matching demo.
pub fn run_scenario_file(file: &ScenarioFile, settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    match &file.scenario {
        Scenario::Markovian(scn) => {
            let mut scn = scn.clone();
            scn.grid = regrid(&scn.grid, settings.time_points)?;
            let ts = run_markovian_classicality(&scn, &cfg)?;
            let checks = vec![
                Check::new("max D", max_discord(&ts)?, Criterion::Below { threshold: tol.zero_discord }).nats(),
                Check::new("max lazy_left", ts.max_of("lazy_left")?, Criterion::Below { threshold: tol.commutator }),
                Check::new("max lazy_right", ts.max_of("lazy_right")?, Criterion::Below { threshold: tol.commutator }),
            ];
            let attachments = series_attachments("series", &ts, &["S_S", "S_Sp", "D_left", "D_right"])?;
            Ok(settings.finish(file.model(), checks, attachments))
        }
        Scenario::Disd(scn) => {
            let mut scn = scn.clone();
            scn.grid = regrid(&scn.grid, settings.time_points)?;
            let run = run_disd(&scn, &cfg)?;
            let summary = DisdSummary::of(scn.c, &run);
            let mut checks = vec![
                Check::new("robustness residual", summary.robustness_residual, Criterion::Below { threshold: tol.robustness }),
                Check::new("subsystem entropy - kappa*eps", summary.max_bound_excess, Criterion::AtMost { threshold: tol.bound_slack }).nats(),
            ];
            if scn.c == 0.0 {
                checks.push(Check::new("max correlation measure [c=0]", summary.max_correlation, Criterion::Below { threshold: tol.disd_zero }).nats());
            }
            let mut attachments = disd_attachments("series", &run)?;
            attachments.push(Attachment::new("summary.json", serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"));
            Ok(settings.finish(file.model(), checks, attachments))
        }
    }
}
