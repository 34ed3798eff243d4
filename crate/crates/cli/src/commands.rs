use std::io::Write;

use eqtest::alarm::{generate_alarms, score};
use eqtest::catalog::write_csv;
use eqtest::decluster::{decluster_stats, decluster_with, HoleMode, WindowTable};
use eqtest::geo::Region;
use eqtest::nullmodels::{
    gen_gamma_renewal, gen_heterogeneous_poisson, gen_homogeneous_poisson, historical_cell_rates,
    permute_times, randomize_times_uniform, CellGrid, LocationModel,
};
use eqtest::rng::replicate_rng;
use eqtest::sigtests::{permutation_test, AlarmHandling, PredictionParams, TestReport};
use eqtest::{
    AlarmConfig, AlarmSet, Catalog, Instant, PredictorMode, ScoreSummary, StudyVolume, TimeWindow,
};
use serde_json::{json, Map, Value};

use crate::report::{
    catalog_info, load_catalog, load_input, open_out, render_json, study_window, within_span,
    write_json, CliError, CliResult, RunConfig,
};
use crate::{
    AlarmsArg, DeclusterArgs, EvalArgs, HolesArg, IngestArgs, LocationsArg, ModelArg, PredictArgs,
    PredictorArg, SimulateArgs, Table1Args, TestArgs, WindowArgs,
};

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

fn mode(p: PredictorArg) -> PredictorMode {
    match p {
        PredictorArg::I => PredictorMode::PredictorI,
        PredictorArg::Ii => PredictorMode::PredictorII,
    }
}

fn params(p: &PredictArgs) -> CliResult<PredictionParams> {
    AlarmConfig::new(p.mag_threshold, p.window_days, p.radius_km)?;
    Ok(PredictionParams::new(
        p.mag_threshold,
        p.window_days,
        p.radius_km,
        mode(p.predictor),
    ))
}

pub fn ingest(a: IngestArgs) -> CliResult {
    let c = load_input(&a.input)?;
    let mut out = open_out(a.output.out.as_ref())?;
    write_csv(&c, &mut out)?;
    out.flush()?;
    eprintln!(
        "ingest: {} events, span {} .. {}, {} records read, {} skipped",
        c.len(),
        c.span().window.start,
        c.span().window.end,
        c.provenance().records_read,
        c.provenance().records_skipped
    );
    Ok(())
}

/// Targets above the threshold inside `window`, their alarms, and the score.
pub fn evaluate(
    catalog: &Catalog,
    window: TimeWindow,
    p: &PredictionParams,
) -> CliResult<(Catalog, AlarmSet, ScoreSummary)> {
    let targets = catalog.filter(p.mag_threshold, window)?;
    let alarms = generate_alarms(&targets, p.alarm_config(), p.mode)?;
    let summary = score(&targets, &alarms, targets.span());
    Ok((targets, alarms, summary))
}

pub fn eval(a: EvalArgs) -> CliResult {
    let p = params(&a.predict)?;
    let c = load_input(&a.input)?;
    let (c, window) = study_window(&a.window, &c)?;
    let (targets, alarms, summary) = evaluate(&c, window, &p)?;
    if targets.is_empty() {
        eprintln!(
            "eval: warning: no events with magnitude >= {} in the study window",
            p.mag_threshold
        );
    }
    if let Some(path) = &a.alarms_out {
        let mut out = open_out(Some(path))?;
        alarms.write_csv(&mut out)?;
        out.flush()?;
    }
    let config = RunConfig::new("eval", &a.output)
        .input(&a.input)
        .predict(&a.predict)
        .window(&a.window)
        .with(
            "alarms_out",
            a.alarms_out.as_ref().map(|p| p.display().to_string()),
        );
    let mut body = Map::new();
    body.insert("catalog".into(), catalog_info(&c));
    body.insert(
        "study_window".into(),
        json!({ "start": window.start, "end": window.end }),
    );
    body.insert(
        "summary".into(),
        serde_json::to_value(summary).expect("serializable"),
    );
    write_json(&a.output, &config, body)?;
    eprintln!(
        "eval: Q={} A={} S={} P={} v_upper={:.3e}",
        summary.n_events,
        summary.n_alarms,
        summary.n_successful_alarms,
        summary.n_predicted,
        summary.v_upper
    );
    Ok(())
}

pub fn run_test(
    catalog: &Catalog,
    window: TimeWindow,
    p: PredictionParams,
    reps: u64,
    seed: u64,
) -> CliResult<TestReport> {
    let targets = catalog.filter(p.mag_threshold, window)?;
    Ok(permutation_test(&targets, p, reps as usize, seed)?)
}

pub fn test(a: TestArgs) -> CliResult {
    let handling = match a.alarms {
        AlarmsArg::Fixed => AlarmHandling::Fixed,
        AlarmsArg::Regenerate => AlarmHandling::Regenerate,
    };
    let p = params(&a.predict)?.with_alarms(handling);
    let c = load_input(&a.input)?;
    let (c, window) = study_window(&a.window, &c)?;
    let report = run_test(&c, window, p, a.reps, a.seed)?;
    let mut config = RunConfig::new("test", &a.output)
        .input(&a.input)
        .predict(&a.predict)
        .window(&a.window);
    config.n_reps = Some(a.reps);
    config.seed = Some(a.seed);
    let config = config.with("alarms", handling);
    let mut body = Map::new();
    body.insert("catalog".into(), catalog_info(&c));
    body.insert(
        "study_window".into(),
        json!({ "start": window.start, "end": window.end }),
    );
    body.insert("p_display".into(), Value::String(report.p_display()));
    body.insert(
        "report".into(),
        serde_json::to_value(&report).expect("serializable"),
    );
    write_json(&a.output, &config, body)?;
    eprintln!(
        "test: observed {} of {} targets, max sim {}, p {}",
        report.observed,
        report.config.n_targets,
        report.max_sim,
        report.p_display()
    );
    Ok(())
}

/// One row of the table: study years and threshold.
pub struct Table1Spec {
    pub label: &'static str,
    pub from_year: i32,
    pub m_tau: f64,
}

pub const TABLE1_ROWS: [Table1Spec; 4] = [
    Table1Spec {
        label: "2004",
        from_year: 2004,
        m_tau: 5.5,
    },
    Table1Spec {
        label: "2004",
        from_year: 2004,
        m_tau: 5.8,
    },
    Table1Spec {
        label: "2000-2004",
        from_year: 2000,
        m_tau: 5.5,
    },
    Table1Spec {
        label: "2000-2004",
        from_year: 2000,
        m_tau: 5.8,
    },
];

pub fn table1(a: Table1Args) -> CliResult {
    let c = load_input(&a.input)?;
    let needed = TimeWindow::new(
        Instant::from_ymd(2000, 1, 1)?,
        Instant::from_ymd(2005, 1, 1)?,
    )?;
    let (c, _) = within_span(&c, needed)?;
    let mut out = open_out(a.output.out.as_ref())?;
    writeln!(out, "years,m_tau,events,succ,succ_wo,max_sim,p_est,v")?;
    for row in &TABLE1_ROWS {
        let window = TimeWindow::new(Instant::from_ymd(row.from_year, 1, 1)?, needed.end)?;
        let p1 = PredictionParams::new(row.m_tau, 21.0, 50.0, PredictorMode::PredictorI);
        let p2 = PredictionParams::new(row.m_tau, 21.0, 50.0, PredictorMode::PredictorII);
        let (_, _, s1) = evaluate(&c, window, &p1)?;
        let (_, _, s2) = evaluate(&c, window, &p2)?;
        let report = run_test(&c, window, p2, a.reps, a.seed)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.1e}",
            row.label,
            row.m_tau,
            s1.n_events,
            s1.n_predicted,
            s2.n_predicted,
            report.max_sim,
            report.p_display(),
            s1.v_upper
        )?;
        eprintln!(
            "table1: {} M>={} events {} succ {} succ w/o {} max sim {} p {}",
            row.label,
            row.m_tau,
            s1.n_events,
            s1.n_predicted,
            s2.n_predicted,
            report.max_sim,
            report.p_display()
        );
    }
    out.flush()?;
    Ok(())
}

pub fn decluster(a: DeclusterArgs) -> CliResult {
    let bytes = std::fs::read(&a.windows)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.windows.display())))?;
    let table = WindowTable::from_csv(&bytes)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.windows.display())))?;
    let c = load_input(&a.input)?;
    let mode = match a.holes {
        HolesArg::All => HoleMode::AllEvents,
        HolesArg::Retained => HoleMode::RetainedOnly,
    };
    let outcome = decluster_with(&c, &table, mode);
    let (n_deleted, fraction) = decluster_stats(&c, &outcome.catalog)?;

    let mut out = open_out(a.output.out.as_ref())?;
    write_csv(&outcome.catalog, &mut out)?;
    out.flush()?;

    let config = RunConfig::new("decluster", &a.output)
        .input(&a.input)
        .with("windows", a.windows.display().to_string())
        .with("holes", mode)
        .with(
            "stats_out",
            a.stats_out.as_ref().map(|p| p.display().to_string()),
        );
    let mut body = Map::new();
    body.insert(
        "window_table".into(),
        serde_json::to_value(table.rows()).expect("serializable"),
    );
    body.insert("n_events".into(), json!(c.len()));
    body.insert("n_deleted".into(), json!(n_deleted));
    body.insert("fraction_deleted".into(), json!(fraction));
    body.insert("deleted_indices".into(), json!(outcome.deleted));
    let text = render_json(&a.output, &config, body);
    match &a.stats_out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => eprint!("{text}"),
    }
    Ok(())
}

fn explicit_window(w: &WindowArgs) -> CliResult<TimeWindow> {
    let parse = |s: &Option<String>, which: &str| -> CliResult<Instant> {
        let s = s
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("--{which} is required without --marks")))?;
        Instant::parse_iso(s).map_err(|e| CliError::Usage(e.to_string()))
    };
    Ok(TimeWindow::new(
        parse(&w.from, "from")?,
        parse(&w.to, "to")?,
    )?)
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let mut rng = replicate_rng(a.seed, a.stream);
    let mut out = open_out(a.output.out.as_ref())?;
    let n = match (a.model, &a.marks) {
        (ModelArg::Gamma, None) => {
            let window = explicit_window(&a.window)?;
            let times = gen_gamma_renewal(a.shape, a.mean_days * 86_400.0, window, &mut rng)?;
            writeln!(out, "time")?;
            for t in &times {
                writeln!(out, "{t}")?;
            }
            times.len()
        }
        (ModelArg::Gamma, Some(_)) => {
            return Err(CliError::Usage(
                "gamma draws times only and takes no --marks".into(),
            ))
        }
        (_, None) => return Err(CliError::Usage("this model needs --marks".into())),
        (model, Some(path)) => {
            let m = load_catalog(path, a.format, a.magnitude)?;
            let (m, window) = study_window(&a.window, &m)?;
            let m = if window == m.span().window {
                m
            } else {
                m.filter(f64::MIN, window)?
            };
            let sim = match model {
                ModelArg::Permute => permute_times(&m, &mut rng),
                ModelArg::Uniform => randomize_times_uniform(&m, &mut rng),
                ModelArg::Poisson => {
                    let sv = StudyVolume::new(Region::GlobalSphere, window);
                    let rate = match a.rate_per_year {
                        Some(r) => r / SECONDS_PER_YEAR,
                        None => m.len() as f64 / sv.duration_s(),
                    };
                    let locations = match a.locations {
                        LocationsArg::Resample => LocationModel::Resample,
                        LocationsArg::Uniform => LocationModel::Uniform,
                    };
                    gen_homogeneous_poisson(rate, &sv, &m, locations, &mut rng)?
                }
                ModelArg::Hetero => {
                    let cells = CellGrid::regular_cells(&Region::GlobalSphere, a.cell_deg)?;
                    let grid = historical_cell_rates(&m, cells)?;
                    gen_heterogeneous_poisson(&grid, window, &m, &mut rng)?
                }
                ModelArg::Gamma => unreachable!("handled above"),
            };
            write_csv(&sim, &mut out)?;
            sim.len()
        }
    };
    out.flush()?;
    eprintln!("simulate: {n} events, seed {} stream {}", a.seed, a.stream);
    Ok(())
}
