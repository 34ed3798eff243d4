use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use eqtest::catalog::{self, CatalogFormat};
use eqtest::time::MS_PER_DAY;
use eqtest::{Catalog, Instant, MagnitudeSelector, StudyVolume, TimeWindow};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::{
    FormatArg, InputArgs, MagnitudeArg, OutputArgs, PredictArgs, PredictorArg, WindowArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable files, inconsistent configuration.
    Usage(String),
    /// Input data that does not parse.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<eqtest::Error> for CliError {
    fn from(e: eqtest::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Every option of the run, echoed into each report.
#[derive(Serialize, Debug, Default)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub format: Option<&'static str>,
    pub magnitude: Option<&'static str>,
    pub mag_threshold: Option<f64>,
    pub window_days: Option<f64>,
    pub radius_km: Option<f64>,
    pub predictor: Option<&'static str>,
    pub n_reps: Option<u64>,
    pub seed: Option<u64>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub out: Option<String>,
    pub deterministic: bool,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl RunConfig {
    pub fn new(subcommand: &'static str, output: &OutputArgs) -> Self {
        RunConfig {
            subcommand,
            out: output.out.as_ref().map(|p| p.display().to_string()),
            deterministic: output.deterministic,
            ..Default::default()
        }
    }

    pub fn input(mut self, input: &InputArgs) -> Self {
        self.inputs.push(input.input.display().to_string());
        self.format = input.format.map(format_name);
        self.magnitude = Some(magnitude_name(input.magnitude));
        self
    }

    pub fn predict(mut self, p: &PredictArgs) -> Self {
        self.mag_threshold = Some(p.mag_threshold);
        self.window_days = Some(p.window_days);
        self.radius_km = Some(p.radius_km);
        self.predictor = Some(match p.predictor {
            PredictorArg::I => "i",
            PredictorArg::Ii => "ii",
        });
        self
    }

    pub fn window(mut self, w: &WindowArgs) -> Self {
        self.from = w.from.clone();
        self.to = w.to.clone();
        self
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable"),
        );
        self
    }
}

pub fn format_name(f: FormatArg) -> &'static str {
    match f {
        FormatArg::Csv => "csv",
        FormatArg::Ndk => "ndk",
    }
}

pub fn magnitude_name(m: MagnitudeArg) -> &'static str {
    match m {
        MagnitudeArg::Mb => "mb",
        MagnitudeArg::Ms => "ms",
        MagnitudeArg::MbMs => "mb-ms",
    }
}

pub fn selector(m: MagnitudeArg) -> MagnitudeSelector {
    match m {
        MagnitudeArg::Mb => MagnitudeSelector::Mb,
        MagnitudeArg::Ms => MagnitudeSelector::Ms,
        MagnitudeArg::MbMs => MagnitudeSelector::MbThenMs,
    }
}

pub fn load_catalog(
    path: &Path,
    format: Option<FormatArg>,
    magnitude: MagnitudeArg,
) -> CliResult<Catalog> {
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{}: no such file or directory",
            path.display()
        )));
    }
    let format = format.map(|f| match f {
        FormatArg::Csv => CatalogFormat::Csv,
        FormatArg::Ndk => CatalogFormat::Ndk,
    });
    let c = catalog::load(path, format).map_err(|e| CliError::from(e).prefixed(path))?;
    Ok(c.with_selector(selector(magnitude)))
}

impl CliError {
    fn prefixed(self, path: &Path) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        }
    }
}

pub fn load_input(input: &InputArgs) -> CliResult<Catalog> {
    load_catalog(&input.input, input.format, input.magnitude)
}

/// How far `--from`/`--to` may reach past the span inferred from the events.
/// Inferred spans end with the last event's day, so a five-year catalog whose
/// last event is on 30 December would otherwise not cover the fifth year.
pub const SPAN_SLACK_DAYS: i64 = 7;

/// Resolves `[--from, --to)` against the catalog, defaulting each end to the
/// span. A requested window reaching at most [`SPAN_SLACK_DAYS`] past the
/// span widens it; anything further is an error.
pub fn study_window(w: &WindowArgs, catalog: &Catalog) -> CliResult<(Catalog, TimeWindow)> {
    let parse = |s: &Option<String>| -> CliResult<Option<Instant>> {
        s.as_deref()
            .map(|s| Instant::parse_iso(s).map_err(|e| CliError::Usage(e.to_string())))
            .transpose()
    };
    let span = catalog.span().window;
    let from = parse(&w.from)?.unwrap_or(span.start);
    let to = parse(&w.to)?.unwrap_or(span.end);
    let window = TimeWindow::new(from, to)?;
    within_span(catalog, window)
}

pub fn within_span(catalog: &Catalog, window: TimeWindow) -> CliResult<(Catalog, TimeWindow)> {
    let span = catalog.span().window;
    let slack = SPAN_SLACK_DAYS * MS_PER_DAY;
    if window.start.millis() < span.start.millis() - slack
        || window.end.millis() > span.end.millis() + slack
    {
        return Err(CliError::Usage(format!(
            "catalog span {} .. {} does not cover {} .. {}",
            span.start, span.end, window.start, window.end
        )));
    }
    if span.contains_window(&window) {
        return Ok((catalog.clone(), window));
    }
    let widened = TimeWindow::new(span.start.min(window.start), span.end.max(window.end))?;
    let sv = StudyVolume::new(catalog.span().region, widened);
    Ok((catalog.clone().with_span(sv)?, window))
}

pub fn open_out(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Pretty JSON document with the run configuration first.
pub fn render_json(output: &OutputArgs, config: &RunConfig, body: Map<String, Value>) -> String {
    let mut doc = Map::new();
    doc.insert(
        "run_config".into(),
        serde_json::to_value(config).expect("serializable"),
    );
    if !output.deterministic {
        doc.insert(
            "generated_at".into(),
            Value::String(chrono::Utc::now().to_rfc3339()),
        );
    }
    doc.extend(body);
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
    text.push('\n');
    text
}

pub fn write_json(output: &OutputArgs, config: &RunConfig, body: Map<String, Value>) -> CliResult {
    let mut out = open_out(output.out.as_ref())?;
    out.write_all(render_json(output, config, body).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn catalog_info(c: &Catalog) -> Value {
    serde_json::json!({
        "format": c.provenance().format,
        "records_read": c.provenance().records_read,
        "records_skipped": c.provenance().records_skipped,
        "n_events": c.len(),
        "span_start": c.span().window.start,
        "span_end": c.span().window.end,
    })
}
