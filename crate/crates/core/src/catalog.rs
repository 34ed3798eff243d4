//! Earthquake catalogs: events, study volumes, parsing and filtering.
//!
//! Two input formats are supported. The canonical CSV has the header
//! `time,lat,lon,depth_km,mb,ms,id`, ISO-8601 UTC times and empty cells for
//! absent magnitudes. The Global CMT NDK format stores each event in five
//! 80-column lines; only the hypocenter line (plus the event name from line
//! two) is read.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{Point, Region};
use crate::time::{Instant, TimeWindow, MS_PER_DAY};
use crate::GeoPoint;

pub const CSV_HEADER: [&str; 7] = ["time", "lat", "lon", "depth_km", "mb", "ms", "id"];

/// Which magnitude field drives thresholding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeSelector {
    #[default]
    Mb,
    Ms,
    /// mb when present, otherwise Ms.
    MbThenMs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: Instant,
    pub epicenter: GeoPoint,
    pub depth_km: f64,
    pub mb: Option<f64>,
    pub ms: Option<f64>,
    pub source_id: String,
}

impl Event {
    pub fn new(
        time: Instant,
        epicenter: GeoPoint,
        depth_km: f64,
        mb: Option<f64>,
        ms: Option<f64>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if !(depth_km >= 0.0 && depth_km.is_finite()) {
            return Err(Error::arg(format!("depth must be >= 0, got {depth_km}")));
        }
        for m in [mb, ms].into_iter().flatten() {
            if !(m > 0.0 && m <= 10.0) {
                return Err(Error::arg(format!("magnitude {m} outside (0, 10]")));
            }
        }
        if mb.is_none() && ms.is_none() {
            return Err(Error::arg("event has neither mb nor Ms"));
        }
        Ok(Event {
            time,
            epicenter,
            depth_km,
            mb,
            ms,
            source_id: source_id.into(),
        })
    }

    pub fn magnitude(&self, selector: MagnitudeSelector) -> Option<f64> {
        match selector {
            MagnitudeSelector::Mb => self.mb,
            MagnitudeSelector::Ms => self.ms,
            MagnitudeSelector::MbThenMs => self.mb.or(self.ms),
        }
    }
}

/// Spatial region times a half-open time interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StudyVolume {
    pub region: Region,
    pub window: TimeWindow,
}

impl StudyVolume {
    pub fn new(region: Region, window: TimeWindow) -> Self {
        StudyVolume { region, window }
    }

    pub fn global(window: TimeWindow) -> Self {
        StudyVolume::new(Region::GlobalSphere, window)
    }

    pub fn area_km2(&self) -> f64 {
        self.region.area_km2()
    }

    pub fn duration_s(&self) -> f64 {
        self.window.duration_seconds()
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.window.contains(e.time) && self.region.contains(e.epicenter)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub format: String,
    pub records_read: usize,
    /// Records dropped at parse time (NDK records with no usable magnitude).
    pub records_skipped: usize,
}

/// Time-ordered events inside a study volume.
#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    events: Vec<Event>,
    span: StudyVolume,
    selector: MagnitudeSelector,
    provenance: Provenance,
}

impl Catalog {
    /// Stable-sorts `events` by time and checks that each lies inside `span`.
    pub fn new(
        mut events: Vec<Event>,
        span: StudyVolume,
        selector: MagnitudeSelector,
    ) -> Result<Self> {
        events.sort_by_key(|e| e.time);
        if let Some((i, e)) = events.iter().enumerate().find(|(_, e)| !span.contains(e)) {
            return Err(Error::arg(format!(
                "event {i} ({}, {} at {}) lies outside the study volume",
                e.source_id, e.time, e.epicenter.lat
            )));
        }
        Ok(Catalog {
            events,
            span,
            selector,
            provenance: Provenance::default(),
        })
    }

    /// Like [`Catalog::new`] with the span inferred as whole UTC days around the events.
    pub fn with_inferred_span(events: Vec<Event>, selector: MagnitudeSelector) -> Result<Self> {
        let window = infer_window(&events);
        Catalog::new(events, StudyVolume::global(window), selector)
    }

    pub fn empty(span: StudyVolume) -> Self {
        Catalog {
            events: Vec::new(),
            span,
            selector: MagnitudeSelector::default(),
            provenance: Provenance::default(),
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn span(&self) -> &StudyVolume {
        &self.span
    }

    pub fn selector(&self) -> MagnitudeSelector {
        self.selector
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_selector(mut self, selector: MagnitudeSelector) -> Self {
        self.selector = selector;
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Replaces the study volume; every event must lie inside the new one.
    pub fn with_span(self, span: StudyVolume) -> Result<Self> {
        let provenance = self.provenance.clone();
        Ok(Catalog::new(self.events, span, self.selector)?.with_provenance(provenance))
    }

    pub fn magnitude(&self, i: usize) -> Option<f64> {
        self.events[i].magnitude(self.selector)
    }

    /// Authoritative magnitudes, NaN where absent.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.events
            .iter()
            .map(|e| e.magnitude(self.selector).unwrap_or(f64::NAN))
            .collect()
    }

    /// Events with authoritative magnitude `>= mag_min` and time in `window`.
    /// Events with no authoritative magnitude are dropped.
    pub fn filter(&self, mag_min: f64, window: TimeWindow) -> Result<Catalog> {
        if !mag_min.is_finite() {
            return Err(Error::arg(format!(
                "magnitude threshold must be finite, got {mag_min}"
            )));
        }
        if !self.span.window.contains_window(&window) {
            return Err(Error::arg(format!(
                "window [{}, {}) is not inside the catalog span [{}, {})",
                window.start, window.end, self.span.window.start, self.span.window.end
            )));
        }
        let events = self
            .events
            .iter()
            .filter(|e| window.contains(e.time))
            .filter(|e| e.magnitude(self.selector).is_some_and(|m| m >= mag_min))
            .cloned()
            .collect();
        Ok(Catalog {
            events,
            span: StudyVolume::new(self.span.region, window),
            selector: self.selector,
            provenance: self.provenance.clone(),
        })
    }

    /// Events with authoritative magnitude `>= mag_min`, keeping the span.
    pub fn above(&self, mag_min: f64) -> Result<Catalog> {
        self.filter(mag_min, self.span.window)
    }

    /// Builds a catalog from events already known to be inside `span`, re-sorting by time.
    pub(crate) fn from_parts(mut events: Vec<Event>, like: &Catalog) -> Catalog {
        events.sort_by_key(|e| e.time);
        Catalog {
            events,
            span: like.span,
            selector: like.selector,
            provenance: like.provenance.clone(),
        }
    }
}

fn infer_window(events: &[Event]) -> TimeWindow {
    let first = events.iter().map(|e| e.time).min();
    let last = events.iter().map(|e| e.time).max();
    match (first, last) {
        (Some(a), Some(b)) => TimeWindow {
            start: a.floor_day(),
            end: b.floor_day().plus_millis(MS_PER_DAY),
        },
        _ => TimeWindow {
            start: Instant::from_millis(0),
            end: Instant::from_millis(MS_PER_DAY),
        },
    }
}

fn parse_f64(field: &str, what: &str) -> std::result::Result<f64, String> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("bad {what}: {field:?}"))
}

fn parse_opt_mag(field: &str, what: &str) -> std::result::Result<Option<f64>, String> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, what).map(Some)
    }
}

/// Parses the canonical CSV format. The span is inferred as whole UTC days
/// covering the events.
pub fn parse_csv(bytes: &[u8]) -> Result<Catalog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, got {:?}",
                CSV_HEADER.join(","),
                header.join(",")
            ),
        });
    }

    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let event = parse_csv_row(&record).map_err(|message| Error::Parse { line, message })?;
        events.push(event);
    }
    let n = events.len();
    Ok(
        Catalog::with_inferred_span(events, MagnitudeSelector::default())?.with_provenance(
            Provenance {
                format: "csv".into(),
                records_read: n,
                records_skipped: 0,
            },
        ),
    )
}

fn parse_csv_row(record: &csv::StringRecord) -> std::result::Result<Event, String> {
    let time = Instant::parse_iso(&record[0]).map_err(|e| e.to_string())?;
    let lat = parse_f64(&record[1], "latitude")?;
    let lon = parse_f64(&record[2], "longitude")?;
    if !(-180.0..=180.0).contains(&lon) {
        return Err(format!("longitude {lon} outside [-180, 180]"));
    }
    let epicenter = Point::new(lat, lon).map_err(|e| e.to_string())?;
    let depth = parse_f64(&record[3], "depth")?;
    let mb = parse_opt_mag(&record[4], "mb")?;
    let ms = parse_opt_mag(&record[5], "ms")?;
    Event::new(time, epicenter, depth, mb, ms, record[6].trim()).map_err(|e| e.to_string())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the canonical CSV (LF line endings).
pub fn write_csv<W: Write>(catalog: &Catalog, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for e in catalog.events() {
        w.write_record([
            e.time.to_iso(),
            e.epicenter.lat.to_string(),
            e.epicenter.lon.to_string(),
            e.depth_km.to_string(),
            fmt_opt(e.mb),
            fmt_opt(e.ms),
            e.source_id.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(catalog: &Catalog) -> String {
    let mut buf = Vec::new();
    write_csv(catalog, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn column(line: &str, from: usize, to: usize) -> std::result::Result<&str, String> {
    line.get(from..to.min(line.len()))
        .filter(|_| line.len() > from)
        .ok_or_else(|| format!("line 1 too short for columns {}-{}", from + 1, to))
}

/// Parses Global CMT NDK text. Magnitudes reported as 0.0 are absent;
/// records with neither magnitude are skipped and counted in the provenance.
pub fn parse_ndk(bytes: &[u8]) -> Result<Catalog> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Format(format!("NDK input is not UTF-8: {e}")))?;
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if !lines.len().is_multiple_of(5) {
        return Err(Error::Format(format!(
            "NDK line count {} is not a multiple of 5",
            lines.len()
        )));
    }

    let mut events = Vec::with_capacity(lines.len() / 5);
    let mut skipped = 0;
    for (index, rec) in lines.chunks(5).enumerate() {
        let to_err = |message: String| Error::Record { index, message };
        let (time, epicenter, depth, mb, ms) = parse_ndk_hypocenter(rec[0]).map_err(to_err)?;
        if mb.is_none() && ms.is_none() {
            skipped += 1;
            continue;
        }
        let name = rec[1].get(..16.min(rec[1].len())).unwrap_or("").trim();
        let id = if name.is_empty() {
            format!("ndk-{index}")
        } else {
            name.to_string()
        };
        events.push(
            Event::new(time, epicenter, depth, mb, ms, id).map_err(|e| to_err(e.to_string()))?,
        );
    }
    let records = lines.len() / 5;
    Ok(
        Catalog::with_inferred_span(events, MagnitudeSelector::default())?.with_provenance(
            Provenance {
                format: "ndk".into(),
                records_read: records,
                records_skipped: skipped,
            },
        ),
    )
}

type Hypocenter = (Instant, GeoPoint, f64, Option<f64>, Option<f64>);

fn parse_ndk_hypocenter(line: &str) -> std::result::Result<Hypocenter, String> {
    if !line.is_ascii() {
        return Err("hypocenter line contains non-ASCII characters".into());
    }
    let date = column(line, 5, 15)?.trim();
    let clock = column(line, 16, 26)?.trim();
    let lat = parse_f64(column(line, 27, 33)?, "latitude")?;
    let lon = parse_f64(column(line, 34, 41)?, "longitude")?;
    let depth = parse_f64(column(line, 42, 47)?, "depth")?;
    let mags: Vec<&str> = column(line, 48, 55)?.split_whitespace().collect();
    if mags.len() != 2 {
        return Err(format!(
            "expected two magnitudes in columns 49-55, got {mags:?}"
        ));
    }
    let mag = |s: &str, what: &str| -> std::result::Result<Option<f64>, String> {
        let m = parse_f64(s, what)?;
        Ok((m != 0.0).then_some(m))
    };
    let mb = mag(mags[0], "mb")?;
    let ms = mag(mags[1], "Ms")?;

    let mut ymd = date.split('/');
    let (y, mo, d) = match (ymd.next(), ymd.next(), ymd.next(), ymd.next()) {
        (Some(y), Some(m), Some(d), None) => (y, m, d),
        _ => return Err(format!("bad date {date:?}")),
    };
    let bad_date = || format!("bad date {date:?}");
    let day = Instant::from_ymd(
        y.parse().map_err(|_| bad_date())?,
        mo.parse().map_err(|_| bad_date())?,
        d.parse().map_err(|_| bad_date())?,
    )
    .map_err(|_| bad_date())?;

    let bad_time = || format!("bad time {clock:?}");
    let mut hms = clock.split(':');
    let (h, m, s) = match (hms.next(), hms.next(), hms.next(), hms.next()) {
        (Some(h), Some(m), Some(s), None) => (h, m, s),
        _ => return Err(bad_time()),
    };
    let h: i64 = h.parse().map_err(|_| bad_time())?;
    let m: i64 = m.parse().map_err(|_| bad_time())?;
    let s: f64 = s.parse().map_err(|_| bad_time())?;
    // Seconds of 60.0 occur in the catalog and roll over into the next minute.
    if !(0..24).contains(&h) || !(0..60).contains(&m) || !(0.0..=60.0).contains(&s) {
        return Err(bad_time());
    }
    let offset = (h * 3600 + m * 60) * 1000 + (s * 1000.0).round() as i64;
    let time = day.plus_millis(offset);

    let epicenter = Point::new(lat, lon).map_err(|e| e.to_string())?;
    if !(-180.0..=180.0).contains(&lon) {
        return Err(format!("longitude {lon} outside [-180, 180]"));
    }
    Ok((time, epicenter, depth, mb, ms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogFormat {
    Csv,
    Ndk,
}

impl CatalogFormat {
    /// `.ndk` files are NDK, everything else is taken as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ndk") => CatalogFormat::Ndk,
            _ => CatalogFormat::Csv,
        }
    }

    pub fn parse(self, bytes: &[u8]) -> Result<Catalog> {
        match self {
            CatalogFormat::Csv => parse_csv(bytes),
            CatalogFormat::Ndk => parse_ndk(bytes),
        }
    }
}

/// Merges catalogs into one whose span is inferred from the union of events.
pub fn merge(parts: Vec<Catalog>) -> Result<Catalog> {
    let selector = parts.first().map(|c| c.selector).unwrap_or_default();
    let mut provenance = Provenance::default();
    let mut formats: Vec<String> = Vec::new();
    let mut events = Vec::new();
    for c in parts {
        provenance.records_read += c.provenance.records_read;
        provenance.records_skipped += c.provenance.records_skipped;
        if !formats.contains(&c.provenance.format) {
            formats.push(c.provenance.format.clone());
        }
        events.extend(c.events);
    }
    provenance.format = formats.join("+");
    Ok(Catalog::with_inferred_span(events, selector)?.with_provenance(provenance))
}

/// Reads a catalog file, or every file with the format's extension in a
/// directory (in name order). `format` defaults to [`CatalogFormat::from_path`].
pub fn load(path: &Path, format: Option<CatalogFormat>) -> Result<Catalog> {
    if !path.is_dir() {
        let format = format.unwrap_or_else(|| CatalogFormat::from_path(path));
        return format.parse(&std::fs::read(path)?);
    }
    let format = format.unwrap_or(CatalogFormat::Ndk);
    let ext = match format {
        CatalogFormat::Csv => "csv",
        CatalogFormat::Ndk => "ndk",
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|f| {
        f.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case(ext))
    });
    files.sort();
    if files.is_empty() {
        return Err(Error::arg(format!("no .{ext} files in {}", path.display())));
    }
    let parts = files
        .iter()
        .map(|f| {
            format.parse(&std::fs::read(f)?).map_err(|e| match e {
                Error::Format(m) => Error::Format(format!("{}: {m}", f.display())),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    merge(parts)
}
