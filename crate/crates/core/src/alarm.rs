//! Automatic-alarm predictions and their scoring against a catalog.
//!
//! An alarm covers a spherical cap, a half-open time interval
//! `(t_start, t_end]` and the magnitudes `[mag_floor, inf)`. An event is
//! predicted when it falls inside at least one alarm and its magnitude is at
//! least the largest floor among the alarms covering it. With a common floor
//! this is plain membership in some alarm; with each alarm's floor set to its
//! trigger magnitude it is the "at least as large as every nearby recent
//! event" rule.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::catalog::{Catalog, Event, MagnitudeSelector, StudyVolume};
use crate::error::{Error, Result};
use crate::geo::{cap_area_km2, Cap, UnitVec};
use crate::rng::RngStream;
use crate::time::{days_to_millis, Instant};
use crate::GeoPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorMode {
    /// Every alarm's floor is the threshold magnitude.
    #[serde(rename = "i")]
    PredictorI,
    /// Every alarm's floor is its trigger's magnitude.
    #[serde(rename = "ii")]
    PredictorII,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlarmConfig {
    pub mag_threshold: f64,
    pub window_days: f64,
    pub radius_km: f64,
}

impl AlarmConfig {
    pub fn new(mag_threshold: f64, window_days: f64, radius_km: f64) -> Result<Self> {
        if !mag_threshold.is_finite() {
            return Err(Error::arg("magnitude threshold must be finite"));
        }
        if !(window_days > 0.0 && window_days.is_finite()) {
            return Err(Error::arg(format!(
                "window_days must be > 0, got {window_days}"
            )));
        }
        if !(radius_km > 0.0 && radius_km.is_finite()) {
            return Err(Error::arg(format!(
                "radius_km must be > 0, got {radius_km}"
            )));
        }
        Ok(AlarmConfig {
            mag_threshold,
            window_days,
            radius_km,
        })
    }

    /// 21 days, 50 km.
    pub fn standard(mag_threshold: f64) -> Self {
        AlarmConfig {
            mag_threshold,
            window_days: 21.0,
            radius_km: 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Alarm {
    pub center: GeoPoint,
    pub radius_km: f64,
    /// Exclusive start.
    pub t_start: Instant,
    /// Inclusive end.
    pub t_end: Instant,
    pub mag_floor: f64,
    /// Position of the triggering event in the catalog the alarm was generated from.
    pub trigger_index: Option<usize>,
}

impl Alarm {
    pub fn new(
        center: GeoPoint,
        radius_km: f64,
        t_start: Instant,
        t_end: Instant,
        mag_floor: f64,
    ) -> Result<Self> {
        if !(radius_km > 0.0) {
            return Err(Error::arg(format!(
                "alarm radius must be > 0, got {radius_km}"
            )));
        }
        if t_start >= t_end {
            return Err(Error::arg("alarm interval must satisfy t_start < t_end"));
        }
        Ok(Alarm {
            center,
            radius_km,
            t_start,
            t_end,
            mag_floor,
            trigger_index: None,
        })
    }

    pub fn covers_time(&self, t: Instant) -> bool {
        self.t_start < t && t <= self.t_end
    }

    pub fn duration_s(&self) -> f64 {
        (self.t_end.millis() - self.t_start.millis()) as f64 / 1000.0
    }
}

/// Immutable set of alarms, ordered by start time, with a time index for lookups.
#[derive(Clone, Debug)]
pub struct AlarmSet {
    alarms: Vec<Alarm>,
    caps: Vec<Cap>,
    max_duration_ms: i64,
    mode: PredictorMode,
    config: Option<AlarmConfig>,
}

impl AlarmSet {
    pub fn new(mut alarms: Vec<Alarm>, mode: PredictorMode, config: Option<AlarmConfig>) -> Self {
        alarms.sort_by_key(|a| a.t_start);
        let caps = alarms
            .iter()
            .map(|a| Cap::new(a.center, a.radius_km))
            .collect();
        let max_duration_ms = alarms
            .iter()
            .map(|a| a.t_end.millis() - a.t_start.millis())
            .max()
            .unwrap_or(0);
        AlarmSet {
            alarms,
            caps,
            max_duration_ms,
            mode,
            config,
        }
    }

    /// Alarms supplied from outside, not linked to any catalog.
    pub fn external(alarms: Vec<Alarm>) -> Self {
        let alarms = alarms
            .into_iter()
            .map(|a| Alarm {
                trigger_index: None,
                ..a
            })
            .collect();
        AlarmSet::new(alarms, PredictorMode::External, None)
    }

    /// Drops trigger linkage, for scoring against a catalog other than the generating one.
    pub fn detached(&self) -> Self {
        let mut out = self.clone();
        for a in &mut out.alarms {
            a.trigger_index = None;
        }
        out
    }

    pub fn alarms(&self) -> &[Alarm] {
        &self.alarms
    }

    pub fn len(&self) -> usize {
        self.alarms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alarms.is_empty()
    }

    pub fn mode(&self) -> PredictorMode {
        self.mode
    }

    pub fn config(&self) -> Option<AlarmConfig> {
        self.config
    }

    /// Indices of alarms whose cap holds `u` and whose interval holds `t`.
    pub fn covering<'a>(&'a self, t: Instant, u: &'a UnitVec) -> impl Iterator<Item = usize> + 'a {
        let earliest = Instant::from_millis(t.millis() - self.max_duration_ms);
        let lo = self.alarms.partition_point(|a| a.t_start < earliest);
        let hi = self.alarms.partition_point(|a| a.t_start < t);
        (lo..hi).filter(move |&j| self.alarms[j].covers_time(t) && self.caps[j].contains_unit(u))
    }

    /// Eq.-8 membership: covered by some alarm other than its own, and
    /// magnitude at least the largest covering floor.
    pub(crate) fn predicts(&self, own: Option<usize>, t: Instant, u: &UnitVec, mag: f64) -> bool {
        if mag.is_nan() {
            return false;
        }
        let mut covered = false;
        for j in self.covering(t, u) {
            if own.is_some() && self.alarms[j].trigger_index == own {
                continue;
            }
            if mag < self.alarms[j].mag_floor {
                return false;
            }
            covered = true;
        }
        covered
    }

    /// Whether `event` is predicted; `own_index` is its position in the
    /// generating catalog, used to exclude the alarm it triggered.
    pub fn is_predicted(
        &self,
        event: &Event,
        own_index: Option<usize>,
        selector: MagnitudeSelector,
    ) -> bool {
        let mag = event.magnitude(selector).unwrap_or(f64::NAN);
        self.predicts(own_index, event.time, &event.epicenter.to_unit(), mag)
    }

    /// Counts predicted targets given per-identity arrays. `times[k]` may be a
    /// permuted time; identity `k` still owns the alarm with `trigger_index == k`.
    pub(crate) fn count_predicted_raw(
        &self,
        times: &[Instant],
        units: &[UnitVec],
        mags: &[f64],
    ) -> usize {
        (0..times.len())
            .filter(|&k| self.predicts(Some(k), times[k], &units[k], mags[k]))
            .count()
    }

    /// Writes `trigger_time,lat,lon,radius_km,t_start,t_end,mag_floor`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "trigger_time,lat,lon,radius_km,t_start,t_end,mag_floor"
        )?;
        for a in &self.alarms {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                a.t_start, a.center.lat, a.center.lon, a.radius_km, a.t_start, a.t_end, a.mag_floor
            )?;
        }
        Ok(())
    }
}

/// One alarm per event with authoritative magnitude `>= mag_threshold`,
/// covering `(t_j, t_j + window]` truncated at the end of the catalog span.
pub fn generate_alarms(
    catalog: &Catalog,
    config: AlarmConfig,
    mode: PredictorMode,
) -> Result<AlarmSet> {
    let config = AlarmConfig::new(config.mag_threshold, config.window_days, config.radius_km)?;
    if mode == PredictorMode::External {
        return Err(Error::arg("generated alarms must use predictor i or ii"));
    }
    let window_ms = days_to_millis(config.window_days);
    let span_end = catalog.span().window.end;
    let mut alarms = Vec::new();
    for (i, e) in catalog.events().iter().enumerate() {
        let Some(m) = catalog.magnitude(i) else {
            continue;
        };
        if m < config.mag_threshold {
            continue;
        }
        let t_end = e.time.plus_millis(window_ms).min(span_end);
        if t_end <= e.time {
            continue;
        }
        alarms.push(Alarm {
            center: e.epicenter,
            radius_km: config.radius_km,
            t_start: e.time,
            t_end,
            mag_floor: match mode {
                PredictorMode::PredictorI => config.mag_threshold,
                _ => m,
            },
            trigger_index: Some(i),
        });
    }
    Ok(AlarmSet::new(alarms, mode, Some(config)))
}

pub(crate) fn unit_vectors(catalog: &Catalog) -> Vec<UnitVec> {
    catalog
        .events()
        .iter()
        .map(|e| e.epicenter.to_unit())
        .collect()
}

/// Number of target events predicted by `aset`. Target positions are matched
/// against `trigger_index` to exclude self-prediction.
pub fn count_predicted(targets: &Catalog, aset: &AlarmSet) -> usize {
    let times: Vec<Instant> = targets.events().iter().map(|e| e.time).collect();
    aset.count_predicted_raw(&times, &unit_vectors(targets), &targets.magnitudes())
}

/// Per-target predicted flags.
pub fn predicted_flags(targets: &Catalog, aset: &AlarmSet) -> Vec<bool> {
    let mags = targets.magnitudes();
    targets
        .events()
        .iter()
        .enumerate()
        .map(|(k, e)| aset.predicts(Some(k), e.time, &e.epicenter.to_unit(), mags[k]))
        .collect()
}

/// Number of alarms containing at least one target event. For alarms with
/// trigger-magnitude floors an alarm's region excludes the magnitude band
/// claimed by larger overlapping alarms, so an event counts toward alarm `j`
/// only when it is predicted and covered by `j`.
pub fn count_successful_alarms(aset: &AlarmSet, targets: &Catalog) -> usize {
    let mags = targets.magnitudes();
    let mut success = vec![false; aset.len()];
    for (k, e) in targets.events().iter().enumerate() {
        let u = e.epicenter.to_unit();
        if !aset.predicts(Some(k), e.time, &u, mags[k]) {
            continue;
        }
        for j in aset.covering(e.time, &u) {
            if aset.alarms[j].trigger_index != Some(k) {
                success[j] = true;
            }
        }
    }
    success.into_iter().filter(|&s| s).count()
}

/// Upper bound on the fraction of the study volume under alarm: the sum of
/// alarm volumes, ignoring overlap.
pub fn alarm_volume_fraction(aset: &AlarmSet, sv: &StudyVolume) -> f64 {
    let w = sv.window;
    let total: f64 = aset
        .alarms()
        .iter()
        .map(|a| {
            let start = a.t_start.max(w.start).millis();
            let end = a.t_end.min(w.end).millis();
            let dur_s = (end - start).max(0) as f64 / 1000.0;
            cap_area_km2(a.radius_km).expect("alarm radius validated") * dur_s
        })
        .sum();
    total / (sv.area_km2() * sv.duration_s())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Monte-Carlo estimate of the fraction of the study volume inside the union of alarms.
pub fn union_volume_fraction_mc(
    aset: &AlarmSet,
    sv: &StudyVolume,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples == 0 {
        return Err(Error::arg("n_samples must be >= 1"));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let start = sv.window.start.millis();
    let len = sv.window.duration_millis();
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let p = sv.region.sample(&mut rng);
        let t = Instant::from_millis(start + rng.random_range(0..len));
        let u = p.to_unit();
        if aset.covering(t, &u).next().is_some() {
            hits += 1;
        }
    }
    let v = hits as f64 / n_samples as f64;
    Ok(MonteCarloEstimate {
        estimate: v,
        std_error: (v * (1.0 - v) / n_samples as f64).sqrt(),
        n_samples,
    })
}

/// Counts and rates for a prediction set scored against a catalog.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoreSummary {
    #[serde(rename = "Q")]
    pub n_events: usize,
    #[serde(rename = "A")]
    pub n_alarms: usize,
    #[serde(rename = "S")]
    pub n_successful_alarms: usize,
    #[serde(rename = "P")]
    pub n_predicted: usize,
    #[serde(rename = "F")]
    pub n_false_alarms: usize,
    #[serde(rename = "M")]
    pub n_missed: usize,
    #[serde(rename = "s")]
    pub success_rate: f64,
    #[serde(rename = "p")]
    pub predicted_fraction: f64,
    #[serde(rename = "f")]
    pub false_alarm_rate: f64,
    #[serde(rename = "m")]
    pub miss_rate: f64,
    pub v_upper: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ScoreSummary {
    pub fn new(q: usize, a: usize, s: usize, p: usize, v_upper: f64) -> Self {
        assert!(s <= a && p <= q, "successes cannot exceed alarms or events");
        let f = a - s;
        let m = q - p;
        let out = ScoreSummary {
            n_events: q,
            n_alarms: a,
            n_successful_alarms: s,
            n_predicted: p,
            n_false_alarms: f,
            n_missed: m,
            success_rate: ratio(s, a),
            predicted_fraction: ratio(p, q),
            false_alarm_rate: ratio(f, a),
            miss_rate: ratio(m, q),
            v_upper,
        };
        assert_eq!(out.n_false_alarms + out.n_successful_alarms, out.n_alarms);
        assert_eq!(out.n_missed + out.n_predicted, out.n_events);
        out
    }
}

pub fn score(targets: &Catalog, aset: &AlarmSet, sv: &StudyVolume) -> ScoreSummary {
    ScoreSummary::new(
        targets.len(),
        aset.len(),
        count_successful_alarms(aset, targets),
        count_predicted(targets, aset),
        alarm_volume_fraction(aset, sv),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Event, MagnitudeSelector};
    use crate::geo::{Point, Region, EARTH_RADIUS_KM};
    use crate::time::{TimeWindow, MS_PER_DAY};

    fn t0() -> Instant {
        Instant::from_ymd(2004, 1, 1).unwrap()
    }

    fn day(d: f64) -> Instant {
        t0().plus_millis((d * MS_PER_DAY as f64) as i64)
    }

    fn year() -> TimeWindow {
        TimeWindow::new(t0(), Instant::from_ymd(2005, 1, 1).unwrap()).unwrap()
    }

    /// Point `km` east of (0, 0) along the equator.
    fn east(km: f64) -> GeoPoint {
        Point::new(0.0, (km / EARTH_RADIUS_KM).to_degrees()).unwrap()
    }

    fn ev(d: f64, km: f64, mb: f64, id: &str) -> Event {
        Event::new(day(d), east(km), 10.0, Some(mb), None, id).unwrap()
    }

    fn catalog(events: Vec<Event>) -> Catalog {
        Catalog::new(events, StudyVolume::global(year()), MagnitudeSelector::Mb).unwrap()
    }

    #[test]
    fn empty_catalog_no_alarms() {
        let c = catalog(vec![]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        assert!(a.is_empty());
        assert_eq!(count_successful_alarms(&a, &c), 0);
        let s = score(&c, &a, c.span());
        assert_eq!(s, ScoreSummary::new(0, 0, 0, 0, 0.0));
        assert_eq!(s.success_rate, 0.0);
        assert_eq!(s.predicted_fraction, 0.0);
    }

    #[test]
    fn bad_config_rejected() {
        let c = catalog(vec![]);
        for cfg in [
            AlarmConfig {
                window_days: 0.0,
                ..AlarmConfig::standard(5.5)
            },
            AlarmConfig {
                radius_km: -1.0,
                ..AlarmConfig::standard(5.5)
            },
        ] {
            assert!(generate_alarms(&c, cfg, PredictorMode::PredictorI).is_err());
        }
    }

    #[test]
    fn alarm_excludes_its_trigger() {
        let c = catalog(vec![ev(10.0, 0.0, 6.0, "a")]);
        let a =
            generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorII).unwrap();
        assert_eq!(a.len(), 1);
        let alarm = &a.alarms()[0];
        assert_eq!(alarm.t_start, day(10.0));
        assert_eq!(alarm.t_end, day(31.0));
        assert!(!alarm.covers_time(day(10.0)));
        assert!(alarm.covers_time(day(31.0)));
        assert_eq!(count_predicted(&c, &a), 0);
    }

    #[test]
    fn duplicate_timestamps_do_not_self_predict() {
        // Two events at the same instant and place: neither alarm covers the other's time.
        let c = catalog(vec![ev(10.0, 0.0, 6.0, "a"), ev(10.0, 0.0, 6.0, "b")]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        assert_eq!(count_predicted(&c, &a), 0);
    }

    #[test]
    fn alarms_truncated_at_span_end() {
        let c = catalog(vec![ev(360.0, 0.0, 6.0, "a")]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        assert_eq!(a.alarms()[0].t_end, year().end);
    }

    #[test]
    fn predictor_ii_single_covering_alarm() {
        let c = catalog(vec![
            ev(0.0, 0.0, 6.0, "trigger"),
            ev(5.0, 10.0, 6.2, "target"),
        ]);
        let a =
            generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorII).unwrap();
        assert!(a.is_predicted(&c.events()[1], Some(1), MagnitudeSelector::Mb));
    }

    #[test]
    fn predictor_ii_max_floor_rule() {
        let alarms = vec![
            Alarm::new(east(0.0), 50.0, day(0.0), day(21.0), 5.6).unwrap(),
            Alarm::new(east(5.0), 50.0, day(1.0), day(22.0), 6.4).unwrap(),
        ];
        let a = AlarmSet::external(alarms);
        let target = ev(3.0, 10.0, 6.0, "x");
        assert!(!a.is_predicted(&target, None, MagnitudeSelector::Mb));
        let big = ev(3.0, 10.0, 6.4, "y");
        assert!(a.is_predicted(&big, None, MagnitudeSelector::Mb));
    }

    #[test]
    fn equal_magnitude_trigger_still_predicts() {
        let c = catalog(vec![ev(0.0, 0.0, 6.0, "a"), ev(2.0, 20.0, 6.0, "b")]);
        let a =
            generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorII).unwrap();
        assert_eq!(predicted_flags(&c, &a), [false, true]);
    }

    #[test]
    fn boundary_distance_and_time() {
        let c = catalog(vec![
            ev(0.0, 0.0, 6.0, "a"),
            ev(21.0, 49.999, 6.0, "edge-in"),
            ev(3.0, -50.01, 6.0, "far"),
        ]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        // Sorted order: a(0), far(3), edge-in(21).
        assert_eq!(predicted_flags(&c, &a), [false, false, true]);

        let c = catalog(vec![ev(0.0, 0.0, 6.0, "a"), ev(21.001, 1.0, 6.0, "late")]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        assert_eq!(predicted_flags(&c, &a), [false, false]);
    }

    #[test]
    fn one_alarm_many_events_is_one_success() {
        let c = catalog(vec![
            ev(0.0, 0.0, 6.0, "a"),
            ev(1.0, 1.0, 5.6, "b"),
            ev(2.0, 2.0, 5.6, "c"),
            ev(3.0, 3.0, 5.6, "d"),
        ]);
        let a = AlarmSet::external(vec![
            Alarm::new(east(0.0), 50.0, day(0.5), day(10.0), 5.5).unwrap()
        ]);
        assert_eq!(count_successful_alarms(&a, &c), 1);
    }

    /// Three events: a(6.0) at day 0, b(5.8) 10 km away at day 4, c(5.7) 300 km away at day 5.
    /// Enumerating Eq. 1 and Eq. 2 by hand with predictor i (M_tau 5.5):
    /// alarm(a) = (0, 21] around x=0 holds b; alarm(b) = (4, 25] around x=10 holds nothing
    /// later; alarm(c) holds nothing. S = 1, P = 1 (b), Q = A = 3.
    #[test]
    fn three_event_fixture_summary() {
        let c = catalog(vec![
            ev(0.0, 0.0, 6.0, "a"),
            ev(4.0, 10.0, 5.8, "b"),
            ev(5.0, 300.0, 5.7, "c"),
        ]);
        let a = generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorI).unwrap();
        let s = score(&c, &a, c.span());
        assert_eq!(
            (s.n_events, s.n_alarms, s.n_successful_alarms, s.n_predicted),
            (3, 3, 1, 1)
        );
        assert_eq!((s.n_false_alarms, s.n_missed), (2, 2));
        assert!((s.success_rate - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.predicted_fraction - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.false_alarm_rate - 2.0 / 3.0).abs() < 1e-15);
        let cap = cap_area_km2(50.0).unwrap();
        let v = 3.0 * cap * 21.0 / (crate::geo::sphere_area_km2::<f64>() * 366.0);
        assert!((s.v_upper - v).abs() < 1e-18);
    }

    #[test]
    fn whole_volume_alarm_scores_one() {
        let c = catalog(vec![ev(1.0, 0.0, 5.0, "a"), ev(100.0, 9000.0, 7.0, "b")]);
        let whole = Alarm::new(
            east(0.0),
            std::f64::consts::PI * EARTH_RADIUS_KM,
            year().start,
            year().end,
            0.0,
        )
        .unwrap();
        let a = AlarmSet::external(vec![whole]);
        let s = score(&c, &a, c.span());
        assert_eq!(s.success_rate, 1.0);
        assert_eq!(s.predicted_fraction, 1.0);
        assert!((s.v_upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn union_mc_disjoint_duplicate_and_hemisphere() {
        let sv = StudyVolume::global(year());
        let n = 200_000;
        let big = 2000.0;
        let a1 = Alarm::new(east(0.0), big, day(0.0), day(100.0), 0.0).unwrap();
        let a2 = Alarm::new(east(10000.0), big, day(150.0), day(250.0), 0.0).unwrap();

        let disjoint = AlarmSet::external(vec![a1.clone(), a2.clone()]);
        let est = union_volume_fraction_mc(&disjoint, &sv, n, 1).unwrap();
        let upper = alarm_volume_fraction(&disjoint, &sv);
        assert!(
            (est.estimate - upper).abs() <= 3.0 * est.std_error,
            "{est:?} vs {upper}"
        );

        let dup = AlarmSet::external(vec![a1.clone(), a1.clone()]);
        let est = union_volume_fraction_mc(&dup, &sv, n, 2).unwrap();
        let upper = alarm_volume_fraction(&dup, &sv);
        assert!((est.estimate - upper / 2.0).abs() <= 3.0 * est.std_error);
        assert!(est.estimate <= upper + 3.0 * est.std_error);

        let hemi_radius = std::f64::consts::FRAC_PI_2 * EARTH_RADIUS_KM;
        let half = TimeWindow::new(t0(), t0().plus_millis(183 * MS_PER_DAY)).unwrap();
        let hemi = AlarmSet::external(vec![Alarm::new(
            Point::new(90.0, 0.0).unwrap(),
            hemi_radius,
            half.start,
            half.end,
            0.0,
        )
        .unwrap()]);
        // Half the sphere for exactly half of the 366-day year.
        let est = union_volume_fraction_mc(&hemi, &sv, n, 3).unwrap();
        assert!(
            (est.estimate - 0.25).abs() <= 3.0 * est.std_error,
            "{est:?}"
        );
        assert!((alarm_volume_fraction(&hemi, &sv) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn union_mc_is_deterministic() {
        let sv = StudyVolume::new(
            Region::Box(crate::geo::LatLonBox::new(-5.0, 5.0, -5.0, 5.0).unwrap()),
            year(),
        );
        let a = AlarmSet::external(vec![
            Alarm::new(east(0.0), 200.0, day(0.0), day(50.0), 0.0).unwrap()
        ]);
        let x = union_volume_fraction_mc(&a, &sv, 5000, 9).unwrap();
        let y = union_volume_fraction_mc(&a, &sv, 5000, 9).unwrap();
        assert_eq!(x, y);
        assert!(union_volume_fraction_mc(&a, &sv, 0, 9).is_err());
    }

    #[test]
    fn alarm_csv_layout() {
        let c = catalog(vec![ev(0.0, 0.0, 6.0, "a")]);
        let a =
            generate_alarms(&c, AlarmConfig::standard(5.5), PredictorMode::PredictorII).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "trigger_time,lat,lon,radius_km,t_start,t_end,mag_floor\n\
             2004-01-01T00:00:00Z,0,0,50,2004-01-01T00:00:00Z,2004-01-22T00:00:00Z,6\n"
        );
    }
}
