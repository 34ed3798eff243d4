#![allow(dead_code)]

use std::path::PathBuf;

use eqtest::alarm::{generate_alarms, predicted_flags};
use eqtest::geo::great_circle_km;
use eqtest::rng::replicate_rng;
use eqtest::time::MS_PER_DAY;
use eqtest::{AlarmConfig, Catalog, Event, GeoPoint, Instant, MagnitudeSelector, PredictorMode, StudyVolume, TimeWindow};
use rand::Rng;

pub fn window(days: i64) -> TimeWindow {
    let start = Instant::from_ymd(2004, 1, 1).unwrap();
    TimeWindow::new(start, start.plus_millis(days * MS_PER_DAY)).unwrap()
}

/// Event `day` days into [`window`], `(north_km, east_km)` from (0, 0).
pub fn ev(day: f64, north_km: f64, east_km: f64, mb: f64) -> Event {
    let t = window(1).start.plus_millis((day * MS_PER_DAY as f64).round() as i64);
    let r = eqtest::geo::EARTH_RADIUS_KM;
    let p = GeoPoint::new((north_km / r).to_degrees(), (east_km / r).to_degrees()).unwrap();
    Event::new(t, p, 10.0, Some(mb), None, format!("{day}/{north_km}/{east_km}")).unwrap()
}

pub fn catalog(events: Vec<Event>, days: i64) -> Catalog {
    Catalog::new(events, StudyVolume::global(window(days)), MagnitudeSelector::Mb).unwrap()
}

/// `n` events uniform in a `box_km` square over `days` days, magnitudes on a
/// 0.1 grid in [5.0, 7.0] so that ties occur.
pub fn random_catalog(seed: u64, n: usize, box_km: f64, days: i64) -> Catalog {
    let mut rng = replicate_rng(seed, 0);
    let events = (0..n)
        .map(|_| {
            let mb = 5.0 + rng.random_range(0..=20) as f64 / 10.0;
            ev(
                rng.random_range(0.0..days as f64),
                rng.random_range(0.0..box_km),
                rng.random_range(0.0..box_km),
                mb,
            )
        })
        .collect();
    catalog(events, days)
}

/// Predictor (ii) eligibility written out directly: inside some other
/// event's alarm, and no strictly larger event within `radius_km` during the
/// preceding `window_days`.
pub fn eligible_directly(targets: &Catalog, cfg: AlarmConfig) -> Vec<bool> {
    let ev = targets.events();
    let mags = targets.magnitudes();
    let w = (cfg.window_days * MS_PER_DAY as f64).round() as i64;
    let preceding = |k: usize, j: usize| {
        let dt = ev[k].time.millis() - ev[j].time.millis();
        j != k && dt > 0 && dt <= w && great_circle_km(ev[j].epicenter, ev[k].epicenter) <= cfg.radius_km
    };
    (0..ev.len())
        .map(|k| {
            let covered = (0..ev.len()).any(|j| preceding(k, j));
            let larger = (0..ev.len()).any(|j| preceding(k, j) && mags[j] > mags[k]);
            covered && !larger
        })
        .collect()
}

/// Pointwise agreement of the max-floor rule with [`eligible_directly`].
pub fn eligibility_agrees(catalog: &Catalog, cfg: AlarmConfig) -> Result<usize, String> {
    let targets = catalog.above(cfg.mag_threshold).map_err(|e| e.to_string())?;
    let alarms = generate_alarms(&targets, cfg, PredictorMode::PredictorII).map_err(|e| e.to_string())?;
    let rule = predicted_flags(&targets, &alarms);
    let direct = eligible_directly(&targets, cfg);
    match rule.iter().zip(&direct).position(|(a, b)| a != b) {
        Some(k) => Err(format!(
            "event {k} ({}): max-floor rule {} but direct predicate {}",
            targets.events()[k].source_id,
            rule[k],
            direct[k]
        )),
        None => Ok(rule.iter().filter(|x| **x).count()),
    }
}

/// Global CMT NDK data: `EQPRED_CMT_NDK` (a file or a directory of `.ndk`
/// files), else `data/cmt/` at the workspace root.
pub fn cmt_path() -> PathBuf {
    match std::env::var_os("EQPRED_CMT_NDK") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cmt"),
    }
}
