//! Window declustering: every event punches a space-time hole that removes
//! smaller events following it.

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::geo::great_circle_km;
use crate::time::days_to_millis;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub mag_min: f64,
    pub time_days: f64,
    pub distance_km: f64,
}

/// Magnitude-dependent windows. Lookup picks the row with the largest
/// `mag_min` not exceeding the magnitude.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowTable {
    rows: Vec<WindowRow>,
}

impl WindowTable {
    pub fn new(rows: Vec<WindowRow>) -> Result<Self> {
        if rows.first().map(|r| r.mag_min) != Some(f64::NEG_INFINITY) {
            return Err(Error::arg(
                "window table needs a first row with mag_min = -inf",
            ));
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.time_days > 0.0 && r.time_days.is_finite())
                || !(r.distance_km > 0.0 && r.distance_km.is_finite())
            {
                return Err(Error::arg(format!(
                    "row {}: windows must be positive and finite",
                    i + 1
                )));
            }
            if i > 0 && !(r.mag_min > rows[i - 1].mag_min) {
                return Err(Error::arg(format!(
                    "row {}: mag_min must be strictly increasing",
                    i + 1
                )));
            }
        }
        Ok(WindowTable { rows })
    }

    /// Same window for every magnitude.
    pub fn constant(time_days: f64, distance_km: f64) -> Result<Self> {
        Self::new(vec![WindowRow {
            mag_min: f64::NEG_INFINITY,
            time_days,
            distance_km,
        }])
    }

    /// Reads `mag_min,time_days,distance_km` rows; `-inf` is accepted for the default row.
    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let header = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if header.iter().collect::<Vec<_>>() != ["mag_min", "time_days", "distance_km"] {
            return Err(Error::Parse {
                line: 1,
                message: "expected header mag_min,time_days,distance_km".into(),
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let field = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number {:?}", &rec[k]),
                })
            };
            rows.push(WindowRow {
                mag_min: field(0)?,
                time_days: field(1)?,
                distance_km: field(2)?,
            });
        }
        Self::new(rows)
    }

    pub fn rows(&self) -> &[WindowRow] {
        &self.rows
    }

    pub fn lookup(&self, magnitude: f64) -> &WindowRow {
        let k = self.rows.partition_point(|r| r.mag_min <= magnitude);
        &self.rows[k.max(1) - 1]
    }

    /// Every window scaled by the same factors.
    pub fn scaled(&self, time_factor: f64, distance_factor: f64) -> Result<Self> {
        Self::new(
            self.rows
                .iter()
                .map(|r| WindowRow {
                    mag_min: r.mag_min,
                    time_days: r.time_days * time_factor,
                    distance_km: r.distance_km * distance_factor,
                })
                .collect(),
        )
    }

    fn max_time_ms(&self) -> i64 {
        self.rows
            .iter()
            .map(|r| days_to_millis(r.time_days))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleMode {
    /// Every earlier larger event punches a hole, deleted or not.
    #[default]
    AllEvents,
    /// Only events that survive punch holes.
    RetainedOnly,
}

#[derive(Clone, Debug)]
pub struct DeclusterOutcome {
    pub catalog: Catalog,
    /// Indices into the input catalog, ascending.
    pub deleted: Vec<usize>,
    pub mode: HoleMode,
}

pub fn decluster(c: &Catalog, w: &WindowTable) -> DeclusterOutcome {
    decluster_with(c, w, HoleMode::AllEvents)
}

/// Deletes event `i` when a strictly larger event `j` with `0 < t_i - t_j <= T(M_j)`
/// lies within `D(M_j)` km. Events without an authoritative magnitude are left alone.
pub fn decluster_with(c: &Catalog, w: &WindowTable, mode: HoleMode) -> DeclusterOutcome {
    let events = c.events();
    let mags = c.magnitudes();
    let horizon = w.max_time_ms();
    let mut deleted = vec![false; events.len()];
    for i in 0..events.len() {
        let mi = mags[i];
        if mi.is_nan() {
            continue;
        }
        let ti = events[i].time.millis();
        deleted[i] = (0..i)
            .rev()
            .take_while(|&j| ti - events[j].time.millis() <= horizon)
            .any(|j| {
                if !(mags[j] > mi) || (mode == HoleMode::RetainedOnly && deleted[j]) {
                    return false;
                }
                let dt = ti - events[j].time.millis();
                let row = w.lookup(mags[j]);
                dt > 0
                    && dt <= days_to_millis(row.time_days)
                    && great_circle_km(events[j].epicenter, events[i].epicenter) <= row.distance_km
            });
    }
    let retained = events
        .iter()
        .zip(&deleted)
        .filter(|(_, d)| !**d)
        .map(|(e, _)| e.clone())
        .collect();
    DeclusterOutcome {
        catalog: Catalog::from_parts(retained, c),
        deleted: (0..events.len()).filter(|&i| deleted[i]).collect(),
        mode,
    }
}

/// Number and fraction of `before`'s events missing from `after`, which must
/// be a subsequence of `before`.
pub fn decluster_stats(before: &Catalog, after: &Catalog) -> Result<(usize, f64)> {
    let mut it = before.events().iter();
    for (k, e) in after.events().iter().enumerate() {
        if !it.any(|b| b == e) {
            return Err(Error::arg(format!(
                "event {k} of the declustered catalog is not in the original"
            )));
        }
    }
    let n = before.len() - after.len();
    let fraction = if before.is_empty() {
        0.0
    } else {
        n as f64 / before.len() as f64
    };
    Ok((n, fraction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Event, MagnitudeSelector};
    use crate::time::{Instant, MS_PER_DAY};
    use crate::GeoPoint;

    // One degree of longitude on the equator.
    const KM_PER_DEG: f64 = 111.19508;

    fn ev(day: f64, x_km: f64, mb: f64) -> Event {
        let t = Instant::from_millis(1_000 * MS_PER_DAY + (day * MS_PER_DAY as f64) as i64);
        Event::new(
            t,
            GeoPoint::new(0.0, x_km / KM_PER_DEG).unwrap(),
            10.0,
            Some(mb),
            None,
            "",
        )
        .unwrap()
    }

    fn cat(events: Vec<Event>) -> Catalog {
        Catalog::with_inferred_span(events, MagnitudeSelector::Mb).unwrap()
    }

    #[test]
    fn single_event_unchanged() {
        let c = cat(vec![ev(0.0, 0.0, 5.0)]);
        let out = decluster(&c, &WindowTable::constant(10.0, 20.0).unwrap());
        assert_eq!(out.catalog.events(), c.events());
        assert!(out.deleted.is_empty());
    }

    #[test]
    fn smaller_follower_deleted() {
        let c = cat(vec![ev(0.0, 0.0, 6.0), ev(1.0, 0.0, 5.0)]);
        let out = decluster(&c, &WindowTable::constant(10.0, 20.0).unwrap());
        assert_eq!(out.deleted, vec![1]);
        assert_eq!(decluster_stats(&c, &out.catalog).unwrap(), (1, 0.5));
    }

    #[test]
    fn equal_magnitudes_and_earlier_events_survive() {
        let c = cat(vec![
            ev(0.0, 0.0, 5.0),
            ev(1.0, 0.0, 5.0),
            ev(2.0, 0.0, 6.0),
        ]);
        let out = decluster(&c, &WindowTable::constant(10.0, 20.0).unwrap());
        assert!(out.deleted.is_empty());
    }

    #[test]
    fn window_edges() {
        let w = WindowTable::constant(10.0, 20.0).unwrap();
        let c = cat(vec![
            ev(0.0, 0.0, 6.0),
            ev(10.0, 19.9, 5.0),
            ev(10.001, 0.0, 5.0),
            ev(5.0, 20.1, 5.0),
        ]);
        assert_eq!(decluster(&c, &w).deleted, vec![2]);
    }

    fn chain() -> Catalog {
        // A's window reaches B at 20 km but not C at 40 km; B's reaches C.
        cat(vec![
            ev(0.0, 0.0, 6.0),
            ev(1.0, 20.0, 5.5),
            ev(2.0, 40.0, 5.0),
        ])
    }

    #[test]
    fn deleted_events_still_punch_holes() {
        let c = chain();
        let w = WindowTable::constant(10.0, 30.0).unwrap();
        let out = decluster(&c, &w);
        assert_eq!(out.deleted, vec![1, 2]);
        let (n, f) = decluster_stats(&c, &out.catalog).unwrap();
        assert_eq!(n, 2);
        assert!((f - 2.0 / 3.0).abs() < 1e-15);

        let retained_only = decluster_with(&c, &w, HoleMode::RetainedOnly);
        assert_eq!(retained_only.deleted, vec![1]);
    }

    #[test]
    fn magnitude_dependent_lookup() {
        let w = WindowTable::new(vec![
            WindowRow {
                mag_min: f64::NEG_INFINITY,
                time_days: 1.0,
                distance_km: 10.0,
            },
            WindowRow {
                mag_min: 6.0,
                time_days: 100.0,
                distance_km: 100.0,
            },
        ])
        .unwrap();
        assert_eq!(w.lookup(5.99).time_days, 1.0);
        assert_eq!(w.lookup(6.0).time_days, 100.0);
        let c = cat(vec![
            ev(0.0, 0.0, 6.0),
            ev(50.0, 90.0, 5.9),
            ev(50.5, 95.0, 5.0),
        ]);
        assert_eq!(decluster(&c, &w).deleted, vec![1, 2]);
        let small = cat(vec![ev(0.0, 0.0, 5.9), ev(2.0, 5.0, 5.0)]);
        assert!(decluster(&small, &w).deleted.is_empty());
    }

    #[test]
    fn table_validation() {
        assert!(WindowTable::constant(0.0, 10.0).is_err());
        assert!(WindowTable::constant(1.0, -1.0).is_err());
        assert!(WindowTable::new(vec![WindowRow {
            mag_min: 3.0,
            time_days: 1.0,
            distance_km: 1.0
        }])
        .is_err());
        let rows = vec![
            WindowRow {
                mag_min: f64::NEG_INFINITY,
                time_days: 1.0,
                distance_km: 1.0,
            },
            WindowRow {
                mag_min: 5.0,
                time_days: 1.0,
                distance_km: 1.0,
            },
            WindowRow {
                mag_min: 5.0,
                time_days: 2.0,
                distance_km: 1.0,
            },
        ];
        assert!(WindowTable::new(rows).is_err());
    }

    #[test]
    fn csv_table() {
        let w = WindowTable::from_csv(b"mag_min,time_days,distance_km\n-inf,10,20\n6.5,300,100\n")
            .unwrap();
        assert_eq!(w.rows().len(), 2);
        assert_eq!(w.lookup(7.0).distance_km, 100.0);
        let err =
            WindowTable::from_csv(b"mag_min,time_days,distance_km\n-inf,ten,20\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(WindowTable::from_csv(b"m,t,d\n-inf,1,1\n").is_err());
    }

    #[test]
    fn stats_edge_cases() {
        let c = chain();
        assert_eq!(decluster_stats(&c, &c).unwrap(), (0, 0.0));
        let empty = Catalog::empty(*c.span());
        assert_eq!(decluster_stats(&c, &empty).unwrap(), (3, 1.0));
        let reversed = cat(vec![ev(5.0, 0.0, 6.0)]);
        assert!(decluster_stats(&c, &reversed).is_err());
    }
}
