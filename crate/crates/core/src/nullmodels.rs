//! Stochastic seismicity generators for the null hypotheses.
//!
//! All generators take an explicit RNG; use [`crate::rng::replicate_rng`] to
//! get reproducible, order-independent replicates.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::Serialize;

use crate::catalog::{Catalog, Event, StudyVolume};
use crate::error::{Error, Result};
use crate::geo::{check_partition, LatLonBox, Region};
use crate::time::{Instant, TimeWindow};

/// In-place Fisher–Yates shuffle. `draw(k)` must return an index in `0..k`;
/// it is called with `k = n, n-1, ..., 2` and position `k-1` is swapped with
/// the drawn index.
pub fn fisher_yates<T>(items: &mut [T], mut draw: impl FnMut(usize) -> usize) {
    for i in (1..items.len()).rev() {
        let j = draw(i + 1);
        assert!(j <= i, "draw({}) returned {j}", i + 1);
        items.swap(i, j);
    }
}

pub(crate) fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    fisher_yates(items, |k| rng.random_range(0..k));
}

/// Reassigns the catalog's times to its (location, magnitude) marks by a
/// uniformly random permutation, then re-sorts by time.
pub fn permute_times<R: Rng + ?Sized>(catalog: &Catalog, rng: &mut R) -> Catalog {
    permute_times_with(catalog, |k| rng.random_range(0..k))
}

/// [`permute_times`] with an injected draw sequence (see [`fisher_yates`]).
pub fn permute_times_with(catalog: &Catalog, draw: impl FnMut(usize) -> usize) -> Catalog {
    let mut times: Vec<Instant> = catalog.events().iter().map(|e| e.time).collect();
    fisher_yates(&mut times, draw);
    let events = catalog
        .events()
        .iter()
        .zip(times)
        .map(|(e, time)| Event { time, ..e.clone() })
        .collect();
    Catalog::from_parts(events, catalog)
}

fn uniform_instant<R: Rng + ?Sized>(window: &TimeWindow, rng: &mut R) -> Instant {
    Instant::from_millis(window.start.millis() + rng.random_range(0..window.duration_millis()))
}

/// Keeps locations and magnitudes; draws each time iid uniform on the span.
/// Conditioned on the event count this is also the Poisson-times model.
pub fn randomize_times_uniform<R: Rng + ?Sized>(catalog: &Catalog, rng: &mut R) -> Catalog {
    let window = catalog.span().window;
    let events = catalog
        .events()
        .iter()
        .map(|e| Event {
            time: uniform_instant(&window, rng),
            ..e.clone()
        })
        .collect();
    Catalog::from_parts(events, catalog)
}

/// How simulated events get their epicenters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationModel {
    /// Epicenter taken from the resampled mark event.
    #[default]
    Resample,
    /// Area-uniform on the region; only magnitudes come from the marks.
    Uniform,
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::arg(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

fn resampled_event(
    mark: &Event,
    time: Instant,
    region: &Region,
    locations: LocationModel,
    rng: &mut impl Rng,
    id: String,
) -> Event {
    let epicenter = match locations {
        LocationModel::Resample => mark.epicenter,
        LocationModel::Uniform => region.sample(rng),
    };
    Event {
        time,
        epicenter,
        source_id: id,
        ..mark.clone()
    }
}

/// Homogeneous Poisson process on `sv` with `rate_per_s` events per second.
/// Marks (magnitudes, and epicenters under [`LocationModel::Resample`]) are
/// drawn with replacement from `marks`.
pub fn gen_homogeneous_poisson<R: Rng>(
    rate_per_s: f64,
    sv: &StudyVolume,
    marks: &Catalog,
    locations: LocationModel,
    rng: &mut R,
) -> Result<Catalog> {
    if !(rate_per_s >= 0.0 && rate_per_s.is_finite()) {
        return Err(Error::arg(format!("rate must be >= 0, got {rate_per_s}")));
    }
    let n = poisson_count(rate_per_s * sv.duration_s(), rng)?;
    if n > 0 && marks.is_empty() {
        return Err(Error::arg("marks catalog is empty but events were drawn"));
    }
    let mut events = Vec::with_capacity(n as usize);
    for i in 0..n {
        let time = uniform_instant(&sv.window, rng);
        let mark = &marks.events()[rng.random_range(0..marks.len())];
        events.push(resampled_event(
            mark,
            time,
            &sv.region,
            locations,
            rng,
            format!("sim-{i}"),
        ));
    }
    Catalog::new(events, *sv, marks.selector())
}

/// Lat-lon cells partitioning a region, with a rate (events per second) per cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellGrid {
    region: Region,
    cells: Vec<LatLonBox>,
    rates: Vec<f64>,
}

impl CellGrid {
    pub fn new(region: Region, cells: Vec<LatLonBox>, rates: Vec<f64>) -> Result<Self> {
        if cells.len() != rates.len() {
            return Err(Error::arg("one rate per cell is required"));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::arg(format!("cell rates must be >= 0, got {r}")));
        }
        check_partition(&cells, &region)?;
        Ok(CellGrid {
            region,
            cells,
            rates,
        })
    }

    /// Regular grid of `step_deg` boxes covering a box region or the whole sphere.
    pub fn regular_cells(region: &Region, step_deg: f64) -> Result<Vec<LatLonBox>> {
        let bounds = match region {
            Region::GlobalSphere => LatLonBox::new(-90.0, 90.0, -180.0, 180.0)?,
            Region::Box(b) => *b,
            Region::Cap { .. } => {
                return Err(Error::arg("regular grids need a box or global region"))
            }
        };
        if !(step_deg > 0.0) {
            return Err(Error::arg("grid step must be > 0"));
        }
        let edges = |lo: f64, hi: f64| -> Vec<f64> {
            let n = ((hi - lo) / step_deg).ceil().max(1.0) as usize;
            (0..=n)
                .map(|i| {
                    if i == n {
                        hi
                    } else {
                        (lo + i as f64 * step_deg).min(hi)
                    }
                })
                .collect()
        };
        let lats = edges(bounds.lat_min, bounds.lat_max);
        let lons = edges(bounds.lon_min, bounds.lon_max);
        let mut cells = Vec::new();
        for la in lats.windows(2) {
            for lo in lons.windows(2) {
                if la[0] < la[1] && lo[0] < lo[1] {
                    cells.push(LatLonBox::new(la[0], la[1], lo[0], lo[1])?);
                }
            }
        }
        Ok(cells)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn cells(&self) -> &[LatLonBox] {
        &self.cells
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn cell_of(&self, e: &Event) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(e.epicenter))
    }
}

/// Independent homogeneous Poisson processes per cell, locations uniform in
/// the cell, magnitudes resampled from the marks inside that cell (or from
/// all marks when the cell has none).
pub fn gen_heterogeneous_poisson<R: Rng>(
    grid: &CellGrid,
    window: TimeWindow,
    marks: &Catalog,
    rng: &mut R,
) -> Result<Catalog> {
    let duration = window.duration_seconds();
    let mut by_cell = vec![Vec::new(); grid.cells.len()];
    for (i, e) in marks.events().iter().enumerate() {
        if let Some(c) = grid.cell_of(e) {
            by_cell[c].push(i);
        }
    }
    let mut events = Vec::new();
    for (c, cell) in grid.cells.iter().enumerate() {
        let n = poisson_count(grid.rates[c] * duration, rng)?;
        if n == 0 {
            continue;
        }
        if marks.is_empty() {
            return Err(Error::arg("marks catalog is empty but events were drawn"));
        }
        for _ in 0..n {
            let time = uniform_instant(&window, rng);
            let pool = &by_cell[c];
            let mark = if pool.is_empty() {
                &marks.events()[rng.random_range(0..marks.len())]
            } else {
                &marks.events()[pool[rng.random_range(0..pool.len())]]
            };
            let id = format!("sim-{c}-{}", events.len());
            events.push(Event {
                time,
                epicenter: cell.sample(rng),
                source_id: id,
                ..mark.clone()
            });
        }
    }
    Catalog::new(
        events,
        StudyVolume::new(grid.region, window),
        marks.selector(),
    )
}

/// Renewal process with Gamma(shape, mean/shape) gaps, started at the window
/// start and truncated at its end.
pub fn gen_gamma_renewal<R: Rng + ?Sized>(
    shape: f64,
    mean_interval_s: f64,
    window: TimeWindow,
    rng: &mut R,
) -> Result<Vec<Instant>> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::arg(format!("gamma shape must be > 0, got {shape}")));
    }
    if !(mean_interval_s > 0.0 && mean_interval_s.is_finite()) {
        return Err(Error::arg(format!(
            "mean interval must be > 0, got {mean_interval_s}"
        )));
    }
    let gaps = Gamma::new(shape, mean_interval_s / shape).map_err(|e| Error::arg(e.to_string()))?;
    let end = window.end.millis() as f64;
    let mut t = window.start.millis() as f64;
    let mut out = Vec::new();
    loop {
        t += gaps.sample(rng) * 1000.0;
        if t >= end {
            break;
        }
        out.push(Instant::from_millis(t as i64));
    }
    Ok(out)
}

/// Empirical rate per cell: event count divided by the catalog span duration.
pub fn historical_cell_rates(catalog: &Catalog, cells: Vec<LatLonBox>) -> Result<CellGrid> {
    let mut counts = vec![0usize; cells.len()];
    for (i, e) in catalog.events().iter().enumerate() {
        let c = cells
            .iter()
            .position(|c| c.contains(e.epicenter))
            .ok_or_else(|| {
                Error::Partition(format!("event {i} ({}) falls in no cell", e.source_id))
            })?;
        counts[c] += 1;
    }
    let duration = catalog.span().duration_s();
    let rates = counts.into_iter().map(|n| n as f64 / duration).collect();
    CellGrid::new(catalog.span().region, cells, rates)
}
