//! Binomial tail for "S or more of Q events fell inside alarms", with the
//! alarm measure taken as uniform time times normalized counting measure over
//! historical epicenters.

use crate::alarm::AlarmSet;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::time::TimeWindow;
use crate::GeoPoint;

/// `P(X >= s)` for `X ~ Binomial(q, pi)`, summed in log space.
pub fn binomial_tail_pvalue<T: Real>(s: u64, q: u64, pi: T) -> Result<T> {
    if !(pi >= T::zero() && pi <= T::one()) {
        return Err(Error::arg(format!("pi must lie in [0, 1], got {pi}")));
    }
    if s > q {
        return Err(Error::arg(format!("S = {s} exceeds Q = {q}")));
    }
    if s == 0 {
        return Ok(T::one());
    }
    if pi == T::zero() {
        return Ok(T::zero());
    }
    if pi == T::one() {
        return Ok(T::one());
    }
    let ln_p = pi.ln();
    let ln_q = (-pi).ln_1p();
    // ln C(q, x) built up incrementally from ln C(q, s).
    let mut ln_choose = ln_binomial::<T>(q, s);
    let mut terms = Vec::with_capacity((q - s + 1) as usize);
    for x in s..=q {
        if x > s {
            ln_choose =
                ln_choose + T::from_u64(q - x + 1).unwrap().ln() - T::from_u64(x).unwrap().ln();
        }
        terms.push(ln_choose + T::from_u64(x).unwrap() * ln_p + T::from_u64(q - x).unwrap() * ln_q);
    }
    let max = terms.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = terms
        .iter()
        .fold(T::zero(), |acc, &t| acc + (t - max).exp());
    Ok((max + sum.ln()).exp().min(T::one()))
}

fn ln_binomial<T: Real>(n: u64, k: u64) -> T {
    let k = k.min(n - k);
    (0..k).fold(T::zero(), |acc, i| {
        acc + T::from_u64(n - i).unwrap().ln() - T::from_u64(i + 1).unwrap().ln()
    })
}

/// Normalized alarm measure: the average over historical epicenters of the
/// fraction of `window` during which the epicenter lies inside some alarm.
/// Interval unions are computed exactly.
pub fn alarm_measure_pi(
    aset: &AlarmSet,
    epicenters: &[GeoPoint],
    window: TimeWindow,
) -> Result<f64> {
    if epicenters.is_empty() {
        return Err(Error::arg("at least one historical epicenter is required"));
    }
    let len = window.duration_millis() as f64;
    let caps: Vec<_> = aset
        .alarms()
        .iter()
        .map(|a| crate::geo::Cap::new(a.center, a.radius_km))
        .collect();
    let total: f64 = epicenters
        .iter()
        .map(|p| {
            let u = p.to_unit();
            let mut spans: Vec<(i64, i64)> = aset
                .alarms()
                .iter()
                .zip(&caps)
                .filter(|(_, cap)| cap.contains_unit(&u))
                .map(|(a, _)| {
                    (
                        a.t_start.max(window.start).millis(),
                        a.t_end.min(window.end).millis(),
                    )
                })
                .filter(|(s, e)| s < e)
                .collect();
            union_length(&mut spans) as f64 / len
        })
        .sum();
    Ok(total / epicenters.len() as f64)
}

fn union_length(spans: &mut [(i64, i64)]) -> i64 {
    spans.sort_unstable();
    let mut total = 0;
    let mut current: Option<(i64, i64)> = None;
    for &(s, e) in spans.iter() {
        match current {
            Some((cs, ce)) if s <= ce => current = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                current = Some((s, e));
            }
            None => current = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = current {
        total += ce - cs;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alarm::Alarm;
    use crate::geo::Point;
    use crate::time::{Instant, MS_PER_DAY};
    use proptest::prelude::*;

    #[test]
    fn full_tail_and_certain_success() {
        assert_eq!(binomial_tail_pvalue(0, 7, 0.3).unwrap(), 1.0);
        assert_eq!(binomial_tail_pvalue(5, 5, 1.0).unwrap(), 1.0);
        assert_eq!(binomial_tail_pvalue(1, 5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn two_fair_coins() {
        assert!((binomial_tail_pvalue(1, 2, 0.5f64).unwrap() - 0.75).abs() < 1e-15);
        assert!((binomial_tail_pvalue(1, 2, 0.5f32).unwrap() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(binomial_tail_pvalue(1, 2, 1.5).is_err());
        assert!(binomial_tail_pvalue(1, 2, f64::NAN).is_err());
        assert!(binomial_tail_pvalue(3, 2, 0.5).is_err());
    }

    #[test]
    fn large_q_tail_is_finite() {
        let p = binomial_tail_pvalue(300, 2000, 3.9e-4f64).unwrap();
        assert!((0.0..1e-100).contains(&p));
        let p = binomial_tail_pvalue(1, 2000, 3.9e-4f64).unwrap();
        let exact = 1.0 - (1.0 - 3.9e-4f64).powi(2000);
        assert!((p - exact).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn monotone_in_s_and_pi(q in 1u64..60, s in 1u64..60, pi in 0.0f64..1.0, dpi in 0.0f64..0.5) {
            let s = s.min(q);
            let a = binomial_tail_pvalue(s, q, pi).unwrap();
            if s < q {
                prop_assert!(binomial_tail_pvalue(s + 1, q, pi).unwrap() <= a + 1e-12);
            }
            let pi2 = (pi + dpi).min(1.0);
            prop_assert!(binomial_tail_pvalue(s, q, pi2).unwrap() + 1e-12 >= a);
        }
    }

    fn day(d: i64) -> Instant {
        Instant::from_ymd(2004, 1, 1)
            .unwrap()
            .plus_millis(d * MS_PER_DAY)
    }

    fn window() -> TimeWindow {
        TimeWindow::new(day(0), day(100)).unwrap()
    }

    fn alarm(lat: f64, from: i64, to: i64) -> Alarm {
        Alarm::new(Point::new(lat, 0.0).unwrap(), 50.0, day(from), day(to), 0.0).unwrap()
    }

    #[test]
    fn measure_full_and_empty() {
        let pts = [Point::new(0.0, 0.0).unwrap(), Point::new(0.1, 0.0).unwrap()];
        let full = AlarmSet::external(vec![alarm(0.0, 0, 60), alarm(0.0, 50, 100)]);
        assert!((alarm_measure_pi(&full, &pts, window()).unwrap() - 1.0).abs() < 1e-15);
        let far = AlarmSet::external(vec![alarm(30.0, 0, 100)]);
        assert_eq!(alarm_measure_pi(&far, &pts, window()).unwrap(), 0.0);
        assert!(alarm_measure_pi(&far, &[], window()).is_err());
    }

    #[test]
    fn measure_half_and_never() {
        let pts = [
            Point::new(0.0, 0.0).unwrap(),
            Point::new(45.0, 0.0).unwrap(),
        ];
        let a = AlarmSet::external(vec![alarm(0.0, 0, 30), alarm(0.0, 20, 50)]);
        assert!((alarm_measure_pi(&a, &pts, window()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn measure_invariant_to_order_and_monotone() {
        let pts: Vec<GeoPoint> = (0..8)
            .map(|i| Point::new(i as f64 * 0.2, 0.0).unwrap())
            .collect();
        let alarms = vec![
            alarm(0.0, 0, 10),
            alarm(0.5, 5, 40),
            alarm(1.0, 30, 70),
            alarm(1.3, 60, 90),
        ];
        let base = alarm_measure_pi(&AlarmSet::external(alarms.clone()), &pts, window()).unwrap();
        let mut rev = alarms.clone();
        rev.reverse();
        let mut rpts = pts.clone();
        rpts.reverse();
        assert!(
            (alarm_measure_pi(&AlarmSet::external(rev), &rpts, window()).unwrap() - base).abs()
                < 1e-15
        );
        let mut more = alarms;
        more.push(alarm(0.8, 80, 100));
        assert!(alarm_measure_pi(&AlarmSet::external(more), &pts, window()).unwrap() >= base);
    }
}
