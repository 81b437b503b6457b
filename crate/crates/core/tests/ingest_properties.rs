use netosc::ingest::{bin_counts, fuse_trends, slice_period, EventLog, TrendSegment};
use netosc::random::seeded;
use netosc::signal::{analyze_period, TimeSeries};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn boundary_event_goes_to_later_bin() {
    let log = EventLog::new(vec![960.0]).unwrap();
    let b = bin_counts(&log, 960.0, 0.0, 4).unwrap();
    assert_eq!(b.series.values(), &[0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn uniform_activity_is_flat() {
    // one event per minute on average, exponential gaps
    let mut rng = seeded(2024);
    let mut t = 0.0;
    let mut stamps = Vec::new();
    while t < 256.0 * 960.0 {
        t += -60.0 * (1.0 - rng.random::<f64>()).ln();
        stamps.push(t);
    }
    let b = bin_counts(&EventLog::new(stamps).unwrap(), 960.0, 0.0, 256).unwrap();
    let mean = b.series.values().iter().sum::<f64>() / 256.0;
    assert!((mean / 16.0 - 1.0).abs() < 0.2, "mean {mean}");
    let sp = analyze_period(&b.series, 20).unwrap();
    let mut sorted = sp.bins().to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    assert!(sp.bins().iter().all(|&m| m <= 3.0 * median));
}

#[test]
fn three_segment_chain() {
    let a = TrendSegment::new(0.0, 3600.0, vec![20.0, 100.0, 100.0]).unwrap();
    let b = TrendSegment::new(7200.0, 3600.0, vec![50.0, 100.0, 50.0]).unwrap();
    let c = TrendSegment::new(14400.0, 3600.0, vec![100.0, 30.0]).unwrap();
    let f = fuse_trends(&[a, b, c]).unwrap();
    assert_eq!(f.anchor_ratios, vec![0.5, 2.0]);
    // hand chain: a scaled by 0.5 then 2, b scaled by 2, c as is
    let expected = [20.0, 100.0, 100.0, 200.0, 100.0, 30.0];
    assert_eq!(f.final_scale, 0.5);
    for (v, e) in f.series.values().iter().zip(expected) {
        assert!((v - e * 0.5).abs() < 1e-12);
    }
}

#[test]
fn identical_segments_fuse_to_themselves() {
    let a = TrendSegment::new(0.0, 3600.0, vec![10.0, 100.0, 40.0]).unwrap();
    let f = fuse_trends(&[a.clone(), a.clone()]).unwrap();
    assert_eq!(f.series.values(), a.values());
}

proptest! {
    #[test]
    fn binning_conserves_in_range_events(stamps in proptest::collection::vec(-100.0f64..2000.0, 0..200), width in 1.0f64..50.0, n in 2usize..40) {
        let log = EventLog::new(stamps.clone()).unwrap();
        let b = bin_counts(&log, width, 0.0, n).unwrap();
        let inside = stamps.iter().filter(|&&t| t >= 0.0 && t < n as f64 * width).count();
        prop_assert_eq!(b.series.values().iter().sum::<f64>() as usize, inside);
        prop_assert_eq!(b.out_of_range, stamps.len() - inside);
    }

    #[test]
    fn slicing_composes(len in 10usize..200, a in 0usize..50, la in 8usize..100, b in 0usize..50, lb in 4usize..50) {
        let s = TimeSeries::new((0..len).map(|k| k as f64).collect(), 0.5, 3.0).unwrap();
        if let Ok(first) = slice_period(&s, a, la) {
            if let Ok(second) = slice_period(&first, b, lb) {
                prop_assert_eq!(second, slice_period(&s, a + b, lb).unwrap());
            }
        }
    }

    #[test]
    fn fused_max_is_100(raw in proptest::collection::vec(proptest::collection::vec(0.5f64..10.0, 3..8), 1..5)) {
        let segs: Vec<TrendSegment> = raw
            .iter()
            .scan(0.0, |start, vals| {
                let seg = TrendSegment::normalized(*start, 1.0, vals).unwrap();
                *start += (vals.len() - 1) as f64;
                Some(seg)
            })
            .collect();
        let f = fuse_trends(&segs).unwrap();
        let max = f.series.values().iter().cloned().fold(0.0, f64::max);
        prop_assert!((max - 100.0).abs() <= 1e-9);
        // scaling raw data before normalization changes nothing
        let again: Vec<TrendSegment> = raw
            .iter()
            .scan(0.0, |start, vals| {
                let scaled: Vec<f64> = vals.iter().map(|v| v * 7.3).collect();
                let seg = TrendSegment::normalized(*start, 1.0, &scaled).unwrap();
                *start += (vals.len() - 1) as f64;
                Some(seg)
            })
            .collect();
        let g = fuse_trends(&again).unwrap();
        for (x, y) in f.series.values().iter().zip(g.series.values()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}
