//! Event logs, fixed-interval binning and fusion of overlapping
//! search-interest segments.
//!
//! Timestamps are epoch seconds. Text timestamps may be plain numbers or
//! ISO-8601 (an explicit offset is honored; otherwise UTC is assumed), but a
//! single file must stick to one of the two forms.

use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StampFormat {
    Epoch,
    Iso,
}

fn parse_stamp(s: &str) -> Option<(StampFormat, f64)> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some((StampFormat::Epoch, v));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some((StampFormat::Iso, dt.timestamp_millis() as f64 / 1000.0));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some((StampFormat::Iso, dt.and_utc().timestamp_millis() as f64 / 1000.0));
        }
    }
    None
}

/// Reads `(line, timestamp, value column)` rows, enforcing one timestamp form.
fn read_stamped<R: Read>(reader: R, time_col: &str, value_col: Option<&str>) -> Result<Vec<(u64, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing `{name}` column") })
    };
    let tc = find(time_col)?;
    let vc = value_col.map(find).transpose()?;
    let mut format = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let raw = rec.get(tc).unwrap_or("");
        let (f, t) =
            parse_stamp(raw).ok_or_else(|| Error::Parse { line, message: format!("bad timestamp `{raw}`") })?;
        match format {
            None => format = Some(f),
            Some(prev) if prev != f => {
                return Err(Error::Parse { line, message: format!("timestamp `{raw}` mixes epoch and ISO-8601 forms") })
            }
            _ => {}
        }
        let value = match vc {
            Some(c) => {
                let s = rec.get(c).unwrap_or("");
                s.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("bad value `{s}`: {e}") })?
            }
            None => 0.0,
        };
        rows.push((line, t, value));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

/// Sorted event times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventLog {
    timestamps: Vec<f64>,
}

impl EventLog {
    pub fn new(mut timestamps: Vec<f64>) -> Result<Self> {
        if timestamps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("event log has non-finite timestamps".into()));
        }
        timestamps.sort_by(f64::total_cmp);
        Ok(Self { timestamps })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

/// CSV with a `timestamp` column.
pub fn read_event_log<R: Read>(reader: R) -> Result<EventLog> {
    let rows = read_stamped(reader, "timestamp", None)?;
    EventLog::new(rows.into_iter().map(|r| r.1).collect())
}

pub fn load_event_log(path: &Path) -> Result<EventLog> {
    read_event_log(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCounts {
    pub series: TimeSeries,
    /// Events before `t0` or at/after the end of the last bin.
    pub out_of_range: usize,
}

/// Counts per half-open bin `[t0 + k b, t0 + (k+1) b)`.
pub fn bin_counts(log: &EventLog, bin_seconds: f64, t0: f64, n_bins: usize) -> Result<BinnedCounts> {
    if !(bin_seconds.is_finite() && bin_seconds > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidInput(format!("bad binning: width {bin_seconds}, start {t0}")));
    }
    if n_bins < 2 {
        return Err(Error::TooShort { len: n_bins, min: 2 });
    }
    let mut counts = vec![0.0; n_bins];
    let mut out_of_range = 0;
    for &t in &log.timestamps {
        let k = ((t - t0) / bin_seconds).floor();
        if k >= 0.0 && k < n_bins as f64 {
            counts[k as usize] += 1.0;
        } else {
            out_of_range += 1;
        }
    }
    Ok(BinnedCounts { series: TimeSeries::new(counts, bin_seconds, t0)?, out_of_range })
}

/// `length` consecutive samples starting at `start`.
pub fn slice_period(s: &TimeSeries, start: usize, length: usize) -> Result<TimeSeries> {
    let end = start.checked_add(length).ok_or(Error::OutOfRange { start, end: usize::MAX, len: s.len() })?;
    if end > s.len() {
        return Err(Error::OutOfRange { start, end, len: s.len() });
    }
    if length < 4 {
        return Err(Error::TooShort { len: length, min: 4 });
    }
    TimeSeries::new(s.values()[start..end].to_vec(), s.dt(), s.time(start))
}

/// Search interest on a regular grid, scaled so that its maximum is 100.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSegment {
    pub start: f64,
    pub step: f64,
    values: Vec<f64>,
}

impl TrendSegment {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(start.is_finite() && step.is_finite() && step > 0.0) {
            return Err(Error::InvalidInput(format!("bad segment grid: start {start}, step {step}")));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("trend values must be finite and non-negative".into()));
        }
        let max = values.iter().fold(0.0f64, |a, &v| a.max(v));
        if (max - 100.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("trend segment maximum is {max}, expected 100")));
        }
        Ok(Self { start, step, values })
    }

    /// Rescales arbitrary non-negative data to maximum 100.
    pub fn normalized(start: f64, step: f64, raw: &[f64]) -> Result<Self> {
        let max = raw.iter().fold(0.0f64, |a, &v| a.max(v));
        if !(max > 0.0 && max.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize an all-zero segment".into()));
        }
        let values = raw.iter().map(|&v| if v == max { 100.0 } else { v * 100.0 / max }).collect();
        Self::new(start, step, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// CSV with columns `datetime,value` on a regular grid.
pub fn read_trend_segment<R: Read>(reader: R) -> Result<TrendSegment> {
    let rows = read_stamped(reader, "datetime", Some("value"))?;
    let start = rows[0].1;
    let step = if rows.len() > 1 { rows[1].1 - rows[0].1 } else { 3600.0 };
    if !(step > 0.0) {
        return Err(Error::Parse { line: rows[1].0, message: "timestamps must increase".into() });
    }
    for (k, &(line, t, _)) in rows.iter().enumerate() {
        if (t - (start + k as f64 * step)).abs() > 1e-6 * step {
            return Err(Error::Parse { line, message: format!("timestamp off the {step}-second grid") });
        }
    }
    TrendSegment::new(start, step, rows.into_iter().map(|r| r.2).collect())
}

pub fn load_trend_segment(path: &Path) -> Result<TrendSegment> {
    read_trend_segment(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusedTrend {
    pub series: TimeSeries,
    /// Factor applied to everything accumulated before segment `j + 1`.
    pub anchor_ratios: Vec<f64>,
    /// Final rescaling to maximum 100.
    pub final_scale: f64,
}

/// Chains segments left to right. At the first timestamp shared with the
/// next segment, the accumulated series is scaled by `later / earlier`;
/// overlapping samples then take the later segment's values.
///
/// A zero on either side of the anchor falls back to the ratio of means over
/// the whole overlap.
pub fn fuse_trends(segments: &[TrendSegment]) -> Result<FusedTrend> {
    let first = segments.first().ok_or(Error::EmptyInput)?;
    let step = first.step;
    if segments.iter().any(|s| (s.step - step).abs() > 1e-9 * step) {
        return Err(Error::InvalidInput("trend segments use different steps".into()));
    }
    let origin = first.start;
    let mut acc = first.values.clone();
    let mut anchor_ratios = Vec::with_capacity(segments.len().saturating_sub(1));
    for (j, seg) in segments.iter().enumerate().skip(1) {
        let no_overlap = Error::NoOverlap { earlier: j - 1, later: j };
        let pos = (seg.start - origin) / step;
        let offset = pos.round();
        if (pos - offset).abs() > 1e-6 || offset < 0.0 || offset as usize >= acc.len() {
            return Err(no_overlap);
        }
        let offset = offset as usize;
        let (a, b) = (acc[offset], seg.values[0]);
        let ratio = if a > 0.0 && b > 0.0 {
            b / a
        } else {
            let overlap = (acc.len() - offset).min(seg.len());
            let mean_a = acc[offset..offset + overlap].iter().sum::<f64>() / overlap as f64;
            let mean_b = seg.values[..overlap].iter().sum::<f64>() / overlap as f64;
            if mean_a > 0.0 && mean_b > 0.0 {
                mean_b / mean_a
            } else {
                return Err(Error::ZeroAnchor { earlier: j - 1, later: j });
            }
        };
        acc.iter_mut().for_each(|v| *v *= ratio);
        let tail_start = offset + seg.len();
        let tail: Vec<f64> = if tail_start < acc.len() { acc[tail_start..].to_vec() } else { Vec::new() };
        acc.truncate(offset);
        acc.extend_from_slice(&seg.values);
        acc.extend(tail);
        anchor_ratios.push(ratio);
    }
    let max = acc.iter().fold(0.0f64, |a, &v| a.max(v));
    let final_scale = if max > 0.0 { 100.0 / max } else { 1.0 };
    for v in acc.iter_mut() {
        *v = if *v == max { 100.0 } else { *v * final_scale };
    }
    Ok(FusedTrend { series: TimeSeries::new(acc, step, origin)?, anchor_ratios, final_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_sorted_and_errors() {
        let log = read_event_log("timestamp\n30\n10\n20\n".as_bytes()).unwrap();
        assert_eq!(log.timestamps(), &[10.0, 20.0, 30.0]);
        assert!(matches!(read_event_log("".as_bytes()), Err(Error::EmptyInput)));
        assert!(matches!(read_event_log("timestamp\n".as_bytes()), Err(Error::EmptyInput)));
        let mixed = "timestamp\n2024-01-01T00:00:00Z\n2024-01-01T00:10:00Z\n1704067800\n";
        assert!(matches!(read_event_log(mixed.as_bytes()), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn iso_forms() {
        let log = read_event_log(
            "timestamp\n1970-01-01T00:01:00Z\n1970-01-01 00:02:00\n1970-01-01T01:03:00+01:00\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(log.timestamps(), &[60.0, 120.0, 180.0]);
    }

    #[test]
    fn binning() {
        let log = EventLog::new(vec![0.0, 1.0, 2.0, 3.0, 4.0, 10.0, -1.0, 20.0]).unwrap();
        let b = bin_counts(&log, 10.0, 0.0, 2).unwrap();
        assert_eq!(b.series.values(), &[5.0, 1.0]);
        assert_eq!(b.out_of_range, 2);
    }

    #[test]
    fn slicing() {
        let s = TimeSeries::new((0..10).map(f64::from).collect(), 2.0, 100.0).unwrap();
        let sl = slice_period(&s, 3, 4).unwrap();
        assert_eq!(sl.values(), &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(sl.origin(), 106.0);
        assert_eq!(slice_period(&s, 0, 10).unwrap(), s);
        assert!(matches!(slice_period(&s, 7, 4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn fusion_halves_earlier_segment() {
        let a = TrendSegment::new(0.0, 1.0, vec![100.0, 80.0]).unwrap();
        let b = TrendSegment::new(1.0, 1.0, vec![40.0, 100.0]).unwrap();
        let f = fuse_trends(&[a, b]).unwrap();
        assert_eq!(f.anchor_ratios, vec![0.5]);
        assert_eq!(f.series.values(), &[50.0, 40.0, 100.0]);
        assert_eq!(f.final_scale, 1.0);
    }

    #[test]
    fn zero_anchor_fallback() {
        let a = TrendSegment::new(0.0, 1.0, vec![100.0, 0.0, 50.0]).unwrap();
        let b = TrendSegment::new(1.0, 1.0, vec![10.0, 25.0, 100.0]).unwrap();
        let f = fuse_trends(&[a.clone(), b]).unwrap();
        assert_abs_diff_eq!(f.anchor_ratios[0], 17.5 / 25.0, epsilon = 1e-15);
        let z = TrendSegment::new(1.0, 1.0, vec![0.0, 0.0, 100.0]).unwrap();
        let a2 = TrendSegment::new(0.0, 1.0, vec![100.0, 0.0, 0.0]).unwrap();
        assert!(matches!(fuse_trends(&[a2, z]), Err(Error::ZeroAnchor { earlier: 0, later: 1 })));
        let far = TrendSegment::new(10.0, 1.0, vec![100.0]).unwrap();
        assert!(matches!(fuse_trends(&[a, far]), Err(Error::NoOverlap { earlier: 0, later: 1 })));
    }

    #[test]
    fn trend_csv() {
        let seg = read_trend_segment("datetime,value\n2024-01-01T00:00:00Z,50\n2024-01-01T01:00:00Z,100\n".as_bytes())
            .unwrap();
        assert_eq!(seg.step, 3600.0);
        assert_eq!(seg.values(), &[50.0, 100.0]);
        assert!(read_trend_segment("datetime,value\n0,50\n3600,90\n".as_bytes()).is_err());
        assert!(read_trend_segment("datetime,value\n0,50\n3600,100\n9000,1\n".as_bytes()).is_err());
    }
}
