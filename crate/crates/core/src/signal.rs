//! Magnitude spectra of sampled activity signals.
//!
//! Frequencies are reported as integer indices `f`, with angular frequency
//! `2 pi f / N` for an `N`-sample series at unit spacing. Normalized spectra
//! drop the DC bin and sum to one, so the mean level and the overall scale of
//! a signal never show up in them.

use std::io::Write;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::io::fmt_f64;

/// Smoothing window of the time-domain panel in [`beat_demo`].
pub const BEAT_DEMO_WINDOW: usize = 64;

/// Evenly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
    origin: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt: f64, origin: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort { len: values.len(), min: 2 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("time series has non-finite values".into()));
        }
        if !(dt.is_finite() && dt > 0.0) || !origin.is_finite() {
            return Err(Error::InvalidInput(format!("bad sampling: dt = {dt}, origin = {origin}")));
        }
        Ok(Self { values, dt, origin })
    }

    /// Unit spacing starting at zero.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1.0, 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.dt
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { values, dt: self.dt, origin: self.origin }
    }
}

/// Magnitudes over frequency indices. Raw spectra cover `0..=N/2`;
/// normalized ones cover `1..=N/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    bins: Vec<f64>,
    n_samples: usize,
    normalized: bool,
}

impl Spectrum {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Frequency index of the first stored bin.
    pub fn first_index(&self) -> usize {
        usize::from(self.normalized)
    }

    /// Largest frequency index, `N/2`.
    pub fn max_index(&self) -> usize {
        self.n_samples / 2
    }

    pub fn frequency_index(&self, position: usize) -> usize {
        position + self.first_index()
    }

    /// Magnitude at frequency index `f`, zero when `f` is not stored.
    pub fn magnitude_at(&self, f: usize) -> f64 {
        f.checked_sub(self.first_index()).and_then(|p| self.bins.get(p)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    /// `(f, magnitude)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bins.iter().enumerate().map(move |(p, &m)| (p + self.first_index(), m))
    }

    /// Frequency index of the largest magnitude (lowest index on ties).
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (p, &m) in self.bins.iter().enumerate() {
            if m > self.bins[best] {
                best = p;
            }
        }
        self.frequency_index(best)
    }

    /// Up to `k` local maxima, largest first.
    pub fn top_peaks(&self, k: usize) -> Vec<usize> {
        let b = &self.bins;
        let mut peaks: Vec<usize> = (0..b.len())
            .filter(|&p| {
                let left = p == 0 || b[p] > b[p - 1];
                let right = p + 1 == b.len() || b[p] >= b[p + 1];
                left && right && b[p] > 0.0
            })
            .collect();
        peaks.sort_by(|&x, &y| b[y].total_cmp(&b[x]).then(x.cmp(&y)));
        peaks.into_iter().take(k).map(|p| self.frequency_index(p)).collect()
    }

    /// Sum of magnitudes for frequency indices in `lo..=hi`.
    pub fn band_mass(&self, lo: usize, hi: usize) -> f64 {
        self.iter().filter(|&(f, _)| f >= lo && f <= hi).map(|(_, m)| m).sum()
    }
}

/// `|X_k|` for `k = 0..=N/2`, optionally zero-padded to `pad_to` samples.
pub fn fft_magnitudes(values: &[f64], pad_to: usize) -> Vec<f64> {
    let n = values.len().max(pad_to);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|z| z.norm()).collect()
}

pub fn dft_spectrum(s: &TimeSeries) -> Result<Spectrum> {
    let n = s.len();
    if n < 4 {
        return Err(Error::TooShort { len: n, min: 4 });
    }
    Ok(Spectrum { bins: fft_magnitudes(s.values(), 0), n_samples: n, normalized: false })
}

/// Drops the DC bin and scales the rest to sum to one.
///
/// Non-DC content below `1e-12 |X_0|` counts as rounding noise, so a
/// constant series fails with [`Error::AllZero`].
pub fn normalize_spectrum(sp: &Spectrum) -> Result<Spectrum> {
    if sp.normalized {
        return Ok(sp.clone());
    }
    let dc = sp.bins[0];
    let rest = &sp.bins[1..];
    let sum: f64 = rest.iter().sum();
    if sum == 0.0 || sum <= 1e-12 * dc.abs() {
        return Err(Error::AllZero);
    }
    Ok(Spectrum { bins: rest.iter().map(|m| m / sum).collect(), n_samples: sp.n_samples, normalized: true })
}

/// Centered moving average; near the ends the window shrinks symmetrically
/// so that it stays centered on the sample.
pub fn centered_moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let len = values.len();
    let hl = (window - 1) / 2;
    let hr = window / 2;
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0.0);
    for &v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..len)
        .map(|i| {
            let cut = (hl - hl.min(i)).max(hr - hr.min(len - 1 - i));
            let (left, right) = (hl.saturating_sub(cut), hr.saturating_sub(cut));
            let (a, b) = (i - left, i + right + 1);
            if a + 1 == b {
                values[i]
            } else {
                (prefix[b] - prefix[a]) / (b - a) as f64
            }
        })
        .collect()
}

fn check_window(window: usize, len: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    if window > len {
        return Err(Error::WindowTooLarge { window, len });
    }
    Ok(())
}

pub fn smooth_spectrum(sp: &Spectrum, window: usize) -> Result<Spectrum> {
    check_window(window, sp.bins.len())?;
    let mut bins = centered_moving_average(&sp.bins, window);
    if sp.normalized {
        let sum: f64 = bins.iter().sum();
        if sum > 0.0 {
            bins.iter_mut().for_each(|b| *b /= sum);
        }
    }
    Ok(Spectrum { bins, n_samples: sp.n_samples, normalized: sp.normalized })
}

pub fn square_series(s: &TimeSeries) -> TimeSeries {
    s.with_values(s.values.iter().map(|v| v * v).collect())
}

pub fn smooth_series(s: &TimeSeries, window: usize) -> Result<TimeSeries> {
    check_window(window, s.len())?;
    Ok(s.with_values(centered_moving_average(&s.values, window)))
}

/// Mass at frequency indices `<= cutoff` of a normalized spectrum.
pub fn low_freq_share(sp: &Spectrum, cutoff: usize) -> Result<f64> {
    if !sp.normalized {
        return Err(Error::InvalidInput("low-frequency share needs a normalized spectrum".into()));
    }
    if cutoff < 1 || cutoff > sp.max_index() {
        return Err(Error::BadCutoff { cutoff, max_bin: sp.max_index() });
    }
    Ok(sp.band_mass(1, cutoff))
}

/// Spectrum, then normalization, then a `window`-bin moving average.
pub fn analyze_period(s: &TimeSeries, window: usize) -> Result<Spectrum> {
    smooth_spectrum(&normalize_spectrum(&dft_spectrum(s)?)?, window)
}

#[derive(Debug, Clone)]
pub struct BeatPanel {
    pub label: char,
    pub series: TimeSeries,
    pub spectrum: Spectrum,
}

/// Two tones, their sum, the squared sum and its moving average.
#[derive(Debug, Clone)]
pub struct BeatDemo {
    pub omega1: f64,
    pub omega2: f64,
    pub panels: Vec<BeatPanel>,
}

impl BeatDemo {
    pub fn panel(&self, label: char) -> &BeatPanel {
        self.panels.iter().find(|p| p.label == label).expect("panels a..e exist")
    }

    /// Writes `signal_<label>.csv` and `spectrum_<label>.csv` for every panel.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for p in &self.panels {
            let sig = dir.join(format!("signal_{}.csv", p.label));
            write_series_csv(&p.series, std::io::BufWriter::new(std::fs::File::create(&sig)?))?;
            written.push(sig);
            let spec = dir.join(format!("spectrum_{}.csv", p.label));
            write_spectrum_csv(&p.spectrum, std::io::BufWriter::new(std::fs::File::create(&spec)?))?;
            written.push(spec);
        }
        Ok(written)
    }
}

pub fn beat_demo(omega1: f64, omega2: f64, n: usize) -> Result<BeatDemo> {
    for w in [omega1, omega2] {
        if !(w > 0.0 && w < std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!("frequency {w} outside (0, pi)")));
        }
    }
    if n < 256 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!("length {n} must be a power of two >= 256")));
    }
    let tone = |w: f64| TimeSeries::from_values((0..n).map(|t| (w * t as f64).cos()).collect());
    let a = tone(omega1)?;
    let b = tone(omega2)?;
    let c = a.with_values(a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect());
    let d = square_series(&c);
    let e = smooth_series(&d, BEAT_DEMO_WINDOW)?;
    let panels = ['a', 'b', 'c', 'd', 'e']
        .into_iter()
        .zip([a, b, c, d, e])
        .map(|(label, series)| {
            let spectrum = normalize_spectrum(&dft_spectrum(&series)?)?;
            Ok(BeatPanel { label, series, spectrum })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeatDemo { omega1, omega2, panels })
}

/// Geometric frequency bands `[f_lo, f_hi)` with summed magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogBin {
    pub f_lo: usize,
    pub f_hi: usize,
    pub f_center: f64,
    pub magnitude: f64,
}

pub fn log_bins(sp: &Spectrum, bins_per_decade: usize) -> Vec<LogBin> {
    let step = 10f64.powf(1.0 / bins_per_decade.max(1) as f64);
    let first = sp.first_index().max(1);
    let last = sp.max_index();
    let mut out = Vec::new();
    let mut lo = first;
    let mut edge = first as f64;
    while lo <= last {
        edge *= step;
        let hi = (edge.ceil() as usize).max(lo + 1).min(last + 1);
        if edge.ceil() as usize <= lo {
            continue;
        }
        let magnitude = sp.band_mass(lo, hi - 1);
        out.push(LogBin { f_lo: lo, f_hi: hi, f_center: ((lo * (hi - 1)) as f64).sqrt(), magnitude });
        lo = hi;
    }
    out
}

/// CSV with columns `bin_index,frequency_index_f,magnitude`.
pub fn write_spectrum_csv<W: Write>(sp: &Spectrum, mut out: W) -> Result<()> {
    writeln!(out, "bin_index,frequency_index_f,magnitude")?;
    for (p, (f, m)) in sp.iter().enumerate() {
        writeln!(out, "{p},{f},{}", fmt_f64(m))?;
    }
    Ok(())
}

/// CSV with columns `f_lo,f_hi,f_center,magnitude`.
pub fn write_log_binned_csv<W: Write>(sp: &Spectrum, bins_per_decade: usize, mut out: W) -> Result<()> {
    writeln!(out, "f_lo,f_hi,f_center,magnitude")?;
    for b in log_bins(sp, bins_per_decade) {
        writeln!(out, "{},{},{},{}", b.f_lo, b.f_hi, fmt_f64(b.f_center), fmt_f64(b.magnitude))?;
    }
    Ok(())
}

/// CSV with columns `t,value`.
pub fn write_series_csv<W: Write>(s: &TimeSeries, mut out: W) -> Result<()> {
    writeln!(out, "t,value")?;
    for (k, v) in s.values.iter().enumerate() {
        writeln!(out, "{},{}", fmt_f64(s.time(k)), fmt_f64(*v))?;
    }
    Ok(())
}

/// Reads a series from a CSV with a `value` column, or a single unnamed
/// column. Blank files fail with [`Error::EmptyInput`].
pub fn read_series_csv<R: std::io::Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (col, has_header) = match headers.iter().position(|h| h == "value") {
        Some(c) => (c, true),
        None if headers.len() == 1 && headers[0].parse::<f64>().is_ok() => (0, false),
        None => (headers.len() - 1, true),
    };
    let mut values = Vec::new();
    if !has_header {
        values.push(headers[0].parse::<f64>().expect("checked above"));
    }
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = rec.get(col).ok_or(Error::Parse { line, message: "missing value column".into() })?;
        values.push(field.parse::<f64>().map_err(|e| Error::Parse { line, message: e.to_string() })?);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    TimeSeries::from_values(values)
}
