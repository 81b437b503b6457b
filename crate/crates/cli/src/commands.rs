use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use netosc::dynamics::{
    betweenness_weights, epsilon_sweep, integrate_numeric, link_betweenness, modal_solve, node_energies,
    oscillation_centrality, total_energy_series, write_energy_csv, write_trajectory_csv, InitialCondition, Trajectory,
    UndirectedGraph,
};
use netosc::graph::io::{load_graph, write_laplacian_csv, GraphDocument, GraphInput};
use netosc::graph::{check_symmetrizable, compose_epsilon, gershgorin_disk, laplacian_of};
use netosc::ingest::{bin_counts, fuse_trends, load_event_log, load_trend_segment, slice_period};
use netosc::random;
use netosc::signal::{
    analyze_period, beat_demo, low_freq_share, read_series_csv, write_log_binned_csv, write_series_csv,
    write_spectrum_csv, Spectrum, TimeSeries,
};
use netosc::spectral::{critical_epsilon, eigendecompose, mode_frequencies, spectrum_is_real, write_spectrum_report};
use netosc::Error;

use crate::report::{num, CliError, CliResult, Report};

fn load_input(report: &mut Report, path: &Path) -> CliResult<GraphInput> {
    report.input(path)?;
    Ok(load_graph(path)?)
}

fn initial_condition(x0: &[f64], v0: &Option<Vec<f64>>, n: usize) -> CliResult<InitialCondition> {
    let v0 = v0.clone().unwrap_or_else(|| vec![0.0; x0.len()]);
    let ic = InitialCondition::new(x0.to_vec(), v0)?;
    if ic.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ic.dim() }.into());
    }
    Ok(ic)
}

fn complex_list(values: &[netosc::spectral::C64]) -> Value {
    Value::Array(values.iter().map(|z| json!([num(z.re), num(z.im)])).collect())
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeGraphArgs {
    /// Graph file (.json document or .csv edge list)
    #[arg(long, env = "NETOSC_GRAPH")]
    pub graph: PathBuf,
    /// Relative tolerance of the symmetrizability test
    #[arg(long, env = "NETOSC_SYM_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    /// Directory for laplacian.csv and spectrum.csv
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn analyze_graph(args: &AnalyzeGraphArgs, report: &mut Report) -> CliResult<()> {
    let input = load_input(report, &args.graph)?;
    let lap = input.laplacian();
    let symmetrizable = match check_symmetrizable(&lap, args.tol) {
        Ok(dec) => json!({ "symmetrizable": true, "mass": dec.mass() }),
        Err(e @ (Error::NotSymmetrizable(_) | Error::DisconnectedGraph { .. })) => {
            json!({ "symmetrizable": false, "reason": e.kind(), "detail": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    let es = eigendecompose(lap.matrix())?;
    let freqs = mode_frequencies(&es);
    if let Some(dir) = &args.out {
        report.write_file(&dir.join("laplacian.csv"), |w| write_laplacian_csv(&lap, w))?;
        report.write_file(&dir.join("spectrum.csv"), |w| write_spectrum_report(&es, w))?;
    }
    let disk = gershgorin_disk(&lap);
    report.result(json!({
        "nodes": lap.dim(),
        "weak_components": lap.weak_components(),
        "symmetrizability": symmetrizable,
        "gershgorin": { "center": disk.center, "radius": disk.radius },
        "spectrum_real": spectrum_is_real(&es, None),
        "max_im_lambda": num(es.max_imag()),
        "max_im_omega": num(freqs.max_imag()),
        "basis_condition": num(es.basis_condition()),
        "eigenvalues": complex_list(es.eigenvalues()),
        "omegas": complex_list(&freqs.omegas),
    }));
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Modal,
    Numeric,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, env = "NETOSC_GRAPH")]
    pub graph: PathBuf,
    /// Initial states, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    /// Initial velocities, comma separated (default all zero)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
    /// Simulate lap0 + eps * lap_oneway instead of the full graph
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, env = "NETOSC_DT", default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, env = "NETOSC_T_END", default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Directory for trajectory and energy CSV files
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi.abs() > 0.0 {
        (hi - lo) / hi.abs()
    } else {
        0.0
    }
}

pub fn simulate(args: &SimulateArgs, report: &mut Report) -> CliResult<()> {
    let input = load_input(report, &args.graph)?;
    let lap = match args.eps {
        Some(eps) => compose_epsilon(&input.split(), eps)?,
        None => input.laplacian(),
    };
    let ic = initial_condition(&args.x0, &args.v0, lap.dim())?;
    let mut result = serde_json::Map::new();

    let modal = if args.method != Method::Numeric {
        let dec = check_symmetrizable(&lap, netosc::graph::DEFAULT_SYMMETRIZABLE_TOL).ok();
        let sol = modal_solve(&lap, &ic, dec.as_ref())?;
        let traj = Trajectory::from_modal(&sol, args.dt, args.t_end)?;
        let energy = total_energy_series(&sol, &traj.times)?;
        let series = energy.series.as_ref().expect("series requested");
        result.insert("symmetrized_basis".into(), json!(dec.is_some()));
        result.insert("max_im_omega".into(), num(sol.omegas().max_imag()));
        result.insert("modal_peak_amplitude".into(), num(traj.peak_amplitude()));
        result.insert("amplitude_bound".into(), sol.amplitude_bound().map_or(Value::Null, num));
        result.insert("energy_initial".into(), num(energy.total));
        result.insert("energy_relative_spread".into(), num(spread(series.values())));
        if let Ok(nodes) = node_energies(&sol) {
            result.insert("node_energies".into(), json!(nodes.per_node));
        }
        if let Some(dir) = &args.out {
            report.write_file(&dir.join("trajectory_modal.csv"), |w| write_trajectory_csv(&traj, w))?;
            report.write_file(&dir.join("energy.csv"), |w| write_energy_csv(series, w))?;
        }
        Some(traj)
    } else {
        None
    };

    if args.method != Method::Modal {
        let traj = integrate_numeric(&lap, &ic, args.dt, args.t_end)?;
        result.insert("numeric_peak_amplitude".into(), num(traj.peak_amplitude()));
        if let Some(m) = &modal {
            result.insert("max_deviation_modal_numeric".into(), num(traj.max_deviation(m)));
        }
        if let Some(dir) = &args.out {
            report.write_file(&dir.join("trajectory_numeric.csv"), |w| write_trajectory_csv(&traj, w))?;
        }
    }
    result.insert("samples".into(), json!((args.t_end / args.dt).round() as usize + 1));
    report.result(Value::Object(result));
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityMode {
    /// Uniform-mode energies of the graph as given
    General,
    /// Unit-weight undirected graph, compared with degrees
    Degree,
    /// Unit-weight undirected graph re-weighted by shortest-path counts
    Betweenness,
}

#[derive(Args, Debug, Serialize)]
pub struct CentralityArgs {
    #[arg(long, env = "NETOSC_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = CentralityMode::General)]
    pub mode: CentralityMode,
    /// CSV file with columns node,energy
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn as_undirected(input: &GraphInput) -> CliResult<UndirectedGraph> {
    let GraphInput::Single(g) = input else {
        return Err(Error::InvalidGraph("expected a single undirected graph".into()).into());
    };
    let mut pairs = Vec::new();
    for e in g.edges() {
        if e.weight != 1.0 {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) has weight {}, expected 1",
                e.src, e.dst, e.weight
            ))
            .into());
        }
        let back = g.edges().iter().any(|f| f.src == e.dst && f.dst == e.src && f.weight == 1.0);
        if !back {
            return Err(Error::InvalidGraph(format!("edge ({}, {}) has no reverse", e.src, e.dst)).into());
        }
        if e.src < e.dst {
            pairs.push((e.src, e.dst));
        }
    }
    Ok(UndirectedGraph::new(g.node_count(), &pairs)?)
}

pub fn centrality(args: &CentralityArgs, report: &mut Report) -> CliResult<()> {
    let input = load_input(report, &args.graph)?;
    let mut result = serde_json::Map::new();
    let energies = match args.mode {
        CentralityMode::General => oscillation_centrality(&input.laplacian())?,
        CentralityMode::Degree => {
            let g = as_undirected(&input)?;
            result.insert("degrees".into(), json!(g.degrees()));
            oscillation_centrality(&laplacian_of(&g.to_digraph()))?
        }
        CentralityMode::Betweenness => {
            let g = as_undirected(&input)?;
            let links: Vec<Value> =
                g.edges().iter().zip(link_betweenness(&g)?).map(|(&(a, b), w)| json!([a, b, w])).collect();
            result.insert("link_weights".into(), Value::Array(links));
            oscillation_centrality(&laplacian_of(&betweenness_weights(&g)?))?
        }
    };
    if let Some(path) = &args.out {
        report.write_file(path, |w| {
            writeln!(w, "node,energy")?;
            for (i, e) in energies.iter().enumerate() {
                writeln!(w, "{i},{}", netosc::graph::io::fmt_f64(*e))?;
            }
            Ok(())
        })?;
    }
    result.insert("energies".into(), json!(energies));
    report.result(Value::Object(result));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct CriticalEpsArgs {
    #[arg(long, env = "NETOSC_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "NETOSC_EPS_LO", default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, env = "NETOSC_EPS_HI", default_value_t = 3.0)]
    pub hi: f64,
    #[arg(long, env = "NETOSC_TOL", default_value_t = 1e-3)]
    pub tol: f64,
}

pub fn critical_eps(args: &CriticalEpsArgs, report: &mut Report) -> CliResult<()> {
    let input = load_input(report, &args.graph)?;
    let split = input.split();
    let c = critical_epsilon(&split.lap_sym_part, &split.lap_oneway, (args.lo, args.hi), args.tol)?;
    report.result(json!({
        "eps_star": c.eps_star,
        "lo": c.lo,
        "hi": c.hi,
        "iterations": c.iterations,
        "explicit_split": input.is_split(),
    }));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, env = "NETOSC_GRAPH")]
    pub graph: PathBuf,
    /// Values of eps, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0,1.5,1.65,1.66")]
    pub eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
    #[arg(long, env = "NETOSC_DT", default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, env = "NETOSC_T_END", default_value_t = 200.0)]
    pub t_end: f64,
    /// JSON file receiving the per-eps records
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sweep(args: &SweepArgs, report: &mut Report) -> CliResult<()> {
    let input = load_input(report, &args.graph)?;
    let ic = initial_condition(&args.x0, &args.v0, input.node_count())?;
    let records = epsilon_sweep(&input.split(), &args.eps, &ic, args.t_end, args.dt);
    let value = serde_json::to_value(&records).map_err(Error::from)?;
    if let Some(path) = &args.out {
        report.write_file(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &value)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    report.result(json!({ "records": value }));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    /// Series CSV (`value` column, or a single column)
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, env = "NETOSC_WINDOW", default_value_t = 20)]
    pub window: usize,
    /// Low-band cutoff bin (default N/16)
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// First sample of the analysed period
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Period length (default: to the end of the series)
    #[arg(long)]
    pub length: Option<usize>,
    /// Emit log-binned columns with this many bins per decade
    #[arg(long)]
    pub log_bins: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn period(series: &TimeSeries, start: usize, length: Option<usize>) -> CliResult<TimeSeries> {
    let length = length.unwrap_or(series.len().saturating_sub(start));
    Ok(slice_period(series, start, length)?)
}

fn spectrum_summary(sp: &Spectrum, cutoff: usize) -> CliResult<Value> {
    Ok(json!({
        "n_samples": sp.n_samples(),
        "peak_index": sp.peak_index(),
        "top_peaks": sp.top_peaks(5),
        "cutoff": cutoff,
        "low_freq_share": low_freq_share(sp, cutoff)?,
    }))
}

pub fn spectrum(args: &SpectrumArgs, report: &mut Report) -> CliResult<()> {
    report.input(&args.input)?;
    let series = read_series_csv(std::fs::File::open(&args.input)?)?;
    let s = period(&series, args.start, args.length)?;
    let sp = analyze_period(&s, args.window)?;
    let cutoff = args.cutoff.unwrap_or((s.len() / 16).max(1));
    if let Some(path) = &args.out {
        match args.log_bins {
            Some(k) => report.write_file(path, |w| write_log_binned_csv(&sp, k, w))?,
            None => report.write_file(path, |w| write_spectrum_csv(&sp, w))?,
        }
    }
    report.result(spectrum_summary(&sp, cutoff)?);
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct BinArgs {
    /// Event CSV with a `timestamp` column
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, env = "NETOSC_BIN_SECONDS", default_value_t = 960.0)]
    pub bin_seconds: f64,
    /// Start of the first bin (default: first event)
    #[arg(long)]
    pub t0: Option<f64>,
    /// Number of bins (default: enough to cover every event)
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Series CSV with columns t,value
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn bin(args: &BinArgs, report: &mut Report) -> CliResult<()> {
    report.input(&args.input)?;
    let log = load_event_log(&args.input)?;
    let stamps = log.timestamps();
    let t0 = args.t0.unwrap_or(stamps[0]);
    let n_bins = match args.n_bins {
        Some(n) => n,
        None => {
            if !(args.bin_seconds > 0.0) {
                return Err(Error::InvalidInput(format!("bad bin width {}", args.bin_seconds)).into());
            }
            let last = stamps[stamps.len() - 1];
            (((last - t0) / args.bin_seconds).floor().max(0.0) as usize + 1).max(2)
        }
    };
    let binned = bin_counts(&log, args.bin_seconds, t0, n_bins)?;
    if let Some(path) = &args.out {
        report.write_file(path, |w| write_series_csv(&binned.series, w))?;
    }
    report.result(json!({
        "events": log.len(),
        "t0": t0,
        "n_bins": n_bins,
        "in_range": binned.series.values().iter().sum::<f64>(),
        "out_of_range": binned.out_of_range,
    }));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct FuseTrendsArgs {
    /// Segment CSVs (`datetime,value`), in fusion order
    #[arg(long = "segment", required = true)]
    pub segments: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn fuse(args: &FuseTrendsArgs, report: &mut Report) -> CliResult<()> {
    let mut segs = Vec::with_capacity(args.segments.len());
    for p in &args.segments {
        report.input(p)?;
        segs.push(load_trend_segment(p)?);
    }
    let fused = fuse_trends(&segs)?;
    if let Some(path) = &args.out {
        report.write_file(path, |w| write_series_csv(&fused.series, w))?;
    }
    report.result(json!({
        "anchor_ratios": fused.anchor_ratios,
        "final_scale": fused.final_scale,
        "start": fused.series.origin(),
        "step": fused.series.dt(),
        "length": fused.series.len(),
        "max": fused.series.values().iter().cloned().fold(0.0, f64::max),
    }));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct BeatDemoArgs {
    #[arg(long, default_value_t = 0.10)]
    pub w1: f64,
    #[arg(long, default_value_t = 0.11)]
    pub w2: f64,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Directory for signal_a..e.csv and spectrum_a..e.csv
    #[arg(long)]
    pub out: PathBuf,
}

pub fn beat(args: &BeatDemoArgs, report: &mut Report) -> CliResult<()> {
    let demo = beat_demo(args.w1, args.w2, args.n)?;
    let written = demo.write(&args.out)?;
    report.outputs(&written);
    let sp = |c: char| &demo.panel(c).spectrum;
    report.result(json!({
        "peaks": {
            "a": sp('a').peak_index(),
            "b": sp('b').peak_index(),
            "c": sp('c').top_peaks(2),
            "d": sp('d').top_peaks(2),
            "e": sp('e').peak_index(),
        },
        "low_freq_share_20": {
            "c": low_freq_share(sp('c'), 20)?,
            "e": low_freq_share(sp('e'), 20)?,
        },
    }));
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct ComparePeriodsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Start indices of the periods, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub starts: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub length: usize,
    #[arg(long, env = "NETOSC_WINDOW", default_value_t = 20)]
    pub window: usize,
    /// Low-band cutoff bin (default length/16)
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub log_bins: Option<usize>,
    /// Directory for per-period spectra and comparison.csv
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn compare_periods(args: &ComparePeriodsArgs, report: &mut Report) -> CliResult<()> {
    report.input(&args.input)?;
    let series = read_series_csv(std::fs::File::open(&args.input)?)?;
    let cutoff = args.cutoff.unwrap_or((args.length / 16).max(1));
    let mut rows = Vec::new();
    for &start in &args.starts {
        let s = slice_period(&series, start, args.length)?;
        let sp = analyze_period(&s, args.window)?;
        let share = low_freq_share(&sp, cutoff)?;
        if let Some(dir) = &args.out {
            let path = dir.join(format!("spectrum_{start}.csv"));
            match args.log_bins {
                Some(k) => report.write_file(&path, |w| write_log_binned_csv(&sp, k, w))?,
                None => report.write_file(&path, |w| write_spectrum_csv(&sp, w))?,
            }
        }
        rows.push((start, share, sp.peak_index()));
    }
    if let Some(dir) = &args.out {
        report.write_file(&dir.join("comparison.csv"), |w| {
            writeln!(w, "start,length,low_freq_share")?;
            for (start, share, _) in &rows {
                writeln!(w, "{start},{},{}", args.length, netosc::graph::io::fmt_f64(*share))?;
            }
            Ok(())
        })?;
    }
    let periods: Vec<Value> = rows
        .iter()
        .map(|(start, share, peak)| json!({ "start": start, "low_freq_share": share, "peak_index": peak }))
        .collect();
    report.result(json!({ "cutoff": cutoff, "periods": periods }));
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Digraph,
    Symmetrizable,
    Undirected,
    Tree,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    /// Link probability
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, env = "NETOSC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Graph JSON output
    #[arg(long)]
    pub out: PathBuf,
}

pub fn generate(args: &GenerateArgs, report: &mut Report) -> CliResult<()> {
    if !(0.0..=1.0).contains(&args.p) {
        return Err(CliError::Usage(format!("--p must lie in [0, 1], got {}", args.p)));
    }
    if args.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let mut rng = random::seeded(args.seed);
    let g = match args.kind {
        GraphKind::Digraph => random::random_digraph(&mut rng, args.n, args.p, 5.0),
        GraphKind::Symmetrizable => {
            let (lap, _) = random::random_symmetrizable(&mut rng, args.n, args.p);
            netosc::graph::WeightedDigraph::from_laplacian(&lap)
        }
        GraphKind::Undirected => random::random_connected_graph(&mut rng, args.n, args.p).to_digraph(),
        GraphKind::Tree => random::random_tree(&mut rng, args.n).to_digraph(),
    };
    let doc = GraphDocument::from_digraph(&g);
    report.write_file(&args.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    })?;
    report.result(json!({ "nodes": g.node_count(), "edges": g.edges().len() }));
    Ok(())
}
