//! The six sweeps. Each returns a [`ResultTable`] whose rows follow the sweep
//! order, whatever order the points were computed in.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use oamcap_core::aperture::{gram_matrix, OamModeSet, MIN_QUADRATURE_POINTS};
use oamcap_core::channel::link::{qpsk_ber, simulate_qpsk};
use oamcap_core::channel::{coupling_matrix, discrete_uca_model, AwgnLink, LinkGeometry};
use oamcap_core::em::WaveContext;
use oamcap_core::metrics::{edof, edof_uca, rayleigh_distance_with, se_upper_bound, spectral_efficiency};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, GainScale};
use crate::error::CliResult;
use crate::table::{PlotSpec, ResultTable};
use crate::VERSION;

/// One curve of an SE figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// Continuous rings carrying `modes` centered OAM modes.
    Capa { modes: usize },
    /// Uniform circular arrays with `elements` elements, one mode per element.
    Uca { elements: usize },
}

impl Series {
    pub fn label(&self) -> String {
        match self {
            Self::Capa { modes } => format!("capa{modes}"),
            Self::Uca { elements } => format!("uca{elements}"),
        }
    }

    pub fn mode_count(&self) -> usize {
        match self {
            Self::Capa { modes } => *modes,
            Self::Uca { elements } => *elements,
        }
    }
}

/// Gains and EDoF of one series at one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub gains: Vec<f64>,
    pub edof: f64,
    pub quadrature: Option<usize>,
    pub aliasing: bool,
    pub degraded: bool,
}

impl SeriesPoint {
    pub fn coupling_strength(&self) -> f64 {
        self.gains.iter().sum()
    }

    /// `(se, bound)` at total transmit SNR `snr` (linear), split evenly over
    /// the modes.
    pub fn se_and_bound(&self, snr: f64) -> (f64, f64) {
        let per_mode = snr / self.gains.len() as f64;
        (
            spectral_efficiency(&self.gains, per_mode),
            se_upper_bound(self.coupling_strength(), self.edof, per_mode),
        )
    }
}

/// Element count of a UCA with half-wavelength spacing on a ring of `radius`.
pub fn half_wavelength_elements(radius: f64, wavelength: f64) -> usize {
    (2.0 * std::f64::consts::PI * radius / (wavelength / 2.0)).ceil() as usize
}

pub fn series_list(cfg: &ExperimentConfig) -> Vec<Series> {
    let mut list: Vec<Series> = cfg.sweep.modes.iter().map(|&modes| Series::Capa { modes }).collect();
    let mut elements = cfg.sweep.elements.clone();
    if cfg.sweep.half_wavelength_uca {
        let r = cfg.meters(cfg.link.tx_radius);
        elements.push(half_wavelength_elements(r, cfg.context().wavelength()));
    }
    for k in elements {
        let s = Series::Uca { elements: k };
        if !list.contains(&s) {
            list.push(s);
        }
    }
    list
}

/// Coaxial link at `distance` (m) with the configured rings and a quadrature
/// that resolves modes up to `max_mode`.
pub fn link_geometry(cfg: &ExperimentConfig, ctx: WaveContext, tx_radius: f64, rx_radius: f64, distance: f64, max_mode: u32) -> CliResult<LinkGeometry> {
    let base = LinkGeometry::coaxial(ctx, tx_radius, rx_radius, distance, cfg.polarization(), MIN_QUADRATURE_POINTS)?;
    let q = cfg
        .numerics
        .quadrature
        .unwrap_or_else(|| base.recommended_quadrature(max_mode));
    Ok(base.with_quadrature(q)?)
}

fn scaled(mut gains: Vec<f64>, scale: GainScale) -> Vec<f64> {
    if scale == GainScale::Normalized {
        let total: f64 = gains.iter().sum();
        if total > 0.0 {
            let factor = gains.len() as f64 / total;
            gains.iter_mut().for_each(|g| *g *= factor);
        }
    }
    gains
}

pub fn evaluate_series(cfg: &ExperimentConfig, distance: f64, series: Series) -> CliResult<SeriesPoint> {
    let ctx = cfg.context();
    let (rt, rr) = (cfg.meters(cfg.link.tx_radius), cfg.meters(cfg.link.rx_radius));
    let modes = OamModeSet::centered(series.mode_count())?;
    let point = match series {
        Series::Capa { .. } => {
            let geom = link_geometry(cfg, ctx, rt, rr, distance, modes.max_abs())?;
            let h = coupling_matrix(&geom, &modes, &modes)?;
            SeriesPoint {
                gains: h.mode_gains(),
                edof: edof(&geom)?,
                quadrature: Some(geom.quadrature().0),
                aliasing: false,
                degraded: h.degraded(),
            }
        }
        Series::Uca { elements } => {
            let geom = LinkGeometry::coaxial(ctx, rt, rr, distance, cfg.polarization(), MIN_QUADRATURE_POINTS)?;
            let model = discrete_uca_model(&geom, elements, elements, &modes, &modes)?;
            SeriesPoint {
                gains: model.mode_gains(),
                edof: edof_uca(&geom, elements, elements)?,
                quadrature: None,
                aliasing: model.aliasing,
                degraded: false,
            }
        }
    };
    Ok(SeriesPoint {
        gains: scaled(point.gains, cfg.output.scale),
        ..point
    })
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `5.8` → `5p8`, for column names.
fn tag(value: f64) -> String {
    format!("{value}").replace('.', "p").replace('-', "m")
}

fn describe(series: Series, p: &SeriesPoint) -> String {
    let q = p.quadrature.map_or("elements".to_string(), |q| q.to_string());
    format!(
        "modes={} edof={} gamma={} quadrature={} aliasing={} degraded={}",
        series.mode_count(),
        p.edof,
        p.coupling_strength(),
        q,
        p.aliasing,
        p.degraded
    )
}

fn se_vs_snr(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let distance = cfg.meters(cfg.sweep.distances[0]);
    let series = series_list(cfg);
    let points = series
        .par_iter()
        .map(|s| evaluate_series(cfg, distance, *s))
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = ResultTable::new(Experiment::SeVsSnr.name());
    let x = t.add_column("snr", "db");
    let mut se_cols = Vec::new();
    for (s, p) in series.iter().zip(&points) {
        let se = t.add_column(format!("se_{}", s.label()), "bps_hz");
        let bound = t.add_column(format!("bound_{}", s.label()), "bps_hz");
        t.bound_checks.push((se, bound));
        se_cols.push(se);
        t.add_meta(format!("series_{}", s.label()), describe(*s, p));
    }
    t.add_meta("distance_m", distance);
    for &db in &cfg.sweep.snr_db {
        let snr = db_to_linear(db);
        let mut row = vec![db];
        for p in &points {
            let (se, bound) = p.se_and_bound(snr);
            row.extend([se, bound]);
        }
        t.push_row(row);
    }
    t.plot = Some(PlotSpec {
        x,
        ys: se_cols,
        log_x: false,
        log_y: false,
        x_label: "SNR (dB)".into(),
        y_label: "spectral efficiency (bit/s/Hz)".into(),
    });
    Ok(t)
}

fn se_vs_distance(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let series = series_list(cfg);
    let snr = db_to_linear(cfg.sweep.snr_db[0]);
    let wavelength = cfg.context().wavelength();
    let rows = cfg
        .sweep
        .distances
        .par_iter()
        .map(|&d| {
            let distance = cfg.meters(d);
            let mut row = vec![distance, distance / wavelength];
            let mut quadratures = Vec::new();
            for s in &series {
                let p = evaluate_series(cfg, distance, *s)?;
                let (se, bound) = p.se_and_bound(snr);
                row.extend([se, bound, p.edof]);
                quadratures.extend(p.quadrature);
            }
            Ok((row, quadratures))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = ResultTable::new(Experiment::SeVsDistance.name());
    t.add_column("distance", "m");
    let x = t.add_column("distance", "lambda");
    let mut se_cols = Vec::new();
    for s in &series {
        let se = t.add_column(format!("se_{}", s.label()), "bps_hz");
        let bound = t.add_column(format!("bound_{}", s.label()), "bps_hz");
        t.add_column(format!("edof_{}", s.label()), "dof");
        t.bound_checks.push((se, bound));
        se_cols.push(se);
    }
    t.add_meta("snr_db", cfg.sweep.snr_db[0]);
    t.add_meta("quadrature", quadrature_summary(rows.iter().flat_map(|(_, q)| q.iter().copied())));
    for (row, _) in rows {
        t.push_row(row);
    }
    t.plot = Some(PlotSpec {
        x,
        ys: se_cols,
        log_x: true,
        log_y: false,
        x_label: "distance (wavelengths)".into(),
        y_label: "spectral efficiency (bit/s/Hz)".into(),
    });
    Ok(t)
}

fn quadrature_summary(values: impl Iterator<Item = usize>) -> String {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    v.dedup();
    match (v.first(), v.last()) {
        (Some(lo), Some(hi)) if lo == hi => lo.to_string(),
        (Some(lo), Some(hi)) => format!("{lo}..{hi}"),
        _ => "none".into(),
    }
}

fn edof_vs_distance(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let wavelength = cfg.context().wavelength();
    let combos: Vec<(f64, f64)> = cfg
        .sweep
        .bands_hz
        .iter()
        .flat_map(|&f| cfg.sweep.radii.iter().map(move |&r| (f, r)))
        .collect();
    let rows = cfg
        .sweep
        .distances
        .par_iter()
        .map(|&d| {
            let distance = cfg.meters(d);
            let mut row = vec![distance, distance / wavelength];
            let mut quadratures = Vec::new();
            for &(f, r) in &combos {
                let ctx = WaveContext::new(f)?;
                let radius = cfg.meters(r);
                let geom = link_geometry(cfg, ctx, radius, radius, distance, 0)?;
                quadratures.push(geom.quadrature().0);
                row.push(edof(&geom)?);
            }
            Ok((row, quadratures))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = ResultTable::new(Experiment::EdofVsDistance.name());
    t.add_column("distance", "m");
    let x = t.add_column("distance", "lambda");
    let mut ys = Vec::new();
    for &(f, r) in &combos {
        let label = format!("{}ghz_r{}", tag(f / 1e9), tag(r));
        ys.push(t.add_column(format!("edof_{label}"), "dof"));
        let radius = cfg.meters(r);
        let ctx = WaveContext::new(f)?;
        let rayleigh = rayleigh_distance_with(&ctx, radius, radius, cfg.numerics.aperture_size.into());
        t.add_meta(format!("rayleigh_{label}_m"), rayleigh);
    }
    t.add_meta("quadrature", quadrature_summary(rows.iter().flat_map(|(_, q)| q.iter().copied())));
    for (row, _) in rows {
        t.push_row(row);
    }
    t.plot = Some(PlotSpec {
        x,
        ys,
        log_x: true,
        log_y: true,
        x_label: "distance (wavelengths at the link frequency)".into(),
        y_label: "EDoF".into(),
    });
    Ok(t)
}

/// Smallest element count from which every later value stays within
/// `rel_tol` of `reference`.
pub fn saturation_count(elements: &[usize], values: &[f64], reference: f64, rel_tol: f64) -> Option<usize> {
    let mut found = None;
    for (k, v) in elements.iter().zip(values).rev() {
        if (v - reference).abs() <= rel_tol * reference {
            found = Some(*k);
        } else {
            break;
        }
    }
    found
}

fn edof_vs_elements(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let ctx = cfg.context();
    let (rt, rr) = (cfg.meters(cfg.link.tx_radius), cfg.meters(cfg.link.rx_radius));
    let geoms = cfg
        .sweep
        .distances
        .iter()
        .map(|&d| link_geometry(cfg, ctx, rt, rr, cfg.meters(d), 0))
        .collect::<CliResult<Vec<_>>>()?;
    let capa = geoms
        .par_iter()
        .map(|g| edof(g).map_err(Into::into))
        .collect::<CliResult<Vec<f64>>>()?;
    let rows = cfg
        .sweep
        .elements
        .par_iter()
        .map(|&k| {
            let mut row = vec![k as f64];
            for (g, c) in geoms.iter().zip(&capa) {
                row.extend([edof_uca(g, k, k)?, *c]);
            }
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = ResultTable::new(Experiment::EdofVsElements.name());
    let x = t.add_column("elements", "count");
    let mut ys = Vec::new();
    for (i, &d) in cfg.sweep.distances.iter().enumerate() {
        let label = format!("d{}", tag(d));
        ys.push(t.add_column(format!("edof_uca_{label}"), "dof"));
        ys.push(t.add_column(format!("edof_capa_{label}"), "dof"));
        t.add_meta(format!("quadrature_{label}"), geoms[i].quadrature().0);
    }
    for row in rows {
        t.push_row(row);
    }
    for (i, &d) in cfg.sweep.distances.iter().enumerate() {
        let values: Vec<f64> = t.rows.iter().map(|r| r[1 + 2 * i]).collect();
        let k = saturation_count(&cfg.sweep.elements, &values, capa[i], 0.02);
        t.add_meta(
            format!("saturation_d{}", tag(d)),
            k.map_or("not reached".to_string(), |k| k.to_string()),
        );
    }
    t.plot = Some(PlotSpec {
        x,
        ys,
        log_x: true,
        log_y: false,
        x_label: "UCA elements".into(),
        y_label: "EDoF".into(),
    });
    Ok(t)
}

fn link_ber(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let ctx = cfg.context();
    let distance = cfg.meters(cfg.sweep.distances[0]);
    let modes = OamModeSet::centered(cfg.sweep.modes[0])?;
    let (rt, rr) = (cfg.meters(cfg.link.tx_radius), cfg.meters(cfg.link.rx_radius));
    let geom = link_geometry(cfg, ctx, rt, rr, distance, modes.max_abs())?;
    let h = coupling_matrix(&geom, &modes, &modes)?;
    let mut channel = h.entries().clone();
    if cfg.output.scale == GainScale::Normalized {
        let gamma: f64 = h.mode_gains().iter().sum();
        channel *= Complex64::from((modes.len() as f64 / gamma).sqrt());
    }
    let gains: Vec<f64> = (0..modes.len()).map(|m| channel[(m, m)].norm_sqr()).collect();
    let m = modes.len() as f64;

    let rows = cfg
        .sweep
        .snr_db
        .par_iter()
        .enumerate()
        .map(|(i, &db)| {
            let snr = db_to_linear(db);
            let link = AwgnLink::new(channel.clone(), 1.0 / (m * snr), 1.0)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let counts = simulate_qpsk(&link, cfg.numerics.symbols, &mut rng)?;
            let theory = gains.iter().map(|g| qpsk_ber(g * snr)).sum::<f64>() / m;
            let stderr = (theory * (1.0 - theory) / counts.bits as f64).sqrt();
            Ok(vec![db, counts.ber(), theory, counts.ser(), stderr])
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = ResultTable::new(Experiment::LinkBer.name());
    let x = t.add_column("snr", "db");
    let sim = t.add_column("ber_sim", "prob");
    let theory = t.add_column("ber_theory", "prob");
    t.add_column("ser_sim", "prob");
    t.add_column("ber_stderr", "prob");
    t.add_meta("distance_m", distance);
    t.add_meta("modes", format!("{:?}", modes.modes()));
    t.add_meta("quadrature", geom.quadrature().0);
    t.add_meta("symbols_per_point", cfg.numerics.symbols * modes.len());
    for row in rows {
        t.push_row(row);
    }
    t.plot = Some(PlotSpec {
        x,
        ys: vec![sim, theory],
        log_x: false,
        log_y: true,
        x_label: "SNR (dB)".into(),
        y_label: "bit error rate".into(),
    });
    Ok(t)
}

fn convergence(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    let ctx = cfg.context();
    let distance = cfg.meters(cfg.sweep.distances[0]);
    let modes = OamModeSet::centered(cfg.sweep.modes[0])?;
    let (rt, rr) = (cfg.meters(cfg.link.tx_radius), cfg.meters(cfg.link.rx_radius));
    let base = LinkGeometry::coaxial(ctx, rt, rr, distance, cfg.polarization(), MIN_QUADRATURE_POINTS)?;
    let points = cfg
        .sweep
        .quadratures
        .par_iter()
        .map(|&q| {
            let geom = base.with_quadrature(q)?;
            let gram = gram_matrix(&geom.tx, &modes);
            let h = coupling_matrix(&geom, &modes, &modes)?;
            Ok((
                q,
                gram.max_identity_error(),
                h.off_diagonal_ratio(),
                h.mode_gains().iter().sum::<f64>(),
                edof(&geom)?,
                h.degraded(),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let finest = points.iter().max_by_key(|p| p.0).expect("validated non-empty sweep");
    let (gamma_ref, edof_ref) = (finest.3, finest.4);

    let mut t = ResultTable::new(Experiment::Convergence.name());
    let x = t.add_column("quadrature", "count");
    let gram = t.add_column("gram_error", "abs");
    let off = t.add_column("offdiag", "ratio");
    t.add_column("gamma", "lin");
    let ge = t.add_column("gamma_error", "ratio");
    t.add_column("edof", "dof");
    let ee = t.add_column("edof_error", "ratio");
    t.add_column("degraded", "flag");
    t.add_meta("distance_m", distance);
    t.add_meta("modes", format!("{:?}", modes.modes()));
    t.add_meta("reference_quadrature", finest.0);
    for (q, g, o, gamma, e, degraded) in points {
        t.push_row(vec![
            q as f64,
            g,
            o,
            gamma,
            (gamma - gamma_ref).abs() / gamma_ref,
            e,
            (e - edof_ref).abs() / edof_ref,
            f64::from(u8::from(degraded)),
        ]);
    }
    t.plot = Some(PlotSpec {
        x,
        ys: vec![gram, off, ge, ee],
        log_x: true,
        log_y: true,
        x_label: "quadrature points".into(),
        y_label: "error".into(),
    });
    Ok(t)
}

/// Runs the configured sweep and attaches the run metadata.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ResultTable> {
    cfg.validate()?;
    let start = Instant::now();
    let mut table = match cfg.experiment {
        Experiment::SeVsSnr => se_vs_snr(cfg),
        Experiment::SeVsDistance => se_vs_distance(cfg),
        Experiment::EdofVsDistance => edof_vs_distance(cfg),
        Experiment::EdofVsElements => edof_vs_elements(cfg),
        Experiment::LinkBer => link_ber(cfg),
        Experiment::Convergence => convergence(cfg),
    }?;
    let runtime = start.elapsed().as_secs_f64();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let mut metadata = vec![
        ("generator".to_string(), format!("oamcap {VERSION}")),
        ("experiment".to_string(), cfg.experiment.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("scale".to_string(), format!("{:?}", cfg.output.scale).to_lowercase()),
        ("wavelength_m".to_string(), cfg.context().wavelength().to_string()),
    ];
    metadata.append(&mut table.metadata);
    metadata.push(("timestamp_unix_s".into(), timestamp.to_string()));
    metadata.push(("runtime_s".into(), format!("{runtime:.3}")));
    metadata.push(("config".into(), cfg.to_toml()));
    table.metadata = metadata;
    Ok(table)
}
