//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! `cargo test --release -p oamcap --test acceptance`

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use oamcap::experiments::saturation_count;
use oamcap::table::ResultTable;
use oamcap::{run_experiment, Experiment, ExperimentConfig, GainScale};
use oamcap_core::aperture::{gram_matrix, OamModeSet, Polarization, RingAperture};
use oamcap_core::channel::link::simulate_qpsk;
use oamcap_core::channel::{coupling_matrix, qpsk_ber, AwgnLink, LinkGeometry};
use oamcap_core::em::{dyadic_green, Vec3, WaveContext};
use oamcap_core::metrics::{edof, kernel_kt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

struct Report {
    lines: Vec<(String, Outcome, String)>,
}

impl Report {
    fn record(&mut self, id: &str, passed: bool, detail: String) {
        let outcome = if passed { Outcome::Pass } else { Outcome::Fail };
        self.print(id, &outcome, &detail);
        self.lines.push((id.to_string(), outcome, detail));
    }

    fn not_applicable(&mut self, id: &str, detail: String) {
        self.print(id, &Outcome::NotApplicable, &detail);
        self.lines.push((id.to_string(), Outcome::NotApplicable, detail));
    }

    fn print(&self, id: &str, outcome: &Outcome, detail: &str) {
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::NotApplicable => "N/A ",
        };
        println!("[{tag}] {id}: {detail}");
    }

    fn info(&self, text: String) {
        println!("       {text}");
    }
}

fn ctx58() -> WaveContext {
    WaveContext::new(5.8e9).unwrap()
}

fn ring_link(ctx: WaveContext, radius: f64, distance: f64, q: usize) -> LinkGeometry {
    LinkGeometry::coaxial(ctx, radius, radius, distance, Polarization::Azimuthal, q).unwrap()
}

fn criterion_1(report: &mut Report) {
    let ctx = ctx58();
    let l = ctx.wavelength();
    let modes = OamModeSet::centered(17).unwrap();
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for d in [10.0, 100.0, 1000.0] {
        let start = Instant::now();
        let geom = ring_link(ctx, 20.0 * l, d * l, 512);
        let h = coupling_matrix(&geom, &modes, &modes).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        worst = worst.max(h.off_diagonal_ratio());
    }
    report.record(
        "1 diagonality",
        worst < 1e-10 && slowest < 10.0,
        format!("max |h_mn|/max |h_mm| = {worst:.2e} (< 1e-10), slowest geometry {slowest:.2} s (< 10 s), Q = 512, |l| <= 8"),
    );
}

fn criterion_2(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let trials = 500;
    for _ in 0..trials {
        let size = rng.gen_range(1..=32);
        let mut modes: Vec<i32> = Vec::new();
        while modes.len() < size {
            let m = rng.gen_range(-64..=64);
            if !modes.contains(&m) {
                modes.push(m);
            }
        }
        let set = OamModeSet::new(modes).unwrap();
        let q = (set.spread() as usize + rng.gen_range(1..=64)).max(8);
        let ap = RingAperture::new(rng.gen_range(0.01..1.0), 0.0, Polarization::Azimuthal, q).unwrap();
        worst = worst.max(gram_matrix(&ap, &set).max_identity_error());
    }
    let secs = start.elapsed().as_secs_f64();
    report.record(
        "2 orthogonality",
        worst < 1e-12 && secs < 1.0,
        format!("max |gram - I| = {worst:.2e} (< 1e-12) over {trials} random mode sets with Q > spread, {secs:.3} s (< 1 s)"),
    );
}

fn series_mode_count(column: &str) -> Option<usize> {
    let label = column.strip_prefix("se_")?.strip_suffix("_bps_hz")?;
    label.trim_start_matches(|c: char| c.is_ascii_alphabetic()).parse().ok()
}

/// `(violations, violations with M <= ε)` of one table.
fn bound_violations(t: &ResultTable) -> (usize, usize) {
    let violations = t.check_bounds();
    let mut with_enough_edof = 0;
    for v in &violations {
        let label = v.se_column.trim_start_matches("se_").trim_end_matches("_bps_hz");
        let m = series_mode_count(&v.se_column).unwrap_or(0) as f64;
        let edof = match t.column(&format!("edof_{label}_dof")) {
            Some(col) => col[v.row],
            None => t
                .meta(&format!("series_{label}"))
                .and_then(|s| s.split_whitespace().find_map(|kv| kv.strip_prefix("edof=")))
                .and_then(|e| e.parse().ok())
                .unwrap_or(f64::NAN),
        };
        if m <= edof {
            with_enough_edof += 1;
        }
    }
    (violations.len(), with_enough_edof)
}

fn criterion_3(report: &mut Report) {
    let mut total_rows = 0;
    let mut total_violations = 0;
    let mut within_edof = 0;
    for e in Experiment::ALL {
        for scale in [GainScale::Raw, GainScale::Normalized] {
            let mut cfg = ExperimentConfig::defaults(e);
            cfg.output.scale = scale;
            let t = run_experiment(&cfg).unwrap();
            let checks = t.rows.len() * t.bound_checks.len();
            if checks == 0 {
                continue;
            }
            let (n, m_le_eps) = bound_violations(&t);
            report.info(format!("{e} ({scale:?}): {n} of {checks} rows exceed the bound; {m_le_eps} of them with M <= EDoF"));
            total_rows += checks;
            total_violations += n;
            within_edof += m_le_eps;
        }
    }
    report.record(
        "3 jensen bound",
        total_violations == 0,
        format!(
            "{total_violations} of {total_rows} (series, sweep point) pairs have C > EDoF*log2(1 + SNR*gamma/EDoF) + 1e-9; \
             {within_edof} of the violations have M <= EDoF"
        ),
    );
}

fn criterion_4(report: &mut Report) {
    let ctx = ctx58();
    let l = ctx.wavelength();
    let modes = OamModeSet::centered(17).unwrap();
    let scaled: Vec<f64> = [2000.0, 4000.0]
        .iter()
        .map(|d| {
            let geom = ring_link(ctx, 20.0 * l, d * l, 8);
            let geom = geom.with_quadrature(geom.recommended_quadrature(modes.max_abs())).unwrap();
            let h = coupling_matrix(&geom, &modes, &modes).unwrap();
            h.mode_gains().iter().sum::<f64>() * (d * l).powi(2)
        })
        .collect();
    let change = (scaled[0] / scaled[1] - 1.0).abs();
    report.record(
        "4 inverse square",
        change < 0.01,
        format!("d^2*gamma changes by {:.3e} between 2000 and 4000 wavelengths (< 1%)", change),
    );
}

fn criterion_5(report: &mut Report) {
    let ctx = ctx58();
    let l = ctx.wavelength();
    let distances = [6400.0, 12800.0, 25600.0, 51200.0];
    let start = Instant::now();
    let values: Vec<f64> = distances
        .iter()
        .map(|d| edof(&ring_link(ctx, 20.0 * l, d * l, 256)).unwrap())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let worst = values.iter().copied().fold(0.0, f64::max);
    report.record(
        "5 far-field EDoF collapse",
        worst <= 1.05 && secs < 60.0,
        format!(
            "azimuthal rings, EDoF at {:?} wavelengths = {:?} (need <= 1.05), {secs:.2} s (< 60 s)",
            distances,
            values.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    let linear: Vec<f64> = distances
        .iter()
        .map(|d| {
            let g = LinkGeometry::coaxial(ctx, 20.0 * l, 20.0 * l, d * l, Polarization::LinearX, 256).unwrap();
            (edof(&g).unwrap() * 1e4).round() / 1e4
        })
        .collect();
    report.info(format!("x-polarized rings for comparison: {linear:?}"));
}

fn criterion_6(report: &mut Report) {
    let mut cfg = ExperimentConfig::defaults(Experiment::EdofVsDistance);
    cfg.sweep.radii = vec![20.0];
    cfg.sweep.distances.retain(|d| *d < 3200.0);
    let t = run_experiment(&cfg).unwrap();
    let low = t.column("edof_5p8ghz_r20_dof").unwrap();
    let high = t.column("edof_24ghz_r20_dof").unwrap();
    let ok = low.iter().zip(&high).all(|(l, h)| h > l);
    let pairs: Vec<String> = cfg
        .sweep
        .distances
        .iter()
        .zip(low.iter().zip(&high))
        .map(|(d, (l, h))| format!("{d}:{l:.2}<{h:.2}"))
        .collect();
    report.record(
        "6 EDoF frequency ordering",
        ok,
        format!("EDoF(5.8 GHz) < EDoF(24 GHz) at every near-field distance (wavelengths): {}", pairs.join(" ")),
    );
}

fn criterion_7(report: &mut Report) {
    let cfg = ExperimentConfig::defaults(Experiment::EdofVsElements);
    let t = run_experiment(&cfg).unwrap();
    let ks = &cfg.sweep.elements;
    let mut saturation = Vec::new();
    let mut plateau = Vec::new();
    let mut monotone = true;
    for d in &cfg.sweep.distances {
        let uca = t.column(&format!("edof_uca_d{d}_dof")).unwrap();
        let capa = t.column(&format!("edof_capa_d{d}_dof")).unwrap()[0];
        let k_star = saturation_count(ks, &uca, capa, 0.02);
        let upto = k_star.map_or(ks.len(), |k| ks.iter().position(|x| *x == k).unwrap() + 1);
        let rising = uca[..upto].windows(2).all(|w| w[1] >= w[0]);
        monotone &= rising;
        report.info(format!(
            "d = {d} wavelengths: CAPA EDoF {capa:.3}, K* = {k_star:?}, non-decreasing up to K*: {rising}, UCA EDoF {:?}",
            uca.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
        ));
        saturation.push(k_star);
        plateau.push(*uca.last().unwrap());
    }
    let reached = saturation.iter().all(Option::is_some);
    let ordered = reached && saturation[0] > saturation[1] && plateau[0] > plateau[1];
    report.record(
        "7 UCA to CAPA convergence",
        monotone && reached && ordered,
        format!(
            "non-decreasing to saturation: {monotone}; within 2% of CAPA from K*: {reached}; \
             K*(10) > K*(100) and plateau(10) > plateau(100): {ordered}"
        ),
    );
}

fn strictly_above(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x > y)
}

fn criterion_8(report: &mut Report) {
    let snr = run_experiment(&ExperimentConfig::defaults(Experiment::SeVsSnr)).unwrap();
    let col = |t: &ResultTable, h: &str| t.column(h).unwrap();
    let capa = strictly_above(&col(&snr, "se_capa8_bps_hz"), &col(&snr, "se_capa4_bps_hz"));
    let uca = strictly_above(&col(&snr, "se_uca252_bps_hz"), &col(&snr, "se_uca8_bps_hz"))
        && strictly_above(&col(&snr, "se_uca8_bps_hz"), &col(&snr, "se_uca4_bps_hz"));

    let dist = run_experiment(&ExperimentConfig::defaults(Experiment::SeVsDistance)).unwrap();
    let d = col(&dist, "distance_lambda");
    let mut decreasing = true;
    for m in [8, 16] {
        let se = col(&dist, &format!("se_capa{m}_bps_hz"));
        let rises: Vec<String> = se
            .windows(2)
            .zip(d.windows(2))
            .filter(|(s, _)| s[1] > s[0])
            .map(|(s, x)| format!("{:.0}->{:.0}: {:.2}->{:.2}", x[0], x[1], s[0], s[1]))
            .collect();
        if !rises.is_empty() {
            decreasing = false;
            report.info(format!("CAPA-{m} SE rises with distance at {}", rises.join(", ")));
        }
    }
    let eight = col(&dist, "se_capa8_bps_hz");
    let sixteen = col(&dist, "se_capa16_bps_hz");
    let below: Vec<String> = d
        .iter()
        .zip(eight.iter().zip(&sixteen))
        .filter(|(_, (e, s))| s < e)
        .map(|(d, (e, s))| format!("{d:.0}: {s:.2} < {e:.2}"))
        .collect();
    if !below.is_empty() {
        report.info(format!("CAPA-16 below CAPA-8 at {}", below.join(", ")));
    }
    report.record(
        "8 SE orderings",
        capa && uca && decreasing,
        format!(
            "at 50 wavelengths, raw gains: CAPA-8 > CAPA-4 at every SNR: {capa}; UCA-252 > UCA-8 > UCA-4: {uca}; \
             SE non-increasing in d: {decreasing}"
        ),
    );
}

/// Double ring quadrature of the full 3×3 dyadic with explicit unit-norm
/// Fourier bases.
fn entrywise(ctx: &WaveContext, rs: f64, rr: f64, d: f64, q: usize, m: i32, n: i32) -> Complex64 {
    let (ws, wr) = (2.0 * PI * rs / q as f64, 2.0 * PI * rr / q as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for v in 0..q {
        let psi = 2.0 * PI * v as f64 / q as f64;
        let r = Vec3::new(rr * psi.cos(), rr * psi.sin(), d);
        let e = [-psi.sin(), psi.cos(), 0.0];
        let rx = Complex64::from_polar(1.0, -(m as f64) * psi) / (2.0 * PI * rr).sqrt();
        for k in 0..q {
            let phi = 2.0 * PI * k as f64 / q as f64;
            let s = Vec3::new(rs * phi.cos(), rs * phi.sin(), 0.0);
            let j = [-phi.sin(), phi.cos(), 0.0];
            let tx = Complex64::from_polar(1.0, n as f64 * phi) / (2.0 * PI * rs).sqrt();
            let g = dyadic_green(ctx, &r, &s).unwrap();
            let mut proj = Complex64::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    proj += g.0[a][b] * (e[a] * j[b]);
                }
            }
            acc += rx * proj * tx * (ws * wr);
        }
    }
    acc
}

fn criterion_9(report: &mut Report) {
    let ctx = ctx58();
    let l = ctx.wavelength();

    let (rs, rr, d, q) = (20.0 * l, 20.0 * l, 50.0 * l, 256);
    let modes = OamModeSet::centered(5).unwrap();
    let h = coupling_matrix(&ring_link(ctx, rs, d, q), &modes, &modes).unwrap();
    let mut worst: f64 = 0.0;
    for (i, m) in modes.iter().enumerate() {
        for (j, n) in modes.iter().enumerate() {
            let oracle = entrywise(&ctx, rs, rr, d, q, m, n);
            let scale = h.entry(i, i).norm().max(h.entry(j, j).norm());
            worst = worst.max((h.entry(i, j) - oracle).norm() / scale);
        }
    }
    report.record("9a coupling vs entrywise quadrature", worst < 1e-10, format!("max relative difference {worst:.2e} (< 1e-10), 5x5 modes"));

    let kernel = kernel_kt(&ring_link(ctx, 20.0 * l, 100.0 * l, 256)).unwrap();
    let w: Vec<f64> = kernel.tx_weights.iter().map(|w| w.sqrt()).collect();
    let n = w.len();
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| kernel.matrix[(i, j)] * (w[i] * w[j]))).eigenvalues;
    let sum: f64 = eig.iter().sum();
    let by_eig = sum * sum / eig.iter().map(|s| s * s).sum::<f64>();
    let by_trace = kernel.edof().unwrap();
    let rel = (by_trace - by_eig).abs() / by_eig;
    report.record("9b EDoF trace vs eigenvalues", rel < 1e-9, format!("{by_trace:.12} vs {by_eig:.12}, relative {rel:.2e} (< 1e-9)"));

    let modes = OamModeSet::centered(8).unwrap();
    let h = coupling_matrix(&ring_link(ctx, 20.0 * l, 50.0 * l, 256), &modes, &modes).unwrap();
    let link = AwgnLink::noiseless(h.entries().clone(), 1.0).unwrap();
    let counts = simulate_qpsk(&link, 1250, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    report.record(
        "9c noiseless QPSK",
        counts.symbol_errors == 0 && counts.symbols == 10_000,
        format!("{} symbol errors in {} symbols", counts.symbol_errors, counts.symbols),
    );

    let snr = 10.0;
    let streams = 4;
    let link = AwgnLink::new(DMatrix::identity(streams, streams), 1.0 / (streams as f64 * snr), 1.0).unwrap();
    let counts = simulate_qpsk(&link, 50_000, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    let p = qpsk_ber(snr);
    let sigma = (p * (1.0 - p) / counts.bits as f64).sqrt();
    let dev = (counts.ber() - p).abs() / sigma;
    report.record(
        "9d AWGN QPSK BER",
        dev <= 3.0,
        format!("simulated {:.4e} vs closed form {p:.4e} at 10 dB, {dev:.2} sigma (<= 3) over {} bits", counts.ber(), counts.bits),
    );
}

fn main() -> ExitCode {
    let mut report = Report { lines: Vec::new() };
    let start = Instant::now();
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);
    report.not_applicable(
        "10 absolute SE values",
        "not reproducible: the reference SE axes carry no absolute calibration; covered by criteria 3 and 8".into(),
    );

    let failed: Vec<&str> = report
        .lines
        .iter()
        .filter(|(_, o, _)| matches!(o, Outcome::Fail))
        .map(|(id, _, _)| id.as_str())
        .collect();
    let passed = report.lines.iter().filter(|(_, o, _)| matches!(o, Outcome::Pass)).count();
    println!(
        "acceptance: {passed} passed, {} failed, 1 not applicable ({:.1} s)",
        failed.len(),
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
