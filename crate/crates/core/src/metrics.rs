//! Spectral efficiency, coupling strength, the transmit-side kernel and the
//! effective degrees of freedom (EDoF) it implies.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::aperture::{ring_nodes, RingAperture};
use crate::channel::{projected_green_matrix, CouplingMatrix, LinkGeometry};
use crate::em::{DyadicGreen, FreeSpace, WaveContext};
use crate::error::{invalid, Error, Result};

/// `Σ_m log2(1 + g_m · snr)` in bit/s/Hz.
pub fn spectral_efficiency(gains: &[f64], snr: f64) -> f64 {
    gains.iter().map(|g| (g * snr).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Sum of the diagonal power-transfer coefficients `Σ_m |h_mm|²`.
pub fn coupling_strength(h: &CouplingMatrix) -> f64 {
    h.mode_gains().iter().sum()
}

/// `ε · log2(1 + snr · γ / ε)`.
pub fn se_upper_bound(coupling_strength: f64, edof: f64, snr: f64) -> f64 {
    if coupling_strength == 0.0 {
        return 0.0;
    }
    edof * (snr * coupling_strength / edof).ln_1p() / std::f64::consts::LN_2
}

/// Equal-gain Jensen bound `M · log2(1 + snr · Σg / M)` over the used modes.
pub fn jensen_bound(gains: &[f64], snr: f64) -> f64 {
    se_upper_bound(gains.iter().sum(), gains.len() as f64, snr)
}

/// Transmit-side kernel `K_T[k][k'] = Σ_v w_v conj(g(r_v, s_k)) g(r_v, s_k')`
/// on the transmit nodes, together with the transmit weights it is
/// integrated against.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitKernel {
    pub matrix: DMatrix<Complex64>,
    pub tx_weights: Vec<f64>,
}

impl TransmitKernel {
    /// `Σ_k w_k K_T[k][k]`, the double integral of `|g|²` over both apertures.
    pub fn weighted_trace(&self) -> f64 {
        self.tx_weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * self.matrix[(k, k)].re)
            .sum()
    }

    /// `Σ_{k,k'} w_k w_k' |K_T[k][k']|²`.
    pub fn weighted_frobenius_sqr(&self) -> f64 {
        let n = self.tx_weights.len();
        let mut acc = 0.0;
        for j in 0..n {
            let col = self.matrix.column(j);
            let partial: f64 = col
                .iter()
                .zip(&self.tx_weights)
                .map(|(c, w)| w * c.norm_sqr())
                .sum();
            acc += self.tx_weights[j] * partial;
        }
        acc
    }

    /// Participation ratio `(Σσ)² / Σσ²` of the weighted kernel eigenvalues,
    /// evaluated through traces.
    pub fn edof(&self) -> Result<f64> {
        let trace = self.weighted_trace();
        let frob = self.weighted_frobenius_sqr();
        if !(trace > 0.0 && frob > 0.0) {
            return Err(Error::Degenerate(format!(
                "kernel has zero power (trace {trace:e}); EDoF undefined"
            )));
        }
        Ok(trace * trace / frob)
    }
}

/// Builds `K_T` from Green samples (rows receive nodes, columns transmit nodes).
pub fn kernel_from_samples(samples: &DMatrix<Complex64>, rx_weights: &[f64], tx_weights: Vec<f64>) -> Result<TransmitKernel> {
    let (rows, cols) = samples.shape();
    if rx_weights.len() != rows {
        return Err(Error::LengthMismatch {
            what: "receive weights",
            expected: rows,
            actual: rx_weights.len(),
        });
    }
    if tx_weights.len() != cols {
        return Err(Error::LengthMismatch {
            what: "transmit weights",
            expected: cols,
            actual: tx_weights.len(),
        });
    }
    let columns: Vec<&[Complex64]> = (0..cols)
        .map(|k| &samples.as_slice()[k * rows..(k + 1) * rows])
        .collect();
    let weighted: Vec<Vec<Complex64>> = columns
        .iter()
        .map(|col| col.iter().zip(rx_weights).map(|(g, w)| g * w).collect())
        .collect();
    // upper triangle, row by row
    let upper: Vec<Vec<Complex64>> = (0..cols)
        .into_par_iter()
        .map(|k| {
            (k..cols)
                .map(|kp| {
                    columns[k]
                        .iter()
                        .zip(&weighted[kp])
                        .map(|(a, b)| a.conj() * b)
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut matrix = DMatrix::zeros(cols, cols);
    for (k, row) in upper.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let kp = k + offset;
            matrix[(k, kp)] = value;
            matrix[(kp, k)] = value.conj();
        }
        matrix[(k, k)].im = 0.0;
    }
    Ok(TransmitKernel { matrix, tx_weights })
}

/// `K_T` on the transmit quadrature of `geom`.
pub fn kernel_kt(geom: &LinkGeometry) -> Result<TransmitKernel> {
    kernel_kt_with(&FreeSpace::new(geom.ctx), geom)
}

pub fn kernel_kt_with<G: DyadicGreen + ?Sized>(green: &G, geom: &LinkGeometry) -> Result<TransmitKernel> {
    let tx = geom.tx.sample_points();
    let rx = geom.rx.sample_points();
    let samples = projected_green_matrix(green, &rx, &tx)?;
    let rx_w: Vec<f64> = rx.iter().map(|n| n.weight).collect();
    kernel_from_samples(&samples, &rx_w, tx.iter().map(|n| n.weight).collect())
}

/// EDoF of the continuous apertures at their quadrature resolution.
pub fn edof(geom: &LinkGeometry) -> Result<f64> {
    kernel_kt(geom)?.edof()
}

/// EDoF of uniform circular arrays with `tx_elements` and `rx_elements`
/// elements on the rings of `geom` (unweighted element sums).
pub fn edof_uca(geom: &LinkGeometry, tx_elements: usize, rx_elements: usize) -> Result<f64> {
    if tx_elements == 0 || rx_elements == 0 {
        return Err(invalid("elements", "UCA needs at least one element per side"));
    }
    let tx = ring_nodes(geom.tx.radius(), 0.0, geom.tx.polarization(), tx_elements);
    let rx = ring_nodes(geom.rx.radius(), geom.distance(), geom.rx.polarization(), rx_elements);
    let samples = projected_green_matrix(&FreeSpace::new(geom.ctx), &rx, &tx)?;
    kernel_from_samples(&samples, &vec![1.0; rx_elements], vec![1.0; tx_elements])?.edof()
}

/// Which linear size `D` enters `2D²/λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApertureSize {
    #[default]
    Diameter,
    Radius,
}

/// `2D²/λ` with `D` the diameter of the larger aperture.
pub fn rayleigh_distance(ctx: &WaveContext, tx: &RingAperture, rx: &RingAperture) -> f64 {
    rayleigh_distance_with(ctx, tx.radius(), rx.radius(), ApertureSize::Diameter)
}

pub fn rayleigh_distance_with(ctx: &WaveContext, tx_radius: f64, rx_radius: f64, size: ApertureSize) -> f64 {
    let r = tx_radius.max(rx_radius);
    let d = match size {
        ApertureSize::Diameter => 2.0 * r,
        ApertureSize::Radius => r,
    };
    2.0 * d * d / ctx.wavelength()
}

/// Figures of merit for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    /// bit/s/Hz
    pub se: f64,
    pub coupling_strength: f64,
    pub edof: f64,
    /// bit/s/Hz
    pub se_upper_bound: f64,
    pub snr_per_mode: f64,
    pub mode_gains: Vec<f64>,
}

impl ChannelMetrics {
    pub fn from_gains(mode_gains: Vec<f64>, edof: f64, snr_per_mode: f64) -> Result<Self> {
        if mode_gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("mode_gains", "gains must be finite and non-negative"));
        }
        if !(edof.is_finite() && edof >= 1.0) {
            return Err(invalid("edof", format!("must be at least 1, got {edof}")));
        }
        if !(snr_per_mode.is_finite() && snr_per_mode >= 0.0) {
            return Err(invalid("snr", format!("must be non-negative, got {snr_per_mode}")));
        }
        let gamma: f64 = mode_gains.iter().sum();
        Ok(Self {
            se: spectral_efficiency(&mode_gains, snr_per_mode),
            coupling_strength: gamma,
            edof,
            se_upper_bound: se_upper_bound(gamma, edof, snr_per_mode),
            snr_per_mode,
            mode_gains,
        })
    }

    pub fn evaluate(h: &CouplingMatrix, edof: f64, snr_per_mode: f64) -> Result<Self> {
        Self::from_gains(h.mode_gains(), edof, snr_per_mode)
    }

    /// `se ≤ se_upper_bound + tol`.
    pub fn within_bound(&self, tol: f64) -> bool {
        self.se <= self.se_upper_bound + tol
    }
}
