//! Mode-coupling matrices between coaxial ring apertures.
//!
//! The coupling coefficient between receive mode `l_m` and transmit mode `l_n`
//! is the double ring integral `∫∫ ψ_mᴴ G(r, s) ϕ_n ds dr`. It is evaluated as
//! a matrix sandwich: the polarization-projected Green's function is sampled
//! once on the `Q_r × Q_t` node grid, then projected onto the transmit and
//! receive bases. The UCA model in [`uca`] uses the same sandwich with element
//! sums in place of arc-length quadrature.

pub mod link;
pub mod uca;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::aperture::{oam_phase, OamModeSet, Polarization, RingAperture, RingNode};
use crate::em::{DyadicGreen, FreeSpace, WaveContext};
use crate::error::{invalid, Result};

pub use link::{equalize_and_detect, qpsk_ber, AwgnLink, Constellation, Detection};
pub use uca::{discrete_uca_model, DiscreteModel};

/// Quadrature size used when nothing else is requested: `max(256, 8·max|l| + 64)`.
pub fn default_quadrature(max_abs_mode: u32) -> usize {
    256.max(8 * max_abs_mode as usize + 64)
}

/// Aligned coaxial link: transmit ring at `z = 0`, receive ring at `z = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx: RingAperture,
    pub rx: RingAperture,
    pub ctx: WaveContext,
}

impl LinkGeometry {
    pub fn new(ctx: WaveContext, tx: RingAperture, rx: RingAperture) -> Result<Self> {
        if tx.axial_position() != 0.0 {
            return Err(invalid("tx.axial_position", "transmit ring must lie in the plane z = 0"));
        }
        if rx.axial_position() <= 0.0 {
            return Err(invalid(
                "distance",
                format!("receive ring must lie at z > 0, got {}", rx.axial_position()),
            ));
        }
        Ok(Self { tx, rx, ctx })
    }

    /// Both rings with the same polarization and quadrature.
    pub fn coaxial(
        ctx: WaveContext,
        tx_radius: f64,
        rx_radius: f64,
        distance: f64,
        polarization: Polarization,
        quadrature_points: usize,
    ) -> Result<Self> {
        Self::new(
            ctx,
            RingAperture::new(tx_radius, 0.0, polarization, quadrature_points)?,
            RingAperture::new(rx_radius, distance, polarization, quadrature_points)?,
        )
    }

    pub fn distance(&self) -> f64 {
        self.rx.axial_position()
    }

    pub fn quadrature(&self) -> (usize, usize) {
        (self.tx.quadrature_points(), self.rx.quadrature_points())
    }

    pub fn with_quadrature(&self, quadrature_points: usize) -> Result<Self> {
        Ok(Self {
            tx: self.tx.with_quadrature(quadrature_points)?,
            rx: self.rx.with_quadrature(quadrature_points)?,
            ctx: self.ctx,
        })
    }

    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        let rx = RingAperture::new(
            self.rx.radius(),
            distance,
            self.rx.polarization(),
            self.rx.quadrature_points(),
        )?;
        Self::new(self.ctx, self.tx, rx)
    }

    /// Highest angular frequency (in modes) of the ring-to-ring kernel, from
    /// the stationary-phase bound on `d(k0|p|)/dΔ`.
    pub fn kernel_bandwidth(&self) -> f64 {
        let (rs, rr) = (self.tx.radius(), self.rx.radius());
        let d = self.distance();
        let closest = (d * d + (rs - rr).powi(2)).sqrt();
        self.ctx.wavenumber() * rs * rr / closest
    }

    /// Quadrature that resolves both the requested modes and the kernel:
    /// [`default_quadrature`] raised to `2B + 8·B^{1/3} + 64` (rounded up to a
    /// multiple of 8) where `B` is [`Self::kernel_bandwidth`].
    pub fn recommended_quadrature(&self, max_abs_mode: u32) -> usize {
        let b = self.kernel_bandwidth();
        let geometric = (2.0 * b + 8.0 * b.cbrt() + 64.0).ceil() as usize;
        default_quadrature(max_abs_mode).max(geometric.div_ceil(8) * 8)
    }
}

/// Polarization-projected Green samples `ê_vᵀ G(r_v, s_k) ĵ_k`, rows indexed
/// by receive nodes and columns by transmit nodes.
pub fn projected_green_matrix<G: DyadicGreen + ?Sized>(
    green: &G,
    rx_nodes: &[RingNode],
    tx_nodes: &[RingNode],
) -> Result<DMatrix<Complex64>> {
    let rows: Vec<Vec<Complex64>> = rx_nodes
        .par_iter()
        .map(|r| {
            tx_nodes
                .iter()
                .map(|s| green.projected(&r.position, &s.position, &r.direction, &s.direction))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(rx_nodes.len(), tx_nodes.len(), &flat))
}

/// `T[k][n] = weight_k · e^{i l_n φ_k} · scale`.
pub(crate) fn synthesis_matrix(nodes: &[RingNode], modes: &OamModeSet, weights: &[f64], scale: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(nodes.len(), modes.len(), |k, n| {
        oam_phase(modes.modes()[n], nodes[k].angle) * (weights[k] * scale)
    })
}

/// `R[m][v] = weight_v · e^{−i l_m θ_v} · scale`.
pub(crate) fn analysis_matrix(nodes: &[RingNode], modes: &OamModeSet, weights: &[f64], scale: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(modes.len(), nodes.len(), |m, v| {
        oam_phase(-modes.modes()[m], nodes[v].angle) * (weights[v] * scale)
    })
}

/// `R · (G · T)`.
pub(crate) fn sandwich(
    analysis: &DMatrix<Complex64>,
    kernel: &DMatrix<Complex64>,
    synthesis: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    analysis * (kernel * synthesis)
}

/// Receive-by-transmit matrix of OAM coupling coefficients `h_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<Complex64>,
    tx_modes: OamModeSet,
    rx_modes: OamModeSet,
    geometry: LinkGeometry,
    degraded: bool,
}

impl CouplingMatrix {
    /// Rows are receive modes, columns transmit modes.
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, rx_index: usize, tx_index: usize) -> Complex64 {
        self.entries[(rx_index, tx_index)]
    }

    pub fn tx_modes(&self) -> &OamModeSet {
        &self.tx_modes
    }

    pub fn rx_modes(&self) -> &OamModeSet {
        &self.rx_modes
    }

    pub fn geometry(&self) -> &LinkGeometry {
        &self.geometry
    }

    /// `(Q_t, Q_r)` used to build the matrix.
    pub fn quadrature(&self) -> (usize, usize) {
        self.geometry.quadrature()
    }

    /// Set when either quadrature fails to resolve its mode set.
    pub fn degraded(&self) -> bool {
        self.degraded
    }

    /// `h_mm` along the main diagonal.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.entries.nrows().min(self.entries.ncols());
        (0..n).map(|i| self.entries[(i, i)]).collect()
    }

    /// Power transfer `|h_mm|²` of each diagonal pair.
    pub fn mode_gains(&self) -> Vec<f64> {
        self.diagonal().iter().map(|h| h.norm_sqr()).collect()
    }

    /// `max_{m≠n} |h_mn| / max_m |h_mm|`.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                let magnitude = self.entries[(i, j)].norm();
                if i == j {
                    diag = diag.max(magnitude);
                } else {
                    off = off.max(magnitude);
                }
            }
        }
        off / diag
    }
}

/// Coupling matrix for the free-space Green's function.
pub fn coupling_matrix(geom: &LinkGeometry, tx_modes: &OamModeSet, rx_modes: &OamModeSet) -> Result<CouplingMatrix> {
    coupling_matrix_with(&FreeSpace::new(geom.ctx), geom, tx_modes, rx_modes)
}

pub fn coupling_matrix_with<G: DyadicGreen + ?Sized>(
    green: &G,
    geom: &LinkGeometry,
    tx_modes: &OamModeSet,
    rx_modes: &OamModeSet,
) -> Result<CouplingMatrix> {
    let tx_nodes = geom.tx.sample_points();
    let rx_nodes = geom.rx.sample_points();
    let kernel = projected_green_matrix(green, &rx_nodes, &tx_nodes)?;
    let tx_w: Vec<f64> = tx_nodes.iter().map(|n| n.weight).collect();
    let rx_w: Vec<f64> = rx_nodes.iter().map(|n| n.weight).collect();
    let synthesis = synthesis_matrix(&tx_nodes, tx_modes, &tx_w, geom.tx.basis_normalization());
    let analysis = analysis_matrix(&rx_nodes, rx_modes, &rx_w, geom.rx.basis_normalization());
    Ok(CouplingMatrix {
        entries: sandwich(&analysis, &kernel, &synthesis),
        tx_modes: tx_modes.clone(),
        rx_modes: rx_modes.clone(),
        geometry: *geom,
        degraded: !tx_modes.resolved_by(geom.tx.quadrature_points())
            || !rx_modes.resolved_by(geom.rx.quadrature_points()),
    })
}

/// A single coupling coefficient `h_mn`, summed entrywise over the node grid.
pub fn coupling_coefficient(geom: &LinkGeometry, rx_mode: i32, tx_mode: i32) -> Result<Complex64> {
    let green = FreeSpace::new(geom.ctx);
    let tx_nodes = geom.tx.sample_points();
    let rx_nodes = geom.rx.sample_points();
    let norm = 1.0 / (2.0 * PI * (geom.tx.radius() * geom.rx.radius()).sqrt());
    let mut total = Complex64::new(0.0, 0.0);
    for r in &rx_nodes {
        let mut inner = Complex64::new(0.0, 0.0);
        for s in &tx_nodes {
            let g = green.projected(&r.position, &s.position, &r.direction, &s.direction)?;
            inner += g * oam_phase(tx_mode, s.angle) * s.weight;
        }
        total += inner * oam_phase(-rx_mode, r.angle) * r.weight;
    }
    Ok(total * norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry(distance_wl: f64, radius_wl: f64, pol: Polarization, q: usize) -> LinkGeometry {
        let ctx = WaveContext::new(5.8e9).unwrap();
        let l = ctx.wavelength();
        LinkGeometry::coaxial(ctx, radius_wl * l, radius_wl * l, distance_wl * l, pol, q).unwrap()
    }

    #[test]
    fn geometry_requires_positive_distance() {
        let ctx = WaveContext::new(5.8e9).unwrap();
        assert!(LinkGeometry::coaxial(ctx, 1.0, 1.0, 0.0, Polarization::Azimuthal, 64).is_err());
        assert!(LinkGeometry::coaxial(ctx, 1.0, 1.0, -2.0, Polarization::Azimuthal, 64).is_err());
    }

    #[test]
    fn default_quadrature_rule() {
        assert_eq!(default_quadrature(0), 256);
        assert_eq!(default_quadrature(24), 256);
        assert_eq!(default_quadrature(25), 264);
        let g = geometry(10.0, 20.0, Polarization::Azimuthal, 64);
        let q = g.recommended_quadrature(8);
        assert!(q % 8 == 0 && q as f64 > 2.0 * g.kernel_bandwidth());
    }

    #[test]
    fn matrix_matches_entrywise_sum() {
        let g = geometry(30.0, 3.0, Polarization::Azimuthal, 64);
        let modes = OamModeSet::centered(5).unwrap();
        let h = coupling_matrix(&g, &modes, &modes).unwrap();
        let scale = h.diagonal().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (m, lm) in modes.iter().enumerate() {
            for (n, ln) in modes.iter().enumerate() {
                let direct = coupling_coefficient(&g, lm, ln).unwrap();
                assert!((direct - h.entry(m, n)).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn single_mode_matrix() {
        let g = geometry(30.0, 3.0, Polarization::LinearX, 64);
        let modes = OamModeSet::centered(1).unwrap();
        let h = coupling_matrix(&g, &modes, &modes).unwrap();
        assert_eq!(h.entries().shape(), (1, 1));
        let direct = coupling_coefficient(&g, 0, 0).unwrap();
        assert!((direct - h.entry(0, 0)).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn azimuthal_link_is_diagonal() {
        let g = geometry(25.0, 4.0, Polarization::Azimuthal, 128);
        let modes = OamModeSet::centered(9).unwrap();
        let h = coupling_matrix(&g, &modes, &modes).unwrap();
        assert!(h.off_diagonal_ratio() < 1e-10);
        assert!(!h.degraded());
    }

    #[test]
    fn undersampled_modes_are_flagged() {
        let g = geometry(25.0, 4.0, Polarization::Azimuthal, 8);
        let modes = OamModeSet::centered(9).unwrap();
        assert!(coupling_matrix(&g, &modes, &modes).unwrap().degraded());
    }
}
