//! Ring apertures, the OAM Fourier basis and its quadrature.
//!
//! A ring of radius `R` in the plane `z = axial_position` is discretized into
//! `Q` equally spaced nodes at angles `2πq/Q`, each carrying the arc-length
//! weight `2πR/Q`. On this grid the composite trapezoid rule integrates
//! trigonometric polynomials of degree below `Q` exactly, which is what makes
//! the discrete OAM basis exactly orthonormal.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::em::{dyadic_green, CVec3, Vec3, WaveContext};
use crate::error::{invalid, Error, Result};

/// Smallest number of quadrature nodes a ring aperture accepts.
pub const MIN_QUADRATURE_POINTS: usize = 8;

/// Direction of the current (transmit) or of the sensed field (receive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Polarization {
    /// Tangent to the ring, `(−sin α, cos α, 0)`.
    #[default]
    Azimuthal,
    /// Fixed `x̂` everywhere on the ring.
    LinearX,
}

impl Polarization {
    pub fn direction(&self, angle: f64) -> Vec3 {
        match self {
            Polarization::Azimuthal => Vec3::new(-angle.sin(), angle.cos(), 0.0),
            Polarization::LinearX => Vec3::X,
        }
    }
}

/// One quadrature node of a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingNode {
    pub angle: f64,
    pub position: Vec3,
    pub direction: Vec3,
    /// Arc-length weight in m.
    pub weight: f64,
}

/// Nodes of an arbitrary ring discretization (any count ≥ 1). Used both for
/// aperture quadrature and for the element positions of a uniform circular array.
pub(crate) fn ring_nodes(radius: f64, z: f64, polarization: Polarization, count: usize) -> Vec<RingNode> {
    let weight = 2.0 * PI * radius / count as f64;
    (0..count)
        .map(|q| {
            let angle = 2.0 * PI * q as f64 / count as f64;
            RingNode {
                angle,
                position: Vec3::new(radius * angle.cos(), radius * angle.sin(), z),
                direction: polarization.direction(angle),
                weight,
            }
        })
        .collect()
}

/// Circular ring aperture coaxial with the z-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingAperture {
    radius: f64,
    axial_position: f64,
    polarization: Polarization,
    quadrature_points: usize,
}

impl RingAperture {
    pub fn new(radius: f64, axial_position: f64, polarization: Polarization, quadrature_points: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be positive and finite, got {radius}")));
        }
        if !axial_position.is_finite() {
            return Err(invalid("axial_position", "must be finite"));
        }
        if quadrature_points < MIN_QUADRATURE_POINTS {
            return Err(invalid(
                "quadrature_points",
                format!("need at least {MIN_QUADRATURE_POINTS}, got {quadrature_points}"),
            ));
        }
        Ok(Self {
            radius,
            axial_position,
            polarization,
            quadrature_points,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn axial_position(&self) -> f64 {
        self.axial_position
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }

    /// Same ring with a different number of quadrature nodes.
    pub fn with_quadrature(&self, quadrature_points: usize) -> Result<Self> {
        Self::new(self.radius, self.axial_position, self.polarization, quadrature_points)
    }

    pub fn with_polarization(&self, polarization: Polarization) -> Self {
        Self { polarization, ..*self }
    }

    pub fn point_at(&self, angle: f64) -> Vec3 {
        Vec3::new(self.radius * angle.cos(), self.radius * angle.sin(), self.axial_position)
    }

    pub fn direction_at(&self, angle: f64) -> Vec3 {
        self.polarization.direction(angle)
    }

    /// Quadrature nodes: position, current/field direction and arc-length weight.
    pub fn sample_points(&self) -> Vec<RingNode> {
        ring_nodes(self.radius, self.axial_position, self.polarization, self.quadrature_points)
    }

    /// `1/√(2πR)`, the normalization of the OAM basis on this ring.
    pub fn basis_normalization(&self) -> f64 {
        1.0 / self.circumference().sqrt()
    }
}

/// Ordered set of distinct OAM mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OamModeSet {
    modes: Vec<i32>,
}

impl OamModeSet {
    pub fn new(modes: Vec<i32>) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("modes", "mode set must not be empty"));
        }
        let mut seen = HashSet::with_capacity(modes.len());
        for &l in &modes {
            if !seen.insert(l) {
                return Err(invalid("modes", format!("duplicate mode index {l}")));
            }
        }
        Ok(Self { modes })
    }

    /// The centered set `{−⌊N/2⌋, …, ⌈N/2⌉−1}`.
    pub fn centered(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("modes", "mode count must be positive"));
        }
        let start = -((count / 2) as i32);
        Self::new((0..count as i32).map(|i| start + i).collect())
    }

    pub fn modes(&self) -> &[i32] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> + '_ {
        self.modes.iter().copied()
    }

    pub fn max_abs(&self) -> u32 {
        self.modes.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Largest pairwise index difference `max |l_n − l_n'|`.
    pub fn spread(&self) -> u32 {
        let max = self.modes.iter().max().copied().unwrap_or(0);
        let min = self.modes.iter().min().copied().unwrap_or(0);
        (max as i64 - min as i64) as u32
    }

    pub fn position(&self, mode: i32) -> Option<usize> {
        self.modes.iter().position(|&l| l == mode)
    }

    /// True when quadrature with `points` nodes resolves every pair of modes.
    pub fn resolved_by(&self, points: usize) -> bool {
        points as u64 > self.spread() as u64
    }
}

/// A basis function evaluated at one point of the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSample {
    pub point: Vec3,
    pub direction: Vec3,
    /// `e^{i l α}/√(2πR)`.
    pub phase_weight: Complex64,
}

impl BasisSample {
    pub fn vector(&self) -> CVec3 {
        CVec3::from_real(self.direction, self.phase_weight)
    }
}

pub(crate) fn oam_phase(mode: i32, angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, mode as f64 * angle)
}

pub fn basis_eval(ap: &RingAperture, mode: i32, angle: f64) -> BasisSample {
    BasisSample {
        point: ap.point_at(angle),
        direction: ap.direction_at(angle),
        phase_weight: oam_phase(mode, angle) * ap.basis_normalization(),
    }
}

/// Pairwise inner products of a mode set on one aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    /// Entry `(n, n')` is `Σ_q w_q ϕ_nᴴ(α_q) ϕ_n'(α_q)`.
    pub matrix: DMatrix<Complex64>,
    pub quadrature_points: usize,
    /// Set when the quadrature does not exceed the mode-index spread, so that
    /// distinct modes may alias onto each other.
    pub degraded: bool,
}

impl GramMatrix {
    /// Largest deviation from the identity.
    pub fn max_identity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.matrix[(i, j)] - target).norm());
            }
        }
        worst
    }
}

pub fn gram_matrix(ap: &RingAperture, set: &OamModeSet) -> GramMatrix {
    let nodes = ap.sample_points();
    let norm2 = ap.basis_normalization().powi(2);
    let n = set.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let (li, lj) = (set.modes()[i], set.modes()[j]);
        let sum: Complex64 = nodes
            .iter()
            .map(|node| oam_phase(lj - li, node.angle) * node.weight)
            .sum();
        sum * norm2
    });
    GramMatrix {
        matrix,
        quadrature_points: ap.quadrature_points(),
        degraded: !set.resolved_by(ap.quadrature_points()),
    }
}

/// Current `J = Σ_n ξ_n ϕ_{l_n}` sampled at every quadrature node.
pub fn synthesize_current(ap: &RingAperture, set: &OamModeSet, coefficients: &[Complex64]) -> Result<Vec<CVec3>> {
    if coefficients.len() != set.len() {
        return Err(Error::LengthMismatch {
            what: "basis coefficients",
            expected: set.len(),
            actual: coefficients.len(),
        });
    }
    let norm = ap.basis_normalization();
    Ok(ap
        .sample_points()
        .iter()
        .map(|node| {
            let amplitude: Complex64 = set
                .iter()
                .zip(coefficients)
                .map(|(l, xi)| xi * oam_phase(l, node.angle))
                .sum();
            CVec3::from_real(node.direction, amplitude * norm)
        })
        .collect())
}

/// Basis coefficients `∫ ψ_lᴴ E dr` of field (or current) samples taken on the
/// aperture's quadrature grid.
pub fn project_coefficients(ap: &RingAperture, set: &OamModeSet, samples: &[CVec3]) -> Result<Vec<Complex64>> {
    if samples.len() != ap.quadrature_points() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a {}-node ring",
            samples.len(),
            ap.quadrature_points()
        )));
    }
    let nodes = ap.sample_points();
    let norm = ap.basis_normalization();
    Ok(set
        .iter()
        .map(|l| {
            let sum: Complex64 = nodes
                .iter()
                .zip(samples)
                .map(|(node, field)| oam_phase(-l, node.angle) * field.project(&node.direction) * node.weight)
                .sum();
            sum * norm
        })
        .collect())
}

/// Field radiated by current samples on `tx`, evaluated at `points`:
/// `E(r) = Σ_q w_q G(r, s_q) J(s_q)`.
pub fn radiate_field(ctx: &WaveContext, tx: &RingAperture, currents: &[CVec3], points: &[Vec3]) -> Result<Vec<CVec3>> {
    if currents.len() != tx.quadrature_points() {
        return Err(Error::GridMismatch(format!(
            "{} current samples for a {}-node ring",
            currents.len(),
            tx.quadrature_points()
        )));
    }
    let nodes = tx.sample_points();
    points
        .par_iter()
        .map(|r| {
            let mut field = CVec3::ZERO;
            for (node, current) in nodes.iter().zip(currents) {
                let g = dyadic_green(ctx, r, &node.position)?;
                field += g.mul_vec(current).scale(Complex64::new(node.weight, 0.0));
            }
            Ok(field)
        })
        .collect()
}
