//! Physical constants, small 3-D vector and dyadic types, and the free-space
//! scalar and dyadic Green's functions.
//!
//! The dyadic Green's function returned here already carries the `i k0 Z`
//! prefactor, so the radiated field of a current `J` is simply
//! `E(r) = ∫ G(r, s) J(s) ds` with no further `iωμ` factor.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum magnetic permeability μ0 (H/m), CODATA 2018.
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Vacuum electric permittivity ε0 (F/m), derived as 1/(μ0 c²).
pub const VACUUM_PERMITTIVITY: f64 =
    1.0 / (VACUUM_PERMEABILITY * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frequency-dependent quantities shared by every formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    frequency: f64,
    wavelength: f64,
    wavenumber: f64,
    impedance: f64,
}

impl WaveContext {
    pub fn new(frequency: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(invalid("frequency", format!("must be positive and finite, got {frequency}")));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Self {
            frequency,
            wavelength,
            wavenumber: 2.0 * PI / wavelength,
            impedance: (VACUUM_PERMEABILITY / VACUUM_PERMITTIVITY).sqrt(),
        })
    }

    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(invalid("wavelength", format!("must be positive and finite, got {wavelength}")));
        }
        Self::new(SPEED_OF_LIGHT / wavelength)
    }

    /// Frequency in Hz.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Wavelength λ in m.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Wavenumber k0 = 2π/λ in rad/m.
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Free-space wave impedance Z in Ω.
    pub fn impedance(&self) -> f64 {
        self.impedance
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency
    }
}

/// Real Cartesian vector (m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Complex 3-vector: field amplitudes or current density weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub const ZERO: CVec3 = CVec3([Complex64::new(0.0, 0.0); 3]);

    /// Real direction scaled by a complex amplitude.
    pub fn from_real(direction: Vec3, amplitude: Complex64) -> Self {
        CVec3([
            amplitude * direction.x,
            amplitude * direction.y,
            amplitude * direction.z,
        ])
    }

    /// `dᴴ v` for a real direction `d`.
    pub fn project(&self, direction: &Vec3) -> Complex64 {
        self.0[0] * direction.x + self.0[1] * direction.y + self.0[2] * direction.z
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        CVec3(self.0.map(|c| c * factor))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, rhs: CVec3) -> CVec3 {
        CVec3([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, rhs: CVec3) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

/// 3×3 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dyadic3(pub [[Complex64; 3]; 3]);

impl Dyadic3 {
    pub const ZERO: Dyadic3 = Dyadic3([[Complex64::new(0.0, 0.0); 3]; 3]);

    /// `a (Ī − p̂p̂ᵀ) + b (Ī − 3p̂p̂ᵀ)` for a real unit vector `p̂`.
    pub fn from_projectors(p_hat: &Vec3, a: Complex64, b: Complex64) -> Self {
        let p = p_hat.to_array();
        let mut out = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let pp = p[i] * p[j];
                out.0[i][j] = a * (delta - pp) + b * (delta - 3.0 * pp);
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Dyadic3(self.0.map(|row| row.map(|c| c * factor)))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec3) -> CVec3 {
        let mut out = CVec3::ZERO;
        for i in 0..3 {
            out.0[i] = self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2];
        }
        out
    }

    /// `eᵀ G j` for real directions `e` (observation side) and `j` (source side).
    pub fn project(&self, e: &Vec3, j: &Vec3) -> Complex64 {
        let e = e.to_array();
        let j = j.to_array();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..3 {
            for b in 0..3 {
                acc += self.0[a][b] * (e[a] * j[b]);
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn separation(p: &Vec3) -> Result<f64> {
    let dist = p.norm();
    if dist > 0.0 && dist.is_finite() {
        Ok(dist)
    } else {
        Err(Error::Singularity { separation: dist })
    }
}

/// Unbounded-medium scalar Green's function `e^{i k0 |p|} / (4π|p|)`.
pub fn scalar_green(ctx: &WaveContext, p: &Vec3) -> Result<Complex64> {
    let dist = separation(p)?;
    Ok((I * (ctx.wavenumber * dist)).exp() / (4.0 * PI * dist))
}

/// Coefficients of the two projector terms of the free-space dyadic, including
/// the `i k0 Z e^{i k0 |p|}/(4π|p|)` prefactor: `G = a (Ī − p̂p̂ᵀ) + b (Ī − 3p̂p̂ᵀ)`.
fn dyadic_coefficients(ctx: &WaveContext, dist: f64) -> (Complex64, Complex64) {
    let k = ctx.wavenumber;
    let prefactor = I * (k * ctx.impedance) * (I * (k * dist)).exp() / (4.0 * PI * dist);
    // λ/(2π|p|) = 1/(k0 |p|)
    let inv_kr = 1.0 / (k * dist);
    let b = Complex64::new(-inv_kr * inv_kr, inv_kr);
    (prefactor, prefactor * b)
}

/// Free-space dyadic Green's function between observation point `r` and source `s`.
pub fn dyadic_green(ctx: &WaveContext, r: &Vec3, s: &Vec3) -> Result<Dyadic3> {
    let p = *r - *s;
    let dist = separation(&p)?;
    let p_hat = p * (1.0 / dist);
    let (a, b) = dyadic_coefficients(ctx, dist);
    Ok(Dyadic3::from_projectors(&p_hat, a, b))
}

/// `eᵀ G(r, s) j` without forming the full dyadic.
pub fn projected_green(ctx: &WaveContext, r: &Vec3, s: &Vec3, e: &Vec3, j: &Vec3) -> Result<Complex64> {
    let p = *r - *s;
    let dist = separation(&p)?;
    let (a, b) = dyadic_coefficients(ctx, dist);
    let ej = e.dot(j);
    let ep = e.dot(&p) / dist;
    let jp = j.dot(&p) / dist;
    Ok(a * (ej - ep * jp) + b * (ej - 3.0 * ep * jp))
}

/// A dyadic propagation kernel. The free-space Green's function is the only
/// production implementation; the trait lets the verification suite run its
/// checks against deliberately broken kernels.
pub trait DyadicGreen: Sync {
    fn context(&self) -> &WaveContext;

    fn dyadic(&self, r: &Vec3, s: &Vec3) -> Result<Dyadic3>;

    fn projected(&self, r: &Vec3, s: &Vec3, e: &Vec3, j: &Vec3) -> Result<Complex64> {
        Ok(self.dyadic(r, s)?.project(e, j))
    }
}

/// The free-space dyadic Green's function at a fixed frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpace {
    pub ctx: WaveContext,
}

impl FreeSpace {
    pub fn new(ctx: WaveContext) -> Self {
        Self { ctx }
    }
}

impl DyadicGreen for FreeSpace {
    fn context(&self) -> &WaveContext {
        &self.ctx
    }

    fn dyadic(&self, r: &Vec3, s: &Vec3) -> Result<Dyadic3> {
        dyadic_green(&self.ctx, r, s)
    }

    fn projected(&self, r: &Vec3, s: &Vec3, e: &Vec3, j: &Vec3) -> Result<Complex64> {
        projected_green(&self.ctx, r, s, e, j)
    }
}
