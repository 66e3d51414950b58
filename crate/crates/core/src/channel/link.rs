//! Parallel OAM channels with additive white Gaussian noise: `y = Hx + z`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

use super::CouplingMatrix;

/// Mode-domain channel with circularly symmetric complex Gaussian noise of
/// total variance `σ²` per receive mode (`σ²/2` in each of I and Q).
#[derive(Debug, Clone, PartialEq)]
pub struct AwgnLink {
    channel: DMatrix<Complex64>,
    noise_variance: f64,
    total_power: f64,
}

impl AwgnLink {
    pub fn new(channel: DMatrix<Complex64>, noise_variance: f64, total_power: f64) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(invalid("noise_variance", format!("must be positive, got {noise_variance}")));
        }
        Self::build(channel, noise_variance, total_power)
    }

    /// The `σ² → 0` limit: `transmit` returns `Hx` exactly.
    pub fn noiseless(channel: DMatrix<Complex64>, total_power: f64) -> Result<Self> {
        Self::build(channel, 0.0, total_power)
    }

    pub fn from_coupling(coupling: &CouplingMatrix, noise_variance: f64, total_power: f64) -> Result<Self> {
        Self::new(coupling.entries().clone(), noise_variance, total_power)
    }

    fn build(channel: DMatrix<Complex64>, noise_variance: f64, total_power: f64) -> Result<Self> {
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(invalid("total_power", format!("must be positive, got {total_power}")));
        }
        if channel.is_empty() {
            return Err(invalid("channel", "empty channel matrix"));
        }
        Ok(Self {
            channel,
            noise_variance,
            total_power,
        })
    }

    pub fn channel(&self) -> &DMatrix<Complex64> {
        &self.channel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_variance == 0.0
    }

    /// Number of transmitted mode streams.
    pub fn streams(&self) -> usize {
        self.channel.ncols()
    }

    /// Equal allocation `P_t / M`.
    pub fn per_mode_power(&self) -> f64 {
        self.total_power / self.streams() as f64
    }

    /// Transmit SNR per mode, `P_t / (M σ²)`.
    pub fn snr_per_mode(&self) -> f64 {
        self.per_mode_power() / self.noise_variance
    }

    /// `y = Hx + z`. Deterministic for a given generator state.
    pub fn transmit<R: Rng + ?Sized>(&self, symbols: &[Complex64], rng: &mut R) -> Result<Vec<Complex64>> {
        if symbols.len() != self.streams() {
            return Err(Error::LengthMismatch {
                what: "transmit symbols",
                expected: self.streams(),
                actual: symbols.len(),
            });
        }
        let x = DVector::from_column_slice(symbols);
        let mut y = &self.channel * x;
        if !self.is_noiseless() {
            let normal = Normal::new(0.0, (self.noise_variance / 2.0).sqrt())
                .map_err(|e| invalid("noise_variance", e.to_string()))?;
            for v in y.iter_mut() {
                let re = normal.sample(rng);
                let im = normal.sample(rng);
                *v += Complex64::new(re, im);
            }
        }
        Ok(y.iter().copied().collect())
    }
}

/// Finite symbol alphabet with index-based bit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 || !points.len().is_power_of_two() {
            return Err(invalid("constellation", "size must be a power of two, at least 2"));
        }
        Ok(Self { points })
    }

    /// Gray-labelled QPSK with symbol energy `energy`: bit 0 selects the sign of
    /// the in-phase part, bit 1 the quadrature part.
    pub fn qpsk(energy: f64) -> Self {
        let a = (energy / 2.0).sqrt();
        let points = (0..4)
            .map(|idx| {
                let re = if idx & 1 == 0 { a } else { -a };
                let im = if idx & 2 == 0 { a } else { -a };
                Complex64::new(re, im)
            })
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (idx, p) in self.points.iter().enumerate() {
            let dist = (y - p).norm_sqr();
            if dist < best_dist {
                best = idx;
                best_dist = dist;
            }
        }
        best
    }

    pub fn random_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.points.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Detected constellation indices, one per receive mode.
    pub indices: Vec<usize>,
    /// `y_m / h_mm`.
    pub equalized: Vec<Complex64>,
    /// `|h_mm|² P_t / (M σ²)` per mode; infinite on a noiseless link.
    pub snr_per_mode: Vec<f64>,
}

/// Single-tap equalization on the diagonal followed by nearest-point detection.
pub fn equalize_and_detect(link: &AwgnLink, received: &[Complex64], constellation: &Constellation) -> Result<Detection> {
    let h = link.channel();
    let modes = h.nrows().min(h.ncols());
    if received.len() != h.nrows() {
        return Err(Error::LengthMismatch {
            what: "received samples",
            expected: h.nrows(),
            actual: received.len(),
        });
    }
    let mut indices = Vec::with_capacity(modes);
    let mut equalized = Vec::with_capacity(modes);
    let mut snr = Vec::with_capacity(modes);
    for m in 0..modes {
        let hmm = h[(m, m)];
        if hmm.norm_sqr() == 0.0 {
            return Err(Error::ZeroDiagonal(m));
        }
        let eq = received[m] / hmm;
        indices.push(constellation.nearest(eq));
        equalized.push(eq);
        snr.push(if link.is_noiseless() {
            f64::INFINITY
        } else {
            hmm.norm_sqr() * link.per_mode_power() / link.noise_variance()
        });
    }
    Ok(Detection {
        indices,
        equalized,
        snr_per_mode: snr,
    })
}

/// Closed-form Gray QPSK bit error rate at symbol SNR `Es/N0`: `Q(√(Es/N0))`.
pub fn qpsk_ber(symbol_snr: f64) -> f64 {
    0.5 * erfc((symbol_snr / 2.0).sqrt())
}

/// Error counts from a Monte-Carlo QPSK run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCounts {
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

impl ErrorCounts {
    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols as f64
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

/// Sends `vectors` random QPSK vectors (one symbol per mode, energy `P_t/M`)
/// through `link` and counts detection errors on every diagonal stream.
pub fn simulate_qpsk<R: Rng + ?Sized>(link: &AwgnLink, vectors: usize, rng: &mut R) -> Result<ErrorCounts> {
    let constellation = Constellation::qpsk(link.per_mode_power());
    let streams = link.streams();
    let mut counts = ErrorCounts::default();
    let mut sent = vec![0usize; streams];
    let mut x = vec![Complex64::new(0.0, 0.0); streams];
    for _ in 0..vectors {
        for (idx, sym) in sent.iter_mut().zip(x.iter_mut()) {
            *idx = constellation.random_index(rng);
            *sym = constellation.points()[*idx];
        }
        let y = link.transmit(&x, rng)?;
        let detection = equalize_and_detect(link, &y, &constellation)?;
        for (tx, rx) in sent.iter().zip(&detection.indices) {
            counts.symbols += 1;
            counts.bits += 2;
            let wrong = (tx ^ rx).count_ones() as u64;
            counts.bit_errors += wrong;
            counts.symbol_errors += u64::from(wrong > 0);
        }
    }
    Ok(counts)
}
