//! Experiment configuration.
//!
//! A config file is TOML with a top-level `experiment` key and the sections
//! `[link]`, `[sweep]`, `[numerics]` and `[output]`. Anything left out is
//! taken from the defaults of the selected experiment, so an empty file is a
//! valid config.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use oamcap_core::aperture::{Polarization, MIN_QUADRATURE_POINTS};
use oamcap_core::em::WaveContext;
use oamcap_core::metrics::ApertureSize;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    SeVsSnr,
    SeVsDistance,
    EdofVsDistance,
    EdofVsElements,
    LinkBer,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::SeVsSnr,
        Self::SeVsDistance,
        Self::EdofVsDistance,
        Self::EdofVsElements,
        Self::LinkBer,
        Self::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SeVsSnr => "se_vs_snr",
            Self::SeVsDistance => "se_vs_distance",
            Self::EdofVsDistance => "edof_vs_distance",
            Self::EdofVsElements => "edof_vs_elements",
            Self::LinkBer => "link_ber",
            Self::Convergence => "convergence",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How mode gains enter the spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GainScale {
    /// Physical `|h_mm|²` including free-space loss.
    #[default]
    Raw,
    /// Gains rescaled so that they sum to the number of modes.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    /// Multiples of the wavelength at `link.frequency_hz`.
    #[default]
    Wavelength,
    Meter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationKind {
    #[default]
    Azimuthal,
    LinearX,
}

impl From<PolarizationKind> for Polarization {
    fn from(p: PolarizationKind) -> Self {
        match p {
            PolarizationKind::Azimuthal => Polarization::Azimuthal,
            PolarizationKind::LinearX => Polarization::LinearX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeConvention {
    #[default]
    Diameter,
    Radius,
}

impl From<SizeConvention> for ApertureSize {
    fn from(s: SizeConvention) -> Self {
        match s {
            SizeConvention::Diameter => ApertureSize::Diameter,
            SizeConvention::Radius => ApertureSize::Radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub frequency_hz: f64,
    /// Unit of every length in the config (radii and distances).
    pub unit: LengthUnit,
    pub tx_radius: f64,
    pub rx_radius: f64,
    pub polarization: PolarizationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub distances: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// CAPA series, one per centered mode count.
    pub modes: Vec<usize>,
    /// UCA series, one per element count (each carries as many modes).
    pub elements: Vec<usize>,
    /// Adds a UCA with `⌈2πR/(λ/2)⌉` elements.
    pub half_wavelength_uca: bool,
    /// Carrier frequencies for `edof_vs_distance`; radii stay physical.
    pub bands_hz: Vec<f64>,
    /// Ring radii for `edof_vs_distance` (both ends equal).
    pub radii: Vec<f64>,
    /// Quadrature sizes for `convergence`.
    pub quadratures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Fixed quadrature size; chosen per geometry when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<usize>,
    /// QPSK vectors per SNR point in `link_ber`.
    pub symbols: usize,
    pub aperture_size: SizeConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plot: bool,
    pub scale: GainScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub link: LinkConfig,
    pub sweep: SweepConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub quadrature: Option<usize>,
    pub out: Option<PathBuf>,
    pub scale: Option<GainScale>,
    pub no_plot: bool,
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

impl ExperimentConfig {
    /// 5.8 GHz, 20λ rings on both ends, and a sweep suited to `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            seed: 1,
            link: LinkConfig {
                frequency_hz: 5.8e9,
                unit: LengthUnit::Wavelength,
                tx_radius: 20.0,
                rx_radius: 20.0,
                polarization: PolarizationKind::Azimuthal,
            },
            sweep: SweepConfig {
                distances: vec![50.0],
                snr_db: range(-10.0, 30.0, 2.0),
                modes: vec![4, 8],
                elements: vec![4, 8],
                half_wavelength_uca: true,
                bands_hz: vec![5.8e9, 24e9],
                radii: vec![10.0, 20.0],
                quadratures: vec![16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512],
            },
            numerics: NumericsConfig {
                quadrature: None,
                symbols: 20_000,
                aperture_size: SizeConvention::Diameter,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                plot: true,
                scale: GainScale::Raw,
            },
        };
        let sweep = &mut cfg.sweep;
        match experiment {
            Experiment::SeVsSnr => {}
            Experiment::SeVsDistance => {
                sweep.distances = vec![10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0];
                sweep.snr_db = vec![20.0];
                sweep.modes = vec![8, 16];
                sweep.elements = vec![8];
                sweep.half_wavelength_uca = false;
            }
            Experiment::EdofVsDistance => {
                sweep.distances = vec![
                    20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 3200.0, 5000.0, 6400.0, 10000.0, 20000.0,
                ];
            }
            Experiment::EdofVsElements => {
                sweep.distances = vec![10.0, 100.0];
                sweep.elements = vec![4, 8, 16, 32, 64, 128, 256, 512, 1024];
            }
            Experiment::LinkBer => {
                sweep.snr_db = range(0.0, 12.0, 2.0);
                sweep.modes = vec![8];
                cfg.output.scale = GainScale::Normalized;
            }
            Experiment::Convergence => {
                sweep.distances = vec![100.0];
                sweep.modes = vec![17];
            }
        }
        cfg
    }

    /// Defaults of the selected experiment, overlaid with `file` (if any)
    /// and then with `overrides`, validated.
    pub fn load(file: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let user = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
                Some(text)
            }
            None => None,
        };
        Self::from_toml_str(user.as_deref().unwrap_or(""), overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &Overrides) -> CliResult<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config("config", e.message().to_string()))?;
        let experiment = match (overrides.experiment, user.get("experiment")) {
            (Some(e), _) => e,
            (None, Some(value)) => value
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| CliError::config("experiment", e.message().to_string()))?,
            (None, None) => Experiment::SeVsSnr,
        };
        let mut merged = toml::Table::try_from(Self::defaults(experiment))
            .map_err(|e| CliError::config("config", e.to_string()))?;
        merge(&mut merged, user);
        merged.insert("experiment".into(), toml::Value::String(experiment.name().into()));
        let mut cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config("config", e.message().to_string()))?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(q) = o.quadrature {
            self.numerics.quadrature = Some(q);
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(scale) = o.scale {
            self.output.scale = scale;
        }
        if o.no_plot {
            self.output.plot = false;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::config(field, format!("must be positive and finite, got {v}")))
            }
        };
        let all_positive = |field: &str, values: &[f64]| {
            values.iter().try_for_each(|v| positive(field, *v))
        };
        let non_empty = |field: &str, len: usize| {
            if len == 0 {
                Err(CliError::config(field, "sweep must not be empty"))
            } else {
                Ok(())
            }
        };
        let single = |field: &str, len: usize| {
            if len == 1 {
                Ok(())
            } else {
                Err(CliError::config(
                    field,
                    format!("{} takes exactly one value here, got {len}", self.experiment),
                ))
            }
        };

        positive("link.frequency_hz", self.link.frequency_hz)?;
        positive("link.tx_radius", self.link.tx_radius)?;
        positive("link.rx_radius", self.link.rx_radius)?;
        all_positive("sweep.distances", &self.sweep.distances)?;
        all_positive("sweep.bands_hz", &self.sweep.bands_hz)?;
        all_positive("sweep.radii", &self.sweep.radii)?;
        if let Some(v) = self.sweep.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config("sweep.snr_db", format!("must be finite, got {v}")));
        }
        if self.sweep.modes.contains(&0) {
            return Err(CliError::config("sweep.modes", "mode counts must be positive"));
        }
        if self.sweep.elements.contains(&0) {
            return Err(CliError::config("sweep.elements", "element counts must be positive"));
        }
        if let Some(q) = self.numerics.quadrature {
            if q < MIN_QUADRATURE_POINTS {
                return Err(CliError::config(
                    "numerics.quadrature",
                    format!("need at least {MIN_QUADRATURE_POINTS} points, got {q}"),
                ));
            }
        }
        if let Some(q) = self.sweep.quadratures.iter().find(|q| **q < MIN_QUADRATURE_POINTS) {
            return Err(CliError::config(
                "sweep.quadratures",
                format!("need at least {MIN_QUADRATURE_POINTS} points, got {q}"),
            ));
        }

        let s = &self.sweep;
        non_empty("sweep.distances", s.distances.len())?;
        match self.experiment {
            Experiment::SeVsSnr | Experiment::SeVsDistance => {
                if self.experiment == Experiment::SeVsSnr {
                    single("sweep.distances", s.distances.len())?;
                    non_empty("sweep.snr_db", s.snr_db.len())?;
                } else {
                    single("sweep.snr_db", s.snr_db.len())?;
                }
                if s.modes.is_empty() && s.elements.is_empty() && !s.half_wavelength_uca {
                    return Err(CliError::config("sweep.modes", "no CAPA or UCA series to evaluate"));
                }
            }
            Experiment::EdofVsDistance => {
                non_empty("sweep.bands_hz", s.bands_hz.len())?;
                non_empty("sweep.radii", s.radii.len())?;
            }
            Experiment::EdofVsElements => non_empty("sweep.elements", s.elements.len())?,
            Experiment::LinkBer => {
                single("sweep.distances", s.distances.len())?;
                single("sweep.modes", s.modes.len())?;
                non_empty("sweep.snr_db", s.snr_db.len())?;
                if self.numerics.symbols == 0 {
                    return Err(CliError::config("numerics.symbols", "must be positive"));
                }
            }
            Experiment::Convergence => {
                single("sweep.distances", s.distances.len())?;
                single("sweep.modes", s.modes.len())?;
                non_empty("sweep.quadratures", s.quadratures.len())?;
            }
        }
        Ok(())
    }

    pub fn context(&self) -> WaveContext {
        WaveContext::new(self.link.frequency_hz).expect("validated frequency")
    }

    /// Converts a configured length to meters.
    pub fn meters(&self, value: f64) -> f64 {
        match self.link.unit {
            LengthUnit::Wavelength => value * self.context().wavelength(),
            LengthUnit::Meter => value,
        }
    }

    pub fn polarization(&self) -> Polarization {
        self.link.polarization.into()
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
