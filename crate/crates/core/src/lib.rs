pub mod aperture;
pub mod channel;
pub mod em;
pub mod error;
pub mod metrics;
