use thiserror::Error;

use crate::{bau, cooling, ev, gdp, hourly, ingest, runner, variation};

/// Any failure raised by the pipeline, tagged by the stage that produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Fit(#[from] gdp::FitError),
    #[error(transparent)]
    Gdp(#[from] gdp::GdpError),
    #[error(transparent)]
    Bau(#[from] bau::BauError),
    #[error(transparent)]
    Noise(#[from] variation::NoiseError),
    #[error(transparent)]
    Hourly(#[from] hourly::HourlyError),
    #[error(transparent)]
    Cooling(#[from] cooling::CoolingError),
    #[error(transparent)]
    Ev(#[from] ev::EvError),
    #[error(transparent)]
    Run(#[from] runner::RunError),
}

impl Error {
    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Ingest(_) => "ingest",
            Error::Fit(_) => "fit",
            Error::Gdp(_) => "gdp",
            Error::Bau(_) => "bau",
            Error::Noise(_) => "noise",
            Error::Hourly(_) => "hourly",
            Error::Cooling(_) => "cooling",
            Error::Ev(_) => "ev",
            Error::Run(_) => "run",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
