use std::fmt;
use std::process::ExitCode;

use pushrec_core::analysis::AnalysisError;
use pushrec_core::dynamics::DynamicsError;
use pushrec_core::gait::GaitError;
use pushrec_core::ingest::IngestError;
use pushrec_core::lipm::LipmError;
use pushrec_core::smoothing::SmoothError;
use pushrec_core::table::TableError;

/// Exit status classes: 1 usage, 2 bad input data, 3 numerical failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        })
    }

    pub fn context(self, prefix: impl fmt::Display) -> Failure {
        match self {
            Failure::Usage(m) => Failure::Usage(format!("{prefix}: {m}")),
            Failure::Data(m) => Failure::Data(format!("{prefix}: {m}")),
            Failure::Numeric(m) => Failure::Numeric(format!("{prefix}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, m) = match self {
            Failure::Usage(m) => ("usage error", m),
            Failure::Data(m) => ("data error", m),
            Failure::Numeric(m) => ("numerical failure", m),
        };
        write!(f, "{kind}: {m}")
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<SmoothError> for Failure {
    fn from(e: SmoothError) -> Self {
        let m = e.to_string();
        match e {
            SmoothError::RankDeficient { .. } | SmoothError::NonFinite => Failure::Numeric(m),
            SmoothError::InvalidRate(_) => Failure::Usage(m),
            _ => Failure::Data(m),
        }
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Smooth(s) => s.into(),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        let m = e.to_string();
        match e {
            DynamicsError::Factorization | DynamicsError::NonFinite { .. } => Failure::Numeric(m),
            DynamicsError::InvalidStep { .. } => Failure::Usage(m),
            _ => Failure::Data(m),
        }
    }
}

impl From<LipmError> for Failure {
    fn from(e: LipmError) -> Self {
        let m = e.to_string();
        match e {
            LipmError::NonFinite { .. } => Failure::Numeric(m),
            _ => Failure::Usage(m),
        }
    }
}

impl From<GaitError> for Failure {
    fn from(e: GaitError) -> Self {
        match e {
            GaitError::Smooth(s) => s.into(),
            GaitError::InvalidParameter(m) => Failure::Usage(m),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Gait { source_name, error } => Failure::from(error).context(source_name),
            AnalysisError::Cop(error) => Failure::from(error).context("CoP asymmetry"),
            other => Failure::Data(other.to_string()),
        }
    }
}
