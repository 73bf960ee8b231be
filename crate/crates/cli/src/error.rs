use eulerlab::catalog::CatalogError;
use eulerlab::fieldlab::FieldError;
use eulerlab::liesym::LieError;
use eulerlab::model::ModelError;
use eulerlab::reduced::ReducedError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Reduced(#[from] ReducedError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_PARAM: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_CFL: i32 = 5;
pub const EXIT_NAN: i32 = 6;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Catalog(CatalogError::UnknownId(_)) => EXIT_UNKNOWN,
            CliError::Lie(LieError::Unknown(_)) => EXIT_UNKNOWN,
            CliError::Catalog(_) | CliError::Input(_) | CliError::Io(_) => EXIT_PARAM,
            CliError::Lie(LieError::Precondition { .. }) => EXIT_PRECONDITION,
            CliError::Lie(
                LieError::BadParameters { .. } | LieError::MissingDerivative(_) | LieError::NoFiniteOrbit(_),
            ) => EXIT_PARAM,
            CliError::Lie(_) | CliError::Model(_) => EXIT_FAIL,
            CliError::Field(e) => match e {
                FieldError::Cfl { .. } => EXIT_CFL,
                FieldError::NaN { .. } => EXIT_NAN,
                FieldError::NonZeroMeanPsi { .. } | FieldError::NotPeriodic { .. } | FieldError::Singular { .. } => {
                    EXIT_PRECONDITION
                }
                _ => EXIT_PARAM,
            },
            CliError::Reduced(e) => match e {
                ReducedError::Precondition { .. }
                | ReducedError::NotInvariant(_)
                | ReducedError::MismatchedFixedParts(_) => EXIT_PRECONDITION,
                ReducedError::Model(_) | ReducedError::Eval(_) => EXIT_FAIL,
                _ => EXIT_PARAM,
            },
        }
    }
}
