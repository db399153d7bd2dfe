use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),

    #[error("ring 0 is the central block and has no source sides")]
    CentralLayer,

    #[error("sites {0} and {1} do not share a row or column")]
    NotCollinear(Site, Site),

    #[error("path from {from} to {to} is blocked at {at}")]
    PathBlocked { from: Site, to: Site, at: Site },

    #[error("site {0} lies outside the grid")]
    OutOfBounds(Site),

    #[error("schedule replay failed: {0}")]
    Replay(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("board file: {0}")]
    Board(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
