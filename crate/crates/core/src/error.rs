use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point count must be at least 1")]
    NoPoints,
    #[error("window dimensions must be finite and positive (rho={rho}, area={area})")]
    BadWindow { rho: f64, area: f64 },
    #[error("point {index} ({x}, {y}) lies outside the window")]
    PointOutsideWindow { index: usize, x: f64, y: f64 },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("tessellation is numerically degenerate: {0}")]
    Degenerate(String),
    #[error("coloring has {got} bits but the tessellation has {expected} cells")]
    ColoringLength { expected: usize, got: usize },
    #[error("rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}] is not contained in the window")]
    OutsideWindow { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
    #[error("{cells} cells exceed the enumeration limit of {limit}; use the Monte Carlo estimator")]
    EnumerationLimit { cells: usize, limit: usize },
    #[error("radii must satisfy 0 < a < b (a={a}, b={b})")]
    BadRadii { a: f64, b: f64 },
    #[error("m={m} exceeds n={n}")]
    CountOutOfRange { m: u64, n: u64 },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
