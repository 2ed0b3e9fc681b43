use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    Dimension { width: u32, height: u32 },

    #[error("{what} ({x},{y},{w}x{h}) lies outside the {bound_w}x{bound_h} frame")]
    OutOfBounds {
        what: &'static str,
        x: i64,
        y: i64,
        w: u32,
        h: u32,
        bound_w: u32,
        bound_h: u32,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Mismatch { expected: usize, found: usize },

    #[error("positive bag {0} has no significance estimate")]
    MissingSignificance(usize),

    #[error("bag significance must be positive, got {0}")]
    ZeroBagSignificance(f64),

    #[error("requested {requested} samples but only {available} are available")]
    InsufficientSamples { requested: usize, available: usize },

    #[error("frame size {found_w}x{found_h} differs from tracker frame size {expected_w}x{expected_h}")]
    FrameSize {
        expected_w: u32,
        expected_h: u32,
        found_w: u32,
        found_h: u32,
    },

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },

    #[error("frame {index}: {source}")]
    AtFrame {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips any frame-index wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrame { source, .. } => source.root(),
            other => other,
        }
    }
}
