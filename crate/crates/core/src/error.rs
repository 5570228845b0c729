use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// The guidance field is undefined this close to a wavefunction node.
    #[error("node region: density {density:e} below threshold {threshold:e}")]
    NodeRegion { density: f64, threshold: f64 },

    #[error("trajectory stalled near a node at t = {t_last}")]
    NodeStall { t_last: f64 },

    #[error("pointer saturated: kappa * Re(p_w) = {value}")]
    Saturation { value: f64 },

    #[error("bin {bin} underfilled: {n_used} of {wanted} events")]
    UnderfilledBin {
        bin: usize,
        n_used: usize,
        wanted: usize,
    },

    #[error("grid too coarse: full and half resolution differ by {rel_diff:e} (relative)")]
    GridTooCoarse { rel_diff: f64 },

    #[error("histogram binning mismatch: {0}")]
    BinMismatch(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, field: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            field,
            reason: reason.into(),
        })
    }
}
