pub mod coeff;
pub mod legendre;
pub mod noise;
pub mod stats;
pub mod oracle;
pub mod schemes;
