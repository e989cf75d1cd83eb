pub mod beam;
pub mod cli;
pub mod destroy_repair;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod hedging;
pub mod instance;
pub mod lp;
pub mod mip;
pub mod report;
pub mod scenario_lp;

pub use error::{Error, Result};
pub use instance::{Instance, Plan};
