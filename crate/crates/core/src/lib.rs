//! Activity and social-tension dynamics: single site, networks and continuum fields.

pub mod continuum;
pub mod error;
pub mod kernel;
pub mod network;
pub mod roots;
pub mod shocks;
pub mod single_site;

pub use error::{Error, Result};
pub use kernel::{ModelParams, SiteState};
