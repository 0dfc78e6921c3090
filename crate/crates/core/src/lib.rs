//! Coarse-grained lattice protein structure prediction with variational
//! circuit sampling.
//!
//! Pipeline: encode conformations of a residue chain as turn bitstrings on
//! a tetrahedral, BCC, or FCC lattice; score them with a contact-potential
//! energy function; train a hardware-efficient real-amplitude ansatz by
//! CVaR minimization over measured samples; and compare the sampled
//! energies against the exact ground state from exhaustive enumeration.

pub mod energy;
pub mod error;
pub mod lattice;
pub mod metrics;
pub mod optimize;
pub mod oracle;
pub mod registry;
pub mod runio;
pub mod sim;

pub use error::{Error, Result};
