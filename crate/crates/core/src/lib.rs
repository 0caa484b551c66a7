//! Amplifier synthesis toolchain: closed-form component sizing for five
//! classic amplifier topologies, SPICE netlist emission and parsing, and a
//! built-in small-signal verifier (h-parameter AC analysis via modified
//! nodal analysis plus a simplified DC bias solve).
//!
//! The flow is `design -> ComponentSet -> build_circuit -> emit`, with
//! `parse` and the `verify` module closing the loop on the emitted text.

pub mod design;
pub mod devices;
pub mod error;
pub mod netlist;
pub mod values;
pub mod verify;

pub use error::{Error, Result};
