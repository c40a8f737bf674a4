//! Centralized optimal passivity control for a hub connected to several remote nodes over
//! delayed channels.
//!
//! A centralized observer ([`observer::EnergyLedger`]) integrates the energy flowing through the
//! hub ports, crediting the hub's output-strict-passivity index. When the observed energy turns
//! negative, [`allocator::allocate`] spreads exactly enough damping over the node ports to bring it
//! back to zero, weighted by a diagonal penalty matrix. [`sim::Simulation`] wires the pieces into a
//! discrete-time loop.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// `!(x > y)` is used on purpose so that NaN falls into the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod allocator;
pub mod delay;
pub mod error;
mod dense;
pub mod lti;
pub mod observer;
pub mod presets;
pub mod sim;

pub use allocator::{allocate, allocate_with, apply_dissipation, AllocationResult, AllocatorSettings, WeightMatrix};
pub use delay::{DelayLine, DelayProfile, Tap};
pub use error::{Error, Result};
pub use lti::{estimate_osp_index, ContinuousTF, Discretization, HubAdmittance, ImpedanceTriple, NodeImpedance};
pub use observer::EnergyLedger;
pub use sim::{DivergenceLimits, InputSignal, NodeSpec, PortRecord, RunOutput, Scenario, Simulation, StepRecord, Summary, Topology, Trace};
