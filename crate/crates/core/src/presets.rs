//! The three-node reference network and its standard input scenarios.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::allocator::{AllocatorSettings, WeightMatrix};
use crate::delay::DelayProfile;
use crate::lti::{ContinuousTF, ImpedanceTriple};
use crate::sim::{InputSignal, NodeSpec, Scenario, Topology};

pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_DURATION: f64 = 20.0;

/// `Y(s) = s / (0.5s² + 15s + 1)`
pub fn hub_admittance() -> ContinuousTF {
    ContinuousTF::new(vec![1.0, 0.0], vec![0.5, 15.0, 1.0]).expect("valid hub model")
}

pub fn node_impedances() -> [ImpedanceTriple; 3] {
    [
        ImpedanceTriple::new(10.0, 5.0, 400.0),
        ImpedanceTriple::new(-10.0, -5.0, -400.0),
        ImpedanceTriple::new(-20.0, -10.0, -800.0),
    ]
}

/// Round trip `c·(0.25·sin(20t)) + c` for `c` = 0.05, 0.1, 0.15 s.
pub fn round_trip_delays() -> [DelayProfile; 3] {
    [0.05, 0.1, 0.15].map(|c| DelayProfile::new(c, 0.25 * c, 20.0).expect("valid delay"))
}

pub fn table1(stabilizer: bool) -> Topology {
    table1_with_weights(WeightMatrix::identity(3), stabilizer)
}

pub fn table1_with_weights(weights: WeightMatrix, stabilizer: bool) -> Topology {
    let nodes: Vec<NodeSpec> = node_impedances()
        .into_iter()
        .zip(round_trip_delays())
        .map(|(impedance, round_trip)| NodeSpec { impedance, round_trip })
        .collect();
    Topology {
        hub: hub_admittance(),
        xi: None,
        nodes,
        weights,
        stabilizer,
        allocator: AllocatorSettings::default(),
    }
}

/// Weight diagonals for the three dissipation-distribution cases (1-based).
pub fn case_weights(case: usize) -> Option<WeightMatrix> {
    let diag = match case {
        1 => vec![1.0, 1.0, 1.0],
        2 => vec![1.0, 1e-4, 1.0],
        3 => vec![1.0, 1e4, 1.0],
        _ => return None,
    };
    WeightMatrix::new(diag).ok()
}

pub fn impulse_scenario() -> Scenario {
    Scenario { input: InputSignal::Impulse { area: 1.0 }, duration: DEFAULT_DURATION, dt: DEFAULT_DT }
}

/// `u(t) = 20·(sin(πt) + sin(0.5πt))`
pub fn dual_sine_scenario() -> Scenario {
    Scenario {
        input: InputSignal::DualSine { amplitude: 20.0, omegas: [PI, 0.5 * PI] },
        duration: DEFAULT_DURATION,
        dt: DEFAULT_DT,
    }
}

/// Negative control: nodes 2 and 3 made passive, all delays removed.
pub fn passive_baseline() -> Topology {
    let triples = [
        ImpedanceTriple::new(10.0, 5.0, 400.0),
        ImpedanceTriple::new(10.0, 5.0, 400.0),
        ImpedanceTriple::new(20.0, 10.0, 800.0),
    ];
    Topology {
        hub: hub_admittance(),
        xi: None,
        nodes: triples
            .into_iter()
            .map(|impedance| NodeSpec { impedance, round_trip: DelayProfile::zero() })
            .collect(),
        weights: WeightMatrix::identity(3),
        stabilizer: true,
        allocator: AllocatorSettings::default(),
    }
}
