use std::path::{Path, PathBuf};

use proptest::prelude::*;
use tcopc::config::{ControlSection, DelaySection, InputKind, NodeSection, OutputSection, ScenarioSection, TopologySection};
use tcopc::{load_config, parse_config, parse_q_list, serialize_config, InputKind as Kind, Overrides, RunConfig};
use tcopc_core::presets;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.cfg"))
}

fn text(name: &str) -> String {
    std::fs::read_to_string(config_path(name)).unwrap()
}

#[test]
fn table1_file_matches_reference_network() {
    let (topo, scenario) = load_config(&config_path("table1")).unwrap().build().unwrap();
    assert_eq!(topo, presets::table1(true));
    assert_eq!(scenario, presets::impulse_scenario());
    let (topo, _) = load_config(&config_path("table1_nostab")).unwrap().build().unwrap();
    assert_eq!(topo, presets::table1(false));
}

#[test]
fn case_files_match_reference_weights() {
    for c in 1..=3 {
        let (topo, scenario) = load_config(&config_path(&format!("case{c}"))).unwrap().build().unwrap();
        assert_eq!(topo, presets::table1_with_weights(presets::case_weights(c).unwrap(), true));
        assert_eq!(scenario, presets::dual_sine_scenario());
    }
    let (topo, _) = load_config(&config_path("passive_baseline")).unwrap().build().unwrap();
    assert_eq!(topo, presets::passive_baseline());
}

#[test]
fn bundled_files_round_trip() {
    for name in ["table1", "table1_nostab", "case1", "case2", "case3", "passive_baseline"] {
        let c = parse_config(&text(name)).unwrap();
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c, "{name}");
    }
}

#[test]
fn case2_weights_survive_round_trip() {
    let c = parse_config(&text("case2")).unwrap();
    let again = parse_config(&serialize_config(&c)).unwrap();
    assert_eq!(again.control.q_diag, vec![1.0, 0.0001, 1.0]);
}

#[test]
fn flag_overrides_equal_file_edits() {
    // --q-diag
    let mut flagged = parse_config(&text("table1")).unwrap();
    Overrides { q_diag: Some(parse_q_list("1,0.0001,1").unwrap()), ..Default::default() }
        .apply(&mut flagged)
        .unwrap();
    let edited = parse_config(&text("table1").replace("q_diag = [1.0, 1.0, 1.0]", "q_diag = [1.0, 0.0001, 1.0]")).unwrap();
    assert_eq!(flagged, edited);

    // --no-stabilizer
    let mut flagged = parse_config(&text("table1")).unwrap();
    Overrides { no_stabilizer: true, ..Default::default() }.apply(&mut flagged).unwrap();
    let edited = parse_config(&text("table1").replace("stabilizer = true", "stabilizer = false")).unwrap();
    assert_eq!(flagged, edited);

    // --scenario dual-sine on the impulse file gives the case-1 scenario
    let mut flagged = parse_config(&text("table1")).unwrap();
    Overrides { scenario: Some(Kind::DualSine), ..Default::default() }.apply(&mut flagged).unwrap();
    let case1 = parse_config(&text("case1")).unwrap();
    assert_eq!(flagged.scenario, case1.scenario);
    assert_eq!(flagged.build().unwrap(), case1.build().unwrap());
}

#[test]
fn bad_override_is_a_validation_error() {
    let mut c = parse_config(&text("table1")).unwrap();
    let err = Overrides { q_diag: Some(vec![1.0, 1.0]), ..Default::default() }.apply(&mut c).unwrap_err();
    assert!(err.to_string().contains("weight diagonal"), "{err}");
    assert!(parse_q_list("1,x,1").is_err());
}

#[test]
fn syntax_error_reports_line() {
    let broken = text("table1").replace("dt = 0.001", "dt = ");
    let err = parse_config(&broken).unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    let node = (
        prop::array::uniform3(-100.0..100.0f64),
        prop::option::of((0.0..0.2f64, 0.0..1.0f64, 0.0..30.0f64)),
    )
        .prop_map(|(impedance, delay)| NodeSection {
            impedance,
            delay: delay.map(|(offset, frac, frequency)| DelaySection { offset, amplitude: offset * frac, frequency }),
        });
    (1usize..5)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec(node.clone(), m),
                prop::collection::vec(1e-4..1e4f64, m),
                prop::option::of(0.0..50.0f64),
                any::<bool>(),
                prop_oneof![Just(InputKind::Impulse), Just(InputKind::DualSine)],
                prop::option::of(0.1..50.0f64),
                0.1..30.0f64,
                1e-4..1e-2f64,
                prop::option::of(1e-3..1e6f64),
                1usize..20,
            )
        })
        .prop_map(|(nodes, q_diag, xi, stabilizer, kind, amplitude, duration, dt, alpha_max, decimation)| RunConfig {
            topology: TopologySection { hub_num: vec![1.0, 0.0], hub_den: vec![0.5, 15.0, 1.0], xi, nodes },
            scenario: ScenarioSection {
                kind,
                amplitude,
                frequencies: (kind == InputKind::DualSine).then(|| vec![std::f64::consts::PI, 0.3]),
                samples: None,
                duration,
                dt,
            },
            control: ControlSection { stabilizer, q_diag, eps_sing: None, alpha_max },
            output: OutputSection { decimation, ..OutputSection::default() },
        })
}

proptest! {
    #[test]
    fn any_valid_config_round_trips(c in arb_config()) {
        prop_assume!(c.validate().is_ok());
        let text = serialize_config(&c);
        prop_assert_eq!(parse_config(&text).unwrap(), c);
    }
}
