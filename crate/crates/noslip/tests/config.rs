use noslip::config::{config_from_header, header_lines, parse_config, Mode, RunConfig, Table};
use noslip::error::exit;
use noslip::experiments::{ExperimentName, ExperimentSpec};

const PLATES: &str = r#"
mode = "roll3d"
g = 5.0

[geometry]
shape = "strip"
width = 1.0
ball_radius = 0.5

[inertia]
eta = 0.3

[initial]
x = [0.0, 0.0]
u = [-1.0, -1.0]
spin = [0.5]

[run]
t_end = 40.0
sample_dt = 0.05
"#;

#[test]
fn plate_config_round_trips() {
    let cfg = parse_config(PLATES).unwrap();
    let again = parse_config(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    let res = cfg.resolve().unwrap();
    assert_eq!(res.table, Some(Table::Plate { width: 1.0, ball_radius: 0.5 }));
    assert_eq!(res.inertia.unwrap().eta(), 0.3);
}

#[test]
fn experiment_config_round_trips() {
    let spec = ExperimentSpec::defaults(ExperimentName::TwoPlates);
    assert_eq!((spec.size, spec.ball_radius, spec.g), (1.0, 0.5, 5.0));
    let text = spec.header().join("\n");
    let cfg = parse_config(&text).unwrap();
    assert_eq!(cfg.mode, Mode::Experiment);
    assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    assert_eq!(cfg.resolve().unwrap().experiment, Some(spec));
}

#[test]
fn header_block_reproduces_config() {
    let res = parse_config(PLATES).unwrap().resolve().unwrap();
    let text: String = header_lines(&res).iter().map(|l| format!("# {l}\n")).collect::<String>() + "t,x1\n";
    assert!(text.contains("# derived: gamma = "));
    let back: RunConfig = config_from_header(&text).unwrap();
    assert_eq!(back, res.config);
}

#[test]
fn errors_map_to_parse_exit_code() {
    for bad in [
        "mode = \"noslip\"\nbogus = 1\n",
        "mode = \"sideways\"\n",
        "mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradius = -1.0\n[inertia]\ngamma = 0.5\n[initial]\nx = [0.0, 0.0]\nu = [1.0, 0.0]\n",
        "mode = \"experiment\"\n[experiment]\nname = \"two-plates\"\netas = []\n",
        "mode = \"noslip\"\n[geometry]\nshape = \"disc\"\nradius = 1.0\n[inertia]\n[initial]\nx = [0.0, 0.0]\nu = [1.0, 0.0]\n",
    ] {
        let err = parse_config(bad).unwrap_err();
        assert_eq!(err.exit_code(), exit::PARSE, "{bad}: {err}");
    }
}

#[test]
fn unknown_nested_key_is_named() {
    let err = parse_config(&PLATES.replace("t_end", "t_ending")).unwrap_err();
    assert!(err.to_string().contains("t_ending"), "{err}");
}
