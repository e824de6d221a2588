use std::path::Path;

use hypokin_cli::{validate, ExperimentConfig, Kind};

fn shipped() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/experiment.toml");
    ExperimentConfig::load(&path).unwrap()
}

fn fields(cfg: &ExperimentConfig) -> Vec<String> {
    validate(cfg).into_iter().map(|v| v.field).collect()
}

#[test]
fn empty_config_names_every_required_field() {
    assert_eq!(fields(&ExperimentConfig::default()), ["kind", "output.dir"]);
    let cfg = ExperimentConfig { kind: Some(Kind::Ensemble), ..Default::default() };
    let want = [
        "output.dir",
        "box.t",
        "box.x",
        "box.v",
        "grid.n",
        "coefficients.lambda",
        "coefficients.Lambda",
        "coefficients.s_amp",
        "coefficients.cell",
        "coefficients.seeds",
    ];
    assert_eq!(fields(&cfg), want);
    let cfg = ExperimentConfig { kind: Some(Kind::Constants), ..Default::default() };
    assert_eq!(fields(&cfg), ["output.dir", "constants.delta1", "constants.delta2", "constants.s_inf"]);
    let cfg = ExperimentConfig { kind: Some(Kind::KernelCheck), ..Default::default() };
    assert_eq!(fields(&cfg), ["output.dir"]);
}

#[test]
fn shipped_config_is_valid_for_every_kind() {
    let mut cfg = shipped();
    assert_eq!(cfg.kind, Some(Kind::Ensemble));
    for k in [Kind::KernelCheck, Kind::Solve, Kind::Verify, Kind::Ensemble, Kind::Constants, Kind::Counterexample, Kind::Convergence] {
        cfg.kind = Some(k);
        assert_eq!(validate(&cfg), [], "{k:?}");
    }
}

#[test]
fn shipped_config_is_the_default_ensemble() {
    let spec = shipped().ensemble_spec().unwrap();
    assert_eq!(spec, hypokin::suite::EnsembleSpec::default());
    assert_eq!(shipped().seeds(), (1..=20).collect::<Vec<_>>());
}

#[test]
fn cylinder_outside_the_box_is_one_violation() {
    let mut cfg = shipped();
    cfg.grid.padding = Some([0.0, 1.5, 2.0]);
    let v = validate(&cfg);
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].field.contains("poincare Q_5"), "{}", v[0]);
}

#[test]
fn ensemble_needs_seeds() {
    let mut cfg = shipped();
    cfg.coefficients.seeds = Some(vec![]);
    let v = validate(&cfg);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].field, "coefficients.seeds");
    assert!(v[0].reason.contains("nonempty"));
}

#[test]
fn bad_values_name_their_field() {
    let mut cfg = shipped();
    cfg.grid.n = Some([40, 256, 160]);
    cfg.checks.enabled = Some(vec!["energy".into(), "bogus".into()]);
    cfg.checks.sigma = Some(0.5);
    cfg.coefficients.lambda = Some(3.0);
    let f = fields(&cfg);
    assert_eq!(f, ["coefficients", "checks.enabled", "checks.sigma", "grid.n"], "{:?}", validate(&cfg));
    let mut cfg = shipped();
    cfg.kind = Some(Kind::Constants);
    cfg.constants.delta1 = Some(1.5);
    assert_eq!(fields(&cfg), ["constants.delta1"]);
}

#[test]
fn coarse_x_grid_is_rejected_before_compute() {
    let mut cfg = shipped();
    cfg.grid.n = Some([160, 64, 40]);
    cfg.grid.record = None;
    let v = validate(&cfg);
    assert!(v.iter().any(|v| v.field == "grid.n" && v.reason.contains("four cells")), "{v:?}");
}

#[test]
fn unknown_keys_do_not_parse() {
    assert!(ExperimentConfig::from_toml("kind = \"ensemble\"\n[grid]\nsize = 3\n").is_err());
    assert!(ExperimentConfig::from_toml("kind = \"nonsense\"\n").is_err());
}
