use proptest::prelude::*;
use std::process::Command;
use urllc_cli::presets::{load_preset, preset_names};
use urllc_cli::{run_sweep, run_table, ConfigError, Method, Quantity, ScenarioConfig, SweepVar, Value};
use urllc_core::ModeId;

fn small_sweep() -> ScenarioConfig {
    ScenarioConfig {
        modes: vec!["d2d".into(), "df_cellular".into()],
        d_p: 0.0,
        d_b: 0.0,
        t1: Some(4e-4),
        t2: Some(4e-4),
        sweep: SweepVar::EpsMax,
        grid: vec![1e-5, 1e-3],
        ..ScenarioConfig::default()
    }
}

fn field_of(e: ConfigError) -> &'static str {
    match e {
        ConfigError::Field { field, .. } => field,
        other => panic!("expected a field error, got {other}"),
    }
}

#[test]
fn invalid_configs_name_the_field() {
    let mut c = small_sweep();
    c.grid.clear();
    assert_eq!(field_of(c.validate().unwrap_err()), "grid");

    let mut c = small_sweep();
    c.grid = vec![1e-3, 1e-5];
    assert_eq!(field_of(c.validate().unwrap_err()), "grid");

    let mut c = small_sweep();
    c.t1 = Some(3.5e-4);
    assert_eq!(field_of(c.validate().unwrap_err()), "T1");

    let mut c = small_sweep();
    c.sigma_db = -1.0;
    assert_eq!(field_of(c.validate().unwrap_err()), "sigma_dB");

    let mut c = small_sweep();
    c.modes = vec!["relay".into()];
    assert_eq!(field_of(c.validate().unwrap_err()), "modes");

    let mut c = small_sweep();
    c.facet = Some(SweepVar::EpsMax);
    c.facet_grid = vec![1e-3];
    assert_eq!(field_of(c.validate().unwrap_err()), "facet");

    let mut c = small_sweep();
    c.quantity = Quantity::Availability;
    assert_eq!(field_of(c.validate().unwrap_err()), "r");

    let mut c = small_sweep();
    c.seed = u64::MAX;
    assert_eq!(field_of(c.validate().unwrap_err()), "seed");
    assert!(c.to_toml().is_err());

    let mut c = small_sweep();
    c.mc_range = true;
    assert_eq!(field_of(c.validate().unwrap_err()), "mc_range");
}

#[test]
fn presets_round_trip_through_toml() {
    for name in preset_names() {
        let cfg = load_preset(name).unwrap().unwrap();
        let back: ScenarioConfig = cfg.to_toml().unwrap().parse().unwrap();
        assert_eq!(back, cfg, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_round_trip(
        n_t in 1u32..256,
        sigma in 0.1f64..20.0,
        eps in 1e-9f64..1e-1,
        frames in proptest::option::of((1u32..=8, 1u32..=8)),
        rho_c in proptest::option::of(0.0f64..=1.0),
        rho_d in proptest::option::of(0.0f64..=1.0),
        r in proptest::option::of(0.5f64..500.0),
        quantity in prop::sample::select(vec![Quantity::Range, Quantity::Availability, Quantity::Loss]),
        method in prop::sample::select(vec![Method::Integral, Method::Quantile]),
        facet in proptest::option::of(prop::sample::select(vec![SweepVar::RhoC, SweepVar::Dp, SweepVar::R])),
        grid in prop::collection::vec(-1e3f64..1e3, 0..6),
        seed in 0..=i64::MAX as u64,
        output in proptest::option::of("[a-z]{1,8}\\.csv"),
    ) {
        let cfg = ScenarioConfig {
            n_t,
            sigma_db: sigma,
            eps_max: eps,
            t1: frames.map(|f| f.0 as f64 * 1e-4),
            t2: frames.map(|f| f.1 as f64 * 1e-4),
            rho_c,
            rho_d,
            r,
            quantity,
            method,
            facet,
            facet_grid: grid.clone(),
            grid,
            seed,
            output,
            ..ScenarioConfig::default()
        };
        let back: ScenarioConfig = cfg.to_toml().unwrap().parse().unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn sentinels_replace_non_numbers() {
    let mut cfg = load_preset("fig6").unwrap().unwrap();
    cfg.grid = vec![100.0, 250.0];
    let t = run_table(&cfg).unwrap();
    assert_eq!(t.cell(0, 0, ModeId::DfMulti).unwrap().value, Value::Unbounded);
    assert!(matches!(t.cell(1, 0, ModeId::DfMulti).unwrap().value, Value::Number(_)));
    let csv = run_sweep(&cfg).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",unbounded,"));

    let cfg = ScenarioConfig {
        d_p: 4.5e-4,
        d_b: 4.5e-4,
        sweep: SweepVar::Nt,
        grid: vec![8.0],
        ..ScenarioConfig::default()
    };
    let t = run_table(&cfg).unwrap();
    assert_eq!(t.cell(0, 0, ModeId::DfMulti).unwrap().value, Value::Infeasible);
    let csv = run_sweep(&cfg).unwrap();
    assert!(csv.contains("infeasible"));
    assert!(!csv.to_lowercase().contains("nan"));
}

#[test]
fn csv_layout_is_fixed() {
    let cfg = small_sweep();
    let csv = run_sweep(&cfg).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "eps_max,d2d_range,d2d_t1,d2d_t2,d2d_iterations,d2d_se,\
         df_cellular_range,df_cellular_t1,df_cellular_t2,df_cellular_iterations,df_cellular_se"
    );
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 11);
    }
    // Nine significant digits.
    assert!(lines[1].starts_with("1.00000000e-5,"), "{}", lines[1]);
    assert_eq!(csv, run_sweep(&cfg).unwrap());
}

#[test]
fn quantile_ranges_grow_with_eps() {
    let t = run_table(&small_sweep()).unwrap();
    for m in [ModeId::D2d, ModeId::DfCellular] {
        let a = t.cell(0, 0, m).unwrap().value.number().unwrap();
        let b = t.cell(1, 0, m).unwrap().value.number().unwrap();
        assert!(b > a, "{m}: {a} then {b}");
    }
}

#[test]
fn availability_and_loss_columns() {
    let cfg = ScenarioConfig {
        modes: vec!["df_multi".into()],
        quantity: Quantity::Availability,
        t1: Some(5e-4),
        t2: Some(3e-4),
        sweep: SweepVar::R,
        grid: vec![20.0, 60.0],
        ..ScenarioConfig::default()
    };
    let t = run_table(&cfg).unwrap();
    let a0 = t.cell(0, 0, ModeId::DfMulti).unwrap().value.number().unwrap();
    let a1 = t.cell(1, 0, ModeId::DfMulti).unwrap().value.number().unwrap();
    assert!(a0 > a1 && a0 <= 1.0 && a1 >= 0.0, "{a0} {a1}");

    let cfg = ScenarioConfig {
        quantity: Quantity::Loss,
        ..cfg
    };
    let t = run_table(&cfg).unwrap();
    let l0 = t.cell(0, 0, ModeId::DfMulti).unwrap().value.number().unwrap();
    let l1 = t.cell(1, 0, ModeId::DfMulti).unwrap().value.number().unwrap();
    assert!(l0 < l1, "{l0} {l1}");
}

fn urllc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_urllc"));
    c.env("URLLC_THREADS", "1");
    c
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "grid = []\n").unwrap();
    let out = urllc().arg("sweep").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`grid`"));

    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "sigma_db = 8\n").unwrap();
    let out = urllc().arg("sweep").arg(&typo).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_db"));

    let out = urllc().args(["preset", "fig9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = urllc().args(["preset", "fig5", "--show"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let shown: ScenarioConfig = String::from_utf8(out.stdout).unwrap().parse().unwrap();
    assert_eq!(shown, load_preset("fig5").unwrap().unwrap());
}

#[test]
fn sweep_writes_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let csv_path = dir.path().join("s.csv");
    let out = urllc().arg("sweep").arg(&path).arg("--out").arg(&csv_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), run_sweep(&cfg).unwrap());

    let out = urllc().arg("range").arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mode d2d") && text.contains("mode df_cellular"), "{text}");
}
