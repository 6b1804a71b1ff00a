use std::path::PathBuf;
use std::process::{Command, Output};

use fluxon_cli::commands::{self, Axis};
use fluxon_cli::schema::{HolonomyReport, MetricReport, ModesReport, PathSpec, RunManifest, VerifyReport, WordSpec};
use fluxon_cli::verify::{verify, Level};
use fluxon_core::config::FluxConfig;
use fluxon_core::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::f64::consts::PI;

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fluxon-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn fluxon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluxon")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn manifest(command: &str) -> RunManifest {
    RunManifest {
        command: command.into(),
        config: None,
        quad_tol: None,
        ode_tol: None,
        fd_step: None,
        collision_guard: None,
        output: None,
        seed: None,
    }
}

fn config(fluxes: &[f64], pos: &[(f64, f64)]) -> FluxConfig {
    FluxConfig::new(fluxes.to_vec(), pos.iter().map(|&(x, y)| Complex64::new(x, y)).collect())
}

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(report: &T) {
    let text = serde_json::to_string(report).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, report);
}

const HALF: &str = r#"{"fluxes":[0.5,0.5,0.5],"positions":[[0,0],[1,0],[0.5,0]]}"#;
const TWO: &str = r#"{"fluxes":[0.7,0.8],"positions":[[0,0],[1,0.3]]}"#;
const THREE: &str = r#"{"fluxes":[0.9,0.9,0.9],"positions":[[0,0],[1,0.4],[-0.5,1.2]]}"#;
const LOOP: &str = r#"{"segments":[{"type":"circle","mover":2,"center":[0,0],"turns":1}]}"#;
const WORD: &str = r#"{"moves":[{"encircle":[2,1],"power":1}]}"#;

#[test]
fn reports_round_trip_through_json() {
    let modes = commands::modes(config(&[1.5, 0.7], &[(0., 0.), (1., 0.)]), manifest("modes")).unwrap();
    round_trip(&modes);
    let half = config(&[0.5; 3], &[(0., 0.), (1., 0.), (0.3, 0.7)]);
    round_trip(&commands::metric(half, false, manifest("metric")).unwrap());
    let path: PathSpec = serde_json::from_str(LOOP).unwrap();
    let word: WordSpec = serde_json::from_str(WORD).unwrap();
    round_trip(&path);
    round_trip(&word);
    let three: FluxConfig = serde_json::from_str(THREE).unwrap();
    round_trip(&commands::holonomy_report(three, Some(&path), Some(&word), manifest("holonomy")).unwrap());
    round_trip(&verify(Level::Quick, 11, manifest("verify")));
}

#[test]
fn binary_output_parses_as_the_report_types() {
    let half = scratch("half.json", HALF);
    let o = fluxon(&["metric", half.to_str().unwrap(), "--factorized-only"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: MetricReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.bruteforce.is_none() && r.discrepancy.is_none());
    let o = fluxon(&["modes", half.to_str().unwrap()]);
    let _: ModesReport = serde_json::from_str(&stdout(&o)).unwrap();
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let a = fluxon(&["verify", "--level", "quick", "--seed", "5"]);
    let b = fluxon(&["verify", "--seed", "5", "--level", "quick"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let r: VerifyReport = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(r.passed && r.properties.iter().all(|p| p.passed && p.error.is_none()));
    assert_eq!(r.manifest.seed, Some(5));
}

#[test]
fn full_verify_includes_the_oracles() {
    let r = verify(Level::Full, 2, manifest("verify"));
    let names: Vec<&str> = r.properties.iter().map(|p| p.name.as_str()).collect();
    assert!(names.contains(&"metric_bruteforce_vs_factorized"));
    assert!(names.contains(&"braid_holonomy_numeric_vs_analytic"));
    assert!(r.passed, "{:#?}", r.properties);
}

#[test]
fn exit_codes() {
    let near = scratch("near.json", r#"{"fluxes":[0.5,0.5],"positions":[[0,0],[1,0.2]]}"#);
    let o = fluxon(&["metric", near.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Φ_T"), "{}", stderr(&o));

    let two = scratch("two.json", TWO);
    let open = scratch("open.json", r#"{"segments":[{"type":"line","mover":2,"to":[2,0]}]}"#);
    let o = fluxon(&["holonomy", two.to_str().unwrap(), "--path", open.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("closed path"));

    let broken = scratch("broken.json", r#"{"fluxes":[0.5"#);
    assert_eq!(fluxon(&["modes", broken.to_str().unwrap()]).status.code(), Some(2));
    let half = scratch("half.json", HALF);
    assert_eq!(fluxon(&["metric", half.to_str().unwrap(), "--quad-tol", "-1"]).status.code(), Some(2));
    let bad_word = scratch("bad-word.json", r#"{"moves":[{"encircle":[0,1],"power":1}]}"#);
    let three = scratch("three.json", THREE);
    let o = fluxon(&["holonomy", three.to_str().unwrap(), "--word", bad_word.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mode_report_examples() {
    let seven = config(&[1.0; 7], &[(0., 0.), (0.3, 0.1), (0.1, 0.35), (3., 0.), (3.3, 0.2), (3.1, -0.3), (2.8, 0.25)]);
    assert_eq!(commands::modes(seven, manifest("modes")).unwrap().d, 6);
    let single = commands::modes(config(&[0.5], &[(0., 0.)]), manifest("modes")).unwrap();
    assert_eq!((single.d, single.summary.as_str()), (0, "no zero modes"));
    assert_eq!(commands::modes(config(&[0.9, 0.9], &[(0., 0.), (1., 0.)]), manifest("modes")).unwrap().d, 1);
    let mixed = commands::modes(config(&[1.5, 1.0, 0.4], &[(0., 0.), (1., 0.), (0., 1.)]), manifest("modes")).unwrap();
    assert_eq!(mixed.classification, ["supercritical", "critical", "subcritical"]);
    assert_eq!(mixed.n, [1, 0, 0]);
}

#[test]
fn metric_methods_agree_for_half_fluxes() {
    let half: FluxConfig = serde_json::from_str(HALF).unwrap();
    let r = commands::metric(half, false, manifest("metric")).unwrap();
    assert_eq!(r.factorized.g.len(), 1);
    assert!(r.discrepancy.unwrap() < 1e-5);
    assert!(r.factorized.eigenvalues[0] > 0.0);
}

fn parse_csv(text: &str) -> Vec<(f64, f64, Option<f64>)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,R"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let r = if f[2] == "nan" { None } else { Some(f[2].parse().unwrap()) };
            (f[0].parse().unwrap(), f[1].parse().unwrap(), r)
        })
        .collect()
}

#[test]
fn curvature_map_marks_excluded_cells_and_is_reflection_symmetric() {
    let half = scratch("half.json", HALF);
    let o = fluxon(&[
        "curvature-map", half.to_str().unwrap(), "--mover", "3", "--x", "-1:2:7", "--y", "-1:1:5", "--collision-guard", "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cells = parse_csv(&stdout(&o));
    assert_eq!(cells.len(), 35);
    for &(x, y, r) in &cells {
        let on_fluxon = y == 0.0 && (x == 0.0 || x == 1.0);
        assert_eq!(r.is_none(), on_fluxon, "({x}, {y})");
        if let Some(r) = r {
            let mirror = cells.iter().find(|c| c.0 == x && c.1 == -y).unwrap().2.unwrap();
            assert!((r - mirror).abs() < 1e-6, "R({x}, {y}) = {r} vs {mirror}");
        }
    }
    assert!(stdout(&o).contains(",nan\n"));
}

#[test]
fn two_fluxon_curvature_vanishes() {
    let two: FluxConfig = serde_json::from_str(TWO).unwrap();
    let grid = commands::curvature_map(
        two,
        2,
        Axis::parse("-1:2:7").unwrap(),
        Axis::parse("-1:1:5").unwrap(),
        &manifest("curvature-map"),
    )
    .unwrap();
    for (_, _, r) in parse_csv(&grid) {
        if let Some(r) = r {
            assert!(r.abs() < 1e-6, "R = {r}");
        }
    }
}

#[test]
fn holonomy_report_examples() {
    let path: PathSpec = serde_json::from_str(LOOP).unwrap();
    let two: FluxConfig = serde_json::from_str(TWO).unwrap();
    let r = commands::holonomy_report(two, Some(&path), None, manifest("holonomy")).unwrap();
    let phase = r.numeric.unwrap().eigenphases[0];
    assert!((phase.rem_euclid(2.0 * PI) - PI).abs() < 1e-5, "{phase}");
    assert!(r.analytic.is_none());

    let three = scratch("three.json", THREE);
    let path = scratch("loop.json", LOOP);
    let word = scratch("word.json", WORD);
    let out = scratch("report.json", "");
    let o = fluxon(&[
        "holonomy", three.to_str().unwrap(), "--path", path.to_str().unwrap(), "--word", word.to_str().unwrap(),
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r: HolonomyReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.discrepancy.unwrap() < 1e-4);
    assert_eq!(r.numeric.unwrap().u.len(), 2);
}

#[test]
fn grid_axes_parse() {
    assert_eq!(Axis::parse("-1:2:4").unwrap().points(), [-1.0, 0.0, 1.0, 2.0]);
    assert_eq!(Axis::parse("0.5:0.5:1").unwrap().points(), [0.5]);
    for bad in ["1:2", "2:1:3", "a:b:c", "0:1:0"] {
        assert!(Axis::parse(bad).is_err(), "{bad}");
    }
}
