use std::fs;

use vtorsion::io::{parse_csv, plot_svg, trace_to_csv, PlotStyle};
use vtorsion::scenario::{
    plane_config, run, FieldSpec, ReportKind, Scenario, ScenarioConfig, EXIT_FAIL, EXIT_PASS, EXIT_USAGE,
};
use vtorsion::suite::{catalog, catalog_entry};

#[test]
fn csv_round_trip_is_bit_exact() {
    let sc = Scenario::resolve(&catalog_entry("winding-02").unwrap()).unwrap();
    let tr = sc.integrate().unwrap();
    let (states, diags) = parse_csv(&trace_to_csv(&tr)).unwrap();
    assert_eq!(states.len(), tr.len());
    for (a, b) in states.iter().zip(&tr.states) {
        for (x, y) in [(a.t, b.t), (a.pos[0], b.pos[0]), (a.pos[1], b.pos[1]), (a.vel[0], b.vel[0]), (a.vel[1], b.vel[1])] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    for (a, b) in diags.iter().zip(&tr.diagnostics) {
        assert_eq!(a.speed.to_bits(), b.speed.to_bits());
        assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
        assert_eq!(a.g_v.to_bits(), b.g_v.to_bits());
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = catalog_entry("shear-backward").unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(&cfg, a.path(), true).exit_code, EXIT_PASS);
    assert_eq!(run(&cfg, b.path(), true).exit_code, EXIT_PASS);
    for name in ["shear-backward.csv", "shear-backward.report.json", "shear-backward.svg"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn example_runs_pass() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["sphere-loxodrome-45", "plane-straight", "shear-diagonal"] {
        let res = run(&catalog_entry(id).unwrap(), dir.path(), false);
        assert_eq!(res.exit_code, EXIT_PASS, "{id}: {:?}", res.outcome.map(|o| o.report));
        assert_eq!(res.files.len(), 2);
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("shear-diagonal.report.json")).unwrap()).unwrap();
    let confinement = report["reports"].as_array().unwrap().iter().find(|r| r["name"] == "confinement").unwrap();
    assert_eq!(confinement["verdict"], "PASS");
    assert!((report["strip"]["upper"].as_f64().unwrap() - 2.390060455382811).abs() < 1e-12);
}

#[test]
fn winding_plot_splits_at_launch() {
    let sc = Scenario::resolve(&catalog_entry("winding-02").unwrap()).unwrap();
    let tr = sc.integrate().unwrap();
    assert_eq!((tr.first().t, tr.last().t), (-10.0, 10.0));
    let svg = plot_svg(&[sc.plot_curve(&tr)], &PlotStyle { title: "winding".into(), ..PlotStyle::default() }).unwrap();
    assert_eq!(svg.matches(r#"class="dashed""#).count(), 1);
    assert_eq!(svg.matches(r#"class="solid""#).count(), 1);
    let points = |class: &str| -> Vec<String> {
        let tag = format!(r#"<polyline class="{class}" points=""#);
        let start = svg.find(&tag).unwrap() + tag.len();
        let end = start + svg[start..].find('"').unwrap();
        svg[start..end].split(' ').map(str::to_string).collect()
    };
    let (dashed, solid) = (points("dashed"), points("solid"));
    // both halves share the launch point (0, 2), drawn with y flipped
    assert_eq!(dashed.last().unwrap(), "0.000000,-2.000000");
    assert_eq!(solid.first().unwrap(), "0.000000,-2.000000");
    assert_eq!(dashed.len() + solid.len(), tr.len() + 1);
}

#[test]
fn config_json_round_trip() {
    for cfg in catalog() {
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back.to_json(), cfg.to_json());
    }
    assert!(ScenarioConfig::from_json(r#"{"version": 1, "id": "x", "bogus": 3}"#).is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // a report that cannot hold on this trace: the shear field is not Killing
    let failing = plane_config("shear-killing", FieldSpec::Shear, [0.0, 1.0], [0.6, 0.8], [0.0, 1.0], vec![ReportKind::Killing]);
    assert_eq!(run(&failing, dir.path(), false).exit_code, EXIT_FAIL);
    let mut invalid = catalog_entry("plane-straight").unwrap();
    invalid.velocity = Some([0.0, 0.0]);
    let res = run(&invalid, dir.path(), false);
    assert_eq!(res.exit_code, EXIT_USAGE);
    assert!(res.error.is_some());
}

#[test]
fn shipped_configs_match_catalog() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for cfg in catalog() {
        let text = fs::read_to_string(dir.join(format!("{}.json", cfg.id))).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap().to_json(), cfg.to_json(), "{}", cfg.id);
    }
}
