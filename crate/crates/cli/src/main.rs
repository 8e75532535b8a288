use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use vtorsion::algebra::{decompose, DecompositionSummary, TensorFile};
use vtorsion::conformal::conformal_equivalence;
use vtorsion::integrator::integrate_two_sided;
use vtorsion::io::{parse_csv, plot_svg, trace_to_csv, write_json, write_text, PlotCurve, PlotStyle};
use vtorsion::plane::{self, PlaneField};
use vtorsion::scenario::{self, execute, Scenario, ScenarioConfig, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use vtorsion::suite::{self, run_criterion, SuiteRuns, CRITERIA, DEFAULT_SEED};
use vtorsion::surfaces::{self, SurfaceKind};
use vtorsion::{ChartGeometry, GeodesicState, IntegratorSettings};

#[derive(Parser)]
#[command(name = "vtorsion", version, about = "Geodesics of metric connections with vectorial torsion")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Scenario or input file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for written artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Output format printed to stdout; `svg` also writes a plot.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized property checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its trace CSV and report JSON.
    Integrate {
        /// Catalog scenario id, instead of --config.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Compare a gradient-field geodesic with the Levi-Civita geodesic of e^{2σ}g.
    CompareConformal {
        #[arg(long)]
        scenario: Option<String>,
        /// Rotate the conformal launch by this angle (negative control).
        #[arg(long, default_value_t = 0.0)]
        angle_offset: f64,
    },
    /// Mercator coordinate of a catalog surface, or the Mercator image of a scenario trace.
    Mercator {
        #[arg(long, value_enum)]
        surface: Option<SurfaceArg>,
        /// Profile parameters to map.
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Split a metric difference tensor (JSON from --config) into its three parts.
    Decompose,
    /// Strip of the shear field y∂ₓ for a unit-speed launch, with a confinement check.
    StripBounds {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        y0: f64,
        /// Launch direction (normalized internally).
        #[arg(long, num_args = 2, allow_hyphen_values = true, default_values_t = [1.0, 1.0])]
        velocity: Vec<f64>,
        /// Half-length of the confinement integration.
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
    },
    /// Plot trace CSVs (or a scenario from --config) as SVG.
    Plot {
        /// Trace CSV files written by `integrate`.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the catalog and every acceptance criterion.
    Suite,
}

#[derive(Copy, Clone, ValueEnum)]
enum SurfaceArg {
    Sphere,
    Pseudosphere,
    Catenoid,
}

impl From<SurfaceArg> for SurfaceKind {
    fn from(s: SurfaceArg) -> Self {
        match s {
            SurfaceArg::Sphere => SurfaceKind::Sphere,
            SurfaceArg::Pseudosphere => SurfaceKind::Pseudosphere,
            SurfaceArg::Catenoid => SurfaceKind::Catenoid,
        }
    }
}

/// Error that maps to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config(global: &Global, scenario: &Option<String>) -> Result<ScenarioConfig> {
    match (&global.config, scenario) {
        (Some(_), Some(_)) => Err(usage("give either --config or --scenario")),
        (Some(p), None) => ScenarioConfig::load(p).map_err(|e| usage(e.to_string())),
        (None, Some(id)) => suite::catalog_entry(id).map_err(|e| usage(e.to_string())),
        (None, None) => Err(usage("a scenario is required (--config or --scenario)")),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_integrate(g: &Global, scenario: &Option<String>) -> Result<i32> {
    let cfg = load_config(g, scenario)?;
    let res = scenario::run(&cfg, &g.out_dir, g.format == Format::Svg);
    if let Some(e) = &res.error {
        eprintln!("error: {e}");
    }
    if let Some(out) = &res.outcome {
        match g.format {
            Format::Csv => print!("{}", trace_to_csv(&out.trace)),
            _ => print_json(&out.report)?,
        }
    }
    for f in &res.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(res.exit_code)
}

fn cmd_compare(g: &Global, scenario: &Option<String>, angle_offset: f64) -> Result<i32> {
    let cfg = load_config(g, scenario)?;
    let s = Scenario::resolve(&cfg).map_err(|e| usage(e.to_string()))?;
    let settings = s.settings.with_span(0.0, cfg.span[1]);
    let eq = conformal_equivalence(&s.chart, &s.field, &s.initial, &settings, angle_offset).map_err(|e| usage(e.to_string()))?;
    let passed = eq.hausdorff < 1e-4;
    let summary = serde_json::json!({
        "id": cfg.id,
        "angle_offset": angle_offset,
        "conformal_length": eq.conformal_length,
        "hausdorff": eq.hausdorff,
        "threshold": 1e-4,
        "verdict": if passed { "PASS" } else { "FAIL" },
    });
    let dir = &g.out_dir;
    write_text(&dir.join(format!("{}.torsion.csv", cfg.id)), &trace_to_csv(&eq.torsion))?;
    write_text(&dir.join(format!("{}.conformal.csv", cfg.id)), &trace_to_csv(&eq.levi_civita))?;
    write_json(&summary, &dir.join(format!("{}.compare.json", cfg.id)))?;
    if g.format == Format::Svg {
        let curves = [PlotCurve::from_trace("torsion", &eq.torsion), PlotCurve::from_trace("conformal", &eq.levi_civita)];
        let style = PlotStyle { title: cfg.id.clone(), ..PlotStyle::default() };
        write_text(&dir.join(format!("{}.compare.svg", cfg.id)), &plot_svg(&curves, &style)?)?;
    }
    print_json(&summary)?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_mercator(g: &Global, surface: Option<SurfaceArg>, s_values: &[f64], scenario: &Option<String>) -> Result<i32> {
    if g.config.is_some() || scenario.is_some() {
        let cfg = load_config(g, scenario)?;
        let sc = Scenario::resolve(&cfg).map_err(|e| usage(e.to_string()))?;
        let surf = sc.surface.clone().ok_or_else(|| usage("mercator needs a surface scenario"))?;
        let out = execute(&sc)?;
        let image = surfaces::mercator_image(&surf, &out.trace)?;
        let fit = surfaces::line_fit(&image)?;
        let mut csv = String::from("t,x,y\n");
        for (st, p) in out.trace.states.iter().zip(&image) {
            csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", st.t, p[0], p[1]));
        }
        write_text(&g.out_dir.join(format!("{}.mercator.csv", cfg.id)), &csv)?;
        let passed = fit.max_residual < 1e-5;
        print_json(&serde_json::json!({
            "id": cfg.id,
            "slope": fit.slope,
            "max_residual": fit.max_residual,
            "verdict": if passed { "PASS" } else { "FAIL" },
        }))?;
        return Ok(if passed { EXIT_PASS } else { EXIT_FAIL });
    }
    let kind = surface.ok_or_else(|| usage("give --surface with --s values, or a scenario"))?;
    if s_values.is_empty() {
        return Err(usage("no --s values given"));
    }
    let surf = surfaces::make_surface(kind.into())?;
    let mut rows = vec![];
    for &s in s_values {
        let y = surfaces::mercator_map(&surf, s).map_err(|e| usage(e.to_string()))?;
        rows.push(serde_json::json!({ "s": s, "y": y }));
    }
    match g.format {
        Format::Csv => {
            println!("s,y");
            for r in &rows {
                println!("{:.16e},{:.16e}", r["s"].as_f64().unwrap(), r["y"].as_f64().unwrap());
            }
        }
        _ => print_json(&serde_json::json!({ "surface": surf.name(), "anchor": surf.mercator_anchor, "values": rows }))?,
    }
    Ok(EXIT_PASS)
}

fn cmd_decompose(g: &Global) -> Result<i32> {
    let path = g.config.as_ref().ok_or_else(|| usage("decompose needs --config <tensor.json>"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(|e| usage(e.to_string()))?;
    let file: TensorFile = serde_json::from_str(&text).map_err(|e| usage(format!("invalid tensor file: {e}")))?;
    let a = file.to_tensor().map_err(|e| usage(e.to_string()))?;
    let d = decompose(&a).map_err(|e| usage(e.to_string()))?;
    let summary = DecompositionSummary::from((&a, &d));
    print_json(&summary)?;
    Ok(EXIT_PASS)
}

fn cmd_strip(g: &Global, x0: f64, y0: f64, velocity: &[f64], t_max: f64) -> Result<i32> {
    let n = velocity[0].hypot(velocity[1]);
    if !(n > 0.0) || !(t_max > 0.0) {
        return Err(usage("velocity must be nonzero and --t-max positive"));
    }
    let v = [velocity[0] / n, velocity[1] / n];
    let bounds = plane::strip_bounds(y0, v[1], v[0]);
    let chart = ChartGeometry::euclidean();
    let init = GeodesicState::new(0.0, [x0, y0], v);
    let trace = integrate_two_sided(&chart, &PlaneField::shear().to_spec(), &init, &IntegratorSettings::rk4(1e-3, 0.0, 1.0), -t_max, t_max)?;
    let conf = plane::confinement_check(&trace)?;
    if g.format == Format::Svg {
        let style = PlotStyle { title: "shear geodesic".into(), ..PlotStyle::default() };
        write_text(&g.out_dir.join("strip.svg"), &plot_svg(&[PlotCurve::from_trace("shear", &trace)], &style)?)?;
    }
    print_json(&serde_json::json!({
        "c": bounds.c,
        "sign": bounds.sign,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "degenerate": bounds.degenerate,
        "t_max": t_max,
        "y_min": conf.y_min,
        "y_max": conf.y_max,
        "max_excess": conf.max_excess,
        "confinement": conf.verdict,
    }))?;
    Ok(if conf.verdict.passed() { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_plot(g: &Global, inputs: &[PathBuf], output: &Option<PathBuf>) -> Result<i32> {
    let mut curves = vec![];
    let mut title = String::new();
    if g.config.is_some() {
        let cfg = load_config(g, &None)?;
        let sc = Scenario::resolve(&cfg).map_err(|e| usage(e.to_string()))?;
        let out = execute(&sc)?;
        curves.push(sc.plot_curve(&out.trace));
        title = cfg.id.clone();
    }
    for p in inputs {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        let (states, _) = parse_csv(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        if states.is_empty() {
            return Err(usage(format!("{}: empty trace", p.display())));
        }
        let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        curves.push(PlotCurve { label, times: states.iter().map(|s| s.t).collect(), points: states.iter().map(|s| s.pos).collect() });
    }
    if curves.is_empty() {
        return Err(usage("nothing to plot: give CSV inputs or --config"));
    }
    let svg = plot_svg(&curves, &PlotStyle { title: title.clone(), ..PlotStyle::default() })?;
    let target = output.clone().unwrap_or_else(|| g.out_dir.join(if title.is_empty() { "plot.svg".into() } else { format!("{title}.svg") }));
    write_text(&target, &svg)?;
    eprintln!("wrote {}", target.display());
    Ok(EXIT_PASS)
}

fn write_suite_artifacts(dir: &Path, runs: &SuiteRuns) -> Result<()> {
    for (id, (sc, out)) in &runs.runs {
        write_text(&dir.join(format!("{id}.csv")), &trace_to_csv(&out.trace))?;
        write_json(&out.report, &dir.join(format!("{id}.report.json")))?;
        let style = PlotStyle { title: id.clone(), ..PlotStyle::default() };
        write_text(&dir.join(format!("{id}.svg")), &plot_svg(&[sc.plot_curve(&out.trace)], &style)?)?;
    }
    Ok(())
}

fn cmd_suite(g: &Global) -> Result<i32> {
    let runs = SuiteRuns::execute()?;
    write_suite_artifacts(&g.out_dir, &runs)?;
    let mut results = vec![];
    for (id, _) in CRITERIA {
        let r = run_criterion(id, &runs, g.seed);
        println!("{}", r.summary());
        results.push(r);
    }
    write_json(&results, &g.out_dir.join("suite.json"))?;
    Ok(if results.iter().all(|r| r.passed) { EXIT_PASS } else { EXIT_FAIL })
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    match &cli.command {
        Command::Integrate { scenario } => cmd_integrate(g, scenario),
        Command::CompareConformal { scenario, angle_offset } => cmd_compare(g, scenario, *angle_offset),
        Command::Mercator { surface, s, scenario } => cmd_mercator(g, *surface, s, scenario),
        Command::Decompose => cmd_decompose(g),
        Command::StripBounds { x0, y0, velocity, t_max } => cmd_strip(g, *x0, *y0, velocity, *t_max),
        Command::Plot { inputs, output } => cmd_plot(g, inputs, output),
        Command::Suite => cmd_suite(g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<Usage>().is_some() { EXIT_USAGE } else { EXIT_FAIL };
            ExitCode::from(code as u8)
        }
    }
}
