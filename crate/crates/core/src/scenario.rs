//! Scenario configuration, resolution and execution.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::{curvature_general, kinematic_curvature, killing_curvature_check, Verdict};
use crate::conformal::conformal_equivalence;
use crate::error::{GeoError, Result};
use crate::expr::Expr;
use crate::geometry::{ChartGeometry, DomainBox, Vec2, VectorFieldSpec};
use crate::integrator::{integrate, integrate_two_sided, GeodesicState, IntegratorSettings, Method, StopReason, Trace};
use crate::io::{plot_svg, write_csv, write_json, write_text, PlotCurve, PlotStyle};
use crate::plane::{self, PlaneField, StripBounds};
use crate::surfaces::{self, CatalogSurface, RevolutionProfile, SurfaceKind};

pub const CONFIG_VERSION: u32 = 1;

/// Chart or surface selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChartSpec {
    /// Euclidean plane, optionally restricted to `[u_min, u_max, v_min, v_max]`
    /// (`null` for an open side).
    Plane {
        #[serde(default)]
        domain: Option<[Option<f64>; 4]>,
    },
    /// Catalog surface of revolution.
    Surface { name: SurfaceKind },
    /// Surface of revolution from a natural profile given as expressions in `s`.
    Profile { r: String, dr: String, d2r: String, h: String, dh: String, s_min: f64, s_max: f64 },
    /// Metric `[[g11, g12], [g12, g22]]` as expressions in the two coordinates.
    Metric {
        #[serde(default = "default_coords")]
        coords: [String; 2],
        g11: String,
        g12: String,
        g22: String,
        #[serde(default)]
        domain: Option<[Option<f64>; 4]>,
    },
}

fn default_coords() -> [String; 2] {
    ["u".into(), "v".into()]
}

/// Vector-field selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    /// The surface's flat-connection field, or `V = 0` on other charts.
    Default,
    Zero,
    Winding,
    Shear,
    /// Components as expressions, with optional potentials.
    Components {
        f: String,
        g: String,
        #[serde(default)]
        sigma: Option<String>,
        #[serde(default)]
        potential: Option<String>,
        #[serde(default)]
        killing: bool,
    },
    /// `V = −grad σ`.
    Sigma { sigma: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Speed,
    Loxodrome,
    MercatorLine,
    Clairaut,
    ConformalConstant,
    FlatInvariant,
    Arcsin,
    Confinement,
    Killing,
    Curvature,
    Gauss,
    ConformalEquivalence,
}

impl ReportKind {
    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Speed => "speed",
            ReportKind::Loxodrome => "loxodrome",
            ReportKind::MercatorLine => "mercator-line",
            ReportKind::Clairaut => "clairaut",
            ReportKind::ConformalConstant => "conformal-constant",
            ReportKind::FlatInvariant => "flat-invariant",
            ReportKind::Arcsin => "arcsin",
            ReportKind::Confinement => "confinement",
            ReportKind::Killing => "killing",
            ReportKind::Curvature => "curvature",
            ReportKind::Gauss => "gauss",
            ReportKind::ConformalEquivalence => "conformal-equivalence",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

/// One scenario per JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub id: String,
    pub chart: ChartSpec,
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    pub position: Vec2,
    #[serde(default)]
    pub velocity: Option<Vec2>,
    /// Launch angle from the meridian `e₁`, surfaces only.
    #[serde(default)]
    pub angle: Option<f64>,
    /// Launch speed; rescales `velocity` when both are given.
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default = "default_method")]
    pub integrator: Method,
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// `[t_back, t_fwd]` around the launch at `t = 0`.
    pub span: [f64; 2],
    #[serde(default)]
    pub reports: Vec<ReportKind>,
    #[serde(default)]
    pub outputs: OutputPaths,
}

fn default_field() -> FieldSpec {
    FieldSpec::Default
}

fn default_method() -> Method {
    Method::Rk4 { h: 1e-3 }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| GeoError::Argument(format!("invalid scenario config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GeoError::Argument(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks; selectors are checked by [`Scenario::resolve`].
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(GeoError::Argument(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(GeoError::Argument(format!("invalid scenario id `{}`", self.id)));
        }
        match (self.velocity, self.angle) {
            (Some(_), Some(_)) => return Err(GeoError::Argument("give either velocity or angle, not both".into())),
            (None, None) => return Err(GeoError::Argument("a launch velocity or angle is required".into())),
            (Some(v), None) if v == [0.0, 0.0] || !v.iter().all(|x| x.is_finite()) => {
                return Err(GeoError::Argument("velocity must be finite and nonzero".into()))
            }
            _ => {}
        }
        if let Some(e) = self.energy {
            if !(e > 0.0 && e.is_finite()) {
                return Err(GeoError::Argument("energy must be positive".into()));
            }
        }
        let [a, b] = self.span;
        if !(a <= 0.0 && b >= 0.0 && a < b && a.is_finite() && b.is_finite()) {
            return Err(GeoError::Argument("span must satisfy t_back ≤ 0 ≤ t_fwd with t_back < t_fwd".into()));
        }
        self.settings().validate()
    }

    pub fn settings(&self) -> IntegratorSettings {
        let mut s = match self.integrator {
            Method::Rk4 { h } => IntegratorSettings::rk4(h, 0.0, self.span[1]),
            Method::Rk45 { rtol, atol } => IntegratorSettings::rk45(rtol, atol, 0.0, self.span[1]),
        };
        if let Some(n) = self.max_steps {
            s.max_steps = n;
        }
        s
    }
}

fn domain_box(d: &Option<[Option<f64>; 4]>) -> DomainBox {
    match d {
        None => DomainBox::unbounded(),
        Some([a, b, c, e]) => DomainBox::new(
            a.unwrap_or(f64::NEG_INFINITY),
            b.unwrap_or(f64::INFINITY),
            c.unwrap_or(f64::NEG_INFINITY),
            e.unwrap_or(f64::INFINITY),
        ),
    }
}

/// A configuration resolved into geometry and a launch state.
#[derive(Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub chart: ChartGeometry,
    pub field: VectorFieldSpec,
    pub plane: Option<PlaneField>,
    pub surface: Option<CatalogSurface>,
    pub initial: GeodesicState,
    pub settings: IntegratorSettings,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("id", &self.config.id).field("initial", &self.initial).finish()
    }
}

fn plane_field(spec: &FieldSpec) -> Result<Option<PlaneField>> {
    Ok(match spec {
        FieldSpec::Default | FieldSpec::Zero => Some(PlaneField::zero()),
        FieldSpec::Winding => Some(PlaneField::winding()),
        FieldSpec::Shear => Some(PlaneField::shear()),
        FieldSpec::Components { f, g, potential, killing, .. } => {
            let f = Expr::parse(f, &["x", "y"])?.into_scalar_field();
            let g = Expr::parse(g, &["x", "y"])?.into_scalar_field();
            let mut field = PlaneField::new("inline", move |p| f(p), move |p| g(p)).with_killing(*killing);
            if let Some(p) = potential {
                let p = Expr::parse(p, &["x", "y"])?.into_scalar_field();
                field = field.with_potential(move |q| p(q));
            }
            Some(field)
        }
        FieldSpec::Sigma { .. } => None,
    })
}

impl Scenario {
    pub fn resolve(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut surface = None;
        let mut plane = None;
        let chart = match &config.chart {
            ChartSpec::Plane { domain } => {
                plane = plane_field(&config.field)?;
                ChartGeometry::euclidean_on("plane", domain_box(domain))
            }
            ChartSpec::Surface { name } => {
                let s = surfaces::make_surface(*name)?;
                let c = s.chart.clone();
                surface = Some(s);
                c
            }
            ChartSpec::Profile { r, dr, d2r, h, dh, s_min, s_max } => {
                let f = |e: &str| -> Result<_> { Ok(Expr::parse(e, &["s"])?.into_fn1()) };
                let profile = RevolutionProfile {
                    r: f(r)?,
                    dr: f(dr)?,
                    d2r: f(d2r)?,
                    h: f(h)?,
                    dh: f(dh)?,
                    natural: true,
                    s_min: *s_min,
                    s_max: *s_max,
                };
                let s = CatalogSurface::from_profile(SurfaceKind::Custom, "profile", profile)?;
                let c = s.chart.clone();
                surface = Some(s);
                c
            }
            ChartSpec::Metric { coords, g11, g12, g22, domain } => {
                let vars = [coords[0].as_str(), coords[1].as_str()];
                let (a, b, c) = (
                    Expr::parse(g11, &vars)?.into_scalar_field(),
                    Expr::parse(g12, &vars)?.into_scalar_field(),
                    Expr::parse(g22, &vars)?.into_scalar_field(),
                );
                ChartGeometry::new("metric", vars, domain_box(domain), move |p| [[a(p), b(p)], [b(p), c(p)]])
            }
        };
        let field = match (&config.field, &surface) {
            (FieldSpec::Default, Some(s)) => s.field.clone(),
            (FieldSpec::Default | FieldSpec::Zero, _) => VectorFieldSpec::zero(),
            (FieldSpec::Sigma { sigma }, _) => {
                let sigma = Expr::parse(sigma, &[chart.coords()[0].as_str(), chart.coords()[1].as_str()])?.into_scalar_field();
                VectorFieldSpec::from_sigma("sigma", &chart, sigma)
            }
            (FieldSpec::Components { f, g, sigma, potential, killing }, _) => {
                let vars = [chart.coords()[0].clone(), chart.coords()[1].clone()];
                let vars = [vars[0].as_str(), vars[1].as_str()];
                let vars = if plane.is_some() { ["x", "y"] } else { vars };
                let (f, g) = (Expr::parse(f, &vars)?.into_scalar_field(), Expr::parse(g, &vars)?.into_scalar_field());
                let mut spec = VectorFieldSpec::new("inline", move |p| [f(p), g(p)]).with_killing(*killing);
                if let Some(s) = sigma {
                    let s = Expr::parse(s, &vars)?.into_scalar_field();
                    spec = spec.with_sigma(move |p| s(p));
                }
                if let Some(p) = potential {
                    let p = Expr::parse(p, &vars)?.into_scalar_field();
                    spec = spec.with_plane_potential(move |q| p(q));
                }
                spec
            }
            (FieldSpec::Winding, _) => PlaneField::winding().to_spec(),
            (FieldSpec::Shear, _) => PlaneField::shear().to_spec(),
        };
        chart.check_point(config.position)?;
        let vel = match (config.velocity, config.angle) {
            (Some(v), None) => match config.energy {
                Some(e) => {
                    let n = chart.norm(config.position, v)?;
                    [v[0] * e / n, v[1] * e / n]
                }
                None => v,
            },
            (None, Some(nu)) => {
                let s = surface
                    .as_ref()
                    .ok_or_else(|| GeoError::Argument("a launch angle needs a surface chart".into()))?;
                let e = config.energy.unwrap_or(1.0);
                let v = s.velocity_at_angle(config.position, nu);
                [v[0] * e, v[1] * e]
            }
            _ => unreachable!("validated"),
        };
        Ok(Self {
            config: config.clone(),
            chart,
            field,
            plane,
            surface,
            initial: GeodesicState::new(0.0, config.position, vel),
            settings: config.settings(),
        })
    }

    pub fn id(&self) -> &str {
        &self.config.id
    }

    pub fn integrate(&self) -> Result<Trace> {
        let [a, b] = self.config.span;
        if a < 0.0 {
            integrate_two_sided(&self.chart, &self.field, &self.initial, &self.settings, a, b)
        } else {
            integrate(&self.chart, &self.field, &self.initial, &self.settings.with_span(0.0, b))
        }
    }

    fn surface(&self, kind: ReportKind) -> Result<&CatalogSurface> {
        self.surface
            .as_ref()
            .ok_or_else(|| GeoError::Argument(format!("report `{}` needs a surface chart", kind.name())))
    }

    fn plane(&self, kind: ReportKind) -> Result<&PlaneField> {
        self.plane
            .as_ref()
            .ok_or_else(|| GeoError::Argument(format!("report `{}` needs a plane field", kind.name())))
    }

    /// Strip of the launch for shear-field scenarios.
    pub fn strip(&self) -> Option<StripBounds> {
        match (&self.config.field, &self.plane) {
            (FieldSpec::Shear, Some(_)) => {
                let e = self.chart.norm(self.initial.pos, self.initial.vel).ok()?;
                let v = self.initial.vel;
                Some(plane::strip_bounds(self.initial.pos[1], v[1] / e, v[0] / e))
            }
            _ => None,
        }
    }

    /// Evaluate one report on a trace of this scenario.
    pub fn report(&self, kind: ReportKind, trace: &Trace) -> Result<ReportEntry> {
        let entry = |value: f64, threshold: f64| ReportEntry::below(kind.name(), value, threshold);
        Ok(match kind {
            ReportKind::Speed => entry(trace.max_speed_drift(), 1e-6),
            ReportKind::Loxodrome => entry(surfaces::loxodrome_check(self.surface(kind)?, trace)?.std, 1e-6),
            ReportKind::MercatorLine => {
                let s = self.surface(kind)?;
                let fit = surfaces::line_fit(&surfaces::mercator_image(s, trace)?)?;
                entry(fit.max_residual, 1e-5).with_note(format!("slope {:.12}", fit.slope))
            }
            ReportKind::Clairaut => entry(surfaces::clairaut_identity_residual(self.surface(kind)?, trace)?, 1e-9),
            ReportKind::ConformalConstant => {
                let s = self.surface(kind)?;
                let sigma = s.field.sigma().expect("surface fields carry σ").clone();
                let rep = crate::audit::conformal_constant(&s.chart, trace, &*sigma, &|_| [0.0, 1.0])?;
                entry(rep.std, 1e-6)
            }
            ReportKind::FlatInvariant => {
                let f = plane::flat_invariant(self.plane(kind)?, trace)?;
                let modulus = f.modulus.values.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
                entry(f.deviation.max_dev.max(modulus), 1e-6)
            }
            ReportKind::Arcsin => {
                let rep = plane::arcsin_invariant(trace)?;
                entry(rep.max_std(), 1e-6).with_note(format!("{} branch segments", rep.segments.len()))
            }
            ReportKind::Confinement => {
                let c = plane::confinement_check(trace)?;
                entry(c.max_excess, 1e-3).with_note(format!(
                    "c = {:.12}, strip ({:.9}, {:.9})",
                    c.bounds.c, c.bounds.lower, c.bounds.upper
                ))
            }
            ReportKind::Killing => {
                let k = killing_curvature_check(&self.chart, &self.field, trace)?;
                let mut e = entry(k.max_residual, 1e-4).with_note(format!("monotone: {}", k.monotone));
                if !k.monotone {
                    e.verdict = Verdict::Fail;
                }
                e
            }
            ReportKind::Curvature => {
                let kin = kinematic_curvature(&self.chart, &self.field, trace)?;
                let gen = curvature_general(&self.chart, &self.field, trace)?;
                let mut worst = kin.iter().zip(&gen).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if let Some(p) = &self.plane {
                    let e = trace.energy();
                    for (s, k) in trace.states.iter().zip(&kin) {
                        let unit = GeodesicState::new(s.t, s.pos, [s.vel[0] / e, s.vel[1] / e]);
                        worst = worst.max((plane::plane_curvature(p, &unit).abs() - k).abs());
                    }
                }
                entry(worst, 1e-5)
            }
            ReportKind::Gauss => entry(surfaces::gauss_loxodrome_report(self.surface(kind)?, trace)?.std, 1e-4),
            ReportKind::ConformalEquivalence => {
                let settings = self.settings.with_span(0.0, self.config.span[1]);
                let eq = conformal_equivalence(&self.chart, &self.field, &self.initial, &settings, 0.0)?;
                entry(eq.hausdorff, 1e-4)
            }
        })
    }

    /// Plot curve for the trace: chart coordinates, or an orthographic view of
    /// the embedded surface curve.
    pub fn plot_curve(&self, trace: &Trace) -> PlotCurve {
        match &self.surface {
            Some(s) => PlotCurve::projected(self.id(), trace.times(), &surfaces::embed(s, trace), 0.0, 0.5),
            None => PlotCurve::from_trace(self.id(), trace),
        }
    }
}

/// Outcome of one requested report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub verdict: Verdict,
    pub value: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportEntry {
    /// PASS iff `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), verdict: Verdict::from_bool(value < threshold), value, threshold, note: None }
    }

    pub fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    pub fn error(name: &str, err: &GeoError) -> Self {
        Self { name: name.into(), verdict: Verdict::Fail, value: f64::NAN, threshold: f64::NAN, note: Some(err.to_string()) }
    }
}

/// JSON document written next to the trace CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    pub chart: String,
    pub field: String,
    pub energy: f64,
    pub samples: usize,
    pub stop: StopReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_backward: Option<StopReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip: Option<StripBounds>,
    pub reports: Vec<ReportEntry>,
    pub passed: bool,
}

/// A scenario run: the trace and its report.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub trace: Trace,
    pub report: ScenarioReport,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

/// Integrate a resolved scenario and evaluate its reports. A report that
/// cannot be evaluated counts as FAIL.
pub fn execute(scenario: &Scenario) -> Result<ScenarioOutcome> {
    let trace = scenario.integrate()?;
    let reports: Vec<ReportEntry> = scenario
        .config
        .reports
        .iter()
        .map(|k| scenario.report(*k, &trace).unwrap_or_else(|e| ReportEntry::error(k.name(), &e)))
        .collect();
    let passed = reports.iter().all(|r| r.verdict.passed());
    let report = ScenarioReport {
        id: scenario.id().to_string(),
        chart: scenario.chart.id().to_string(),
        field: scenario.field.id().to_string(),
        energy: trace.energy(),
        samples: trace.len(),
        stop: trace.stop,
        stop_backward: trace.stop_backward,
        strip: scenario.strip(),
        reports,
        passed,
    };
    Ok(ScenarioOutcome { trace, report })
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Files written by [`run`] and the process exit status.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub exit_code: i32,
    pub outcome: Option<ScenarioOutcome>,
    pub files: Vec<PathBuf>,
    pub error: Option<String>,
}

/// Resolve, integrate, report and write artifacts into `out_dir`: trace CSV,
/// report JSON and, if `svg` is set or a path is configured, an SVG plot.
/// Exit code 0 iff every report passes, 1 on a failing report, 2 for an
/// invalid configuration.
pub fn run(config: &ScenarioConfig, out_dir: &Path, svg: bool) -> RunResult {
    let usage = |e: GeoError| RunResult { exit_code: EXIT_USAGE, outcome: None, files: vec![], error: Some(e.to_string()) };
    let scenario = match Scenario::resolve(config) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let outcome = match execute(&scenario) {
        Ok(o) => o,
        Err(e @ (GeoError::Argument(_) | GeoError::Domain { .. } | GeoError::Degenerate(_))) => return usage(e),
        Err(e) => return RunResult { exit_code: EXIT_FAIL, outcome: None, files: vec![], error: Some(e.to_string()) },
    };
    let id = &config.id;
    let path = |p: &Option<String>, default: String| out_dir.join(p.clone().unwrap_or(default));
    let csv = path(&config.outputs.csv, format!("{id}.csv"));
    let json = path(&config.outputs.report, format!("{id}.report.json"));
    let mut files = vec![];
    let mut write = || -> Result<()> {
        write_csv(&outcome.trace, &csv)?;
        files.push(csv.clone());
        write_json(&outcome.report, &json)?;
        files.push(json.clone());
        if svg || config.outputs.svg.is_some() {
            let target = path(&config.outputs.svg, format!("{id}.svg"));
            let style = PlotStyle { title: id.clone(), ..PlotStyle::default() };
            write_text(&target, &plot_svg(&[scenario.plot_curve(&outcome.trace)], &style)?)?;
            files.push(target);
        }
        Ok(())
    };
    if let Err(e) = write() {
        return RunResult { exit_code: EXIT_USAGE, outcome: Some(outcome), files, error: Some(e.to_string()) };
    }
    let exit_code = if outcome.passed() { EXIT_PASS } else { EXIT_FAIL };
    RunResult { exit_code, outcome: Some(outcome), files, error: None }
}

/// Convenience for tests and the suite: a plane scenario config.
pub fn plane_config(id: &str, field: FieldSpec, position: Vec2, velocity: Vec2, span: [f64; 2], reports: Vec<ReportKind>) -> ScenarioConfig {
    ScenarioConfig {
        version: CONFIG_VERSION,
        id: id.into(),
        chart: ChartSpec::Plane { domain: None },
        field,
        position,
        velocity: Some(velocity),
        angle: None,
        energy: Some(1.0),
        integrator: Method::Rk4 { h: 1e-3 },
        max_steps: None,
        span,
        reports,
        outputs: OutputPaths::default(),
    }
}

/// Convenience for tests and the suite: a catalog surface scenario config.
pub fn surface_config(id: &str, kind: SurfaceKind, position: Vec2, angle: f64, span: [f64; 2], reports: Vec<ReportKind>) -> ScenarioConfig {
    ScenarioConfig {
        version: CONFIG_VERSION,
        id: id.into(),
        chart: ChartSpec::Surface { name: kind },
        field: FieldSpec::Default,
        position,
        velocity: None,
        angle: Some(angle),
        energy: Some(1.0),
        integrator: Method::Rk4 { h: 1e-3 },
        max_steps: None,
        span,
        reports,
        outputs: OutputPaths::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        let mut c = plane_config("x", FieldSpec::Zero, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], vec![]);
        c.version = 2;
        assert!(c.validate().is_err());
        let mut c = plane_config("x", FieldSpec::Zero, [0.0, 0.0], [0.0, 0.0], [0.0, 1.0], vec![]);
        assert!(c.validate().is_err());
        c.velocity = Some([1.0, 0.0]);
        c.angle = Some(0.3);
        assert!(c.validate().is_err());
        c.angle = None;
        c.span = [1.0, 2.0];
        assert!(c.validate().is_err());
        assert!(ScenarioConfig::from_json(r#"{"version":1}"#).is_err());
    }

    #[test]
    fn angle_needs_surface() {
        let mut c = plane_config("x", FieldSpec::Zero, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], vec![]);
        c.velocity = None;
        c.angle = Some(0.5);
        assert!(Scenario::resolve(&c).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = surface_config("s", SurfaceKind::Sphere, [1.0, 0.0], 0.7, [-1.0, 1.0], vec![ReportKind::Loxodrome, ReportKind::Speed]);
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn straight_line_scenario_passes() {
        let c = plane_config("line", FieldSpec::Zero, [0.0, 0.0], [3.0, 4.0], [0.0, 1.0], vec![ReportKind::Speed, ReportKind::FlatInvariant, ReportKind::Curvature]);
        let out = execute(&Scenario::resolve(&c).unwrap()).unwrap();
        assert!(out.passed(), "{:?}", out.report.reports);
        let last = out.trace.last();
        assert!((last.pos[0] - 0.6).abs() < 1e-12 && (last.pos[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn report_on_wrong_chart_fails_softly() {
        let c = plane_config("line", FieldSpec::Zero, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], vec![ReportKind::Loxodrome]);
        let out = execute(&Scenario::resolve(&c).unwrap()).unwrap();
        assert!(!out.passed());
        assert!(out.report.reports[0].note.as_ref().unwrap().contains("surface"));
    }

    #[test]
    fn inline_metric_and_sigma() {
        let json = r#"{
            "version": 1, "id": "uhp",
            "chart": {"kind": "metric", "coords": ["x", "y"], "g11": "1", "g12": "0", "g22": "1", "domain": [null, null, 0.0, null]},
            "field": {"kind": "sigma", "sigma": "-ln(y)"},
            "position": [0.0, 1.0], "velocity": [1.0, 0.0], "span": [0.0, 1.0],
            "reports": ["speed"]
        }"#;
        let c = ScenarioConfig::from_json(json).unwrap();
        let s = Scenario::resolve(&c).unwrap();
        let v = s.field.at([0.3, 2.0]);
        assert!(v[0].abs() < 1e-8 && (v[1] - 0.5).abs() < 1e-8);
        assert!(execute(&s).unwrap().passed());
    }
}
