//! The scenario catalog and the acceptance checks built on it.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{decompose, so3_fixture, vectorial_tensor_orthonormal, DifferenceTensor, Tensor3};
use crate::audit::{conformal_constant, killing_flow_symmetry, Rotation, Translation};
use crate::conformal::conformal_equivalence;
use crate::error::{GeoError, Result};
use crate::geometry::ChartGeometry;
use crate::integrator::{integrate_two_sided, GeodesicState, IntegratorSettings, Method, Trace};
use crate::plane::{self, PlaneField};
use crate::scenario::{execute, plane_config, surface_config, FieldSpec, ReportKind, Scenario, ScenarioConfig, ScenarioOutcome};
use crate::surfaces::{self, SurfaceKind};

/// Default seed of the randomized decomposition checks.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// The twelve catalog scenarios, all RK4 with `h = 10⁻³` and `|t| ≤ 20`.
pub fn catalog() -> Vec<ScenarioConfig> {
    use ReportKind::*;
    let s = FRAC_1_SQRT_2;
    let winding = vec![Speed, FlatInvariant, Curvature, Killing];
    let shear = vec![Speed, FlatInvariant, Arcsin, Curvature, Confinement];
    let mut uhp = plane_config(
        "upper-half-plane",
        FieldSpec::Components {
            f: "0".into(),
            g: "1/y".into(),
            sigma: Some("-ln(y)".into()),
            potential: None,
            killing: false,
        },
        [0.0, 1.0],
        [1.0, 0.0],
        [-1.2, 1.2],
        vec![Speed, Curvature, ConformalEquivalence],
    );
    uhp.chart = crate::scenario::ChartSpec::Plane { domain: Some([None, None, Some(0.0), None]) };
    vec![
        plane_config("plane-straight", FieldSpec::Zero, [0.0, 0.0], [1.0, 2.0], [-20.0, 20.0], vec![Speed, FlatInvariant, Curvature]),
        plane_config("winding-origin", FieldSpec::Winding, [0.0, 0.0], [s, s], [-10.0, 10.0], winding.clone()),
        plane_config("winding-02", FieldSpec::Winding, [0.0, 2.0], [1.0, 0.0], [-10.0, 10.0], winding.clone()),
        plane_config("winding-origin-flat", FieldSpec::Winding, [0.0, 0.0], [1.0, 0.0], [-10.0, 10.0], winding),
        plane_config("shear-diagonal", FieldSpec::Shear, [1.0, 1.0], [s, s], [-20.0, 20.0], shear.clone()),
        plane_config("shear-backward", FieldSpec::Shear, [1.0, 1.0], [-1.0, 0.5], [-20.0, 20.0], shear),
        surface_config(
            "sphere-loxodrome-45",
            SurfaceKind::Sphere,
            [FRAC_PI_2, 0.0],
            FRAC_PI_4,
            [-2.0, 2.0],
            vec![Speed, Loxodrome, MercatorLine, Clairaut, ConformalConstant, ConformalEquivalence],
        ),
        surface_config("sphere-meridian", SurfaceKind::Sphere, [FRAC_PI_2, 0.0], 0.0, [-1.5, 1.5], vec![Speed, Loxodrome]),
        surface_config("sphere-equator", SurfaceKind::Sphere, [FRAC_PI_2, 0.0], FRAC_PI_2, [-20.0, 20.0], vec![Speed, Loxodrome, Clairaut]),
        surface_config(
            "pseudosphere-loxodrome",
            SurfaceKind::Pseudosphere,
            [3.0, 0.0],
            1.0,
            [-5.0, 5.0],
            vec![Speed, Loxodrome, ConformalConstant, ConformalEquivalence],
        ),
        surface_config(
            "catenoid-loxodrome",
            SurfaceKind::Catenoid,
            [0.0, 0.0],
            0.8,
            [-10.0, 10.0],
            vec![Speed, Loxodrome, Gauss, ConformalEquivalence],
        ),
        uhp,
    ]
}

pub fn catalog_entry(id: &str) -> Result<ScenarioConfig> {
    catalog()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| GeoError::Argument(format!("no catalog scenario `{id}`")))
}

/// Catalog scenarios run once and shared between the checks.
pub struct SuiteRuns {
    pub runs: BTreeMap<String, (Scenario, ScenarioOutcome)>,
}

impl SuiteRuns {
    /// Resolve and execute every catalog scenario, in parallel.
    pub fn execute() -> Result<Self> {
        let runs = catalog()
            .par_iter()
            .map(|c| {
                let s = Scenario::resolve(c)?;
                let o = execute(&s)?;
                Ok((c.id.clone(), (s, o)))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self { runs })
    }

    pub fn get(&self, id: &str) -> &(Scenario, ScenarioOutcome) {
        self.runs.get(id).unwrap_or_else(|| panic!("catalog scenario `{id}` missing"))
    }

    pub fn trace(&self, id: &str) -> &Trace {
        &self.get(id).1.trace
    }

    fn report(&self, id: &str, kind: ReportKind) -> Result<Check> {
        let entry = self
            .get(id)
            .1
            .report
            .reports
            .iter()
            .find(|r| r.name == kind.name())
            .ok_or_else(|| GeoError::Argument(format!("{id} has no `{}` report", kind.name())))?;
        let mut c = Check::below(format!("{id} {}", kind.name()), entry.value, entry.threshold);
        if !entry.verdict.passed() {
            c.passed = false;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Below,
    Above,
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn below(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { label: label.into(), value, threshold, comparison: Comparison::Below, passed: value < threshold }
    }

    pub fn above(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { label: label.into(), value, threshold, comparison: Comparison::Above, passed: value > threshold }
    }

    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { label: label.into(), value: v, threshold: 0.5, comparison: Comparison::Above, passed: ok }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::Below => "<",
            Comparison::Above => ">",
        };
        let mark = if self.passed { "ok" } else { "FAIL" };
        write!(f, "{mark:>4}  {}: {:.3e} {op} {:.1e}", self.label, self.value, self.threshold)
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionResult {
    fn from_checks(id: u8, name: &str, checks: Result<Vec<Check>>) -> Self {
        match checks {
            Ok(checks) => Self { id, name: name.into(), passed: !checks.is_empty() && checks.iter().all(|c| c.passed), checks, error: None },
            Err(e) => Self { id, name: name.into(), passed: false, checks: vec![], error: Some(e.to_string()) },
        }
    }

    /// `PASS 3 loxodrome-mercator (worst: ...)` summary line.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let detail = match (&self.error, self.checks.iter().find(|c| !c.passed)) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => format!("failed {}", c.to_string().trim_start()),
            (None, None) => format!("{} checks", self.checks.len()),
        };
        format!("{verdict} [{:>2}] {}: {detail}", self.id, self.name)
    }
}

const PLANE_IDS: [&str; 7] =
    ["plane-straight", "winding-origin", "winding-02", "winding-origin-flat", "shear-diagonal", "shear-backward", "upper-half-plane"];
const WINDING_IDS: [&str; 3] = ["winding-origin", "winding-02", "winding-origin-flat"];

/// Max relative speed drift of every catalog scenario.
pub fn speed_conservation(runs: &SuiteRuns) -> Result<Vec<Check>> {
    runs.runs.keys().map(|id| runs.report(id, ReportKind::Speed)).collect()
}

/// Angle offset of the negative control in the conformal comparison.
pub const NEGATIVE_CONTROL_ANGLE: f64 = 0.05;

/// Torsion geodesic vs Levi-Civita geodesic of `e^{2σ}g`, plus a perturbed launch.
pub fn conformal_equivalence_checks(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let ids = ["sphere-loxodrome-45", "pseudosphere-loxodrome", "catenoid-loxodrome", "upper-half-plane"];
    let per_id: Vec<Result<Vec<Check>>> = ids
        .par_iter()
        .map(|id| {
            let (s, _) = runs.get(id);
            let settings = s.settings.with_span(0.0, s.config.span[1]);
            let eq = conformal_equivalence(&s.chart, &s.field, &s.initial, &settings, 0.0)?;
            let neg = conformal_equivalence(&s.chart, &s.field, &s.initial, &settings, NEGATIVE_CONTROL_ANGLE)?;
            Ok(vec![
                Check::below(format!("{id} hausdorff"), eq.hausdorff, 1e-4),
                Check::above(format!("{id} perturbed-launch hausdorff"), neg.hausdorff, 1e-2),
            ])
        })
        .collect();
    Ok(per_id.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Sphere 45° loxodrome: angle constancy, straight Mercator image and the
/// closed form `ln tan(s/2)` of the Mercator coordinate.
pub fn loxodrome_mercator(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let id = "sphere-loxodrome-45";
    let (s, out) = runs.get(id);
    let sphere = s.surface.as_ref().expect("sphere scenario");
    let std = surfaces::loxodrome_check(sphere, &out.trace)?.std;
    let fit = surfaces::line_fit(&surfaces::mercator_image(sphere, &out.trace)?)?;
    let mut worst = 0.0_f64;
    for x in sphere.profile.samples(100) {
        worst = worst.max((surfaces::mercator_map(sphere, x)? - (x / 2.0).tan().ln()).abs());
    }
    Ok(vec![
        Check::below("std g(γ̇, e₂)", std, 1e-6),
        Check::below("Mercator line-fit residual", fit.max_residual, 1e-5),
        Check::below("|slope| − 1 of Mercator image", (fit.slope.abs() - 1.0).abs(), 1e-5),
        Check::below("max |y(s) − ln tan(s/2)|", worst, 1e-10),
    ])
}

/// Pseudosphere: `e^σ g(γ̇, ∂_φ)` is constant while `g(γ̇, ∂_φ)` is not.
pub fn conformal_constant_checks(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let (s, out) = runs.get("pseudosphere-loxodrome");
    let surf = s.surface.as_ref().expect("pseudosphere scenario");
    let sigma = surf.field.sigma().expect("σ").clone();
    let weighted = conformal_constant(&surf.chart, &out.trace, &*sigma, &|_| [0.0, 1.0])?;
    let plain = conformal_constant(&surf.chart, &out.trace, &|_| 0.0, &|_| [0.0, 1.0])?;
    Ok(vec![
        Check::below("std e^σ g(γ̇, ∂_φ)", weighted.std, 1e-6),
        Check::above("std g(γ̇, ∂_φ)", plain.std, 1e-3),
    ])
}

/// Kinematic curvature vs the closed forms on plane scenarios, and the
/// Killing identity with monotone `g(V, γ̇)` on winding traces.
pub fn curvature_checks(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let mut out: Vec<Check> = PLANE_IDS.iter().map(|id| runs.report(id, ReportKind::Curvature)).collect::<Result<_>>()?;
    for id in WINDING_IDS {
        out.push(runs.report(id, ReportKind::Killing)?);
    }
    Ok(out)
}

/// The part of a trace with `t ∈ [lo, hi]`.
pub fn window(trace: &Trace, lo: f64, hi: f64) -> Trace {
    let mut t = trace.clone();
    let keep: Vec<usize> = (0..trace.len()).filter(|&i| (lo..=hi).contains(&trace.states[i].t)).collect();
    t.states = keep.iter().map(|&i| trace.states[i]).collect();
    t.diagnostics = keep.iter().map(|&i| trace.diagnostics[i]).collect();
    t
}

/// `ż e^{−ip}` on winding and shear traces over `|t| ≤ 10`.
pub fn flat_plane_checks(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let mut out = vec![];
    for id in ["winding-origin", "winding-02", "winding-origin-flat", "shear-diagonal", "shear-backward"] {
        let (s, o) = runs.get(id);
        let field = s.plane.as_ref().expect("plane field");
        let f = plane::flat_invariant(field, &window(&o.trace, -10.0, 10.0))?;
        let modulus = f.modulus.values.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
        out.push(Check::below(format!("{id} max |ż e^(−ip) − z₀|"), f.deviation.max_dev, 1e-6));
        out.push(Check::below(format!("{id} max ||ż| − 1|"), modulus, 1e-6));
    }
    Ok(out)
}

fn rk4(h: f64) -> IntegratorSettings {
    IntegratorSettings::rk4(h, 0.0, 1.0)
}

/// Shear field: arcsin invariant per branch, strip bounds, confinement,
/// quadrature time, divergence at the bound, and the shooting sweep.
pub fn strip_checks() -> Result<Vec<Check>> {
    let chart = ChartGeometry::euclidean();
    let shear = PlaneField::shear();
    let spec = shear.to_spec();
    let s = FRAC_1_SQRT_2;
    let launch_a = GeodesicState::new(0.0, [1.0, 1.0], [s, s]);
    let nb = 5.0_f64.sqrt() / 2.0;
    let launch_b = GeodesicState::new(0.0, [1.0, 1.0], [-1.0 / nb, 0.5 / nb]);
    let long: Vec<Trace> = [launch_a, launch_b]
        .par_iter()
        .map(|l| integrate_two_sided(&chart, &spec, l, &rk4(1e-3), -50.0, 50.0))
        .collect::<Result<_>>()?;

    let mut out = vec![];
    for (name, tr) in ["(1,1)/√2", "(−1,1/2)"].iter().zip(&long) {
        let rep = plane::arcsin_invariant(tr)?;
        out.push(Check::below(format!("arcsin per-branch std, slope {name}"), rep.max_std(), 1e-6));
        let c = plane::confinement_check(tr)?;
        out.push(Check::below(format!("strip excess over |t| ≤ 50, slope {name}"), c.max_excess, 1e-3));
    }

    let b = plane::strip_bounds(1.0, s, s);
    let c_expect = 0.5 - FRAC_PI_4;
    let y_expect = (2.0 * (c_expect + PI)).sqrt();
    out.push(Check::below("|c − (1/2 − π/4)|", (b.c - c_expect).abs(), 1e-12));
    out.push(Check::below("|upper − √(2(c+π))|", (b.upper - y_expect).abs(), 1e-12));
    out.push(Check::below("|lower + √(2(c+π))|", (b.lower + y_expect).abs(), 1e-12));
    out.push(Check::below("|sin F| at bounds", b.bound_residual(), 1e-10));
    let reach = long[0].states.iter().map(|st| st.pos[1]).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::below("gap to upper bound at t = ±50", b.upper - reach, 1e-2));

    let quad_t = plane::strip_quadrature(1.0, 2.0, b.c, b.sign)?.time;
    let trace_t = plane::time_at_height(&long[0], 2.0, 0.0).ok_or_else(|| GeoError::Numerical("trace never reaches y = 2".into()))?;
    out.push(Check::below("|t_quadrature − t_trace| for y: 1 → 2", (quad_t - trace_t).abs(), 1e-4));

    let mut prev = 0.0;
    let mut growing = true;
    for k in 1..=11 {
        let t = plane::strip_quadrature(1.0, b.upper - 10f64.powi(-k), b.c, b.sign)?;
        growing &= !t.diverged && t.time > prev;
        prev = t.time;
    }
    out.push(Check::holds("quadrature time grows as the gap shrinks to 1e-11", growing));
    let at = plane::strip_quadrature(1.0, b.upper, b.c, b.sign)?;
    out.push(Check::holds("divergence flagged at the bound", at.diverged));
    out.push(Check::above("quadrature time at the bound", at.time, 1e3));

    let sweep = plane::strip_separation([0.0, 1.0], [0.0, 5.0], 720, 50.0, &IntegratorSettings::rk45(1e-10, 1e-12, 0.0, 1.0))?;
    out.push(Check::above("q-strip floor − highest y from p over 720 shots", sweep.q_floor - sweep.p_reach, 0.0));
    Ok(out)
}

/// Rotations map winding geodesics and horizontal translations map shear
/// geodesics onto re-integrated geodesics.
pub fn symmetry_checks(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let (w, wo) = runs.get("winding-02");
    let rot = killing_flow_symmetry(&w.chart, &w.field, &wo.trace, &Rotation { angle: FRAC_PI_3 })?;
    let (s, so) = runs.get("shear-diagonal");
    let shift = killing_flow_symmetry(&s.chart, &s.field, &so.trace, &Translation { offset: [2.0, 0.0] })?;
    Ok(vec![
        Check::below("winding rotation by π/3", rot, 1e-6),
        Check::below("shear translation by 2", shift, 1e-6),
    ])
}

fn random_difference_tensor(n: usize, rng: &mut ChaCha8Rng) -> DifferenceTensor {
    let mut t = Tensor3::zeros(n);
    for x in t.data.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
    DifferenceTensor::project(&t)
}

/// Round trips, the 3-form fixture, dimension count and orthogonality.
pub fn decomposition_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    for n in 2..=5 {
        let mut round = 0.0_f64;
        let mut leak = 0.0_f64;
        let mut ortho = 0.0_f64;
        let mut rebuild = 0.0_f64;
        for _ in 0..20 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let d = decompose(&vectorial_tensor_orthonormal(&v))?;
            round = round.max(d.vector.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            leak = leak.max(d.norms()[1]).max(d.norms()[2]);
            let a = random_difference_tensor(n, &mut rng);
            let d = decompose(&a)?;
            ortho = ortho.max(d.max_cross_inner());
            rebuild = rebuild.max(d.reconstruct().max_abs_diff(a.as_tensor()));
        }
        out.push(Check::below(format!("n={n} V → A → V"), round, 1e-12));
        out.push(Check::below(format!("n={n} skew + remainder of vectorial A"), leak, 1e-12));
        out.push(Check::below(format!("n={n} max cross inner product"), ortho, 1e-12));
        out.push(Check::below(format!("n={n} reconstruction"), rebuild, 1e-12));
        let d = decompose(&DifferenceTensor::zeros(n))?;
        let (a, b, c) = d.dimensions();
        out.push(Check::holds(format!("n={n} dimensions {a} + {b} + {c} = n²(n−1)/2"), a + b + c == n * n * (n - 1) / 2));
    }
    let fx = so3_fixture();
    let d = decompose(&fx)?;
    let norms = d.norms();
    out.push(Check::below("so(3) fixture vectorial + remainder norm", norms[0] + norms[2], 1e-12));
    out.push(Check::below("so(3) fixture 3-form reconstruction", d.skew_as_tensor().as_tensor().max_abs_diff(fx.as_tensor()), 1e-12));
    Ok(out)
}

/// Gauss image of the catenoid loxodrome keeps its angle while the
/// catenoid's curvature varies.
pub fn beltrami_witness(runs: &SuiteRuns) -> Result<Vec<Check>> {
    let (s, out) = runs.get("catenoid-loxodrome");
    let cat = s.surface.as_ref().expect("catenoid scenario");
    let std = surfaces::gauss_loxodrome_report(cat, &out.trace)?.std;
    let ks: Vec<f64> = out.trace.states.iter().map(|st| cat.gaussian_curvature(st.pos[0])).collect();
    let spread = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(vec![Check::below("std of Gauss-image angle", std, 1e-4), Check::above("variation of K along the trace", spread, 0.1)])
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "speed-conservation"),
    (2, "conformal-equivalence"),
    (3, "loxodrome-mercator"),
    (4, "conformal-constant"),
    (5, "curvature-formulas"),
    (6, "flat-plane-invariant"),
    (7, "arcsin-strips"),
    (8, "symmetry"),
    (9, "decomposition"),
    (10, "beltrami-witness"),
];

/// Run one criterion against shared catalog runs.
pub fn run_criterion(id: u8, runs: &SuiteRuns, seed: u64) -> CriterionResult {
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let checks = match id {
        1 => speed_conservation(runs),
        2 => conformal_equivalence_checks(runs),
        3 => loxodrome_mercator(runs),
        4 => conformal_constant_checks(runs),
        5 => curvature_checks(runs),
        6 => flat_plane_checks(runs),
        7 => strip_checks(),
        8 => symmetry_checks(runs),
        9 => decomposition_checks(seed),
        10 => beltrami_witness(runs),
        _ => Err(GeoError::Argument(format!("no criterion {id}"))),
    };
    CriterionResult::from_checks(id, name, checks)
}

/// Execute the catalog and every criterion.
pub fn run_all(seed: u64) -> Result<Vec<CriterionResult>> {
    let runs = SuiteRuns::execute()?;
    Ok(CRITERIA.iter().map(|(id, _)| run_criterion(*id, &runs, seed)).collect())
}

/// Integrator used by the catalog, for reference in reports.
pub fn catalog_method() -> Method {
    Method::Rk4 { h: 1e-3 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_twelve_unique_valid_entries() {
        let cat = catalog();
        assert_eq!(cat.len(), 12);
        let mut ids: Vec<_> = cat.iter().map(|c| c.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 12);
        for c in &cat {
            c.validate().unwrap();
            assert_eq!(c.integrator, catalog_method());
            assert!(c.span[0] >= -20.0 && c.span[1] <= 20.0);
            Scenario::resolve(c).unwrap();
        }
    }

    #[test]
    fn check_display() {
        let c = Check::below("x", 1e-7, 1e-6);
        assert!(c.passed && c.to_string().contains("x: 1.000e-7 < 1.0e-6"));
        assert!(!Check::above("y", 0.0, 1.0).passed);
    }

    #[test]
    fn decomposition_criterion_passes() {
        assert!(decomposition_checks(DEFAULT_SEED).unwrap().iter().all(|c| c.passed));
    }
}
