//! Constants of motion and curvature identities evaluated along traces.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::{ChartGeometry, Vec2, VectorFieldSpec};
use crate::integrator::{integrate, integrate_two_sided, levi_civita_acceleration, GeodesicState, Trace};

/// Per-step slack allowed when checking that `g(V, γ̇)` never increases.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Drift statistics of a scalar quantity sampled along a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub name: String,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// `max |value − value₀|`.
    pub max_dev: f64,
    pub std: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<Verdict>,
}

impl InvariantReport {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let (max_dev, std) = drift_stats(&values);
        Self { name: name.into(), values, max_dev, std, monotone: None, verdict: None }
    }

    /// Set the verdict from `std < tol`.
    pub fn judge_std(mut self, tol: f64) -> Self {
        self.verdict = Some(Verdict::from_bool(self.std < tol));
        self
    }

    /// Set the verdict from `max_dev < tol`.
    pub fn judge_max_dev(mut self, tol: f64) -> Self {
        self.verdict = Some(Verdict::from_bool(self.max_dev < tol));
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.map_or(true, Verdict::passed)
    }

    pub fn initial(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `(max |x − x₀|, population standard deviation)`.
pub fn drift_stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let x0 = values[0];
    let max_dev = values.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (max_dev, var.sqrt())
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return false;
    }
    let h = times[1] - times[0];
    times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300))
}

/// Derivative of the Lagrange cubic through four nodes, evaluated at `x`.
fn lagrange_cubic_derivative(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut d = 0.0;
    for i in 0..4 {
        let mut denom = 1.0;
        for j in 0..4 {
            if j != i {
                denom *= xs[i] - xs[j];
            }
        }
        let mut num = 0.0;
        for k in 0..4 {
            if k == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..4 {
                if j != i && j != k {
                    prod *= x - xs[j];
                }
            }
            num += prod;
        }
        d += ys[i] * num / denom;
    }
    d
}

/// Time derivative of a sampled quantity: 4th-order central differences on
/// a uniform grid (one-sided 4th-order stencils at the ends), otherwise a
/// local cubic interpolant.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n != values.len() {
        return Err(GeoError::Argument("times and values differ in length".into()));
    }
    if n < 5 {
        return Err(GeoError::Argument("need at least 5 samples to differentiate".into()));
    }
    let mut out = vec![0.0; n];
    if is_uniform(times) {
        let h = (times[n - 1] - times[0]) / (n - 1) as f64;
        let y = values;
        for i in 2..n - 2 {
            out[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
        }
        for i in 0..2 {
            // forward stencil on nodes i..i+4
            let s = &y[i..i + 5];
            out[i] = if i == 0 {
                (-25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]) / (12.0 * h)
            } else {
                (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
            };
            let j = n - 1 - i;
            let e = &y[n - 5..];
            out[j] = if i == 0 {
                (25.0 * e[4] - 48.0 * e[3] + 36.0 * e[2] - 16.0 * e[1] + 3.0 * e[0]) / (12.0 * h)
            } else {
                (3.0 * e[4] + 10.0 * e[3] - 18.0 * e[2] + 6.0 * e[1] - e[0]) / (12.0 * h)
            };
        }
    } else {
        for i in 0..n {
            let start = i.saturating_sub(1).min(n - 4);
            out[i] = lagrange_cubic_derivative(&times[start..start + 4], &values[start..start + 4], times[i]);
        }
    }
    Ok(out)
}

fn check_ids(chart: &ChartGeometry, field: &VectorFieldSpec, trace: &Trace) -> Result<()> {
    if trace.meta.field_id != field.id() || trace.meta.chart_id != chart.id() {
        return Err(GeoError::Argument(format!(
            "trace was integrated on ({}, {}), not ({}, {})",
            trace.meta.chart_id,
            trace.meta.field_id,
            chart.id(),
            field.id()
        )));
    }
    Ok(())
}

/// Closed-form geodesic curvature `κ = sqrt(‖V‖² − g(V,γ̇)²/E²)` per sample.
pub fn curvature_general(chart: &ChartGeometry, field: &VectorFieldSpec, trace: &Trace) -> Result<Vec<f64>> {
    check_ids(chart, field, trace)?;
    let e = trace.energy();
    trace
        .states
        .iter()
        .map(|s| {
            let v = field.at(s.pos);
            let vv = chart.inner(s.pos, v, v)?;
            let gv = chart.inner(s.pos, v, s.vel)?;
            Ok((vv - gv * gv / (e * e)).max(0.0).sqrt())
        })
        .collect()
}

/// Kinematic curvature `‖∇^g_γ̇ γ̇‖ / E²`, with the Levi-Civita acceleration
/// read off the geodesic equation.
pub fn kinematic_curvature(chart: &ChartGeometry, field: &VectorFieldSpec, trace: &Trace) -> Result<Vec<f64>> {
    check_ids(chart, field, trace)?;
    let e = trace.energy();
    trace
        .states
        .iter()
        .map(|s| {
            let a = levi_civita_acceleration(chart, field, s, e)?;
            Ok(chart.norm(s.pos, a)? / (e * e))
        })
        .collect()
}

/// Outcome of the Killing-field curvature identity `d/dt g(V,γ̇) = −E²κ²`.
#[derive(Debug, Clone, Serialize)]
pub struct KillingCheck {
    pub max_residual: f64,
    pub monotone: bool,
    /// Largest single-step increase of `g(V, γ̇)`.
    pub max_increase: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub g_v: Vec<f64>,
}

pub fn killing_curvature_check(chart: &ChartGeometry, field: &VectorFieldSpec, trace: &Trace) -> Result<KillingCheck> {
    if !field.is_killing() {
        return Err(GeoError::Argument(format!("field `{}` is not flagged as Killing", field.id())));
    }
    check_ids(chart, field, trace)?;
    let e = trace.energy();
    let g_v: Vec<f64> = trace
        .states
        .iter()
        .map(|s| chart.inner(s.pos, field.at(s.pos), s.vel))
        .collect::<Result<_>>()?;
    let kappa = curvature_general(chart, field, trace)?;
    let d = time_derivative(&trace.times(), &g_v)?;
    let max_residual = d
        .iter()
        .zip(&kappa)
        .map(|(dg, k)| (dg + e * e * k * k).abs())
        .fold(0.0, f64::max);
    let max_increase = g_v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = max_increase <= MONOTONE_TOL;
    Ok(KillingCheck {
        max_residual,
        monotone,
        max_increase,
        verdict: Verdict::from_bool(monotone && max_residual < 1e-4),
        g_v,
    })
}

/// `e^{σ(γ)} g(γ̇, X(γ))` along the trace, for a Killing field `X` of `e^{2σ} g`.
pub fn conformal_constant(
    chart: &ChartGeometry,
    trace: &Trace,
    sigma: &dyn Fn(Vec2) -> f64,
    killing: &dyn Fn(Vec2) -> Vec2,
) -> Result<InvariantReport> {
    let values = trace
        .states
        .iter()
        .map(|s| Ok(sigma(s.pos).exp() * chart.inner(s.pos, s.vel, killing(s.pos))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantReport::new("conformal-constant", values))
}

/// An isometry of the chart given by its point map and differential.
pub trait Isometry {
    fn map_point(&self, p: Vec2) -> Vec2;
    fn push_vector(&self, p: Vec2, x: Vec2) -> Vec2;

    fn map_state(&self, s: &GeodesicState) -> GeodesicState {
        GeodesicState { t: s.t, pos: self.map_point(s.pos), vel: self.push_vector(s.pos, s.vel) }
    }
}

pub struct IdentityMap;

impl Isometry for IdentityMap {
    fn map_point(&self, p: Vec2) -> Vec2 {
        p
    }
    fn push_vector(&self, _: Vec2, x: Vec2) -> Vec2 {
        x
    }
}

/// Rotation of the euclidean plane about the origin.
pub struct Rotation {
    pub angle: f64,
}

impl Isometry for Rotation {
    fn map_point(&self, p: Vec2) -> Vec2 {
        self.push_vector(p, p)
    }
    fn push_vector(&self, _: Vec2, x: Vec2) -> Vec2 {
        let (s, c) = self.angle.sin_cos();
        [c * x[0] - s * x[1], s * x[0] + c * x[1]]
    }
}

/// Coordinate translation (horizontal shifts in the plane, rotations `φ ↦ φ + a`
/// on a surface of revolution).
pub struct Translation {
    pub offset: Vec2,
}

impl Isometry for Translation {
    fn map_point(&self, p: Vec2) -> Vec2 {
        [p[0] + self.offset[0], p[1] + self.offset[1]]
    }
    fn push_vector(&self, _: Vec2, x: Vec2) -> Vec2 {
        x
    }
}

/// Map a geodesic by an isometry that preserves `V`, re-integrate from the
/// mapped launch state, and return the largest pointwise distance (chart
/// coordinates) between the mapped trace and the re-integrated one.
pub fn killing_flow_symmetry(
    chart: &ChartGeometry,
    field: &VectorFieldSpec,
    trace: &Trace,
    isometry: &dyn Isometry,
) -> Result<f64> {
    check_ids(chart, field, trace)?;
    let n = trace.len();
    let stride = (n / 20).max(1);
    for s in trace.states.iter().step_by(stride).take(20) {
        let q = isometry.map_point(s.pos);
        let pushed = isometry.push_vector(s.pos, field.at(s.pos));
        let vq = field.at(q);
        let scale = 1.0 + vq[0].abs().max(vq[1].abs());
        if (pushed[0] - vq[0]).abs().max((pushed[1] - vq[1]).abs()) > 1e-8 * scale {
            return Err(GeoError::Argument(format!("isometry does not preserve `{}` at {:?}", field.id(), s.pos)));
        }
        let x = s.vel;
        let before = chart.inner(s.pos, x, x)?;
        let after = chart.inner(q, isometry.push_vector(s.pos, x), isometry.push_vector(s.pos, x))?;
        if (before - after).abs() > 1e-8 * before.max(1.0) {
            return Err(GeoError::Argument(format!("map is not an isometry at {:?}", s.pos)));
        }
    }

    let anchor = trace.index_near(trace.meta.anchor_t);
    let start = isometry.map_state(&trace.states[anchor]);
    let settings = trace.meta.settings;
    let t_first = trace.first().t;
    let t_last = trace.last().t;
    let redo = if anchor == 0 {
        integrate(chart, field, &start, &settings.with_span(start.t, t_last))?
    } else {
        integrate_two_sided(chart, field, &start, &settings, t_first, t_last)?
    };
    let mut worst = 0.0_f64;
    for s in &trace.states {
        let mapped = isometry.map_point(s.pos);
        let other = if redo.len() == trace.len() {
            redo.states[trace.index_near(s.t)].pos
        } else {
            match redo.interpolate(s.t) {
                Some(r) => r.pos,
                None => continue,
            }
        };
        worst = worst.max(((mapped[0] - other[0]).powi(2) + (mapped[1] - other[1]).powi(2)).sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::IntegratorSettings;

    #[test]
    fn drift_stats_of_constant_and_ramp() {
        assert_eq!(drift_stats(&[2.0; 10]), (0.0, 0.0));
        let (m, s) = drift_stats(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(m, 3.0);
        assert!((s - (1.25_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_derivative_is_exact_on_quartics() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|x| x.powi(4) - 2.0 * x * x + x).collect();
        let d = time_derivative(&t, &y).unwrap();
        for (x, dy) in t.iter().zip(&d) {
            let exact = 4.0 * x.powi(3) - 4.0 * x + 1.0;
            assert!((dy - exact).abs() < 1e-9, "{x}: {dy} vs {exact}");
        }
        // non-uniform grid uses cubic interpolation
        let t: Vec<f64> = (0..30).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let y: Vec<f64> = t.iter().map(|x| x.powi(3) - x).collect();
        let d = time_derivative(&t, &y).unwrap();
        for (x, dy) in t.iter().zip(&d) {
            assert!((dy - (3.0 * x * x - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn killing_check_requires_killing_flag() {
        let plane = ChartGeometry::euclidean();
        let shear = VectorFieldSpec::new("shear", |p| [p[1], 0.0]);
        let tr = integrate(&plane, &shear, &GeodesicState::new(0.0, [0.0, 1.0], [1.0, 0.0]), &IntegratorSettings::rk4(1e-2, 0.0, 1.0)).unwrap();
        assert!(matches!(killing_curvature_check(&plane, &shear, &tr), Err(GeoError::Argument(_))));
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let plane = ChartGeometry::euclidean();
        let a = VectorFieldSpec::new("a", |_| [1.0, 0.0]);
        let b = VectorFieldSpec::new("b", |_| [0.0, 1.0]);
        let tr = integrate(&plane, &a, &GeodesicState::new(0.0, [0.0, 0.0], [0.0, 1.0]), &IntegratorSettings::rk4(1e-2, 0.0, 1.0)).unwrap();
        assert!(curvature_general(&plane, &b, &tr).is_err());
        assert!(curvature_general(&plane, &a, &tr).is_ok());
    }

    #[test]
    fn parallel_to_killing_field_has_constant_pairing() {
        // V = ∂_x is Killing on the plane; a geodesic launched along V is a
        // straight line with κ = 0 and g(V, γ̇) = 1 throughout
        let plane = ChartGeometry::euclidean();
        let v = VectorFieldSpec::new("dx", |_| [1.0, 0.0]).with_killing(true);
        let tr = integrate(&plane, &v, &GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]), &IntegratorSettings::rk4(1e-2, 0.0, 2.0)).unwrap();
        let check = killing_curvature_check(&plane, &v, &tr).unwrap();
        assert!(check.g_v.iter().all(|g| (g - 1.0).abs() < 1e-14));
        assert!(check.verdict.passed());
        assert!(curvature_general(&plane, &v, &tr).unwrap().iter().all(|k| *k < 1e-7));
    }

    #[test]
    fn identity_map_has_zero_mismatch() {
        let plane = ChartGeometry::euclidean();
        let w = VectorFieldSpec::new("winding", |p| [-p[1], p[0]]);
        let tr = integrate(&plane, &w, &GeodesicState::new(0.0, [0.0, 2.0], [1.0, 0.0]), &IntegratorSettings::rk4(1e-2, 0.0, 3.0)).unwrap();
        assert_eq!(killing_flow_symmetry(&plane, &w, &tr, &IdentityMap).unwrap(), 0.0);
    }

    #[test]
    fn non_preserving_map_is_rejected() {
        let plane = ChartGeometry::euclidean();
        let w = VectorFieldSpec::new("winding", |p| [-p[1], p[0]]);
        let tr = integrate(&plane, &w, &GeodesicState::new(0.0, [0.0, 2.0], [1.0, 0.0]), &IntegratorSettings::rk4(1e-2, 0.0, 1.0)).unwrap();
        let shift = Translation { offset: [1.0, 0.0] };
        assert!(killing_flow_symmetry(&plane, &w, &tr, &shift).is_err());
    }

    #[test]
    fn report_serializes_summary_only() {
        let r = InvariantReport::new("x", vec![1.0, 1.0, 1.0]).judge_std(1e-6);
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["name"], "x");
        assert_eq!(j["verdict"], "PASS");
        assert!(j.get("values").is_none());
    }
}
