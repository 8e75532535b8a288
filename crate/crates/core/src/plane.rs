//! Plane fields `V = f ∂ₓ + g ∂_y` on the euclidean plane.
//!
//! With unit speed the geodesic equations reduce to `ẍ = −κẏ`, `ÿ = κẋ` where
//! `κ = fẏ − gẋ` is the signed curvature. When `f = ∂_y p` and `g = −∂ₓ p` the
//! connection is flat and `ż e^{−ip}` is constant. For the shear field `y∂ₓ`
//! the quantity `c = ±y²/2 − arcsin ẏ` is conserved on each branch of
//! `sign ẋ`, which confines geodesics to strips between singular levels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{time_derivative, InvariantReport, Verdict};
use crate::error::{GeoError, Result};
use crate::geometry::{fd_step, ChartGeometry, ScalarField, Vec2, VectorFieldSpec};
use crate::integrator::{integrate_two_sided, GeodesicState, IntegratorSettings, Trace};
use crate::quad;

/// Value reported by [`strip_quadrature`] once the upper limit sits on a singular level.
pub const DIVERGENCE_CAP: f64 = 1e6;

/// `|ẋ|` below which an arcsin-invariant branch segment ends.
pub const BRANCH_SWITCH_TOL: f64 = 1e-9;

/// Plane field `V = f ∂ₓ + g ∂_y` with an optional flat potential `p`.
#[derive(Clone)]
pub struct PlaneField {
    pub id: String,
    pub f: ScalarField,
    pub g: ScalarField,
    pub potential: Option<ScalarField>,
    pub killing: bool,
}

impl std::fmt::Debug for PlaneField {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("PlaneField")
            .field("id", &self.id)
            .field("flat", &self.potential.is_some())
            .field("killing", &self.killing)
            .finish()
    }
}

impl PlaneField {
    pub fn new(
        id: impl Into<String>,
        f: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        g: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), f: Arc::new(f), g: Arc::new(g), potential: None, killing: false }
    }

    pub fn with_potential(mut self, p: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.potential = Some(Arc::new(p));
        self
    }

    pub fn with_killing(mut self, killing: bool) -> Self {
        self.killing = killing;
        self
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, |_| 0.0).with_potential(|_| 0.0).with_killing(true)
    }

    /// Winding field `x∂_y − y∂ₓ`, `p = −(x²+y²)/2`.
    pub fn winding() -> Self {
        Self::new("winding", |p| -p[1], |p| p[0])
            .with_potential(|p| -(p[0] * p[0] + p[1] * p[1]) / 2.0)
            .with_killing(true)
    }

    /// Shear field `y∂ₓ`, `p = y²/2`.
    pub fn shear() -> Self {
        Self::new("shear", |p| p[1], |_| 0.0).with_potential(|p| p[1] * p[1] / 2.0)
    }

    pub fn at(&self, p: Vec2) -> Vec2 {
        [(self.f)(p), (self.g)(p)]
    }

    /// Coefficients `(g, −f)` of the connection form `ω₁₂ = g dx − f dy`.
    pub fn connection_form(&self, p: Vec2) -> Vec2 {
        [(self.g)(p), -(self.f)(p)]
    }

    /// Curvature density `−(∂ₓf + ∂_y g)` by central differences.
    pub fn curvature_density(&self, p: Vec2) -> f64 {
        let hx = fd_step(p[0]);
        let hy = fd_step(p[1]);
        let dfx = ((self.f)([p[0] + hx, p[1]]) - (self.f)([p[0] - hx, p[1]])) / (2.0 * hx);
        let dgy = ((self.g)([p[0], p[1] + hy]) - (self.g)([p[0], p[1] - hy])) / (2.0 * hy);
        -(dfx + dgy)
    }

    /// As a [`VectorFieldSpec`] on the euclidean chart.
    pub fn to_spec(&self) -> VectorFieldSpec {
        let (f, g) = (self.f.clone(), self.g.clone());
        let mut spec = VectorFieldSpec::new(self.id.clone(), move |p| [f(p), g(p)]).with_killing(self.killing);
        if let Some(p) = &self.potential {
            let p = p.clone();
            spec = spec.with_plane_potential(move |q| p(q));
        }
        spec
    }
}

/// Signed curvature `κ = fẏ − gẋ`.
pub fn plane_curvature(field: &PlaneField, state: &GeodesicState) -> f64 {
    let [f, g] = field.at(state.pos);
    f * state.vel[1] - g * state.vel[0]
}

fn require_unit_speed(trace: &Trace) -> Result<()> {
    if (trace.energy() - 1.0).abs() > 1e-9 {
        return Err(GeoError::Argument(format!("expected a unit-speed trace, got E = {}", trace.energy())));
    }
    Ok(())
}

/// Reports on the flat-case invariant `ż e^{−ip}`.
#[derive(Debug, Clone, Serialize)]
pub struct FlatInvariant {
    pub z0: [f64; 2],
    /// Drift of `|ż e^{−ip} − z₀|`; PASS below 1e-6.
    pub deviation: InvariantReport,
    /// `|ż|`; PASS if within 1e-6 of 1.
    pub modulus: InvariantReport,
}

impl FlatInvariant {
    pub fn passed(&self) -> bool {
        self.deviation.passed() && self.modulus.passed()
    }
}

pub fn flat_invariant(field: &PlaneField, trace: &Trace) -> Result<FlatInvariant> {
    let p = field
        .potential
        .as_ref()
        .ok_or_else(|| GeoError::Argument(format!("field {} has no flat potential", field.id)))?;
    require_unit_speed(trace)?;
    let series: Vec<Complex64> = trace
        .states
        .iter()
        .map(|st| Complex64::new(st.vel[0], st.vel[1]) * Complex64::from_polar(1.0, -p(st.pos)))
        .collect();
    let anchor = trace.index_near(trace.meta.anchor_t);
    let z0 = series[anchor];
    let dev: Vec<f64> = series.iter().map(|w| (w - z0).norm()).collect();
    let max_dev = dev.iter().copied().fold(0.0, f64::max);
    let mut deviation = InvariantReport::new("flat-invariant", dev);
    deviation.max_dev = max_dev;
    deviation.verdict = Some(Verdict::from_bool(max_dev < 1e-6));
    let moduli: Vec<f64> = trace.states.iter().map(|st| st.vel[0].hypot(st.vel[1])).collect();
    let worst = moduli.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    let mut modulus = InvariantReport::new("flat-modulus", moduli);
    modulus.verdict = Some(Verdict::from_bool(worst < 1e-6));
    Ok(FlatInvariant { z0: [z0.re, z0.im], deviation, modulus })
}

/// Largest `|d/dt p(γ) − κ|` along a trace, with the time derivative by finite differences.
pub fn potential_rate_residual(field: &PlaneField, trace: &Trace) -> Result<f64> {
    let p = field
        .potential
        .as_ref()
        .ok_or_else(|| GeoError::Argument(format!("field {} has no flat potential", field.id)))?;
    let values: Vec<f64> = trace.states.iter().map(|st| p(st.pos)).collect();
    let rate = time_derivative(&trace.times(), &values)?;
    Ok(trace
        .states
        .iter()
        .zip(rate)
        .map(|(st, r)| (r - plane_curvature(field, st)).abs())
        .fold(0.0, f64::max))
}

/// `c = ±y²/2 − arcsin ẏ` with `± = sign ẋ`; `arcsin ẏ` is evaluated as
/// `atan2(ẏ, |ẋ|)`, which equals it for unit speed.
pub fn arcsin_value(pos: Vec2, vel: Vec2) -> f64 {
    let s = if vel[0] < 0.0 { -1.0 } else { 1.0 };
    s * pos[1] * pos[1] / 2.0 - vel[1].atan2(vel[0].abs())
}

/// Samples of one branch of `sign ẋ`.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSegment {
    pub sign: i8,
    pub start: usize,
    /// Exclusive end index.
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub report: InvariantReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcsinReport {
    pub segments: Vec<BranchSegment>,
    /// Estimated times where `ẋ` changes sign.
    pub switches: Vec<f64>,
    pub verdict: Verdict,
}

impl ArcsinReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn max_std(&self) -> f64 {
        self.segments.iter().map(|s| s.report.std).fold(0.0, f64::max)
    }
}

/// Per-branch report on the arcsin invariant of the shear field. A segment
/// ends where `ẋ` changes sign or `|ẋ| < 1e-9`; each segment passes if its
/// standard deviation is below 1e-6.
pub fn arcsin_invariant(trace: &Trace) -> Result<ArcsinReport> {
    require_unit_speed(trace)?;
    if let Some(st) = trace.states.iter().find(|st| st.vel[1].abs() > 1.0 + 1e-6) {
        return Err(GeoError::Numerical(format!("|ẏ| = {} exceeds 1 at t = {}", st.vel[1].abs(), st.t)));
    }
    let sign_of = |v: f64| -> i8 {
        if v.abs() < BRANCH_SWITCH_TOL {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let states = &trace.states;
    let mut segments = Vec::new();
    let mut switches = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let s = sign_of(states[i].vel[0]);
        if s == 0 {
            i += 1;
            continue;
        }
        let start = i;
        while i < states.len() && sign_of(states[i].vel[0]) == s {
            i += 1;
        }
        let end = i;
        let values: Vec<f64> = states[start..end].iter().map(|st| arcsin_value(st.pos, st.vel)).collect();
        segments.push(BranchSegment {
            sign: s,
            start,
            end,
            t_start: states[start].t,
            t_end: states[end - 1].t,
            report: InvariantReport::new(format!("arcsin-branch-{}", segments.len()), values).judge_std(1e-6),
        });
        if end < states.len() {
            let (a, b) = (&states[end - 1], &states[end]);
            let w = a.vel[0] / (a.vel[0] - b.vel[0]);
            switches.push(a.t + w * (b.t - a.t));
        }
    }
    let verdict = Verdict::from_bool(!segments.is_empty() && segments.iter().all(|s| s.report.passed()));
    Ok(ArcsinReport { segments, switches, verdict })
}

/// Geodesic strip of the shear field around a starting height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripBounds {
    pub c: f64,
    /// `+1` or `−1`, the sign of `ẋ₀`.
    pub sign: i8,
    pub y0: f64,
    /// Nearest singular level below `y₀`, `−∞` if none.
    pub lower: f64,
    /// Nearest singular level above `y₀`, `+∞` if none.
    pub upper: f64,
    /// `y₀` is itself singular: the geodesic is the line `y = y₀`.
    pub degenerate: bool,
}

impl StripBounds {
    /// `F(y) = ±y²/2 − c`; singular levels are its zeros mod π.
    pub fn phase(&self, y: f64) -> f64 {
        self.sign as f64 * y * y / 2.0 - self.c
    }

    /// Largest `|sin F|` at the finite bounds.
    pub fn bound_residual(&self) -> f64 {
        [self.lower, self.upper]
            .into_iter()
            .filter(|y| y.is_finite())
            .map(|y| self.phase(y).sin().abs())
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower < y && y < self.upper
    }
}

/// Singular levels `y = ±√(2s(c + mπ))` for `m` in `ms`.
fn singular_levels(sign: f64, c: f64, ms: impl Iterator<Item = i64>) -> Vec<f64> {
    let mut out = Vec::new();
    for m in ms {
        let sq = 2.0 * sign * (c + m as f64 * PI);
        if sq >= 0.0 {
            let r = sq.sqrt();
            out.push(r);
            out.push(-r);
        }
    }
    out
}

/// Strip of the shear field containing a unit-speed launch `(y₀, ẋ₀, ẏ₀)`.
pub fn strip_bounds(y0: f64, ydot0: f64, xdot0: f64) -> StripBounds {
    let sign = if xdot0 < 0.0 { -1.0 } else { 1.0 };
    let c = arcsin_value([0.0, y0], [xdot0, ydot0]);
    if ydot0 == 0.0 {
        return StripBounds { c, sign: sign as i8, y0, lower: y0, upper: y0, degenerate: true };
    }
    let j = ((sign * y0 * y0 / 2.0 - c) / PI).floor() as i64;
    let levels = singular_levels(sign, c, j - 1..=j + 2);
    let eps = 1e-12 * y0.abs().max(1.0);
    let upper = levels.iter().copied().filter(|y| *y > y0 + eps).fold(f64::INFINITY, f64::min);
    let lower = levels.iter().copied().filter(|y| *y < y0 - eps).fold(f64::NEG_INFINITY, f64::max);
    StripBounds { c, sign: sign as i8, y0, lower, upper, degenerate: false }
}

/// Elapsed time from [`strip_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripTime {
    pub time: f64,
    /// The upper limit lies on a singular level; `time` is ±[`DIVERGENCE_CAP`].
    pub diverged: bool,
}

/// Nodes on `[a, b]` refined geometrically toward both ends.
fn geometric_nodes(a: f64, b: f64, depth: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = vec![a];
    for k in (1..=depth).rev() {
        nodes.push(a + half * 0.5_f64.powi(k as i32));
    }
    nodes.push(mid);
    for k in 1..=depth {
        nodes.push(b - half * 0.5_f64.powi(k as i32));
    }
    nodes.push(b);
    nodes.dedup();
    nodes
}

/// `t(y) = ∫_{y₀}^{y} dy / sin(±y²/2 − c)`, the time a shear geodesic needs to
/// climb from `y₀` to `y`. Singular endpoints are approached geometrically.
pub fn strip_quadrature(y0: f64, y: f64, c: f64, sign: i8) -> Result<StripTime> {
    if y == y0 {
        return Ok(StripTime { time: 0.0, diverged: false });
    }
    let s = if sign < 0 { -1.0 } else { 1.0 };
    let phase = |x: f64| s * x * x / 2.0 - c;
    let (lo, hi) = (y0.min(y), y0.max(y));
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let tol = 1e-12 * scale;
    let kmin = (phase(lo).min(phase(hi)).min(phase(0.0)) / PI).floor() as i64 - 1;
    let kmax = (phase(lo).max(phase(hi)).max(phase(0.0)) / PI).ceil() as i64 + 1;
    let levels = singular_levels(s, c, kmin..=kmax);
    if levels.iter().any(|l| (y0 - l).abs() <= tol) {
        return Err(GeoError::Argument(format!("y₀ = {y0} lies on a singular level")));
    }
    if let Some(l) = levels.iter().find(|l| **l > lo + tol && **l < hi - tol) {
        return Err(GeoError::Argument(format!("singular level y = {l} lies inside [{lo}, {hi}]")));
    }
    let direction = (y - y0).signum();
    if levels.iter().any(|l| (y - l).abs() <= tol) {
        return Ok(StripTime { time: direction * phase(y0).sin().signum() * DIVERGENCE_CAP, diverged: true });
    }
    let nodes = geometric_nodes(y0, y, 48);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += quad::integrate(&mut |x| 1.0 / phase(x).sin(), w[0], w[1], 1e-10, 0.0)?;
    }
    Ok(StripTime { time: total, diverged: false })
}

/// First time after `from_t` at which the trace's `y` crosses `target`,
/// located by bisection on the Hermite interpolant.
pub fn time_at_height(trace: &Trace, target: f64, from_t: f64) -> Option<f64> {
    let start = trace.index_near(from_t);
    let states = &trace.states;
    for i in start..states.len().saturating_sub(1) {
        let (a, b) = (states[i].pos[1] - target, states[i + 1].pos[1] - target);
        if a == 0.0 {
            return Some(states[i].t);
        }
        if a * b < 0.0 {
            let (mut lo, mut hi) = (states[i].t, states[i + 1].t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = trace.interpolate(mid)?.pos[1] - target;
                if (fm < 0.0) == (a < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Confinement {
    pub bounds: StripBounds,
    pub y_min: f64,
    pub y_max: f64,
    /// Largest distance by which the trace leaves the strip.
    pub max_excess: f64,
    pub verdict: Verdict,
}

/// Check that a shear-field trace stays in the strip of its launch, to 1e-3.
pub fn confinement_check(trace: &Trace) -> Result<Confinement> {
    require_unit_speed(trace)?;
    let anchor = trace.states[trace.index_near(trace.meta.anchor_t)];
    let bounds = strip_bounds(anchor.pos[1], anchor.vel[1], anchor.vel[0]);
    let y_min = trace.states.iter().map(|s| s.pos[1]).fold(f64::INFINITY, f64::min);
    let y_max = trace.states.iter().map(|s| s.pos[1]).fold(f64::NEG_INFINITY, f64::max);
    let max_excess = (y_max - bounds.upper).max(bounds.lower - y_min).max(0.0);
    Ok(Confinement { bounds, y_min, y_max, max_excess, verdict: Verdict::from_bool(max_excess < 1e-3) })
}

/// Extent of one shooting ray.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShotExtent {
    pub angle: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Launch unit-speed geodesics at `n` equally spaced angles from `start` and
/// integrate each over `[−t_max, t_max]`. Runs in parallel over angles.
pub fn shooting_sweep(
    field: &PlaneField,
    start: Vec2,
    n: usize,
    t_max: f64,
    settings: &IntegratorSettings,
) -> Result<Vec<ShotExtent>> {
    let chart = ChartGeometry::euclidean();
    let spec = field.to_spec();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64;
            let init = GeodesicState::new(0.0, start, [angle.cos(), angle.sin()]);
            let tr = integrate_two_sided(&chart, &spec, &init, settings, -t_max, t_max)?;
            let ys = tr.states.iter().map(|s| s.pos[1]);
            let (y_min, y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
            Ok(ShotExtent { angle, y_min, y_max })
        })
        .collect()
}

/// Outcome of shooting from `p` toward the strips of `q` under the shear field.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationCheck {
    pub p: Vec2,
    pub q: Vec2,
    pub angles: usize,
    /// Highest `y` reached by any geodesic from `p`.
    pub p_reach: f64,
    /// Lowest strip bound over all launches at `q`.
    pub q_floor: f64,
    pub verdict: Verdict,
}

/// Shoot `n` geodesics from `p` (which must lie below `q`) and confirm none
/// reaches the lowest strip bound of any geodesic through `q`.
pub fn strip_separation(p: Vec2, q: Vec2, n: usize, t_max: f64, settings: &IntegratorSettings) -> Result<SeparationCheck> {
    if !(p[1] < q[1]) {
        return Err(GeoError::Argument("the first point must lie below the second".into()));
    }
    let shots = shooting_sweep(&PlaneField::shear(), p, n, t_max, settings)?;
    let p_reach = shots.iter().map(|s| s.y_max).fold(f64::NEG_INFINITY, f64::max);
    let q_floor = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            strip_bounds(q[1], a.sin(), a.cos()).lower
        })
        .fold(f64::INFINITY, f64::min);
    Ok(SeparationCheck { p, q, angles: n, p_reach, q_floor, verdict: Verdict::from_bool(p_reach < q_floor) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{geodesic_rhs, integrate};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn shear_trace(y0: f64, vel: Vec2, t: f64) -> Trace {
        let n = vel[0].hypot(vel[1]);
        let init = GeodesicState::new(0.0, [1.0, y0], [vel[0] / n, vel[1] / n]);
        integrate_two_sided(&ChartGeometry::euclidean(), &PlaneField::shear().to_spec(), &init, &IntegratorSettings::rk4(1e-3, 0.0, t), -t, t).unwrap()
    }

    #[test]
    fn curvature_examples() {
        let w = PlaneField::winding();
        assert_eq!(plane_curvature(&w, &GeodesicState::new(0.0, [0.0, 2.0], [1.0, 0.0])), 0.0);
        let s = PlaneField::shear();
        let st = GeodesicState::new(0.0, [0.3, 1.7], [0.6, 0.8]);
        assert!((plane_curvature(&s, &st) - 1.7 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn plane_equations_match_general_rhs() {
        let chart = ChartGeometry::euclidean();
        for field in [PlaneField::winding(), PlaneField::shear()] {
            let spec = field.to_spec();
            let st = GeodesicState::new(0.0, [0.4, -1.1], [0.6, 0.8]);
            let k = plane_curvature(&field, &st);
            let a = geodesic_rhs(&chart, &spec, &st, 1.0).unwrap();
            assert!((a[0] + k * 0.8).abs() < 1e-14 && (a[1] - k * 0.6).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_fields_have_zero_curvature_density() {
        for field in [PlaneField::winding(), PlaneField::shear(), PlaneField::zero()] {
            for p in [[0.0, 0.0], [1.3, -0.4], [-2.0, 3.0]] {
                assert!(field.curvature_density(p).abs() < 1e-8);
            }
        }
        let rot = PlaneField::new("div", |p| p[0], |p| p[1]);
        assert!((rot.curvature_density([0.5, 0.5]) + 2.0).abs() < 1e-8);
    }

    #[test]
    fn flat_invariant_needs_potential() {
        let f = PlaneField::new("nop", |_| 0.0, |_| 0.0);
        let tr = integrate(&ChartGeometry::euclidean(), &f.to_spec(), &GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]), &IntegratorSettings::rk4(0.1, 0.0, 1.0)).unwrap();
        assert!(flat_invariant(&f, &tr).is_err());
        assert!(flat_invariant(&PlaneField::zero(), &tr).unwrap().passed());
    }

    #[test]
    fn horizontal_line_is_degenerate_strip() {
        let b = strip_bounds(1.5, 0.0, 1.0);
        assert!(b.degenerate && b.lower == 1.5 && b.upper == 1.5);
        assert!((b.c - 1.125).abs() < 1e-15);
        let tr = shear_trace(1.5, [1.0, 0.0], 5.0);
        assert!(tr.states.iter().all(|s| (s.pos[1] - 1.5).abs() < 1e-15));
    }

    #[test]
    fn reference_strip_bounds() {
        let b = strip_bounds(1.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((b.c - (0.5 - FRAC_PI_4)).abs() < 1e-15);
        let expect = (2.0 * (b.c + PI)).sqrt();
        assert!((b.upper - expect).abs() < 1e-14 && (b.lower + expect).abs() < 1e-14);
        assert!((expect - 2.390_060_455).abs() < 1e-9);
        // the commonly quoted 2.39033 is a rounding of this value to 3e-4
        assert!((expect - 2.39033).abs() < 3e-4);
        assert!(b.bound_residual() < 1e-10);
    }

    #[test]
    fn negative_branch_bounds() {
        let a: f64 = 2.0;
        let b = strip_bounds(1.0, a.sin(), a.cos());
        assert_eq!(b.sign, -1);
        assert!(b.contains(1.0));
        assert!(b.bound_residual() < 1e-10);
    }

    #[test]
    fn quadrature_zero_and_errors() {
        let c = 0.5 - FRAC_PI_4;
        assert_eq!(strip_quadrature(1.0, 1.0, c, 1).unwrap().time, 0.0);
        assert!(strip_quadrature(1.0, 3.0, c, 1).is_err());
        let top = (2.0 * (c + PI)).sqrt();
        let t = strip_quadrature(1.0, top, c, 1).unwrap();
        assert!(t.diverged && t.time >= 1e3);
    }

    #[test]
    fn arcsin_branches_on_reference_trace() {
        let tr = shear_trace(1.0, [1.0, 1.0], 10.0);
        let rep = arcsin_invariant(&tr).unwrap();
        assert!(rep.passed(), "max std {}", rep.max_std());
        assert!(!rep.switches.is_empty());
        let first = rep.segments.iter().find(|s| s.start <= tr.index_near(0.0) && tr.index_near(0.0) < s.end).unwrap();
        assert!((arcsin_value([1.0, 1.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]) - (0.5 - FRAC_PI_4)).abs() < 1e-15);
        assert!((first.report.mean() - (0.5 - FRAC_PI_4)).abs() < 1e-6);
    }
}
