//! Integration of the geodesic equation of a connection with vectorial torsion.
//!
//! In chart coordinates a geodesic with constant speed `E` satisfies
//!
//! ```text
//! ẍ^k = −Γ^k_ij ẋ^i ẋ^j − E² V^k + g(V, ẋ) ẋ^k
//! ```
//!
//! `E` is measured once from the initial velocity and then held fixed, so
//! any drift of `|ẋ|_g` away from `E` is integration error and shows up in
//! the per-sample diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::{contract_christoffel, quad_form, ChartGeometry, Vec2, VectorFieldSpec};

const BOUNDARY_BISECTION_TOL: f64 = 1e-9;

/// Position and velocity at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub pos: Vec2,
    pub vel: Vec2,
}

impl GeodesicState {
    pub fn new(t: f64, pos: Vec2, vel: Vec2) -> Self {
        Self { t, pos, vel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Rk4 { h: f64 },
    Rk45 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    #[serde(flatten)]
    pub method: Method,
    pub t0: f64,
    /// May be smaller than `t0` for backward integration.
    pub t1: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    1_000_000
}

impl IntegratorSettings {
    pub fn rk4(h: f64, t0: f64, t1: f64) -> Self {
        Self { method: Method::Rk4 { h }, t0, t1, max_steps: default_max_steps() }
    }

    pub fn rk45(rtol: f64, atol: f64, t0: f64, t1: f64) -> Self {
        Self { method: Method::Rk45 { rtol, atol }, t0, t1, max_steps: default_max_steps() }
    }

    pub fn with_span(mut self, t0: f64, t1: f64) -> Self {
        self.t0 = t0;
        self.t1 = t1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(GeoError::Argument(format!("step h must be positive, got {h}")))
            }
            Method::Rk45 { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return Err(GeoError::Argument("tolerances must be positive".into()))
            }
            _ => {}
        }
        if !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(GeoError::Argument("time span must be finite".into()));
        }
        if self.max_steps == 0 {
            return Err(GeoError::Argument("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    ReachedEnd,
    MaxSteps,
    DomainExit { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub chart_id: String,
    pub field_id: String,
    /// Speed frozen at launch.
    pub energy: f64,
    pub settings: IntegratorSettings,
    /// Launch time of the initial state.
    pub anchor_t: f64,
}

/// Per-sample diagnostics: speed, geodesic curvature `κ` and `g(V, γ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub speed: f64,
    pub kappa: f64,
    pub g_v: f64,
}

/// Time-ordered samples of a geodesic with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub states: Vec<GeodesicState>,
    pub diagnostics: Vec<Diagnostics>,
    /// Stop reason at the late end (`t` largest) and, for two-sided
    /// traces, at the early end.
    pub stop: StopReason,
    pub stop_backward: Option<StopReason>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.meta.energy
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &GeodesicState {
        &self.states[0]
    }

    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trace is never empty")
    }

    /// Largest relative speed deviation `|‖γ̇‖ − E| / E`.
    pub fn max_speed_drift(&self) -> f64 {
        let e = self.meta.energy;
        self.diagnostics.iter().map(|d| (d.speed - e).abs() / e).fold(0.0, f64::max)
    }

    /// Index of the sample nearest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        let k = self.states.partition_point(|s| s.t < t);
        if k == 0 {
            0
        } else if k >= self.states.len() {
            self.states.len() - 1
        } else if (self.states[k].t - t).abs() < (t - self.states[k - 1].t).abs() {
            k
        } else {
            k - 1
        }
    }

    /// Cubic Hermite interpolation of position and velocity at time `t`.
    pub fn interpolate(&self, t: f64) -> Option<GeodesicState> {
        let first = self.states.first()?;
        let last = self.states.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let k = self.states.partition_point(|s| s.t <= t).clamp(1, self.states.len() - 1);
        let a = &self.states[k - 1];
        let b = &self.states[k];
        let h = b.t - a.t;
        if h == 0.0 {
            return Some(*a);
        }
        let s = (t - a.t) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        // velocity is only C¹-matched, which is enough at these step sizes
        let mut pos = [0.0; 2];
        let mut vel = [0.0; 2];
        for i in 0..2 {
            pos[i] = h00 * a.pos[i] + h10 * h * a.vel[i] + h01 * b.pos[i] + h11 * h * b.vel[i];
            vel[i] = d00 * a.pos[i] + d10 * a.vel[i] + d01 * b.pos[i] + d11 * b.vel[i];
        }
        Some(GeodesicState { t, pos, vel })
    }
}

/// Right-hand side of the geodesic equation: the chart acceleration.
pub fn geodesic_rhs(chart: &ChartGeometry, field: &VectorFieldSpec, state: &GeodesicState, energy: f64) -> Result<Vec2> {
    let p = state.pos;
    let g = chart.metric(p)?;
    let gamma = chart.christoffel(p)?;
    let v = field.at(p);
    let x = state.vel;
    let gvx = quad_form(&g, v, x);
    let c = contract_christoffel(&gamma, x, x);
    let e2 = energy * energy;
    Ok([-c[0] - e2 * v[0] + gvx * x[0], -c[1] - e2 * v[1] + gvx * x[1]])
}

/// `∇^g_γ̇ γ̇ = −E² V + g(V, γ̇) γ̇`, the Levi-Civita acceleration of a geodesic.
pub fn levi_civita_acceleration(chart: &ChartGeometry, field: &VectorFieldSpec, state: &GeodesicState, energy: f64) -> Result<Vec2> {
    let g = chart.metric(state.pos)?;
    let v = field.at(state.pos);
    let gvx = quad_form(&g, v, state.vel);
    let e2 = energy * energy;
    Ok([-e2 * v[0] + gvx * state.vel[0], -e2 * v[1] + gvx * state.vel[1]])
}

pub fn diagnostics(chart: &ChartGeometry, field: &VectorFieldSpec, state: &GeodesicState, energy: f64) -> Result<Diagnostics> {
    let g = chart.metric(state.pos)?;
    let v = field.at(state.pos);
    let speed = quad_form(&g, state.vel, state.vel).sqrt();
    let g_v = quad_form(&g, v, state.vel);
    let vv = quad_form(&g, v, v);
    let kappa = (vv - g_v * g_v / (energy * energy)).max(0.0).sqrt();
    Ok(Diagnostics { speed, kappa, g_v })
}

type Phase = [f64; 4];

fn deriv(chart: &ChartGeometry, field: &VectorFieldSpec, t: f64, y: &Phase, energy: f64) -> Result<Phase> {
    let state = GeodesicState { t, pos: [y[0], y[1]], vel: [y[2], y[3]] };
    let a = geodesic_rhs(chart, field, &state, energy)?;
    Ok([y[2], y[3], a[0], a[1]])
}

fn axpy(y: &Phase, h: f64, k: &Phase) -> Phase {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

fn rk4_step(chart: &ChartGeometry, field: &VectorFieldSpec, t: f64, y: &Phase, h: f64, energy: f64) -> Result<Phase> {
    let k1 = deriv(chart, field, t, y, energy)?;
    let k2 = deriv(chart, field, t + 0.5 * h, &axpy(y, 0.5 * h, &k1), energy)?;
    let k3 = deriv(chart, field, t + 0.5 * h, &axpy(y, 0.5 * h, &k2), energy)?;
    let k4 = deriv(chart, field, t + h, &axpy(y, h, &k3), energy)?;
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    chart.check_point([out[0], out[1]])?;
    Ok(out)
}

// Dormand–Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the 5th-order solution and the scaled error norm.
fn dp_step(
    chart: &ChartGeometry,
    field: &VectorFieldSpec,
    t: f64,
    y: &Phase,
    h: f64,
    energy: f64,
    rtol: f64,
    atol: f64,
) -> Result<(Phase, f64)> {
    let mut k = [[0.0; 4]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * DP_A[s][j] * kj[i];
            }
        }
        k[s] = deriv(chart, field, t + DP_C[s] * h, &ys, energy)?;
    }
    let mut y5 = *y;
    let mut err = 0.0;
    for i in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += DP_B5[s] * k[s][i];
            d4 += DP_B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let sc = atol + rtol * y[i].abs().max(y5[i].abs());
        err += (h * (d5 - d4) / sc).powi(2);
    }
    chart.check_point([y5[0], y5[1]])?;
    Ok((y5, (err / 4.0).sqrt()))
}

fn is_domain(e: &GeoError) -> bool {
    matches!(e, GeoError::Domain { .. })
}

/// Largest step in `(0, h]` whose evaluation stays inside the domain, to
/// within [`BOUNDARY_BISECTION_TOL`] in time.
fn refine_exit(
    step: &dyn Fn(f64) -> Result<Phase>,
    h: f64,
) -> Result<(f64, Option<Phase>)> {
    let mut lo = 0.0_f64;
    let mut hi = h.abs();
    let sign = h.signum();
    let mut best = None;
    while hi - lo > BOUNDARY_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        match step(sign * mid) {
            Ok(y) => {
                lo = mid;
                best = Some(y);
            }
            Err(e) if is_domain(&e) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    Ok((sign * lo, best))
}

/// Integrate the geodesic equation of the connection defined by `field`.
pub fn integrate(chart: &ChartGeometry, field: &VectorFieldSpec, initial: &GeodesicState, settings: &IntegratorSettings) -> Result<Trace> {
    settings.validate()?;
    chart.check_point(initial.pos)?;
    let energy = chart.norm(initial.pos, initial.vel)?;
    if !(energy > 0.0) {
        return Err(GeoError::Argument("initial velocity must be nonzero".into()));
    }
    let meta = TraceMeta {
        chart_id: chart.id().to_string(),
        field_id: field.id().to_string(),
        energy,
        settings: *settings,
        anchor_t: settings.t0,
    };
    let t_start = settings.t0;
    let t_end = settings.t1;
    let dir = if t_end >= t_start { 1.0 } else { -1.0 };

    let mut states = vec![GeodesicState { t: t_start, pos: initial.pos, vel: initial.vel }];
    let mut y: Phase = [initial.pos[0], initial.pos[1], initial.vel[0], initial.vel[1]];
    let mut t = t_start;
    let mut stop = StopReason::MaxSteps;
    let remaining = |t: f64| (t_end - t) * dir;
    let span = (t_end - t_start).abs();

    match settings.method {
        Method::Rk4 { h } => {
            // times are t_start + k·h exactly, so traces sit on a uniform grid
            let mut k = 0usize;
            for _ in 0..settings.max_steps {
                let rem = remaining(t);
                if rem <= 1e-12 * span.max(1.0) {
                    stop = StopReason::ReachedEnd;
                    break;
                }
                let step = dir * h.min(rem);
                match rk4_step(chart, field, t, &y, step, energy) {
                    Ok(next) => {
                        y = next;
                        k += 1;
                        t = if h >= rem { t_end } else { t_start + dir * h * k as f64 };
                        states.push(GeodesicState { t, pos: [y[0], y[1]], vel: [y[2], y[3]] });
                    }
                    Err(e) if is_domain(&e) => {
                        let (hs, ys) = refine_exit(&|hh| rk4_step(chart, field, t, &y, hh, energy), step)?;
                        if let Some(ys) = ys {
                            t += hs;
                            y = ys;
                            states.push(GeodesicState { t, pos: [y[0], y[1]], vel: [y[2], y[3]] });
                        }
                        stop = StopReason::DomainExit { t };
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if stop == StopReason::MaxSteps && remaining(t) <= 1e-12 * span.max(1.0) {
                stop = StopReason::ReachedEnd;
            }
        }
        Method::Rk45 { rtol, atol } => {
            let mut h = (0.01 * span).clamp(1e-6, 1e-2);
            let mut accepted = 0usize;
            let mut attempts = 0usize;
            loop {
                let rem = remaining(t);
                if rem <= 1e-12 * span.max(1.0) {
                    stop = StopReason::ReachedEnd;
                    break;
                }
                if accepted >= settings.max_steps || attempts >= 20 * settings.max_steps {
                    stop = StopReason::MaxSteps;
                    break;
                }
                attempts += 1;
                let hh = h.min(rem);
                let step = dir * hh;
                match dp_step(chart, field, t, &y, step, energy, rtol, atol) {
                    Ok((next, err)) => {
                        let scale = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        if err <= 1.0 {
                            y = next;
                            t = if hh >= rem { t_end } else { t + step };
                            states.push(GeodesicState { t, pos: [y[0], y[1]], vel: [y[2], y[3]] });
                            accepted += 1;
                        }
                        h = hh * scale;
                    }
                    Err(e) if is_domain(&e) => {
                        // shrink first: a large step may overshoot a region it could resolve
                        if hh > 1e-3 * span.max(1e-6) && hh > 1e-6 {
                            h = 0.25 * hh;
                            continue;
                        }
                        let (hs, ys) = refine_exit(
                            &|s| dp_step(chart, field, t, &y, s, energy, rtol, atol).map(|(p, _)| p),
                            step,
                        )?;
                        if let Some(ys) = ys {
                            t += hs;
                            y = ys;
                            states.push(GeodesicState { t, pos: [y[0], y[1]], vel: [y[2], y[3]] });
                        }
                        stop = StopReason::DomainExit { t };
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    if dir < 0.0 {
        states.reverse();
    }
    let diagnostics = states
        .iter()
        .map(|s| diagnostics(chart, field, s, energy))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace { meta, states, diagnostics, stop, stop_backward: None })
}

/// Integrate backward to `t_back` and forward to `t_fwd` from `initial`
/// (at `initial.t`) and merge the two halves into one increasing trace.
pub fn integrate_two_sided(
    chart: &ChartGeometry,
    field: &VectorFieldSpec,
    initial: &GeodesicState,
    settings: &IntegratorSettings,
    t_back: f64,
    t_fwd: f64,
) -> Result<Trace> {
    let t0 = initial.t;
    if !(t_back <= t0 && t_fwd >= t0) {
        return Err(GeoError::Argument(format!("need t_back ≤ {t0} ≤ t_fwd")));
    }
    let fwd = integrate(chart, field, initial, &settings.with_span(t0, t_fwd))?;
    if t_back == t0 {
        return Ok(fwd);
    }
    let back = integrate(chart, field, initial, &settings.with_span(t0, t_back))?;
    let mut states = back.states;
    let mut diagnostics = back.diagnostics;
    states.pop();
    diagnostics.pop();
    states.extend(fwd.states);
    diagnostics.extend(fwd.diagnostics);
    let mut meta = fwd.meta;
    meta.settings.t0 = t_back;
    meta.settings.t1 = t_fwd;
    meta.anchor_t = t0;
    Ok(Trace { meta, states, diagnostics, stop: fwd.stop, stop_backward: Some(back.stop) })
}

/// Levi-Civita geodesics: the `V = 0` case.
pub fn levi_civita_integrate(chart: &ChartGeometry, initial: &GeodesicState, settings: &IntegratorSettings) -> Result<Trace> {
    integrate(chart, &VectorFieldSpec::zero(), initial, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainBox;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn sphere() -> ChartGeometry {
        ChartGeometry::new("sphere", ["s", "phi"], DomainBox::new(1e-3, PI - 1e-3, f64::NEG_INFINITY, f64::INFINITY), |p| {
            [[1.0, 0.0], [0.0, p[0].sin().powi(2)]]
        })
        .with_christoffel(|p| {
            let (s, c) = p[0].sin_cos();
            let mut g = [[[0.0; 2]; 2]; 2];
            g[0][1][1] = -s * c;
            g[1][0][1] = c / s;
            g[1][1][0] = c / s;
            g
        })
    }

    fn sphere_flat_field() -> VectorFieldSpec {
        VectorFieldSpec::new("sphere-flat", |p| [p[0].cos() / p[0].sin(), 0.0]).with_sigma(|p| -p[0].sin().ln())
    }

    #[test]
    fn zero_field_plane_is_straight() {
        let plane = ChartGeometry::euclidean();
        let a = geodesic_rhs(&plane, &VectorFieldSpec::zero(), &GeodesicState::new(0.0, [1.0, 2.0], [0.3, -0.4]), 0.5).unwrap();
        assert_eq!(a, [0.0, 0.0]);
        let tr = levi_civita_integrate(&plane, &GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]), &IntegratorSettings::rk4(1e-2, 0.0, 1.0)).unwrap();
        let end = tr.last();
        assert!((end.t - 1.0).abs() < 1e-12);
        assert!((end.pos[0] - 1.0).abs() < 1e-12 && end.pos[1].abs() < 1e-12);
        assert_eq!(tr.stop, StopReason::ReachedEnd);
    }

    #[test]
    fn plane_rhs_matches_signed_curvature_form() {
        let plane = ChartGeometry::euclidean();
        let f = |p: Vec2| p[0] * p[1] + 0.3;
        let g = |p: Vec2| p[0].sin() - p[1];
        let field = VectorFieldSpec::new("fg", move |p| [f(p), g(p)]);
        let th: f64 = 0.7;
        let st = GeodesicState::new(0.0, [0.4, -1.2], [th.cos(), th.sin()]);
        let a = geodesic_rhs(&plane, &field, &st, 1.0).unwrap();
        let kappa = f(st.pos) * st.vel[1] - g(st.pos) * st.vel[0];
        assert!((a[0] + kappa * st.vel[1]).abs() < 1e-14);
        assert!((a[1] - kappa * st.vel[0]).abs() < 1e-14);
    }

    #[test]
    fn meridian_has_zero_acceleration() {
        let st = GeodesicState::new(0.0, [1.0, 0.3], [1.0, 0.0]);
        let a = geodesic_rhs(&sphere(), &sphere_flat_field(), &st, 1.0).unwrap();
        assert!(a[0].abs() < 1e-14 && a[1].abs() < 1e-14);
        let lc = levi_civita_acceleration(&sphere(), &sphere_flat_field(), &st, 1.0).unwrap();
        assert!(lc[0].abs() < 1e-14 && lc[1].abs() < 1e-14);
    }

    #[test]
    fn speed_is_conserved_by_rhs() {
        // g(∇^g_γ̇ γ̇, γ̇) = 0 whenever |γ̇| = E
        let chart = sphere();
        let field = sphere_flat_field();
        for &(s, a) in &[(0.5_f64, 0.2_f64), (1.3, 2.0), (2.4, -1.1)] {
            let st = GeodesicState::new(0.0, [s, 0.0], [a.cos(), a.sin() / f64::sin(s)]);
            let lc = levi_civita_acceleration(&chart, &field, &st, 1.0).unwrap();
            assert!(chart.inner(st.pos, lc, st.vel).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn equator_great_circle() {
        let st = GeodesicState::new(0.0, [FRAC_PI_2, 0.0], [0.0, 1.0]);
        let tr = levi_civita_integrate(&sphere(), &st, &IntegratorSettings::rk4(1e-2, 0.0, 5.0)).unwrap();
        assert!(tr.states.iter().all(|s| (s.pos[0] - FRAC_PI_2).abs() < 1e-12));
    }

    #[test]
    fn sphere_loxodrome_keeps_its_angle() {
        let st = GeodesicState::new(0.0, [FRAC_PI_2, 0.0], [FRAC_PI_4.cos(), FRAC_PI_4.sin()]);
        let tr = integrate(&sphere(), &sphere_flat_field(), &st, &IntegratorSettings::rk4(1e-3, 0.0, 1.5)).unwrap();
        for s in &tr.states {
            let cos_par = s.vel[1] * s.pos[0].sin();
            assert!((cos_par - FRAC_PI_4.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_trace_is_increasing() {
        let plane = ChartGeometry::euclidean();
        let field = VectorFieldSpec::new("winding", |p| [-p[1], p[0]]);
        let st = GeodesicState::new(0.0, [0.0, 2.0], [1.0, 0.0]);
        let tr = integrate(&plane, &field, &st, &IntegratorSettings::rk4(1e-2, 0.0, -1.0)).unwrap();
        assert!(tr.states.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(tr.last().t, 0.0);
        let both = integrate_two_sided(&plane, &field, &st, &IntegratorSettings::rk4(1e-2, 0.0, 0.0), -1.0, 1.0).unwrap();
        assert!(both.states.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(both.states.len(), 201);
    }

    #[test]
    fn boundary_exit_is_recorded() {
        let st = GeodesicState::new(0.0, [FRAC_PI_2, 0.0], [1.0, 0.0]);
        let tr = integrate(&sphere(), &sphere_flat_field(), &st, &IntegratorSettings::rk4(1e-2, 0.0, 5.0)).unwrap();
        match tr.stop {
            StopReason::DomainExit { t } => {
                // meridian with unit speed hits s = π − 1e-3 at t = π/2 − 1e-3
                assert!((t - (FRAC_PI_2 - 1e-3)).abs() < 1e-8, "{t}");
            }
            other => panic!("unexpected stop {other:?}"),
        }
        let tr = integrate(&sphere(), &sphere_flat_field(), &st, &IntegratorSettings::rk45(1e-10, 1e-12, 0.0, 5.0)).unwrap();
        assert!(matches!(tr.stop, StopReason::DomainExit { .. }));
    }

    #[test]
    fn launch_outside_domain_is_an_error() {
        let st = GeodesicState::new(0.0, [-1.0, 0.0], [1.0, 0.0]);
        assert!(matches!(
            integrate(&sphere(), &sphere_flat_field(), &st, &IntegratorSettings::rk4(1e-2, 0.0, 1.0)),
            Err(GeoError::Domain { .. })
        ));
        let st = GeodesicState::new(0.0, [1.0, 0.0], [0.0, 0.0]);
        assert!(integrate(&sphere(), &sphere_flat_field(), &st, &IntegratorSettings::rk4(1e-2, 0.0, 1.0)).is_err());
    }

    #[test]
    fn max_steps_stops_cleanly() {
        let plane = ChartGeometry::euclidean();
        let mut s = IntegratorSettings::rk4(1e-2, 0.0, 1.0);
        s.max_steps = 10;
        let tr = levi_civita_integrate(&plane, &GeodesicState::new(0.0, [0.0, 0.0], [1.0, 0.0]), &s).unwrap();
        assert_eq!(tr.stop, StopReason::MaxSteps);
        assert_eq!(tr.len(), 11);
    }

    #[test]
    fn rk45_agrees_with_rk4() {
        let plane = ChartGeometry::euclidean();
        let field = VectorFieldSpec::new("winding", |p| [-p[1], p[0]]);
        let st = GeodesicState::new(0.0, [0.0, 2.0], [1.0, 0.0]);
        let a = integrate(&plane, &field, &st, &IntegratorSettings::rk4(1e-3, 0.0, 5.0)).unwrap();
        let b = integrate(&plane, &field, &st, &IntegratorSettings::rk45(1e-11, 1e-12, 0.0, 5.0)).unwrap();
        let (pa, pb) = (a.last().pos, b.last().pos);
        assert!((pa[0] - pb[0]).abs() < 1e-8 && (pa[1] - pb[1]).abs() < 1e-8);
        assert!(b.max_speed_drift() < 1e-9);
    }

    #[test]
    fn invalid_settings_rejected() {
        assert!(IntegratorSettings::rk4(0.0, 0.0, 1.0).validate().is_err());
        assert!(IntegratorSettings::rk45(-1.0, 1e-9, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn hermite_interpolation_hits_samples() {
        let plane = ChartGeometry::euclidean();
        let tr = levi_civita_integrate(&plane, &GeodesicState::new(0.0, [0.0, 0.0], [1.0, 2.0]), &IntegratorSettings::rk4(0.1, 0.0, 1.0)).unwrap();
        let s = tr.interpolate(0.55).unwrap();
        assert!((s.pos[0] - 0.55).abs() < 1e-12 && (s.pos[1] - 1.1).abs() < 1e-12);
        assert!(tr.interpolate(2.0).is_none());
    }
}
