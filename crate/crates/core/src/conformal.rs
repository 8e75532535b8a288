//! Conformal change of metric for gradient fields.
//!
//! For `V = −grad σ`, the geodesics of the vectorial-torsion connection are,
//! as point sets, the Levi-Civita geodesics of `g̃ = e^{2σ} g`; the time
//! change `τ` obeys `τ̈ + τ̇ σ̇ = 0`, integrated once to `τ̇ = e^{−σ}`.

use crate::error::{GeoError, Result};
use crate::geometry::{
    partials, ChartGeometry, DerivativeMode, ScalarField, Vec2, VectorFieldSpec,
};
use crate::integrator::{
    integrate, levi_civita_integrate, Diagnostics, GeodesicState, IntegratorSettings, Method, StopReason, Trace,
    TraceMeta,
};

/// Number of arc-length samples used by [`compare_point_sets`].
pub const RESAMPLE_POINTS: usize = 512;

/// `e^{2σ} g` on the same coordinate domain, Christoffels by finite differences.
pub fn conformal_metric(chart: &ChartGeometry, sigma: ScalarField) -> ChartGeometry {
    let base = chart.clone();
    let coords = chart.coords().clone();
    ChartGeometry::new(
        format!("{}~conformal", chart.id()),
        [coords[0].as_str(), coords[1].as_str()],
        *chart.domain(),
        move |p| {
            let g = base.metric_unchecked(p);
            let w = (2.0 * sigma(p)).exp();
            [[w * g[0][0], w * g[0][1]], [w * g[1][0], w * g[1][1]]]
        },
    )
    .with_mode(DerivativeMode::FiniteDifference)
}

/// A base chart together with its conformal rescaling.
#[derive(Clone)]
pub struct ConformalPair {
    pub base: ChartGeometry,
    pub sigma: ScalarField,
    pub derived: ChartGeometry,
}

impl ConformalPair {
    pub fn new(base: ChartGeometry, sigma: ScalarField) -> Self {
        let derived = conformal_metric(&base, sigma.clone());
        Self { base, sigma, derived }
    }

    /// Largest violation of
    /// `Γ̃^k_ij = Γ^k_ij + δ^k_j ∂_iσ + δ^k_i ∂_jσ − g_ij (grad σ)^k`
    /// over the sample points, both sides by finite differences.
    pub fn christoffel_identity_residual(&self, points: &[Vec2]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for &p in points {
            let gt = self.derived.christoffel_fd(p)?;
            let g0 = self.base.christoffel(p)?;
            let g = self.base.metric(p)?;
            let ds = partials(&*self.sigma, p);
            let grad = self.base.grad(p, &*self.sigma)?;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let dk_j = if k == j { 1.0 } else { 0.0 };
                        let dk_i = if k == i { 1.0 } else { 0.0 };
                        let rhs = g0[k][i][j] + dk_j * ds[i] + dk_i * ds[j] - g[i][j] * grad[k];
                        worst = worst.max((gt[k][i][j] - rhs).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Rotate a tangent vector by `angle` with respect to the metric at `p`.
pub fn rotate_vector(chart: &ChartGeometry, p: Vec2, x: Vec2, angle: f64) -> Result<Vec2> {
    let g = chart.metric(p)?;
    let lowered = [g[0][0] * x[0] + g[0][1] * x[1], g[1][0] * x[0] + g[1][1] * x[1]];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let perp = [-lowered[1] / det.sqrt(), lowered[0] / det.sqrt()];
    let (s, c) = angle.sin_cos();
    Ok([c * x[0] + s * perp[0], c * x[1] + s * perp[1]])
}

fn sigma_of(field: &VectorFieldSpec) -> Result<ScalarField> {
    field
        .sigma()
        .cloned()
        .ok_or_else(|| GeoError::Argument(format!("field `{}` is not declared as a gradient −grad σ", field.id())))
}

fn rk4_scalar(f: &dyn Fn(f64) -> Option<f64>, tau: f64, h: f64) -> Option<f64> {
    let k1 = f(tau)?;
    let k2 = f(tau + 0.5 * h * k1)?;
    let k3 = f(tau + 0.5 * h * k2)?;
    let k4 = f(tau + h * k3)?;
    Some(tau + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Reparametrize a geodesic of the connection defined by `V = −grad σ` so
/// that it becomes a Levi-Civita geodesic of `e^{2σ} g`.
///
/// Solves `dτ/dt = e^{−σ(γ(τ))}` with `τ(0) = ` the trace's launch time,
/// interpolating the stored trace, and samples `γ*(t) = γ(τ(t))` with step `dt`
/// in both directions until `τ` leaves the stored time range.
pub fn reparametrize(chart: &ChartGeometry, field: &VectorFieldSpec, trace: &Trace, dt: f64) -> Result<Trace> {
    if trace.meta.field_id != field.id() || trace.meta.chart_id != chart.id() {
        return Err(GeoError::Argument(format!(
            "trace belongs to ({}, {}), not ({}, {})",
            trace.meta.chart_id,
            trace.meta.field_id,
            chart.id(),
            field.id()
        )));
    }
    if !(dt > 0.0) {
        return Err(GeoError::Argument("dt must be positive".into()));
    }
    let sigma = sigma_of(field)?;
    let rate = |tau: f64| trace.interpolate(tau).map(|s| (-sigma(s.pos)).exp());
    let tau0 = trace.meta.anchor_t;
    let (tmin, tmax) = (trace.first().t, trace.last().t);

    let sweep = |dir: f64| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut tau = tau0;
        let mut k = 0usize;
        while let Some(next) = rk4_scalar(&rate, tau, dir * dt) {
            if next < tmin || next > tmax {
                break;
            }
            k += 1;
            tau = next;
            out.push((dir * dt * k as f64, tau));
        }
        out
    };
    let mut samples: Vec<(f64, f64)> = sweep(-1.0).into_iter().rev().collect();
    samples.push((0.0, tau0));
    samples.extend(sweep(1.0));

    let states = samples
        .iter()
        .map(|&(t, tau)| {
            let s = trace.interpolate(tau).expect("tau within range");
            let rate = (-sigma(s.pos)).exp();
            GeodesicState { t, pos: s.pos, vel: [rate * s.vel[0], rate * s.vel[1]] }
        })
        .collect::<Vec<_>>();
    let pair = ConformalPair::new(chart.clone(), sigma.clone());
    let energy = pair.derived.norm(states[0].pos, states[0].vel)?;
    let diagnostics = states
        .iter()
        .map(|s| {
            Ok(Diagnostics { speed: pair.derived.norm(s.pos, s.vel)?, kappa: 0.0, g_v: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_t = states[0].t;
    let last_t = states.last().map_or(0.0, |s| s.t);
    Ok(Trace {
        meta: TraceMeta {
            chart_id: pair.derived.id().to_string(),
            field_id: "zero".into(),
            energy,
            settings: IntegratorSettings::rk4(dt, first_t, last_t),
            anchor_t: 0.0,
        },
        states,
        diagnostics,
        stop: StopReason::ReachedEnd,
        stop_backward: None,
    })
}

/// Largest residual of the Levi-Civita geodesic equation of `chart` along a
/// uniformly sampled trace, using central differences of the velocity.
pub fn geodesic_residual(chart: &ChartGeometry, trace: &Trace) -> Result<f64> {
    let s = &trace.states;
    let mut worst = 0.0_f64;
    for w in s.windows(3) {
        let h1 = w[1].t - w[0].t;
        let h2 = w[2].t - w[1].t;
        let mut acc = [0.0; 2];
        for (i, a) in acc.iter_mut().enumerate() {
            // three-point derivative on a possibly uneven grid
            *a = (w[2].vel[i] - w[1].vel[i]) * h1 / (h2 * (h1 + h2)) + (w[1].vel[i] - w[0].vel[i]) * h2 / (h1 * (h1 + h2));
        }
        let gamma = chart.christoffel(w[1].pos)?;
        let c = crate::geometry::contract_christoffel(&gamma, w[1].vel, w[1].vel);
        worst = worst.max((acc[0] + c[0]).abs()).max((acc[1] + c[1]).abs());
    }
    Ok(worst)
}

/// Resample a polyline to `n` points equally spaced in chordal arc length.
pub fn resample_by_arc_length(points: &[Vec2], n: usize) -> Result<Vec<Vec2>> {
    if points.len() < 2 {
        return Err(GeoError::Argument("need at least 2 points to resample".into()));
    }
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    if total == 0.0 {
        return Ok(vec![points[0]; n]);
    }
    let mut out = Vec::with_capacity(n);
    let mut k = 1;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while k < cum.len() - 1 && cum[k] < target {
            k += 1;
        }
        let seg = cum[k] - cum[k - 1];
        let a = if seg > 0.0 { ((target - cum[k - 1]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        let (p, q) = (points[k - 1], points[k]);
        out.push([p[0] + a * (q[0] - p[0]), p[1] + a * (q[1] - p[1])]);
    }
    Ok(out)
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn directed_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter()
        .map(|&p| {
            b.windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two curves after resampling each to
/// [`RESAMPLE_POINTS`] points by chordal arc length. Distances are measured
/// from the samples of one curve to the resampled polyline of the other.
pub fn compare_point_sets(a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    let ra = resample_by_arc_length(a, RESAMPLE_POINTS)?;
    let rb = resample_by_arc_length(b, RESAMPLE_POINTS)?;
    Ok(directed_hausdorff(&ra, &rb).max(directed_hausdorff(&rb, &ra)))
}

pub fn compare_traces(a: &Trace, b: &Trace) -> Result<f64> {
    if a.meta.chart_id.split('~').next() != b.meta.chart_id.split('~').next() {
        return Err(GeoError::Argument("traces live on different charts".into()));
    }
    let pa: Vec<Vec2> = a.states.iter().map(|s| s.pos).collect();
    let pb: Vec<Vec2> = b.states.iter().map(|s| s.pos).collect();
    compare_point_sets(&pa, &pb)
}

/// `∫ e^{σ(γ)} ‖γ̇‖_g dt`, the `g̃`-length of a trace (Simpson on uniform
/// grids, trapezoid otherwise).
pub fn conformal_length(chart: &ChartGeometry, sigma: &dyn Fn(Vec2) -> f64, trace: &Trace) -> Result<f64> {
    let f = trace
        .states
        .iter()
        .map(|s| Ok(sigma(s.pos).exp() * chart.norm(s.pos, s.vel)?))
        .collect::<Result<Vec<_>>>()?;
    let t = trace.times();
    let n = t.len();
    if n < 2 {
        return Ok(0.0);
    }
    let h = t[1] - t[0];
    let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h.abs());
    if uniform && n >= 3 {
        let odd = (n - 1) % 2 == 1;
        let m = if odd { n - 1 } else { n };
        let mut acc = f[0] + f[m - 1];
        for (i, fi) in f.iter().enumerate().take(m - 1).skip(1) {
            acc += if i % 2 == 1 { 4.0 * fi } else { 2.0 * fi };
        }
        let mut total = acc * h / 3.0;
        if odd {
            total += 0.5 * (t[n - 1] - t[n - 2]) * (f[n - 1] + f[n - 2]);
        }
        Ok(total)
    } else {
        Ok(t.windows(2).zip(f.windows(2)).map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1])).sum())
    }
}

/// Result of launching a torsion geodesic and the `g̃`-geodesic in the same
/// direction and comparing their point sets.
#[derive(Debug, Clone)]
pub struct Equivalence {
    pub torsion: Trace,
    pub levi_civita: Trace,
    pub conformal_length: f64,
    pub hausdorff: f64,
}

/// Integrate the torsion geodesic from `initial` over `settings`, then the
/// Levi-Civita geodesic of `e^{2σ} g` from the same point, with the initial
/// velocity rotated by `angle_offset` (0 for the real comparison) and
/// rescaled to unit `g̃`-speed, over the same `g̃`-length.
pub fn conformal_equivalence(
    chart: &ChartGeometry,
    field: &VectorFieldSpec,
    initial: &GeodesicState,
    settings: &IntegratorSettings,
    angle_offset: f64,
) -> Result<Equivalence> {
    let sigma = sigma_of(field)?;
    let pair = ConformalPair::new(chart.clone(), sigma.clone());
    let torsion = integrate(chart, field, initial, settings)?;
    let length = conformal_length(chart, &*sigma, &torsion)?;
    let dir = rotate_vector(chart, initial.pos, initial.vel, angle_offset)?;
    let speed = pair.derived.norm(initial.pos, dir)?;
    let start = GeodesicState { t: 0.0, pos: initial.pos, vel: [dir[0] / speed, dir[1] / speed] };
    let mut lc_settings = settings.with_span(0.0, length);
    if let Method::Rk45 { .. } = lc_settings.method {
        lc_settings.max_steps = settings.max_steps;
    }
    let levi_civita = levi_civita_integrate(&pair.derived, &start, &lc_settings)?;
    let hausdorff = compare_traces(&torsion, &levi_civita)?;
    Ok(Equivalence { torsion, levi_civita, conformal_length: length, hausdorff })
}
