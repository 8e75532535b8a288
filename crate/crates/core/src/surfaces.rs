//! Surfaces of revolution with their flat metric connection.
//!
//! A unit-speed profile `α(s) = (r(s), h(s))` generates
//! `M(s, φ) = (r cos φ, r sin φ, h)` with first fundamental form
//! `diag(1, r²)`. Declaring the frame `e₁ = ∂_s`, `e₂ = (1/r)∂_φ` parallel gives
//! a flat metric connection whose torsion is vectorial with
//! `V = (r'/r) e₁ = −grad(−ln r)`. Its geodesics are the loxodromes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{time_derivative, InvariantReport};
use crate::error::{GeoError, Result};
use crate::geometry::{ChartGeometry, DomainBox, OrthoFrame, Vec2, VectorFieldSpec};
use crate::integrator::Trace;
use crate::quad;

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Width of the fixed panels used for Mercator quadrature.
const MERCATOR_PANEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Pseudosphere,
    Catenoid,
    Custom,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Pseudosphere => "pseudosphere",
            SurfaceKind::Catenoid => "catenoid",
            SurfaceKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Profile curve `(r(s), h(s))` of a surface of revolution.
#[derive(Clone)]
pub struct RevolutionProfile {
    pub r: Fn1,
    pub dr: Fn1,
    pub d2r: Fn1,
    pub h: Fn1,
    pub dh: Fn1,
    pub natural: bool,
    pub s_min: f64,
    pub s_max: f64,
}

impl fmt::Debug for RevolutionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RevolutionProfile")
            .field("natural", &self.natural)
            .field("s_min", &self.s_min)
            .field("s_max", &self.s_max)
            .finish()
    }
}

impl RevolutionProfile {
    /// Largest `|r'² + h'² − 1|` and smallest `r` over `n` interior samples.
    pub fn natural_residual(&self, n: usize) -> (f64, f64) {
        let mut worst = 0.0_f64;
        let mut r_min = f64::INFINITY;
        for s in self.samples(n) {
            worst = worst.max(((self.dr)(s).powi(2) + (self.dh)(s).powi(2) - 1.0).abs());
            r_min = r_min.min((self.r)(s));
        }
        (worst, r_min)
    }

    /// `n` interior sample parameters, clipped to `[-50, 50]`.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let lo = self.s_min.max(-50.0);
        let hi = self.s_max.min(50.0);
        (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
    }

    /// Check the natural-parametrization flag and positivity of `r`.
    pub fn validate(&self) -> Result<()> {
        if !(self.s_min < self.s_max) {
            return Err(GeoError::Argument("profile domain is empty".into()));
        }
        let (res, r_min) = self.natural_residual(100);
        if !self.natural || res > 1e-8 {
            return Err(GeoError::Argument(format!(
                "profile is not in natural parametrization (|r'²+h'²−1| up to {res:e})"
            )));
        }
        if !(r_min > 0.0) {
            return Err(GeoError::Argument("profile radius must be positive".into()));
        }
        Ok(())
    }
}

/// A profile curve `u ↦ (r(u), h(u))` in an arbitrary regular parametrization.
#[derive(Clone)]
pub struct ParametricProfile {
    pub r: Fn1,
    pub h: Fn1,
    pub r_u: Fn1,
    pub h_u: Fn1,
    pub r_uu: Fn1,
    pub h_uu: Fn1,
    pub u_min: f64,
    pub u_max: f64,
    /// Parameter where arc length is zero.
    pub u_origin: f64,
}

/// Arc-length table for a [`ParametricProfile`].
struct ArcLength {
    curve: ParametricProfile,
    u_nodes: Vec<f64>,
    s_nodes: Vec<f64>,
}

impl ArcLength {
    fn speed(&self, u: f64) -> f64 {
        (self.curve.r_u)(u).hypot((self.curve.h_u)(u))
    }

    fn build(curve: ParametricProfile) -> Result<Self> {
        let nodes = 2048;
        let (a, b) = (curve.u_min, curve.u_max);
        let u_nodes: Vec<f64> = (0..=nodes).map(|i| a + (b - a) * i as f64 / nodes as f64).collect();
        let mut table = Self { curve, u_nodes, s_nodes: Vec::new() };
        let mut s = vec![0.0; table.u_nodes.len()];
        for i in 1..table.u_nodes.len() {
            let (lo, hi) = (table.u_nodes[i - 1], table.u_nodes[i]);
            s[i] = s[i - 1] + quad::integrate(&mut |u| table.speed(u), lo, hi, 1e-14, 1e-15)?;
        }
        let origin = table.curve.u_origin;
        let k = table.u_nodes.partition_point(|u| *u <= origin).clamp(1, table.u_nodes.len() - 1);
        let offset = s[k - 1] + quad::integrate(&mut |u| table.speed(u), table.u_nodes[k - 1], origin, 1e-14, 1e-15)?;
        table.s_nodes = s.into_iter().map(|x| x - offset).collect();
        Ok(table)
    }

    fn s_of_u(&self, u: f64) -> f64 {
        let k = self.u_nodes.partition_point(|x| *x <= u).clamp(1, self.u_nodes.len() - 1);
        let base = self.u_nodes[k - 1];
        self.s_nodes[k - 1] + quad::integrate(&mut |v| self.speed(v), base, u, 1e-14, 1e-15).unwrap_or(f64::NAN)
    }

    /// Invert `s(u)` by Newton iteration safeguarded with bisection.
    fn u_of_s(&self, s: f64) -> f64 {
        let n = self.s_nodes.len();
        let k = self.s_nodes.partition_point(|x| *x <= s).clamp(1, n - 1);
        let (mut lo, mut hi) = (self.u_nodes[k - 1], self.u_nodes[k]);
        let mut u = lo + (hi - lo) * (s - self.s_nodes[k - 1]) / (self.s_nodes[k] - self.s_nodes[k - 1]);
        for _ in 0..60 {
            let f = self.s_of_u(u) - s;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let mut next = u - f / self.speed(u);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - u).abs() <= 1e-15 * u.abs().max(1.0);
            u = next;
            if done || hi - lo <= 1e-15 * u.abs().max(1.0) {
                break;
            }
        }
        u
    }
}

impl ParametricProfile {
    /// Reparametrize by arc length: quadrature of `|α'(u)|`, inverted by
    /// safeguarded Newton iteration.
    pub fn into_natural(self) -> Result<RevolutionProfile> {
        let table = Arc::new(ArcLength::build(self)?);
        let s_min = table.s_nodes[0];
        let s_max = *table.s_nodes.last().unwrap();
        let t = table.clone();
        let r: Fn1 = Arc::new(move |s| (t.curve.r)(t.u_of_s(s)));
        let t = table.clone();
        let h: Fn1 = Arc::new(move |s| (t.curve.h)(t.u_of_s(s)));
        let t = table.clone();
        let dr: Fn1 = Arc::new(move |s| {
            let u = t.u_of_s(s);
            (t.curve.r_u)(u) / t.speed(u)
        });
        let t = table.clone();
        let dh: Fn1 = Arc::new(move |s| {
            let u = t.u_of_s(s);
            (t.curve.h_u)(u) / t.speed(u)
        });
        let t = table;
        let d2r: Fn1 = Arc::new(move |s| {
            let u = t.u_of_s(s);
            let (ru, hu) = ((t.curve.r_u)(u), (t.curve.h_u)(u));
            let (ruu, huu) = ((t.curve.r_uu)(u), (t.curve.h_uu)(u));
            let l = ru.hypot(hu);
            let l_u = (ru * ruu + hu * huu) / l;
            (ruu / l - ru * l_u / (l * l)) / l
        });
        Ok(RevolutionProfile { r, dr, d2r, h, dh, natural: true, s_min, s_max })
    }
}

/// A catalog surface with its chart, flat-connection field and frame.
#[derive(Clone)]
pub struct CatalogSurface {
    pub kind: SurfaceKind,
    pub profile: RevolutionProfile,
    pub chart: ChartGeometry,
    pub field: VectorFieldSpec,
    pub frame: OrthoFrame,
    /// Anchor `s₀` of the Mercator coordinate `y = ∫_{s₀}^s ds / r`.
    pub mercator_anchor: f64,
}

impl fmt::Debug for CatalogSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogSurface").field("kind", &self.kind).field("profile", &self.profile).finish()
    }
}

impl CatalogSurface {
    /// Assemble chart `diag(1, r²)`, field `V = (r'/r, 0)` with `σ = −ln r`,
    /// and frame `(∂_s, (1/r)∂_φ)` from a natural profile.
    pub fn from_profile(kind: SurfaceKind, name: &str, profile: RevolutionProfile) -> Result<Self> {
        profile.validate()?;
        let domain = DomainBox::new(profile.s_min, profile.s_max, f64::NEG_INFINITY, f64::INFINITY);
        let (r, dr) = (profile.r.clone(), profile.dr.clone());
        let metric_r = r.clone();
        let gamma_r = r.clone();
        let gamma_dr = dr.clone();
        let chart = ChartGeometry::new(name, ["s", "phi"], domain, move |p| [[1.0, 0.0], [0.0, metric_r(p[0]).powi(2)]])
            .with_christoffel(move |p| {
                let (r, dr) = (gamma_r(p[0]), gamma_dr(p[0]));
                let mut g = [[[0.0; 2]; 2]; 2];
                g[0][1][1] = -r * dr;
                g[1][0][1] = dr / r;
                g[1][1][0] = dr / r;
                g
            });
        let (fr, fdr, sr) = (r.clone(), dr.clone(), r.clone());
        let field = VectorFieldSpec::new(format!("{name}-flat"), move |p| [fdr(p[0]) / fr(p[0]), 0.0])
            .with_sigma(move |p| -sr(p[0]).ln());
        let er = r.clone();
        let frame = OrthoFrame::new(|_| [1.0, 0.0], move |p| [0.0, 1.0 / er(p[0])]);
        let mercator_anchor = if kind == SurfaceKind::Sphere {
            FRAC_PI_2
        } else {
            0.5 * (profile.s_min + profile.s_max)
        };
        Ok(Self { kind, profile, chart, field, frame, mercator_anchor })
    }

    pub fn name(&self) -> &str {
        self.chart.id()
    }

    pub fn r(&self, s: f64) -> f64 {
        (self.profile.r)(s)
    }

    /// Gaussian curvature `K = −r''/r` of the surface at parameter `s`.
    pub fn gaussian_curvature(&self, s: f64) -> f64 {
        -(self.profile.d2r)(s) / (self.profile.r)(s)
    }

    /// Chart velocity of a unit vector at angle `nu` from the meridian direction `e₁`.
    pub fn velocity_at_angle(&self, p: Vec2, nu: f64) -> Vec2 {
        self.frame.vector(p, nu.cos(), nu.sin())
    }
}

/// Unit sphere, `r = sin s`, `h = cos s`, `s ∈ (10⁻³, π − 10⁻³)`.
pub fn make_sphere() -> CatalogSurface {
    let eps = 1e-3;
    let profile = RevolutionProfile {
        r: Arc::new(f64::sin),
        dr: Arc::new(f64::cos),
        d2r: Arc::new(|s| -s.sin()),
        h: Arc::new(f64::cos),
        dh: Arc::new(|s| -s.sin()),
        natural: true,
        s_min: eps,
        s_max: PI - eps,
    };
    CatalogSurface::from_profile(SurfaceKind::Sphere, "sphere", profile).expect("sphere profile is valid")
}

/// Pseudosphere `r = e^{−s}`, `h = artanh √(1−e^{−2s}) − √(1−e^{−2s})`, `s ∈ (0, 6)`.
pub fn make_pseudosphere() -> CatalogSurface {
    let w = |s: f64| (1.0 - (-2.0 * s).exp()).max(0.0).sqrt();
    let profile = RevolutionProfile {
        r: Arc::new(|s| (-s).exp()),
        dr: Arc::new(|s| -(-s).exp()),
        d2r: Arc::new(|s| (-s).exp()),
        h: Arc::new(move |s| w(s).atanh() - w(s)),
        dh: Arc::new(w),
        natural: true,
        s_min: 0.0,
        s_max: 6.0,
    };
    CatalogSurface::from_profile(SurfaceKind::Pseudosphere, "pseudosphere", profile).expect("pseudosphere profile is valid")
}

/// Catenoid generated by `(cosh u, u)`, `u ∈ (−3, 3)`, reparametrized by arc
/// length numerically with `s = 0` at the waist.
pub fn make_catenoid() -> CatalogSurface {
    let curve = ParametricProfile {
        r: Arc::new(f64::cosh),
        h: Arc::new(|u| u),
        r_u: Arc::new(f64::sinh),
        h_u: Arc::new(|_| 1.0),
        r_uu: Arc::new(f64::cosh),
        h_uu: Arc::new(|_| 0.0),
        u_min: -3.0,
        u_max: 3.0,
        u_origin: 0.0,
    };
    let profile = curve.into_natural().expect("catenoid arc length");
    CatalogSurface::from_profile(SurfaceKind::Catenoid, "catenoid", profile).expect("catenoid profile is valid")
}

pub fn make_surface(kind: SurfaceKind) -> Result<CatalogSurface> {
    match kind {
        SurfaceKind::Sphere => Ok(make_sphere()),
        SurfaceKind::Pseudosphere => Ok(make_pseudosphere()),
        SurfaceKind::Catenoid => Ok(make_catenoid()),
        SurfaceKind::Custom => Err(GeoError::Argument("custom surfaces need an explicit profile".into())),
    }
}

/// `∫_a^b f` on fixed panels of width [`MERCATOR_PANEL`] aligned with `origin`,
/// so nearby upper limits share every full panel.
fn panel_integral(f: &dyn Fn(f64) -> f64, origin: f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let k0 = ((lo - origin) / MERCATOR_PANEL).floor() as i64;
    let mut total = 0.0;
    let mut k = k0;
    loop {
        let p0 = (origin + k as f64 * MERCATOR_PANEL).max(lo);
        let p1 = (origin + (k + 1) as f64 * MERCATOR_PANEL).min(hi);
        if p0 >= hi {
            break;
        }
        if p1 > p0 {
            total += quad::integrate(&mut |x| f(x), p0, p1, 1e-15, 1e-17)?;
        }
        k += 1;
    }
    Ok(sign * total)
}

/// Mercator coordinate `y(s) = ∫_{s₀}^s ds / r(s)`; the other coordinate is `x = φ`.
pub fn mercator_map(surface: &CatalogSurface, s: f64) -> Result<f64> {
    surface.chart.check_point([s, 0.0])?;
    let r = surface.profile.r.clone();
    let s0 = surface.mercator_anchor;
    panel_integral(&|x| 1.0 / r(x), s0, s0, s)
}

/// Image of a trace under `(s, φ) ↦ (x, y) = (φ, y(s))`.
pub fn mercator_image(surface: &CatalogSurface, trace: &Trace) -> Result<Vec<Vec2>> {
    trace.states.iter().map(|st| Ok([st.pos[1], mercator_map(surface, st.pos[0])?])).collect()
}

/// Orthogonal least-squares line through a point cloud.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    /// Unit direction of the line.
    pub direction: Vec2,
    pub slope: f64,
    pub max_residual: f64,
}

pub fn line_fit(points: &[Vec2]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(GeoError::Argument("need at least 2 points for a line fit".into()));
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = [angle.cos(), angle.sin()];
    let max_residual = points
        .iter()
        .map(|p| ((p[0] - cx) * dir[1] - (p[1] - cy) * dir[0]).abs())
        .fold(0.0, f64::max);
    Ok(LineFit { direction: dir, slope: dir[1] / dir[0], max_residual })
}

/// Report on `g(γ̇, e₂)`, the cosine of the angle between the geodesic and
/// the parallel circle; PASS if its standard deviation is below 1e-6.
pub fn loxodrome_check(surface: &CatalogSurface, trace: &Trace) -> Result<InvariantReport> {
    if (trace.energy() - 1.0).abs() > 1e-9 {
        return Err(GeoError::Argument(format!("loxodrome check expects unit speed, got E = {}", trace.energy())));
    }
    let values = trace
        .states
        .iter()
        .map(|st| surface.chart.inner(st.pos, st.vel, (surface.frame.e2)(st.pos)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantReport::new("loxodrome-angle", values).judge_std(1e-6))
}

/// Largest `|e^σ g(γ̇, ∂_φ) − g(γ̇, e₂)|` along a trace.
pub fn clairaut_identity_residual(surface: &CatalogSurface, trace: &Trace) -> Result<f64> {
    let sigma = surface.field.sigma().expect("catalog fields carry σ").clone();
    let mut worst = 0.0_f64;
    for st in &trace.states {
        let lhs = sigma(st.pos).exp() * surface.chart.inner(st.pos, st.vel, [0.0, 1.0])?;
        let rhs = surface.chart.inner(st.pos, st.vel, (surface.frame.e2)(st.pos))?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Largest `|∇_X e_i|` for `X, e_i ∈ {e₁, e₂}` at `p`, where `∇` is the
/// connection with vectorial torsion defined by the surface field. Zero for
/// the flat connection.
pub fn flat_connection_residual(surface: &CatalogSurface, p: Vec2) -> Result<f64> {
    let chart = &surface.chart;
    let v = surface.field.at(p);
    let frame = [surface.frame.e1.clone(), surface.frame.e2.clone()];
    let mut worst = 0.0_f64;
    for x_field in &frame {
        let x = x_field(p);
        for e in &frame {
            let ef = e.clone();
            let lc = chart.covariant_derivative(p, x, &move |q| ef(q))?;
            let y = e(p);
            let gxy = chart.inner(p, x, y)?;
            let gvy = chart.inner(p, v, y)?;
            let total = [lc[0] + gxy * v[0] - gvy * x[0], lc[1] + gxy * v[1] - gvy * x[1]];
            worst = worst.max(chart.norm(p, total)?);
        }
    }
    Ok(worst)
}

/// `|∂_s r / r − V_s|` with `∂_s r` by central differences: the coefficient
/// in `dσ² = (r'/r) σ¹∧σ²` against the field component.
pub fn torsion_coefficient_residual(surface: &CatalogSurface, s: f64) -> Result<f64> {
    surface.chart.check_point([s, 0.0])?;
    let h = crate::geometry::fd_step(s);
    let r = &surface.profile.r;
    let coeff = (r(s + h) - r(s - h)) / (2.0 * h) / r(s);
    Ok((coeff - surface.field.at([s, 0.0])[0]).abs())
}

/// Image of a point under the Gauss map of the surface.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussImage {
    pub normal: [f64; 3],
    /// Polar angle of the normal on the unit sphere.
    pub colatitude: f64,
    pub longitude: f64,
}

/// Gauss map `N(s, φ) = (−h' cos φ, −h' sin φ, r')`. Only supported for the
/// catenoid, the one catalog minimal surface.
pub fn gauss_map(surface: &CatalogSurface, p: Vec2) -> Result<GaussImage> {
    if surface.kind != SurfaceKind::Catenoid {
        return Err(GeoError::Unsupported(format!("Gauss-map loxodrome check is only certified for the catenoid, not {}", surface.kind)));
    }
    surface.chart.check_point(p)?;
    let (dr, dh) = ((surface.profile.dr)(p[0]), (surface.profile.dh)(p[0]));
    let (sp, cp) = p[1].sin_cos();
    let normal = [-dh * cp, -dh * sp, dr];
    let horiz = normal[0].hypot(normal[1]);
    Ok(GaussImage { normal, colatitude: horiz.atan2(normal[2]), longitude: normal[1].atan2(normal[0]) })
}

fn unwrap_angles(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let mut d = angles[i] - angles[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        angles[i] = angles[i - 1] + d;
    }
}

/// Map a catenoid trace to the unit sphere through the Gauss map and report
/// on the sine of the image curve's angle with the meridians.
pub fn gauss_loxodrome_report(surface: &CatalogSurface, trace: &Trace) -> Result<InvariantReport> {
    let images = trace.states.iter().map(|st| gauss_map(surface, st.pos)).collect::<Result<Vec<_>>>()?;
    let theta: Vec<f64> = images.iter().map(|g| g.colatitude).collect();
    let mut lon: Vec<f64> = images.iter().map(|g| g.longitude).collect();
    unwrap_angles(&mut lon);
    let t = trace.times();
    let dtheta = time_derivative(&t, &theta)?;
    let dlon = time_derivative(&t, &lon)?;
    let values = (0..t.len())
        .map(|i| {
            let a = theta[i].sin() * dlon[i];
            a / a.hypot(dtheta[i])
        })
        .collect();
    Ok(InvariantReport::new("gauss-image-angle", values).judge_std(1e-4))
}

/// Points `M(s, φ) = (r cos φ, r sin φ, h)` of a trace.
pub fn embed(surface: &CatalogSurface, trace: &Trace) -> Vec<[f64; 3]> {
    trace.states.iter().map(|st| embed_point(surface, st.pos)).collect()
}

pub fn embed_point(surface: &CatalogSurface, p: Vec2) -> [f64; 3] {
    let r = (surface.profile.r)(p[0]);
    let (sp, cp) = p[1].sin_cos();
    [r * cp, r * sp, (surface.profile.h)(p[0])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, GeodesicState, IntegratorSettings};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn catalog_profiles_are_natural() {
        for s in [make_sphere(), make_pseudosphere(), make_catenoid()] {
            let (res, rmin) = s.profile.natural_residual(100);
            assert!(res < 1e-8, "{}: {res}", s.kind);
            assert!(rmin > 0.0);
        }
    }

    #[test]
    fn pseudosphere_field_is_minus_e1() {
        let p = make_pseudosphere();
        assert!((p.r(1.0) - (-1.0_f64).exp()).abs() < 1e-15);
        let v = p.field.at([1.0, 0.3]);
        assert!((v[0] + 1.0).abs() < 1e-15 && v[1] == 0.0);
        assert!((p.chart.norm([1.0, 0.3], v).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn catenoid_matches_closed_form_profile() {
        let c = make_catenoid();
        for s in [-8.0, -1.0, 0.0, 0.5, 3.0, 9.5] {
            assert!((c.r(s) - (1.0 + s * s).sqrt()).abs() < 1e-10, "{s}");
            assert!(((c.profile.h)(s) - s.asinh()).abs() < 1e-10);
            let k = -1.0 / (1.0 + s * s).powi(2);
            assert!((c.gaussian_curvature(s) - k).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_mercator_is_log_tan() {
        let sph = make_sphere();
        assert_eq!(mercator_map(&sph, FRAC_PI_2).unwrap(), 0.0);
        for s in [0.1, 0.7, 1.2, 2.0, 3.0] {
            let y = mercator_map(&sph, s).unwrap();
            assert!((y - (s / 2.0).tan().ln()).abs() < 1e-10);
        }
        assert!(mercator_map(&sph, 0.0).is_err());
    }

    #[test]
    fn meridian_launch_keeps_zero_angle() {
        let sph = make_sphere();
        let st = GeodesicState::new(0.0, [1.0, 0.0], sph.velocity_at_angle([1.0, 0.0], 0.0));
        let tr = integrate(&sph.chart, &sph.field, &st, &IntegratorSettings::rk4(1e-3, 0.0, 1.5)).unwrap();
        let rep = loxodrome_check(&sph, &tr).unwrap();
        assert!(rep.values.iter().all(|v| v.abs() < 1e-15));
        assert!(rep.passed());
    }

    #[test]
    fn equator_embeds_as_unit_circle() {
        let sph = make_sphere();
        let st = GeodesicState::new(0.0, [FRAC_PI_2, 0.0], sph.velocity_at_angle([FRAC_PI_2, 0.0], FRAC_PI_2));
        let tr = integrate(&sph.chart, &sph.field, &st, &IntegratorSettings::rk4(1e-2, 0.0, 6.0)).unwrap();
        for p in embed(&sph, &tr) {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12 && p[2].abs() < 1e-12);
        }
    }

    #[test]
    fn meridian_embeds_as_great_semicircle() {
        let sph = make_sphere();
        let st = GeodesicState::new(0.0, [0.01, 0.4], [1.0, 0.0]);
        let tr = integrate(&sph.chart, &sph.field, &st, &IntegratorSettings::rk4(1e-2, 0.0, 3.1)).unwrap();
        for p in embed(&sph, &tr) {
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-9);
            // stays in the plane through the axis at φ = 0.4
            assert!((p[0] * 0.4_f64.sin() - p[1] * 0.4_f64.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn gauss_map_of_catenoid_waist() {
        let c = make_catenoid();
        let g = gauss_map(&c, [0.0, 0.3]).unwrap();
        assert!(g.normal[2].abs() < 1e-12);
        assert!((g.colatitude - FRAC_PI_2).abs() < 1e-12);
        let n = g.normal;
        assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() < 1e-10);
        assert!(matches!(gauss_map(&make_sphere(), [1.0, 0.0]), Err(GeoError::Unsupported(_))));
    }

    #[test]
    fn flat_connection_has_parallel_frame() {
        for surf in [make_sphere(), make_pseudosphere(), make_catenoid()] {
            for s in surf.profile.samples(7) {
                assert!(flat_connection_residual(&surf, [s, 0.2]).unwrap() < 1e-6, "{} at {s}", surf.kind);
                assert!(torsion_coefficient_residual(&surf, s).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn line_fit_of_collinear_points() {
        let pts: Vec<Vec2> = (0..20).map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect();
        let f = line_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.max_residual < 1e-12);
    }

    #[test]
    fn loxodrome_needs_unit_speed() {
        let sph = make_sphere();
        let st = GeodesicState::new(0.0, [1.0, 0.0], [2.0, 0.0]);
        let tr = integrate(&sph.chart, &sph.field, &st, &IntegratorSettings::rk4(1e-2, 0.0, 0.2)).unwrap();
        assert!(loxodrome_check(&sph, &tr).is_err());
        let st = GeodesicState::new(0.0, [1.0, 0.0], sph.velocity_at_angle([1.0, 0.0], FRAC_PI_4));
        let tr = integrate(&sph.chart, &sph.field, &st, &IntegratorSettings::rk4(1e-2, 0.0, 0.2)).unwrap();
        assert!(loxodrome_check(&sph, &tr).unwrap().passed());
        assert!(clairaut_identity_residual(&sph, &tr).unwrap() < 1e-14);
    }
}
