//! Two-dimensional coordinate charts with a Riemannian metric.
//!
//! A [`ChartGeometry`] carries the metric coefficients `g_ij(u, v)` on an open
//! coordinate box, and optionally analytic Christoffel symbols. Everything
//! else (Levi-Civita covariant derivatives, gradients, inner products) is
//! derived from those two evaluators. Vector fields that define a connection
//! with vectorial torsion are described by [`VectorFieldSpec`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];
/// Christoffel symbols of the second kind, indexed `[k][i][j]` for `Γ^k_ij`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type MetricFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;
pub type ChristoffelFn = Arc<dyn Fn(Vec2) -> Christoffel + Send + Sync>;

/// Central-difference step for a coordinate of magnitude `x`.
#[inline]
pub fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Partial derivatives `(∂_u f, ∂_v f)` by central differences.
pub fn partials(f: &dyn Fn(Vec2) -> f64, p: Vec2) -> Vec2 {
    let hu = fd_step(p[0]);
    let hv = fd_step(p[1]);
    [
        (f([p[0] + hu, p[1]]) - f([p[0] - hu, p[1]])) / (2.0 * hu),
        (f([p[0], p[1] + hv]) - f([p[0], p[1] - hv])) / (2.0 * hv),
    ]
}

/// Jacobian `J[k][i] = ∂_i Y^k` of a vector field by central differences.
pub fn vector_partials(f: &dyn Fn(Vec2) -> Vec2, p: Vec2) -> Mat2 {
    let hu = fd_step(p[0]);
    let hv = fd_step(p[1]);
    let up = f([p[0] + hu, p[1]]);
    let um = f([p[0] - hu, p[1]]);
    let vp = f([p[0], p[1] + hv]);
    let vm = f([p[0], p[1] - hv]);
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        jac[k][0] = (up[k] - um[k]) / (2.0 * hu);
        jac[k][1] = (vp[k] - vm[k]) / (2.0 * hv);
    }
    jac
}

pub(crate) fn quad_form(g: &Mat2, x: Vec2, y: Vec2) -> f64 {
    g[0][0] * x[0] * y[0] + g[0][1] * x[0] * y[1] + g[1][0] * x[1] * y[0] + g[1][1] * x[1] * y[1]
}

pub(crate) fn mat_inverse(g: &Mat2) -> Option<Mat2> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !det.is_finite() || det == 0.0 {
        return None;
    }
    Some([[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]])
}

/// Open coordinate box `(u_min, u_max) × (v_min, v_max)`; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl DomainBox {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Self { u_min, u_max, v_min, v_max }
    }

    pub fn unbounded() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p[0] > self.u_min && p[0] < self.u_max && p[1] > self.v_min && p[1] < self.v_max
    }

    /// Finite sub-box used for sampling checks: the domain intersected with
    /// `[-limit, limit]²` and shrunk by 2% on each side.
    pub fn sampling_box(&self, limit: f64) -> DomainBox {
        let clip = |lo: f64, hi: f64| {
            let lo = lo.max(-limit);
            let hi = hi.min(limit);
            let pad = 0.02 * (hi - lo);
            (lo + pad, hi - pad)
        };
        let (u_min, u_max) = clip(self.u_min, self.u_max);
        let (v_min, v_max) = clip(self.v_min, self.v_max);
        DomainBox { u_min, u_max, v_min, v_max }
    }

    /// `n × n` grid of interior points of [`Self::sampling_box`].
    pub fn sample_grid(&self, n: usize, limit: f64) -> Vec<Vec2> {
        let b = self.sampling_box(limit);
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let a = (i as f64 + 0.5) / n as f64;
                let c = (j as f64 + 0.5) / n as f64;
                pts.push([b.u_min + a * (b.u_max - b.u_min), b.v_min + c * (b.v_max - b.v_min)]);
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// A 2D coordinate chart with a metric.
#[derive(Clone)]
pub struct ChartGeometry {
    id: String,
    coords: [String; 2],
    domain: DomainBox,
    metric: MetricFn,
    christoffel: Option<ChristoffelFn>,
    mode: DerivativeMode,
}

impl fmt::Debug for ChartGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartGeometry")
            .field("id", &self.id)
            .field("coords", &self.coords)
            .field("domain", &self.domain)
            .field("mode", &self.mode)
            .finish()
    }
}

impl ChartGeometry {
    /// Chart whose Christoffel symbols are computed by finite differences.
    pub fn new(
        id: impl Into<String>,
        coords: [&str; 2],
        domain: DomainBox,
        metric: impl Fn(Vec2) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            coords: [coords[0].to_string(), coords[1].to_string()],
            domain,
            metric: Arc::new(metric),
            christoffel: None,
            mode: DerivativeMode::FiniteDifference,
        }
    }

    /// Attach analytic Christoffel symbols and switch to analytic mode.
    pub fn with_christoffel(mut self, gamma: impl Fn(Vec2) -> Christoffel + Send + Sync + 'static) -> Self {
        self.christoffel = Some(Arc::new(gamma));
        self.mode = DerivativeMode::Analytic;
        self
    }

    /// Force a derivative mode. Analytic mode without an analytic evaluator
    /// silently falls back to finite differences.
    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// The euclidean plane `g = diag(1, 1)` in coordinates `(x, y)`.
    pub fn euclidean() -> Self {
        Self::euclidean_on("plane", DomainBox::unbounded())
    }

    pub fn euclidean_on(id: &str, domain: DomainBox) -> Self {
        Self::new(id, ["x", "y"], domain, |_| [[1.0, 0.0], [0.0, 1.0]]).with_christoffel(|_| [[[0.0; 2]; 2]; 2])
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn coords(&self) -> &[String; 2] {
        &self.coords
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.christoffel.is_some()
    }

    pub(crate) fn metric_fn(&self) -> MetricFn {
        self.metric.clone()
    }

    pub fn check_point(&self, p: Vec2) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(GeoError::Domain { chart: self.id.clone(), u: p[0], v: p[1] })
        }
    }

    /// Metric coefficients without domain or definiteness checks.
    pub fn metric_unchecked(&self, p: Vec2) -> Mat2 {
        (self.metric)(p)
    }

    /// Metric coefficients at an interior point; fails on non-SPD values.
    pub fn metric(&self, p: Vec2) -> Result<Mat2> {
        self.check_point(p)?;
        let g = (self.metric)(p);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(g[0][0] > 0.0 && det > 0.0) || !det.is_finite() {
            return Err(GeoError::Degenerate(format!(
                "metric of `{}` is not positive definite at ({}, {})",
                self.id, p[0], p[1]
            )));
        }
        Ok(g)
    }

    pub fn inverse_metric(&self, p: Vec2) -> Result<Mat2> {
        let g = self.metric(p)?;
        mat_inverse(&g).ok_or_else(|| GeoError::Degenerate(format!("singular metric at ({}, {})", p[0], p[1])))
    }

    /// Christoffel symbols using the chart's derivative mode.
    pub fn christoffel(&self, p: Vec2) -> Result<Christoffel> {
        match (&self.christoffel, self.mode) {
            (Some(gamma), DerivativeMode::Analytic) => {
                self.metric(p)?;
                Ok(gamma(p))
            }
            _ => self.christoffel_fd(p),
        }
    }

    /// Christoffel symbols from central differences of the metric.
    pub fn christoffel_fd(&self, p: Vec2) -> Result<Christoffel> {
        let ginv = self.inverse_metric(p)?;
        // dg[l][i][j] = ∂_l g_ij
        let mut dg = [[[0.0; 2]; 2]; 2];
        for l in 0..2 {
            let h = fd_step(p[l]);
            let mut pp = p;
            let mut pm = p;
            pp[l] += h;
            pm[l] -= h;
            let gp = (self.metric)(pp);
            let gm = (self.metric)(pm);
            for i in 0..2 {
                for j in 0..2 {
                    dg[l][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                }
            }
        }
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for l in 0..2 {
                        acc += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    }

    pub fn inner(&self, p: Vec2, x: Vec2, y: Vec2) -> Result<f64> {
        let g = self.metric(p)?;
        Ok(quad_form(&g, x, y))
    }

    pub fn norm(&self, p: Vec2, x: Vec2) -> Result<f64> {
        Ok(self.inner(p, x, x)?.sqrt())
    }

    /// Metric gradient of a scalar function, `g(grad f, X) = df(X)`.
    pub fn grad(&self, p: Vec2, scalar: &dyn Fn(Vec2) -> f64) -> Result<Vec2> {
        let ginv = self.inverse_metric(p)?;
        let d = partials(scalar, p);
        Ok([ginv[0][0] * d[0] + ginv[0][1] * d[1], ginv[1][0] * d[0] + ginv[1][1] * d[1]])
    }

    /// Levi-Civita derivative `∇^g_X Y` of a vector field `Y` at `p`.
    pub fn covariant_derivative(&self, p: Vec2, x: Vec2, field: &dyn Fn(Vec2) -> Vec2) -> Result<Vec2> {
        let gamma = self.christoffel(p)?;
        let y = field(p);
        let jac = vector_partials(field, p);
        let mut out = [0.0; 2];
        for k in 0..2 {
            let mut acc = jac[k][0] * x[0] + jac[k][1] * x[1];
            for i in 0..2 {
                for j in 0..2 {
                    acc += gamma[k][i][j] * x[i] * y[j];
                }
            }
            out[k] = acc;
        }
        Ok(out)
    }
}

/// Contract `Γ^k_ij X^i Y^j`.
pub fn contract_christoffel(gamma: &Christoffel, x: Vec2, y: Vec2) -> Vec2 {
    let mut out = [0.0; 2];
    for (k, gk) in gamma.iter().enumerate() {
        out[k] = gk[0][0] * x[0] * y[0] + gk[0][1] * x[0] * y[1] + gk[1][0] * x[1] * y[0] + gk[1][1] * x[1] * y[1];
    }
    out
}

/// An orthonormal frame `(e₁, e₂)` given in chart components.
#[derive(Clone)]
pub struct OrthoFrame {
    pub e1: VectorField,
    pub e2: VectorField,
}

impl OrthoFrame {
    pub fn new(
        e1: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
        e2: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        Self { e1: Arc::new(e1), e2: Arc::new(e2) }
    }

    /// Largest `|g(e_i, e_j) − δ_ij|` at `p`.
    pub fn orthonormality_residual(&self, chart: &ChartGeometry, p: Vec2) -> Result<f64> {
        let e = [(self.e1)(p), (self.e2)(p)];
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((chart.inner(p, e[i], e[j])? - delta).abs());
            }
        }
        Ok(worst)
    }

    /// Frame components `(g(X, e₁), g(X, e₂))` of a chart vector.
    pub fn components(&self, chart: &ChartGeometry, p: Vec2, x: Vec2) -> Result<Vec2> {
        Ok([chart.inner(p, x, (self.e1)(p))?, chart.inner(p, x, (self.e2)(p))?])
    }

    /// Chart vector `a e₁ + b e₂`.
    pub fn vector(&self, p: Vec2, a: f64, b: f64) -> Vec2 {
        let e1 = (self.e1)(p);
        let e2 = (self.e2)(p);
        [a * e1[0] + b * e2[0], a * e1[1] + b * e2[1]]
    }
}

/// The vector field `V` defining `∇_X Y = ∇^g_X Y + g(X,Y)V − g(V,Y)X`.
#[derive(Clone)]
pub struct VectorFieldSpec {
    id: String,
    components: VectorField,
    sigma: Option<ScalarField>,
    plane_potential: Option<ScalarField>,
    killing: bool,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("id", &self.id)
            .field("sigma", &self.sigma.is_some())
            .field("plane_potential", &self.plane_potential.is_some())
            .field("killing", &self.killing)
            .finish()
    }
}

impl VectorFieldSpec {
    pub fn new(id: impl Into<String>, components: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> Self {
        Self {
            id: id.into(),
            components: Arc::new(components),
            sigma: None,
            plane_potential: None,
            killing: false,
        }
    }

    /// `V = 0`: the connection is Levi-Civita. The zero field is Killing and
    /// the gradient of any constant.
    pub fn zero() -> Self {
        Self::new("zero", |_| [0.0, 0.0]).with_sigma(|_| 0.0).with_killing(true)
    }

    /// `V = −grad σ`, with the gradient evaluated by finite differences.
    pub fn from_sigma(id: impl Into<String>, chart: &ChartGeometry, sigma: ScalarField) -> Self {
        let metric = chart.metric_fn();
        let s = sigma.clone();
        let comps = move |p: Vec2| {
            let g = metric(p);
            let d = partials(&*s, p);
            match mat_inverse(&g) {
                Some(gi) => [
                    -(gi[0][0] * d[0] + gi[0][1] * d[1]),
                    -(gi[1][0] * d[0] + gi[1][1] * d[1]),
                ],
                None => [f64::NAN, f64::NAN],
            }
        };
        let mut spec = Self::new(id, comps);
        spec.sigma = Some(sigma);
        spec
    }

    pub fn with_sigma(mut self, sigma: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.sigma = Some(Arc::new(sigma));
        self
    }

    pub fn with_plane_potential(mut self, p: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> Self {
        self.plane_potential = Some(Arc::new(p));
        self
    }

    pub fn with_killing(mut self, killing: bool) -> Self {
        self.killing = killing;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    #[inline]
    pub fn at(&self, p: Vec2) -> Vec2 {
        (self.components)(p)
    }

    pub fn components_fn(&self) -> VectorField {
        self.components.clone()
    }

    pub fn sigma(&self) -> Option<&ScalarField> {
        self.sigma.as_ref()
    }

    pub fn plane_potential(&self) -> Option<&ScalarField> {
        self.plane_potential.as_ref()
    }

    pub fn is_killing(&self) -> bool {
        self.killing
    }

    /// Max of `|V + grad σ|_g` over the sample points.
    pub fn gradient_residual(&self, chart: &ChartGeometry, points: &[Vec2]) -> Result<f64> {
        let sigma = self
            .sigma
            .as_ref()
            .ok_or_else(|| GeoError::Argument(format!("field `{}` has no potential σ", self.id)))?;
        let mut worst = 0.0_f64;
        for &p in points {
            let gs = chart.grad(p, &**sigma)?;
            let v = self.at(p);
            let diff = [v[0] + gs[0], v[1] + gs[1]];
            worst = worst.max(chart.norm(p, diff)?);
        }
        Ok(worst)
    }

    /// Max of `|(V_u, V_v) − (∂_v p, −∂_u p)|` over the sample points.
    pub fn plane_potential_residual(&self, points: &[Vec2]) -> Result<f64> {
        let pot = self
            .plane_potential
            .as_ref()
            .ok_or_else(|| GeoError::Argument(format!("field `{}` has no flat potential p", self.id)))?;
        let mut worst = 0.0_f64;
        for &p in points {
            let d = partials(&**pot, p);
            let v = self.at(p);
            worst = worst.max((v[0] - d[1]).abs()).max((v[1] + d[0]).abs());
        }
        Ok(worst)
    }

    /// Max of `|g(∇_X V, Y) + g(∇_Y V, X)|` over coordinate basis vectors.
    pub fn killing_residual(&self, chart: &ChartGeometry, points: &[Vec2]) -> Result<f64> {
        let comps = self.components.clone();
        let field = move |q: Vec2| comps(q);
        let mut worst = 0.0_f64;
        for &p in points {
            let basis = [[1.0, 0.0], [0.0, 1.0]];
            let nabla = [
                chart.covariant_derivative(p, basis[0], &field)?,
                chart.covariant_derivative(p, basis[1], &field)?,
            ];
            for i in 0..2 {
                for j in i..2 {
                    let k = chart.inner(p, nabla[i], basis[j])? + chart.inner(p, nabla[j], basis[i])?;
                    worst = worst.max(k.abs());
                }
            }
        }
        Ok(worst)
    }

    /// Verify every declared relation (σ, p, Killing) on the sample points.
    pub fn validate(&self, chart: &ChartGeometry, points: &[Vec2]) -> Result<()> {
        if self.sigma.is_some() {
            let r = self.gradient_residual(chart, points)?;
            if r > 1e-8 {
                return Err(GeoError::Argument(format!("field `{}`: V + grad σ = {r:e} ≠ 0", self.id)));
            }
        }
        if self.plane_potential.is_some() {
            let r = self.plane_potential_residual(points)?;
            if r > 1e-8 {
                return Err(GeoError::Argument(format!(
                    "field `{}`: V differs from (∂_y p, −∂_x p) by {r:e}",
                    self.id
                )));
            }
        }
        if self.killing {
            let r = self.killing_residual(chart, points)?;
            if r > 1e-6 {
                return Err(GeoError::Argument(format!("field `{}` is flagged Killing but residual is {r:e}", self.id)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sphere_chart(analytic: bool) -> ChartGeometry {
        let c = ChartGeometry::new(
            "sphere",
            ["s", "phi"],
            DomainBox::new(1e-3, std::f64::consts::PI - 1e-3, f64::NEG_INFINITY, f64::INFINITY),
            |p| [[1.0, 0.0], [0.0, p[0].sin().powi(2)]],
        );
        if analytic {
            c.with_christoffel(|p| {
                let (s, c) = p[0].sin_cos();
                let mut g = [[[0.0; 2]; 2]; 2];
                g[0][1][1] = -s * c;
                g[1][0][1] = c / s;
                g[1][1][0] = c / s;
                g
            })
        } else {
            c
        }
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let c = ChartGeometry::euclidean();
        let g = c.christoffel_fd([3.0, -7.0]).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(g[k][i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn sphere_christoffels_match_closed_form() {
        let c = sphere_chart(false);
        let s = 0.8;
        let g = c.christoffel([s, 0.3]).unwrap();
        assert_abs_diff_eq!(g[0][1][1], -s.sin() * s.cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(g[1][0][1], s.cos() / s.sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(g[1][1][0], s.cos() / s.sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(g[0][0][0], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn analytic_and_fd_agree_on_grid() {
        let c = sphere_chart(true);
        for p in c.domain().sample_grid(20, 10.0) {
            let a = c.christoffel(p).unwrap();
            let f = c.christoffel_fd(p).unwrap();
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((a[k][i][j] - f[k][i][j]).abs() < 1e-6, "{p:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_is_an_error() {
        let c = sphere_chart(true);
        assert!(matches!(c.christoffel([0.0, 1.0]), Err(GeoError::Domain { .. })));
        assert!(matches!(c.metric([4.0, 1.0]), Err(GeoError::Domain { .. })));
    }

    #[test]
    fn singular_metric_is_degenerate() {
        let c = ChartGeometry::new("bad", ["u", "v"], DomainBox::unbounded(), |p| [[1.0, 0.0], [0.0, p[0]]]);
        assert!(matches!(c.metric([-1.0, 0.0]), Err(GeoError::Degenerate(_))));
        assert!(matches!(c.christoffel([0.0, 0.0]), Err(GeoError::Degenerate(_))));
    }

    #[test]
    fn gradient_examples() {
        let plane = ChartGeometry::euclidean();
        let g = plane.grad([1.5, -2.0], &|_| 4.0).unwrap();
        assert_eq!(g, [0.0, 0.0]);
        let g = plane.grad([1.5, -2.0], &|p| -(p[0] * p[0] + p[1] * p[1]) / 2.0).unwrap();
        assert_abs_diff_eq!(g[0], -1.5, epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], 2.0, epsilon = 1e-8);

        // σ = −ln r on the sphere: grad σ = (−r'/r, 0)
        let c = sphere_chart(true);
        let s = 1.1;
        let g = c.grad([s, 0.0], &|p| -p[0].sin().ln()).unwrap();
        assert_abs_diff_eq!(g[0], -s.cos() / s.sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn inner_and_norm() {
        let c = ChartGeometry::new("rev", ["s", "phi"], DomainBox::unbounded(), |_| [[1.0, 0.0], [0.0, 4.0]]);
        assert_eq!(c.inner([0.0, 0.0], [0.0, 1.0], [0.0, 1.0]).unwrap(), 4.0);
        let frame = OrthoFrame::new(|_| [1.0, 0.0], |_| [0.0, 0.5]);
        assert_eq!(c.inner([0.0, 0.0], (frame.e1)([0.0, 0.0]), (frame.e2)([0.0, 0.0])).unwrap(), 0.0);
        assert!(frame.orthonormality_residual(&c, [0.0, 0.0]).unwrap() < 1e-12);
        assert_eq!(c.norm([0.0, 0.0], [-3.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn killing_check_distinguishes_rotation_from_shear() {
        let plane = ChartGeometry::euclidean();
        let pts = plane.domain().sample_grid(5, 3.0);
        let winding = VectorFieldSpec::new("winding", |p| [-p[1], p[0]]).with_killing(true);
        assert!(winding.killing_residual(&plane, &pts).unwrap() < 1e-6);
        winding.validate(&plane, &pts).unwrap();
        let shear = VectorFieldSpec::new("shear", |p| [p[1], 0.0]).with_killing(true);
        assert!(shear.validate(&plane, &pts).is_err());
    }

    #[test]
    fn declared_potentials_are_checked() {
        let plane = ChartGeometry::euclidean();
        let pts = plane.domain().sample_grid(6, 3.0);
        let radial = VectorFieldSpec::new("radial", |p| [p[0], p[1]]).with_sigma(|p| -(p[0] * p[0] + p[1] * p[1]) / 2.0);
        radial.validate(&plane, &pts).unwrap();
        let wrong = VectorFieldSpec::new("wrong", |p| [p[0], p[1]]).with_sigma(|p| (p[0] * p[0] + p[1] * p[1]) / 2.0);
        assert!(wrong.validate(&plane, &pts).is_err());
        let shear = VectorFieldSpec::new("shear", |p| [p[1], 0.0]).with_plane_potential(|p| p[1] * p[1] / 2.0);
        assert!(shear.plane_potential_residual(&pts).unwrap() < 1e-8);
    }
}
