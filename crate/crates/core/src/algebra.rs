//! Pointwise algebra of metric difference tensors on `ℝⁿ`.
//!
//! A metric connection differs from the Levi-Civita connection by a tensor
//! `A(X, Y, Z) = g(A(X, Y), Z)` that is skew in its last two slots. Under
//! `O(n)` this space splits into a vectorial part (`ℝⁿ`), a totally skew part
//! (`Λ³ℝⁿ`) and a remainder. All tensors here are stored in an orthonormal
//! basis as dense `n³` arrays indexed `[a][b][c]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

const METRIC_CLASS_TOL: f64 = 1e-12;

#[inline]
fn idx(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

/// Number of independent components of a metric difference tensor, `n²(n−1)/2`.
pub fn metric_class_dimension(n: usize) -> usize {
    n * n * (n.saturating_sub(1)) / 2
}

/// `C(n, 3)`, the dimension of `Λ³ℝⁿ`.
pub fn three_form_dimension(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// A dense `(3,0)` tensor on `ℝⁿ` with no symmetry constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[idx(self.n, a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        let n = self.n;
        self.data[idx(n, a, b, c)] = value;
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn frobenius_inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A metric difference tensor: `A(X, V, W) + A(X, W, V) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceTensor {
    inner: Tensor3,
}

impl DifferenceTensor {
    pub fn zeros(n: usize) -> Self {
        Self { inner: Tensor3::zeros(n) }
    }

    /// Build from `n³` components. Components that violate skew-symmetry in
    /// the last two slots by more than roundoff are rejected; the rest are
    /// made exactly skew.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n * n {
            return Err(GeoError::Argument(format!(
                "expected {} components for n = {n}, got {}",
                n * n * n,
                data.len()
            )));
        }
        let scale = data.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let mut t = Tensor3 { n, data };
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let x = t.get(a, b, c);
                    let y = t.get(a, c, b);
                    if (x + y).abs() > METRIC_CLASS_TOL * scale {
                        return Err(GeoError::Argument(format!(
                            "tensor is not skew in its last two slots at ({a},{b},{c}): {x} vs {y}"
                        )));
                    }
                    let v = 0.5 * (x - y);
                    t.set(a, b, c, v);
                    t.set(a, c, b, -v);
                }
            }
        }
        Ok(Self { inner: t })
    }

    /// Project an arbitrary `(3,0)` tensor onto the metric class by
    /// skew-symmetrizing its last two slots.
    pub fn project(t: &Tensor3) -> Self {
        let n = t.n;
        let mut out = Tensor3::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out.set(a, b, c, 0.5 * (t.get(a, b, c) - t.get(a, c, b)));
                }
            }
        }
        Self { inner: out }
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.inner.get(a, b, c)
    }

    pub fn as_tensor(&self) -> &Tensor3 {
        &self.inner
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.frobenius()
    }

    /// The vector `A(X, Y)` for basis indices, i.e. components `A(e_a, e_b, ·)`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|c| {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += x[a] * y[b] * self.get(a, b, c);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Components of `V` in the orthonormal frame of `metric` (via Cholesky `g = LLᵀ`).
fn orthonormal_components(v: &[f64], metric: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = v.len();
    if metric.nrows() != n || metric.ncols() != n {
        return Err(GeoError::Argument(format!(
            "metric is {}×{}, vector has {n} components",
            metric.nrows(),
            metric.ncols()
        )));
    }
    let sym_err = (metric - metric.transpose()).amax();
    if sym_err > 1e-12 * metric.amax().max(1.0) {
        return Err(GeoError::Degenerate("metric is not symmetric".into()));
    }
    let chol = metric
        .clone()
        .cholesky()
        .ok_or_else(|| GeoError::Degenerate("metric is not positive definite".into()))?;
    let l = chol.l();
    Ok((l.transpose() * DVector::from_column_slice(v)).iter().copied().collect())
}

/// The vectorial difference tensor `A(X,Y) = g(X,Y)V − g(V,Y)X`, expressed in
/// an orthonormal basis of `metric`.
pub fn vectorial_tensor(v: &[f64], metric: &DMatrix<f64>) -> Result<DifferenceTensor> {
    let w = orthonormal_components(v, metric)?;
    Ok(vectorial_tensor_orthonormal(&w))
}

/// [`vectorial_tensor`] for a vector already given in an orthonormal basis.
pub fn vectorial_tensor_orthonormal(v: &[f64]) -> DifferenceTensor {
    let n = v.len();
    let mut t = Tensor3::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut x = 0.0;
                if a == b {
                    x += v[c];
                }
                if a == c {
                    x -= v[b];
                }
                t.set(a, b, c, x);
            }
        }
    }
    DifferenceTensor { inner: t }
}

/// Torsion `T(X, Y) = A(X, Y) − A(Y, X)` as a `(3,0)` tensor.
pub fn torsion_from(a: &DifferenceTensor) -> Tensor3 {
    let n = a.dim();
    let mut t = Tensor3::zeros(n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                t.set(x, y, z, a.get(x, y, z) - a.get(y, x, z));
            }
        }
    }
    t
}

/// Three-part splitting of a metric difference tensor.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub n: usize,
    /// Vectorial part, the `V` with `A_vec(X,Y) = g(X,Y)V − g(V,Y)X`.
    pub vector: Vec<f64>,
    /// Totally skew part, components `S_abc` for `a < b < c` in lexicographic order.
    pub skew: Vec<f64>,
    pub remainder: DifferenceTensor,
}

impl Decomposition {
    pub fn vectorial_as_tensor(&self) -> DifferenceTensor {
        vectorial_tensor_orthonormal(&self.vector)
    }

    pub fn skew_as_tensor(&self) -> DifferenceTensor {
        let n = self.n;
        let mut t = Tensor3::zeros(n);
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let s = self.skew[k];
                    k += 1;
                    for (i, j, l, sign) in [
                        (a, b, c, 1.0),
                        (b, c, a, 1.0),
                        (c, a, b, 1.0),
                        (b, a, c, -1.0),
                        (a, c, b, -1.0),
                        (c, b, a, -1.0),
                    ] {
                        t.set(i, j, l, sign * s);
                    }
                }
            }
        }
        DifferenceTensor { inner: t }
    }

    /// Sum of the three parts.
    pub fn reconstruct(&self) -> Tensor3 {
        let v = self.vectorial_as_tensor();
        let s = self.skew_as_tensor();
        let mut out = self.remainder.inner.clone();
        for (i, x) in out.data.iter_mut().enumerate() {
            *x += v.inner.data[i] + s.inner.data[i];
        }
        out
    }

    /// `(dim ℝⁿ, dim Λ³ℝⁿ, dim A′)`.
    pub fn dimensions(&self) -> (usize, usize, usize) {
        let total = metric_class_dimension(self.n);
        let v = self.n;
        let s = three_form_dimension(self.n);
        (v, s, total - v - s)
    }

    /// Frobenius norms of the three parts as tensors.
    pub fn norms(&self) -> [f64; 3] {
        [
            self.vectorial_as_tensor().frobenius(),
            self.skew_as_tensor().frobenius(),
            self.remainder.frobenius(),
        ]
    }

    /// Largest absolute pairwise Frobenius inner product between the parts.
    pub fn max_cross_inner(&self) -> f64 {
        let v = self.vectorial_as_tensor();
        let s = self.skew_as_tensor();
        let r = &self.remainder;
        [
            v.inner.frobenius_inner(&s.inner),
            v.inner.frobenius_inner(&r.inner),
            s.inner.frobenius_inner(&r.inner),
        ]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
    }
}

/// Split `A` into vectorial, totally skew and remainder parts.
///
/// The vectorial part is `V_c = (1/(n−1)) Σ_a A(e_a, e_a, e_c)`, the skew
/// part is the full antisymmetrization, and the remainder is what is left.
pub fn decompose(a: &DifferenceTensor) -> Result<Decomposition> {
    let n = a.dim();
    if n < 2 {
        return Err(GeoError::Argument(format!("decomposition needs n ≥ 2, got {n}")));
    }
    let vector: Vec<f64> = (0..n)
        .map(|c| (0..n).map(|i| a.get(i, i, c)).sum::<f64>() / (n - 1) as f64)
        .collect();

    let mut skew = Vec::with_capacity(three_form_dimension(n));
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                // skew in the last two slots, so the six-term average reduces to three
                skew.push((a.get(x, y, z) + a.get(y, z, x) + a.get(z, x, y)) / 3.0);
            }
        }
    }

    let mut d = Decomposition { n, vector, skew, remainder: DifferenceTensor::zeros(n) };
    let v = d.vectorial_as_tensor();
    let s = d.skew_as_tensor();
    let mut rem = a.inner.clone();
    for (i, x) in rem.data.iter_mut().enumerate() {
        *x -= v.inner.data[i] + s.inner.data[i];
    }
    d.remainder = DifferenceTensor { inner: rem };
    Ok(d)
}

/// The difference tensor `A = ½ σ¹∧σ²∧σ³` of the flat connection on `SO(3)`.
pub fn so3_fixture() -> DifferenceTensor {
    let mut t = Tensor3::zeros(3);
    for (a, b, c, sign) in [
        (0, 1, 2, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
        (1, 0, 2, -1.0),
        (0, 2, 1, -1.0),
        (2, 1, 0, -1.0),
    ] {
        t.set(a, b, c, 0.5 * sign);
    }
    DifferenceTensor { inner: t }
}

/// JSON input for the `decompose` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorFile {
    pub n: usize,
    /// `n³` components in `[a][b][c]` row-major order, orthonormal basis.
    #[serde(default)]
    pub components: Option<Vec<f64>>,
    /// Alternatively, a vector `V` (optionally with a metric) generating a vectorial tensor.
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
    #[serde(default)]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl TensorFile {
    pub fn to_tensor(&self) -> Result<DifferenceTensor> {
        match (&self.components, &self.vector) {
            (Some(c), None) => DifferenceTensor::new(self.n, c.clone()),
            (None, Some(v)) => {
                if v.len() != self.n {
                    return Err(GeoError::Argument(format!("vector has {} components, n = {}", v.len(), self.n)));
                }
                let metric = match &self.metric {
                    Some(rows) => {
                        if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                            return Err(GeoError::Argument("metric must be n×n".into()));
                        }
                        DMatrix::from_fn(self.n, self.n, |i, j| rows[i][j])
                    }
                    None => DMatrix::identity(self.n, self.n),
                };
                vectorial_tensor(v, &metric)
            }
            _ => Err(GeoError::Argument("give exactly one of `components` or `vector`".into())),
        }
    }
}

/// JSON output of the `decompose` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub n: usize,
    pub vector: Vec<f64>,
    pub skew: Vec<f64>,
    pub remainder: Vec<f64>,
    pub norms: [f64; 3],
    pub dimensions: (usize, usize, usize),
    pub reconstruction_error: f64,
    pub max_cross_inner: f64,
}

impl From<(&DifferenceTensor, &Decomposition)> for DecompositionSummary {
    fn from((a, d): (&DifferenceTensor, &Decomposition)) -> Self {
        Self {
            n: d.n,
            vector: d.vector.clone(),
            skew: d.skew.clone(),
            remainder: d.remainder.inner.data.clone(),
            norms: d.norms(),
            dimensions: d.dimensions(),
            reconstruction_error: d.reconstruct().max_abs_diff(a.as_tensor()),
            max_cross_inner: d.max_cross_inner(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vector_gives_zero_tensor() {
        let a = vectorial_tensor(&[0.0, 0.0, 0.0], &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(a.frobenius(), 0.0);
    }

    #[test]
    fn plane_shear_tensor_components() {
        // V = (2, 0): ∇_{e2} e2 = f e1 with f = 2, ∇_{e1} e1 = 0
        let a = vectorial_tensor_orthonormal(&[2.0, 0.0]);
        assert_eq!(a.apply(&[1.0, 0.0], &[1.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(a.apply(&[0.0, 1.0], &[0.0, 1.0]), vec![2.0, 0.0]);
        assert_eq!(a.apply(&[1.0, 0.0], &[0.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(a.apply(&[0.0, 1.0], &[1.0, 0.0]), vec![0.0, -2.0]);
    }

    #[test]
    fn surface_of_revolution_torsion() {
        let k = 0.37; // r'/r
        let a = vectorial_tensor_orthonormal(&[k, 0.0]);
        let t = torsion_from(&a);
        // T(e1, e2) = k e2
        assert!((t.get(0, 1, 0)).abs() < 1e-15);
        assert!((t.get(0, 1, 1) - k).abs() < 1e-15);
    }

    #[test]
    fn general_metric_goes_through_cholesky() {
        let g = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let a = vectorial_tensor(&[0.5, 1.0], &g).unwrap();
        let d = decompose(&a).unwrap();
        assert!((d.vector[0] - 1.0).abs() < 1e-14);
        assert!((d.vector[1] - 3.0).abs() < 1e-14);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(vectorial_tensor(&[1.0, 0.0], &bad), Err(GeoError::Degenerate(_))));
    }

    #[test]
    fn symmetric_in_first_slots_has_no_torsion() {
        // skew in (b,c) and symmetric in (a,b) forces A = 0, so the only
        // symmetric member of the metric class is the zero tensor
        assert_eq!(torsion_from(&DifferenceTensor::zeros(3)).frobenius(), 0.0);
        let v = vectorial_tensor_orthonormal(&[1.0, -2.0, 0.5]);
        assert!(torsion_from(&v).frobenius() > 0.0);
    }

    #[test]
    fn so3_fixture_is_pure_three_form() {
        let a = so3_fixture();
        let t = torsion_from(&a);
        for i in 0..27 {
            assert!((t.data[i] - 2.0 * a.as_tensor().data[i]).abs() < 1e-15);
        }
        let d = decompose(&a).unwrap();
        assert!(d.vector.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(d.skew, vec![0.5]);
        assert!(d.remainder.frobenius() < 1e-15);
    }

    #[test]
    fn rejects_non_metric_tensor() {
        let mut data = vec![0.0; 8];
        data[idx(2, 0, 0, 1)] = 1.0;
        assert!(DifferenceTensor::new(2, data).is_err());
        assert!(DifferenceTensor::new(2, vec![0.0; 7]).is_err());
    }

    #[test]
    fn rejects_dimension_one() {
        let a = DifferenceTensor::zeros(1);
        assert!(matches!(decompose(&a), Err(GeoError::Argument(_))));
    }

    #[test]
    fn dimension_count() {
        for n in 2..7 {
            let d = decompose(&DifferenceTensor::zeros(n)).unwrap();
            let (v, s, r) = d.dimensions();
            assert_eq!(v + s + r, n * n * (n - 1) / 2);
        }
        assert_eq!(decompose(&DifferenceTensor::zeros(4)).unwrap().dimensions(), (4, 4, 16));
        assert_eq!(decompose(&DifferenceTensor::zeros(2)).unwrap().dimensions(), (2, 0, 0));
    }
}
