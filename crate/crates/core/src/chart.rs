//! Conformally parametrized surface charts in `S^n`, evaluated as jets.
//!
//! A chart maps parameter jets `(u, v)` to the `n + 1` Euclidean components
//! of `f(u, v)` on the unit sphere. Lifting to the light cone gives
//! `F = (1, f)`; the canonical lift rescales `F` so that `|dY|^2 = |dz|^2`.
//!
//! Charts are never silently projected or reparametrized. Catalog and
//! user-supplied charts are checked for sphericity, conformality and
//! immersion, and rejected with the offending residual.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridSpec};
use crate::jet::{Jet2, JetVec};
use crate::lorentz::{LorentzMap, Vector};
use crate::tolerances;

/// Surface map on parameter jets, returning `n + 1` sphere components.
pub type SurfaceFn = Arc<dyn Fn(&Jet2, &Jet2) -> Result<Vec<Jet2>> + Send + Sync>;

/// A named conformal chart `f: U -> S^n`.
#[derive(Clone)]
pub struct SurfaceChart {
    pub name: String,
    pub n: usize,
    pub domain: Domain,
    func: SurfaceFn,
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Sup-norm chart diagnostics over a lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartCheck {
    /// `max | |f| - 1 |`.
    pub sphericity: f64,
    /// `max |<F_z, F_z>|`.
    pub conformality: f64,
    /// `min <F_z, F_zbar>`.
    pub min_metric: f64,
}

impl SurfaceChart {
    pub fn new(name: impl Into<String>, n: usize, domain: Domain, func: SurfaceFn) -> Self {
        SurfaceChart {
            name: name.into(),
            n,
            domain,
            func,
        }
    }

    /// Sphere components of `f` as order-`order` jets at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64, order: usize) -> Result<Vec<Jet2>> {
        self.eval_jets(&Jet2::variable_u(order, u), &Jet2::variable_v(order, v))
    }

    fn eval_jets(&self, u: &Jet2, v: &Jet2) -> Result<Vec<Jet2>> {
        let f = (self.func)(u, v)?;
        if f.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                left: f.len(),
                right: self.n + 1,
            });
        }
        Ok(f)
    }

    /// Pointwise value of `f`.
    pub fn point(&self, u: f64, v: f64) -> Result<Vec<f64>> {
        Ok(self.eval(u, v, 0)?.iter().map(|c| c.value().re).collect())
    }

    /// Embeds the chart into a higher-dimensional sphere by zero padding.
    pub fn with_ambient(self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::Invalid(format!(
                "chart `{}` lives in S^{}; cannot embed into S^{n}",
                self.name, self.n
            )));
        }
        if n == self.n {
            return Ok(self);
        }
        let inner = self.func.clone();
        let func: SurfaceFn = Arc::new(move |u, v| {
            let mut f = inner(u, v)?;
            let order = u.order().min(v.order());
            f.resize(n + 1, Jet2::zero(order));
            Ok(f)
        });
        Ok(SurfaceChart { func, n, ..self })
    }

    /// The chart of `T f`, read off the transformed lift `T (1, f)`.
    pub fn transformed(&self, map: &LorentzMap) -> Result<Self> {
        if map.dim() != self.n + 2 {
            return Err(Error::DimensionMismatch {
                left: map.dim(),
                right: self.n + 2,
            });
        }
        let inner = self.func.clone();
        let map = map.clone();
        let func: SurfaceFn = Arc::new(move |u, v| {
            let order = u.order().min(v.order());
            let mut comps = vec![Jet2::constant(order, 1.0)];
            comps.extend(inner(u, v)?);
            let t = map.apply(&Vector::new(comps));
            let inv = t.comps[0].try_recip()?;
            Ok(t.comps[1..].iter().map(|c| c * &inv).collect())
        });
        Ok(SurfaceChart::new(
            format!("{}@mobius", self.name),
            self.n,
            self.domain,
            func,
        ))
    }

    /// The chart `w -> f(a w)`, with domain the bounding box of the preimage.
    pub fn reparametrized(&self, a: Complex64) -> Result<Self> {
        if a.norm() < tolerances::SINGULAR_JET {
            return Err(Error::Invalid("reparametrization factor vanishes".into()));
        }
        let inner = self.func.clone();
        let func: SurfaceFn = Arc::new(move |u, v| {
            let up = &(u * a.re) - &(v * a.im);
            let vp = &(u * a.im) + &(v * a.re);
            inner(&up, &vp)
        });
        let b = 1.0 / a;
        let corners = [
            (self.domain.u[0], self.domain.v[0]),
            (self.domain.u[1], self.domain.v[0]),
            (self.domain.u[0], self.domain.v[1]),
            (self.domain.u[1], self.domain.v[1]),
        ]
        .map(|(x, y)| Complex64::new(x, y) * b);
        let lo = |g: fn(&Complex64) -> f64| corners.iter().map(g).fold(f64::INFINITY, f64::min);
        let hi = |g: fn(&Complex64) -> f64| corners.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
        let domain = Domain::new(
            [lo(|c| c.re), hi(|c| c.re)],
            [lo(|c| c.im), hi(|c| c.im)],
            [false, false],
        );
        Ok(SurfaceChart::new(
            format!("{}@reparam", self.name),
            self.n,
            domain,
            func,
        ))
    }

    /// Sphericity, conformality and immersion diagnostics on a lattice.
    pub fn check(&self, grid: &GridSpec) -> Result<ChartCheck> {
        let mut out = ChartCheck {
            sphericity: 0.0,
            conformality: 0.0,
            min_metric: f64::INFINITY,
        };
        for p in grid.points(&self.domain) {
            let f = light_cone_lift(self, p.u, p.v, 1)?;
            let norm2: f64 = f.comps[1..].iter().map(|c| c.value().norm_sqr()).sum();
            out.sphericity = out.sphericity.max((norm2.sqrt() - 1.0).abs());
            let fz = f.dz()?.value();
            let fzb = f.dzb()?.value();
            out.conformality = out.conformality.max(fz.inner(&fz).norm());
            out.min_metric = out.min_metric.min(fz.inner(&fzb).re);
        }
        Ok(out)
    }

    /// Rejects the chart unless it is spherical, conformal and immersed on `grid`.
    pub fn validate(&self, grid: &GridSpec) -> Result<ChartCheck> {
        let c = self.check(grid)?;
        let reject = |what, residual, tol| Error::ChartRejected {
            name: self.name.clone(),
            what,
            residual,
            tol,
        };
        if c.sphericity > tolerances::SPHERICITY {
            return Err(reject("sphericity", c.sphericity, tolerances::SPHERICITY));
        }
        if c.conformality > tolerances::CONFORMALITY {
            return Err(reject("conformality", c.conformality, tolerances::CONFORMALITY));
        }
        if c.min_metric < tolerances::IMMERSION {
            return Err(reject("immersion", c.min_metric, tolerances::IMMERSION));
        }
        Ok(c)
    }
}

/// The lift `F = (1, f)` as an order-`order` jet.
pub fn light_cone_lift(chart: &SurfaceChart, u: f64, v: f64, order: usize) -> Result<JetVec> {
    let mut comps = vec![Jet2::constant(order, 1.0)];
    comps.extend(chart.eval(u, v, order)?);
    Ok(Vector::new(comps))
}

/// `Y = F / sqrt(2 <F_z, F_zbar>)`; one jet order is consumed.
///
/// `(u, v)` only labels errors.
pub fn canonical_lift(f: &JetVec, u: f64, v: f64) -> Result<JetVec> {
    if f.comps[0].value().re <= 0.0 {
        return Err(Error::BackwardLift { u, v });
    }
    let fz = f.dz()?;
    let fzb = f.dzb()?;
    let metric = fz.inner(&fzb);
    let value = metric.value().re;
    if value < tolerances::IMMERSION {
        return Err(Error::NonImmersion { u, v, value });
    }
    let scale = metric.scale(2.0).try_rsqrt()?;
    Ok(f.truncated(scale.order()).times(&scale))
}

/// Canonical lift of a chart point with `order` retained derivatives.
pub fn chart_lift(chart: &SurfaceChart, u: f64, v: f64, order: usize) -> Result<JetVec> {
    canonical_lift(&light_cone_lift(chart, u, v, order + 1)?, u, v)
}

/// Trigonometric term `coeff * cos(ku u + kv v)` or `coeff * sin(...)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub coeff: f64,
    #[serde(default)]
    pub ku: f64,
    #[serde(default)]
    pub kv: f64,
    #[serde(default)]
    pub kind: TrigKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    #[default]
    Cos,
    Sin,
}

/// User chart given as one trigonometric polynomial per sphere component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub domain: Domain,
    pub components: Vec<Vec<TrigTerm>>,
}

/// Catalog parameters; unused fields are ignored by charts that do not need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartParams {
    /// Amplitude for `perturbed-clifford`.
    pub epsilon: f64,
    /// Sphere dimension to embed into (zero padding).
    pub ambient: Option<usize>,
    pub graph: Option<GraphSpec>,
}

impl Default for ChartParams {
    fn default() -> Self {
        ChartParams {
            epsilon: 0.05,
            ambient: None,
            graph: None,
        }
    }
}

pub const CATALOG: [&str; 5] = ["sphere", "clifford", "veronese", "perturbed-clifford", "graph"];

/// Inverse stereographic projection `(2u, 2v, 1 - u^2 - v^2) / (1 + u^2 + v^2)`.
fn stereographic(u: &Jet2, v: &Jet2) -> Result<[Jet2; 3]> {
    let r2 = &(u * u) + &(v * v);
    let one = Jet2::constant(r2.order(), 1.0);
    let inv = (&one + &r2).try_recip()?;
    Ok([
        &(u * &inv) * 2.0,
        &(v * &inv) * 2.0,
        &(&one - &r2) * &inv,
    ])
}

fn sphere_chart() -> SurfaceChart {
    SurfaceChart::new(
        "sphere",
        2,
        Domain::new([-1.0, 1.0], [-1.0, 1.0], [false, false]),
        Arc::new(|u, v| Ok(stereographic(u, v)?.to_vec())),
    )
}

/// Flat torus `(r1 cos u, r1 sin u, r2 cos(r1 v / r2), r2 sin(r1 v / r2))`,
/// conformal for every `r1^2 + r2^2 = 1`.
fn flat_torus(name: &str, r1: f64, r2: f64) -> SurfaceChart {
    let period_v = 2.0 * PI * r2 / r1;
    SurfaceChart::new(
        name,
        3,
        Domain::new([0.0, 2.0 * PI], [0.0, period_v], [true, true]),
        Arc::new(move |u, v| {
            let w = v * (r1 / r2);
            Ok(vec![
                &u.cos() * r1,
                &u.sin() * r1,
                &w.cos() * r2,
                &w.sin() * r2,
            ])
        }),
    )
}

/// Degree-2 harmonic embedding of the unit sphere into `S^4`, composed with
/// stereographic coordinates.
fn veronese_chart() -> SurfaceChart {
    let r3 = 3f64.sqrt();
    SurfaceChart::new(
        "veronese",
        4,
        Domain::new([-1.0, 1.0], [-1.0, 1.0], [false, false]),
        Arc::new(move |u, v| {
            let [x, y, z] = stereographic(u, v)?;
            let (xx, yy, zz) = (&x * &x, &y * &y, &z * &z);
            Ok(vec![
                &(&x * &y) * r3,
                &(&x * &z) * r3,
                &(&y * &z) * r3,
                &(&xx - &yy) * (0.5 * r3),
                &(&(&zz * 2.0) - &(&xx + &yy)) * 0.5,
            ])
        }),
    )
}

fn graph_chart(spec: &GraphSpec) -> Result<SurfaceChart> {
    if spec.components.len() < 4 {
        return Err(Error::Invalid(format!(
            "graph chart needs at least 4 sphere components, got {}",
            spec.components.len()
        )));
    }
    let n = spec.components.len() - 1;
    let terms = spec.components.clone();
    let chart = SurfaceChart::new(
        "graph",
        n,
        spec.domain,
        Arc::new(move |u, v| {
            let order = u.order().min(v.order());
            Ok(terms
                .iter()
                .map(|comp| {
                    let mut acc = Jet2::zero(order);
                    for t in comp {
                        let phase = &(u * t.ku) + &(v * t.kv);
                        let w = match t.kind {
                            TrigKind::Cos => phase.cos(),
                            TrigKind::Sin => phase.sin(),
                        };
                        acc += &(&w * t.coeff);
                    }
                    acc
                })
                .collect())
        }),
    );
    chart.validate(&GridSpec { nu: 12, nv: 12 })?;
    Ok(chart)
}

/// Looks up a catalog chart.
pub fn catalog(name: &str, params: &ChartParams) -> Result<SurfaceChart> {
    let chart = match name {
        "sphere" => sphere_chart(),
        "clifford" => flat_torus("clifford", FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        "veronese" => veronese_chart(),
        "perturbed-clifford" => {
            let t = FRAC_PI_4 + params.epsilon;
            if !(t > 0.0 && t < PI / 2.0) {
                return Err(Error::Invalid(format!(
                    "perturbed-clifford amplitude {} leaves (-pi/4, pi/4)",
                    params.epsilon
                )));
            }
            flat_torus("perturbed-clifford", t.cos(), t.sin())
        }
        "graph" => {
            let spec = params
                .graph
                .as_ref()
                .ok_or_else(|| Error::Invalid("graph chart requires a [graph] table".into()))?;
            graph_chart(spec)?
        }
        other => return Err(Error::UnknownChart(other.to_string())),
    };
    match (params.ambient, name) {
        (Some(n), _) => chart.with_ambient(n),
        // the round sphere sits in S^3 unless asked otherwise, so it has a normal bundle
        (None, "sphere") => chart.with_ambient(3),
        (None, _) => Ok(chart),
    }
}

/// Surface sampled at spectral nodes, stored as sphere points.
///
/// `points[i * nv + j]` is the sphere point at the `i`-th `u` node and `j`-th
/// `v` node of [`GridSpec::spectral_nodes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledSurface {
    pub nu: usize,
    pub nv: usize,
    pub domain: Domain,
    pub points: Vec<Vec<f64>>,
}

impl SampledSurface {
    /// Samples `f` at the spectral nodes of `grid`.
    pub fn sample(chart: &SurfaceChart, grid: &GridSpec) -> Result<Self> {
        let (us, vs) = grid.spectral_nodes(&chart.domain);
        let mut points = Vec::with_capacity(grid.len());
        for u in &us {
            for v in &vs {
                points.push(chart.point(*u, *v)?);
            }
        }
        Ok(SampledSurface {
            nu: grid.nu,
            nv: grid.nv,
            domain: chart.domain,
            points,
        })
    }

    /// Interpolating chart: trigonometric on periodic axes, Chebyshev on
    /// the others, followed by radial normalization onto the sphere.
    pub fn to_chart(&self, name: impl Into<String>) -> Result<SurfaceChart> {
        if self.nu < 4 || self.nv < 4 || self.points.len() != self.nu * self.nv {
            return Err(Error::Invalid(format!(
                "sampled surface has {} points for a {}x{} lattice",
                self.points.len(),
                self.nu,
                self.nv
            )));
        }
        let dim = self.points[0].len();
        if dim < 4 || self.points.iter().any(|p| p.len() != dim) {
            return Err(Error::Invalid("sampled points have inconsistent dimension".into()));
        }
        let iu = Interp1::new(self.nu, self.domain.u, self.domain.periodic[0]);
        let iv = Interp1::new(self.nv, self.domain.v, self.domain.periodic[1]);
        let values: Vec<DMatrix<f64>> = (0..dim)
            .map(|c| DMatrix::from_fn(self.nu, self.nv, |i, j| self.points[i * self.nv + j][c]))
            .collect();
        let func: SurfaceFn = Arc::new(move |u, v| {
            let order = u.order().min(v.order());
            let (u0, v0) = (u.value().re, v.value().re);
            let a = iu.cardinal_series(u0, order);
            let b = iv.cardinal_series(v0, order);
            let du = u - &Jet2::constant(order, u0);
            let dv = v - &Jet2::constant(order, v0);
            let raw: Vec<Jet2> = values
                .iter()
                .map(|m| {
                    let t = a.transpose() * m * &b;
                    compose_bivariate(&t, &du, &dv, order)
                })
                .collect();
            let norm2 = raw.iter().fold(Jet2::zero(order), |acc, c| &acc + &(c * c));
            let inv = norm2.try_rsqrt()?;
            Ok(raw.iter().map(|c| c * &inv).collect())
        });
        Ok(SurfaceChart::new(name, dim - 1, self.domain, func))
    }
}

/// `sum_{j+k<=K} t[j][k] du^j dv^k` for jets `du`, `dv` without constant term.
fn compose_bivariate(t: &DMatrix<f64>, du: &Jet2, dv: &Jet2, order: usize) -> Jet2 {
    let mut upow = vec![Jet2::constant(order, 1.0)];
    let mut vpow = vec![Jet2::constant(order, 1.0)];
    for k in 1..=order {
        upow.push(&upow[k - 1] * du);
        vpow.push(&vpow[k - 1] * dv);
    }
    let mut acc = Jet2::zero(order);
    for j in 0..=order {
        for k in 0..=(order - j) {
            let c = t[(j, k)];
            if c != 0.0 {
                acc += &(&(&upow[j] * &vpow[k]) * c);
            }
        }
    }
    acc
}

/// Univariate interpolation on spectral nodes.
#[derive(Clone, Debug)]
struct Interp1 {
    n: usize,
    range: [f64; 2],
    periodic: bool,
    /// Chebyshev coefficient of `T_k` in the `i`-th cardinal function.
    cheb: DMatrix<f64>,
}

impl Interp1 {
    fn new(n: usize, range: [f64; 2], periodic: bool) -> Self {
        let m = n - 1;
        let cheb = if periodic {
            DMatrix::zeros(0, 0)
        } else {
            DMatrix::from_fn(n, n, |i, k| {
                let xi = -(PI * i as f64 / m as f64).cos();
                let tk = (k as f64 * xi.acos()).cos();
                let h = if i == 0 || i == m { 0.5 } else { 1.0 };
                let g = if k == 0 || k == m { 2.0 } else { 1.0 };
                2.0 / m as f64 * h * tk / g
            })
        };
        Interp1 {
            n,
            range,
            periodic,
            cheb,
        }
    }

    /// Normalized Taylor coefficients at `t` of every cardinal function:
    /// entry `(i, j)` is the `j`-th coefficient of the `i`-th function.
    fn cardinal_series(&self, t: f64, order: usize) -> DMatrix<f64> {
        let len = self.range[1] - self.range[0];
        if self.periodic {
            self.fourier_series(t, order, len)
        } else {
            self.chebyshev_series(t, order, len)
        }
    }

    fn fourier_series(&self, t: f64, order: usize, len: f64) -> DMatrix<f64> {
        let n = self.n;
        let omega = 2.0 * PI / len;
        let half = n / 2;
        let mut out = DMatrix::zeros(n, order + 1);
        for i in 0..n {
            let s = t - self.range[0] - len * i as f64 / n as f64;
            // L_i(t) = (1/n) [1 + 2 sum_k cos(k w s) (+ cos(n/2 w s) if n even)]
            for k in 0..=half {
                let weight = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 };
                let f = k as f64 * omega;
                let mut fj = 1.0;
                let mut fact = 1.0;
                for j in 0..=order {
                    if j > 0 {
                        fj *= f;
                        fact *= j as f64;
                    }
                    let d = (f * s + j as f64 * PI / 2.0).cos();
                    out[(i, j)] += weight / n as f64 * fj * d / fact;
                }
            }
        }
        out
    }

    fn chebyshev_series(&self, t: f64, order: usize, len: f64) -> DMatrix<f64> {
        let n = self.n;
        let x0 = (2.0 * t - self.range[0] - self.range[1]) / len;
        let dx = 2.0 / len;
        // T_k(x0 + dx d) as truncated series in d.
        let mul_x = |p: &[f64]| {
            let mut q = vec![0.0; order + 1];
            for j in 0..=order {
                q[j] += x0 * p[j];
                if j + 1 <= order {
                    q[j + 1] += dx * p[j];
                }
            }
            q
        };
        let mut tk = vec![vec![0.0; order + 1]; n];
        tk[0][0] = 1.0;
        if n > 1 {
            tk[1] = mul_x(&tk[0]);
        }
        for k in 2..n {
            let q = mul_x(&tk[k - 1]);
            tk[k] = q.iter().zip(&tk[k - 2]).map(|(a, b)| 2.0 * a - b).collect();
        }
        let tmat = DMatrix::from_fn(n, order + 1, |k, j| tk[k][j]);
        &self.cheb * tmat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::random_lorentz;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn clifford_has_orthogonal_equal_speed_tangents() {
        let ch = catalog("clifford", &ChartParams::default()).unwrap();
        for (u, v) in [(0.0, 0.0), (0.7, 2.1), (3.0, -1.0)] {
            let f = ch.eval(u, v, 1).unwrap();
            let fu: Vec<f64> = f.iter().map(|x| x.partial(1, 0).re).collect();
            let fv: Vec<f64> = f.iter().map(|x| x.partial(0, 1).re).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            assert_abs_diff_eq!(dot(&fu, &fu), 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(dot(&fv, &fv), 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(dot(&fu, &fv), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn catalog_charts_pass_validation() {
        let grid = GridSpec::new(9, 9).unwrap();
        for name in ["sphere", "clifford", "veronese", "perturbed-clifford"] {
            let ch = catalog(name, &ChartParams::default()).unwrap();
            let chk = ch.validate(&grid).unwrap();
            assert!(chk.sphericity < 1e-12, "{name}: {chk:?}");
            assert!(chk.conformality < 1e-10, "{name}: {chk:?}");
        }
    }

    #[test]
    fn zero_amplitude_perturbation_is_clifford() {
        let p = ChartParams {
            epsilon: 0.0,
            ..Default::default()
        };
        let a = catalog("perturbed-clifford", &p).unwrap();
        let b = catalog("clifford", &p).unwrap();
        assert_eq!(a.domain, b.domain);
        for (u, v) in [(0.3, 0.2), (5.0, 4.0)] {
            let (x, y) = (a.point(u, v).unwrap(), b.point(u, v).unwrap());
            for (p, q) in x.iter().zip(&y) {
                assert_abs_diff_eq!(p, q, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unknown_and_missing_charts() {
        assert_eq!(
            catalog("torus", &ChartParams::default()).unwrap_err(),
            Error::UnknownChart("torus".into())
        );
        assert!(catalog("graph", &ChartParams::default()).is_err());
    }

    #[test]
    fn clifford_lift_values() {
        let ch = catalog("clifford", &ChartParams::default()).unwrap();
        let f = light_cone_lift(&ch, 0.0, 0.0, 3).unwrap();
        let expect = [1.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (x, e) in f.value().comps.iter().zip(expect) {
            assert_abs_diff_eq!(x.re, e, epsilon = 1e-15);
        }
        // |f_u|^2 + |f_v|^2 = 1 gives <F_z, F_zbar> = 1/4
        let m = f.dz().unwrap().inner(&f.dzb().unwrap()).value();
        assert_abs_diff_eq!(m.re, 0.25, epsilon = 1e-15);
        let y = chart_lift(&ch, 0.4, 1.3, 3).unwrap();
        let f = light_cone_lift(&ch, 0.4, 1.3, 3).unwrap();
        for (a, b) in y.value().comps.iter().zip(&f.value().comps) {
            assert_abs_diff_eq!(a.re, 2f64.sqrt() * b.re, epsilon = 1e-15);
        }
    }

    #[test]
    fn canonical_lift_normalization_through_retained_orders() {
        for name in ["sphere", "veronese", "perturbed-clifford"] {
            let ch = catalog(name, &ChartParams::default()).unwrap();
            let y = chart_lift(&ch, 0.3, -0.2, 5).unwrap();
            let (yz, yzb) = (y.dz().unwrap(), y.dzb().unwrap());
            assert!(y.inner(&y).sup_norm() < 1e-12, "{name}");
            assert!(yz.inner(&yz).sup_norm() < 1e-11, "{name}");
            let m = yz.inner(&yzb);
            assert_abs_diff_eq!(m.value().re, 0.5, epsilon = 1e-13);
            assert!((&m - &Jet2::constant(m.order(), 0.5)).sup_norm() < 1e-11, "{name}");
            assert!(y.comps[0].value().re > 0.0);
        }
    }

    #[test]
    fn non_conformal_graph_is_rejected_with_residual() {
        // (cos u, sin u, cos v, sin v) / sqrt 2 with v doubled: spherical, not conformal
        let t = |coeff: f64, ku: f64, kv: f64, kind| TrigTerm { coeff, ku, kv, kind };
        let s = FRAC_1_SQRT_2;
        let spec = GraphSpec {
            domain: Domain::new([0.0, 2.0 * PI], [0.0, PI], [true, true]),
            components: vec![
                vec![t(s, 1.0, 0.0, TrigKind::Cos)],
                vec![t(s, 1.0, 0.0, TrigKind::Sin)],
                vec![t(s, 0.0, 2.0, TrigKind::Cos)],
                vec![t(s, 0.0, 2.0, TrigKind::Sin)],
            ],
        };
        let p = ChartParams {
            graph: Some(spec.clone()),
            ..Default::default()
        };
        match catalog("graph", &p) {
            Err(Error::ChartRejected { what, residual, .. }) => {
                assert_eq!(what, "conformality");
                // <F_z, F_z> = (|f_u|^2 - |f_v|^2)/4 = (1/2 - 2)/4
                assert_abs_diff_eq!(residual, 0.375, epsilon = 1e-12);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        let mut ok = spec;
        for comp in ok.components[2..].iter_mut() {
            comp[0].kv = 1.0;
        }
        ok.domain.v = [0.0, 2.0 * PI];
        let p = ChartParams {
            graph: Some(ok),
            ..Default::default()
        };
        assert!(catalog("graph", &p).is_ok());
    }

    #[test]
    fn nonspherical_graph_is_rejected() {
        let spec = GraphSpec {
            domain: Domain::new([0.0, 1.0], [0.0, 1.0], [false, false]),
            components: vec![
                vec![TrigTerm { coeff: 2.0, ku: 1.0, kv: 0.0, kind: TrigKind::Cos }],
                vec![TrigTerm { coeff: 1.0, ku: 1.0, kv: 0.0, kind: TrigKind::Sin }],
                vec![TrigTerm { coeff: 1.0, ku: 0.0, kv: 1.0, kind: TrigKind::Cos }],
                vec![TrigTerm { coeff: 1.0, ku: 0.0, kv: 1.0, kind: TrigKind::Sin }],
            ],
        };
        let p = ChartParams {
            graph: Some(spec),
            ..Default::default()
        };
        assert!(matches!(
            catalog("graph", &p),
            Err(Error::ChartRejected { what: "sphericity", .. })
        ));
    }

    #[test]
    fn ambient_padding() {
        let p = ChartParams {
            ambient: Some(5),
            ..Default::default()
        };
        let ch = catalog("clifford", &p).unwrap();
        assert_eq!(ch.n, 5);
        assert_eq!(ch.point(0.1, 0.2).unwrap().len(), 6);
        assert!(catalog("veronese", &ChartParams { ambient: Some(3), ..Default::default() }).is_err());
    }

    #[test]
    fn canonical_lift_is_mobius_covariant() {
        let ch = catalog("veronese", &ChartParams::default()).unwrap();
        let t = random_lorentz(11, ch.n);
        let moved = ch.transformed(&t).unwrap();
        let (u, v) = (0.25, -0.4);
        let a = t.apply(&chart_lift(&ch, u, v, 4).unwrap());
        let b = chart_lift(&moved, u, v, 4).unwrap();
        assert!(a.sub(&b).sup_norm() < 1e-11 * (1.0 + a.sup_norm()));
    }

    #[test]
    fn reparametrization_scales_the_lift() {
        // Y'(w) = Y(a w) / |a| keeps |dY'|^2 = |dw|^2
        let ch = catalog("perturbed-clifford", &ChartParams::default()).unwrap();
        for a in [c(2.0), Complex64::new(0.0, 1.0)] {
            let re = ch.reparametrized(a).unwrap();
            let w = Complex64::new(0.3, 0.1);
            let z = a * w;
            let y0 = chart_lift(&ch, z.re, z.im, 2).unwrap().value();
            let y1 = chart_lift(&re, w.re, w.im, 2).unwrap().value();
            for (p, q) in y1.comps.iter().zip(&y0.comps) {
                assert_abs_diff_eq!(p.re, q.re / a.norm(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sampled_surface_reproduces_chart() {
        let grid = GridSpec::new(40, 40).unwrap();
        for name in ["clifford", "sphere"] {
            let ch = catalog(name, &ChartParams::default()).unwrap();
            let s = SampledSurface::sample(&ch, &grid).unwrap();
            let re = s.to_chart("resampled").unwrap();
            let (u, v) = (0.37, 0.41);
            let a = ch.eval(u, v, 3).unwrap();
            let b = re.eval(u, v, 3).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).sup_norm() < 1e-9, "{name}: {}", (p - q).sup_norm());
            }
        }
    }

    #[test]
    fn composed_chart_jet_matches_pointwise_evaluation() {
        let ch = catalog("veronese", &ChartParams::default()).unwrap();
        let jets = ch.eval(0.2, 0.6, 4).unwrap();
        // direct formula at the point
        let (u, v) = (0.2f64, 0.6f64);
        let d = 1.0 + u * u + v * v;
        let (x, y, z) = (2.0 * u / d, 2.0 * v / d, (1.0 - u * u - v * v) / d);
        let r3 = 3f64.sqrt();
        let direct = [
            r3 * x * y,
            r3 * x * z,
            r3 * y * z,
            0.5 * r3 * (x * x - y * y),
            0.5 * (2.0 * z * z - x * x - y * y),
        ];
        for (j, e) in jets.iter().zip(direct) {
            assert_abs_diff_eq!(j.value().re, e, epsilon = 1e-14);
        }
    }
}
