//! Conformal invariants of a single surface.
//!
//! Given a canonical lift `Y`, the frame `{Y, Y_z, Y_zbar, N}` spans the
//! mean curvature sphere. Hill's equation `Y_zz + (s/2) Y = kappa` defines the
//! Schwarzian `s` and the normal-valued Hopf differential `kappa`; all
//! residuals below are evaluated from exact jet derivatives.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{chart_lift, SurfaceChart};
use crate::error::{Error, Result};
use crate::grid::{integrate, GridPoint, GridSpec};
use crate::jet::{Jet2, JetVec};
use crate::lorentz::{CLorentzVec, NullFrame, Vector};
use crate::tolerances;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frame, Schwarzian, Hopf differential and normal basis at one point.
///
/// Orders: `Y` keeps the input order `K`, `Y_z` and `Y_zbar` have `K - 1`,
/// and `N`, `kappa`, `s` and the normal basis have `K - 2`.
#[derive(Clone, Debug)]
pub struct FramePoint {
    pub frame: NullFrame<Jet2>,
    pub kappa: JetVec,
    pub s: Jet2,
    /// Real orthonormal basis of `V^perp`.
    pub normal_basis: Vec<JetVec>,
}

/// Named sup-norm residuals, merged by maximum.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub entries: BTreeMap<String, f64>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the larger of the stored and the new value.
    pub fn record(&mut self, name: &str, value: f64) {
        let v = if value.is_nan() { f64::INFINITY } else { value };
        let e = self.entries.entry(name.to_string()).or_insert(0.0);
        *e = e.max(v);
    }

    pub fn merge(&mut self, other: &ResidualReport) {
        for (k, v) in &other.entries {
            self.record(k, *v);
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn max(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    /// Names whose residual exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, v)| !(**v <= tol))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// `sqrt |<v, conj v>|`, the norm of a vector in a definite subspace.
pub fn herm_norm(v: &CLorentzVec) -> f64 {
    v.herm_sq().norm().sqrt()
}

fn gram_schmidt_normal(frame: &NullFrame<Jet2>) -> Result<Vec<JetVec>> {
    let dim = frame.y.dim();
    let order = frame.n.order();
    let mut basis: Vec<JetVec> = Vec::new();
    let mut used = vec![false; dim];
    for _ in 0..dim.saturating_sub(4) {
        // pick the coordinate axis with the largest remaining normal component
        let mut best: Option<(f64, usize, JetVec)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut e = vec![Jet2::zero(order); dim];
            e[i] = Jet2::constant(order, 1.0);
            let mut w = frame.normal_part(&Vector::new(e));
            for b in &basis {
                w = w.sub(&b.times(&w.inner(b)));
            }
            let size = w.inner(&w).value().re;
            if best.as_ref().is_none_or(|(s, _, _)| size > *s) {
                best = Some((size, i, w));
            }
        }
        let (size, i, w) = best.ok_or(Error::DegenerateSpan("normal bundle"))?;
        if size < 1e-6 {
            return Err(Error::DegenerateSpan("normal bundle"));
        }
        used[i] = true;
        let inv = w.inner(&w).try_rsqrt()?;
        basis.push(w.times(&inv));
    }
    Ok(basis)
}

/// Builds the frame of a canonical lift of order at least 2.
pub fn frame_at(y: &JetVec) -> Result<FramePoint> {
    frame_at_with(y, tolerances::FRAME_GRAM)
}

/// [`frame_at`] with an explicit Gram tolerance, for lifts of interpolated
/// charts whose conformality is only as good as the interpolation.
pub fn frame_at_with(y: &JetVec, gram_tol: f64) -> Result<FramePoint> {
    let yz = y.dz()?;
    let yzb = y.dzb()?;
    let yzz = yz.dz()?;
    let yzzb = yz.dzb()?;
    let two = Complex64::new(2.0, 0.0);
    // N = 2 Y_zzbar + 2 <Y_zzbar, Y_zzbar> Y
    let n = yzzb
        .scaled(two)
        .add(&y.times(&yzzb.inner(&yzzb).scale(two)));
    // <Y, N> = -1 and <kappa, N> = 0 turn Hill's equation into s = 2 <Y_zz, N>
    let s = yzz.inner(&n).scale(two);
    let kappa = yzz.add(&y.times(&s.scale(0.5)));
    let frame = NullFrame { y: y.clone(), yz, yzb, n };
    let residual = frame.gram_residual();
    if !(residual <= gram_tol) {
        return Err(Error::FrameGram {
            residual,
            tol: gram_tol,
        });
    }
    let normal_basis = gram_schmidt_normal(&frame)?;
    Ok(FramePoint {
        frame,
        kappa,
        s,
        normal_basis,
    })
}

/// Frame of a chart point; `order` counts derivatives of `Y`.
pub fn frame_at_chart(chart: &SurfaceChart, u: f64, v: f64, order: usize) -> Result<FramePoint> {
    frame_at(&chart_lift(chart, u, v, order)?)
}

/// Direction of a normal covariant derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Z,
    Zbar,
}

/// `D_z psi` or `D_zbar psi`: the normal part of the ambient derivative.
pub fn normal_d(psi: &JetVec, fp: &FramePoint, dir: Direction) -> Result<JetVec> {
    let residual = fp.frame.normality_defect(psi);
    if residual > tolerances::FRAME_GRAM * 10.0 {
        return Err(Error::NotNormal { residual });
    }
    Ok(fp.d(psi, dir)?)
}

impl FramePoint {
    /// Normal derivative without the normality check.
    pub fn d(&self, psi: &JetVec, dir: Direction) -> Result<JetVec> {
        let raw = match dir {
            Direction::Z => psi.dz()?,
            Direction::Zbar => psi.dzb()?,
        };
        Ok(self.frame.normal_part(&raw))
    }

    pub fn y(&self) -> &JetVec {
        &self.frame.y
    }

    pub fn n(&self) -> &JetVec {
        &self.frame.n
    }

    /// `<kappa, conj kappa>` at the point.
    pub fn kappa_sq(&self) -> f64 {
        self.kappa.herm_sq().value().re
    }

    pub fn is_umbilic(&self) -> bool {
        self.kappa_sq() < tolerances::UMBILIC
    }

    /// Pointwise values of the frame vectors.
    pub fn value_frame(&self) -> NullFrame<Complex64> {
        NullFrame {
            y: self.frame.y.value(),
            yz: self.frame.yz.value(),
            yzb: self.frame.yzb.value(),
            n: self.frame.n.value(),
        }
    }

    /// `D_zbar kappa`.
    pub fn dzb_kappa(&self) -> Result<JetVec> {
        self.d(&self.kappa, Direction::Zbar)
    }

    /// Willmore operator `D_zbar D_zbar kappa + (conj s / 2) kappa`, for a
    /// Hopf differential scaled by `lambda`.
    fn willmore_vector(&self, lambda: Complex64) -> Result<CLorentzVec> {
        let dk = self.dzb_kappa()?;
        let ddk = self.d(&dk, Direction::Zbar)?.value();
        let k = self.kappa.value();
        let sb = self.s.value().conj();
        Ok(ddk.add(&k.scaled(sb * 0.5)).scaled(lambda))
    }
}

/// `|D_zbar D_zbar kappa + (conj s / 2) kappa|` in the normal metric.
pub fn willmore_residual(fp: &FramePoint) -> Result<f64> {
    Ok(herm_norm(&fp.willmore_vector(Complex64::new(1.0, 0.0))?))
}

fn frame_rows(fp: &FramePoint, report: &mut ResidualReport) {
    let f = fp.value_frame();
    let (y, yz, yzb) = (&f.y, &f.yz, &f.yzb);
    report.record("nullity", y.inner(y).norm());
    report.record("conformality", yz.inner(yz).norm());
    report.record(
        "normalization",
        (yz.inner(yzb) - Complex64::new(0.5, 0.0)).norm(),
    );
    report.record("frame_gram", fp.frame.gram_residual());
    let k = fp.kappa.value();
    let mut recon = k.clone();
    let mut basis_defect: f64 = 0.0;
    for (a, pa) in fp.normal_basis.iter().enumerate() {
        let p = pa.value();
        recon = recon.sub(&p.scaled(k.inner(&p)));
        basis_defect = basis_defect.max(fp.frame.normality_defect(pa));
        for pb in &fp.normal_basis[a..] {
            let target = if std::ptr::eq(pa, pb) { 1.0 } else { 0.0 };
            basis_defect = basis_defect.max((pb.value().inner(&p) - target).norm());
        }
    }
    let hill = fp
        .frame
        .normality_defect(&fp.kappa)
        .max(recon.coord_norm())
        .max(basis_defect);
    report.record("hill", hill);
}

/// Frame relations, the four structure-equation rows and the Gauss,
/// Codazzi and Ricci integrability residuals.
pub fn structure_residuals(fp: &FramePoint) -> Result<ResidualReport> {
    let mut report = ResidualReport::new();
    frame_rows(fp, &mut report);
    let fr = &fp.frame;
    let v = fp.value_frame();
    let k = fp.kappa.value();
    let s = fp.s.value();
    let kk = fp.kappa_sq();
    let dzb_kappa = fp.dzb_kappa()?;
    let dk = dzb_kappa.value();

    let yzz = fr.yz.dz()?.value();
    let row = yzz.sub(&v.y.scaled(-s * 0.5).add(&k));
    report.record("struct_yzz", row.coord_norm());

    let yzzb = fr.yz.dzb()?.value();
    let row = yzzb.sub(&v.y.scaled(Complex64::from(-kk)).add(&v.n.scaled(0.5.into())));
    report.record("struct_yzzb", row.coord_norm());

    let nz = fr.n.dz()?.value();
    let expect = v
        .yz
        .scaled(Complex64::from(-2.0 * kk))
        .add(&v.yzb.scaled(-s))
        .add(&dk.scaled(2.0.into()));
    report.record("struct_nz", nz.sub(&expect).coord_norm());

    let mut psi_row: f64 = 0.0;
    let mut ricci: f64 = 0.0;
    let kb = fp.kappa.conj();
    for psi in &fp.normal_basis {
        let pz = psi.dz()?.value();
        let dpsi = fp.d(psi, Direction::Z)?;
        let p = psi.value();
        let expect = dpsi
            .value()
            .add(&v.y.scaled(p.inner(&dk) * 2.0))
            .add(&v.yzb.scaled(p.inner(&k) * -2.0));
        psi_row = psi_row.max(pz.sub(&expect).coord_norm());

        let lhs = fp
            .d(&dpsi, Direction::Zbar)?
            .sub(&fp.d(&fp.d(psi, Direction::Zbar)?, Direction::Z)?)
            .value();
        let kbv = kb.value();
        let rhs = kbv
            .scaled(p.inner(&k) * 2.0)
            .sub(&k.scaled(p.inner(&kbv) * 2.0));
        ricci = ricci.max(herm_norm(&lhs.sub(&rhs)));
    }
    report.record("struct_psiz", psi_row);
    report.record("ricci", ricci);

    // 1/2 s_zbar = 3 <D_z conj kappa, kappa> + <conj kappa, D_z kappa>
    let dz_kb = fp.d(&kb, Direction::Z)?.value();
    let dz_k = fp.d(&fp.kappa, Direction::Z)?.value();
    let gauss = fp.s.dzb()?.value() * 0.5 - dz_kb.inner(&k) * 3.0 - kb.value().inner(&dz_k);
    report.record("gauss", gauss.norm());

    let w = fp.willmore_vector(Complex64::new(1.0, 0.0))?;
    report.record("codazzi", herm_norm(&imag_part(&w)));
    Ok(report)
}

/// `(w - conj w) / 2i`.
fn imag_part(w: &CLorentzVec) -> CLorentzVec {
    w.sub(&w.conj()).scaled(-0.5 * I)
}

/// Gauss, Codazzi, Ricci and Willmore residuals with `kappa` replaced by
/// `lambda kappa` and `s` kept.
///
/// The substitution is algebraic: covariant derivatives of `lambda kappa`
/// are `lambda` times those of `kappa`.
pub fn associated_family_residual(fp: &FramePoint, lambda: Complex64) -> Result<ResidualReport> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitary(lambda.norm()));
    }
    let lb = lambda.conj();
    let k = fp.kappa.value().scaled(lambda);
    let kb = fp.kappa.conj().value().scaled(lb);
    let dz_kb = fp.d(&fp.kappa.conj(), Direction::Z)?.value().scaled(lb);
    let dz_k = fp.d(&fp.kappa, Direction::Z)?.value().scaled(lambda);
    let mut report = ResidualReport::new();
    let gauss = fp.s.dzb()?.value() * 0.5 - dz_kb.inner(&k) * 3.0 - kb.inner(&dz_k);
    report.record("gauss", gauss.norm());
    let w = fp.willmore_vector(lambda)?;
    report.record("codazzi", herm_norm(&imag_part(&w)));
    report.record("willmore", herm_norm(&w));
    let mut ricci: f64 = 0.0;
    for psi in &fp.normal_basis {
        let lhs = fp
            .d(&fp.d(psi, Direction::Z)?, Direction::Zbar)?
            .sub(&fp.d(&fp.d(psi, Direction::Zbar)?, Direction::Z)?)
            .value();
        let p = psi.value();
        let rhs = kb.scaled(p.inner(&k) * 2.0).sub(&k.scaled(p.inner(&kb) * 2.0));
        ricci = ricci.max(herm_norm(&lhs.sub(&rhs)));
    }
    report.record("ricci", ricci);
    Ok(report)
}

/// `det <a_i, b_j>`, the pairing of decomposable 4-vectors.
fn blade_pairing(a: &[&CLorentzVec; 4], b: &[&CLorentzVec; 4]) -> Complex64 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i].inner(b[j]);
        }
    }
    det4(&m)
}

fn det4(m: &[[Complex64; 4]; 4]) -> Complex64 {
    let det3 = |r: [usize; 3], c: [usize; 3]| {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|c| *c != j).collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[0][j] * det3([1, 2, 3], [cols[0], cols[1], cols[2]]) * sign;
    }
    acc
}

/// Sum of decomposable 4-vectors with complex coefficients.
struct Blades {
    terms: Vec<(Complex64, [CLorentzVec; 4])>,
}

impl Blades {
    fn pairing(&self, o: &Blades) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, a) in &self.terms {
            for (d, b) in &o.terms {
                acc += c * d * blade_pairing(&[&a[0], &a[1], &a[2], &a[3]], &[&b[0], &b[1], &b[2], &b[3]]);
            }
        }
        acc
    }

    fn pair_blade(&self, b: &[&CLorentzVec; 4]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, a)| c * blade_pairing(&[&a[0], &a[1], &a[2], &a[3]], b))
            .sum()
    }
}

/// Conformal Gauss map data at a point.
#[derive(Clone, Debug)]
pub struct ConformalGauss {
    /// `Y, Y_u, Y_v, N` spanning the mean curvature sphere.
    pub span: [CLorentzVec; 4],
    /// `<kappa, conj kappa>`.
    pub kappa_sq: f64,
    /// `-(1/2) <G_z, G_zbar>`, the induced metric density; `None` at umbilics.
    ///
    /// The Gram-determinant pairing gives `<G, G> = -1`, so the positive
    /// metric carries a minus sign; this matches `W = -E(G) / 8`.
    pub metric: Option<f64>,
    /// `|<G_z, G_z>|`, zero for a conformal map.
    pub conformality: f64,
    /// Norm of the part of `G_zzbar` tangent to the Grassmannian.
    pub harmonic_residual: f64,
}

/// `G = -2i Y ^ Y_z ^ Y_zbar ^ N`, its induced metric and harmonicity.
///
/// Needs `Y` of order at least 4.
pub fn conformal_gauss(fp: &FramePoint) -> Result<ConformalGauss> {
    let f = &fp.frame;
    let factors = [&f.y, &f.yz, &f.yzb, &f.n];
    // d[k][p][q] = dz^p dzbar^q of factor k
    let mut d: Vec<[[CLorentzVec; 2]; 2]> = Vec::with_capacity(4);
    for x in factors {
        let xz = x.dz()?;
        let xzb = x.dzb()?;
        let xzzb = xz.dzb()?;
        d.push([[x.value(), xzb.value()], [xz.value(), xzzb.value()]]);
    }
    let c = -2.0 * I;
    let build = |sel: &dyn Fn(usize) -> (usize, usize)| -> [CLorentzVec; 4] {
        std::array::from_fn(|k| {
            let (p, q) = sel(k);
            d[k][p][q].clone()
        })
    };
    let mut gz = Blades { terms: vec![] };
    let mut gzb = Blades { terms: vec![] };
    let mut gzzb = Blades { terms: vec![] };
    for a in 0..4 {
        gz.terms.push((c, build(&|k| if k == a { (1, 0) } else { (0, 0) })));
        gzb.terms.push((c, build(&|k| if k == a { (0, 1) } else { (0, 0) })));
        for b in 0..4 {
            gzzb.terms.push((
                c,
                build(&|k| {
                    let p = usize::from(k == a);
                    let q = usize::from(k == b);
                    (p, q)
                }),
            ));
        }
    }
    let kappa_sq = fp.kappa_sq();
    let metric = if kappa_sq < tolerances::UMBILIC {
        None
    } else {
        Some(-0.5 * gz.pairing(&gzb).re)
    };
    let conformality = gz.pairing(&gz).norm();

    let v = fp.value_frame();
    let r = FRAC_1_SQRT_2;
    let e = [
        v.y.add(&v.n).scaled(r.into()),
        v.y.sub(&v.n).scaled(r.into()),
        v.yz.add(&v.yzb),
        v.yz.sub(&v.yzb).scaled(I),
    ];
    let mut sq = 0.0;
    for psi in &fp.normal_basis {
        let p = psi.value();
        for skip in 0..4 {
            let rest: Vec<&CLorentzVec> = (0..4).filter(|i| *i != skip).map(|i| &e[i]).collect();
            sq += gzzb.pair_blade(&[&p, rest[0], rest[1], rest[2]]).norm_sqr();
        }
    }
    Ok(ConformalGauss {
        span: [v.y.clone(), e[2].clone(), e[3].clone(), v.n.clone()],
        kappa_sq,
        metric,
        conformality,
        harmonic_residual: sq.sqrt(),
    })
}

/// All single-surface residuals at one frame point.
pub fn point_report(fp: &FramePoint) -> Result<ResidualReport> {
    let mut r = structure_residuals(fp)?;
    r.record("willmore", willmore_residual(fp)?);
    let g = conformal_gauss(fp)?;
    r.record("gauss_map_harmonic", g.harmonic_residual);
    if let Some(m) = g.metric {
        r.record("gauss_map_metric", (m - g.kappa_sq).abs());
    }
    Ok(r)
}

/// Evaluates `f` at every lattice point of the chart, preserving lattice order.
pub fn sweep<T: Send>(
    chart: &SurfaceChart,
    grid: &GridSpec,
    f: impl Fn(&GridPoint) -> Result<T> + Sync,
) -> Vec<(GridPoint, Result<T>)> {
    grid.points(&chart.domain)
        .into_par_iter()
        .map(|p| {
            let r = f(&p);
            (p, r)
        })
        .collect()
}

/// Sup-norm report over a grid; fails on the first point that cannot be framed.
pub fn chart_report(chart: &SurfaceChart, grid: &GridSpec, order: usize) -> Result<ResidualReport> {
    let mut report = ResidualReport::new();
    for (_, r) in sweep(chart, grid, |p| point_report(&frame_at_chart(chart, p.u, p.v, order)?)) {
        report.merge(&r?);
    }
    Ok(report)
}

/// `W = int <kappa, conj kappa> du dv` by tensor quadrature.
///
/// The grid must resolve the chart; the quadrature is spectrally accurate
/// on periodic axes and fourth order otherwise.
pub fn willmore_energy(chart: &SurfaceChart, grid: &GridSpec) -> Result<f64> {
    let results = sweep(chart, grid, |p| {
        Ok(frame_at_chart(chart, p.u, p.v, 2)?.kappa_sq())
    });
    let mut pts = Vec::with_capacity(results.len());
    let mut vals = Vec::with_capacity(results.len());
    for (p, r) in results {
        pts.push(p);
        vals.push(r?);
    }
    Ok(integrate(&pts, &vals))
}
