//! The point-pair map `H = Y ^ Yhat` into the Grassmannian of Minkowski
//! 2-planes.
//!
//! With `<Y, Yhat> = -1` the bivector satisfies `<H, H> = -1`, and its first
//! fundamental form is `theta dz^2 + (rho + conj rho)/2 (dz dzbar + dzbar dz)
//! + conj(theta) dzbar^2`. Variations preserving the normalization are
//! `w ^ Yhat + Y ^ w'` with `w, w'` orthogonal to the plane `H`, so
//! harmonicity is the vanishing of `<w ^ Yhat + Y ^ w', H_zzbar>` for all
//! such `w, w'`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridPoint;
use crate::invariants::FramePoint;
use crate::jet::JetVec;
use crate::lorentz::{Bivector, BivectorSum, CLorentzVec};
use crate::pair::{normalize_pair, pair_invariants, PairPoint};

type Biv = Bivector<Complex64>;
type BivSum = BivectorSum<Complex64>;

/// First-order data of `H` at a point.
#[derive(Clone, Debug, Serialize)]
pub struct PairMapPoint {
    #[serde(skip)]
    pub h: Biv,
    pub hz_hz: Complex64,
    pub hz_hzb: f64,
    /// `|<H_z, H>|`; `H_z` is tangent to the quadric `<H, H> = -1`.
    pub tangential_defect: f64,
    /// `|<H, H> + 1|`.
    pub norm_defect: f64,
    /// `|<H_z, H_z> - theta|` against the pair invariants.
    pub theta_defect: f64,
    /// `|<H_z, H_zbar> - (rho + conj rho)/2|`.
    pub rho_defect: f64,
}

/// `H_z = Y_z ^ Yhat + Y ^ Yhat_z` as pointwise values.
pub fn h_z(y: &JetVec, yhat: &JetVec) -> Result<BivSum> {
    Ok(BivectorSum::new(vec![
        Bivector::wedge(y.dz()?.value(), yhat.value()),
        Bivector::wedge(y.value(), yhat.dz()?.value()),
    ]))
}

fn h_zb(y: &JetVec, yhat: &JetVec) -> Result<BivSum> {
    Ok(BivectorSum::new(vec![
        Bivector::wedge(y.dzb()?.value(), yhat.value()),
        Bivector::wedge(y.value(), yhat.dzb()?.value()),
    ]))
}

/// `H_zzbar = Y_zzbar ^ Yhat + Y_z ^ Yhat_zbar + Y_zbar ^ Yhat_z + Y ^ Yhat_zzbar`.
pub fn h_zzb(y: &JetVec, yhat: &JetVec) -> Result<BivSum> {
    let (yz, yzb) = (y.dz()?, y.dzb()?);
    let (hz, hzb) = (yhat.dz()?, yhat.dzb()?);
    Ok(BivectorSum::new(vec![
        Bivector::wedge(yz.dzb()?.value(), yhat.value()),
        Bivector::wedge(yz.value(), hzb.value()),
        Bivector::wedge(yzb.value(), hz.value()),
        Bivector::wedge(y.value(), hz.dzb()?.value()),
    ]))
}

/// Fundamental-form identities of `H` against the pair invariants.
pub fn pairmap_fundamental(y: &JetVec, yhat: &JetVec, pp: &PairPoint) -> Result<PairMapPoint> {
    let h = Bivector::wedge(y.value(), yhat.value());
    let hz = h_z(y, yhat)?;
    let hzb = h_zb(y, yhat)?;
    let hz_hz = hz.pairing(&hz);
    let hz_hzb_c = hz.pairing(&hzb);
    let hsum = BivectorSum::new(vec![h.clone()]);
    let rho = pp.rho.value();
    Ok(PairMapPoint {
        tangential_defect: hz.pairing(&hsum).norm(),
        norm_defect: (h.pairing(&h) + 1.0).norm(),
        theta_defect: (hz_hz - pp.theta.value()).norm(),
        rho_defect: (hz_hzb_c - (rho + rho.conj()) * 0.5).norm(),
        hz_hz,
        hz_hzb: hz_hzb_c.re,
        h,
    })
}

/// Orthonormal real basis of the complement of `span{Y, Yhat}`, from the
/// projected coordinate axes. The complement is spacelike.
pub fn variation_basis(y: &CLorentzVec, yhat: &CLorentzVec) -> Result<Vec<CLorentzVec>> {
    let dim = y.dim();
    let c = y.inner(yhat);
    if c.norm() < 1e-12 {
        return Err(Error::CoincidentPoints { value: c.norm() });
    }
    let mut basis: Vec<CLorentzVec> = Vec::with_capacity(dim - 2);
    let mut used = vec![false; dim];
    for _ in 0..dim - 2 {
        let mut best: Option<(f64, usize, CLorentzVec)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut e = CLorentzVec::zeros(dim);
            e.comps[i] = Complex64::new(1.0, 0.0);
            let mut w = plane_complement(&e, y, yhat);
            for b in &basis {
                w = w.sub(&b.scaled(w.inner(b)));
            }
            let size = w.inner(&w).re;
            if best.as_ref().is_none_or(|(s, _, _)| size > *s) {
                best = Some((size, i, w));
            }
        }
        let (size, i, w) = best.ok_or(Error::DegenerateSpan("pair plane complement"))?;
        if size < 1e-10 {
            return Err(Error::DegenerateSpan("pair plane complement"));
        }
        used[i] = true;
        basis.push(w.scaled(Complex64::new(1.0 / size.sqrt(), 0.0)));
    }
    Ok(basis)
}

/// Component of `x` orthogonal to `span{Y, Yhat}` for null `Y`, `Yhat`.
fn plane_complement(x: &CLorentzVec, y: &CLorentzVec, yhat: &CLorentzVec) -> CLorentzVec {
    let c = y.inner(yhat);
    // x - (<x,Yhat> Y + <x,Y> Yhat) / <Y,Yhat>
    x.sub(&y.scaled(x.inner(yhat) / c).add(&yhat.scaled(x.inner(y) / c)))
}

/// Unit-norm admissible variations split by sign: `(e ^ Yhat + Y ^ e)/sqrt 2`
/// has square `+1`, `(e ^ Yhat - Y ^ e)/sqrt 2` has square `-1`, and
/// distinct members are orthogonal.
pub fn variation_frame(y: &CLorentzVec, yhat: &CLorentzVec, basis: &[CLorentzVec]) -> Vec<(BivSum, f64)> {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut out = Vec::with_capacity(2 * basis.len());
    for e in basis {
        let a = Bivector::wedge(e.scaled(s), yhat.clone());
        let b = Bivector::wedge(y.clone(), e.scaled(s));
        out.push((BivectorSum::new(vec![a.clone(), b.clone()]), 1.0));
        let neg = Bivector::wedge(y.clone(), e.scaled(-s));
        out.push((BivectorSum::new(vec![a, neg]), -1.0));
    }
    out
}

/// Pairings of `x` with the variation frame.
pub fn admissible_coefficients(x: &BivSum, frame: &[(BivSum, f64)]) -> Vec<Complex64> {
    frame.iter().map(|(v, _)| v.pairing(x)).collect()
}

/// Orthogonal projection of `x` onto the admissible variations in the
/// indefinite bivector metric, block by definite block.
pub fn admissible_projection(x: &BivSum, frame: &[(BivSum, f64)]) -> BivSum {
    let mut terms = Vec::new();
    for (v, sign) in frame {
        let c = v.pairing(x) * *sign;
        for t in &v.terms {
            terms.push(Bivector::wedge(t.a.scaled(c), t.b.clone()));
        }
    }
    BivectorSum::new(terms)
}

/// Norm of the admissible projection of `H_zzbar`: Euclidean norm of its
/// coefficients in the variation frame. Zero iff `<Hdot, H_zzbar> = 0` for
/// every admissible `Hdot`.
pub fn harmonic_residual(y: &JetVec, yhat: &JetVec) -> Result<f64> {
    let (yv, hv) = (y.value(), yhat.value());
    let basis = variation_basis(&yv, &hv)?;
    let frame = variation_frame(&yv, &hv, &basis);
    let c = admissible_coefficients(&h_zzb(y, yhat)?, &frame);
    Ok(c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// `E(H) = int <dH ^ *dH> = 2 int (rho + conj rho) du dv` by the lattice
/// quadrature weights.
pub fn pair_energy(points: &[GridPoint], rho: &[Complex64]) -> Complex64 {
    points
        .iter()
        .zip(rho)
        .map(|(p, r)| (r + r.conj()) * (2.0 * p.weight))
        .sum()
}

/// Second lift `|xi|^2/2 Y + N + xi` with `xi = eps psi` for the first normal
/// basis vector `psi`: normalized, but off the mean curvature sphere.
pub fn perturbed_pair(fp: &FramePoint, eps: f64) -> Result<JetVec> {
    let psi = fp
        .normal_basis
        .first()
        .ok_or(Error::DegenerateSpan("normal bundle"))?;
    let xi = psi.scaled(Complex64::new(eps, 0.0));
    let raw = fp
        .y()
        .times(&xi.inner(&xi).scale(0.5))
        .add(fp.n())
        .add(&xi);
    normalize_pair(fp.y(), &raw)
}

/// Riesz vectors of `w -> <w ^ Yhat, X>` and `w' -> <Y ^ w', X>` restricted
/// to the plane complement; an independent route to the residual.
pub fn riesz_residual(x: &BivSum, y: &CLorentzVec, yhat: &CLorentzVec) -> f64 {
    let a = plane_complement(&x.contract_first(yhat).neg(), y, yhat);
    let b = plane_complement(&x.contract_first(y), y, yhat);
    (a.herm_sq().re + b.herm_sq().re).max(0.0).sqrt()
}

/// Pair invariants, fundamental-form identities and harmonicity at a point.
#[derive(Clone, Debug, Serialize)]
pub struct PairMapSample {
    pub theta: Complex64,
    pub rho: Complex64,
    pub fundamental: PairMapPoint,
    pub harmonic_residual: f64,
}

/// Evaluates a normalized pair; `yhat` needs jet order 2.
pub fn pairmap_at(fp: &FramePoint, yhat: &JetVec) -> Result<PairMapSample> {
    let pp = pair_invariants(fp, yhat)?;
    Ok(PairMapSample {
        theta: pp.theta.value(),
        rho: pp.rho.value(),
        fundamental: pairmap_fundamental(fp.y(), yhat, &pp)?,
        harmonic_residual: harmonic_residual(fp.y(), yhat)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::{adjoint_point, mu_swillmore, AdjointField, BranchSpec, HillPolynomial};
    use crate::chart::{catalog, ChartParams};
    use crate::grid::GridSpec;
    use crate::invariants::{frame_at_chart, willmore_residual};
    use crate::lorentz::random_lorentz;
    use crate::pair::{ChartPair, PairSample};
    use crate::tolerances;
    use std::f64::consts::PI;

    const K: usize = tolerances::DEFAULT_ORDER - 1;
    const KA: usize = tolerances::ADJOINT_ORDER;

    fn chart(name: &str) -> crate::chart::SurfaceChart {
        catalog(name, &ChartParams::default()).unwrap()
    }

    #[test]
    fn clifford_adjoint_pair_is_conformal_and_harmonic() {
        let fp = frame_at_chart(&chart("clifford"), 0.8, 2.5, K).unwrap();
        let s = pairmap_at(&fp, fp.n()).unwrap();
        let f = &s.fundamental;
        assert!(f.hz_hz.norm() < 1e-13);
        assert!((f.hz_hzb + 0.25).abs() < 1e-13);
        assert!(f.norm_defect < 1e-13 && f.tangential_defect < 1e-13);
        assert!(f.theta_defect < 1e-13 && f.rho_defect < 1e-13);
        assert!(s.harmonic_residual < 1e-12, "{}", s.harmonic_residual);
    }

    #[test]
    fn fundamental_form_identities_hold_for_arbitrary_pairs() {
        let mut nonconformal = 0;
        for seed in 20..40 {
            let (pair, u, v) = ChartPair::random(seed).unwrap();
            let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
            let s = pairmap_at(&frame, &yhat).unwrap();
            let f = &s.fundamental;
            assert!(f.theta_defect < 1e-10 && f.rho_defect < 1e-10, "seed {seed}: {f:?}");
            assert!(f.norm_defect < 1e-12 && f.tangential_defect < 1e-10);
            if s.theta.norm() > 1e-3 {
                nonconformal += 1;
            }
            let sw = pair.swapped_at(u, v, K).unwrap();
            let t = pairmap_at(&sw.frame, &sw.yhat).unwrap();
            assert!((t.fundamental.hz_hzb - f.hz_hzb).abs() < 1e-10 * (1.0 + f.hz_hzb.abs()));
        }
        assert!(nonconformal > 10);
    }

    #[test]
    fn projection_is_idempotent_and_frame_independent() {
        let (pair, u, v) = ChartPair::random(5).unwrap();
        let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
        let (y, yh) = (frame.y().value(), yhat.value());
        let x = h_zzb(frame.y(), &yhat).unwrap();
        let basis = variation_basis(&y, &yh).unwrap();
        let vf = variation_frame(&y, &yh, &basis);
        let c1 = admissible_coefficients(&x, &vf);
        let c2 = admissible_coefficients(&admissible_projection(&x, &vf), &vf);
        for (a, b) in c1.iter().zip(&c2) {
            assert!((a - b).norm() < 1e-11);
        }
        let norm = |c: &[Complex64]| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // rotate the first two basis vectors of the plane complement
        let (cs, sn) = (0.6f64, 0.8f64);
        let mut rotated = basis.clone();
        rotated[0] = basis[0].scaled(cs.into()).add(&basis[1].scaled(sn.into()));
        rotated[1] = basis[0].scaled((-sn).into()).add(&basis[1].scaled(cs.into()));
        let c3 = admissible_coefficients(&x, &variation_frame(&y, &yh, &rotated));
        assert!((norm(&c1) - norm(&c3)).abs() < 1e-11);
        assert!((norm(&c1) - riesz_residual(&x, &y, &yh)).abs() < 1e-11);
    }

    #[test]
    fn veronese_adjoint_pairs_are_harmonic() {
        for (u, v) in [(0.2, -0.3), (-0.7, 0.6)] {
            let fp = frame_at_chart(&chart("veronese"), u, v, KA).unwrap();
            let ap = adjoint_point(&fp, &mu_swillmore(&fp).unwrap()).unwrap();
            let s = pairmap_at(&fp, &ap.yhat).unwrap();
            assert!(s.harmonic_residual < 1e-8 && s.theta.norm() < 1e-10);
            let y1 = HillPolynomial::default().eval(u, v, KA);
            let mu = crate::adjoint::mu_from_hill(&fp, &y1).unwrap().mu;
            let ap = adjoint_point(&fp, &mu).unwrap();
            assert!(harmonic_residual(fp.y(), &ap.yhat).unwrap() < 1e-8);
        }
    }

    #[test]
    fn off_sphere_perturbation_breaks_harmonicity() {
        // the admissible variation Y ^ xi has frame norm |xi| = eps and pairs
        // with H_zzbar to -<xi,xi>/2, so the residual is at least eps/2
        let fp = frame_at_chart(&chart("clifford"), 1.1, 0.4, K).unwrap();
        for eps in [0.02, 0.05, 0.1] {
            let yhat = perturbed_pair(&fp, eps).unwrap();
            let r = harmonic_residual(fp.y(), &yhat).unwrap();
            assert!(r >= 0.5 * eps * (1.0 - 1e-9), "eps {eps}: {r:e}");
        }
        let yhat = perturbed_pair(&fp, 0.05).unwrap();
        assert!(harmonic_residual(fp.y(), &yhat).unwrap() > 1e-4);
    }

    #[test]
    fn non_willmore_mutual_sphere_pairs_are_not_harmonic() {
        // on the flat torus with unequal radii Yhat = N is a mutual mean
        // curvature sphere pair, but the base is not Willmore
        let ch = chart("perturbed-clifford");
        let fp = frame_at_chart(&ch, 0.3, 0.9, K).unwrap();
        let w = willmore_residual(&fp).unwrap();
        let r = harmonic_residual(fp.y(), fp.n()).unwrap();
        assert!(w > 1e-3);
        assert!(r > 0.1 * w, "willmore {w:e}, harmonic {r:e}");
    }

    #[test]
    fn clifford_pair_energy() {
        let ch = chart("clifford");
        let g = GridSpec::new(12, 12).unwrap();
        let f = AdjointField::build(&ch, &g, &BranchSpec::Swillmore).unwrap();
        let rho: Vec<Complex64> = f.adjoint.iter().map(|a| a.as_ref().unwrap().rho.value()).collect();
        let pts = g.points(&ch.domain);
        let e = pair_energy(&pts, &rho);
        assert!((e.re + 4.0 * PI * PI).abs() < 1e-9, "{e}");
        assert!(e.im.abs() < 1e-12);

        let moved = ch.transformed(&random_lorentz(17, 3)).unwrap();
        let f2 = AdjointField::build(&moved, &g, &BranchSpec::Swillmore).unwrap();
        let rho2: Vec<Complex64> = f2.adjoint.iter().map(|a| a.as_ref().unwrap().rho.value()).collect();
        assert!((pair_energy(&pts, &rho2) - e).norm() < 1e-6);
    }
}
