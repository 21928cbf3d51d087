//! Invariants of an ordered pair of conformal immersions.
//!
//! With `Y` canonical and `<Y, Yhat> = -1`, the second lift decomposes as
//! `Yhat = (|mu|^2 + <xi, xi>)/2 Y + conj(mu) Y_z + mu Y_zbar + N + xi`.
//! Differentiating gives `theta` (a (2,0)-form) and `rho` (a (1,1)-form).
//!
//! Contact elements are oriented 2-planes at a point of the light cone. The
//! complex contact element `X ^ (X1 - i X2)` is defined up to a unit complex
//! factor; the invariants below expose its phase rather than fixing it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{catalog, chart_lift, ChartParams, SurfaceChart};
use crate::error::{Error, Result};
use crate::invariants::{frame_at, Direction, FramePoint};
use crate::jet::{Jet2, JetVec};
use crate::lorentz::{random_lorentz, Bivector, CLorentzVec, LorentzVec};
use crate::tolerances;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rescales `yhat_raw` so that `<Y, Yhat> = -1` as a jet identity.
pub fn normalize_pair(y: &JetVec, yhat_raw: &JetVec) -> Result<JetVec> {
    let c = y.inner(yhat_raw);
    let value = c.value().norm();
    if value < tolerances::SAME_POINT {
        return Err(Error::CoincidentPoints { value });
    }
    let scale = c.try_recip()?.scale(-1.0);
    Ok(yhat_raw.truncated(scale.order()).times(&scale))
}

/// Pair data at one point. `mu` has the order of `Y_z`; `xi`, `theta`,
/// `rho` and `eta` lose two more, `zeta` three.
#[derive(Clone, Debug)]
pub struct PairPoint {
    /// `mu = 2 <Yhat, Y_z>`.
    pub mu: Jet2,
    /// Normal part of `Yhat`.
    pub xi: JetVec,
    pub theta: Jet2,
    pub rho: Jet2,
    pub zeta: JetVec,
    /// `eta = D_zbar kappa + (conj mu / 2) kappa`.
    pub eta: JetVec,
}

/// Decomposes a normalized second lift against the frame of `Y`.
pub fn pair_invariants(fp: &FramePoint, yhat: &JetVec) -> Result<PairPoint> {
    let f = &fp.frame;
    let defect = (f.y.inner(yhat).value() + 1.0).norm();
    if defect > 1e-10 {
        return Err(Error::Invalid(format!(
            "pair is not normalized: |<Y, Yhat> + 1| = {defect:e}"
        )));
    }
    let mu = yhat.inner(&f.yz).scale(2.0);
    let mub = mu.conj();
    let xi = f.normal_part(yhat);
    let xx = xi.inner(&xi);
    let kk = fp.kappa.inner(&fp.kappa.conj());
    let mu_z = mu.dz()?;
    let theta = &(&(&mu_z - &(&mu * &mu).scale(0.5)) - &fp.s) - &xi.inner(&fp.kappa).scale(2.0);
    let rho = &(&mub.dz()? - &kk.scale(2.0)) + &xx.scale(0.5);
    let dzb_kappa = fp.dzb_kappa()?;
    let eta = dzb_kappa.add(&fp.kappa.times(&mub.scale(0.5)));
    let zeta = fp
        .d(&xi, Direction::Z)?
        .sub(&xi.times(&mu.scale(0.5)))
        .add(&eta.scaled(2.0.into()));
    Ok(PairPoint {
        mu,
        xi,
        theta,
        rho,
        zeta,
        eta,
    })
}

impl PairPoint {
    /// Coordinate norm of `Yhat` minus its reconstruction from `(mu, xi)`.
    pub fn reconstruction_residual(&self, fp: &FramePoint, yhat: &JetVec) -> f64 {
        let f = fp.value_frame();
        let mu = self.mu.value();
        let xi = self.xi.value();
        let lam = 0.5 * (mu.norm_sqr() + xi.inner(&xi));
        let rebuilt = f
            .y
            .scaled(lam)
            .add(&f.yz.scaled(mu.conj()))
            .add(&f.yzb.scaled(mu))
            .add(&f.n)
            .add(&xi);
        rebuilt.sub(&yhat.value()).coord_norm()
    }

    /// Residual of the fundamental equation
    /// `Yhat_z = mu/2 Yhat + theta (Y_zbar + conj(mu)/2 Y) + rho (Y_z + mu/2 Y) + <xi, zeta> Y + zeta`.
    pub fn fundamental_residual(&self, fp: &FramePoint, yhat: &JetVec) -> Result<f64> {
        let f = fp.value_frame();
        let mu = self.mu.value();
        let zeta = self.zeta.value();
        let expect = yhat
            .value()
            .scaled(mu * 0.5)
            .add(&f.yzb.add(&f.y.scaled(mu.conj() * 0.5)).scaled(self.theta.value()))
            .add(&f.yz.add(&f.y.scaled(mu * 0.5)).scaled(self.rho.value()))
            .add(&f.y.scaled(self.xi.value().inner(&zeta)))
            .add(&zeta);
        Ok(yhat.dz()?.value().sub(&expect).coord_norm())
    }
}

/// `theta` and `rho` through bivector pairings of the complex contact elements.
///
/// With `<a^b, c^d> = <a,c><b,d> - <a,d><b,c>`, `<Y ^ Yhat, Y ^ Yhat> = -1`
/// and the pairings carry a factor `-2`.
pub fn bivector_invariants(fp: &FramePoint, yhat: &JetVec) -> Result<(Complex64, Complex64)> {
    let f = fp.value_frame();
    let yh = yhat.value();
    let hz = Bivector::wedge(yh.clone(), yhat.dz()?.value());
    let theta = Bivector::wedge(f.y.clone(), f.yz.clone()).pairing(&hz) * -2.0;
    let rho = Bivector::wedge(f.y, f.yzb).pairing(&hz) * -2.0;
    Ok((theta, rho))
}

/// Oriented 2-dim contact element `{X, X1, X2}` with Gram matrix `diag(0, 1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactElement {
    pub x: LorentzVec,
    pub x1: LorentzVec,
    pub x2: LorentzVec,
}

impl ContactElement {
    /// Orthonormalizes an oriented spanning pair `(a, b)` orthogonal to `x`.
    pub fn new(x: LorentzVec, a: LorentzVec, b: LorentzVec) -> Result<Self> {
        let scale = x.coords().iter().map(|c| c.abs()).fold(0.0, f64::max);
        let residual = [x.inner(&x) / scale.max(1.0), x.inner(&a), x.inner(&b)]
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max);
        if residual > 1e-10 * (1.0 + a.inner(&a).abs() + b.inner(&b).abs()) {
            return Err(Error::ContactGram { residual });
        }
        let na = a.inner(&a);
        if !(na > 1e-24) {
            return Err(Error::ContactGram { residual: na });
        }
        let x1 = a.scaled(1.0 / na.sqrt());
        let b1 = b.sub(&x1.scaled(b.inner(&x1)));
        let nb = b1.inner(&b1);
        if !(nb > 1e-24) {
            return Err(Error::ContactGram { residual: nb });
        }
        let x2 = b1.scaled(1.0 / nb.sqrt());
        Ok(ContactElement { x, x1, x2 })
    }

    /// Element with `X1 - i X2` proportional to `c`.
    pub fn from_complex(x: &CLorentzVec, c: &CLorentzVec) -> Result<Self> {
        Self::new(x.re(), c.re(), c.im().scaled(-1.0))
    }

    /// The same plane with reversed orientation.
    pub fn reversed(&self) -> Self {
        ContactElement {
            x: self.x.clone(),
            x1: self.x1.clone(),
            x2: self.x2.scaled(-1.0),
        }
    }

    /// Rotates the frame by `phi` inside its plane.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        ContactElement {
            x: self.x.clone(),
            x1: self.x1.scaled(c).add(&self.x2.scaled(s)),
            x2: self.x2.scaled(c).sub(&self.x1.scaled(s)),
        }
    }

    /// `X1 - i X2`.
    pub fn complex(&self) -> CLorentzVec {
        self.x1.to_complex().sub(&self.x2.to_complex().scaled(I))
    }

    /// Largest deviation from the Gram pattern `diag(0, 1, 1)`.
    pub fn gram_residual(&self) -> f64 {
        let v = [&self.x, &self.x1, &self.x2];
        let mut r: f64 = 0.0;
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                let target = if i == j && i > 0 { 1.0 } else { 0.0 };
                r = r.max((a.inner(b) - target).abs());
            }
        }
        r
    }
}

/// Invariants of contact elements at distinct points.
///
/// `theta = <Y ^ (Y1 - i Y2), Yhat ^ (Yhat1 - i Yhat2)> / 2 <Y, Yhat>` and
/// `rho` with `Y1 + i Y2` in the first slot. The base-point pairing
/// `<Y, Yhat>` makes both homogeneous of degree zero in the lifts; it
/// equals `<Y ^ Yhat, Y ^ Yhat>` when `<Y, Yhat> = -1`.
pub fn contact_invariants_distinct(
    s: &ContactElement,
    sh: &ContactElement,
) -> Result<(Complex64, Complex64)> {
    let d = s.x.inner(&sh.x);
    if d.abs() < tolerances::SAME_POINT {
        return Err(Error::SamePoint);
    }
    let (y, yh) = (s.x.to_complex(), sh.x.to_complex());
    let c = s.complex();
    let ch = Bivector::wedge(yh, sh.complex());
    let theta = Bivector::wedge(y.clone(), c.clone()).pairing(&ch) / (2.0 * d);
    let rho = Bivector::wedge(y, c.conj()).pairing(&ch) / (2.0 * d);
    Ok((theta, rho))
}

/// Same-point invariants `(1/2 <Y1 + i Y2, Yhat1 - i Yhat2>, 1/2 <Y1 - i Y2, Yhat1 - i Yhat2>)`.
pub fn contact_invariants_samepoint(s: &ContactElement, sh: &ContactElement) -> (Complex64, Complex64) {
    samepoint_from_complex(&s.complex(), &sh.complex())
}

/// Same-point invariants from complex contact vectors `c = X1 - i X2`.
fn samepoint_from_complex(c: &CLorentzVec, ch: &CLorentzVec) -> (Complex64, Complex64) {
    (0.5 * c.conj().inner(ch), 0.5 * c.inner(ch))
}

/// Touch / co-touch flags of two contact elements at one point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Touch {
    pub touch: bool,
    pub cotouch: bool,
}

pub fn touch_predicates(s: &ContactElement, sh: &ContactElement, tol: f64) -> Touch {
    let (theta, rho) = contact_invariants_samepoint(s, sh);
    Touch {
        touch: rho.norm() < tol,
        cotouch: theta.norm() < tol,
    }
}

/// Result of comparing the tangent sphere's contact element with `Yhat`'s.
#[derive(Clone, Copy, Debug)]
pub struct TangentSphere {
    pub theta_u: Complex64,
    pub rho_u: Complex64,
    /// `|theta_u - theta|`.
    pub theta_defect: f64,
    /// `|rho_u - rho|`.
    pub rho_defect: f64,
}

/// Builds the sphere `S(p) = Span{Y, Y_u, Y_v, Yhat}` tangent to `Y` through
/// `Yhat`, carries its contact element to `Yhat` by the reflection in
/// `Y - Yhat`, and pairs it with `Yhat ^ Yhat_z` by the same-point formulas.
///
/// Both elements are taken with their coordinate scaling, so the result is
/// compared with `theta`, `rho` directly.
pub fn tangent_sphere_check(fp: &FramePoint, yhat: &JetVec, pp: &PairPoint) -> Result<TangentSphere> {
    let f = fp.value_frame();
    let yh = yhat.value();
    let yu = f.yz.add(&f.yzb);
    let yv = f.yz.sub(&f.yzb).scaled(I);
    // S(p) is a (3,1)-space exactly when its Gram matrix is invertible
    let span = [&f.y, &yu, &yv, &yh];
    let mut gram = nalgebra::DMatrix::<f64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            gram[(i, j)] = span[i].inner(span[j]).re;
        }
    }
    if gram.determinant().abs() < 1e-12 {
        return Err(Error::DegenerateSpan("tangent sphere"));
    }
    let mu = pp.mu.value();
    let w = f.y.sub(&yh);
    let ww = w.inner(&w);
    let reflect = |x: &CLorentzVec| x.sub(&w.scaled(x.inner(&w) * 2.0 / ww));
    // the reflection reverses orientation, hence the conjugate
    let carried = reflect(&f.yz.add(&f.y.scaled(mu * 0.5))).conj();
    let (theta_u, rho_u) = samepoint_from_complex(&carried.scaled(2.0.into()), &yhat.dz()?.value().scaled(2.0.into()));
    Ok(TangentSphere {
        theta_u,
        rho_u,
        theta_defect: (theta_u - pp.theta.value()).norm(),
        rho_defect: (rho_u - pp.rho.value()).norm(),
    })
}

/// Contact element of a lift at a point, from its `u`, `v` derivatives.
pub fn contact_element_of(y: &JetVec) -> Result<ContactElement> {
    ContactElement::new(y.value().re(), y.du()?.value().re(), y.dv()?.value().re())
}

/// Two charts evaluated at shifted parameters, giving a pair of conformal
/// immersions of the same coordinate disc.
#[derive(Clone, Debug)]
pub struct ChartPair {
    pub base: SurfaceChart,
    pub other: SurfaceChart,
    pub shift: (f64, f64),
}

/// A normalized pair at one point.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub frame: FramePoint,
    pub yhat: JetVec,
}

impl ChartPair {
    /// Frame of the base chart and the normalized second lift.
    pub fn at(&self, u: f64, v: f64, order: usize) -> Result<PairSample> {
        let y = chart_lift(&self.base, u, v, order)?;
        let raw = chart_lift(&self.other, u + self.shift.0, v + self.shift.1, order)?;
        let frame = frame_at(&y)?;
        let yhat = normalize_pair(&y, &raw)?;
        Ok(PairSample { frame, yhat })
    }

    /// The pair with roles exchanged; the parameter point stays the same.
    pub fn swapped_at(&self, u: f64, v: f64, order: usize) -> Result<PairSample> {
        let y = chart_lift(&self.other, u + self.shift.0, v + self.shift.1, order)?;
        let raw = chart_lift(&self.base, u, v, order)?;
        let frame = frame_at(&y)?;
        let yhat = normalize_pair(&y, &raw)?;
        Ok(PairSample { frame, yhat })
    }

    /// Random pair of catalog surfaces in `S^4`, the second one moved by a
    /// random Moebius transformation. Returns the pair and a parameter point.
    pub fn random(seed: u64) -> Result<(Self, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = ["clifford", "perturbed-clifford", "veronese", "sphere"];
        let p = ChartParams {
            ambient: Some(4),
            ..Default::default()
        };
        let base = catalog(names[rng.random_range(0..names.len())], &p)?;
        let other = catalog(names[rng.random_range(0..names.len())], &p)?
            .transformed(&random_lorentz(seed.wrapping_mul(7919).wrapping_add(1), 4))?;
        let shift = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let u = rng.random_range(base.domain.u[0]..base.domain.u[1]) * 0.8;
        let v = rng.random_range(base.domain.v[0]..base.domain.v[1]) * 0.8;
        Ok((ChartPair { base, other, shift }, u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::frame_at_chart;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const K: usize = tolerances::DEFAULT_ORDER - 1;

    fn clifford() -> SurfaceChart {
        catalog("clifford", &ChartParams::default()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn normalization_cases() {
        let fp = frame_at_chart(&clifford(), 0.3, 0.4, K).unwrap();
        let (y, n) = (fp.y(), fp.n());
        let a = normalize_pair(y, n).unwrap();
        assert!(a.sub(&n.truncated(a.order())).sup_norm() < 1e-14);
        let b = normalize_pair(y, &n.scaled(3.0.into())).unwrap();
        assert!(b.sub(&n.truncated(b.order())).sup_norm() < 1e-14);
        assert!(matches!(normalize_pair(y, y), Err(Error::CoincidentPoints { .. })));
    }

    #[test]
    fn clifford_with_its_mean_curvature_sphere_point() {
        let fp = frame_at_chart(&clifford(), 1.0, 2.0, K).unwrap();
        let yhat = fp.n().clone();
        let pp = pair_invariants(&fp, &yhat).unwrap();
        assert!(pp.mu.value().norm() < 1e-14);
        assert!(pp.xi.value().coord_norm() < 1e-14);
        // theta = -s = 0 and rho = -2 <kappa, conj kappa> = -1/4
        assert!(close(pp.theta.value(), -fp.s.value(), 1e-13));
        assert!(close(pp.rho.value(), Complex64::new(-0.25, 0.0), 1e-13));
        let ts = tangent_sphere_check(&fp, &yhat, &pp).unwrap();
        assert!(ts.theta_defect < 1e-12 && ts.rho_defect < 1e-12, "{ts:?}");
    }

    #[test]
    fn random_pairs_agree_across_routes() {
        for seed in 1..12 {
            let (pair, u, v) = ChartPair::random(seed).unwrap();
            let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
            let pp = pair_invariants(&frame, &yhat).unwrap();
            assert!(pp.reconstruction_residual(&frame, &yhat) < 1e-9);
            assert!(pp.fundamental_residual(&frame, &yhat).unwrap() < 1e-9);
            let (t, r) = bivector_invariants(&frame, &yhat).unwrap();
            assert!(close(t, pp.theta.value(), 1e-10), "seed {seed}");
            assert!(close(r, pp.rho.value(), 1e-10), "seed {seed}");
            let ts = tangent_sphere_check(&frame, &yhat, &pp).unwrap();
            assert!(ts.theta_defect + ts.rho_defect < 1e-9, "seed {seed}: {ts:?}");
        }
    }

    #[test]
    fn swapping_conjugates_rho() {
        for seed in 1..8 {
            let (pair, u, v) = ChartPair::random(seed).unwrap();
            let a = pair.at(u, v, K).unwrap();
            let b = pair.swapped_at(u, v, K).unwrap();
            let pa = pair_invariants(&a.frame, &a.yhat).unwrap();
            let pb = pair_invariants(&b.frame, &b.yhat).unwrap();
            let scale = 1.0 + pa.theta.value().norm() + pa.rho.value().norm();
            assert!(close(pa.theta.value(), pb.theta.value(), 1e-11 * scale), "seed {seed}");
            assert!(close(pa.rho.value().conj(), pb.rho.value(), 1e-11 * scale), "seed {seed}");
        }
    }

    #[test]
    fn contact_route_matches_jet_route() {
        for seed in 1..8 {
            let (pair, u, v) = ChartPair::random(seed).unwrap();
            let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
            let pp = pair_invariants(&frame, &yhat).unwrap();
            let s = contact_element_of(frame.y()).unwrap();
            let sh = contact_element_of(&yhat).unwrap();
            let (t, r) = contact_invariants_distinct(&s, &sh).unwrap();
            // unit frames divide by |Yhat_u| (Y is canonical, |Y_u| = 1)
            let speed = (2.0 * yhat.dz().unwrap().inner(&yhat.dzb().unwrap()).value().re).sqrt();
            let scale = 1.0 + pp.theta.value().norm() + pp.rho.value().norm();
            assert!(close(t * speed, pp.theta.value(), 1e-10 * scale), "seed {seed}");
            assert!(close(r * speed, pp.rho.value(), 1e-10 * scale), "seed {seed}");
            for phi in [0.3, 2.0] {
                let (t2, r2) = contact_invariants_distinct(&s.rotated(phi), &sh.rotated(-1.1 * phi)).unwrap();
                assert_abs_diff_eq!(t2.norm(), t.norm(), epsilon = 1e-12);
                assert_abs_diff_eq!(r2.norm(), r.norm(), epsilon = 1e-12);
            }
            let (t3, r3) = contact_invariants_distinct(&s, &sh.reversed()).unwrap();
            assert!(close(t3, r.conj(), 1e-13) && close(r3, t.conj(), 1e-13));
        }
    }

    #[test]
    fn same_point_examples() {
        let dim = 6;
        let x = LorentzVec::from_sphere_point(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        let e = |i| LorentzVec::basis(dim, i);
        let s = ContactElement::new(x.clone(), e(2), e(3)).unwrap();
        assert!(s.gram_residual() < 1e-15);
        let (t, r) = contact_invariants_samepoint(&s, &s);
        assert!(close(t, 1.0.into(), 1e-15) && close(r, 0.0.into(), 1e-15));
        assert_eq!(touch_predicates(&s, &s, 1e-8), Touch { touch: true, cotouch: false });
        let (t, r) = contact_invariants_samepoint(&s, &s.reversed());
        assert!(close(t, 0.0.into(), 1e-15) && close(r, 1.0.into(), 1e-15));
        assert_eq!(touch_predicates(&s, &s.reversed(), 1e-8), Touch { touch: false, cotouch: true });
        // complex lines span{1, i} and span{j, k} of C^2 = R^4 (tangent space e2..e5)
        let a = ContactElement::new(x.clone(), e(2), e(3)).unwrap();
        let b = ContactElement::new(x.clone(), e(4), e(5)).unwrap();
        let (_, r) = contact_invariants_samepoint(&a, &b);
        assert!(r.norm() < 1e-15);
        assert!(touch_predicates(&a, &b, 1e-8).touch);
        // rotation changes only the phase
        let (t0, r0) = contact_invariants_samepoint(&a, &a.rotated(0.4));
        assert_abs_diff_eq!(t0.norm(), 1.0, epsilon = 1e-15);
        assert!(r0.norm() < 1e-15);
        let _ = PI;
    }

    #[test]
    fn contact_element_validation() {
        let x = LorentzVec::from_sphere_point(&[1.0, 0.0, 0.0, 0.0]);
        let bad = ContactElement::new(x.clone(), LorentzVec::basis(5, 1), LorentzVec::basis(5, 2));
        assert!(matches!(bad, Err(Error::ContactGram { .. })));
        let s = ContactElement::new(x.clone(), LorentzVec::basis(5, 2), LorentzVec::basis(5, 2));
        assert!(s.is_err());
        assert!(matches!(
            contact_invariants_distinct(
                &ContactElement::new(x.clone(), LorentzVec::basis(5, 2), LorentzVec::basis(5, 3)).unwrap(),
                &ContactElement::new(x.scaled(2.0), LorentzVec::basis(5, 3), LorentzVec::basis(5, 4)).unwrap(),
            ),
            Err(Error::SamePoint)
        ));
    }

    #[test]
    fn contact_invariants_are_homogeneous_in_the_lifts() {
        let (pair, u, v) = ChartPair::random(3).unwrap();
        let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
        let s = contact_element_of(frame.y()).unwrap();
        let sh = contact_element_of(&yhat).unwrap();
        let (t, r) = contact_invariants_distinct(&s, &sh).unwrap();
        let scaled = ContactElement { x: sh.x.scaled(3.5), ..sh.clone() };
        let (t2, r2) = contact_invariants_distinct(&s, &scaled).unwrap();
        assert!(close(t, t2, 1e-13) && close(r, r2, 1e-13));
    }

    #[test]
    fn lift_scaling_does_not_change_theta_rho() {
        let (pair, u, v) = ChartPair::random(5).unwrap();
        let PairSample { frame, yhat } = pair.at(u, v, K).unwrap();
        let pp = pair_invariants(&frame, &yhat).unwrap();
        // positive non-constant rescaling of Yhat before normalization
        let w = &Jet2::variable_u(yhat.order(), 0.2).sin() + &Jet2::constant(yhat.order(), 2.0);
        let again = normalize_pair(frame.y(), &yhat.times(&w)).unwrap();
        let pq = pair_invariants(&frame, &again).unwrap();
        assert!(close(pp.theta.value(), pq.theta.value(), 1e-11));
        assert!(close(pp.rho.value(), pq.rho.value(), 1e-11));
    }

    #[test]
    fn coordinate_change_law() {
        let (pair, u, v) = ChartPair::random(9).unwrap();
        let pair = ChartPair { shift: (0.0, 0.0), ..pair };
        let z = Complex64::new(u, v);
        let at = |p: &ChartPair, w: Complex64| {
            let s = p.at(w.re, w.im, K).unwrap();
            let pp = pair_invariants(&s.frame, &s.yhat).unwrap();
            (pp.theta.value(), pp.rho.value())
        };
        let (t0, r0) = at(&pair, z);
        for a in [Complex64::new(2.0, 0.0), I] {
            let re = ChartPair {
                base: pair.base.reparametrized(a).unwrap(),
                other: pair.other.reparametrized(a).unwrap(),
                shift: (0.0, 0.0),
            };
            let (t1, r1) = at(&re, z / a);
            let scale = 1.0 + t0.norm() + r0.norm();
            assert!(close(t1, a * a * t0, 1e-10 * scale), "{a}: {t1} vs {}", a * a * t0);
            assert!(close(r1, a.norm_sqr() * r0, 1e-10 * scale), "{a}");
        }
    }
}
