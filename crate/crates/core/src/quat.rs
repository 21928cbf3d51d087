//! Quaternions and the left/right normal vectors of oriented 2-planes in
//! `R^4 = H`.
//!
//! An oriented plane `U` with oriented orthonormal basis `(a, b)` is the
//! solution set of `N x = -x R` for unit imaginary `N = b conj(a)` and
//! `R = -conj(a) b`. Two planes touch from the left (right) when their left
//! (right) normals agree and co-touch when they are opposite. Embedded at a
//! common point of the light cone, the same pair touches or co-touches as
//! contact elements exactly when it does so from the left or the right.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::LorentzVec;
use crate::pair::{contact_invariants_samepoint, ContactElement};
use crate::tolerances;

/// `w + x i + y j + z k`, identified with `(w, x, y, z)` in `R^4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn imaginary(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product on `R^4`.
    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, t: f64) -> Self {
        Quaternion::new(self.w * t, self.x * t, self.y * t, self.z * t)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    /// Distance from the unit imaginary sphere `q^2 = -1`.
    pub fn unit_imaginary_defect(self) -> f64 {
        let s = self * self + Quaternion::ONE;
        s.norm()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Self) -> Self {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// Oriented 2-plane in `R^4` given by an oriented orthonormal basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrientedPlane4 {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl OrientedPlane4 {
    /// Gram-Schmidt on an oriented spanning pair.
    pub fn new(a: Quaternion, b: Quaternion) -> Result<Self> {
        let na = a.norm();
        if !(na > 1e-12) {
            return Err(Error::DegenerateSpan("plane basis"));
        }
        let a = a.scale(1.0 / na);
        let b = b - a.scale(a.dot(b));
        let nb = b.norm();
        if !(nb > 1e-12 * (1.0 + na)) {
            return Err(Error::DegenerateSpan("plane basis"));
        }
        Ok(OrientedPlane4 { a, b: b.scale(1.0 / nb) })
    }

    pub fn reversed(self) -> Self {
        OrientedPlane4 { a: self.b, b: self.a }
    }

    /// Image under `x -> p x q`.
    pub fn transformed(self, p: Quaternion, q: Quaternion) -> Self {
        OrientedPlane4 { a: p * self.a * q, b: p * self.b * q }
    }

    /// Image under the orientation-reversing reflection `x -> conj(x)`.
    pub fn conjugated(self) -> Self {
        OrientedPlane4 { a: self.a.conj(), b: self.b.conj() }
    }

    /// Distance of `x` from the plane.
    pub fn distance(&self, x: Quaternion) -> f64 {
        (x - self.a.scale(self.a.dot(x)) - self.b.scale(self.b.dot(x))).norm()
    }

    /// Orientation-sensitive distance between planes: how far the basis of
    /// `o` is from this plane, plus the deviation of the Gram determinant
    /// from 1. Opposite orientations are at infinite distance.
    pub fn oriented_distance(&self, o: &OrientedPlane4) -> f64 {
        let det = self.a.dot(o.a) * self.b.dot(o.b) - self.a.dot(o.b) * self.b.dot(o.a);
        if det < 0.0 {
            return f64::INFINITY;
        }
        self.distance(o.a).max(self.distance(o.b)) + (det - 1.0).abs()
    }
}

/// Left and right normal vectors of an oriented plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normals {
    pub left: Quaternion,
    pub right: Quaternion,
}

/// Matrix of `x -> q x` in the basis `(1, i, j, k)`.
fn left_mul_matrix(q: Quaternion) -> SMatrix<f64, 4, 4> {
    let cols = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K].map(|e| (q * e).to_array());
    SMatrix::<f64, 4, 4>::from_fn(|r, c| cols[c][r])
}

/// Matrix of `x -> x q`.
fn right_mul_matrix(q: Quaternion) -> SMatrix<f64, 4, 4> {
    let cols = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K].map(|e| (e * q).to_array());
    SMatrix::<f64, 4, 4>::from_fn(|r, c| cols[c][r])
}

const IMAG: [Quaternion; 3] = [Quaternion::I, Quaternion::J, Quaternion::K];

/// Solves `N x + x R = 0` for `x = a, b` over imaginary `N, R`.
///
/// The real parts are excluded because `(t, -t)` solves the system for every
/// plane. The remaining 8x6 system has a one-dimensional kernel; its sign is
/// fixed by requiring `N a` to point along `b`.
pub fn normals_of_plane(u: &OrientedPlane4) -> Result<Normals> {
    let basis_defect = (u.a.norm() - 1.0)
        .abs()
        .max((u.b.norm() - 1.0).abs())
        .max(u.a.dot(u.b).abs());
    if basis_defect > 1e-10 {
        return Err(Error::DegenerateSpan("plane basis not orthonormal"));
    }
    let mut m = SMatrix::<f64, 8, 6>::zeros();
    for (row, x) in [u.a, u.b].into_iter().enumerate() {
        for (col, e) in IMAG.iter().enumerate() {
            let nx = (*e * x).to_array();
            let xr = (x * *e).to_array();
            for k in 0..4 {
                m[(4 * row + k, col)] = nx[k];
                m[(4 * row + k, 3 + col)] = xr[k];
            }
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::DegenerateSpan("normal system"))?;
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (s0, s1) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    // Kernel must be a line: exactly one vanishing singular value.
    if s0 > 1e-10 || s1 < 1e-6 {
        return Err(Error::DegenerateSpan("normal system kernel is not a line"));
    }
    let kv: SVector<f64, 6> = v_t.row(order[0]).transpose();
    let n = Quaternion::imaginary(kv[0], kv[1], kv[2]);
    let r = Quaternion::imaginary(kv[3], kv[4], kv[5]);
    let scale = n.norm();
    let sign = if (n * u.a).dot(u.b) >= 0.0 { 1.0 } else { -1.0 };
    let out = Normals { left: n.scale(sign / scale), right: r.scale(sign / scale) };
    let residual = [u.a, u.b]
        .iter()
        .map(|&x| (out.left * x + x * out.right).norm())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::DegenerateSpan("normal residual"));
    }
    Ok(out)
}

/// The plane `{x : N x = -x R}`, oriented so that `(a, N a)` is positive.
pub fn plane_from_normals(n: Quaternion, r: Quaternion) -> Result<OrientedPlane4> {
    if n.unit_imaginary_defect() > 1e-10 {
        return Err(Error::InvalidNormal("left normal is not unit imaginary"));
    }
    if r.unit_imaginary_defect() > 1e-10 {
        return Err(Error::InvalidNormal("right normal is not unit imaginary"));
    }
    // x -> N x R is an orthogonal involution whose +1 eigenspace is the plane.
    let t = left_mul_matrix(n) * right_mul_matrix(r);
    let proj = (SMatrix::<f64, 4, 4>::identity() + t) * 0.5;
    let col = (0..4)
        .max_by(|&i, &j| proj.column(i).norm().total_cmp(&proj.column(j).norm()))
        .unwrap_or(0);
    let c = proj.column(col);
    let a = Quaternion::new(c[0], c[1], c[2], c[3]);
    OrientedPlane4::new(a, n * a.normalized())
}

/// Left and right (co-)touch flags of two oriented planes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LrTouch {
    pub left_touch: bool,
    pub right_touch: bool,
    pub left_cotouch: bool,
    pub right_cotouch: bool,
}

impl LrTouch {
    pub fn touch(&self) -> bool {
        self.left_touch || self.right_touch
    }

    pub fn cotouch(&self) -> bool {
        self.left_cotouch || self.right_cotouch
    }
}

pub fn lr_touch(u1: &OrientedPlane4, u2: &OrientedPlane4) -> Result<LrTouch> {
    lr_touch_with(u1, u2, tolerances::QUAT_NORMAL)
}

pub fn lr_touch_with(u1: &OrientedPlane4, u2: &OrientedPlane4, tol: f64) -> Result<LrTouch> {
    let n1 = normals_of_plane(u1)?;
    let n2 = normals_of_plane(u2)?;
    Ok(LrTouch {
        left_touch: (n1.left - n2.left).norm() < tol,
        right_touch: (n1.right - n2.right).norm() < tol,
        left_cotouch: (n1.left + n2.left).norm() < tol,
        right_cotouch: (n1.right + n2.right).norm() < tol,
    })
}

/// Same-point contact element of a plane through the origin of `R^4`, lifted
/// to the light cone of `R^{5,1}` by `v -> ((1+|v|^2)/2, (1-|v|^2)/2, v)`.
pub fn contact_element(u: &OrientedPlane4) -> Result<ContactElement> {
    let embed = |q: Quaternion| {
        let c = q.to_array();
        LorentzVec::new(vec![0.0, 0.0, c[0], c[1], c[2], c[3]])
    };
    let y = LorentzVec::new(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
    ContactElement::new(y, embed(u.a), embed(u.b))
}

/// Singular values of the Gram matrix `<e_i, f_j>` of the two oriented
/// bases, the smaller one carrying the sign of its determinant.
pub fn signed_singular_values(u1: &OrientedPlane4, u2: &OrientedPlane4) -> [f64; 2] {
    let g = Matrix2::new(u1.a.dot(u2.a), u1.a.dot(u2.b), u1.b.dot(u2.a), u1.b.dot(u2.b));
    let s = g.svd(false, false).singular_values;
    let (hi, lo) = if s[0] >= s[1] { (s[0], s[1]) } else { (s[1], s[0]) };
    [hi, lo * g.determinant().signum()]
}

/// The three characterizations of touch and co-touch for one plane pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairVerdict {
    pub quaternionic: LrTouch,
    pub theta: f64,
    pub rho: f64,
    pub singular_values: [f64; 2],
    pub contact_touch: bool,
    pub contact_cotouch: bool,
    pub sv_touch: bool,
    pub sv_cotouch: bool,
}

impl PairVerdict {
    pub fn agrees(&self) -> bool {
        let q = &self.quaternionic;
        q.touch() == self.contact_touch
            && q.touch() == self.sv_touch
            && q.cotouch() == self.contact_cotouch
            && q.cotouch() == self.sv_cotouch
    }
}

pub fn compare_pair(u1: &OrientedPlane4, u2: &OrientedPlane4, tol: f64) -> Result<PairVerdict> {
    let quaternionic = lr_touch_with(u1, u2, tol)?;
    let (theta, rho) = contact_invariants_samepoint(&contact_element(u1)?, &contact_element(u2)?);
    let [l1, l2] = signed_singular_values(u1, u2);
    Ok(PairVerdict {
        quaternionic,
        theta: theta.norm(),
        rho: rho.norm(),
        singular_values: [l1, l2],
        contact_touch: rho.norm() < tol,
        contact_cotouch: theta.norm() < tol,
        sv_touch: (l1 - l2).abs() < tol,
        sv_cotouch: (l1 + l2).abs() < tol,
    })
}

/// How a trial pair is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    Random,
    LeftTouch,
    RightTouch,
    LeftCotouch,
    RightCotouch,
    Identical,
    Reversed,
}

const TRIAL_KINDS: [TrialKind; 7] = [
    TrialKind::Random,
    TrialKind::LeftTouch,
    TrialKind::RightTouch,
    TrialKind::LeftCotouch,
    TrialKind::RightCotouch,
    TrialKind::Identical,
    TrialKind::Reversed,
];

pub fn random_unit_imaginary(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = Quaternion::imaginary(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.scale(1.0 / n);
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = Quaternion::from_array([0; 4].map(|_| rng.random_range(-1.0..1.0)));
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.scale(1.0 / n);
        }
    }
}

pub fn random_plane(rng: &mut impl Rng) -> OrientedPlane4 {
    loop {
        if let Ok(p) = OrientedPlane4::new(random_unit(rng), random_unit(rng)) {
            if p.a.dot(p.b).abs() < 1e-14 {
                return p;
            }
        }
    }
}

fn plane_with(n: Quaternion, r: Quaternion) -> OrientedPlane4 {
    plane_from_normals(n, r).expect("unit imaginary normals")
}

/// Draws a plane pair of the given kind. Touching kinds are built from
/// shared normals, since random pairs touch with probability zero.
pub fn trial_pair(kind: TrialKind, rng: &mut impl Rng) -> (OrientedPlane4, OrientedPlane4) {
    let u1 = random_plane(rng);
    let n1 = normals_of_plane(&u1).expect("random plane");
    let (n, r) = (random_unit_imaginary(rng), random_unit_imaginary(rng));
    let u2 = match kind {
        TrialKind::Random => random_plane(rng),
        TrialKind::LeftTouch => plane_with(n1.left, r),
        TrialKind::RightTouch => plane_with(n, n1.right),
        TrialKind::LeftCotouch => plane_with(-n1.left, r),
        TrialKind::RightCotouch => plane_with(n, -n1.right),
        TrialKind::Identical => u1,
        TrialKind::Reversed => u1.reversed(),
    };
    (u1, u2)
}

/// Outcome of the randomized equivalence check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub disagreements: usize,
    /// Quaternionic flags against the `theta`/`rho` predicates.
    pub quaternion_vs_contact: usize,
    /// Quaternionic flags against the signed singular values.
    pub quaternion_vs_singular: usize,
    pub touching: usize,
    pub cotouching: usize,
    /// Largest `|N x + x R|` over all planes drawn.
    pub max_normal_residual: f64,
    pub failed_trials: Vec<usize>,
}

/// Runs `trials` pairs cycling through every [`TrialKind`], each from its own
/// stream of a ChaCha generator seeded with `seed`.
pub fn equivalence_check(trials: usize, seed: u64, tol: f64) -> Result<EquivalenceReport> {
    let results: Vec<(PairVerdict, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (u1, u2) = trial_pair(TRIAL_KINDS[i % TRIAL_KINDS.len()], &mut rng);
            let verdict = compare_pair(&u1, &u2, tol)?;
            let mut residual: f64 = 0.0;
            for u in [&u1, &u2] {
                let nr = normals_of_plane(u)?;
                for x in [u.a, u.b] {
                    residual = residual.max((nr.left * x + x * nr.right).norm());
                }
            }
            Ok((verdict, residual))
        })
        .collect::<Result<_>>()?;
    let mut report = EquivalenceReport {
        trials,
        seed,
        tol,
        disagreements: 0,
        quaternion_vs_contact: 0,
        quaternion_vs_singular: 0,
        touching: 0,
        cotouching: 0,
        max_normal_residual: 0.0,
        failed_trials: Vec::new(),
    };
    for (i, (v, res)) in results.iter().enumerate() {
        let q = &v.quaternionic;
        if q.touch() != v.contact_touch || q.cotouch() != v.contact_cotouch {
            report.quaternion_vs_contact += 1;
        }
        if q.touch() != v.sv_touch || q.cotouch() != v.sv_cotouch {
            report.quaternion_vs_singular += 1;
        }
        if !v.agrees() {
            report.disagreements += 1;
            report.failed_trials.push(i);
        }
        report.touching += q.touch() as usize;
        report.cotouching += q.cotouch() as usize;
        report.max_normal_residual = report.max_normal_residual.max(*res);
    }
    Ok(report)
}
