//! Minkowski linear algebra on `R^{n+1,1}` and its complexification.
//!
//! Index 0 is the timelike direction, so a point `x` of the unit sphere
//! `S^n` is represented by the null vector `(1, x)`. The complexified form is
//! the bilinear (not Hermitian) extension of
//! `<y, y> = -y_0^2 + sum_i y_i^2`.
//!
//! Vector-valued algebra is generic over [`Scalar`], which is implemented
//! both for plain complex numbers and for jets, so the same frame projector
//! and bivector pairing serve pointwise checks and jet-valued fields.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ring operations shared by complex numbers and jets.
pub trait Scalar: Clone + Send + Sync + fmt::Debug {
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: Complex64) -> Self;
    fn conj(&self) -> Self;
    /// A constant of the same shape (jet order) as `self`.
    fn lift(&self, c: Complex64) -> Self;
    /// Value at the base point.
    fn value(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: Complex64) -> Self {
        self * c
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn lift(&self, c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
}

/// A vector in the (complexified) Minkowski space with entries in `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector<S> {
    pub comps: Vec<S>,
}

/// Pointwise complex Lorentz vector.
pub type CLorentzVec = Vector<Complex64>;

impl<S: Scalar> Vector<S> {
    pub fn new(comps: Vec<S>) -> Self {
        Vector { comps }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Vector::new(self.comps.iter().map(f).collect())
    }

    fn zip(&self, o: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(self.dim(), o.dim(), "Lorentz vectors of different dimension");
        Vector::new(self.comps.iter().zip(&o.comps).map(|(a, b)| f(a, b)).collect())
    }

    /// Minkowski bilinear form.
    pub fn inner(&self, o: &Self) -> S {
        assert_eq!(self.dim(), o.dim(), "Lorentz vectors of different dimension");
        let mut acc = self.comps[0].times(&o.comps[0]).scaled(Complex64::new(-1.0, 0.0));
        for (a, b) in self.comps[1..].iter().zip(&o.comps[1..]) {
            acc = acc.plus(&a.times(b));
        }
        acc
    }

    /// `<self, conj(self)>`; real and nonnegative on spacelike subspaces.
    pub fn herm_sq(&self) -> S {
        self.inner(&self.conj())
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.plus(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.minus(b))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|a| a.scaled(c))
    }

    /// Multiplies every component by the scalar field `s`.
    pub fn times(&self, s: &S) -> Self {
        self.map(|a| a.times(s))
    }

    pub fn conj(&self) -> Self {
        self.map(|a| a.conj())
    }

    pub fn neg(&self) -> Self {
        self.scaled(Complex64::new(-1.0, 0.0))
    }

    /// Point values of every component.
    pub fn value(&self) -> CLorentzVec {
        Vector::new(self.comps.iter().map(Scalar::value).collect())
    }

    /// `sum_i coeffs[i] * vecs[i]`.
    pub fn combination(terms: &[(&S, &Self)]) -> Self {
        let mut it = terms.iter();
        let (c0, v0) = it.next().expect("empty combination");
        let mut acc = v0.times(c0);
        for (c, v) in it {
            acc = acc.add(&v.times(c));
        }
        acc
    }
}

impl CLorentzVec {
    pub fn zeros(dim: usize) -> Self {
        Vector::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn from_real(x: &[f64]) -> Self {
        Vector::new(x.iter().map(|r| Complex64::new(*r, 0.0)).collect())
    }

    pub fn re(&self) -> LorentzVec {
        LorentzVec::new(self.comps.iter().map(|c| c.re).collect())
    }

    pub fn im(&self) -> LorentzVec {
        LorentzVec::new(self.comps.iter().map(|c| c.im).collect())
    }

    /// Euclidean coordinate norm, used to size residual vectors.
    pub fn coord_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Bilinear Minkowski pairing with a dimension check.
pub fn minkowski_inner(a: &CLorentzVec, b: &CLorentzVec) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.inner(b))
}

/// Real vector of `R^{n+1,1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzVec {
    coords: Vec<f64>,
}

impl LorentzVec {
    pub fn new(coords: Vec<f64>) -> Self {
        LorentzVec { coords }
    }

    /// Light-cone image `(1, x)` of a point of the unit sphere.
    pub fn from_sphere_point(x: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(x.len() + 1);
        coords.push(1.0);
        coords.extend_from_slice(x);
        LorentzVec { coords }
    }

    /// Unit basis vector `e_i` in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        LorentzVec { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Ambient sphere dimension `n` (the space is `R^{n+1,1}`).
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn inner(&self, o: &Self) -> f64 {
        assert_eq!(self.dim(), o.dim());
        -self.coords[0] * o.coords[0]
            + self.coords[1..]
                .iter()
                .zip(&o.coords[1..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn to_complex(&self) -> CLorentzVec {
        CLorentzVec::from_real(&self.coords)
    }

    pub fn scaled(&self, c: f64) -> Self {
        LorentzVec::new(self.coords.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        LorentzVec::new(self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        LorentzVec::new(self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect())
    }

    /// True for null vectors in the forward cone, i.e. points of `S^n`.
    pub fn is_sphere_point(&self, tol: f64) -> bool {
        let scale = self.coords[0].abs().max(1.0);
        self.coords[0] > 0.0 && self.inner(self).abs() <= tol * scale * scale
    }
}

/// Projective distance between two forward null vectors: the Euclidean
/// distance of their `(1, x)` representatives.
pub fn projective_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a[1..]
        .iter()
        .zip(&b[1..])
        .map(|(x, y)| (x / a[0] - y / b[0]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Decomposable bivector `a ^ b`, kept as its ordered factor pair.
#[derive(Clone, Debug)]
pub struct Bivector<S> {
    pub a: Vector<S>,
    pub b: Vector<S>,
}

impl<S: Scalar> Bivector<S> {
    pub fn wedge(a: Vector<S>, b: Vector<S>) -> Self {
        Bivector { a, b }
    }

    /// `<a^b, c^d> = <a,c><b,d> - <a,d><b,c>`.
    pub fn pairing(&self, o: &Self) -> S {
        self.a
            .inner(&o.a)
            .times(&self.b.inner(&o.b))
            .minus(&self.a.inner(&o.b).times(&self.b.inner(&o.a)))
    }

    /// `b ^ a = -(a ^ b)`, expressed by swapping factors.
    pub fn reversed(&self) -> Self {
        Bivector {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// Pairing of two decomposable bivectors with a dimension check.
pub fn wedge_inner(p: &Bivector<Complex64>, q: &Bivector<Complex64>) -> Result<Complex64> {
    if p.a.dim() != q.a.dim() || p.b.dim() != q.b.dim() || p.a.dim() != p.b.dim() {
        return Err(Error::DimensionMismatch {
            left: p.a.dim(),
            right: q.a.dim(),
        });
    }
    Ok(p.pairing(q))
}

/// Finite sum of decomposable bivectors, paired bilinearly.
#[derive(Clone, Debug)]
pub struct BivectorSum<S> {
    pub terms: Vec<Bivector<S>>,
}

impl<S: Scalar> BivectorSum<S> {
    pub fn new(terms: Vec<Bivector<S>>) -> Self {
        BivectorSum { terms }
    }

    pub fn pairing(&self, o: &Self) -> S {
        let mut acc: Option<S> = None;
        for p in &self.terms {
            for q in &o.terms {
                let x = p.pairing(q);
                acc = Some(match acc {
                    Some(a) => a.plus(&x),
                    None => x,
                });
            }
        }
        acc.expect("empty bivector sum")
    }

    /// Pairing against `x ^ w` as a linear functional of `w`, returned as
    /// its Riesz vector `R` with `<x ^ w, self> = <w, R>`.
    pub fn contract_first(&self, x: &Vector<S>) -> Vector<S> {
        // <x ^ w, p ^ q> = <x,p><w,q> - <x,q><w,p>
        let mut acc: Option<Vector<S>> = None;
        for t in &self.terms {
            let r = t.b.times(&x.inner(&t.a)).sub(&t.a.times(&x.inner(&t.b)));
            acc = Some(match acc {
                Some(a) => a.add(&r),
                None => r,
            });
        }
        acc.expect("empty bivector sum")
    }
}

/// The frame `{Y, Y_z, Y_zbar, N}` of the mean curvature sphere.
///
/// Gram relations: all pairings vanish except `<Y_z, Y_zbar> = 1/2` and
/// `<Y, N> = -1`.
#[derive(Clone, Debug)]
pub struct NullFrame<S> {
    pub y: Vector<S>,
    pub yz: Vector<S>,
    pub yzb: Vector<S>,
    pub n: Vector<S>,
}

impl<S: Scalar> NullFrame<S> {
    /// Largest deviation of the frame's Gram matrix from its defining pattern.
    pub fn gram_residual(&self) -> f64 {
        let half = Complex64::new(0.5, 0.0);
        let checks = [
            self.y.inner(&self.y).value(),
            self.n.inner(&self.n).value(),
            self.yz.inner(&self.yz).value(),
            self.yzb.inner(&self.yzb).value(),
            self.y.inner(&self.yz).value(),
            self.y.inner(&self.yzb).value(),
            self.n.inner(&self.yz).value(),
            self.n.inner(&self.yzb).value(),
            self.yz.inner(&self.yzb).value() - half,
            self.y.inner(&self.n).value() + 1.0,
        ];
        checks.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Tangential part `-<X,N>Y - <X,Y>N + 2<X,Y_zbar>Y_z + 2<X,Y_z>Y_zbar`.
    pub fn tangential(&self, x: &Vector<S>) -> Vector<S> {
        let two = Complex64::new(2.0, 0.0);
        let a = x.inner(&self.n).scaled(Complex64::new(-1.0, 0.0));
        let b = x.inner(&self.y).scaled(Complex64::new(-1.0, 0.0));
        let c = x.inner(&self.yzb).scaled(two);
        let d = x.inner(&self.yz).scaled(two);
        Vector::combination(&[(&a, &self.y), (&b, &self.n), (&c, &self.yz), (&d, &self.yzb)])
    }

    /// Splits `x` into its parts in `V_C` and `V_C^perp`.
    pub fn split(&self, x: &Vector<S>) -> (Vector<S>, Vector<S>) {
        let t = self.tangential(x);
        let nrm = x.sub(&t);
        (t, nrm)
    }

    pub fn normal_part(&self, x: &Vector<S>) -> Vector<S> {
        x.sub(&self.tangential(x))
    }

    /// Largest pairing of `x` with the four frame vectors.
    pub fn normality_defect(&self, x: &Vector<S>) -> f64 {
        [&self.y, &self.yz, &self.yzb, &self.n]
            .iter()
            .map(|f| f.inner(x).value().norm())
            .fold(0.0, f64::max)
    }
}

/// Pointwise projector onto `V_C` and `V_C^perp`, validating the frame first.
pub fn dual_frame_projector(
    frame: &NullFrame<Complex64>,
    x: &CLorentzVec,
    tol: f64,
) -> Result<(CLorentzVec, CLorentzVec)> {
    let residual = frame.gram_residual();
    if residual > tol {
        return Err(Error::FrameGram { residual, tol });
    }
    Ok(frame.split(x))
}

/// Linear map of `R^{n+1,1}` (row-major action on coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzMap {
    pub matrix: DMatrix<f64>,
}

/// Minkowski form matrix `diag(-1, 1, ..., 1)`.
pub fn form_matrix(dim: usize) -> DMatrix<f64> {
    let mut eta = DMatrix::identity(dim, dim);
    eta[(0, 0)] = -1.0;
    eta
}

impl LorentzMap {
    pub fn identity(dim: usize) -> Self {
        LorentzMap {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `|| T^t eta T - eta ||_max`.
    pub fn form_defect(&self) -> f64 {
        let eta = form_matrix(self.dim());
        let d = self.matrix.transpose() * &eta * &self.matrix - eta;
        d.amax()
    }

    pub fn apply<S: Scalar>(&self, x: &Vector<S>) -> Vector<S> {
        let dim = self.dim();
        assert_eq!(x.dim(), dim);
        let comps = (0..dim)
            .map(|i| {
                let mut acc = x.comps[0].scaled(Complex64::new(self.matrix[(i, 0)], 0.0));
                for j in 1..dim {
                    let m = self.matrix[(i, j)];
                    if m != 0.0 {
                        acc = acc.plus(&x.comps[j].scaled(Complex64::new(m, 0.0)));
                    }
                }
                acc
            })
            .collect();
        Vector::new(comps)
    }

    pub fn apply_real(&self, x: &LorentzVec) -> LorentzVec {
        let v = nalgebra::DVector::from_column_slice(x.coords());
        LorentzVec::new((&self.matrix * v).iter().copied().collect())
    }

    pub fn compose(&self, o: &Self) -> Self {
        LorentzMap {
            matrix: &self.matrix * &o.matrix,
        }
    }
}

/// Deterministic random element of the identity component of `O(n+1,1)`.
///
/// Seed 0 is the identity. Other seeds exponentiate a random generator
/// `A = eta S` with `S` antisymmetric (so `A^t eta + eta A = 0`), mixing
/// boosts and rotations of moderate size.
pub fn random_lorentz(seed: u64, n: usize) -> LorentzMap {
    let dim = n + 2;
    if seed == 0 {
        return LorentzMap::identity(dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let x: f64 = rng.random_range(-0.6..0.6);
            s[(i, j)] = x;
            s[(j, i)] = -x;
        }
    }
    let a = form_matrix(dim) * s;
    LorentzMap { matrix: a.exp() }
}
