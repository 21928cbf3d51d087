//! Truncated bivariate Taylor jets.
//!
//! A [`Jet2`] of order `K` carries the Taylor expansion of a complex-valued
//! function of two real variables `(u, v)` around a base point, truncated
//! after total degree `K`. Every derivative used by the geometry (including
//! the Wirtinger operators `d/dz = (d/du - i d/dv)/2` and
//! `d/dzbar = (d/du + i d/dv)/2`) is read off these expansions exactly, so
//! residuals are limited by rounding rather than by a step size.
//!
//! Coefficients are stored as normalized Taylor coefficients, i.e. the
//! coefficient of `du^j dv^k` is `d^j_u d^k_v f / (j! k!)`. The mixed partial
//! itself is available through [`Jet2::partial`]. Storage is grouped by total
//! degree so truncation is a prefix cut.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lorentz::{Scalar, Vector};
use crate::tolerances;

/// Jet-valued Lorentz vector: one [`Jet2`] per ambient coordinate.
pub type JetVec = Vector<Jet2>;

#[inline]
fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[inline]
fn idx(j: usize, k: usize) -> usize {
    let d = j + k;
    d * (d + 1) / 2 + k
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Truncated Taylor expansion in two real variables.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet2(K={}, value={})", self.order, self.value())
    }
}

impl Jet2 {
    pub fn zero(order: usize) -> Self {
        Jet2 {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); len_for(order)],
        }
    }

    pub fn constant(order: usize, c: impl Into<Complex64>) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c.into();
        j
    }

    /// The coordinate function `u` expanded around `u0`.
    pub fn variable_u(order: usize, u0: f64) -> Self {
        let mut j = Self::constant(order, u0);
        if order >= 1 {
            j.coeffs[idx(1, 0)] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// The coordinate function `v` expanded around `v0`.
    pub fn variable_v(order: usize, v0: f64) -> Self {
        let mut j = Self::constant(order, v0);
        if order >= 1 {
            j.coeffs[idx(0, 1)] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Builds a jet from its normalized Taylor coefficients.
    pub fn from_taylor(order: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut j = Self::zero(order);
        for d in 0..=order {
            for k in 0..=d {
                j.coeffs[idx(d - k, k)] = f(d - k, k);
            }
        }
        j
    }

    /// Builds a jet from mixed partial derivatives `d^j_u d^k_v f`.
    pub fn from_partials(order: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self::from_taylor(order, |j, k| f(j, k) / (factorial(j) * factorial(k)))
    }

    /// Outer product of two univariate Taylor series, `a(u) * b(v)`.
    pub fn from_separable(order: usize, a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_taylor(order, |j, k| match (a.get(j), b.get(k)) {
            (Some(x), Some(y)) => x * y,
            _ => Complex64::new(0.0, 0.0),
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Normalized Taylor coefficient of `du^j dv^k`.
    pub fn taylor(&self, j: usize, k: usize) -> Complex64 {
        if j + k > self.order {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx(j, k)]
        }
    }

    /// Mixed partial `d^j_u d^k_v` at the base point.
    pub fn partial(&self, j: usize, k: usize) -> Complex64 {
        self.taylor(j, k) * factorial(j) * factorial(k)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Drops every coefficient above `order` (no-op if already lower).
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet2 {
            order,
            coeffs: self.coeffs[..len_for(order)].to_vec(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part over all coefficients.
    pub fn imag_defect(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Jet2 {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Jet2 {
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn zip_with(&self, o: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let order = self.order.min(o.order);
        let n = len_for(order);
        Jet2 {
            order,
            coeffs: self.coeffs[..n]
                .iter()
                .zip(&o.coeffs[..n])
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul_jet(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = vec![Complex64::new(0.0, 0.0); len_for(order)];
        let a = &self.coeffs;
        let b = &o.coeffs;
        for d1 in 0..=order {
            let base1 = d1 * (d1 + 1) / 2;
            let rem = order - d1;
            for k1 in 0..=d1 {
                let x = a[base1 + k1];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                for d2 in 0..=rem {
                    let base2 = d2 * (d2 + 1) / 2;
                    let d = d1 + d2;
                    let base = d * (d + 1) / 2 + k1;
                    for k2 in 0..=d2 {
                        out[base + k2] += x * b[base2 + k2];
                    }
                }
            }
        }
        Jet2 { order, coeffs: out }
    }

    /// `sum_m derivs[m] / m! * (self - self(0))^m`, i.e. `g(self)` given the
    /// derivatives of `g` at the constant term.
    fn compose(&self, derivs: &[Complex64]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = Complex64::new(0.0, 0.0);
        // Horner in delta; powers above the order vanish identically.
        let top = self.order.min(derivs.len() - 1);
        let mut acc = Jet2::constant(self.order, derivs[top] / factorial(top));
        for m in (0..top).rev() {
            acc = acc.mul_jet(&delta);
            acc.coeffs[0] += derivs[m] / factorial(m);
        }
        acc
    }

    fn check_nonsingular(&self, threshold: f64) -> Result<()> {
        let magnitude = self.value().norm();
        if magnitude < threshold || !magnitude.is_finite() {
            return Err(Error::SingularJet {
                magnitude,
                threshold,
            });
        }
        Ok(())
    }

    /// Real power `self^p` on the principal branch.
    fn powf_raw(&self, p: f64) -> Self {
        let x0 = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let base = x0.powf(p);
        let mut falling = 1.0;
        let mut inv = Complex64::new(1.0, 0.0);
        for m in 0..=self.order {
            derivs.push(base * falling * inv);
            falling *= p - m as f64;
            inv /= x0;
        }
        self.compose(&derivs)
    }

    pub fn try_recip_with(&self, eps: f64) -> Result<Self> {
        self.check_nonsingular(eps)?;
        let x0 = self.value();
        let mut derivs = Vec::with_capacity(self.order + 1);
        let r = 1.0 / x0;
        let mut p = r;
        for m in 0..=self.order {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            derivs.push(p * sign * factorial(m));
            p *= r;
        }
        Ok(self.compose(&derivs))
    }

    pub fn try_recip(&self) -> Result<Self> {
        self.try_recip_with(tolerances::SINGULAR_JET)
    }

    pub fn try_div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul_jet(&o.try_recip()?))
    }

    /// Principal square root; the constant term must be nonzero.
    pub fn try_sqrt(&self) -> Result<Self> {
        self.check_nonsingular(tolerances::SINGULAR_JET)?;
        Ok(self.powf_raw(0.5))
    }

    /// `self^(-1/2)`.
    pub fn try_rsqrt(&self) -> Result<Self> {
        self.check_nonsingular(tolerances::SINGULAR_JET)?;
        Ok(self.powf_raw(-0.5))
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let derivs: Vec<_> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let derivs: Vec<_> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Jet2::constant(self.order, 1.0);
        for _ in 0..n {
            acc = acc.mul_jet(self);
        }
        acc
    }

    fn ensure_order(&self, requested: usize) -> Result<()> {
        if requested > self.order {
            return Err(Error::OrderExhausted {
                requested,
                order: self.order,
            });
        }
        Ok(())
    }

    /// Partial derivative in `u`; the result has order `K - 1`.
    pub fn du(&self) -> Result<Self> {
        self.ensure_order(1)?;
        let order = self.order - 1;
        Ok(Jet2::from_taylor(order, |j, k| {
            self.coeffs[idx(j + 1, k)] * (j + 1) as f64
        }))
    }

    /// Partial derivative in `v`; the result has order `K - 1`.
    pub fn dv(&self) -> Result<Self> {
        self.ensure_order(1)?;
        let order = self.order - 1;
        Ok(Jet2::from_taylor(order, |j, k| {
            self.coeffs[idx(j, k + 1)] * (k + 1) as f64
        }))
    }

    /// Wirtinger derivative `d/dz = (d/du - i d/dv) / 2`.
    pub fn dz(&self) -> Result<Self> {
        self.ensure_order(1)?;
        let order = self.order - 1;
        let mi = Complex64::new(0.0, -1.0);
        Ok(Jet2::from_taylor(order, |j, k| {
            0.5 * (self.coeffs[idx(j + 1, k)] * (j + 1) as f64
                + mi * self.coeffs[idx(j, k + 1)] * (k + 1) as f64)
        }))
    }

    /// Wirtinger derivative `d/dzbar = (d/du + i d/dv) / 2`.
    pub fn dzb(&self) -> Result<Self> {
        self.ensure_order(1)?;
        let order = self.order - 1;
        let pi = Complex64::new(0.0, 1.0);
        Ok(Jet2::from_taylor(order, |j, k| {
            0.5 * (self.coeffs[idx(j + 1, k)] * (j + 1) as f64
                + pi * self.coeffs[idx(j, k + 1)] * (k + 1) as f64)
        }))
    }

    /// Applies `(d/dz)^p (d/dzbar)^q`; the result has order `K - p - q`.
    pub fn wirtinger(&self, p: usize, q: usize) -> Result<Self> {
        self.ensure_order(p + q)?;
        let mut out = self.clone();
        for _ in 0..p {
            out = out.dz()?;
        }
        for _ in 0..q {
            out = out.dzb()?;
        }
        Ok(out)
    }
}

/// Public entry point for `(d/dz)^p (d/dzbar)^q`.
pub fn wirtinger(x: &Jet2, p: usize, q: usize) -> Result<Jet2> {
    x.wirtinger(p, q)
}

/// Constant term of a jet.
pub fn eval0(x: &Jet2) -> Complex64 {
    x.value()
}

impl Scalar for Jet2 {
    fn plus(&self, o: &Self) -> Self {
        self.zip_with(o, |a, b| a + b)
    }
    fn minus(&self, o: &Self) -> Self {
        self.zip_with(o, |a, b| a - b)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn scaled(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn conj(&self) -> Self {
        Jet2::conj(self)
    }
    fn lift(&self, c: Complex64) -> Self {
        Jet2::constant(self.order, c)
    }
    fn value(&self) -> Complex64 {
        self.coeffs[0]
    }
}

impl Add<&Jet2> for &Jet2 {
    type Output = Jet2;
    fn add(self, o: &Jet2) -> Jet2 {
        self.plus(o)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        self.plus(&o)
    }
}

impl AddAssign<&Jet2> for Jet2 {
    fn add_assign(&mut self, o: &Jet2) {
        if o.order < self.order {
            *self = self.truncated(o.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *a += b;
        }
    }
}

impl Sub<&Jet2> for &Jet2 {
    type Output = Jet2;
    fn sub(self, o: &Jet2) -> Jet2 {
        self.minus(o)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self.minus(&o)
    }
}

impl Mul<&Jet2> for &Jet2 {
    type Output = Jet2;
    fn mul(self, o: &Jet2) -> Jet2 {
        self.mul_jet(o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        self.mul_jet(&o)
    }
}

impl Mul<f64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Mul<Complex64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, c: Complex64) -> Jet2 {
        self.scale(c)
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl JetVec {
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet2::order).min().unwrap_or(0)
    }

    pub fn dz(&self) -> Result<JetVec> {
        Ok(Vector::new(
            self.comps.iter().map(Jet2::dz).collect::<Result<_>>()?,
        ))
    }

    pub fn dzb(&self) -> Result<JetVec> {
        Ok(Vector::new(
            self.comps.iter().map(Jet2::dzb).collect::<Result<_>>()?,
        ))
    }

    pub fn du(&self) -> Result<JetVec> {
        Ok(Vector::new(
            self.comps.iter().map(Jet2::du).collect::<Result<_>>()?,
        ))
    }

    pub fn dv(&self) -> Result<JetVec> {
        Ok(Vector::new(
            self.comps.iter().map(Jet2::dv).collect::<Result<_>>()?,
        ))
    }

    pub fn truncated(&self, order: usize) -> JetVec {
        self.map(|c| c.truncated(order))
    }

    /// Largest coefficient over all components.
    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(Jet2::sup_norm).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sine_series_at_origin() {
        let u = Jet2::variable_u(5, 0.0);
        let s = u.sin();
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0, 1.0];
        for (j, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(s.partial(j, 0).re, *e, epsilon = 1e-14);
            assert_abs_diff_eq!(s.partial(j, 0).im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let u = Jet2::variable_u(6, 0.3);
        let v = Jet2::variable_v(6, -0.7);
        let x = &(&u * &u) + &(&v.cos() * 2.0);
        let x = &x + &Jet2::constant(6, 1.5);
        let r = x.try_sqrt().unwrap();
        let back = &r * &r;
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn recip_of_small_constant_is_singular() {
        let x = Jet2::constant(3, 1e-14);
        assert!(matches!(x.try_recip(), Err(Error::SingularJet { .. })));
    }

    #[test]
    fn holomorphic_coordinate() {
        let u = Jet2::variable_u(4, 0.2);
        let v = Jet2::variable_v(4, 0.1);
        let z = &u + &v.scale(Complex64::i());
        assert_abs_diff_eq!((z.dz().unwrap().value() - c(1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.dzb().unwrap().value().norm(), 0.0, epsilon = 1e-15);
        let zz = &z * &z.conj();
        assert_abs_diff_eq!((zz.wirtinger(1, 1).unwrap().value() - c(1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eval0_of_dz_is_coefficient_combination() {
        let x = Jet2::from_taylor(3, |j, k| Complex64::new((j + 2 * k) as f64, (j * k) as f64 + 0.5));
        let dz = x.wirtinger(1, 0).unwrap();
        let expect = 0.5 * (x.taylor(1, 0) - Complex64::i() * x.taylor(0, 1));
        assert!((dz.value() - expect).norm() < 1e-15);
    }

    #[test]
    fn order_exhaustion_is_reported() {
        let x = Jet2::variable_u(2, 0.0);
        assert!(matches!(x.wirtinger(2, 1), Err(Error::OrderExhausted { .. })));
        assert_eq!(x.wirtinger(1, 1).unwrap().order(), 0);
    }

    #[test]
    fn exp_and_trig_are_consistent() {
        let u = Jet2::variable_u(7, 0.4);
        let v = Jet2::variable_v(7, 1.1);
        let w = &u.scale(Complex64::i()) + &v.scale(0.3);
        let e = w.exp();
        // exp(i x) = cos x + i sin x for the u-part; check via exp(a)exp(-a) = 1
        let back = &e * &w.scale(-1.0).exp();
        assert!((back.value() - c(1.0)).norm() < 1e-14);
        for coef in &back.coeffs()[1..] {
            assert!(coef.norm() < 1e-13);
        }
        let s = u.sin();
        let co = u.cos();
        let one = &(&s * &s) + &(&co * &co);
        assert!((one.value() - c(1.0)).norm() < 1e-14);
        assert!(one.coeffs()[1..].iter().all(|x| x.norm() < 1e-13));
    }

    /// Dense polynomial `sum c[a][b] u^a v^b` used as an independent oracle.
    #[derive(Clone, Debug)]
    struct Poly(Vec<Vec<f64>>);

    impl Poly {
        fn mul(&self, o: &Poly) -> Poly {
            let n = self.0.len() + o.0.len() - 1;
            let mut out = vec![vec![0.0; n]; n];
            for (a, row) in self.0.iter().enumerate() {
                for (b, x) in row.iter().enumerate() {
                    for (c, row2) in o.0.iter().enumerate() {
                        for (d, y) in row2.iter().enumerate() {
                            out[a + c][b + d] += x * y;
                        }
                    }
                }
            }
            Poly(out)
        }

        /// `d^j_u d^k_v` evaluated at `(u0, v0)` by differentiating monomials.
        fn partial(&self, j: usize, k: usize, u0: f64, v0: f64) -> f64 {
            let falling = |n: usize, m: usize| (0..m).fold(1.0, |acc, i| acc * (n - i) as f64);
            let mut s = 0.0;
            for (a, row) in self.0.iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    if a >= j && b >= k {
                        s += c * falling(a, j) * falling(b, k)
                            * u0.powi((a - j) as i32) * v0.powi((b - k) as i32);
                    }
                }
            }
            s
        }

        fn jet(&self, order: usize, u0: f64, v0: f64) -> Jet2 {
            let u = Jet2::variable_u(order, u0);
            let v = Jet2::variable_v(order, v0);
            let mut acc = Jet2::zero(order);
            for (a, row) in self.0.iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    acc += &(&u.powi(a as u32) * &v.powi(b as u32)).scale(*c);
                }
            }
            acc
        }
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 4).prop_map(|rows| {
            // keep total degree <= 3
            Poly(rows.into_iter().enumerate()
                .map(|(a, r)| r.into_iter().enumerate().map(|(b, c)| if a + b <= 3 { c } else { 0.0 }).collect())
                .collect())
        })
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = Jet2> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (order + 1) * (order + 2) / 2)
            .prop_map(move |c| {
                let mut it = c.into_iter();
                Jet2::from_taylor(order, |_, _| { let (a, b) = it.next().unwrap(); Complex64::new(a, b) })
            })
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn product_partials_match_polynomial_oracle(p in arb_poly(), q in arb_poly(),
                                                    u0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
            let k = 6;
            let prod = &p.jet(k, u0, v0) * &q.jet(k, u0, v0);
            let oracle = p.mul(&q);
            for d in 0..=k {
                for b in 0..=d {
                    let expect = oracle.partial(d - b, b, u0, v0);
                    let got = prod.partial(d - b, b);
                    prop_assert!((got.re - expect).abs() < 1e-13 * (1.0 + expect.abs()) * 10.0,
                        "({}, {}): {} vs {}", d - b, b, got, expect);
                    prop_assert!(got.im.abs() < 1e-13);
                }
            }
        }

        #[test]
        fn laplacian_identity(p in arb_poly(), u0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
            let x = p.jet(5, u0, v0);
            let lhs = x.wirtinger(1, 1).unwrap();
            let rhs = &x.du().unwrap().du().unwrap() + &x.dv().unwrap().dv().unwrap();
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((a - b * 0.25).norm() < 1e-14);
            }
        }

        #[test]
        fn wirtinger_operators_commute(x in arb_jet(5)) {
            let a = x.dz().unwrap().dzb().unwrap();
            let b = x.dzb().unwrap().dz().unwrap();
            prop_assert_eq!(a.order(), b.order());
            for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((p - q).norm() < 1e-14);
            }
        }

        #[test]
        fn conjugation_swaps_wirtinger(x in arb_jet(4)) {
            let a = x.conj().dz().unwrap();
            let b = x.dzb().unwrap().conj();
            for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((p - q).norm() < 1e-15);
            }
        }

        #[test]
        fn product_rule(f in arb_jet(5), g in arb_jet(5)) {
            let lhs = (&f * &g).dz().unwrap();
            let rhs = &(&f.dz().unwrap() * &g) + &(&f * &g.dz().unwrap());
            for (p, q) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((p - q).norm() < 1e-13);
            }
        }

        #[test]
        fn real_jets_have_conjugate_wirtinger(p in arb_poly(), u0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
            let x = p.jet(4, u0, v0);
            prop_assert!(x.imag_defect() == 0.0);
            let a = x.wirtinger(0, 1).unwrap();
            let b = x.wirtinger(1, 0).unwrap().conj();
            for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((p - q).norm() < 1e-15);
            }
        }
    }
}
