//! Adjoint transforms of Willmore surfaces.
//!
//! An adjoint transform is a conformal map `Yhat` lying on the mean curvature
//! sphere of `Y` and co-touching it there. Writing
//! `Yhat = |mu|^2/2 Y + conj(mu) Y_z + mu Y_zbar + N`, the connection
//! coefficient `mu` must satisfy co-touching `mu_z - mu^2/2 - s = 0` and
//! conformality `<eta, eta> = 0` with `eta = D_zbar kappa + conj(mu)/2 kappa`.
//!
//! Three ways to obtain `mu` are provided: the conformality quadratic, the
//! S-Willmore coefficient, and user-supplied solutions of Hill's equation
//! `y_zz + (s/2) y = 0` through `mu = -2 y_z / y`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{chart_lift, SampledSurface, SurfaceChart};
use crate::error::{Error, Result};
use crate::grid::{GridPoint, GridSpec};
use crate::invariants::{frame_at_with, willmore_residual, FramePoint, ResidualReport};
use crate::jet::{Jet2, JetVec};
use crate::lorentz::projective_distance;
use crate::tolerances;

/// Roots in `mu` of the conformality quadratic
/// `<kappa,kappa>/4 mubar^2 + <D kappa, kappa> mubar + <D kappa, D kappa> = 0`.
#[derive(Clone, Debug)]
pub struct QuadraticRoots {
    /// `mu` for the `+` and `-` sign of the square root.
    pub roots: [Jet2; 2],
    pub discriminant: Complex64,
    /// The discriminant is below the merge threshold; both roots equal
    /// `-b / 2a` and are only continuous, not smooth, across the point.
    pub merged: bool,
}

/// Solves `a x^2 + b x + c = 0` for jets and returns the conjugated roots.
pub fn quadratic_roots(a: &Jet2, b: &Jet2, c: &Jet2) -> Result<QuadraticRoots> {
    let value = a.value().norm();
    if value < tolerances::QUADRATIC_DEGENERATE {
        return Err(Error::DegenerateQuadratic { value });
    }
    let disc = &(b * b) - &(&(a * c) * 4.0);
    let two_a = a * 2.0;
    let discriminant = disc.value();
    let merged = discriminant.norm() < tolerances::BRANCH_MERGE;
    let roots = if merged {
        let r = (-b).try_div(&two_a)?.conj();
        [r.clone(), r]
    } else {
        let sq = disc.try_sqrt()?;
        [
            (&sq - b).try_div(&two_a)?.conj(),
            (&(-b) - &sq).try_div(&two_a)?.conj(),
        ]
    };
    Ok(QuadraticRoots {
        roots,
        discriminant,
        merged,
    })
}

/// Coefficients `(a, b, c)` of the conformality quadratic in `conj(mu)`.
pub fn quadratic_coefficients(fp: &FramePoint) -> Result<[Jet2; 3]> {
    let k = &fp.kappa;
    let dk = fp.dzb_kappa()?;
    Ok([k.inner(k).scale(0.25), dk.inner(k), dk.inner(&dk)])
}

pub fn mu_quadratic(fp: &FramePoint) -> Result<QuadraticRoots> {
    let [a, b, c] = quadratic_coefficients(fp)?;
    quadratic_roots(&a, &b, &c)
}

/// `conj(mu) = -2 c` for `D_zbar kappa = c kappa`, with `c` the least-squares
/// coefficient. Fails when the parallelism defect exceeds the S-Willmore
/// threshold.
pub fn swillmore_mu_bar(kappa: &JetVec, dzb_kappa: &JetVec) -> Result<Jet2> {
    swillmore_mu_bar_with(kappa, dzb_kappa, tolerances::S_WILLMORE)
}

fn swillmore_mu_bar_with(kappa: &JetVec, dzb_kappa: &JetVec, tol: f64) -> Result<Jet2> {
    let kb = kappa.conj();
    let kk = kappa.inner(&kb);
    let value = kk.value().re;
    if value < tolerances::UMBILIC {
        return Err(Error::Umbilic { value });
    }
    let c = dzb_kappa.inner(&kb).try_div(&kk)?;
    let defect_vec = dzb_kappa.value().sub(&kappa.value().scaled(c.value()));
    let defect = defect_vec.herm_sq().norm().sqrt();
    if !(defect <= tol) {
        return Err(Error::NotSWillmore { defect });
    }
    Ok(c.scale(-2.0))
}

pub fn mu_swillmore(fp: &FramePoint) -> Result<Jet2> {
    mu_swillmore_with(fp, tolerances::S_WILLMORE)
}

fn mu_swillmore_with(fp: &FramePoint, tol: f64) -> Result<Jet2> {
    Ok(swillmore_mu_bar_with(&fp.kappa, &fp.dzb_kappa()?, tol)?.conj())
}

/// `theta = mu_z - mu^2/2 - s` and `<eta, eta>` at the point.
pub fn adjoint_conditions(fp: &FramePoint, mu: &Jet2) -> Result<(Complex64, Complex64)> {
    let theta = &(&mu.dz()? - &(mu * mu).scale(0.5)) - &fp.s;
    let eta = fp
        .dzb_kappa()?
        .add(&fp.kappa.times(&mu.conj().scale(0.5)));
    Ok((theta.value(), eta.inner(&eta).value()))
}

/// Connection coefficient from a Hill solution, with the co-touching
/// residual it produces.
#[derive(Clone, Debug)]
pub struct HillMu {
    pub mu: Jet2,
    pub theta: f64,
    pub conformality: f64,
}

/// Co-touching residual accepted for Hill-derived `mu`.
const HILL_THETA: f64 = 1e-9;

/// `mu = -2 y_z / y`; `y` must solve `y_zz + (s/2) y = 0` near the point.
pub fn mu_from_hill(fp: &FramePoint, y: &Jet2) -> Result<HillMu> {
    let value = y.value().norm();
    if value < tolerances::SINGULAR_JET {
        return Err(Error::HillZero { value });
    }
    let mu = y.dz()?.try_div(y)?.scale(-2.0);
    let (theta, conf) = adjoint_conditions(fp, &mu)?;
    let (theta, conformality) = (theta.norm(), conf.norm());
    if theta > HILL_THETA {
        return Err(Error::NotAdjoint {
            theta,
            conformality,
        });
    }
    Ok(HillMu {
        mu,
        theta,
        conformality,
    })
}

/// Hill solution given as a polynomial `sum c z^p zbar^q` in `z = u + i v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillPolynomial {
    pub terms: Vec<HillTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillTerm {
    /// `[re, im]`.
    pub coeff: [f64; 2],
    #[serde(default)]
    pub z: u32,
    #[serde(default)]
    pub zbar: u32,
}

impl Default for HillPolynomial {
    fn default() -> Self {
        HillPolynomial {
            terms: vec![HillTerm {
                coeff: [1.0, 0.0],
                z: 0,
                zbar: 0,
            }],
        }
    }
}

impl HillPolynomial {
    pub fn eval(&self, u: f64, v: f64, order: usize) -> Jet2 {
        let z = &Jet2::variable_u(order, u) + &Jet2::variable_v(order, v).scale(Complex64::i());
        let zb = z.conj();
        let mut acc = Jet2::zero(order);
        for t in &self.terms {
            let c = Complex64::new(t.coeff[0], t.coeff[1]);
            acc += &(&z.powi(t.z) * &zb.powi(t.zbar)).scale(c);
        }
        acc
    }
}

/// Adjoint data at one point; jets keep the orders left after differentiation.
#[derive(Clone, Debug)]
pub struct AdjointPoint {
    pub mu: Jet2,
    pub eta: JetVec,
    pub rho: Jet2,
    pub sigma: Jet2,
    pub yhat: JetVec,
    /// Canonical lift of the adjoint surface, `Yhat / sigma`.
    pub ytilde: JetVec,
    pub mutilde: Jet2,
    pub stilde: Jet2,
    pub ntilde: JetVec,
    pub discriminant: Option<Complex64>,
    /// Co-touching and conformality residuals of `mu`.
    pub theta: f64,
    pub conformality: f64,
}

pub fn adjoint_point(fp: &FramePoint, mu: &Jet2) -> Result<AdjointPoint> {
    adjoint_point_with(fp, mu, tolerances::RESIDUAL)
}

/// Builds the adjoint after checking that the base is Willmore and that
/// `mu` meets both adjoint conditions within `tol`.
pub fn adjoint_point_with(fp: &FramePoint, mu: &Jet2, tol: f64) -> Result<AdjointPoint> {
    let residual = willmore_residual(fp)?;
    if !(residual <= tol) {
        return Err(Error::NotWillmore { residual });
    }
    let (theta, conf) = adjoint_conditions(fp, mu)?;
    let (theta, conformality) = (theta.norm(), conf.norm());
    if !(theta <= tol && conformality <= tol) {
        return Err(Error::NotAdjoint {
            theta,
            conformality,
        });
    }
    let f = &fp.frame;
    let mub = mu.conj();
    let yhat = JetVec::combination(&[
        (&(mu * &mub).scale(0.5), &f.y),
        (&mub, &f.yz),
        (mu, &f.yzb),
    ])
    .add(&f.n);
    let eta = fp.dzb_kappa()?.add(&fp.kappa.times(&mub.scale(0.5)));
    let rho = &mub.dz()? - &fp.kappa.herm_sq().scale(2.0);
    let sigma_sq = &eta.herm_sq().scale(8.0) + &(&rho * &rho.conj());
    let sigma_val = sigma_sq.value().re.max(0.0).sqrt();
    if sigma_val < tolerances::SIGMA_DEGENERATE {
        return Err(Error::DegenerateAdjoint { sigma: sigma_val });
    }
    let sigma = sigma_sq.try_sqrt()?;
    let inv = sigma.try_recip()?;
    let ytilde = yhat.truncated(inv.order()).times(&inv);
    let mutilde = &sigma.dz()?.try_div(&sigma)?.scale(2.0) - mu;
    let mtb = mutilde.conj();
    let ytz = ytilde.dz()?;
    let ytzb = ytilde.dzb()?;
    let ntilde = JetVec::combination(&[
        (&(&mutilde * &mtb).scale(-0.5), &ytilde),
        (&mutilde.scale(-1.0), &ytzb),
        (&mtb.scale(-1.0), &ytz),
        (&sigma, &f.y),
    ]);
    let stilde = &mutilde.dz()? - &(&mutilde * &mutilde).scale(0.5);
    Ok(AdjointPoint {
        mu: mu.clone(),
        eta,
        rho,
        sigma,
        yhat,
        ytilde,
        mutilde,
        stilde,
        ntilde,
        discriminant: None,
        theta,
        conformality,
    })
}

impl AdjointPoint {
    /// Sphere point of the adjoint surface.
    pub fn sphere_point(&self) -> Vec<f64> {
        let y = self.ytilde.value().re();
        let c = y.coords();
        c[1..].iter().map(|x| x / c[0]).collect()
    }
}

/// Duality residuals at one point. The adjoint lift is framed afresh, so the
/// closed forms for `s~` and `N~` are checked against an independent route.
pub fn duality_check(fp: &FramePoint, ap: &AdjointPoint) -> Result<ResidualReport> {
    duality_check_with(fp, ap, tolerances::FRAME_GRAM)
}

/// [`duality_check`] with an explicit Gram tolerance for framing the adjoint.
pub fn duality_check_with(fp: &FramePoint, ap: &AdjointPoint, gram_tol: f64) -> Result<ResidualReport> {
    let mut r = ResidualReport::new();
    let tfp = frame_at_with(&ap.ytilde, gram_tol)?;
    r.record("adjoint_willmore", willmore_residual(&tfp)?);

    let mtb = ap.mutilde.conj();
    let rho_tilde = &mtb.dz()? - &tfp.kappa.herm_sq().scale(2.0);
    r.record("rho_duality", (rho_tilde.value() - ap.rho.value().conj()).norm());

    let log_sigma_z = ap.sigma.dz()?.try_div(&ap.sigma)?.value();
    r.record(
        "mutilde_identity",
        (ap.mutilde.value() + ap.mu.value() - 2.0 * log_sigma_z).norm(),
    );

    let back_theta = &(&ap.mutilde.dz()? - &(&ap.mutilde * &ap.mutilde).scale(0.5)) - &tfp.s;
    r.record("back_cotouch", back_theta.value().norm());
    let eta_tilde = tfp.dzb_kappa()?.add(&tfp.kappa.times(&mtb.scale(0.5)));
    r.record("back_conformality", eta_tilde.inner(&eta_tilde).value().norm());

    let sigma = ap.sigma.value().re;
    let pairing = ap.ytilde.value().inner(&fp.y().value());
    r.record("sigma_pairing", (pairing + 1.0 / sigma).norm());
    let yhz = ap.yhat.dz()?.value();
    let yhzb = ap.yhat.dzb()?.value();
    r.record("sigma_route", (yhz.inner(&yhzb) * 2.0 - sigma * sigma).norm());

    r.record("stilde_crosscheck", (ap.stilde.value() - tfp.s.value()).norm());
    r.record("ntilde_crosscheck", ap.ntilde.value().sub(&tfp.n().value()).coord_norm());

    // back-adjoint with mu' = mu~ lands on sigma Y
    let t = tfp.value_frame();
    let m = ap.mutilde.value();
    let back = t
        .y
        .scaled((0.5 * m.norm_sqr()).into())
        .add(&t.yz.scaled(m.conj()))
        .add(&t.yzb.scaled(m))
        .add(&t.n);
    r.record(
        "round_trip",
        projective_distance(back.re().coords(), fp.y().value().re().coords()),
    );
    Ok(r)
}

/// How `mu` is chosen over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BranchSpec {
    /// Roots of the conformality quadratic; `root` (0 or 1) seeds the first
    /// point of the traversal. Points where the quadratic degenerates fall
    /// back to the S-Willmore coefficient.
    Quadratic {
        #[serde(default)]
        root: usize,
    },
    Swillmore,
    Hill {
        #[serde(default)]
        y: HillPolynomial,
    },
}

impl BranchSpec {
    /// Parses a CLI branch name with default parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(BranchSpec::Quadratic { root: 0 }),
            "swillmore" => Ok(BranchSpec::Swillmore),
            "hill" => Ok(BranchSpec::Hill {
                y: HillPolynomial::default(),
            }),
            other => Err(Error::Invalid(format!(
                "unknown branch `{other}`; expected quadratic, swillmore or hill"
            ))),
        }
    }
}

/// Source of the selected `mu` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuLabel {
    /// Quadratic root with the given sign index.
    Root(usize),
    Swillmore,
    /// S-Willmore coefficient used where `<kappa, kappa>` vanishes.
    SwillmoreFallback,
    Hill,
    Masked,
}

enum Candidate {
    Roots(QuadraticRoots),
    Single(Jet2, MuLabel),
}

fn candidate(fp: &FramePoint, branch: &BranchSpec, p: &GridPoint, tol: f64) -> Result<Candidate> {
    let sw_tol = tolerances::S_WILLMORE.max(tol);
    match branch {
        BranchSpec::Quadratic { .. } => match mu_quadratic(fp) {
            Ok(q) => Ok(Candidate::Roots(q)),
            Err(Error::DegenerateQuadratic { .. }) => {
                Ok(Candidate::Single(mu_swillmore_with(fp, sw_tol)?, MuLabel::SwillmoreFallback))
            }
            Err(e) => Err(e),
        },
        BranchSpec::Swillmore => Ok(Candidate::Single(mu_swillmore_with(fp, sw_tol)?, MuLabel::Swillmore)),
        BranchSpec::Hill { y } => {
            let order = fp.y().order();
            let h = mu_from_hill(fp, &y.eval(p.u, p.v, order))?;
            Ok(Candidate::Single(h.mu, MuLabel::Hill))
        }
    }
}

/// Selected `mu` over a lattice, with branch labels and the mask.
#[derive(Clone, Debug, Serialize)]
pub struct MuField {
    pub grid: GridSpec,
    #[serde(skip)]
    pub points: Vec<GridPoint>,
    pub mu: Vec<Option<Complex64>>,
    /// The quadratic root that was not selected.
    pub alternate: Vec<Option<Complex64>>,
    pub labels: Vec<MuLabel>,
    pub discriminant: Vec<Option<Complex64>>,
    /// Branch-merge points, where continuity of the label is not enforced.
    pub merge: Vec<bool>,
    pub mask_reason: Vec<Option<String>>,
    #[serde(skip)]
    jets: Vec<Option<Jet2>>,
}

impl MuField {
    pub fn masked(&self) -> usize {
        self.labels.iter().filter(|l| **l == MuLabel::Masked).count()
    }

    pub fn unmasked_fraction(&self) -> f64 {
        1.0 - self.masked() as f64 / self.labels.len().max(1) as f64
    }

    pub fn jet(&self, k: usize) -> Option<&Jet2> {
        self.jets[k].as_ref()
    }
}

/// Boustrophedon order over a row-major `nu x nv` lattice.
pub fn serpentine(grid: &GridSpec) -> Vec<usize> {
    let mut order = Vec::with_capacity(grid.len());
    for i in 0..grid.nu {
        if i % 2 == 0 {
            order.extend((0..grid.nv).map(|j| i * grid.nv + j));
        } else {
            order.extend((0..grid.nv).rev().map(|j| i * grid.nv + j));
        }
    }
    order
}

/// Turns degeneracies into a masked outcome carrying the reason; other
/// errors abort the sweep.
fn masked<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(t) => Ok(Ok(t)),
        Err(e) if e.is_degeneracy() => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Chooses `mu` along the serpentine traversal. Pointwise candidates are
/// computed in parallel; the continuity selection is the only sequential,
/// order-dependent step.
fn select_mu(
    grid: GridSpec,
    points: Vec<GridPoint>,
    frames: &[std::result::Result<FramePoint, String>],
    branch: &BranchSpec,
    tol: f64,
) -> Result<MuField> {
    let cands: Vec<std::result::Result<Candidate, String>> = frames
        .par_iter()
        .zip(&points)
        .map(|(f, p)| match f {
            Ok(fp) => masked(candidate(fp, branch, p, tol)),
            Err(reason) => Ok(Err(reason.clone())),
        })
        .collect::<Result<_>>()?;
    let n = points.len();
    let mut field = MuField {
        grid,
        points,
        mu: vec![None; n],
        alternate: vec![None; n],
        labels: vec![MuLabel::Masked; n],
        discriminant: vec![None; n],
        merge: vec![false; n],
        mask_reason: vec![None; n],
        jets: vec![None; n],
    };
    let seed_root = match branch {
        BranchSpec::Quadratic { root } => (*root).min(1),
        _ => 0,
    };
    let mut prev: Option<Complex64> = None;
    let mut prev_idx = seed_root;
    let mut cands: Vec<Option<std::result::Result<Candidate, String>>> =
        cands.into_iter().map(Some).collect();
    for k in serpentine(&grid) {
        match cands[k].take().expect("each site visited once") {
            Err(reason) => field.mask_reason[k] = Some(reason),
            Ok(Candidate::Single(mu, label)) => {
                prev = Some(mu.value());
                field.mu[k] = prev;
                field.labels[k] = label;
                field.jets[k] = Some(mu);
            }
            Ok(Candidate::Roots(q)) => {
                // ties (merged roots) keep the label of the previous site
                let idx = match prev {
                    Some(p) if !q.merged => {
                        let d0 = (q.roots[0].value() - p).norm();
                        let d1 = (q.roots[1].value() - p).norm();
                        if d0 == d1 {
                            prev_idx
                        } else {
                            usize::from(d1 < d0)
                        }
                    }
                    _ => prev_idx,
                };
                prev_idx = idx;
                let [r0, r1] = q.roots;
                let (chosen, other) = if idx == 0 { (r0, r1) } else { (r1, r0) };
                prev = Some(chosen.value());
                field.mu[k] = prev;
                field.alternate[k] = Some(other.value());
                field.labels[k] = MuLabel::Root(idx);
                field.discriminant[k] = Some(q.discriminant);
                field.merge[k] = q.merged;
                field.jets[k] = Some(chosen);
            }
        }
    }
    Ok(field)
}

/// Adjoint transform sampled over a lattice with its duality report.
#[derive(Clone, Debug)]
pub struct AdjointField {
    pub mu: MuField,
    /// Frames of the base surface; `None` where the frame itself failed.
    pub frames: Vec<Option<FramePoint>>,
    pub adjoint: Vec<Option<AdjointPoint>>,
    /// Sup of the pointwise duality residuals over unmasked points.
    pub report: ResidualReport,
    /// Points masked by `mu` selection or by a vanishing `sigma`.
    pub masked: usize,
}

impl AdjointField {
    /// Builds the adjoint of `chart` over the quadrature lattice of `grid`.
    pub fn build(chart: &SurfaceChart, grid: &GridSpec, branch: &BranchSpec) -> Result<Self> {
        Self::build_at(chart, *grid, grid.points(&chart.domain), branch)
    }

    /// Builds over arbitrary lattice sites laid out row-major as `grid`.
    pub fn build_at(
        chart: &SurfaceChart,
        grid: GridSpec,
        points: Vec<GridPoint>,
        branch: &BranchSpec,
    ) -> Result<Self> {
        Self::build_with(chart, grid, points, branch, tolerances::RESIDUAL)
    }

    /// As [`AdjointField::build_at`], with `tol` gating the Willmore and
    /// adjoint conditions of the base.
    pub fn build_with(
        chart: &SurfaceChart,
        grid: GridSpec,
        points: Vec<GridPoint>,
        branch: &BranchSpec,
        tol: f64,
    ) -> Result<Self> {
        let gram_tol = tolerances::FRAME_GRAM.max(tol);
        let frames: Vec<std::result::Result<FramePoint, String>> = points
            .par_iter()
            .map(|p| {
                masked(
                    chart_lift(chart, p.u, p.v, tolerances::ADJOINT_ORDER)
                        .and_then(|y| frame_at_with(&y, gram_tol)),
                )
            })
            .collect::<Result<_>>()?;
        let mu = select_mu(grid, points, &frames, branch, tol)?;
        let built: Vec<std::result::Result<(AdjointPoint, ResidualReport), String>> = frames
            .par_iter()
            .enumerate()
            .map(|(k, f)| {
                let (Ok(fp), Some(m)) = (f, mu.jet(k)) else {
                    return Ok(Err(String::new()));
                };
                let run = || -> Result<(AdjointPoint, ResidualReport)> {
                    let mut ap = adjoint_point_with(fp, m, tol)?;
                    ap.discriminant = mu.discriminant[k];
                    let report = duality_check_with(fp, &ap, gram_tol)?;
                    Ok((ap, report))
                };
                masked(run())
            })
            .collect::<Result<_>>()?;
        let mut report = ResidualReport::new();
        let mut adjoint = Vec::with_capacity(built.len());
        let mut masked = 0;
        for b in built {
            match b {
                Ok((ap, r)) => {
                    report.record("cotouch", ap.theta);
                    report.record("conformality", ap.conformality);
                    report.merge(&r);
                    adjoint.push(Some(ap));
                }
                Err(_) => {
                    masked += 1;
                    adjoint.push(None);
                }
            }
        }
        Ok(AdjointField {
            mu,
            frames: frames.into_iter().map(|f| f.ok()).collect(),
            adjoint,
            report,
            masked,
        })
    }

    pub fn unmasked_fraction(&self) -> f64 {
        1.0 - self.masked as f64 / self.adjoint.len().max(1) as f64
    }
}

/// Samples the adjoint surface at the spectral nodes of `grid` for
/// re-ingestion through [`SampledSurface::to_chart`].
pub fn export_adjoint(
    chart: &SurfaceChart,
    grid: &GridSpec,
    branch: &BranchSpec,
) -> Result<SampledSurface> {
    let (us, vs) = grid.spectral_nodes(&chart.domain);
    let mut points = Vec::with_capacity(grid.len());
    for (i, u) in us.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            points.push(GridPoint {
                i,
                j,
                u: *u,
                v: *v,
                weight: 0.0,
            });
        }
    }
    let field = AdjointField::build_at(chart, *grid, points, branch)?;
    if field.masked > 0 {
        return Err(Error::Invalid(format!(
            "cannot export an adjoint with {} masked nodes",
            field.masked
        )));
    }
    Ok(SampledSurface {
        nu: grid.nu,
        nv: grid.nv,
        domain: chart.domain,
        points: field
            .adjoint
            .iter()
            .map(|a| a.as_ref().expect("unmasked").sphere_point())
            .collect(),
    })
}

/// Adjoint-of-adjoint round trip through an exported chart: the largest
/// projective distance between the original lift and the adjoint of the
/// re-ingested adjoint surface, over the sites `check`.
///
/// The re-ingested chart is an interpolant, so its Willmore residual sits at
/// the interpolation error; `tol` gates it instead of the default.
pub fn round_trip_distance(
    chart: &SurfaceChart,
    export_grid: &GridSpec,
    check: &GridSpec,
    check_points: Vec<GridPoint>,
    branch: &BranchSpec,
    tol: f64,
) -> Result<f64> {
    let adj = export_adjoint(chart, export_grid, branch)?.to_chart(format!("{}-adjoint", chart.name))?;
    let back = AdjointField::build_with(&adj, *check, check_points.clone(), branch, tol)?;
    let mut worst: f64 = 0.0;
    for (p, a) in check_points.iter().zip(&back.adjoint) {
        let Some(a) = a else {
            return Err(Error::Invalid("round trip hit a masked point".into()));
        };
        let orig = crate::chart::light_cone_lift(chart, p.u, p.v, 0)?.value().re();
        worst = worst.max(projective_distance(
            a.ytilde.value().re().coords(),
            orig.coords(),
        ));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{catalog, ChartParams};
    use crate::invariants::{frame_at, frame_at_chart};
    use crate::lorentz::{random_lorentz, Vector};
    use proptest::prelude::*;

    const K: usize = tolerances::ADJOINT_ORDER;

    fn chart(name: &str) -> SurfaceChart {
        catalog(name, &ChartParams::default()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jet(order: usize, seed: [f64; 4]) -> Jet2 {
        Jet2::from_taylor(order, |j, k| {
            let t = (j * 3 + k * 5) as f64;
            c(seed[0] + seed[2] * (t * 0.7).sin(), seed[1] + seed[3] * (t * 1.3).cos())
        })
    }

    proptest! {
        #[test]
        fn quadratic_roots_satisfy_vieta(
            a in prop::array::uniform4(-2.0..2.0f64),
            b in prop::array::uniform4(-2.0..2.0f64),
            cc in prop::array::uniform4(-2.0..2.0f64),
        ) {
            let (a, b, cc) = (jet(4, a), jet(4, b), jet(4, cc));
            prop_assume!(a.value().norm() > 0.1);
            let disc = &(&b * &b) - &(&(&a * &cc) * 4.0);
            prop_assume!(disc.value().norm() > 0.1);
            let q = quadratic_roots(&a, &b, &cc).unwrap();
            let [r0, r1] = [q.roots[0].conj(), q.roots[1].conj()];
            for r in [&r0, &r1] {
                let lhs = &(&(&a * r) * r) + &(&(&b * r) + &cc);
                // jet division amplifies high coefficients; compare on the
                // scale of the largest term
                let (rs, scale) = (r.sup_norm(), 1.0 + cc.sup_norm());
                let scale = scale + a.sup_norm() * rs * rs + b.sup_norm() * rs;
                prop_assert!(lhs.sup_norm() < 1e-12 * scale);
            }
            let sum = &(&r0 + &r1) + &b.try_div(&a).unwrap();
            let prod = &(&r0 * &r1) - &cc.try_div(&a).unwrap();
            let scale = (1.0 + r0.sup_norm()) * (1.0 + r1.sup_norm());
            prop_assert!(sum.sup_norm() < 1e-13 * scale && prod.sup_norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn degenerate_quadratic_is_reported() {
        let z = Jet2::zero(3);
        let one = Jet2::constant(3, 1.0);
        assert!(matches!(
            quadratic_roots(&z, &one, &one),
            Err(Error::DegenerateQuadratic { .. })
        ));
        let fp = frame_at_chart(&chart("veronese"), 0.3, 0.2, K).unwrap();
        assert!(matches!(mu_quadratic(&fp), Err(Error::DegenerateQuadratic { .. })));
    }

    #[test]
    fn swillmore_coefficient_of_a_parallel_field() {
        let dim = 6;
        let kappa: JetVec = Vector::new((0..dim).map(|i| jet(3, [0.0, 0.0, 0.3 + i as f64 * 0.1, 0.2])).collect());
        let cj = jet(3, [0.4, -0.7, 0.1, 0.05]);
        let dk = kappa.times(&cj);
        let mub = swillmore_mu_bar(&kappa, &dk);
        // a general kappa need not lie in a definite subspace; only the
        // coefficient is at stake here
        let mub = mub.unwrap();
        assert!((&mub + &cj.scale(2.0)).sup_norm() < 1e-12);
        let mut skew = dk.clone();
        skew.comps[0] = &skew.comps[0] + &Jet2::constant(3, 0.1);
        assert!(matches!(
            swillmore_mu_bar(&kappa, &skew),
            Err(Error::NotSWillmore { .. })
        ));
    }

    #[test]
    fn clifford_adjoint_is_the_mean_curvature_sphere_point() {
        let fp = frame_at_chart(&chart("clifford"), 0.7, 1.9, K).unwrap();
        let q = mu_quadratic(&fp).unwrap();
        assert!(q.merged);
        assert!(q.roots[0].sup_norm() < 1e-14 && q.roots[1].sup_norm() < 1e-14);
        let mu = mu_swillmore(&fp).unwrap();
        assert!(mu.sup_norm() < 1e-14);
        let ap = adjoint_point(&fp, &mu).unwrap();
        assert!(ap.yhat.sub(&fp.n().truncated(ap.yhat.order())).sup_norm() < 1e-13);
        assert!((ap.rho.value() - c(-0.25, 0.0)).norm() < 1e-14);
        assert!(ap.eta.value().coord_norm() < 1e-14);
        assert!((ap.sigma.value() - c(0.25, 0.0)).norm() < 1e-14);
        assert!(ap.mutilde.sup_norm() < 1e-12);
        let (yt, nt) = (ap.ytilde.value(), ap.ntilde.value());
        assert!((nt.inner(&yt) + 1.0).norm() < 1e-13);
        assert!(nt.inner(&nt).norm() < 1e-13);
        assert!(nt.inner(&ap.ytilde.dz().unwrap().value()).norm() < 1e-13);
        let r = duality_check(&fp, &ap).unwrap();
        assert!(r.failures(1e-8).is_empty(), "{r:?}");
        assert!(r.get("mutilde_identity").unwrap() < 1e-13);
    }

    #[test]
    fn minimal_surfaces_are_dual_to_their_antipodes() {
        // the mean curvature spheres of a minimal surface in S^n are great
        // spheres, enveloped by f and -f
        for (name, u, v) in [("clifford", 0.4, 2.2), ("veronese", 0.3, -0.6), ("veronese", -0.9, 0.1)] {
            let ch = chart(name);
            let fp = frame_at_chart(&ch, u, v, K).unwrap();
            let ap = adjoint_point(&fp, &mu_swillmore(&fp).unwrap()).unwrap();
            let f = ch.point(u, v).unwrap();
            for (a, b) in ap.sphere_point().iter().zip(&f) {
                assert!((a + b).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn hill_solutions_give_cotouching_mu() {
        let fp = frame_at_chart(&chart("veronese"), 0.3, 0.2, K).unwrap();
        assert!(fp.s.sup_norm() < 1e-10);
        let one = HillPolynomial::default();
        let h = mu_from_hill(&fp, &one.eval(0.3, 0.2, K)).unwrap();
        assert!(h.mu.sup_norm() < 1e-15 && h.theta < 1e-12);

        let z = HillPolynomial {
            terms: vec![HillTerm { coeff: [1.0, 0.0], z: 1, zbar: 0 }],
        };
        let h = mu_from_hill(&fp, &z.eval(0.3, 0.2, K)).unwrap();
        assert!((h.mu.value() + 2.0 / c(0.3, 0.2)).norm() < 1e-13);
        assert!(h.theta < 1e-12);

        // an antiholomorphic factor (1 + zbar^2) leaves mu unchanged
        let hz = HillPolynomial {
            terms: vec![
                HillTerm { coeff: [1.0, 0.0], z: 1, zbar: 0 },
                HillTerm { coeff: [1.0, 0.0], z: 1, zbar: 2 },
            ],
        };
        let h2 = mu_from_hill(&fp, &hz.eval(0.3, 0.2, K)).unwrap();
        let d = (&h2.mu - &h.mu).sup_norm();
        assert!(d < 1e-12 * h.mu.sup_norm(), "{d:e} {}", h.mu.sup_norm());

        let sq = HillPolynomial {
            terms: vec![HillTerm { coeff: [1.0, 0.0], z: 2, zbar: 0 }],
        };
        assert!(matches!(
            mu_from_hill(&fp, &sq.eval(0.3, 0.2, K)),
            Err(Error::NotAdjoint { .. })
        ));
        let zero = HillPolynomial { terms: vec![] };
        assert!(matches!(
            mu_from_hill(&fp, &zero.eval(0.3, 0.2, K)),
            Err(Error::HillZero { .. })
        ));
    }

    #[test]
    fn non_willmore_base_is_rejected() {
        let fp = frame_at_chart(&chart("perturbed-clifford"), 0.5, 0.5, K).unwrap();
        let mu = Jet2::zero(fp.s.order());
        assert!(matches!(adjoint_point(&fp, &mu), Err(Error::NotWillmore { .. })));
    }

    #[test]
    fn duality_holds_on_every_branch() {
        let g = GridSpec::new(6, 6).unwrap();
        let hill = BranchSpec::Hill { y: HillPolynomial::default() };
        for (name, branch) in [
            ("clifford", BranchSpec::Swillmore),
            ("clifford", BranchSpec::Quadratic { root: 1 }),
            ("veronese", BranchSpec::Swillmore),
            ("veronese", BranchSpec::Quadratic { root: 0 }),
            ("veronese", hill),
        ] {
            let f = AdjointField::build(&chart(name), &g, &branch).unwrap();
            assert_eq!(f.masked, 0);
            assert!(f.report.failures(1e-8).is_empty(), "{name} {branch:?}: {:?}", f.report);
            let expect = match (name, &branch) {
                ("clifford", BranchSpec::Quadratic { .. }) => MuLabel::Root(1),
                ("veronese", BranchSpec::Quadratic { .. }) => MuLabel::SwillmoreFallback,
                (_, BranchSpec::Swillmore) => MuLabel::Swillmore,
                _ => MuLabel::Hill,
            };
            assert!(f.mu.labels.iter().all(|l| *l == expect));
            if name == "clifford" && expect == MuLabel::Root(1) {
                assert!(f.mu.merge.iter().all(|m| *m));
            }
        }
    }

    #[test]
    fn umbilic_surfaces_are_masked() {
        let f = AdjointField::build(&chart("sphere"), &GridSpec::new(4, 4).unwrap(), &BranchSpec::Swillmore).unwrap();
        assert_eq!(f.masked, 16);
        assert_eq!(f.mu.unmasked_fraction(), 0.0);
        assert!(f.mu.mask_reason.iter().all(|r| r.as_deref().is_some_and(|s| s.contains("umbilic"))));
    }

    #[test]
    fn adjoint_commutes_with_moebius_transformations() {
        let ch = catalog("veronese", &ChartParams::default()).unwrap();
        for seed in [3, 11] {
            let map = random_lorentz(seed, 4);
            let moved = ch.transformed(&map).unwrap();
            for (u, v) in [(0.2, 0.1), (-0.5, 0.7)] {
                let a = {
                    let fp = frame_at_chart(&ch, u, v, K).unwrap();
                    adjoint_point(&fp, &mu_swillmore(&fp).unwrap()).unwrap()
                };
                let b = {
                    let fp = frame_at_chart(&moved, u, v, K).unwrap();
                    adjoint_point(&fp, &mu_swillmore(&fp).unwrap()).unwrap()
                };
                let image = map.apply(&a.ytilde.value()).re();
                let d = projective_distance(image.coords(), b.ytilde.value().re().coords());
                assert!(d < 1e-8, "seed {seed}: {d:e}");
            }
        }
    }

    #[test]
    fn serpentine_visits_neighbours_consecutively() {
        let g = GridSpec::new(4, 5).unwrap();
        let order = serpentine(&g);
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..20).collect::<Vec<_>>());
        for w in order.windows(2) {
            let (a, b) = ((w[0] / 5, w[0] % 5), (w[1] / 5, w[1] % 5));
            assert_eq!(a.0.abs_diff(b.0) + a.1.abs_diff(b.1), 1);
        }
    }

    #[test]
    fn exported_clifford_adjoint_returns_to_the_original() {
        let ch = chart("clifford");
        let check = GridSpec::new(5, 5).unwrap();
        let d = round_trip_distance(
            &ch,
            &GridSpec::new(12, 12).unwrap(),
            &check,
            check.points(&ch.domain),
            &BranchSpec::Swillmore,
            tolerances::RESIDUAL,
        )
        .unwrap();
        assert!(d < 1e-10, "{d:e}");
    }

    #[test]
    fn reframed_adjoint_is_a_canonical_lift() {
        let fp = frame_at_chart(&chart("veronese"), -0.2, 0.45, K).unwrap();
        let ap = adjoint_point(&fp, &mu_swillmore(&fp).unwrap()).unwrap();
        let t = frame_at(&ap.ytilde).unwrap();
        assert!(t.frame.gram_residual() < 1e-12);
    }
}
