//! Subcommand drivers. Each builds a [`Report`]; emission and exit codes are
//! handled by the caller.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use lightcone::adjoint::{export_adjoint, round_trip_distance, AdjointField, BranchSpec, MuLabel};
use lightcone::chart::{catalog, SampledSurface, SurfaceChart};
use lightcone::grid::{integrate, GridPoint, GridSpec};
use lightcone::invariants::{
    associated_family_residual, frame_at_chart, point_report, sweep, ResidualReport,
};
use lightcone::lorentz::random_lorentz;
use lightcone::pair::{bivector_invariants, pair_invariants, tangent_sphere_check, ChartPair};
use lightcone::pairmap::{pair_energy, pairmap_at, perturbed_pair};
use lightcone::quat::equivalence_check;
use lightcone::{tolerances, Complex64, Error};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{Report, SiteTable};
use crate::CliError;

const K: usize = tolerances::DEFAULT_ORDER - 1;

/// One sweep of a command over a lattice.
struct Pass {
    summary: BTreeMap<String, f64>,
    table: SiteTable,
    masked: usize,
}

impl Pass {
    fn new(points: &[GridPoint]) -> Self {
        Pass { summary: BTreeMap::new(), table: SiteTable::new(points), masked: 0 }
    }

    fn sup(&mut self, key: &str, value: f64) {
        let v = if value.is_nan() { f64::INFINITY } else { value };
        let e = self.summary.entry(key.to_string()).or_insert(0.0);
        *e = e.max(v);
    }

    fn merge(&mut self, r: &ResidualReport) {
        for (k, v) in &r.entries {
            self.sup(k, *v);
        }
    }

    fn complex(&mut self, name: &str, k: usize, z: Option<Complex64>) {
        self.table.push(&format!("{name}_re"), k, z.map(|z| z.re));
        self.table.push(&format!("{name}_im"), k, z.map(|z| z.im));
    }
}

/// Comparison of a pass with its rerun under a random Moebius transformation.
#[derive(Serialize)]
struct MoebiusCheck {
    seed: u64,
    summary: BTreeMap<String, f64>,
    summary_delta: BTreeMap<String, f64>,
    /// Largest per-site change of any field over sites unmasked in both runs.
    site_delta: f64,
}

fn moebius_check(seed: u64, base: &Pass, moved: &Pass) -> MoebiusCheck {
    let summary_delta = base
        .summary
        .iter()
        .map(|(k, a)| {
            let b = moved.summary.get(k).copied().unwrap_or(f64::NAN);
            (k.clone(), (a - b).abs())
        })
        .collect();
    let mut site_delta: f64 = 0.0;
    for (name, col) in &base.table.values {
        if let Some(other) = moved.table.values.get(name) {
            for (a, b) in col.iter().zip(other) {
                if let (Some(a), Some(b)) = (a, b) {
                    site_delta = site_delta.max((a - b).abs());
                }
            }
        }
    }
    MoebiusCheck { seed, summary: moved.summary.clone(), summary_delta, site_delta }
}

fn finish(report: &mut Report, pass: Pass, seed: Option<u64>, moved: Option<Pass>) {
    if let (Some(seed), Some(m)) = (seed, moved) {
        let check = moebius_check(seed, &pass, &m);
        report.summary.insert("moebius_site_delta".into(), check.site_delta);
        report.detail("moebius", check);
    }
    report.sites = pass.table.u.len();
    report.masked = pass.masked;
    report.summary.extend(pass.summary);
    report.fields = Some(pass.table);
}

pub fn base_chart(cfg: &RunConfig) -> Result<SurfaceChart, CliError> {
    catalog(&cfg.chart, &cfg.params).map_err(CliError::from)
}

fn moved(chart: &SurfaceChart, seed: u64) -> Result<SurfaceChart, CliError> {
    Ok(chart.transformed(&random_lorentz(seed, chart.n))?)
}

/// Splits a pointwise result into value, mask, or abort.
fn site<T>(r: lightcone::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(t) => Ok(Some(t)),
        Err(e) if e.is_degeneracy() => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn invariants_pass(chart: &SurfaceChart, grid: &GridSpec) -> Result<Pass, CliError> {
    let results = sweep(chart, grid, |p| {
        let fp = frame_at_chart(chart, p.u, p.v, K)?;
        Ok((point_report(&fp)?, fp.kappa_sq()))
    });
    let points: Vec<GridPoint> = results.iter().map(|(p, _)| *p).collect();
    let mut pass = Pass::new(&points);
    let mut density = Vec::with_capacity(points.len());
    for (k, (_, r)) in results.into_iter().enumerate() {
        match site(r)? {
            Some((report, kappa_sq)) => {
                for (name, v) in &report.entries {
                    pass.table.push(name, k, Some(*v));
                }
                pass.table.push("energy", k, Some(kappa_sq));
                pass.merge(&report);
                density.push(kappa_sq);
            }
            None => {
                pass.masked += 1;
                density.push(f64::NAN);
            }
        }
    }
    // a masked site leaves the integral undefined; NaN is emitted as null
    pass.summary.insert("willmore_energy".into(), integrate(&points, &density));
    Ok(pass)
}

pub fn invariants(cfg: &RunConfig) -> Result<Report, CliError> {
    let chart = base_chart(cfg)?;
    let grid = cfg.grid_spec();
    let pass = invariants_pass(&chart, &grid)?;
    let moved = match cfg.lorentz_seed {
        Some(s) => Some(invariants_pass(&moved(&chart, s)?, &grid)?),
        None => None,
    };
    let mut report = Report::new("invariants", cfg);
    let failures: Vec<String> = pass
        .summary
        .iter()
        .filter(|(k, v)| k.as_str() != "willmore_energy" && !(**v < cfg.tol))
        .map(|(k, _)| k.clone())
        .collect();
    report.detail("above_tol", failures);
    finish(&mut report, pass, cfg.lorentz_seed, moved);
    Ok(report)
}

fn other_chart(cfg: &RunConfig) -> Result<SurfaceChart, CliError> {
    let p = &cfg.pair;
    let chart = match (&p.other, &p.other_surface) {
        (Some(name), None) => catalog(name, p.other_params.as_ref().unwrap_or(&cfg.params))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let s: SampledSurface = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            s.to_chart(path.display().to_string())?
        }
        _ => {
            return Err(CliError::Config(
                "pair needs exactly one of pair.other and pair.other_surface".into(),
            ))
        }
    };
    match p.other_lorentz_seed {
        Some(s) => moved(&chart, s),
        None => Ok(chart),
    }
}

fn pair_pass(pair: &ChartPair, grid: &GridSpec, tol: f64) -> Result<Pass, CliError> {
    let results = sweep(&pair.base, grid, |p| {
        let s = pair.at(p.u, p.v, K)?;
        let pp = pair_invariants(&s.frame, &s.yhat)?;
        let (tb, rb) = bivector_invariants(&s.frame, &s.yhat)?;
        let ts = tangent_sphere_check(&s.frame, &s.yhat, &pp)?;
        let (theta, rho) = (pp.theta.value(), pp.rho.value());
        let mut r = ResidualReport::new();
        r.record("bivector_route", (tb - theta).norm().max((rb - rho).norm()));
        r.record("reconstruction", pp.reconstruction_residual(&s.frame, &s.yhat));
        r.record("fundamental", pp.fundamental_residual(&s.frame, &s.yhat)?);
        r.record("tangent_sphere", ts.theta_defect + ts.rho_defect);
        Ok((theta, rho, r))
    });
    let points: Vec<GridPoint> = results.iter().map(|(p, _)| *p).collect();
    let mut pass = Pass::new(&points);
    let (mut touch, mut cotouch) = (0usize, 0usize);
    for (k, (_, r)) in results.into_iter().enumerate() {
        match site(r)? {
            Some((theta, rho, report)) => {
                pass.complex("theta", k, Some(theta));
                pass.complex("rho", k, Some(rho));
                let (t, c) = (rho.norm() < tol, theta.norm() < tol);
                pass.table.label("touch", k, t.to_string());
                pass.table.label("cotouch", k, c.to_string());
                touch += t as usize;
                cotouch += c as usize;
                pass.merge(&report);
            }
            None => {
                pass.masked += 1;
                pass.complex("theta", k, None);
                pass.complex("rho", k, None);
                pass.table.label("touch", k, "masked");
                pass.table.label("cotouch", k, "masked");
            }
        }
    }
    pass.summary.insert("touch_sites".into(), touch as f64);
    pass.summary.insert("cotouch_sites".into(), cotouch as f64);
    Ok(pass)
}

pub fn pair(cfg: &RunConfig) -> Result<Report, CliError> {
    let base = base_chart(cfg)?;
    let other = other_chart(cfg)?;
    let n = base.n.max(other.n);
    let pair = ChartPair {
        base: base.with_ambient(n)?,
        other: other.with_ambient(n)?,
        shift: (cfg.pair.shift[0], cfg.pair.shift[1]),
    };
    let grid = cfg.grid_spec();
    let pass = pair_pass(&pair, &grid, cfg.tol)?;
    let moved = match cfg.lorentz_seed {
        Some(s) => {
            let map = random_lorentz(s, n);
            let p = ChartPair {
                base: pair.base.transformed(&map)?,
                other: pair.other.transformed(&map)?,
                shift: pair.shift,
            };
            Some(pair_pass(&p, &grid, cfg.tol)?)
        }
        None => None,
    };
    let mut report = Report::new("pair", cfg);
    finish(&mut report, pass, cfg.lorentz_seed, moved);
    Ok(report)
}

fn label_name(l: MuLabel) -> String {
    match l {
        MuLabel::Root(i) => format!("root-{i}"),
        MuLabel::Swillmore => "swillmore".into(),
        MuLabel::SwillmoreFallback => "swillmore-fallback".into(),
        MuLabel::Hill => "hill".into(),
        MuLabel::Masked => "masked".into(),
    }
}

fn adjoint_pass(chart: &SurfaceChart, grid: &GridSpec, branch: &BranchSpec, tol: f64) -> Result<(Pass, AdjointField), CliError> {
    let points = grid.points(&chart.domain);
    let field = AdjointField::build_with(chart, *grid, points.clone(), branch, tol)?;
    let mut pass = Pass::new(&points);
    let mu = &field.mu;
    for k in 0..points.len() {
        pass.complex("mu", k, mu.mu[k]);
        pass.complex("alternate", k, mu.alternate[k]);
        pass.complex("discriminant", k, mu.discriminant[k]);
        pass.table.label("label", k, label_name(mu.labels[k]));
        pass.table.label("merge", k, mu.merge[k].to_string());
        let ap = field.adjoint[k].as_ref();
        pass.table.push("sigma", k, ap.map(|a| a.sigma.value().re));
        pass.complex("rho", k, ap.map(|a| a.rho.value()));
        let reason = match (&mu.mask_reason[k], ap) {
            (Some(r), _) => r.clone(),
            (None, None) => "degenerate adjoint".into(),
            (None, Some(_)) => String::new(),
        };
        pass.table.label("mask_reason", k, reason);
    }
    pass.masked = field.masked;
    pass.merge(&field.report);
    pass.summary.insert("unmasked_fraction".into(), field.unmasked_fraction());
    Ok((pass, field))
}

#[derive(Serialize)]
struct RoundTrip {
    export_grid: GridSpec,
    check_grid: GridSpec,
    interior: f64,
    gate_tol: f64,
    distance: Option<f64>,
    skipped: Option<String>,
}

pub fn adjoint(cfg: &RunConfig) -> Result<Report, CliError> {
    let chart = base_chart(cfg)?;
    let grid = cfg.grid_spec();
    let (pass, _) = adjoint_pass(&chart, &grid, &cfg.branch, cfg.tol)?;
    let masked = pass.masked;
    let moved = match cfg.lorentz_seed {
        Some(s) => Some(adjoint_pass(&moved(&chart, s)?, &grid, &cfg.branch, cfg.tol)?.0),
        None => None,
    };
    let mut report = Report::new("adjoint", cfg);
    let export_grid = cfg.export_grid_spec();
    if let Some(path) = &cfg.adjoint.export {
        let s = export_adjoint(&chart, &export_grid, &cfg.branch)?;
        let text = serde_json::to_string(&s).map_err(CliError::io)?;
        std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    if cfg.adjoint.round_trip {
        let rt = if masked == 0 {
            round_trip(cfg, &chart, export_grid)
        } else {
            round_trip_skipped(cfg, export_grid, "the base lattice has masked sites")
        };
        if let Some(d) = rt.distance {
            report.summary.insert("round_trip".into(), d);
        }
        report.detail("round_trip", rt);
    }
    finish(&mut report, pass, cfg.lorentz_seed, moved);
    Ok(report)
}

/// Adjoint of the exported adjoint compared with the original on interior
/// sites. Failures are reported rather than raised.
fn round_trip(cfg: &RunConfig, chart: &SurfaceChart, export_grid: GridSpec) -> RoundTrip {
    if matches!(cfg.branch, BranchSpec::Hill { .. }) {
        return round_trip_skipped(
            cfg,
            export_grid,
            "a Hill solution of the base does not solve Hill's equation on the adjoint",
        );
    }
    let mut rt = round_trip_plan(cfg, export_grid);
    let check = rt.check_grid;
    let points = check.points(&chart.domain.shrunk(rt.interior));
    match round_trip_distance(chart, &export_grid, &check, points, &cfg.branch, rt.gate_tol) {
        Ok(d) => rt.distance = Some(d),
        Err(e) => rt.skipped = Some(e.to_string()),
    }
    rt
}

fn round_trip_plan(cfg: &RunConfig, export_grid: GridSpec) -> RoundTrip {
    RoundTrip {
        export_grid,
        check_grid: GridSpec { nu: 8, nv: 8 },
        interior: cfg.adjoint.round_trip_interior,
        gate_tol: cfg.adjoint.round_trip_tol,
        distance: None,
        skipped: None,
    }
}

fn round_trip_skipped(cfg: &RunConfig, export_grid: GridSpec, why: &str) -> RoundTrip {
    RoundTrip { skipped: Some(why.to_string()), ..round_trip_plan(cfg, export_grid) }
}

fn pairmap_pass(chart: &SurfaceChart, grid: &GridSpec, cfg: &RunConfig) -> Result<Pass, CliError> {
    let points = grid.points(&chart.domain);
    let samples: Vec<Option<_>> = match cfg.pairmap.perturb {
        Some(eps) => sweep(chart, grid, |p| {
            let fp = frame_at_chart(chart, p.u, p.v, K)?;
            let yhat = perturbed_pair(&fp, eps)?;
            pairmap_at(&fp, &yhat)
        })
        .into_iter()
        .map(|(_, r)| site(r))
        .collect::<Result<_, _>>()?,
        None => {
            let field = AdjointField::build_with(chart, *grid, points.clone(), &cfg.branch, cfg.tol)?;
            field
                .frames
                .iter()
                .zip(&field.adjoint)
                .map(|(f, a)| match (f, a) {
                    (Some(fp), Some(ap)) => site(pairmap_at(fp, &ap.yhat)),
                    _ => Ok(None),
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut pass = Pass::new(&points);
    let mut rho = Vec::with_capacity(points.len());
    for (k, s) in samples.iter().enumerate() {
        pass.complex("theta", k, s.as_ref().map(|s| s.theta));
        pass.complex("rho", k, s.as_ref().map(|s| s.rho));
        pass.table.push("harmonic_residual", k, s.as_ref().map(|s| s.harmonic_residual));
        match s {
            Some(s) => {
                pass.sup("harmonic_residual", s.harmonic_residual);
                pass.sup("hz_hz_defect", s.fundamental.theta_defect);
                pass.sup("hz_hzb_defect", s.fundamental.rho_defect);
                pass.sup("norm_defect", s.fundamental.norm_defect);
                pass.sup("tangential_defect", s.fundamental.tangential_defect);
                rho.push(s.rho);
            }
            None => {
                pass.masked += 1;
                rho.push(Complex64::new(f64::NAN, f64::NAN));
            }
        }
    }
    let e = pair_energy(&points, &rho);
    pass.summary.insert("energy_re".into(), e.re);
    pass.summary.insert("energy_im".into(), e.im);
    Ok(pass)
}

pub fn pairmap(cfg: &RunConfig) -> Result<Report, CliError> {
    let chart = base_chart(cfg)?;
    let grid = cfg.grid_spec();
    let pass = pairmap_pass(&chart, &grid, cfg)?;
    let moved = match cfg.lorentz_seed {
        Some(s) => Some(pairmap_pass(&moved(&chart, s)?, &grid, cfg)?),
        None => None,
    };
    let mut report = Report::new("pairmap", cfg);
    finish(&mut report, pass, cfg.lorentz_seed, moved);
    Ok(report)
}

pub fn quat_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let r = equivalence_check(cfg.quat.trials, cfg.quat.seed, cfg.tol)?;
    let mut report = Report::new("quat-check", cfg);
    for (k, v) in [
        ("trials", r.trials as f64),
        ("disagreements", r.disagreements as f64),
        ("quaternion_vs_contact", r.quaternion_vs_contact as f64),
        ("quaternion_vs_singular", r.quaternion_vs_singular as f64),
        ("touching", r.touching as f64),
        ("cotouching", r.cotouching as f64),
        ("max_normal_residual", r.max_normal_residual),
    ] {
        report.summary.insert(k.into(), v);
    }
    report.detail("failed_trials", &r.failed_trials);
    Ok(report)
}

/// One line of `verify-all`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `value < bound` passes, or `value > bound` when `above` is set.
    pub bound: f64,
    pub above: bool,
    pub pass: bool,
}

fn check(name: impl Into<String>, value: f64, bound: f64) -> Check {
    Check { name: name.into(), value, bound, above: false, pass: value < bound }
}

fn check_above(name: impl Into<String>, value: f64, bound: f64) -> Check {
    Check { name: name.into(), value, bound, above: true, pass: value > bound }
}

fn sup(pass: &Pass, keys: &[&str]) -> f64 {
    keys.iter()
        .map(|k| pass.summary.get(*k).copied().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Condensed regression suite over the catalog on the configured lattice.
pub fn verify_all(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid = cfg.grid_spec();
    let params = lightcone::chart::ChartParams::default();
    let mut checks = Vec::new();
    for name in ["sphere", "clifford", "veronese", "perturbed-clifford"] {
        let chart = catalog(name, &params)?;
        let pass = invariants_pass(&chart, &grid)?;
        checks.push(check(
            format!("{name}: frame axioms"),
            sup(&pass, &["nullity", "conformality", "normalization", "hill"]),
            1e-9,
        ));
        checks.push(check(format!("{name}: integrability"), sup(&pass, &["gauss", "codazzi", "ricci"]), 1e-8));
        match name {
            "perturbed-clifford" => checks.push(check_above(format!("{name}: willmore"), sup(&pass, &["willmore"]), 1e-3)),
            "clifford" | "veronese" => checks.push(check(format!("{name}: willmore"), sup(&pass, &["willmore"]), 1e-8)),
            _ => {}
        }
    }
    let clifford = catalog("clifford", &params)?;
    let energy = invariants_pass(&clifford, &GridSpec { nu: 64, nv: 64 })?;
    checks.push(check(
        "clifford: willmore energy - pi^2/2",
        (energy.summary["willmore_energy"] - PI * PI / 2.0).abs(),
        1e-6,
    ));

    let mut route: f64 = 0.0;
    let mut tangent: f64 = 0.0;
    for seed in 0..20 {
        let (pair, u, v) = ChartPair::random(seed)?;
        let s = pair.at(u, v, K)?;
        let pp = pair_invariants(&s.frame, &s.yhat)?;
        let (tb, rb) = bivector_invariants(&s.frame, &s.yhat)?;
        route = route.max((tb - pp.theta.value()).norm() + (rb - pp.rho.value()).norm());
        let ts = tangent_sphere_check(&s.frame, &s.yhat, &pp)?;
        tangent = tangent.max(ts.theta_defect + ts.rho_defect);
    }
    checks.push(check("random pairs: bivector route", route, 1e-10));
    checks.push(check("random pairs: tangent sphere identity", tangent, 1e-9));

    let small = GridSpec { nu: 8, nv: 8 };
    let duality = [
        "adjoint_willmore",
        "rho_duality",
        "mutilde_identity",
        "sigma_pairing",
        "back_cotouch",
        "round_trip",
    ];
    for (name, branch) in [("clifford", BranchSpec::Swillmore), ("veronese", BranchSpec::Quadratic { root: 0 })] {
        let chart = catalog(name, &params)?;
        let (pass, _) = adjoint_pass(&chart, &small, &branch, tolerances::RESIDUAL)?;
        checks.push(check(format!("{name}: adjoint duality"), sup(&pass, &duality), 1e-7));
        let rt_cfg = RunConfig { branch: branch.clone(), ..cfg.clone() };
        let rt = round_trip(&rt_cfg, &chart, cfg.export_grid_spec());
        checks.push(check(format!("{name}: exported round trip"), rt.distance.unwrap_or(f64::INFINITY), 1e-6));
    }

    let pm_cfg = RunConfig { branch: BranchSpec::Swillmore, ..cfg.clone() };
    let pm = pairmap_pass(&clifford, &GridSpec { nu: 12, nv: 12 }, &pm_cfg)?;
    checks.push(check("clifford pair map: harmonic", sup(&pm, &["harmonic_residual"]), 1e-8));
    checks.push(check(
        "clifford pair map: fundamental form",
        sup(&pm, &["hz_hz_defect", "hz_hzb_defect"]),
        1e-10,
    ));
    checks.push(check(
        "clifford pair map: energy + 4 pi^2",
        (pm.summary["energy_re"] + 4.0 * PI * PI).abs(),
        1e-5,
    ));
    let perturbed = RunConfig {
        pairmap: crate::config::PairmapConfig { perturb: Some(0.05) },
        ..cfg.clone()
    };
    let pp = pairmap_pass(&clifford, &small, &perturbed)?;
    checks.push(check_above("perturbed pair: harmonic", sup(&pp, &["harmonic_residual"]), 1e-4));

    for name in ["clifford", "veronese"] {
        let chart = catalog(name, &params)?;
        let mut worst: f64 = 0.0;
        for p in small.points(&chart.domain.shrunk(0.9)) {
            let fp = frame_at_chart(&chart, p.u, p.v, K)?;
            for k in 0..8 {
                let lambda = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0);
                worst = worst.max(associated_family_residual(&fp, lambda)?.max());
            }
        }
        checks.push(check(format!("{name}: associated family"), worst, 1e-8));
    }

    let q = equivalence_check(1000, cfg.quat.seed, tolerances::TOUCH)?;
    checks.push(check("quaternionic equivalence: disagreements", q.disagreements as f64, 0.5));

    let mut report = Report::new("verify-all", cfg);
    let failed = checks.iter().filter(|c| !c.pass).count();
    report.summary.insert("checks".into(), checks.len() as f64);
    report.summary.insert("failed".into(), failed as f64);
    report.detail("checks", checks);
    Ok(report)
}

/// Whether a finished report should map to a failing exit code.
pub fn failed_checks(report: &Report) -> bool {
    match report.command.as_str() {
        "verify-all" => report.summary.get("failed").copied().unwrap_or(0.0) > 0.0,
        "quat-check" => report.summary.get("disagreements").copied().unwrap_or(0.0) > 0.0,
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownChart(_) | Error::Invalid(_) | Error::ChartRejected { .. } | Error::NotUnitary(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}
