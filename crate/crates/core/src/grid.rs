//! Sample lattices and tensor-product quadrature over chart domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter rectangle `[u0, u1] x [v0, v1]` with per-axis periodicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
    #[serde(default)]
    pub periodic: [bool; 2],
}

impl Domain {
    pub fn new(u: [f64; 2], v: [f64; 2], periodic: [bool; 2]) -> Self {
        Domain { u, v, periodic }
    }

    pub fn area(&self) -> f64 {
        (self.u[1] - self.u[0]) * (self.v[1] - self.v[0])
    }

    /// The same domain with each non-periodic axis shrunk about its midpoint
    /// by `factor`; periodic axes are kept whole.
    pub fn shrunk(&self, factor: f64) -> Self {
        let shrink = |r: [f64; 2], periodic: bool| {
            if periodic {
                return r;
            }
            let (mid, half) = (0.5 * (r[0] + r[1]), 0.5 * (r[1] - r[0]) * factor);
            [mid - half, mid + half]
        };
        Domain {
            u: shrink(self.u, self.periodic[0]),
            v: shrink(self.v, self.periodic[1]),
            periodic: self.periodic,
        }
    }

    fn axis(&self, i: usize) -> ([f64; 2], bool) {
        if i == 0 {
            (self.u, self.periodic[0])
        } else {
            (self.v, self.periodic[1])
        }
    }
}

/// Lattice sizes. Periodic axes sample `n` points without the closing
/// endpoint; other axes sample `n` points including both ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
}

/// One lattice site with its quadrature weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
    pub weight: f64,
}

impl GridSpec {
    pub fn new(nu: usize, nv: usize) -> Result<Self> {
        if nu < 4 || nv < 4 {
            return Err(Error::Invalid(format!(
                "grid {nu}x{nv} is below the 4x4 minimum"
            )));
        }
        Ok(GridSpec { nu, nv })
    }

    /// Parses `NUxNV`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Invalid(format!("grid `{s}` is not of the form NUxNV")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("grid `{s}` is not of the form NUxNV")))
        };
        Self::new(parse(a)?, parse(b)?)
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major lattice (`i` over `u` outermost) with tensor weights.
    pub fn points(&self, domain: &Domain) -> Vec<GridPoint> {
        let (us, wu) = axis_rule(self.nu, domain.axis(0));
        let (vs, wv) = axis_rule(self.nv, domain.axis(1));
        let mut out = Vec::with_capacity(self.len());
        for (i, (u, a)) in us.iter().zip(&wu).enumerate() {
            for (j, (v, b)) in vs.iter().zip(&wv).enumerate() {
                out.push(GridPoint {
                    i,
                    j,
                    u: *u,
                    v: *v,
                    weight: a * b,
                });
            }
        }
        out
    }

    /// Nodes used for spectral re-sampling: equispaced on periodic axes,
    /// Chebyshev-Lobatto on the others.
    pub fn spectral_nodes(&self, domain: &Domain) -> (Vec<f64>, Vec<f64>) {
        (
            spectral_axis(self.nu, domain.axis(0)),
            spectral_axis(self.nv, domain.axis(1)),
        )
    }
}

fn axis_rule(n: usize, (range, periodic): ([f64; 2], bool)) -> (Vec<f64>, Vec<f64>) {
    let len = range[1] - range[0];
    if periodic {
        let h = len / n as f64;
        let nodes = (0..n).map(|k| range[0] + k as f64 * h).collect();
        return (nodes, vec![h; n]);
    }
    let h = len / (n - 1) as f64;
    let nodes = (0..n).map(|k| range[0] + k as f64 * h).collect();
    (nodes, composite_weights(n, h))
}

/// Composite Simpson weights; an odd interval count closes with the 3/8 rule.
fn composite_weights(n: usize, h: f64) -> Vec<f64> {
    let intervals = n - 1;
    let mut w = vec![0.0; n];
    let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    for k in (0..simpson_end).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if simpson_end < intervals {
        let k = simpson_end;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[k + o] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

fn spectral_axis(n: usize, (range, periodic): ([f64; 2], bool)) -> Vec<f64> {
    let len = range[1] - range[0];
    if periodic {
        (0..n).map(|k| range[0] + len * k as f64 / n as f64).collect()
    } else {
        let m = (n - 1) as f64;
        (0..n)
            .map(|k| range[0] + 0.5 * len * (1.0 - (std::f64::consts::PI * k as f64 / m).cos()))
            .collect()
    }
}

/// Tensor-product quadrature of sampled values laid out as [`GridSpec::points`].
pub fn integrate(points: &[GridPoint], values: &[f64]) -> f64 {
    points.iter().zip(values).map(|(p, f)| p.weight * f).sum()
}
