//! Brute-force Stieltjes sums, independent of the closed-form path.
//!
//! Works in `f64` straight from the one-sided limits stored in the
//! breakpoints of `F` and the pieces of `f`; it never looks at
//! [`crate::measure`] or [`crate::integrand::integrate`]. Every breakpoint of
//! `F` and every piece boundary of `f` is a partition point. Each partition
//! point `c` forms a singleton cell worth `f(c) (F(c+) - F(c-))`; every gap
//! is cut into equal cells no wider than the mesh, and a cell `(u, v)` is
//! worth `f(ξ) (F(v-) - F(u+))` for the sample point `ξ`.
//!
//! Cells are summed in fixed-size chunks (possibly in parallel) and the chunk
//! sums are combined in ascending order, so the result does not depend on
//! the thread count.

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::integrand::PiecewiseFn;
use crate::monotone::MonotoneFn;
use crate::scalar::to_f64;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleRule {
    Left,
    Right,
    #[default]
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    mesh: f64,
    rule: SampleRule,
}

impl OracleConfig {
    pub fn new(mesh: f64, rule: SampleRule) -> Result<Self> {
        if !(mesh.is_finite() && mesh > 0.0) {
            return Err(Error::parameter(format!(
                "mesh must be positive, got {mesh}"
            )));
        }
        Ok(OracleConfig { mesh, rule })
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn rule(&self) -> SampleRule {
        self.rule
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

struct Integrator {
    xs: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Integrator {
    fn new(f: &MonotoneFn) -> Self {
        let bps = f.breakpoints();
        Integrator {
            xs: bps.iter().map(|b| to_f64(&b.x)).collect(),
            left: bps.iter().map(|b| to_f64(&b.left)).collect(),
            right: bps.iter().map(|b| to_f64(&b.right)).collect(),
        }
    }

    fn interior(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&b| b <= x) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (v0, v1) = (self.right[i], self.left[i + 1]);
        v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
    }

    fn right_limit(&self, x: f64) -> f64 {
        match self.xs.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => self.right[i],
            Err(_) => self.interior(x),
        }
    }

    fn left_limit(&self, x: f64) -> f64 {
        match self.xs.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => self.left[i],
            Err(_) => self.interior(x),
        }
    }

    fn jump(&self, x: f64) -> f64 {
        self.right_limit(x) - self.left_limit(x)
    }
}

struct Integrand {
    boundaries: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
    point_values: Vec<f64>,
}

impl Integrand {
    fn new(f: &PiecewiseFn) -> Self {
        Integrand {
            boundaries: f.boundaries().iter().map(to_f64).collect(),
            coeffs: f
                .polys()
                .iter()
                .map(|p| {
                    let c = p.coeffs();
                    [to_f64(&c[0]), to_f64(&c[1]), to_f64(&c[2]), to_f64(&c[3])]
                })
                .collect(),
            point_values: f.point_values().iter().map(to_f64).collect(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self.boundaries.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => self.point_values[i],
            Err(i) => {
                let piece = (i.max(1) - 1).min(self.coeffs.len() - 1);
                let c = &self.coeffs[piece];
                ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
            }
        }
    }
}

/// Approximates `∫ f dF` by a mesh-refined Stieltjes sum.
pub fn oracle_integrate(f: &PiecewiseFn, big_f: &MonotoneFn, cfg: &OracleConfig) -> Result<f64> {
    oracle_integrate_with(f, big_f, cfg, Execution::default())
}

pub fn oracle_integrate_with(
    f: &PiecewiseFn,
    big_f: &MonotoneFn,
    cfg: &OracleConfig,
    exec: Execution,
) -> Result<f64> {
    if big_f.lo() < f.lo() || big_f.hi() > f.hi() {
        return Err(Error::parameter(format!(
            "integrand domain [{}, {}] does not cover [{}, {}]",
            to_f64(f.lo()),
            to_f64(f.hi()),
            to_f64(big_f.lo()),
            to_f64(big_f.hi())
        )));
    }
    let integrator = Integrator::new(big_f);
    let integrand = Integrand::new(f);
    let (lo, hi) = (to_f64(big_f.lo()), to_f64(big_f.hi()));

    let mut points: Vec<f64> = integrator
        .xs
        .iter()
        .chain(integrand.boundaries.iter().filter(|&&b| lo < b && b < hi))
        .copied()
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut total = CompensatedSum::default();
    for &c in &points {
        let jump = integrator.jump(c);
        if jump != 0.0 {
            total.add(integrand.eval(c) * jump);
        }
    }

    // (gap index, first cell, last cell exclusive, cells in gap)
    let mut chunks: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (gap, w) in points.windows(2).enumerate() {
        let cells = ((w[1] - w[0]) / cfg.mesh).ceil().max(1.0) as usize;
        let mut start = 0;
        while start < cells {
            let end = (start + CHUNK).min(cells);
            chunks.push((gap, start, end, cells));
            start = end;
        }
    }

    let partials = map_ordered(&chunks, exec, |&(gap, start, end, cells)| {
        let (p, q) = (points[gap], points[gap + 1]);
        let width = q - p;
        let node = |k: usize| {
            if k == cells {
                q
            } else {
                p + width * (k as f64 / cells as f64)
            }
        };
        let mut acc = CompensatedSum::default();
        for k in start..end {
            let (u, v) = (node(k), node(k + 1));
            let mass = integrator.left_limit(v) - integrator.right_limit(u);
            if mass == 0.0 {
                continue;
            }
            let xi = match cfg.rule {
                SampleRule::Left => u,
                SampleRule::Right => v,
                SampleRule::Midpoint => 0.5 * (u + v),
            };
            acc.add(integrand.eval(xi) * mass);
        }
        acc.value()
    });
    for p in partials {
        total.add(p);
    }
    Ok(total.value())
}
