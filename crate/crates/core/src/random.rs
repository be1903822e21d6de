//! Seeded random instances `(M, N, f, g)` for property checks.
//!
//! Recipe, per function: up to 10 segments; every interior breakpoint jumps
//! with probability 0.4 and every segment is flat with probability 0.4;
//! coefficients are drawn from `[-2, 2]`, and increasing functions are built
//! by taking absolute values as increments and accumulating them. All draws
//! are rounded to multiples of 1/64, so instances print exactly and any
//! failure is reproducible from the seed alone.
//!
//! `N` is built on `[M(lo), M(hi)]` (occasionally on a wider interval) with
//! knots at every flat level of `M` and at some of `M`'s other levels, so the
//! interesting coincidences (jumps of `N` exactly on flats and jumps of `M`)
//! occur often.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrand::{Monotonicity, PiecewiseFn, Poly};
use crate::monotone::{Breakpoint, MonotoneFn};
use crate::scalar::{self, ratio, Scalar};

pub const SEED_ENV: &str = "STIELTJES_SEED";

const GRID: i64 = 64;
const MAX_SEGMENTS: usize = 10;
const EVENT_PROBABILITY: f64 = 0.4;

/// How `N` behaves at the flat levels of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlatContinuity {
    /// Any combination of left and right jumps.
    #[default]
    Free,
    /// Right-continuous (left jumps only).
    Right,
    /// Left-continuous (right jumps only).
    Left,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrandKind {
    /// Jumps and isolated point values allowed.
    #[default]
    Arbitrary,
    Continuous,
    Monotone(Monotonicity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub n_at_flats: FlatContinuity,
    pub m_continuous: bool,
    pub m_strict: bool,
    pub integrand: IntegrandKind,
    pub max_degree: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            n_at_flats: FlatContinuity::Free,
            m_continuous: false,
            m_strict: false,
            integrand: IntegrandKind::Arbitrary,
            max_degree: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomInstance {
    pub m: MonotoneFn,
    pub n: MonotoneFn,
    /// Integrand on the domain of `M`.
    pub f: PiecewiseFn,
    /// Integrand on the domain of `N`.
    pub g: PiecewiseFn,
}

pub struct InstanceGenerator {
    rng: ChaCha8Rng,
}

fn grid(k: i64) -> Scalar {
    ratio(k, GRID)
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        InstanceGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seeds from `STIELTJES_SEED`, falling back to `default_seed`.
    pub fn from_env(default_seed: u64) -> Self {
        let seed = std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(default_seed);
        Self::new(seed)
    }

    /// A coefficient in `[-2, 2]` on the grid.
    fn coefficient(&mut self) -> Scalar {
        grid(self.rng.gen_range(-2 * GRID..=2 * GRID))
    }

    /// A strictly positive increment in `(0, 2]` on the grid.
    fn increment(&mut self) -> Scalar {
        grid(self.rng.gen_range(-2 * GRID..=2 * GRID).abs().max(1))
    }

    fn event(&mut self) -> bool {
        self.rng.gen_bool(EVENT_PROBABILITY)
    }

    /// Splits a positive jump into (left part, right part).
    fn jump_parts(&mut self, allow_left: bool, allow_right: bool) -> (Scalar, Scalar) {
        let zero = scalar::zero();
        match (allow_left, allow_right) {
            (false, false) => (zero.clone(), zero),
            (true, false) => (self.increment(), zero),
            (false, true) => (zero, self.increment()),
            (true, true) => match self.rng.gen_range(0..3) {
                0 => (self.increment(), zero),
                1 => (zero, self.increment()),
                _ => (self.increment(), self.increment()),
            },
        }
    }

    /// Breakpoints `xs` with values accumulated from random rises and jumps.
    /// `jump_rule(i)` says which sides may jump at breakpoint `i`; `flat_ok`
    /// allows flat segments.
    fn accumulate(
        &mut self,
        xs: &[Scalar],
        start: Scalar,
        jump_rule: &dyn Fn(usize) -> (bool, bool),
        jump_probability: &dyn Fn(usize) -> f64,
        flat_ok: bool,
    ) -> Vec<Breakpoint> {
        let last = xs.len() - 1;
        let mut level = start;
        let mut bps = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter().enumerate() {
            let (mut allow_left, mut allow_right) = jump_rule(i);
            allow_left &= i > 0;
            allow_right &= i < last;
            let (dl, dr) = if self.rng.gen_bool(jump_probability(i)) {
                self.jump_parts(allow_left, allow_right)
            } else {
                (scalar::zero(), scalar::zero())
            };
            let value = &level + dl;
            let right = &value + dr;
            bps.push(Breakpoint::jump(x.clone(), level, value, right.clone()));
            level = right;
            if i < last {
                let flat = flat_ok && self.event();
                if !flat {
                    level += self.increment();
                }
            }
        }
        bps
    }

    fn monotone_m(&mut self, shape: &InstanceShape) -> MonotoneFn {
        let segments = self.rng.gen_range(1..=MAX_SEGMENTS);
        let mut x = grid(self.rng.gen_range(-GRID..=GRID));
        let mut xs = vec![x.clone()];
        for _ in 0..segments {
            // widths in (0, 0.5]
            x += grid(self.rng.gen_range(1..=GRID / 2));
            xs.push(x.clone());
        }
        let start = self.coefficient();
        let continuous = shape.m_continuous;
        let bps = self.accumulate(
            &xs,
            start,
            &|_| (!continuous, !continuous),
            &|_| EVENT_PROBABILITY,
            !shape.m_strict,
        );
        let mut m = MonotoneFn::new(bps).expect("generated M is increasing");
        if m.start_value() == m.end_value() {
            let (lo, hi) = (m.lo().clone(), m.hi().clone());
            let base = m.start_value().clone();
            m = MonotoneFn::from_knots(&[(lo, base.clone()), (hi, base + self.increment())])
                .expect("valid");
        }
        m
    }

    fn monotone_n(&mut self, m: &MonotoneFn, shape: &InstanceShape) -> MonotoneFn {
        let flats: Vec<Scalar> = m.flat_levels().levels.into_iter().map(|l| l.y).collect();
        let (a, b) = (m.start_value().clone(), m.end_value().clone());
        let mut knots = flats.clone();
        for bp in m.breakpoints() {
            for y in [&bp.left, &bp.value, &bp.right] {
                if self.rng.gen_bool(0.5) {
                    knots.push(y.clone());
                }
            }
        }
        let width = &b - &a;
        for _ in 0..self.rng.gen_range(0..=4) {
            let u = grid(self.rng.gen_range(0..=GRID));
            knots.push(&a + &width * u);
        }
        let (lo, hi) = if self.rng.gen_bool(0.25) {
            (&a - grid(GRID / 4), &b + grid(GRID / 4))
        } else {
            (a.clone(), b.clone())
        };
        knots.push(lo.clone());
        knots.push(hi.clone());
        knots.retain(|y| &lo <= y && y <= &hi);
        scalar::sort_dedup(&mut knots);
        knots.truncate(MAX_SEGMENTS + 1 + flats.len());
        if knots.last() != Some(&hi) {
            knots.push(hi.clone());
        }

        let rule = shape.n_at_flats;
        let is_flat = |y: &Scalar| flats.binary_search(y).is_ok();
        let sides: Vec<(bool, bool)> = knots
            .iter()
            .map(|y| {
                if !is_flat(y) {
                    return (true, true);
                }
                match rule {
                    FlatContinuity::Free => (true, true),
                    FlatContinuity::Right => (true, false),
                    FlatContinuity::Left => (false, true),
                    FlatContinuity::Continuous => (false, false),
                }
            })
            .collect();
        let on_flat: Vec<bool> = knots.iter().map(is_flat).collect();
        let start = self.coefficient();
        let bps = self.accumulate(
            &knots,
            start,
            &|i| sides[i],
            &|i| if on_flat[i] { 0.8 } else { EVENT_PROBABILITY },
            true,
        );
        MonotoneFn::new(bps).expect("generated N is increasing")
    }

    fn local_poly(&mut self, kind: IntegrandKind, max_degree: usize, origin: &Scalar) -> Poly {
        let mut c: Vec<Scalar> = (0..=max_degree).map(|_| self.coefficient()).collect();
        if let IntegrandKind::Monotone(_) = kind {
            for v in c.iter_mut().skip(1) {
                *v = num_traits::Signed::abs(v);
            }
        }
        let local = Poly::from_slice(&c).expect("degree within cap");
        // p(x - origin)
        local.compose_affine(&-origin, &scalar::int(1))
    }

    /// A random integrand on `[lo, hi]`; `prefer` lists points that are good
    /// candidates for piece boundaries (atoms of the relevant measures).
    pub fn integrand(
        &mut self,
        lo: &Scalar,
        hi: &Scalar,
        prefer: &[Scalar],
        kind: IntegrandKind,
        max_degree: usize,
    ) -> PiecewiseFn {
        let mut cuts: Vec<Scalar> = prefer
            .iter()
            .filter(|p| lo < *p && *p < hi)
            .cloned()
            .collect();
        cuts.shuffle(&mut self.rng);
        cuts.truncate(self.rng.gen_range(0..=2));
        for _ in 0..self.rng.gen_range(0..=1) {
            let u = grid(self.rng.gen_range(1..GRID));
            cuts.push(lo + (hi - lo) * u);
        }
        cuts.push(lo.clone());
        cuts.push(hi.clone());
        scalar::sort_dedup(&mut cuts);

        let mut polys: Vec<Poly> = Vec::with_capacity(cuts.len() - 1);
        let mut values: Vec<Scalar> = Vec::with_capacity(cuts.len());
        for (i, w) in cuts.windows(2).enumerate() {
            let mut p = self.local_poly(kind, max_degree, &w[0]);
            let shift = match (kind, polys.last()) {
                (IntegrandKind::Continuous, Some(prev)) => Some(prev.eval(&w[0]) - p.eval(&w[0])),
                (IntegrandKind::Monotone(_), Some(prev)) => {
                    let bump = if self.event() {
                        self.increment()
                    } else {
                        scalar::zero()
                    };
                    Some(prev.eval(&w[0]) + bump - p.eval(&w[0]))
                }
                _ => None,
            };
            if let Some(s) = shift {
                p = p.add(&Poly::constant(s));
            }
            // point value at the left boundary of this piece
            let left_limit = polys.last().map(|q| q.eval(&w[0]));
            let right_limit = p.eval(&w[0]);
            values.push(match (kind, left_limit) {
                (IntegrandKind::Arbitrary, _) if i > 0 || self.event() => self.coefficient(),
                (_, Some(l)) if l != right_limit => {
                    if self.rng.gen_bool(0.5) {
                        l
                    } else {
                        right_limit.clone()
                    }
                }
                _ => right_limit.clone(),
            });
            polys.push(p);
        }
        let end = polys.last().expect("one piece").eval(hi);
        values.push(match kind {
            IntegrandKind::Arbitrary if self.event() => self.coefficient(),
            _ => end,
        });
        let f = PiecewiseFn::new(cuts, polys, values).expect("valid pieces");
        match kind {
            IntegrandKind::Monotone(Monotonicity::Decreasing) => f.scale(&scalar::int(-1)),
            _ => f,
        }
    }

    pub fn instance(&mut self, shape: &InstanceShape) -> RandomInstance {
        let m = self.monotone_m(shape);
        let n = self.monotone_n(&m, shape);
        let mut atoms_x: Vec<Scalar> = m.breakpoints().iter().map(|b| b.x.clone()).collect();
        for l in m.flat_levels().levels {
            atoms_x.push(l.x_left);
            atoms_x.push(l.x_right);
        }
        let f = self.integrand(m.lo(), m.hi(), &atoms_x, shape.integrand, shape.max_degree);
        let levels: Vec<Scalar> = n.breakpoints().iter().map(|b| b.x.clone()).collect();
        let g = self.integrand(n.lo(), n.hi(), &levels, shape.integrand, shape.max_degree);
        RandomInstance { m, n, f, g }
    }

    /// A random point of `[lo, hi]` on a fine dyadic grid.
    pub fn point(&mut self, lo: &Scalar, hi: &Scalar) -> Scalar {
        const FINE: i64 = 1 << 20;
        let u = ratio(self.rng.gen_range(0..=FINE), FINE);
        lo + (hi - lo) * u
    }

    pub fn theta(&mut self) -> Scalar {
        ratio(self.rng.gen_range(0..=GRID), GRID)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::Monotonicity;

    #[test]
    fn seeded_generation_is_reproducible() {
        let shape = InstanceShape::default();
        let a = InstanceGenerator::new(7).instance(&shape);
        let b = InstanceGenerator::new(7).instance(&shape);
        assert_eq!(a, b);
    }

    #[test]
    fn shapes_are_respected() {
        let mut gen = InstanceGenerator::new(11);
        for _ in 0..200 {
            let shape = InstanceShape {
                n_at_flats: FlatContinuity::Right,
                m_continuous: true,
                integrand: IntegrandKind::Monotone(Monotonicity::Decreasing),
                ..Default::default()
            };
            let inst = gen.instance(&shape);
            assert!(inst.m.is_continuous());
            assert!(inst.m.breakpoints().len() <= MAX_SEGMENTS + 1);
            assert!(inst.f.check_monotone(Monotonicity::Decreasing).is_ok());
            for l in inst.m.flat_levels().iter() {
                assert!(inst.n.is_right_continuous_at(&l.y));
            }
            let strict = gen.instance(&InstanceShape {
                m_strict: true,
                integrand: IntegrandKind::Continuous,
                ..Default::default()
            });
            assert!(strict.m.is_strictly_increasing());
            assert!(strict.f.is_continuous());
        }
    }
}
