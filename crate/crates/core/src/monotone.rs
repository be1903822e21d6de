//! Increasing functions on a closed interval.
//!
//! A [`MonotoneFn`] is a finite list of [`Breakpoint`]s, each carrying the left
//! limit, the value and the right limit of the function at that point. Between
//! consecutive breakpoints the function is the affine interpolation of the
//! right limit at the first point and the left limit at the second, so the
//! breakpoints determine everything; [`Segment`] is a derived view.
//!
//! Endpoint conventions: at the left end of the domain the left limit equals
//! the value, at the right end the right limit equals the value.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, to_f64, Scalar};

/// Which of `F(x-)`, `F(x)`, `F(x+)` to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Value,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoint {
    pub x: Scalar,
    pub left: Scalar,
    pub value: Scalar,
    pub right: Scalar,
}

impl Breakpoint {
    pub fn continuous(x: Scalar, value: Scalar) -> Self {
        Breakpoint {
            x,
            left: value.clone(),
            right: value.clone(),
            value,
        }
    }

    pub fn jump(x: Scalar, left: Scalar, value: Scalar, right: Scalar) -> Self {
        Breakpoint {
            x,
            left,
            value,
            right,
        }
    }

    pub fn get(&self, side: Side) -> &Scalar {
        match side {
            Side::Left => &self.left,
            Side::Value => &self.value,
            Side::Right => &self.right,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.left == self.value && self.value == self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Linear,
    Constant,
}

/// The continuous piece on the open gap between two breakpoints:
/// `t -> anchor + slope * (t - x_start)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub slope: Scalar,
    pub anchor: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatLevel {
    pub y: Scalar,
    /// Left end of the level set, equal to `X(y)`.
    pub x_left: Scalar,
    /// Right end of the level set, equal to `Ξ(y)`.
    pub x_right: Scalar,
}

/// Levels at which `M` is constant on a non-degenerate interval, together with
/// the range `[M(lo), M(hi)]` they were computed against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatLevels {
    pub range: (Scalar, Scalar),
    pub levels: Vec<FlatLevel>,
}

impl FlatLevels {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FlatLevel> {
        self.levels.iter()
    }

    pub fn contains(&self, y: &Scalar) -> bool {
        self.levels.binary_search_by(|l| l.y.cmp(y)).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneFn {
    breakpoints: Vec<Breakpoint>,
}

impl MonotoneFn {
    /// Validates and builds a function from its breakpoints.
    ///
    /// The first and last breakpoints fix the domain. Their outer one-sided
    /// limits are overwritten with the value (endpoint conventions).
    pub fn new(mut breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid(
                "need at least two breakpoints (the domain endpoints)",
            ));
        }
        let last = breakpoints.len() - 1;
        breakpoints[0].left = breakpoints[0].value.clone();
        breakpoints[last].right = breakpoints[last].value.clone();

        for (i, bp) in breakpoints.iter().enumerate() {
            if !(bp.left <= bp.value && bp.value <= bp.right) {
                return Err(Error::invalid(format!(
                    "breakpoint {i} at x = {}: need left <= value <= right, got ({}, {}, {})",
                    to_f64(&bp.x),
                    to_f64(&bp.left),
                    to_f64(&bp.value),
                    to_f64(&bp.right)
                )));
            }
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if w[0].x >= w[1].x {
                let msg = if i == 0 && last == 1 {
                    format!(
                        "domain [{}, {}] must satisfy lo < hi",
                        to_f64(&w[0].x),
                        to_f64(&w[1].x)
                    )
                } else {
                    format!(
                        "breakpoint x values must be strictly increasing (index {} -> {})",
                        i,
                        i + 1
                    )
                };
                return Err(Error::invalid(msg));
            }
            if w[0].right > w[1].left {
                return Err(Error::invalid(format!(
                    "segment {i} on ({}, {}) decreases from {} to {}",
                    to_f64(&w[0].x),
                    to_f64(&w[1].x),
                    to_f64(&w[0].right),
                    to_f64(&w[1].left)
                )));
            }
        }
        Ok(MonotoneFn { breakpoints })
    }

    /// Builds a function and checks that explicit segment data agrees exactly
    /// with the interpolation implied by the breakpoints.
    pub fn with_segments(breakpoints: Vec<Breakpoint>, segments: &[Segment]) -> Result<Self> {
        let f = Self::new(breakpoints)?;
        let derived = f.segments();
        if derived.len() != segments.len() {
            return Err(Error::invalid(format!(
                "expected {} segments, got {}",
                derived.len(),
                segments.len()
            )));
        }
        for (i, (want, got)) in derived.iter().zip(segments).enumerate() {
            if want != got {
                return Err(Error::invalid(format!(
                    "segment {i} does not match its breakpoints: expected {:?} slope {} anchor {}",
                    want.kind,
                    to_f64(&want.slope),
                    to_f64(&want.anchor)
                )));
            }
        }
        Ok(f)
    }

    pub fn identity(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::new(vec![
            Breakpoint::continuous(lo.clone(), lo),
            Breakpoint::continuous(hi.clone(), hi),
        ])
    }

    pub fn constant(lo: Scalar, hi: Scalar, c: Scalar) -> Result<Self> {
        Self::new(vec![
            Breakpoint::continuous(lo, c.clone()),
            Breakpoint::continuous(hi, c),
        ])
    }

    /// Continuous piecewise-linear function through `(x, y)` knots.
    pub fn from_knots(knots: &[(Scalar, Scalar)]) -> Result<Self> {
        Self::new(
            knots
                .iter()
                .map(|(x, y)| Breakpoint::continuous(x.clone(), y.clone()))
                .collect(),
        )
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn lo(&self) -> &Scalar {
        &self.breakpoints[0].x
    }

    pub fn hi(&self) -> &Scalar {
        &self.breakpoints[self.breakpoints.len() - 1].x
    }

    pub fn domain(&self) -> (&Scalar, &Scalar) {
        (self.lo(), self.hi())
    }

    /// `F(lo)`.
    pub fn start_value(&self) -> &Scalar {
        &self.breakpoints[0].value
    }

    /// `F(hi)`.
    pub fn end_value(&self) -> &Scalar {
        &self.breakpoints[self.breakpoints.len() - 1].value
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.breakpoints
            .windows(2)
            .map(|w| {
                let rise = &w[1].left - &w[0].right;
                let kind = if rise.is_zero() {
                    SegmentKind::Constant
                } else {
                    SegmentKind::Linear
                };
                Segment {
                    kind,
                    slope: rise / (&w[1].x - &w[0].x),
                    anchor: w[0].right.clone(),
                }
            })
            .collect()
    }

    fn domain_error(&self, x: &Scalar) -> Error {
        Error::Domain {
            x: to_f64(x),
            lo: to_f64(self.lo()),
            hi: to_f64(self.hi()),
        }
    }

    /// `Ok(i)` if `x` is breakpoint `i`, `Err(i)` if `x` lies in the open gap
    /// between breakpoints `i` and `i + 1`.
    fn locate(&self, x: &Scalar) -> std::result::Result<usize, usize> {
        match self.breakpoints.binary_search_by(|bp| bp.x.cmp(x)) {
            Ok(i) => Ok(i),
            Err(i) => Err(i - 1),
        }
    }

    fn interpolate(&self, gap: usize, x: &Scalar) -> Scalar {
        let a = &self.breakpoints[gap];
        let b = &self.breakpoints[gap + 1];
        let rise = &b.left - &a.right;
        if rise.is_zero() {
            return a.right.clone();
        }
        &a.right + rise * (x - &a.x) / (&b.x - &a.x)
    }

    /// `F(x-)`, `F(x)` or `F(x+)`.
    pub fn eval_at(&self, x: &Scalar, side: Side) -> Result<Scalar> {
        if !self.contains(x) {
            return Err(self.domain_error(x));
        }
        Ok(match self.locate(x) {
            Ok(i) => self.breakpoints[i].get(side).clone(),
            Err(gap) => self.interpolate(gap, x),
        })
    }

    pub fn value(&self, x: &Scalar) -> Result<Scalar> {
        self.eval_at(x, Side::Value)
    }

    /// Convenience wrapper over [`eval_at`](Self::eval_at) for float arguments.
    pub fn eval_f64(&self, x: f64, side: Side) -> Result<f64> {
        let x = scalar::from_f64(x)?;
        self.eval_at(&x, side).map(|v| to_f64(&v))
    }

    pub fn is_continuous_at(&self, x: &Scalar) -> bool {
        match self.locate(x) {
            Ok(i) => self.breakpoints[i].is_continuous(),
            Err(_) => true,
        }
    }

    pub fn is_right_continuous_at(&self, x: &Scalar) -> bool {
        match self.locate(x) {
            Ok(i) => self.breakpoints[i].value == self.breakpoints[i].right,
            Err(_) => true,
        }
    }

    pub fn is_left_continuous_at(&self, x: &Scalar) -> bool {
        match self.locate(x) {
            Ok(i) => self.breakpoints[i].value == self.breakpoints[i].left,
            Err(_) => true,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.breakpoints.iter().all(Breakpoint::is_continuous)
    }

    pub fn is_left_continuous(&self) -> bool {
        self.breakpoints.iter().all(|b| b.left == b.value)
    }

    pub fn is_right_continuous(&self) -> bool {
        self.breakpoints.iter().all(|b| b.value == b.right)
    }

    /// No non-degenerate interval on which the function is constant.
    pub fn is_strictly_increasing(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0].right < w[1].left)
    }

    /// Restriction to `[lo, hi]` with endpoint conventions re-imposed, so the
    /// measure of the result charges no mass outside `[lo, hi]`.
    pub fn restrict(&self, lo: &Scalar, hi: &Scalar) -> Result<Self> {
        if lo >= hi {
            return Err(Error::parameter(format!(
                "restriction interval [{}, {}] must satisfy lo < hi",
                to_f64(lo),
                to_f64(hi)
            )));
        }
        if !self.contains(lo) {
            return Err(self.domain_error(lo));
        }
        if !self.contains(hi) {
            return Err(self.domain_error(hi));
        }
        let v_lo = self.value(lo)?;
        let v_hi = self.value(hi)?;
        let mut bps = vec![Breakpoint::jump(
            lo.clone(),
            v_lo.clone(),
            v_lo,
            self.eval_at(lo, Side::Right)?,
        )];
        bps.extend(
            self.breakpoints
                .iter()
                .filter(|b| &b.x > lo && &b.x < hi)
                .cloned(),
        );
        bps.push(Breakpoint::jump(
            hi.clone(),
            self.eval_at(hi, Side::Left)?,
            v_hi.clone(),
            v_hi,
        ));
        Self::new(bps)
    }

    /// Drops interior breakpoints where the function is continuous and the
    /// slope does not change.
    pub fn simplify(&self) -> Self {
        let bps = &self.breakpoints;
        let mut kept: Vec<Breakpoint> = vec![bps[0].clone()];
        for i in 1..bps.len() - 1 {
            let bp = &bps[i];
            if bp.is_continuous() {
                let prev = kept.last().expect("non-empty");
                let next = &bps[i + 1];
                let slope_in = (&bp.left - &prev.right) / (&bp.x - &prev.x);
                let slope_out = (&next.left - &bp.right) / (&next.x - &bp.x);
                if slope_in == slope_out {
                    continue;
                }
            }
            kept.push(bp.clone());
        }
        kept.push(bps[bps.len() - 1].clone());
        MonotoneFn { breakpoints: kept }
    }

    /// Builds a function from knots and an exact evaluator that is affine on
    /// each open gap between consecutive knots. One-sided limits at the knots
    /// are recovered by extrapolating the affine piece through two interior
    /// points.
    pub(crate) fn from_affine_pieces<E>(knots: &[Scalar], eval: E) -> Result<Self>
    where
        E: Fn(&Scalar) -> Scalar,
    {
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        let three = scalar::int(3);
        let mut bps: Vec<Breakpoint> = knots
            .iter()
            .map(|k| Breakpoint::continuous(k.clone(), eval(k)))
            .collect();
        for i in 0..knots.len().saturating_sub(1) {
            let third = (&knots[i + 1] - &knots[i]) / &three;
            let t1 = &knots[i] + &third;
            let t2 = &t1 + &third;
            let v1 = eval(&t1);
            let v2 = eval(&t2);
            let step = &v2 - &v1;
            bps[i].right = &v1 - &step;
            bps[i + 1].left = &v2 + &step;
        }
        Self::new(bps).map(|f| f.simplify())
    }

    /// Combines two functions on the same domain field by field at the union
    /// of their breakpoints. Exact because both are affine between those knots.
    fn combine<O>(&self, other: &MonotoneFn, op: O) -> Result<Self>
    where
        O: Fn(&Scalar, &Scalar) -> Scalar,
    {
        if self.domain() != other.domain() {
            return Err(Error::parameter(format!(
                "domains differ: [{}, {}] vs [{}, {}]",
                to_f64(self.lo()),
                to_f64(self.hi()),
                to_f64(other.lo()),
                to_f64(other.hi())
            )));
        }
        let mut xs: Vec<Scalar> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .map(|b| b.x.clone())
            .collect();
        scalar::sort_dedup(&mut xs);
        let mut bps = Vec::with_capacity(xs.len());
        for x in xs {
            let field = |side| -> Result<Scalar> {
                Ok(op(&self.eval_at(&x, side)?, &other.eval_at(&x, side)?))
            };
            bps.push(Breakpoint::jump(
                x.clone(),
                field(Side::Left)?,
                field(Side::Value)?,
                field(Side::Right)?,
            ));
        }
        Self::new(bps).map(|f| f.simplify())
    }

    pub fn add(&self, other: &MonotoneFn) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    /// Pointwise difference; fails if the result is not increasing.
    pub fn checked_sub(&self, other: &MonotoneFn) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    /// `self ∘ inner`, i.e. `x -> self(inner(x))` on `inner`'s domain.
    ///
    /// Breakpoints of the result are those of `inner` plus every point where a
    /// strictly increasing piece of `inner` crosses a breakpoint level of
    /// `self`. One-sided limits follow the side from which `inner` approaches:
    /// through a strictly increasing piece the outer limit is taken, across a
    /// constant piece the outer value is taken.
    pub fn compose(&self, inner: &MonotoneFn) -> Result<MonotoneFn> {
        if inner.start_value() < self.lo() || inner.end_value() > self.hi() {
            return Err(Error::Composition(format!(
                "inner range [{}, {}] not contained in outer domain [{}, {}]",
                to_f64(inner.start_value()),
                to_f64(inner.end_value()),
                to_f64(self.lo()),
                to_f64(self.hi())
            )));
        }

        let mut knots: Vec<Scalar> = inner.breakpoints.iter().map(|b| b.x.clone()).collect();
        for w in inner.breakpoints.windows(2) {
            let (start, end) = (&w[0].right, &w[1].left);
            if start == end {
                continue;
            }
            let width = &w[1].x - &w[0].x;
            let rise = end - start;
            for level in self.breakpoints.iter().map(|b| &b.x) {
                if start < level && level < end {
                    knots.push(&w[0].x + (level - start) * &width / &rise);
                }
            }
        }
        scalar::sort_dedup(&mut knots);

        let last = inner.breakpoints.len() - 1;
        let mut bps = Vec::with_capacity(knots.len());
        for t in &knots {
            let value = self.value(&inner.value(t)?)?;
            let left = if t == inner.lo() {
                value.clone()
            } else {
                let gap = match inner.locate(t) {
                    Ok(i) => i - 1,
                    Err(g) => g,
                };
                let approach = inner.eval_at(t, Side::Left)?;
                if inner.gap_is_flat(gap) {
                    self.value(&approach)?
                } else {
                    self.eval_at(&approach, Side::Left)?
                }
            };
            let right = if t == inner.hi() {
                value.clone()
            } else {
                let gap = match inner.locate(t) {
                    Ok(i) => i,
                    Err(g) => g,
                };
                debug_assert!(gap < last);
                let approach = inner.eval_at(t, Side::Right)?;
                if inner.gap_is_flat(gap) {
                    self.value(&approach)?
                } else {
                    self.eval_at(&approach, Side::Right)?
                }
            };
            bps.push(Breakpoint::jump(t.clone(), left, value, right));
        }
        Self::new(bps).map(|f| f.simplify())
    }

    fn gap_is_flat(&self, gap: usize) -> bool {
        self.breakpoints[gap].right == self.breakpoints[gap + 1].left
    }

    /// `X(y) = inf { x : y <= F(x) }` for `y` in `[F(lo), F(hi)]`.
    pub fn lower_inverse_at(&self, y: &Scalar) -> Result<Scalar> {
        self.check_range(y)?;
        let bps = &self.breakpoints;
        for i in 0..bps.len() {
            if &bps[i].value >= y {
                return Ok(bps[i].x.clone());
            }
            if i + 1 == bps.len() {
                break;
            }
            let (start, end) = (&bps[i].right, &bps[i + 1].left);
            if start >= y {
                // attained immediately to the right of x_i
                return Ok(bps[i].x.clone());
            }
            if end > y {
                return Ok(&bps[i].x + (y - start) * (&bps[i + 1].x - &bps[i].x) / (end - start));
            }
        }
        unreachable!("y <= F(hi) guarantees a hit")
    }

    /// `Ξ(y) = sup { x : F(x) <= y }` for `y` in `[F(lo), F(hi)]`.
    pub fn upper_inverse_at(&self, y: &Scalar) -> Result<Scalar> {
        self.check_range(y)?;
        let bps = &self.breakpoints;
        for i in (0..bps.len()).rev() {
            if &bps[i].value <= y {
                return Ok(bps[i].x.clone());
            }
            if i == 0 {
                break;
            }
            let (start, end) = (&bps[i - 1].right, &bps[i].left);
            if end <= y {
                return Ok(bps[i].x.clone());
            }
            if start < y {
                return Ok(
                    &bps[i - 1].x + (y - start) * (&bps[i].x - &bps[i - 1].x) / (end - start)
                );
            }
        }
        unreachable!("y >= F(lo) guarantees a hit")
    }

    fn check_range(&self, y: &Scalar) -> Result<()> {
        if y < self.start_value() || y > self.end_value() {
            return Err(Error::Domain {
                x: to_f64(y),
                lo: to_f64(self.start_value()),
                hi: to_f64(self.end_value()),
            });
        }
        Ok(())
    }

    /// Every level at which an inverse can change shape: all breakpoint fields.
    fn level_knots(&self) -> Vec<Scalar> {
        let mut ys: Vec<Scalar> = self
            .breakpoints
            .iter()
            .flat_map(|b| [b.left.clone(), b.value.clone(), b.right.clone()])
            .collect();
        scalar::sort_dedup(&mut ys);
        ys
    }

    fn require_nondegenerate_range(&self) -> Result<()> {
        if self.start_value() == self.end_value() {
            return Err(Error::DegenerateRange {
                level: to_f64(self.start_value()),
            });
        }
        Ok(())
    }

    /// The left-continuous generalized inverse `X` on `[F(lo), F(hi)]`.
    pub fn left_inverse(&self) -> Result<MonotoneFn> {
        self.require_nondegenerate_range()?;
        Self::from_affine_pieces(&self.level_knots(), |y| {
            self.lower_inverse_at(y).expect("knot within range")
        })
    }

    /// The right-continuous generalized inverse `Ξ` on `[F(lo), F(hi)]`.
    pub fn right_inverse(&self) -> Result<MonotoneFn> {
        self.require_nondegenerate_range()?;
        Self::from_affine_pieces(&self.level_knots(), |y| {
            self.upper_inverse_at(y).expect("knot within range")
        })
    }

    /// `W = X + theta (Ξ - X)`, a generalized inverse for every `theta` in `[0, 1]`.
    pub fn selector_inverse(&self, theta: &Scalar) -> Result<MonotoneFn> {
        if theta < &Scalar::zero() || theta > &Scalar::one() {
            return Err(Error::parameter(format!(
                "theta = {} must lie in [0, 1]",
                to_f64(theta)
            )));
        }
        self.require_nondegenerate_range()?;
        Self::from_affine_pieces(&self.level_knots(), |y| {
            let lower = self.lower_inverse_at(y).expect("knot within range");
            let upper = self.upper_inverse_at(y).expect("knot within range");
            &lower + theta * (upper - &lower)
        })
    }

    /// The set `H` of levels whose preimage has more than one point.
    ///
    /// A level `y` qualifies exactly when `X(y) < Ξ(y)`; only breakpoint
    /// fields can qualify.
    pub fn flat_levels(&self) -> FlatLevels {
        let levels = self
            .level_knots()
            .into_iter()
            .filter_map(|y| {
                let x_left = self.lower_inverse_at(&y).expect("knot within range");
                let x_right = self.upper_inverse_at(&y).expect("knot within range");
                (x_left < x_right).then_some(FlatLevel { y, x_left, x_right })
            })
            .collect();
        FlatLevels {
            range: (self.start_value().clone(), self.end_value().clone()),
            levels,
        }
    }

    /// Sorted sample of `n` equally spaced points plus every breakpoint.
    pub fn sample_points(&self, n: usize) -> Vec<Scalar> {
        let mut xs: Vec<Scalar> = self.breakpoints.iter().map(|b| b.x.clone()).collect();
        if n >= 2 {
            let width = self.hi() - self.lo();
            let steps = scalar::int(n as i64 - 1);
            xs.extend((0..n).map(|k| self.lo() + &width * scalar::int(k as i64) / &steps));
        }
        scalar::sort_dedup(&mut xs);
        xs
    }
}
