//! Bounded piecewise-cubic integrands and their exact integrals against
//! [`LSMeasure`]s.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::LSMeasure;
use crate::monotone::{MonotoneFn, Side};
use crate::scalar::{self, max_ref, min_ref, to_f64, Scalar};

pub const MAX_DEGREE: usize = 3;

/// `c0 + c1 x + c2 x^2 + c3 x^3` in the absolute variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: [Scalar; MAX_DEGREE + 1],
}

impl Poly {
    pub fn new(coeffs: [Scalar; MAX_DEGREE + 1]) -> Self {
        Poly { coeffs }
    }

    /// Pads missing high-order coefficients with zero.
    pub fn from_slice(coeffs: &[Scalar]) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::parameter(format!(
                "polynomial degree {} exceeds the cap of {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        let mut c: [Scalar; MAX_DEGREE + 1] = Default::default();
        for (slot, v) in c.iter_mut().zip(coeffs) {
            *slot = v.clone();
        }
        Ok(Poly { coeffs: c })
    }

    pub fn constant(k: Scalar) -> Self {
        let mut c: [Scalar; MAX_DEGREE + 1] = Default::default();
        c[0] = k;
        Poly { coeffs: c }
    }

    pub fn linear(c0: Scalar, c1: Scalar) -> Self {
        let mut c: [Scalar; MAX_DEGREE + 1] = Default::default();
        c[0] = c0;
        c[1] = c1;
        Poly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Scalar; MAX_DEGREE + 1] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(scalar::zero(), |acc, c| acc * x + c)
    }

    /// Antiderivative vanishing at 0.
    fn primitive(&self, x: &Scalar) -> Scalar {
        let mut acc = scalar::zero();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = (acc + c / scalar::int(k as i64 + 1)) * x;
        }
        acc
    }

    pub fn integral(&self, lo: &Scalar, hi: &Scalar) -> Scalar {
        self.primitive(hi) - self.primitive(lo)
    }

    pub fn derivative(&self) -> Poly {
        let mut c: [Scalar; MAX_DEGREE + 1] = Default::default();
        for k in 1..=MAX_DEGREE {
            c[k - 1] = &self.coeffs[k] * scalar::int(k as i64);
        }
        Poly { coeffs: c }
    }

    /// `y -> self(alpha + beta y)`.
    pub fn compose_affine(&self, alpha: &Scalar, beta: &Scalar) -> Poly {
        // accumulate powers of (alpha + beta y) as coefficient arrays
        let mut out: [Scalar; MAX_DEGREE + 1] = Default::default();
        let mut power: [Scalar; MAX_DEGREE + 1] = Default::default();
        power[0] = scalar::int(1);
        for c in &self.coeffs {
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
            let mut next: [Scalar; MAX_DEGREE + 1] = Default::default();
            for k in 0..=MAX_DEGREE {
                if power[k].is_zero() {
                    continue;
                }
                next[k] += alpha * &power[k];
                if k < MAX_DEGREE {
                    next[k + 1] += beta * &power[k];
                }
            }
            power = next;
        }
        Poly { coeffs: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut c = self.coeffs.clone();
        for (a, b) in c.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Poly { coeffs: c }
    }

    pub fn scale(&self, k: &Scalar) -> Poly {
        let mut c = self.coeffs.clone();
        for a in c.iter_mut() {
            *a *= k;
        }
        Poly { coeffs: c }
    }

    /// Minimum of the polynomial over the closed interval, valid for degree <= 2.
    fn min_quadratic(&self, lo: &Scalar, hi: &Scalar) -> Scalar {
        debug_assert!(self.coeffs[3].is_zero());
        let mut best = min_ref(&self.eval(lo), &self.eval(hi)).clone();
        let a = &self.coeffs[2];
        if a.is_positive() {
            let vertex = -&self.coeffs[1] / (a * scalar::int(2));
            if lo < &vertex && &vertex < hi {
                best = min_ref(&best, &self.eval(&vertex)).clone();
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    fn name(self) -> &'static str {
        match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
        }
    }
}

/// A piecewise polynomial with explicitly stored values at its piece
/// boundaries (including both domain ends). Evaluation at a boundary returns
/// the stored value, not a limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseFn {
    boundaries: Vec<Scalar>,
    polys: Vec<Poly>,
    point_values: Vec<Scalar>,
}

impl PiecewiseFn {
    pub fn new(
        boundaries: Vec<Scalar>,
        polys: Vec<Poly>,
        point_values: Vec<Scalar>,
    ) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::invalid("an integrand needs at least one piece"));
        }
        if polys.len() + 1 != boundaries.len() || point_values.len() != boundaries.len() {
            return Err(Error::invalid(format!(
                "{} boundaries need {} pieces and {} point values, got {} and {}",
                boundaries.len(),
                boundaries.len() - 1,
                boundaries.len(),
                polys.len(),
                point_values.len()
            )));
        }
        if let Some(i) = boundaries.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "piece {i}: interval [{}, {}] is empty or out of order",
                to_f64(&boundaries[i]),
                to_f64(&boundaries[i + 1])
            )));
        }
        Ok(PiecewiseFn {
            boundaries,
            polys,
            point_values,
        })
    }

    /// One polynomial on `[lo, hi]`, continuous at both ends.
    pub fn polynomial(lo: Scalar, hi: Scalar, poly: Poly) -> Result<Self> {
        let values = vec![poly.eval(&lo), poly.eval(&hi)];
        Self::new(vec![lo, hi], vec![poly], values)
    }

    pub fn identity(lo: Scalar, hi: Scalar) -> Result<Self> {
        Self::polynomial(lo, hi, Poly::linear(scalar::zero(), scalar::int(1)))
    }

    pub fn constant(lo: Scalar, hi: Scalar, k: Scalar) -> Result<Self> {
        Self::polynomial(lo, hi, Poly::constant(k))
    }

    pub fn lo(&self) -> &Scalar {
        &self.boundaries[0]
    }

    pub fn hi(&self) -> &Scalar {
        &self.boundaries[self.boundaries.len() - 1]
    }

    pub fn domain(&self) -> (&Scalar, &Scalar) {
        (self.lo(), self.hi())
    }

    pub fn boundaries(&self) -> &[Scalar] {
        &self.boundaries
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn point_values(&self) -> &[Scalar] {
        &self.point_values
    }

    fn locate(&self, x: &Scalar) -> std::result::Result<usize, usize> {
        match self.boundaries.binary_search(x) {
            Ok(i) => Ok(i),
            Err(i) => Err(i - 1),
        }
    }

    fn check_domain(&self, x: &Scalar) -> Result<()> {
        if x < self.lo() || x > self.hi() {
            return Err(Error::Domain {
                x: to_f64(x),
                lo: to_f64(self.lo()),
                hi: to_f64(self.hi()),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        self.check_domain(x)?;
        Ok(match self.locate(x) {
            Ok(i) => self.point_values[i].clone(),
            Err(piece) => self.polys[piece].eval(x),
        })
    }

    /// One-sided limit; at the domain ends the outer side returns the value.
    pub fn limit(&self, x: &Scalar, side: Side) -> Result<Scalar> {
        self.check_domain(x)?;
        let last = self.boundaries.len() - 1;
        Ok(match (self.locate(x), side) {
            (Err(piece), _) => self.polys[piece].eval(x),
            (Ok(i), Side::Value) => self.point_values[i].clone(),
            (Ok(0), Side::Left) => self.point_values[0].clone(),
            (Ok(i), Side::Right) if i == last => self.point_values[last].clone(),
            (Ok(i), Side::Left) => self.polys[i - 1].eval(x),
            (Ok(i), Side::Right) => self.polys[i].eval(x),
        })
    }

    pub fn eval_f64(&self, x: f64) -> Result<f64> {
        self.eval(&scalar::from_f64(x)?).map(|v| to_f64(&v))
    }

    /// True when every stored point value equals both adjacent limits.
    pub fn is_continuous(&self) -> bool {
        self.boundaries.iter().all(|b| {
            let v = self.eval(b).expect("boundary in domain");
            self.limit(b, Side::Left).expect("in domain") == v
                && self.limit(b, Side::Right).expect("in domain") == v
        })
    }

    /// Validates a declared monotonicity exactly: the derivative on every
    /// piece and the ordering of limits and values at every boundary.
    pub fn check_monotone(&self, direction: Monotonicity) -> Result<()> {
        let oriented = match direction {
            Monotonicity::Increasing => self.clone(),
            Monotonicity::Decreasing => self.scale(&scalar::int(-1)),
        };
        let fail = |detail: String| Error::NotMonotone {
            direction: direction.name(),
            detail,
        };
        for (i, poly) in oriented.polys.iter().enumerate() {
            let (lo, hi) = (&oriented.boundaries[i], &oriented.boundaries[i + 1]);
            if poly.derivative().min_quadratic(lo, hi).is_negative() {
                return Err(fail(format!(
                    "piece {i} on [{}, {}] changes direction",
                    to_f64(lo),
                    to_f64(hi)
                )));
            }
        }
        for b in &oriented.boundaries {
            let left = oriented.limit(b, Side::Left)?;
            let value = oriented.eval(b)?;
            let right = oriented.limit(b, Side::Right)?;
            if !(left <= value && value <= right) {
                return Err(fail(format!(
                    "limits and value out of order at x = {}",
                    to_f64(b)
                )));
            }
        }
        Ok(())
    }

    pub fn scale(&self, k: &Scalar) -> PiecewiseFn {
        PiecewiseFn {
            boundaries: self.boundaries.clone(),
            polys: self.polys.iter().map(|p| p.scale(k)).collect(),
            point_values: self.point_values.iter().map(|v| v * k).collect(),
        }
    }

    /// Pointwise sum on a common domain.
    pub fn add(&self, other: &PiecewiseFn) -> Result<PiecewiseFn> {
        if self.domain() != other.domain() {
            return Err(Error::parameter("integrands live on different domains"));
        }
        let mut cuts: Vec<Scalar> = self
            .boundaries
            .iter()
            .chain(&other.boundaries)
            .cloned()
            .collect();
        scalar::sort_dedup(&mut cuts);
        let piece_at = |f: &PiecewiseFn, lo: &Scalar| -> Poly {
            let idx = match f.locate(lo) {
                Ok(i) => i,
                Err(i) => i,
            };
            f.polys[idx].clone()
        };
        let polys = cuts
            .windows(2)
            .map(|w| piece_at(self, &w[0]).add(&piece_at(other, &w[0])))
            .collect();
        let values = cuts
            .iter()
            .map(|x| Ok(self.eval(x)? + other.eval(x)?))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseFn::new(cuts, polys, values)
    }

    /// `f ∘ w` on `w`'s domain.
    ///
    /// Pieces break at `w`'s breakpoints and wherever a strictly increasing
    /// piece of `w` crosses a boundary of `f`; on every resulting gap `w` is
    /// affine with values inside a single piece of `f` (or constant).
    pub fn compose_with_monotone(&self, w: &MonotoneFn) -> Result<PiecewiseFn> {
        if w.start_value() < self.lo() || w.end_value() > self.hi() {
            return Err(Error::Composition(format!(
                "range [{}, {}] of the monotone map not within integrand domain [{}, {}]",
                to_f64(w.start_value()),
                to_f64(w.end_value()),
                to_f64(self.lo()),
                to_f64(self.hi())
            )));
        }
        let bps = w.breakpoints();
        let mut cuts: Vec<Scalar> = bps.iter().map(|b| b.x.clone()).collect();
        for pair in bps.windows(2) {
            let (start, end) = (&pair[0].right, &pair[1].left);
            if start == end {
                continue;
            }
            let width = &pair[1].x - &pair[0].x;
            for b in &self.boundaries {
                if start < b && b < end {
                    cuts.push(&pair[0].x + (b - start) * &width / (end - start));
                }
            }
        }
        scalar::sort_dedup(&mut cuts);

        let mut polys = Vec::with_capacity(cuts.len() - 1);
        for gap in cuts.windows(2) {
            let (u, v) = (&gap[0], &gap[1]);
            let start = w.eval_at(u, Side::Right)?;
            let end = w.eval_at(v, Side::Left)?;
            if start == end {
                polys.push(Poly::constant(self.eval(&start)?));
                continue;
            }
            let beta = (&end - &start) / (v - u);
            let alpha = &start - &beta * u;
            let mid = (&start + &end) * scalar::half();
            let piece = match self.locate(&mid) {
                Ok(_) => unreachable!("boundary levels were cut out"),
                Err(p) => p,
            };
            polys.push(self.polys[piece].compose_affine(&alpha, &beta));
        }
        let values = cuts
            .iter()
            .map(|y| self.eval(&w.value(y)?))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseFn::new(cuts, polys, values)
    }
}

/// `∫ f dμ = Σ f(c) μ({c}) + ∫ f ρ dx`, all terms in closed form.
pub fn integrate(f: &PiecewiseFn, mu: &LSMeasure) -> Result<Scalar> {
    let (lo, hi) = mu.domain();
    if lo < f.lo() || hi > f.hi() {
        return Err(Error::parameter(format!(
            "integrand domain [{}, {}] does not cover measure domain [{}, {}]",
            to_f64(f.lo()),
            to_f64(f.hi()),
            to_f64(lo),
            to_f64(hi)
        )));
    }
    let mut total = scalar::zero();
    for atom in mu.atoms() {
        total += f.eval(&atom.location)? * &atom.mass;
    }
    for piece in mu.density() {
        if piece.rate.is_zero() {
            continue;
        }
        for (i, poly) in f.polys.iter().enumerate() {
            let a = max_ref(&piece.lo, &f.boundaries[i]);
            let b = min_ref(&piece.hi, &f.boundaries[i + 1]);
            if a < b {
                total += &piece.rate * poly.integral(a, b);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::measure::measure_from;
    use crate::scalar::{int, sc};

    #[test]
    fn constant_integrand_gives_total_mass() {
        let mu = measure_from(&fixtures::fix2_m());
        let k = PiecewiseFn::constant(sc(0.0), sc(2.0), sc(3.0)).unwrap();
        assert_eq!(integrate(&k, &mu).unwrap(), sc(7.5));
    }

    #[test]
    fn fix2_closed_form() {
        let mu = measure_from(&fixtures::fix2_m());
        let f = PiecewiseFn::identity(sc(0.0), sc(2.0)).unwrap();
        assert_eq!(integrate(&f, &mu).unwrap(), sc(2.5));
    }

    #[test]
    fn fix1_closed_form() {
        let lambda = measure_from(&fixtures::fix1_n().compose(&fixtures::fix1_m()).unwrap());
        let f = PiecewiseFn::identity(sc(0.0), sc(3.0)).unwrap();
        assert_eq!(integrate(&f, &lambda).unwrap(), sc(4.5));
    }

    #[test]
    fn domain_mismatch() {
        let mu = measure_from(&fixtures::fix2_m());
        let f = PiecewiseFn::identity(sc(0.0), sc(1.0)).unwrap();
        assert!(matches!(integrate(&f, &mu), Err(Error::Parameter(_))));
    }

    #[test]
    fn point_values_rule_at_atoms() {
        // f jumps at 1 with a stored value differing from both limits
        let f = PiecewiseFn::new(
            vec![sc(0.0), sc(1.0), sc(2.0)],
            vec![Poly::constant(sc(0.0)), Poly::constant(sc(10.0))],
            vec![sc(0.0), sc(5.0), sc(10.0)],
        )
        .unwrap();
        assert_eq!(f.eval(&sc(1.0)).unwrap(), sc(5.0));
        assert_eq!(f.limit(&sc(1.0), Side::Left).unwrap(), sc(0.0));
        let mu = measure_from(&fixtures::fix2_m());
        // atom 0.5 at 1 contributes 2.5, density on (1,2] contributes 10
        assert_eq!(integrate(&f, &mu).unwrap(), sc(12.5));
    }

    #[test]
    fn cubic_integral_and_composition() {
        let p = Poly::from_slice(&[sc(1.0), sc(-2.0), sc(0.0), sc(4.0)]).unwrap();
        assert_eq!(p.integral(&sc(0.0), &sc(1.0)), sc(1.0));
        let q = p.compose_affine(&sc(1.0), &sc(2.0));
        for y in [-1.0, 0.0, 0.5, 3.0] {
            let y = sc(y);
            assert_eq!(q.eval(&y), p.eval(&(sc(1.0) + sc(2.0) * &y)));
        }
        assert!(Poly::from_slice(&vec![sc(1.0); 5]).is_err());
    }

    #[test]
    fn identity_composed_is_the_map() {
        let x = fixtures::fix1_m().left_inverse().unwrap();
        let f = PiecewiseFn::identity(sc(0.0), sc(3.0)).unwrap();
        let fx = f.compose_with_monotone(&x).unwrap();
        for y in x.sample_points(41) {
            assert_eq!(fx.eval(&y).unwrap(), x.value(&y).unwrap());
        }
        assert_eq!(fx.eval(&sc(1.0)).unwrap(), sc(1.0));
        assert_eq!(fx.limit(&sc(1.0), Side::Right).unwrap(), sc(2.0));
        assert_eq!(fx.eval(&sc(1.5)).unwrap(), sc(2.5));
    }

    #[test]
    fn constant_composed_stays_constant() {
        let k = PiecewiseFn::constant(sc(0.0), sc(3.0), sc(-2.0)).unwrap();
        let g = k.compose_with_monotone(&fixtures::fix1_m()).unwrap();
        for y in fixtures::fix1_m().sample_points(17) {
            assert_eq!(g.eval(&y).unwrap(), sc(-2.0));
        }
    }

    #[test]
    fn composition_crosses_integrand_boundaries() {
        // f has a boundary at 0.5; w(y) = 2y crosses it at y = 0.25
        let f = PiecewiseFn::new(
            vec![sc(0.0), sc(0.5), sc(1.0)],
            vec![Poly::constant(sc(1.0)), Poly::linear(sc(0.0), sc(4.0))],
            vec![sc(1.0), sc(7.0), sc(4.0)],
        )
        .unwrap();
        let w = MonotoneFn::from_knots(&[(sc(0.0), sc(0.0)), (sc(0.5), sc(1.0))]).unwrap();
        let g = f.compose_with_monotone(&w).unwrap();
        assert_eq!(g.eval(&sc(0.25)).unwrap(), sc(7.0));
        assert_eq!(g.eval(&sc(0.125)).unwrap(), sc(1.0));
        assert_eq!(g.eval(&sc(0.375)).unwrap(), sc(3.0));
        let short = MonotoneFn::from_knots(&[(sc(0.0), sc(0.0)), (sc(1.0), sc(2.0))]).unwrap();
        assert!(matches!(
            f.compose_with_monotone(&short),
            Err(Error::Composition(_))
        ));
    }

    #[test]
    fn monotone_validation() {
        let up = PiecewiseFn::polynomial(
            sc(-1.0),
            sc(1.0),
            Poly::from_slice(&[sc(0.0), sc(0.0), sc(0.0), sc(1.0)]).unwrap(),
        )
        .unwrap();
        assert!(up.check_monotone(Monotonicity::Increasing).is_ok());
        assert!(up.check_monotone(Monotonicity::Decreasing).is_err());
        let square = PiecewiseFn::polynomial(
            sc(-1.0),
            sc(1.0),
            Poly::from_slice(&[sc(0.0), sc(0.0), sc(1.0)]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            square.check_monotone(Monotonicity::Increasing),
            Err(Error::NotMonotone { .. })
        ));
        let down = up.scale(&int(-1));
        assert!(down.check_monotone(Monotonicity::Decreasing).is_ok());
        // a bad point value breaks monotonicity at a boundary
        let spike = PiecewiseFn::new(
            vec![sc(0.0), sc(1.0), sc(2.0)],
            vec![Poly::constant(sc(0.0)), Poly::constant(sc(1.0))],
            vec![sc(0.0), sc(3.0), sc(1.0)],
        )
        .unwrap();
        assert!(spike.check_monotone(Monotonicity::Increasing).is_err());
    }

    #[test]
    fn sum_and_scale() {
        let a = PiecewiseFn::identity(sc(0.0), sc(2.0)).unwrap();
        let b = PiecewiseFn::new(
            vec![sc(0.0), sc(1.0), sc(2.0)],
            vec![Poly::constant(sc(0.0)), Poly::constant(sc(1.0))],
            vec![sc(0.0), sc(1.0), sc(1.0)],
        )
        .unwrap();
        let s = a.add(&b.scale(&sc(2.0))).unwrap();
        assert_eq!(s.eval(&sc(0.5)).unwrap(), sc(0.5));
        assert_eq!(s.eval(&sc(1.0)).unwrap(), sc(3.0));
        assert_eq!(s.eval(&sc(1.5)).unwrap(), sc(3.5));
    }
}
