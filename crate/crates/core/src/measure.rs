//! Lebesgue-Stieltjes measures of increasing functions, stored extensionally
//! as point masses plus a piecewise-constant density.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::monotone::{MonotoneFn, Side};
use crate::scalar::{self, max_ref, min_ref, to_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub location: Scalar,
    pub mass: Scalar,
}

/// Constant density `rate` on `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityPiece {
    pub lo: Scalar,
    pub hi: Scalar,
    pub rate: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: Scalar, hi: Scalar) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn open(lo: Scalar, hi: Scalar) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: Scalar, hi: Scalar) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }

    /// `[lo, hi)`
    pub fn right_open(lo: Scalar, hi: Scalar) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn singleton(x: Scalar) -> Self {
        Self::closed(x.clone(), x)
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let above = if self.lo_closed {
            x >= &self.lo
        } else {
            x > &self.lo
        };
        let below = if self.hi_closed {
            x <= &self.hi
        } else {
            x < &self.hi
        };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LSMeasure {
    lo: Scalar,
    hi: Scalar,
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
}

/// The measure `μ` with `μ({c}) = F(c+) - F(c-)` and density equal to the
/// slope of `F` between breakpoints. At the domain ends the outer limit is the
/// value, so `μ({lo}) = F(lo+) - F(lo)` and `μ({hi}) = F(hi) - F(hi-)`.
pub fn measure_from(f: &MonotoneFn) -> LSMeasure {
    let bps = f.breakpoints();
    let atoms = bps
        .iter()
        .filter_map(|b| {
            let mass = &b.right - &b.left;
            (!mass.is_zero()).then(|| Atom {
                location: b.x.clone(),
                mass,
            })
        })
        .collect();
    let density = merge_pieces(
        bps.windows(2)
            .map(|w| DensityPiece {
                lo: w[0].x.clone(),
                hi: w[1].x.clone(),
                rate: (&w[1].left - &w[0].right) / (&w[1].x - &w[0].x),
            })
            .collect(),
    );
    LSMeasure {
        lo: f.lo().clone(),
        hi: f.hi().clone(),
        atoms,
        density,
    }
}

/// Joins neighbouring pieces with equal rates.
fn merge_pieces(pieces: Vec<DensityPiece>) -> Vec<DensityPiece> {
    let mut out: Vec<DensityPiece> = Vec::with_capacity(pieces.len());
    for piece in pieces {
        match out.last_mut() {
            Some(last) if last.rate == piece.rate => last.hi = piece.hi,
            _ => out.push(piece),
        }
    }
    out
}

impl LSMeasure {
    /// Builds a measure from raw parts. Atoms are sorted and merged, zero
    /// masses dropped; density pieces must tile the domain and are merged
    /// where neighbours share a rate.
    pub fn from_parts(
        lo: Scalar,
        hi: Scalar,
        atoms: Vec<Atom>,
        density: Vec<DensityPiece>,
    ) -> Result<Self> {
        if lo >= hi {
            return Err(Error::invalid("measure domain must satisfy lo < hi"));
        }
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut sorted = atoms;
        sorted.sort_by(|a, b| a.location.cmp(&b.location));
        for atom in sorted {
            if atom.mass.is_negative() {
                return Err(Error::invalid("atom masses must be non-negative"));
            }
            if atom.location < lo || atom.location > hi {
                return Err(Error::invalid("atom outside the measure domain"));
            }
            match merged.last_mut() {
                Some(last) if last.location == atom.location => last.mass += atom.mass,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| !a.mass.is_zero());

        let mut cursor = &lo;
        for piece in &density {
            if &piece.lo != cursor || piece.lo >= piece.hi {
                return Err(Error::invalid(
                    "density pieces must tile the domain in order",
                ));
            }
            if piece.rate.is_negative() {
                return Err(Error::invalid("density must be non-negative"));
            }
            cursor = &piece.hi;
        }
        if cursor != &hi {
            return Err(Error::invalid(
                "density pieces must tile the domain in order",
            ));
        }
        Ok(LSMeasure {
            lo,
            hi,
            atoms: merged,
            density: merge_pieces(density),
        })
    }

    pub fn domain(&self) -> (&Scalar, &Scalar) {
        (&self.lo, &self.hi)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn total_mass(&self) -> Scalar {
        let atoms: Scalar = self.atoms.iter().map(|a| &a.mass).sum();
        let continuous: Scalar = self.density.iter().map(|p| &p.rate * (&p.hi - &p.lo)).sum();
        atoms + continuous
    }

    pub fn atom_mass(&self, x: &Scalar) -> Scalar {
        self.atoms
            .binary_search_by(|a| a.location.cmp(x))
            .map(|i| self.atoms[i].mass.clone())
            .unwrap_or_else(|_| scalar::zero())
    }

    /// Mass of an interval inside the domain.
    pub fn mass(&self, interval: &Interval) -> Result<Scalar> {
        if interval.lo > interval.hi {
            return Err(Error::parameter(format!(
                "malformed interval: lo = {} > hi = {}",
                to_f64(&interval.lo),
                to_f64(&interval.hi)
            )));
        }
        if interval.lo < self.lo || interval.hi > self.hi {
            return Err(Error::parameter(format!(
                "interval [{}, {}] not within measure domain [{}, {}]",
                to_f64(&interval.lo),
                to_f64(&interval.hi),
                to_f64(&self.lo),
                to_f64(&self.hi)
            )));
        }
        let atoms: Scalar = self
            .atoms
            .iter()
            .filter(|a| interval.contains(&a.location))
            .map(|a| &a.mass)
            .sum();
        let mut continuous = scalar::zero();
        for piece in &self.density {
            let lo = max_ref(&piece.lo, &interval.lo);
            let hi = min_ref(&piece.hi, &interval.hi);
            if lo < hi {
                continuous += &piece.rate * (hi - lo);
            }
        }
        Ok(atoms + continuous)
    }

    /// Sum of two measures on the same domain.
    pub fn add(&self, other: &LSMeasure) -> Result<LSMeasure> {
        if self.domain() != other.domain() {
            return Err(Error::parameter("measures live on different domains"));
        }
        let mut cuts: Vec<Scalar> = self
            .density
            .iter()
            .chain(&other.density)
            .flat_map(|p| [p.lo.clone(), p.hi.clone()])
            .collect();
        scalar::sort_dedup(&mut cuts);
        let rate_at = |pieces: &[DensityPiece], lo: &Scalar, hi: &Scalar| -> Scalar {
            pieces
                .iter()
                .find(|p| &p.lo <= lo && hi <= &p.hi)
                .map(|p| p.rate.clone())
                .unwrap_or_else(scalar::zero)
        };
        let density = cuts
            .windows(2)
            .map(|w| DensityPiece {
                lo: w[0].clone(),
                hi: w[1].clone(),
                rate: rate_at(&self.density, &w[0], &w[1]) + rate_at(&other.density, &w[0], &w[1]),
            })
            .collect();
        let atoms = self.atoms.iter().chain(&other.atoms).cloned().collect();
        LSMeasure::from_parts(self.lo.clone(), self.hi.clone(), atoms, density)
    }
}

fn check_preimage_domain(nu: &LSMeasure, m: &MonotoneFn, x: &Scalar) -> Result<()> {
    if !m.contains(x) {
        return Err(Error::parameter(format!(
            "x = {} outside [{}, {}]",
            to_f64(x),
            to_f64(m.lo()),
            to_f64(m.hi())
        )));
    }
    let (lo, hi) = nu.domain();
    if m.start_value() < lo || m.end_value() > hi {
        return Err(Error::parameter(format!(
            "measure domain [{}, {}] does not cover the range [{}, {}]",
            to_f64(lo),
            to_f64(hi),
            to_f64(m.start_value()),
            to_f64(m.end_value())
        )));
    }
    Ok(())
}

/// `ν(X⁻¹[[lo, x]])`, evaluated as `ν([M(lo), M(x+)])` since
/// `X(y) <= x` exactly when `y <= M(x+)`.
pub fn preimage_mass(nu: &LSMeasure, m: &MonotoneFn, x: &Scalar) -> Result<Scalar> {
    check_preimage_domain(nu, m, x)?;
    let upper = m.eval_at(x, Side::Right)?;
    nu.mass(&Interval::closed(m.start_value().clone(), upper))
}

/// `ν(Ξ⁻¹[[x, hi]])`, evaluated as `ν([M(x-), M(hi)])` since
/// `Ξ(y) >= x` exactly when `y >= M(x-)`.
pub fn upper_preimage_mass(nu: &LSMeasure, m: &MonotoneFn, x: &Scalar) -> Result<Scalar> {
    check_preimage_domain(nu, m, x)?;
    let lower = m.eval_at(x, Side::Left)?;
    nu.mass(&Interval::closed(lower, m.end_value().clone()))
}

/// One end of the level set `{y : W(y) ∈ I}`: position and closedness.
type End = (Scalar, bool);

/// Crossing of the affine piece from `(x0, v0)` to `(x1, v1)` with level `a`.
fn crossing(x0: &Scalar, v0: &Scalar, x1: &Scalar, v1: &Scalar, a: &Scalar) -> Scalar {
    x0 + (x1 - x0) * ((a - v0) / (v1 - v0))
}

/// Start of `{y : W(y) >= a}` (`> a` when `strict`); the set runs to `hi`.
fn upper_set(w: &MonotoneFn, a: &Scalar, strict: bool) -> Option<End> {
    let hit = |v: &Scalar| if strict { v > a } else { v >= a };
    let bps = w.breakpoints();
    for (i, b) in bps.iter().enumerate() {
        if i > 0 {
            let prev = &bps[i - 1];
            if hit(&b.left) && !hit(&prev.right) {
                let t = crossing(&prev.x, &prev.right, &b.x, &b.left, a);
                return Some((t, !strict));
            }
        }
        if hit(&b.value) {
            return Some((b.x.clone(), true));
        }
        if hit(&b.right) {
            return Some((b.x.clone(), false));
        }
    }
    None
}

/// End of `{y : W(y) <= b}` (`< b` when `strict`); the set starts at `lo`.
fn lower_set(w: &MonotoneFn, b: &Scalar, strict: bool) -> Option<End> {
    let hit = |v: &Scalar| if strict { v < b } else { v <= b };
    let bps = w.breakpoints();
    for i in (0..bps.len()).rev() {
        let p = &bps[i];
        if hit(&p.value) {
            return Some((p.x.clone(), true));
        }
        if hit(&p.left) {
            return Some((p.x.clone(), false));
        }
        if i > 0 {
            let prev = &bps[i - 1];
            if hit(&prev.right) && !hit(&p.left) {
                let t = crossing(&prev.x, &prev.right, &p.x, &p.left, b);
                return Some((t, !strict));
            }
        }
    }
    None
}

/// `ν(W⁻¹[I])` for an increasing `W` defined on the domain of `ν`.
///
/// The preimage of an interval under an increasing map is an interval; its
/// ends are located by scanning the pieces of `W`.
pub fn pushforward_mass(nu: &LSMeasure, w: &MonotoneFn, interval: &Interval) -> Result<Scalar> {
    if w.domain() != nu.domain() {
        return Err(Error::parameter(format!(
            "map domain [{}, {}] differs from measure domain [{}, {}]",
            to_f64(w.lo()),
            to_f64(w.hi()),
            to_f64(&nu.lo),
            to_f64(&nu.hi)
        )));
    }
    let (Some((lo, lo_closed)), Some((hi, hi_closed))) = (
        upper_set(w, &interval.lo, !interval.lo_closed),
        lower_set(w, &interval.hi, !interval.hi_closed),
    ) else {
        return Ok(scalar::zero());
    };
    if lo > hi || (lo == hi && !(lo_closed && hi_closed)) {
        return Ok(scalar::zero());
    }
    nu.mass(&Interval {
        lo,
        hi,
        lo_closed,
        hi_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::monotone::Breakpoint;
    use crate::scalar::sc;

    #[test]
    fn pushforward_through_fix1_inverses() {
        let m = fixtures::fix1_m();
        let n = fixtures::fix1_n();
        let nu = measure_from(&n);
        let lambda = measure_from(&n.compose(&m).unwrap());
        let x = m.left_inverse().unwrap();
        let xi = m.right_inverse().unwrap();
        // FIX-1: under X the whole atom at y = 1 lands on x = 1
        let at_one = Interval::singleton(sc(1.0));
        assert_eq!(pushforward_mass(&nu, &x, &at_one).unwrap(), sc(1.0));
        assert_eq!(pushforward_mass(&nu, &xi, &at_one).unwrap(), sc(0.0));
        assert_eq!(lambda.mass(&at_one).unwrap(), sc(0.5));
        let whole = Interval::closed(sc(0.0), sc(3.0));
        assert_eq!(
            pushforward_mass(&nu, &x, &whole).unwrap(),
            lambda.total_mass()
        );
        let gap = Interval::open(sc(1.2), sc(1.8));
        assert_eq!(pushforward_mass(&nu, &x, &gap).unwrap(), sc(0.0));
        assert_eq!(lambda.mass(&gap).unwrap(), sc(0.0));
    }

    #[test]
    fn identity_measure() {
        let mu = measure_from(&MonotoneFn::identity(sc(0.0), sc(1.0)).unwrap());
        assert!(mu.atoms().is_empty());
        assert_eq!(mu.density()[0].rate, sc(1.0));
        assert_eq!(mu.total_mass(), sc(1.0));
    }

    #[test]
    fn fix2_measure() {
        let mu = measure_from(&fixtures::fix2_m());
        assert_eq!(
            mu.atoms(),
            &[Atom {
                location: sc(1.0),
                mass: sc(0.5)
            }]
        );
        assert!(mu.density().iter().all(|p| p.rate == sc(1.0)));
        assert_eq!(mu.total_mass(), sc(2.5));
        assert_eq!(
            mu.mass(&Interval::closed(sc(0.0), sc(1.0))).unwrap(),
            sc(1.5)
        );
        assert_eq!(mu.mass(&Interval::singleton(sc(1.0))).unwrap(), sc(0.5));
        assert_eq!(
            mu.mass(&Interval::right_open(sc(0.0), sc(1.0))).unwrap(),
            sc(1.0)
        );
    }

    #[test]
    fn unit_step() {
        let step = MonotoneFn::new(vec![
            Breakpoint::continuous(sc(0.0), sc(0.0)),
            Breakpoint::jump(sc(0.25), sc(0.0), sc(1.0), sc(1.0)),
            Breakpoint::continuous(sc(1.0), sc(1.0)),
        ])
        .unwrap();
        let mu = measure_from(&step);
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.atom_mass(&sc(0.25)), sc(1.0));
        assert!(mu.density().iter().all(|p| p.rate.is_zero()));
    }

    #[test]
    fn endpoint_atoms() {
        let f = MonotoneFn::new(vec![
            Breakpoint::jump(sc(0.0), sc(0.0), sc(0.0), sc(2.0)),
            Breakpoint::jump(sc(1.0), sc(2.0), sc(3.0), sc(3.0)),
        ])
        .unwrap();
        let mu = measure_from(&f);
        assert_eq!(mu.atom_mass(&sc(0.0)), sc(2.0));
        assert_eq!(mu.atom_mass(&sc(1.0)), sc(1.0));
        assert_eq!(mu.total_mass(), sc(3.0));
    }

    #[test]
    fn malformed_intervals() {
        let mu = measure_from(&fixtures::fix2_m());
        assert!(mu.mass(&Interval::closed(sc(1.0), sc(0.5))).is_err());
        assert!(mu.mass(&Interval::closed(sc(-1.0), sc(0.5))).is_err());
        assert_eq!(mu.mass(&Interval::open(sc(1.0), sc(1.0))).unwrap(), sc(0.0));
    }

    #[test]
    fn preimage_full_and_fixtures() {
        let m = fixtures::fix1_m();
        let nu_r = measure_from(&fixtures::fix1r_n());
        assert_eq!(
            preimage_mass(&nu_r, &m, &sc(3.0)).unwrap(),
            nu_r.total_mass()
        );
        assert_eq!(preimage_mass(&nu_r, &m, &sc(1.5)).unwrap(), sc(2.0));
        let lambda = measure_from(&fixtures::fix1r_n().compose(&m).unwrap());
        assert_eq!(
            lambda.mass(&Interval::closed(sc(0.0), sc(1.5))).unwrap(),
            sc(2.0)
        );

        let nu = measure_from(&fixtures::fix1_n());
        let lambda = measure_from(&fixtures::fix1_n().compose(&m).unwrap());
        let pre = preimage_mass(&nu, &m, &sc(1.5)).unwrap();
        let direct = lambda.mass(&Interval::closed(sc(0.0), sc(1.5))).unwrap();
        assert_eq!((pre.clone(), direct.clone()), (sc(2.0), sc(1.5)));
        assert_eq!(pre - direct, sc(0.5));
    }

    #[test]
    fn preimage_domain_mismatch() {
        let m = fixtures::fix2_m();
        let nu = measure_from(&MonotoneFn::identity(sc(0.0), sc(1.0)).unwrap());
        assert!(matches!(
            preimage_mass(&nu, &m, &sc(0.5)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn sum_of_measures() {
        let a = measure_from(&fixtures::fix1_n());
        let b = measure_from(&fixtures::fix1r_n());
        let s = a.add(&b).unwrap();
        assert_eq!(s.total_mass(), a.total_mass() + b.total_mass());
        assert_eq!(s.atom_mass(&sc(1.0)), sc(2.0));
    }
}
