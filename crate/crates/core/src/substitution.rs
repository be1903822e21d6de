//! Change of variables for `∫ f(x) dN(M(x))` with arbitrary increasing `M`, `N`.
//!
//! The mass that `ν` (the measure of `N`) puts on a flat level `y` of `M` is
//! split between the two ends of the level set: the left jump
//! `ΔN(y,-) = N(y) - N(y-)` lands on `X(y)`, the right jump
//! `ΔN(y,+) = N(y+) - N(y)` on `Ξ(y)`. Everything else of `ν` is carried by
//! `N₁`, the function left after removing those jumps, which is continuous
//! on the flat levels and so pushes forward through either inverse:
//!
//! ```text
//! ∫ f dΛ = ∫ f(X) dN₁ + Σ_H f(X(y)) ΔN(y,-) + Σ_H f(Ξ(y)) ΔN(y,+)
//! ```
//!
//! The special cases (right- or left-continuous `N` on the flats, `N`
//! continuous there, `M` continuous, `f = g ∘ M`) are verified through
//! [`verify_identity`], the one-sided bounds for monotone integrands through
//! [`check_inequalities`] and [`check_sandwich`].

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::integrand::{integrate, Monotonicity, PiecewiseFn};
use crate::measure::{measure_from, preimage_mass, upper_preimage_mass, Interval, LSMeasure};
use crate::monotone::{Breakpoint, FlatLevels, MonotoneFn, Side};
use crate::scalar::{self, to_f64, Scalar};

/// Default tolerance for identities whose terms include continuous parts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Default tolerance when every measure involved is purely atomic.
pub const ATOMIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `∫ f dΛ = ∫ f(W) dN` for any generalized inverse `W`, `N` continuous on `H`.
    Eq1,
    /// `∫ g(M) dΛ = ∫ g dN`, `M` continuous.
    Eq2,
    /// `∫ f dΛ = ∫ f(X) dN`, `N` right-continuous on `H`.
    Eq3,
    /// `∫ f dΛ = ∫ f(Ξ) dN`, `N` left-continuous on `H`.
    Eq4,
    /// The general jump-splitting form.
    Eq5,
    /// The general form with `f = g ∘ M`.
    Eq6,
    /// `∫ f(X) dN <= ∫ f dΛ <= ∫ f(Ξ) dN` for increasing `f`.
    Ineq7,
    /// `∫ g(M) dΛ <= ∫ g dN` for increasing `g`, `M` left-continuous.
    Ineq8,
    /// `∫ g dN <= ∫ g(M) dΛ` for increasing `g`, `M` right-continuous.
    Ineq9,
}

impl Identity {
    pub const IDENTITIES: [Identity; 6] = [
        Identity::Eq1,
        Identity::Eq2,
        Identity::Eq3,
        Identity::Eq4,
        Identity::Eq5,
        Identity::Eq6,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Identity::Eq1 => "eq1",
            Identity::Eq2 => "eq2",
            Identity::Eq3 => "eq3",
            Identity::Eq4 => "eq4",
            Identity::Eq5 => "eq5",
            Identity::Eq6 => "eq6",
            Identity::Ineq7 => "ineq7",
            Identity::Ineq8 => "ineq8",
            Identity::Ineq9 => "ineq9",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Identity> {
        [
            Identity::Eq1,
            Identity::Eq2,
            Identity::Eq3,
            Identity::Eq4,
            Identity::Eq5,
            Identity::Eq6,
            Identity::Ineq7,
            Identity::Ineq8,
            Identity::Ineq9,
        ]
        .into_iter()
        .find(|i| i.tag() == tag)
    }

    pub fn is_inequality(self) -> bool {
        matches!(self, Identity::Ineq7 | Identity::Ineq8 | Identity::Ineq9)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which inverse carries the `N₁` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseSide {
    /// `X`, the left-continuous inverse.
    #[default]
    Left,
    /// `Ξ`, the right-continuous inverse.
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelJump {
    pub y: Scalar,
    pub delta_minus: Scalar,
    pub delta_plus: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JumpSplit {
    pub levels: Vec<LevelJump>,
}

impl JumpSplit {
    /// `ν(H)`, the total mass carried by the flat levels.
    pub fn total(&self) -> Scalar {
        self.levels
            .iter()
            .map(|l| &l.delta_minus + &l.delta_plus)
            .sum()
    }
}

/// `N = n1 + n2 + n3` on `[M(lo), M(hi)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// `N` with its jumps on the flat levels removed.
    pub n1: MonotoneFn,
    /// Right-continuous step function of the left jumps.
    pub n2: MonotoneFn,
    /// Left-continuous step function of the right jumps.
    pub n3: MonotoneFn,
    pub jumps: JumpSplit,
}

/// The one-sided jumps of `N` at each flat level, with `ΔN(M(lo),-) = 0` and
/// `ΔN(M(hi),+) = 0`.
pub fn jump_split(n: &MonotoneFn, h: &FlatLevels) -> Result<JumpSplit> {
    let (range_lo, range_hi) = &h.range;
    let mut levels = Vec::with_capacity(h.len());
    for level in h.iter() {
        let y = &level.y;
        if !n.contains(y) {
            return Err(Error::parameter(format!(
                "flat level y = {} outside N's domain [{}, {}]",
                to_f64(y),
                to_f64(n.lo()),
                to_f64(n.hi())
            )));
        }
        let value = n.value(y)?;
        let delta_minus = if y == range_lo {
            scalar::zero()
        } else {
            &value - n.eval_at(y, Side::Left)?
        };
        let delta_plus = if y == range_hi {
            scalar::zero()
        } else {
            n.eval_at(y, Side::Right)? - &value
        };
        levels.push(LevelJump {
            y: y.clone(),
            delta_minus,
            delta_plus,
        });
    }
    Ok(JumpSplit { levels })
}

fn step_function(
    lo: &Scalar,
    hi: &Scalar,
    steps: &[(Scalar, Scalar, Scalar)],
) -> Result<MonotoneFn> {
    let mut bps = Vec::with_capacity(steps.len() + 2);
    let mut level = scalar::zero();
    if steps.first().is_none_or(|s| &s.0 != lo) {
        bps.push(Breakpoint::continuous(lo.clone(), level.clone()));
    }
    for (y, left_jump, right_jump) in steps {
        let value = &level + left_jump;
        let right = &value + right_jump;
        bps.push(Breakpoint::jump(y.clone(), level, value, right.clone()));
        level = right;
    }
    if steps.last().is_none_or(|s| &s.0 != hi) {
        bps.push(Breakpoint::continuous(hi.clone(), level));
    }
    MonotoneFn::new(bps)
}

/// Splits `N` (restricted to the range of `M`) into `n1 + n2 + n3` where
/// `n2 = Σ ΔN(y,-) 1[y, M(hi)]` and `n3 = Σ ΔN(y,+) 1(y, M(hi)]`.
pub fn decompose(n: &MonotoneFn, h: &FlatLevels) -> Result<Decomposition> {
    let (lo, hi) = &h.range;
    if lo == hi {
        return Err(Error::DegenerateRange { level: to_f64(lo) });
    }
    let jumps = jump_split(n, h)?;
    let restricted = n.restrict(lo, hi)?;
    let left_steps: Vec<_> = jumps
        .levels
        .iter()
        .map(|l| (l.y.clone(), l.delta_minus.clone(), scalar::zero()))
        .collect();
    let right_steps: Vec<_> = jumps
        .levels
        .iter()
        .map(|l| (l.y.clone(), scalar::zero(), l.delta_plus.clone()))
        .collect();
    let n2 = step_function(lo, hi, &left_steps)?.simplify();
    let n3 = step_function(lo, hi, &right_steps)?.simplify();
    let n1 = restricted.checked_sub(&n2)?.checked_sub(&n3)?;
    Ok(Decomposition { n1, n2, n3, jumps })
}

/// The pieces shared by every identity: `H`, `ν` on the range of `M`, and the
/// composed measure `λ`.
struct Setup {
    h: FlatLevels,
    /// `N` restricted to `[M(lo), M(hi)]`; `None` when `M` is constant.
    n_range: Option<MonotoneFn>,
    lambda: LSMeasure,
}

impl Setup {
    fn new(m: &MonotoneFn, n: &MonotoneFn) -> Result<Self> {
        let lambda = measure_from(&n.compose(m)?);
        let h = m.flat_levels();
        let (lo, hi) = &h.range;
        let n_range = if lo == hi {
            None
        } else {
            Some(n.restrict(lo, hi)?)
        };
        Ok(Setup { h, n_range, lambda })
    }

    fn nu(&self) -> Option<LSMeasure> {
        self.n_range.as_ref().map(measure_from)
    }
}

fn check_integrand_covers(f: &PiecewiseFn, m: &MonotoneFn) -> Result<()> {
    if m.lo() < f.lo() || m.hi() > f.hi() {
        return Err(Error::parameter(format!(
            "integrand domain [{}, {}] does not cover [{}, {}]",
            to_f64(f.lo()),
            to_f64(f.hi()),
            to_f64(m.lo()),
            to_f64(m.hi())
        )));
    }
    Ok(())
}

/// `∫ f(x) dN(M(x))`, i.e. `∫ f dλ` with `λ` the measure of `N ∘ M`.
pub fn cov_lhs(f: &PiecewiseFn, m: &MonotoneFn, n: &MonotoneFn) -> Result<Scalar> {
    check_integrand_covers(f, m)?;
    integrate(f, &measure_from(&n.compose(m)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovTerms {
    /// `∫ f(X(y)) dN₁(y)` (or with `Ξ`).
    pub term_n1: Scalar,
    /// `Σ_H f(X(y)) ΔN(y,-)`.
    pub term_minus: Scalar,
    /// `Σ_H f(Ξ(y)) ΔN(y,+)`.
    pub term_plus: Scalar,
}

impl CovTerms {
    pub fn total(&self) -> Scalar {
        &self.term_n1 + &self.term_minus + &self.term_plus
    }
}

/// The three terms of the jump-splitting right-hand side.
pub fn cov_rhs(
    f: &PiecewiseFn,
    m: &MonotoneFn,
    n: &MonotoneFn,
    side: InverseSide,
) -> Result<CovTerms> {
    check_integrand_covers(f, m)?;
    // range check for N happens in compose
    n.compose(m)?;
    let h = m.flat_levels();
    if h.range.0 == h.range.1 {
        return Ok(CovTerms {
            term_n1: scalar::zero(),
            term_minus: scalar::zero(),
            term_plus: scalar::zero(),
        });
    }
    let dec = decompose(n, &h)?;
    let inverse = match side {
        InverseSide::Left => m.left_inverse()?,
        InverseSide::Right => m.right_inverse()?,
    };
    let term_n1 = integrate(&f.compose_with_monotone(&inverse)?, &measure_from(&dec.n1))?;
    let mut term_minus = scalar::zero();
    let mut term_plus = scalar::zero();
    for (jump, level) in dec.jumps.levels.iter().zip(h.iter()) {
        term_minus += f.eval(&level.x_left)? * &jump.delta_minus;
        term_plus += f.eval(&level.x_right)? * &jump.delta_plus;
    }
    Ok(CovTerms {
        term_n1,
        term_minus,
        term_plus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Selector parameter for the generalized inverse in `eq1`.
    pub theta: Scalar,
    /// Inverse used for the `N₁` term in `eq5`/`eq6`.
    pub side: InverseSide,
    /// Evaluate even when the identity's hypothesis fails.
    pub force: bool,
    /// `None` picks [`DEFAULT_TOLERANCE`] or [`ATOMIC_TOLERANCE`].
    pub tolerance: Option<f64>,
    /// Points `x` at which to compare `λ([lo, x])` with `ν(X⁻¹[[lo, x]])`
    /// (or `λ([x, hi])` with `ν(Ξ⁻¹[[x, hi]])` for `eq4`).
    pub probes: Vec<Scalar>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            theta: scalar::zero(),
            side: InverseSide::Left,
            force: false,
            tolerance: None,
            probes: Vec::new(),
        }
    }
}

/// For inequalities: whether the right-hand side bounds the left from below
/// or from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `rhs <= lhs`
    Lower,
    /// `lhs <= rhs`
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub name: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassProbe {
    pub x: Scalar,
    pub lambda_mass: Scalar,
    pub preimage_mass: Scalar,
}

impl MassProbe {
    pub fn mismatch(&self) -> Scalar {
        &self.preimage_mass - &self.lambda_mass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity: Identity,
    pub lhs: Scalar,
    pub rhs_terms: Vec<Term>,
    pub rhs_total: Scalar,
    /// `lhs - rhs_total` for identities; the signed slack (non-negative when
    /// the inequality holds) for inequalities.
    pub residual: Scalar,
    pub tolerance: f64,
    pub pass: bool,
    pub bound: Option<Bound>,
    /// Whether the hypothesis of the identity holds for the inputs.
    pub precondition_met: bool,
    pub probes: Vec<MassProbe>,
}

impl VerificationReport {
    fn identity_report(identity: Identity, lhs: Scalar, terms: Vec<Term>, tolerance: f64) -> Self {
        let rhs_total: Scalar = terms.iter().map(|t| &t.value).sum();
        let residual = &lhs - &rhs_total;
        let pass = to_f64(&residual).abs() <= tolerance;
        VerificationReport {
            identity,
            lhs,
            rhs_terms: terms,
            rhs_total,
            residual,
            tolerance,
            pass,
            bound: None,
            precondition_met: true,
            probes: Vec::new(),
        }
    }

    fn inequality_report(
        identity: Identity,
        lhs: Scalar,
        term: Term,
        bound: Bound,
        tolerance: f64,
    ) -> Self {
        let rhs_total = term.value.clone();
        let residual = match bound {
            Bound::Lower => &lhs - &rhs_total,
            Bound::Upper => &rhs_total - &lhs,
        };
        let pass = to_f64(&residual) >= -tolerance;
        VerificationReport {
            identity,
            lhs,
            rhs_terms: vec![term],
            rhs_total,
            residual,
            tolerance,
            pass,
            bound: Some(bound),
            precondition_met: true,
            probes: Vec::new(),
        }
    }

    pub fn residual_f64(&self) -> f64 {
        to_f64(&self.residual)
    }
}

fn term(name: &str, value: Scalar) -> Term {
    Term {
        name: name.to_string(),
        value,
    }
}

fn is_atomic(mu: &LSMeasure) -> bool {
    mu.density().iter().all(|p| p.rate.is_zero())
}

fn precondition(identity: Identity, reason: &str, location: &Scalar) -> Error {
    Error::Precondition {
        identity,
        reason: reason.to_string(),
        location: to_f64(location),
    }
}

/// First hypothesis violation of `identity`, if any.
fn find_violation(
    identity: Identity,
    m: &MonotoneFn,
    n: &MonotoneFn,
    setup: &Setup,
) -> Result<Option<Error>> {
    if identity == Identity::Eq2 {
        return Ok(m
            .breakpoints()
            .iter()
            .find(|b| !b.is_continuous())
            .map(|b| precondition(identity, "M is not continuous at x", &b.x)));
    }
    let (need_minus_zero, need_plus_zero, reason) = match identity {
        Identity::Eq3 => (false, true, "N is not right-continuous at flat level y"),
        Identity::Eq4 => (true, false, "N is not left-continuous at flat level y"),
        Identity::Eq1 => (true, true, "N is not continuous at flat level y"),
        _ => return Ok(None),
    };
    let jumps = jump_split(n, &setup.h)?;
    Ok(jumps
        .levels
        .iter()
        .find(|l| {
            (need_minus_zero && !l.delta_minus.is_zero())
                || (need_plus_zero && !l.delta_plus.is_zero())
        })
        .map(|l| precondition(identity, reason, &l.y)))
}

fn mass_probes(
    identity: Identity,
    m: &MonotoneFn,
    setup: &Setup,
    probes: &[Scalar],
) -> Result<Vec<MassProbe>> {
    let Some(nu) = setup.nu() else {
        return Ok(Vec::new());
    };
    probes
        .iter()
        .map(|x| {
            let (lambda_mass, preimage) = if identity == Identity::Eq4 {
                (
                    setup
                        .lambda
                        .mass(&Interval::closed(x.clone(), m.hi().clone()))?,
                    upper_preimage_mass(&nu, m, x)?,
                )
            } else {
                (
                    setup
                        .lambda
                        .mass(&Interval::closed(m.lo().clone(), x.clone()))?,
                    preimage_mass(&nu, m, x)?,
                )
            };
            Ok(MassProbe {
                x: x.clone(),
                lambda_mass,
                preimage_mass: preimage,
            })
        })
        .collect()
}

/// Evaluates both sides of `identity` and reports the residual.
///
/// `integrand` is `f` on the domain of `M` for `eq1`, `eq3`, `eq4`, `eq5`
/// and `g` on the range of `M` for `eq2`, `eq6`. A failed hypothesis is an
/// [`Error::Precondition`] unless `options.force` is set, in which case the
/// report is produced with `precondition_met = false`.
pub fn verify_identity(
    identity: Identity,
    integrand: &PiecewiseFn,
    m: &MonotoneFn,
    n: &MonotoneFn,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    if identity.is_inequality() {
        return Err(Error::parameter(format!(
            "{identity} is an inequality; use check_inequalities"
        )));
    }
    let setup = Setup::new(m, n)?;
    let violation = find_violation(identity, m, n, &setup)?;
    if let Some(err) = &violation {
        if !options.force {
            return Err(err.clone());
        }
    }

    let f = match identity {
        Identity::Eq2 | Identity::Eq6 => integrand.compose_with_monotone(m)?,
        _ => {
            check_integrand_covers(integrand, m)?;
            integrand.clone()
        }
    };
    let lhs = integrate(&f, &setup.lambda)?;
    let nu = setup.nu();

    let terms = match (identity, &nu) {
        (Identity::Eq5 | Identity::Eq6, _) => {
            let t = cov_rhs(&f, m, n, options.side)?;
            let inv = match options.side {
                InverseSide::Left => "X",
                InverseSide::Right => "Xi",
            };
            vec![
                term(&format!("integral_f_{inv}_dN1"), t.term_n1),
                term("sum_f_X_delta_minus", t.term_minus),
                term("sum_f_Xi_delta_plus", t.term_plus),
            ]
        }
        (_, None) => vec![term("integral_dN", scalar::zero())],
        (Identity::Eq2, Some(nu)) => vec![term("integral_g_dN", integrate(integrand, nu)?)],
        (Identity::Eq3, Some(nu)) => vec![term(
            "integral_f_X_dN",
            integrate(&f.compose_with_monotone(&m.left_inverse()?)?, nu)?,
        )],
        (Identity::Eq4, Some(nu)) => vec![term(
            "integral_f_Xi_dN",
            integrate(&f.compose_with_monotone(&m.right_inverse()?)?, nu)?,
        )],
        (Identity::Eq1, Some(nu)) => vec![term(
            "integral_f_W_dN",
            integrate(
                &f.compose_with_monotone(&m.selector_inverse(&options.theta)?)?,
                nu,
            )?,
        )],
        _ => unreachable!("inequalities rejected above"),
    };

    let atomic = is_atomic(&setup.lambda) && nu.as_ref().is_none_or(is_atomic);
    let tolerance = options.tolerance.unwrap_or(if atomic {
        ATOMIC_TOLERANCE
    } else {
        DEFAULT_TOLERANCE
    });
    let mut report = VerificationReport::identity_report(identity, lhs, terms, tolerance);
    report.precondition_met = violation.is_none();
    report.probes = mass_probes(identity, m, &setup, &options.probes)?;
    Ok(report)
}

/// `∫ f(X) dN <= ∫ f dΛ <= ∫ f(Ξ) dN` for increasing `f` on the domain of
/// `M`, reversed for decreasing `f`. Returns the lower and the upper report.
pub fn check_sandwich(
    f: &PiecewiseFn,
    direction: Monotonicity,
    m: &MonotoneFn,
    n: &MonotoneFn,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    f.check_monotone(direction)?;
    let lhs = cov_lhs(f, m, n)?;
    let h = m.flat_levels();
    let (with_x, with_xi) = if h.range.0 == h.range.1 {
        (scalar::zero(), scalar::zero())
    } else {
        let nu = measure_from(&n.restrict(&h.range.0, &h.range.1)?);
        (
            integrate(&f.compose_with_monotone(&m.left_inverse()?)?, &nu)?,
            integrate(&f.compose_with_monotone(&m.right_inverse()?)?, &nu)?,
        )
    };
    let (x_bound, xi_bound) = match direction {
        Monotonicity::Increasing => (Bound::Lower, Bound::Upper),
        Monotonicity::Decreasing => (Bound::Upper, Bound::Lower),
    };
    Ok(vec![
        VerificationReport::inequality_report(
            Identity::Ineq7,
            lhs.clone(),
            term("integral_f_X_dN", with_x),
            x_bound,
            tolerance,
        ),
        VerificationReport::inequality_report(
            Identity::Ineq7,
            lhs,
            term("integral_f_Xi_dN", with_xi),
            xi_bound,
            tolerance,
        ),
    ])
}

/// Inequalities for a monotone `g` on the range of `M`: the sandwich for
/// `f = g ∘ M`, then `∫ g(M) dΛ` against `∫ g dN` whenever `M` is left-
/// (upper bound) or right-continuous (lower bound). Directions flip for
/// decreasing `g`.
pub fn check_inequalities(
    g: &PiecewiseFn,
    direction: Monotonicity,
    m: &MonotoneFn,
    n: &MonotoneFn,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    g.check_monotone(direction)?;
    let f = g.compose_with_monotone(m)?;
    let mut reports = check_sandwich(&f, direction, m, n, tolerance)?;
    let lhs = reports[0].lhs.clone();
    let (lo, hi) = (m.start_value(), m.end_value());
    let with_g = if lo == hi {
        scalar::zero()
    } else {
        integrate(g, &measure_from(&n.restrict(lo, hi)?))?
    };
    let flip = |b: Bound| match direction {
        Monotonicity::Increasing => b,
        Monotonicity::Decreasing => match b {
            Bound::Lower => Bound::Upper,
            Bound::Upper => Bound::Lower,
        },
    };
    if m.is_left_continuous() {
        reports.push(VerificationReport::inequality_report(
            Identity::Ineq8,
            lhs.clone(),
            term("integral_g_dN", with_g.clone()),
            flip(Bound::Upper),
            tolerance,
        ));
    }
    if m.is_right_continuous() {
        reports.push(VerificationReport::inequality_report(
            Identity::Ineq9,
            lhs,
            term("integral_g_dN", with_g),
            flip(Bound::Lower),
            tolerance,
        ));
    }
    Ok(reports)
}

/// Largest absolute residual among identity reports, as a float.
pub fn max_abs_residual(reports: &[VerificationReport]) -> f64 {
    reports
        .iter()
        .map(|r| to_f64(&r.residual.abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::integrand::Poly;
    use crate::scalar::sc;

    fn x_on(lo: f64, hi: f64) -> PiecewiseFn {
        PiecewiseFn::identity(sc(lo), sc(hi)).unwrap()
    }

    #[test]
    fn jump_split_fixtures() {
        let h = fixtures::fix1_m().flat_levels();
        let s = jump_split(&fixtures::fix1_n(), &h).unwrap();
        assert_eq!(
            s.levels,
            vec![LevelJump {
                y: sc(1.0),
                delta_minus: sc(0.5),
                delta_plus: sc(0.5)
            }]
        );
        let s = jump_split(&fixtures::fix1r_n(), &h).unwrap();
        assert_eq!(
            (&s.levels[0].delta_minus, &s.levels[0].delta_plus),
            (&sc(1.0), &sc(0.0))
        );
        let id = MonotoneFn::identity(sc(0.0), sc(2.0)).unwrap();
        assert!(jump_split(&id, &h)
            .unwrap()
            .levels
            .iter()
            .all(|l| l.delta_minus.is_zero() && l.delta_plus.is_zero()));
    }

    #[test]
    fn jump_split_endpoint_conventions() {
        // flats at both ends of the range; N jumps across both
        let m = MonotoneFn::from_knots(&[
            (sc(0.0), sc(0.0)),
            (sc(1.0), sc(0.0)),
            (sc(2.0), sc(1.0)),
            (sc(3.0), sc(1.0)),
        ])
        .unwrap();
        let n = MonotoneFn::new(vec![
            Breakpoint::continuous(sc(-1.0), sc(0.0)),
            Breakpoint::jump(sc(0.0), sc(0.0), sc(1.0), sc(2.0)),
            Breakpoint::jump(sc(1.0), sc(3.0), sc(4.0), sc(5.0)),
            Breakpoint::continuous(sc(2.0), sc(5.0)),
        ])
        .unwrap();
        let s = jump_split(&n, &m.flat_levels()).unwrap();
        assert_eq!(s.levels[0].delta_minus, sc(0.0));
        assert_eq!(s.levels[0].delta_plus, sc(1.0));
        assert_eq!(s.levels[1].delta_minus, sc(1.0));
        assert_eq!(s.levels[1].delta_plus, sc(0.0));
    }

    #[test]
    fn level_outside_domain() {
        let h = fixtures::fix1_m().flat_levels();
        let n = MonotoneFn::identity(sc(0.0), sc(0.5)).unwrap();
        assert!(matches!(jump_split(&n, &h), Err(Error::Parameter(_))));
    }

    #[test]
    fn fix1_decomposition() {
        let dec = decompose(&fixtures::fix1_n(), &fixtures::fix1_m().flat_levels()).unwrap();
        assert_eq!(dec.n1, MonotoneFn::identity(sc(0.0), sc(2.0)).unwrap());
        for (y, n2, n3) in [
            (0.5, 0.0, 0.0),
            (1.0, 0.5, 0.0),
            (1.5, 0.5, 0.5),
            (2.0, 0.5, 0.5),
        ] {
            assert_eq!(dec.n2.eval_f64(y, Side::Value).unwrap(), n2);
            assert_eq!(dec.n3.eval_f64(y, Side::Value).unwrap(), n3);
        }
        assert!(dec.n2.is_right_continuous());
        assert!(dec.n3.is_left_continuous());
    }

    #[test]
    fn decomposition_without_flats_keeps_n() {
        let m = fixtures::fix2_m();
        let n = MonotoneFn::new(vec![
            Breakpoint::continuous(sc(0.0), sc(0.0)),
            Breakpoint::jump(sc(1.0), sc(1.0), sc(2.0), sc(3.0)),
            Breakpoint::continuous(sc(2.5), sc(4.0)),
        ])
        .unwrap();
        let dec = decompose(&n, &m.flat_levels()).unwrap();
        assert_eq!(dec.n1, n);
        assert!(measure_from(&dec.n2).total_mass().is_zero());
        assert!(measure_from(&dec.n3).total_mass().is_zero());
    }

    #[test]
    fn fix1_both_sides() {
        let (f, m, n) = (x_on(0.0, 3.0), fixtures::fix1_m(), fixtures::fix1_n());
        assert_eq!(cov_lhs(&f, &m, &n).unwrap(), sc(4.5));
        for side in [InverseSide::Left, InverseSide::Right] {
            let t = cov_rhs(&f, &m, &n, side).unwrap();
            assert_eq!(
                (t.term_n1.clone(), t.term_minus.clone(), t.term_plus.clone()),
                (sc(3.0), sc(0.5), sc(1.0))
            );
        }
        let t = cov_rhs(&f, &m, &fixtures::fix1r_n(), InverseSide::Left).unwrap();
        assert_eq!((t.term_minus, t.term_plus), (sc(1.0), sc(0.0)));
    }

    #[test]
    fn fix2_lhs_with_identity_n() {
        let id = MonotoneFn::identity(sc(0.0), sc(2.5)).unwrap();
        assert_eq!(
            cov_lhs(&x_on(0.0, 2.0), &fixtures::fix2_m(), &id).unwrap(),
            sc(2.5)
        );
    }

    #[test]
    fn eq5_report() {
        let r = verify_identity(
            Identity::Eq5,
            &x_on(0.0, 3.0),
            &fixtures::fix1_m(),
            &fixtures::fix1_n(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, sc(4.5));
        assert!(r.residual.is_zero());
        let values: Vec<_> = r.rhs_terms.iter().map(|t| to_f64(&t.value)).collect();
        assert_eq!(values, vec![3.0, 0.5, 1.0]);
    }

    #[test]
    fn eq1_on_strictly_increasing_m() {
        let opts = VerifyOptions {
            theta: sc(0.37),
            ..Default::default()
        };
        let r = verify_identity(
            Identity::Eq1,
            &x_on(0.0, 2.0),
            &fixtures::fix2_m(),
            &MonotoneFn::identity(sc(0.0), sc(2.5)).unwrap(),
            &opts,
        )
        .unwrap();
        assert_eq!((to_f64(&r.lhs), to_f64(&r.rhs_total)), (2.5, 2.5));
    }

    #[test]
    fn eq2_with_identity_m() {
        let square = PiecewiseFn::polynomial(
            sc(0.0),
            sc(2.0),
            Poly::from_slice(&[sc(0.0), sc(0.0), sc(1.0)]).unwrap(),
        )
        .unwrap();
        let r = verify_identity(
            Identity::Eq2,
            &square,
            &MonotoneFn::identity(sc(0.0), sc(2.0)).unwrap(),
            &fixtures::fix1_n(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.residual.is_zero());
    }

    #[test]
    fn eq3_precondition_and_forced_witness() {
        let (f, m, n) = (x_on(0.0, 3.0), fixtures::fix1_m(), fixtures::fix1_n());
        let err =
            verify_identity(Identity::Eq3, &f, &m, &n, &VerifyOptions::default()).unwrap_err();
        match err {
            Error::Precondition {
                identity, location, ..
            } => assert_eq!((identity, location), (Identity::Eq3, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
        let forced = VerifyOptions {
            force: true,
            probes: vec![sc(1.5)],
            ..Default::default()
        };
        let r = verify_identity(Identity::Eq3, &f, &m, &n, &forced).unwrap();
        assert!(!r.precondition_met);
        assert_eq!(r.probes[0].mismatch(), sc(0.5));
        assert_eq!(r.residual, sc(0.5));

        let ok = verify_identity(Identity::Eq3, &f, &m, &fixtures::fix1r_n(), &forced).unwrap();
        assert!(ok.pass && ok.precondition_met);
        assert!(ok.probes[0].mismatch().is_zero());
    }

    #[test]
    fn eq4_on_left_continuous_n() {
        let (f, m) = (x_on(0.0, 3.0), fixtures::fix1_m());
        let r = verify_identity(
            Identity::Eq4,
            &f,
            &m,
            &fixtures::fix1l_n(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass);
        assert!(matches!(
            verify_identity(
                Identity::Eq4,
                &f,
                &m,
                &fixtures::fix1r_n(),
                &VerifyOptions::default()
            ),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn eq2_requires_continuous_m() {
        let g = x_on(0.0, 2.5);
        let err = verify_identity(
            Identity::Eq2,
            &g,
            &fixtures::fix2_m(),
            &MonotoneFn::identity(sc(0.0), sc(2.5)).unwrap(),
            &VerifyOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition { location, .. } if location == 1.0));
    }

    #[test]
    fn eq6_matches_eq5_of_composite() {
        let g = PiecewiseFn::polynomial(
            sc(0.0),
            sc(2.0),
            Poly::from_slice(&[sc(1.0), sc(-1.0), sc(0.5)]).unwrap(),
        )
        .unwrap();
        let (m, n) = (fixtures::fix1_m(), fixtures::fix1_n());
        let r6 = verify_identity(Identity::Eq6, &g, &m, &n, &VerifyOptions::default()).unwrap();
        let f = g.compose_with_monotone(&m).unwrap();
        let r5 = verify_identity(Identity::Eq5, &f, &m, &n, &VerifyOptions::default()).unwrap();
        assert!(r6.pass);
        assert_eq!(r6.lhs, r5.lhs);
        assert_eq!(r6.rhs_total, r5.rhs_total);
    }

    #[test]
    fn constant_m_is_trivial() {
        let m = MonotoneFn::constant(sc(0.0), sc(1.0), sc(1.0)).unwrap();
        let r = verify_identity(
            Identity::Eq5,
            &x_on(0.0, 1.0),
            &m,
            &fixtures::fix1_n(),
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.pass && r.lhs.is_zero());
    }

    #[test]
    fn fix1_sandwich() {
        let reports = check_sandwich(
            &x_on(0.0, 3.0),
            Monotonicity::Increasing,
            &fixtures::fix1_m(),
            &fixtures::fix1_n(),
            ATOMIC_TOLERANCE,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].rhs_total, sc(4.0));
        assert_eq!(reports[1].rhs_total, sc(5.0));
        assert!(reports.iter().all(|r| r.pass && r.lhs == sc(4.5)));
    }

    #[test]
    fn left_continuous_m_eq8() {
        let m = MonotoneFn::new(vec![
            Breakpoint::continuous(sc(0.0), sc(0.0)),
            Breakpoint::jump(sc(1.0), sc(1.0), sc(1.0), sc(2.0)),
            Breakpoint::continuous(sc(2.0), sc(3.0)),
        ])
        .unwrap();
        let n = MonotoneFn::identity(sc(0.0), sc(3.0)).unwrap();
        let reports =
            check_inequalities(&x_on(0.0, 3.0), Monotonicity::Increasing, &m, &n, 1e-12).unwrap();
        let eq8: Vec<_> = reports
            .iter()
            .filter(|r| r.identity == Identity::Ineq8)
            .collect();
        assert_eq!(eq8.len(), 1);
        assert_eq!(
            (eq8[0].lhs.clone(), eq8[0].rhs_total.clone()),
            (sc(4.0), sc(4.5))
        );
        assert_eq!(eq8[0].residual, sc(0.5));
        assert!(reports.iter().all(|r| r.identity != Identity::Ineq9));
        assert!(reports.iter().all(|r| r.pass));

        let down = x_on(0.0, 3.0).scale(&sc(-1.0));
        let reports = check_inequalities(&down, Monotonicity::Decreasing, &m, &n, 1e-12).unwrap();
        let eq8 = reports
            .iter()
            .find(|r| r.identity == Identity::Ineq8)
            .unwrap();
        assert_eq!(eq8.bound, Some(Bound::Lower));
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn constant_g_is_tight() {
        let g = PiecewiseFn::constant(sc(0.0), sc(2.0), sc(3.0)).unwrap();
        let m = MonotoneFn::identity(sc(0.0), sc(2.0)).unwrap();
        let reports =
            check_inequalities(&g, Monotonicity::Increasing, &m, &fixtures::fix1_n(), 1e-12)
                .unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.residual.is_zero()));
    }

    #[test]
    fn non_monotone_g_rejected() {
        let g = PiecewiseFn::polynomial(
            sc(0.0),
            sc(2.0),
            Poly::from_slice(&[sc(0.0), sc(-2.0), sc(1.0)]).unwrap(),
        )
        .unwrap();
        let m = MonotoneFn::identity(sc(0.0), sc(2.0)).unwrap();
        assert!(matches!(
            check_inequalities(&g, Monotonicity::Increasing, &m, &fixtures::fix1_n(), 1e-12),
            Err(Error::NotMonotone { .. })
        ));
    }

    #[test]
    fn identity_tags_round_trip() {
        for id in Identity::IDENTITIES {
            assert_eq!(Identity::from_tag(id.tag()), Some(id));
        }
        assert_eq!(Identity::from_tag("eq7"), None);
    }
}
