//! Small hand-checkable instances.
//!
//! * `fix1`: `M = x` on `[0,1]`, `1` on `[1,2]`, `x - 1` on `[2,3]`;
//!   `N = y` below 1, `y + 1` above, with `N(1) = 1.5` (`fix1r`: `N(1) = 2`,
//!   `fix1l`: `N(1) = 1`).
//! * `fix2`: `M = x` on `[0,1)`, jump `(1, 1.25, 1.5)` at 1, `x + 0.5` on
//!   `(1,2]`; `N = y` on `[0, 2.5]`.

use crate::monotone::{Breakpoint, MonotoneFn};
use crate::scalar::sc;

pub fn fix1_m() -> MonotoneFn {
    MonotoneFn::from_knots(&[
        (sc(0.0), sc(0.0)),
        (sc(1.0), sc(1.0)),
        (sc(2.0), sc(1.0)),
        (sc(3.0), sc(2.0)),
    ])
    .expect("valid fixture")
}

fn fix1_n_with(value_at_one: f64) -> MonotoneFn {
    MonotoneFn::new(vec![
        Breakpoint::continuous(sc(0.0), sc(0.0)),
        Breakpoint::jump(sc(1.0), sc(1.0), sc(value_at_one), sc(2.0)),
        Breakpoint::continuous(sc(2.0), sc(3.0)),
    ])
    .expect("valid fixture")
}

pub fn fix1_n() -> MonotoneFn {
    fix1_n_with(1.5)
}

pub fn fix1r_n() -> MonotoneFn {
    fix1_n_with(2.0)
}

pub fn fix1l_n() -> MonotoneFn {
    fix1_n_with(1.0)
}

pub fn fix2_m() -> MonotoneFn {
    MonotoneFn::new(vec![
        Breakpoint::continuous(sc(0.0), sc(0.0)),
        Breakpoint::jump(sc(1.0), sc(1.0), sc(1.25), sc(1.5)),
        Breakpoint::continuous(sc(2.0), sc(2.5)),
    ])
    .expect("valid fixture")
}

pub fn fix2_n() -> MonotoneFn {
    MonotoneFn::identity(sc(0.0), sc(2.5)).expect("valid fixture")
}
