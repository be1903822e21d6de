//! Verifying many instances at once.

use crate::error::Result;
use crate::exec::{map_ordered, Execution};
use crate::integrand::PiecewiseFn;
use crate::monotone::MonotoneFn;
use crate::substitution::{verify_identity, Identity, VerificationReport, VerifyOptions};

#[derive(Debug, Clone)]
pub struct Instance {
    pub identity: Identity,
    pub integrand: PiecewiseFn,
    pub m: MonotoneFn,
    pub n: MonotoneFn,
    pub options: VerifyOptions,
}

impl Instance {
    pub fn verify(&self) -> Result<VerificationReport> {
        verify_identity(
            self.identity,
            &self.integrand,
            &self.m,
            &self.n,
            &self.options,
        )
    }
}

/// One result per instance, in input order.
pub fn verify_batch(instances: &[Instance], exec: Execution) -> Vec<Result<VerificationReport>> {
    map_ordered(instances, exec, Instance::verify)
}
