//! Canonical instances with their constraint sets and expected tables.

pub mod catalog;
pub mod constraints;
pub mod tables;

use crate::error::{Error, Result};
use crate::model::DrMdp;
use crate::solvers::SolveOptions;

pub use constraints::{constraint_check, constraints_for, Constraint, ConstraintResult};

#[derive(Clone, Debug)]
pub struct CanonicalExample {
    pub name: String,
    pub instance: DrMdp,
    pub reconstructed: bool,
    pub constraints: Vec<Constraint>,
}

impl CanonicalExample {
    /// The instance and its constraints, unchecked.
    pub fn load(name: &str) -> Result<CanonicalExample> {
        Ok(CanonicalExample {
            name: name.to_string(),
            instance: catalog::build(name)?,
            reconstructed: catalog::is_reconstructed(name),
            constraints: constraints_for(name),
        })
    }

    pub fn check(&self, opts: &SolveOptions) -> Vec<ConstraintResult> {
        constraint_check(&self.instance, &self.constraints, opts)
    }

    /// Loads and fails on the first violated constraint.
    pub fn build(name: &str) -> Result<CanonicalExample> {
        let ex = Self::load(name)?;
        if let Some(bad) = ex
            .check(&SolveOptions::default())
            .into_iter()
            .find(|r| !r.passed)
        {
            return Err(Error::Constraint {
                label: bad.label,
                detail: bad.detail,
            });
        }
        Ok(ex)
    }
}
