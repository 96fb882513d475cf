//! Check rows shared by all verification reports.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|lhs − rhs| ≤ tol · |rhs|`.
    RelativeEq,
    /// `|lhs − rhs| ≤ tol`.
    AbsoluteEq,
    /// `lhs ≥ rhs − tol`.
    AtLeast,
    /// `lhs ≤ rhs + tol`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(default)]
    pub paper_anchor: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn build(name: impl Into<String>, relation: Relation, lhs: f64, rhs: f64, tol: f64) -> Self {
        let abs_gap = (lhs - rhs).abs();
        let rel_gap = abs_gap / rhs.abs().max(1e-300);
        let pass = match relation {
            Relation::RelativeEq => rel_gap <= tol || abs_gap == 0.0,
            Relation::AbsoluteEq => abs_gap <= tol,
            Relation::AtLeast => lhs >= rhs - tol,
            Relation::AtMost => lhs <= rhs + tol,
        };
        Self {
            name: name.into(),
            paper_anchor: String::new(),
            relation,
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tolerance: tol,
            pass: pass && lhs.is_finite(),
        }
    }

    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::build(name, Relation::RelativeEq, lhs, rhs, tol)
    }

    pub fn absolute(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::build(name, Relation::AbsoluteEq, lhs, rhs, tol)
    }

    pub fn at_least(name: impl Into<String>, lhs: f64, bound: f64, tol: f64) -> Self {
        Self::build(name, Relation::AtLeast, lhs, bound, tol)
    }

    pub fn at_most(name: impl Into<String>, lhs: f64, bound: f64, tol: f64) -> Self {
        Self::build(name, Relation::AtMost, lhs, bound, tol)
    }

    pub fn anchored(mut self, anchor: impl Into<String>) -> Self {
        self.paper_anchor = anchor.into();
        self
    }
}
