//! JSON report for `identify --format ast`.

use causal_id::expr::{to_latex, to_text};
use causal_id::identify::{IdentifyError, Query, TraceStep, Traced};
use causal_id::{Expression, HedgeWitness};
use serde::Serialize;

/// Schema version of [`IdentifyReport`].
pub const REPORT_VERSION: u32 = 1;

/// Outcome of one identification. Exactly one of `expression` and `hedge`
/// is present.
#[derive(Debug, Serialize)]
pub struct IdentifyReport<'a> {
    pub version: u32,
    pub query: &'a Query,
    pub identifiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<&'a Expression>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hedge: Option<&'a HedgeWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hedge_description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recursion_log: Option<&'a [TraceStep]>,
}

impl<'a> IdentifyReport<'a> {
    /// Builds the report for a finished run. Only identification outcomes
    /// are representable; other errors must be handled by the caller.
    pub fn new(query: &'a Query, traced: &'a Traced, with_log: bool) -> Self {
        let (expression, hedge) = match &traced.result {
            Ok(e) => (Some(e), None),
            Err(IdentifyError::NotIdentifiable(w)) => (None, Some(&**w)),
            Err(_) => (None, None),
        };
        Self {
            version: REPORT_VERSION,
            query,
            identifiable: expression.is_some(),
            expression,
            latex: expression.map(to_latex),
            text: expression.map(to_text),
            hedge,
            hedge_description: hedge.map(|w| w.to_string()),
            recursion_log: with_log.then_some(traced.trace.as_slice()),
        }
    }
}
