//! Named classification strategies selected at run time.

use std::collections::BTreeMap;
use std::sync::Arc;

use lpv_symbolic::Indeterminate;

use super::{classify, jacobian_local_test, ClassifyOptions, Verdict};
use crate::error::{CoreError, Result};
use crate::iop::{ExhaustiveSummary, IopSet};
use crate::model::Domain;

/// Everything an engine may consult. The summary is absent when no
/// parameter-dependent coefficient was found.
pub struct EngineInput<'a> {
    pub iop: &'a IopSet,
    pub summary: Option<&'a ExhaustiveSummary>,
    pub domain: Domain,
    pub q: usize,
    pub options: &'a ClassifyOptions,
    /// Seed for engines that sample points; numeric Gröbner trials take
    /// theirs from `options.mode`.
    pub seed: u64,
    pub namer: &'a (dyn Fn(&Indeterminate) -> String + Sync),
}

pub trait IdentifiabilityEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Whether a Global verdict from this engine is a certificate.
    fn certifies_global(&self) -> bool;
    fn classify(&self, input: &EngineInput<'_>) -> Result<Verdict>;
}

pub struct GroebnerEngine;

impl IdentifiabilityEngine for GroebnerEngine {
    fn name(&self) -> &'static str {
        "groebner"
    }
    fn description(&self) -> &'static str {
        "per-parameter lex elimination of the evaluated exhaustive summary"
    }
    fn certifies_global(&self) -> bool {
        true
    }
    fn classify(&self, input: &EngineInput<'_>) -> Result<Verdict> {
        let summary = input.summary.ok_or(CoreError::NoParameterDependence)?;
        classify(summary, input.q, input.options, input.namer)
    }
}

pub struct JacobianEngine;

impl IdentifiabilityEngine for JacobianEngine {
    fn name(&self) -> &'static str {
        "jacobian"
    }
    fn description(&self) -> &'static str {
        "rank of the I-O-P Jacobian at random rational points (local only)"
    }
    fn certifies_global(&self) -> bool {
        false
    }
    fn classify(&self, input: &EngineInput<'_>) -> Result<Verdict> {
        jacobian_local_test(input.iop, input.domain, input.q, input.options.trials, input.seed, input.namer)
    }
}

#[derive(Clone, Default)]
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Arc<dyn IdentifiabilityEngine>>,
}

impl EngineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(GroebnerEngine));
        r.register(Arc::new(JacobianEngine));
        r
    }

    /// Replaces and returns any engine already registered under the name.
    pub fn register(&mut self, engine: Arc<dyn IdentifiabilityEngine>) -> Option<Arc<dyn IdentifiabilityEngine>> {
        self.engines.insert(engine.name(), engine)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn IdentifiabilityEngine>> {
        self.engines
            .get(name)
            .cloned()
            .ok_or_else(|| CoreError::UnknownEngine(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}
