//! Order sweep driving stacking, elimination and classification, and the
//! reports built from it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use lpv_symbolic::Indeterminate;
use serde::Serialize;

use crate::elimination::left_nullspace_ordered;
use crate::error::{CoreError, Result};
use crate::identifiability::{
    ClassifyOptions, EngineInput, EngineRegistry, GroebnerBudget, Mode, ModelStatus, ParameterVerdict, Status, Verdict,
};
use crate::iop::{extract_summary, form_iop, ExhaustiveSummary, IopSet};
use crate::model::{Domain, LpvModel};
use crate::stacking::{build_stack_capped, RowLabel, DEFAULT_MAX_COLUMNS};
use crate::verifier::{backsubstitute_check, discrete_trajectory_check, search_witness, TrajectoryData, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Numeric,
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Budgets {
    pub max_pairs: usize,
    pub max_degree: u32,
    pub max_columns: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let g = GroebnerBudget::default();
        Budgets { max_pairs: g.max_pairs, max_degree: g.max_degree, max_columns: DEFAULT_MAX_COLUMNS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Highest order tried; the state count when absent.
    pub max_order: Option<u32>,
    /// Registered engine name, or `both`.
    pub method: String,
    pub mode: ModeKind,
    pub trials: u32,
    pub seed: u64,
    pub format: OutputFormat,
    pub budgets: Budgets,
    /// Wall-clock timings are recorded only on request so reports stay
    /// byte-identical across runs.
    pub timings: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            max_order: None,
            method: "groebner".into(),
            mode: ModeKind::Numeric,
            trials: 5,
            seed: 0,
            format: OutputFormat::Text,
            budgets: Budgets::default(),
            timings: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CoreError::Precondition("trials must be at least 1".into()));
        }
        if self.max_order == Some(0) {
            return Err(CoreError::Precondition("max order must be at least 1".into()));
        }
        let b = &self.budgets;
        if b.max_pairs == 0 || b.max_degree == 0 || b.max_columns == 0 {
            return Err(CoreError::Precondition("budgets must be positive".into()));
        }
        Ok(())
    }

    pub fn max_order_for(&self, model: &LpvModel) -> u32 {
        self.max_order.unwrap_or(model.n() as u32).max(1)
    }

    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            trials: self.trials,
            mode: match self.mode {
                ModeKind::Numeric => Mode::Numeric { seed: self.seed },
                ModeKind::Symbolic => Mode::Symbolic,
            },
            budget: GroebnerBudget { max_pairs: self.budgets.max_pairs, max_degree: self.budgets.max_degree },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelEcho {
    pub domain: Domain,
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub parameters: Vec<String>,
    pub scheduling: Vec<String>,
    pub source: String,
}

impl ModelEcho {
    pub fn of(model: &LpvModel) -> Self {
        ModelEcho {
            domain: model.domain,
            states: model.states.clone(),
            inputs: model.inputs.clone(),
            outputs: model.outputs.clone(),
            parameters: model.params.clone(),
            scheduling: model.scheduling.clone(),
            source: model.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub order: u32,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub nullspace_dim: usize,
    pub equations: Vec<String>,
    pub outputs_covered: Vec<String>,
    pub summary: Vec<String>,
    pub verdict: Option<ModelStatus>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub agree: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictSection {
    pub method: String,
    /// Smallest order at which the final verdict was obtained.
    pub order: Option<u32>,
    pub model: ModelStatus,
    pub parameters: Vec<ParameterVerdict>,
    pub engines: BTreeMap<String, Verdict>,
    pub cross_check: Option<CrossCheck>,
    pub budget_exceeded: bool,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrajectoryOutcome {
    pub seed: u64,
    pub samples: usize,
    pub steps_checked: usize,
    pub passed: bool,
    pub max_residual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifierSection {
    pub backsubstitution: Option<bool>,
    pub trajectories: Vec<TrajectoryOutcome>,
    pub witnesses: Vec<Witness>,
    /// Non-identifiable parameters for which no witness was found.
    pub missing_witnesses: Vec<String>,
}

impl VerifierSection {
    pub fn passed(&self) -> bool {
        self.backsubstitution != Some(false)
            && self.trajectories.iter().all(|t| t.passed)
            && self.missing_witnesses.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub model: ModelEcho,
    pub config: AnalysisConfig,
    pub trace: Vec<TraceEntry>,
    pub verdict: VerdictSection,
    pub verifier: VerifierSection,
    /// Milliseconds per stage; empty unless requested.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let _ = writeln!(
            s,
            "model: {} time, n={} m={} p={} q={}",
            m.domain.as_str(),
            m.states.len(),
            m.inputs.len(),
            m.outputs.len(),
            m.parameters.len()
        );
        for t in &self.trace {
            let _ = writeln!(s, "w={}: O {}x{}, rank {}, null-space dim {}", t.order, t.rows, t.columns, t.rank, t.nullspace_dim);
            for e in &t.equations {
                let _ = writeln!(s, "  psi: {e}");
            }
            if !t.summary.is_empty() {
                let _ = writeln!(s, "  pi: {{{}}}", t.summary.join(", "));
            }
            if let Some(n) = &t.note {
                let _ = writeln!(s, "  note: {n}");
            }
        }
        let v = &self.verdict;
        let at = v.order.map(|w| format!(" at w={w}")).unwrap_or_default();
        let _ = writeln!(s, "verdict ({}): {}{}", v.method, v.model.as_str(), at);
        for p in &v.parameters {
            let _ = writeln!(s, "  {}: {}", p.name, p.status.label());
        }
        for (name, e) in &v.engines {
            if let Some(j) = &e.evidence.jacobian {
                let _ = writeln!(s, "  {name}: rank {} of {} over {} points", j.max_rank, j.q, j.ranks.len());
            }
            for n in &e.evidence.notes {
                let _ = writeln!(s, "  {name}: {n}");
            }
        }
        if let Some(c) = &v.cross_check {
            let _ = writeln!(s, "  cross-check: {}", c.detail);
        }
        if let Some(msg) = &v.message {
            let _ = writeln!(s, "  {msg}");
        }
        let vr = &self.verifier;
        if let Some(b) = vr.backsubstitution {
            let _ = writeln!(s, "back-substitution: {}", if b { "pass" } else { "FAIL" });
        }
        for t in &vr.trajectories {
            let _ = writeln!(
                s,
                "trajectory seed {}: {} ({} windows, max residual {})",
                t.seed,
                if t.passed { "pass" } else { "FAIL" },
                t.steps_checked,
                t.max_residual
            );
        }
        for w in &vr.witnesses {
            let show = |v: &[lpv_symbolic::Rational]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            let _ = writeln!(s, "witness for {}: ({}) ~ ({})", w.parameter, show(&w.theta_a), show(&w.theta_b));
        }
        for p in &vr.missing_witnesses {
            let _ = writeln!(s, "witness for {p}: not found");
        }
        for (k, ms) in &self.timings {
            let _ = writeln!(s, "time {k}: {ms:.3} ms");
        }
        s
    }
}

struct Timer {
    on: bool,
    map: BTreeMap<String, f64>,
}

impl Timer {
    fn time<T>(&mut self, key: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.on {
            *self.map.entry(key.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
        out
    }
}

/// One order of the sweep: Ψ and (when every output is covered) Π.
pub struct OrderStep {
    pub entry: TraceEntry,
    pub iop: IopSet,
    pub summary: Option<ExhaustiveSummary>,
}

fn step(model: &LpvModel, w: u32, max_columns: usize, timer: &mut Timer) -> Result<OrderStep> {
    let stack = timer.time("stacking", || build_stack_capped(model, w, max_columns))?;
    let ns = timer.time("elimination", || left_nullspace_ordered(&stack.o, &stack.elimination_order()));
    let mut entry = TraceEntry {
        order: w,
        rows: stack.o.rows(),
        columns: stack.o.cols(),
        rank: ns.rank_of_o,
        nullspace_dim: ns.dim(),
        equations: Vec::new(),
        outputs_covered: Vec::new(),
        summary: Vec::new(),
        verdict: None,
        note: None,
    };
    if ns.is_empty() {
        entry.note = Some("null-space empty".into());
        return Ok(OrderStep { entry, iop: IopSet { equations: Vec::new(), order: w }, summary: None });
    }
    let iop = timer.time("iop", || form_iop(&stack, &ns))?;
    entry.equations = iop.polynomials().iter().map(|p| model.render_poly(p)).collect();
    entry.outputs_covered = iop.covered_outputs().iter().map(|&i| model.outputs[i].clone()).collect();
    let mut summary = None;
    if iop.covered_outputs().len() == model.p() {
        match extract_summary(&iop) {
            Ok(s) => {
                entry.summary = s.values().iter().map(|e| model.render(e)).collect();
                summary = Some(s);
            }
            Err(CoreError::NoParameterDependence) => entry.note = Some("no coefficient depends on the parameters".into()),
            Err(e) => return Err(e),
        }
    } else if !iop.is_empty() {
        entry.note = Some("not every output has an equation yet".into());
    }
    Ok(OrderStep { entry, iop, summary })
}

fn resolve_engines(method: &str, registry: &EngineRegistry) -> Result<Vec<String>> {
    if method == "both" {
        for n in ["groebner", "jacobian"] {
            registry.get(n)?;
        }
        return Ok(vec!["groebner".into(), "jacobian".into()]);
    }
    registry.get(method)?;
    Ok(vec![method.to_string()])
}

fn all_non_identifiable(model: &LpvModel, method: &str) -> Verdict {
    let parameters = model
        .params
        .iter()
        .map(|p| ParameterVerdict { name: p.clone(), status: Status::NonIdentifiable })
        .collect();
    Verdict {
        method: method.into(),
        model: ModelStatus::NonIdentifiable,
        parameters,
        evidence: crate::identifiability::Evidence {
            notes: vec!["no input-output coefficient depends on the parameters".into()],
            ..Default::default()
        },
        budget_exceeded: false,
    }
}

fn cross_check(groebner: &Verdict, jacobian: &Verdict, q: usize) -> CrossCheck {
    let rank = jacobian.evidence.jacobian.as_ref().map_or(0, |j| j.max_rank);
    match groebner.model {
        ModelStatus::Global | ModelStatus::Local => CrossCheck {
            agree: rank == q,
            detail: if rank == q {
                format!("jacobian rank {rank} = q confirms local identifiability")
            } else {
                format!("disagreement: groebner reports {} but jacobian rank {rank} < {q}", groebner.model.as_str())
            },
        },
        ModelStatus::NonIdentifiable => CrossCheck {
            agree: rank < q,
            detail: if rank < q {
                format!("jacobian rank {rank} < {q} is consistent")
            } else {
                format!("disagreement: groebner reports non-identifiable but jacobian rank {rank} = q")
            },
        },
        ModelStatus::Undetermined => CrossCheck { agree: true, detail: "groebner undetermined; nothing to compare".into() },
    }
}

/// Sweeps `w = 0..=max order`, classifying once every output has an
/// equation and stopping early on a Global or Local verdict.
pub fn analyze(model: &LpvModel, config: &AnalysisConfig, registry: &EngineRegistry) -> Result<Report> {
    config.validate()?;
    let engines = resolve_engines(&config.method, registry)?;
    let namer = |v: &Indeterminate| model.name_of(v);
    let opts = config.classify_options();
    let mut timer = Timer { on: config.timings, map: BTreeMap::new() };
    let max_order = config.max_order_for(model);
    let mut trace = Vec::new();
    let mut last: Option<(u32, BTreeMap<String, Verdict>, IopSet)> = None;
    let mut first_at_status: Option<(u32, Vec<Status>)> = None;
    let mut message = None;
    let mut budget_exceeded = false;
    for w in 0..=max_order {
        let mut st = match step(model, w, config.budgets.max_columns, &mut timer) {
            Ok(s) => s,
            Err(e @ CoreError::OrderTooLargeForBudget { .. }) => {
                message = Some(e.to_string());
                budget_exceeded = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let covered = st.iop.covered_outputs().len() == model.p() && !st.iop.is_empty();
        if !covered {
            trace.push(st.entry);
            continue;
        }
        let mut verdicts = BTreeMap::new();
        for name in &engines {
            let engine = registry.get(name)?;
            let v = match (&st.summary, name.as_str()) {
                (None, "groebner") => all_non_identifiable(model, name),
                _ => {
                    let input = EngineInput {
                        iop: &st.iop,
                        summary: st.summary.as_ref(),
                        domain: model.domain,
                        q: model.q(),
                        options: &opts,
                        seed: config.seed,
                        namer: &namer,
                    };
                    timer.time(name, || engine.classify(&input))?
                }
            };
            verdicts.insert(name.clone(), v);
        }
        let primary = &verdicts[&engines[0]];
        let status = primary.model;
        st.entry.verdict = Some(status);
        let statuses = primary.statuses();
        if first_at_status.as_ref().map(|(_, s)| s) != Some(&statuses) {
            first_at_status = Some((w, statuses));
        }
        trace.push(st.entry);
        last = Some((w, verdicts, st.iop));
        if matches!(status, ModelStatus::Global | ModelStatus::Local) {
            break;
        }
    }
    let verdict = match &last {
        None => {
            let parameters = model
                .params
                .iter()
                .map(|p| ParameterVerdict { name: p.clone(), status: Status::Undetermined })
                .collect();
            VerdictSection {
                method: config.method.clone(),
                order: None,
                model: ModelStatus::Undetermined,
                parameters,
                engines: BTreeMap::new(),
                cross_check: None,
                budget_exceeded,
                message: Some(message.unwrap_or_else(|| {
                    format!("no input-output equation for every output up to w={max_order}; raise --max-order")
                })),
            }
        }
        Some((_, verdicts, _)) => {
            let primary = &verdicts[&engines[0]];
            let cc = (engines.len() == 2).then(|| cross_check(&verdicts["groebner"], &verdicts["jacobian"], model.q()));
            VerdictSection {
                method: config.method.clone(),
                order: first_at_status.as_ref().map(|(w, _)| *w),
                model: primary.model,
                parameters: primary.parameters.clone(),
                engines: verdicts.clone(),
                cross_check: cc,
                budget_exceeded: budget_exceeded || verdicts.values().any(|v| v.budget_exceeded),
                message,
            }
        }
    };
    let mut verifier = VerifierSection::default();
    if let Some((_, verdicts, iop)) = &last {
        verifier.backsubstitution = Some(timer.time("verifier", || backsubstitute_check(model, iop))?.passed);
        if let Some(g) = verdicts.get("groebner") {
            if let Some(summary) = trace_summary(iop)? {
                for (i, p) in g.parameters.iter().enumerate() {
                    if p.status == Status::NonIdentifiable {
                        match search_witness(&summary, model.q(), i, config.seed, &namer)? {
                            Some(w) => verifier.witnesses.push(w),
                            None => verifier.missing_witnesses.push(p.name.clone()),
                        }
                    }
                }
            }
        }
    }
    Ok(Report {
        model: ModelEcho::of(model),
        config: config.clone(),
        trace,
        verdict,
        verifier,
        timings: timer.map,
    })
}

fn trace_summary(iop: &IopSet) -> Result<Option<ExhaustiveSummary>> {
    match extract_summary(iop) {
        Ok(s) => Ok(Some(s)),
        Err(CoreError::NoParameterDependence) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Jacobian-only sweep: Local or Undetermined, never Global.
pub fn local(model: &LpvModel, config: &AnalysisConfig, registry: &EngineRegistry) -> Result<Report> {
    let config = AnalysisConfig { method: "jacobian".into(), ..config.clone() };
    analyze(model, &config, registry)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IopDump {
    pub order: u32,
    pub labels: Vec<RowLabel>,
    pub o: Vec<Vec<String>>,
    pub g: Vec<Vec<String>>,
    pub y0: Vec<String>,
    pub rank: usize,
    pub omega: Vec<Vec<String>>,
    pub psi: Vec<String>,
    pub summary: Vec<String>,
    pub notice: Option<String>,
}

impl IopDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serializes")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "w={}: O is {}x{}, rank {}", self.order, self.o.len(), self.o.first().map_or(0, Vec::len), self.rank);
        let _ = writeln!(s, "O:");
        for row in &self.o {
            let _ = writeln!(s, "  [{}]", row.join(", "));
        }
        let _ = writeln!(s, "G:");
        for row in &self.g {
            let _ = writeln!(s, "  [{}]", row.join(", "));
        }
        let _ = writeln!(s, "Y0: [{}]", self.y0.join(", "));
        if let Some(n) = &self.notice {
            let _ = writeln!(s, "{n}");
        }
        for (i, w) in self.omega.iter().enumerate() {
            let _ = writeln!(s, "omega[{i}]: [{}]", w.join(", "));
        }
        for p in &self.psi {
            let _ = writeln!(s, "psi: {p}");
        }
        if !self.summary.is_empty() {
            let _ = writeln!(s, "pi: {{{}}}", self.summary.join(", "));
        }
        s
    }
}

/// Stack, null-space, Ψ and Π at a single order.
pub fn iop_dump(model: &LpvModel, w: u32, max_columns: usize) -> Result<IopDump> {
    if w == 0 {
        return Err(CoreError::Precondition("order must be at least 1".into()));
    }
    let stack = build_stack_capped(model, w, max_columns)?;
    let ns = left_nullspace_ordered(&stack.o, &stack.elimination_order());
    let namer = |v: &Indeterminate| model.name_of(v);
    let mut dump = IopDump {
        order: w,
        labels: stack.labels.clone(),
        o: stack.o.render_with(&namer),
        g: stack.g.render_with(&namer),
        y0: stack.y0.iter().map(|e| model.render(e)).collect(),
        rank: ns.rank_of_o,
        omega: ns.rows.iter().map(|r| r.iter().map(|e| model.render(e)).collect()).collect(),
        psi: Vec::new(),
        summary: Vec::new(),
        notice: None,
    };
    if ns.is_empty() {
        dump.notice = Some("null-space empty".into());
        return Ok(dump);
    }
    let iop = form_iop(&stack, &ns)?;
    dump.psi = iop.polynomials().iter().map(|p| model.render_poly(p)).collect();
    match extract_summary(&iop) {
        Ok(s) => dump.summary = s.values().iter().map(|e| model.render(e)).collect(),
        Err(CoreError::NoParameterDependence) => dump.notice = Some("no coefficient depends on the parameters".into()),
        Err(e) => return Err(e),
    }
    Ok(dump)
}

pub const TRAJECTORY_SAMPLES: usize = 20;
pub const TRAJECTORY_DRAWS: u64 = 3;

/// Full verifier pass: back-substitution at the first nonempty order,
/// exact trajectories for discrete models, and witnesses for every
/// non-identifiable parameter.
pub fn verify(model: &LpvModel, config: &AnalysisConfig, registry: &EngineRegistry) -> Result<Report> {
    let config = AnalysisConfig { method: "groebner".into(), ..config.clone() };
    let mut report = analyze(model, &config, registry)?;
    let max_order = config.max_order_for(model);
    let mut timer = Timer { on: config.timings, map: BTreeMap::new() };
    let first = (0..=max_order)
        .map(|w| step(model, w, config.budgets.max_columns, &mut timer))
        .find(|s| s.as_ref().map_or(true, |s| !s.iop.is_empty()));
    let Some(first) = first else {
        return Ok(report);
    };
    let first = first?;
    report.verifier.backsubstitution = Some(backsubstitute_check(model, &first.iop)?.passed);
    if model.domain == Domain::Discrete {
        for k in 0..TRAJECTORY_DRAWS {
            let seed = config.seed.wrapping_add(k);
            let data = TrajectoryData::random(model, TRAJECTORY_SAMPLES, seed);
            let r = timer.time("trajectories", || discrete_trajectory_check(model, &first.iop, &data))?;
            report.verifier.trajectories.push(TrajectoryOutcome {
                seed,
                samples: r.samples,
                steps_checked: r.steps_checked,
                passed: r.passed(),
                max_residual: short_rational(&r.max_residual),
            });
        }
    }
    for (k, v) in timer.map {
        *report.timings.entry(k).or_default() += v;
    }
    Ok(report)
}

fn short_rational(r: &lpv_symbolic::Rational) -> String {
    let s = r.to_string();
    if s.len() > 64 {
        format!("nonzero ({} bits)", r.numer().bits() + r.denom().bits())
    } else {
        s
    }
}
