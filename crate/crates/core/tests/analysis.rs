mod common;

use lpvident_core::analysis::{analyze, iop_dump, local, verify, AnalysisConfig, Budgets};
use lpvident_core::identifiability::{EngineRegistry, ModelStatus, Status};
use lpvident_core::model::{parse_model, LpvModel};
use lpvident_core::CoreError;

fn run(model: &LpvModel, config: &AnalysisConfig) -> lpvident_core::analysis::Report {
    analyze(model, config, &EngineRegistry::builtin()).unwrap()
}

fn statuses(r: &lpvident_core::analysis::Report) -> Vec<Status> {
    r.verdict.parameters.iter().map(|p| p.status.clone()).collect()
}

#[test]
fn reports_are_byte_deterministic() {
    for name in ["nonidentifiable", "henon", "local"] {
        let m = common::load(name);
        let config = AnalysisConfig { method: "both".into(), seed: 9, ..Default::default() };
        assert_eq!(run(&m, &config).to_json(), run(&m, &config).to_json(), "{name}");
    }
}

#[test]
fn json_top_level_keys() {
    let r = run(&common::load("decay"), &AnalysisConfig::default());
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["config", "model", "timings", "trace", "verdict", "verifier"]);
    assert!(v["timings"].as_object().unwrap().is_empty());
}

#[test]
fn timings_only_on_request() {
    let config = AnalysisConfig { timings: true, ..Default::default() };
    let r = run(&common::load("decay"), &config);
    assert!(r.timings.contains_key("stacking"));
}

#[test]
fn nonidentifiable_iop_dump() {
    let m = common::load("nonidentifiable");
    let d1 = iop_dump(&m, 1, 64).unwrap();
    assert_eq!(d1.notice.as_deref(), Some("null-space empty"));
    assert!(d1.psi.is_empty());
    let d2 = iop_dump(&m, 2, 64).unwrap();
    assert_eq!((d2.o.len(), d2.rank, d2.psi.len(), d2.summary.len()), (7, 6, 1, 4));
    assert!(d2.render_text().contains("psi: "));
    assert!(matches!(iop_dump(&m, 0, 64), Err(CoreError::Precondition(_))));
}

#[test]
fn nonidentifiable_sweep() {
    let r = run(&common::load("nonidentifiable"), &AnalysisConfig::default());
    assert_eq!(r.verdict.order, Some(2));
    assert_eq!(r.verdict.model, ModelStatus::NonIdentifiable);
    assert_eq!(statuses(&r), [Status::Global, Status::NonIdentifiable, Status::NonIdentifiable]);
    assert_eq!(r.trace.len(), 3);
    assert_eq!(r.trace[1].note.as_deref(), Some("null-space empty"));
    assert_eq!(r.verifier.backsubstitution, Some(true));
    assert_eq!(r.verifier.witnesses.len(), 2);
    assert!(r.verifier.missing_witnesses.is_empty());
}

#[test]
fn golden_verdicts() {
    let nl = Status::Local { degree: Some(2) };
    let ni = Status::NonIdentifiable;
    let g = Status::Global;
    let cases: [(&str, Vec<Status>); 6] = [
        ("nonidentifiable", vec![g.clone(), ni.clone(), ni.clone()]),
        ("local", vec![g.clone(), nl, g.clone()]),
        ("ahu", vec![g.clone(); 4]),
        ("henon", vec![g.clone(), ni.clone(), ni.clone(), ni]),
        ("burgers", vec![g.clone(); 2]),
        ("decay", vec![g]),
    ];
    for (name, want) in cases {
        let r = run(&common::load(name), &AnalysisConfig::default());
        assert_eq!(statuses(&r), want, "{name}");
    }
}

#[test]
fn first_equation_within_the_state_count() {
    for (name, m) in common::golden() {
        let r = run(&m, &AnalysisConfig::default());
        let first = r.trace.iter().find(|t| !t.equations.is_empty()).unwrap_or_else(|| panic!("{name}"));
        assert!(first.order as usize <= m.n(), "{name}");
    }
}

#[test]
fn local_never_reports_global() {
    let registry = EngineRegistry::builtin();
    for (name, m) in common::golden() {
        let r = local(&m, &AnalysisConfig::default(), &registry).unwrap();
        assert!(r.verdict.parameters.iter().all(|p| p.status != Status::Global), "{name}");
    }
    for name in ["burgers", "local", "ahu"] {
        let r = local(&common::load(name), &AnalysisConfig::default(), &registry).unwrap();
        assert_eq!(r.verdict.model, ModelStatus::Local, "{name}");
    }
    let r = local(&common::load("nonidentifiable"), &AnalysisConfig::default(), &registry).unwrap();
    assert_eq!(r.verdict.model, ModelStatus::Undetermined);
}

#[test]
fn both_engines_agree_on_golden() {
    for (name, m) in common::golden() {
        let r = run(&m, &AnalysisConfig { method: "both".into(), ..Default::default() });
        let cc = r.verdict.cross_check.unwrap_or_else(|| panic!("{name}"));
        assert!(cc.agree, "{name}: {}", cc.detail);
        assert_eq!(r.verdict.engines.len(), 2);
    }
}

#[test]
fn low_max_order_is_undetermined() {
    let config = AnalysisConfig { max_order: Some(1), ..Default::default() };
    let r = run(&common::load("nonidentifiable"), &config);
    assert_eq!(r.verdict.model, ModelStatus::Undetermined);
    assert!(r.verdict.message.unwrap().contains("--max-order"));
}

#[test]
fn column_budget_is_reported() {
    let config = AnalysisConfig { budgets: Budgets { max_columns: 4, ..Default::default() }, ..Default::default() };
    let r = run(&common::load("nonidentifiable"), &config);
    assert!(r.verdict.budget_exceeded);
    assert_eq!(r.verdict.model, ModelStatus::Undetermined);
}

#[test]
fn invalid_configurations() {
    let m = common::load("decay");
    let registry = EngineRegistry::builtin();
    for config in [
        AnalysisConfig { trials: 0, ..Default::default() },
        AnalysisConfig { max_order: Some(0), ..Default::default() },
        AnalysisConfig { budgets: Budgets { max_pairs: 0, ..Default::default() }, ..Default::default() },
    ] {
        assert!(matches!(analyze(&m, &config, &registry), Err(CoreError::Precondition(_))));
    }
    let config = AnalysisConfig { method: "taylor".into(), ..Default::default() };
    assert!(analyze(&m, &config, &registry).is_err());
}

#[test]
fn parameter_free_coefficients_mean_non_identifiable() {
    let m = parse_model("time: continuous\nstates: x1\noutputs: y\nparams: theta1\nA: [-1]\nC: [1]\n").unwrap();
    let r = run(&m, &AnalysisConfig::default());
    assert_eq!(r.verdict.model, ModelStatus::NonIdentifiable);
}

#[test]
fn verify_discrete_model() {
    let r = verify(&common::load("henon"), &AnalysisConfig::default(), &EngineRegistry::builtin()).unwrap();
    assert_eq!(r.verifier.trajectories.len(), 3);
    assert!(r.verifier.passed());
    assert!(r.verifier.trajectories.iter().all(|t| t.passed && t.steps_checked > 0));
}
