//! Model representation and the line-oriented model DSL.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use lpv_symbolic::{Expression, Indeterminate, Polynomial, Rational, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::matrix::{rational_rank, ExprMatrix};
use parser::{Ast, Located, RawMatrix, RawModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    Discrete,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Continuous => "continuous",
            Domain::Discrete => "discrete",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { severity: Severity::Error, line, column, message: message.into() }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic { severity: Severity::Warning, line, column, message: message.into() }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("syntax error at {0}")]
    Syntax(ParseDiagnostic),
    #[error("unknown symbol at {0}")]
    UnknownSymbol(ParseDiagnostic),
    #[error("dimension mismatch at {0}")]
    DimensionMismatch(ParseDiagnostic),
    #[error("state in matrix entry at {0}")]
    StateInMatrixEntry(ParseDiagnostic),
    #[error("not affine in parameters at {0}")]
    NotAffineInParameters(ParseDiagnostic),
}

impl ModelError {
    pub fn diagnostic(&self) -> &ParseDiagnostic {
        match self {
            ModelError::Syntax(d)
            | ModelError::UnknownSymbol(d)
            | ModelError::DimensionMismatch(d)
            | ModelError::StateInMatrixEntry(d)
            | ModelError::NotAffineInParameters(d) => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    A,
    B,
    C,
    D,
}

impl Which {
    pub const ALL: [Which; 4] = [Which::A, Which::B, Which::C, Which::D];

    pub fn as_str(self) -> &'static str {
        match self {
            Which::A => "A",
            Which::B => "B",
            Which::C => "C",
            Which::D => "D",
        }
    }
}

/// State-space model `x' = A x + B u`, `y = C x + D u` (derivative or forward
/// shift), with entries affine in the parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpvModel {
    pub domain: Domain,
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub params: Vec<String>,
    pub scheduling: Vec<String>,
    pub a: ExprMatrix,
    pub b: ExprMatrix,
    pub c: ExprMatrix,
    pub d: ExprMatrix,
}

impl LpvModel {
    pub fn n(&self) -> usize {
        self.states.len()
    }
    pub fn m(&self) -> usize {
        self.inputs.len()
    }
    pub fn p(&self) -> usize {
        self.outputs.len()
    }
    pub fn q(&self) -> usize {
        self.params.len()
    }

    pub fn matrix(&self, which: Which) -> &ExprMatrix {
        match which {
            Which::A => &self.a,
            Which::B => &self.b,
            Which::C => &self.c,
            Which::D => &self.d,
        }
    }

    pub fn state(&self, i: usize) -> Indeterminate {
        Indeterminate::signal(&self.states[i], Role::State, 0)
    }
    pub fn input(&self, i: usize) -> Indeterminate {
        Indeterminate::signal(&self.inputs[i], Role::Input, 0)
    }
    pub fn output(&self, i: usize) -> Indeterminate {
        Indeterminate::signal(&self.outputs[i], Role::Output, 0)
    }
    pub fn parameter(&self, i: usize) -> Indeterminate {
        Indeterminate::parameter(i as u32 + 1)
    }
    pub fn parameters(&self) -> Vec<Indeterminate> {
        (0..self.q()).map(|i| self.parameter(i)).collect()
    }

    /// Display names: declared parameter names, `name_ref` for reference
    /// parameters, `name[k]` for signals of order `k > 0`.
    pub fn name_of(&self, v: &Indeterminate) -> String {
        match v {
            Indeterminate::Parameter(i) => self
                .params
                .get(*i as usize - 1)
                .cloned()
                .unwrap_or_else(|| v.to_string()),
            Indeterminate::RefParameter(i) => match self.params.get(*i as usize - 1) {
                Some(p) => format!("{p}_ref"),
                None => v.to_string(),
            },
            Indeterminate::Signal(_) => v.to_string(),
        }
    }

    pub fn namer(&self) -> impl Fn(&Indeterminate) -> String + '_ {
        move |v| self.name_of(v)
    }

    pub fn render(&self, e: &Expression) -> String {
        e.render_with(&self.namer())
    }

    pub fn render_poly(&self, p: &Polynomial) -> String {
        p.render_with(&self.namer())
    }
}

/// Parses and validates a model. Warnings are discarded; see
/// [`parse_model_with_diagnostics`].
pub fn parse_model(source: &str) -> Result<LpvModel, ModelError> {
    parse_model_with_diagnostics(source).map(|(m, _)| m)
}

/// Parses a model and returns it with its non-fatal diagnostics.
pub fn parse_model_with_diagnostics(source: &str) -> Result<(LpvModel, Vec<ParseDiagnostic>), ModelError> {
    let raw = parser::parse(lexer::tokenize(source)?)?;
    let (model, mut warnings) = resolve(raw)?;
    warnings.extend(validate_model(&model));
    Ok((model, warnings))
}

struct Scope {
    symbols: BTreeMap<String, Indeterminate>,
    states: BTreeSet<String>,
}

fn natural_key(s: &str) -> (String, u64) {
    let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (stem, num) = s.split_at(s.len() - digits);
    (stem.to_string(), num.parse().unwrap_or(0))
}

fn collect_idents(ast: &Ast, out: &mut Vec<(String, usize, usize)>) {
    match ast {
        Ast::Int(_) => {}
        Ast::Ident { name, line, column } => out.push((name.clone(), *line, *column)),
        Ast::Neg(a) | Ast::Pow(a, _) => collect_idents(a, out),
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b, _, _) => {
            collect_idents(a, out);
            collect_idents(b, out);
        }
    }
}

fn is_prefixed(name: &str, stem: &str) -> bool {
    name.strip_prefix(stem)
        .is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
}

fn default_names(stem: &str, count: usize) -> Vec<String> {
    if count == 1 && stem != "x" {
        vec![stem.to_string()]
    } else {
        (1..=count).map(|i| format!("{stem}{i}")).collect()
    }
}

fn resolve(raw: RawModel) -> Result<(LpvModel, Vec<ParseDiagnostic>), ModelError> {
    let warnings = Vec::new();
    let domain = match &raw.time {
        Some(t) if t.value == "discrete" => Domain::Discrete,
        Some(_) => Domain::Continuous,
        None => {
            return Err(ModelError::Syntax(ParseDiagnostic::error(1, 1, "missing `time: continuous|discrete` statement")));
        }
    };
    let matrix = |k: &str| raw.matrices.iter().find(|(key, _)| key.value == k).map(|(_, m)| m);
    let list = |k: &str| raw.lists.iter().find(|(key, _)| key.value == k).map(|(_, v)| v);

    let Some(a_raw) = matrix("A") else {
        return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(1, 1, "missing `A` matrix")));
    };
    let Some(c_raw) = matrix("C") else {
        return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(1, 1, "missing `C` matrix")));
    };

    let mut idents = Vec::new();
    for (_, m) in &raw.matrices {
        for row in &m.rows {
            for e in row {
                collect_idents(&e.value, &mut idents);
            }
        }
    }
    let inferred = |stem: &str| -> Vec<String> {
        let mut v: Vec<String> = idents.iter().map(|(s, _, _)| s.clone()).filter(|s| is_prefixed(s, stem)).collect();
        v.sort_by_key(|s| natural_key(s));
        v.dedup();
        v
    };
    let declared = |k: &str| list(k).map(|v| v.iter().map(|l| l.value.clone()).collect::<Vec<_>>());

    let n = a_raw.rows.len();
    let states = declared("states").unwrap_or_else(|| default_names("x", n));
    let outputs = declared("outputs").unwrap_or_else(|| {
        let inf = inferred("y");
        if inf.is_empty() { default_names("y", c_raw.rows.len()) } else { inf }
    });
    let bd_cols = matrix("B").or(matrix("D")).and_then(|m| m.rows.first()).map_or(0, Vec::len);
    let inputs = declared("inputs").unwrap_or_else(|| {
        let inf = inferred("u");
        if inf.is_empty() { default_names("u", bd_cols) } else { inf }
    });
    let params = declared("params").unwrap_or_else(|| inferred("theta"));
    let scheduling = declared("scheduling").unwrap_or_else(|| inferred("rho"));

    // duplicate names across or within roles
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    for (key, names) in &raw.lists {
        for l in names {
            if seen.insert(l.value.clone(), ()).is_some() {
                return Err(ModelError::Syntax(ParseDiagnostic::error(
                    l.line,
                    l.column,
                    format!("name `{}` declared more than once (in `{}`)", l.value, key.value),
                )));
            }
        }
    }

    let mut symbols = BTreeMap::new();
    for (i, p) in params.iter().enumerate() {
        symbols.insert(p.clone(), Indeterminate::parameter(i as u32 + 1));
    }
    for s in &inputs {
        symbols.insert(s.clone(), Indeterminate::signal(s, Role::Input, 0));
    }
    for s in &outputs {
        symbols.insert(s.clone(), Indeterminate::signal(s, Role::Output, 0));
    }
    for s in &scheduling {
        symbols.insert(s.clone(), Indeterminate::signal(s, Role::Scheduling, 0));
    }
    let scope = Scope { symbols, states: states.iter().cloned().collect() };

    let build = |key: &str, rows: usize, cols: usize| -> Result<ExprMatrix, ModelError> {
        match matrix(key) {
            None => Ok(ExprMatrix::zeros(rows, cols)),
            Some(raw_m) => {
                let m = build_matrix(raw_m, &scope)?;
                let (r, c) = m.shape();
                let ok = (r == rows && c == cols) || (r == 0 && rows * cols == 0);
                if !ok {
                    return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(
                        raw_m.line,
                        raw_m.column,
                        format!("`{key}` is {r}x{c}, expected {rows}x{cols}"),
                    )));
                }
                Ok(if r == 0 { ExprMatrix::zeros(rows, cols) } else { m })
            }
        }
    };
    let (p, m) = (outputs.len(), inputs.len());
    if n == 0 || states.len() != n {
        return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(
            a_raw.line,
            a_raw.column,
            format!("`A` has {n} rows but {} states are declared", states.len()),
        )));
    }
    if p == 0 {
        return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(c_raw.line, c_raw.column, "at least one output is required")));
    }
    let a = build("A", n, n)?;
    let b = build("B", n, m)?;
    let c = build("C", p, n)?;
    let d = build("D", p, m)?;
    let model = LpvModel { domain, states, inputs, outputs, params, scheduling, a, b, c, d };
    if model.q() == 0 {
        return Err(ModelError::NotAffineInParameters(ParseDiagnostic::error(1, 1, "model declares no parameters")));
    }
    Ok((model, warnings))
}

fn build_matrix(raw: &RawMatrix, scope: &Scope) -> Result<ExprMatrix, ModelError> {
    let mut rows = Vec::with_capacity(raw.rows.len());
    for row in &raw.rows {
        let mut r = Vec::with_capacity(row.len());
        for e in row {
            let v = lower(&e.value, scope)?;
            check_affine(&v, e)?;
            r.push(v);
        }
        rows.push(r);
    }
    Ok(ExprMatrix::from_rows(rows))
}

fn check_affine(e: &Expression, at: &Located<Ast>) -> Result<(), ModelError> {
    let err = |msg: &str| ModelError::NotAffineInParameters(ParseDiagnostic::error(at.line, at.column, msg));
    if e.denominator().contains_variable(Indeterminate::is_parameter) {
        return Err(err("parameters may not appear in a denominator"));
    }
    let affine = e
        .numerator()
        .terms()
        .all(|(m, _)| m.factors().iter().filter(|(v, _)| v.is_parameter()).map(|(_, k)| *k).sum::<u32>() <= 1);
    if affine {
        Ok(())
    } else {
        Err(err("entry is not affine in the parameters"))
    }
}

fn lower(ast: &Ast, scope: &Scope) -> Result<Expression, ModelError> {
    Ok(match ast {
        Ast::Int(n) => Expression::constant(Rational::from_integer(n.clone())),
        Ast::Ident { name, line, column } => {
            if scope.states.contains(name) {
                return Err(ModelError::StateInMatrixEntry(ParseDiagnostic::error(
                    *line,
                    *column,
                    format!("state `{name}` may not appear in a matrix entry"),
                )));
            }
            match scope.symbols.get(name) {
                Some(v) => Expression::var(v.clone()),
                None => {
                    return Err(ModelError::UnknownSymbol(ParseDiagnostic::error(
                        *line,
                        *column,
                        format!("unknown symbol `{name}`"),
                    )))
                }
            }
        }
        Ast::Neg(a) => -lower(a, scope)?,
        Ast::Add(a, b) => lower(a, scope)? + lower(b, scope)?,
        Ast::Sub(a, b) => lower(a, scope)? - lower(b, scope)?,
        Ast::Mul(a, b) => lower(a, scope)? * lower(b, scope)?,
        Ast::Div(a, b, line, column) => {
            let num = lower(a, scope)?;
            let den = lower(b, scope)?;
            num.checked_div(&den)
                .ok_or_else(|| ModelError::Syntax(ParseDiagnostic::error(*line, *column, "division by zero")))?
        }
        Ast::Pow(a, e) => lower(a, scope)?
            .powi(*e)
            .map_err(|_| ModelError::Syntax(ParseDiagnostic::error(1, 1, "zero raised to a negative power")))?,
    })
}

/// Splits `which` into `X0 + Σ θj Xj` with θ-free blocks.
pub fn affine_decompose(model: &LpvModel, which: Which) -> (ExprMatrix, Vec<ExprMatrix>) {
    let x = model.matrix(which);
    let (r, c) = x.shape();
    let mut x0 = ExprMatrix::zeros(r, c);
    let mut bars = vec![ExprMatrix::zeros(r, c); model.q()];
    for i in 0..r {
        for j in 0..c {
            let e = x.get(i, j);
            let den = Expression::from(e.denominator().clone());
            for (pm, coeff) in e.numerator().collect(Indeterminate::is_parameter) {
                let part = &Expression::from(coeff) / &den;
                match pm.factors() {
                    [] => x0.set(i, j, part),
                    [(Indeterminate::Parameter(k), 1)] => bars[*k as usize - 1].set(i, j, part),
                    _ => unreachable!("model entries are affine in the parameters"),
                }
            }
        }
    }
    (x0, bars)
}

/// Structural checks on a model. Errors for broken invariants, warnings for
/// output-dependent entries and generic rank deficiency of the output map.
pub fn validate_model(model: &LpvModel) -> Vec<ParseDiagnostic> {
    let mut out = Vec::new();
    let (n, m, p) = (model.n(), model.m(), model.p());
    for (which, want) in [(Which::A, (n, n)), (Which::B, (n, m)), (Which::C, (p, n)), (Which::D, (p, m))] {
        let got = model.matrix(which).shape();
        if got != want {
            out.push(ParseDiagnostic::error(
                1,
                1,
                format!("dimension mismatch: `{}` is {}x{}, expected {}x{}", which.as_str(), got.0, got.1, want.0, want.1),
            ));
        }
    }
    if n == 0 {
        out.push(ParseDiagnostic::error(1, 1, "dimension mismatch: at least one state is required"));
    }
    if p == 0 {
        out.push(ParseDiagnostic::error(1, 1, "dimension mismatch: at least one output is required"));
    }
    if !out.is_empty() {
        return out;
    }
    let q = model.q() as u32;
    let known: BTreeSet<Indeterminate> = (0..m)
        .map(|i| model.input(i))
        .chain((0..p).map(|i| model.output(i)))
        .chain(model.scheduling.iter().map(|s| Indeterminate::signal(s, Role::Scheduling, 0)))
        .collect();
    let mut output_dependent = Vec::new();
    for which in Which::ALL {
        for e in model.matrix(which).entries() {
            for v in e.variables() {
                let ok = match &v {
                    Indeterminate::Parameter(k) => *k >= 1 && *k <= q,
                    Indeterminate::RefParameter(_) => false,
                    Indeterminate::Signal(s) => s.order == 0 && known.contains(&v),
                };
                if !ok {
                    out.push(ParseDiagnostic::error(
                        1,
                        1,
                        format!("`{}` entry mentions `{}`, which is not an order-0 input, output, scheduling variable or parameter", which.as_str(), model.name_of(&v)),
                    ));
                }
                if v.has_role(Role::Output) && !output_dependent.contains(&which) {
                    output_dependent.push(which);
                }
            }
            let affine = !e.denominator().contains_variable(Indeterminate::is_parameter)
                && e.numerator().terms().all(|(mo, _)| {
                    mo.factors().iter().filter(|(v, _)| v.is_parameter()).map(|(_, k)| *k).sum::<u32>() <= 1
                });
            if !affine {
                out.push(ParseDiagnostic::error(1, 1, format!("`{}` entry is not affine in the parameters", which.as_str())));
            }
        }
    }
    for which in output_dependent {
        let sev = if matches!(which, Which::C | Which::D) { Severity::Error } else { Severity::Warning };
        out.push(ParseDiagnostic {
            severity: sev,
            line: 1,
            column: 1,
            message: format!("`{}` depends on a measured output; this quasi-LPV form moves output terms to the known side", which.as_str()),
        });
    }
    let rank = generic_rank(&model.c, 0xC0FFEE, 5);
    if rank < p {
        out.push(ParseDiagnostic::warning(
            1,
            1,
            format!("generic rank of the output map is {rank} < p = {p}; outputs are not locally independent"),
        ));
    }
    out
}

/// Maximum rank of `m` over several random rational evaluations of its
/// indeterminates.
pub fn generic_rank(m: &ExprMatrix, seed: u64, trials: usize) -> usize {
    let vars: BTreeSet<Indeterminate> = m.entries().flat_map(|e| e.variables()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials {
        let point: BTreeMap<Indeterminate, Rational> = vars
            .iter()
            .map(|v| (v.clone(), Rational::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=9).into())))
            .collect();
        if let Ok(vals) = m.evaluate(&point) {
            best = best.max(rational_rank(&vals));
        }
    }
    best
}

impl fmt::Display for LpvModel {
    /// Prints the model in the DSL; re-parsing yields an equal model.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "time: {}", self.domain.as_str())?;
        for (k, v) in [
            ("states", &self.states),
            ("inputs", &self.inputs),
            ("outputs", &self.outputs),
            ("params", &self.params),
            ("scheduling", &self.scheduling),
        ] {
            writeln!(f, "{k}: {}", v.join(", "))?;
        }
        let namer = self.namer();
        for which in Which::ALL {
            let mat = self.matrix(which);
            if mat.rows() == 0 || mat.cols() == 0 {
                continue;
            }
            let rows: Vec<String> = (0..mat.rows())
                .map(|i| mat.row(i).iter().map(|e| e.render_with(&namer)).collect::<Vec<_>>().join(", "))
                .collect();
            writeln!(f, "{}: [{}]", which.as_str(), rows.join("; "))?;
        }
        Ok(())
    }
}
