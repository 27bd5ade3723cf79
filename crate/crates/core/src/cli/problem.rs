//! Problem files: one JSON document per problem, validated against the
//! declared frame before anything is solved.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::belief::MassFunction;
use crate::credal::{CredalSet, LinearConstraint, Relation};
use crate::frame::{Event, Frame, RandVar};
use crate::infosys::{BinaryChannel, InfoSystem, ProductFrame};
use crate::scoring::{PayoffMatrix, ScoreRule};

/// A problem file that could not be read, with the location of the fault:
/// a line and column for syntax errors, a field path for semantic ones.
#[derive(Debug, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ProblemError {
    pub location: String,
    pub message: String,
}

impl ProblemError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ProblemError { location: path.into(), message: message.into() }
    }
}

type PResult<T> = std::result::Result<T, ProblemError>;

#[derive(Deserialize)]
#[serde(untagged)]
enum FrameDecl {
    Named { atoms: Vec<String> },
    Bare(Vec<String>),
}

impl FrameDecl {
    fn atoms(&self) -> &[String] {
        match self {
            FrameDecl::Named { atoms } | FrameDecl::Bare(atoms) => atoms,
        }
    }
}

/// Either one value per atom in frame order, or a map from atom name to
/// value where missing atoms get 0.
#[derive(Deserialize)]
#[serde(untagged)]
enum Weights {
    Dense(Vec<f64>),
    Named(BTreeMap<String, f64>),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ConstraintDecl {
    ProbBound { event: Vec<String>, op: Relation, value: f64 },
    Expectation { variable: Weights, op: Relation, value: f64 },
    Linear { coeffs: Weights, op: Relation, value: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MassDecl {
    focal: Vec<String>,
    value: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeliefDecl {
    mass: Vec<MassDecl>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PayoffDecl {
    #[serde(default)]
    actions: Option<Vec<String>>,
    u: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinaryDecl {
    q: f64,
    r: f64,
    #[serde(default = "one")]
    n: usize,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDecl {
    frame_e: Vec<String>,
    frame_i: Vec<String>,
    #[serde(default)]
    constraints: Vec<ConstraintDecl>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum InfosysDecl {
    Binary(BinaryDecl),
    Joint(JointDecl),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDecl {
    frame: Option<FrameDecl>,
    knowledge: Option<Vec<ConstraintDecl>>,
    score: Option<String>,
    payoff: Option<PayoffDecl>,
    belief: Option<BeliefDecl>,
    infosys: Option<InfosysDecl>,
}

#[derive(Clone, Debug)]
pub enum ProblemKind {
    Knowledge(CredalSet),
    Belief(MassFunction),
    Infosys(InfoSystem),
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub kind: ProblemKind,
    pub score: Option<ScoreRule>,
    /// Channel parameters when the information system came from a binary
    /// block.
    pub channel: Option<BinaryChannel>,
}

impl Problem {
    pub fn frame(&self) -> &Frame {
        match &self.kind {
            ProblemKind::Knowledge(k) => k.frame(),
            ProblemKind::Belief(m) => m.frame(),
            ProblemKind::Infosys(s) => s.frames().joint(),
        }
    }
}

pub fn parse_problem(text: &str) -> PResult<Problem> {
    let decl: ProblemDecl = serde_json::from_str(text)
        .map_err(|e| ProblemError::at(format!("line {} column {}", e.line(), e.column()), strip_position(&e)))?;
    build(decl)
}

// serde_json appends " at line X column Y"; the location is reported separately
fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

fn make_frame(atoms: &[String], path: &str) -> PResult<Frame> {
    Frame::new(atoms).map_err(|e| ProblemError::at(path, e.to_string()))
}

fn build(decl: ProblemDecl) -> PResult<Problem> {
    let kinds = [decl.knowledge.is_some(), decl.belief.is_some(), decl.infosys.is_some()];
    if kinds.iter().filter(|&&k| k).count() > 1 {
        return Err(ProblemError::at("$", "a problem file holds exactly one of knowledge, belief or infosys"));
    }

    let payoff = match decl.payoff {
        Some(p) => {
            let m = match p.actions {
                Some(a) => PayoffMatrix::new(a, p.u),
                None => PayoffMatrix::from_rows(p.u),
            };
            Some(m.map_err(|e| ProblemError::at("payoff", e.to_string()))?)
        }
        None => None,
    };
    let score = match decl.score.as_deref() {
        None => None,
        Some(s) => Some(parse_score(s, payoff.clone()).map_err(|m| ProblemError::at("score", m))?),
    };

    if let Some(sys) = decl.infosys {
        if decl.frame.is_some() {
            return Err(ProblemError::at("frame", "infosys problems declare their frames inside the infosys block"));
        }
        let (sys, channel) = build_infosys(sys)?;
        check_payoff_width(&score, sys.frames().hypotheses().len())?;
        return Ok(Problem { kind: ProblemKind::Infosys(sys), score, channel });
    }

    let frame_decl = decl.frame.ok_or_else(|| ProblemError::at("frame", "missing frame declaration"))?;
    let frame = make_frame(frame_decl.atoms(), "frame")?;
    check_payoff_width(&score, frame.len())?;

    let kind = if let Some(b) = decl.belief {
        let mut masses = Vec::with_capacity(b.mass.len());
        for (i, m) in b.mass.iter().enumerate() {
            let path = format!("belief.mass[{i}]");
            let e = resolve_event(&frame, &m.focal, &format!("{path}.focal"))?;
            masses.push((e, m.value));
        }
        let mf = MassFunction::new(&frame, &masses).map_err(|e| ProblemError::at("belief.mass", e.to_string()))?;
        ProblemKind::Belief(mf)
    } else {
        let cs = build_constraints(&frame, decl.knowledge.as_deref().unwrap_or(&[]), "knowledge")?;
        let k = CredalSet::from_constraints(&frame, cs).map_err(|e| ProblemError::at("knowledge", e.to_string()))?;
        ProblemKind::Knowledge(k)
    };
    Ok(Problem { kind, score, channel: None })
}

fn check_payoff_width(score: &Option<ScoreRule>, n: usize) -> PResult<()> {
    if let Some(ScoreRule::Decisional(u)) = score {
        if u.n_atoms() != n {
            return Err(ProblemError::at(
                "payoff.u",
                format!("payoff rows have {} columns but the frame has {n} atoms", u.n_atoms()),
            ));
        }
    }
    Ok(())
}

/// `log`, `quad` (or `quadratic`) and `decisional`; the last needs a
/// payoff matrix.
pub fn parse_score(name: &str, payoff: Option<PayoffMatrix>) -> std::result::Result<ScoreRule, String> {
    match name {
        "log" => Ok(ScoreRule::Log),
        "quad" | "quadratic" => Ok(ScoreRule::Quadratic),
        "decisional" => payoff.map(ScoreRule::Decisional).ok_or_else(|| "the decisional score needs a payoff matrix".into()),
        other => Err(format!("unknown score '{other}' (expected log, quad or decisional)")),
    }
}

fn build_infosys(decl: InfosysDecl) -> PResult<(InfoSystem, Option<BinaryChannel>)> {
    match decl {
        InfosysDecl::Binary(b) => {
            let ch = BinaryChannel::new(b.q, b.r, b.n).map_err(|e| ProblemError::at("infosys.binary", e.to_string()))?;
            let sys = InfoSystem::binary(&ch).map_err(|e| ProblemError::at("infosys.binary.n", e.to_string()))?;
            Ok((sys, Some(ch)))
        }
        InfosysDecl::Joint(j) => {
            let fe = make_frame(&j.frame_e, "infosys.joint.frame_e")?;
            let fi = make_frame(&j.frame_i, "infosys.joint.frame_i")?;
            let pf = ProductFrame::new(&fe, &fi).map_err(|e| ProblemError::at("infosys.joint", e.to_string()))?;
            let cs = build_constraints(pf.joint(), &j.constraints, "infosys.joint.constraints")?;
            let k = CredalSet::from_constraints(pf.joint(), cs)
                .map_err(|e| ProblemError::at("infosys.joint.constraints", e.to_string()))?;
            let sys = InfoSystem::new(pf, k).map_err(|e| ProblemError::at("infosys.joint", e.to_string()))?;
            Ok((sys, None))
        }
    }
}

fn resolve_event(frame: &Frame, names: &[String], path: &str) -> PResult<Event> {
    for (i, n) in names.iter().enumerate() {
        if frame.atom_index(n).is_none() {
            return Err(ProblemError::at(format!("{path}[{i}]"), format!("unknown atom '{n}'")));
        }
    }
    frame.event_of(names).map_err(|e| ProblemError::at(path, e.to_string()))
}

fn resolve_weights(frame: &Frame, w: &Weights, path: &str) -> PResult<Vec<f64>> {
    match w {
        Weights::Dense(v) => {
            if v.len() != frame.len() {
                return Err(ProblemError::at(path, format!("expected {} values, got {}", frame.len(), v.len())));
            }
            Ok(v.clone())
        }
        Weights::Named(m) => {
            let mut v = vec![0.0; frame.len()];
            for (name, x) in m {
                let i = frame
                    .atom_index(name)
                    .ok_or_else(|| ProblemError::at(format!("{path}.{name}"), format!("unknown atom '{name}'")))?;
                v[i] = *x;
            }
            Ok(v)
        }
    }
}

fn build_constraints(frame: &Frame, decls: &[ConstraintDecl], base: &str) -> PResult<Vec<LinearConstraint>> {
    let mut out = Vec::with_capacity(decls.len());
    for (i, d) in decls.iter().enumerate() {
        let path = format!("{base}[{i}]");
        let c = match d {
            ConstraintDecl::ProbBound { event, op, value } => {
                let e = resolve_event(frame, event, &format!("{path}.event"))?;
                if !(0.0..=1.0).contains(value) {
                    return Err(ProblemError::at(
                        format!("{path}.value"),
                        format!("probability bound {value} is outside [0, 1]"),
                    ));
                }
                LinearConstraint::prob_bound(&e, *op, *value)
            }
            ConstraintDecl::Expectation { variable, op, value } => {
                let x = resolve_weights(frame, variable, &format!("{path}.variable"))?;
                RandVar::new(frame, x).and_then(|v| LinearConstraint::expectation(&v, *op, *value))
            }
            ConstraintDecl::Linear { coeffs, op, value } => {
                let x = resolve_weights(frame, coeffs, &format!("{path}.coeffs"))?;
                LinearConstraint::new(frame, x, *op, *value)
            }
        };
        out.push(c.map_err(|e| ProblemError::at(path, e.to_string()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_vacuous() {
        let p = parse_problem(r#"{"frame": ["a", "b"], "knowledge": []}"#).unwrap();
        match p.kind {
            ProblemKind::Knowledge(k) => assert_eq!(k.constraints().len(), 0),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn out_of_range_bound() {
        let err = parse_problem(
            r#"{"frame": {"atoms": ["a", "b"]},
                "knowledge": [{"type": "prob_bound", "event": ["a"], "op": ">=", "value": 1.2}]}"#,
        )
        .unwrap_err();
        assert_eq!(err.location, "knowledge[0].value");
    }

    #[test]
    fn unknown_atom_is_named() {
        let err = parse_problem(
            r#"{"frame": ["a", "b"],
                "knowledge": [{"type": "prob_bound", "event": ["a", "zz"], "op": "<=", "value": 0.5}]}"#,
        )
        .unwrap_err();
        assert_eq!(err.location, "knowledge[0].event[1]");
        assert!(err.message.contains("'zz'"));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_problem("{\n  \"frame\": [\"a\",\n  }").unwrap_err();
        assert!(err.location.starts_with("line 3"), "{err}");
    }

    #[test]
    fn two_kinds_rejected() {
        let err = parse_problem(r#"{"frame": ["a"], "knowledge": [], "belief": {"mass": []}}"#).unwrap_err();
        assert_eq!(err.location, "$");
    }

    #[test]
    fn named_weights_and_infosys() {
        let p = parse_problem(
            r#"{"frame": ["a", "b", "c"],
                "knowledge": [{"type": "expectation", "variable": {"b": 1, "c": 2}, "op": "==", "value": 1.5}]}"#,
        )
        .unwrap();
        assert_eq!(p.frame().len(), 3);
        let p = parse_problem(r#"{"infosys": {"binary": {"q": 0.9, "r": 0.4, "n": 2}}, "score": "log"}"#).unwrap();
        assert_eq!(p.frame().len(), 6);
        assert!(p.channel.is_some());
    }

    #[test]
    fn decisional_needs_matching_payoff() {
        assert!(parse_problem(r#"{"frame": ["a", "b"], "score": "decisional"}"#).is_err());
        let err = parse_problem(r#"{"frame": ["a", "b"], "score": "decisional", "payoff": {"u": [[1, 0, 0]]}}"#)
            .unwrap_err();
        assert_eq!(err.location, "payoff.u");
    }
}
