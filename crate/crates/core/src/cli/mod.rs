//! Command-line front end.
//!
//! Exit codes: 0 success, 2 empty or inconsistent knowledge, 3 conditioning
//! on a null event, 4 input error.

pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::belief::{belief_to_credal, compare_updating, conflict, dempster_combine, MassFunction};
use crate::credal::CredalSet;
use crate::error::Error;
use crate::frame::{Event, Frame};
use crate::inference::{decisional_maxmin, game_bounds_with, min_score_estimate_with, INFERENCE_CG};
use crate::infosys::{
    default_survey_grid, downplay_survey, eq3_residual, eq3_solve, min_score_joint_with, posterior_transfer_gap,
    prior_study, BinaryChannel,
};
use crate::optim::cg::CgOptions;
use crate::scoring::{check_proper, PayoffMatrix, ScoreRule};

use problem::{parse_problem, parse_score, Problem, ProblemKind};
use report::{render_json, render_text, round_value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY: i32 = 2;
pub const EXIT_NULL_EVENT: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "knowset", version, about = "Inference over knowledge sets of probability distributions")]
pub struct Cli {
    /// Emit machine-readable JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Duality-gap tolerance for the convex solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Min-score estimate of a knowledge set.
    Infer {
        file: PathBuf,
        #[arg(long)]
        score: Option<String>,
    },
    /// Lower and upper probabilities of an event (every atom by default).
    Bounds {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        event: Vec<String>,
    },
    /// Bounds on the value of the game against nature.
    Game {
        file: PathBuf,
        #[arg(long)]
        score: Option<String>,
    },
    #[command(subcommand)]
    Update(UpdateCmd),
    #[command(subcommand)]
    Belief(BeliefCmd),
    #[command(subcommand)]
    Infosys(InfosysCmd),
    #[command(subcommand)]
    Check(CheckCmd),
}

#[derive(Subcommand, Debug)]
enum UpdateCmd {
    /// Intersect two knowledge sets.
    Knowledge { a: PathBuf, b: PathBuf },
    /// Condition every member of a knowledge set on an event.
    Observe {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        event: Vec<String>,
        /// Drop members that give the event zero probability.
        #[arg(long)]
        allow_boundary: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BeliefCmd {
    /// The set of distributions dominating a belief function.
    Tocredal { file: PathBuf },
    /// Dempster's rule of combination.
    Combine { a: PathBuf, b: PathBuf },
    /// Dempster's rule next to intersecting the two credal sets.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand, Debug)]
enum InfosysCmd {
    /// Min-score joint distribution of an information system.
    Infer {
        file: PathBuf,
        #[arg(long)]
        score: Option<String>,
    },
    /// Best prior for one observation of a binary channel.
    Eq3 {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
    },
    /// Best prior as a function of the number of observations.
    PriorStudy {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, num_args = 1.., default_values_t = [1usize, 2, 3])]
        n: Vec<usize>,
    },
    /// Predictive of a second success: carried-forward posterior against
    /// the two-observation prior.
    Transfer {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    /// Sample (P, Q) pairs and count violations of propriety.
    Proper {
        #[arg(long)]
        score: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Problem file supplying a payoff matrix for the decisional score.
        file: Option<PathBuf>,
    },
}

/// A failure on its way to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptySet | Error::TotalConflict => EXIT_EMPTY,
            Error::NullEvent | Error::EventImpossible | Error::EventPossiblyNull => EXIT_NULL_EVENT,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// A finished report, possibly paired with a non-zero exit and a note for
/// stderr (an inconsistent update still prints what it found).
struct Outcome {
    report: Value,
    code: i32,
    note: Option<String>,
}

impl From<Value> for Outcome {
    fn from(report: Value) -> Self {
        Outcome { report, code: EXIT_OK, note: None }
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(mut o) => {
            round_value(&mut o.report);
            let text = if cli.json { render_json(&o.report) } else { render_text(&o.report) };
            let _ = out.write_all(text.as_bytes());
            if let Some(n) = o.note {
                let _ = writeln!(err, "{n}");
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn cg_options(cli: &Cli) -> CliResult<CgOptions> {
    match cli.tol {
        None => Ok(INFERENCE_CG),
        Some(t) if t > 0.0 && t.is_finite() => Ok(CgOptions { gap_tol: t, ..INFERENCE_CG }),
        Some(t) => Err(input_error(format!("--tol must be positive, got {t}"))),
    }
}

fn load(path: &Path) -> CliResult<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// The knowledge set behind a problem; belief problems become their
/// dominating set, information systems their joint set.
fn knowledge_of(p: &Problem) -> CredalSet {
    match &p.kind {
        ProblemKind::Knowledge(k) => k.clone(),
        ProblemKind::Belief(m) => belief_to_credal(m),
        ProblemKind::Infosys(s) => s.knowledge().clone(),
    }
}

fn mass_of(p: &Problem, path: &Path) -> CliResult<MassFunction> {
    match &p.kind {
        ProblemKind::Belief(m) => Ok(m.clone()),
        _ => Err(input_error(format!("{}: expected a belief problem", path.display()))),
    }
}

fn rule_for(flag: &Option<String>, p: &Problem) -> CliResult<ScoreRule> {
    match flag {
        Some(name) => {
            let payoff = match &p.score {
                Some(ScoreRule::Decisional(u)) => Some(u.clone()),
                _ => None,
            };
            parse_score(name, payoff).map_err(input_error)
        }
        None => Ok(p.score.clone().unwrap_or(ScoreRule::Log)),
    }
}

fn event_label(e: &Event) -> String {
    e.indices().map(|i| e.frame().atoms()[i].as_str()).collect::<Vec<_>>().join(",")
}

fn resolve_event(frame: &Frame, names: &[String]) -> CliResult<Event> {
    for n in names {
        if frame.atom_index(n).is_none() {
            return Err(input_error(format!("--event: unknown atom '{n}'")));
        }
    }
    Ok(frame.event_of(names)?)
}

fn atom_intervals(k: &CredalSet) -> CliResult<Vec<(f64, f64)>> {
    let f = k.frame();
    (0..f.len()).map(|i| k.prob_bounds(&f.atom(i)).map_err(Failure::from)).collect()
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Infer { file, score } => {
            let p = load(file)?;
            let rule = rule_for(score, &p)?;
            let k = knowledge_of(&p);
            let est = min_score_estimate_with(&k, &rule, &cg_options(cli)?)?;
            let atoms: Vec<Value> = k
                .frame()
                .atoms()
                .iter()
                .zip(est.q.probs())
                .map(|(a, q)| json!({"atom": a, "q": q}))
                .collect();
            Ok(json!({
                "command": "infer",
                "score": rule.name(),
                "estimate": atoms,
                "h": est.h_value,
                "certificate_gap": est.certificate_gap,
            })
            .into())
        }
        Command::Bounds { file, event } => {
            let p = load(file)?;
            let k = knowledge_of(&p);
            let events = if event.is_empty() {
                (0..k.frame().len()).map(|i| k.frame().atom(i)).collect()
            } else {
                vec![resolve_event(k.frame(), event)?]
            };
            let mut rows = Vec::with_capacity(events.len());
            for e in &events {
                let (lo, hi) = k.prob_bounds(e)?;
                rows.push(json!({"event": event_label(e), "lower": lo, "upper": hi, "width": hi - lo}));
            }
            Ok(json!({"command": "bounds", "bounds": rows}).into())
        }
        Command::Game { file, score } => {
            let p = load(file)?;
            let rule = rule_for(score, &p)?;
            let k = knowledge_of(&p);
            let b = game_bounds_with(&k, &rule, &cg_options(cli)?)?;
            let mut report = json!({
                "command": "game",
                "score": rule.name(),
                "lower": b.lower,
                "upper": b.upper,
                "coincide": b.upper - b.lower <= 1e-6,
            });
            if let ScoreRule::Decisional(u) = &rule {
                let mm = decisional_maxmin(&k, u)?;
                let mix: Vec<Value> =
                    u.actions().iter().zip(&mm.weights).map(|(a, w)| json!({"action": a, "weight": w})).collect();
                report["maxmin_value"] = json!(mm.value);
                report["maxmin_mix"] = Value::Array(mix);
            }
            Ok(report.into())
        }
        Command::Update(UpdateCmd::Knowledge { a, b }) => update_knowledge(a, b),
        Command::Update(UpdateCmd::Observe { file, event, allow_boundary }) => {
            let p = load(file)?;
            let k = knowledge_of(&p);
            let e = resolve_event(k.frame(), event)?;
            let post = k.condition(&e, *allow_boundary)?;
            let iv = atom_intervals(&post)?;
            let atoms: Vec<Value> = post
                .frame()
                .atoms()
                .iter()
                .zip(&iv)
                .map(|(a, (lo, hi))| json!({"atom": a, "lower": lo, "upper": hi}))
                .collect();
            let verts: Vec<Value> = post.vertices()?.iter().map(|d| json!(d.probs())).collect();
            Ok(json!({
                "command": "update observe",
                "event": event_label(&e),
                "atoms": atoms,
                "vertices": verts,
            })
            .into())
        }
        Command::Belief(cmd) => belief(cmd),
        Command::Infosys(cmd) => infosys(cli, cmd),
        Command::Check(CheckCmd::Proper { score, trials, file }) => {
            let payoff = match file {
                Some(f) => match load(f)?.score {
                    Some(ScoreRule::Decisional(u)) => Some(u),
                    _ => None,
                },
                None => None,
            };
            let payoff = match (score.as_str(), payoff) {
                ("decisional", None) => Some(random_payoff(cli.seed)),
                (_, p) => p,
            };
            let rule = parse_score(score, payoff).map_err(input_error)?;
            let r = check_proper(&rule, *trials, cli.seed)?;
            Ok(json!({
                "command": "check proper",
                "score": rule.name(),
                "seed": cli.seed,
                "trials": r.trials,
                "violations": r.violations,
                "max_violation": r.max_violation,
            })
            .into())
        }
    }
}

/// A 3-action, 4-atom payoff matrix drawn from the seed, for checking the
/// decisional score when no matrix is supplied.
fn random_payoff(seed: u64) -> PayoffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let u = (0..3).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    PayoffMatrix::from_rows(u).expect("well-formed random matrix")
}

fn update_knowledge(a: &Path, b: &Path) -> CliResult<Outcome> {
    let (ka, kb) = (knowledge_of(&load(a)?), knowledge_of(&load(b)?));
    if ka.frame() != kb.frame() {
        return Err(input_error("the two problems declare different frames"));
    }
    for (k, path) in [(&ka, a), (&kb, b)] {
        if k.is_empty() {
            return Err(Failure { code: EXIT_EMPTY, message: format!("{}: knowledge set is empty", path.display()) });
        }
    }
    let joint = ka.intersect(&kb)?;
    if joint.is_empty() {
        return Ok(Outcome {
            report: json!({"command": "update knowledge", "consistent": false}),
            code: EXIT_EMPTY,
            note: Some("inconsistent: the consistency check failed, the two knowledge sets have no member in common".into()),
        });
    }
    let (ia, ib, ij) = (atom_intervals(&ka)?, atom_intervals(&kb)?, atom_intervals(&joint)?);
    let atoms: Vec<Value> = ka
        .frame()
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            json!({
                "atom": name,
                "a": [ia[i].0, ia[i].1],
                "b": [ib[i].0, ib[i].1],
                "updated": [ij[i].0, ij[i].1],
            })
        })
        .collect();
    Ok(json!({"command": "update knowledge", "consistent": true, "atoms": atoms}).into())
}

fn masses_json(m: &MassFunction) -> Vec<Value> {
    m.focal_sets().map(|(e, v)| json!({"focal": event_label(&e), "mass": v})).collect()
}

fn belief(cmd: &BeliefCmd) -> CliResult<Outcome> {
    match cmd {
        BeliefCmd::Tocredal { file } => {
            let m = mass_of(&load(file)?, file)?;
            let k = belief_to_credal(&m);
            let iv = atom_intervals(&k)?;
            let f = m.frame();
            let mut atoms = Vec::with_capacity(f.len());
            for (i, name) in f.atoms().iter().enumerate() {
                let e = f.atom(i);
                atoms.push(json!({
                    "atom": name,
                    "bel": m.bel(&e)?,
                    "pl": m.pl(&e)?,
                    "lower": iv[i].0,
                    "upper": iv[i].1,
                }));
            }
            Ok(json!({
                "command": "belief tocredal",
                "focal": masses_json(&m),
                "constraints": k.constraints().len(),
                "atoms": atoms,
            })
            .into())
        }
        BeliefCmd::Combine { a, b } => {
            let (m1, m2) = (mass_of(&load(a)?, a)?, mass_of(&load(b)?, b)?);
            let kappa = conflict(&m1, &m2)?;
            let m = dempster_combine(&m1, &m2)?;
            Ok(json!({"command": "belief combine", "conflict": kappa, "combined": masses_json(&m)}).into())
        }
        BeliefCmd::Compare { a, b } => {
            let (m1, m2) = (mass_of(&load(a)?, a)?, mass_of(&load(b)?, b)?);
            let r = compare_updating(&m1, &m2)?;
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v.as_object_mut().expect("object").insert("command".into(), json!("belief compare"));
            let v = reorder_first(v, "command");
            let note = r.inconsistent.then(|| {
                "the credal sets do not intersect; Dempster's rule still returns a combination".to_string()
            });
            Ok(Outcome { report: v, code: EXIT_OK, note })
        }
    }
}

fn reorder_first(v: Value, key: &str) -> Value {
    match v {
        Value::Object(mut o) => {
            let mut out = serde_json::Map::new();
            if let Some(x) = o.shift_remove(key) {
                out.insert(key.to_string(), x);
            }
            out.extend(o);
            Value::Object(out)
        }
        other => other,
    }
}

fn channel(q: f64, r: f64) -> CliResult<BinaryChannel> {
    Ok(BinaryChannel::new(q, r, 1)?)
}

fn infosys(cli: &Cli, cmd: &InfosysCmd) -> CliResult<Outcome> {
    match cmd {
        InfosysCmd::Infer { file, score } => {
            let p = load(file)?;
            let sys = match &p.kind {
                ProblemKind::Infosys(s) => s,
                _ => return Err(input_error(format!("{}: expected an infosys problem", file.display()))),
            };
            let rule = rule_for(score, &p)?;
            let est = min_score_joint_with(sys, &rule, &cg_options(cli)?)?;
            let joint: Vec<Value> = sys
                .frames()
                .joint()
                .atoms()
                .iter()
                .zip(est.q.probs())
                .map(|(a, q)| json!({"atom": a, "q": q}))
                .collect();
            let em = sys.frames().e_marginal(&est.q)?;
            let marginal: Vec<Value> = sys
                .frames()
                .hypotheses()
                .atoms()
                .iter()
                .zip(em.probs())
                .map(|(a, q)| json!({"hypothesis": a, "q": q}))
                .collect();
            Ok(json!({
                "command": "infosys infer",
                "score": rule.name(),
                "joint": joint,
                "hypotheses": marginal,
                "conditional_score": est.h_value,
                "certificate_gap": est.certificate_gap,
            })
            .into())
        }
        InfosysCmd::Eq3 { q, r } => {
            let ch = channel(*q, *r)?;
            let p = eq3_solve(*q, *r)?;
            Ok(json!({
                "command": "infosys eq3",
                "q": ch.q(),
                "r": ch.r(),
                "relabeled": ch.relabeled(),
                "p_star": p,
                "residual": eq3_residual(p, ch.q(), ch.r()),
            })
            .into())
        }
        InfosysCmd::PriorStudy { q, r, n } => {
            let ch = channel(*q, *r)?;
            let rows = prior_study(*q, *r, n)?;
            let survey = downplay_survey(&default_survey_grid())?;
            Ok(json!({
                "command": "infosys prior-study",
                "q": ch.q(),
                "r": ch.r(),
                "priors": rows,
                "downplay_survey": survey,
            })
            .into())
        }
        InfosysCmd::Transfer { q, r } => {
            let ch = channel(*q, *r)?;
            let t = posterior_transfer_gap(&ch)?;
            Ok(json!({
                "command": "infosys transfer",
                "q": ch.q(),
                "r": ch.r(),
                "p1": t.p1,
                "p2": t.p2,
                "predictive_transfer": t.predictive_transfer,
                "predictive_joint": t.predictive_joint,
                "gap": t.gap,
            })
            .into())
        }
    }
}
