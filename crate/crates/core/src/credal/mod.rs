//! Knowledge sets: closed convex polytopes of distributions on a frame.
//!
//! A [`CredalSet`] keeps a constraint (half-space) description, a generator
//! (vertex) description, or both. Whichever one was not supplied is derived
//! on first use and cached. Intersection works on constraints; conditioning
//! and the game solvers work on generators.

mod dd;

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::frame::{Dist, Event, Frame, RandVar};
use crate::optim::lp::{lp_solve, solve_standard, Direction, LpProblem, LpRow, Outcome};

pub use crate::optim::lp::Relation;

/// Membership tolerance for constraints and generators.
pub const MEMBER_TOL: f64 = 1e-8;

/// Probability below which an event counts as null for conditioning.
pub const NULL_EVENT_TOL: f64 = 1e-12;

/// `coeffs . p REL rhs` on a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    frame: Frame,
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

impl LinearConstraint {
    pub fn new(frame: &Frame, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<Self> {
        if coeffs.len() != frame.len() {
            return Err(Error::validation(format!(
                "constraint needs {} coefficients, got {}",
                frame.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !rhs.is_finite() {
            return Err(Error::validation("constraint entries must be finite"));
        }
        Ok(LinearConstraint { frame: frame.clone(), coeffs, relation, rhs })
    }

    /// `P(e) REL value`.
    pub fn prob_bound(e: &Event, relation: Relation, value: f64) -> Result<Self> {
        LinearConstraint::new(e.frame(), e.indicator(), relation, value)
    }

    /// `E[v] REL value`.
    pub fn expectation(v: &RandVar, relation: Relation, value: f64) -> Result<Self> {
        LinearConstraint::new(v.frame(), v.values().to_vec(), relation, value)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn lhs(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().zip(p).map(|(c, x)| c * x).sum()
    }

    pub fn is_satisfied(&self, p: &[f64], tol: f64) -> bool {
        self.relation.holds(self.lhs(p), self.rhs, tol)
    }

    fn lp_row(&self) -> LpRow {
        LpRow::new(self.coeffs.clone(), self.relation, self.rhs)
    }

    /// Homogenized `<=` row `g` with `g . p <= 0` on the simplex, or an
    /// equality row when the relation is `==`.
    fn homogenized(&self) -> (Vec<f64>, bool) {
        let g: Vec<f64> = self.coeffs.iter().map(|c| c - self.rhs).collect();
        match self.relation {
            Relation::Le => (g, false),
            Relation::Ge => (g.into_iter().map(|x| -x).collect(), false),
            Relation::Eq => (g, true),
        }
    }
}

/// Which description was supplied at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepState {
    Constraints,
    Generators,
    Both,
}

#[derive(Clone, Debug)]
pub struct CredalSet {
    frame: Frame,
    state: RepState,
    hrep: OnceLock<Vec<LinearConstraint>>,
    // generators; an empty list means the set is empty
    vrep: OnceLock<Vec<Dist>>,
}

fn dedup_dists(gens: Vec<Dist>, tol: f64) -> Vec<Dist> {
    let mut out: Vec<Dist> = Vec::with_capacity(gens.len());
    for g in gens {
        if !out.iter().any(|o| o.max_abs_diff(&g) <= tol) {
            out.push(g);
        }
    }
    out
}

impl CredalSet {
    /// The set of all distributions on `frame`.
    pub fn vacuous(frame: &Frame) -> Self {
        let gens: Vec<Dist> = (0..frame.len()).map(|i| Dist::point_mass(frame, i)).collect();
        CredalSet {
            frame: frame.clone(),
            state: RepState::Both,
            hrep: OnceLock::from(Vec::new()),
            vrep: OnceLock::from(gens),
        }
    }

    /// Constraint description; feasibility is not checked here.
    pub fn from_constraints(frame: &Frame, cs: Vec<LinearConstraint>) -> Result<Self> {
        for c in &cs {
            frame.check(c.frame())?;
        }
        Ok(CredalSet {
            frame: frame.clone(),
            state: RepState::Constraints,
            hrep: OnceLock::from(cs),
            vrep: OnceLock::new(),
        })
    }

    /// Convex hull of `gens`; they need not be extreme points.
    pub fn from_generators(frame: &Frame, gens: Vec<Dist>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::EmptySet);
        }
        for g in &gens {
            frame.check(g.frame())?;
        }
        Ok(CredalSet {
            frame: frame.clone(),
            state: RepState::Generators,
            hrep: OnceLock::new(),
            vrep: OnceLock::from(dedup_dists(gens, 1e-9)),
        })
    }

    /// Both descriptions at once. The caller guarantees they agree.
    pub fn from_parts(frame: &Frame, cs: Vec<LinearConstraint>, gens: Vec<Dist>) -> Result<Self> {
        for c in &cs {
            frame.check(c.frame())?;
        }
        for g in &gens {
            frame.check(g.frame())?;
        }
        Ok(CredalSet {
            frame: frame.clone(),
            state: RepState::Both,
            hrep: OnceLock::from(cs),
            vrep: OnceLock::from(dedup_dists(gens, 1e-9)),
        })
    }

    /// A single distribution, described by equalities `p_i = v_i`.
    pub fn singleton(p: &Dist) -> Self {
        let f = p.frame();
        let cs: Vec<LinearConstraint> = (0..f.len())
            .map(|i| LinearConstraint::prob_bound(&f.atom(i), Relation::Eq, p.probs()[i]).unwrap())
            .collect();
        CredalSet {
            frame: f.clone(),
            state: RepState::Both,
            hrep: OnceLock::from(cs),
            vrep: OnceLock::from(vec![p.clone()]),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn rep_state(&self) -> RepState {
        self.state
    }

    /// Constraint list, deriving it from the generators when needed.
    pub fn constraints(&self) -> &[LinearConstraint] {
        self.hrep.get_or_init(|| {
            let pts: Vec<Vec<f64>> = self.vrep.get().unwrap().iter().map(|d| d.probs().to_vec()).collect();
            let facets = dd::hull_facets(&pts);
            facets
                .le
                .into_iter()
                .map(|(c, d)| LinearConstraint::new(&self.frame, c, Relation::Le, d).unwrap())
                .chain(
                    facets
                        .eq
                        .into_iter()
                        .map(|(c, d)| LinearConstraint::new(&self.frame, c, Relation::Eq, d).unwrap()),
                )
                .collect()
        })
    }

    fn generators(&self) -> &[Dist] {
        self.vrep.get_or_init(|| {
            let n = self.frame.len();
            let (mut ineq, mut eq) = (Vec::new(), Vec::new());
            for c in self.hrep.get().unwrap() {
                let (g, is_eq) = c.homogenized();
                if is_eq {
                    eq.push(g);
                } else {
                    ineq.push(g);
                }
            }
            dd::simplex_vertices(n, &ineq, &eq)
                .into_iter()
                .map(|p| Dist::from_solver(&self.frame, p))
                .collect()
        })
    }

    /// Extreme points (or, for generator-described sets, the generators).
    pub fn vertices(&self) -> Result<&[Dist]> {
        let g = self.generators();
        if g.is_empty() {
            Err(Error::EmptySet)
        } else {
            Ok(g)
        }
    }

    fn has_authoritative_hrep(&self) -> bool {
        self.state != RepState::Generators
    }

    pub fn is_empty(&self) -> bool {
        if !self.has_authoritative_hrep() {
            return self.generators().is_empty();
        }
        let n = self.frame.len();
        let prob = LpProblem {
            objective: vec![0.0; n],
            rows: self.constraints().iter().map(|c| c.lp_row()).collect(),
        };
        !lp_solve(&prob, Direction::Min).is_optimal()
    }

    pub fn contains(&self, p: &Dist) -> Result<bool> {
        self.frame.check(p.frame())?;
        if self.has_authoritative_hrep() {
            return Ok(self.constraints().iter().all(|c| c.is_satisfied(p.probs(), MEMBER_TOL)));
        }
        Ok(hull_distance(self.generators(), p.probs()) <= MEMBER_TOL)
    }

    /// `(min, max)` of the linear functional `c . p` over the set.
    pub fn linear_bounds(&self, c: &[f64]) -> Result<(f64, f64)> {
        if c.len() != self.frame.len() {
            return Err(Error::validation("functional length does not match the frame"));
        }
        let value = |d: &Dist| d.probs().iter().zip(c).map(|(p, x)| p * x).sum::<f64>();
        if !self.has_authoritative_hrep() || self.vrep.get().is_some() {
            let g = self.vertices()?;
            let lo = g.iter().map(value).fold(f64::INFINITY, f64::min);
            let hi = g.iter().map(value).fold(f64::NEG_INFINITY, f64::max);
            return Ok((lo, hi));
        }
        let prob = LpProblem {
            objective: c.to_vec(),
            rows: self.constraints().iter().map(|c| c.lp_row()).collect(),
        };
        let lo = lp_solve(&prob, Direction::Min);
        let hi = lp_solve(&prob, Direction::Max);
        match (lo.value, hi.value) {
            (Some(l), Some(h)) => Ok((l, h.max(l))),
            _ => Err(Error::EmptySet),
        }
    }

    /// Minimum of `c . p` by LP over the constraint description. Generator
    /// sets fall back to a scan of their generators.
    pub fn min_linear_lp(&self, c: &[f64]) -> Result<f64> {
        if !self.has_authoritative_hrep() {
            return self.linear_bounds(c).map(|b| b.0);
        }
        let prob = LpProblem { objective: c.to_vec(), rows: self.lp_rows() };
        lp_solve(&prob, Direction::Min).value.ok_or(Error::EmptySet)
    }

    pub(crate) fn lp_rows(&self) -> Vec<LpRow> {
        self.constraints().iter().map(|c| c.lp_row()).collect()
    }

    pub(crate) fn has_constraint_form(&self) -> bool {
        self.has_authoritative_hrep()
    }

    /// Lower and upper probability of `e` over the set.
    pub fn prob_bounds(&self, e: &Event) -> Result<(f64, f64)> {
        self.frame.check(e.frame())?;
        let (lo, hi) = self.linear_bounds(&e.indicator())?;
        Ok((lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
    }

    /// Knowledge updating: both constraint lists together.
    pub fn intersect(&self, other: &CredalSet) -> Result<CredalSet> {
        self.frame.check(&other.frame)?;
        let mut cs = self.constraints().to_vec();
        cs.extend_from_slice(other.constraints());
        CredalSet::from_constraints(&self.frame, cs)
    }

    /// Whether every vertex of `self` lies in `other`.
    pub fn is_subset(&self, other: &CredalSet) -> Result<bool> {
        self.frame.check(&other.frame)?;
        for v in self.vertices()? {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Information updating: condition every member on `e`.
    ///
    /// Strict by default: the lower probability of `e` must be positive.
    /// With `allow_boundary`, members with `P(e) = 0` are dropped and the
    /// result is the closure of the image of the remaining members.
    pub fn condition(&self, e: &Event, allow_boundary: bool) -> Result<CredalSet> {
        self.frame.check(e.frame())?;
        let (lo, hi) = self.prob_bounds(e)?;
        if hi <= NULL_EVENT_TOL {
            return Err(Error::EventImpossible);
        }
        if lo <= NULL_EVENT_TOL && !allow_boundary {
            return Err(Error::EventPossiblyNull);
        }
        let sub = self.frame.sub_frame(e)?;
        let gens: Vec<Dist> = self
            .vertices()?
            .iter()
            .filter(|v| v.prob(e).unwrap() > NULL_EVENT_TOL)
            .map(|v| v.condition(e))
            .collect::<Result<_>>()?;
        CredalSet::from_generators(&sub, gens)
    }
}

/// L1 distance from `p` to the convex hull of `gens`, by LP.
fn hull_distance(gens: &[Dist], p: &[f64]) -> f64 {
    let m = gens.len();
    let n = p.len();
    // variables: lambda (m), r+ (n), r- (n)
    let nv = m + 2 * n;
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut c = vec![0.0; nv];
        for (j, g) in gens.iter().enumerate() {
            c[j] = g.probs()[i];
        }
        c[m + i] = 1.0;
        c[m + n + i] = -1.0;
        rows.push(LpRow::new(c, Relation::Eq, p[i]));
    }
    let mut sum = vec![0.0; nv];
    sum[..m].iter_mut().for_each(|v| *v = 1.0);
    rows.push(LpRow::new(sum, Relation::Eq, 1.0));
    let mut obj = vec![0.0; nv];
    obj[m..].iter_mut().for_each(|v| *v = 1.0);
    match solve_standard(&obj, &rows, Direction::Min) {
        Outcome::Optimal { value, .. } => value,
        _ => f64::INFINITY,
    }
}

pub fn vacuous(frame: &Frame) -> CredalSet {
    CredalSet::vacuous(frame)
}

pub fn from_constraints(frame: &Frame, cs: Vec<LinearConstraint>) -> Result<CredalSet> {
    CredalSet::from_constraints(frame, cs)
}

pub fn is_empty(k: &CredalSet) -> bool {
    k.is_empty()
}

pub fn contains(k: &CredalSet, p: &Dist) -> Result<bool> {
    k.contains(p)
}

pub fn prob_bounds(k: &CredalSet, e: &Event) -> Result<(f64, f64)> {
    k.prob_bounds(e)
}

pub fn intersect(k1: &CredalSet, k2: &CredalSet) -> Result<CredalSet> {
    k1.intersect(k2)
}

pub fn is_subset(k1: &CredalSet, k2: &CredalSet) -> Result<bool> {
    k1.is_subset(k2)
}

pub fn vertices(k: &CredalSet) -> Result<Vec<Dist>> {
    k.vertices().map(|v| v.to_vec())
}

pub fn condition_set(k: &CredalSet, e: &Event, allow_boundary: bool) -> Result<CredalSet> {
    k.condition(e, allow_boundary)
}
