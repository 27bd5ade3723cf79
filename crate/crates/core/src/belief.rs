//! Dempster-Shafer mass functions, their dominating credal sets, and
//! Dempster's rule of combination.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::credal::{CredalSet, LinearConstraint, Relation};
use crate::error::{Error, Result};
use crate::frame::{Dist, Event, Frame};

/// Subset enumeration limit for this module.
pub const MAX_BELIEF_ATOMS: usize = 12;

/// Frames up to this size get their permutation vertices eagerly.
const EAGER_VERTEX_ATOMS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<u32, f64>,
}

impl MassFunction {
    /// Builds a mass function; repeated focal sets are summed and zero
    /// masses dropped.
    pub fn new(frame: &Frame, masses: &[(Event, f64)]) -> Result<Self> {
        if frame.len() > MAX_BELIEF_ATOMS {
            return Err(Error::validation(format!(
                "belief functions support at most {MAX_BELIEF_ATOMS} atoms, frame has {}",
                frame.len()
            )));
        }
        let mut focal = BTreeMap::new();
        for (e, m) in masses {
            frame.check(e.frame())?;
            if !m.is_finite() || *m < 0.0 {
                return Err(Error::validation(format!("invalid mass {m}")));
            }
            if e.mask() == 0 {
                if *m > 0.0 {
                    return Err(Error::validation("mass on the empty set"));
                }
                continue;
            }
            if *m > 0.0 {
                *focal.entry(e.mask()).or_insert(0.0) += m;
            }
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("masses sum to {total}, not 1")));
        }
        Ok(MassFunction { frame: frame.clone(), focal })
    }

    /// All mass on the whole frame.
    pub fn vacuous(frame: &Frame) -> Result<Self> {
        MassFunction::new(frame, &[(frame.full(), 1.0)])
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn focal_sets(&self) -> impl Iterator<Item = (Event, f64)> + '_ {
        self.focal.iter().map(|(&m, &v)| (self.frame.event(m).unwrap(), v))
    }

    pub fn mass(&self, e: &Event) -> f64 {
        self.focal.get(&e.mask()).copied().unwrap_or(0.0)
    }

    pub fn bel(&self, e: &Event) -> Result<f64> {
        self.frame.check(e.frame())?;
        Ok(self.bel_mask(e.mask()))
    }

    pub fn pl(&self, e: &Event) -> Result<f64> {
        self.frame.check(e.frame())?;
        Ok(self.focal.iter().filter(|(b, _)| *b & e.mask() != 0).map(|(_, m)| m).sum())
    }

    fn bel_mask(&self, a: u32) -> f64 {
        self.focal.iter().filter(|(b, _)| *b & !a == 0).map(|(_, m)| m).sum()
    }

    /// Belief of every subset, indexed by mask (subset-sum transform).
    fn bel_table(&self) -> Vec<f64> {
        let n = self.frame.len();
        let mut t = vec![0.0; 1 << n];
        for (&b, &m) in &self.focal {
            t[b as usize] += m;
        }
        for i in 0..n {
            for mask in 0..(1usize << n) {
                if mask & (1 << i) != 0 {
                    t[mask] += t[mask ^ (1 << i)];
                }
            }
        }
        t
    }
}

pub fn bel(m: &MassFunction, e: &Event) -> Result<f64> {
    m.bel(e)
}

/// Distributions generated by the atom orderings: atom `s(i)` receives
/// `Bel(s(1..i)) - Bel(s(1..i-1))`.
pub fn permutation_vertices(m: &MassFunction) -> Vec<Dist> {
    let n = m.frame.len();
    let table = m.bel_table();
    let mut out: Vec<Dist> = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut push = |perm: &[usize]| {
        let mut p = vec![0.0; n];
        let mut prefix = 0usize;
        for &a in perm {
            let next = prefix | (1 << a);
            p[a] = (table[next] - table[prefix]).max(0.0);
            prefix = next;
        }
        if !out.iter().any(|d| d.probs().iter().zip(&p).all(|(x, y)| (x - y).abs() <= 1e-12)) {
            out.push(Dist::from_solver(&m.frame, p));
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    push(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            push(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// The credal set `{P : P(A) >= Bel(A) for every event A}`.
pub fn belief_to_credal(m: &MassFunction) -> CredalSet {
    let f = &m.frame;
    let full = f.full().mask();
    let table = m.bel_table();
    let cs: Vec<LinearConstraint> = (1..full)
        .map(|a| LinearConstraint::prob_bound(&f.event(a).unwrap(), Relation::Ge, table[a as usize]).unwrap())
        .collect();
    if f.len() <= EAGER_VERTEX_ATOMS {
        CredalSet::from_parts(f, cs, permutation_vertices(m)).unwrap()
    } else {
        CredalSet::from_constraints(f, cs).unwrap()
    }
}

/// Mass on conflicting (disjoint) focal pairs.
pub fn conflict(m1: &MassFunction, m2: &MassFunction) -> Result<f64> {
    m1.frame.check(&m2.frame)?;
    Ok(m1
        .focal
        .iter()
        .flat_map(|(a, x)| m2.focal.iter().filter(move |(b, _)| *a & **b == 0).map(move |(_, y)| x * y))
        .sum())
}

/// Dempster's orthogonal sum.
pub fn dempster_combine(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    m1.frame.check(&m2.frame)?;
    let mut joint: BTreeMap<u32, f64> = BTreeMap::new();
    let mut kappa = 0.0;
    for (&a, &x) in &m1.focal {
        for (&b, &y) in &m2.focal {
            let c = a & b;
            if c == 0 {
                kappa += x * y;
            } else {
                *joint.entry(c).or_insert(0.0) += x * y;
            }
        }
    }
    if kappa >= 1.0 - 1e-12 {
        return Err(Error::TotalConflict);
    }
    let norm: f64 = joint.values().sum();
    for v in joint.values_mut() {
        *v /= norm;
    }
    Ok(MassFunction { frame: m1.frame.clone(), focal: joint })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomComparison {
    pub atom: String,
    /// Interval under Dempster's rule; absent on total conflict.
    pub dempster: Option<(f64, f64)>,
    /// Interval under knowledge updating; absent when the intersection is empty.
    pub intersection: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub conflict: f64,
    pub total_conflict: bool,
    pub inconsistent: bool,
    pub atoms: Vec<AtomComparison>,
}

/// Per-atom probability intervals under Dempster's rule and under
/// intersection of the two credal sets.
pub fn compare_updating(m1: &MassFunction, m2: &MassFunction) -> Result<ComparisonReport> {
    let kappa = conflict(m1, m2)?;
    let combined = match dempster_combine(m1, m2) {
        Ok(m) => Some(belief_to_credal(&m)),
        Err(Error::TotalConflict) => None,
        Err(e) => return Err(e),
    };
    let k = belief_to_credal(m1).intersect(&belief_to_credal(m2))?;
    let inconsistent = k.is_empty();
    let f = &m1.frame;
    let atoms = (0..f.len())
        .map(|i| {
            let e = f.atom(i);
            let dempster = combined.as_ref().map(|c| c.prob_bounds(&e)).transpose()?;
            let intersection = if inconsistent { None } else { Some(k.prob_bounds(&e)?) };
            Ok(AtomComparison { atom: f.atoms()[i].clone(), dempster, intersection })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonReport { conflict: kappa, total_conflict: combined.is_none(), inconsistent, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Frame {
        Frame::new(&["a", "b"]).unwrap()
    }

    fn mf(f: &Frame, masses: &[(&[&str], f64)]) -> MassFunction {
        let ms: Vec<(Event, f64)> = masses.iter().map(|(s, v)| (f.event_of(s).unwrap(), *v)).collect();
        MassFunction::new(f, &ms).unwrap()
    }

    #[test]
    fn bel_examples() {
        let f = ab();
        let m = mf(&f, &[(&["a"], 0.3), (&["a", "b"], 0.7)]);
        assert_eq!(m.bel(&f.event_of(&["a"]).unwrap()).unwrap(), 0.3);
        assert_eq!(m.bel(&f.event_of(&["b"]).unwrap()).unwrap(), 0.0);
        assert!((m.bel(&f.full()).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.pl(&f.event_of(&["b"]).unwrap()).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn mass_validation() {
        let f = ab();
        assert!(MassFunction::new(&f, &[(f.empty(), 0.5), (f.full(), 0.5)]).is_err());
        assert!(MassFunction::new(&f, &[(f.full(), 0.5)]).is_err());
        assert!(MassFunction::new(&f, &[(f.full(), -0.5), (f.atom(0), 1.5)]).is_err());
        assert!(MassFunction::vacuous(&Frame::numbered(13).unwrap()).is_err());
    }

    #[test]
    fn to_credal_examples() {
        let f = ab();
        let vac = belief_to_credal(&MassFunction::vacuous(&f).unwrap());
        assert_eq!(vac.prob_bounds(&f.atom(0)).unwrap(), (0.0, 1.0));
        assert_eq!(vac.vertices().unwrap().len(), 2);

        let k = belief_to_credal(&mf(&f, &[(&["a"], 0.3), (&["a", "b"], 0.7)]));
        let v = k.vertices().unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|d| d.max_abs_diff(&Dist::from_probs(&f, vec![0.3, 0.7]).unwrap()) < 1e-12));
        assert!(v.iter().any(|d| d.max_abs_diff(&Dist::from_probs(&f, vec![1.0, 0.0]).unwrap()) < 1e-12));
        let (lo, hi) = k.prob_bounds(&f.atom(0)).unwrap();
        assert!((lo - 0.3).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let f3 = Frame::numbered(3).unwrap();
        let bayes = mf(&f3, &[(&["a1"], 0.2), (&["a2"], 0.3), (&["a3"], 0.5)]);
        let k = belief_to_credal(&bayes);
        let v = k.vertices().unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].max_abs_diff(&Dist::from_probs(&f3, vec![0.2, 0.3, 0.5]).unwrap()) < 1e-12);
    }

    #[test]
    fn permutation_vertices_match_double_description() {
        let f = Frame::numbered(3).unwrap();
        let m = mf(&f, &[(&["a1"], 0.2), (&["a1", "a2"], 0.3), (&["a2", "a3"], 0.1), (&["a1", "a2", "a3"], 0.4)]);
        let perm = permutation_vertices(&m);
        let k = belief_to_credal(&m);
        let hk = CredalSet::from_constraints(&f, k.constraints().to_vec()).unwrap();
        let dd = hk.vertices().unwrap();
        assert_eq!(perm.len(), dd.len());
        for v in &perm {
            assert!(dd.iter().any(|d| d.max_abs_diff(v) < 1e-9));
        }
    }

    #[test]
    fn large_frames_enumerate_lazily() {
        let f = Frame::numbered(9).unwrap();
        let m = mf(&f, &[(&["a1"], 0.5), (&["a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"], 0.5)]);
        let k = belief_to_credal(&m);
        let (lo, hi) = k.prob_bounds(&f.atom(0)).unwrap();
        assert!((lo - 0.5).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn combine_examples() {
        let f = ab();
        let m2 = mf(&f, &[(&["a"], 0.3), (&["a", "b"], 0.7)]);
        let out = dempster_combine(&MassFunction::vacuous(&f).unwrap(), &m2).unwrap();
        assert_eq!(out, m2);

        let m1 = mf(&f, &[(&["a"], 0.5), (&["a", "b"], 0.5)]);
        let out = dempster_combine(&m1, &m1).unwrap();
        assert!((out.mass(&f.atom(0)) - 0.75).abs() < 1e-15);
        assert!((out.mass(&f.full()) - 0.25).abs() < 1e-15);

        let f3 = Frame::new(&["a", "b", "c"]).unwrap();
        let z1 = mf(&f3, &[(&["a"], 0.99), (&["b"], 0.01)]);
        let z2 = mf(&f3, &[(&["c"], 0.99), (&["b"], 0.01)]);
        let out = dempster_combine(&z1, &z2).unwrap();
        assert!((out.mass(&f3.event_of(&["b"]).unwrap()) - 1.0).abs() < 1e-12);
        assert!((conflict(&z1, &z2).unwrap() - 0.9999).abs() < 1e-12);

        let x = mf(&f, &[(&["a"], 1.0)]);
        let y = mf(&f, &[(&["b"], 1.0)]);
        assert_eq!(dempster_combine(&x, &y), Err(Error::TotalConflict));
    }

    #[test]
    fn compare_examples() {
        let f = ab();
        let vac = MassFunction::vacuous(&f).unwrap();
        let r = compare_updating(&vac, &vac).unwrap();
        assert!(!r.inconsistent);
        for a in &r.atoms {
            assert_eq!(a.dempster, Some((0.0, 1.0)));
            assert_eq!(a.intersection, Some((0.0, 1.0)));
        }

        let m1 = mf(&f, &[(&["a"], 0.3), (&["a", "b"], 0.7)]);
        let r = compare_updating(&m1, &vac).unwrap();
        let d = r.atoms[0].dempster.unwrap();
        let k = r.atoms[0].intersection.unwrap();
        assert!((d.0 - 0.3).abs() < 1e-12 && (d.1 - 1.0).abs() < 1e-12);
        assert!((k.0 - 0.3).abs() < 1e-12 && (k.1 - 1.0).abs() < 1e-12);

        let f3 = Frame::new(&["a", "b", "c"]).unwrap();
        let z1 = mf(&f3, &[(&["a"], 0.99), (&["b"], 0.01)]);
        let z2 = mf(&f3, &[(&["c"], 0.99), (&["b"], 0.01)]);
        let r = compare_updating(&z1, &z2).unwrap();
        assert!(r.inconsistent && !r.total_conflict);
        let b = r.atoms[1].dempster.unwrap();
        assert!((b.0 - 1.0).abs() < 1e-9 && (b.1 - 1.0).abs() < 1e-9);
        assert!(r.atoms.iter().all(|a| a.intersection.is_none()));
    }
}
