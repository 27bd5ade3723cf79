//! Finite frames, their event algebras, distributions and random variables.
//!
//! A [`Frame`] is an ordered list of at most [`MAX_ATOMS`] named atoms.
//! Events are subsets of atoms stored as bitmasks, so the whole Boolean
//! algebra of a frame fits in a `u32`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_ATOMS: usize = 24;

/// Tolerance on `|sum(p) - 1|` for a valid distribution.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    atoms: Arc<[String]>,
}

impl Frame {
    pub fn new<S: AsRef<str>>(atoms: &[S]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::validation("frame needs at least one atom"));
        }
        if atoms.len() > MAX_ATOMS {
            return Err(Error::validation(format!(
                "frame has {} atoms, at most {MAX_ATOMS} supported",
                atoms.len()
            )));
        }
        let mut names: Vec<String> = Vec::with_capacity(atoms.len());
        for a in atoms {
            let a = a.as_ref();
            if a.is_empty() {
                return Err(Error::validation("atom names must be non-empty"));
            }
            if names.iter().any(|n| n == a) {
                return Err(Error::validation(format!("duplicate atom '{a}'")));
            }
            names.push(a.to_string());
        }
        Ok(Frame { atoms: names.into() })
    }

    /// A frame with atoms named `a1..an`.
    pub fn numbered(n: usize) -> Result<Self> {
        let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
        Frame::new(&names)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub(crate) fn full_mask(&self) -> u32 {
        if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        }
    }

    pub fn event(&self, mask: u32) -> Result<Event> {
        if mask & !self.full_mask() != 0 {
            return Err(Error::validation(format!(
                "event mask {mask:#x} exceeds a frame of {} atoms",
                self.len()
            )));
        }
        Ok(Event { frame: self.clone(), mask })
    }

    pub fn event_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Event> {
        let mut mask = 0u32;
        for n in names {
            let i = self
                .atom_index(n.as_ref())
                .ok_or_else(|| Error::validation(format!("unknown atom '{}'", n.as_ref())))?;
            mask |= 1 << i;
        }
        Ok(Event { frame: self.clone(), mask })
    }

    pub fn atom(&self, i: usize) -> Event {
        assert!(i < self.len(), "atom index out of range");
        Event { frame: self.clone(), mask: 1 << i }
    }

    pub fn full(&self) -> Event {
        Event { frame: self.clone(), mask: self.full_mask() }
    }

    pub fn empty(&self) -> Event {
        Event { frame: self.clone(), mask: 0 }
    }

    /// The frame made of the atoms of `e`, in their original order.
    pub fn sub_frame(&self, e: &Event) -> Result<Frame> {
        self.check(e.frame())?;
        let names: Vec<&str> = e.indices().map(|i| self.atoms[i].as_str()).collect();
        Frame::new(&names)
    }

    pub(crate) fn check(&self, other: &Frame) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame{:?}", &*self.atoms)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Event {
    frame: Frame,
    mask: u32,
}

impl Event {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn contains_atom(&self, i: usize) -> bool {
        self.mask & (1 << i) != 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.frame.len()).filter(move |&i| self.contains_atom(i))
    }

    pub fn count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn complement(&self) -> Event {
        Event { frame: self.frame.clone(), mask: !self.mask & self.frame.full_mask() }
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.frame.check(&other.frame)?;
        Ok(Event { frame: self.frame.clone(), mask: self.mask | other.mask })
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.frame.check(&other.frame)?;
        Ok(Event { frame: self.frame.clone(), mask: self.mask & other.mask })
    }

    pub fn is_subset_of(&self, other: &Event) -> bool {
        self.mask & !other.mask == 0
    }

    /// Indicator vector of the event.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.frame.len()).map(|i| if self.contains_atom(i) { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.indices().map(|i| self.frame.atoms[i].as_str()).collect();
        write!(f, "Event{names:?}")
    }
}

/// A probability distribution over the atoms of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    frame: Frame,
    p: Vec<f64>,
}

impl Dist {
    /// Normalizes non-negative weights into a distribution.
    pub fn new(frame: &Frame, weights: &[f64]) -> Result<Self> {
        if weights.len() != frame.len() {
            return Err(Error::validation(format!(
                "expected {} weights, got {}",
                frame.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::validation(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(Dist { frame: frame.clone(), p: weights.iter().map(|w| w / total).collect() })
    }

    /// Wraps an already-normalized vector, checking the simplex invariant.
    pub fn from_probs(frame: &Frame, p: Vec<f64>) -> Result<Self> {
        if p.len() != frame.len() {
            return Err(Error::validation(format!(
                "expected {} probabilities, got {}",
                frame.len(),
                p.len()
            )));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::validation(format!("invalid probability {x}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::validation(format!("probabilities sum to {s}, not 1")));
        }
        Ok(Dist { frame: frame.clone(), p })
    }

    pub fn uniform(frame: &Frame) -> Self {
        let n = frame.len();
        Dist { frame: frame.clone(), p: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(frame: &Frame, i: usize) -> Self {
        let mut p = vec![0.0; frame.len()];
        p[i] = 1.0;
        Dist { frame: frame.clone(), p }
    }

    /// Clamps round-off negatives and renormalizes; used on solver output.
    pub(crate) fn from_solver(frame: &Frame, mut p: Vec<f64>) -> Self {
        for x in p.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s: f64 = p.iter().sum();
        for x in p.iter_mut() {
            *x /= s;
        }
        Dist { frame: frame.clone(), p }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn prob(&self, e: &Event) -> Result<f64> {
        self.frame.check(e.frame())?;
        Ok(e.indices().map(|i| self.p[i]).sum())
    }

    pub fn expectation(&self, v: &RandVar) -> Result<f64> {
        self.frame.check(v.frame())?;
        Ok(self.p.iter().zip(v.values()).map(|(p, x)| p * x).sum())
    }

    /// Classical conditioning; the result lives on the sub-frame of `e`.
    pub fn condition(&self, e: &Event) -> Result<Dist> {
        let pe = self.prob(e)?;
        if pe <= 0.0 {
            return Err(Error::NullEvent);
        }
        let frame = self.frame.sub_frame(e)?;
        let p = e.indices().map(|i| self.p[i] / pe).collect();
        Ok(Dist { frame, p })
    }

    pub fn max_abs_diff(&self, other: &Dist) -> f64 {
        self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandVar {
    frame: Frame,
    x: Vec<f64>,
}

impl RandVar {
    pub fn new(frame: &Frame, x: Vec<f64>) -> Result<Self> {
        if x.len() != frame.len() {
            return Err(Error::validation(format!(
                "random variable needs {} values, got {}",
                frame.len(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("random variable values must be finite"));
        }
        Ok(RandVar { frame: frame.clone(), x })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }
}

pub fn make_dist(frame: &Frame, weights: &[f64]) -> Result<Dist> {
    Dist::new(frame, weights)
}

pub fn prob(dist: &Dist, e: &Event) -> Result<f64> {
    dist.prob(e)
}

pub fn expectation(dist: &Dist, v: &RandVar) -> Result<f64> {
    dist.expectation(v)
}

pub fn condition_dist(dist: &Dist, e: &Event) -> Result<Dist> {
    dist.condition(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn make_dist_examples() {
        let f3 = Frame::numbered(3).unwrap();
        let d = make_dist(&f3, &[1.0, 1.0, 1.0]).unwrap();
        assert!(d.probs().iter().all(|p| close(*p, 1.0 / 3.0, 1e-15)));

        let f2 = Frame::numbered(2).unwrap();
        let d = make_dist(&f2, &[2.0, 6.0]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);

        assert_eq!(make_dist(&f2, &[0.0, 0.0]), Err(Error::ZeroMass));
        assert!(matches!(make_dist(&f2, &[-1.0, 2.0]), Err(Error::Validation(_))));
        assert!(matches!(make_dist(&f2, &[1.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn frame_validation() {
        assert!(Frame::new::<&str>(&[]).is_err());
        assert!(Frame::new(&["a", "a"]).is_err());
        assert!(Frame::new(&["a", ""]).is_err());
        assert!(Frame::numbered(24).is_ok());
        assert!(Frame::numbered(25).is_err());
        let f = Frame::new(&["x", "y"]).unwrap();
        assert!(f.event(0b100).is_err());
        assert!(f.event_of(&["z"]).is_err());
    }

    #[test]
    fn prob_examples() {
        let f = Frame::numbered(3).unwrap();
        let d = Dist::from_probs(&f, vec![0.2, 0.3, 0.5]).unwrap();
        let e = f.event_of(&["a1", "a2"]).unwrap();
        assert!(close(d.prob(&e).unwrap(), 0.5, 1e-15));
        assert!(close(d.prob(&f.full()).unwrap(), 1.0, 1e-15));
        assert_eq!(d.prob(&f.empty()).unwrap(), 0.0);

        let other = Frame::numbered(4).unwrap();
        assert_eq!(d.prob(&other.full()), Err(Error::FrameMismatch));
    }

    #[test]
    fn expectation_examples() {
        let f3 = Frame::numbered(3).unwrap();
        let x = RandVar::new(&f3, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(close(Dist::uniform(&f3).expectation(&x).unwrap(), 1.0, 1e-15));
        assert_eq!(Dist::point_mass(&f3, 2).expectation(&x).unwrap(), 2.0);

        let f2 = Frame::numbered(2).unwrap();
        let d = Dist::from_probs(&f2, vec![0.25, 0.75]).unwrap();
        let x = RandVar::new(&f2, vec![0.0, 4.0]).unwrap();
        assert_eq!(d.expectation(&x).unwrap(), 3.0);
        assert!(RandVar::new(&f2, vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn condition_examples() {
        let f = Frame::numbered(3).unwrap();
        let d = Dist::from_probs(&f, vec![0.2, 0.3, 0.5]).unwrap();
        let e = f.event_of(&["a1", "a2"]).unwrap();
        let c = d.condition(&e).unwrap();
        assert_eq!(c.frame().atoms(), &["a1".to_string(), "a2".to_string()]);
        assert!(close(c.probs()[0], 0.4, 1e-15) && close(c.probs()[1], 0.6, 1e-15));

        let f4 = Frame::numbered(4).unwrap();
        let c = Dist::uniform(&f4).condition(&f4.event(0b0101).unwrap()).unwrap();
        assert_eq!(c.probs(), &[0.5, 0.5]);

        let f2 = Frame::numbered(2).unwrap();
        let d = Dist::point_mass(&f2, 0);
        assert_eq!(d.condition(&f2.atom(1)), Err(Error::NullEvent));
    }

    #[test]
    fn boolean_lattice() {
        let f = Frame::numbered(5).unwrap();
        for a in 0..32u32 {
            let e = f.event(a).unwrap();
            assert_eq!(e.complement().complement(), e);
            for b in 0..32u32 {
                let g = f.event(b).unwrap();
                assert_eq!(
                    e.union(&g).unwrap().complement(),
                    e.complement().intersection(&g.complement()).unwrap()
                );
                assert_eq!(
                    e.intersection(&g).unwrap().complement(),
                    e.complement().union(&g.complement()).unwrap()
                );
            }
        }
    }

    fn weights_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, 2..8)
            .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 1e-3)
    }

    proptest! {
        #[test]
        fn additivity(w in weights_strategy(), a in any::<u32>(), b in any::<u32>()) {
            let f = Frame::numbered(w.len()).unwrap();
            let d = make_dist(&f, &w).unwrap();
            let e = f.event(a & f.full_mask()).unwrap();
            let g = f.event(b & f.full_mask()).unwrap();
            let lhs = d.prob(&e.union(&g).unwrap()).unwrap() + d.prob(&e.intersection(&g).unwrap()).unwrap();
            let rhs = d.prob(&e).unwrap() + d.prob(&g).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn chain_rule(w in proptest::collection::vec(0.01f64..1.0, 2..8), a in any::<u32>(), b in any::<u32>()) {
            let f = Frame::numbered(w.len()).unwrap();
            let d = make_dist(&f, &w).unwrap();
            let outer = (a & f.full_mask()) | 1;
            let inner = (b & outer) | 1;
            let e = f.event(outer).unwrap();
            let e2 = f.event(inner).unwrap();
            let direct = d.condition(&e2).unwrap();
            let first = d.condition(&e).unwrap();
            // re-express e2 on the sub-frame of e
            let sub_mask = e.indices().enumerate()
                .filter(|(_, i)| e2.contains_atom(*i))
                .fold(0u32, |m, (k, _)| m | (1 << k));
            let nested = first.condition(&first.frame().event(sub_mask).unwrap()).unwrap();
            prop_assert_eq!(nested.frame(), direct.frame());
            prop_assert!(nested.max_abs_diff(&direct) <= 1e-12);
            let s: f64 = nested.probs().iter().sum();
            prop_assert!((s - 1.0).abs() <= SIMPLEX_TOL);
        }
    }
}
