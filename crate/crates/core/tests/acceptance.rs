//! Acceptance checks, one test per criterion. Each prints a single
//! PASS/FAIL line to stderr (bypassing the test harness capture) before
//! asserting.

use std::io::Write;

use knowset::belief::{bel, belief_to_credal, compare_updating, MassFunction};
use knowset::credal::{CredalSet, LinearConstraint, Relation};
use knowset::inference::{game_bounds, min_score_estimate};
use knowset::infosys::{best_prior, binary_joint, conditional_score, eq3_solve, posterior_transfer_gap, BinaryChannel};
use knowset::optim::minimize_1d;
use knowset::scoring::{check_proper, PayoffMatrix, ScoreRule};
use knowset::{Dist, Event, Frame, RandVar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("\nacceptance {id:>2} {name:<28} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// A random polytope around an interior point: each constraint keeps the
/// point feasible with some slack.
fn random_polytope(rng: &mut ChaCha8Rng, fr: &Frame, m: usize) -> CredalSet {
    let n = fr.len();
    let c = random_dist(rng, n);
    let cs = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let at: f64 = a.iter().zip(&c).map(|(x, y)| x * y).sum();
            LinearConstraint::new(fr, a, Relation::Le, at + rng.gen_range(0.0..0.3)).unwrap()
        })
        .collect();
    CredalSet::from_constraints(fr, cs).unwrap()
}

#[test]
fn criterion_01_propriety_sweep() {
    let log = check_proper(&ScoreRule::Log, 10_000, 1).unwrap();
    let quad = check_proper(&ScoreRule::Quadratic, 10_000, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut dec_trials, mut dec_viol) = (0, 0);
    for k in 0..100 {
        let u = (0..3).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let rule = ScoreRule::Decisional(PayoffMatrix::from_rows(u).unwrap());
        let r = check_proper(&rule, 100, 100 + k).unwrap();
        dec_trials += r.trials;
        dec_viol += r.violations;
    }
    let pass = log.violations == 0 && quad.violations == 0 && dec_viol == 0 && dec_trials == 10_000;
    report(
        1,
        "propriety sweep",
        pass,
        format!("violations log={} quad={} decisional={} over {dec_trials}", log.violations, quad.violations, dec_viol),
    );
}

#[test]
fn criterion_02_maxent_matches_gibbs() {
    let mut worst_coord: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for n in 3..=5usize {
        let fr = Frame::numbered(n).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let x = RandVar::new(&fr, xs.clone()).unwrap();
        for frac in [0.2, 0.4, 0.55, 0.8] {
            let mean = frac * (n - 1) as f64;
            // scalar dual: q_i proportional to exp(lambda x_i), lambda by bisection
            let gibbs = |lam: f64| -> Vec<f64> {
                let w: Vec<f64> = xs.iter().map(|v| (lam * v).exp()).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect()
            };
            let m = |lam: f64| gibbs(lam).iter().zip(&xs).map(|(p, v)| p * v).sum::<f64>();
            let (mut lo, mut hi) = (-50.0, 50.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if m(mid) < mean {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = gibbs(0.5 * (lo + hi));

            let k = CredalSet::from_constraints(&fr, vec![LinearConstraint::expectation(&x, Relation::Eq, mean).unwrap()])
                .unwrap();
            let est = min_score_estimate(&k, &ScoreRule::Log).unwrap();
            for (a, b) in est.q.probs().iter().zip(&oracle) {
                worst_coord = worst_coord.max((a - b).abs());
            }
            worst_gap = worst_gap.max(est.certificate_gap);
        }
    }
    report(
        2,
        "maxent vs Gibbs oracle",
        worst_coord <= 1e-6 && worst_gap <= 1e-8,
        format!("max coord err {worst_coord:.3e}, max gap {worst_gap:.3e}"),
    );
}

#[test]
fn criterion_03_minimax_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut worst_cert, mut worst_spread): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(2..=5);
        let fr = Frame::numbered(n).unwrap();
        let m = rng.gen_range(1..=4);
        let k = random_polytope(&mut rng, &fr, m);
        for rule in [ScoreRule::Log, ScoreRule::Quadratic] {
            let est = min_score_estimate(&k, &rule).unwrap();
            let b = game_bounds(&k, &rule).unwrap();
            worst_cert = worst_cert.max(est.certificate_gap);
            worst_spread = worst_spread.max(b.upper - b.lower);
        }
    }
    report(
        3,
        "minimax equality",
        worst_cert <= 1e-6 && worst_spread <= 1e-6,
        format!("max certificate gap {worst_cert:.3e}, max bound spread {worst_spread:.3e}"),
    );
}

#[test]
fn criterion_04_kyburg_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=4);
        let fr = Frame::numbered(n).unwrap();
        let full = (1u32 << n) - 1;
        let k = rng.gen_range(1..=4);
        let w = random_dist(&mut rng, k);
        let focal: Vec<(Event, f64)> =
            w.iter().map(|&v| (fr.event(rng.gen_range(1..=full)).unwrap(), v)).collect();
        let m = MassFunction::new(&fr, &focal).unwrap();
        let ks = belief_to_credal(&m);
        for mask in 1..=full {
            let e = fr.event(mask).unwrap();
            let lp = ks.min_linear_lp(&e.indicator()).unwrap();
            worst = worst.max((lp - bel(&m, &e).unwrap()).abs());
        }
    }
    report(4, "Kyburg envelope", worst <= 1e-8, format!("max |LP min - Bel| {worst:.3e}"));
}

#[test]
fn criterion_05_knowledge_updating() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut nonempty, mut flagged, mut bad) = (0, 0, 0);
    for t in 0..200 {
        let n = rng.gen_range(2..=5);
        let fr = Frame::numbered(n).unwrap();
        if t % 4 == 3 {
            // built to contradict: P(a1) >= 0.6 against P(a1) <= 0.4
            let a = fr.atom(0);
            let k1 = CredalSet::from_constraints(&fr, vec![LinearConstraint::prob_bound(&a, Relation::Ge, 0.6).unwrap()])
                .unwrap();
            let k2 = CredalSet::from_constraints(&fr, vec![LinearConstraint::prob_bound(&a, Relation::Le, 0.4).unwrap()])
                .unwrap();
            if k1.intersect(&k2).unwrap().is_empty() {
                flagged += 1;
            } else {
                bad += 1;
            }
            continue;
        }
        let (m1, m2) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let k1 = random_polytope(&mut rng, &fr, m1);
        let k2 = random_polytope(&mut rng, &fr, m2);
        let k = k1.intersect(&k2).unwrap();
        if k.is_empty() {
            continue;
        }
        nonempty += 1;
        if !k.is_subset(&k1).unwrap() || !k.is_subset(&k2).unwrap() {
            bad += 1;
        }
        for i in 0..n {
            let e = fr.atom(i);
            let (lo, hi) = k.prob_bounds(&e).unwrap();
            for parent in [&k1, &k2] {
                let (plo, phi) = parent.prob_bounds(&e).unwrap();
                if lo < plo - 1e-9 || hi > phi + 1e-9 {
                    bad += 1;
                }
            }
        }
    }
    report(
        5,
        "knowledge updating",
        bad == 0 && flagged == 50 && nonempty > 0,
        format!("{nonempty} non-empty intersections checked, {flagged}/50 contradictions flagged, {bad} violations"),
    );
}

#[test]
fn criterion_06_information_updating() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);

    // singletons reproduce Bayes
    let mut bayes_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=5);
        let fr = Frame::numbered(n).unwrap();
        let p = Dist::from_probs(&fr, random_dist(&mut rng, n)).unwrap();
        let mask = rng.gen_range(1..(1u32 << n));
        let e = fr.event(mask).unwrap();
        let post = CredalSet::singleton(&p).condition(&e, false).unwrap();
        let got = &post.vertices().unwrap()[0];
        let pe: f64 = e.indices().map(|i| p.probs()[i]).sum();
        for (j, i) in e.indices().enumerate() {
            bayes_err = bayes_err.max((got.probs()[j] - p.probs()[i] / pe).abs());
        }
    }

    // vacuous sets stay vacuous on the sub-frame
    let mut vac_err: f64 = 0.0;
    for n in 2..=5usize {
        let fr = Frame::numbered(n).unwrap();
        let e = fr.event((1u32 << (n - 1)) | 1).unwrap();
        let post = CredalSet::vacuous(&fr).condition(&e, true).unwrap();
        let verts = post.vertices().unwrap();
        let m = e.count();
        if verts.len() != m {
            vac_err = f64::INFINITY;
            continue;
        }
        for j in 0..m {
            let best = verts
                .iter()
                .map(|v| v.probs().iter().enumerate().map(|(i, x)| (x - if i == j { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            vac_err = vac_err.max(best);
        }
    }

    // hull membership of conditioned members
    let (mut members, mut outside) = (0, 0);
    while members < 1000 {
        let n = rng.gen_range(2..=4);
        let fr = Frame::numbered(n).unwrap();
        let k = random_polytope(&mut rng, &fr, 2);
        let e = fr.event(rng.gen_range(1..(1u32 << n))).unwrap();
        let Ok(post) = k.condition(&e, false) else { continue };
        let verts = k.vertices().unwrap().to_vec();
        for _ in 0..50 {
            let w = random_dist(&mut rng, verts.len());
            let mut p = vec![0.0; n];
            for (wj, v) in w.iter().zip(&verts) {
                p.iter_mut().zip(v.probs()).for_each(|(a, b)| *a += wj * b);
            }
            let d = Dist::new(&fr, &p).unwrap();
            if !post.contains(&d.condition(&e).unwrap()).unwrap() {
                outside += 1;
            }
            members += 1;
        }
    }
    report(
        6,
        "information updating",
        bayes_err <= 1e-12 && vac_err <= 1e-9 && outside == 0,
        format!("Bayes err {bayes_err:.3e}, vacuous vertex err {vac_err:.3e}, {outside}/{members} outside hull"),
    );
}

fn grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for qi in 0..5 {
        for ri in 0..=qi + 4 {
            g.push(((55 + 10 * qi) as f64 / 100.0, (5 + 10 * ri) as f64 / 100.0));
        }
    }
    g
}

#[test]
fn criterion_07_eq3_cross_validation() {
    let mut worst: f64 = 0.0;
    for (q, r) in grid() {
        let ch = BinaryChannel::new(q, r, 1).unwrap();
        let pf = ch.product_frame().unwrap();
        let root = eq3_solve(q, r).unwrap();
        let golden = minimize_1d(
            |p| conditional_score(&pf, &binary_joint(p, &ch).unwrap(), &ScoreRule::Log).unwrap(),
            0.0,
            1.0,
            1e-10,
        )
        .unwrap();
        worst = worst.max((root - golden).abs());
    }
    let mut sym: f64 = 0.0;
    for q in [0.55, 0.65, 0.75, 0.85, 0.95] {
        sym = sym.max((eq3_solve(q, 1.0 - q).unwrap() - 0.5).abs());
    }
    report(
        7,
        "prior root vs golden section",
        worst <= 1e-6 && sym <= 1e-9,
        format!("max |root - argmin| {worst:.3e}, symmetric err {sym:.3e}"),
    );
}

#[test]
fn criterion_08_prior_depends_on_n() {
    let ch = BinaryChannel::new(0.9, 0.4, 1).unwrap();
    let p1 = best_prior(&ch).unwrap();
    let p2 = best_prior(&ch.with_observations(2).unwrap()).unwrap();
    let diff = (p1 - p2).abs();
    let mut sym: f64 = 0.0;
    for q in [0.6, 0.7, 0.8, 0.9] {
        for n in 1..=10 {
            let c = BinaryChannel::new(q, 1.0 - q, n).unwrap();
            sym = sym.max((best_prior(&c).unwrap() - 0.5).abs());
        }
    }
    report(
        8,
        "prior depends on N",
        diff > 1e-6 && sym <= 1e-8,
        format!("p*(1)={p1:.9} p*(2)={p2:.9} diff {diff:.3e}, symmetric err {sym:.3e}"),
    );
}

#[test]
fn criterion_09_posterior_transfer_fails() {
    let mut max_gap: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for (q, r) in grid() {
        let t = posterior_transfer_gap(&BinaryChannel::new(q, r, 1).unwrap()).unwrap();
        if t.gap > max_gap {
            max_gap = t.gap;
            at = (q, r);
        }
    }
    let mut sym: f64 = 0.0;
    for q in [0.55, 0.65, 0.75, 0.85, 0.95] {
        sym = sym.max(posterior_transfer_gap(&BinaryChannel::new(q, 1.0 - q, 1).unwrap()).unwrap().gap);
    }
    report(
        9,
        "posterior transfer gap",
        max_gap > 1e-6 && sym <= 1e-9,
        format!("largest gap {max_gap:.3e} at q={} r={}, symmetric {sym:.3e}", at.0, at.1),
    );
}

#[test]
fn criterion_10_dempster_comparison() {
    let fr = Frame::new(&["a", "b", "c"]).unwrap();
    let ev = |s: &str| fr.event_of(&[s]).unwrap();
    let m1 = MassFunction::new(&fr, &[(ev("a"), 0.99), (ev("b"), 0.01)]).unwrap();
    let m2 = MassFunction::new(&fr, &[(ev("c"), 0.99), (ev("b"), 0.01)]).unwrap();
    let r = compare_updating(&m1, &m2).unwrap();
    let b = r.atoms.iter().find(|a| a.atom == "b").unwrap();
    let point_mass_on_b = b.dempster == Some((1.0, 1.0))
        && r.atoms.iter().filter(|a| a.atom != "b").all(|a| a.dempster == Some((0.0, 0.0)));
    let pass = point_mass_on_b && r.inconsistent && r.atoms.iter().all(|a| a.intersection.is_none());
    report(
        10,
        "Dempster vs intersection",
        pass,
        format!("conflict {:.4}, Dempster point mass on b: {point_mass_on_b}, intersection empty: {}", r.conflict, r.inconsistent),
    );
}
