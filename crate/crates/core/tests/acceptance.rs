//! Acceptance gate: one pass/fail line per criterion at the pinned tolerances.
//! Runs without the libtest harness so the lines always reach the output.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_lift::clifford::build_clifford;
use spectral_lift::dirac_lift::{
    assemble, check_compression_bound, check_lift, horizontal_lift, multiset_distance, vertical_block_spectrum_deviation, vertical_commutator_sweep,
    vertical_dirac, AssembledTriple, BaseTriple,
};
use spectral_lift::free_systems::{classify_covariant_reps, Classification, CovariantRep, FactorSystem, RepresentedBase};
use spectral_lift::groups::{GroupModel, TruncationWindow};
use spectral_lift::linalg::{diag_real, identity, max_abs, random};
use spectral_lift::models::crossed_product::{
    build_crossed_product, diagonal_base, handcoded_deviation, twisted_cyclic_pair, Automorphism, CrossedProductSpec, ShiftGroup,
};
use spectral_lift::models::homogeneous::{build_homogeneous, refinement_report, HomogeneousSpec};
use spectral_lift::models::quantum_torus::{assembled_spectrum, build_quantum_torus, canonical_d4_spectrum, QuantumTorusSpec};
use spectral_lift_cli::{run_json, Overrides};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// Fails the criterion when the runtime budget is exceeded.
fn within(o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    let on_time = elapsed <= budget;
    let detail = format!("{}; {:.2}s of {:.0}s", o.detail, elapsed.as_secs_f64(), budget.as_secs_f64());
    outcome(o.passed && on_time, detail)
}

fn timed(budget_secs: u64, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    within(o, start.elapsed(), Duration::from_secs(budget_secs))
}

/// No pinned budget: the runtime is reported only.
fn clocked(f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    outcome(o.passed, format!("{}; {:.2}s", o.detail, start.elapsed().as_secs_f64()))
}

fn cp_integers(radius: usize) -> (spectral_lift::models::crossed_product::CrossedProduct, AssembledTriple, RepresentedBase) {
    let base = diagonal_base(4);
    let spec = CrossedProductSpec {
        base: base.clone(),
        automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
        group: ShiftGroup::Integers { radius },
    };
    let triple = BaseTriple::new(base.clone(), diag_real(&[0.5, -1.0, 2.0, 3.0])).unwrap();
    let (cp, t) = build_crossed_product(spec, &triple, &build_clifford(1, true)).unwrap();
    (cp, t, base)
}

fn cp_cyclic() -> (AssembledTriple, RepresentedBase) {
    let base = diagonal_base(4);
    let spec = CrossedProductSpec {
        base: base.clone(),
        automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
        group: ShiftGroup::Cyclic { order: 4 },
    };
    let triple = BaseTriple::new(base.clone(), diag_real(&[0.5, -1.0, 2.0, 3.0])).unwrap();
    let (_, t) = build_crossed_product(spec, &triple, &build_clifford(1, true)).unwrap();
    (t, base)
}

/// ℂ² ⋊ ℤ₂ by the swap, with the cocycle ω(1,1) = i·1 supplied by hand.
fn custom_example() -> (AssembledTriple, RepresentedBase) {
    use spectral_lift::groups::IrrepLabel;
    use spectral_lift::linalg::c64;
    let base = diagonal_base(2);
    let swap = spectral_lift::linalg::from_rows(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
    let one = IrrepLabel::Cyclic { m: 1, n: 2 };
    let cocycles = [((one.clone(), one), identity(2) * c64(0.0, 1.0))].into_iter().collect();
    let fs = FactorSystem::custom_abelian(GroupModel::cyclic(2), TruncationWindow::cyclic_all(2), &[swap], cocycles).unwrap();
    let rep = CovariantRep::new(std::sync::Arc::new(fs)).unwrap();
    let cliff = build_clifford(1, true);
    let triple = BaseTriple::new(base.clone(), diag_real(&[1.0, -2.0])).unwrap();
    let h = horizontal_lift(&triple, &rep).unwrap();
    let v = vertical_dirac(&rep, &cliff).unwrap();
    (assemble(&triple, &rep, &h, &v, &cliff).unwrap(), base)
}

fn clifford_relations() -> Outcome {
    timed(1, || {
        let mut worst: f64 = 0.0;
        for n in 1..=6 {
            let c = build_clifford(n, true);
            worst = worst
                .max(c.relation_deviation())
                .max(c.skew_deviation())
                .max(c.grading_deviation().unwrap_or(f64::INFINITY));
        }
        outcome(worst == 0.0, format!("max deviation {worst:e} over n = 1..6"))
    })
}

fn quantum_torus_factor_suite() -> Outcome {
    timed(10, || {
        let spec = QuantumTorusSpec {
            base_radius: 1,
            ..QuantumTorusSpec::mixed(0.175, 4)
        };
        let (qt, _, t) = build_quantum_torus(spec, &build_clifford(2, true)).unwrap();
        let report = t.rep.fs.verify(&qt.base, 1e-10, 1).unwrap();
        let pick = |name: &str| report.entries.iter().find(|e| e.name == name).expect("check present");
        let (ranges, identity) = (pick("cocycle_ranges"), pick("cocycle_identity"));
        outcome(
            ranges.passed && identity.passed,
            format!(
                "ranges {:.1e} on {} pairs, cocycle identity {:.1e} on {} in-margin triples",
                ranges.max_deviation, ranges.interior, identity.max_deviation, identity.interior
            ),
        )
    })
}

fn crossed_product_spectrum() -> Outcome {
    timed(5, || {
        let (cp, t, _) = cp_integers(8);
        let lambdas = [0.5, -1.0, 2.0, 3.0];
        let spectra = t.spectrum().unwrap();
        let mut worst: f64 = 0.0;
        for (block, eig) in cp.rep.blocks.iter().zip(&spectra) {
            let k = label_k(&block.label.to_string()).expect("integer mode label");
            let mut expected: Vec<f64> = lambdas
                .iter()
                .flat_map(|l: &f64| {
                    let r = (l * l + (k * k) as f64).sqrt();
                    [-r, r]
                })
                .collect();
            expected.sort_by(f64::total_cmp);
            worst = worst.max(multiset_distance(eig, &expected));
        }
        let generic = handcoded_deviation(&cp, &t);
        outcome(
            worst < 1e-10 && generic < 1e-12,
            format!("closed-form eigenvalues {worst:.1e}, generic vs hand-coded {generic:.1e}"),
        )
    })
}

/// Mode number from a label printed as `(k)`.
fn label_k(s: &str) -> Option<i64> {
    s.trim_matches(|c| c == '(' || c == ')').parse().ok()
}

fn quantum_torus_spectrum() -> Outcome {
    timed(60, || {
        let cliff = build_clifford(2, true);
        let mut notes = Vec::new();
        let mut ok = true;
        for (name, t) in [("theta 0", 0.0), ("mixed 0.175", 0.175)] {
            let (qt, _, at) = build_quantum_torus(QuantumTorusSpec::mixed(t, 3), &cliff).unwrap();
            let spec_dev = multiset_distance(&assembled_spectrum(&at).unwrap(), &canonical_d4_spectrum(3, 3).unwrap());
            let gauge = qt.gauge_deviation().unwrap();
            ok &= spec_dev < 1e-10 && gauge < 1e-12;
            notes.push(format!("{name}: D4 spectrum {spec_dev:.1e}, gauge {gauge:.1e}"));
        }
        outcome(ok, notes.join("; "))
    })
}

fn lift_property() -> Outcome {
    clocked(|| {
        let mut examples: Vec<(&str, AssembledTriple)> = vec![
            ("crossed product Z", cp_integers(8).1),
            ("crossed product Z4", cp_cyclic().0),
            ("custom Z2", custom_example().0),
        ];
        let cliff = build_clifford(2, true);
        for (name, t) in [("quantum torus theta 0", 0.0), ("quantum torus mixed", 0.175)] {
            examples.push((name, build_quantum_torus(QuantumTorusSpec::mixed(t, 2), &cliff).unwrap().2));
        }
        let mut worst: f64 = 0.0;
        for (_, t) in &examples {
            let l = check_lift(t).unwrap();
            worst = worst.max(l.dirac_deviation).max(l.representation_deviation);
        }
        outcome(worst < 1e-12, format!("max over {} examples {worst:.1e}", examples.len()))
    })
}

fn vertical_identities() -> Outcome {
    clocked(|| {
        let c1 = build_clifford(1, true);
        let c2 = build_clifford(2, true);
        let (_, cpz, bz) = cp_integers(8);
        let (cp4, b4) = cp_cyclic();
        let (custom, bc) = custom_example();
        let (qt, _, qtt) = build_quantum_torus(QuantumTorusSpec::mixed(0.175, 2), &c2).unwrap();
        let cases: Vec<(&str, &AssembledTriple, &RepresentedBase, &_)> = vec![
            ("crossed product Z", &cpz, &bz, &c1),
            ("crossed product Z4", &cp4, &b4, &c1),
            ("custom Z2", &custom, &bc, &c1),
            ("quantum torus", &qtt, &qt.base, &c2),
        ];
        let (mut comm, mut blocks): (f64, f64) = (0.0, 0.0);
        for (i, (_, t, base, cliff)) in cases.iter().enumerate() {
            comm = comm.max(vertical_commutator_sweep(t, cliff, base, 100, 40 + i as u64).unwrap());
            blocks = blocks.max(vertical_block_spectrum_deviation(t).unwrap());
        }
        outcome(
            comm < 1e-10 && blocks < 1e-10,
            format!("commutator {comm:.1e} on 100 elements per example, block spectra {blocks:.1e}"),
        )
    })
}

fn compression_suite() -> Outcome {
    clocked(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut identity_res, mut violations): (f64, usize) = (0.0, 0);
        for i in 0..200 {
            let n = 2 + i % 15;
            let rank = 1 + (i / 15) % (n - 1);
            let d = random::hermitian(&mut rng, n);
            let p = random::projection(&mut rng, n, rank);
            let r = check_compression_bound(&d, &p).unwrap();
            identity_res = identity_res.max(r.identity_residual);
            violations += r.violations;
        }
        outcome(
            identity_res < 1e-12 && violations == 0,
            format!("identity {identity_res:.1e}, {violations} Weyl violations over 200 pairs"),
        )
    })
}

fn homogeneous_torus() -> Outcome {
    timed(30, || {
        let h = build_homogeneous(&HomogeneousSpec::torus(2, vec![vec![1, 1]], 6)).unwrap();
        let r = h.residuals(4, 8).unwrap();
        let wanted = ["frame split", "vertical comparison", "horizontal comparison", "correction commutator"];
        let worst = r
            .named()
            .into_iter()
            .filter(|(n, _, _)| wanted.contains(n))
            .map(|(_, _, v)| v)
            .fold(0.0, f64::max);
        outcome(worst < 1e-10, format!("comparison identities and correction commutator {worst:.1e}"))
    })
}

fn homogeneous_su2_refinement() -> Outcome {
    timed(600, || {
        let (coarse, fine, report) = refinement_report(6, 24, 48, 1, 9).unwrap();
        let pairs: Vec<String> = coarse
            .named()
            .iter()
            .zip(fine.named())
            .map(|((n, _, a), (_, _, b))| format!("{n} {a:.1e}->{b:.1e}"))
            .collect();
        outcome(report.all_passed(), format!("report-only residuals: {}", pairs.join(", ")))
    })
}

fn cyclic_classification() -> Outcome {
    clocked(|| {
        let (plain, twisted, gens) = twisted_cyclic_pair(11).unwrap();
        let moved = max_abs(&(&twisted.factor.cocycle(&twisted.label(1), &twisted.label(1)).unwrap().matrix - identity(4)));
        match classify_covariant_reps(&plain.rep, &twisted.rep, &gens, 3).unwrap() {
            Classification::Equivalent { residual, .. } => outcome(
                residual < 1e-9 && moved > 0.1,
                format!("equivalent, residual {residual:.1e}; the twist moves the cocycle by {moved:.2}"),
            ),
            Classification::Distinct { reason } => outcome(false, format!("classified distinct: {reason}")),
        }
    })
}

fn determinism() -> Outcome {
    clocked(|| {
        let config = r#"{"kind":"quantum_torus","theta":{"mixed":0.175},"windows":[3],"seed":11,"samples":3}"#;
        let first = run_json(config, &Overrides::default()).unwrap();
        let second = run_json(config, &Overrides::default()).unwrap();
        let same = first.1 == second.1 && first.2 == second.2;
        outcome(same, format!("CSV {} bytes, JSON {} bytes, identical: {same}", first.1.len(), first.2.len()))
    })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("clifford relations, skew-adjointness and grading", clifford_relations),
        ("quantum torus factor-system suite", quantum_torus_factor_suite),
        ("crossed product closed-form spectrum", crossed_product_spectrum),
        ("quantum torus canonical spectrum and gauge invariance", quantum_torus_spectrum),
        ("lift property on every example", lift_property),
        ("vertical commutator and block spectra", vertical_identities),
        ("compression identity and Weyl bound", compression_suite),
        ("homogeneous torus comparison identities", homogeneous_torus),
        ("homogeneous SU(2) refinement", homogeneous_su2_refinement),
        ("covariant representation classification", cyclic_classification),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.passed);
        println!("[{:>2}] {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
