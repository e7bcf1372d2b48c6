//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use epistemod::corpus::{Corpus, Kind};
use epistemod_core::canonical::{CanonicalSpace, Coverage, WorldSet};
use epistemod_core::epistemic::{carve, EpistemicModel};
use epistemod_core::formula::{parse, Formula, Signature};
use epistemod_core::kripke::{import_model, KripkeModel};
use epistemod_core::normalform::to_normal_form;
use epistemod_core::prover::{oracle_satisfiable, Hypotheses, ProofResult, Prover, ProverError};
use epistemod_core::sample::{random_carving, random_formula, random_model, rng, FormulaShape};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn one_atom() -> (Signature, CanonicalSpace) {
    let sig = Signature::new(["p"], 1).unwrap();
    let space = CanonicalSpace::new(&sig).unwrap();
    (sig, space)
}

fn f(text: &str, sig: &Signature) -> Formula {
    parse(text, sig).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn model(doc: &str) -> KripkeModel {
    import_model(doc).unwrap()
}

fn set(space: &CanonicalSpace, names: &[&str]) -> WorldSet {
    space.world_set(names).unwrap()
}

/// `formula` holds at every world of `ws` related to `world`, and
/// `K1 formula` fails at `world`; checked by direct evaluation.
fn canonical_witness_ok(
    space: &CanonicalSpace,
    ws: &WorldSet,
    world: usize,
    formula: &Formula,
) -> bool {
    let r = space.induced_relation(ws).unwrap();
    let everywhere = ws
        .iter()
        .filter(|&&u| r.contains(world, u))
        .all(|&u| space.satisfies(u, formula).unwrap());
    let known = space
        .satisfies(world, &Formula::know(1, formula.clone()))
        .unwrap();
    everywhere && !known
}

fn c1_canonical_worlds() -> Outcome {
    let (sig, space) = one_atom();
    ensure(space.len() == 4, || format!("{} worlds", space.len()))?;
    let expected = [
        ("A", vec!["K1 p"]),
        ("B", vec!["p", "~K1 p"]),
        ("C", vec!["~p", "~K1 ~p"]),
        ("D", vec!["K1 ~p"]),
    ];
    for (name, gens) in &expected {
        let i = space.index_of(name).unwrap();
        let want: Vec<Formula> = gens.iter().map(|g| f(g, &sig)).collect();
        ensure(space.generator(i) == want, || {
            format!("generator of {name}: {:?}", space.generator(i))
        })?;
        // The generator holds at its world and at no other.
        let g = Formula::conj(want);
        for j in 0..space.len() {
            ensure(space.satisfies(j, &g).unwrap() == (i == j), || {
                format!("generator of {name} at {}", space.name(j))
            })?;
        }
    }
    let classes: BTreeSet<Vec<String>> = space
        .induced_relation(&space.all())
        .unwrap()
        .classes()
        .iter()
        .map(|c| space.names(c))
        .collect();
    let want: BTreeSet<Vec<String>> = [vec!["A"], vec!["D"], vec!["B", "C"]]
        .iter()
        .map(|c| c.iter().map(|s| s.to_string()).collect())
        .collect();
    ensure(classes == want, || format!("classes {classes:?}"))?;
    Ok("4 worlds, classes {A} {D} {B,C}".into())
}

fn c2_classification() -> Outcome {
    let (_, space) = one_atom();
    let c = space.classify_subsets(Coverage::Exhaustive);
    ensure(c.entries.len() == 15, || {
        format!("{} subsets", c.entries.len())
    })?;
    let listed: BTreeSet<WorldSet> = [
        &["A"][..],
        &["D"],
        &["A", "D"],
        &["B", "C"],
        &["A", "B", "C"],
        &["B", "C", "D"],
        &["A", "B", "C", "D"],
    ]
    .iter()
    .map(|names| set(&space, names))
    .collect();
    for e in &c.entries {
        let want = listed.contains(&e.worlds);
        ensure(e.verdict.fully_explanatory == want, || {
            format!(
                "{:?} classified {}",
                space.names(&e.worlds),
                e.verdict.fully_explanatory
            )
        })?;
        if let Some(w) = &e.verdict.witness {
            ensure(
                canonical_witness_ok(&space, &e.worlds, w.world, &w.formula),
                || format!("bad witness {} for {:?}", w.formula, space.names(&e.worlds)),
            )?;
        }
    }
    Ok(format!(
        "15 subsets, {} fully explanatory",
        c.fully_explanatory_count()
    ))
}

fn c3_canonical_models() -> Outcome {
    let (sig, space) = one_atom();
    let cases: [(&[&str], &[&str], bool); 3] = [
        (&["p"], &["A", "B"], false),
        (&["K1 p"], &["A"], true),
        (&["~K1 p", "~K1 ~p"], &["B", "C"], true),
    ];
    for (gamma, worlds, fe) in cases {
        let gamma: Hypotheses = gamma.iter().map(|g| f(g, &sig)).collect();
        let cm = space.canonical_model(&gamma).map_err(|e| e.to_string())?;
        ensure(cm == set(&space, worlds), || {
            format!("CM = {:?}", space.names(&cm))
        })?;
        // Membership by direct evaluation of the hypotheses.
        for i in 0..space.len() {
            let member = gamma.iter().all(|g| space.satisfies(i, g).unwrap());
            ensure(member == cm.contains(&i), || {
                format!("membership of {}", space.name(i))
            })?;
        }
        let v = space
            .fully_explanatory(&cm, Some(&gamma))
            .map_err(|e| e.to_string())?;
        ensure(v.fully_explanatory == fe, || format!("FE of {worlds:?}"))?;
        if let Some(w) = &v.witness {
            ensure(
                canonical_witness_ok(&space, &cm, w.world, &w.formula),
                || format!("bad witness {}", w.formula),
            )?;
        }
    }
    Ok("CM(p)={A,B} not FE, CM(Kp)={A}, CM(~Kp,~K~p)={B,C}".into())
}

fn c4_reflection() -> Outcome {
    let (sig, space) = one_atom();
    let prover = Prover::default();
    let mut r = rng(2024);
    let shape = FormulaShape {
        max_depth: 2,
        max_size: 7,
    };
    let mut seen: BTreeSet<Vec<Formula>> = BTreeSet::new();
    let mut pool = Vec::new();
    while pool.len() < 60 {
        let k = 1 + seen.len() % 3;
        let gamma: Vec<Formula> = (0..k)
            .map(|_| random_formula(&mut r, &sig, shape))
            .collect();
        if !seen.insert(gamma.clone()) {
            continue;
        }
        let gamma: Hypotheses = gamma.into_iter().collect();
        if let Ok(cm) = space.canonical_model(&gamma) {
            pool.push((gamma, cm));
        }
    }
    let (mut skipped, mut closed_count) = (0, 0);
    for (gamma, cm) in &pool {
        let closed = match prover.necessitation_closed(&sig, gamma) {
            Ok(report) => report.closed,
            Err(ProverError::BudgetExceeded { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let v = space
            .fully_explanatory(cm, Some(gamma))
            .map_err(|e| e.to_string())?;
        let shown: Vec<String> = gamma.iter().map(Formula::render).collect();
        ensure(v.fully_explanatory == closed, || {
            format!(
                "disagreement on {shown:?}: FE {} closed {closed}",
                v.fully_explanatory
            )
        })?;
        if let Some(w) = &v.witness {
            ensure(
                canonical_witness_ok(&space, cm, w.world, &w.formula),
                || format!("bad witness for {shown:?}"),
            )?;
        }
        closed_count += usize::from(closed);
    }
    ensure(skipped * 20 <= pool.len(), || {
        format!("{skipped} skips of {}", pool.len())
    })?;
    Ok(format!(
        "{} hypothesis sets, {closed_count} closed, 0 disagreements, {skipped} skipped",
        pool.len()
    ))
}

fn c5_k1_m_consequences() -> Outcome {
    let sig = Signature::new(["m"], 2).unwrap();
    let prover = Prover::default();
    let gamma: Hypotheses = [f("K1 m", &sig)].into_iter().collect();
    let derived = prover
        .consequence(&sig, &gamma, &f("m", &sig))
        .map_err(|e| e.to_string())?;
    ensure(derived.is_valid(), || "K1 m does not derive m".into())?;
    let goal = f("K2 m", &sig);
    match prover
        .consequence(&sig, &gamma, &goal)
        .map_err(|e| e.to_string())?
    {
        ProofResult::Valid => Err("K1 m derives K2 m".into()),
        ProofResult::Invalid(c) => {
            let id = c.state_id();
            ensure(c.model.len() <= 2, || format!("{} states", c.model.len()))?;
            ensure(c.model.validate().is_empty(), || {
                "invalid countermodel".into()
            })?;
            ensure(c.model.model_check(id, &f("K1 m", &sig)).unwrap(), || {
                "K1 m fails".into()
            })?;
            ensure(!c.model.model_check(id, &goal).unwrap(), || {
                "K2 m holds".into()
            })?;
            Ok(format!("countermodel with {} states", c.model.len()))
        }
    }
}

/// Every failure names a witness true on `Ri(world)` whose `Ki` is false
/// at `world`.
fn fe_failures_ok(e: &EpistemicModel) -> Result<(), String> {
    for failure in e.fully_explanatory().failures {
        let accessible = e.accessible_ids(failure.agent, &failure.world).unwrap();
        for u in &accessible {
            ensure(e.world_satisfies(u, &failure.witness).unwrap(), || {
                format!("witness {} fails at {u}", failure.witness)
            })?;
        }
        let known = Formula::know(failure.agent, failure.witness.clone());
        ensure(!e.world_satisfies(&failure.world, &known).unwrap(), || {
            format!("witness {} is known", failure.witness)
        })?;
    }
    Ok(())
}

fn c6_motivating_example() -> Outcome {
    let m7 = model(include_str!("../fixtures/m7.model"));
    let m9 = model(include_str!("../fixtures/m9.model"));
    let m8 = carve(&m7, ["w", "v"]).map_err(|e| e.to_string())?;
    let report = m8.fully_explanatory();
    ensure(!report.overall, || "M8 is fully explanatory".into())?;
    let ann = report
        .failures
        .iter()
        .find(|x| x.agent == 1 && x.world == "w")
        .ok_or("no failure for Ann at w")?;
    ensure(ann.witness == f("Q", m7.signature()), || {
        format!("witness {}", ann.witness)
    })?;
    fe_failures_ok(&m8)?;
    let m10 = carve(&m9, ["w", "v"]).map_err(|e| e.to_string())?;
    let sig = m9.signature();
    ensure(m10.world_satisfies("w", &f("K2 Q", sig)).unwrap(), || {
        "K_Bob Q false".into()
    })?;
    ensure(!m10.world_satisfies("w", &f("K1 Q", sig)).unwrap(), || {
        "K_Ann Q true".into()
    })?;
    fe_failures_ok(&m10)?;
    let q = f("Q", sig);
    for (e, agents) in [(&m8, 1), (&m10, 2)] {
        for agent in 1..=agents {
            let c = e
                .knowledge_constancy_check(agent, &q)
                .map_err(|e| e.to_string())?;
            ensure(c.holds(), || format!("constancy fails for agent {agent}"))?;
        }
    }
    Ok("M8 not FE (witness Q), M10: K2 Q & ~K1 Q at w, constancy holds".into())
}

fn c7_m5_to_m1() -> Outcome {
    let m5 = model(include_str!("../fixtures/m5.model"));
    let sig = m5.signature();
    let m1 = carve(&m5, ["w"]).map_err(|e| e.to_string())?;
    ensure(m1.accessible_ids(1, "w").unwrap() == ["w"], || {
        "R(w) != {w}".into()
    })?;
    ensure(m1.world_satisfies("w", &f("p", sig)).unwrap(), || {
        "p false".into()
    })?;
    ensure(!m1.world_satisfies("w", &f("K1 p", sig)).unwrap(), || {
        "Kp true".into()
    })?;
    let report = m1.fully_explanatory();
    ensure(!report.overall, || "M1 is fully explanatory".into())?;
    ensure(
        report.failures.first().map(|x| &x.witness) == Some(&f("p", sig)),
        || format!("failures {:?}", report.failures),
    )?;
    fe_failures_ok(&m1)?;
    Ok("R(w)={w}, p & ~Kp, witness p".into())
}

fn c8_prover_oracle() -> Outcome {
    let sig = Signature::new(["p", "q"], 2).unwrap();
    let prover = Prover::default();
    let mut r = rng(8);
    let shape = FormulaShape {
        max_depth: 3,
        max_size: 10,
    };
    let mut valid = 0;
    for _ in 0..300 {
        let g = random_formula(&mut r, &sig, shape);
        match prover
            .decide_validity(&sig, &g)
            .map_err(|e| format!("{g}: {e}"))?
        {
            ProofResult::Valid => {
                valid += 1;
                ensure(
                    oracle_satisfiable(&sig, &Formula::not(g.clone()), 3).is_none(),
                    || format!("{g}: valid but the oracle refutes it"),
                )?;
            }
            ProofResult::Invalid(c) => {
                ensure(c.model.validate().is_empty(), || {
                    format!("{g}: invalid countermodel")
                })?;
                ensure(!c.model.model_check(c.state_id(), &g).unwrap(), || {
                    format!("{g}: countermodel satisfies it")
                })?;
            }
        }
    }
    Ok(format!("300 formulas, {valid} valid, 0 disagreements"))
}

fn c9_normal_forms() -> Outcome {
    let sig = Signature::new(["p", "q"], 1).unwrap();
    let prover = Prover::default();
    let mut r = rng(9);
    let shape = FormulaShape {
        max_depth: 3,
        max_size: 10,
    };
    for _ in 0..500 {
        let g = random_formula(&mut r, &sig, shape);
        let nf = to_normal_form(&g).map_err(|e| format!("{g}: {e}"))?;
        let h = nf.to_formula();
        ensure(nf.is_well_shaped() && h.modal_depth() <= 1, || {
            format!("{g}: shape {nf}")
        })?;
        let eq = prover
            .decide_validity(&sig, &Formula::iff(g.clone(), h))
            .map_err(|e| format!("{g}: {e}"))?;
        ensure(eq.is_valid(), || format!("{g}: not equivalent to {nf}"))?;
    }
    Ok("500 formulas shaped and equivalent".into())
}

fn structural_laws(e: &EpistemicModel, probes: &[Formula]) -> Result<(), String> {
    for agent in 1..=e.parent().agents() {
        let rel = e.induced_accessibility(agent).map_err(|x| x.to_string())?;
        ensure(rel.is_equivalence(), || {
            format!("R{agent} is not an equivalence")
        })?;
        for g in probes {
            let c = e
                .knowledge_constancy_check(agent, g)
                .map_err(|x| x.to_string())?;
            ensure(c.entries.iter().all(|x| x.exactly_one()), || {
                format!("constancy of {g} for agent {agent}")
            })?;
        }
    }
    Ok(())
}

fn c10_structural_laws() -> Outcome {
    let corpus = Corpus::builtin();
    let mut r = rng(10);
    let shape = FormulaShape::default();
    let mut checked = 0;
    for fixture in &corpus.fixtures {
        match fixture.kind {
            Kind::Carving => {
                let e = corpus.carving(&fixture.name)?;
                let sig = e.parent().signature().clone();
                let mut probes: Vec<Formula> =
                    sig.atoms().iter().map(|a| Formula::atom(a)).collect();
                probes.extend((0..10).map(|_| random_formula(&mut r, &sig, shape)));
                structural_laws(&e, &probes).map_err(|x| format!("{}: {x}", fixture.name))?;
            }
            Kind::Model => {
                let m = corpus.model(&fixture.name)?;
                let e = carve(&m, m.states()).map_err(|x| x.to_string())?;
                let probes: Vec<Formula> = (0..10)
                    .map(|_| random_formula(&mut r, m.signature(), shape))
                    .collect();
                structural_laws(&e, &probes).map_err(|x| format!("{}: {x}", fixture.name))?;
            }
            Kind::Canonical => {
                let atoms = fixture.atoms.clone().unwrap_or_default();
                let space = CanonicalSpace::new(&Signature::new(atoms, 1).unwrap()).unwrap();
                let rel = space.induced_relation(&space.all()).unwrap();
                ensure(rel.is_equivalence(), || {
                    format!("{}: not an equivalence", fixture.name)
                })?;
            }
            Kind::Hypotheses => continue,
        }
        checked += 1;
    }
    let sig = Signature::new(["p", "q"], 2).unwrap();
    for _ in 0..100 {
        let m = random_model(&mut r, &sig, 5);
        let keep = random_carving(&mut r, &m);
        let e = carve(&m, &keep).map_err(|x| x.to_string())?;
        let probes: Vec<Formula> = (0..5)
            .map(|_| random_formula(&mut r, &sig, shape))
            .collect();
        structural_laws(&e, &probes)?;
    }
    Ok(format!("{checked} corpus fixtures and 100 random carvings"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "canonical S5(p) worlds and relation",
            Duration::from_secs(1),
            c1_canonical_worlds,
        ),
        (
            "subset classification 15/7",
            Duration::from_secs(1),
            c2_classification,
        ),
        (
            "canonical models of hypotheses",
            Duration::from_secs(1),
            c3_canonical_models,
        ),
        (
            "closure under necessitation iff FE canonical model",
            Duration::from_secs(60),
            c4_reflection,
        ),
        (
            "consequences of {K1 m}",
            Duration::from_secs(1),
            c5_k1_m_consequences,
        ),
        (
            "M7/M9 carvings",
            Duration::from_secs(1),
            c6_motivating_example,
        ),
        ("M5 carved to M1", Duration::from_secs(1), c7_m5_to_m1),
        (
            "prover agrees with oracle",
            Duration::from_secs(300),
            c8_prover_oracle,
        ),
        ("normal forms", Duration::from_secs(300), c9_normal_forms),
        (
            "structural laws",
            Duration::from_secs(60),
            c10_structural_laws,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= *limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; exceeded limit"))
            }
        });
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} {:2} {name}: {detail} [{:.3}s, limit {}s]",
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
