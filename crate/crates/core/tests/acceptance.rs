//! The acceptance criteria, run in order with their time limits. Each prints
//! one `PASS`/`FAIL` line; the test fails if any criterion does.

use std::io::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sti_core::derivation::{alpha_equal, and, arrow_elim, arrow_intro, axiom, mux, Derivation};
use sti_core::harness::{
    gen_sn_terms, infer_corpus, inference_suite, lemma3m_suite, monotonicity_suite,
    remark_family_report, render_remark_table, subst_suite, theorem_suite, tree_suite,
    CorpusConfig, CorpusItem, SuiteSummary,
};
use sti_core::inference::{infer, InferError, SearchBounds};
use sti_core::measures::{proof_size, weight};
use sti_core::term::{redexes, reduce_at};
use sti_core::transform::reduce_subject;
use sti_core::{check_derivation, parse_term, parse_type, LinearType, Type};

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn from_suites(suites: &[&SuiteSummary]) -> Outcome {
        let ok = suites.iter().all(|s| s.passed());
        let detail = suites
            .iter()
            .map(|s| {
                let mut line = format!(
                    "{}: {} items, {} checks, {} violations",
                    s.name,
                    s.items,
                    s.checks,
                    s.violations.len()
                );
                if let Some(v) = s.violations.first() {
                    line.push_str(&format!(" (first: {v})"));
                }
                line
            })
            .collect::<Vec<_>>()
            .join("; ");
        Outcome { ok, detail }
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

// Written straight to stdout so the lines show without `--nocapture`.
fn report(id: u32, name: &str, limit: Duration, elapsed: Duration, o: &Outcome) -> bool {
    let in_time = elapsed <= limit;
    let ok = o.ok && in_time;
    let line = format!(
        "acceptance {id} {:<28} {}  {:>8.3}s / {:>4}s  {}{}\n",
        name,
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        o.detail,
        if in_time { "" } else { " [over time]" },
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    ok
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let o = f();
    (o, t.elapsed())
}

// ---------------------------------------------------------------------------
// the worked example

fn a() -> LinearType {
    LinearType::var("a")
}

fn big_a() -> LinearType {
    LinearType::arrow(Type::Linear(a()), a())
}

fn self_app() -> Derivation {
    let body = arrow_elim(axiom("x1", big_a()), axiom("x2", a())).unwrap();
    arrow_intro(mux(body, vec!["x1".into(), "x2".into()], "x").unwrap(), "x").unwrap()
}

fn example() -> [Derivation; 3] {
    let id_applied = |t: LinearType| {
        arrow_elim(
            arrow_intro(axiom("y", t.clone()), "y").unwrap(),
            axiom("z", t),
        )
        .unwrap()
    };
    let first = arrow_elim(
        self_app(),
        and(vec![id_applied(big_a()), id_applied(a())]).unwrap(),
    )
    .unwrap();
    let second = arrow_elim(
        self_app(),
        and(vec![axiom("z", big_a()), axiom("z", a())]).unwrap(),
    )
    .unwrap();
    let body = arrow_elim(axiom("z1", big_a()), axiom("z2", a())).unwrap();
    let third = mux(body, vec!["z1".into(), "z2".into()], "z").unwrap();
    [first, second, third]
}

fn example_replay() -> Outcome {
    let ds = example();
    for (i, d) in ds.iter().enumerate() {
        let r = check_derivation(d);
        if !r.is_ok() {
            return fail(format!("derivation {} does not check: {r}", i + 1));
        }
    }
    let expected_terms = ["(\\x. x x) ((\\y. y) z)", "(\\x. x x) z", "z z"];
    for (d, t) in ds.iter().zip(expected_terms) {
        if !d.subject().alpha_eq(&parse_term(t).unwrap()) {
            return fail(format!("subject {} is not {t}", d.subject()));
        }
    }
    // step 1 contracts the argument redex, step 2 the root
    let mut current = ds[0].clone();
    for want in &ds[1..] {
        let target = want.subject();
        let Some(p) = redexes(current.subject()).into_iter().find(|p| {
            reduce_at(current.subject(), p)
                .map(|t| t.alpha_eq(target))
                .unwrap_or(false)
        }) else {
            return fail(format!(
                "no redex of {} leads to {target}",
                current.subject()
            ));
        };
        match reduce_subject(&current, &p) {
            Ok(step) if alpha_equal(&step.after, want) => current = step.after,
            Ok(step) => {
                return fail(format!(
                    "transported derivation differs at {}",
                    step.after.subject()
                ))
            }
            Err(e) => return fail(format!("reduce_subject: {e}")),
        }
    }
    let ws = |r| ds.iter().map(|d| weight(d, r)).collect::<Vec<_>>();
    let (w2, w1) = (ws(2), ws(1));
    let ok = w2 == [13, 7, 3] && w1 == [9, 6, 3];
    Outcome {
        ok,
        detail: format!(
            "W(·,2) = {w2:?}, W(·,1) = {w1:?}, |Π| = {}",
            proof_size(&ds[0])
        ),
    }
}

// ---------------------------------------------------------------------------
// type algebra

fn random_type(rng: &mut ChaCha8Rng, depth: u32) -> Type {
    if depth == 0 {
        return Type::var(["a", "b", "c"][rng.gen_range(0..3)]);
    }
    match rng.gen_range(0..3) {
        0 => Type::var(["a", "b", "c"][rng.gen_range(0..3)]),
        1 => Type::arrow(random_type(rng, depth - 1), random_linear(rng, depth - 1)),
        _ => {
            let n = rng.gen_range(2..=3);
            Type::inter((0..n).map(|_| random_type(rng, depth - 1)).collect()).unwrap()
        }
    }
}

fn random_linear(rng: &mut ChaCha8Rng, depth: u32) -> LinearType {
    match random_type(rng, depth) {
        Type::Linear(l) => l,
        Type::Inter(_) => a(),
    }
}

fn type_algebra() -> Outcome {
    let t = |s: &str| parse_type(s).unwrap();
    let mut bad = Vec::new();
    if !t("((a -> a) ∧ a)").type_equal(&t("(a ∧ (a -> a))")) {
        bad.push("A∧a = a∧A");
    }
    if t("((a -> a) ∧ (a -> a))").type_equal(&t("(a -> a)")) {
        bad.push("A∧A ≠ A");
    }
    if t("(((a -> a) ∧ b) ∧ c)").type_equal(&t("((a -> a) ∧ b ∧ c)")) {
        bad.push("(A∧B)∧C ≠ A∧B∧C");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut non_idempotent = 0;
    for _ in 0..1000 {
        let ty = random_type(&mut rng, 4);
        let c = ty.canonicalize();
        if c.canonicalize() != c || !c.type_equal(&ty) {
            non_idempotent += 1;
        }
    }
    let ok = bad.is_empty() && non_idempotent == 0;
    Outcome {
        ok,
        detail: format!("algebra failures {bad:?}, canonicalize failures {non_idempotent}/1000"),
    }
}

// ---------------------------------------------------------------------------
// inference

fn inference_soundness(results: &[Result<CorpusItem, InferError>], b: &SearchBounds) -> Outcome {
    let suite = inference_suite(results);
    let mut problems = Vec::new();
    match infer(&parse_term("\\x. x x").unwrap(), b) {
        Ok(r) => {
            let want = parse_type("((a -> a) ∧ a) -> a").unwrap();
            if !r.derivation.ty().equal_up_to_renaming(&want) {
                problems.push(format!("λx.xx typed {}", r.derivation.ty()));
            }
        }
        Err(e) => problems.push(format!("λx.xx: {e}")),
    }
    let omega = parse_term("(\\x. x x) (\\x. x x)").unwrap();
    match infer(&omega, b) {
        Err(InferError::BoundsExhausted { .. }) => {}
        other => problems.push(format!("Ω: expected exhausted bounds, got {other:?}")),
    }
    let mut o = Outcome::from_suites(&[&suite]);
    o.ok &= problems.is_empty();
    if !problems.is_empty() {
        o.detail.push_str(&format!("; {}", problems.join("; ")));
    } else {
        o.detail
            .push_str("; λx.xx : ((a→a)∧a)→a; Ω exhausts bounds");
    }
    o
}

#[test]
fn acceptance() {
    let cfg = CorpusConfig::default();
    let mut all = true;

    let (o, t) = timed(example_replay);
    all &= report(1, "example replay", Duration::from_secs(1), t, &o);

    // shared corpus; generation and inference count towards criterion 2
    let start = Instant::now();
    let terms = gen_sn_terms(cfg.seed, cfg.count, cfg.max_size);
    let results = infer_corpus(&terms, &cfg.bounds);
    let corpus_time = start.elapsed();
    let items: Vec<CorpusItem> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().cloned())
        .collect();

    let (mut o, t) = timed(|| Outcome::from_suites(&[&lemma3m_suite(&items, 1..=8)]));
    if terms.len() < 500 {
        o = fail(format!("corpus has {} terms, 500 wanted", terms.len()));
    }
    all &= report(
        2,
        "measure relations",
        Duration::from_secs(120),
        t + corpus_time,
        &o,
    );

    let start = Instant::now();
    let mono = monotonicity_suite(&items, cfg.graph_fuel);
    let mono_time = start.elapsed();
    all &= report(
        3,
        "weight monotonicity",
        Duration::from_secs(180),
        mono_time,
        &Outcome::from_suites(&[&mono]),
    );

    let (o, t) = timed(|| Outcome::from_suites(&[&theorem_suite(&items, cfg.fuel).0]));
    all &= report(
        4,
        "reduction bound",
        Duration::from_secs(180),
        mono_time + t,
        &o,
    );

    let (o, t) = timed(|| match remark_family_report(4, &cfg.bounds, cfg.fuel) {
        Ok(rows) => {
            let _ = std::io::stdout()
                .lock()
                .write_all(render_remark_table(&rows).as_bytes());
            Outcome {
                ok: rows.iter().all(|r| r.passed()),
                detail: format!("{} rows", rows.len()),
            }
        }
        Err(e) => fail(e.to_string()),
    });
    all &= report(5, "duplication family", Duration::from_secs(30), t, &o);

    let (o, t) = timed(|| Outcome::from_suites(&[&subst_suite(&items, cfg.seed, 200)]));
    all &= report(6, "weighted substitution", Duration::from_secs(60), t, &o);

    let (o, t) = timed(type_algebra);
    all &= report(7, "type algebra", Duration::from_secs(5), t, &o);

    let (o, t) = timed(|| inference_soundness(&results, &cfg.bounds));
    all &= report(
        8,
        "inference soundness",
        Duration::from_secs(60),
        t + corpus_time,
        &o,
    );

    let (o, t) = timed(|| {
        let mut s = tree_suite(&items);
        // the worked example's argument is typed by an intersection
        let extra = tree_suite(&[CorpusItem {
            term: example()[0].subject().clone(),
            derivation: example()[0].clone(),
            degree: 1,
        }]);
        s.items += extra.items;
        s.checks += extra.checks;
        s.violations.extend(extra.violations);
        let mut o = Outcome::from_suites(&[&s]);
        o.ok &= s.checks > 0;
        o
    });
    all &= report(9, "intersection trees", Duration::from_secs(60), t, &o);

    assert!(all, "acceptance criteria failed; see the lines above");
}
