use std::fmt;

use serde::Serialize;

use super::{Derivation, Rule};
use crate::context::{ctx_intersect, Context};
use crate::term::Term;
use crate::types::{LinearType, Type};

/// A failed side condition at the node reached by `path` (premise indices
/// from the root).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "at root: {}", self.message)
        } else {
            let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            write!(f, "at {}: {}", p.join("."), self.message)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Verifies every node locally, collecting all violations.
pub fn check_derivation(d: &Derivation) -> CheckReport {
    let mut report = CheckReport::default();
    let mut path = Vec::new();
    walk(d, &mut path, &mut report.violations);
    report
}

fn walk(d: &Derivation, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    let mut msgs = Vec::new();
    check_node(d, &mut msgs);
    out.extend(msgs.into_iter().map(|message| Violation {
        path: path.clone(),
        message,
    }));
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        walk(p, path, out);
        path.pop();
    }
}

fn well_formed(t: &Type) -> bool {
    fn lin(a: &LinearType) -> bool {
        match a {
            LinearType::Var(_) => true,
            LinearType::Arrow(d, c) => well_formed(d) && lin(c),
        }
    }
    match t {
        Type::Linear(a) => lin(a),
        Type::Inter(cs) => cs.len() >= 2 && cs.iter().all(well_formed),
    }
}

fn expect_premises(d: &Derivation, n: usize, msgs: &mut Vec<String>) -> bool {
    if d.premises.len() != n {
        msgs.push(format!(
            "rule expects {n} premise(s), found {}",
            d.premises.len()
        ));
        return false;
    }
    true
}

fn same_subject(concl: &Term, expected: &Term, msgs: &mut Vec<String>) {
    if !concl.alpha_eq(expected) {
        msgs.push(format!("subject should be {expected}, found {concl}"));
    }
}

fn same_type(concl: &Type, expected: &Type, msgs: &mut Vec<String>) {
    if !concl.type_equal(expected) {
        msgs.push(format!("type should be {expected}, found {concl}"));
    }
}

fn same_context(concl: &Context, expected: &Context, msgs: &mut Vec<String>) {
    if !concl.equiv(expected) {
        msgs.push(format!(
            "context should be {{{expected}}}, found {{{concl}}}"
        ));
    }
}

fn check_node(d: &Derivation, msgs: &mut Vec<String>) {
    let c = &d.conclusion;
    if !well_formed(&c.ty) || c.context.iter().any(|(_, t)| !well_formed(t)) {
        msgs.push("intersection with fewer than two children".into());
    }
    for x in c.subject.free_vars() {
        if !c.context.contains(&x) {
            msgs.push(format!(
                "free variable {x} of the subject is not in the context"
            ));
        }
    }
    match &d.rule {
        Rule::Ax => {
            if !expect_premises(d, 0, msgs) {
                return;
            }
            if !c.ty.is_linear() || c.context.iter().any(|(_, t)| !t.is_linear()) {
                msgs.push("axiom requires linear type".into());
            }
            match (&c.subject, c.context.len()) {
                (Term::Var(x), 1) => match c.context.get(x) {
                    Some(t) => same_type(&c.ty, t, msgs),
                    None => msgs.push(format!("axiom context does not bind {x}")),
                },
                _ => msgs.push("axiom must be x: A ⊢ x: A".into()),
            }
        }
        Rule::Weaken { var, ty } => {
            if !expect_premises(d, 1, msgs) {
                return;
            }
            let p = &d.premises[0].conclusion;
            if p.context.contains(var) {
                msgs.push(format!("x ∉ dom(Γ) violated for {var}"));
            }
            same_context(
                &c.context,
                &p.context.with(var.clone(), Type::Linear(ty.clone())),
                msgs,
            );
            same_subject(&c.subject, &p.subject, msgs);
            same_type(&c.ty, &p.ty, msgs);
        }
        Rule::ArrowIntro { var } => {
            if !expect_premises(d, 1, msgs) {
                return;
            }
            let p = &d.premises[0].conclusion;
            let Some(sigma) = p.context.get(var) else {
                msgs.push(format!(
                    "abstracted variable {var} is not in the premise context"
                ));
                return;
            };
            match p.ty.as_linear() {
                Some(a) => same_type(&c.ty, &Type::arrow(sigma.clone(), a.clone()), msgs),
                None => msgs.push("→I premise type must be linear".into()),
            }
            same_context(&c.context, &p.context.without(var), msgs);
            same_subject(&c.subject, &Term::lam(var.clone(), p.subject.clone()), msgs);
        }
        Rule::ArrowElim => {
            if !expect_premises(d, 2, msgs) {
                return;
            }
            let (f, a) = (&d.premises[0].conclusion, &d.premises[1].conclusion);
            match &f.ty {
                Type::Linear(LinearType::Arrow(sigma, cod)) => {
                    if !a.ty.type_equal(sigma) {
                        msgs.push(format!(
                            "argument type {} does not match domain {sigma}",
                            a.ty
                        ));
                    }
                    same_type(&c.ty, &Type::Linear((**cod).clone()), msgs);
                }
                other => msgs.push(format!("function type {other} is not an arrow")),
            }
            match f.context.disjoint_union(&a.context) {
                Ok(u) => same_context(&c.context, &u, msgs),
                Err(e) => msgs.push(format!("Γ # Δ violated: {e}")),
            }
            same_subject(
                &c.subject,
                &Term::app(f.subject.clone(), a.subject.clone()),
                msgs,
            );
        }
        Rule::And => {
            let n = d.premises.len();
            if n < 2 {
                msgs.push(format!("∧n requires n > 1, found {n}"));
                return;
            }
            let first = &d.premises[0].conclusion.subject;
            for (i, p) in d.premises.iter().enumerate().skip(1) {
                if !p.subject().alpha_eq(first) {
                    msgs.push(format!(
                        "premise {i} subject {} differs from {first}",
                        p.subject()
                    ));
                }
            }
            same_subject(&c.subject, first, msgs);
            let expected = Type::Inter(d.premises.iter().map(|p| p.ty().clone()).collect());
            same_type(&c.ty, &expected, msgs);
            let ctxs: Vec<Context> = d.premises.iter().map(|p| p.context().clone()).collect();
            same_context(&c.context, &ctx_intersect(&ctxs), msgs);
        }
        Rule::Mux { merged, fresh } => {
            if !expect_premises(d, 1, msgs) {
                return;
            }
            let p = &d.premises[0].conclusion;
            if merged.len() < 2 {
                msgs.push(format!(
                    "(m) requires n > 1 merged variables, found {}",
                    merged.len()
                ));
                return;
            }
            let mut gamma = p.context.clone();
            let mut parts = Vec::new();
            for (i, x) in merged.iter().enumerate() {
                if merged[..i].contains(x) {
                    msgs.push(format!("merged variable {x} repeated"));
                    return;
                }
                match gamma.remove(x) {
                    Some(t) => parts.push(t),
                    None => {
                        msgs.push(format!("merged variable {x} is not in the premise context"));
                        return;
                    }
                }
            }
            if merged.contains(fresh) || gamma.contains(fresh) {
                msgs.push(format!("multiplexer target {fresh} is not fresh"));
                return;
            }
            same_context(
                &c.context,
                &gamma.with(fresh.clone(), Type::Inter(parts)),
                msgs,
            );
            same_type(&c.ty, &p.ty, msgs);
            match p.subject.rename_instance(merged, fresh) {
                Ok(m) => same_subject(&c.subject, &m, msgs),
                Err(e) => msgs.push(e.to_string()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::derivation::fixtures::*;
    use crate::derivation::{axiom, Sequent};
    use crate::names::Name;

    #[test]
    fn example_derivations_check() {
        for d in [first(), second(), third(), self_app()] {
            let r = check_derivation(&d);
            assert!(r.is_ok(), "{r}");
        }
    }

    #[test]
    fn overlapping_elimination_is_reported() {
        let f = axiom("z", big_a());
        let a_ = axiom("z", a());
        let bad = Derivation {
            rule: Rule::ArrowElim,
            conclusion: Sequent {
                context: Context::singleton(Name::from("z"), Type::Linear(a())),
                subject: Term::app(Term::var("z"), Term::var("z")),
                ty: Type::Linear(a()),
            },
            premises: vec![f, a_],
        };
        let r = check_derivation(&bad);
        assert!(
            r.violations.iter().any(|v| v.message.contains("Γ # Δ")),
            "{r}"
        );
    }

    #[test]
    fn axiom_with_intersection_is_reported() {
        let aa = Type::Inter(vec![Type::Linear(a()), Type::Linear(a())]);
        let bad = Derivation {
            rule: Rule::Ax,
            conclusion: Sequent {
                context: Context::singleton(Name::from("x"), aa.clone()),
                subject: Term::var("x"),
                ty: aa,
            },
            premises: vec![],
        };
        let r = check_derivation(&bad);
        assert!(
            r.violations
                .iter()
                .any(|v| v.message == "axiom requires linear type"),
            "{r}"
        );
    }

    #[test]
    fn all_violations_are_collected_with_paths() {
        let mut d = first();
        d.premises[1].premises[0].conclusion.ty = Type::Linear(a());
        d.premises[0].premises[0].conclusion.subject = Term::var("x");
        let r = check_derivation(&d);
        let paths: Vec<Vec<usize>> = r.violations.iter().map(|v| v.path.clone()).collect();
        assert!(paths.contains(&vec![0, 0]), "{r}");
        assert!(paths.contains(&vec![1, 0]), "{r}");
        assert!(paths.contains(&vec![1]), "{r}");
    }
}
