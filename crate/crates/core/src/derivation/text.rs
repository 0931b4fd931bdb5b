//! Outline rendering: conclusion first, premises indented below it.
//!
//! ```text
//! x: a ⊢ x: a  (Ax)
//! ```

use super::{check_derivation, DecodeError, Derivation, Rule, Sequent};
use crate::context::Context;
use crate::names::Name;
use crate::term::parse_term;
use crate::types::{parse_type, Type};

const INDENT: &str = "  ";

fn label(d: &Derivation) -> String {
    match &d.rule {
        Rule::Ax => "Ax".into(),
        Rule::Weaken { var, .. } => format!("w {var}"),
        Rule::ArrowIntro { var } => format!("→I {var}"),
        Rule::ArrowElim => "→E".into(),
        Rule::And => format!("∧{}", d.premises.len()),
        Rule::Mux { merged, fresh } => {
            let ms: Vec<&str> = merged.iter().map(|m| m.as_str()).collect();
            format!("m {} ⇒ {fresh}", ms.join(" "))
        }
    }
}

pub fn pretty_print(d: &Derivation) -> String {
    fn go(d: &Derivation, depth: usize, out: &mut String) {
        for _ in 0..depth {
            out.push_str(INDENT);
        }
        out.push_str(&format!("{}  ({})\n", d.conclusion, label(d)));
        for p in &d.premises {
            go(p, depth + 1, out);
        }
    }
    let mut out = String::new();
    go(d, 0, &mut out);
    out
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, DecodeError> {
    Err(DecodeError::Schema {
        path: format!("line {line}"),
        message: message.into(),
    })
}

struct Line {
    depth: usize,
    conclusion: Sequent,
    label: String,
    number: usize,
}

fn parse_line(number: usize, raw: &str) -> Result<Line, DecodeError> {
    let body = raw.trim_start_matches(' ');
    let indent = raw.len() - body.len();
    if !indent.is_multiple_of(INDENT.len()) {
        return err(number, "indentation must be a multiple of two spaces");
    }
    let Some((seq, lab)) = body.trim_end().rsplit_once("  (") else {
        return err(number, "missing rule label");
    };
    let Some(label) = lab.strip_suffix(')') else {
        return err(number, "unterminated rule label");
    };
    let Some((ctx_text, judgement)) = seq.split_once('⊢') else {
        return err(number, "missing ⊢");
    };
    let Some((term_text, ty_text)) = judgement.split_once(':') else {
        return err(number, "missing ':' after the subject");
    };
    let mut context = Context::new();
    for binding in ctx_text.split(',').map(str::trim).filter(|b| !b.is_empty()) {
        let Some((x, t)) = binding.split_once(':') else {
            return err(number, format!("bad binding {binding:?}"));
        };
        let t = parse_type(t).or_else(|e| err(number, e.to_string()))?;
        if context.insert(Name::from(x.trim()), t).is_some() {
            return err(number, format!("{} bound twice", x.trim()));
        }
    }
    let subject = parse_term(term_text).or_else(|e| err(number, e.to_string()))?;
    let ty = parse_type(ty_text).or_else(|e| err(number, e.to_string()))?;
    Ok(Line {
        depth: indent / INDENT.len(),
        conclusion: Sequent {
            context,
            subject,
            ty,
        },
        label: label.trim().to_string(),
        number,
    })
}

fn parse_label(line: &Line, premises: usize) -> Result<Rule, DecodeError> {
    let n = line.number;
    let words: Vec<&str> = line.label.split_whitespace().collect();
    let need = |k: usize| {
        if premises == k {
            Ok(())
        } else {
            err(n, format!("expected {k} premise(s)"))
        }
    };
    match words.as_slice() {
        ["Ax"] => need(0).map(|_| Rule::Ax),
        ["w", x] => {
            need(1)?;
            match line.conclusion.context.get(x) {
                Some(Type::Linear(a)) => Ok(Rule::Weaken {
                    var: Name::from(*x),
                    ty: a.clone(),
                }),
                _ => err(n, format!("weakened variable {x} needs a linear binding")),
            }
        }
        ["→I" | "->I", x] => need(1).map(|_| Rule::ArrowIntro {
            var: Name::from(*x),
        }),
        ["→E" | "->E"] => need(2).map(|_| Rule::ArrowElim),
        [and] if and.starts_with('∧') || and.starts_with("/\\") => {
            let k = and.trim_start_matches('∧').trim_start_matches("/\\");
            if k.parse::<usize>().ok() != Some(premises) || premises < 2 {
                return err(n, format!("∧{k} does not match {premises} premises"));
            }
            Ok(Rule::And)
        }
        ["m", rest @ ..] => {
            need(1)?;
            let Some(pos) = rest.iter().position(|w| *w == "⇒" || *w == "=>") else {
                return err(n, "multiplexer label needs ⇒");
            };
            let (merged, fresh) = (&rest[..pos], &rest[pos + 1..]);
            if merged.len() < 2 || fresh.len() != 1 {
                return err(n, "multiplexer needs n ≥ 2 merged variables and one target");
            }
            Ok(Rule::Mux {
                merged: merged.iter().map(|m| Name::from(*m)).collect(),
                fresh: Name::from(fresh[0]),
            })
        }
        _ => err(n, format!("unknown rule label {:?}", line.label)),
    }
}

/// Reads the output of [`pretty_print`] back, then checks it.
pub fn parse_pretty(text: &str) -> Result<Derivation, DecodeError> {
    let lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(i + 1, l))
        .collect::<Result<Vec<_>, _>>()?;
    if lines.is_empty() {
        return err(0, "empty derivation");
    }
    let mut pos = 0;
    let d = build(&lines, &mut pos, 0)?;
    if pos != lines.len() {
        return err(lines[pos].number, "text after the root derivation");
    }
    let report = check_derivation(&d);
    if !report.is_ok() {
        return Err(DecodeError::Check(report));
    }
    Ok(d)
}

fn build(lines: &[Line], pos: &mut usize, depth: usize) -> Result<Derivation, DecodeError> {
    let line = &lines[*pos];
    if line.depth != depth {
        return err(line.number, format!("expected indentation depth {depth}"));
    }
    *pos += 1;
    let mut premises = Vec::new();
    while *pos < lines.len() && lines[*pos].depth > depth {
        premises.push(build(lines, pos, depth + 1)?);
    }
    let rule = parse_label(line, premises.len())?;
    Ok(Derivation {
        rule,
        conclusion: line.conclusion.clone(),
        premises,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::axiom;
    use crate::derivation::fixtures::*;

    #[test]
    fn axiom_line() {
        assert_eq!(pretty_print(&axiom("x", a())), "x: a ⊢ x: a  (Ax)\n");
    }

    #[test]
    fn example_layout() {
        let text = pretty_print(&third());
        assert_eq!(
            text,
            "z: ((a -> a) ∧ a) ⊢ z z: a  (m z1 z2 ⇒ z)\n\
             \x20 z1: a -> a, z2: a ⊢ z1 z2: a  (→E)\n\
             \x20   z1: a -> a ⊢ z1: a -> a  (Ax)\n\
             \x20   z2: a ⊢ z2: a  (Ax)\n"
        );
    }

    #[test]
    fn round_trips() {
        for d in [first(), second(), third(), self_app()] {
            assert_eq!(parse_pretty(&pretty_print(&d)).unwrap(), d);
        }
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(parse_pretty("x: a ⊢ x: a  (Foo)").is_err());
        assert!(parse_pretty("x: a ⊢ x: a").is_err());
    }
}
