use std::fmt;

use thiserror::Error;

use super::Term;
use crate::names::Name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: {message}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Ident(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lambda => f.write_str("λ"),
            Tok::Dot => f.write_str("."),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Ident(s) => f.write_str(s),
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '\\' | 'λ' => {
                out.push((i, Tok::Lambda));
                i += 1;
            }
            '.' => {
                out.push((i, Tok::Dot));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) => self.lambda(),
            _ => self.application(),
        }
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.pos += 1;
        let mut binders = Vec::new();
        while let Some(Tok::Ident(x)) = self.peek() {
            binders.push(Name::from(x.as_str()));
            self.pos += 1;
        }
        if binders.is_empty() {
            return self.error("expected a binder after λ");
        }
        if self.peek() != Some(&Tok::Dot) {
            return self.error("expected '.' after binders");
        }
        self.pos += 1;
        let body = self.term()?;
        Ok(binders
            .into_iter()
            .rev()
            .fold(body, |acc, x| Term::Lam(x, Box::new(acc))))
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut acc = match self.atom()? {
            Some(t) => t,
            None => return self.error(self.describe_unexpected()),
        };
        loop {
            if self.peek() == Some(&Tok::Lambda) {
                // a trailing abstraction is the last argument
                let arg = self.lambda()?;
                return Ok(Term::app(acc, arg));
            }
            match self.atom()? {
                Some(arg) => acc = Term::app(acc, arg),
                None => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<Option<Term>, ParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let t = Term::Var(Name::from(x.as_str()));
                self.pos += 1;
                Ok(Some(t))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.term()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(Some(inner))
            }
            _ => Ok(None),
        }
    }

    fn describe_unexpected(&self) -> String {
        match self.peek() {
            Some(t) => format!("unexpected '{t}'"),
            None => "unexpected end of input".to_string(),
        }
    }
}

/// Parses the surface grammar: `\x y. M`, left-associative application,
/// parentheses. `λ` and `\` are interchangeable.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.error(p.describe_unexpected());
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        assert_eq!(
            parse_term("\\x. x").unwrap(),
            Term::lam("x", Term::var("x"))
        );
        assert_eq!(parse_term("λx. x").unwrap(), Term::lam("x", Term::var("x")));
    }

    #[test]
    fn application_is_left_associative() {
        let expected = Term::app(Term::app(Term::var("x"), Term::var("y")), Term::var("z"));
        assert_eq!(parse_term("x y z").unwrap(), expected);
    }

    #[test]
    fn body_extends_right() {
        let t = parse_term("\\x y. y x x").unwrap();
        let body = Term::app(Term::app(Term::var("y"), Term::var("x")), Term::var("x"));
        assert_eq!(t, Term::lam("x", Term::lam("y", body)));
    }

    #[test]
    fn example_subject() {
        let t = parse_term("(\\x. x x) ((\\y. y) z)").unwrap();
        let xx = Term::lam("x", Term::app(Term::var("x"), Term::var("x")));
        let iz = Term::app(Term::lam("y", Term::var("y")), Term::var("z"));
        assert_eq!(t, Term::app(xx, iz));
    }

    #[test]
    fn identifiers_with_primes_and_digits() {
        assert_eq!(parse_term("x_1'").unwrap(), Term::var("x_1'"));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term("(x y").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_term("\\. x").unwrap_err();
        assert_eq!(e.position, 1);
        let e = parse_term("x )").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse_term("").is_err());
        assert!(parse_term("x $").is_err());
    }
}
