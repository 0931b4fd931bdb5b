//! Intersection types: commutative, but neither idempotent nor associative.
//!
//! The derived `Ord` is the fixed structural order used to canonicalize:
//! variant tag first, then children lexicographically.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::names::Name;
use crate::term::parse::{is_ident_continue, is_ident_start};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinearType {
    Var(Name),
    Arrow(Box<Type>, Box<LinearType>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Linear(LinearType),
    /// Always at least two children.
    Inter(Vec<Type>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("intersection needs at least two children, got {0}")]
    ShortIntersection(usize),
    #[error("type syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
}

impl LinearType {
    pub fn var(name: impl Into<Name>) -> LinearType {
        LinearType::Var(name.into())
    }

    pub fn arrow(dom: Type, cod: LinearType) -> LinearType {
        LinearType::Arrow(Box::new(dom), Box::new(cod))
    }

    fn canonical(&self) -> LinearType {
        match self {
            LinearType::Var(_) => self.clone(),
            LinearType::Arrow(d, c) => LinearType::arrow(d.canonicalize(), c.canonical()),
        }
    }
}

impl Type {
    pub fn var(name: impl Into<Name>) -> Type {
        Type::Linear(LinearType::var(name))
    }

    pub fn arrow(dom: Type, cod: LinearType) -> Type {
        Type::Linear(LinearType::arrow(dom, cod))
    }

    /// A flat intersection of `children`, which must number at least two.
    pub fn inter(children: Vec<Type>) -> Result<Type, TypeError> {
        if children.len() < 2 {
            return Err(TypeError::ShortIntersection(children.len()));
        }
        Ok(Type::Inter(children))
    }

    pub fn as_linear(&self) -> Option<&LinearType> {
        match self {
            Type::Linear(a) => Some(a),
            Type::Inter(_) => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Type::Linear(_))
    }

    /// `l(A) = 1`, `l(σ1 ∧ ... ∧ σn) = Σ l(σi)`.
    pub fn element_count(&self) -> usize {
        match self {
            Type::Linear(_) => 1,
            Type::Inter(cs) => cs.iter().map(Type::element_count).sum(),
        }
    }

    /// The linear leaves, left to right.
    pub fn elements(&self) -> Vec<&LinearType> {
        fn go<'a>(t: &'a Type, out: &mut Vec<&'a LinearType>) {
            match t {
                Type::Linear(a) => out.push(a),
                Type::Inter(cs) => cs.iter().for_each(|c| go(c, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn canonicalize(&self) -> Type {
        match self {
            Type::Linear(a) => Type::Linear(a.canonical()),
            Type::Inter(cs) => {
                let mut cs: Vec<Type> = cs.iter().map(Type::canonicalize).collect();
                cs.sort();
                Type::Inter(cs)
            }
        }
    }

    pub fn type_equal(&self, other: &Type) -> bool {
        self == other || self.canonicalize() == other.canonicalize()
    }

    /// Type variables in order of first occurrence.
    pub fn type_vars(&self) -> Vec<Name> {
        fn lin(a: &LinearType, out: &mut Vec<Name>) {
            match a {
                LinearType::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone())
                    }
                }
                LinearType::Arrow(d, c) => {
                    ty(d, out);
                    lin(c, out);
                }
            }
        }
        fn ty(t: &Type, out: &mut Vec<Name>) {
            match t {
                Type::Linear(a) => lin(a, out),
                Type::Inter(cs) => cs.iter().for_each(|c| ty(c, out)),
            }
        }
        let mut out = Vec::new();
        ty(self, &mut out);
        out
    }

    /// Equality up to commutativity and a bijective renaming of type variables.
    pub fn equal_up_to_renaming(&self, other: &Type) -> bool {
        type Maps = (BTreeMap<Name, Name>, BTreeMap<Name, Name>);
        fn lin(a: &LinearType, b: &LinearType, m: &mut Maps) -> bool {
            match (a, b) {
                (LinearType::Var(x), LinearType::Var(y)) => match (m.0.get(x), m.1.get(y)) {
                    (Some(y2), Some(x2)) => y2 == y && x2 == x,
                    (None, None) => {
                        m.0.insert(x.clone(), y.clone());
                        m.1.insert(y.clone(), x.clone());
                        true
                    }
                    _ => false,
                },
                (LinearType::Arrow(d1, c1), LinearType::Arrow(d2, c2)) => {
                    ty(d1, d2, m) && lin(c1, c2, m)
                }
                _ => false,
            }
        }
        fn ty(s: &Type, t: &Type, m: &mut Maps) -> bool {
            match (s, t) {
                (Type::Linear(a), Type::Linear(b)) => lin(a, b, m),
                (Type::Inter(cs), Type::Inter(ds)) if cs.len() == ds.len() => {
                    perm(cs, ds, &mut vec![false; ds.len()], m)
                }
                _ => false,
            }
        }
        fn perm(cs: &[Type], ds: &[Type], used: &mut Vec<bool>, m: &mut Maps) -> bool {
            let Some((c, rest)) = cs.split_first() else {
                return true;
            };
            for j in 0..ds.len() {
                if used[j] {
                    continue;
                }
                let saved = m.clone();
                if ty(c, &ds[j], m) {
                    used[j] = true;
                    if perm(rest, ds, used, m) {
                        return true;
                    }
                    used[j] = false;
                }
                *m = saved;
            }
            false
        }
        ty(self, other, &mut (BTreeMap::new(), BTreeMap::new()))
    }
}

impl From<LinearType> for Type {
    fn from(a: LinearType) -> Type {
        Type::Linear(a)
    }
}

impl fmt::Display for LinearType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearType::Var(v) => write!(f, "{v}"),
            LinearType::Arrow(d, c) => match &**d {
                Type::Linear(LinearType::Arrow(..)) => write!(f, "({d}) -> {c}"),
                _ => write!(f, "{d} -> {c}"),
            },
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Linear(a) => write!(f, "{a}"),
            Type::Inter(cs) => {
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ∧ ")?;
                    }
                    match c {
                        Type::Linear(LinearType::Arrow(..)) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for LinearType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

// ---- text syntax ----

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    And,
    LParen,
    RParen,
}

fn syntax<T>(position: usize, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Syntax {
        position,
        message: message.into(),
    })
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, TypeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '∧' => {
                out.push((i, Tok::And));
                i += 1;
            }
            '→' => {
                out.push((i, Tok::Arrow));
                i += 1;
            }
            '/' if chars.get(i + 1) == Some(&'\\') => {
                out.push((i, Tok::And));
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((i, Tok::Arrow));
                i += 2;
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => return syntax(i, format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct TypeParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl TypeParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn ty(&mut self) -> Result<Type, TypeError> {
        let dom = self.atom()?;
        if self.peek() != Some(&Tok::Arrow) {
            return Ok(dom);
        }
        self.pos += 1;
        let at = self.offset();
        match self.ty()? {
            Type::Linear(cod) => Ok(Type::arrow(dom, cod)),
            Type::Inter(_) => syntax(at, "arrow codomain must be linear"),
        }
    }

    fn atom(&mut self) -> Result<Type, TypeError> {
        match self.peek().cloned() {
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Type::var(v.as_str()))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let mut children = vec![self.ty()?];
                while self.peek() == Some(&Tok::And) {
                    self.pos += 1;
                    children.push(self.ty()?);
                }
                if self.peek() != Some(&Tok::RParen) {
                    return syntax(self.offset(), "expected ')'");
                }
                self.pos += 1;
                if children.len() == 1 {
                    Ok(children.pop().unwrap())
                } else {
                    Ok(Type::Inter(children))
                }
            }
            Some(t) => syntax(self.offset(), format!("unexpected token {t:?}")),
            None => syntax(self.end, "unexpected end of input"),
        }
    }
}

/// Parses `a`, `σ -> A` (right associative) and `(σ1 ∧ ... ∧ σn)`.
/// `/\` and `→` are accepted as ASCII/Unicode alternatives.
pub fn parse_type(text: &str) -> Result<Type, TypeError> {
    let toks = tokenize(text)?;
    let mut p = TypeParser {
        toks,
        pos: 0,
        end: text.chars().count(),
    };
    let t = p.ty()?;
    if p.pos != p.toks.len() {
        return syntax(p.offset(), "trailing input");
    }
    Ok(t)
}

impl std::str::FromStr for Type {
    type Err = TypeError;
    fn from_str(s: &str) -> Result<Type, TypeError> {
        parse_type(s)
    }
}

// ---- JSON ----

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum TypeJson {
    Var(String),
    Arrow(Box<(TypeJson, TypeJson)>),
    Inter(Vec<TypeJson>),
}

impl TypeJson {
    fn from_type(t: &Type) -> TypeJson {
        match t {
            Type::Linear(a) => Self::from_linear(a),
            Type::Inter(cs) => TypeJson::Inter(cs.iter().map(Self::from_type).collect()),
        }
    }

    fn from_linear(a: &LinearType) -> TypeJson {
        match a {
            LinearType::Var(v) => TypeJson::Var(v.to_string()),
            LinearType::Arrow(d, c) => {
                TypeJson::Arrow(Box::new((Self::from_type(d), Self::from_linear(c))))
            }
        }
    }

    fn into_type(self) -> Result<Type, String> {
        match self {
            TypeJson::Var(v) => Ok(Type::var(v)),
            TypeJson::Arrow(pair) => {
                let (d, c) = *pair;
                match c.into_type()? {
                    Type::Linear(c) => Ok(Type::arrow(d.into_type()?, c)),
                    Type::Inter(_) => Err("arrow codomain must be linear".into()),
                }
            }
            TypeJson::Inter(cs) => {
                let cs = cs
                    .into_iter()
                    .map(TypeJson::into_type)
                    .collect::<Result<Vec<_>, _>>()?;
                Type::inter(cs).map_err(|e| e.to_string())
            }
        }
    }
}

impl Serialize for Type {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TypeJson::from_type(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Type {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Type, D::Error> {
        TypeJson::deserialize(d)?
            .into_type()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn element_counts() {
        assert_eq!(ty("a").element_count(), 1);
        assert_eq!(ty("((a -> a) ∧ a)").element_count(), 2);
        assert_eq!(ty("((a ∧ b) ∧ c)").element_count(), 3);
    }

    #[test]
    fn algebra() {
        let big_a = "(a -> a)";
        assert!(ty(&format!("({big_a} ∧ a)")).type_equal(&ty(&format!("(a ∧ {big_a})"))));
        assert!(!ty(&format!("({big_a} ∧ {big_a})")).type_equal(&ty(big_a)));
        assert!(!ty("((a ∧ b) ∧ c)").type_equal(&ty("(a ∧ b ∧ c)")));
    }

    #[test]
    fn parse_and_display() {
        let t = ty("((a -> a) /\\ a) -> a");
        assert_eq!(t.to_string(), "((a -> a) ∧ a) -> a");
        assert_eq!(ty(&t.to_string()), t);
        assert_eq!(ty("a -> b -> c"), ty("a -> (b -> c)"));
        assert_eq!(ty("(a -> b) -> c").to_string(), "(a -> b) -> c");
        assert!(parse_type("a -> (a ∧ b)").is_err());
        assert!(parse_type("(a ∧").is_err());
    }

    #[test]
    fn json_shape() {
        let t = ty("(a ∧ b) -> a");
        let j = serde_json::to_value(&t).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"arrow": [{"inter": [{"var": "a"}, {"var": "b"}]}, {"var": "a"}]})
        );
        assert_eq!(serde_json::from_value::<Type>(j).unwrap(), t);
        assert!(
            serde_json::from_value::<Type>(serde_json::json!({"inter": [{"var": "a"}]})).is_err()
        );
    }

    #[test]
    fn renaming_equivalence() {
        assert!(ty("((b -> b) ∧ b) -> b").equal_up_to_renaming(&ty("(a ∧ (a -> a)) -> a")));
        assert!(!ty("a -> b").equal_up_to_renaming(&ty("a -> a")));
        assert!(!ty("a -> a").equal_up_to_renaming(&ty("a -> b")));
    }
}
