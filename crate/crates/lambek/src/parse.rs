//! Text syntax for formulae and sequents.
//!
//! Connectives: `\`, `/`, `*`, `&`, `|`, prefix `!`, `<>`, `[]`; the unit is
//! `1`. Unary operators bind tightest, then `*`/`&`/`|` (left-associative),
//! then `\`/`/`. Antecedents are comma-separated items, a stoup is written
//! `{A, B};`, islands are `[ ... ]`, and the arrow is `=>`. In item position
//! a leading `[` always opens an island; a formula item starting with `[]`
//! must be parenthesized.

use crate::formula::Formula;
use crate::sequent::{MetaFormula, Sequent, Stoup, TreeTerm};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn ident(&mut self) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        if self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphabetic() || *c == b'_')
        {
            self.pos += 1;
            while self.src.get(self.pos).is_some_and(|c| {
                c.is_ascii_alphanumeric() || matches!(c, b'_' | b'#' | b'~' | b'\'')
            }) {
                self.pos += 1;
            }
            Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            self.err("expected identifier")
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Formula::bang(self.atom()?))
            }
            Some(b'<') => {
                self.expect("<>")?;
                Ok(Formula::dia(self.atom()?))
            }
            Some(b'[') => {
                self.pos += 1;
                self.expect("]")?;
                Ok(Formula::boxinv(self.atom()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Formula::Unit)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => Ok(Formula::Var(self.ident()?)),
            _ => self.err("expected a formula"),
        }
    }

    fn mul_term(&mut self) -> PResult<Formula> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = Formula::prod(acc, self.atom()?);
                }
                Some(b'&') => {
                    self.pos += 1;
                    acc = Formula::conj(acc, self.atom()?);
                }
                Some(b'|') => {
                    self.pos += 1;
                    acc = Formula::disj(acc, self.atom()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut acc = self.mul_term()?;
        loop {
            match self.peek() {
                Some(b'\\') => {
                    self.pos += 1;
                    acc = Formula::ldiv(acc, self.mul_term()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = Formula::rdiv(acc, self.mul_term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn stoup(&mut self) -> PResult<Stoup> {
        // caller saw '{'
        self.expect("{")?;
        let mut members = Vec::new();
        if self.peek() != Some(b'}') {
            loop {
                members.push(self.formula()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("}")?;
        self.expect(";")?;
        Ok(Stoup::from(members))
    }

    /// `antecedent := [stoup] [item ("," item)*]`, terminated by `=>`, `]` or
    /// end of input.
    fn antecedent(&mut self) -> PResult<MetaFormula> {
        let stoup = if self.peek() == Some(b'{') { self.stoup()? } else { Stoup::empty() };
        let mut items = Vec::new();
        if self.at_antecedent_end() {
            return Ok(MetaFormula::new(stoup, items));
        }
        loop {
            items.push(self.item()?);
            if !self.eat(",") {
                break;
            }
        }
        Ok(MetaFormula::new(stoup, items))
    }

    fn at_antecedent_end(&mut self) -> bool {
        self.skip_ws();
        self.at_end()
            || self.src.get(self.pos) == Some(&b']')
            || self.src[self.pos..].starts_with(b"=>")
    }

    fn item(&mut self) -> PResult<TreeTerm> {
        if self.peek() == Some(b'[') {
            self.pos += 1;
            let inner = self.antecedent()?;
            self.expect("]")?;
            Ok(TreeTerm::Bracketed(inner))
        } else {
            Ok(TreeTerm::Leaf(self.formula()?))
        }
    }

    fn sequent(&mut self) -> PResult<Sequent> {
        let antecedent = self.antecedent()?;
        self.expect("=>")?;
        let succedent = self.formula()?;
        Ok(Sequent::new(antecedent, succedent))
    }
}

pub fn parse_formula(text: &str) -> PResult<Formula> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    if p.at_end() {
        Ok(f)
    } else {
        p.err("trailing input")
    }
}

pub fn parse_sequent(text: &str) -> PResult<Sequent> {
    let mut p = Parser::new(text);
    let s = p.sequent()?;
    if p.at_end() {
        Ok(s)
    } else {
        p.err("trailing input")
    }
}

/// A meta-formula on its own (no `=>` part).
pub fn parse_meta(text: &str) -> PResult<MetaFormula> {
    let mut p = Parser::new(text);
    let m = p.antecedent()?;
    if p.at_end() {
        Ok(m)
    } else {
        p.err("trailing input")
    }
}

// Formulae travel through JSON as their text rendering.
impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula as F;

    #[test]
    fn parses_spec_formulas() {
        assert_eq!(
            parse_formula("(N\\S)/N").unwrap(),
            F::rdiv(F::ldiv(F::var("N"), F::var("S")), F::var("N"))
        );
        assert_eq!(
            parse_formula("!((s/s)/!([](s/(a*b))))").unwrap(),
            F::bang(F::rdiv(
                F::rdiv(F::var("s"), F::var("s")),
                F::bang(F::boxinv(F::rdiv(F::var("s"), F::prod(F::var("a"), F::var("b")))))
            ))
        );
    }

    #[test]
    fn reports_error_offset() {
        let e = parse_formula("p \\").unwrap_err();
        assert_eq!(e.offset, 3);
    }

    #[test]
    fn parses_sequents() {
        let s = parse_sequent("{N}; [N], (<>N\\S)/N => S").unwrap();
        assert_eq!(s.antecedent.stoup, Stoup::from(vec![F::var("N")]));
        assert_eq!(s.antecedent.items.len(), 2);
        assert_eq!(
            s.antecedent.items[0],
            TreeTerm::Bracketed(MetaFormula::of_formulas(vec![F::var("N")]))
        );
        assert_eq!(s.succedent, F::var("S"));

        let t = parse_sequent("=> 1").unwrap();
        assert!(t.antecedent.items.is_empty() && t.antecedent.stoup.is_empty());
        assert_eq!(t.succedent, F::Unit);

        let u = parse_sequent("[p], q => <>p * q").unwrap();
        assert_eq!(u.succedent, F::prod(F::dia(F::var("p")), F::var("q")));
    }

    #[test]
    fn round_trips_render() {
        for text in [
            "(N\\S)/N",
            "!((s/s)/!([](s/(a*b))))",
            "p/q&r",
            "(p|q)*1",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
        for text in [
            "{N}; [N], (<>N\\S)/N => S",
            "=> 1",
            "[p], q => <>p * q",
            "{p, q}; => p",
            "CN, [[ X, [[ ]], Y ]] => CN",
            "([]p), q => r",
        ] {
            let s = parse_sequent(text).unwrap();
            assert_eq!(parse_sequent(&s.to_string()).unwrap(), s, "{text}");
        }
    }

    #[test]
    fn empty_meta_renders_empty() {
        assert_eq!(MetaFormula::empty().to_string(), "");
        let m = MetaFormula::new(Stoup::from(vec![F::var("p"), F::var("q")]), vec![]);
        assert_eq!(m.to_string(), "{p, q};");
    }
}
