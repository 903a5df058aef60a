//! Formula syntax: variables, the unit, two divisions, product, the additives,
//! the subexponential `!` and the bracket modalities `<>` and `[]⁻¹`.

use std::fmt;

/// A formula of the (bracketed, subexponential) multiplicative-additive Lambek calculus.
///
/// `LDiv(a, b)` is `a\b` (argument on the left), `RDiv(b, a)` is `b/a`
/// (argument on the right). `Box` stands for the left inverse `[]⁻¹`,
/// written `[]` in the text syntax; `Dia` is `<>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Unit,
    LDiv(Box<Formula>, Box<Formula>),
    RDiv(Box<Formula>, Box<Formula>),
    Prod(Box<Formula>, Box<Formula>),
    Conj(Box<Formula>, Box<Formula>),
    Disj(Box<Formula>, Box<Formula>),
    Bang(Box<Formula>),
    Dia(Box<Formula>),
    Box(Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }
    pub fn ldiv(a: Formula, b: Formula) -> Formula {
        Formula::LDiv(a.into(), b.into())
    }
    pub fn rdiv(b: Formula, a: Formula) -> Formula {
        Formula::RDiv(b.into(), a.into())
    }
    pub fn prod(a: Formula, b: Formula) -> Formula {
        Formula::Prod(a.into(), b.into())
    }
    pub fn conj(a: Formula, b: Formula) -> Formula {
        Formula::Conj(a.into(), b.into())
    }
    pub fn disj(a: Formula, b: Formula) -> Formula {
        Formula::Disj(a.into(), b.into())
    }
    pub fn bang(a: Formula) -> Formula {
        Formula::Bang(a.into())
    }
    pub fn dia(a: Formula) -> Formula {
        Formula::Dia(a.into())
    }
    pub fn boxinv(a: Formula) -> Formula {
        Formula::Box(a.into())
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            Formula::LDiv(..)
                | Formula::RDiv(..)
                | Formula::Prod(..)
                | Formula::Conj(..)
                | Formula::Disj(..)
        )
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Unit => 1,
            Formula::LDiv(a, b)
            | Formula::RDiv(a, b)
            | Formula::Prod(a, b)
            | Formula::Conj(a, b)
            | Formula::Disj(a, b) => 1 + a.size() + b.size(),
            Formula::Bang(a) | Formula::Dia(a) | Formula::Box(a) => 1 + a.size(),
        }
    }

    /// Immediate subformulae (arity 0, 1 or 2).
    pub fn immediate_subformulas(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Unit => vec![],
            Formula::LDiv(a, b)
            | Formula::RDiv(a, b)
            | Formula::Prod(a, b)
            | Formula::Conj(a, b)
            | Formula::Disj(a, b) => vec![a, b],
            Formula::Bang(a) | Formula::Dia(a) | Formula::Box(a) => vec![a],
        }
    }

    pub fn contains_unit(&self) -> bool {
        match self {
            Formula::Unit => true,
            Formula::Var(_) => false,
            Formula::LDiv(a, b)
            | Formula::RDiv(a, b)
            | Formula::Prod(a, b)
            | Formula::Conj(a, b)
            | Formula::Disj(a, b) => a.contains_unit() || b.contains_unit(),
            Formula::Bang(a) | Formula::Dia(a) | Formula::Box(a) => a.contains_unit(),
        }
    }

    /// Does the formula lie in the fragment delimited by the given connective set?
    pub fn uses_only(
        &self,
        unit: bool,
        additives: bool,
        brackets: bool,
        bang: bool,
        one_division: bool,
    ) -> bool {
        let sub = |f: &Formula| f.uses_only(unit, additives, brackets, bang, one_division);
        match self {
            Formula::Var(_) => true,
            Formula::Unit => unit,
            Formula::RDiv(a, b) => sub(a) && sub(b),
            Formula::LDiv(a, b) | Formula::Prod(a, b) => !one_division && sub(a) && sub(b),
            Formula::Conj(a, b) | Formula::Disj(a, b) => {
                additives && !one_division && sub(a) && sub(b)
            }
            Formula::Bang(a) => bang && sub(a),
            Formula::Dia(a) | Formula::Box(a) => brackets && sub(a),
        }
    }
}

fn operand(f: &Formula, out: &mut String) {
    if f.is_binary() {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Var(v) => out.push_str(v),
        Formula::Unit => out.push('1'),
        Formula::LDiv(a, b) => {
            operand(a, out);
            out.push('\\');
            operand(b, out);
        }
        Formula::RDiv(b, a) => {
            operand(b, out);
            out.push('/');
            operand(a, out);
        }
        Formula::Prod(a, b) => {
            operand(a, out);
            out.push('*');
            operand(b, out);
        }
        Formula::Conj(a, b) => {
            operand(a, out);
            out.push('&');
            operand(b, out);
        }
        Formula::Disj(a, b) => {
            operand(a, out);
            out.push('|');
            operand(b, out);
        }
        Formula::Bang(a) => {
            out.push('!');
            operand(a, out);
        }
        Formula::Dia(a) => {
            out.push_str("<>");
            operand(a, out);
        }
        Formula::Box(a) => {
            out.push_str("[]");
            operand(a, out);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(self, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parenthesizes_binary_subterms() {
        let f = Formula::rdiv(
            Formula::ldiv(Formula::var("N"), Formula::var("S")),
            Formula::var("N"),
        );
        assert_eq!(f.to_string(), "(N\\S)/N");
    }

    #[test]
    fn display_unary_chain() {
        let f = Formula::bang(Formula::boxinv(Formula::var("p")));
        assert_eq!(f.to_string(), "![]p");
        let g = Formula::bang(Formula::prod(Formula::var("a"), Formula::var("b")));
        assert_eq!(g.to_string(), "!(a*b)");
    }

    #[test]
    fn size_counts_nodes() {
        let f = Formula::rdiv(Formula::prod(Formula::var("a"), Formula::var("b")), Formula::Unit);
        assert_eq!(f.size(), 5);
    }
}
