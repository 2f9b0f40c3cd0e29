//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! expr    ::= join
//! join    ::= meet (`\/` meet)*
//! meet    ::= add (`/\` add)*
//! add     ::= mul ((`+` | `(+)`) mul | `(-)` scalar)*
//! mul     ::= prefix (`.` prefix)*
//! prefix  ::= scalar `*` prefix | `~` prefix | `<label>` prefix | `<>` prefix
//!           | `mu` var `.` expr | `nu` var `.` expr | atom
//! atom    ::= `1` | `0` | `prop(name)` | var | `(` expr `)`
//! scalar  ::= [`-`] digits [`/` digits | `.` digits] | `(` `-` ... `)`
//! ```
//!
//! Binders extend as far to the right as possible. Decimal scalars need a
//! digit after the dot, so `1 . 0` (spaced) is a product while `1.0` is the
//! scalar one.

use crate::rational::{parse_rat, Rat};

use super::{check_kind, Formula, LogicError, LogicKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Slash,
    Ident(String),
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    OPlus,
    OMinus,
    Join,
    Meet,
    Tilde,
    Dot,
    Lt,
    Gt,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                if i + 2 < bytes.len() && bytes[i + 2] == b')' {
                    match bytes[i + 1] {
                        b'+' => {
                            toks.push((i, Tok::OPlus));
                            i += 3;
                            continue;
                        }
                        b'-' => {
                            toks.push((i, Tok::OMinus));
                            i += 3;
                            continue;
                        }
                        _ => {}
                    }
                }
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '\\' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                    toks.push((i, Tok::Join));
                    i += 2;
                } else {
                    return Err(syntax(i, "expected `\\/`"));
                }
            }
            '/' => {
                if i + 1 < bytes.len() && bytes[i + 1] == b'\\' {
                    toks.push((i, Tok::Meet));
                    i += 2;
                } else {
                    toks.push((i, Tok::Slash));
                    i += 1;
                }
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '~' => {
                toks.push((i, Tok::Tilde));
                i += 1;
            }
            '.' => {
                toks.push((i, Tok::Dot));
                i += 1;
            }
            '<' => {
                toks.push((i, Tok::Lt));
                i += 1;
            }
            '>' => {
                toks.push((i, Tok::Gt));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                // decimal continuation only when a digit follows the dot
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                toks.push((start, Tok::Num(text[start..i].to_string())));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            other => return Err(syntax(i, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

fn syntax(pos: usize, message: &str) -> LogicError {
    LogicError::Syntax {
        pos,
        message: message.to_string(),
    }
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

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.here(), &format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.meet()?;
        while self.peek() == Some(&Tok::Join) {
            self.pos += 1;
            let rhs = self.meet()?;
            acc = Formula::join(acc, rhs);
        }
        Ok(acc)
    }

    fn meet(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.add()?;
        while self.peek() == Some(&Tok::Meet) {
            self.pos += 1;
            let rhs = self.add()?;
            acc = Formula::meet(acc, rhs);
        }
        Ok(acc)
    }

    fn add(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.mul()?;
                    acc = Formula::plus(acc, rhs);
                }
                Some(Tok::OPlus) => {
                    self.pos += 1;
                    let rhs = self.mul()?;
                    acc = Formula::oplus(acc, rhs);
                }
                Some(Tok::OMinus) => {
                    self.pos += 1;
                    let q = self.scalar()?;
                    acc = Formula::MinusConst(Box::new(acc), q);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn mul(&mut self) -> Result<Formula, LogicError> {
        let mut acc = self.prefix()?;
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let rhs = self.prefix()?;
            acc = Formula::prod(acc, rhs);
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::neg(self.prefix()?))
            }
            Some(Tok::Lt) => {
                self.pos += 1;
                let label = match self.bump() {
                    Some(Tok::Gt) => None,
                    Some(Tok::Ident(name)) => {
                        self.expect(Tok::Gt, "`>` after diamond label")?;
                        Some(name)
                    }
                    _ => return Err(syntax(self.here(), "expected label or `>`")),
                };
                Ok(Formula::Diamond(label, Box::new(self.prefix()?)))
            }
            Some(Tok::Ident(name)) if name == "mu" || name == "nu" => {
                let is_mu = name == "mu";
                self.pos += 1;
                let var = match self.bump() {
                    Some(Tok::Ident(v)) if v != "mu" && v != "nu" && v != "prop" => v,
                    _ => return Err(syntax(self.here(), "expected variable after binder")),
                };
                self.expect(Tok::Dot, "`.` after bound variable")?;
                let body = Box::new(self.expr()?);
                Ok(if is_mu {
                    Formula::Mu(var, body)
                } else {
                    Formula::Nu(var, body)
                })
            }
            Some(Tok::Num(_)) => {
                // scalar multiple, or the literals 1 / 0
                if self.scalar_lookahead_is_scale() {
                    let q = self.scalar()?;
                    self.expect(Tok::Star, "`*` after scalar")?;
                    Ok(Formula::Scale(q, Box::new(self.prefix()?)))
                } else {
                    let pos = self.here();
                    let Some(Tok::Num(text)) = self.bump() else {
                        unreachable!()
                    };
                    match text.as_str() {
                        "1" => Ok(Formula::One),
                        "0" => Ok(Formula::Zero),
                        other => Err(syntax(
                            pos,
                            &format!("bare number `{other}` is not a formula; scalars need `*`"),
                        )),
                    }
                }
            }
            Some(Tok::LParen) if self.paren_scalar_lookahead() => {
                let q = self.scalar()?;
                self.expect(Tok::Star, "`*` after scalar")?;
                Ok(Formula::Scale(q, Box::new(self.prefix()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LogicError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "prop" => {
                self.expect(Tok::LParen, "`(` after prop")?;
                let prop = match self.bump() {
                    Some(Tok::Ident(p)) => p,
                    _ => return Err(syntax(self.here(), "expected proposition name")),
                };
                self.expect(Tok::RParen, "`)` after proposition name")?;
                Ok(Formula::Prop(prop))
            }
            Some(Tok::Ident(name)) => Ok(Formula::Var(name)),
            _ => Err(syntax(pos, "expected a formula")),
        }
    }

    /// Does a `Num` at the cursor start a scalar multiple (`q*phi`)?
    fn scalar_lookahead_is_scale(&self) -> bool {
        match (self.peek(), self.peek_at(1), self.peek_at(2), self.peek_at(3)) {
            (Some(Tok::Num(_)), Some(Tok::Star), _, _) => true,
            (Some(Tok::Num(_)), Some(Tok::Slash), Some(Tok::Num(_)), Some(Tok::Star)) => true,
            _ => false,
        }
    }

    /// Does a `(` at the cursor start a parenthesized scalar, as in
    /// `(-1)*phi` or `(2/3)*phi`?
    fn paren_scalar_lookahead(&self) -> bool {
        let mut k = 1;
        if self.peek_at(k) == Some(&Tok::Minus) {
            k += 1;
        }
        if !matches!(self.peek_at(k), Some(Tok::Num(_))) {
            return false;
        }
        k += 1;
        if self.peek_at(k) == Some(&Tok::Slash) {
            if !matches!(self.peek_at(k + 1), Some(Tok::Num(_))) {
                return false;
            }
            k += 2;
        }
        self.peek_at(k) == Some(&Tok::RParen) && self.peek_at(k + 1) == Some(&Tok::Star)
    }

    /// A rational literal, optionally negated and/or parenthesized.
    fn scalar(&mut self) -> Result<Rat, LogicError> {
        let pos = self.here();
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let q = self.scalar()?;
                self.expect(Tok::RParen, "`)` after scalar")?;
                Ok(q)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.scalar()?)
            }
            Some(Tok::Num(_)) => {
                let Some(Tok::Num(int_text)) = self.bump() else {
                    unreachable!()
                };
                let text = if self.peek() == Some(&Tok::Slash)
                    && matches!(self.peek_at(1), Some(Tok::Num(_)))
                {
                    self.pos += 1;
                    let Some(Tok::Num(den)) = self.bump() else {
                        unreachable!()
                    };
                    format!("{int_text}/{den}")
                } else {
                    int_text
                };
                parse_rat(&text).map_err(|e| syntax(pos, &e.to_string()))
            }
            _ => Err(syntax(pos, "expected a rational literal")),
        }
    }
}

/// Parse a formula and verify it against the constructor and scalar
/// restrictions of `kind`. The result round-trips through `Display`.
pub fn parse_formula(text: &str, kind: LogicKind) -> Result<Formula, LogicError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(syntax(parser.here(), "trailing input after formula"));
    }
    check_kind(&formula, kind)?;
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn parse_r(text: &str) -> Formula {
        parse_formula(text, LogicKind::R).unwrap()
    }

    #[test]
    fn diamond_one() {
        assert_eq!(
            parse_r("<a>1"),
            Formula::diamond("a", Formula::One)
        );
        assert_eq!(
            parse_formula("<>1", LogicKind::R).unwrap(),
            Formula::Diamond(None, Box::new(Formula::One))
        );
    }

    #[test]
    fn worked_experiment_encoding_parses_in_r() {
        let f = parse_r("60*<a>1 + 50*(1 + (-1)*<a>1 + (-1)*<b>1)");
        let a = Formula::diamond("a", Formula::One);
        let b = Formula::diamond("b", Formula::One);
        let inner = Formula::plus(
            Formula::plus(Formula::One, Formula::Scale(rat_int(-1), Box::new(a.clone()))),
            Formula::Scale(rat_int(-1), Box::new(b)),
        );
        let expected = Formula::plus(
            Formula::Scale(rat_int(60), Box::new(a)),
            Formula::Scale(rat_int(50), Box::new(inner)),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn fixpoints_rejected_in_r_accepted_with_mu() {
        assert!(matches!(
            parse_formula("mu v. <a>v", LogicKind::R),
            Err(LogicError::IllegalForKind { .. })
        ));
        assert!(parse_formula("mu v. <a>v", LogicKind::QL_MU).is_ok());
        assert!(parse_formula("mu v. <a>v", LogicKind::MU).is_ok());
    }

    #[test]
    fn positivity_enforced_for_binders() {
        assert!(matches!(
            parse_formula("mu v. ~v", LogicKind::MU),
            Err(LogicError::NegativeVariable(_))
        ));
        assert!(parse_formula("mu v. ~~v", LogicKind::MU).is_ok());
    }

    #[test]
    fn scalar_ranges_respect_kind() {
        assert!(parse_formula("2*1", LogicKind::R).is_ok());
        assert!(matches!(
            parse_formula("2*1", LogicKind::LUK),
            Err(LogicError::ScalarOutOfRange { .. })
        ));
        assert!(parse_formula("1/2*1 (+) 0.3*1", LogicKind::LUK).is_ok());
    }

    #[test]
    fn connectives_respect_kind() {
        assert!(parse_formula("1 (+) 1", LogicKind::QL).is_err());
        assert!(parse_formula("1 (+) 1", LogicKind::LUK).is_ok());
        assert!(parse_formula("1 . 1", LogicKind::LUK).is_err());
        assert!(parse_formula("1 . 1", LogicKind::QL_PROD).is_ok());
        assert!(parse_formula("1 (-) 1/2", LogicKind::QL_MINUS).is_ok());
        assert!(parse_formula("1 + 1", LogicKind::LUK).is_err());
        assert!(parse_formula("~1", LogicKind::R).is_err());
    }

    #[test]
    fn dotted_product_vs_decimal() {
        // spaced dot is a product; dotted digits are a decimal scalar
        let prod = parse_formula("1 . 0", LogicKind::QL_PROD).unwrap();
        assert_eq!(prod, Formula::prod(Formula::One, Formula::Zero));
        let scaled = parse_formula("0.5*1", LogicKind::QL).unwrap();
        assert_eq!(scaled, Formula::Scale(rat(1, 2), Box::new(Formula::One)));
    }

    #[test]
    fn precedence_and_binders() {
        let f = parse_formula("mu v. <a>v \\/ prop(goal)", LogicKind::MU).unwrap();
        // binder body extends maximally
        assert!(matches!(f, Formula::Mu(_, _)));
        let g = parse_r("1 + 1 \\/ 1");
        assert_eq!(
            g,
            Formula::join(Formula::plus(Formula::One, Formula::One), Formula::One)
        );
        let h = parse_r("1 \\/ 1 /\\ 0");
        assert_eq!(
            h,
            Formula::join(Formula::One, Formula::meet(Formula::One, Formula::Zero))
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("1 + $", LogicKind::R) {
            Err(LogicError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_formula("1 + ", LogicKind::R).is_err());
        assert!(parse_formula("(1", LogicKind::R).is_err());
        assert!(parse_formula("1)", LogicKind::R).is_err());
        assert!(parse_formula("2", LogicKind::R).is_err());
    }

    #[test]
    fn display_round_trips() {
        let texts = [
            "60*<a>1 + 50*(1 + (-1)*<a>1 + (-1)*<b>1)",
            "(1 \\/ 0) /\\ <a>(1 + 1)",
            "mu v. <a>v \\/ ~nu w. w . w",
            "1 (-) 1/2 (+) 1/3*<b>0",
            "(-2/3)*(1 + <a>1)",
            "prop(p) /\\ <>1",
        ];
        for text in texts {
            let kind = if text.contains("mu") || text.contains("~") || text.contains("(") {
                LogicKind::MU
            } else {
                LogicKind::R
            };
            let parsed = parse_formula(text, kind)
                .or_else(|_| parse_formula(text, LogicKind::R))
                .unwrap_or_else(|e| panic!("{text}: {e}"));
            let printed = parsed.to_string();
            let reparsed = parse_formula(&printed, LogicKind::MU)
                .or_else(|_| parse_formula(&printed, LogicKind::R))
                .unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
            assert_eq!(parsed, reparsed, "round trip failed for `{text}` -> `{printed}`");
        }
    }
}
