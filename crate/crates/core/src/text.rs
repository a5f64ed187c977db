//! Text forms: coefficient printing shared by the element Display impls, and
//! parsers for the element file formats (enveloping-algebra elements and
//! vertex states).

use crate::centralizer::{CentElt, GenIndex, GradedData};
use crate::error::{Error, Result};
use crate::scalar::{KPoly, Q};
use crate::uea::UEAElement;
use crate::vertex::{BracketTable, Factor, VState};
use num::{One, Signed};
use std::fmt;

/// Writes `c` as a signed prefix for a following symbol: `-`, `+`, `+3/4 `,
/// `-2 `, leading term without `+`.
pub(crate) fn write_coeff_prefix(f: &mut fmt::Formatter<'_>, c: &Q, first: bool) -> fmt::Result {
    let neg = c.is_negative();
    let abs = c.abs();
    if neg {
        write!(f, "-")?;
    } else if !first {
        write!(f, "+")?;
    }
    if !abs.is_one() {
        write!(f, "{} ", abs)?;
    }
    Ok(())
}

/// Same for a k-polynomial coefficient: `-(k+2) `, `+(k/4+1) `, plain
/// rationals fall back to the rational form.
pub(crate) fn write_kpoly_prefix(
    f: &mut fmt::Formatter<'_>,
    c: &KPoly,
    first: bool,
) -> fmt::Result {
    if let Some(0) = c.degree() {
        return write_coeff_prefix(f, &c.coeff(0), first);
    }
    if !first {
        write!(f, "+")?;
    }
    write!(f, "({}) ", c)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::ParseError {
            at: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self
            .src[self.pos..]
            .chars()
            .next()
            .is_some_and(|c| c.is_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", tok))
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src[self.pos..].starts_with('-') {
            self.pos += 1;
        }
        while self.src[self.pos..]
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected integer");
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::ParseError {
                at: start,
                msg: "bad integer".into(),
            })
    }

    fn rational(&mut self) -> Result<Q> {
        let n = self.integer()?;
        if self.eat("/") {
            let d = self.integer()?;
            if d == 0 {
                return self.err("zero denominator");
            }
            Ok(crate::scalar::q(n, d))
        } else {
            Ok(crate::scalar::qi(n))
        }
    }

    fn triple(&mut self) -> Result<GenIndex> {
        self.expect("[")?;
        let i = self.integer()?;
        self.expect(",")?;
        let j = self.integer()?;
        self.expect(",")?;
        let r = self.integer()?;
        self.expect("]")?;
        if i < 1 || j < 1 {
            return self.err("row indices must be >= 1");
        }
        Ok(GenIndex::new(i as usize, j as usize, r))
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }
}

/// Parses the enveloping-algebra element form, e.g.
/// `E[4,1,0] + E[3,1,0] E[4,4,1] - 3/4 E[1,1,0]`.
pub fn parse_uea(data: &GradedData, src: &str) -> Result<UEAElement> {
    let mut lx = Lexer::new(src);
    let mut out = UEAElement::zero(data);
    loop {
        let mut sign = Q::one();
        let mut saw_sign = false;
        while let Some(c) = lx.peek() {
            match c {
                '+' => {
                    lx.eat("+");
                    saw_sign = true;
                }
                '-' => {
                    lx.eat("-");
                    sign = -sign;
                    saw_sign = true;
                }
                _ => break,
            }
        }
        if lx.at_end() {
            if saw_sign {
                return lx.err("dangling sign");
            }
            break;
        }
        let coeff = if matches!(lx.peek(), Some(c) if c.is_ascii_digit()) {
            lx.rational()?
        } else {
            Q::one()
        };
        let mut factors = Vec::new();
        while lx.eat("E") {
            let idx = lx.triple()?;
            if !crate::centralizer::in_basis(data.lambda(), idx) {
                return Err(Error::IndexNotInBasis(idx.to_string()));
            }
            factors.push(idx);
        }
        let term = if factors.is_empty() {
            UEAElement::scalar(data, sign * coeff)
        } else {
            let mut t = UEAElement::scalar(data, sign * coeff);
            for idx in factors {
                t = t.mul(data, &UEAElement::gen(data, idx))?;
            }
            t
        };
        out = out.add(&term)?;
        if lx.at_end() {
            break;
        }
        match lx.peek() {
            Some('+') | Some('-') => continue,
            _ => return lx.err("expected `+` or `-` between terms"),
        }
    }
    Ok(out)
}

/// Parses a vertex state in the text form, e.g.
/// `J[2,1,0] + :( J[1,1,0] J[2,2,1] ): - (k+2) D^1 J[1,1,1]`.
///
/// Generator tokens: `J[i,j,r]` (reduced-complex building block),
/// `A[i,j,r]` (full-complex current), `Phi[i,j,r]`, `Phi*[i,j,r]` (ghosts).
/// `D^t` prefixes a factor with t derivatives; juxtaposition inside or
/// outside `:( ... ):` is the normally ordered product, nested to the right.
pub fn parse_vstate(table: &BracketTable, src: &str) -> Result<VState> {
    let mut lx = Lexer::new(src);
    let state = parse_sum(table, &mut lx)?;
    if !lx.at_end() {
        return lx.err("trailing input after state");
    }
    Ok(state)
}

fn parse_sum(table: &BracketTable, lx: &mut Lexer) -> Result<VState> {
    let mut out = VState::zero(table);
    let mut first = true;
    loop {
        let mut sign = Q::one();
        let mut saw = false;
        while let Some(c) = lx.peek() {
            match c {
                '+' => {
                    lx.eat("+");
                    saw = true;
                }
                '-' => {
                    lx.eat("-");
                    sign = -sign;
                    saw = true;
                }
                _ => break,
            }
        }
        if lx.at_end() || matches!(lx.peek(), Some(')')) {
            if saw {
                return lx.err("dangling sign");
            }
            if first {
                return lx.err("expected a term");
            }
            break;
        }
        if !first && !saw {
            return lx.err("expected `+` or `-` between terms");
        }
        let term = parse_term(table, lx)?;
        out = out.add(&term.scale(&KPoly::constant(sign)))?;
        first = false;
    }
    Ok(out)
}

fn parse_term(table: &BracketTable, lx: &mut Lexer) -> Result<VState> {
    // optional coefficient: rational or parenthesized k-polynomial
    let mut coeff = KPoly::one();
    loop {
        if matches!(lx.peek(), Some(c) if c.is_ascii_digit()) {
            let c = lx.rational()?;
            coeff = coeff.scale(&c);
        } else if matches!(lx.peek(), Some('(')) {
            lx.expect("(")?;
            let start = lx.pos;
            let mut depth = 1;
            while depth > 0 {
                match lx.src[lx.pos..].chars().next() {
                    Some('(') => depth += 1,
                    Some(')') => depth -= 1,
                    Some(_) => {}
                    None => return lx.err("unterminated `(`"),
                }
                if depth > 0 {
                    lx.pos += 1;
                }
            }
            let inner = &lx.src[start..lx.pos];
            lx.pos += 1; // closing ')'
            let p: KPoly = inner.parse().map_err(|e| Error::ParseError {
                at: start,
                msg: e,
            })?;
            coeff = &coeff * &p;
        } else {
            break;
        }
    }
    let factors = parse_factor_seq(table, lx)?;
    let state = if factors.is_empty() {
        VState::vacuum(table)
    } else {
        nest_factors(table, factors)?
    };
    Ok(state.scale(&coeff))
}

enum Piece {
    Single(Factor),
    Group(VState),
}

fn parse_factor_seq(table: &BracketTable, lx: &mut Lexer) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    loop {
        let mut derivs = 0u32;
        while lx.eat("D^") {
            let t = lx.integer()?;
            if t < 0 {
                return lx.err("negative derivative order");
            }
            derivs += t as u32;
        }
        if lx.eat(":(") {
            let inner = parse_sum(table, lx)?;
            lx.expect("):")?;
            let mut st = inner;
            for _ in 0..derivs {
                st = table.derivative(&st);
            }
            out.push(Piece::Group(st));
            continue;
        }
        let kind = if lx.eat("Phi*") {
            Some("Phi*")
        } else if lx.eat("Phi") {
            Some("Phi")
        } else if lx.eat("J") {
            Some("J")
        } else if lx.eat("A") {
            Some("A")
        } else {
            None
        };
        let Some(kind) = kind else {
            if derivs > 0 {
                return lx.err("D^t must be followed by a generator or group");
            }
            break;
        };
        let idx = lx.triple()?;
        let gen = table
            .find_generator(kind, idx)
            .ok_or_else(|| Error::IndexNotInBasis(format!("{}[{},{},{}]", kind, idx.i, idx.j, idx.r)))?;
        out.push(Piece::Single(Factor::new(gen, derivs)));
    }
    Ok(out)
}

fn nest_factors(table: &BracketTable, pieces: Vec<Piece>) -> Result<VState> {
    let mut state: Option<VState> = None;
    for piece in pieces.into_iter().rev() {
        let cur = match piece {
            Piece::Single(f) => VState::from_factor(table, f),
            Piece::Group(s) => s,
        };
        state = Some(match state {
            None => cur,
            Some(rest) => table.normal_product(&cur, &rest)?,
        });
    }
    Ok(state.expect("nonempty factor list"))
}

/// Formats a centralizer element for reports.
pub fn cent_to_string(x: &CentElt) -> String {
    x.to_string()
}
