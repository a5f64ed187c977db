//! Exact scalars: arbitrary-precision rationals and polynomials in the level
//! symbol `k` over them.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

/// Convenience constructor for small rationals.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for small integers.
pub fn qi(n: i64) -> Q {
    Q::from(BigInt::from(n))
}

/// A polynomial in the level symbol `k` with rational coefficients.
///
/// Coefficients are stored densely by ascending power; the representation is
/// kept normalized (no trailing zeros).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct KPoly {
    coeffs: Vec<Q>,
}

impl KPoly {
    pub fn zero() -> Self {
        KPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        KPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = KPoly { coeffs: vec![c] };
        p.normalize();
        p
    }

    /// The monomial `c * k^d`.
    pub fn term(c: Q, d: usize) -> Self {
        if c.is_zero() {
            return KPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); d + 1];
        coeffs[d] = c;
        KPoly { coeffs }
    }

    /// The polynomial `k`.
    pub fn k() -> Self {
        KPoly::term(Q::one(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, d: usize) -> Q {
        self.coeffs.get(d).cloned().unwrap_or_else(Q::zero)
    }

    /// Evaluate at a rational value of `k`.
    pub fn eval(&self, k: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * k + c;
        }
        acc
    }

    /// True if the polynomial is the constant 1.
    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return KPoly::zero();
        }
        KPoly {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }
}

impl From<Q> for KPoly {
    fn from(c: Q) -> Self {
        KPoly::constant(c)
    }
}

impl Add for KPoly {
    type Output = KPoly;
    fn add(self, rhs: KPoly) -> KPoly {
        let mut out = self;
        out += rhs;
        out
    }
}

impl AddAssign for KPoly {
    fn add_assign(&mut self, rhs: KPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Q::zero());
        }
        for (i, c) in rhs.coeffs.into_iter().enumerate() {
            self.coeffs[i] += c;
        }
        self.normalize();
    }
}

impl Sub for KPoly {
    type Output = KPoly;
    fn sub(self, rhs: KPoly) -> KPoly {
        self + (-rhs)
    }
}

impl Neg for KPoly {
    type Output = KPoly;
    fn neg(self) -> KPoly {
        KPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for KPoly {
    type Output = KPoly;
    fn mul(self, rhs: KPoly) -> KPoly {
        (&self).mul(&rhs)
    }
}

impl Mul for &KPoly {
    type Output = KPoly;
    fn mul(self, rhs: &KPoly) -> KPoly {
        if self.is_zero() || rhs.is_zero() {
            return KPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut p = KPoly { coeffs };
        p.normalize();
        p
    }
}

fn fmt_q_times_k(f: &mut fmt::Formatter<'_>, c: &Q, d: usize) -> fmt::Result {
    // Prints c*k^d in the form `3k^2/4`, `k`, `-k^3`, `5`, ...
    if d == 0 {
        return write!(f, "{}", c);
    }
    let numer = c.numer();
    let denom = c.denom();
    if numer.abs().is_one() {
        if numer.is_negative() {
            write!(f, "-")?;
        }
    } else {
        write!(f, "{}", numer)?;
    }
    write!(f, "k")?;
    if d > 1 {
        write!(f, "^{}", d)?;
    }
    if !denom.is_one() {
        write!(f, "/{}", denom)?;
    }
    Ok(())
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first && !c.is_negative() {
                write!(f, "+")?;
            }
            fmt_q_times_k(f, c, d)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parses a k-polynomial in the display form: a signed sum of terms
/// `c`, `k^d`, `ck^d/q` (e.g. `k/4+1`, `-(…)` is handled by callers).
impl FromStr for KPoly {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err("empty k-polynomial".into());
        }
        let mut out = KPoly::zero();
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = Q::one();
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                i += 1;
            }
            let term = &s[start..i];
            if term.is_empty() {
                return Err(format!("bad k-polynomial term in `{}`", s));
            }
            out += parse_k_term(term, sign)?;
        }
        Ok(out)
    }
}

fn parse_k_term(term: &str, sign: Q) -> Result<KPoly, String> {
    match term.find('k') {
        None => {
            let c: Q = term
                .parse()
                .map_err(|_| format!("bad rational `{}`", term))?;
            Ok(KPoly::constant(sign * c))
        }
        Some(pos) => {
            let before = &term[..pos];
            let after = &term[pos + 1..];
            let mut c = if before.is_empty() {
                Q::one()
            } else {
                let b = before.strip_suffix('*').unwrap_or(before);
                b.parse::<Q>()
                    .map_err(|_| format!("bad coefficient `{}`", before))?
            };
            let mut d = 1usize;
            let mut rest = after;
            if let Some(r) = rest.strip_prefix('^') {
                let end = r
                    .find(|ch: char| !ch.is_ascii_digit())
                    .unwrap_or(r.len());
                d = r[..end]
                    .parse()
                    .map_err(|_| format!("bad exponent in `{}`", term))?;
                rest = &r[end..];
            }
            if let Some(r) = rest.strip_prefix('/') {
                let q: BigInt = r
                    .parse()
                    .map_err(|_| format!("bad denominator in `{}`", term))?;
                c /= Q::from(q);
            } else if !rest.is_empty() {
                return Err(format!("trailing junk in k-term `{}`", term));
            }
            Ok(KPoly::term(sign * c, d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_normalization() {
        let p = KPoly::term(qi(1), 1) + KPoly::constant(qi(2)); // k + 2
        let m = KPoly::term(qi(1), 1) - KPoly::constant(qi(-2));
        assert_eq!(p, m);
        let prod = &p * &p; // k^2 + 4k + 4
        assert_eq!(prod.coeff(0), qi(4));
        assert_eq!(prod.coeff(1), qi(4));
        assert_eq!(prod.coeff(2), qi(1));
        assert!((p.clone() - p).is_zero());
    }

    #[test]
    fn eval_and_display_roundtrip() {
        let p = KPoly::term(q(1, 4), 1) + KPoly::one(); // k/4 + 1
        assert_eq!(p.eval(&qi(8)), qi(3));
        assert_eq!(p.to_string(), "k/4+1");
        let back: KPoly = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        let n = KPoly::term(qi(-1), 1) - KPoly::constant(qi(2));
        assert_eq!(n.to_string(), "-k-2");
        assert_eq!(n.to_string().parse::<KPoly>().unwrap(), n);
        let h = KPoly::term(q(3, 2), 2) + KPoly::term(qi(-1), 1);
        assert_eq!(h.to_string(), "3k^2/2-k");
        assert_eq!(h.to_string().parse::<KPoly>().unwrap(), h);
    }
}
