//! Polynomials over GF(2), bit-packed by exponent.
//!
//! `BinPoly` is the currency every other module trades in: field elements
//! are residues of these, determinants of lifted matrices are these, and
//! the coprime search filters through `X^(2^i)+X` remainders of these.
//!
//! Bit `i` of the word vector is the coefficient of `X^i`. The
//! representation is canonical (no stored zero bits above the degree), so
//! `==` is polynomial equality and golden-value tests can be bit-exact.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A polynomial over GF(2), e.g. `X^5+X^2+1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BinPoly {
    /// Little-endian by exponent: bit `i` of `words[j]` is the coefficient
    /// of `X^(64j+i)`. Invariant: the last word, if any, is nonzero.
    words: Vec<u64>,
}

impl BinPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        BinPoly { words: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        BinPoly { words: vec![1] }
    }

    /// The monomial `X^e`.
    pub fn monomial(e: usize) -> Self {
        let mut words = vec![0u64; e / WORD_BITS + 1];
        words[e / WORD_BITS] = 1 << (e % WORD_BITS);
        BinPoly { words }
    }

    /// Builds a polynomial from its low 64 coefficient bits.
    pub fn from_bits(bits: u64) -> Self {
        let mut p = BinPoly { words: vec![bits] };
        p.trim();
        p
    }

    /// `X^n + X`, the product of all irreducible polynomials whose degree
    /// divides a given `i` when `n = 2^i`.
    pub fn x_pow_n_plus_x(n: usize) -> Self {
        let mut p = Self::monomial(n);
        p.flip(1);
        p
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    fn flip(&mut self, e: usize) {
        if e / WORD_BITS >= self.words.len() {
            self.words.resize(e / WORD_BITS + 1, 0);
        }
        self.words[e / WORD_BITS] ^= 1 << (e % WORD_BITS);
        self.trim();
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * WORD_BITS + (63 - last.leading_zeros() as usize))
    }

    /// Coefficient of `X^e`.
    pub fn coeff(&self, e: usize) -> bool {
        self.words
            .get(e / WORD_BITS)
            .map_or(false, |w| w >> (e % WORD_BITS) & 1 == 1)
    }

    /// The coefficient bits as a u64, for residues of degree < 64.
    pub fn low_bits(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Sum over GF(2): coefficientwise XOR.
    pub fn add(&self, other: &BinPoly) -> BinPoly {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (i, w) in short.words.iter().enumerate() {
            words[i] ^= w;
        }
        let mut p = BinPoly { words };
        p.trim();
        p
    }

    /// Carry-less product.
    pub fn mul(&self, other: &BinPoly) -> BinPoly {
        if self.is_zero() || other.is_zero() {
            return BinPoly::zero();
        }
        let mut words = vec![0u64; self.words.len() + other.words.len()];
        for (i, &a) in self.words.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.words.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let (lo, hi) = clmul64(a, b);
                words[i + j] ^= lo;
                words[i + j + 1] ^= hi;
            }
        }
        let mut p = BinPoly { words };
        p.trim();
        p
    }

    /// xors `other << shift` into self.
    fn xor_shifted(&mut self, other: &BinPoly, shift: usize) {
        let (wsh, bsh) = (shift / WORD_BITS, shift % WORD_BITS);
        let need = other.words.len() + wsh + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + wsh] ^= w << bsh;
            if bsh > 0 {
                self.words[i + wsh + 1] ^= w >> (WORD_BITS - bsh);
            }
        }
    }

    /// Long division: `self = q*b + r` with `deg r < deg b`.
    pub fn divmod(&self, b: &BinPoly) -> Result<(BinPoly, BinPoly)> {
        let db = b.degree().ok_or(Error::DivisionByZero)?;
        let mut r = self.clone();
        let mut q = BinPoly::zero();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let s = dr - db;
            q.flip(s);
            r.xor_shifted(b, s);
            r.trim();
        }
        Ok((q, r))
    }

    /// Remainder of division by `b`.
    pub fn rem(&self, b: &BinPoly) -> Result<BinPoly> {
        Ok(self.divmod(b)?.1)
    }

    /// Euclidean gcd. Over GF(2) every nonzero polynomial is monic, so the
    /// result is the canonical greatest common divisor.
    pub fn gcd(&self, other: &BinPoly) -> Result<BinPoly> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::GcdBothZero);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// `self mod (X^n + X)` by block folding: every exponent `e >= n`
    /// collapses to `((e-1) mod (n-1)) + 1` and the constant coefficient
    /// stays put, so the tail of the coefficient vector can be sliced into
    /// stride-`(n-1)` rows and XORed together in O(deg) bit operations.
    pub fn fold_mod_xn_plus_x(&self, n: usize) -> Result<BinPoly> {
        if n < 2 {
            return Err(Error::FoldModulusTooSmall(n));
        }
        let deg = match self.degree() {
            Some(d) if d >= n => d,
            _ => return Ok(self.clone()),
        };
        let stride = n - 1;
        // row 0: exponents 0..n-1 verbatim
        let mut acc = self.bit_range(0, n);
        // row r >= 1: exponents r*stride+1 ..= r*stride+stride, landing on 1..=stride
        let mut start = n;
        while start <= deg {
            let row = self.bit_range(start, stride);
            acc.xor_shifted(&row, 1);
            start += stride;
        }
        acc.trim();
        Ok(acc)
    }

    /// Extracts `len` coefficient bits starting at exponent `start` as a
    /// fresh polynomial (bit 0 of the result = coefficient of X^start).
    fn bit_range(&self, start: usize, len: usize) -> BinPoly {
        let mut words = vec![0u64; len / WORD_BITS + 1];
        for i in 0..len {
            if self.coeff(start + i) {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        let mut p = BinPoly { words };
        p.trim();
        p
    }

    /// Hex bit-pattern form, e.g. `0x25` for `X^5+X^2+1`.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0x0".into();
        }
        let mut s = String::new();
        for (i, w) in self.words.iter().enumerate().rev() {
            if s.is_empty() {
                s = format!("{w:x}");
            } else {
                s.push_str(&format!("{w:016x}"));
            }
            let _ = i;
        }
        format!("0x{s}")
    }
}

/// Carry-less 64x64 -> 128 multiply, returned as (low, high) words.
fn clmul64(a: u64, b: u64) -> (u64, u64) {
    let mut lo = 0u64;
    let mut hi = 0u64;
    let mut rem = b;
    while rem != 0 {
        let i = rem.trailing_zeros();
        lo ^= a << i;
        if i > 0 {
            hi ^= a >> (64 - i);
        }
        rem &= rem - 1;
    }
    (lo, hi)
}

/// All irreducible binary polynomials of degree exactly `d`, ascending by
/// coefficient bit pattern. This fixed order is what makes "find one such
/// polynomial" in the coprime search deterministic.
pub fn irreducibles_of_degree(d: usize) -> Result<Vec<BinPoly>> {
    if d < 1 || d > MAX_ENUM_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: d, max: MAX_ENUM_DEGREE });
    }
    let mut lower: Vec<BinPoly> = Vec::new();
    for dd in 1..=d / 2 {
        lower.extend(enum_irreducibles(dd, &lower.clone()));
    }
    Ok(enum_irreducibles(d, &lower))
}

/// Enumeration cap; desk-scale searches never need candidates past degree 16.
pub const MAX_ENUM_DEGREE: usize = 16;

fn enum_irreducibles(d: usize, lower: &[BinPoly]) -> Vec<BinPoly> {
    let mut out = Vec::new();
    for bits in 1u64 << d..1u64 << (d + 1) {
        let cand = BinPoly::from_bits(bits);
        let divisor_bound = d / 2;
        let ok = lower
            .iter()
            .filter(|f| f.degree().unwrap() <= divisor_bound)
            .all(|f| !cand.rem(f).unwrap().is_zero());
        if ok {
            out.push(cand);
        }
    }
    out
}

/// Trial-division irreducibility test for nonconstant polynomials of
/// degree at most twice the enumeration cap.
pub fn is_irreducible(p: &BinPoly) -> Result<bool> {
    let d = match p.degree() {
        None | Some(0) => return Err(Error::ConstantPolynomial),
        Some(d) => d,
    };
    if d == 1 {
        return Ok(true);
    }
    if d / 2 > MAX_ENUM_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: d, max: 2 * MAX_ENUM_DEGREE });
    }
    let mut lower: Vec<BinPoly> = Vec::new();
    for dd in 1..=d / 2 {
        let irr = enum_irreducibles(dd, &lower);
        for f in &irr {
            if p.rem(f)?.is_zero() {
                return Ok(false);
            }
        }
        lower.extend(irr);
    }
    Ok(true)
}

impl fmt::Display for BinPoly {
    /// Descending-power sum, `X^5+X^2+1`; the zero polynomial prints `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = match self.degree() {
            None => return write!(f, "0"),
            Some(d) => d,
        };
        let mut first = true;
        for e in (0..=deg).rev() {
            if !self.coeff(e) {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match e {
                0 => write!(f, "1")?,
                1 => write!(f, "X")?,
                _ => write!(f, "X^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinPoly({self})")
    }
}

impl FromStr for BinPoly {
    type Err = Error;

    /// Accepts both the descending-power text form (`X^5+X^2+1`) and the
    /// hex bit-pattern form (`0x25`); both parse to the same value.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            let mut p = BinPoly::zero();
            for (i, ch) in hex.chars().rev().enumerate() {
                let v = ch
                    .to_digit(16)
                    .ok_or_else(|| Error::Parse(format!("bad hex digit in {s:?}")))?;
                for b in 0..4 {
                    if v >> b & 1 == 1 {
                        p.flip(4 * i + b);
                    }
                }
            }
            return Ok(p);
        }
        if s == "0" {
            return Ok(BinPoly::zero());
        }
        let mut p = BinPoly::zero();
        for term in s.split('+') {
            let term = term.trim();
            let e = if term == "1" {
                0
            } else if term == "X" || term == "x" {
                1
            } else if let Some(exp) = term.strip_prefix("X^").or_else(|| term.strip_prefix("x^")) {
                exp.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad exponent in {term:?}")))?
            } else {
                return Err(Error::Parse(format!("bad polynomial term {term:?}")));
            };
            if p.coeff(e) {
                return Err(Error::Parse(format!("repeated term X^{e} in {s:?}")));
            }
            p.flip(e);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BinPoly {
        s.parse().unwrap()
    }

    #[test]
    fn add_examples() {
        // (X^2+1) + (X^2+X) = X+1
        assert_eq!(p("X^2+1").add(&p("X^2+X")), p("X+1"));
        // p + 0 = p
        assert_eq!(p("X^3+X").add(&BinPoly::zero()), p("X^3+X"));
        // the two degree-5 primitive moduli: XOR kills the shared terms
        assert_eq!(p("X^5+X^2+1").add(&p("X^5+X^3+X^2+X+1")), p("X^3+X"));
        // a + a = 0
        assert_eq!(p("X^4+X^2").add(&p("X^4+X^2")), BinPoly::zero());
    }

    /// Schoolbook oracle: convolution of coefficient vectors mod 2.
    fn mul_oracle(a: &BinPoly, b: &BinPoly) -> BinPoly {
        let (da, db) = match (a.degree(), b.degree()) {
            (Some(da), Some(db)) => (da, db),
            _ => return BinPoly::zero(),
        };
        let mut out = BinPoly::zero();
        for i in 0..=da {
            for j in 0..=db {
                if a.coeff(i) && b.coeff(j) {
                    out.flip(i + j);
                }
            }
        }
        out
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("X").mul(&p("X+1")), p("X^2+X"));
        // frozen from the schoolbook oracle
        assert_eq!(mul_oracle(&p("X^2+X+1"), &p("X+1")), p("X^3+1"));
        assert_eq!(p("X^2+X+1").mul(&p("X+1")), p("X^3+1"));
        assert_eq!(p("X^7+X^3").mul(&BinPoly::zero()), BinPoly::zero());
        assert_eq!(
            p("X^5+X^2+1").mul(&p("X^5+X^3+X^2+X+1")),
            mul_oracle(&p("X^5+X^2+1"), &p("X^5+X^3+X^2+X+1"))
        );
    }

    #[test]
    fn mul_degree_adds() {
        let a = p("X^65+X^3+1");
        let b = p("X^64+X");
        assert_eq!(a.mul(&b).degree(), Some(129));
    }

    #[test]
    fn divmod_examples() {
        // frozen from the long-division oracle
        let (q, r) = p("X^3+X+1").divmod(&p("X^2+X+1")).unwrap();
        assert_eq!(q, p("X+1"));
        assert_eq!(r, p("X"));
        let a = p("X^4+X^3+X");
        let (q, r) = a.divmod(&a).unwrap();
        assert_eq!((q, r), (BinPoly::one(), BinPoly::zero()));
        // deg a < deg b
        let (q, r) = p("X^2+X").divmod(&p("X^3+1")).unwrap();
        assert_eq!((q, r), (BinPoly::zero(), p("X^2+X")));
    }

    #[test]
    fn divmod_by_zero_rejected() {
        assert!(matches!(
            p("X").divmod(&BinPoly::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(p("X^2+X").gcd(&p("X")).unwrap(), p("X"));
        // X^4+X = X(X+1)(X^2+X+1), so the quadratic factor is shared
        assert_eq!(p("X^2+X+1").gcd(&p("X^4+X")).unwrap(), p("X^2+X+1"));
        assert_eq!(p("X^9+X^4+1").gcd(&BinPoly::one()).unwrap(), BinPoly::one());
        assert!(matches!(
            BinPoly::zero().gcd(&BinPoly::zero()),
            Err(Error::GcdBothZero)
        ));
    }

    #[test]
    fn fold_examples() {
        // X^5 folds to X^2 mod (X^4+X), cancelling the existing X^2 term
        assert_eq!(p("X^5+X^2+1").fold_mod_xn_plus_x(4).unwrap(), BinPoly::one());
        assert_eq!(
            p("X^4+X").fold_mod_xn_plus_x(4).unwrap(),
            BinPoly::zero()
        );
        // already reduced
        assert_eq!(p("X^3+1").fold_mod_xn_plus_x(5).unwrap(), p("X^3+1"));
        assert!(matches!(
            p("X").fold_mod_xn_plus_x(1),
            Err(Error::FoldModulusTooSmall(1))
        ));
    }

    #[test]
    fn fold_matches_division() {
        // folding is an O(deg) rearrangement of the long division remainder
        let f = p("X^19+X^13+X^11+X^7+X^2+X+1");
        for n in 2..=9 {
            let modulus = BinPoly::x_pow_n_plus_x(n);
            assert_eq!(
                f.fold_mod_xn_plus_x(n).unwrap(),
                f.rem(&modulus).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn irreducible_enumeration() {
        let d1 = irreducibles_of_degree(1).unwrap();
        assert_eq!(d1, vec![p("X"), p("X+1")]);
        let d2 = irreducibles_of_degree(2).unwrap();
        assert_eq!(d2, vec![p("X^2+X+1")]);
        // frozen from trial division by X and X+1
        let d3 = irreducibles_of_degree(3).unwrap();
        assert_eq!(d3, vec![p("X^3+X+1"), p("X^3+X^2+1")]);
        assert!(irreducibles_of_degree(0).is_err());
        assert!(irreducibles_of_degree(MAX_ENUM_DEGREE + 1).is_err());
    }

    #[test]
    fn irreducible_counts() {
        // 2^d/d-ish counts: 2, 1, 2, 3, 6, 9, 18, 30 for degrees 1..=8
        let expected = [2, 1, 2, 3, 6, 9, 18, 30];
        for (d, want) in expected.iter().enumerate() {
            assert_eq!(irreducibles_of_degree(d + 1).unwrap().len(), *want);
        }
    }

    #[test]
    fn is_irreducible_examples() {
        assert!(is_irreducible(&p("X^2+X+1")).unwrap());
        assert!(!is_irreducible(&p("X^2+1")).unwrap()); // (X+1)^2
        assert!(is_irreducible(&p("X^5+X^2+1")).unwrap());
        assert!(is_irreducible(&p("X^5+X^3+X^2+X+1")).unwrap());
        assert!(is_irreducible(&p("X^9+X^4+1")).unwrap());
        assert!(matches!(
            is_irreducible(&BinPoly::one()),
            Err(Error::ConstantPolynomial)
        ));
    }

    #[test]
    fn factorization_identity_small() {
        // product of all irreducibles of degree dividing i equals X^(2^i)+X
        for i in 1..=5usize {
            let mut prod = BinPoly::one();
            for d in 1..=i {
                if i % d != 0 {
                    continue;
                }
                for q in irreducibles_of_degree(d).unwrap() {
                    prod = prod.mul(&q);
                }
            }
            assert_eq!(prod, BinPoly::x_pow_n_plus_x(1 << i), "i={i}");
        }
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(BinPoly::zero().to_string(), "0");
        assert_eq!(p("X^5+X^2+1").to_string(), "X^5+X^2+1");
        assert_eq!(p("0x25"), p("X^5+X^2+1"));
        assert_eq!(p("0x25").to_hex(), "0x25");
        assert_eq!(p("X^2 + X"), p("X^2+X"));
        assert!("X^2+junk".parse::<BinPoly>().is_err());
        assert!("X^2+X^2".parse::<BinPoly>().is_err());
        // round-trip through both encodings
        let v = p("X^130+X^64+X^7+1");
        assert_eq!(v.to_string().parse::<BinPoly>().unwrap(), v);
        assert_eq!(v.to_hex().parse::<BinPoly>().unwrap(), v);
    }
}
