//! `GF(2^k)` as `F_2[X]/(b(X))` for an irreducible modulus `b`.
//!
//! Elements are residue polynomials of degree below `k`, stored as plain
//! bit patterns. Every element carries a handle to its field; mixing
//! elements of different fields is an error rather than a coercion — the
//! reduction pipeline moves coefficients between fields only through the
//! explicit lift/reduce bridge ([`FieldElem::to_binpoly`] and
//! [`reduce_into_field`]).

use std::fmt;
use std::sync::Arc;

use crate::gf2poly::{is_irreducible, BinPoly};
use crate::{Error, Result};

/// Largest supported extension degree. Residues stay in a single word and
/// discrete logs stay enumerable.
pub const MAX_FIELD_DEGREE: usize = 32;

/// Extension degree plus modulus; the immutable description of one field.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldSpec {
    k: usize,
    modulus: BinPoly,
    modulus_bits: u64,
}

/// Shared handle to a [`FieldSpec`]. Cloning is cheap; equality is
/// structural (same degree and modulus), not pointer identity.
#[derive(Clone)]
pub struct Field(Arc<FieldSpec>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})/({})", self.k(), self.modulus())
    }
}

impl Field {
    /// Defines `GF(2^k)` by an irreducible modulus of degree `k`.
    pub fn new(k: usize, modulus: BinPoly) -> Result<Field> {
        if k < 1 || k > MAX_FIELD_DEGREE {
            return Err(Error::BadFieldDegree { k, max: MAX_FIELD_DEGREE });
        }
        let found = modulus.degree().unwrap_or(0);
        if found != k {
            return Err(Error::ModulusDegreeMismatch {
                modulus: modulus.to_string(),
                found,
                k,
            });
        }
        if k > 1 && !is_irreducible(&modulus)? {
            return Err(Error::NotIrreducible(modulus.to_string()));
        }
        let modulus_bits = modulus.low_bits();
        Ok(Field(Arc::new(FieldSpec { k, modulus, modulus_bits })))
    }

    /// The field defined by the lexicographically first (smallest bit
    /// pattern) primitive polynomial of degree `k`.
    pub fn default_of_degree(k: usize) -> Result<Field> {
        if k < 1 || k > MAX_FIELD_DEGREE {
            return Err(Error::BadFieldDegree { k, max: MAX_FIELD_DEGREE });
        }
        for bits in 1u64 << k..1u64 << (k + 1) {
            let cand = BinPoly::from_bits(bits);
            if k > 1 && !is_irreducible(&cand)? {
                continue;
            }
            let field = Field(Arc::new(FieldSpec {
                k,
                modulus: cand.clone(),
                modulus_bits: bits,
            }));
            if field.is_primitive() {
                return Ok(field);
            }
        }
        unreachable!("a primitive polynomial exists for every degree")
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    pub fn modulus(&self) -> &BinPoly {
        &self.0.modulus
    }

    /// Field cardinality `2^k`.
    pub fn size(&self) -> u64 {
        1u64 << self.0.k
    }

    /// True when the residue of `X` generates the whole multiplicative
    /// group, i.e. the modulus is primitive. Fields produced by the
    /// coprime search may be merely irreducible; reports fall back to hex
    /// element forms in that case.
    pub fn is_primitive(&self) -> bool {
        let x = self.x_bits();
        if x == 0 {
            return false;
        }
        let group = self.size() - 1;
        for p in prime_factors(group) {
            if self.pow_bits(x, group / p) == 1 {
                return false;
            }
        }
        true
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { field: self.clone(), bits: 0 }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem { field: self.clone(), bits: 1 }
    }

    /// Element from a residue bit pattern of degree below `k`.
    pub fn elem(&self, bits: u64) -> Result<FieldElem> {
        if bits >= self.size() {
            return Err(Error::Parse(format!(
                "residue 0x{bits:x} out of range for GF(2^{})",
                self.k()
            )));
        }
        Ok(FieldElem { field: self.clone(), bits })
    }

    /// `X^e mod b(X)`, i.e. `β^e` for the canonical generator candidate
    /// `β = X`. The exponent is reduced mod `2^k - 1` (Lagrange: the order
    /// of any nonzero element divides the group order).
    pub fn from_power(&self, e: u64) -> FieldElem {
        let group = self.size() - 1;
        let e = if group == 0 { 0 } else { e % group };
        FieldElem {
            field: self.clone(),
            bits: self.pow_bits(self.x_bits(), e),
        }
    }

    /// Residue of an arbitrary polynomial.
    pub fn reduce(&self, p: &BinPoly) -> FieldElem {
        let r = p.rem(&self.0.modulus).expect("modulus is nonzero");
        FieldElem { field: self.clone(), bits: r.low_bits() }
    }

    /// Discrete log of `a` base `X`, by enumeration. `None` for zero, for
    /// elements outside the cyclic group generated by `X`, and for fields
    /// too large to enumerate.
    pub fn dlog(&self, a: &FieldElem) -> Option<u64> {
        if self.0.k > 16 || a.bits == 0 {
            return None;
        }
        let x = self.x_bits();
        let mut cur = 1u64;
        for e in 0..self.size() - 1 {
            if cur == a.bits {
                return Some(e);
            }
            cur = self.mul_bits(cur, x);
        }
        None
    }

    fn x_bits(&self) -> u64 {
        // the residue of X: X itself unless k = 1
        if self.0.k == 1 {
            self.0.modulus_bits ^ 0b10 // X mod X = 0, X mod (X+1) = 1
        } else {
            0b10
        }
    }

    pub(crate) fn add_bits(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub(crate) fn mul_bits(&self, a: u64, b: u64) -> u64 {
        // carry-less product (fits: both operands below 2^32)
        let mut prod = 0u64;
        let mut rem = b;
        while rem != 0 {
            let i = rem.trailing_zeros();
            prod ^= a << i;
            rem &= rem - 1;
        }
        self.reduce_bits(prod)
    }

    fn reduce_bits(&self, mut v: u64) -> u64 {
        let k = self.0.k as u32;
        let m = self.0.modulus_bits;
        while v >> k != 0 {
            let top = 63 - v.leading_zeros();
            v ^= m << (top - k);
        }
        v
    }

    pub(crate) fn pow_bits(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_bits(acc, base);
            }
            base = self.mul_bits(base, base);
            e >>= 1;
        }
        acc
    }

    pub(crate) fn inv_bits(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::InverseOfZero);
        }
        // extended Euclid over single-word GF(2) polynomials
        let (mut r0, mut r1) = (self.0.modulus_bits as u128, a as u128);
        let (mut s0, mut s1) = (0u128, 1u128);
        while r1 != 0 {
            let shift_fits = |x: u128| 127 - x.leading_zeros();
            let mut q: u128 = 0;
            let mut r = r0;
            let d1 = shift_fits(r1);
            while r != 0 && shift_fits(r) >= d1 {
                let s = shift_fits(r) - d1;
                q ^= 1 << s;
                r ^= r1 << s;
            }
            let new_s = s0 ^ clmul128(q, s1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = new_s;
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_bits(s0 as u64))
    }

    /// Renders a residue as `0`, `1`, a power of `b = X`, or a raw hex
    /// pattern when no discrete log exists.
    pub fn render(&self, a: &FieldElem) -> String {
        match a.bits {
            0 => "0".into(),
            1 => "1".into(),
            _ => match self.dlog(a) {
                Some(1) => "b".into(),
                Some(e) => format!("b^{e}"),
                None => format!("0x{:x}", a.bits),
            },
        }
    }

    /// Parses `0`, `1`, `b`, `b^e`, or a hex residue `0x..`.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let s = s.trim();
        match s {
            "0" => return Ok(self.zero()),
            "1" => return Ok(self.one()),
            "b" | "B" => return Ok(self.from_power(1)),
            _ => {}
        }
        if let Some(e) = s.strip_prefix("b^").or_else(|| s.strip_prefix("B^")) {
            let e: u64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad power in element {s:?}")))?;
            return Ok(self.from_power(e));
        }
        if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|_| Error::Parse(format!("bad hex in element {s:?}")))?;
            return self.elem(bits);
        }
        Err(Error::Parse(format!("cannot parse field element {s:?}")))
    }
}

fn clmul128(a: u128, b: u128) -> u128 {
    let mut out = 0u128;
    let mut rem = b;
    while rem != 0 {
        let i = rem.trailing_zeros();
        out ^= a << i;
        rem &= rem - 1;
    }
    out
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// One element of a `GF(2^k)`: a residue polynomial tied to its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElem {
    field: Field,
    bits: u64,
}

impl FieldElem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Raw residue bit pattern.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Lifts the residue to a free polynomial in `F_2[X]` of degree below
    /// `k` — the representation substituted into transfer matrices before
    /// taking determinants over the polynomial ring.
    pub fn to_binpoly(&self) -> BinPoly {
        BinPoly::from_bits(self.bits)
    }

    fn same_field(&self, other: &FieldElem) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same_field(other)?;
        Ok(FieldElem {
            field: self.field.clone(),
            bits: self.field.add_bits(self.bits, other.bits),
        })
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same_field(other)?;
        Ok(FieldElem {
            field: self.field.clone(),
            bits: self.field.mul_bits(self.bits, other.bits),
        })
    }

    pub fn inv(&self) -> Result<FieldElem> {
        Ok(FieldElem {
            field: self.field.clone(),
            bits: self.field.inv_bits(self.bits)?,
        })
    }

    pub fn pow(&self, e: u64) -> FieldElem {
        FieldElem {
            field: self.field.clone(),
            bits: self.field.pow_bits(self.bits, e),
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.render(self))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.render(self))
    }
}

/// The residue of `p` in the field defined by an irreducible `g` — step
/// five of the reduction: coefficients re-enter a (smaller) field here.
pub fn reduce_into_field(p: &BinPoly, g: &BinPoly) -> Result<FieldElem> {
    let k = g.degree().ok_or(Error::ConstantPolynomial)?;
    let field = Field::new(k, g.clone())?;
    Ok(field.reduce(p))
}
