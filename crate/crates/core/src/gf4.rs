//! Arithmetic over GF(4) and its polynomial ring.
//!
//! Elements are stored as 2-bit values in the polynomial basis `{1, α}`
//! with `α² = α + 1`:
//!
//! | element | value |
//! |---------|-------|
//! | 0       | 0     |
//! | 1       | 1     |
//! | α       | 2     |
//! | β = α²  | 3     |
//!
//! Addition is bitwise XOR, multiplication goes through a 4×4 table.
//! Polynomials are dense, constant term first, and always kept in
//! canonical form (no trailing zero coefficients).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const MUL_TABLE: [[u8; 4]; 4] = [
    [0, 0, 0, 0],
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
];

const INV_TABLE: [u8; 4] = [0, 1, 3, 2];

/// An element of GF(4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gf4Symbol(u8);

impl Gf4Symbol {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);
    /// The primitive element α.
    pub const ALPHA: Self = Self(2);
    /// β = α².
    pub const BETA: Self = Self(3);

    /// All four field elements in value order.
    pub const ALL: [Self; 4] = [Self::ZERO, Self::ONE, Self::ALPHA, Self::BETA];
    /// The multiplicative group `{1, α, β}`.
    pub const NONZERO: [Self; 3] = [Self::ONE, Self::ALPHA, Self::BETA];

    /// Builds a symbol from its 2-bit value; only the two low bits are used.
    #[inline]
    pub const fn new(value: u8) -> Self {
        Self(value & 3)
    }

    #[inline]
    pub const fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse, `None` for zero.
    #[inline]
    pub fn inv(self) -> Option<Self> {
        (self.0 != 0).then(|| Self(INV_TABLE[self.0 as usize]))
    }
}

/// GF(4) sum.
#[inline]
pub fn gf4_add(a: Gf4Symbol, b: Gf4Symbol) -> Gf4Symbol {
    Gf4Symbol(a.0 ^ b.0)
}

/// GF(4) product.
#[inline]
pub fn gf4_mul(a: Gf4Symbol, b: Gf4Symbol) -> Gf4Symbol {
    Gf4Symbol(MUL_TABLE[a.0 as usize][b.0 as usize])
}

impl Add for Gf4Symbol {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        gf4_add(self, rhs)
    }
}

impl AddAssign for Gf4Symbol {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

// characteristic 2: subtraction is addition
impl Sub for Gf4Symbol {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        gf4_add(self, rhs)
    }
}

impl Mul for Gf4Symbol {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        gf4_mul(self, rhs)
    }
}

impl MulAssign for Gf4Symbol {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = gf4_mul(*self, rhs);
    }
}

impl fmt::Display for Gf4Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.0 {
            0 => "0",
            1 => "1",
            2 => "a",
            _ => "b",
        };
        f.write_str(c)
    }
}

impl FromStr for Gf4Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "0" => Ok(Self::ZERO),
            "1" => Ok(Self::ONE),
            "a" | "α" => Ok(Self::ALPHA),
            "b" | "β" => Ok(Self::BETA),
            other => Err(Error::Parse(format!("invalid GF(4) symbol {other:?}"))),
        }
    }
}

/// A polynomial over GF(4), constant term first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gf4Poly {
    coeffs: Vec<Gf4Symbol>,
}

impl Gf4Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![Gf4Symbol::ONE],
        }
    }

    /// `c · x^k`.
    pub fn monomial(c: Gf4Symbol, k: usize) -> Self {
        let mut coeffs = vec![Gf4Symbol::ZERO; k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    /// Builds a polynomial from coefficients (constant term first), dropping
    /// trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Gf4Symbol>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Builds a polynomial from raw 2-bit values (constant term first).
    pub fn from_values(values: &[u8]) -> Self {
        Self::from_coeffs(values.iter().map(|&v| Gf4Symbol::new(v)).collect())
    }

    /// Coefficients in canonical form; empty for the zero polynomial.
    pub fn coeffs(&self) -> &[Gf4Symbol] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Gf4Symbol {
        self.coeffs.get(k).copied().unwrap_or(Gf4Symbol::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial (whose degree is taken as −1).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn leading(&self) -> Gf4Symbol {
        self.coeffs.last().copied().unwrap_or(Gf4Symbol::ZERO)
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn scale(&self, c: Gf4Symbol) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Gf4Symbol::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Sequence of `len` coefficients, zero padded. Panics if the polynomial
    /// does not fit.
    pub fn to_symbols(&self, len: usize) -> Vec<Gf4Symbol> {
        assert!(self.coeffs.len() <= len, "polynomial longer than {len}");
        let mut out = self.coeffs.clone();
        out.resize(len, Gf4Symbol::ZERO);
        out
    }
}

/// Sum of two polynomials.
pub fn poly_add(p: &Gf4Poly, q: &Gf4Poly) -> Gf4Poly {
    let (long, short) = if p.coeffs.len() >= q.coeffs.len() {
        (p, q)
    } else {
        (q, p)
    };
    let mut coeffs = long.coeffs.clone();
    for (c, &s) in coeffs.iter_mut().zip(&short.coeffs) {
        *c += s;
    }
    Gf4Poly::from_coeffs(coeffs)
}

/// Schoolbook product.
pub fn poly_mul(p: &Gf4Poly, q: &Gf4Poly) -> Gf4Poly {
    if p.is_zero() || q.is_zero() {
        return Gf4Poly::zero();
    }
    let mut coeffs = vec![Gf4Symbol::ZERO; p.coeffs.len() + q.coeffs.len() - 1];
    for (i, &a) in p.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, &b) in q.coeffs.iter().enumerate() {
            coeffs[i + j] += a * b;
        }
    }
    Gf4Poly::from_coeffs(coeffs)
}

/// Long division: returns `(quotient, remainder)` with
/// `num = den·quotient + remainder` and `deg(remainder) < deg(den)`.
pub fn poly_divmod(num: &Gf4Poly, den: &Gf4Poly) -> Result<(Gf4Poly, Gf4Poly), Error> {
    let den_deg = den.degree().ok_or(Error::DivisionByZero)?;
    let lead_inv = den.leading().inv().expect("canonical leading coefficient");
    let mut rem = num.coeffs.clone();
    if rem.len() <= den_deg {
        return Ok((Gf4Poly::zero(), num.clone()));
    }
    let mut quot = vec![Gf4Symbol::ZERO; rem.len() - den_deg];
    for k in (0..quot.len()).rev() {
        let c = rem[k + den_deg] * lead_inv;
        if c.is_zero() {
            continue;
        }
        quot[k] = c;
        for (j, &d) in den.coeffs.iter().enumerate() {
            rem[k + j] += c * d;
        }
    }
    rem.truncate(den_deg);
    Ok((Gf4Poly::from_coeffs(quot), Gf4Poly::from_coeffs(rem)))
}

impl Add for &Gf4Poly {
    type Output = Gf4Poly;
    fn add(self, rhs: Self) -> Gf4Poly {
        poly_add(self, rhs)
    }
}

impl Mul for &Gf4Poly {
    type Output = Gf4Poly;
    fn mul(self, rhs: Self) -> Gf4Poly {
        poly_mul(self, rhs)
    }
}

/// Comma-separated symbols from `{0,1,a,b}`, constant term first. The zero
/// polynomial prints as `0`.
impl fmt::Display for Gf4Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Gf4Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let coeffs = s
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Gf4Symbol>, _>>()
            .map_err(|e| Error::Parse(format!("polynomial {s:?}: {e}")))?;
        Ok(Self::from_coeffs(coeffs))
    }
}

impl Serialize for Gf4Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gf4Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
