//! Exact arithmetic in the cyclotomic field ℚ(ζ_N).
//!
//! Elements are rational coefficient vectors over the power basis
//! ζ⁰..ζ^{φ(N)−1}, always reduced modulo the N-th cyclotomic polynomial, so
//! equality is plain coefficient equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_CONDUCTOR: u32 = 24;

/// Per-conductor data: Φ_N and ζ^j reduced to the power basis for j in 0..N.
#[derive(Debug)]
struct Field {
    conductor: u32,
    degree: usize,
    powers: Vec<Vec<i64>>,
}

fn field(conductor: u32) -> Arc<Field> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(conductor)
        .or_insert_with(|| Arc::new(build_field(conductor)))
        .clone()
}

/// Coefficients (constant term first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial index must be positive");
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        num = divide_monic(&num, &cyclotomic_polynomial(d));
    }
    num
}

fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![0i64; qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[k + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

fn build_field(conductor: u32) -> Field {
    let phi = cyclotomic_polynomial(conductor);
    let degree = phi.len() - 1;
    let mut powers = Vec::with_capacity(conductor as usize);
    let mut cur = vec![0i64; degree];
    cur[0] = 1;
    for _ in 0..conductor {
        powers.push(cur.clone());
        // multiply by ζ, then eliminate ζ^degree using Φ_N (monic).
        let top = cur[degree - 1];
        for j in (1..degree).rev() {
            cur[j] = cur[j - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for j in 0..degree {
                cur[j] -= top * phi[j];
            }
        }
    }
    Field {
        conductor,
        degree,
        powers,
    }
}

#[derive(Clone)]
pub struct Cyclotomic {
    field: Arc<Field>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.field.conductor == other.field.conductor && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic({self})")
    }
}

impl Cyclotomic {
    pub fn zero(conductor: u32) -> Self {
        let field = field(conductor);
        let coeffs = vec![BigRational::zero(); field.degree];
        Cyclotomic { field, coeffs }
    }

    pub fn from_rational(conductor: u32, q: BigRational) -> Self {
        let mut z = Self::zero(conductor);
        z.coeffs[0] = q;
        z
    }

    pub fn from_int(conductor: u32, n: i64) -> Self {
        Self::from_rational(conductor, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_int(conductor, 1)
    }

    /// ζ_N^e for any integer exponent.
    fn zeta_power(conductor: u32, e: i64) -> Self {
        let field = field(conductor);
        let j = e.rem_euclid(i64::from(conductor)) as usize;
        let coeffs = field.powers[j]
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        Cyclotomic { field, coeffs }
    }

    /// ζ_n^k inside ℚ(ζ_N).
    pub fn root_of_unity(k: i64, n: u32, conductor: u32) -> Result<Self> {
        if n == 0 || conductor % n != 0 {
            return Err(Error::NotADivisor { n, conductor });
        }
        Ok(Self::zeta_power(conductor, k * i64::from(conductor / n)))
    }

    pub fn conductor(&self) -> u32 {
        self.field.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// The value as a machine integer, when it is one.
    pub fn as_integer(&self) -> Option<i64> {
        let q = self.as_rational()?;
        if q.is_integer() {
            q.to_integer().to_i64()
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.conductor != other.field.conductor {
            return Err(Error::ConductorMismatch(
                self.field.conductor,
                other.field.conductor,
            ));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Cyclotomic {
            field: self.field.clone(),
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.field.conductor as usize;
        let mut acc = vec![BigRational::zero(); self.field.degree];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (slot, &c) in acc.iter_mut().zip(&self.field.powers[(j + k) % n]) {
                    if c != 0 {
                        *slot += &ab * BigInt::from(c);
                    }
                }
            }
        }
        Ok(Cyclotomic {
            field: self.field.clone(),
            coeffs: acc,
        })
    }

    fn neg_ref(&self) -> Self {
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Cyclotomic {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        let n = self.field.conductor as i64;
        let mut out = Self::zero(self.field.conductor);
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let z = Self::zeta_power(self.field.conductor, n - j as i64);
            for (slot, c) in out.coeffs.iter_mut().zip(&z.coeffs) {
                *slot += a * c;
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.field.conductor);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Floating-point value, for display and non-certifying numerics only.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = f64::from(self.field.conductor);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, a) in self.coeffs.iter().enumerate() {
            let v = a.to_f64().unwrap_or(f64::NAN);
            let t = std::f64::consts::TAU * j as f64 / n;
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    /// Parses a value expression (see [`parse`]).
    pub fn parse(input: &str, conductor: u32) -> Result<Self> {
        parse(input, conductor)
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    /// Panics on conductor mismatch; use `checked_add` for fallible code paths.
    fn add(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.checked_add(rhs).expect("conductor mismatch")
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.checked_sub(rhs).expect("conductor mismatch")
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.checked_mul(rhs).expect("conductor mismatch")
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        self.neg_ref()
    }
}

/// Prints in the parser's syntax, e.g. `2 - z24^4 + 1/2*z24^6`.
impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            if j == 0 {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write!(f, "z{}^{j}", self.field.conductor)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Root(u32),
    Op(char),
}

fn lex(input: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Int(s.parse().map_err(|_| Error::parse(input, "bad integer"))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.strip_prefix('z') {
                Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                    let n = digits
                        .parse()
                        .map_err(|_| Error::parse(input, "root order too large"))?;
                    out.push(Tok::Root(n));
                }
                _ => out.push(Tok::Ident(word)),
            }
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::parse(input, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<Tok>,
    pos: usize,
    conductor: u32,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::parse(self.input, reason)
    }

    fn expr(&mut self) -> Result<Cyclotomic> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Cyclotomic> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc = &acc * &rhs;
            } else {
                let q = rhs
                    .as_rational()
                    .ok_or_else(|| self.err("division is only allowed by rationals"))?;
                if q.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc = acc.scale(&q.recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Cyclotomic> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Cyclotomic> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek_op() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let e = match self.toks.get(self.pos) {
            Some(Tok::Int(k)) => k.to_u32().ok_or_else(|| self.err("exponent too large"))?,
            _ => return Err(self.err("expected integer exponent")),
        };
        self.pos += 1;
        if !negative {
            return Ok(base.pow(e));
        }
        // Negative powers are only defined here for units on the unit circle.
        let inv = base.conj();
        if &base * &inv != Cyclotomic::one(self.conductor) {
            return Err(self.err("negative exponent of a non-root of unity"));
        }
        Ok(inv.pow(e))
    }

    fn root(&self, k: i64, n: u32) -> Result<Cyclotomic> {
        Cyclotomic::root_of_unity(k, n, self.conductor).map_err(|_| {
            self.err(format!(
                "a primitive {n}-th root needs a conductor divisible by {n}, have {}",
                self.conductor
            ))
        })
    }

    fn atom(&mut self) -> Result<Cyclotomic> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Int(k) => Ok(Cyclotomic::from_rational(
                self.conductor,
                BigRational::from_integer(k),
            )),
            Tok::Root(n) => self.root(1, n),
            Tok::Ident(name) => match name.as_str() {
                "w" => self.root(1, 3),
                "i" => self.root(1, 4),
                "sqrt2" => Ok(&self.root(1, 8)? + &self.root(-1, 8)?),
                _ => Err(self.err(format!("unknown symbol `{name}`"))),
            },
            Tok::Op('(') => {
                let v = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err("missing `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Op(c) => Err(self.err(format!("unexpected `{c}`"))),
        }
    }
}

/// Parses integers, `p/q`, `w` (= ζ₃), `i` (= ζ₄), `sqrt2` (= ζ₈ + ζ₈⁻¹),
/// `z<n>` and `z<n>^<k>` combined with `+ - * / ^` and parentheses.
pub fn parse(input: &str, conductor: u32) -> Result<Cyclotomic> {
    let toks = lex(input)?;
    if toks.is_empty() {
        return Err(Error::parse(input, "empty expression"));
    }
    let mut p = Parser {
        input,
        toks,
        pos: 0,
        conductor,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}
