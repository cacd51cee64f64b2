//! Exact arithmetic in the cyclotomic field ℚ(ζ_r).
//!
//! A [`Scalar`] is a residue class of ℚ\[x\] modulo the `r`-th cyclotomic
//! polynomial Φ_r, stored densely in the power basis `1, ζ, …, ζ^{n-1}` with
//! `n = deg Φ_r`. Order `r = 1` is the plain rational field; a rational
//! scalar (order 1) combines with scalars of any order through the natural
//! embedding ℚ ⊂ ℚ(ζ_r). Two scalars of different orders > 1 never mix.
//!
//! The textual form accepted by [`Scalar::parse`] and produced by
//! `Display` uses the symbol `z` for ζ:
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := rational | 'z' ('^' nat)? | '(' expr ')' | '-' factor
//! rational := int ('/' nat)?
//! ```

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot combine scalars of orders {0} and {1}")]
    OrderMismatch(u32, u32),
    #[error("root-of-unity order must be positive")]
    ZeroOrder,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// The modulus Φ_r for one order `r`, shared by every scalar of that order.
#[derive(Debug)]
pub struct Cyclotomic {
    order: u32,
    /// Coefficients of Φ_r, constant term first; monic of degree `phi.len() - 1`.
    phi: Vec<i64>,
}

impl Cyclotomic {
    /// Looks up (or builds and interns) the cyclotomic modulus of order `r`.
    pub fn of(order: u32) -> Result<&'static Cyclotomic, ScalarError> {
        if order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        static TABLE: OnceLock<Mutex<HashMap<u32, &'static Cyclotomic>>> = OnceLock::new();
        let mut table = TABLE
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .expect("cyclotomic table poisoned");
        Ok(table.entry(order).or_insert_with(|| {
            Box::leak(Box::new(Cyclotomic {
                order,
                phi: cyclotomic_polynomial(order),
            }))
        }))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// deg Φ_r = φ(r).
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Φ_r as integer coefficients, constant term first.
    pub fn coefficients(&self) -> &[i64] {
        &self.phi
    }
}

/// Φ_r via x^r - 1 = ∏_{d | r} Φ_d.
fn cyclotomic_polynomial(r: u32) -> Vec<i64> {
    let r = r as usize;
    // x^r - 1
    let mut num = vec![0i64; r + 1];
    num[0] = -1;
    num[r] = 1;
    for d in 1..r {
        if r % d == 0 {
            let div = cyclotomic_polynomial(d as u32);
            num = exact_divide_monic(&num, &div);
        }
    }
    num
}

fn exact_divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = num.len() - 1 - dd;
    let mut quot = vec![0i64; qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// An exact element of ℚ(ζ_r), always reduced modulo Φ_r.
#[derive(Clone)]
pub struct Scalar {
    field: &'static Cyclotomic,
    coeffs: Vec<BigRational>,
}

impl Scalar {
    pub fn zero(order: u32) -> Scalar {
        let field = Cyclotomic::of(order).expect("order must be positive");
        Scalar {
            field,
            coeffs: vec![BigRational::zero(); field.degree()],
        }
    }

    pub fn one(order: u32) -> Scalar {
        Scalar::from_rational(order, BigRational::one())
    }

    pub fn from_int(order: u32, v: i64) -> Scalar {
        Scalar::from_rational(order, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(order: u32, v: BigRational) -> Scalar {
        let mut s = Scalar::zero(order);
        s.coeffs[0] = v;
        s
    }

    pub fn from_fraction(order: u32, num: i64, den: i64) -> Scalar {
        Scalar::from_rational(order, BigRational::new(num.into(), den.into()))
    }

    /// The distinguished primitive root ζ of order `r`.
    pub fn zeta(order: u32) -> Scalar {
        Scalar::zeta_pow(order, 1)
    }

    /// ζ^k, reduced.
    pub fn zeta_pow(order: u32, k: u64) -> Scalar {
        let field = Cyclotomic::of(order).expect("order must be positive");
        let e = (k % order as u64) as usize;
        let mut poly = vec![BigRational::zero(); e.max(field.degree() - 1) + 1];
        poly[e] = BigRational::one();
        Scalar::from_poly(field, poly)
    }

    /// Builds the residue of an arbitrary polynomial in ζ (constant term first).
    pub fn from_coeffs(order: u32, coeffs: Vec<BigRational>) -> Result<Scalar, ScalarError> {
        let field = Cyclotomic::of(order)?;
        Ok(Scalar::from_poly(field, coeffs))
    }

    fn from_poly(field: &'static Cyclotomic, mut poly: Vec<BigRational>) -> Scalar {
        let n = field.degree();
        if poly.len() > n {
            for i in (n..poly.len()).rev() {
                let c = std::mem::take(&mut poly[i]);
                if c.is_zero() {
                    continue;
                }
                let base = i - n;
                for (j, &pj) in field.phi[..n].iter().enumerate() {
                    if pj != 0 {
                        poly[base + j] -= &c * BigRational::from_integer(BigInt::from(pj));
                    }
                }
            }
        }
        poly.resize(n, BigRational::zero());
        Scalar { field, coeffs: poly }
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    pub fn field(&self) -> &'static Cyclotomic {
        self.field
    }

    /// Power-basis coefficients, length deg Φ_r.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// True when the value lies in ℚ.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Re-expresses the scalar in ℚ(ζ_r) for a different `r`; only rational
    /// values (or same-order values) can be moved.
    pub fn with_order(&self, order: u32) -> Result<Scalar, ScalarError> {
        if order == self.order() {
            return Ok(self.clone());
        }
        if !self.is_rational() {
            return Err(ScalarError::OrderMismatch(self.order(), order));
        }
        Ok(Scalar::from_rational(order, self.coeffs[0].clone()))
    }

    fn common_field(&self, other: &Scalar) -> Result<&'static Cyclotomic, ScalarError> {
        match (self.order(), other.order()) {
            (a, b) if a == b => Ok(self.field),
            (1, _) => Ok(other.field),
            (_, 1) => Ok(self.field),
            (a, b) => Err(ScalarError::OrderMismatch(a, b)),
        }
    }

    fn lifted(&self, field: &'static Cyclotomic) -> Vec<BigRational> {
        if std::ptr::eq(self.field, field) {
            self.coeffs.clone()
        } else {
            let mut v = vec![BigRational::zero(); field.degree()];
            v[0] = self.coeffs[0].clone();
            v
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.common_field(other)?;
        let mut a = self.lifted(field);
        let b = other.lifted(field);
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        Ok(Scalar { field, coeffs: a })
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.common_field(other)?;
        let mut a = self.lifted(field);
        let b = other.lifted(field);
        for (x, y) in a.iter_mut().zip(b) {
            *x -= y;
        }
        Ok(Scalar { field, coeffs: a })
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.common_field(other)?;
        if self.is_rational() || other.is_rational() {
            let (r, full) = if self.is_rational() {
                (&self.coeffs[0], other.lifted(field))
            } else {
                (&other.coeffs[0], self.lifted(field))
            };
            let coeffs = full.into_iter().map(|c| c * r).collect();
            return Ok(Scalar { field, coeffs });
        }
        let n = field.degree();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(Scalar::from_poly(field, prod))
    }

    pub fn try_inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Scalar::from_rational(self.order(), self.coeffs[0].recip()));
        }
        // Solve (multiplication-by-self matrix) · b = e_0 over ℚ.
        let n = self.field.degree();
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        let mut basis = Scalar::one(self.order());
        let z = Scalar::zeta(self.order());
        for _ in 0..n {
            cols.push((self * &basis).coeffs);
            basis = &basis * &z;
        }
        // augmented rows
        let mut rows: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !rows[r][c].is_zero())
                .expect("nonzero element of a field is invertible");
            rows.swap(c, p);
            let inv = rows[c][c].recip();
            for x in rows[c].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != c && !rows[r][c].is_zero() {
                    let f = rows[r][c].clone();
                    for k in c..=n {
                        let t = &rows[c][k] * &f;
                        rows[r][k] -= t;
                    }
                }
            }
        }
        let coeffs = rows.into_iter().map(|mut r| r.pop().unwrap()).collect();
        Ok(Scalar {
            field: self.field,
            coeffs,
        })
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.common_field(other)?;
        self.try_mul(&other.try_inv()?)
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::from_rational(self.order(), BigRational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Image under the field automorphism ζ ↦ ζ^k (`k` coprime to `r`).
    pub fn galois(&self, k: u32) -> Scalar {
        let r = self.order() as u64;
        let mut poly = vec![BigRational::zero(); r as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[((i as u64 * k as u64) % r) as usize] += c;
        }
        Scalar::from_poly(self.field, poly)
    }

    /// Complex value under ζ ↦ e^{2πi/r}. Diagnostic only.
    pub fn to_complex(&self) -> (f64, f64) {
        let r = self.order() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let t = 2.0 * std::f64::consts::PI * k as f64 / r;
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    pub fn parse(text: &str, order: u32) -> Result<Scalar, ScalarError> {
        Cyclotomic::of(order)?;
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
            order,
            len: text.len(),
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(v)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        if self.order() == other.order() {
            return self.coeffs == other.coeffs;
        }
        // a rational value equals its embedding in any order
        self.is_rational() && other.is_rational() && self.coeffs[0] == other.coeffs[0]
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        if self.is_rational() {
            self.coeffs[0].hash(state);
        } else {
            self.order().hash(state);
            self.coeffs.hash(state);
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            field: self.field,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            let body = match k {
                0 => fmt_rational(&abs),
                _ => {
                    let z = if k == 1 { "z".to_string() } else { format!("z^{k}") };
                    if abs.is_one() {
                        z
                    } else {
                        format!("{}*{}", fmt_rational(&abs), z)
                    }
                }
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar[r={}]({})", self.order(), self)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    order: u32,
    len: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> ScalarError {
        let pos = self.chars.get(self.pos).map_or(self.len, |c| c.0);
        ScalarError::Syntax {
            pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn is_minus(c: char) -> bool {
        c == '-' || c == '\u{2212}'
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.try_add(&self.term()?)?;
                }
                Some(c) if Self::is_minus(c) => {
                    self.pos += 1;
                    acc = acc.try_sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.try_mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(c) if Self::is_minus(c) => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('z') | Some('\u{03b6}') => {
                self.pos += 1;
                if self.peek() == Some('^') {
                    self.pos += 1;
                    if matches!(self.peek(), Some(c) if Self::is_minus(c)) {
                        return Err(self.error("negative power of z"));
                    }
                    let e = self.nat()?;
                    Ok(Scalar::zeta_pow(self.order, e.to_u64().unwrap_or(0) % self.order as u64))
                } else {
                    Ok(Scalar::zeta(self.order))
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.nat()?;
                let mut q = BigRational::from_integer(num);
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let den = self.nat()?;
                    if den.is_zero() {
                        return Err(ScalarError::DivisionByZero);
                    }
                    q /= BigRational::from_integer(den);
                }
                Ok(Scalar::from_rational(self.order, q))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn nat(&mut self) -> Result<BigInt, ScalarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a natural number"));
        }
        let s: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        Ok(s.parse().expect("digits"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        Scalar::parse(text, 3).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn third_roots() {
        let z = Scalar::zeta(3);
        let z2 = z.pow(2);
        assert_eq!(&z + &z2, Scalar::from_int(3, -1));
        assert_eq!(&z * &z2, Scalar::one(3));
        let lhs = &(-&z) - &(&Scalar::from_int(3, 2) * &z2);
        assert_eq!(lhs, &Scalar::from_int(3, 2) + &z);
    }

    #[test]
    fn zeta_has_exact_order() {
        for r in 1..=12u32 {
            let z = Scalar::zeta(r);
            assert!(z.pow(r).is_one(), "r = {r}");
            for k in 1..r {
                assert!(!z.pow(k).is_one(), "r = {r}, k = {k}");
            }
        }
    }

    #[test]
    fn parse_examples() {
        assert_eq!(s("z^2").coeffs(), &[q(-1, 1), q(-1, 1)]);
        assert_eq!(s("1/2 + z").coeffs(), &[q(1, 2), q(1, 1)]);
        assert_eq!(s("-2*z - z^2").coeffs(), &[q(1, 1), q(-1, 1)]);
        assert_eq!(s("(-z - 2*z^2)"), &Scalar::from_int(3, 2) + &Scalar::zeta(3));
        assert_eq!(s("z^3"), Scalar::one(3));
        assert_eq!(s("\u{2212}1"), Scalar::from_int(3, -1));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Scalar::parse("z^-1", 3),
            Err(ScalarError::Syntax { .. })
        ));
        match Scalar::parse("1 + * 2", 3) {
            Err(ScalarError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(Scalar::parse("(1 + z", 3).is_err());
        assert!(Scalar::parse("1/0", 3).is_err());
        assert!(Scalar::parse("", 3).is_err());
        assert!(Scalar::parse("1", 0).is_err());
    }

    #[test]
    fn order_mixing() {
        let half = Scalar::from_fraction(1, 1, 2);
        let z = Scalar::zeta(3);
        let sum = half.try_add(&z).unwrap();
        assert_eq!(sum.order(), 3);
        assert_eq!(sum, s("1/2 + z"));
        assert_eq!(
            Scalar::zeta(4).try_add(&z),
            Err(ScalarError::OrderMismatch(4, 3))
        );
        assert_eq!(z.try_div(&Scalar::zero(3)), Err(ScalarError::DivisionByZero));
        assert_eq!(Scalar::from_int(1, 5), Scalar::from_int(3, 5));
    }

    #[test]
    fn display_round_trip() {
        for t in ["0", "1", "-1", "z", "-z", "2 - 3/4*z", "-1/2 - z"] {
            let v = s(t);
            assert_eq!(Scalar::parse(&v.to_string(), 3).unwrap(), v);
        }
        assert_eq!(s("z^2").to_string(), "-1 - z");
        let i4 = Scalar::parse("2*z^3", 5).unwrap();
        assert_eq!(i4.to_string(), "2*z^3");
    }

    #[test]
    fn inverse_in_degree_four() {
        let a = Scalar::parse("1 + 2*z - z^3", 5).unwrap();
        let b = a.try_inv().unwrap();
        assert!((&a * &b).is_one());
    }
}
