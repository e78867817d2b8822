//! Exact coefficient field `Q(i)(tau)`: rational functions in one
//! transcendental symbol `tau` (standing for `2*pi*i`) with Gaussian-rational
//! coefficients. Numeric evaluation substitutes `tau -> 2*pi*i`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::EngineError;

pub type Complex64 = num::complex::Complex<f64>;

/// Gaussian rational `re + im*i`, the base field `Q(i)`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// Squared modulus `re^2 + im^2`, a nonnegative rational.
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self, EngineError> {
        if self.is_zero() {
            return Err(EngineError::DivisionByZero);
        }
        let n = self.norm();
        Ok(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_complex(&self) -> Complex64 {
        fn r2f(r: &BigRational) -> f64 {
            let (n, d) = (r.numer(), r.denom());
            // good enough for the magnitudes appearing here
            let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
            let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
            nf / df
        }
        Complex64::new(r2f(&self.re), r2f(&self.im))
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Canonical form `a/b+c/d*i` (imaginary part elided when zero, real
    /// part elided when purely imaginary and nonzero).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im = if self.im.is_one() {
            "i".to_string()
        } else if (-self.im.clone()).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", fmt_rational(&self.im))
        };
        if self.re.is_zero() {
            write!(f, "{im}")
        } else if self.im.is_negative() {
            write!(f, "{}{}", fmt_rational(&self.re), im)
        } else {
            write!(f, "{}+{}", fmt_rational(&self.re), im)
        }
    }
}

/// Dense univariate polynomial in `tau` over `Q(i)`; trailing zeros pruned.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TauPoly(pub Vec<GaussRat>);

impl TauPoly {
    pub fn zero() -> Self {
        TauPoly(Vec::new())
    }

    pub fn one() -> Self {
        TauPoly(vec![GaussRat::one()])
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut p = TauPoly(vec![c]);
        p.prune();
        p
    }

    pub fn tau() -> Self {
        TauPoly(vec![GaussRat::zero(), GaussRat::one()])
    }

    fn prune(&mut self) {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&GaussRat> {
        self.0.last()
    }

    pub fn add(&self, rhs: &TauPoly) -> TauPoly {
        let n = self.0.len().max(rhs.0.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.0.get(k).cloned().unwrap_or_else(GaussRat::zero);
            let b = rhs.0.get(k).cloned().unwrap_or_else(GaussRat::zero);
            out.push(&a + &b);
        }
        let mut p = TauPoly(out);
        p.prune();
        p
    }

    pub fn neg(&self) -> TauPoly {
        TauPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, rhs: &TauPoly) -> TauPoly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &TauPoly) -> TauPoly {
        if self.is_zero() || rhs.is_zero() {
            return TauPoly::zero();
        }
        let mut out = vec![GaussRat::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        let mut p = TauPoly(out);
        p.prune();
        p
    }

    pub fn scale(&self, c: &GaussRat) -> TauPoly {
        let mut p = TauPoly(self.0.iter().map(|a| a * c).collect());
        p.prune();
        p
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, den: &TauPoly) -> (TauPoly, TauPoly) {
        assert!(!den.is_zero(), "polynomial division by zero");
        let mut rem = self.clone();
        let mut quot = vec![GaussRat::zero(); self.0.len().saturating_sub(den.0.len() - 1)];
        let dlead_inv = den.leading().unwrap().inv().unwrap();
        while !rem.is_zero() && rem.0.len() >= den.0.len() {
            let shift = rem.0.len() - den.0.len();
            let c = rem.leading().unwrap() * &dlead_inv;
            quot[shift] = c.clone();
            // rem -= c * tau^shift * den
            for (k, d) in den.0.iter().enumerate() {
                let t = &c * d;
                rem.0[shift + k] = &rem.0[shift + k] - &t;
            }
            rem.prune();
        }
        let mut q = TauPoly(quot);
        q.prune();
        (q, rem)
    }

    pub fn gcd(&self, other: &TauPoly) -> TauPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        // monic normalization
        let li = a.leading().unwrap().inv().unwrap();
        a.scale(&li)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * t + c.to_complex();
        }
        acc
    }
}

impl fmt::Display for TauPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*tau")?,
                _ => write!(f, "({c})*tau^{k}")?,
            }
        }
        Ok(())
    }
}

/// Element of `Q(i)(tau)` stored as a reduced fraction with monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scalar {
    num: TauPoly,
    den: TauPoly,
}

impl Scalar {
    pub fn from_parts(num: TauPoly, den: TauPoly) -> Result<Self, EngineError> {
        if den.is_zero() {
            return Err(EngineError::DivisionByZero);
        }
        let mut s = Scalar { num, den };
        s.reduce();
        Ok(s)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = TauPoly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() > 0 || !g.leading().map(|c| c.is_one()).unwrap_or(true) {
            self.num = self.num.div_rem(&g).0;
            self.den = self.den.div_rem(&g).0;
        }
        // make denominator monic
        let lead = self.den.leading().unwrap().clone();
        if !lead.is_one() {
            let li = lead.inv().unwrap();
            self.num = self.num.scale(&li);
            self.den = self.den.scale(&li);
        }
    }

    pub fn numerator(&self) -> &TauPoly {
        &self.num
    }

    pub fn denominator(&self) -> &TauPoly {
        &self.den
    }

    pub fn zero() -> Self {
        Scalar { num: TauPoly::zero(), den: TauPoly::one() }
    }

    pub fn one() -> Self {
        Scalar { num: TauPoly::one(), den: TauPoly::one() }
    }

    pub fn tau() -> Self {
        Scalar { num: TauPoly::tau(), den: TauPoly::one() }
    }

    pub fn i() -> Self {
        Scalar::from_gauss(GaussRat::i())
    }

    pub fn from_gauss(c: GaussRat) -> Self {
        Scalar { num: TauPoly::constant(c), den: TauPoly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_gauss(GaussRat::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::from_gauss(GaussRat::from_ratio(num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self == &Scalar::one()
    }

    /// `Some(n)` when the value is the rational integer `n` (no `tau`, no `i`).
    pub fn as_i64(&self) -> Option<i64> {
        if !self.den.0.len().eq(&1) || !self.den.0[0].is_one() {
            return None;
        }
        if self.num.is_zero() {
            return Some(0);
        }
        if self.num.degree() > 0 {
            return None;
        }
        let c = &self.num.0[0];
        if !c.im.is_zero() || !c.re.denom().is_one() {
            return None;
        }
        c.re.numer().to_string().parse().ok()
    }

    pub fn inv(&self) -> Result<Self, EngineError> {
        Scalar::from_parts(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, mut n: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Numeric evaluation at `tau = 2*pi*i`.
    pub fn eval(&self) -> Complex64 {
        let t = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        self.num.eval(t) / self.den.eval(t)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        Scalar::from_parts(num, den).unwrap()
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::from_parts(self.num.mul(&rhs.num), self.den.mul(&rhs.den)).unwrap()
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        Scalar::from_parts(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
            .expect("scalar division by zero")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == TauPoly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
