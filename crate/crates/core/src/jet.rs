//! Truncated bivariate power series ("jets") in `x, y` with `Scalar`
//! coefficients. A `Jet2` carries its truncation degree `N`; coefficients of
//! total degree greater than `N` are never stored or reported.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::scalar::Scalar;

/// Sentinel order of the zero jet, strictly larger than any truncation.
pub const ORDER_INFINITE: u32 = u32::MAX;

/// Keys sorted by (total degree, i) so that stored tables are canonical.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Exp2 {
    pub deg: u32,
    pub i: u32,
}

impl Exp2 {
    pub fn new(i: u32, j: u32) -> Self {
        Exp2 { deg: i + j, i }
    }
    pub fn i(&self) -> u32 {
        self.i
    }
    pub fn j(&self) -> u32 {
        self.deg - self.i
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Jet2 {
    trunc: u32,
    terms: BTreeMap<Exp2, Scalar>,
}

impl Jet2 {
    pub fn zero(trunc: u32) -> Self {
        Jet2 { trunc, terms: BTreeMap::new() }
    }

    pub fn constant(trunc: u32, c: Scalar) -> Self {
        let mut j = Jet2::zero(trunc);
        j.set(0, 0, c);
        j
    }

    pub fn one(trunc: u32) -> Self {
        Jet2::constant(trunc, Scalar::one())
    }

    pub fn var_x(trunc: u32) -> Self {
        Jet2::monomial(trunc, 1, 0, Scalar::one())
    }

    pub fn var_y(trunc: u32) -> Self {
        Jet2::monomial(trunc, 0, 1, Scalar::one())
    }

    pub fn monomial(trunc: u32, i: u32, j: u32, c: Scalar) -> Self {
        let mut out = Jet2::zero(trunc);
        out.set(i, j, c);
        out
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeff(&self, i: u32, j: u32) -> Scalar {
        self.terms.get(&Exp2::new(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, i: u32, j: u32, c: Scalar) {
        if i + j > self.trunc {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&Exp2::new(i, j));
        } else {
            self.terms.insert(Exp2::new(i, j), c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exp2, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of the first nonzero homogeneous component; `ORDER_INFINITE`
    /// for the zero jet.
    pub fn order(&self) -> u32 {
        self.terms.keys().next().map(|e| e.deg).unwrap_or(ORDER_INFINITE)
    }

    fn check_trunc(&self, rhs: &Jet2) -> Result<()> {
        if self.trunc != rhs.trunc {
            return Err(EngineError::TruncationMismatch(self.trunc, rhs.trunc));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        self.check_trunc(rhs).expect("jet truncation mismatch");
        let mut out = self.clone();
        for (e, c) in rhs.terms.iter() {
            let s = match out.terms.get(e) {
                Some(a) => a + c,
                None => c.clone(),
            };
            if s.is_zero() {
                out.terms.remove(e);
            } else {
                out.terms.insert(*e, s);
            }
        }
        out
    }

    pub fn neg(&self) -> Jet2 {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Jet2 {
        if c.is_zero() {
            return Jet2::zero(self.trunc);
        }
        let mut out = Jet2::zero(self.trunc);
        for (e, a) in self.terms.iter() {
            out.terms.insert(*e, a * c);
        }
        out
    }

    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        self.check_trunc(rhs).expect("jet truncation mismatch");
        let mut out = Jet2::zero(self.trunc);
        for (ea, ca) in self.terms.iter() {
            if ea.deg > self.trunc {
                continue;
            }
            for (eb, cb) in rhs.terms.iter() {
                let deg = ea.deg + eb.deg;
                if deg > self.trunc {
                    break; // keys sorted by degree
                }
                let key = Exp2 { deg, i: ea.i + eb.i };
                let prod = ca * cb;
                let s = match out.terms.get(&key) {
                    Some(v) => v + &prod,
                    None => prod,
                };
                if s.is_zero() {
                    out.terms.remove(&key);
                } else {
                    out.terms.insert(key, s);
                }
            }
        }
        out
    }

    /// Re-truncate. Raising the degree treats absent coefficients as zero,
    /// which is only meaningful for jets that are exact polynomials.
    pub fn with_trunc(&self, trunc: u32) -> Jet2 {
        let mut out = Jet2::zero(trunc);
        for (e, c) in self.terms.iter() {
            if e.deg <= trunc {
                out.terms.insert(*e, c.clone());
            }
        }
        out
    }

    pub fn truncate(&self, trunc: u32) -> Result<Jet2> {
        if trunc > self.trunc {
            return Err(EngineError::Domain(format!(
                "cannot truncate a degree-{} jet to higher degree {}",
                self.trunc, trunc
            )));
        }
        Ok(self.with_trunc(trunc))
    }

    pub fn dx(&self) -> Jet2 {
        let mut out = Jet2::zero(self.trunc);
        for (e, c) in self.terms.iter() {
            if e.i == 0 {
                continue;
            }
            let coeff = &Scalar::from_int(e.i as i64) * c;
            out.set(e.i - 1, e.j(), coeff);
        }
        out
    }

    pub fn dy(&self) -> Jet2 {
        let mut out = Jet2::zero(self.trunc);
        for (e, c) in self.terms.iter() {
            let j = e.j();
            if j == 0 {
                continue;
            }
            let coeff = &Scalar::from_int(j as i64) * c;
            out.set(e.i, j - 1, coeff);
        }
        out
    }

    /// Substitution `f(u, v)`; `u, v` must have zero constant term.
    pub fn compose(&self, u: &Jet2, v: &Jet2) -> Result<Jet2> {
        u.check_trunc(v)?;
        if self.trunc != u.trunc {
            return Err(EngineError::TruncationMismatch(self.trunc, u.trunc));
        }
        if !u.coeff(0, 0).is_zero() || !v.coeff(0, 0).is_zero() {
            return Err(EngineError::NonzeroConstantTerm);
        }
        let n = self.trunc;
        // cache powers of u and v up to the truncation degree
        let mut upow: Vec<Jet2> = vec![Jet2::one(n)];
        let mut vpow: Vec<Jet2> = vec![Jet2::one(n)];
        for k in 1..=n as usize {
            let nu = upow[k - 1].mul(u);
            upow.push(nu);
            let nv = vpow[k - 1].mul(v);
            vpow.push(nv);
        }
        let mut out = Jet2::zero(n);
        for (e, c) in self.terms.iter() {
            let term = upow[e.i as usize].mul(&vpow[e.j() as usize]).scale(c);
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Multiplicative inverse of a jet with nonzero constant term, modulo
    /// degree `N+1` (degree-by-degree long division).
    pub fn inverse(&self) -> Result<Jet2> {
        let c0 = self.coeff(0, 0);
        if c0.is_zero() {
            return Err(EngineError::Domain(
                "jet inverse requires a nonzero constant term".into(),
            ));
        }
        let c0_inv = c0.inv()?;
        let n = self.trunc;
        // self = c0 (1 - w) with order(w) >= 1; inverse = c0^{-1} (1 + w + w^2 + ...)
        let w = Jet2::one(n).sub(&self.scale(&c0_inv));
        let mut acc = Jet2::one(n);
        let mut pow = Jet2::one(n);
        for _ in 1..=n {
            pow = pow.mul(&w);
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc.scale(&c0_inv))
    }

    /// True when the jet is a constant (only the (0,0) coefficient present).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.deg == 0)
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            if e.i > 0 {
                write!(f, "*x{}", if e.i > 1 { format!("^{}", e.i) } else { String::new() })?;
            }
            let j = e.j();
            if j > 0 {
                write!(f, "*y{}", if j > 1 { format!("^{}", j) } else { String::new() })?;
            }
        }
        Ok(())
    }
}

// --- JSON wire format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct JetTermJson {
    pub i: u32,
    pub j: u32,
    pub num: String,
    pub den: String,
}

#[derive(Serialize, Deserialize)]
pub struct JetJson {
    pub trunc: u32,
    pub terms: Vec<JetTermJson>,
}

impl Jet2 {
    pub fn to_json(&self) -> JetJson {
        JetJson {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| JetTermJson {
                    i: e.i,
                    j: e.j(),
                    num: c.numerator().to_string(),
                    den: c.denominator().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &JetJson) -> Result<Jet2> {
        let mut out = Jet2::zero(json.trunc);
        for t in &json.terms {
            let num = crate::parse::parse_tau_poly(&t.num)?;
            let den = crate::parse::parse_tau_poly(&t.den)?;
            let c = Scalar::from_parts(num, den)?;
            if t.i + t.j > json.trunc {
                return Err(EngineError::Domain(format!(
                    "term ({},{}) exceeds truncation {}",
                    t.i, t.j, json.trunc
                )));
            }
            out.set(t.i, t.j, c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: u32) -> Jet2 {
        Jet2::var_x(n)
    }
    fn y(n: u32) -> Jet2 {
        Jet2::var_y(n)
    }

    #[test]
    fn monomial_product_and_order() {
        let n = 6;
        let xy = x(n).mul(&y(n));
        assert_eq!(xy, Jet2::monomial(n, 1, 1, Scalar::one()));

        // order(x^2 y + x^5) = 3
        let j = Jet2::monomial(n, 2, 1, Scalar::one()).add(&Jet2::monomial(n, 5, 0, Scalar::one()));
        assert_eq!(j.order(), 3);
        assert_eq!(Jet2::zero(n).order(), ORDER_INFINITE);
    }

    #[test]
    fn geometric_series_inverts_one_plus_x() {
        // long-division oracle for (1+x)^{-1}: alternating signs
        let n = 8;
        let mut geo = Jet2::zero(n);
        for d in 0..=n {
            let sign = if d % 2 == 0 { 1 } else { -1 };
            geo.set(d, 0, Scalar::from_int(sign));
        }
        let one_plus_x = Jet2::one(n).add(&x(n));
        assert_eq!(one_plus_x.mul(&geo), Jet2::one(n));
        assert_eq!(one_plus_x.inverse().unwrap(), geo);
    }

    #[test]
    fn compose_binomial_and_identity() {
        let n = 6;
        let f = x(n).mul(&x(n)); // x^2
        let u = x(n).add(&y(n));
        let v = y(n);
        let got = f.compose(&u, &v).unwrap();
        let mut expect = Jet2::zero(n);
        expect.set(2, 0, Scalar::from_int(1));
        expect.set(1, 1, Scalar::from_int(2));
        expect.set(0, 2, Scalar::from_int(1));
        assert_eq!(got, expect);

        // identity substitution returns f
        let mut f2 = Jet2::zero(n);
        f2.set(3, 1, Scalar::from_ratio(2, 3));
        f2.set(0, 2, Scalar::from_int(-1));
        assert_eq!(f2.compose(&x(n), &y(n)).unwrap(), f2);
    }

    #[test]
    fn compose_matches_bruteforce_monomial_substitution() {
        // f = sum_{d<=N} x^d, u = x + x^2, v = y, N = 4
        let n = 4;
        let mut f = Jet2::zero(n);
        for d in 0..=n {
            f.set(d, 0, Scalar::one());
        }
        let u = x(n).add(&Jet2::monomial(n, 2, 0, Scalar::one()));
        let v = y(n);
        let got = f.compose(&u, &v).unwrap();
        // brute force: expand (x+x^2)^d term by term
        let mut expect = Jet2::zero(n);
        expect.set(0, 0, Scalar::one());
        let mut pw = Jet2::one(n);
        for _ in 1..=n {
            pw = pw.mul(&u);
            expect = expect.add(&pw);
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn compose_rejects_nonzero_constant_term() {
        let n = 4;
        let f = x(n);
        let u = Jet2::one(n);
        assert!(matches!(f.compose(&u, &y(n)), Err(EngineError::NonzeroConstantTerm)));
    }

    #[test]
    fn mismatched_truncation_is_usage_error() {
        let a = Jet2::var_x(4);
        let b = Jet2::var_y(5);
        assert!(a.check_trunc(&b).is_err());
    }

    #[test]
    fn json_round_trip() {
        let n = 5;
        let mut j = Jet2::zero(n);
        j.set(1, 0, Scalar::tau());
        j.set(2, 1, &Scalar::from_ratio(-1, 2) * &Scalar::i());
        j.set(0, 3, Scalar::from_parts(
            crate::scalar::TauPoly::one(),
            crate::scalar::TauPoly::tau(),
        ).unwrap());
        let text = serde_json::to_string(&j.to_json()).unwrap();
        let back: JetJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Jet2::from_json(&back).unwrap(), j);
    }
}
