//! Polynomials in `x, y, z` with `Scalar` coefficients. The `z`-degree of a
//! term becomes an integer frequency after the substitution `z = e^{tau t}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::jet::Jet2;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Debug, Default)]
pub struct PolyXYZ {
    terms: BTreeMap<(u32, u32, u32), Scalar>,
}

impl PolyXYZ {
    pub fn zero() -> Self {
        PolyXYZ::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = PolyXYZ::zero();
        p.set(0, 0, 0, c);
        p
    }

    pub fn var(ix: usize) -> Self {
        let mut p = PolyXYZ::zero();
        let key = match ix {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            _ => (0, 0, 1),
        };
        p.set(key.0, key.1, key.2, Scalar::one());
        p
    }

    pub fn set(&mut self, i: u32, j: u32, k: u32, c: Scalar) {
        if c.is_zero() {
            self.terms.remove(&(i, j, k));
        } else {
            self.terms.insert((i, j, k), c);
        }
    }

    pub fn coeff(&self, i: u32, j: u32, k: u32) -> Scalar {
        self.terms.get(&(i, j, k)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| *k == (0, 0, 0))
    }

    pub fn add(&self, rhs: &PolyXYZ) -> PolyXYZ {
        let mut out = self.clone();
        for (k, c) in rhs.terms.iter() {
            let s = match out.terms.get(k) {
                Some(a) => a + c,
                None => c.clone(),
            };
            out.set(k.0, k.1, k.2, s);
        }
        out
    }

    pub fn neg(&self) -> PolyXYZ {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn sub(&self, rhs: &PolyXYZ) -> PolyXYZ {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &PolyXYZ) -> PolyXYZ {
        let mut out = PolyXYZ::zero();
        for (ka, ca) in self.terms.iter() {
            for (kb, cb) in rhs.terms.iter() {
                let key = (ka.0 + kb.0, ka.1 + kb.1, ka.2 + kb.2);
                let prod = ca * cb;
                let s = match out.terms.get(&key) {
                    Some(v) => v + &prod,
                    None => prod,
                };
                out.set(key.0, key.1, key.2, s);
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> PolyXYZ {
        let mut out = PolyXYZ::zero();
        for (k, a) in self.terms.iter() {
            out.set(k.0, k.1, k.2, a * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> PolyXYZ {
        let mut acc = PolyXYZ::constant(Scalar::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Drop the `z` variable (requires the polynomial to be `z`-free) and
    /// truncate into a `Jet2`.
    pub fn to_jet(&self, trunc: u32) -> Option<Jet2> {
        let mut out = Jet2::zero(trunc);
        for (k, c) in self.terms.iter() {
            if k.2 != 0 {
                return None;
            }
            if k.0 + k.1 <= trunc {
                out.set(k.0, k.1, c.clone());
            }
        }
        Some(out)
    }
}

impl fmt::Display for PolyXYZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j, k), c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (e, v) in [(i, "x"), (j, "y"), (k, "z")] {
                match e {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
