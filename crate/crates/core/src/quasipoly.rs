//! Quasi-polynomials `sum_k p_k(t) e^{k tau t}` with polynomial parts over the
//! exact scalar field, and the linear ODE solver `q' = mu q + forcing` used by
//! the holonomy coefficient recursion. `tau` stands for `2 pi i`, so
//! `e^{k tau}` evaluates to 1 at `t = 1` for every integer frequency `k`.

use std::collections::BTreeMap;

use crate::error::{EngineError, Result};
use crate::scalar::Scalar;

/// Dense polynomial in `t` with `Scalar` coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPoly(Vec<Scalar>);

impl TPoly {
    pub fn zero() -> Self {
        TPoly(Vec::new())
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = TPoly(vec![c]);
        p.normalize();
        p
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mut p = TPoly(coeffs);
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.0.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) + &other.coeff(k));
        }
        TPoly::from_coeffs(out)
    }

    pub fn neg(&self) -> TPoly {
        TPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &TPoly) -> TPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> TPoly {
        TPoly::from_coeffs(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &TPoly) -> TPoly {
        if self.is_zero() || other.is_zero() {
            return TPoly::zero();
        }
        let mut out = vec![Scalar::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        TPoly::from_coeffs(out)
    }

    pub fn derivative(&self) -> TPoly {
        let mut out = Vec::new();
        for (k, c) in self.0.iter().enumerate().skip(1) {
            out.push(c * &Scalar::from_int(k as i64));
        }
        TPoly::from_coeffs(out)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> TPoly {
        let mut out = vec![Scalar::zero()];
        for (k, c) in self.0.iter().enumerate() {
            out.push(c * &Scalar::from_ratio(1, (k + 1) as i64));
        }
        TPoly::from_coeffs(out)
    }

    /// Exact evaluation at `t = 1`: the coefficient sum.
    pub fn eval_at_one(&self) -> Scalar {
        self.0.iter().fold(Scalar::zero(), |acc, c| &acc + c)
    }

    pub fn eval_at_zero(&self) -> Scalar {
        self.coeff(0)
    }
}

/// `sum_k p_k(t) e^{k tau t}`, keyed by the integer frequency `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPoly {
    terms: BTreeMap<i64, TPoly>,
}

impl QuasiPoly {
    pub fn zero() -> Self {
        QuasiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(0, TPoly::constant(c))
    }

    pub fn term(freq: i64, poly: TPoly) -> Self {
        let mut q = QuasiPoly::zero();
        q.set(freq, poly);
        q
    }

    /// `e^{k tau t}` for a single frequency.
    pub fn exponential(freq: i64) -> Self {
        Self::term(freq, TPoly::constant(Scalar::one()))
    }

    pub fn set(&mut self, freq: i64, poly: TPoly) {
        if poly.is_zero() {
            self.terms.remove(&freq);
        } else {
            self.terms.insert(freq, poly);
        }
    }

    pub fn poly(&self, freq: i64) -> TPoly {
        self.terms.get(&freq).cloned().unwrap_or_else(TPoly::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &TPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &QuasiPoly) -> QuasiPoly {
        let mut out = self.clone();
        for (k, p) in &other.terms {
            out.set(*k, out.poly(*k).add(p));
        }
        out
    }

    pub fn neg(&self) -> QuasiPoly {
        QuasiPoly { terms: self.terms.iter().map(|(k, p)| (*k, p.neg())).collect() }
    }

    pub fn sub(&self, other: &QuasiPoly) -> QuasiPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> QuasiPoly {
        let mut out = QuasiPoly::zero();
        for (k, p) in &self.terms {
            out.set(*k, p.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &QuasiPoly) -> QuasiPoly {
        let mut out = QuasiPoly::zero();
        for (k1, p1) in &self.terms {
            for (k2, p2) in &other.terms {
                let k = k1 + k2;
                out.set(k, out.poly(k).add(&p1.mul(p2)));
            }
        }
        out
    }

    /// `d/dt`, using `(p e^{k tau t})' = (p' + k tau p) e^{k tau t}`.
    pub fn derivative(&self) -> QuasiPoly {
        let mut out = QuasiPoly::zero();
        for (k, p) in &self.terms {
            let lam = &Scalar::tau() * &Scalar::from_int(*k);
            out.set(*k, p.derivative().add(&p.scale(&lam)));
        }
        out
    }

    /// Exact value at `t = 1`; every `e^{k tau}` is 1.
    pub fn eval_at_one(&self) -> Scalar {
        self.terms.values().fold(Scalar::zero(), |acc, p| &acc + &p.eval_at_one())
    }

    pub fn eval_at_zero(&self) -> Scalar {
        self.terms.values().fold(Scalar::zero(), |acc, p| &acc + &p.eval_at_zero())
    }

    /// Numeric evaluation at real `t` (substituting `tau -> 2 pi i`).
    pub fn eval_numeric(&self, t: f64) -> crate::scalar::Complex64 {
        use crate::scalar::Complex64;
        let tau = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in &self.terms {
            let mut pv = Complex64::new(0.0, 0.0);
            for c in p.coeffs().iter().rev() {
                pv = pv * t + c.eval();
            }
            acc += pv * (tau * (*k as f64) * t).exp();
        }
        acc
    }
}

/// Solve `q'(t) = mu q(t) + forcing(t)` with `mu = mu_freq * tau` and
/// `q(0) = initial`, exactly in the quasi-polynomial class.
///
/// For a forcing term `p(t) e^{k tau t}`:
/// * `k != mu_freq` (non-resonant): particular solution `r(t) e^{k tau t}`
///   with `r` obtained by the top-down recursion
///   `r_j = (p_j - (j+1) r_{j+1}) / ((k - mu_freq) tau)`;
/// * `k == mu_freq` (resonant): particular solution
///   `P(t) e^{k tau t}` with `P` the antiderivative of `p`, which raises
///   the polynomial degree by one.
///
/// The homogeneous part `c e^{mu t}` is fixed by the initial value. The
/// returned solution is re-checked by differentiation.
pub fn qp_solve_linear(mu_freq: i64, forcing: &QuasiPoly, initial: &Scalar) -> Result<QuasiPoly> {
    let tau = Scalar::tau();
    let mut sol = QuasiPoly::zero();
    for (k, p) in forcing.iter() {
        if *k == mu_freq {
            sol.set(*k, sol.poly(*k).add(&p.antiderivative()));
        } else {
            let lam = &tau * &Scalar::from_int(k - mu_freq);
            let deg = p.degree().unwrap_or(0);
            let mut r = vec![Scalar::zero(); deg + 1];
            for j in (0..=deg).rev() {
                let carry = if j + 1 <= deg {
                    &r[j + 1] * &Scalar::from_int((j + 1) as i64)
                } else {
                    Scalar::zero()
                };
                r[j] = &(&p.coeff(j) - &carry) / &lam;
            }
            sol.set(*k, sol.poly(*k).add(&TPoly::from_coeffs(r)));
        }
    }
    // homogeneous correction to meet the initial condition
    let defect = initial - &sol.eval_at_zero();
    if !defect.is_zero() {
        sol.set(mu_freq, sol.poly(mu_freq).add(&TPoly::constant(defect)));
    }

    // residual check: q' - mu q - forcing must vanish identically
    let mu = &tau * &Scalar::from_int(mu_freq);
    let residual = sol.derivative().sub(&sol.scale(&mu)).sub(forcing);
    if !residual.is_zero() {
        return Err(EngineError::Domain("quasi-polynomial ODE residual is nonzero".into()));
    }
    Ok(sol)
}
