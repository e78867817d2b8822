//! Group-structure diagnostics at jet level: first-integral and parallelism
//! predicates, centralizer membership checks, the commutator cascade S(j),
//! derived series evidence and the solvable normal-form criteria.
//!
//! Every predicate here is a "modulo degree N+1" statement. Reports keep the
//! distinction between vanishing that is forced by the truncation and
//! vanishing that happens while the order bounds still fit inside N.

use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::jet::{Jet2, ORDER_INFINITE};
use crate::lie::{
    bracket, commutator_diffeo, contact_order, derive, exp_field, log_diffeo, Diffeo2, VField2,
};
use crate::scalar::Scalar;

/// Nonempty list of tangent-to-identity generators sharing a truncation.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    gens: Vec<Diffeo2>,
}

impl GeneratorSet {
    pub fn new(gens: Vec<Diffeo2>) -> Result<Self> {
        if gens.is_empty() {
            return Err(EngineError::Precondition("generator set must be nonempty".into()));
        }
        let n = gens[0].trunc();
        for g in &gens {
            if g.trunc() != n {
                return Err(EngineError::TruncationMismatch(n, g.trunc()));
            }
            if !g.is_tangent_to_identity() {
                return Err(EngineError::NotTangentToIdentity);
            }
        }
        Ok(GeneratorSet { gens })
    }

    pub fn gens(&self) -> &[Diffeo2] {
        &self.gens
    }

    pub fn trunc(&self) -> u32 {
        self.gens[0].trunc()
    }
}

/// `true` iff `derive(X, h) = 0` modulo degree N+1.
pub fn is_first_integral(h: &Jet2, x: &VField2) -> bool {
    derive(x, h).is_zero()
}

/// Wedge determinant `Zx*Xy - Zy*Xx` as a jet.
pub fn wedge(z: &VField2, x: &VField2) -> Jet2 {
    z.jx.mul(&x.jy).sub(&z.jy.mul(&x.jx))
}

/// `true` iff the wedge jet vanishes modulo degree N+1. At finite truncation
/// this cannot distinguish true parallelism from a high-order wedge.
pub fn is_parallel(z: &VField2, x: &VField2) -> bool {
    wedge(z, x).is_zero()
}

/// Centralizer membership evidence for `F` against `Exp(X)` (Case 1) or the
/// two-field span of `X, Y` (Case 2).
#[derive(Debug, Serialize)]
pub struct CentralizerReport {
    /// Case 1 only: whether log F is parallel to X.
    pub parallel_to_x: Option<bool>,
    /// Whether the X-coefficient of the decomposition is a first integral of X.
    pub a_first_integral: bool,
    /// Case 2 only: whether the Y-coefficient is a first integral of X.
    pub b_first_integral: Option<bool>,
    /// Overall verdict: the generator of F has the centralizer normal form.
    pub member: bool,
}

/// Decompose `Z = log F` against `X` (and optionally `Y`) via Cramer
/// identities with cleared denominators, and test whether the coefficients
/// are first integrals of `X`.
///
/// With `w = X wedge Y`, `w1 = Z wedge Y`, `w2 = X wedge Z`, the coefficient
/// `a = w1/w` is a first integral of `X` iff
/// `w * X(w1) - w1 * X(w) = 0` (quotient rule, denominators cleared).
pub fn centralizer_form_check(
    f: &Diffeo2,
    x: &VField2,
    y: Option<&VField2>,
) -> Result<CentralizerReport> {
    if !f.is_tangent_to_identity() {
        return Err(EngineError::NotTangentToIdentity);
    }
    let z = log_diffeo(f)?;
    match y {
        Some(y) => {
            let w = wedge(x, y);
            if w.is_zero() {
                return Err(EngineError::Precondition(
                    "X and Y are everywhere parallel modulo the truncation".into(),
                ));
            }
            let w1 = wedge(&z, y);
            let w2 = wedge(x, &z);
            let a_fi = derive(x, &w1).mul(&w).sub(&derive(x, &w).mul(&w1)).is_zero();
            let b_fi = derive(x, &w2).mul(&w).sub(&derive(x, &w).mul(&w2)).is_zero();
            Ok(CentralizerReport {
                parallel_to_x: None,
                a_first_integral: a_fi,
                b_first_integral: Some(b_fi),
                member: a_fi && b_fi,
            })
        }
        None => {
            let par = is_parallel(&z, x);
            // ratio first-integral test against the lower-order nonzero component
            let (xc, zc) = if x.jx.order() <= x.jy.order() {
                (&x.jx, &z.jx)
            } else {
                (&x.jy, &z.jy)
            };
            let ratio_fi =
                derive(x, zc).mul(xc).sub(&derive(x, xc).mul(zc)).is_zero();
            Ok(CentralizerReport {
                parallel_to_x: Some(par),
                a_first_integral: ratio_fi,
                b_first_integral: None,
                member: par && ratio_fi,
            })
        }
    }
}

/// Assemble the field `a X + b Y` from jet coefficients.
pub fn decomposed_field(a: &Jet2, b: &Jet2, x: &VField2, y: &VField2) -> VField2 {
    x.scale_jet(a).add(&y.scale_jet(b))
}

#[derive(Debug, Serialize)]
pub struct ParallelCommutatorReport {
    pub commutator_parallel_to_x: bool,
    pub ratio_constant: bool,
    pub equivalent: bool,
}

/// Jet form of the parallel-commutator criterion: for
/// `F_i = Exp(a_i X + b_i Y)` the commutator generator is parallel to `X`
/// iff `b_1/b_2` is constant.
pub fn parallel_commutator_check(
    a1: &Jet2,
    b1: &Jet2,
    a2: &Jet2,
    b2: &Jet2,
    x: &VField2,
    y: &VField2,
) -> Result<ParallelCommutatorReport> {
    if !bracket(x, y).is_zero() {
        return Err(EngineError::Precondition("X and Y must commute".into()));
    }
    if is_parallel(x, y) {
        return Err(EngineError::Precondition("X and Y must not be everywhere parallel".into()));
    }
    for (name, coeff) in [("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)] {
        if !is_first_integral(coeff, x) {
            return Err(EngineError::Precondition(format!(
                "{name} is not a first integral of X"
            )));
        }
    }
    if b1.is_zero() || b2.is_zero() {
        return Err(EngineError::Precondition("b1*b2 must not vanish".into()));
    }
    let f1 = exp_field(&decomposed_field(a1, b1, x, y), &Scalar::one())?;
    let f2 = exp_field(&decomposed_field(a2, b2, x, y), &Scalar::one())?;
    let k = commutator_diffeo(&f1, &f2)?;
    let w = log_diffeo(&k)?;
    let parallel = is_parallel(&w, x);
    let ratio_constant = jet_ratio_constant(b1, b2);
    Ok(ParallelCommutatorReport {
        commutator_parallel_to_x: parallel,
        ratio_constant,
        equivalent: parallel == ratio_constant,
    })
}

/// `true` iff `b1 = c * b2` for a single scalar `c` (cross-multiplication on
/// the first nonzero coefficient of `b2`).
pub fn jet_ratio_constant(b1: &Jet2, b2: &Jet2) -> bool {
    let Some((e, lead)) = b2.iter().next().map(|(e, c)| (*e, c.clone())) else {
        return b1.is_zero();
    };
    let c = &b1.coeff(e.i(), e.j()) / &lead;
    *b1 == b2.scale(&c)
}

// --- commutator cascade S(j) -------------------------------------------------

#[derive(Debug, Serialize, Clone)]
pub struct CascadeLevelReport {
    pub level: usize,
    pub element_count: usize,
    /// Minimum contact order of the nontrivial elements (`null` if none).
    pub min_contact_order: Option<u32>,
    /// All commutators at this level are the identity modulo degree N+1.
    pub degenerate: bool,
    /// Degenerate while the r+s-1 order prediction still fits inside N,
    /// i.e. the vanishing is not explained by the truncation alone.
    pub exact: bool,
    /// Level was truncated to the configured cap.
    pub overflow: bool,
}

pub struct CommutatorCascade {
    pub levels: Vec<Vec<Diffeo2>>,
    pub reports: Vec<CascadeLevelReport>,
}

pub const DEFAULT_LEVEL_CAP: usize = 256;

/// Build the sequence `S(0) = S`, `S(j+1) = { [F1^{+-1}, F2^{+-1}] }` with
/// `F1` from `S(j)` and `F2` from `S(j) U S(j-1)`, deduplicated by canonical
/// coefficient tables. Stops early once a level degenerates.
pub fn sj_sequence(
    s: &GeneratorSet,
    max_levels: usize,
    cap: usize,
) -> Result<CommutatorCascade> {
    if max_levels == 0 {
        return Err(EngineError::Precondition("maxLevels must be positive".into()));
    }
    let n = s.trunc();
    let mut levels: Vec<Vec<Diffeo2>> = vec![s.gens().to_vec()];
    let mut reports = vec![level_report(0, &levels[0], None, false, n)];

    for j in 0..max_levels {
        let current = &levels[j];
        let previous: &[Diffeo2] = if j == 0 { &[] } else { &levels[j - 1] };
        if current.iter().all(|f| f.is_identity()) {
            break;
        }
        let mut pool: Vec<&Diffeo2> = current.iter().collect();
        pool.extend(previous.iter());

        let mut next: Vec<Diffeo2> = Vec::new();
        let mut predicted_min: Option<u32> = None;
        let mut overflow = false;
        'outer: for f1 in current {
            if f1.is_identity() {
                continue;
            }
            for f2 in &pool {
                if f2.is_identity() {
                    continue;
                }
                let r = contact_order(f1);
                let s2 = contact_order(f2);
                if r != ORDER_INFINITE && s2 != ORDER_INFINITE {
                    let p = r + s2 - 1;
                    predicted_min = Some(predicted_min.map_or(p, |q| q.min(p)));
                }
                for (inv1, inv2) in [(false, false), (false, true), (true, false), (true, true)] {
                    let a = if inv1 { crate::lie::invert_diffeo(f1)? } else { (*f1).clone() };
                    let b = if inv2 { crate::lie::invert_diffeo(f2)? } else { (*f2).clone() };
                    let k = commutator_diffeo(&a, &b)?;
                    if k.is_identity() || next.contains(&k) {
                        continue;
                    }
                    if next.len() >= cap {
                        overflow = true;
                        break 'outer;
                    }
                    next.push(k);
                }
            }
        }
        reports.push(level_report(j + 1, &next, predicted_min, overflow, n));
        let degenerate = next.is_empty();
        levels.push(next);
        if degenerate {
            break;
        }
    }
    Ok(CommutatorCascade { levels, reports })
}

fn level_report(
    level: usize,
    elems: &[Diffeo2],
    predicted_min: Option<u32>,
    overflow: bool,
    trunc: u32,
) -> CascadeLevelReport {
    let nontrivial: Vec<&Diffeo2> = elems.iter().filter(|f| !f.is_identity()).collect();
    let min_order = nontrivial.iter().map(|f| contact_order(f)).min();
    let degenerate = nontrivial.is_empty() && level > 0;
    let exact = degenerate && predicted_min.map(|p| p <= trunc).unwrap_or(false);
    CascadeLevelReport {
        level,
        element_count: elems.len(),
        min_contact_order: min_order,
        degenerate,
        exact,
        overflow,
    }
}

// --- derived series and normal form ------------------------------------------

#[derive(Debug, Serialize)]
pub struct DerivedLevelReport {
    pub depth: usize,
    pub element_count: usize,
    pub abelian: bool,
}

/// Jet evidence for the derived series: level `k+1` is the set of pairwise
/// commutators of level `k`, deduplicated, identities dropped.
pub fn derived_series_jet(s: &GeneratorSet, depth: usize) -> Result<Vec<DerivedLevelReport>> {
    let mut level: Vec<Diffeo2> = s.gens().to_vec();
    let mut out = Vec::new();
    for d in 0..=depth {
        let abelian = pairwise_abelian(&level)?;
        out.push(DerivedLevelReport { depth: d, element_count: level.len(), abelian });
        if d == depth || level.is_empty() {
            break;
        }
        let mut next: Vec<Diffeo2> = Vec::new();
        for (i, f) in level.iter().enumerate() {
            for g in level.iter().skip(i + 1) {
                let k = commutator_diffeo(f, g)?;
                if !k.is_identity() && !next.contains(&k) {
                    next.push(k);
                }
            }
        }
        level = next;
    }
    Ok(out)
}

fn pairwise_abelian(elems: &[Diffeo2]) -> Result<bool> {
    for (i, f) in elems.iter().enumerate() {
        for g in elems.iter().skip(i + 1) {
            if !commutator_diffeo(f, g)?.is_identity() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Normal-form generator data `(a_i, alpha_i)` over a shared `(X, Y, fbar)`:
/// the infinitesimal generator is `a_i X + alpha_i fbar Y`.
#[derive(Clone, Debug)]
pub struct NormalFormGen {
    pub a: Jet2,
    pub alpha: Scalar,
}

impl NormalFormGen {
    pub fn field(&self, x: &VField2, y: &VField2, fbar: &Jet2) -> VField2 {
        let b = fbar.scale(&self.alpha);
        decomposed_field(&self.a, &b, x, y)
    }
}

/// Bracket of two normal-form generators by the closed formula
/// `fbar * (d(alpha_j a_i - alpha_i a_j)/dY) X` (in the engine's bracket
/// orientation), cross-checked against the assembled-field bracket.
pub fn normal_form_bracket(
    gi: &NormalFormGen,
    gj: &NormalFormGen,
    x: &VField2,
    y: &VField2,
    fbar: &Jet2,
) -> Result<(VField2, VField2)> {
    let mix = gi.a.scale(&gj.alpha).sub(&gj.a.scale(&gi.alpha));
    let dmix = derive(y, &mix);
    let formula = x.scale_jet(&fbar.mul(&dmix));
    let assembled = bracket(&gi.field(x, y, fbar), &gj.field(x, y, fbar));
    Ok((formula, assembled))
}

#[derive(Debug, Serialize)]
pub struct CommutingCriterionReport {
    pub mix_constant: bool,
    pub commutator_identity: bool,
    pub equivalent: bool,
}

/// Commuting criterion for normal-form generators: `alpha_i a_j - alpha_j a_i`
/// constant iff the exponentials commute modulo degree N+1.
pub fn commuting_criterion(
    gi: &NormalFormGen,
    gj: &NormalFormGen,
    x: &VField2,
    y: &VField2,
    fbar: &Jet2,
) -> Result<CommutingCriterionReport> {
    let mix = gj.a.scale(&gi.alpha).sub(&gi.a.scale(&gj.alpha));
    let mix_constant = mix.is_constant();
    let fi = exp_field(&gi.field(x, y, fbar), &Scalar::one())?;
    let fj = exp_field(&gj.field(x, y, fbar), &Scalar::one())?;
    let commutator_identity = commutator_diffeo(&fi, &fj)?.is_identity();
    Ok(CommutingCriterionReport {
        mix_constant,
        commutator_identity,
        equivalent: mix_constant == commutator_identity,
    })
}

// --- model commuting pair ------------------------------------------------------

/// `u = xy`, shared first integral of the model pair.
pub fn model_u(trunc: u32) -> Jet2 {
    Jet2::monomial(trunc, 1, 1, Scalar::one())
}

/// `X = x^2 d/dx - xy d/dy`; order 2, first integral `xy`.
pub fn model_x(trunc: u32) -> VField2 {
    VField2::new(
        Jet2::monomial(trunc, 2, 0, Scalar::one()),
        Jet2::monomial(trunc, 1, 1, Scalar::one()).neg(),
    )
    .unwrap()
}

/// `Y = y d/dy`; commutes with `model_x` and is not everywhere parallel to
/// it. Linear, so it is never exponentiated on its own; it only enters
/// through combinations `a X + b Y` of order at least 2.
pub fn model_y(trunc: u32) -> VField2 {
    VField2::new(Jet2::zero(trunc), Jet2::monomial(trunc, 0, 1, Scalar::one())).unwrap()
}
