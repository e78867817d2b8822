//! Floating-point orbit experiments for the explicit model maps: iteration
//! with escape/period bookkeeping, ball classification into P/F/I evidence
//! classes, invariant-circle detection for the resonant family, and the
//! small-perturbation commutator estimates.
//!
//! Everything here is numeric evidence with explicit budgets and tolerances;
//! no label emitted by this module is a proof.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::scalar::Complex64;

/// Norm on C^2 used throughout: `sqrt(|x|^2 + |y|^2)`.
pub fn norm2(p: (Complex64, Complex64)) -> f64 {
    (p.0.norm_sqr() + p.1.norm_sqr()).sqrt()
}

fn dist2(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    norm2((a.0 - b.0, a.1 - b.1))
}

/// Evaluate a one-variable polynomial (coefficients lowest-degree first).
fn poly_eval(f: &[Complex64], u: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in f.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

/// Bivariate polynomial with complex-double coefficients, terms stored as
/// `(i, j, c)` for `c x^i y^j`.
#[derive(Clone, Debug)]
pub struct CPoly2 {
    pub terms: Vec<(u32, u32, Complex64)>,
}

impl CPoly2 {
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(i, j, c) in &self.terms {
            acc += c * x.powu(i) * y.powu(j);
        }
        acc
    }

    fn deriv_x(&self) -> CPoly2 {
        CPoly2 {
            terms: self
                .terms
                .iter()
                .filter(|t| t.0 > 0)
                .map(|&(i, j, c)| (i - 1, j, c * i as f64))
                .collect(),
        }
    }

    fn deriv_y(&self) -> CPoly2 {
        CPoly2 {
            terms: self
                .terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(i, j, c)| (i, j - 1, c * j as f64))
                .collect(),
        }
    }
}

/// The simulated map families.
#[derive(Clone, Debug)]
pub enum MapSpec {
    /// `(x + x^2 y, y (1 + x y)^{-2})`.
    SaddleNode,
    /// `(x (1 + u f(u)), y (1 + u f(u))^{-1})` with `u = x y`; `f` is a
    /// finite polynomial with `f(0) != 0`.
    FamilyF { f: Vec<Complex64> },
    /// Same shape with `u = x^2 y`.
    FamilyH { f: Vec<Complex64> },
    /// Arbitrary polynomial components, inverted by Newton iteration.
    GeneralPoly { fx: CPoly2, fy: CPoly2 },
}

/// Flagged when an inverse-branch denominator comes within `POLE_TOL` of 0.
pub const POLE_TOL: f64 = 1e-12;
const NEWTON_TOL: f64 = 1e-12;
const PERIOD_TOL: f64 = 1e-10;

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MapSpec::FamilyF { f } | MapSpec::FamilyH { f } => {
                if f.first().map(|c| c.norm() == 0.0).unwrap_or(true) {
                    return Err(EngineError::Precondition(
                        "family series must satisfy f(0) != 0".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// One forward step. `Err` only for a true pole of the formula.
    pub fn apply(&self, p: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
        let (x, y) = p;
        match self {
            MapSpec::SaddleNode => {
                let d = Complex64::new(1.0, 0.0) + x * y;
                if d.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 + xy ~ 0".into()));
                }
                Ok((x + x * x * y, y / (d * d)))
            }
            MapSpec::FamilyF { f } => {
                let u = x * y;
                let m = Complex64::new(1.0, 0.0) + u * poly_eval(f, u);
                if m.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 + u f(u) ~ 0".into()));
                }
                Ok((x * m, y / m))
            }
            MapSpec::FamilyH { f } => {
                let u = x * x * y;
                let m = Complex64::new(1.0, 0.0) + u * poly_eval(f, u);
                if m.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 + u f(u) ~ 0".into()));
                }
                Ok((x * m, y / m))
            }
            MapSpec::GeneralPoly { fx, fy } => Ok((fx.eval(x, y), fy.eval(x, y))),
        }
    }

    /// One backward step: closed forms for the named families, Newton with
    /// residual target 1e-12 for `GeneralPoly`.
    pub fn apply_inverse(&self, p: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
        let (x, y) = p;
        let one = Complex64::new(1.0, 0.0);
        match self {
            MapSpec::SaddleNode => {
                // (X, Y) = (x + x^2 y, y/(1+xy)^2) has XY = xy(1+xy)^{-1},
                // so 1 + xy = 1/(1 - XY) and x = X (1 - XY).
                let d = one - x * y;
                if d.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 - XY ~ 0".into()));
                }
                Ok((x * d, y / (d * d)))
            }
            MapSpec::FamilyF { f } => {
                // xy is exactly invariant, so the multiplier is recomputed
                // from u = XY directly
                let u = x * y;
                let m = one + u * poly_eval(f, u);
                if m.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 + u f(u) ~ 0".into()));
                }
                Ok((x / m, y * m))
            }
            MapSpec::FamilyH { f } => {
                // w = X^2 Y = u (1 + u f(u)); solve for u by 1-D Newton
                let w = x * x * y;
                let mut u = w;
                for _ in 0..60 {
                    let fu = poly_eval(f, u);
                    let g = u * (one + u * fu) - w;
                    if g.norm() < NEWTON_TOL {
                        break;
                    }
                    // g'(u) = 1 + 2 u f(u) + u^2 f'(u)
                    let mut fpu = Complex64::new(0.0, 0.0);
                    for (k, c) in f.iter().enumerate().skip(1) {
                        fpu += c * (k as f64) * u.powu(k as u32 - 1);
                    }
                    let gp = one + u * fu * 2.0 + u * u * fpu;
                    if gp.norm() < POLE_TOL {
                        return Err(EngineError::Domain("singular Newton step".into()));
                    }
                    u -= g / gp;
                }
                let m = one + u * poly_eval(f, u);
                if m.norm() < POLE_TOL {
                    return Err(EngineError::Domain("pole: 1 + u f(u) ~ 0".into()));
                }
                Ok((x / m, y * m))
            }
            MapSpec::GeneralPoly { fx, fy } => {
                let (dxx, dxy) = (fx.deriv_x(), fx.deriv_y());
                let (dyx, dyy) = (fy.deriv_x(), fy.deriv_y());
                let mut q = (x, y);
                for _ in 0..80 {
                    let rx = fx.eval(q.0, q.1) - x;
                    let ry = fy.eval(q.0, q.1) - y;
                    if (rx.norm_sqr() + ry.norm_sqr()).sqrt() < NEWTON_TOL {
                        return Ok(q);
                    }
                    let a = dxx.eval(q.0, q.1);
                    let b = dxy.eval(q.0, q.1);
                    let c = dyx.eval(q.0, q.1);
                    let d = dyy.eval(q.0, q.1);
                    let det = a * d - b * c;
                    if det.norm() < POLE_TOL {
                        return Err(EngineError::Domain("singular Jacobian in Newton inversion".into()));
                    }
                    q = (q.0 - (d * rx - b * ry) / det, q.1 - (a * ry - c * rx) / det);
                }
                let rx = fx.eval(q.0, q.1) - x;
                let ry = fy.eval(q.0, q.1) - y;
                if (rx.norm_sqr() + ry.norm_sqr()).sqrt() < NEWTON_TOL {
                    Ok(q)
                } else {
                    Err(EngineError::Domain("Newton inversion did not reach 1e-12".into()))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitStatus {
    EscapedForward,
    EscapedBackward,
    EscapedBoth,
    PeriodDetected(usize),
    BudgetExhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub seed: (f64, f64, f64, f64),
    pub status: OrbitStatus,
    /// Iterates inside the ball; the escaping iterate itself is not stored.
    pub mu_forward: usize,
    pub mu_backward: usize,
    pub period: Option<usize>,
    pub pole: bool,
    /// SaddleNode only: closed-form `x_n = x0 + n x0^2 y0` held at every
    /// forward step to 1e-9 relative accuracy.
    pub closed_form_ok: Option<bool>,
    #[serde(skip)]
    pub forward_points: Vec<(Complex64, Complex64)>,
    #[serde(skip)]
    pub backward_points: Vec<(Complex64, Complex64)>,
}

fn seed_tuple(p: (Complex64, Complex64)) -> (f64, f64, f64, f64) {
    (p.0.re, p.0.im, p.1.re, p.1.im)
}

/// Iterate forward and backward within the ball of radius `rho`, reporting
/// escape, a detected period (return within 1e-10 of the seed, period at
/// most `max_iter / 2`), or budget exhaustion.
pub fn iterate_orbit(
    m: &MapSpec,
    p0: (Complex64, Complex64),
    rho: f64,
    max_iter: usize,
) -> Result<OrbitRecord> {
    m.validate()?;
    if max_iter < 1 {
        return Err(EngineError::Precondition("maxIter must be at least 1".into()));
    }
    if norm2(p0) > rho {
        return Err(EngineError::Precondition("seed lies outside the ball".into()));
    }
    let mut pole = false;
    let mut period = None;

    let mut forward = vec![p0];
    let mut escaped_fwd = false;
    let mut closed_form_ok = matches!(m, MapSpec::SaddleNode).then_some(true);
    let mut p = p0;
    for n in 1..=max_iter {
        match m.apply(p) {
            Ok(q) => p = q,
            Err(_) => {
                pole = true;
                break;
            }
        }
        if norm2(p) > rho {
            escaped_fwd = true;
            break;
        }
        if let MapSpec::SaddleNode = m {
            let expect = p0.0 + p0.0 * p0.0 * p0.1 * (n as f64);
            let scale = expect.norm().max(1e-300);
            if (p.0 - expect).norm() / scale > 1e-9 {
                closed_form_ok = Some(false);
            }
        }
        forward.push(p);
        if n <= max_iter / 2 && dist2(p, p0) < PERIOD_TOL {
            period = Some(n);
            break;
        }
    }

    let mut backward = Vec::new();
    let mut escaped_bwd = false;
    if period.is_none() {
        let mut p = p0;
        for _ in 1..=max_iter {
            match m.apply_inverse(p) {
                Ok(q) => p = q,
                Err(_) => {
                    pole = true;
                    break;
                }
            }
            if norm2(p) > rho {
                escaped_bwd = true;
                break;
            }
            backward.push(p);
        }
    }

    let status = match (period, escaped_fwd, escaped_bwd) {
        (Some(k), _, _) => OrbitStatus::PeriodDetected(k),
        (None, true, true) => OrbitStatus::EscapedBoth,
        (None, true, false) => OrbitStatus::EscapedForward,
        (None, false, true) => OrbitStatus::EscapedBackward,
        (None, false, false) => OrbitStatus::BudgetExhausted,
    };
    Ok(OrbitRecord {
        seed: seed_tuple(p0),
        status,
        mu_forward: forward.len() - 1,
        mu_backward: backward.len(),
        period,
        pole,
        closed_form_ok,
        forward_points: forward,
        backward_points: backward,
    })
}

#[derive(Debug, Serialize)]
pub struct BallClassification {
    pub rho: f64,
    pub grid: usize,
    pub max_iter: usize,
    pub p_count: usize,
    pub f_count: usize,
    pub i_candidate_count: usize,
    pub p_points: Vec<(f64, f64, f64, f64)>,
    pub i_candidates: Vec<(f64, f64, f64, f64)>,
}

/// Polar-product sample grid avoiding the (invariant, degenerate) axes by a
/// 1e-3 margin. Radii stay in `[max(1e-3, rho/8), rho/sqrt(2)]`: tiny radii
/// are excluded because escape times of the model maps blow up like
/// `|x|^{-2}|y|^{-1}` near the axes and would turn the whole budget into
/// I-candidates that are artifacts of the sampling, not of the dynamics.
pub fn sample_grid(rho: f64, grid: usize) -> Vec<(Complex64, Complex64)> {
    let r_min = (rho / 8.0).max(1e-3);
    let r_max = rho / 2f64.sqrt();
    let mut pts = Vec::with_capacity(grid * grid);
    for k1 in 0..grid {
        for k2 in 0..grid {
            let t = (k1 * grid + k2) as f64 / (grid * grid) as f64;
            let r = r_min + (r_max - r_min) * t;
            let th1 = 2.0 * std::f64::consts::PI * (k1 as f64 + 0.5) / grid as f64;
            let th2 = 2.0 * std::f64::consts::PI * (k2 as f64 + 0.5) / grid as f64;
            pts.push((
                Complex64::from_polar(r, th1),
                Complex64::from_polar(r, th2),
            ));
        }
    }
    pts
}

/// Classify every grid point: P if a period is detected, F if the orbit
/// leaves the ball in finite time in at least one direction, I-candidate if
/// both directions exhaust the budget inside the ball. The three classes
/// partition the grid by construction; I-candidate is budget-relative
/// evidence only.
pub fn classify_ball(
    m: &MapSpec,
    rho: f64,
    grid: usize,
    max_iter: usize,
) -> Result<BallClassification> {
    if grid < 2 {
        return Err(EngineError::Precondition("grid must be at least 2".into()));
    }
    let mut out = BallClassification {
        rho,
        grid,
        max_iter,
        p_count: 0,
        f_count: 0,
        i_candidate_count: 0,
        p_points: Vec::new(),
        i_candidates: Vec::new(),
    };
    for p0 in sample_grid(rho, grid) {
        let rec = iterate_orbit(m, p0, rho, max_iter)?;
        match rec.status {
            OrbitStatus::PeriodDetected(_) => {
                out.p_count += 1;
                out.p_points.push(rec.seed);
            }
            OrbitStatus::EscapedBoth
            | OrbitStatus::EscapedForward
            | OrbitStatus::EscapedBackward => out.f_count += 1,
            _ => {
                out.i_candidate_count += 1;
                out.i_candidates.push(rec.seed);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CircleHit {
    pub c: (f64, f64),
    /// `|1 + C f(C)|` at the root (should be 1 up to the bisection tolerance).
    pub modulus: f64,
    /// Max deviation of the per-step multiplier modulus from its initial
    ///  value over 10^4 iterations on the curve `xy = C`.
    pub drift: f64,
}

/// Scan rays for solutions of `|1 + C f(C)| = 1` with `C` in the given
/// radius range, then verify multiplier constancy along the orbit.
pub fn invariant_circle_scan(
    f: &[Complex64],
    r_min: f64,
    r_max: f64,
    rays: usize,
) -> Result<Vec<CircleHit>> {
    if f.first().map(|c| c.norm() == 0.0).unwrap_or(true) {
        return Err(EngineError::Precondition("f(0) must be nonzero".into()));
    }
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(EngineError::Precondition("need 0 < rMin < rMax".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let g = |c: Complex64| (one + c * poly_eval(f, c)).norm() - 1.0;
    let mut hits = Vec::new();
    for k in 0..rays {
        let th = 2.0 * std::f64::consts::PI * k as f64 / rays as f64;
        let dir = Complex64::from_polar(1.0, th);
        // bracket sign changes on a fine subdivision of the ray
        const STEPS: usize = 512;
        let mut prev_s = r_min;
        let mut prev_v = g(dir * r_min);
        for i in 1..=STEPS {
            let s = r_min + (r_max - r_min) * i as f64 / STEPS as f64;
            let v = g(dir * s);
            if prev_v == 0.0 || prev_v * v < 0.0 {
                // bisect
                let (mut lo, mut hi) = (prev_s, s);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if g(dir * lo) * g(dir * mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let c = dir * (0.5 * (lo + hi));
                let mult = one + c * poly_eval(f, c);
                // orbit on xy = C: multiplier is exactly constant, so the
                // modulus drift measures pure floating-point accumulation
                let x0 = Complex64::new(0.3, 0.0);
                let y0 = c / x0;
                let fam = MapSpec::FamilyF { f: f.to_vec() };
                let mut p = (x0, y0);
                let mut drift: f64 = 0.0;
                for _ in 0..10_000 {
                    let q = fam.apply(p)?;
                    let mu = q.0 / p.0;
                    drift = drift.max((mu.norm() - mult.norm()).abs());
                    p = q;
                }
                hits.push(CircleHit { c: (c.re, c.im), modulus: mult.norm(), drift });
            }
            prev_s = s;
            prev_v = v;
        }
    }
    Ok(hits)
}

// --- small-commutator estimates -------------------------------------------------

/// Deterministically sample `n` points of the closed ball of radius `r`.
pub fn sample_ball(r: f64, n: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let s = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if s > 1.0 || s == 0.0 {
            continue;
        }
        out.push((Complex64::new(v[0] * r, v[1] * r), Complex64::new(v[2] * r, v[3] * r)));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    /// Sampled sup of `||F_i^{+-1} - id||` on the r-ball, order F1, F1^{-1}, F2, F2^{-1}.
    pub sups: [f64; 4],
    pub precondition_ok: bool,
    /// Which map/sign violated the delta/4 bound, if any.
    pub violator: Option<String>,
    pub bound: f64,
    pub worst_commutator_distance: f64,
    pub worst_ratio: f64,
    pub inequality_ok: bool,
}

/// Sampled check of the small-commutator estimate: if both maps and their
/// inverses stay `delta/4`-close to the identity on the `r`-ball, the
/// commutator on the shrunk ball of radius `r - 4 delta - tau` satisfies
/// `||[F1,F2](z) - z|| <= (2/tau) sup||F1 - id|| sup||F2 - id||`.
pub fn commutator_estimate_check(
    f1: &MapSpec,
    f2: &MapSpec,
    r: f64,
    delta: f64,
    tau: f64,
    samples: usize,
) -> Result<EstimateReport> {
    if !(tau > 0.0 && tau <= 2.0 * delta) {
        return Err(EngineError::Precondition("need 0 < tau <= 2 delta".into()));
    }
    let pts = sample_ball(r, samples, 0xD15C);
    let mut sups = [0.0f64; 4];
    let mut violator = None;
    for (idx, (map, inv, name)) in [
        (f1, false, "F1"),
        (f1, true, "F1^{-1}"),
        (f2, false, "F2"),
        (f2, true, "F2^{-1}"),
    ]
    .into_iter()
    .enumerate()
    {
        for &p in &pts {
            let q = if inv { map.apply_inverse(p)? } else { map.apply(p)? };
            sups[idx] = sups[idx].max(dist2(q, p));
        }
        if sups[idx] > delta / 4.0 && violator.is_none() {
            violator = Some(name.to_string());
        }
    }
    let precondition_ok = violator.is_none();

    let sup1 = sups[0].max(sups[1]);
    let sup2 = sups[2].max(sups[3]);
    let bound = 2.0 / tau * sup1 * sup2;
    let r_inner = r - 4.0 * delta - tau;
    let mut worst = 0.0f64;
    if r_inner > 0.0 {
        for p in sample_ball(r_inner, samples, 0xC0917) {
            // group commutator F1 . F2 . F1^{-1} . F2^{-1}
            let q = f2.apply_inverse(p)?;
            let q = f1.apply_inverse(q)?;
            let q = f2.apply(q)?;
            let q = f1.apply(q)?;
            worst = worst.max(dist2(q, p));
        }
    }
    let worst_ratio = if bound > 0.0 { worst / bound } else if worst == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(EstimateReport {
        sups,
        precondition_ok,
        violator,
        bound,
        worst_commutator_distance: worst,
        worst_ratio,
        inequality_ok: worst <= bound + 1e-12,
    })
}

// --- cascade of iterated commutators -------------------------------------------

/// Word in the free group over the two base maps; letters are `+-1` for the
/// first generator and `+-2` for the second.
pub type Word = Vec<i8>;

fn word_inverse(w: &Word) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

fn word_commutator(a: &Word, b: &Word) -> Word {
    let mut out = Vec::with_capacity(2 * (a.len() + b.len()));
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.extend(word_inverse(a));
    out.extend(word_inverse(b));
    // free reduction
    let mut red: Word = Vec::with_capacity(out.len());
    for l in out {
        if red.last().map(|&p| p == -l).unwrap_or(false) {
            red.pop();
        } else {
            red.push(l);
        }
    }
    red
}

fn apply_word(
    w: &Word,
    f1: &MapSpec,
    f2: &MapSpec,
    p: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    // rightmost letter acts first
    let mut q = p;
    for &l in w.iter().rev() {
        q = match l {
            1 => f1.apply(q)?,
            -1 => f1.apply_inverse(q)?,
            2 => f2.apply(q)?,
            -2 => f2.apply_inverse(q)?,
            _ => unreachable!(),
        };
    }
    Ok(q)
}

#[derive(Debug, Serialize)]
pub struct CascadeLevelEstimate {
    pub level: usize,
    pub element_count: usize,
    pub capped: bool,
    pub sup_distance: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct CascadeEstimateReport {
    pub delta: f64,
    pub scale: f64,
    pub levels: Vec<CascadeLevelEstimate>,
    pub all_ok: bool,
}

/// Numeric cascade experiment: base maps `(x + e x^2, y)` and
/// `(x, y + e y^2)` with `e` halved until both maps and inverses are
/// `delta/4`-close to the identity on the unit ball (`delta = 1/24`), then
/// levels `S(i)`, `i <= max_level`, evaluated on the ball of radius 1/2
/// against the bound `delta / 2^{i+3}`.
///
/// Full level enumeration is combinatorially infeasible: level sizes are
/// capped at `cap` with a seeded deterministic subsample of pair choices.
pub fn cascade_estimate(max_level: usize, cap: usize, samples: usize) -> Result<CascadeEstimateReport> {
    let delta = 1.0 / 24.0;
    let one = Complex64::new(1.0, 0.0);
    let mut eps = 0.5f64;
    let pts_unit = sample_ball(1.0, samples, 0xBA5E);
    let (f1, f2) = loop {
        let f1 = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one), (2, 0, Complex64::new(eps, 0.0))] },
            fy: CPoly2 { terms: vec![(0, 1, one)] },
        };
        let f2 = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one)] },
            fy: CPoly2 { terms: vec![(0, 1, one), (0, 2, Complex64::new(eps, 0.0))] },
        };
        let mut sup: f64 = 0.0;
        for &p in &pts_unit {
            for (m, inv) in [(&f1, false), (&f1, true), (&f2, false), (&f2, true)] {
                let q = if inv { m.apply_inverse(p)? } else { m.apply(p)? };
                sup = sup.max(dist2(q, p));
            }
        }
        if sup <= delta / 4.0 {
            break (f1, f2);
        }
        eps *= 0.5;
    };

    let pts_half = sample_ball(0.5, samples, 0x0A1F);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut levels: Vec<Vec<Word>> = vec![vec![vec![1], vec![2]]];
    let mut reports = Vec::new();
    let mut all_ok = true;
    for i in 1..=max_level {
        let current = &levels[i - 1];
        let previous: &[Word] = if i >= 2 { &levels[i - 2] } else { &[] };
        let mut pool: Vec<&Word> = current.iter().collect();
        pool.extend(previous.iter());
        let mut next: Vec<Word> = Vec::new();
        let mut capped = false;
        'outer: for a in current {
            for b in &pool {
                for (ia, ib) in [(false, false), (false, true), (true, false), (true, true)] {
                    // seeded thinning keeps the level sizes tractable
                    if next.len() >= cap {
                        capped = true;
                        break 'outer;
                    }
                    if rng.gen_range(0.0..1.0) > 0.7 && next.len() > 2 {
                        continue;
                    }
                    let wa = if ia { word_inverse(a) } else { (*a).clone() };
                    let wb = if ib { word_inverse(b) } else { (*b).clone() };
                    let w = word_commutator(&wa, &wb);
                    if w.is_empty() || next.contains(&w) {
                        continue;
                    }
                    next.push(w);
                }
            }
        }
        let bound = delta / 2f64.powi(i as i32 + 3);
        let mut sup: f64 = 0.0;
        for w in &next {
            for &p in &pts_half {
                let q = apply_word(w, &f1, &f2, p)?;
                sup = sup.max(dist2(q, p));
            }
        }
        let ok = sup <= bound;
        all_ok &= ok;
        reports.push(CascadeLevelEstimate {
            level: i,
            element_count: next.len(),
            capped,
            sup_distance: sup,
            bound,
            ok,
        });
        levels.push(next);
    }
    Ok(CascadeEstimateReport { delta, scale: eps, levels: reports, all_ok })
}

#[derive(Debug, Serialize)]
pub struct BoundaryScanReport {
    pub k_radius: f64,
    pub grid: usize,
    pub max_iter: usize,
    pub best_point: (f64, f64, f64, f64),
    pub best_count: usize,
    /// Count at the same budget on a twice-refined grid.
    pub refined_best_count: usize,
}

/// Diagnostic scan of sphere samples for the point maximizing the number of
/// iterates staying inside the closed ball of radius `k_radius`.
pub fn boundary_iteration_scan(
    m: &MapSpec,
    k_radius: f64,
    grid: usize,
    max_iter: usize,
) -> Result<BoundaryScanReport> {
    if grid < 8 {
        return Err(EngineError::Precondition("grid must be at least 8".into()));
    }
    let count_for = |p0: (Complex64, Complex64)| -> Result<usize> {
        let mut p = p0;
        let mut n = 0;
        while n < max_iter {
            p = match m.apply(p) {
                Ok(q) => q,
                Err(_) => break,
            };
            if norm2(p) > k_radius {
                break;
            }
            n += 1;
        }
        Ok(n)
    };
    let scan = |g: usize| -> Result<((Complex64, Complex64), usize)> {
        let mut best = ((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 0usize);
        for k1 in 0..g {
            for k2 in 0..g {
                // sphere parametrization: split radius between coordinates
                let s = (k1 as f64 + 0.5) / g as f64;
                let r1 = k_radius * s / 2f64.sqrt() + 1e-3;
                let r2 = (k_radius * k_radius - 2.0 * r1 * r1).max(0.0).sqrt() / 2f64.sqrt();
                let th1 = 2.0 * std::f64::consts::PI * (k1 as f64 + 0.5) / g as f64;
                let th2 = 2.0 * std::f64::consts::PI * (k2 as f64 + 0.5) / g as f64;
                let p0 = (
                    Complex64::from_polar(r1, th1),
                    Complex64::from_polar(r2.max(1e-3), th2),
                );
                if norm2(p0) > k_radius {
                    continue;
                }
                let c = count_for(p0)?;
                if c > best.1 {
                    best = (p0, c);
                }
            }
        }
        Ok(best)
    };
    let (bp, bc) = scan(grid)?;
    let (_, rbc) = scan(grid * 2)?;
    Ok(BoundaryScanReport {
        k_radius,
        grid,
        max_iter,
        best_point: seed_tuple(bp),
        best_count: bc,
        refined_best_count: rbc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn saddle_node_axis_seed_is_fixed() {
        let rec = iterate_orbit(&MapSpec::SaddleNode, (c(0.0, 0.0), c(0.3, 0.0)), 0.5, 100).unwrap();
        assert_eq!(rec.status, OrbitStatus::PeriodDetected(1));
        assert_eq!(rec.closed_form_ok, Some(true));
    }

    #[test]
    fn saddle_node_escape_step_matches_closed_form() {
        // x_n = 0.1 + n * 0.001; escape when norm of the pair exceeds 0.5
        let p0 = (c(0.1, 0.0), c(0.1, 0.0));
        let rec = iterate_orbit(&MapSpec::SaddleNode, p0, 0.5, 100_000).unwrap();
        assert_eq!(rec.status, OrbitStatus::EscapedBoth);
        assert_eq!(rec.closed_form_ok, Some(true));
        // oracle: find the first n where the closed-form iterate exits;
        // the y-coordinate decays, so the x-coordinate dominates the norm
        let mut n = 0usize;
        let mut y = c(0.1, 0.0);
        loop {
            let x = c(0.1 + 0.001 * (n + 1) as f64, 0.0);
            let d = c(1.0, 0.0) + c(0.1 + 0.001 * n as f64, 0.0) * y;
            y = y / (d * d);
            if (x.norm_sqr() + y.norm_sqr()).sqrt() > 0.5 {
                break;
            }
            n += 1;
        }
        assert_eq!(rec.mu_forward, n);
    }

    #[test]
    fn saddle_node_inverse_round_trips() {
        let m = MapSpec::SaddleNode;
        let p = (c(0.11, 0.07), c(-0.2, 0.05));
        let q = m.apply(p).unwrap();
        let back = m.apply_inverse(q).unwrap();
        assert!(dist2(back, p) < 1e-14);
    }

    #[test]
    fn families_preserve_xy_over_long_orbits() {
        let tau_c = c(0.0, 2.0 * std::f64::consts::PI);
        for m in [
            MapSpec::FamilyF { f: vec![tau_c] },
            MapSpec::FamilyH { f: vec![tau_c] },
        ] {
            let mut p = (c(0.21, 0.02), c(0.1, -0.03));
            let u0 = p.0 * p.1;
            let mut worst: f64 = 0.0;
            for _ in 0..10_000 {
                p = m.apply(p).unwrap();
                worst = worst.max((p.0 * p.1 - u0).norm() / u0.norm());
            }
            assert!(worst <= 1e-9, "xy drift {worst}");
        }
    }

    #[test]
    fn family_inverses_round_trip() {
        let f = vec![c(1.0, 0.5), c(0.3, 0.0)];
        for m in [MapSpec::FamilyF { f: f.clone() }, MapSpec::FamilyH { f }] {
            let p = (c(0.2, 0.1), c(-0.1, 0.15));
            let q = m.apply(p).unwrap();
            let back = m.apply_inverse(q).unwrap();
            assert!(dist2(back, p) < 1e-11);
        }
    }

    #[test]
    fn family_h_with_tau_series_has_finite_orbit_evidence() {
        let tau_c = c(0.0, 2.0 * std::f64::consts::PI);
        let m = MapSpec::FamilyH { f: vec![tau_c] };
        let rec = iterate_orbit(&m, (c(0.17, 0.05), c(0.12, -0.08)), 0.5, 100_000).unwrap();
        assert_eq!(rec.status, OrbitStatus::EscapedBoth);
    }

    #[test]
    fn general_poly_newton_inverse() {
        let one = c(1.0, 0.0);
        let m = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one), (2, 1, c(0.3, 0.2))] },
            fy: CPoly2 { terms: vec![(0, 1, one), (1, 2, c(-0.1, 0.4))] },
        };
        let p = (c(0.3, -0.2), c(0.25, 0.1));
        let q = m.apply(p).unwrap();
        let back = m.apply_inverse(q).unwrap();
        assert!(dist2(back, p) < 1e-11);
    }

    #[test]
    fn classification_partitions_and_is_monotone() {
        let m = MapSpec::SaddleNode;
        let small = classify_ball(&m, 0.5, 4, 2_000).unwrap();
        assert_eq!(small.p_count + small.f_count + small.i_candidate_count, 16);
        let big = classify_ball(&m, 0.5, 4, 20_000).unwrap();
        // escape is monotone in the budget: F never shrinks
        assert!(big.f_count >= small.f_count);
    }

    #[test]
    fn invariant_circles_for_constant_one() {
        // f = 1: |1 + C| = 1 crosses every ray through the unit circle
        // centered at -1; the ray theta = pi hits it at |C| = 2
        let hits = invariant_circle_scan(&[c(1.0, 0.0)], 0.05, 2.5, 8).unwrap();
        assert!(!hits.is_empty());
        for h in &hits {
            assert!((h.modulus - 1.0).abs() < 1e-10);
            assert!(h.drift <= 1e-9, "drift {}", h.drift);
        }
        let on_axis = hits.iter().find(|h| {
            let c = Complex64::new(h.c.0, h.c.1);
            (c - Complex64::new(-2.0, 0.0)).norm() < 1e-6
        });
        assert!(on_axis.is_some(), "expected the C = -2 root on the theta = pi ray");
    }

    #[test]
    fn invariant_circles_for_tau_series() {
        let tau_c = c(0.0, 2.0 * std::f64::consts::PI);
        let hits = invariant_circle_scan(&[tau_c], 0.01, 0.4, 16).unwrap();
        assert!(!hits.is_empty());
        for h in &hits {
            assert!(h.drift <= 1e-9);
        }
    }

    #[test]
    fn estimate_holds_on_committed_fixture() {
        let eps = 1e-3;
        let one = c(1.0, 0.0);
        let f1 = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one), (2, 0, c(eps, 0.0))] },
            fy: CPoly2 { terms: vec![(0, 1, one)] },
        };
        let f2 = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one)] },
            fy: CPoly2 { terms: vec![(0, 1, one), (0, 2, c(eps, 0.0))] },
        };
        let delta = 4.0 * eps;
        let rep = commutator_estimate_check(&f1, &f2, 1.0, delta, 2.0 * delta, 1000).unwrap();
        assert!(rep.precondition_ok, "violator: {:?}", rep.violator);
        assert!(rep.inequality_ok, "worst ratio {}", rep.worst_ratio);
    }

    #[test]
    fn estimate_identity_maps_are_trivial() {
        let one = c(1.0, 0.0);
        let id = || MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one)] },
            fy: CPoly2 { terms: vec![(0, 1, one)] },
        };
        let rep = commutator_estimate_check(&id(), &id(), 1.0, 0.1, 0.1, 64).unwrap();
        assert!(rep.precondition_ok);
        assert_eq!(rep.worst_commutator_distance, 0.0);
        assert!(rep.inequality_ok);
    }

    #[test]
    fn cascade_levels_stay_within_bounds() {
        let rep = cascade_estimate(5, 12, 40).unwrap();
        assert!(rep.all_ok, "levels: {:?}", rep.levels);
        assert_eq!(rep.levels.len(), 5);
        for l in &rep.levels {
            assert!(l.element_count > 0, "level {} is empty", l.level);
        }
    }

    #[test]
    fn boundary_scan_identity_saturates_budget() {
        let one = c(1.0, 0.0);
        let id = MapSpec::GeneralPoly {
            fx: CPoly2 { terms: vec![(1, 0, one)] },
            fy: CPoly2 { terms: vec![(0, 1, one)] },
        };
        let rep = boundary_iteration_scan(&id, 0.5, 8, 200).unwrap();
        assert_eq!(rep.best_count, 200);
        assert_eq!(rep.refined_best_count, 200);
    }

    #[test]
    fn boundary_scan_saddle_node_grows_with_budget() {
        let m = MapSpec::SaddleNode;
        let small = boundary_iteration_scan(&m, 0.5, 8, 500).unwrap();
        let large = boundary_iteration_scan(&m, 0.5, 8, 5_000).unwrap();
        assert!(large.best_count > small.best_count);
    }
}
