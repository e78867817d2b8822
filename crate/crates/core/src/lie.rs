//! Formal vector fields and diffeomorphisms of (C^2, 0) at jet level:
//! derivations, Lie brackets, the Exp/Log correspondence and the group
//! operations of the tangent-to-identity group.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::jet::{Jet2, JetJson, ORDER_INFINITE};
use crate::scalar::Scalar;

/// Formal vector field `jx * d/dx + jy * d/dy`.
#[derive(Clone, PartialEq, Debug)]
pub struct VField2 {
    pub jx: Jet2,
    pub jy: Jet2,
}

impl VField2 {
    pub fn new(jx: Jet2, jy: Jet2) -> Result<Self> {
        if jx.trunc() != jy.trunc() {
            return Err(EngineError::TruncationMismatch(jx.trunc(), jy.trunc()));
        }
        Ok(VField2 { jx, jy })
    }

    pub fn zero(trunc: u32) -> Self {
        VField2 { jx: Jet2::zero(trunc), jy: Jet2::zero(trunc) }
    }

    pub fn trunc(&self) -> u32 {
        self.jx.trunc()
    }

    pub fn is_zero(&self) -> bool {
        self.jx.is_zero() && self.jy.is_zero()
    }

    /// Minimum of the component orders at the origin.
    pub fn order(&self) -> u32 {
        self.jx.order().min(self.jy.order())
    }

    pub fn add(&self, rhs: &VField2) -> VField2 {
        VField2 { jx: self.jx.add(&rhs.jx), jy: self.jy.add(&rhs.jy) }
    }

    pub fn sub(&self, rhs: &VField2) -> VField2 {
        VField2 { jx: self.jx.sub(&rhs.jx), jy: self.jy.sub(&rhs.jy) }
    }

    pub fn neg(&self) -> VField2 {
        VField2 { jx: self.jx.neg(), jy: self.jy.neg() }
    }

    pub fn scale(&self, c: &Scalar) -> VField2 {
        VField2 { jx: self.jx.scale(c), jy: self.jy.scale(c) }
    }

    /// Multiply both components by a jet (e.g. a first integral).
    pub fn scale_jet(&self, h: &Jet2) -> VField2 {
        VField2 { jx: self.jx.mul(h), jy: self.jy.mul(h) }
    }

    pub fn with_trunc(&self, trunc: u32) -> VField2 {
        VField2 { jx: self.jx.with_trunc(trunc), jy: self.jy.with_trunc(trunc) }
    }
}

/// Formal diffeomorphism given by its component jets `(fx, fy)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Diffeo2 {
    pub fx: Jet2,
    pub fy: Jet2,
}

impl Diffeo2 {
    pub fn new(fx: Jet2, fy: Jet2) -> Result<Self> {
        if fx.trunc() != fy.trunc() {
            return Err(EngineError::TruncationMismatch(fx.trunc(), fy.trunc()));
        }
        if !fx.coeff(0, 0).is_zero() || !fy.coeff(0, 0).is_zero() {
            return Err(EngineError::Domain("diffeomorphism must fix the origin".into()));
        }
        Ok(Diffeo2 { fx, fy })
    }

    pub fn identity(trunc: u32) -> Self {
        Diffeo2 { fx: Jet2::var_x(trunc), fy: Jet2::var_y(trunc) }
    }

    pub fn trunc(&self) -> u32 {
        self.fx.trunc()
    }

    pub fn is_identity(&self) -> bool {
        self == &Diffeo2::identity(self.trunc())
    }

    /// Linear part as a 2x2 scalar matrix `[[a, b], [c, d]]`.
    pub fn linear_part(&self) -> [[Scalar; 2]; 2] {
        [
            [self.fx.coeff(1, 0), self.fx.coeff(0, 1)],
            [self.fy.coeff(1, 0), self.fy.coeff(0, 1)],
        ]
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        let lp = self.linear_part();
        lp[0][0].is_one() && lp[0][1].is_zero() && lp[1][0].is_zero() && lp[1][1].is_one()
    }

    /// Difference from the identity, viewed as a vector field.
    pub fn displacement(&self) -> VField2 {
        let n = self.trunc();
        VField2 {
            jx: self.fx.sub(&Jet2::var_x(n)),
            jy: self.fy.sub(&Jet2::var_y(n)),
        }
    }

    pub fn with_trunc(&self, trunc: u32) -> Diffeo2 {
        let mut fx = self.fx.with_trunc(trunc);
        let mut fy = self.fy.with_trunc(trunc);
        // keep the linear part when raising the truncation of the identity
        if trunc >= 1 {
            if fx.coeff(1, 0).is_zero() && fx.is_zero() {
                fx = Jet2::zero(trunc);
            }
            if fy.coeff(0, 1).is_zero() && fy.is_zero() {
                fy = Jet2::zero(trunc);
            }
        }
        Diffeo2 { fx, fy }
    }
}

/// Order of contact with the identity: valuation of `F - id`
/// (`ORDER_INFINITE` for the identity itself).
pub fn contact_order(f: &Diffeo2) -> u32 {
    f.displacement().order()
}

/// Derivation action `X_* h = (dh/dx) jx + (dh/dy) jy`.
pub fn derive(x: &VField2, h: &Jet2) -> Jet2 {
    h.dx().mul(&x.jx).add(&h.dy().mul(&x.jy))
}

/// Lie bracket `[X, Y]` with components `Y_*(X_c) - X_*(Y_c)`.
///
/// The sign is adapted to left-to-right composition of diffeomorphisms
/// (`(F.G)(p) = F(G(p))`): with this convention the generator of the group
/// commutator `F.G.F^{-1}.G^{-1}` has leading term `[log F, log G]`, so the
/// Exp/Log correspondence and the group-side commutator bookkeeping agree
/// without sign juggling.
pub fn bracket(x: &VField2, y: &VField2) -> VField2 {
    VField2 {
        jx: derive(y, &x.jx).sub(&derive(x, &y.jx)),
        jy: derive(y, &x.jy).sub(&derive(x, &y.jy)),
    }
}

/// Time-`t` exponential of an order->=2 field: per coefficient degree `d`
/// the derivation sum terminates after at most `d` iterations.
pub fn exp_field(x: &VField2, t: &Scalar) -> Result<Diffeo2> {
    if x.order() < 2 {
        return Err(EngineError::OrderTooLow(x.order()));
    }
    let n = x.trunc();
    let mut comps = Vec::with_capacity(2);
    for h0 in [Jet2::var_x(n), Jet2::var_y(n)] {
        let mut acc = h0.clone();
        let mut term = h0;
        let mut tpow = Scalar::one();
        let mut fact = Scalar::one();
        for j in 1..=n as i64 {
            term = derive(x, &term);
            if term.is_zero() {
                break;
            }
            tpow = &tpow * t;
            fact = &fact * &Scalar::from_int(j);
            let coeff = &tpow / &fact;
            acc = acc.add(&term.scale(&coeff));
        }
        comps.push(acc);
    }
    let fy = comps.pop().unwrap();
    let fx = comps.pop().unwrap();
    Diffeo2::new(fx, fy)
}

/// Infinitesimal generator of a tangent-to-identity diffeomorphism, by the
/// degree-by-degree corrective recursion: at each degree `d` the defect
/// `F - Exp(Z)` is homogeneous of degree `d` and is absorbed into `Z`.
pub fn log_diffeo(f: &Diffeo2) -> Result<VField2> {
    if !f.is_tangent_to_identity() {
        return Err(EngineError::NotTangentToIdentity);
    }
    let n = f.trunc();
    let mut z = VField2::zero(n);
    for _deg in 2..=n {
        let e = exp_field_allow_zero(&z)?;
        let defect = VField2 {
            jx: f.fx.sub(&e.fx),
            jy: f.fy.sub(&e.fy),
        };
        if defect.is_zero() {
            break;
        }
        let d = defect.order();
        // absorb exactly the lowest homogeneous component
        let mut corr = VField2::zero(n);
        for (ex, c) in defect.jx.iter() {
            if ex.deg == d {
                corr.jx.set(ex.i(), ex.j(), c.clone());
            }
        }
        for (ex, c) in defect.jy.iter() {
            if ex.deg == d {
                corr.jy.set(ex.i(), ex.j(), c.clone());
            }
        }
        z = z.add(&corr);
    }
    debug_assert_eq!(exp_field_allow_zero(&z)?, *f);
    Ok(z)
}

fn exp_field_allow_zero(x: &VField2) -> Result<Diffeo2> {
    if x.is_zero() {
        return Ok(Diffeo2::identity(x.trunc()));
    }
    exp_field(x, &Scalar::one())
}

/// Composition `F o G`, i.e. `p -> F(G(p))`.
pub fn compose_diffeo(f: &Diffeo2, g: &Diffeo2) -> Result<Diffeo2> {
    let fx = f.fx.compose(&g.fx, &g.fy)?;
    let fy = f.fy.compose(&g.fx, &g.fy)?;
    Diffeo2::new(fx, fy)
}

/// Inverse solved degree by degree; requires an invertible linear part.
pub fn invert_diffeo(f: &Diffeo2) -> Result<Diffeo2> {
    let n = f.trunc();
    let lp = f.linear_part();
    let det = &(&lp[0][0] * &lp[1][1]) - &(&lp[0][1] * &lp[1][0]);
    if det.is_zero() {
        return Err(EngineError::SingularLinearPart);
    }
    let det_inv = det.inv()?;
    // L^{-1} = 1/det [[d, -b], [-c, a]]
    let li = [
        [&lp[1][1] * &det_inv, &(-&lp[0][1]) * &det_inv],
        [&(-&lp[1][0]) * &det_inv, &lp[0][0] * &det_inv],
    ];
    let linv = Diffeo2 {
        fx: Jet2::monomial(n, 1, 0, li[0][0].clone())
            .add(&Jet2::monomial(n, 0, 1, li[0][1].clone())),
        fy: Jet2::monomial(n, 1, 0, li[1][0].clone())
            .add(&Jet2::monomial(n, 0, 1, li[1][1].clone())),
    };
    let mut g = linv.clone();
    for _deg in 2..=n {
        let h = compose_diffeo(&g, f)?;
        let defect = VField2 {
            jx: h.fx.sub(&Jet2::var_x(n)),
            jy: h.fy.sub(&Jet2::var_y(n)),
        };
        if defect.is_zero() {
            break;
        }
        // (G - E) o F = G o F - E o L - h.o.t., so E = defect o L^{-1}
        let corr_x = defect.jx.compose(&linv.fx, &linv.fy)?;
        let corr_y = defect.jy.compose(&linv.fx, &linv.fy)?;
        g = Diffeo2 { fx: g.fx.sub(&corr_x), fy: g.fy.sub(&corr_y) };
    }
    debug_assert!(compose_diffeo(&g, f)?.is_identity());
    Ok(g)
}

/// Group commutator `F o G o F^{-1} o G^{-1}`.
pub fn commutator_diffeo(f: &Diffeo2, g: &Diffeo2) -> Result<Diffeo2> {
    let fi = invert_diffeo(f)?;
    let gi = invert_diffeo(g)?;
    compose_diffeo(&compose_diffeo(f, g)?, &compose_diffeo(&fi, &gi)?)
}

/// Pullback `F^* Z` of a vector field under a diffeomorphism, via the chain
/// rule on jets: solve `DF(p) . W(p) = Z(F(p))`.
pub fn pullback_field(f: &Diffeo2, z: &VField2) -> Result<VField2> {
    let jxx = f.fx.dx();
    let jxy = f.fx.dy();
    let jyx = f.fy.dx();
    let jyy = f.fy.dy();
    let det = jxx.mul(&jyy).sub(&jxy.mul(&jyx));
    let det_inv = det.inverse().map_err(|_| EngineError::SingularLinearPart)?;
    let zx_f = z.jx.compose(&f.fx, &f.fy)?;
    let zy_f = z.jy.compose(&f.fx, &f.fy)?;
    // Cramer: W = J^{-1} (Z o F)
    let wx = jyy.mul(&zx_f).sub(&jxy.mul(&zy_f)).mul(&det_inv);
    let wy = jxx.mul(&zy_f).sub(&jyx.mul(&zx_f)).mul(&det_inv);
    VField2::new(wx, wy)
}

// --- JSON wire format -------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct PairJson {
    pub kind: String,
    pub x: JetJson,
    pub y: JetJson,
}

impl VField2 {
    pub fn to_json(&self) -> PairJson {
        PairJson { kind: "vfield".into(), x: self.jx.to_json(), y: self.jy.to_json() }
    }

    pub fn from_json(json: &PairJson) -> Result<VField2> {
        if json.kind != "vfield" {
            return Err(EngineError::Domain(format!("expected kind \"vfield\", got {}", json.kind)));
        }
        VField2::new(Jet2::from_json(&json.x)?, Jet2::from_json(&json.y)?)
    }
}

impl Diffeo2 {
    pub fn to_json(&self) -> PairJson {
        PairJson { kind: "diffeo".into(), x: self.fx.to_json(), y: self.fy.to_json() }
    }

    pub fn from_json(json: &PairJson) -> Result<Diffeo2> {
        if json.kind != "diffeo" {
            return Err(EngineError::Domain(format!("expected kind \"diffeo\", got {}", json.kind)));
        }
        Diffeo2::new(Jet2::from_json(&json.x)?, Jet2::from_json(&json.y)?)
    }
}

pub fn order_is_finite(order: u32) -> bool {
    order != ORDER_INFINITE
}
