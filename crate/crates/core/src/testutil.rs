//! Seeded random generators for jets, fields and diffeomorphisms. Used by
//! the test suites and by the CLI's reproducible fixture commands.

use rand::Rng;

use crate::jet::Jet2;
use crate::lie::{Diffeo2, VField2};
use crate::scalar::Scalar;

/// Random small rational coefficient; denominators kept tiny so that exact
/// arithmetic stays fast at N = 8.
pub fn random_coeff(rng: &mut impl Rng) -> Scalar {
    let num = rng.gen_range(-4i64..=4);
    let den = rng.gen_range(1i64..=3);
    Scalar::from_ratio(num, den)
}

/// Random jet with terms of total degree in `[min_deg, trunc]`.
pub fn random_jet(rng: &mut impl Rng, trunc: u32, min_deg: u32) -> Jet2 {
    let mut out = Jet2::zero(trunc);
    for i in 0..=trunc {
        for j in 0..=(trunc - i) {
            if i + j < min_deg {
                continue;
            }
            if rng.gen_bool(0.4) {
                out.set(i, j, random_coeff(rng));
            }
        }
    }
    out
}

/// Random vector field with both components of order >= 2 (the Exp/Log domain).
pub fn random_order2_field(rng: &mut impl Rng, trunc: u32) -> VField2 {
    loop {
        let jx = random_jet(rng, trunc, 2);
        let jy = random_jet(rng, trunc, 2);
        let f = VField2::new(jx, jy).unwrap();
        if !f.is_zero() {
            return f;
        }
    }
}

/// Random tangent-to-identity diffeomorphism.
pub fn random_tangent_diffeo(rng: &mut impl Rng, trunc: u32) -> Diffeo2 {
    let d = random_order2_field(rng, trunc);
    Diffeo2::new(Jet2::var_x(trunc).add(&d.jx), Jet2::var_y(trunc).add(&d.jy)).unwrap()
}

/// Random tangent-to-identity diffeomorphism with a prescribed contact order.
pub fn random_diffeo_with_contact_order(rng: &mut impl Rng, trunc: u32, order: u32) -> Diffeo2 {
    loop {
        let jx = random_jet(rng, trunc, order);
        let jy = random_jet(rng, trunc, order);
        let d = VField2::new(jx, jy).unwrap();
        if d.order() != order {
            continue;
        }
        return Diffeo2::new(
            Jet2::var_x(trunc).add(&d.jx),
            Jet2::var_y(trunc).add(&d.jy),
        )
        .unwrap();
    }
}
