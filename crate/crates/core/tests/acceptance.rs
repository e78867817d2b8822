//! End-to-end acceptance suite. Each criterion prints one pass/fail line;
//! the assertions pin the exact values and tolerances the project commits
//! to.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use holodyn::group::{
    commuting_criterion, derived_series_jet, is_first_integral, model_u, model_x, model_y,
    normal_form_bracket, parallel_commutator_check, GeneratorSet, NormalFormGen,
};
use holodyn::holonomy::{
    dicritical_check, holonomy, structural_form, structural_series_x, xy_invariance_check,
    ZConvention,
};
use holodyn::jet::Jet2;
use holodyn::lie::{
    bracket, commutator_diffeo, contact_order, exp_field, log_diffeo,
    order_is_finite, Diffeo2, VField2,
};
use holodyn::orbit::{
    cascade_estimate, classify_ball, commutator_estimate_check, invariant_circle_scan,
    iterate_orbit, sample_ball, CPoly2, MapSpec,
};
use holodyn::parse::parse_poly;
use holodyn::scalar::{Complex64, Scalar};
use holodyn::testutil::random_coeff;

const SEED: u64 = 20260526;

fn verdict(n: u32, what: &str, ok: bool) {
    println!("criterion {n} ({what}): {}", if ok { "pass" } else { "FAIL" });
    assert!(ok, "criterion {n} failed");
}

/// Sparse random field of order >= `min_deg`: a handful of random monomial
/// terms per component. Sparse on purpose — coefficient growth in exact
/// arithmetic is driven by the number of terms, not the degree.
fn sparse_field(rng: &mut ChaCha8Rng, trunc: u32, min_deg: u32, terms: usize) -> VField2 {
    loop {
        let mut jx = Jet2::zero(trunc);
        let mut jy = Jet2::zero(trunc);
        for target in [&mut jx, &mut jy] {
            for _ in 0..terms {
                let d = rng.gen_range(min_deg..=trunc.min(min_deg + 3));
                let i = rng.gen_range(0..=d);
                target.set(i, d - i, random_coeff(rng));
            }
        }
        if let Ok(v) = VField2::new(jx, jy) {
            if v.order() == min_deg {
                return v;
            }
        }
    }
}

#[test]
fn criterion_01_exp_log_bijection() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 8;
    let mut ok = true;
    for _ in 0..50 {
        let min_deg = rng.gen_range(2..=4);
        let x = sparse_field(&mut rng, n, min_deg, 3);
        let f = exp_field(&x, &Scalar::one()).unwrap();
        let back = log_diffeo(&f).unwrap();
        ok &= back == x;
        // and the other composition order, starting from a map
        let g = {
            let mut fx = Jet2::var_x(n);
            let mut fy = Jet2::var_y(n);
            for _ in 0..3 {
                let d = rng.gen_range(2..=5);
                let i = rng.gen_range(0..=d);
                fx.set(i, d - i, random_coeff(&mut rng));
                let d = rng.gen_range(2..=5);
                let i = rng.gen_range(0..=d);
                fy.set(i, d - i, random_coeff(&mut rng));
            }
            Diffeo2::new(fx, fy).unwrap()
        };
        if g.is_identity() {
            continue;
        }
        let z = log_diffeo(&g).unwrap();
        ok &= exp_field(&z, &Scalar::one()).unwrap() == g;
    }
    verdict(1, "exp/log bijection, 50 seeds, exact", ok);
}

#[test]
fn criterion_02_commuting_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let n = 6;
    let mut mismatches = 0;
    // 20 commuting pairs: flows of the same field at different exact times
    for k in 0..20 {
        let x = sparse_field(&mut rng, n, 2, 2);
        let y = x.scale(&Scalar::from_int(k + 2));
        let f = exp_field(&x, &Scalar::one()).unwrap();
        let g = exp_field(&y, &Scalar::one()).unwrap();
        let commutes = commutator_diffeo(&f, &g).unwrap().is_identity();
        let bracket_zero = bracket(&x, &y).is_zero();
        if commutes != bracket_zero || !commutes {
            mismatches += 1;
        }
    }
    // 20 generic pairs
    for _ in 0..20 {
        let x = sparse_field(&mut rng, n, 2, 2);
        let y = sparse_field(&mut rng, n, 2, 2);
        let f = exp_field(&x, &Scalar::one()).unwrap();
        let g = exp_field(&y, &Scalar::one()).unwrap();
        let commutes = commutator_diffeo(&f, &g).unwrap().is_identity();
        let bracket_zero = bracket(&x, &y).is_zero();
        if commutes != bracket_zero {
            mismatches += 1;
        }
    }
    verdict(2, "commutator identity iff bracket zero, 40 pairs", mismatches == 0);
}

#[test]
fn criterion_03_order_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut ok = true;
    for _ in 0..50 {
        let r = rng.gen_range(2..=5);
        let s = rng.gen_range(2..=5);
        // truncate high enough that the predicted order is visible
        let n = (r + s + 1).max(8);
        let x = sparse_field(&mut rng, n, r, 2);
        let y = sparse_field(&mut rng, n, s, 2);
        let f = exp_field(&x, &Scalar::one()).unwrap();
        let g = exp_field(&y, &Scalar::one()).unwrap();
        let k = commutator_diffeo(&f, &g).unwrap();
        let c = contact_order(&k);
        ok &= c >= r + s - 1;
        // the log of the commutator agrees with the bracket to leading order
        let br = bracket(&x, &y);
        if order_is_finite(c) && !br.is_zero() {
            let w = log_diffeo(&k).unwrap();
            let diff = w.sub(&br);
            ok &= diff.is_zero() || diff.order() > br.order();
        }
    }
    verdict(3, "contact order of commutators >= r+s-1, 50 pairs", ok);
}

#[test]
fn criterion_04_degree_three_family() {
    let a = parse_poly("x*(1+x^2*y*z^3)").unwrap();
    let b = parse_poly("y*(1-x^2*y*z^3)").unwrap();
    let res = holonomy(&a, &b, 8, ZConvention::MinusZ).unwrap();
    let mut ok = true;
    // every coefficient in degrees 2 and 3 vanishes identically
    for d in 2..=3u32 {
        for i in 0..=d {
            ok &= res.table_x.coeff(i, d - i).eval_at_one().is_zero();
            ok &= res.table_y.coeff(i, d - i).eval_at_one().is_zero();
        }
    }
    ok &= res.table_x.coeff(3, 1).eval_at_one() == -&Scalar::tau();
    ok &= res.table_y.coeff(2, 2).eval_at_one() == Scalar::tau();
    ok &= xy_invariance_check(&res.diffeo).holds;
    let sf = structural_form(&res.diffeo, 2, 1).unwrap();
    ok &= sf.matches_x && sf.matches_y;
    verdict(4, "resonant degree-3 family: exact coefficients and structure", ok);
}

#[test]
fn criterion_05_radial_family() {
    let a = parse_poly("x*(1+x*y*z^2)").unwrap();
    let b = parse_poly("y*(1+x*y*z^2)").unwrap();
    let res = holonomy(&a, &b, 8, ZConvention::MinusZ).unwrap();
    let mut ok = res.table_x.coeff(2, 1).eval_at_one() == -&Scalar::tau();
    ok &= res.table_y.coeff(1, 2).eval_at_one() == -&Scalar::tau();
    ok &= dicritical_check(&res.diffeo).unwrap();
    verdict(5, "radial family: exact coefficients, dicritical", ok);
}

#[test]
fn criterion_06_degree_two_family() {
    let a = parse_poly("x*(1+x*y*z^2)").unwrap();
    let b = parse_poly("y*(1-x*y*z^2)").unwrap();
    let res = holonomy(&a, &b, 8, ZConvention::MinusZ).unwrap();
    let mut ok = xy_invariance_check(&res.diffeo).holds;
    let sf = structural_form(&res.diffeo, 1, 1).unwrap();
    ok &= sf.matches_x && sf.matches_y;
    let f = structural_series_x(&res.diffeo, 1, 1);
    let f0 = f.first().cloned().unwrap_or_else(Scalar::zero);
    // numeric check after substituting the loop period
    ok &= (f0.eval().norm() - 2.0 * std::f64::consts::PI).abs() <= 1e-10;
    verdict(6, "resonant degree-2 family: structure and |f(0)| = 2 pi", ok);
}

#[test]
fn criterion_07_saddle_node_orbits() {
    let m = MapSpec::SaddleNode;
    let mut ok = true;
    for p0 in sample_ball(0.35, 100, SEED) {
        let rec = iterate_orbit(&m, p0, 0.5, 100_000).unwrap();
        ok &= rec.closed_form_ok == Some(true);
    }
    let cls = classify_ball(&m, 0.5, 64, 100_000).unwrap();
    ok &= cls.p_count == 0;
    ok &= cls.i_candidate_count == 0;
    verdict(
        7,
        "saddle-node: closed-form law to 1e-9, no P, no I-candidates",
        ok,
    );
}

#[test]
fn criterion_08_invariant_circles() {
    let hits = invariant_circle_scan(&[Complex64::new(1.0, 0.0)], 0.05, 2.5, 8).unwrap();
    let mut ok = !hits.is_empty();
    for h in &hits {
        ok &= (h.modulus - 1.0).abs() <= 1e-12;
        ok &= h.drift <= 1e-9;
    }
    let tau_c = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let cls = classify_ball(&MapSpec::FamilyH { f: vec![tau_c] }, 0.3, 32, 100_000).unwrap();
    ok &= cls.i_candidate_count == 0;
    verdict(8, "invariant circles and degree-3 family escape", ok);
}

#[test]
fn criterion_09_commutator_estimates() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let one = Complex64::new(1.0, 0.0);
    let mut ok = true;
    for _ in 0..10 {
        // random near-identity polynomial pair, perturbation scale 1e-3
        let mut rand_map = || {
            let mut fx = vec![(1, 0, one)];
            let mut fy = vec![(0, 1, one)];
            for _ in 0..2 {
                let c = Complex64::new(
                    rng.gen_range(-1e-3..1e-3),
                    rng.gen_range(-1e-3..1e-3),
                );
                fx.push((rng.gen_range(0..=2u32), rng.gen_range(0..=2u32), c));
                let c = Complex64::new(
                    rng.gen_range(-1e-3..1e-3),
                    rng.gen_range(-1e-3..1e-3),
                );
                fy.push((rng.gen_range(0..=2u32), rng.gen_range(0..=2u32), c));
            }
            MapSpec::GeneralPoly { fx: CPoly2 { terms: fx }, fy: CPoly2 { terms: fy } }
        };
        let f1 = rand_map();
        let f2 = rand_map();
        // calibrate delta so the near-identity precondition holds with margin
        let mut sup: f64 = 0.0;
        for p in sample_ball(1.0, 1500, SEED ^ 0x91) {
            for (m, inv) in [(&f1, false), (&f1, true), (&f2, false), (&f2, true)] {
                let q = if inv { m.apply_inverse(p).unwrap() } else { m.apply(p).unwrap() };
                sup = sup.max(((q.0 - p.0).norm_sqr() + (q.1 - p.1).norm_sqr()).sqrt());
            }
        }
        let delta = 4.0 * sup * 1.25;
        let rep = commutator_estimate_check(&f1, &f2, 1.0, delta, 2.0 * delta, 1000).unwrap();
        ok &= rep.precondition_ok;
        ok &= rep.inequality_ok;
    }
    let cascade = cascade_estimate(5, 12, 60).unwrap();
    ok &= cascade.levels.len() == 5;
    for l in &cascade.levels {
        ok &= l.element_count > 0 && l.sup_distance <= l.bound + 1e-12;
    }
    verdict(9, "small-commutator inequality and cascade bounds", ok);
}

#[test]
fn criterion_10_solvable_structure() {
    let n = 10;
    let x = model_x(n);
    let y = model_y(n);
    let u = model_u(n);
    let fbar = u.clone();
    let mut ok = true;

    // committed metabelian fixture: first derived level nontrivial abelian
    let g1 = NormalFormGen { a: Jet2::zero(n), alpha: Scalar::one() };
    let g2 = NormalFormGen { a: u.clone(), alpha: Scalar::zero() };
    let gens = GeneratorSet::new(vec![
        exp_field(&g1.field(&x, &y, &fbar), &Scalar::one()).unwrap(),
        exp_field(&g2.field(&x, &y, &fbar), &Scalar::one()).unwrap(),
    ])
    .unwrap();
    let series = derived_series_jet(&gens, 2).unwrap();
    ok &= !series[0].abelian;
    ok &= series[1].element_count > 0 && series[1].abelian;
    ok &= series.get(2).map(|l| l.element_count == 0).unwrap_or(true);

    // normal-form bracket formula on 12 generator pairs
    let a_pool: Vec<Jet2> = vec![
        Jet2::zero(n),
        Jet2::one(n),
        u.clone(),
        u.mul(&u),
        Jet2::one(n).add(&u),
        u.scale(&Scalar::from_int(3)),
    ];
    let alpha_pool = [Scalar::zero(), Scalar::one(), Scalar::from_int(2)];
    let mut pairs = 0;
    'outer: for (i, ai) in a_pool.iter().enumerate() {
        for (j, aj) in a_pool.iter().enumerate().skip(i + 1) {
            let gi = NormalFormGen { a: ai.clone(), alpha: alpha_pool[(i + 1) % 3].clone() };
            let gj = NormalFormGen { a: aj.clone(), alpha: alpha_pool[(j + 1) % 3].clone() };
            if gi.field(&x, &y, &fbar).is_zero() || gj.field(&x, &y, &fbar).is_zero() {
                continue;
            }
            let (formula, assembled) = normal_form_bracket(&gi, &gj, &x, &y, &fbar).unwrap();
            ok &= formula == assembled;
            let rep = commuting_criterion(&gi, &gj, &x, &y, &fbar).unwrap();
            ok &= rep.equivalent;
            pairs += 1;
            if pairs == 12 {
                break 'outer;
            }
        }
    }
    ok &= pairs == 12;

    // parallel-commutator equivalence on 6 fixtures
    ok &= is_first_integral(&u, &x);
    // b coefficients must keep b Y at order >= 2, so every fixture is a
    // first-integral multiple of u
    let b_fixtures: [(Jet2, Jet2); 6] = [
        // constant ratio: commutator parallel to x (includes b2 = 3 b1)
        (u.clone(), u.scale(&Scalar::from_int(3))),
        (u.add(&u.mul(&u)), u.add(&u.mul(&u)).scale(&Scalar::from_int(2))),
        (u.mul(&u), u.mul(&u).scale(&Scalar::from_int(-5))),
        // non-constant ratio: b2 = (xy) b1 and relatives
        (u.clone(), u.mul(&u)),
        (u.clone(), u.add(&u.mul(&u))),
        (u.add(&u.mul(&u)), u.mul(&u)),
    ];
    for (b1, b2) in &b_fixtures {
        let a1 = u.clone();
        let a2 = Jet2::one(n);
        let rep = parallel_commutator_check(&a1, b1, &a2, b2, &x, &y).unwrap();
        ok &= rep.equivalent;
    }
    verdict(10, "solvable/normal-form fixtures, 12 + 6 pairs", ok);
}
