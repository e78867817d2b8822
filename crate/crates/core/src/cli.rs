//! Command-line entry point: batch access to the exact jet engine and the
//! numeric orbit experiments, plus a reproduction harness for the committed
//! worked examples.
//!
//! Exit codes: 0 success, 2 usage, 3 domain/parse error, 4 example-diff
//! failure.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{EngineError, Result};
use crate::group::{
    centralizer_form_check, derived_series_jet, sj_sequence, GeneratorSet, DEFAULT_LEVEL_CAP,
};
use crate::holonomy::{
    dicritical_check, holonomy, structural_form, xy_invariance_check, ZConvention,
};

use crate::lie::{bracket, commutator_diffeo, exp_field, log_diffeo, Diffeo2, VField2};
use crate::orbit::{
    cascade_estimate, classify_ball, commutator_estimate_check, invariant_circle_scan,
    iterate_orbit, sample_grid, CPoly2, MapSpec, OrbitStatus,
};
use crate::parse::{parse_jet, parse_poly, parse_scalar};
use crate::scalar::{Complex64, Scalar};
use crate::testutil::random_order2_field;

/// Committed default seed for every randomized subcommand.
pub const DEFAULT_SEED: u64 = 20260526;

#[derive(Parser)]
#[command(name = "holodyn", version, about = "exact jets, holonomy and orbit experiments for plane diffeomorphism germs", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Truncation degree N (1..=16).
    #[arg(long, default_value_t = 8)]
    trunc: u32,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvArg {
    MinusZ,
    PlusZ,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time-t flow of a vector field (components as expressions in x, y).
    Exp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jx: String,
        #[arg(long)]
        jy: String,
        /// Flow time as an exact scalar expression.
        #[arg(long, default_value = "1")]
        time: String,
    },
    /// Infinitesimal generator of a tangent-to-identity map.
    Log {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        fx: String,
        #[arg(long)]
        fy: String,
    },
    /// Bracket of two vector fields.
    Bracket {
        #[command(flatten)]
        common: Common,
        /// First field as "jx;jy".
        #[arg(long)]
        a: String,
        /// Second field as "jx;jy".
        #[arg(long)]
        b: String,
    },
    /// Group commutator F G F^{-1} G^{-1} of two maps.
    Commutator {
        #[command(flatten)]
        common: Common,
        /// First map as "fx;fy".
        #[arg(long)]
        f: String,
        /// Second map as "fx;fy".
        #[arg(long)]
        g: String,
    },
    /// Iterated-commutator cascade S(j) of a generating set.
    Sj {
        #[command(flatten)]
        common: Common,
        /// Generator map as "fx;fy" (repeatable).
        #[arg(long = "gen")]
        gens: Vec<String>,
        /// Instead of explicit generators: flow this many seeded random
        /// order-2 fields.
        #[arg(long)]
        random_gens: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_LEVEL_CAP)]
        cap: usize,
    },
    /// Derived series of a generating set.
    Derived {
        #[command(flatten)]
        common: Common,
        #[arg(long = "gen")]
        gens: Vec<String>,
        #[arg(long)]
        random_gens: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Centralizer normal-form membership of F against X (and optionally Y).
    Centralizer {
        #[command(flatten)]
        common: Common,
        /// Candidate map as "fx;fy".
        #[arg(long)]
        f: String,
        /// Reference field as "jx;jy".
        #[arg(long)]
        x: String,
        /// Optional transverse field as "jx;jy".
        #[arg(long)]
        y: Option<String>,
    },
    /// Holonomy of the foliation of dx/dz = -A/z, dy/dz = -B/z along the
    /// standard loop.
    Holonomy {
        #[command(flatten)]
        common: Common,
        /// x-component A as an expression in x, y, z.
        #[arg(long)]
        a: String,
        /// y-component B as an expression in x, y, z.
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value_t = ConvArg::MinusZ)]
        convention: ConvArg,
        /// Resonant monomial exponents "a,b" for the structural-form report.
        #[arg(long)]
        structural: Option<String>,
    },
    /// Classify a sample grid of a ball by orbit behavior; CSV per orbit.
    Orbits {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MapArg::SaddleNode)]
        map: MapArg,
        /// Series coefficients for family maps, "re,im" (repeatable).
        #[arg(long = "coef")]
        coefs: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Optional CSV path for the per-orbit records.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Invariant-circle scan for the resonant family.
    Circles {
        #[command(flatten)]
        common: Common,
        #[arg(long = "coef")]
        coefs: Vec<String>,
        #[arg(long, default_value_t = 0.01)]
        r_min: f64,
        #[arg(long, default_value_t = 2.5)]
        r_max: f64,
        #[arg(long, default_value_t = 16)]
        rays: usize,
    },
    /// Small-commutator estimate checks.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Run the iterated-cascade variant instead of the single-pair one.
        #[arg(long)]
        cascade: bool,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Re-run the committed worked examples and diff against the expected
    /// results file.
    Examples {
        /// Which example to run (2, 3, 5, 6, 7); default all.
        #[arg(long)]
        which: Option<u32>,
        /// Expected-results file to diff against.
        #[arg(long)]
        expected: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    SaddleNode,
    FamilyF,
    FamilyH,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

fn check_trunc(n: u32) -> Result<()> {
    if (1..=16).contains(&n) {
        Ok(())
    } else {
        Err(EngineError::Precondition(format!("truncation {n} outside 1..=16")))
    }
}

fn emit(common_output: &Option<PathBuf>, text: &str) -> Result<i32> {
    match common_output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| EngineError::Domain(format!("cannot write {}: {e}", p.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(0)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialization cannot fail");
    s.push('\n');
    s
}

fn parse_field(src: &str, trunc: u32) -> Result<VField2> {
    let (jx, jy) = split_pair(src)?;
    VField2::new(parse_jet(&jx, trunc)?, parse_jet(&jy, trunc)?)
}

fn parse_map(src: &str, trunc: u32) -> Result<Diffeo2> {
    let (fx, fy) = split_pair(src)?;
    Diffeo2::new(parse_jet(&fx, trunc)?, parse_jet(&fy, trunc)?)
}

fn split_pair(src: &str) -> Result<(String, String)> {
    let mut it = src.splitn(2, ';');
    match (it.next(), it.next()) {
        (Some(a), Some(b)) => Ok((a.trim().to_string(), b.trim().to_string())),
        _ => Err(EngineError::Precondition(format!(
            "expected \"expr;expr\", got {src:?}"
        ))),
    }
}

fn parse_complex(src: &str) -> Result<Complex64> {
    let mut it = src.splitn(2, ',');
    let bad = || EngineError::Precondition(format!("expected \"re,im\", got {src:?}"));
    let re: f64 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = it.next().unwrap_or("0").trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_coefs(coefs: &[String]) -> Result<Vec<Complex64>> {
    if coefs.is_empty() {
        // the resonant model series f = tau
        return Ok(vec![Complex64::new(0.0, 2.0 * std::f64::consts::PI)]);
    }
    coefs.iter().map(|s| parse_complex(s)).collect()
}

fn gather_gens(
    gens: &[String],
    random_gens: Option<usize>,
    seed: u64,
    trunc: u32,
) -> Result<GeneratorSet> {
    let mut v: Vec<Diffeo2> = gens
        .iter()
        .map(|g| parse_map(g, trunc))
        .collect::<Result<_>>()?;
    if let Some(k) = random_gens {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..k {
            let x = random_order2_field(&mut rng, trunc);
            v.push(exp_field(&x, &Scalar::one())?);
        }
    }
    GeneratorSet::new(v)
}

fn status_string(s: &OrbitStatus) -> String {
    match s {
        OrbitStatus::EscapedForward => "escaped-forward".into(),
        OrbitStatus::EscapedBackward => "escaped-backward".into(),
        OrbitStatus::EscapedBoth => "escaped-both".into(),
        OrbitStatus::PeriodDetected(k) => format!("period-detected({k})"),
        OrbitStatus::BudgetExhausted => "budget-exhausted".into(),
    }
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Exp { common, jx, jy, time } => {
            check_trunc(common.trunc)?;
            let x = VField2::new(parse_jet(&jx, common.trunc)?, parse_jet(&jy, common.trunc)?)?;
            let t = parse_scalar(&time)?;
            let f = if x.is_zero() {
                Diffeo2::identity(common.trunc)
            } else {
                exp_field(&x, &t)?
            };
            emit(&common.output, &json(&f.to_json()))
        }
        Cmd::Log { common, fx, fy } => {
            check_trunc(common.trunc)?;
            let f = Diffeo2::new(parse_jet(&fx, common.trunc)?, parse_jet(&fy, common.trunc)?)?;
            let x = log_diffeo(&f)?;
            emit(&common.output, &json(&x.to_json()))
        }
        Cmd::Bracket { common, a, b } => {
            check_trunc(common.trunc)?;
            let x = parse_field(&a, common.trunc)?;
            let y = parse_field(&b, common.trunc)?;
            emit(&common.output, &json(&bracket(&x, &y).to_json()))
        }
        Cmd::Commutator { common, f, g } => {
            check_trunc(common.trunc)?;
            let f = parse_map(&f, common.trunc)?;
            let g = parse_map(&g, common.trunc)?;
            emit(&common.output, &json(&commutator_diffeo(&f, &g)?.to_json()))
        }
        Cmd::Sj { common, gens, random_gens, seed, levels, cap } => {
            check_trunc(common.trunc)?;
            let s = gather_gens(&gens, random_gens, seed, common.trunc)?;
            let cascade = sj_sequence(&s, levels, cap)?;
            emit(&common.output, &json(&cascade.reports))
        }
        Cmd::Derived { common, gens, random_gens, seed, depth } => {
            check_trunc(common.trunc)?;
            let s = gather_gens(&gens, random_gens, seed, common.trunc)?;
            emit(&common.output, &json(&derived_series_jet(&s, depth)?))
        }
        Cmd::Centralizer { common, f, x, y } => {
            check_trunc(common.trunc)?;
            let f = parse_map(&f, common.trunc)?;
            let x = parse_field(&x, common.trunc)?;
            let y = y.map(|s| parse_field(&s, common.trunc)).transpose()?;
            let rep = centralizer_form_check(&f, &x, y.as_ref())?;
            emit(&common.output, &json(&rep))
        }
        Cmd::Holonomy { common, a, b, convention, structural } => {
            check_trunc(common.trunc)?;
            let conv = match convention {
                ConvArg::MinusZ => ZConvention::MinusZ,
                ConvArg::PlusZ => ZConvention::PlusZ,
            };
            let res = holonomy(&parse_poly(&a)?, &parse_poly(&b)?, common.trunc, conv)?;
            let inv = xy_invariance_check(&res.diffeo);
            let dic = dicritical_check(&res.diffeo)?;
            let mut report = serde_json::Map::new();
            report.insert("diffeo".into(), serde_json::to_value(res.diffeo.to_json()).unwrap());
            report.insert("xy_invariant".into(), inv.holds.into());
            report.insert("dicritical".into(), dic.into());
            if let Some(u) = structural {
                let (sa, sb) = {
                    let mut it = u.splitn(2, ',');
                    let bad = || EngineError::Precondition("expected --structural a,b".into());
                    let sa: u32 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                    let sb: u32 = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                    (sa, sb)
                };
                let sf = structural_form(&res.diffeo, sa, sb)?;
                report.insert("structural".into(), serde_json::to_value(&sf).unwrap());
            }
            emit(&common.output, &json(&serde_json::Value::Object(report)))
        }
        Cmd::Orbits { common, map, coefs, rho, grid, max_iter, csv } => {
            let m = match map {
                MapArg::SaddleNode => MapSpec::SaddleNode,
                MapArg::FamilyF => MapSpec::FamilyF { f: parse_coefs(&coefs)? },
                MapArg::FamilyH => MapSpec::FamilyH { f: parse_coefs(&coefs)? },
            };
            if let Some(path) = &csv {
                let mut rows = String::from("seed_x_re,seed_x_im,seed_y_re,seed_y_im,status,mu_forward,mu_backward,period\n");
                for p0 in sample_grid(rho, grid) {
                    let rec = iterate_orbit(&m, p0, rho, max_iter)?;
                    rows.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        rec.seed.0,
                        rec.seed.1,
                        rec.seed.2,
                        rec.seed.3,
                        status_string(&rec.status),
                        rec.mu_forward,
                        rec.mu_backward,
                        rec.period.map(|k| k.to_string()).unwrap_or_default(),
                    ));
                }
                std::fs::write(path, rows).map_err(|e| {
                    EngineError::Domain(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let summary = classify_ball(&m, rho, grid, max_iter)?;
            emit(&common.output, &json(&summary))
        }
        Cmd::Circles { common, coefs, r_min, r_max, rays } => {
            let hits = invariant_circle_scan(&parse_coefs(&coefs)?, r_min, r_max, rays)?;
            emit(&common.output, &json(&hits))
        }
        Cmd::Estimate { common, cascade, eps, samples, levels, cap } => {
            if cascade {
                let rep = cascade_estimate(levels, cap, samples)?;
                emit(&common.output, &json(&rep))
            } else {
                let one = Complex64::new(1.0, 0.0);
                let f1 = MapSpec::GeneralPoly {
                    fx: CPoly2 { terms: vec![(1, 0, one), (2, 0, Complex64::new(eps, 0.0))] },
                    fy: CPoly2 { terms: vec![(0, 1, one)] },
                };
                let f2 = MapSpec::GeneralPoly {
                    fx: CPoly2 { terms: vec![(1, 0, one)] },
                    fy: CPoly2 { terms: vec![(0, 1, one), (0, 2, Complex64::new(eps, 0.0))] },
                };
                let delta = 4.0 * eps;
                let rep = commutator_estimate_check(&f1, &f2, 1.0, delta, 2.0 * delta, samples)?;
                emit(&common.output, &json(&rep))
            }
        }
        Cmd::Examples { which, expected, output } => run_examples(which, expected, output),
    }
}

// --- worked-example harness -----------------------------------------------------

/// Default location of the committed expected-results file.
fn default_expected_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/expected_examples.txt")
}

fn report_example(which: u32) -> Result<String> {
    let mut s = format!("[example {which}]\n");
    match which {
        2 => {
            let hits = invariant_circle_scan(&[Complex64::new(1.0, 0.0)], 0.05, 2.5, 8)?;
            let minus_two = hits.iter().any(|h| {
                (Complex64::new(h.c.0, h.c.1) - Complex64::new(-2.0, 0.0)).norm() < 1e-6
            });
            let modulus_ok = hits.iter().all(|h| (h.modulus - 1.0).abs() <= 1e-12);
            let drift_ok = hits.iter().all(|h| h.drift <= 1e-9);
            s += &format!("circles found: {}\n", hits.len());
            s += &format!("root C = -2 found: {minus_two}\n");
            s += &format!("all |1+C| within 1e-12 of 1: {modulus_ok}\n");
            s += &format!("multiplier drift <= 1e-9 over 1e4 steps: {drift_ok}\n");
        }
        3 => {
            let m = MapSpec::SaddleNode;
            let mut closed_ok = true;
            let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
            for p0 in crate::orbit::sample_ball(0.35, 100, 0xE3) {
                let rec = iterate_orbit(&m, p0, 0.5, 5_000)?;
                closed_ok &= rec.closed_form_ok == Some(true);
            }
            let _ = &mut rng;
            let cls = classify_ball(&m, 0.5, 16, 100_000)?;
            s += &format!("closed form x_n = x0 + n x0^2 y0 to 1e-9 on 100 seeds: {closed_ok}\n");
            s += &format!("periodic points: {}\n", cls.p_count);
            s += &format!("i-candidates: {}\n", cls.i_candidate_count);
        }
        5 => {
            let a = parse_poly("x*(1+x*y*z^2)")?;
            let b = parse_poly("y*(1-x*y*z^2)")?;
            let res = holonomy(&a, &b, 8, ZConvention::MinusZ)?;
            let a21 = res.table_x.coeff(2, 1).eval_at_one();
            let b12 = res.table_y.coeff(1, 2).eval_at_one();
            let inv = xy_invariance_check(&res.diffeo);
            let sf = structural_form(&res.diffeo, 1, 1)?;
            s += &format!("a21(1) = -tau: {}\n", a21 == (-&Scalar::tau()));
            s += &format!("b12(1) = tau: {}\n", b12 == Scalar::tau());
            s += &format!("xy invariant: {}\n", inv.holds);
            s += &format!("structural form x(1+u f(u)), u = xy: {}\n", sf.matches_x && sf.matches_y);
            s += &format!("f(0) = {}\n", sf.f_coeffs.first().cloned().unwrap_or_default());
        }
        6 => {
            let a = parse_poly("x*(1+x^2*y*z^3)")?;
            let b = parse_poly("y*(1-x^2*y*z^3)")?;
            let res = holonomy(&a, &b, 8, ZConvention::MinusZ)?;
            let a31 = res.table_x.coeff(3, 1).eval_at_one();
            let b22 = res.table_y.coeff(2, 2).eval_at_one();
            let disp = res.diffeo.displacement();
            let low_degrees_vanish = disp.order() >= 4;
            let inv = xy_invariance_check(&res.diffeo);
            let sf = structural_form(&res.diffeo, 2, 1)?;
            s += &format!("coefficients of degrees 2..3 vanish: {low_degrees_vanish}\n");
            s += &format!("a31(1) = -tau: {}\n", a31 == (-&Scalar::tau()));
            s += &format!("b22(1) = tau: {}\n", b22 == Scalar::tau());
            s += &format!("xy invariant: {}\n", inv.holds);
            s += &format!("structural form x(1+u f(u)), u = x^2 y: {}\n", sf.matches_x && sf.matches_y);
            s += &format!("f(0) = {}\n", sf.f_coeffs.first().cloned().unwrap_or_default());
        }
        7 => {
            let a = parse_poly("x*(1+x*y*z^2)")?;
            let b = parse_poly("y*(1+x*y*z^2)")?;
            let res = holonomy(&a, &b, 8, ZConvention::MinusZ)?;
            let a21 = res.table_x.coeff(2, 1).eval_at_one();
            let b12 = res.table_y.coeff(1, 2).eval_at_one();
            let inv = xy_invariance_check(&res.diffeo);
            let dic = dicritical_check(&res.diffeo)?;
            s += &format!("a21(1) = -tau: {}\n", a21 == (-&Scalar::tau()));
            s += &format!("b12(1) = -tau: {}\n", b12 == (-&Scalar::tau()));
            s += &format!("xy invariant: {}\n", inv.holds);
            s += &format!("dicritical: {dic}\n");
        }
        n => {
            return Err(EngineError::Precondition(format!(
                "no committed example {n}; available: 2, 3, 5, 6, 7"
            )))
        }
    }
    Ok(s)
}

fn run_examples(which: Option<u32>, expected: Option<PathBuf>, output: Option<PathBuf>) -> Result<i32> {
    let list: Vec<u32> = match which {
        Some(n) => vec![n],
        None => vec![2, 3, 5, 6, 7],
    };
    let mut report = String::new();
    for (idx, n) in list.iter().enumerate() {
        if idx > 0 {
            report.push('\n');
        }
        report += &report_example(*n)?;
    }
    let path = expected.unwrap_or_else(default_expected_path);
    let expected_text = std::fs::read_to_string(&path)
        .map_err(|e| EngineError::Domain(format!("cannot read {}: {e}", path.display())))?;
    let mut ok = true;
    for n in &list {
        let header = format!("[example {n}]");
        let Some(want) = section(&expected_text, &header) else {
            eprintln!("expected file has no section {header}");
            ok = false;
            continue;
        };
        let got = section(&report, &header).unwrap_or_default();
        if want != got {
            eprintln!("mismatch in {header}:\n--- expected ---\n{want}\n--- got ---\n{got}");
            ok = false;
        }
    }
    emit(&output, &report)?;
    Ok(if ok { 0 } else { 4 })
}

/// Extract a `[example N]` section (header line included) up to the next
/// blank-line-delimited header.
fn section(text: &str, header: &str) -> Option<String> {
    let start = text.find(header)?;
    let rest = &text[start..];
    let end = rest.find("\n[").map(|e| e + 1).unwrap_or(rest.len());
    Some(rest[..end].trim_end().to_string() + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_extraction() {
        let t = "[example 2]\na: true\n\n[example 3]\nb: false\n";
        assert_eq!(section(t, "[example 2]").unwrap(), "[example 2]\na: true\n");
        assert_eq!(section(t, "[example 3]").unwrap(), "[example 3]\nb: false\n");
        assert!(section(t, "[example 9]").is_none());
    }

    #[test]
    fn example_reports_are_self_consistent() {
        for n in [5, 6] {
            let r = report_example(n).unwrap();
            assert!(!r.contains("false"), "example {n} report:\n{r}");
        }
        // the radial example is dicritical and does not preserve xy
        let r = report_example(7).unwrap();
        assert!(r.contains("a21(1) = -tau: true"));
        assert!(r.contains("b12(1) = -tau: true"));
        assert!(r.contains("xy invariant: false"));
        assert!(r.contains("dicritical: true"));
    }
}
