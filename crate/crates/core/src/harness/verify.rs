//! Deterministic suites: enumeration, peeling law, quadrangulation constants.

use num_rational::BigRational;
use std::time::Instant;

use super::{Check, StatReport};
use crate::enumeration::{
    catalan, phi_closed, quad_count, rational_to_f64, theta_of_q, z_closed, z_closed_exact, z_series, BigCount,
    EnumError, PhiTable,
};
use crate::law::{
    branch_sub, branch_super, p_i, p_i_exact, p_i_from_partition, quad_event_probability, quad_limit_constants,
    tail_exponent, total_mass_partial, PeelLaw,
};

#[derive(Debug, Clone)]
pub struct EnumBounds {
    pub n_max: u64,
    pub m_max: u64,
    pub catalan_max: u64,
    pub z_m_max: u64,
    pub z_qs: Vec<f64>,
    pub z_cutoff: u64,
    pub budget_secs: f64,
}

impl Default for EnumBounds {
    fn default() -> Self {
        EnumBounds {
            n_max: 12,
            m_max: 12,
            catalan_max: 20,
            z_m_max: 10,
            z_qs: vec![0.0, 0.02, 0.05, 0.07],
            z_cutoff: 400,
            budget_secs: 10.0,
        }
    }
}

pub fn verify_enumeration(bounds: &EnumBounds) -> StatReport {
    verify_enumeration_with(bounds, &phi_closed)
}

/// As [`verify_enumeration`], with the closed form replaced by `closed`.
/// Used to make sure a wrong formula is caught.
pub fn verify_enumeration_with(
    bounds: &EnumBounds,
    closed: &dyn Fn(u64, u64) -> Result<BigCount, EnumError>,
) -> StatReport {
    let start = Instant::now();
    let mut rep = StatReport::new("enumeration");
    rep.param("n_max", bounds.n_max).param("m_max", bounds.m_max);

    let mismatches = match PhiTable::build(bounds.n_max, bounds.m_max) {
        Ok(table) => {
            let mut bad = 0u64;
            for m in 2..=bounds.m_max {
                for n in 0..=bounds.n_max {
                    let ok = matches!((closed(n, m), table.get(n, m)), (Ok(a), Ok(b)) if a == b);
                    bad += u64::from(!ok);
                }
            }
            bad as f64
        }
        Err(_) => f64::INFINITY,
    };
    rep.push(Check::equal("closed_vs_recurrence_mismatches", mismatches, 0.0));

    let catalan_bad = (0..=bounds.catalan_max)
        .filter(|&k| closed(0, k + 2).map_or(true, |v| v != catalan(k)))
        .count();
    rep.push(Check::equal("catalan_mismatches", catalan_bad as f64, 0.0));

    for (n, m, v) in [(0u64, 2u64, 1u64), (0, 3, 1), (1, 3, 4), (0, 4, 2), (0, 5, 5)] {
        let got = closed(n, m).map_or(f64::NAN, |c| c.to_f64());
        rep.push(Check::equal(format!("phi_{n}_{m}"), got, v as f64));
    }

    // closed Z against the truncated series and its tail bound
    let mut violations = 0u64;
    let mut worst = 0.0f64;
    for &q in &bounds.z_qs {
        let Ok(theta) = theta_of_q(q) else {
            violations += 1;
            continue;
        };
        for m in 2..=bounds.z_m_max {
            match (z_series(m, q, bounds.z_cutoff), z_closed(m, &theta)) {
                (Ok(b), Ok(z)) => {
                    let z = z.to_f64();
                    let slack = 1e-12 * z;
                    let below = b.lower - z;
                    let above = z - (b.lower + b.tail_bound);
                    if below > slack || above > slack {
                        violations += 1;
                    }
                    worst = worst.max(below.max(above) / z);
                }
                _ => violations += 1,
            }
        }
    }
    rep.push(Check::equal("z_bracket_violations", violations as f64, 0.0));
    rep.push(Check::at_most("z_bracket_worst_relative_excess", worst, 1e-12));

    let sixth = BigRational::new(1.into(), 6.into());
    for (m, num, den) in [(2u64, 9i64, 8i64), (3, 27, 16)] {
        let want = BigRational::new(num.into(), den.into());
        let got = z_closed_exact(m, &sixth);
        let ok = got.as_ref().is_ok_and(|w| w.0 == want);
        let note = got.map_or_else(|e| e.to_string(), |w| w.0.to_string());
        rep.push(Check::flag(format!("z_{m}_critical_is_{num}/{den}"), ok).with_note(note));
    }

    rep.push(Check::at_most("runtime_secs", start.elapsed().as_secs_f64(), bounds.budget_secs));
    rep
}

#[derive(Debug, Clone)]
pub struct MassCheck {
    pub alpha: String,
    pub cap: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct TailCheck {
    pub alpha: String,
    pub lo: u64,
    pub hi: u64,
    /// Expected power-law exponent, or `None` to check the exponential rate.
    pub exponent: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct LawBounds {
    pub alphas: Vec<String>,
    pub identity_i_max: u64,
    pub identity_tolerance: f64,
    pub masses: Vec<MassCheck>,
    pub tails: Vec<TailCheck>,
}

impl Default for LawBounds {
    fn default() -> Self {
        let s = |x: &str| x.to_string();
        LawBounds {
            alphas: vec![s("1/10"), s("1/3"), s("2/3"), s("4/5")],
            identity_i_max: 50,
            identity_tolerance: 1e-12,
            masses: vec![
                MassCheck { alpha: s("0.9"), cap: 200, tolerance: 1e-12 },
                MassCheck { alpha: s("2/3"), cap: 10_000, tolerance: 0.01 },
            ],
            tails: vec![
                TailCheck { alpha: s("2/3"), lo: 100, hi: 10_000, exponent: Some(-2.5), tolerance: 0.05 },
                TailCheck { alpha: s("1/3"), lo: 100, hi: 10_000, exponent: Some(-1.5), tolerance: 0.05 },
                TailCheck { alpha: s("0.8"), lo: 50, hi: 300, exponent: None, tolerance: 1e-3 },
            ],
        }
    }
}

pub fn verify_law(bounds: &LawBounds) -> StatReport {
    let mut rep = StatReport::new("law");
    let parse = |a: &str| a.parse::<PeelLaw>();

    let two_thirds = BigRational::new(2.into(), 3.into());
    let ninth = BigRational::new(1.into(), 9.into());
    rep.push(Check::flag("beta_two_thirds_subcritical_branch", branch_sub(&two_thirds).0 == ninth));
    rep.push(Check::flag("beta_two_thirds_supercritical_branch", branch_super(&two_thirds).0 == ninth));

    for a in &bounds.alphas {
        let Ok(law) = parse(a) else {
            rep.push(Check::flag(format!("alpha_{a}_parses"), false));
            continue;
        };
        let mut worst = 0.0f64;
        let mut exact_agree = true;
        for i in 1..=bounds.identity_i_max {
            match (p_i_from_partition(&law, i), p_i_exact(&law, i)) {
                (Some(z), Some(e)) => {
                    let zf = rational_to_f64(&z);
                    worst = worst.max((p_i(&law, i) - zf).abs() / zf);
                    exact_agree &= z == e;
                }
                _ => {
                    worst = f64::INFINITY;
                    exact_agree = false;
                }
            }
        }
        rep.push(Check::at_most(format!("p_i_vs_partition_rel_err_alpha_{a}"), worst, bounds.identity_tolerance));
        rep.push(Check::flag(format!("p_i_exact_identity_alpha_{a}"), exact_agree));
    }

    for mc in &bounds.masses {
        let total = parse(&mc.alpha).map_or(f64::NAN, |l| total_mass_partial(&l, mc.cap));
        rep.push(Check::within(format!("total_mass_alpha_{}_cap_{}", mc.alpha, mc.cap), total, 1.0, mc.tolerance));
    }

    for tc in &bounds.tails {
        let fit = parse(&tc.alpha).ok().and_then(|l| tail_exponent(&l, tc.lo, tc.hi).ok().map(|f| (l, f)));
        let check = match (fit, tc.exponent) {
            (Some((_, f)), Some(e)) => Check::within(format!("tail_exponent_alpha_{}", tc.alpha), f.exponent, e, tc.tolerance),
            (Some((l, f)), None) => Check::within(format!("tail_rate_alpha_{}", tc.alpha), f.rate, l.gamma().ln(), tc.tolerance),
            (None, _) => Check::flag(format!("tail_fit_alpha_{}", tc.alpha), false),
        };
        rep.push(check);
    }
    rep
}

/// Constants of the quadrangular analogue on a grid of aspect ratios.
pub fn quad_constants_report(a_grid: &[f64]) -> StatReport {
    let mut rep = StatReport::new("quad_constants");
    rep.param("grid", format!("{a_grid:?}"));
    let (a0, b0) = quad_limit_constants(0.0);
    let (ainf, binf) = quad_limit_constants(f64::INFINITY);
    rep.push(Check::equal("alpha4_at_0", a0, 3.0 / 8.0));
    rep.push(Check::equal("alpha4_at_infinity", ainf, 0.0));
    rep.push(Check::within("beta4_at_infinity", binf, (4.0f64 / 27.0).sqrt(), 1e-12));
    rep.push(Check::within("beta4_at_0", b0, (1.0f64 / 54.0).sqrt(), 1e-12));
    rep.push(Check::rel_within("alpha4_at_1", quad_limit_constants(1.0).0, 3.0 / 80.0, 1e-12));
    let q40 = quad_count(2, 0).map_or(f64::NAN, |c| c.to_f64());
    rep.push(Check::equal("quad_count_4gon_no_inner", q40, 1.0));
    let mut worst = 0.0f64;
    let mut empty_event_ok = true;
    let mut monotone = true;
    let mut last_beta = f64::NEG_INFINITY;
    let mut grid: Vec<f64> = a_grid.to_vec();
    grid.sort_by(|x, y| x.total_cmp(y));
    for &a in &grid {
        let (al, be) = quad_limit_constants(a);
        worst = worst.max((quad_event_probability(1, 2, a) - al).abs() / al.max(f64::MIN_POSITIVE));
        empty_event_ok &= quad_event_probability(0, 0, a) == 1.0;
        monotone &= be >= last_beta;
        last_beta = be;
    }
    rep.push(Check::at_most("single_face_event_vs_alpha4_rel_err", worst, 1e-12));
    rep.push(Check::flag("empty_event_has_probability_one", empty_event_ok));
    rep.push(Check::flag("beta4_increases_with_a", monotone));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_default_passes() {
        let r = verify_enumeration(&EnumBounds::default());
        assert!(r.pass, "{r}");
        assert!(r.is_consistent());
    }

    #[test]
    fn perturbed_formula_fails() {
        let wrong = |n: u64, m: u64| {
            let v = phi_closed(n, m)?;
            Ok(if (n, m) == (3, 4) { BigCount(v.0 + 1u32) } else { v })
        };
        let r = verify_enumeration_with(&EnumBounds::default(), &wrong);
        assert!(!r.pass);
        assert_eq!(r.check("closed_vs_recurrence_mismatches").unwrap().observed, 1.0);
    }

    #[test]
    fn law_default_passes() {
        let r = verify_law(&LawBounds::default());
        assert!(r.pass, "{r}");
    }

    #[test]
    fn quad_grid_passes() {
        let r = quad_constants_report(&[0.0, 0.1, 0.5, 1.0, 3.0, 10.0, f64::INFINITY]);
        assert!(r.pass, "{r}");
    }
}
