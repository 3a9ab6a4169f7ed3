//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs at full size, so expect a few minutes. The process exits 0 either
//! way; the lines are the result.

use std::time::Instant;

use halfplane::enumeration::ratio_limit;
use halfplane::harness::*;
use halfplane::law::PeelLaw;

fn subset(rep: &StatReport, keep: impl Fn(&str) -> bool) -> StatReport {
    let mut out = StatReport::new(rep.name.clone());
    for c in rep.checks.iter().filter(|c| keep(&c.name)) {
        out.push(c.clone());
    }
    out
}

fn line(n: u32, title: &str, rep: &StatReport, started: Instant) -> bool {
    println!(
        "criterion {n:>2} {}: {title} ({} checks, {:.1}s)",
        if rep.pass { "PASS" } else { "FAIL" },
        rep.checks.len(),
        started.elapsed().as_secs_f64()
    );
    for c in rep.failures() {
        println!("    failed {}: observed {} expected {} ({} {})", c.name, c.observed, c.expected, c.rule, c.tolerance);
        if let Some(n) = &c.note {
            println!("      {n}");
        }
    }
    rep.pass
}

fn main() {
    let mut passed = 0;
    let mut tally = |ok: bool| passed += u32::from(ok);

    let t = Instant::now();
    let en = verify_enumeration(&EnumBounds::default());
    let is_z = |n: &str| n.starts_with("z_");
    tally(line(1, "exact enumeration", &subset(&en, |n| !is_z(n)), t));
    tally(line(2, "partition function", &subset(&en, is_z), t));

    let t = Instant::now();
    let law = verify_law(&LawBounds::default());
    let is_tail = |n: &str| n.starts_with("tail_");
    tally(line(3, "law identities", &subset(&law, |n| !is_tail(n)), t));
    tally(line(4, "phase transition signatures", &subset(&law, is_tail), t));

    let t = Instant::now();
    let rep = sampler_report(&SamplerBounds::default()).unwrap_or_else(|e| failed("polygon_samplers", e));
    tally(line(5, "polygon samplers at enumerable size", &rep, t));

    let t = Instant::now();
    let rep = ball_report(&BallBounds::default()).unwrap_or_else(|e| failed("ball", e));
    tally(line(6, "ball builder", &rep, t));

    let t = Instant::now();
    let mut rep = StatReport::new("order_invariance");
    for a in ["1/3", "2/3"] {
        let law: PeelLaw = a.parse().expect("valid alpha");
        let r = order_invariance_experiment(&law, &OrderConfig::new(100_000, 7))
            .unwrap_or_else(|e| failed("order_invariance", e));
        rep.extend(StatReport { name: format!("alpha_{a}"), ..r });
    }
    tally(line(7, "order invariance", &rep, t));

    let t = Instant::now();
    let fl = finite_limit_experiment(&FiniteLimitConfig::new(60, 600, 100_000, 13))
        .unwrap_or_else(|e| failed("finite_limit", e));
    let mut rep = subset(&fl, |n| n == "alpha_frequency");
    for (a, m, n) in [(0.1, 60u64, 600u64), (1.0, 60, 60), (10.0, 600, 60)] {
        let (d1, d2) = (ratio_deviation(m, n), ratio_deviation(2 * m, 2 * n));
        rep.push(
            Check::within(format!("ratio_deviation_halving_a_{a}"), d2 / d1, 0.5, 0.1)
                .with_note(format!("limit of phi ratio (1,1) is {:.6}", ratio_limit(1, 1, a))),
        );
    }
    for c in fl.checks.iter().filter(|c| c.name != "alpha_frequency" && c.name != "ratio_deviation_halving") {
        println!("    info {}: observed {} expected {} ({})", c.name, c.observed, c.expected, if c.pass { "ok" } else { "off" });
    }
    tally(line(8, "finite polygons near the half-plane limit", &rep, t));

    let t = Instant::now();
    let rep = nonsimple_report(&NonSimpleBounds::default()).unwrap_or_else(|e| failed("nonsimple", e));
    tally(line(9, "non-simple expansion and core", &rep, t));

    let t = Instant::now();
    let rep = quad_constants_report(&[0.0, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, f64::INFINITY]);
    tally(line(10, "quadrangulation constants", &rep, t));

    println!("{passed}/10 criteria passed");
}

fn failed(name: &str, e: impl std::fmt::Display) -> StatReport {
    let mut r = StatReport::new(name);
    r.push(Check::flag("ran_without_error", false).with_note(e.to_string()));
    r
}
