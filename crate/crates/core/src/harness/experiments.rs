//! Seeded Monte Carlo experiments. Trials fan out over rayon, each on its
//! own random stream, and only counters come back.

use rayon::prelude::*;
use std::collections::BTreeMap;

use super::stats::{chi_square_gof, total_variation};
use super::{Check, StatReport};
use crate::enumeration::{ln_phi_ratio, ratio_limit};
use crate::law::{p_ik, PeelEvent, PeelLaw, SampleLimits, Side};
use crate::map::eventlog::canonically_equal;
use crate::map::{validate_halfplane, HalfPlaneMap, PeelSite};
use crate::rng::{stream_rng, trial_streams};
use crate::sampler::ball::{peel_once, StepEnv};
use crate::sampler::{
    boltzmann_polygon_with, build_ball_with, check_hull, core, expand_nonsimple, inner_vertex_total, peel_steps,
    reveal_around, root_event_of, uniform_polygon_with, BallConfig, EdgeSelector, NonSimpleParams, PeekingSelector,
    Result, SamplerError, Schedule, ScheduleKind,
};

type Counts = BTreeMap<String, u64>;

fn merge(mut a: Counts, b: Counts) -> Counts {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// Runs `trials` independent trials and adds up the keys they return.
fn tally<F>(trials: u64, f: F) -> Result<Counts>
where
    F: Fn(u64) -> Result<Vec<String>> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            f(t).map(|keys| {
                let mut c = Counts::new();
                for k in keys {
                    *c.entry(k).or_default() += 1;
                }
                c
            })
        })
        .try_reduce(Counts::new, |a, b| Ok(merge(a, b)))
}

fn count(c: &Counts, key: &str) -> u64 {
    c.get(key).copied().unwrap_or(0)
}

/// Coarse label of a root-face event.
fn event_key(ev: PeelEvent) -> String {
    match ev {
        PeelEvent::Alpha => "alpha".into(),
        PeelEvent::Boundary { side, i, k } => {
            let s = match side {
                Side::Right => "R",
                Side::Left => "L",
            };
            let i = if i >= 3 { "3+".to_string() } else { i.to_string() };
            let k = if k == 0 { "0" } else { "+" };
            format!("{s}{i}k{k}")
        }
    }
}

// ---- finite polygons against the half-plane limit

#[derive(Debug, Clone)]
pub struct FiniteLimitConfig {
    pub m: u64,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub sigmas: f64,
    /// Allowed relative spread around one half for the deviation ratio.
    pub halving_tolerance: f64,
}

impl FiniteLimitConfig {
    pub fn new(m: u64, n: u64, trials: u64, seed: u64) -> Self {
        FiniteLimitConfig { m, n, trials, seed, sigmas: 3.0, halving_tolerance: 0.2 }
    }
}

/// Largest relative gap between `φ_{n−k,m−j}/φ_{n,m}` and its limit over
/// `j, k ∈ {0, 1}`, with `a = m/n`.
pub fn ratio_deviation(m: u64, n: u64) -> f64 {
    let a = if n == 0 { f64::INFINITY } else { m as f64 / n as f64 };
    let mut worst = 0.0f64;
    for (j, k) in [(1u64, 0u64), (0, 1), (1, 1)] {
        if m < j + 2 || n < k {
            return f64::NAN;
        }
        let exact = ln_phi_ratio(n - k, m - j, n, m).exp();
        let limit = ratio_limit(j, k, a);
        worst = worst.max((exact - limit).abs() / limit);
    }
    worst
}

pub fn finite_limit_experiment(cfg: &FiniteLimitConfig) -> Result<StatReport> {
    let (m, n) = (cfg.m, cfg.n);
    if m < 3 || n < 1 {
        return Err(SamplerError::Domain(format!("need m >= 3 and n >= 1, got ({m}, {n})")));
    }
    let a = m as f64 / n as f64;
    let alpha = 2.0 / (2.0 * a + 3.0);
    let law = PeelLaw::from_alpha(alpha)?;
    let mut rep = StatReport::new("finite_limit");
    rep.param("m", m).param("n", n).param("trials", cfg.trials).param("seed", cfg.seed);
    rep.param("a", a).param("alpha", alpha).param("beta", law.beta());

    let d1 = ratio_deviation(m, n);
    let d2 = ratio_deviation(2 * m, 2 * n);
    rep.param("ratio_deviation", d1).param("ratio_deviation_doubled", d2);
    rep.push(
        Check::within("ratio_deviation_halving", d2 / d1, 0.5, 0.5 * cfg.halving_tolerance)
            .with_note(format!("deviation {d1:.4e} at ({m}, {n}), {d2:.4e} at ({}, {})", 2 * m, 2 * n)),
    );

    let counts = tally(cfg.trials, |t| {
        let fm = uniform_polygon_with(m, n, &mut stream_rng(cfg.seed, t))?;
        let ev = root_event_of(&fm.code()?, m)?;
        Ok(vec![event_key(ev)])
    })?;
    let k = cfg.sigmas;
    rep.push(Check::sigma_band("alpha_frequency", count(&counts, "alpha"), cfg.trials, alpha, k));
    for (key, i) in [("R1k0", 1), ("L1k0", 1), ("R2k0", 2), ("L2k0", 2)] {
        rep.push(Check::sigma_band(format!("{key}_frequency"), count(&counts, key), cfg.trials, p_ik(&law, i, 0), k));
    }
    Ok(rep)
}

// ---- order of peeling

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorChoice {
    Schedule(ScheduleKind),
    /// The invalid selector that looks ahead at the event stream.
    Peeking,
}

impl SelectorChoice {
    fn build(self, rng: crate::rng::ChaCha8Rng) -> Box<dyn EdgeSelector> {
        match self {
            SelectorChoice::Schedule(kind) => Schedule::new(kind, 0).selector_from(rng),
            SelectorChoice::Peeking => Box::new(PeekingSelector),
        }
    }

    fn label(self) -> String {
        match self {
            SelectorChoice::Schedule(k) => k.to_string(),
            SelectorChoice::Peeking => "peeking".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrderConfig {
    pub trials: u64,
    pub seed: u64,
    pub radius: u64,
    pub tolerance: f64,
    /// Root degrees at or above this share one bin.
    pub degree_cap: usize,
}

impl OrderConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        OrderConfig { trials, seed, radius: 1, tolerance: 0.02, degree_cap: 12 }
    }
}

/// Root degree and root-face event of one ball, both read off after every
/// face at the root vertex has been revealed.
fn root_profile(law: &PeelLaw, cfg: &OrderConfig, choice: SelectorChoice, trial: u64) -> Result<Vec<String>> {
    let bc = BallConfig::default();
    let (mut ev_rng, sel_rng) = trial_streams(cfg.seed, trial);
    let mut sel = choice.build(sel_rng);
    let mut ball = build_ball_with(law, cfg.radius, &mut ev_rng, sel.as_mut(), &bc)?;
    if ball.anomaly.is_some() {
        return Ok(vec!["anomaly".into()]);
    }
    let v = ball.map.root_vertex();
    reveal_around(&mut ball.map, v, &mut ev_rng, bc.seal_above)?;
    let deg = ball.map.store().degree(v).min(cfg.degree_cap);
    let ev = ball.map.classify_root_face()?;
    Ok(vec![format!("deg:{deg}"), format!("ev:{}", event_key(ev))])
}

fn split(c: &Counts, prefix: &str) -> Counts {
    c.iter().filter(|(k, _)| k.starts_with(prefix)).map(|(k, v)| (k.clone(), *v)).collect()
}

/// Total variation between root statistics under leftmost and uniformly
/// random schedules.
pub fn order_invariance_experiment(law: &PeelLaw, cfg: &OrderConfig) -> Result<StatReport> {
    order_invariance_with(
        law,
        cfg,
        SelectorChoice::Schedule(ScheduleKind::LeftmostNearRoot),
        SelectorChoice::Schedule(ScheduleKind::UniformRandomExposed),
    )
}

pub fn order_invariance_with(
    law: &PeelLaw,
    cfg: &OrderConfig,
    first: SelectorChoice,
    second: SelectorChoice,
) -> Result<StatReport> {
    let mut rep = StatReport::new("order_invariance");
    rep.param("alpha", law.alpha()).param("trials", cfg.trials).param("seed", cfg.seed).param("radius", cfg.radius);
    rep.param("first", first.label()).param("second", second.label());
    // the second fleet uses trial numbers after the first, so no stream is shared
    let a = tally(cfg.trials, |t| root_profile(law, cfg, first, t))?;
    let b = tally(cfg.trials, |t| root_profile(law, cfg, second, cfg.trials + t))?;
    rep.param("anomalies", count(&a, "anomaly") + count(&b, "anomaly"));
    rep.push(Check::at_most("tv_root_degree", total_variation(&split(&a, "deg:"), &split(&b, "deg:")), cfg.tolerance));
    rep.push(Check::at_most("tv_root_event", total_variation(&split(&a, "ev:"), &split(&b, "ev:")), cfg.tolerance));
    Ok(rep)
}

// ---- polygon samplers at enumerable size

#[derive(Debug, Clone)]
pub struct SamplerBounds {
    pub trials: u64,
    pub seed: u64,
    pub sigmas: f64,
    pub min_p_value: f64,
}

impl Default for SamplerBounds {
    fn default() -> Self {
        SamplerBounds { trials: 100_000, seed: 5, sigmas: 3.0, min_p_value: 1e-3 }
    }
}

/// Case frequencies of the uniform triangle with one inner vertex, and the
/// empty-triangle probability of the critical Boltzmann triangle.
pub fn sampler_report(b: &SamplerBounds) -> Result<StatReport> {
    let mut rep = StatReport::new("polygon_samplers");
    rep.param("trials", b.trials).param("seed", b.seed);
    let uni = tally(b.trials, |t| {
        let fm = uniform_polygon_with(3, 1, &mut stream_rng(b.seed, t))?;
        Ok(vec![event_key(root_event_of(&fm.code()?, 3)?)])
    })?;
    // apex inside; apex opposite with the vertex right of it; or left of it
    let cases = [("alpha", 0.5), ("R1k+", 0.25), ("R1k0", 0.25)];
    for (key, p) in cases {
        rep.push(Check::sigma_band(format!("uniform_3_1_{key}"), count(&uni, key), b.trials, p, b.sigmas));
    }
    let observed: Vec<u64> = cases.iter().map(|(k, _)| count(&uni, k)).collect();
    let probs: Vec<f64> = cases.iter().map(|(_, p)| *p).collect();
    let chi = chi_square_gof(&observed, &probs, 5.0);
    rep.push(Check::at_least("uniform_3_1_chi_square_p", chi.p_value, b.min_p_value));
    let other = b.trials - observed.iter().sum::<u64>();
    rep.push(Check::equal("uniform_3_1_unexpected_cases", other as f64, 0.0));

    let q = 2.0 / 27.0;
    let boltz = tally(b.trials, |t| {
        let fm = boltzmann_polygon_with(3, q, &mut stream_rng(b.seed ^ 0xB017, t))?;
        Ok(vec![fm.inner_count().min(3).to_string()])
    })?;
    rep.push(Check::sigma_band("boltzmann_3_critical_empty", count(&boltz, "0"), b.trials, 16.0 / 27.0, b.sigmas));
    Ok(rep)
}

// ---- ball builder

#[derive(Debug, Clone)]
pub struct BallBounds {
    pub alphas: Vec<String>,
    pub builds: u64,
    pub max_radius: u64,
    pub readback_steps: u64,
    pub seed: u64,
}

impl Default for BallBounds {
    fn default() -> Self {
        BallBounds {
            alphas: ["0", "1/3", "2/3", "4/5"].map(String::from).to_vec(),
            builds: 1000,
            max_radius: 4,
            readback_steps: 100_000,
            seed: 11,
        }
    }
}

/// Draws one event on a fresh floor at the root edge and reads it back.
fn readback_once(law: &PeelLaw, seed: u64, t: u64) -> Result<bool> {
    let mut rng = stream_rng(seed, t);
    let mut map = HalfPlaneMap::new_floor(1)?;
    let h = map.prepare(PeelSite::Edge(0))?;
    let env = StepEnv { law, limits: SampleLimits::default(), seal_above: Some(3000), margin: Some(2), record: false };
    let (ev, _) = peel_once(&mut map, h, &mut rng, &env)?;
    Ok(map.classify_root_face()? == ev)
}

pub fn ball_report(b: &BallBounds) -> Result<StatReport> {
    let mut rep = StatReport::new("ball");
    rep.param("builds", b.builds).param("max_radius", b.max_radius).param("seed", b.seed);
    let per_alpha = b.readback_steps / b.alphas.len().max(1) as u64;
    for (ai, a) in b.alphas.iter().enumerate() {
        let law: PeelLaw = a.parse()?;
        let seed = b.seed.wrapping_add(ai as u64 * 1_000_003);
        let cfg = BallConfig::default();
        let res = tally(b.builds, |t| {
            let r = 1 + t % b.max_radius;
            let (mut ev, sel) = trial_streams(seed, t);
            let mut selector = cfg.schedule.selector_from(sel);
            let ball = build_ball_with(&law, r, &mut ev, selector.as_mut(), &cfg)?;
            let mut keys = Vec::new();
            if ball.anomaly.is_some() {
                keys.push("anomaly".into());
            }
            if !validate_halfplane(&ball.map).is_ok() {
                keys.push("invalid".into());
            }
            if check_hull(&ball.map, r).is_err() {
                keys.push("hull".into());
            }
            keys.push(format!("inner:{}", u64::from(inner_vertex_total(&ball.map) > 0)));
            Ok(keys)
        })?;
        rep.push(Check::equal(format!("alpha_{a}_anomalies"), count(&res, "anomaly") as f64, 0.0));
        rep.push(Check::equal(format!("alpha_{a}_invalid"), count(&res, "invalid") as f64, 0.0));
        rep.push(Check::equal(format!("alpha_{a}_hull_failures"), count(&res, "hull") as f64, 0.0));
        if law.alpha() == 0.0 {
            rep.push(Check::equal(format!("alpha_{a}_builds_with_inner_vertices"), count(&res, "inner:1") as f64, 0.0));
        }
        let rb = tally(per_alpha, |t| {
            Ok(vec![if readback_once(&law, seed ^ 0x5EED, t)? { "match" } else { "mismatch" }.into()])
        })?;
        rep.push(Check::equal(format!("alpha_{a}_readback_mismatches"), count(&rb, "mismatch") as f64, 0.0));
    }
    Ok(rep)
}

// ---- non-simple expansion

#[derive(Debug, Clone)]
pub struct NonSimpleBounds {
    pub alpha: String,
    pub q_geos: Vec<f64>,
    pub trials: u64,
    pub steps: u64,
    pub seed: u64,
    pub sigmas: f64,
    pub min_p_value: f64,
}

impl Default for NonSimpleBounds {
    fn default() -> Self {
        NonSimpleBounds {
            alpha: "4/5".into(),
            q_geos: vec![0.0, 0.3, 0.6],
            trials: 1000,
            steps: 40,
            seed: 21,
            sigmas: 3.0,
            min_p_value: 1e-3,
        }
    }
}

/// `core ∘ expand` on peeled maps, with the multiplicity histogram and the
/// loop placement tested against their laws.
pub fn nonsimple_report(b: &NonSimpleBounds) -> Result<StatReport> {
    let law: PeelLaw = b.alpha.parse()?;
    let mut rep = StatReport::new("nonsimple");
    rep.param("alpha", &b.alpha).param("trials", b.trials).param("steps", b.steps).param("seed", b.seed);
    const MAX_G: usize = 40;
    for (qi, &q) in b.q_geos.iter().enumerate() {
        let params = NonSimpleParams::new(q, Some(law.alpha()));
        let res = tally(b.trials, |t| {
            let seed = b.seed.wrapping_mul(1000).wrapping_add(qi as u64 * b.trials + t);
            let (m, _) = peel_steps(&law, b.steps, seed, Schedule::leftmost())?;
            let (e, st) = expand_nonsimple(&m, &params, seed)?;
            let back = core(&e)?;
            let mut keys = Vec::new();
            if !validate_halfplane(&e).is_ok() {
                keys.push("invalid".into());
            }
            if back != m || !canonically_equal(&back, &m)? {
                keys.push("mismatch".into());
            }
            for (g, &c) in st.multiplicity.iter().enumerate() {
                for _ in 0..c {
                    keys.push(format!("g:{:02}", (g + 1).min(MAX_G)));
                }
            }
            keys.extend(std::iter::repeat("loop".to_string()).take(st.loops as usize));
            keys.extend(std::iter::repeat("origin".to_string()).take(st.loops_at_origin as usize));
            Ok(keys)
        })?;
        rep.push(Check::equal(format!("q_{q}_invalid_expansions"), count(&res, "invalid") as f64, 0.0));
        rep.push(Check::equal(format!("q_{q}_core_mismatches"), count(&res, "mismatch") as f64, 0.0));
        let counts: Vec<u64> = (1..=MAX_G).map(|g| count(&res, &format!("g:{g:02}"))).collect();
        let edges: u64 = counts.iter().sum();
        rep.param(&format!("q_{q}_edges"), edges);
        if q == 0.0 {
            rep.push(Check::equal(format!("q_{q}_multiple_edges"), (edges - counts[0]) as f64, 0.0));
            continue;
        }
        let mut probs: Vec<f64> = (1..MAX_G).map(|g| (1.0 - q) * q.powi(g as i32 - 1)).collect();
        probs.push(q.powi(MAX_G as i32 - 1));
        let chi = chi_square_gof(&counts, &probs, 5.0);
        rep.push(
            Check::at_least(format!("q_{q}_multiplicity_chi_square_p"), chi.p_value, b.min_p_value)
                .with_note(format!("statistic {:.3} on {} dof", chi.statistic, chi.dof)),
        );
        let loops = count(&res, "loop");
        rep.push(Check::sigma_band(format!("q_{q}_loop_at_origin"), count(&res, "origin"), loops, 0.5, b.sigmas));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_labels() {
        assert_eq!(event_key(PeelEvent::Alpha), "alpha");
        assert_eq!(event_key(PeelEvent::Boundary { side: Side::Left, i: 7, k: 2 }), "L3+k+");
        assert_eq!(event_key(PeelEvent::Boundary { side: Side::Right, i: 1, k: 0 }), "R1k0");
    }

    #[test]
    fn deviation_shrinks_with_size() {
        for (m, n) in [(6u64, 60u64), (60, 60), (600, 60)] {
            let r = ratio_deviation(2 * m, 2 * n) / ratio_deviation(m, n);
            assert!(r < 0.7 && r > 0.3, "{m} {n} {r}");
        }
    }

    #[test]
    fn small_runs_are_reproducible() {
        let law: PeelLaw = "2/3".parse().unwrap();
        let cfg = OrderConfig::new(200, 3);
        let a = order_invariance_experiment(&law, &cfg).unwrap();
        let b = order_invariance_experiment(&law, &cfg).unwrap();
        assert_eq!(a, b);
        let f = finite_limit_experiment(&FiniteLimitConfig::new(6, 20, 300, 1)).unwrap();
        assert_eq!(f, finite_limit_experiment(&FiniteLimitConfig::new(6, 20, 300, 1)).unwrap());
    }

    #[test]
    fn peeking_is_caught() {
        let law: PeelLaw = "2/3".parse().unwrap();
        let cfg = OrderConfig::new(2000, 8);
        let r = order_invariance_with(
            &law,
            &cfg,
            SelectorChoice::Schedule(ScheduleKind::LeftmostNearRoot),
            SelectorChoice::Peeking,
        )
        .unwrap();
        assert!(!r.pass, "{r}");
    }

    #[test]
    fn small_suites_pass() {
        let s = sampler_report(&SamplerBounds { trials: 4000, ..Default::default() }).unwrap();
        assert!(s.pass, "{s}");
        let b = ball_report(&BallBounds { builds: 40, readback_steps: 400, ..Default::default() }).unwrap();
        assert!(b.pass, "{b}");
        let n = nonsimple_report(&NonSimpleBounds { trials: 30, ..Default::default() }).unwrap();
        assert!(n.pass, "{n}");
    }
}
