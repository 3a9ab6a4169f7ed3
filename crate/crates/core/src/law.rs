//! Law of one peeling step.
//!
//! The peeled face is either a triangle with a new inner vertex (probability
//! `α`) or a triangle whose third corner lies on the boundary `i` edges to the
//! left or right, enclosing a hole with `k` inner vertices.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::enumeration::{
    ln_phi, ln_z_closed, phi_ratio_next_n, rational_to_f64, z_closed_exact,
};
use crate::numerics::{ln_central_binomial_over_4n, CompensatedSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("jump length exceeded the cap {0}")]
    JumpCap(u64),
    #[error("inverse-cdf leak: draw {draw} above accumulated mass {mass}")]
    NumericLeak { draw: f64, mass: f64 },
}

pub type Result<T> = std::result::Result<T, LawError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// One step of the peeling decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PeelEvent {
    /// Third corner is a new inner vertex.
    Alpha,
    /// Third corner is the boundary vertex `i` steps away on `side`; the hole
    /// cut off has `k` inner vertices.
    Boundary { side: Side, i: u64, k: u64 },
}

impl fmt::Display for PeelEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeelEvent::Alpha => f.write_str("alpha"),
            PeelEvent::Boundary { side, i, k } => write!(f, "{side}({i},{k})"),
        }
    }
}

/// Exact parameters when `α` is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLaw {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub theta: BigRational,
    pub q: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeelLaw {
    alpha: f64,
    beta: f64,
    theta: f64,
    q: f64,
    phase: Phase,
    exact: Option<ExactLaw>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

impl PeelLaw {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(LawError::Domain(format!("alpha = {alpha} outside [0, 1)")));
        }
        let crit = 2.0 / 3.0;
        let phase = if (alpha - crit).abs() <= 1e-15 {
            Phase::Critical
        } else if alpha < crit {
            Phase::Subcritical
        } else {
            Phase::Supercritical
        };
        let (beta, theta) = if phase == Phase::Supercritical {
            (alpha * (1.0 - alpha) / 2.0, (1.0 - alpha) / 2.0)
        } else {
            ((2.0 - alpha) * (2.0 - alpha) / 16.0, alpha / 4.0)
        };
        Ok(PeelLaw { alpha, beta, theta, q: alpha * beta, phase, exact: None })
    }

    pub fn from_rational(alpha: BigRational) -> Result<Self> {
        if alpha.is_negative() || alpha >= BigRational::one() {
            return Err(LawError::Domain(format!("alpha = {alpha} outside [0, 1)")));
        }
        let crit = rat(2, 3);
        let phase = match alpha.cmp(&crit) {
            std::cmp::Ordering::Less => Phase::Subcritical,
            std::cmp::Ordering::Equal => Phase::Critical,
            std::cmp::Ordering::Greater => Phase::Supercritical,
        };
        let (beta, theta) = if phase == Phase::Supercritical {
            branch_super(&alpha)
        } else {
            branch_sub(&alpha)
        };
        let q = &alpha * &beta;
        let exact = ExactLaw { alpha, beta, theta, q };
        Ok(PeelLaw {
            alpha: rational_to_f64(&exact.alpha),
            beta: rational_to_f64(&exact.beta),
            theta: rational_to_f64(&exact.theta),
            q: rational_to_f64(&exact.q),
            phase,
            exact: Some(exact),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// Weight per inner vertex of a hole patch, `α·β`.
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn exact(&self) -> Option<&ExactLaw> {
        self.exact.as_ref()
    }

    /// `2/α − 2`, the exponential decay base of the supercritical tail.
    pub fn gamma(&self) -> f64 {
        2.0 / self.alpha - 2.0
    }
}

/// `β` and `θ` from the branch valid for `α <= 2/3`.
pub fn branch_sub(alpha: &BigRational) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(2.into());
    let d = &two - alpha;
    (&d * &d / BigRational::from_integer(16.into()), alpha / BigRational::from_integer(4.into()))
}

/// `β` and `θ` from the branch valid for `α >= 2/3`.
pub fn branch_super(alpha: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    (alpha * (&one - alpha) / &two, (&one - alpha) / two)
}

/// Parses `"2/3"` as an exact law and `"0.3"` as a float law.
impl FromStr for PeelLaw {
    type Err = LawError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let n: i64 = a.trim().parse().map_err(|_| LawError::Domain(format!("bad alpha {s}")))?;
            let d: i64 = b.trim().parse().map_err(|_| LawError::Domain(format!("bad alpha {s}")))?;
            if d == 0 {
                return Err(LawError::Domain("zero denominator".into()));
            }
            return PeelLaw::from_rational(rat(n, d));
        }
        if let Some(r) = parse_decimal(s) {
            return PeelLaw::from_rational(r);
        }
        let v: f64 = s.parse().map_err(|_| LawError::Domain(format!("bad alpha {s}")))?;
        PeelLaw::from_alpha(v)
    }
}

/// Plain decimal literal such as `0.35` as an exact rational.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
        return None;
    }
    let digits: num_bigint::BigInt = format!("0{int}{frac}").parse().ok()?;
    let den = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    Some(BigRational::new(digits, den))
}

/// One-sided probability of a boundary event at distance `i` enclosing `k` vertices.
pub fn p_ik(law: &PeelLaw, i: u64, k: u64) -> f64 {
    assert!(i >= 1);
    if k > 0 && law.alpha == 0.0 {
        return 0.0;
    }
    let mut ln = ln_phi(k, i + 1) + (i + k) as f64 * law.beta.ln();
    if k > 0 {
        ln += k as f64 * law.alpha.ln();
    }
    ln.exp()
}

fn ln_p_i(law: &PeelLaw, i: u64) -> f64 {
    let x = i as f64;
    // 2/4^i (2i-2)!/((i-1)!(i+1)!) = t_{i-1} / (2 i (i+1))
    let base = ln_central_binomial_over_4n(i - 1) - (2.0 * x * (x + 1.0)).ln();
    match law.phase {
        Phase::Subcritical | Phase::Critical => base + ((1.0 - 1.5 * law.alpha) * x + 1.0).ln(),
        Phase::Supercritical => base + x * law.gamma().ln() + ((3.0 * law.alpha - 2.0) * x + 1.0).ln(),
    }
}

/// Two-sided mass of boundary events at distance `i`.
pub fn p_i(law: &PeelLaw, i: u64) -> f64 {
    assert!(i >= 1);
    ln_p_i(law, i).exp()
}

/// Exact `p_i` for a rational law and `i <= 64`.
pub fn p_i_exact(law: &PeelLaw, i: u64) -> Option<BigRational> {
    let ex = law.exact.as_ref()?;
    if i == 0 || i > 64 {
        return None;
    }
    let fact = |n: u64| -> BigRational {
        let mut a = num_bigint::BigInt::one();
        for t in 2..=n {
            a *= t;
        }
        BigRational::from_integer(a)
    };
    let one = BigRational::one();
    let ir = BigRational::from_integer((i as i64).into());
    let four_i = BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(4), i as usize));
    let base = BigRational::from_integer(2.into()) / four_i * fact(2 * i - 2) / (fact(i - 1) * fact(i + 1));
    let factor = match law.phase {
        Phase::Subcritical | Phase::Critical => (&one - rat(3, 2) * &ex.alpha) * &ir + &one,
        Phase::Supercritical => {
            let g = BigRational::from_integer(2.into()) / &ex.alpha - BigRational::from_integer(2.into());
            num_traits::pow(g, i as usize) * ((rat(3, 1) * &ex.alpha - rat(2, 1)) * &ir + &one)
        }
    };
    Some(base * factor)
}

/// `2 β^i Z_{i+1}(αβ)`, the same mass assembled from the partition function.
pub fn p_i_from_partition(law: &PeelLaw, i: u64) -> Option<BigRational> {
    let ex = law.exact.as_ref()?;
    let z = z_closed_exact(i + 1, &ex.theta).ok()?.0;
    Some(BigRational::from_integer(2.into()) * num_traits::pow(ex.beta.clone(), i as usize) * z)
}

/// `ln Σ_{i>n} p_i`, in closed form.
pub fn ln_tail_mass(law: &PeelLaw, n: u64) -> f64 {
    if n == 0 {
        return (1.0 - law.alpha).ln();
    }
    let x = n as f64;
    let t = ln_central_binomial_over_4n(n);
    match law.phase {
        Phase::Subcritical | Phase::Critical => {
            t + ((1.0 - 1.5 * law.alpha) * x + 1.0 - law.alpha).ln() - (x + 1.0).ln()
        }
        Phase::Supercritical => (1.0 - law.alpha).ln() + x * law.gamma().ln() + t - (x + 1.0).ln(),
    }
}

pub fn tail_mass(law: &PeelLaw, n: u64) -> f64 {
    ln_tail_mass(law, n).exp()
}

/// `α + Σ_{i<=cap} p_i`.
pub fn total_mass_partial(law: &PeelLaw, cap: u64) -> f64 {
    let mut s = CompensatedSum::new();
    s.add(law.alpha);
    for i in 1..=cap {
        s.add(p_i(law, i));
    }
    s.value()
}

/// Law of the number of inner vertices of the hole at distance `i`.
pub fn conditional_k(law: &PeelLaw, i: u64, k: u64) -> f64 {
    if law.alpha == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (ln_phi(k, i + 1) + k as f64 * law.q.ln() - ln_z_closed(i + 1, law.theta)).exp()
}

/// Counts describing a finite sub-map `Q` glued to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSummary {
    /// All vertices of `Q`.
    pub v_total: u64,
    /// Vertices of `Q` on the infinite boundary.
    pub v_boundary: u64,
    pub faces: u64,
}

/// Probability that the map contains `Q` at the root.
pub fn event_probability(q: &QSummary, law: &PeelLaw) -> Result<f64> {
    if q.v_boundary < 2 || q.faces < 1 || q.v_total < q.v_boundary {
        return Err(LawError::Domain(format!("invalid summary {q:?}")));
    }
    let new = q.v_total - q.v_boundary;
    let beta_exp = (q.faces + q.v_boundary)
        .checked_sub(q.v_total)
        .ok_or_else(|| LawError::Domain(format!("negative beta exponent in {q:?}")))?;
    Ok(pow0(law.alpha, new) * pow0(law.beta, beta_exp))
}

fn pow0(b: f64, e: u64) -> f64 {
    if e == 0 {
        1.0
    } else {
        b.powf(e as f64)
    }
}

/// Jump part of an event, before the hole size is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jump {
    Alpha,
    Boundary { side: Side, i: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SampleLimits {
    pub max_jump: u64,
}

impl Default for SampleLimits {
    fn default() -> Self {
        SampleLimits { max_jump: 1 << 60 }
    }
}

/// Draws the triangle type and, for boundary events, the side and distance.
///
/// The distance is found by inverting the closed-form tail `Σ_{i>n} p_i`
/// with a doubling then bisection search, so no mass is ever truncated.
pub fn sample_jump<R: Rng + ?Sized>(law: &PeelLaw, rng: &mut R, limits: &SampleLimits) -> Result<Jump> {
    let u: f64 = rng.gen();
    if u < law.alpha {
        return Ok(Jump::Alpha);
    }
    let i = invert_tail(law, 1.0 - u, limits.max_jump)?;
    let side = if rng.gen::<bool>() { Side::Right } else { Side::Left };
    Ok(Jump::Boundary { side, i })
}

/// Smallest `n >= 1` with `Σ_{i>n} p_i < v`.
pub fn invert_tail(law: &PeelLaw, v: f64, cap: u64) -> Result<u64> {
    let lv = v.ln();
    if ln_tail_mass(law, 0) < lv - 1e-12 {
        return Err(LawError::NumericLeak { draw: v, mass: tail_mass(law, 0) });
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    while ln_tail_mass(law, hi) >= lv {
        if hi >= cap {
            return Err(LawError::JumpCap(cap));
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ln_tail_mass(law, mid) >= lv {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Draws `k` given the distance `i` by inverse cdf, walking out from the mode.
pub fn sample_k<R: Rng + ?Sized>(law: &PeelLaw, i: u64, rng: &mut R) -> Result<u64> {
    if law.alpha == 0.0 {
        return Ok(0);
    }
    sample_boltzmann_size(i + 1, law.q, law.theta, rng)
}

/// Number of inner vertices of a Boltzmann triangulation of an `m`-gon.
pub fn sample_boltzmann_size<R: Rng + ?Sized>(m: u64, q: f64, theta: f64, rng: &mut R) -> Result<u64> {
    if q == 0.0 {
        return Ok(0);
    }
    let r = |k: u64| q * phi_ratio_next_n(k, m);
    // r is decreasing in k; the mode is the first k with r(k) < 1
    let (mut lo, mut hi) = (0u64, 1u64);
    if r(0) < 1.0 {
        hi = 0;
    } else {
        while r(hi) >= 1.0 {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if r(mid) >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let mode = hi;
    let ln_mode = ln_phi(mode, m) + mode as f64 * q.ln() - ln_z_closed(m, theta);
    let u: f64 = rng.gen();
    let tol = 1e-9 + 1e-15 * ln_phi(mode, m).abs();
    let p_mode = ln_mode.exp();
    let mut acc = CompensatedSum::new();
    acc.add(p_mode);
    if acc.value() > u {
        return Ok(mode);
    }
    let (mut left, mut right) = (mode, mode);
    let mut pl = if mode > 0 { p_mode / r(mode - 1) } else { 0.0 };
    let mut pr = p_mode * r(mode);
    loop {
        let take_left = pl > pr;
        let (p, k) = if take_left {
            left -= 1;
            let p = pl;
            pl = if left > 0 { pl / r(left - 1) } else { 0.0 };
            (p, left)
        } else {
            right += 1;
            let p = pr;
            pr *= r(right);
            (p, right)
        };
        if p == 0.0 || !p.is_finite() {
            if u - acc.value() <= tol {
                return Ok(if take_left { left } else { right });
            }
            return Err(LawError::NumericLeak { draw: u, mass: acc.value() });
        }
        acc.add(p);
        if acc.value() > u {
            return Ok(k);
        }
    }
}

pub fn sample_event<R: Rng + ?Sized>(law: &PeelLaw, rng: &mut R) -> Result<PeelEvent> {
    sample_event_with(law, rng, &SampleLimits::default())
}

pub fn sample_event_with<R: Rng + ?Sized>(law: &PeelLaw, rng: &mut R, limits: &SampleLimits) -> Result<PeelEvent> {
    match sample_jump(law, rng, limits)? {
        Jump::Alpha => Ok(PeelEvent::Alpha),
        Jump::Boundary { side, i } => {
            let k = sample_k(law, i, rng)?;
            Ok(PeelEvent::Boundary { side, i, k })
        }
    }
}

/// `(α₄, β₄)` for the quadrangulation limit with aspect ratio `a`.
pub fn quad_limit_constants(a: f64) -> (f64, f64) {
    let alpha = if a.is_infinite() { 0.0 } else { 3.0 / (4.0 * (1.0 + 3.0 * a) * (2.0 + 3.0 * a)) };
    let d = (3.0 + alpha).sqrt() - alpha.sqrt();
    (alpha, 2.0 / 27.0 * d * d * d)
}

/// Limit probability of a quadrangular event with `faces` faces and
/// `v_new` vertices off the boundary.
pub fn quad_event_probability(faces: u64, v_new: u64, a: f64) -> f64 {
    let (fb, vb) = if a.is_infinite() {
        (4.0 / 27.0, 0.0)
    } else {
        let s = 1.0 + 3.0 * a;
        let t = 2.0 + 3.0 * a;
        (4.0 * s * s * s / (27.0 * t * t * t), 9.0 * t / (4.0 * s * s))
    };
    pow0(fb, faces) * pow0(vb, v_new)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub exponent: f64,
    pub rate: f64,
}

/// Least-squares fit of `ln p_i ≈ c + exponent·ln i + rate·i` on `[lo, hi]`.
pub fn tail_exponent(law: &PeelLaw, lo: u64, hi: u64) -> Result<TailFit> {
    if lo <= 1 || hi <= lo || hi - lo < 2 {
        return Err(LawError::Domain(format!("fit window [{lo}, {hi}] too small")));
    }
    let n = (hi - lo + 1) as usize;
    let (cx, sx) = (0.5 * (lo + hi) as f64, 0.5 * (hi - lo) as f64);
    let lmid = (cx).ln();
    let mut x = DMatrix::<f64>::zeros(n, 3);
    let mut y = DVector::<f64>::zeros(n);
    for (row, i) in (lo..=hi).enumerate() {
        let fi = i as f64;
        x[(row, 0)] = 1.0;
        x[(row, 1)] = fi.ln() - lmid;
        x[(row, 2)] = (fi - cx) / sx;
        y[row] = ln_p_i(law, i);
    }
    let sol = x
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| LawError::Domain(format!("fit failed: {e}")))?;
    Ok(TailFit { exponent: sol[1], rate: sol[2] / sx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn law(s: &str) -> PeelLaw {
        s.parse().unwrap()
    }

    #[test]
    fn beta_branches() {
        let l = law("2/3");
        let ex = l.exact().unwrap();
        assert_eq!(ex.beta, rat(1, 9));
        assert_eq!(branch_sub(&ex.alpha).0, rat(1, 9));
        assert_eq!(branch_super(&ex.alpha).0, rat(1, 9));
        assert_eq!(branch_sub(&ex.alpha).1, branch_super(&ex.alpha).1);
        assert_eq!(l.phase(), Phase::Critical);
        assert_eq!(law("0").exact().unwrap().beta, rat(1, 4));
        assert_eq!(law("3/4").exact().unwrap().beta, rat(3, 32));
        assert_eq!(law("0.3").phase(), Phase::Subcritical);
        assert_eq!(law("0.25").exact().unwrap().alpha, rat(1, 4));
        assert!(law("1e-1").exact().is_none());
        assert_eq!(law("0.9").phase(), Phase::Supercritical);
        assert!("1".parse::<PeelLaw>().is_err());
        assert!("-0.1".parse::<PeelLaw>().is_err());
        assert!("1/0".parse::<PeelLaw>().is_err());
    }

    #[test]
    fn float_and_exact_laws_agree() {
        for s in ["1/10", "1/3", "2/3", "4/5"] {
            let e = law(s);
            let f = PeelLaw::from_alpha(e.alpha()).unwrap();
            assert_eq!(e.phase(), f.phase());
            assert!((e.beta() - f.beta()).abs() < 1e-15);
            assert!((e.q() - f.q()).abs() < 1e-15);
            assert!(e.q() <= 2.0 / 27.0 + 1e-16);
        }
    }

    #[test]
    fn one_sided_examples() {
        let l = law("2/3");
        assert!((p_ik(&l, 1, 0) - 1.0 / 9.0).abs() < 1e-15);
        assert!((p_ik(&l, 1, 1) - 2.0 / 243.0).abs() < 1e-15);
        assert_eq!(p_ik(&law("0"), 3, 1), 0.0);
    }

    #[test]
    fn two_sided_examples() {
        let l = law("2/3");
        assert!((p_i(&l, 1) - 0.25).abs() < 1e-15);
        assert!((p_i(&l, 2) - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(p_i_exact(&l, 1).unwrap(), rat(1, 4));
        assert_eq!(p_i_exact(&l, 2).unwrap(), rat(1, 24));
    }

    #[test]
    fn mass_identity_exact() {
        for s in ["1/10", "1/3", "2/3", "4/5", "0", "9/10"] {
            let l = law(s);
            for i in 1..=50 {
                let a = p_i_exact(&l, i).unwrap();
                let b = p_i_from_partition(&l, i).unwrap();
                assert_eq!(a, b, "alpha={s} i={i}");
                let f = p_i(&l, i);
                assert!((f / rational_to_f64(&a) - 1.0).abs() < 1e-12, "alpha={s} i={i}");
            }
        }
    }

    #[test]
    fn one_sided_sums_to_two_sided() {
        for s in ["0.2", "2/3", "0.85"] {
            let l = law(s);
            for i in 1..6 {
                let mut acc = CompensatedSum::new();
                for k in 0..4000 {
                    acc.add(p_ik(&l, i, k));
                }
                let want = p_i(&l, i);
                let tol = if l.phase() == Phase::Critical { 1e-3 } else { 1e-6 };
                assert!((2.0 * acc.value() / want - 1.0).abs() < tol, "{s} {i}");
            }
        }
    }

    #[test]
    fn tail_formula_matches_partial_sums() {
        for s in ["0", "0.2", "1/3", "2/3", "0.75", "0.9"] {
            let l = law(s);
            let mut acc = CompensatedSum::new();
            acc.add(l.alpha());
            for n in 0..400u64 {
                if n > 0 {
                    acc.add(p_i(&l, n));
                }
                let resid = 1.0 - acc.value();
                let t = tail_mass(&l, n);
                assert!((resid - t).abs() < 1e-13 + 1e-9 * t, "{s} n={n}: {resid} vs {t}");
            }
        }
    }

    #[test]
    fn total_mass_examples() {
        assert!((total_mass_partial(&law("0.9"), 200) - 1.0).abs() < 1e-12);
        assert!((total_mass_partial(&law("2/3"), 10_000) - 1.0).abs() < 0.01);
        let z = law("0");
        let m = total_mass_partial(&z, 10_000);
        assert!((1.0 - m - tail_mass(&z, 10_000)).abs() < 1e-12);
        let mut prev = 0.0;
        for cap in [1, 5, 50, 500] {
            let v = total_mass_partial(&law("1/3"), cap);
            assert!(v >= prev && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn conditional_k_examples() {
        assert_eq!(conditional_k(&law("0"), 4, 0), 1.0);
        assert_eq!(conditional_k(&law("0"), 4, 2), 0.0);
        assert!((conditional_k(&law("2/3"), 1, 0) - 8.0 / 9.0).abs() < 1e-13);
        let l = law("0.5");
        for i in [1, 3, 10] {
            let s: CompensatedSum = (0..=500).map(|k| conditional_k(&l, i, k)).collect();
            assert!(s.value() >= 1.0 - 1e-9 && s.value() <= 1.0 + 1e-9, "{}", s.value());
        }
    }

    #[test]
    fn event_probability_examples() {
        let l = law("1/3");
        let p = |v, b, f| event_probability(&QSummary { v_total: v, v_boundary: b, faces: f }, &l).unwrap();
        assert!((p(3, 2, 1) - l.alpha()).abs() < 1e-15);
        assert!((p(3, 3, 1) - l.beta()).abs() < 1e-15);
        assert!((p(4, 3, 2) - l.alpha() * l.beta()).abs() < 1e-15);
        assert!(event_probability(&QSummary { v_total: 3, v_boundary: 1, faces: 1 }, &l).is_err());
        assert!(event_probability(&QSummary { v_total: 5, v_boundary: 2, faces: 1 }, &l).is_err());
    }

    #[test]
    fn invert_tail_brackets() {
        let l = law("1/3");
        for &v in &[0.6, 0.3, 0.01, 1e-6, 1e-7] {
            let i = invert_tail(&l, v, 1 << 60).unwrap();
            assert!(tail_mass(&l, i) < v && tail_mass(&l, i - 1) >= v);
        }
        assert_eq!(invert_tail(&law("0"), 1e-12, 1000), Err(LawError::JumpCap(1000)));
    }

    #[test]
    fn alpha_zero_never_has_inner_vertices() {
        let l = law("0");
        let mut rng = stream_rng(1, 0);
        for _ in 0..2000 {
            match sample_event(&l, &mut rng).unwrap() {
                PeelEvent::Alpha => panic!("alpha event at alpha = 0"),
                PeelEvent::Boundary { k, .. } => assert_eq!(k, 0),
            }
        }
    }

    #[test]
    fn sample_k_extreme_sizes_terminate() {
        let l = law("1/3");
        let mut rng = stream_rng(2, 0);
        for &i in &[1u64, 10, 1000, 1_000_000, 10_000_000_000] {
            let k = sample_k(&l, i, &mut rng).unwrap();
            // the Boltzmann size concentrates around a multiple of the perimeter
            if i >= 1000 {
                assert!(k > 0);
            }
        }
        let c = law("2/3");
        for _ in 0..200 {
            sample_k(&c, 3, &mut rng).unwrap();
        }
    }

    #[test]
    fn quad_constants() {
        let (a0, b0) = quad_limit_constants(0.0);
        assert!((a0 - 0.375).abs() < 1e-15);
        assert!((b0 - (1.0f64 / 54.0).sqrt()).abs() < 1e-12);
        let (ai, bi) = quad_limit_constants(f64::INFINITY);
        assert_eq!(ai, 0.0);
        assert!((bi - (4.0f64 / 27.0).sqrt()).abs() < 1e-12);
        assert!((quad_limit_constants(1.0).0 - 3.0 / 80.0).abs() < 1e-15);
        assert_eq!(quad_event_probability(0, 0, 2.0), 1.0);
        assert!((quad_event_probability(1, 2, 0.0) - 0.375).abs() < 1e-15);
        assert!((quad_event_probability(1, 0, 0.0) - 1.0 / 54.0).abs() < 1e-15);
        for a in [0.0, 0.3, 1.0, 7.5, 100.0, f64::INFINITY] {
            assert!((quad_event_probability(1, 2, a) - quad_limit_constants(a).0).abs() < 1e-14);
        }
    }

    #[test]
    fn tail_fits() {
        let f = tail_exponent(&law("2/3"), 100, 10_000).unwrap();
        assert!((f.exponent + 2.5).abs() < 0.05 && f.rate.abs() < 1e-6, "{f:?}");
        let f = tail_exponent(&law("1/3"), 100, 10_000).unwrap();
        assert!((f.exponent + 1.5).abs() < 0.05, "{f:?}");
        let f = tail_exponent(&law("0.8"), 50, 300).unwrap();
        assert!((f.rate - 0.5f64.ln()).abs() < 1e-3, "{f:?}");
        assert!(tail_exponent(&law("0.8"), 1, 300).is_err());
        assert!(tail_exponent(&law("0.8"), 10, 11).is_err());
    }
}
