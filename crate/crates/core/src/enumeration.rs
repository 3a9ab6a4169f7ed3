//! Counting rooted triangulations of polygons.
//!
//! Boundary lengths are passed as the actual number of boundary edges
//! (`m >= 2`). A 2-gon with no inner vertex is the degenerate map whose two
//! sides are glued into a single edge and counts as one triangulation.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

use crate::numerics::{ln_gamma, ln_gamma_diff, CompensatedSum};

/// Upper end of the convergence disc of `Z_m(q)`.
pub const Q_CRITICAL: f64 = 2.0 / 27.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("table bound exceeded: requested ({n}, {m}), cap ({cap_n}, {cap_m})")]
    Resource { n: u64, m: u64, cap_n: u64, cap_m: u64 },
    #[error("no tail bound at q = {0} (need q < 2/27)")]
    TailUnavailable(f64),
    #[error("closed form did not reduce to an integer at ({0}, {1})")]
    NotIntegral(u64, u64),
}

pub type Result<T> = std::result::Result<T, EnumError>;

/// Exact count of maps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn ln(&self) -> f64 {
        big_ln(&self.0)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

/// Exact rational weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactWeight(pub BigRational);

impl ExactWeight {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl fmt::Display for ExactWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Natural log of a nonnegative weight; `ln == -inf` encodes an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    pub ln: f64,
}

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight { ln: f64::NEG_INFINITY };

    pub fn from_ln(ln: f64) -> Self {
        LogWeight { ln }
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn exp(&self) -> f64 {
        self.ln.exp()
    }
}

/// Parameter of the rational parametrisation `q = θ(1 − 2θ)²`, `θ ∈ [0, 1/6]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaParam {
    Exact(BigRational),
    Float(f64),
}

impl ThetaParam {
    pub fn exact(theta: BigRational) -> Result<Self> {
        let sixth = BigRational::new(1.into(), 6.into());
        if theta.is_negative() || theta > sixth {
            return Err(EnumError::Domain(format!("theta = {theta} outside [0, 1/6]")));
        }
        Ok(ThetaParam::Exact(theta))
    }

    pub fn float(theta: f64) -> Result<Self> {
        if !(0.0..=1.0 / 6.0 + 1e-15).contains(&theta) {
            return Err(EnumError::Domain(format!("theta = {theta} outside [0, 1/6]")));
        }
        Ok(ThetaParam::Float(theta.min(1.0 / 6.0)))
    }

    pub fn value(&self) -> f64 {
        match self {
            ThetaParam::Exact(t) => rational_to_f64(t),
            ThetaParam::Float(t) => *t,
        }
    }

    pub fn q(&self) -> f64 {
        let t = self.value();
        t * (1.0 - 2.0 * t).powi(2)
    }
}

/// Value returned by [`z_closed`]: exact for rational θ, log-scale otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ZValue {
    Exact(ExactWeight),
    Log(LogWeight),
}

impl ZValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ZValue::Exact(w) => w.to_f64(),
            ZValue::Log(w) => w.exp(),
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let n = r.numer().abs().to_biguint().unwrap();
    let d = r.denom().to_biguint().unwrap();
    sign * (big_ln(&n) - big_ln(&d)).exp()
}

fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn check_boundary(m: u64) -> Result<()> {
    if m < 2 {
        return Err(EnumError::Domain(format!("boundary length {m} < 2")));
    }
    Ok(())
}

/// Number of rooted triangulations of an `m`-gon with `n` inner vertices.
pub fn phi_closed(n: u64, m: u64) -> Result<BigCount> {
    check_boundary(m)?;
    let p = m - 2;
    let num = (BigUint::one() << (n + 1)) * factorial(2 * p + 1) * factorial(2 * p + 3 * n);
    let fp = factorial(p);
    let den = &fp * &fp * factorial(n) * factorial(2 * p + 2 * n + 2);
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(EnumError::NotIntegral(n, m));
    }
    Ok(BigCount(q))
}

/// Memoised root-face recurrence for `φ`, used as an independent oracle.
///
/// Built bottom-up once; read-only afterwards.
#[derive(Debug, Clone)]
pub struct PhiTable {
    n_max: u64,
    m_max: u64,
    rows: Vec<Vec<BigUint>>,
}

pub const DEFAULT_PHI_CAP: (u64, u64) = (64, 64);

impl PhiTable {
    /// Table answering every query with `n <= n_max`, `m <= m_max`.
    pub fn build(n_max: u64, m_max: u64) -> Result<Self> {
        Self::build_capped(n_max, m_max, DEFAULT_PHI_CAP)
    }

    pub fn build_capped(n_max: u64, m_max: u64, cap: (u64, u64)) -> Result<Self> {
        check_boundary(m_max)?;
        if n_max > cap.0 || m_max > cap.1 {
            return Err(EnumError::Resource { n: n_max, m: m_max, cap_n: cap.0, cap_m: cap.1 });
        }
        // row n covers boundaries up to m_max + (n_max - n), closed under the recurrence
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let top = m_max + (n_max - n);
            let mut row = vec![BigUint::zero(); top as usize + 1];
            for m in 2..=top {
                let mut v = BigUint::zero();
                if n == 0 && m == 2 {
                    v = BigUint::one();
                }
                if n > 0 {
                    v += &rows[n as usize - 1][m as usize + 1];
                }
                for d in 1..=m.saturating_sub(2) {
                    for n1 in 0..=n {
                        let n2 = n - n1;
                        let left = if n1 == n { &row[(d + 1) as usize] } else { &rows[n1 as usize][(d + 1) as usize] };
                        let right = if n2 == n { &row[(m - d) as usize] } else { &rows[n2 as usize][(m - d) as usize] };
                        if left.is_zero() || right.is_zero() {
                            continue;
                        }
                        v += left * right;
                    }
                }
                row[m as usize] = v;
            }
            rows.push(row);
        }
        Ok(PhiTable { n_max, m_max, rows })
    }

    pub fn get(&self, n: u64, m: u64) -> Result<BigCount> {
        check_boundary(m)?;
        if n > self.n_max || m > self.m_max + (self.n_max - n) {
            return Err(EnumError::Resource { n, m, cap_n: self.n_max, cap_m: self.m_max });
        }
        Ok(BigCount(self.rows[n as usize][m as usize].clone()))
    }
}

/// Single recurrence evaluation; builds a table sized for the query.
pub fn phi_recurrence(n: u64, m: u64) -> Result<BigCount> {
    check_boundary(m)?;
    PhiTable::build(n, m)?.get(n, m)
}

/// `ln φ_{n,m}` via log-gamma.
pub fn log_phi(n: u64, m: u64) -> Result<LogWeight> {
    check_boundary(m)?;
    Ok(LogWeight::from_ln(ln_phi(n, m)))
}

/// Unchecked `ln φ_{n,m}`; `m >= 2` is the caller's responsibility.
pub fn ln_phi(n: u64, m: u64) -> f64 {
    debug_assert!(m >= 2);
    let p = (m - 2) as f64;
    let n = n as f64;
    (n + 1.0) * std::f64::consts::LN_2 + ln_gamma(2.0 * p + 2.0) + ln_gamma(2.0 * p + 3.0 * n + 1.0)
        - 2.0 * ln_gamma(p + 1.0)
        - ln_gamma(n + 1.0)
        - ln_gamma(2.0 * p + 2.0 * n + 3.0)
}

/// `ln(φ_{na,ma} / φ_{nb,mb})` with full relative precision at large arguments.
pub fn ln_phi_ratio(na: u64, ma: u64, nb: u64, mb: u64) -> f64 {
    debug_assert!(ma >= 2 && mb >= 2);
    let (pa, pb) = ((ma - 2) as f64, (mb - 2) as f64);
    let (na, nb) = (na as f64, nb as f64);
    (na - nb) * std::f64::consts::LN_2
        + ln_gamma_diff(2.0 * pa + 2.0, 2.0 * pb + 2.0)
        + ln_gamma_diff(2.0 * pa + 3.0 * na + 1.0, 2.0 * pb + 3.0 * nb + 1.0)
        - 2.0 * ln_gamma_diff(pa + 1.0, pb + 1.0)
        - ln_gamma_diff(na + 1.0, nb + 1.0)
        - ln_gamma_diff(2.0 * pa + 2.0 * na + 3.0, 2.0 * pb + 2.0 * nb + 3.0)
}

/// `φ_{n+1,m} / φ_{n,m}`.
pub fn phi_ratio_next_n(n: u64, m: u64) -> f64 {
    let c = 2.0 * (m - 2) as f64;
    let n = n as f64;
    2.0 * (c + 3.0 * n + 1.0) * (c + 3.0 * n + 2.0) * (c + 3.0 * n + 3.0)
        / ((n + 1.0) * (c + 2.0 * n + 3.0) * (c + 2.0 * n + 4.0))
}

/// Dense table of `ln φ_{n,m}` for fast repeated lookups.
#[derive(Debug, Clone)]
pub struct PhiLogTable {
    n_max: u64,
    m_max: u64,
    data: Vec<f64>,
}

impl PhiLogTable {
    pub fn new(n_max: u64, m_max: u64) -> Self {
        let width = (m_max + 1) as usize;
        let mut data = vec![f64::NAN; (n_max as usize + 1) * width];
        for n in 0..=n_max {
            for m in 2..=m_max {
                data[n as usize * width + m as usize] = ln_phi(n, m);
            }
        }
        PhiLogTable { n_max, m_max, data }
    }

    pub fn covers(&self, n: u64, m: u64) -> bool {
        n <= self.n_max && m <= self.m_max && m >= 2
    }

    #[inline]
    pub fn get(&self, n: u64, m: u64) -> f64 {
        self.data[n as usize * (self.m_max as usize + 1) + m as usize]
    }
}

pub fn catalan(k: u64) -> BigCount {
    BigCount(factorial(2 * k) / (factorial(k) * factorial(k + 1)))
}

/// The `θ ∈ [0, 1/6]` with `θ(1 − 2θ)² = q`, by bisection.
pub fn theta_of_q(q: f64) -> Result<ThetaParam> {
    if !(0.0..=Q_CRITICAL * (1.0 + 1e-15)).contains(&q) {
        return Err(EnumError::Domain(format!("q = {q} outside [0, 2/27]")));
    }
    let f = |t: f64| t * (1.0 - 2.0 * t) * (1.0 - 2.0 * t);
    let (mut lo, mut hi) = (0.0f64, 1.0 / 6.0);
    if q == 0.0 {
        return Ok(ThetaParam::Float(0.0));
    }
    if f(hi) <= q {
        return Ok(ThetaParam::Float(hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (f(lo) - q).abs() <= (f(hi) - q).abs() { lo } else { hi };
    Ok(ThetaParam::Float(best))
}

/// Closed-form partition function `Z_m(q)` with `q = θ(1 − 2θ)²`.
pub fn z_closed(m: u64, theta: &ThetaParam) -> Result<ZValue> {
    check_boundary(m)?;
    match theta {
        ThetaParam::Exact(t) => Ok(ZValue::Exact(z_closed_exact(m, t)?)),
        ThetaParam::Float(t) => Ok(ZValue::Log(LogWeight::from_ln(ln_z_closed(m, *t)))),
    }
}

pub fn z_closed_exact(m: u64, theta: &BigRational) -> Result<ExactWeight> {
    check_boundary(m)?;
    let p = m - 2;
    let one = BigRational::one();
    let lin = (&one - BigRational::from_integer(6.into()) * theta) * BigRational::from_integer((p + 1).into()) + &one;
    let cat = BigRational::new(
        factorial(2 * p).into(),
        (factorial(p) * factorial(p + 2)).into(),
    );
    let base = &one - BigRational::from_integer(2.into()) * theta;
    if base.is_zero() {
        return Err(EnumError::Domain("theta = 1/2".into()));
    }
    let pow = num_traits::pow(base.recip(), (2 * p + 2) as usize);
    Ok(ExactWeight(lin * cat * pow))
}

pub fn ln_z_closed(m: u64, theta: f64) -> f64 {
    let p = (m - 2) as f64;
    ((1.0 - 6.0 * theta) * (p + 1.0) + 1.0).ln() + ln_gamma(2.0 * p + 1.0)
        - ln_gamma(p + 1.0)
        - ln_gamma(p + 3.0)
        - (2.0 * p + 2.0) * (1.0 - 2.0 * theta).ln()
}

/// `Z_{m+1}(q) / Z_m(q)` as a rational function of `m` and `θ`.
pub fn z_ratio_next(m: u64, theta: f64) -> f64 {
    let p = (m - 2) as f64;
    let s = 1.0 - 6.0 * theta;
    (s * (p + 2.0) + 1.0) / (s * (p + 1.0) + 1.0) * 2.0 * (2.0 * p + 1.0) / (p + 3.0)
        / ((1.0 - 2.0 * theta) * (1.0 - 2.0 * theta))
}

/// Truncated series for `Z_m(q)` with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBracket {
    pub lower: f64,
    pub tail_bound: f64,
}

const GROWTH: f64 = 27.0 / 2.0;

/// First `n >= 100` beyond which `φ_{n+1,m}/φ_{n,m} <= 27/2` for all larger `n`.
pub fn ratio_crossover(m: u64) -> u64 {
    let c = 2.0 * (m - 2) as f64;
    let a = 270.0;
    let b = -9.0 * c * c + 153.0 * c + 570.0;
    let cc = -4.0 * c * c * c + 3.0 * c * c + 145.0 * c + 300.0;
    let disc = b * b - 4.0 * a * cc;
    let root = if disc < 0.0 { 0.0 } else { (-b + disc.sqrt()) / (2.0 * a) };
    (root.ceil().max(0.0) as u64 + 1).max(100)
}

pub fn z_series(m: u64, q: f64, cutoff: u64) -> Result<SeriesBracket> {
    check_boundary(m)?;
    if q.is_nan() || q < 0.0 {
        return Err(EnumError::Domain(format!("q = {q} < 0")));
    }
    if q >= Q_CRITICAL {
        return Err(EnumError::TailUnavailable(q));
    }
    if cutoff < 1 {
        return Err(EnumError::Domain("cutoff < 1".into()));
    }
    if q == 0.0 {
        return Ok(SeriesBracket { lower: ln_phi(0, m).exp().round(), tail_bound: 0.0 });
    }
    let lnq = q.ln();
    let term = |n: u64| (ln_phi(n, m) + n as f64 * lnq).exp();
    let lower: CompensatedSum = (0..=cutoff).map(term).collect();
    let lower = lower.value();
    let start = cutoff.max(ratio_crossover(m));
    let mut tail: CompensatedSum = (cutoff + 1..=start).map(term).collect();
    let rq = GROWTH * q;
    tail.add(term(start) * rq / (1.0 - rq));
    // absorb rounding of the float partial sums
    let tail_bound = tail.value() + 1e-13 * lower;
    Ok(SeriesBracket { lower, tail_bound })
}

/// Number of rooted quadrangulations of a `2m`-gon with `n` inner vertices.
pub fn quad_count(m: u64, n: u64) -> Result<BigCount> {
    if m < 1 {
        return Err(EnumError::Domain("quadrangulation boundary half-length < 1".into()));
    }
    let pow3 = if n == 0 {
        BigRational::new(1.into(), 3.into())
    } else {
        BigRational::from_integer(num_traits::pow(BigUint::from(3u32), (n - 1) as usize).into())
    };
    let a = BigRational::new(factorial(3 * m).into(), (factorial(m) * factorial(2 * m - 1)).into());
    let b = BigRational::new(
        factorial(2 * n + 3 * m - 3).into(),
        (factorial(n) * factorial(n + 3 * m - 1)).into(),
    );
    let v = pow3 * a * b;
    if !v.is_integer() {
        return Err(EnumError::NotIntegral(n, 2 * m));
    }
    Ok(BigCount(v.to_integer().to_biguint().unwrap()))
}

/// Limit of `φ_{n−k,m−j} / φ_{n,m}` along `m ~ a·n`.
pub fn ratio_limit(j: u64, k: u64, a: f64) -> f64 {
    let (b1, b2) = if a.is_infinite() {
        (0.25, 0.0)
    } else {
        let s = a + 1.0;
        let t = 2.0 * a + 3.0;
        (s * s / (t * t), 2.0 * s * s / (t * t * t))
    };
    pow_or_one(b1, j) * pow_or_one(b2, k)
}

fn pow_or_one(b: f64, e: u64) -> f64 {
    if e == 0 {
        1.0
    } else {
        b.powf(e as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigCount {
        BigCount::from(v)
    }

    #[test]
    fn small_closed_values() {
        assert_eq!(phi_closed(0, 2).unwrap(), big(1));
        assert_eq!(phi_closed(0, 3).unwrap(), big(1));
        assert_eq!(phi_closed(1, 3).unwrap(), big(4));
        assert_eq!(phi_closed(0, 4).unwrap(), big(2));
        assert_eq!(phi_closed(0, 5).unwrap(), big(5));
        assert_eq!(phi_closed(1, 2).unwrap(), big(1));
        assert_eq!(phi_closed(2, 2).unwrap(), big(4));
    }

    #[test]
    fn boundary_below_two_rejected() {
        assert!(matches!(phi_closed(0, 1), Err(EnumError::Domain(_))));
        assert!(matches!(phi_recurrence(3, 0), Err(EnumError::Domain(_))));
        assert!(log_phi(0, 1).is_err());
    }

    #[test]
    fn recurrence_small_values() {
        assert_eq!(phi_recurrence(1, 3).unwrap(), big(4));
        assert_eq!(phi_recurrence(0, 4).unwrap(), big(2));
        assert_eq!(phi_recurrence(0, 2).unwrap(), big(1));
    }

    #[test]
    fn recurrence_agrees_with_closed_form() {
        let t = PhiTable::build(12, 12).unwrap();
        for n in 0..=12 {
            for m in 2..=12 {
                assert_eq!(t.get(n, m).unwrap(), phi_closed(n, m).unwrap(), "({n},{m})");
            }
        }
    }

    #[test]
    fn recurrence_cap() {
        assert!(matches!(PhiTable::build(65, 10), Err(EnumError::Resource { .. })));
        assert!(matches!(PhiTable::build_capped(5, 5, (4, 4)), Err(EnumError::Resource { .. })));
        let t = PhiTable::build(3, 3).unwrap();
        assert!(t.get(4, 3).is_err());
    }

    #[test]
    fn catalan_values_and_identity() {
        assert_eq!(catalan(0), big(1));
        assert_eq!(catalan(3), big(5));
        assert_eq!(catalan(5), big(42));
        for m in 0..=20 {
            assert_eq!(phi_closed(0, m + 2).unwrap(), catalan(m));
        }
    }

    #[test]
    fn log_phi_tracks_exact() {
        assert_eq!(log_phi(0, 2).unwrap().ln, 0.0);
        assert!((log_phi(1, 3).unwrap().ln - 4f64.ln()).abs() < 1e-10);
        for &(n, m) in &[(20, 10), (0, 30), (50, 3), (200, 150)] {
            let exact = phi_closed(n, m).unwrap().ln();
            let approx = log_phi(n, m).unwrap().ln;
            assert!((exact - approx).abs() <= 1e-10 * (1.0 + exact.abs()), "({n},{m})");
        }
    }

    #[test]
    fn phi_ratio_helpers() {
        for &(na, ma, nb, mb) in &[(3, 5, 2, 7), (40, 9, 41, 9), (10, 10, 10, 10), (0, 2, 5, 30)] {
            let want = ln_phi(na, ma) - ln_phi(nb, mb);
            assert!((ln_phi_ratio(na, ma, nb, mb) - want).abs() < 1e-9);
        }
        for &(n, m) in &[(0, 2), (5, 3), (30, 17)] {
            let want = (ln_phi(n + 1, m) - ln_phi(n, m)).exp();
            assert!((phi_ratio_next_n(n, m) / want - 1.0).abs() < 1e-12);
        }
        let t = PhiLogTable::new(10, 12);
        assert!(t.covers(10, 12) && !t.covers(11, 2) && !t.covers(0, 1));
        assert_eq!(t.get(7, 9), ln_phi(7, 9));
    }

    #[test]
    fn theta_inversion() {
        assert_eq!(theta_of_q(0.0).unwrap().value(), 0.0);
        let crit = theta_of_q(2.0 / 27.0).unwrap().value();
        assert!((crit - 1.0 / 6.0).abs() < 1e-7);
        let t = theta_of_q(0.05).unwrap();
        assert!((t.q() - 0.05).abs() <= 1e-14);
        assert!(theta_of_q(0.1).is_err());
        assert!(theta_of_q(-0.01).is_err());
        for k in 0..=60 {
            let th = k as f64 / 360.0;
            let q = th * (1.0 - 2.0 * th).powi(2);
            let back = theta_of_q(q).unwrap().value();
            assert!((back * (1.0 - 2.0 * back).powi(2) - q).abs() <= 1e-14);
            if k < 60 {
                assert!((back - th).abs() < 1e-12, "{th} -> {back}");
            }
        }
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn z_exact_critical_values() {
        let t = ThetaParam::exact(rat(1, 6)).unwrap();
        assert_eq!(z_closed(2, &t).unwrap(), ZValue::Exact(ExactWeight(rat(9, 8))));
        assert_eq!(z_closed(3, &t).unwrap(), ZValue::Exact(ExactWeight(rat(27, 16))));
        let zero = ThetaParam::exact(rat(0, 1)).unwrap();
        assert_eq!(z_closed(2, &zero).unwrap(), ZValue::Exact(ExactWeight(rat(1, 1))));
        assert!(ThetaParam::exact(rat(1, 5)).is_err());
    }

    #[test]
    fn z_at_zero_is_catalan() {
        let zero = rat(0, 1);
        for m in 2..15 {
            let z = z_closed_exact(m, &zero).unwrap();
            assert_eq!(z.0, BigRational::from_integer(catalan(m - 2).0.into()));
        }
    }

    #[test]
    fn z_float_and_ratio_consistent() {
        for &th in &[0.0, 0.03, 0.1, 1.0 / 6.0] {
            for m in 2..40 {
                let r = (ln_z_closed(m + 1, th) - ln_z_closed(m, th)).exp();
                assert!((z_ratio_next(m, th) / r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn series_brackets_closed_form() {
        for &q in &[0.0, 0.02, 0.05, 0.07, Q_CRITICAL * 0.9] {
            let th = theta_of_q(q).unwrap().value();
            for m in 2..=10 {
                let b = z_series(m, q, 400).unwrap();
                let z = ln_z_closed(m, th).exp();
                assert!(b.lower <= z * (1.0 + 1e-12) && z <= (b.lower + b.tail_bound) * (1.0 + 1e-12), "m={m} q={q} {b:?} {z}");
            }
        }
        let b = z_series(2, 0.0, 7).unwrap();
        assert_eq!((b.lower, b.tail_bound), (1.0, 0.0));
        let b = z_series(3, 0.05, 200).unwrap();
        assert!(b.tail_bound < 1e-12);
        assert!(matches!(z_series(3, Q_CRITICAL, 10), Err(EnumError::TailUnavailable(_))));
    }

    #[test]
    fn crossover_really_bounds_ratio() {
        for m in [2u64, 3, 10, 40, 200] {
            let n0 = ratio_crossover(m);
            for n in n0..n0 + 2000 {
                assert!(phi_ratio_next_n(n, m) <= GROWTH * (1.0 + 1e-14), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn quadrangulation_counts() {
        assert_eq!(quad_count(2, 0).unwrap(), big(1));
        assert_eq!(quad_count(1, 1).unwrap(), big(2));
        // m=2, n=1: 6!/(2!·3!) · 5!/(1!·6!) = 60/6
        assert_eq!(quad_count(2, 1).unwrap(), big(10));
        assert_eq!(quad_count(1, 0).unwrap(), big(1));
        assert!(quad_count(0, 3).is_err());
    }

    #[test]
    fn ratio_limit_values() {
        assert!((ratio_limit(1, 0, 0.0) - 1.0 / 9.0).abs() < 1e-15);
        assert!((ratio_limit(0, 1, 0.0) - 2.0 / 27.0).abs() < 1e-15);
        for a in [0.0, 0.5, f64::INFINITY] {
            assert_eq!(ratio_limit(0, 0, a), 1.0);
        }
        assert_eq!(ratio_limit(1, 0, f64::INFINITY), 0.25);
        assert_eq!(ratio_limit(0, 1, f64::INFINITY), 0.0);
    }

    #[test]
    fn rational_to_float_handles_huge() {
        let r = BigRational::new(factorial(400).into(), factorial(399).into());
        assert!((rational_to_f64(&r) - 400.0).abs() < 1e-9);
    }
}
