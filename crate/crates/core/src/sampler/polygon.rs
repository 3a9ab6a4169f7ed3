//! Uniform and Boltzmann triangulations of a polygon.

use rand::Rng;

use super::{phi_table, Result, SamplerError};
use crate::enumeration::{theta_of_q, Q_CRITICAL};
use crate::law::{PeelEvent, Side};
use crate::map::patch::{BoltzmannDecider, UniformDecider};
use crate::map::{FiniteMap, PatchCode, PatchToken};
use crate::rng::stream_rng;

/// Uniform triangulation of an `m`-gon with `n` inner vertices. The pair
/// (2, 0) gives the glued 2-gon, see [`FiniteMap::is_degenerate`].
pub fn uniform_polygon(m: u64, n: u64, seed: u64) -> Result<FiniteMap> {
    uniform_polygon_with(m, n, &mut stream_rng(seed, 0))
}

pub fn uniform_polygon_with<R: Rng + ?Sized>(m: u64, n: u64, rng: &mut R) -> Result<FiniteMap> {
    if m < 2 {
        return Err(SamplerError::Domain(format!("perimeter {m} below 2")));
    }
    if m == 2 && n == 0 {
        return Ok(FiniteMap::empty_2gon());
    }
    let mut dec = UniformDecider { rng, table: Some(phi_table()), seal_above: None };
    Ok(FiniteMap::carve_from(m, n, &mut dec)?.0)
}

/// Boltzmann triangulation of an `m`-gon with weight `q` per inner vertex.
pub fn boltzmann_polygon(m: u64, q: f64, seed: u64) -> Result<FiniteMap> {
    boltzmann_polygon_with(m, q, &mut stream_rng(seed, 0))
}

pub fn boltzmann_polygon_with<R: Rng + ?Sized>(m: u64, q: f64, rng: &mut R) -> Result<FiniteMap> {
    if m < 2 {
        return Err(SamplerError::Domain(format!("perimeter {m} below 2")));
    }
    if !(0.0..=Q_CRITICAL).contains(&q) {
        return Err(SamplerError::Domain(format!("q = {q} outside [0, 2/27]")));
    }
    let theta = theta_of_q(q).map_err(|e| SamplerError::Domain(e.to_string()))?.value();
    let mut dec = BoltzmannDecider::new(rng, q, theta);
    if m == 2 && dec.rng.gen::<f64>() < dec.p_empty2 {
        return Ok(FiniteMap::empty_2gon());
    }
    Ok(FiniteMap::carve_from(m, (), &mut dec)?.0)
}

/// Root-face event of a polygon triangulation read from its patch code:
/// apex at boundary position j is `j − 1` steps right of the root or
/// `m − j` steps left; the nearer reading is used, right on ties.
pub fn root_event_of(code: &PatchCode, m: u64) -> Result<PeelEvent> {
    let parsed = code.parse(m)?;
    let toks = &parsed.tokens;
    let inner_in = |start: usize| {
        toks[start..parsed.end[start]].iter().filter(|t| matches!(t, PatchToken::Inner)).count() as u64
    };
    match toks[0] {
        PatchToken::Inner => Ok(PeelEvent::Alpha),
        PatchToken::Split(j) => {
            let a = 1;
            let b = parsed.end[a];
            if j - 1 <= m - j {
                Ok(PeelEvent::Boundary { side: Side::Right, i: j - 1, k: inner_in(a) })
            } else {
                Ok(PeelEvent::Boundary { side: Side::Left, i: m - j, k: inner_in(b) })
            }
        }
        PatchToken::Empty => Err(SamplerError::Domain("glued 2-gon has no root face".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::validate_finite;

    #[test]
    fn single_triangle_and_quads() {
        let t = uniform_polygon(3, 0, 1).unwrap();
        assert_eq!(t.code().unwrap().to_string(), "S2 E E");
        let mut seen = std::collections::HashSet::new();
        for seed in 0..200 {
            let q = uniform_polygon(4, 0, seed).unwrap();
            assert!(validate_finite(&q).is_ok());
            seen.insert(q.code().unwrap());
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn uniform_maps_validate() {
        for (m, n) in [(3, 1), (5, 7), (2, 3), (12, 40)] {
            for seed in 0..20 {
                let fm = uniform_polygon(m, n, seed).unwrap();
                let r = validate_finite(&fm);
                assert!(r.is_ok(), "{m} {n}: {:?}", r.violations);
                assert_eq!(fm.inner_count(), n);
                let code = fm.code().unwrap();
                assert_eq!(FiniteMap::from_code(m, &code).unwrap(), fm);
            }
        }
        assert!(uniform_polygon(2, 0, 0).unwrap().is_degenerate());
    }

    #[test]
    fn boltzmann_maps_validate() {
        for seed in 0..50 {
            let fm = boltzmann_polygon(4, 2.0 / 27.0, seed).unwrap();
            assert!(validate_finite(&fm).is_ok());
        }
        assert!(boltzmann_polygon(3, 0.08, 0).is_err());
        assert!(boltzmann_polygon(2, 0.0, 0).unwrap().is_degenerate());
    }

    #[test]
    fn root_events() {
        let c: PatchCode = "I S2 E E".parse().unwrap();
        assert_eq!(root_event_of(&c, 2).unwrap(), PeelEvent::Alpha);
        let c: PatchCode = "S2 E I S2 E E".parse().unwrap();
        assert_eq!(root_event_of(&c, 3).unwrap(), PeelEvent::Boundary { side: Side::Right, i: 1, k: 0 });
        let c: PatchCode = "S2 I S2 E E E".parse().unwrap();
        assert_eq!(root_event_of(&c, 3).unwrap(), PeelEvent::Boundary { side: Side::Right, i: 1, k: 1 });
    }
}
