//! Root-face decomposition of polygons.
//!
//! A triangulation of an m-gon is carved from its root edge: the root triangle
//! either has an inner apex (leaving an (m+1)-gon) or an apex on the boundary
//! at position j (leaving a j-gon and an (m+1−j)-gon). A 2-gon with no inner
//! vertex is empty and its two sides are glued. The preorder sequence of these
//! choices is the patch code.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::store::*;
use super::MapError;
use crate::enumeration::{ln_phi, ln_phi_ratio, ln_z_closed, phi_ratio_next_n, z_ratio_next, PhiLogTable};
use crate::numerics::{ln_central_binomial_over_4n, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchToken {
    /// Glued 2-gon.
    Empty,
    /// Root triangle with a new inner apex.
    Inner,
    /// Root triangle with apex at boundary position j.
    Split(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PatchCode(pub Vec<PatchToken>);

impl fmt::Display for PatchCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, tok) in self.0.iter().enumerate() {
            if t > 0 {
                f.write_str(" ")?;
            }
            match tok {
                PatchToken::Empty => f.write_str("E")?,
                PatchToken::Inner => f.write_str("I")?,
                PatchToken::Split(j) => write!(f, "S{j}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for PatchCode {
    type Err = MapError;
    fn from_str(s: &str) -> Result<Self, MapError> {
        s.split_whitespace()
            .map(|w| match w {
                "E" => Ok(PatchToken::Empty),
                "I" => Ok(PatchToken::Inner),
                _ => w
                    .strip_prefix('S')
                    .and_then(|x| x.parse().ok())
                    .map(PatchToken::Split)
                    .ok_or_else(|| MapError::Malformed(format!("bad patch token {w:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PatchCode)
    }
}

impl From<PatchCode> for String {
    fn from(c: PatchCode) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for PatchCode {
    type Error = MapError;
    fn try_from(s: String) -> Result<Self, MapError> {
        s.parse()
    }
}

/// A patch code checked against a perimeter, with subtree extents.
#[derive(Debug, Clone)]
pub(crate) struct ParsedCode {
    pub tokens: Vec<PatchToken>,
    /// One past the last token of the subtree starting at each index.
    pub end: Vec<usize>,
}

impl PatchCode {
    pub fn inner_count(&self) -> u64 {
        self.0.iter().filter(|t| matches!(t, PatchToken::Inner)).count() as u64
    }

    pub(crate) fn parse(&self, m: u64) -> Result<ParsedCode, MapError> {
        let toks = &self.0;
        let mut end = vec![0usize; toks.len()];
        // (perimeter, token index, children still open)
        let mut stack: Vec<(u64, usize, u8)> = Vec::new();
        let mut pending: Vec<u64> = vec![m];
        let mut idx = 0usize;
        let bad = |msg: String| MapError::Malformed(msg);
        loop {
            // read one subtree root for the next pending perimeter
            let Some(per) = pending.pop() else { break };
            let Some(&tok) = toks.get(idx) else {
                return Err(bad("patch code ended early".into()));
            };
            match tok {
                PatchToken::Empty => {
                    if per != 2 {
                        return Err(bad(format!("empty token at a {per}-gon")));
                    }
                    end[idx] = idx + 1;
                    idx += 1;
                    close(&mut stack, &mut end, idx);
                }
                PatchToken::Inner => {
                    stack.push((per, idx, 1));
                    pending.push(per + 1);
                    idx += 1;
                }
                PatchToken::Split(j) => {
                    if per < 3 || j < 2 || j > per - 1 {
                        return Err(bad(format!("split {j} at a {per}-gon")));
                    }
                    stack.push((per, idx, 2));
                    pending.push(per + 1 - j);
                    pending.push(j);
                    idx += 1;
                }
            }
        }
        if idx != toks.len() {
            return Err(bad("trailing patch tokens".into()));
        }
        Ok(ParsedCode { tokens: toks.clone(), end })
    }
}

fn close(stack: &mut Vec<(u64, usize, u8)>, end: &mut [usize], idx: usize) {
    while let Some(top) = stack.last_mut() {
        top.2 -= 1;
        if top.2 > 0 {
            return;
        }
        end[top.1] = idx;
        stack.pop();
    }
}

pub(crate) enum Child<C> {
    Empty,
    Poly(C),
}

pub(crate) enum Choice<C> {
    Inner(C),
    Split { j: u64, a: Child<C>, b: Child<C> },
    /// Leave the polygon as an unexpanded uniform triangulation with `inner` inner vertices.
    Seal { inner: u64 },
}

pub(crate) trait Decider {
    type Ctx;
    fn choose(&mut self, m: u64, ctx: &Self::Ctx, may_seal: bool) -> Result<Choice<Self::Ctx>, MapError>;
}

enum Work<C> {
    Poly { face: FaceId, root: HalfEdgeId, m: u64, ctx: C, may_seal: bool },
    EmitEmpty,
}

pub(crate) struct CarveOutcome {
    /// Patch code, if nothing was sealed and recording was asked for.
    pub code: Option<PatchCode>,
    pub new_inner: u64,
    pub sealed: Vec<FaceId>,
}

/// Start and end of boundary position `j` of the polygon rooted at `root`:
/// the half-edge ending at p_j and the one leaving it. Runs are split when
/// p_j falls inside one.
fn locate(store: &mut Store, root: HalfEdgeId, m: u64, j: u64) -> (HalfEdgeId, HalfEdgeId) {
    if j - 1 <= m - j {
        let mut pos = 0u64;
        let mut h = root;
        loop {
            let len = store.run(h);
            if pos + len == j {
                return (h, store.next(h));
            }
            if pos + len > j {
                let g = store.split_run(h, j - pos);
                return (h, g);
            }
            pos += len;
            h = store.next(h);
        }
    } else {
        let mut pos = m;
        let mut h = store.prev(root);
        loop {
            let len = store.run(h);
            let start = pos - len;
            if start == j {
                return (store.prev(h), h);
            }
            if start < j {
                let g = store.split_run(h, j - start);
                return (h, g);
            }
            pos = start;
            h = store.prev(h);
        }
    }
}

/// Triangulates polygon face `face` (perimeter `m`, root `root`) following `dec`.
pub(crate) fn carve<D: Decider>(
    store: &mut Store,
    face: FaceId,
    root: HalfEdgeId,
    m: u64,
    ctx: D::Ctx,
    dec: &mut D,
    may_seal_root: bool,
    triangle_kind: FaceKind,
    record: bool,
) -> Result<CarveOutcome, MapError> {
    let mut out = CarveOutcome { code: None, new_inner: 0, sealed: Vec::new() };
    let mut code = Vec::new();
    let mut stack = vec![Work::Poly { face, root, m, ctx, may_seal: may_seal_root }];
    while let Some(w) = stack.pop() {
        let (face, h0, m, ctx, may_seal) = match w {
            Work::EmitEmpty => {
                code.push(PatchToken::Empty);
                continue;
            }
            Work::Poly { face, root, m, ctx, may_seal } => (face, root, m, ctx, may_seal),
        };
        store.ensure_room(4)?;
        match dec.choose(m, &ctx, may_seal)? {
            Choice::Seal { inner } => {
                store.faces[face as usize] = FaceRecord { edge: h0, kind: FaceKind::Sealed { perimeter: m, inner } };
                out.sealed.push(face);
            }
            Choice::Inner(c) => {
                code.push(PatchToken::Inner);
                let hp = store.prev(h0);
                let hn = store.next(h0);
                let p0 = store.origin(h0);
                let p1 = store.dest(h0);
                let w = store.add_vertex(VertexKind::Inner);
                out.new_inner += 1;
                let (n1, n1t) = store.add_edge(p1, w);
                let (n2, n2t) = store.add_edge(w, p0);
                let tri = store.add_face(triangle_kind, h0);
                store.set_cycle(&[h0, n1, n2], tri);
                store.link(hp, n2t);
                store.link(n2t, n1t);
                store.link(n1t, hn);
                store.set_face(n2t, face);
                store.set_face(n1t, face);
                store.faces[face as usize] = FaceRecord { edge: n2t, kind: FaceKind::Open };
                stack.push(Work::Poly { face, root: n2t, m: m + 1, ctx: c, may_seal: true });
            }
            Choice::Split { j, a, b } => {
                code.push(PatchToken::Split(j));
                let (hb, ha) = locate(store, h0, m, j);
                let h1 = store.next(h0);
                let hl = store.prev(h0);
                let p0 = store.origin(h0);
                let p1 = store.dest(h0);
                let pj = store.dest(hb);
                let a_empty = matches!(a, Child::Empty);
                let b_empty = matches!(b, Child::Empty);
                let (s1, s1t) = if a_empty { (h1, NONE) } else { store.add_edge(p1, pj) };
                let (s2, s2t) = if b_empty { (hl, NONE) } else { store.add_edge(pj, p0) };
                let tri = if a_empty && b_empty { face } else { store.add_face(triangle_kind, h0) };
                store.set_cycle(&[h0, s1, s2], tri);
                store.faces[tri as usize] = FaceRecord { edge: h0, kind: triangle_kind };
                // Which child keeps the parent's face id: the bigger one.
                let size_a = j;
                let size_b = m + 1 - j;
                let keep_b = !b_empty && (a_empty || size_b >= size_a);
                let mut push_b = None;
                let mut push_a = None;
                if !b_empty {
                    let fb = if keep_b { face } else { store.add_face(FaceKind::Open, s2t) };
                    store.link(s2t, ha);
                    store.link(hl, s2t);
                    store.set_face(s2t, fb);
                    if !keep_b {
                        let mut x = ha;
                        while x != s2t {
                            store.set_face(x, fb);
                            x = store.next(x);
                        }
                    }
                    store.faces[fb as usize] = FaceRecord { edge: s2t, kind: FaceKind::Open };
                    push_b = Some((fb, s2t));
                }
                if !a_empty {
                    let fa = if keep_b { store.add_face(FaceKind::Open, s1t) } else { face };
                    store.link(s1t, h1);
                    store.link(hb, s1t);
                    store.set_face(s1t, fa);
                    if fa != face {
                        let mut x = h1;
                        while x != s1t {
                            store.set_face(x, fa);
                            x = store.next(x);
                        }
                    }
                    store.faces[fa as usize] = FaceRecord { edge: s1t, kind: FaceKind::Open };
                    push_a = Some((fa, s1t));
                }
                match (b, push_b) {
                    (Child::Poly(c), Some((fb, r))) => {
                        stack.push(Work::Poly { face: fb, root: r, m: size_b, ctx: c, may_seal: true })
                    }
                    _ => stack.push(Work::EmitEmpty),
                }
                match (a, push_a) {
                    (Child::Poly(c), Some((fa, r))) => {
                        stack.push(Work::Poly { face: fa, root: r, m: size_a, ctx: c, may_seal: true })
                    }
                    _ => stack.push(Work::EmitEmpty),
                }
            }
        }
    }
    if record && out.sealed.is_empty() {
        out.code = Some(PatchCode(code));
    }
    Ok(out)
}

/// Replays a parsed patch code.
pub(crate) struct CodeDecider<'a> {
    pub code: &'a ParsedCode,
}

impl Decider for CodeDecider<'_> {
    type Ctx = usize;
    fn choose(&mut self, m: u64, &idx: &usize, _may_seal: bool) -> Result<Choice<usize>, MapError> {
        let child = |i: usize| match self.code.tokens[i] {
            PatchToken::Empty => Child::Empty,
            _ => Child::Poly(i),
        };
        match self.code.tokens[idx] {
            PatchToken::Inner => Ok(Choice::Inner(idx + 1)),
            PatchToken::Split(j) => {
                debug_assert!(j < m);
                let a = idx + 1;
                let b = self.code.end[a];
                Ok(Choice::Split { j, a: child(a), b: child(b) })
            }
            PatchToken::Empty => Err(MapError::Malformed("empty token at a polygon".into())),
        }
    }
}

/// Uniform triangulation with a prescribed number of inner vertices.
pub(crate) struct UniformDecider<'a, R: Rng + ?Sized> {
    pub rng: &'a mut R,
    pub table: Option<&'a PhiLogTable>,
    /// Seal polygons with perimeter + inner count above this.
    pub seal_above: Option<u64>,
}

impl<R: Rng + ?Sized> UniformDecider<'_, R> {
    fn lnphi(&self, n: u64, m: u64) -> f64 {
        match self.table {
            Some(t) if t.covers(n, m) => t.get(n, m),
            _ => ln_phi(n, m),
        }
    }
    fn ln_ratio(&self, na: u64, ma: u64, nb: u64, mb: u64) -> f64 {
        match self.table {
            Some(t) if t.covers(na, ma) && t.covers(nb, mb) => t.get(na, ma) - t.get(nb, mb),
            _ => ln_phi_ratio(na, ma, nb, mb),
        }
    }
}

fn uniform_child(n: u64, m: u64) -> Child<u64> {
    if m == 2 && n == 0 {
        Child::Empty
    } else {
        Child::Poly(n)
    }
}

/// Allowed shortfall of the cumulative weight before a draw is declared a leak.
fn leak_tolerance(scale: f64) -> f64 {
    1e-9 + 1e-15 * scale.abs()
}

impl<R: Rng + ?Sized> Decider for UniformDecider<'_, R> {
    type Ctx = u64;
    fn choose(&mut self, m: u64, &n: &u64, may_seal: bool) -> Result<Choice<u64>, MapError> {
        if may_seal {
            if let Some(t) = self.seal_above {
                if m + n > t {
                    return Ok(Choice::Seal { inner: n });
                }
            }
        }
        if m == 2 {
            return Ok(Choice::Inner(n - 1));
        }
        if m == 3 && n == 0 {
            return Ok(Choice::Split { j: 2, a: Child::Empty, b: Child::Empty });
        }
        if m >= 5 && m + n > TWO_STAGE_ABOVE {
            return self.choose_two_stage(m, n);
        }
        let u: f64 = self.rng.gen();
        let mut acc = CompensatedSum::new();
        if n >= 1 {
            acc.add(self.ln_ratio(n - 1, m + 1, n, m).exp());
            if acc.value() > u {
                return Ok(Choice::Inner(n - 1));
            }
        }
        // Pieces are visited small side first; (j, n1) and (m+1−j, n−n1) have equal weight.
        let total = m - 3 + n;
        let mut last = None;
        let mut s = 0u64;
        while 2 * s <= total {
            let j_lo = 2.max((s + 2).saturating_sub(n));
            let j_hi = (m - 1).min(s + 2);
            for j in j_lo..=j_hi {
                let n1 = s + 2 - j;
                let w = (self.lnphi(n1, j) + self.ln_ratio(n - n1, m + 1 - j, n, m)).exp();
                acc.add(w);
                last = Some((j, n1));
                if acc.value() > u {
                    return Ok(split_uniform(m, n, j, n1));
                }
                if 2 * s < total {
                    acc.add(w);
                    last = Some((m + 1 - j, n - n1));
                    if acc.value() > u {
                        return Ok(split_uniform(m, n, m + 1 - j, n - n1));
                    }
                }
            }
            s += 1;
        }
        if u - acc.value() <= leak_tolerance(self.lnphi(n, m)) {
            if let Some((j, n1)) = last {
                return Ok(split_uniform(m, n, j, n1));
            }
            return Ok(Choice::Inner(n - 1));
        }
        Err(MapError::NumericLeak { m, n, mass: acc.value() })
    }
}

/// Above this perimeter plus inner count the root face is drawn apex first.
const TWO_STAGE_ABOVE: u64 = 1024;

/// Terms `φ_{n1,j} φ_{n−n1,m+1−j}` over `n1`, scaled by their largest one.
/// The sequence is log-concave, so it is walked out from the mode until the
/// terms vanish.
struct SplitTerms {
    mode: u64,
    ln_peak: f64,
    right: Vec<f64>,
    left: Vec<f64>,
    sum: f64,
}

impl SplitTerms {
    fn new(m: u64, n: u64, j: u64, ln_peak_of: impl Fn(u64) -> f64) -> Self {
        let jb = m + 1 - j;
        let r = |n1: u64| phi_ratio_next_n(n1, j) / phi_ratio_next_n(n - n1 - 1, jb);
        let (mut lo, mut hi) = (0u64, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if r(mid) < 1.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mode = lo;
        let mut sum = CompensatedSum::new();
        sum.add(1.0);
        let (mut right, mut left) = (Vec::new(), Vec::new());
        let (mut t, mut k) = (1.0, mode);
        while k < n {
            t *= r(k);
            k += 1;
            right.push(t);
            sum.add(t);
            if t < 1e-18 * sum.value() {
                break;
            }
        }
        let (mut t, mut k) = (1.0, mode);
        while k > 0 {
            k -= 1;
            t /= r(k);
            left.push(t);
            sum.add(t);
            if t < 1e-18 * sum.value() {
                break;
            }
        }
        SplitTerms { mode, ln_peak: ln_peak_of(mode), right, left, sum: sum.value() }
    }

    /// Total relative to `φ_{n,m}`.
    fn mass(&self) -> f64 {
        self.sum * self.ln_peak.exp()
    }

    /// Inverse cdf over `n1` in the order mode, right side, left side.
    fn pick(&self, v: f64) -> u64 {
        let target = v * self.sum;
        let mut acc = 1.0;
        if acc > target {
            return self.mode;
        }
        for (d, t) in self.right.iter().enumerate() {
            acc += t;
            if acc > target {
                return self.mode + d as u64 + 1;
            }
        }
        for (d, t) in self.left.iter().enumerate() {
            acc += t;
            if acc > target {
                return self.mode - d as u64 - 1;
            }
        }
        match (self.left.len(), self.right.len()) {
            (0, r) => self.mode + r as u64,
            (l, _) => self.mode - l as u64,
        }
    }
}

/// Weights of the root-face apex summed over the inner split, from their
/// exact values at `j = 2` and at the middle apex.
struct ApexWeights {
    m: u64,
    slope: f64,
    base: f64,
}

impl ApexWeights {
    fn new(m: u64, at_two: f64, at_middle: f64) -> Self {
        let jb = (m + 1) / 2;
        let slope = (at_middle / apex_scale(m, jb) - at_two) / (apex_product(m, jb) - apex_product(m, 2));
        ApexWeights { m, slope, base: at_two - slope * apex_product(m, 2) }
    }

    fn mass(&self, j: u64) -> f64 {
        let m = self.m;
        apex_scale(m, j) * (self.slope * apex_product(m, j) + self.base)
    }
}

/// `(j−1)(m−j)` in floating point, since it overflows u64 for very large m.
fn apex_product(m: u64, j: u64) -> f64 {
    (j - 1) as f64 * (m - j) as f64
}

/// `cat(j−2) cat(m−1−j) / (cat(0) cat(m−3))`.
fn apex_scale(m: u64, j: u64) -> f64 {
    (ln_cat_reduced(j - 2) + ln_cat_reduced(m - 1 - j) - ln_cat_reduced(m - 3) + 2f64.ln()).exp()
}

/// `ln(cat(p) / 4^p)` for `cat(p) = (2p)! / (p! (p+2)!)`.
fn ln_cat_reduced(p: u64) -> f64 {
    let x = p as f64;
    ln_central_binomial_over_4n(p) - (x + 1.0).ln() - (x + 2.0).ln()
}

impl<R: Rng + ?Sized> UniformDecider<'_, R> {
    /// Same law as the grid walk in `choose`, in O(m + n) steps.
    ///
    /// Summed over the inner split, the weight of apex `j` is
    /// `cat(j−2) cat(m−1−j) (U (j−1)(m−j) + V) / φ_{n,m}`: the partition
    /// function of a `(p+2)`-gon is `cat(p)` times a `p`-free power times
    /// a factor linear in `p`, and the two pieces' `p` add up to `m − 3`.
    /// `U` and `V` come from two exact sums.
    fn choose_two_stage(&mut self, m: u64, n: u64) -> Result<Choice<u64>, MapError> {
        let u: f64 = self.rng.gen();
        let v: f64 = self.rng.gen();
        let mut acc = CompensatedSum::new();
        if n >= 1 {
            acc.add(self.ln_ratio(n - 1, m + 1, n, m).exp());
            if acc.value() > u {
                return Ok(Choice::Inner(n - 1));
            }
        }
        let terms = |j: u64| SplitTerms::new(m, n, j, |n1| self.lnphi(n1, j) + self.ln_ratio(n - n1, m + 1 - j, n, m));
        let apex = ApexWeights::new(m, terms(2).mass(), terms((m + 1) / 2).mass());
        let jb = (m + 1) / 2;
        let mut chosen = None;
        let mut last = None;
        'walk: for j in 2..=jb {
            let mirror = m + 1 - j;
            for jj in [j, mirror].into_iter().take(if mirror == j { 1 } else { 2 }) {
                acc.add(apex.mass(jj).max(0.0));
                last = Some(jj);
                if acc.value() > u {
                    chosen = Some(jj);
                    break 'walk;
                }
            }
        }
        let j = match (chosen, last) {
            (Some(j), _) => j,
            (None, Some(j)) if u - acc.value() <= leak_tolerance(self.lnphi(n, m)) => j,
            _ => return Err(MapError::NumericLeak { m, n, mass: acc.value() }),
        };
        let n1 = terms(j).pick(v);
        Ok(split_uniform(m, n, j, n1))
    }
}

fn split_uniform(m: u64, n: u64, j: u64, n1: u64) -> Choice<u64> {
    Choice::Split { j, a: uniform_child(n1, j), b: uniform_child(n - n1, m + 1 - j) }
}

/// Sum of the root-face case weights of a uniform (m, n) polygon.
pub fn uniform_node_weight_sum(m: u64, n: u64) -> f64 {
    if m == 2 {
        return if n >= 1 { (ln_phi(n - 1, 3) - ln_phi(n, 2)).exp() } else { 0.0 };
    }
    let base = ln_phi(n, m);
    let mut acc = CompensatedSum::new();
    if n >= 1 {
        acc.add((ln_phi(n - 1, m + 1) - base).exp());
    }
    for j in 2..m {
        for n1 in 0..=n {
            acc.add((ln_phi(n1, j) + ln_phi(n - n1, m + 1 - j) - base).exp());
        }
    }
    acc.value()
}

/// Boltzmann triangulation with weight q per inner vertex.
pub(crate) struct BoltzmannDecider<'a, R: Rng + ?Sized> {
    pub rng: &'a mut R,
    pub q: f64,
    pub theta: f64,
    /// 1/Z_2: probability that a 2-gon is empty.
    pub p_empty2: f64,
}

impl<'a, R: Rng + ?Sized> BoltzmannDecider<'a, R> {
    pub fn new(rng: &'a mut R, q: f64, theta: f64) -> Self {
        let p_empty2 = (-ln_z_closed(2, theta)).exp();
        BoltzmannDecider { rng, q, theta, p_empty2 }
    }
    fn child(&mut self, size: u64) -> Child<()> {
        if size == 2 && self.rng.gen::<f64>() < self.p_empty2 {
            Child::Empty
        } else {
            Child::Poly(())
        }
    }
}

impl<R: Rng + ?Sized> Decider for BoltzmannDecider<'_, R> {
    type Ctx = ();
    fn choose(&mut self, m: u64, _: &(), _may_seal: bool) -> Result<Choice<()>, MapError> {
        if m == 2 {
            return Ok(Choice::Inner(()));
        }
        let u: f64 = self.rng.gen();
        let mut acc = CompensatedSum::new();
        let mut pick = None;
        acc.add(self.q * z_ratio_next(m, self.theta));
        if acc.value() > u {
            return Ok(Choice::Inner(()));
        }
        // w_j = Z_j Z_{m+1−j} / Z_m, symmetric in j ↔ m+1−j
        let mut zj = ln_z_closed(2, self.theta).exp();
        let mut tail = 1.0 / z_ratio_next(m - 1, self.theta);
        let mut j = 2u64;
        while 2 * j <= m + 1 {
            let w = zj * tail;
            acc.add(w);
            pick = Some(j);
            if acc.value() > u {
                break;
            }
            if 2 * j < m + 1 {
                acc.add(w);
                pick = Some(m + 1 - j);
                if acc.value() > u {
                    break;
                }
            }
            zj *= z_ratio_next(j, self.theta);
            tail /= z_ratio_next(m - j, self.theta);
            j += 1;
        }
        if acc.value() <= u && u - acc.value() > leak_tolerance(m as f64) {
            return Err(MapError::NumericLeak { m, n: 0, mass: acc.value() });
        }
        let j = pick.expect("m ≥ 3 has a split");
        let a = self.child(j);
        let b = self.child(m + 1 - j);
        Ok(Choice::Split { j, a, b })
    }
}

/// Sum of the root-face case weights of a Boltzmann m-gon.
pub fn boltzmann_node_weight_sum(m: u64, q: f64, theta: f64) -> f64 {
    let lz = |k| ln_z_closed(k, theta);
    if m == 2 {
        // the non-empty 2-gon: q Z_3 / (Z_2 − 1)
        return q * lz(3).exp() / (lz(2).exp() - 1.0);
    }
    let mut acc = CompensatedSum::new();
    acc.add(q * (lz(m + 1) - lz(m)).exp());
    for j in 2..m {
        acc.add((lz(j) + lz(m + 1 - j) - lz(m)).exp());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_text_round_trip() {
        let c = PatchCode(vec![PatchToken::Split(3), PatchToken::Inner, PatchToken::Split(2), PatchToken::Empty, PatchToken::Empty, PatchToken::Empty]);
        let s = c.to_string();
        assert_eq!(s, "S3 I S2 E E E");
        assert_eq!(s.parse::<PatchCode>().unwrap(), c);
        assert!("S3 X".parse::<PatchCode>().is_err());
    }

    #[test]
    fn parse_checks_shape() {
        let tri: PatchCode = "S2 E E".parse().unwrap();
        let p = tri.parse(3).unwrap();
        assert_eq!(p.end, vec![3, 2, 3]);
        assert!(tri.parse(4).is_err());
        let one_inner_2gon: PatchCode = "I S2 E E".parse().unwrap();
        assert!(one_inner_2gon.parse(2).is_ok());
        assert_eq!(one_inner_2gon.inner_count(), 1);
        let quad: PatchCode = "S3 S2 E E E".parse().unwrap();
        let p = quad.parse(4).unwrap();
        assert_eq!(p.end[1], 4);
        assert!("S2 E".parse::<PatchCode>().unwrap().parse(3).is_err());
        assert!("S2 E E E".parse::<PatchCode>().unwrap().parse(3).is_err());
    }

    #[test]
    fn uniform_weights_sum_to_one() {
        for m in 2..9 {
            for n in 0..9 {
                if m == 2 && n == 0 {
                    continue;
                }
                let s = uniform_node_weight_sum(m, n);
                assert!((s - 1.0).abs() < 1e-9, "m={m} n={n} sum={s}");
            }
        }
    }

    #[test]
    fn boltzmann_weights_sum_to_one() {
        for &q in &[0.0, 0.02, 0.05, 2.0 / 27.0] {
            let theta = crate::enumeration::theta_of_q(q).unwrap().value();
            for m in 2..30 {
                let s = boltzmann_node_weight_sum(m, q, theta);
                assert!((s - 1.0).abs() < 1e-9 || (m == 2 && q == 0.0), "m={m} q={q} sum={s}");
            }
        }
    }

    fn exact_split(m: u64, n: u64, j: u64, n1: u64) -> f64 {
        (ln_phi(n1, j) + ln_phi(n - n1, m + 1 - j) - ln_phi(n, m)).exp()
    }

    #[test]
    fn apex_weights_match_direct_sums() {
        for (m, n) in [(5u64, 0u64), (6, 3), (9, 14), (30, 40), (120, 700)] {
            let terms = |j: u64| SplitTerms::new(m, n, j, |n1| ln_phi(n1, j) + ln_phi(n - n1, m + 1 - j) - ln_phi(n, m));
            let apex = ApexWeights::new(m, terms(2).mass(), terms((m + 1) / 2).mass());
            let mut total = if n > 0 { (ln_phi(n - 1, m + 1) - ln_phi(n, m)).exp() } else { 0.0 };
            for j in 2..m {
                let direct: f64 = (0..=n).map(|n1| exact_split(m, n, j, n1)).sum();
                assert!((apex.mass(j) - direct).abs() <= 1e-10 * direct, "m={m} n={n} j={j}: {} vs {direct}", apex.mass(j));
                assert!((terms(j).mass() - direct).abs() <= 1e-10 * direct);
                total += direct;
            }
            assert!((total - 1.0).abs() < 1e-10, "{total}");
        }
    }

    #[test]
    fn two_stage_draws_follow_the_split_law() {
        let (m, n) = (7u64, 5u64);
        let mut rng = crate::rng::stream_rng(41, 0);
        let mut dec = UniformDecider { rng: &mut rng, table: None, seal_above: None };
        let mut cells: Vec<(Option<(u64, u64)>, f64)> = vec![(None, (ln_phi(n - 1, m + 1) - ln_phi(n, m)).exp())];
        for j in 2..m {
            for n1 in 0..=n {
                cells.push((Some((j, n1)), exact_split(m, n, j, n1)));
            }
        }
        let mut counts = vec![0u64; cells.len()];
        let trials = 200_000;
        for _ in 0..trials {
            let key = match dec.choose_two_stage(m, n).unwrap() {
                Choice::Inner(_) => None,
                Choice::Split { j, a, .. } => Some((j, match a {
                    Child::Poly(n1) => n1,
                    Child::Empty => 0,
                })),
                Choice::Seal { .. } => unreachable!(),
            };
            counts[cells.iter().position(|c| c.0 == key).unwrap()] += 1;
        }
        let stat: f64 = cells
            .iter()
            .zip(&counts)
            .filter(|(c, _)| c.1 * trials as f64 >= 5.0)
            .map(|(c, &o)| {
                let e = c.1 * trials as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        let dof = cells.iter().filter(|c| c.1 * trials as f64 >= 5.0).count() as f64 - 1.0;
        // about 4.4 standard deviations above the mean of the statistic
        assert!(stat < dof + 4.4 * (2.0 * dof).sqrt(), "chi-square {stat} on {dof} dof");
    }

    #[test]
    fn large_uniform_fill_is_fast() {
        let mut rng = crate::rng::stream_rng(3, 0);
        let mut dec = UniformDecider { rng: &mut rng, table: None, seal_above: None };
        let start = std::time::Instant::now();
        for _ in 0..200 {
            dec.choose_two_stage(23741, 15914).unwrap();
        }
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }

    #[test]
    fn huge_perimeter_decisions_stay_small() {
        let mut rng = crate::rng::stream_rng(4, 0);
        let mut dec = UniformDecider { rng: &mut rng, table: None, seal_above: None };
        let start = std::time::Instant::now();
        for n in [0, 40, 1_000_000] {
            for _ in 0..20 {
                dec.choose_two_stage(40_000_000_001, n).unwrap();
            }
        }
        assert!(start.elapsed().as_secs_f64() < 20.0, "{:?}", start.elapsed());
    }
}
