//! Path-level samplers: the kinetic law, the exact-uniform two-sided law
//! by pinned renewal of tilted excursions, and the importance-sampling
//! representation of the full uniform law via truncated excursions.
//!
//! RNG contract: every Monte Carlo draw runs on its own counter-based
//! stream, `stream_rng(seed, draw_index)`, so batch results are a
//! deterministic function of the seed alone, independent of how draws are
//! scheduled across workers.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::effective::{completion_mass, truncate, EffectiveExcursion, PStar, U_CAP};
use crate::error::{Error, Result};
use crate::lattice::{GeneralDecomposition, LatticePath, RangeIndex, Step};
use crate::strip::{strip_tables, StripTables};

pub const DEFAULT_RESTART_CAP: usize = 100_000;

/// Counter-based stream: ChaCha with the draw index as the stream id.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Steps that keep the path prudent from `pos` given the occupied range.
pub fn admissible_steps(range: &RangeIndex, pos: (i64, i64)) -> Vec<Step> {
    Step::ALL
        .iter()
        .copied()
        .filter(|&s| !range.ray_hits(pos, s))
        .collect()
}

/// Kinetic prudent walk: each step uniform over the admissible
/// continuations.
pub fn sample_kinetic<R: Rng + ?Sized>(l: usize, rng: &mut R) -> LatticePath {
    let mut range = RangeIndex::with_origin();
    let mut pos = (0i64, 0i64);
    let mut steps = Vec::with_capacity(l);
    for _ in 0..l {
        let choices = admissible_steps(&range, pos);
        let s = choices[rng.random_range(0..choices.len())];
        let (dx, dy) = s.offset();
        pos = (pos.0 + dx, pos.1 + dy);
        range.insert(pos);
        steps.push(s);
    }
    LatticePath::new(steps)
}

/// Kinetic-law probability of a path: 1/4 for the first step, then 1/3
/// after every range-growing step and 1/2 otherwise. The number of
/// range-growing steps among the first L-1 equals the sum of the two
/// extents of the range at time L-1, which gives the closed form.
pub fn kinetic_pmf(path: &LatticePath) -> f64 {
    let l = path.len();
    if l == 0 {
        return 1.0;
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (0i64, 0i64, 0i64, 0i64);
    let mut p = (0i64, 0i64);
    for s in path.steps().iter().take(l - 1) {
        let (dx, dy) = s.offset();
        p = (p.0 + dx, p.1 + dy);
        xmin = xmin.min(p.0);
        xmax = xmax.max(p.0);
        ymin = ymin.min(p.1);
        ymax = ymax.max(p.1);
    }
    let growth = ((xmax - xmin) + (ymax - ymin)) as i32;
    0.25 * (1.0f64 / 3.0).powi(growth) * 0.5f64.powi(l as i32 - 1 - growth)
}

/// Render an effective excursion as its flipped representative in the
/// excursion set I_t: east extension steps with upward stretches for
/// positive increments.
pub fn excursion_to_flipped_path(exc: &EffectiveExcursion) -> LatticePath {
    let mut steps = Vec::with_capacity(exc.total_len());
    for u in exc.increments() {
        steps.push(Step::E);
        let dir = if u > 0 { Step::N } else { Step::S };
        for _ in 0..u.unsigned_abs() {
            steps.push(dir);
        }
    }
    LatticePath::new(steps)
}

/// Assemble a two-sided (NE) lattice path from alternating effective
/// excursions: odd excursions extend east and dip below their starting
/// row, even ones extend north and dip west of their starting column.
pub fn build_lattice_from_excursions(excs: &[EffectiveExcursion]) -> Result<LatticePath> {
    let mut steps = Vec::new();
    for (k, exc) in excs.iter().enumerate() {
        if !exc.is_nonneg() || exc.last() != 0 {
            return Err(Error::Precondition(format!(
                "excursion {k} is not a nonnegative excursion returning to 0"
            )));
        }
        let horizontal = k % 2 == 0;
        for u in exc.increments() {
            steps.push(if horizontal { Step::E } else { Step::N });
            let dir = match (horizontal, u > 0) {
                (true, true) => Step::S,
                (true, false) => Step::N,
                (false, true) => Step::W,
                (false, false) => Step::E,
            };
            for _ in 0..u.unsigned_abs() {
                steps.push(dir);
            }
        }
    }
    Ok(LatticePath::new(steps))
}

/// Pinned-renewal sampler for the uniform two-sided law: i.i.d. tilted
/// excursions, restarted until their total length hits L exactly.
pub struct TwoSidedSampler<'a> {
    pstar: &'a PStar,
    pub restart_cap: usize,
}

impl<'a> TwoSidedSampler<'a> {
    pub fn new(pstar: &'a PStar) -> Self {
        TwoSidedSampler {
            pstar,
            restart_cap: DEFAULT_RESTART_CAP,
        }
    }

    /// Pinned excursion lengths summing to exactly L, plus the number of
    /// attempts the rejection took.
    pub fn sample_lengths<R: Rng + ?Sized>(
        &self,
        l: usize,
        rng: &mut R,
    ) -> Result<(Vec<usize>, usize)> {
        if l == 0 {
            return Err(Error::Precondition("length must be at least 1".into()));
        }
        for attempt in 1..=self.restart_cap {
            let mut lengths = Vec::new();
            let mut total = 0usize;
            loop {
                let t = self.pstar.sample_t(rng);
                total += t;
                if total > l {
                    break;
                }
                lengths.push(t);
                if total == l {
                    return Ok((lengths, attempt));
                }
            }
        }
        Err(Error::SamplerStall(format!(
            "pinning at L = {l} failed within {} restarts",
            self.restart_cap
        )))
    }

    /// Draw the excursion sequence of a uniform two-sided path of length L.
    pub fn sample_excursions<R: Rng + ?Sized>(
        &self,
        l: usize,
        rng: &mut R,
    ) -> Result<Vec<EffectiveExcursion>> {
        let (lengths, _) = self.sample_lengths(l, rng)?;
        lengths
            .into_iter()
            .map(|t| self.pstar.dp().sample_path(t, rng))
            .collect()
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Result<LatticePath> {
        let excs = self.sample_excursions(l, rng)?;
        build_lattice_from_excursions(&excs)
    }
}

/// Lazy evaluation of a two-sided path from its excursion skeleton:
/// positions at excursion boundaries come from the extension counts alone,
/// and intermediate vertices walk a single excursion.
pub struct TwoSidedPathView<'a> {
    excs: &'a [EffectiveExcursion],
    /// (cumulative steps, x, y) at each excursion boundary.
    boundary: Vec<(usize, i64, i64)>,
}

impl<'a> TwoSidedPathView<'a> {
    pub fn new(excs: &'a [EffectiveExcursion]) -> Self {
        let mut boundary = Vec::with_capacity(excs.len() + 1);
        let (mut steps, mut x, mut y) = (0usize, 0i64, 0i64);
        boundary.push((steps, x, y));
        for (k, exc) in excs.iter().enumerate() {
            steps += exc.total_len();
            if k % 2 == 0 {
                x += exc.num_steps() as i64;
            } else {
                y += exc.num_steps() as i64;
            }
            boundary.push((steps, x, y));
        }
        TwoSidedPathView { excs, boundary }
    }

    pub fn len(&self) -> usize {
        self.boundary.last().unwrap().0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn endpoint(&self) -> (i64, i64) {
        let &(_, x, y) = self.boundary.last().unwrap();
        (x, y)
    }

    /// Vertex of the assembled lattice path after `step` steps.
    pub fn position(&self, step: usize) -> (i64, i64) {
        debug_assert!(step <= self.len());
        let k = match self.boundary.binary_search_by_key(&step, |b| b.0) {
            Ok(i) => return (self.boundary[i].1, self.boundary[i].2),
            Err(i) => i - 1,
        };
        let (base_steps, mut x, mut y) = self.boundary[k];
        let horizontal = k % 2 == 0;
        let mut left = step - base_steps;
        for u in self.excs[k].increments() {
            if left == 0 {
                break;
            }
            if horizontal {
                x += 1;
            } else {
                y += 1;
            }
            left -= 1;
            let m = (u.unsigned_abs() as usize).min(left);
            // Transverse offsets dip inward: down for horizontal
            // excursions, west for vertical ones.
            let delta = if u > 0 { -(m as i64) } else { m as i64 };
            if horizontal {
                y += delta;
            } else {
                x += delta;
            }
            left -= m;
        }
        (x, y)
    }
}

/// Cache of strip tables keyed by slab width, plus the completion-mass
/// vector they share. Completed tables are immutable and shared. An
/// optional disk layer persists tables across runs.
pub struct StripCache {
    tilt: crate::effective::TiltParams,
    zbar: RwLock<Arc<Vec<f64>>>,
    tables: RwLock<HashMap<i64, Arc<StripTables>>>,
    disk: Option<crate::io::TableCache>,
    pub t_hard_cap: usize,
}

impl StripCache {
    pub fn new(tilt: crate::effective::TiltParams) -> Self {
        let zbar = completion_mass(tilt.lambda_star, 768);
        StripCache {
            tilt,
            zbar: RwLock::new(Arc::new(zbar)),
            tables: RwLock::new(HashMap::new()),
            disk: None,
            t_hard_cap: 2048,
        }
    }

    /// Cache backed by a directory (see [`crate::io::CACHE_DIR_ENV`]).
    pub fn with_disk(tilt: crate::effective::TiltParams, disk: crate::io::TableCache) -> Self {
        let mut cache = StripCache::new(tilt);
        cache.disk = Some(disk);
        cache
    }

    pub fn tilt(&self) -> crate::effective::TiltParams {
        self.tilt
    }

    fn zbar_for(&self, r: i64) -> Arc<Vec<f64>> {
        let needed = r as usize + U_CAP + 2;
        {
            let z = self.zbar.read().unwrap();
            if z.len() > needed {
                return Arc::clone(&z);
            }
        }
        let bigger = Arc::new(completion_mass(self.tilt.lambda_star, needed.max(768) * 2));
        let mut slot = self.zbar.write().unwrap();
        if bigger.len() > slot.len() {
            *slot = Arc::clone(&bigger);
        }
        Arc::clone(&slot)
    }

    /// Table for slab width r covering lengths up to at least t_need.
    pub fn tables(&self, r: i64, t_need: usize) -> Result<Arc<StripTables>> {
        if t_need > self.t_hard_cap {
            return Err(Error::Capacity(format!(
                "strip table request (R = {r}, t = {t_need}) beyond the hard cap {}",
                self.t_hard_cap
            )));
        }
        {
            let map = self.tables.read().unwrap();
            if let Some(t) = map.get(&r) {
                if t.t_max >= t_need {
                    return Ok(Arc::clone(t));
                }
            }
        }
        let t_max = t_need.next_power_of_two().max(64).min(self.t_hard_cap);
        let zbar = self.zbar_for(r);
        let built = match &self.disk {
            Some(disk) => Arc::new(disk.get_or_build(r, t_max, &self.tilt, &zbar)?),
            None => Arc::new(strip_tables(r, t_max, &self.tilt, &zbar)?),
        };
        let mut map = self.tables.write().unwrap();
        let entry = map.entry(r).or_insert_with(|| Arc::clone(&built));
        if entry.t_max < built.t_max {
            *entry = Arc::clone(&built);
        }
        Ok(Arc::clone(entry))
    }
}

/// A sampled path under the importance representation of the uniform law.
#[derive(Debug, Clone)]
pub struct WeightedPath {
    pub path: LatticePath,
    pub weight: f64,
    pub decomposition: GeneralDecomposition,
}

/// Importance sampler for the uniform prudent law (reduced symmetry class:
/// first step east, first vertical step north). Draws i.i.d. tilted
/// excursions, truncates each at the current slab width, and carries the
/// likelihood ratio of crossing excursions plus the incomplete-tail
/// factor. Weights are exactly 1 on samples whose excursions beyond the
/// first never cross and whose tail is empty.
pub struct UniformIsSampler {
    pstar: Arc<PStar>,
    cache: Arc<StripCache>,
}

struct SampledExcursion {
    exc: EffectiveExcursion,
    eps: u8,
}

impl UniformIsSampler {
    pub fn new(pstar: Arc<PStar>, cache: Arc<StripCache>) -> Self {
        UniformIsSampler { pstar, cache }
    }

    pub fn pstar(&self) -> &PStar {
        &self.pstar
    }

    pub fn sample<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Result<WeightedPath> {
        if l == 0 {
            return Err(Error::Precondition("length must be at least 1".into()));
        }
        let mut excs: Vec<SampledExcursion> = Vec::new();
        let mut weight = 1.0f64;
        let (mut r_prev2, mut r_prev1) = (0i64, 0i64);
        let mut total = 0usize;
        let tail_len;
        let tail_slab;
        loop {
            let raw = self.pstar.sample_excursion(rng)?;
            let tr = truncate(&raw, r_prev1)?;
            let (t, n, eps) = (tr.t(), tr.n(), tr.eps);
            if total + t > l {
                tail_len = l - total;
                tail_slab = r_prev1;
                break;
            }
            let index = excs.len() + 1;
            let exc = if eps == 1 && index >= 2 {
                // Likelihood ratio for a crossing excursion, then redraw
                // its fine structure from the confined law the uniform
                // measure induces.
                let tables = self.cache.tables(r_prev1, t)?;
                let num = tables.l(t, n, 1);
                let den = tables.lstar(t, n, 1);
                debug_assert!(den > 0.0);
                weight *= num / den;
                sample_confined_bridge(r_prev1, t, n, rng)?
            } else {
                // eps = 0 excursions already follow the confined uniform
                // conditional; the first excursion is a forced flat run.
                tr.excursion
            };
            excs.push(SampledExcursion { exc, eps });
            let r_new = r_prev2 + n as i64;
            r_prev2 = r_prev1;
            r_prev1 = r_new;
            total += t;
        }

        // Tail factor Lhat_R(s) / P*_R(T > s).
        let mut tail_exc: Option<EffectiveExcursion> = None;
        if tail_len > 0 {
            let s = tail_len;
            let r = tail_slab;
            let (lhat, sf) = if (s as i64) <= r {
                // The strip constraint cannot bind within budget s.
                (unbounded_lhat(self.pstar.dp(), s), self.pstar.sf(s))
            } else {
                let tables = self.cache.tables(r, s)?;
                (tables.lhat_sum(s), tables.sf_star(s))
            };
            if lhat <= 0.0 {
                // No admissible incomplete piece: the configuration has
                // zero uniform mass. Keep the weight-0 sample.
                weight = 0.0;
            } else {
                weight *= lhat / sf;
                tail_exc = Some(sample_confined_interior(tail_slab, s, rng)?);
            }
        }

        let (path, decomposition) = assemble_general(&excs, tail_exc.as_ref(), tail_len)?;
        Ok(WeightedPath {
            path,
            weight,
            decomposition,
        })
    }
}

fn unbounded_lhat(dp: &crate::effective::WalkDp, s: usize) -> f64 {
    // Mass of nonnegative walks consuming s that end strictly above 0; by
    // increment-reversal symmetry this is the completion mass from height
    // h summed over h >= 1.
    (1..=s).map(|h| dp.mass(s, h)).sum()
}

/// Uniform draw over confined walks with exactly `n` increments, consumed
/// length `t`, values in [0, r], ending at r.
fn sample_confined_bridge<R: Rng + ?Sized>(
    r: i64,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<EffectiveExcursion> {
    let width = r as usize + 1;
    // counts[m][c][h]: completions with m increments and budget c from
    // height h, ending at r. Scaled by 2^-c to keep magnitudes tame.
    let mut counts = vec![vec![vec![0.0f64; width]; t + 1]; n + 1];
    for h in 0..width {
        counts[0][0][h] = if h as i64 == r { 1.0 } else { 0.0 };
    }
    for m in 1..=n {
        for c in m..=t {
            for h in 0..width {
                let mut acc = 0.0;
                let u_lo = -(h as i64);
                let u_hi = r - h as i64;
                let mut u = u_lo;
                while u <= u_hi {
                    let k = u.unsigned_abs() as usize;
                    if k + 1 <= c {
                        acc += 0.5f64.powi(k as i32 + 1) * counts[m - 1][c - 1 - k][(h as i64 + u) as usize];
                    }
                    u += 1;
                }
                counts[m][c][h] = acc;
            }
        }
    }
    if counts[n][t][0] <= 0.0 {
        return Err(Error::Domain(format!(
            "no confined bridge for (r={r}, t={t}, n={n})"
        )));
    }
    let mut values = vec![0i64];
    let (mut m, mut c, mut h) = (n, t, 0i64);
    while m > 0 {
        let total = counts[m][c][h as usize];
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick: Option<i64> = None;
        let mut last: Option<i64> = None;
        let mut u = -h;
        while u <= r - h {
            let k = u.unsigned_abs() as usize;
            if k + 1 <= c {
                let w = 0.5f64.powi(k as i32 + 1) * counts[m - 1][c - 1 - k][(h + u) as usize];
                if w > 0.0 {
                    last = Some(u);
                    acc += w;
                    if acc >= target {
                        pick = Some(u);
                        break;
                    }
                }
            }
            u += 1;
        }
        let u = pick
            .or(last)
            .ok_or_else(|| Error::Domain("confined bridge sampling stuck".into()))?;
        h += u;
        c -= 1 + u.unsigned_abs() as usize;
        m -= 1;
        values.push(h);
    }
    EffectiveExcursion::new(values)
}

/// Uniform draw over confined walks consuming exactly `s`, values in
/// [0, r], ending strictly inside (0, r); any number of increments.
fn sample_confined_interior<R: Rng + ?Sized>(
    r: i64,
    s: usize,
    rng: &mut R,
) -> Result<EffectiveExcursion> {
    // A walk consuming s never climbs past s - 1, so the table width only
    // needs min(r, s) + 1 levels even for wide slabs.
    let width = (r.min(s as i64) + 1) as usize;
    let top = width as i64 - 1;
    let mut counts = vec![vec![0.0f64; width]; s + 1];
    for h in 0..width {
        counts[0][h] = if h > 0 && (h as i64) < r { 1.0 } else { 0.0 };
    }
    for c in 1..=s {
        for h in 0..width {
            let mut acc = 0.0;
            let mut u = -(h as i64);
            while h as i64 + u <= top {
                let k = u.unsigned_abs() as usize;
                if k + 1 <= c {
                    acc += 0.5f64.powi(k as i32 + 1) * counts[c - 1 - k][(h as i64 + u) as usize];
                }
                u += 1;
            }
            counts[c][h] = acc;
        }
    }
    if counts[s][0] <= 0.0 {
        return Err(Error::Domain(format!(
            "no interior-ending piece for (r={r}, s={s})"
        )));
    }
    let mut values = vec![0i64];
    let (mut c, mut h) = (s, 0i64);
    while c > 0 {
        let total = counts[c][h as usize];
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick: Option<i64> = None;
        let mut last: Option<i64> = None;
        let mut u = -h;
        while h + u <= top {
            let k = u.unsigned_abs() as usize;
            if k + 1 <= c {
                let w = 0.5f64.powi(k as i32 + 1) * counts[c - 1 - k][(h + u) as usize];
                if w > 0.0 {
                    last = Some(u);
                    acc += w;
                    if acc >= target {
                        pick = Some(u);
                        break;
                    }
                }
            }
            u += 1;
        }
        let u = pick
            .or(last)
            .ok_or_else(|| Error::Domain("interior piece sampling stuck".into()))?;
        h += u;
        c -= 1 + u.unsigned_abs() as usize;
        values.push(h);
    }
    EffectiveExcursion::new(values)
}

/// Render the general-decomposition excursion sequence (plus an optional
/// incomplete tail) as a lattice path, tracking which corner of the box
/// the walker occupies.
fn assemble_general(
    excs: &[SampledExcursion],
    tail: Option<&EffectiveExcursion>,
    tail_len: usize,
) -> Result<(LatticePath, GeneralDecomposition)> {
    let mut steps: Vec<Step> = Vec::new();
    let mut sx_high = true;
    let mut sy_high = true;
    let mut records = Vec::with_capacity(excs.len());
    let mut boundaries = Vec::with_capacity(excs.len());
    let mut r_sequence = Vec::with_capacity(excs.len());
    let (mut r_prev2, mut r_prev1) = (0i64, 0i64);

    let render = |steps: &mut Vec<Step>,
                      exc: &EffectiveExcursion,
                      horizontal: bool,
                      sx_high: bool,
                      sy_high: bool| {
        for u in exc.increments() {
            let ext = match (horizontal, sx_high, sy_high) {
                (true, true, _) => Step::E,
                (true, false, _) => Step::W,
                (false, _, true) => Step::N,
                (false, _, false) => Step::S,
            };
            steps.push(ext);
            // Positive transverse offsets move inward, away from the
            // occupied side.
            let stretch = match (horizontal, sy_high, sx_high, u > 0) {
                (true, true, _, true) => Step::S,
                (true, true, _, false) => Step::N,
                (true, false, _, true) => Step::N,
                (true, false, _, false) => Step::S,
                (false, _, true, true) => Step::W,
                (false, _, true, false) => Step::E,
                (false, _, false, true) => Step::E,
                (false, _, false, false) => Step::W,
            };
            for _ in 0..u.unsigned_abs() {
                steps.push(stretch);
            }
        }
    };

    for (idx, se) in excs.iter().enumerate() {
        let horizontal = idx % 2 == 0;
        render(&mut steps, &se.exc, horizontal, sx_high, sy_high);
        let slab = r_prev1;
        if se.eps == 1 && slab > 0 {
            if horizontal {
                sy_high = !sy_high;
            } else {
                sx_high = !sx_high;
            }
        }
        let n = se.exc.num_steps();
        records.push(crate::lattice::ExcursionRecord {
            t: se.exc.total_len(),
            n,
            eps: se.eps,
            orientation: corner(sx_high, sy_high),
        });
        boundaries.push(steps.len());
        let r_new = r_prev2 + n as i64;
        r_prev2 = r_prev1;
        r_prev1 = r_new;
        r_sequence.push(r_new);
    }
    if let Some(tail_exc) = tail {
        let horizontal = excs.len() % 2 == 0;
        render(&mut steps, tail_exc, horizontal, sx_high, sy_high);
    }
    let decomposition = GeneralDecomposition {
        gamma: records.len(),
        records,
        boundaries,
        r_sequence,
        tail_length: tail_len,
    };
    Ok((LatticePath::new(steps), decomposition))
}

fn corner(sx_high: bool, sy_high: bool) -> crate::lattice::Corner {
    use crate::lattice::Corner;
    match (sx_high, sy_high) {
        (true, true) => Corner::NE,
        (false, true) => Corner::NW,
        (false, false) => Corner::SW,
        (true, false) => Corner::SE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{decompose_two_sided, is_prudent, is_two_sided_plus};

    fn pstar() -> PStar {
        PStar::standard().unwrap()
    }

    #[test]
    fn stream_rng_is_deterministic_and_stream_separated() {
        let a: Vec<u64> = {
            let mut r = stream_rng(1, 0);
            (0..4).map(|_| r.random()).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream_rng(1, 0);
            (0..4).map(|_| r.random()).collect()
        };
        let c: Vec<u64> = {
            let mut r = stream_rng(1, 1);
            (0..4).map(|_| r.random()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn kinetic_first_step_and_counts() {
        let mut rng = stream_rng(11, 0);
        let mut seen = [0usize; 4];
        for _ in 0..4000 {
            let p = sample_kinetic(1, &mut rng);
            seen[p.steps()[0] as usize] += 1;
        }
        for &s in &seen {
            assert!((s as f64 - 1000.0).abs() < 150.0, "{seen:?}");
        }
        // Admissible counts: 3 after a range-growing step, else 2.
        let mut range = RangeIndex::with_origin();
        range.insert((1, 0));
        assert_eq!(admissible_steps(&range, (1, 0)).len(), 3);
        let mut range = RangeIndex::with_origin();
        for v in [(1, 0), (1, 1), (0, 1)] {
            range.insert(v);
        }
        // After E,N,W the W step did not grow the range.
        assert_eq!(admissible_steps(&range, (0, 1)).len(), 2);
    }

    #[test]
    fn kinetic_pmf_normalizes() {
        for l in 1..=6 {
            let mut total = 0.0f64;
            crate::enumerate::for_each_prudent(l, false, 14, |s| {
                total += kinetic_pmf(&LatticePath::new(s.to_vec()));
            })
            .unwrap();
            assert!((total - 1.0).abs() < 1e-12, "L={l}: {total}");
        }
    }

    #[test]
    fn kinetic_outputs_are_prudent() {
        let mut rng = stream_rng(5, 2);
        for _ in 0..50 {
            assert!(is_prudent(&sample_kinetic(40, &mut rng)));
        }
    }

    #[test]
    fn flipped_path_example() {
        let exc = EffectiveExcursion::new(vec![0, 1, 0]).unwrap();
        assert_eq!(excursion_to_flipped_path(&exc).step_string(), "ENES");
    }

    #[test]
    fn build_examples() {
        let exc = EffectiveExcursion::new(vec![0, 0, 0]).unwrap();
        let p = build_lattice_from_excursions(&[exc]).unwrap();
        assert_eq!(p.step_string(), "EE");

        let exc = EffectiveExcursion::new(vec![0, 1, 0]).unwrap();
        let p = build_lattice_from_excursions(std::slice::from_ref(&exc)).unwrap();
        assert_eq!(p.step_string(), "ESEN");
        assert!(is_two_sided_plus(&p));

        let bad = EffectiveExcursion::new(vec![0, 1]).unwrap();
        assert!(build_lattice_from_excursions(&[bad]).is_err());
    }

    #[test]
    fn two_sided_round_trip_small() {
        for l in 1..=9 {
            crate::enumerate::for_each_two_sided_plus(l, 14, |s| {
                let path = LatticePath::new(s.to_vec());
                let d = decompose_two_sided(&path).unwrap();
                let rebuilt = build_lattice_from_excursions(&d.excursions).unwrap();
                assert_eq!(rebuilt, path, "round trip at L={l}");
            })
            .unwrap();
        }
    }

    #[test]
    fn pinned_sampler_outputs_are_two_sided() {
        let ps = pstar();
        let sampler = TwoSidedSampler::new(&ps);
        let mut rng = stream_rng(42, 7);
        for _ in 0..40 {
            let p = sampler.sample_path(30, &mut rng).unwrap();
            assert_eq!(p.len(), 30);
            assert!(is_two_sided_plus(&p));
        }
    }

    #[test]
    fn path_view_matches_materialized_path() {
        let ps = pstar();
        let sampler = TwoSidedSampler::new(&ps);
        let mut rng = stream_rng(9, 3);
        let excs = sampler.sample_excursions(64, &mut rng).unwrap();
        let view = TwoSidedPathView::new(&excs);
        let path = build_lattice_from_excursions(&excs).unwrap();
        let vertices = path.vertices();
        assert_eq!(view.len(), path.len());
        for (i, &v) in vertices.iter().enumerate() {
            assert_eq!(view.position(i), v, "step {i}");
        }
        assert_eq!(view.endpoint(), path.endpoint());
    }

    #[test]
    fn is_sampler_round_trips_decomposition() {
        let ps = Arc::new(pstar());
        let cache = Arc::new(StripCache::new(ps.tilt));
        let sampler = UniformIsSampler::new(Arc::clone(&ps), cache);
        let mut rng = stream_rng(3, 11);
        for l in [1usize, 2, 5, 12, 40] {
            for _ in 0..40 {
                let w = sampler.sample(l, &mut rng).unwrap();
                assert!(w.weight >= 0.0);
                if w.weight > 0.0 {
                    assert_eq!(w.path.len(), l, "L={l}");
                    assert!(is_prudent(&w.path));
                    let d = crate::lattice::decompose_general(&w.path).unwrap();
                    assert_eq!(d.gamma, w.decomposition.gamma);
                    assert_eq!(d.tail_length, w.decomposition.tail_length);
                    for (a, b) in d.records.iter().zip(&w.decomposition.records) {
                        assert_eq!((a.t, a.n, a.eps), (b.t, b.n, b.eps));
                    }
                }
            }
        }
    }

    #[test]
    fn is_weight_is_one_without_crossings_or_tail() {
        let ps = Arc::new(pstar());
        let cache = Arc::new(StripCache::new(ps.tilt));
        let sampler = UniformIsSampler::new(Arc::clone(&ps), cache);
        let mut rng = stream_rng(8, 0);
        let mut seen_unit = false;
        for _ in 0..200 {
            let w = sampler.sample(16, &mut rng).unwrap();
            let crossing_beyond_first = w
                .decomposition
                .records
                .iter()
                .skip(1)
                .any(|r| r.eps == 1);
            if !crossing_beyond_first && w.decomposition.tail_length == 0 {
                assert_eq!(w.weight, 1.0);
                seen_unit = true;
            }
        }
        assert!(seen_unit);
    }
}
