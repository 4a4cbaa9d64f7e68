//! Exhaustive DFS enumeration of prudent-path families and effective-walk
//! excursion sets. This is the ground truth every derived constant and
//! every sampler distribution is checked against.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{ray_hits_third_quadrant, LatticePath, RangeIndex, Step};

pub const DEFAULT_L_MAX: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// All prudent paths.
    Omega,
    /// Two-sided (NE) prudent paths.
    OmegaPlus,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Omega => "omega",
            Family::OmegaPlus => "omega_plus",
        }
    }
}

/// Exact counts for one family and length.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub family: Family,
    pub l: usize,
    pub count: BigUint,
    pub endpoint_hist: Option<HashMap<(i64, i64), BigUint>>,
}

struct Dfs {
    range: RangeIndex,
    positions: Vec<(i64, i64)>,
    steps: Vec<Step>,
    reduced: bool,
    two_sided: bool,
    has_vertical: bool,
}

impl Dfs {
    fn new(reduced: bool, two_sided: bool) -> Self {
        Dfs {
            range: RangeIndex::with_origin(),
            positions: vec![(0, 0)],
            steps: Vec::new(),
            reduced,
            two_sided,
            has_vertical: false,
        }
    }

    fn pos(&self) -> (i64, i64) {
        *self.positions.last().unwrap()
    }

    fn admissible(&self, s: Step) -> bool {
        if self.steps.is_empty() {
            // The two-sided family starts east by definition; the reduced
            // symmetry class fixes the same representative.
            if (self.reduced || self.two_sided) && s != Step::E {
                return false;
            }
        }
        if self.reduced && !self.has_vertical && s == Step::S {
            return false;
        }
        let pos = self.pos();
        if self.two_sided && ray_hits_third_quadrant(pos, s) {
            return false;
        }
        !self.range.ray_hits(pos, s)
    }

    fn push(&mut self, s: Step) -> bool {
        let (dx, dy) = s.offset();
        let p = self.pos();
        let np = (p.0 + dx, p.1 + dy);
        let had_vertical = self.has_vertical;
        self.positions.push(np);
        self.steps.push(s);
        self.range.insert(np);
        self.has_vertical |= !s.is_horizontal();
        // Returned so pop can restore the flag.
        had_vertical
    }

    fn pop(&mut self, had_vertical: bool) {
        let p = self.positions.pop().unwrap();
        self.steps.pop();
        self.range.remove(p);
        self.has_vertical = had_vertical;
    }

    fn at_two_sided_leaf(&self) -> bool {
        match self.range.bbox() {
            Some((_, hi)) => self.pos() == hi,
            None => false,
        }
    }

    fn run<F: FnMut(&[Step])>(&mut self, depth_left: usize, visit: &mut F) {
        if depth_left == 0 {
            if !self.two_sided || self.at_two_sided_leaf() {
                visit(&self.steps);
            }
            return;
        }
        for s in Step::ALL {
            if self.admissible(s) {
                let flag = self.push(s);
                self.run(depth_left - 1, visit);
                self.pop(flag);
            }
        }
    }
}

fn check_len(l: usize, l_max: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::Domain("enumeration requires L >= 1".into()));
    }
    if l > l_max {
        return Err(Error::Capacity(format!(
            "L = {l} exceeds L_max = {l_max}; full enumeration grows like mu^L, raise l_max \
             explicitly only if you can afford it"
        )));
    }
    Ok(())
}

/// Visit every path of Omega_L exactly once, in lexicographic step order
/// E < N < W < S. With `reduced`, restrict to first step east and first
/// vertical step north.
pub fn for_each_prudent<F: FnMut(&[Step])>(
    l: usize,
    reduced: bool,
    l_max: usize,
    mut visit: F,
) -> Result<()> {
    check_len(l, l_max)?;
    Dfs::new(reduced, false).run(l, &mut visit);
    Ok(())
}

/// Visit every path of Omega_L^+ exactly once.
pub fn for_each_two_sided_plus<F: FnMut(&[Step])>(
    l: usize,
    l_max: usize,
    mut visit: F,
) -> Result<()> {
    check_len(l, l_max)?;
    Dfs::new(false, true).run(l, &mut visit);
    Ok(())
}

fn count_from_prefix(prefix: &[Step], l: usize, reduced: bool, two_sided: bool) -> u128 {
    let mut dfs = Dfs::new(reduced, two_sided);
    for (i, &s) in prefix.iter().enumerate() {
        debug_assert!(dfs.admissible(s), "prefix step {i} inadmissible");
        dfs.push(s);
    }
    let mut count = 0u128;
    dfs.run(l - prefix.len(), &mut |_| count += 1);
    count
}

fn prefixes(depth: usize, reduced: bool, two_sided: bool) -> Vec<Vec<Step>> {
    let mut out = Vec::new();
    let mut dfs = Dfs::new(reduced, two_sided);
    fn rec(dfs: &mut Dfs, depth: usize, cur: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        if depth == 0 {
            out.push(cur.clone());
            return;
        }
        for s in Step::ALL {
            if dfs.admissible(s) {
                let flag = dfs.push(s);
                cur.push(s);
                rec(dfs, depth - 1, cur, out);
                cur.pop();
                dfs.pop(flag);
            }
        }
    }
    rec(&mut dfs, depth, &mut Vec::new(), &mut out);
    out
}

fn parallel_count(l: usize, reduced: bool, two_sided: bool) -> BigUint {
    // Split on the first two steps; the fixed reduction order keeps the
    // total independent of the worker count.
    let split = 2.min(l);
    let prefixes = prefixes(split, reduced, two_sided);
    let partials: Vec<u128> = prefixes
        .par_iter()
        .map(|p| count_from_prefix(p, l, reduced, two_sided))
        .collect();
    partials.iter().map(|&c| BigUint::from(c)).sum()
}

/// |Omega_L| (or the reduced class), with an optional endpoint histogram.
pub fn count_prudent(l: usize, reduced: bool, l_max: usize, histogram: bool) -> Result<CountTable> {
    check_len(l, l_max)?;
    let (count, endpoint_hist) = if histogram {
        let mut hist: HashMap<(i64, i64), BigUint> = HashMap::new();
        let mut n = BigUint::ZERO;
        for_each_prudent(l, reduced, l_max, |steps| {
            let p = LatticePath::new(steps.to_vec());
            *hist.entry(p.endpoint()).or_default() += 1u32;
            n += 1u32;
        })?;
        (n, Some(hist))
    } else {
        (parallel_count(l, reduced, false), None)
    };
    Ok(CountTable {
        family: Family::Omega,
        l,
        count,
        endpoint_hist,
    })
}

/// |Omega_L^+|.
pub fn count_two_sided_plus(l: usize, l_max: usize) -> Result<CountTable> {
    check_len(l, l_max)?;
    Ok(CountTable {
        family: Family::OmegaPlus,
        l,
        count: parallel_count(l, false, true),
        endpoint_hist: None,
    })
}

/// Visit every stretch tuple of the excursion set I_t (equivalently every
/// excursion, through the stretch bijection), tuples in ascending
/// lexicographic increment order.
pub fn for_each_excursion_tuple<F: FnMut(&[i64])>(t: usize, mut visit: F) -> Result<()> {
    if t == 0 {
        return Err(Error::Domain("excursion sets require t >= 1".into()));
    }
    fn rec<F: FnMut(&[i64])>(budget: usize, h: i64, cur: &mut Vec<i64>, visit: &mut F) {
        if budget == 0 {
            if h == 0 && !cur.is_empty() {
                visit(cur);
            }
            return;
        }
        let hi = budget as i64 - 1 - h; // need h + u <= remaining budget
        let mut u = -h;
        while u <= hi {
            let cost = 1 + u.unsigned_abs() as usize;
            if cost <= budget {
                let nh = h + u;
                // The walk must still be able to come back down.
                if nh <= (budget - cost) as i64 {
                    cur.push(u);
                    rec(budget - cost, nh, cur, visit);
                    cur.pop();
                }
            }
            u += 1;
        }
    }
    rec(t, 0, &mut Vec::new(), &mut visit);
    Ok(())
}

/// |I_t| by direct enumeration.
pub fn count_excursion_set(t: usize) -> Result<u128> {
    let mut n = 0u128;
    for_each_excursion_tuple(t, |_| n += 1)?;
    Ok(n)
}

/// Visit every effective-walk path confined to the strip {0..r} that
/// consumes exactly t (n steps plus total increment size), ending anywhere
/// in the strip. Emits the value sequence V_0..V_n.
pub fn for_each_strip_walk<F: FnMut(&[i64])>(r: i64, t: usize, mut visit: F) -> Result<()> {
    if r < 0 {
        return Err(Error::Domain("strip width must be nonnegative".into()));
    }
    fn rec<F: FnMut(&[i64])>(budget: usize, h: i64, r: i64, values: &mut Vec<i64>, visit: &mut F) {
        if budget == 0 {
            if values.len() >= 2 {
                visit(values);
            }
            return;
        }
        let hi = (r - h).min(budget as i64 - 1);
        let mut u = -h;
        while u <= hi {
            let cost = 1 + u.unsigned_abs() as usize;
            if cost <= budget {
                values.push(h + u);
                rec(budget - cost, h + u, r, values, visit);
                values.pop();
            }
            u += 1;
        }
    }
    let mut values = vec![0i64];
    rec(t, 0, r, &mut values, &mut visit);
    Ok(())
}

/// Materialized family for indexed exact-uniform sampling.
pub struct ExactSampler {
    paths: Vec<LatticePath>,
    family: Family,
    l: usize,
}

impl ExactSampler {
    pub fn new(family: Family, l: usize, l_max: usize) -> Result<Self> {
        let mut paths = Vec::new();
        match family {
            Family::Omega => for_each_prudent(l, false, l_max, |s| {
                paths.push(LatticePath::new(s.to_vec()))
            })?,
            Family::OmegaPlus => for_each_two_sided_plus(l, l_max, |s| {
                paths.push(LatticePath::new(s.to_vec()))
            })?,
        }
        Ok(ExactSampler { paths, family, l })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[LatticePath] {
        &self.paths
    }

    /// Each member with probability exactly 1/|family|, by indexing the
    /// DFS enumeration order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &LatticePath {
        &self.paths[rng.random_range(0..self.paths.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{is_prudent, is_self_avoiding, is_two_sided_plus};

    #[test]
    fn omega_small_counts() {
        let c1 = count_prudent(1, false, DEFAULT_L_MAX, false).unwrap();
        let c2 = count_prudent(2, false, DEFAULT_L_MAX, false).unwrap();
        let c3 = count_prudent(3, false, DEFAULT_L_MAX, false).unwrap();
        assert_eq!(c1.count, BigUint::from(4u32));
        assert_eq!(c2.count, BigUint::from(12u32));
        assert_eq!(c3.count, BigUint::from(36u32));
    }

    #[test]
    fn omega_plus_small_counts() {
        assert_eq!(
            count_two_sided_plus(1, DEFAULT_L_MAX).unwrap().count,
            BigUint::from(1u32)
        );
        assert_eq!(
            count_two_sided_plus(2, DEFAULT_L_MAX).unwrap().count,
            BigUint::from(2u32)
        );
    }

    #[test]
    fn excursion_set_counts() {
        assert_eq!(count_excursion_set(1).unwrap(), 1);
        assert_eq!(count_excursion_set(2).unwrap(), 1);
        assert_eq!(count_excursion_set(4).unwrap(), 2);
        // t = 4 members: flat (0,0,0,0) with n = 4 and the (1,-1) dip.
        let mut tuples = Vec::new();
        for_each_excursion_tuple(4, |t| tuples.push(t.to_vec())).unwrap();
        tuples.sort();
        assert_eq!(tuples, vec![vec![0, 0, 0, 0], vec![1, -1]]);
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(
            count_prudent(15, false, DEFAULT_L_MAX, false),
            Err(Error::Capacity(_))
        ));
        assert!(count_prudent(0, false, DEFAULT_L_MAX, false).is_err());
    }

    #[test]
    fn enumerated_paths_satisfy_membership() {
        for l in 1..=7 {
            let mut members = std::collections::HashSet::new();
            for_each_prudent(l, false, DEFAULT_L_MAX, |s| {
                let p = LatticePath::new(s.to_vec());
                assert!(is_prudent(&p));
                members.insert(p.step_string());
            })
            .unwrap();
            // Complement check over all 4^l step sequences.
            let mut total = 0usize;
            for code in 0..(4usize.pow(l as u32)) {
                let mut c = code;
                let mut steps = Vec::with_capacity(l);
                for _ in 0..l {
                    steps.push(Step::ALL[c % 4]);
                    c /= 4;
                }
                let p = LatticePath::new(steps);
                let member = members.contains(&p.step_string());
                assert_eq!(member, is_prudent(&p) && is_self_avoiding(&p));
                if member {
                    total += 1;
                }
            }
            assert_eq!(total, members.len());
        }
    }

    #[test]
    fn two_sided_enumeration_matches_predicate() {
        for l in 1..=8 {
            let mut from_dfs = std::collections::HashSet::new();
            for_each_two_sided_plus(l, DEFAULT_L_MAX, |s| {
                let p = LatticePath::new(s.to_vec());
                assert!(is_two_sided_plus(&p));
                from_dfs.insert(p.step_string());
            })
            .unwrap();
            let mut from_filter = 0usize;
            for_each_prudent(l, false, DEFAULT_L_MAX, |s| {
                if is_two_sided_plus(&LatticePath::new(s.to_vec())) {
                    from_filter += 1;
                }
            })
            .unwrap();
            assert_eq!(from_dfs.len(), from_filter, "L = {l}");
        }
    }

    #[test]
    fn reduced_counts_split_by_symmetry() {
        // 8 * |reduced with a vertical step| + 4 * (straight runs, one per
        // direction, orbit size 4) = |Omega_L|.
        for l in 2..=7 {
            let full = count_prudent(l, false, DEFAULT_L_MAX, false).unwrap().count;
            let mut reduced_with_vertical = 0u64;
            for_each_prudent(l, true, DEFAULT_L_MAX, |s| {
                if s.iter().any(|st| !st.is_horizontal()) {
                    reduced_with_vertical += 1;
                }
            })
            .unwrap();
            assert_eq!(
                full,
                BigUint::from(8 * reduced_with_vertical + 4),
                "L = {l}"
            );
        }
    }

    #[test]
    fn exact_sampler_is_deterministic() {
        let sampler = ExactSampler::new(Family::Omega, 1, DEFAULT_L_MAX).unwrap();
        let a: Vec<String> = {
            let mut rng = crate::sample::stream_rng(3, 1);
            (0..10)
                .map(|_| sampler.sample(&mut rng).step_string())
                .collect()
        };
        let b: Vec<String> = {
            let mut rng = crate::sample::stream_rng(3, 1);
            (0..10)
                .map(|_| sampler.sample(&mut rng).step_string())
                .collect()
        };
        assert_eq!(a, b);
    }
}
