//! Square-lattice paths, the prudent condition, and both excursion
//! decompositions (the two-sided one driven by upward/eastward growth
//! triggers, and the general four-corner one driven by range growth).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::effective::EffectiveExcursion;
use crate::error::{Error, Result};

/// Unit lattice step. The declared order `E < N < W < S` is the
/// enumeration order used everywhere (it makes DFS visitor order, and
/// hence indexed sampling, reproducible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    E,
    N,
    W,
    S,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::E, Step::N, Step::W, Step::S];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Step::E => (1, 0),
            Step::N => (0, 1),
            Step::W => (-1, 0),
            Step::S => (0, -1),
        }
    }

    pub fn reverse(self) -> Step {
        match self {
            Step::E => Step::W,
            Step::N => Step::S,
            Step::W => Step::E,
            Step::S => Step::N,
        }
    }

    /// Counterclockwise quarter turn.
    pub fn rot90(self) -> Step {
        match self {
            Step::E => Step::N,
            Step::N => Step::W,
            Step::W => Step::S,
            Step::S => Step::E,
        }
    }

    /// Reflection across the x-axis.
    pub fn mirror_x(self) -> Step {
        match self {
            Step::N => Step::S,
            Step::S => Step::N,
            other => other,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Step::E | Step::W)
    }

    pub fn to_char(self) -> char {
        match self {
            Step::E => 'E',
            Step::N => 'N',
            Step::W => 'W',
            Step::S => 'S',
        }
    }

    pub fn from_char(c: char) -> Result<Step> {
        match c {
            'E' => Ok(Step::E),
            'N' => Ok(Step::N),
            'W' => Ok(Step::W),
            'S' => Ok(Step::S),
            other => Err(Error::Parse(format!("invalid step character {other:?}"))),
        }
    }
}

/// A nearest-neighbor path on Z^2 starting at the origin, stored as its
/// step sequence; vertices are derived.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    steps: Vec<Step>,
}

impl LatticePath {
    pub fn new(steps: Vec<Step>) -> Self {
        LatticePath { steps }
    }

    pub fn empty() -> Self {
        LatticePath { steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn push(&mut self, s: Step) {
        self.steps.push(s);
    }

    /// All `len + 1` vertices, starting at the origin.
    pub fn vertices(&self) -> Vec<(i64, i64)> {
        let mut v = Vec::with_capacity(self.steps.len() + 1);
        let mut p = (0i64, 0i64);
        v.push(p);
        for s in &self.steps {
            let (dx, dy) = s.offset();
            p = (p.0 + dx, p.1 + dy);
            v.push(p);
        }
        v
    }

    pub fn endpoint(&self) -> (i64, i64) {
        let mut p = (0i64, 0i64);
        for s in &self.steps {
            let (dx, dy) = s.offset();
            p = (p.0 + dx, p.1 + dy);
        }
        p
    }

    /// Bounding box of the whole range as ((xmin, ymin), (xmax, ymax)).
    pub fn bounding_box(&self) -> ((i64, i64), (i64, i64)) {
        let (mut lo, mut hi) = ((0i64, 0i64), (0i64, 0i64));
        let mut p = (0i64, 0i64);
        for s in &self.steps {
            let (dx, dy) = s.offset();
            p = (p.0 + dx, p.1 + dy);
            lo.0 = lo.0.min(p.0);
            lo.1 = lo.1.min(p.1);
            hi.0 = hi.0.max(p.0);
            hi.1 = hi.1.max(p.1);
        }
        (lo, hi)
    }

    /// Compact step-string over the alphabet {E,N,W,S}.
    pub fn step_string(&self) -> String {
        self.steps.iter().map(|s| s.to_char()).collect()
    }

    pub fn rot90(&self) -> LatticePath {
        LatticePath::new(self.steps.iter().map(|s| s.rot90()).collect())
    }

    pub fn mirror_x(&self) -> LatticePath {
        LatticePath::new(self.steps.iter().map(|s| s.mirror_x()).collect())
    }

    /// Image under the g-th element of the dihedral group of the lattice,
    /// g in 0..8: rotations for g < 4, x-mirror followed by rotations for
    /// g >= 4.
    pub fn apply_dihedral(&self, g: u8) -> LatticePath {
        let base = if g >= 4 { self.mirror_x() } else { self.clone() };
        let mut out = base;
        for _ in 0..(g % 4) {
            out = out.rot90();
        }
        out
    }

    /// CSV serialization with header `i,x,y`, one row per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x,y\n");
        for (i, (x, y)) in self.vertices().into_iter().enumerate() {
            out.push_str(&format!("{i},{x},{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<LatticePath> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "i,x,y" => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header \"i,x,y\", found {other:?}"
                )))
            }
        }
        let mut vertices = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("row {ln}: expected 3 fields")));
            }
            let x: i64 = fields[1]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {ln}: {e}")))?;
            let y: i64 = fields[2]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {ln}: {e}")))?;
            vertices.push((x, y));
        }
        if vertices.first() != Some(&(0, 0)) {
            return Err(Error::Parse("path must start at (0,0)".into()));
        }
        let mut steps = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            let d = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            let step = match d {
                (1, 0) => Step::E,
                (0, 1) => Step::N,
                (-1, 0) => Step::W,
                (0, -1) => Step::S,
                other => return Err(Error::Parse(format!("non-unit step {other:?}"))),
            };
            steps.push(step);
        }
        Ok(LatticePath::new(steps))
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.step_string())
    }
}

impl FromStr for LatticePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<LatticePath> {
        let steps: Result<Vec<Step>> = s.trim().chars().map(Step::from_char).collect();
        Ok(LatticePath::new(steps?))
    }
}

/// Occupancy index for the range of a growing path. Rays can only hit the
/// range inside the current bounding box, so per-row and per-column sorted
/// coordinate sets answer ray queries with one successor lookup.
#[derive(Debug, Clone, Default)]
pub struct RangeIndex {
    rows: HashMap<i64, BTreeSet<i64>>, // y -> occupied x's
    cols: HashMap<i64, BTreeSet<i64>>, // x -> occupied y's
    bbox: Option<((i64, i64), (i64, i64))>,
    count: usize,
}

impl RangeIndex {
    pub fn new() -> Self {
        RangeIndex::default()
    }

    /// Index seeded with the origin.
    pub fn with_origin() -> Self {
        let mut r = RangeIndex::new();
        r.insert((0, 0));
        r
    }

    pub fn insert(&mut self, p: (i64, i64)) -> bool {
        let fresh = self.rows.entry(p.1).or_default().insert(p.0);
        if fresh {
            self.cols.entry(p.0).or_default().insert(p.1);
            self.count += 1;
            self.bbox = Some(match self.bbox {
                None => (p, p),
                Some((lo, hi)) => (
                    (lo.0.min(p.0), lo.1.min(p.1)),
                    (hi.0.max(p.0), hi.1.max(p.1)),
                ),
            });
        }
        fresh
    }

    /// Remove a site. The bounding box is recomputed only when the removed
    /// site was on it, which under DFS stack discipline is cheap.
    pub fn remove(&mut self, p: (i64, i64)) {
        let was_there = self
            .rows
            .get_mut(&p.1)
            .map(|s| s.remove(&p.0))
            .unwrap_or(false);
        if !was_there {
            return;
        }
        if let Some(s) = self.cols.get_mut(&p.0) {
            s.remove(&p.1);
        }
        self.count -= 1;
        if self.count == 0 {
            self.bbox = None;
            return;
        }
        if let Some((lo, hi)) = self.bbox {
            if p.0 == lo.0 || p.0 == hi.0 || p.1 == lo.1 || p.1 == hi.1 {
                self.recompute_bbox();
            }
        }
    }

    fn recompute_bbox(&mut self) {
        let mut it = self
            .rows
            .iter()
            .filter(|(_, xs)| !xs.is_empty())
            .flat_map(|(y, xs)| xs.iter().map(move |x| (*x, *y)));
        self.bbox = it.next().map(|first| {
            let mut lo = first;
            let mut hi = first;
            for p in it {
                lo = (lo.0.min(p.0), lo.1.min(p.1));
                hi = (hi.0.max(p.0), hi.1.max(p.1));
            }
            (lo, hi)
        });
    }

    pub fn contains(&self, p: (i64, i64)) -> bool {
        self.rows.get(&p.1).is_some_and(|s| s.contains(&p.0))
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn bbox(&self) -> Option<((i64, i64), (i64, i64))> {
        self.bbox
    }

    /// Number of occupied columns (width as a site count).
    pub fn width(&self) -> usize {
        self.cols.values().filter(|s| !s.is_empty()).count()
    }

    pub fn height(&self) -> usize {
        self.rows.values().filter(|s| !s.is_empty()).count()
    }

    /// Does the open ray from `from` in direction `dir` hit the range?
    pub fn ray_hits(&self, from: (i64, i64), dir: Step) -> bool {
        match dir {
            Step::E => self
                .rows
                .get(&from.1)
                .is_some_and(|xs| xs.range(from.0 + 1..).next().is_some()),
            Step::W => self
                .rows
                .get(&from.1)
                .is_some_and(|xs| xs.range(..from.0).next_back().is_some()),
            Step::N => self
                .cols
                .get(&from.0)
                .is_some_and(|ys| ys.range(from.1 + 1..).next().is_some()),
            Step::S => self
                .cols
                .get(&from.0)
                .is_some_and(|ys| ys.range(..from.1).next_back().is_some()),
        }
    }
}

/// Prudent condition: no step may point toward a previously visited site,
/// i.e. the open ray from the current position along each step avoids the
/// range so far. This implies self-avoidance. The empty path is prudent.
pub fn is_prudent(path: &LatticePath) -> bool {
    let mut range = RangeIndex::with_origin();
    let mut pos = (0i64, 0i64);
    for &s in path.steps() {
        if range.ray_hits(pos, s) {
            return false;
        }
        let (dx, dy) = s.offset();
        pos = (pos.0 + dx, pos.1 + dy);
        range.insert(pos);
    }
    true
}

pub fn is_self_avoiding(path: &LatticePath) -> bool {
    let mut seen = RangeIndex::with_origin();
    let mut pos = (0i64, 0i64);
    for &s in path.steps() {
        let (dx, dy) = s.offset();
        pos = (pos.0 + dx, pos.1 + dy);
        if !seen.insert(pos) {
            return false;
        }
    }
    true
}

/// Does the open ray from `from` along `dir` meet the quadrant
/// (-inf, 0] x (-inf, 0]?
pub fn ray_hits_third_quadrant(from: (i64, i64), dir: Step) -> bool {
    match dir {
        Step::W => from.1 <= 0,
        Step::S => from.0 <= 0,
        Step::E => from.0 <= -1 && from.1 <= 0,
        Step::N => from.1 <= -1 && from.0 <= 0,
    }
}

/// Two-sided (north-east) prudent path: prudent, never aims at the
/// quadrant (-inf,0]^2, starts east, and ends at the top-right corner of
/// its bounding box.
pub fn is_two_sided_plus(path: &LatticePath) -> bool {
    if path.steps().first() != Some(&Step::E) {
        return false;
    }
    if !is_prudent(path) {
        return false;
    }
    let mut pos = (0i64, 0i64);
    for &s in path.steps() {
        if ray_hits_third_quadrant(pos, s) {
            return false;
        }
        let (dx, dy) = s.offset();
        pos = (pos.0 + dx, pos.1 + dy);
    }
    let (_, hi) = path.bounding_box();
    path.endpoint() == hi
}

/// Rescaled, linearly interpolated path evaluated on a grid of times in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    pub grid: Vec<f64>,
    pub values: Vec<(f64, f64)>,
}

/// Evaluate the rescaled interpolation of the path on `grid`.
pub fn rescale_path(path: &LatticePath, grid: &[f64]) -> Result<RescaledPath> {
    let l = path.len();
    if l == 0 {
        return Err(Error::Precondition("rescale_path needs length >= 1".into()));
    }
    let vertices = path.vertices();
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("grid time {t} outside [0,1]")));
        }
        let tl = t * l as f64;
        let k = (tl.floor() as usize).min(l);
        let frac = tl - k as f64;
        let a = vertices[k];
        let v = if frac == 0.0 || k == l {
            (a.0 as f64 / l as f64, a.1 as f64 / l as f64)
        } else {
            let b = vertices[k + 1];
            (
                (a.0 as f64 + frac * (b.0 - a.0) as f64) / l as f64,
                (a.1 as f64 + frac * (b.1 - a.1) as f64) / l as f64,
            )
        };
        values.push(v);
    }
    Ok(RescaledPath {
        grid: grid.to_vec(),
        values,
    })
}

/// Quadrant statistic of the endpoint: 1..4 when strictly inside the
/// corresponding open quadrant, 0 on an axis.
pub fn quadrant_statistic(path: &LatticePath) -> u8 {
    let (x, y) = path.endpoint();
    match (x.signum(), y.signum()) {
        (1, 1) => 1,
        (-1, 1) => 2,
        (-1, -1) => 3,
        (1, -1) => 4,
        _ => 0,
    }
}

/// Width and height of the range at time `t`, as site counts (so both are
/// 1 at t = 0).
pub fn range_dims(path: &LatticePath, t: usize) -> Result<(usize, usize)> {
    if t > path.len() {
        return Err(Error::Domain(format!(
            "time {t} beyond path length {}",
            path.len()
        )));
    }
    let mut xs = BTreeSet::new();
    let mut ys = BTreeSet::new();
    for &v in path.vertices().iter().take(t + 1) {
        xs.insert(v.0);
        ys.insert(v.1);
    }
    Ok((xs.len(), ys.len()))
}

/// Decomposition of a two-sided path into alternating horizontal (odd
/// index) and vertical (even index) excursions, each carried as the
/// effective-walk image of its transverse offsets.
#[derive(Debug, Clone)]
pub struct TwoSidedDecomposition {
    /// tau_0 = 0, ..., tau_gamma = L.
    pub boundaries: Vec<usize>,
    pub excursions: Vec<EffectiveExcursion>,
}

impl TwoSidedDecomposition {
    pub fn gamma(&self) -> usize {
        self.excursions.len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Decompose a two-sided path at the times where the range grows upward
/// (ending a horizontal excursion) or eastward (ending a vertical one).
/// The final excursion is closed by the convention that one extra north
/// (resp. east) step would trigger the growth.
pub fn decompose_two_sided(path: &LatticePath) -> Result<TwoSidedDecomposition> {
    if !is_two_sided_plus(path) {
        return Err(Error::Precondition(
            "decompose_two_sided requires a two-sided (NE) prudent path".into(),
        ));
    }
    let vertices = path.vertices();
    let l = path.len();
    let mut boundaries = vec![0usize];
    let mut start = 0usize;
    let mut horizontal = true;
    loop {
        let anchor = vertices[start];
        let trigger = (start + 1..=l).find(|&i| {
            if horizontal {
                vertices[i].1 > anchor.1
            } else {
                vertices[i].0 > anchor.0
            }
        });
        match trigger {
            Some(i) => {
                let end = i - 1;
                // A growth step straight out of the previous boundary would
                // make an empty excursion; the recursion never produces one
                // on a valid two-sided path because each excursion starts
                // with its own growth step.
                if end == start {
                    return Err(Error::Precondition(
                        "degenerate excursion boundary; input is not a valid two-sided path"
                            .into(),
                    ));
                }
                boundaries.push(end);
                if end == l {
                    break;
                }
                start = end;
                horizontal = !horizontal;
            }
            None => {
                boundaries.push(l);
                break;
            }
        }
    }
    let mut excursions = Vec::with_capacity(boundaries.len() - 1);
    for (k, w) in boundaries.windows(2).enumerate() {
        let steps = &path.steps()[w[0]..w[1]];
        let horizontal = k % 2 == 0;
        excursions.push(extract_two_sided_excursion(steps, horizontal)?);
    }
    Ok(TwoSidedDecomposition {
        boundaries,
        excursions,
    })
}

/// Transverse-offset walk of one two-sided excursion. Horizontal
/// excursions dip below their starting row (offset = y_start - y), and
/// vertical ones dip west of their starting column.
fn extract_two_sided_excursion(steps: &[Step], horizontal: bool) -> Result<EffectiveExcursion> {
    let (extension, inward, outward) = if horizontal {
        (Step::E, Step::S, Step::N)
    } else {
        (Step::N, Step::W, Step::E)
    };
    let mut values = vec![0i64];
    let mut off = 0i64;
    let mut open = false;
    for &s in steps {
        if s == extension {
            if open {
                values.push(off);
            }
            open = true;
        } else if s == inward {
            off += 1;
        } else if s == outward {
            off -= 1;
        } else {
            return Err(Error::Precondition(format!(
                "step {s:?} cannot occur inside a {} excursion of a two-sided path",
                if horizontal { "horizontal" } else { "vertical" }
            )));
        }
        if !open {
            return Err(Error::Precondition(
                "excursion does not start with its extension step".into(),
            ));
        }
    }
    if open {
        values.push(off);
    }
    EffectiveExcursion::new(values)
}

/// Corner of the current bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    NE,
    NW,
    SW,
    SE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SideX {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SideY {
    Low,
    High,
}

fn corner_of(sx: SideX, sy: SideY) -> Corner {
    match (sx, sy) {
        (SideX::High, SideY::High) => Corner::NE,
        (SideX::Low, SideY::High) => Corner::NW,
        (SideX::Low, SideY::Low) => Corner::SW,
        (SideX::High, SideY::Low) => Corner::SE,
    }
}

/// One complete excursion of the general decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcursionRecord {
    /// Total step count.
    pub t: usize,
    /// Extension step count (horizontal steps of a horizontal excursion).
    pub n: usize,
    /// Crossing flag: 1 when the excursion traverses the full transverse
    /// extent of the range.
    pub eps: u8,
    /// Corner of the bounding box at which the excursion ends.
    pub orientation: Corner,
}

/// General decomposition of a prudent path into range excursions.
#[derive(Debug, Clone)]
pub struct GeneralDecomposition {
    pub records: Vec<ExcursionRecord>,
    /// Completed-piece boundaries: times at which excursions 1..gamma end.
    pub boundaries: Vec<usize>,
    /// R_1, ..., R_gamma (the slab widths; R_{i-1} confines excursion i).
    pub r_sequence: Vec<i64>,
    pub gamma: usize,
    pub tail_length: usize,
}

impl GeneralDecomposition {
    /// Slab width seen by excursion i (1-based): R_{i-1}, with R_0 = 0.
    pub fn slab_before(&self, i: usize) -> i64 {
        if i <= 2 {
            if i == 1 {
                0
            } else {
                // R_1
                self.r_sequence[0]
            }
        } else {
            self.r_sequence[i - 2]
        }
    }

    /// Slab width R_gamma that confines the incomplete tail.
    pub fn slab_after_last(&self) -> i64 {
        match self.r_sequence.len() {
            0 => 0,
            n => self.r_sequence[n - 1],
        }
    }

    pub fn total_complete_len(&self) -> usize {
        self.records.iter().map(|r| r.t).sum()
    }
}

/// Decompose a prudent path (reduced by symmetry: first step east, first
/// vertical step north) into its range excursions. Odd excursions are
/// horizontal. The last piece counts as complete exactly when one added
/// outward step would trigger the next range growth, which happens iff its
/// transverse offset ends on an edge of its slab.
pub fn decompose_general(path: &LatticePath) -> Result<GeneralDecomposition> {
    if path.steps().first() != Some(&Step::E) {
        return Err(Error::Precondition(
            "decompose_general requires the first step to be east".into(),
        ));
    }
    if let Some(first_vertical) = path.steps().iter().find(|s| !s.is_horizontal()) {
        if *first_vertical != Step::N {
            return Err(Error::Precondition(
                "decompose_general requires the first vertical step to be north".into(),
            ));
        }
    }
    if !is_prudent(path) {
        return Err(Error::Precondition(
            "decompose_general requires a prudent path".into(),
        ));
    }

    let vertices = path.vertices();
    let l = path.len();
    // Running extents of the range.
    let mut wext = vec![0i64; l + 1];
    let mut hext = vec![0i64; l + 1];
    {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (0i64, 0i64, 0i64, 0i64);
        for (i, &(x, y)) in vertices.iter().enumerate() {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
            wext[i] = xmax - xmin;
            hext[i] = ymax - ymin;
        }
    }

    let mut records = Vec::new();
    let mut boundaries = Vec::new();
    let mut r_sequence: Vec<i64> = Vec::new();
    let mut start = 0usize;
    let mut horizontal = true;
    let mut sx = SideX::High;
    let mut sy = SideY::High;
    let mut r_prev2 = 0i64; // R_{i-2}
    let mut r_prev1 = 0i64; // R_{i-1}
    let mut tail_length = 0usize;

    loop {
        if start == l {
            break;
        }
        let growth = (start + 1..=l).find(|&i| {
            if horizontal {
                hext[i] > hext[i - 1]
            } else {
                wext[i] > wext[i - 1]
            }
        });
        let (end, complete_by_trigger) = match growth {
            Some(i) => (i - 1, true),
            None => (l, false),
        };
        if end == start {
            // The growth step itself opens the next excursion, so a
            // trigger immediately after a boundary cannot happen on paths
            // satisfying the preconditions.
            return Err(Error::Precondition(
                "degenerate excursion boundary in general decomposition".into(),
            ));
        }
        let slab = r_prev1;
        let n = if horizontal {
            wext[end] - wext[start]
        } else {
            hext[end] - hext[start]
        };
        let transverse = if horizontal {
            (vertices[end].1 - vertices[start].1).abs()
        } else {
            (vertices[end].0 - vertices[start].0).abs()
        };
        let complete = if complete_by_trigger {
            true
        } else {
            // Final piece: complete iff it ends on an edge of its slab.
            transverse == 0 || transverse == slab
        };
        if !complete {
            tail_length = end - start;
            break;
        }
        let eps = u8::from(transverse == slab);
        // Orientation update: crossing flips the transverse side.
        if horizontal {
            if eps == 1 && slab > 0 {
                sy = match sy {
                    SideY::Low => SideY::High,
                    SideY::High => SideY::Low,
                };
            }
        } else if eps == 1 && slab > 0 {
            sx = match sx {
                SideX::Low => SideX::High,
                SideX::High => SideX::Low,
            };
        }
        records.push(ExcursionRecord {
            t: end - start,
            n: n as usize,
            eps,
            orientation: corner_of(sx, sy),
        });
        boundaries.push(end);
        let r_new = r_prev2 + n;
        r_sequence.push(r_new);
        r_prev2 = r_prev1;
        r_prev1 = r_new;
        start = end;
        horizontal = !horizontal;
    }

    Ok(GeneralDecomposition {
        gamma: records.len(),
        records,
        boundaries,
        r_sequence,
        tail_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LatticePath {
        s.parse().unwrap()
    }

    #[test]
    fn prudence_basics() {
        assert!(is_prudent(&p("EEE")));
        assert!(!is_prudent(&p("EW")));
        // The S-ray from (0,1) hits the visited origin.
        assert!(!is_prudent(&p("ENWS")));
        assert!(is_prudent(&LatticePath::empty()));
    }

    #[test]
    fn two_sided_examples() {
        assert!(is_two_sided_plus(&p("E")));
        assert!(!is_two_sided_plus(&p("ES")));
        assert!(!is_two_sided_plus(&p("N")));
        assert!(is_two_sided_plus(&p("ESEN")));
        assert!(is_two_sided_plus(&p("ENWNE")));
    }

    #[test]
    fn rescale_examples() {
        let path = p("EE");
        let r = rescale_path(&path, &[1.0]).unwrap();
        assert_eq!(r.values[0], (1.0, 0.0));
        let r = rescale_path(&path, &[0.25]).unwrap();
        assert_eq!(r.values[0], (0.25, 0.0));
        let r = rescale_path(&p("EN"), &[0.75]).unwrap();
        assert_eq!(r.values[0], (0.5, 0.25));
        assert!(rescale_path(&path, &[1.25]).is_err());
    }

    #[test]
    fn quadrant_examples() {
        assert_eq!(quadrant_statistic(&p("EN")), 1);
        assert_eq!(quadrant_statistic(&p("EE")), 0);
        assert_eq!(quadrant_statistic(&p("ENNWW")), 2);
    }

    #[test]
    fn range_dims_examples() {
        assert_eq!(range_dims(&p("EE"), 2).unwrap(), (3, 1));
        assert_eq!(range_dims(&p("EE"), 0).unwrap(), (1, 1));
        assert_eq!(range_dims(&p("ENW"), 3).unwrap(), (2, 2));
        assert!(range_dims(&p("EE"), 3).is_err());
    }

    #[test]
    fn decompose_two_sided_examples() {
        let d = decompose_two_sided(&p("EEE")).unwrap();
        assert_eq!(d.boundaries, vec![0, 3]);
        assert_eq!(d.gamma(), 1);

        let d = decompose_two_sided(&p("ENE")).unwrap();
        assert_eq!(d.boundaries, vec![0, 1, 2, 3]);
        assert_eq!(d.gamma(), 3);

        assert!(decompose_two_sided(&p("ES")).is_err());
    }

    #[test]
    fn decompose_two_sided_dip() {
        // Single horizontal excursion dipping below the axis.
        let d = decompose_two_sided(&p("ESEN")).unwrap();
        assert_eq!(d.boundaries, vec![0, 4]);
        assert_eq!(d.excursions[0].values(), &[0, 1, 0]);
    }

    #[test]
    fn decompose_general_examples() {
        let d = decompose_general(&p("EEE")).unwrap();
        assert_eq!(d.gamma, 1);
        assert_eq!(d.records[0].t, 3);
        assert_eq!(d.records[0].n, 3);
        assert_eq!(d.records[0].eps, 1);
        assert_eq!(d.tail_length, 0);

        let d = decompose_general(&p("EN")).unwrap();
        assert_eq!(d.gamma, 2);
        assert_eq!(d.records[1].eps, 0);
        assert_eq!(d.r_sequence, vec![1, 1]);

        let d = decompose_general(&p("ENW")).unwrap();
        assert_eq!(d.gamma, 2);
        assert_eq!(d.records[1].eps, 1);
        assert_eq!(d.records[1].orientation, Corner::NW);

        // Tail strictly inside the slab stays incomplete.
        let d = decompose_general(&p("EENW")).unwrap();
        assert_eq!(d.gamma, 1);
        assert_eq!(d.tail_length, 2);
    }

    #[test]
    fn general_requires_reduced_form() {
        assert!(decompose_general(&p("ES")).is_err());
        assert!(decompose_general(&p("NE")).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let path = p("ENESE");
        let text = path.to_csv();
        assert!(text.starts_with("i,x,y\n0,0,0\n1,1,0\n"));
        assert_eq!(LatticePath::from_csv(&text).unwrap(), path);
    }

    #[test]
    fn step_string_round_trip() {
        let path = p("ENWS");
        assert_eq!(path.step_string(), "ENWS");
        assert_eq!(path.to_string().parse::<LatticePath>().unwrap(), path);
    }

    #[test]
    fn dihedral_rotation_rotates_quadrant() {
        let path = p("EN");
        let mut q = quadrant_statistic(&path);
        let mut current = path;
        for _ in 0..4 {
            current = current.rot90();
            let next = quadrant_statistic(&current);
            assert_eq!(next, q % 4 + 1);
            q = next;
        }
    }
}
