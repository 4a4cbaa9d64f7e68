//! Strip measures of the effective walk confined to {0..R}: the exact DP
//! tables L_R(t,n,eps) and Lhat_R(t,n), the truncated law L*_R produced by
//! the truncation map, and the executable reflection/folding maps used to
//! compare crossing and interior masses.

use crate::effective::{TiltParams, U_CAP};
use crate::error::{Error, Result};

/// Rough cap on the table footprint (entries across the four (t,n) arrays).
const TABLE_ENTRY_BUDGET: usize = 64 << 20;

fn psi_weights(lambda: f64, cap: usize) -> Vec<f64> {
    (0..=cap)
        .map(|k| 0.5 * (-lambda * (1.0 + k as f64)).exp() * 0.5f64.powi(k as i32))
        .collect()
}

/// DP tables for the strip of width R: `l0[t][n]` and `l1[t][n]` are the
/// tilted masses of confined walks ending at 0 resp. R, `lhat[t][n]` of
/// walks ending strictly inside, and `lstar1[t][n]` is the truncated-law
/// mass at eps = 1 (the eps = 0 truncated mass coincides with `l0`
/// exactly, so it is not stored twice).
pub struct StripTables {
    pub r: i64,
    pub t_max: usize,
    pub lambda_star: f64,
    l0: Vec<Vec<f64>>,
    l1: Vec<Vec<f64>>,
    lhat: Vec<Vec<f64>>,
    lstar1: Vec<Vec<f64>>,
    l0_sum: Vec<f64>,
    l1_sum: Vec<f64>,
    lhat_sum: Vec<f64>,
    lstar1_sum: Vec<f64>,
    cdf_star: Vec<f64>,
}

impl StripTables {
    pub fn l0(&self, t: usize, n: usize) -> f64 {
        get2(&self.l0, t, n)
    }

    pub fn l1(&self, t: usize, n: usize) -> f64 {
        get2(&self.l1, t, n)
    }

    pub fn lhat(&self, t: usize, n: usize) -> f64 {
        get2(&self.lhat, t, n)
    }

    /// Truncated-law mass L*_R(t, n, eps).
    pub fn lstar(&self, t: usize, n: usize, eps: u8) -> f64 {
        if eps == 0 {
            // L*_R(t,n,0) = L_R(t,n,0) exactly.
            self.l0(t, n)
        } else {
            get2(&self.lstar1, t, n)
        }
    }

    pub fn l(&self, t: usize, n: usize, eps: u8) -> f64 {
        if eps == 0 {
            self.l0(t, n)
        } else {
            self.l1(t, n)
        }
    }

    /// L_R(t, eps) summed over n.
    pub fn l_sum(&self, t: usize, eps: u8) -> f64 {
        let v = if eps == 0 { &self.l0_sum } else { &self.l1_sum };
        v.get(t).copied().unwrap_or(0.0)
    }

    pub fn lhat_sum(&self, t: usize) -> f64 {
        // Lhat_R(0) = 1 by convention.
        if t == 0 {
            1.0
        } else {
            self.lhat_sum.get(t).copied().unwrap_or(0.0)
        }
    }

    pub fn lstar_sum(&self, t: usize, eps: u8) -> f64 {
        if eps == 0 {
            self.l0_sum.get(t).copied().unwrap_or(0.0)
        } else {
            self.lstar1_sum.get(t).copied().unwrap_or(0.0)
        }
    }

    /// P*_R(T <= t) under the truncated law.
    pub fn cdf_star(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            let i = t.min(self.cdf_star.len() - 1);
            self.cdf_star[i]
        }
    }

    /// P*_R(T > t).
    pub fn sf_star(&self, t: usize) -> f64 {
        (1.0 - self.cdf_star(t)).max(0.0)
    }

    /// Total truncated-law mass within the horizon (should reach 1 up to
    /// the tail).
    pub fn total_star_mass(&self) -> f64 {
        *self.cdf_star.last().unwrap()
    }
}

fn get2(v: &[Vec<f64>], t: usize, n: usize) -> f64 {
    v.get(t).and_then(|row| row.get(n)).copied().unwrap_or(0.0)
}

/// Build the L_R / Lhat_R tables together with the truncated-law L*_R
/// part. `zbar` must hold completion masses up to at least
/// `r + 1 + U_CAP`; see [`crate::effective::completion_mass`].
pub fn strip_tables(
    r: i64,
    t_max: usize,
    tilt: &TiltParams,
    zbar: &[f64],
) -> Result<StripTables> {
    if r < 0 {
        return Err(Error::Domain("strip width must be nonnegative".into()));
    }
    if t_max < 1 {
        return Err(Error::Domain("t_max must be at least 1".into()));
    }
    let needed_z = (r as usize) + 1 + U_CAP;
    if zbar.len() <= needed_z {
        return Err(Error::Precondition(format!(
            "completion-mass table too short: {} <= {needed_z}",
            zbar.len()
        )));
    }
    if (t_max + 1) * (t_max + 1) > TABLE_ENTRY_BUDGET / 4 {
        return Err(Error::Capacity(format!(
            "strip tables for (R = {r}, t_max = {t_max}) exceed the memory budget"
        )));
    }
    let lambda = tilt.lambda_star;
    let psi = psi_weights(lambda, U_CAP);
    let h_top = (r as usize).min(t_max);

    // Phi(h): tilted mass of an overshoot increment from height h followed
    // by any completion of the underlying excursion.
    let phi: Vec<f64> = (0..=h_top)
        .map(|h| {
            let mut acc = 0.0;
            for k in (r as usize + 1)..=(h + U_CAP).min(zbar.len() - 1) {
                let du = k - h;
                if du >= 1 && du <= U_CAP {
                    acc += psi[du] * zbar[k];
                }
            }
            acc
        })
        .collect();

    let mut l0 = vec![vec![0.0f64; t_max + 1]; t_max + 1];
    let mut l1 = vec![vec![0.0f64; t_max + 1]; t_max + 1];
    let mut lhat = vec![vec![0.0f64; t_max + 1]; t_max + 1];
    let mut lstar1 = vec![vec![0.0f64; t_max + 1]; t_max + 1];

    // Rolling confined-prefix layer: f[c][h] for the current n.
    let width = h_top + 1;
    let mut layer = vec![0.0f64; (t_max + 1) * width];
    layer[0] = 1.0; // n = 0: empty prefix at height 0
    let idx = |c: usize, h: usize| c * width + h;

    for n in 1..=t_max {
        // lstar1 contribution: overshoot at step n from the (n-1)-prefix.
        for c in (n - 1)..=t_max {
            for h in 0..=h_top.min(c) {
                let f = layer[idx(c, h)];
                if f > 0.0 && phi[h] > 0.0 {
                    let t = c + 1 + (r as usize - h);
                    if t <= t_max {
                        lstar1[t][n] += f * phi[h];
                    }
                }
            }
        }
        // Advance to the n-step layer.
        let mut next = vec![0.0f64; (t_max + 1) * width];
        for c in (n - 1)..t_max {
            for h in 0..=h_top.min(c) {
                let f = layer[idx(c, h)];
                if f == 0.0 {
                    continue;
                }
                let u_lo = -(h as i64).min(U_CAP as i64);
                let u_hi = (r - h as i64).min(U_CAP as i64);
                let mut u = u_lo;
                while u <= u_hi {
                    let k = u.unsigned_abs() as usize;
                    let cc = c + 1 + k;
                    if cc <= t_max {
                        let hh = (h as i64 + u) as usize;
                        next[idx(cc, hh)] += f * psi[k];
                    }
                    u += 1;
                }
            }
        }
        layer = next;
        for c in n..=t_max {
            for h in 0..=h_top.min(c) {
                let f = layer[idx(c, h)];
                if f == 0.0 {
                    continue;
                }
                if h == 0 {
                    l0[c][n] += f;
                }
                if h as i64 == r {
                    l1[c][n] += f;
                }
                if h > 0 && (h as i64) < r {
                    lhat[c][n] += f;
                }
            }
        }
    }

    if r == 0 {
        // The untruncated flat excursions end at R = 0 and carry eps = 1;
        // the paper folds them into L*_0(.,.,1) and zeroes L_0(.,.,0).
        for t in 1..=t_max {
            lstar1[t][t] += l0[t][t];
        }
        for row in l0.iter_mut() {
            for v in row.iter_mut() {
                *v = 0.0;
            }
        }
    }

    Ok(StripTables::from_arrays(r, t_max, lambda, l0, l1, lhat, lstar1))
}

impl StripTables {
    fn from_arrays(
        r: i64,
        t_max: usize,
        lambda_star: f64,
        l0: Vec<Vec<f64>>,
        l1: Vec<Vec<f64>>,
        lhat: Vec<Vec<f64>>,
        lstar1: Vec<Vec<f64>>,
    ) -> Self {
        let sum_rows =
            |m: &Vec<Vec<f64>>| -> Vec<f64> { m.iter().map(|r| r.iter().sum()).collect() };
        let l0_sum = sum_rows(&l0);
        let l1_sum = sum_rows(&l1);
        let lhat_sum = sum_rows(&lhat);
        let lstar1_sum = sum_rows(&lstar1);
        let mut cdf_star = vec![0.0f64; t_max + 1];
        let mut acc = 0.0;
        for t in 0..=t_max {
            acc += l0_sum[t] + lstar1_sum[t];
            cdf_star[t] = acc;
        }
        StripTables {
            r,
            t_max,
            lambda_star,
            l0,
            l1,
            lhat,
            lstar1,
            l0_sum,
            l1_sum,
            lhat_sum,
            lstar1_sum,
            cdf_star,
        }
    }

    /// Versioned binary image: header (magic, version, R, t_max,
    /// lambda_star) followed by the four (t,n) arrays as little-endian
    /// doubles.
    pub fn to_bytes(&self) -> Vec<u8> {
        let side = self.t_max + 1;
        let mut out = Vec::with_capacity(32 + 4 * side * side * 8);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&self.r.to_le_bytes());
        out.extend_from_slice(&(self.t_max as u64).to_le_bytes());
        out.extend_from_slice(&self.lambda_star.to_le_bytes());
        for table in [&self.l0, &self.l1, &self.lhat, &self.lstar1] {
            for row in table.iter() {
                for v in row.iter() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("strip table cache: {msg}"));
        if bytes.len() < 32 || &bytes[0..4] != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(bad("version mismatch"));
        }
        let r = i64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let t_max = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let lambda_star = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
        let side = t_max + 1;
        let expected = 32 + 4 * side * side * 8;
        if bytes.len() != expected {
            return Err(bad("truncated payload"));
        }
        let mut offset = 32;
        let mut read_table = || -> Vec<Vec<f64>> {
            let mut table = Vec::with_capacity(side);
            for _ in 0..side {
                let mut row = Vec::with_capacity(side);
                for _ in 0..side {
                    row.push(f64::from_le_bytes(
                        bytes[offset..offset + 8].try_into().unwrap(),
                    ));
                    offset += 8;
                }
                table.push(row);
            }
            table
        };
        let l0 = read_table();
        let l1 = read_table();
        let lhat = read_table();
        let lstar1 = read_table();
        Ok(StripTables::from_arrays(
            r,
            t_max,
            lambda_star,
            l0,
            l1,
            lhat,
            lstar1,
        ))
    }
}

const CACHE_MAGIC: &[u8; 4] = b"PWST";
const CACHE_VERSION: u32 = 1;

fn check_confined(values: &[i64], r: i64) -> Result<()> {
    if values.first() != Some(&0) {
        return Err(Error::Precondition("walk must start at 0".into()));
    }
    if values.iter().any(|&v| v < 0 || v > r) {
        return Err(Error::Precondition(format!(
            "walk leaves the strip [0, {r}]"
        )));
    }
    Ok(())
}

fn abs_increment_sum(values: &[i64]) -> i64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Reflection map of the crossing bound: sends a confined walk ending at R
/// (R even) to one ending at 0, preserving the consumed length. Returns
/// the image values and the case index (1: clean reflection with the same
/// step count; 2: jump over R/2, two extra steps).
pub fn reflect_g(values: &[i64], r: i64) -> Result<(Vec<i64>, u8)> {
    if r < 0 || r % 2 != 0 {
        return Err(Error::Unsupported(format!(
            "reflection is only defined for even R, got {r}"
        )));
    }
    check_confined(values, r)?;
    let n = values.len() - 1;
    if values[n] != r {
        return Err(Error::Precondition("walk must end at R".into()));
    }
    let half = r / 2;
    let tau = (1..=n)
        .find(|&i| values[i] >= half)
        .expect("walk ending at R passes R/2");
    if values[tau] == half {
        let mut out = values.to_vec();
        for v in out.iter_mut().skip(tau) {
            *v = r - *v;
        }
        Ok((out, 1))
    } else {
        let mut out = Vec::with_capacity(n + 3);
        out.extend_from_slice(&values[..tau]);
        out.push(half - 1);
        for &v in &values[tau..=n] {
            out.push(r - v);
        }
        out.push(0);
        Ok((out, 2))
    }
}

/// Folding map of the interior bound: sends a confined walk ending at an
/// even interior level x to one ending at 0 with two extra steps and two
/// extra consumed units. The junction increments absorb the removed ones,
/// so the absolute increment sum is preserved in every case.
pub fn fold_h(values: &[i64], r: i64, x: i64) -> Result<Vec<i64>> {
    if x % 2 != 0 {
        return Err(Error::Unsupported(format!(
            "folding is only defined for even x, got {x}"
        )));
    }
    if x <= 0 || x >= r {
        return Err(Error::Precondition(format!(
            "x must lie strictly inside (0, {r}), got {x}"
        )));
    }
    check_confined(values, r)?;
    let n = values.len() - 1;
    if values[n] != x {
        return Err(Error::Precondition("walk must end at x".into()));
    }
    let half = x / 2;
    let sigma = (0..=n)
        .rev()
        .find(|&i| values[i] < half)
        .expect("V_0 = 0 < x/2");
    let sigma_t = (sigma + 1..=n)
        .find(|&i| values[i] >= x)
        .expect("walk ends at x");
    let mut out = Vec::with_capacity(n + 3);
    out.extend_from_slice(&values[..=sigma]);
    out.push(half);
    for &v in &values[sigma_t..=n] {
        out.push(v - half);
    }
    for &v in &values[sigma + 1..sigma_t] {
        out.push(x - v);
    }
    out.push(0);
    debug_assert_eq!(out.len(), n + 3);
    debug_assert_eq!(abs_increment_sum(&out), abs_increment_sum(values));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::completion_mass;
    use crate::enumerate::for_each_strip_walk;

    fn tilt() -> TiltParams {
        TiltParams::pinned()
    }

    #[test]
    fn l0_zero_when_r_zero() {
        let tp = tilt();
        let z = completion_mass(tp.lambda_star, 256);
        let tables = strip_tables(0, 24, &tp, &z).unwrap();
        for t in 1..=24 {
            for n in 1..=t {
                assert_eq!(tables.l0(t, n), 0.0);
            }
            assert_eq!(tables.lhat_sum(t), 0.0);
        }
        // All truncated mass sits on flat images n = t with eps = 1.
        for t in 1..=24 {
            for n in 1..=t {
                if n != t {
                    assert_eq!(tables.lstar(t, n, 1), 0.0);
                }
            }
            assert!(tables.lstar(t, t, 1) > 0.0);
        }
    }

    #[test]
    fn l1_zero_below_reach() {
        let tp = tilt();
        let z = completion_mass(tp.lambda_star, 256);
        for r in [2i64, 4, 6] {
            let tables = strip_tables(r, 30, &tp, &z).unwrap();
            for t in 1..(r as usize) {
                assert_eq!(tables.l_sum(t, 1), 0.0, "r={r}, t={t}");
            }
        }
    }

    #[test]
    fn unconfined_limit_matches_k_star() {
        let tp = tilt();
        let z = completion_mass(tp.lambda_star, 512);
        let t_max = 40;
        let tables = strip_tables(2 * t_max as i64 + 2, t_max, &tp, &z).unwrap();
        let pstar = crate::effective::PStar::standard().unwrap();
        for t in 1..=t_max {
            let a = tables.l_sum(t, 0);
            let b = pstar.k_star(t);
            assert!((a - b).abs() < 1e-14, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn truncated_law_normalizes() {
        let tp = tilt();
        let z = completion_mass(tp.lambda_star, 512);
        for r in [0i64, 1, 2, 5, 9] {
            let tables = strip_tables(r, 320, &tp, &z).unwrap();
            let total = tables.total_star_mass();
            assert!(
                (total - 1.0).abs() < 1e-8,
                "r={r}: truncated law mass {total}"
            );
        }
    }

    #[test]
    fn strip_masses_match_enumeration() {
        // Direct check of the DP against exhaustive path enumeration:
        // every confined walk contributes psi-product = e^{log(3/2) n - lambda t} P(path).
        let tp = tilt();
        let z = completion_mass(tp.lambda_star, 256);
        let psi = psi_weights(tp.lambda_star, U_CAP);
        for r in [1i64, 2, 3] {
            let tables = strip_tables(r, 12, &tp, &z).unwrap();
            for t in 1..=12usize {
                let mut by_end = vec![vec![0.0f64; t + 1]; 3]; // end 0 / end r / interior
                for_each_strip_walk(r, t, |values| {
                    let n = values.len() - 1;
                    let w: f64 = values
                        .windows(2)
                        .map(|pair| psi[(pair[1] - pair[0]).unsigned_abs() as usize])
                        .product();
                    let last = *values.last().unwrap();
                    let slot = if last == 0 {
                        0
                    } else if last == r {
                        1
                    } else {
                        2
                    };
                    by_end[slot][n] += w;
                })
                .unwrap();
                for n in 1..=t {
                    let expect0 = if r == 0 { 0.0 } else { by_end[0][n] };
                    assert!((tables.l0(t, n) - expect0).abs() < 1e-15, "l0 r={r} t={t} n={n}");
                    assert!(
                        (tables.l1(t, n) - by_end[1][n]).abs() < 1e-15,
                        "l1 r={r} t={t} n={n}"
                    );
                    assert!(
                        (tables.lhat(t, n) - by_end[2][n]).abs() < 1e-15,
                        "lhat r={r} t={t} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn reflect_cases() {
        // Clean reflection keeps (n, t).
        let (img, case) = reflect_g(&[0, 1, 2, 4], 4).unwrap();
        assert_eq!(case, 1);
        assert_eq!(img, vec![0, 1, 2, 0]);
        // A jump over R/2 costs two extra steps, same consumed length.
        let orig = [0i64, 3, 4];
        let (img, case) = reflect_g(&orig, 4).unwrap();
        assert_eq!(case, 2);
        assert_eq!(img.last(), Some(&0));
        assert_eq!(img.len(), orig.len() + 2);
        // Consumed length t = n + sum |u| is preserved.
        let t_orig = abs_increment_sum(&orig) + (orig.len() as i64 - 1);
        let t_img = abs_increment_sum(&img) + (img.len() as i64 - 1);
        assert_eq!(t_orig, t_img);
        assert!(reflect_g(&[0, 1, 2, 3], 3).is_err());
    }

    #[test]
    fn fold_preserves_consumed_length() {
        let v = vec![0, 1, 3, 4, 3, 2];
        let out = fold_h(&v, 5, 2).unwrap();
        assert_eq!(out.last(), Some(&0));
        assert_eq!(out.len(), v.len() + 2);
        assert_eq!(abs_increment_sum(&out), abs_increment_sum(&v));
        assert!(out.iter().all(|&h| (0..=5).contains(&h)));
        assert!(fold_h(&v, 5, 3).is_err());
    }

    #[test]
    fn fold_split_points_on_hand_built_path() {
        // sigma is the last time strictly below x/2, sigma~ the first time
        // at or above x afterwards.
        let v = vec![0, 2, 1, 3, 5, 4];
        let x = 4i64;
        let half = x / 2;
        let n = v.len() - 1;
        let sigma = (0..=n).rev().find(|&i| v[i] < half).unwrap();
        let sigma_t = (sigma + 1..=n).find(|&i| v[i] >= x).unwrap();
        assert_eq!(sigma, 2);
        assert_eq!(sigma_t, 4);
        let out = fold_h(&v, 6, x).unwrap();
        assert_eq!(out, vec![0, 2, 1, 2, 3, 2, 1, 0]);
    }
}
