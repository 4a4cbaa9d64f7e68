//! The effective one-dimensional random walk behind the excursion
//! decomposition: discrete-Laplace increments, the excursion kernel K and
//! its Laplace transform, the tilt constants, and the tilted excursion law
//! P* with its two-stage sampler.
//!
//! All weighted path sums run over the per-increment weight
//! `psi(u) = (1/2) e^{-lambda (1+|u|)} 2^{-|u|}`, so that the product of
//! psi over an excursion equals `e^{log(3/2) N - lambda T} P(path)`. The
//! DP state is (consumed length, height): consumed length after i
//! increments is `i + sum |u_j|`.

use rand::Rng;

use crate::error::{Error, Result};

/// Increments larger than this carry weight below 2^-96 and are dropped
/// from every table and sampler alike, so tables and samplers stay
/// mutually exact.
pub const U_CAP: usize = 96;

/// Discrete Laplace pmf: P(U = x) = (1/3) 2^{-|x|}.
pub fn laplace_pmf(x: i64) -> f64 {
    (1.0 / 3.0) * 0.5f64.powi(x.unsigned_abs().min(1 << 30) as i32)
}

/// E[e^{-lambda |U|}] = (1/3)(1+q)/(1-q) with q = e^{-lambda}/2.
pub fn laplace_mgf_abs(lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "laplace_mgf_abs requires lambda > 0, got {lambda}"
        )));
    }
    let q = (-lambda).exp() / 2.0;
    Ok((1.0 / 3.0) * (1.0 + q) / (1.0 - q))
}

/// An effective-walk excursion: integer heights V_0..V_N with V_0 = 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EffectiveExcursion {
    values: Vec<i64>,
}

impl EffectiveExcursion {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Precondition(
                "an excursion has at least one increment".into(),
            ));
        }
        if values[0] != 0 {
            return Err(Error::Precondition("excursion must start at 0".into()));
        }
        Ok(EffectiveExcursion { values })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn increments(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of increments N.
    pub fn num_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Induced lattice length T = N + sum |U_i|.
    pub fn total_len(&self) -> usize {
        let abs_sum: u64 = self
            .values
            .windows(2)
            .map(|w| (w[1] - w[0]).unsigned_abs())
            .sum();
        self.num_steps() + abs_sum as usize
    }

    pub fn last(&self) -> i64 {
        *self.values.last().unwrap()
    }

    pub fn max_value(&self) -> i64 {
        *self.values.iter().max().unwrap()
    }

    pub fn is_nonneg(&self) -> bool {
        self.values.iter().all(|&v| v >= 0)
    }
}

/// Result of the truncation map T_R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedExcursion {
    pub excursion: EffectiveExcursion,
    pub eps: u8,
}

impl TruncatedExcursion {
    pub fn t(&self) -> usize {
        self.excursion.total_len()
    }

    pub fn n(&self) -> usize {
        self.excursion.num_steps()
    }
}

/// Truncation map T_R: identity when the excursion stays at or below R,
/// otherwise cut at the first passage above R and pin the final value to
/// R. The crossing flag is 1 iff the image ends at R (always, when R = 0).
pub fn truncate(v: &EffectiveExcursion, r: i64) -> Result<TruncatedExcursion> {
    if r < 0 {
        return Err(Error::Domain(format!("truncate requires R >= 0, got {r}")));
    }
    if !v.is_nonneg() {
        return Err(Error::Precondition(
            "truncate acts on nonnegative excursions".into(),
        ));
    }
    if v.max_value() <= r {
        let eps = u8::from(v.last() == r);
        return Ok(TruncatedExcursion {
            excursion: v.clone(),
            eps,
        });
    }
    let tau = v
        .values()
        .iter()
        .position(|&x| x >= r + 1)
        .expect("max > r implies a passage");
    let mut values = v.values()[..tau].to_vec();
    values.push(r);
    Ok(TruncatedExcursion {
        excursion: EffectiveExcursion::new(values)?,
        eps: 1,
    })
}

fn psi_weights(lambda: f64, cap: usize) -> Vec<f64> {
    (0..=cap)
        .map(|k| 0.5 * (-lambda * (1.0 + k as f64)).exp() * 0.5f64.powi(k as i32))
        .collect()
}

/// Weighted-path DP over nonnegative walks with tilt parameter lambda.
///
/// `b0[c][h]` is the total psi-weight of increment sequences from height h
/// that keep the walk nonnegative, consume exactly c, and end at 0; `b1`
/// and `b2` accumulate the first two moments of the sequence length, so
/// `b1[t][0] = sum_n n * (mass at (t, n))`. In particular
/// `b0[t][0] = K(t) e^{-lambda t}`.
pub struct WalkDp {
    pub lambda: f64,
    pub t_max: usize,
    psi: Vec<f64>,
    b0: Vec<Vec<f64>>,
    b1: Vec<Vec<f64>>,
    b2: Vec<Vec<f64>>,
}

impl WalkDp {
    pub fn new(lambda: f64, t_max: usize) -> Self {
        let psi = psi_weights(lambda, U_CAP);
        let mut b0: Vec<Vec<f64>> = Vec::with_capacity(t_max + 1);
        let mut b1: Vec<Vec<f64>> = Vec::with_capacity(t_max + 1);
        let mut b2: Vec<Vec<f64>> = Vec::with_capacity(t_max + 1);
        b0.push(vec![1.0]);
        b1.push(vec![0.0]);
        b2.push(vec![0.0]);
        for c in 1..=t_max {
            let mut row0 = vec![0.0f64; c + 1];
            let mut row1 = vec![0.0f64; c + 1];
            let mut row2 = vec![0.0f64; c + 1];
            for h in 0..=c {
                let (mut a0, mut a1, mut a2) = (0.0f64, 0.0f64, 0.0f64);
                let lo = -(h.min(c - 1).min(U_CAP) as i64);
                let hi = (c as i64 - 1 - h as i64).min(U_CAP as i64);
                let mut u = lo;
                while u <= hi {
                    let k = u.unsigned_abs() as usize;
                    let cc = c - 1 - k;
                    let hh = (h as i64 + u) as usize;
                    if hh <= cc {
                        let w = self_psi(&psi, k);
                        let v0 = b0[cc][hh];
                        a0 += w * v0;
                        a1 += w * (b1[cc][hh] + v0);
                        a2 += w * (b2[cc][hh] + 2.0 * b1[cc][hh] + v0);
                    }
                    u += 1;
                }
                row0[h] = a0;
                row1[h] = a1;
                row2[h] = a2;
            }
            b0.push(row0);
            b1.push(row1);
            b2.push(row2);
        }
        WalkDp {
            lambda,
            t_max,
            psi,
            b0,
            b1,
            b2,
        }
    }

    /// Mass of excursions of total length t: K(t) e^{-lambda t}.
    pub fn k_weighted(&self, t: usize) -> f64 {
        self.b0[t][0]
    }

    /// sum_n n * mass(t, n).
    pub fn n_first_moment(&self, t: usize) -> f64 {
        self.b1[t][0]
    }

    /// sum_n n^2 * mass(t, n).
    pub fn n_second_moment(&self, t: usize) -> f64 {
        self.b2[t][0]
    }

    pub fn mass(&self, c: usize, h: usize) -> f64 {
        if c > self.t_max || h > c {
            0.0
        } else {
            self.b0[c][h]
        }
    }

    pub fn psi(&self, k: usize) -> f64 {
        self_psi(&self.psi, k)
    }

    /// Draw an excursion of total length exactly t. Conditionally on t the
    /// psi-weights are constant across excursions, so this is the uniform
    /// law on the excursion set I_t.
    pub fn sample_path<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<EffectiveExcursion> {
        if t == 0 || t > self.t_max {
            return Err(Error::Capacity(format!(
                "sample_path: t = {t} outside 1..={}",
                self.t_max
            )));
        }
        if self.b0[t][0] == 0.0 {
            return Err(Error::Domain(format!("no excursion of length {t}")));
        }
        let mut values = vec![0i64];
        let mut c = t;
        let mut h = 0usize;
        while c > 0 {
            let total = self.b0[c][h];
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0f64;
            let mut chosen: Option<i64> = None;
            let mut last_valid: Option<i64> = None;
            // Deterministic zig-zag enumeration 0, +1, -1, +2, -2, ...
            'outer: for k in 0..=U_CAP.min(c - 1) {
                let candidates: &[i64] = if k == 0 { &[0] } else { &[k as i64, -(k as i64)] };
                for &u in candidates {
                    if u < -(h as i64) {
                        continue;
                    }
                    let cc = c - 1 - k;
                    let hh = (h as i64 + u) as usize;
                    if hh > cc {
                        continue;
                    }
                    let w = self_psi(&self.psi, k) * self.b0[cc][hh];
                    if w <= 0.0 {
                        continue;
                    }
                    last_valid = Some(u);
                    acc += w;
                    if acc >= target {
                        chosen = Some(u);
                        break 'outer;
                    }
                }
            }
            let u = chosen
                .or(last_valid)
                .ok_or_else(|| Error::Domain(format!("stuck at (c={c}, h={h})")))?;
            h = (h as i64 + u) as usize;
            c -= 1 + u.unsigned_abs() as usize;
            values.push(h as i64);
        }
        if h != 0 {
            return Err(Error::Domain("sampled path failed to close".into()));
        }
        EffectiveExcursion::new(values)
    }
}

#[inline]
fn self_psi(psi: &[f64], k: usize) -> f64 {
    if k < psi.len() {
        psi[k]
    } else {
        0.0
    }
}

/// Exact excursion kernel K(t) = 2^{-t} |I_t|, from the lambda = 0 DP.
pub struct ExcursionKernel {
    dp: WalkDp,
}

impl ExcursionKernel {
    pub fn new(t_max: usize) -> Self {
        ExcursionKernel {
            dp: WalkDp::new(0.0, t_max),
        }
    }

    pub fn t_max(&self) -> usize {
        self.dp.t_max
    }

    pub fn k(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::Domain("K(t) requires t >= 1".into()));
        }
        if t > self.dp.t_max {
            return Err(Error::Capacity(format!(
                "K({t}) beyond table horizon {}",
                self.dp.t_max
            )));
        }
        Ok(self.dp.k_weighted(t))
    }

    /// Truncated Laplace transform sum_{t <= t_max} K(t) e^{-lambda t}
    /// together with a geometric tail estimate. Signals divergence when
    /// the terms stop being summable.
    pub fn k_hat(&self, lambda: f64) -> Result<(f64, f64)> {
        let t_max = self.dp.t_max;
        let mut sum = 0.0f64;
        let mut comp = 0.0f64; // Kahan compensation
        let mut terms = Vec::with_capacity(t_max);
        for t in 1..=t_max {
            let term = self.dp.k_weighted(t) * (-lambda * t as f64).exp();
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            terms.push(term);
        }
        // Ratio of successive K-values near the horizon bounds the growth.
        let window = 16.min(t_max / 2);
        let mut ratio: f64 = 0.0;
        for t in (t_max - window + 1)..=t_max {
            let prev = self.dp.k_weighted(t - 1);
            if prev > 0.0 {
                ratio = ratio.max(self.dp.k_weighted(t) / prev);
            }
        }
        let r = ratio * (-lambda).exp() * 1.02;
        let last = *terms.last().unwrap();
        if r >= 1.0 {
            return Err(Error::Divergence(format!(
                "k_hat({lambda}) tail ratio {r:.6} >= 1; partial sums are not Cauchy"
            )));
        }
        let tail = last * r / (1.0 - r);
        Ok((sum, tail))
    }
}

/// Outcome of the signed-walk series for G(lambda).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GSeries {
    /// Layer mass fell below tolerance; the value is complete.
    Converged(f64),
    /// No growth, but the horizon ran out first (near-critical lambda).
    /// Carries the partial sum and the residual layer mass.
    Slow(f64, f64),
    /// Layer mass started growing: the series diverges.
    Diverged,
}

/// One run of the G-series DP: layers over strictly positive heights with
/// absorption weight q(h) for an exact return to 0. Per-excursion-length
/// terms decay geometrically above the critical tilt and like n^{-3/2} at
/// it; growing layer mass signals divergence.
pub fn g_series(lambda: f64, n_max: usize, h_cap: usize, tol: f64) -> GSeries {
    let alpha = (1.5f64).ln() - lambda;
    let ea = alpha.exp();
    let width = h_cap + 1;
    let q: Vec<f64> = (0..width)
        .map(|k| ea / 3.0 * (-lambda * k as f64).exp() * 0.5f64.powi(k as i32))
        .collect();
    let mut total = q[0]; // n = 1 with V_1 = 0
    let mut layer: Vec<f64> = (0..width).map(|h| if h == 0 { 0.0 } else { q[h] }).collect();
    let mut min_mass = f64::INFINITY;
    for _ in 2..=n_max {
        let absorbed: f64 = (1..width).map(|h| layer[h] * q[h]).sum();
        total += absorbed;
        let mut next = vec![0.0f64; width];
        for h in 1..width {
            let w = layer[h];
            if w == 0.0 {
                continue;
            }
            let lo = h.saturating_sub(U_CAP).max(1);
            let hi = (h + U_CAP).min(h_cap);
            for hh in lo..=hi {
                next[hh] += w * q[h.abs_diff(hh)];
            }
        }
        layer = next;
        let mass: f64 = layer.iter().sum();
        if mass < tol {
            return GSeries::Converged(total);
        }
        if mass > 1.5 * min_mass {
            return GSeries::Diverged;
        }
        min_mass = min_mass.min(mass);
    }
    GSeries::Slow(total, min_mass)
}

const G_N_MAX: usize = 20_000;
const G_H_CAP: usize = 320;
const G_TOL: f64 = 1e-15;

/// Direct DP route for G; errors when the series is too slow (critical
/// neighborhood) or diverges.
pub fn g_route_a(lambda: f64, n_max: usize, h_cap: usize, tol: f64) -> Result<f64> {
    match g_series(lambda, n_max, h_cap, tol) {
        GSeries::Converged(v) => Ok(v),
        GSeries::Slow(v, mass) => Err(Error::Divergence(format!(
            "g_route_a({lambda}): horizon {n_max} exhausted with mass {mass:.3e} (partial {v:.9})"
        ))),
        GSeries::Diverged => Err(Error::Divergence(format!(
            "g_route_a({lambda}): layer mass grows; series diverges"
        ))),
    }
}

/// Tail sum_{n >= a} n^{-s} via Euler-Maclaurin; accurate to ~1e-16 for
/// a in the thousands.
fn power_tail(s: f64, a: f64) -> f64 {
    a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s) + s / 12.0 * a.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * a.powf(-s - 3.0)
}

/// Near-critical evaluation of G: run the series to a moderate horizon,
/// then complete it with a fitted n^{-3/2}(c0 + c1/n + c2/n^2) tail. At
/// the critical tilt the absorbed terms follow exactly this expansion, so
/// the completed sum is accurate to ~1e-12.
pub fn g_critical(lambda: f64, n_horizon: usize) -> f64 {
    let alpha = (1.5f64).ln() - lambda;
    let ea = alpha.exp();
    // Walk variance sets how wide the surviving layers spread.
    let s_total: f64 = {
        let mut s = ea / 3.0;
        for k in 1..=U_CAP {
            s += 2.0 * ea / 3.0 * (-lambda * k as f64).exp() * 0.5f64.powi(k as i32);
        }
        s
    };
    let var: f64 = {
        let mut v = 0.0;
        for k in 1..=U_CAP {
            v += 2.0 * (k * k) as f64 * ea / 3.0 * (-lambda * k as f64).exp() * 0.5f64.powi(k as i32);
        }
        v / s_total
    };
    let h_cap = ((5.0 * (var * n_horizon as f64).sqrt()) as usize).max(G_H_CAP);
    let width = h_cap + 1;
    let q: Vec<f64> = (0..width)
        .map(|k| ea / 3.0 * (-lambda * k as f64).exp() * 0.5f64.powi(k as i32))
        .collect();
    let mut total = q[0];
    let mut layer: Vec<f64> = (0..width).map(|h| if h == 0 { 0.0 } else { q[h] }).collect();
    let fit_lo = n_horizon / 2;
    let mut fit: Vec<(f64, f64)> = Vec::with_capacity(n_horizon - fit_lo + 1);
    for n in 2..=n_horizon {
        let absorbed: f64 = (1..width).map(|h| layer[h] * q[h]).sum();
        total += absorbed;
        if n >= fit_lo {
            fit.push((n as f64, absorbed));
        }
        let mut next = vec![0.0f64; width];
        for h in 1..width {
            let w = layer[h];
            if w == 0.0 {
                continue;
            }
            let lo = h.saturating_sub(U_CAP).max(1);
            let hi = (h + U_CAP).min(h_cap);
            for hh in lo..=hi {
                next[hh] += w * q[h.abs_diff(hh)];
            }
        }
        layer = next;
    }
    // Least squares for absorbed_n * n^{3/2} =~ c0 + c1/n + c2/n^2.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(n, a) in &fit {
        let y = a * n.powf(1.5);
        let x = [1.0, 1.0 / n, 1.0 / (n * n)];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += x[i] * x[j];
            }
            rhs[i] += x[i] * y;
        }
    }
    let c = solve3(m, rhs);
    let a = (n_horizon + 1) as f64;
    total + c[0] * power_tail(1.5, a) + c[1] * power_tail(2.5, a) + c[2] * power_tail(3.5, a)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..3 {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    [b[0] / m[0][0], b[1] / m[1][1], b[2] / m[2][2]]
}

/// G(lambda), reconciled: the direct series when it converges within the
/// default budget, completed by the fitted power tail in the slow
/// near-critical sliver.
pub fn g_of_lambda(lambda: f64) -> Result<f64> {
    match g_series(lambda, G_N_MAX, G_H_CAP, G_TOL) {
        GSeries::Converged(v) => Ok(v),
        GSeries::Slow(_, _) => Ok(g_critical(lambda, 6000)),
        GSeries::Diverged => Err(Error::Divergence(format!(
            "G({lambda}) diverges: lambda is below the summability threshold"
        ))),
    }
}

/// G recovered from the Laplace transform via K_hat = G / (1 - G).
pub fn g_from_k_hat(kernel: &ExcursionKernel, lambda: f64) -> Result<f64> {
    let (kh, _) = kernel.k_hat(lambda)?;
    Ok(kh / (1.0 + kh))
}

/// The tilt constants governing the excursion laws.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TiltParams {
    pub lambda_star: f64,
    pub alpha_star: f64,
    pub lambda_hat: f64,
    pub lambda_double_star: f64,
}

/// Solve the tilt constants. lambda_hat is the root of the martingale
/// identity log E[e^{-l|U|}] = l - log(3/2); lambda_star the root of
/// G = 1/2 by bisection on the direct series; lambda_double_star is the
/// diagnostic divergence threshold of that series, estimated as the onset
/// of layer-mass growth under the default horizon (it sits a hair below
/// lambda_hat, where the tilted walk turns critical).
pub fn solve_tilts(tolerance: f64) -> Result<TiltParams> {
    if tolerance <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let lambda_hat = bisect(
        |l| Ok(laplace_mgf_abs(l)?.ln() - l + (1.5f64).ln()),
        1e-12,
        4.0,
        tolerance.min(1e-12),
    )?;

    let g_hat = g_of_lambda(lambda_hat)?;
    if !(0.5..1.0).contains(&g_hat) {
        return Err(Error::Solver(format!(
            "G(lambda_hat) = {g_hat} outside (1/2, 1)"
        )));
    }

    // Bracket G = 1/2 strictly above the critical point so the series
    // converges geometrically at every bisection query.
    let mut lo = None;
    for off in [0.04, 0.02, 0.01, 0.005] {
        let l = lambda_hat + off;
        if let GSeries::Converged(g) = g_series(l, G_N_MAX, G_H_CAP, G_TOL) {
            if g > 0.5 {
                lo = Some(l);
                break;
            }
        }
    }
    let lo = lo.ok_or_else(|| Error::Solver("failed to bracket G = 1/2 from above".into()))?;
    let lambda_star = bisect(
        |l| g_route_a(l, G_N_MAX, G_H_CAP, G_TOL).map(|g| g - 0.5),
        lo,
        lambda_hat + 1.0,
        tolerance,
    )?;

    // Divergence onset: bisect the indicator "layer mass grows within the
    // horizon" below lambda_hat. Diagnostic resolution only.
    let diverges = |l: f64| matches!(g_series(l, 8_000, 300, G_TOL), GSeries::Diverged);
    let mut div_lo = lambda_hat * 0.5;
    while !diverges(div_lo) {
        div_lo *= 0.5;
        if div_lo < 1e-3 {
            return Err(Error::Solver(
                "no divergence onset found below lambda_hat".into(),
            ));
        }
    }
    let mut div_hi = lambda_hat;
    let mut div_lo = div_lo;
    while div_hi - div_lo > 1e-5 {
        let mid = 0.5 * (div_lo + div_hi);
        if diverges(mid) {
            div_lo = mid;
        } else {
            div_hi = mid;
        }
    }
    let lambda_double_star = 0.5 * (div_lo + div_hi);

    let params = TiltParams {
        lambda_star,
        alpha_star: (1.5f64).ln() - lambda_star,
        lambda_hat,
        lambda_double_star,
    };
    if !(params.lambda_double_star < params.lambda_hat && params.lambda_hat < params.lambda_star) {
        return Err(Error::Solver(format!("tilt ordering violated: {params:?}")));
    }
    Ok(params)
}

/// Bisection on a decreasing function with f(lo) > 0 > f(hi).
fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo < 0.0 || fhi > 0.0 {
        return Err(Error::Solver(format!(
            "bracket failure: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Completion masses of the tilted walk: z[h] is the total psi-weight of
/// increment sequences from height h >= 1 that stay nonnegative and end at
/// 0, counting every admissible termination point. z[0] = 1 restates the
/// normalization of K* and is checked by tests.
pub fn completion_mass(lambda_star: f64, h_max: usize) -> Vec<f64> {
    let psi = psi_weights(lambda_star, U_CAP);
    let p = |k: usize| self_psi(&psi, k);
    let mut z = vec![0.0f64; h_max + 1];
    z[0] = 1.0;
    loop {
        let mut delta: f64 = 0.0;
        for h in 1..=h_max {
            let mut v = 2.0 * p(h);
            for k in 1..=h_max {
                let w = p(h.abs_diff(k));
                if w > 0.0 {
                    v += w * z[k];
                }
            }
            delta = delta.max((v - z[h]).abs());
            z[h] = v;
        }
        if delta < 1e-17 {
            break;
        }
    }
    z
}

/// Default K* horizon: leaves tail mass around 2e-12.
pub const DEFAULT_T_CAP: usize = 768;

/// The tilted excursion law P*: length marginal K*(t) = K(t) e^{-lambda* t},
/// conditional path law uniform on I_t.
pub struct PStar {
    pub tilt: TiltParams,
    dp: WalkDp,
    pmf: Vec<f64>, // index t, entry 0 unused
    cdf: Vec<f64>,
    alias: AliasTable,
    tail_mass: f64,
}

impl PStar {
    /// Pinned tilt constants at the default horizon.
    pub fn standard() -> Result<Self> {
        PStar::new(TiltParams::pinned(), DEFAULT_T_CAP)
    }

    pub fn new(tilt: TiltParams, t_cap: usize) -> Result<Self> {
        let dp = WalkDp::new(tilt.lambda_star, t_cap);
        let mut pmf = vec![0.0f64; t_cap + 1];
        let mut cum = 0.0f64;
        let mut cdf = vec![0.0f64; t_cap + 1];
        for t in 1..=t_cap {
            pmf[t] = dp.k_weighted(t);
            cum += pmf[t];
            cdf[t] = cum;
        }
        let tail_mass = (1.0 - cum).max(0.0);
        if tail_mass > 1e-8 {
            return Err(Error::Capacity(format!(
                "t_cap {t_cap} leaves K* tail mass {tail_mass:.3e}; raise the horizon"
            )));
        }
        let alias = AliasTable::new(&pmf[1..]);
        Ok(PStar {
            tilt,
            dp,
            pmf,
            cdf,
            alias,
            tail_mass,
        })
    }

    pub fn t_cap(&self) -> usize {
        self.dp.t_max
    }

    pub fn dp(&self) -> &WalkDp {
        &self.dp
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn k_star(&self, t: usize) -> f64 {
        if t == 0 || t >= self.pmf.len() {
            0.0
        } else {
            self.pmf[t]
        }
    }

    /// P*(T <= t), exact within the table horizon.
    pub fn cdf(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else if t >= self.cdf.len() {
            *self.cdf.last().unwrap()
        } else {
            self.cdf[t]
        }
    }

    /// P*(T > t).
    pub fn sf(&self, t: usize) -> f64 {
        (1.0 - self.cdf(t)).max(self.tail_mass)
    }

    pub fn sample_t<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng) + 1
    }

    /// Two-stage draw: T from K*, then the path uniformly on I_T.
    pub fn sample_excursion<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EffectiveExcursion> {
        let t = self.sample_t(rng);
        self.dp.sample_path(t, rng)
    }
}

/// Walker alias table over weights; deterministic construction.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0usize; n];
        let mut prob = vec![1.0f64; n];
        let mut small: Vec<usize> = (0..n).filter(|&i| scaled[i] < 1.0).collect();
        let mut large: Vec<usize> = (0..n).filter(|&i| scaled[i] >= 1.0).collect();
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            large.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        AliasTable { prob, alias }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    /// One full solve per test process; individual tests assert on it.
    fn solved() -> TiltParams {
        static CELL: OnceLock<TiltParams> = OnceLock::new();
        *CELL.get_or_init(|| solve_tilts(1e-12).unwrap())
    }

    #[test]
    fn laplace_pmf_values() {
        assert!((laplace_pmf(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((laplace_pmf(2) - 1.0 / 12.0).abs() < 1e-15);
        let total: f64 = (-60..=60).map(laplace_pmf).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mgf_abs_matches_direct_sum() {
        // lambda = log 2: q = 1/4, value = (1/3)(5/4)/(3/4) = 5/9.
        let v = laplace_mgf_abs(2.0f64.ln()).unwrap();
        assert!((v - 5.0 / 9.0).abs() < 1e-15);
        for &lambda in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let direct: f64 = (-200..=200)
                .map(|x: i64| laplace_pmf(x) * (-lambda * x.abs() as f64).exp())
                .sum();
            let closed = laplace_mgf_abs(lambda).unwrap();
            assert!(
                (direct - closed).abs() < 1e-13,
                "lambda={lambda}: {direct} vs {closed}"
            );
        }
        assert!(laplace_mgf_abs(0.0).is_err());
        // lambda -> infinity: only x = 0 survives.
        assert!((laplace_mgf_abs(40.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_small_values() {
        let kernel = ExcursionKernel::new(32);
        assert!((kernel.k(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((kernel.k(2).unwrap() - 0.25).abs() < 1e-15);
        assert!((kernel.k(4).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn k_hat_dominated_by_first_term() {
        let kernel = ExcursionKernel::new(64);
        let (v, tail) = kernel.k_hat(10.0).unwrap();
        let first = 0.5 * (-10.0f64).exp();
        assert!((v - first).abs() / first < 1e-3);
        assert!(tail < 1e-8);
        // Strictly decreasing in lambda.
        let (v2, _) = kernel.k_hat(9.0).unwrap();
        assert!(v2 > v);
    }

    #[test]
    fn truncate_examples() {
        let v = EffectiveExcursion::new(vec![0, 0]).unwrap();
        let tr = truncate(&v, 5).unwrap();
        assert_eq!(tr.excursion, v);
        assert_eq!(tr.eps, 0);

        let v = EffectiveExcursion::new(vec![0, 3, 0]).unwrap();
        let tr = truncate(&v, 2).unwrap();
        assert_eq!(tr.excursion.values(), &[0, 2]);
        assert_eq!((tr.t(), tr.n(), tr.eps), (3, 1, 1));

        // R = 0 pins eps = 1 even for the untouched flat excursion.
        let v = EffectiveExcursion::new(vec![0, 0, 0]).unwrap();
        let tr = truncate(&v, 0).unwrap();
        assert_eq!(tr.eps, 1);
        assert_eq!(tr.excursion.values(), &[0, 0, 0]);
    }

    #[test]
    fn lambda_hat_matches_closed_form() {
        // log E[e^{-l|U|}] = l - log(3/2) reduces to z^2 + 4z - 4 = 0 with
        // z = e^{-l}, i.e. lambda_hat = ln((sqrt 2 + 1)/2)... = ln(1+sqrt2) - ln 2.
        let tilt = solved();
        let closed = (1.0 + 2.0f64.sqrt()).ln() - 2.0f64.ln();
        assert!(
            (tilt.lambda_hat - closed).abs() < 1e-10,
            "{} vs {closed}",
            tilt.lambda_hat
        );
    }

    #[test]
    fn martingale_identity_at_lambda_hat() {
        let tilt = solved();
        let alpha_hat = (1.5f64).ln() - tilt.lambda_hat;
        let e = alpha_hat.exp() * laplace_mgf_abs(tilt.lambda_hat).unwrap();
        assert!((e - 1.0).abs() < 1e-12, "martingale identity residual {e}");
    }

    #[test]
    fn g_identity_at_lambda_hat() {
        let tilt = solved();
        let g = g_of_lambda(tilt.lambda_hat).unwrap();
        let expected = 0.5 + (-2.0 * tilt.lambda_hat).exp() / 8.0;
        assert!((g - expected).abs() < 1e-10, "{g} vs {expected}");
    }

    #[test]
    fn tilt_ordering_and_k_hat_root() {
        let tilt = solved();
        assert!(tilt.lambda_double_star < tilt.lambda_hat);
        assert!(tilt.lambda_hat < tilt.lambda_star);
        let kernel = ExcursionKernel::new(768);
        let (kh, tail) = kernel.k_hat(tilt.lambda_star).unwrap();
        assert!((kh - 1.0).abs() < 1e-8 + tail, "K_hat(lambda*) = {kh}");
    }

    #[test]
    fn g_routes_agree() {
        let tilt = solved();
        let kernel = ExcursionKernel::new(768);
        for &frac in &[1.0, 2.0, 4.0, 8.0] {
            let lambda = tilt.lambda_hat + frac * (tilt.lambda_star - tilt.lambda_hat);
            let a = g_route_a(lambda, 20_000, 320, 1e-15).unwrap();
            let b = g_from_k_hat(&kernel, lambda).unwrap();
            assert!((a - b).abs() < 1e-9, "lambda={lambda}: {a} vs {b}");
        }
    }

    #[test]
    fn completion_mass_normalization() {
        let tilt = TiltParams::pinned();
        let z = completion_mass(tilt.lambda_star, 400);
        let psi = psi_weights(tilt.lambda_star, U_CAP);
        let mut total = 2.0 * psi[0];
        for (k, zk) in z.iter().enumerate().skip(1) {
            if k < psi.len() {
                total += psi[k] * zk;
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "E(0) = {total}");
    }

    #[test]
    fn k_star_is_a_probability() {
        let pstar = PStar::standard().unwrap();
        let total: f64 = (1..=pstar.t_cap()).map(|t| pstar.k_star(t)).sum();
        assert!(total <= 1.0 + 1e-12);
        assert!(total >= 1.0 - 1e-9 - pstar.tail_mass());
        // K*(1) = e^{-lambda*}/2.
        let expected = (-pstar.tilt.lambda_star).exp() / 2.0;
        assert!((pstar.k_star(1) - expected).abs() < 1e-14);
        // Exponential tail: log K* decreases at least linearly past t = 10.
        let mut prev = pstar.k_star(10).ln();
        for t in 11..80 {
            let cur = pstar.k_star(t).ln();
            assert!(cur < prev - 1e-6, "t={t}");
            prev = cur;
        }
    }

    #[test]
    #[ignore = "prints solver output for pinning regression constants"]
    fn print_tilt_constants() {
        let tilt = solved();
        println!("lambda_star        = {:.17e}", tilt.lambda_star);
        println!("alpha_star         = {:.17e}", tilt.alpha_star);
        println!("lambda_hat         = {:.17e}", tilt.lambda_hat);
        println!("lambda_double_star = {:.17e}", tilt.lambda_double_star);
        let kernel = ExcursionKernel::new(1024);
        let (kh, tail) = kernel.k_hat(tilt.lambda_star).unwrap();
        println!("K_hat(lambda_star) = {kh:.15} (tail {tail:.3e})");
        let g_hat = g_of_lambda(tilt.lambda_hat).unwrap();
        println!(
            "G(lambda_hat)      = {g_hat:.15} vs closed {:.15}",
            0.5 + (-2.0 * tilt.lambda_hat).exp() / 8.0
        );
        // Growth rate of K: should approach e^{lambda_hat}.
        let r = kernel.k(1024).unwrap() / kernel.k(1023).unwrap();
        println!("K ratio at 1024    = {:.12} vs e^lh = {:.12}", r, tilt.lambda_hat.exp());
    }

    #[test]
    fn sampled_paths_close_and_match_length() {
        let pstar = PStar::standard().unwrap();
        let mut rng = crate::sample::stream_rng(7, 0);
        for _ in 0..500 {
            let exc = pstar.sample_excursion(&mut rng).unwrap();
            assert!(exc.is_nonneg());
            assert_eq!(exc.last(), 0);
            assert!(exc.total_len() >= 1);
        }
    }
}
