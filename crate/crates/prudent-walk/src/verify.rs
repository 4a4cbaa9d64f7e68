//! The acceptance suite: every criterion is a named check with pinned
//! thresholds, runnable through the `verify` subcommand or the
//! `acceptance` integration test. All Monte Carlo uses fixed seeds and
//! per-draw streams, so outcomes are reproducible bit for bit.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::constants;
use crate::effective::{
    g_of_lambda, solve_tilts, ExcursionKernel, PStar, TiltParams,
};
use crate::enumerate::{
    count_excursion_set, count_prudent, count_two_sided_plus, for_each_prudent,
    for_each_strip_walk, for_each_two_sided_plus,
};
use crate::error::Result;
use crate::io::{build_report, canonical_json, ReportConfig};
use crate::lattice::LatticePath;
use crate::sample::{
    build_lattice_from_excursions, kinetic_pmf, sample_kinetic, StripCache, TwoSidedSampler,
    UniformIsSampler,
};
use crate::scaling::{
    clt_report, concentration_report, covariance_b, crossing_report, diagonal_deviation,
    moments_from_series, quadrant_distribution, PathLaw,
};
use crate::strip::{fold_h, reflect_g, strip_tables};

const VERIFY_SEED: u64 = 2026_08_06;
const L_MAX: usize = 14;

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
    pub seconds: f64,
}

fn run_check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (pass, details) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name,
        pass,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run the full acceptance suite in criterion order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        run_check("1_oracle_identities", c1_oracle_identities),
        run_check("2_tilt_solver", c2_tilt_solver),
        run_check("3_kinetic_law", c3_kinetic_law),
        run_check("4_two_sided_uniformity", c4_two_sided_uniformity),
        run_check("5_importance_sampler", c5_importance_sampler),
        run_check("6_lemma_inequalities", c6_lemma_inequalities),
        run_check("7_ballisticity", c7_ballisticity),
        run_check("8_clt", c8_clt),
        run_check("9_quadrants", c9_quadrants),
        run_check("10_crossing_statistics", c10_crossing_statistics),
        run_check("11_determinism", c11_determinism),
    ]
}

fn chi_square_p(observed: &[u64], probs: &[f64], n: u64) -> f64 {
    debug_assert_eq!(observed.len(), probs.len());
    let mut x2 = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n as f64 * p;
        x2 += (o as f64 - e) * (o as f64 - e) / e;
    }
    let dof = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(dof).unwrap();
    1.0 - dist.cdf(x2)
}

fn big_to_f64(b: &BigUint) -> f64 {
    b.to_string().parse().unwrap()
}

// Criterion 1: exact oracle identities.
fn c1_oracle_identities() -> Result<(bool, String)> {
    let mut pass = true;
    let mut notes = Vec::new();

    for (l, want) in [(1usize, 4u32), (2, 12), (3, 36)] {
        let got = count_prudent(l, false, L_MAX, false)?.count;
        if got != BigUint::from(want) {
            pass = false;
            notes.push(format!("|Omega_{l}| = {got}, want {want}"));
        }
    }
    for (t, want) in [(1usize, 1u128), (2, 1), (4, 2)] {
        let got = count_excursion_set(t)?;
        if got != want {
            pass = false;
            notes.push(format!("|I_{t}| = {got}, want {want}"));
        }
    }

    // DP kernel versus enumeration, exactly, up to t = 18.
    let kernel = ExcursionKernel::new(64);
    for t in 1..=18 {
        let dp = kernel.k(t)?;
        let oracle = count_excursion_set(t)? as f64 * 0.5f64.powi(t as i32);
        if (dp - oracle).abs() > 1e-15 * oracle.max(1.0) {
            pass = false;
            notes.push(format!("K({t}) = {dp} vs oracle {oracle}"));
        }
    }

    // Renewal identity 2^-L |Omega_L^+| = sum over compositions of prod K.
    let mut comp = vec![0.0f64; 11];
    comp[0] = 1.0;
    for l in 1..=10usize {
        comp[l] = (1..=l).map(|t| kernel.k(t).unwrap() * comp[l - t]).sum();
    }
    let mut max_resid: f64 = 0.0;
    for l in 1..=10usize {
        let lhs = big_to_f64(&count_two_sided_plus(l, L_MAX)?.count) * 0.5f64.powi(l as i32);
        max_resid = max_resid.max((lhs - comp[l]).abs());
    }
    if max_resid > 1e-10 {
        pass = false;
        notes.push(format!("two-sided identity residual {max_resid:.3e}"));
    }

    let details = if notes.is_empty() {
        format!(
            "|Omega_1..3| = 4,12,36; |I_1|,|I_2|,|I_4| = 1,1,2; K DP exact to t=18; \
             renewal identity residual {max_resid:.2e} over L <= 10"
        )
    } else {
        notes.join("; ")
    };
    Ok((pass, details))
}

// Criterion 2: tilt solver identities and ordering.
fn c2_tilt_solver() -> Result<(bool, String)> {
    let tilt = solve_tilts(1e-10)?;
    let kernel = ExcursionKernel::new(1024);
    let (kh, tail) = kernel.k_hat(tilt.lambda_star)?;
    let kh_ok = (kh - 1.0).abs() <= 1e-8 + tail;
    let g_hat = g_of_lambda(tilt.lambda_hat)?;
    let closed = 0.5 + (-2.0 * tilt.lambda_hat).exp() / 8.0;
    let g_ok = (g_hat - closed).abs() <= 1e-10;
    let order_ok = tilt.lambda_double_star < tilt.lambda_hat && tilt.lambda_hat < tilt.lambda_star;
    let drift = (tilt.lambda_star - constants::LAMBDA_STAR).abs();
    let pass = kh_ok && g_ok && order_ok && drift < 1e-8;
    Ok((
        pass,
        format!(
            "K_hat(lambda*) = {kh:.12} (tail {tail:.1e}); |G(lambda_hat) - closed| = {:.2e}; \
             ordering {:.9} < {:.9} < {:.9}; |lambda* - pinned| = {drift:.2e}",
            (g_hat - closed).abs(),
            tilt.lambda_double_star,
            tilt.lambda_hat,
            tilt.lambda_star
        ),
    ))
}

// Criterion 3: kinetic law normalization and sampler fit.
fn c3_kinetic_law() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for l in 1..=8 {
        let mut total = 0.0;
        for_each_prudent(l, false, L_MAX, |s| {
            total += kinetic_pmf(&LatticePath::new(s.to_vec()));
        })?;
        worst = worst.max((total - 1.0).abs());
    }
    let norm_ok = worst <= 1e-12;

    let l = 5;
    let mut index = HashMap::new();
    let mut probs = Vec::new();
    for_each_prudent(l, false, L_MAX, |s| {
        let p = LatticePath::new(s.to_vec());
        index.insert(p.step_string(), probs.len());
        probs.push(kinetic_pmf(&p));
    })?;
    let n = 100_000u64;
    let counts_per_draw: Vec<usize> = crate::scaling::par_draws(n as usize, VERIFY_SEED, |_, rng| {
        index[&sample_kinetic(l, rng).step_string()]
    });
    let mut observed = vec![0u64; probs.len()];
    for i in counts_per_draw {
        observed[i] += 1;
    }
    let p_value = chi_square_p(&observed, &probs, n);
    let pass = norm_ok && p_value > 0.01;
    Ok((
        pass,
        format!(
            "normalization residual {worst:.2e} over L <= 8; chi-square p = {p_value:.4} \
             at L = 5 with 1e5 draws over {} cells",
            probs.len()
        ),
    ))
}

// Criterion 4: pinned-renewal sampler is uniform on Omega_L^+.
fn c4_two_sided_uniformity() -> Result<(bool, String)> {
    let pstar = PStar::standard()?;
    let mut worst_p = 1.0f64;
    let mut worst_l = 0usize;
    for l in 2..=10usize {
        let mut index = HashMap::new();
        for_each_two_sided_plus(l, L_MAX, |s| {
            let key = LatticePath::new(s.to_vec()).step_string();
            let next = index.len();
            index.insert(key, next);
        })?;
        let m = index.len();
        let n = 100_000usize;
        let ids: Vec<usize> =
            crate::scaling::par_draws(n, VERIFY_SEED + l as u64, |_, rng| {
                let sampler = TwoSidedSampler::new(&pstar);
                let path = sampler.sample_path(l, rng).unwrap();
                *index
                    .get(&path.step_string())
                    .expect("sampled path outside Omega_L^+")
            });
        let mut observed = vec![0u64; m];
        for i in ids {
            observed[i] += 1;
        }
        let probs = vec![1.0 / m as f64; m];
        let p = chi_square_p(&observed, &probs, n as u64);
        if p < worst_p {
            worst_p = p;
            worst_l = l;
        }
    }
    Ok((
        worst_p > 0.01,
        format!("worst chi-square p = {worst_p:.4} (at L = {worst_l}) over L = 2..10, 1e5 draws each"),
    ))
}

// Criterion 5: importance sampler endpoint agreement and exact unit weights.
fn c5_importance_sampler() -> Result<(bool, String)> {
    let pstar = Arc::new(PStar::standard()?);
    let cache = Arc::new(StripCache::new(pstar.tilt));
    let sampler = UniformIsSampler::new(Arc::clone(&pstar), cache);

    let mut pass = true;
    let mut notes = Vec::new();
    let mut unit_weight_samples = 0usize;
    for l in [4usize, 8, 10] {
        // Oracle endpoint law of the reduced family.
        let mut counts: HashMap<(i64, i64), u64> = HashMap::new();
        let mut total = 0u64;
        for_each_prudent(l, true, L_MAX, |s| {
            *counts.entry(LatticePath::new(s.to_vec()).endpoint()).or_default() += 1;
            total += 1;
        })?;

        let n = 100_000usize;
        let draws: Vec<(f64, (i64, i64), bool)> =
            crate::scaling::par_draws(n, VERIFY_SEED + 100 + l as u64, |_, rng| {
                let w = sampler.sample(l, rng).unwrap();
                let clean = w.decomposition.records.iter().skip(1).all(|r| r.eps == 0)
                    && w.decomposition.tail_length == 0;
                (w.weight, w.path.endpoint(), clean)
            });
        let wsum: f64 = draws.iter().map(|d| d.0).sum();
        let w2sum: f64 = draws.iter().map(|d| d.0 * d.0).sum();
        let ess = wsum * wsum / w2sum;
        for (w, _, clean) in &draws {
            if *clean {
                if *w != 1.0 {
                    pass = false;
                    notes.push(format!("L={l}: clean configuration with weight {w}"));
                }
                unit_weight_samples += 1;
            }
        }
        for (&e, &cnt) in &counts {
            let p_exact = cnt as f64 / total as f64;
            let p_hat: f64 = draws
                .iter()
                .filter(|d| d.1 == e)
                .map(|d| d.0)
                .sum::<f64>()
                / wsum;
            let se = {
                let mut s = 0.0;
                for d in &draws {
                    let f = if d.1 == e { 1.0 } else { 0.0 };
                    s += (d.0 * (f - p_hat)).powi(2);
                }
                s.sqrt() / wsum
            };
            // Rare endpoints can go unhit, which degenerates the estimated
            // standard error to 0; floor it at the binomial error of the
            // effective sample size.
            let se = se.max((p_exact * (1.0 - p_exact) / ess).sqrt());
            if (p_hat - p_exact).abs() > 3.0 * se + 1e-9 {
                pass = false;
                notes.push(format!(
                    "L={l} endpoint {e:?}: {p_hat:.5} vs exact {p_exact:.5} (3se = {:.5})",
                    3.0 * se
                ));
            }
        }
    }
    if unit_weight_samples == 0 {
        pass = false;
        notes.push("no all-eps0 configurations observed".into());
    }
    let details = if notes.is_empty() {
        format!(
            "weighted endpoint laws match the reduced-family oracle within 3 sigma at \
             L = 4, 8, 10 (5e4 draws each); {unit_weight_samples} crossing-free samples \
             all carried weight exactly 1"
        )
    } else {
        notes.truncate(6);
        notes.join("; ")
    };
    Ok((pass, details))
}

// Criterion 6: strip-measure inequalities and reflection/folding maps.
fn c6_lemma_inequalities() -> Result<(bool, String)> {
    let tilt = TiltParams::pinned();
    let zbar = crate::effective::completion_mass(tilt.lambda_star, 512);
    let mut pass = true;
    let mut notes = Vec::new();

    // Lemma "crossing" bound, exact form L_R(t,1) <= 2 t L_R(t,0), even R.
    // R = 0 is exempt: the measure convention zeroes L_0(.,.,0).
    for r in [2i64, 4, 6, 8, 10] {
        let tables = strip_tables(r, 32, &tilt, &zbar)?;
        for t in 1..=30usize {
            let lhs = tables.l_sum(t, 1);
            let rhs = 2.0 * t as f64 * tables.l_sum(t, 0);
            if lhs > rhs * (1.0 + 1e-12) {
                pass = false;
                notes.push(format!("grandb2 fails at R={r}, t={t}: {lhs} > {rhs}"));
            }
        }
    }

    // Interior bound with the proof's explicit constant 4*9*e^{-2 log(3/2) + 2 lambda*}.
    let c_proof = 4.0 * 9.0 * (-2.0 * (1.5f64).ln() + 2.0 * tilt.lambda_star).exp();
    for r in 0..=10i64 {
        let tables = strip_tables(r, 34, &tilt, &zbar)?;
        for t in 1..=30usize {
            let lhs = tables.lhat_sum(t);
            let rhs = c_proof * r as f64 * (t * t) as f64 * tables.l_sum(t + 2, 0);
            if lhs > rhs + 1e-18 {
                pass = false;
                notes.push(format!("lemma-4.3 bound fails at R={r}, t={t}"));
            }
        }
    }

    // Reflection map, exhaustively for even R <= 6, t <= 14.
    let mut reflect_checked = 0usize;
    for r in [0i64, 2, 4, 6] {
        for t in 1..=14usize {
            // image (values, same_n) -> number of preimages
            let mut preimages: HashMap<(Vec<i64>, bool), usize> = HashMap::new();
            for_each_strip_walk(r, t, |values| {
                if *values.last().unwrap() != r {
                    return;
                }
                let n = values.len() - 1;
                let (img, case) = reflect_g(values, r).unwrap();
                let same_n = case == 1;
                // Membership in A^R: confined walk ending at 0 with the
                // right step count and consumed length.
                let n_img = img.len() - 1;
                let t_img: i64 = img.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<i64>()
                    + n_img as i64;
                assert_eq!(*img.last().unwrap(), 0);
                assert!(img.iter().all(|&v| (0..=r).contains(&v)));
                assert_eq!(t_img as usize, t);
                assert_eq!(n_img, if same_n { n } else { n + 2 });
                *preimages.entry((img, same_n)).or_default() += 1;
            })?;
            for ((img, same_n), count) in &preimages {
                // Case-2 images have n + 2 increments, so n = len - 3.
                let bound = if *same_n { 1 } else { img.len() - 3 };
                if *count > bound {
                    pass = false;
                    notes.push(format!("reflection multiplicity {count} > {bound} at R={r}, t={t}"));
                }
                reflect_checked += 1;
            }
        }
    }

    // Folding map, exhaustively for R <= 6, even interior x, t <= 12.
    let mut fold_checked = 0usize;
    for r in [3i64, 4, 5, 6] {
        for t in 1..=12usize {
            for x in (2..r).step_by(2) {
                let mut preimages: HashMap<Vec<i64>, usize> = HashMap::new();
                for_each_strip_walk(r, t, |values| {
                    if *values.last().unwrap() != x {
                        return;
                    }
                    let n = values.len() - 1;
                    let img = fold_h(values, r, x).unwrap();
                    let n_img = img.len() - 1;
                    let t_img: i64 = img.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<i64>()
                        + n_img as i64;
                    assert_eq!(*img.last().unwrap(), 0);
                    assert!(img.iter().all(|&v| (0..=r).contains(&v)));
                    assert_eq!(n_img, n + 2);
                    assert_eq!(t_img as usize, t + 2);
                    *preimages.entry(img).or_default() += 1;
                })?;
                for (img, count) in &preimages {
                    let n_src = img.len() - 3;
                    if *count > n_src * n_src {
                        pass = false;
                        notes.push(format!(
                            "folding multiplicity {count} > n^2 = {} at R={r}, x={x}, t={t}",
                            n_src * n_src
                        ));
                    }
                    fold_checked += 1;
                }
            }
        }
    }

    let details = if notes.is_empty() {
        format!(
            "grandb2 and the lemma-4.3 constant hold on R <= 10, t <= 30; \
             {reflect_checked} reflection images and {fold_checked} folding images land in \
             the asserted sets with admissible multiplicities"
        )
    } else {
        notes.truncate(6);
        notes.join("; ")
    };
    Ok((pass, details))
}

// Criterion 7: ballisticity at desk scale.
fn c7_ballisticity() -> Result<(bool, String)> {
    let pstar = PStar::standard()?;
    let c = constants::SPEED_C;

    let l = 10_000usize;
    let n = 10_000usize;
    let eps = 0.05;
    let stats: Vec<(f64, f64, bool)> =
        crate::scaling::par_draws(n, VERIFY_SEED + 700, |_, rng| {
            let sampler = TwoSidedSampler::new(&pstar);
            let excs = sampler.sample_excursions(l, rng).unwrap();
            let path = build_lattice_from_excursions(&excs).unwrap();
            let (x, y) = path.endpoint();
            let dev = diagonal_deviation(&path, c, &[1]);
            (x as f64 / l as f64, y as f64 / l as f64, dev <= eps)
        });
    let nf = n as f64;
    let mean_x: f64 = stats.iter().map(|s| s.0).sum::<f64>() / nf;
    let mean_y: f64 = stats.iter().map(|s| s.1).sum::<f64>() / nf;
    let sd_x = (stats.iter().map(|s| (s.0 - mean_x).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let sd_y = (stats.iter().map(|s| (s.1 - mean_y).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let freq = stats.iter().filter(|s| s.2).count() as f64 / nf;
    let x_ok = (mean_x - c).abs() <= 3.0 * sd_x / nf.sqrt();
    let y_ok = (mean_y - c).abs() <= 3.0 * sd_y / nf.sqrt();
    let conc_ok = freq >= 0.99;

    let cache = Arc::new(StripCache::new(pstar.tilt));
    let pstar_arc = Arc::new(PStar::standard()?);
    let sampler = UniformIsSampler::new(pstar_arc, cache);
    let law = PathLaw::uniform_is(&sampler);
    let is_rep = concentration_report(&law, 1000, 0.1, 20_000, VERIFY_SEED + 701)?;
    let is_ok = is_rep.freq >= 0.95;

    let pass = x_ok && y_ok && conc_ok && is_ok;
    // The third clause is a known miscalibration of the spec's finite-L
    // regression bar: the transverse fluctuation scale sqrt(S11 - S12) =
    // 1.61 makes eps sqrt(L) = 3.16 at (1e3, 0.1) only ~2 sigma, and even
    // the exact two-sided law measures freq ~ 0.92 there. See the
    // decisions ledger; the clause is evaluated as stated and reported
    // honestly.
    Ok((
        pass,
        format!(
            "endpoint={} ({mean_x:.6}, {mean_y:.6}) vs c = {c:.6} (3se = {:.6}); \
             two_sided_concentration={} ({freq:.4} >= 0.99 at (1e4, 0.05)); \
             uniform_is_concentration={} ({:.4} >= 0.95 at (1e3, 0.1), ess = {:.0})",
            if x_ok && y_ok { "pass" } else { "FAIL" },
            3.0 * sd_x / nf.sqrt(),
            if conc_ok { "pass" } else { "FAIL" },
            if is_ok { "pass" } else { "FAIL" },
            is_rep.freq,
            is_rep.ess
        ),
    ))
}

// Criterion 8: CLT covariance agreement.
fn c8_clt() -> Result<(bool, String)> {
    let pstar = PStar::standard()?;
    let moments = moments_from_series(&pstar);
    let sigma = covariance_b(&moments);
    let rep = clt_report(&pstar, 10_000, &[0.5, 1.0], 100_000, VERIFY_SEED + 800)?;

    let cov11 = rep.cov(1, 1);
    let frob = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                num += (a[i][j] - b[i][j]).powi(2);
                den += b[i][j].powi(2);
            }
        }
        (num / den).sqrt()
    };
    let rel11 = frob(cov11, sigma);
    let ok11 = rel11 <= 0.05;

    let cov05 = rep.cov(0, 1);
    let mut ok_cross = true;
    let mut worst_cross: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let want = 0.5 * sigma[i][j];
            let rel = ((cov05[i][j] - want) / want).abs();
            worst_cross = worst_cross.max(rel);
            if rel > 0.10 {
                ok_cross = false;
            }
        }
    }
    Ok((
        ok11 && ok_cross,
        format!(
            "Cov(1,1) Frobenius rel diff = {rel11:.4} (bar 0.05); \
             Cov(0.5,1) worst entry rel diff vs 0.5 Sigma = {worst_cross:.4} (bar 0.10); \
             Sigma = [[{:.4}, {:.4}], ..]",
            sigma[0][0], sigma[0][1]
        ),
    ))
}

// Criterion 9: quadrant frequencies under the uniform law.
fn c9_quadrants() -> Result<(bool, String)> {
    let pstar = Arc::new(PStar::standard()?);
    let cache = Arc::new(StripCache::new(pstar.tilt));
    let sampler = UniformIsSampler::new(Arc::clone(&pstar), cache);
    let law = PathLaw::uniform_is(&sampler);
    let rep = quadrant_distribution(&law, 1000, 20_000, VERIFY_SEED + 900)?;
    let mut pass = rep.freq[0] < 0.04;
    for q in 1..=4 {
        if !(0.23..=0.27).contains(&rep.freq[q]) {
            pass = false;
        }
    }
    Ok((
        pass,
        format!(
            "freq = [{:.4}, {:.4}, {:.4}, {:.4}] with axis mass {:.4}, ess = {:.0}",
            rep.freq[1], rep.freq[2], rep.freq[3], rep.freq[4], rep.freq[0], rep.ess
        ),
    ))
}

// Criterion 10: crossing-control statistics decay in L.
fn c10_crossing_statistics() -> Result<(bool, String)> {
    let pstar = Arc::new(PStar::standard()?);
    let cache = Arc::new(StripCache::new(pstar.tilt));
    let sampler = UniformIsSampler::new(Arc::clone(&pstar), cache);
    let n = 2000usize;
    let mut pass = true;
    let mut rows = Vec::new();
    let mut prev: Option<[(f64, f64); 3]> = None;
    for (i, l) in [256usize, 1024, 4096, 16384].into_iter().enumerate() {
        let rep = crossing_report(&sampler, l, 3.0, 5.0, 10.0, n, VERIFY_SEED + 1000 + i as u64)?;
        if rep.first_crossing != 1.0 {
            pass = false;
        }
        let ess = rep.ess.max(1.0);
        let with_se = |p: f64| (p, (p * (1.0 - p) / ess).sqrt());
        let cur = [
            with_se(rep.late_crossing),
            with_se(rep.heavy_head),
            with_se(rep.long_tail),
        ];
        if let Some(prev) = prev {
            for k in 0..3 {
                let slack = 2.0 * (prev[k].1 + cur[k].1);
                if cur[k].0 > prev[k].0 + slack {
                    pass = false;
                }
            }
        }
        rows.push(format!(
            "L={l}: late={:.4} head={:.4} tail={:.4}",
            cur[0].0, cur[1].0, cur[2].0
        ));
        prev = Some(cur);
    }
    Ok((pass, format!("eps_1 always 1; {}", rows.join("; "))))
}

// Criterion 11: byte-identical reports for a fixed seed.
fn c11_determinism() -> Result<(bool, String)> {
    let cfg = ReportConfig {
        l: 256,
        n_draws: 256,
        seed: VERIFY_SEED,
        ..ReportConfig::default()
    };
    let base = canonical_json(&build_report(&cfg)?);
    let again = canonical_json(&build_report(&cfg)?);
    // Worker count must not matter either: per-draw streams and ordered
    // reductions make the result a function of the seed alone.
    let pool2 = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap();
    let with2 = pool2.install(|| build_report(&cfg).map(|v| canonical_json(&v)))?;
    let pool5 = rayon::ThreadPoolBuilder::new()
        .num_threads(5)
        .build()
        .unwrap();
    let with5 = pool5.install(|| build_report(&cfg).map(|v| canonical_json(&v)))?;
    let pass = base == again && base == with2 && base == with5;
    Ok((
        pass,
        format!(
            "report bytes identical across repeats and worker counts ({} bytes)",
            base.len()
        ),
    ))
}
