//! Scratch diagnostic for the importance-weight distribution (dev aid).

use std::sync::Arc;

use prudent_walk::effective::PStar;
use prudent_walk::sample::{stream_rng, StripCache, UniformIsSampler};

fn main() {
    let pstar = Arc::new(PStar::standard().unwrap());
    let cache = Arc::new(StripCache::new(pstar.tilt));
    let sampler = UniformIsSampler::new(Arc::clone(&pstar), cache);

    let l = 1000;
    let n = 4000;
    let mut weights = Vec::new();
    let mut max_w = 0.0f64;
    let mut max_info = String::new();
    for i in 0..n {
        let mut rng = stream_rng(99, i);
        let w = sampler.sample(l, &mut rng).unwrap();
        if w.weight > max_w {
            max_w = w.weight;
            let crossings: Vec<(usize, usize, usize, i64)> = w
                .decomposition
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.eps == 1)
                .map(|(i, r)| (i + 1, r.t, r.n, w.decomposition.slab_before(i + 1)))
                .collect();
            max_info = format!(
                "w={:.3e} gamma={} tail={} crossings(idx,t,n,R)={:?}",
                w.weight, w.decomposition.gamma, w.decomposition.tail_length, crossings
            );
        }
        weights.push(w.weight);
    }
    weights.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| weights[((n as f64 - 1.0) * p) as usize];
    let wsum: f64 = weights.iter().sum();
    let w2: f64 = weights.iter().map(|w| w * w).sum();
    println!("quantiles: 1%={:.3e} 50%={:.3e} 90%={:.3e} 99%={:.3e} max={:.3e}", q(0.01), q(0.5), q(0.9), q(0.99), q(1.0));
    println!("mean={:.4e} ess={:.1} frac(w==1)={:.3}", wsum / n as f64, wsum * wsum / w2, weights.iter().filter(|&&w| w == 1.0).count() as f64 / n as f64);
    println!("max sample: {max_info}");

    // Exact small-L bias check: weighted P(gamma = k) vs oracle at L = 8.
    let l = 8usize;
    let mut oracle = std::collections::HashMap::new();
    let mut total = 0u64;
    prudent_walk::enumerate::for_each_prudent(l, true, 14, |s| {
        let p = prudent_walk::lattice::LatticePath::new(s.to_vec());
        let d = prudent_walk::lattice::decompose_general(&p).unwrap();
        *oracle.entry((d.gamma, d.tail_length)).or_insert(0u64) += 1;
        total += 1;
    })
    .unwrap();
    let n = 200_000u64;
    let mut est = std::collections::HashMap::new();
    let mut wsum = 0.0;
    for i in 0..n {
        let mut rng = stream_rng(7, i);
        let w = sampler.sample(l, &mut rng).unwrap();
        *est.entry((w.decomposition.gamma, w.decomposition.tail_length))
            .or_insert(0.0f64) += w.weight;
        wsum += w.weight;
    }
    let mut keys: Vec<_> = oracle.keys().copied().collect();
    keys.sort();
    for k in keys {
        let exact = oracle[&k] as f64 / total as f64;
        let got = est.get(&k).copied().unwrap_or(0.0) / wsum;
        println!(
            "gamma={}, tail={}: exact {:.5} est {:.5} rel {:+.2}%",
            k.0,
            k.1,
            exact,
            got,
            100.0 * (got - exact) / exact
        );
    }
}
