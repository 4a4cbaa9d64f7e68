use prudent_walk::effective::PStar;
use prudent_walk::scaling::{concentration_report, PathLaw};

fn main() {
    let pstar = PStar::standard().unwrap();
    let law = PathLaw::two_sided(&pstar);
    for (l, eps) in [(1000usize, 0.1f64), (4000, 0.1), (10_000, 0.05), (10_000, 0.1)] {
        let rep = concentration_report(&law, l, eps, 4000, 77).unwrap();
        println!("two-sided L={l} eps={eps}: freq = {:.4}", rep.freq);
    }
}
