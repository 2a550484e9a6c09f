use ckn_stability::experiments::*;
use ckn_stability::params::{derive_first_order, derive_second_order};
use std::time::Instant;

fn main() {
    let p45 = derive_first_order(4, 2.0, 0.5, 0.5).unwrap();
    let p42 = derive_first_order(4, 2.0, 1.0, 2.0).unwrap();
    let p93 = derive_first_order(9, 3.0, 1.25, 1.0).unwrap();
    let q2 = derive_second_order(4, 2.0, -2.5, -2.5).unwrap();
    let opts = VerifyOpts::default();
    let opts2 = VerifyOpts {
        corpus: CorpusSpec { n_perturbed: 30, n_outsiders: 6, n_sampled: 0, n_exact: 2, ..CorpusSpec::default() },
        ..VerifyOpts::default()
    };
    let runs: Vec<(&str, Box<dyn Fn() -> ckn_stability::error::Result<StabilityReport>>)> = vec![
        ("T1_3@45", Box::new(|| verify_weak_stability(&p45, Theorem::T1_3, &opts))),
        ("T1_3@93", Box::new(|| verify_weak_stability(&p93, Theorem::T1_3, &opts))),
        ("T1_4@42", Box::new(|| verify_weak_stability(&p42, Theorem::T1_4, &opts))),
        ("T1_7@45", Box::new(|| verify_strong_stability(&p45, Theorem::T1_7, &opts))),
        ("T1_8@93", Box::new(|| verify_strong_stability(&p93, Theorem::T1_8, &opts))),
        ("T1_9@45", Box::new(|| verify_strong_stability(&p45, Theorem::T1_9, &opts))),
        ("T1_10", Box::new(|| verify_second_order(&q2, Theorem::T1_10, &opts2))),
        ("T1_11", Box::new(|| verify_second_order(&q2, Theorem::T1_11, &opts2))),
    ];
    for (name, f) in runs {
        let t = Instant::now();
        match f() {
            Ok(r) => println!(
                "{name}: {:.1}s violations={} mesh={:?} c_min={:.3e} c_max={:.3e} fails={}",
                t.elapsed().as_secs_f64(), r.violations, r.mesh_stability,
                r.empirical_c_min, r.empirical_c_max,
                r.rows.iter().filter(|x| x.note.is_some()).count()
            ),
            Err(e) => println!("{name}: ERROR {e} after {:.1}s", t.elapsed().as_secs_f64()),
        }
    }
}
