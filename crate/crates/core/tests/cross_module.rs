use num_complex::Complex64;

use multcrit_core::boettcher;
use multcrit_core::coding;
use multcrit_core::critfind::{find_global, find_outside_with, OutsideOptions, Rect, Sector};
use multcrit_core::itinerary::cyclic_classes;
use multcrit_core::orbits;
use multcrit_core::seqb;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[test]
fn coded_cycles_are_the_polynomial_cycles() {
    let lambda = Complex64::new(0.9, 1.1);
    for n in [5, 6] {
        let c = boettcher::c_of_lambda(lambda).unwrap().c;
        let records = orbits::exact_orbits(c, n).unwrap();
        let classes = cyclic_classes(n).unwrap();
        assert_eq!(records.len(), classes.len());
        for (w, _) in classes {
            let o = coding::psi_periodic(lambda, w).unwrap();
            let hit = records.iter().find(|r| o.points.iter().all(|z| r.points.iter().any(|p| (p - z).norm() < 1e-8)));
            let r = hit.unwrap_or_else(|| panic!("cycle of {w} not among the roots"));
            assert!((r.rho - o.rho).norm() < 1e-8 * o.rho.norm());
            assert!((r.sigma.unwrap() - o.sigma).norm() < 1e-7 * o.sigma.norm());
        }
    }
}

#[test]
fn global_and_coded_routes_agree_for_period_three() {
    let global = find_global(3, ZERO, Rect::new(-3.0, 2.0, -2.0, 2.0).unwrap()).unwrap();
    let outside: Vec<_> = global.points.iter().filter(|p| boettcher::green_m(p.c) > 0.0).collect();
    let mut opts = OutsideOptions::default();
    opts.coded.margin = 5e-5;
    let coded = find_outside_with(3, ZERO, Sector::half_annulus(5e-5, 2.0), &opts).unwrap();
    // Each outside c has two preimages lambda; the half annulus keeps one.
    assert_eq!(coded.points.len(), outside.len());
    for p in &coded.points {
        assert!(outside.iter().any(|q| (q.c - p.c).norm() < 1e-8), "{}", p.c);
        let ep = boettcher::c_of_lambda_with(p.lambda.unwrap(), 5e-5).unwrap();
        assert!((ep.c - p.c).norm() < 1e-9);
    }
}

#[test]
fn sequence_from_a_global_point() {
    let global = find_global(3, ZERO, Rect::new(-3.0, 2.0, 0.0, 2.0).unwrap()).unwrap();
    let p = global.points.iter().find(|p| boettcher::green_m(p.c) > 0.0).expect("outside point in the upper half");
    let mut opts = OutsideOptions::default();
    opts.coded.margin = 5e-5;
    let coded = find_outside_with(3, ZERO, Sector::half_annulus(5e-5, 2.0), &opts).unwrap();
    let q = coded.points.iter().find(|q| (q.c - p.c).norm() < 1e-8).unwrap();
    let seq = seqb::track_sequence(q.word.unwrap(), q.lambda.unwrap(), 14, ZERO).unwrap();
    assert!(seq.failures.is_empty());
    let d: Vec<f64> = seq.rows.iter().map(|r| r.distance).collect();
    assert!(d[d.len() - 1] < d[1]);
}
