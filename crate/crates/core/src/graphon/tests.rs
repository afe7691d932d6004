use proptest::prelude::*;

use super::*;
use crate::graph::EdgeSet;
use crate::model::{LinearKernel, Model1Params, Opinion, RngStream, EntityKind};
use crate::pde::{solve_model1, PdeConfig};

fn snap(n: usize, graph: EdgeSet, opinions: Vec<Opinion>, y: Vec<f64>) -> Snapshot {
    Snapshot::new(1.0, opinions, y, vec![0.0; n], graph, Vec::new())
}

fn random_graphon(k: usize, seed: u64, signed: bool) -> StepGraphon {
    let r = RngStream::new(seed);
    // random widths
    let mut cuts: Vec<f64> = (1..k).map(|i| r.uniform(EntityKind::Aux, 0, i as u64)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut b = vec![0.0];
    b.extend(cuts);
    b.push(1.0);
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let u = r.uniform(EntityKind::Aux, 1, (i * k + j) as u64);
            let x = if signed { 2.0 * u - 1.0 } else { u };
            v[i * k + j] = x;
            v[j * k + i] = x;
        }
    }
    StepGraphon::signed(b, v).unwrap()
}

/// `max_{S,T} |sum_{S×T} w_i w_j g_ij|` over every pair of block unions.
fn brute_cut(g: &StepGraphon) -> f64 {
    let k = g.blocks();
    let mut best: f64 = 0.0;
    for s in 0u32..1 << k {
        for t in 0u32..1 << k {
            let mut acc = 0.0;
            for i in 0..k {
                if s >> i & 1 == 0 {
                    continue;
                }
                for j in 0..k {
                    if t >> j & 1 == 1 {
                        acc += g.width(i) * g.width(j) * g.value(i, j);
                    }
                }
            }
            best = best.max(acc.abs());
        }
    }
    best
}

#[test]
fn snapshot_graphons() {
    let o = vec![Opinion::Plus; 4];
    let y = vec![0.1, 0.2, 0.3, 0.4];
    let empty = from_snapshot(&snap(4, EdgeSet::empty(4), o.clone(), y.clone()));
    assert!(empty.values().iter().all(|&v| v == 0.0));
    let full = from_snapshot(&snap(4, EdgeSet::complete(4), o, y));
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(full.value(i, j), if i == j { 0.0 } else { 1.0 });
        }
    }
}

#[test]
fn hand_checked_relabelled_graphon() {
    // vertex 2 has the smallest type, so it moves to rank 0: edge {1, 2}
    // (zero-based) becomes the relabelled pair {0, 1}
    let mut g = EdgeSet::empty(3);
    g.set(1, 2, true);
    let s = snap(3, g, vec![Opinion::Plus, Opinion::Plus, Opinion::Plus], vec![0.9, 0.5, 0.1]);
    assert_eq!(s.permutation, vec![2, 1, 0]);
    let w = from_snapshot(&s);
    assert_eq!(w.values(), &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn reference_with_equal_pis_is_constant() {
    let k = EdgeKernel::Linear(LinearKernel { p0: 0.05, pi_plus: 0.3, pi_minus: 0.3 });
    let d = DensityField::from_fn(0.0, 64, |u| 1.0 + u, |u| 2.0 - u).unwrap();
    let g = reference(40.0, &d, &k, 16).unwrap();
    assert!(g.values().iter().all(|&v| (v - 0.3).abs() < 1e-12));
}

#[test]
fn reference_is_monotone_and_reproduces_kernel() {
    let lin = LinearKernel { p0: 0.05, pi_plus: 0.9, pi_minus: 0.1 };
    let k = EdgeKernel::Linear(lin);
    let d = DensityField::from_fn(0.0, 128, |u| 0.5 + u, |u| 1.0 - 0.5 * u).unwrap();
    let g = reference(2.0, &d, &k, 24).unwrap();
    // along x the rank runs through + (increasing y) then - (increasing y)
    let plus_blocks = (0..24).filter(|&a| (a as f64 + 0.5) / 24.0 <= d.plus_mass()).count();
    for b in 0..24 {
        for a in 1..plus_blocks {
            assert!(g.value(a, b) >= g.value(a - 1, b));
        }
    }
    // pure + branch, uniform: the quantile is the identity
    let plus = DensityField::uniform(128, 1.0).unwrap();
    let t = 1.3;
    let g = reference(t, &plus, &k, 10).unwrap();
    for a in 0..10 {
        for b in 0..10 {
            let (x, y) = ((a as f64 + 0.5) / 10.0, (b as f64 + 0.5) / 10.0);
            assert!((g.value(a, b) - lin.eval(t, x, y)).abs() < 1e-12);
        }
    }
}

#[test]
fn model1_reference_has_dark_plus_corner() {
    let p = Model1Params { gamma_pm: 1.5, gamma_mp: 1.0, pi_plus: 0.9, pi_minus: 0.1, p0: 0.05 };
    // y0 = 0 so that y is the type
    let init = DensityField::point_mass_at_zero(128, 0.5).unwrap();
    let traj = solve_model1(&init, &p, &PdeConfig::new(128, 1.5, 1.5)).unwrap();
    let g = reference(1.5, traj.last(), &EdgeKernel::Linear(LinearKernel::from(&p)), 20).unwrap();
    // + ranks first: compare the +/+ corner with the -/- corner
    let split = (traj.last().plus_mass() * 20.0).floor() as usize;
    let mean = |r: std::ops::Range<usize>| {
        let n = (r.len() * r.len()) as f64;
        r.clone().flat_map(|a| r.clone().map(move |b| (a, b))).map(|(a, b)| g.value(a, b)).sum::<f64>() / n
    };
    let (pp, mm) = (mean(0..split), mean(split + 1..20));
    assert!(pp > mm + 0.15, "{pp} {mm}");
}

#[test]
fn l1_basics() {
    let a = random_graphon(5, 1, false);
    assert_eq!(l1_distance(&a, &a), 0.0);
    let (p, q) = (StepGraphon::constant(0.7).unwrap(), StepGraphon::constant(0.2).unwrap());
    assert!((l1_distance(&p, &q) - 0.5).abs() < 1e-15);
}

#[test]
fn l1_matches_monte_carlo() {
    let a = random_graphon(4, 2, false);
    let b = random_graphon(4, 3, false);
    let r = RngStream::new(99);
    let n = 1_000_000u64;
    let (mut s, mut s2) = (0.0, 0.0);
    for k in 0..n {
        let x = r.uniform(EntityKind::Aux, 10, k);
        let y = r.uniform(EntityKind::Aux, 11, k);
        let d = (a.eval(x, y) - b.eval(x, y)).abs();
        s += d;
        s2 += d * d;
    }
    let mean = s / n as f64;
    let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((l1_distance(&a, &b) - mean).abs() < 3.0 * sd);
}

#[test]
fn l1_metric_properties() {
    for seed in 0..20 {
        let (a, b, c) = (random_graphon(3, seed, false), random_graphon(5, seed + 100, false), random_graphon(4, seed + 200, false));
        assert!((l1_distance(&a, &b) - l1_distance(&b, &a)).abs() < 1e-15);
        assert!(l1_distance(&a, &c) <= l1_distance(&a, &b) + l1_distance(&b, &c) + 1e-14);
    }
}

#[test]
fn cut_norm_examples() {
    let c = StepGraphon::constant(0.35).unwrap();
    assert!((cut_norm_exact(&c).unwrap() - 0.35).abs() < 1e-15);
    assert!((cut_norm_lower_bound(&c, 0, &RngStream::new(0)) - 0.35).abs() < 1e-15);
    let a = random_graphon(7, 5, false);
    assert_eq!(cut_norm_exact(&a.difference(&a)).unwrap(), 0.0);
    let big = StepGraphon::uniform(vec![0.0; 23 * 23], 23).unwrap();
    assert_eq!(cut_norm_exact(&big), Err(crate::Error::Budget { blocks: 23, max: 22 }));
}

#[test]
fn cut_norm_exact_matches_double_enumeration() {
    for seed in 0..100 {
        let g = random_graphon(8, 1000 + seed, true);
        let exact = cut_norm_exact(&g).unwrap();
        assert!((exact - brute_cut(&g)).abs() < 1e-12, "seed {seed}");
        assert!(cut_norm_lower_bound(&g, 8, &RngStream::new(seed)) <= exact + 1e-15);
    }
}

#[test]
fn cut_norm_lower_bound_calibration() {
    let hits = (0..100u64)
        .filter(|&seed| {
            let g = random_graphon(12, 5000 + seed, true);
            let exact = cut_norm_exact(&g).unwrap();
            (cut_norm_lower_bound(&g, 32, &RngStream::new(seed)) - exact).abs() < 1e-12
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn cut_norm_below_l1() {
    for seed in 0..30 {
        let a = random_graphon(4, seed, false);
        let b = random_graphon(6, seed + 50, false);
        let d = a.difference(&b);
        assert!(cut_norm_exact(&d).unwrap() <= l1_distance(&a, &b) + 1e-14);
    }
}

#[test]
fn csv_round_trip_and_pgm_header() {
    let g = random_graphon(5, 8, false);
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    assert_eq!(StepGraphon::read_csv(&buf[..]).unwrap(), g);
    let mut pgm = Vec::new();
    g.write_pgm(30, &mut pgm).unwrap();
    assert!(pgm.starts_with(b"P5\n30 30\n255\n"));
    assert_eq!(pgm.len(), b"P5\n30 30\n255\n".len() + 900);
    let ones = StepGraphon::constant(1.0).unwrap();
    let mut pgm = Vec::new();
    ones.write_pgm(2, &mut pgm).unwrap();
    assert!(pgm.ends_with(&[0, 0, 0, 0]));
}

#[test]
fn invalid_graphons_are_rejected() {
    assert!(StepGraphon::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.2, 0.3, 0.0]).is_err());
    assert!(StepGraphon::new(vec![0.0, 1.0], vec![1.5]).is_err());
    assert!(StepGraphon::new(vec![0.0, 0.6, 0.5, 1.0], vec![0.0; 9]).is_err());
}

/// Alpha two ways: directly from the densities, and by integrating the
/// reference graphon over the `+` ranks at the rank of `(+, u)`.
#[test]
fn alpha_from_reference_graphon() {
    let lin = LinearKernel { p0: 0.05, pi_plus: 0.9, pi_minus: 0.1 };
    let kernel = EdgeKernel::Linear(lin);
    let d = DensityField::from_fn(0.0, 512, |u| 0.4 + u, |u| 1.2 - 0.8 * u).unwrap();
    let t = 2.0;
    let k = 4000;
    let g = reference(t, &d, &kernel, k).unwrap();
    let q = d.quantile_map();
    for u in [0.1, 0.5, 0.9] {
        let x = q.rank(true, u);
        let col = g.block_of(x);
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..k {
            let v = g.value(a, col) / k as f64;
            den += v;
            if (a as f64 + 0.5) / k as f64 <= q.plus_mass() {
                num += v;
            }
        }
        let direct = kernel.alpha(t, u, &d).unwrap();
        assert!((num / den - direct).abs() < 2e-3, "u={u}: {} vs {direct}", num / den);
    }
}

proptest! {
    #[test]
    fn cut_norm_is_symmetric_under_negation(seed in 0u64..1000) {
        let g = random_graphon(6, seed, true);
        let neg = StepGraphon::signed(g.boundaries().to_vec(), g.values().iter().map(|v| -v).collect()).unwrap();
        prop_assert!((cut_norm_exact(&g).unwrap() - cut_norm_exact(&neg).unwrap()).abs() < 1e-15);
    }
}
