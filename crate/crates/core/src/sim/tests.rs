use std::sync::Arc;

use super::*;
use crate::graph::pair_count;
use crate::model::{EdgeKernel, LinearKernel, Model1Params, Model2Params, Model3Params, Opinion};
use crate::DensityField;

fn m2(pi_plus: f64, pi_minus: f64) -> Model2Params {
    Model2Params::linear(0.66, pi_plus, pi_minus, 0.05)
}

fn m3(q: u32) -> Model3Params {
    Model3Params { beta: 0.5, q, pi_plus_g: 0.9, pi_minus_g: 0.1, pi_plus_r: 0.1, pi_minus_r: 0.9, p0: 0.05 }
}

fn half(n: usize) -> InitialCondition {
    InitialCondition::new(n, OpinionLaw::Bernoulli(0.5), YLaw::Uniform)
}

#[test]
fn init_edge_extremes() {
    let mut p = m2(0.9, 0.1);
    p.p0 = 0.0;
    let s = Simulation::new(Process::model2(p), half(30), 1).unwrap();
    assert_eq!(s.graph().count(), 0);
    p.p0 = 1.0;
    let s = Simulation::new(Process::model2(p), half(30), 1).unwrap();
    assert_eq!(s.graph().count(), pair_count(30));
    assert!(s.degree_tables_consistent());
}

#[test]
fn init_edge_count_is_binomial() {
    let n = 1000;
    let s = Simulation::new(Process::model2(m2(0.9, 0.1)), half(n), 11).unwrap();
    let pairs = pair_count(n) as f64;
    let sd = (pairs * 0.05 * 0.95).sqrt();
    assert!((s.graph().count() as f64 - 0.05 * pairs).abs() < 3.0 * sd);
}

#[test]
fn initial_laws() {
    let s = Simulation::new(
        Process::model2(m2(0.9, 0.1)),
        InitialCondition::new(11, OpinionLaw::Balanced, YLaw::Constant(0.25)),
        3,
    )
    .unwrap();
    assert_eq!(s.n_plus(), 5);
    assert!(s.vertices().iter().all(|v| v.y0 == 0.25));
    assert!(Simulation::new(Process::model2(m2(0.9, 0.1)), half(1), 0).is_err());
}

#[test]
fn same_seed_same_snapshot() {
    let run = |seed| {
        let mut s = Simulation::new(Process::model3(m3(2)), half(40), seed).unwrap();
        s.run_until(2.0).unwrap();
        s.snapshot()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn observers_do_not_perturb_the_run() {
    let mut a = Simulation::new(Process::model2(m2(0.9, 0.1)), half(40), 9).unwrap();
    let mut b = a.clone();
    a.run_until(3.0).unwrap();
    let mut seen = 0;
    b.run(3.0, 0.1, |_| seen += 1).unwrap();
    assert_eq!(seen, 31);
    assert_eq!(a.snapshot(), b.snapshot());
}

/// Exact integral of `e^{-(t-s)}` over the `Plus` stretches of a vertex path.
fn replay_y(y0: f64, start: Opinion, flips: &[(f64, Opinion)], t: f64) -> f64 {
    let mut y = (-t).exp() * y0;
    let mut from = 0.0;
    let mut current = start;
    for &(ts, o) in flips.iter().chain(std::iter::once(&(t, start))) {
        if current.is_plus() {
            y += (-(t - ts)).exp() - (-(t - from)).exp();
        }
        from = ts;
        current = o;
    }
    y
}

#[test]
fn lazy_y_matches_replayed_path() {
    for process in [Process::model2(m2(0.9, 0.1)), Process::model1(Model1Params {
        gamma_pm: 1.5,
        gamma_mp: 1.0,
        pi_plus: 0.9,
        pi_minus: 0.1,
        p0: 0.3,
    })] {
        let mut s = Simulation::new(process, half(15), 21).unwrap().with_flip_log();
        let start: Vec<Opinion> = (0..15).map(|i| s.opinion(i)).collect();
        let y0: Vec<f64> = s.vertices().iter().map(|v| v.y0).collect();
        let mut checked = 0;
        s.run(6.0, 0.5, |sim| {
            let log = sim.flip_log().unwrap();
            for i in 0..15 {
                let path: Vec<(f64, Opinion)> =
                    log.iter().filter(|f| f.vertex == i).map(|f| (f.t, f.opinion)).collect();
                let oracle = replay_y(y0[i], start[i], &path, sim.t());
                assert!((sim.y(i) - oracle).abs() < 1e-9, "vertex {i} at {}", sim.t());
                checked += 1;
            }
        })
        .unwrap();
        assert_eq!(checked, 15 * 13);
        assert!(!s.flip_log().unwrap().is_empty());
    }
}

#[test]
fn type_stays_in_range() {
    let mut s = Simulation::new(Process::model2(m2(0.9, 0.1)), half(50), 2).unwrap();
    s.run(3.0, 0.25, |sim| {
        let snap = sim.snapshot();
        let hi = 1.0 - (-snap.t).exp();
        assert!(snap.types.iter().all(|&x| (0.0..=hi).contains(&x)));
        assert!(snap.y.iter().all(|&y| (0.0..=1.0).contains(&y)));
    })
    .unwrap();
}

#[test]
fn vertex_event_count_is_poisson() {
    for (process, rate) in [
        (Process::model2(m2(0.9, 0.1)), 0.66 * 200.0),
        (Process::model3(m3(2)), 0.5 * 200.0),
        (
            Process::Model1 {
                params: Model1Params { gamma_pm: 1.0, gamma_mp: 1.0, pi_plus: 0.5, pi_minus: 0.5, p0: 0.1 },
                vertex_only: true,
            },
            200.0,
        ),
    ] {
        let t = 5.0;
        let mut s = Simulation::new(process, half(200), 8).unwrap();
        s.run_until(t).unwrap();
        let mean = rate * t;
        assert!((s.vertex_events() as f64 - mean).abs() < 4.0 * mean.sqrt(), "{} vs {mean}", s.vertex_events());
    }
}

#[test]
fn model3_resulting_graph_tracks_layers() {
    let n = 25;
    let mut s = Simulation::new(Process::model3(m3(2)), half(n), 4).unwrap();
    for step in 0..20_000u64 {
        s.step().unwrap();
        for k in 0..10u64 {
            let r = crate::RngStream::new(step);
            let i = r.index(crate::EntityKind::Aux, 0, k, n);
            let j = (i + 1 + r.index(crate::EntityKind::Aux, 1, k, n - 1)) % n;
            let g = s.layers()[..2].iter().filter(|l| l.contains(i, j)).count();
            let rr = s.layers()[2..].iter().filter(|l| l.contains(i, j)).count();
            let expected = (g == 2 && rr == 0) || (rr == 2 && g == 0);
            assert_eq!(s.graph().contains(i, j), expected);
        }
    }
    assert!(s.degree_tables_consistent());
}

#[test]
fn model3_identical_colours_give_empty_graph() {
    let p = Model3Params { beta: 0.5, q: 1, pi_plus_g: 1.0, pi_minus_g: 1.0, pi_plus_r: 1.0, pi_minus_r: 1.0, p0: 1.0 };
    let mut s = Simulation::new(Process::model3(p), half(30), 4).unwrap();
    assert_eq!(s.graph().count(), 0);
    s.run_until(3.0).unwrap();
    assert!(s.layers().iter().all(|l| l.count() == pair_count(30)));
    assert_eq!(s.graph().count(), 0);
}

#[test]
fn nonlinear_with_exponent_one_is_linear() {
    let lin = m2(0.9, 0.1);
    let non = Model2Params { q_exp: 1.0, ..lin };
    let mut a = Simulation::new(Process::model2(lin), half(40), 13).unwrap().with_flip_log();
    let mut b = Simulation::new(Process::model2(non), half(40), 13).unwrap().with_flip_log();
    a.run_until(4.0).unwrap();
    b.run_until(4.0).unwrap();
    assert_eq!(a.flip_log(), b.flip_log());
    assert_eq!(a.snapshot(), b.snapshot());
    // a genuinely nonlinear exponent changes the run
    let mut c = Simulation::new(Process::model2(Model2Params { q_exp: 3.0, ..lin }), half(40), 13).unwrap();
    c.run_until(4.0).unwrap();
    assert_ne!(a.graph(), c.graph());
}

#[test]
fn degree_tables_stay_consistent() {
    let mut s = Simulation::new(Process::model2(m2(0.9, 0.1)), half(30), 17).unwrap();
    for _ in 0..50 {
        for _ in 0..100 {
            s.step().unwrap();
        }
        assert!(s.degree_tables_consistent());
    }
}

#[test]
fn identical_dynamics_have_zero_discrepancy() {
    let mut a = Simulation::new(Process::model2(m2(0.5, 0.5)), half(60), 3).unwrap();
    let mut b = a.clone();
    let trace = run_coupled(&mut a, &mut b, 3.0, 0.5).unwrap();
    assert!(trace.d_v.iter().all(|&d| d == 0));
    assert!(trace.d_e.iter().all(|&d| d == 0));
    assert_eq!(trace.times.len(), 7);
}

#[test]
fn coupling_needs_equal_rates() {
    let mut a = Simulation::new(Process::model2(m2(0.9, 0.1)), half(20), 3).unwrap();
    let mut b = Simulation::new(Process::model3(m3(1)), half(20), 3).unwrap();
    assert!(run_coupled(&mut a, &mut b, 1.0, 0.5).is_err());
}

fn linear_field(densities: Vec<DensityField>, p: &Model2Params) -> AlphaSource {
    let k = EdgeKernel::Linear(LinearKernel::from(p));
    AlphaSource::Field(Arc::new(AlphaField::new(densities, k).unwrap()))
}

#[test]
fn mimic_with_alpha_one_ends_all_plus() {
    let p = m2(0.9, 0.1);
    let mut a = DensityField::from_fn(0.0, 32, |_| 1.0, |_| 0.0).unwrap();
    let mut b = a.clone();
    a.t = 0.0;
    b.t = 40.0;
    let mut s = Simulation::new(
        Process::Mimic2 { params: p, alpha: linear_field(vec![a, b], &p) },
        InitialCondition::new(20, OpinionLaw::AllMinus, YLaw::Uniform),
        5,
    )
    .unwrap();
    s.run_until(40.0).unwrap();
    assert_eq!(s.n_plus(), 20);
}

#[test]
fn mimic_outside_coverage_is_rejected() {
    let p = m2(0.9, 0.1);
    let d = DensityField::uniform(16, 0.5).unwrap();
    let mut s = Simulation::new(Process::Mimic2 { params: p, alpha: linear_field(vec![d], &p) }, half(10), 5).unwrap();
    assert!(matches!(s.run_until(1.0), Err(crate::Error::Config(_))));
}

#[test]
fn mimic_with_equal_pis_flips_fair_coins() {
    let p = m2(0.6, 0.6);
    let slices: Vec<DensityField> = (0..=4)
        .map(|k| {
            let mut d = DensityField::uniform(32, 0.5).unwrap();
            d.t = k as f64;
            d
        })
        .collect();
    let n = 2000;
    let mut s = Simulation::new(
        Process::Mimic2 { params: p, alpha: linear_field(slices, &p) },
        InitialCondition::new(n, OpinionLaw::AllPlus, YLaw::Uniform),
        5,
    )
    .unwrap();
    s.run_until(4.0).unwrap();
    // each vertex has fired with probability 1 - e^{-beta T}; then it is a fair coin
    let fired = 1.0 - (-0.66f64 * 4.0).exp();
    let mean = 1.0 - 0.5 * fired;
    let sd = (mean * (1.0 - mean) / n as f64).sqrt();
    assert!((s.n_plus() as f64 / n as f64 - mean).abs() < 3.0 * sd);
}

#[test]
fn mimic3_starts_from_the_layered_graph() {
    let p = m3(2);
    let mut real = Simulation::new(Process::model3(p), half(40), 12).unwrap();
    let mut mimic = Simulation::new(Process::mimic3(p, AlphaSource::Constant(0.5)), half(40), 12).unwrap();
    assert_eq!(real.graph(), mimic.graph());
    assert!(mimic.layers().is_empty());
    let trace = run_coupled(&mut real, &mut mimic, 2.0, 1.0).unwrap();
    assert_eq!(trace.d_v[0], 0);
    assert_eq!(trace.d_e[0], 0);
    for k in 0..trace.times.len() {
        assert!(trace.d_v[k] <= 40 && trace.d_e[k] <= pair_count(40));
    }
}

#[test]
fn equal_pis_make_plus_count_a_martingale() {
    let n = 60;
    let diffs: Vec<f64> = (0..200u64)
        .map(|seed| {
            let mut s = Simulation::new(Process::model2(m2(0.6, 0.6)), half(n), 1000 + seed).unwrap();
            let start = s.n_plus() as f64;
            s.run_until(2.0).unwrap();
            (s.n_plus() as f64 - start) / n as f64
        })
        .collect();
    let m = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
    let se = (var / diffs.len() as f64).sqrt();
    assert!(m.abs() < 3.0 * se, "mean drift {m} with se {se}");
}

#[test]
fn model1_fraction_approaches_stationary_value() {
    let p = Model1Params { gamma_pm: 1.5, gamma_mp: 1.0, pi_plus: 0.9, pi_minus: 0.1, p0: 0.05 };
    let n = 3000;
    let mut s = Simulation::new(
        Process::Model1 { params: p, vertex_only: true },
        InitialCondition::new(n, OpinionLaw::AllPlus, YLaw::Uniform),
        1,
    )
    .unwrap();
    s.run_until(15.0).unwrap();
    let sd = (0.4 * 0.6 / n as f64).sqrt();
    assert!((s.n_plus() as f64 / n as f64 - 0.4).abs() < 3.0 * sd);
    assert_eq!(s.graph().count(), 0);
    assert_eq!(s.edge_events(), 0);
}

#[test]
fn zero_neighbour_rules() {
    let mut p = m2(0.0, 0.0);
    p.p0 = 0.0;
    // no edge can ever appear, so every vertex is isolated
    let mut keep = Simulation::new(Process::model2(p), InitialCondition::new(200, OpinionLaw::AllPlus, YLaw::Uniform), 3)
        .unwrap();
    keep.run_until(3.0).unwrap();
    assert_eq!(keep.n_plus(), 200);
    let mut coin = Simulation::new(
        Process::Model2 { params: p, zero_rule: ZeroNeighbourRule::FairCoin },
        InitialCondition::new(200, OpinionLaw::AllPlus, YLaw::Uniform),
        3,
    )
    .unwrap();
    coin.run_until(3.0).unwrap();
    assert!(coin.n_plus() < 170);
}
