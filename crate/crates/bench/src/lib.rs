//! Fixtures shared by the benchmarks.

use covoter::{
    DensityField, EntityKind, InitialCondition, Model1Params, Model2Params, Model3Params, OpinionLaw, Process,
    RngStream, Simulation, StepGraphon, YLaw,
};

pub fn model1_params() -> Model1Params {
    Model1Params { gamma_mp: 1.0, gamma_pm: 1.5, pi_plus: 0.9, pi_minus: 0.1, p0: 0.05 }
}

pub fn model2_params() -> Model2Params {
    Model2Params::linear(0.66, 0.9, 0.1, 0.05)
}

pub fn model3_params(q: u32) -> Model3Params {
    Model3Params { beta: 0.5, q, pi_plus_g: 0.9, pi_minus_g: 0.1, pi_plus_r: 0.1, pi_minus_r: 0.9, p0: 0.05 }
}

/// Fresh simulation with a Bernoulli(1/2) start and uniform `y`.
pub fn simulation(process: Process, n: usize, seed: u64) -> Simulation {
    Simulation::new(process, InitialCondition::new(n, OpinionLaw::Bernoulli(0.5), YLaw::Uniform), seed)
        .expect("valid fixture")
}

/// Smooth two-bump density with plus mass 1/2.
pub fn smooth_density(cells: usize) -> DensityField {
    DensityField::normalized(0.0, smooth(cells, 0.3), smooth(cells, 0.7)).expect("valid fixture")
}

fn smooth(cells: usize, centre: f64) -> Vec<f64> {
    (0..=cells)
        .map(|i| {
            let u = i as f64 / cells as f64;
            0.5 * (-(u - centre).powi(2) / 0.02).exp() + 0.05
        })
        .collect()
}

/// Random symmetric `k`-block difference of two graphons on equal blocks.
pub fn random_difference(k: usize, seed: u64) -> StepGraphon {
    let rng = RngStream::new(seed);
    let mut values = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let v = rng.uniform(EntityKind::Aux, 1, (i * k + j) as u64) - rng.uniform(EntityKind::Aux, 2, (i * k + j) as u64);
            values[i * k + j] = v;
            values[j * k + i] = v;
        }
    }
    let boundaries = (0..=k).map(|i| i as f64 / k as f64).collect();
    StepGraphon::signed(boundaries, values).expect("valid fixture")
}
