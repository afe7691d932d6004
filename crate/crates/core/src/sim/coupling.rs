use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Simulation;
use crate::error::{contract, Error, Result};

/// Discrepancies between a process and its mimicking counterpart over time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingTrace {
    pub n: usize,
    pub times: Vec<f64>,
    /// Vertices whose opinions differ.
    pub d_v: Vec<usize>,
    /// Pairs active in exactly one of the two graphs.
    pub d_e: Vec<usize>,
    /// Smallest degree over both graphs.
    pub min_degree: Vec<u32>,
}

impl CouplingTrace {
    fn record(&mut self, a: &Simulation, b: &Simulation) {
        self.times.push(a.t());
        self.d_v.push((0..a.n()).filter(|&i| a.opinion(i) != b.opinion(i)).count());
        self.d_e.push(a.graph().symmetric_difference(b.graph()));
        self.min_degree.push(a.min_degree().min(b.min_degree()));
    }

    /// Writes `t,d_v,d_e,min_degree` rows.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,d_v,d_e,min_degree")?;
        for k in 0..self.times.len() {
            writeln!(w, "{},{},{},{}", self.times[k], self.d_v[k], self.d_e[k], self.min_degree[k])?;
        }
        Ok(())
    }
}

/// Runs two simulations on shared clocks and records their discrepancies.
///
/// Both must use the same seed and have identical total event rates, which
/// holds for a model-2 or model-3 process and its mimicking counterpart. Each
/// event then selects the same entity with the same decision uniform on both
/// sides.
pub fn run_coupled(real: &mut Simulation, mimic: &mut Simulation, until: f64, sample_dt: f64) -> Result<CouplingTrace> {
    if !(sample_dt > 0.0) {
        return Err(contract(format!("sample_dt = {sample_dt} must be positive")));
    }
    if real.n() != mimic.n() {
        return Err(contract("coupled processes need the same vertex count"));
    }
    if real.seed() != mimic.seed() || real.t() != mimic.t() {
        return Err(contract("coupled processes need the same seed and start time"));
    }
    if real.rates() != mimic.rates() {
        return Err(Error::Config(format!(
            "coupled processes have different event rates {:?} and {:?}",
            real.rates(),
            mimic.rates()
        )));
    }
    let mut trace = CouplingTrace { n: real.n(), ..Default::default() };
    trace.record(real, mimic);
    let start = real.t();
    let mut k = 1u64;
    loop {
        let next = (start + k as f64 * sample_dt).min(until);
        real.run_until(next)?;
        mimic.run_until(next)?;
        trace.record(real, mimic);
        if next >= until {
            return Ok(trace);
        }
        k += 1;
    }
}
