//! Grid densities of the generalised type `(opinion, y)` and the functionals
//! built on them: the quantile map and the opinion-update probability alpha.

use serde::{Deserialize, Serialize};

use super::kernel::{EdgeKernel, LinearKernel};
use super::Model3Params;
use crate::error::{contract, Error, Result};

/// Mass tolerance accepted by [`DensityField::new`].
pub const MASS_TOL: f64 = 1e-6;
/// Pointwise negativity accepted by [`DensityField::new`].
pub const NEGATIVITY_TOL: f64 = 1e-9;
/// Alpha denominators below this are reported as degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Pair of densities `(f_+, f_-)` on `M + 1` equispaced nodes of `[0, 1]`.
///
/// Integrals use the trapezoid rule, so the node values describe a
/// piecewise-linear density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub t: f64,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
}

impl DensityField {
    /// Validates shape, sign and total mass.
    pub fn new(t: f64, f_plus: Vec<f64>, f_minus: Vec<f64>) -> Result<Self> {
        let field = Self::unchecked(t, f_plus, f_minus)?;
        let mass = field.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(contract(format!("density mass {mass} differs from 1")));
        }
        Ok(field)
    }

    /// Same checks as [`DensityField::new`] but rescales to unit mass instead
    /// of rejecting.
    pub fn normalized(t: f64, f_plus: Vec<f64>, f_minus: Vec<f64>) -> Result<Self> {
        let mut field = Self::unchecked(t, f_plus, f_minus)?;
        let mass = field.mass();
        if !(mass > 0.0) {
            return Err(contract("density has no mass"));
        }
        for v in field.f_plus.iter_mut().chain(field.f_minus.iter_mut()) {
            *v /= mass;
        }
        Ok(field)
    }

    fn unchecked(t: f64, f_plus: Vec<f64>, f_minus: Vec<f64>) -> Result<Self> {
        if f_plus.len() != f_minus.len() || f_plus.len() < 2 {
            return Err(contract(format!(
                "density branches need equal length >= 2 (got {} and {})",
                f_plus.len(),
                f_minus.len()
            )));
        }
        if let Some(bad) = f_plus.iter().chain(&f_minus).find(|v| !v.is_finite() || **v < -NEGATIVITY_TOL) {
            return Err(contract(format!("density value {bad} is negative or not finite")));
        }
        Ok(Self { t, f_plus, f_minus })
    }

    /// Samples two functions on the grid and normalises the result.
    pub fn from_fn(t: f64, cells: usize, f_plus: impl Fn(f64) -> f64, f_minus: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = grid(cells);
        Self::normalized(t, nodes.iter().map(|&u| f_plus(u)).collect(), nodes.iter().map(|&u| f_minus(u)).collect())
    }

    /// `y` uniform on `[0, 1]`, opinion `Plus` with probability `p_plus`.
    pub fn uniform(cells: usize, p_plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(contract(format!("p_plus = {p_plus} is not a probability")));
        }
        Self::new(0.0, vec![p_plus; cells + 1], vec![1.0 - p_plus; cells + 1])
    }

    /// All mass at `y = 0`, stored in the first node.
    pub fn point_mass_at_zero(cells: usize, p_plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(contract(format!("p_plus = {p_plus} is not a probability")));
        }
        let h = 1.0 / cells as f64;
        let mut f_plus = vec![0.0; cells + 1];
        let mut f_minus = vec![0.0; cells + 1];
        f_plus[0] = 2.0 * p_plus / h;
        f_minus[0] = 2.0 * (1.0 - p_plus) / h;
        Self::new(0.0, f_plus, f_minus)
    }

    /// Number of grid cells `M`.
    pub fn cells(&self) -> usize {
        self.f_plus.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.cells() as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        grid(self.cells())
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.h();
        if i == 0 || i == self.cells() {
            0.5 * h
        } else {
            h
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.h())
    }

    pub fn plus_mass(&self) -> f64 {
        self.integrate(&self.f_plus)
    }

    pub fn minus_mass(&self) -> f64 {
        self.integrate(&self.f_minus)
    }

    pub fn mass(&self) -> f64 {
        self.plus_mass() + self.minus_mass()
    }

    /// Discrete L1 distance (trapezoid weights) summed over both branches.
    pub fn l1_distance(&self, other: &DensityField) -> Result<f64> {
        if self.cells() != other.cells() {
            return Err(contract("density grids differ"));
        }
        Ok((0..=self.cells())
            .map(|i| {
                self.weight(i)
                    * ((self.f_plus[i] - other.f_plus[i]).abs() + (self.f_minus[i] - other.f_minus[i]).abs())
            })
            .sum())
    }

    pub fn min_value(&self) -> f64 {
        self.f_plus.iter().chain(&self.f_minus).copied().fold(f64::INFINITY, f64::min)
    }

    /// Precomputes the cumulative distributions for repeated quantile queries.
    pub fn quantile_map(&self) -> QuantileMap {
        QuantileMap {
            cells: self.cells(),
            cdf_plus: cumulative(&self.f_plus, self.h()),
            cdf_minus: cumulative(&self.f_minus, self.h()),
        }
    }
}

fn grid(cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| i as f64 / cells as f64).collect()
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Generalised inverse of the lexicographic `(opinion, y)` distribution.
#[derive(Debug, Clone)]
pub struct QuantileMap {
    cells: usize,
    cdf_plus: Vec<f64>,
    cdf_minus: Vec<f64>,
}

impl QuantileMap {
    pub fn plus_mass(&self) -> f64 {
        *self.cdf_plus.last().unwrap()
    }

    /// `inf { s : C(s) >= target }` for the piecewise-linear cumulative `cdf`.
    fn invert(&self, cdf: &[f64], target: f64) -> f64 {
        let h = 1.0 / self.cells as f64;
        let i = cdf.partition_point(|&c| c < target);
        if i == 0 {
            0.0
        } else if i > self.cells {
            1.0
        } else {
            let (lo, hi) = (cdf[i - 1], cdf[i]);
            ((i - 1) as f64 + (target - lo) / (hi - lo)) * h
        }
    }

    /// Position in `[0, 1]` of the vertex at lexicographic rank `y`.
    pub fn eval(&self, y: f64) -> f64 {
        let plus = self.plus_mass();
        if y <= plus {
            self.invert(&self.cdf_plus, y)
        } else {
            self.invert(&self.cdf_minus, y - plus)
        }
    }

    /// Lexicographic rank of `(opinion, u)`: the forward map inverted by
    /// [`QuantileMap::eval`].
    pub fn rank(&self, plus: bool, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let pos = u * self.cells as f64;
        let i = (pos.floor() as usize).min(self.cells - 1);
        let frac = pos - i as f64;
        let cdf = if plus { &self.cdf_plus } else { &self.cdf_minus };
        let c = cdf[i] + frac * (cdf[i + 1] - cdf[i]);
        if plus {
            c
        } else {
            self.plus_mass() + c
        }
    }
}

/// Generalised inverse `F̄(t; y)` of the type distribution.
pub fn quantile(densities: &DensityField, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(contract(format!("quantile level {y} outside [0, 1]")));
    }
    Ok(densities.quantile_map().eval(y))
}

impl EdgeKernel {
    /// Probability that a vertex at `y = u` adopts `Plus` when it copies a
    /// neighbour drawn from the limiting graph, by trapezoid quadrature.
    pub fn alpha(&self, t: f64, u: f64, densities: &DensityField) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..=densities.cells() {
            let w = densities.weight(i) * self.eval(t, densities.node(i), u);
            num += w * densities.f_plus[i];
            den += w * (densities.f_plus[i] + densities.f_minus[i]);
        }
        if den < DEGENERATE_DENOMINATOR {
            return Err(Error::DegenerateKernel { u, denominator: den });
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

/// Opinion-update probability for the linear models.
pub fn alpha(t: f64, u: f64, densities: &DensityField, kernel: &LinearKernel) -> Result<f64> {
    EdgeKernel::Linear(*kernel).alpha(t, u, densities)
}

/// Opinion-update probability for the layered model.
pub fn alpha_tilde(t: f64, u: f64, densities: &DensityField, params: &Model3Params) -> Result<f64> {
    EdgeKernel::Resulting(*params).alpha(t, u, densities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_uniform(m: usize) -> DensityField {
        DensityField::uniform(m, 0.5).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(DensityField::new(0.0, vec![1.0; 3], vec![1.0; 3]).is_err());
        assert!(DensityField::new(0.0, vec![1.0; 3], vec![0.0; 2]).is_err());
        assert!(DensityField::new(0.0, vec![-1.0, 2.0, 2.0], vec![0.0; 3]).is_err());
        let f = DensityField::normalized(0.0, vec![2.0; 5], vec![2.0; 5]).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-15);
        let d = DensityField::point_mass_at_zero(10, 0.3).unwrap();
        assert!((d.plus_mass() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let all_plus = DensityField::uniform(64, 1.0).unwrap();
        let all_minus = DensityField::uniform(64, 0.0).unwrap();
        for y in [0.0, 0.1, 0.37, 0.5, 0.99, 1.0] {
            assert!((quantile(&all_plus, y).unwrap() - y).abs() < 1e-12);
            assert!((quantile(&all_minus, y).unwrap() - y).abs() < 1e-12);
        }
        assert!((quantile(&half_uniform(64), 0.25).unwrap() - 0.5).abs() < 1e-12);
        assert!(quantile(&all_plus, 1.2).is_err());
    }

    /// Brute-force inversion: scan a fine grid of s for the first point where
    /// the exact piecewise-linear CDF reaches the level.
    #[test]
    fn quantile_matches_brute_force_scan() {
        let d = half_uniform(16);
        let scan = 100_000;
        let level = 0.25;
        let first = (0..=scan)
            .map(|k| k as f64 / scan as f64)
            .find(|&s| 0.5 * s >= level - 1e-15)
            .unwrap();
        assert!((quantile(&d, level).unwrap() - first).abs() <= 1.0 / scan as f64);
    }

    #[test]
    fn alpha_examples() {
        let k = LinearKernel { p0: 0.05, pi_plus: 0.4, pi_minus: 0.4 };
        let d = DensityField::from_fn(0.0, 200, |u| 0.3 + u, |u| 1.5 - u).unwrap();
        for u in [0.0, 0.4, 1.0] {
            assert!((alpha(f64::INFINITY, u, &d, &k).unwrap() - d.plus_mass()).abs() < 1e-12);
        }
        let plus_only = DensityField::from_fn(0.0, 50, |u| 1.0 + u, |_| 0.0).unwrap();
        assert_eq!(alpha(2.0, 0.3, &plus_only, &k).unwrap(), 1.0);
    }

    /// Independent high-resolution oracle: Simpson's rule on the exact
    /// (constant) densities with the closed-form kernel.
    #[test]
    fn alpha_matches_fine_quadrature() {
        let k = LinearKernel { p0: 0.05, pi_plus: 0.9, pi_minus: 0.1 };
        let d = half_uniform(100);
        let u = 0.5;
        let n = 20_000;
        let h = 1.0 / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let y = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let hv = 0.1 + 0.4 * (y + u);
            num += w * 0.5 * hv;
            den += w * hv;
        }
        let oracle = num / den;
        // ∫½(0.1+0.4(y+0.5))dy / ∫(0.1+0.4(y+0.5))dy = 0.5 exactly (the densities are equal)
        assert!((oracle - 0.5).abs() < 1e-12);
        assert!((alpha(f64::INFINITY, u, &d, &k).unwrap() - oracle).abs() < 1e-12);

        // an asymmetric case: f+ = u, f- = 1 - u
        let d = DensityField::from_fn(0.0, 400, |y| y, |y| 1.0 - y).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let y = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let hv = 0.1 + 0.4 * (y + u);
            num += w * y * hv;
            den += w * hv;
        }
        let oracle = num / den;
        assert!((alpha(f64::INFINITY, u, &d, &k).unwrap() - oracle).abs() < 1e-5);
    }

    #[test]
    fn alpha_degenerate_kernel() {
        let k = LinearKernel { p0: 0.0, pi_plus: 0.0, pi_minus: 0.0 };
        let err = alpha(1.0, 0.2, &half_uniform(10), &k).unwrap_err();
        assert!(matches!(err, Error::DegenerateKernel { .. }));
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(a in 0.2f64..3.0, b in 0.2f64..3.0, p in 0.05f64..0.95, s in 0.001f64..0.999) {
            let d = DensityField::from_fn(0.0, 256, |u| p * (1.0 + a * u), |u| (1.0 - p) * (1.0 + b * (1.0 - u))).unwrap();
            let q = d.quantile_map();
            for plus in [true, false] {
                let r = q.rank(plus, s);
                prop_assert!((q.eval(r) - s).abs() < 1e-9);
            }
        }
    }
}
