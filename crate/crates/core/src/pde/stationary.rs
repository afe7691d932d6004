use statrs::function::beta::{beta_reg, ln_beta};

use super::matrix::{model1_m, model1_n};
use crate::error::{contract, Error, Result};
use crate::model::{DensityField, Model1Params};

/// Fixed point `f_+ = u f_B / B(a, b)`, `f_- = (1 - u) f_B / B(a, b)` with
/// `f_B = u^{a-1} (1 - u)^{b-1}`.
///
/// Infinite endpoint values (shape below one) are replaced by the average
/// over the half cell at that end. The field is then rescaled so its
/// trapezoid mass is exactly one.
pub fn stationary_beta(a: f64, b: f64, cells: usize) -> Result<DensityField> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(contract(format!("Beta shapes ({a}, {b}) must be positive")));
    }
    if cells < 2 {
        return Err(contract("need at least two cells"));
    }
    let ln_b = ln_beta(a, b);
    let h = 1.0 / cells as f64;
    let mut f_plus: Vec<f64> = (0..=cells).map(|i| {
        let u = i as f64 * h;
        u.powf(a) * (1.0 - u).powf(b - 1.0) * (-ln_b).exp()
    }).collect();
    let mut f_minus: Vec<f64> = (0..=cells).map(|i| {
        let u = i as f64 * h;
        (1.0 - u).powf(b) * u.powf(a - 1.0) * (-ln_b).exp()
    }).collect();
    let mean = a / (a + b);
    if !f_plus[cells].is_finite() {
        // int_{1-h/2}^1 u f_B / B du = mean * (1 - I_{1-h/2}(a + 1, b))
        f_plus[cells] = mean * (1.0 - beta_reg(a + 1.0, b, 1.0 - 0.5 * h)) / (0.5 * h);
    }
    if !f_minus[0].is_finite() {
        // int_0^{h/2} (1 - u) f_B / B du = (1 - mean) * I_{h/2}(a, b + 1)
        f_minus[0] = (1.0 - mean) * beta_reg(a, b + 1.0, 0.5 * h) / (0.5 * h);
    }
    DensityField::normalized(0.0, f_plus, f_minus)
}

/// Stationary densities of model 1: Beta`(gamma_mp, gamma_pm)`.
pub fn stationary_model1(params: &Model1Params, cells: usize) -> Result<DensityField> {
    params.validate()?;
    stationary_beta(params.gamma_mp, params.gamma_pm, cells)
}

/// Stationary densities of model 2 with `pi_+ = pi_-`: Beta`(beta p, beta (1 - p))`.
pub fn stationary_model2(beta: f64, p_plus: f64, cells: usize) -> Result<DensityField> {
    if !(beta > 0.0) || !(p_plus > 0.0 && p_plus < 1.0) {
        return Err(contract(format!("shapes need beta > 0 and 0 < p_plus < 1 (got {beta}, {p_plus})")));
    }
    stationary_beta(beta * p_plus, beta * (1.0 - p_plus), cells)
}

/// Largest residual of `M(u) v'(u) - N v(u)` over the interior nodes, with
/// centred differences for `v'`.
pub fn stationary_residual(field: &DensityField, params: &Model1Params) -> f64 {
    let n = model1_n(params);
    let h = field.h();
    (1..field.cells())
        .map(|i| {
            let u = field.node(i);
            let d = [
                (field.f_plus[i + 1] - field.f_plus[i - 1]) / (2.0 * h),
                (field.f_minus[i + 1] - field.f_minus[i - 1]) / (2.0 * h),
            ];
            let lhs = model1_m(u).apply(d);
            let rhs = n.apply([field.f_plus[i], field.f_minus[i]]);
            (lhs[0] - rhs[0]).abs().max((lhs[1] - rhs[1]).abs())
        })
        .fold(0.0, f64::max)
}

/// Power-series coefficients `(f_{+,k}, f_{-,k})`, `k = 0..=K`, of the analytic
/// solution of the stationary model-1 system started from `f_{+,0}`:
///
/// `f_{-,k} = g_pm f_{+,k} / (g_mp - 1 - k)` and
/// `f_{+,k+1} = ((k + 1 - g_pm) f_{+,k} + g_mp f_{-,k}) / (k + 1)`.
pub fn series_coefficients(params: &Model1Params, f_plus_0: f64, k_max: usize) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let (gpm, gmp) = (params.gamma_pm, params.gamma_mp);
    for k in 0..=k_max {
        let den = gmp - 1.0 - k as f64;
        if den == 0.0 {
            return Err(Error::SingularParameter { index: k, gamma_mp: gmp });
        }
    }
    let mut out = Vec::with_capacity(k_max + 1);
    let mut fp = f_plus_0;
    for k in 0..=k_max {
        let fm = gpm * fp / (gmp - 1.0 - k as f64);
        out.push((fp, fm));
        fp = ((k as f64 + 1.0 - gpm) * fp + gmp * fm) / (k as f64 + 1.0);
    }
    Ok(out)
}
