use serde::{Deserialize, Serialize};

use crate::model::Model1Params;

/// 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Matrix2(r)
    }

    pub fn scale(&self, s: f64) -> Matrix2 {
        let a = &self.0;
        Matrix2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    pub fn max_abs_diff(&self, o: &Matrix2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

/// Reaction matrix of the stationary model-1 system
/// `M(u) v' = N v`, acting on `(f_+, f_-)`.
pub fn model1_n(params: &Model1Params) -> Matrix2 {
    Matrix2::new(1.0 - params.gamma_pm, params.gamma_mp, params.gamma_pm, 1.0 - params.gamma_mp)
}

/// Transport matrix `M(u) = diag(1 - u, -u)`.
pub fn model1_m(u: f64) -> Matrix2 {
    Matrix2::new(1.0 - u, 0.0, 0.0, -u)
}

/// Closed form of `e^{N t}`:
/// `e^t / G [[g_pm E + g_mp, g_mp (1 - E)], [g_pm (1 - E), g_mp E + g_pm]]`
/// with `G = g_pm + g_mp` and `E = e^{-G t}`.
pub fn expm_n(t: f64, params: &Model1Params) -> Matrix2 {
    let (gpm, gmp) = (params.gamma_pm, params.gamma_mp);
    let g = gpm + gmp;
    let e = (-g * t).exp();
    Matrix2::new(gpm * e + gmp, gmp * (1.0 - e), gpm * (1.0 - e), gmp * e + gpm).scale(t.exp() / g)
}
