//! Wigner quasi-distribution of the evolved oscillator state.
//!
//! Conventions: unit mass, x = sqrt(hbar/(2 omega0)) (a + a^dag),
//! p = i sqrt(hbar omega0 / 2) (a^dag - a). The number-state function is
//! evaluated through its Laguerre closed form; the defining phase-space
//! integral over oscillator eigenfunctions is kept as a slow verification
//! path (`*_integral`), quadrature-checked against the closed form in tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{hermite_psi, integrate_gk, laguerre};
use crate::par;

/// Uniform rectangular phase-space grid specification.
#[derive(Debug, Clone, Copy)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl WignerGridSpec {
    /// Symmetric grid extending `widths` vacuum/thermal widths around the
    /// origin for a state with mean occupation `mean_n`.
    pub fn centered(hbar: f64, omega0: f64, mean_n: f64, widths: f64, points: usize) -> Self {
        let scale = (2.0 * mean_n + 1.0).sqrt();
        let x_half = widths * scale * (hbar / (2.0 * omega0)).sqrt();
        let p_half = widths * scale * (hbar * omega0 / 2.0).sqrt();
        Self {
            x_min: -x_half,
            x_max: x_half,
            nx: points,
            p_min: -p_half,
            p_max: p_half,
            np: points,
        }
    }

    fn x_axis(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    fn p_axis(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Evaluated grid; `values[(ix, ip)] = W(x_axis[ix], p_axis[ip])`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: DMatrix<f64>,
    pub hbar: f64,
}

impl WignerGrid {
    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        let nx = self.x_axis.len();
        let np = self.p_axis.len();
        if nx < 2 || np < 2 {
            return 0.0;
        }
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        let mut total = 0.0;
        for ix in 0..nx {
            let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
            for ip in 0..np {
                let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
                total += wx * wp * self.values[(ix, ip)];
            }
        }
        total * dx * dp
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn fill_grid(spec: &WignerGridSpec, hbar: f64, f: impl Fn(f64, f64) -> f64 + Sync) -> WignerGrid {
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let rows = par::map_indexed(x_axis.len(), |ix| {
        let x = x_axis[ix];
        p_axis.iter().map(|&p| f(x, p)).collect::<Vec<f64>>()
    });
    let mut values = DMatrix::<f64>::zeros(x_axis.len(), p_axis.len());
    for (ix, row) in rows.into_iter().enumerate() {
        for (ip, v) in row.into_iter().enumerate() {
            values[(ix, ip)] = v;
        }
    }
    WignerGrid {
        x_axis,
        p_axis,
        values,
        hbar,
    }
}

/// W_n(x, p) = ((-1)^n / (pi hbar)) L_n(4H/(hbar omega0)) e^{-2H/(hbar omega0)},
/// H = p^2/2 + omega0^2 x^2 / 2.
pub fn wigner_number(n: usize, x: f64, p: f64, hbar: f64, omega0: f64) -> f64 {
    let h_energy = 0.5 * p * p + 0.5 * omega0 * omega0 * x * x;
    let arg = 2.0 * h_energy / (hbar * omega0);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / (std::f64::consts::PI * hbar) * laguerre(n, 2.0 * arg) * (-arg).exp()
}

/// Defining integral of the cross element between number states n and m:
/// (1/(pi hbar)) int psi_n(x+y) psi_m(x-y) e^{-2ipy/hbar} dy.
pub fn wigner_element_integral(
    n: usize,
    m: usize,
    x: f64,
    p: f64,
    hbar: f64,
    omega0: f64,
    quad_tol: f64,
) -> Result<Complex64> {
    let width = (hbar / omega0).sqrt();
    let span = x.abs() + width * (2.0 * ((n.max(m) as f64) + 1.0).sqrt() + 8.0);
    let (value, _err) = integrate_gk(
        |y| {
            let amp = hermite_psi(n, x + y, hbar, omega0) * hermite_psi(m, x - y, hbar, omega0);
            Complex64::from_polar(1.0, -2.0 * p * y / hbar) * amp
        },
        -span,
        span,
        quad_tol,
        4096,
    )?;
    Ok(value / (std::f64::consts::PI * hbar))
}

/// Diagonal (n = m) defining integral; real up to quadrature error.
pub fn wigner_number_integral(
    n: usize,
    x: f64,
    p: f64,
    hbar: f64,
    omega0: f64,
    quad_tol: f64,
) -> Result<f64> {
    Ok(wigner_element_integral(n, n, x, p, hbar, omega0, quad_tol)?.re)
}

/// W(x, p) = sum_n P_n W_n(x, p) for a probability vector over number states.
pub fn wigner_mixture(
    probabilities: &[f64],
    spec: &WignerGridSpec,
    hbar: f64,
    omega0: f64,
) -> Result<WignerGrid> {
    let tol = 1e-6;
    if let Some(bad) = probabilities.iter().find(|p| **p < -tol || !p.is_finite()) {
        return Err(Error::ProbabilityVectorInvalid {
            reason: format!("negative or non-finite weight {bad}"),
        });
    }
    let total: f64 = probabilities.iter().sum();
    if total > 1.0 + tol {
        return Err(Error::ProbabilityVectorInvalid {
            reason: format!("weights sum to {total} > 1"),
        });
    }
    let orders = probabilities.len();
    Ok(fill_grid(spec, hbar, move |x, p| {
        // one Laguerre recurrence pass per point covers every order
        let h_energy = 0.5 * p * p + 0.5 * omega0 * omega0 * x * x;
        let arg = 4.0 * h_energy / (hbar * omega0);
        let gauss = (-0.5 * arg).exp() / (std::f64::consts::PI * hbar);
        let mut lm1 = 0.0f64;
        let mut l = 1.0f64;
        let mut acc = 0.0f64;
        for (k, &weight) in probabilities.iter().enumerate().take(orders) {
            if k > 0 {
                let kf = (k - 1) as f64;
                let next = ((2.0 * kf + 1.0 - arg) * l - kf * lm1) / (kf + 1.0);
                lm1 = l;
                l = next;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += weight * sign * l;
        }
        acc * gauss
    }))
}

/// Gaussian Wigner function of the evolved coherent state with amplitude
/// mu = alpha G - i zeta: ground-state widths centered at the mapped
/// phase-space point.
pub fn wigner_coherent_evolved(
    alpha: Complex64,
    g: Complex64,
    zeta: Complex64,
    spec: &WignerGridSpec,
    hbar: f64,
    omega0: f64,
) -> WignerGrid {
    let mu = alpha * g - Complex64::new(0.0, 1.0) * zeta;
    let x_bar = (2.0 * hbar / omega0).sqrt() * mu.re;
    let p_bar = (2.0 * hbar * omega0).sqrt() * mu.im;
    fill_grid(spec, hbar, move |x, p| {
        let ex = omega0 * (x - x_bar).powi(2) / hbar + (p - p_bar).powi(2) / (hbar * omega0);
        (-ex).exp() / (std::f64::consts::PI * hbar)
    })
}
