/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 1.0 - x,
        _ => {
            let mut lm1 = 1.0;
            let mut l = 1.0 - x;
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0 - x) * l - kf * lm1) / (kf + 1.0);
                lm1 = l;
                l = next;
            }
            l
        }
    }
}

/// Normalized eigenfunction psi_n(x) of the unit-mass harmonic oscillator
/// with frequency `omega0` and action scale `hbar`.
///
/// Uses the normalized-Hermite recurrence, which keeps magnitudes O(1) and
/// avoids the overflow of raw Hermite polynomials.
pub fn hermite_psi(n: usize, x: f64, hbar: f64, omega0: f64) -> f64 {
    let xi = (omega0 / hbar).sqrt() * x;
    let gauss = (omega0 / (std::f64::consts::PI * hbar)).powf(0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return gauss;
    }
    let mut hm1 = 1.0f64; // normalized H_0
    let mut h = std::f64::consts::SQRT_2 * xi; // normalized H_1
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * h - (kf / (kf + 1.0)).sqrt() * hm1;
        hm1 = h;
        h = next;
    }
    gauss * h
}
