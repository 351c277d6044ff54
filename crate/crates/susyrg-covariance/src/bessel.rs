/// e^{-z} I_k(z) for k = 0..=kmax and z ≥ 0.
///
/// Miller's backward recurrence, normalized with e^{-z}(I_0 + 2 Σ_{k≥1} I_k) = 1.
pub fn scaled_bessel_i(z: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = kmax + 30 + (9.0 * z.sqrt()).ceil() as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        vals[k - 1] = vals[k + 1] + (2.0 * k as f64 / z) * vals[k];
        if vals[k - 1] > 1e250 {
            for v in &mut vals[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm: f64 = vals[0] + 2.0 * vals[1..=start].iter().sum::<f64>();
    for k in 0..=kmax {
        out[k] = vals[k] / norm;
    }
    out
}

/// Coefficients a_k(ν) of e^{-z} I_ν(z) ~ (2πz)^{-1/2} Σ_k (-1)^k a_k(ν) z^{-k}.
pub fn hankel_coefficients(nu: f64, terms: usize) -> Vec<f64> {
    let mut a = vec![1.0; terms];
    let mu = 4.0 * nu * nu;
    for k in 1..terms {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * (mu - odd * odd) / (k as f64 * 8.0);
    }
    a
}
