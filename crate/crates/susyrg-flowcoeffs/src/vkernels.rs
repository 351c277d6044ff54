use susyrg_covariance::{support_radius, DecompositionSet, KernelTable};

use crate::FlowError;

/// v^{(p)}_{n+1} = C_{n,L}^p − C_{n+1}^p on the scale-(n+1) lattice, p = 1, 2, 3.
#[derive(Debug, Clone)]
pub struct VKernels {
    pub n: u32,
    pub v: [KernelTable; 3],
}

impl VKernels {
    pub fn get(&self, p: usize) -> &KernelTable {
        &self.v[p - 1]
    }
}

/// Relative agreement required between the two forms of v^{(p)}.
pub const FACTOR_TOL: f64 = 1e-12;

/// Builds v^{(p)}_{n+1} from Γ_n and C_{n+1}. In integer units at scale n+1,
/// C_{n,L}[X] = L^{2d_s} C_n[X] and Γ_{n,L}[X] = L^{2d_s} Γ_n[X].
pub fn v_kernels(dec: &DecompositionSet, n: u32) -> Result<VKernels, FlowError> {
    let l = dec.params.l;
    let r = support_radius(l, n);
    if n > dec.n_max {
        return Err(FlowError::Window(format!(
            "scale {n} beyond decomposition depth {}",
            dec.n_max
        )));
    }
    if r > dec.extent() {
        return Err(FlowError::Window(format!(
            "support radius {r} of scale {n} exceeds stored extent {}",
            dec.extent()
        )));
    }
    let up = dec.params.lf().powf(2.0 * dec.params.d_s());
    let gamma = dec.gammas[n as usize].truncated(r).scaled(up);
    let c_nl = dec.direct[n as usize].truncated(r).scaled(up);
    let c_next = dec.direct[n as usize + 1].truncated(r);
    let scale = c_next.scale;
    let mut out = Vec::with_capacity(3);
    for p in 1..=3i32 {
        let diff = c_nl.zip_with(&c_next, |a, b| a.powi(p) - b.powi(p))?;
        let fact = gamma.zip_with(&c_next, |g, c| match p {
            1 => g,
            2 => g * (g + 2.0 * c),
            _ => g * (g * g + 3.0 * g * c + 3.0 * c * c),
        })?;
        let scale_ref = fact
            .sup_norm()
            .max(c_nl.sup_norm().powi(p))
            .max(f64::MIN_POSITIVE);
        for k in fact.keys() {
            let (a, b) = (diff.at(k), fact.at(k));
            if (a - b).abs() > FACTOR_TOL * scale_ref {
                return Err(FlowError::Mismatch {
                    n,
                    p: p as u32,
                    offset: k,
                    difference: (a - b).abs(),
                });
            }
        }
        out.push(KernelTable::from_values(
            scale,
            r,
            Some(r),
            fact.values().to_vec(),
            fact.meta.clone(),
        )?);
    }
    let [v1, v2, v3]: [KernelTable; 3] = out.try_into().expect("three kernels");
    Ok(VKernels { n, v: [v1, v2, v3] })
}
