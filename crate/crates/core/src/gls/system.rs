use crate::error::{DoaError, Result};
use crate::linalg::{cis, left_null_space, CMat, CVec};

/// DFT-domain linear system for the polynomial coefficients.
///
/// Row `r` (0-based) of the DFT matrix uses `W^r` with `W = exp(-j 2 pi / M)`.
/// The Vandermonde blocks use the same row alignment: `wa[r, l] = W^(r (l+1))`
/// for `l = 0..L` and `wbar[r, l] = W^(r l)`.
#[derive(Debug, Clone)]
pub struct DftSystem {
    pub num_sensors: usize,
    pub num_sources: usize,
    /// Selected DFT bins, 0-based and ascending.
    pub index_set: Vec<usize>,
    pub dft_matrix: CMat,
    pub wa: CMat,
    pub wbar: CMat,
    /// `|I| x (|I| - L)`, orthonormal, with `B^H Z W_bar = 0`.
    pub null_basis: CMat,
}

impl DftSystem {
    pub fn card(&self) -> usize {
        self.index_set.len()
    }

    /// `|I| x M` 0/1 row picker.
    pub fn selection(&self) -> CMat {
        let mut z = CMat::zeros(self.card(), self.num_sensors);
        for (i, &k) in self.index_set.iter().enumerate() {
            z[(i, k)] = crate::linalg::ONE;
        }
        z
    }

    pub(crate) fn select_rows(&self, m: &CMat) -> CMat {
        m.select_rows(self.index_set.iter())
    }
}

/// `M x M` DFT matrix with entries `exp(-j 2 pi r c / M)`.
pub fn dft_matrix(m: usize) -> CMat {
    let w = -2.0 * std::f64::consts::PI / m as f64;
    CMat::from_fn(m, m, |r, c| cis(w * ((r * c) % m) as f64))
}

/// Picks the `card` DFT bins where `ubar1` is largest in magnitude (ties go
/// to the lower index) and builds the matching null-space basis.
pub fn build_dft_system(num_sensors: usize, num_sources: usize, card: usize, ubar1: &CVec) -> Result<DftSystem> {
    let m = num_sensors;
    if ubar1.len() != m {
        return Err(DoaError::domain(format!("DFT vector has length {} for {m} sensors", ubar1.len())));
    }
    if card <= num_sources || card > m {
        return Err(DoaError::domain(format!(
            "index-set size must satisfy L < |I| <= M (L = {num_sources}, |I| = {card}, M = {m})"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ubar1[b].norm().total_cmp(&ubar1[a].norm()));
    let mut index_set = order[..card].to_vec();
    index_set.sort_unstable();

    let w = -2.0 * std::f64::consts::PI / m as f64;
    let wa = CMat::from_fn(m, num_sources, |r, l| cis(w * ((r * (l + 1)) % m) as f64));
    let wbar = CMat::from_fn(m, num_sources, |r, l| cis(w * ((r * l) % m) as f64));
    let selected = wbar.select_rows(index_set.iter());
    let null_basis = left_null_space(&selected, num_sources);
    Ok(DftSystem {
        num_sensors: m,
        num_sources,
        index_set,
        dft_matrix: dft_matrix(m),
        wa,
        wbar,
        null_basis,
    })
}

/// Stacks `H_p = B^H diag(Z ubar_p) Z W_a` and `h_p = -B^H Z ubar_p` over the
/// columns `ubar_p = W_D u_p` of the un-whitened subspace `u_tilde`.
pub fn assemble_system(sys: &DftSystem, u_tilde: &CMat) -> (CMat, CVec) {
    let l = sys.num_sources;
    let k = sys.card() - l;
    let zwa = sys.select_rows(&sys.wa);
    let ubar = sys.select_rows(&(&sys.dft_matrix * u_tilde));
    let bh = sys.null_basis.adjoint();
    let p_count = u_tilde.ncols();
    let mut h_mat = CMat::zeros(p_count * k, l);
    let mut h_vec = CVec::zeros(p_count * k);
    for p in 0..p_count {
        let col = ubar.column(p);
        let scaled = CMat::from_fn(zwa.nrows(), l, |r, c| zwa[(r, c)] * col[r]);
        h_mat.rows_mut(p * k, k).copy_from(&(&bh * scaled));
        h_vec.rows_mut(p * k, k).copy_from(&(-(&bh * col)));
    }
    (h_mat, h_vec)
}
