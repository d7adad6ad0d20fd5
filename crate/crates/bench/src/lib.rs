//! Shared fixtures for the criterion benches.

use kirchhoff_core::{make_torus_lattice, Complex64, ModeLattice, Params, SpectralState};

/// Torus lattice with smooth, decaying data and `q` well inside `(0.5b, 1.5b)`.
pub fn fixture(dim: usize, max_index: u32) -> (ModeLattice, Params, SpectralState) {
    let lattice = make_torus_lattice(dim, max_index).expect("valid lattice");
    let params = Params::new(0.5, 1.0).expect("valid params");
    let n = lattice.len() as f64;
    let w = lattice
        .xi_sq()
        .iter()
        .enumerate()
        .map(|(i, k2)| Complex64::new((-k2).exp(), 0.1 * (i as f64).sin()) * (0.3 / n.sqrt()))
        .collect();
    let v = lattice
        .xi_sq()
        .iter()
        .map(|k2| Complex64::new(0.05 / (1.0 + k2), -0.02) / n.sqrt())
        .collect();
    let state = SpectralState::new(0.0, w, v).expect("matching lengths");
    (lattice, params, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kirchhoff_core::compute_moments;

    #[test]
    fn fixture_is_well_inside_the_band() {
        for (dim, max_index) in [(1, 3), (1, 64), (2, 16)] {
            let (lat, p, s) = fixture(dim, max_index);
            let q = compute_moments(&s, &lat, &p).unwrap().q;
            assert!(q > 0.5 * p.b && q < 1.5 * p.b, "q = {q}");
        }
    }
}
