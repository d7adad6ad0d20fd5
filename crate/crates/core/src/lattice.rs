//! Finite Fourier mode sets.
//!
//! A [`ModeLattice`] replaces the frequency integral over `R^n` by a weighted
//! sum over a fixed, ordered list of modes. The truncated system built on top
//! of it is a Kirchhoff-Pokhozhaev system in its own right, so every
//! conservation law holds exactly for the lattice flow.

use crate::error::LatticeError;

/// Largest dimension accepted by [`make_torus_lattice`] unless overridden.
pub const DEFAULT_MAX_DIM: usize = 3;
/// Largest index accepted by [`make_torus_lattice`] unless overridden.
pub const DEFAULT_MAX_INDEX: u32 = 64;

/// One frequency together with its quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub xi: Vec<f64>,
    pub weight: f64,
}

impl Mode {
    pub fn norm_sq(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Bounds applied when building torus lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeLimits {
    pub max_dim: usize,
    pub max_index: u32,
}

impl Default for LatticeLimits {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            max_index: DEFAULT_MAX_INDEX,
        }
    }
}

/// Ordered, immutable set of modes.
///
/// `|xi|^2` and the weights are cached in flat arrays because every reduction
/// in the dynamics walks them in mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLattice {
    dim: usize,
    modes: Vec<Mode>,
    label: String,
    xi_sq: Vec<f64>,
    weights: Vec<f64>,
}

impl ModeLattice {
    fn from_modes(dim: usize, modes: Vec<Mode>, label: String) -> Self {
        let xi_sq = modes.iter().map(Mode::norm_sq).collect();
        let weights = modes.iter().map(|m| m.weight).collect();
        Self {
            dim,
            modes,
            label,
            xi_sq,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `|xi_k|^2` for every mode, in lattice order.
    pub fn xi_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the mode with exactly this frequency vector.
    pub fn find(&self, xi: &[f64]) -> Option<usize> {
        self.modes.iter().position(|m| m.xi.as_slice() == xi)
    }

    /// Quadrature sum `sum_k weight_k * f_k`, accumulated in lattice order.
    pub fn reduce(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).fold(0.0, |acc, (w, f)| acc + w * f)
    }
}

/// Torus dual lattice `Z^dim ∩ [-max_index, max_index]^dim`, unit weights,
/// lexicographic order.
pub fn make_torus_lattice(dim: usize, max_index: u32) -> Result<ModeLattice, LatticeError> {
    make_torus_lattice_with_limits(dim, max_index, LatticeLimits::default())
}

pub fn make_torus_lattice_with_limits(
    dim: usize,
    max_index: u32,
    limits: LatticeLimits,
) -> Result<ModeLattice, LatticeError> {
    if dim == 0 || dim > limits.max_dim {
        return Err(LatticeError::UnsupportedDim {
            dim,
            max: limits.max_dim,
        });
    }
    if max_index == 0 || max_index > limits.max_index {
        return Err(LatticeError::UnsupportedIndex {
            max_index,
            max: limits.max_index,
        });
    }
    let m = max_index as i64;
    let side = (2 * m + 1) as usize;
    let total = side.pow(dim as u32);
    let mut modes = Vec::with_capacity(total);
    let mut idx = vec![-m; dim];
    for _ in 0..total {
        modes.push(Mode {
            xi: idx.iter().map(|&k| k as f64).collect(),
            weight: 1.0,
        });
        // odometer increment, last coordinate fastest
        for d in (0..dim).rev() {
            if idx[d] < m {
                idx[d] += 1;
                break;
            }
            idx[d] = -m;
        }
    }
    Ok(ModeLattice::from_modes(
        dim,
        modes,
        format!("torus(dim={dim},max_index={max_index})"),
    ))
}

/// Lattice from an explicit list of `(xi, weight)` pairs, kept in the given
/// order.
pub fn make_custom_lattice(dim: usize, entries: Vec<(Vec<f64>, f64)>) -> Result<ModeLattice, LatticeError> {
    if dim == 0 {
        return Err(LatticeError::UnsupportedDim { dim, max: usize::MAX });
    }
    if entries.is_empty() {
        return Err(LatticeError::Empty);
    }
    let mut modes: Vec<Mode> = Vec::with_capacity(entries.len());
    for (index, (xi, weight)) in entries.into_iter().enumerate() {
        if xi.len() != dim {
            return Err(LatticeError::DimMismatch {
                index,
                expected: dim,
                found: xi.len(),
            });
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(LatticeError::NonFinite { index });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(LatticeError::NonPositiveWeight { index, weight });
        }
        if let Some(first) = modes.iter().position(|m| m.xi == xi) {
            return Err(LatticeError::DuplicateFrequency { first, second: index });
        }
        modes.push(Mode { xi, weight });
    }
    let label = format!("custom(dim={dim},modes={})", modes.len());
    Ok(ModeLattice::from_modes(dim, modes, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_torus() {
        let lat = make_torus_lattice(1, 1).unwrap();
        let xs: Vec<f64> = lat.modes().iter().map(|m| m.xi[0]).collect();
        assert_eq!(xs, vec![-1.0, 0.0, 1.0]);
        assert!(lat.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn two_dim_lexicographic() {
        let lat = make_torus_lattice(2, 1).unwrap();
        assert_eq!(lat.len(), 9);
        assert_eq!(lat.modes()[0].xi, vec![-1.0, -1.0]);
        assert_eq!(lat.modes()[1].xi, vec![-1.0, 0.0]);
        assert_eq!(lat.modes()[3].xi, vec![0.0, -1.0]);
        assert_eq!(lat.modes()[8].xi, vec![1.0, 1.0]);
    }

    #[test]
    fn torus_gradient_weight_sum() {
        let lat = make_torus_lattice(1, 3).unwrap();
        assert_eq!(lat.len(), 7);
        // enumeration oracle: 2 * (1 + 4 + 9)
        let expected: f64 = (-3i32..=3).map(|k| (k * k) as f64).sum();
        assert_eq!(expected, 28.0);
        assert_eq!(lat.reduce(lat.xi_sq()), expected);
    }

    #[test]
    fn torus_size_is_power() {
        let lat = make_torus_lattice(3, 2).unwrap();
        assert_eq!(lat.len(), 125);
    }

    #[test]
    fn torus_bounds() {
        assert!(make_torus_lattice(0, 1).is_err());
        assert!(make_torus_lattice(4, 1).is_err());
        assert!(make_torus_lattice(1, 0).is_err());
        assert!(make_torus_lattice(1, 65).is_err());
        let limits = LatticeLimits {
            max_dim: 4,
            max_index: 100,
        };
        assert!(make_torus_lattice_with_limits(4, 1, limits).is_ok());
        assert!(make_torus_lattice_with_limits(1, 100, limits).is_ok());
    }

    #[test]
    fn custom_single_and_pair() {
        let one = make_custom_lattice(1, vec![(vec![1.0], 1.0)]).unwrap();
        assert_eq!(one.len(), 1);
        let two = make_custom_lattice(1, vec![(vec![2.0], 1.0), (vec![1.0], 0.5)]).unwrap();
        assert_eq!(two.modes()[0].norm(), 2.0);
        assert_eq!(two.modes()[1].weight, 0.5);
    }

    #[test]
    fn custom_rejections() {
        assert_eq!(
            make_custom_lattice(1, vec![(vec![1.0], 1.0), (vec![1.0], 2.0)]),
            Err(LatticeError::DuplicateFrequency { first: 0, second: 1 })
        );
        assert!(matches!(
            make_custom_lattice(1, vec![(vec![1.0], 0.0)]),
            Err(LatticeError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            make_custom_lattice(1, vec![(vec![1.0], -1.0)]),
            Err(LatticeError::NonPositiveWeight { .. })
        ));
        assert_eq!(make_custom_lattice(1, vec![]), Err(LatticeError::Empty));
        assert!(matches!(
            make_custom_lattice(2, vec![(vec![1.0], 1.0)]),
            Err(LatticeError::DimMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_construction() {
        let a = make_torus_lattice(2, 3).unwrap();
        let b = make_torus_lattice(2, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn find_mode() {
        let lat = make_torus_lattice(2, 1).unwrap();
        assert_eq!(lat.find(&[0.0, 0.0]), Some(4));
        assert_eq!(lat.find(&[2.0, 0.0]), None);
    }
}
