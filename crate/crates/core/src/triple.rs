//! Finite-dimensional Galerkin realization of the Gelfand triple V ⊂ H ⊂ V*.
//!
//! The three spaces share one coordinate basis; diagonal spectral weights
//! `mu_k > 0` define the V-norm `(Σ mu_k v_k²)^(1/2)` and the dual norm
//! `(Σ v_k²/mu_k)^(1/2)`, while H carries the plain Euclidean norm. With this
//! weighting the duality pairing between V* and V is the H inner product and
//! `‖v‖_H² ≤ ‖v‖_V* ‖v‖_V` by Cauchy-Schwarz.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coordinates of an element of V, H or V* in the shared Galerkin basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector<S>(pub Vec<S>);

impl<S: Scalar> HVector<S> {
    pub fn zeros(dim: usize) -> Self {
        HVector(vec![S::zero(); dim])
    }

    pub fn from_slice(coords: &[S]) -> Self {
        HVector(coords.to_vec())
    }

    /// Basis vector `e_k` (zero-based index).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, c: S) -> Self {
        HVector(self.0.iter().map(|&x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        HVector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        HVector(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    /// `self += c * other`, in place.
    pub fn axpy(&mut self, c: S, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a = *a + c * b;
        }
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn fill(&mut self, value: S) {
        for x in self.0.iter_mut() {
            *x = value;
        }
    }

    pub fn copy_from(&mut self, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.copy_from_slice(&other.0);
    }
}

/// Galerkin model of the triple V ⊂ H ≅ H* ⊂ V* together with the structural
/// exponents of the drift conditions.
#[derive(Debug, Clone)]
pub struct TripleSpec<S> {
    dim: usize,
    v_weights: Vec<S>,
    /// Coercivity exponent α > 1.
    pub alpha: S,
    /// Growth exponent β ≥ 0.
    pub beta: S,
    /// Coercivity constant θ > 0.
    pub theta: S,
}

impl<S: Scalar> TripleSpec<S> {
    pub fn new(v_weights: Vec<S>, alpha: S, beta: S, theta: S) -> Result<Self> {
        if v_weights.is_empty() {
            return Err(Error::invalid("Galerkin dimension must be positive"));
        }
        if v_weights.iter().any(|w| !(*w > S::zero()) || !w.is_finite()) {
            return Err(Error::invalid("all spectral weights must be strictly positive"));
        }
        if !(alpha > S::one()) {
            return Err(Error::invalid("alpha must exceed 1"));
        }
        if !(beta >= S::zero()) {
            return Err(Error::invalid("beta must be nonnegative"));
        }
        if !(theta > S::zero()) {
            return Err(Error::invalid("theta must be strictly positive"));
        }
        Ok(TripleSpec {
            dim: v_weights.len(),
            v_weights,
            alpha,
            beta,
            theta,
        })
    }

    /// Spectral model with weights `mu_k = k²` (1-D Dirichlet Laplacian scale).
    pub fn spectral(dim: usize, alpha: S, beta: S, theta: S) -> Result<Self> {
        let weights = (1..=dim)
            .map(|k| S::of_usize(k * k))
            .collect();
        Self::new(weights, alpha, beta, theta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn v_weights(&self) -> &[S] {
        &self.v_weights
    }

    fn check_dim(&self, v: &HVector<S>) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// H-norm (Euclidean in the shared basis).
    pub fn norm_h(&self, v: &HVector<S>) -> Result<S> {
        self.check_dim(v)?;
        Ok(v.dot(v).sqrt())
    }

    /// V-norm with the spectral weights.
    pub fn norm_v(&self, v: &HVector<S>) -> Result<S> {
        self.check_dim(v)?;
        let s = v
            .0
            .iter()
            .zip(&self.v_weights)
            .map(|(&x, &w)| w * x * x)
            .sum::<S>();
        Ok(s.sqrt())
    }

    /// Dual norm with inverse spectral weights.
    pub fn norm_vstar(&self, v: &HVector<S>) -> Result<S> {
        self.check_dim(v)?;
        let s = v
            .0
            .iter()
            .zip(&self.v_weights)
            .map(|(&x, &w)| x * x / w)
            .sum::<S>();
        Ok(s.sqrt())
    }

    /// Duality pairing ⟨u, v⟩ between V* and V; coincides with ⟨u, v⟩_H.
    pub fn pairing(&self, u: &HVector<S>, v: &HVector<S>) -> Result<S> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(u.dot(v))
    }

    /// ‖v‖_V^α with the configured coercivity exponent.
    pub fn norm_v_alpha(&self, v: &HVector<S>) -> Result<S> {
        Ok(self.norm_v(v)?.powf(self.alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_spec(dim: usize) -> TripleSpec<f64> {
        TripleSpec::new(vec![1.0; dim], 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn norm_h_zero_vector() {
        let spec = unit_spec(3);
        assert_eq!(spec.norm_h(&HVector::zeros(3)).unwrap(), 0.0);
        assert_eq!(spec.norm_v(&HVector::zeros(3)).unwrap(), 0.0);
        assert_eq!(spec.norm_vstar(&HVector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn norm_h_pythagorean() {
        let spec = unit_spec(2);
        let v = HVector::from_slice(&[3.0, 4.0]);
        assert_relative_eq!(spec.norm_h(&v).unwrap(), 5.0);
    }

    #[test]
    fn norm_h_ones() {
        let spec = unit_spec(3);
        let v = HVector::from_slice(&[1.0, 1.0, 1.0]);
        assert_relative_eq!(spec.norm_h(&v).unwrap(), 1.7320508, epsilon = 1e-7);
    }

    #[test]
    fn unit_weights_collapse_norms() {
        let spec = unit_spec(2);
        let v = HVector::from_slice(&[1.0, 0.0]);
        assert_eq!(spec.norm_h(&v).unwrap(), 1.0);
        assert_eq!(spec.norm_v(&v).unwrap(), 1.0);
        assert_eq!(spec.norm_vstar(&v).unwrap(), 1.0);
    }

    #[test]
    fn weighted_norms() {
        let spec = TripleSpec::new(vec![4.0, 1.0], 2.0, 0.0, 1.0).unwrap();
        let v = HVector::from_slice(&[1.0, 0.0]);
        assert_relative_eq!(spec.norm_v(&v).unwrap(), 2.0);
        assert_relative_eq!(spec.norm_vstar(&v).unwrap(), 0.5);
    }

    #[test]
    fn pairing_examples() {
        let spec = unit_spec(2);
        let zero = HVector::zeros(2);
        assert_eq!(spec.pairing(&zero, &zero).unwrap(), 0.0);
        let u = HVector::from_slice(&[1.0, 0.0]);
        let v = HVector::from_slice(&[0.0, 1.0]);
        assert_eq!(spec.pairing(&u, &v).unwrap(), 0.0);
        let u = HVector::from_slice(&[1.0, 2.0]);
        let v = HVector::from_slice(&[3.0, -1.0]);
        assert_eq!(spec.pairing(&u, &v).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let spec = unit_spec(2);
        let v = HVector::<f64>::zeros(3);
        assert!(matches!(
            spec.norm_h(&v),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TripleSpec::new(vec![1.0, -1.0], 2.0, 0.0, 1.0).is_err());
        assert!(TripleSpec::new(vec![1.0], 1.0, 0.0, 1.0).is_err());
        assert!(TripleSpec::new(vec![1.0], 2.0, -0.5, 1.0).is_err());
        assert!(TripleSpec::new(vec![1.0], 2.0, 0.0, 0.0).is_err());
        assert!(TripleSpec::<f64>::new(vec![], 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn spectral_weights_grow_quadratically() {
        let spec = TripleSpec::<f64>::spectral(4, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(spec.v_weights(), &[1.0, 4.0, 9.0, 16.0]);
    }
}
