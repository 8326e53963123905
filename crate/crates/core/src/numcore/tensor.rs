use crate::{Error, Result};

use super::rng::Rng;

/// Dense row-major f64 tensor.
///
/// Invariants: `shape.iter().product() == data.len()`, every dimension is
/// positive, and all entries are finite. Construction checks these; the
/// arithmetic in [`super::tape`] preserves them.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Parameter(format!("tensor dimensions must be positive, got {shape:?}")));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Parameter(format!(
                "shape {shape:?} implies {expected} elements, got {}",
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical("tensor contains non-finite entries".into()));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n] }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { shape: vec![1], data: vec![value] }
    }

    pub fn vector(data: Vec<f64>) -> Result<Self> {
        Tensor::from_vec(vec![data.len()], data)
    }

    /// Uniform init in (-scale, scale), seeded.
    pub fn uniform(rng: &mut Rng, shape: Vec<usize>, scale: f64) -> Self {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| (rng.next_f64() * 2.0 - 1.0) * scale).collect();
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value of a scalar (single-element) tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(Error::Contract(format!(
                "item() requires a single-element tensor, shape is {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_validates_shape_product() {
        assert!(Tensor::from_vec(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::from_vec(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::from_vec(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(Tensor::from_vec(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(Tensor::from_vec(vec![1], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn uniform_is_seeded() {
        let a = Tensor::uniform(&mut Rng::new(3), vec![4, 4], 0.1);
        let b = Tensor::uniform(&mut Rng::new(3), vec![4, 4], 0.1);
        assert_eq!(a, b);
        assert!(a.data().iter().all(|x| x.abs() < 0.1));
    }
}
