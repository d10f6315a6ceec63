//! Per-cell scalar and vector data on a lattice domain.

use crate::domain::LatticeDomain;
use crate::error::{Error, Result};

/// One real value per cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: LatticeDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: &LatticeDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_cells() {
            return Err(Error::Data(format!(
                "expected {} cells, got {}",
                domain.num_cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite scalar entry".into()));
        }
        Ok(ScalarField { domain: *domain, values })
    }

    pub fn constant(domain: &LatticeDomain, value: f64) -> Result<Self> {
        Self::new(domain, vec![value; domain.num_cells()])
    }

    pub fn from_fn(domain: &LatticeDomain, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..domain.num_cells())
            .map(|i| f(&domain.cell_center(i)[..domain.dim()]))
            .collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(&self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        ScalarField {
            domain: self.domain,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// One `R^d` vector per cell, cell-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    domain: LatticeDomain,
    d: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(domain: &LatticeDomain, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::Data(format!("vector dimension must be 1..=3, got {d}")));
        }
        if values.len() != domain.num_cells() * d {
            return Err(Error::Data(format!(
                "expected {} entries, got {}",
                domain.num_cells() * d,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite vector entry".into()));
        }
        Ok(VectorField { domain: *domain, d, values })
    }

    pub fn from_fn(
        domain: &LatticeDomain,
        d: usize,
        mut f: impl FnMut(&[f64]) -> [f64; 3],
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(domain.num_cells() * d);
        for i in 0..domain.num_cells() {
            let v = f(&domain.cell_center(i)[..domain.dim()]);
            values.extend_from_slice(&v[..d]);
        }
        Self::new(domain, d, values)
    }

    pub fn from_scalar(f: &ScalarField) -> Self {
        VectorField { domain: *f.domain(), d: 1, values: f.values().to_vec() }
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.d..(cell + 1) * self.d]
    }

    /// Euclidean magnitude per cell.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.domain.num_cells())
            .map(|i| self.get(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        ScalarField { domain: self.domain, values }
    }

    pub fn map_cells(&self, f: impl Fn(usize, &[f64]) -> [f64; 3]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.domain.num_cells() {
            let v = f(i, self.get(i));
            values.extend_from_slice(&v[..self.d]);
        }
        VectorField { domain: self.domain, d: self.d, values }
    }

    /// Truncation `f 1_{|f| <= cap}`, used by monotone-convergence ladders.
    pub fn truncate(&self, cap: f64) -> Self {
        self.map_cells(|i, v| {
            let mag = self.get(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut out = [0.0; 3];
            if mag <= cap {
                out[..self.d].copy_from_slice(v);
            }
            out
        })
    }
}
