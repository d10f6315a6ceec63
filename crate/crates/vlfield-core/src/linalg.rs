//! Dense linear algebra for `d x d` matrices with `d <= 3`: products,
//! inverses, symmetric eigensolves, operator norms, and SPD square roots.
//!
//! Everything is closed form for `d <= 2`; the `d = 3` symmetric eigensolve
//! is a cyclic Jacobi iteration driven to machine precision.

use crate::error::{Error, Result};

/// Row-major `d x d` matrix, `d <= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub d: usize,
    a: [f64; 9],
}

impl Mat {
    pub fn zeros(d: usize) -> Mat {
        debug_assert!((1..=3).contains(&d));
        Mat { d, a: [0.0; 9] }
    }

    pub fn identity(d: usize) -> Mat {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(d: usize, rows: &[f64]) -> Mat {
        debug_assert_eq!(rows.len(), d * d);
        let mut m = Mat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, rows[i * d + j]);
            }
        }
        m
    }

    pub fn diag(d: usize, entries: &[f64]) -> Mat {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.set(i, i, entries[i]);
        }
        m
    }

    pub fn scalar(v: f64) -> Mat {
        Mat::diag(1, &[v])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * 3 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * 3 + j] = v;
    }

    pub fn rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d * self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                m.set(i, j, self.get(j, i));
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        debug_assert_eq!(self.d, rhs.d);
        let mut m = Mat::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                let mut acc = 0.0;
                for k in 0..self.d {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn matvec(&self, v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.d {
            let mut acc = 0.0;
            for j in 0..self.d {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut m = *self;
        for v in m.a.iter_mut() {
            *v *= c;
        }
        m
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        let mut m = *self;
        for (v, w) in m.a.iter_mut().zip(rhs.a.iter()) {
            *v += w;
        }
        m
    }

    pub fn symmetrize(&self) -> Mat {
        self.add(&self.transpose()).scale(0.5)
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn frobenius(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                acc += self.get(i, j).powi(2);
            }
        }
        acc.sqrt()
    }

    pub fn det(&self) -> f64 {
        match self.d {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                self.get(0, 0)
                    * (self.get(1, 1) * self.get(2, 2) - self.get(1, 2) * self.get(2, 1))
                    - self.get(0, 1)
                        * (self.get(1, 0) * self.get(2, 2) - self.get(1, 2) * self.get(2, 0))
                    + self.get(0, 2)
                        * (self.get(1, 0) * self.get(2, 1) - self.get(1, 1) * self.get(2, 0))
            }
        }
    }

    pub fn inverse(&self) -> Result<Mat> {
        let det = self.det();
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(Error::Degenerate(format!("singular matrix, det = {det}")));
        }
        let mut m = Mat::zeros(self.d);
        match self.d {
            1 => m.set(0, 0, 1.0 / det),
            2 => {
                m.set(0, 0, self.get(1, 1) / det);
                m.set(0, 1, -self.get(0, 1) / det);
                m.set(1, 0, -self.get(1, 0) / det);
                m.set(1, 1, self.get(0, 0) / det);
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
                        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
                        let cof = self.get(r0, c0) * self.get(r1, c1)
                            - self.get(r0, c1) * self.get(r1, c0);
                        m.set(j, i, cof / det);
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and an
/// orthonormal matrix whose columns are the eigenvectors.
pub fn sym_eigen(m: &Mat) -> ([f64; 3], Mat) {
    match m.d {
        1 => ([m.get(0, 0), 0.0, 0.0], Mat::identity(1)),
        2 => {
            let (a, b, c) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
            let half_tr = 0.5 * (a + c);
            let disc = (0.5 * (a - c)).hypot(b);
            let l0 = half_tr - disc;
            let l1 = half_tr + disc;
            let mut v = Mat::identity(2);
            if b.abs() > 1e-300 {
                // Eigenvector for l1: (b, l1 - a), normalized.
                let (vx, vy) = (b, l1 - a);
                let norm = vx.hypot(vy);
                v.set(0, 1, vx / norm);
                v.set(1, 1, vy / norm);
                v.set(0, 0, -vy / norm);
                v.set(1, 0, vx / norm);
            } else if a > c {
                // Already diagonal but out of order: swap the basis vectors.
                v.set(0, 0, 0.0);
                v.set(1, 0, 1.0);
                v.set(0, 1, 1.0);
                v.set(1, 1, 0.0);
            }
            ([l0, l1, 0.0], v)
        }
        _ => jacobi3(m),
    }
}

fn jacobi3(m: &Mat) -> ([f64; 3], Mat) {
    let mut a = *m;
    let mut v = Mat::identity(3);
    for _sweep in 0..64 {
        let off = a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2);
        if off <= 1e-30 * a.frobenius().powi(2).max(1e-300) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a.get(p, q);
            if apq.abs() < 1e-300 {
                continue;
            }
            let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // Rotate rows/columns p and q.
            for k in 0..3 {
                let akp = a.get(k, p);
                let akq = a.get(k, q);
                a.set(k, p, c * akp - s * akq);
                a.set(k, q, s * akp + c * akq);
            }
            for k in 0..3 {
                let apk = a.get(p, k);
                let aqk = a.get(q, k);
                a.set(p, k, c * apk - s * aqk);
                a.set(q, k, s * apk + c * aqk);
            }
            for k in 0..3 {
                let vkp = v.get(k, p);
                let vkq = v.get(k, q);
                v.set(k, p, c * vkp - s * vkq);
                v.set(k, q, s * vkp + c * vkq);
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let mut vals = [0.0; 3];
    let mut vecs = Mat::zeros(3);
    for (slot, &src) in order.iter().enumerate() {
        vals[slot] = a.get(src, src);
        for k in 0..3 {
            vecs.set(k, slot, v.get(k, src));
        }
    }
    (vals, vecs)
}

/// Largest singular value: `sqrt(lambda_max(M^T M))`.
pub fn op_norm(m: &Mat) -> f64 {
    let gram = m.transpose().mul(m);
    let (vals, _) = sym_eigen(&gram);
    vals[m.d - 1].max(0.0).sqrt()
}

/// Symmetric square root of an SPD matrix.
pub fn sqrt_spd(m: &Mat) -> Result<Mat> {
    let (vals, vecs) = sym_eigen(m);
    for i in 0..m.d {
        if vals[i] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "matrix not positive definite, eigenvalue {}",
                vals[i]
            )));
        }
    }
    let mut s = Mat::zeros(m.d);
    for i in 0..m.d {
        s.set(i, i, vals[i].sqrt());
    }
    Ok(vecs.mul(&s).mul(&vecs.transpose()))
}

/// Eigenvalue clamp from below, preserving eigenvectors.
pub fn clamp_eigenvalues(m: &Mat, floor: f64) -> Mat {
    let (vals, vecs) = sym_eigen(m);
    let mut s = Mat::zeros(m.d);
    for i in 0..m.d {
        s.set(i, i, vals[i].max(floor));
    }
    vecs.mul(&s).mul(&vecs.transpose())
}

pub fn norm3(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
