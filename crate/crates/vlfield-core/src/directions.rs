//! Antipodally symmetric unit direction sets shared by the reducing-operator
//! and convex-body machinery.
//!
//! The fit set drives ellipsoid construction and always contains the signed
//! coordinate axes; the test set is a rotated copy used for held-out
//! certificates. Constructions are deterministic.

use std::sync::Arc;

use crate::domain::MAX_DIM;

pub fn default_count(d: usize) -> usize {
    match d {
        1 => 2,
        2 => 64,
        _ => 512,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    d: usize,
    dirs: Vec<[f64; MAX_DIM]>,
}

impl DirectionSet {
    /// Primary set: contains all `+-e_i`, antipodally symmetric, evenly
    /// spread (uniform circle in d=2, spiral plus axes in d=3).
    pub fn fit(d: usize, m: usize) -> Arc<DirectionSet> {
        Arc::new(match d {
            1 => DirectionSet { d, dirs: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]] },
            2 => DirectionSet { d, dirs: circle(m.max(4), 0.0) },
            _ => DirectionSet { d, dirs: sphere(m.max(16), 0.5, true) },
        })
    }

    /// Held-out set, disjoint from the fit set except in d=1.
    pub fn test(d: usize, m: usize) -> Arc<DirectionSet> {
        Arc::new(match d {
            1 => DirectionSet { d, dirs: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]] },
            2 => DirectionSet { d, dirs: circle(m.max(4), 0.5) },
            _ => DirectionSet { d, dirs: sphere(m.max(16), 0.23, false) },
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn get(&self, j: usize) -> &[f64] {
        &self.dirs[j][..self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.iter().map(move |v| &v[..self.d])
    }

    /// Index of the antipode of direction `j` (constructions pair them).
    pub fn antipode(&self, j: usize) -> usize {
        let half = self.dirs.len() / 2;
        if j < half {
            j + half
        } else {
            j - half
        }
    }
}

fn circle(m: usize, phase: f64) -> Vec<[f64; MAX_DIM]> {
    // Multiples of 4 keep +-e1, +-e2 in the phase-0 set.
    let m = m.next_multiple_of(4);
    (0..m)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + phase) / m as f64;
            [th.cos(), th.sin(), 0.0]
        })
        .collect()
}

fn sphere(m: usize, offset: f64, with_axes: bool) -> Vec<[f64; MAX_DIM]> {
    let half = m / 2;
    let base = if with_axes { half - 3 } else { half };
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut upper: Vec<[f64; MAX_DIM]> = (0..base)
        .map(|i| {
            let z = (i as f64 + offset) / base as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = i as f64 * golden;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    if with_axes {
        upper.push([1.0, 0.0, 0.0]);
        upper.push([0.0, 1.0, 0.0]);
        upper.push([0.0, 0.0, 1.0]);
    }
    let mut dirs = upper.clone();
    dirs.extend(upper.iter().map(|v| [-v[0], -v[1], -v[2]]));
    dirs
}
