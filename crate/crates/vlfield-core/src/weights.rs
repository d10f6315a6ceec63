//! Matrix weight fields, reducing operators, Muckenhoupt-type constants in
//! the multiplier convention, and a reverse Holder probe.
//!
//! A reducing operator for a cube `Q` is a constant SPD matrix `A` whose
//! vector norm `|A u|` is equivalent to the cube-localized norm functional
//! `N(u) = |Q|^(-1/p_Q) || |W(.) u| 1_Q ||_{p(.)}`. It is realized by the
//! minimum-volume centered ellipsoid of the boundary points `u_j / N(u_j)`
//! over the fit direction set, rescaled so the smallest fit ratio
//! `|A u| / N(u)` is one. Certificates re-measure the sandwich on a held-out
//! direction set and are stored, never assumed.

use std::sync::Arc;

use rayon::prelude::*;

use crate::directions::{default_count, DirectionSet};
use crate::domain::CubeFamily;
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::field::ScalarField;
use crate::linalg::{clamp_eigenvalues, op_norm, Mat};
use crate::mvee::mvee;
use crate::varnorm::{char_norm, luxemburg, luxemburg_norm_on};

/// Eigenvalue floor applied at ingestion; keeps every cell invertible.
pub const EIGENVALUE_FLOOR: f64 = 1e-8;
/// Asymmetry tolerance at ingestion, relative to the Frobenius norm.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Per-cell symmetric positive-definite `d x d` matrices with cached
/// inverses and operator norms.
#[derive(Debug, Clone)]
pub struct MatrixWeightField {
    domain: crate::domain::LatticeDomain,
    d: usize,
    mats: Vec<Mat>,
    invs: Vec<Mat>,
    op_norms: Vec<f64>,
    inv_op_norms: Vec<f64>,
}

impl MatrixWeightField {
    pub fn from_mats(domain: &crate::domain::LatticeDomain, d: usize, mats: Vec<Mat>) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::Data(format!("matrix dimension must be 1..=3, got {d}")));
        }
        if mats.len() != domain.num_cells() {
            return Err(Error::Data(format!(
                "expected {} cells, got {}",
                domain.num_cells(),
                mats.len()
            )));
        }
        let mut fixed = Vec::with_capacity(mats.len());
        for m in &mats {
            if m.d != d {
                return Err(Error::Data("matrix entry with mismatched dimension".into()));
            }
            let scale = m.frobenius().max(1.0);
            if !scale.is_finite() {
                return Err(Error::Data("non-finite matrix entry".into()));
            }
            if m.asymmetry() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::Data(format!(
                    "asymmetric weight entry (asymmetry {})",
                    m.asymmetry()
                )));
            }
            let sym = m.symmetrize();
            let (vals, _) = crate::linalg::sym_eigen(&sym);
            // Reconstruction perturbs entries at rounding level, so healthy
            // matrices pass through untouched and ingestion is idempotent.
            if vals[0] >= EIGENVALUE_FLOOR {
                fixed.push(sym);
            } else {
                fixed.push(clamp_eigenvalues(&sym, EIGENVALUE_FLOOR));
            }
        }
        let invs = fixed.iter().map(|m| m.inverse()).collect::<Result<Vec<_>>>()?;
        let op_norms = fixed.iter().map(op_norm).collect();
        let inv_op_norms = invs.iter().map(op_norm).collect();
        Ok(MatrixWeightField { domain: *domain, d, mats: fixed, invs, op_norms, inv_op_norms })
    }

    pub fn from_fn(
        domain: &crate::domain::LatticeDomain,
        d: usize,
        mut f: impl FnMut(&[f64]) -> Mat,
    ) -> Result<Self> {
        let mats = (0..domain.num_cells())
            .map(|i| f(&domain.cell_center(i)[..domain.dim()]))
            .collect();
        Self::from_mats(domain, d, mats)
    }

    pub fn identity(domain: &crate::domain::LatticeDomain, d: usize) -> Result<Self> {
        Self::from_mats(domain, d, vec![Mat::identity(d); domain.num_cells()])
    }

    pub fn constant(domain: &crate::domain::LatticeDomain, m: Mat) -> Result<Self> {
        Self::from_mats(domain, m.d, vec![m; domain.num_cells()])
    }

    pub fn from_scalar(w: &ScalarField) -> Result<Self> {
        let mats = w.values().iter().map(|&v| Mat::scalar(v)).collect();
        Self::from_mats(w.domain(), 1, mats)
    }

    pub fn domain(&self) -> &crate::domain::LatticeDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mat(&self, cell: usize) -> &Mat {
        &self.mats[cell]
    }

    pub fn inv(&self, cell: usize) -> &Mat {
        &self.invs[cell]
    }

    pub fn op_norm_at(&self, cell: usize) -> f64 {
        self.op_norms[cell]
    }

    pub fn inv_op_norm_at(&self, cell: usize) -> f64 {
        self.inv_op_norms[cell]
    }

    /// The pointwise inverse weight `W^{-1}` as a field of its own.
    pub fn inverse_field(&self) -> MatrixWeightField {
        MatrixWeightField {
            domain: self.domain,
            d: self.d,
            mats: self.invs.clone(),
            invs: self.mats.clone(),
            op_norms: self.inv_op_norms.clone(),
            inv_op_norms: self.op_norms.clone(),
        }
    }

    /// Scalar field `x -> |W(x) u|`.
    pub fn scalarized(&self, u: &[f64]) -> ScalarField {
        let values = self
            .mats
            .iter()
            .map(|m| {
                let mu = m.matvec(u);
                mu[..self.d].iter().map(|x| x * x).sum::<f64>().sqrt()
            })
            .collect();
        ScalarField::new(&self.domain, values).expect("finite by construction")
    }
}

/// Fit and held-out direction sets.
#[derive(Debug, Clone)]
pub struct DirectionPair {
    pub fit: Arc<DirectionSet>,
    pub test: Arc<DirectionSet>,
}

impl DirectionPair {
    pub fn defaults(d: usize) -> Self {
        let m = default_count(d);
        DirectionPair { fit: DirectionSet::fit(d, m), test: DirectionSet::test(d, m) }
    }

    pub fn with_count(d: usize, m: usize) -> Self {
        DirectionPair { fit: DirectionSet::fit(d, m), test: DirectionSet::test(d, m) }
    }
}

/// A constant SPD matrix equivalent to the cube-localized norm functional,
/// with held-out sandwich certificates `c_lo <= |A u| / N(u) <= c_hi`.
#[derive(Debug, Clone)]
pub struct ReducingOperator {
    pub matrix: Mat,
    pub c_lo: f64,
    pub c_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Primal,
    Dual,
}

/// `N(u) = |Q|^(-1/p_Q) || |W(.) u| 1_Q ||_{p(.)}` over the cube cover.
/// The uniform case is fused into a single power of the weight/measure
/// ratio, which is exactly one for whole-cell covers; constant weights then
/// reduce exactly, keeping threshold comparisons downstream stable.
fn norm_functional(
    w: &MatrixWeightField,
    side: Side,
    exps: &[f64],
    cover: &[(u32, f64)],
    measure: f64,
    measure_pow: f64,
    u: &[f64],
) -> f64 {
    let mut values = Vec::with_capacity(cover.len());
    let mut e = Vec::with_capacity(cover.len());
    let mut weights = Vec::with_capacity(cover.len());
    for &(cell, wt) in cover {
        let m = match side {
            Side::Primal => w.mat(cell as usize),
            Side::Dual => w.inv(cell as usize),
        };
        let mu = m.matvec(u);
        values.push(mu[..w.d].iter().map(|x| x * x).sum::<f64>().sqrt());
        e.push(exps[cell as usize]);
        weights.push(wt);
    }
    let uniform = values.windows(2).all(|v| v[0] == v[1])
        && e.windows(2).all(|x| x[0] == x[1]);
    if uniform {
        let total: f64 = weights.iter().sum();
        return values[0] * (total / measure).powf(1.0 / e[0]);
    }
    measure_pow * luxemburg(&values, &e, &weights).0
}

fn reducing_for_side(
    w: &MatrixWeightField,
    exp: &ExponentField,
    family: &CubeFamily,
    cube: usize,
    dirs: &DirectionPair,
    side: Side,
) -> Result<ReducingOperator> {
    let d = w.dim();
    let cover = family.cover(cube);
    let geom = &family.cube(cube).geom;
    let p_q = exp.harmonic_mean(geom, cover);
    let measure = family.measure(cube);
    let measure_pow = measure.powf(-1.0 / p_q);

    let mut boundary = Vec::with_capacity(dirs.fit.len());
    let mut fit_norms = Vec::with_capacity(dirs.fit.len());
    for u in dirs.fit.iter() {
        let n = norm_functional(w, side, exp.values(), cover, measure, measure_pow, u);
        if !(n > 0.0) {
            return Err(Error::Degenerate(
                "norm functional vanished on a direction".into(),
            ));
        }
        let mut pt = [0.0; 3];
        for a in 0..d {
            pt[a] = u[a] / n;
        }
        boundary.push(pt);
        fit_norms.push(n);
    }
    let ell = mvee(d, &boundary)?;

    // Rescale so the tightest fit direction touches the ellipsoid norm from
    // below; the certificates then track the inscribed-side sandwich.
    let mut c_lo_fit = f64::INFINITY;
    for (j, u) in dirs.fit.iter().enumerate() {
        let au = ell.a.matvec(u);
        let ratio = au[..d].iter().map(|x| x * x).sum::<f64>().sqrt() / fit_norms[j];
        c_lo_fit = c_lo_fit.min(ratio);
    }
    let a = ell.a.scale(1.0 / c_lo_fit);

    let mut c_lo = f64::INFINITY;
    let mut c_hi = 0.0f64;
    for u in dirs.test.iter() {
        let n = norm_functional(w, side, exp.values(), cover, measure, measure_pow, u);
        if !(n > 0.0) {
            return Err(Error::Degenerate(
                "norm functional vanished on a test direction".into(),
            ));
        }
        let au = a.matvec(u);
        let ratio = au[..d].iter().map(|x| x * x).sum::<f64>().sqrt() / n;
        c_lo = c_lo.min(ratio);
        c_hi = c_hi.max(ratio);
    }
    Ok(ReducingOperator { matrix: a, c_lo, c_hi })
}

/// Reducing operator for `(W, p)` on one family cube.
pub fn reducing_operator(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    cube: usize,
    dirs: &DirectionPair,
) -> Result<ReducingOperator> {
    reducing_for_side(w, p, family, cube, dirs, Side::Primal)
}

/// Dual reducing operator: the norm function of `W^{-1}` under `p'`.
pub fn dual_reducing_operator(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    cube: usize,
    dirs: &DirectionPair,
) -> Result<ReducingOperator> {
    reducing_for_side(w, &p.conjugate(), family, cube, dirs, Side::Dual)
}

/// Primal and dual reducing operators for every cube of a family, computed
/// once and shared by the maximal, decomposition, and sparse machinery.
#[derive(Debug, Clone)]
pub struct ReducingCache {
    pub primal: Vec<ReducingOperator>,
    pub dual: Vec<ReducingOperator>,
    dual_invs: Vec<Mat>,
}

impl ReducingCache {
    pub fn build(
        w: &MatrixWeightField,
        p: &ExponentField,
        family: &CubeFamily,
        dirs: &DirectionPair,
    ) -> Result<Self> {
        let pc = p.conjugate();
        let primal: Vec<ReducingOperator> = (0..family.len())
            .into_par_iter()
            .map(|q| reducing_for_side(w, p, family, q, dirs, Side::Primal))
            .collect::<Result<_>>()?;
        let dual: Vec<ReducingOperator> = (0..family.len())
            .into_par_iter()
            .map(|q| reducing_for_side(w, &pc, family, q, dirs, Side::Dual))
            .collect::<Result<_>>()?;
        let dual_invs = dual.iter().map(|r| r.matrix.inverse()).collect::<Result<Vec<_>>>()?;
        Ok(ReducingCache { primal, dual, dual_invs })
    }

    pub fn len(&self) -> usize {
        self.primal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty()
    }

    pub fn dual_inv(&self, cube: usize) -> &Mat {
        &self.dual_invs[cube]
    }

    /// Worst certificate spread `c_hi / c_lo` across both sides.
    pub fn worst_certificate(&self) -> f64 {
        self.primal
            .iter()
            .chain(self.dual.iter())
            .map(|r| r.c_hi / r.c_lo)
            .fold(0.0, f64::max)
    }
}

/// A supremum over cubes with its attaining cube.
#[derive(Debug, Clone, Copy)]
pub struct FamilySup {
    pub value: f64,
    pub argmax: usize,
}

fn family_sup(per_cube: Vec<f64>) -> FamilySup {
    let mut best = 0usize;
    for q in 1..per_cube.len() {
        if per_cube[q] > per_cube[best] {
            best = q;
        }
    }
    FamilySup { value: per_cube[best], argmax: best }
}

/// Scalar constant `sup_Q |Q|^{-1} ||w 1_Q||_p ||w^{-1} 1_Q||_{p'}`.
pub fn scalar_ap_constant(
    w: &ScalarField,
    p: &ExponentField,
    family: &CubeFamily,
) -> Result<FamilySup> {
    if family.is_empty() {
        return Err(Error::Config("constant over an empty family".into()));
    }
    if w.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::Data("scalar weight must be positive on every cell".into()));
    }
    let w_inv = w.map(|v| 1.0 / v)?;
    let pc = p.conjugate();
    let per_cube: Vec<f64> = (0..family.len())
        .into_par_iter()
        .map(|q| {
            let n1 = luxemburg_norm_on(w, p, family, q);
            let n2 = luxemburg_norm_on(&w_inv, &pc, family, q);
            n1 * n2 / family.measure(q)
        })
        .collect();
    Ok(family_sup(per_cube))
}

/// Matrix constant: for each cube the mixed norm
/// `|Q|^{-1} || x -> || |W(x) W^{-1}(y)|_op 1_Q(y) ||_{p'(.),y} ||_{p(.),x}`.
pub fn matrix_ap_constant(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
) -> Result<FamilySup> {
    if family.is_empty() {
        return Err(Error::Config("constant over an empty family".into()));
    }
    let pc = p.conjugate();
    let per_cube: Vec<f64> = (0..family.len())
        .into_par_iter()
        .map(|q| {
            let cover = family.cover(q);
            let inner: Vec<f64> = cover
                .par_iter()
                .map(|&(x_cell, _)| {
                    let wx = w.mat(x_cell as usize);
                    let mut values = Vec::with_capacity(cover.len());
                    let mut exps = Vec::with_capacity(cover.len());
                    let mut wts = Vec::with_capacity(cover.len());
                    for &(y_cell, wt) in cover {
                        values.push(op_norm(&wx.mul(w.inv(y_cell as usize))));
                        exps.push(pc.get(y_cell as usize));
                        wts.push(wt);
                    }
                    luxemburg(&values, &exps, &wts).0
                })
                .collect();
            let mut exps = Vec::with_capacity(cover.len());
            let mut wts = Vec::with_capacity(cover.len());
            for &(cell, wt) in cover {
                exps.push(p.get(cell as usize));
                wts.push(wt);
            }
            luxemburg(&inner, &exps, &wts).0 / family.measure(q)
        })
        .collect();
    Ok(family_sup(per_cube))
}

/// Reduced constant `sup_Q |A_Q Abar_Q|_op` from a cache.
pub fn reduced_ap_constant(cache: &ReducingCache) -> Result<FamilySup> {
    if cache.is_empty() {
        return Err(Error::Config("constant over an empty family".into()));
    }
    let per_cube: Vec<f64> = cache
        .primal
        .iter()
        .zip(&cache.dual)
        .map(|(a, b)| op_norm(&a.matrix.mul(&b.matrix)))
        .collect();
    Ok(family_sup(per_cube))
}

/// Ratio of the reduced constants of `(W, p)` and `(W^{-1}, p')`; the two
/// agree up to ellipsoid tolerance because the defining norm functions swap.
pub fn symmetry_check(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    dirs: &DirectionPair,
) -> Result<f64> {
    let forward = ReducingCache::build(w, p, family, dirs)?;
    let backward = ReducingCache::build(&w.inverse_field(), &p.conjugate(), family, dirs)?;
    let a = reduced_ap_constant(&forward)?.value;
    let b = reduced_ap_constant(&backward)?.value;
    Ok(a / b)
}

/// Max over directions of `[|W u|] / (4 [W])`; at most `1 + 1e-6` when the
/// scalarization bound holds.
pub fn scalarization_check(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    dirs: &[&[f64]],
    matrix_constant: f64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for u in dirs {
        let wu = w.scalarized(u);
        let scalar = scalar_ap_constant(&wu, p, family)?;
        worst = worst.max(scalar.value / (4.0 * matrix_constant));
    }
    Ok(worst)
}

/// One row of the reverse Holder probe.
#[derive(Debug, Clone, Copy)]
pub struct ProbeRow {
    pub r: f64,
    /// Tightest constant making the inequality hold over the family.
    pub c_tight: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub rows: Vec<ProbeRow>,
    pub largest_passing: Option<f64>,
}

/// Checks `|Q|^{-1/(r p_Q)} ||w 1_Q||_{r p(.)} <= C |Q|^{-1/p_Q} ||w 1_Q||_{p(.)}`
/// over the family for each `r` in the grid; returns the tightest `C` per
/// `r` and the largest `r` passing within the budget.
pub fn reverse_holder_probe(
    w: &ScalarField,
    p: &ExponentField,
    family: &CubeFamily,
    r_grid: &[f64],
    c_budget: f64,
) -> Result<ProbeResult> {
    if w.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::Data("weight must be positive".into()));
    }
    let base: Vec<f64> = (0..family.len())
        .into_par_iter()
        .map(|q| {
            let p_q = p.harmonic_mean(&family.cube(q).geom, family.cover(q));
            let norm = luxemburg_norm_on(w, p, family, q);
            family.measure(q).powf(-1.0 / p_q) * norm
        })
        .collect();
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if r <= 1.0 {
            return Err(Error::Config(format!("probe exponents must exceed 1, got {r}")));
        }
        let rp = p.scaled(r)?;
        let per_cube: Vec<f64> = (0..family.len())
            .into_par_iter()
            .map(|q| {
                let p_q = p.harmonic_mean(&family.cube(q).geom, family.cover(q));
                let norm = luxemburg_norm_on(w, &rp, family, q);
                let lhs = family.measure(q).powf(-1.0 / (r * p_q)) * norm;
                lhs / base[q]
            })
            .collect();
        let c_tight = per_cube.iter().fold(0.0f64, |m, &v| m.max(v));
        rows.push(ProbeRow { r, c_tight });
    }
    let largest_passing = rows
        .iter()
        .filter(|row| row.c_tight <= c_budget)
        .map(|row| row.r)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(ProbeResult { rows, largest_passing })
}

/// Char-norm sandwich data for one cube:
/// `(1/6) |Q|^{1/p_Q} <= ||1_Q||_p <= 8 [1] |Q|^{1/p_Q}`.
#[derive(Debug, Clone, Copy)]
pub struct CharNormBounds {
    pub lower: f64,
    pub norm: f64,
    pub upper: f64,
}

pub fn char_norm_bounds(
    p: &ExponentField,
    family: &CubeFamily,
    cube: usize,
    one_constant: f64,
) -> CharNormBounds {
    let p_q = p.harmonic_mean(&family.cube(cube).geom, family.cover(cube));
    let pow = family.measure(cube).powf(1.0 / p_q);
    CharNormBounds {
        lower: pow / 6.0,
        norm: char_norm(p, family, cube),
        upper: 8.0 * one_constant * pow,
    }
}
