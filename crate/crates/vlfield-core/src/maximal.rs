//! Matrix-weighted maximal operators, their reduced auxiliary variants, the
//! dyadic stopping-time decomposition, and operator-norm harnesses.
//!
//! The weighted maximal field takes, per cell, the sup over family cubes
//! containing the cell center of the cube average of `|W(x) W^{-1}(y) f(y)|`.
//! The auxiliary variants replace `W(x)` by the cube's reducing operator
//! (primal) or by the inverse dual reducing operator, which makes the cube
//! average independent of the evaluation point and is what the stopping-time
//! decomposition runs on. Cube averages are computed once, in cover order,
//! and shared between the maximal fields and the decomposition so that the
//! superlevel-set identity holds bitwise.

use rayon::prelude::*;

use crate::domain::{CubeFamily, CubeId, LatticeDomain, Provenance};
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::field::{ScalarField, VectorField};
use crate::linalg::{norm3, op_norm, Mat};
use crate::varnorm::{char_norm, luxemburg, luxemburg_norm};
use crate::weights::{MatrixWeightField, ReducingCache};

/// Which maximal operator a field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpTag {
    /// Plain averages of `|f|` (the unweighted operator).
    HardyLittlewood,
    /// Norm averaging functionals `A_{p(.),Q}`.
    NormAveraging,
    /// `W(x) W^{-1}(y)` averages.
    ChristGoldberg,
    /// Reducing-operator averages.
    AuxPrime,
    /// Inverse dual reducing-operator averages.
    AuxDoublePrime,
}

/// Per-cell sup values with the attaining cube per cell. Cells covered by no
/// family cube carry zero and no argmax.
#[derive(Debug, Clone)]
pub struct MaximalField {
    pub op: OpTag,
    pub provenance: Provenance,
    values: Vec<f64>,
    argmax: Vec<Option<u32>>,
}

impl MaximalField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn argmax(&self, cell: usize) -> Option<u32> {
        self.argmax[cell]
    }

    pub fn uncovered_cells(&self) -> usize {
        self.argmax.iter().filter(|a| a.is_none()).count()
    }

    pub fn to_scalar_field(&self, domain: &LatticeDomain) -> Result<ScalarField> {
        ScalarField::new(domain, self.values.clone())
    }

    pub fn from_parts(
        op: OpTag,
        provenance: Provenance,
        values: Vec<f64>,
        argmax: Vec<Option<u32>>,
    ) -> Self {
        MaximalField { op, provenance, values, argmax }
    }
}

/// Per-cell sup of per-cube values over the cubes containing each cell,
/// first maximizer wins in family order.
fn sup_over_family(family: &CubeFamily, per_cube: &[f64], op: OpTag) -> MaximalField {
    let cells = family.domain().num_cells();
    let results: Vec<(f64, Option<u32>)> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut best = 0.0f64;
            let mut arg = None;
            for &q in family.cubes_containing(cell) {
                let v = per_cube[q as usize];
                if arg.is_none() || v > best {
                    best = v;
                    arg = Some(q);
                }
            }
            (best, arg)
        })
        .collect();
    MaximalField {
        op,
        provenance: family.provenance(),
        values: results.iter().map(|r| r.0).collect(),
        argmax: results.iter().map(|r| r.1).collect(),
    }
}

fn check_dims(f: &VectorField, w: &MatrixWeightField) -> Result<()> {
    if f.domain() != w.domain() {
        return Err(Error::Data("field and weight live on different domains".into()));
    }
    if f.dim() != w.dim() {
        return Err(Error::Data(format!(
            "vector dimension {} does not match weight dimension {}",
            f.dim(),
            w.dim()
        )));
    }
    Ok(())
}

/// Per-cell table of `g(y) = W^{-1}(y) f(y)`.
fn demodulated(f: &VectorField, w: &MatrixWeightField) -> Vec<[f64; 3]> {
    (0..f.domain().num_cells())
        .map(|cell| w.inv(cell).matvec(f.get(cell)))
        .collect()
}

/// The weighted maximal field `sup_Q avg_Q |W(x) W^{-1}(y) f(y)|`.
pub fn christ_goldberg(
    f: &VectorField,
    w: &MatrixWeightField,
    family: &CubeFamily,
) -> Result<MaximalField> {
    check_dims(f, w)?;
    if family.is_empty() {
        return Err(Error::Config("maximal operator over an empty family".into()));
    }
    let g = demodulated(f, w);
    let d = f.dim();
    let cells = family.domain().num_cells();
    let results: Vec<(f64, Option<u32>)> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let wx = w.mat(cell);
            let mut best = 0.0f64;
            let mut arg = None;
            for &q in family.cubes_containing(cell) {
                let mut acc = 0.0;
                for &(y, wt) in family.cover(q as usize) {
                    let v = wx.matvec(&g[y as usize][..d]);
                    acc += wt * norm3(&v[..d]);
                }
                let avg = acc / family.measure(q as usize);
                if arg.is_none() || avg > best {
                    best = avg;
                    arg = Some(q);
                }
            }
            (best, arg)
        })
        .collect();
    Ok(MaximalField {
        op: OpTag::ChristGoldberg,
        provenance: family.provenance(),
        values: results.iter().map(|r| r.0).collect(),
        argmax: results.iter().map(|r| r.1).collect(),
    })
}

/// Which reduced matrix multiplies the demodulated field in cube averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxSide {
    Prime,
    DoublePrime,
}

/// Cube averages `avg_Q |M_Q W^{-1}(y) f(y)|` with `M_Q` the primal reducing
/// operator (prime) or the inverse dual one (double prime). Shared by the
/// maximal fields and the stopping-time decomposition.
pub fn aux_cube_averages(
    f: &VectorField,
    w: &MatrixWeightField,
    family: &CubeFamily,
    cache: &ReducingCache,
    side: AuxSide,
) -> Result<Vec<f64>> {
    check_dims(f, w)?;
    if cache.len() != family.len() {
        return Err(Error::Config("reducing cache does not match the family".into()));
    }
    let g = demodulated(f, w);
    let d = f.dim();
    Ok((0..family.len())
        .into_par_iter()
        .map(|q| {
            let m: &Mat = match side {
                AuxSide::Prime => &cache.primal[q].matrix,
                AuxSide::DoublePrime => cache.dual_inv(q),
            };
            let mut acc = 0.0;
            for &(y, wt) in family.cover(q) {
                let v = m.matvec(&g[y as usize][..d]);
                acc += wt * norm3(&v[..d]);
            }
            acc / family.measure(q)
        })
        .collect())
}

/// Auxiliary maximal field with the cube's reducing operator in place of
/// `W(x)`.
pub fn aux_prime(
    f: &VectorField,
    w: &MatrixWeightField,
    family: &CubeFamily,
    cache: &ReducingCache,
) -> Result<MaximalField> {
    let avgs = aux_cube_averages(f, w, family, cache, AuxSide::Prime)?;
    Ok(sup_over_family(family, &avgs, OpTag::AuxPrime))
}

/// Auxiliary maximal field with the inverse dual reducing operator.
pub fn aux_double_prime(
    f: &VectorField,
    w: &MatrixWeightField,
    family: &CubeFamily,
    cache: &ReducingCache,
) -> Result<MaximalField> {
    let avgs = aux_cube_averages(f, w, family, cache, AuxSide::DoublePrime)?;
    Ok(sup_over_family(family, &avgs, OpTag::AuxDoublePrime))
}

/// Parent/child structure of a grid family, with roots = cubes whose parent
/// is not in the family (for full-range families: the parent leaves the box).
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    children: Vec<Vec<u32>>,
    parent: Vec<Option<u32>>,
    roots: Vec<u32>,
}

impl GridHierarchy {
    pub fn build(family: &CubeFamily) -> Result<GridHierarchy> {
        use std::collections::HashMap;
        let domain = family.domain();
        let mut index: HashMap<(u8, i32, [i64; 3]), u32> = HashMap::new();
        for (i, fc) in family.cubes().iter().enumerate() {
            match &fc.id {
                CubeId::Grid(c) => {
                    index.insert((c.shift, c.level, c.corner), i as u32);
                }
                CubeId::Custom(_) => {
                    return Err(Error::Config("hierarchy requires a grid family".into()));
                }
            }
        }
        let mut children = vec![Vec::new(); family.len()];
        let mut parent = vec![None; family.len()];
        let mut roots = Vec::new();
        for (i, fc) in family.cubes().iter().enumerate() {
            let CubeId::Grid(c) = &fc.id else { unreachable!() };
            match crate::domain::parent_cube(domain, c) {
                Ok(p) => match index.get(&(p.shift, p.level, p.corner)) {
                    Some(&pi) => {
                        parent[i] = Some(pi);
                        children[pi as usize].push(i as u32);
                    }
                    None => roots.push(i as u32),
                },
                Err(_) => roots.push(i as u32),
            }
        }
        Ok(GridHierarchy { children, parent, roots })
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    pub fn children(&self, i: usize) -> &[u32] {
        &self.children[i]
    }

    pub fn parent(&self, i: usize) -> Option<u32> {
        self.parent[i]
    }
}

/// Stopping-time decomposition at one threshold: the maximal grid cubes with
/// cube average above `lambda`. Root cubes (no in-box parent) that fire are
/// kept in a separate list because no parent average caps them.
#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub lambda: f64,
    /// Non-root stopping cubes, family indices, ascending.
    pub stopping: Vec<u32>,
    /// Root cubes whose average exceeds the threshold.
    pub root_hits: Vec<u32>,
    /// Cube averages for the whole family, shared with the maximal field.
    pub averages: Vec<f64>,
    /// Union of the selected cubes' member cells.
    pub omega: Vec<bool>,
}

impl CzDecomposition {
    pub fn selected(&self) -> impl Iterator<Item = u32> + '_ {
        self.stopping.iter().chain(self.root_hits.iter()).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.stopping.is_empty() && self.root_hits.is_empty()
    }

    pub fn omega_measure(&self, domain: &LatticeDomain) -> f64 {
        self.omega.iter().filter(|&&b| b).count() as f64 * domain.cell_measure()
    }
}

/// Top-down stopping-time selection on precomputed cube averages.
pub fn cz_decompose_with_averages(
    family: &CubeFamily,
    hierarchy: &GridHierarchy,
    averages: &[f64],
    lambda: f64,
) -> CzDecomposition {
    let mut stopping = Vec::new();
    let mut root_hits = Vec::new();
    let mut stack: Vec<u32> = hierarchy.roots().to_vec();
    let root_set: std::collections::HashSet<u32> = hierarchy.roots().iter().copied().collect();
    while let Some(q) = stack.pop() {
        if averages[q as usize] > lambda {
            if root_set.contains(&q) {
                root_hits.push(q);
            } else {
                stopping.push(q);
            }
        } else {
            stack.extend_from_slice(hierarchy.children(q as usize));
        }
    }
    stopping.sort_unstable();
    root_hits.sort_unstable();
    let mut omega = vec![false; family.domain().num_cells()];
    for q in stopping.iter().chain(root_hits.iter()) {
        for &cell in family.members(*q as usize) {
            omega[cell as usize] = true;
        }
    }
    CzDecomposition { lambda, stopping, root_hits, averages: averages.to_vec(), omega }
}

/// Full decomposition from scratch: reducing-operator averages, hierarchy,
/// then the top-down selection.
pub fn cz_decompose(
    f: &VectorField,
    w: &MatrixWeightField,
    family: &CubeFamily,
    cache: &ReducingCache,
    lambda: f64,
) -> Result<CzDecomposition> {
    let averages = aux_cube_averages(f, w, family, cache, AuxSide::Prime)?;
    let hierarchy = GridHierarchy::build(family)?;
    Ok(cz_decompose_with_averages(family, &hierarchy, &averages, lambda))
}

/// Validation outcome of one decomposition against its defining identities.
#[derive(Debug, Clone, Copy)]
pub struct CzValidation {
    /// Selected cubes are pairwise disjoint as member-cell sets.
    pub disjoint: bool,
    /// The selected union equals the superlevel set of the auxiliary maximal
    /// field, as exact cell-set equality.
    pub cover_exact: bool,
    /// All non-root stopping averages obey
    /// `lambda < a <= 24 4^n 2 [1] sqrt(d) (1+eps) lambda`.
    pub bounds_hold: bool,
    pub worst_upper_margin: f64,
}

pub fn cz_validate(
    family: &CubeFamily,
    decomp: &CzDecomposition,
    aux: &MaximalField,
    one_constant: f64,
    d: usize,
    eps: f64,
) -> CzValidation {
    let n = family.domain().dim() as i32;
    let cell_count = family.domain().num_cells();
    let mut owner = vec![u32::MAX; cell_count];
    let mut disjoint = true;
    for q in decomp.selected() {
        for &cell in family.members(q as usize) {
            if owner[cell as usize] != u32::MAX {
                disjoint = false;
            }
            owner[cell as usize] = q;
        }
    }
    let mut cover_exact = true;
    for cell in 0..cell_count {
        let in_omega = decomp.omega[cell];
        let above = aux.get(cell) > decomp.lambda;
        if in_omega != above {
            cover_exact = false;
        }
    }
    let constant = 24.0 * 4f64.powi(n) * 2.0 * one_constant * (d as f64).sqrt() * (1.0 + eps);
    let mut bounds_hold = true;
    let mut worst = f64::INFINITY;
    for &q in &decomp.stopping {
        let a = decomp.averages[q as usize];
        if a <= decomp.lambda {
            bounds_hold = false;
        }
        let margin = constant * decomp.lambda - a;
        worst = worst.min(margin);
        if margin < 0.0 {
            bounds_hold = false;
        }
    }
    CzValidation { disjoint, cover_exact, bounds_hold, worst_upper_margin: worst }
}

/// Report of the finite-sum comparison: the maximal field over arbitrary
/// lattice cubes against the sum of per-grid maximal fields.
#[derive(Debug, Clone, Copy)]
pub struct FiniteSumReport {
    pub max_ratio: f64,
    pub constant: f64,
    pub cells_compared: usize,
    pub pass: bool,
}

/// Checks `M'(custom family) <= C sum_t M'(grid t)` cellwise, with
/// `C = 6^(2n) 24 2 [1] sqrt(d) (1+eps)`.
pub fn finite_sum_bound_check(
    f: &VectorField,
    w: &MatrixWeightField,
    custom: &CubeFamily,
    custom_cache: &ReducingCache,
    grids: &[(&CubeFamily, &ReducingCache)],
    one_constant: f64,
    eps: f64,
) -> Result<FiniteSumReport> {
    let lhs = aux_prime(f, w, custom, custom_cache)?;
    let domain = f.domain();
    let mut rhs = vec![0.0f64; domain.num_cells()];
    for (fam, cache) in grids {
        let m = aux_prime(f, w, fam, cache)?;
        for (acc, v) in rhs.iter_mut().zip(m.values()) {
            *acc += v;
        }
    }
    let n = domain.dim() as i32;
    let constant =
        6f64.powi(2 * n) * 24.0 * 2.0 * one_constant * (w.dim() as f64).sqrt() * (1.0 + eps);
    let mut max_ratio = 0.0f64;
    let mut cells = 0usize;
    let mut pass = true;
    for cell in 0..domain.num_cells() {
        let l = lhs.get(cell);
        if l <= 0.0 {
            continue;
        }
        cells += 1;
        if rhs[cell] <= 0.0 {
            pass = false;
            max_ratio = f64::INFINITY;
            continue;
        }
        let ratio = l / rhs[cell];
        max_ratio = max_ratio.max(ratio);
        if ratio > constant {
            pass = false;
        }
    }
    Ok(FiniteSumReport { max_ratio, constant, cells_compared: cells, pass })
}

/// Sup over the family of `A_{u'(.),Q}(|W^{-1} A_Q|_op)` with `u' = r p'`.
#[derive(Debug, Clone, Copy)]
pub struct UniformBoundReport {
    pub sup: f64,
    pub argmax: usize,
    pub r: f64,
}

pub fn uniform_bound_check(
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    cache: &ReducingCache,
    r: f64,
) -> Result<UniformBoundReport> {
    if r <= 1.0 {
        return Err(Error::Config(format!("exponent inflation must exceed 1, got {r}")));
    }
    let u_prime = p.conjugate().scaled(r)?;
    let per_cube: Vec<f64> = (0..family.len())
        .into_par_iter()
        .map(|q| {
            let a_q = &cache.primal[q].matrix;
            let cover = family.cover(q);
            let mut values = Vec::with_capacity(cover.len());
            let mut exps = Vec::with_capacity(cover.len());
            let mut wts = Vec::with_capacity(cover.len());
            for &(cell, wt) in cover {
                values.push(op_norm(&w.inv(cell as usize).mul(a_q)));
                exps.push(u_prime.get(cell as usize));
                wts.push(wt);
            }
            let num = luxemburg(&values, &exps, &wts).0;
            let den = char_norm(&u_prime, family, q);
            num / den
        })
        .collect();
    let mut best = 0usize;
    for q in 1..per_cube.len() {
        if per_cube[q] > per_cube[best] {
            best = q;
        }
    }
    Ok(UniformBoundReport { sup: per_cube[best], argmax: best, r })
}

/// Which operator an operator-norm estimate drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    ChristGoldberg,
    AuxPrime,
    AuxDoublePrime,
    NormAveraging,
}

#[derive(Debug, Clone)]
pub struct OpNormEstimate {
    pub max_ratio: f64,
    pub worst_index: usize,
    pub ratios: Vec<f64>,
}

/// Max over the battery of `||Op f||_{p(.)} / ||f||_{p(.)}`.
pub fn operator_norm_estimate(
    op: OpKind,
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    cache: &ReducingCache,
    battery: &[VectorField],
) -> Result<OpNormEstimate> {
    let mut ratios = Vec::with_capacity(battery.len());
    for f in battery {
        let max_field = match op {
            OpKind::ChristGoldberg => christ_goldberg(f, w, family)?,
            OpKind::AuxPrime => aux_prime(f, w, family, cache)?,
            OpKind::AuxDoublePrime => aux_double_prime(f, w, family, cache)?,
            OpKind::NormAveraging => {
                let (vals, argmax) = crate::varnorm::norm_maximal(&f.magnitude(), p, family)?;
                MaximalField::from_parts(
                    OpTag::NormAveraging,
                    family.provenance(),
                    vals.values().to_vec(),
                    argmax,
                )
            }
        };
        let out = max_field.to_scalar_field(f.domain())?;
        let (num, _) = luxemburg_norm(&out, p)?;
        let (den, _) = luxemburg_norm(&f.magnitude(), p)?;
        if den == 0.0 {
            ratios.push(0.0);
        } else {
            ratios.push(num / den);
        }
    }
    let mut worst = 0usize;
    for i in 1..ratios.len() {
        if ratios[i] > ratios[worst] {
            worst = i;
        }
    }
    Ok(OpNormEstimate {
        max_ratio: ratios.get(worst).copied().unwrap_or(0.0),
        worst_index: worst,
        ratios,
    })
}

/// Pointwise domination of the primal auxiliary field by the norm maximal
/// field: `M' f <= 8 [1] d [W]^R (1+eps) M_{p(.)} |f|` on every cell.
pub fn aux_domination_check(
    f: &VectorField,
    w: &MatrixWeightField,
    p: &ExponentField,
    family: &CubeFamily,
    cache: &ReducingCache,
    one_constant: f64,
    reduced_constant: f64,
    eps: f64,
) -> Result<(bool, f64)> {
    let aux = aux_prime(f, w, family, cache)?;
    let (norm_max, _) = crate::varnorm::norm_maximal(&f.magnitude(), p, family)?;
    let constant = 8.0 * one_constant * w.dim() as f64 * reduced_constant * (1.0 + eps);
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    for cell in 0..f.domain().num_cells() {
        let lhs = aux.get(cell);
        if lhs <= 1e-14 {
            continue;
        }
        let ratio = lhs / (constant * norm_max.get(cell).max(1e-300));
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 + 1e-9 {
            pass = false;
        }
    }
    Ok((pass, worst_ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{cells_in_box, LatticeDomain};
    use crate::weights::DirectionPair;

    fn dom1(l: f64, j: i32) -> LatticeDomain {
        LatticeDomain::build(1, l, j).unwrap()
    }

    fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed | 1;
        move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn scalar_weight_one(d: &LatticeDomain) -> MatrixWeightField {
        MatrixWeightField::identity(d, 1).unwrap()
    }

    #[test]
    fn christ_goldberg_reduces_to_plain_maximal() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let mut rnd = rand_stream(3);
        let f = VectorField::from_fn(&d, 1, |_| [2.0 * rnd() - 1.0, 0.0, 0.0]).unwrap();
        let m = christ_goldberg(&f, &w, &fam).unwrap();
        // Independent oracle: plain averages of |f| over fresh covers.
        for cell in 0..d.num_cells() {
            let mut oracle = 0.0f64;
            for &q in fam.cubes_containing(cell) {
                let geom = fam.cube(q as usize).geom;
                let mut acc = 0.0;
                for (y, wt) in cells_in_box(&d, &geom) {
                    acc += wt * f.get(y as usize)[0].abs();
                }
                oracle = oracle.max(acc / geom.measure(&d));
            }
            assert!((m.get(cell) - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }
    }

    #[test]
    fn christ_goldberg_constant_weight_cancels() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let wm = Mat::from_rows(2, &[2.0, 0.5, 0.5, 1.0]);
        let w = MatrixWeightField::constant(&d, wm).unwrap();
        let id = MatrixWeightField::identity(&d, 2).unwrap();
        let mut rnd = rand_stream(7);
        let f = VectorField::from_fn(&d, 2, |_| [rnd() - 0.5, rnd() - 0.5, 0.0]).unwrap();
        let weighted = christ_goldberg(&f, &w, &fam).unwrap();
        let plain = christ_goldberg(&f, &id, &fam).unwrap();
        for cell in 0..d.num_cells() {
            assert!(
                (weighted.get(cell) - plain.get(cell)).abs() <= 1e-11 * plain.get(cell).max(1.0),
                "constant weight must cancel"
            );
        }
    }

    #[test]
    fn christ_goldberg_generic_vs_brute_force() {
        let d = dom1(1.0, 3);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let mut rnd = rand_stream(11);
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            let a = 1.0 + 0.5 * (3.0 * x[0]).sin();
            let b = 0.3 * x[0];
            Mat::from_rows(2, &[a, b, b, 1.2])
        })
        .unwrap();
        let f = VectorField::from_fn(&d, 2, |_| [rnd() - 0.5, rnd() - 0.5, 0.0]).unwrap();
        let m = christ_goldberg(&f, &w, &fam).unwrap();
        for cell in 0..d.num_cells() {
            let mut oracle = 0.0f64;
            for &q in fam.cubes_containing(cell) {
                let geom = fam.cube(q as usize).geom;
                let mut acc = 0.0;
                for (y, wt) in cells_in_box(&d, &geom) {
                    let gy = w.inv(y as usize).matvec(f.get(y as usize));
                    let v = w.mat(cell).matvec(&gy[..2]);
                    acc += wt * (v[0] * v[0] + v[1] * v[1]).sqrt();
                }
                oracle = oracle.max(acc / geom.measure(&d));
            }
            assert!((m.get(cell) - oracle).abs() <= 1e-12 * oracle.max(1e-6));
        }
    }

    #[test]
    fn aux_prime_trivial_weight_matches_plain() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let mut rnd = rand_stream(13);
        let f = VectorField::from_fn(&d, 1, |_| [rnd(), 0.0, 0.0]).unwrap();
        let aux = aux_prime(&f, &w, &fam, &cache).unwrap();
        let plain = christ_goldberg(&f, &w, &fam).unwrap();
        for cell in 0..d.num_cells() {
            assert!((aux.get(cell) - plain.get(cell)).abs() <= 1e-6 * plain.get(cell).max(1.0));
        }
    }

    #[test]
    fn aux_prime_generic_vs_brute_force() {
        // Independent oracle: fresh covers and direct sums per (cube, cell).
        let d = dom1(1.0, 3);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            Mat::from_rows(2, &[1.3 + 0.2 * x[0], 0.15, 0.15, 0.8 - 0.1 * x[0]])
        })
        .unwrap();
        let p = ExponentField::lh_family(&d, 2.0, 0.6).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(2)).unwrap();
        let mut rnd = rand_stream(41);
        let f = VectorField::from_fn(&d, 2, |_| [rnd() - 0.5, rnd() - 0.5, 0.0]).unwrap();
        let aux = aux_prime(&f, &w, &fam, &cache).unwrap();
        for cell in 0..d.num_cells() {
            let mut oracle = 0.0f64;
            for &q in fam.cubes_containing(cell) {
                let geom = fam.cube(q as usize).geom;
                let a_q = &cache.primal[q as usize].matrix;
                let mut acc = 0.0;
                for (y, wt) in cells_in_box(&d, &geom) {
                    let gy = w.inv(y as usize).matvec(f.get(y as usize));
                    let v = a_q.matvec(&gy[..2]);
                    acc += wt * (v[0] * v[0] + v[1] * v[1]).sqrt();
                }
                oracle = oracle.max(acc / geom.measure(&d));
            }
            assert!((aux.get(cell) - oracle).abs() <= 1e-12 * oracle.max(1e-6));
        }
    }

    #[test]
    fn aux_equivalence_envelopes() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            let t = 0.7 * x[0];
            let rot = Mat::from_rows(2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
            let r = x[0].abs().max(1e-3);
            rot.mul(&Mat::diag(2, &[r.powf(0.25), r.powf(-0.125)])).mul(&rot.transpose())
        })
        .unwrap();
        let p = ExponentField::two_step(&d, 1.8, 2.6).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(2)).unwrap();
        let reduced = crate::weights::reduced_ap_constant(&cache).unwrap().value;
        let mut rnd = rand_stream(17);
        let f = VectorField::from_fn(&d, 2, |_| [rnd() - 0.5, rnd() - 0.5, 0.0]).unwrap();
        let prime = aux_prime(&f, &w, &fam, &cache).unwrap();
        let dprime = aux_double_prime(&f, &w, &fam, &cache).unwrap();
        let envelope = 2.0 * 1.05f64.powi(2);
        for cell in 0..d.num_cells() {
            let (a, b) = (prime.get(cell), dprime.get(cell));
            if a <= 1e-12 || b <= 1e-12 {
                continue;
            }
            assert!(b <= envelope * a * (1.0 + 1e-9), "double-prime bound failed: {b} vs {a}");
            assert!(
                a <= envelope * reduced * b * (1.0 + 1e-9),
                "prime bound failed: {a} vs {b}"
            );
        }
    }

    #[test]
    fn maximal_sublinearity() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            Mat::from_rows(2, &[1.5 + x[0] * 0.2, 0.1, 0.1, 0.9])
        })
        .unwrap();
        let mut rnd = rand_stream(19);
        let f = VectorField::from_fn(&d, 2, |_| [rnd() - 0.5, rnd(), 0.0]).unwrap();
        let g = VectorField::from_fn(&d, 2, |_| [rnd(), rnd() - 0.7, 0.0]).unwrap();
        let sum = f.map_cells(|i, v| {
            let gv = g.get(i);
            [v[0] + gv[0], v[1] + gv[1], 0.0]
        });
        let mf = christ_goldberg(&f, &w, &fam).unwrap();
        let mg = christ_goldberg(&g, &w, &fam).unwrap();
        let ms = christ_goldberg(&sum, &w, &fam).unwrap();
        for cell in 0..d.num_cells() {
            assert!(ms.get(cell) <= mf.get(cell) + mg.get(cell) + 1e-10);
        }
    }

    #[test]
    fn aux_monotone_convergence_under_truncation() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let mut rnd = rand_stream(23);
        let f = VectorField::from_fn(&d, 1, |_| [8.0 * rnd(), 0.0, 0.0]).unwrap();
        let full = aux_prime(&f, &w, &fam, &cache).unwrap();
        let mut prev = vec![0.0f64; d.num_cells()];
        for cap in [1.0, 2.0, 4.0, 16.0] {
            let fk = f.truncate(cap);
            let mk = aux_prime(&fk, &w, &fam, &cache).unwrap();
            for cell in 0..d.num_cells() {
                assert!(mk.get(cell) + 1e-12 >= prev[cell], "ladder must be nondecreasing");
                assert!(mk.get(cell) <= full.get(cell) + 1e-12);
                prev[cell] = mk.get(cell);
            }
        }
        let fk = f.truncate(1e9);
        let mk = aux_prime(&fk, &w, &fam, &cache).unwrap();
        for cell in 0..d.num_cells() {
            assert!((mk.get(cell) - full.get(cell)).abs() <= 1e-12);
        }
    }

    #[test]
    fn cz_empty_for_zero_field() {
        let d = dom1(2.0, 3);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let f = VectorField::from_fn(&d, 1, |_| [0.0, 0.0, 0.0]).unwrap();
        let decomp = cz_decompose(&f, &w, &fam, &cache, 0.5).unwrap();
        assert!(decomp.is_empty());
        assert!(decomp.omega.iter().all(|&b| !b));
    }

    #[test]
    fn cz_hand_example_single_bump() {
        // Box [-2, 2), f = 1_[0,1), lambda = 1/2. The dyadic tree around the
        // support is [0,1) inside the root [0,2); the average over [0,1) is 1
        // > 1/2, over [0,2) exactly 1/2 (not above), so the only stopping
        // cube is [0,1).
        let d = dom1(2.0, 3);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let f = VectorField::from_fn(&d, 1, |x| {
            [if x[0] >= 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 }, 0.0, 0.0]
        })
        .unwrap();
        let decomp = cz_decompose(&f, &w, &fam, &cache, 0.5).unwrap();
        assert!(decomp.root_hits.is_empty(), "roots average 0 and 1/2, neither above 1/2");
        assert_eq!(decomp.stopping.len(), 1);
        let q = decomp.stopping[0] as usize;
        let CubeId::Grid(c) = &fam.cube(q).id else { panic!() };
        assert_eq!(c.level, 0);
        assert_eq!(c.corner[0], 0);
        let a = decomp.averages[q];
        assert!((a - 1.0).abs() < 1e-9);
        assert!(a <= 2.0 * 0.5 + 1e-9, "average capped by twice the threshold here");
    }

    #[test]
    fn cz_random_battery_identities() {
        let d = dom1(1.0, 5);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let hierarchy = GridHierarchy::build(&fam).unwrap();
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            Mat::from_rows(2, &[1.0 + 0.3 * x[0], 0.1, 0.1, 1.0 - 0.2 * x[0]])
        })
        .unwrap();
        let p = ExponentField::lh_family(&d, 2.0, 0.8).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(2)).unwrap();
        let (one, _) = crate::varnorm::one_constant(&p, &fam).unwrap();
        let mut rnd = rand_stream(29);
        for case in 0..5 {
            let f = VectorField::from_fn(&d, 2, |_| [2.0 * rnd() - 1.0, rnd(), 0.0]).unwrap();
            let averages = aux_cube_averages(&f, &w, &fam, &cache, AuxSide::Prime).unwrap();
            let aux = sup_over_family(&fam, &averages, OpTag::AuxPrime);
            for k in -3..3 {
                let lambda = 2f64.powi(k);
                let decomp = cz_decompose_with_averages(&fam, &hierarchy, &averages, lambda);
                let v = cz_validate(&fam, &decomp, &aux, one, 2, 0.05);
                assert!(v.disjoint, "case {case} lambda {lambda}: overlap");
                assert!(v.cover_exact, "case {case} lambda {lambda}: cover identity");
                assert!(
                    v.bounds_hold,
                    "case {case} lambda {lambda}: bound margin {}",
                    v.worst_upper_margin
                );
            }
        }
    }

    #[test]
    fn finite_sum_single_grid_is_its_own_term() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let (one, _) = crate::varnorm::one_constant(&p, &fam).unwrap();
        let mut rnd = rand_stream(31);
        let f = VectorField::from_fn(&d, 1, |_| [rnd(), 0.0, 0.0]).unwrap();
        let report =
            finite_sum_bound_check(&f, &w, &fam, &cache, &[(&fam, &cache)], one, 0.05).unwrap();
        assert!(report.pass);
        assert!(report.max_ratio <= 1.0 + 1e-12, "a grid family is its own term");
    }

    #[test]
    fn uniform_bound_trivial_weight() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = scalar_weight_one(&d);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1)).unwrap();
        let report = uniform_bound_check(&w, &p, &fam, &cache, 1.5).unwrap();
        assert!((report.sup - 1.0).abs() < 1e-6, "identity weight gives 1, got {}", report.sup);
    }

    #[test]
    fn operator_norm_constant_input() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = MatrixWeightField::identity(&d, 2).unwrap();
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(2)).unwrap();
        let f = VectorField::from_fn(&d, 2, |_| [3.0, 4.0, 0.0]).unwrap();
        let est = operator_norm_estimate(OpKind::AuxPrime, &w, &p, &fam, &cache, &[f]).unwrap();
        assert!((est.max_ratio - 1.0).abs() < 1e-6, "constant field gives ratio 1");
    }

    #[test]
    fn aux_domination_battery() {
        let d = dom1(1.0, 4);
        let fam = CubeFamily::grid(&d, 0).unwrap();
        let w = MatrixWeightField::from_fn(&d, 2, |x| {
            Mat::from_rows(2, &[1.0 + 0.4 * x[0].abs(), 0.2, 0.2, 1.3])
        })
        .unwrap();
        let p = ExponentField::two_step(&d, 1.7, 2.9).unwrap();
        let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(2)).unwrap();
        let (one, _) = crate::varnorm::one_constant(&p, &fam).unwrap();
        let reduced = crate::weights::reduced_ap_constant(&cache).unwrap().value;
        let mut rnd = rand_stream(37);
        for _ in 0..5 {
            let f =
                VectorField::from_fn(&d, 2, |_| [2.0 * rnd() - 1.0, rnd() - 0.2, 0.0]).unwrap();
            let (pass, worst) =
                aux_domination_check(&f, &w, &p, &fam, &cache, one, reduced, 0.05).unwrap();
            assert!(pass, "domination failed, worst ratio {worst}");
        }
    }
}
