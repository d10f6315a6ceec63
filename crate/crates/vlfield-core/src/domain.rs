//! Bounded dyadic lattice domains, grid cubes, shifted grids, and cell quadrature.
//!
//! The domain is the box `[-L, L)^n` partitioned into `(2L / h)^n` cells of
//! side `h = 2^-J`. Grid cubes come from the `2^n` shifted dyadic grids with
//! shift components in `{0, 1/3}`; a cube of level `k` has side `2^k` and
//! corner `2^k (m + (-1)^k t)` per axis. Because shifted corners involve
//! thirds, all cube/cell geometry is carried in integer "third units" of
//! length `h/3`, which makes containment tests and overlap weights exact.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A bounded box `[-L, L)^n` with a dyadic cell lattice of side `2^-J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeDomain {
    n: usize,
    l_pow: i32,
    level: i32,
    cells_per_axis: usize,
}

impl LatticeDomain {
    /// `n` spatial dimensions, half-width `l = 2^a` with `a >= 0`, refinement
    /// level `j` (cell side `2^-j`). The cell count per axis `2 l 2^j` must be
    /// a power of two at least 4, which holds exactly when `a + 1 + j >= 2`.
    pub fn build(n: usize, l: f64, j: i32) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Config(format!("dimension must be 1..=3, got {n}")));
        }
        if !(l.is_finite() && l >= 1.0 && l.fract() == 0.0 && (l as u64).is_power_of_two()) {
            return Err(Error::Config(format!(
                "half-width must be 2^a with a >= 0, got {l}"
            )));
        }
        let l_pow = (l as u64).trailing_zeros() as i32;
        let per_axis_pow = l_pow + 1 + j;
        if per_axis_pow < 2 {
            return Err(Error::Config(format!(
                "lattice too coarse: {} cells per axis, minimum 4",
                if per_axis_pow >= 0 { 1u64 << per_axis_pow } else { 0 }
            )));
        }
        if per_axis_pow > 20 {
            return Err(Error::Config(format!(
                "lattice too fine: 2^{per_axis_pow} cells per axis"
            )));
        }
        Ok(LatticeDomain {
            n,
            l_pow,
            level: j,
            cells_per_axis: 1usize << per_axis_pow,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Box half-width `L`.
    pub fn half_width(&self) -> f64 {
        pow2(self.l_pow)
    }

    pub fn l_pow(&self) -> i32 {
        self.l_pow
    }

    /// Refinement level `J`; cells have side `2^-J`.
    pub fn refinement(&self) -> i32 {
        self.level
    }

    pub fn cell_side(&self) -> f64 {
        pow2(-self.level)
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis.pow(self.n as u32)
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_side().powi(self.n as i32)
    }

    pub fn box_measure(&self) -> f64 {
        (2.0 * self.half_width()).powi(self.n as i32)
    }

    /// Length of one third-unit: `h/3`.
    pub fn unit_len(&self) -> f64 {
        self.cell_side() / 3.0
    }

    /// Box half-width in third units: `3 * 2^(a+J)`.
    pub fn half_width_units(&self) -> i64 {
        3 * (1i64 << (self.l_pow + self.level))
    }

    /// Row-major cell index from per-axis indices (axis 0 most significant).
    pub fn cell_index(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.n);
        let mut idx = 0usize;
        for &i in ix.iter().take(self.n) {
            debug_assert!(i < self.cells_per_axis);
            idx = idx * self.cells_per_axis + i;
        }
        idx
    }

    pub fn cell_coords(&self, idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        let mut rest = idx;
        for axis in (0..self.n).rev() {
            out[axis] = rest % self.cells_per_axis;
            rest /= self.cells_per_axis;
        }
        out
    }

    pub fn cell_center(&self, idx: usize) -> [f64; MAX_DIM] {
        let coords = self.cell_coords(idx);
        let h = self.cell_side();
        let l = self.half_width();
        let mut out = [0.0; MAX_DIM];
        for axis in 0..self.n {
            out[axis] = -l + (coords[axis] as f64 + 0.5) * h;
        }
        out
    }

    pub fn cell_center_norm(&self, idx: usize) -> f64 {
        let c = self.cell_center(idx);
        c[..self.n].iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[inline]
pub fn pow2(k: i32) -> f64 {
    (2.0f64).powi(k)
}

/// Axis-parallel box in third units, `[lo, lo + side)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitsBox {
    pub lo: [i64; MAX_DIM],
    pub side: i64,
}

impl UnitsBox {
    pub fn measure(&self, domain: &LatticeDomain) -> f64 {
        (self.side as f64 * domain.unit_len()).powi(domain.dim() as i32)
    }

    pub fn side_len(&self, domain: &LatticeDomain) -> f64 {
        self.side as f64 * domain.unit_len()
    }

    pub fn lo_coords(&self, domain: &LatticeDomain) -> [f64; MAX_DIM] {
        let u = domain.unit_len();
        let mut out = [0.0; MAX_DIM];
        for axis in 0..domain.dim() {
            out[axis] = self.lo[axis] as f64 * u;
        }
        out
    }

    pub fn inside_box(&self, domain: &LatticeDomain) -> bool {
        let half = domain.half_width_units();
        (0..domain.dim()).all(|a| self.lo[a] >= -half && self.lo[a] + self.side <= half)
    }

    pub fn contains(&self, other: &UnitsBox, n: usize) -> bool {
        (0..n).all(|a| {
            self.lo[a] <= other.lo[a] && other.lo[a] + other.side <= self.lo[a] + self.side
        })
    }

    /// Whether the center of the given cell lies in this box. Exact: computed
    /// in doubled third units so the half-unit center offset stays integral.
    pub fn contains_cell_center(&self, domain: &LatticeDomain, cell: usize) -> bool {
        let coords = domain.cell_coords(cell);
        let half = domain.half_width_units();
        for axis in 0..domain.dim() {
            let center2 = 2 * (-half + 3 * coords[axis] as i64) + 3;
            if center2 < 2 * self.lo[axis] || center2 >= 2 * (self.lo[axis] + self.side) {
                return false;
            }
        }
        true
    }
}

/// Grid shift: bitmask over axes, a set bit means shift component `1/3`.
pub type ShiftMask = u8;

/// All `2^n` shifts ordered lexicographically as tuples (axis 0 major, `0 < 1/3`).
pub fn shift_masks(n: usize) -> Vec<ShiftMask> {
    let mut out = Vec::with_capacity(1 << n);
    for code in 0u8..(1 << n) {
        let mut mask = 0u8;
        for axis in 0..n {
            if code & (1 << (n - 1 - axis)) != 0 {
                mask |= 1 << axis;
            }
        }
        out.push(mask);
    }
    out
}

/// A cube of the shifted dyadic grid `t`: side `2^k`, corner `2^k (m + (-1)^k t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    pub shift: ShiftMask,
    pub level: i32,
    pub corner: [i64; MAX_DIM],
}

impl Cube {
    pub fn side(&self) -> f64 {
        pow2(self.level)
    }

    pub fn measure(&self, n: usize) -> f64 {
        self.side().powi(n as i32)
    }

    /// Exact geometry in third units. `None` when the cube is finer than the
    /// cell lattice (`2^k < h`), in which case no quadrature is possible.
    pub fn units_box(&self, domain: &LatticeDomain) -> Option<UnitsBox> {
        let kj = self.level + domain.refinement();
        if kj < 0 || kj > 40 {
            return None;
        }
        let side = 3i64 << kj;
        let shift_off = if self.level % 2 == 0 { 1i64 << kj } else { -(1i64 << kj) };
        let mut lo = [0i64; MAX_DIM];
        for axis in 0..domain.dim() {
            let off = if self.shift & (1 << axis) != 0 { shift_off } else { 0 };
            lo[axis] = side * self.corner[axis] + off;
        }
        Some(UnitsBox { lo, side })
    }

    pub fn lo_coords(&self, domain: &LatticeDomain) -> [f64; MAX_DIM] {
        let s = self.side();
        let toff = if self.level % 2 == 0 { s / 3.0 } else { -s / 3.0 };
        let mut out = [0.0; MAX_DIM];
        for axis in 0..domain.dim() {
            let off = if self.shift & (1 << axis) != 0 { toff } else { 0.0 };
            out[axis] = s * self.corner[axis] as f64 + off;
        }
        out
    }

    /// Display label like `t=0 k=-2 m=(3,-1)`.
    pub fn label(&self, n: usize) -> String {
        let t: Vec<&str> = (0..n)
            .map(|a| if self.shift & (1 << a) != 0 { "1/3" } else { "0" })
            .collect();
        let m: Vec<String> = self.corner[..n].iter().map(|v| v.to_string()).collect();
        format!("t=({}) k={} m=({})", t.join(","), self.level, m.join(","))
    }
}

/// Parent cube in the same grid: side `2^(k+1)`, containing `q`.
/// Errors when the parent leaves the domain box.
pub fn parent_cube(domain: &LatticeDomain, q: &Cube) -> Result<Cube> {
    let n = domain.dim();
    let k1 = q.level + 1;
    // Work in units of 2^k/3 so both child and parent corners are integral:
    // child corner = 3 m + (-1)^k t3, parent corner = 6 m' + (-1)^(k+1) 2 t3.
    let child_sign = if q.level % 2 == 0 { 1i64 } else { -1 };
    let parent_sign = -child_sign;
    let mut corner = [0i64; MAX_DIM];
    for axis in 0..n {
        let bit = if q.shift & (1 << axis) != 0 { 1i64 } else { 0 };
        let child_lo = 3 * q.corner[axis] + child_sign * bit;
        let m = (child_lo - parent_sign * 2 * bit).div_euclid(6);
        let parent_lo = 6 * m + parent_sign * 2 * bit;
        debug_assert!(parent_lo <= child_lo && child_lo + 3 <= parent_lo + 6);
        corner[axis] = m;
    }
    let parent = Cube { shift: q.shift, level: k1, corner };
    let half = domain.half_width();
    let lo = parent.lo_coords(domain);
    let s = parent.side();
    for axis in 0..n {
        if lo[axis] < -half - 1e-12 || lo[axis] + s > half + 1e-12 {
            return Err(Error::OutOfDomain(format!(
                "parent of {} leaves the box",
                q.label(n)
            )));
        }
    }
    Ok(parent)
}

fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let f = a.div_euclid(b);
    if a.rem_euclid(b) != 0 {
        f + 1
    } else {
        f
    }
}

/// All grid-`t` cubes with levels in `k_min..=k_max` fully inside the box,
/// ordered by (level ascending, lexicographic corner).
pub fn enumerate_cubes(
    domain: &LatticeDomain,
    shift: ShiftMask,
    k_min: i32,
    k_max: i32,
) -> Result<Vec<Cube>> {
    if k_min + domain.refinement() < 0 {
        return Err(Error::Config(format!(
            "level {k_min} is finer than the cell lattice (J = {})",
            domain.refinement()
        )));
    }
    let n = domain.dim();
    let half = domain.half_width_units();
    let mut out = Vec::new();
    for k in k_min..=k_max {
        let kj = k + domain.refinement();
        if kj > 40 {
            break;
        }
        let side = 3i64 << kj;
        let shift_off = if k % 2 == 0 { 1i64 << kj } else { -(1i64 << kj) };
        // Per-axis integer range of m with the cube inside [-half, half).
        let mut ranges = [(0i64, -1i64); MAX_DIM];
        let mut empty = false;
        for axis in 0..n {
            let off = if shift & (1 << axis) != 0 { shift_off } else { 0 };
            let m_lo = div_ceil(-half - off, side);
            let m_hi = div_floor(half - off - side, side);
            if m_lo > m_hi {
                empty = true;
                break;
            }
            ranges[axis] = (m_lo, m_hi);
        }
        if empty {
            continue;
        }
        let mut corner = [0i64; MAX_DIM];
        emit_corners(&ranges[..n], 0, &mut corner, &mut |c| {
            out.push(Cube { shift, level: k, corner: *c });
        });
    }
    Ok(out)
}

fn emit_corners(
    ranges: &[(i64, i64)],
    axis: usize,
    corner: &mut [i64; MAX_DIM],
    f: &mut impl FnMut(&[i64; MAX_DIM]),
) {
    if axis == ranges.len() {
        f(corner);
        return;
    }
    for m in ranges[axis].0..=ranges[axis].1 {
        corner[axis] = m;
        emit_corners(ranges, axis + 1, corner, f);
    }
}

/// Cells overlapping `geom` with exact overlap weights (products of per-axis
/// intersection lengths). Weights sum to the box measure; zero-overlap cells
/// are excluded.
pub fn cells_in_box(domain: &LatticeDomain, geom: &UnitsBox) -> Vec<(u32, f64)> {
    let n = domain.dim();
    let half = domain.half_width_units();
    let cpa = domain.cells_per_axis() as i64;
    let mut axis_cells: [Vec<(i64, i64)>; MAX_DIM] = Default::default();
    for axis in 0..n {
        let b_lo = geom.lo[axis];
        let b_hi = geom.lo[axis] + geom.side;
        let i_lo = div_floor(b_lo + half, 3).max(0);
        let i_hi = div_floor(b_hi + half - 1, 3).min(cpa - 1);
        let mut v = Vec::new();
        for i in i_lo..=i_hi {
            let c_lo = -half + 3 * i;
            let c_hi = c_lo + 3;
            let overlap = b_hi.min(c_hi) - b_lo.max(c_lo);
            if overlap > 0 {
                v.push((i, overlap));
            }
        }
        axis_cells[axis] = v;
    }
    let mut out = Vec::new();
    let mut idx = [0usize; MAX_DIM];
    collect_cells(domain, &axis_cells[..n], 0, &mut idx, 1, &mut out);
    out
}

fn collect_cells(
    domain: &LatticeDomain,
    axis_cells: &[Vec<(i64, i64)>],
    axis: usize,
    ix: &mut [usize; MAX_DIM],
    units_acc: i64,
    out: &mut Vec<(u32, f64)>,
) {
    if axis == axis_cells.len() {
        let n = domain.dim() as i32;
        // Weight = (units / 3^n) h^n. The ratio comes first so whole cells
        // get the exact dyadic h^n; the h^n scaling is a power of two.
        let cell = domain.cell_index(&ix[..domain.dim()]);
        let w = (units_acc as f64 / 3f64.powi(n)) * domain.cell_measure();
        out.push((cell as u32, w));
        return;
    }
    for &(i, overlap) in &axis_cells[axis] {
        ix[axis] = i as usize;
        collect_cells(domain, axis_cells, axis + 1, ix, units_acc * overlap, out);
    }
}

/// Provenance of a cube family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Union of every shifted grid.
    AllGrids,
    /// One shifted grid.
    Grid(ShiftMask),
    /// Arbitrary lattice-aligned cubes.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CubeId {
    Grid(Cube),
    Custom(u32),
}

impl CubeId {
    pub fn label(&self, n: usize) -> String {
        match self {
            CubeId::Grid(c) => c.label(n),
            CubeId::Custom(i) => format!("custom#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyCube {
    pub id: CubeId,
    pub geom: UnitsBox,
}

/// An ordered family of cubes with precomputed quadrature covers (cells with
/// exact overlap weights) and membership lists (cells whose center lies in
/// the cube). Values are immutable after construction; consumers parallelize
/// over the stored order.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    domain: LatticeDomain,
    provenance: Provenance,
    cubes: Vec<FamilyCube>,
    covers: Vec<Vec<(u32, f64)>>,
    members: Vec<Vec<u32>>,
    cell_cubes: Vec<Vec<u32>>,
}

impl CubeFamily {
    pub fn from_cubes(domain: &LatticeDomain, cubes: Vec<Cube>, provenance: Provenance) -> Result<Self> {
        let entries = cubes
            .into_iter()
            .map(|c| {
                let geom = c.units_box(domain).ok_or_else(|| {
                    Error::Config(format!("cube {} finer than the cell lattice", c.label(domain.dim())))
                })?;
                if !geom.inside_box(domain) {
                    return Err(Error::OutOfDomain(format!(
                        "cube {} leaves the box",
                        c.label(domain.dim())
                    )));
                }
                Ok(FamilyCube { id: CubeId::Grid(c), geom })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_entries(domain, entries, provenance))
    }

    pub fn from_boxes(domain: &LatticeDomain, boxes: Vec<UnitsBox>) -> Result<Self> {
        for b in &boxes {
            if !b.inside_box(domain) {
                return Err(Error::OutOfDomain("custom cube leaves the box".into()));
            }
        }
        let entries = boxes
            .into_iter()
            .enumerate()
            .map(|(i, geom)| FamilyCube { id: CubeId::Custom(i as u32), geom })
            .collect();
        Ok(Self::from_entries(domain, entries, Provenance::Custom))
    }

    /// Full grid-`t` family over all levels from the cell side up to side `L`.
    pub fn grid(domain: &LatticeDomain, shift: ShiftMask) -> Result<Self> {
        let cubes = enumerate_cubes(domain, shift, -domain.refinement(), domain.l_pow())?;
        Self::from_cubes(domain, cubes, Provenance::Grid(shift))
    }

    /// Union of all `2^n` grid families, grids in lexicographic shift order.
    pub fn all_grids(domain: &LatticeDomain) -> Result<Self> {
        let mut cubes = Vec::new();
        for mask in shift_masks(domain.dim()) {
            cubes.extend(enumerate_cubes(domain, mask, -domain.refinement(), domain.l_pow())?);
        }
        let mut fam = Self::from_cubes(domain, cubes, Provenance::AllGrids)?;
        fam.provenance = Provenance::AllGrids;
        Ok(fam)
    }

    fn from_entries(domain: &LatticeDomain, cubes: Vec<FamilyCube>, provenance: Provenance) -> Self {
        let covers: Vec<Vec<(u32, f64)>> =
            cubes.iter().map(|c| cells_in_box(domain, &c.geom)).collect();
        let members: Vec<Vec<u32>> = cubes
            .iter()
            .zip(&covers)
            .map(|(c, cover)| {
                cover
                    .iter()
                    .map(|&(cell, _)| cell)
                    .filter(|&cell| c.geom.contains_cell_center(domain, cell as usize))
                    .collect()
            })
            .collect();
        let mut cell_cubes = vec![Vec::new(); domain.num_cells()];
        for (qi, mem) in members.iter().enumerate() {
            for &cell in mem {
                cell_cubes[cell as usize].push(qi as u32);
            }
        }
        CubeFamily { domain: *domain, provenance, cubes, covers, members, cell_cubes }
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube(&self, i: usize) -> &FamilyCube {
        &self.cubes[i]
    }

    pub fn cubes(&self) -> &[FamilyCube] {
        &self.cubes
    }

    /// Quadrature cover of cube `i`: cells with exact overlap weights.
    pub fn cover(&self, i: usize) -> &[(u32, f64)] {
        &self.covers[i]
    }

    /// Cells whose center lies in cube `i`.
    pub fn members(&self, i: usize) -> &[u32] {
        &self.members[i]
    }

    /// Cubes whose interior contains the center of `cell`, ascending.
    pub fn cubes_containing(&self, cell: usize) -> &[u32] {
        &self.cell_cubes[cell]
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.cubes[i].geom.measure(&self.domain)
    }

    /// Weighted average of per-cell values over cube `i`.
    pub fn average(&self, i: usize, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(cell, w) in &self.covers[i] {
            acc += w * values[cell as usize];
        }
        acc / self.measure(i)
    }
}

/// Smallest `k` with `2^k >= side`.
fn min_enclosing_level(side: f64) -> i32 {
    let mut k = side.log2().ceil() as i32;
    while pow2(k) < side {
        k += 1;
    }
    while k > i32::MIN + 1 && pow2(k - 1) >= side {
        k -= 1;
    }
    k
}

/// The 1/3 trick: a grid shift `t` and cube `Q_t` with `Q ⊆ Q_t` and
/// `side(Q_t) <= 6 side(Q)`, searched smallest level first, then
/// lexicographic shift. Errors when no containing grid cube stays in the box.
pub fn one_third_cover(domain: &LatticeDomain, lo: &[f64], side: f64) -> Result<(ShiftMask, Cube)> {
    let n = domain.dim();
    if side <= 0.0 || !side.is_finite() {
        return Err(Error::Config(format!("cube side must be positive, got {side}")));
    }
    let half = domain.half_width();
    for axis in 0..n {
        if lo[axis] < -half || lo[axis] + side > half {
            return Err(Error::OutOfDomain("query cube leaves the box".into()));
        }
    }
    let k0 = min_enclosing_level(side);
    let k_top = domain.l_pow() + 1;
    for k in k0..=k_top {
        let s = pow2(k);
        let toff = if k % 2 == 0 { s / 3.0 } else { -s / 3.0 };
        'shift: for mask in shift_masks(n) {
            let mut corner = [0i64; MAX_DIM];
            for axis in 0..n {
                let off = if mask & (1 << axis) != 0 { toff } else { 0.0 };
                let base = ((lo[axis] - off) / s).floor() as i64;
                let mut found = None;
                for m in [base - 1, base, base + 1] {
                    let c_lo = s * m as f64 + off;
                    let c_hi = c_lo + s;
                    if c_lo <= lo[axis]
                        && lo[axis] + side <= c_hi
                        && c_lo >= -half
                        && c_hi <= half
                    {
                        found = Some(m);
                        break;
                    }
                }
                match found {
                    Some(m) => corner[axis] = m,
                    None => continue 'shift,
                }
            }
            return Ok((mask, Cube { shift: mask, level: k, corner }));
        }
    }
    Err(Error::OutOfDomain(
        "no containing grid cube inside the box".into(),
    ))
}
