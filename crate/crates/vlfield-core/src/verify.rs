//! Seeded battery generation and the inequality suite: every quantitative
//! bound the other modules promise, re-checked on deterministic batteries
//! and collected into a machine-readable report.
//!
//! Hard checks (set identities, two-sided envelopes with stated tolerances)
//! decide the pass flag; soft observations (operator-norm ratios, empirical
//! domination constants) are recorded but never fail a run. Randomness is
//! stream-split per check so execution order cannot change a report.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::domain::{CubeFamily, LatticeDomain, Provenance, UnitsBox};
use crate::error::{Error, Result};
use crate::exponent::{diening_constant, estimate_log_holder, ExponentField};
use crate::field::{ScalarField, VectorField};
use crate::linalg::{norm3, op_norm, sym_eigen, Mat};
use crate::maximal::{
    aux_cube_averages, aux_domination_check, aux_double_prime, aux_prime, cz_decompose,
    cz_decompose_with_averages, cz_validate, finite_sum_bound_check, operator_norm_estimate,
    uniform_bound_check, AuxSide, GridHierarchy, MaximalField, OpKind, OpTag,
};
use crate::sparse::{
    body_weighted_norm, christgoldberg_equivalence_check, convex_body_operator, discrete_riesz,
    domination_constant, sparse_from_cz, ConvexBodyField,
};
use crate::varnorm::{
    duality_check, holder_pairing, luxemburg_norm, modular, norm_maximal, one_constant,
};
use crate::weights::{
    char_norm_bounds, matrix_ap_constant, reduced_ap_constant, reverse_holder_probe,
    scalarization_check, symmetry_check, DirectionPair, MatrixWeightField, ReducingCache,
};

/// Direction-sampling slack used by every relaxed envelope.
pub const EPS_DIR: f64 = 0.05;
/// Budget for the reverse Holder probe (engineering envelope).
pub const PROBE_BUDGET: f64 = 16.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Cells per axis of the one-dimensional lattice.
    pub cells_1d: usize,
    /// Cells per axis of the two-dimensional lattice (0 disables it).
    pub cells_2d: usize,
    /// Matrix/vector dimension of the heavy battery (1 or 2; 3 is opt-in).
    pub d: usize,
    pub enable_d3: bool,
    pub cases_norm_modular: usize,
    pub cases_holder: usize,
    pub cases_duality: usize,
    pub cases_cover: usize,
    pub cases_matrix: usize,
    pub cases_riesz: usize,
    /// Optional check-id filter; `None` runs everything.
    pub suites: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            cells_1d: 128,
            cells_2d: 32,
            d: 2,
            enable_d3: false,
            cases_norm_modular: 400,
            cases_holder: 500,
            cases_duality: 500,
            cases_cover: 1000,
            cases_matrix: 1000,
            cases_riesz: 50,
            suites: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// The inequality or identity being checked, as a formula.
    pub rule: String,
    pub kind: CheckKind,
    pub cases: u64,
    pub passed: u64,
    /// Smallest slack seen: negative means a violation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub observations: BTreeMap<String, f64>,
}

impl CheckRecord {
    fn new(id: &str, rule: &str, kind: CheckKind) -> Self {
        CheckRecord {
            id: id.to_string(),
            rule: rule.to_string(),
            kind,
            cases: 0,
            passed: 0,
            worst_margin: None,
            witness: None,
            observations: BTreeMap::new(),
        }
    }

    /// One case with a slack margin; negative fails, and the worst witness
    /// is retained.
    fn case(&mut self, margin: f64, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if margin >= 0.0 {
            self.passed += 1;
        }
        if self.worst_margin.map_or(true, |w| margin < w) {
            self.worst_margin = Some(margin);
            self.witness = Some(witness());
        }
    }

    fn case_bool(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.case(if ok { 0.0 } else { -1.0 }, witness);
    }

    fn observe(&mut self, key: &str, value: f64) {
        self.observations.insert(key.to_string(), value);
    }

    fn is_pass(&self) -> bool {
        self.kind == CheckKind::Soft || self.passed == self.cases
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: u64,
    pub per_check_ms: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: SuiteConfig,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub timing: Timing,
}

impl SuiteReport {
    /// Deterministic content: the serialized report with timing removed.
    /// Two runs with the same config must agree on this string exactly.
    pub fn fingerprint(&self) -> String {
        let mut clone = self.clone();
        clone.timing = Timing { total_ms: 0, per_check_ms: BTreeMap::new() };
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn stream_rng(seed: u64, check: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(check);
    rng
}

/// Deterministic exponent battery: constants, two-step, decaying families,
/// and smooth sampled fields.
pub fn gen_exponent_battery(
    domain: &LatticeDomain,
    seed: u64,
    extra_sampled: usize,
) -> Vec<(String, ExponentField)> {
    let mut out: Vec<(String, ExponentField)> = vec![
        ("const-1.5".into(), ExponentField::constant(domain, 1.5).unwrap()),
        ("const-2".into(), ExponentField::constant(domain, 2.0).unwrap()),
        ("const-3".into(), ExponentField::constant(domain, 3.0).unwrap()),
        ("two-step-2-4".into(), ExponentField::two_step(domain, 2.0, 4.0).unwrap()),
        ("lh-2-1".into(), ExponentField::lh_family(domain, 2.0, 1.0).unwrap()),
        ("lh-3-0.5".into(), ExponentField::lh_family(domain, 3.0, 0.5).unwrap()),
    ];
    let mut rng = stream_rng(seed, 9001);
    for s in 0..extra_sampled {
        let base = 1.6 + 1.2 * rng.random::<f64>();
        let amp = 0.3 + 0.5 * rng.random::<f64>();
        let freq = 1.0 + 3.0 * rng.random::<f64>();
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        let values: Vec<f64> = (0..domain.num_cells())
            .map(|i| {
                let x = domain.cell_center(i);
                let wave: f64 = (0..domain.dim()).map(|a| (freq * x[a] + phase).sin()).sum();
                (base + amp * wave / domain.dim() as f64).clamp(1.2, 8.0)
            })
            .collect();
        out.push((
            format!("sampled-{s}"),
            ExponentField::from_values(domain, values, base).unwrap(),
        ));
    }
    out
}

fn rotation(theta: f64) -> Mat {
    Mat::from_rows(2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Deterministic weight battery for a given matrix dimension.
pub fn gen_weight_battery(
    domain: &LatticeDomain,
    d: usize,
    seed: u64,
) -> Vec<(String, MatrixWeightField)> {
    let mut out: Vec<(String, MatrixWeightField)> = Vec::new();
    out.push(("identity".into(), MatrixWeightField::identity(domain, d).unwrap()));
    match d {
        1 => {
            out.push((
                "const-2.5".into(),
                MatrixWeightField::constant(domain, Mat::scalar(2.5)).unwrap(),
            ));
            for alpha in [0.125, 0.25] {
                let w = ScalarField::from_fn(domain, |x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    r.powf(alpha).max(1e-4)
                })
                .unwrap();
                out.push((format!("power-{alpha}"), MatrixWeightField::from_scalar(&w).unwrap()));
            }
            let mut rng = stream_rng(seed, 9002);
            let a = 0.5 + rng.random::<f64>();
            let b = 2.0 + 2.0 * rng.random::<f64>();
            let w = ScalarField::from_fn(domain, |x| {
                let s: f64 = x.iter().map(|v| (b * v).sin()).sum();
                (a * (1.0 + 0.45 * s / domain.dim() as f64)).max(1e-3)
            })
            .unwrap();
            out.push(("smooth-random".into(), MatrixWeightField::from_scalar(&w).unwrap()));
        }
        2 => {
            out.push((
                "const-spd".into(),
                MatrixWeightField::constant(domain, Mat::from_rows(2, &[2.0, 0.4, 0.4, 1.1]))
                    .unwrap(),
            ));
            for (alpha, beta) in [(0.125, 0.125), (0.25, 0.0)] {
                let w = MatrixWeightField::from_fn(domain, 2, |x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let rot = rotation(0.9 * x[0]);
                    let diag = Mat::diag(
                        2,
                        &[r.powf(alpha).max(1e-4), r.powf(-beta).min(1e4).max(1e-4)],
                    );
                    rot.mul(&diag).mul(&rot.transpose())
                })
                .unwrap();
                out.push((format!("rot-power-{alpha}-{beta}"), w));
            }
            let mut rng = stream_rng(seed, 9003);
            let f1 = 1.0 + 2.0 * rng.random::<f64>();
            let f2 = 1.0 + 2.0 * rng.random::<f64>();
            let w = MatrixWeightField::from_fn(domain, 2, |x| {
                let t = (f1 * x[0]).sin() * 0.7;
                let rot = rotation(t);
                let e1 = (1.0 + 0.8 * (f2 * x[0]).cos()).clamp(0.05, 20.0);
                let e2 = (1.0 - 0.6 * (f1 * x[0] + 1.0).sin()).clamp(0.05, 20.0);
                rot.mul(&Mat::diag(2, &[e1, e2])).mul(&rot.transpose())
            })
            .unwrap();
            out.push(("smooth-random".into(), w));
        }
        _ => {
            out.push((
                "const-spd".into(),
                MatrixWeightField::constant(
                    domain,
                    Mat::from_rows(3, &[2.0, 0.3, 0.0, 0.3, 1.2, 0.1, 0.0, 0.1, 0.8]),
                )
                .unwrap(),
            ));
        }
    }
    out
}

/// Random scalar test field with occasional spikes; values signed.
fn random_scalar(domain: &LatticeDomain, rng: &mut ChaCha8Rng) -> ScalarField {
    let values: Vec<f64> = (0..domain.num_cells())
        .map(|_| {
            let base = rng.random::<f64>() * 2.0 - 1.0;
            if rng.random::<f64>() < 0.04 {
                base * 50.0
            } else {
                base
            }
        })
        .collect();
    ScalarField::new(domain, values).unwrap()
}

fn random_vector(domain: &LatticeDomain, d: usize, rng: &mut ChaCha8Rng) -> VectorField {
    let values: Vec<f64> =
        (0..domain.num_cells() * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    VectorField::new(domain, d, values).unwrap()
}

/// Test-function battery: cube indicators, single-cell spikes, random signs,
/// and eigen-direction-aligned fields.
pub fn gen_test_battery(
    w: &MatrixWeightField,
    family: &CubeFamily,
    seed: u64,
    count: usize,
) -> Vec<VectorField> {
    let domain = w.domain();
    let d = w.dim();
    let mut rng = stream_rng(seed, 9004);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let f = match i % 4 {
            0 => {
                let q = rng.random_range(0..family.len());
                let mut dir = [0.0; 3];
                for a in 0..d {
                    dir[a] = rng.random::<f64>() * 2.0 - 1.0;
                }
                let len = norm3(&dir[..d]).max(1e-9);
                let members: std::collections::HashSet<u32> =
                    family.members(q).iter().copied().collect();
                VectorField::from_fn(domain, d, |_| [0.0, 0.0, 0.0]).unwrap().map_cells(
                    |cell, _| {
                        if members.contains(&(cell as u32)) {
                            [dir[0] / len, dir[1] / len, dir[2] / len]
                        } else {
                            [0.0, 0.0, 0.0]
                        }
                    },
                )
            }
            1 => {
                let spike = rng.random_range(0..domain.num_cells());
                let amp = 1.0 + 10.0 * rng.random::<f64>();
                VectorField::from_fn(domain, d, |_| [0.0, 0.0, 0.0]).unwrap().map_cells(
                    |cell, _| {
                        if cell == spike {
                            let mut v = [0.0; 3];
                            v[0] = amp;
                            v
                        } else {
                            [0.0, 0.0, 0.0]
                        }
                    },
                )
            }
            2 => {
                let values: Vec<f64> = (0..domain.num_cells() * d)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                VectorField::new(domain, d, values).unwrap()
            }
            _ => {
                let scale = 0.5 + rng.random::<f64>();
                VectorField::from_fn(domain, d, |_| [0.0, 0.0, 0.0]).unwrap().map_cells(
                    |cell, _| {
                        let (_, vecs) = sym_eigen(w.mat(cell));
                        let mut v = [0.0; 3];
                        for a in 0..d {
                            v[a] = vecs.get(a, d - 1) * scale;
                        }
                        v
                    },
                )
            }
        };
        out.push(f);
    }
    out
}

/// One weight/exponent pairing with its shared reducing cache and constants.
struct PairCtx {
    w_label: String,
    p_label: String,
    w_idx: usize,
    p_idx: usize,
    cache: ReducingCache,
    one: f64,
    reduced: f64,
}

struct Lattice1d {
    domain: LatticeDomain,
    grid0: CubeFamily,
    grid_third: CubeFamily,
    exponents: Vec<(String, ExponentField)>,
    weights: Vec<(String, MatrixWeightField)>,
    scalar_weights: Vec<(String, MatrixWeightField)>,
    pairs: Vec<PairCtx>,
    scalar_pairs: Vec<PairCtx>,
}

fn int_log2(cells: usize) -> Result<i32> {
    if !cells.is_power_of_two() || cells < 4 {
        return Err(Error::Config(format!(
            "cells per axis must be a power of two at least 4, got {cells}"
        )));
    }
    Ok(cells.trailing_zeros() as i32)
}

fn build_pairs(
    weights: &[(String, MatrixWeightField)],
    exponents: &[(String, ExponentField)],
    family: &CubeFamily,
    d: usize,
    exponent_picks: &[usize],
) -> Result<Vec<PairCtx>> {
    let dirs = DirectionPair::defaults(d);
    let mut out = Vec::new();
    for (wi, (w_label, w)) in weights.iter().enumerate() {
        for &pi in exponent_picks {
            let (p_label, p) = &exponents[pi];
            let cache = ReducingCache::build(w, p, family, &dirs)?;
            let one = one_constant(p, family)?.0;
            let reduced = reduced_ap_constant(&cache)?.value;
            out.push(PairCtx {
                w_label: w_label.clone(),
                p_label: p_label.clone(),
                w_idx: wi,
                p_idx: pi,
                cache,
                one,
                reduced,
            });
        }
    }
    Ok(out)
}

fn build_lattice_1d(config: &SuiteConfig) -> Result<Lattice1d> {
    let j = int_log2(config.cells_1d)? - 1;
    let domain = LatticeDomain::build(1, 1.0, j)?;
    let grid0 = CubeFamily::grid(&domain, 0)?;
    let grid_third = CubeFamily::grid(&domain, 1)?;
    let exponents = gen_exponent_battery(&domain, config.seed, 2);
    let weights = gen_weight_battery(&domain, config.d.clamp(1, 3), config.seed);
    let scalar_weights = gen_weight_battery(&domain, 1, config.seed);
    // Pair every weight with a representative exponent subset: one constant,
    // the two-step, and one decaying family.
    let picks = [1usize, 3, 4];
    let pairs = build_pairs(&weights, &exponents, &grid0, config.d, &picks)?;
    let scalar_pairs = build_pairs(&scalar_weights, &exponents, &grid0, 1, &picks)?;
    Ok(Lattice1d {
        domain,
        grid0,
        grid_third,
        exponents,
        weights,
        scalar_weights,
        pairs,
        scalar_pairs,
    })
}

fn wants(config: &SuiteConfig, id: &str) -> bool {
    match &config.suites {
        None => true,
        Some(list) => list.iter().any(|s| id.starts_with(s.as_str())),
    }
}

fn needs_ctx(config: &SuiteConfig) -> bool {
    const CTX_FREE: [&str; 2] = ["op_norm_equivalence", "sym_product_commute"];
    match &config.suites {
        None => true,
        Some(list) => list.iter().any(|s| !CTX_FREE.iter().any(|c| c.starts_with(s.as_str()))),
    }
}

/// Runs the full suite and assembles the report.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut checks: Vec<CheckRecord> = Vec::new();
    let mut per_check_ms: BTreeMap<String, u64> = BTreeMap::new();

    let ctx = if needs_ctx(config) { Some(build_lattice_1d(config)?) } else { None };

    macro_rules! run_check {
        ($id:expr, $body:expr) => {
            if wants(config, $id) {
                let t0 = Instant::now();
                let record: CheckRecord = $body?;
                per_check_ms.insert($id.to_string(), t0.elapsed().as_millis() as u64);
                checks.push(record);
            }
        };
    }
    macro_rules! ctx_check {
        ($id:expr, $f:ident) => {
            if let Some(ctx) = ctx.as_ref() {
                run_check!($id, $f(config, ctx));
            }
        };
    }

    ctx_check!("norm_modular", check_norm_modular);
    ctx_check!("holder_pairing", check_holder);
    ctx_check!("char_norm_sandwich", check_char_norm);
    ctx_check!("cube_comparison", check_cube_comparison);
    ctx_check!("one_constant_diening", check_one_constant_diening);
    run_check!("op_norm_equivalence", check_op_norm(config));
    run_check!("sym_product_commute", check_sym_product(config));
    ctx_check!("reducing_sandwich", check_reducing_sandwich);
    ctx_check!("scalarization", check_scalarization);
    ctx_check!("reduced_vs_matrix_constant", check_reduced_vs_matrix);
    ctx_check!("inverse_symmetry", check_inverse_symmetry);
    ctx_check!("reverse_holder", check_reverse_holder);
    ctx_check!("one_third_cover", check_one_third);
    ctx_check!("finite_sum_bound", check_finite_sum);
    ctx_check!("aux_monotone", check_aux_monotone);
    ctx_check!("cz_decomposition", check_cz);
    ctx_check!("cube_duality", check_duality);
    ctx_check!("norm_maximal_finite", check_norm_maximal_finite);
    ctx_check!("aux_prime_domination", check_aux_domination);
    ctx_check!("uniform_reduced_bound", check_uniform_bound);
    ctx_check!("aux_equivalence", check_aux_equivalence);
    ctx_check!("aux_operator_norm", check_operator_norm);
    ctx_check!("convex_maximal_equivalence", check_convex_equivalence);
    ctx_check!("sparse_operator_bound", check_sparse_operator);
    ctx_check!("riesz_domination", check_riesz_domination);
    if config.cells_2d >= 4 {
        run_check!("planar_smoke", check_planar(config));
    }

    let pass = checks.iter().all(|c| c.is_pass());
    Ok(SuiteReport {
        version: "1".into(),
        config: config.clone(),
        checks,
        pass,
        timing: Timing { total_ms: started.elapsed().as_millis() as u64, per_check_ms },
    })
}

/// Per-cell sup of per-cube values; thin wrapper shared with the planar
/// smoke check.
fn sup_field(family: &CubeFamily, per_cube: &[f64]) -> MaximalField {
    let cells = family.domain().num_cells();
    let mut values = vec![0.0f64; cells];
    let mut argmax = vec![None; cells];
    for cell in 0..cells {
        for &q in family.cubes_containing(cell) {
            let v = per_cube[q as usize];
            if argmax[cell].is_none() || v > values[cell] {
                values[cell] = v;
                argmax[cell] = Some(q);
            }
        }
    }
    MaximalField::from_parts(OpTag::AuxPrime, family.provenance(), values, argmax)
}

fn check_norm_modular(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "norm_modular",
        "rho(f)^(1/p+) <= ||f|| <= rho(f)^(1/p-) when ||f|| > 1, reversed when <= 1",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 1);
    for case in 0..config.cases_norm_modular {
        let f = random_scalar(&ctx.domain, &mut rng);
        let pi = rng.random_range(0..ctx.exponents.len());
        let p = &ctx.exponents[pi].1;
        let (norm, trace) = luxemburg_norm(&f, p)?;
        if norm == 0.0 {
            rec.case(0.0, || format!("case {case}: zero field"));
            continue;
        }
        rec.case(1e-10 - trace.residual, || {
            format!("case {case}: residual {}", trace.residual)
        });
        let rho = modular(&f, p)?;
        let (lo, hi) = if norm > 1.0 {
            (rho.powf(1.0 / p.p_plus()), rho.powf(1.0 / p.p_minus()))
        } else {
            (rho.powf(1.0 / p.p_minus()), rho.powf(1.0 / p.p_plus()))
        };
        let m1 = (norm - lo) / norm.max(1e-300) + 1e-9;
        let m2 = (hi - norm) / norm.max(1e-300) + 1e-9;
        rec.case(m1.min(m2), || {
            format!("case {case}: p {} norm {norm} bracket [{lo}, {hi}]", ctx.exponents[pi].0)
        });
    }
    Ok(rec)
}

fn check_holder(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec =
        CheckRecord::new("holder_pairing", "int |f g| <= 2 ||f||_p ||g||_p'", CheckKind::Hard);
    let mut rng = stream_rng(config.seed, 2);
    for case in 0..config.cases_holder {
        let f = random_scalar(&ctx.domain, &mut rng);
        let g = random_scalar(&ctx.domain, &mut rng);
        let pi = rng.random_range(0..ctx.exponents.len());
        let p = &ctx.exponents[pi].1;
        let (lhs, rhs) = holder_pairing(&f, &g, p)?;
        rec.case((rhs - lhs) / rhs.max(1e-300), || {
            format!("case {case}: p {} lhs {lhs} rhs {rhs}", ctx.exponents[pi].0)
        });
    }
    Ok(rec)
}

fn check_char_norm(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "char_norm_sandwich",
        "(1/6)|Q|^(1/p_Q) <= ||1_Q||_p <= 8 [1] |Q|^(1/p_Q)",
        CheckKind::Hard,
    );
    for (label, p) in &ctx.exponents {
        let (one, _) = one_constant(p, &ctx.grid0)?;
        for q in 0..ctx.grid0.len() {
            let b = char_norm_bounds(p, &ctx.grid0, q, one);
            let lower = (b.norm - b.lower) / b.norm.max(1e-300) + 1e-9;
            let upper = (b.upper - b.norm) / b.norm.max(1e-300) + 1e-9;
            rec.case(lower.min(upper), || {
                format!("p {label} cube {}", ctx.grid0.cube(q).id.label(1))
            });
        }
    }
    Ok(rec)
}

fn check_cube_comparison(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "cube_comparison",
        "|Q1|^(-1/p_Q1) <= 48 [1] C |Q2|^(-1/p_Q2) for Q1 in Q2 with |Q2| <= C |Q1|",
        CheckKind::Hard,
    );
    let hierarchy = GridHierarchy::build(&ctx.grid0)?;
    for (label, p) in &ctx.exponents {
        let (one, _) = one_constant(p, &ctx.grid0)?;
        for q1 in 0..ctx.grid0.len() {
            let mut q2 = q1;
            for _ in 0..2 {
                let Some(parent) = hierarchy.parent(q2) else { break };
                q2 = parent as usize;
                let m1 = ctx.grid0.measure(q1);
                let m2 = ctx.grid0.measure(q2);
                let c = m2 / m1;
                let p_q1 = p.harmonic_mean(&ctx.grid0.cube(q1).geom, ctx.grid0.cover(q1));
                let p_q2 = p.harmonic_mean(&ctx.grid0.cube(q2).geom, ctx.grid0.cover(q2));
                let lhs = m1.powf(-1.0 / p_q1);
                let rhs = 48.0 * one * c * m2.powf(-1.0 / p_q2);
                rec.case((rhs - lhs) / rhs.max(1e-300) + 1e-9, || {
                    format!("p {label} cube {} against ancestor", ctx.grid0.cube(q1).id.label(1))
                });
            }
        }
    }
    Ok(rec)
}

fn check_one_constant_diening(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "one_constant_diening",
        "[1] <= 8 C_D(1/p), C_D = max{(2 sqrt n)^(n (r+ - r-)), exp(C_0 (1 + log2 sqrt n))}",
        CheckKind::Hard,
    );
    for (label, p) in &ctx.exponents {
        let (one, argmax) = one_constant(p, &ctx.grid0)?;
        let rep = estimate_log_holder(p);
        let r_range = 1.0 / p.p_minus() - 1.0 / p.p_plus();
        let cd = diening_constant(1, r_range, rep.c0_recip);
        rec.case((8.0 * cd - one) / (8.0 * cd), || {
            format!(
                "p {label}: [1] = {one} at {}, 8 C_D = {}",
                ctx.grid0.cube(argmax).id.label(1),
                8.0 * cd
            )
        });
        rec.observe(&format!("one_{label}"), one);
    }
    Ok(rec)
}

fn check_op_norm(config: &SuiteConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "op_norm_equivalence",
        "(1/d) sum_i |V e_i| <= |V|_op <= sum_i |V e_i|",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 6);
    let d_max = if config.enable_d3 { 3 } else { 2 };
    for case in 0..config.cases_matrix {
        let d = 1 + case % d_max;
        let mut m = Mat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, rng.random::<f64>() * 4.0 - 2.0);
            }
        }
        let direct = op_norm(&m);
        let mut col_sum = 0.0;
        for i in 0..d {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            col_sum += norm3(&m.matvec(&e)[..d]);
        }
        let upper = (col_sum - direct) / col_sum.max(1e-300) + 1e-10;
        let lower = (direct - col_sum / d as f64) / direct.max(1e-300) + 1e-10;
        rec.case(upper.min(lower), || format!("case {case} d {d}"));
    }
    Ok(rec)
}

fn check_sym_product(config: &SuiteConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "sym_product_commute",
        "|U V|_op = |V U|_op for symmetric U, V",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 7);
    let d_max = if config.enable_d3 { 3 } else { 2 };
    for case in 0..config.cases_matrix {
        let d = 1 + case % d_max;
        let mut u = Mat::zeros(d);
        let mut v = Mat::zeros(d);
        for i in 0..d {
            for j in i..d {
                let a = rng.random::<f64>() * 2.0 - 1.0;
                let b = rng.random::<f64>() * 2.0 - 1.0;
                u.set(i, j, a);
                u.set(j, i, a);
                v.set(i, j, b);
                v.set(j, i, b);
            }
        }
        let uv = op_norm(&u.mul(&v));
        let vu = op_norm(&v.mul(&u));
        rec.case(1e-10 - (uv - vu).abs() / uv.max(1e-10), || {
            format!("case {case} d {d}: {uv} vs {vu}")
        });
    }
    Ok(rec)
}

fn check_reducing_sandwich(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "reducing_sandwich",
        "1 - eps <= |A u|/N(u) <= sqrt(d)(1 + eps) on held-out directions",
        CheckKind::Hard,
    );
    let sqrt_d = (config.d as f64).sqrt();
    for pair in &ctx.pairs {
        for (q, r) in pair.cache.primal.iter().chain(pair.cache.dual.iter()).enumerate() {
            let lo = r.c_lo - (1.0 - EPS_DIR);
            let hi = sqrt_d * (1.0 + EPS_DIR) - r.c_hi;
            let spread = sqrt_d * (1.0 + EPS_DIR).powi(2) - r.c_hi / r.c_lo;
            rec.case(lo.min(hi).min(spread), || {
                format!(
                    "W {} p {} cube #{q}: c_lo {} c_hi {}",
                    pair.w_label, pair.p_label, r.c_lo, r.c_hi
                )
            });
        }
    }
    // Scalar certificates are exact.
    for pair in &ctx.scalar_pairs {
        for r in pair.cache.primal.iter().chain(pair.cache.dual.iter()) {
            rec.case(1e-9 - (r.c_lo - 1.0).abs().max((r.c_hi - 1.0).abs()), || {
                format!("scalar W {} p {}: certificates off one", pair.w_label, pair.p_label)
            });
        }
    }
    Ok(rec)
}

fn check_scalarization(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "scalarization",
        "[|W u|] <= 4 [W] for unit directions u",
        CheckKind::Hard,
    );
    let axes: Vec<Vec<f64>> = if config.d == 2 {
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8], vec![-0.8, 0.6]]
    } else {
        vec![vec![1.0]]
    };
    let dir_refs: Vec<&[f64]> = axes.iter().map(|v| v.as_slice()).collect();
    for pair in &ctx.pairs {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        let matrix = matrix_ap_constant(w, p, &ctx.grid0)?;
        let worst = scalarization_check(w, p, &ctx.grid0, &dir_refs, matrix.value)?;
        rec.case(1.0 + 1e-6 - worst, || {
            format!("W {} p {}: worst ratio {worst}", pair.w_label, pair.p_label)
        });
        rec.observe(&format!("matrix_{}_{}", pair.w_label, pair.p_label), matrix.value);
    }
    Ok(rec)
}

fn check_reduced_vs_matrix(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "reduced_vs_matrix_constant",
        "[W]^R / [W] in [1/(16 d^2), 16 d^2]; equal for d = 1",
        CheckKind::Hard,
    );
    for pair in &ctx.pairs {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        let matrix = matrix_ap_constant(w, p, &ctx.grid0)?.value;
        let ratio = pair.reduced / matrix;
        let envelope = 16.0 * (w.dim() * w.dim()) as f64;
        let margin = (envelope - ratio).min(ratio - 1.0 / envelope);
        rec.case(margin, || format!("W {} p {}: ratio {ratio}", pair.w_label, pair.p_label));
        rec.observe(&format!("ratio_{}_{}", pair.w_label, pair.p_label), ratio);
    }
    for pair in &ctx.scalar_pairs {
        let w = &ctx.scalar_weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        let matrix = matrix_ap_constant(w, p, &ctx.grid0)?.value;
        let ratio = pair.reduced / matrix;
        rec.case(1e-6 - (ratio - 1.0).abs(), || {
            format!("scalar W {} p {}: ratio {ratio}", pair.w_label, pair.p_label)
        });
    }
    Ok(rec)
}

fn check_inverse_symmetry(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "inverse_symmetry",
        "[W]^R(W, p) = [W^-1]^R(W^-1, p') up to ellipsoid tolerance",
        CheckKind::Hard,
    );
    let dirs = DirectionPair::defaults(config.d);
    let dirs1 = DirectionPair::defaults(1);
    // One representative exponent per weight keeps this check light.
    for (w_label, w) in &ctx.weights {
        let p = &ctx.exponents[4].1;
        let ratio = symmetry_check(w, p, &ctx.grid0, &dirs)?;
        let margin = (1.25 - ratio).min(ratio - 0.8);
        rec.case(margin, || format!("W {w_label}: ratio {ratio}"));
    }
    for (w_label, w) in &ctx.scalar_weights {
        let p = &ctx.exponents[3].1;
        let ratio = symmetry_check(w, p, &ctx.grid0, &dirs1)?;
        rec.case(1e-6 - (ratio - 1.0).abs(), || format!("scalar W {w_label}: ratio {ratio}"));
    }
    Ok(rec)
}

fn check_reverse_holder(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "reverse_holder",
        "|Q|^(-1/(r p_Q)) ||w 1_Q||_(r p) <= C |Q|^(-1/p_Q) ||w 1_Q||_p passes for some r > 1",
        CheckKind::Hard,
    );
    let grid: Vec<f64> = (0..=10).map(|k| 1.0 + 2f64.powi(-k)).collect();
    for (w_label, w) in &ctx.scalar_weights {
        let scalar = w.scalarized(&[1.0]);
        for pi in [1usize, 4] {
            let (p_label, p) = &ctx.exponents[pi];
            let probe = reverse_holder_probe(&scalar, p, &ctx.grid0, &grid, PROBE_BUDGET)?;
            match probe.largest_passing {
                Some(r) => {
                    rec.case(r - (1.0 + 2f64.powi(-10)), || {
                        format!("W {w_label} p {p_label}: largest passing r = {r}")
                    });
                    rec.observe(&format!("r_{w_label}_{p_label}"), r);
                }
                None => rec.case(-1.0, || {
                    format!("W {w_label} p {p_label}: no r passed within budget")
                }),
            }
        }
    }
    Ok(rec)
}

fn check_one_third(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "one_third_cover",
        "every cube lies in a shifted-grid cube with side at most 6 times larger",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 13);
    let l = ctx.domain.half_width();
    let mut covered = 0u64;
    for case in 0..config.cases_cover {
        let side = 0.01 + rng.random::<f64>() * 0.8;
        let lo = [-l + (2.0 * l - side) * rng.random::<f64>(), 0.0, 0.0];
        match crate::domain::one_third_cover(&ctx.domain, &lo, side) {
            Ok((_, q)) => {
                covered += 1;
                let qlo = q.lo_coords(&ctx.domain)[0];
                let s = q.side();
                let contains = qlo <= lo[0] + 1e-12 && lo[0] + side <= qlo + s + 1e-12;
                let bounded = s <= 6.0 * side * (1.0 + 1e-12);
                rec.case_bool(contains && bounded, || {
                    format!("case {case}: cover side {s} for side {side}")
                });
            }
            Err(Error::OutOfDomain(_)) => {}
            Err(e) => rec.case(-1.0, || format!("case {case}: unexpected error {e}")),
        }
    }
    rec.observe("covered", covered as f64);
    Ok(rec)
}

/// Deterministic battery of lattice-aligned cubes that admit in-box covers.
fn custom_cube_battery(domain: &LatticeDomain, seed: u64, count: usize) -> Result<CubeFamily> {
    let mut rng = stream_rng(seed, 14);
    let cpa = domain.cells_per_axis() as i64;
    let half = domain.half_width_units();
    let level_span = int_log2(domain.cells_per_axis())?.max(2) as u32;
    let mut boxes = Vec::new();
    let mut guard = 0;
    while boxes.len() < count && guard < count * 60 {
        guard += 1;
        let side_cells = 1i64 << rng.random_range(0..(level_span - 1));
        let mut lo = [0i64; 3];
        let mut ok = true;
        for a in 0..domain.dim() {
            let max_lo = cpa - side_cells;
            if max_lo < 0 {
                ok = false;
                break;
            }
            lo[a] = -half + 3 * rng.random_range(0..=max_lo);
        }
        if !ok {
            continue;
        }
        let b = UnitsBox { lo, side: 3 * side_cells };
        let lo_f = b.lo_coords(domain);
        if crate::domain::one_third_cover(domain, &lo_f[..domain.dim()], b.side_len(domain))
            .is_ok()
        {
            boxes.push(b);
        }
    }
    CubeFamily::from_boxes(domain, boxes)
}

fn check_finite_sum(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "finite_sum_bound",
        "M'(arbitrary cubes) <= 6^(2n) 48 [1] sqrt(d) (1+eps) sum_t M'(grid t)",
        CheckKind::Hard,
    );
    let custom = custom_cube_battery(&ctx.domain, config.seed, 24)?;
    let dirs = DirectionPair::defaults(config.d);
    let mut rng = stream_rng(config.seed, 15);
    for pair in ctx.pairs.iter().take(3) {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        let custom_cache = ReducingCache::build(w, p, &custom, &dirs)?;
        let third_cache = ReducingCache::build(w, p, &ctx.grid_third, &dirs)?;
        for case in 0..3 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let report = finite_sum_bound_check(
                &f,
                w,
                &custom,
                &custom_cache,
                &[(&ctx.grid0, &pair.cache), (&ctx.grid_third, &third_cache)],
                pair.one,
                EPS_DIR,
            )?;
            rec.case(
                if report.pass {
                    (report.constant - report.max_ratio) / report.constant
                } else {
                    -1.0
                },
                || {
                    format!(
                        "W {} p {} case {case}: max ratio {} against {}",
                        pair.w_label, pair.p_label, report.max_ratio, report.constant
                    )
                },
            );
        }
    }
    Ok(rec)
}

fn check_aux_monotone(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "aux_monotone",
        "M' f_k increases to M' f under truncation f_k = f 1_{|f| <= k}",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 16);
    for pair in ctx.pairs.iter().take(2) {
        let w = &ctx.weights[pair.w_idx].1;
        let scale = 20.0;
        let f = random_vector(&ctx.domain, config.d, &mut rng)
            .map_cells(|_, v| [scale * v[0], scale * v.get(1).copied().unwrap_or(0.0), 0.0]);
        let full = aux_prime(&f, w, &ctx.grid0, &pair.cache)?;
        let mut prev = vec![0.0f64; ctx.domain.num_cells()];
        let mut ok = true;
        for cap in [2.0, 5.0, 10.0, 40.0] {
            let mk = aux_prime(&f.truncate(cap), w, &ctx.grid0, &pair.cache)?;
            for cell in 0..ctx.domain.num_cells() {
                if mk.get(cell) + 1e-12 < prev[cell] || mk.get(cell) > full.get(cell) + 1e-12 {
                    ok = false;
                }
                prev[cell] = mk.get(cell);
            }
        }
        let tail = aux_prime(&f.truncate(1e12), w, &ctx.grid0, &pair.cache)?;
        for cell in 0..ctx.domain.num_cells() {
            if (tail.get(cell) - full.get(cell)).abs() > 1e-12 {
                ok = false;
            }
        }
        rec.case_bool(ok, || format!("W {} p {}", pair.w_label, pair.p_label));
    }
    Ok(rec)
}

fn check_cz(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "cz_decomposition",
        "Omega = union of stopping cubes exactly; lambda < avg <= 24 4^n 2 [1] sqrt(d)(1+eps) lambda off roots",
        CheckKind::Hard,
    );
    let hierarchy = GridHierarchy::build(&ctx.grid0)?;
    let mut rng = stream_rng(config.seed, 17);
    for pair in ctx.pairs.iter().take(4) {
        let w = &ctx.weights[pair.w_idx].1;
        for case in 0..2 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let averages = aux_cube_averages(&f, w, &ctx.grid0, &pair.cache, AuxSide::Prime)?;
            let aux = sup_field(&ctx.grid0, &averages);
            for k in -4..4 {
                let lambda = 2f64.powi(k);
                let decomp =
                    cz_decompose_with_averages(&ctx.grid0, &hierarchy, &averages, lambda);
                let v = cz_validate(&ctx.grid0, &decomp, &aux, pair.one, config.d, EPS_DIR);
                rec.case_bool(v.disjoint && v.cover_exact && v.bounds_hold, || {
                    format!(
                        "W {} p {} case {case} lambda {lambda}: disjoint {} cover {} bounds {}",
                        pair.w_label, pair.p_label, v.disjoint, v.cover_exact, v.bounds_hold
                    )
                });
            }
        }
    }
    // Hand-checkable single-bump example on a wider box.
    let domain = LatticeDomain::build(1, 2.0, int_log2(config.cells_1d)? - 2)?;
    let fam = CubeFamily::grid(&domain, 0)?;
    let w = MatrixWeightField::identity(&domain, 1)?;
    let p = ExponentField::constant(&domain, 2.0)?;
    let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(1))?;
    let f = VectorField::from_fn(&domain, 1, |x| {
        [if x[0] >= 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 }, 0.0, 0.0]
    })?;
    let decomp = cz_decompose(&f, &w, &fam, &cache, 0.5)?;
    let single = decomp.root_hits.is_empty()
        && decomp.stopping.len() == 1
        && matches!(
            &fam.cube(decomp.stopping[0] as usize).id,
            crate::domain::CubeId::Grid(c) if c.level == 0 && c.corner[0] == 0
        );
    rec.case_bool(single, || "single-bump example must stop exactly at [0,1)".into());
    Ok(rec)
}

fn check_duality(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "cube_duality",
        "avg_Q |f g| <= 2 [1]_Q A_{p,Q}(f) A_{p',Q}(g)",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 18);
    for case in 0..config.cases_duality {
        let f = random_scalar(&ctx.domain, &mut rng);
        let g = random_scalar(&ctx.domain, &mut rng);
        let pi = rng.random_range(0..ctx.exponents.len());
        let p = &ctx.exponents[pi].1;
        let q = rng.random_range(0..ctx.grid0.len());
        let out = duality_check(&f, &g, p, &ctx.grid0, q)?;
        rec.case((out.rhs - out.lhs) / out.rhs.max(1e-300) + 1e-9, || {
            format!("case {case}: p {} cube #{q}", ctx.exponents[pi].0)
        });
    }
    Ok(rec)
}

fn check_norm_maximal_finite(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "norm_maximal_finite",
        "M_p f is finite on every covered cell",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 19);
    for case in 0..6 {
        let f = random_scalar(&ctx.domain, &mut rng);
        let pi = rng.random_range(0..ctx.exponents.len());
        let p = &ctx.exponents[pi].1;
        let (values, argmax) = norm_maximal(&f, p, &ctx.grid0)?;
        let ok =
            values.values().iter().all(|v| v.is_finite()) && argmax.iter().all(|a| a.is_some());
        rec.case_bool(ok, || format!("case {case}: p {}", ctx.exponents[pi].0));
    }
    Ok(rec)
}

fn check_aux_domination(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "aux_prime_domination",
        "M' f <= 8 [1] d [W]^R (1+eps) M_p |f|",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 20);
    for pair in ctx.pairs.iter().take(4) {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        for case in 0..2 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let (pass, worst) = aux_domination_check(
                &f,
                w,
                p,
                &ctx.grid0,
                &pair.cache,
                pair.one,
                pair.reduced,
                EPS_DIR,
            )?;
            rec.case(if pass { 1.0 - worst } else { -worst }, || {
                format!("W {} p {} case {case}: worst ratio {worst}", pair.w_label, pair.p_label)
            });
        }
    }
    Ok(rec)
}

fn check_uniform_bound(_config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "uniform_reduced_bound",
        "sup_Q A_{r p',Q}(|W^-1 A_Q|_op) is finite (value recorded)",
        CheckKind::Hard,
    );
    let grid: Vec<f64> = (0..=10).map(|k| 1.0 + 2f64.powi(-k)).collect();
    for pair in &ctx.pairs {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        // r from the probe on the first-axis scalarization, halved toward 1.
        let scalar = w.scalarized(&if w.dim() == 1 { vec![1.0] } else { vec![1.0, 0.0] });
        let probe =
            reverse_holder_probe(&scalar, &p.conjugate(), &ctx.grid0, &grid, PROBE_BUDGET)?;
        let r = 1.0 + probe.largest_passing.map_or(2f64.powi(-11), |r| (r - 1.0) / 2.0);
        let report = uniform_bound_check(w, p, &ctx.grid0, &pair.cache, r)?;
        rec.case_bool(report.sup.is_finite(), || {
            format!("W {} p {}: sup {}", pair.w_label, pair.p_label, report.sup)
        });
        rec.observe(&format!("sup_{}_{}", pair.w_label, pair.p_label), report.sup);
        rec.observe(&format!("r_{}_{}", pair.w_label, pair.p_label), r);
    }
    Ok(rec)
}

fn check_aux_equivalence(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "aux_equivalence",
        "M'' <= d(1+eps)^2 M' and M' <= d(1+eps)^2 [W]^R M'' where both exceed the floor",
        CheckKind::Hard,
    );
    let mut rng = stream_rng(config.seed, 22);
    let envelope = config.d as f64 * (1.0 + EPS_DIR).powi(2);
    for pair in ctx.pairs.iter().take(4) {
        let w = &ctx.weights[pair.w_idx].1;
        for case in 0..2 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let prime = aux_prime(&f, w, &ctx.grid0, &pair.cache)?;
            let dprime = aux_double_prime(&f, w, &ctx.grid0, &pair.cache)?;
            let mut worst = f64::INFINITY;
            for cell in 0..ctx.domain.num_cells() {
                let (a, b) = (prime.get(cell), dprime.get(cell));
                if a <= 1e-12 || b <= 1e-12 {
                    continue;
                }
                let m1 = envelope - b / a;
                let m2 = envelope * pair.reduced - a / b;
                worst = worst.min(m1.min(m2));
            }
            rec.case(if worst.is_finite() { worst } else { 0.0 }, || {
                format!("W {} p {} case {case}", pair.w_label, pair.p_label)
            });
        }
    }
    Ok(rec)
}

fn check_operator_norm(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "aux_operator_norm",
        "||M' f|| / ||f|| finite over the test battery (ratios recorded)",
        CheckKind::Hard,
    );
    for pair in ctx.pairs.iter().take(4) {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        let battery = gen_test_battery(w, &ctx.grid0, config.seed, 8);
        let est =
            operator_norm_estimate(OpKind::AuxPrime, w, p, &ctx.grid0, &pair.cache, &battery)?;
        rec.case_bool(est.max_ratio.is_finite(), || {
            format!("W {} p {}", pair.w_label, pair.p_label)
        });
        rec.observe(&format!("ratio_{}_{}", pair.w_label, pair.p_label), est.max_ratio);
    }
    // Classical reference point: d = 1, unit weight, p = 2, against an
    // independent plain-average and square-sum oracle.
    let w1 = &ctx.scalar_weights[0].1;
    let p2 = &ctx.exponents[1].1;
    let cache = &ctx.scalar_pairs[0].cache;
    let battery = gen_test_battery(w1, &ctx.grid0, config.seed, 12);
    let est = operator_norm_estimate(OpKind::AuxPrime, w1, p2, &ctx.grid0, cache, &battery)?;
    let mut oracle = 0.0f64;
    for f in &battery {
        let mag = f.magnitude();
        let mut sup = vec![0.0f64; ctx.domain.num_cells()];
        for q in 0..ctx.grid0.len() {
            let mut acc = 0.0;
            for &(cell, wt) in ctx.grid0.cover(q) {
                acc += wt * mag.get(cell as usize);
            }
            let avg = acc / ctx.grid0.measure(q);
            for &cell in ctx.grid0.members(q) {
                sup[cell as usize] = sup[cell as usize].max(avg);
            }
        }
        let measure = ctx.domain.cell_measure();
        let num: f64 = sup.iter().map(|v| v * v * measure).sum::<f64>().sqrt();
        let den: f64 = mag.values().iter().map(|v| v * v * measure).sum::<f64>().sqrt();
        if den > 0.0 {
            oracle = oracle.max(num / den);
        }
    }
    let within = est.max_ratio <= 2.0 * oracle && oracle <= 2.0 * est.max_ratio;
    rec.case_bool(within, || {
        format!("classical reference: estimate {} oracle {oracle}", est.max_ratio)
    });
    rec.observe("classical_estimate", est.max_ratio);
    rec.observe("classical_oracle", oracle);
    Ok(rec)
}

fn check_convex_equivalence(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "convex_maximal_equivalence",
        "the weighted norm of the convex maximal field matches the weighted maximal field within d(1+eps)",
        CheckKind::Hard,
    );
    let dirs = DirectionSet::fit(config.d, crate::directions::default_count(config.d));
    let mut rng = stream_rng(config.seed, 24);
    for (w_label, w) in ctx.weights.iter().take(4) {
        for case in 0..2 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let rep = christgoldberg_equivalence_check(&f, w, &ctx.grid0, dirs.clone(), EPS_DIR)?;
            rec.case_bool(rep.pass, || {
                format!("W {w_label} case {case}: over {} under {}", rep.max_over, rep.max_under)
            });
        }
    }
    Ok(rec)
}

fn check_sparse_operator(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "sparse_operator_bound",
        "||W A^K_S K(f)||_p / ||W f||_p finite; single-cube family reproduces the average exactly",
        CheckKind::Hard,
    );
    let dirs = DirectionSet::fit(config.d, crate::directions::default_count(config.d));
    let mut rng = stream_rng(config.seed, 25);
    let mut min_gamma = f64::INFINITY;
    for pair in ctx.pairs.iter().take(3) {
        let w = &ctx.weights[pair.w_idx].1;
        let p = &ctx.exponents[pair.p_idx].1;
        for case in 0..2 {
            let f = random_vector(&ctx.domain, config.d, &mut rng);
            let sparse = sparse_from_cz(&f, w, &ctx.grid0, &pair.cache)?;
            if sparse.family.is_empty() {
                rec.case(0.0, || "empty ladder".into());
                continue;
            }
            min_gamma = min_gamma.min(sparse.gamma);
            let bodies = ConvexBodyField::segments(&f, dirs.clone())?;
            let image = convex_body_operator(&bodies, &sparse);
            let weighted_image = ScalarField::new(
                &ctx.domain,
                (0..ctx.domain.num_cells())
                    .map(|cell| body_weighted_norm(image.body(cell), &dirs, w.mat(cell)))
                    .collect(),
            )?;
            let weighted_f = ScalarField::new(
                &ctx.domain,
                (0..ctx.domain.num_cells())
                    .map(|cell| norm3(&w.mat(cell).matvec(f.get(cell))[..config.d]))
                    .collect(),
            )?;
            let (num, _) = luxemburg_norm(&weighted_image, p)?;
            let (den, _) = luxemburg_norm(&weighted_f, p)?;
            let ratio = if den > 0.0 { num / den } else { 0.0 };
            rec.case_bool(ratio.is_finite(), || {
                format!("W {} p {} case {case}", pair.w_label, pair.p_label)
            });
            rec.observe(&format!("ratio_{}_{}_{case}", pair.w_label, pair.p_label), ratio);
        }
    }
    if min_gamma.is_finite() {
        rec.observe("min_gamma", min_gamma);
    }
    // Single-cube family reproduces the plain average exactly.
    let f = random_vector(&ctx.domain, config.d, &mut rng);
    let cube = crate::domain::Cube { shift: 0, level: 0, corner: [0, 0, 0] };
    let fam = CubeFamily::from_cubes(&ctx.domain, vec![cube], Provenance::Custom)?;
    let sparse =
        crate::sparse::SparseFamily::from_parts(fam.clone(), vec![fam.members(0).to_vec()])?;
    let bodies = ConvexBodyField::segments(&f, dirs.clone())?;
    let image = convex_body_operator(&bodies, &sparse);
    let avg = crate::sparse::aumann_average(&bodies, &fam, 0);
    let inside = fam.members(0)[0] as usize;
    let mut worst = 0.0f64;
    for j in 0..dirs.len() {
        worst = worst.max((image.body(inside)[j] - avg.h[j]).abs());
    }
    rec.case(1e-12 - worst, || format!("single-cube exactness off by {worst}"));
    Ok(rec)
}

fn check_riesz_domination(config: &SuiteConfig, ctx: &Lattice1d) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "riesz_domination",
        "Tf(x).u <= C_emp h_{A^K_S K(f)}(u); C_emp and uncovered cells recorded",
        CheckKind::Soft,
    );
    let d = config.d;
    let dirs = DirectionSet::fit(d, crate::directions::default_count(d));
    let w = MatrixWeightField::identity(&ctx.domain, d)?;
    let p = ExponentField::constant(&ctx.domain, 2.0)?;
    let cache = ReducingCache::build(&w, &p, &ctx.grid0, &DirectionPair::defaults(d))?;
    let mut rng = stream_rng(config.seed, 26);
    let mut c_max = 0.0f64;
    let mut c_sum = 0.0f64;
    let mut uncovered = 0u64;
    let mut ran = 0u64;
    for _ in 0..config.cases_riesz {
        let f = random_vector(&ctx.domain, d, &mut rng);
        let tf = discrete_riesz(&f)?;
        let sparse = sparse_from_cz(&f, &w, &ctx.grid0, &cache)?;
        if sparse.family.is_empty() {
            continue;
        }
        let bodies = ConvexBodyField::segments(&f, dirs.clone())?;
        let image = convex_body_operator(&bodies, &sparse);
        let rep = domination_constant(&tf, &image, &dirs);
        c_max = c_max.max(rep.c_emp);
        c_sum += rep.c_emp;
        uncovered += rep.uncovered_cells as u64;
        ran += 1;
        rec.case_bool(rep.c_emp.is_finite(), || "empirical constant must be finite".into());
    }
    if ran > 0 {
        rec.observe("c_emp_max", c_max);
        rec.observe("c_emp_mean", c_sum / ran as f64);
        rec.observe("uncovered_cells_total", uncovered as f64);
    }
    Ok(rec)
}

fn check_planar(config: &SuiteConfig) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(
        "planar_smoke",
        "two-dimensional lattice: norm solves, certificates, stopping identities, transform symmetry",
        CheckKind::Hard,
    );
    let j = int_log2(config.cells_2d)? - 1;
    let domain = LatticeDomain::build(2, 1.0, j)?;
    let fam = CubeFamily::grid(&domain, 0)?;
    let exponents = gen_exponent_battery(&domain, config.seed, 1);
    let mut rng = stream_rng(config.seed, 27);

    for case in 0..40 {
        let f = random_scalar(&domain, &mut rng);
        let pi = rng.random_range(0..exponents.len());
        let p = &exponents[pi].1;
        let (norm, trace) = luxemburg_norm(&f, p)?;
        if norm == 0.0 {
            rec.case(0.0, || "zero".into());
            continue;
        }
        rec.case(1e-10 - trace.residual, || format!("planar case {case}"));
    }

    let d = config.d.min(2);
    let weights = gen_weight_battery(&domain, d, config.seed);
    let w = &weights[weights.len() - 1].1;
    let p = &exponents[4].1;
    let cache = ReducingCache::build(w, p, &fam, &DirectionPair::defaults(d))?;
    let sqrt_d = (d as f64).sqrt();
    for r in cache.primal.iter().chain(cache.dual.iter()) {
        rec.case(sqrt_d * (1.0 + EPS_DIR).powi(2) - r.c_hi / r.c_lo, || {
            format!("planar certificate spread {}", r.c_hi / r.c_lo)
        });
    }
    let (one, _) = one_constant(p, &fam)?;
    let hierarchy = GridHierarchy::build(&fam)?;
    let f = random_vector(&domain, d, &mut rng);
    let averages = aux_cube_averages(&f, w, &fam, &cache, AuxSide::Prime)?;
    let aux = sup_field(&fam, &averages);
    for k in -3..2 {
        let decomp = cz_decompose_with_averages(&fam, &hierarchy, &averages, 2f64.powi(k));
        let v = cz_validate(&fam, &decomp, &aux, one, d, EPS_DIR);
        rec.case_bool(v.disjoint && v.cover_exact && v.bounds_hold, || {
            format!("planar stopping at 2^{k}")
        });
    }

    // Transform smoke: a field even in the first axis maps to an odd output.
    let f_even = VectorField::from_fn(&domain, 1, |x| [(x[1] * 2.0).cos(), 0.0, 0.0])?;
    let tf_even = discrete_riesz(&f_even)?;
    let cpa = domain.cells_per_axis();
    let mut worst = 0.0f64;
    for ix in 0..cpa {
        for iy in 0..cpa {
            let a = domain.cell_index(&[ix, iy]);
            let m = domain.cell_index(&[cpa - 1 - ix, iy]);
            worst = worst.max((tf_even.get(a)[0] + tf_even.get(m)[0]).abs());
        }
    }
    rec.case(1e-10 - worst, || format!("planar antisymmetry off by {worst}"));
    Ok(rec)
}
