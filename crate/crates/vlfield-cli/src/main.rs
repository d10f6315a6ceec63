//! Command-line frontend: field generation, norms, weight constants,
//! reducing operators, maximal fields, stopping-time decompositions, sparse
//! operators, the discrete transform, the verification suite, and SVG
//! reports.
//!
//! Exit codes: 0 success (and suite pass), 1 suite failure, 2 usage error,
//! 3 data error.

mod fieldfile;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vlfield_core::directions::{default_count, DirectionSet};
use vlfield_core::domain::{CubeFamily, LatticeDomain};
use vlfield_core::exponent::ExponentField;
use vlfield_core::field::VectorField;
use vlfield_core::maximal::{
    aux_cube_averages, aux_double_prime, aux_prime, christ_goldberg, cz_decompose_with_averages,
    AuxSide, GridHierarchy, MaximalField, OpTag,
};
use vlfield_core::sparse::{convex_body_operator, discrete_riesz, sparse_from_cz, ConvexBodyField};
use vlfield_core::varnorm::{luxemburg_norm, norm_maximal, one_constant};
use vlfield_core::verify::{run_suite, SuiteConfig};
use vlfield_core::weights::{
    matrix_ap_constant, reduced_ap_constant, scalar_ap_constant, DirectionPair, MatrixWeightField,
    ReducingCache,
};
use vlfield_core::{Error, Result};

use fieldfile::Field;

#[derive(Parser)]
#[command(name = "vlfield", version, about = "Variable-exponent field laboratory")]
struct Cli {
    /// Worker threads for parallel scans (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GridChoice {
    /// The unshifted dyadic grid.
    Zero,
    /// The fully shifted grid (component 1/3 on every axis).
    Third,
    /// The union of all shifted grids.
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MaximalOp {
    /// Plain averages of |f|.
    M,
    /// Norm averaging functionals.
    Mp,
    /// Weighted averages with the pointwise weight.
    Mw,
    /// Reduced auxiliary operator.
    Mprime,
    /// Inverse-dual auxiliary operator.
    Mdprime,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstantKind {
    /// Indicator constant of the exponent alone.
    One,
    /// Scalar weight constant (d = 1).
    Scalar,
    /// Matrix weight constant.
    Matrix,
    /// Reducing-operator constant.
    Reduced,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Auto,
    Margins,
    Line,
    Heatmap,
}

#[derive(Args)]
struct FamilyArgs {
    /// Cube family grid.
    #[arg(long, value_enum, default_value = "zero")]
    grid: GridChoice,
    /// Level range `a..b` (inclusive); defaults to the full range.
    #[arg(long)]
    levels: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write deterministic battery fields to a directory.
    Gen {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Cells per axis (power of two, at least 4).
        #[arg(long, default_value_t = 128)]
        cells: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the Luxemburg norm of a field under an exponent.
    Norm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        exponent: PathBuf,
    },
    /// Print a weight constant over a cube family.
    Constant {
        #[arg(long)]
        exponent: PathBuf,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long, value_enum)]
        which: ConstantKind,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Emit reducing operators per cube as CSV.
    Reduce {
        #[arg(long)]
        weight: PathBuf,
        #[arg(long)]
        exponent: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit a maximal field (values and argmax cubes) as CSV.
    Maximal {
        #[arg(long, value_enum)]
        op: MaximalOp,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long)]
        exponent: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit stopping cubes of the reduced auxiliary operator as CSV.
    Czdecomp {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long)]
        exponent: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        /// Single threshold; alternative to --ladder.
        #[arg(long, conflicts_with = "ladder")]
        lambda: Option<f64>,
        /// Run the full power-of-two threshold ladder.
        #[arg(long)]
        ladder: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the sparse family from the stopping ladder and apply the
    /// sparse averaging operator; emits family and body CSV files.
    Sparse {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long)]
        exponent: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        /// Output prefix; writes `<prefix>_family.csv` and `<prefix>_bodies.csv`.
        #[arg(long)]
        out_prefix: String,
    },
    /// Apply the discrete first-axis transform; emits per-cell CSV.
    Transform {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 1)]
        axis: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification suite and write the JSON report.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Cells per axis for the lattice selected by --n.
        #[arg(long, default_value_t = 128)]
        cells: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Enable the three-dimensional matrix battery.
        #[arg(long, default_value_t = false)]
        d3: bool,
        /// Comma-separated check-id prefixes to run.
        #[arg(long)]
        suites: Option<String>,
        /// Scales every random case count (speeds up smoke runs).
        #[arg(long, default_value_t = 1.0)]
        cases_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an SVG plot from a prior CSV or JSON output.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: ReportKind,
        /// Column count for heatmaps.
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2u8,
                _ => 3u8,
            })
        }
    }
}

fn load(path: &Path) -> Result<Field> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    fieldfile::parse(&text)
}

fn save(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
}

fn expect_exponent(field: Field, what: &str) -> Result<ExponentField> {
    match field {
        Field::Exponent(p) => Ok(p),
        _ => Err(Error::Data(format!("{what} must be an exponent field"))),
    }
}

fn expect_matrix(field: Field, what: &str) -> Result<MatrixWeightField> {
    match field {
        Field::Matrix(w) => Ok(w),
        _ => Err(Error::Data(format!("{what} must be a matrix field"))),
    }
}

fn as_vector(field: Field, what: &str) -> Result<VectorField> {
    match field {
        Field::Vector(f) => Ok(f),
        Field::Scalar(f) => Ok(VectorField::from_scalar(&f)),
        _ => Err(Error::Data(format!("{what} must be a scalar or vector field"))),
    }
}

fn parse_levels(range: &str) -> Result<(i32, i32)> {
    let parts: Vec<&str> = range.split("..").collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("levels must look like a..b, got `{range}`")));
    }
    let a = parts[0]
        .parse::<i32>()
        .map_err(|_| Error::Config(format!("bad level `{}`", parts[0])))?;
    let b = parts[1]
        .parse::<i32>()
        .map_err(|_| Error::Config(format!("bad level `{}`", parts[1])))?;
    if a > b {
        return Err(Error::Config(format!("empty level range {a}..{b}")));
    }
    Ok((a, b))
}

fn build_family(domain: &LatticeDomain, args: &FamilyArgs) -> Result<CubeFamily> {
    let range = args.levels.as_deref().map(parse_levels).transpose()?;
    let (k_min, k_max) = range.unwrap_or((-domain.refinement(), domain.l_pow()));
    let full_shift: u8 = (0..domain.dim()).fold(0u8, |m, a| m | (1 << a));
    match args.grid {
        GridChoice::Zero => CubeFamily::from_cubes(
            domain,
            vlfield_core::domain::enumerate_cubes(domain, 0, k_min, k_max)?,
            vlfield_core::domain::Provenance::Grid(0),
        ),
        GridChoice::Third => CubeFamily::from_cubes(
            domain,
            vlfield_core::domain::enumerate_cubes(domain, full_shift, k_min, k_max)?,
            vlfield_core::domain::Provenance::Grid(full_shift),
        ),
        GridChoice::All => {
            let mut cubes = Vec::new();
            for mask in vlfield_core::domain::shift_masks(domain.dim()) {
                cubes.extend(vlfield_core::domain::enumerate_cubes(domain, mask, k_min, k_max)?);
            }
            CubeFamily::from_cubes(domain, cubes, vlfield_core::domain::Provenance::AllGrids)
        }
    }
}

fn cube_label(family: &CubeFamily, q: usize) -> String {
    family.cube(q).id.label(family.domain().dim())
}

fn maximal_csv(domain: &LatticeDomain, family: &CubeFamily, m: &MaximalField) -> String {
    let mut out = String::new();
    let axes: Vec<String> = (0..domain.dim()).map(|a| format!("x{a}")).collect();
    out.push_str(&format!("cell,{},value,argmax\n", axes.join(",")));
    for cell in 0..domain.num_cells() {
        let c = domain.cell_center(cell);
        let coords: Vec<String> = (0..domain.dim()).map(|a| format!("{:?}", c[a])).collect();
        let argmax = m
            .argmax(cell)
            .map(|q| cube_label(family, q as usize))
            .unwrap_or_else(|| "uncovered".into());
        out.push_str(&format!("{cell},{},{:?},\"{argmax}\"\n", coords.join(","), m.get(cell)));
    }
    out
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Gen { seed, n, cells, d, out_dir } => {
            let j = cells_to_level(cells, n)?;
            let domain = LatticeDomain::build(n, 1.0, j)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Error::Data(format!("cannot create {}: {e}", out_dir.display())))?;
            let mut written = Vec::new();
            for (label, p) in vlfield_core::verify::gen_exponent_battery(&domain, seed, 2) {
                let path = out_dir.join(format!("exponent_{label}.vlf"));
                save(&path, &fieldfile::write_exponent(&p))?;
                written.push(path);
            }
            for (label, w) in vlfield_core::verify::gen_weight_battery(&domain, d, seed) {
                let path = out_dir.join(format!("weight_d{d}_{label}.vlf"));
                save(&path, &fieldfile::write_matrix(&w))?;
                written.push(path);
            }
            let family = CubeFamily::grid(&domain, 0)?;
            let w0 = MatrixWeightField::identity(&domain, d)?;
            for (i, f) in vlfield_core::verify::gen_test_battery(&w0, &family, seed, 4)
                .into_iter()
                .enumerate()
            {
                let path = out_dir.join(format!("vector_{i}.vlf"));
                save(&path, &fieldfile::write_vector(&f))?;
                written.push(path);
            }
            let bump = vlfield_core::field::ScalarField::from_fn(&domain, |x| {
                if x[0] >= 0.0 && x[0] < 1.0 {
                    3.0
                } else {
                    0.0
                }
            })?;
            let path = out_dir.join("scalar_bump.vlf");
            save(&path, &fieldfile::write_scalar(&bump))?;
            written.push(path);
            for path in &written {
                println!("{}", path.display());
            }
            Ok(0)
        }

        Command::Norm { field, exponent } => {
            let f = as_vector(load(&field)?, "--field")?;
            let p = expect_exponent(load(&exponent)?, "--exponent")?;
            check_same_domain(f.domain(), p.domain())?;
            let (norm, _) = luxemburg_norm(&f.magnitude(), &p)?;
            println!("{norm:?}");
            Ok(0)
        }

        Command::Constant { exponent, weight, which, family } => {
            let p = expect_exponent(load(&exponent)?, "--exponent")?;
            let domain = *p.domain();
            let fam = build_family(&domain, &family)?;
            let (value, argmax) = match which {
                ConstantKind::One => one_constant(&p, &fam)?,
                ConstantKind::Scalar => {
                    let w = expect_matrix(load(weight_path(&weight)?)?, "--weight")?;
                    if w.dim() != 1 {
                        return Err(Error::Data("scalar constant needs a 1x1 weight".into()));
                    }
                    let sup = scalar_ap_constant(&w.scalarized(&[1.0]), &p, &fam)?;
                    (sup.value, sup.argmax)
                }
                ConstantKind::Matrix => {
                    let w = expect_matrix(load(weight_path(&weight)?)?, "--weight")?;
                    let sup = matrix_ap_constant(&w, &p, &fam)?;
                    (sup.value, sup.argmax)
                }
                ConstantKind::Reduced => {
                    let w = expect_matrix(load(weight_path(&weight)?)?, "--weight")?;
                    let cache =
                        ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(w.dim()))?;
                    let sup = reduced_ap_constant(&cache)?;
                    (sup.value, sup.argmax)
                }
            };
            println!("{value:?}");
            println!("argmax {}", cube_label(&fam, argmax));
            Ok(0)
        }

        Command::Reduce { weight, exponent, family, out } => {
            let w = expect_matrix(load(&weight)?, "--weight")?;
            let p = expect_exponent(load(&exponent)?, "--exponent")?;
            check_same_domain(w.domain(), p.domain())?;
            let fam = build_family(w.domain(), &family)?;
            let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(w.dim()))?;
            let d = w.dim();
            let mut text = String::new();
            let entries: Vec<String> = (0..d * d).map(|i| format!("m{}{}", i / d, i % d)).collect();
            text.push_str(&format!("cube,side,kind,{},c_lo,c_hi\n", entries.join(",")));
            for q in 0..fam.len() {
                for (kind, rop) in [("primal", &cache.primal[q]), ("dual", &cache.dual[q])] {
                    let rows: Vec<String> =
                        rop.matrix.rows().iter().map(|v| format!("{v:?}")).collect();
                    text.push_str(&format!(
                        "\"{}\",{:?},{kind},{},{:?},{:?}\n",
                        cube_label(&fam, q),
                        fam.cube(q).geom.side_len(fam.domain()),
                        rows.join(","),
                        rop.c_lo,
                        rop.c_hi
                    ));
                }
            }
            save(&out, &text)?;
            println!("{} cubes -> {}", fam.len(), out.display());
            Ok(0)
        }

        Command::Maximal { op, field, weight, exponent, family, out } => {
            let f = as_vector(load(&field)?, "--field")?;
            let domain = *f.domain();
            let fam = build_family(&domain, &family)?;
            let m = match op {
                MaximalOp::M => {
                    let w = MatrixWeightField::identity(&domain, f.dim())?;
                    christ_goldberg(&f, &w, &fam)?
                }
                MaximalOp::Mp => {
                    let p = expect_exponent(load(exponent_path(&exponent)?)?, "--exponent")?;
                    let (vals, argmax) = norm_maximal(&f.magnitude(), &p, &fam)?;
                    MaximalField::from_parts(
                        OpTag::NormAveraging,
                        fam.provenance(),
                        vals.values().to_vec(),
                        argmax,
                    )
                }
                MaximalOp::Mw => {
                    let w = expect_matrix(load(weight_path(&weight)?)?, "--weight")?;
                    christ_goldberg(&f, &w, &fam)?
                }
                MaximalOp::Mprime | MaximalOp::Mdprime => {
                    let w = expect_matrix(load(weight_path(&weight)?)?, "--weight")?;
                    let p = expect_exponent(load(exponent_path(&exponent)?)?, "--exponent")?;
                    let cache =
                        ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(w.dim()))?;
                    if op == MaximalOp::Mprime {
                        aux_prime(&f, &w, &fam, &cache)?
                    } else {
                        aux_double_prime(&f, &w, &fam, &cache)?
                    }
                }
            };
            save(&out, &maximal_csv(&domain, &fam, &m))?;
            println!("{} cells -> {}", domain.num_cells(), out.display());
            Ok(0)
        }

        Command::Czdecomp { field, weight, exponent, family, lambda, ladder, out } => {
            let f = as_vector(load(&field)?, "--field")?;
            let w = expect_matrix(load(&weight)?, "--weight")?;
            let p = expect_exponent(load(&exponent)?, "--exponent")?;
            check_same_domain(f.domain(), w.domain())?;
            check_same_domain(f.domain(), p.domain())?;
            if family.grid == GridChoice::All {
                return Err(Error::Config("stopping-time decompositions need a single grid".into()));
            }
            let fam = build_family(f.domain(), &family)?;
            let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(w.dim()))?;
            let averages = aux_cube_averages(&f, &w, &fam, &cache, AuxSide::Prime)?;
            let hierarchy = GridHierarchy::build(&fam)?;
            let thresholds: Vec<f64> = if ladder {
                ladder_thresholds(&averages)
            } else {
                vec![lambda.ok_or_else(|| Error::Config("pass --lambda <x> or --ladder".into()))?]
            };
            let n = f.domain().dim();
            let mut text = String::new();
            let los: Vec<String> = (0..n).map(|a| format!("lo{a}")).collect();
            text.push_str(&format!("lambda,cube,side,{},average,root\n", los.join(",")));
            let mut total = 0usize;
            for lam in thresholds {
                let decomp = cz_decompose_with_averages(&fam, &hierarchy, &averages, lam);
                for (is_root, q) in decomp
                    .stopping
                    .iter()
                    .map(|&q| (false, q))
                    .chain(decomp.root_hits.iter().map(|&q| (true, q)))
                {
                    let lo = fam.cube(q as usize).geom.lo_coords(fam.domain());
                    let coords: Vec<String> = (0..n).map(|a| format!("{:?}", lo[a])).collect();
                    text.push_str(&format!(
                        "{lam:?},\"{}\",{:?},{},{:?},{is_root}\n",
                        cube_label(&fam, q as usize),
                        fam.cube(q as usize).geom.side_len(fam.domain()),
                        coords.join(","),
                        decomp.averages[q as usize]
                    ));
                    total += 1;
                }
            }
            save(&out, &text)?;
            println!("{total} stopping cubes -> {}", out.display());
            Ok(0)
        }

        Command::Sparse { field, weight, exponent, family, out_prefix } => {
            let f = as_vector(load(&field)?, "--field")?;
            let w = expect_matrix(load(&weight)?, "--weight")?;
            let p = expect_exponent(load(&exponent)?, "--exponent")?;
            check_same_domain(f.domain(), w.domain())?;
            check_same_domain(f.domain(), p.domain())?;
            if family.grid == GridChoice::All {
                return Err(Error::Config("the sparse ladder needs a single grid".into()));
            }
            let fam = build_family(f.domain(), &family)?;
            let cache = ReducingCache::build(&w, &p, &fam, &DirectionPair::defaults(w.dim()))?;
            let sparse = sparse_from_cz(&f, &w, &fam, &cache)?;
            let domain = f.domain();
            let n = domain.dim();

            let mut fam_csv = String::new();
            let los: Vec<String> = (0..n).map(|a| format!("lo{a}")).collect();
            fam_csv.push_str(&format!("cube,side,{},e_cells\n", los.join(",")));
            for q in 0..sparse.family.len() {
                let lo = sparse.family.cube(q).geom.lo_coords(domain);
                let coords: Vec<String> = (0..n).map(|a| format!("{:?}", lo[a])).collect();
                fam_csv.push_str(&format!(
                    "\"{}\",{:?},{},{}\n",
                    cube_label(&sparse.family, q),
                    sparse.family.cube(q).geom.side_len(domain),
                    coords.join(","),
                    sparse.e_sets[q].len()
                ));
            }
            save(Path::new(&format!("{out_prefix}_family.csv")), &fam_csv)?;

            let dirs = DirectionSet::fit(f.dim(), default_count(f.dim()));
            let bodies = ConvexBodyField::segments(&f, dirs.clone())?;
            let image = convex_body_operator(&bodies, &sparse);
            let mut body_csv = String::new();
            let axes: Vec<String> = (0..f.dim()).map(|a| format!("u{a}")).collect();
            body_csv.push_str(&format!("cell,dir,{},h\n", axes.join(",")));
            for cell in 0..domain.num_cells() {
                let row = image.body(cell);
                for (j, u) in dirs.iter().enumerate() {
                    let coords: Vec<String> = (0..f.dim()).map(|a| format!("{:?}", u[a])).collect();
                    body_csv.push_str(&format!("{cell},{j},{},{:?}\n", coords.join(","), row[j]));
                }
            }
            save(Path::new(&format!("{out_prefix}_bodies.csv")), &body_csv)?;
            println!(
                "{} cubes, gamma {:?}, half-sparse {}",
                sparse.family.len(),
                sparse.gamma,
                sparse.half_sparse
            );
            Ok(0)
        }

        Command::Transform { field, axis, out } => {
            if axis != 1 {
                return Err(Error::Config("only the first-axis kernel is built in".into()));
            }
            let f = as_vector(load(&field)?, "--field")?;
            let tf = discrete_riesz(&f)?;
            let domain = f.domain();
            let mut text = String::new();
            let axes: Vec<String> = (0..domain.dim()).map(|a| format!("x{a}")).collect();
            let comps: Vec<String> = (0..f.dim()).map(|c| format!("t{c}")).collect();
            text.push_str(&format!("cell,{},{}\n", axes.join(","), comps.join(",")));
            for cell in 0..domain.num_cells() {
                let c = domain.cell_center(cell);
                let coords: Vec<String> = (0..domain.dim()).map(|a| format!("{:?}", c[a])).collect();
                let vals: Vec<String> = tf.get(cell).iter().map(|v| format!("{v:?}")).collect();
                text.push_str(&format!("{cell},{},{}\n", coords.join(","), vals.join(",")));
            }
            save(&out, &text)?;
            println!("{} cells -> {}", domain.num_cells(), out.display());
            Ok(0)
        }

        Command::Verify { seed, n, cells, d, d3, suites, cases_scale, out } => {
            let mut config = SuiteConfig { seed, d, enable_d3: d3, ..SuiteConfig::default() };
            match n {
                1 => config.cells_1d = cells,
                2 => config.cells_2d = cells,
                other => {
                    return Err(Error::Config(format!(
                        "lattice dimension must be 1 or 2, got {other}"
                    )))
                }
            }
            if cases_scale != 1.0 {
                if !(cases_scale > 0.0 && cases_scale.is_finite()) {
                    return Err(Error::Config("case scale must be positive".into()));
                }
                let scale = |v: usize| ((v as f64 * cases_scale).round() as usize).max(1);
                config.cases_norm_modular = scale(config.cases_norm_modular);
                config.cases_holder = scale(config.cases_holder);
                config.cases_duality = scale(config.cases_duality);
                config.cases_cover = scale(config.cases_cover);
                config.cases_matrix = scale(config.cases_matrix);
                config.cases_riesz = scale(config.cases_riesz);
            }
            if let Some(list) = suites {
                config.suites = Some(list.split(',').map(|s| s.trim().to_string()).collect());
            }
            let report = run_suite(&config)?;
            for check in &report.checks {
                let ok = check.kind == vlfield_core::verify::CheckKind::Soft
                    || check.passed == check.cases;
                println!(
                    "{} {} {}/{}{}",
                    if ok { "pass" } else { "FAIL" },
                    check.id,
                    check.passed,
                    check.cases,
                    check
                        .worst_margin
                        .map(|m| format!(" worst margin {m:.3e}"))
                        .unwrap_or_default()
                );
            }
            println!(
                "suite {} in {} ms ({} checks)",
                if report.pass { "pass" } else { "FAIL" },
                report.timing.total_ms,
                report.checks.len()
            );
            save(&out, &report.to_json())?;
            Ok(if report.pass { 0 } else { 1 })
        }

        Command::Report { input, kind, cols, out } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Error::Data(format!("cannot read {}: {e}", input.display())))?;
            let resolved = match kind {
                ReportKind::Auto => {
                    if input.extension().is_some_and(|e| e == "json") {
                        ReportKind::Margins
                    } else {
                        ReportKind::Line
                    }
                }
                k => k,
            };
            let name = input
                .file_name()
                .and_then(|s| s.to_str())
                .unwrap_or("data")
                .to_string();
            let svg_text = match resolved {
                ReportKind::Margins | ReportKind::Auto => {
                    let report: vlfield_core::verify::SuiteReport = serde_json::from_str(&text)
                        .map_err(|e| Error::Data(format!("bad report JSON: {e}")))?;
                    let entries: Vec<(String, f64)> = report
                        .checks
                        .iter()
                        .map(|c| (c.id.clone(), c.worst_margin.unwrap_or(0.0)))
                        .collect();
                    svg::margin_bars(&entries, "worst margins per check")
                }
                ReportKind::Line => {
                    let points = csv_points(&text)?;
                    svg::line_plot(&points, &name)
                }
                ReportKind::Heatmap => {
                    let values = csv_last_column(&text)?;
                    let cols = cols.unwrap_or_else(|| (values.len() as f64).sqrt() as usize);
                    svg::heatmap(&values, cols.max(1), &name)
                }
            };
            save(&out, &svg_text)?;
            println!("{}", out.display());
            Ok(0)
        }
    }
}

fn weight_path(weight: &Option<PathBuf>) -> Result<&Path> {
    weight.as_deref().ok_or_else(|| Error::Config("this command needs --weight".into()))
}

fn exponent_path(exponent: &Option<PathBuf>) -> Result<&Path> {
    exponent.as_deref().ok_or_else(|| Error::Config("this operator needs --exponent".into()))
}

fn check_same_domain(a: &LatticeDomain, b: &LatticeDomain) -> Result<()> {
    if a != b {
        return Err(Error::Data("input files live on different lattices".into()));
    }
    Ok(())
}

fn cells_to_level(cells: usize, _n: usize) -> Result<i32> {
    if !cells.is_power_of_two() || cells < 4 {
        return Err(Error::Config(format!(
            "cells per axis must be a power of two at least 4, got {cells}"
        )));
    }
    Ok(cells.trailing_zeros() as i32 - 1)
}

fn ladder_thresholds(averages: &[f64]) -> Vec<f64> {
    let positive: Vec<f64> = averages.iter().copied().filter(|&a| a > 0.0).collect();
    if positive.is_empty() {
        return Vec::new();
    }
    let a_max = positive.iter().fold(0.0f64, |m, &v| m.max(v));
    let a_min = positive.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let k_max = a_max.log2().ceil() as i32;
    let k_min = (a_min.log2().floor() as i32 - 1).max(k_max - 60);
    (k_min..=k_max).map(|k| 2f64.powi(k)).collect()
}

fn csv_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let nums: Vec<f64> = line.split(',').filter_map(|c| c.trim().parse::<f64>().ok()).collect();
        if nums.len() >= 2 {
            out.push((nums[0], nums[1]));
        }
    }
    if out.is_empty() {
        return Err(Error::Data("no numeric point pairs in the CSV".into()));
    }
    Ok(out)
}

fn csv_last_column(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let nums: Vec<f64> = line.split(',').filter_map(|c| c.trim().parse::<f64>().ok()).collect();
        if let Some(&v) = nums.last() {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::Data("no numeric column in the CSV".into()));
    }
    Ok(out)
}
