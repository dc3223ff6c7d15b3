//! The `cdkernel` command line: one verb per analysis, CSV or JSON reports,
//! exit code 0 on pass, 2 on fail and 1 on usage, IO or spec errors.

mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use crate::kernel::json::load_spec;
pub use report::{write_report, Format, Outcome, RunReport, Table};
use report::{coords_cells, json as to_json, matrix_json};

use crate::curvature::{
    curvature_form, curvature_gap_report, extremality_point_test, ktilde_kernel, CurvatureReference, DEFAULT_CURV_TOL,
};
use crate::flag::{default_flag_grid, flag_equivalence, flag_invariants, flag_kernel, FlagKernelSpec};
use crate::homogeneous::{
    default_alpha_grid, elementary_bundle_gram0, homogeneity_check, multiplier_quasi_invariance, sample_pairs,
    Automorphism, ElementaryBundleParams,
};
use crate::jets::{h20_blowup, h20_joint_kernel_rank, jet_kernel, mu_admissibility, Chart, MuMatrix, VanishingSubmoduleKernel};
use crate::kernel::json::to_value;
use crate::localization::{nilpotent_data, Orthonormalization};
use crate::posdef::{contractivity_kernel, infinite_divisibility_test, sampled_verdict, PDReport, SampleGrid, DEFAULT_REL_TOL, DEFAULT_SEED};
use crate::{CMat, Domain, DomainPoint, Error, Family, KernelSpec, Result, C64};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CDKERNEL_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Rings at 0.3, 0.6, 0.85 plus 20 seeded random points.
    Default,
    /// Four rings from the origin to `--grid-radius`, ten points each.
    Rings,
    /// `--grid-count` seeded uniform points of norm at most `--grid-radius`.
    Random,
    /// 15 points on the positive real and imaginary axes (disc only).
    Flag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Symmetric,
    Sequential,
}

#[derive(Debug, Parser)]
#[command(name = "cdkernel", version, about = "Curvature, positivity and jet checks for reproducing kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Kernel spec JSON file; repeat for verbs taking two specs.
    #[arg(long, global = true)]
    pub spec: Vec<PathBuf>,

    #[arg(long = "tol-pd", global = true, default_value_t = DEFAULT_REL_TOL)]
    pub tol_pd: f64,

    #[arg(long = "tol-curv", global = true, default_value_t = DEFAULT_CURV_TOL)]
    pub tol_curv: f64,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long, global = true, value_enum, default_value_t = GridKind::Default)]
    pub grid: GridKind,

    #[arg(long = "grid-count", global = true, default_value_t = 40)]
    pub grid_count: usize,

    #[arg(long = "grid-radius", global = true, default_value_t = 0.85)]
    pub grid_radius: f64,

    /// Record elapsed seconds in JSON reports (breaks byte-for-byte reproducibility).
    #[arg(long = "wall-time", global = true)]
    pub wall_time: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature form at every grid point.
    Curvature,
    /// Gap between a reference curvature and the kernel curvature.
    Gap {
        /// disc_szego or ball_bergman_normalized; chosen by domain when omitted.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Pointwise extremality of `(1 - z w̄) K` on the disc.
    Extremal,
    /// Positivity of `(1 - z w̄)^k K`.
    Contractive {
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Positivity of `K^t` for each `t`.
    Infdiv {
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0, 2.0, 5.0])]
        t: Vec<f64>,
    },
    /// Local nilpotent data and the curvature identity at a point.
    Localize {
        /// Point as `re:im` coordinates separated by commas; origin when omitted.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Symmetric)]
        method: MethodArg,
    },
    /// Sampled positivity of the jet kernel of order `k`.
    Jet {
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Multiplicativity of the twisted jet action for a lower-triangular μ.
    MuCheck {
        /// Entries μ21, μ31, μ32, … as `re` or `re:im`, comma separated.
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 6)]
        degree: usize,
    },
    /// Difference quotients of the kernel of the submodule vanishing on the diagonal.
    Quotient {
        #[arg(long, default_value_t = 30)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.03, 0.01])]
        h: Vec<f64>,
        #[arg(long)]
        richardson: bool,
        /// Diagonal point `re:im`; origin when omitted.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Curvature over the exceptional divisor and joint kernel ranks for `H²₀(𝔻²)`.
    Blowup {
        #[arg(long, value_delimiter = ',', default_values_t = ["0".to_string(), "1".to_string(), "2:1".to_string()])]
        theta: Vec<String>,
        #[arg(long, default_value_t = 8)]
        degree: usize,
    },
    /// Compare two flag specs by curvature and second fundamental form.
    FlagCompare,
    /// Curvature test of homogeneity under disc automorphisms.
    Homog {
        /// Automorphism parameters `re:im`, comma separated.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<String>,
    },
    /// Block formula at the origin and multiplier quasi-invariance of an elementary bundle.
    Bundle {
        /// Bundle params JSON: `{"eta", "dims", "Y", "N"}`.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value = "0.3")]
        alpha: String,
        /// Rotation angle; the involution `φ_α` when omitted.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

impl Command {
    pub fn verb(&self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Gap { .. } => "gap",
            Command::Extremal => "extremal",
            Command::Contractive { .. } => "contractive",
            Command::Infdiv { .. } => "infdiv",
            Command::Localize { .. } => "localize",
            Command::Jet { .. } => "jet",
            Command::MuCheck { .. } => "mu-check",
            Command::Quotient { .. } => "quotient",
            Command::Blowup { .. } => "blowup",
            Command::FlagCompare => "flag-compare",
            Command::Homog { .. } => "homog",
            Command::Bundle { .. } => "bundle",
        }
    }
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Usage(format!("cannot parse \"{s}\" as a complex number")));
    match s.split_once(':') {
        Some((re, im)) => Ok(C64::new(num(re)?, num(im)?)),
        None => Ok(C64::new(num(s)?, 0.0)),
    }
}

/// Coordinates `re:im` separated by commas.
pub fn parse_point(domain: Domain, s: &str) -> Result<DomainPoint> {
    let coords = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    if coords.len() != domain.dim() {
        return Err(Error::Usage(format!("point \"{s}\" has {} coordinates, the {domain} needs {}", coords.len(), domain.dim())));
    }
    DomainPoint::new(domain, coords)
}

fn verdict_str(r: &PDReport) -> String {
    to_json(&r.verdict).as_str().unwrap_or_default().to_string()
}

fn pd_table(rows: &[(Option<f64>, &PDReport)]) -> Table {
    let with_t = rows.iter().any(|r| r.0.is_some());
    let mut table = if with_t {
        Table::new(&["t", "min_eig", "max_eig", "tol_abs", "verdict"])
    } else {
        Table::new(&["min_eig", "max_eig", "tol_abs", "verdict"])
    };
    for (t, r) in rows {
        let mut row = Vec::new();
        if let Some(t) = t {
            row.push(t.to_string());
        }
        row.extend([r.min_eig.to_string(), r.max_eig.to_string(), r.tol_abs.to_string(), verdict_str(r)]);
        table.push(row);
    }
    table
}

struct Output {
    verdict: Outcome,
    summary: String,
    inputs: Value,
    results: Value,
    table: Table,
}

impl Cli {
    fn spec(&self, i: usize) -> Result<KernelSpec> {
        let path = self
            .spec
            .get(i)
            .ok_or_else(|| Error::Usage(format!("{} needs {} --spec argument(s)", self.command.verb(), i + 1)))?;
        load_spec(path)
    }

    fn sample_grid(&self, domain: Domain) -> Result<SampleGrid> {
        let r = self.grid_radius;
        match self.grid {
            GridKind::Default => SampleGrid::default_for(domain, self.seed),
            GridKind::Rings => SampleGrid::radial_rings(domain, &[0.0, r / 3.0, 2.0 * r / 3.0, r], 10),
            GridKind::Random => SampleGrid::uniform_random(domain, self.seed, self.grid_count, r),
            GridKind::Flag if domain == Domain::Disc => default_flag_grid(),
            GridKind::Flag => Err(Error::Usage("the flag grid lives on the disc".into())),
        }
    }

    fn base_inputs(&self, specs: &[&KernelSpec], grid: Option<&SampleGrid>) -> Value {
        json!({
            "specs": specs.iter().map(|s| to_value(s)).collect::<Vec<_>>(),
            "grid": grid.map(|g| to_json(g.strategy())),
            "grid_points": grid.map(|g| g.len()),
            "seed": self.seed,
            "tol_pd": self.tol_pd,
            "tol_curv": self.tol_curv,
        })
    }
}

/// Runs the parsed command and returns its report without writing it.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    let out = dispatch(cli)?;
    Ok(RunReport {
        verb: cli.command.verb().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: out.inputs,
        verdict: out.verdict,
        summary: out.summary,
        results: out.results,
        wall_time: cli.wall_time.then(|| start.elapsed().as_secs_f64()),
        table: out.table,
    })
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Curvature => curvature_verb(cli),
        Command::Gap { reference } => gap_verb(cli, reference.as_deref()),
        Command::Extremal => extremal_verb(cli),
        Command::Contractive { order } => contractive_verb(cli, *order),
        Command::Infdiv { t } => infdiv_verb(cli, t),
        Command::Localize { at, method } => localize_verb(cli, at.as_deref(), *method),
        Command::Jet { order } => jet_verb(cli, *order),
        Command::MuCheck { mu, order, degree } => mu_verb(mu, *order, *degree),
        Command::Quotient { degree, h, richardson, at, tol } => quotient_verb(cli, *degree, h, *richardson, at.as_deref(), *tol),
        Command::Blowup { theta, degree } => blowup_verb(cli, theta, *degree),
        Command::FlagCompare => flag_verb(cli),
        Command::Homog { alpha } => homog_verb(cli, alpha),
        Command::Bundle { params, alpha, theta, pairs, tol } => bundle_verb(cli, params, alpha, *theta, *pairs, *tol),
    }
}

fn curvature_verb(cli: &Cli) -> Result<Output> {
    let spec = cli.spec(0)?;
    let grid = cli.sample_grid(spec.domain())?;
    let forms = grid.points().par_iter().map(|w| curvature_form(&spec, w)).collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["w_re", "w_im", "kappa"]);
    let mut results = Vec::new();
    for f in &forms {
        let [re, im] = coords_cells(f.at.coords());
        let kappa = if f.matrix.nrows() == 1 {
            f.scalar().to_string()
        } else {
            f.eigenvalues().iter().map(f64::to_string).collect::<Vec<_>>().join(";")
        };
        table.push(vec![re, im, kappa]);
        results.push(json!({ "w": f.at.coords(), "kappa": matrix_json(&f.matrix) }));
    }
    Ok(Output {
        verdict: Outcome::Pass,
        summary: format!("curvature of {} at {} points", spec.label(), forms.len()),
        inputs: cli.base_inputs(&[&spec], Some(&grid)),
        results: Value::Array(results),
        table,
    })
}

fn gap_verb(cli: &Cli, reference: Option<&str>) -> Result<Output> {
    let spec = cli.spec(0)?;
    let reference = match reference {
        Some(r) => r.parse()?,
        None => match spec.domain() {
            Domain::Disc => CurvatureReference::DiscSzego,
            Domain::Ball(_) => CurvatureReference::BallBergmanNormalized,
            Domain::Polydisc(_) => return Err(Error::Usage("no default curvature reference on the polydisc".into())),
        },
    };
    let grid = cli.sample_grid(spec.domain())?;
    let report = curvature_gap_report(&spec, &grid, reference)?;
    let mut table = Table::new(&["w_re", "w_im", "kappa", "kappa_ref", "gap", "verdict"]);
    for r in &report.rows {
        let [re, im] = coords_cells(&r.w);
        let verdict = if r.satisfied { "satisfied" } else { "violated" };
        table.push(vec![re, im, r.kappa.to_string(), r.kappa_ref.to_string(), r.gap.to_string(), verdict.into()]);
    }
    let violated = report.rows.iter().filter(|r| !r.satisfied).count();
    Ok(Output {
        verdict: Outcome::from_bool(report.satisfied),
        summary: format!("gap against {reference}: {violated} of {} points violated", report.rows.len()),
        inputs: cli.base_inputs(&[&spec], Some(&grid)),
        results: to_json(&report),
        table,
    })
}

fn extremal_verb(cli: &Cli) -> Result<Output> {
    let spec = cli.spec(0)?;
    let grid = cli.sample_grid(Domain::Disc)?;
    let reports = grid
        .points()
        .par_iter()
        .map(|z| extremality_point_test(&spec, z.z(), cli.tol_curv))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["zeta_re", "zeta_im", "det", "det_scale", "extremal", "curvature_residual", "agrees"]);
    for r in &reports {
        table.push(vec![
            r.zeta.re.to_string(),
            r.zeta.im.to_string(),
            r.det.to_string(),
            r.det_scale.to_string(),
            r.extremal.to_string(),
            r.curvature_residual.to_string(),
            r.agrees.to_string(),
        ]);
    }
    let extremal = reports.iter().filter(|r| r.extremal).count();
    Ok(Output {
        verdict: Outcome::from_bool(extremal == reports.len()),
        summary: format!("extremal at {extremal} of {} points", reports.len()),
        inputs: cli.base_inputs(&[&spec], Some(&grid)),
        results: to_json(&reports),
        table,
    })
}

fn contractive_verb(cli: &Cli, order: u32) -> Result<Output> {
    let spec = cli.spec(0)?;
    let grid = cli.sample_grid(spec.domain())?;
    let dagger = contractivity_kernel(&spec, spec.domain(), order)?;
    let report = sampled_verdict(&dagger, &grid, cli.tol_pd)?;
    let mut inputs = cli.base_inputs(&[&spec], Some(&grid));
    inputs["order"] = json!(order);
    Ok(Output {
        verdict: Outcome::from_bool(report.passes()),
        summary: format!("{}: {}", dagger.label(), verdict_str(&report)),
        inputs,
        results: to_json(&report),
        table: pd_table(&[(None, &report)]),
    })
}

fn infdiv_verb(cli: &Cli, t: &[f64]) -> Result<Output> {
    let spec = cli.spec(0)?;
    let grid = cli.sample_grid(spec.domain())?;
    let report = infinite_divisibility_test(&spec, spec.domain(), t, &grid, cli.tol_pd)?;
    let rows: Vec<(Option<f64>, &PDReport)> = report.powers.iter().map(|p| (Some(p.t), &p.report)).collect();
    let failing = report.powers.iter().filter(|p| !p.report.passes()).count();
    let mut inputs = cli.base_inputs(&[&spec], Some(&grid));
    inputs["t"] = json!(t);
    Ok(Output {
        verdict: Outcome::from_bool(report.infinitely_divisible),
        summary: format!("{failing} of {} powers indefinite", t.len()),
        inputs,
        results: to_json(&report),
        table: pd_table(&rows),
    })
}

fn localize_verb(cli: &Cli, at: Option<&str>, method: MethodArg) -> Result<Output> {
    let spec = cli.spec(0)?;
    let w0 = match at {
        Some(s) => parse_point(spec.domain(), s)?,
        None => DomainPoint::origin(spec.domain()),
    };
    let method = match method {
        MethodArg::Symmetric => Orthonormalization::Symmetric,
        MethodArg::Sequential => Orthonormalization::Sequential,
    };
    let data = nilpotent_data(&spec, &w0, method)?;
    let kappa = curvature_form(&spec, &w0)?.matrix;
    let target = (-kappa.transpose())
        .try_inverse()
        .ok_or(Error::SingularGram { min_eig: 0.0 })?;
    let a_gram = data.a_gram().ok_or(Error::SingularGram { min_eig: 0.0 })?;
    let residual = (&target - &a_gram).norm();
    let mut table = Table::new(&["i", "j", "a_gram_re", "a_gram_im", "target_re", "target_im"]);
    for i in 0..target.nrows() {
        for j in 0..target.ncols() {
            table.push(vec![
                (i + 1).to_string(),
                (j + 1).to_string(),
                a_gram[(i, j)].re.to_string(),
                a_gram[(i, j)].im.to_string(),
                target[(i, j)].re.to_string(),
                target[(i, j)].im.to_string(),
            ]);
        }
    }
    let mut inputs = cli.base_inputs(&[&spec], None);
    inputs["at"] = json!(w0.coords());
    inputs["method"] = to_json(&method);
    Ok(Output {
        verdict: Outcome::from_bool(residual <= cli.tol_curv * target.norm().max(1.0)),
        summary: format!("curvature identity residual {residual:e}"),
        inputs,
        results: json!({
            "curvature": matrix_json(&kappa),
            "a_gram": matrix_json(&a_gram),
            "trace_matrix": matrix_json(&data.trace_matrix()),
            "nilpotency_residual": data.nilpotency_residual(),
            "h": data.h(),
            "residual": residual,
        }),
        table,
    })
}

fn jet_verb(cli: &Cli, order: usize) -> Result<Output> {
    let spec = cli.spec(0)?;
    let grid = cli.sample_grid(spec.domain())?;
    let jet = jet_kernel(&spec, order)?;
    let report = sampled_verdict(&jet, &grid, cli.tol_pd)?;
    let mut inputs = cli.base_inputs(&[&spec], Some(&grid));
    inputs["order"] = json!(order);
    Ok(Output {
        verdict: Outcome::from_bool(report.passes()),
        summary: format!("jet kernel of order {order}: {}", verdict_str(&report)),
        inputs,
        results: to_json(&report),
        table: pd_table(&[(None, &report)]),
    })
}

fn mu_verb(mu: &str, order: usize, degree: usize) -> Result<Output> {
    let lower = mu.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    let matrix = MuMatrix::from_lower(order, &lower)?;
    let check = mu_admissibility(&matrix, degree);
    let mut table = Table::new(&["admissible", "failure_row", "failure_col"]);
    let (r, c) = check.first_failure.map_or((String::new(), String::new()), |(r, c)| (r.to_string(), c.to_string()));
    table.push(vec![check.admissible.to_string(), r, c]);
    Ok(Output {
        verdict: Outcome::from_bool(check.admissible),
        summary: if check.admissible { "mu is admissible".into() } else { "mu is not admissible".into() },
        inputs: json!({ "mu": matrix_json(matrix.entries()), "order": order, "degree": degree }),
        results: to_json(&check),
        table,
    })
}

fn quotient_verb(cli: &Cli, degree: usize, h: &[f64], richardson: bool, at: Option<&str>, tol: f64) -> Result<Output> {
    let spec = if cli.spec.is_empty() { KernelSpec::szego() } else { cli.spec(0)? };
    if h.is_empty() {
        return Err(Error::Usage("quotient needs at least one step --h".into()));
    }
    let z = at.map(parse_complex).transpose()?.unwrap_or_default();
    let p = DomainPoint::disc(z)?;
    let expected = ktilde_kernel(&spec)?.eval_scalar(&p, &p)? * 0.5;
    let k1 = VanishingSubmoduleKernel::new(&spec, degree)?;
    let mut table = Table::new(&["h", "quotient_re", "quotient_im", "expected_re", "expected_im", "error"]);
    let mut rows = Vec::new();
    for &step in h {
        let q = k1.limit_quotient(z, z, step, richardson)?;
        let error = (q - expected).norm();
        table.push(vec![
            step.to_string(),
            q.re.to_string(),
            q.im.to_string(),
            expected.re.to_string(),
            expected.im.to_string(),
            error.to_string(),
        ]);
        rows.push(json!({ "h": step, "quotient": q, "error": error }));
    }
    let finest = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let error = (k1.limit_quotient(z, z, finest, richardson)? - expected).norm();
    let mut inputs = cli.base_inputs(&[&spec], None);
    inputs["degree"] = json!(degree);
    inputs["h"] = json!(h);
    inputs["richardson"] = json!(richardson);
    inputs["at"] = json!(z);
    Ok(Output {
        verdict: Outcome::from_bool(error <= tol),
        summary: format!("error {error:e} at h = {finest}"),
        inputs,
        results: json!({ "expected": expected, "rows": rows }),
        table,
    })
}

fn blowup_verb(cli: &Cli, theta: &[String], degree: usize) -> Result<Output> {
    let thetas = theta.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["theta_re", "theta_im", "curvature", "expected", "error"]);
    let mut ok = true;
    let mut rows = Vec::new();
    for t in &thetas {
        let data = h20_blowup(Chart::First(*t));
        let expected = (1.0 + t.norm_sqr()).powi(-2);
        let error = (data.curvature - expected).abs();
        ok &= error <= cli.tol_curv;
        table.push(vec![t.re.to_string(), t.im.to_string(), data.curvature.to_string(), expected.to_string(), error.to_string()]);
        rows.push(to_json(&data));
    }
    let zero = C64::new(0.0, 0.0);
    let points = [[zero, zero], [C64::new(0.5, 0.0), zero], [zero, C64::new(0.0, 0.5)], [C64::new(0.3, 0.0), C64::new(-0.2, 0.1)]];
    let mut ranks = Vec::new();
    for (i, w) in points.iter().enumerate() {
        let rank = h20_joint_kernel_rank(*w, degree)?;
        ok &= rank == if i == 0 { 2 } else { 1 };
        ranks.push(json!({ "w": w, "rank": rank }));
    }
    Ok(Output {
        verdict: Outcome::from_bool(ok),
        summary: format!("blow-up curvature at {} charts, joint kernel rank at {} points", thetas.len(), points.len()),
        inputs: json!({ "theta": thetas, "degree": degree, "tol_curv": cli.tol_curv }),
        results: json!({ "charts": rows, "joint_kernel_rank": ranks }),
        table,
    })
}

fn as_flag(spec: &KernelSpec) -> Result<FlagKernelSpec> {
    match spec.family() {
        Family::Flag { k0, k1 } => flag_kernel(k0, k1),
        _ => Err(Error::Usage(format!("flag-compare needs specs of family flag, got {}", spec.label()))),
    }
}

fn flag_verb(cli: &Cli) -> Result<Output> {
    let (sa, sb) = (cli.spec(0)?, cli.spec(1)?);
    let (a, b) = (as_flag(&sa)?, as_flag(&sb)?);
    let grid = match cli.grid {
        GridKind::Default => default_flag_grid()?,
        _ => cli.sample_grid(Domain::Disc)?,
    };
    let verdict = flag_equivalence(&a, &b, &grid, cli.tol_curv)?;
    let (ia, ib) = (flag_invariants(&a, &grid)?, flag_invariants(&b, &grid)?);
    let mut table = Table::new(&["w_re", "w_im", "curv0_a", "curv0_b", "ratio_a", "ratio_b"]);
    for k in 0..ia.points.len() {
        table.push(vec![
            ia.points[k].re.to_string(),
            ia.points[k].im.to_string(),
            ia.curv0[k].to_string(),
            ib.curv0[k].to_string(),
            ia.ratio[k].to_string(),
            ib.ratio[k].to_string(),
        ]);
    }
    let summary = match &verdict {
        crate::flag::FlagVerdict::Equivalent => "equivalent".to_string(),
        crate::flag::FlagVerdict::Inequivalent { at, invariant, .. } => {
            format!("inequivalent: {} differs at {at}", to_json(invariant).as_str().unwrap_or_default())
        }
    };
    Ok(Output {
        verdict: Outcome::from_bool(verdict.is_equivalent()),
        summary,
        inputs: cli.base_inputs(&[&sa, &sb], Some(&grid)),
        results: json!({ "verdict": verdict, "a": ia, "b": ib }),
        table,
    })
}

fn homog_verb(cli: &Cli, alpha: &[String]) -> Result<Output> {
    let spec = cli.spec(0)?;
    let alphas = if alpha.is_empty() {
        default_alpha_grid()
    } else {
        alpha.iter().map(|a| parse_complex(a)).collect::<Result<Vec<_>>>()?
    };
    let report = homogeneity_check(&spec, &alphas, cli.tol_curv)?;
    let mut table = Table::new(&["alpha_re", "alpha_im", "kappa", "expected", "residual"]);
    for r in &report.rows {
        table.push(vec![
            r.alpha.re.to_string(),
            r.alpha.im.to_string(),
            r.kappa.to_string(),
            r.expected.to_string(),
            r.residual.to_string(),
        ]);
    }
    let mut inputs = cli.base_inputs(&[&spec], None);
    inputs["alpha"] = json!(alphas);
    Ok(Output {
        verdict: Outcome::from_bool(report.homogeneous),
        summary: if report.homogeneous { "homogeneous".into() } else { "not homogeneous".into() },
        inputs,
        results: to_json(&report),
        table,
    })
}

fn bundle_verb(cli: &Cli, params: &Path, alpha: &str, theta: Option<f64>, pairs: usize, tol: f64) -> Result<Output> {
    let params = ElementaryBundleParams::load(params)?;
    let alpha = parse_complex(alpha)?;
    let g = match theta {
        Some(t) => Automorphism::rotation_mobius(t, alpha)?,
        None => Automorphism::phi(alpha)?,
    };
    let gram = elementary_bundle_gram0(&params)?;
    let samples = sample_pairs(cli.seed, pairs, 0.7);
    let mut table = Table::new(&["z_re", "z_im", "w_re", "w_im", "residual"]);
    let mut worst: f64 = 0.0;
    for &(z, w) in &samples {
        let r = multiplier_quasi_invariance(&params, &g, &[(z, w)], tol)?.residual;
        worst = worst.max(r);
        table.push(vec![z.re.to_string(), z.im.to_string(), w.re.to_string(), w.im.to_string(), r.to_string()]);
    }
    let blocks: Vec<Value> = gram.blocks.iter().map(matrix_json).collect();
    let mats = |ms: &[CMat]| ms.iter().map(matrix_json).collect::<Vec<_>>();
    Ok(Output {
        verdict: Outcome::from_bool(worst <= tol),
        summary: format!("quasi-invariance residual {worst:e}"),
        inputs: json!({
            "eta": params.eta(),
            "dims": params.dims(),
            "Y": mats(params.y_blocks()),
            "N": mats(params.n_blocks()),
            "automorphism": g,
            "pairs": pairs,
            "seed": cli.seed,
            "tol": tol,
        }),
        results: json!({ "blocks": blocks, "h": matrix_json(&gram.h), "residual": worst }),
        table,
    })
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(None) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got \"{raw}\"")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::Usage(e.to_string()))
}

fn execute(cli: &Cli) -> Result<RunReport> {
    let report = match thread_pool()? {
        Some(pool) => pool.install(|| run(cli))?,
        None => run(cli)?,
    };
    write_report(&report, cli.format, cli.out.as_deref())?;
    Ok(report)
}

/// Parses `args` (including the program name), runs the verb, writes the
/// report and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            eprintln!("{}: {}", report.verb, report.summary);
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
