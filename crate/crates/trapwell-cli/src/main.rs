mod output;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trapwell::discontinuity::{
    build_discontinuous, hermiticity_defect, norm_series, overlap, piecewise_wronskian, uniqueness_obstruction,
};
use trapwell::eigenfunction::solve_all;
use trapwell::fdsolver::{build_grid_with_exterior, build_operator, fd_eigenvalues_tol};
use trapwell::spectrum::{find_eigenvalues_report, negative_beta_diagnostic, scan, Parity};
use trapwell::swlimit::{lambda_sweep, swp_absent_arcsin_form, swp_eigenvalues, swp_exists, swp_solve_all};
use trapwell::wavepacket::{evolve, project, triangular, triangular_coefficients, Eigenstate, InitialFunction};
use trapwell::well::{nondimensionalize, DimensionalWell, ELECTRON_MASS, EV_PER_JOULE, HBAR};
use trapwell::{Error, WellSpec};

use output::{header, write_csv, write_json, Conversion, Doc, EigenOut, Meta};

#[derive(Parser, Debug)]
#[command(name = "trapwell", version, about = "Bound states of trapezoidal and square potential wells")]
#[command(allow_negative_numbers = true)]
struct Cli {
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the command's data table here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Eigenvalues of a trapezoid well.
    Solve(SolveArgs),
    /// D, D°, D* and theta across (0, v2), optionally over negative beta too.
    Scan(ScanArgs),
    /// Coefficients and samples of the eigenfunctions.
    Eigenfunction(EigenfunctionArgs),
    /// Trapezoid spectra for shrinking ramps against the square well.
    SweepLambda(SweepArgs),
    /// Square-well spectrum and eigenfunctions.
    Swp(SwpArgs),
    /// Projection of an initial wavefunction and its time evolution.
    Project(ProjectArgs),
    /// Square-well eigenfunctions with jumps.
    Discont(DiscontArgs),
    /// Eigenvalues from the grid solver.
    Fd(FdArgs),
    /// Reference wells, one PASS/FAIL line each.
    Validate,
}

#[derive(Args, Debug, Clone, Serialize)]
struct WellArgs {
    #[arg(long, allow_negative_numbers = true)]
    v1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Left shoulder height in eV.
    #[arg(long = "V1-eV", allow_negative_numbers = true)]
    v1_ev: Option<f64>,
    /// Right shoulder height in eV.
    #[arg(long = "V2-eV", allow_negative_numbers = true)]
    v2_ev: Option<f64>,
    /// Half-width of the flat bottom in angstrom.
    #[arg(long = "L-angstrom", allow_negative_numbers = true)]
    half_width_angstrom: Option<f64>,
    /// Ramp width in angstrom.
    #[arg(long = "l-angstrom", allow_negative_numbers = true)]
    ramp_angstrom: Option<f64>,
    /// `electron` or a mass in kg.
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    well: WellArgs,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    #[command(flatten)]
    well: WellArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 400)]
    points: usize,
    /// Points of the negative-beta grid on [-5 v2, 0); 0 skips it.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    negative_points: usize,
}

#[derive(Args, Debug, Serialize)]
struct EigenfunctionArgs {
    #[command(flatten)]
    well: WellArgs,
    /// Only this state.
    #[arg(long, allow_negative_numbers = true)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 801)]
    samples: usize,
    #[arg(long, allow_negative_numbers = true)]
    xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xmax: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    well: WellArgs,
    /// Descending ramp widths.
    #[arg(
        long,
        allow_hyphen_values = true,
        value_delimiter = ',',
        default_value = "0.1,0.01,0.001,0.0001,0.00001,0.000001,0.000000001"
    )]
    lambdas: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SwpArgs {
    #[command(flatten)]
    well: WellArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 801)]
    samples: usize,
}

#[derive(Args, Debug, Serialize)]
struct ProjectArgs {
    #[command(flatten)]
    well: WellArgs,
    /// `triangular` or `eigenstate:N`.
    #[arg(long, allow_negative_numbers = true, default_value = "triangular")]
    initial: String,
    /// Times at which to evolve.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', default_value = "0")]
    tau: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 401)]
    samples: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = -3.0)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 3.0)]
    xmax: f64,
    /// Table of tau, xi, Re, Im, |Psi|^2.
    #[arg(long, allow_negative_numbers = true)]
    psi_csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DiscontArgs {
    #[command(flatten)]
    well: WellArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    n: usize,
    /// phi(-1+) - phi(-1-).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    jump_left: f64,
    /// phi(1+) - phi(1-).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    jump_right: f64,
    /// Continuous state paired with the discontinuous one.
    #[arg(long, allow_negative_numbers = true)]
    partner: Option<usize>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
    tau_max: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1000)]
    tau_steps: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 801)]
    samples: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = -3.0)]
    xmin: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 3.0)]
    xmax: f64,
}

#[derive(Args, Debug, Serialize)]
struct FdArgs {
    #[command(flatten)]
    well: WellArgs,
    /// Points per zone, odd and at least 51.
    #[arg(long, allow_negative_numbers = true, default_value_t = 501)]
    points: usize,
    /// Points in each exterior zone; defaults to --points.
    #[arg(long, allow_negative_numbers = true)]
    exterior_points: Option<usize>,
    /// Decay lengths kept beyond each junction.
    #[arg(long, allow_negative_numbers = true, default_value_t = 40.0)]
    margin: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 6)]
    order: usize,
    /// Bisection width relative to max(1, beta).
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-12)]
    tol: f64,
    /// Write the matrix as `tag row col value` lines.
    #[arg(long, allow_negative_numbers = true)]
    dump: Option<PathBuf>,
}

enum CliError {
    Input(String),
    Numeric(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct ResolvedWell {
    well: WellSpec,
    mirrored: bool,
    conversion: Option<Conversion>,
}

fn parse_mass(s: Option<&str>) -> CliResult<f64> {
    match s {
        None | Some("electron") => Ok(ELECTRON_MASS),
        Some(t) => t
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("--mass must be `electron` or a number in kg, got `{t}`"))),
    }
}

impl WellArgs {
    fn resolve(&self, need_lambda: bool) -> CliResult<ResolvedWell> {
        let nondim = self.v1.is_some() || self.v2.is_some() || self.lambda.is_some();
        let dim = self.v1_ev.is_some()
            || self.v2_ev.is_some()
            || self.half_width_angstrom.is_some()
            || self.ramp_angstrom.is_some()
            || self.mass.is_some();
        if nondim == dim {
            return Err(CliError::Input(
                "give exactly one of --v1/--v2/--lambda or --V1-eV/--V2-eV/--L-angstrom/--l-angstrom/--mass".into(),
            ));
        }
        let missing = |name: &str| CliError::Input(format!("missing {name}"));
        if nondim {
            let (mut v1, mut v2) = (self.v1.ok_or_else(|| missing("--v1"))?, self.v2.ok_or_else(|| missing("--v2"))?);
            let lambda = match (self.lambda, need_lambda) {
                (Some(l), _) => l,
                (None, false) => 0.0,
                (None, true) => return Err(missing("--lambda")),
            };
            let mirrored = v1 < v2;
            if mirrored {
                std::mem::swap(&mut v1, &mut v2);
            }
            return Ok(ResolvedWell { well: WellSpec::new(v1, v2, lambda)?, mirrored, conversion: None });
        }
        let mut v1 = self.v1_ev.ok_or_else(|| missing("--V1-eV"))?;
        let mut v2 = self.v2_ev.ok_or_else(|| missing("--V2-eV"))?;
        let half = self.half_width_angstrom.ok_or_else(|| missing("--L-angstrom"))?;
        let ramp = match (self.ramp_angstrom, need_lambda) {
            (Some(l), _) => l,
            (None, false) => 0.0,
            (None, true) => return Err(missing("--l-angstrom")),
        };
        let mass = parse_mass(self.mass.as_deref())?;
        let mirrored = v1 < v2;
        if mirrored {
            std::mem::swap(&mut v1, &mut v2);
        }
        let mut dw = DimensionalWell::electron_ev_angstrom(v1, v2, half, ramp);
        dw.mass_kg = mass;
        dw.hbar = HBAR;
        let well = nondimensionalize(&dw)?;
        let conversion = Conversion {
            v1_ev: v1,
            v2_ev: v2,
            half_width_angstrom: half,
            ramp_angstrom: ramp,
            mass_kg: mass,
            energy_unit_ev: dw.energy_unit() * EV_PER_JOULE,
            v1: well.v1,
            v2: well.v2,
            lambda: well.lambda,
        };
        Ok(ResolvedWell { well, mirrored, conversion: Some(conversion) })
    }
}

fn flags<T: Serialize>(args: &T) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(args) {
        flatten_into(&mut out, m);
    }
    out
}

fn flatten_into(out: &mut BTreeMap<String, String>, m: serde_json::Map<String, serde_json::Value>) {
    for (k, v) in m {
        match v {
            serde_json::Value::Null => {}
            serde_json::Value::Object(inner) => flatten_into(out, inner),
            serde_json::Value::String(s) => {
                out.insert(k, s);
            }
            other => {
                out.insert(k, other.to_string());
            }
        }
    }
}

fn meta<T: Serialize>(command: &'static str, args: &T, rw: &ResolvedWell) -> Meta {
    Meta {
        version: env!("CARGO_PKG_VERSION"),
        command,
        flags: flags(args),
        mirrored: rw.mirrored,
        conversion: rw.conversion.clone(),
    }
}

/// Coordinate in the solver's orientation for a user coordinate.
fn oriented(rw: &ResolvedWell, xi: f64) -> f64 {
    if rw.mirrored {
        -xi
    } else {
        xi
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn maybe_csv(path: Option<&Path>, head: Vec<String>, rows: &[Vec<f64>]) -> CliResult<()> {
    if let Some(p) = path {
        write_csv(p, &head, rows)?;
    }
    Ok(())
}

fn require_trapezoid(w: &WellSpec) -> CliResult<()> {
    if w.lambda == 0.0 {
        return Err(CliError::Input("lambda = 0 is the square well; use the `swp` command".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveDiag {
    count: usize,
    theta_end: f64,
    monotonicity_violations: usize,
    newton_iterations: Vec<usize>,
    threshold_flags: Vec<bool>,
}

fn cmd_solve(cli: &Cli, a: &SolveArgs) -> CliResult<()> {
    let rw = a.well.resolve(true)?;
    require_trapezoid(&rw.well)?;
    let rep = find_eigenvalues_report(&rw.well)?;
    let diag = SolveDiag {
        count: rep.records.len(),
        theta_end: rep.theta_end,
        monotonicity_violations: rep.monotonicity_violations,
        newton_iterations: rep.records.iter().map(|r| r.newton_iterations).collect(),
        threshold_flags: rep.records.iter().map(|r| r.threshold).collect(),
    };
    let doc = Doc {
        well: rw.well,
        eigenvalues: rep.records.iter().map(EigenOut::from).collect(),
        diagnostics: diag,
        meta: meta("solve", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct ScanDiag {
    rows: usize,
    theta_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    negative_beta_min_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    negative_beta_at: Option<f64>,
}

fn cmd_scan(cli: &Cli, a: &ScanArgs) -> CliResult<()> {
    let rw = a.well.resolve(true)?;
    require_trapezoid(&rw.well)?;
    let w = rw.well;
    let rows = scan(&w, a.points)?;
    let rep = find_eigenvalues_report(&w)?;
    let mut diag =
        ScanDiag { rows: rows.len(), theta_end: rep.theta_end, negative_beta_min_abs: None, negative_beta_at: None };
    let mut table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.beta_over_v2 * w.v2, r.beta_over_v2, r.d_raw.unwrap_or(f64::NAN), r.d_circ, r.d_star, r.theta])
        .collect();
    if a.negative_points > 0 {
        let grid = linspace(-5.0 * w.v2, 0.0, a.negative_points + 1);
        let neg = negative_beta_diagnostic(&w, &grid[..a.negative_points])?;
        diag.negative_beta_min_abs = Some(neg.min_abs);
        diag.negative_beta_at = Some(neg.at_beta);
        for p in &neg.points {
            table.push(vec![p.beta, p.beta / w.v2, f64::NAN, f64::NAN, p.value, f64::NAN]);
        }
        table.sort_by(|x, y| x[0].total_cmp(&y[0]));
    }
    maybe_csv(cli.csv.as_deref(), header(&["beta", "beta_over_v2", "d_raw", "d_circ", "d_star", "theta"]), &table)?;
    let doc = Doc {
        well: w,
        eigenvalues: rep.records.iter().map(EigenOut::from).collect(),
        diagnostics: diag,
        meta: meta("scan", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct StateDiag<C: Serialize> {
    n: usize,
    beta: f64,
    coefficients: C,
    normalization_sum: f64,
    junction_mismatch: [f64; 3],
    nodes: usize,
}

fn cmd_eigenfunction(cli: &Cli, a: &EigenfunctionArgs) -> CliResult<()> {
    let rw = a.well.resolve(true)?;
    require_trapezoid(&rw.well)?;
    let w = rw.well;
    let mut states = solve_all(&w)?;
    if let Some(n) = a.n {
        states.retain(|s| s.record.index_n == n);
        if states.is_empty() {
            return Err(CliError::Input(format!("no state n = {n}")));
        }
    }
    let e = 1.0 + w.lambda;
    let xs = linspace(a.xmin.unwrap_or(-e - 3.0), a.xmax.unwrap_or(e + 3.0), a.samples);
    let sign = if rw.mirrored { -1.0 } else { 1.0 };
    let mut head = vec!["xi".to_string()];
    for s in &states {
        let n = s.record.index_n;
        head.extend([format!("phi_{n}"), format!("dphi_{n}"), format!("d2phi_{n}")]);
    }
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let mut r = vec![x];
            for s in &states {
                let v = s.eval_all(oriented(&rw, x));
                r.extend([v[0], sign * v[1], v[2]]);
            }
            r
        })
        .collect();
    maybe_csv(cli.csv.as_deref(), head, &rows)?;
    let diag: Vec<StateDiag<_>> = states
        .iter()
        .map(|s| StateDiag {
            n: s.record.index_n,
            beta: s.beta(),
            coefficients: s.coeffs,
            normalization_sum: s.normalization_sum(),
            junction_mismatch: s.junction_mismatch(),
            nodes: s.node_count(4001),
        })
        .collect();
    let doc = Doc {
        well: w,
        eigenvalues: states.iter().map(|s| EigenOut::from(&s.record)).collect(),
        diagnostics: diag,
        meta: meta("eigenfunction", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> CliResult<()> {
    let rw = a.well.resolve(false)?;
    let w = rw.well;
    let sweep = lambda_sweep(w.v1, w.v2, &a.lambdas)?;
    let rows: Vec<Vec<f64>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.lambda,
                r.n as f64,
                r.beta_twp,
                r.beta_swp.unwrap_or(f64::NAN),
                r.abs_dev.unwrap_or(f64::NAN),
                r.d2jump_left,
                r.d2jump_right,
            ]
        })
        .collect();
    maybe_csv(
        cli.csv.as_deref(),
        header(&["lambda", "n", "beta_twp", "beta_swp", "abs_dev", "d2jump_left", "d2jump_right"]),
        &rows,
    )?;
    let doc = Doc {
        well: WellSpec { lambda: 0.0, ..w },
        eigenvalues: sweep.swp.iter().map(EigenOut::from).collect(),
        diagnostics: sweep,
        meta: meta("sweep-lambda", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct SwpDiag {
    exists: bool,
    absent_arcsin_form: bool,
    states: Vec<trapwell::swlimit::SquareWellSolution>,
}

fn cmd_swp(cli: &Cli, a: &SwpArgs) -> CliResult<()> {
    let rw = a.well.resolve(false)?;
    let w = WellSpec { lambda: 0.0, ..rw.well };
    let recs = swp_eigenvalues(w.v1, w.v2)?;
    let states = swp_solve_all(w.v1, w.v2)?;
    let xs = linspace(-4.0, 4.0, a.samples);
    let mut head = vec!["xi".to_string()];
    head.extend(states.iter().map(|s| format!("phi_{}", s.record.index_n)));
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| std::iter::once(x).chain(states.iter().map(|s| s.eval_phi(oriented(&rw, x)))).collect())
        .collect();
    maybe_csv(cli.csv.as_deref(), head, &rows)?;
    let diag =
        SwpDiag { exists: swp_exists(w.v1, w.v2)?, absent_arcsin_form: swp_absent_arcsin_form(w.v1, w.v2)?, states };
    let doc = Doc {
        well: w,
        eigenvalues: recs.iter().map(EigenOut::from).collect(),
        diagnostics: diag,
        meta: meta("swp", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct ProjectDiag {
    projection: trapwell::wavepacket::ProjectionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<Vec<f64>>,
    norms: Vec<(f64, f64)>,
}

fn parse_initial(s: &str) -> CliResult<InitialFunction> {
    if s == "triangular" {
        return Ok(InitialFunction::Triangular);
    }
    if let Some(n) = s.strip_prefix("eigenstate:") {
        let n: usize = n.parse().map_err(|_| CliError::Input(format!("bad state index in `{s}`")))?;
        if n == 0 {
            return Err(CliError::Input("states are numbered from 1".into()));
        }
        return Ok(InitialFunction::Eigenstate(n));
    }
    Err(CliError::Input(format!("--initial must be `triangular` or `eigenstate:N`, got `{s}`")))
}

fn run_project<S: Eigenstate>(cli: &Cli, a: &ProjectArgs, rw: &ResolvedWell, basis: &[S]) -> CliResult<ProjectDiag> {
    let tag = parse_initial(&a.initial)?;
    let proj = match &tag {
        InitialFunction::Eigenstate(n) => {
            let s = basis.get(n - 1).ok_or_else(|| CliError::Input(format!("no state n = {n}")))?;
            project(&|x| s.phi(x), &s.breakpoints(), tag.clone(), basis)?
        }
        _ => {
            let m = rw.mirrored;
            project(&move |x| triangular(if m { -x } else { x }), &[-1.0, 0.0, 1.0], tag.clone(), basis)?
        }
    };
    let closed_form = matches!(tag, InitialFunction::Triangular).then(|| triangular_coefficients(basis));
    let xs = linspace(a.xmin, a.xmax, a.samples);
    let oxs: Vec<f64> = xs.iter().map(|&x| oriented(rw, x)).collect();
    let mut norms = Vec::new();
    let mut psi_rows = Vec::new();
    for &t in &a.tau {
        let st = evolve(&proj, basis, t, &oxs)?;
        norms.push((t, st.norm));
        for (x, p) in xs.iter().zip(&st.psi) {
            psi_rows.push(vec![t, *x, p.re, p.im, p.norm_sqr()]);
        }
    }
    let rows: Vec<Vec<f64>> = proj
        .coefficients
        .iter()
        .zip(&proj.probabilities)
        .enumerate()
        .map(|(i, (c, p))| vec![(i + 1) as f64, *c, *p])
        .collect();
    maybe_csv(cli.csv.as_deref(), header(&["n", "c_n", "P_n"]), &rows)?;
    maybe_csv(a.psi_csv.as_deref(), header(&["tau", "xi", "re_psi", "im_psi", "abs2_psi"]), &psi_rows)?;
    Ok(ProjectDiag { projection: proj, closed_form, norms })
}

fn cmd_project(cli: &Cli, a: &ProjectArgs) -> CliResult<()> {
    let rw = a.well.resolve(false)?;
    let w = rw.well;
    let (eig, diag) = if w.lambda == 0.0 {
        let basis = swp_solve_all(w.v1, w.v2)?;
        (basis.iter().map(|s| EigenOut::from(&s.record)).collect(), run_project(cli, a, &rw, &basis)?)
    } else {
        let basis = solve_all(&w)?;
        (basis.iter().map(|s| EigenOut::from(&s.record)).collect(), run_project(cli, a, &rw, &basis)?)
    };
    let doc = Doc { well: w, eigenvalues: eig, diagnostics: diag, meta: meta("project", a, &rw) };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct DiscontDiag {
    state: trapwell::discontinuity::DiscontinuousEigenfunction,
    /// (1/2) integral of phi^2.
    normalization_integral: f64,
    measured_jumps_left: [f64; 3],
    measured_jumps_right: [f64; 3],
    /// Wronskian with the continuous state of the same beta at xi = -3, 0, 3.
    wronskian: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    uniqueness: Option<trapwell::discontinuity::Obstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partner: Option<PartnerDiag>,
}

#[derive(Serialize)]
struct PartnerDiag {
    n: usize,
    overlap: trapwell::discontinuity::Overlap,
    hermiticity: trapwell::discontinuity::HermiticityReport,
    norm_drift: f64,
    control_norm_drift: f64,
}

fn cmd_discont(cli: &Cli, a: &DiscontArgs) -> CliResult<()> {
    let rw = a.well.resolve(false)?;
    if rw.well.lambda != 0.0 {
        return Err(CliError::Input("jumps are only defined for the square well; omit --lambda or set it to 0".into()));
    }
    let (v1, v2) = (rw.well.v1, rw.well.v2);
    // In the reflected well the user's left jump sits at +1 with the opposite sign.
    let (jl, jr) = if rw.mirrored { (-a.jump_right, -a.jump_left) } else { (a.jump_left, a.jump_right) };
    let recs = swp_eigenvalues(v1, v2)?;
    let rec = recs.get(a.n.wrapping_sub(1)).ok_or_else(|| CliError::Input(format!("no state n = {}", a.n)))?;
    let state = build_discontinuous(v1, v2, rec, jl, jr)?;
    let cont = build_discontinuous(v1, v2, rec, 0.0, 0.0)?;
    let (ml, mr) = state.measured_jumps();
    let wr = [
        piecewise_wronskian(&cont, &state, -3.0)?,
        piecewise_wronskian(&cont, &state, 0.0)?,
        piecewise_wronskian(&cont, &state, 3.0)?,
    ];
    let uniqueness = uniqueness_obstruction(&cont, &state).ok();
    let partner_n = a.partner.or(if recs.len() > 1 { Some(if a.n == 1 { 2 } else { 1 }) } else { None });
    let taus = linspace(0.0, a.tau_max, a.tau_steps + 1);
    let partner = match partner_n {
        Some(m) if m != a.n => {
            let prec = recs.get(m.wrapping_sub(1)).ok_or_else(|| CliError::Input(format!("no state n = {m}")))?;
            let p = build_discontinuous(v1, v2, prec, 0.0, 0.0)?;
            let c = [0.5f64.sqrt(), 0.5f64.sqrt()];
            let pair = [p.clone(), state.clone()];
            let series = norm_series(&pair, &c, &taus)?;
            let control = norm_series(&[p.clone(), cont.clone()], &c, &taus)?;
            let drift = |s: &[f64]| s.iter().map(|x| (x - s[0]).abs()).fold(0.0, f64::max);
            Some(PartnerDiag {
                n: m,
                overlap: overlap(&state, &p)?,
                hermiticity: hermiticity_defect(&pair, &c, 0.0)?,
                norm_drift: drift(&series),
                control_norm_drift: drift(&control),
            })
        }
        _ => None,
    };
    let xs = linspace(a.xmin, a.xmax, a.samples);
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let (c, d) = (cont.eval_phi(oriented(&rw, x)), state.eval_phi(oriented(&rw, x)));
            vec![x, c, d, c * c, d * d]
        })
        .collect();
    maybe_csv(
        cli.csv.as_deref(),
        header(&["xi", "phi_continuous", "phi_discontinuous", "phi2_continuous", "phi2_discontinuous"]),
        &rows,
    )?;
    let diag = DiscontDiag {
        normalization_integral: overlap(&state, &state)?.integral,
        state,
        measured_jumps_left: ml,
        measured_jumps_right: mr,
        wronskian: wr,
        uniqueness,
        partner,
    };
    let doc = Doc {
        well: WellSpec { lambda: 0.0, ..rw.well },
        eigenvalues: recs.iter().map(EigenOut::from).collect(),
        diagnostics: diag,
        meta: meta("discont", a, &rw),
    };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct FdDiag {
    points: usize,
    nominal_points: usize,
    cut_left: f64,
    cut_right: f64,
    ramps_collapsed: bool,
    count_below_v2: usize,
    bandwidth: usize,
    asymmetry: f64,
    shift_retries: usize,
}

fn cmd_fd(cli: &Cli, a: &FdArgs) -> CliResult<()> {
    let rw = a.well.resolve(true)?;
    let w = rw.well;
    let grid = build_grid_with_exterior(&w, a.points, a.exterior_points.unwrap_or(a.points), a.margin)?;
    let spec = fd_eigenvalues_tol(&w, &grid, a.order, a.tol)?;
    if let Some(p) = &a.dump {
        let op = build_operator(&grid, a.order)?;
        let mut f = BufWriter::new(File::create(p)?);
        op.write_triplets(&mut f)?;
    }
    let mut head = vec!["xi".to_string()];
    head.extend(spec.pairs.iter().map(|p| format!("phi_{}", p.index_n)));
    let idx: Vec<usize> = if rw.mirrored { (0..grid.len()).rev().collect() } else { (0..grid.len()).collect() };
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| {
            let x = oriented(&rw, grid.points[i]);
            std::iter::once(x).chain(spec.pairs.iter().map(|p| p.vector[i])).collect()
        })
        .collect();
    maybe_csv(cli.csv.as_deref(), head, &rows)?;
    let width = a.tol;
    let eig = spec
        .pairs
        .iter()
        .map(|p| EigenOut { n: p.index_n, beta: p.beta, residual: width * p.beta.max(1.0), parity: Parity::None })
        .collect();
    let diag = FdDiag {
        points: grid.len(),
        nominal_points: grid.nominal_len(),
        cut_left: grid.cut_left,
        cut_right: grid.cut_right,
        ramps_collapsed: grid.ramps_collapsed,
        count_below_v2: spec.count_below_v2,
        bandwidth: spec.bandwidth,
        asymmetry: spec.asymmetry,
        shift_retries: spec.shift_retries,
    };
    let doc = Doc { well: w, eigenvalues: eig, diagnostics: diag, meta: meta("fd", a, &rw) };
    write_json(&doc, cli.out.as_deref())?;
    Ok(())
}

fn cmd_validate(cli: &Cli) -> CliResult<bool> {
    let checks = trapwell::validate::fixture_checks();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(p) = &cli.out {
        let text = serde_json::to_string_pretty(&checks).map_err(|e| CliError::Numeric(e.to_string()))?;
        std::fs::write(p, text + "\n")?;
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("TRAPWELL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("TRAPWELL_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<bool> {
    configure_threads()?;
    match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(cli, a)?,
        Cmd::Scan(a) => cmd_scan(cli, a)?,
        Cmd::Eigenfunction(a) => cmd_eigenfunction(cli, a)?,
        Cmd::SweepLambda(a) => cmd_sweep(cli, a)?,
        Cmd::Swp(a) => cmd_swp(cli, a)?,
        Cmd::Project(a) => cmd_project(cli, a)?,
        Cmd::Discont(a) => cmd_discont(cli, a)?,
        Cmd::Fd(a) => cmd_fd(cli, a)?,
        Cmd::Validate => return cmd_validate(cli),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
