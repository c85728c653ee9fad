//! Command-line front end for the isosceles three-body numerics.

use std::env;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use isosceles::brake::{self, BrakeOrbit};
use isosceles::convexity::{self, ConvexityClass};
use isosceles::dynamics::{self, Model};
use isosceles::euler::{self, StabilityClass};
use isosceles::limitsys;
use isosceles::ode::Tolerance;
use isosceles::paramspace::{self, ReducedParams};
use isosceles::section::{self, HarvestConfig, OrbitRecord, OrbitType, Section, SectionPoint};
use isosceles::verify;

pub mod output;
pub mod svg;

use output::{Cell, Out};
use svg::Plot;

pub const OUT_ENV: &str = "ISOSCELES_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(String),
    Verify(usize),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) | CliError::Verify(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Io(s) => write!(f, "cannot write output: {s}"),
            CliError::Numeric(s) => write!(f, "{s}"),
            CliError::Verify(n) => write!(f, "{n} criteria failed"),
        }
    }
}

impl From<isosceles::Error> for CliError {
    fn from(e: isosceles::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "isosceles", version, about = "Numerics for the spatial isosceles three-body problem")]
pub struct Cli {
    /// Output directory; overrides $ISOSCELES_OUT_DIR (default ./isosceles-out)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for scans (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write SVG renderings next to the CSV files
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Mass parameter β ∈ (0, 1)
    #[arg(long, conflicts_with_all = ["beta_frac", "alpha"])]
    pub beta: Option<f64>,
    /// β as an exact fraction, e.g. 5/28
    #[arg(long, value_parser = parse_frac, conflicts_with = "alpha")]
    pub beta_frac: Option<f64>,
    /// Eccentricity ε ∈ [0, 1)
    #[arg(long, conflicts_with = "alpha")]
    pub eps: Option<f64>,
    /// Physical mass ratio α (with --varpi)
    #[arg(long, requires = "varpi")]
    pub alpha: Option<f64>,
    /// Angular momentum ϖ (with --alpha)
    #[arg(long, requires = "alpha")]
    pub varpi: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ReducedParams, CliError> {
        let p = if let (Some(a), Some(w)) = (self.alpha, self.varpi) {
            ReducedParams::from_alpha_varpi(a, w)
        } else {
            ReducedParams::new(self.beta.or(self.beta_frac).unwrap_or(0.6), self.eps.unwrap_or(0.6))
        };
        p.map_err(|e| CliError::Usage(e.to_string()))
    }

    fn in_domain(&self) -> Result<ReducedParams, CliError> {
        let p = self.resolve()?;
        if !p.is_in_domain() {
            return Err(CliError::Usage(format!(
                "(beta, eps) = ({}, {}) is outside the sphere-like domain",
                p.beta, p.eps
            )));
        }
        Ok(p)
    }
}

fn parse_frac(s: &str) -> Result<f64, String> {
    let (a, b) = s.split_once('/').ok_or_else(|| format!("expected p/q, got {s}"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in {s}"))?;
    if b == 0.0 {
        return Err("zero denominator".into());
    }
    Ok(a / b)
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Hill region boundary in the (r, z) half-plane
    Hill {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Euler orbit: rotation number, monodromy trace, stability, trajectory
    Euler {
        #[command(flatten)]
        params: ParamArgs,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Stability of the Euler orbit over the parameter domain, with band boundaries
    StabilityMap {
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Highest label n of the boundary curves
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
    /// Orbits of the return map ǧ seeded on the symmetry line p_r = 0
    ReturnMap {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 12)]
        orbits: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Limit-system hitting time T∞(u₀) on a geometric grid
    HittingTime {
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-3)]
        u0_min: f64,
        #[arg(long, default_value_t = 10.0)]
        u0_max: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Catalog of z-symmetric brake orbits by shooting
    Brake {
        #[command(flatten)]
        params: ParamArgs,
        /// Use the large-α window parameter at this α instead of --beta/--eps
        #[arg(long)]
        alpha_window: Option<f64>,
        #[arg(long, default_value_t = 256)]
        sweep: usize,
        #[arg(long, default_value_t = 12)]
        max: usize,
    },
    /// Symmetric periodic orbits from iterated boundary arcs and the symmetry line
    Harvest {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        per_type: usize,
        /// Also search (p, q)-orbits with p up to this bound
        #[arg(long, default_value_t = 0)]
        pq_max: i64,
    },
    /// Limit brake families and finite-α convergence gaps
    Limit {
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
    },
    /// Convexity classification, Δ heatmap, or the transition curve
    Convexity {
        #[command(flatten)]
        params: ParamArgs,
        /// Write the curve ε_conv(β) instead of a single-parameter report
        #[arg(long)]
        curve: bool,
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long, default_value_t = 120)]
        grid: usize,
    },
    /// Run the acceptance suite and print a pass/fail table
    Verify {
        /// Run only these criteria (1-14)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Parses argv, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("isosceles: {e}");
            e.code()
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("isosceles-out"))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second build in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Cmd::Verify { only } = &cli.cmd {
        return cmd_verify(only);
    }
    let out = Out::new(out_dir(cli), cli.svg)?;
    match &cli.cmd {
        Cmd::Hill { params, samples } => cmd_hill(&out, params, *samples),
        Cmd::Euler { params, json } => cmd_euler(&out, params, *json),
        Cmd::StabilityMap { grid, n_max } => cmd_stability(&out, *grid, *n_max),
        Cmd::ReturnMap { params, orbits, iters } => cmd_return_map(&out, params, *orbits, *iters),
        Cmd::HittingTime { c, u0_min, u0_max, n } => cmd_hitting_time(&out, *c, *u0_min, *u0_max, *n),
        Cmd::Brake { params, alpha_window, sweep, max } => cmd_brake(&out, params, *alpha_window, *sweep, *max),
        Cmd::Harvest { params, n_max, samples, per_type, pq_max } => {
            cmd_harvest(&out, params, *n_max, *samples, *per_type, *pq_max)
        }
        Cmd::Limit { c, k_max } => cmd_limit(&out, *c, *k_max),
        Cmd::Convexity { params, curve, n, grid } => cmd_convexity(&out, params, *curve, *n, *grid),
        Cmd::Verify { .. } => unreachable!(),
    }
}

fn wrote(p: &std::path::Path) {
    println!("wrote {}", p.display());
}

fn cmd_hill(out: &Out, params: &ParamArgs, samples: usize) -> Result<(), CliError> {
    let p = params.in_domain()?;
    let phys = p.to_physical();
    let class = paramspace::classify_surface(&phys)?;
    let hill = paramspace::hill_region(p, samples)?;
    let rows: Vec<Vec<Cell>> = hill.boundary.iter().map(|&(r, z)| row![r, z]).collect();
    wrote(&out.csv("hill_region.csv", "r,z", &rows)?);
    if let Some(f) = out.svg("hill_region.svg", || {
        let (xb, yb) = Plot::bounds(hill.boundary.iter().cloned());
        let mut pl =
            Plot::new(&format!("Hill region, alpha = {:.4}, varpi = {:.4}", phys.alpha, phys.varpi), "r", "z", xb, yb);
        pl.polyline(&hill.boundary, "black", true);
        pl.finish()
    })? {
        wrote(&f);
    }
    println!("surface {class:?}; r_min = {}, r_max = {}, kmax = {}", hill.r_min, hill.r_max, hill.kmax);
    Ok(())
}

#[derive(Serialize)]
struct EulerReport {
    beta: f64,
    eps: f64,
    alpha: f64,
    varpi: f64,
    r_min: f64,
    r_max: f64,
    period: f64,
    rho_e: f64,
    trace: f64,
    class: &'static str,
    h_drift: f64,
}

fn cmd_euler(out: &Out, params: &ParamArgs, json: bool) -> Result<(), CliError> {
    let p = params.resolve()?;
    let orbit = euler::build_euler(p);
    let v = euler::stability_classify(p)?;
    let model = Model::new(p);
    let tr = dynamics::flow(&model, &orbit.start(), orbit.period, Tolerance::tight())?;
    let rows: Vec<Vec<Cell>> =
        tr.samples.iter().map(|(t, s)| row![*t, s.p_r, s.p_z, s.r, s.z, model.hamiltonian(&s.arr()) + 1.0]).collect();
    wrote(&out.csv("euler_orbit.csv", "t,p_r,p_z,r,z,H_err", &rows)?);
    let phys = p.to_physical();
    let rep = EulerReport {
        beta: p.beta,
        eps: p.eps,
        alpha: phys.alpha,
        varpi: phys.varpi,
        r_min: orbit.r_min,
        r_max: orbit.r_max,
        period: orbit.period,
        rho_e: v.rho_e,
        trace: v.trace,
        class: v.class.name(),
        h_drift: tr.max_drift,
    };
    let line = output::json_line(&rep)?;
    wrote(&out.write("euler.json", &format!("{line}\n"))?);
    if let Some(f) = out.svg("euler_orbit.svg", || {
        let pts: Vec<(f64, f64)> = tr.samples.iter().map(|(_, s)| (s.r, s.p_r)).collect();
        let (xb, yb) = Plot::bounds(pts.iter().cloned());
        let mut pl = Plot::new("Euler orbit", "r", "p_r", xb, yb);
        pl.polyline(&pts, "black", false);
        pl.finish()
    })? {
        wrote(&f);
    }
    if json {
        println!("{line}");
    } else {
        println!("rho_e = {}, trace = {}, {}", v.rho_e, v.trace, v.class.name());
    }
    Ok(())
}

fn class_color(c: StabilityClass) -> &'static str {
    match c {
        StabilityClass::Elliptic => "#dddddd",
        StabilityClass::NegativeHyperbolic => "#2ca02c",
        StabilityClass::Degenerate => "#d62728",
    }
}

fn cmd_stability(out: &Out, grid: usize, n_max: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let h = 1.0 / grid as f64;
    let mut pts = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let (b, e) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if b * b + e * e < 1.0 {
                pts.push((b, e));
            }
        }
    }
    let verdicts: Vec<isosceles::Result<euler::StabilityVerdict>> =
        pts.par_iter().map(|&(b, e)| ReducedParams::new(b, e).and_then(euler::stability_classify)).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for ((b, e), v) in pts.iter().zip(verdicts) {
        let v = v?;
        rows.push(row![*b, *e, v.rho_e, v.trace, v.class.name()]);
        cells.push((*b, *e, v.class));
    }
    wrote(&out.csv("stability_map.csv", "beta,epsilon,rho_e,trace,class", &rows)?);
    let eps_grid: Vec<f64> = (0..grid).map(|j| 0.95 * j as f64 / (grid - 1) as f64).collect();
    let per: Vec<isosceles::Result<Vec<euler::DegeneracyCurvePoint>>> =
        eps_grid.par_iter().map(|&e| euler::stability_boundary_curves(&[e], n_max)).collect();
    let mut curve = Vec::new();
    let mut lost = 0;
    for r in per {
        match r {
            Ok(v) => curve.extend(v),
            Err(_) => lost += 1,
        }
    }
    let crow: Vec<Vec<Cell>> = curve.iter().map(|c| row![c.branch(), c.eps, c.beta]).collect();
    wrote(&out.csv("stability_curves.csv", "branch,epsilon,beta", &crow)?);
    if lost > 0 {
        eprintln!("curve tracing lost its bracket at {lost} of {} eccentricities", eps_grid.len());
    }
    if let Some(f) = out.svg("stability_map.svg", || {
        let mut pl = Plot::new("Euler orbit stability", "beta", "e", (0.0, 1.0), (0.0, 1.0));
        for &(b, e, c) in &cells {
            pl.cell(b, e, h, h, class_color(c));
        }
        let mut branches: Vec<String> = curve.iter().map(|c| c.branch()).collect();
        branches.sort();
        branches.dedup();
        for br in branches {
            let pts: Vec<(f64, f64)> = curve.iter().filter(|c| c.branch() == br).map(|c| (c.beta, c.eps)).collect();
            pl.polyline(&pts, "black", false);
        }
        pl.finish()
    })? {
        wrote(&f);
    }
    let nh = cells.iter().filter(|c| c.2 == StabilityClass::NegativeHyperbolic).count();
    println!("{} grid points, {nh} negative hyperbolic", cells.len());
    Ok(())
}

fn cmd_return_map(out: &Out, params: &ParamArgs, orbits: usize, iters: usize) -> Result<(), CliError> {
    let p = params.in_domain()?;
    let sec = Section::new(p)?;
    let (lo, hi) = (p.r_min(), p.r_max());
    let seeds: Vec<SectionPoint> =
        (0..orbits).map(|i| SectionPoint::new(0.0, lo + (hi - lo) * (i as f64 + 0.5) / orbits as f64)).collect();
    let runs: Vec<Vec<SectionPoint>> = seeds
        .par_iter()
        .map(|q| {
            let mut pts = vec![*q];
            let mut x = *q;
            for _ in 0..iters {
                match sec.gcheck(&x) {
                    Ok(y) => {
                        pts.push(y);
                        x = y;
                    }
                    Err(_) => break,
                }
            }
            pts
        })
        .collect();
    let mut rows = Vec::new();
    for (id, pts) in runs.iter().enumerate() {
        for (k, q) in pts.iter().enumerate() {
            rows.push(row![id, k, q.p_r, q.r]);
        }
    }
    wrote(&out.csv("return_map.csv", "orbit_id,iter,p_r,r", &rows)?);
    if let Some(f) = out.svg("return_map.svg", || {
        let all: Vec<(f64, f64)> = runs.iter().flatten().map(|q| (q.r, q.p_r)).collect();
        let (xb, yb) = Plot::bounds(all.iter().cloned());
        let mut pl = Plot::new(&format!("return map at (beta, e) = ({}, {})", p.beta, p.eps), "r", "p_r", xb, yb);
        let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
        for (i, run) in runs.iter().enumerate() {
            let pts: Vec<(f64, f64)> = run.iter().map(|q| (q.r, q.p_r)).collect();
            pl.scatter(&pts, colors[i % colors.len()], 1.2);
        }
        pl.finish()
    })? {
        wrote(&f);
    }
    let short = runs.iter().filter(|r| r.len() < iters + 1).count();
    println!("{orbits} orbits, {iters} iterates each ({short} stopped early)");
    Ok(())
}

fn cmd_hitting_time(out: &Out, c: f64, u0_min: f64, u0_max: f64, n: usize) -> Result<(), CliError> {
    if !(u0_min > 0.0 && u0_max > u0_min) || n < 2 {
        return Err(CliError::Usage("need 0 < --u0-min < --u0-max and --n >= 2".into()));
    }
    let us: Vec<f64> = (0..n).map(|i| u0_min * (u0_max / u0_min).powf(i as f64 / (n - 1) as f64)).collect();
    let ts: Vec<isosceles::Result<f64>> = us.par_iter().map(|&u| limitsys::t_infinity(u, c)).collect();
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for (u, t) in us.iter().zip(ts) {
        match t {
            Ok(t) => {
                rows.push(row![c, *u, t]);
                pts.push((u.log10(), t));
            }
            Err(isosceles::Error::Domain(_)) => break,
            Err(e) => return Err(e.into()),
        }
    }
    wrote(&out.csv("t_infinity.csv", "c,u0,T_inf", &rows)?);
    if let Some(f) = out.svg("t_infinity.svg", || {
        let (xb, yb) = Plot::bounds(pts.iter().cloned());
        let mut pl = Plot::new(&format!("hitting time, c = {c}"), "log10 u0", "T_inf", xb, yb);
        pl.polyline(&pts, "black", false);
        pl.finish()
    })? {
        wrote(&f);
    }
    println!("{} values, u_max = {}", rows.len(), limitsys::u_max(c));
    Ok(())
}

fn brake_record(model: &Model, o: &BrakeOrbit, zsym: &BrakeOrbit) -> Result<OrbitRecord, CliError> {
    let link_zsym = if (o.arc - zsym.arc).abs() < 1e-9 { 0 } else { brake::links(model, &o.start, o.period, zsym)?.1 };
    Ok(OrbitRecord {
        kind: OrbitType::ZSymmetricBrake,
        period: o.period,
        rotation_number: o.rho,
        link_euler: o.link_euler,
        link_zsym,
        seed_state: o.start,
    })
}

fn cmd_brake(
    out: &Out,
    params: &ParamArgs,
    alpha_window: Option<f64>,
    sweep: usize,
    max: usize,
) -> Result<(), CliError> {
    let p = match alpha_window {
        Some(a) => limitsys::window_params(a).map_err(|e| CliError::Usage(e.to_string()))?,
        None => params.in_domain()?,
    };
    let cat = brake::brake_catalog(p, sweep, max)?;
    let zsym = brake::shoot_z_symmetric(p)?;
    let model = Model::new(p);
    let rows: Vec<Vec<Cell>> =
        cat.iter().map(|o| row![o.arc, o.quarter, o.period, o.rho, o.kind.name(), o.z_symmetric]).collect();
    wrote(&out.csv("brake_catalog.csv", "arc,T0,period,rho,type,zsym", &rows)?);
    let recs: Vec<OrbitRecord> = cat.iter().map(|o| brake_record(&model, o, &zsym)).collect::<Result<_, _>>()?;
    wrote(&out.jsonl("brake_catalog.jsonl", &recs)?);
    let rho_e = euler::rotation_number_euler(p)?;
    println!("(beta, eps) = ({}, {}), rho_e = {rho_e}", p.beta, p.eps);
    for o in &cat {
        let ok = brake::hopf_nonresonance(rho_e, o.rho);
        println!(
            "  arc {:.9} period {:.9} rho {:.6} link {} {}",
            o.arc,
            o.period,
            o.rho,
            o.link_euler,
            if ok { "non-resonant" } else { "resonant" }
        );
    }
    Ok(())
}

fn cmd_harvest(
    out: &Out,
    params: &ParamArgs,
    n_max: usize,
    samples: usize,
    per_type: usize,
    pq_max: i64,
) -> Result<(), CliError> {
    let p = params.in_domain()?;
    if n_max < 1 || samples < 8 {
        return Err(CliError::Usage("need --n-max >= 1 and --samples >= 8".into()));
    }
    let sec = Section::new(p)?;
    let zsym = brake::shoot_z_symmetric(p)?;
    let fixed = section::fixed_point_on_axis(&sec)?;
    let cfg = HarvestConfig { n_max, n_records: n_max.min(3), samples, per_type, ..HarvestConfig::default() };
    let rep = section::harvest_symmetric_orbits(&sec, &zsym, &fixed, &cfg)?;
    let mut records = rep.records.clone();
    let rot = section::rotation_data(euler::rotation_number_euler(p)?, zsym.rho);
    for pp in 1..=pq_max {
        for qq in 1..=3 * pq_max {
            if !section::pq_window(&rot, pp, qq) || gcd(pp, qq) != 1 {
                continue;
            }
            if let Ok(o) = section::find_pq_orbit(&sec, &zsym, &fixed, &rot, pp, qq, 128) {
                println!("  ({pp}, {qq}) orbit, period {}", o.period);
                records.push(o);
            }
        }
    }
    wrote(&out.jsonl("harvest.jsonl", &records)?);
    let rows: Vec<Vec<Cell>> = rep.counts.iter().map(|&(n, c)| row![n, c]).collect();
    wrote(&out.csv("harvest_counts.csv", "n,count", &rows)?);
    println!("Rot(p) = {}, Rot(boundary) = {}, twist {}", rot.rot_fixed, rot.rot_boundary, rot.twist);
    for kind in
        [OrbitType::ZSymmetricBrake, OrbitType::TypeIBrake, OrbitType::TypeIIBrake, OrbitType::ZSymmetricNonBrake]
    {
        println!("  {}: {}", kind.name(), rep.records.iter().filter(|o| o.kind == kind).count());
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cmd_limit(out: &Out, c: f64, k_max: u32) -> Result<(), CliError> {
    let fam = limitsys::limit_family(k_max, c).map_err(|e| match e {
        isosceles::Error::InvalidParameter(s) => CliError::Usage(s),
        e => e.into(),
    })?;
    let rows: Vec<Vec<Cell>> = fam.iter().map(|e| row![e.c, e.k, e.u0, e.v0, e.t_inf, e.rho]).collect();
    wrote(&out.csv("limit_family.csv", "c,k,u0,v0,T_inf,rho", &rows)?);
    let mut gaps = Vec::new();
    for a in [1e2, 1e3, 1e4] {
        let g = limitsys::convergence_gap(a, (-0.9, 0.9), (-2.0, 2.0), 40)?;
        gaps.push(row![a, g.value, g.gradient]);
    }
    wrote(&out.csv("limit_gap.csv", "alpha,gap,gradient_gap", &gaps)?);
    println!("{} family members at c = {c}", fam.len());
    Ok(())
}

fn cmd_convexity(out: &Out, params: &ParamArgs, curve: bool, n: usize, grid: usize) -> Result<(), CliError> {
    if curve {
        if n < 3 {
            return Err(CliError::Usage("--n must be at least 3".into()));
        }
        let (lo, hi) = convexity::nu_bounds();
        let (b0, e0) = convexity::conv_curve_param(lo);
        let (b1, e1) = convexity::conv_curve_param(hi);
        let mut rows = vec![row![b0, e0, ""]];
        let mut pts = vec![(b0, e0)];
        let mut bpts = Vec::new();
        for i in 1..n - 1 {
            let b = i as f64 / (n - 1) as f64;
            let e = convexity::eps_conv_root(b)?.eps;
            let eb = convexity::boundary_loss_curve(convexity::alpha_of_beta(b))?.eps;
            rows.push(row![b, e, eb]);
            pts.push((b, e));
            bpts.push((b, eb));
        }
        rows.push(row![b1, e1, ""]);
        pts.push((b1, e1));
        wrote(&out.csv("convexity_curve.csv", "beta,eps_conv,eps_boundary", &rows)?);
        if let Some(f) = out.svg("convexity_curve.svg", || {
            let mut pl = Plot::new("convexity threshold", "beta", "e", (0.0, 1.0), (0.0, 1.0));
            pl.polyline(&pts, "black", false);
            pl.polyline(&bpts, "#888888", false);
            pl.finish()
        })? {
            wrote(&f);
        }
        println!("eps_conv(0) = {e0}, eps_conv(1) = {e1}");
        return Ok(());
    }
    let p = params.in_domain()?;
    let rep = convexity::classify(p)?;
    let scan = convexity::min_delta_scan(p, grid)?;
    let (alpha, w2) = (p.alpha(), p.varpi2());
    let kmax = convexity::k_max(alpha, w2);
    // rectangle around the Hill region in the rescaled (r, z) plane
    let mut r_lo = f64::INFINITY;
    let mut r_hi: f64 = 0.0;
    let mut z_hi: f64 = 0.0;
    for i in 0..=256 {
        let k = 1.0 + (kmax - 1.0) * i as f64 / 256.0;
        if let Some((_, rl, rr)) = convexity::hill_rk(k, alpha, w2) {
            r_lo = r_lo.min(rl);
            r_hi = r_hi.max(rr);
            z_hi = z_hi.max(rr * (k * k - 1.0).sqrt());
        }
    }
    let inside = |r: f64, z: f64| {
        let k = (1.0 + (z / r).powi(2)).sqrt();
        matches!(convexity::hill_rk(k, alpha, w2), Some((_, rl, rr)) if r >= rl && r <= rr)
    };
    let g = grid.max(2);
    let (dr, dz) = ((r_hi - r_lo) / g as f64, 2.0 * z_hi / g as f64);
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for i in 0..g {
        let r = r_lo + (i as f64 + 0.5) * dr;
        for j in 0..g {
            let z = -z_hi + (j as f64 + 0.5) * dz;
            if inside(r, z) {
                let d = convexity::delta_rz(r, z, alpha, w2);
                rows.push(row![r, z, d]);
                cells.push((r, z, d));
            }
        }
    }
    wrote(&out.csv("convexity_heatmap.csv", "r,z,delta", &rows)?);
    if let Some(f) = out.svg("convexity_heatmap.svg", || {
        let scale = cells.iter().map(|c| c.2.abs()).fold(0.0, f64::max).max(1e-300);
        let mut pl = Plot::new("Delta over the Hill region", "r", "z", (r_lo, r_hi), (-z_hi, z_hi));
        for &(r, z, d) in &cells {
            pl.cell(r, z, dr, dz, &svg::diverging(d.signum() * (d.abs() / scale).sqrt(), 1.0));
        }
        pl.finish()
    })? {
        wrote(&f);
    }
    #[derive(Serialize)]
    struct Report {
        beta: f64,
        eps: f64,
        class: &'static str,
        eps_conv: f64,
        witness: Option<(f64, f64)>,
        scan_min: f64,
        scan_r: f64,
        scan_k: f64,
    }
    let class = match rep.class {
        ConvexityClass::StrictlyConvex => "strictly_convex",
        ConvexityClass::ConvexNotStrict => "convex_not_strict",
        ConvexityClass::NonConvex => "non_convex",
    };
    let line = output::json_line(&Report {
        beta: p.beta,
        eps: p.eps,
        class,
        eps_conv: rep.eps_conv,
        witness: rep.witness,
        scan_min: scan.min,
        scan_r: scan.r,
        scan_k: scan.k,
    })?;
    wrote(&out.write("convexity.json", &format!("{line}\n"))?);
    println!("{line}");
    Ok(())
}

fn cmd_verify(only: &[u8]) -> Result<(), CliError> {
    let ids: Vec<u8> = if only.is_empty() { (1..=14).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=14).contains(&i)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let mut failed = 0;
    for id in ids {
        let c = verify::run(id);
        println!("{:>2}  {}  {:<44} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}
