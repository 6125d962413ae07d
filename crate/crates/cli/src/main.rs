mod checks;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use apollonian::carpet::{self, Bump, Coordinate, OrbitOptions};
use apollonian::fit::geometric_grid;
use apollonian::forms::MassLumping;
use apollonian::gasket::{self, CountOptions, SvgOptions};
use apollonian::geom::{self, DiskTriple, GeneralizedDisk, Tolerance};
use apollonian::spectra::{self, HowMany, Scheme, SolveOptions};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{csv, Sink};

/// Apollonian gaskets, round Sierpiński carpets and their Laplacians.
#[derive(Debug, Parser)]
#[command(name = "apollonian", version)]
struct Cli {
    /// Write results into this directory instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 20240607)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Circle counting, dimension fits and renders of a gasket.
    Gasket {
        #[command(subcommand)]
        op: GasketOp,
    },
    /// Eigenvalues of a discretized gasket Laplacian.
    Spectrum(SpectrumArgs),
    /// Counting-function exponent of a discretized gasket Laplacian.
    Weyl(SchemeArgs),
    /// Run one acceptance suite; exits with 2 when a check fails.
    Checks {
        #[arg(long, value_enum)]
        suite: checks::Suite,
    },
    /// Limit-set circles of the reflection group G_q.
    Carpet {
        #[command(subcommand)]
        op: CarpetOp,
    },
}

#[derive(Debug, Subcommand)]
enum GasketOp {
    /// CSV of (lambda, N(lambda)) on a geometric grid ending at --lambda-max.
    Count {
        #[arg(long, default_value = "unit")]
        triple: String,
        #[arg(long)]
        lambda_max: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 40)]
        grid: usize,
        /// Grid start (default: inscribed curvature of the root triple).
        #[arg(long)]
        lambda_min: Option<f64>,
    },
    /// Circle-counting exponent over [d0, factor * d0], d0 the inscribed curvature.
    Dim {
        #[arg(long, default_value = "unit")]
        triple: String,
        #[arg(long, default_value_t = 1e4)]
        factor: f64,
        #[arg(long, default_value_t = 40)]
        grid: usize,
    },
    /// SVG of all circles down to the given depth.
    Render {
        #[arg(long, default_value = "unit")]
        triple: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeName {
    Trace,
    Arcfem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Lumping {
    Thirds,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dirichlet {
    V0,
    None,
}

#[derive(Debug, clap::Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "trace")]
    scheme: SchemeName,
    #[arg(long)]
    depth: usize,
    /// Segments per arc piece (arc-FEM only).
    #[arg(long, default_value_t = 4)]
    refine: usize,
    /// Mass lumping (trace only).
    #[arg(long, value_enum, default_value = "thirds")]
    lumping: Lumping,
    #[arg(long, value_enum, default_value = "v0")]
    dirichlet: Dirichlet,
    #[arg(long, default_value = "unit")]
    triple: String,
}

#[derive(Debug, clap::Args)]
struct SpectrumArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Number of lowest eigenvalues (default: all).
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct OrbitArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 1e-3)]
    min_radius: f64,
}

#[derive(Debug, Subcommand)]
enum CarpetOp {
    /// Circle CSV (center_x, center_y, radius, generation) and SVG.
    Gen(OrbitArgs),
    /// Circle-counting exponent over the top curvature decade.
    Dim(OrbitArgs),
    /// Relative separation constant and disjointness audit.
    Separation(OrbitArgs),
    /// E(h_i, v) for the standard bump family.
    Harmonicity {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Quadrature nodes per circle arc.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Validation(String),
    Assertion,
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn parse_triple(spec: &str) -> Result<DiskTriple, Failure> {
    let s = spec.trim();
    if s == "unit" {
        return Ok(geom::triple_from_curvatures(1.0, 1.0, 1.0)?);
    }
    if s.starts_with('[') {
        let disks: Vec<GeneralizedDisk> = serde_json::from_str(s).map_err(|e| invalid(format!("triple JSON: {e}")))?;
        if disks.len() != 3 {
            return Err(invalid("triple JSON must list three disks"));
        }
        let d: Vec<GeneralizedDisk> = disks.into_iter().map(|d| d.validated()).collect::<Result<_, _>>()?;
        return Ok(geom::validate_triple(&d[0], &d[1], &d[2], &Tolerance::default())?);
    }
    let k: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| {
        invalid(format!("unknown triple '{spec}': use 'unit', curvatures 'a,b,c' or a JSON list of disks"))
    })?;
    if k.len() != 3 {
        return Err(invalid("curvature triple needs three values"));
    }
    Ok(geom::triple_from_curvatures(k[0], k[1], k[2])?)
}

fn scheme_of(a: &SchemeArgs) -> Result<Scheme, Failure> {
    Ok(match a.scheme {
        SchemeName::Trace => Scheme::Trace {
            lumping: match a.lumping {
                Lumping::Thirds => MassLumping::CellThirds,
                Lumping::Arc => MassLumping::ArcLength,
            },
        },
        SchemeName::Arcfem => {
            if a.refine == 0 {
                return Err(invalid("refine must be positive"));
            }
            Scheme::ArcFem { refine: a.refine }
        }
    })
}

fn build_evp(a: &SchemeArgs) -> Result<spectra::GeneralizedEVP, Failure> {
    let t = parse_triple(&a.triple)?;
    Ok(scheme_of(a)?.evp(&t, a.depth, a.dirichlet == Dirichlet::V0)?)
}

fn positive(name: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite")))
    }
}

fn orbit(a: &OrbitArgs) -> Result<carpet::CircleOrbit, Failure> {
    positive("min-radius", a.min_radius)?;
    let cfg = carpet::solve_params(a.q)?;
    Ok(carpet::enumerate_circles(&cfg, a.min_radius, &OrbitOptions::default())?)
}

#[derive(Serialize)]
struct DimReport {
    slope: f64,
    prefactor: f64,
    r2: f64,
    lambda_lo: f64,
    lambda_hi: f64,
    points: usize,
}

#[derive(Serialize)]
struct SeparationReport {
    q: u32,
    min_radius: f64,
    circles: usize,
    #[serde(flatten)]
    stats: carpet::SeparationStats,
}

#[derive(Serialize)]
struct HarmonicityRow {
    bump: Bump,
    coordinate: Coordinate,
    residual: f64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| invalid(e.to_string()))?;
    }
    let sink = Sink::new(cli.output.clone())?;
    match cli.command {
        Command::Gasket { op } => match op {
            GasketOp::Count { triple, lambda_max, grid, lambda_min } => {
                positive("lambda-max", lambda_max)?;
                if grid == 0 {
                    return Err(invalid("grid must be positive"));
                }
                let t = parse_triple(&triple)?;
                let lo = lambda_min.unwrap_or_else(|| t.quad().inscribed_curvature().min(lambda_max));
                positive("lambda-min", lo)?;
                let lambdas = geometric_grid(lo, lambda_max, grid);
                let counts = gasket::count_grid(&t.quad(), &lambdas, &CountOptions::default())?;
                let body = csv(&["lambda", "count"], lambdas.iter().zip(&counts).map(|(&l, &n)| vec![l, n as f64]));
                sink.emit("gasket_count.csv", &body)?;
            }
            GasketOp::Dim { triple, factor, grid } => {
                positive("factor", factor)?;
                let t = parse_triple(&triple)?;
                let d0 = t.quad().inscribed_curvature();
                let lambdas = geometric_grid(d0, factor * d0, grid);
                let counts = gasket::count_grid(&t.quad(), &lambdas, &CountOptions::default())?;
                let pts: Vec<(f64, f64)> = lambdas.iter().zip(&counts).map(|(&l, &n)| (l, n as f64)).collect();
                let f = gasket::fit_dimension(&pts)?;
                sink.emit_json(
                    "gasket_dim.json",
                    &DimReport { slope: f.slope, prefactor: f.prefactor, r2: f.r2, lambda_lo: d0, lambda_hi: factor * d0, points: grid },
                )?;
            }
            GasketOp::Render { triple, depth, size } => {
                positive("size", size)?;
                let t = parse_triple(&triple)?;
                let cells = gasket::cells_up_to(&t, depth)?;
                let svg = gasket::render_svg(&cells, &SvgOptions { size, ..Default::default() });
                sink.emit("gasket.svg", &svg)?;
            }
        },
        Command::Spectrum(a) => {
            let evp = build_evp(&a.scheme)?;
            let how = a.top.map_or(HowMany::All, HowMany::Lowest);
            let opts = SolveOptions { allow_disconnected: true, ..Default::default() };
            let s = spectra::solve(&evp, how, &opts)?;
            sink.emit_json("spectrum.json", &s)?;
        }
        Command::Weyl(a) => {
            let evp = build_evp(&a)?;
            let n = evp.free_indices().len();
            let s = spectra::solve(&evp, HowMany::Lowest(n / 2 + 1 + spectra::WEYL_EXTRA), &SolveOptions::default())?;
            sink.emit_json("weyl.json", &spectra::weyl_fit(&s)?)?;
        }
        Command::Checks { suite } => {
            let lines = checks::run(suite, cli.seed).map_err(Failure::Validation)?;
            let body: String = lines.iter().map(|l| l.render() + "\n").collect();
            sink.emit("checks.txt", &body)?;
            if lines.iter().any(|l| !l.passed) {
                return Err(Failure::Assertion);
            }
        }
        Command::Carpet { op } => match op {
            CarpetOp::Gen(a) => {
                let o = orbit(&a)?;
                let body = csv(
                    &["center_x", "center_y", "radius", "generation"],
                    o.circles.iter().map(|c| vec![c.center.re, c.center.im, c.radius, c.generation as f64]),
                );
                sink.emit("carpet_circles.csv", &body)?;
                if sink.dir().is_some() {
                    sink.emit("carpet.svg", &carpet::render_orbit_svg(&o, 800.0))?;
                }
            }
            CarpetOp::Dim(a) => {
                let o = orbit(&a)?;
                let f = carpet::fit_carpet_dimension(&o)?;
                sink.emit_json(
                    "carpet_dim.json",
                    &DimReport { slope: f.slope, prefactor: f.fit.intercept.exp(), r2: f.fit.r2, lambda_lo: f.lambda_lo, lambda_hi: f.lambda_hi, points: o.len() },
                )?;
            }
            CarpetOp::Separation(a) => {
                let o = orbit(&a)?;
                let stats = carpet::separation_stats(&o)?;
                sink.emit_json("carpet_separation.json", &SeparationReport { q: a.q, min_radius: a.min_radius, circles: o.len(), stats })?;
            }
            CarpetOp::Harmonicity { orbit: a, nodes } => {
                let o = orbit(&a)?;
                let mut rows = Vec::new();
                for b in Bump::standard_family() {
                    for coordinate in [Coordinate::X, Coordinate::Y] {
                        rows.push(HarmonicityRow { bump: b, coordinate, residual: carpet::harmonicity_residual(&o, &b, coordinate, nodes)? });
                    }
                }
                sink.emit_json("carpet_harmonicity.json", &rows)?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Assertion) => ExitCode::from(2),
    }
}
